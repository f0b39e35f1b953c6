use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A named finite alphabet `{0, .., size-1}` with optional display labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAlphabet")]
pub struct Alphabet {
    name: String,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

#[derive(Deserialize)]
struct RawAlphabet {
    name: String,
    size: usize,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

impl TryFrom<RawAlphabet> for Alphabet {
    type Error = Error;

    fn try_from(raw: RawAlphabet) -> Result<Self> {
        match raw.labels {
            Some(labels) => Alphabet::with_labels(raw.name, labels),
            None => Alphabet::new(raw.name, raw.size),
        }
        .and_then(|a| {
            if a.size == raw.size {
                Ok(a)
            } else {
                Err(Error::InvalidAlphabet(format!(
                    "`{}` declares size {} but has {} labels",
                    a.name, raw.size, a.size
                )))
            }
        })
    }
}

impl Alphabet {
    pub fn new(name: impl Into<String>, size: usize) -> Result<Self> {
        let name = name.into();
        if name.is_empty() {
            return Err(Error::InvalidAlphabet("empty name".into()));
        }
        if size == 0 {
            return Err(Error::InvalidAlphabet(format!("`{name}` has size 0")));
        }
        Ok(Self {
            name,
            size,
            labels: None,
        })
    }

    pub fn with_labels<S: Into<String>>(name: impl Into<String>, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut a = Self::new(name, labels.len())?;
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::InvalidAlphabet(format!("`{}` repeats label `{l}`", a.name)));
            }
        }
        a.labels = Some(labels);
        Ok(a)
    }

    /// `{0, 1}` with labels "0", "1".
    pub fn binary(name: impl Into<String>) -> Self {
        Self::with_labels(name, ["0", "1"]).expect("valid binary alphabet")
    }

    /// A size-one alphabet, used for an absent auxiliary variable.
    pub fn trivial(name: impl Into<String>) -> Self {
        Self::new(name, 1).expect("valid trivial alphabet")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display label of letter `i`, falling back to its index.
    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None => i.to_string(),
        }
    }

    /// Same letters under a different variable name.
    pub fn renamed(&self, name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..self.clone()
        }
    }

    /// Alphabets are interchangeable when their sizes agree; labels are cosmetic.
    pub fn compatible(&self, other: &Alphabet) -> bool {
        self.size == other.size
    }
}
