//! The three-relay diamond network whose second stage is a two-user binary
//! MAC `W` plus a clean side link.
//!
//! The source bit is hidden behind independent fair coins: relays 0 and 1
//! see `Y0`, `Y1`, and relay 2 sees `(X ⊕ Y_Z, Z)` for a fair selector `Z`.
//! Without cooperation the network carries at most half the MAC
//! sum-capacity; a three-part code splitting the message across the two MAC
//! users achieves half of any MAC rate pair, so cooperation gains transfer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{mutual_information, Alphabet, CondKernel, FiniteDist};

/// A two-user MAC with binary inputs `x0`, `x1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMac")]
pub struct MacSpec {
    x0_alphabet: Alphabet,
    x1_alphabet: Alphabet,
    kernel: CondKernel,
}

#[derive(Deserialize)]
struct RawMac {
    x0_alphabet: Alphabet,
    x1_alphabet: Alphabet,
    kernel: CondKernel,
}

impl TryFrom<RawMac> for MacSpec {
    type Error = Error;

    fn try_from(r: RawMac) -> Result<Self> {
        MacSpec::new(r.x0_alphabet, r.x1_alphabet, r.kernel)
    }
}

impl MacSpec {
    pub fn new(x0_alphabet: Alphabet, x1_alphabet: Alphabet, kernel: CondKernel) -> Result<Self> {
        let from = kernel.from();
        if from.len() != 2 || from[0].name() != x0_alphabet.name() || from[1].name() != x1_alphabet.name() {
            return Err(Error::AlphabetMismatch {
                name: "kernel.from".into(),
                detail: format!("expected [{}, {}]", x0_alphabet.name(), x1_alphabet.name()),
            });
        }
        if !from[0].compatible(&x0_alphabet) || !from[1].compatible(&x1_alphabet) {
            return Err(Error::AlphabetMismatch {
                name: "kernel.from".into(),
                detail: "input sizes disagree with the declared alphabets".into(),
            });
        }
        if x0_alphabet.size() != 2 || x1_alphabet.size() != 2 {
            return Err(Error::InvalidParameter("both MAC inputs must be binary".into()));
        }
        if kernel.to().len() != 1 {
            return Err(Error::AlphabetMismatch {
                name: "kernel.to".into(),
                detail: "expected a single output variable".into(),
            });
        }
        if let Some(row) = (0..kernel.n_rows()).find(|&r| !kernel.is_defined(r)) {
            return Err(Error::InvalidParameter(format!("MAC row {row} is undefined")));
        }
        Ok(Self {
            x0_alphabet,
            x1_alphabet,
            kernel,
        })
    }

    /// Builds `W(y | x0, x1)` from a law over `n_out` output letters.
    pub fn from_law(n_out: usize, law: impl Fn(usize, usize, usize) -> f64) -> Result<Self> {
        let (x0, x1) = (Alphabet::binary("x0"), Alphabet::binary("x1"));
        let kernel = CondKernel::from_fn(
            vec![x0.clone(), x1.clone()],
            vec![Alphabet::new("y_w", n_out)?],
            |f, t| law(f[0], f[1], t[0]),
        )?;
        Self::new(x0, x1, kernel)
    }

    pub fn kernel(&self) -> &CondKernel {
        &self.kernel
    }

    pub fn n_out(&self) -> usize {
        self.kernel.row_len()
    }

    /// `W(y | x0, x1)`.
    pub fn w(&self, x0: usize, x1: usize, y: usize) -> f64 {
        self.kernel.row(x0 * 2 + x1).expect("rows are defined")[y]
    }

    /// The same channel with the letters of one input swapped.
    pub fn relabeled(&self, flip_x0: bool, flip_x1: bool) -> Self {
        Self::from_law(self.n_out(), |a, b, y| {
            self.w(a ^ flip_x0 as usize, b ^ flip_x1 as usize, y)
        })
        .expect("relabeling preserves validity")
    }
}

/// `I(X0,X1;Y)` for independent `X0 ~ Ber(a)`, `X1 ~ Ber(b)`.
pub fn mac_rate(mac: &MacSpec, a: f64, b: f64) -> f64 {
    let px = [[(1.0 - a) * (1.0 - b), (1.0 - a) * b], [a * (1.0 - b), a * b]];
    let mut h_y = 0.0;
    let mut h_y_given = 0.0;
    for y in 0..mac.n_out() {
        let mut py = 0.0;
        for (x0, row) in px.iter().enumerate() {
            for (x1, &p) in row.iter().enumerate() {
                let w = mac.w(x0, x1, y);
                py += p * w;
                if w > 0.0 {
                    h_y_given -= p * w * w.log2();
                }
            }
        }
        if py > 0.0 {
            h_y -= py * py.log2();
        }
    }
    (h_y - h_y_given).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MacCapacity {
    pub value: f64,
    /// `P(X0 = 1)`, `P(X1 = 1)` at the optimiser.
    pub p_x0: f64,
    pub p_x1: f64,
    pub trace: Vec<(f64, f64)>,
}

/// Best `I(X0,X1;Y)` over product inputs: a `(res+1)²` grid followed by a
/// shrinking-step pattern search.
pub fn mac_sum_capacity_indep(mac: &MacSpec, grid_resolution: usize) -> Result<MacCapacity> {
    if grid_resolution < 2 {
        return Err(Error::InvalidParameter("grid_resolution must be at least 2".into()));
    }
    let res = grid_resolution as f64;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=grid_resolution {
        for j in 0..=grid_resolution {
            let (a, b) = (i as f64 / res, j as f64 / res);
            let r = mac_rate(mac, a, b);
            if r > best.0 {
                best = (r, a, b);
            }
        }
    }
    let mut trace = vec![(res, best.0)];
    let mut h = 1.0 / res;
    while h > 1e-12 {
        let mut moved = false;
        for (da, db) in [
            (h, 0.0),
            (-h, 0.0),
            (0.0, h),
            (0.0, -h),
            (h, h),
            (-h, -h),
            (h, -h),
            (-h, h),
        ] {
            let (a, b) = ((best.1 + da).clamp(0.0, 1.0), (best.2 + db).clamp(0.0, 1.0));
            let r = mac_rate(mac, a, b);
            if r > best.0 + 1e-16 {
                best = (r, a, b);
                moved = true;
            }
        }
        if !moved {
            h *= 0.5;
            trace.push((h, best.0));
        }
    }
    Ok(MacCapacity {
        value: best.0,
        p_x0: best.1,
        p_x1: best.2,
        trace,
    })
}

/// Capacity bound of the diamond network without cooperation.
pub fn diamond_upper_bound(c_sum0: f64) -> Result<f64> {
    if !(c_sum0 >= 0.0 && c_sum0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "sum-capacity {c_sum0} must be finite and non-negative"
        )));
    }
    Ok(c_sum0 / 2.0)
}

/// One line of the halving chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub expression: String,
    pub value: f64,
    /// `"="` or `"<="` relative to the previous line.
    pub relation: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalvingChain {
    pub steps: Vec<ChainStep>,
    pub holds: bool,
}

/// Evaluates the single-letter halving chain for relay maps `f0`, `f1`
/// (lookup tables on `{0, 1}`) and `X ~ Ber(p_x)`.
pub fn halving_chain(mac: &MacSpec, f0: [usize; 2], f1: [usize; 2], p_x: f64) -> Result<HalvingChain> {
    if f0.iter().chain(&f1).any(|&b| b > 1) || !(0.0..=1.0).contains(&p_x) {
        return Err(Error::InvalidParameter(
            "relay maps must be binary and p_x must lie in [0, 1]".into(),
        ));
    }
    let b = Alphabet::binary;
    let vars = vec![
        b("x"),
        b("y0"),
        b("y1"),
        b("z"),
        b("yz"),
        b("yzc"),
        b("s"),
        Alphabet::new("yw", mac.n_out())?,
    ];
    let joint = FiniteDist::from_fn(vars, |i| {
        let [x, y0, y1, z, yz, yzc, s, yw] = [i[0], i[1], i[2], i[3], i[4], i[5], i[6], i[7]];
        let (sel, other) = if z == 0 { (y0, y1) } else { (y1, y0) };
        if yz != sel || yzc != other || s != x ^ sel {
            return 0.0;
        }
        let px = if x == 1 { p_x } else { 1.0 - p_x };
        px * 0.125 * mac.w(f0[y0], f1[y1], yw)
    })?;
    let mi = |a: &[&str], bb: &[&str], c: &[&str]| mutual_information(&joint, a, bb, c);
    let lines: Vec<(&str, &str, f64)> = vec![
        ("I(X;Y)", "", mi(&["x"], &["yw", "s", "z"], &[])?),
        (
            "I(X;Y2) + I(X;Yw|Y2)",
            "=",
            mi(&["x"], &["s", "z"], &[])? + mi(&["x"], &["yw"], &["s", "z"])?,
        ),
        ("I(X;Yw|Y2)", "=", mi(&["x"], &["yw"], &["s", "z"])?),
        ("I(X, X+Y_Z;Yw|Z)", "<=", mi(&["x", "s"], &["yw"], &["z"])?),
        ("I(X, Y_Z;Yw|Z)", "=", mi(&["x", "yz"], &["yw"], &["z"])?),
        (
            "I(Y_Z;Yw|Z) + I(X;Yw|Y_Z,Z)",
            "=",
            mi(&["yz"], &["yw"], &["z"])? + mi(&["x"], &["yw"], &["yz", "z"])?,
        ),
        ("I(Y_Z;Yw|Z)", "=", mi(&["yz"], &["yw"], &["z"])?),
        (
            "(I(Y_Z;Yw|Z) + I(Y_Zc;Yw|Z))/2",
            "=",
            0.5 * (mi(&["yz"], &["yw"], &["z"])? + mi(&["yzc"], &["yw"], &["z"])?),
        ),
        (
            "(I(Y_Z;Yw|Z) + I(Y_Zc;Yw,Y_Z|Z))/2",
            "<=",
            0.5 * (mi(&["yz"], &["yw"], &["z"])? + mi(&["yzc"], &["yw", "yz"], &["z"])?),
        ),
        (
            "(I(Y_Z;Yw|Z) + I(Y_Zc;Y_Z|Z) + I(Y_Zc;Yw|Y_Z,Z))/2",
            "=",
            0.5 * (mi(&["yz"], &["yw"], &["z"])?
                + mi(&["yzc"], &["yz"], &["z"])?
                + mi(&["yzc"], &["yw"], &["yz", "z"])?),
        ),
        (
            "(I(Y_Z;Yw|Z) + I(Y_Zc;Yw|Y_Z,Z))/2",
            "=",
            0.5 * (mi(&["yz"], &["yw"], &["z"])? + mi(&["yzc"], &["yw"], &["yz", "z"])?),
        ),
        ("I(Y_Z,Y_Zc;Yw|Z)/2", "=", 0.5 * mi(&["yz", "yzc"], &["yw"], &["z"])?),
        ("I(Y0,Y1;Yw)/2", "=", 0.5 * mi(&["y0", "y1"], &["yw"], &[])?),
    ];
    const SLACK: f64 = 1e-12;
    let mut steps: Vec<ChainStep> = Vec::with_capacity(lines.len());
    for (expr, rel, value) in lines {
        let holds = match (rel, steps.last()) {
            ("=", Some(prev)) => (value - prev.value).abs() <= SLACK,
            ("<=", Some(prev)) => prev.value <= value + SLACK,
            _ => true,
        };
        steps.push(ChainStep {
            expression: expr.to_string(),
            value,
            relation: rel.to_string(),
            holds,
        });
    }
    let holds = steps.iter().all(|s| s.holds);
    Ok(HalvingChain { steps, holds })
}

/// The three-part code turning a MAC rate pair into a diamond rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSplit {
    /// The larger and smaller MAC rates.
    pub r0: f64,
    pub r1: f64,
    /// Whether the inputs were given in the opposite order.
    pub swapped: bool,
    pub eps: f64,
    /// `(r0 + r1)/2 - eps`.
    pub rate: f64,
    /// Bits of `M1` and `M2` per channel use.
    pub m1_fraction: f64,
    pub m2_fraction: f64,
    /// Block fractions: uncoded `M1`, erasure-coded `M2`, zero padding.
    pub segments: [f64; 3],
    /// Rate of the erasure code on the middle segment, if it is non-empty.
    pub erasure_code_rate: Option<f64>,
}

pub fn rate_split_achievable(r0: f64, r1: f64, eps: f64) -> Result<RateSplit> {
    for (n, r) in [("r0", r0), ("r1", r1)] {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::InvalidParameter(format!(
                "{n} = {r} must lie in [0, 1] for binary MAC inputs"
            )));
        }
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps = {eps} must be positive")));
    }
    let swapped = r1 > r0;
    let (hi, lo) = if swapped { (r1, r0) } else { (r0, r1) };
    let rate = (hi + lo) / 2.0 - eps;
    let middle = hi - lo;
    Ok(RateSplit {
        r0: hi,
        r1: lo,
        swapped,
        eps,
        rate,
        m1_fraction: lo,
        m2_fraction: rate - lo,
        segments: [lo, middle, 1.0 - hi],
        erasure_code_rate: (middle > 0.0).then(|| (rate - lo) / middle),
    })
}

/// Samples `(c_cf, c_sum)` of a cooperative MAC sum-capacity curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(f64, f64)>", into = "Vec<(f64, f64)>")]
pub struct CoopCurve {
    samples: Vec<(f64, f64)>,
}

impl TryFrom<Vec<(f64, f64)>> for CoopCurve {
    type Error = Error;

    fn try_from(v: Vec<(f64, f64)>) -> Result<Self> {
        CoopCurve::new(v)
    }
}

impl From<CoopCurve> for Vec<(f64, f64)> {
    fn from(c: CoopCurve) -> Self {
        c.samples
    }
}

#[derive(Deserialize)]
struct CurveRow {
    c_cf: f64,
    c_sum: f64,
}

impl CoopCurve {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples
            .iter()
            .any(|&(c, s)| !c.is_finite() || !s.is_finite() || c < 0.0)
        {
            return Err(Error::InvalidCurve("samples must be finite with c_cf >= 0".into()));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::InvalidCurve(format!(
                    "c_cf not strictly increasing at {}",
                    w[1].0
                )));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::InvalidCurve(format!("c_sum decreases at c_cf = {}", w[1].0)));
            }
        }
        Ok(Self { samples })
    }

    /// Reads CSV with header `c_cf,c_sum`.
    pub fn from_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut samples = Vec::new();
        for row in rdr.deserialize::<CurveRow>() {
            let row = row?;
            samples.push((row.c_cf, row.c_sum));
        }
        Self::new(samples)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    /// Linear interpolation; `None` outside the sampled range.
    pub fn interpolate(&self, c: f64) -> Option<f64> {
        let i = self.samples.iter().position(|&(x, _)| x >= c)?;
        let (x1, y1) = self.samples[i];
        if x1 == c {
            return Some(y1);
        }
        let (x0, y0) = *self.samples.get(i.checked_sub(1)?)?;
        Some(y0 + (y1 - y0) * (c - x0) / (x1 - x0))
    }
}

/// Default flag threshold on the smallest-`c` difference quotient.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferReport {
    /// `(c_cf, C_sum(c_cf)/2)`: lower bound on the diamond capacity.
    pub lower_bound: Vec<(f64, f64)>,
    /// `(c, (C_sum(c) - C_sum(0)) / (2c))` for each positive sample.
    pub quotients: Vec<(f64, f64)>,
    /// Quotients strictly increase as `c` decreases.
    pub increasing: bool,
    pub threshold: f64,
    /// Heuristic: increasing quotients whose smallest-`c` value exceeds the
    /// threshold.
    pub divergence: bool,
}

pub fn slope_transfer(curve: &CoopCurve, threshold: f64) -> Result<TransferReport> {
    let s = curve.samples();
    if s.len() < 3 || s[0].0 != 0.0 {
        return Err(Error::InvalidCurve(
            "need at least three samples, starting at c_cf = 0".into(),
        ));
    }
    let base = s[0].1 / 2.0;
    let lower_bound: Vec<(f64, f64)> = s.iter().map(|&(c, v)| (c, v / 2.0)).collect();
    let quotients: Vec<(f64, f64)> = lower_bound[1..].iter().map(|&(c, v)| (c, (v - base) / c)).collect();
    // samples are sorted by c, so "increasing as c decreases" is a strict descent here
    let increasing = quotients.windows(2).all(|w| w[0].1 > w[1].1);
    let divergence = increasing && quotients[0].1 > threshold;
    Ok(TransferReport {
        lower_bound,
        quotients,
        increasing,
        threshold,
        divergence,
    })
}
