//! Rate evaluation for the relay channel with orthogonal receiver components.
//!
//! The source sends `X`; the broadcast channel `p(y_r, y_1 | x)` delivers
//! `Y_1` to a relay with an unlimited link to the destination and `Y_r` to a
//! relay with a `c0`-bit pipe. A cooperation facilitator (CF) sees both
//! outputs and sends `c_cf` bits to the relays. For a coding distribution
//! `p(u, x) p(y_r, y_1 | x) p(v | u, x, y_1, y_r)` the CF scheme achieves
//!
//! ```text
//! R <= I(U;Yr) + min{ I(X;Y1,Yr|U), I(X;Y1,V|U) }
//! R <= min{ I(U;Y1), I(U;Yr) } + I(X;Y1|U) + I(V;X,Y1|U) - I(Yr;V|U) + c0
//! c_cf >= I(X,Y1;V|U,Yr)
//! ```
//!
//! With `c_cf = 0` the test channel must factor as `p(v | u, y_r)` and the
//! bound collapses to the classical PD/CF bound evaluated by [`eval_pdcf`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{mutual_information, Alphabet, CondKernel, FiniteDist};
use crate::tol::{TOL_NORM, TOL_SUPP};

pub const U: &str = "u";
pub const X: &str = "x";
pub const Y1: &str = "y1";
pub const YR: &str = "yr";
pub const V: &str = "v";

/// Variable order of every joint built by [`build_joint`].
pub const JOINT_ORDER: [&str; 5] = [U, X, Y1, YR, V];

/// Broadcast channel plus the two bit-pipe capacities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct RelayNetSpec {
    x_alphabet: Alphabet,
    y1_alphabet: Alphabet,
    yr_alphabet: Alphabet,
    /// `p(y_r, y_1 | x)`.
    broadcast: CondKernel,
    c0: f64,
    c_cf: f64,
}

#[derive(Deserialize)]
struct RawSpec {
    x_alphabet: Alphabet,
    y1_alphabet: Alphabet,
    yr_alphabet: Alphabet,
    broadcast: CondKernel,
    c0: f64,
    c_cf: f64,
}

impl TryFrom<RawSpec> for RelayNetSpec {
    type Error = Error;

    fn try_from(r: RawSpec) -> Result<Self> {
        RelayNetSpec::new(r.x_alphabet, r.y1_alphabet, r.yr_alphabet, r.broadcast, r.c0, r.c_cf)
    }
}

fn expect_name(a: &Alphabet, name: &str) -> Result<()> {
    if a.name() == name {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch {
            name: a.name().to_string(),
            detail: format!("expected variable `{name}`"),
        })
    }
}

fn expect_shape(got: &[Alphabet], want: &[&Alphabet], what: &str) -> Result<()> {
    let ok = got.len() == want.len()
        && got
            .iter()
            .zip(want)
            .all(|(g, w)| g.name() == w.name() && g.compatible(w));
    if ok {
        Ok(())
    } else {
        Err(Error::AlphabetMismatch {
            name: what.to_string(),
            detail: format!(
                "expected {:?}, found {:?}",
                want.iter().map(|a| (a.name(), a.size())).collect::<Vec<_>>(),
                got.iter().map(|a| (a.name(), a.size())).collect::<Vec<_>>()
            ),
        })
    }
}

fn check_capacity(name: &str, c: f64) -> Result<()> {
    if c.is_finite() && c >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} = {c} must be a finite non-negative number"
        )))
    }
}

impl RelayNetSpec {
    pub fn new(
        x_alphabet: Alphabet,
        y1_alphabet: Alphabet,
        yr_alphabet: Alphabet,
        broadcast: CondKernel,
        c0: f64,
        c_cf: f64,
    ) -> Result<Self> {
        expect_name(&x_alphabet, X)?;
        expect_name(&y1_alphabet, Y1)?;
        expect_name(&yr_alphabet, YR)?;
        expect_shape(broadcast.from(), &[&x_alphabet], "broadcast.from")?;
        expect_shape(broadcast.to(), &[&yr_alphabet, &y1_alphabet], "broadcast.to")?;
        if let Some(row) = (0..broadcast.n_rows()).find(|&r| !broadcast.is_defined(r)) {
            return Err(Error::InvalidParameter(format!("broadcast row {row} is undefined")));
        }
        check_capacity("c0", c0)?;
        check_capacity("c_cf", c_cf)?;
        Ok(Self {
            x_alphabet,
            y1_alphabet,
            yr_alphabet,
            broadcast,
            c0,
            c_cf,
        })
    }

    /// Builds the broadcast kernel from `law(x, y_r, y_1)`.
    pub fn from_law(
        x_alphabet: Alphabet,
        y1_alphabet: Alphabet,
        yr_alphabet: Alphabet,
        law: impl Fn(usize, usize, usize) -> f64,
        c0: f64,
        c_cf: f64,
    ) -> Result<Self> {
        let broadcast = CondKernel::from_fn(
            vec![x_alphabet.clone()],
            vec![yr_alphabet.clone(), y1_alphabet.clone()],
            |f, t| law(f[0], t[0], t[1]),
        )?;
        Self::new(x_alphabet, y1_alphabet, yr_alphabet, broadcast, c0, c_cf)
    }

    pub fn with_c0(mut self, c0: f64) -> Result<Self> {
        check_capacity("c0", c0)?;
        self.c0 = c0;
        Ok(self)
    }

    pub fn with_c_cf(mut self, c_cf: f64) -> Result<Self> {
        check_capacity("c_cf", c_cf)?;
        self.c_cf = c_cf;
        Ok(self)
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn y1_alphabet(&self) -> &Alphabet {
        &self.y1_alphabet
    }

    pub fn yr_alphabet(&self) -> &Alphabet {
        &self.yr_alphabet
    }

    pub fn broadcast(&self) -> &CondKernel {
        &self.broadcast
    }

    /// `p(y_r, y_1 | x)`.
    pub fn channel(&self, x: usize, yr: usize, y1: usize) -> f64 {
        self.broadcast.row(x).expect("broadcast rows are defined")[yr * self.y1_alphabet.size() + y1]
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c_cf(&self) -> f64 {
        self.c_cf
    }

    /// True when every `p(y_1, y_r | x)` exceeds the support threshold.
    pub fn has_full_support(&self) -> bool {
        self.broadcast.data().iter().all(|&p| p > TOL_SUPP)
    }
}

/// The auxiliary bundle `p(u, x)` and `p(v | u, x, y_1, y_r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCoding")]
pub struct CodingDist {
    ux: FiniteDist,
    v_kernel: CondKernel,
    markov_form: bool,
}

#[derive(Deserialize)]
struct RawCoding {
    ux: FiniteDist,
    v_kernel: CondKernel,
    markov_form: bool,
}

impl TryFrom<RawCoding> for CodingDist {
    type Error = Error;

    fn try_from(r: RawCoding) -> Result<Self> {
        CodingDist::new(r.ux, r.v_kernel, r.markov_form)
    }
}

impl CodingDist {
    /// Validates names and shapes; with `markov_form` set, also checks that
    /// each row depends on `(u, y_r)` only.
    pub fn new(ux: FiniteDist, v_kernel: CondKernel, markov_form: bool) -> Result<Self> {
        if ux.names() != [U, X] {
            return Err(Error::AlphabetMismatch {
                name: "ux".into(),
                detail: format!("expected variables [u, x], found {:?}", ux.names()),
            });
        }
        let from_names: Vec<&str> = v_kernel.from().iter().map(Alphabet::name).collect();
        if from_names != [U, X, Y1, YR] {
            return Err(Error::AlphabetMismatch {
                name: "v_kernel.from".into(),
                detail: format!("expected [u, x, y1, yr], found {from_names:?}"),
            });
        }
        if v_kernel.to().len() != 1 || v_kernel.to()[0].name() != V {
            return Err(Error::AlphabetMismatch {
                name: "v_kernel.to".into(),
                detail: "expected [v]".into(),
            });
        }
        for i in 0..2 {
            if !ux.variables()[i].compatible(&v_kernel.from()[i]) {
                return Err(Error::AlphabetMismatch {
                    name: ux.variables()[i].name().to_string(),
                    detail: "ux and v_kernel disagree on the alphabet size".into(),
                });
            }
        }
        if let Some(row) = (0..v_kernel.n_rows()).find(|&r| !v_kernel.is_defined(r)) {
            return Err(Error::InvalidParameter(format!("v_kernel row {row} is undefined")));
        }
        let cd = Self {
            ux,
            v_kernel,
            markov_form,
        };
        if markov_form {
            if let Some(detail) = cd.markov_violation() {
                return Err(Error::NotMarkov(detail));
            }
        }
        Ok(cd)
    }

    /// Expands a test channel `p(v | u, y_r)` to a Markov-form bundle.
    pub fn markov(ux: FiniteDist, test_channel: &CondKernel, y1: &Alphabet) -> Result<Self> {
        let from_names: Vec<&str> = test_channel.from().iter().map(Alphabet::name).collect();
        if from_names != [U, YR] || test_channel.to().len() != 1 || test_channel.to()[0].name() != V {
            return Err(Error::AlphabetMismatch {
                name: "test_channel".into(),
                detail: format!("expected p(v | u, yr), found from {from_names:?}"),
            });
        }
        let u = ux.variables()[0].clone();
        let x = ux.variables()[1].clone();
        let yr = test_channel.from()[1].clone();
        let v = test_channel.to()[0].clone();
        let kernel = CondKernel::from_fn(vec![u, x, y1.renamed(Y1), yr], vec![v], |f, t| {
            test_channel
                .row(test_channel.row_index(&[f[0], f[3]]))
                .expect("defined")[t[0]]
        })?;
        Self::new(ux, kernel, true)
    }

    pub fn ux(&self) -> &FiniteDist {
        &self.ux
    }

    pub fn v_kernel(&self) -> &CondKernel {
        &self.v_kernel
    }

    pub fn markov_form(&self) -> bool {
        self.markov_form
    }

    /// Sizes `[|U|, |X|, |Y1|, |Yr|, |V|]`.
    pub fn dims(&self) -> [usize; 5] {
        let f = self.v_kernel.from();
        [
            f[0].size(),
            f[1].size(),
            f[2].size(),
            f[3].size(),
            self.v_kernel.to()[0].size(),
        ]
    }

    pub fn u_alphabet(&self) -> &Alphabet {
        &self.v_kernel.from()[0]
    }

    pub fn v_alphabet(&self) -> &Alphabet {
        &self.v_kernel.to()[0]
    }

    /// `q(v | u, x, y_1, y_r)`.
    pub fn v_prob(&self, u: usize, x: usize, y1: usize, yr: usize, v: usize) -> f64 {
        let [_, nx, ny1, nyr, nv] = self.dims();
        self.v_kernel.data()[(((u * nx + x) * ny1 + y1) * nyr + yr) * nv + v]
    }

    /// Describes the first `(u, y_r)` pair whose rows vary with `(x, y_1)`.
    pub fn markov_violation(&self) -> Option<String> {
        let [nu, nx, ny1, nyr, nv] = self.dims();
        for u in 0..nu {
            for yr in 0..nyr {
                for x in 0..nx {
                    for y1 in 0..ny1 {
                        for v in 0..nv {
                            let d = (self.v_prob(u, x, y1, yr, v) - self.v_prob(u, 0, 0, yr, v)).abs();
                            if d > TOL_SUPP {
                                return Some(format!(
                                    "p(v={v}|u={u},x={x},y1={y1},yr={yr}) differs from (x=0,y1=0) by {d:e}"
                                ));
                            }
                        }
                    }
                }
            }
        }
        None
    }

    /// `p(v | u, y_r)` for a Markov-form bundle.
    pub fn test_channel(&self) -> Option<CondKernel> {
        if !self.markov_form {
            return None;
        }
        let u = self.u_alphabet().clone();
        let yr = self.v_kernel.from()[3].clone();
        CondKernel::from_fn(vec![u, yr], vec![self.v_alphabet().clone()], |f, t| {
            self.v_prob(f[0], 0, 0, f[1], t[0])
        })
        .ok()
    }
}

/// The joint `p(u, x, y_1, y_r, v)`, in [`JOINT_ORDER`].
pub fn build_joint(spec: &RelayNetSpec, cd: &CodingDist) -> Result<FiniteDist> {
    let [_, nx, ny1, nyr, _] = cd.dims();
    let sizes = [
        (X, spec.x_alphabet.size(), nx),
        (Y1, spec.y1_alphabet.size(), ny1),
        (YR, spec.yr_alphabet.size(), nyr),
    ];
    for (name, want, got) in sizes {
        if want != got {
            return Err(Error::AlphabetMismatch {
                name: name.to_string(),
                detail: format!("channel has {want} letters, coding distribution {got}"),
            });
        }
    }
    cd.ux
        .compose(&spec.broadcast)?
        .permute(&[U, X, Y1, YR])?
        .compose(&cd.v_kernel)
}

/// Either a rate in bits, or infeasible because the CF link is too thin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Achievable {
    Rate(f64),
    Infeasible,
}

impl Achievable {
    pub fn rate(self) -> Option<f64> {
        match self {
            Achievable::Rate(r) => Some(r),
            Achievable::Infeasible => None,
        }
    }
}

impl Serialize for Achievable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Achievable::Rate(r) => s.serialize_f64(*r),
            Achievable::Infeasible => s.serialize_str("infeasible"),
        }
    }
}

impl<'de> Deserialize<'de> for Achievable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Rate(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Rate(r) => Ok(Achievable::Rate(r)),
            Repr::Tag(t) if t == "infeasible" => Ok(Achievable::Infeasible),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unexpected `{t}`"))),
        }
    }
}

/// Every mutual-information term of the CF rate, keyed by its expression.
pub type Terms = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub bound1: f64,
    pub bound2: f64,
    pub cf_required: f64,
    pub c0: f64,
    pub c_cf: f64,
    pub achievable: Achievable,
    pub term_breakdown: Terms,
}

pub const T_U_YR: &str = "I(U;Yr)";
pub const T_X_Y1YR_U: &str = "I(X;Y1,Yr|U)";
pub const T_X_Y1V_U: &str = "I(X;Y1,V|U)";
pub const T_U_Y1: &str = "I(U;Y1)";
pub const T_X_Y1_U: &str = "I(X;Y1|U)";
pub const T_V_XY1_U: &str = "I(V;X,Y1|U)";
pub const T_YR_V_U: &str = "I(Yr;V|U)";
pub const T_XY1_V_UYR: &str = "I(X,Y1;V|U,Yr)";
pub const T_YR_V_UXY1: &str = "I(Yr;V|U,X,Y1)";

/// Evaluates every term of the CF rate on a joint in [`JOINT_ORDER`].
pub fn thm1_terms(joint: &FiniteDist) -> Result<Terms> {
    let mi = |a: &[&str], b: &[&str], c: &[&str]| mutual_information(joint, a, b, c);
    let mut t = Terms::new();
    t.insert(T_U_YR.into(), mi(&[U], &[YR], &[])?);
    t.insert(T_X_Y1YR_U.into(), mi(&[X], &[Y1, YR], &[U])?);
    t.insert(T_X_Y1V_U.into(), mi(&[X], &[Y1, V], &[U])?);
    t.insert(T_U_Y1.into(), mi(&[U], &[Y1], &[])?);
    t.insert(T_X_Y1_U.into(), mi(&[X], &[Y1], &[U])?);
    t.insert(T_V_XY1_U.into(), mi(&[V], &[X, Y1], &[U])?);
    t.insert(T_YR_V_U.into(), mi(&[YR], &[V], &[U])?);
    t.insert(T_XY1_V_UYR.into(), mi(&[X, Y1], &[V], &[U, YR])?);
    Ok(t)
}

/// CF rate report from a prebuilt joint.
pub fn eval_thm1_joint(joint: &FiniteDist, c0: f64, c_cf: f64) -> Result<RateReport> {
    eval_thm1_joint_with(joint, c0, c_cf, TOL_NORM)
}

/// As [`eval_thm1_joint`], with `slack` allowed on the CF-link comparison.
pub fn eval_thm1_joint_with(joint: &FiniteDist, c0: f64, c_cf: f64, slack: f64) -> Result<RateReport> {
    let t = thm1_terms(joint)?;
    let bound1 = t[T_U_YR] + t[T_X_Y1YR_U].min(t[T_X_Y1V_U]);
    let bound2 = t[T_U_Y1].min(t[T_U_YR]) + t[T_X_Y1_U] + t[T_V_XY1_U] - t[T_YR_V_U] + c0;
    let cf_required = t[T_XY1_V_UYR];
    let achievable = if cf_required <= c_cf + slack {
        Achievable::Rate(bound1.min(bound2))
    } else {
        Achievable::Infeasible
    };
    Ok(RateReport {
        bound1,
        bound2,
        cf_required,
        c0,
        c_cf,
        achievable,
        term_breakdown: t,
    })
}

/// The CF achievable rate for a fixed coding distribution.
pub fn eval_thm1(spec: &RelayNetSpec, cd: &CodingDist) -> Result<RateReport> {
    eval_thm1_joint(&build_joint(spec, cd)?, spec.c0, spec.c_cf)
}

/// The two sides of the classical PD/CF bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdcfReport {
    /// `I(U;Yr) + I(X;Y1,V|U)`.
    pub bound1: f64,
    /// `min{I(U;Y1), I(U;Yr)} + I(X;Y1|U) + c0 - I(Yr;V|U,X,Y1)`.
    pub bound2: f64,
    pub rate: f64,
    pub term_breakdown: Terms,
}

pub fn pdcf_joint(joint: &FiniteDist, c0: f64) -> Result<PdcfReport> {
    let mi = |a: &[&str], b: &[&str], c: &[&str]| mutual_information(joint, a, b, c);
    let mut t = Terms::new();
    t.insert(T_U_YR.into(), mi(&[U], &[YR], &[])?);
    t.insert(T_X_Y1V_U.into(), mi(&[X], &[Y1, V], &[U])?);
    t.insert(T_U_Y1.into(), mi(&[U], &[Y1], &[])?);
    t.insert(T_X_Y1_U.into(), mi(&[X], &[Y1], &[U])?);
    t.insert(T_YR_V_UXY1.into(), mi(&[YR], &[V], &[U, X, Y1])?);
    let bound1 = t[T_U_YR] + t[T_X_Y1V_U];
    let bound2 = t[T_U_Y1].min(t[T_U_YR]) + t[T_X_Y1_U] + c0 - t[T_YR_V_UXY1];
    Ok(PdcfReport {
        bound1,
        bound2,
        rate: bound1.min(bound2),
        term_breakdown: t,
    })
}

/// The no-cooperation PD/CF bound; requires a Markov-form bundle.
pub fn eval_pdcf(spec: &RelayNetSpec, cd: &CodingDist) -> Result<PdcfReport> {
    if !cd.markov_form {
        return Err(Error::NotMarkov("eval_pdcf needs p(v | u, y_r)".into()));
    }
    pdcf_joint(&build_joint(spec, cd)?, spec.c0)
}

/// Residuals of the two steps that turn the CF rate at `c_cf = 0` into the
/// PD/CF bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionResiduals {
    /// `|I(V;X,Y1|U) - I(Yr;V|U) + I(Yr;V|U,X,Y1)|`.
    pub entropy_identity: f64,
    /// `|I(X;Y1,V|U) - min(I(X;Y1,V|U), I(X;Y1,Yr|U))|`.
    pub data_processing: f64,
}

/// Reports the residuals without asserting on them; a non-Markov bundle
/// shows up as a positive `entropy_identity`.
pub fn remark1_identity_check(spec: &RelayNetSpec, cd: &CodingDist) -> Result<ReductionResiduals> {
    let joint = build_joint(spec, cd)?;
    let mi = |a: &[&str], b: &[&str], c: &[&str]| mutual_information(&joint, a, b, c);
    let i_v_xy1 = mi(&[V], &[X, Y1], &[U])?;
    let i_yr_v = mi(&[YR], &[V], &[U])?;
    let i_yr_v_xy1 = mi(&[YR], &[V], &[U, X, Y1])?;
    let i_x_y1v = mi(&[X], &[Y1, V], &[U])?;
    let i_x_y1yr = mi(&[X], &[Y1, YR], &[U])?;
    Ok(ReductionResiduals {
        entropy_identity: (i_v_xy1 - i_yr_v + i_yr_v_xy1).abs(),
        data_processing: (i_x_y1v - i_x_y1v.min(i_x_y1yr)).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::binary_entropy;

    fn bin(n: &str) -> Alphabet {
        Alphabet::binary(n)
    }

    /// Noiseless broadcast `Y1 = X`, `Yr = X`.
    fn noiseless(c0: f64) -> RelayNetSpec {
        RelayNetSpec::from_law(
            bin(X),
            bin(Y1),
            bin(YR),
            |x, yr, y1| if yr == x && y1 == x { 1.0 } else { 0.0 },
            c0,
            0.0,
        )
        .unwrap()
    }

    fn ux_uniform(nu: usize, nx: usize) -> FiniteDist {
        FiniteDist::uniform(vec![Alphabet::new(U, nu).unwrap(), Alphabet::new(X, nx).unwrap()]).unwrap()
    }

    fn constant_v(nv: usize) -> CondKernel {
        CondKernel::from_fn(
            vec![Alphabet::trivial(U), bin(YR)],
            vec![Alphabet::new(V, nv).unwrap()],
            |_, t| {
                if t[0] == 0 {
                    1.0
                } else {
                    0.0
                }
            },
        )
        .unwrap()
    }

    fn copy_v() -> CondKernel {
        CondKernel::from_fn(vec![Alphabet::trivial(U), bin(YR)], vec![bin(V)], |f, t| {
            if f[1] == t[0] {
                1.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn joint_of_deterministic_pieces_is_a_permutation() {
        let spec = noiseless(1.0);
        let ux = FiniteDist::from_fn(vec![bin(U), bin(X)], |i| if i[0] == i[1] { 0.5 } else { 0.0 }).unwrap();
        let tc = CondKernel::from_fn(
            vec![bin(U), bin(YR)],
            vec![bin(V)],
            |_, t| if t[0] == 0 { 1.0 } else { 0.0 },
        )
        .unwrap();
        let cd = CodingDist::markov(ux, &tc, &bin(Y1)).unwrap();
        let j = build_joint(&spec, &cd).unwrap();
        assert_eq!(j.names(), JOINT_ORDER.to_vec());
        assert_eq!(j.support_size(), 2);
        assert!(j.pmf().iter().all(|&p| p == 0.0 || p == 0.5));
    }

    #[test]
    fn uniform_factors_give_uniform_joint() {
        let spec = RelayNetSpec::from_law(bin(X), bin(Y1), bin(YR), |_, _, _| 0.25, 0.0, 0.0).unwrap();
        let tc = CondKernel::from_fn(vec![bin(U), bin(YR)], vec![bin(V)], |_, _| 0.5).unwrap();
        let cd = CodingDist::markov(ux_uniform(2, 2), &tc, &bin(Y1)).unwrap();
        let j = build_joint(&spec, &cd).unwrap();
        assert!(j.pmf().iter().all(|&p| (p - 1.0 / 32.0).abs() < 1e-15));
    }

    #[test]
    fn alphabet_mismatch_is_rejected() {
        let spec = noiseless(0.0);
        let tc = CondKernel::from_fn(vec![Alphabet::trivial(U), bin(YR)], vec![bin(V)], |_, _| 0.5).unwrap();
        let cd = CodingDist::markov(ux_uniform(1, 3), &tc, &bin(Y1)).unwrap();
        assert!(matches!(build_joint(&spec, &cd), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn markov_flag_is_checked() {
        let ux = ux_uniform(1, 2);
        let from = vec![Alphabet::trivial(U), bin(X), bin(Y1), bin(YR)];
        // v copies x: depends on x, so not Markov
        let k = CondKernel::from_fn(from, vec![bin(V)], |f, t| if f[1] == t[0] { 1.0 } else { 0.0 }).unwrap();
        assert!(matches!(
            CodingDist::new(ux.clone(), k.clone(), true),
            Err(Error::NotMarkov(_))
        ));
        let cd = CodingDist::new(ux, k, false).unwrap();
        assert!(cd.test_channel().is_none());
        assert!(matches!(eval_pdcf(&noiseless(1.0), &cd), Err(Error::NotMarkov(_))));
    }

    #[test]
    fn constant_v_needs_no_cf_and_reduces_to_pdf() {
        let spec = noiseless(0.3);
        let cd = CodingDist::markov(ux_uniform(1, 2), &constant_v(2), &bin(Y1)).unwrap();
        let r = eval_thm1(&spec, &cd).unwrap();
        assert!(r.cf_required.abs() < 1e-12);
        let t = &r.term_breakdown;
        assert!(t[T_V_XY1_U].abs() < 1e-12 && t[T_YR_V_U].abs() < 1e-12);
        assert!((r.bound1 - (t[T_U_YR] + t[T_X_Y1_U])).abs() < 1e-12);
        let pd = eval_pdcf(&spec, &cd).unwrap();
        assert!((pd.bound1 - (t[T_U_YR] + t[T_X_Y1_U])).abs() < 1e-12);
        assert!((r.achievable.rate().unwrap() - pd.rate).abs() < 1e-9);
    }

    #[test]
    fn copied_relay_output_gives_full_mutual_information() {
        let spec = noiseless(1.0);
        let cd = CodingDist::markov(ux_uniform(1, 2), &copy_v(), &bin(Y1)).unwrap();
        let pd = eval_pdcf(&spec, &cd).unwrap();
        let j = build_joint(&spec, &cd).unwrap();
        let direct = mutual_information(&j, &[X], &[Y1, YR], &[]).unwrap();
        assert!((pd.rate - direct).abs() < 1e-12);
        assert!((pd.rate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cf_feasibility_switch() {
        // X uniform, Y1 = X xor Z, Yr = Z; V = Y1 needs the CF link
        let p = 0.2;
        let spec = RelayNetSpec::from_law(
            bin(X),
            bin(Y1),
            bin(YR),
            |x, yr, y1| {
                let z = yr;
                let pz = if z == 1 { p } else { 1.0 - p };
                if y1 == x ^ z {
                    pz
                } else {
                    0.0
                }
            },
            0.0,
            0.0,
        )
        .unwrap();
        let from = vec![Alphabet::trivial(U), bin(X), bin(Y1), bin(YR)];
        let k = CondKernel::from_fn(from, vec![bin(V)], |f, t| if f[1] == t[0] { 1.0 } else { 0.0 }).unwrap();
        let cd = CodingDist::new(ux_uniform(1, 2), k, false).unwrap();
        let r = eval_thm1(&spec, &cd).unwrap();
        // V = X given Yr: H(X | Yr) = 1 bit of CF rate
        assert!((r.cf_required - 1.0).abs() < 1e-12);
        assert_eq!(r.achievable, Achievable::Infeasible);
        let r = eval_thm1(&spec.clone().with_c_cf(1.0).unwrap(), &cd).unwrap();
        assert!(r.achievable.rate().is_some());
        // bound2 = I(X;Y1) + I(V;X,Y1) - I(Yr;V) + c0 with V = X
        let expect = (1.0 - binary_entropy(p)) + 1.0 - 0.0;
        assert!((r.bound2 - expect).abs() < 1e-12);
    }

    #[test]
    fn remark1_residuals_flag_non_markov() {
        let spec = noiseless(0.5);
        let cd = CodingDist::markov(ux_uniform(1, 2), &copy_v(), &bin(Y1)).unwrap();
        let r = remark1_identity_check(&spec, &cd).unwrap();
        assert!(r.entropy_identity < 1e-9 && r.data_processing < 1e-9);

        let noisy = RelayNetSpec::from_law(bin(X), bin(Y1), bin(YR), |_, _, _| 0.25, 0.5, 0.0).unwrap();
        let from = vec![Alphabet::trivial(U), bin(X), bin(Y1), bin(YR)];
        let k = CondKernel::from_fn(from, vec![bin(V)], |f, t| if f[1] == t[0] { 1.0 } else { 0.0 }).unwrap();
        let cd = CodingDist::new(ux_uniform(1, 2), k, false).unwrap();
        let r = remark1_identity_check(&noisy, &cd).unwrap();
        // the identity residual equals I(X,Y1;V|U,Yr) = 1 bit here
        assert!((r.entropy_identity - 1.0).abs() < 1e-9);
    }

    #[test]
    fn report_json_names_terms_and_infeasible() {
        let spec = noiseless(0.5);
        let cd = CodingDist::markov(ux_uniform(1, 2), &copy_v(), &bin(Y1)).unwrap();
        let mut r = eval_thm1(&spec, &cd).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"I(U;Yr)\"") && s.contains("\"I(X,Y1;V|U,Yr)\""));
        assert_eq!(serde_json::from_str::<RateReport>(&s).unwrap(), r);
        r.achievable = Achievable::Infeasible;
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.contains("\"achievable\":\"infeasible\""));
        assert_eq!(serde_json::from_str::<RateReport>(&s).unwrap(), r);
    }

    #[test]
    fn spec_and_coding_json_round_trip() {
        let spec = noiseless(0.5);
        let s = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<RelayNetSpec>(&s).unwrap(), spec);
        let cd = CodingDist::markov(ux_uniform(1, 2), &copy_v(), &bin(Y1)).unwrap();
        let s = serde_json::to_string(&cd).unwrap();
        assert_eq!(serde_json::from_str::<CodingDist>(&s).unwrap(), cd);
        let bad = s.replace("\"markov_form\":true", "\"markov_form\":1");
        assert!(serde_json::from_str::<CodingDist>(&bad).is_err());
        assert!(noiseless(0.0).with_c0(-1.0).is_err());
    }
}
