//! Front-end plumbing: a run configuration, a dispatcher producing report
//! text, and the envelope every report is wrapped in.
//!
//! Dispatch is pure apart from reading input files, so two runs with the
//! same configuration yield identical bytes.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::diamond3::{
    diamond_upper_bound, mac_sum_capacity_indep, rate_split_achievable, slope_transfer, CoopCurve, MacCapacity,
    MacSpec, RateSplit, TransferReport, DIVERGENCE_THRESHOLD,
};
use crate::error::{Error, Result};
use crate::relaynet::{
    build_joint, eval_pdcf, eval_thm1_joint_with, remark1_identity_check, CodingDist, PdcfReport, RateReport,
    ReductionResiduals, RelayNetSpec,
};
use crate::slope::{
    alpha_max, certify, corollary_verdict, default_schedule, slope_curve, CorollaryVerdict, SlopeCurve, SlopeVerdict,
    Verdict,
};
use crate::tol::Tolerances;
use crate::zoo::{
    bec_best_q, bec_bounds, bec_coding_dist, bec_lambda_infeasibility, make_bec_pair, make_modadd, modadd_capacity,
    modadd_coding_dist, modadd_value, BecLambdaReport, ModAddCapacity, ModAddParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "name")]
pub enum Example {
    /// Two erasure links; `q = None` picks the best further-erasure level.
    Bec {
        p: f64,
        q: Option<f64>,
        c0: f64,
    },
    Modadd {
        p: f64,
        delta: f64,
        c0: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleAction {
    /// Rate of the example's coding distribution (BEC) or the capacity
    /// search (modulo-additive).
    Rate,
    CheckSlope,
    SweepCurve,
    /// The closed-form two-branch ratio test (BEC only).
    Lambda,
    /// Emit the channel as a `RelayNetSpec` JSON document.
    Spec,
    /// Emit the coding distribution as a `CodingDist` JSON document.
    Coding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    EvalThm1 {
        spec: PathBuf,
        coding: PathBuf,
    },
    EvalPdcf {
        spec: PathBuf,
        coding: PathBuf,
    },
    CheckSlope {
        spec: PathBuf,
        coding: PathBuf,
    },
    SweepCurve {
        spec: PathBuf,
        coding: PathBuf,
    },
    Example {
        example: Example,
        action: ExampleAction,
    },
    Diamond3 {
        mac: PathBuf,
        curve: Option<PathBuf>,
        split: Option<(f64, f64, f64)>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::EvalThm1 { .. } => "eval-thm1",
            Command::EvalPdcf { .. } => "eval-pdcf",
            Command::CheckSlope { .. } => "check-slope",
            Command::SweepCurve { .. } => "sweep-curve",
            Command::Example { .. } => "example",
            Command::Diamond3 { .. } => "diamond3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub tolerances: Tolerances,
    /// Step sizes for curves; `None` uses the default schedule truncated at
    /// half the largest valid step.
    pub alpha_schedule: Option<Vec<f64>>,
    pub grid_resolution: usize,
    pub format: Format,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            tolerances: Tolerances::default(),
            alpha_schedule: None,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            format: Format::Json,
        }
    }
}

/// Grid resolution used by the optimisers when none is given.
pub const DEFAULT_GRID_RESOLUTION: usize = 8;

/// Report text plus, for CSV output, a JSON document with the settings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub body: String,
    pub sidecar: Option<String>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    command: &'a str,
    tolerances: Tolerances,
    grid_resolution: usize,
    alpha_schedule: &'a Option<Vec<f64>>,
    result: T,
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Serialize)]
struct RateOut {
    report: RateReport,
}

#[derive(Serialize)]
struct PdcfOut {
    report: PdcfReport,
    reduction_residuals: ReductionResiduals,
}

#[derive(Serialize)]
struct SlopeOut {
    verdict: SlopeVerdict,
    /// The two-way classification for full-support channels.
    corollary: Option<CorollaryVerdict>,
}

#[derive(Serialize)]
struct BecRateOut {
    p: f64,
    q: f64,
    c0: f64,
    bound1: f64,
    bound2: f64,
    rate: f64,
    generic: PdcfReport,
}

#[derive(Serialize)]
struct ModaddRateOut {
    params: ModAddParams,
    capacity: ModAddCapacity,
    constant_v: f64,
    /// `None` when `V = Yr` violates the relay-link constraint.
    copy_v: Option<f64>,
}

#[derive(Serialize)]
struct DiamondOut {
    capacity: MacCapacity,
    upper_bound: f64,
    transfer: Option<TransferReport>,
    split: Option<RateSplit>,
}

fn slope_report(spec: &RelayNetSpec, cd: &CodingDist, tol: &Tolerances) -> Result<SlopeOut> {
    let verdict = certify(spec, cd, tol)?.verdict;
    let corollary = if spec.has_full_support() {
        Some(corollary_verdict(spec, cd, tol)?)
    } else {
        None
    };
    Ok(SlopeOut { verdict, corollary })
}

fn sweep(spec: &RelayNetSpec, cd: &CodingDist, cfg: &RunConfig) -> Result<SlopeCurve> {
    let cert = certify(spec, cd, &cfg.tolerances)?;
    if cert.verdict.verdict != Verdict::InfiniteSlopeCertified {
        return Err(Error::Precondition(format!(
            "no certified improving direction (verdict {:?})",
            cert.verdict.verdict
        )));
    }
    let pert = &cert.direction.perturbation;
    let alphas = match &cfg.alpha_schedule {
        Some(a) => a.clone(),
        None => default_schedule(alpha_max(cd, pert)?),
    };
    slope_curve(spec, cd, pert, &alphas)
}

fn example_instance(ex: &Example, res: usize) -> Result<(RelayNetSpec, CodingDist)> {
    match *ex {
        Example::Bec { p, q, c0 } => {
            let q = q.unwrap_or_else(|| bec_best_q(p, c0).0);
            Ok((make_bec_pair(p, c0)?, bec_coding_dist(q)?))
        }
        Example::Modadd { p, delta, c0 } => {
            let params = ModAddParams::new(p, delta, c0)?;
            let cap = modadd_capacity(&params, res, 3)?;
            Ok((make_modadd(&params)?, modadd_coding_dist(&cap.kernel)?))
        }
    }
}

impl RunConfig {
    fn wrap<T: Serialize>(&self, result: T) -> Result<Output> {
        let env = Envelope {
            command: self.command.name(),
            tolerances: self.tolerances,
            grid_resolution: self.grid_resolution,
            alpha_schedule: &self.alpha_schedule,
            result,
        };
        let mut body = serde_json::to_string_pretty(&env)?;
        body.push('\n');
        Ok(Output { body, sidecar: None })
    }

    fn curve_output(&self, curve: SlopeCurve) -> Result<Output> {
        match self.format {
            Format::Json => self.wrap(curve),
            Format::Csv => {
                let body = curve.to_csv()?;
                let meta = self.wrap(&curve)?.body;
                Ok(Output {
                    body,
                    sidecar: Some(meta),
                })
            }
        }
    }

    fn json_only(&self) -> Result<()> {
        if self.format == Format::Csv {
            return Err(Error::InvalidParameter(format!(
                "`{}` has no CSV form; use --format json",
                self.command.name()
            )));
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        let t = &self.tolerances;
        let ok = [t.norm, t.supp, t.dev, t.lp].iter().all(|x| x.is_finite() && *x >= 0.0);
        if !ok || t.lambda_grid < 2 || self.grid_resolution < 2 {
            return Err(Error::InvalidParameter(
                "tolerances must be non-negative, lambda grid and grid resolution at least 2".into(),
            ));
        }
        if let Some(a) = &self.alpha_schedule {
            if a.is_empty() {
                return Err(Error::EmptySchedule);
            }
        }
        Ok(())
    }
}

/// Runs one command and returns the report text.
pub fn dispatch(cfg: &RunConfig) -> Result<Output> {
    cfg.check()?;
    let tol = &cfg.tolerances;
    log::info!("dispatching {}", cfg.command.name());
    match &cfg.command {
        Command::EvalThm1 { spec, coding } => {
            cfg.json_only()?;
            let spec: RelayNetSpec = read_json(spec)?;
            let cd: CodingDist = read_json(coding)?;
            let report = eval_thm1_joint_with(&build_joint(&spec, &cd)?, spec.c0(), spec.c_cf(), tol.norm)?;
            cfg.wrap(RateOut { report })
        }
        Command::EvalPdcf { spec, coding } => {
            cfg.json_only()?;
            let spec: RelayNetSpec = read_json(spec)?;
            let cd: CodingDist = read_json(coding)?;
            cfg.wrap(PdcfOut {
                report: eval_pdcf(&spec, &cd)?,
                reduction_residuals: remark1_identity_check(&spec, &cd)?,
            })
        }
        Command::CheckSlope { spec, coding } => {
            cfg.json_only()?;
            let spec: RelayNetSpec = read_json(spec)?;
            let cd: CodingDist = read_json(coding)?;
            cfg.wrap(slope_report(&spec, &cd, tol)?)
        }
        Command::SweepCurve { spec, coding } => {
            let spec: RelayNetSpec = read_json(spec)?;
            let cd: CodingDist = read_json(coding)?;
            cfg.curve_output(sweep(&spec, &cd, cfg)?)
        }
        Command::Example { example, action } => run_example(cfg, example, *action),
        Command::Diamond3 { mac, curve, split } => {
            cfg.json_only()?;
            let mac: MacSpec = read_json(mac)?;
            let capacity = mac_sum_capacity_indep(&mac, cfg.grid_resolution)?;
            let upper_bound = diamond_upper_bound(capacity.value)?;
            let transfer = match curve {
                Some(path) => {
                    let file = std::fs::File::open(path).map_err(|source| Error::Io {
                        path: path.display().to_string(),
                        source,
                    })?;
                    Some(slope_transfer(&CoopCurve::from_csv(file)?, DIVERGENCE_THRESHOLD)?)
                }
                None => None,
            };
            let split = split
                .map(|(r0, r1, eps)| rate_split_achievable(r0, r1, eps))
                .transpose()?;
            cfg.wrap(DiamondOut {
                capacity,
                upper_bound,
                transfer,
                split,
            })
        }
    }
}

fn run_example(cfg: &RunConfig, example: &Example, action: ExampleAction) -> Result<Output> {
    let tol = &cfg.tolerances;
    if action != ExampleAction::SweepCurve {
        cfg.json_only()?;
    }
    match (example, action) {
        (_, ExampleAction::Spec) => {
            let (spec, _) = example_instance(example, cfg.grid_resolution)?;
            Ok(Output {
                body: serde_json::to_string_pretty(&spec)? + "\n",
                sidecar: None,
            })
        }
        (_, ExampleAction::Coding) => {
            let (_, cd) = example_instance(example, cfg.grid_resolution)?;
            Ok(Output {
                body: serde_json::to_string_pretty(&cd)? + "\n",
                sidecar: None,
            })
        }
        (_, ExampleAction::CheckSlope) => {
            let (spec, cd) = example_instance(example, cfg.grid_resolution)?;
            cfg.wrap(slope_report(&spec, &cd, tol)?)
        }
        (_, ExampleAction::SweepCurve) => {
            let (spec, cd) = example_instance(example, cfg.grid_resolution)?;
            cfg.curve_output(sweep(&spec, &cd, cfg)?)
        }
        (&Example::Bec { p, q, c0 }, ExampleAction::Rate) => {
            let q = q.unwrap_or_else(|| bec_best_q(p, c0).0);
            let (bound1, bound2) = bec_bounds(p, q, c0);
            let generic = eval_pdcf(&make_bec_pair(p, c0)?, &bec_coding_dist(q)?)?;
            cfg.wrap(BecRateOut {
                p,
                q,
                c0,
                bound1,
                bound2,
                rate: bound1.min(bound2),
                generic,
            })
        }
        (&Example::Bec { p, q, c0 }, ExampleAction::Lambda) => {
            let q = q.unwrap_or_else(|| bec_best_q(p, c0).0);
            let rep: BecLambdaReport = bec_lambda_infeasibility(p, q, tol.lambda_grid)?;
            cfg.wrap(rep)
        }
        (&Example::Modadd { p, delta, c0 }, ExampleAction::Rate) => {
            let params = ModAddParams::new(p, delta, c0)?;
            let capacity = modadd_capacity(&params, cfg.grid_resolution, 3)?;
            let v = capacity.kernel.to().to_vec();
            let yr = capacity.kernel.from().to_vec();
            let constant = crate::prob::CondKernel::from_fn(yr.clone(), v.clone(), |_, t| (t[0] == 0) as u8 as f64)?;
            let copy = crate::prob::CondKernel::from_fn(yr, v, |f, t| (t[0] == f[0]) as u8 as f64)?;
            let (constant_v, _) = modadd_value(&params, &constant);
            let (copy_value, copy_rate) = modadd_value(&params, &copy);
            cfg.wrap(ModaddRateOut {
                params,
                capacity,
                constant_v,
                copy_v: (copy_rate <= c0 + tol.norm).then_some(copy_value),
            })
        }
        (Example::Modadd { .. }, ExampleAction::Lambda) => Err(Error::InvalidParameter(
            "the closed-form ratio test exists for the bec example only; use check-slope".into(),
        )),
    }
}
