//! Acceptance checks. Prints one `criterion N: PASS|FAIL` line each and
//! exits non-zero if any fails.

use std::time::Instant;

use cfdiamond::diamond3::{
    diamond_upper_bound, rate_split_achievable, slope_transfer, CoopCurve, DIVERGENCE_THRESHOLD,
};
use cfdiamond::prob::{binary_entropy, mutual_information, Alphabet, CondKernel, FiniteDist};
use cfdiamond::random::{random_markov, random_spec, seeded, Shape};
use cfdiamond::relaynet::{build_joint, eval_pdcf, eval_thm1, CodingDist, RelayNetSpec, U, V, X, Y1, YR};
use cfdiamond::run::{dispatch, Command, Example, ExampleAction, Format, RunConfig};
use cfdiamond::slope::{
    alpha_max, ccf_curvature, certify, check_lambda, default_schedule, deterministic_reduction, f_primes,
    find_direction, perturb, slope_curve, Perturbation, SlopeContext, Verdict,
};
use cfdiamond::tol::{LAMBDA_GRID, TOL_LP};
use cfdiamond::zoo::{
    bec_coding_dist, bec_lambda_infeasibility, bec_rate, make_bec_pair, modadd_capacity, modadd_grid_search,
    ModAddParams,
};
use cfdiamond::Tolerances;
use rand::Rng;

type Check = std::result::Result<String, String>;
type Criterion = fn() -> Check;

fn ensure(ok: bool, msg: String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn bin(n: &str) -> Alphabet {
    Alphabet::binary(n)
}

fn random_instance(seed: u64, zero_prob: f64) -> (RelayNetSpec, CodingDist) {
    let mut rng = seeded(seed);
    let shape = Shape::random(&mut rng, 3);
    let c0 = rng.gen_range(0.0..1.0);
    let spec = random_spec(&mut rng, shape, zero_prob, c0, 0.0).unwrap();
    let cd = random_markov(&mut rng, shape, zero_prob).unwrap();
    (spec, cd)
}

fn remark1_reduction() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let zero_prob = if seed % 2 == 0 { 0.0 } else { 0.25 };
        let (spec, cd) = random_instance(seed, zero_prob);
        let thm = eval_thm1(&spec, &cd).map_err(|e| e.to_string())?;
        let pd = eval_pdcf(&spec, &cd).map_err(|e| e.to_string())?;
        let rate = thm
            .achievable
            .rate()
            .ok_or(format!("seed {seed}: CF rate infeasible"))?;
        worst = worst.max((rate - pd.rate).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-9, format!("max |thm1 - pdcf| = {worst:.3e}"))?;
    ensure(secs < 10.0, format!("took {secs:.2} s"))?;
    Ok(format!("100 instances, max diff {worst:.1e}, {secs:.2} s"))
}

fn derivative_formulas() -> Check {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let (spec, cd) = random_instance(2000 + seed, 0.0);
        let ctx = SlopeContext::from_coding(&spec, &cd).map_err(|e| e.to_string())?;
        let pert = Perturbation::random(&ctx, &mut seeded(seed));
        let fp = f_primes(&ctx, &pert);
        let mi = |q: &CodingDist, a: &[&str], b: &[&str], c: &[&str]| {
            mutual_information(&build_joint(&spec, q).unwrap(), a, b, c).unwrap()
        };
        let f1 = |q: &CodingDist| mi(q, &[X], &[V], &[U, Y1]);
        let f2 = |q: &CodingDist| mi(q, &[V], &[X, Y1], &[U]) - mi(q, &[YR], &[V], &[U]);
        let plus = perturb(&cd, &pert, h).map_err(|e| e.to_string())?;
        let minus = perturb(&cd, &pert.negated(), h).map_err(|e| e.to_string())?;
        let d1 = (f1(&plus) - f1(&minus)) / (2.0 * h);
        let d2 = (f2(&plus) - f2(&minus)) / (2.0 * h);
        for (fd, an) in [(d1, fp.f1), (d2, fp.f2)] {
            let rel = (fd - an).abs() / an.abs();
            ensure(rel <= 1e-4, format!("seed {seed}: fd {fd} vs {an}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("100 instances, max relative error {worst:.1e}"))
}

fn curvature() -> Check {
    let spec = make_bec_pair(0.5, 0.25).unwrap();
    let cd = bec_coding_dist(0.5).unwrap();
    let ctx = SlopeContext::from_coding(&spec, &cd).map_err(|e| e.to_string())?;
    let dir = find_direction(&ctx).map_err(|e| e.to_string())?;
    let alphas = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
    let c = ccf_curvature(&ctx, &cd, &dir.perturbation, &alphas).map_err(|e| e.to_string())?;
    let bec = c.fitted_exponent.ok_or("BEC: no exponent")?;
    ensure((1.9..=2.1).contains(&bec), format!("BEC exponent {bec}"))?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for seed in 0..20 {
        let (spec, cd) = random_instance(3000 + seed, 0.0);
        let ctx = SlopeContext::from_coding(&spec, &cd).map_err(|e| e.to_string())?;
        let pert = Perturbation::random(&ctx, &mut seeded(seed));
        let alphas = default_schedule(alpha_max(&cd, &pert).map_err(|e| e.to_string())?);
        let c = ccf_curvature(&ctx, &cd, &pert, &alphas).map_err(|e| e.to_string())?;
        let e = c.fitted_exponent.ok_or(format!("seed {seed}: no exponent"))?;
        ensure((1.9..=2.1).contains(&e), format!("seed {seed}: exponent {e}"))?;
        lo = lo.min(e);
        hi = hi.max(e);
    }
    Ok(format!("BEC {bec:.4}, random [{lo:.4}, {hi:.4}]"))
}

fn duality() -> Check {
    let mut certified = 0;
    for seed in 0..100 {
        let zero_prob = if seed % 4 == 3 { 0.25 } else { 0.0 };
        let (spec, cd) = random_instance(4000 + seed, zero_prob);
        let ctx = SlopeContext::from_coding(&spec, &cd).map_err(|e| e.to_string())?;
        let d = find_direction(&ctx).map_err(|e| e.to_string())?;
        let w = check_lambda(&ctx, LAMBDA_GRID);
        ensure(
            (d.lp_value > TOL_LP) == w.is_none(),
            format!("seed {seed}: lp {} witness {w:?}", d.lp_value),
        )?;
        certified += (d.lp_value > TOL_LP) as usize;
    }
    Ok(format!("100/100 agree ({certified} with an improving direction)"))
}

fn bec_reproduction() -> Check {
    let mut rng = seeded(5);
    for _ in 0..20 {
        let p = rng.gen_range(0.01..0.99);
        let q = rng.gen_range(0.01..0.99);
        let r = bec_lambda_infeasibility(p, q, LAMBDA_GRID).map_err(|e| e.to_string())?;
        ensure(!r.feasible, format!("({p}, {q}) reported feasible"))?;
    }
    for t in [0.1, 0.5, 0.9] {
        for (p, q) in [(0.0, t), (1.0, t), (t, 1.0)] {
            let r = bec_lambda_infeasibility(p, q, LAMBDA_GRID).map_err(|e| e.to_string())?;
            ensure(r.feasible, format!("({p}, {q}) reported infeasible"))?;
        }
    }
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        for j in 0..10 {
            for k in 0..5 {
                let (p, q, c0) = (i as f64 / 9.0, j as f64 / 9.0, k as f64 / 4.0);
                let spec = make_bec_pair(p, c0).unwrap();
                let pd = eval_pdcf(&spec, &bec_coding_dist(q).unwrap()).map_err(|e| e.to_string())?;
                worst = worst.max((pd.rate - bec_rate(p, q, c0)).abs());
            }
        }
    }
    ensure(worst <= 1e-9, format!("bec_rate vs generic: {worst:.3e}"))?;
    Ok(format!(
        "20 infeasible, 9 trivial feasible, 500-point grid max diff {worst:.1e}"
    ))
}

fn modadd_reproduction() -> Check {
    let params = ModAddParams::new(0.1, 0.1, 0.2).unwrap();
    let cap = modadd_capacity(&params, 8, 3).map_err(|e| e.to_string())?;
    let (oracle, _, _) = modadd_grid_search(&params, 3, 80);
    ensure(
        (cap.value - oracle).abs() <= 1e-3,
        format!("optimiser {} vs grid {oracle}", cap.value),
    )?;
    ensure(cap.relay_rate <= 0.2 + 1e-9, format!("relay rate {}", cap.relay_rate))?;
    // V constant gives 1 - H(p); V = Yr needs I(Yr;V) = H(Yr) bits on the relay link
    let h_yr = binary_entropy(params.yr_crossover());
    let mut min_gain = f64::INFINITY;
    for k in 1..10 {
        let c0 = h_yr * k as f64 / 10.0;
        let p = ModAddParams::new(0.1, 0.1, c0).unwrap();
        let best = modadd_capacity(&p, 8, 3).map_err(|e| e.to_string())?.value;
        let constant = 1.0 - binary_entropy(0.1);
        let copy = 1.0 - p.h_z_given_yr();
        let gain = best - constant;
        ensure(gain >= 1e-3, format!("c0 {c0}: constant V within {gain:.2e}"))?;
        ensure(h_yr > c0, format!("c0 {c0}: V = Yr fits the link"))?;
        ensure(
            copy - best >= 1e-3,
            format!("c0 {c0}: optimum {best} reaches V = Yr value {copy}"),
        )?;
        min_gain = min_gain.min(gain);
    }
    Ok(format!(
        "value {:.6} vs grid {oracle:.6}, min gain over constant V {min_gain:.2e}",
        cap.value
    ))
}

fn slope_divergence() -> Check {
    let spec = make_bec_pair(0.5, 0.25).unwrap();
    let cd = bec_coding_dist(0.5).unwrap();
    let cert = certify(&spec, &cd, &Tolerances::default()).map_err(|e| e.to_string())?;
    ensure(
        cert.verdict.verdict == Verdict::InfiniteSlopeCertified,
        format!("{:?}", cert.verdict.verdict),
    )?;
    let pert = &cert.direction.perturbation;
    let alphas = default_schedule(alpha_max(&cd, pert).map_err(|e| e.to_string())?);
    let curve = slope_curve(&spec, &cd, pert, &alphas).map_err(|e| e.to_string())?;
    let at = |a: f64| curve.points.iter().find(|p| p.alpha == a).map(|p| p.ratio);
    let (big, small) = (
        at(1e-1).ok_or("1e-1 not scheduled")?,
        at(1e-5).ok_or("1e-5 not scheduled")?,
    );
    ensure(small >= 10.0 * big, format!("ratio {small} at 1e-5 vs {big} at 1e-1"))?;
    let tail: Vec<f64> = curve.points.iter().rev().take(4).map(|p| p.ratio).collect();
    ensure(tail.windows(2).all(|w| w[0] > w[1]), format!("tail ratios {tail:?}"))?;
    Ok(format!("ratio grows {:.1}x from 1e-1 to 1e-5", small / big))
}

fn markov_bundle(yr: Alphabet, v: Alphabet, law: impl Fn(usize, usize) -> f64) -> CodingDist {
    let ux = FiniteDist::uniform(vec![Alphabet::trivial(U), bin(X)]).unwrap();
    let tc = CondKernel::from_fn(vec![Alphabet::trivial(U), yr], vec![v], |f, t| law(f[1], t[0])).unwrap();
    CodingDist::markov(ux, &tc, &bin(Y1)).unwrap()
}

fn corollary_reduction() -> Check {
    let n = |name: &str, k: usize| Alphabet::new(name, k).unwrap();
    let cases: Vec<(&str, Shape, CodingDist)> = vec![
        (
            "two blocks",
            Shape::new(1, 2, 2, 4, 4),
            markov_bundle(n(YR, 4), n(V, 4), |yr, v| if (yr < 2) == (v < 2) { 0.5 } else { 0.0 }),
        ),
        (
            "relabelled copy",
            Shape::new(1, 2, 2, 3, 3),
            markov_bundle(n(YR, 3), n(V, 3), |yr, v| (v == (yr + 1) % 3) as u8 as f64),
        ),
        (
            "constant",
            Shape::new(1, 2, 2, 3, 2),
            markov_bundle(n(YR, 3), n(V, 2), |_, v| (v == 1) as u8 as f64),
        ),
        (
            "independent noise",
            Shape::new(1, 2, 2, 2, 3),
            markov_bundle(n(YR, 2), n(V, 3), |_, v| [0.2, 0.3, 0.5][v]),
        ),
        (
            "block with a shared letter",
            Shape::new(1, 2, 2, 3, 3),
            markov_bundle(n(YR, 3), n(V, 3), |yr, v| match (yr, v) {
                (2, 2) => 1.0,
                (2, _) => 0.0,
                (_, 2) => 0.0,
                (0, v) => [0.4, 0.6][v],
                (_, v) => [0.4, 0.6][v],
            }),
        ),
    ];
    let mut worst: f64 = 0.0;
    for (i, (name, shape, cd)) in cases.into_iter().enumerate() {
        let spec = random_spec(&mut seeded(80 + i as u64), shape, 0.0, 0.5, 0.0).unwrap();
        let ctx = SlopeContext::from_coding(&spec, &cd).map_err(|e| e.to_string())?;
        ensure(
            check_lambda(&ctx, LAMBDA_GRID).is_some(),
            format!("{name}: alignment fails"),
        )?;
        let red = deterministic_reduction(&spec, &cd).map_err(|e| e.to_string())?;
        ensure(
            red.rate_residual <= 1e-9,
            format!("{name}: residual {}", red.rate_residual),
        )?;
        ensure(
            red.penalty_gap >= -1e-9,
            format!("{name}: penalty gap {}", red.penalty_gap),
        )?;
        worst = worst.max(red.rate_residual);
    }
    Ok(format!("5 instances, max residual {worst:.1e}"))
}

fn claim1_arithmetic() -> Check {
    ensure(
        diamond_upper_bound(1.5).map_err(|e| e.to_string())? == 0.75,
        "halving 1.5".into(),
    )?;
    ensure(
        diamond_upper_bound(0.0).map_err(|e| e.to_string())? == 0.0,
        "halving 0".into(),
    )?;
    let eps = 1e-12;
    let a = rate_split_achievable(1.0, 1.0, eps).map_err(|e| e.to_string())?;
    ensure((a.rate - 1.0).abs() < 1e-9, format!("(1,1) rate {}", a.rate))?;
    let b = rate_split_achievable(1.0, 0.0, eps).map_err(|e| e.to_string())?;
    ensure(
        (b.rate - 0.5).abs() < 1e-9 && (b.m2_fraction - 0.5).abs() < 1e-9,
        format!("(1,0) {b:?}"),
    )?;
    let c = rate_split_achievable(0.8, 0.4, 0.01).map_err(|e| e.to_string())?;
    ensure((c.rate - 0.59).abs() < 1e-12, format!("(0.8,0.4) rate {}", c.rate))?;
    let want = [0.4, 0.4, 0.2];
    ensure(
        c.segments.iter().zip(want).all(|(s, w)| (s - w).abs() < 1e-12),
        format!("(0.8,0.4) segments {:?}", c.segments),
    )?;
    let cs: Vec<f64> = (0..=8).map(|k| if k == 0 { 0.0 } else { 10f64.powi(-k) }).collect();
    let curve = |f: &dyn Fn(f64) -> f64| {
        let mut s: Vec<(f64, f64)> = cs.iter().map(|&c| (c, f(c))).collect();
        s.sort_by(|x, y| x.0.total_cmp(&y.0));
        CoopCurve::new(s).unwrap()
    };
    let sqrt = slope_transfer(&curve(&|c| 1.0 + c.sqrt()), DIVERGENCE_THRESHOLD).map_err(|e| e.to_string())?;
    let lin = slope_transfer(&curve(&|c| 1.0 + 2.0 * c), DIVERGENCE_THRESHOLD).map_err(|e| e.to_string())?;
    ensure(sqrt.divergence, "sqrt curve not flagged".into())?;
    ensure(!lin.divergence, "linear curve flagged".into())?;
    Ok("three splits exact, sqrt flagged, linear not".into())
}

fn cli_determinism() -> Check {
    let bec = Example::Bec {
        p: 0.5,
        q: Some(0.5),
        c0: 0.25,
    };
    let configs = vec![
        RunConfig::new(Command::Example {
            example: bec.clone(),
            action: ExampleAction::CheckSlope,
        }),
        RunConfig {
            format: Format::Csv,
            ..RunConfig::new(Command::Example {
                example: bec.clone(),
                action: ExampleAction::SweepCurve,
            })
        },
        RunConfig::new(Command::Example {
            example: Example::Bec {
                p: 0.3,
                q: None,
                c0: 0.4,
            },
            action: ExampleAction::Rate,
        }),
        RunConfig::new(Command::Example {
            example: Example::Modadd {
                p: 0.1,
                delta: 0.1,
                c0: 0.2,
            },
            action: ExampleAction::Rate,
        }),
    ];
    for cfg in &configs {
        let a = dispatch(cfg).map_err(|e| e.to_string())?;
        let b = dispatch(cfg).map_err(|e| e.to_string())?;
        ensure(a == b, format!("{} differs between runs", cfg.command.name()))?;
    }
    Ok(format!("{} configurations byte-identical", configs.len()))
}

fn main() {
    let criteria: [(&str, Criterion); 10] = [
        ("no-cooperation reduction", remark1_reduction),
        ("derivative formulas", derivative_formulas),
        ("curvature exponent", curvature),
        ("LP and lambda duality", duality),
        ("BEC example", bec_reproduction),
        ("mod-2 adder example", modadd_reproduction),
        ("slope divergence curve", slope_divergence),
        ("deterministic reduction", corollary_reduction),
        ("three-relay arithmetic", claim1_arithmetic),
        ("report determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
