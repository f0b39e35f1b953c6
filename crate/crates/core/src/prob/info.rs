use super::FiniteDist;
use crate::error::{Error, Result};
use crate::tol::TOL_SUPP;

/// Entropy in bits of a pmf given as a slice, with 0 log 0 = 0.
pub fn entropy_of(pmf: &[f64]) -> f64 {
    pmf.iter().filter(|&&p| p > TOL_SUPP).map(|&p| -p * p.log2()).sum()
}

/// The binary entropy function h(p).
pub fn binary_entropy(p: f64) -> f64 {
    entropy_of(&[p, 1.0 - p])
}

fn disjoint(groups: &[&[&str]]) -> Result<()> {
    for (i, g) in groups.iter().enumerate() {
        for name in g.iter() {
            if groups[i + 1..].iter().any(|h| h.contains(name)) {
                return Err(Error::OverlappingSubsets(name.to_string()));
            }
        }
    }
    Ok(())
}

/// H(vars) in bits.
pub fn entropy(d: &FiniteDist, vars: &[&str]) -> Result<f64> {
    let positions = d.positions(vars)?;
    Ok(entropy_of(&d.marginal_array(&positions)))
}

fn joint_entropy(d: &FiniteDist, groups: &[&[&str]]) -> Result<f64> {
    let names: Vec<&str> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    entropy(d, &names)
}

/// H(target | given) = H(target, given) − H(given).
pub fn conditional_entropy(d: &FiniteDist, target: &[&str], given: &[&str]) -> Result<f64> {
    disjoint(&[target, given])?;
    Ok(joint_entropy(d, &[target, given])? - entropy(d, given)?)
}

/// I(a; b | given) before clamping; tiny negative values are round-off.
pub fn mutual_information_raw(d: &FiniteDist, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    disjoint(&[a, b, given])?;
    Ok(joint_entropy(d, &[a, given])? + joint_entropy(d, &[b, given])?
        - joint_entropy(d, &[a, b, given])?
        - entropy(d, given)?)
}

/// I(a; b | given) in bits, clamped at zero. Pass an empty `given` for the
/// unconditional quantity.
pub fn mutual_information(d: &FiniteDist, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64> {
    let raw = mutual_information_raw(d, a, b, given)?;
    debug_assert!(raw > -1e-9, "mutual information {raw} below round-off");
    Ok(raw.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Alphabet;
    use proptest::prelude::*;

    fn bin(n: &str) -> Alphabet {
        Alphabet::binary(n)
    }

    #[test]
    fn entropy_examples() {
        let u = FiniteDist::uniform(vec![bin("a")]).unwrap();
        assert!((entropy(&u, &["a"]).unwrap() - 1.0).abs() < 1e-15);
        let point = FiniteDist::point(vec![bin("a")], &[1]).unwrap();
        assert_eq!(entropy(&point, &["a"]).unwrap(), 0.0);
        let ber = FiniteDist::new(vec![bin("a")], vec![0.75, 0.25]).unwrap();
        assert!((entropy(&ber, &["a"]).unwrap() - 0.8112781).abs() < 1e-6);
        assert!(entropy(&ber, &["b"]).is_err());
        assert_eq!(entropy(&ber, &[]).unwrap(), 0.0);
    }

    #[test]
    fn conditional_entropy_examples() {
        // independent target
        let d = FiniteDist::from_fn(vec![bin("a"), bin("b")], |i| [0.3, 0.7][i[0]] * [0.6, 0.4][i[1]]).unwrap();
        let h = conditional_entropy(&d, &["a"], &["b"]).unwrap();
        assert!((h - entropy(&d, &["a"]).unwrap()).abs() < 1e-12);
        // target a function of given
        let f = FiniteDist::from_fn(vec![bin("a"), bin("b")], |i| if i[0] == i[1] { 0.5 } else { 0.0 }).unwrap();
        assert!(conditional_entropy(&f, &["a"], &["b"]).unwrap().abs() < 1e-15);
        assert!(matches!(
            conditional_entropy(&f, &["a"], &["a"]),
            Err(Error::OverlappingSubsets(_))
        ));
    }

    #[test]
    fn z_given_noisy_copy_matches_table_enumeration() {
        let (p, delta) = (0.1_f64, 0.1_f64);
        // oracle: enumerate the four (z, v) cells of V = Z xor W by hand
        let cell = |z: usize, v: usize| {
            let pz = if z == 1 { p } else { 1.0 - p };
            let pw = if z ^ v == 1 { delta } else { 1.0 - delta };
            pz * pw
        };
        let mut oracle = 0.0;
        for v in 0..2 {
            let pv = cell(0, v) + cell(1, v);
            for z in 0..2 {
                let c = cell(z, v);
                oracle -= c * (c / pv).log2();
            }
        }
        let d = FiniteDist::from_fn(vec![bin("z"), bin("v")], |i| cell(i[0], i[1])).unwrap();
        let h = conditional_entropy(&d, &["z"], &["v"]).unwrap();
        assert!((h - oracle).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_examples() {
        let ind = FiniteDist::uniform(vec![bin("a"), bin("b")]).unwrap();
        assert!(mutual_information(&ind, &["a"], &["b"], &[]).unwrap().abs() < 1e-15);
        let copy = FiniteDist::from_fn(vec![bin("a"), bin("b")], |i| if i[0] == i[1] { 0.5 } else { 0.0 }).unwrap();
        assert!((mutual_information(&copy, &["a"], &["b"], &[]).unwrap() - 1.0).abs() < 1e-15);
        let eps = 0.11;
        let bsc = FiniteDist::from_fn(vec![bin("x"), bin("y")], |i| {
            0.5 * if i[0] == i[1] { 1.0 - eps } else { eps }
        })
        .unwrap();
        let i = mutual_information(&bsc, &["x"], &["y"], &[]).unwrap();
        assert!((i - (1.0 - binary_entropy(eps))).abs() < 1e-12);
        assert!((i - 0.5001).abs() < 1e-3);
        assert!(mutual_information(&bsc, &["x"], &["y"], &["x"]).is_err());
    }

    fn random_joint(sizes: Vec<usize>, weights: Vec<f64>) -> FiniteDist {
        let names = ["a", "b", "c"];
        let vars: Vec<Alphabet> = sizes
            .iter()
            .zip(names)
            .map(|(&s, n)| Alphabet::new(n, s).unwrap())
            .collect();
        let n: usize = sizes.iter().product();
        let w = &weights[..n];
        let total: f64 = w.iter().sum();
        FiniteDist::new(vars, w.iter().map(|x| x / total).collect()).unwrap()
    }

    fn joint_strategy() -> impl Strategy<Value = FiniteDist> {
        (1usize..=4, 1usize..=4, 1usize..=4)
            .prop_flat_map(|(a, b, c)| {
                (
                    Just(vec![a, b, c]),
                    prop::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.001f64..1.0], a * b * c),
                )
            })
            .prop_filter("needs mass", |(_, w)| w.iter().sum::<f64>() > 0.01)
            .prop_map(|(s, w)| random_joint(s, w))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn chain_rule(d in joint_strategy()) {
            let hab = entropy(&d, &["a", "b"]).unwrap();
            let ha = entropy(&d, &["a"]).unwrap();
            let hb_a = conditional_entropy(&d, &["b"], &["a"]).unwrap();
            prop_assert!((hab - ha - hb_a).abs() < 1e-9);
        }

        #[test]
        fn conditional_mi_nonnegative(d in joint_strategy()) {
            let raw = mutual_information_raw(&d, &["a"], &["b"], &["c"]).unwrap();
            prop_assert!(raw >= -1e-9);
            prop_assert!(mutual_information(&d, &["a"], &["b"], &["c"]).unwrap() >= 0.0);
        }

        #[test]
        fn mi_chain_rule(d in joint_strategy()) {
            let lhs = mutual_information_raw(&d, &["a"], &["b", "c"], &[]).unwrap();
            let rhs = mutual_information_raw(&d, &["a"], &["c"], &[]).unwrap()
                + mutual_information_raw(&d, &["a"], &["b"], &["c"]).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-9);
        }

        #[test]
        fn compose_condition_round_trip(d in joint_strategy()) {
            let k = d.condition(&["a", "b"]).unwrap();
            let back = d.marginalize(&["a", "b"]).unwrap().compose(&k).unwrap();
            for (x, y) in back.pmf().iter().zip(d.pmf()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
