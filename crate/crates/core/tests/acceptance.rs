//! End-to-end acceptance suite. Each test covers one numbered criterion and
//! prints a verdict line; run with `--nocapture` to see them.

use cantor_core::atoms::{atom_tree, isolated_paths};
use cantor_core::bits::BitString;
use cantor_core::measures::{
    continuity_modulus, metric_dn, metric_dp, CylinderAssignment, ExtensionPolicy,
    FiniteRationalMeasure, FiniteTree, MeasureOracle, PeriodicPoint,
};
use cantor_core::mltests::{self, pullback, MlTest, TestFamily, TestLevel};
use cantor_core::rational::{DyadicRational, Rational};
use cantor_core::settling::{settling_sequence, verify_ncr, StageEnumeration};
use cantor_core::transforms::{
    build_constraints, constraint_measure, continuity_repair, image_measure, rationalize,
    transport_map, MonotoneFunctional, TransformError,
};
use num::BigInt;
use std::collections::BTreeSet;
use std::time::Instant;

fn pass(criterion: u32, label: &str) {
    println!("criterion {criterion} ({label}): PASS");
}

fn bs(s: &str) -> BitString {
    BitString::parse_token(s).unwrap()
}

fn dy(s: &str) -> DyadicRational {
    s.parse().unwrap()
}

fn dirac0() -> MeasureOracle {
    MeasureOracle::dirac(PeriodicPoint::all_zeros())
}

fn bernoulli_quarter() -> MeasureOracle {
    MeasureOracle::bernoulli(dy("1/4")).unwrap()
}

fn no_double_ones_tree(depth: usize) -> FiniteTree {
    FiniteTree::from_predicate(depth, |s| {
        !(0..s.len().saturating_sub(1)).any(|i| s.bit(i) && s.bit(i + 1))
    })
}

fn finite_rational_example() -> MeasureOracle {
    MeasureOracle::finite_rational(
        FiniteRationalMeasure::new(vec![
            (bs("0"), Rational::new(1, 2)),
            (bs("1"), Rational::new(1, 2)),
        ])
        .unwrap(),
    )
}

fn half_dirac_half_lebesgue() -> MeasureOracle {
    MeasureOracle::mixture(vec![
        (Rational::new(1, 2), dirac0()),
        (Rational::new(1, 2), MeasureOracle::lebesgue()),
    ])
    .unwrap()
}

/// Depth-1 measure with masses 1/3 and 2/3, uniform below.
fn third_measure() -> MeasureOracle {
    MeasureOracle::from_fn(true, |s, _| {
        Ok(if s.is_empty() {
            Rational::one()
        } else {
            let top = if s.bit(0) {
                Rational::new(2, 3)
            } else {
                Rational::new(1, 3)
            };
            top * Rational::pow2_neg(s.len() as u32 - 1)
        })
    })
}

#[test]
fn criterion_01_additivity_to_depth_12() {
    let start = Instant::now();
    let constructors: Vec<(&str, MeasureOracle)> = vec![
        ("lebesgue", MeasureOracle::lebesgue()),
        ("dirac", MeasureOracle::dirac("(01)*".parse().unwrap())),
        ("bernoulli", bernoulli_quarter()),
        ("finite-rational", finite_rational_example()),
        (
            "tree-uniform",
            MeasureOracle::tree_uniform(no_double_ones_tree(6)).unwrap(),
        ),
        ("mixture", half_dirac_half_lebesgue()),
        (
            "assignment",
            MeasureOracle::from_assignment(
                CylinderAssignment::truncate(
                    &bernoulli_quarter(),
                    6,
                    ExtensionPolicy::Uniform,
                )
                .unwrap(),
            ),
        ),
    ];
    for (name, mu) in &constructors {
        assert_eq!(
            mu.exact_value(&BitString::empty()).unwrap(),
            Rational::one(),
            "{name}: root mass"
        );
        for level in 0..12usize {
            let ok = cantor_core::exec::map_level(level, |sigma| {
                let parent = mu.exact_value(sigma).unwrap();
                let left = mu.exact_value(&sigma.child(false)).unwrap();
                let right = mu.exact_value(&sigma.child(true)).unwrap();
                parent == left + right
            });
            assert!(
                ok.iter().all(|&b| b),
                "{name}: additivity fails at level {level}"
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}, budget is 10 s");
    pass(1, "additivity exhaustive to depth 12");
}

#[test]
fn criterion_02_measure_metric() {
    let l = MeasureOracle::lebesgue();
    let got = metric_dp(&l, &dirac0(), 20).unwrap();
    let target = Rational::new(2, 3);
    assert!(
        (got - &target).abs() <= Rational::pow2_neg(20),
        "d_P(L, point mass) must be within 2^-20 of 2/3"
    );

    let fixtures = [
        l,
        bernoulli_quarter(),
        dirac0(),
        finite_rational_example(),
    ];
    for n in 0..=6u32 {
        let d: Vec<Vec<Rational>> = fixtures
            .iter()
            .map(|a| fixtures.iter().map(|b| metric_dn(a, b, n).unwrap()).collect())
            .collect();
        for i in 0..fixtures.len() {
            for j in 0..fixtures.len() {
                assert_eq!(d[i][j], d[j][i], "symmetry fails at n={n}");
                for k in 0..fixtures.len() {
                    assert!(
                        d[i][k] <= &d[i][j] + &d[j][k],
                        "triangle inequality fails at n={n}"
                    );
                }
            }
        }
    }
    pass(2, "metric closed form and d_n axioms");
}

#[test]
fn criterion_03_atom_tree() {
    let mu = half_dirac_half_lebesgue();
    let c = Rational::new(1, 4);
    let tree = atom_tree(&mu, &c, 10).unwrap();

    let level10: Vec<&BitString> = tree.nodes_at_level(10).collect();
    assert_eq!(level10, vec![&BitString::zeros(10)], "level-10 node set");

    for m in 0..=10u32 {
        let margin = tree.bound_margin(m);
        if margin.is_zero() || margin.is_negative() {
            continue;
        }
        let width = Rational::from_big(BigInt::from(tree.width(m)), BigInt::from(1));
        assert!(width * margin <= Rational::one(), "width bound fails at level {m}");
    }

    let report = isolated_paths(&tree);
    assert_eq!(report.certified, vec![BitString::zeros(10)]);
    assert!(!report.inconclusive);
    pass(3, "atom tree, width bound, isolated path");
}

#[test]
fn criterion_04_rationalize() {
    let inputs: Vec<(&str, MeasureOracle)> = vec![
        ("bernoulli", bernoulli_quarter()),
        ("thirds", third_measure()),
        (
            "tree-uniform",
            MeasureOracle::tree_uniform(no_double_ones_tree(10)).unwrap(),
        ),
    ];
    for (name, mu) in &inputs {
        let nu = rationalize(mu, 10).unwrap();
        assert!(nu.is_dyadic(), "{name}: output must be dyadic");
        // additivity is enforced by the assignment invariant; recheck anyway
        for l in 0..10usize {
            for sigma in BitString::all_of_length(l) {
                let parent = nu.value(&sigma).unwrap();
                let left = nu.value(&sigma.child(false)).unwrap();
                let right = nu.value(&sigma.child(true)).unwrap();
                assert_eq!(parent, left + right, "{name}: additivity at {sigma:?}");
            }
        }
        for l in 0..=10usize {
            for sigma in BitString::all_of_length(l) {
                let m = mu.exact_value(&sigma).unwrap();
                let v = nu.value(&sigma).unwrap();
                assert!(
                    m < Rational::from_int(2) * v,
                    "{name}: mu < 2 nu fails at {sigma:?}"
                );
            }
        }
    }

    let nu = rationalize(&third_measure(), 1).unwrap();
    assert_eq!(nu.value(&bs("0")).unwrap(), Rational::new(3, 8));
    assert_eq!(nu.value(&bs("1")).unwrap(), Rational::new(5, 8));
    pass(4, "rationalization is dyadic, additive, dominating");
}

#[test]
fn criterion_05_transport() {
    let cases: Vec<(&str, CylinderAssignment)> = vec![
        (
            "lebesgue",
            CylinderAssignment::truncate(&MeasureOracle::lebesgue(), 8, ExtensionPolicy::Uniform)
                .unwrap(),
        ),
        ("rationalized-bernoulli", rationalize(&bernoulli_quarter(), 20).unwrap()),
    ];
    for (name, nu) in cases {
        let phi = transport_map(&nu, 8).unwrap();
        // level-wise order preservation and surjectivity
        for n in 1..=8usize {
            let use_len = phi.use_len(n).unwrap();
            let mut seen: BTreeSet<BitString> = BTreeSet::new();
            let mut last: Option<BitString> = None;
            for sigma in BitString::all_of_length(use_len) {
                let out = phi.output_at(n, &sigma).unwrap().clone();
                if let Some(prev) = &last {
                    assert!(prev <= &out, "{name}: order violated at level {n}");
                }
                seen.insert(out.clone());
                last = Some(out);
            }
            assert_eq!(seen.len(), 1 << n, "{name}: level {n} not onto");
        }
        let img = image_measure(&MeasureOracle::from_assignment(nu), &phi, 8).unwrap();
        for l in 0..=8usize {
            let bound = Rational::pow2_neg(l as u32);
            for v in img.level_values(l) {
                assert!(
                    (v - &bound).abs() <= bound,
                    "{name}: image strays from uniform at level {l}"
                );
            }
        }
    }
    pass(5, "transport tracks the uniform measure");
}

#[test]
fn criterion_06_image_measure_oracle() {
    let mu = MeasureOracle::lebesgue();
    let fixtures: Vec<(&str, MonotoneFunctional)> = vec![
        ("identity", MonotoneFunctional::identity(4)),
        ("pairwise-xor", MonotoneFunctional::pairwise_xor(4)),
        ("constant-zero", MonotoneFunctional::constant_zero(4)),
    ];
    for (name, phi) in &fixtures {
        for depth in 0..=4usize {
            let img = image_measure(&mu, phi, depth).unwrap();
            // independent oracle: per-level mass transport over all inputs
            for n in 0..=depth {
                let expect = if n == 0 {
                    vec![Rational::one()]
                } else {
                    let use_len = phi.use_len(n).unwrap();
                    let mut out = vec![Rational::zero(); 1 << n];
                    for input in BitString::all_of_length(use_len) {
                        let tau = phi.output_at(n, &input).unwrap().prefix(n);
                        out[tau.rank() as usize] += &mu.exact_value(&input).unwrap();
                    }
                    out
                };
                assert_eq!(
                    img.level_values(n),
                    &expect[..],
                    "{name}: level {n} of depth-{depth} image"
                );
            }
        }
    }

    // the repaired image agrees with the plain one when nothing is repaired,
    // and conserves mass when something is
    let id = MonotoneFunctional::identity(3);
    let plain = image_measure(&mu, &id, 3).unwrap();
    let same = continuity_repair(&mu, &id, &id, 3).unwrap();
    assert_eq!(plain, same);
    let repaired = continuity_repair(
        &mu,
        &MonotoneFunctional::constant_zero(3),
        &MonotoneFunctional::identity(3),
        3,
    )
    .unwrap();
    for n in 0..=3usize {
        let total: Rational = repaired.level_values(n).iter().cloned().sum();
        assert_eq!(total, Rational::one());
    }
    pass(6, "image measure equals brute-force transport");
}

#[test]
fn criterion_07_constraint_system() {
    let id = MonotoneFunctional::identity(4);
    let cs = build_constraints(&id, &id, 4).unwrap();
    let solution = constraint_measure(&cs, 8).unwrap();
    for l in 0..=4usize {
        for v in solution.level_values(l) {
            assert_eq!(v, &Rational::pow2_neg(l as u32), "identity forces uniform");
        }
    }

    let phi = MonotoneFunctional::drop_odd_bits(3);
    let psi = MonotoneFunctional::double_each_bit(6);
    let cs2 = build_constraints(&phi, &psi, 3).unwrap();
    let solution2 = constraint_measure(&cs2, 8).unwrap();
    for (sigma, rec) in cs2.records() {
        let v = solution2.value(sigma).unwrap();
        assert!(v >= rec.lower && v <= rec.upper, "interval violated at {sigma:?}");
        assert!(
            v <= Rational::pow2_neg(sigma.len() as u32),
            "upper bound 2^-|sigma| violated at {sigma:?}"
        );
    }

    let mut bad = build_constraints(&id, &id, 3).unwrap();
    bad.set_interval(&bs("10"), Rational::new(1, 2), Rational::new(1, 8));
    assert_eq!(
        constraint_measure(&bad, 8),
        Err(TransformError::Infeasible { sigma: bs("10") })
    );
    pass(7, "constraint solver: forced, feasible, infeasible");
}

#[test]
fn criterion_08_pullback_domination() {
    let systems = vec![
        {
            let id = MonotoneFunctional::identity(4);
            build_constraints(&id, &id, 4).unwrap()
        },
        {
            let phi = MonotoneFunctional::drop_odd_bits(3);
            let psi = MonotoneFunctional::double_each_bit(6);
            build_constraints(&phi, &psi, 3).unwrap()
        },
    ];
    let tests = vec![
        MlTest::new(vec![
            TestLevel::new(0, [BitString::empty()]),
            TestLevel::new(1, [bs("0")]),
            TestLevel::new(2, [bs("00"), bs("11")]),
        ])
        .unwrap(),
        MlTest::new(vec![
            TestLevel::new(0, [bs("0"), bs("01")]),
            TestLevel::new(1, [bs("101"), bs("010")]),
        ])
        .unwrap(),
        MlTest::new(vec![TestLevel::new(0, []), TestLevel::new(1, [bs("111")])]).unwrap(),
    ];
    for cs in &systems {
        let mu = MeasureOracle::from_assignment(constraint_measure(cs, 8).unwrap());
        for test in &tests {
            let pulled = pullback(test, cs).unwrap();
            for (source, image) in test.levels().iter().zip(pulled.levels()) {
                let lebesgue_sum = mltests::raw_lebesgue_sum(image);
                let mut mu_sum = Rational::zero();
                for sigma in &source.strings {
                    mu_sum += &mu.exact_value(sigma).unwrap();
                }
                assert!(
                    lebesgue_sum <= mu_sum,
                    "domination fails at level {}",
                    source.index
                );
            }
        }
    }
    pass(8, "pullback levels are dominated");
}

#[test]
fn criterion_09_settling_and_cover() {
    let start = Instant::now();
    let e = StageEnumeration::new(vec![(1, 3), (0, 5)]).unwrap();

    let r = settling_sequence(&e, 10);
    assert_eq!(r.markers, vec![0, 5, 6, 7, 8, 9], "markers of the fixture");

    for mu in [MeasureOracle::lebesgue(), bernoulli_quarter()] {
        let reports = verify_ncr(&mu, &e, 6, 40).unwrap();
        assert_eq!(reports.len(), 7);
        for report in &reports {
            assert!(
                report.raw_sum <= report.budget,
                "budget exceeded at level {}",
                report.index
            );
            assert!(
                report.covered_by.is_some(),
                "true settling string escapes level {}",
                report.index
            );
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs() < 10, "took {elapsed:?}, budget is 10 s");
    pass(9, "settling markers, budgets, coverage");
}

#[test]
fn criterion_10_basis_combine() {
    // brute-force containment reference
    fn brute_contained(sigma: &BitString, strings: &BTreeSet<BitString>) -> bool {
        if strings.is_empty() {
            return false;
        }
        let max_len = strings.iter().map(|u| u.len()).max().unwrap();
        let len = max_len.max(sigma.len());
        let grow = len - sigma.len();
        (0..(1u64 << grow)).all(|r| {
            let ext = sigma.concat(&BitString::from_rank(grow, r));
            strings.iter().any(|u| u.is_prefix_of(&ext))
        })
    }

    struct Fixture {
        tree: FiniteTree,
        family: TestFamily,
        depth: usize,
        n_max: u32,
    }

    let fixtures = [
        // full shallow tree, everything covered
        {
            let tree = FiniteTree::full(2);
            let mut family = TestFamily::new();
            for n in 0..=1u32 {
                for tau in tree.nodes() {
                    family.insert(n, tau.clone(), [BitString::empty()]);
                }
            }
            Fixture { tree, family, depth: 2, n_max: 1 }
        },
        // single path with point levels
        {
            let tree = FiniteTree::from_predicate(5, |s| s.bits().all(|b| !b));
            let mut family = TestFamily::new();
            for tau in tree.nodes() {
                family.insert(0, tau.clone(), [tau.clone()]);
            }
            Fixture { tree, family, depth: 5, n_max: 0 }
        },
        // mixed: pruned tree, levels depend on the node
        {
            let tree = FiniteTree::from_predicate(3, |s| {
                !(s.len() >= 2 && s.bit(0) && s.bit(1))
            });
            let mut family = TestFamily::new();
            for n in 0..=1u32 {
                for tau in tree.nodes() {
                    let items: Vec<BitString> = if tau.is_empty() {
                        vec![bs("0"), bs("1")]
                    } else if tau.bit(0) {
                        vec![bs("10"), bs("0")]
                    } else {
                        vec![bs("0"), bs("110")]
                    };
                    family.insert(n, tau.clone(), items);
                }
            }
            Fixture { tree, family, depth: 3, n_max: 1 }
        },
    ];

    for (i, f) in fixtures.iter().enumerate() {
        let probe = BitString::zeros(f.depth);
        let out = mltests::basis_combine(&f.tree, &f.family, f.n_max, f.depth, &probe).unwrap();
        for n in 0..=f.n_max {
            let got = &out.test.level(n).unwrap().strings;
            for len in 0..=f.depth {
                for sigma in BitString::all_of_length(len) {
                    let expect = f
                        .tree
                        .nodes_at_level(len)
                        .all(|tau| brute_contained(&sigma, f.family.get(n, tau).unwrap()));
                    assert_eq!(
                        got.contains(&sigma),
                        expect,
                        "fixture {i}: disagreement at n={n}, {sigma:?}"
                    );
                }
            }
        }
    }
    pass(10, "basis combination matches brute force");
}

#[test]
fn modulus_spot_checks() {
    // supporting closed forms used by the settling criterion
    let l = MeasureOracle::lebesgue();
    assert_eq!(continuity_modulus(&l, &Rational::pow2_neg(3), 20).unwrap(), 3);
    let b = bernoulli_quarter();
    assert_eq!(continuity_modulus(&b, &Rational::pow2_neg(7), 40).unwrap(), 17);
}
