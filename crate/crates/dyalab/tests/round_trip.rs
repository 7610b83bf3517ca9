//! Config and function-JSON round trips.

use proptest::prelude::*;

use dyalab::config::{OperatorKind, Scenario, ScenarioConfig};
use dyalab::funcio;
use dyalab_core::atom::Atom1D;
use dyalab_core::scale::ScaleParam;
use dyalab_core::{DyadicInterval, ExactFunction, QSqrt2, Scalar};

fn lambda() -> impl Strategy<Value = QSqrt2> {
    prop_oneof![
        (33i64..64).prop_map(|n| QSqrt2::ratio(n, 64)),
        Just(QSqrt2::sqrt2() * QSqrt2::ratio(1, 2)),
    ]
}

fn scenario() -> impl Strategy<Value = Scenario> {
    (0..Scenario::ALL.len()).prop_map(|i| Scenario::ALL[i])
}

fn operator() -> impl Strategy<Value = OperatorKind> {
    prop_oneof![
        Just(OperatorKind::Commutator),
        Just(OperatorKind::Riesz),
        Just(OperatorKind::ParaB),
        Just(OperatorKind::ParaBAdjoint),
        Just(OperatorKind::ParaC),
        Just(OperatorKind::ParaD),
        Just(OperatorKind::Multiply),
    ]
}

prop_compose! {
    fn config()(
        name in scenario(),
        dim in 1usize..=3,
        lambda in prop::collection::vec(lambda(), 1..=3),
        p in 1.01f64..8.0,
        q in prop::option::of(1.01f64..20.0),
        window_scale in -3i32..3,
        resolution in 0i32..8,
        depth in 1u32..6,
        counts in (1usize..40, 0usize..500, 0usize..200, 1usize..20, 1usize..2000, 1usize..30),
        seed in any::<u64>(),
        eta in 0.01f64..1.0,
        k in (0u32..5, 0u32..5, 1u32..16),
        n_values in prop::collection::vec(1usize..64, 1..5),
        oracle_depth in 1u32..80,
        operator in operator(),
        strict in any::<bool>(),
        dir in "[a-z][a-z0-9_/]{0,12}",
        input in "([a-z][a-z0-9_./]{0,12})?",
    ) -> ScenarioConfig {
        let mut c = ScenarioConfig::new(name);
        c.dim = dim;
        c.lambda = lambda;
        c.p = p;
        c.q = q;
        c.window_scale = window_scale;
        c.resolution = resolution;
        c.depth = depth;
        (c.terms, c.cases, c.eigen_cases, c.restarts, c.iters, c.budget) = counts;
        c.corpus_size = counts.0 + 1;
        c.seed = seed;
        c.eta = eta;
        (c.k_max, c.k, c.spacing_log2) = k;
        c.n_values = n_values;
        c.oracle_depth = oracle_depth;
        c.operator = operator;
        c.strict_convergence = strict;
        c.output_dir = dir;
        c.input = input;
        c
    }
}

fn atom() -> impl Strategy<Value = Atom1D<QSqrt2>> {
    (0u8..3, -6i32..3, -8i64..8, 33i64..64).prop_map(|(kind, s, pos, l)| {
        let i = DyadicInterval::new(s, pos);
        match kind {
            0 => Atom1D::Haar(i),
            1 => Atom1D::Indicator(i),
            _ => Atom1D::Tail(i, ScaleParam::new(QSqrt2::ratio(l, 64)).unwrap()),
        }
    })
}

fn function() -> impl Strategy<Value = ExactFunction> {
    (1usize..=3).prop_flat_map(|d| {
        prop::collection::vec((-64i64..64, 1i64..16, any::<bool>(), prop::collection::vec(atom(), d)), 1..6)
            .prop_map(move |terms| {
                terms.into_iter().fold(ExactFunction::zero(d), |acc, (n, m, surd, atoms)| {
                    let mut c = QSqrt2::ratio(n, m);
                    if surd {
                        c = c * QSqrt2::sqrt2();
                    }
                    &acc + &ExactFunction::tensor(c, atoms)
                })
            })
    })
}

proptest! {
    #[test]
    fn config_round_trip(c in config()) {
        let text = c.serialize();
        let back = ScenarioConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.serialize(), text);
    }

    #[test]
    fn function_json_round_trip(f in function()) {
        let text = funcio::to_json(&f);
        prop_assert_eq!(funcio::parse(&text).unwrap(), f);
    }
}
