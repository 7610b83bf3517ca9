//! Property tests over random exact inputs.

use proptest::prelude::*;

use dyalab_core::decomposition::commutator_decomposed;
use dyalab_core::grid::{haar_analyze, haar_synthesize, to_grid, GridFunction};
use dyalab_core::normest::{opnorm_pq, AscentConfig, Matrix};
use dyalab_core::norms::{bmo_product, bmo_rect, sup_haar_ratio, SearchBudget};
use dyalab_core::operators::{commutator_direct, para_b, para_d, para_d_via_projections, riesz_apply};
use dyalab_core::scale::ScaleParam;
use dyalab_core::{
    DyadicInterval, DyadicPoint, DyadicRectangle, ExactFunction, ExactScale, One, QSqrt2, Scalar, Zero,
};

fn q(n: i64, d: i64) -> QSqrt2 {
    QSqrt2::ratio(n, d)
}

/// `a + b sqrt2` with components anywhere up to the `i64` range, so both the
/// small and the promoted representations are exercised.
fn qsqrt2() -> impl Strategy<Value = QSqrt2> {
    let part = prop_oneof![
        (-50i64..50, 1i64..50).prop_map(|(n, d)| (n, d)),
        (any::<i64>(), 1i64..=i64::MAX).prop_map(|(n, d)| (n / 2, d)),
    ];
    (part.clone(), part).prop_map(|((a, b), (c, d))| q(a, b) + QSqrt2::sqrt2() * q(c, d))
}

fn scale_param() -> impl Strategy<Value = ExactScale> {
    // lambda = n / 64 strictly inside (1/2, 1)
    (33i64..64).prop_map(|n| ScaleParam::new(q(n, 64)).expect("in range"))
}

fn interval_under(root: DyadicInterval, depth: u32) -> impl Strategy<Value = DyadicInterval> {
    (0..depth).prop_flat_map(move |level| {
        (0..(1i64 << level)).prop_map(move |p| DyadicInterval::new(root.scale - level as i32, (root.pos << level) + p))
    })
}

fn rect_under(root: DyadicRectangle, depth: u32) -> BoxedStrategy<DyadicRectangle> {
    root.sides
        .iter()
        .map(|s| interval_under(*s, depth).boxed())
        .collect::<Vec<_>>()
        .prop_map(DyadicRectangle::new)
        .boxed()
}

/// A finite Haar combination on rectangles below `root`.
fn haar_function(root: DyadicRectangle, depth: u32, max_terms: usize) -> impl Strategy<Value = ExactFunction> {
    let d = root.dim();
    prop::collection::vec((rect_under(root, depth), -16i64..=16), 1..=max_terms).prop_map(move |terms| {
        terms.into_iter().fold(ExactFunction::zero(d), |acc, (r, c)| {
            &acc + &ExactFunction::haar_rect(&r).scaled(&q(c, 8))
        })
    })
}

/// Haar and indicator terms, so that the functions are not mean zero.
fn mixed_function(root: DyadicRectangle, depth: u32, max_terms: usize) -> impl Strategy<Value = ExactFunction> {
    let d = root.dim();
    prop::collection::vec((rect_under(root, depth), -16i64..=16, any::<bool>()), 1..=max_terms).prop_map(
        move |terms| {
            terms.into_iter().fold(ExactFunction::zero(d), |acc, (r, c, haar)| {
                let atom = if haar {
                    ExactFunction::haar_rect(&r)
                } else {
                    ExactFunction::indicator_rect(&r)
                };
                &acc + &atom.scaled(&q(c, 8))
            })
        },
    )
}

/// A symbol, a Haar-finite input and per-coordinate scales in dimension
/// 1, 2 or 3.
fn decomposition_case() -> impl Strategy<Value = (ExactFunction, ExactFunction, Vec<ExactScale>)> {
    (1usize..=3).prop_flat_map(|d| {
        let depth = if d == 3 { 2 } else { 3 };
        (
            haar_function(unit_root(d), depth, 2),
            haar_function(unit_root(d), depth, 3),
            prop::collection::vec(scale_param(), d),
        )
    })
}

fn unit_root(d: usize) -> DyadicRectangle {
    DyadicRectangle::cube(d, DyadicInterval::unit())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_laws_hold_across_the_overflow_boundary(a in qsqrt2(), b in qsqrt2(), c in qsqrt2()) {
        prop_assert_eq!((a.clone() + b.clone()) - b.clone(), a.clone());
        prop_assert_eq!(a.clone() * (b.clone() + c.clone()), a.clone() * b.clone() + a.clone() * c.clone());
        prop_assert_eq!((a.clone() * b.clone()) * c.clone(), a.clone() * (b.clone() * c.clone()));
        if !b.is_zero() {
            prop_assert_eq!((a.clone() * b.clone()) / b.clone(), a.clone());
        }
        prop_assert_eq!(a.clone() - a.clone(), QSqrt2::zero());
        prop_assert_eq!(a.total_cmp(&b), b.total_cmp(&a).reverse());
        let text = a.to_string();
        prop_assert_eq!(text.parse::<QSqrt2>().unwrap(), a);
    }

    #[test]
    fn parseval_and_round_trip(cells in prop::collection::vec(-20i64..20, 64), d2 in any::<bool>()) {
        let (window, res) = if d2 {
            (unit_root(2), vec![3, 3])
        } else {
            (DyadicRectangle::new(vec![DyadicInterval::new(1, -1)]), vec![5])
        };
        let g = GridFunction::from_cells(window, res, cells.iter().map(|v| q(*v, 3)).collect()).unwrap();
        let c = haar_analyze(&g);
        prop_assert_eq!(&haar_synthesize(&c), &g);
        let energy = c.data().iter().fold(QSqrt2::zero(), |acc, v| acc + v.clone() * v.clone());
        prop_assert_eq!(energy, g.inner(&g).unwrap());
    }

    #[test]
    fn eigenrelation(lam in scale_param(), s in -8i32..=4, pos in -16i64..16) {
        let i = DyadicInterval::new(s, pos);
        let h = ExactFunction::haar(i);
        let want = h.scaled(&(lam.c() * lam.len_pow_one_minus_alpha(s)));
        prop_assert_eq!(riesz_apply(&lam, &h, 0).unwrap(), want);
        // |I|^{1 - alpha} = lambda^{-s}
        prop_assert_eq!(lam.len_pow_one_minus_alpha(s), lam.lambda().powi(-s));
    }

    #[test]
    fn operators_are_linear(
        lam in scale_param(),
        b in haar_function(unit_root(1), 4, 3),
        f in mixed_function(unit_root(1), 4, 3),
        g in mixed_function(unit_root(1), 4, 3),
        c in -9i64..9,
    ) {
        let c = q(c, 4);
        let fg = &f.scaled(&c) + &g;
        let r = |h: &ExactFunction| riesz_apply(&lam, h, 0).unwrap();
        prop_assert_eq!(r(&fg), &r(&f).scaled(&c) + &r(&g));
        let p = |h: &ExactFunction| para_b(&b, h).unwrap();
        prop_assert_eq!(p(&fg), &p(&f).scaled(&c) + &p(&g));
        let scales = vec![lam.clone()];
        let k = |h: &ExactFunction| commutator_direct(&b, &scales, h).unwrap();
        prop_assert_eq!(k(&fg), &k(&f).scaled(&c) + &k(&g));
        // and linear in the symbol
        let bb = b.scaled(&c);
        prop_assert_eq!(commutator_direct(&bb, &scales, &f).unwrap(), k(&f).scaled(&c));
    }

    #[test]
    fn canonical_form_is_unique(f in mixed_function(unit_root(2), 3, 6), g in mixed_function(unit_root(2), 3, 6)) {
        prop_assert_eq!(&f + &g, &g + &f);
        prop_assert!((&f - &f).is_zero());
        prop_assert_eq!(&(&f + &g) - &g, f.clone());
        // sampling agrees with pointwise evaluation on every cell
        let grid = to_grid(&f, &unit_root(2), &[3, 3]).unwrap();
        for k in 0..grid.len() {
            prop_assert_eq!(&grid.cells()[k], &f.eval(&grid.cell_point(k)));
        }
    }

    #[test]
    fn decomposition_residual_is_zero((b, f, scales) in decomposition_case()) {
        let rep = commutator_decomposed(&b, &scales, &f).unwrap();
        prop_assert!(rep.is_exact());
    }

    #[test]
    fn commutator_vanishes_below_the_symbol(
        lam in scale_param(),
        s in -3i32..=2,
        pos in -4i64..4,
        down in 1u32..4,
        offset in 0i64..8,
    ) {
        let i = DyadicInterval::new(s, pos);
        let j = DyadicInterval::new(s - down as i32, (pos << down) + offset % (1 << down));
        let out = commutator_direct(&ExactFunction::haar(i), &[lam], &ExactFunction::haar(j)).unwrap();
        prop_assert!(out.is_zero());
    }

    #[test]
    fn d_k_matches_projection_form(b in haar_function(unit_root(1), 4, 3), f in mixed_function(unit_root(1), 4, 3), k in 0u32..4) {
        prop_assert_eq!(para_d(k, &b, &f, 0).unwrap(), para_d_via_projections(k, &b, &f, 0).unwrap());
    }

    #[test]
    fn bmo_norms_are_ordered(b in haar_function(unit_root(2), 3, 5)) {
        let budget = SearchBudget::default();
        let prod = bmo_product(&b, &budget).unwrap().value;
        let rect = bmo_rect(&b).unwrap().value;
        let (haar, _) = sup_haar_ratio(&b).unwrap();
        prop_assert!(prod >= rect * (1.0 - 1e-12));
        prop_assert!(rect >= haar * (1.0 - 1e-12));
    }
}

fn random_matrix(n: usize, seed: u64) -> Matrix {
    use rand::{Rng, SeedableRng};
    let mut g = rand_pcg::Pcg32::seed_from_u64(seed);
    Matrix::new(n, (0..n * n).map(|_| g.gen_range(-1.0..1.0)).collect(), 1.0 / n as f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn opnorm_estimates(seed in any::<u64>(), c in -4.0f64..4.0, p in 1.5f64..4.0) {
        prop_assume!(c.abs() > 0.1);
        let t = random_matrix(12, seed);
        let qq = p + 1.0;
        let cfg = AscentConfig { restarts: 3, iters: 300, seed, tol: 1e-12 };
        let est = opnorm_pq(&t, p, qq, &cfg, &[]);
        // the value is the ratio at the witness, recomputed
        prop_assert!((t.ratio(&est.witness, p, qq) - est.value).abs() <= 1e-12 * est.value);
        // bit-for-bit determinism
        prop_assert_eq!(&opnorm_pq(&t, p, qq, &cfg, &[]), &est);
        // homogeneity
        let scaled = opnorm_pq(&t.scaled(c), p, qq, &cfg, &[]);
        prop_assert!((scaled.value - c.abs() * est.value).abs() <= 1e-9 * est.value);
        // more restarts never lower the value
        let more = opnorm_pq(&t, p, qq, &AscentConfig { restarts: 6, ..cfg }, &[]);
        prop_assert!(more.value >= est.value);
    }
}

#[test]
fn riesz_composition_in_two_coordinates() {
    let lam = ScaleParam::new(q(3, 4)).unwrap();
    let h = ExactFunction::haar_rect(&unit_root(2));
    let once = riesz_apply(&lam, &h, 0).unwrap();
    let twice = riesz_apply(&lam, &once, 1).unwrap();
    assert_eq!(twice, h.scaled(&QSqrt2::from_int(9)));
}

#[test]
fn indicator_mean_is_exact_at_dyadic_points() {
    let lam = ScaleParam::new(q(3, 4)).unwrap();
    let j = DyadicInterval::unit();
    let g = riesz_apply(&lam, &ExactFunction::indicator(j), 0).unwrap();
    // on J the value is (1 + c + chat) |J|^{1 - alpha} = 6
    for k in 0..8 {
        let x = DyadicPoint::new(2 * k + 1, -4);
        assert_eq!(g.eval(&[x]), QSqrt2::from_int(6));
    }
    assert_eq!(lam.c() + lam.chat() + QSqrt2::one(), QSqrt2::from_int(6));
}
