//! One-dimensional atoms and their closed-form calculus.
//!
//! Three kinds of atom span the algebra on each coordinate:
//!
//! * `Haar(I)`: the L²-normalized Haar function `h_I`.
//! * `Indicator(I)`: `1_I`.
//! * `Tail(I, lambda)`: `tau_I = sum_{K ⊋ I} |I| |K|^{-alpha} 1_K`, the
//!   ascending part of the dyadic Riesz potential of `1_I`.
//!
//! These are linearly dependent, so every combination is reduced to a
//! canonical basis: all Haar functions, the two anchored indicators
//! `1_[0,1)`, `1_[-1,0)`, and the two anchored tails `tau_[0,1)`,
//! `tau_[-1,0)` (one pair per scale parameter). The reductions are
//!
//! ```text
//! 1_{P±}   = (1_P ± |P|^{1/2} h_P) / 2
//! tau_I    = lambda^{-s} mu 1_{I_1} + tau_{I_1} / 2      (mu = 1/(2 lambda))
//! ```
//!
//! applied upward until the interval is anchored at 0 with length at least
//! one, then downward to the anchor.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::dyadic::{DyadicInterval, DyadicPoint};
use crate::error::{DyadicError, Result};
use crate::scalar::Scalar;
use crate::scale::ScaleParam;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AtomKind {
    Haar,
    Indicator,
    AscendingTail,
}

#[derive(Clone, Debug)]
pub enum Atom1D<S> {
    Haar(DyadicInterval),
    Indicator(DyadicInterval),
    Tail(DyadicInterval, ScaleParam<S>),
}

impl<S: Scalar> Atom1D<S> {
    pub fn kind(&self) -> AtomKind {
        match self {
            Atom1D::Haar(_) => AtomKind::Haar,
            Atom1D::Indicator(_) => AtomKind::Indicator,
            Atom1D::Tail(..) => AtomKind::AscendingTail,
        }
    }

    pub fn interval(&self) -> DyadicInterval {
        match self {
            Atom1D::Haar(i) | Atom1D::Indicator(i) | Atom1D::Tail(i, _) => *i,
        }
    }

    /// Whether this atom belongs to the canonical basis.
    pub fn is_basis(&self) -> bool {
        match self {
            Atom1D::Haar(_) => true,
            Atom1D::Indicator(i) | Atom1D::Tail(i, _) => i.scale == 0 && (i.pos == 0 || i.pos == -1),
        }
    }

    /// Finest scale at which the atom has a jump.
    pub fn jump_scale(&self) -> i32 {
        match self {
            Atom1D::Haar(i) => i.scale - 1,
            Atom1D::Indicator(i) => i.scale,
            Atom1D::Tail(i, _) => i.scale + 1,
        }
    }

    /// Interval outside of which the atom has no jump finer than its own
    /// scale.
    pub fn jump_region(&self) -> DyadicInterval {
        match self {
            Atom1D::Haar(i) | Atom1D::Indicator(i) => *i,
            Atom1D::Tail(i, _) => i.parent(),
        }
    }

    pub fn eval(&self, x: &DyadicPoint) -> S {
        match self {
            Atom1D::Haar(i) => {
                if !i.contains_point(x) {
                    return S::zero();
                }
                let amp = S::pow2_half(-i.scale);
                if x.cell(i.scale - 1) & 1 == 1 {
                    amp
                } else {
                    -amp
                }
            }
            Atom1D::Indicator(i) => {
                if i.contains_point(x) {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Atom1D::Tail(i, lam) => match tail_first_level(i, x.mantissa >= 0, |a| a.contains_point(x)) {
                Some(k0) => tail_value_from(i, lam, k0),
                None => S::zero(),
            },
        }
    }
}

fn tail_first_level(
    j: &DyadicInterval,
    target_nonnegative: bool,
    contained_in: impl Fn(&DyadicInterval) -> bool,
) -> Option<u32> {
    // ancestors of j exhaust j's half-line, never the other one
    if j.is_nonnegative() != target_nonnegative {
        return None;
    }
    (1u32..).find(|&k| contained_in(&j.ancestor(k)))
}

/// `tau_J` on the shell where the first containing ancestor is `J_{k0}`:
/// `lambda^{-s} mu^{k0} / (1 - mu)`.
fn tail_value_from<S: Scalar>(j: &DyadicInterval, lam: &ScaleParam<S>, k0: u32) -> S {
    let mu = lam.mu();
    lam.len_pow_one_minus_alpha(j.scale) * mu.powi(k0 as i32) / (S::one() - mu)
}

/// Constant value of `tau_J` on an interval `i` that does not strictly
/// contain `j`.
fn tail_value_on<S: Scalar>(j: &DyadicInterval, lam: &ScaleParam<S>, i: &DyadicInterval) -> S {
    if j.contains(i) {
        return tail_value_from(j, lam, 1);
    }
    match tail_first_level(j, i.is_nonnegative(), |a| a.contains(i)) {
        Some(k0) => tail_value_from(j, lam, k0),
        None => S::zero(),
    }
}

impl<S: Scalar> PartialEq for Atom1D<S> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<S: Scalar> Eq for Atom1D<S> {}

impl<S: Scalar> PartialOrd for Atom1D<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for Atom1D<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.interval();
        let b = other.interval();
        self.kind()
            .cmp(&other.kind())
            .then(a.scale.cmp(&b.scale))
            .then(a.pos.cmp(&b.pos))
            .then_with(|| match (self, other) {
                (Atom1D::Tail(_, l1), Atom1D::Tail(_, l2)) => l1.cmp(l2),
                _ => Ordering::Equal,
            })
    }
}

/// A finite linear combination of 1-d atoms.
pub type Line<S> = Vec<(S, Atom1D<S>)>;

/// Merges like atoms and drops zero coefficients.
pub fn merge_line<S: Scalar>(line: Line<S>) -> Line<S> {
    let mut map: BTreeMap<Atom1D<S>, S> = BTreeMap::new();
    for (c, a) in line {
        match map.get_mut(&a) {
            Some(v) => *v = v.clone() + c,
            None => {
                map.insert(a, c);
            }
        }
    }
    map.into_iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(a, c)| (c, a))
        .collect()
}

/// Canonical-basis expansion of `1_I`.
pub fn canonical_indicator<S: Scalar>(i: DyadicInterval) -> Line<S> {
    let mut out: Line<S> = Vec::new();
    let mut coef = S::one();
    let mut p = i;
    let half = S::from_ratio(1, 2);
    while !p.is_anchored() {
        let q = p.parent();
        let root = S::pow2_half(q.scale);
        let h = if p.is_right_child() { root } else { -root };
        out.push((coef.clone() * half.clone() * h, Atom1D::Haar(q)));
        coef = coef * half.clone();
        p = q;
    }
    let two = S::from_int(2);
    while p.scale > 0 {
        let root = S::pow2_half(p.scale);
        // 1_P = 2 1_{child} ± |P|^{1/2} h_P, child on the anchor's side
        let (child, h) = if p.is_nonnegative() {
            (p.left(), root)
        } else {
            (p.right(), -root)
        };
        out.push((coef.clone() * h, Atom1D::Haar(p)));
        coef = coef * two.clone();
        p = child;
    }
    out.push((coef, Atom1D::Indicator(p)));
    out
}

/// Canonical-basis expansion of `tau_J`.
pub fn canonical_tail<S: Scalar>(j: DyadicInterval, lam: &ScaleParam<S>) -> Line<S> {
    let mut out: Line<S> = Vec::new();
    let mut coef = S::one();
    let mut p = j;
    let half = S::from_ratio(1, 2);
    let mu = lam.mu();
    while !p.is_anchored() {
        let q = p.parent();
        let w = coef.clone() * lam.len_pow_one_minus_alpha(p.scale) * mu.clone();
        for (c, a) in canonical_indicator::<S>(q) {
            out.push((w.clone() * c, a));
        }
        coef = coef * half.clone();
        p = q;
    }
    let two = S::from_int(2);
    while p.scale > 0 {
        let child = if p.is_nonnegative() { p.left() } else { p.right() };
        // tau_P = 2 tau_child - 2 lambda^{-(s-1)} mu 1_P
        let w = -(coef.clone() * two.clone() * lam.len_pow_one_minus_alpha(child.scale) * mu.clone());
        for (c, a) in canonical_indicator::<S>(p) {
            out.push((w.clone() * c, a));
        }
        coef = coef * two.clone();
        p = child;
    }
    out.push((coef, Atom1D::Tail(p, lam.clone())));
    merge_line(out)
}

pub fn canonical_atom<S: Scalar>(a: &Atom1D<S>) -> Line<S> {
    if a.is_basis() {
        return vec![(S::one(), a.clone())];
    }
    match a {
        Atom1D::Haar(_) => vec![(S::one(), a.clone())],
        Atom1D::Indicator(i) => canonical_indicator(*i),
        Atom1D::Tail(i, l) => canonical_tail(*i, l),
    }
}

pub fn canonical_line<S: Scalar>(line: &Line<S>) -> Line<S> {
    let mut out = Vec::new();
    for (c, a) in line {
        for (c2, b) in canonical_atom(a) {
            out.push((c.clone() * c2, b));
        }
    }
    merge_line(out)
}

/// `g · 1_I` for an atom `g`.
pub fn restrict<S: Scalar>(g: &Atom1D<S>, i: &DyadicInterval) -> Line<S> {
    match g {
        Atom1D::Haar(j) => {
            if i.contains(j) {
                vec![(S::one(), g.clone())]
            } else if j.strictly_contains(i) {
                vec![(j.haar_value_on(i), Atom1D::Indicator(*i))]
            } else {
                Vec::new()
            }
        }
        Atom1D::Indicator(j) => {
            if i.contains(j) {
                vec![(S::one(), g.clone())]
            } else if j.contains(i) {
                vec![(S::one(), Atom1D::Indicator(*i))]
            } else {
                Vec::new()
            }
        }
        Atom1D::Tail(j, lam) => {
            if i.strictly_contains(j) {
                // tau_J = sum_{k<m} w_k 1_{J_k} + (sum_{k>=m} w_k) 1_{J_m} on I = J_m
                let m = (i.scale - j.scale) as u32;
                let base = lam.len_pow_one_minus_alpha(j.scale);
                let mu = lam.mu();
                let mut out: Line<S> = (1..m)
                    .map(|k| {
                        (
                            base.clone() * mu.powi(k as i32),
                            Atom1D::Indicator(j.ancestor(k)),
                        )
                    })
                    .collect();
                out.push((tail_value_from(j, lam, m), Atom1D::Indicator(*i)));
                out
            } else {
                let v = tail_value_on(j, lam, i);
                if v.is_zero() {
                    Vec::new()
                } else {
                    vec![(v, Atom1D::Indicator(*i))]
                }
            }
        }
    }
}

/// Pointwise product of two atoms, as a (non-canonical) combination.
pub fn mul_atoms<S: Scalar>(a: &Atom1D<S>, b: &Atom1D<S>) -> Result<Line<S>> {
    match (a, b) {
        (Atom1D::Tail(..), Atom1D::Tail(..)) => Err(DyadicError::Divergent(
            "product of two ascending tails leaves the algebra".into(),
        )),
        (Atom1D::Tail(..), _) => mul_atoms(b, a),
        (Atom1D::Indicator(i), g) => Ok(restrict(g, i)),
        (Atom1D::Haar(i), g) => {
            let amp = S::pow2_half(-i.scale);
            let mut out: Line<S> = restrict(g, &i.right())
                .into_iter()
                .map(|(c, x)| (c * amp.clone(), x))
                .collect();
            out.extend(
                restrict(g, &i.left())
                    .into_iter()
                    .map(|(c, x)| (-(c * amp.clone()), x)),
            );
            Ok(out)
        }
    }
}

pub fn integrate_atom<S: Scalar>(a: &Atom1D<S>) -> Result<S> {
    match a {
        Atom1D::Haar(_) => Ok(S::zero()),
        Atom1D::Indicator(i) => Ok(i.length()),
        Atom1D::Tail(i, _) => Err(DyadicError::Divergent(format!(
            "ascending tail on {i} is not integrable"
        ))),
    }
}

/// `∫ a b`, in closed form.
pub fn pair_atoms<S: Scalar>(a: &Atom1D<S>, b: &Atom1D<S>) -> Result<S> {
    // fast paths for the pairings used most often
    match (a, b) {
        (Atom1D::Haar(i), Atom1D::Haar(j)) => {
            return Ok(if i == j { S::one() } else { S::zero() });
        }
        (Atom1D::Haar(i), Atom1D::Indicator(j)) | (Atom1D::Indicator(j), Atom1D::Haar(i)) => {
            if j.contains(i) || i.disjoint(j) {
                return Ok(S::zero());
            }
        }
        _ => {}
    }
    let mut acc = S::zero();
    for (c, x) in mul_atoms(a, b)? {
        acc = acc + c * integrate_atom(&x)?;
    }
    Ok(acc)
}

/// `∫ a 1_I`.
pub fn mass_on<S: Scalar>(a: &Atom1D<S>, i: &DyadicInterval) -> Result<S> {
    let mut acc = S::zero();
    for (c, x) in restrict(a, i) {
        acc = acc + c * integrate_atom(&x)?;
    }
    Ok(acc)
}

/// The dyadic Riesz potential of a single atom.
pub fn riesz_atom<S: Scalar>(a: &Atom1D<S>, lam: &ScaleParam<S>) -> Result<Line<S>> {
    match a {
        Atom1D::Haar(i) => Ok(vec![(
            lam.c() * lam.len_pow_one_minus_alpha(i.scale),
            a.clone(),
        )]),
        Atom1D::Indicator(i) => Ok(vec![
            (
                (S::one() + lam.c()) * lam.len_pow_one_minus_alpha(i.scale),
                a.clone(),
            ),
            (S::one(), Atom1D::Tail(*i, lam.clone())),
        ]),
        Atom1D::Tail(i, _) => Err(DyadicError::Divergent(format!(
            "Riesz potential of the ascending tail on {i}"
        ))),
    }
}

/// Dyadic intervals at scale `n` whose Haar coefficient against `a` may be
/// nonzero (at most one).
pub fn haar_candidate_at<S: Scalar>(a: &Atom1D<S>, n: i32) -> Option<DyadicInterval> {
    match a {
        Atom1D::Haar(i) => (i.scale == n).then_some(*i),
        Atom1D::Indicator(i) | Atom1D::Tail(i, _) => (n > i.scale).then(|| i.ancestor_at(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSqrt2;
    use num_traits::Zero;

    type A = Atom1D<QSqrt2>;

    fn lam34() -> ScaleParam<QSqrt2> {
        ScaleParam::from_ratio(3, 4).unwrap()
    }

    fn q(n: i64, d: i64) -> QSqrt2 {
        QSqrt2::ratio(n, d)
    }

    fn eval_line(line: &Line<QSqrt2>, x: &DyadicPoint) -> QSqrt2 {
        line.iter()
            .fold(QSqrt2::zero(), |acc, (c, a)| acc + c.clone() * a.eval(x))
    }

    fn sample_points() -> Vec<DyadicPoint> {
        (-40..40).map(|m| DyadicPoint::frac(2 * m + 1, 4)).collect()
    }

    #[test]
    fn haar_case_table() {
        let h = A::Haar(DyadicInterval::unit());
        assert_eq!(h.eval(&DyadicPoint::frac(1, 2)), q(-1, 1));
        assert_eq!(h.eval(&DyadicPoint::frac(3, 2)), q(1, 1));
        assert_eq!(h.eval(&DyadicPoint::new(1, 0)), q(0, 1));
        let h = A::Haar(DyadicInterval::new(-1, 0));
        assert_eq!(h.eval(&DyadicPoint::frac(1, 3)), -QSqrt2::sqrt2());
    }

    #[test]
    fn tail_values_by_truncated_sum() {
        // tau_[0,1) at x = 3/2 with lambda = 3/4: sum_{k>=1} (2/3)^k = 2
        let t = A::Tail(DyadicInterval::unit(), lam34());
        assert_eq!(t.eval(&DyadicPoint::frac(3, 1)), q(2, 1));
        assert_eq!(t.eval(&DyadicPoint::frac(1, 2)), q(2, 1));
        assert_eq!(t.eval(&DyadicPoint::frac(5, 1)), q(4, 3));
        assert_eq!(t.eval(&DyadicPoint::frac(-1, 1)), q(0, 1));
        // generic interval against a float truncated sum over ancestors
        let j = DyadicInterval::new(-2, 5);
        let t = Atom1D::<f64>::Tail(j, ScaleParam::from_ratio(5, 8).unwrap());
        for x in sample_points() {
            let direct: f64 = (1..200u32)
                .map(|k| j.ancestor(k))
                .filter(|k| k.contains_point(&x))
                .map(|k| 0.25 * (k.length_f64()).powf(-(1.0 + (0.625f64).log2())))
                .sum();
            assert!((t.eval(&x) - direct).abs() < 1e-12, "{x:?}");
        }
    }

    #[test]
    fn canonical_expansions_agree_pointwise() {
        let lam = lam34();
        let atoms = vec![
            A::Indicator(DyadicInterval::new(-3, 5)),
            A::Indicator(DyadicInterval::new(2, 3)),
            A::Indicator(DyadicInterval::new(-1, -7)),
            A::Indicator(DyadicInterval::new(1, 0)),
            A::Tail(DyadicInterval::new(-2, 1), lam.clone()),
            A::Tail(DyadicInterval::new(2, 0), lam.clone()),
            A::Tail(DyadicInterval::new(1, -3), lam.clone()),
            A::Tail(DyadicInterval::new(0, 6), lam),
        ];
        for a in atoms {
            let line = canonical_atom(&a);
            assert!(line.iter().all(|(_, b)| b.is_basis()));
            for x in sample_points() {
                assert_eq!(eval_line(&line, &x), a.eval(&x), "{a:?} at {x:?}");
            }
        }
    }

    #[test]
    fn products_agree_pointwise() {
        let lam = lam34();
        let ivs = [
            DyadicInterval::new(0, 0),
            DyadicInterval::new(-1, 1),
            DyadicInterval::new(-2, 0),
            DyadicInterval::new(1, 0),
            DyadicInterval::new(0, 3),
        ];
        let mut atoms = Vec::new();
        for i in ivs {
            atoms.push(A::Haar(i));
            atoms.push(A::Indicator(i));
            atoms.push(A::Tail(i, lam.clone()));
        }
        for a in &atoms {
            for b in &atoms {
                let Ok(p) = mul_atoms(a, b) else {
                    assert!(matches!((a, b), (A::Tail(..), A::Tail(..))));
                    continue;
                };
                for x in sample_points() {
                    assert_eq!(eval_line(&p, &x), a.eval(&x) * b.eval(&x), "{a:?}*{b:?} at {x:?}");
                }
            }
        }
    }

    #[test]
    fn pairing_examples() {
        let u = DyadicInterval::unit();
        assert_eq!(pair_atoms(&A::Haar(u), &A::Haar(u)).unwrap(), q(1, 1));
        assert_eq!(
            pair_atoms(&A::Haar(u), &A::Indicator(DyadicInterval::new(-1, 0))).unwrap(),
            q(-1, 2)
        );
        assert_eq!(
            pair_atoms(&A::Tail(u, lam34()), &A::Indicator(u)).unwrap(),
            q(2, 1)
        );
        assert!(pair_atoms(&A::Tail(u, lam34()), &A::Tail(u, lam34())).is_err());
    }

    #[test]
    fn riesz_of_indicator_on_interval() {
        // (1 + c + chat) = 6 at lambda = 3/4
        let line = riesz_atom(&A::Indicator(DyadicInterval::unit()), &lam34()).unwrap();
        assert_eq!(eval_line(&line, &DyadicPoint::frac(1, 2)), q(6, 1));
    }
}
