//! Exact expansion of commutators into paraproducts.
//!
//! In one coordinate, for a symbol `b` and input `f` with finite Haar
//! support,
//!
//! ```text
//! [M_b, I] f = B(b, I f) + D_0(b, I f) - I D_0(b, f) - sum_{k>=1} lambda^k D_k(b, I f)
//! ```
//!
//! The iterated commutator of tensors is the tensor product of the 1-d
//! commutators, so in `d` coordinates the families are indexed by one
//! [`Piece`] per coordinate with the product of the 1-d weights.

use std::collections::BTreeMap;
use std::fmt;

use crate::atom::{riesz_atom, Atom1D, Line};
use crate::error::{DyadicError, Result};
use crate::function::{Accumulator, DyadicFunction};
use crate::operators::{b_piece, commutator_direct, d_piece, haar_interval, line_map};
use crate::scalar::Scalar;
use crate::scale::ScaleParam;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Piece {
    /// `B(b, I f)`
    B,
    /// `D_0(b, I f)`
    D0After,
    /// `I D_0(b, f)`
    D0Before,
    /// `D_k(b, I f)`, `k >= 1`
    DAfter(u32),
}

impl Piece {
    pub fn weight<S: Scalar>(&self, lam: &ScaleParam<S>) -> S {
        match self {
            Piece::B | Piece::D0After => S::one(),
            Piece::D0Before => -S::one(),
            Piece::DAfter(k) => -lam.lambda().powi(*k as i32),
        }
    }
}

impl fmt::Display for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Piece::B => write!(f, "B(b,If)"),
            Piece::D0After => write!(f, "D0(b,If)"),
            Piece::D0Before => write!(f, "I D0(b,f)"),
            Piece::DAfter(k) => write!(f, "D{k}(b,If)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Family<S: Scalar> {
    pub pieces: Vec<Piece>,
    pub coefficient: S,
    pub value: DyadicFunction<S>,
}

impl<S: Scalar> Family<S> {
    pub fn label(&self) -> String {
        self.pieces
            .iter()
            .map(|p| p.to_string())
            .collect::<Vec<_>>()
            .join(" ⊗ ")
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionReport<S: Scalar> {
    pub families: Vec<Family<S>>,
    pub direct: DyadicFunction<S>,
    pub residual: DyadicFunction<S>,
}

impl<S: Scalar> DecompositionReport<S> {
    pub fn is_exact(&self) -> bool {
        self.residual.is_zero()
    }

    /// `sum coefficient · value`.
    pub fn total(&self) -> Result<DyadicFunction<S>> {
        let mut acc = DyadicFunction::zero(self.direct.dim());
        for fam in &self.families {
            acc = acc.try_add(&fam.value.scaled(&fam.coefficient))?;
        }
        Ok(acc)
    }
}

/// The nonzero 1-d pieces for `b_j = h_I` and one input atom.
fn pieces_1d<S: Scalar>(
    bi: &Atom1D<S>,
    fa: &Atom1D<S>,
    lam: &ScaleParam<S>,
) -> Result<Vec<(Piece, Line<S>)>> {
    let i = haar_interval(bi)?;
    let rf = riesz_atom(fa, lam)?;
    let mut out = Vec::new();
    let mut push = |p: Piece, l: Line<S>| {
        if !l.is_empty() {
            out.push((p, l));
        }
    };
    push(Piece::B, line_map(&rf, |a| b_piece(&i, a))?);
    push(Piece::D0After, line_map(&rf, |a| d_piece(0, &i, a))?);
    push(
        Piece::D0Before,
        line_map(&d_piece(0, &i, fa)?, |a| riesz_atom(a, lam))?,
    );
    let j = haar_interval(fa)?;
    if j.strictly_contains(&i) {
        let k = (j.scale - i.scale) as u32;
        push(Piece::DAfter(k), line_map(&rf, |a| d_piece(k, &i, a))?);
    }
    Ok(out)
}

pub fn commutator_decomposed<S: Scalar>(
    b: &DyadicFunction<S>,
    scales: &[ScaleParam<S>],
    f: &DyadicFunction<S>,
) -> Result<DecompositionReport<S>> {
    let direct = commutator_direct(b, scales, f)?;
    for (name, g) in [("symbol", b), ("input", f)] {
        if !g.is_haar_finite() {
            return Err(DyadicError::NotHaarFinite(format!(
                "decomposition needs a Haar-finite {name}"
            )));
        }
    }
    let d = b.dim();
    let mut fams: BTreeMap<Vec<Piece>, Accumulator<S>> = BTreeMap::new();
    for (cb, bs) in b.terms() {
        for (cf, fs) in f.terms() {
            let mut per_coord = Vec::with_capacity(d);
            for j in 0..d {
                per_coord.push(pieces_1d(&bs[j], &fs[j], &scales[j])?);
            }
            let coef = cb.clone() * cf.clone();
            // every combination of one piece per coordinate
            let mut idx = vec![0usize; d];
            if per_coord.iter().any(|p| p.is_empty()) {
                continue;
            }
            loop {
                let key: Vec<Piece> = (0..d).map(|j| per_coord[j][idx[j]].0).collect();
                let lines: Vec<Line<S>> = (0..d).map(|j| per_coord[j][idx[j]].1.clone()).collect();
                fams.entry(key)
                    .or_insert_with(|| Accumulator::new(d))
                    .add_canonicalized(coef.clone(), &lines);
                let mut j = d;
                let done = loop {
                    if j == 0 {
                        break true;
                    }
                    j -= 1;
                    idx[j] += 1;
                    if idx[j] < per_coord[j].len() {
                        break false;
                    }
                    idx[j] = 0;
                };
                if done {
                    break;
                }
            }
        }
    }
    let mut families = Vec::new();
    for (pieces, acc) in fams {
        let value = acc.finish();
        if value.is_zero() {
            continue;
        }
        let coefficient = pieces
            .iter()
            .zip(scales)
            .fold(S::one(), |c, (p, l)| c * p.weight(l));
        families.push(Family {
            pieces,
            coefficient,
            value,
        });
    }
    let mut report = DecompositionReport {
        families,
        residual: DyadicFunction::zero(d),
        direct,
    };
    report.residual = report.direct.try_sub(&report.total()?)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicInterval;
    use crate::operators::{para_d, riesz_apply};
    use crate::scalar::QSqrt2;

    type F = DyadicFunction<QSqrt2>;

    fn lam(n: i64, d: i64) -> ScaleParam<QSqrt2> {
        ScaleParam::from_ratio(n, d).unwrap()
    }

    #[test]
    fn single_pair_finer_symbol() {
        let b = F::haar(DyadicInterval::new(-1, 0));
        let f = F::haar(DyadicInterval::unit());
        let r = commutator_decomposed(&b, &[lam(3, 4)], &f).unwrap();
        assert!(r.is_exact());
        let by: BTreeMap<_, _> = r
            .families
            .iter()
            .map(|fam| (fam.pieces.clone(), fam.value.scaled(&fam.coefficient)))
            .collect();
        assert_eq!(by[&vec![Piece::B]], b.scaled(&QSqrt2::ratio(-3, 1)));
        assert_eq!(by[&vec![Piece::DAfter(1)]], b.scaled(&QSqrt2::ratio(9, 4)));
        assert_eq!(r.direct, b.scaled(&QSqrt2::ratio(-3, 4)));
    }

    #[test]
    fn same_interval_and_two_coordinates() {
        let u = DyadicInterval::unit();
        let r = commutator_decomposed(&F::haar(u), &[lam(5, 8)], &F::haar(u)).unwrap();
        assert!(r.is_exact());
        assert!(!r.direct.is_zero());

        let b = F::tensor(
            QSqrt2::ratio(2, 1),
            vec![Atom1D::Haar(DyadicInterval::new(-2, 1)), Atom1D::Haar(u)],
        );
        let f = &F::tensor(
            QSqrt2::ratio(1, 1),
            vec![Atom1D::Haar(u), Atom1D::Haar(DyadicInterval::new(-1, 1))],
        ) + &F::tensor(QSqrt2::ratio(-1, 3), vec![Atom1D::Haar(u), Atom1D::Haar(u)]);
        let r = commutator_decomposed(&b, &[lam(3, 4), lam(7, 8)], &f).unwrap();
        assert!(r.is_exact(), "residual {:?}", r.residual);
    }

    #[test]
    fn d0_family_matches_dispatch() {
        let l = lam(3, 4);
        let b = &F::haar(DyadicInterval::new(-1, 1)) + &F::haar(DyadicInterval::unit());
        let f = F::haar(DyadicInterval::new(-1, 1));
        let r = commutator_decomposed(&b, &[l.clone()], &f).unwrap();
        let fam = r.families.iter().find(|x| x.pieces == [Piece::D0After]).unwrap();
        let via = para_d(0, &b, &riesz_apply(&l, &f, 0).unwrap(), 0).unwrap();
        assert_eq!(fam.value, via);
    }

    #[test]
    fn rejects_inputs_outside_haar_span() {
        let u = DyadicInterval::unit();
        let e = commutator_decomposed(&F::haar(u), &[lam(3, 4)], &F::indicator(u));
        assert!(matches!(e, Err(DyadicError::NotHaarFinite(_))));
    }
}
