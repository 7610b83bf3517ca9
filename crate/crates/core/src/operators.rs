//! Riesz potentials, paraproducts and commutators on the atom algebra.
//!
//! Everything is evaluated on the full dyadic grid of `R^d`. Sums over the
//! Haar support of a symbol require that support to be finite; the
//! ascending parts of Riesz potentials are carried by tail atoms.

use std::collections::{BTreeMap, BTreeSet};

use crate::atom::{mass_on, mul_atoms, pair_atoms, riesz_atom, Atom1D, Line};
use crate::dyadic::DyadicInterval;
use crate::error::{DyadicError, Result};
use crate::function::{Accumulator, DyadicFunction};
use crate::scalar::Scalar;
use crate::scale::ScaleParam;

type F<S> = DyadicFunction<S>;

fn check_dims<S: Scalar>(a: &F<S>, b: &F<S>) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(DyadicError::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    Ok(())
}

pub(crate) fn haar_interval<S: Scalar>(a: &Atom1D<S>) -> Result<DyadicInterval> {
    match a {
        Atom1D::Haar(i) => Ok(*i),
        other => Err(DyadicError::NotHaarFinite(format!(
            "symbol has a {:?} factor on {}",
            other.kind(),
            other.interval()
        ))),
    }
}

/// Sums `cb · cf · ⊗_j op(j, b_j, f_j)` over all term pairs.
fn bilinear<S: Scalar>(
    b: &F<S>,
    f: &F<S>,
    mut op: impl FnMut(usize, &Atom1D<S>, &Atom1D<S>) -> Result<Line<S>>,
) -> Result<F<S>> {
    check_dims(b, f)?;
    let mut acc = Accumulator::new(b.dim());
    for (cb, bs) in b.terms() {
        'pair: for (cf, fs) in f.terms() {
            let mut lines = Vec::with_capacity(bs.len());
            for (j, (x, y)) in bs.iter().zip(fs).enumerate() {
                let l = op(j, x, y)?;
                if l.is_empty() {
                    continue 'pair;
                }
                lines.push(l);
            }
            acc.add_canonicalized(cb.clone() * cf.clone(), &lines);
        }
    }
    Ok(acc.finish())
}

pub(crate) fn line_map<S: Scalar>(
    line: &Line<S>,
    mut op: impl FnMut(&Atom1D<S>) -> Result<Line<S>>,
) -> Result<Line<S>> {
    let mut out = Vec::new();
    for (c, a) in line {
        for (c2, x) in op(a)? {
            out.push((c.clone() * c2, x));
        }
    }
    Ok(out)
}

/// `I_alpha` in coordinate `coord`.
pub fn riesz_apply<S: Scalar>(lam: &ScaleParam<S>, f: &F<S>, coord: usize) -> Result<F<S>> {
    f.map_coord(coord, |a| riesz_atom(a, lam))
}

/// One-dimensional `B(h_I, a) = |I|^{-1} <a, 1_I> h_I`.
pub(crate) fn b_piece<S: Scalar>(i: &DyadicInterval, a: &Atom1D<S>) -> Result<Line<S>> {
    let m = mass_on(a, i)?;
    if m.is_zero() {
        return Ok(Vec::new());
    }
    Ok(vec![(m / i.length::<S>(), Atom1D::Haar(*i))])
}

/// One-dimensional `D_k(h_I, a) = <a, h_{I_k}> h_I h_{I_k}`.
pub(crate) fn d_piece<S: Scalar>(k: u32, i: &DyadicInterval, a: &Atom1D<S>) -> Result<Line<S>> {
    let top = i.ancestor(k);
    let c = pair_atoms(a, &Atom1D::Haar(top))?;
    if c.is_zero() {
        return Ok(Vec::new());
    }
    Ok(if k == 0 {
        vec![(c / i.length::<S>(), Atom1D::Indicator(*i))]
    } else {
        vec![(c * top.haar_value_on::<S>(i), Atom1D::Haar(*i))]
    })
}

/// `B(b, f) = sum_R <b, h_R> |R|^{-1/2} <f, h¹_R> h_R`.
pub fn para_b<S: Scalar>(b: &F<S>, f: &F<S>) -> Result<F<S>> {
    bilinear(b, f, |_, x, y| b_piece(&haar_interval(x)?, y))
}

/// Adjoint of `f -> B(b, f)`: `sum_R <b, h_R> |R|^{-1} <g, h_R> 1_R`.
pub fn para_b_adjoint<S: Scalar>(b: &F<S>, g: &F<S>) -> Result<F<S>> {
    bilinear(b, g, |_, x, y| {
        let i = haar_interval(x)?;
        let c = pair_atoms(y, &Atom1D::Haar(i))?;
        Ok(if c.is_zero() {
            Vec::new()
        } else {
            vec![(c / i.length::<S>(), Atom1D::Indicator(i))]
        })
    })
}

/// `C(f1, f2) = sum_I |I|^{-1/2} <f1, h_I> <f2, h_I> h_I`, dimension 1 only.
/// One of the arguments must have finite Haar support.
pub fn para_c<S: Scalar>(f1: &F<S>, f2: &F<S>) -> Result<F<S>> {
    if f1.dim() != 1 {
        return Err(DyadicError::UnsupportedDimension {
            required: 1,
            got: f1.dim(),
        });
    }
    check_dims(f1, f2)?;
    let (finite, other) = if f1.is_haar_finite() {
        (f1, f2)
    } else if f2.is_haar_finite() {
        (f2, f1)
    } else {
        return Err(DyadicError::NotHaarFinite(
            "operator C needs one argument with finite Haar support".into(),
        ));
    };
    let mut acc = Accumulator::new(1);
    for (c, atoms) in finite.terms() {
        let i = haar_interval(&atoms[0])?;
        let p = haar_coeff_1d(other, &i)?;
        if p.is_zero() {
            continue;
        }
        let w = c.clone() * p * S::pow2_half(-i.scale);
        acc.add_tensor(w, &[vec![(S::one(), Atom1D::Haar(i))]]);
    }
    Ok(acc.finish())
}

/// `<g, h_I>` for a 1-d function.
fn haar_coeff_1d<S: Scalar>(g: &F<S>, i: &DyadicInterval) -> Result<S> {
    let h = Atom1D::Haar(*i);
    let mut acc = S::zero();
    for (c, atoms) in g.terms() {
        acc = acc + c.clone() * pair_atoms(&atoms[0], &h)?;
    }
    Ok(acc)
}

/// Haar projection `P_n` in coordinate `coord`.
pub fn projection<S: Scalar>(n: i32, f: &F<S>, coord: usize) -> Result<F<S>> {
    f.project(n, coord)
}

/// `D_k(b, f) = sum_n (P_n b)(P_{n+k} f)` with projections in coordinate
/// `coord` and pointwise products elsewhere, evaluated through the
/// single-sum ancestor formula.
pub fn para_d<S: Scalar>(k: u32, b: &F<S>, f: &F<S>, coord: usize) -> Result<F<S>> {
    if coord >= b.dim() {
        return Err(DyadicError::CoordinateOutOfRange {
            coord,
            dim: b.dim(),
        });
    }
    bilinear(b, f, |j, x, y| {
        if j == coord {
            d_piece(k, &haar_interval(x)?, y)
        } else {
            mul_atoms(x, y)
        }
    })
}

/// `D_k` through products of Haar projections, the defining route.
pub fn para_d_via_projections<S: Scalar>(k: u32, b: &F<S>, f: &F<S>, coord: usize) -> Result<F<S>> {
    check_dims(b, f)?;
    let mut scales = BTreeSet::new();
    for (_, atoms) in b.terms() {
        let a = atoms.get(coord).ok_or(DyadicError::CoordinateOutOfRange {
            coord,
            dim: b.dim(),
        })?;
        scales.insert(haar_interval(a)?.scale);
    }
    let mut acc = F::zero(b.dim());
    for n in scales {
        let pb = b.project(n, coord)?;
        let pf = f.project(n + k as i32, coord)?;
        acc = acc.try_add(&pb.multiply(&pf)?)?;
    }
    Ok(acc)
}

/// The block structure of a tensor paraproduct: the coordinates in
/// `b_set` carry `B`, every other coordinate `j` carries `D_{v(j)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorParaSpec {
    pub b_set: BTreeSet<usize>,
    pub shifts: BTreeMap<usize, u32>,
}

impl TensorParaSpec {
    pub fn new(b_set: impl IntoIterator<Item = usize>, shifts: impl IntoIterator<Item = (usize, u32)>) -> Self {
        TensorParaSpec {
            b_set: b_set.into_iter().collect(),
            shifts: shifts.into_iter().collect(),
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        for j in self.b_set.iter().chain(self.shifts.keys()) {
            if *j >= d {
                return Err(DyadicError::InvalidTensorSpec(format!(
                    "coordinate {j} out of range for dimension {d}"
                )));
            }
        }
        if let Some(j) = self.shifts.keys().find(|j| self.b_set.contains(j)) {
            return Err(DyadicError::InvalidTensorSpec(format!(
                "coordinate {j} has both B and a shift"
            )));
        }
        Ok(())
    }

    pub fn shift(&self, j: usize) -> u32 {
        self.shifts.get(&j).copied().unwrap_or(0)
    }

    pub fn total_shift(&self) -> u32 {
        self.shifts.values().sum()
    }
}

/// `E` as the tensor product `⊗_{j∈B} B ⊗ ⊗_{j∉B} D_{v(j)}`, extended
/// bilinearly over terms.
pub fn para_e<S: Scalar>(spec: &TensorParaSpec, b: &F<S>, f: &F<S>) -> Result<F<S>> {
    spec.validate(b.dim())?;
    bilinear(b, f, |j, x, y| {
        let i = haar_interval(x)?;
        if spec.b_set.contains(&j) {
            b_piece(&i, y)
        } else {
            d_piece(spec.shift(j), &i, y)
        }
    })
}

/// `E` in the explicit single-sum form
/// `sum_R eps_R <b, h_R> |R~|^{-1/2} <f, h^eps_{R~}> h^eps_{R~}`,
/// where `R~` enlarges the shifted sides to their ancestors, `h^eps` has
/// `h¹` on the `B` coordinates, and `eps_R` is the product of the signs of
/// `h_{R~_j}` on `R_j` over the shifted coordinates.
pub fn para_e_explicit<S: Scalar>(spec: &TensorParaSpec, b: &F<S>, f: &F<S>) -> Result<F<S>> {
    spec.validate(b.dim())?;
    bilinear(b, f, |j, x, y| {
        let i = haar_interval(x)?;
        if spec.b_set.contains(&j) {
            // |I|^{-1/2} <y, h¹_I> h¹_I = |I|^{-1} <y, 1_I> 1_I
            let m = mass_on(y, &i)?;
            Ok(if m.is_zero() {
                Vec::new()
            } else {
                vec![(m / i.length::<S>(), Atom1D::Indicator(i))]
            })
        } else {
            let v = spec.shift(j);
            let top = i.ancestor(v);
            let c = pair_atoms(y, &Atom1D::Haar(top))?;
            if c.is_zero() {
                return Ok(Vec::new());
            }
            let sign = if v > 0 && top.haar_sign_on(&i) < 0 {
                -S::one()
            } else {
                S::one()
            };
            Ok(vec![(sign * c * S::pow2_half(-top.scale), Atom1D::Haar(top))])
        }
    })
}

/// `[M_b, I_alpha] f = b I_alpha f - I_alpha (b f)` in one coordinate.
fn commutator_once<S: Scalar>(b: &F<S>, lam: &ScaleParam<S>, coord: usize, f: &F<S>) -> Result<F<S>> {
    let left = b.multiply(&riesz_apply(lam, f, coord)?)?;
    let right = riesz_apply(lam, &b.multiply(f)?, coord)?;
    left.try_sub(&right)
}

/// The iterated commutator `[...[M_b, I_{alpha_1}], ..., I_{alpha_d}] f`,
/// one Riesz potential per coordinate.
pub fn commutator_direct<S: Scalar>(b: &F<S>, scales: &[ScaleParam<S>], f: &F<S>) -> Result<F<S>> {
    check_dims(b, f)?;
    if scales.len() != b.dim() {
        return Err(DyadicError::DimensionMismatch {
            expected: b.dim(),
            got: scales.len(),
        });
    }
    // T_0 = M_b, T_j = [T_{j-1}, I_j]; expand recursively.
    fn apply_level<S: Scalar>(b: &F<S>, scales: &[ScaleParam<S>], level: usize, f: &F<S>) -> Result<F<S>> {
        if level == 0 {
            return b.multiply(f);
        }
        let j = level - 1;
        let lam = &scales[j];
        if level == 1 {
            return commutator_once(b, lam, j, f);
        }
        let a = apply_level(b, scales, level - 1, &riesz_apply(lam, f, j)?)?;
        let c = riesz_apply(lam, &apply_level(b, scales, level - 1, f)?, j)?;
        a.try_sub(&c)
    }
    apply_level(b, scales, scales.len(), f)
}

/// A linear operator on the algebra.
#[derive(Clone, Debug)]
pub enum OperatorSpec<S: Scalar> {
    Riesz { scale: ScaleParam<S>, coord: usize },
    Multiply(F<S>),
    ParaB(F<S>),
    ParaBAdjoint(F<S>),
    ParaC(F<S>),
    ParaD { k: u32, symbol: F<S>, coord: usize },
    ParaE { blocks: TensorParaSpec, symbol: F<S> },
    Commutator { symbol: F<S>, scales: Vec<ScaleParam<S>> },
    /// Applied right to left.
    Compose(Vec<OperatorSpec<S>>),
}

pub fn apply<S: Scalar>(spec: &OperatorSpec<S>, f: &F<S>) -> Result<F<S>> {
    match spec {
        OperatorSpec::Riesz { scale, coord } => riesz_apply(scale, f, *coord),
        OperatorSpec::Multiply(b) => b.multiply(f),
        OperatorSpec::ParaB(b) => para_b(b, f),
        OperatorSpec::ParaBAdjoint(b) => para_b_adjoint(b, f),
        OperatorSpec::ParaC(b) => para_c(b, f),
        OperatorSpec::ParaD { k, symbol, coord } => para_d(*k, symbol, f, *coord),
        OperatorSpec::ParaE { blocks, symbol } => para_e(blocks, symbol, f),
        OperatorSpec::Commutator { symbol, scales } => commutator_direct(symbol, scales, f),
        OperatorSpec::Compose(list) => {
            let mut g = f.clone();
            for op in list.iter().rev() {
                g = apply(op, &g)?;
            }
            Ok(g)
        }
    }
}

impl<S: Scalar> OperatorSpec<S> {
    /// Scales every symbol-dependent operator by `c` (Riesz is left as is).
    pub fn scaled_symbol(&self, c: &S) -> Self {
        match self {
            OperatorSpec::Riesz { .. } => self.clone(),
            OperatorSpec::Multiply(b) => OperatorSpec::Multiply(b.scaled(c)),
            OperatorSpec::ParaB(b) => OperatorSpec::ParaB(b.scaled(c)),
            OperatorSpec::ParaBAdjoint(b) => OperatorSpec::ParaBAdjoint(b.scaled(c)),
            OperatorSpec::ParaC(b) => OperatorSpec::ParaC(b.scaled(c)),
            OperatorSpec::ParaD { k, symbol, coord } => OperatorSpec::ParaD {
                k: *k,
                symbol: symbol.scaled(c),
                coord: *coord,
            },
            OperatorSpec::ParaE { blocks, symbol } => OperatorSpec::ParaE {
                blocks: blocks.clone(),
                symbol: symbol.scaled(c),
            },
            OperatorSpec::Commutator { symbol, scales } => OperatorSpec::Commutator {
                symbol: symbol.scaled(c),
                scales: scales.clone(),
            },
            OperatorSpec::Compose(list) => {
                OperatorSpec::Compose(list.iter().map(|o| o.scaled_symbol(c)).collect())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSqrt2;

    type Q = QSqrt2;
    type F = DyadicFunction<Q>;

    fn q(n: i64, d: i64) -> Q {
        QSqrt2::ratio(n, d)
    }

    fn iv(s: i32, p: i64) -> DyadicInterval {
        DyadicInterval::new(s, p)
    }

    fn lam34() -> ScaleParam<Q> {
        ScaleParam::from_ratio(3, 4).unwrap()
    }

    const U: DyadicInterval = DyadicInterval::unit();

    #[test]
    fn riesz_eigenrelation_examples() {
        let r = riesz_apply(&lam34(), &F::haar(U), 0).unwrap();
        assert_eq!(r, F::haar(U).scaled(&q(3, 1)));
        let r = riesz_apply(&lam34(), &F::haar(iv(-2, 0)), 0).unwrap();
        assert_eq!(r, F::haar(iv(-2, 0)).scaled(&q(27, 16)));
    }

    #[test]
    fn paraproduct_examples() {
        assert_eq!(para_b(&F::haar(U), &F::indicator(U)).unwrap(), F::haar(U));
        assert!(para_b(&F::zero(1), &F::indicator(U)).unwrap().is_zero());
        assert_eq!(para_c(&F::haar(U), &F::haar(U)).unwrap(), F::haar(U));
        assert!(para_c(&F::haar(U), &F::haar(iv(-1, 0))).unwrap().is_zero());
        let h = F::haar(iv(-1, 0));
        let c = para_c(&h.scaled(&q(2, 1)), &h.scaled(&q(3, 1))).unwrap();
        assert_eq!(c, h.scaled(&(q(6, 1) * QSqrt2::sqrt2())));
    }

    #[test]
    fn para_d_examples() {
        assert_eq!(para_d(0, &F::haar(U), &F::haar(U), 0).unwrap(), F::indicator(U));
        let h = F::haar(iv(-1, 0));
        assert_eq!(para_d(1, &h, &F::haar(U), 0).unwrap(), -h.clone());
        assert!(para_d(2, &F::haar(U), &F::haar(U), 0).unwrap().is_zero());
        for k in 0..3 {
            let b = &F::haar(iv(-2, 1)) + &F::haar(iv(-1, 0));
            let f = &F::indicator(iv(-3, 2)) + &F::haar(U);
            assert_eq!(
                para_d(k, &b, &f, 0).unwrap(),
                para_d_via_projections(k, &b, &f, 0).unwrap()
            );
        }
    }

    #[test]
    fn commutator_examples() {
        let lam = lam34();
        let b = F::haar(iv(-1, 0));
        let r = commutator_direct(&b, &[lam.clone()], &F::haar(U)).unwrap();
        assert_eq!(r, b.scaled(&q(-3, 4)));
        let r = commutator_direct(&F::haar(U), &[lam], &F::haar(iv(-1, 0))).unwrap();
        assert!(r.is_zero());
    }

    #[test]
    fn compose_riesz_in_two_coordinates() {
        let lam = lam34();
        let f = F::tensor(q(1, 1), vec![Atom1D::Haar(U), Atom1D::Haar(U)]);
        let op = OperatorSpec::Compose(vec![
            OperatorSpec::Riesz { scale: lam.clone(), coord: 0 },
            OperatorSpec::Riesz { scale: lam, coord: 1 },
        ]);
        assert_eq!(apply(&op, &f).unwrap(), f.scaled(&q(9, 1)));
        let one = OperatorSpec::Multiply(F::indicator(U));
        assert_eq!(apply(&one, &F::haar(U)).unwrap(), F::haar(U));
    }

    #[test]
    fn para_e_forms() {
        let b = F::tensor(q(1, 1), vec![Atom1D::Haar(U), Atom1D::Haar(U)]);
        let f = F::tensor(q(1, 1), vec![Atom1D::Indicator(U), Atom1D::Haar(U)]);
        let spec = TensorParaSpec::new([0], [(1, 0)]);
        assert_eq!(para_e_explicit(&spec, &b, &f).unwrap(), f);
        // the tensor form places B's output Haar in coordinate 0
        let tensor = F::tensor(q(1, 1), vec![Atom1D::Haar(U), Atom1D::Indicator(U)]);
        assert_eq!(para_e(&spec, &b, &f).unwrap(), tensor);

        let b1 = &F::haar(iv(-1, 1)) + &F::haar(iv(-2, 0)).scaled(&q(3, 1));
        let f1 = &F::indicator(iv(-1, 0)) + &F::haar(U);
        let spec_b = TensorParaSpec::new([0], []);
        assert_eq!(para_e(&spec_b, &b1, &f1).unwrap(), para_b(&b1, &f1).unwrap());
        for k in 0..3 {
            let spec_d = TensorParaSpec::new([], [(0, k)]);
            assert_eq!(para_e(&spec_d, &b1, &f1).unwrap(), para_d(k, &b1, &f1, 0).unwrap());
        }
    }

    #[test]
    fn adjoint_pairing() {
        let b = &F::haar(iv(-1, 1)) + &F::haar(U).scaled(&q(-2, 3));
        let f = &F::indicator(iv(-2, 1)) + &F::haar(iv(-1, 0));
        let g = &F::haar(U) + &F::indicator(iv(-1, 1)).scaled(&q(5, 1));
        let lhs = para_b(&b, &f).unwrap().inner_product(&g).unwrap();
        let rhs = f.inner_product(&para_b_adjoint(&b, &g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }
}
