//! Finite sums of elementary tensors of [`Atom1D`]s, kept in canonical form.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::atom::{
    canonical_atom, haar_candidate_at, merge_line, mul_atoms, pair_atoms, Atom1D, Line,
};
use crate::dyadic::{DyadicInterval, DyadicPoint, DyadicRectangle};
use crate::error::{DyadicError, Result};
use crate::scalar::Scalar;
use crate::scale::ScaleParam;

/// A function on `R^d` in the closed atom algebra.
///
/// The term map is always canonical: every factor is a basis atom, like terms
/// are merged and zero coefficients dropped. Structural equality is therefore
/// equality of functions.
#[derive(Clone, PartialEq, Eq)]
pub struct DyadicFunction<S: Scalar> {
    dim: usize,
    terms: BTreeMap<Vec<Atom1D<S>>, S>,
}

impl<S: Scalar> fmt::Debug for DyadicFunction<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (atoms, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c:?})")?;
            for a in atoms {
                match a {
                    Atom1D::Haar(i) => write!(f, "·h{i:?}")?,
                    Atom1D::Indicator(i) => write!(f, "·1{i:?}")?,
                    Atom1D::Tail(i, _) => write!(f, "·tau{i:?}")?,
                }
            }
        }
        Ok(())
    }
}

impl<S: Scalar> DyadicFunction<S> {
    pub fn zero(dim: usize) -> Self {
        DyadicFunction {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Builds and canonicalizes a function from arbitrary terms.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<Atom1D<S>>)>,
    {
        let mut acc = Accumulator::new(dim);
        for (c, factors) in terms {
            if factors.len() != dim {
                return Err(DyadicError::DimensionMismatch {
                    expected: dim,
                    got: factors.len(),
                });
            }
            let lines: Vec<Line<S>> = factors.iter().map(canonical_atom).collect();
            acc.add_tensor(c, &lines);
        }
        Ok(acc.finish())
    }

    pub fn atom(a: Atom1D<S>) -> Self {
        Self::from_terms(1, [(S::one(), vec![a])]).expect("dimension 1")
    }

    pub fn haar(i: DyadicInterval) -> Self {
        Self::atom(Atom1D::Haar(i))
    }

    pub fn indicator(i: DyadicInterval) -> Self {
        Self::atom(Atom1D::Indicator(i))
    }

    pub fn tail(i: DyadicInterval, lam: ScaleParam<S>) -> Self {
        Self::atom(Atom1D::Tail(i, lam))
    }

    /// The elementary tensor `c · a_1 ⊗ ... ⊗ a_d`.
    pub fn tensor(c: S, factors: Vec<Atom1D<S>>) -> Self {
        let d = factors.len();
        Self::from_terms(d, [(c, factors)]).expect("dimension matches factor count")
    }

    /// `h_R` for a rectangle.
    pub fn haar_rect(r: &DyadicRectangle) -> Self {
        Self::tensor(S::one(), r.sides.iter().map(|i| Atom1D::Haar(*i)).collect())
    }

    pub fn indicator_rect(r: &DyadicRectangle) -> Self {
        Self::tensor(
            S::one(),
            r.sides.iter().map(|i| Atom1D::Indicator(*i)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&S, &[Atom1D<S>])> {
        self.terms.iter().map(|(a, c)| (c, a.as_slice()))
    }

    /// Coefficient of a canonical basis tensor.
    pub fn coefficient(&self, factors: &[Atom1D<S>]) -> S {
        self.terms.get(factors).cloned().unwrap_or_else(S::zero)
    }

    pub fn scaled(&self, c: &S) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        DyadicFunction {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(a, v)| (a.clone(), v.clone() * c.clone()))
                .collect(),
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(DyadicError::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut terms = self.terms.clone();
        for (a, c) in &other.terms {
            accumulate(&mut terms, a.clone(), c.clone());
        }
        Ok(DyadicFunction {
            dim: self.dim,
            terms,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&-other.clone())
    }

    pub fn eval(&self, x: &[DyadicPoint]) -> S {
        assert_eq!(x.len(), self.dim, "point dimension");
        self.terms.iter().fold(S::zero(), |acc, (atoms, c)| {
            let mut v = c.clone();
            for (a, p) in atoms.iter().zip(x) {
                if v.is_zero() {
                    break;
                }
                v = v * a.eval(p);
            }
            acc + v
        })
    }

    /// Pointwise product.
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut acc = Accumulator::new(self.dim);
        for (a, ca) in &self.terms {
            'pair: for (b, cb) in &other.terms {
                let mut lines = Vec::with_capacity(self.dim);
                for (x, y) in a.iter().zip(b) {
                    let l = mul_atoms(x, y)?;
                    if l.is_empty() {
                        continue 'pair;
                    }
                    lines.push(l);
                }
                acc.add_canonicalized(ca.clone() * cb.clone(), &lines);
            }
        }
        Ok(acc.finish())
    }

    /// `∫ f g`, exact.
    pub fn inner_product(&self, other: &Self) -> Result<S> {
        self.check_dim(other)?;
        let mut acc = S::zero();
        for (a, ca) in &self.terms {
            'pair: for (b, cb) in &other.terms {
                let mut v = ca.clone() * cb.clone();
                for (x, y) in a.iter().zip(b) {
                    let p = pair_atoms(x, y)?;
                    if p.is_zero() {
                        continue 'pair;
                    }
                    v = v * p;
                }
                acc = acc + v;
            }
        }
        Ok(acc)
    }

    /// Applies a linear map acting on coordinate `coord` only.
    pub fn map_coord<F>(&self, coord: usize, mut op: F) -> Result<Self>
    where
        F: FnMut(&Atom1D<S>) -> Result<Line<S>>,
    {
        if coord >= self.dim {
            return Err(DyadicError::CoordinateOutOfRange {
                coord,
                dim: self.dim,
            });
        }
        let mut acc = Accumulator::new(self.dim);
        for (atoms, c) in &self.terms {
            let image = op(&atoms[coord])?;
            if image.is_empty() {
                continue;
            }
            let mut lines: Vec<Line<S>> = atoms
                .iter()
                .map(|a| vec![(S::one(), a.clone())])
                .collect();
            lines[coord] = image;
            acc.add_canonicalized(c.clone(), &lines);
        }
        Ok(acc.finish())
    }

    /// True when every factor of every term is a Haar function.
    pub fn is_haar_finite(&self) -> bool {
        self.terms
            .keys()
            .all(|atoms| atoms.iter().all(|a| matches!(a, Atom1D::Haar(_))))
    }

    /// `(R, <f, h_R>)` for a finite Haar combination.
    pub fn haar_coefficients(&self) -> Result<Vec<(DyadicRectangle, S)>> {
        let mut out = Vec::with_capacity(self.terms.len());
        for (atoms, c) in &self.terms {
            let mut sides = Vec::with_capacity(self.dim);
            for a in atoms {
                match a {
                    Atom1D::Haar(i) => sides.push(*i),
                    other => {
                        return Err(DyadicError::NotHaarFinite(format!(
                            "term contains a {:?} atom",
                            other.kind()
                        )))
                    }
                }
            }
            out.push((DyadicRectangle::new(sides), c.clone()));
        }
        Ok(out)
    }

    /// Haar projection `P_n` in coordinate `coord`.
    pub fn project(&self, n: i32, coord: usize) -> Result<Self> {
        self.map_coord(coord, |a| {
            Ok(match haar_candidate_at(a, n) {
                Some(i) => {
                    let c = pair_atoms(a, &Atom1D::Haar(i))?;
                    if c.is_zero() {
                        Vec::new()
                    } else {
                        vec![(c, Atom1D::Haar(i))]
                    }
                }
                None => Vec::new(),
            })
        })
    }

    /// Converts coefficients to another scalar type.
    pub fn convert<T: Scalar>(&self, conv: impl Fn(&S) -> T) -> DyadicFunction<T> {
        let mut terms = BTreeMap::new();
        for (atoms, c) in &self.terms {
            let atoms: Vec<Atom1D<T>> = atoms
                .iter()
                .map(|a| match a {
                    Atom1D::Haar(i) => Atom1D::Haar(*i),
                    Atom1D::Indicator(i) => Atom1D::Indicator(*i),
                    Atom1D::Tail(i, l) => Atom1D::Tail(
                        *i,
                        ScaleParam::new(conv(l.lambda())).expect("lambda stays in range"),
                    ),
                })
                .collect();
            accumulate(&mut terms, atoms, conv(c));
        }
        DyadicFunction {
            dim: self.dim,
            terms,
        }
    }

    pub fn to_f64(&self) -> DyadicFunction<f64> {
        self.convert(|c| c.to_f64())
    }
}

fn accumulate<S: Scalar>(terms: &mut BTreeMap<Vec<Atom1D<S>>, S>, key: Vec<Atom1D<S>>, c: S) {
    if c.is_zero() {
        return;
    }
    match terms.get_mut(&key) {
        Some(v) => {
            let nv = v.clone() + c;
            if nv.is_zero() {
                terms.remove(&key);
            } else {
                *v = nv;
            }
        }
        None => {
            terms.insert(key, c);
        }
    }
}

/// Collects tensor-product terms into canonical form.
pub(crate) struct Accumulator<S: Scalar> {
    dim: usize,
    terms: BTreeMap<Vec<Atom1D<S>>, S>,
}

impl<S: Scalar> Accumulator<S> {
    pub(crate) fn new(dim: usize) -> Self {
        Accumulator {
            dim,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `c · ⊗ lines[j]`, where each line is already canonical.
    pub(crate) fn add_tensor(&mut self, c: S, lines: &[Line<S>]) {
        debug_assert_eq!(lines.len(), self.dim);
        if c.is_zero() || lines.iter().any(|l| l.is_empty()) {
            return;
        }
        let mut idx = vec![0usize; lines.len()];
        loop {
            let mut coef = c.clone();
            let mut key = Vec::with_capacity(lines.len());
            for (j, &k) in idx.iter().enumerate() {
                coef = coef * lines[j][k].0.clone();
                key.push(lines[j][k].1.clone());
            }
            accumulate(&mut self.terms, key, coef);
            // odometer
            let mut j = lines.len();
            loop {
                if j == 0 {
                    return;
                }
                j -= 1;
                idx[j] += 1;
                if idx[j] < lines[j].len() {
                    break;
                }
                idx[j] = 0;
            }
        }
    }

    /// Adds `c · ⊗ lines[j]` for arbitrary (non-canonical) lines.
    pub(crate) fn add_canonicalized(&mut self, c: S, lines: &[Line<S>]) {
        let canon: Vec<Line<S>> = lines
            .iter()
            .map(|l| {
                let mut out = Vec::new();
                for (k, a) in l {
                    for (k2, b) in canonical_atom(a) {
                        out.push((k.clone() * k2, b));
                    }
                }
                merge_line(out)
            })
            .collect();
        self.add_tensor(c, &canon);
    }

    pub(crate) fn finish(self) -> DyadicFunction<S> {
        DyadicFunction {
            dim: self.dim,
            terms: self.terms,
        }
    }
}

impl<S: Scalar> Neg for DyadicFunction<S> {
    type Output = DyadicFunction<S>;
    fn neg(self) -> Self {
        DyadicFunction {
            dim: self.dim,
            terms: self.terms.into_iter().map(|(a, c)| (a, -c)).collect(),
        }
    }
}

impl<'a, S: Scalar> Add for &'a DyadicFunction<S> {
    type Output = DyadicFunction<S>;
    /// Panics on dimension mismatch; use [`DyadicFunction::try_add`] otherwise.
    fn add(self, rhs: Self) -> DyadicFunction<S> {
        self.try_add(rhs).expect("dimension mismatch in +")
    }
}

impl<'a, S: Scalar> Sub for &'a DyadicFunction<S> {
    type Output = DyadicFunction<S>;
    fn sub(self, rhs: Self) -> DyadicFunction<S> {
        self.try_sub(rhs).expect("dimension mismatch in -")
    }
}
