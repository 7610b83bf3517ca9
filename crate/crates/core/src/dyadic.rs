//! Dyadic intervals, rectangles and points.
//!
//! An interval is stored as `(scale, pos)` and denotes
//! `[pos * 2^scale, (pos + 1) * 2^scale)`. All intervals are half-open, so
//! point membership is total.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub scale: i32,
    pub pos: i64,
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "D({},{})", self.scale, self.pos)
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (l, r) = self.endpoints();
        write!(f, "[{}, {})", fmt_rat(&l), fmt_rat(&r))
    }
}

fn fmt_rat(r: &BigRational) -> String {
    crate::scalar::format_rational(r)
}

impl DyadicInterval {
    pub const fn new(scale: i32, pos: i64) -> Self {
        DyadicInterval { scale, pos }
    }

    /// `[0, 1)`
    pub const fn unit() -> Self {
        DyadicInterval { scale: 0, pos: 0 }
    }

    pub fn endpoints(&self) -> (BigRational, BigRational) {
        let len = pow2_rational(self.scale);
        let left = BigRational::from_integer(BigInt::from(self.pos)) * &len;
        let right = &left + &len;
        (left, right)
    }

    /// `|I|` as an exact scalar.
    pub fn length<S: Scalar>(&self) -> S {
        S::from_int(2).powi(self.scale)
    }

    pub fn length_f64(&self) -> f64 {
        (self.scale as f64).exp2()
    }

    pub fn parent(&self) -> Self {
        self.ancestor(1)
    }

    /// The unique dyadic interval containing `self` with length `2^k |self|`.
    pub fn ancestor(&self, k: u32) -> Self {
        DyadicInterval {
            scale: self.scale + k as i32,
            pos: self.pos >> k.min(63),
        }
    }

    /// The ancestor at absolute scale `s >= self.scale`.
    pub fn ancestor_at(&self, s: i32) -> Self {
        debug_assert!(s >= self.scale);
        self.ancestor((s - self.scale) as u32)
    }

    pub fn left(&self) -> Self {
        DyadicInterval {
            scale: self.scale - 1,
            pos: self.pos * 2,
        }
    }

    pub fn right(&self) -> Self {
        DyadicInterval {
            scale: self.scale - 1,
            pos: self.pos * 2 + 1,
        }
    }

    pub fn is_right_child(&self) -> bool {
        self.pos & 1 == 1
    }

    /// `other ⊆ self`
    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.scale <= self.scale && other.ancestor_at(self.scale) == *self
    }

    pub fn strictly_contains(&self, other: &DyadicInterval) -> bool {
        other.scale < self.scale && self.contains(other)
    }

    pub fn disjoint(&self, other: &DyadicInterval) -> bool {
        !self.contains(other) && !other.contains(self)
    }

    pub fn contains_point(&self, x: &DyadicPoint) -> bool {
        x.cell(self.scale) == self.pos
    }

    /// Whether the interval lies in `[0, inf)` (otherwise in `(-inf, 0)`).
    pub fn is_nonnegative(&self) -> bool {
        self.pos >= 0
    }

    /// The interval `[0,1)` or `[-1,0)` on the same half-line.
    pub fn anchor(&self) -> Self {
        DyadicInterval {
            scale: 0,
            pos: if self.is_nonnegative() { 0 } else { -1 },
        }
    }

    /// Whether the interval has one endpoint at 0 and length at least 1.
    pub fn is_anchored(&self) -> bool {
        self.scale >= 0 && (self.pos == 0 || self.pos == -1)
    }

    /// The smallest dyadic interval containing both, if they lie on the
    /// same half-line.
    pub fn join(&self, other: &DyadicInterval) -> Option<Self> {
        if self.is_nonnegative() != other.is_nonnegative() {
            return None;
        }
        let mut s = self.scale.max(other.scale);
        loop {
            let a = self.ancestor_at(s);
            if a == other.ancestor_at(s) {
                return Some(a);
            }
            s += 1;
        }
    }

    /// Value of `h_self` on the sub-interval `inner` (which must lie in one
    /// half): `±|self|^{-1/2}`.
    pub fn haar_value_on<S: Scalar>(&self, inner: &DyadicInterval) -> S {
        debug_assert!(self.strictly_contains(inner));
        let half = inner.ancestor_at(self.scale - 1);
        let amp = S::pow2_half(-self.scale);
        if half.is_right_child() {
            amp
        } else {
            -amp
        }
    }

    /// `sgn h_self(inner)` for `inner ⊊ self`.
    pub fn haar_sign_on(&self, inner: &DyadicInterval) -> i8 {
        if inner.ancestor_at(self.scale - 1).is_right_child() {
            1
        } else {
            -1
        }
    }

    /// All dyadic sub-intervals at scale `s` (`s <= self.scale`), in order.
    pub fn descendants_at(&self, s: i32) -> impl Iterator<Item = DyadicInterval> {
        let k = (self.scale - s) as u32;
        let first = self.pos << k;
        (0..(1i64 << k)).map(move |i| DyadicInterval::new(s, first + i))
    }
}

pub fn pow2_rational(k: i32) -> BigRational {
    let two = BigInt::from(2);
    if k >= 0 {
        BigRational::from_integer(two.pow(k as u32))
    } else {
        BigRational::new(BigInt::one(), two.pow((-k) as u32))
    }
}

/// A point `mantissa * 2^exp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicPoint {
    pub mantissa: i64,
    pub exp: i32,
}

impl DyadicPoint {
    pub const fn new(mantissa: i64, exp: i32) -> Self {
        DyadicPoint { mantissa, exp }
    }

    /// `num / 2^k`
    pub const fn frac(num: i64, k: i32) -> Self {
        DyadicPoint {
            mantissa: num,
            exp: -k,
        }
    }

    /// Index of the scale-`s` dyadic interval containing the point.
    pub fn cell(&self, s: i32) -> i64 {
        let m = self.mantissa as i128;
        let shifted = if self.exp >= s {
            m << (self.exp - s) as u32
        } else {
            let sh = (s - self.exp) as u32;
            if sh >= 127 {
                if m < 0 {
                    -1
                } else {
                    0
                }
            } else {
                m >> sh
            }
        };
        shifted as i64
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.mantissa)) * pow2_rational(self.exp)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }
}

/// A dyadic rectangle: one interval per coordinate.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct DyadicRectangle {
    pub sides: Vec<DyadicInterval>,
}

impl DyadicRectangle {
    pub fn new(sides: Vec<DyadicInterval>) -> Self {
        assert!(!sides.is_empty(), "rectangle needs at least one side");
        DyadicRectangle { sides }
    }

    pub fn cube(d: usize, side: DyadicInterval) -> Self {
        DyadicRectangle {
            sides: vec![side; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.sides.len()
    }

    pub fn volume<S: Scalar>(&self) -> S {
        S::from_int(2).powi(self.sides.iter().map(|i| i.scale).sum())
    }

    pub fn log2_volume(&self) -> i32 {
        self.sides.iter().map(|i| i.scale).sum()
    }

    pub fn contains(&self, other: &DyadicRectangle) -> bool {
        self.sides
            .iter()
            .zip(&other.sides)
            .all(|(a, b)| a.contains(b))
    }

    pub fn contains_point(&self, x: &[DyadicPoint]) -> bool {
        self.sides.iter().zip(x).all(|(i, p)| i.contains_point(p))
    }
}

impl fmt::Display for DyadicRectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, s) in self.sides.iter().enumerate() {
            if n > 0 {
                write!(f, "x")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ancestor_examples() {
        // [1/4,1/2) -> [0,1/2)
        assert_eq!(DyadicInterval::new(-2, 1).ancestor(1), DyadicInterval::new(-1, 0));
        assert_eq!(DyadicInterval::unit().ancestor(0), DyadicInterval::unit());
        // [3/4,1) two levels up is [0,1); brute force over every scale-0 candidate
        let i = DyadicInterval::new(-2, 3);
        let found: Vec<_> = (-4..4)
            .map(|p| DyadicInterval::new(0, p))
            .filter(|c| {
                let (cl, cr) = c.endpoints();
                let (il, ir) = i.endpoints();
                cl <= il && ir <= cr
            })
            .collect();
        assert_eq!(found, vec![i.ancestor(2)]);
        assert_eq!(i.ancestor(2), DyadicInterval::unit());
    }

    #[test]
    fn negative_positions_use_floor() {
        let i = DyadicInterval::new(-1, -1); // [-1/2, 0)
        assert_eq!(i.parent(), DyadicInterval::new(0, -1));
        assert!(DyadicInterval::new(0, -1).contains(&i));
        assert!(!DyadicInterval::unit().contains(&i));
        assert_eq!(DyadicPoint::frac(-1, 3).cell(0), -1);
        assert_eq!(DyadicPoint::frac(3, 2).cell(-1), 1);
    }

    #[test]
    fn nested_or_disjoint() {
        let all: Vec<_> = (-3..=1)
            .flat_map(|s| (-4..4).map(move |p| DyadicInterval::new(s, p)))
            .collect();
        for a in &all {
            for b in &all {
                let (al, ar) = a.endpoints();
                let (bl, br) = b.endpoints();
                let overlap = al < br && bl < ar;
                assert_eq!(overlap, a.contains(b) || b.contains(a), "{a} {b}");
                if a.strictly_contains(b) {
                    assert!(a.left().contains(b) || a.right().contains(b));
                }
            }
        }
    }

    #[test]
    fn join_and_anchor() {
        let a = DyadicInterval::new(-2, 1);
        let b = DyadicInterval::new(-1, 1);
        assert_eq!(a.join(&b), Some(DyadicInterval::unit()));
        assert_eq!(a.join(&DyadicInterval::new(0, -1)), None);
        assert_eq!(DyadicInterval::new(3, -2).anchor(), DyadicInterval::new(0, -1));
    }
}
