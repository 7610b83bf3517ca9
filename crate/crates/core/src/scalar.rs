//! Scalar types.
//!
//! Every Haar amplitude `|I|^{-1/2}` on a dyadic interval is a power of
//! `2^{1/2}`, so the smallest field closed under all the operations of this
//! crate (for a rational scale parameter) is `Q(sqrt 2)`. [`QSqrt2`] is that
//! field with arbitrary-precision rational components; `f64` is the float
//! path used by the oracles and by irrational scale parameters.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, One, Signed, ToPrimitive, Zero};

/// Field operations needed by the dyadic algebra.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + AddAssign
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_rational(r: &BigRational) -> Self;

    fn sqrt2() -> Self;

    fn to_f64(&self) -> f64;

    /// Total order used for canonical sorting and for sup searches.
    fn total_cmp(&self, other: &Self) -> Ordering;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    fn abs(&self) -> Self {
        if self.total_cmp(&Self::zero()) == Ordering::Less {
            -self.clone()
        } else {
            self.clone()
        }
    }

    /// Integer power, negative exponents allowed (panics on `0^{-n}`).
    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut e = n.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            e >>= 1;
        }
        acc
    }

    /// `2^{k/2}`.
    fn pow2_half(k: i32) -> Self {
        let whole = Self::from_int(2).powi(k.div_euclid(2));
        if k.rem_euclid(2) == 1 {
            whole * Self::sqrt2()
        } else {
            whole
        }
    }
}

impl Scalar for f64 {
    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn sqrt2() -> Self {
        std::f64::consts::SQRT_2
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn pow2_half(k: i32) -> Self {
        (k as f64 * 0.5).exp2()
    }
}

/// A rational held as `Ratio<i64>` while it fits and promoted to
/// `BigRational` when a checked operation overflows. Values are kept in the
/// smallest form, so derived equality and hashing are exact.
#[derive(Clone, PartialEq, Eq, Hash)]
enum Rat {
    Small(Ratio<i64>),
    Big(BigRational),
}

impl Rat {
    fn zero() -> Rat {
        Rat::Small(Ratio::zero())
    }

    fn from_big(r: BigRational) -> Rat {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) if n != i64::MIN => Rat::Small(Ratio::new_raw(n, d)),
            _ => Rat::Big(r),
        }
    }

    fn to_big(&self) -> BigRational {
        match self {
            Rat::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Rat::Big(r) => r.clone(),
        }
    }

    fn is_zero(&self) -> bool {
        match self {
            Rat::Small(r) => r.is_zero(),
            Rat::Big(r) => r.is_zero(),
        }
    }

    fn sign(&self) -> i8 {
        match self {
            Rat::Small(r) => r.numer().signum() as i8,
            Rat::Big(r) => sign_of(r),
        }
    }

    fn to_f64(&self) -> f64 {
        match self {
            Rat::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Rat::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn op(
        &self,
        rhs: &Rat,
        small: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Rat {
        if let (Rat::Small(a), Rat::Small(b)) = (self, rhs) {
            if let Some(r) = small(a, b) {
                if *r.numer() != i64::MIN {
                    return Rat::Small(r);
                }
            }
        }
        Rat::from_big(big(self.to_big(), rhs.to_big()))
    }

    fn add(&self, rhs: &Rat) -> Rat {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        self.op(rhs, |a, b| a.checked_add(b), |a, b| a + b)
    }

    fn sub(&self, rhs: &Rat) -> Rat {
        self.add(&rhs.neg())
    }

    fn mul(&self, rhs: &Rat) -> Rat {
        if self.is_zero() || rhs.is_zero() {
            return Rat::zero();
        }
        self.op(rhs, |a, b| a.checked_mul(b), |a, b| a * b)
    }

    fn div(&self, rhs: &Rat) -> Rat {
        self.op(rhs, |a, b| a.checked_div(b), |a, b| a / b)
    }

    fn neg(&self) -> Rat {
        match self {
            Rat::Small(r) => Rat::Small(-r),
            Rat::Big(r) => Rat::Big(-r),
        }
    }
}

/// An element `a + b·sqrt(2)` with `a, b` rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QSqrt2 {
    rational: Rat,
    surd: Rat,
}

impl QSqrt2 {
    pub fn new(rational: BigRational, surd: BigRational) -> Self {
        QSqrt2 {
            rational: Rat::from_big(rational),
            surd: Rat::from_big(surd),
        }
    }

    pub fn rational(r: BigRational) -> Self {
        QSqrt2 {
            rational: Rat::from_big(r),
            surd: Rat::zero(),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        <Self as Scalar>::from_ratio(num, den)
    }

    /// The rational part `a` of `a + b·sqrt(2)`.
    pub fn rational_part(&self) -> BigRational {
        self.rational.to_big()
    }

    /// The coefficient `b` of `sqrt(2)`.
    pub fn surd_part(&self) -> BigRational {
        self.surd.to_big()
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    /// The Galois conjugate `a - b·sqrt(2)`.
    pub fn conjugate(&self) -> Self {
        QSqrt2 {
            rational: self.rational.clone(),
            surd: self.surd.neg(),
        }
    }

    /// The field norm `a^2 - 2 b^2`.
    pub fn norm(&self) -> BigRational {
        self.norm_rat().to_big()
    }

    fn norm_rat(&self) -> Rat {
        let two = Rat::Small(Ratio::from_integer(2));
        self.rational
            .mul(&self.rational)
            .sub(&two.mul(&self.surd).mul(&self.surd))
    }

    pub fn signum(&self) -> i8 {
        let sa = self.rational.sign();
        let sb = self.surd.sign();
        if sb == 0 {
            return sa;
        }
        if sa == 0 || sa == sb {
            return sb;
        }
        // opposite signs: compare a^2 with 2 b^2
        match self.norm_rat().sign() {
            1 => sa,
            -1 => sb,
            _ => 0,
        }
    }
}

fn sign_of(r: &BigRational) -> i8 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

impl fmt::Debug for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rat::Small(r) => write!(f, "{r}"),
            Rat::Big(r) => write!(f, "{r}"),
        }
    }
}

impl fmt::Display for QSqrt2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd.is_zero() {
            write!(f, "{}", self.rational)
        } else if self.rational.is_zero() {
            write!(f, "{}*sqrt2", self.surd)
        } else {
            write!(f, "{} + {}*sqrt2", self.rational, self.surd)
        }
    }
}

impl Zero for QSqrt2 {
    fn zero() -> Self {
        QSqrt2 {
            rational: Rat::zero(),
            surd: Rat::zero(),
        }
    }
    fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.surd.is_zero()
    }
}

impl One for QSqrt2 {
    fn one() -> Self {
        QSqrt2 {
            rational: Rat::Small(Ratio::one()),
            surd: Rat::zero(),
        }
    }
}

impl Add for QSqrt2 {
    type Output = QSqrt2;
    fn add(self, rhs: QSqrt2) -> QSqrt2 {
        QSqrt2 {
            rational: self.rational.add(&rhs.rational),
            surd: self.surd.add(&rhs.surd),
        }
    }
}

impl AddAssign for QSqrt2 {
    fn add_assign(&mut self, rhs: QSqrt2) {
        self.rational = self.rational.add(&rhs.rational);
        if !rhs.surd.is_zero() {
            self.surd = self.surd.add(&rhs.surd);
        }
    }
}

impl Sub for QSqrt2 {
    type Output = QSqrt2;
    fn sub(self, rhs: QSqrt2) -> QSqrt2 {
        QSqrt2 {
            rational: self.rational.sub(&rhs.rational),
            surd: self.surd.sub(&rhs.surd),
        }
    }
}

impl SubAssign for QSqrt2 {
    fn sub_assign(&mut self, rhs: QSqrt2) {
        self.rational = self.rational.sub(&rhs.rational);
        if !rhs.surd.is_zero() {
            self.surd = self.surd.sub(&rhs.surd);
        }
    }
}

impl Mul for QSqrt2 {
    type Output = QSqrt2;
    fn mul(self, rhs: QSqrt2) -> QSqrt2 {
        if self.surd.is_zero() && rhs.surd.is_zero() {
            return QSqrt2 {
                rational: self.rational.mul(&rhs.rational),
                surd: Rat::zero(),
            };
        }
        let two = Rat::Small(Ratio::from_integer(2));
        QSqrt2 {
            rational: self
                .rational
                .mul(&rhs.rational)
                .add(&two.mul(&self.surd).mul(&rhs.surd)),
            surd: self.rational.mul(&rhs.surd).add(&self.surd.mul(&rhs.rational)),
        }
    }
}

impl MulAssign for QSqrt2 {
    fn mul_assign(&mut self, rhs: QSqrt2) {
        *self = self.clone() * rhs;
    }
}

impl Div for QSqrt2 {
    type Output = QSqrt2;
    fn div(self, rhs: QSqrt2) -> QSqrt2 {
        assert!(!rhs.is_zero(), "division by zero in Q(sqrt2)");
        if rhs.surd.is_zero() {
            return QSqrt2 {
                rational: self.rational.div(&rhs.rational),
                surd: self.surd.div(&rhs.rational),
            };
        }
        let n = rhs.norm_rat();
        let num = self * rhs.conjugate();
        QSqrt2 {
            rational: num.rational.div(&n),
            surd: num.surd.div(&n),
        }
    }
}

impl Neg for QSqrt2 {
    type Output = QSqrt2;
    fn neg(self) -> QSqrt2 {
        QSqrt2 {
            rational: self.rational.neg(),
            surd: self.surd.neg(),
        }
    }
}

impl PartialOrd for QSqrt2 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(Scalar::total_cmp(self, other))
    }
}

impl Scalar for QSqrt2 {
    fn from_rational(r: &BigRational) -> Self {
        QSqrt2::rational(r.clone())
    }

    fn sqrt2() -> Self {
        QSqrt2 {
            rational: Rat::zero(),
            surd: Rat::Small(Ratio::one()),
        }
    }

    fn to_f64(&self) -> f64 {
        self.rational.to_f64() + self.surd.to_f64() * std::f64::consts::SQRT_2
    }

    fn total_cmp(&self, other: &Self) -> Ordering {
        match (self.clone() - other.clone()).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        match (num.checked_neg(), den.checked_neg()) {
            (Some(_), Some(_)) => QSqrt2 {
                rational: Rat::Small(Ratio::new(num, den)),
                surd: Rat::zero(),
            },
            _ => QSqrt2::rational(BigRational::new(num.into(), den.into())),
        }
    }

    fn pow2_half(k: i32) -> Self {
        let e = k.div_euclid(2);
        let whole = if e.abs() < 62 {
            Rat::Small(if e >= 0 {
                Ratio::from_integer(1i64 << e)
            } else {
                Ratio::new_raw(1, 1i64 << -e)
            })
        } else {
            Rat::from_big(BigRational::from_integer(2.into()).pow(e))
        };
        if k.rem_euclid(2) == 1 {
            QSqrt2 {
                rational: Rat::zero(),
                surd: whole,
            }
        } else {
            QSqrt2 {
                rational: whole,
                surd: Rat::zero(),
            }
        }
    }

    fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self.clone()
        } else {
            self.clone()
        }
    }
}

/// Parses `"n"` or `"n/d"` into a rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(BigRational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Formats a rational as `"n/d"` (or `"n"` for integers).
pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl std::str::FromStr for QSqrt2 {
    type Err = String;

    /// Accepts `"r"`, `"s*sqrt2"` and `"r + s*sqrt2"` with rationals written
    /// `"n/d"`, as produced by `Display`.
    fn from_str(text: &str) -> std::result::Result<Self, String> {
        let bad = || format!("not a number in Q(sqrt2): {text:?}");
        let surd_part = |t: &str| -> Option<BigRational> {
            let t = t.trim();
            if t == "sqrt2" {
                return Some(BigRational::one());
            }
            parse_rational(t.strip_suffix("*sqrt2")?)
        };
        let t = text.trim();
        let (r, s) = match t.split_once(" + ") {
            Some((a, b)) => (parse_rational(a).ok_or_else(bad)?, surd_part(b).ok_or_else(bad)?),
            None if t.ends_with("sqrt2") => (BigRational::zero(), surd_part(t).ok_or_else(bad)?),
            None => (parse_rational(t).ok_or_else(bad)?, BigRational::zero()),
        };
        Ok(QSqrt2::new(r, s))
    }
}
