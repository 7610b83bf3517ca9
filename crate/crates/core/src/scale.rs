//! The scale parameter `lambda = 2^{alpha - 1}` of the dyadic Riesz potential.
//!
//! Working with `lambda` instead of `alpha` keeps every power of a dyadic
//! length exact: for `|I| = 2^s`, `|I|^{1-alpha} = lambda^{-s}` and
//! `|I|^{-alpha} = (2 lambda)^{-s}`.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;

use crate::error::{DyadicError, Result};
use crate::scalar::{format_rational, Scalar};

#[derive(Clone)]
pub struct ScaleParam<S> {
    lambda: S,
}

impl<S: Scalar> ScaleParam<S> {
    pub fn new(lambda: S) -> Result<Self> {
        let half = S::from_ratio(1, 2);
        if lambda.total_cmp(&half) != Ordering::Greater || lambda.total_cmp(&S::one()) != Ordering::Less
        {
            return Err(DyadicError::ScaleOutOfRange(format!("{:?}", lambda)));
        }
        Ok(ScaleParam { lambda })
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(S::from_ratio(num, den))
    }

    pub fn from_rational(r: &BigRational) -> Result<Self> {
        Self::new(S::from_rational(r)).map_err(|_| DyadicError::ScaleOutOfRange(format_rational(r)))
    }

    pub fn lambda(&self) -> &S {
        &self.lambda
    }

    /// `alpha = 1 + log2(lambda)`, reported only.
    pub fn alpha(&self) -> f64 {
        1.0 + self.lambda.to_f64().log2()
    }

    /// `c = sum_{n>=1} lambda^n = lambda / (1 - lambda)`.
    pub fn c(&self) -> S {
        self.lambda.clone() / (S::one() - self.lambda.clone())
    }

    /// `chat = sum_{k>=1} (2 lambda)^{-k} = 1 / (2 lambda - 1)`.
    pub fn chat(&self) -> S {
        S::one() / (S::from_int(2) * self.lambda.clone() - S::one())
    }

    /// `mu = 1 / (2 lambda)`, the ratio of the ascending series.
    pub fn mu(&self) -> S {
        S::one() / (S::from_int(2) * self.lambda.clone())
    }

    /// `|I|^{1-alpha}` for `|I| = 2^s`.
    pub fn len_pow_one_minus_alpha(&self, s: i32) -> S {
        self.lambda.powi(-s)
    }

    /// `|I|^{-alpha}` for `|I| = 2^s`.
    pub fn len_pow_minus_alpha(&self, s: i32) -> S {
        self.mu().powi(s)
    }

    pub fn to_f64(&self) -> ScaleParam<f64> {
        ScaleParam {
            lambda: self.lambda.to_f64(),
        }
    }
}

impl<S: Scalar> PartialEq for ScaleParam<S> {
    fn eq(&self, other: &Self) -> bool {
        self.lambda.total_cmp(&other.lambda) == Ordering::Equal
    }
}

impl<S: Scalar> Eq for ScaleParam<S> {}

impl<S: Scalar> PartialOrd for ScaleParam<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<S: Scalar> Ord for ScaleParam<S> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lambda.total_cmp(&other.lambda)
    }
}

impl<S: fmt::Debug> fmt::Debug for ScaleParam<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lambda={:?}", self.lambda)
    }
}
