//! Dyadic tuples: nonincreasing lists of powers of two, stored as signed
//! integer exponents so meets, joins, volumes and incidence factors are exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{precondition, Result};

/// An exact power of two, `2^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Dyadic(pub i64);

impl Dyadic {
    pub fn as_f64(self) -> f64 {
        (self.0 as f64).exp2()
    }

    pub fn exponent(self) -> i64 {
        self.0
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 >= 0 {
            write!(f, "{}", self.as_f64())
        } else {
            write!(f, "1/{}", (-self.0 as f64).exp2())
        }
    }
}

/// Nonincreasing tuple of powers of two. The entries are kept as exponents;
/// `(0, -2)` represents `(1, 1/4)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicTuple {
    exponents: Vec<i64>,
}

impl DyadicTuple {
    /// Builds a tuple from exponents, which must be nonincreasing.
    pub fn new(exponents: Vec<i64>) -> Result<Self> {
        if exponents.is_empty() {
            return Err(precondition("exponents", "tuple must be nonempty"));
        }
        if exponents.windows(2).any(|w| w[0] < w[1]) {
            return Err(precondition(
                "exponents",
                format!("entries must be nonincreasing, got {exponents:?}"),
            ));
        }
        Ok(Self { exponents })
    }

    /// Builds a tuple from exponents in any order by sorting them.
    pub fn sorted(mut exponents: Vec<i64>) -> Result<Self> {
        exponents.sort_unstable_by(|a, b| b.cmp(a));
        Self::new(exponents)
    }

    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    pub fn exponents(&self) -> &[i64] {
        &self.exponents
    }

    pub fn entry(&self, i: usize) -> Dyadic {
        Dyadic(self.exponents[i])
    }

    pub fn entries_f64(&self) -> Vec<f64> {
        self.exponents.iter().map(|&e| (e as f64).exp2()).collect()
    }

    /// Entrywise minimum, re-sorted nonincreasing.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, i64::min)
    }

    /// Entrywise maximum, re-sorted nonincreasing.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, i64::max)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(i64, i64) -> i64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(crate::Error::Dimension { expected: self.dim(), got: other.dim() });
        }
        let exps = self
            .exponents
            .iter()
            .zip(&other.exponents)
            .map(|(&a, &b)| f(a, b))
            .collect();
        // The entrywise min/max of nonincreasing sequences is nonincreasing,
        // but re-sort anyway so the invariant never depends on that fact.
        Self::sorted(exps)
    }

    /// Volume of the box with these side lengths: the product of the entries.
    pub fn volume(&self) -> Dyadic {
        Dyadic(self.exponents.iter().sum())
    }

    /// Entrywise order: `self ≤ other` in every coordinate.
    pub fn le(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.exponents.iter().zip(&other.exponents).all(|(&a, &b)| a <= b)
    }
}

impl fmt::Display for DyadicTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, &e) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", Dyadic(e))?;
        }
        write!(f, ")")
    }
}

/// Incidence factor `I(a, b) = ∏_{i,j} min(a_i⁻¹ b_j, 1)`, exact.
///
/// Every factor is a power of two, so the product is returned as a [`Dyadic`].
pub fn incidence_factor(a: &DyadicTuple, b: &DyadicTuple) -> Result<Dyadic> {
    if a.dim() != b.dim() {
        return Err(crate::Error::Dimension { expected: a.dim(), got: b.dim() });
    }
    let mut exp = 0i64;
    for &ea in a.exponents() {
        for &eb in b.exponents() {
            exp += (eb - ea).min(0);
        }
    }
    Ok(Dyadic(exp))
}
