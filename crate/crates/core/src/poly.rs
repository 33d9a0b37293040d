//! Univariate polynomials over the Gaussian rationals.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::gaussian::GaussianRational;

/// Dense coefficient vector, index = power. Trailing zeros are never stored,
/// so the zero polynomial has an empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct UniPoly {
    coeffs: Vec<GaussianRational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::one())
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * t^k`
    pub fn monomial(c: GaussianRational, k: usize) -> Self {
        let mut coeffs = vec![GaussianRational::zero(); k + 1];
        coeffs[k] = c;
        Self::from_coeffs(coeffs)
    }

    /// The identity polynomial `t`.
    pub fn var() -> Self {
        Self::monomial(GaussianRational::one(), 1)
    }

    pub fn from_coeffs(mut coeffs: Vec<GaussianRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Convenience constructor from integer coefficients, lowest power first.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| GaussianRational::from_integer(c)).collect())
    }

    pub fn coeffs(&self) -> &[GaussianRational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> GaussianRational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&GaussianRational> {
        self.coeffs.last()
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c.scale_int(&BigInt::from(k)))
                .collect(),
        )
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex(&self) -> Vec<Complex64> {
        self.coeffs.iter().map(GaussianRational::to_complex64).collect()
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, t: &GaussianRational) -> GaussianRational {
        self.coeffs
            .iter()
            .rev()
            .fold(GaussianRational::zero(), |acc, c| &(&acc * t) + c)
    }

    /// Canonical rendering in the given variable letter.
    pub fn display_in(&self, var: char) -> String {
        render_terms(
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .filter(|(_, c)| !c.is_zero())
                .map(|(k, c)| {
                    let mono = match k {
                        0 => String::new(),
                        1 => var.to_string(),
                        _ => format!("{var}^{k}"),
                    };
                    (c.clone(), mono)
                }),
        )
    }
}

/// Floating-point Horner evaluation of a coefficient vector (lowest power first).
pub fn horner(coeffs: &[Complex64], t: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * t + c)
}

/// Joins `(coefficient, monomial)` pairs as `2*t^2 - t + 1/2`. Complex
/// coefficients with both parts are parenthesized so the text parses back.
pub(crate) fn render_terms(terms: impl Iterator<Item = (GaussianRational, String)>) -> String {
    let mut out = String::new();
    for (c, mono) in terms {
        let negative = if c.is_real() {
            c.re().is_negative()
        } else {
            c.re().is_zero() && c.im().is_negative()
        };
        let (negative, mag) = if negative {
            (true, -c)
        } else {
            (false, c)
        };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        let coef = if !mag.is_real() && !mag.re().is_zero() {
            format!("({mag})")
        } else {
            mag.to_string()
        };
        match (mono.is_empty(), mag.is_one()) {
            (true, _) => out.push_str(&coef),
            (false, true) => out.push_str(&mono),
            (false, false) => {
                out.push_str(&coef);
                out.push('*');
                out.push_str(&mono);
            }
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_in('t'))
    }
}

impl<'a> Add<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::from_coeffs((0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect())
    }
}

impl<'a> Sub<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::from_coeffs((0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect())
    }
}

impl<'a> Mul<&'a UniPoly> for &'a UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![GaussianRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += &(a * b);
            }
        }
        UniPoly::from_coeffs(out)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trailing_zeros_trimmed() {
        let p = UniPoly::from_ints(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(UniPoly::from_ints(&[0, 0]).degree(), None);
        assert!((&p - &p).is_zero());
    }

    #[test]
    fn derivative_of_cubic_third() {
        let p = UniPoly::monomial(GaussianRational::from_ratio(1, 3), 3);
        assert_eq!(p.derivative(), UniPoly::monomial(GaussianRational::one(), 2));
    }

    #[test]
    fn canonical_text() {
        let p = UniPoly::from_coeffs(vec![
            GaussianRational::from_ratio(1, 2),
            GaussianRational::from_integer(-1),
            GaussianRational::from_integer(2),
        ]);
        assert_eq!(p.to_string(), "2*t^2 - t + 1/2");
        let q = UniPoly::from_coeffs(vec![
            GaussianRational::zero(),
            GaussianRational::i(),
            GaussianRational::one(),
        ]);
        assert_eq!(q.to_string(), "t^2 + i*t");
        assert_eq!(UniPoly::zero().to_string(), "0");
        assert_eq!((-&UniPoly::var()).display_in('x'), "-x");
    }

    #[test]
    fn horner_matches_exact_eval() {
        let p = UniPoly::from_ints(&[3, -1, 0, 2]);
        let t = GaussianRational::from_ratio(1, 2);
        let exact = p.eval(&t).to_complex64();
        let float = horner(&p.to_complex(), Complex64::new(0.5, 0.0));
        assert!((exact - float).norm() < 1e-15);
    }
}
