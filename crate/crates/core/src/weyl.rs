//! Normal-ordered elements of the Weyl algebra `C<x, D> / (Dx - xD - 1)`.
//!
//! An element is a sparse map `(a, b) -> c` standing for `sum c * x^a * D^b`
//! with every power of `x` to the left of every power of `D`. Products are
//! reordered with `D x = x D + 1`; all arithmetic is exact.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::AlgebraError;
use crate::gaussian::GaussianRational;
use crate::poly::UniPoly;

/// Exponent pair `(x-power, D-power)`.
pub type Exponents = (u32, u32);

/// Variable names used when rendering an element.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VarNames {
    pub var: &'static str,
    pub deriv: &'static str,
}

impl VarNames {
    pub const X: VarNames = VarNames { var: "x", deriv: "D" };
    pub const Z: VarNames = VarNames { var: "z", deriv: "Dz" };
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct WeylElement {
    terms: BTreeMap<Exponents, GaussianRational>,
}

impl WeylElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::scalar(GaussianRational::one())
    }

    pub fn scalar(c: GaussianRational) -> Self {
        Self::monomial(0, 0, c)
    }

    /// The multiplication operator `x`.
    pub fn x() -> Self {
        Self::monomial(1, 0, GaussianRational::one())
    }

    /// The derivation `D`.
    pub fn d() -> Self {
        Self::monomial(0, 1, GaussianRational::one())
    }

    /// `c * x^a * D^b`
    pub fn monomial(a: u32, b: u32, c: GaussianRational) -> Self {
        let mut out = Self::zero();
        out.add_term((a, b), c);
        out
    }

    /// Builds an element from arbitrary (possibly repeated or zero) terms.
    pub fn from_terms(terms: impl IntoIterator<Item = (Exponents, GaussianRational)>) -> Self {
        let mut out = Self::zero();
        for (k, c) in terms {
            out.add_term(k, c);
        }
        out
    }

    /// `p(x)` as a multiplication operator.
    pub fn from_poly_in_x(p: &UniPoly) -> Self {
        Self::from_terms(p.coeffs().iter().enumerate().map(|(k, c)| ((k as u32, 0), c.clone())))
    }

    /// `q(D)` as a constant-coefficient operator.
    pub fn from_poly_in_d(q: &UniPoly) -> Self {
        Self::from_terms(q.coeffs().iter().enumerate().map(|(k, c)| ((0, k as u32), c.clone())))
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

    pub fn coeff(&self, a: u32, b: u32) -> GaussianRational {
        self.terms.get(&(a, b)).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &GaussianRational)> {
        self.terms.iter()
    }

    /// Adds `c * x^a * D^b`, dropping the entry if it cancels.
    pub fn add_term(&mut self, key: Exponents, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add_term_ref(&mut self, key: Exponents, c: &GaussianRational) {
        self.add_term(key, c.clone());
    }

    pub fn scale(&self, c: &GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }

    /// `(order, degree)`: largest `D`-exponent and largest `x`-exponent.
    pub fn order_and_degree(&self) -> Result<(u32, u32), AlgebraError> {
        if self.is_zero() {
            return Err(AlgebraError::UndefinedOrder);
        }
        let order = self.terms.keys().map(|k| k.1).max().unwrap_or(0);
        let degree = self.terms.keys().map(|k| k.0).max().unwrap_or(0);
        Ok((order, degree))
    }

    /// `D * self`, using `D x^c D^d = x^c D^(d+1) + c x^(c-1) D^d`.
    pub fn left_mul_d(&self) -> Self {
        let mut out = Self::zero();
        for (&(c, d), v) in &self.terms {
            out.add_term_ref((c, d + 1), v);
            if c > 0 {
                out.add_term((c - 1, d), v.scale_int(&BigInt::from(c)));
            }
        }
        out
    }

    /// `self * x`, using `x^c D^d x = x^(c+1) D^d + d x^c D^(d-1)`.
    pub fn right_mul_x(&self) -> Self {
        let mut out = Self::zero();
        for (&(c, d), v) in &self.terms {
            out.add_term_ref((c + 1, d), v);
            if d > 0 {
                out.add_term((c, d - 1), v.scale_int(&BigInt::from(d)));
            }
        }
        out
    }

    /// `p(x) * self`; no reordering needed.
    pub fn left_mul_x_poly(&self, p: &UniPoly) -> Self {
        let mut out = Self::zero();
        for (k, pc) in p.coeffs().iter().enumerate() {
            if pc.is_zero() {
                continue;
            }
            for (&(c, d), v) in &self.terms {
                out.add_term((c + k as u32, d), pc * v);
            }
        }
        out
    }

    /// `self * q(D)`; no reordering needed.
    pub fn right_mul_d_poly(&self, q: &UniPoly) -> Self {
        let mut out = Self::zero();
        for (k, qc) in q.coeffs().iter().enumerate() {
            if qc.is_zero() {
                continue;
            }
            for (&(c, d), v) in &self.terms {
                out.add_term((c, d + k as u32), v * qc);
            }
        }
        out
    }

    /// Normal-ordered product `self * rhs`.
    ///
    /// Splits `self = sum_b f_b(x) D^b`, builds `D^b * rhs` by repeated
    /// left multiplication with `D`, then left-multiplies by `f_b(x)`. This
    /// realizes `D^b x^c = sum_k C(b,k) C(c,k) k! x^(c-k) D^(b-k)` without
    /// evaluating the binomial sums term by term.
    pub fn multiply(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        let mut by_order: BTreeMap<u32, Vec<(u32, &GaussianRational)>> = BTreeMap::new();
        for (&(a, b), v) in &self.terms {
            by_order.entry(b).or_default().push((a, v));
        }
        let mut out = Self::zero();
        let mut shifted = rhs.clone();
        let mut power = 0u32;
        for (&b, xs) in &by_order {
            while power < b {
                shifted = shifted.left_mul_d();
                power += 1;
            }
            for &(a, v) in xs {
                for (&(c, d), w) in &shifted.terms {
                    out.add_term((a + c, d), v * w);
                }
            }
        }
        out
    }

    /// `self * rhs - rhs * self`
    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.multiply(rhs) - &rhs.multiply(self)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.multiply(self);
        }
        acc
    }

    /// Action on `C[x]`: returns the polynomial `self(x^k)`.
    pub fn apply_to_monomial(&self, k: u32) -> UniPoly {
        self.apply_to_poly(&UniPoly::monomial(GaussianRational::one(), k as usize))
    }

    /// Action on an arbitrary polynomial in `x`.
    pub fn apply_to_poly(&self, f: &UniPoly) -> UniPoly {
        let mut derivs = vec![f.clone()];
        let mut out = UniPoly::zero();
        for (&(a, b), c) in &self.terms {
            while derivs.len() <= b as usize {
                let next = derivs.last().unwrap().derivative();
                derivs.push(next);
            }
            let shifted = &UniPoly::monomial(c.clone(), a as usize) * &derivs[b as usize];
            out = &out + &shifted;
        }
        out
    }

    /// Canonical text: `coef * x^a * D^b` terms sorted by `D`-exponent then
    /// `x`-exponent, both descending, joined by ` + `.
    pub fn display_with(&self, names: VarNames) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut keys: Vec<_> = self.terms.iter().collect();
        keys.sort_by_key(|(k, _)| std::cmp::Reverse((k.1, k.0)));
        let parts: Vec<String> = keys
            .into_iter()
            .map(|(&(a, b), c)| {
                let mut s = if !c.is_real() && !c.re().is_zero() {
                    format!("({c})")
                } else {
                    c.to_string()
                };
                for (name, e) in [(names.var, a), (names.deriv, b)] {
                    match e {
                        0 => {}
                        1 => s.push_str(&format!(" * {name}")),
                        _ => s.push_str(&format!(" * {name}^{e}")),
                    }
                }
                s
            })
            .collect();
        parts.join(" + ")
    }
}

/// `p(A) = sum_k p_k A^k`, evaluated by Horner's scheme in the algebra.
pub fn compose_poly(p: &UniPoly, a: &WeylElement) -> WeylElement {
    let mut acc = WeylElement::zero();
    for c in p.coeffs().iter().rev() {
        acc = acc.multiply(a);
        acc.add_term((0, 0), c.clone());
    }
    acc
}

impl fmt::Display for WeylElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(VarNames::X))
    }
}

impl<'a> Add<&'a WeylElement> for &'a WeylElement {
    type Output = WeylElement;
    fn add(self, rhs: &WeylElement) -> WeylElement {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term_ref(*k, v);
        }
        out
    }
}

impl<'a> Sub<&'a WeylElement> for &'a WeylElement {
    type Output = WeylElement;
    fn sub(self, rhs: &WeylElement) -> WeylElement {
        let mut out = self.clone();
        for (k, v) in &rhs.terms {
            out.add_term(*k, -v);
        }
        out
    }
}

impl<'a> Mul<&'a WeylElement> for &'a WeylElement {
    type Output = WeylElement;
    fn mul(self, rhs: &WeylElement) -> WeylElement {
        self.multiply(rhs)
    }
}

impl Neg for &WeylElement {
    type Output = WeylElement;
    fn neg(self) -> WeylElement {
        WeylElement {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_integer(n)
    }

    fn m(a: u32, b: u32, c: i64) -> WeylElement {
        WeylElement::monomial(a, b, g(c))
    }

    #[test]
    fn defining_relation() {
        let x = WeylElement::x();
        let d = WeylElement::d();
        assert_eq!(&d * &x, &m(1, 1, 1) + &WeylElement::one());
        assert_eq!(&x * &d, m(1, 1, 1));
        assert_eq!(d.commutator(&x), WeylElement::one());
    }

    #[test]
    fn d2_x2_reordering() {
        // D^2 x^2 = x^2 D^2 + 4 x D + 2
        let lhs = &m(0, 2, 1) * &m(2, 0, 1);
        let rhs = WeylElement::from_terms([((2, 2), g(1)), ((1, 1), g(4)), ((0, 0), g(2))]);
        assert_eq!(lhs, rhs);
        for k in 0..=6 {
            let via_factors = m(0, 2, 1).apply_to_poly(&m(2, 0, 1).apply_to_monomial(k));
            assert_eq!(lhs.apply_to_monomial(k), via_factors);
        }
    }

    #[test]
    fn commutator_examples() {
        assert!(m(1, 0, 1).commutator(&m(2, 0, 1)).is_zero());
        assert_eq!(m(0, 2, 1).commutator(&WeylElement::x()), m(0, 1, 2));
    }

    #[test]
    fn compose_examples() {
        // (x - D^2)^2 = x^2 - 2 x D^2 - 2 D + D^4
        let a = &WeylElement::x() - &m(0, 2, 1);
        let sq = compose_poly(&UniPoly::from_ints(&[0, 0, 1]), &a);
        let expected =
            WeylElement::from_terms([((2, 0), g(1)), ((1, 2), g(-2)), ((0, 1), g(-2)), ((0, 4), g(1))]);
        assert_eq!(sq, expected);
        assert_eq!(compose_poly(&UniPoly::var(), &a), a);
        assert_eq!(compose_poly(&UniPoly::one(), &a), WeylElement::one());
        for k in 0..=6 {
            let twice = a.apply_to_poly(&a.apply_to_monomial(k));
            assert_eq!(sq.apply_to_monomial(k), twice);
        }
    }

    #[test]
    fn monomial_action() {
        assert_eq!(m(0, 1, 1).apply_to_monomial(3), UniPoly::monomial(g(3), 2));
        assert_eq!(m(1, 1, 1).apply_to_monomial(5), UniPoly::monomial(g(5), 5));
        let d2x2 = &m(0, 2, 1) * &m(2, 0, 1);
        assert_eq!(d2x2.apply_to_monomial(0), UniPoly::constant(g(2)));
    }

    #[test]
    fn order_and_degree_reads_exponents() {
        let p = &m(2, 3, 1) + &m(0, 1, 1);
        assert_eq!(p.order_and_degree().unwrap(), (3, 2));
        assert_eq!(WeylElement::one().order_and_degree().unwrap(), (0, 0));
        assert_eq!(WeylElement::zero().order_and_degree(), Err(AlgebraError::UndefinedOrder));
    }

    #[test]
    fn canonical_rendering() {
        let a = &WeylElement::x() - &m(0, 2, 1);
        let l = &WeylElement::d() + &compose_poly(&UniPoly::from_ints(&[0, 0, 1]), &a);
        assert_eq!(l.to_string(), "1 * D^4 + -2 * x * D^2 + -1 * D + 1 * x^2");
        assert_eq!(l.display_with(VarNames::Z), "1 * Dz^4 + -2 * z * Dz^2 + -1 * Dz + 1 * z^2");
        assert_eq!(WeylElement::zero().to_string(), "0");
        let c = &GaussianRational::from_ratio(1, 2) + &GaussianRational::i();
        assert_eq!(WeylElement::monomial(1, 0, c).to_string(), "(1/2+i) * x");
    }
}
