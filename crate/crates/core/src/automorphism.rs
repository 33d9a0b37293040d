//! Automorphism words of the Weyl algebra, the anti-isomorphisms `b0` and
//! `b = b0 . sigma`, and the bispectral operators they produce.

use std::fmt;

use num_traits::Zero;
use serde::Serialize;

use crate::gaussian::GaussianRational;
use crate::poly::UniPoly;
use crate::weyl::{VarNames, WeylElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FactorKind {
    /// `exp(ad p(x))`: fixes `x`, sends `D` to `D - p'(x)`.
    AdX,
    /// `exp(ad q(D))`: fixes `D`, sends `x` to `x + q'(D)`.
    AdD,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementaryFactor {
    pub kind: FactorKind,
    pub poly: UniPoly,
}

impl ElementaryFactor {
    pub fn ad_x(poly: UniPoly) -> Self {
        Self { kind: FactorKind::AdX, poly }
    }

    pub fn ad_d(poly: UniPoly) -> Self {
        Self { kind: FactorKind::AdD, poly }
    }

    pub fn inverse(&self) -> Self {
        Self { kind: self.kind, poly: -&self.poly }
    }
}

/// Applies one elementary automorphism to `p` by substituting the images of
/// the generators and re-normal-ordering.
pub fn apply_factor(f: &ElementaryFactor, p: &WeylElement) -> WeylElement {
    let shift = f.poly.derivative();
    if shift.is_zero() || p.is_zero() {
        return p.clone();
    }
    let mut out = WeylElement::zero();
    match f.kind {
        FactorKind::AdX => {
            // sum_b f_b(x) * (D - p'(x))^b, powers built by left multiplication
            let max_b = p.terms().map(|(k, _)| k.1).max().unwrap_or(0);
            let mut image_pow = WeylElement::one();
            for b in 0..=max_b {
                if b > 0 {
                    image_pow = &image_pow.left_mul_d() - &image_pow.left_mul_x_poly(&shift);
                }
                let coeff_poly = UniPoly::from_coeffs(collect_dense(
                    p.terms().filter(|(k, _)| k.1 == b).map(|(k, c)| (k.0, c)),
                ));
                if !coeff_poly.is_zero() {
                    out = &out + &image_pow.left_mul_x_poly(&coeff_poly);
                }
            }
        }
        FactorKind::AdD => {
            // sum_a (x + q'(D))^a * g_a(D), powers built by right multiplication
            let max_a = p.terms().map(|(k, _)| k.0).max().unwrap_or(0);
            let mut image_pow = WeylElement::one();
            for a in 0..=max_a {
                if a > 0 {
                    image_pow = &image_pow.right_mul_x() + &image_pow.right_mul_d_poly(&shift);
                }
                let coeff_poly = UniPoly::from_coeffs(collect_dense(
                    p.terms().filter(|(k, _)| k.0 == a).map(|(k, c)| (k.1, c)),
                ));
                if !coeff_poly.is_zero() {
                    out = &out + &image_pow.right_mul_d_poly(&coeff_poly);
                }
            }
        }
    }
    out
}

fn collect_dense<'a>(
    entries: impl Iterator<Item = (u32, &'a GaussianRational)>,
) -> Vec<GaussianRational> {
    let mut v: Vec<GaussianRational> = Vec::new();
    for (e, c) in entries {
        let e = e as usize;
        if v.len() <= e {
            v.resize(e + 1, GaussianRational::zero());
        }
        v[e] = c.clone();
    }
    v
}

/// `sigma = exp(ad p_1(x)) exp(ad q_1(D)) ... exp(ad p_m(x)) exp(ad q_m(D))`.
///
/// Factors are kept in written order. Zero polynomials are placeholders: they
/// act as the identity and only serve to keep the alternating `p, q` shape.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct AutomorphismWord {
    factors: Vec<ElementaryFactor>,
}

impl AutomorphismWord {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn from_factors(factors: Vec<ElementaryFactor>) -> Self {
        Self { factors }
    }

    /// Builds `exp(ad p_1) exp(ad q_1) ... exp(ad p_m) exp(ad q_m)`.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (UniPoly, UniPoly)>) -> Self {
        let mut factors = Vec::new();
        for (p, q) in pairs {
            factors.push(ElementaryFactor::ad_x(p));
            factors.push(ElementaryFactor::ad_d(q));
        }
        Self { factors }
    }

    pub fn factors(&self) -> &[ElementaryFactor] {
        &self.factors
    }

    /// Aligns the nonzero factors into alternating `(p_j, q_j)` pairs,
    /// inserting zero placeholders where two factors of the same kind meet
    /// or the word starts with an `AdD` factor.
    pub fn pairs(&self) -> Vec<(UniPoly, UniPoly)> {
        let mut pairs = Vec::new();
        let mut pending_p: Option<UniPoly> = None;
        for f in self.factors.iter().filter(|f| !f.poly.is_zero()) {
            match f.kind {
                FactorKind::AdX => {
                    if let Some(p) = pending_p.take() {
                        pairs.push((p, UniPoly::zero()));
                    }
                    pending_p = Some(f.poly.clone());
                }
                FactorKind::AdD => {
                    pairs.push((pending_p.take().unwrap_or_default(), f.poly.clone()));
                }
            }
        }
        if let Some(p) = pending_p {
            pairs.push((p, UniPoly::zero()));
        }
        pairs
    }

    /// Number of `(p, q)` pairs.
    pub fn m(&self) -> usize {
        self.pairs().len()
    }

    /// `p_1, q_1, ..., p_m, q_m` in order.
    pub fn poly_sequence(&self) -> Vec<UniPoly> {
        self.pairs().into_iter().flat_map(|(p, q)| [p, q]).collect()
    }

    /// The word made of the first `k` pairs.
    pub fn prefix(&self, k: usize) -> Self {
        Self::from_pairs(self.pairs().into_iter().take(k))
    }

    /// Reversed factors with negated polynomials.
    pub fn inverse(&self) -> Self {
        Self {
            factors: self
                .factors
                .iter()
                .rev()
                .filter(|f| !f.poly.is_zero())
                .map(ElementaryFactor::inverse)
                .collect(),
        }
    }

    /// `sigma(P)`; the leftmost factor acts outermost.
    pub fn apply(&self, p: &WeylElement) -> WeylElement {
        self.factors
            .iter()
            .rev()
            .fold(p.clone(), |acc, f| apply_factor(f, &acc))
    }
}

pub fn apply_word(w: &AutomorphismWord, p: &WeylElement) -> WeylElement {
    w.apply(p)
}

pub fn inverse_word(w: &AutomorphismWord) -> AutomorphismWord {
    w.inverse()
}

impl fmt::Display for AutomorphismWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return f.write_str("id");
        }
        let parts: Vec<String> = self
            .factors
            .iter()
            .map(|fac| match fac.kind {
                FactorKind::AdX => format!("exp(ad[{}])", fac.poly.display_in('x')),
                FactorKind::AdD => format!("exp(ad[{}])", fac.poly.display_in('D')),
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// The anti-isomorphism `x -> Dz`, `D -> z`. On normal-ordered monomials
/// `x^a D^b -> z^b Dz^a`, which is again normal-ordered.
pub fn b0(p: &WeylElement) -> WeylElement {
    WeylElement::from_terms(p.terms().map(|(&(a, b), c)| ((b, a), c.clone())))
}

/// Inverse of [`b0`]: `z^b Dz^a -> x^a D^b`.
pub fn b0_inverse(q: &WeylElement) -> WeylElement {
    b0(q)
}

/// `b(P) = b0(sigma(P))`, an operator in `(z, Dz)`.
pub fn anti_isomorphism(w: &AutomorphismWord, p: &WeylElement) -> WeylElement {
    b0(&w.apply(p))
}

/// `b^{-1}(Q) = sigma^{-1}(b0^{-1}(Q))`, an operator in `(x, D)`.
pub fn anti_isomorphism_inverse(w: &AutomorphismWord, q: &WeylElement) -> WeylElement {
    w.inverse().apply(&b0_inverse(q))
}

/// `L = b^{-1}(z)`, `Lambda = b(x)`, `D = b^{-1}(Dz)`, `Delta = b(D)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BispectralQuadruple {
    pub l: WeylElement,
    pub lambda: WeylElement,
    pub d: WeylElement,
    pub delta: WeylElement,
}

impl BispectralQuadruple {
    /// Canonical strings, `L`/`D` in `(x, D)` and `Lambda`/`Delta` in `(z, Dz)`.
    pub fn canonical_strings(&self) -> [(&'static str, String); 4] {
        [
            ("L", self.l.display_with(VarNames::X)),
            ("Lambda", self.lambda.display_with(VarNames::Z)),
            ("D", self.d.display_with(VarNames::X)),
            ("Delta", self.delta.display_with(VarNames::Z)),
        ]
    }
}

pub fn bispectral_quadruple(w: &AutomorphismWord) -> BispectralQuadruple {
    let inv = w.inverse();
    BispectralQuadruple {
        l: inv.apply(&WeylElement::d()),
        d: inv.apply(&WeylElement::x()),
        lambda: b0(&w.apply(&WeylElement::x())),
        delta: b0(&w.apply(&WeylElement::d())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    NewBispectral,
    AiryReducible,
    Rank1OrTrivial,
    ReducibleWord,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::NewBispectral => "NewBispectral",
            Verdict::AiryReducible => "AiryReducible",
            Verdict::Rank1OrTrivial => "Rank1OrTrivial",
            Verdict::ReducibleWord => "ReducibleWord",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub detail: String,
    /// `[[a11, a12], [a21, a22]]` with `b(x) = a11 z + a12 Dz + c1`,
    /// `b(D) = a21 z + a22 Dz + c2`; present only for `Rank1OrTrivial`.
    pub matrix: Option<[[GaussianRational; 2]; 2]>,
}

impl Classification {
    pub fn determinant(&self) -> Option<GaussianRational> {
        self.matrix
            .as_ref()
            .map(|a| &(&a[0][0] * &a[1][1]) - &(&a[0][1] * &a[1][0]))
    }
}

fn position_name(i: usize) -> String {
    format!("{}{}", if i.is_multiple_of(2) { 'p' } else { 'q' }, i / 2 + 1)
}

/// Degree-based triviality classification of a word.
pub fn classify(w: &AutomorphismWord) -> Classification {
    let seq = w.poly_sequence();
    let degrees: Vec<usize> = seq.iter().map(|p| p.degree().unwrap_or(0)).collect();

    if let Some(i) = degrees.iter().position(|&d| d <= 1) {
        let what = if seq[i].is_zero() {
            "is a zero placeholder".to_string()
        } else {
            format!("has degree {}", degrees[i])
        };
        return Classification {
            verdict: Verdict::ReducibleWord,
            detail: format!(
                "{} {what}; degree <= 1 factors reduce to affine changes of variables or a shorter word",
                position_name(i)
            ),
            matrix: None,
        };
    }

    if degrees.iter().all(|&d| d == 2) {
        let lambda = b0(&w.apply(&WeylElement::x()));
        let delta = b0(&w.apply(&WeylElement::d()));
        let row = |e: &WeylElement| [e.coeff(1, 0), e.coeff(0, 1)];
        let matrix = [row(&lambda), row(&delta)];
        let linear = |e: &WeylElement| e.terms().all(|(&(a, b), _)| a + b <= 1);
        let mut detail = if matrix[0][1].is_zero() {
            "all polynomials quadratic; a12 = 0 so b maps C[x] onto C[z] and yields no bispectral operators"
                .to_string()
        } else {
            "all polynomials quadratic; b is a linear substitution giving rank-1 bispectral operators"
                .to_string()
        };
        if !linear(&lambda) || !linear(&delta) {
            detail.push_str(" (warning: images are not affine)");
        }
        return Classification { verdict: Verdict::Rank1OrTrivial, detail, matrix: Some(matrix) };
    }

    if degrees.len() == 2 && degrees.iter().filter(|&&d| d == 2).count() == 1 {
        let (quad, other) = if degrees[0] == 2 { ("p1", "q1") } else { ("q1", "p1") };
        return Classification {
            verdict: Verdict::AiryReducible,
            detail: format!(
                "m = 1 with {quad} quadratic and {other} of degree >= 3: generalized Airy operators after affine changes"
            ),
            matrix: None,
        };
    }

    Classification {
        verdict: Verdict::NewBispectral,
        detail: format!("m = {} with degrees {:?}", degrees.len() / 2, degrees),
        matrix: None,
    }
}
