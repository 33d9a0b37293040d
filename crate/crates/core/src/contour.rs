//! Integration contours made of two rays along which `exp(-p)` decays, and
//! the admissibility check for whole words.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::automorphism::AutomorphismWord;
use crate::error::ContourError;
use crate::poly::UniPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Orientation {
    /// Traversed from infinity to 0.
    Incoming,
    /// Traversed from 0 to infinity.
    Outgoing,
}

impl Orientation {
    /// Sign of the ray integral when parameterized by `t` from 0 to infinity.
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Incoming => -1.0,
            Orientation::Outgoing => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub direction: Complex64,
    pub orientation: Orientation,
}

/// `alpha^{-1} omega_1 R_+` (incoming) joined at 0 with `alpha^{-1} omega_2 R_+`
/// (outgoing), where `alpha^n` is the leading coefficient and the `omega`
/// are `n`-th roots of unity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourPair {
    pub incoming: Ray,
    pub outgoing: Ray,
    pub n: usize,
    pub k1: i64,
    pub k2: i64,
    pub alpha: Complex64,
}

impl ContourPair {
    pub fn rays(&self) -> [Ray; 2] {
        [self.incoming, self.outgoing]
    }
}

/// Builds the two-ray contour for `poly` using root-of-unity indices `k1`
/// (incoming) and `k2` (outgoing).
pub fn contour_for(poly: &UniPoly, k1: i64, k2: i64) -> Result<ContourPair, ContourError> {
    let n = poly.degree().unwrap_or(0);
    if n < 2 {
        return Err(ContourError::UnsupportedDegree(n));
    }
    if (k1 - k2).rem_euclid(n as i64) == 0 {
        return Err(ContourError::Degenerate { k1, k2, n });
    }
    let lead = poly.leading().expect("nonzero polynomial").to_complex64();
    // principal branch: arg(alpha) in (-pi/n, pi/n]
    let alpha = lead.powf(1.0 / n as f64);
    let direction = |k: i64| {
        let omega = Complex64::from_polar(1.0, 2.0 * PI * (k.rem_euclid(n as i64)) as f64 / n as f64);
        let d = omega / alpha;
        d / d.norm()
    };
    Ok(ContourPair {
        incoming: Ray { direction: direction(k1), orientation: Orientation::Incoming },
        outgoing: Ray { direction: direction(k2), orientation: Orientation::Outgoing },
        n,
        k1,
        k2,
        alpha,
    })
}

/// One contour per integration variable `u_1, v_1, ..., u_m, v_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContourPlan {
    pub pairs: Vec<ContourPair>,
}

impl ContourPlan {
    /// Default plan: `(k1, k2) = (1, 0)` on every layer unless overridden.
    pub fn for_word(word: &AutomorphismWord, overrides: Option<&[(i64, i64)]>) -> Result<Self, ContourError> {
        let seq = word.poly_sequence();
        if let Some(o) = overrides {
            if o.len() != seq.len() {
                return Err(ContourError::PlanLength { got: o.len(), expected: seq.len() });
            }
        }
        let pairs = seq
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let (k1, k2) = overrides.map(|o| o[i]).unwrap_or((1, 0));
                contour_for(p, k1, k2)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Why a word's contour integral is not known to converge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvergenceViolation {
    /// Offending entries of `p_1, q_1, ..., p_m, q_m`, e.g. `["p1", "q1"]`.
    pub positions: Vec<String>,
    pub degrees: Vec<usize>,
    pub reason: String,
}

impl fmt::Display for ConvergenceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at ({}); degree sequence {:?}", self.reason, self.positions.join(","), self.degrees)
    }
}

fn position_name(i: usize) -> String {
    format!("{}{}", if i.is_multiple_of(2) { 'p' } else { 'q' }, i / 2 + 1)
}

/// Every polynomial must have degree >= 2 and no two consecutive entries of
/// `p_1, q_1, ..., p_m, q_m` may both be quadratic.
pub fn convergence_check(word: &AutomorphismWord) -> Result<(), ConvergenceViolation> {
    let degrees: Vec<usize> = word.poly_sequence().iter().map(|p| p.degree().unwrap_or(0)).collect();
    if let Some(i) = degrees.iter().position(|&d| d < 2) {
        return Err(ConvergenceViolation {
            positions: vec![position_name(i)],
            degrees: degrees.clone(),
            reason: format!("polynomial of degree {} (need at least 2)", degrees[i]),
        });
    }
    if let Some(i) = degrees.windows(2).position(|w| w[0] == 2 && w[1] == 2) {
        return Err(ConvergenceViolation {
            positions: vec![position_name(i), position_name(i + 1)],
            degrees,
            reason: "two consecutive quadratic polynomials (delta-type divergence)".to_string(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianRational;
    use crate::poly::horner;
    use num_traits::Zero;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn cubic_third_directions() {
        let p = UniPoly::monomial(GaussianRational::from_ratio(1, 3), 3);
        let c = contour_for(&p, 1, 0).unwrap();
        assert!(close(c.incoming.direction, Complex64::from_polar(1.0, 2.0 * PI / 3.0)));
        assert!(close(c.outgoing.direction, Complex64::new(1.0, 0.0)));
        assert_eq!(c.incoming.orientation, Orientation::Incoming);
    }

    #[test]
    fn quadratic_gives_real_line() {
        let c = contour_for(&UniPoly::from_ints(&[0, 0, 1]), 1, 0).unwrap();
        assert!(close(c.incoming.direction, Complex64::new(-1.0, 0.0)));
        assert!(close(c.outgoing.direction, Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn quartic_with_leading_two() {
        let c = contour_for(&UniPoly::from_ints(&[0, 0, 0, 0, 2]), 2, 0).unwrap();
        assert!((c.alpha - Complex64::new(2f64.powf(0.25), 0.0)).norm() < 1e-14);
        assert!(close(c.incoming.direction, Complex64::new(-1.0, 0.0)));
        assert!(close(c.outgoing.direction, Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn rejects_low_degree_and_coinciding_rays() {
        assert_eq!(contour_for(&UniPoly::from_ints(&[1, 1]), 1, 0), Err(ContourError::UnsupportedDegree(1)));
        assert!(matches!(
            contour_for(&UniPoly::from_ints(&[0, 0, 0, 1]), 4, 1),
            Err(ContourError::Degenerate { .. })
        ));
    }

    #[test]
    fn leading_term_is_positive_real_along_rays() {
        let lead = &GaussianRational::from_integer(2) + &GaussianRational::i();
        let p = UniPoly::from_coeffs(vec![
            GaussianRational::from_integer(1),
            GaussianRational::from_integer(-3),
            GaussianRational::from_ratio(1, 2),
            GaussianRational::zero(),
            lead,
        ]);
        let coeffs = p.to_complex();
        let lc = coeffs[4].norm();
        // lower-order bound: |1| + 3t + t^2/2 <= C + t^n/2 on [1, 10]
        let c = coeffs[..4].iter().map(|c| c.norm()).sum::<f64>() * 10f64.powi(3);
        for (k1, k2) in [(1, 0), (3, 2), (0, 2)] {
            let pair = contour_for(&p, k1, k2).unwrap();
            assert_ne!(pair.incoming.direction, pair.outgoing.direction);
            for ray in pair.rays() {
                for i in 0..=90 {
                    let t = 1.0 + 0.1 * i as f64;
                    let val = horner(&coeffs, ray.direction * t).re;
                    assert!(val >= lc * t.powi(4) / 2.0 - c, "t = {t}: {val}");
                    let lead_only = coeffs[4] * (ray.direction * t).powu(4);
                    assert!((lead_only.im).abs() < 1e-9 * lead_only.norm());
                }
            }
        }
    }

    #[test]
    fn convergence_examples() {
        let cub = UniPoly::from_ints(&[0, 0, 0, 1]);
        let quad = UniPoly::from_ints(&[0, 0, 1]);
        assert!(convergence_check(&AutomorphismWord::from_pairs([(cub.clone(), cub.clone())])).is_ok());
        let v = convergence_check(&AutomorphismWord::from_pairs([(quad.clone(), quad.clone())])).unwrap_err();
        assert_eq!(v.positions, vec!["p1", "q1"]);
        let w = AutomorphismWord::from_pairs([(quad.clone(), cub.clone()), (cub.clone(), quad.clone())]);
        assert!(convergence_check(&w).is_ok());
        // permuting the same degree multiset flips the verdict
        let w = AutomorphismWord::from_pairs([(cub.clone(), quad.clone()), (quad.clone(), cub.clone())]);
        assert_eq!(convergence_check(&w).unwrap_err().positions, vec!["q1", "p2"]);
    }
}
