//! JSON job files.
//!
//! ```json
//! {
//!   "word": [{"kind": "p", "poly": "t^3/3"}, {"kind": "q", "poly": ["0", "0", "0", "1/3"]}],
//!   "contours": [[1, 0], [1, 0]],
//!   "grid": {"x": {"min": -1, "max": 1, "n": 5}, "z": {"min": -1, "max": 1, "n": 5}},
//!   "quadrature": {"rel_tol": 1e-10},
//!   "probes": ["x^2", "x*D"],
//!   "tolerance": 1e-6
//! }
//! ```
//!
//! Polynomial coefficients are exact: strings such as `"1/2-3/4*i"` or
//! integers. Grid points are complex literals (`"0.5-0.25i"`), plain numbers
//! or `{"re": .., "im": ..}` objects.

use std::path::Path;

use bispectral::quad::QuadratureSpec;
use bispectral::{
    parse_gaussian, parse_operator, parse_poly, AutomorphismWord, ElementaryFactor, UniPoly, VerificationTask,
    WeylElement,
};
use num_complex::Complex64;
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
pub enum FactorKind {
    #[serde(rename = "p")]
    P,
    #[serde(rename = "q")]
    Q,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Int(i64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PolyField {
    Text(String),
    Coeffs(Vec<Coefficient>),
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct FactorRecord {
    pub kind: FactorKind,
    pub poly: PolyField,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ComplexLit {
    Real(f64),
    Text(String),
    Parts { re: f64, im: f64 },
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Points(Vec<(ComplexLit, ComplexLit)>),
    Rect { x: Axis, z: Axis },
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureOverrides {
    pub nodes_per_panel: Option<usize>,
    pub panels: Option<usize>,
    pub grading: Option<f64>,
    pub truncation: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_doublings: Option<u32>,
    pub max_abs_arg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub word: Vec<FactorRecord>,
    #[serde(default)]
    pub contours: Option<Vec<(i64, i64)>>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub quadrature: Option<QuadratureOverrides>,
    #[serde(default)]
    pub probes: Vec<String>,
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl JobSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Job(format!("invalid job file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Job(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn word(&self) -> Result<AutomorphismWord, CliError> {
        let factors = self
            .word
            .iter()
            .map(|rec| {
                let poly = rec.poly.to_poly()?;
                Ok(match rec.kind {
                    FactorKind::P => ElementaryFactor::ad_x(poly),
                    FactorKind::Q => ElementaryFactor::ad_d(poly),
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(AutomorphismWord::from_factors(factors))
    }

    pub fn grid(&self) -> Result<Vec<(Complex64, Complex64)>, CliError> {
        match &self.grid {
            None => Ok(bispectral::verify::default_grid()),
            Some(GridSpec::Points(pts)) => pts.iter().map(|(x, z)| Ok((x.value()?, z.value()?))).collect(),
            Some(GridSpec::Rect { x, z }) => {
                let (xs, zs) = (x.points()?, z.points()?);
                Ok(xs.iter().flat_map(|&a| zs.iter().map(move |&b| (a, b))).collect())
            }
        }
    }

    pub fn spec(&self, allow_high_m: bool) -> QuadratureSpec {
        let mut spec = QuadratureSpec { allow_high_m, ..Default::default() };
        if let Some(o) = &self.quadrature {
            if let Some(v) = o.nodes_per_panel {
                spec.nodes_per_panel = v;
            }
            if let Some(v) = o.panels {
                spec.panels = v;
            }
            if let Some(v) = o.grading {
                spec.grading = v;
            }
            if o.truncation.is_some() {
                spec.truncation = o.truncation;
            }
            if let Some(v) = o.rel_tol {
                spec.rel_tol = v;
            }
            if let Some(v) = o.max_doublings {
                spec.max_doublings = v;
            }
            if o.max_abs_arg.is_some() {
                spec.max_abs_arg = o.max_abs_arg;
            }
        }
        spec
    }

    pub fn probes(&self) -> Result<Vec<WeylElement>, CliError> {
        self.probes.iter().map(|s| parse_operator(s).map_err(CliError::from)).collect()
    }

    pub fn task(&self, allow_high_m: bool, tol: Option<f64>) -> Result<VerificationTask, CliError> {
        let grid = self.grid()?;
        if grid.is_empty() {
            return Err(CliError::Job("grid is empty".into()));
        }
        Ok(VerificationTask {
            word: self.word()?,
            grid,
            spec: self.spec(allow_high_m),
            probes: self.probes()?,
            contours: self.contours.clone(),
            tolerance: tol.or(self.tolerance),
        })
    }
}

impl PolyField {
    pub fn to_poly(&self) -> Result<UniPoly, CliError> {
        match self {
            PolyField::Text(s) => Ok(parse_poly(s)?),
            PolyField::Coeffs(cs) => {
                let coeffs = cs
                    .iter()
                    .map(|c| match c {
                        Coefficient::Int(n) => Ok(bispectral::GaussianRational::from_integer(*n)),
                        Coefficient::Text(s) => parse_gaussian(s).map_err(CliError::from),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(UniPoly::from_coeffs(coeffs))
            }
        }
    }
}

impl ComplexLit {
    pub fn value(&self) -> Result<Complex64, CliError> {
        match self {
            ComplexLit::Real(r) => Ok(Complex64::new(*r, 0.0)),
            ComplexLit::Parts { re, im } => Ok(Complex64::new(*re, *im)),
            ComplexLit::Text(s) => parse_complex(s),
        }
    }
}

impl Axis {
    fn points(&self) -> Result<Vec<Complex64>, CliError> {
        match self.n {
            0 => Err(CliError::Job("grid axis needs n >= 1".into())),
            1 => Ok(vec![Complex64::new(self.min, 0.0)]),
            n => {
                let step = (self.max - self.min) / (n - 1) as f64;
                Ok((0..n).map(|i| Complex64::new(self.min + step * i as f64, 0.0)).collect())
            }
        }
    }
}

/// Parses `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i`.
pub fn parse_complex(text: &str) -> Result<Complex64, CliError> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || CliError::Job(format!("invalid complex literal '{text}'"));
    let float = |t: &str| t.parse::<f64>().map_err(|_| bad());
    let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) else {
        return Ok(Complex64::new(float(&s)?, 0.0));
    };
    // split at the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (float(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => float(t)?,
    };
    Ok(Complex64::new(re, im))
}
