//! Serializable report shapes and text summaries.

use std::fmt::Write as _;

use bispectral::verify::{Identity, InconclusivePoint, ResidualEntry, SymmetryReport};
use bispectral::{BispectralQuadruple, Classification, VerificationReport};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OperatorsJson {
    #[serde(rename = "L")]
    pub l: String,
    #[serde(rename = "Lambda")]
    pub lambda: String,
    #[serde(rename = "D")]
    pub d: String,
    #[serde(rename = "Delta")]
    pub delta: String,
}

impl From<&BispectralQuadruple> for OperatorsJson {
    fn from(q: &BispectralQuadruple) -> Self {
        let [l, lambda, d, delta] = q.canonical_strings().map(|(_, s)| s);
        Self { l, lambda, d, delta }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationJson {
    pub verdict: String,
    pub detail: String,
    pub matrix: Option<[[String; 2]; 2]>,
    pub determinant: Option<String>,
}

impl From<&Classification> for ClassificationJson {
    fn from(c: &Classification) -> Self {
        Self {
            verdict: c.verdict.to_string(),
            detail: c.detail.clone(),
            matrix: c.matrix.as_ref().map(|m| m.clone().map(|row| row.map(|v| v.to_string()))),
            determinant: c.determinant().map(|d| d.to_string()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportJson {
    pub classification: ClassificationJson,
    pub operators: OperatorsJson,
    pub residuals: Vec<ResidualEntry>,
    pub inconclusive: Vec<InconclusivePoint>,
    pub tolerance: f64,
    pub max_residual: f64,
    pub pass: bool,
}

impl From<&VerificationReport> for ReportJson {
    fn from(r: &VerificationReport) -> Self {
        Self {
            classification: (&r.classification).into(),
            operators: (&r.operators).into(),
            residuals: r.residuals.clone(),
            inconclusive: r.inconclusive.clone(),
            tolerance: r.tolerance,
            max_residual: r.max_residual(),
            pass: r.pass,
        }
    }
}

/// `x_re,x_im,z_re,z_im,identity,residual,scale`
pub fn residual_csv(r: &VerificationReport) -> String {
    let mut s = String::from("x_re,x_im,z_re,z_im,identity,residual,scale\n");
    for e in &r.residuals {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{:e},{:e}",
            e.x.re, e.x.im, e.z.re, e.z.im, e.identity, e.residual, e.scale
        );
    }
    s
}

pub fn summary(r: &VerificationReport) -> String {
    let mut ids: Vec<Identity> = r.residuals.iter().map(|e| e.identity).collect();
    ids.sort();
    ids.dedup();
    let mut s = String::new();
    let _ = writeln!(s, "classification: {}", r.classification.verdict);
    for id in ids {
        let _ = writeln!(s, "{id:>8}: max residual {:.3e}", r.max_residual_for(id));
    }
    if !r.inconclusive.is_empty() {
        let _ = writeln!(s, "inconclusive points: {}", r.inconclusive.len());
    }
    let _ = write!(
        s,
        "{} (tolerance {:.1e})",
        if r.pass { "PASS" } else { "FAIL" },
        r.tolerance
    );
    s
}

pub const SYMMETRY_TOL: f64 = 1e-8;
pub const WITNESS_MIN: f64 = 1e-3;
pub const EXPECTED_RANK: usize = 3;
pub const GAP_MIN: f64 = 1e3;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryJson {
    #[serde(flatten)]
    pub report: SymmetryReport,
    pub pass: bool,
}

impl From<&SymmetryReport> for SymmetryJson {
    fn from(r: &SymmetryReport) -> Self {
        let sym = ["psi11", "psi22", "psi12+psi21"]
            .iter()
            .all(|n| r.defect(n).is_some_and(|d| d <= SYMMETRY_TOL));
        let pass = sym
            && r.transpose_defect <= SYMMETRY_TOL
            && r.witness > WITNESS_MIN
            && r.rank == EXPECTED_RANK
            && r.gap >= GAP_MIN;
        Self { report: r.clone(), pass }
    }
}

pub fn symmetry_summary(j: &SymmetryJson) -> String {
    let r = &j.report;
    let mut s = String::new();
    for (name, d) in &r.defects {
        let _ = writeln!(s, "{name:>12} symmetry defect {d:.3e}");
    }
    let _ = writeln!(s, "transpose defect {:.3e}", r.transpose_defect);
    let _ = writeln!(s, "psi12 asymmetry at (0.7, -0.3): {:.3e}", r.witness);
    let sv: Vec<String> = r.singular_values.iter().map(|v| format!("{v:.3e}")).collect();
    let _ = writeln!(s, "singular values [{}], rank {}, gap {:.3e}", sv.join(", "), r.rank, r.gap);
    let _ = write!(s, "{}", if j.pass { "PASS" } else { "FAIL" });
    s
}
