//! Numerical certification of the eigenfunction identities on a grid.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::{anti_isomorphism, bispectral_quadruple, classify, AutomorphismWord, BispectralQuadruple, Classification};
use crate::error::QuadError;
use crate::gaussian::GaussianRational;
use crate::poly::UniPoly;
use crate::quad::{IntegralRep, Moment, PsiEvaluator, QuadratureSpec};
use crate::weyl::WeylElement;

type C64 = Complex64;

/// `{re, im}` form of a complex number for reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for ComplexValue {
    fn from(c: C64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

/// The grid `{-1, -0.5, 0, 0.5, 1}^2`.
pub fn default_grid() -> Vec<(C64, C64)> {
    let pts = [-1.0, -0.5, 0.0, 0.5, 1.0];
    pts.iter()
        .flat_map(|&x| pts.iter().map(move |&z| (C64::new(x, 0.0), C64::new(z, 0.0))))
        .collect()
}

/// Default pass tolerance for a word with `m` factor pairs.
pub fn default_tolerance(m: usize) -> f64 {
    if m <= 1 {
        1e-6
    } else {
        1e-4
    }
}

/// `|lhs - rhs| / (|psi| + max(|lhs|, |rhs|))`, zero when everything vanishes.
pub fn normalized_residual(lhs: C64, rhs: C64, psi: C64) -> f64 {
    let den = psi.norm() + lhs.norm().max(rhs.norm());
    let diff = (lhs - rhs).norm();
    if den == 0.0 {
        diff
    } else {
        diff / den
    }
}

#[derive(Clone, Debug)]
pub struct VerificationTask {
    pub word: AutomorphismWord,
    pub grid: Vec<(C64, C64)>,
    pub spec: QuadratureSpec,
    /// Extra operators `P(x, D)` checked through `P psi = b(P) psi`.
    pub probes: Vec<WeylElement>,
    pub contours: Option<Vec<(i64, i64)>>,
    /// Pass threshold; [`default_tolerance`] when `None`.
    pub tolerance: Option<f64>,
}

impl VerificationTask {
    pub fn new(word: AutomorphismWord) -> Self {
        Self {
            word,
            grid: default_grid(),
            spec: QuadratureSpec::default(),
            probes: Vec::new(),
            contours: None,
            tolerance: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Identity {
    /// `L psi = z psi`
    L,
    /// `Lambda psi = x psi`
    Lambda,
    /// `D psi = d_z psi`
    D,
    /// `Delta psi = d_x psi`
    Delta,
    /// `P psi = b(P) psi` for the i-th probe.
    Probe(usize),
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identity::L => f.write_str("L"),
            Identity::Lambda => f.write_str("Lambda"),
            Identity::D => f.write_str("D"),
            Identity::Delta => f.write_str("Delta"),
            Identity::Probe(i) => write!(f, "probe{i}"),
        }
    }
}

impl Serialize for Identity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualEntry {
    pub x: ComplexValue,
    pub z: ComplexValue,
    pub identity: Identity,
    pub residual: f64,
    /// `|psi|` at the point.
    pub scale: f64,
    pub est_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InconclusivePoint {
    pub x: ComplexValue,
    pub z: ComplexValue,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub residuals: Vec<ResidualEntry>,
    pub inconclusive: Vec<InconclusivePoint>,
    pub classification: Classification,
    pub operators: BispectralQuadruple,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerificationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|r| r.residual).fold(0.0, f64::max)
    }

    pub fn max_residual_for(&self, id: Identity) -> f64 {
        self.residuals.iter().filter(|r| r.identity == id).map(|r| r.residual).fold(0.0, f64::max)
    }
}

/// An operator split into `(power of the variable, moment, coefficient)`.
struct Expanded {
    terms: Vec<(u32, Moment, C64)>,
}

impl Expanded {
    fn x_side(p: &WeylElement) -> Self {
        Self { terms: p.terms().map(|(&(a, b), c)| (a, Moment::new(0, b), c.to_complex64())).collect() }
    }

    fn z_side(p: &WeylElement) -> Self {
        Self { terms: p.terms().map(|(&(a, b), c)| (a, Moment::new(b, 0), c.to_complex64())).collect() }
    }

    fn eval(&self, var: C64, table: &[(Moment, C64)]) -> C64 {
        self.terms
            .iter()
            .map(|&(a, mo, c)| {
                let v = table.iter().find(|(m, _)| *m == mo).expect("moment in table").1;
                c * var.powu(a) * v
            })
            .sum()
    }
}

/// Checks every identity of the word's quadruple (and the probes) at each
/// grid point. Points whose truncation ladder fails are reported as
/// inconclusive; other evaluation errors abort.
pub fn verify_bispectral(task: &VerificationTask) -> Result<VerificationReport, QuadError> {
    let rep = IntegralRep::new(&task.word, task.contours.as_deref())?;
    let eval = PsiEvaluator::new(&rep, &task.spec)?;
    let ops = bispectral_quadruple(&task.word);
    let tolerance = task.tolerance.unwrap_or_else(|| default_tolerance(task.word.m()));

    let mut checks: Vec<(Identity, Expanded, Expanded)> = vec![
        (Identity::L, Expanded::x_side(&ops.l), Expanded::z_side(&WeylElement::x())),
        (Identity::Lambda, Expanded::z_side(&ops.lambda), Expanded::x_side(&WeylElement::x())),
        (Identity::D, Expanded::x_side(&ops.d), Expanded::z_side(&WeylElement::d())),
        (Identity::Delta, Expanded::z_side(&ops.delta), Expanded::x_side(&WeylElement::d())),
    ];
    for (i, p) in task.probes.iter().enumerate() {
        let bp = anti_isomorphism(&task.word, p);
        checks.push((Identity::Probe(i), Expanded::x_side(p), Expanded::z_side(&bp)));
    }
    // the right-hand sides above are written as operators in the other variable
    // so both sides share one moment table
    let moments: Vec<Moment> = checks
        .iter()
        .flat_map(|(_, l, r)| l.terms.iter().chain(&r.terms).map(|t| t.1))
        .chain([Moment::PLAIN])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let per_point: Vec<Result<Result<Vec<ResidualEntry>, InconclusivePoint>, QuadError>> = task
        .grid
        .par_iter()
        .map(|&(x, z)| {
            let vals = match eval.moments(x, z, &moments) {
                Ok(v) => v,
                Err(QuadError::TruncationFailure { est_error, rel_tol, doublings }) => {
                    return Ok(Err(InconclusivePoint {
                        x: x.into(),
                        z: z.into(),
                        reason: format!(
                            "truncation failure: relative change {est_error:.3e} > {rel_tol:.3e} after {doublings} doublings"
                        ),
                    }))
                }
                Err(e) => return Err(e),
            };
            let table: Vec<(Moment, C64)> = moments.iter().copied().zip(vals.iter().map(|r| r.value)).collect();
            let est = vals.iter().map(|r| r.est_error).fold(0.0, f64::max);
            let psi = table.iter().find(|(m, _)| *m == Moment::PLAIN).expect("plain moment").1;
            Ok(Ok(checks
                .iter()
                .map(|(id, lhs_op, rhs_op)| {
                    let (lhs_var, rhs_var) = match id {
                        Identity::L | Identity::D | Identity::Probe(_) => (x, z),
                        Identity::Lambda | Identity::Delta => (z, x),
                    };
                    let lhs = lhs_op.eval(lhs_var, &table);
                    let rhs = rhs_op.eval(rhs_var, &table);
                    ResidualEntry {
                        x: x.into(),
                        z: z.into(),
                        identity: *id,
                        residual: normalized_residual(lhs, rhs, psi),
                        scale: psi.norm(),
                        est_error: est,
                    }
                })
                .collect()))
        })
        .collect();

    let mut residuals = Vec::new();
    let mut inconclusive = Vec::new();
    for r in per_point {
        match r? {
            Ok(entries) => residuals.extend(entries),
            Err(p) => inconclusive.push(p),
        }
    }
    let pass = inconclusive.is_empty() && residuals.iter().all(|r| r.residual <= tolerance);
    Ok(VerificationReport {
        residuals,
        inconclusive,
        classification: classify(&task.word),
        operators: ops,
        tolerance,
        pass,
    })
}

/// The word `p_1 = q_1 = t^3 / 3`.
pub fn cubic_word() -> AutomorphismWord {
    let p = UniPoly::monomial(GaussianRational::from_ratio(1, 3), 3);
    AutomorphismWord::from_pairs([(p.clone(), p)])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymmetryReport {
    /// `sup |f(x,z) - f(z,x)| / max(|f(x,z)|, |f(z,x)|)` for `psi11`, `psi22`,
    /// `psi12`, `psi21` and `psi12+psi21`.
    pub defects: Vec<(String, f64)>,
    /// `sup |psi_kl(x,z) - psi_lk(z,x)|`, relative.
    pub transpose_defect: f64,
    /// Relative asymmetry of `psi12` at `(0.7, -0.3)`.
    pub witness: f64,
    /// Singular values of the column-normalized sample matrix of the
    /// symmetrized `psi_kl`, descending.
    pub singular_values: Vec<f64>,
    pub rank: usize,
    /// `s_rank / s_{rank+1}`; infinite at full rank.
    pub gap: f64,
}

impl SymmetryReport {
    pub fn defect(&self, name: &str) -> Option<f64> {
        self.defects.iter().find(|(n, _)| n == name).map(|d| d.1)
    }
}

const RANK_CUTOFF: f64 = 1e-6;

fn rel_diff(a: C64, b: C64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}

/// Twelve sample points in the unit square, none on the diagonal.
fn rank_sample() -> Vec<(C64, C64)> {
    (0..12)
        .map(|i| {
            let t = i as f64;
            (C64::new(-0.9 + 0.16 * t, 0.0), C64::new(0.85 * (1.3 * t + 0.4).sin(), 0.0))
        })
        .collect()
}

/// Symmetry properties of `psi_kl = int_{Gamma_k} int_{Gamma_l} exp(-u^3/3 - v^3/3 - uv + xv + uz) du dv`
/// where `Gamma_k` runs in from `e^{2 pi i k/3} R_+` and out along `R_+`.
pub fn symmetry_report(spec: &QuadratureSpec, grid: &[(C64, C64)]) -> Result<SymmetryReport, QuadError> {
    let word = cubic_word();
    let labels = [(1, 1), (2, 2), (1, 2), (2, 1)];
    let evals = labels
        .iter()
        .map(|&(k, l)| PsiEvaluator::new(&IntegralRep::new(&word, Some(&[(k, 0), (l, 0)]))?, spec))
        .collect::<Result<Vec<_>, _>>()?;
    let psi = |idx: usize, x: C64, z: C64| evals[idx].eval(x, z).map(|r| r.value);

    let mut points = grid.to_vec();
    let witness_pt = (C64::new(0.7, 0.0), C64::new(-0.3, 0.0));
    points.push(witness_pt);
    points.extend(rank_sample());

    // values[i][c] = (psi_c(x_i, z_i), psi_c(z_i, x_i))
    let values = points
        .par_iter()
        .map(|&(x, z)| (0..4).map(|c| Ok((psi(c, x, z)?, psi(c, z, x)?))).collect::<Result<Vec<_>, QuadError>>())
        .collect::<Result<Vec<_>, _>>()?;

    let on_grid = &values[..grid.len()];
    let sup = |f: fn(&[(C64, C64)]) -> f64| on_grid.iter().map(|v| f(v)).fold(0.0, f64::max);
    let mut defects: Vec<(String, f64)> = ["psi11", "psi22", "psi12", "psi21"]
        .iter()
        .enumerate()
        .map(|(c, name)| (name.to_string(), on_grid.iter().map(|v| rel_diff(v[c].0, v[c].1)).fold(0.0, f64::max)))
        .collect();
    defects.push(("psi12+psi21".into(), sup(|v| rel_diff(v[2].0 + v[3].0, v[2].1 + v[3].1))));
    let transpose_defect = sup(|v| rel_diff(v[2].0, v[3].1).max(rel_diff(v[3].0, v[2].1)));

    let w = &values[grid.len()][2];
    let witness = rel_diff(w.0, w.1);

    let sample = &values[grid.len() + 1..];
    let mut mat = DMatrix::from_fn(sample.len(), 4, |i, c| sample[i][c].0 + sample[i][c].1);
    for mut col in mat.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= C64::new(n, 0.0);
        }
    }
    let mut singular_values: Vec<f64> = mat.svd(false, false).singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let top = singular_values[0];
    let rank = singular_values.iter().filter(|&&s| s > RANK_CUTOFF * top).count();
    let gap = match (rank.checked_sub(1).map(|i| singular_values[i]), singular_values.get(rank)) {
        (Some(a), Some(&b)) if b > 0.0 => a / b,
        _ => f64::INFINITY,
    };
    Ok(SymmetryReport { defects, transpose_defect, witness, singular_values, rank, gap })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivativeCheck {
    /// Largest deviation of the `x`-moment from finite differences.
    pub max_dev_x: f64,
    /// Same for `z`.
    pub max_dev_z: f64,
}

impl DerivativeCheck {
    pub fn max(&self) -> f64 {
        self.max_dev_x.max(self.max_dev_z)
    }
}

pub const FD_STEP: f64 = 1e-3;

/// Richardson-extrapolated central difference, `O(h^4)`.
fn richardson<F>(f: F, h: f64) -> Result<C64, QuadError>
where
    F: Fn(f64) -> Result<C64, QuadError>,
{
    let central = |h: f64| -> Result<C64, QuadError> { Ok((f(h)? - f(-h)?) / (2.0 * h)) };
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Compares moment-inserted first derivatives with finite differences of
/// `psi`, normalized like the verification residuals.
pub fn cross_check_derivatives(
    rep: &IntegralRep,
    grid: &[(C64, C64)],
    spec: &QuadratureSpec,
) -> Result<DerivativeCheck, QuadError> {
    let eval = PsiEvaluator::new(rep, spec)?;
    let devs = grid
        .par_iter()
        .map(|&(x, z)| {
            let m = eval.moments(x, z, &[Moment::PLAIN, Moment::new(0, 1), Moment::new(1, 0)])?;
            let psi = m[0].value;
            let fd_x = richardson(|h| eval.eval(x + h, z).map(|r| r.value), FD_STEP)?;
            let fd_z = richardson(|h| eval.eval(x, z + h).map(|r| r.value), FD_STEP)?;
            Ok((normalized_residual(m[1].value, fd_x, psi), normalized_residual(m[2].value, fd_z, psi)))
        })
        .collect::<Result<Vec<_>, QuadError>>()?;
    Ok(DerivativeCheck {
        max_dev_x: devs.iter().map(|d| d.0).fold(0.0, f64::max),
        max_dev_z: devs.iter().map(|d| d.1).fold(0.0, f64::max),
    })
}
