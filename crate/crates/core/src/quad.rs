//! Numerical evaluation of the eigenfunction
//!
//! ```text
//! psi_m(x, z) = int ... int exp( sum_{s=0}^{m} (u_{s+1} - u_s) v_s - p_s(u_s) - q_s(v_s) ) du_1 dv_1 ... du_m dv_m
//! ```
//!
//! with `u_{m+1} = x`, `v_0 = z`, `u_0 = p_0 = q_0 = 0`, each variable running
//! over the two-ray contour of its polynomial.
//!
//! Every ray is truncated at a length `T` and discretized with composite
//! Gauss-Legendre panels graded geometrically toward 0. The exponent couples
//! only neighbouring variables (`z u_1`, `u_1 v_1`, `v_1 u_2`, ..., `v_m x`),
//! so the tensor-product sum over all `N^{2m}` node tuples factorizes into a
//! chain of `2m - 1` matrix-vector products with kernels `exp(-/+ u v)`. The
//! chain computes exactly the tensor-product quadrature, at `O(m N^2)` cost.
//!
//! Each polynomial's decay `exp(-f)` is split evenly between the two kernels
//! adjacent to its layer so kernel entries never overflow.
//!
//! Derivatives are moment insertions: `d/dz` multiplies the integrand by
//! `u_1`, `d/dx` by `v_m`. The truncation length is doubled until the result
//! is stable to `rel_tol`.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex};

use gauss_quad::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::automorphism::AutomorphismWord;
use crate::contour::{convergence_check, ContourPlan};
use crate::error::QuadError;
use crate::poly::{horner, UniPoly};
use crate::weyl::WeylElement;

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Powers of `u_1` (`j`, realizes `d/dz`) and `v_m` (`k`, realizes `d/dx`)
/// inserted into the integrand.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Moment {
    pub j: u32,
    pub k: u32,
}

impl Moment {
    pub const PLAIN: Moment = Moment { j: 0, k: 0 };

    pub fn new(j: u32, k: u32) -> Self {
        Self { j, k }
    }
}

/// Data of the integral representation for a word: polynomials, contour
/// plan and the inserted moment.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegralRep {
    pub p: Vec<UniPoly>,
    pub q: Vec<UniPoly>,
    pub plan: ContourPlan,
    pub moment: Moment,
}

impl IntegralRep {
    /// Builds the representation of `word` with default contours `(1, 0)`
    /// unless per-layer overrides are supplied.
    pub fn new(word: &AutomorphismWord, contours: Option<&[(i64, i64)]>) -> Result<Self, QuadError> {
        convergence_check(word).map_err(QuadError::Divergent)?;
        let plan = ContourPlan::for_word(word, contours)?;
        let (p, q) = word.pairs().into_iter().unzip();
        Ok(Self { p, q, plan, moment: Moment::PLAIN })
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }

    pub fn with_moment(&self, moment: Moment) -> Self {
        Self { moment, ..self.clone() }
    }

    /// Polynomials in layer order `p_1, q_1, ..., p_m, q_m`.
    fn layer_polys(&self) -> Vec<&UniPoly> {
        self.p.iter().zip(&self.q).flat_map(|(p, q)| [p, q]).collect()
    }
}

/// Inserts one more `v_m`, i.e. differentiates once in `x`.
pub fn with_x_derivative(rep: &IntegralRep) -> IntegralRep {
    rep.with_moment(Moment::new(rep.moment.j, rep.moment.k + 1))
}

/// Inserts one more `u_1`, i.e. differentiates once in `z`.
pub fn with_z_derivative(rep: &IntegralRep) -> IntegralRep {
    rep.with_moment(Moment::new(rep.moment.j + 1, rep.moment.k))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureSpec {
    pub nodes_per_panel: usize,
    pub panels: usize,
    /// Ratio between consecutive panel edges, panel edges sit at `T r^i`.
    pub grading: f64,
    /// Starting truncation length; automatic when `None`.
    pub truncation: Option<f64>,
    pub rel_tol: f64,
    pub max_doublings: u32,
    /// Largest admissible `|x|`, `|z|`; `None` lifts the restriction.
    pub max_abs_arg: Option<f64>,
    /// Permit `m > 2`.
    pub allow_high_m: bool,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            nodes_per_panel: 24,
            panels: 12,
            grading: 0.5,
            truncation: None,
            rel_tol: 1e-10,
            max_doublings: 6,
            max_abs_arg: Some(1.5),
            allow_high_m: false,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), QuadError> {
        let bad = |msg: &str| Err(QuadError::InvalidSpec(msg.to_string()));
        if self.nodes_per_panel == 0 || self.panels == 0 {
            return bad("nodes_per_panel and panels must be positive");
        }
        if !(self.grading > 0.0 && self.grading < 1.0) {
            return bad("grading must lie in (0, 1)");
        }
        if let Some(t) = self.truncation {
            if !(t.is_finite() && t > 0.0) {
                return bad("truncation must be positive and finite");
            }
        }
        if self.rel_tol.is_nan() || self.rel_tol <= 0.0 {
            return bad("rel_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    pub value: C64,
    /// Relative change between the last two truncation lengths.
    pub est_error: f64,
}

/// Multiplies the integrand by `poly(w)` where `w` is the variable of `layer`.
#[derive(Clone, Debug, PartialEq)]
pub struct Insertion {
    pub layer: usize,
    pub poly: Vec<C64>,
}

impl Insertion {
    pub fn power(layer: usize, k: u32) -> Self {
        let mut poly = vec![ZERO; k as usize + 1];
        poly[k as usize] = ONE;
        Self { layer, poly }
    }

    pub fn poly(layer: usize, p: &UniPoly) -> Self {
        Self { layer, poly: p.to_complex() }
    }
}

/// A linear functional of the integrand: `coeff * int (prod insertions) e^E`.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    pub insertions: Vec<Insertion>,
}

struct LayerGrid {
    nodes: Vec<C64>,
    weights: Vec<C64>,
    /// `-f(node) / 2`
    half_decay: Vec<C64>,
}

/// Nodes, weights and coupling kernels for one set of truncation lengths.
pub struct Discretization {
    layers: Vec<LayerGrid>,
    /// `kernels[l][k * n_l + i]` couples node `i` of layer `l` to node `k` of layer `l + 1`.
    kernels: Vec<Vec<C64>>,
}

impl Discretization {
    fn build(rep: &IntegralRep, rule: &[(f64, f64)], spec: &QuadratureSpec, lengths: &[f64]) -> Self {
        let polys = rep.layer_polys();
        let layers: Vec<LayerGrid> = polys
            .iter()
            .zip(&rep.plan.pairs)
            .zip(lengths)
            .map(|((poly, pair), &len)| {
                let coeffs = poly.to_complex();
                let ts = panel_rule(rule, spec, len);
                let mut nodes = Vec::with_capacity(2 * ts.len());
                let mut weights = Vec::with_capacity(2 * ts.len());
                for ray in pair.rays() {
                    let sign = ray.orientation.sign();
                    for &(t, w) in &ts {
                        nodes.push(ray.direction * t);
                        weights.push(ray.direction * (sign * w));
                    }
                }
                let half_decay = nodes.iter().map(|&u| -0.5 * horner(&coeffs, u)).collect();
                LayerGrid { nodes, weights, half_decay }
            })
            .collect();
        let kernels = (0..layers.len().saturating_sub(1))
            .map(|l| {
                // u_s v_s enters with a minus sign, v_s u_{s+1} with a plus sign
                let sign = if l % 2 == 0 { -1.0 } else { 1.0 };
                let (a, b) = (&layers[l], &layers[l + 1]);
                let n = a.nodes.len();
                let mut k = vec![ZERO; n * b.nodes.len()];
                k.par_chunks_mut(n).enumerate().for_each(|(row, out)| {
                    let v = b.nodes[row];
                    let hv = b.half_decay[row];
                    for (i, slot) in out.iter_mut().enumerate() {
                        *slot = (sign * a.nodes[i] * v + a.half_decay[i] + hv).exp();
                    }
                });
                k
            })
            .collect();
        Self { layers, kernels }
    }

    fn multiplier(&self, layer: usize, insertions: &[Insertion]) -> Option<Vec<C64>> {
        let mut out: Option<Vec<C64>> = None;
        for ins in insertions.iter().filter(|i| i.layer == layer) {
            let vals = self.layers[layer].nodes.iter().map(|&u| horner(&ins.poly, u));
            match &mut out {
                None => out = Some(vals.collect()),
                Some(acc) => acc.iter_mut().zip(vals).for_each(|(a, v)| *a *= v),
            }
        }
        out
    }

    /// Runs the chain up to the last layer, returning per-node values that
    /// still lack the final coupling `exp(x v_m - q_m(v_m)/2)`.
    fn forward(&self, z: C64, insertions: &[Insertion]) -> Vec<C64> {
        let first = &self.layers[0];
        let mut vec: Vec<C64> = (0..first.nodes.len())
            .map(|i| first.weights[i] * (first.nodes[i] * z + first.half_decay[i]).exp())
            .collect();
        if let Some(mult) = self.multiplier(0, insertions) {
            vec.iter_mut().zip(mult).for_each(|(a, m)| *a *= m);
        }
        for (l, kernel) in self.kernels.iter().enumerate() {
            let next = &self.layers[l + 1];
            let n = vec.len();
            let mut out: Vec<C64> = kernel
                .par_chunks(n)
                .enumerate()
                .map(|(row, krow)| {
                    let s: C64 = krow.iter().zip(&vec).map(|(k, a)| k * a).sum();
                    s * next.weights[row]
                })
                .collect();
            if let Some(mult) = self.multiplier(l + 1, insertions) {
                out.iter_mut().zip(mult).for_each(|(a, m)| *a *= m);
            }
            vec = out;
        }
        vec
    }

    fn finish(&self, partial: &[C64], x: C64, k: u32) -> C64 {
        let last = self.layers.last().expect("at least one layer");
        partial
            .iter()
            .zip(&last.nodes)
            .zip(&last.half_decay)
            .map(|((a, &v), &h)| a * v.powu(k) * (x * v + h).exp())
            .sum()
    }
}

/// Composite Gauss-Legendre nodes on `[0, len]`, panel edges at `len * r^i`.
fn panel_rule(rule: &[(f64, f64)], spec: &QuadratureSpec, len: f64) -> Vec<(f64, f64)> {
    let mut edges = vec![0.0];
    for i in (0..spec.panels).rev() {
        edges.push(len * spec.grading.powi(i as i32));
    }
    let mut out = Vec::with_capacity(rule.len() * spec.panels);
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        out.extend(rule.iter().map(|&(x, wt)| (mid + half * x, half * wt)));
    }
    out
}

fn relative_change(old: &[C64], new: &[C64]) -> f64 {
    let diff = old.iter().zip(new).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = new.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Reusable evaluator for one integral representation and quadrature
/// specification. Discretizations are cached per truncation length, so
/// evaluating many points that share a length reuses the kernels.
pub struct PsiEvaluator {
    rep: IntegralRep,
    spec: QuadratureSpec,
    rule: Vec<(f64, f64)>,
    cache: Mutex<HashMap<Vec<u64>, Arc<Discretization>>>,
}

impl PsiEvaluator {
    pub fn new(rep: &IntegralRep, spec: &QuadratureSpec) -> Result<Self, QuadError> {
        spec.validate()?;
        let m = rep.m();
        if m > 2 {
            if !spec.allow_high_m {
                return Err(QuadError::DimensionCap(m));
            }
            log::warn!("m = {m}: {}-dimensional quadrature, cost grows with every layer", 2 * m);
        }
        let gl = GaussLegendre::new(NonZeroUsize::new(spec.nodes_per_panel).expect("validated"));
        let rule = gl.iter().map(|(x, w)| (*x, *w)).collect();
        Ok(Self { rep: rep.clone(), spec: spec.clone(), rule, cache: Mutex::new(HashMap::new()) })
    }

    pub fn rep(&self) -> &IntegralRep {
        &self.rep
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn m(&self) -> usize {
        self.rep.m()
    }

    fn check_domain(&self, x: C64, z: C64) -> Result<(), QuadError> {
        if let Some(limit) = self.spec.max_abs_arg {
            for (which, v) in [("x", x), ("z", z)] {
                if v.norm() > limit {
                    return Err(QuadError::OutOfDomain { which, value: v.norm(), limit });
                }
            }
        }
        Ok(())
    }

    /// Starting truncation length per layer.
    fn initial_lengths(&self, x: C64, z: C64) -> Vec<f64> {
        self.rep
            .layer_polys()
            .iter()
            .zip(&self.rep.plan.pairs)
            .map(|(poly, pair)| {
                if let Some(t) = self.spec.truncation {
                    return t;
                }
                let coeffs = poly.to_complex();
                let lead = coeffs.last().map(|c| c.norm()).unwrap_or(1.0);
                let ratio = coeffs[..coeffs.len() - 1].iter().map(|c| c.norm() / lead).fold(0.0, f64::max);
                let scale = 1f64.max(x.norm()).max(z.norm()).max(ratio);
                let n = pair.n as f64;
                4.0 * scale.powf(1.0 / (n - 1.0)) / pair.alpha.norm()
            })
            .collect()
    }

    fn discretization(&self, lengths: &[f64]) -> Arc<Discretization> {
        let key: Vec<u64> = lengths.iter().map(|t| t.to_bits()).collect();
        if let Some(d) = self.cache.lock().expect("cache poisoned").get(&key) {
            return d.clone();
        }
        let d = Arc::new(Discretization::build(&self.rep, &self.rule, &self.spec, lengths));
        self.cache.lock().expect("cache poisoned").insert(key, d.clone());
        d
    }

    /// Runs `f` on successively doubled truncation lengths until the output
    /// vector stabilizes.
    fn ladder<F>(&self, x: C64, z: C64, f: F) -> Result<(Vec<C64>, f64), QuadError>
    where
        F: Fn(&Discretization) -> Vec<C64>,
    {
        let base = self.initial_lengths(x, z);
        let at = |d: u32| {
            let lengths: Vec<f64> = base.iter().map(|t| t * f64::from(1u32 << d)).collect();
            f(&self.discretization(&lengths))
        };
        let mut prev = at(0);
        let mut est = f64::INFINITY;
        for d in 1..=self.spec.max_doublings {
            let cur = at(d);
            est = relative_change(&prev, &cur);
            if est <= self.spec.rel_tol {
                return Ok((cur, est));
            }
            prev = cur;
        }
        Err(QuadError::TruncationFailure {
            est_error: est,
            rel_tol: self.spec.rel_tol,
            doublings: self.spec.max_doublings,
        })
    }

    /// Evaluates several moments (on top of the representation's own moment)
    /// sharing one truncation ladder.
    pub fn moments(&self, x: C64, z: C64, moments: &[Moment]) -> Result<Vec<EvalResult>, QuadError> {
        self.check_domain(x, z)?;
        let base = self.rep.moment;
        let shifted: Vec<Moment> =
            moments.iter().map(|mo| Moment::new(mo.j + base.j, mo.k + base.k)).collect();
        if self.m() == 0 {
            return Ok(shifted
                .iter()
                .map(|&mo| EvalResult { value: exp_moment(x, z, mo), est_error: 0.0 })
                .collect());
        }
        let (values, est) = self.ladder(x, z, |disc| {
            let mut by_j: HashMap<u32, Vec<C64>> = HashMap::new();
            shifted
                .iter()
                .map(|mo| {
                    let partial = by_j
                        .entry(mo.j)
                        .or_insert_with(|| disc.forward(z, &[Insertion::power(0, mo.j)]));
                    disc.finish(partial, x, mo.k)
                })
                .collect()
        })?;
        Ok(values.into_iter().map(|value| EvalResult { value, est_error: est }).collect())
    }

    /// `psi` with the representation's moment.
    pub fn eval(&self, x: C64, z: C64) -> Result<EvalResult, QuadError> {
        Ok(self.moments(x, z, &[Moment::PLAIN])?[0])
    }

    /// Evaluates arbitrary insertion functionals (the representation's own
    /// moment is ignored). Only defined for `m >= 1`.
    pub fn functionals(&self, x: C64, z: C64, fs: &[Functional]) -> Result<(Vec<C64>, f64), QuadError> {
        self.check_domain(x, z)?;
        assert!(self.m() >= 1, "insertion functionals need at least one integration layer");
        self.ladder(x, z, |disc| {
            fs.iter()
                .map(|f| {
                    let partial = disc.forward(z, &f.insertions);
                    disc.finish(&partial, x, 0)
                })
                .collect()
        })
    }

    /// Residuals of the two integration-by-parts identities in the last pair
    /// of variables, normalized as `|lhs - rhs| / (|psi| + max(|lhs|, |rhs|))`.
    ///
    /// `d/du_m`: `int (v_{m-1} - v_m - p_m'(u_m)) e^E = 0` (with `v_0 = z`).
    /// `d/dv_m`: `int (x - u_m - q_m'(v_m)) e^E = 0`.
    pub fn ibp_residuals(&self, x: C64, z: C64) -> Result<IbpResiduals, QuadError> {
        let m = self.m();
        assert!(m >= 1, "integration by parts needs at least one integration layer");
        let (lu, lv) = (2 * m - 2, 2 * m - 1);
        let pm = self.rep.p[m - 1].derivative();
        let qm = self.rep.q[m - 1].derivative();
        let f = |ins: Vec<Insertion>| Functional { insertions: ins };
        let mut fs = vec![
            f(vec![]),
            f(vec![Insertion::power(lv, 1)]),
            f(vec![Insertion::poly(lu, &pm)]),
            f(vec![Insertion::power(lu, 1)]),
            f(vec![Insertion::poly(lv, &qm)]),
        ];
        if m > 1 {
            fs.push(f(vec![Insertion::power(lu - 1, 1)]));
        }
        let (vals, _) = self.functionals(x, z, &fs)?;
        let psi = vals[0];
        let prev_v = if m > 1 { vals[5] } else { z * psi };
        let norm = |lhs: C64, rhs: C64| (lhs - rhs).norm() / (psi.norm() + lhs.norm().max(rhs.norm()));
        Ok(IbpResiduals {
            du: norm(vals[1] + vals[2], prev_v),
            dv: norm(vals[3] + vals[4], x * psi),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IbpResiduals {
    /// Identity from integrating `d/du_m` of the integrand.
    pub du: f64,
    /// Identity from integrating `d/dv_m` of the integrand.
    pub dv: f64,
}

/// `d_z^j d_x^k e^{xz} = sum_i C(j,i) k!/(k-i)! x^{j-i} z^{k-i} e^{xz}`.
fn exp_moment(x: C64, z: C64, mo: Moment) -> C64 {
    let mut acc = ZERO;
    let mut binom = 1.0;
    let mut falling = 1.0;
    for i in 0..=mo.j.min(mo.k) {
        if i > 0 {
            binom *= f64::from(mo.j - i + 1) / f64::from(i);
            falling *= f64::from(mo.k - i + 1);
        }
        acc += binom * falling * x.powu(mo.j - i) * z.powu(mo.k - i);
    }
    acc * (x * z).exp()
}

/// One-shot evaluation of `psi` (with the representation's moment).
pub fn eval_psi(rep: &IntegralRep, x: C64, z: C64, spec: &QuadratureSpec) -> Result<EvalResult, QuadError> {
    PsiEvaluator::new(rep, spec)?.eval(x, z)
}

/// Which variable an operator acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    X,
    Z,
}

/// Applies `P` (in `x, D_x` or `z, D_z`) to `psi` through moment insertion.
pub fn apply_operator_with(
    eval: &PsiEvaluator,
    side: Side,
    p: &WeylElement,
    x: C64,
    z: C64,
) -> Result<EvalResult, QuadError> {
    let terms: Vec<((u32, u32), C64)> = p.terms().map(|(&k, c)| (k, c.to_complex64())).collect();
    let moments: Vec<Moment> = terms
        .iter()
        .map(|&((_, b), _)| match side {
            Side::X => Moment::new(0, b),
            Side::Z => Moment::new(b, 0),
        })
        .collect();
    let vals = eval.moments(x, z, &moments)?;
    let var = match side {
        Side::X => x,
        Side::Z => z,
    };
    let value = terms.iter().zip(&vals).map(|(&((a, _), c), r)| c * var.powu(a) * r.value).sum();
    let est_error = vals.iter().map(|r| r.est_error).fold(0.0, f64::max);
    Ok(EvalResult { value, est_error })
}

/// `P(x, D_x) psi(x, z)`.
pub fn apply_operator_x(
    p: &WeylElement,
    rep: &IntegralRep,
    x: C64,
    z: C64,
    spec: &QuadratureSpec,
) -> Result<EvalResult, QuadError> {
    apply_operator_with(&PsiEvaluator::new(rep, spec)?, Side::X, p, x, z)
}

/// `Q(z, D_z) psi(x, z)`.
pub fn apply_operator_z(
    q: &WeylElement,
    rep: &IntegralRep,
    x: C64,
    z: C64,
    spec: &QuadratureSpec,
) -> Result<EvalResult, QuadError> {
    apply_operator_with(&PsiEvaluator::new(rep, spec)?, Side::Z, q, x, z)
}
