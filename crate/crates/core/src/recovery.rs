//! Recovering signals from their samples.
//!
//! Sparse vectors are recovered by enumerating supports. Low-rank matrices and
//! lifted phase-retrieval signals use iterative hard thresholding (IHT) on the
//! real coordinates of the variety's space. Each IHT run is finished with a
//! damped Gauss-Newton (Levenberg-Marquardt) refinement in factored form, so
//! a run that lands in the right basin reaches machine precision.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample as sample_indices;
use rayon::prelude::*;
use serde::Serialize;

use crate::coords::CoordSpace;
use crate::error::{domain, Error, Result};
use crate::linalg::{frobenius, serialize_matrix, DenseMatrix, Field, HermitianEigen, Shape, SortedSvd, C64};
use crate::rng::{self, StreamRng};
use crate::sampling::{gaussian_element, gen_gaussian_matrices, gen_gaussian_vectors, lift_rank_one, MeasurementEnsemble, SampleVector};
use crate::varieties::{project, VarietyKind, VarietySpec};

/// Largest number of supports [`recover_sparse`] will enumerate.
pub const SUPPORT_BUDGET: usize = 1_000_000;

/// Relative error below which a sweep trial counts as a success.
pub const SUCCESS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryConfig {
    /// Converged means `residual <= tol_fit * ||y||`.
    pub tol_fit: f64,
    pub max_iters: usize,
    /// Restart when the residual improves by less than `stagnation_tol`
    /// (relative) over `stagnation_window` iterations.
    pub stagnation_window: usize,
    pub stagnation_tol: f64,
    pub restarts: usize,
    pub power_iters: usize,
    /// Levenberg-Marquardt steps after each IHT run (0 disables).
    pub polish_iters: usize,
    pub seed: u64,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            tol_fit: 1e-8,
            max_iters: 2000,
            stagnation_window: 20,
            stagnation_tol: 1e-12,
            restarts: 10,
            power_iters: 50,
            polish_iters: 200,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryOutcome {
    #[serde(serialize_with = "serialize_matrix")]
    pub estimate: DenseMatrix,
    /// `||apply(e, estimate) - y||` (with the lift applied for phase retrieval).
    pub residual: f64,
    pub equivalence_distance: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub restarts_used: usize,
    /// Another candidate fits the data equally well but differs.
    pub ambiguous: bool,
}

impl RecoveryOutcome {
    /// Fill in the distance to a known ground truth.
    pub fn with_truth(mut self, truth: &DenseMatrix, field: Field) -> Self {
        self.equivalence_distance = Some(equivalence_distance(&self.estimate, truth, field));
        self
    }
}

/// Distance modulo the scalar ambiguity of phase retrieval: `min ||x - c y||`
/// over `c = +-1` (real) or `|c| = 1` (complex).
pub fn equivalence_distance(x: &DenseMatrix, y: &DenseMatrix, field: Field) -> f64 {
    match field {
        Field::Real => frobenius(&(x - y)).min(frobenius(&(x + y))),
        Field::Complex => {
            // The minimizing phase aligns c y with x.
            let ip: C64 = x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum();
            let c = if ip.norm() == 0.0 { C64::new(1.0, 0.0) } else { ip / ip.norm() };
            frobenius(&(x - y.map(|v| v * c)))
        }
    }
}

/// Scale a vector by a unit scalar so its largest-magnitude entry (first one
/// on ties) is real and positive.
pub fn normalize_phase(x: &DenseMatrix) -> DenseMatrix {
    let mut best = 0;
    for i in 1..x.len() {
        if x[i].norm() > x[best].norm() {
            best = i;
        }
    }
    let p = x[best];
    if p.norm() == 0.0 {
        return x.clone();
    }
    let c = p.conj() / p.norm();
    x.map(|z| z * c)
}

fn check_samples(e: &MeasurementEnsemble, y: &SampleVector) -> Result<()> {
    if y.y.len() != e.m() {
        return Err(Error::Shape { expected: format!("{} samples", e.m()), found: y.y.len().to_string() });
    }
    if y.y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite("samples"));
    }
    Ok(())
}

fn sample_residual(e: &MeasurementEnsemble, x: &DenseMatrix, y: &SampleVector) -> f64 {
    e.apply_unchecked(x).iter().zip(&y.y).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt()
}

/// Try every support of size `k` and keep the least-squares fit with the
/// smallest residual.
pub fn recover_sparse(e: &MeasurementEnsemble, y: &SampleVector, k: usize, cfg: &RecoveryConfig) -> Result<RecoveryOutcome> {
    let d = match e.shape() {
        Shape::Vector(d) => d,
        Shape::Matrix(_) => return Err(domain("sparse recovery needs a vector ensemble")),
    };
    check_samples(e, y)?;
    if k > d {
        return Err(domain(format!("sparsity {k} exceeds dimension {d}")));
    }
    let supports = crate::injectivity::binomial(d, k);
    if supports > SUPPORT_BUDGET {
        return Err(Error::Budget(format!("{supports} supports exceed the enumeration budget of {SUPPORT_BUDGET}")));
    }
    let ynorm = y.norm();
    let zero = DenseMatrix::zeros(d, 1);
    if ynorm == 0.0 || k == 0 {
        let residual = sample_residual(e, &zero, y);
        return Ok(RecoveryOutcome {
            estimate: zero,
            residual,
            equivalence_distance: None,
            iterations: 0,
            converged: residual <= cfg.tol_fit * ynorm,
            restarts_used: 0,
            ambiguous: false,
        });
    }
    // y_j = sum_i a_ji conj(x_i), so conj(y) = conj(A) x.
    let m = e.m();
    let b = DMatrix::from_fn(m, d, |j, i| e.operators()[j][i].conj());
    let rhs = DenseMatrix::from_iterator(m, 1, y.y.iter().map(|z| z.conj()));
    let fit = |support: &[usize]| -> (f64, DenseMatrix) {
        let sub = DMatrix::from_fn(m, support.len(), |j, a| b[(j, support[a])]);
        let coef = SortedSvd::new(&sub).solve(&rhs, 1e-13);
        let mut x = DenseMatrix::zeros(d, 1);
        for (a, &i) in support.iter().enumerate() {
            x[i] = match e.field() {
                Field::Real => C64::new(coef[a].re, 0.0),
                Field::Complex => coef[a],
            };
        }
        (sample_residual(e, &x, y), x)
    };
    let fits: Vec<(f64, DenseMatrix)> = (0..d).combinations(k).map(|s| fit(&s)).collect();
    let (best_idx, _) = fits
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
        .expect("at least one support");
    let (residual, estimate) = fits[best_idx].clone();
    let threshold = cfg.tol_fit * ynorm;
    let gap = cfg.tol_fit * frobenius(&estimate).max(1.0);
    let ambiguous = fits.iter().any(|(r, x)| *r <= threshold && frobenius(&(x - &estimate)) > gap);
    Ok(RecoveryOutcome {
        estimate,
        residual,
        equivalence_distance: None,
        iterations: fits.len(),
        converged: residual <= threshold,
        restarts_used: 0,
        ambiguous,
    })
}

/// Low-dimensional factorizations used by the refinement step.
#[derive(Debug, Clone, Copy)]
enum Factored {
    /// `X = U V*`, with `U, V` of size `d x r`.
    Product { d: usize, r: usize, field: Field },
    /// `X = x x*`.
    Lift { d: usize, field: Field },
}

impl Factored {
    fn for_variety(w: &VarietySpec) -> Option<Factored> {
        match w.kind {
            VarietyKind::LowRank => Some(Factored::Product { d: w.d, r: w.k_or_r, field: w.field }),
            VarietyKind::LiftedPhase => Some(Factored::Lift { d: w.d, field: w.field }),
            _ => None,
        }
    }

    fn field(&self) -> Field {
        match *self {
            Factored::Product { field, .. } | Factored::Lift { field, .. } => field,
        }
    }

    fn unpack(&self, p: &[f64], n: usize, offset: usize) -> Vec<C64> {
        match self.field() {
            Field::Real => (0..n).map(|i| C64::new(p[offset + i], 0.0)).collect(),
            Field::Complex => (0..n).map(|i| C64::new(p[offset + 2 * i], p[offset + 2 * i + 1])).collect(),
        }
    }

    fn pack(&self, z: &[C64], out: &mut Vec<f64>) {
        for v in z {
            out.push(v.re);
            if self.field() == Field::Complex {
                out.push(v.im);
            }
        }
    }

    fn build(&self, p: &[f64]) -> DenseMatrix {
        match *self {
            Factored::Product { d, r, field } => {
                let per = if field == Field::Complex { 2 } else { 1 };
                let u = self.unpack(p, d * r, 0);
                let v = self.unpack(p, d * r, per * d * r);
                DenseMatrix::from_fn(d, d, |i, k| (0..r).map(|c| u[i * r + c] * v[k * r + c].conj()).sum())
            }
            Factored::Lift { d, .. } => {
                let x = DenseMatrix::from_vec(d, 1, self.unpack(p, d, 0));
                lift_rank_one(&x)
            }
        }
    }

    fn init(&self, x: &DenseMatrix) -> Vec<f64> {
        let mut p = Vec::new();
        match *self {
            Factored::Product { d, r, .. } => {
                let svd = SortedSvd::new(x);
                let mut u = vec![C64::new(0.0, 0.0); d * r];
                let mut v = vec![C64::new(0.0, 0.0); d * r];
                for c in 0..r.min(svd.singular_values.len()) {
                    let s = svd.sigma(c).sqrt();
                    for i in 0..d {
                        u[i * r + c] = svd.u[(i, c)] * s;
                        v[i * r + c] = svd.v_t[(c, i)].conj() * s;
                    }
                }
                self.pack(&u, &mut p);
                self.pack(&v, &mut p);
            }
            Factored::Lift { .. } => {
                let eig = HermitianEigen::new(x);
                let top = eig.vectors.column(0).scale(eig.values[0].max(0.0).sqrt());
                let top: Vec<C64> = top.iter().copied().collect();
                self.pack(&top, &mut p);
            }
        }
        p
    }
}

fn realify(z: &[C64]) -> DVector<f64> {
    DVector::from_iterator(2 * z.len(), z.iter().flat_map(|v| [v.re, v.im]))
}

/// Levenberg-Marquardt on `||apply(build(p)) - y||`. The residual is quadratic
/// in `p`, so central differences give its Jacobian up to rounding.
fn polish(e: &MeasurementEnsemble, y: &DVector<f64>, form: Factored, start: &DenseMatrix, iters: usize) -> (DenseMatrix, usize) {
    let residual = |p: &[f64]| realify(&e.apply_unchecked(&form.build(p))) - y;
    let mut p = form.init(start);
    let n = p.len();
    let mut r = residual(&p);
    let mut cost = r.norm_squared();
    let mut lambda = -1.0;
    let mut used = 0;
    let floor = (1e-15 * y.norm()).powi(2);
    for _ in 0..iters {
        if cost <= floor {
            break;
        }
        used += 1;
        let scale = (p.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt().max(1e-8);
        let h = 1e-4 * scale;
        let mut jac = DMatrix::zeros(y.len(), n);
        let mut q = p.clone();
        for k in 0..n {
            q[k] = p[k] + h;
            let plus = residual(&q);
            q[k] = p[k] - h;
            let minus = residual(&q);
            q[k] = p[k];
            jac.set_column(k, &((plus - minus) / (2.0 * h)));
        }
        let jtj = jac.tr_mul(&jac);
        let g = jac.tr_mul(&r);
        if lambda < 0.0 {
            lambda = 1e-3 * jtj.diagonal().max().max(1e-12);
        }
        let mut improved = false;
        while lambda < 1e20 {
            let a = &jtj + DMatrix::identity(n, n) * lambda;
            let Some(chol) = a.cholesky() else {
                lambda *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&g));
            let cand: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rc = residual(&cand);
            let cc = rc.norm_squared();
            if cc < cost {
                let small = step.norm() <= 1e-15 * (1.0 + scale);
                p = cand;
                r = rc;
                cost = cc;
                lambda = (lambda / 3.0).max(1e-30);
                improved = !small;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (form.build(&p), used)
}

struct LiftedProblem<'a> {
    e: &'a MeasurementEnsemble,
    w: VarietySpec,
    space: CoordSpace,
    /// Full realified operator: rows `2j` and `2j+1` are the real and
    /// imaginary parts of sample `j`.
    op: DMatrix<f64>,
    y: DVector<f64>,
    mu: f64,
}

impl<'a> LiftedProblem<'a> {
    fn new(e: &'a MeasurementEnsemble, y: &SampleVector, w: VarietySpec, power_iters: usize) -> LiftedProblem<'a> {
        let space = CoordSpace::for_variety(&w);
        let cols: Vec<DVector<f64>> = space.basis().iter().map(|b| realify(&e.apply_unchecked(b))).collect();
        let op = DMatrix::from_columns(&cols);
        let yr = realify(&y.y);
        // Power iteration on op^T op from a fixed start.
        let mut v = DVector::from_fn(space.dim(), |i, _| 1.0 + 0.01 * i as f64);
        v /= v.norm();
        let mut sigma2 = 0.0;
        for _ in 0..power_iters {
            let next = op.tr_mul(&(&op * &v));
            sigma2 = v.dot(&next);
            let n = next.norm();
            if n == 0.0 {
                break;
            }
            v = next / n;
        }
        let mu = if sigma2 > 0.0 { 1.0 / sigma2 } else { 0.0 };
        LiftedProblem { e, w, space, op, y: yr, mu }
    }

    fn residual(&self, c: &DVector<f64>) -> f64 {
        (&self.op * c - &self.y).norm()
    }

    fn project_coords(&self, c: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.space.to_coords(&project(&self.space.from_coords(c), &self.w)?))
    }

    /// Least-squares rescaling of a starting point.
    fn fit_scale(&self, c: DVector<f64>) -> DVector<f64> {
        let rc = &self.op * &c;
        let nn = rc.norm_squared();
        if nn == 0.0 {
            return c;
        }
        let t = rc.dot(&self.y) / nn;
        // Phase-retrieval lifts are PSD, so keep the scale positive there.
        if self.w.kind == VarietyKind::LiftedPhase && t < 0.0 {
            return c;
        }
        c * t
    }

    fn start(&self, restart: usize, seed: u64) -> Result<DVector<f64>> {
        let raw = if restart == 0 {
            self.op.tr_mul(&self.y)
        } else {
            let mut rng = rng::stream(seed, restart as u64);
            DVector::from_fn(self.space.dim(), |_, _| rng::normal(&mut rng))
        };
        Ok(self.fit_scale(self.project_coords(&raw)?))
    }

    /// One IHT run; returns the final iterate and the iteration count.
    fn iht(&self, mut c: DVector<f64>, cfg: &RecoveryConfig, target: f64) -> Result<(DVector<f64>, usize)> {
        let mut history = Vec::with_capacity(cfg.max_iters + 1);
        history.push(self.residual(&c));
        for it in 0..cfg.max_iters {
            if history[it] <= target {
                return Ok((c, it));
            }
            let grad = self.op.tr_mul(&(&self.y - &self.op * &c));
            c = self.project_coords(&(&c + grad * self.mu))?;
            let res = self.residual(&c);
            history.push(res);
            let w = cfg.stagnation_window;
            if it + 1 >= w {
                let old = history[it + 1 - w];
                if old - res < cfg.stagnation_tol * old {
                    return Ok((c, it + 1));
                }
            }
        }
        Ok((c, cfg.max_iters))
    }

    fn solve(&self, cfg: &RecoveryConfig) -> Result<RecoveryOutcome> {
        let ynorm = self.y.norm();
        let target = cfg.tol_fit * ynorm;
        let zero = self.space.shape.zeros();
        if ynorm == 0.0 {
            return Ok(RecoveryOutcome {
                estimate: zero,
                residual: 0.0,
                equivalence_distance: None,
                iterations: 0,
                converged: true,
                restarts_used: 0,
                ambiguous: false,
            });
        }
        let form = Factored::for_variety(&self.w);
        let mut best: Option<(f64, DenseMatrix)> = None;
        let mut iterations = 0;
        let budget = cfg.restarts.max(1);
        for restart in 0..budget {
            let start = self.start(restart, cfg.seed)?;
            // Factored descent straight from the start reaches basins that
            // IHT tends to funnel away from.
            if let Some(form) = form.filter(|_| cfg.polish_iters > 0 && restart > 0) {
                let (px, steps) = polish(self.e, &self.y, form, &self.space.from_coords(&start), cfg.polish_iters);
                iterations += steps;
                let res = (realify_apply(self.e, &px) - &self.y).norm();
                if best.as_ref().is_none_or(|b| res < b.0) {
                    best = Some((res, px));
                }
                if res <= target {
                    return Ok(finish(best, iterations, restart + 1, true));
                }
            }
            let (c, its) = self.iht(start, cfg, target)?;
            iterations += its;
            let mut x = self.space.from_coords(&c);
            if let Some(form) = form.filter(|_| cfg.polish_iters > 0) {
                let (px, steps) = polish(self.e, &self.y, form, &x, cfg.polish_iters);
                iterations += steps;
                if (realify_apply(self.e, &px) - &self.y).norm() < self.residual(&c) {
                    x = px;
                }
            }
            let res = (realify_apply(self.e, &x) - &self.y).norm();
            if best.as_ref().is_none_or(|b| res < b.0) {
                best = Some((res, x));
            }
            if res <= target {
                return Ok(finish(best, iterations, restart + 1, true));
            }
        }
        Ok(finish(best, iterations, budget, false))
    }
}

fn finish(best: Option<(f64, DenseMatrix)>, iterations: usize, restarts_used: usize, converged: bool) -> RecoveryOutcome {
    let (residual, estimate) = best.expect("at least one restart");
    RecoveryOutcome { estimate, residual, equivalence_distance: None, iterations, converged, restarts_used, ambiguous: false }
}

fn realify_apply(e: &MeasurementEnsemble, x: &DenseMatrix) -> DVector<f64> {
    realify(&e.apply_unchecked(x))
}

/// Rank-`r` matrix consistent with the samples, by IHT with restarts.
pub fn recover_low_rank(e: &MeasurementEnsemble, y: &SampleVector, r: usize, cfg: &RecoveryConfig) -> Result<RecoveryOutcome> {
    let w = VarietySpec::low_rank(e.d(), r, e.field())?;
    recover_on_variety(e, y, &w, cfg)
}

/// IHT on any matrix variety (`low_rank`, `sym_low_rank`, `lifted_phase`).
pub fn recover_on_variety(e: &MeasurementEnsemble, y: &SampleVector, w: &VarietySpec, cfg: &RecoveryConfig) -> Result<RecoveryOutcome> {
    if e.shape() != w.ambient() || w.kind == VarietyKind::Sparse {
        return Err(Error::Shape {
            expected: format!("matrix ensemble of dimension {}", w.d),
            found: format!("{} ensemble of dimension {}", e.shape().name(), e.d()),
        });
    }
    check_samples(e, y)?;
    LiftedProblem::new(e, y, *w, cfg.power_iters).solve(cfg)
}

/// Phase retrieval through the lift `x -> x x*`. Accepts either the vectors
/// `a_j` (samples `|<a_j, x>|^2`) or an already lifted Hermitian ensemble.
/// The estimate is a column vector, normalized by [`normalize_phase`].
pub fn recover_phase(e: &MeasurementEnsemble, y: &SampleVector, cfg: &RecoveryConfig) -> Result<RecoveryOutcome> {
    let lifted = match e.shape() {
        Shape::Vector(_) => e.lifted()?,
        Shape::Matrix(_) if e.is_hermitian() => e.clone(),
        Shape::Matrix(_) => return Err(domain("phase retrieval needs vectors or a Hermitian ensemble")),
    };
    check_samples(&lifted, y)?;
    let psd_lifts = matches!(e.shape(), Shape::Vector(_)) || lifted.ranks().is_some_and(|r| r.iter().all(|&k| k == 1));
    if psd_lifts {
        let scale = y.norm().max(1.0);
        if y.y.iter().any(|z| z.im.abs() > 1e-12 * scale || z.re < -1e-12 * scale) {
            return Err(domain("intensities must be real and nonnegative"));
        }
    }
    let w = VarietySpec::lifted_phase(e.d(), e.field());
    let out = recover_on_variety(&lifted, y, &w, cfg)?;
    let eig = HermitianEigen::new(&out.estimate);
    let top = eig.values[0].max(0.0).sqrt();
    let mut x = DenseMatrix::from_iterator(e.d(), 1, eig.vectors.column(0).iter().map(|z| z * top));
    if e.field() == Field::Real {
        x = x.map(|z| C64::new(z.re, 0.0));
    }
    let x = normalize_phase(&x);
    let residual = sample_residual(&lifted, &lift_rank_one(&x), y);
    let converged = out.converged && residual <= cfg.tol_fit * y.norm();
    Ok(RecoveryOutcome { estimate: x, residual, converged, ..out })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepSetting {
    /// Real `k`-sparse vectors in `R^d`, Gaussian vectors.
    Sparse,
    /// Complex rank-`r` `d x d` matrices, complex Gaussian matrices.
    LowRank,
    /// Real phase retrieval with Gaussian vectors.
    RealPr,
    /// Complex phase retrieval with complex Gaussian vectors.
    ComplexPr,
}

impl SweepSetting {
    pub fn parse(s: &str) -> Option<SweepSetting> {
        Some(match s {
            "sparse" => SweepSetting::Sparse,
            "low_rank" | "lowrank" => SweepSetting::LowRank,
            "real_pr" => SweepSetting::RealPr,
            "complex_pr" => SweepSetting::ComplexPr,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
}

/// Draw a signal and an ensemble, sample, recover, and report whether the
/// estimate matches (relative error below [`SUCCESS_TOL`]).
pub fn run_trial(setting: SweepSetting, d: usize, p: usize, m: usize, seed: u64, cfg: &RecoveryConfig) -> Result<bool> {
    let cfg = RecoveryConfig { seed, ..*cfg };
    let mut rng = rng::stream(seed, u64::MAX);
    let (out, truth, field) = match setting {
        SweepSetting::Sparse => {
            let e = gen_gaussian_vectors(d, m, Field::Real, seed)?;
            let x = random_sparse(&mut rng, d, p);
            let y = e.apply(&x)?;
            (recover_sparse(&e, &y, p, &cfg)?, x, Field::Real)
        }
        SweepSetting::LowRank => {
            let e = gen_gaussian_matrices(d, m, Field::Complex, seed)?;
            let x = random_low_rank(&mut rng, d, p, Field::Complex);
            let y = e.apply(&x)?;
            (recover_low_rank(&e, &y, p, &cfg)?, x, Field::Real)
        }
        SweepSetting::RealPr | SweepSetting::ComplexPr => {
            let field = if setting == SweepSetting::RealPr { Field::Real } else { Field::Complex };
            let e = gen_gaussian_vectors(d, m, field, seed)?;
            let x = gaussian_element(&mut rng, Shape::Vector(d), field);
            let y = e.lifted()?.apply(&lift_rank_one(&x))?;
            (recover_phase(&e, &y, &cfg)?, x, field)
        }
    };
    let err = equivalence_distance(&out.estimate, &truth, field) / frobenius(&truth).max(f64::MIN_POSITIVE);
    Ok(out.converged && !out.ambiguous && err < SUCCESS_TOL)
}

pub fn random_sparse(rng: &mut StreamRng, d: usize, k: usize) -> DenseMatrix {
    let mut x = DenseMatrix::zeros(d, 1);
    for i in sample_indices(rng, d, k).into_iter() {
        x[i] = C64::new(rng::normal(rng), 0.0);
    }
    x
}

pub fn random_low_rank(rng: &mut StreamRng, d: usize, r: usize, field: Field) -> DenseMatrix {
    let mut x = DenseMatrix::zeros(d, d);
    for _ in 0..r {
        let u = gaussian_element(rng, Shape::Vector(d), field);
        let v = gaussian_element(rng, Shape::Vector(d), field);
        x += &u * v.adjoint();
    }
    x
}

/// Success rate of [`run_trial`] for each `m` in `ms`. Trial `t` at `m` uses
/// seed `derive(derive(seed, m), t)`, so rows do not depend on each other.
pub fn phase_transition_sweep(
    setting: SweepSetting,
    d: usize,
    p: usize,
    ms: std::ops::RangeInclusive<usize>,
    trials: usize,
    seed: u64,
    cfg: &RecoveryConfig,
) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    if d == 0 || *ms.start() == 0 {
        return Err(domain("sweep needs d >= 1 and m >= 1"));
    }
    match setting {
        SweepSetting::Sparse if p > d => return Err(domain(format!("sparsity {p} exceeds {d}"))),
        SweepSetting::LowRank if p > d => return Err(domain(format!("rank {p} exceeds {d}"))),
        _ => {}
    }
    ms.map(|m| {
        let base = rng::derive(seed, m as u64);
        let wins: Vec<bool> = (0..trials)
            .into_par_iter()
            .map(|t| run_trial(setting, d, p, m, rng::derive(base, t as u64), cfg))
            .collect::<Result<_>>()?;
        let successes = wins.iter().filter(|&&w| w).count();
        Ok(SweepRow { m, trials, successes, success_rate: successes as f64 / trials as f64 })
    })
    .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("m,trials,successes,success_rate\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.m, r.trials, r.successes, r.success_rate));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{elementary, from_real, unit};
    use crate::sampling::gen_gaussian_vectors;

    fn samples(v: &[f64]) -> SampleVector {
        SampleVector { y: v.iter().map(|&t| C64::new(t, 0.0)).collect(), provenance: None }
    }

    #[test]
    fn equivalence_distance_examples() {
        let x = from_real(3, 1, &[1.0, -2.0, 0.5]);
        assert_eq!(equivalence_distance(&x, &(-&x), Field::Real), 0.0);
        let e1 = unit(2, 0);
        let ie1 = e1.map(|z| z * C64::new(0.0, 1.0));
        assert!(equivalence_distance(&e1, &ie1, Field::Complex) < 1e-15);
        let e2 = unit(2, 1);
        assert!((equivalence_distance(&e1, &e2, Field::Complex) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sparse_small_example() {
        let rows = [from_real(4, 1, &[1.0, 1.0, 1.0, 1.0]), from_real(4, 1, &[1.0, 2.0, 3.0, 4.0])];
        let e = MeasurementEnsemble::new(Field::Real, Shape::Vector(4), rows.to_vec()).unwrap();
        let out = recover_sparse(&e, &samples(&[2.0, 6.0]), 1, &RecoveryConfig::default()).unwrap();
        assert!(out.converged && !out.ambiguous);
        assert!(frobenius(&(out.estimate - unit(4, 2).scale(2.0))) < 1e-12);

        let zero = recover_sparse(&e, &samples(&[0.0, 0.0]), 1, &RecoveryConfig::default()).unwrap();
        assert_eq!(zero.estimate, DenseMatrix::zeros(4, 1));
    }

    #[test]
    fn sparse_underdetermined_is_ambiguous() {
        let e = gen_gaussian_vectors(6, 2, Field::Real, 3).unwrap();
        let x = unit(6, 1).scale(1.5) + unit(6, 4).scale(-0.5);
        let y = e.apply(&x).unwrap();
        let out = recover_sparse(&e, &y, 2, &RecoveryConfig::default()).unwrap();
        assert!(out.ambiguous);
    }

    #[test]
    fn sparse_budget_guard() {
        let e = gen_gaussian_vectors(40, 3, Field::Real, 1).unwrap();
        let y = e.apply(&DenseMatrix::zeros(40, 1)).unwrap();
        assert!(matches!(recover_sparse(&e, &y, 20, &RecoveryConfig::default()), Err(Error::Budget(_))));
    }

    #[test]
    fn full_basis_low_rank_is_immediate() {
        let ops: Vec<DenseMatrix> = (0..9).map(|j| elementary(3, j / 3, j % 3)).collect();
        let e = MeasurementEnsemble::new(Field::Real, Shape::Matrix(3), ops).unwrap();
        let q = from_real(3, 1, &[1.0, 2.0, -1.0]) * from_real(3, 1, &[0.5, 0.0, 3.0]).transpose();
        let out = recover_low_rank(&e, &e.apply(&q).unwrap(), 1, &RecoveryConfig::default()).unwrap();
        assert!(out.converged);
        assert!(out.iterations <= 2);
        assert!(frobenius(&(out.estimate - q)) < 1e-10);
    }

    #[test]
    fn zero_samples_give_zero() {
        let e = gen_gaussian_matrices(3, 5, Field::Complex, 2).unwrap();
        let y = SampleVector { y: vec![C64::new(0.0, 0.0); 5], provenance: None };
        let out = recover_low_rank(&e, &y, 1, &RecoveryConfig::default()).unwrap();
        assert!(out.converged);
        assert_eq!(frobenius(&out.estimate), 0.0);
    }

    #[test]
    fn low_rank_complex_at_injective_count() {
        let cfg = RecoveryConfig::default();
        for seed in 0..5 {
            assert!(run_trial(SweepSetting::LowRank, 4, 1, 12, seed, &cfg).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn phase_small_example() {
        let rows = [from_real(2, 1, &[1.0, 0.0]), from_real(2, 1, &[0.0, 1.0]), from_real(2, 1, &[1.0, 1.0])];
        let e = MeasurementEnsemble::new(Field::Real, Shape::Vector(2), rows.to_vec()).unwrap();
        let out = recover_phase(&e, &samples(&[1.0, 4.0, 1.0]), &RecoveryConfig::default()).unwrap();
        assert!(out.converged);
        let want = from_real(2, 1, &[1.0, -2.0]);
        assert!(equivalence_distance(&out.estimate, &want, Field::Real) < 1e-8);
        // Largest entry made positive.
        assert!(out.estimate[1].re > 0.0);
    }

    #[test]
    fn phase_rejects_negative_intensities() {
        let e = gen_gaussian_vectors(2, 3, Field::Real, 1).unwrap();
        assert!(recover_phase(&e, &samples(&[1.0, -1.0, 1.0]), &RecoveryConfig::default()).is_err());
    }

    #[test]
    fn complex_phase_recovers() {
        let cfg = RecoveryConfig::default();
        for seed in 0..3 {
            assert!(run_trial(SweepSetting::ComplexPr, 3, 0, 10, seed, &cfg).unwrap(), "seed {seed}");
        }
    }

    #[test]
    fn sweep_shapes() {
        let cfg = RecoveryConfig::default();
        assert!(phase_transition_sweep(SweepSetting::Sparse, 8, 1, 1..=3, 0, 1, &cfg).unwrap().is_empty());
        let rows = phase_transition_sweep(SweepSetting::Sparse, 8, 1, 1..=3, 20, 1, &cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].successes, 0);
        assert_eq!(rows[1].successes, 20);
        assert!(sweep_to_csv(&rows).starts_with("m,trials"));
    }

    #[test]
    fn normalize_phase_makes_peak_positive() {
        let x = DenseMatrix::from_vec(2, 1, vec![C64::new(0.0, -3.0), C64::new(1.0, 0.0)]);
        let n = normalize_phase(&x);
        assert!((n[0] - C64::new(3.0, 0.0)).norm() < 1e-15);
    }
}
