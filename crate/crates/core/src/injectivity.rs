//! Is a given ensemble injective on a variety?
//!
//! Injectivity on `W` is equivalent to the sampling map having no nonzero
//! kernel element in the difference set `W - W`. Three routes are used:
//!
//! * kernel nullity, when the difference set fills its ambient space;
//! * the complement property, for real rank-one phase retrieval;
//! * alternating projections between the kernel and the difference variety,
//!   otherwise. A witness refutes injectivity; the absence of one after all
//!   restarts is only probabilistic evidence, reported with a margin.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::coords::CoordSpace;
use crate::error::{domain, Error, Result};
use crate::linalg::{
    frobenius, max_imag, real_nullspace, serialize_matrix, serialize_opt_matrix, DenseMatrix, Field,
    HermitianEigen, Shape, SortedSvd, C64,
};
use crate::recovery::equivalence_distance;
use crate::rng::{self, StreamRng};
use crate::sampling::{lift_rank_one, MeasurementEnsemble};
use crate::varieties::{difference_closure, membership, project, VarietyKind, VarietySpec};

/// Largest `m` accepted by [`complement_property`] (it enumerates `2^m` splits).
pub const COMPLEMENT_MAX_M: usize = 24;

/// Restarts are run in fixed-size batches so the set of restarts executed,
/// and therefore the reported margin, does not depend on the thread count.
const RESTART_BATCH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Pick the strongest applicable route.
    Auto,
    /// Always run the witness search (except for a trivial kernel).
    WitnessSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub tol_feas: f64,
    /// `NoWitnessFound` requires the best residual to stay above this.
    pub margin_threshold: f64,
    pub seed: u64,
    pub method: Method,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 200,
            max_iters: 500,
            tol_feas: 1e-8,
            margin_threshold: 1e-6,
            seed: 0,
            method: Method::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VerdictStatus {
    CertifiedExact,
    NoWitnessFound,
    RefutedWithWitness,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    KernelNullity,
    ComplementProperty,
    WitnessSearch,
}

/// Unit-norm element of the difference variety annihilated by the sampling map.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    #[serde(serialize_with = "serialize_matrix")]
    pub element: DenseMatrix,
    /// `||apply(e, element)||`.
    pub residual: f64,
    /// Distance from `element` to the kernel.
    pub kernel_distance: f64,
    pub restart: usize,
    pub iterations: usize,
}

/// Two inequivalent signals with (numerically) identical samples.
#[derive(Debug, Clone, Serialize)]
pub struct Collision {
    #[serde(serialize_with = "serialize_matrix")]
    pub x: DenseMatrix,
    #[serde(serialize_with = "serialize_matrix")]
    pub y: DenseMatrix,
    /// Norm of the difference of the two sample vectors.
    pub sample_gap: f64,
    /// Distance between `x` and `y` modulo the signal equivalence.
    pub separation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct InjectivityVerdict {
    pub status: VerdictStatus,
    pub route: Route,
    /// Best residual over restarts (witness-search route only).
    pub margin: Option<f64>,
    pub witness: Option<Witness>,
    pub collision: Option<Collision>,
    /// Lexicographically first subset violating the complement property.
    pub failing_subset: Option<Vec<usize>>,
    pub restarts: usize,
    pub iterations: usize,
    pub kernel_dim: usize,
    pub op_norm: f64,
    pub config: SearchConfig,
}

impl InjectivityVerdict {
    pub fn is_refuted(&self) -> bool {
        self.status == VerdictStatus::RefutedWithWitness
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplementOutcome {
    pub holds: bool,
    pub failing_subset: Option<Vec<usize>>,
}

/// For every `S`, either `{a_j : j in S}` or its complement spans `R^d`.
/// Returns the lexicographically first failing `S` (0-based, sorted) when the
/// property fails.
pub fn complement_property(vectors: &[DenseMatrix]) -> Result<ComplementOutcome> {
    let m = vectors.len();
    if m == 0 {
        return Err(domain("complement property needs at least one vector"));
    }
    if m > COMPLEMENT_MAX_M {
        return Err(Error::Budget(format!(
            "complement property enumerates 2^{m} subsets; use witness_search for m > {COMPLEMENT_MAX_M}"
        )));
    }
    let d = vectors[0].nrows();
    for v in vectors {
        if v.shape() != (d, 1) {
            return Err(Error::Shape { expected: format!("({d}, 1)"), found: format!("{:?}", v.shape()) });
        }
        if max_imag(v) != 0.0 {
            return Err(domain("complement property is defined for real vectors"));
        }
    }
    let scale = vectors.iter().map(frobenius).fold(0.0, f64::max);
    let rows = DMatrix::from_fn(m, d, |j, i| vectors[j][i].re);
    let spans = |mask: u32| -> bool {
        let count = mask.count_ones() as usize;
        if count < d {
            return false;
        }
        let sel: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
        let sub = DMatrix::from_fn(sel.len(), d, |a, i| rows[(sel[a], i)]);
        rank_abs(&sub, 1e-10 * scale) == d
    };
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    let mut best: Option<Vec<usize>> = None;
    for mask in 0..=full {
        let k = mask.count_ones() as usize;
        if 2 * k > m || (2 * k == m && mask & 1 == 0 && m > 0) {
            continue;
        }
        let comp = full & !mask;
        if spans(mask) || spans(comp) {
            continue;
        }
        for candidate in [mask, comp] {
            let list: Vec<usize> = (0..m).filter(|j| candidate >> j & 1 == 1).collect();
            if best.as_ref().is_none_or(|b| list < *b) {
                best = Some(list);
            }
        }
    }
    Ok(ComplementOutcome { holds: best.is_none(), failing_subset: best })
}

fn rank_abs(m: &DMatrix<f64>, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    m.clone().singular_values().iter().filter(|&&s| s > tol).count()
}

/// Result of [`witness_search`].
#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub witness: Option<Witness>,
    /// Minimum over executed restarts of the best residual reached.
    pub margin: f64,
    pub restarts_used: usize,
    pub iterations: usize,
    pub kernel_dim: usize,
    pub op_norm: f64,
}

struct RestartResult {
    best_residual: f64,
    witness: Option<Witness>,
    iterations: usize,
}

struct Searcher<'a> {
    space: CoordSpace,
    op: DMatrix<f64>,
    kernel: DMatrix<f64>,
    variety: &'a VarietySpec,
    residual_tol: f64,
    cfg: &'a SearchConfig,
}

impl Searcher<'_> {
    fn to_kernel(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.kernel * (self.kernel.tr_mul(c))
    }

    fn run(&self, restart: usize) -> Result<RestartResult> {
        let mut rng = rng::stream(self.cfg.seed, restart as u64);
        let n = self.space.dim();
        let mut c = self.to_kernel(&DVector::from_fn(n, |_, _| rng::normal(&mut rng)));
        let mut best = f64::INFINITY;
        let mut checkpoint = f64::INFINITY;
        const WINDOW: usize = 50;
        for it in 0..self.cfg.max_iters {
            let norm = c.norm();
            if norm == 0.0 || !norm.is_finite() {
                break;
            }
            c /= norm;
            let v = project(&self.space.from_coords(&c), self.variety)?;
            let vn = frobenius(&v);
            if vn == 0.0 {
                c = self.to_kernel(&DVector::from_fn(n, |_, _| rng::normal(&mut rng)));
                continue;
            }
            let q = self.space.to_coords(&v) / vn;
            let residual = (&self.op * &q).norm();
            let kq = self.to_kernel(&q);
            let kernel_distance = (&q - &kq).norm();
            best = best.min(residual);
            if residual <= self.residual_tol && kernel_distance <= self.cfg.tol_feas {
                let first = Witness { element: v.unscale(vn), residual, kernel_distance, restart, iterations: it + 1 };
                let witness = self.refine(first, kq)?;
                return Ok(RestartResult { best_residual: witness.residual, iterations: witness.iterations, witness: Some(witness) });
            }
            if (it + 1) % WINDOW == 0 {
                if best > 0.999 * checkpoint {
                    return Ok(RestartResult { best_residual: best, witness: None, iterations: it + 1 });
                }
                checkpoint = best;
            }
            c = kq;
        }
        Ok(RestartResult { best_residual: best, witness: None, iterations: self.cfg.max_iters })
    }

    /// Keep alternating after acceptance while the residual still drops, so
    /// the reported witness sits well inside the tolerance.
    fn refine(&self, mut best: Witness, mut c: DVector<f64>) -> Result<Witness> {
        const EXTRA: usize = 2000;
        let floor = 1e-6 * self.residual_tol;
        for _ in 0..EXTRA {
            if best.residual <= floor {
                break;
            }
            let norm = c.norm();
            if norm == 0.0 {
                break;
            }
            let v = project(&self.space.from_coords(&c.unscale(norm)), self.variety)?;
            let vn = frobenius(&v);
            if vn == 0.0 {
                break;
            }
            let q = self.space.to_coords(&v) / vn;
            let residual = (&self.op * &q).norm();
            let kq = self.to_kernel(&q);
            if residual >= best.residual {
                break;
            }
            best = Witness {
                element: v.unscale(vn),
                residual,
                kernel_distance: (&q - &kq).norm(),
                iterations: best.iterations + 1,
                ..best
            };
            c = kq;
        }
        Ok(best)
    }
}

/// Alternating projections between `ker(M_A)` and the difference variety `w`,
/// renormalized to the unit sphere each step. Returns the first restart (by
/// index) that lands on a unit-norm variety point with residual at most
/// `tol_feas * min(1, ||M_A||)` and distance to the kernel at most `tol_feas`.
pub fn witness_search(e: &MeasurementEnsemble, w: &VarietySpec, cfg: &SearchConfig) -> Result<SearchOutcome> {
    let space = CoordSpace::for_variety(w);
    let info = e.kernel(&space)?;
    let kernel_dim = info.dim();
    let op_norm = info.sigma_max;
    if kernel_dim == 0 {
        return Ok(SearchOutcome { witness: None, margin: f64::INFINITY, restarts_used: 0, iterations: 0, kernel_dim, op_norm });
    }
    let searcher = Searcher {
        space,
        op: info.op,
        kernel: info.basis,
        variety: w,
        residual_tol: cfg.tol_feas * op_norm.min(1.0),
        cfg,
    };
    let mut margin = f64::INFINITY;
    let mut iterations = 0;
    let mut start = 0;
    while start < cfg.restarts {
        let end = (start + RESTART_BATCH).min(cfg.restarts);
        let batch: Vec<RestartResult> = (start..end).into_par_iter().map(|r| searcher.run(r)).collect::<Result<_>>()?;
        for res in &batch {
            margin = margin.min(res.best_residual);
            iterations += res.iterations;
        }
        if let Some(found) = batch.into_iter().find_map(|r| r.witness) {
            return Ok(SearchOutcome { witness: Some(found), margin, restarts_used: end, iterations, kernel_dim, op_norm });
        }
        start = end;
    }
    Ok(SearchOutcome { witness: None, margin, restarts_used: cfg.restarts, iterations, kernel_dim, op_norm })
}

/// Decide injectivity of `e` on the signal variety `signal`.
pub fn certify(e: &MeasurementEnsemble, signal: &VarietySpec, cfg: &SearchConfig) -> Result<InjectivityVerdict> {
    let lifted;
    let e = if signal.kind == VarietyKind::LiftedPhase && matches!(e.shape(), Shape::Vector(_)) {
        lifted = e.lifted()?;
        &lifted
    } else {
        e
    };
    if e.shape() != signal.ambient() {
        return Err(Error::Shape {
            expected: format!("{} ensemble of dimension {}", signal.ambient().name(), signal.d),
            found: format!("{} ensemble of dimension {}", e.shape().name(), e.d()),
        });
    }
    let diff = difference_closure(signal);
    let space = CoordSpace::for_variety(&diff);
    let info = e.kernel(&space)?;
    let mut verdict = InjectivityVerdict {
        status: VerdictStatus::CertifiedExact,
        route: Route::KernelNullity,
        margin: None,
        witness: None,
        collision: None,
        failing_subset: None,
        restarts: 0,
        iterations: 0,
        kernel_dim: info.dim(),
        op_norm: info.sigma_max,
        config: *cfg,
    };
    if info.dim() == 0 {
        return Ok(verdict);
    }

    if diff.is_full_space() {
        let q = space.from_coords(&info.basis.column(0).into_owned());
        let residual = (&info.op * info.basis.column(0)).norm();
        let witness = Witness { element: q, residual, kernel_distance: 0.0, restart: 0, iterations: 0 };
        return refute(verdict, e, signal, witness);
    }

    let real_phase = signal.kind == VarietyKind::LiftedPhase && signal.field == Field::Real;
    if cfg.method == Method::Auto && real_phase && e.m() <= COMPLEMENT_MAX_M {
        if let Some(vectors) = rank_one_factors(e) {
            verdict.route = Route::ComplementProperty;
            let outcome = complement_property(&vectors)?;
            if outcome.holds {
                return Ok(verdict);
            }
            let subset = outcome.failing_subset.expect("failing subset present when property fails");
            let witness = complement_witness(e, &vectors, &subset)?;
            verdict.failing_subset = Some(subset);
            return refute(verdict, e, signal, witness);
        }
    }

    verdict.route = Route::WitnessSearch;
    let outcome = witness_search(e, &diff, cfg)?;
    verdict.margin = Some(outcome.margin);
    verdict.restarts = outcome.restarts_used;
    verdict.iterations = outcome.iterations;
    match outcome.witness {
        Some(w) => refute(verdict, e, signal, w),
        None => {
            verdict.status = if outcome.margin > cfg.margin_threshold {
                VerdictStatus::NoWitnessFound
            } else {
                VerdictStatus::Inconclusive
            };
            Ok(verdict)
        }
    }
}

fn refute(
    mut verdict: InjectivityVerdict,
    e: &MeasurementEnsemble,
    signal: &VarietySpec,
    witness: Witness,
) -> Result<InjectivityVerdict> {
    let (x, y) = witness_to_collision(&witness.element, signal)?;
    let (sx, sy) = match signal.kind {
        VarietyKind::LiftedPhase => (lift_rank_one(&x), lift_rank_one(&y)),
        _ => (x.clone(), y.clone()),
    };
    let ya = e.apply(&sx)?.y;
    let yb = e.apply(&sy)?.y;
    let sample_gap = ya.iter().zip(&yb).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let separation = match signal.kind {
        VarietyKind::LiftedPhase => equivalence_distance(&x, &y, signal.field),
        _ => frobenius(&(&x - &y)),
    };
    verdict.status = VerdictStatus::RefutedWithWitness;
    if verdict.margin.is_none() && verdict.route == Route::WitnessSearch {
        verdict.margin = Some(witness.residual);
    }
    verdict.collision = Some(Collision { x, y, sample_gap, separation });
    verdict.witness = Some(witness);
    Ok(verdict)
}

/// `a_j` with `A_j = a_j a_j^T`, when every operator is real PSD of rank one.
fn rank_one_factors(e: &MeasurementEnsemble) -> Option<Vec<DenseMatrix>> {
    if e.field() != Field::Real || e.shape() == Shape::Vector(e.d()) {
        return None;
    }
    e.operators()
        .iter()
        .map(|a| {
            let d = a.nrows();
            let j = (0..d).max_by(|&p, &q| a[(p, p)].re.total_cmp(&a[(q, q)].re))?;
            let pivot = a[(j, j)].re;
            if pivot <= 0.0 {
                return None;
            }
            let v = DenseMatrix::from_iterator(d, 1, a.column(j).iter().map(|z| z.unscale(pivot.sqrt())));
            let defect = frobenius(&(a - &v * v.transpose()));
            (defect <= 1e-10 * frobenius(a)).then_some(v)
        })
        .collect()
}

/// `u v^T` with `u` orthogonal to `a_S` and `v` orthogonal to `a_{S^c}`.
fn complement_witness(e: &MeasurementEnsemble, vectors: &[DenseMatrix], subset: &[usize]) -> Result<Witness> {
    let d = e.d();
    let pick = |inside: bool| -> DVector<f64> {
        let sel: Vec<usize> = (0..vectors.len()).filter(|j| subset.contains(j) == inside).collect();
        let rows = DMatrix::from_fn(sel.len(), d, |a, i| vectors[sel[a]][i].re);
        let (null, _) = real_nullspace(&rows, 1e-10);
        null.column(0).into_owned()
    };
    let u = pick(true);
    let v = pick(false);
    let q = DenseMatrix::from_fn(d, d, |i, k| C64::new(u[i] * v[k], 0.0));
    let q = q.unscale(frobenius(&q));
    let residual = e.apply(&q)?.norm();
    Ok(Witness { element: q, residual, kernel_distance: 0.0, restart: 0, iterations: 0 })
}

/// Split a difference-variety element into two signal-variety members whose
/// samples agree wherever the samples of `q` vanish.
pub fn witness_to_collision(q: &DenseMatrix, signal: &VarietySpec) -> Result<(DenseMatrix, DenseMatrix)> {
    let diff = difference_closure(signal);
    diff.ambient().check(q, "witness")?;
    let r = signal.k_or_r;
    Ok(match signal.kind {
        VarietyKind::Sparse => {
            // First k nonzeros (by index) go to x, the negated rest to y.
            let mut x = DenseMatrix::zeros(q.nrows(), 1);
            let mut y = DenseMatrix::zeros(q.nrows(), 1);
            let mut taken = 0;
            for i in 0..q.nrows() {
                if q[i] == C64::new(0.0, 0.0) {
                    continue;
                }
                if taken < r {
                    x[i] = q[i];
                    taken += 1;
                } else {
                    y[i] = -q[i];
                }
            }
            (x, y)
        }
        VarietyKind::LowRank | VarietyKind::SymLowRank => {
            let svd = SortedSvd::new(q);
            let n = svd.singular_values.len();
            let (x, y) = (svd.partial(0..r.min(n)), -svd.partial(r.min(n)..n));
            if signal.kind == VarietyKind::SymLowRank {
                (crate::linalg::symmetrize(&x), crate::linalg::symmetrize(&y))
            } else {
                (x, y)
            }
        }
        VarietyKind::LiftedPhase => match signal.field {
            Field::Complex => {
                let eig = HermitianEigen::new(q);
                let n = eig.values.len();
                let d = q.nrows();
                let mut x = DenseMatrix::zeros(d, 1);
                let mut y = DenseMatrix::zeros(d, 1);
                if eig.values[0] > 0.0 {
                    x = DenseMatrix::from_iterator(d, 1, eig.vectors.column(0).iter().map(|z| z * eig.values[0].sqrt()));
                }
                if n > 1 && eig.values[n - 1] < 0.0 {
                    y = DenseMatrix::from_iterator(d, 1, eig.vectors.column(n - 1).iter().map(|z| z * (-eig.values[n - 1]).sqrt()));
                }
                (x, y)
            }
            Field::Real => {
                // q = s u v^T; x - y = sqrt(s) u, x + y = sqrt(s) v.
                let svd = SortedSvd::new(&crate::linalg::real_part(q));
                let s = svd.sigma(0).sqrt();
                let u = svd.u.column(0).map(|z| z.re);
                let v = svd.v_t.row(0).transpose().map(|z| z.re);
                // Real input yields real singular vectors up to a shared sign.
                let x = (&u + &v).scale(0.5 * s);
                let y = (&v - &u).scale(0.5 * s);
                let lift = |v: DVector<f64>| DenseMatrix::from_iterator(v.len(), 1, v.iter().map(|&t| C64::new(t, 0.0)));
                (lift(x), lift(y))
            }
        },
        VarietyKind::HermSig | VarietyKind::RankOneReal => {
            return Err(domain(format!("{} is a difference variety, not a signal variety", signal.kind.name())))
        }
    })
}

/// Sum of squared magnitudes of all `(r+1) x (r+1)` minors; zero iff rank <= r.
pub fn minor_residual(q: &DenseMatrix, r: usize) -> f64 {
    let s = r + 1;
    if s > q.nrows() || s > q.ncols() {
        return 0.0;
    }
    let mut total = 0.0;
    for rows in (0..q.nrows()).combinations(s) {
        for cols in (0..q.ncols()).combinations(s) {
            let sub = DenseMatrix::from_fn(s, s, |a, b| q[(rows[a], cols[b])]);
            total += sub.determinant().norm_sqr();
        }
    }
    total
}

/// Number of `(r+1)`-minors of a `d x d` matrix.
pub fn minor_count(d: usize, r: usize) -> usize {
    let c = binomial(d, r + 1);
    c * c
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinorSearchConfig {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for MinorSearchConfig {
    fn default() -> Self {
        MinorSearchConfig { restarts: 500, max_iters: 3000, seed: 0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MinorSystemReport {
    /// Smallest minor residual found on the unit sphere of the kernel
    /// (`+inf`, serialized as null, when the kernel is trivial).
    pub min_residual: f64,
    #[serde(serialize_with = "serialize_opt_matrix")]
    pub argmin: Option<DenseMatrix>,
    pub best_restart: Option<usize>,
    pub kernel_dim: usize,
    pub variables: usize,
    pub linear_equations: usize,
    pub polynomial_equations: usize,
    pub restarts: usize,
}

/// Minimize the `(rank+1)`-minor residual over unit-norm real kernel elements
/// by multistart Riemannian gradient descent with backtracking.
pub fn verify_kernel_minor_system(
    e: &MeasurementEnsemble,
    rank: usize,
    cfg: &MinorSearchConfig,
) -> Result<MinorSystemReport> {
    let d = match e.shape() {
        Shape::Matrix(d) if e.field() == Field::Real => d,
        _ => return Err(domain("minor system check needs a real matrix ensemble")),
    };
    if rank + 1 > d {
        return Err(domain(format!("rank {rank} leaves no minors in a {d}x{d} matrix")));
    }
    let space = CoordSpace::new(Shape::Matrix(d), crate::coords::SpaceKind::Real);
    let info = e.kernel(&space)?;
    let mut report = MinorSystemReport {
        min_residual: f64::INFINITY,
        argmin: None,
        best_restart: None,
        kernel_dim: info.dim(),
        variables: d * d,
        linear_equations: e.m(),
        polynomial_equations: minor_count(d, rank),
        restarts: cfg.restarts,
    };
    if info.dim() == 0 {
        return Ok(report);
    }
    let minors = MinorObjective::new(d, rank + 1);
    let basis = &info.basis;
    let results: Vec<(f64, DVector<f64>)> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng::stream(cfg.seed, r as u64);
            descend(&minors, basis, &mut rng, cfg.max_iters)
        })
        .collect();
    for (r, (f, t)) in results.into_iter().enumerate() {
        if f < report.min_residual {
            report.min_residual = f;
            report.best_restart = Some(r);
            let q = basis * t;
            report.argmin = Some(DenseMatrix::from_fn(d, d, |i, k| C64::new(q[i * d + k], 0.0)));
        }
    }
    Ok(report)
}

/// Sum of squared `s x s` minors of a real `d x d` matrix with its gradient.
struct MinorObjective {
    d: usize,
    s: usize,
    subsets: Vec<Vec<usize>>,
}

impl MinorObjective {
    fn new(d: usize, s: usize) -> Self {
        MinorObjective { d, s, subsets: (0..d).combinations(s).collect() }
    }

    /// `x` holds the matrix row-major. Returns the value and fills `grad`.
    fn eval(&self, x: &[f64], grad: Option<&mut [f64]>) -> f64 {
        let (d, s) = (self.d, self.s);
        let mut f = 0.0;
        let mut g = grad;
        if let Some(g) = g.as_deref_mut() {
            g.iter_mut().for_each(|v| *v = 0.0);
        }
        let mut sub = [0.0f64; 36];
        let mut minor = [0.0f64; 25];
        for rows in &self.subsets {
            for cols in &self.subsets {
                for a in 0..s {
                    for b in 0..s {
                        sub[a * s + b] = x[rows[a] * d + cols[b]];
                    }
                }
                let det = det_small(&sub[..s * s], s);
                f += det * det;
                if let Some(g) = g.as_deref_mut() {
                    for a in 0..s {
                        for b in 0..s {
                            // Cofactor (a, b).
                            let mut idx = 0;
                            for p in (0..s).filter(|&p| p != a) {
                                for q in (0..s).filter(|&q| q != b) {
                                    minor[idx] = sub[p * s + q];
                                    idx += 1;
                                }
                            }
                            let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                            let cof = sign * det_small(&minor[..(s - 1) * (s - 1)], s - 1);
                            g[rows[a] * d + cols[b]] += 2.0 * det * cof;
                        }
                    }
                }
            }
        }
        f
    }
}

/// Determinant by Gaussian elimination with partial pivoting (n <= 6).
fn det_small(m: &[f64], n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if n == 1 {
        return m[0];
    }
    if n == 2 {
        return m[0] * m[3] - m[1] * m[2];
    }
    let mut a = [0.0f64; 36];
    a[..n * n].copy_from_slice(m);
    let mut det = 1.0;
    for col in 0..n {
        let piv = (col..n).max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs())).unwrap();
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let factor = a[r * n + col] / p;
            for k in col..n {
                a[r * n + k] -= factor * a[col * n + k];
            }
        }
    }
    det
}

fn descend(obj: &MinorObjective, basis: &DMatrix<f64>, rng: &mut StreamRng, max_iters: usize) -> (f64, DVector<f64>) {
    let k = basis.ncols();
    let n = basis.nrows();
    let mut t = DVector::from_fn(k, |_, _| rng::normal(rng));
    t /= t.norm();
    let mut x = vec![0.0; n];
    let mut gx = vec![0.0; n];
    let eval = |t: &DVector<f64>, x: &mut Vec<f64>, gx: Option<&mut Vec<f64>>| -> f64 {
        let q = basis * t;
        x.copy_from_slice(q.as_slice());
        obj.eval(x, gx.map(|g| g.as_mut_slice()))
    };
    let mut f = eval(&t, &mut x, Some(&mut gx));
    let mut step = 1.0;
    for _ in 0..max_iters {
        let g_full = basis.tr_mul(&DVector::from_column_slice(&gx));
        // Tangent component on the unit sphere.
        let g = &g_full - &t * t.dot(&g_full);
        let gn2 = g.norm_squared();
        if gn2 <= 1e-32 || f <= 1e-300 {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut cand = &t - &g * step;
            cand /= cand.norm();
            let fc = eval(&cand, &mut x, None);
            if fc <= f - 1e-4 * step * gn2 {
                t = cand;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        let prev = f;
        f = eval(&t, &mut x, Some(&mut gx));
        step *= 2.0;
        if prev - f <= 1e-15 * prev {
            break;
        }
    }
    (f, t)
}

/// Outcome of [`admissibility_probe`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ProbeOutcome {
    VanishesOnAllSamples {
        samples: usize,
    },
    NonDegenerate {
        #[serde(serialize_with = "serialize_matrix")]
        sample: DenseMatrix,
        index: usize,
        value: [f64; 2],
    },
}

impl ProbeOutcome {
    pub fn vanishes(&self) -> bool {
        matches!(self, ProbeOutcome::VanishesOnAllSamples { .. })
    }
}

/// Evaluate `l(X) = Tr(F X^T)` on `n_samples` random variety points and report
/// the first one where it is not (relatively) zero.
pub fn admissibility_probe<S>(
    mut sampler: S,
    functional: &DenseMatrix,
    n_samples: usize,
    seed: u64,
) -> Result<ProbeOutcome>
where
    S: FnMut(&mut StreamRng) -> DenseMatrix,
{
    let fnorm = frobenius(functional);
    if fnorm == 0.0 {
        return Err(domain("admissibility probe needs a nonzero functional"));
    }
    let mut rng = rng::stream(seed, 0);
    for index in 0..n_samples {
        let x = sampler(&mut rng);
        if x.shape() != functional.shape() {
            return Err(Error::Shape { expected: format!("{:?}", functional.shape()), found: format!("{:?}", x.shape()) });
        }
        let value: C64 = functional.iter().zip(x.iter()).map(|(f, v)| f * v).sum();
        if value.norm() > 1e-10 * frobenius(&x) * fnorm {
            return Ok(ProbeOutcome::NonDegenerate { sample: x, index, value: [value.re, value.im] });
        }
    }
    Ok(ProbeOutcome::VanishesOnAllSamples { samples: n_samples })
}

/// Samplers for [`admissibility_probe`].
pub mod samplers {
    use super::*;
    use crate::sampling::gaussian_element;

    /// Complex symmetric `d x d` matrices `(G + G^T)/2`.
    pub fn symmetric(d: usize) -> impl FnMut(&mut StreamRng) -> DenseMatrix {
        move |rng| crate::linalg::symmetrize(&gaussian_element(rng, Shape::Matrix(d), Field::Complex))
    }

    /// Arbitrary complex `d x d` matrices.
    pub fn general(d: usize) -> impl FnMut(&mut StreamRng) -> DenseMatrix {
        move |rng| gaussian_element(rng, Shape::Matrix(d), Field::Complex)
    }

    /// Projections of Gaussian matrices onto `w`.
    pub fn variety(w: VarietySpec) -> impl FnMut(&mut StreamRng) -> DenseMatrix {
        move |rng| {
            let g = gaussian_element(rng, w.ambient(), w.field);
            project(&g, &w).expect("gaussian sample matches the variety shape")
        }
    }
}

/// Re-verify a refutation from scratch: membership of the witness in the
/// difference variety, unit norm, small residual, and two inequivalent
/// signal-variety members with matching samples.
pub fn recheck_refutation(e: &MeasurementEnsemble, signal: &VarietySpec, v: &InjectivityVerdict, tol: f64) -> Result<bool> {
    let (Some(w), Some(c)) = (&v.witness, &v.collision) else {
        return Ok(false);
    };
    let lifted;
    let e = if signal.kind == VarietyKind::LiftedPhase && matches!(e.shape(), Shape::Vector(_)) {
        lifted = e.lifted()?;
        &lifted
    } else {
        e
    };
    let bound = tol * v.op_norm.max(1.0);
    let diff = difference_closure(signal);
    let member = membership(&w.element, &diff, crate::varieties::MEMBERSHIP_TOL)?;
    let unit = (frobenius(&w.element) - 1.0).abs() <= 1e-10;
    let residual = e.apply(&w.element)?.norm() <= bound;
    let lift = |x: &DenseMatrix| match signal.kind {
        VarietyKind::LiftedPhase => lift_rank_one(x),
        _ => x.clone(),
    };
    let (lx, ly) = (lift(&c.x), lift(&c.y));
    let (ya, yb) = (e.apply(&lx)?.y, e.apply(&ly)?.y);
    let gap = ya.iter().zip(&yb).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
    let separated = match signal.kind {
        VarietyKind::LiftedPhase => equivalence_distance(&c.x, &c.y, signal.field) > 1e-6,
        _ => frobenius(&(&c.x - &c.y)) > 1e-6,
    };
    let in_signal = membership(&lx, signal, 1e-8)? && membership(&ly, signal, 1e-8)?;
    Ok(member && unit && residual && gap <= bound && separated && in_signal)
}
