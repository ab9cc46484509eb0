//! Measurement ensembles, the sampling map and its adjoint, lifts, the `tau`
//! isomorphism, seeded ensemble generators and the ensemble file format.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coords::CoordSpace;
use crate::error::{Error, Result};
use crate::linalg::{
    ensure_finite, frobenius, hermitian_defect, inner, max_imag, real_nullspace, DenseMatrix, Field, MatrixJson,
    Shape, SortedSvd, C64, I, ZERO,
};
use crate::rng::{self, StreamRng};

/// Relative tolerance for the rank check on load.
pub const RANK_TOL: f64 = 1e-8;
/// Absolute tolerance for the Hermitian check on load.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Ordered list of sampling operators `a_j` (vectors) or `A_j` (matrices).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    field: Field,
    shape: Shape,
    operators: Vec<DenseMatrix>,
    ranks: Option<Vec<usize>>,
    hermitian: bool,
    seed: Option<u64>,
}

impl MeasurementEnsemble {
    pub fn new(field: Field, shape: Shape, operators: Vec<DenseMatrix>) -> Result<MeasurementEnsemble> {
        let e = MeasurementEnsemble { field, shape, operators, ranks: None, hermitian: false, seed: None };
        e.validate()?;
        Ok(e)
    }

    pub fn with_ranks(mut self, ranks: Vec<usize>) -> Result<MeasurementEnsemble> {
        self.ranks = Some(ranks);
        self.validate()?;
        Ok(self)
    }

    pub fn with_hermitian(mut self, hermitian: bool) -> Result<MeasurementEnsemble> {
        self.hermitian = hermitian;
        self.validate()?;
        Ok(self)
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> MeasurementEnsemble {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidEnsemble(msg));
        if self.operators.is_empty() {
            return bad("ensemble needs at least one operator".into());
        }
        if self.shape.d() == 0 {
            return bad("ambient dimension must be positive".into());
        }
        for (j, a) in self.operators.iter().enumerate() {
            self.shape.check(a, "operator")?;
            ensure_finite(a, "operator")?;
            if self.field == Field::Real && max_imag(a) != 0.0 {
                return bad(format!("operator {j} has imaginary entries in a real ensemble"));
            }
            if self.hermitian {
                if !matches!(self.shape, Shape::Matrix(_)) {
                    return bad("only matrix ensembles can be Hermitian".into());
                }
                if hermitian_defect(a) > HERMITIAN_TOL {
                    return bad(format!("operator {j} is not Hermitian"));
                }
            }
        }
        if let Some(ranks) = &self.ranks {
            if ranks.len() != self.operators.len() {
                return bad(format!("{} ranks for {} operators", ranks.len(), self.operators.len()));
            }
            if let Shape::Matrix(d) = self.shape {
                for (j, (a, &r)) in self.operators.iter().zip(ranks).enumerate() {
                    if r > d {
                        return bad(format!("rank {r} of operator {j} exceeds {d}"));
                    }
                    if SortedSvd::new(a).sigma(r) > RANK_TOL * frobenius(a).max(f64::MIN_POSITIVE) {
                        return bad(format!("operator {j} has rank above {r}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn d(&self) -> usize {
        self.shape.d()
    }

    pub fn m(&self) -> usize {
        self.operators.len()
    }

    pub fn operators(&self) -> &[DenseMatrix] {
        &self.operators
    }

    pub fn ranks(&self) -> Option<&[usize]> {
        self.ranks.as_deref()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// First `m` operators (keeps ranks and flags).
    pub fn truncated(&self, m: usize) -> Result<MeasurementEnsemble> {
        let mut e = self.clone();
        e.operators.truncate(m);
        if let Some(r) = &mut e.ranks {
            r.truncate(m);
        }
        e.validate()?;
        Ok(e)
    }

    /// `y_j = <A_j, x> = Tr(A_j x*)`.
    pub fn apply(&self, x: &DenseMatrix) -> Result<SampleVector> {
        self.shape.check(x, "signal")?;
        Ok(SampleVector { y: self.apply_unchecked(x), provenance: None })
    }

    pub(crate) fn apply_unchecked(&self, x: &DenseMatrix) -> Vec<C64> {
        self.operators.iter().map(|a| inner(a, x)).collect()
    }

    /// Adjoint of the (real-linear) sampling map: `sum_j conj(z_j) A_j`.
    pub fn adjoint(&self, z: &[C64]) -> Result<DenseMatrix> {
        if z.len() != self.m() {
            return Err(Error::Shape { expected: format!("{} samples", self.m()), found: z.len().to_string() });
        }
        let mut out = self.shape.zeros();
        for (a, zj) in self.operators.iter().zip(z) {
            let c = zj.conj();
            if c != ZERO {
                out.zip_apply(a, |o, v| *o += v * c);
            }
        }
        Ok(out)
    }

    /// Real matrix of the sampling map restricted to `space`.
    pub fn realified(&self, space: &CoordSpace) -> Result<DMatrix<f64>> {
        if space.shape != self.shape {
            return Err(Error::Shape {
                expected: format!("{} of dimension {}", self.shape.name(), self.d()),
                found: format!("{} of dimension {}", space.shape.name(), space.shape.d()),
            });
        }
        Ok(space.realify(self.m(), |b| self.apply_unchecked(b)))
    }

    /// Orthonormal kernel basis of the sampling map on `space` (cutoff
    /// `1e-10 * sigma_max`), together with the realified map and `sigma_max`.
    pub fn kernel(&self, space: &CoordSpace) -> Result<KernelInfo> {
        let op = self.realified(space)?;
        let (basis, sigma_max) = real_nullspace(&op, 1e-10);
        Ok(KernelInfo { op, basis, sigma_max })
    }

    /// Matrix ensemble `{a_j a_j*}` from a vector ensemble.
    pub fn lifted(&self) -> Result<MeasurementEnsemble> {
        match self.shape {
            Shape::Matrix(_) => Ok(self.clone()),
            Shape::Vector(d) => {
                let ops = self.operators.iter().map(lift_rank_one).collect();
                Ok(MeasurementEnsemble {
                    field: self.field,
                    shape: Shape::Matrix(d),
                    operators: ops,
                    ranks: Some(vec![1; self.m()]),
                    hermitian: true,
                    seed: self.seed,
                })
            }
        }
    }

    pub fn to_file(&self) -> EnsembleFile {
        EnsembleFile {
            field: self.field,
            shape: self.shape.name().to_string(),
            d: self.d(),
            m: self.m(),
            operators: self
                .operators
                .iter()
                .map(|a| match self.shape {
                    Shape::Vector(_) => MatrixJson::from(&a.transpose()),
                    Shape::Matrix(_) => MatrixJson::from(a),
                })
                .collect(),
            ranks: self.ranks.clone(),
            hermitian: self.hermitian.then_some(true),
            seed: self.seed,
        }
    }

    pub fn from_file(file: &EnsembleFile) -> Result<MeasurementEnsemble> {
        let shape = match file.shape.as_str() {
            "vector" => Shape::Vector(file.d),
            "matrix" => Shape::Matrix(file.d),
            other => return Err(Error::InvalidEnsemble(format!("unknown shape {other:?}"))),
        };
        if file.m != file.operators.len() {
            return Err(Error::InvalidEnsemble(format!("m = {} but {} operators", file.m, file.operators.len())));
        }
        let mut ops = Vec::with_capacity(file.m);
        for op in &file.operators {
            let a = op.to_matrix()?;
            ops.push(match shape {
                Shape::Vector(_) => a.transpose(),
                Shape::Matrix(_) => a,
            });
        }
        let e = MeasurementEnsemble {
            field: file.field,
            shape,
            operators: ops,
            ranks: file.ranks.clone(),
            hermitian: file.hermitian.unwrap_or(false),
            seed: file.seed,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn to_json(&self) -> Result<String> {
        crate::json::to_canonical_string(&self.to_file())
    }

    pub fn from_json(text: &str) -> Result<MeasurementEnsemble> {
        let file: EnsembleFile = serde_json::from_str(text)?;
        MeasurementEnsemble::from_file(&file)
    }
}

pub struct KernelInfo {
    /// Realified sampling map (rows: real/imaginary parts of samples).
    pub op: DMatrix<f64>,
    /// Orthonormal kernel basis as columns.
    pub basis: DMatrix<f64>,
    pub sigma_max: f64,
}

impl KernelInfo {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }
}

/// On-disk ensemble. Vector operators are stored as a single row.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnsembleFile {
    pub field: Field,
    pub shape: String,
    pub d: usize,
    pub m: usize,
    pub operators: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hermitian: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleVector {
    pub y: Vec<C64>,
    pub provenance: Option<String>,
}

impl SampleVector {
    pub fn norm(&self) -> f64 {
        self.y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_file(&self) -> SampleFile {
        SampleFile {
            m: self.y.len(),
            y: self.y.iter().map(|z| [z.re, z.im]).collect(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn from_file(file: &SampleFile) -> Result<SampleVector> {
        if file.m != file.y.len() {
            return Err(Error::Shape { expected: format!("{} samples", file.m), found: file.y.len().to_string() });
        }
        let y: Vec<C64> = file.y.iter().map(|p| C64::new(p[0], p[1])).collect();
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("samples"));
        }
        Ok(SampleVector { y, provenance: file.provenance.clone() })
    }
}

/// On-disk samples: complex values as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleFile {
    pub m: usize,
    pub y: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
}

/// `a a*` for a column vector `a`.
pub fn lift_rank_one(a: &DenseMatrix) -> DenseMatrix {
    let d = a.nrows();
    let mut out = DenseMatrix::zeros(d, d);
    for i in 0..d {
        out[(i, i)] = C64::new(a[i].norm_sqr(), 0.0);
        for k in i + 1..d {
            let v = a[i] * a[k].conj();
            out[(i, k)] = v;
            out[(k, i)] = v.conj();
        }
    }
    out
}

/// `tau(A) = (A + A^T)/2 + i (A - A^T)/2`, a linear isometry from real
/// matrices onto Hermitian matrices.
pub fn tau(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::Shape { expected: "square matrix".into(), found: format!("{:?}", a.shape()) });
    }
    if max_imag(a) != 0.0 {
        return Err(crate::error::domain("tau is defined on real matrices only"));
    }
    let at = a.transpose();
    let sym = (a + &at).scale(0.5);
    let skew = (a - &at).scale(0.5);
    Ok(sym + skew * I)
}

/// Inverse of [`tau`]: `Re(H) + Im(H)`.
pub fn tau_inverse(h: &DenseMatrix) -> Result<DenseMatrix> {
    if !h.is_square() {
        return Err(Error::Shape { expected: "square matrix".into(), found: format!("{:?}", h.shape()) });
    }
    if hermitian_defect(h) > HERMITIAN_TOL * frobenius(h).max(1.0) {
        return Err(crate::error::domain("tau_inverse needs a Hermitian matrix"));
    }
    Ok(h.map(|z| C64::new(z.re + z.im, 0.0)))
}

fn draw(rng: &mut StreamRng, field: Field) -> C64 {
    match field {
        Field::Real => C64::new(rng::normal(rng), 0.0),
        Field::Complex => rng::complex_normal(rng),
    }
}

/// Random element of the given shape with i.i.d. Gaussian entries.
pub fn gaussian_element(rng: &mut StreamRng, shape: Shape, field: Field) -> DenseMatrix {
    let (r, c) = shape.dims();
    DenseMatrix::from_fn(r, c, |_, _| draw(rng, field))
}

/// Operator `j` is drawn from stream `(seed, j)`, so a prefix of a larger
/// ensemble equals the smaller ensemble with the same seed.
fn generate<F>(field: Field, shape: Shape, m: usize, seed: u64, f: F) -> Result<MeasurementEnsemble>
where
    F: Fn(&mut StreamRng, usize) -> DenseMatrix,
{
    let ops = (0..m).map(|j| f(&mut rng::stream(seed, j as u64), j)).collect();
    Ok(MeasurementEnsemble::new(field, shape, ops)?.with_seed(Some(seed)))
}

pub fn gen_gaussian_vectors(d: usize, m: usize, field: Field, seed: u64) -> Result<MeasurementEnsemble> {
    generate(field, Shape::Vector(d), m, seed, |rng, _| gaussian_element(rng, Shape::Vector(d), field))
}

pub fn gen_gaussian_matrices(d: usize, m: usize, field: Field, seed: u64) -> Result<MeasurementEnsemble> {
    generate(field, Shape::Matrix(d), m, seed, |rng, _| gaussian_element(rng, Shape::Matrix(d), field))
}

/// Real symmetric `A_j = sum_{i <= r_j} z_i z_i^T` with Gaussian `z_i`.
pub fn gen_symmetric_rank(d: usize, ranks: &[usize], seed: u64) -> Result<MeasurementEnsemble> {
    if let Some(&r) = ranks.iter().find(|&&r| r > d) {
        return Err(crate::error::domain(format!("rank {r} exceeds dimension {d}")));
    }
    let e = generate(Field::Real, Shape::Matrix(d), ranks.len(), seed, |rng, j| {
        let mut a = DenseMatrix::zeros(d, d);
        for _ in 0..ranks[j] {
            let z = gaussian_element(rng, Shape::Vector(d), Field::Real);
            a += lift_rank_one(&z);
        }
        a
    })?;
    e.with_ranks(ranks.to_vec())?.with_hermitian(true)
}

/// Hermitian `A_j = sum_{i <= r_j} lambda_i u_i u_i*` with real Gaussian
/// `lambda_i` and complex Gaussian `u_i`.
pub fn gen_hermitian_rank(d: usize, ranks: &[usize], seed: u64) -> Result<MeasurementEnsemble> {
    if let Some(&r) = ranks.iter().find(|&&r| r > d) {
        return Err(crate::error::domain(format!("rank {r} exceeds dimension {d}")));
    }
    let e = generate(Field::Complex, Shape::Matrix(d), ranks.len(), seed, |rng, j| {
        let mut a = DenseMatrix::zeros(d, d);
        for _ in 0..ranks[j] {
            let lambda = rng::normal(rng);
            let u = gaussian_element(rng, Shape::Vector(d), Field::Complex);
            a += lift_rank_one(&u).scale(lambda);
        }
        a
    })?;
    e.with_ranks(ranks.to_vec())?.with_hermitian(true)
}

/// Lifted phase-retrieval ensemble `{a_j a_j*}` with Gaussian `a_j`.
pub fn gen_rank_one_lifts(d: usize, m: usize, field: Field, seed: u64) -> Result<MeasurementEnsemble> {
    gen_gaussian_vectors(d, m, field, seed)?.lifted()
}
