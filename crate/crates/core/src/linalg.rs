//! Dense complex matrices and the handful of factorizations the rest of the
//! crate leans on. Vectors are stored as `d x 1` matrices so that a single
//! inner product `<A, X> = Tr(A X*)` covers both ambient shapes.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type DenseMatrix = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn parse(s: &str) -> Option<Field> {
        match s {
            "real" | "R" => Some(Field::Real),
            "complex" | "C" => Some(Field::Complex),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

/// Ambient shape of a signal or sampling operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    Vector(usize),
    Matrix(usize),
}

impl Shape {
    pub fn d(&self) -> usize {
        match *self {
            Shape::Vector(d) | Shape::Matrix(d) => d,
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match *self {
            Shape::Vector(d) => (d, 1),
            Shape::Matrix(d) => (d, d),
        }
    }

    /// Number of scalar entries.
    pub fn len(&self) -> usize {
        let (r, c) = self.dims();
        r * c
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zeros(&self) -> DenseMatrix {
        let (r, c) = self.dims();
        DenseMatrix::zeros(r, c)
    }

    pub fn check(&self, x: &DenseMatrix, what: &str) -> Result<()> {
        if x.shape() != self.dims() {
            return Err(Error::Shape {
                expected: format!("{what} of shape {:?}", self.dims()),
                found: format!("{:?}", x.shape()),
            });
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            Shape::Vector(_) => "vector",
            Shape::Matrix(_) => "matrix",
        }
    }
}

/// `<A, X> = Tr(A X*) = sum_ik A_ik conj(X_ik)`.
pub fn inner(a: &DenseMatrix, x: &DenseMatrix) -> C64 {
    a.iter().zip(x.iter()).map(|(p, q)| p * q.conj()).sum()
}

pub fn frobenius(x: &DenseMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn all_finite(x: &DenseMatrix) -> bool {
    x.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_finite(x: &DenseMatrix, what: &'static str) -> Result<()> {
    if all_finite(x) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub fn max_imag(x: &DenseMatrix) -> f64 {
    x.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
}

pub fn real_part(x: &DenseMatrix) -> DenseMatrix {
    x.map(|z| C64::new(z.re, 0.0))
}

pub fn hermitize(x: &DenseMatrix) -> DenseMatrix {
    (x + x.adjoint()).scale(0.5)
}

pub fn symmetrize(x: &DenseMatrix) -> DenseMatrix {
    (x + x.transpose()).scale(0.5)
}

pub fn hermitian_defect(x: &DenseMatrix) -> f64 {
    frobenius(&(x - x.adjoint()))
}

pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> DenseMatrix {
    DenseMatrix::from_row_iterator(rows, cols, entries.iter().map(|&v| C64::new(v, 0.0)))
}

pub fn unit(d: usize, i: usize) -> DenseMatrix {
    let mut e = DenseMatrix::zeros(d, 1);
    e[(i, 0)] = ONE;
    e
}

pub fn elementary(d: usize, i: usize, k: usize) -> DenseMatrix {
    let mut e = DenseMatrix::zeros(d, d);
    e[(i, k)] = ONE;
    e
}

pub fn diag(values: &[f64]) -> DenseMatrix {
    let d = values.len();
    let mut m = DenseMatrix::zeros(d, d);
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = C64::new(v, 0.0);
    }
    m
}

/// Thin SVD with singular values in descending order.
pub struct SortedSvd {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v_t: DenseMatrix,
}

impl SortedSvd {
    pub fn new(x: &DenseMatrix) -> SortedSvd {
        let (rows, cols) = x.shape();
        let k = rows.min(cols);
        if k == 0 {
            return SortedSvd { u: DenseMatrix::zeros(rows, 0), singular_values: Vec::new(), v_t: DenseMatrix::zeros(0, cols) };
        }
        // nalgebra's bidiagonal SVD loses accuracy on rank-deficient input, so use faer.
        let m = faer::Mat::<faer::c64>::from_fn(rows, cols, |i, j| x[(i, j)]);
        let svd = m.thin_svd().expect("svd of a finite matrix");
        let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| s[b].re.total_cmp(&s[a].re).then(a.cmp(&b)));
        let u = DenseMatrix::from_fn(rows, k, |i, j| u[(i, order[j])]);
        let v_t = DenseMatrix::from_fn(k, cols, |i, j| v[(j, order[i])].conj());
        let singular_values = order.iter().map(|&i| s[i].re.max(0.0)).collect();
        SortedSvd { u, singular_values, v_t }
    }

    /// Sum of the leading `r` singular triples.
    pub fn truncate(&self, r: usize) -> DenseMatrix {
        self.partial(0..r.min(self.singular_values.len()))
    }

    pub fn partial(&self, range: std::ops::Range<usize>) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.u.nrows(), self.v_t.ncols());
        for i in range {
            let s = self.singular_values[i];
            if s == 0.0 {
                continue;
            }
            out += (self.u.column(i) * self.v_t.row(i)).scale(s);
        }
        out
    }

    /// Minimum-norm least-squares solution of `x * z = b`, dropping singular
    /// values at or below `rel_cutoff * sigma_max`.
    pub fn solve(&self, b: &DenseMatrix, rel_cutoff: f64) -> DenseMatrix {
        let cutoff = rel_cutoff * self.sigma(0);
        let mut z = DenseMatrix::zeros(self.v_t.ncols(), b.ncols());
        for (i, &s) in self.singular_values.iter().enumerate() {
            if s <= cutoff || s == 0.0 {
                continue;
            }
            let coef = (self.u.column(i).adjoint() * b).unscale(s);
            z += self.v_t.row(i).adjoint() * coef;
        }
        z
    }

    /// The `(i+1)`-th singular value, zero past the end.
    pub fn sigma(&self, i: usize) -> f64 {
        self.singular_values.get(i).copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of the Hermitian part of `x`, eigenvalues descending
/// (ties keep the solver's column order).
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl HermitianEigen {
    pub fn new(x: &DenseMatrix) -> HermitianEigen {
        let h = hermitize(x);
        let eig = h.symmetric_eigen();
        let vals = eig.eigenvalues;
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]).then(a.cmp(&b)));
        let vecs = eig.eigenvectors;
        let vectors = DenseMatrix::from_fn(vecs.nrows(), order.len(), |i, j| vecs[(i, order[j])]);
        let values = order.iter().map(|&i| vals[i]).collect();
        HermitianEigen { values, vectors }
    }

    pub fn rank_one(&self, idx: usize) -> DenseMatrix {
        let u = self.vectors.column(idx);
        (u * u.adjoint()).scale(self.values[idx])
    }
}

/// Orthonormal basis (as columns) of the null space of a real matrix, using the
/// cutoff `rel_cutoff * sigma_max`. Also returns `sigma_max`.
pub fn real_nullspace(m: &DMatrix<f64>, rel_cutoff: f64) -> (DMatrix<f64>, f64) {
    let n = m.ncols();
    if n == 0 {
        return (DMatrix::zeros(0, 0), 0.0);
    }
    // Pad to at least n rows so the SVD yields a complete right basis.
    let padded = if m.nrows() < n {
        let mut p = DMatrix::zeros(n, n);
        p.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = faer::Mat::<f64>::from_fn(padded.nrows(), n, |i, j| padded[(i, j)]).svd().expect("svd of a finite matrix");
    let v = svd.V();
    let s: Vec<f64> = svd.S().column_vector().iter().copied().collect();
    let sigma_max = s.iter().copied().fold(0.0, f64::max);
    let cutoff = rel_cutoff * sigma_max;
    let null: Vec<usize> = (0..s.len()).filter(|&i| s[i] <= cutoff).collect();
    let mut basis = DMatrix::zeros(n, null.len());
    for (j, &i) in null.iter().enumerate() {
        for r in 0..n {
            basis[(r, j)] = v[(r, i)];
        }
    }
    (basis, sigma_max)
}

/// Numerical rank of a real matrix (singular values above `rel_tol * sigma_max`).
pub fn real_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let s: Vec<f64> = faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
        .singular_values()
        .expect("svd of a finite matrix");
    let smax = s.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * smax).count()
}

pub fn to_real_vector(x: &DenseMatrix) -> DVector<f64> {
    DVector::from_iterator(x.len(), x.iter().map(|z| z.re))
}

/// Row-major `{re, im}` pair used by every JSON file the crate reads or writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&DenseMatrix> for MatrixJson {
    fn from(x: &DenseMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| {
            (0..x.nrows())
                .map(|i| (0..x.ncols()).map(|j| f(&x[(i, j)])).collect())
                .collect()
        };
        MatrixJson { re: rows(|z| z.re), im: rows(|z| z.im) }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<DenseMatrix> {
        let rows = self.re.len();
        let cols = self.re.first().map_or(0, Vec::len);
        let ragged = self.re.iter().any(|r| r.len() != cols)
            || self.im.len() != rows
            || self.im.iter().any(|r| r.len() != cols);
        if ragged {
            return Err(Error::Shape {
                expected: format!("consistent {rows}x{cols} re/im blocks"),
                found: "ragged matrix".into(),
            });
        }
        let m = DenseMatrix::from_fn(rows, cols, |i, j| C64::new(self.re[i][j], self.im[i][j]));
        ensure_finite(&m, "matrix")?;
        Ok(m)
    }
}

pub(crate) fn serialize_matrix<S: Serializer>(x: &DenseMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    MatrixJson::from(x).serialize(s)
}

pub(crate) fn serialize_opt_matrix<S: Serializer>(
    x: &Option<DenseMatrix>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    x.as_ref().map(MatrixJson::from).serialize(s)
}
