//! Real orthonormal coordinates for the linear spaces that host varieties.
//!
//! The sampling map `X -> (Tr(A_j X*))_j` is only real-linear, so kernels and
//! projections are computed on real coordinates. Every basis here is
//! orthonormal for `Re Tr(X Y*)`, which makes coordinate norms equal to
//! Frobenius norms.

use nalgebra::{DMatrix, DVector};

use crate::linalg::{DenseMatrix, Field, Shape, C64, I, ONE};
use crate::varieties::{VarietyKind, VarietySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Real,
    Complex,
    Hermitian,
    RealSymmetric,
    ComplexSymmetric,
}

#[derive(Debug, Clone)]
pub struct CoordSpace {
    pub shape: Shape,
    pub kind: SpaceKind,
    basis: Vec<DenseMatrix>,
}

impl CoordSpace {
    pub fn new(shape: Shape, kind: SpaceKind) -> CoordSpace {
        let (rows, cols) = shape.dims();
        let d = rows;
        let mut basis = Vec::new();
        let elem = |i: usize, k: usize, v: C64| {
            let mut m = DenseMatrix::zeros(rows, cols);
            m[(i, k)] = v;
            m
        };
        match kind {
            SpaceKind::Real | SpaceKind::Complex => {
                for i in 0..rows {
                    for k in 0..cols {
                        basis.push(elem(i, k, ONE));
                        if kind == SpaceKind::Complex {
                            basis.push(elem(i, k, I));
                        }
                    }
                }
            }
            SpaceKind::Hermitian => {
                let h = C64::new(0.5, 0.0);
                for i in 0..d {
                    for k in 0..d {
                        // tau(E_ik): symmetric part plus i times skew part.
                        let mut m = DenseMatrix::zeros(d, d);
                        m[(i, k)] += h + I * h;
                        m[(k, i)] += h - I * h;
                        basis.push(m);
                    }
                }
            }
            SpaceKind::RealSymmetric | SpaceKind::ComplexSymmetric => {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let scalars: &[C64] = if kind == SpaceKind::ComplexSymmetric { &[ONE, I] } else { &[ONE] };
                for i in 0..d {
                    for k in i..d {
                        for &c in scalars {
                            let mut m = DenseMatrix::zeros(d, d);
                            if i == k {
                                m[(i, i)] = c;
                            } else {
                                m[(i, k)] = c * s;
                                m[(k, i)] = c * s;
                            }
                            basis.push(m);
                        }
                    }
                }
            }
        }
        CoordSpace { shape, kind, basis }
    }

    /// The space a variety lives in.
    pub fn for_variety(w: &VarietySpec) -> CoordSpace {
        let kind = match (w.kind, w.field) {
            (VarietyKind::HermSig, _) | (VarietyKind::LiftedPhase, Field::Complex) => SpaceKind::Hermitian,
            (VarietyKind::LiftedPhase, Field::Real) => SpaceKind::RealSymmetric,
            (VarietyKind::SymLowRank, Field::Real) => SpaceKind::RealSymmetric,
            (VarietyKind::SymLowRank, Field::Complex) => SpaceKind::ComplexSymmetric,
            (_, Field::Real) => SpaceKind::Real,
            (_, Field::Complex) => SpaceKind::Complex,
        };
        CoordSpace::new(w.ambient(), kind)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[DenseMatrix] {
        &self.basis
    }

    /// Orthogonal projection of `x` onto the space, in coordinates.
    pub fn to_coords(&self, x: &DenseMatrix) -> DVector<f64> {
        DVector::from_iterator(
            self.dim(),
            self.basis.iter().map(|b| b.iter().zip(x.iter()).map(|(p, q)| (q * p.conj()).re).sum()),
        )
    }

    pub fn from_coords(&self, c: &DVector<f64>) -> DenseMatrix {
        let mut out = self.shape.zeros();
        for (b, &w) in self.basis.iter().zip(c.iter()) {
            if w != 0.0 {
                out.zip_apply(b, |o, v| *o += v * w);
            }
        }
        out
    }

    /// Real matrix whose rows are the real and imaginary parts of a complex
    /// functional evaluated on the basis; identically zero rows are dropped.
    pub fn realify<F: Fn(&DenseMatrix) -> Vec<C64>>(&self, functionals: usize, apply: F) -> DMatrix<f64> {
        let cols: Vec<Vec<C64>> = self.basis.iter().map(&apply).collect();
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(2 * functionals);
        for j in 0..functionals {
            let re: Vec<f64> = cols.iter().map(|c| c[j].re).collect();
            let im: Vec<f64> = cols.iter().map(|c| c[j].im).collect();
            for row in [re, im] {
                if row.iter().any(|&v| v != 0.0) {
                    rows.push(row);
                }
            }
        }
        DMatrix::from_fn(rows.len(), self.dim(), |i, k| rows[i][k])
    }
}
