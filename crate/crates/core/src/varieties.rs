//! Signal varieties: descriptors, dimension formulas, difference sets and
//! metric projections.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::linalg::{
    ensure_finite, frobenius, hermitian_defect, hermitize, max_imag, real_part, symmetrize, DenseMatrix,
    Field, HermitianEigen, Shape, SortedSvd,
};

/// Default relative tolerance for [`membership`].
pub const MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarietyKind {
    /// Vectors in `F^d` with at most `k` nonzero entries.
    Sparse,
    /// `d x d` matrices of rank at most `r`.
    LowRank,
    /// Symmetric (`X = X^T`) `d x d` matrices of rank at most `r`.
    SymLowRank,
    /// Hermitian matrices with at most one positive and one negative
    /// eigenvalue: the differences `xx* - yy*`.
    HermSig,
    /// Real rank-one `d x d` matrices `uv^T`.
    RankOneReal,
    /// Rank-one positive semidefinite lifts `xx*`.
    LiftedPhase,
}

impl VarietyKind {
    pub fn name(&self) -> &'static str {
        match self {
            VarietyKind::Sparse => "sparse",
            VarietyKind::LowRank => "low_rank",
            VarietyKind::SymLowRank => "sym_low_rank",
            VarietyKind::HermSig => "herm_sig",
            VarietyKind::RankOneReal => "rank_one_real",
            VarietyKind::LiftedPhase => "lifted_phase",
        }
    }

    pub fn parse(s: &str) -> Option<VarietyKind> {
        Some(match s {
            "sparse" => VarietyKind::Sparse,
            "low_rank" => VarietyKind::LowRank,
            "sym_low_rank" => VarietyKind::SymLowRank,
            "herm_sig" => VarietyKind::HermSig,
            "rank_one_real" => VarietyKind::RankOneReal,
            "lifted_phase" | "phase" => VarietyKind::LiftedPhase,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct VarietySpec {
    pub kind: VarietyKind,
    pub d: usize,
    pub k_or_r: usize,
    pub field: Field,
}

#[derive(Deserialize)]
struct RawSpec {
    kind: VarietyKind,
    d: usize,
    k_or_r: usize,
    field: Field,
}

impl TryFrom<RawSpec> for VarietySpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        VarietySpec::new(raw.kind, raw.d, raw.k_or_r, raw.field)
    }
}

impl VarietySpec {
    pub fn new(kind: VarietyKind, d: usize, k_or_r: usize, field: Field) -> Result<VarietySpec> {
        if d == 0 {
            return Err(Error::InvalidVariety("ambient dimension must be positive".into()));
        }
        if k_or_r > d {
            return Err(Error::InvalidVariety(format!(
                "{} parameter {k_or_r} exceeds ambient dimension {d}",
                kind.name()
            )));
        }
        let fixed = match kind {
            VarietyKind::HermSig => Some((2.min(d), Field::Complex)),
            VarietyKind::RankOneReal => Some((1, Field::Real)),
            VarietyKind::LiftedPhase => Some((1, field)),
            _ => None,
        };
        if let Some((param, f)) = fixed {
            if k_or_r != param || field != f {
                return Err(Error::InvalidVariety(format!(
                    "{} requires parameter {param} over {f:?}",
                    kind.name()
                )));
            }
        }
        Ok(VarietySpec { kind, d, k_or_r, field })
    }

    pub fn sparse(d: usize, k: usize, field: Field) -> Result<VarietySpec> {
        VarietySpec::new(VarietyKind::Sparse, d, k, field)
    }

    pub fn low_rank(d: usize, r: usize, field: Field) -> Result<VarietySpec> {
        VarietySpec::new(VarietyKind::LowRank, d, r, field)
    }

    pub fn sym_low_rank(d: usize, r: usize, field: Field) -> Result<VarietySpec> {
        VarietySpec::new(VarietyKind::SymLowRank, d, r, field)
    }

    pub fn herm_sig(d: usize) -> VarietySpec {
        VarietySpec { kind: VarietyKind::HermSig, d, k_or_r: 2.min(d), field: Field::Complex }
    }

    pub fn rank_one_real(d: usize) -> VarietySpec {
        VarietySpec { kind: VarietyKind::RankOneReal, d, k_or_r: 1, field: Field::Real }
    }

    pub fn lifted_phase(d: usize, field: Field) -> VarietySpec {
        VarietySpec { kind: VarietyKind::LiftedPhase, d, k_or_r: 1, field }
    }

    /// Parse `kind:d:param`, e.g. `low_rank:4:1`, `sparse:8:2`, `lifted_phase:3`.
    pub fn parse(text: &str, field: Field) -> Result<VarietySpec> {
        let parts: Vec<&str> = text.split(':').collect();
        let kind = VarietyKind::parse(parts[0])
            .ok_or_else(|| Error::InvalidVariety(format!("unknown variety kind {:?}", parts[0])))?;
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .ok_or_else(|| Error::InvalidVariety(format!("missing field {i} in {text:?}")))?
                .parse()
                .map_err(|_| Error::InvalidVariety(format!("bad integer in {text:?}")))
        };
        let d = num(1)?;
        match kind {
            VarietyKind::HermSig => Ok(VarietySpec::herm_sig(d)),
            VarietyKind::RankOneReal => Ok(VarietySpec::rank_one_real(d)),
            VarietyKind::LiftedPhase => Ok(VarietySpec::lifted_phase(d, field)),
            _ => VarietySpec::new(kind, d, num(2)?, field),
        }
    }

    pub fn ambient(&self) -> Shape {
        match self.kind {
            VarietyKind::Sparse => Shape::Vector(self.d),
            _ => Shape::Matrix(self.d),
        }
    }

    /// Real dimension of the ambient space.
    pub fn ambient_real_dim(&self) -> usize {
        let n = self.ambient().len();
        match self.field {
            Field::Real => n,
            Field::Complex => 2 * n,
        }
    }

    /// Dimension of the variety (complex dimension of the complexification for
    /// the algebraic kinds; real dimension for the Hermitian kinds).
    pub fn dimension(&self) -> usize {
        let (d, p) = (self.d, self.k_or_r);
        match self.kind {
            VarietyKind::Sparse => dim_sparse(d, p).unwrap_or(0),
            VarietyKind::LowRank => dim_low_rank(d, p).unwrap_or(0),
            VarietyKind::SymLowRank => dim_complex_symmetric(d, p).unwrap_or(0),
            VarietyKind::HermSig => dim_low_rank(d, 2.min(d)).unwrap_or(0),
            VarietyKind::RankOneReal => dim_low_rank(d, 1).unwrap_or(0),
            VarietyKind::LiftedPhase => match self.field {
                Field::Real => d,
                Field::Complex => 2 * d - 1,
            },
        }
    }

    /// True when the variety is its whole coordinate space, so injectivity is
    /// a plain kernel question.
    pub fn is_full_space(&self) -> bool {
        match self.kind {
            VarietyKind::Sparse | VarietyKind::LowRank | VarietyKind::SymLowRank => self.k_or_r == self.d,
            VarietyKind::HermSig | VarietyKind::RankOneReal => self.d == 1,
            VarietyKind::LiftedPhase => false,
        }
    }
}

pub fn dim_low_rank(d: usize, r: usize) -> Result<usize> {
    if d == 0 || r > d {
        return Err(domain(format!("rank {r} outside [0, {d}]")));
    }
    Ok(2 * d * r - r * r)
}

pub fn dim_complex_symmetric(d: usize, r: usize) -> Result<usize> {
    if d == 0 || r > d {
        return Err(domain(format!("rank {r} outside [0, {d}]")));
    }
    Ok(d * r - r * r.saturating_sub(1) / 2)
}

pub fn dim_sparse(d: usize, k: usize) -> Result<usize> {
    if d == 0 || k > d {
        return Err(domain(format!("sparsity {k} outside [0, {d}]")));
    }
    Ok(k)
}

/// The variety containing every difference `x - y` of two members of `w`.
pub fn difference_closure(w: &VarietySpec) -> VarietySpec {
    let d = w.d;
    let doubled = (2 * w.k_or_r).min(d);
    match w.kind {
        VarietyKind::Sparse => VarietySpec { k_or_r: doubled, ..*w },
        VarietyKind::LowRank => VarietySpec { k_or_r: doubled, ..*w },
        VarietyKind::SymLowRank => VarietySpec { k_or_r: doubled, ..*w },
        VarietyKind::LiftedPhase => match w.field {
            Field::Real => VarietySpec::rank_one_real(d),
            Field::Complex => VarietySpec::herm_sig(d),
        },
        // Already closed under differences as far as the sampling map can tell.
        VarietyKind::HermSig | VarietyKind::RankOneReal => *w,
    }
}

fn check_input(x: &DenseMatrix, w: &VarietySpec) -> Result<()> {
    w.ambient().check(x, w.kind.name())?;
    ensure_finite(x, "projection input")
}

/// Nearest point of `w` to `x` in Frobenius / Euclidean norm.
pub fn project(x: &DenseMatrix, w: &VarietySpec) -> Result<DenseMatrix> {
    check_input(x, w)?;
    let x = match w.field {
        Field::Real => real_part(x),
        Field::Complex => x.clone(),
    };
    let out = match w.kind {
        VarietyKind::Sparse => project_sparse(&x, w.k_or_r),
        VarietyKind::LowRank => SortedSvd::new(&x).truncate(w.k_or_r),
        VarietyKind::SymLowRank => {
            let s = symmetrize(&x);
            match w.field {
                Field::Real => {
                    // Keep the r eigenvalues of largest magnitude.
                    let eig = HermitianEigen::new(&s);
                    let mut order: Vec<usize> = (0..eig.values.len()).collect();
                    order.sort_by(|&a, &b| eig.values[b].abs().total_cmp(&eig.values[a].abs()).then(a.cmp(&b)));
                    let mut acc = DenseMatrix::zeros(w.d, w.d);
                    for &i in order.iter().take(w.k_or_r) {
                        acc += eig.rank_one(i);
                    }
                    acc
                }
                Field::Complex => symmetrize(&SortedSvd::new(&s).truncate(w.k_or_r)),
            }
        }
        VarietyKind::HermSig => {
            let eig = HermitianEigen::new(&x);
            let n = eig.values.len();
            let mut acc = DenseMatrix::zeros(w.d, w.d);
            if eig.values[0] > 0.0 {
                acc += eig.rank_one(0);
            }
            if n > 1 && eig.values[n - 1] < 0.0 {
                acc += eig.rank_one(n - 1);
            }
            hermitize(&acc)
        }
        VarietyKind::RankOneReal => SortedSvd::new(&x).truncate(1),
        VarietyKind::LiftedPhase => {
            let eig = HermitianEigen::new(&x);
            if eig.values[0] > 0.0 {
                hermitize(&eig.rank_one(0))
            } else {
                DenseMatrix::zeros(w.d, w.d)
            }
        }
    };
    Ok(match w.field {
        Field::Real => real_part(&out),
        Field::Complex => out,
    })
}

/// Keep the `k` largest-magnitude entries; ties go to the lower index.
fn project_sparse(x: &DenseMatrix, k: usize) -> DenseMatrix {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].norm().total_cmp(&x[a].norm()).then(a.cmp(&b)));
    let mut out = DenseMatrix::zeros(x.nrows(), x.ncols());
    for &i in order.iter().take(k) {
        out[i] = x[i];
    }
    out
}

/// Whether `x` lies on `w` up to the relative tolerance `tol * ||x||`.
pub fn membership(x: &DenseMatrix, w: &VarietySpec, tol: f64) -> Result<bool> {
    check_input(x, w)?;
    let norm = frobenius(x);
    let slack = tol * norm;
    if w.field == Field::Real && max_imag(x) > slack {
        return Ok(false);
    }
    let ok = match w.kind {
        VarietyKind::Sparse => {
            let mut mags: Vec<f64> = x.iter().map(|z| z.norm()).collect();
            mags.sort_by(|a, b| b.total_cmp(a));
            mags.get(w.k_or_r).is_none_or(|&m| m <= slack)
        }
        VarietyKind::LowRank | VarietyKind::RankOneReal => SortedSvd::new(x).sigma(w.k_or_r) <= slack,
        VarietyKind::SymLowRank => {
            frobenius(&(x - x.transpose())) <= slack && SortedSvd::new(x).sigma(w.k_or_r) <= slack
        }
        VarietyKind::HermSig => {
            if hermitian_defect(x) > slack {
                false
            } else {
                let v = HermitianEigen::new(x).values;
                let n = v.len();
                n < 2 || (v[1] <= slack && v[n - 2] >= -slack)
            }
        }
        VarietyKind::LiftedPhase => {
            if hermitian_defect(x) > slack {
                false
            } else {
                let v = HermitianEigen::new(x).values;
                v.iter().skip(1).all(|&e| e.abs() <= slack) && v[0] >= -slack
            }
        }
    };
    Ok(ok)
}
