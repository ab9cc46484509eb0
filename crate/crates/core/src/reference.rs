//! Compiled-in reference data: eleven integer `4 x 4` matrices whose sampling
//! map is injective on real rank-one matrices (one fewer than the generic
//! count), and the skew corner functional that defeats admissibility of
//! symmetric matrices.

use crate::error::{domain, Result};
use crate::linalg::{DenseMatrix, Field, Shape, C64};
use crate::sampling::MeasurementEnsemble;

/// Entries stored as integers so no float rounding can creep in.
pub const ELEVEN_MATRICES: [[[i8; 4]; 4]; 11] = [
    [[-4, 1, 3, 4], [-4, 4, 4, 3], [4, -3, 0, -3], [0, -4, 2, 1]],
    [[0, 3, -1, -1], [0, -2, -1, 2], [0, 3, -2, 3], [1, -1, -3, 2]],
    [[-1, -4, -1, -1], [4, 0, -1, 1], [-2, 0, 0, 2], [0, -1, 2, 2]],
    [[-2, -2, 4, 1], [-2, 0, 2, 3], [1, -2, -4, 3], [-3, 3, 4, -2]],
    [[4, 2, -4, -4], [-4, -3, 0, 0], [1, -4, 4, -2], [3, 0, 2, 0]],
    [[2, 2, 3, 4], [2, -4, 3, 1], [0, -2, 1, -2], [-1, 0, -1, -4]],
    [[2, 1, 4, 0], [-1, -3, 0, -1], [4, -1, -4, 3], [0, 3, 0, 4]],
    [[0, 3, -1, 2], [4, 2, 1, 1], [-2, -1, 3, 4], [3, 0, 3, 3]],
    [[2, -1, 4, -4], [-2, 2, 3, -1], [-1, 1, 4, -1], [-3, -4, 4, 3]],
    [[-4, 2, 0, -1], [4, 1, 0, 4], [-1, -3, 4, 1], [-3, 2, 4, -4]],
    [[1, 1, -2, 0], [3, 0, -2, -4], [2, -4, -2, 4], [4, 3, 2, -2]],
];

/// The same matrices transcribed a second time, row by row as printed, so a
/// typo in either copy shows up as a mismatch.
pub const ELEVEN_MATRICES_TEXT: &str = "
A1:  -4  1  3  4 | -4  4  4  3 |  4 -3  0 -3 |  0 -4  2  1
A2:   0  3 -1 -1 |  0 -2 -1  2 |  0  3 -2  3 |  1 -1 -3  2
A3:  -1 -4 -1 -1 |  4  0 -1  1 | -2  0  0  2 |  0 -1  2  2
A4:  -2 -2  4  1 | -2  0  2  3 |  1 -2 -4  3 | -3  3  4 -2
A5:   4  2 -4 -4 | -4 -3  0  0 |  1 -4  4 -2 |  3  0  2  0
A6:   2  2  3  4 |  2 -4  3  1 |  0 -2  1 -2 | -1  0 -1 -4
A7:   2  1  4  0 | -1 -3  0 -1 |  4 -1 -4  3 |  0  3  0  4
A8:   0  3 -1  2 |  4  2  1  1 | -2 -1  3  4 |  3  0  3  3
A9:   2 -1  4 -4 | -2  2  3 -1 | -1  1  4 -1 | -3 -4  4  3
A10: -4  2  0 -1 |  4  1  0  4 | -1 -3  4  1 | -3  2  4 -4
A11:  1  1 -2  0 |  3  0 -2 -4 |  2 -4 -2  4 |  4  3  2 -2
";

/// Parse [`ELEVEN_MATRICES_TEXT`]-style text into integer matrices.
pub fn parse_matrix_text(text: &str) -> Result<Vec<[[i8; 4]; 4]>> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let (_, body) = line.split_once(':').ok_or_else(|| domain(format!("missing label in {line:?}")))?;
        let rows: Vec<&str> = body.split('|').collect();
        if rows.len() != 4 {
            return Err(domain(format!("expected 4 rows in {line:?}")));
        }
        let mut m = [[0i8; 4]; 4];
        for (i, row) in rows.iter().enumerate() {
            let vals: Vec<i8> = row
                .split_whitespace()
                .map(|t| t.parse::<i8>().map_err(|_| domain(format!("bad entry {t:?}"))))
                .collect::<Result<_>>()?;
            if vals.len() != 4 {
                return Err(domain(format!("expected 4 entries in row {row:?}")));
            }
            m[i].copy_from_slice(&vals);
        }
        out.push(m);
    }
    Ok(out)
}

pub fn to_matrix(a: &[[i8; 4]; 4]) -> DenseMatrix {
    DenseMatrix::from_fn(4, 4, |i, k| C64::new(f64::from(a[i][k]), 0.0))
}

/// Whether the compiled-in array agrees with the text transcription.
pub fn embedded_data_matches() -> bool {
    parse_matrix_text(ELEVEN_MATRICES_TEXT).is_ok_and(|parsed| parsed == ELEVEN_MATRICES)
}

/// The eleven matrices as a real `4 x 4` ensemble.
pub fn eleven_matrix_ensemble() -> MeasurementEnsemble {
    let ops = ELEVEN_MATRICES.iter().map(to_matrix).collect();
    MeasurementEnsemble::new(Field::Real, Shape::Matrix(4), ops).expect("reference matrices are valid")
}

/// `+1` at `(1, d)`, `-1` at `(d, 1)` (1-based), zero elsewhere. Its
/// functional `Tr(Q X^T)` vanishes on every symmetric `X`.
pub fn skew_corner(d: usize) -> Result<DenseMatrix> {
    if d < 2 {
        return Err(domain("skew corner matrix needs d >= 2"));
    }
    let mut q = DenseMatrix::zeros(d, d);
    q[(0, d - 1)] = C64::new(1.0, 0.0);
    q[(d - 1, 0)] = C64::new(-1.0, 0.0);
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn copies_agree() {
        assert!(embedded_data_matches());
        assert_eq!(ELEVEN_MATRICES[0][0], [-4, 1, 3, 4]);
        assert_eq!(ELEVEN_MATRICES[10][3], [4, 3, 2, -2]);
    }

    #[test]
    fn corrupted_copy_is_detected() {
        let bad = ELEVEN_MATRICES_TEXT.replacen("A1:  -4", "A1:   4", 1);
        assert_ne!(parse_matrix_text(&bad).unwrap(), ELEVEN_MATRICES);
    }

    #[test]
    fn skew_corner_is_skew() {
        for d in [2, 4, 8] {
            let q = skew_corner(d).unwrap();
            assert_eq!(q.transpose(), -&q);
            assert_eq!(q.iter().filter(|z| z.norm() != 0.0).count(), 2);
        }
        assert!(skew_corner(1).is_err());
    }

    #[test]
    fn ensemble_shape() {
        let e = eleven_matrix_ensemble();
        assert_eq!((e.m(), e.d(), e.field()), (11, 4, Field::Real));
    }
}
