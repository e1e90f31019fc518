//! Fixed-size 4x4 real linear algebra: the third exterior power, singular
//! values and eigenvalues. Everything is allocation-free.

mod eigen;
mod svd;

use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

pub use eigen::{is_non_real, spectrum, Spectrum4};
pub use svd::{conorm, norm, singular_values};

pub type Vec4 = [f64; 4];

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum ExtAlgError {
    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("eigenvalue iteration did not converge within {sweeps} sweeps")]
    EigenNonConvergence { sweeps: usize },
}

/// Row-major 4x4 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat4(pub [[f64; 4]; 4]);

/// Index triples of the basis `e1^e2^e3, e1^e2^e4, e1^e3^e4, e2^e3^e4`.
pub const WEDGE3_BASIS: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];

impl Mat4 {
    pub const ZERO: Mat4 = Mat4([[0.0; 4]; 4]);

    pub fn identity() -> Self {
        Self::diag([1.0; 4])
    }

    pub fn diag(d: Vec4) -> Self {
        let mut m = Self::ZERO;
        for i in 0..4 {
            m.0[i][i] = d[i];
        }
        m
    }

    /// Checked constructor enforcing finite entries.
    pub fn try_from_rows(rows: [[f64; 4]; 4]) -> Result<Self, ExtAlgError> {
        for (row, r) in rows.iter().enumerate() {
            if let Some(col) = r.iter().position(|v| !v.is_finite()) {
                return Err(ExtAlgError::NonFinite { row, col });
            }
        }
        Ok(Self(rows))
    }

    pub fn from_columns(cols: [Vec4; 4]) -> Self {
        Self(cols).transpose()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                t.0[j][i] = self.0[i][j];
            }
        }
        t
    }

    pub fn column(&self, j: usize) -> Vec4 {
        [self.0[0][j], self.0[1][j], self.0[2][j], self.0[3][j]]
    }

    /// Determinant by Laplace expansion along 2x2 minors of the top rows.
    pub fn det(&self) -> f64 {
        let m = &self.0;
        let s = |c0: usize, c1: usize| m[0][c0] * m[1][c1] - m[0][c1] * m[1][c0];
        let t = |c0: usize, c1: usize| m[2][c0] * m[3][c1] - m[2][c1] * m[3][c0];
        s(0, 1) * t(2, 3) - s(0, 2) * t(1, 3) + s(0, 3) * t(1, 2) + s(1, 2) * t(0, 3) - s(1, 3) * t(0, 2)
            + s(2, 3) * t(0, 1)
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.0[i][i]).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &Mat4) -> f64 {
        self.0.iter().flatten().zip(other.0.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    pub fn apply(&self, v: Vec4) -> Vec4 {
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..4).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// Determinant of the 3x3 submatrix on the given rows and columns.
    pub fn minor3(&self, rows: [usize; 3], cols: [usize; 3]) -> f64 {
        let a = |i: usize, j: usize| self.0[rows[i]][cols[j]];
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    }
}

impl Index<(usize, usize)> for Mat4 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Mat4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.0[i][j]
    }
}

impl Mul for Mat4 {
    type Output = Mat4;
    fn mul(self, rhs: Mat4) -> Mat4 {
        let mut out = Mat4::ZERO;
        for i in 0..4 {
            for j in 0..4 {
                out.0[i][j] = (0..4).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Mul<Vec4> for Mat4 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        self.apply(v)
    }
}

/// Matrix of the induced map on the third exterior power in the basis
/// [`WEDGE3_BASIS`]: entry `(J, I)` is the minor of `m` on rows `J`, columns `I`.
pub fn wedge3(m: &Mat4) -> Mat4 {
    let mut out = Mat4::ZERO;
    for (r, rows) in WEDGE3_BASIS.iter().enumerate() {
        for (c, cols) in WEDGE3_BASIS.iter().enumerate() {
            out.0[r][c] = m.minor3(*rows, *cols);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge3_of_identity_and_diagonal() {
        assert_eq!(wedge3(&Mat4::identity()), Mat4::identity());
        let w = wedge3(&Mat4::diag([2.0, 3.0, 5.0, 7.0]));
        assert_eq!(w, Mat4::diag([30.0, 42.0, 70.0, 105.0]));
    }

    #[test]
    fn wedge3_of_permutation_carries_sign() {
        // swap e1 and e2: e1^e2^e3 -> e2^e1^e3 = -e1^e2^e3
        let p = Mat4([[0.0, 1.0, 0.0, 0.0], [1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]]);
        let w = wedge3(&p);
        assert_eq!(w[(0, 0)], -1.0);
        assert_eq!(w[(1, 1)], -1.0);
        // e1^e3^e4 <-> e2^e3^e4
        assert_eq!(w[(2, 3)], 1.0);
        assert_eq!(w[(3, 2)], 1.0);
    }

    #[test]
    fn det_matches_known_values() {
        let m = Mat4([[2.0, 0.0, 1.0, 0.0], [1.0, 3.0, 0.0, 0.0], [0.0, 0.0, 1.0, 4.0], [0.0, 1.0, 0.0, 1.0]]);
        assert_eq!(m.det(), 2.0);
        assert_eq!(m.transpose().det(), 2.0);
        assert_eq!(Mat4::diag([1.0, 2.0, 3.0, 4.0]).det(), 24.0);
    }

    #[test]
    fn rejects_non_finite() {
        let mut rows = [[0.0; 4]; 4];
        rows[2][1] = f64::NAN;
        assert_eq!(Mat4::try_from_rows(rows), Err(ExtAlgError::NonFinite { row: 2, col: 1 }));
    }
}
