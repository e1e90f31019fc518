//! Singular values by two-sided (Kogbetliantz) Jacobi sweeps, with a
//! symmetric Jacobi eigensolve of `M^T M` as fallback.

use super::Mat4;

const MAX_SWEEPS: usize = 60;
const FALLBACK_TOL: f64 = 1e-12;

/// Rotates rows `p`, `q` of `a` by `[[c, s], [-s, c]]` from the left.
fn rotate_rows(a: &mut Mat4, p: usize, q: usize, c: f64, s: f64) {
    for j in 0..4 {
        let (x, y) = (a.0[p][j], a.0[q][j]);
        a.0[p][j] = c * x + s * y;
        a.0[q][j] = -s * x + c * y;
    }
}

/// Rotates columns `p`, `q` of `a` by `[[c, s], [-s, c]]` from the right.
fn rotate_cols(a: &mut Mat4, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..4 {
        let (x, y) = (a.0[i][p], a.0[i][q]);
        a.0[i][p] = c * x - s * y;
        a.0[i][q] = s * x + c * y;
    }
}

fn off_diagonal(a: &Mat4) -> f64 {
    let mut s = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            if i != j {
                s += a.0[i][j] * a.0[i][j];
            }
        }
    }
    s.sqrt()
}

/// Two-sided sweeps; `None` if the off-diagonal mass does not vanish.
fn kogbetliantz(m: &Mat4) -> Option<[f64; 4]> {
    let mut a = *m;
    let scale = a.frobenius();
    if scale == 0.0 {
        return Some([0.0; 4]);
    }
    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&a) <= f64::EPSILON * scale {
            return Some(sorted_abs_diag(&a));
        }
        for p in 0..3 {
            for q in p + 1..4 {
                let (w, x, y, z) = (a.0[p][p], a.0[p][q], a.0[q][p], a.0[q][q]);
                if x == 0.0 && y == 0.0 {
                    continue;
                }
                // symmetrize the 2x2 block from the left
                let theta = (y - x).atan2(w + z);
                let (s1, c1) = theta.sin_cos();
                rotate_rows(&mut a, p, q, c1, s1);
                // then a symmetric Jacobi rotation on both sides
                let (aa, b, d) = (a.0[p][p], 0.5 * (a.0[p][q] + a.0[q][p]), a.0[q][q]);
                if b == 0.0 {
                    continue;
                }
                let phi = 0.5 * (2.0 * b).atan2(d - aa);
                let (s2, c2) = phi.sin_cos();
                rotate_rows(&mut a, p, q, c2, -s2);
                rotate_cols(&mut a, p, q, c2, s2);
            }
        }
    }
    None
}

fn sorted_abs_diag(a: &Mat4) -> [f64; 4] {
    let mut d = [a.0[0][0].abs(), a.0[1][1].abs(), a.0[2][2].abs(), a.0[3][3].abs()];
    d.sort_by(|x, y| y.total_cmp(x));
    d
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi, unsorted.
pub(crate) fn symmetric_eigenvalues(s: &Mat4, rel_tol: f64) -> [f64; 4] {
    let mut a = *s;
    let scale = a.frobenius();
    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&a) <= rel_tol * scale {
            break;
        }
        for p in 0..3 {
            for q in p + 1..4 {
                let b = a.0[p][q];
                if b == 0.0 {
                    continue;
                }
                let phi = 0.5 * (2.0 * b).atan2(a.0[q][q] - a.0[p][p]);
                let (s, c) = phi.sin_cos();
                rotate_rows(&mut a, p, q, c, -s);
                rotate_cols(&mut a, p, q, c, s);
            }
        }
    }
    [a.0[0][0], a.0[1][1], a.0[2][2], a.0[3][3]]
}

/// Singular values in non-increasing order.
pub fn singular_values(m: &Mat4) -> [f64; 4] {
    if let Some(sv) = kogbetliantz(m) {
        return sv;
    }
    let ev = symmetric_eigenvalues(&(m.transpose() * *m), FALLBACK_TOL);
    let mut sv = ev.map(|e| e.max(0.0).sqrt());
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Smallest singular value: `min |M v|` over unit `v`.
pub fn conorm(m: &Mat4) -> f64 {
    singular_values(m)[3]
}

/// Largest singular value.
pub fn norm(m: &Mat4) -> f64 {
    singular_values(m)[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_and_identity() {
        assert_eq!(conorm(&Mat4::identity()), 1.0);
        assert_eq!(singular_values(&Mat4::diag([3.0, -2.0, 1.0, 5.0])), [5.0, 3.0, 2.0, 1.0]);
        assert_eq!(conorm(&Mat4::ZERO), 0.0);
    }

    #[test]
    fn rotation_scaling_block() {
        let (c, s) = (0.6, 0.8);
        let m = Mat4([[3.0 * c, -3.0 * s, 0.0, 0.0], [3.0 * s, 3.0 * c, 0.0, 0.0], [0.0, 0.0, 0.0, 2.0], [0.0, 0.0, -2.0, 0.0]]);
        let sv = singular_values(&m);
        for (got, want) in sv.iter().zip([3.0, 3.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_deficient() {
        let m = Mat4([[1.0, 2.0, 3.0, 4.0], [2.0, 4.0, 6.0, 8.0], [0.0, 1.0, 0.0, 1.0], [1.0, 0.0, 1.0, 0.0]]);
        assert!(conorm(&m) < 1e-14);
        let sv = singular_values(&m);
        let prod: f64 = sv.iter().map(|s| s * s).sum();
        assert!((prod - m.frobenius().powi(2)).abs() < 1e-12);
    }
}
