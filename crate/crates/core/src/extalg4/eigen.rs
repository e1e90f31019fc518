//! Eigenvalues of a real 4x4 matrix: balancing, reduction to upper
//! Hessenberg form by stabilized elimination, then the shifted double-step
//! QR iteration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ExtAlgError, Mat4};

const MAX_SWEEPS: usize = 10_000;
const RADIX: f64 = 2.0;

/// Eigenvalues sorted by non-decreasing modulus, with classification counts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum4 {
    pub eigenvalues: [Complex64; 4],
    /// modulus < 1
    pub contracting: usize,
    /// modulus > 1
    pub expanding: usize,
    pub real: usize,
    pub non_real: usize,
    pub sweeps: usize,
}

/// `|Im| > 1e-9 (1 + |lambda|)`.
pub fn is_non_real(z: Complex64) -> bool {
    z.im.abs() > 1e-9 * (1.0 + z.norm())
}

impl Spectrum4 {
    fn from_unsorted(mut ev: [Complex64; 4], sweeps: usize) -> Self {
        ev.sort_by(|a, b| {
            a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im))
        });
        let non_real = ev.iter().filter(|z| is_non_real(**z)).count();
        Self {
            eigenvalues: ev,
            contracting: ev.iter().filter(|z| z.norm() < 1.0).count(),
            expanding: ev.iter().filter(|z| z.norm() > 1.0).count(),
            real: 4 - non_real,
            non_real,
            sweeps,
        }
    }

    pub fn moduli(&self) -> [f64; 4] {
        self.eigenvalues.map(|z| z.norm())
    }

    pub fn all_non_real(&self) -> bool {
        self.non_real == 4
    }
}

fn balance(a: &mut [[f64; 4]; 4]) {
    let sqrdx = RADIX * RADIX;
    loop {
        let mut done = true;
        for i in 0..4 {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..4 {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..4 {
                    a[i][j] *= g;
                    a[j][i] *= f;
                }
            }
        }
        if done {
            break;
        }
    }
}

fn to_hessenberg(a: &mut [[f64; 4]; 4]) {
    for m in 1..3 {
        let mut x: f64 = 0.0;
        let mut piv = m;
        for j in m..4 {
            if a[j][m - 1].abs() > x.abs() {
                x = a[j][m - 1];
                piv = j;
            }
        }
        if piv != m {
            a.swap(piv, m);
            for row in a.iter_mut() {
                row.swap(piv, m);
            }
        }
        if x != 0.0 {
            for i in m + 1..4 {
                let y = a[i][m - 1] / x;
                if y != 0.0 {
                    for j in m..4 {
                        a[i][j] -= y * a[m][j];
                    }
                    for row in a.iter_mut() {
                        row[m] += y * row[i];
                    }
                }
                a[i][m - 1] = 0.0;
            }
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Double-shift QR on an upper Hessenberg matrix. Returns eigenvalues and
/// the number of QR sweeps used.
fn hqr(a: &mut [[f64; 4]; 4]) -> Result<([Complex64; 4], usize), ExtAlgError> {
    let mut wr = [0.0; 4];
    let mut wi = [0.0; 4];
    let mut anorm = 0.0;
    for i in 0..4usize {
        for j in i.saturating_sub(1)..4 {
            anorm += a[i][j].abs();
        }
    }
    let mut nn: isize = 3;
    let mut t = 0.0;
    let mut sweeps = 0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let n = nn as usize;
            let mut l = n;
            while l >= 1 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() + s == s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[n][n];
            if l == n {
                wr[n] = x + t;
                wi[n] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[n - 1][n - 1];
            let mut w = a[n][n - 1] * a[n - 1][n];
            if l + 1 == n {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    let z = p + sign(z, p);
                    wr[n - 1] = x + z;
                    wr[n] = if z != 0.0 { x - w / z } else { x + z };
                    wi[n - 1] = 0.0;
                    wi[n] = 0.0;
                } else {
                    wr[n - 1] = x + p;
                    wr[n] = x + p;
                    wi[n - 1] = -z;
                    wi[n] = z;
                }
                nn -= 2;
                break;
            }
            if sweeps >= MAX_SWEEPS {
                return Err(ExtAlgError::EigenNonConvergence { sweeps });
            }
            if its > 0 && its % 10 == 0 {
                // exceptional shift
                t += x;
                for i in 0..=n {
                    a[i][i] -= x;
                }
                let s = a[n][n - 1].abs() + a[n - 1][n - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            sweeps += 1;
            let (mut p, mut q, mut r): (f64, f64, f64);
            let mut m = n - 2;
            loop {
                let z = a[m][m];
                let rr = x - z;
                let s = y - z;
                p = (rr * s - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - s;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=n {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < n {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = if k + 1 != n { a[k + 2][k - 1] } else { 0.0 };
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = sign((p * p + q * q + r * r).sqrt(), p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=n {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k + 1 != n {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = n.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k + 1 != n {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
            if l + 1 >= n {
                break;
            }
        }
    }
    let mut ev = [Complex64::new(0.0, 0.0); 4];
    for i in 0..4 {
        ev[i] = Complex64::new(wr[i], wi[i]);
    }
    Ok((ev, sweeps))
}

/// Eigenvalues of `m`, sorted by modulus.
pub fn spectrum(m: &Mat4) -> Result<Spectrum4, ExtAlgError> {
    let mut a = m.0;
    balance(&mut a);
    to_hessenberg(&mut a);
    let (ev, sweeps) = hqr(&mut a)?;
    Ok(Spectrum4::from_unsorted(ev, sweeps))
}
