//! Eigenvalues of a general real matrix: Householder reduction to upper
//! Hessenberg form followed by Francis double-shift QR iteration.
//!
//! Only eigenvalues are produced. Complex conjugate pairs come out of the
//! trailing 2x2 blocks that deflate during the iteration.

use nalgebra::DMatrix;
pub use num_complex::Complex64;

use crate::error::{Error, Result};

/// Iteration budget per state.
pub const ITERATIONS_PER_STATE: usize = 500;

/// Reduces `a` in place to upper Hessenberg form by Householder reflections.
pub fn hessenberg(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let norm: f64 = (k + 1..n)
            .map(|i| a[(i, k)] * a[(i, k)])
            .sum::<f64>()
            .sqrt();
        if norm == 0.0 {
            continue;
        }
        let alpha = if a[(k + 1, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| a[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        // A <- (I - 2vv'/v'v) A
        for j in 0..n {
            let dot: f64 = (0..v.len()).map(|t| v[t] * a[(k + 1 + t, j)]).sum();
            let f = 2.0 * dot / vnorm2;
            for t in 0..v.len() {
                a[(k + 1 + t, j)] -= f * v[t];
            }
        }
        // A <- A (I - 2vv'/v'v)
        for i in 0..n {
            let dot: f64 = (0..v.len()).map(|t| a[(i, k + 1 + t)] * v[t]).sum();
            let f = 2.0 * dot / vnorm2;
            for t in 0..v.len() {
                a[(i, k + 1 + t)] -= f * v[t];
            }
        }
        for i in k + 2..n {
            a[(i, k)] = 0.0;
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

/// All eigenvalues of `matrix`, unsorted.
pub fn eigenvalues(matrix: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::NotSquare {
            rows: n,
            cols: matrix.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut a = matrix.clone();
    hessenberg(&mut a);
    hqr(&mut a)
}

/// Francis double-shift QR on an upper Hessenberg matrix (eigenvalues only).
fn hqr(a: &mut DMatrix<f64>) -> Result<Vec<Complex64>> {
    let n = a.nrows();
    let cap = ITERATIONS_PER_STATE * n;
    let mut wr = vec![0.0; n];
    let mut wi = vec![0.0; n];

    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += a[(i, j)].abs();
        }
    }

    let mut total_iters = 0usize;
    let mut nn = n as isize - 1;
    let mut t = 0.0;
    let (mut p, mut q, mut r): (f64, f64, f64);
    while nn >= 0 {
        let mut its = 0usize;
        loop {
            let nu = nn as usize;
            let mut l = 0usize;
            for ll in (1..=nu).rev() {
                let mut s = a[(ll - 1, ll - 1)].abs() + a[(ll, ll)].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[(ll, ll - 1)].abs() + s == s {
                    a[(ll, ll - 1)] = 0.0;
                    l = ll;
                    break;
                }
            }
            let mut x = a[(nu, nu)];
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[(nu - 1, nu - 1)];
            let mut w = a[(nu, nu - 1)] * a[(nu - 1, nu)];
            if l + 1 == nu {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + sign(z, p);
                    wr[nu - 1] = x + z;
                    wr[nu] = x + z;
                    if z != 0.0 {
                        wr[nu] = x - w / z;
                    }
                    wi[nu - 1] = 0.0;
                    wi[nu] = 0.0;
                } else {
                    wr[nu - 1] = x + p;
                    wr[nu] = x + p;
                    wi[nu - 1] = -z;
                    wi[nu] = z;
                }
                nn -= 2;
                break;
            }

            if total_iters >= cap {
                return Err(Error::NoConvergence(total_iters));
            }
            if its > 0 && its.is_multiple_of(10) {
                // exceptional shift
                t += x;
                for i in 0..=nu {
                    a[(i, i)] -= x;
                }
                let s = a[(nu, nu - 1)].abs() + a[(nu - 1, nu - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            total_iters += 1;

            let mut m = nu - 2;
            let mut z;
            loop {
                z = a[(m, m)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(m + 1, m)] + a[(m, m + 1)];
                q = a[(m + 1, m + 1)] - z - rr - ss;
                r = a[(m + 2, m + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(m, m - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(m - 1, m - 1)].abs() + z.abs() + a[(m + 1, m + 1)].abs());
                if u + v == v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nu {
                a[(i, i - 2)] = 0.0;
                if i != m + 2 {
                    a[(i, i - 3)] = 0.0;
                }
            }

            let mut k = m;
            while k < nu {
                if k != m {
                    p = a[(k, k - 1)];
                    q = a[(k + 1, k - 1)];
                    r = 0.0;
                    if k + 1 != nu {
                        r = a[(k + 2, k - 1)];
                    }
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
                            a[(k, k - 1)] = -a[(k, k - 1)];
                        }
                    } else {
                        a[(k, k - 1)] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nu {
                        let mut pp = a[(k, j)] + q * a[(k + 1, j)];
                        if k + 1 != nu {
                            pp += r * a[(k + 2, j)];
                            a[(k + 2, j)] -= pp * z;
                        }
                        a[(k + 1, j)] -= pp * y;
                        a[(k, j)] -= pp * x;
                    }
                    let mmin = nu.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[(i, k)] + y * a[(i, k + 1)];
                        if k + 1 != nu {
                            pp += z * a[(i, k + 2)];
                            a[(i, k + 2)] -= pp * r;
                        }
                        a[(i, k + 1)] -= pp * q;
                        a[(i, k)] -= pp;
                    }
                }
                k += 1;
            }
        }
    }

    Ok(wr
        .into_iter()
        .zip(wi)
        .map(|(re, im)| Complex64::new(re, im))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap()
                .then(b.im.partial_cmp(&a.im).unwrap())
        });
        v
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let mut a = DMatrix::from_fn(5, 5, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5);
        let tr = a.trace();
        let fro = a.norm();
        hessenberg(&mut a);
        for i in 2..5 {
            for j in 0..i - 1 {
                assert_eq!(a[(i, j)], 0.0);
            }
        }
        assert!((a.trace() - tr).abs() < 1e-12);
        assert!((a.norm() - fro).abs() < 1e-12);
    }

    #[test]
    fn rotation_gives_complex_pair() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let ev = sorted(eigenvalues(&a).unwrap());
        assert!((ev[0] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
        assert!((ev[1] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn cyclic_permutation_gives_roots_of_unity() {
        let n = 5;
        let a = DMatrix::from_fn(n, n, |i, j| if j == (i + 1) % n { 1.0 } else { 0.0 });
        let ev = eigenvalues(&a).unwrap();
        for z in &ev {
            assert!((z.norm() - 1.0).abs() < 1e-10);
            let zn = z.powu(n as u32);
            assert!((zn - Complex64::new(1.0, 0.0)).norm() < 1e-9);
        }
    }

    #[test]
    fn agrees_with_nalgebra_schur() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.1, 0.2, 0.3, 0.4, 0.5, 0.0, 0.5, 0.0, 0.25, 0.25, 0.25, 0.25, 0.9, 0.0, 0.0, 0.1,
            ],
        );
        let ours = sorted(eigenvalues(&a).unwrap());
        let theirs = sorted(a.clone().complex_eigenvalues().iter().cloned().collect());
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).norm() < 1e-10, "{x} vs {y}");
        }
    }
}
