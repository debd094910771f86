//! Dense LU factorization with partial pivoting and a few matrix helpers.
//!
//! Every inverse and every linear solve in the crate goes through [`Lu`].
//! Matrices here are small (tens of states), so the factorization is the
//! textbook row-pivoted Doolittle scheme.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot threshold: a pivot below `PIVOT_RTOL * ||A||_inf` is treated as zero.
pub const PIVOT_RTOL: f64 = 1e-13;

/// Growth factors above this are reported as ill-conditioned.
pub const GROWTH_LIMIT: f64 = 1e12;

/// Packed LU factors of a square matrix, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DMatrix<f64>,
    perm: Vec<usize>,
    growth: f64,
}

impl Lu {
    pub fn factor(a: &DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::NotSquare {
                rows: n,
                cols: a.ncols(),
            });
        }
        if n == 0 {
            return Err(Error::Empty);
        }
        let norm = inf_norm(a);
        let threshold = PIVOT_RTOL * norm.max(f64::MIN_POSITIVE);
        let max_a = a.amax();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (mut piv_row, mut piv_val) = (k, lu[(k, k)].abs());
            for r in (k + 1)..n {
                let v = lu[(r, k)].abs();
                if v > piv_val {
                    piv_row = r;
                    piv_val = v;
                }
            }
            if piv_val.is_nan() || piv_val <= threshold {
                return Err(Error::Singular {
                    column: k,
                    pivot: piv_val,
                });
            }
            if piv_row != k {
                lu.swap_rows(k, piv_row);
                perm.swap(k, piv_row);
            }
            let pivot = lu[(k, k)];
            for r in (k + 1)..n {
                let factor = lu[(r, k)] / pivot;
                lu[(r, k)] = factor;
                if factor != 0.0 {
                    for c in (k + 1)..n {
                        let upd = factor * lu[(k, c)];
                        lu[(r, c)] -= upd;
                    }
                }
            }
        }

        let mut max_u = 0.0f64;
        for r in 0..n {
            for c in r..n {
                max_u = max_u.max(lu[(r, c)].abs());
            }
        }
        let growth = if max_a > 0.0 { max_u / max_a } else { 1.0 };
        Ok(Self { lu, perm, growth })
    }

    pub fn dim(&self) -> usize {
        self.lu.nrows()
    }

    /// Ratio of the largest entry of `U` to the largest entry of `A`.
    pub fn growth_factor(&self) -> f64 {
        self.growth
    }

    pub fn is_ill_conditioned(&self) -> bool {
        self.growth > GROWTH_LIMIT
    }

    pub fn solve(&self, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.nrows(),
            });
        }
        let mut x = DMatrix::zeros(n, b.ncols());
        for col in 0..b.ncols() {
            let mut y: Vec<f64> = self.perm.iter().map(|&p| b[(p, col)]).collect();
            for i in 0..n {
                let s: f64 = (0..i).map(|k| self.lu[(i, k)] * y[k]).sum();
                y[i] -= s;
            }
            for i in (0..n).rev() {
                let s: f64 = ((i + 1)..n).map(|k| self.lu[(i, k)] * y[k]).sum();
                y[i] = (y[i] - s) / self.lu[(i, i)];
            }
            for i in 0..n {
                x[(i, col)] = y[i];
            }
        }
        Ok(x)
    }

    pub fn solve_vec(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let x = self.solve(&DMatrix::from_column_slice(b.len(), 1, b.as_slice()))?;
        Ok(x.column(0).into_owned())
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.dim();
        self.solve(&DMatrix::identity(n, n))
            .expect("identity has matching dimension")
    }
}

/// Solves `A X = B` by LU with partial pivoting.
pub fn solve_dense(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Lu::factor(a)?.solve(b)
}

pub fn inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(Lu::factor(a)?.inverse())
}

/// Maximum absolute row sum.
pub fn inf_norm(a: &DMatrix<f64>) -> f64 {
    a.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}

pub fn ones(m: usize) -> DVector<f64> {
    DVector::from_element(m, 1.0)
}

/// `X_d`: the diagonal part of a square matrix.
pub fn diag_part(a: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_diagonal(&a.diagonal())
}

/// `E X_d`: every row equal to the diagonal of `X`.
pub fn e_times_diag(a: &DMatrix<f64>) -> DMatrix<f64> {
    let d = a.diagonal();
    DMatrix::from_fn(a.nrows(), a.ncols(), |_, j| d[j])
}

/// Largest entrywise relative difference, scaled by `max(1, |b|)`.
pub fn max_rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

pub fn max_rel_diff_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn identity_system_returns_rhs() {
        let b = DMatrix::from_row_slice(3, 2, &[1.0, -2.0, 3.5, 0.0, 7.0, 1e-3]);
        let x = solve_dense(&DMatrix::identity(3, 3), &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn diagonal_inverse() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 4.0]);
        let x = solve_dense(&a, &DMatrix::identity(2, 2)).unwrap();
        assert_relative_eq!(x, DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.25]));
    }

    #[test]
    fn rank_deficient_is_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let err = solve_dense(&a, &DMatrix::identity(2, 2)).unwrap_err();
        assert!(matches!(err, Error::Singular { column: 1, .. }));
    }

    #[test]
    fn pivoting_handles_zero_leading_entry() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let b = DMatrix::from_row_slice(2, 1, &[3.0, 5.0]);
        let x = solve_dense(&a, &b).unwrap();
        assert_relative_eq!(x, DMatrix::from_row_slice(2, 1, &[5.0, 3.0]));
    }

    #[test]
    fn not_square_rejected() {
        let a = DMatrix::<f64>::zeros(2, 3);
        assert!(matches!(Lu::factor(&a), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn agrees_with_nalgebra_lu() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[
                4.0, -2.0, 1.0, 0.5, 3.0, 6.0, -4.0, 2.0, 2.0, 1.0, 8.0, -1.0, -1.0, 0.3, 2.0, 5.0,
            ],
        );
        let b = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 2.0, 1.0, 3.0, -1.0, 4.0, 2.0]);
        let ours = solve_dense(&a, &b).unwrap();
        let theirs = a.clone().lu().solve(&b).unwrap();
        assert_relative_eq!(ours, theirs, epsilon = 1e-12);
        assert!(inf_norm(&(&a * &ours - &b)) <= 1e-9 * inf_norm(&b));
    }

    #[test]
    fn growth_factor_is_modest_for_diagonally_dominant() {
        let a = DMatrix::from_row_slice(2, 2, &[5.0, 1.0, 1.0, 5.0]);
        let lu = Lu::factor(&a).unwrap();
        assert!(lu.growth_factor() <= 1.0 + 1e-12);
        assert!(!lu.is_ill_conditioned());
    }
}
