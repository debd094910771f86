//! Mean first passage times of a Markov renewal process.
//!
//! [`mfpt_direct`] solves the first-passage equations column by column with
//! nothing but a linear solver and serves as the reference route. The other
//! constructors assemble `M` from a generalized inverse.

use nalgebra::{DMatrix, DVector};

use crate::chain::{stationary_profile, MrpSpec, StationaryProfile};
use crate::error::Result;
use crate::ginverse::{parametric_ginverse, GInverse};
use crate::linalg::{self, Lu};

/// `M = [m_ij]`; the diagonal holds mean recurrence times.
#[derive(Debug, Clone, PartialEq)]
pub struct MfptMatrix(DMatrix<f64>);

impl MfptMatrix {
    pub fn new(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// Mean recurrence times `m_ii`.
    pub fn recurrence_times(&self) -> DVector<f64> {
        self.0.diagonal()
    }

    /// `M_d`.
    pub fn diag_matrix(&self) -> DMatrix<f64> {
        linalg::diag_part(&self.0)
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }
}

/// Solves `m_ij = mu_i + sum_{k != j} p_ik m_kj` for each target `j`.
///
/// Zeroing column `j` of `P` leaves a strictly substochastic irreducible
/// part, so each system is nonsingular; its solution also yields `m_jj`.
pub fn mfpt_direct(spec: &MrpSpec) -> Result<MfptMatrix> {
    let m = spec.dim();
    let p = spec.chain().matrix();
    let mu = spec.mu();
    let mut out = DMatrix::zeros(m, m);
    for j in 0..m {
        let a = DMatrix::from_fn(m, m, |i, k| {
            let pik = if k == j { 0.0 } else { p[(i, k)] };
            if i == k {
                1.0 - pik
            } else {
                -pik
            }
        });
        let col = Lu::factor(&a)?.solve_vec(mu)?;
        out.set_column(j, &col);
    }
    Ok(MfptMatrix(out))
}

/// `D = lambda (Pi_d)^{-1}`, the matrix of mean recurrence times.
fn recurrence_scaling(profile: &StationaryProfile) -> DMatrix<f64> {
    DMatrix::from_diagonal(&profile.pi.map(|p| profile.lambda / p))
}

/// General g-inverse formula:
/// `M = [(1/lambda){G mu pi^T - E (G mu pi^T)_d} + I - G + E G_d] D`.
pub fn mfpt_closed(spec: &MrpSpec, ginv: &GInverse) -> Result<MfptMatrix> {
    ginv.check_chain(spec.chain())?;
    let profile = stationary_profile(spec)?;
    Ok(MfptMatrix(mfpt_from_ginverse(
        &ginv.embedded_matrix(),
        &profile,
    )))
}

pub(crate) fn mfpt_from_ginverse(g: &DMatrix<f64>, profile: &StationaryProfile) -> DMatrix<f64> {
    let m = g.nrows();
    let lambda = profile.lambda;
    let gmupi = (g * &profile.mu) * profile.pi.transpose();
    let inner = (&gmupi - linalg::e_times_diag(&gmupi)) / lambda + DMatrix::identity(m, m) - g
        + linalg::e_times_diag(g);
    inner * recurrence_scaling(profile)
}

/// `M = [I - G~ + E G~_d] D` with `G~ = [I - P + mu u^T]^{-1}`.
pub fn mfpt_gtilde(spec: &MrpSpec, u: &DVector<f64>) -> Result<MfptMatrix> {
    let gt = parametric_ginverse(spec.chain(), spec.mu(), u)?;
    let profile = stationary_profile(spec)?;
    let g = gt.matrix();
    let m = g.nrows();
    let inner = DMatrix::identity(m, m) - g + linalg::e_times_diag(g);
    Ok(MfptMatrix(inner * recurrence_scaling(&profile)))
}

/// The scaling `[(e u^T G~)_d]^{-1}`, i.e. `diag(1 / (u^T G~)_j)`.
///
/// On every valid input this coincides with `lambda (Pi_d)^{-1}`; it is
/// exposed so callers can check that.
pub fn gtilde_scaling(spec: &MrpSpec, u: &DVector<f64>) -> Result<DVector<f64>> {
    let gt = parametric_ginverse(spec.chain(), spec.mu(), u)?;
    let row = u.transpose() * gt.matrix();
    Ok(DVector::from_iterator(
        row.len(),
        row.iter().map(|x| 1.0 / x),
    ))
}

/// `||(I - P) M - P1 E + P M_d||_inf`.
pub fn mfpt_residual(mfpt: &MfptMatrix, spec: &MrpSpec) -> f64 {
    if mfpt.dim() != spec.dim() {
        return f64::INFINITY;
    }
    let p = spec.chain().matrix();
    let lhs = spec.chain().laplacian() * mfpt.matrix();
    let rhs = spec.p1_e() - p * mfpt.diag_matrix();
    linalg::inf_norm(&(lhs - rhs))
}

/// Checks `pi_i m_ii = lambda` for every state; returns the largest deviation.
pub fn recurrence_residual(mfpt: &MfptMatrix, profile: &StationaryProfile) -> f64 {
    mfpt.recurrence_times()
        .iter()
        .zip(profile.pi.iter())
        .map(|(mii, pi)| (pi * mii - profile.lambda).abs())
        .fold(0.0, f64::max)
}
