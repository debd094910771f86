//! Continuous-time Markov chains as Markov renewal processes.
//!
//! A generator `Q` maps to a jump chain `p_ij = q_ij / nu_i` (`i != j`) with
//! exponential holding times of mean `1 / nu_i`, where `nu_i = -q_ii`.
//! The `H = [Q + e u^T]^{-1}` route computes the stationary quantities and
//! mean first passage times directly from `Q`.

use nalgebra::{DMatrix, DVector};

use crate::chain::{matrix_from_rows, Moments, MrpSpec, ProcessKind, StochasticMatrix};
use crate::error::{Error, Result};
use crate::ginverse::{GInverse, GInverseRoute, DEGENERATE_U_TOL};
use crate::linalg::{self, Lu};
use crate::mfpt::MfptMatrix;

/// Diagonal entries above `-ZERO_DIAGONAL_TOL` mark an absorbing state.
pub const ZERO_DIAGONAL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    q: DMatrix<f64>,
}

impl Generator {
    /// Validates sign pattern and zero row sums (relative to the exit rate).
    pub fn new(q: DMatrix<f64>, tol: f64) -> Result<Self> {
        let m = q.nrows();
        if q.ncols() != m {
            return Err(Error::NotSquare {
                rows: m,
                cols: q.ncols(),
            });
        }
        if m == 0 {
            return Err(Error::Empty);
        }
        for i in 0..m {
            for j in 0..m {
                let x = q[(i, j)];
                if !x.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if i != j && x < 0.0 {
                    return Err(Error::NegativeEntry { row: i, col: j });
                }
            }
            let d = q[(i, i)];
            if d >= -ZERO_DIAGONAL_TOL {
                return Err(Error::ZeroDiagonal { state: i, value: d });
            }
            let sum: f64 = q.row(i).sum();
            if sum.abs() > tol * d.abs().max(1.0) {
                return Err(Error::RowSumViolation { row: i, sum });
            }
        }
        Ok(Self { q })
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        Self::new(matrix_from_rows(rows)?, tol)
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    /// `nu_i = -q_ii`.
    pub fn exit_rates(&self) -> DVector<f64> {
        -self.q.diagonal()
    }

    /// `Q_d`.
    pub fn diag_matrix(&self) -> DMatrix<f64> {
        linalg::diag_part(&self.q)
    }
}

/// Jump chain, `P1` and mean holding times of the CTMC.
pub fn mrp_from_generator(gen: &Generator) -> Result<MrpSpec> {
    let m = gen.dim();
    let q = gen.matrix();
    for i in 0..m {
        let d = q[(i, i)];
        if d >= -ZERO_DIAGONAL_TOL {
            return Err(Error::ZeroDiagonal { state: i, value: d });
        }
    }
    let nu = gen.exit_rates();
    let p = DMatrix::from_fn(m, m, |i, j| if i == j { 0.0 } else { q[(i, j)] / nu[i] });
    let p1 = DMatrix::from_fn(m, m, |i, j| p[(i, j)] / nu[i]);
    // the row sums of p are exactly one up to the generator's own tolerance
    let chain = StochasticMatrix::new(p, 1e-9)?;
    let p1 = DMatrix::from_fn(m, m, |i, j| {
        if chain.get(i, j) == 0.0 {
            0.0
        } else {
            p1[(i, j)]
        }
    });
    MrpSpec::new(chain, Moments::Full(p1), ProcessKind::Ctmc)
}

/// Recovers the generator of a CTMC-kind spec: `Q = Q_d (I - P)` with
/// `Q_d = -Lambda^{-1}`.
pub fn generator_from_spec(spec: &MrpSpec) -> Result<Generator> {
    let m = spec.dim();
    let nu = spec.mu().map(|x| 1.0 / x);
    let lap = spec.chain().laplacian();
    let q = DMatrix::from_fn(m, m, |i, j| -nu[i] * lap[(i, j)]);
    Generator::new(q, 1e-9)
}

/// `H = [Q + e u^T]^{-1}`, a g-inverse of `Q`.
pub fn generator_h(gen: &Generator, u: &DVector<f64>) -> Result<GInverse> {
    let m = gen.dim();
    if u.len() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: u.len(),
        });
    }
    let ue = u.sum();
    if ue.abs() < DEGENERATE_U_TOL {
        return Err(Error::DegenerateU(ue));
    }
    let spec = mrp_from_generator(gen)?;
    let a = gen.matrix() + linalg::ones(m) * u.transpose();
    let lu = Lu::factor(&a)?;
    Ok(GInverse::new(
        lu.inverse(),
        GInverseRoute::GeneratorH {
            u: u.clone(),
            q: gen.matrix().clone(),
        },
        spec.chain(),
        lu.is_ill_conditioned(),
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CtmcProfile {
    pub varpi: DVector<f64>,
    pub lambda: f64,
    pub pi: DVector<f64>,
    pub mfpt: MfptMatrix,
}

/// Stationary quantities and `M` from `H`:
///
/// * `varpi^T = u^T H`
/// * `lambda = -(varpi^T Q_d e)^{-1}`
/// * `pi^T = -lambda varpi^T Q_d`
/// * `M = [H - E H_d - Q_d^{-1}] [(e u^T H)_d]^{-1}`
pub fn ctmc_profile_h(gen: &Generator, u: &DVector<f64>) -> Result<CtmcProfile> {
    let h = generator_h(gen, u)?;
    let h = h.matrix();
    let q_diag = gen.matrix().diagonal();
    let varpi: DVector<f64> = (u.transpose() * h).transpose();
    let lambda = -1.0 / varpi.dot(&q_diag);
    let pi = -lambda * varpi.component_mul(&q_diag);
    let m = gen.dim();
    let qd_inv = DMatrix::from_diagonal(&q_diag.map(|x| 1.0 / x));
    let scaling = DMatrix::from_diagonal(&varpi.map(|x| 1.0 / x));
    let mfpt = (h - linalg::e_times_diag(h) - qd_inv) * scaling;
    debug_assert_eq!(mfpt.nrows(), m);
    Ok(CtmcProfile {
        varpi,
        lambda,
        pi,
        mfpt: MfptMatrix::new(mfpt),
    })
}

/// `k1 = lambda [I - H Q_d + tr(H Q_d)] e`.
pub fn kemeny1_ctmc(gen: &Generator, u: &DVector<f64>) -> Result<DVector<f64>> {
    let prof = ctmc_profile_h(gen, u)?;
    let h = generator_h(gen, u)?;
    let hq = h.embedded_matrix();
    let m = gen.dim();
    let e = linalg::ones(m);
    Ok((&e - hq.column_sum() + &e * hq.trace()) * prof.lambda)
}

/// Birth and death rates of a chain on `{1, ..., m}`: `alpha[i]` is the
/// rate from state `i + 1` up, `beta[i]` the rate from state `i + 2` down.
#[derive(Debug, Clone, PartialEq)]
pub struct BirthDeathParams {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BirthDeathParams {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<Self> {
        if alpha.len() != beta.len() {
            return Err(Error::DimensionMismatch {
                expected: alpha.len(),
                found: beta.len(),
            });
        }
        if alpha.is_empty() {
            return Err(Error::Empty);
        }
        for (name, rates) in [("alpha", &alpha), ("beta", &beta)] {
            for (i, &r) in rates.iter().enumerate() {
                if !r.is_finite() || r <= 0.0 {
                    return Err(Error::InvalidRate {
                        name: format!("{name}[{i}]"),
                        value: r,
                    });
                }
            }
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn states(&self) -> usize {
        self.alpha.len() + 1
    }
}

/// Tridiagonal generator of a birth-death chain.
pub fn bd_generator(params: &BirthDeathParams) -> Generator {
    let m = params.states();
    let mut q = DMatrix::zeros(m, m);
    for i in 0..m {
        if i + 1 < m {
            q[(i, i + 1)] = params.alpha[i];
        }
        if i > 0 {
            q[(i, i - 1)] = params.beta[i - 1];
        }
        let out: f64 = q.row(i).sum();
        q[(i, i)] = -out;
    }
    Generator { q }
}

/// Closed forms for the three-state birth-death chain with rates
/// `a1` (1 -> 2), `a2` (2 -> 3), `b2` (2 -> 1), `b3` (3 -> 2).
#[derive(Debug, Clone, PartialEq)]
pub struct Bd3Closed {
    pub mfpt: DMatrix<f64>,
    pub pi: DVector<f64>,
    pub varpi: DVector<f64>,
    pub mu: DVector<f64>,
    pub lambda: f64,
    pub rho2: f64,
    /// Common value of `k2c`: `(1 - varpi_1)/a1 + (1 - varpi_3)/b3`.
    pub k2c_constant: f64,
}

impl Bd3Closed {
    /// `m13 - (m33 - 1/b3 + 1/a1)`; the identity as sometimes quoted,
    /// `m13 = m33 + 1/a1`, does not hold.
    pub fn m13_identity_residual(&self, a1: f64, b3: f64) -> f64 {
        let m = &self.mfpt;
        (m[(0, 2)] - (m[(2, 2)] - 1.0 / b3 + 1.0 / a1)).abs()
    }

    /// `m23 - (m33 - 1/b3)`; the quoted `m33 - 1/b2` does not hold.
    pub fn m23_identity_residual(&self, b3: f64) -> f64 {
        let m = &self.mfpt;
        (m[(1, 2)] - (m[(2, 2)] - 1.0 / b3)).abs()
    }
}

pub fn bd3_closed(a1: f64, a2: f64, b2: f64, b3: f64) -> Result<Bd3Closed> {
    for (name, v) in [("a1", a1), ("a2", a2), ("b2", b2), ("b3", b3)] {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::InvalidRate {
                name: name.to_string(),
                value: v,
            });
        }
    }
    let rho2 = a2 / b2;
    let varpi1 = 1.0 / (1.0 + a1 / b2 + a1 * a2 / (b2 * b3));
    let varpi = DVector::from_vec(vec![varpi1, a1 / b2 * varpi1, a1 * a2 / (b2 * b3) * varpi1]);
    let pi = DVector::from_vec(vec![
        1.0 / (2.0 * (1.0 + rho2)),
        0.5,
        rho2 / (2.0 * (1.0 + rho2)),
    ]);
    let mu = DVector::from_vec(vec![1.0 / a1, 1.0 / (a2 + b2), 1.0 / b3]);
    let lambda = (1.0 / a1 + 1.0 / b2 + a2 / (b2 * b3)) / (2.0 * (1.0 + rho2));

    let m11 = 1.0 / a1 + 1.0 / b2 + rho2 / b3;
    let m12 = 1.0 / a1;
    let m13 = 1.0 / a1 + 1.0 / a2 + 1.0 / (a1 * rho2);
    let m21 = 1.0 / b2 + rho2 / b3;
    let m22 = (1.0 / a1 + 1.0 / b2 + rho2 / b3) / (1.0 + rho2);
    let m23 = 1.0 / (rho2 * a1) + 1.0 / a2;
    let m31 = 1.0 / b2 + (1.0 + rho2) / b3;
    let m32 = 1.0 / b3;
    let m33 = 1.0 / (rho2 * a1) + 1.0 / a2 + 1.0 / b3;
    let mfpt = DMatrix::from_row_slice(3, 3, &[m11, m12, m13, m21, m22, m23, m31, m32, m33]);

    Ok(Bd3Closed {
        mfpt,
        pi,
        k2c_constant: (1.0 - varpi[0]) / a1 + (1.0 - varpi[2]) / b3,
        varpi,
        mu,
        lambda,
        rho2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::stationary_profile;
    use crate::mfpt::mfpt_direct;
    use approx::assert_relative_eq;

    fn two_state(v1: f64, v2: f64) -> Generator {
        Generator::from_rows(&[vec![-v1, v1], vec![v2, -v2]], 1e-12).unwrap()
    }

    fn bd3() -> Generator {
        bd_generator(&BirthDeathParams::new(vec![1.0, 2.0], vec![1.0, 2.0]).unwrap())
    }

    #[test]
    fn two_state_mapping() {
        let spec = mrp_from_generator(&two_state(1.0, 2.0)).unwrap();
        assert_eq!(
            spec.chain().matrix(),
            &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
        );
        assert_relative_eq!(spec.mu().clone(), DVector::from_vec(vec![1.0, 0.5]));
        assert_eq!(spec.kind(), ProcessKind::Ctmc);
    }

    #[test]
    fn bd3_mapping() {
        let spec = mrp_from_generator(&bd3()).unwrap();
        let expected = DMatrix::from_row_slice(
            3,
            3,
            &[0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 3.0, 0.0, 1.0, 0.0],
        );
        assert_relative_eq!(spec.chain().matrix().clone(), expected, epsilon = 1e-15);
        let gen = bd3();
        // I - P = Q_d^{-1} Q
        let qd_inv = DMatrix::from_diagonal(&gen.matrix().diagonal().map(|x| 1.0 / x));
        let diff = spec.chain().laplacian() - qd_inv * gen.matrix();
        assert!(diff.amax() <= 1e-12);
    }

    #[test]
    fn bd_generator_template() {
        let q = bd3();
        assert_eq!(
            q.matrix(),
            &DMatrix::from_row_slice(3, 3, &[-1.0, 1.0, 0.0, 1.0, -3.0, 2.0, 0.0, 2.0, -2.0])
        );
        let two = bd_generator(&BirthDeathParams::new(vec![1.0], vec![2.0]).unwrap());
        assert_eq!(two, two_state(1.0, 2.0));
        let five = bd_generator(
            &BirthDeathParams::new(vec![1.0, 2.0, 3.0, 0.5], vec![4.0, 0.1, 2.0, 1.0]).unwrap(),
        );
        for row in five.matrix().row_iter() {
            assert!(row.sum().abs() < 1e-15);
        }
    }

    #[test]
    fn generator_validation() {
        assert!(matches!(
            Generator::from_rows(&[vec![0.0, 0.0], vec![1.0, -1.0]], 1e-12),
            Err(Error::ZeroDiagonal { state: 0, .. })
        ));
        assert!(matches!(
            Generator::from_rows(&[vec![-1.0, 0.5], vec![1.0, -1.0]], 1e-12),
            Err(Error::RowSumViolation { row: 0, .. })
        ));
        assert!(matches!(
            Generator::from_rows(
                &[
                    vec![-1.0, 2.0, -1.0],
                    vec![1.0, -1.0, 0.0],
                    vec![1.0, 0.0, -1.0]
                ],
                1e-12
            ),
            Err(Error::NegativeEntry { row: 0, col: 2 })
        ));
        assert!(matches!(
            BirthDeathParams::new(vec![1.0, 0.0], vec![1.0, 1.0]),
            Err(Error::InvalidRate { .. })
        ));
    }

    #[test]
    fn h_route_two_state() {
        let gen = two_state(1.0, 2.0);
        for u in [linalg::ones(2), DVector::from_vec(vec![1.0, 2.0])] {
            let prof = ctmc_profile_h(&gen, &u).unwrap();
            assert_relative_eq!(
                prof.varpi.clone(),
                DVector::from_vec(vec![2.0 / 3.0, 1.0 / 3.0]),
                epsilon = 1e-14
            );
            assert_relative_eq!(
                prof.pi.clone(),
                DVector::from_vec(vec![0.5, 0.5]),
                epsilon = 1e-14
            );
            assert_relative_eq!(prof.lambda, 0.75, epsilon = 1e-14);
            assert_relative_eq!(
                prof.mfpt.matrix().clone(),
                DMatrix::from_row_slice(2, 2, &[1.5, 1.0, 0.5, 1.5]),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn h_route_matches_direct_on_bd3() {
        let gen = bd3();
        let spec = mrp_from_generator(&gen).unwrap();
        let direct = mfpt_direct(&spec).unwrap();
        let prof = ctmc_profile_h(&gen, &linalg::ones(3)).unwrap();
        assert_relative_eq!(
            prof.mfpt.matrix().clone(),
            direct.matrix().clone(),
            epsilon = 1e-12
        );
        let sp = stationary_profile(&spec).unwrap();
        assert_relative_eq!(prof.varpi.clone(), sp.varpi.clone(), epsilon = 1e-13);
        let res = prof.varpi.transpose() * gen.matrix();
        assert!(res.amax() <= 1e-12);
    }

    #[test]
    fn kemeny1_two_state() {
        let k = kemeny1_ctmc(&two_state(1.0, 2.0), &linalg::ones(2)).unwrap();
        assert_relative_eq!(k, DVector::from_vec(vec![1.25, 1.0]), epsilon = 1e-14);
        let k = kemeny1_ctmc(&two_state(2.0, 2.0), &linalg::ones(2)).unwrap();
        assert_relative_eq!(k, DVector::from_vec(vec![0.75, 0.75]), epsilon = 1e-14);
    }

    #[test]
    fn bd3_closed_example() {
        let c = bd3_closed(1.0, 2.0, 1.0, 2.0).unwrap();
        let expected =
            DMatrix::from_row_slice(3, 3, &[3.0, 1.0, 2.0, 2.0, 1.0, 1.0, 2.5, 0.5, 1.5]);
        assert_relative_eq!(c.mfpt.clone(), expected, epsilon = 1e-14);
        assert_relative_eq!(c.lambda, 0.5, epsilon = 1e-15);
        assert_relative_eq!(
            c.varpi.clone(),
            DVector::from_element(3, 1.0 / 3.0),
            epsilon = 1e-15
        );
        assert_relative_eq!(c.k2c_constant, 1.0, epsilon = 1e-15);
        assert!(c.m13_identity_residual(1.0, 2.0) < 1e-15);
        assert!(c.m23_identity_residual(2.0) < 1e-15);
        // the uncorrected identities miss by 1/b3 and 1/b2 - 1/b3
        assert_relative_eq!(
            (c.mfpt[(0, 2)] - (c.mfpt[(2, 2)] + 1.0)).abs(),
            0.5,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            (c.mfpt[(1, 2)] - (c.mfpt[(2, 2)] - 1.0)).abs(),
            0.5,
            epsilon = 1e-15
        );
        for i in 0..3 {
            assert_relative_eq!(c.mfpt[(i, i)] * c.varpi[i], c.mu[i], epsilon = 1e-15);
        }
    }

    #[test]
    fn generator_round_trip_through_spec() {
        let gen = bd3();
        let spec = mrp_from_generator(&gen).unwrap();
        let back = generator_from_spec(&spec).unwrap();
        assert_relative_eq!(back.matrix().clone(), gen.matrix().clone(), epsilon = 1e-14);
    }
}
