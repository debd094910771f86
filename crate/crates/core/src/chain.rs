//! Validated chain inputs and the two stationary distributions of a
//! Markov renewal process.

use std::collections::VecDeque;
use std::fmt;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, Lu};

/// Default tolerance for row sums of a transition matrix.
pub const DEFAULT_VALIDATION_TOL: f64 = 1e-9;

/// Row-stochastic, irreducible transition matrix of the embedded jump chain.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix {
    p: DMatrix<f64>,
}

impl StochasticMatrix {
    pub fn new(raw: DMatrix<f64>, tol: f64) -> Result<Self> {
        validate_chain(raw, tol)
    }

    pub fn from_rows(rows: &[Vec<f64>], tol: f64) -> Result<Self> {
        validate_chain(matrix_from_rows(rows)?, tol)
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.p[(i, j)]
    }

    /// `I - P`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim(), self.dim()) - &self.p
    }

    /// Period of the chain (gcd of cycle lengths in the support graph).
    pub fn period(&self) -> usize {
        let m = self.dim();
        let mut level = vec![usize::MAX; m];
        level[0] = 0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for v in 0..m {
                if self.p[(u, v)] > 0.0 && level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for u in 0..m {
            for v in 0..m {
                if self.p[(u, v)] > 0.0 {
                    let d = (level[u] + 1).abs_diff(level[v]);
                    g = gcd(g, d);
                }
            }
        }
        g.max(1)
    }

    pub fn is_aperiodic(&self) -> bool {
        self.period() == 1
    }

    /// Stable identity of the matrix contents, used to tie derived
    /// objects back to the chain they were built for.
    pub fn fingerprint(&self) -> u64 {
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.dim().hash(&mut h);
        for x in self.p.iter() {
            x.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let m = rows.len();
    if m == 0 {
        return Err(Error::Empty);
    }
    for r in rows {
        if r.len() != m {
            return Err(Error::NotSquare {
                rows: m,
                cols: r.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

/// Checks a raw matrix for row-stochasticity and irreducibility.
///
/// Rows whose sums deviate from one by at most `tol` are renormalized.
pub fn validate_chain(raw: DMatrix<f64>, tol: f64) -> Result<StochasticMatrix> {
    let m = raw.nrows();
    if raw.ncols() != m {
        return Err(Error::NotSquare {
            rows: m,
            cols: raw.ncols(),
        });
    }
    if m == 0 {
        return Err(Error::Empty);
    }
    let mut p = raw;
    for i in 0..m {
        for j in 0..m {
            let x = p[(i, j)];
            if !x.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
            if x < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j });
            }
        }
        let sum: f64 = p.row(i).sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::RowSumViolation { row: i, sum });
        }
        if sum != 1.0 {
            for j in 0..m {
                p[(i, j)] /= sum;
            }
        }
    }
    if !strongly_connected(&p) {
        return Err(Error::Reducible);
    }
    Ok(StochasticMatrix { p })
}

/// Forward reachability from state 0 on the support graph and on its transpose.
fn strongly_connected(p: &DMatrix<f64>) -> bool {
    let m = p.nrows();
    let reach = |transpose: bool| {
        let mut seen = vec![false; m];
        seen[0] = true;
        let mut queue = VecDeque::from([0usize]);
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in 0..m {
                let w = if transpose { p[(v, u)] } else { p[(u, v)] };
                if w > 0.0 && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == m
    };
    reach(false) && reach(true)
}

/// Solves `pi^T (I - P) = 0`, `pi^T e = 1` with the last equation of the
/// transposed system replaced by the normalization.
pub fn stationary_embedded(chain: &StochasticMatrix) -> Result<DVector<f64>> {
    let m = chain.dim();
    let mut a = chain.laplacian().transpose();
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::zeros(m);
    b[m - 1] = 1.0;
    Lu::factor(&a)?.solve_vec(&b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProcessKind {
    Dtmc,
    Mrp,
    Ctmc,
}

impl fmt::Display for ProcessKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProcessKind::Dtmc => "dtmc",
            ProcessKind::Mrp => "mrp",
            ProcessKind::Ctmc => "ctmc",
        })
    }
}

/// First moments of the holding times.
#[derive(Debug, Clone, PartialEq)]
pub enum Moments {
    /// `P1 = [mu_ij]`, with `mu_ij = p_ij * E[hold | i -> j]`.
    Full(DMatrix<f64>),
    /// Mean sojourn time per state only.
    Means(DVector<f64>),
}

/// A Markov renewal process described by its jump chain and holding-time
/// first moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MrpSpec {
    chain: StochasticMatrix,
    moments: Moments,
    kind: ProcessKind,
    mu: DVector<f64>,
}

impl MrpSpec {
    pub fn new(chain: StochasticMatrix, moments: Moments, kind: ProcessKind) -> Result<Self> {
        let m = chain.dim();
        let mu = match &moments {
            Moments::Full(p1) => {
                if p1.nrows() != m || p1.ncols() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: p1.nrows().max(p1.ncols()),
                    });
                }
                for i in 0..m {
                    for j in 0..m {
                        let x = p1[(i, j)];
                        if !x.is_finite() || x < 0.0 {
                            return Err(Error::InvalidMoments(format!(
                                "mu_{i}{j} = {x} must be finite and nonnegative"
                            )));
                        }
                        if chain.get(i, j) == 0.0 && x != 0.0 {
                            return Err(Error::InvalidMoments(format!(
                                "mu_{i}{j} = {x} but p_{i}{j} = 0"
                            )));
                        }
                    }
                }
                DVector::from_iterator(m, p1.row_iter().map(|r| r.sum()))
            }
            Moments::Means(mu) => {
                if mu.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: mu.len(),
                    });
                }
                mu.clone()
            }
        };
        for (i, &x) in mu.iter().enumerate() {
            if !x.is_finite() || x <= 0.0 {
                return Err(Error::NonpositiveSojourn { state: i, value: x });
            }
        }
        if kind == ProcessKind::Dtmc && mu.iter().any(|&x| x != 1.0) {
            return Err(Error::InvalidMoments(
                "a dtmc has unit holding times".to_string(),
            ));
        }
        Ok(Self {
            chain,
            moments,
            kind,
            mu,
        })
    }

    /// Discrete-time chain: unit holding times.
    pub fn dtmc(chain: StochasticMatrix) -> Self {
        let m = chain.dim();
        Self::new(chain, Moments::Means(linalg::ones(m)), ProcessKind::Dtmc)
            .expect("unit holding times are valid")
    }

    pub fn with_means(chain: StochasticMatrix, mu: DVector<f64>) -> Result<Self> {
        Self::new(chain, Moments::Means(mu), ProcessKind::Mrp)
    }

    pub fn with_moment_matrix(chain: StochasticMatrix, p1: DMatrix<f64>) -> Result<Self> {
        Self::new(chain, Moments::Full(p1), ProcessKind::Mrp)
    }

    pub fn chain(&self) -> &StochasticMatrix {
        &self.chain
    }

    pub fn moments(&self) -> &Moments {
        &self.moments
    }

    pub fn kind(&self) -> ProcessKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.chain.dim()
    }

    /// Mean sojourn times `mu = P1 e`.
    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    /// `P1 E`, which equals `mu e^T` in either representation.
    pub fn p1_e(&self) -> DMatrix<f64> {
        let m = self.dim();
        DMatrix::from_fn(m, m, |i, _| self.mu[i])
    }

    /// Mean holding time in `i` given that the next state is `j`.
    /// `None` when the transition is impossible.
    pub fn conditional_mean(&self, i: usize, j: usize) -> Option<f64> {
        let p = self.chain.get(i, j);
        if p == 0.0 {
            return None;
        }
        Some(match &self.moments {
            Moments::Full(p1) => p1[(i, j)] / p,
            Moments::Means(mu) => mu[i],
        })
    }
}

/// Embedded and semi-Markov stationary vectors with the mean asymptotic increment.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryProfile {
    pub pi: DVector<f64>,
    pub varpi: DVector<f64>,
    pub mu: DVector<f64>,
    /// Mean asymptotic increment `pi^T mu`.
    pub lambda: f64,
}

impl StationaryProfile {
    /// `Lambda = diag(mu)`.
    pub fn lambda_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.mu)
    }

    /// `Pi = e pi^T`.
    pub fn pi_matrix(&self) -> DMatrix<f64> {
        let m = self.pi.len();
        DMatrix::from_fn(m, m, |_, j| self.pi[j])
    }

    /// `lambda * varpi^T Lambda^{-1}`, which must reproduce `pi`.
    pub fn pi_from_varpi(&self) -> DVector<f64> {
        self.varpi.component_div(&self.mu) * self.lambda
    }
}

pub fn stationary_profile(spec: &MrpSpec) -> Result<StationaryProfile> {
    let pi = stationary_embedded(spec.chain())?;
    let mu = spec.mu().clone();
    let lambda = pi.dot(&mu);
    let varpi = pi.component_mul(&mu) / lambda;
    Ok(StationaryProfile {
        pi,
        varpi,
        mu,
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn chain(rows: &[&[f64]]) -> Result<StochasticMatrix> {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        StochasticMatrix::from_rows(&rows, 1e-12)
    }

    #[test]
    fn permutation_is_valid() {
        let c = chain(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(c.dim(), 2);
        assert_eq!(c.period(), 2);
    }

    #[test]
    fn identity_is_reducible() {
        assert_eq!(chain(&[&[1.0, 0.0], &[0.0, 1.0]]), Err(Error::Reducible));
    }

    #[test]
    fn one_way_chain_is_reducible() {
        assert_eq!(chain(&[&[0.5, 0.5], &[0.0, 1.0]]), Err(Error::Reducible));
    }

    #[test]
    fn lazy_two_state_is_valid_and_aperiodic() {
        let c = chain(&[&[0.5, 0.5], &[0.25, 0.75]]).unwrap();
        assert!(c.is_aperiodic());
    }

    #[test]
    fn row_sum_and_sign_errors() {
        assert!(matches!(
            chain(&[&[0.5, 0.6], &[0.5, 0.5]]),
            Err(Error::RowSumViolation { row: 0, .. })
        ));
        assert_eq!(
            chain(&[&[1.5, -0.5], &[0.5, 0.5]]),
            Err(Error::NegativeEntry { row: 0, col: 1 })
        );
        let rows = vec![vec![0.5, 0.5, 0.0], vec![0.5, 0.5, 0.0]];
        assert!(matches!(
            StochasticMatrix::from_rows(&rows, 1e-9),
            Err(Error::NotSquare { .. })
        ));
        assert_eq!(StochasticMatrix::from_rows(&[], 1e-9), Err(Error::Empty));
    }

    #[test]
    fn small_row_deviation_is_renormalized() {
        let rows = vec![vec![0.5, 0.5 + 1e-10], vec![1.0, 0.0]];
        let c = StochasticMatrix::from_rows(&rows, 1e-9).unwrap();
        assert!((c.matrix().row(0).sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn stationary_examples() {
        let pi = stationary_embedded(&chain(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()).unwrap();
        assert_relative_eq!(pi, DVector::from_vec(vec![0.5, 0.5]), epsilon = 1e-15);

        let pi = stationary_embedded(&chain(&[&[0.5, 0.5], &[0.25, 0.75]]).unwrap()).unwrap();
        assert_relative_eq!(
            pi,
            DVector::from_vec(vec![1.0 / 3.0, 2.0 / 3.0]),
            epsilon = 1e-15
        );

        // three-state birth-death embedded chain with rho2 = 2
        let p = chain(&[
            &[0.0, 1.0, 0.0],
            &[1.0 / 3.0, 0.0, 2.0 / 3.0],
            &[0.0, 1.0, 0.0],
        ])
        .unwrap();
        let pi = stationary_embedded(&p).unwrap();
        assert_relative_eq!(
            pi,
            DVector::from_vec(vec![1.0 / 6.0, 0.5, 1.0 / 3.0]),
            epsilon = 1e-14
        );
    }

    #[test]
    fn single_state_chain() {
        let c = chain(&[&[1.0]]).unwrap();
        assert_eq!(stationary_embedded(&c).unwrap()[0], 1.0);
        assert!(c.is_aperiodic());
        let spec = MrpSpec::with_means(c, DVector::from_vec(vec![2.5])).unwrap();
        let prof = stationary_profile(&spec).unwrap();
        assert_eq!(prof.lambda, 2.5);
        assert_eq!(prof.varpi[0], 1.0);
    }

    #[test]
    fn profile_dtmc_has_unit_increment() {
        let spec = MrpSpec::dtmc(chain(&[&[0.2, 0.8], &[0.6, 0.4]]).unwrap());
        let prof = stationary_profile(&spec).unwrap();
        assert_relative_eq!(prof.lambda, 1.0, epsilon = 1e-15);
        assert_relative_eq!(prof.varpi, prof.pi, epsilon = 1e-15);
    }

    #[test]
    fn profile_two_state_mrp() {
        let spec = MrpSpec::with_means(
            chain(&[&[0.5, 0.5], &[0.25, 0.75]]).unwrap(),
            DVector::from_vec(vec![2.0, 4.0]),
        )
        .unwrap();
        let prof = stationary_profile(&spec).unwrap();
        assert_relative_eq!(prof.lambda, 10.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(
            prof.varpi,
            DVector::from_vec(vec![0.2, 0.8]),
            epsilon = 1e-14
        );
        assert_relative_eq!(prof.pi_from_varpi(), prof.pi, epsilon = 1e-14);
    }

    #[test]
    fn moment_matrix_validation() {
        let c = chain(&[&[0.0, 1.0], &[0.5, 0.5]]).unwrap();
        let bad = DMatrix::from_row_slice(2, 2, &[0.3, 1.0, 0.5, 0.5]);
        assert!(matches!(
            MrpSpec::with_moment_matrix(c.clone(), bad),
            Err(Error::InvalidMoments(_))
        ));
        let zero_row = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.5, 0.5]);
        assert!(matches!(
            MrpSpec::with_moment_matrix(c.clone(), zero_row),
            Err(Error::NonpositiveSojourn { state: 0, .. })
        ));
        let p1 = DMatrix::from_row_slice(2, 2, &[0.0, 3.0, 0.5, 1.5]);
        let spec = MrpSpec::with_moment_matrix(c, p1).unwrap();
        assert_eq!(spec.mu().as_slice(), &[3.0, 2.0]);
        assert_eq!(spec.conditional_mean(1, 0), Some(1.0));
        assert_eq!(spec.conditional_mean(1, 1), Some(3.0));
        assert_eq!(spec.conditional_mean(0, 0), None);
    }

    #[test]
    fn fingerprint_distinguishes_chains() {
        let a = chain(&[&[0.5, 0.5], &[0.25, 0.75]]).unwrap();
        let b = chain(&[&[0.5, 0.5], &[0.3, 0.7]]).unwrap();
        assert_eq!(a.fingerprint(), a.clone().fingerprint());
        assert_ne!(a.fingerprint(), b.fingerprint());
    }
}
