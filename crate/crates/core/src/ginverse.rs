//! Generalized inverses of `I - P`.
//!
//! Four constructions are supported:
//!
//! * the fundamental matrix `Z = [I - P + e pi^T]^{-1}`,
//! * the group inverse `A# = Z - e pi^T`,
//! * the parametric family `[I - P + t u^T]^{-1}` (with `t = mu` it gives the
//!   matrix written `G~` in the Kemeny formulas),
//! * `H = [Q + e u^T]^{-1}`, a g-inverse of a generator `Q` (built in
//!   [`crate::ctmc`]).
//!
//! Each [`GInverse`] remembers the chain it was built for so that formula
//! evaluation can refuse a mismatched pair.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::chain::StochasticMatrix;
use crate::eigen;
use crate::error::{Error, Result};
use crate::linalg::{self, Lu};

/// Threshold below which `u^T e` is treated as zero.
pub const DEGENERATE_U_TOL: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub enum GInverseRoute {
    Fundamental,
    Group,
    Parametric {
        t: DVector<f64>,
        u: DVector<f64>,
    },
    /// `H = [Q + e u^T]^{-1}`; the generator is kept so residuals can be
    /// taken against `Q`.
    GeneratorH {
        u: DVector<f64>,
        q: DMatrix<f64>,
    },
}

impl GInverseRoute {
    pub fn name(&self) -> &'static str {
        match self {
            GInverseRoute::Fundamental => "Z",
            GInverseRoute::Group => "A#",
            GInverseRoute::Parametric { .. } => "G~",
            GInverseRoute::GeneratorH { .. } => "H",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GInverse {
    g: DMatrix<f64>,
    route: GInverseRoute,
    chain_fingerprint: u64,
    ill_conditioned: bool,
}

impl GInverse {
    pub(crate) fn new(
        g: DMatrix<f64>,
        route: GInverseRoute,
        chain: &StochasticMatrix,
        ill_conditioned: bool,
    ) -> Self {
        Self {
            g,
            route,
            chain_fingerprint: chain.fingerprint(),
            ill_conditioned,
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn route(&self) -> &GInverseRoute {
        &self.route
    }

    /// True when the LU growth factor of the defining inversion was excessive.
    pub fn is_ill_conditioned(&self) -> bool {
        self.ill_conditioned
    }

    pub fn trace(&self) -> f64 {
        self.g.trace()
    }

    /// A g-inverse of `I - P` carried by this object. For the generator
    /// route this is `H Q_d = [I - P - mu u^T]^{-1}`; every other route
    /// already is one.
    pub fn embedded_matrix(&self) -> DMatrix<f64> {
        match &self.route {
            GInverseRoute::GeneratorH { q, .. } => &self.g * DMatrix::from_diagonal(&q.diagonal()),
            _ => self.g.clone(),
        }
    }

    pub fn built_for(&self, chain: &StochasticMatrix) -> bool {
        self.chain_fingerprint == chain.fingerprint() && self.g.nrows() == chain.dim()
    }

    pub(crate) fn check_chain(&self, chain: &StochasticMatrix) -> Result<()> {
        if self.built_for(chain) {
            Ok(())
        } else {
            Err(Error::RouteMismatch)
        }
    }
}

fn e_outer(m: usize, v: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |_, j| v[j])
}

pub fn fundamental_matrix(chain: &StochasticMatrix, pi: &DVector<f64>) -> Result<GInverse> {
    let m = chain.dim();
    check_len(m, pi.len())?;
    let a = chain.laplacian() + e_outer(m, pi);
    let lu = Lu::factor(&a)?;
    Ok(GInverse::new(
        lu.inverse(),
        GInverseRoute::Fundamental,
        chain,
        lu.is_ill_conditioned(),
    ))
}

pub fn group_inverse(chain: &StochasticMatrix, pi: &DVector<f64>) -> Result<GInverse> {
    let z = fundamental_matrix(chain, pi)?;
    let m = chain.dim();
    let g = z.g - e_outer(m, pi);
    Ok(GInverse::new(
        g,
        GInverseRoute::Group,
        chain,
        z.ill_conditioned,
    ))
}

/// `[I - P + t u^T]^{-1}`; nonsingular whenever `pi^T t != 0` and `u^T e != 0`.
pub fn parametric_ginverse(
    chain: &StochasticMatrix,
    t: &DVector<f64>,
    u: &DVector<f64>,
) -> Result<GInverse> {
    let m = chain.dim();
    check_len(m, t.len())?;
    check_len(m, u.len())?;
    let ue = u.sum();
    if ue.abs() < DEGENERATE_U_TOL {
        return Err(Error::DegenerateU(ue));
    }
    let a = chain.laplacian() + t * u.transpose();
    let lu = Lu::factor(&a)?;
    Ok(GInverse::new(
        lu.inverse(),
        GInverseRoute::Parametric {
            t: t.clone(),
            u: u.clone(),
        },
        chain,
        lu.is_ill_conditioned(),
    ))
}

/// `||A G A - A||_inf` with `A = I - P`, or `A = Q` for the generator route.
pub fn verify_ginverse(g: &GInverse, chain: &StochasticMatrix) -> f64 {
    let a = match &g.route {
        GInverseRoute::GeneratorH { q, .. } => q.clone(),
        _ => chain.laplacian(),
    };
    linalg::inf_norm(&(&a * &g.g * &a - &a))
}

/// Eigenvalues of `P`, sorted by descending real part (ties by descending
/// imaginary part).
pub fn eigen_spectrum(chain: &StochasticMatrix) -> Result<Vec<Complex64>> {
    let mut ev = eigen::eigenvalues(chain.matrix())?;
    ev.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(ev)
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::stationary_embedded;
    use approx::assert_relative_eq;

    fn chain(rows: &[&[f64]]) -> StochasticMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        StochasticMatrix::from_rows(&rows, 1e-12).unwrap()
    }

    fn flip() -> StochasticMatrix {
        chain(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    fn lazy() -> StochasticMatrix {
        chain(&[&[0.5, 0.5], &[0.25, 0.75]])
    }

    /// Explicit 2x2 inverse, independent of the LU path.
    fn inv2(a: &DMatrix<f64>) -> DMatrix<f64> {
        let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
        DMatrix::from_row_slice(2, 2, &[a[(1, 1)], -a[(0, 1)], -a[(1, 0)], a[(0, 0)]]) / det
    }

    #[test]
    fn fundamental_trace_two_state() {
        for (c, expected) in [(flip(), 1.5), (lazy(), 7.0 / 3.0)] {
            let pi = stationary_embedded(&c).unwrap();
            let z = fundamental_matrix(&c, &pi).unwrap();
            assert_relative_eq!(z.trace(), expected, epsilon = 1e-14);
            let explicit = inv2(&(c.laplacian() + e_outer(2, &pi)));
            assert_relative_eq!(z.matrix().clone(), explicit, epsilon = 1e-14);
            let ze = z.matrix() * linalg::ones(2);
            assert_relative_eq!(ze, linalg::ones(2), epsilon = 1e-14);
        }
    }

    #[test]
    fn group_inverse_properties() {
        let c = flip();
        let pi = stationary_embedded(&c).unwrap();
        let a = group_inverse(&c, &pi).unwrap();
        assert_relative_eq!(a.trace(), 0.5, epsilon = 1e-14);
        let ae = a.matrix() * linalg::ones(2);
        assert!(ae.amax() < 1e-14);
        let z = fundamental_matrix(&c, &pi).unwrap();
        assert_relative_eq!(a.trace(), z.trace() - 1.0, epsilon = 1e-14);
    }

    #[test]
    fn parametric_with_mu_maps_mu_to_constant() {
        let c = lazy();
        let mu = DVector::from_vec(vec![2.0, 4.0]);
        let g = parametric_ginverse(&c, &mu, &linalg::ones(2)).unwrap();
        assert_relative_eq!(g.matrix() * &mu, linalg::ones(2) * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn parametric_with_e_and_pi_is_fundamental() {
        let c = lazy();
        let pi = stationary_embedded(&c).unwrap();
        let g = parametric_ginverse(&c, &linalg::ones(2), &pi).unwrap();
        let z = fundamental_matrix(&c, &pi).unwrap();
        assert_relative_eq!(g.matrix().clone(), z.matrix().clone(), epsilon = 1e-14);
    }

    #[test]
    fn degenerate_u_rejected() {
        let c = lazy();
        let u = DVector::from_vec(vec![1.0, -1.0]);
        assert!(matches!(
            parametric_ginverse(&c, &linalg::ones(2), &u),
            Err(Error::DegenerateU(_))
        ));
    }

    #[test]
    fn residuals() {
        let c = lazy();
        let pi = stationary_embedded(&c).unwrap();
        assert!(verify_ginverse(&fundamental_matrix(&c, &pi).unwrap(), &c) <= 1e-10);
        assert!(verify_ginverse(&group_inverse(&c, &pi).unwrap(), &c) <= 1e-10);
        let zero = GInverse::new(DMatrix::zeros(2, 2), GInverseRoute::Group, &c, false);
        assert_relative_eq!(
            verify_ginverse(&zero, &c),
            linalg::inf_norm(&c.laplacian()),
            epsilon = 1e-15
        );
        assert!(verify_ginverse(&zero, &c) > 0.0);
    }

    #[test]
    fn spectra_of_two_state_chains() {
        let ev = eigen_spectrum(&flip()).unwrap();
        assert_relative_eq!(ev[0].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1].re, -1.0, epsilon = 1e-14);
        // characteristic polynomial x^2 - 1.25 x + 0.25 has roots 1 and 0.25
        let ev = eigen_spectrum(&lazy()).unwrap();
        assert_relative_eq!(ev[0].re, 1.0, epsilon = 1e-14);
        assert_relative_eq!(ev[1].re, 0.25, epsilon = 1e-14);
        assert!(ev.iter().all(|z| z.im.abs() < 1e-15));
    }

    #[test]
    fn built_for_detects_other_chain() {
        let c = lazy();
        let pi = stationary_embedded(&c).unwrap();
        let z = fundamental_matrix(&c, &pi).unwrap();
        assert!(z.built_for(&c));
        assert!(!z.built_for(&flip()));
        assert_eq!(z.check_chain(&flip()), Err(Error::RouteMismatch));
    }
}
