//! Stationary distributions, mean first passage times and Kemeny functions
//! for finite irreducible Markov chains, Markov renewal processes and
//! continuous-time Markov chains.
//!
//! ```
//! use kemeny_core::prelude::*;
//! use nalgebra::DVector;
//!
//! let chain = StochasticMatrix::from_rows(&[vec![0.5, 0.5], vec![0.25, 0.75]], 1e-9)?;
//! let spec = MrpSpec::with_means(chain, DVector::from_vec(vec![2.0, 4.0]))?;
//! let profile = stationary_profile(&spec)?;
//! let m = mfpt_direct(&spec)?;
//! let report = kemeny_from_mfpt(&m, &profile, DEFAULT_CONSTANCY_TOL);
//! assert!((report.constant(KemenyDefinition::K2Circle).unwrap() - 3.2).abs() < 1e-12);
//! # Ok::<(), kemeny_core::Error>(())
//! ```

pub mod chain;
pub mod ctmc;
pub mod eigen;
mod error;
pub mod ginverse;
pub mod kemeny;
pub mod linalg;
pub mod mfpt;
pub mod random;
pub mod simulate;

pub use error::{Error, Result};
pub use nalgebra;

pub mod prelude {
    pub use crate::chain::{
        stationary_embedded, stationary_profile, validate_chain, Moments, MrpSpec, ProcessKind,
        StationaryProfile, StochasticMatrix, DEFAULT_VALIDATION_TOL,
    };
    pub use crate::ctmc::{
        bd3_closed, bd_generator, ctmc_profile_h, kemeny1_ctmc, mrp_from_generator,
        BirthDeathParams, Generator,
    };
    pub use crate::ginverse::{
        eigen_spectrum, fundamental_matrix, group_inverse, parametric_ginverse, verify_ginverse,
        GInverse, GInverseRoute,
    };
    pub use crate::kemeny::{
        constancy_equivalence, constancy_test, kemeny_closed, kemeny_constant_dtmc,
        kemeny_from_mfpt, DtmcRoute, KemenyDefinition, KemenyReport, DEFAULT_CONSTANCY_TOL,
    };
    pub use crate::linalg::solve_dense;
    pub use crate::mfpt::{mfpt_closed, mfpt_direct, mfpt_gtilde, mfpt_residual, MfptMatrix};
    pub use crate::simulate::{
        estimate_embedded, estimate_occupancy, simulate_hitting, Estimate, HoldingModel,
        HoldingShape,
    };
    pub use crate::{Error, Result};
}
