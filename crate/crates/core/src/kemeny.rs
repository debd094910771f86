//! Kemeny functions of a Markov renewal process.
//!
//! Three mixtures of mean first passage times are considered, each with a
//! "circle" variant that drops the return-time term `j = i`:
//!
//! | definition | weight of `m_ij`      |
//! |------------|-----------------------|
//! | `k1`       | `pi_j` (embedded chain) |
//! | `k2`       | `varpi_j` (semi-Markov occupancy) |
//! | `k3`       | `1 / m_jj`            |
//!
//! [`kemeny_from_mfpt`] forms them by direct mixing of `M`. [`kemeny_closed`]
//! evaluates the closed forms in terms of a generalized inverse of `I - P`.
//! `k2c` is constant for every process; the others are constant exactly
//! when all mean sojourn times coincide.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::chain::{stationary_profile, MrpSpec, StationaryProfile, StochasticMatrix};
use crate::error::Result;
use crate::ginverse::{eigen_spectrum, fundamental_matrix, GInverse, GInverseRoute};
use crate::linalg;
use crate::mfpt::{mfpt_direct, MfptMatrix};

/// Relative tolerance for calling a vector constant.
pub const DEFAULT_CONSTANCY_TOL: f64 = 1e-8;

/// Imaginary residue above which the eigenvalue route is flagged.
pub const IMAG_RESIDUE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KemenyDefinition {
    K1,
    K2,
    K3,
    K1Circle,
    K2Circle,
    K3Circle,
}

impl KemenyDefinition {
    pub const ALL: [KemenyDefinition; 6] = [
        KemenyDefinition::K1,
        KemenyDefinition::K2,
        KemenyDefinition::K3,
        KemenyDefinition::K1Circle,
        KemenyDefinition::K2Circle,
        KemenyDefinition::K3Circle,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            KemenyDefinition::K1 => "k1",
            KemenyDefinition::K2 => "k2",
            KemenyDefinition::K3 => "k3",
            KemenyDefinition::K1Circle => "k1c",
            KemenyDefinition::K2Circle => "k2c",
            KemenyDefinition::K3Circle => "k3c",
        }
    }
}

impl fmt::Display for KemenyDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KemenyReport {
    vectors: [DVector<f64>; 6],
    constants: [Option<f64>; 6],
    spreads: [f64; 6],
    pub mu_constant: bool,
}

impl KemenyReport {
    pub fn vector(&self, def: KemenyDefinition) -> &DVector<f64> {
        &self.vectors[def.index()]
    }

    /// The common value when the vector is constant (mean of its entries).
    pub fn constant(&self, def: KemenyDefinition) -> Option<f64> {
        self.constants[def.index()]
    }

    pub fn is_constant(&self, def: KemenyDefinition) -> bool {
        self.constants[def.index()].is_some()
    }

    /// `max - min` of the vector.
    pub fn spread(&self, def: KemenyDefinition) -> f64 {
        self.spreads[def.index()]
    }

    pub fn k1(&self) -> &DVector<f64> {
        self.vector(KemenyDefinition::K1)
    }

    pub fn k2(&self) -> &DVector<f64> {
        self.vector(KemenyDefinition::K2)
    }

    pub fn k3(&self) -> &DVector<f64> {
        self.vector(KemenyDefinition::K3)
    }

    pub fn k1c(&self) -> &DVector<f64> {
        self.vector(KemenyDefinition::K1Circle)
    }

    pub fn k2c(&self) -> &DVector<f64> {
        self.vector(KemenyDefinition::K2Circle)
    }

    pub fn k3c(&self) -> &DVector<f64> {
        self.vector(KemenyDefinition::K3Circle)
    }
}

/// `(max v - min v) <= tol * max(1, ||v||_inf)`, together with the spread.
pub fn constancy_test(v: &DVector<f64>, tol: f64) -> (bool, f64) {
    if v.is_empty() {
        return (true, 0.0);
    }
    let spread = v.max() - v.min();
    let scale = v.amax().max(1.0);
    (spread <= tol * scale, spread)
}

fn mean(v: &DVector<f64>) -> f64 {
    v.sum() / v.len() as f64
}

/// `max_i |mu_i - lambda|` relative to `max(1, ||mu||_inf)`.
fn mu_is_constant(mu: &DVector<f64>, lambda: f64, tol: f64) -> bool {
    let dev = mu.iter().map(|x| (x - lambda).abs()).fold(0.0, f64::max);
    dev <= tol * mu.amax().max(1.0)
}

/// Mixes the mean first passage times directly.
pub fn kemeny_from_mfpt(mfpt: &MfptMatrix, profile: &StationaryProfile, tol: f64) -> KemenyReport {
    let m = mfpt.dim();
    let mm = mfpt.matrix();
    let inv_diag = mfpt.recurrence_times().map(|x| 1.0 / x);
    let mix = |w: &DVector<f64>, skip_return: bool| {
        DVector::from_fn(m, |i, _| {
            (0..m)
                .filter(|&j| !(skip_return && j == i))
                .map(|j| w[j] * mm[(i, j)])
                .sum()
        })
    };
    let vectors = [
        mix(&profile.pi, false),
        mix(&profile.varpi, false),
        mix(&inv_diag, false),
        mix(&profile.pi, true),
        mix(&profile.varpi, true),
        mix(&inv_diag, true),
    ];
    build_report(vectors, profile, tol)
}

fn build_report(vectors: [DVector<f64>; 6], profile: &StationaryProfile, tol: f64) -> KemenyReport {
    let mut constants = [None; 6];
    let mut spreads = [0.0; 6];
    for (idx, v) in vectors.iter().enumerate() {
        let (constant, spread) = constancy_test(v, tol);
        spreads[idx] = spread;
        if constant {
            constants[idx] = Some(mean(v));
        }
    }
    KemenyReport {
        vectors,
        constants,
        spreads,
        mu_constant: mu_is_constant(&profile.mu, profile.lambda, tol),
    }
}

/// Which closed-form family applies to a g-inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClosedForm {
    /// Any g-inverse.
    General,
    /// Fundamental matrix, `Z e = e`.
    Fundamental,
    /// Group inverse, `A# e = 0`.
    Group,
    /// `G~ = [I - P + mu u^T]^{-1}`, `G~ mu = e / u^T e`.
    Parametric,
}

struct Terms<'a> {
    mu: &'a DVector<f64>,
    lambda: f64,
    gmu: DVector<f64>,
    /// `tr(G mu pi^T) = pi^T G mu`
    tr_gmupi: f64,
    ge: DVector<f64>,
    tr_g: f64,
    /// `e^T G_d mu`
    gd_mu: f64,
    /// `e^T (G mu pi^T)_d mu`
    gmupi_d_mu: f64,
    e: DVector<f64>,
}

impl<'a> Terms<'a> {
    fn new(g: DMatrix<f64>, profile: &'a StationaryProfile) -> Self {
        let m = g.nrows();
        let mu = &profile.mu;
        let gmu = &g * mu;
        let tr_gmupi = profile.pi.dot(&gmu);
        let ge = g.column_sum();
        let tr_g = g.trace();
        let gd_mu = (0..m).map(|j| g[(j, j)] * mu[j]).sum();
        let gmupi_d_mu = (0..m).map(|j| gmu[j] * profile.pi[j] * mu[j]).sum();
        Self {
            mu,
            lambda: profile.lambda,
            gmu,
            tr_gmupi,
            ge,
            tr_g,
            gd_mu,
            gmupi_d_mu,
            e: linalg::ones(m),
        }
    }

    /// `G mu - tr(G mu pi^T) e`
    fn centred_gmu(&self) -> DVector<f64> {
        &self.gmu - &self.e * self.tr_gmupi
    }

    /// `e^T (G_d - (1/lambda)(G mu pi^T)_d) mu`
    fn k2_offset(&self) -> f64 {
        self.gd_mu - self.gmupi_d_mu / self.lambda
    }

    fn general(&self, which: KemenyDefinition) -> DVector<f64> {
        let l = self.lambda;
        let e = &self.e;
        match which {
            KemenyDefinition::K1 => self.centred_gmu() + e * l - &self.ge * l + e * (l * self.tr_g),
            KemenyDefinition::K2 => self.mu + e * self.k2_offset(),
            KemenyDefinition::K3 => self.centred_gmu() / l + e - &self.ge + e * self.tr_g,
            KemenyDefinition::K1Circle => self.centred_gmu() - &self.ge * l + e * (l * self.tr_g),
            KemenyDefinition::K2Circle => e * self.k2_offset(),
            KemenyDefinition::K3Circle => self.centred_gmu() / l - &self.ge + e * self.tr_g,
        }
    }

    fn fundamental(&self, which: KemenyDefinition) -> DVector<f64> {
        let l = self.lambda;
        let e = &self.e;
        let tz = self.tr_g;
        match which {
            KemenyDefinition::K1 => self.centred_gmu() + e * (l * tz),
            KemenyDefinition::K3 => self.centred_gmu() / l + e * tz,
            KemenyDefinition::K1Circle => self.centred_gmu() + e * (l * (tz - 1.0)),
            KemenyDefinition::K3Circle => self.centred_gmu() / l + e * (tz - 1.0),
            KemenyDefinition::K2 | KemenyDefinition::K2Circle => self.general(which),
        }
    }

    fn group(&self, which: KemenyDefinition) -> DVector<f64> {
        let l = self.lambda;
        let e = &self.e;
        let ta = self.tr_g;
        match which {
            KemenyDefinition::K1 => self.centred_gmu() + e * l + e * (l * ta),
            KemenyDefinition::K3 => self.centred_gmu() / l + e + e * ta,
            KemenyDefinition::K1Circle => self.centred_gmu() + e * (l * ta),
            KemenyDefinition::K3Circle => self.centred_gmu() / l + e * ta,
            KemenyDefinition::K2 | KemenyDefinition::K2Circle => self.general(which),
        }
    }

    /// `u_sum` is `u^T e` for the `u` defining `G~`.
    fn parametric(&self, which: KemenyDefinition, u_sum: f64) -> DVector<f64> {
        let l = self.lambda;
        let e = &self.e;
        let tg = self.tr_g;
        let base = e - &self.ge + e * tg;
        match which {
            KemenyDefinition::K1 => base * l,
            KemenyDefinition::K2 => self.mu - e / u_sum + e * self.gd_mu,
            KemenyDefinition::K3 => base,
            KemenyDefinition::K1Circle => (e * tg - &self.ge) * l,
            // G~ mu = e / u^T e removes the G mu term from the general offset,
            // leaving -1/u^T e + e^T G~_d mu.
            KemenyDefinition::K2Circle => e * (self.gd_mu - 1.0 / u_sum),
            KemenyDefinition::K3Circle => e * tg - &self.ge,
        }
    }
}

fn same_vector(a: &DVector<f64>, b: &DVector<f64>) -> bool {
    a.len() == b.len() && linalg::max_rel_diff_vec(a, b) <= 1e-12
}

/// The closed-form family that applies to `ginv` for this `spec`, with the
/// `G~` matrix and `u^T e` when the parametric simplifications hold.
fn classify(spec: &MrpSpec, ginv: &GInverse) -> (ClosedForm, DMatrix<f64>, f64) {
    match ginv.route() {
        GInverseRoute::Fundamental => (ClosedForm::Fundamental, ginv.matrix().clone(), 0.0),
        GInverseRoute::Group => (ClosedForm::Group, ginv.matrix().clone(), 0.0),
        GInverseRoute::Parametric { t, u } if same_vector(t, spec.mu()) => {
            (ClosedForm::Parametric, ginv.matrix().clone(), u.sum())
        }
        GInverseRoute::Parametric { .. } => (ClosedForm::General, ginv.matrix().clone(), 0.0),
        // H Q_d = [I - P - mu u^T]^{-1} is G~ built with -u.
        GInverseRoute::GeneratorH { u, q }
            if same_vector(&q.diagonal().map(|x| -1.0 / x), spec.mu()) =>
        {
            (ClosedForm::Parametric, ginv.embedded_matrix(), -u.sum())
        }
        GInverseRoute::GeneratorH { .. } => (ClosedForm::General, ginv.embedded_matrix(), 0.0),
    }
}

/// The form [`kemeny_closed`] will use for this pair.
pub fn closed_form_for(spec: &MrpSpec, ginv: &GInverse) -> ClosedForm {
    classify(spec, ginv).0
}

/// Evaluates a Kemeny vector from a generalized inverse of `I - P`.
pub fn kemeny_closed(
    spec: &MrpSpec,
    ginv: &GInverse,
    which: KemenyDefinition,
) -> Result<DVector<f64>> {
    ginv.check_chain(spec.chain())?;
    let profile = stationary_profile(spec)?;
    Ok(kemeny_closed_with_profile(spec, ginv, &profile, which))
}

pub(crate) fn kemeny_closed_with_profile(
    spec: &MrpSpec,
    ginv: &GInverse,
    profile: &StationaryProfile,
    which: KemenyDefinition,
) -> DVector<f64> {
    let (form, g, u_sum) = classify(spec, ginv);
    let terms = Terms::new(g, profile);
    match form {
        ClosedForm::General => terms.general(which),
        ClosedForm::Fundamental => terms.fundamental(which),
        ClosedForm::Group => terms.group(which),
        ClosedForm::Parametric => terms.parametric(which, u_sum),
    }
}

/// Evaluates the generic any-g-inverse form even when a simpler one applies.
pub fn kemeny_general_form(
    spec: &MrpSpec,
    ginv: &GInverse,
    which: KemenyDefinition,
) -> Result<DVector<f64>> {
    ginv.check_chain(spec.chain())?;
    let profile = stationary_profile(spec)?;
    Ok(Terms::new(ginv.embedded_matrix(), &profile).general(which))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtmcRoute {
    /// `tr(Z)`
    Trace,
    /// `1 + sum_{j >= 2} 1 / (1 - lambda_j)` over the non-Perron eigenvalues.
    Eigen,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtmcKemeny {
    pub value: f64,
    /// Absolute imaginary part of the eigenvalue sum (zero for the trace route).
    pub imaginary_residue: f64,
}

impl DtmcKemeny {
    pub fn is_flagged(&self) -> bool {
        self.imaginary_residue > IMAG_RESIDUE_TOL
    }
}

/// Kemeny's constant of the embedded chain viewed as a discrete-time chain.
pub fn kemeny_constant_dtmc(chain: &StochasticMatrix, route: DtmcRoute) -> Result<DtmcKemeny> {
    match route {
        DtmcRoute::Trace => {
            let pi = crate::chain::stationary_embedded(chain)?;
            let z = fundamental_matrix(chain, &pi)?;
            Ok(DtmcKemeny {
                value: z.trace(),
                imaginary_residue: 0.0,
            })
        }
        DtmcRoute::Eigen => {
            let spectrum = eigen_spectrum(chain)?;
            // the Perron root sorts first
            let sum: num_complex::Complex64 =
                spectrum.iter().skip(1).map(|l| 1.0 / (1.0 - l)).sum();
            Ok(DtmcKemeny {
                value: 1.0 + sum.re,
                imaginary_residue: sum.im.abs(),
            })
        }
    }
}

/// Outcome of checking "constant Kemeny function iff constant mean sojourn time".
#[derive(Debug, Clone, PartialEq)]
pub struct ConstancyVerdict {
    /// `||(I - P) k1 - (mu - lambda e)||_inf`
    pub identity_residual: f64,
    pub mu_constant: bool,
    pub k1_constant: bool,
    pub k2_constant: bool,
    pub k3_constant: bool,
    pub k2c_constant: bool,
    pub lambda: f64,
    /// `lambda * tr(Z)`, the common value when `mu` is constant.
    pub lambda_trace_z: f64,
}

impl ConstancyVerdict {
    /// Each of `k1`, `k2`, `k3` is constant exactly when `mu` is.
    pub fn equivalence_holds(&self) -> bool {
        self.k1_constant == self.mu_constant
            && self.k2_constant == self.mu_constant
            && self.k3_constant == self.mu_constant
    }
}

pub fn constancy_equivalence(spec: &MrpSpec, tol: f64) -> Result<ConstancyVerdict> {
    let profile = stationary_profile(spec)?;
    let mfpt = mfpt_direct(spec)?;
    let report = kemeny_from_mfpt(&mfpt, &profile, tol);
    let m = spec.dim();
    let lhs = spec.chain().laplacian() * report.k1();
    let rhs = &profile.mu - linalg::ones(m) * profile.lambda;
    let z = fundamental_matrix(spec.chain(), &profile.pi)?;
    Ok(ConstancyVerdict {
        identity_residual: linalg::vec_inf_norm(&(lhs - rhs)),
        mu_constant: report.mu_constant,
        k1_constant: report.is_constant(KemenyDefinition::K1),
        k2_constant: report.is_constant(KemenyDefinition::K2),
        k3_constant: report.is_constant(KemenyDefinition::K3),
        k2c_constant: report.is_constant(KemenyDefinition::K2Circle),
        lambda: profile.lambda,
        lambda_trace_z: profile.lambda * z.trace(),
    })
}

/// `||k1 - (Z mu - lambda e + Pi k1)||_inf`.
pub fn series_residual(k1: &DVector<f64>, z: &GInverse, profile: &StationaryProfile) -> f64 {
    let m = k1.len();
    let rhs =
        z.matrix() * &profile.mu - linalg::ones(m) * profile.lambda + profile.pi_matrix() * k1;
    linalg::vec_inf_norm(&(k1 - rhs))
}
