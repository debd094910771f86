use clap::ValueEnum;
use kemeny_core::ctmc::{ctmc_profile_h, generator_h};
use kemeny_core::nalgebra::DVector;
use kemeny_core::prelude::*;
use serde::Serialize;
use std::result::Result;

use crate::format::{exact, exact_matrix, exact_vec, fixed, matrix_table, sci};
use crate::input::Loaded;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// First-passage equations solved directly, then mixed
    Direct,
    /// Fundamental matrix
    Z,
    /// Group inverse
    Group,
    /// `[I - P + mu e^T]^{-1}`
    Gtilde,
    /// `[Q + e e^T]^{-1}`, continuous-time inputs only
    H,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::Direct => "direct",
            Route::Z => "z",
            Route::Group => "group",
            Route::Gtilde => "gtilde",
            Route::H => "h",
        }
    }
}

#[derive(Debug, Clone)]
pub struct KemenyRow {
    pub def: KemenyDefinition,
    pub vector: DVector<f64>,
    pub constant: bool,
    pub spread: f64,
}

impl KemenyRow {
    /// Mean of the entries when the vector is judged constant.
    pub fn value(&self) -> Option<f64> {
        self.constant.then(|| self.vector.mean())
    }
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub source: String,
    pub kind: &'static str,
    pub route: Route,
    pub constancy_tol: f64,
    pub profile: StationaryProfile,
    pub mfpt: MfptMatrix,
    pub kemeny: Vec<KemenyRow>,
    pub mu_constant: bool,
    pub equivalence_holds: bool,
    pub identity_residual: f64,
    pub embedded_constant: f64,
    pub ill_conditioned: bool,
}

#[derive(Debug)]
pub enum AnalysisError {
    /// The requested route needs a generator.
    RouteNeedsGenerator,
    Core(Error),
}

impl From<Error> for AnalysisError {
    fn from(e: Error) -> Self {
        AnalysisError::Core(e)
    }
}

pub fn analyze(
    loaded: &Loaded,
    route: Route,
    constancy_tol: f64,
) -> Result<Analysis, AnalysisError> {
    let spec = &loaded.spec;
    let chain = spec.chain();
    let m = spec.dim();
    let profile = stationary_profile(spec)?;
    let e = DVector::from_element(m, 1.0);

    let (mfpt, vectors, ill_conditioned) = if route == Route::Direct {
        let mfpt = mfpt_direct(spec)?;
        let report = kemeny_from_mfpt(&mfpt, &profile, constancy_tol);
        let vectors: Vec<_> = KemenyDefinition::ALL
            .iter()
            .map(|&d| report.vector(d).clone())
            .collect();
        (mfpt, vectors, false)
    } else {
        let (g, mfpt) = match route {
            Route::Z => {
                let g = fundamental_matrix(chain, &profile.pi)?;
                let mfpt = mfpt_closed(spec, &g)?;
                (g, mfpt)
            }
            Route::Group => {
                let g = group_inverse(chain, &profile.pi)?;
                let mfpt = mfpt_closed(spec, &g)?;
                (g, mfpt)
            }
            Route::Gtilde => (
                parametric_ginverse(chain, spec.mu(), &e)?,
                mfpt_gtilde(spec, &e)?,
            ),
            Route::H => {
                let gen = loaded
                    .generator
                    .as_ref()
                    .ok_or(AnalysisError::RouteNeedsGenerator)?;
                (generator_h(gen, &e)?, ctmc_profile_h(gen, &e)?.mfpt)
            }
            Route::Direct => unreachable!(),
        };
        let vectors = KemenyDefinition::ALL
            .iter()
            .map(|&d| kemeny_closed(spec, &g, d))
            .collect::<kemeny_core::Result<Vec<_>>>()?;
        (mfpt, vectors, g.is_ill_conditioned())
    };

    let kemeny = KemenyDefinition::ALL
        .iter()
        .zip(vectors)
        .map(|(&def, vector)| {
            let (constant, spread) = constancy_test(&vector, constancy_tol);
            KemenyRow {
                def,
                vector,
                constant,
                spread,
            }
        })
        .collect();

    let verdict = constancy_equivalence(spec, constancy_tol)?;
    let embedded = kemeny_constant_dtmc(chain, DtmcRoute::Trace)?;

    Ok(Analysis {
        source: loaded.source.clone(),
        kind: loaded.kind.name(),
        route,
        constancy_tol,
        profile,
        mfpt,
        kemeny,
        mu_constant: verdict.mu_constant,
        equivalence_holds: verdict.equivalence_holds(),
        identity_residual: verdict.identity_residual,
        embedded_constant: embedded.value,
        ill_conditioned,
    })
}

#[derive(Serialize)]
struct KemenyJson {
    name: &'static str,
    vector: Vec<String>,
    constant: bool,
    value: Option<String>,
    spread: String,
}

#[derive(Serialize)]
struct EquivalenceJson {
    mu_constant: bool,
    holds: bool,
    identity_residual: String,
}

#[derive(Serialize)]
struct AnalysisJson {
    source: String,
    kind: &'static str,
    states: usize,
    route: &'static str,
    constancy_tol: String,
    pi: Vec<String>,
    varpi: Vec<String>,
    mu: Vec<String>,
    lambda: String,
    mfpt: Vec<Vec<String>>,
    kemeny: Vec<KemenyJson>,
    equivalence: EquivalenceJson,
    embedded_kemeny_constant: String,
    ill_conditioned: bool,
}

pub fn to_json(a: &Analysis) -> String {
    let doc = AnalysisJson {
        source: a.source.clone(),
        kind: a.kind,
        states: a.profile.pi.len(),
        route: a.route.name(),
        constancy_tol: exact(a.constancy_tol),
        pi: exact_vec(&a.profile.pi),
        varpi: exact_vec(&a.profile.varpi),
        mu: exact_vec(&a.profile.mu),
        lambda: exact(a.profile.lambda),
        mfpt: exact_matrix(a.mfpt.matrix()),
        kemeny: a
            .kemeny
            .iter()
            .map(|row| KemenyJson {
                name: row.def.label(),
                vector: exact_vec(&row.vector),
                constant: row.constant,
                value: row.value().map(exact),
                spread: exact(row.spread),
            })
            .collect(),
        equivalence: EquivalenceJson {
            mu_constant: a.mu_constant,
            holds: a.equivalence_holds,
            identity_residual: exact(a.identity_residual),
        },
        embedded_kemeny_constant: exact(a.embedded_constant),
        ill_conditioned: a.ill_conditioned,
    };
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}

pub fn to_text(a: &Analysis) -> String {
    let p = &a.profile;
    let mut out = format!(
        "{} ({}, {} states, route {})\n\n",
        a.source,
        a.kind,
        p.pi.len(),
        a.route.name()
    );
    out += "stationary distributions\n";
    out += &format!("{:>5}{:>14}{:>14}{:>14}\n", "state", "pi", "varpi", "mu");
    for i in 0..p.pi.len() {
        out += &format!(
            "{:>5}{:>14}{:>14}{:>14}\n",
            i + 1,
            fixed(p.pi[i]),
            fixed(p.varpi[i]),
            fixed(p.mu[i])
        );
    }
    out += &format!("lambda = {}\n\n", fixed(p.lambda));
    out += "mean first passage times\n";
    out += &matrix_table(a.mfpt.matrix());
    out += &format!(
        "\nkemeny functions (constancy tol {})\n",
        sci(a.constancy_tol)
    );
    out += &format!("{:<6}{:>14}{:>12}   vector\n", "name", "constant", "spread");
    for row in &a.kemeny {
        let value = row.value().map_or_else(|| "-".to_string(), fixed);
        let entries: Vec<String> = row.vector.iter().map(|&x| fixed(x)).collect();
        out += &format!(
            "{:<6}{:>14}{:>12}   {}\n",
            row.def.label(),
            value,
            sci(row.spread),
            entries.join(" ")
        );
    }
    out += &format!(
        "\nmean sojourn times constant: {}\nk1, k2, k3 constant iff mean sojourn times are: {} (identity residual {})\n",
        if a.mu_constant { "yes" } else { "no" },
        if a.equivalence_holds { "holds" } else { "FAILS" },
        sci(a.identity_residual)
    );
    out += &format!(
        "embedded chain Kemeny constant tr(Z) = {}\n",
        fixed(a.embedded_constant)
    );
    if a.ill_conditioned {
        out += "warning: the generalized inverse is ill-conditioned; results may be inaccurate\n";
    }
    out
}
