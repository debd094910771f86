//! The invariant battery behind `kemeny verify`.

use kemeny_core::ctmc::{ctmc_profile_h, generator_h};
use kemeny_core::kemeny::{kemeny_general_form, series_residual};
use kemeny_core::linalg::{inf_norm, max_rel_diff, max_rel_diff_vec, ones, vec_inf_norm};
use kemeny_core::nalgebra::DVector;
use kemeny_core::prelude::*;
use serde::Serialize;

use crate::format::{exact, sci, Palette};
use crate::input::Loaded;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            limit,
            pass: residual <= limit,
        }
    }
}

pub fn battery(loaded: &Loaded, constancy_tol: f64) -> Result<Vec<Check>> {
    let spec = &loaded.spec;
    let chain = spec.chain();
    let m = spec.dim();
    let e = ones(m);
    let profile = stationary_profile(spec)?;
    let direct = mfpt_direct(spec)?;
    let report = kemeny_from_mfpt(&direct, &profile, constancy_tol);
    let mut checks = Vec::new();

    let balance = (profile.pi.transpose() * chain.laplacian()).amax();
    checks.push(Check::new("stationary balance", balance, 1e-10));
    checks.push(Check::new(
        "stationary normalization",
        (profile.pi.sum() - 1.0).abs(),
        1e-12,
    ));
    checks.push(Check::new(
        "occupancy round trip",
        vec_inf_norm(&(profile.pi_from_varpi() - &profile.pi)),
        1e-10,
    ));

    let z = fundamental_matrix(chain, &profile.pi)?;
    let a = group_inverse(chain, &profile.pi)?;
    let gt = parametric_ginverse(chain, spec.mu(), &e)?;
    let gt_pi = parametric_ginverse(chain, spec.mu(), &profile.pi)?;
    let plain = parametric_ginverse(chain, &e, &e)?;
    let mut ginverses = vec![
        ("Z", z.clone()),
        ("A#", a.clone()),
        ("G~ u=e", gt),
        ("G~ u=pi", gt_pi),
        ("[I-P+ee^T]^-1", plain),
    ];
    if let Some(gen) = &loaded.generator {
        ginverses.push(("H", generator_h(gen, &e)?));
    }
    for (name, g) in &ginverses {
        let scale = match g.route() {
            GInverseRoute::GeneratorH { q, .. } => inf_norm(q).max(1.0),
            _ => 1.0,
        };
        checks.push(Check::new(
            format!("g-inverse residual {name}"),
            verify_ginverse(g, chain),
            1e-9 * scale,
        ));
    }

    let m_scale = direct.matrix().amax().max(1.0);
    checks.push(Check::new(
        "first passage equations",
        mfpt_residual(&direct, spec),
        1e-9 * m_scale,
    ));

    let mut routes = vec![
        ("mfpt Z vs direct", mfpt_closed(spec, &z)?),
        ("mfpt A# vs direct", mfpt_closed(spec, &a)?),
        ("mfpt G~ u=e vs direct", mfpt_gtilde(spec, &e)?),
        ("mfpt G~ u=pi vs direct", mfpt_gtilde(spec, &profile.pi)?),
    ];
    if let Some(gen) = &loaded.generator {
        routes.push(("mfpt H vs direct", ctmc_profile_h(gen, &e)?.mfpt));
    }
    for (name, mfpt) in &routes {
        checks.push(Check::new(
            *name,
            max_rel_diff(mfpt.matrix(), direct.matrix()),
            1e-8,
        ));
    }

    let recurrence = direct
        .recurrence_times()
        .iter()
        .zip(profile.pi.iter())
        .map(|(mii, pi)| (pi * mii - profile.lambda).abs())
        .fold(0.0, f64::max);
    checks.push(Check::new(
        "pi_i m_ii = lambda",
        recurrence,
        1e-9 * profile.lambda.max(1.0),
    ));
    let occupancy = direct.recurrence_times().component_mul(&profile.varpi);
    checks.push(Check::new(
        "varpi_i m_ii = mu_i",
        max_rel_diff_vec(&occupancy, &profile.mu),
        1e-9,
    ));

    let k_scale = report.k1().amax().max(1.0);
    let scaled: DVector<f64> = report.k1() / profile.lambda;
    checks.push(Check::new(
        "k3 = k1 / lambda",
        max_rel_diff_vec(report.k3(), &scaled),
        1e-9,
    ));
    checks.push(Check::new(
        "series relation for k1",
        series_residual(report.k1(), &z, &profile),
        1e-9 * k_scale,
    ));

    let (_, spread) = constancy_test(report.k2c(), constancy_tol);
    let k2c_scale = report.k2c().amax().max(1.0);
    checks.push(Check::new(
        "k2c is constant",
        spread,
        constancy_tol * k2c_scale,
    ));

    let mut closed_gap: f64 = 0.0;
    for (_, g) in &ginverses {
        for def in KemenyDefinition::ALL {
            let target = report.vector(def);
            closed_gap = closed_gap.max(max_rel_diff_vec(&kemeny_closed(spec, g, def)?, target));
            closed_gap = closed_gap.max(max_rel_diff_vec(
                &kemeny_general_form(spec, g, def)?,
                target,
            ));
        }
    }
    checks.push(Check::new(
        "kemeny closed forms vs mixing",
        closed_gap,
        1e-8,
    ));

    let verdict = constancy_equivalence(spec, constancy_tol)?;
    let mu_scale = vec_inf_norm(spec.mu()).max(1.0);
    checks.push(Check::new(
        "(I - P) k1 = mu - lambda e",
        verdict.identity_residual,
        1e-9 * mu_scale,
    ));
    let mismatches = [
        verdict.k1_constant,
        verdict.k2_constant,
        verdict.k3_constant,
    ]
    .iter()
    .filter(|&&c| c != verdict.mu_constant)
    .count();
    checks.push(Check::new(
        "constancy iff constant mu",
        mismatches as f64,
        0.0,
    ));

    let trace = kemeny_constant_dtmc(chain, DtmcRoute::Trace)?;
    let eigen = kemeny_constant_dtmc(chain, DtmcRoute::Eigen)?;
    checks.push(Check::new(
        "tr(Z) vs eigenvalue sum",
        (trace.value - eigen.value).abs() / trace.value.max(1.0),
        1e-8,
    ));
    checks.push(Check::new(
        "eigenvalue sum imaginary part",
        eigen.imaginary_residue,
        1e-8,
    ));
    checks.push(Check::new(
        "tr(Z) = 1 + tr(A#)",
        (z.trace() - 1.0 - a.trace()).abs() / z.trace().max(1.0),
        1e-9,
    ));

    Ok(checks)
}

pub fn to_text(source: &str, checks: &[Check], palette: Palette) -> String {
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut out = format!("{source}: invariant battery\n");
    for c in checks {
        let tag = if c.pass {
            palette.good("PASS")
        } else {
            palette.bad("FAIL")
        };
        out += &format!(
            "{tag}  {:<width$}  residual {:>10}  limit {:>10}\n",
            c.name,
            sci(c.residual),
            sci(c.limit)
        );
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    out += &format!("{} checks, {} failed\n", checks.len(), failed);
    out
}

#[derive(Serialize)]
struct CheckJson<'a> {
    name: &'a str,
    pass: bool,
    residual: String,
    limit: String,
}

#[derive(Serialize)]
struct BatteryJson<'a> {
    source: &'a str,
    pass: bool,
    checks: Vec<CheckJson<'a>>,
}

pub fn to_json(source: &str, checks: &[Check]) -> String {
    let doc = BatteryJson {
        source,
        pass: checks.iter().all(|c| c.pass),
        checks: checks
            .iter()
            .map(|c| CheckJson {
                name: &c.name,
                pass: c.pass,
                residual: exact(c.residual),
                limit: exact(c.limit),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}
