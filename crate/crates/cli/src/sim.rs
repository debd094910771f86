//! `kemeny simulate`: Monte Carlo estimates beside their analytic values.

use clap::ValueEnum;
use kemeny_core::prelude::*;
use kemeny_core::simulate::simulate_all_hitting;
use serde::Serialize;

use crate::format::{exact, fixed, sci, Palette};
use crate::input::Loaded;

pub const Z_BAND: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Holding {
    Exponential,
    Deterministic,
    TwoPoint,
}

impl From<Holding> for HoldingShape {
    fn from(h: Holding) -> Self {
        match h {
            Holding::Exponential => HoldingShape::Exponential,
            Holding::Deterministic => HoldingShape::Deterministic,
            Holding::TwoPoint => HoldingShape::TwoPoint,
        }
    }
}

pub struct SimSettings {
    pub trials: u64,
    pub horizon: f64,
    pub seed: u64,
    pub holding: Holding,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub label: String,
    pub estimate: Estimate,
    pub analytic: f64,
}

impl Row {
    pub fn z(&self) -> f64 {
        self.estimate.z_score(self.analytic)
    }

    pub fn within_band(&self) -> bool {
        self.z().abs() <= Z_BAND
    }
}

pub struct SimReport {
    pub source: String,
    pub holding: HoldingShape,
    pub trials: u64,
    pub horizon: f64,
    pub seed: u64,
    pub hitting: Vec<Row>,
    pub embedded: Vec<Row>,
    pub occupancy: Vec<Row>,
}

impl SimReport {
    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.hitting
            .iter()
            .chain(&self.embedded)
            .chain(&self.occupancy)
    }
}

pub fn run(loaded: &Loaded, s: &SimSettings) -> Result<SimReport> {
    let spec = &loaded.spec;
    let m = spec.dim();
    let shape: HoldingShape = s.holding.into();
    let model = HoldingModel::from_shape(spec, shape);
    let profile = stationary_profile(spec)?;
    let mfpt = mfpt_direct(spec)?;

    let estimates = simulate_all_hitting(spec, &model, s.trials, s.seed)?;
    let mut hitting = Vec::with_capacity(m * m);
    for (i, row) in estimates.into_iter().enumerate() {
        for (j, estimate) in row.into_iter().enumerate() {
            hitting.push(Row {
                label: format!("m[{},{}]", i + 1, j + 1),
                estimate,
                analytic: mfpt.get(i, j),
            });
        }
    }
    let embedded = estimate_embedded(spec, s.trials, s.seed)?
        .into_iter()
        .enumerate()
        .map(|(i, estimate)| Row {
            label: format!("pi[{}]", i + 1),
            estimate,
            analytic: profile.pi[i],
        })
        .collect();
    let occupancy = estimate_occupancy(spec, &model, s.horizon, s.seed)?
        .into_iter()
        .enumerate()
        .map(|(i, estimate)| Row {
            label: format!("varpi[{}]", i + 1),
            estimate,
            analytic: profile.varpi[i],
        })
        .collect();

    Ok(SimReport {
        source: loaded.source.clone(),
        holding: shape,
        trials: s.trials,
        horizon: s.horizon,
        seed: s.seed,
        hitting,
        embedded,
        occupancy,
    })
}

pub fn to_text(r: &SimReport, palette: Palette) -> String {
    let mut out = format!(
        "{}: {} holding times, {} trials, horizon {}, seed {}\n",
        r.source,
        r.holding.name(),
        r.trials,
        r.horizon,
        r.seed
    );
    out += &format!(
        "{:<10}{:>14}{:>12}{:>14}{:>9}\n",
        "quantity", "estimate", "std err", "analytic", "z"
    );
    for row in r.rows() {
        let z = row.z();
        let line = format!(
            "{:<10}{:>14}{:>12}{:>14}{:>9.2}",
            row.label,
            fixed(row.estimate.value),
            sci(row.estimate.std_error),
            fixed(row.analytic),
            z
        );
        let line = if row.within_band() {
            palette.good(&line)
        } else {
            palette.bad(&line)
        };
        out += &line;
        out.push('\n');
    }
    let total = r.rows().count();
    let inside = r.rows().filter(|row| row.within_band()).count();
    out += &format!("{inside} of {total} estimates within {Z_BAND} standard errors\n");
    out
}

#[derive(Serialize)]
struct RowJson<'a> {
    quantity: &'a str,
    estimate: String,
    std_error: String,
    analytic: String,
    z: String,
    within_band: bool,
}

#[derive(Serialize)]
struct SimJson<'a> {
    source: &'a str,
    holding: &'static str,
    trials: u64,
    horizon: String,
    seed: u64,
    rows: Vec<RowJson<'a>>,
}

pub fn to_json(r: &SimReport) -> String {
    let doc = SimJson {
        source: &r.source,
        holding: r.holding.name(),
        trials: r.trials,
        horizon: exact(r.horizon),
        seed: r.seed,
        rows: r
            .rows()
            .map(|row| RowJson {
                quantity: &row.label,
                estimate: exact(row.estimate.value),
                std_error: exact(row.estimate.std_error),
                analytic: exact(row.analytic),
                z: exact(row.z()),
                within_band: row.within_band(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("report serializes") + "\n"
}
