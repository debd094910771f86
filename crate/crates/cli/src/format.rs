use std::io::IsTerminal;

use kemeny_core::nalgebra::{DMatrix, DVector};

/// Full-precision decimal string for machine output. `{:?}` is the shortest
/// representation that round-trips.
pub fn exact(x: f64) -> String {
    format!("{x:?}")
}

pub fn exact_vec(v: &DVector<f64>) -> Vec<String> {
    v.iter().map(|&x| exact(x)).collect()
}

pub fn exact_matrix(a: &DMatrix<f64>) -> Vec<Vec<String>> {
    a.row_iter()
        .map(|r| r.iter().map(|&x| exact(x)).collect())
        .collect()
}

pub fn fixed(x: f64) -> String {
    format!("{x:.6}")
}

pub fn sci(x: f64) -> String {
    format!("{x:.2e}")
}

pub fn matrix_table(a: &DMatrix<f64>) -> String {
    let mut out = String::from("     ");
    for j in 0..a.ncols() {
        out += &format!("{:>14}", j + 1);
    }
    out.push('\n');
    for (i, row) in a.row_iter().enumerate() {
        out += &format!("{:>5}", i + 1);
        for &x in row.iter() {
            out += &format!("{:>14}", fixed(x));
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy)]
pub struct Palette {
    enabled: bool,
}

impl Palette {
    /// Colors only on a terminal, and never when `NO_COLOR` is set.
    pub fn detect() -> Self {
        let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
        Self {
            enabled: !no_color && std::io::stdout().is_terminal(),
        }
    }

    pub fn good(&self, s: &str) -> String {
        self.paint(s, "32")
    }

    pub fn bad(&self, s: &str) -> String {
        self.paint(s, "31")
    }

    fn paint(&self, s: &str, code: &str) -> String {
        if self.enabled {
            format!("\x1b[{code}m{s}\x1b[0m")
        } else {
            s.to_string()
        }
    }
}
