//! Error metrics, pairwise scoreboards, and result-table formatting.
//!
//! Solution error is the ∞-norm absolute error against the generated x*
//! (the 2-norm is recorded alongside). Residual error is the scaled
//! normal-equation residual ‖Aᵀ(Ax̂−b)‖₂ / (‖A‖_F·‖b‖₂), which is small
//! exactly when x̂ is a least-squares stationary point — the right
//! certificate for deliberately incompatible systems, where ‖Ax̂−b‖
//! itself never gets small.

use std::fmt::Write as _;

use thiserror::Error;

use crate::linalg::{matvec, matvec_transposed};
use crate::solvers::{SolveResult, SolveStatus};
use crate::testgen::ProblemInstance;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("breakdown results carry no error pair; exclude them")]
    BreakdownResult,
    #[error("non-finite value in solver output")]
    NonFinite,
    #[error("scoreboard needs at least 2 methods and 1 problem")]
    DegenerateScoreboard,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorPair {
    /// ‖x̂ − x*‖∞.
    pub solution_error: f64,
    /// ‖x̂ − x*‖₂, recorded alongside the primary ∞-norm.
    pub solution_error_l2: f64,
    /// ‖Aᵀ(Ax̂−b)‖₂ / (‖A‖_F·‖b‖₂).
    pub residual_error: f64,
}

/// Computes the error pair for a finished solve. Breakdown results are
/// rejected; the harness records them as missing instead.
pub fn compute_errors(
    instance: &ProblemInstance,
    result: &SolveResult,
) -> Result<ErrorPair, MetricsError> {
    if result.status == SolveStatus::Breakdown {
        return Err(MetricsError::BreakdownResult);
    }
    if !result.x.is_finite() {
        return Err(MetricsError::NonFinite);
    }
    let diff = result.x.sub(&instance.x_star);
    let res = matvec(&instance.a, &result.x)
        .expect("instance dimensions consistent")
        .sub(&instance.b);
    let nres = matvec_transposed(&instance.a, &res).expect("instance dimensions consistent");
    let pair = ErrorPair {
        solution_error: diff.norm_inf(),
        solution_error_l2: diff.norm2(),
        residual_error: nres.norm2() / (instance.a.frobenius_norm() * instance.b.norm2()),
    };
    if !pair.solution_error.is_finite() || !pair.residual_error.is_finite() {
        return Err(MetricsError::NonFinite);
    }
    Ok(pair)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMetric {
    Solution,
    Residual,
}

/// Pairwise win/near-tie counts over a problem suite.
#[derive(Debug, Clone)]
pub struct Scoreboard {
    pub methods: Vec<String>,
    /// wins[i][k]: problems where method i's error is lower than method k's
    /// (outside the near-tie band).
    pub wins: Vec<Vec<u32>>,
    /// near_ties[i][k]: problems where the two errors differ by less than
    /// the tie fraction; symmetric.
    pub near_ties: Vec<Vec<u32>>,
    pub problems: usize,
}

/// Builds the scoreboard from an errors table indexed [problem][method];
/// `None` marks missing entries (breakdowns). For each ordered pair and
/// each problem with both entries present: a near-tie when
/// |e_i − e_k| ≤ tie_fraction·max(e_i, e_k), otherwise the smaller error
/// wins.
pub fn build_scoreboard(
    errors: &[Vec<Option<f64>>],
    methods: &[String],
    tie_fraction: f64,
) -> Result<Scoreboard, MetricsError> {
    let nm = methods.len();
    if nm < 2 || errors.is_empty() {
        return Err(MetricsError::DegenerateScoreboard);
    }
    let mut wins = vec![vec![0u32; nm]; nm];
    let mut near_ties = vec![vec![0u32; nm]; nm];
    for row in errors {
        debug_assert_eq!(row.len(), nm);
        for i in 0..nm {
            for k in (i + 1)..nm {
                let (Some(ei), Some(ek)) = (row[i], row[k]) else {
                    continue;
                };
                if (ei - ek).abs() <= tie_fraction * ei.max(ek) {
                    near_ties[i][k] += 1;
                    near_ties[k][i] += 1;
                } else if ei < ek {
                    wins[i][k] += 1;
                } else {
                    wins[k][i] += 1;
                }
            }
        }
    }
    Ok(Scoreboard {
        methods: methods.to_vec(),
        wins,
        near_ties,
        problems: errors.len(),
    })
}

impl Scoreboard {
    /// Row totals as (wins, near-ties), formatted "W/T" in the tables.
    pub fn row_total(&self, i: usize) -> (u32, u32) {
        let w: u32 = self.wins[i].iter().sum();
        let t: u32 = self.near_ties[i].iter().sum();
        (w, t)
    }

    /// Fixed-width text rendering in the style of the synthetic-results
    /// tables: one row per method, cells "W" or "W/T", trailing total.
    pub fn format_table(&self, title: &str) -> String {
        let mut out = String::new();
        let name_w = self
            .methods
            .iter()
            .map(|m| m.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let cell_w = 8;
        let _ = writeln!(out, "{title}  -  {} problems", self.problems);
        let _ = write!(out, "{:<name_w$}", "methods");
        for m in &self.methods {
            let _ = write!(out, " {m:>cell_w$}");
        }
        let _ = writeln!(out, " {:>cell_w$}", "total");
        for (i, mi) in self.methods.iter().enumerate() {
            let _ = write!(out, "{mi:<name_w$}");
            for k in 0..self.methods.len() {
                if i == k {
                    let _ = write!(out, " {:>cell_w$}", "");
                    continue;
                }
                let cell = if self.near_ties[i][k] > 0 {
                    format!("{}/{}", self.wins[i][k], self.near_ties[i][k])
                } else {
                    format!("{}", self.wins[i][k])
                };
                let _ = write!(out, " {cell:>cell_w$}");
            }
            let (w, t) = self.row_total(i);
            let total = if t > 0 {
                format!("{w}/{t}")
            } else {
                format!("{w}")
            };
            let _ = writeln!(out, " {total:>cell_w$}");
        }
        out
    }
}

/// One line of the result table.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub method: String,
    pub status: SolveStatus,
    /// None for breakdowns.
    pub errors: Option<ErrorPair>,
    pub rank: usize,
    pub time_seconds: f64,
}

/// Two-significant-digit scientific notation with a signed two-digit
/// exponent (1.7e-02).
pub fn sci2(x: f64) -> String {
    if x == 0.0 {
        return "0.0e+00".to_string();
    }
    let s = format!("{x:.1e}");
    // normalize "1.7e-2" -> "1.7e-02"
    if let Some(pos) = s.find('e') {
        let (mant, exp) = s.split_at(pos);
        let exp = &exp[1..];
        let (sign, digits) = match exp.strip_prefix('-') {
            Some(d) => ('-', d),
            None => ('+', exp.strip_prefix('+').unwrap_or(exp)),
        };
        format!("{mant}e{sign}{digits:0>2}")
    } else {
        s
    }
}

const TABLE_HEADER: &str = " matrix  dimension    method       solution  residual   rank     time\n\
                            \x20          m    n                    error     error\n\
                            \x20---------------------------------------------------------------------";

/// Fixed-width result table; breakdown rows print the break-down marker in
/// the error columns.
pub fn format_result_table(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{TABLE_HEADER}");
    for r in rows {
        match &r.errors {
            Some(e) => {
                let _ = writeln!(
                    out,
                    " {:<7}{:>5}{:>5}    {:<12} {:>9} {:>9} {:>6} {:>8.2}",
                    r.family,
                    r.m,
                    r.n,
                    r.method,
                    sci2(e.solution_error),
                    sci2(e.residual_error),
                    r.rank,
                    r.time_seconds
                );
            }
            None => {
                let _ = writeln!(
                    out,
                    " {:<7}{:>5}{:>5}    {:<12} --- break-down ---",
                    r.family, r.m, r.n, r.method
                );
            }
        }
    }
    out
}

pub const CSV_HEADER: &str =
    "family,m,n,seed,method,solution_error,residual_error,rank,time_seconds,status";

/// Machine-readable twin of the result table. Error fields are empty for
/// breakdown rows; floats use a fixed 17-significant-digit format so
/// identical runs produce identical bytes (modulo the time column).
pub fn write_csv(rows: &[ResultRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in rows {
        let (se, re) = match &r.errors {
            Some(e) => (
                format!("{:.16e}", e.solution_error),
                format!("{:.16e}", e.residual_error),
            ),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.6e},{}",
            r.family, r.m, r.n, r.seed, r.method, se, re, r.rank, r.time_seconds, r.status
        );
    }
    out
}

/// Median of a small sample (used for the repeated timing measurements).
pub fn median(samples: &mut [f64]) -> f64 {
    assert!(!samples.is_empty());
    samples.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    samples[samples.len() / 2]
}
