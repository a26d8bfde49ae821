//! Suite configuration and the `run` / `verify` drivers.
//!
//! Config files are flat, line-oriented `key = value` text with repeated
//! `[problem]` and `[method]` blocks, so any language can parse them
//! without a dependency:
//!
//! ```text
//! repetitions = 3
//! workers = 1
//! out = results
//!
//! [problem]
//! family = IR500
//! m = 105
//! n = 95
//! seed = 1
//!
//! [method]
//! name = huang6
//! ```
//!
//! A `[problem]` block may instead say `file = instance.txt` to load an
//! archived instance. Problems run in parallel when `workers > 1`; results
//! are collected in config order before formatting, so output files do not
//! depend on the worker count.

use std::fmt::Write as _;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::baselines::{pivoted_qr_least_squares, qr_least_squares, svd_least_squares};
use crate::engine::{implicit_factorization_check, run_abs, AbsParameters, TerminationStatus};
use crate::linalg::{matvec, matvec_transposed, DenseMatrix, Vector, EPS};
use crate::metrics::{
    build_scoreboard, compute_errors, format_result_table, median, write_csv, ErrorPair, ResultRow,
    Scoreboard,
};
use crate::solvers::{default_tol, solve_with, SolveResult, SolveStatus, SolverKind};
use crate::testgen::{
    generate_instance, MatrixFamily, Perturbation, ProblemInstance, TestgenError,
};

/// Environment variable overriding the output directory (output dir only).
pub const OUT_DIR_ENV: &str = "ABSLS_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Testgen(#[from] TestgenError),
    #[error("suite has no problems")]
    NoProblems,
    #[error("suite roster is empty")]
    EmptyRoster,
}

/// A solver or baseline in the roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Abs(SolverKind),
    /// Householder QR without pivoting (DGELS analogue).
    QrHouseholder,
    /// Column-pivoted QR (DGELSX analogue).
    PivotedQr,
    /// One-sided Jacobi SVD (DGELSS analogue).
    SvdJacobi,
}

impl std::fmt::Display for MethodKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MethodKind::Abs(k) => write!(f, "{k}"),
            MethodKind::QrHouseholder => f.write_str("qr"),
            MethodKind::PivotedQr => f.write_str("gqr"),
            MethodKind::SvdJacobi => f.write_str("svd"),
        }
    }
}

impl FromStr for MethodKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "qr" => Ok(MethodKind::QrHouseholder),
            "gqr" => Ok(MethodKind::PivotedQr),
            "svd" => Ok(MethodKind::SvdJacobi),
            other => other.parse::<SolverKind>().map(MethodKind::Abs),
        }
    }
}

/// One problem to generate (or load).
#[derive(Debug, Clone)]
pub enum ProblemSpec {
    Generate {
        family: MatrixFamily,
        m: usize,
        n: usize,
        seed: u64,
        perturbation: Option<Perturbation>,
    },
    Load {
        path: PathBuf,
    },
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub problems: Vec<ProblemSpec>,
    pub methods: Vec<MethodKind>,
    /// Overrides the per-problem default tolerance ε·max(m, n).
    pub tol: Option<f64>,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub repetitions: usize,
    pub seed_offset: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            problems: Vec::new(),
            methods: Vec::new(),
            tol: None,
            out_dir: PathBuf::from("results"),
            workers: 1,
            repetitions: 3,
            seed_offset: 0,
        }
    }
}

/// The built-in desk-scale suite: seven families at three shape ratios
/// (n near m, n = m/2, n well under m/2), 21 problems against the
/// eight-method roster.
pub const DEFAULT_SUITE_FAMILIES: [MatrixFamily; 7] = [
    MatrixFamily::Ir500,
    MatrixFamily::Ir500C,
    MatrixFamily::Rr100,
    MatrixFamily::Idf1,
    MatrixFamily::Idf2,
    MatrixFamily::Idf3,
    MatrixFamily::Ir50,
];

pub const DEFAULT_SUITE_SHAPES: [(usize, usize); 3] = [(105, 95), (140, 70), (200, 40)];

pub const DEFAULT_ROSTER: [MethodKind; 8] = [
    MethodKind::Abs(SolverKind::LsHuangStoredL),
    MethodKind::Abs(SolverKind::ModifiedLsHuangStoredL),
    MethodKind::Abs(SolverKind::LsHuangNoL),
    MethodKind::Abs(SolverKind::ModifiedLsHuangNoL),
    MethodKind::Abs(SolverKind::ImplicitQr),
    MethodKind::QrHouseholder,
    MethodKind::SvdJacobi,
    MethodKind::PivotedQr,
];

pub fn default_suite() -> SuiteConfig {
    let mut problems = Vec::new();
    for family in DEFAULT_SUITE_FAMILIES {
        for (shape_idx, &(m, n)) in DEFAULT_SUITE_SHAPES.iter().enumerate() {
            problems.push(ProblemSpec::Generate {
                family,
                m,
                n,
                seed: shape_idx as u64 + 1,
                perturbation: None,
            });
        }
    }
    SuiteConfig {
        problems,
        methods: DEFAULT_ROSTER.to_vec(),
        ..SuiteConfig::default()
    }
}

/// Renders a config back to the text format (used by `default-config`).
pub fn render_config(config: &SuiteConfig) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# absls suite configuration");
    let _ = writeln!(out, "repetitions = {}", config.repetitions);
    let _ = writeln!(out, "workers = {}", config.workers);
    let _ = writeln!(out, "out = {}", config.out_dir.display());
    if let Some(t) = config.tol {
        let _ = writeln!(out, "tol = {t:e}");
    }
    for p in &config.problems {
        let _ = writeln!(out);
        let _ = writeln!(out, "[problem]");
        match p {
            ProblemSpec::Generate {
                family,
                m,
                n,
                seed,
                perturbation,
            } => {
                let _ = writeln!(out, "family = {family}");
                let _ = writeln!(out, "m = {m}");
                let _ = writeln!(out, "n = {n}");
                let _ = writeln!(out, "seed = {seed}");
                if let Some(pert) = perturbation {
                    let _ = writeln!(out, "perturbation = {pert}");
                }
            }
            ProblemSpec::Load { path } => {
                let _ = writeln!(out, "file = {}", path.display());
            }
        }
    }
    for m in &config.methods {
        let _ = writeln!(out);
        let _ = writeln!(out, "[method]");
        let _ = writeln!(out, "name = {m}");
    }
    out
}

#[derive(PartialEq)]
enum Section {
    Global,
    Problem,
    Method,
}

/// Parses the line-oriented config format; errors carry the line number.
pub fn parse_config(text: &str) -> Result<SuiteConfig, CliError> {
    let mut config = SuiteConfig::default();
    let mut section = Section::Global;
    let mut current_problem: Vec<(usize, String, String)> = Vec::new();

    let err = |line: usize, msg: &str| CliError::Config {
        line,
        msg: msg.to_string(),
    };

    let flush_problem = |fields: &mut Vec<(usize, String, String)>,
                         problems: &mut Vec<ProblemSpec>|
     -> Result<(), CliError> {
        if fields.is_empty() {
            return Ok(());
        }
        let first_line = fields[0].0;
        let find = |k: &str| {
            fields
                .iter()
                .find(|(_, key, _)| key == k)
                .map(|(l, _, v)| (*l, v.clone()))
        };
        if let Some((_, path)) = find("file") {
            problems.push(ProblemSpec::Load {
                path: PathBuf::from(path),
            });
            fields.clear();
            return Ok(());
        }
        let (fl, fam) =
            find("family").ok_or_else(|| err(first_line, "problem needs 'family' or 'file'"))?;
        let family: MatrixFamily = fam
            .parse()
            .map_err(|e: TestgenError| err(fl, &e.to_string()))?;
        let parse_num = |k: &str| -> Result<u64, CliError> {
            let (l, v) = find(k).ok_or_else(|| err(first_line, &format!("problem needs '{k}'")))?;
            v.parse()
                .map_err(|_| err(l, &format!("bad number for '{k}'")))
        };
        let m = parse_num("m")? as usize;
        let n = parse_num("n")? as usize;
        let seed = parse_num("seed")?;
        if m < 2 || n < 1 {
            return Err(err(first_line, "problem needs m >= 2 and n >= 1"));
        }
        let perturbation = match find("perturbation") {
            None => None,
            Some((l, v)) => {
                let parts: Vec<&str> = v.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(err(l, "perturbation needs 4 integers: i1 i2 i3 i4"));
                }
                let nums: Result<Vec<u64>, _> = parts.iter().map(|p| p.parse()).collect();
                let nums = nums.map_err(|_| err(l, "perturbation entries must be integers"))?;
                Some(Perturbation {
                    i1: nums[0] as usize,
                    i2: nums[1] as usize,
                    i3: nums[2] as usize,
                    i4: nums[3] as u32,
                })
            }
        };
        problems.push(ProblemSpec::Generate {
            family,
            m,
            n,
            seed,
            perturbation,
        });
        fields.clear();
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "[problem]" => {
                flush_problem(&mut current_problem, &mut config.problems)?;
                section = Section::Problem;
                continue;
            }
            "[method]" => {
                flush_problem(&mut current_problem, &mut config.problems)?;
                section = Section::Method;
                continue;
            }
            _ => {}
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(err(
                lineno,
                &format!("expected 'key = value', got '{line}'"),
            ));
        };
        let (key, value) = (key.trim(), value.trim());
        match section {
            Section::Global => match key {
                "tol" => {
                    config.tol = Some(
                        value
                            .parse()
                            .map_err(|_| err(lineno, "bad number for 'tol'"))?,
                    )
                }
                "workers" => {
                    config.workers = value
                        .parse()
                        .map_err(|_| err(lineno, "bad number for 'workers'"))?
                }
                "repetitions" => {
                    config.repetitions = value
                        .parse()
                        .map_err(|_| err(lineno, "bad number for 'repetitions'"))?
                }
                "seed_offset" => {
                    config.seed_offset = value
                        .parse()
                        .map_err(|_| err(lineno, "bad number for 'seed_offset'"))?
                }
                "out" => config.out_dir = PathBuf::from(value),
                other => return Err(err(lineno, &format!("unknown global key '{other}'"))),
            },
            Section::Problem => current_problem.push((lineno, key.to_string(), value.to_string())),
            Section::Method => match key {
                "name" => {
                    let kind: MethodKind = value.parse().map_err(|e: String| err(lineno, &e))?;
                    config.methods.push(kind);
                }
                other => return Err(err(lineno, &format!("unknown method key '{other}'"))),
            },
        }
    }
    flush_problem(&mut current_problem, &mut config.problems)?;

    if config.problems.is_empty() {
        return Err(CliError::NoProblems);
    }
    if config.methods.is_empty() {
        return Err(CliError::EmptyRoster);
    }
    if config.workers == 0 {
        config.workers = 1;
    }
    if config.repetitions == 0 {
        config.repetitions = 1;
    }
    Ok(config)
}

fn load_problem(spec: &ProblemSpec, seed_offset: u64) -> Result<ProblemInstance, CliError> {
    match spec {
        ProblemSpec::Generate {
            family,
            m,
            n,
            seed,
            perturbation,
        } => Ok(generate_instance(
            *family,
            *m,
            *n,
            seed + seed_offset,
            *perturbation,
        )?),
        ProblemSpec::Load { path } => {
            let file = fs::File::open(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            Ok(ProblemInstance::read_from(
                std::io::BufReader::new(file),
                &path.display().to_string(),
            )?)
        }
    }
}

/// Runs one method on one instance.
pub fn run_method(
    method: MethodKind,
    instance: &ProblemInstance,
    tol_override: Option<f64>,
) -> Result<SolveResult, String> {
    let tol = tol_override.unwrap_or_else(|| default_tol(instance.m, instance.n));
    let out = match method {
        MethodKind::Abs(kind) => solve_with(kind, &instance.a, &instance.b, tol),
        MethodKind::QrHouseholder => {
            return qr_least_squares(&instance.a, &instance.b).map_err(|e| e.to_string())
        }
        MethodKind::PivotedQr => {
            return pivoted_qr_least_squares(&instance.a, &instance.b, tol)
                .map_err(|e| e.to_string())
        }
        MethodKind::SvdJacobi => {
            return svd_least_squares(&instance.a, &instance.b, tol).map_err(|e| e.to_string())
        }
    };
    out.map_err(|e| e.to_string())
}

/// Everything a suite run produces, before any files are written.
pub struct SuiteOutput {
    pub rows: Vec<ResultRow>,
    pub scoreboard_solution: Option<Scoreboard>,
    pub scoreboard_residual: Option<Scoreboard>,
    pub warnings: Vec<String>,
    /// Count of panicking solver invocations (each is also a warning).
    pub panics: usize,
    /// Condition estimates per problem, from the SVD baseline when present.
    pub condition_estimates: Vec<Option<f64>>,
}

/// Executes the full grid (problems × methods) without touching the
/// filesystem. Problems run in parallel across `workers`; results are
/// ordered by config position.
pub fn execute_suite(config: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    if config.problems.is_empty() {
        return Err(CliError::NoProblems);
    }
    if config.methods.is_empty() {
        return Err(CliError::EmptyRoster);
    }

    struct ProblemOutcome {
        rows: Vec<ResultRow>,
        errors_by_method: Vec<Option<ErrorPair>>,
        panics: usize,
        warnings: Vec<String>,
        cond: Option<f64>,
    }

    let instances: Vec<ProblemInstance> = config
        .problems
        .iter()
        .map(|spec| load_problem(spec, config.seed_offset))
        .collect::<Result<_, _>>()?;

    let n_problems = instances.len();
    let outcomes: Mutex<Vec<Option<ProblemOutcome>>> =
        Mutex::new((0..n_problems).map(|_| None).collect());
    let next: AtomicUsize = AtomicUsize::new(0);
    let workers = config.workers.max(1).min(n_problems);

    let run_problem = |pi: usize| -> ProblemOutcome {
        let instance = &instances[pi];
        let mut rows = Vec::new();
        let mut errors_by_method = Vec::new();
        let mut panics = 0usize;
        let mut warnings = Vec::new();
        let mut cond = None;
        if instance.degenerate_warning {
            warnings.push(format!(
                "problem {} ({} {}x{} seed {}): redefined first row left a zero column",
                pi + 1,
                instance.family,
                instance.m,
                instance.n,
                instance.seed
            ));
        }
        for &method in &config.methods {
            let mut times = Vec::with_capacity(config.repetitions);
            let mut first: Option<Result<SolveResult, String>> = None;
            for _ in 0..config.repetitions {
                let outcome = catch_unwind(AssertUnwindSafe(|| {
                    run_method(method, instance, config.tol)
                }));
                match outcome {
                    Ok(res) => {
                        if let Ok(r) = &res {
                            times.push(r.wall_time);
                        }
                        if first.is_none() {
                            first = Some(res);
                        }
                    }
                    Err(_) => {
                        panics += 1;
                        warnings.push(format!(
                            "solver {method} panicked on problem {} ({} {}x{})",
                            pi + 1,
                            instance.family,
                            instance.m,
                            instance.n
                        ));
                        break;
                    }
                }
            }
            match first {
                Some(Ok(result)) => {
                    let time = if times.is_empty() {
                        result.wall_time
                    } else {
                        median(&mut times)
                    };
                    if method == MethodKind::SvdJacobi {
                        // Condition estimate sigma_1 / sigma_rank for the table.
                        if let Ok(svd) = crate::baselines::SvdFactorization::decompose(&instance.a)
                        {
                            let tol = config
                                .tol
                                .unwrap_or_else(|| default_tol(instance.m, instance.n));
                            cond = Some(svd.condition_estimate(tol));
                        }
                    }
                    let errors = compute_errors(instance, &result).ok();
                    errors_by_method.push(errors);
                    rows.push(ResultRow {
                        family: instance.family.to_string(),
                        m: instance.m,
                        n: instance.n,
                        seed: instance.seed,
                        method: method.to_string(),
                        status: result.status,
                        errors,
                        rank: result.rank_detected,
                        time_seconds: time,
                    });
                }
                Some(Err(msg)) => {
                    warnings.push(format!(
                        "solver {method} failed on problem {}: {msg}",
                        pi + 1
                    ));
                    errors_by_method.push(None);
                }
                None => {
                    errors_by_method.push(None);
                }
            }
        }
        ProblemOutcome {
            rows,
            errors_by_method,
            panics,
            warnings,
            cond,
        }
    };

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let pi = next.fetch_add(1, Ordering::SeqCst);
                if pi >= n_problems {
                    break;
                }
                let outcome = run_problem(pi);
                outcomes.lock().expect("worker poisoned the results")[pi] = Some(outcome);
            });
        }
    });

    let outcomes = outcomes.into_inner().expect("workers finished");
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut panics = 0;
    let mut solution_table: Vec<Vec<Option<f64>>> = Vec::new();
    let mut residual_table: Vec<Vec<Option<f64>>> = Vec::new();
    let mut condition_estimates = Vec::new();
    for outcome in outcomes.into_iter().flatten() {
        rows.extend(outcome.rows);
        warnings.extend(outcome.warnings);
        panics += outcome.panics;
        solution_table.push(
            outcome
                .errors_by_method
                .iter()
                .map(|e| e.map(|p| p.solution_error))
                .collect(),
        );
        residual_table.push(
            outcome
                .errors_by_method
                .iter()
                .map(|e| e.map(|p| p.residual_error))
                .collect(),
        );
        condition_estimates.push(outcome.cond);
    }

    let method_names: Vec<String> = config.methods.iter().map(|m| m.to_string()).collect();
    let (scoreboard_solution, scoreboard_residual) = if config.methods.len() >= 2 {
        (
            build_scoreboard(&solution_table, &method_names, 0.01).ok(),
            build_scoreboard(&residual_table, &method_names, 0.01).ok(),
        )
    } else {
        warnings.push("scoreboards need at least 2 methods; skipped".to_string());
        (None, None)
    };

    Ok(SuiteOutput {
        rows,
        scoreboard_solution,
        scoreboard_residual,
        warnings,
        panics,
        condition_estimates,
    })
}

/// Resolves the output directory, honoring the env override.
pub fn resolve_out_dir(config: &SuiteConfig) -> PathBuf {
    match std::env::var(OUT_DIR_ENV) {
        Ok(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => config.out_dir.clone(),
    }
}

/// Runs the suite and writes `results.txt`, `results.csv`, and the two
/// scoreboard files into the output directory.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutput, CliError> {
    let output = execute_suite(config)?;
    let dir = resolve_out_dir(config);
    fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let write = |name: &str, contents: &str| -> Result<(), CliError> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })
    };
    write("results.txt", &format_result_table(&output.rows))?;
    write("results.csv", &write_csv(&output.rows))?;
    if let Some(sb) = &output.scoreboard_solution {
        write(
            "scoreboard_solution.txt",
            &sb.format_table("solution error"),
        )?;
    }
    if let Some(sb) = &output.scoreboard_residual {
        write(
            "scoreboard_residual.txt",
            &sb.format_table("residual error"),
        )?;
    }
    Ok(output)
}

/// One verification line: name, pass/fail, detail.
pub struct VerifyLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

pub struct VerifyReport {
    pub lines: Vec<VerifyLine>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let _ = writeln!(
                out,
                "[{}] {} {}",
                if l.passed { "PASS" } else { "FAIL" },
                l.name,
                l.detail
            );
        }
        let _ = writeln!(
            out,
            "verify: {}/{} checks passed",
            self.lines.iter().filter(|l| l.passed).count(),
            self.lines.len()
        );
        out
    }
}

/// Families whose instances are well-conditioned enough for the solver
/// cross-checks and normal-equation certificates.
fn well_conditioned(family: MatrixFamily) -> bool {
    matches!(family, MatrixFamily::Ir500 | MatrixFamily::Rr100)
}

/// Runs the module invariants on the configured suite. Breakdown of the
/// implicit QR on IDF2 is reported as expected, not a failure.
pub fn verify(config: &SuiteConfig) -> Result<VerifyReport, CliError> {
    let mut lines = Vec::new();
    let mut push = |name: String, passed: bool, detail: String| {
        lines.push(VerifyLine {
            name,
            passed,
            detail,
        });
    };

    for (pi, spec) in config.problems.iter().enumerate() {
        let instance = load_problem(spec, config.seed_offset)?;
        let label = format!(
            "p{} {} {}x{} seed {}",
            pi + 1,
            instance.family,
            instance.m,
            instance.n,
            instance.seed
        );
        let tol = config
            .tol
            .unwrap_or_else(|| default_tol(instance.m, instance.n));
        let a = &instance.a;
        let b = &instance.b;
        let a_fro = a.frobenius_norm();

        // Construction certificate.
        let atb = matvec_transposed(a, &instance.b_tilde).expect("instance shape");
        let cert = atb.norm_inf() / (a_fro * instance.b_tilde.norm2());
        let bound = 100.0 * EPS * (instance.m as f64).sqrt();
        push(
            format!("{label}: construction certificate"),
            cert <= bound && instance.b_tilde.norm2() > 0.0,
            format!("|A'b~|inf scaled = {cert:.3e} (bound {bound:.3e})"),
        );

        if well_conditioned(instance.family) {
            // LS solver agreement and normal-equation certificates.
            let results: Vec<(String, Option<SolveResult>)> = [
                MethodKind::Abs(SolverKind::ImplicitQr),
                MethodKind::Abs(SolverKind::LsHuangStoredL),
                MethodKind::Abs(SolverKind::LsHuangNoL),
                MethodKind::Abs(SolverKind::ModifiedLsHuangStoredL),
                MethodKind::Abs(SolverKind::ModifiedLsHuangNoL),
                MethodKind::QrHouseholder,
                MethodKind::PivotedQr,
                MethodKind::SvdJacobi,
            ]
            .iter()
            .map(|&mk| (mk.to_string(), run_method(mk, &instance, config.tol).ok()))
            .collect();

            for (name, res) in &results {
                let Some(res) = res else {
                    push(format!("{label}: {name} solve"), false, "failed".into());
                    continue;
                };
                let resid = matvec(a, &res.x).expect("shape").sub(b);
                let ne = matvec_transposed(a, &resid).expect("shape").norm2();
                let ne_bound = 1.0e4 * EPS * a_fro * (a_fro * res.x.norm2() + b.norm2());
                push(
                    format!("{label}: {name} normal-equation certificate"),
                    ne <= ne_bound,
                    format!("|A'(Ax-b)| = {ne:.3e} (bound {ne_bound:.3e})"),
                );
            }
            // Cross-method agreement to 1e-6 relative.
            let xs: Vec<&SolveResult> = results.iter().filter_map(|(_, r)| r.as_ref()).collect();
            if xs.len() >= 2 {
                let mut worst: f64 = 0.0;
                for w in xs.windows(2) {
                    let d = w[0].x.sub(&w[1].x).norm2() / w[0].x.norm2().max(1.0);
                    worst = worst.max(d);
                }
                push(
                    format!("{label}: LS solvers agree"),
                    worst <= 1e-6,
                    format!("max pairwise relative difference {worst:.3e}"),
                );
            }
            // Stored-L route vs reverse recurrence at 1e-12.
            let r4 = run_method(
                MethodKind::Abs(SolverKind::LsHuangStoredL),
                &instance,
                config.tol,
            );
            let r5 = run_method(
                MethodKind::Abs(SolverKind::LsHuangNoL),
                &instance,
                config.tol,
            );
            if let (Ok(r4), Ok(r5)) = (r4, r5) {
                let d = r4.x.sub(&r5.x).norm2() / r4.x.norm2().max(1.0);
                push(
                    format!("{label}: huang6 = huang7"),
                    d <= 1e-12,
                    format!("relative difference {d:.3e}"),
                );
            }
            // Engine invariants on a square compatible subproblem.
            verify_engine_invariants(&instance, tol, &mut push);
        }

        if instance.family == MatrixFamily::Idf2 {
            let r = run_method(
                MethodKind::Abs(SolverKind::ImplicitQr),
                &instance,
                config.tol,
            );
            match r {
                Ok(res) => {
                    let broke = res.status == SolveStatus::Breakdown;
                    push(
                        format!("{label}: implicit QR breakdown expected on IDF2"),
                        true,
                        if broke {
                            format!("breakdown at step {} (expected)", res.steps_taken)
                        } else {
                            format!("completed with rank {} (tolerated)", res.rank_detected)
                        },
                    );
                }
                Err(e) => push(
                    format!("{label}: implicit QR on IDF2"),
                    false,
                    e.to_string(),
                ),
            }
        }
    }

    Ok(VerifyReport { lines })
}

/// Engine-level invariants (projector quality, null-space annihilation,
/// implicit factorization, v-orthogonality, representation equivalence) on
/// a compatible square system derived from the instance.
fn verify_engine_invariants(
    instance: &ProblemInstance,
    tol: f64,
    push: &mut impl FnMut(String, bool, String),
) {
    let label = format!(
        "p {} {}x{} seed {}",
        instance.family, instance.m, instance.n, instance.seed
    );
    // Square compatible subproblem: the leading block of the instance made
    // diagonally dominant, so the engine invariants run on a genuinely
    // well-conditioned system regardless of the family's entry scale.
    let k = instance.n.min(24);
    let mut a = DenseMatrix::zeros(k, k);
    for i in 1..=k {
        let row_sum: f64 = (1..=k).map(|j| instance.a.get(i, j).abs()).sum();
        for j in 1..=k {
            let v = instance.a.get(i, j) + if i == j { row_sum + 1.0 } else { 0.0 };
            a.set(i, j, v);
        }
    }
    let x_true = Vector::new((1..=k).map(|i| ((i % 7) as f64) - 3.0).collect());
    let b = match matvec(&a, &x_true) {
        Ok(v) => v,
        Err(_) => return,
    };
    let a_fro = a.frobenius_norm();

    // Huang with history, explicit representation.
    let runner = AbsParameters::huang(k).runner().with_history();
    let steps = k / 2 + 1;
    let run = run_abs(&a, &b, &runner, tol, steps);
    let Ok((state, _)) = run else {
        push(
            format!("{label}: engine Huang run"),
            false,
            "engine error".into(),
        );
        return;
    };
    let h = state.abaffian.to_dense(k);
    // Symmetry and idempotence.
    let mut sym: f64 = 0.0;
    let mut idem: f64 = 0.0;
    let h2 = h.matmul(&h).expect("square");
    for i in 1..=k {
        for j in 1..=k {
            sym = sym.max((h.get(i, j) - h.get(j, i)).abs());
            idem = idem.max((h2.get(i, j) - h.get(i, j)).abs());
        }
    }
    push(
        format!("{label}: Huang H symmetric"),
        sym <= 1e-8,
        format!("max asymmetry {sym:.3e}"),
    );
    push(
        format!("{label}: Huang H idempotent"),
        idem <= 1e-8,
        format!("max |H^2 - H| {idem:.3e}"),
    );
    // Null-space annihilation.
    if let Some(hist) = &state.history {
        let mut vmax: f64 = 0.0;
        let mut wmax: f64 = 0.0;
        let mut vscale: f64 = 0.0;
        let mut wscale: f64 = 0.0;
        for (v, w) in hist.v.iter().zip(&hist.w) {
            let atv = matvec_transposed(&a, v).expect("shape");
            vmax = vmax.max(matvec(&h, &atv).expect("shape").norm_inf());
            wmax = wmax.max(matvec_transposed(&h, w).expect("shape").norm_inf());
            vscale = vscale.max(v.norm_inf());
            wscale = wscale.max(w.norm_inf());
        }
        let v_ok = vmax <= 1e-10 * a_fro * vscale.max(1.0);
        let w_ok = wmax <= 1e-10 * wscale.max(1.0) * a_fro;
        push(
            format!("{label}: H A'V annihilation"),
            v_ok,
            format!("max |H A'v| = {vmax:.3e}"),
        );
        push(
            format!("{label}: H'W annihilation"),
            w_ok,
            format!("max |H'w| = {wmax:.3e}"),
        );
    }
    // Implicit factorization V'AP strictly upper.
    if let Ok(upper) = implicit_factorization_check(&state, &a) {
        push(
            format!("{label}: V'AP strictly-upper residue"),
            upper <= 1e-9 * a_fro * a_fro,
            format!("max strict-upper {upper:.3e}"),
        );
    }
    // Representation equivalence, explicit vs projection Abaffian.
    let (se, _) = run_abs(&a, &b, &AbsParameters::huang(k).runner(), tol, k).expect("engine run");
    let (sp, _) = run_abs(
        &a,
        &b,
        &AbsParameters::huang(k).with_projection_rep(),
        tol,
        k,
    )
    .expect("engine run");
    let rep_diff = se.x.sub(&sp.x).norm2() / se.x.norm2().max(1.0);
    push(
        format!("{label}: huang explicit = projection"),
        rep_diff <= 1e-10,
        format!("relative difference {rep_diff:.3e}"),
    );
    // Implicit QR v-orthogonality.
    let runner = AbsParameters::implicit_qr(k).runner().with_history();
    if let Ok((state, TerminationStatus::Completed | TerminationStatus::Solved)) =
        run_abs(&a, &b, &runner, tol, k)
    {
        if let Some(hist) = &state.history {
            let mut worst: f64 = 0.0;
            for i in 0..hist.v.len() {
                for j in 0..i {
                    let c =
                        hist.v[i].dot(&hist.v[j]).abs() / (hist.v[i].norm2() * hist.v[j].norm2());
                    worst = worst.max(c);
                }
            }
            push(
                format!("{label}: implicit QR v-orthogonality"),
                worst <= 1e-8,
                format!("max |cos| = {worst:.3e}"),
            );
        }
    }
}
