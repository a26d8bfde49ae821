//! Deterministic generation of the ill-conditioned test families, their
//! near-dependency perturbations, and incompatible least-squares problems.
//!
//! Everything here is reproducible bit-for-bit from `(family, m, n, seed,
//! perturbation)`: the generator is pinned to the MINSTD Lehmer sequence and
//! fill orders are fixed (random matrices fill column-major, sums run over
//! ascending row index), so re-implementations in other languages can diff
//! instances exactly.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::linalg::{matvec, DenseMatrix, Vector};

#[derive(Debug, Error, PartialEq)]
pub enum TestgenError {
    #[error("seed {0} out of range [1, 2^31-2]")]
    InvalidSeed(u64),
    #[error("perturbation index out of range: {0}")]
    PerturbationIndex(String),
    #[error("perturbation requires i1 != i2")]
    EqualIndices,
    #[error("problem construction requires m >= 2, got m = {0}")]
    TooFewRows(usize),
    #[error("unknown matrix family '{0}'")]
    UnknownFamily(String),
    #[error("instance file {path}: {reason}")]
    ParseInstance { path: String, reason: String },
}

const MINSTD_MODULUS: u64 = (1 << 31) - 1; // 2^31 - 1
const MINSTD_MULTIPLIER: u64 = 48271;

/// MINSTD Lehmer generator: x_{k+1} = 48271 · x_k mod (2^31 − 1).
///
/// Identical seeds produce identical streams on every platform; this is the
/// contract that makes generated instances diffable across languages.
#[derive(Debug, Clone)]
pub struct Minstd {
    state: u64,
}

impl Minstd {
    pub fn new(seed: u64) -> Result<Self, TestgenError> {
        if seed == 0 || seed > MINSTD_MODULUS - 1 {
            return Err(TestgenError::InvalidSeed(seed));
        }
        Ok(Self { state: seed })
    }

    /// Advances the state and returns it; values lie in [1, 2^31 − 2].
    #[inline]
    pub fn next_state(&mut self) -> u64 {
        self.state = (MINSTD_MULTIPLIER * self.state) % MINSTD_MODULUS;
        self.state
    }

    /// Uniform integer in [lo, hi], derived as lo + (x_k mod (hi−lo+1)).
    #[inline]
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo + 1) as u64;
        lo + (self.next_state() % span) as i64
    }

    /// Uniform real in [lo, hi], derived as lo + (hi−lo)·(x_k−1)/(2^31−3).
    #[inline]
    pub fn real_in(&mut self, lo: f64, hi: f64) -> f64 {
        let x = self.next_state();
        lo + (hi - lo) * ((x - 1) as f64) / ((MINSTD_MODULUS - 2) as f64)
    }
}

/// The matrix families of the experiment suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MatrixFamily {
    /// Random integers in [−500, 500].
    Ir500,
    /// IR500 with two nearly dependent rows.
    Ir500R,
    /// IR500 with two nearly dependent columns.
    Ir500C,
    /// Random reals in [−100, 100].
    Rr100,
    /// a_ij = |i − j| (Micchelli-Fiedler matrix).
    Idf1,
    /// a_ij = |i − j|², exactly rank 3 for m, n ≥ 3.
    Idf2,
    /// a_ij = |i + j − (m+n)| / 2, exactly rank 2.
    Idf3,
    /// Random integers in [−50, 50].
    Ir50,
}

impl MatrixFamily {
    pub const ALL: [MatrixFamily; 8] = [
        MatrixFamily::Ir500,
        MatrixFamily::Ir500R,
        MatrixFamily::Ir500C,
        MatrixFamily::Rr100,
        MatrixFamily::Idf1,
        MatrixFamily::Idf2,
        MatrixFamily::Idf3,
        MatrixFamily::Ir50,
    ];

    /// Integer families draw integer solution/RHS entries.
    pub fn integer_elements(self) -> bool {
        !matches!(self, MatrixFamily::Rr100)
    }

    /// Families whose definition includes a near-dependency perturbation.
    pub fn perturbed(self) -> bool {
        matches!(self, MatrixFamily::Ir500R | MatrixFamily::Ir500C)
    }
}

impl fmt::Display for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MatrixFamily::Ir500 => "IR500",
            MatrixFamily::Ir500R => "IR500R",
            MatrixFamily::Ir500C => "IR500C",
            MatrixFamily::Rr100 => "RR100",
            MatrixFamily::Idf1 => "IDF1",
            MatrixFamily::Idf2 => "IDF2",
            MatrixFamily::Idf3 => "IDF3",
            MatrixFamily::Ir50 => "IR50",
        };
        f.write_str(s)
    }
}

impl FromStr for MatrixFamily {
    type Err = TestgenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "IR500" => Ok(MatrixFamily::Ir500),
            "IR500R" => Ok(MatrixFamily::Ir500R),
            "IR500C" => Ok(MatrixFamily::Ir500C),
            "RR100" => Ok(MatrixFamily::Rr100),
            "IDF1" => Ok(MatrixFamily::Idf1),
            "IDF2" => Ok(MatrixFamily::Idf2),
            "IDF3" => Ok(MatrixFamily::Idf3),
            "IR50" => Ok(MatrixFamily::Ir50),
            other => Err(TestgenError::UnknownFamily(other.to_string())),
        }
    }
}

/// Near-dependency perturbation parameters (i1, i2, i3, i4).
///
/// Rows: row i1 is copied into row i2, a[i1,i3] := 0, a[i2,i3] := 2^(−i4).
/// Columns: the transposed analogue.
///
/// The default (2, 3, 2, 3) keeps every perturbed entry away from the first
/// row, which the right-hand-side construction redefines — a perturbation
/// touching row 1 would be overwritten there, leaving the copied pair
/// exactly (not nearly) dependent. At i4 = 3 the surviving residual clears
/// every solver's pivot threshold, so the whole roster faces a resolvable
/// but badly conditioned pair, the regime the R/C families exist to probe;
/// larger exponents degenerate toward exact duplication at double
/// precision and flip rank detection and breakdown behavior solver by
/// solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Perturbation {
    pub i1: usize,
    pub i2: usize,
    pub i3: usize,
    pub i4: u32,
}

impl Default for Perturbation {
    fn default() -> Self {
        Self {
            i1: 2,
            i2: 3,
            i3: 2,
            i4: 3,
        }
    }
}

impl fmt::Display for Perturbation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.i1, self.i2, self.i3, self.i4)
    }
}

/// Generates the base matrix of a family. Random families fill column by
/// column (j outer, i inner); the R/C near-dependency perturbations are
/// applied separately via [`perturb_rows`] / [`perturb_cols`].
pub fn generate_matrix(family: MatrixFamily, m: usize, n: usize, rng: &mut Minstd) -> DenseMatrix {
    assert!(m >= 1 && n >= 1, "dimensions must be at least 1");
    let mut a = DenseMatrix::zeros(m, n);
    match family {
        MatrixFamily::Ir500 | MatrixFamily::Ir500R | MatrixFamily::Ir500C => {
            fill_random_int(&mut a, rng, -500, 500)
        }
        MatrixFamily::Ir50 => fill_random_int(&mut a, rng, -50, 50),
        MatrixFamily::Rr100 => fill_random_real(&mut a, rng, -100.0, 100.0),
        MatrixFamily::Idf1 => fill_formula(&mut a, |i, j| (i as f64 - j as f64).abs()),
        MatrixFamily::Idf2 => fill_formula(&mut a, |i, j| {
            let d = i as f64 - j as f64;
            d * d
        }),
        MatrixFamily::Idf3 => {
            let c = (m + n) as f64;
            fill_formula(&mut a, |i, j| ((i + j) as f64 - c).abs() / 2.0)
        }
    }
    a
}

fn fill_random_int(a: &mut DenseMatrix, rng: &mut Minstd, lo: i64, hi: i64) {
    for j in 1..=a.cols() {
        for v in a.col_mut(j) {
            *v = rng.int_in(lo, hi) as f64;
        }
    }
}

fn fill_random_real(a: &mut DenseMatrix, rng: &mut Minstd, lo: f64, hi: f64) {
    for j in 1..=a.cols() {
        for v in a.col_mut(j) {
            *v = rng.real_in(lo, hi);
        }
    }
}

fn fill_formula(a: &mut DenseMatrix, f: impl Fn(usize, usize) -> f64) {
    for j in 1..=a.cols() {
        let rows = a.rows();
        for (idx, v) in a.col_mut(j).iter_mut().enumerate() {
            *v = f(idx + 1, j);
        }
        debug_assert!(rows >= 1);
    }
}

/// Copies row i1 into row i2, then sets a[i1,i3] := 0 and a[i2,i3] := 2^(−i4).
pub fn perturb_rows(
    a: &DenseMatrix,
    i1: usize,
    i2: usize,
    i3: usize,
    i4: u32,
) -> Result<DenseMatrix, TestgenError> {
    if i1 == i2 {
        return Err(TestgenError::EqualIndices);
    }
    if i1 < 1 || i1 > a.rows() || i2 < 1 || i2 > a.rows() {
        return Err(TestgenError::PerturbationIndex(format!(
            "row indices ({i1}, {i2}) for {} rows",
            a.rows()
        )));
    }
    if i3 < 1 || i3 > a.cols() {
        return Err(TestgenError::PerturbationIndex(format!(
            "column index {i3} for {} cols",
            a.cols()
        )));
    }
    let mut out = a.clone();
    for j in 1..=a.cols() {
        out.set(i2, j, a.get(i1, j));
    }
    out.set(i1, i3, 0.0);
    out.set(i2, i3, 2.0f64.powi(-(i4 as i32)));
    Ok(out)
}

/// Column analogue: copies column i1 into column i2, then sets
/// a[i3,i1] := 0 and a[i3,i2] := 2^(−i4).
pub fn perturb_cols(
    a: &DenseMatrix,
    i1: usize,
    i2: usize,
    i3: usize,
    i4: u32,
) -> Result<DenseMatrix, TestgenError> {
    if i1 == i2 {
        return Err(TestgenError::EqualIndices);
    }
    if i1 < 1 || i1 > a.cols() || i2 < 1 || i2 > a.cols() {
        return Err(TestgenError::PerturbationIndex(format!(
            "column indices ({i1}, {i2}) for {} cols",
            a.cols()
        )));
    }
    if i3 < 1 || i3 > a.rows() {
        return Err(TestgenError::PerturbationIndex(format!(
            "row index {i3} for {} rows",
            a.rows()
        )));
    }
    let mut out = a.clone();
    for i in 1..=a.rows() {
        out.set(i, i2, a.get(i, i1));
    }
    out.set(i3, i1, 0.0);
    out.set(i3, i2, 2.0f64.powi(-(i4 as i32)));
    Ok(out)
}

/// A generated least-squares problem with known solution x* and
/// incompatibility witness b̃ (b = b̃ + A·x*, Aᵀb̃ = 0 by construction).
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: DenseMatrix,
    pub b: Vector,
    pub x_star: Vector,
    pub b_tilde: Vector,
    pub family: MatrixFamily,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
    pub perturbation: Option<Perturbation>,
    /// Set when the redefined first row leaves some column identically zero.
    pub degenerate_warning: bool,
}

/// Builds the incompatible least-squares problem on top of a family matrix.
///
/// Draws b̃ (m entries) then x* (n entries) uniformly in [−10, 10], integer
/// or real per `integer_solution`; sets b̃₁ := −1; redefines the first row of
/// A as a[1,j] := Σ_{i=2..m} a[i,j]·b̃_i (ascending i) so that Aᵀb̃ = 0; then
/// b := b̃ + A·x*.
pub fn build_ls_problem(
    a: &DenseMatrix,
    rng: &mut Minstd,
    integer_solution: bool,
) -> Result<(DenseMatrix, Vector, Vector, Vector, bool), TestgenError> {
    let m = a.rows();
    let n = a.cols();
    if m < 2 {
        return Err(TestgenError::TooFewRows(m));
    }
    let draw = |rng: &mut Minstd| -> f64 {
        if integer_solution {
            rng.int_in(-10, 10) as f64
        } else {
            rng.real_in(-10.0, 10.0)
        }
    };
    let mut b_tilde = Vector::zeros(m);
    for i in 1..=m {
        b_tilde.set(i, draw(rng));
    }
    b_tilde.set(1, -1.0);

    let mut modified = a.clone();
    let mut degenerate = false;
    for j in 1..=n {
        let col = a.col(j);
        let mut sum = 0.0;
        for i in 2..=m {
            sum += col[i - 1] * b_tilde.get(i);
        }
        modified.set(1, j, sum);
        if modified.col(j).iter().all(|&v| v == 0.0) {
            degenerate = true;
        }
    }

    let mut x_star = Vector::zeros(n);
    for j in 1..=n {
        x_star.set(j, draw(rng));
    }

    let mut b = matvec(&modified, &x_star).expect("dimensions agree by construction");
    b.axpy(1.0, &b_tilde);
    // b = b_tilde + A x*, assembled as A·x* then += b_tilde for clarity:
    // addition is commutative per component, result identical either way.
    Ok((modified, b, x_star, b_tilde, degenerate))
}

/// Generates the complete instance for a problem specification.
pub fn generate_instance(
    family: MatrixFamily,
    m: usize,
    n: usize,
    seed: u64,
    perturbation: Option<Perturbation>,
) -> Result<ProblemInstance, TestgenError> {
    let mut rng = Minstd::new(seed)?;
    let base = generate_matrix(family, m, n, &mut rng);
    let perturbed = match family {
        MatrixFamily::Ir500R => {
            let p = perturbation.unwrap_or_default();
            perturb_rows(&base, p.i1, p.i2, p.i3, p.i4)?
        }
        MatrixFamily::Ir500C => {
            let p = perturbation.unwrap_or_default();
            perturb_cols(&base, p.i1, p.i2, p.i3, p.i4)?
        }
        _ => base,
    };
    let (a, b, x_star, b_tilde, degenerate_warning) =
        build_ls_problem(&perturbed, &mut rng, family.integer_elements())?;
    Ok(ProblemInstance {
        a,
        b,
        x_star,
        b_tilde,
        family,
        m,
        n,
        seed,
        perturbation: if family.perturbed() {
            Some(perturbation.unwrap_or_default())
        } else {
            None
        },
        degenerate_warning,
    })
}

impl ProblemInstance {
    /// Writes the archival text format: header, then A row-major with 17
    /// significant digits, then b, x*, b̃.
    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "# absls problem instance v1")?;
        writeln!(w, "family = {}", self.family)?;
        writeln!(w, "m = {}", self.m)?;
        writeln!(w, "n = {}", self.n)?;
        writeln!(w, "seed = {}", self.seed)?;
        if let Some(p) = self.perturbation {
            writeln!(w, "perturbation = {p}")?;
        }
        writeln!(w, "A =")?;
        for i in 1..=self.m {
            let row: Vec<String> = (1..=self.n)
                .map(|j| format!("{:.16e}", self.a.get(i, j)))
                .collect();
            writeln!(w, "{}", row.join(" "))?;
        }
        write_vector(w, "b", &self.b)?;
        write_vector(w, "x_star", &self.x_star)?;
        write_vector(w, "b_tilde", &self.b_tilde)?;
        Ok(())
    }

    /// Parses the archival text format; errors carry `path` for reporting.
    pub fn read_from(r: impl BufRead, path: &str) -> Result<Self, TestgenError> {
        let fail = |reason: &str| TestgenError::ParseInstance {
            path: path.to_string(),
            reason: reason.to_string(),
        };
        let mut lines = r.lines();
        let mut header = std::collections::HashMap::new();
        let mut perturbation = None;
        loop {
            let line = lines
                .next()
                .ok_or_else(|| fail("unexpected end of file in header"))?
                .map_err(|e| fail(&e.to_string()))?;
            let line = line.trim().to_string();
            if line.starts_with('#') || line.is_empty() {
                continue;
            }
            if line == "A =" {
                break;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(&format!("malformed header line '{line}'")))?;
            let (key, value) = (key.trim(), value.trim());
            if key == "perturbation" {
                let parts: Vec<&str> = value.split_whitespace().collect();
                if parts.len() != 4 {
                    return Err(fail("perturbation needs 4 integers"));
                }
                let nums: Result<Vec<u64>, _> = parts.iter().map(|p| p.parse()).collect();
                let nums = nums.map_err(|_| fail("perturbation not numeric"))?;
                perturbation = Some(Perturbation {
                    i1: nums[0] as usize,
                    i2: nums[1] as usize,
                    i3: nums[2] as usize,
                    i4: nums[3] as u32,
                });
            } else {
                header.insert(key.to_string(), value.to_string());
            }
        }
        let get = |k: &str| {
            header
                .get(k)
                .cloned()
                .ok_or_else(|| fail(&format!("missing header key '{k}'")))
        };
        let family: MatrixFamily = get("family")?.parse()?;
        let m: usize = get("m")?.parse().map_err(|_| fail("bad m"))?;
        let n: usize = get("n")?.parse().map_err(|_| fail("bad n"))?;
        let seed: u64 = get("seed")?.parse().map_err(|_| fail("bad seed"))?;
        if m < 1 || n < 1 {
            return Err(fail("dimensions must be at least 1"));
        }
        let mut a = DenseMatrix::zeros(m, n);
        for i in 1..=m {
            let line = lines
                .next()
                .ok_or_else(|| fail("unexpected end of file in matrix"))?
                .map_err(|e| fail(&e.to_string()))?;
            let vals: Result<Vec<f64>, _> =
                line.split_whitespace().map(|t| t.parse::<f64>()).collect();
            let vals = vals.map_err(|_| fail(&format!("bad matrix row {i}")))?;
            if vals.len() != n {
                return Err(fail(&format!(
                    "matrix row {i} has {} entries, expected {n}",
                    vals.len()
                )));
            }
            for (j, v) in vals.iter().enumerate() {
                a.set(i, j + 1, *v);
            }
        }
        let mut vectors = std::collections::HashMap::new();
        for line in lines {
            let line = line.map_err(|e| fail(&e.to_string()))?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| fail(&format!("malformed vector line '{line}'")))?;
            let vals: Result<Vec<f64>, _> =
                value.split_whitespace().map(|t| t.parse::<f64>()).collect();
            vectors.insert(
                key.trim().to_string(),
                vals.map_err(|_| fail(&format!("bad vector '{}'", key.trim())))?,
            );
        }
        let take = |k: &str, len: usize| -> Result<Vector, TestgenError> {
            let v = vectors
                .get(k)
                .ok_or_else(|| fail(&format!("missing vector '{k}'")))?;
            if v.len() != len {
                return Err(fail(&format!(
                    "vector '{k}' has length {}, expected {len}",
                    v.len()
                )));
            }
            Ok(Vector::new(v.clone()))
        };
        Ok(ProblemInstance {
            b: take("b", m)?,
            x_star: take("x_star", n)?,
            b_tilde: take("b_tilde", m)?,
            a,
            family,
            m,
            n,
            seed,
            perturbation,
            degenerate_warning: false,
        })
    }
}

fn write_vector(w: &mut impl Write, name: &str, v: &Vector) -> std::io::Result<()> {
    let vals: Vec<String> = v.as_slice().iter().map(|x| format!("{x:.16e}")).collect();
    writeln!(w, "{name} = {}", vals.join(" "))
}
