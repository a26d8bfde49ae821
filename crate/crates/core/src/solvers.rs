//! The named ABS solvers: Huang and modified Huang in both Abaffian
//! representations, the implicit QR algorithm, and the two least-squares
//! Huang variants (with and without the stored triangular factor).
//!
//! Dependent-step thresholds differ by variant on purpose. The plain
//! variants compute search directions with a single projector pass, so their
//! d_i on a dependent column is orthogonalization rounding noise of order
//! ε·‖ã‖²; any threshold at or above that level would make the plain sweeps
//! report rank deficiency they cannot actually certify. They therefore carry
//! only a division guard at ε^{3/2}·‖ã‖², well below the noise floor, and
//! run full sweeps on degenerate families. The modified variants reproject,
//! which crushes a genuinely dependent d_i to the ε² level, so the
//! scale-relative test d ≤ tol·‖ã‖² (tol defaulting to ε·max(m,n)) detects
//! rank reliably for them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::linalg::{back_substitute, dot, DenseMatrix, LinalgError, LowerTriangular, Vector, EPS};

/// Division guard for plain-variant dependent tests: far below one-pass
/// orthogonalization noise, above underflow.
const PLAIN_GUARD: f64 = 1.0e-24; // ~ EPS^1.5

/// Consecutive dependent columns after which a least-squares sweep treats
/// the remaining columns as degenerate and stops. Isolated dependent
/// columns are skipped and the sweep continues.
const CONSECUTIVE_DEPENDENT_STOP: usize = 3;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver requires m >= n (got {m} x {n})")]
    Underdetermined { m: usize, n: usize },
    #[error("right-hand side length {found} does not match m = {expected}")]
    RhsLength { expected: usize, found: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Default scale-relative tolerance ε·max(m, n), shared with the baselines'
/// rank threshold so rank columns are comparable.
pub fn default_tol(m: usize, n: usize) -> f64 {
    EPS * m.max(n) as f64
}

/// The algorithm roster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Huang with the explicit Abaffian update.
    Huang1,
    /// Huang with the projection representation.
    Huang2,
    ModifiedHuang1,
    ModifiedHuang2,
    /// Implicit QR: v_i = A p_i, least squares in at most n steps.
    ImplicitQr,
    /// Least-squares Huang assembling the triangular factor (huang6).
    LsHuangStoredL,
    /// Least-squares Huang via the reverse recurrence, no stored factor
    /// (huang7).
    LsHuangNoL,
    ModifiedLsHuangStoredL,
    ModifiedLsHuangNoL,
}

impl SolverKind {
    pub fn is_least_squares(self) -> bool {
        !matches!(
            self,
            SolverKind::Huang1
                | SolverKind::Huang2
                | SolverKind::ModifiedHuang1
                | SolverKind::ModifiedHuang2
        )
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolverKind::Huang1 => "huang1",
            SolverKind::Huang2 => "huang2",
            SolverKind::ModifiedHuang1 => "mod.huang1",
            SolverKind::ModifiedHuang2 => "mod.huang2",
            SolverKind::ImplicitQr => "impl.qr5",
            SolverKind::LsHuangStoredL => "huang6",
            SolverKind::LsHuangNoL => "huang7",
            SolverKind::ModifiedLsHuangStoredL => "mod.huang6",
            SolverKind::ModifiedLsHuangNoL => "mod.huang7",
        };
        f.write_str(s)
    }
}

impl FromStr for SolverKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "huang1" => Ok(SolverKind::Huang1),
            "huang2" => Ok(SolverKind::Huang2),
            "mod.huang1" => Ok(SolverKind::ModifiedHuang1),
            "mod.huang2" => Ok(SolverKind::ModifiedHuang2),
            "impl.qr5" | "impl.qr" => Ok(SolverKind::ImplicitQr),
            "huang6" => Ok(SolverKind::LsHuangStoredL),
            "huang7" => Ok(SolverKind::LsHuangNoL),
            "mod.huang6" => Ok(SolverKind::ModifiedLsHuangStoredL),
            "mod.huang7" => Ok(SolverKind::ModifiedLsHuangNoL),
            other => Err(format!("unknown solver '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    RankDeficientCompleted,
    Breakdown,
    Incompatible,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SolveStatus::Converged => "converged",
            SolveStatus::RankDeficientCompleted => "rank_deficient_completed",
            SolveStatus::Breakdown => "breakdown",
            SolveStatus::Incompatible => "incompatible",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vector,
    pub rank_detected: usize,
    pub steps_taken: usize,
    pub status: SolveStatus,
    pub wall_time: f64,
}

/// Abaffian representation choice for the Huang row solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Explicit: dense H updated as H − p pᵀ/d.
    Explicit,
    /// Projection: H = I − P D⁻¹ Pᵀ kept as columns.
    Projection,
}

/// Applies H = I − P D⁻¹ Pᵀ to `v` in place.
fn project(p_cols: &[Vec<f64>], d: &[f64], v: &mut [f64]) {
    for (p, &dj) in p_cols.iter().zip(d) {
        let coeff = dot(p, v) / dj;
        for (vi, pi) in v.iter_mut().zip(p) {
            *vi -= coeff * pi;
        }
    }
}

/// Huang / modified Huang for compatible systems (Algorithms 1 and 2).
///
/// From x₁ = 0 the result is the minimum-norm solution of a compatible
/// system. Rows whose d_i falls under the dependent threshold are skipped
/// when their residual component is compatible; otherwise the run stops
/// with `Incompatible`.
pub fn huang_solve(
    a: &DenseMatrix,
    b: &Vector,
    modified: bool,
    representation: Representation,
    tol: f64,
) -> Result<SolveResult, SolverError> {
    let (m, n) = (a.rows(), a.cols());
    if b.len() != m {
        return Err(SolverError::RhsLength {
            expected: m,
            found: b.len(),
        });
    }
    let start = Instant::now();
    let b_norm = b.norm2();
    let mut x = vec![0.0; n];
    let mut h = match representation {
        Representation::Explicit => Some(DenseMatrix::identity(n)),
        Representation::Projection => None,
    };
    let mut p_cols: Vec<Vec<f64>> = Vec::new();
    let mut d_diag: Vec<f64> = Vec::new();
    let mut row = vec![0.0; n];
    let mut rank = 0usize;
    let mut skipped = false;
    let mut steps = 0usize;

    for i in 1..=m {
        steps = i;
        a.copy_row_into(i, &mut row);
        let rho = dot(&row, &x) - b.get(i);

        let p = match (&h, representation) {
            (Some(hm), Representation::Explicit) => {
                let mut p = apply_h(hm, &row);
                if modified {
                    p = apply_h(hm, &p);
                }
                p
            }
            (_, Representation::Projection) => {
                let mut p = row.clone();
                project(&p_cols, &d_diag, &mut p);
                if modified {
                    project(&p_cols, &d_diag, &mut p);
                }
                p
            }
            _ => unreachable!(),
        };
        let d = dot(&row, &p);
        let aa = dot(&row, &row);
        let dependent = if modified {
            d <= tol * aa
        } else {
            d.abs() <= PLAIN_GUARD * aa
        };
        if dependent {
            if rho.abs() <= tol * b_norm.max(1.0) {
                skipped = true;
                continue;
            }
            return Ok(SolveResult {
                x: Vector::new(x),
                rank_detected: rank,
                steps_taken: steps,
                status: SolveStatus::Incompatible,
                wall_time: start.elapsed().as_secs_f64(),
            });
        }
        let alpha = rho / d;
        for (xj, pj) in x.iter_mut().zip(&p) {
            *xj -= alpha * pj;
        }
        match (&mut h, representation) {
            (Some(hm), Representation::Explicit) => {
                // H := H − p pᵀ / d
                for j in 1..=n {
                    let pj = p[j - 1];
                    if pj == 0.0 {
                        continue;
                    }
                    let scale = pj / d;
                    let col = hm.col_mut(j);
                    for (c, pi) in col.iter_mut().zip(&p) {
                        *c -= pi * scale;
                    }
                }
            }
            _ => {
                p_cols.push(p);
                d_diag.push(d);
            }
        }
        rank += 1;
    }

    Ok(SolveResult {
        x: Vector::new(x),
        rank_detected: rank,
        steps_taken: steps,
        status: if skipped {
            SolveStatus::RankDeficientCompleted
        } else {
            SolveStatus::Converged
        },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// H·v for dense H (H is maintained symmetric by the Huang update).
fn apply_h(h: &DenseMatrix, v: &[f64]) -> Vec<f64> {
    let n = h.rows();
    let mut out = vec![0.0; n];
    for (j, &vj) in v.iter().enumerate() {
        if vj == 0.0 {
            continue;
        }
        for (o, &hij) in out.iter_mut().zip(h.col(j + 1)) {
            *o += hij * vj;
        }
    }
    out
}

/// The implicit QR algorithm for the least-squares solution of an
/// overdetermined system, in at most n steps.
///
/// The Abaffian keeps the implicit-LU structure — at step i only
/// (i−1)(n−i+1) entries of H carry information, p_i has i nonzero
/// components and only the first i entries of x change — so H is never
/// materialized: row i of H_i is assembled on demand from the accepted
/// (p_w, v_w) history,
///
///   p_i = e_i − Σ_{w<i} p_w · (ã_iᵀ... v_w)/v_wᵀv_w,
///
/// which reproduces the structured-array update term by term. A run that
/// terminates after r steps therefore costs O(m·n·r), which is what makes
/// early termination on degenerate families as fast as the plain sweep is
/// long.
///
/// A vanishing pivot vᵀv is classified by the scaled-class skip test
/// ‖s‖ ≤ tol·‖A‖_F·‖v‖: when it passes (only exactly-degenerate steps do),
/// the column is skipped as rank-deficient and the sweep continues — three
/// consecutive skips end it as a degenerate tail; when it fails, the
/// factorization has degenerated and the run stops with breakdown.
pub fn implicit_qr_solve(
    a: &DenseMatrix,
    b: &Vector,
    tol: f64,
) -> Result<SolveResult, SolverError> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(SolverError::Underdetermined { m, n });
    }
    if b.len() != m {
        return Err(SolverError::RhsLength {
            expected: m,
            found: b.len(),
        });
    }
    let start = Instant::now();
    let a_fro2: f64 = (1..=n).map(|j| dot(a.col(j), a.col(j))).sum();
    let a_fro = a_fro2.sqrt();

    // Accepted-step history: p_w (first w components), v_w, and v_wᵀv_w.
    let mut p_hist: Vec<Vec<f64>> = Vec::new();
    let mut v_hist: Vec<Vec<f64>> = Vec::new();
    let mut vv_hist: Vec<f64> = Vec::new();

    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = b.as_slice().iter().map(|v| -v).collect(); // r1 = -b
    let mut p = vec![0.0; n];
    let mut v = vec![0.0; m];
    let mut rank = 0usize;
    let mut steps = 0usize;
    let mut any_dependent = false;
    let mut consecutive = 0usize;
    let mut skipped: Vec<usize> = Vec::new();

    for i in 1..=n {
        steps = i;
        // Row i of H_i: e_i plus the accumulated update terms
        // −(col_iᵀ v_w) p_w / v_wᵀv_w from each accepted step w.
        let pi_len = i;
        p[..pi_len].iter_mut().for_each(|e| *e = 0.0);
        p[i - 1] = 1.0;
        let col_i = a.col(i);
        for ((pw, vw), &vvw) in p_hist.iter().zip(&v_hist).zip(&vv_hist) {
            let coeff = dot(col_i, vw) / vvw;
            if coeff == 0.0 {
                continue;
            }
            for (pj, &pwj) in p.iter_mut().zip(pw) {
                *pj -= coeff * pwj;
            }
        }

        // v = A p, using only the first i components of p.
        v.iter_mut().for_each(|vk| *vk = 0.0);
        for (j, &pj) in p.iter().take(pi_len).enumerate() {
            if pj == 0.0 {
                continue;
            }
            for (vk, &akj) in v.iter_mut().zip(a.col(j + 1)) {
                *vk += akj * pj;
            }
        }
        let vv = dot(&v, &v);
        let pp = dot(&p[..pi_len], &p[..pi_len]);

        if !vv.is_finite() || vv <= tol * a_fro2 * pp {
            // s = H^T A^T v decides skip vs breakdown. Components k >= i
            // (and skipped k < i) are (A^T v)_k; accumulate with early exit
            // once the threshold is conclusively exceeded.
            let v_norm = vv.max(0.0).sqrt();
            let thr = tol * a_fro * v_norm;
            let thr2 = thr * thr;
            let mut s2 = 0.0;
            let mut exceeded = !vv.is_finite();
            if !exceeded {
                for k in i..=n {
                    let uk = dot(a.col(k), &v);
                    s2 += uk * uk;
                    if s2 > thr2 {
                        exceeded = true;
                        break;
                    }
                }
            }
            if !exceeded {
                // Components j < i of s = H_iᵀu. Unrolling the update,
                // H_i = I − Σ_w ŝ_w p_wᵀ/vv_w over accepted steps w with
                // ŝ_w[k] = col_kᵀv_w for k > w (rows ≤ w are annihilated),
                // so s_j = [j skipped]·u_j − Σ_w p_w[j]·T_w/vv_w where
                // T_w sums ŝ_w[k]·u_k over the live rows (k ≥ i and
                // skipped k; accepted rows k < i are exact zeros of H).
                let u: Vec<f64> = (1..=n).map(|k| dot(a.col(k), &v)).collect();
                let mut g = vec![0.0; i - 1];
                for ((pw, vw), &vvw) in p_hist.iter().zip(&v_hist).zip(&vv_hist) {
                    let w = pw.len();
                    let mut t_w = 0.0;
                    for k in i..=n {
                        t_w += dot(a.col(k), vw) * u[k - 1];
                    }
                    for &k in &skipped {
                        if k > w {
                            t_w += dot(a.col(k), vw) * u[k - 1];
                        }
                    }
                    let scale = t_w / vvw;
                    for (gj, &pwj) in g.iter_mut().zip(pw) {
                        *gj += scale * pwj;
                    }
                }
                for j in 1..i {
                    let mut sj = -g[j - 1];
                    if skipped.contains(&j) {
                        sj += u[j - 1];
                    }
                    s2 += sj * sj;
                    if s2 > thr2 {
                        exceeded = true;
                        break;
                    }
                }
            }
            if exceeded {
                return Ok(SolveResult {
                    x: Vector::new(x),
                    rank_detected: rank,
                    steps_taken: steps,
                    status: SolveStatus::Breakdown,
                    wall_time: start.elapsed().as_secs_f64(),
                });
            }
            // Exactly-degenerate column: skip it, leave x_i at zero.
            any_dependent = true;
            skipped.push(i);
            consecutive += 1;
            if consecutive >= CONSECUTIVE_DEPENDENT_STOP {
                break;
            }
            continue;
        }
        consecutive = 0;

        let alpha = dot(&r, &v) / vv;
        for (xj, &pj) in x.iter_mut().take(pi_len).zip(&p) {
            *xj -= alpha * pj;
        }
        for (rk, &vk) in r.iter_mut().zip(&v) {
            *rk -= alpha * vk;
        }
        rank += 1;
        p_hist.push(p[..pi_len].to_vec());
        v_hist.push(v.clone());
        vv_hist.push(vv);
    }

    Ok(SolveResult {
        x: Vector::new(x),
        rank_detected: rank,
        steps_taken: steps,
        status: if any_dependent {
            SolveStatus::RankDeficientCompleted
        } else {
            SolveStatus::Converged
        },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Least-squares Huang (Algorithms 4 and 5), driven by the columns ã_i of A.
///
/// `store_l = true` assembles the triangular factor L (row i gets
/// g_i = P_{i−1}ᵀã_i and diagonal d_i) plus b̃_i = bᵀp_i, then solves
/// Lᵀx = b̃ by back substitution. `store_l = false` runs the same forward
/// sweep and recovers x by the reverse recurrence x_i = p_iᵀf_i / d_i,
/// f_{i−1} = f_i − x_i ã_i.
///
/// Dependent columns are skipped with their x entry left at zero (a basic
/// least-squares solution over the accepted columns). Three consecutive
/// dependent columns end the sweep: the remaining columns are treated as
/// part of the same degenerate tail, so a matrix with three or more
/// consecutive dependent columns followed by independent ones will
/// under-detect rank.
pub fn ls_huang_solve(
    a: &DenseMatrix,
    b: &Vector,
    modified: bool,
    store_l: bool,
    tol: f64,
) -> Result<SolveResult, SolverError> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(SolverError::Underdetermined { m, n });
    }
    if b.len() != m {
        return Err(SolverError::RhsLength {
            expected: m,
            found: b.len(),
        });
    }
    let start = Instant::now();

    let mut p_cols: Vec<Vec<f64>> = Vec::new();
    let mut d_diag: Vec<f64> = Vec::new();
    let mut accepted_idx: Vec<usize> = Vec::new(); // original column indices
    let mut l_rows: Vec<Vec<f64>> = Vec::new(); // row k: g_k then d_k
    let mut b_tilde: Vec<f64> = Vec::new();
    let mut any_dependent = false;
    let mut consecutive = 0usize;
    let mut steps = 0usize;

    for i in 1..=n {
        steps = i;
        let col = a.col(i);
        // g = P^T ã (against accepted columns), reused for both p and L.
        let g: Vec<f64> = p_cols.iter().map(|p| dot(p, col)).collect();
        let mut p = col.to_vec();
        for ((pc, &dj), &gj) in p_cols.iter().zip(&d_diag).zip(&g) {
            let coeff = gj / dj;
            for (pi, &pcj) in p.iter_mut().zip(pc) {
                *pi -= coeff * pcj;
            }
        }
        if modified {
            project(&p_cols, &d_diag, &mut p);
        }
        let d = dot(col, &p);
        let aa = dot(col, col);
        let dependent = if modified {
            d <= tol * aa
        } else {
            d.abs() <= PLAIN_GUARD * aa
        };
        if dependent {
            any_dependent = true;
            consecutive += 1;
            if consecutive >= CONSECUTIVE_DEPENDENT_STOP {
                break;
            }
            continue;
        }
        consecutive = 0;
        if store_l {
            let mut lrow = g.clone();
            lrow.push(d);
            l_rows.push(lrow);
            b_tilde.push(dot(b.as_slice(), &p));
        }
        p_cols.push(p);
        d_diag.push(d);
        accepted_idx.push(i);
    }

    let rank = accepted_idx.len();
    let mut x = vec![0.0; n];
    if rank > 0 {
        if store_l {
            let mut l = LowerTriangular::zeros(rank);
            for (k, lrow) in l_rows.iter().enumerate() {
                for (j, &v) in lrow.iter().enumerate() {
                    l.set(k + 1, j + 1, v);
                }
            }
            let y = back_substitute(&l, &Vector::new(b_tilde))?;
            for (k, &i) in accepted_idx.iter().enumerate() {
                x[i - 1] = y.get(k + 1);
            }
        } else {
            let mut f: Vec<f64> = b.as_slice().to_vec();
            for k in (0..rank).rev() {
                let i = accepted_idx[k];
                let xi = dot(&p_cols[k], &f) / d_diag[k];
                x[i - 1] = xi;
                if k > 0 {
                    let col = a.col(i);
                    for (fk, &ak) in f.iter_mut().zip(col) {
                        *fk -= xi * ak;
                    }
                }
            }
        }
    }

    Ok(SolveResult {
        x: Vector::new(x),
        rank_detected: rank,
        steps_taken: steps,
        status: if any_dependent {
            SolveStatus::RankDeficientCompleted
        } else {
            SolveStatus::Converged
        },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Runs the solver selected by `kind` with the shared tolerance.
pub fn solve_with(
    kind: SolverKind,
    a: &DenseMatrix,
    b: &Vector,
    tol: f64,
) -> Result<SolveResult, SolverError> {
    match kind {
        SolverKind::Huang1 => huang_solve(a, b, false, Representation::Explicit, tol),
        SolverKind::Huang2 => huang_solve(a, b, false, Representation::Projection, tol),
        SolverKind::ModifiedHuang1 => huang_solve(a, b, true, Representation::Explicit, tol),
        SolverKind::ModifiedHuang2 => huang_solve(a, b, true, Representation::Projection, tol),
        SolverKind::ImplicitQr => implicit_qr_solve(a, b, tol),
        SolverKind::LsHuangStoredL => ls_huang_solve(a, b, false, true, tol),
        SolverKind::LsHuangNoL => ls_huang_solve(a, b, false, false, tol),
        SolverKind::ModifiedLsHuangStoredL => ls_huang_solve(a, b, true, true, tol),
        SolverKind::ModifiedLsHuangNoL => ls_huang_solve(a, b, true, false, tol),
    }
}
