//! The generic scaled ABS iteration, parameterized by the choice functions
//! for the scaling vector v_i, the search selector z_i, and the update
//! selector w_i. One step reads:
//!
//!   s_i = H_i Aᵀ v_i,  p_i = H_iᵀ z_i,
//!   x_{i+1} = x_i − (r_iᵀ v_i / p_iᵀ Aᵀ v_i) p_i,
//!   H_{i+1} = H_i − s_i w_iᵀ H_i / w_iᵀ s_i,
//!
//! with the degenerate branches: solved (r_i ≈ 0), skipped (s_i ≈ 0 and
//! r_iᵀv_i ≈ 0), incompatible (s_i ≈ 0, r_iᵀv_i not), and breakdown (pivot
//! w_iᵀs_i vanishing while s_i does not).
//!
//! The named production solvers specialize these recurrences directly; this
//! engine is the substrate for property tests and for exploring parameter
//! choices, so it favors clarity over speed and can retain a full history
//! of (p_i, v_i, w_i, d_i) for factorization checks.

use thiserror::Error;

use crate::linalg::{dot, matvec, matvec_transposed, DenseMatrix, LinalgError, Vector, EPS};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("breakdown at step {step}: pivot w'H A'v vanished with s not negligible")]
    Breakdown { step: usize },
    #[error("history retention was not enabled for this run")]
    HistoryAbsent,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Abaffian representation.
#[derive(Debug, Clone)]
pub enum AbaffianRep {
    /// Dense H, updated by the general rank-one formula.
    Explicit(DenseMatrix),
    /// H_{k+1} = I − P_k D_k⁻¹ P_kᵀ, valid for Huang-type parameter choices
    /// (H stays symmetric). Columns p_j with d_j = v_jᵀA p_j.
    Projection { p_cols: Vec<Vector>, d: Vec<f64> },
}

impl AbaffianRep {
    /// H·u.
    pub fn apply(&self, u: &Vector) -> Vector {
        match self {
            AbaffianRep::Explicit(h) => {
                matvec(h, u).expect("Abaffian dimensions fixed at construction")
            }
            AbaffianRep::Projection { p_cols, d } => {
                let mut out = u.clone();
                for (p, &dj) in p_cols.iter().zip(d) {
                    let coeff = p.dot(&out) / dj;
                    out.axpy(-coeff, p);
                }
                out
            }
        }
    }

    /// Hᵀ·u.
    pub fn apply_transposed(&self, u: &Vector) -> Vector {
        match self {
            AbaffianRep::Explicit(h) => {
                matvec_transposed(h, u).expect("Abaffian dimensions fixed at construction")
            }
            // Projection form is symmetric.
            AbaffianRep::Projection { .. } => self.apply(u),
        }
    }

    /// Materializes H (for checks on small problems).
    pub fn to_dense(&self, n: usize) -> DenseMatrix {
        match self {
            AbaffianRep::Explicit(h) => h.clone(),
            AbaffianRep::Projection { .. } => {
                let mut out = DenseMatrix::zeros(n, n);
                for j in 1..=n {
                    let col = self.apply(&Vector::unit(n, j));
                    out.col_mut(j).copy_from_slice(col.as_slice());
                }
                out
            }
        }
    }
}

/// Per-step record kept when history retention is on.
#[derive(Debug, Clone, Default)]
pub struct History {
    pub p: Vec<Vector>,
    pub v: Vec<Vector>,
    pub w: Vec<Vector>,
    pub d: Vec<f64>,
}

/// Iteration state: the iterate, the Abaffian, and bookkeeping.
pub struct AbsState {
    /// 1-based index of the next step.
    pub iter: usize,
    pub x: Vector,
    pub abaffian: AbaffianRep,
    /// Full residual, maintained for scaled-class runs only.
    pub residual: Option<Vector>,
    /// Number of accepted steps so far.
    pub rank_detected: usize,
    pub history: Option<History>,
}

type ChooseFn = Box<dyn Fn(&AbsState, &DenseMatrix, &Vector) -> Vector>;

/// The parameter triple plus initial data. `basic_class` marks runs with
/// v_i = e_i, for which the full residual need not be maintained: only the
/// component a_iᵀx_i − b_i is evaluated.
pub struct AbsParameters {
    pub choose_v: ChooseFn,
    pub choose_z: ChooseFn,
    pub choose_w: ChooseFn,
    pub h1: DenseMatrix,
    pub x1: Vector,
    pub basic_class: bool,
}

impl AbsParameters {
    /// Huang: v_i = e_i, z_i = w_i = a_i (basic class).
    pub fn huang(n: usize) -> Self {
        Self {
            choose_v: Box::new(|state, a, _| Vector::unit(a.rows(), state.iter)),
            choose_z: Box::new(|state, a, _| a.row(state.iter)),
            choose_w: Box::new(|state, a, _| a.row(state.iter)),
            h1: DenseMatrix::identity(n),
            x1: Vector::zeros(n),
            basic_class: true,
        }
    }

    /// Modified Huang: the search selector is reprojected, z_i = H_i a_i,
    /// giving p_i = H_i(H_i a_i).
    pub fn modified_huang(n: usize) -> Self {
        Self {
            choose_z: Box::new(|state, a, _| state.abaffian.apply(&a.row(state.iter))),
            ..Self::huang(n)
        }
    }

    /// Implicit QR: v_i = A p_i = A H_iᵀ e_i, z_i = w_i = e_i (scaled class).
    pub fn implicit_qr(n: usize) -> Self {
        Self {
            choose_v: Box::new(|state, a, _| {
                let p = state
                    .abaffian
                    .apply_transposed(&Vector::unit(a.cols(), state.iter));
                matvec(a, &p).expect("engine dimensions checked at run start")
            }),
            choose_z: Box::new(|state, a, _| Vector::unit(a.cols(), state.iter)),
            choose_w: Box::new(|state, a, _| Vector::unit(a.cols(), state.iter)),
            h1: DenseMatrix::identity(n),
            x1: Vector::zeros(n),
            basic_class: false,
        }
    }

    /// Switches the initial Abaffian to the projection representation
    /// (Huang-type choices only).
    pub fn with_projection_rep(self) -> AbsRunBuilder {
        AbsRunBuilder {
            params: self,
            projection: true,
            history: false,
        }
    }

    pub fn runner(self) -> AbsRunBuilder {
        AbsRunBuilder {
            params: self,
            projection: false,
            history: false,
        }
    }
}

pub struct AbsRunBuilder {
    params: AbsParameters,
    projection: bool,
    history: bool,
}

impl AbsRunBuilder {
    pub fn with_history(mut self) -> Self {
        self.history = true;
        self
    }

    pub fn initial_state(&self) -> AbsState {
        AbsState {
            iter: 1,
            x: self.params.x1.clone(),
            abaffian: if self.projection {
                AbaffianRep::Projection {
                    p_cols: Vec::new(),
                    d: Vec::new(),
                }
            } else {
                AbaffianRep::Explicit(self.params.h1.clone())
            },
            residual: None,
            rank_detected: 0,
            history: if self.history {
                Some(History::default())
            } else {
                None
            },
        }
    }

    pub fn params(&self) -> &AbsParameters {
        &self.params
    }
}

/// Outcome of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Solved,
    Accepted,
    Skipped,
    Incompatible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminationStatus {
    Solved,
    /// Step budget exhausted without a Solved/Incompatible verdict.
    Completed,
    Incompatible,
    Breakdown {
        step: usize,
    },
}

/// Default engine tolerance, ε·max(m, n).
pub fn engine_tol(a: &DenseMatrix) -> f64 {
    EPS * a.rows().max(a.cols()) as f64
}

/// One iteration of the scaled ABS scheme. Breakdown is an error carrying
/// the step index; the other degenerate cases are ordinary outcomes.
pub fn abs_step(
    state: &mut AbsState,
    a: &DenseMatrix,
    b: &Vector,
    params: &AbsParameters,
    tol: f64,
) -> Result<StepOutcome, EngineError> {
    let a_fro = a.frobenius_norm();
    let b_norm = b.norm2();

    // Residual bookkeeping: full vector for scaled runs, one component for
    // the basic class.
    let r_dot_v: f64;
    let v = (params.choose_v)(state, a, b);
    if params.basic_class {
        let i = state.iter;
        let mut row = vec![0.0; a.cols()];
        a.copy_row_into(i, &mut row);
        r_dot_v = dot(&row, state.x.as_slice()) - b.get(i);
        state.residual = None;
    } else {
        let mut r = matvec(a, &state.x)?;
        r.axpy(-1.0, b);
        let r_norm = r.norm2();
        if r_norm <= tol * (a_fro * state.x.norm2() + b_norm) {
            state.residual = Some(r);
            return Ok(StepOutcome::Solved);
        }
        r_dot_v = r.dot(&v);
        state.residual = Some(r);
    }

    let atv = matvec_transposed(a, &v)?;
    let s = state.abaffian.apply(&atv);
    let v_norm = v.norm2();
    if s.norm2() <= tol * a_fro * v_norm {
        return if r_dot_v.abs() <= tol * b_norm.max(1.0) * v_norm {
            state.iter += 1;
            Ok(StepOutcome::Skipped)
        } else {
            Ok(StepOutcome::Incompatible)
        };
    }

    let z = (params.choose_z)(state, a, b);
    let w = (params.choose_w)(state, a, b);
    let p = state.abaffian.apply_transposed(&z);
    let pivot = w.dot(&s); // w'H A'v
    let denom = p.dot(&atv); // p'A'v = z'H A'v
    let pivot_floor = tol * w.norm2() * s.norm2();
    let denom_floor = tol * z.norm2() * s.norm2();
    if pivot.abs() <= pivot_floor || denom.abs() <= denom_floor {
        return Err(EngineError::Breakdown { step: state.iter });
    }

    let alpha = r_dot_v / denom;
    state.x.axpy(-alpha, &p);

    let d = v.dot(&matvec(a, &p)?);
    match &mut state.abaffian {
        AbaffianRep::Explicit(h) => {
            // H := H − s (wᵀH) / pivot
            let wth = matvec_transposed(h, &w)?;
            let n = h.rows();
            for j in 1..=n {
                let coeff = wth.get(j) / pivot;
                if coeff == 0.0 {
                    continue;
                }
                let col = h.col_mut(j);
                for (c, &si) in col.iter_mut().zip(s.as_slice()) {
                    *c -= si * coeff;
                }
            }
        }
        AbaffianRep::Projection { p_cols, d: dd } => {
            p_cols.push(p.clone());
            dd.push(d);
        }
    }

    if let Some(hist) = &mut state.history {
        hist.p.push(p);
        hist.v.push(v);
        hist.w.push(w);
        hist.d.push(d);
    }
    state.rank_detected += 1;
    state.iter += 1;
    Ok(StepOutcome::Accepted)
}

/// Runs the iteration until Solved, Incompatible, breakdown, or the step
/// budget is reached. Breakdown is folded into the termination status so
/// callers can treat it as data.
pub fn run_abs(
    a: &DenseMatrix,
    b: &Vector,
    runner: &AbsRunBuilder,
    tol: f64,
    max_steps: usize,
) -> Result<(AbsState, TerminationStatus), EngineError> {
    assert!(max_steps >= 1, "max_steps must be at least 1");
    let mut state = runner.initial_state();
    for _ in 0..max_steps {
        match abs_step(&mut state, a, b, runner.params(), tol) {
            Ok(StepOutcome::Solved) => return Ok((state, TerminationStatus::Solved)),
            Ok(StepOutcome::Incompatible) => return Ok((state, TerminationStatus::Incompatible)),
            Ok(StepOutcome::Accepted) | Ok(StepOutcome::Skipped) => {}
            Err(EngineError::Breakdown { step }) => {
                return Ok((state, TerminationStatus::Breakdown { step }))
            }
            Err(other) => return Err(other),
        }
    }
    Ok((state, TerminationStatus::Completed))
}

/// Every solution of the scaled subsystem V_{i−1}ᵀA x = V_{i−1}ᵀb has the
/// form x_i + H_iᵀ q.
pub fn general_solution_point(state: &AbsState, q: &Vector) -> Result<Vector, EngineError> {
    let hq = state.abaffian.apply_transposed(q);
    let mut out = state.x.clone();
    out.axpy(1.0, &hq);
    Ok(out)
}

/// Returns the largest strictly-upper-triangular entry of V_iᵀ A P_i, which
/// the implicit factorization property says is zero. Requires history.
pub fn implicit_factorization_check(state: &AbsState, a: &DenseMatrix) -> Result<f64, EngineError> {
    let hist = state.history.as_ref().ok_or(EngineError::HistoryAbsent)?;
    let k = hist.p.len();
    let mut max_upper: f64 = 0.0;
    for (col, p) in hist.p.iter().enumerate() {
        let ap = matvec(a, p)?;
        for (row, v) in hist.v.iter().enumerate() {
            if row < col {
                max_upper = max_upper.max(v.dot(&ap).abs());
            }
        }
    }
    debug_assert!(hist.d.len() == k);
    Ok(max_upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine_default_tol(a: &DenseMatrix) -> f64 {
        engine_tol(a)
    }

    /// Dense LU solve with partial pivoting: the independent oracle for
    /// square compatible systems.
    #[allow(clippy::needless_range_loop)]
    fn lu_solve(a: &DenseMatrix, b: &Vector) -> Vector {
        let n = a.rows();
        assert_eq!(n, a.cols());
        let mut m: Vec<Vec<f64>> = (1..=n)
            .map(|i| (1..=n).map(|j| a.get(i, j)).collect())
            .collect();
        let mut rhs: Vec<f64> = b.as_slice().to_vec();
        for k in 0..n {
            let (piv, _) = m
                .iter()
                .enumerate()
                .skip(k)
                .map(|(i, row)| (i, row[k].abs()))
                .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
                .unwrap();
            m.swap(k, piv);
            rhs.swap(k, piv);
            assert!(m[k][k] != 0.0, "oracle: singular system");
            for i in k + 1..n {
                let f = m[i][k] / m[k][k];
                for j in k..n {
                    m[i][j] -= f * m[k][j];
                }
                rhs[i] -= f * rhs[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut acc = rhs[i];
            for j in i + 1..n {
                acc -= m[i][j] * x[j];
            }
            x[i] = acc / m[i][i];
        }
        Vector::new(x)
    }

    #[test]
    fn first_huang_step_identity_system() {
        // A = I2, b = (2,3), from x1 = 0: p1 = e1, alpha = -2, x2 = (2,0).
        let a = DenseMatrix::identity(2);
        let b = Vector::new(vec![2.0, 3.0]);
        let runner = AbsParameters::huang(2).runner().with_history();
        let mut state = runner.initial_state();
        let out = abs_step(&mut state, &a, &b, runner.params(), engine_default_tol(&a)).unwrap();
        assert_eq!(out, StepOutcome::Accepted);
        assert_eq!(state.x.as_slice(), &[2.0, 0.0]);
        let hist = state.history.as_ref().unwrap();
        assert_eq!(hist.p[0].as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn zero_residual_is_solved() {
        let a = DenseMatrix::identity(2);
        let b = Vector::zeros(2);
        // Scaled-class parameters so the full residual test runs.
        let runner = AbsParameters::implicit_qr(2).runner();
        let mut state = runner.initial_state();
        let out = abs_step(&mut state, &a, &b, runner.params(), engine_default_tol(&a)).unwrap();
        assert_eq!(out, StepOutcome::Solved);
    }

    #[test]
    fn full_run_matches_lu_oracle() {
        let a = DenseMatrix::from_rows(&[&[4.0, -2.0, 1.0], &[3.0, 6.0, -4.0], &[2.0, 1.0, 8.0]]);
        let x_true = Vector::new(vec![1.0, -2.0, 3.0]);
        let b = matvec(&a, &x_true).unwrap();
        let runner = AbsParameters::huang(3).runner();
        let (state, status) = run_abs(&a, &b, &runner, engine_default_tol(&a), 3).unwrap();
        assert!(matches!(
            status,
            TerminationStatus::Completed | TerminationStatus::Solved
        ));
        assert_eq!(state.rank_detected, 3);
        let oracle = lu_solve(&a, &b);
        let err = state.x.sub(&oracle).norm_inf();
        assert!(err <= 1e-10, "ABS vs LU differ by {err}");
    }

    #[test]
    fn duplicated_consistent_row_skips() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0, 0.0], &[1.0, 2.0, 0.0], &[0.0, 1.0, 1.0]]);
        let x_true = Vector::new(vec![1.0, 1.0, 2.0]);
        let b = matvec(&a, &x_true).unwrap();
        let runner = AbsParameters::huang(3).runner();
        let (state, status) = run_abs(&a, &b, &runner, engine_default_tol(&a), 3).unwrap();
        assert_eq!(status, TerminationStatus::Completed);
        assert_eq!(state.rank_detected, 2, "one skip expected");
    }

    #[test]
    fn duplicated_inconsistent_row_is_incompatible() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[1.0, 2.0]]);
        let b = Vector::new(vec![1.0, 5.0]);
        let runner = AbsParameters::huang(2).runner();
        let (_, status) = run_abs(&a, &b, &runner, engine_default_tol(&a), 2).unwrap();
        assert_eq!(status, TerminationStatus::Incompatible);
    }

    #[test]
    fn general_solution_q_zero_returns_iterate() {
        let a = DenseMatrix::identity(2);
        let b = Vector::new(vec![2.0, 3.0]);
        let runner = AbsParameters::huang(2).runner();
        let mut state = runner.initial_state();
        abs_step(&mut state, &a, &b, runner.params(), engine_default_tol(&a)).unwrap();
        let q = Vector::zeros(2);
        let x = general_solution_point(&state, &q).unwrap();
        assert_eq!(x.as_slice(), state.x.as_slice());
    }

    #[test]
    fn general_solution_preserves_first_equation() {
        // After one Huang step on I2, b = (2,3): H2 = diag(0,1), so any q
        // keeps x1 = 2.
        let a = DenseMatrix::identity(2);
        let b = Vector::new(vec![2.0, 3.0]);
        let runner = AbsParameters::huang(2).runner();
        let mut state = runner.initial_state();
        abs_step(&mut state, &a, &b, runner.params(), engine_default_tol(&a)).unwrap();
        let h = state.abaffian.to_dense(2);
        assert!((h.get(1, 1)).abs() < 1e-14);
        assert!((h.get(2, 2) - 1.0).abs() < 1e-14);
        for q in [
            Vector::new(vec![1.0, 0.0]),
            Vector::new(vec![-3.0, 7.0]),
            Vector::new(vec![0.25, -0.5]),
        ] {
            let x = general_solution_point(&state, &q).unwrap();
            assert!((x.get(1) - 2.0).abs() < 1e-14, "first equation violated");
        }
    }

    #[test]
    fn general_solution_scaled_subsystem() {
        // 4x6 system, 4 Huang steps, random-ish q: the scaled subsystem
        // V^T A x = V^T b holds at every returned point. For the basic
        // class V = [e_1..e_4], i.e. all four equations hold.
        let a = DenseMatrix::from_rows(&[
            &[2.0, 1.0, -1.0, 0.5, 1.0, 3.0],
            &[1.0, 3.0, 2.0, -1.0, 0.0, 1.0],
            &[0.0, 1.0, 4.0, 1.0, 2.0, -1.0],
            &[-1.0, 2.0, 1.0, 3.0, 1.0, 0.5],
        ]);
        let x_true = Vector::new(vec![1.0, -1.0, 0.5, 2.0, -0.5, 1.0]);
        let b = matvec(&a, &x_true).unwrap();
        let runner = AbsParameters::huang(6).runner();
        let (state, _) = run_abs(&a, &b, &runner, engine_default_tol(&a), 4).unwrap();
        assert_eq!(state.rank_detected, 4);
        let qs = [
            Vector::new(vec![1.0, 2.0, -1.0, 0.5, 3.0, -2.0]),
            Vector::new(vec![-0.3, 1.1, 0.0, 2.2, -1.5, 0.8]),
            Vector::new(vec![5.0, -4.0, 3.0, -2.0, 1.0, 0.0]),
        ];
        for q in qs {
            let x = general_solution_point(&state, &q).unwrap();
            let ax = matvec(&a, &x).unwrap();
            for i in 1..=4 {
                let viol = (ax.get(i) - b.get(i)).abs();
                assert!(viol <= 1e-10 * b.norm2().max(1.0), "equation {i}: {viol}");
            }
        }
    }

    #[test]
    fn factorization_check_single_step_is_zero() {
        let a = DenseMatrix::identity(3);
        let b = Vector::new(vec![1.0, 2.0, 3.0]);
        let runner = AbsParameters::huang(3).runner().with_history();
        let mut state = runner.initial_state();
        abs_step(&mut state, &a, &b, runner.params(), engine_default_tol(&a)).unwrap();
        assert_eq!(implicit_factorization_check(&state, &a).unwrap(), 0.0);
    }

    #[test]
    fn factorization_check_huang_5x5() {
        let a = DenseMatrix::from_rows(&[
            &[4.0, 1.0, -2.0, 2.0, 0.0],
            &[1.0, 5.0, 0.0, -1.0, 2.0],
            &[-2.0, 0.0, 6.0, 1.0, 1.0],
            &[2.0, -1.0, 1.0, 7.0, -2.0],
            &[0.0, 2.0, 1.0, -2.0, 8.0],
        ]);
        let x_true = Vector::new(vec![1.0, 2.0, -1.0, 0.5, -2.0]);
        let b = matvec(&a, &x_true).unwrap();
        let runner = AbsParameters::huang(5).runner().with_history();
        let (state, _) = run_abs(&a, &b, &runner, engine_default_tol(&a), 5).unwrap();
        let check = implicit_factorization_check(&state, &a).unwrap();
        let bound = 1e-9 * a.frobenius_norm().powi(2);
        assert!(check <= bound, "upper residue {check} > {bound}");
        for &dj in &state.history.as_ref().unwrap().d {
            assert!(dj != 0.0);
        }
    }

    #[test]
    fn factorization_check_implicit_qr_overdetermined() {
        let a = DenseMatrix::from_rows(&[
            &[3.0, 1.0, 0.0, -1.0],
            &[1.0, 4.0, 2.0, 1.0],
            &[0.0, 2.0, 5.0, -2.0],
            &[-1.0, 1.0, -2.0, 6.0],
            &[2.0, 0.0, 1.0, 1.0],
            &[1.0, -1.0, 1.0, 0.0],
        ]);
        let b = Vector::new(vec![1.0, 2.0, -1.0, 0.5, 1.5, -0.5]);
        let runner = AbsParameters::implicit_qr(4).runner().with_history();
        let (state, _) = run_abs(&a, &b, &runner, engine_tol(&a), 4).unwrap();
        assert_eq!(state.rank_detected, 4);
        let check = implicit_factorization_check(&state, &a).unwrap();
        assert!(check <= 1e-9 * a.frobenius_norm().powi(2));
    }

    #[test]
    fn factorization_check_requires_history() {
        let a = DenseMatrix::identity(2);
        let b = Vector::new(vec![1.0, 1.0]);
        let runner = AbsParameters::huang(2).runner();
        let (state, _) = run_abs(&a, &b, &runner, engine_tol(&a), 2).unwrap();
        assert!(matches!(
            implicit_factorization_check(&state, &a),
            Err(EngineError::HistoryAbsent)
        ));
    }

    #[test]
    fn explicit_and_projection_reps_agree() {
        let a = DenseMatrix::from_rows(&[
            &[3.0, 1.0, -1.0, 2.0],
            &[1.0, 4.0, 2.0, -1.0],
            &[-1.0, 2.0, 5.0, 1.0],
            &[2.0, -1.0, 1.0, 6.0],
        ]);
        let x_true = Vector::new(vec![1.0, -1.0, 2.0, 0.5]);
        let b = matvec(&a, &x_true).unwrap();
        let t = engine_tol(&a);
        let (se, _) = run_abs(&a, &b, &AbsParameters::huang(4).runner(), t, 4).unwrap();
        let (sp, _) =
            run_abs(&a, &b, &AbsParameters::huang(4).with_projection_rep(), t, 4).unwrap();
        let diff = se.x.sub(&sp.x).norm2();
        assert!(
            diff <= 1e-10 * se.x.norm2().max(1.0),
            "reps differ by {diff}"
        );
    }

    #[test]
    fn null_space_property_after_each_step() {
        let a = DenseMatrix::from_rows(&[
            &[2.0, -1.0, 3.0, 1.0],
            &[1.0, 4.0, -1.0, 2.0],
            &[3.0, 1.0, 5.0, -1.0],
            &[0.0, 2.0, 1.0, 4.0],
        ]);
        let x_true = Vector::new(vec![0.5, 1.0, -1.0, 2.0]);
        let b = matvec(&a, &x_true).unwrap();
        let runner = AbsParameters::huang(4).runner().with_history();
        let t = engine_tol(&a);
        let mut state = runner.initial_state();
        for _ in 0..4 {
            abs_step(&mut state, &a, &b, runner.params(), t).unwrap();
            let h = state.abaffian.to_dense(4);
            let hist = state.history.as_ref().unwrap();
            let mut v_max: f64 = 0.0;
            let mut w_max: f64 = 0.0;
            for (v, w) in hist.v.iter().zip(&hist.w) {
                let atv = matvec_transposed(&a, v).unwrap();
                v_max = v_max.max(matvec(&h, &atv).unwrap().norm_inf());
                w_max = w_max.max(matvec_transposed(&h, w).unwrap().norm_inf());
                let w_scale = w.norm_inf();
                let v_scale = v.norm_inf();
                assert!(v_max <= 1e-10 * a.frobenius_norm() * v_scale.max(1.0));
                assert!(w_max <= 1e-10 * w_scale.max(1.0) * a.frobenius_norm());
            }
        }
    }

    #[test]
    fn stepsize_consistency_basic_class() {
        // After an accepted step with v_i = e_i, equation i holds exactly.
        let a = DenseMatrix::from_rows(&[&[2.0, 1.0, -1.0], &[1.0, 3.0, 2.0], &[0.0, 1.0, 4.0]]);
        let x_true = Vector::new(vec![1.0, -1.0, 2.0]);
        let b = matvec(&a, &x_true).unwrap();
        let runner = AbsParameters::huang(3).runner();
        let t = engine_tol(&a);
        let mut state = runner.initial_state();
        for i in 1..=3 {
            let out = abs_step(&mut state, &a, &b, runner.params(), t).unwrap();
            assert_eq!(out, StepOutcome::Accepted);
            let mut row = vec![0.0; 3];
            a.copy_row_into(i, &mut row);
            let res = (dot(&row, state.x.as_slice()) - b.get(i)).abs();
            assert!(res <= 1e-10 * b.norm2().max(1.0), "row {i} residual {res}");
        }
    }
}
