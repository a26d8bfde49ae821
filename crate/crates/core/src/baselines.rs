//! In-repo stand-ins for the LAPACK comparison routines: plain Householder
//! QR least squares (DGELS analogue), rank-revealing column-pivoted QR
//! (DGELSX analogue), and a one-sided Jacobi SVD solver (DGELSS analogue)
//! that doubles as the verification oracle for the ABS solvers.

use std::time::Instant;

use thiserror::Error;

use crate::linalg::{dot, DenseMatrix, Vector, EPS};
use crate::solvers::{SolveResult, SolveStatus};

const JACOBI_MAX_SWEEPS: usize = 40;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("baseline requires m >= n (got {m} x {n})")]
    Underdetermined { m: usize, n: usize },
    #[error("right-hand side length {found} does not match m = {expected}")]
    RhsLength { expected: usize, found: usize },
    #[error("matrix is exactly singular: zero R diagonal at column {col}")]
    SingularR { col: usize },
    #[error("Jacobi SVD did not converge within {0} sweeps")]
    JacobiNonConvergence(usize),
}

fn check_shape(a: &DenseMatrix, b: &Vector) -> Result<(), BaselineError> {
    if a.rows() < a.cols() {
        return Err(BaselineError::Underdetermined {
            m: a.rows(),
            n: a.cols(),
        });
    }
    if b.len() != a.rows() {
        return Err(BaselineError::RhsLength {
            expected: a.rows(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Householder QR factors. Reflectors are stored below the diagonal of the
/// packed factor (v normalized to v₁ = 1), R on and above it.
#[derive(Debug, Clone)]
pub struct QrFactorization {
    packed: DenseMatrix,
    betas: Vec<f64>,
    /// Column permutation (1-based original column for each factored column).
    pub permutation: Option<Vec<usize>>,
    pub rank: usize,
}

impl QrFactorization {
    /// Householder QR without pivoting.
    pub fn new(a: &DenseMatrix) -> Result<Self, BaselineError> {
        Self::factor(a, None)
    }

    /// Column-pivoted QR; pivots on the largest remaining column norm.
    /// `rcond` sets the numerical rank: the largest k with |R_kk| > rcond·|R_11|.
    pub fn new_pivoted(a: &DenseMatrix, rcond: f64) -> Result<Self, BaselineError> {
        Self::factor(a, Some(rcond))
    }

    fn factor(a: &DenseMatrix, pivot_rcond: Option<f64>) -> Result<Self, BaselineError> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(BaselineError::Underdetermined { m, n });
        }
        let mut w = a.clone();
        let mut betas = vec![0.0; n];
        let mut perm: Vec<usize> = (1..=n).collect();

        for k in 1..=n {
            if pivot_rcond.is_some() {
                // Pick the column with the largest remaining norm.
                let mut best = k;
                let mut best_norm = trailing_col_norm2(&w, k, k);
                for j in k + 1..=n {
                    let nj = trailing_col_norm2(&w, j, k);
                    if nj > best_norm {
                        best = j;
                        best_norm = nj;
                    }
                }
                if best != k {
                    swap_cols(&mut w, k, best);
                    perm.swap(k - 1, best - 1);
                }
            }
            // Householder reflector for column k, rows k..m.
            let col = w.col(k);
            let tail = &col[k - 1..];
            let sigma = tail.iter().map(|v| v * v).sum::<f64>().sqrt();
            if sigma == 0.0 {
                betas[k - 1] = 0.0;
                continue;
            }
            let alpha = if tail[0] >= 0.0 { -sigma } else { sigma };
            let v0 = tail[0] - alpha;
            // v = (x - alpha e1) / v0, so v[0] = 1 implicitly.
            let mut vnorm2 = 1.0;
            let mut vtail: Vec<f64> = Vec::with_capacity(m - k);
            for &t in &tail[1..] {
                let vi = t / v0;
                vnorm2 += vi * vi;
                vtail.push(vi);
            }
            let beta = 2.0 / vnorm2;
            betas[k - 1] = beta;
            // Apply to remaining columns (including k itself).
            for j in k..=n {
                let cj = w.col_mut(j);
                let mut proj = cj[k - 1];
                for (ofs, &vi) in vtail.iter().enumerate() {
                    proj += vi * cj[k + ofs];
                }
                proj *= beta;
                cj[k - 1] -= proj;
                for (ofs, &vi) in vtail.iter().enumerate() {
                    cj[k + ofs] -= proj * vi;
                }
            }
            // Store the reflector tail below the diagonal; set exact alpha.
            {
                let ck = w.col_mut(k);
                ck[k - 1] = alpha;
                for (ofs, &vi) in vtail.iter().enumerate() {
                    ck[k + ofs] = vi;
                }
            }
        }

        let rank = match pivot_rcond {
            None => n,
            Some(rcond) => {
                let r11 = w.get(1, 1).abs();
                let mut r = 0;
                for k in 1..=n {
                    if w.get(k, k).abs() > rcond * r11 {
                        r = k;
                    }
                }
                r
            }
        };

        Ok(Self {
            packed: w,
            betas,
            permutation: pivot_rcond.map(|_| perm),
            rank,
        })
    }

    /// Applies Qᵀ to a vector.
    pub fn apply_qt(&self, b: &Vector) -> Vector {
        let (m, n) = (self.packed.rows(), self.packed.cols());
        let mut y = b.as_slice().to_vec();
        for k in 1..=n {
            let beta = self.betas[k - 1];
            if beta == 0.0 {
                continue;
            }
            let col = self.packed.col(k);
            let mut proj = y[k - 1];
            for i in k + 1..=m {
                proj += col[i - 1] * y[i - 1];
            }
            proj *= beta;
            y[k - 1] -= proj;
            for i in k + 1..=m {
                y[i - 1] -= proj * col[i - 1];
            }
        }
        Vector::new(y)
    }

    /// R entry (i, j), i ≤ j.
    pub fn r_entry(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j);
        self.packed.get(i, j)
    }

    /// Reconstructs Q (m×n thin factor), mostly for verification.
    pub fn q_thin(&self) -> DenseMatrix {
        let (m, n) = (self.packed.rows(), self.packed.cols());
        let mut q = DenseMatrix::zeros(m, n);
        for j in 1..=n {
            // q_j = Q e_j = H_1 ... H_n e_j applied in reverse.
            let mut y = vec![0.0; m];
            y[j - 1] = 1.0;
            for k in (1..=n).rev() {
                let beta = self.betas[k - 1];
                if beta == 0.0 {
                    continue;
                }
                let col = self.packed.col(k);
                let mut proj = y[k - 1];
                for i in k + 1..=m {
                    proj += col[i - 1] * y[i - 1];
                }
                proj *= beta;
                y[k - 1] -= proj;
                for i in k + 1..=m {
                    y[i - 1] -= proj * col[i - 1];
                }
            }
            q.col_mut(j).copy_from_slice(&y);
        }
        q
    }
}

fn trailing_col_norm2(w: &DenseMatrix, j: usize, from_row: usize) -> f64 {
    let col = w.col(j);
    col[from_row - 1..].iter().map(|v| v * v).sum()
}

fn swap_cols(w: &mut DenseMatrix, a: usize, b: usize) {
    debug_assert_ne!(a, b);
    let m = w.rows();
    for i in 1..=m {
        let tmp = w.get(i, a);
        let vb = w.get(i, b);
        w.set(i, a, vb);
        w.set(i, b, tmp);
    }
}

/// Plain QR least squares (DGELS analogue): no pivoting, rank reported as n.
pub fn qr_least_squares(a: &DenseMatrix, b: &Vector) -> Result<SolveResult, BaselineError> {
    check_shape(a, b)?;
    let start = Instant::now();
    let n = a.cols();
    let qr = QrFactorization::new(a)?;
    let y = qr.apply_qt(b);
    // Back substitution on R (upper triangular n x n).
    let mut x = vec![0.0; n];
    for i in (1..=n).rev() {
        let rii = qr.r_entry(i, i);
        if rii == 0.0 {
            return Err(BaselineError::SingularR { col: i });
        }
        let mut sum = y.get(i);
        for j in i + 1..=n {
            sum -= qr.r_entry(i, j) * x[j - 1];
        }
        x[i - 1] = sum / rii;
    }
    Ok(SolveResult {
        x: Vector::new(x),
        rank_detected: n,
        steps_taken: n,
        status: SolveStatus::Converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Column-pivoted QR least squares (DGELSX analogue). Solves the rank-r
/// truncated problem with zero free variables (a basic solution; DGELSX's
/// exact minimum-norm completion is not reproduced).
pub fn pivoted_qr_least_squares(
    a: &DenseMatrix,
    b: &Vector,
    rcond: f64,
) -> Result<SolveResult, BaselineError> {
    check_shape(a, b)?;
    let start = Instant::now();
    let n = a.cols();
    let qr = QrFactorization::new_pivoted(a, rcond)?;
    let r = qr.rank;
    let y = qr.apply_qt(b);
    let mut z = vec![0.0; n];
    for i in (1..=r).rev() {
        let mut sum = y.get(i);
        for j in i + 1..=r {
            sum -= qr.r_entry(i, j) * z[j - 1];
        }
        z[i - 1] = sum / qr.r_entry(i, i);
    }
    // Undo the permutation.
    let perm = qr.permutation.as_ref().expect("pivoted factorization");
    let mut x = vec![0.0; n];
    for (k, &orig) in perm.iter().enumerate() {
        x[orig - 1] = z[k];
    }
    Ok(SolveResult {
        x: Vector::new(x),
        rank_detected: r,
        steps_taken: n,
        status: if r < n {
            SolveStatus::RankDeficientCompleted
        } else {
            SolveStatus::Converged
        },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One-sided Jacobi SVD of an m×n matrix with m ≥ n.
#[derive(Debug, Clone)]
pub struct SvdFactorization {
    /// Singular values, descending, nonnegative.
    pub singular_values: Vec<f64>,
    /// Left singular vectors (m×n; zero column where σ = 0).
    pub u: DenseMatrix,
    /// Right singular vectors (n×n).
    pub v: DenseMatrix,
}

impl SvdFactorization {
    pub fn decompose(a: &DenseMatrix) -> Result<Self, BaselineError> {
        let (m, n) = (a.rows(), a.cols());
        if m < n {
            return Err(BaselineError::Underdetermined { m, n });
        }
        let mut w = a.clone();
        let mut v = DenseMatrix::identity(n);

        let mut converged = false;
        for _sweep in 0..JACOBI_MAX_SWEEPS {
            let mut rotated = false;
            for p in 1..=n - 1 {
                for q in p + 1..=n {
                    let (app, aqq, apq) = {
                        let cp = w.col(p);
                        let cq = w.col(q);
                        (dot(cp, cp), dot(cq, cq), dot(cp, cq))
                    };
                    if app == 0.0 || aqq == 0.0 {
                        continue;
                    }
                    if apq.abs() <= EPS * (app * aqq).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (aqq - app) / (2.0 * apq);
                    let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    rotate_cols(&mut w, p, q, c, s);
                    rotate_cols(&mut v, p, q, c, s);
                }
            }
            if n == 1 || !rotated {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(BaselineError::JacobiNonConvergence(JACOBI_MAX_SWEEPS));
        }

        // Column norms are the singular values; normalize for U.
        let mut order: Vec<usize> = (1..=n).collect();
        let sigmas: Vec<f64> = (1..=n).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
        order.sort_by(|&a, &b| {
            sigmas[b - 1]
                .partial_cmp(&sigmas[a - 1])
                .expect("singular values are finite")
        });
        let mut s_sorted = Vec::with_capacity(n);
        let mut u = DenseMatrix::zeros(m, n);
        let mut v_sorted = DenseMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            let sigma = sigmas[src - 1];
            s_sorted.push(sigma);
            if sigma > 0.0 {
                let wc = w.col(src);
                let uc = u.col_mut(dst + 1);
                for (ui, &wi) in uc.iter_mut().zip(wc) {
                    *ui = wi / sigma;
                }
            }
            for i in 1..=n {
                v_sorted.set(i, dst + 1, v.get(i, src));
            }
        }
        Ok(Self {
            singular_values: s_sorted,
            u,
            v: v_sorted,
        })
    }

    /// Count of singular values above rcond·σ₁.
    pub fn rank_at(&self, rcond: f64) -> usize {
        let s1 = self.singular_values.first().copied().unwrap_or(0.0);
        self.singular_values
            .iter()
            .filter(|&&s| s > rcond * s1)
            .count()
    }

    /// σ₁ / σ_rank at the given rcond (the condition estimate used for the
    /// result tables).
    pub fn condition_estimate(&self, rcond: f64) -> f64 {
        let r = self.rank_at(rcond);
        if r == 0 {
            return f64::INFINITY;
        }
        self.singular_values[0] / self.singular_values[r - 1]
    }
}

fn rotate_cols(w: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let m = w.rows();
    for i in 1..=m {
        let wp = w.get(i, p);
        let wq = w.get(i, q);
        w.set(i, p, c * wp - s * wq);
        w.set(i, q, s * wp + c * wq);
    }
}

/// SVD least squares (DGELSS analogue): x̂ = Σ_{σ_k > rcond·σ₁} (u_kᵀb/σ_k) v_k.
///
/// Also the verification oracle: the truncated-SVD solution is the
/// minimum-norm least-squares solution of the rank-truncated problem.
pub fn svd_least_squares(
    a: &DenseMatrix,
    b: &Vector,
    rcond: f64,
) -> Result<SolveResult, BaselineError> {
    check_shape(a, b)?;
    let start = Instant::now();
    let n = a.cols();
    let svd = SvdFactorization::decompose(a)?;
    let rank = svd.rank_at(rcond);
    let mut x = vec![0.0; n];
    for k in 1..=rank {
        let sigma = svd.singular_values[k - 1];
        let coeff = dot(svd.u.col(k), b.as_slice()) / sigma;
        for (xi, &vik) in x.iter_mut().zip(svd.v.col(k)) {
            *xi += coeff * vik;
        }
    }
    Ok(SolveResult {
        x: Vector::new(x),
        rank_detected: rank,
        steps_taken: n,
        status: if rank < n {
            SolveStatus::RankDeficientCompleted
        } else {
            SolveStatus::Converged
        },
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Minimum-norm solution of a (possibly underdetermined) compatible system
/// via the SVD pseudoinverse. Used as the oracle for the Huang minimum-norm
/// property; decomposes Aᵀ when m < n.
pub fn pseudoinverse_solve(
    a: &DenseMatrix,
    b: &Vector,
    rcond: f64,
) -> Result<Vector, BaselineError> {
    if a.rows() >= a.cols() {
        return Ok(svd_least_squares(a, b, rcond)?.x);
    }
    // A = U Σ Vᵀ with A^T = V Σ Uᵀ from the tall decomposition of Aᵀ.
    let at = a.transpose();
    let svd = SvdFactorization::decompose(&at)?;
    let rank = svd.rank_at(rcond);
    // x = A⁺ b = Σ_k v_k-of-A (u_k-of-Aᵀ ... ): with At = U' Σ V'ᵀ, we have
    // A = V' Σ U'ᵀ, so A⁺ b = Σ_k u'_k (v'_kᵀ b) / σ_k.
    let n = a.cols();
    let mut x = vec![0.0; n];
    for k in 1..=rank {
        let sigma = svd.singular_values[k - 1];
        let coeff = dot(svd.v.col(k), b.as_slice()) / sigma;
        for (xi, &uik) in x.iter_mut().zip(svd.u.col(k)) {
            *xi += coeff * uik;
        }
    }
    Ok(Vector::new(x))
}
