//! Dense real-matrix numeric kernel.
//!
//! Thin layer over nalgebra factorizations with the conventions the rest of
//! the crate relies on: relative rank cutoffs, a fixed eigenvalue ordering,
//! deterministic eigenvector normalization, and explicit errors instead of
//! panics. All routines are single-threaded and bit-reproducible for
//! identical inputs within one build.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative singular-value / eigenvalue cutoff used when none is given.
pub const DEFAULT_RCOND: f64 = 1e-12;

/// Relative symmetry tolerance accepted by [`inv_sqrt_psd`].
pub const SYMMETRY_TOL: f64 = 1e-10;

const MAX_FACTORIZATION_ITERS: usize = 10_000;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("shape mismatch in {op}: left is {left_rows}x{left_cols}, right is {right_rows}x{right_cols}")]
    ShapeMismatch {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is not symmetric: relative asymmetry {asymmetry:.3e} exceeds {tol:.3e}")]
    NotSymmetric { asymmetry: f64, tol: f64 },
    #[error("{op} did not converge within {iterations} iterations")]
    NotConverged { op: &'static str, iterations: usize },
}

/// Rejects matrices with NaN or infinite entries.
pub fn ensure_finite(a: &Matrix) -> Result<(), LinalgError> {
    for col in 0..a.ncols() {
        for row in 0..a.nrows() {
            if !a[(row, col)].is_finite() {
                return Err(LinalgError::NonFinite { row, col });
            }
        }
    }
    Ok(())
}

/// Thin singular value decomposition `a = u * diag(s) * v_t` with
/// `k = min(rows, cols)` retained columns, singular values descending.
/// Columns of `u` paired with zero singular values are zero vectors.
pub(crate) struct ThinSvd {
    pub u: Matrix,
    pub singular_values: Vector,
    pub v_t: Matrix,
}

const MAX_JACOBI_SWEEPS: usize = 64;

/// One-sided Jacobi SVD, preceded by a Householder QR reduction for tall
/// matrices so the iteration runs on a square factor.
///
/// Jacobi is slower than bidiagonalization methods but converges on every
/// finite matrix (including exactly rank-deficient ones) and resolves
/// small singular values to high relative accuracy, which the cutoff
/// logic in [`pinv`] and [`lstsq`] relies on.
pub(crate) fn thin_svd(a: &Matrix) -> Result<ThinSvd, LinalgError> {
    ensure_finite(a)?;
    if a.nrows() >= a.ncols() {
        thin_svd_tall(a)
    } else {
        let t = thin_svd_tall(&a.transpose())?;
        Ok(ThinSvd {
            u: t.v_t.transpose(),
            singular_values: t.singular_values,
            v_t: t.u.transpose(),
        })
    }
}

fn thin_svd_tall(a: &Matrix) -> Result<ThinSvd, LinalgError> {
    let (m, n) = a.shape();
    let (q, mut g) = if m > n {
        let qr = a.clone().qr();
        (Some(qr.q()), qr.r())
    } else {
        (None, a.clone())
    };
    let rows = g.nrows();
    let mut v = Matrix::identity(n, n);
    let mut converged = n < 2;
    // Rounding in a length-`rows` dot product leaves correlations of order
    // `rows * eps`, so demanding plain `eps`-relative orthogonality can cycle
    // forever on the noise other rotations reintroduce.
    let tol = f64::EPSILON * (rows as f64).max(4.0);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut rotated = false;
        // Columns negligible against the largest one carry no resolvable
        // singular value; rotating against them only churns rounding noise
        // (rank-deficient inputs produce such columns exactly).
        let max_sq = (0..n)
            .map(|j| g.column(j).norm_squared())
            .fold(0.0f64, f64::max);
        let negligible = max_sq * (f64::EPSILON * f64::EPSILON);
        for p in 0..n.saturating_sub(1) {
            for qc in p + 1..n {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = 0.0;
                for r in 0..rows {
                    let gp = g[(r, p)];
                    let gq = g[(r, qc)];
                    app += gp * gp;
                    aqq += gq * gq;
                    apq += gp * gq;
                }
                if app <= negligible || aqq <= negligible {
                    continue;
                }
                if apq == 0.0 || apq.abs() <= tol * app.sqrt() * aqq.sqrt() {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (tau - (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let gp = g[(r, p)];
                    let gq = g[(r, qc)];
                    g[(r, p)] = c * gp - s * gq;
                    g[(r, qc)] = s * gp + c * gq;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, qc)];
                    v[(r, p)] = c * vp - s * vq;
                    v[(r, qc)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::NotConverged {
            op: "jacobi_svd",
            iterations: MAX_JACOBI_SWEEPS,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let norms: Vec<f64> = (0..n).map(|j| g.column(j).norm()).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap().then(i.cmp(&j)));

    let mut u_small = Matrix::zeros(rows, n);
    let mut singular_values = Vector::zeros(n);
    let mut v_t = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let sigma = norms[src];
        singular_values[dst] = sigma;
        if sigma > 0.0 {
            for r in 0..rows {
                u_small[(r, dst)] = g[(r, src)] / sigma;
            }
        }
        for r in 0..n {
            v_t[(dst, r)] = v[(r, src)];
        }
    }
    let u = match q {
        Some(q) => q * u_small,
        None => u_small,
    };
    Ok(ThinSvd {
        u,
        singular_values,
        v_t,
    })
}

/// Moore-Penrose pseudoinverse via SVD.
///
/// Singular values at or below `rcond * sigma_max` are inverted as zero;
/// `rcond` defaults to [`DEFAULT_RCOND`]. The zero matrix maps to the zero
/// matrix of transposed shape.
pub fn pinv(a: &Matrix, rcond: Option<f64>) -> Result<Matrix, LinalgError> {
    let svd = thin_svd(a)?;
    let sigma_max = svd.singular_values.max();
    let cutoff = rcond.unwrap_or(DEFAULT_RCOND) * sigma_max;
    let mut sigma_pinv = DMatrix::zeros(svd.v_t.nrows(), svd.u.ncols());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            sigma_pinv[(i, i)] = 1.0 / s;
        }
    }
    Ok(svd.v_t.transpose() * sigma_pinv * svd.u.transpose())
}

/// Minimum-norm least-squares solution of `a * x = b` for matrix right-hand
/// sides, computed by applying the truncated SVD of `a` to `b`.
pub fn lstsq(a: &Matrix, b: &Matrix, rcond: Option<f64>) -> Result<Matrix, LinalgError> {
    ensure_finite(b)?;
    if a.nrows() != b.nrows() {
        return Err(LinalgError::ShapeMismatch {
            op: "lstsq",
            left_rows: a.nrows(),
            left_cols: a.ncols(),
            right_rows: b.nrows(),
            right_cols: b.ncols(),
        });
    }
    let svd = thin_svd(a)?;
    let sigma_max = svd.singular_values.max();
    let cutoff = rcond.unwrap_or(DEFAULT_RCOND) * sigma_max;
    let mut ut_b = svd.u.transpose() * b;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let w = if s > cutoff && s > 0.0 { 1.0 / s } else { 0.0 };
        ut_b.row_mut(i).scale_mut(w);
    }
    Ok(svd.v_t.transpose() * ut_b)
}

/// Eigenvalues (descending modulus) and right eigenvectors of a square real
/// matrix.
///
/// Ties in modulus are broken by descending real part, then descending
/// imaginary part, which keeps conjugate pairs adjacent with the positive
/// imaginary part first. Each eigenvector has unit Euclidean norm and its
/// first component of magnitude above `1e-12` is rotated onto the positive
/// real axis.
#[derive(Debug, Clone)]
pub struct ComplexSpectrum {
    pub eigenvalues: Vec<Complex64>,
    /// Column `i` is the eigenvector paired with `eigenvalues[i]`.
    pub eigenvectors: CMatrix,
}

impl ComplexSpectrum {
    /// Largest residual `‖A v - λ v‖₂` over all returned pairs.
    pub fn max_residual(&self, a: &Matrix) -> f64 {
        let ac = complex_cast(a);
        let mut worst = 0.0f64;
        for (i, lambda) in self.eigenvalues.iter().enumerate() {
            let v = self.eigenvectors.column(i);
            let r = (&ac * v) - v * *lambda;
            worst = worst.max(r.norm());
        }
        worst
    }
}

fn complex_cast(a: &Matrix) -> CMatrix {
    CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| Complex64::new(a[(i, j)], 0.0))
}

/// Nonsymmetric eigendecomposition.
///
/// Eigenvalues come from the real Schur form; eigenvectors are recovered by
/// shifted inverse iteration, in real arithmetic for real eigenvalues so
/// those vectors carry an exactly zero imaginary part.
pub fn eig(a: &Matrix) -> Result<ComplexSpectrum, LinalgError> {
    ensure_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(LinalgError::ShapeMismatch {
            op: "eig",
            left_rows: a.nrows(),
            left_cols: a.ncols(),
            right_rows: a.nrows(),
            right_cols: a.nrows(),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(ComplexSpectrum {
            eigenvalues: Vec::new(),
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, MAX_FACTORIZATION_ITERS)
        .ok_or(LinalgError::NotConverged {
            op: "schur",
            iterations: MAX_FACTORIZATION_ITERS,
        })?;
    let mut eigenvalues: Vec<Complex64> = schur.complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|a, b| {
        (b.norm(), b.re, b.im)
            .partial_cmp(&(a.norm(), a.re, a.im))
            .expect("finite eigenvalues")
    });

    let a_norm = a.norm();
    let ac = complex_cast(a);
    let mut vectors = CMatrix::zeros(n, n);
    let mut i = 0;
    while i < eigenvalues.len() {
        let lambda = eigenvalues[i];
        let conjugate_next = i + 1 < eigenvalues.len()
            && lambda.im > 0.0
            && eigenvalues[i + 1] == lambda.conj();
        let v = eig_vector(a, &ac, lambda, a_norm, i)?;
        vectors.set_column(i, &v);
        if conjugate_next {
            let vc = normalize_phase(v.map(|z| z.conj()));
            vectors.set_column(i + 1, &vc);
            i += 2;
        } else {
            i += 1;
        }
    }
    Ok(ComplexSpectrum {
        eigenvalues,
        eigenvectors: vectors,
    })
}

fn eig_vector(
    a: &Matrix,
    ac: &CMatrix,
    lambda: Complex64,
    a_norm: f64,
    index: usize,
) -> Result<CVector, LinalgError> {
    let scale = a_norm.max(1.0);
    let accept = 1e-10 * scale;
    let contract = 1e-8 * scale;
    let mut best: Option<(f64, CVector)> = None;
    for attempt in 0..4 {
        let delta = scale * 1e-12 * 100f64.powi(attempt);
        let v = if lambda.im == 0.0 {
            real_inverse_iteration(a, lambda.re, delta, index)
        } else {
            complex_inverse_iteration(ac, lambda, delta, index)
        };
        let Some(v) = v else { continue };
        let residual = ((ac * &v) - &v * lambda).norm();
        if residual <= accept {
            return Ok(normalize_phase(v));
        }
        if best.as_ref().is_none_or(|(r, _)| residual < *r) {
            best = Some((residual, v));
        }
    }
    match best {
        Some((residual, v)) if residual <= contract => Ok(normalize_phase(v)),
        _ => Err(LinalgError::NotConverged {
            op: "eigenvector inverse iteration",
            iterations: 4,
        }),
    }
}

fn iteration_start(n: usize, index: usize) -> Vector {
    let mut v = DVector::from_element(n, 1.0);
    v[index % n] += 0.5;
    v /= v.norm();
    v
}

fn real_inverse_iteration(a: &Matrix, lambda: f64, delta: f64, index: usize) -> Option<CVector> {
    let n = a.nrows();
    let mut shifted = a.clone();
    for d in 0..n {
        shifted[(d, d)] -= lambda + delta;
    }
    let lu = shifted.lu();
    let mut v = iteration_start(n, index);
    for _ in 0..8 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = w / norm;
    }
    Some(CVector::from_fn(n, |i, _| Complex64::new(v[i], 0.0)))
}

fn complex_inverse_iteration(
    ac: &CMatrix,
    lambda: Complex64,
    delta: f64,
    index: usize,
) -> Option<CVector> {
    let n = ac.nrows();
    let mut shifted = ac.clone();
    let shift = lambda + Complex64::new(delta, delta);
    for d in 0..n {
        shifted[(d, d)] -= shift;
    }
    let lu = shifted.lu();
    let start = iteration_start(n, index);
    let mut v = CVector::from_fn(n, |i, _| Complex64::new(start[i], 0.0));
    for _ in 0..8 {
        let w = lu.solve(&v)?;
        let norm = w.norm();
        if !norm.is_finite() || norm == 0.0 {
            return None;
        }
        v = w / Complex64::new(norm, 0.0);
    }
    Some(v)
}

/// Unit norm, with the first component of magnitude above `1e-12` made real
/// and positive.
fn normalize_phase(mut v: CVector) -> CVector {
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    if let Some(lead) = v.iter().find(|z| z.norm() > 1e-12) {
        let phase = lead / Complex64::new(lead.norm(), 0.0);
        v *= phase.conj();
    }
    v
}

fn psd_spectral_map(
    a: &Matrix,
    ridge: f64,
    rcond: Option<f64>,
    f: impl Fn(f64) -> f64,
) -> Result<Matrix, LinalgError> {
    ensure_finite(a)?;
    if a.nrows() != a.ncols() {
        return Err(LinalgError::ShapeMismatch {
            op: "psd spectral map",
            left_rows: a.nrows(),
            left_cols: a.ncols(),
            right_rows: a.nrows(),
            right_cols: a.nrows(),
        });
    }
    let norm = a.norm();
    let asymmetry = (a - a.transpose()).norm();
    if norm > 0.0 && asymmetry > SYMMETRY_TOL * norm {
        return Err(LinalgError::NotSymmetric {
            asymmetry: asymmetry / norm,
            tol: SYMMETRY_TOL,
        });
    }
    let sym = (a + a.transpose()) * 0.5;
    let decomp = nalgebra::linalg::SymmetricEigen::new(sym);
    let shifted: Vec<f64> = decomp.eigenvalues.iter().map(|&l| l + ridge).collect();
    let d_max = shifted.iter().cloned().fold(0.0f64, f64::max);
    let cutoff = rcond.unwrap_or(DEFAULT_RCOND) * d_max;
    let weights = DVector::from_iterator(
        shifted.len(),
        shifted
            .iter()
            .map(|&d| if d > cutoff && d > 0.0 { f(d) } else { 0.0 }),
    );
    let q = &decomp.eigenvectors;
    let mapped = q * DMatrix::from_diagonal(&weights) * q.transpose();
    Ok((&mapped + mapped.transpose()) * 0.5)
}

/// Inverse principal square root of a symmetric PSD matrix after a ridge
/// shift: `(a + ridge * I)^(-1/2)`.
///
/// Shifted eigenvalues at or below `rcond` times the largest shifted
/// eigenvalue are inverted as zero, so the result acts only on the retained
/// eigenspace. Asymmetry beyond [`SYMMETRY_TOL`] (relative) is an error;
/// anything smaller is symmetrized away.
pub fn inv_sqrt_psd(a: &Matrix, ridge: f64, rcond: Option<f64>) -> Result<Matrix, LinalgError> {
    psd_spectral_map(a, ridge, rcond, |d| 1.0 / d.sqrt())
}

/// Pseudoinverse of a symmetric PSD matrix after a ridge shift, sharing the
/// cutoff convention of [`inv_sqrt_psd`].
pub fn psd_pinv(a: &Matrix, ridge: f64, rcond: Option<f64>) -> Result<Matrix, LinalgError> {
    psd_spectral_map(a, ridge, rcond, |d| 1.0 / d)
}
