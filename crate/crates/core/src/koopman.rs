//! Koopman operator approximation with trainable dictionaries.
//!
//! From lagged snapshot pairs `(x_j, y_j)` and a dictionary `psi`, the
//! feature matrices `Psi_x`, `Psi_y` (`n x m`) define the regression
//! `min_K ||Psi_y - K^T Psi_x||_F^2`, solved in closed form by
//! [`edmd_solve`] or iteratively through the gradient
//! `2 (C_xx K - C_xy)` with unnormalized covariances `C_xx = Psi_x Psi_x^T`,
//! `C_xy = Psi_x Psi_y^T`.
//!
//! Dictionary quality is scored by the VAMP-2 criterion
//! `||C_xx^(-1/2) C_xy C_yy^(-1/2)||_F^2`, which is invariant under
//! invertible re-mixing of the basis and bounded by the dictionary size.
//! [`vamp2_grad_w`] backpropagates the score through the covariances into
//! the flat dictionary parameters; [`fit_parametric_edmd`] alternates Adam
//! updates of the score over `w` with Adam updates of the regression loss
//! over `K`.

use std::cell::RefCell;

use crate::dictionary::{Dictionary, DictionaryError};
use crate::linalg::{self, CMatrix, ComplexSpectrum, LinalgError, Matrix, Vector};
use crate::optimizers::{
    alternating_adam, AlternatingFit, OptimError, OptimizerConfig, TwoBlockObjective,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KoopmanError {
    #[error("feature matrices have mismatched shapes: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    FeatureShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("operator is {rows}x{cols}, expected {expected}x{expected}")]
    OperatorShape {
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("snapshot batch is empty")]
    EmptyData,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error(transparent)]
    Optimizer(#[from] OptimError),
}

fn check_pair(psi_x: &Matrix, psi_y: &Matrix) -> Result<(), KoopmanError> {
    if psi_x.shape() != psi_y.shape() {
        return Err(KoopmanError::FeatureShapeMismatch {
            left_rows: psi_x.nrows(),
            left_cols: psi_x.ncols(),
            right_rows: psi_y.nrows(),
            right_cols: psi_y.ncols(),
        });
    }
    if psi_x.ncols() == 0 || psi_x.nrows() == 0 {
        return Err(KoopmanError::EmptyData);
    }
    Ok(())
}

/// Unnormalized second moments of a snapshot pair batch.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    pub cxx: Matrix,
    pub cxy: Matrix,
    pub cyy: Matrix,
}

/// `C_xx = Psi_x Psi_x^T`, `C_xy = Psi_x Psi_y^T`, `C_yy = Psi_y Psi_y^T`
/// as plain sums over samples (no `1/m`).
pub fn covariances(psi_x: &Matrix, psi_y: &Matrix) -> Result<CovarianceSet, KoopmanError> {
    check_pair(psi_x, psi_y)?;
    Ok(CovarianceSet {
        cxx: psi_x * psi_x.transpose(),
        cxy: psi_x * psi_y.transpose(),
        cyy: psi_y * psi_y.transpose(),
    })
}

/// Ridge used when none is configured: `1e-8 * tr(C_xx) / n`.
pub fn default_ridge(cxx: &Matrix) -> f64 {
    1e-8 * cxx.trace() / cxx.nrows() as f64
}

/// Minimum-norm solution of `min_K ||Psi_y - K^T Psi_x||_F^2`, i.e.
/// `K^T = Psi_y Psi_x^+`.
pub fn edmd_solve(psi_x: &Matrix, psi_y: &Matrix, rcond: Option<f64>) -> Result<Matrix, KoopmanError> {
    check_pair(psi_x, psi_y)?;
    let k = linalg::lstsq(&psi_x.transpose(), &psi_y.transpose(), rcond)?;
    Ok(k)
}

/// Squared Frobenius regression loss `||Psi_y - K^T Psi_x||_F^2`.
pub fn reconstruction_loss(psi_x: &Matrix, psi_y: &Matrix, k: &Matrix) -> Result<f64, KoopmanError> {
    check_pair(psi_x, psi_y)?;
    check_operator(k, psi_x.nrows())?;
    Ok((psi_y - k.transpose() * psi_x).norm_squared())
}

fn check_operator(k: &Matrix, n: usize) -> Result<(), KoopmanError> {
    if k.shape() != (n, n) {
        return Err(KoopmanError::OperatorShape {
            rows: k.nrows(),
            cols: k.ncols(),
            expected: n,
        });
    }
    Ok(())
}

/// Gradient of [`reconstruction_loss`] in `K`:
/// `2 (Psi_x Psi_x^T K - Psi_x Psi_y^T)`.
pub fn grad_k(psi_x: &Matrix, psi_y: &Matrix, k: &Matrix) -> Result<Matrix, KoopmanError> {
    check_pair(psi_x, psi_y)?;
    check_operator(k, psi_x.nrows())?;
    Ok((psi_x * psi_x.transpose() * k - psi_x * psi_y.transpose()) * 2.0)
}

/// Per-sample split of the regression loss:
/// `loss = sum_j ||psi_y_j - K^T psi_x_j||^2`.
pub fn per_sample_loss(psi_x: &Matrix, psi_y: &Matrix, k: &Matrix) -> Result<Vector, KoopmanError> {
    check_pair(psi_x, psi_y)?;
    check_operator(k, psi_x.nrows())?;
    let residual = psi_y - k.transpose() * psi_x;
    Ok(Vector::from_iterator(
        residual.ncols(),
        residual.column_iter().map(|c| c.norm_squared()),
    ))
}

fn select_columns(m: &Matrix, batch: &[usize]) -> Matrix {
    m.select_columns(batch.iter())
}

/// VAMP-2 score `||(C_xx + ridge I)^(-1/2) C_xy (C_yy + ridge I)^(-1/2)||_F^2`.
///
/// Bounded by the dictionary size `n`, invariant under invertible row
/// re-mixing of the features, and maximal when the dictionary spans the
/// dominant spectral components of the transfer operator.
pub fn vamp2_score(
    psi_x: &Matrix,
    psi_y: &Matrix,
    ridge: f64,
    rcond: Option<f64>,
) -> Result<f64, KoopmanError> {
    let cov = covariances(psi_x, psi_y)?;
    score_from_covariances(&cov, ridge, rcond)
}

pub(crate) fn score_from_covariances(
    cov: &CovarianceSet,
    ridge: f64,
    rcond: Option<f64>,
) -> Result<f64, KoopmanError> {
    let wx = linalg::inv_sqrt_psd(&cov.cxx, ridge, rcond)?;
    let wy = linalg::inv_sqrt_psd(&cov.cyy, ridge, rcond)?;
    Ok((wx * &cov.cxy * wy).norm_squared())
}

/// Trace form of the score, `tr(C_xx^+ C_xy C_yy^+ C_yx)`; agrees with
/// [`vamp2_score`] for the same ridge and cutoff.
pub fn vamp2_score_trace(
    psi_x: &Matrix,
    psi_y: &Matrix,
    ridge: f64,
    rcond: Option<f64>,
) -> Result<f64, KoopmanError> {
    let cov = covariances(psi_x, psi_y)?;
    let p = linalg::psd_pinv(&cov.cxx, ridge, rcond)?;
    let q = linalg::psd_pinv(&cov.cyy, ridge, rcond)?;
    Ok((p * &cov.cxy * q * cov.cxy.transpose()).trace())
}

/// Gradient of the VAMP-2 score in the flat dictionary parameters, with
/// frozen entries masked to zero.
///
/// Derived from the trace form with ridged inverses `P = (C_xx + e I)^-1`,
/// `Q = (C_yy + e I)^-1`:
///
/// ```text
/// dR/dPsi_x = 2 (P C_xy Q Psi_y - P C_xy Q C_yx P Psi_x)
/// dR/dPsi_y = 2 (Q C_yx P Psi_x - Q C_yx P C_xy Q Psi_y)
/// ```
///
/// then contracted with the dictionary parameter Jacobians at `x` and `y`.
pub fn vamp2_grad_w(
    dict: &Dictionary,
    w: &Vector,
    x: &Matrix,
    y: &Matrix,
    ridge: f64,
    rcond: Option<f64>,
) -> Result<Vector, KoopmanError> {
    let psi_x = dict.evaluate(x, w)?;
    let psi_y = dict.evaluate(y, w)?;
    let cov = covariances(&psi_x, &psi_y)?;
    let p = linalg::psd_pinv(&cov.cxx, ridge, rcond)?;
    let q = linalg::psd_pinv(&cov.cyy, ridge, rcond)?;

    let pcq = &p * &cov.cxy * &q;            // P C_xy Q
    let d_psi_x = (&pcq * &psi_y - &pcq * cov.cxy.transpose() * &p * &psi_x) * 2.0;
    let qcp = pcq.transpose();               // Q C_yx P
    let d_psi_y = (&qcp * &psi_x - &qcp * &cov.cxy * &q * &psi_y) * 2.0;

    let jac_x = dict.param_jacobian(x, w)?;
    let jac_y = dict.param_jacobian(y, w)?;
    let mut grad = Vector::zeros(dict.param_len());
    jac_x.accumulate_contraction(dict, &d_psi_x, &mut grad);
    jac_y.accumulate_contraction(dict, &d_psi_y, &mut grad);
    dict.mask_gradient(&mut grad);
    Ok(grad)
}

/// Eigenvalues and eigenfunction coefficients of a fitted operator.
///
/// Eigenfunctions are `phi_i(x) = v_i^T psi(x)` for the right eigenvectors
/// `v_i` of `K`, ordered by descending eigenvalue modulus.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    pub spectrum: ComplexSpectrum,
}

impl SpectralResult {
    /// Evaluates the leading `modes` eigenfunctions on a state batch,
    /// returning a `modes x m` complex matrix.
    pub fn eigenfunction_values(
        &self,
        dict: &Dictionary,
        w: &Vector,
        x: &Matrix,
        modes: usize,
    ) -> Result<CMatrix, KoopmanError> {
        let psi = dict.evaluate(x, w)?;
        let n = psi.nrows();
        let m = psi.ncols();
        let modes = modes.min(self.spectrum.eigenvalues.len());
        let mut values = CMatrix::zeros(modes, m);
        for i in 0..modes {
            let v = self.spectrum.eigenvectors.column(i);
            for j in 0..m {
                let mut acc = num_complex::Complex64::new(0.0, 0.0);
                for r in 0..n {
                    acc += v[r] * psi[(r, j)];
                }
                values[(i, j)] = acc;
            }
        }
        Ok(values)
    }
}

/// Spectral decomposition of the operator matrix.
pub fn spectral_decompose(k: &Matrix) -> Result<SpectralResult, KoopmanError> {
    let spectrum = linalg::eig(k)?;
    Ok(SpectralResult { spectrum })
}

/// A fitted Koopman approximation: dictionary structure, flat parameters,
/// operator matrix, and the lag time of the snapshot pairs.
#[derive(Debug, Clone)]
pub struct KoopmanModel {
    pub dictionary: Dictionary,
    pub params: Vector,
    pub k: Matrix,
    pub lag_time: f64,
}

impl KoopmanModel {
    pub fn spectral(&self) -> Result<SpectralResult, KoopmanError> {
        spectral_decompose(&self.k)
    }
}

/// Two-block objective for the parametric fit. Feature matrices are cached
/// per parameter vector because each iteration queries the same `w` several
/// times.
struct EdmdObjective<'a> {
    dict: &'a Dictionary,
    x: &'a Matrix,
    y: &'a Matrix,
    ridge: f64,
    rcond: Option<f64>,
    cache: RefCell<Option<(Vector, Matrix, Matrix)>>,
}

impl<'a> EdmdObjective<'a> {
    fn features(&self, w: &Vector) -> (Matrix, Matrix) {
        if let Some((cached_w, psi_x, psi_y)) = self.cache.borrow().as_ref() {
            if cached_w == w {
                return (psi_x.clone(), psi_y.clone());
            }
        }
        let psi_x = self.dict.evaluate(self.x, w).expect("validated inputs");
        let psi_y = self.dict.evaluate(self.y, w).expect("validated inputs");
        *self.cache.borrow_mut() = Some((w.clone(), psi_x.clone(), psi_y.clone()));
        (psi_x, psi_y)
    }
}

impl<'a> TwoBlockObjective for EdmdObjective<'a> {
    fn coeff_shape(&self) -> (usize, usize) {
        (self.dict.len(), self.dict.len())
    }
    fn param_len(&self) -> usize {
        self.dict.param_len()
    }
    fn sample_count(&self) -> usize {
        self.x.ncols()
    }
    fn loss_coeff(&self, coeffs: &Matrix, params: &Vector) -> f64 {
        let (psi_x, psi_y) = self.features(params);
        reconstruction_loss(&psi_x, &psi_y, coeffs)
            .expect("validated inputs")
            .sqrt()
    }
    fn loss_param(&self, _coeffs: &Matrix, params: &Vector) -> f64 {
        let (psi_x, psi_y) = self.features(params);
        vamp2_score(&psi_x, &psi_y, self.ridge, self.rcond).expect("validated inputs")
    }
    fn grad_coeff(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Matrix {
        let (psi_x, psi_y) = self.features(params);
        match batch {
            None => grad_k(&psi_x, &psi_y, coeffs).expect("validated inputs"),
            Some(idx) => {
                let bx = select_columns(&psi_x, idx);
                let by = select_columns(&psi_y, idx);
                let scale = self.sample_count() as f64 / idx.len() as f64;
                grad_k(&bx, &by, coeffs).expect("validated inputs") * scale
            }
        }
    }
    fn grad_param(&self, _coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Vector {
        // score ascent: Adam minimizes, so hand it the negated gradient
        let g = match batch {
            None => vamp2_grad_w(self.dict, params, self.x, self.y, self.ridge, self.rcond),
            Some(idx) => {
                let bx = select_columns(self.x, idx);
                let by = select_columns(self.y, idx);
                let scale = self.sample_count() as f64 / idx.len() as f64;
                vamp2_grad_w(self.dict, params, &bx, &by, self.ridge, self.rcond).map(|g| g * scale)
            }
        };
        -g.expect("validated inputs")
    }
}

/// Alternating fit of dictionary parameters (VAMP-2 ascent) and operator
/// matrix (regression descent). `k0 = None` warm-starts from
/// [`edmd_solve`] at `w0`. History records the unsquared regression loss
/// and the VAMP-2 score per iteration.
pub fn fit_parametric_edmd(
    x: &Matrix,
    y: &Matrix,
    lag_time: f64,
    dict: &Dictionary,
    w0: Vector,
    k0: Option<Matrix>,
    ridge: Option<f64>,
    cfg: &OptimizerConfig,
) -> Result<(KoopmanModel, AlternatingFit), KoopmanError> {
    let psi_x0 = dict.evaluate(x, &w0)?;
    let psi_y0 = dict.evaluate(y, &w0)?;
    check_pair(&psi_x0, &psi_y0)?;
    let ridge = ridge.unwrap_or_else(|| default_ridge(&(&psi_x0 * psi_x0.transpose())));
    let k0 = match k0 {
        Some(k) => {
            check_operator(&k, dict.len())?;
            k
        }
        None => edmd_solve(&psi_x0, &psi_y0, None)?,
    };
    let objective = EdmdObjective {
        dict,
        x,
        y,
        ridge,
        rcond: None,
        cache: RefCell::new(None),
    };
    let fit = alternating_adam(&objective, k0, w0, cfg)?;
    let model = KoopmanModel {
        dictionary: dict.clone(),
        params: fit.params.clone(),
        k: fit.coeffs.clone(),
        lag_time,
    };
    Ok((model, fit))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionary::BasisSpec;
    use approx::assert_relative_eq;

    fn pseudo_random_matrix(rows: usize, cols: usize, salt: usize) -> Matrix {
        Matrix::from_fn(rows, cols, |i, j| {
            (((i * 31 + j * 17 + salt * 13 + i * j) as f64) * 0.7311).sin()
        })
    }

    #[test]
    fn covariances_coincide_for_equal_features() {
        let psi = pseudo_random_matrix(3, 12, 1);
        let cov = covariances(&psi, &psi).unwrap();
        assert_eq!(cov.cxx, cov.cyy);
        assert_eq!(cov.cxx, cov.cxy);
    }

    #[test]
    fn covariances_identity_features() {
        let eye = Matrix::identity(2, 2);
        let cov = covariances(&eye, &eye).unwrap();
        assert_eq!(cov.cxx, Matrix::identity(2, 2));
    }

    #[test]
    fn covariance_diagonals_are_nonnegative() {
        let psi_x = pseudo_random_matrix(4, 30, 2);
        let psi_y = pseudo_random_matrix(4, 30, 3);
        let cov = covariances(&psi_x, &psi_y).unwrap();
        let eig = nalgebra::linalg::SymmetricEigen::new(cov.cxx.clone());
        assert!(eig.eigenvalues.iter().all(|&l| l >= -1e-10));
    }

    #[test]
    fn edmd_identity_when_y_equals_x() {
        let psi = pseudo_random_matrix(3, 25, 4);
        let k = edmd_solve(&psi, &psi, None).unwrap();
        assert_relative_eq!(k, Matrix::identity(3, 3), epsilon = 1e-10);
    }

    #[test]
    fn edmd_recovers_scaling() {
        let psi = pseudo_random_matrix(3, 25, 5);
        let k = edmd_solve(&psi, &(&psi * 2.0), None).unwrap();
        assert_relative_eq!(k, Matrix::identity(3, 3) * 2.0, epsilon = 1e-10);
    }

    #[test]
    fn edmd_recovers_planted_operator() {
        let psi = pseudo_random_matrix(4, 40, 6);
        let m = pseudo_random_matrix(4, 4, 7);
        let psi_y = m.transpose() * &psi;
        let k = edmd_solve(&psi, &psi_y, None).unwrap();
        assert_relative_eq!(k, m, epsilon = 1e-9);
    }

    #[test]
    fn gradient_vanishes_at_closed_form_solution() {
        let psi_x = pseudo_random_matrix(3, 30, 8);
        let psi_y = pseudo_random_matrix(3, 30, 9);
        let k = edmd_solve(&psi_x, &psi_y, None).unwrap();
        let g = grad_k(&psi_x, &psi_y, &k).unwrap();
        assert!(g.norm() <= 1e-8 * psi_x.norm() * psi_y.norm());
    }

    #[test]
    fn zero_operator_loss_is_feature_energy() {
        let psi_x = pseudo_random_matrix(3, 20, 10);
        let psi_y = pseudo_random_matrix(3, 20, 11);
        let loss = reconstruction_loss(&psi_x, &psi_y, &Matrix::zeros(3, 3)).unwrap();
        assert_relative_eq!(loss, psi_y.norm_squared(), epsilon = 1e-12);
    }

    #[test]
    fn grad_k_matches_finite_differences() {
        let psi_x = pseudo_random_matrix(3, 15, 12);
        let psi_y = pseudo_random_matrix(3, 15, 13);
        let k = pseudo_random_matrix(3, 3, 14);
        let g = grad_k(&psi_x, &psi_y, &k).unwrap();
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..3 {
                let mut kp = k.clone();
                kp[(i, j)] += h;
                let mut km = k.clone();
                km[(i, j)] -= h;
                let fd = (reconstruction_loss(&psi_x, &psi_y, &kp).unwrap()
                    - reconstruction_loss(&psi_x, &psi_y, &km).unwrap())
                    / (2.0 * h);
                let scale = fd.abs().max(g[(i, j)].abs()).max(1.0);
                assert!((fd - g[(i, j)]).abs() / scale <= 1e-6);
            }
        }
    }

    #[test]
    fn per_sample_losses_sum_to_total() {
        let psi_x = pseudo_random_matrix(4, 25, 15);
        let psi_y = pseudo_random_matrix(4, 25, 16);
        let k = pseudo_random_matrix(4, 4, 17);
        let total = reconstruction_loss(&psi_x, &psi_y, &k).unwrap();
        let parts = per_sample_loss(&psi_x, &psi_y, &k).unwrap();
        assert_relative_eq!(parts.sum(), total, epsilon = 1e-12 * total.max(1.0));
    }

    #[test]
    fn duplicated_sample_adds_its_loss() {
        let psi_x = pseudo_random_matrix(3, 10, 18);
        let psi_y = pseudo_random_matrix(3, 10, 19);
        let k = pseudo_random_matrix(3, 3, 20);
        let parts = per_sample_loss(&psi_x, &psi_y, &k).unwrap();
        let mut xs = psi_x.clone().insert_column(10, 0.0);
        xs.set_column(10, &psi_x.column(4));
        let mut ys = psi_y.clone().insert_column(10, 0.0);
        ys.set_column(10, &psi_y.column(4));
        let total = reconstruction_loss(&psi_x, &psi_y, &k).unwrap();
        let total_dup = reconstruction_loss(&xs, &ys, &k).unwrap();
        assert_relative_eq!(total_dup, total + parts[4], epsilon = 1e-10);
    }

    #[test]
    fn vamp2_score_full_rank_equal_features_is_n() {
        let psi = pseudo_random_matrix(3, 40, 21);
        let score = vamp2_score(&psi, &psi, 0.0, None).unwrap();
        assert_relative_eq!(score, 3.0, epsilon = 1e-8);
    }

    #[test]
    fn vamp2_score_decays_for_independent_noise() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut noise = |m: usize| {
            Matrix::from_fn(3, m, |_, _| {
                let u: f64 = rng.random::<f64>();
                u - 0.5
            })
        };
        let small = vamp2_score(&noise(100), &noise(100), 0.0, None).unwrap();
        let large = vamp2_score(&noise(20_000), &noise(20_000), 0.0, None).unwrap();
        assert!(large < small, "score should decay with sample count");
        assert!(large < 0.2, "independent features should score near zero, got {large}");
    }

    #[test]
    fn vamp2_score_invariant_under_basis_remixing() {
        let psi_x = pseudo_random_matrix(3, 50, 22);
        let psi_y = pseudo_random_matrix(3, 50, 23);
        let t = Matrix::from_row_slice(3, 3, &[2.0, 0.3, -0.5, 0.0, 1.5, 0.7, 0.1, 0.0, 0.9]);
        let base = vamp2_score(&psi_x, &psi_y, 0.0, None).unwrap();
        let mixed = vamp2_score(&(&t * psi_x), &(&t * psi_y), 0.0, None).unwrap();
        assert_relative_eq!(base, mixed, epsilon = 1e-8 * base.max(1.0));
    }

    #[test]
    fn vamp2_score_bounded_by_dictionary_size() {
        for salt in 0..5 {
            let psi_x = pseudo_random_matrix(4, 30, 100 + salt);
            let psi_y = pseudo_random_matrix(4, 30, 200 + salt);
            let score = vamp2_score(&psi_x, &psi_y, 0.0, None).unwrap();
            assert!(score <= 4.0 + 1e-8, "score {score} exceeds bound");
        }
    }

    #[test]
    fn vamp2_trace_and_frobenius_forms_agree() {
        let psi_x = pseudo_random_matrix(4, 35, 24);
        let psi_y = pseudo_random_matrix(4, 35, 25);
        for ridge in [0.0, 1e-6, 0.1] {
            let a = vamp2_score(&psi_x, &psi_y, ridge, None).unwrap();
            let b = vamp2_score_trace(&psi_x, &psi_y, ridge, None).unwrap();
            assert_relative_eq!(a, b, epsilon = 1e-8 * a.max(1.0));
        }
    }

    fn gaussian_dictionary(centers: &[f64], sigma: f64) -> (Dictionary, Vector) {
        let specs: Vec<BasisSpec> = centers
            .iter()
            .map(|&c| BasisSpec::GaussianRbf {
                center: vec![c],
                bandwidth: sigma,
            })
            .collect();
        Dictionary::build(1, &specs).unwrap()
    }

    #[test]
    fn vamp2_grad_zero_for_frozen_dictionary() {
        let (mut dict, w) = gaussian_dictionary(&[-0.5, 0.5], 0.6);
        dict.set_trainable(vec![false; dict.param_len()]).unwrap();
        let x = pseudo_random_matrix(1, 30, 26);
        let y = pseudo_random_matrix(1, 30, 27);
        let g = vamp2_grad_w(&dict, &w, &x, &y, 1e-6, None).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn vamp2_grad_matches_finite_differences() {
        let (dict, w) = gaussian_dictionary(&[-0.6, 0.1, 0.8], 0.5);
        let x = pseudo_random_matrix(1, 50, 28);
        let y = &x * 0.8 + pseudo_random_matrix(1, 50, 29) * 0.1;
        let ridge = 1e-6;
        let g = vamp2_grad_w(&dict, &w, &x, &y, ridge, None).unwrap();
        for p in 0..dict.param_len() {
            let h = 1e-5 * (1.0 + w[p].abs());
            let mut wp = w.clone();
            wp[p] += h;
            let mut wm = w.clone();
            wm[p] -= h;
            let sp = vamp2_score(
                &dict.evaluate(&x, &wp).unwrap(),
                &dict.evaluate(&y, &wp).unwrap(),
                ridge,
                None,
            )
            .unwrap();
            let sm = vamp2_score(
                &dict.evaluate(&x, &wm).unwrap(),
                &dict.evaluate(&y, &wm).unwrap(),
                ridge,
                None,
            )
            .unwrap();
            let fd = (sp - sm) / (2.0 * h);
            let scale = fd.abs().max(g[p].abs()).max(1e-6);
            assert!(
                (fd - g[p]).abs() / scale <= 1e-5,
                "param {p}: analytic {} vs fd {fd}",
                g[p]
            );
        }
    }

    #[test]
    fn vamp2_grad_respects_mirror_symmetry() {
        // mirrored data and mirrored centers: the gradient of one center
        // equals the negated gradient of its mirror image
        let half_x = pseudo_random_matrix(1, 20, 30);
        let half_y = &half_x * 0.7;
        let mut x = Matrix::zeros(1, 40);
        let mut y = Matrix::zeros(1, 40);
        for j in 0..20 {
            x[(0, j)] = half_x[(0, j)];
            y[(0, j)] = half_y[(0, j)];
            x[(0, 20 + j)] = -half_x[(0, j)];
            y[(0, 20 + j)] = -half_y[(0, j)];
        }
        let (dict, w) = gaussian_dictionary(&[-0.4, 0.4], 0.5);
        let g = vamp2_grad_w(&dict, &w, &x, &y, 1e-6, None).unwrap();
        // slices: [c0, log s0, c1, log s1]
        assert_relative_eq!(g[0], -g[2], epsilon = 1e-9 * g[0].abs().max(1e-12));
        assert_relative_eq!(g[1], g[3], epsilon = 1e-9 * g[1].abs().max(1e-12));
    }

    #[test]
    fn spectral_identity_operator() {
        let s = spectral_decompose(&Matrix::identity(3, 3)).unwrap();
        for l in &s.spectrum.eigenvalues {
            assert_eq!(l.re, 1.0);
            assert_eq!(l.im, 0.0);
        }
    }

    #[test]
    fn spectral_reads_diagonal_in_order() {
        let k = Matrix::from_diagonal(&Vector::from_vec(vec![0.5, 0.9, 0.1]));
        let s = spectral_decompose(&k).unwrap();
        let re: Vec<f64> = s.spectrum.eigenvalues.iter().map(|l| l.re).collect();
        assert_relative_eq!(re[0], 0.9, epsilon = 1e-12);
        assert_relative_eq!(re[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(re[2], 0.1, epsilon = 1e-12);
    }

    #[test]
    fn eigenfunctions_of_diagonal_operator_are_coordinates() {
        let (dict, w) = Dictionary::build(2, &[BasisSpec::Coordinate(0), BasisSpec::Coordinate(1)])
            .unwrap();
        let k = Matrix::from_diagonal(&Vector::from_vec(vec![0.8, 0.3]));
        let s = spectral_decompose(&k).unwrap();
        let x = Matrix::from_column_slice(2, 2, &[1.0, 2.0, -0.5, 0.25]);
        let phi = s.eigenfunction_values(&dict, &w, &x, 2).unwrap();
        // leading mode (0.8) pairs with coordinate 0
        assert_relative_eq!(phi[(0, 0)].re, 1.0, epsilon = 1e-10);
        assert_relative_eq!(phi[(0, 1)].re, -0.5, epsilon = 1e-10);
        assert_relative_eq!(phi[(1, 0)].re, 2.0, epsilon = 1e-10);
    }

    #[test]
    fn parametric_fit_improves_both_objectives() {
        // contraction toward the origin observed through three gaussians
        let x = pseudo_random_matrix(1, 120, 31);
        let y = &x * 0.6;
        let (dict, w0) = gaussian_dictionary(&[-1.2, -0.9, 0.9], 0.4);
        let cfg = OptimizerConfig {
            step_size: 0.02,
            max_iters: 150,
            ..OptimizerConfig::default()
        };
        let (model, fit) = fit_parametric_edmd(&x, &y, 1.0, &dict, w0, None, Some(1e-8), &cfg).unwrap();
        let first = fit.history.first().unwrap();
        let last = fit.history.last().unwrap();
        assert!(last.loss_coeff < first.loss_coeff);
        assert!(last.loss_param > first.loss_param);
        assert_eq!(model.k.nrows(), 3);
        assert_eq!(fit.history.len(), 150);
    }

    #[test]
    fn parametric_fit_is_nearly_stationary_at_closed_form_start() {
        let x = pseudo_random_matrix(1, 80, 32);
        let y = &x * 0.5;
        let (dict, w0) = gaussian_dictionary(&[-0.8, 0.0, 0.8], 0.6);
        let mut frozen = dict.clone();
        frozen.set_trainable(vec![false; dict.param_len()]).unwrap();
        let cfg = OptimizerConfig {
            step_size: 1e-4,
            max_iters: 60,
            ..OptimizerConfig::default()
        };
        let (_, fit) = fit_parametric_edmd(&x, &y, 1.0, &frozen, w0, None, Some(1e-8), &cfg).unwrap();
        let first = fit.history.first().unwrap().loss_coeff;
        let last = fit.history.last().unwrap().loss_coeff;
        assert!((last - first).abs() <= 1e-6 * first.max(1.0));
    }
}
