//! First-order optimizers.
//!
//! Step primitives ([`gd_step`], [`sgd_step`], [`nesterov_step`],
//! [`adam_step`]) operate on flat parameter vectors so callers can compose
//! them freely, plus the two-block alternating Adam driver
//! ([`alternating_adam`]) used by all parametric fits: per iteration it
//! updates the dictionary parameters `w` first from the gradient at
//! `(A_t, w_t)`, then the linear coefficients `A` from the gradient at
//! `(A_t, w_{t+1})`, each block with its own Adam moments.
//!
//! Stochastic batches are drawn uniformly without replacement from a seeded
//! ChaCha8 generator and sorted ascending, so a batch covering every sample
//! reproduces the full-gradient path bit for bit. Batch gradients are scaled
//! by `m / k`, making them unbiased estimates of the full gradient.

use crate::linalg::{Matrix, Vector};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Loss threshold beyond which a run is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

/// Window length and relative tolerance of the loss-plateau stop rule.
pub const PLATEAU_WINDOW: usize = 50;
pub const PLATEAU_REL_CHANGE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum OptimError {
    #[error("invalid optimizer configuration: {0}")]
    BadConfig(String),
    #[error("optimization diverged at iteration {iteration} with loss {loss:.3e}")]
    Diverged {
        iteration: usize,
        loss: f64,
        history: Vec<HistoryRecord>,
    },
    #[error("power iteration did not converge within {iterations} iterations")]
    PowerIterationFailed { iterations: usize },
    #[error("step size is undefined for a zero feature matrix")]
    ZeroFeatureMatrix,
}

/// Mini-batch selection for stochastic gradients.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSize {
    Full,
    Size(usize),
}

/// Shared optimizer settings with the defaults used throughout the crate.
#[derive(Debug, Clone)]
pub struct OptimizerConfig {
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch: BatchSize,
    pub max_iters: usize,
    /// Stop when the combined update norm falls below this; `0` disables.
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            step_size: 0.01,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch: BatchSize::Full,
            max_iters: 1000,
            tolerance: 0.0,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, sample_count: usize) -> Result<(), OptimError> {
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(OptimError::BadConfig(format!(
                "step size must be positive, got {}",
                self.step_size
            )));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(OptimError::BadConfig(format!(
                    "{name} must lie in [0, 1), got {b}"
                )));
            }
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(OptimError::BadConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if let BatchSize::Size(k) = self.batch {
            if k == 0 || k > sample_count {
                return Err(OptimError::BadConfig(format!(
                    "batch size {k} out of range 1..={sample_count}"
                )));
            }
        }
        Ok(())
    }
}

/// Per-sample gradient access for stochastic methods. The full gradient is
/// the sum over all samples.
pub trait GradientOracle {
    fn dim(&self) -> usize;
    fn sample_count(&self) -> usize;
    /// Sum of per-sample gradients over `batch` (unscaled).
    fn batch_gradient(&self, x: &Vector, batch: &[usize]) -> Vector;
    fn full_gradient(&self, x: &Vector) -> Vector {
        let all: Vec<usize> = (0..self.sample_count()).collect();
        self.batch_gradient(x, &all)
    }
}

/// Plain gradient-descent update `x - h * g`.
pub fn gd_step(x: &Vector, gradient: &Vector, step_size: f64) -> Vector {
    x - gradient * step_size
}

/// Draws `k` distinct indices from `0..m`, sorted ascending.
pub fn sample_batch(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Vec<usize> {
    let mut batch = rand::seq::index::sample(rng, m, k).into_vec();
    batch.sort_unstable();
    batch
}

/// One stochastic gradient step with an `m / k`-scaled mini-batch gradient.
pub fn sgd_step<O: GradientOracle>(
    x: &Vector,
    oracle: &O,
    step_size: f64,
    batch_size: usize,
    rng: &mut ChaCha8Rng,
) -> Vector {
    let m = oracle.sample_count();
    let batch = sample_batch(rng, m, batch_size);
    let scale = m as f64 / batch_size as f64;
    let g = oracle.batch_gradient(x, &batch) * scale;
    gd_step(x, &g, step_size)
}

/// Momentum bookkeeping for Nesterov's accelerated gradient method.
///
/// Uses the scalar recurrence `p_(t+1) = (1 + sqrt(1 + 4 p_t^2)) / 2` with
/// `p_0 = 0` and momentum weight `beta_t = (p_t - 1) / p_(t+1)`. The
/// previous iterate is seeded with `x_0`, so the first step reduces to plain
/// gradient descent.
#[derive(Debug, Clone)]
pub struct NesterovState {
    p: f64,
    x_prev: Vector,
}

impl NesterovState {
    pub fn new(x0: Vector) -> Self {
        NesterovState { p: 0.0, x_prev: x0 }
    }

    pub fn momentum_scalar(&self) -> f64 {
        self.p
    }
}

/// One accelerated step; `gradient` is evaluated at the extrapolated point.
pub fn nesterov_step<F>(
    state: &mut NesterovState,
    x: &Vector,
    step_size: f64,
    gradient: F,
) -> Vector
where
    F: FnOnce(&Vector) -> Vector,
{
    let p_next = 0.5 * (1.0 + (1.0 + 4.0 * state.p * state.p).sqrt());
    let beta = (state.p - 1.0) / p_next;
    let lookahead = x + (x - &state.x_prev) * beta;
    let g = gradient(&lookahead);
    let x_next = &lookahead - g * step_size;
    state.x_prev = x.clone();
    state.p = p_next;
    x_next
}

/// First and second moment estimates for Adam.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vector,
    v: Vector,
    t: u32,
}

impl AdamState {
    pub fn new(dim: usize) -> Self {
        AdamState {
            m: Vector::zeros(dim),
            v: Vector::zeros(dim),
            t: 0,
        }
    }
}

/// One Adam update with bias-corrected moments.
pub fn adam_step(state: &mut AdamState, x: &Vector, gradient: &Vector, cfg: &OptimizerConfig) -> Vector {
    state.t += 1;
    let t = state.t as i32;
    state.m = &state.m * cfg.beta1 + gradient * (1.0 - cfg.beta1);
    state.v = &state.v * cfg.beta2 + gradient.component_mul(gradient) * (1.0 - cfg.beta2);
    let m_hat = &state.m / (1.0 - cfg.beta1.powi(t));
    let v_hat = &state.v / (1.0 - cfg.beta2.powi(t));
    let mut x_next = x.clone();
    for i in 0..x.len() {
        x_next[i] -= cfg.step_size * m_hat[i] / (v_hat[i].sqrt() + cfg.epsilon);
    }
    x_next
}

/// Objective with a linear coefficient block `A` and a dictionary parameter
/// block `w`, each with its own loss report and gradient. `batch` is `None`
/// for full gradients or a sorted index list for mini-batch gradients.
pub trait TwoBlockObjective {
    fn coeff_shape(&self) -> (usize, usize);
    fn param_len(&self) -> usize;
    fn sample_count(&self) -> usize;
    fn loss_coeff(&self, coeffs: &Matrix, params: &Vector) -> f64;
    fn loss_param(&self, coeffs: &Matrix, params: &Vector) -> f64;
    fn grad_coeff(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Matrix;
    fn grad_param(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Vector;
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryRecord {
    pub iteration: usize,
    pub loss_coeff: f64,
    pub loss_param: f64,
    pub grad_coeff_norm: f64,
    pub grad_param_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIters,
    UpdateNormBelowTolerance,
    LossPlateau,
}

#[derive(Debug, Clone)]
pub struct AlternatingFit {
    pub coeffs: Matrix,
    pub params: Vector,
    pub history: Vec<HistoryRecord>,
    pub stop: StopReason,
}

fn flatten(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

fn unflatten(v: &Vector, rows: usize, cols: usize) -> Matrix {
    Matrix::from_column_slice(rows, cols, v.as_slice())
}

/// Two-block Adam in the order: parameter moments and update first, then
/// coefficient gradient at the refreshed parameters.
///
/// Stops at `max_iters`, when the combined update norm drops below
/// `tolerance`, or when the coefficient loss changes by less than
/// [`PLATEAU_REL_CHANGE`] (relative) across [`PLATEAU_WINDOW`] iterations.
/// A non-finite or `> 1e12` loss aborts with the history collected so far.
pub fn alternating_adam<O: TwoBlockObjective>(
    objective: &O,
    coeffs0: Matrix,
    params0: Vector,
    cfg: &OptimizerConfig,
) -> Result<AlternatingFit, OptimError> {
    cfg.validate(objective.sample_count())?;
    let (rows, cols) = objective.coeff_shape();
    if coeffs0.shape() != (rows, cols) {
        return Err(OptimError::BadConfig(format!(
            "coefficient block has shape {:?}, expected {:?}",
            coeffs0.shape(),
            (rows, cols)
        )));
    }
    if params0.len() != objective.param_len() {
        return Err(OptimError::BadConfig(format!(
            "parameter block has length {}, expected {}",
            params0.len(),
            objective.param_len()
        )));
    }

    let mut coeffs = coeffs0;
    let mut params = params0;
    let mut coeff_state = AdamState::new(rows * cols);
    let mut param_state = AdamState::new(params.len());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history: Vec<HistoryRecord> = Vec::new();
    let mut stop = StopReason::MaxIters;

    for iteration in 0..cfg.max_iters {
        let batch = match cfg.batch {
            BatchSize::Full => None,
            BatchSize::Size(k) => Some(sample_batch(&mut rng, objective.sample_count(), k)),
        };
        let batch_ref = batch.as_deref();

        let g_param = objective.grad_param(&coeffs, &params, batch_ref);
        let params_next = adam_step(&mut param_state, &params, &g_param, cfg);

        let g_coeff = objective.grad_coeff(&coeffs, &params_next, batch_ref);
        let coeff_flat = flatten(&coeffs);
        let g_coeff_flat = flatten(&g_coeff);
        let coeff_next_flat = adam_step(&mut coeff_state, &coeff_flat, &g_coeff_flat, cfg);
        let coeffs_next = unflatten(&coeff_next_flat, rows, cols);

        let update_norm =
            (&coeff_next_flat - &coeff_flat).norm() + (&params_next - &params).norm();
        coeffs = coeffs_next;
        params = params_next;

        let loss_coeff = objective.loss_coeff(&coeffs, &params);
        let loss_param = objective.loss_param(&coeffs, &params);
        history.push(HistoryRecord {
            iteration,
            loss_coeff,
            loss_param,
            grad_coeff_norm: g_coeff_flat.norm(),
            grad_param_norm: g_param.norm(),
        });

        let worst = loss_coeff.abs().max(loss_param.abs());
        if !loss_coeff.is_finite() || !loss_param.is_finite() || worst > DIVERGENCE_LIMIT {
            return Err(OptimError::Diverged {
                iteration,
                loss: loss_coeff,
                history,
            });
        }

        if cfg.tolerance > 0.0 && update_norm < cfg.tolerance {
            stop = StopReason::UpdateNormBelowTolerance;
            break;
        }
        if history.len() > PLATEAU_WINDOW {
            let past = history[history.len() - 1 - PLATEAU_WINDOW].loss_coeff;
            let change = (loss_coeff - past).abs();
            if change <= PLATEAU_REL_CHANGE * past.abs().max(1.0) {
                stop = StopReason::LossPlateau;
                break;
            }
        }
    }

    Ok(AlternatingFit {
        coeffs,
        params,
        history,
        stop,
    })
}

/// `1 / lambda_max(Psi Psi^T)` by power iteration on the feature Gram
/// matrix; the classical safe step size for the quadratic coefficient
/// subproblem.
pub fn default_step_size(psi: &Matrix) -> Result<f64, OptimError> {
    let gram = psi * psi.transpose();
    let n = gram.nrows();
    if n == 0 || gram.norm() == 0.0 {
        return Err(OptimError::ZeroFeatureMatrix);
    }
    let max_iters = 10_000;
    let mut v = Vector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0f64;
    for _ in 0..max_iters {
        let gv = &gram * &v;
        let norm = gv.norm();
        if norm == 0.0 {
            // the start vector lies in the kernel; restart off-axis
            v = Vector::from_fn(n, |i, _| 1.0 + i as f64);
            v /= v.norm();
            continue;
        }
        let next = gv / norm;
        let lambda_next = (&gram * &next).dot(&next);
        let done = (lambda_next - lambda).abs() <= 1e-12 * lambda_next.abs().max(f64::MIN_POSITIVE);
        v = next;
        lambda = lambda_next;
        if done {
            break;
        }
    }
    if lambda <= 0.0 {
        return Err(OptimError::ZeroFeatureMatrix);
    }
    Ok(1.0 / lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Q(x) = 1/2 sum_i ||x - c_i||^2 with per-sample gradients x - c_i.
    struct QuadraticOracle {
        targets: Vec<Vector>,
    }

    impl GradientOracle for QuadraticOracle {
        fn dim(&self) -> usize {
            self.targets[0].len()
        }
        fn sample_count(&self) -> usize {
            self.targets.len()
        }
        fn batch_gradient(&self, x: &Vector, batch: &[usize]) -> Vector {
            let mut g = Vector::zeros(self.dim());
            for &i in batch {
                g += x - &self.targets[i];
            }
            g
        }
    }

    #[test]
    fn gd_reaches_minimum_in_one_unit_step() {
        let x = Vector::from_vec(vec![3.0, -4.0]);
        let g = x.clone();
        assert_eq!(gd_step(&x, &g, 1.0).norm(), 0.0);
    }

    #[test]
    fn gd_halves_scalar_with_half_step() {
        let x = Vector::from_vec(vec![1.0]);
        let g = x.clone();
        assert_eq!(gd_step(&x, &g, 0.5)[0], 0.5);
    }

    #[test]
    fn gd_converges_to_least_squares_solution() {
        let a = Matrix::from_fn(8, 3, |i, j| ((2 * i + 3 * j + i * j) as f64 * 0.41).sin());
        let x_true = Vector::from_vec(vec![1.0, -2.0, 0.5]);
        let b = &a * &x_true;
        let h = default_step_size(&a.transpose()).unwrap();
        let mut x = Vector::zeros(3);
        for _ in 0..5000 {
            let g = a.transpose() * (&a * &x - &b);
            x = gd_step(&x, &g, h);
        }
        let reference = crate::linalg::lstsq(&a, &Matrix::from_column_slice(8, 1, b.as_slice()), None)
            .unwrap()
            .column(0)
            .into_owned();
        assert!((x - reference).norm() <= 1e-8);
    }

    #[test]
    fn sgd_full_batch_is_gd_bit_for_bit() {
        let oracle = QuadraticOracle {
            targets: (0..7)
                .map(|i| Vector::from_vec(vec![i as f64, 1.0 - i as f64]))
                .collect(),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut x_sgd = Vector::from_vec(vec![0.3, -0.6]);
        let mut x_gd = x_sgd.clone();
        for _ in 0..100 {
            x_sgd = sgd_step(&x_sgd, &oracle, 0.01, 7, &mut rng);
            let g = oracle.full_gradient(&x_gd);
            x_gd = gd_step(&x_gd, &g, 0.01);
            assert_eq!(x_sgd, x_gd);
        }
    }

    #[test]
    fn sgd_same_seed_same_iterates() {
        let oracle = QuadraticOracle {
            targets: (0..10).map(|i| Vector::from_vec(vec![(i as f64).cos()])).collect(),
        };
        let run = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut x = Vector::from_vec(vec![2.0]);
            for _ in 0..50 {
                x = sgd_step(&x, &oracle, 0.05, 3, &mut rng);
            }
            x
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn scaled_batch_gradients_sum_to_full_over_all_batches() {
        let oracle = QuadraticOracle {
            targets: vec![
                Vector::from_vec(vec![1.0]),
                Vector::from_vec(vec![2.0]),
                Vector::from_vec(vec![4.0]),
            ],
        };
        let x = Vector::from_vec(vec![0.0]);
        let full = oracle.full_gradient(&x);
        // all 2-of-3 batches; each sample appears in exactly two of them
        let batches: [&[usize]; 3] = [&[0, 1], &[0, 2], &[1, 2]];
        let scale = 3.0 / 2.0;
        let total: f64 = batches
            .iter()
            .map(|b| oracle.batch_gradient(&x, b)[0] * scale)
            .sum();
        assert_eq!(total, 3.0 * full[0]);
    }

    #[test]
    fn nesterov_momentum_sequence() {
        let oracle = QuadraticOracle {
            targets: vec![Vector::from_vec(vec![0.0])],
        };
        let mut state = NesterovState::new(Vector::from_vec(vec![1.0]));
        let mut x = Vector::from_vec(vec![1.0]);
        let mut ps = vec![state.momentum_scalar()];
        for _ in 0..3 {
            x = nesterov_step(&mut state, &x, 0.1, |y| oracle.full_gradient(y));
            ps.push(state.momentum_scalar());
        }
        let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert_eq!(ps[0], 0.0);
        assert_relative_eq!(ps[1], 1.0, epsilon = 1e-15);
        assert_relative_eq!(ps[2], phi, epsilon = 1e-14);
        assert_relative_eq!(ps[3], 0.5 * (1.0 + (1.0 + 4.0 * phi * phi).sqrt()), epsilon = 1e-14);
    }

    #[test]
    fn nesterov_first_step_is_plain_gd() {
        let oracle = QuadraticOracle {
            targets: vec![Vector::from_vec(vec![3.0, -1.0])],
        };
        let x0 = Vector::from_vec(vec![1.0, 2.0]);
        let mut state = NesterovState::new(x0.clone());
        let x1 = nesterov_step(&mut state, &x0, 0.2, |y| oracle.full_gradient(y));
        let x1_gd = gd_step(&x0, &oracle.full_gradient(&x0), 0.2);
        assert_eq!(x1, x1_gd);
    }

    #[test]
    fn nesterov_beats_gd_on_ill_conditioned_quadratic() {
        // f(x) = 1/2 x^T diag(1, 100) x
        let grad = |x: &Vector| Vector::from_vec(vec![x[0], 100.0 * x[1]]);
        let h = 1.0 / 100.0;
        let x0 = Vector::from_vec(vec![1.0, 1.0]);
        let tol = 1e-6;
        let mut x_gd = x0.clone();
        let mut gd_iters = None;
        for t in 0..5000 {
            x_gd = gd_step(&x_gd, &grad(&x_gd), h);
            if x_gd.norm() < tol {
                gd_iters = Some(t + 1);
                break;
            }
        }
        let mut state = NesterovState::new(x0.clone());
        let mut x_n = x0;
        let mut nesterov_iters = None;
        for t in 0..5000 {
            x_n = nesterov_step(&mut state, &x_n, h, |y| grad(y));
            if x_n.norm() < tol {
                nesterov_iters = Some(t + 1);
                break;
            }
        }
        let (g, n) = (gd_iters.unwrap(), nesterov_iters.unwrap());
        assert!(n < g, "nesterov {n} vs gd {g}");
    }

    #[test]
    fn adam_fixed_point_at_zero_gradient() {
        let mut state = AdamState::new(2);
        let x = Vector::from_vec(vec![1.5, -2.5]);
        let g = Vector::zeros(2);
        let x1 = adam_step(&mut state, &x, &g, &OptimizerConfig::default());
        assert_eq!(x1, x);
    }

    #[test]
    fn adam_first_step_closed_form() {
        let cfg = OptimizerConfig::default();
        let mut state = AdamState::new(1);
        let x = Vector::from_vec(vec![0.7]);
        let g = Vector::from_vec(vec![3.0]);
        let x1 = adam_step(&mut state, &x, &g, &cfg);
        let expected = 0.7 - cfg.step_size * 3.0 / (3.0 + cfg.epsilon);
        assert_relative_eq!(x1[0], expected, epsilon = 1e-16);
    }

    #[test]
    fn adam_displacement_is_odd_in_the_gradient() {
        let cfg = OptimizerConfig::default();
        let gradients = [4.0, -1.0, 2.5, 0.3];
        let mut sp = AdamState::new(1);
        let mut sm = AdamState::new(1);
        let mut xp = Vector::from_vec(vec![0.0]);
        let mut xm = Vector::from_vec(vec![0.0]);
        for g in gradients {
            xp = adam_step(&mut sp, &xp, &Vector::from_vec(vec![g]), &cfg);
            xm = adam_step(&mut sm, &xm, &Vector::from_vec(vec![-g]), &cfg);
            assert_eq!(xp[0], -xm[0]);
        }
    }

    /// L1 = ||A - A*||^2, L2 = ||w - w*||^2, fully decoupled.
    struct DecoupledQuadratic {
        a_target: Matrix,
        w_target: Vector,
        zero_param_grad: bool,
    }

    impl TwoBlockObjective for DecoupledQuadratic {
        fn coeff_shape(&self) -> (usize, usize) {
            self.a_target.shape()
        }
        fn param_len(&self) -> usize {
            self.w_target.len()
        }
        fn sample_count(&self) -> usize {
            1
        }
        fn loss_coeff(&self, coeffs: &Matrix, _params: &Vector) -> f64 {
            (coeffs - &self.a_target).norm_squared()
        }
        fn loss_param(&self, _coeffs: &Matrix, params: &Vector) -> f64 {
            (params - &self.w_target).norm_squared()
        }
        fn grad_coeff(&self, coeffs: &Matrix, _params: &Vector, _batch: Option<&[usize]>) -> Matrix {
            (coeffs - &self.a_target) * 2.0
        }
        fn grad_param(&self, _coeffs: &Matrix, params: &Vector, _batch: Option<&[usize]>) -> Vector {
            if self.zero_param_grad {
                Vector::zeros(self.param_len())
            } else {
                (params - &self.w_target) * 2.0
            }
        }
    }

    #[test]
    fn alternating_adam_solves_decoupled_quadratics() {
        let objective = DecoupledQuadratic {
            a_target: Matrix::from_row_slice(2, 2, &[1.0, -0.5, 0.25, 2.0]),
            w_target: Vector::from_vec(vec![-1.0, 0.75]),
            zero_param_grad: false,
        };
        let cfg = OptimizerConfig {
            step_size: 0.05,
            max_iters: 2000,
            ..OptimizerConfig::default()
        };
        let fit = alternating_adam(&objective, Matrix::zeros(2, 2), Vector::zeros(2), &cfg).unwrap();
        assert!((fit.coeffs - &objective.a_target).norm() < 1e-4);
        assert!((fit.params - &objective.w_target).norm() < 1e-4);
        assert_eq!(fit.history.len(), fit.history.last().unwrap().iteration + 1);
    }

    #[test]
    fn alternating_with_frozen_params_matches_single_block_adam() {
        let objective = DecoupledQuadratic {
            a_target: Matrix::from_row_slice(1, 3, &[2.0, -1.0, 0.5]),
            w_target: Vector::from_vec(vec![5.0]),
            zero_param_grad: true,
        };
        let cfg = OptimizerConfig {
            step_size: 0.02,
            max_iters: 100,
            ..OptimizerConfig::default()
        };
        let w0 = Vector::from_vec(vec![0.25]);
        let fit = alternating_adam(&objective, Matrix::zeros(1, 3), w0.clone(), &cfg).unwrap();
        assert_eq!(fit.params, w0);

        let mut state = AdamState::new(3);
        let mut x = Vector::zeros(3);
        for _ in 0..100 {
            let g = Vector::from_iterator(3, (0..3).map(|i| 2.0 * (x[i] - objective.a_target[(0, i)])));
            x = adam_step(&mut state, &x, &g, &cfg);
        }
        assert_eq!(flatten(&fit.coeffs.transpose()), x);
    }

    struct RunawayObjective;

    impl TwoBlockObjective for RunawayObjective {
        fn coeff_shape(&self) -> (usize, usize) {
            (1, 1)
        }
        fn param_len(&self) -> usize {
            0
        }
        fn sample_count(&self) -> usize {
            1
        }
        fn loss_coeff(&self, coeffs: &Matrix, _params: &Vector) -> f64 {
            (coeffs[(0, 0)].abs() + 1.0).powi(2).exp()
        }
        fn loss_param(&self, _coeffs: &Matrix, _params: &Vector) -> f64 {
            0.0
        }
        fn grad_coeff(&self, _coeffs: &Matrix, _params: &Vector, _batch: Option<&[usize]>) -> Matrix {
            Matrix::from_element(1, 1, -1.0)
        }
        fn grad_param(&self, _coeffs: &Matrix, _params: &Vector, _batch: Option<&[usize]>) -> Vector {
            Vector::zeros(0)
        }
    }

    #[test]
    fn alternating_adam_reports_divergence_with_history() {
        let cfg = OptimizerConfig {
            step_size: 1.0,
            max_iters: 10_000,
            ..OptimizerConfig::default()
        };
        let err = alternating_adam(&RunawayObjective, Matrix::zeros(1, 1), Vector::zeros(0), &cfg)
            .unwrap_err();
        match err {
            OptimError::Diverged { iteration, history, .. } => {
                assert!(!history.is_empty());
                assert_eq!(history.last().unwrap().iteration, iteration);
            }
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn default_step_size_examples() {
        assert_relative_eq!(default_step_size(&Matrix::identity(2, 2)).unwrap(), 1.0, epsilon = 1e-10);
        let psi = Matrix::from_diagonal(&Vector::from_vec(vec![2.0, 1.0]));
        assert_relative_eq!(default_step_size(&psi).unwrap(), 0.25, epsilon = 1e-10);
    }

    #[test]
    fn default_step_size_matches_svd() {
        let psi = Matrix::from_fn(5, 50, |i, j| ((3 * i + 11 * j + i * j) as f64 * 0.17).sin());
        let h = default_step_size(&psi).unwrap();
        let svd = nalgebra::linalg::SVD::new_unordered(psi.clone(), false, false);
        let sigma_max = svd.singular_values.max();
        assert_relative_eq!(h, 1.0 / (sigma_max * sigma_max), epsilon = 1e-9);
    }

    #[test]
    fn default_step_size_rejects_zero_matrix() {
        assert!(matches!(
            default_step_size(&Matrix::zeros(3, 10)),
            Err(OptimError::ZeroFeatureMatrix)
        ));
    }
}
