//! Trajectory and field generators for the benchmark systems.
//!
//! Provides an Euler-Maruyama integrator for SDEs of the form
//! `dX = b(X) dt + sigma dW`, a classical RK4 integrator for ODEs (which
//! also returns exact derivatives from the right-hand side), an explicit
//! finite-difference solver for the nonlinear heat equation
//! `rho c_p u_t = (kappa(u) u_x)_x` with `kappa(u) = kappa0 exp(chi u)`,
//! and the named systems used by the shipped benchmarks.

use crate::linalg::{Matrix, Vector};
use crate::sysid::GridField;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error("state became non-finite at step {step}")]
    BlowUp { step: usize },
    #[error("step size must be positive, got {eta}")]
    BadStep { eta: f64 },
    #[error("lag {tau} is not an integer multiple of the step {eta}")]
    LagNotMultiple { tau: f64, eta: f64 },
    #[error("trajectory has {have} states but the lag needs at least {needed}")]
    TooShort { have: usize, needed: usize },
    #[error("explicit scheme unstable: dt {dt} exceeds the bound {bound}")]
    UnstableStep { dt: f64, bound: f64 },
    #[error("dimension mismatch: {what}")]
    Shape { what: String },
    #[error("invalid parameter: {what}")]
    BadParameter { what: String },
}

type VecField = Box<dyn Fn(&Vector) -> Vector + Send + Sync>;

/// Drift-diffusion system `dX = b(X) dt + sigma dW` with scalar noise
/// intensity applied to every coordinate.
pub struct SdeSpec {
    pub dim: usize,
    pub sigma: f64,
    drift: VecField,
}

impl SdeSpec {
    pub fn new<F>(dim: usize, sigma: f64, drift: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        SdeSpec {
            dim,
            sigma,
            drift: Box::new(drift),
        }
    }

    pub fn drift(&self, x: &Vector) -> Vector {
        (self.drift)(x)
    }
}

impl std::fmt::Debug for SdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SdeSpec")
            .field("dim", &self.dim)
            .field("sigma", &self.sigma)
            .finish()
    }
}

/// Deterministic system `dx/dt = b(x)`.
pub struct OdeSpec {
    pub dim: usize,
    rhs: VecField,
}

impl OdeSpec {
    pub fn new<F>(dim: usize, rhs: F) -> Self
    where
        F: Fn(&Vector) -> Vector + Send + Sync + 'static,
    {
        OdeSpec {
            dim,
            rhs: Box::new(rhs),
        }
    }

    pub fn rhs(&self, x: &Vector) -> Vector {
        (self.rhs)(x)
    }
}

impl std::fmt::Debug for OdeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OdeSpec").field("dim", &self.dim).finish()
    }
}

/// How the paired columns of a dataset relate to the states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairKind {
    /// `y_j` is the state observed `tau` time units after `x_j`.
    Lagged { tau: f64 },
    /// `y_j` is the time derivative at `x_j`.
    Derivative,
}

/// Provenance carried alongside a dataset and written into file headers.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMeta {
    pub system: String,
    pub params: Vec<(String, f64)>,
    pub seed: Option<u64>,
    pub eta: Option<f64>,
}

/// Column-paired training data: states `x` with either lagged states or
/// derivatives `y`, both `d x m`.
#[derive(Debug, Clone)]
pub struct TrajectoryData {
    pub x: Matrix,
    pub y: Matrix,
    pub kind: PairKind,
    pub meta: DatasetMeta,
}

impl TrajectoryData {
    pub fn new(x: Matrix, y: Matrix, kind: PairKind, meta: DatasetMeta) -> Result<Self, SimulateError> {
        if x.shape() != y.shape() {
            return Err(SimulateError::Shape {
                what: format!(
                    "paired blocks must match: {}x{} vs {}x{}",
                    x.nrows(),
                    x.ncols(),
                    y.nrows(),
                    y.ncols()
                ),
            });
        }
        if let PairKind::Lagged { tau } = kind {
            if tau <= 0.0 {
                return Err(SimulateError::BadParameter {
                    what: format!("lag must be positive, got {tau}"),
                });
            }
        }
        Ok(TrajectoryData { x, y, kind, meta })
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    pub fn len(&self) -> usize {
        self.x.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.x.ncols() == 0
    }
}

/// Integrates `dX = b(X) dt + sigma dW` with the Euler-Maruyama update
/// `X_{k+1} = X_k + eta b(X_k) + sigma dW_k`, `dW_k ~ N(0, eta I)`.
///
/// Returns all `steps + 1` states including `x0` as columns. The noise
/// stream comes from a ChaCha8 generator seeded with `seed`; draws are
/// made coordinate by coordinate within each step, so results are
/// reproducible across platforms.
pub fn euler_maruyama(
    spec: &SdeSpec,
    x0: &Vector,
    eta: f64,
    steps: usize,
    seed: u64,
) -> Result<Matrix, SimulateError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    euler_maruyama_with_rng(spec, x0, eta, steps, &mut rng)
}

fn euler_maruyama_with_rng(
    spec: &SdeSpec,
    x0: &Vector,
    eta: f64,
    steps: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Matrix, SimulateError> {
    if eta <= 0.0 {
        return Err(SimulateError::BadStep { eta });
    }
    if x0.len() != spec.dim {
        return Err(SimulateError::Shape {
            what: format!("initial state has {} entries, system is {}-dimensional", x0.len(), spec.dim),
        });
    }
    let normal = Normal::new(0.0, eta.sqrt()).expect("positive step");
    let mut states = Matrix::zeros(spec.dim, steps + 1);
    states.set_column(0, x0);
    let mut x = x0.clone();
    for k in 0..steps {
        let b = spec.drift(&x);
        for i in 0..spec.dim {
            let dw = normal.sample(rng);
            x[i] += eta * b[i] + spec.sigma * dw;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimulateError::BlowUp { step: k + 1 });
        }
        states.set_column(k + 1, &x);
    }
    Ok(states)
}

/// Integrates an ensemble of short trajectories from uniform random starts
/// in the box `[lo_i, hi_i]` per coordinate, each run for time `tau` with
/// step `eta`, and returns the (start, endpoint) pairs.
///
/// Seeding is split deterministically: ChaCha8 stream 0 of `seed` draws
/// the initial conditions, stream `1 + j` drives trajectory `j`.
pub fn sample_lagged_ensemble(
    spec: &SdeSpec,
    lo: &[f64],
    hi: &[f64],
    m: usize,
    tau: f64,
    eta: f64,
    seed: u64,
) -> Result<TrajectoryData, SimulateError> {
    if lo.len() != spec.dim || hi.len() != spec.dim {
        return Err(SimulateError::Shape {
            what: format!("bounds must have {} entries", spec.dim),
        });
    }
    let steps = lag_steps(tau, eta)?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(seed);
    init_rng.set_stream(0);
    let mut x = Matrix::zeros(spec.dim, m);
    let mut y = Matrix::zeros(spec.dim, m);
    for j in 0..m {
        let x0 = Vector::from_fn(spec.dim, |i, _| {
            lo[i] + (hi[i] - lo[i]) * init_rng.random::<f64>()
        });
        let mut traj_rng = ChaCha8Rng::seed_from_u64(seed);
        traj_rng.set_stream(1 + j as u64);
        let traj = euler_maruyama_with_rng(spec, &x0, eta, steps, &mut traj_rng)?;
        x.set_column(j, &traj.column(0));
        y.set_column(j, &traj.column(steps));
    }
    TrajectoryData::new(
        x,
        y,
        PairKind::Lagged { tau },
        DatasetMeta {
            seed: Some(seed),
            eta: Some(eta),
            ..DatasetMeta::default()
        },
    )
}

fn lag_steps(tau: f64, eta: f64) -> Result<usize, SimulateError> {
    if eta <= 0.0 {
        return Err(SimulateError::BadStep { eta });
    }
    let ratio = tau / eta;
    let rounded = ratio.round();
    if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 * ratio.abs().max(1.0) {
        return Err(SimulateError::LagNotMultiple { tau, eta });
    }
    Ok(rounded as usize)
}

/// Extracts lagged pairs `(x_k, x_{k + tau/eta})` from a single trajectory,
/// taking starts `0, stride, 2 stride, ...` while the lagged partner exists.
///
/// `tau/eta` must be an integer to within 1e-9. `stride = 1` gives every
/// overlapping pair; `stride = tau/eta` gives disjoint windows.
pub fn subsample_pairs(
    trajectory: &Matrix,
    eta: f64,
    tau: f64,
    stride: usize,
) -> Result<(Matrix, Matrix), SimulateError> {
    let lag = lag_steps(tau, eta)?;
    if stride == 0 {
        return Err(SimulateError::BadParameter {
            what: "stride must be at least 1".into(),
        });
    }
    let n_states = trajectory.ncols();
    if n_states < lag + 1 {
        return Err(SimulateError::TooShort {
            have: n_states,
            needed: lag + 1,
        });
    }
    let m = (n_states - 1 - lag) / stride + 1;
    let d = trajectory.nrows();
    let mut x = Matrix::zeros(d, m);
    let mut y = Matrix::zeros(d, m);
    for j in 0..m {
        let start = j * stride;
        x.set_column(j, &trajectory.column(start));
        y.set_column(j, &trajectory.column(start + lag));
    }
    Ok((x, y))
}

/// Classical fourth-order Runge-Kutta trajectory plus the exact derivatives
/// `b(x_k)` along it (usable as noise-free regression targets).
#[derive(Debug, Clone)]
pub struct Rk4Result {
    pub states: Matrix,
    pub derivs: Matrix,
}

pub fn rk4_integrate(
    spec: &OdeSpec,
    x0: &Vector,
    eta: f64,
    steps: usize,
) -> Result<Rk4Result, SimulateError> {
    if eta <= 0.0 {
        return Err(SimulateError::BadStep { eta });
    }
    if x0.len() != spec.dim {
        return Err(SimulateError::Shape {
            what: format!("initial state has {} entries, system is {}-dimensional", x0.len(), spec.dim),
        });
    }
    let mut states = Matrix::zeros(spec.dim, steps + 1);
    let mut derivs = Matrix::zeros(spec.dim, steps + 1);
    let mut x = x0.clone();
    for k in 0..=steps {
        let k1 = spec.rhs(&x);
        states.set_column(k, &x);
        derivs.set_column(k, &k1);
        if k == steps {
            break;
        }
        let k2 = spec.rhs(&(&x + &k1 * (eta / 2.0)));
        let k3 = spec.rhs(&(&x + &k2 * (eta / 2.0)));
        let k4 = spec.rhs(&(&x + &k3 * eta));
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (eta / 6.0);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimulateError::BlowUp { step: k + 1 });
        }
    }
    Ok(Rk4Result { states, derivs })
}

/// Modified Chua circuit
///
/// ```text
/// dx1/dt = alpha (x2 - f(x1))    f(x1) = -b sin(pi x1 / a + d)
/// dx2/dt = x1 - x2 + x3
/// dx3/dt = -beta x2
/// ```
pub fn chua_system(a: f64, b: f64, d: f64, alpha: f64, beta: f64) -> OdeSpec {
    assert!(a != 0.0, "sine argument scale must be nonzero");
    OdeSpec::new(3, move |x: &Vector| {
        let f = -b * (std::f64::consts::PI * x[0] / a + d).sin();
        Vector::from_vec(vec![alpha * (x[1] - f), x[0] - x[1] + x[2], -beta * x[1]])
    })
}

/// Potential of the two-dimensional triple-well landscape: two deep wells
/// at roughly (-1, 0) and (1, 0), a shallow well near (0, 5/3), and
/// quartic confinement.
pub fn triple_well_potential(x1: f64, x2: f64) -> f64 {
    let g1 = (-x1 * x1 - (x2 - 1.0 / 3.0).powi(2)).exp();
    let g2 = (-x1 * x1 - (x2 - 5.0 / 3.0).powi(2)).exp();
    let g3 = (-(x1 - 1.0).powi(2) - x2 * x2).exp();
    let g4 = (-(x1 + 1.0).powi(2) - x2 * x2).exp();
    3.0 * g1 - 3.0 * g2 - 5.0 * g3 - 5.0 * g4
        + 0.2 * x1.powi(4)
        + 0.2 * (x2 - 1.0 / 3.0).powi(4)
}

/// Analytic gradient of [`triple_well_potential`].
pub fn triple_well_gradient(x1: f64, x2: f64) -> (f64, f64) {
    let g1 = (-x1 * x1 - (x2 - 1.0 / 3.0).powi(2)).exp();
    let g2 = (-x1 * x1 - (x2 - 5.0 / 3.0).powi(2)).exp();
    let g3 = (-(x1 - 1.0).powi(2) - x2 * x2).exp();
    let g4 = (-(x1 + 1.0).powi(2) - x2 * x2).exp();
    let dv1 = -2.0 * x1 * (3.0 * g1 - 3.0 * g2) + 2.0 * (x1 - 1.0) * 5.0 * g3
        + 2.0 * (x1 + 1.0) * 5.0 * g4
        + 0.8 * x1.powi(3);
    let dv2 = -2.0 * (x2 - 1.0 / 3.0) * 3.0 * g1 + 2.0 * (x2 - 5.0 / 3.0) * 3.0 * g2
        + 2.0 * x2 * 5.0 * g3
        + 2.0 * x2 * 5.0 * g4
        + 0.8 * (x2 - 1.0 / 3.0).powi(3);
    (dv1, dv2)
}

/// Overdamped diffusion in the triple-well landscape:
/// `dX = -grad V(X) dt + sqrt(2 / beta) dW`.
pub fn triple_well_2d(beta: f64) -> SdeSpec {
    let sigma = (2.0 / beta).sqrt();
    SdeSpec::new(2, sigma, |x: &Vector| {
        let (d1, d2) = triple_well_gradient(x[0], x[1]);
        Vector::from_vec(vec![-d1, -d2])
    })
}

/// One-dimensional Ornstein-Uhlenbeck process
/// `dX = -alpha X dt + sqrt(2 / beta) dW`.
pub fn ou_process(alpha: f64, beta: f64) -> SdeSpec {
    assert!(alpha > 0.0 && beta > 0.0, "rates must be positive");
    let sigma = (2.0 / beta).sqrt();
    SdeSpec::new(1, sigma, move |x: &Vector| Vector::from_vec(vec![-alpha * x[0]]))
}

/// Probabilists' Hermite polynomial `H_n` via the recurrence
/// `H_0 = 1`, `H_1 = x`, `H_{n+1} = x H_n - n H_{n-1}`.
pub fn hermite_probabilists(n: usize, x: f64) -> f64 {
    match n {
        0 => 1.0,
        1 => x,
        _ => {
            let mut prev = 1.0;
            let mut cur = x;
            for k in 1..n {
                let next = x * cur - k as f64 * prev;
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `i`-th transfer-operator eigenvalue of the OU process at lag `tau`
/// (1-based): `exp(-alpha (i - 1) tau)`.
pub fn ou_eigenvalue(alpha: f64, tau: f64, i: usize) -> f64 {
    assert!(i >= 1, "eigenvalue index is 1-based");
    (-alpha * (i - 1) as f64 * tau).exp()
}

/// `i`-th eigenfunction of the OU process (1-based):
/// `H_{i-1}(sqrt(alpha beta) x) / sqrt((i-1)!)`.
pub fn ou_eigenfunction(alpha: f64, beta: f64, i: usize, x: f64) -> f64 {
    assert!(i >= 1, "eigenfunction index is 1-based");
    let n = i - 1;
    let scale = (alpha * beta).sqrt();
    let mut fact = 1.0;
    for k in 2..=n {
        fact *= k as f64;
    }
    hermite_probabilists(n, scale * x) / fact.sqrt()
}

/// Nonlinear heat problem on an interval with Dirichlet boundaries:
/// `rho c_p u_t = kappa0 chi e^(chi u) u_x^2 + kappa0 e^(chi u) u_xx`,
/// fixed boundary temperatures, and the quadratic initial profile
/// `u(x, 0) = left - (x - x_lo)/2 + (x - x_lo)(x - x_hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatPdeSpec {
    pub kappa0: f64,
    pub chi: f64,
    pub rho: f64,
    pub cp: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub left_bc: f64,
    pub right_bc: f64,
    pub nx: usize,
    /// Time step; `None` picks the largest stable step that lands on `t_final`.
    pub dt: Option<f64>,
    pub t_final: f64,
}

impl Default for HeatPdeSpec {
    fn default() -> Self {
        HeatPdeSpec {
            kappa0: 0.1,
            chi: -1.0,
            rho: 1.0,
            cp: 1.0,
            x_lo: 1.0,
            x_hi: 3.0,
            left_bc: 2.0,
            right_bc: 1.0,
            nx: 101,
            dt: None,
            t_final: 2.0,
        }
    }
}

impl HeatPdeSpec {
    pub fn dx(&self) -> f64 {
        (self.x_hi - self.x_lo) / (self.nx - 1) as f64
    }

    pub fn initial_profile(&self, x: f64) -> f64 {
        let s = x - self.x_lo;
        self.left_bc - s / 2.0 + s * (x - self.x_hi)
    }

    /// Largest admissible explicit step:
    /// `0.4 rho c_p dx^2 / (kappa0 max e^(chi u))` with the conductivity
    /// maximized over the working range `u` in `[0, 2.5]`.
    pub fn stable_dt(&self) -> f64 {
        let max_factor = (self.chi * 2.5).exp().max(1.0);
        0.4 * self.rho * self.cp * self.dx() * self.dx() / (self.kappa0 * max_factor)
    }
}

/// Runs the explicit scheme
/// `u_j += dt/(rho c_p) [kappa0 chi e^(chi u_j) ((u_{j+1}-u_{j-1})/(2 dx))^2
///  + kappa0 e^(chi u_j) (u_{j+1}-2u_j+u_{j-1})/dx^2]`
/// and returns the full space-time field (rows are time slices, including
/// the initial one).
pub fn heat_solve(spec: &HeatPdeSpec) -> Result<GridField, SimulateError> {
    if spec.nx < 5 {
        return Err(SimulateError::BadParameter {
            what: format!("need at least 5 spatial nodes, got {}", spec.nx),
        });
    }
    if spec.t_final <= 0.0 {
        return Err(SimulateError::BadParameter {
            what: format!("final time must be positive, got {}", spec.t_final),
        });
    }
    let bound = spec.stable_dt();
    let (dt, n_steps) = match spec.dt {
        Some(dt) => {
            if dt <= 0.0 {
                return Err(SimulateError::BadStep { eta: dt });
            }
            if dt > bound {
                return Err(SimulateError::UnstableStep { dt, bound });
            }
            (dt, (spec.t_final / dt).ceil() as usize)
        }
        None => {
            let n = (spec.t_final / bound).ceil() as usize;
            (spec.t_final / n as f64, n)
        }
    };
    let dx = spec.dx();
    let nx = spec.nx;
    let mut field = Matrix::zeros(n_steps + 1, nx);
    let mut u: Vec<f64> = (0..nx)
        .map(|j| spec.initial_profile(spec.x_lo + j as f64 * dx))
        .collect();
    u[0] = spec.left_bc;
    u[nx - 1] = spec.right_bc;
    for j in 0..nx {
        field[(0, j)] = u[j];
    }
    let scale = dt / (spec.rho * spec.cp);
    let mut next = u.clone();
    for k in 0..n_steps {
        for j in 1..nx - 1 {
            let ux = (u[j + 1] - u[j - 1]) / (2.0 * dx);
            let uxx = (u[j + 1] - 2.0 * u[j] + u[j - 1]) / (dx * dx);
            let conductivity = spec.kappa0 * (spec.chi * u[j]).exp();
            next[j] = u[j] + scale * (conductivity * spec.chi * ux * ux + conductivity * uxx);
            if !next[j].is_finite() {
                return Err(SimulateError::BlowUp { step: k + 1 });
            }
        }
        next[0] = spec.left_bc;
        next[nx - 1] = spec.right_bc;
        std::mem::swap(&mut u, &mut next);
        for j in 0..nx {
            field[(k + 1, j)] = u[j];
        }
    }
    GridField::new(field, dx, dt, spec.x_lo, 0.0).map_err(|e| SimulateError::BadParameter {
        what: e.to_string(),
    })
}
