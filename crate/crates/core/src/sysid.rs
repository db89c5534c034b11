//! Governing-equation discovery for ODEs and PDEs.
//!
//! The ODE path regresses derivative data onto a trainable dictionary,
//! `xdot ~ Xi^T psi(x, w)`, solving for the coefficient matrix `Xi` in
//! closed form or by gradient steps while the dictionary parameters `w`
//! follow the same reconstruction loss. The PDE path builds a library
//! `Theta(U)` of candidate terms from a space-time field and its central
//! finite differences and regresses the time derivative onto it,
//! `U_t ~ Theta(U(w)) xi`, where `w` holds shared nonlinear parameters
//! such as the rate inside `exp(chi u)` factors.
//!
//! Sparsification is a separate pass: hard thresholding against the
//! largest coefficient magnitude with a least-squares refit on the
//! surviving terms, iterated to a fixed point.

use std::cell::RefCell;

use crate::dictionary::{BasisSpec, Dictionary, DictionaryError};
use crate::linalg::{self, LinalgError, Matrix, Vector, DEFAULT_RCOND};
use crate::optimizers::{
    alternating_adam, AlternatingFit, OptimError, OptimizerConfig, TwoBlockObjective,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SysidError {
    #[error("grid too small along {axis}: need at least {needed} points, have {have}")]
    GridTooSmall {
        axis: &'static str,
        needed: usize,
        have: usize,
    },
    #[error("grid spacings must be positive")]
    BadSpacing,
    #[error("derivative order must be 1 or 2, got {order}")]
    BadOrder { order: usize },
    #[error("unknown library term `{label}`")]
    UnknownTerm { label: String },
    #[error("shared parameter vector has {got} entries, the library needs {expected}")]
    SharedParamLen { got: usize, expected: usize },
    #[error("shape mismatch: {what}")]
    Shape { what: String },
    #[error("thresholding eliminated every term")]
    DegenerateModel,
    #[error("parameter {index} is not trainable")]
    NotTrainable { index: usize },
    #[error("could not parse equation: {what}")]
    Parse { what: String },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Dictionary(#[from] DictionaryError),
    #[error(transparent)]
    Optimizer(#[from] OptimError),
}

/// A scalar field sampled on a regular space-time grid. Rows are time
/// slices (time-major), columns are spatial nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub values: Matrix,
    pub dx: f64,
    pub dt: f64,
    pub x0: f64,
    pub t0: f64,
}

impl GridField {
    pub fn new(values: Matrix, dx: f64, dt: f64, x0: f64, t0: f64) -> Result<Self, SysidError> {
        if values.nrows() < 5 {
            return Err(SysidError::GridTooSmall {
                axis: "time",
                needed: 5,
                have: values.nrows(),
            });
        }
        if values.ncols() < 5 {
            return Err(SysidError::GridTooSmall {
                axis: "space",
                needed: 5,
                have: values.ncols(),
            });
        }
        if !(dx > 0.0 && dt > 0.0) {
            return Err(SysidError::BadSpacing);
        }
        Ok(GridField {
            values,
            dx,
            dt,
            x0,
            t0,
        })
    }

    pub fn nt(&self) -> usize {
        self.values.nrows()
    }

    pub fn nx(&self) -> usize {
        self.values.ncols()
    }

    /// Keeps every `stride`-th time slice (always including the first),
    /// scaling `dt` accordingly. Useful to thin dense solver output before
    /// regression.
    pub fn thin_time(&self, stride: usize) -> Result<GridField, SysidError> {
        if stride == 0 {
            return Err(SysidError::BadSpacing);
        }
        let rows: Vec<usize> = (0..self.nt()).step_by(stride).collect();
        let values = self.values.select_rows(rows.iter());
        GridField::new(values, self.dx, self.dt * stride as f64, self.x0, self.t0)
    }
}

/// Central difference in time on interior points, returning an
/// `(nt - 2) x (nx - 2)` matrix aligned with the other interior operators.
pub fn finite_diff_time(u: &GridField) -> Matrix {
    let (nt, nx) = (u.nt(), u.nx());
    Matrix::from_fn(nt - 2, nx - 2, |t, j| {
        (u.values[(t + 2, j + 1)] - u.values[(t, j + 1)]) / (2.0 * u.dt)
    })
}

/// Central difference in space (first or second order) on interior points.
pub fn finite_diff_space(u: &GridField, order: usize) -> Result<Matrix, SysidError> {
    let (nt, nx) = (u.nt(), u.nx());
    let v = &u.values;
    match order {
        1 => Ok(Matrix::from_fn(nt - 2, nx - 2, |t, j| {
            (v[(t + 1, j + 2)] - v[(t + 1, j)]) / (2.0 * u.dx)
        })),
        2 => Ok(Matrix::from_fn(nt - 2, nx - 2, |t, j| {
            (v[(t + 1, j + 2)] - 2.0 * v[(t + 1, j + 1)] + v[(t + 1, j)]) / (u.dx * u.dx)
        })),
        _ => Err(SysidError::BadOrder { order }),
    }
}

/// Field values restricted to the interior points used by the differences.
pub fn interior_values(u: &GridField) -> Matrix {
    let (nt, nx) = (u.nt(), u.nx());
    Matrix::from_fn(nt - 2, nx - 2, |t, j| u.values[(t + 1, j + 1)])
}

/// Flattens an interior matrix time-major: row r of the result vector
/// enumerates times, each spanning the interior spatial nodes in order.
pub fn flatten_time_major(m: &Matrix) -> Vector {
    let mut out = Vector::zeros(m.nrows() * m.ncols());
    let mut idx = 0;
    for t in 0..m.nrows() {
        for j in 0..m.ncols() {
            out[idx] = m[(t, j)];
            idx += 1;
        }
    }
    out
}

/// A discovered ODE model `xdot = Xi^T psi(x, w)`.
#[derive(Debug, Clone)]
pub struct SindyModel {
    pub dictionary: Dictionary,
    pub params: Vector,
    /// `n x d`: one column of coefficients per state dimension.
    pub xi: Matrix,
}

impl SindyModel {
    /// Reconstructed right-hand side on a state batch, `d x m`.
    pub fn rhs(&self, x: &Matrix) -> Result<Matrix, SysidError> {
        let psi = self.dictionary.evaluate(x, &self.params)?;
        Ok(self.xi.transpose() * psi)
    }

    pub fn equations(&self, state_names: &[String]) -> String {
        print_sindy_equations(self, state_names)
    }
}

fn check_sindy_shapes(xdot: &Matrix, psi: &Matrix) -> Result<(), SysidError> {
    if xdot.ncols() != psi.ncols() {
        return Err(SysidError::Shape {
            what: format!(
                "derivative block has {} samples, features have {}",
                xdot.ncols(),
                psi.ncols()
            ),
        });
    }
    if psi.ncols() == 0 {
        return Err(SysidError::Shape {
            what: "empty sample set".into(),
        });
    }
    Ok(())
}

/// Minimum-norm least-squares coefficients:
/// `Xi = argmin ||xdot - Xi^T psi||_F^2`.
pub fn sindy_solve(xdot: &Matrix, psi: &Matrix, rcond: Option<f64>) -> Result<Matrix, SysidError> {
    check_sindy_shapes(xdot, psi)?;
    Ok(linalg::lstsq(&psi.transpose(), &xdot.transpose(), rcond)?)
}

/// Squared Frobenius residual `||xdot - Xi^T psi||_F^2`.
pub fn sindy_loss(xdot: &Matrix, psi: &Matrix, xi: &Matrix) -> Result<f64, SysidError> {
    check_sindy_shapes(xdot, psi)?;
    Ok((xdot - xi.transpose() * psi).norm_squared())
}

/// Gradient of [`sindy_loss`] in the coefficients:
/// `2 (psi psi^T Xi - psi xdot^T)`.
pub fn sindy_grad_xi(xdot: &Matrix, psi: &Matrix, xi: &Matrix) -> Result<Matrix, SysidError> {
    check_sindy_shapes(xdot, psi)?;
    Ok((psi * psi.transpose() * xi - psi * xdot.transpose()) * 2.0)
}

/// Gradient of the reconstruction loss in the flat dictionary parameters,
/// with frozen entries masked to zero.
pub fn sindy_grad_w(
    dict: &Dictionary,
    w: &Vector,
    x: &Matrix,
    xdot: &Matrix,
    xi: &Matrix,
) -> Result<Vector, SysidError> {
    let psi = dict.evaluate(x, w)?;
    check_sindy_shapes(xdot, &psi)?;
    let residual = xdot - xi.transpose() * &psi;
    let d_psi = (xi * residual) * -2.0;
    let jac = dict.param_jacobian(x, w)?;
    let mut grad = Vector::zeros(dict.param_len());
    jac.accumulate_contraction(dict, &d_psi, &mut grad);
    dict.mask_gradient(&mut grad);
    Ok(grad)
}

/// Per-sample split `||xdot_j - Xi^T psi_j||^2`; sums to [`sindy_loss`].
pub fn per_sample_sindy_loss(
    xdot: &Matrix,
    psi: &Matrix,
    xi: &Matrix,
) -> Result<Vector, SysidError> {
    check_sindy_shapes(xdot, psi)?;
    let residual = xdot - xi.transpose() * psi;
    Ok(Vector::from_iterator(
        residual.ncols(),
        residual.column_iter().map(|c| c.norm_squared()),
    ))
}

struct SindyObjective<'a> {
    dict: &'a Dictionary,
    x: &'a Matrix,
    xdot: &'a Matrix,
    cache: RefCell<Option<(Vector, Matrix)>>,
}

impl<'a> SindyObjective<'a> {
    fn features(&self, w: &Vector) -> Matrix {
        if let Some((cached_w, psi)) = self.cache.borrow().as_ref() {
            if cached_w == w {
                return psi.clone();
            }
        }
        let psi = self.dict.evaluate(self.x, w).expect("validated inputs");
        *self.cache.borrow_mut() = Some((w.clone(), psi.clone()));
        psi
    }
}

impl<'a> TwoBlockObjective for SindyObjective<'a> {
    fn coeff_shape(&self) -> (usize, usize) {
        (self.dict.len(), self.xdot.nrows())
    }
    fn param_len(&self) -> usize {
        self.dict.param_len()
    }
    fn sample_count(&self) -> usize {
        self.x.ncols()
    }
    fn loss_coeff(&self, coeffs: &Matrix, params: &Vector) -> f64 {
        let psi = self.features(params);
        sindy_loss(self.xdot, &psi, coeffs)
            .expect("validated inputs")
            .sqrt()
    }
    fn loss_param(&self, coeffs: &Matrix, params: &Vector) -> f64 {
        // one shared reconstruction loss drives both blocks
        self.loss_coeff(coeffs, params)
    }
    fn grad_coeff(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Matrix {
        let psi = self.features(params);
        match batch {
            None => sindy_grad_xi(self.xdot, &psi, coeffs).expect("validated inputs"),
            Some(idx) => {
                let pb = psi.select_columns(idx.iter());
                let db = self.xdot.select_columns(idx.iter());
                let scale = self.sample_count() as f64 / idx.len() as f64;
                sindy_grad_xi(&db, &pb, coeffs).expect("validated inputs") * scale
            }
        }
    }
    fn grad_param(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Vector {
        match batch {
            None => sindy_grad_w(self.dict, params, self.x, self.xdot, coeffs)
                .expect("validated inputs"),
            Some(idx) => {
                let xb = self.x.select_columns(idx.iter());
                let db = self.xdot.select_columns(idx.iter());
                let scale = self.sample_count() as f64 / idx.len() as f64;
                sindy_grad_w(self.dict, params, &xb, &db, coeffs).expect("validated inputs") * scale
            }
        }
    }
}

/// Alternating fit of dictionary parameters and coefficients on derivative
/// data. `xi0 = None` warm-starts from the closed-form solve at `w0`.
pub fn fit_parametric_sindy(
    x: &Matrix,
    xdot: &Matrix,
    dict: &Dictionary,
    w0: Vector,
    xi0: Option<Matrix>,
    cfg: &OptimizerConfig,
) -> Result<(SindyModel, AlternatingFit), SysidError> {
    let psi0 = dict.evaluate(x, &w0)?;
    check_sindy_shapes(xdot, &psi0)?;
    let xi0 = match xi0 {
        Some(xi) => {
            if xi.shape() != (dict.len(), xdot.nrows()) {
                return Err(SysidError::Shape {
                    what: format!(
                        "coefficient block is {}x{}, expected {}x{}",
                        xi.nrows(),
                        xi.ncols(),
                        dict.len(),
                        xdot.nrows()
                    ),
                });
            }
            xi
        }
        None => sindy_solve(xdot, &psi0, None)?,
    };
    let objective = SindyObjective {
        dict,
        x,
        xdot,
        cache: RefCell::new(None),
    };
    let fit = alternating_adam(&objective, xi0, w0, cfg)?;
    let model = SindyModel {
        dictionary: dict.clone(),
        params: fit.params.clone(),
        xi: fit.coeffs.clone(),
    };
    Ok((model, fit))
}

/// Sweeps one trainable dictionary parameter over `values`, solving the
/// coefficients in closed form at each point, and returns `(value, loss)`
/// pairs with the unsquared residual norm.
pub fn sindy_landscape(
    dict: &Dictionary,
    w: &Vector,
    param_index: usize,
    values: &[f64],
    x: &Matrix,
    xdot: &Matrix,
    rcond: Option<f64>,
) -> Result<Vec<(f64, f64)>, SysidError> {
    if param_index >= dict.param_len() {
        return Err(SysidError::Shape {
            what: format!(
                "parameter index {param_index} out of range for {} parameters",
                dict.param_len()
            ),
        });
    }
    if !dict.trainable()[param_index] {
        return Err(SysidError::NotTrainable { index: param_index });
    }
    let mut out = Vec::with_capacity(values.len());
    let mut probe = w.clone();
    for &v in values {
        probe[param_index] = v;
        let psi = dict.evaluate(x, &probe)?;
        let xi = sindy_solve(xdot, &psi, rcond)?;
        let loss = sindy_loss(xdot, &psi, &xi)?.sqrt();
        out.push((v, loss));
    }
    Ok(out)
}

/// The default candidate-term labels for scalar reaction-diffusion
/// discovery, including conductivity terms with a trainable shared rate.
pub const HEAT_LIBRARY: [&str; 9] = [
    "1",
    "u",
    "u_x",
    "u*u_x",
    "u^2*u_x",
    "u*u_xx",
    "u^2*u_xx",
    "exp(chi*u)*u_x^2",
    "exp(chi*u)*u_xx",
];

const EXP_FACTOR: &str = "exp(chi*u)";

/// Parses a term label into (has exp factor, exponents of `u, u_x, u_xx`).
fn parse_term(label: &str) -> Result<(bool, [u32; 3]), SysidError> {
    let unknown = || SysidError::UnknownTerm {
        label: label.to_string(),
    };
    let mut rest = label.trim();
    let mut has_exp = false;
    if let Some(pos) = rest.find(EXP_FACTOR) {
        has_exp = true;
        let mut stripped = String::new();
        stripped.push_str(&rest[..pos]);
        stripped.push_str(&rest[pos + EXP_FACTOR.len()..]);
        let stripped = stripped.trim_matches('*').to_string();
        if stripped.contains(EXP_FACTOR) {
            return Err(unknown());
        }
        return parse_monomial_part(&stripped, label).map(|e| (has_exp, e));
    }
    if rest.is_empty() {
        return Err(unknown());
    }
    if rest == "1" {
        rest = "";
    }
    parse_monomial_part(rest, label).map(|e| (has_exp, e))
}

fn parse_monomial_part(part: &str, label: &str) -> Result<[u32; 3], SysidError> {
    let unknown = || SysidError::UnknownTerm {
        label: label.to_string(),
    };
    let mut exps = [0u32; 3];
    if part.is_empty() {
        return Ok(exps);
    }
    for factor in part.split('*') {
        if factor == "1" {
            continue;
        }
        let (base, power) = match factor.split_once('^') {
            Some((b, p)) => (b, p.parse::<u32>().map_err(|_| unknown())?),
            None => (factor, 1),
        };
        let idx = match base {
            "u" => 0,
            "u_x" => 1,
            "u_xx" => 2,
            _ => return Err(unknown()),
        };
        exps[idx] += power;
    }
    Ok(exps)
}

/// Candidate-term matrix for PDE discovery plus everything needed to
/// rebuild it when the shared nonlinear parameters move.
///
/// Internally the terms form a dictionary over the pseudo-state
/// `(u, u_x, u_xx)`; every `exp(chi*u)` factor owns one rate parameter in
/// the flat layout, and all of them are tied to a single shared `chi`
/// (full parameters are expanded from the shared vector, gradients are
/// summed back).
#[derive(Debug, Clone)]
pub struct PdeLibrary {
    dict: Dictionary,
    /// `3 x rows` pseudo-state at interior grid points, time-major.
    pseudo: Matrix,
    /// Time derivative at the same points.
    pub ut: Vector,
    pub labels: Vec<String>,
    /// Maps each flat dictionary parameter to its shared slot.
    tie: Vec<usize>,
    pub shared_len: usize,
}

/// Builds the candidate library from a field. `w` holds the shared
/// nonlinear parameters (one entry when any `exp(chi*u)` term is present,
/// empty otherwise).
pub fn build_pde_library(
    u: &GridField,
    terms: &[&str],
    w: &Vector,
) -> Result<PdeLibrary, SysidError> {
    if u.nt() < 5 {
        return Err(SysidError::GridTooSmall {
            axis: "time",
            needed: 5,
            have: u.nt(),
        });
    }
    let mut specs = Vec::with_capacity(terms.len());
    let mut uses_exp = false;
    for label in terms {
        let (has_exp, exps) = parse_term(label)?;
        uses_exp |= has_exp;
        specs.push((has_exp, exps));
    }
    let shared_len = usize::from(uses_exp);
    if w.len() != shared_len {
        return Err(SysidError::SharedParamLen {
            got: w.len(),
            expected: shared_len,
        });
    }
    let chi = if uses_exp { w[0] } else { 0.0 };

    let mut basis = Vec::with_capacity(terms.len());
    for (has_exp, exps) in &specs {
        let monomial = BasisSpec::Monomial(exps.to_vec());
        if *has_exp {
            basis.push(BasisSpec::Product(vec![
                BasisSpec::ExpRate {
                    coord: 0,
                    rate: chi,
                },
                monomial,
            ]));
        } else if exps.iter().all(|&e| e == 0) {
            basis.push(BasisSpec::Constant);
        } else {
            basis.push(monomial);
        }
    }
    let (dict, w_full) = Dictionary::build(3, &basis)?;
    let tie = vec![0usize; w_full.len()];

    let ut = flatten_time_major(&finite_diff_time(u));
    let ui = flatten_time_major(&interior_values(u));
    let ux = flatten_time_major(&finite_diff_space(u, 1)?);
    let uxx = flatten_time_major(&finite_diff_space(u, 2)?);
    let rows = ut.len();
    let mut pseudo = Matrix::zeros(3, rows);
    for r in 0..rows {
        pseudo[(0, r)] = ui[r];
        pseudo[(1, r)] = ux[r];
        pseudo[(2, r)] = uxx[r];
    }

    Ok(PdeLibrary {
        dict,
        pseudo,
        ut,
        labels: terms.iter().map(|s| s.to_string()).collect(),
        tie,
        shared_len,
    })
}

impl PdeLibrary {
    pub fn rows(&self) -> usize {
        self.ut.len()
    }

    pub fn term_count(&self) -> usize {
        self.dict.len()
    }

    fn check_shared(&self, w: &Vector) -> Result<(), SysidError> {
        if w.len() != self.shared_len {
            return Err(SysidError::SharedParamLen {
                got: w.len(),
                expected: self.shared_len,
            });
        }
        Ok(())
    }

    fn expand(&self, w: &Vector) -> Vector {
        Vector::from_iterator(self.tie.len(), self.tie.iter().map(|&s| w[s]))
    }

    /// Evaluates the `rows x terms` candidate matrix at shared parameters `w`.
    pub fn theta(&self, w: &Vector) -> Result<Matrix, SysidError> {
        self.check_shared(w)?;
        let psi = self.dict.evaluate(&self.pseudo, &self.expand(w))?;
        Ok(psi.transpose())
    }

    /// Gradient of `||ut - Theta(w) xi||^2` in the shared parameters,
    /// optionally restricted to a row batch (gradient left unscaled).
    pub fn grad_w(
        &self,
        w: &Vector,
        xi: &Vector,
        batch: Option<&[usize]>,
    ) -> Result<Vector, SysidError> {
        self.check_shared(w)?;
        if xi.len() != self.term_count() {
            return Err(SysidError::Shape {
                what: format!(
                    "coefficient vector has {} entries, library has {} terms",
                    xi.len(),
                    self.term_count()
                ),
            });
        }
        let (pseudo, ut);
        let (pseudo_ref, ut_ref): (&Matrix, &Vector) = match batch {
            None => (&self.pseudo, &self.ut),
            Some(idx) => {
                pseudo = self.pseudo.select_columns(idx.iter());
                ut = Vector::from_iterator(idx.len(), idx.iter().map(|&r| self.ut[r]));
                (&pseudo, &ut)
            }
        };
        let w_full = self.expand(w);
        let psi = self.dict.evaluate(pseudo_ref, &w_full)?;
        let residual = ut_ref - psi.transpose() * xi;
        let d_psi = xi * residual.transpose() * -2.0;
        let jac = self.dict.param_jacobian(pseudo_ref, &w_full)?;
        let mut full = Vector::zeros(self.dict.param_len());
        jac.accumulate_contraction(&self.dict, &d_psi, &mut full);
        let mut shared = Vector::zeros(self.shared_len);
        for (i, &slot) in self.tie.iter().enumerate() {
            shared[slot] += full[i];
        }
        Ok(shared)
    }
}

/// A discovered PDE `u_t = sum_i xi_i theta_i(u; w)`.
#[derive(Debug, Clone)]
pub struct PdeModel {
    pub xi: Vector,
    pub w: Vector,
    pub labels: Vec<String>,
}

/// Minimum-norm least squares for the PDE coefficients.
pub fn pdefind_solve(theta: &Matrix, ut: &Vector, rcond: Option<f64>) -> Result<Vector, SysidError> {
    check_pde_shapes(theta, ut)?;
    let b = Matrix::from_column_slice(ut.len(), 1, ut.as_slice());
    let sol = linalg::lstsq(theta, &b, rcond)?;
    Ok(sol.column(0).into_owned())
}

fn check_pde_shapes(theta: &Matrix, ut: &Vector) -> Result<(), SysidError> {
    if theta.nrows() != ut.len() {
        return Err(SysidError::Shape {
            what: format!(
                "library has {} rows, time derivative has {}",
                theta.nrows(),
                ut.len()
            ),
        });
    }
    if theta.nrows() == 0 {
        return Err(SysidError::Shape {
            what: "empty library".into(),
        });
    }
    Ok(())
}

/// Squared residual `||ut - theta xi||^2`.
pub fn pde_loss(theta: &Matrix, ut: &Vector, xi: &Vector) -> Result<f64, SysidError> {
    check_pde_shapes(theta, ut)?;
    Ok((ut - theta * xi).norm_squared())
}

/// Gradient of [`pde_loss`] in the coefficients:
/// `2 theta^T theta xi - 2 theta^T ut`.
pub fn pde_grad_xi(theta: &Matrix, ut: &Vector, xi: &Vector) -> Result<Vector, SysidError> {
    check_pde_shapes(theta, ut)?;
    Ok((theta.transpose() * theta * xi - theta.transpose() * ut) * 2.0)
}

struct PdeObjective<'a> {
    lib: &'a PdeLibrary,
    cache: RefCell<Option<(Vector, Matrix)>>,
}

impl<'a> PdeObjective<'a> {
    fn theta(&self, w: &Vector) -> Matrix {
        if let Some((cached_w, theta)) = self.cache.borrow().as_ref() {
            if cached_w == w {
                return theta.clone();
            }
        }
        let theta = self.lib.theta(w).expect("validated inputs");
        *self.cache.borrow_mut() = Some((w.clone(), theta.clone()));
        theta
    }
}

impl<'a> TwoBlockObjective for PdeObjective<'a> {
    fn coeff_shape(&self) -> (usize, usize) {
        (self.lib.term_count(), 1)
    }
    fn param_len(&self) -> usize {
        self.lib.shared_len
    }
    fn sample_count(&self) -> usize {
        self.lib.rows()
    }
    fn loss_coeff(&self, coeffs: &Matrix, params: &Vector) -> f64 {
        let theta = self.theta(params);
        let xi = coeffs.column(0).into_owned();
        pde_loss(&theta, &self.lib.ut, &xi)
            .expect("validated inputs")
            .sqrt()
    }
    fn loss_param(&self, coeffs: &Matrix, params: &Vector) -> f64 {
        self.loss_coeff(coeffs, params)
    }
    fn grad_coeff(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Matrix {
        let theta = self.theta(params);
        let xi = coeffs.column(0).into_owned();
        let g = match batch {
            None => pde_grad_xi(&theta, &self.lib.ut, &xi).expect("validated inputs"),
            Some(idx) => {
                let tb = theta.select_rows(idx.iter());
                let ub = Vector::from_iterator(idx.len(), idx.iter().map(|&r| self.lib.ut[r]));
                let scale = self.sample_count() as f64 / idx.len() as f64;
                pde_grad_xi(&tb, &ub, &xi).expect("validated inputs") * scale
            }
        };
        Matrix::from_column_slice(g.len(), 1, g.as_slice())
    }
    fn grad_param(&self, coeffs: &Matrix, params: &Vector, batch: Option<&[usize]>) -> Vector {
        let xi = coeffs.column(0).into_owned();
        let scale = match batch {
            None => 1.0,
            Some(idx) => self.sample_count() as f64 / idx.len() as f64,
        };
        self.lib.grad_w(params, &xi, batch).expect("validated inputs") * scale
    }
}

/// Alternating fit of the shared nonlinear parameters and the
/// coefficients. `xi0 = None` warm-starts from the closed-form solve at `w0`.
pub fn fit_parametric_pdefind(
    lib: &PdeLibrary,
    w0: Vector,
    xi0: Option<Vector>,
    cfg: &OptimizerConfig,
) -> Result<(PdeModel, AlternatingFit), SysidError> {
    lib.check_shared(&w0)?;
    let xi0 = match xi0 {
        Some(xi) => {
            if xi.len() != lib.term_count() {
                return Err(SysidError::Shape {
                    what: format!(
                        "coefficient vector has {} entries, library has {} terms",
                        xi.len(),
                        lib.term_count()
                    ),
                });
            }
            xi
        }
        None => pdefind_solve(&lib.theta(&w0)?, &lib.ut, None)?,
    };
    let objective = PdeObjective {
        lib,
        cache: RefCell::new(None),
    };
    let xi0 = Matrix::from_column_slice(xi0.len(), 1, xi0.as_slice());
    let fit = alternating_adam(&objective, xi0, w0, cfg)?;
    let model = PdeModel {
        xi: fit.coeffs.column(0).into_owned(),
        w: fit.params.clone(),
        labels: lib.labels.clone(),
    };
    Ok((model, fit))
}

/// Hard thresholding with refit for ODE models: entries below
/// `threshold * max|Xi|` (global maximum) are zeroed, the surviving terms
/// of each equation are refit by least squares, and the rule is reapplied
/// until the support stops changing.
pub fn threshold_sparsify_sindy(
    model: &SindyModel,
    x: &Matrix,
    xdot: &Matrix,
    threshold: f64,
    rcond: Option<f64>,
) -> Result<SindyModel, SysidError> {
    let psi = model.dictionary.evaluate(x, &model.params)?;
    check_sindy_shapes(xdot, &psi)?;
    let xi = threshold_matrix(&model.xi, &psi, &xdot.transpose(), threshold, rcond)?;
    Ok(SindyModel {
        dictionary: model.dictionary.clone(),
        params: model.params.clone(),
        xi,
    })
}

/// Hard thresholding with refit for PDE models, at the model's fitted
/// shared parameters.
pub fn threshold_sparsify_pde(
    model: &PdeModel,
    lib: &PdeLibrary,
    threshold: f64,
    rcond: Option<f64>,
) -> Result<PdeModel, SysidError> {
    let theta = lib.theta(&model.w)?;
    let xi_mat = Matrix::from_column_slice(model.xi.len(), 1, model.xi.as_slice());
    let targets = Matrix::from_column_slice(lib.ut.len(), 1, lib.ut.as_slice());
    let xi = threshold_matrix(&xi_mat, &theta.transpose(), &targets, threshold, rcond)?;
    Ok(PdeModel {
        xi: xi.column(0).into_owned(),
        w: model.w.clone(),
        labels: model.labels.clone(),
    })
}

/// Shared thresholding core. `coeffs` is `n x d`, `features` is `n x m`
/// (one row per candidate term), `targets` is `m x d`.
fn threshold_matrix(
    coeffs: &Matrix,
    features: &Matrix,
    targets: &Matrix,
    threshold: f64,
    rcond: Option<f64>,
) -> Result<Matrix, SysidError> {
    if threshold < 0.0 {
        return Err(SysidError::Shape {
            what: format!("threshold must be nonnegative, got {threshold}"),
        });
    }
    let mut xi = coeffs.clone();
    if threshold == 0.0 {
        return Ok(xi);
    }
    let n = xi.nrows();
    let d = xi.ncols();
    loop {
        let max = xi.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if max == 0.0 {
            return Err(SysidError::DegenerateModel);
        }
        let cut = threshold * max;
        let mut changed = false;
        let mut next = Matrix::zeros(n, d);
        for j in 0..d {
            let support: Vec<usize> = (0..n)
                .filter(|&i| xi[(i, j)] != 0.0 && xi[(i, j)].abs() >= cut)
                .collect();
            for i in 0..n {
                if xi[(i, j)] != 0.0 && !support.contains(&i) {
                    changed = true;
                }
            }
            if support.is_empty() {
                continue;
            }
            let sub = features.select_rows(support.iter());
            let target_j = targets.column(j).into_owned();
            let target_j = Matrix::from_column_slice(target_j.len(), 1, target_j.as_slice());
            let refit = linalg::lstsq(&sub.transpose(), &target_j, rcond)?;
            for (k, &i) in support.iter().enumerate() {
                next[(i, j)] = refit[(k, 0)];
            }
        }
        xi = next;
        if !changed {
            return Ok(xi);
        }
    }
}

/// Ratio of extreme singular values; infinity when the smallest falls
/// below the default cutoff (exact rank deficiency included).
pub fn condition_number(theta: &Matrix) -> f64 {
    assert!(theta.nrows() > 0 && theta.ncols() > 0, "empty matrix");
    let svd = linalg::thin_svd(theta).expect("finite input");
    let mut max = 0.0f64;
    let mut min = f64::INFINITY;
    for &s in svd.singular_values.iter() {
        max = max.max(s);
        min = min.min(s);
    }
    if min < DEFAULT_RCOND * max || max == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Renders one equation per state dimension, e.g.
/// `dx1/dt = -1.000000000000e0 * x1 + 2.500000000000e-1 * x2`. Exact-zero
/// coefficients are omitted; an empty right-hand side prints as `0`.
pub fn print_sindy_equations(model: &SindyModel, state_names: &[String]) -> String {
    let labels = model.dictionary.labels_with(state_names, &model.params);
    let mut out = String::new();
    for j in 0..model.xi.ncols() {
        let name = state_names
            .get(j)
            .cloned()
            .unwrap_or_else(|| format!("x{}", j + 1));
        let terms: Vec<String> = (0..model.xi.nrows())
            .filter(|&i| model.xi[(i, j)] != 0.0)
            .map(|i| format!("{:.12e} * {}", model.xi[(i, j)], labels[i]))
            .collect();
        let rhs = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        out.push_str(&format!("d{name}/dt = {rhs}\n"));
    }
    out
}

/// Renders the discovered PDE plus, when present, the fitted shared rate
/// on a second line (`chi = ...`).
pub fn print_pde_equation(model: &PdeModel) -> String {
    let terms: Vec<String> = (0..model.xi.len())
        .filter(|&i| model.xi[i] != 0.0)
        .map(|i| format!("{:.12e} * {}", model.xi[i], model.labels[i]))
        .collect();
    let rhs = if terms.is_empty() {
        "0".to_string()
    } else {
        terms.join(" + ")
    };
    let mut out = format!("u_t = {rhs}\n");
    if model.w.len() == 1 {
        out.push_str(&format!("chi = {:.12e}\n", model.w[0]));
    }
    out
}

/// Parses one printed equation line back into `(coefficient, label)` pairs.
/// A bare numeric right-hand side yields a single pair with an empty label.
pub fn parse_equation_line(line: &str) -> Result<Vec<(f64, String)>, SysidError> {
    let (_, rhs) = line.split_once(" = ").ok_or_else(|| SysidError::Parse {
        what: format!("missing ` = ` in `{line}`"),
    })?;
    let rhs = rhs.trim();
    if rhs == "0" {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for term in rhs.split(" + ") {
        match term.split_once(" * ") {
            Some((coef, label)) => {
                let value = coef.trim().parse::<f64>().map_err(|_| SysidError::Parse {
                    what: format!("bad coefficient `{coef}`"),
                })?;
                out.push((value, label.trim().to_string()));
            }
            None => {
                let value = term.trim().parse::<f64>().map_err(|_| SysidError::Parse {
                    what: format!("bad term `{term}`"),
                })?;
                out.push((value, String::new()));
            }
        }
    }
    Ok(out)
}
