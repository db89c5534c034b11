//! Trainable basis-function dictionaries.
//!
//! A [`Dictionary`] is an ordered list of scalar basis functions over a
//! `d`-dimensional state. Families with continuous parameters (Gaussian
//! bumps, trigonometric waves, exponential rates) expose those parameters
//! through one flat vector `w`, laid out basis by basis, so optimizers can
//! treat the whole dictionary as a single trainable object. Gaussian
//! bandwidths are stored as `log sigma` internally, which keeps them positive
//! under unconstrained updates; the bandwidth derivative reported in the
//! Jacobian is taken with respect to `log sigma` accordingly.
//!
//! [`Dictionary::evaluate`] maps a state batch `x` (`d x m`) to the feature
//! matrix `Psi` (`n x m`). [`Dictionary::param_jacobian`] returns, for each
//! basis function, the dense block `d psi_i / d w_slice_i` (`p_i x m`);
//! entries outside a function's own slice are structurally zero and never
//! stored. [`Dictionary::state_jacobian`] gives `d psi_i / d x` per function.

use crate::linalg::{Matrix, Vector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DictionaryError {
    #[error("dictionary must contain at least one basis function")]
    Empty,
    #[error("coordinate index {index} out of range for state dimension {state_dim}")]
    BadCoordinate { index: usize, state_dim: usize },
    #[error("monomial exponent vector has length {got}, expected state dimension {expected}")]
    BadMonomial { expected: usize, got: usize },
    #[error("center has length {got}, expected state dimension {expected}")]
    BadCenter { expected: usize, got: usize },
    #[error("frequency vector has length {got}, expected state dimension {expected}")]
    BadFrequency { expected: usize, got: usize },
    #[error("bandwidth must be positive and finite, got {value}")]
    BadBandwidth { value: f64 },
    #[error("initial parameter {value} is not finite")]
    NonFiniteParameter { value: f64 },
    #[error("product basis must have at least one factor")]
    EmptyProduct,
    #[error("state batch has dimension {got}, dictionary expects {expected}")]
    StateDimMismatch { expected: usize, got: usize },
    #[error("parameter vector has length {got}, dictionary expects {expected}")]
    ParamLenMismatch { expected: usize, got: usize },
    #[error("trainable mask has length {got}, expected {expected}")]
    MaskLenMismatch { expected: usize, got: usize },
    #[error("non-finite value in {what} at index {index}")]
    NonFiniteInput { what: &'static str, index: usize },
}

/// Basis-function description carrying initial parameter values.
///
/// Used to build a [`Dictionary`]; the continuous values are split off into
/// the flat parameter vector by [`Dictionary::build`].
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    /// The constant function `1`.
    Constant,
    /// The coordinate projection `x_k` (zero-based index).
    Coordinate(usize),
    /// `prod_k x_k^(e_k)` with one exponent per coordinate.
    Monomial(Vec<u32>),
    /// Isotropic Gaussian `exp(-||x - c||^2 / (2 sigma^2))`.
    GaussianRbf { center: Vec<f64>, bandwidth: f64 },
    /// `sin(f . x + phase)`.
    SineFreq { frequency: Vec<f64>, phase: f64 },
    /// `cos(f . x + phase)`.
    CosineFreq { frequency: Vec<f64>, phase: f64 },
    /// `exp(rate * x_k)`.
    ExpRate { coord: usize, rate: f64 },
    /// Product of the listed factors; parameters are concatenated.
    Product(Vec<BasisSpec>),
}

/// Structural part of a basis function; continuous values live in the flat
/// parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BasisStructure {
    Constant,
    Coordinate { index: usize },
    Monomial { exponents: Vec<u32> },
    GaussianRbf,
    SineFreq,
    CosineFreq,
    ExpRate { coord: usize },
    Product { factors: Vec<BasisStructure> },
}

impl BasisStructure {
    fn param_len(&self, state_dim: usize) -> usize {
        match self {
            BasisStructure::Constant
            | BasisStructure::Coordinate { .. }
            | BasisStructure::Monomial { .. } => 0,
            BasisStructure::GaussianRbf => state_dim + 1,
            BasisStructure::SineFreq | BasisStructure::CosineFreq => state_dim + 1,
            BasisStructure::ExpRate { .. } => 1,
            BasisStructure::Product { factors } => {
                factors.iter().map(|f| f.param_len(state_dim)).sum()
            }
        }
    }
}

fn split_spec(
    spec: &BasisSpec,
    state_dim: usize,
    params: &mut Vec<f64>,
) -> Result<BasisStructure, DictionaryError> {
    match spec {
        BasisSpec::Constant => Ok(BasisStructure::Constant),
        BasisSpec::Coordinate(index) => {
            if *index >= state_dim {
                return Err(DictionaryError::BadCoordinate {
                    index: *index,
                    state_dim,
                });
            }
            Ok(BasisStructure::Coordinate { index: *index })
        }
        BasisSpec::Monomial(exponents) => {
            if exponents.len() != state_dim {
                return Err(DictionaryError::BadMonomial {
                    expected: state_dim,
                    got: exponents.len(),
                });
            }
            Ok(BasisStructure::Monomial {
                exponents: exponents.clone(),
            })
        }
        BasisSpec::GaussianRbf { center, bandwidth } => {
            if center.len() != state_dim {
                return Err(DictionaryError::BadCenter {
                    expected: state_dim,
                    got: center.len(),
                });
            }
            if !(bandwidth.is_finite() && *bandwidth > 0.0) {
                return Err(DictionaryError::BadBandwidth { value: *bandwidth });
            }
            push_finite(params, center)?;
            params.push(bandwidth.ln());
            Ok(BasisStructure::GaussianRbf)
        }
        BasisSpec::SineFreq { frequency, phase } => {
            check_wave(frequency, *phase, state_dim)?;
            push_finite(params, frequency)?;
            params.push(*phase);
            Ok(BasisStructure::SineFreq)
        }
        BasisSpec::CosineFreq { frequency, phase } => {
            check_wave(frequency, *phase, state_dim)?;
            push_finite(params, frequency)?;
            params.push(*phase);
            Ok(BasisStructure::CosineFreq)
        }
        BasisSpec::ExpRate { coord, rate } => {
            if *coord >= state_dim {
                return Err(DictionaryError::BadCoordinate {
                    index: *coord,
                    state_dim,
                });
            }
            if !rate.is_finite() {
                return Err(DictionaryError::NonFiniteParameter { value: *rate });
            }
            params.push(*rate);
            Ok(BasisStructure::ExpRate { coord: *coord })
        }
        BasisSpec::Product(factors) => {
            if factors.is_empty() {
                return Err(DictionaryError::EmptyProduct);
            }
            let parts = factors
                .iter()
                .map(|f| split_spec(f, state_dim, params))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(BasisStructure::Product { factors: parts })
        }
    }
}

fn check_wave(frequency: &[f64], phase: f64, state_dim: usize) -> Result<(), DictionaryError> {
    if frequency.len() != state_dim {
        return Err(DictionaryError::BadFrequency {
            expected: state_dim,
            got: frequency.len(),
        });
    }
    if !phase.is_finite() {
        return Err(DictionaryError::NonFiniteParameter { value: phase });
    }
    Ok(())
}

fn push_finite(params: &mut Vec<f64>, values: &[f64]) -> Result<(), DictionaryError> {
    for &v in values {
        if !v.is_finite() {
            return Err(DictionaryError::NonFiniteParameter { value: v });
        }
        params.push(v);
    }
    Ok(())
}

/// Ordered collection of basis functions with a flat trainable-parameter
/// layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    state_dim: usize,
    basis: Vec<BasisStructure>,
    /// `offsets[i]..offsets[i+1]` is basis `i`'s slice of the flat vector.
    offsets: Vec<usize>,
    trainable: Vec<bool>,
}

impl Dictionary {
    /// Validates the specs and splits them into structure plus the initial
    /// flat parameter vector. All parameters start trainable.
    pub fn build(
        state_dim: usize,
        specs: &[BasisSpec],
    ) -> Result<(Dictionary, Vector), DictionaryError> {
        if specs.is_empty() {
            return Err(DictionaryError::Empty);
        }
        let mut params = Vec::new();
        let mut basis = Vec::with_capacity(specs.len());
        let mut offsets = Vec::with_capacity(specs.len() + 1);
        offsets.push(0);
        for spec in specs {
            let structure = split_spec(spec, state_dim, &mut params)?;
            basis.push(structure);
            offsets.push(params.len());
        }
        let trainable = vec![true; params.len()];
        Ok((
            Dictionary {
                state_dim,
                basis,
                offsets,
                trainable,
            },
            Vector::from_vec(params),
        ))
    }

    /// Rebuilds a dictionary from its serialized structure.
    pub fn from_parts(
        state_dim: usize,
        basis: Vec<BasisStructure>,
        trainable: Vec<bool>,
    ) -> Result<Dictionary, DictionaryError> {
        if basis.is_empty() {
            return Err(DictionaryError::Empty);
        }
        let mut offsets = Vec::with_capacity(basis.len() + 1);
        offsets.push(0);
        let mut total = 0;
        for b in &basis {
            total += b.param_len(state_dim);
            offsets.push(total);
        }
        if trainable.len() != total {
            return Err(DictionaryError::MaskLenMismatch {
                expected: total,
                got: trainable.len(),
            });
        }
        Ok(Dictionary {
            state_dim,
            basis,
            offsets,
            trainable,
        })
    }

    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn param_len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn basis(&self) -> &[BasisStructure] {
        &self.basis
    }

    /// Slice of the flat parameter vector owned by basis function `i`.
    pub fn param_slice(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    pub fn trainable(&self) -> &[bool] {
        &self.trainable
    }

    /// Replaces the whole per-parameter trainable mask.
    pub fn set_trainable(&mut self, mask: Vec<bool>) -> Result<(), DictionaryError> {
        if mask.len() != self.param_len() {
            return Err(DictionaryError::MaskLenMismatch {
                expected: self.param_len(),
                got: mask.len(),
            });
        }
        self.trainable = mask;
        Ok(())
    }

    pub fn set_trainable_entry(&mut self, index: usize, trainable: bool) {
        self.trainable[index] = trainable;
    }

    /// Zeroes gradient entries of frozen parameters in place.
    pub fn mask_gradient(&self, gradient: &mut Vector) {
        for (g, &t) in gradient.iter_mut().zip(self.trainable.iter()) {
            if !t {
                *g = 0.0;
            }
        }
    }

    /// Indices of trainable entries in the flat parameter vector.
    pub fn trainable_indices(&self) -> Vec<usize> {
        self.trainable
            .iter()
            .enumerate()
            .filter_map(|(i, &t)| if t { Some(i) } else { None })
            .collect()
    }

    fn check_inputs(&self, x: &Matrix, w: &Vector) -> Result<(), DictionaryError> {
        if x.nrows() != self.state_dim {
            return Err(DictionaryError::StateDimMismatch {
                expected: self.state_dim,
                got: x.nrows(),
            });
        }
        if w.len() != self.param_len() {
            return Err(DictionaryError::ParamLenMismatch {
                expected: self.param_len(),
                got: w.len(),
            });
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(DictionaryError::NonFiniteInput { what: "state", index });
        }
        if let Some(index) = w.iter().position(|v| !v.is_finite()) {
            return Err(DictionaryError::NonFiniteInput {
                what: "parameters",
                index,
            });
        }
        Ok(())
    }

    /// Feature matrix `Psi` with `Psi[i][j] = psi_i(x_j)` (`n x m`).
    pub fn evaluate(&self, x: &Matrix, w: &Vector) -> Result<Matrix, DictionaryError> {
        self.check_inputs(x, w)?;
        let m = x.ncols();
        let mut psi = Matrix::zeros(self.len(), m);
        for j in 0..m {
            let col = x.column(j);
            for (i, b) in self.basis.iter().enumerate() {
                let slice = self.param_slice(i);
                psi[(i, j)] = eval_basis(b, col.as_slice(), &w.as_slice()[slice]);
            }
        }
        Ok(psi)
    }

    /// Per-basis blocks of `d psi_i / d w` (`p_i x m` each).
    pub fn param_jacobian(&self, x: &Matrix, w: &Vector) -> Result<ParamJacobian, DictionaryError> {
        self.check_inputs(x, w)?;
        let m = x.ncols();
        let mut blocks = Vec::with_capacity(self.len());
        for (i, b) in self.basis.iter().enumerate() {
            let slice = self.param_slice(i);
            let p = slice.len();
            let mut block = Matrix::zeros(p, m);
            let mut scratch = vec![0.0; p];
            for j in 0..m {
                let col = x.column(j);
                scratch.fill(0.0);
                eval_basis_with_param_grad(
                    b,
                    col.as_slice(),
                    &w.as_slice()[slice.clone()],
                    &mut scratch,
                );
                for (k, &g) in scratch.iter().enumerate() {
                    block[(k, j)] = g;
                }
            }
            blocks.push(block);
        }
        Ok(ParamJacobian { blocks })
    }

    /// Per-basis blocks of `d psi_i / d x` (`d x m` each).
    pub fn state_jacobian(&self, x: &Matrix, w: &Vector) -> Result<Vec<Matrix>, DictionaryError> {
        self.check_inputs(x, w)?;
        let m = x.ncols();
        let d = self.state_dim;
        let mut blocks = Vec::with_capacity(self.len());
        for (i, b) in self.basis.iter().enumerate() {
            let slice = self.param_slice(i);
            let mut block = Matrix::zeros(d, m);
            let mut scratch = vec![0.0; d];
            for j in 0..m {
                let col = x.column(j);
                scratch.fill(0.0);
                eval_basis_with_state_grad(
                    b,
                    col.as_slice(),
                    &w.as_slice()[slice.clone()],
                    &mut scratch,
                );
                for (k, &g) in scratch.iter().enumerate() {
                    block[(k, j)] = g;
                }
            }
            blocks.push(block);
        }
        Ok(blocks)
    }

    /// Human-readable labels with parameter values substituted from `w`,
    /// using `names` for the coordinates.
    pub fn labels_with(&self, names: &[String], w: &Vector) -> Vec<String> {
        self.basis
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let slice = self.param_slice(i);
                label_basis(b, names, &w.as_slice()[slice])
            })
            .collect()
    }

    /// Labels with the default coordinate names `x1..xd`.
    pub fn labels(&self, w: &Vector) -> Vec<String> {
        let names: Vec<String> = (1..=self.state_dim).map(|k| format!("x{k}")).collect();
        self.labels_with(&names, w)
    }
}

/// Block-sparse parameter Jacobian: one dense `p_i x m` block per basis
/// function; all cross-basis entries are structurally zero.
#[derive(Debug, Clone)]
pub struct ParamJacobian {
    pub blocks: Vec<Matrix>,
}

impl ParamJacobian {
    /// Chain-rule contraction: given `dL/dPsi` (`n x m`), accumulates
    /// `dL/dw[slice_i] += block_i * dL/dPsi[i, :]^T` into a flat gradient.
    pub fn accumulate_contraction(
        &self,
        dict: &Dictionary,
        d_loss_d_psi: &Matrix,
        gradient: &mut Vector,
    ) {
        for (i, block) in self.blocks.iter().enumerate() {
            if block.nrows() == 0 {
                continue;
            }
            let slice = dict.param_slice(i);
            let row = d_loss_d_psi.row(i).transpose();
            let contribution = block * row;
            for (k, idx) in slice.enumerate() {
                gradient[idx] += contribution[k];
            }
        }
    }
}

fn eval_basis(b: &BasisStructure, x: &[f64], w: &[f64]) -> f64 {
    match b {
        BasisStructure::Constant => 1.0,
        BasisStructure::Coordinate { index } => x[*index],
        BasisStructure::Monomial { exponents } => exponents
            .iter()
            .enumerate()
            .map(|(k, &e)| x[k].powi(e as i32))
            .product(),
        BasisStructure::GaussianRbf => {
            let d = x.len();
            let sigma = w[d].exp();
            let sq: f64 = x.iter().zip(&w[..d]).map(|(&xi, &ci)| (xi - ci).powi(2)).sum();
            (-sq / (2.0 * sigma * sigma)).exp()
        }
        BasisStructure::SineFreq => wave_arg(x, w).sin(),
        BasisStructure::CosineFreq => wave_arg(x, w).cos(),
        BasisStructure::ExpRate { coord } => (w[0] * x[*coord]).exp(),
        BasisStructure::Product { factors } => {
            let mut offset = 0;
            let mut value = 1.0;
            for f in factors {
                let p = f.param_len(x.len());
                value *= eval_basis(f, x, &w[offset..offset + p]);
                offset += p;
            }
            value
        }
    }
}

fn wave_arg(x: &[f64], w: &[f64]) -> f64 {
    let d = x.len();
    x.iter().zip(&w[..d]).map(|(&xi, &fi)| fi * xi).sum::<f64>() + w[d]
}

/// Evaluates the basis and writes `d psi / d w` into `grad`; returns the
/// value.
fn eval_basis_with_param_grad(b: &BasisStructure, x: &[f64], w: &[f64], grad: &mut [f64]) -> f64 {
    match b {
        BasisStructure::Constant
        | BasisStructure::Coordinate { .. }
        | BasisStructure::Monomial { .. } => eval_basis(b, x, w),
        BasisStructure::GaussianRbf => {
            let d = x.len();
            let sigma = w[d].exp();
            let inv_s2 = 1.0 / (sigma * sigma);
            let sq: f64 = x.iter().zip(&w[..d]).map(|(&xi, &ci)| (xi - ci).powi(2)).sum();
            let value = (-0.5 * sq * inv_s2).exp();
            for k in 0..d {
                grad[k] = value * (x[k] - w[k]) * inv_s2;
            }
            // bandwidth is stored as log sigma: d psi / d log sigma
            grad[d] = value * sq * inv_s2;
            value
        }
        BasisStructure::SineFreq => {
            let d = x.len();
            let arg = wave_arg(x, w);
            let (sin, cos) = arg.sin_cos();
            for k in 0..d {
                grad[k] = cos * x[k];
            }
            grad[d] = cos;
            sin
        }
        BasisStructure::CosineFreq => {
            let d = x.len();
            let arg = wave_arg(x, w);
            let (sin, cos) = arg.sin_cos();
            for k in 0..d {
                grad[k] = -sin * x[k];
            }
            grad[d] = -sin;
            cos
        }
        BasisStructure::ExpRate { coord } => {
            let value = (w[0] * x[*coord]).exp();
            grad[0] = x[*coord] * value;
            value
        }
        BasisStructure::Product { factors } => {
            let d = x.len();
            let mut offset = 0;
            let mut values = Vec::with_capacity(factors.len());
            for f in factors {
                let p = f.param_len(d);
                let value =
                    eval_basis_with_param_grad(f, x, &w[offset..offset + p], &mut grad[offset..offset + p]);
                values.push((offset, p, value));
                offset += p;
            }
            let total: f64 = values.iter().map(|&(_, _, v)| v).product();
            // product rule: scale each factor's gradient by the others'
            // values; factors are identified by position, since
            // parameterless ones share their offset with the next factor
            for (i, &(start, p, _)) in values.iter().enumerate() {
                if p == 0 {
                    continue;
                }
                let others: f64 = values
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, &(_, _, v))| v)
                    .product();
                for g in &mut grad[start..start + p] {
                    *g *= others;
                }
            }
            total
        }
    }
}

/// Evaluates the basis and writes `d psi / d x` into `grad`; returns the
/// value.
fn eval_basis_with_state_grad(b: &BasisStructure, x: &[f64], w: &[f64], grad: &mut [f64]) -> f64 {
    match b {
        BasisStructure::Constant => 1.0,
        BasisStructure::Coordinate { index } => {
            grad[*index] = 1.0;
            x[*index]
        }
        BasisStructure::Monomial { exponents } => {
            let value: f64 = exponents
                .iter()
                .enumerate()
                .map(|(k, &e)| x[k].powi(e as i32))
                .product();
            for (k, &e) in exponents.iter().enumerate() {
                if e == 0 {
                    grad[k] = 0.0;
                } else {
                    let partial: f64 = exponents
                        .iter()
                        .enumerate()
                        .map(|(l, &el)| {
                            if l == k {
                                e as f64 * x[l].powi(e as i32 - 1)
                            } else {
                                x[l].powi(el as i32)
                            }
                        })
                        .product();
                    grad[k] = partial;
                }
            }
            value
        }
        BasisStructure::GaussianRbf => {
            let d = x.len();
            let sigma = w[d].exp();
            let inv_s2 = 1.0 / (sigma * sigma);
            let sq: f64 = x.iter().zip(&w[..d]).map(|(&xi, &ci)| (xi - ci).powi(2)).sum();
            let value = (-0.5 * sq * inv_s2).exp();
            for k in 0..d {
                grad[k] = value * (w[k] - x[k]) * inv_s2;
            }
            value
        }
        BasisStructure::SineFreq => {
            let d = x.len();
            let (sin, cos) = wave_arg(x, w).sin_cos();
            for k in 0..d {
                grad[k] = cos * w[k];
            }
            sin
        }
        BasisStructure::CosineFreq => {
            let d = x.len();
            let (sin, cos) = wave_arg(x, w).sin_cos();
            for k in 0..d {
                grad[k] = -sin * w[k];
            }
            cos
        }
        BasisStructure::ExpRate { coord } => {
            let value = (w[0] * x[*coord]).exp();
            grad[*coord] = w[0] * value;
            value
        }
        BasisStructure::Product { factors } => {
            let d = x.len();
            let mut offset = 0;
            let mut scratch = vec![0.0; d];
            let mut values = Vec::with_capacity(factors.len());
            let mut grads = Vec::with_capacity(factors.len());
            for f in factors {
                let p = f.param_len(d);
                scratch.fill(0.0);
                let value = eval_basis_with_state_grad(f, x, &w[offset..offset + p], &mut scratch);
                values.push(value);
                grads.push(scratch.clone());
                offset += p;
            }
            let total: f64 = values.iter().product();
            for k in 0..d {
                let mut acc = 0.0;
                for (fi, g) in grads.iter().enumerate() {
                    let others: f64 = values
                        .iter()
                        .enumerate()
                        .filter(|&(vi, _)| vi != fi)
                        .map(|(_, &v)| v)
                        .product();
                    acc += g[k] * others;
                }
                grad[k] = acc;
            }
            total
        }
    }
}

fn label_basis(b: &BasisStructure, names: &[String], w: &[f64]) -> String {
    match b {
        BasisStructure::Constant => "1".to_string(),
        BasisStructure::Coordinate { index } => names[*index].clone(),
        BasisStructure::Monomial { exponents } => {
            let parts: Vec<String> = exponents
                .iter()
                .enumerate()
                .filter(|&(_, &e)| e > 0)
                .map(|(k, &e)| {
                    if e == 1 {
                        names[k].clone()
                    } else {
                        format!("{}^{}", names[k], e)
                    }
                })
                .collect();
            if parts.is_empty() {
                "1".to_string()
            } else {
                parts.join("*")
            }
        }
        BasisStructure::GaussianRbf => {
            let d = names.len();
            let center: Vec<String> = w[..d].iter().map(|c| format!("{c}")).collect();
            format!("gauss(c=({}), s={})", center.join(","), w[d].exp())
        }
        BasisStructure::SineFreq => format!("sin({})", linear_combo(names, w)),
        BasisStructure::CosineFreq => format!("cos({})", linear_combo(names, w)),
        BasisStructure::ExpRate { coord } => format!("exp({}*{})", w[0], names[*coord]),
        BasisStructure::Product { factors } => {
            let d = names.len();
            let mut offset = 0;
            let parts: Vec<String> = factors
                .iter()
                .map(|f| {
                    let p = f.param_len(d);
                    let s = label_basis(f, names, &w[offset..offset + p]);
                    offset += p;
                    s
                })
                .collect();
            parts.join("*")
        }
    }
}

fn linear_combo(names: &[String], w: &[f64]) -> String {
    let d = names.len();
    let mut out = String::new();
    for (k, &f) in w[..d].iter().enumerate() {
        if f == 0.0 {
            continue;
        }
        if out.is_empty() {
            out.push_str(&format!("{f}*{}", names[k]));
        } else if f < 0.0 {
            out.push_str(&format!(" - {}*{}", -f, names[k]));
        } else {
            out.push_str(&format!(" + {f}*{}", names[k]));
        }
    }
    let phase = w[d];
    if phase != 0.0 {
        if out.is_empty() {
            out.push_str(&format!("{phase}"));
        } else if phase < 0.0 {
            out.push_str(&format!(" - {}", -phase));
        } else {
            out.push_str(&format!(" + {phase}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
