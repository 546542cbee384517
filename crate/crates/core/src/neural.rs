//! Feedforward networks trained from scratch.
//!
//! Parameters live in one flat vector. The flattening order is layer-major;
//! within a layer the weight matrix comes first (row-major, one row per
//! output neuron, one column per input), followed by the bias vector. The
//! PSO trainer relies on the same order when it maps particle positions onto
//! a network.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NeuralError {
    #[error("invalid network spec: {0}")]
    Spec(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("training diverged at epoch {epoch} (mse = {mse})")]
    Divergence { epoch: usize, mse: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid training parameter: {0}")]
    Config(String),
    #[error("network document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Linear,
    Sigmoid,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - 2.0 / ((2.0 * x).exp() + 1.0),
            Activation::Linear => x,
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
        }
    }

    /// Derivative expressed through the activation output `y = f(x)`.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Linear => 1.0,
            Activation::Sigmoid => y * (1.0 - y),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSpec {
    /// Input size, hidden sizes, output size.
    pub layer_sizes: Vec<usize>,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub seed: u64,
}

impl NetworkSpec {
    /// Tanh hidden layers and a linear output.
    pub fn new(layer_sizes: Vec<usize>, seed: u64) -> Self {
        Self { layer_sizes, hidden_activation: Activation::Tanh, output_activation: Activation::Linear, seed }
    }

    pub fn validate(&self) -> Result<(), NeuralError> {
        if self.layer_sizes.len() < 2 {
            return Err(NeuralError::Spec("need at least an input and an output layer".into()));
        }
        if let Some(i) = self.layer_sizes.iter().position(|&s| s == 0) {
            return Err(NeuralError::Spec(format!("layer {i} has zero size")));
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    fn activation(&self, transition: usize) -> Activation {
        if transition + 2 == self.layer_sizes.len() {
            self.output_activation
        } else {
            self.hidden_activation
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    MaxEpochs,
    Tolerance,
    Stall,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub epochs_run: usize,
    pub final_mse: f64,
    /// Entry 0 is the mse before any update; one entry per epoch after that.
    pub mse_history: Vec<f64>,
    pub terminated_by: Termination,
}

impl TrainReport {
    fn new(history: Vec<f64>, terminated_by: Termination) -> Self {
        let final_mse = *history.last().expect("history is never empty");
        Self { epochs_run: history.len() - 1, final_mse, mse_history: history, terminated_by }
    }
}

/// Layer-wise scratch space for forward and backward passes.
#[derive(Debug, Clone)]
pub struct Workspace {
    activations: Vec<Vec<f64>>,
    deltas: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new(spec: &NetworkSpec) -> Self {
        Self {
            activations: spec.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
            deltas: spec.layer_sizes.iter().map(|&n| vec![0.0; n]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    spec: NetworkSpec,
    params: Vec<f64>,
}

/// Weights drawn uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`, biases zero.
pub fn init_network(spec: &NetworkSpec) -> Result<Network, NeuralError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut params = Vec::with_capacity(spec.parameter_count());
    for w in spec.layer_sizes.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let bound = 1.0 / (fan_in as f64).sqrt();
        params.extend((0..fan_in * fan_out).map(|_| rng.random_range(-bound..=bound)));
        params.extend(std::iter::repeat_n(0.0, fan_out));
    }
    Ok(Network { spec: spec.clone(), params })
}

impl Network {
    /// Network with every parameter zero.
    pub fn zeros(spec: &NetworkSpec) -> Result<Self, NeuralError> {
        spec.validate()?;
        Ok(Self { spec: spec.clone(), params: vec![0.0; spec.parameter_count()] })
    }

    /// Rebuilds a network from a flat parameter vector (see module docs for the order).
    pub fn from_parameters(spec: &NetworkSpec, params: Vec<f64>) -> Result<Self, NeuralError> {
        spec.validate()?;
        if params.len() != spec.parameter_count() {
            return Err(NeuralError::Shape(format!(
                "expected {} parameters, got {}",
                spec.parameter_count(),
                params.len()
            )));
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(NeuralError::Numeric("non-finite parameter".into()));
        }
        Ok(Self { spec: spec.clone(), params })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameter_count(&self) -> usize {
        self.params.len()
    }

    pub fn set_parameters(&mut self, params: &[f64]) -> Result<(), NeuralError> {
        if params.len() != self.params.len() {
            return Err(NeuralError::Shape(format!("expected {} parameters, got {}", self.params.len(), params.len())));
        }
        self.params.copy_from_slice(params);
        Ok(())
    }

    pub fn input_size(&self) -> usize {
        self.spec.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.spec.layer_sizes.last().expect("validated spec")
    }

    fn offsets(&self, transition: usize) -> (usize, usize) {
        let sizes = &self.spec.layer_sizes;
        let start: usize = sizes.windows(2).take(transition).map(|w| w[0] * w[1] + w[1]).sum();
        (start, start + sizes[transition] * sizes[transition + 1])
    }

    /// Weight matrix of layer transition `t` as `(outputs × inputs)`.
    pub fn weights(&self, t: usize) -> Matrix {
        let (w0, b0) = self.offsets(t);
        let sizes = &self.spec.layer_sizes;
        Matrix::from_vec(sizes[t + 1], sizes[t], self.params[w0..b0].to_vec())
    }

    pub fn biases(&self, t: usize) -> &[f64] {
        let (_, b0) = self.offsets(t);
        &self.params[b0..b0 + self.spec.layer_sizes[t + 1]]
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NeuralError> {
        if input.len() != self.input_size() {
            return Err(NeuralError::Shape(format!(
                "input has {} values, network expects {}",
                input.len(),
                self.input_size()
            )));
        }
        let mut ws = Workspace::new(&self.spec);
        forward_with(&self.spec, &self.params, input, &mut ws);
        Ok(ws.activations.last().expect("non-empty").clone())
    }

    /// Forward pass over every row of `inputs`.
    pub fn predict(&self, inputs: &Matrix) -> Result<Matrix, NeuralError> {
        if inputs.cols() != self.input_size() {
            return Err(NeuralError::Shape(format!(
                "inputs have {} columns, network expects {}",
                inputs.cols(),
                self.input_size()
            )));
        }
        let mut ws = Workspace::new(&self.spec);
        let mut out = Matrix::zeros(inputs.rows(), self.output_size());
        for r in 0..inputs.rows() {
            forward_with(&self.spec, &self.params, inputs.row(r), &mut ws);
            out.row_mut(r).copy_from_slice(ws.activations.last().expect("non-empty"));
        }
        Ok(out)
    }

    pub fn mse(&self, inputs: &Matrix, targets: &Matrix) -> Result<f64, NeuralError> {
        check_batch(&self.spec, inputs, targets)?;
        Ok(batch_mse(&self.spec, &self.params, inputs, targets, &mut Workspace::new(&self.spec)))
    }

    /// Gradient of the batch mse with respect to every parameter, in flattening order.
    pub fn gradient(&self, inputs: &Matrix, targets: &Matrix) -> Result<Vec<f64>, NeuralError> {
        check_batch(&self.spec, inputs, targets)?;
        let mut grad = vec![0.0; self.params.len()];
        loss_and_gradient(&self.spec, &self.params, inputs, targets, &mut grad);
        Ok(grad)
    }

    pub fn to_document(&self) -> NetworkDocument {
        let layers = (0..self.spec.layer_sizes.len() - 1)
            .map(|t| {
                let w = self.weights(t);
                LayerDocument { weights: w.iter_rows().map(<[f64]>::to_vec).collect(), biases: self.biases(t).to_vec() }
            })
            .collect();
        NetworkDocument {
            format: NETWORK_FORMAT.to_string(),
            version: NETWORK_VERSION,
            spec: self.spec.clone(),
            layers,
        }
    }

    pub fn from_document(doc: &NetworkDocument) -> Result<Self, NeuralError> {
        if doc.format != NETWORK_FORMAT || doc.version != NETWORK_VERSION {
            return Err(NeuralError::Format(format!("unsupported document {} v{}", doc.format, doc.version)));
        }
        doc.spec.validate()?;
        let sizes = &doc.spec.layer_sizes;
        if doc.layers.len() != sizes.len() - 1 {
            return Err(NeuralError::Format("layer count does not match spec".into()));
        }
        let mut params = Vec::with_capacity(doc.spec.parameter_count());
        for (t, layer) in doc.layers.iter().enumerate() {
            if layer.weights.len() != sizes[t + 1]
                || layer.weights.iter().any(|r| r.len() != sizes[t])
                || layer.biases.len() != sizes[t + 1]
            {
                return Err(NeuralError::Format(format!("layer {t} shape does not match spec")));
            }
            layer.weights.iter().for_each(|r| params.extend_from_slice(r));
            params.extend_from_slice(&layer.biases);
        }
        Self::from_parameters(&doc.spec, params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("network serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, NeuralError> {
        let doc: NetworkDocument = serde_json::from_str(text).map_err(|e| NeuralError::Format(e.to_string()))?;
        Self::from_document(&doc)
    }
}

pub const NETWORK_FORMAT: &str = "pvnne-network";
pub const NETWORK_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDocument {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

/// Versioned persistence form of a [`Network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub format: String,
    pub version: u32,
    pub spec: NetworkSpec,
    pub layers: Vec<LayerDocument>,
}

impl Serialize for Network {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Network {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = NetworkDocument::deserialize(d)?;
        Network::from_document(&doc).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_batch(spec: &NetworkSpec, inputs: &Matrix, targets: &Matrix) -> Result<(), NeuralError> {
    let n_in = spec.layer_sizes[0];
    let n_out = *spec.layer_sizes.last().expect("validated");
    if inputs.rows() != targets.rows() {
        return Err(NeuralError::Shape(format!("{} input rows but {} target rows", inputs.rows(), targets.rows())));
    }
    if inputs.cols() != n_in || targets.cols() != n_out {
        return Err(NeuralError::Shape(format!(
            "batch is {}→{}, network is {n_in}→{n_out}",
            inputs.cols(),
            targets.cols()
        )));
    }
    if inputs.rows() == 0 {
        return Err(NeuralError::Shape("empty batch".into()));
    }
    Ok(())
}

/// Forward pass writing every layer's activations into `ws`.
#[inline]
pub(crate) fn forward_with(spec: &NetworkSpec, params: &[f64], input: &[f64], ws: &mut Workspace) {
    ws.activations[0].copy_from_slice(input);
    let mut offset = 0;
    for t in 0..spec.layer_sizes.len() - 1 {
        let (n_in, n_out) = (spec.layer_sizes[t], spec.layer_sizes[t + 1]);
        let act = spec.activation(t);
        let (prev, next) = ws.activations.split_at_mut(t + 1);
        let x = &prev[t];
        let y = &mut next[0];
        let w = &params[offset..offset + n_in * n_out];
        let b = &params[offset + n_in * n_out..offset + n_in * n_out + n_out];
        for o in 0..n_out {
            let row = &w[o * n_in..(o + 1) * n_in];
            let z: f64 = row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>() + b[o];
            y[o] = act.apply(z);
        }
        offset += n_in * n_out + n_out;
    }
}

/// Mean over rows and outputs of the squared residual.
pub(crate) fn batch_mse(
    spec: &NetworkSpec,
    params: &[f64],
    inputs: &Matrix,
    targets: &Matrix,
    ws: &mut Workspace,
) -> f64 {
    let mut sse = 0.0;
    for r in 0..inputs.rows() {
        forward_with(spec, params, inputs.row(r), ws);
        let out = ws.activations.last().expect("non-empty");
        sse += out.iter().zip(targets.row(r)).map(|(y, t)| (y - t) * (y - t)).sum::<f64>();
    }
    sse / (inputs.rows() * targets.cols()) as f64
}

/// Propagates `ws.deltas[last]` (dLoss/dOutput) back through the network,
/// accumulating `scale * dLoss/dParam` into `grad`.
fn backward_accumulate(spec: &NetworkSpec, params: &[f64], ws: &mut Workspace, grad: &mut [f64], scale: f64) {
    let n_layers = spec.layer_sizes.len();
    let mut offsets = Vec::with_capacity(n_layers - 1);
    let mut acc = 0;
    for w in spec.layer_sizes.windows(2) {
        offsets.push(acc);
        acc += w[0] * w[1] + w[1];
    }
    for t in (0..n_layers - 1).rev() {
        let (n_in, n_out) = (spec.layer_sizes[t], spec.layer_sizes[t + 1]);
        let act = spec.activation(t);
        // delta at pre-activation of layer t+1
        for o in 0..n_out {
            let y = ws.activations[t + 1][o];
            ws.deltas[t + 1][o] *= act.derivative_from_output(y);
        }
        let off = offsets[t];
        for o in 0..n_out {
            let d = ws.deltas[t + 1][o] * scale;
            let row = &mut grad[off + o * n_in..off + (o + 1) * n_in];
            for (g, x) in row.iter_mut().zip(&ws.activations[t]) {
                *g += d * x;
            }
            grad[off + n_in * n_out + o] += d;
        }
        if t > 0 {
            let w = &params[off..off + n_in * n_out];
            let (lower, upper) = ws.deltas.split_at_mut(t + 1);
            let prev = &mut lower[t];
            prev.iter_mut().for_each(|v| *v = 0.0);
            for o in 0..n_out {
                let d = upper[0][o];
                for (i, p) in prev.iter_mut().enumerate() {
                    *p += d * w[o * n_in + i];
                }
            }
        }
    }
}

/// Batch mse plus its gradient (written into `grad`, which is overwritten).
pub(crate) fn loss_and_gradient(
    spec: &NetworkSpec,
    params: &[f64],
    inputs: &Matrix,
    targets: &Matrix,
    grad: &mut [f64],
) -> f64 {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let mut ws = Workspace::new(spec);
    let count = (inputs.rows() * targets.cols()) as f64;
    let mut sse = 0.0;
    for r in 0..inputs.rows() {
        forward_with(spec, params, inputs.row(r), &mut ws);
        let last = ws.activations.len() - 1;
        for (o, t) in targets.row(r).iter().enumerate() {
            let e = ws.activations[last][o] - t;
            sse += e * e;
            ws.deltas[last][o] = 2.0 * e;
        }
        backward_accumulate(spec, params, &mut ws, grad, 1.0 / count);
    }
    sse / count
}

/// Full-batch gradient descent on the mse.
///
/// Stops when the mse drops below `tolerance` (checked before the first
/// update as well, in which case `epochs_run` is 0) or after `max_epochs`.
pub fn train_backprop(
    network: &Network,
    inputs: &Matrix,
    targets: &Matrix,
    learning_rate: f64,
    max_epochs: usize,
    tolerance: f64,
) -> Result<(Network, TrainReport), NeuralError> {
    if !(learning_rate > 0.0 && learning_rate.is_finite()) {
        return Err(NeuralError::Config(format!("learning rate must be positive, got {learning_rate}")));
    }
    check_batch(&network.spec, inputs, targets)?;
    let spec = &network.spec;
    let mut params = network.params.clone();
    let mut grad = vec![0.0; params.len()];
    let mut mse = loss_and_gradient(spec, &params, inputs, targets, &mut grad);
    if !mse.is_finite() {
        return Err(NeuralError::Divergence { epoch: 0, mse });
    }
    let mut history = vec![mse];
    if mse < tolerance {
        return Ok((network.clone(), TrainReport::new(history, Termination::Tolerance)));
    }
    let mut terminated = Termination::MaxEpochs;
    for epoch in 1..=max_epochs {
        for (p, g) in params.iter_mut().zip(&grad) {
            *p -= learning_rate * g;
        }
        mse = loss_and_gradient(spec, &params, inputs, targets, &mut grad);
        if !mse.is_finite() {
            return Err(NeuralError::Divergence { epoch, mse });
        }
        history.push(mse);
        if mse < tolerance {
            terminated = Termination::Tolerance;
            break;
        }
    }
    let trained = Network { spec: spec.clone(), params };
    Ok((trained, TrainReport::new(history, terminated)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LmConfig {
    pub mu0: f64,
    pub mu_scale: f64,
    pub max_epochs: usize,
    pub tolerance: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self { mu0: 1e-3, mu_scale: 10.0, max_epochs: 100, tolerance: 1e-6 }
    }
}

/// Damping above which the LM trainer gives up.
pub const LM_MU_MAX: f64 = 1e10;

/// Normal-equation pieces for the current parameters: `JᵀJ`, `Jᵀr` with
/// `J = ∂output/∂θ` and `r = target − output`, plus the sum of squared residuals.
fn normal_equations(
    spec: &NetworkSpec,
    params: &[f64],
    inputs: &Matrix,
    targets: &Matrix,
) -> (DMatrix<f64>, DVector<f64>, f64) {
    let p = params.len();
    let n = inputs.rows() * targets.cols();
    let mut jac = DMatrix::<f64>::zeros(n, p);
    let mut resid = DVector::<f64>::zeros(n);
    let mut row = vec![0.0; p];
    let mut ws = Workspace::new(spec);
    let last = spec.layer_sizes.len() - 1;
    for r in 0..inputs.rows() {
        forward_with(spec, params, inputs.row(r), &mut ws);
        let outputs = ws.activations[last].clone();
        for (o, t) in targets.row(r).iter().enumerate() {
            let k = r * targets.cols() + o;
            resid[k] = t - outputs[o];
            // Jacobian row for output o: backprop a unit sensitivity.
            ws.deltas[last].iter_mut().for_each(|d| *d = 0.0);
            ws.deltas[last][o] = 1.0;
            row.iter_mut().for_each(|v| *v = 0.0);
            backward_accumulate(spec, params, &mut ws, &mut row, 1.0);
            for (i, v) in row.iter().enumerate() {
                jac[(k, i)] = *v;
            }
        }
    }
    let sse = resid.norm_squared();
    (jac.tr_mul(&jac), jac.tr_mul(&resid), sse)
}

fn solve_damped(jtj: &DMatrix<f64>, jtr: &DVector<f64>, mu: f64) -> Option<DVector<f64>> {
    let mut a = jtj.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += mu;
    }
    let chol = a.cholesky()?;
    let step = chol.solve(jtr);
    step.iter().all(|v| v.is_finite()).then_some(step)
}

/// One damped Gauss-Newton step `(JᵀJ + μI)⁻¹ Jᵀr` at the network's current parameters.
pub fn lm_step(network: &Network, inputs: &Matrix, targets: &Matrix, mu: f64) -> Result<Vec<f64>, NeuralError> {
    check_batch(&network.spec, inputs, targets)?;
    let (jtj, jtr, _) = normal_equations(&network.spec, &network.params, inputs, targets);
    solve_damped(&jtj, &jtr, mu)
        .map(|s| s.iter().copied().collect())
        .ok_or_else(|| NeuralError::Numeric("singular normal equations".into()))
}

/// Levenberg-Marquardt on the sum of squared residuals.
///
/// Each epoch retries with growing damping until a step lowers the error;
/// an accepted step divides μ by `mu_scale`, a rejected one multiplies it.
/// Training stalls once μ exceeds [`LM_MU_MAX`].
pub fn train_lm(
    network: &Network,
    inputs: &Matrix,
    targets: &Matrix,
    config: &LmConfig,
) -> Result<(Network, TrainReport), NeuralError> {
    if !(config.mu0 > 0.0) {
        return Err(NeuralError::Config(format!("mu0 must be positive, got {}", config.mu0)));
    }
    if !(config.mu_scale > 1.0) {
        return Err(NeuralError::Config(format!("mu_scale must exceed 1, got {}", config.mu_scale)));
    }
    check_batch(&network.spec, inputs, targets)?;
    let spec = &network.spec;
    let count = (inputs.rows() * targets.cols()) as f64;
    let mut params = network.params.clone();
    let mut ws = Workspace::new(spec);
    let mut mse = batch_mse(spec, &params, inputs, targets, &mut ws);
    if !mse.is_finite() {
        return Err(NeuralError::Divergence { epoch: 0, mse });
    }
    let mut history = vec![mse];
    if mse < config.tolerance {
        return Ok((network.clone(), TrainReport::new(history, Termination::Tolerance)));
    }
    let mut mu = config.mu0;
    let mut terminated = Termination::MaxEpochs;
    let mut candidate = vec![0.0; params.len()];
    'epochs: for epoch in 1..=config.max_epochs {
        let (jtj, jtr, sse) = normal_equations(spec, &params, inputs, targets);
        if !sse.is_finite() {
            return Err(NeuralError::Divergence { epoch, mse: sse / count });
        }
        loop {
            if mu > LM_MU_MAX {
                terminated = Termination::Stall;
                break 'epochs;
            }
            let Some(step) = solve_damped(&jtj, &jtr, mu) else {
                mu *= config.mu_scale;
                if mu > LM_MU_MAX {
                    return Err(NeuralError::Numeric(format!(
                        "normal equations singular at epoch {epoch} despite damping"
                    )));
                }
                continue;
            };
            for ((c, p), s) in candidate.iter_mut().zip(&params).zip(step.iter()) {
                *c = p + s;
            }
            let new_mse = batch_mse(spec, &candidate, inputs, targets, &mut ws);
            if new_mse.is_finite() && new_mse < mse {
                std::mem::swap(&mut params, &mut candidate);
                mse = new_mse;
                mu /= config.mu_scale;
                break;
            }
            mu *= config.mu_scale;
        }
        history.push(mse);
        if mse < config.tolerance {
            terminated = Termination::Tolerance;
            break;
        }
    }
    let trained = Network { spec: spec.clone(), params };
    Ok((trained, TrainReport::new(history, terminated)))
}
