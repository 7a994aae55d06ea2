//! Dense feed-forward networks with manual backpropagation and Adam.
//!
//! Batches are row-major `ndarray` matrices of shape `(batch, features)`.
//! Layer weights have shape `(out_dim, in_dim)`, so a layer computes
//! `x · Wᵀ + b` on a batch.

use std::path::Path;

use ndarray::linalg::general_mat_mul;
use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HiddenActivation {
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Identity,
    Sigmoid,
    /// `2 · sigmoid(z)`, range `(0, 2)`.
    ScaledSigmoid02,
}

// Largest f64 strictly below 1; keeps sigmoid heads inside their open range.
const SIGMOID_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

#[inline]
pub(crate) fn sigmoid(z: f64) -> f64 {
    let s = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    s.clamp(f64::MIN_POSITIVE, SIGMOID_CEIL)
}

impl OutputActivation {
    fn apply(self, z: f64) -> f64 {
        match self {
            OutputActivation::Identity => z,
            OutputActivation::Sigmoid => sigmoid(z),
            OutputActivation::ScaledSigmoid02 => 2.0 * sigmoid(z),
        }
    }

    /// Derivative with respect to the pre-activation, written in terms of
    /// the activation's output.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            OutputActivation::Identity => 1.0,
            OutputActivation::Sigmoid => y * (1.0 - y),
            OutputActivation::ScaledSigmoid02 => {
                let s = 0.5 * y;
                2.0 * s * (1.0 - s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    /// Shape `(out_dim, in_dim)`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
}

/// Gradients for every parameter of an [`Mlp`], one entry per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrads {
    pub layers: Vec<Dense>,
}

impl ParamGrads {
    pub fn zeros_like(mlp: &Mlp) -> Self {
        ParamGrads {
            layers: mlp
                .layers
                .iter()
                .map(|l| Dense {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    /// Every gradient component flattened in layer order (weights then bias).
    pub fn flatten(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    pub fn is_zero(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|&g| g == 0.0))
    }

    fn check_congruent(&self, mlp: &Mlp) -> Result<()> {
        let ok = self.layers.len() == mlp.layers.len()
            && self
                .layers
                .iter()
                .zip(&mlp.layers)
                .all(|(g, l)| g.weights.dim() == l.weights.dim() && g.bias.len() == l.bias.len());
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("gradients do not match network parameters".into()))
        }
    }
}

fn flatten_layers(layers: &[Dense]) -> Vec<f64> {
    layers
        .iter()
        .flat_map(|l| l.weights.iter().chain(l.bias.iter()).copied())
        .collect()
}

/// Post-activation outputs of every layer for one input batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("network has at least one layer")
    }
}

impl Mlp {
    /// Builds a network with ReLU hidden layers.
    ///
    /// Hidden layers use He-normal weights (variance `2 / fan_in`), the output
    /// layer uses variance `1 / fan_in`, and all biases start at zero.
    pub fn new(
        input_dim: usize,
        hidden_dims: &[usize],
        output_dim: usize,
        output_activation: OutputActivation,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || output_dim == 0 {
            return Err(Error::InvalidArgument(
                "network input and output dimensions must be positive".into(),
            ));
        }
        if hidden_dims.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one hidden layer is required".into(),
            ));
        }
        if hidden_dims.contains(&0) {
            return Err(Error::InvalidArgument(
                "hidden layer widths must be positive".into(),
            ));
        }

        let mut rng = rng_from_seed(seed);
        let mut dims = Vec::with_capacity(hidden_dims.len() + 2);
        dims.push(input_dim);
        dims.extend_from_slice(hidden_dims);
        dims.push(output_dim);

        let n_layers = dims.len() - 1;
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let gain = if i + 1 < n_layers { 2.0 } else { 1.0 };
                let dist = Normal::new(0.0, (gain / fan_in as f64).sqrt())
                    .expect("standard deviation is positive and finite");
                Dense {
                    weights: Array2::from_shape_simple_fn((fan_out, fan_in), || {
                        dist.sample(&mut rng)
                    }),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();

        Ok(Mlp {
            layers,
            hidden_activation: HiddenActivation::Relu,
            output_activation,
        })
    }

    /// Assembles a network from explicit layers, validating that dimensions chain.
    pub fn from_layers(layers: Vec<Dense>, output_activation: OutputActivation) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("network needs at least one layer".into()));
        }
        for (i, l) in layers.iter().enumerate() {
            if l.in_dim() == 0 || l.out_dim() == 0 || l.bias.len() != l.out_dim() {
                return Err(Error::Shape(format!("layer {i} has inconsistent dimensions")));
            }
            if l.weights.iter().chain(l.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("layer {i} has non-finite parameters")));
            }
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::Shape(format!(
                    "layer {i} outputs {} values but layer {} expects {}",
                    pair[0].out_dim(),
                    i + 1,
                    pair[1].in_dim()
                )));
            }
        }
        Ok(Mlp {
            layers,
            hidden_activation: HiddenActivation::Relu,
            output_activation,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Dense] {
        &mut self.layers
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    /// Layer widths from input to output.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.input_dim())
            .chain(self.layers.iter().map(Dense::out_dim))
            .collect()
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    /// All parameters flattened in layer order (weights row-major, then bias).
    pub fn flat_params(&self) -> Vec<f64> {
        flatten_layers(&self.layers)
    }

    pub fn set_flat_params(&mut self, params: &[f64]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(Error::Shape(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut it = params.iter().copied();
        for l in &mut self.layers {
            for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
                *w = it.next().expect("length checked above");
            }
        }
        Ok(())
    }

    fn check_input(&self, inputs: &ArrayView2<f64>) -> Result<()> {
        if inputs.ncols() != self.input_dim() {
            return Err(Error::Shape(format!(
                "network expects {} input columns, got {}",
                self.input_dim(),
                inputs.ncols()
            )));
        }
        Ok(())
    }

    pub fn forward(&self, inputs: ArrayView2<f64>) -> Result<Array2<f64>> {
        let mut cache = self.forward_cached(inputs)?;
        Ok(cache.activations.pop().expect("network has at least one layer"))
    }

    /// Forward pass that keeps every layer's activations for [`Mlp::backward_cached`].
    pub fn forward_cached(&self, inputs: ArrayView2<f64>) -> Result<ForwardCache> {
        self.check_input(&inputs)?;
        let last = self.layers.len() - 1;
        let mut activations: Vec<Array2<f64>> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate() {
            let x = if i == 0 {
                inputs.view()
            } else {
                activations[i - 1].view()
            };
            let mut z = if layer.weights.nrows() == 1 {
                // A single output unit is a matrix-vector product; the packed
                // GEMM path is several times slower for this shape.
                let (w, b) = (layer.weights.row(0), layer.bias[0]);
                let col: Vec<f64> = x.rows().into_iter().map(|r| r.dot(&w) + b).collect();
                Array2::from_shape_vec((x.nrows(), 1), col).expect("one value per row")
            } else {
                let mut z = broadcast_rows(&layer.bias, x.nrows());
                general_mat_mul(1.0, &x, &layer.weights.t(), 1.0, &mut z);
                z
            };
            let zs = z.as_slice_mut().expect("freshly allocated");
            if i == last {
                let act = self.output_activation;
                if act != OutputActivation::Identity {
                    zs.iter_mut().for_each(|v| *v = act.apply(*v));
                }
            } else {
                zs.iter_mut().for_each(|v| *v = v.max(0.0));
            }
            activations.push(z);
        }
        Ok(ForwardCache { activations })
    }

    /// Gradients of `Σ output ⊙ output_grads` with respect to every parameter.
    pub fn backward(&self, inputs: ArrayView2<f64>, output_grads: ArrayView2<f64>) -> Result<ParamGrads> {
        let cache = self.forward_cached(inputs.view())?;
        self.param_gradients(inputs, &cache, output_grads)
    }

    /// Backward pass reusing a forward cache. Also returns the gradient with
    /// respect to the inputs, which is what lets one network be trained
    /// through another.
    pub fn backward_cached(
        &self,
        inputs: ArrayView2<f64>,
        cache: &ForwardCache,
        output_grads: ArrayView2<f64>,
    ) -> Result<(ParamGrads, Array2<f64>)> {
        let (grads, input_grads) = self.backprop(inputs, cache, output_grads, true, true)?;
        Ok((grads.expect("requested"), input_grads.expect("requested")))
    }

    /// Parameter gradients only; skips the product back to the inputs.
    pub fn param_gradients(
        &self,
        inputs: ArrayView2<f64>,
        cache: &ForwardCache,
        output_grads: ArrayView2<f64>,
    ) -> Result<ParamGrads> {
        let (grads, _) = self.backprop(inputs, cache, output_grads, true, false)?;
        Ok(grads.expect("requested"))
    }

    /// Input gradients only; parameter gradients are not formed.
    pub fn input_gradients(
        &self,
        inputs: ArrayView2<f64>,
        cache: &ForwardCache,
        output_grads: ArrayView2<f64>,
    ) -> Result<Array2<f64>> {
        let (_, input_grads) = self.backprop(inputs, cache, output_grads, false, true)?;
        Ok(input_grads.expect("requested"))
    }

    fn backprop(
        &self,
        inputs: ArrayView2<f64>,
        cache: &ForwardCache,
        output_grads: ArrayView2<f64>,
        want_params: bool,
        want_inputs: bool,
    ) -> Result<(Option<ParamGrads>, Option<Array2<f64>>)> {
        self.check_input(&inputs)?;
        let out = cache.output();
        if output_grads.dim() != out.dim() || cache.activations.len() != self.layers.len() {
            return Err(Error::Shape(format!(
                "output gradients have shape {:?}, network output is {:?}",
                output_grads.dim(),
                out.dim()
            )));
        }
        if inputs.nrows() != out.nrows() {
            return Err(Error::Shape("forward cache was built for a different batch".into()));
        }

        let act = self.output_activation;
        let mut delta = output_grads.to_owned();
        if act != OutputActivation::Identity {
            Zip::from(&mut delta)
                .and(out)
                .for_each(|d, &y| *d *= act.derivative_from_output(y));
        }

        let mut grads: Vec<Dense> = Vec::with_capacity(if want_params { self.layers.len() } else { 0 });
        for i in (0..self.layers.len()).rev() {
            let layer = &self.layers[i];
            let x = if i == 0 {
                inputs.view()
            } else {
                cache.activations[i - 1].view()
            };
            let single = layer.weights.nrows() == 1;
            if want_params {
                let weights = if single {
                    let x = x.as_standard_layout();
                    let flat = x.as_slice().expect("standard layout");
                    let mut gw = vec![0.0; x.ncols()];
                    for (row, &d) in flat.chunks_exact(x.ncols().max(1)).zip(delta.column(0)) {
                        for (g, &v) in gw.iter_mut().zip(row) {
                            *g += d * v;
                        }
                    }
                    Array1::from(gw).insert_axis(Axis(0))
                } else {
                    delta.t().dot(&x)
                };
                grads.push(Dense {
                    weights,
                    bias: column_sums(&delta),
                });
            }
            if i == 0 && !want_inputs {
                break;
            }
            let mut upstream = if single {
                let w = layer.weights.row(0).to_vec();
                let mut data = vec![0.0; delta.nrows() * w.len()];
                for (chunk, &d) in data.chunks_exact_mut(w.len()).zip(delta.column(0)) {
                    for (o, &v) in chunk.iter_mut().zip(&w) {
                        *o = d * v;
                    }
                }
                Array2::from_shape_vec((delta.nrows(), w.len()), data).expect("length matches")
            } else {
                delta.dot(&layer.weights)
            };
            if i > 0 {
                let acts = cache.activations[i - 1].as_slice().expect("activations are standard layout");
                for (g, &a) in upstream.as_slice_mut().expect("freshly allocated").iter_mut().zip(acts) {
                    *g = if a > 0.0 { *g } else { 0.0 };
                }
            }
            delta = upstream;
        }
        let params = want_params.then(|| {
            grads.reverse();
            ParamGrads { layers: grads }
        });
        Ok((params, want_inputs.then_some(delta)))
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_owned(),
            version: CHECKPOINT_VERSION,
            dims: self.dims(),
            hidden_activation: self.hidden_activation,
            output_activation: self.output_activation,
            params: self.flat_params(),
        }
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        if ckpt.format != CHECKPOINT_FORMAT || ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::InvalidArgument(format!(
                "unsupported checkpoint {} v{}",
                ckpt.format, ckpt.version
            )));
        }
        if ckpt.dims.len() < 2 || ckpt.dims.contains(&0) {
            return Err(Error::Shape("checkpoint dims must list at least two positive widths".into()));
        }
        let layers = ckpt
            .dims
            .windows(2)
            .map(|w| Dense {
                weights: Array2::zeros((w[1], w[0])),
                bias: Array1::zeros(w[1]),
            })
            .collect();
        let mut mlp = Mlp::from_layers(layers, ckpt.output_activation)?;
        mlp.set_flat_params(&ckpt.params)?;
        mlp.hidden_activation = ckpt.hidden_activation;
        Ok(mlp)
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(&self.to_checkpoint())?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Mlp::from_checkpoint(&serde_json::from_str(&text)?)
    }
}

pub const CHECKPOINT_FORMAT: &str = "gcmi-mlp";
pub const CHECKPOINT_VERSION: u32 = 1;

/// On-disk network layout (JSON).
///
/// `dims` lists layer widths from input to output. `params` holds, for each
/// layer in order, its `(out, in)` weight matrix row-major followed by its
/// bias vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub dims: Vec<usize>,
    pub hidden_activation: HiddenActivation,
    pub output_activation: OutputActivation,
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub l2: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2: 0.0001,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.learning_rate > 0.0
            && self.learning_rate.is_finite()
            && self.beta1 > 0.0
            && self.beta1 < 1.0
            && self.beta2 > 0.0
            && self.beta2 < 1.0
            && self.epsilon > 0.0
            && self.l2 >= 0.0
            && self.l2.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid Adam settings {self:?}")))
        }
    }
}

/// Adam moment estimates for one network.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub config: AdamConfig,
    first_moment: ParamGrads,
    second_moment: ParamGrads,
    step_count: u64,
}

impl AdamState {
    pub fn new(mlp: &Mlp, config: AdamConfig) -> Result<Self> {
        config.validate()?;
        Ok(AdamState {
            config,
            first_moment: ParamGrads::zeros_like(mlp),
            second_moment: ParamGrads::zeros_like(mlp),
            step_count: 0,
        })
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    /// Applies one bias-corrected Adam update using `grads + l2 · params`.
    pub fn step(&mut self, mlp: &mut Mlp, grads: &ParamGrads) -> Result<()> {
        grads.check_congruent(mlp)?;
        self.first_moment.check_congruent(mlp)?;
        for (i, g) in grads.layers.iter().enumerate() {
            if g.weights.iter().chain(g.bias.iter()).any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteGradient { layer: i });
            }
        }

        self.step_count += 1;
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            l2,
        } = self.config;
        let t = self.step_count as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);

        let update = |p: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
            let g = g + l2 * *p;
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *p -= learning_rate * m_hat / (v_hat.sqrt() + epsilon);
        };

        for (((layer, g), m), v) in mlp
            .layers
            .iter_mut()
            .zip(&grads.layers)
            .zip(&mut self.first_moment.layers)
            .zip(&mut self.second_moment.layers)
        {
            Zip::from(&mut layer.weights)
                .and(&mut m.weights)
                .and(&mut v.weights)
                .and(&g.weights)
                .for_each(|p, m, v, &g| update(p, m, v, g));
            Zip::from(&mut layer.bias)
                .and(&mut m.bias)
                .and(&mut v.bias)
                .and(&g.bias)
                .for_each(|p, m, v, &g| update(p, m, v, g));
        }
        Ok(())
    }
}

/// Convenience wrapper matching the free-function form of the optimizer step.
pub fn adam_step(mlp: &mut Mlp, grads: &ParamGrads, state: &mut AdamState) -> Result<()> {
    state.step(mlp, grads)
}

/// `rows` copies of `v` stacked as a matrix.
fn broadcast_rows(v: &Array1<f64>, rows: usize) -> Array2<f64> {
    let v = v.as_slice().expect("bias vectors are contiguous");
    let mut data = Vec::with_capacity(rows * v.len());
    for _ in 0..rows {
        data.extend_from_slice(v);
    }
    Array2::from_shape_vec((rows, v.len()), data).expect("length matches")
}

fn column_sums(m: &Array2<f64>) -> Array1<f64> {
    let Some(flat) = m.as_slice() else {
        return m.sum_axis(Axis(0));
    };
    let mut acc = vec![0.0; m.ncols()];
    for row in flat.chunks_exact(m.ncols().max(1)) {
        for (a, &v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    Array1::from(acc)
}

/// Standard-normal matrix of the given shape.
pub(crate) fn standard_normal<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.sample(rand_distr::StandardNormal))
}
