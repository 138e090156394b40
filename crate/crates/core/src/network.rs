//! The coordinate network: a plain MLP from 2D pixel coordinates to RGB.
//!
//! Hidden layers apply one [`ActivationKind`]; for [`ActivationKind::Sine`]
//! a hidden layer computes `sin(omega0 * (W x + b))`. The last layer is
//! always linear and its output is returned unclamped.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gemm, gemm_bias, trig, Layout, Matrix, Rng};

pub const DEFAULT_OMEGA0: f64 = 30.0;
pub const DEFAULT_WIDTH: usize = 256;
pub const DEFAULT_DEPTH: usize = 6;
pub const DEFAULT_POSENC_FREQUENCIES: usize = 10;

const SELU_ALPHA: f64 = 1.673_263_242_354_377_3;
const SELU_SCALE: f64 = 1.050_700_987_355_480_5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActivationKind {
    Sine,
    Relu,
    Tanh,
    Sigmoid,
    Selu,
}

impl ActivationKind {
    pub const ALL: [ActivationKind; 5] = [
        ActivationKind::Sine,
        ActivationKind::Relu,
        ActivationKind::Tanh,
        ActivationKind::Sigmoid,
        ActivationKind::Selu,
    ];

    pub fn value(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sine => x.sin(),
            ActivationKind::Relu => x.max(0.0),
            ActivationKind::Tanh => x.tanh(),
            ActivationKind::Sigmoid => sigmoid(x),
            ActivationKind::Selu => {
                if x > 0.0 {
                    SELU_SCALE * x
                } else {
                    SELU_SCALE * SELU_ALPHA * x.exp_m1()
                }
            }
        }
    }

    pub fn derivative(self, x: f64) -> f64 {
        match self {
            ActivationKind::Sine => x.cos(),
            ActivationKind::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            ActivationKind::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
            ActivationKind::Sigmoid => {
                let s = sigmoid(x);
                s * (1.0 - s)
            }
            ActivationKind::Selu => {
                if x > 0.0 {
                    SELU_SCALE
                } else {
                    SELU_SCALE * SELU_ALPHA * x.exp()
                }
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ActivationKind::Sine => "sine",
            ActivationKind::Relu => "relu",
            ActivationKind::Tanh => "tanh",
            ActivationKind::Sigmoid => "sigmoid",
            ActivationKind::Selu => "selu",
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// How raw `(y, x)` coordinates are presented to the first layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InputEncoding {
    RawCoords,
    /// Each coordinate `p` becomes `sin(2^k pi p), cos(2^k pi p)` for
    /// `k = 0..num_frequencies`.
    PositionalEncoding { num_frequencies: usize },
}

impl InputEncoding {
    /// Width of the encoded feature row for `in_dim` raw coordinates.
    pub fn output_dim(self, in_dim: usize) -> usize {
        match self {
            InputEncoding::RawCoords => in_dim,
            InputEncoding::PositionalEncoding { num_frequencies } => 2 * num_frequencies * in_dim,
        }
    }
}

/// Encodes every row of `coords` (`N x 2`).
///
/// Positional layout per row: for coordinate 0 then coordinate 1, for
/// `k = 0..L`, the pair `[sin(2^k pi p), cos(2^k pi p)]`.
pub fn encode(encoding: InputEncoding, coords: &Matrix) -> Result<Matrix> {
    if coords.cols() != 2 {
        return Err(Error::shapes(
            "coordinates with 2 columns",
            format!("{}x{}", coords.rows(), coords.cols()),
        ));
    }
    match encoding {
        InputEncoding::RawCoords => Ok(coords.clone()),
        InputEncoding::PositionalEncoding { num_frequencies } => {
            if num_frequencies == 0 {
                return Err(Error::invalid("positional encoding needs at least one frequency"));
            }
            let d = encoding.output_dim(2);
            let mut data = Vec::with_capacity(coords.rows() * d);
            for r in 0..coords.rows() {
                for &p in coords.row(r) {
                    for k in 0..num_frequencies {
                        let (s, c) = ((1u64 << k) as f64 * std::f64::consts::PI * p).sin_cos();
                        data.push(s);
                        data.push(c);
                    }
                }
            }
            Ok(Matrix::from_vec_unchecked(coords.rows(), d, data))
        }
    }
}

/// Weights (`out x in`) and bias of one dense layer.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl LayerParams {
    pub fn in_dim(&self) -> usize {
        self.weights.cols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn param_count(&self) -> usize {
        self.weights.data().len() + self.bias.len()
    }

    fn zeros_like(&self) -> LayerParams {
        LayerParams {
            weights: Matrix::zeros(self.out_dim(), self.in_dim()),
            bias: vec![0.0; self.out_dim()],
        }
    }
}

/// Parameter gradients, laid out exactly like the network's layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerParams>,
}

impl Gradients {
    /// All entries in the canonical parameter order (per layer: weights, then bias).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    pub(crate) fn slices(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weights.data(), l.bias.as_slice()])
            .collect()
    }
}

static NEXT_NETWORK_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_NETWORK_ID.fetch_add(1, Ordering::Relaxed)
}

#[derive(Debug)]
pub struct Network {
    layers: Vec<LayerParams>,
    hidden_activation: ActivationKind,
    encoding: InputEncoding,
    omega0: f64,
    in_dim: usize,
    out_dim: usize,
    // identity + mutation counter, used to reject tapes from another state
    id: u64,
    revision: u64,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Network {
            layers: self.layers.clone(),
            hidden_activation: self.hidden_activation,
            encoding: self.encoding,
            omega0: self.omega0,
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            id: fresh_id(),
            revision: 0,
        }
    }
}

/// Per-layer activations cached by [`Network::forward`] for [`Network::backward`].
#[derive(Clone, Debug)]
pub struct ForwardTape {
    /// Input to each layer (the encoded coordinates for layer 0).
    inputs: Vec<Matrix>,
    /// `d h / d z` at each hidden layer's pre-activation, including the
    /// `omega0` factor for sine.
    slopes: Vec<Vec<f64>>,
    network_id: u64,
    revision: u64,
}

impl ForwardTape {
    /// A tape with no buffers, for [`Network::forward_recycling`].
    pub fn empty() -> ForwardTape {
        ForwardTape {
            inputs: Vec::new(),
            slopes: Vec::new(),
            network_id: 0,
            revision: 0,
        }
    }

    pub fn depth(&self) -> usize {
        self.inputs.len()
    }

    pub fn batch_size(&self) -> usize {
        self.inputs.first().map_or(0, |m| m.rows())
    }
}

/// Reusable working memory for [`Network::backward_with_scratch`].
#[derive(Clone, Debug, Default)]
pub struct BackwardScratch {
    buffers: (Vec<f64>, Vec<f64>),
}

/// Builds a network with SIREN-style initialization.
///
/// `depth` hidden layers of `width` units plus one linear output layer.
/// Sine networks draw first-layer weights from `U(-1/fan_in, 1/fan_in)` and
/// every later layer from `U(-sqrt(6/fan_in)/omega0, sqrt(6/fan_in)/omega0)`.
/// Other activations use `U(-sqrt(6/fan_in), sqrt(6/fan_in))` for every layer.
/// Biases start at zero. `fan_in` of the first layer is the encoded width.
#[allow(clippy::too_many_arguments)]
pub fn init_siren(
    rng: &mut Rng,
    depth: usize,
    width: usize,
    in_dim: usize,
    out_dim: usize,
    omega0: f64,
    activation: ActivationKind,
    encoding: InputEncoding,
) -> Result<Network> {
    if depth == 0 || width == 0 || in_dim == 0 || out_dim == 0 {
        return Err(Error::invalid(format!(
            "network dimensions must be positive (depth {depth}, width {width}, in {in_dim}, out {out_dim})"
        )));
    }
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::invalid(format!("omega0 must be positive, got {omega0}")));
    }
    let first_in = encoding.output_dim(in_dim);
    if first_in == 0 {
        return Err(Error::invalid("input encoding produces no features"));
    }
    let mut dims = vec![first_in];
    dims.extend(std::iter::repeat_n(width, depth));
    dims.push(out_dim);

    let mut layers = Vec::with_capacity(depth + 1);
    for (k, pair) in dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let bound = match activation {
            ActivationKind::Sine if k == 0 => 1.0 / fan_in as f64,
            ActivationKind::Sine => (6.0 / fan_in as f64).sqrt() / omega0,
            _ => (6.0 / fan_in as f64).sqrt(),
        };
        let w = rng.uniform(fan_out * fan_in, -bound, bound)?;
        layers.push(LayerParams {
            weights: Matrix::from_vec_unchecked(fan_out, fan_in, w),
            bias: vec![0.0; fan_out],
        });
    }
    Network::from_layers(layers, activation, encoding, omega0)
}

impl Network {
    /// Assembles a network from explicit layers; the last layer is linear.
    pub fn from_layers(
        layers: Vec<LayerParams>,
        hidden_activation: ActivationKind,
        encoding: InputEncoding,
        omega0: f64,
    ) -> Result<Network> {
        let first = layers
            .first()
            .ok_or_else(|| Error::invalid("a network needs at least one layer"))?;
        if !(omega0 > 0.0) || !omega0.is_finite() {
            return Err(Error::invalid(format!("omega0 must be positive, got {omega0}")));
        }
        for (k, l) in layers.iter().enumerate() {
            if l.bias.len() != l.out_dim() {
                return Err(Error::shapes(
                    format!("layer {k} weights {}x{}", l.out_dim(), l.in_dim()),
                    format!("bias of length {}", l.bias.len()),
                ));
            }
            if l.weights.data().iter().chain(&l.bias).any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {k} parameters")));
            }
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shapes(
                    format!("layer {k} output {}", pair[0].out_dim()),
                    format!("layer {} input {}", k + 1, pair[1].in_dim()),
                ));
            }
        }
        let in_dim = match encoding {
            InputEncoding::RawCoords => first.in_dim(),
            InputEncoding::PositionalEncoding { num_frequencies } => {
                if num_frequencies == 0 || first.in_dim() % (2 * num_frequencies) != 0 {
                    return Err(Error::shapes(
                        format!("first layer input {}", first.in_dim()),
                        format!("positional encoding with {num_frequencies} frequencies"),
                    ));
                }
                first.in_dim() / (2 * num_frequencies)
            }
        };
        let out_dim = layers.last().map_or(0, |l| l.out_dim());
        Ok(Network {
            layers,
            hidden_activation,
            encoding,
            omega0,
            in_dim,
            out_dim,
            id: fresh_id(),
            revision: 0,
        })
    }

    pub fn layers(&self) -> &[LayerParams] {
        &self.layers
    }

    pub fn hidden_activation(&self) -> ActivationKind {
        self.hidden_activation
    }

    pub fn encoding(&self) -> InputEncoding {
        self.encoding
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn param_count(&self) -> usize {
        self.layers.iter().map(LayerParams::param_count).sum()
    }

    /// All parameters in canonical order (per layer: weights row-major, then bias).
    pub fn flatten_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for l in &self.layers {
            out.extend_from_slice(l.weights.data());
            out.extend_from_slice(&l.bias);
        }
        out
    }

    /// Overwrites all parameters from a flat vector in canonical order.
    pub fn set_flat_params(&mut self, values: &[f64]) -> Result<()> {
        if values.len() != self.param_count() {
            return Err(Error::shapes(
                format!("{} parameters", self.param_count()),
                format!("{} values", values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("parameter vector".into()));
        }
        let mut offset = 0;
        for slice in self.param_slices_mut() {
            slice.copy_from_slice(&values[offset..offset + slice.len()]);
            offset += slice.len();
        }
        Ok(())
    }

    /// Mutable views of every parameter block; invalidates outstanding tapes.
    pub(crate) fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.revision += 1;
        self.layers
            .iter_mut()
            .flat_map(|l| {
                let LayerParams { weights, bias } = l;
                [weights.data_mut(), bias.as_mut_slice()]
            })
            .collect()
    }

    pub fn zero_gradients(&self) -> Gradients {
        Gradients {
            layers: self.layers.iter().map(LayerParams::zeros_like).collect(),
        }
    }

    /// Evaluates the network on every row of `coords` (`N x in_dim`).
    pub fn forward(&self, coords: &Matrix) -> Result<(Matrix, ForwardTape)> {
        self.forward_recycling(coords, ForwardTape::empty())
    }

    /// Same as [`Network::forward`], reusing the buffers of a tape that is no
    /// longer needed so that repeated passes do not allocate.
    pub fn forward_recycling(
        &self,
        coords: &Matrix,
        spent: ForwardTape,
    ) -> Result<(Matrix, ForwardTape)> {
        if coords.cols() != self.in_dim {
            return Err(Error::shapes(
                format!("network input dimension {}", self.in_dim),
                format!("coordinates {}x{}", coords.rows(), coords.cols()),
            ));
        }
        if coords.data().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("input coordinates".into()));
        }
        let mut pool: Vec<Vec<f64>> = spent
            .inputs
            .into_iter()
            .map(Matrix::into_vec)
            .chain(spent.slopes)
            .collect();
        let n = coords.rows();
        let mut x = encode(self.encoding, coords)?;
        let mut inputs = Vec::with_capacity(self.layers.len());
        let mut slopes = Vec::with_capacity(self.layers.len() - 1);
        let last = self.layers.len() - 1;
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = affine(&x, layer, n, pool.pop().unwrap_or_default());
            if k == last {
                inputs.push(x);
                if z.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite("network output".into()));
                }
                let tape = ForwardTape {
                    inputs,
                    slopes,
                    network_id: self.id,
                    revision: self.revision,
                };
                return Ok((Matrix::from_vec_unchecked(n, layer.out_dim(), z), tape));
            }
            let mut h = pool.pop().unwrap_or_default();
            h.resize(z.len(), 0.0);
            self.activate(&mut z, &mut h);
            let h = Matrix::from_vec_unchecked(n, layer.out_dim(), h);
            inputs.push(std::mem::replace(&mut x, h));
            slopes.push(z);
        }
        unreachable!("network has at least one layer")
    }

    /// Writes the hidden activation of `z` to `h` and replaces `z` by the
    /// slope `d h / d z`.
    fn activate(&self, z: &mut [f64], h: &mut [f64]) {
        match self.hidden_activation {
            ActivationKind::Sine => {
                trig::sin_cos_scaled_in_place(z, self.omega0, h, self.omega0);
            }
            kind => {
                for (v, o) in z.iter_mut().zip(h.iter_mut()) {
                    *o = kind.value(*v);
                    *v = kind.derivative(*v);
                }
            }
        }
    }

    /// Reverse-mode gradients of `sum_ij grad_outputs[i,j] * outputs[i,j]`
    /// with respect to every weight and bias.
    pub fn backward(&self, tape: &ForwardTape, grad_outputs: &Matrix) -> Result<Gradients> {
        self.backward_with_scratch(tape, grad_outputs, &mut BackwardScratch::default())
    }

    /// [`Network::backward`] reusing the working buffers in `scratch`.
    pub fn backward_with_scratch(
        &self,
        tape: &ForwardTape,
        grad_outputs: &Matrix,
        scratch: &mut BackwardScratch,
    ) -> Result<Gradients> {
        let scratch = &mut scratch.buffers;
        if tape.network_id != self.id || tape.revision != self.revision {
            return Err(Error::StaleTape(
                "tape was recorded on a different network or before a parameter update".into(),
            ));
        }
        if tape.depth() != self.layers.len() {
            return Err(Error::StaleTape(format!(
                "tape depth {} but network has {} layers",
                tape.depth(),
                self.layers.len()
            )));
        }
        let n = tape.batch_size();
        if grad_outputs.shape() != (n, self.out_dim) {
            return Err(Error::shapes(
                format!("outputs {}x{}", n, self.out_dim),
                format!("grad_outputs {}x{}", grad_outputs.rows(), grad_outputs.cols()),
            ));
        }
        let mut grads = self.zero_gradients();
        let (mut g, mut next) = std::mem::take(&mut *scratch);
        g.clear();
        g.extend_from_slice(grad_outputs.data());
        let last = self.layers.len() - 1;
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let (out_d, in_d) = (layer.out_dim(), layer.in_dim());
            let db = &mut grads.layers[k].bias;
            if k == last {
                for row in g.chunks_exact(out_d) {
                    for (b, v) in db.iter_mut().zip(row) {
                        *b += v;
                    }
                }
            } else {
                let slopes = tape.slopes[k].chunks_exact(out_d);
                for (row, srow) in g.chunks_exact_mut(out_d).zip(slopes) {
                    for ((v, s), b) in row.iter_mut().zip(srow).zip(db.iter_mut()) {
                        *v *= s;
                        *b += *v;
                    }
                }
            }
            let x = &tape.inputs[k];
            // dW = g^T x
            gemm(
                out_d,
                n,
                in_d,
                1.0,
                &g,
                Layout::Transposed,
                x.data(),
                Layout::Normal,
                0.0,
                grads.layers[k].weights.data_mut(),
            );
            if k > 0 {
                // dx = g W
                next.resize(n * in_d, 0.0);
                gemm(
                    n,
                    out_d,
                    in_d,
                    1.0,
                    &g,
                    Layout::Normal,
                    layer.weights.data(),
                    Layout::Normal,
                    0.0,
                    &mut next,
                );
                std::mem::swap(&mut g, &mut next);
            }
        }
        *scratch = (g, next);
        Ok(grads)
    }
}

/// `x W^T + b` for one layer, written into `out` (resized as needed).
fn affine(x: &Matrix, layer: &LayerParams, n: usize, mut out: Vec<f64>) -> Vec<f64> {
    out.resize(n * layer.out_dim(), 0.0);
    gemm_bias(
        n,
        layer.in_dim(),
        layer.out_dim(),
        x.data(),
        Layout::Normal,
        layer.weights.data(),
        Layout::Transposed,
        &layer.bias,
        &mut out,
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coords(rows: &[[f64; 2]]) -> Matrix {
        Matrix::from_rows(rows).unwrap()
    }

    #[test]
    fn default_shape_parameter_count() {
        let mut rng = Rng::seed_from_u64(0);
        let net = init_siren(
            &mut rng,
            6,
            256,
            2,
            3,
            30.0,
            ActivationKind::Sine,
            InputEncoding::RawCoords,
        )
        .unwrap();
        assert_eq!(net.param_count(), (2 * 256 + 256) + 5 * (256 * 256 + 256) + (256 * 3 + 3));
        assert_eq!(net.param_count(), 330_499);
        assert_eq!(net.layers().len(), 7);
    }

    #[test]
    fn sine_init_bounds() {
        let mut rng = Rng::seed_from_u64(1);
        let net = init_siren(
            &mut rng,
            6,
            256,
            2,
            3,
            30.0,
            ActivationKind::Sine,
            InputEncoding::RawCoords,
        )
        .unwrap();
        let first = net.layers()[0].weights.data();
        assert!(first.iter().all(|w| w.abs() <= 0.5));
        let hidden_bound = (6.0f64 / 256.0).sqrt() / 30.0;
        assert!((hidden_bound - 0.005103).abs() < 1e-6);
        for l in &net.layers()[1..] {
            assert!(l.weights.data().iter().all(|w| w.abs() <= hidden_bound));
            assert!(l.bias.iter().all(|&b| b == 0.0));
        }
        // empirical range covers most of the interval
        let max = first.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        assert!(max > 0.49);
    }

    #[test]
    fn relu_init_uses_fan_in_scheme() {
        let mut rng = Rng::seed_from_u64(2);
        let net = init_siren(
            &mut rng,
            2,
            100,
            2,
            3,
            30.0,
            ActivationKind::Relu,
            InputEncoding::RawCoords,
        )
        .unwrap();
        let bound0 = (6.0f64 / 2.0).sqrt();
        assert!(net.layers()[0].weights.data().iter().all(|w| w.abs() <= bound0));
        let bound1 = (6.0f64 / 100.0).sqrt();
        assert!(net.layers()[1].weights.data().iter().all(|w| w.abs() <= bound1));
    }

    #[test]
    fn init_rejects_zero_dims() {
        let mut rng = Rng::seed_from_u64(0);
        for (d, w) in [(0, 4), (2, 0)] {
            assert!(init_siren(
                &mut rng,
                d,
                w,
                2,
                3,
                30.0,
                ActivationKind::Sine,
                InputEncoding::RawCoords
            )
            .is_err());
        }
        assert!(init_siren(
            &mut rng,
            1,
            4,
            2,
            3,
            0.0,
            ActivationKind::Sine,
            InputEncoding::RawCoords
        )
        .is_err());
    }

    #[test]
    fn raw_encoding_is_identity() {
        let c = coords(&[[0.1, -0.7], [1.0, 0.0]]);
        assert_eq!(encode(InputEncoding::RawCoords, &c).unwrap(), c);
    }

    #[test]
    fn positional_encoding_at_origin() {
        let c = coords(&[[0.0, 0.0]]);
        let e = encode(InputEncoding::PositionalEncoding { num_frequencies: 3 }, &c).unwrap();
        assert_eq!(e.cols(), 12);
        for (i, v) in e.data().iter().enumerate() {
            let expect = if i % 2 == 0 { 0.0 } else { 1.0 };
            assert_eq!(*v, expect);
        }
    }

    #[test]
    fn positional_encoding_layout() {
        let c = coords(&[[0.5, 0.0]]);
        let e = encode(InputEncoding::PositionalEncoding { num_frequencies: 1 }, &c).unwrap();
        assert!((e.get(0, 0) - 1.0).abs() < 1e-15);
        assert!(e.get(0, 1).abs() < 1e-15);
        assert_eq!(e.get(0, 2), 0.0);
        assert_eq!(e.get(0, 3), 1.0);
    }

    #[test]
    fn encode_rejects_wrong_width() {
        let c = Matrix::zeros(3, 3);
        assert!(encode(InputEncoding::RawCoords, &c).is_err());
    }

    #[test]
    fn zero_weights_output_bias() {
        let layers = vec![
            LayerParams {
                weights: Matrix::zeros(4, 2),
                bias: vec![0.0; 4],
            },
            LayerParams {
                weights: Matrix::zeros(3, 4),
                bias: vec![0.3, -0.2, 0.9],
            },
        ];
        let net =
            Network::from_layers(layers, ActivationKind::Sine, InputEncoding::RawCoords, 30.0)
                .unwrap();
        let (out, tape) = net.forward(&coords(&[[0.1, 0.2], [-0.5, 0.9]])).unwrap();
        assert_eq!(out.shape(), (2, 3));
        assert_eq!(tape.depth(), 2);
        for r in 0..2 {
            assert_eq!(out.row(r), &[0.3, -0.2, 0.9]);
        }
    }

    #[test]
    fn single_sine_layer_hand_value() {
        let layers = vec![
            LayerParams {
                weights: Matrix::from_rows(&[[1.0, 0.0]]).unwrap(),
                bias: vec![0.0],
            },
            LayerParams {
                weights: Matrix::from_rows(&[[1.0], [2.0], [-1.0]]).unwrap(),
                bias: vec![0.0; 3],
            },
        ];
        let net =
            Network::from_layers(layers, ActivationKind::Sine, InputEncoding::RawCoords, 1.0)
                .unwrap();
        let (out, _) = net
            .forward(&coords(&[[std::f64::consts::FRAC_PI_2, 0.0]]))
            .unwrap();
        assert!((out.get(0, 0) - 1.0).abs() < 1e-15);
        assert!((out.get(0, 1) - 2.0).abs() < 1e-15);
        assert!((out.get(0, 2) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn forward_rejects_non_finite() {
        let mut rng = Rng::seed_from_u64(0);
        let net = init_siren(
            &mut rng,
            1,
            4,
            2,
            3,
            30.0,
            ActivationKind::Sine,
            InputEncoding::RawCoords,
        )
        .unwrap();
        let bad = Matrix::from_vec_unchecked(1, 2, vec![f64::NAN, 0.0]);
        assert!(matches!(net.forward(&bad), Err(Error::NonFinite(_))));
    }

    #[test]
    fn stale_tape_is_rejected() {
        let mut rng = Rng::seed_from_u64(0);
        let mut net = init_siren(
            &mut rng,
            1,
            4,
            2,
            3,
            30.0,
            ActivationKind::Sine,
            InputEncoding::RawCoords,
        )
        .unwrap();
        let c = coords(&[[0.1, 0.2]]);
        let (_, tape) = net.forward(&c).unwrap();
        let g = Matrix::zeros(1, 3);
        assert!(net.backward(&tape, &g).is_ok());
        let other = net.clone();
        assert!(matches!(other.backward(&tape, &g), Err(Error::StaleTape(_))));
        let p = net.flatten_params();
        net.set_flat_params(&p).unwrap();
        assert!(matches!(net.backward(&tape, &g), Err(Error::StaleTape(_))));
        let (_, tape) = net.forward(&c).unwrap();
        assert!(net.backward(&tape, &Matrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn activation_derivatives_match_differences() {
        for kind in ActivationKind::ALL {
            for &x in &[-1.3, -0.2, 0.4, 2.1] {
                let h = 1e-6;
                let fd = (kind.value(x + h) - kind.value(x - h)) / (2.0 * h);
                assert!((fd - kind.derivative(x)).abs() < 1e-8, "{kind:?} at {x}");
            }
        }
    }
}
