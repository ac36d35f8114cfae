use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::{AeError, Result};

/// Layer widths. The network maps `input` (2N) → `2·rail` (2GN) → channel
/// → `hidden` (KN) ×3 → `input`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AeDims {
    pub input: usize,
    pub rail: usize,
    pub hidden: usize,
}

impl AeDims {
    /// Dimensions for blocks of `n` complex symbols, FTN factor `g` and
    /// hidden multiplier `k`.
    pub fn new(n: usize, g: usize, k: usize) -> Self {
        AeDims {
            input: 2 * n,
            rail: g * n,
            hidden: k * n,
        }
    }

    /// Length of the encoder output (both rails interleaved).
    pub fn encoded(&self) -> usize {
        2 * self.rail
    }
}

/// One fully connected layer `z = W x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: DMatrix<f64>,
    pub bias: DVector<f64>,
}

impl Dense {
    pub fn zeros(out: usize, inp: usize) -> Self {
        Dense {
            weight: DMatrix::zeros(out, inp),
            bias: DVector::zeros(out),
        }
    }

    fn random(out: usize, inp: usize, sigma_theta2: f64, sigma_b2: f64, rng: &mut ChaCha8Rng) -> Self {
        let w = Normal::new(0.0, (sigma_theta2 / inp as f64).sqrt()).expect("finite std");
        let b = Normal::new(0.0, sigma_b2.sqrt()).expect("finite std");
        // Column-major fill; the draw order is part of the seed contract.
        let weight = DMatrix::from_fn(out, inp, |_, _| w.sample(rng));
        let bias = DVector::from_fn(out, |_, _| b.sample(rng));
        Dense { weight, bias }
    }

    pub fn out_dim(&self) -> usize {
        self.weight.nrows()
    }

    pub fn in_dim(&self) -> usize {
        self.weight.ncols()
    }

    pub fn num_params(&self) -> usize {
        self.weight.len() + self.bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weight.iter().chain(self.bias.iter()).all(|v| v.is_finite())
    }

    /// `W X + b 1ᵀ` for a batch stored column-wise.
    pub(crate) fn forward(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut z = &self.weight * x;
        for mut col in z.column_iter_mut() {
            col += &self.bias;
        }
        z
    }

    pub(crate) fn scaled_add(&mut self, alpha: f64, other: &Dense) {
        self.weight.zip_apply(&other.weight, |w, g| *w += alpha * g);
        self.bias.axpy(alpha, &other.bias, 1.0);
    }
}

/// Trainable and frozen parameters of the autoencoder.
///
/// `encoder` is the linear layer in front of the channel and is never
/// updated. `decoder` holds the three ReLU layers followed by the linear
/// output layer.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub dims: AeDims,
    pub encoder: Dense,
    pub decoder: Vec<Dense>,
    pub sigma_theta2: f64,
    pub sigma_b2: f64,
}

/// Number of decoder layers (three ReLU, one linear).
pub const DECODER_LAYERS: usize = 4;

impl MlpParams {
    /// Gaussian initialization: weights `N(0, sigma_theta2 / fan_in)`,
    /// biases `N(0, sigma_b2)`.
    pub fn init(dims: AeDims, sigma_theta2: f64, sigma_b2: f64, seed: u64) -> Result<Self> {
        for (name, v) in [("sigma_theta2", sigma_theta2), ("sigma_b2", sigma_b2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(AeError::BadConfig(format!("{name} must be >= 0, got {v}")));
            }
        }
        if dims.input == 0 || dims.rail == 0 || dims.hidden == 0 {
            return Err(AeError::BadConfig(format!("zero layer width in {dims:?}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let encoder = Dense::random(dims.encoded(), dims.input, sigma_theta2, sigma_b2, &mut rng);
        let shapes = [
            (dims.hidden, dims.encoded()),
            (dims.hidden, dims.hidden),
            (dims.hidden, dims.hidden),
            (dims.input, dims.hidden),
        ];
        let decoder = shapes
            .iter()
            .map(|&(o, i)| Dense::random(o, i, sigma_theta2, sigma_b2, &mut rng))
            .collect();
        Ok(MlpParams {
            dims,
            encoder,
            decoder,
            sigma_theta2,
            sigma_b2,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.is_finite() && self.decoder.iter().all(Dense::is_finite)
    }

    pub fn num_trainable(&self) -> usize {
        self.decoder.iter().map(Dense::num_params).sum()
    }

    /// Zero-valued gradient container shaped like the decoder.
    pub fn zero_grads(&self) -> Grads {
        Grads(
            self.decoder
                .iter()
                .map(|l| Dense::zeros(l.out_dim(), l.in_dim()))
                .collect(),
        )
    }
}

/// Gradients (or any tangent) with respect to the decoder parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Grads(pub Vec<Dense>);

impl Grads {
    pub fn layers(&self) -> &[Dense] {
        &self.0
    }

    /// Euclidean norm over all entries.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|l| l.weight.norm_squared() + l.bias.norm_squared())
            .sum::<f64>()
            .sqrt()
    }
}

/// Output of the encoder layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoded {
    /// Power-normalized transmit vector (unit mean square) of length 2GN.
    pub e: Vec<f64>,
    /// Set when the affine output was identically zero and could not be
    /// normalized; `e` is then all zeros.
    pub zero_energy: bool,
}

/// Encoder layer output before power normalization: `Θ d + b`.
pub fn encode_affine(d: &[f64], p: &MlpParams) -> Vec<f64> {
    assert_eq!(d.len(), p.dims.input, "encoder input length");
    let x = DVector::from_column_slice(d);
    (&p.encoder.weight * x + &p.encoder.bias).as_slice().to_vec()
}

/// Affine encoder followed by transmit power normalization.
pub fn encode(d: &[f64], p: &MlpParams) -> Encoded {
    let z = encode_affine(d, p);
    let ms = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
    if ms == 0.0 {
        return Encoded {
            e: vec![0.0; z.len()],
            zero_energy: true,
        };
    }
    let scale = ms.sqrt().recip();
    Encoded {
        e: z.iter().map(|v| v * scale).collect(),
        zero_energy: false,
    }
}

fn relu_inplace(m: &mut DMatrix<f64>) {
    m.apply(|v| *v = v.max(0.0));
}

/// Activations kept for the backward pass.
pub(crate) struct Trace {
    /// Decoder layer inputs: `r`, then each ReLU output.
    pub inputs: Vec<DMatrix<f64>>,
    /// Pre-activations of the hidden layers.
    pub pre: Vec<DMatrix<f64>>,
    pub output: DMatrix<f64>,
}

pub(crate) fn decode_batch(r: DMatrix<f64>, p: &MlpParams) -> Trace {
    let mut inputs = vec![r];
    let mut pre = Vec::with_capacity(DECODER_LAYERS - 1);
    let last = p.decoder.len() - 1;
    for (i, layer) in p.decoder.iter().enumerate() {
        let z = layer.forward(inputs.last().expect("nonempty"));
        if i == last {
            return Trace { inputs, pre, output: z };
        }
        let mut a = z.clone();
        relu_inplace(&mut a);
        pre.push(z);
        inputs.push(a);
    }
    unreachable!("decoder has at least one layer")
}

/// Decoder forward pass: three ReLU layers and a linear output.
pub fn decode(r: &[f64], p: &MlpParams) -> Vec<f64> {
    assert_eq!(r.len(), p.dims.encoded(), "decoder input length");
    let x = DMatrix::from_column_slice(r.len(), 1, r);
    decode_batch(x, p).output.as_slice().to_vec()
}

/// One supervised training example for the decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainPair {
    /// Transmitted block, interleaved real layout (2N).
    pub d: Vec<f64>,
    /// Received block (2GN).
    pub r: Vec<f64>,
    /// Coordinates that count towards the loss; padding is `false`.
    pub mask: Vec<bool>,
}

impl TrainPair {
    pub fn new(d: Vec<f64>, r: Vec<f64>) -> Self {
        let mask = vec![true; d.len()];
        TrainPair { d, r, mask }
    }
}

/// Mean over the batch of the masked squared error `‖d − d̂‖²`, and its
/// gradient with respect to every decoder parameter. Nothing upstream of
/// the decoder input is differentiated.
pub fn loss_and_grads(batch: &[TrainPair], p: &MlpParams) -> (f64, Grads) {
    let (loss, grads, _) = loss_grads_outputs(batch, p);
    (loss, grads)
}

/// Same as [`loss_and_grads`], also returning the decoder outputs
/// (column per batch item).
pub(crate) fn loss_grads_outputs(batch: &[TrainPair], p: &MlpParams) -> (f64, Grads, DMatrix<f64>) {
    assert!(!batch.is_empty(), "empty batch");
    let bsz = batch.len();
    let rin = p.dims.encoded();
    let out = p.dims.input;
    let x = DMatrix::from_fn(rin, bsz, |i, j| batch[j].r[i]);
    let trace = decode_batch(x, p);

    let mut delta = DMatrix::zeros(out, bsz);
    let mut loss = 0.0;
    for (j, pair) in batch.iter().enumerate() {
        for i in 0..out {
            if pair.mask[i] {
                let err = trace.output[(i, j)] - pair.d[i];
                loss += err * err;
                delta[(i, j)] = 2.0 * err / bsz as f64;
            }
        }
    }
    loss /= bsz as f64;

    let mut grads = Vec::with_capacity(p.decoder.len());
    for l in (0..p.decoder.len()).rev() {
        let input = &trace.inputs[l];
        let gw = &delta * input.transpose();
        let gb = DVector::from_iterator(delta.nrows(), delta.row_iter().map(|r| r.sum()));
        grads.push(Dense { weight: gw, bias: gb });
        if l > 0 {
            let mut back = p.decoder[l].weight.transpose() * &delta;
            let pre = &trace.pre[l - 1];
            back.zip_apply(pre, |g, z| {
                if z <= 0.0 {
                    *g = 0.0
                }
            });
            delta = back;
        }
    }
    grads.reverse();
    (loss, Grads(grads), trace.output)
}

/// Directional derivative of the decoder output along `tangent`
/// (forward-mode, exact): `J(r; p) · tangent`.
pub fn decode_jvp(r: &[f64], p: &MlpParams, tangent: &Grads) -> Vec<f64> {
    let mut x = DVector::from_column_slice(r);
    let mut dx = DVector::zeros(r.len());
    let last = p.decoder.len() - 1;
    for (i, (layer, t)) in p.decoder.iter().zip(&tangent.0).enumerate() {
        let z = &layer.weight * &x + &layer.bias;
        let dz = &layer.weight * &dx + &t.weight * &x + &t.bias;
        if i == last {
            return dz.as_slice().to_vec();
        }
        x = z.map(|v| v.max(0.0));
        dx = dz.zip_map(&z, |d, v| if v > 0.0 { d } else { 0.0 });
    }
    unreachable!("decoder has at least one layer")
}
