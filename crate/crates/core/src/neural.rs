//! Framework-free neural primitives: valid 1-D convolution over a
//! token × feature grid, max pooling along the token axis, elementwise
//! nonlinearities, dense layers, dropout, plain SGD and a central-difference
//! gradient checker.
//!
//! Activations flow as [`Matrix`] values with one row per sequence position
//! and one column per channel. A dense layer flattens its input row-major and
//! produces a `1 × out` matrix.

use rand::Rng;

use crate::textfmt::{TextReader, TextWriter};
use crate::{Error, Result};

/// Default half-width of the uniform weight initialisation.
pub const INIT_SCALE: f64 = 0.01;

/// Step of the central finite differences in [`grad_check`].
pub const FD_STEP: f64 = 1e-5;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::shape(
                "matrix",
                format!("{} values for {rows}x{cols}", data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::shape("matrix", "ragged rows"));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn row_vector(data: Vec<f64>) -> Self {
        Self {
            rows: 1,
            cols: data.len(),
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable softmax.
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Cross-entropy of `softmax(logits)` against `target` and its gradient
/// with respect to the logits.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let p = softmax(logits);
    let loss = -p[target].max(f64::MIN_POSITIVE).ln();
    let mut grad = p;
    grad[target] -= 1.0;
    (loss, grad)
}

/// Convolution with `maps` kernels of `width` rows spanning the full input
/// depth; stride 1, no padding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    pub width: usize,
    pub depth: usize,
    pub maps: usize,
    /// `maps × width × depth`, kernel-major.
    pub kernels: Vec<f64>,
    pub biases: Vec<f64>,
}

impl ConvLayer {
    pub fn zeros(width: usize, depth: usize, maps: usize) -> Self {
        assert!(width >= 1, "kernel width must be at least 1");
        Self {
            width,
            depth,
            maps,
            kernels: vec![0.0; maps * width * depth],
            biases: vec![0.0; maps],
        }
    }

    pub fn random<R: Rng>(
        width: usize,
        depth: usize,
        maps: usize,
        scale: f64,
        rng: &mut R,
    ) -> Self {
        let mut layer = Self::zeros(width, depth, maps);
        for w in &mut layer.kernels {
            *w = rng.random_range(-scale..=scale);
        }
        layer
    }

    pub fn kernel(&self, h: usize) -> &[f64] {
        let n = self.width * self.depth;
        &self.kernels[h * n..(h + 1) * n]
    }

    pub fn output_len(&self, input_len: usize) -> Option<usize> {
        (input_len >= self.width).then(|| input_len - self.width + 1)
    }
}

/// Valid convolution: `out[j][h] = b_h + Σ_r Σ_s K_h[r][s] · x[j+r][s]`.
pub fn conv1d(input: &Matrix, layer: &ConvLayer) -> Result<Matrix> {
    if input.cols != layer.depth {
        return Err(Error::shape(
            "conv1d",
            format!(
                "input depth {} but kernel depth {}",
                input.cols, layer.depth
            ),
        ));
    }
    let Some(out_len) = layer.output_len(input.rows) else {
        return Err(Error::shape(
            "conv1d",
            format!(
                "input length {} shorter than kernel width {}",
                input.rows, layer.width
            ),
        ));
    };
    let span = layer.width * layer.depth;
    let mut out = Matrix::zeros(out_len, layer.maps);
    for j in 0..out_len {
        let window = &input.data[j * layer.depth..j * layer.depth + span];
        for h in 0..layer.maps {
            let k = layer.kernel(h);
            let dot: f64 = k.iter().zip(window).map(|(a, b)| a * b).sum();
            out.set(j, h, layer.biases[h] + dot);
        }
    }
    Ok(out)
}

fn conv1d_backward(
    input: &Matrix,
    layer: &ConvLayer,
    grad_out: &Matrix,
    grad_kernels: &mut [f64],
    grad_biases: &mut [f64],
) -> Matrix {
    let span = layer.width * layer.depth;
    let mut grad_in = Matrix::zeros(input.rows, input.cols);
    for j in 0..grad_out.rows {
        let window = &input.data[j * layer.depth..j * layer.depth + span];
        for h in 0..layer.maps {
            let g = grad_out.get(j, h);
            if g == 0.0 {
                continue;
            }
            grad_biases[h] += g;
            let gk = &mut grad_kernels[h * span..(h + 1) * span];
            for (acc, x) in gk.iter_mut().zip(window) {
                *acc += g * x;
            }
            let gi = &mut grad_in.data[j * layer.depth..j * layer.depth + span];
            for (acc, w) in gi.iter_mut().zip(layer.kernel(h)) {
                *acc += g * w;
            }
        }
    }
    grad_in
}

/// Start/end of each pooling window over a sequence of `len` positions.
/// Windows begin at multiples of `stride`; the window that first reaches
/// the end is kept even when shorter than `size`, and no window follows it.
fn pool_windows(len: usize, size: usize, stride: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < len {
        let end = (start + size).min(len);
        out.push((start, end));
        if end == len {
            break;
        }
        start += stride;
    }
    out
}

fn argmax(xs: impl Iterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, v) in xs.enumerate() {
        if v > best_v || i == 0 {
            best = i;
            best_v = v;
        }
    }
    best
}

/// Max pooling of one feature map over non-overlapping windows of `size`.
pub fn max_pool(map: &[f64], size: usize) -> Vec<f64> {
    max_pool_strided(map, size, size)
}

pub fn max_pool_strided(map: &[f64], size: usize, stride: usize) -> Vec<f64> {
    assert!(
        size >= 1 && stride >= 1,
        "pool size and stride must be positive"
    );
    pool_windows(map.len(), size, stride)
        .into_iter()
        .map(|(s, e)| map[s..e].iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect()
}

/// Pools every column of `input` along the rows.
pub fn max_pool_rows(input: &Matrix, size: usize, stride: usize) -> Matrix {
    let windows = pool_windows(input.rows, size, stride);
    let mut out = Matrix::zeros(windows.len(), input.cols);
    for (o, &(s, e)) in windows.iter().enumerate() {
        for c in 0..input.cols {
            let best = (s..e)
                .map(|r| input.get(r, c))
                .fold(f64::NEG_INFINITY, f64::max);
            out.set(o, c, best);
        }
    }
    out
}

fn max_pool_rows_backward(input: &Matrix, size: usize, stride: usize, grad_out: &Matrix) -> Matrix {
    let mut grad_in = Matrix::zeros(input.rows, input.cols);
    for (o, (s, e)) in pool_windows(input.rows, size, stride)
        .into_iter()
        .enumerate()
    {
        for c in 0..input.cols {
            let k = argmax((s..e).map(|r| input.get(r, c)));
            let v = grad_in.get(s + k, c) + grad_out.get(o, c);
            grad_in.set(s + k, c, v);
        }
    }
    grad_in
}

/// Fully connected layer over the flattened input.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    pub inputs: usize,
    pub outputs: usize,
    /// `outputs × inputs`; row `o` is the incoming weight vector of unit `o`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            inputs,
            outputs,
            weights: vec![0.0; inputs * outputs],
            biases: vec![0.0; outputs],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut layer = Self::zeros(n, n);
        for i in 0..n {
            layer.weights[i * n + i] = 1.0;
        }
        layer
    }

    pub fn random<R: Rng>(inputs: usize, outputs: usize, scale: f64, rng: &mut R) -> Self {
        let mut layer = Self::zeros(inputs, outputs);
        for w in &mut layer.weights {
            *w = rng.random_range(-scale..=scale);
        }
        layer
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        (0..self.outputs)
            .map(|o| {
                let row = &self.weights[o * self.inputs..(o + 1) * self.inputs];
                self.biases[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
            })
            .collect()
    }

    /// Rescales every incoming weight vector whose L2 norm exceeds `max`.
    pub fn clip_row_norms(&mut self, max: f64) {
        for row in self.weights.chunks_mut(self.inputs.max(1)) {
            let norm = row.iter().map(|w| w * w).sum::<f64>().sqrt();
            if norm > max {
                let s = max / norm;
                row.iter_mut().for_each(|w| *w *= s);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv(ConvLayer),
    MaxPool {
        size: usize,
        stride: usize,
    },
    Tanh,
    Sigmoid,
    Dense(DenseLayer),
    /// Drops units with probability `1 − keep` while training; scales by
    /// `keep` at inference.
    Dropout {
        keep: f64,
    },
}

impl Layer {
    pub fn name(&self) -> &'static str {
        match self {
            Layer::Conv(_) => "conv",
            Layer::MaxPool { .. } => "maxpool",
            Layer::Tanh => "tanh",
            Layer::Sigmoid => "sigmoid",
            Layer::Dense(_) => "dense",
            Layer::Dropout { .. } => "dropout",
        }
    }
}

/// Model parameters exposed as a list of flat tensors in a fixed order.
pub trait Parameters {
    fn params(&self) -> Vec<&[f64]>;
    fn params_mut(&mut self) -> Vec<&mut [f64]>;

    fn zero_grads(&self) -> Vec<Vec<f64>> {
        self.params().iter().map(|p| vec![0.0; p.len()]).collect()
    }

    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }
}

/// `p ← p − α·g` for every tensor. With `α = 0` nothing is touched.
pub fn sgd_step<M: Parameters + ?Sized>(model: &mut M, grads: &[Vec<f64>], learning_rate: f64) {
    if learning_rate == 0.0 {
        return;
    }
    for (p, g) in model.params_mut().into_iter().zip(grads) {
        for (w, d) in p.iter_mut().zip(g) {
            *w -= learning_rate * d;
        }
    }
}

pub fn add_grads(acc: &mut [Vec<f64>], other: &[Vec<f64>]) {
    for (a, o) in acc.iter_mut().zip(other) {
        for (x, y) in a.iter_mut().zip(o) {
            *x += y;
        }
    }
}

/// Forward pass mode: training draws dropout masks from the given stream.
pub enum Mode<'a> {
    Inference,
    Train(&'a mut dyn rand::RngCore),
}

/// Per-layer activations of one forward pass; `activations[0]` is the input
/// and `activations[i + 1]` the output of layer `i`.
#[derive(Debug, Clone)]
pub struct Trace {
    pub activations: Vec<Matrix>,
    masks: Vec<Option<Vec<f64>>>,
}

impl Trace {
    pub fn output(&self) -> &Matrix {
        self.activations.last().expect("trace holds the input")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub layers: Vec<Layer>,
}

impl Network {
    pub fn new(layers: Vec<Layer>) -> Self {
        Self { layers }
    }

    pub fn forward(&self, input: &Matrix, mut mode: Mode<'_>) -> Result<Trace> {
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        let mut masks = Vec::with_capacity(self.layers.len());
        activations.push(input.clone());
        for (i, layer) in self.layers.iter().enumerate() {
            let x = activations.last().unwrap();
            let ctx = || format!("layer {i} ({})", layer.name());
            let mut mask = None;
            let y = match layer {
                Layer::Conv(c) => conv1d(x, c).map_err(|e| match e {
                    Error::Shape { message, .. } => Error::shape(ctx(), message),
                    other => other,
                })?,
                Layer::MaxPool { size, stride } => max_pool_rows(x, *size, *stride),
                Layer::Tanh => x.map(f64::tanh),
                Layer::Sigmoid => x.map(sigmoid),
                Layer::Dense(d) => {
                    if x.data.len() != d.inputs {
                        return Err(Error::shape(
                            ctx(),
                            format!("{} inputs but layer expects {}", x.data.len(), d.inputs),
                        ));
                    }
                    Matrix::row_vector(d.forward(&x.data))
                }
                Layer::Dropout { keep } => match &mut mode {
                    Mode::Inference => x.map(|v| v * keep),
                    Mode::Train(rng) => {
                        let m: Vec<f64> = (0..x.data.len())
                            .map(|_| {
                                if rng.random::<f64>() < *keep {
                                    1.0
                                } else {
                                    0.0
                                }
                            })
                            .collect();
                        let mut y = x.clone();
                        y.data.iter_mut().zip(&m).for_each(|(v, k)| *v *= k);
                        mask = Some(m);
                        y
                    }
                },
            };
            masks.push(mask);
            activations.push(y);
        }
        Ok(Trace { activations, masks })
    }

    /// Back-propagates `grad_output` through a recorded trace; returns the
    /// parameter gradients (aligned with [`Parameters::params`]) and the
    /// gradient with respect to the input.
    pub fn backward(&self, trace: &Trace, grad_output: &Matrix) -> (Vec<Vec<f64>>, Matrix) {
        let mut grads = self.zero_grads();
        let grad_in = self.backward_into(trace, grad_output, &mut grads);
        (grads, grad_in)
    }

    /// As [`Network::backward`], accumulating into `grads`.
    pub fn backward_into(
        &self,
        trace: &Trace,
        grad_output: &Matrix,
        grads: &mut [Vec<f64>],
    ) -> Matrix {
        // index of each layer's first tensor in `grads`
        let mut slots = Vec::with_capacity(self.layers.len());
        let mut k = 0;
        for layer in &self.layers {
            slots.push(k);
            if matches!(layer, Layer::Conv(_) | Layer::Dense(_)) {
                k += 2;
            }
        }
        let mut g = grad_output.clone();
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let x = &trace.activations[i];
            let y = &trace.activations[i + 1];
            g = match layer {
                Layer::Conv(c) => {
                    let (gk, rest) = grads[slots[i]..].split_at_mut(1);
                    conv1d_backward(x, c, &g, &mut gk[0], &mut rest[0])
                }
                Layer::MaxPool { size, stride } => max_pool_rows_backward(x, *size, *stride, &g),
                Layer::Tanh => {
                    let mut out = g.clone();
                    for (o, yv) in out.data.iter_mut().zip(&y.data) {
                        *o *= 1.0 - yv * yv;
                    }
                    out
                }
                Layer::Sigmoid => {
                    let mut out = g.clone();
                    for (o, yv) in out.data.iter_mut().zip(&y.data) {
                        *o *= yv * (1.0 - yv);
                    }
                    out
                }
                Layer::Dense(d) => {
                    let (gw, rest) = grads[slots[i]..].split_at_mut(1);
                    let gb = &mut rest[0];
                    let mut gin = vec![0.0; d.inputs];
                    for o in 0..d.outputs {
                        let go = g.data[o];
                        if go == 0.0 {
                            continue;
                        }
                        gb[o] += go;
                        let row = &d.weights[o * d.inputs..(o + 1) * d.inputs];
                        let grow = &mut gw[0][o * d.inputs..(o + 1) * d.inputs];
                        for ((gwv, xv), (gi, w)) in
                            grow.iter_mut().zip(&x.data).zip(gin.iter_mut().zip(row))
                        {
                            *gwv += go * xv;
                            *gi += go * w;
                        }
                    }
                    Matrix::from_vec(x.rows, x.cols, gin).expect("dense input shape")
                }
                Layer::Dropout { keep } => {
                    let mut out = g.clone();
                    match &trace.masks[i] {
                        Some(m) => out.data.iter_mut().zip(m).for_each(|(v, k)| *v *= k),
                        None => out.data.iter_mut().for_each(|v| *v *= keep),
                    }
                    out
                }
            };
        }
        g
    }

    /// Applies max-norm clipping to every dense layer.
    pub fn clip_dense_norms(&mut self, max: f64) {
        for layer in &mut self.layers {
            if let Layer::Dense(d) = layer {
                d.clip_row_norms(max);
            }
        }
    }

    pub(crate) fn write_text(&self, w: &mut TextWriter) {
        w.line("network", [self.layers.len()]);
        for layer in &self.layers {
            match layer {
                Layer::Conv(c) => {
                    w.line(
                        "layer",
                        [
                            "conv".to_string(),
                            c.width.to_string(),
                            c.depth.to_string(),
                            c.maps.to_string(),
                        ],
                    );
                    w.floats("kernels", &c.kernels);
                    w.floats("biases", &c.biases);
                }
                Layer::MaxPool { size, stride } => {
                    w.line(
                        "layer",
                        ["maxpool".to_string(), size.to_string(), stride.to_string()],
                    );
                }
                Layer::Tanh => w.line("layer", ["tanh"]),
                Layer::Sigmoid => w.line("layer", ["sigmoid"]),
                Layer::Dense(d) => {
                    w.line(
                        "layer",
                        [
                            "dense".to_string(),
                            d.inputs.to_string(),
                            d.outputs.to_string(),
                        ],
                    );
                    w.floats("weights", &d.weights);
                    w.floats("biases", &d.biases);
                }
                Layer::Dropout { keep } => w.line("layer", [format!("dropout {keep:?}")]),
            }
        }
    }

    pub(crate) fn read_text(r: &mut TextReader<'_>) -> Result<Self> {
        let n: usize = r.scalar("network")?;
        let mut layers = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, f) = r.fields("layer")?;
            let bad = || Error::Parse {
                line,
                message: format!("bad layer header `{}`", f.join(" ")),
            };
            let num = |i: usize| {
                f.get(i)
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(bad)
            };
            let layer = match f.first().copied() {
                Some("conv") => {
                    let (width, depth, maps) = (num(1)?, num(2)?, num(3)?);
                    if width == 0 {
                        return Err(bad());
                    }
                    let kernels = r.floats("kernels", maps * width * depth)?;
                    let biases = r.floats("biases", maps)?;
                    Layer::Conv(ConvLayer {
                        width,
                        depth,
                        maps,
                        kernels,
                        biases,
                    })
                }
                Some("maxpool") => Layer::MaxPool {
                    size: num(1)?,
                    stride: num(2)?,
                },
                Some("tanh") => Layer::Tanh,
                Some("sigmoid") => Layer::Sigmoid,
                Some("dense") => {
                    let (inputs, outputs) = (num(1)?, num(2)?);
                    let weights = r.floats("weights", inputs * outputs)?;
                    let biases = r.floats("biases", outputs)?;
                    Layer::Dense(DenseLayer {
                        inputs,
                        outputs,
                        weights,
                        biases,
                    })
                }
                Some("dropout") => Layer::Dropout {
                    keep: f.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?,
                },
                _ => return Err(bad()),
            };
            layers.push(layer);
        }
        Ok(Self { layers })
    }

    pub fn to_text(&self) -> String {
        let mut w = TextWriter::new();
        self.write_text(&mut w);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Self::read_text(&mut TextReader::new(text))
    }
}

impl Parameters for Network {
    fn params(&self) -> Vec<&[f64]> {
        let mut out: Vec<&[f64]> = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv(c) => {
                    out.push(&c.kernels);
                    out.push(&c.biases);
                }
                Layer::Dense(d) => {
                    out.push(&d.weights);
                    out.push(&d.biases);
                }
                _ => {}
            }
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv(c) => {
                    out.push(&mut c.kernels);
                    out.push(&mut c.biases);
                }
                Layer::Dense(d) => {
                    out.push(&mut d.weights);
                    out.push(&mut d.biases);
                }
                _ => {}
            }
        }
        out
    }
}

/// Largest relative disagreement between `analytic` gradients and central
/// finite differences of `loss` over every parameter of `model`:
/// `max |g_a − g_n| / max(1e-8, |g_a| + |g_n|)`.
///
/// Parameters are restored bit-exactly afterwards.
pub fn grad_check<M, F>(model: &mut M, analytic: &[Vec<f64>], mut loss: F) -> f64
where
    M: Parameters,
    F: FnMut(&M) -> f64,
{
    let shapes: Vec<usize> = model.params().iter().map(|p| p.len()).collect();
    let mut worst: f64 = 0.0;
    for (t, &n) in shapes.iter().enumerate() {
        for i in 0..n {
            let orig = model.params()[t][i];
            model.params_mut()[t][i] = orig + FD_STEP;
            let up = loss(model);
            model.params_mut()[t][i] = orig - FD_STEP;
            let down = loss(model);
            model.params_mut()[t][i] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic[t][i];
            let rel = (a - numeric).abs() / (a.abs() + numeric.abs()).max(1e-8);
            worst = worst.max(rel);
        }
    }
    worst
}

impl Network {
    /// Gradient check of `loss(output) -> (value, d value / d output)` at
    /// `input`, with dropout in inference mode.
    pub fn grad_check<F>(&mut self, input: &Matrix, loss: F) -> Result<f64>
    where
        F: Fn(&Matrix) -> (f64, Matrix),
    {
        let trace = self.forward(input, Mode::Inference)?;
        let (_, g) = loss(trace.output());
        let (grads, _) = self.backward(&trace, &g);
        let input = input.clone();
        Ok(grad_check(self, &grads, |net| {
            let t = net
                .forward(&input, Mode::Inference)
                .expect("shapes checked");
            loss(t.output()).0
        }))
    }
}
