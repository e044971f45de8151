//! Restricted Boltzmann machines with Gaussian visible units, their
//! convolutional variant, and the subjectivity classifier whose convolution
//! stack is pre-trained greedily with CD-1.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::corpus::{EmbeddingTable, Sentence, UnkPolicy};
use crate::gbn::{filter_sentences, lbl_init, LblConfig, MotifSet};
use crate::neural::{
    conv1d, max_pool_rows, sgd_step, sigmoid, softmax, softmax_cross_entropy, ConvLayer,
    DenseLayer, Layer, Matrix, Mode, Network,
};
use crate::textfmt::{TextReader, TextWriter};
use crate::{Error, Result};

/// Whether a unit returns its expectation or a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Mean,
    Sample,
}

/// Fully connected RBM: binary hidden units, Gaussian visible units with a
/// shared standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmLayer {
    /// `visible × hidden`.
    pub weights: Matrix,
    pub hidden_bias: Vec<f64>,
    pub visible_bias: Vec<f64>,
    pub sigma: f64,
}

fn check_len(ctx: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::shape(ctx, format!("length {got}, expected {want}")));
    }
    Ok(())
}

fn bernoulli(p: &[f64], rng: &mut dyn RngCore) -> Vec<f64> {
    p.iter()
        .map(|&q| if rng.random::<f64>() < q { 1.0 } else { 0.0 })
        .collect()
}

fn add_noise(mean: &mut [f64], sigma: f64, rng: &mut dyn RngCore) {
    for v in mean {
        let z: f64 = rng.sample(StandardNormal);
        *v += sigma * z;
    }
}

impl RbmLayer {
    pub fn zeros(visible: usize, hidden: usize, sigma: f64) -> Self {
        Self {
            weights: Matrix::zeros(visible, hidden),
            hidden_bias: vec![0.0; hidden],
            visible_bias: vec![0.0; visible],
            sigma,
        }
    }

    /// Weights uniform in `±scale`, biases zero.
    pub fn random<R: Rng>(
        visible: usize,
        hidden: usize,
        scale: f64,
        sigma: f64,
        rng: &mut R,
    ) -> Self {
        let w = (0..visible * hidden)
            .map(|_| rng.random_range(-scale..=scale))
            .collect();
        Self {
            weights: Matrix::from_vec(visible, hidden, w).unwrap(),
            ..Self::zeros(visible, hidden, sigma)
        }
    }

    pub fn visible(&self) -> usize {
        self.weights.rows()
    }

    pub fn hidden(&self) -> usize {
        self.weights.cols()
    }

    /// Hidden pre-activations `b_j + Σ_i v_i w_ij`.
    pub fn hidden_input(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("rbm visible", v.len(), self.visible())?;
        let mut out = self.hidden_bias.clone();
        for (i, &vi) in v.iter().enumerate() {
            for (o, w) in out.iter_mut().zip(self.weights.row(i)) {
                *o += vi * w;
            }
        }
        Ok(out)
    }

    /// Hidden probabilities, or Bernoulli draws of them.
    pub fn hidden_units(
        &self,
        v: &[f64],
        mode: Sampling,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        let p: Vec<f64> = self.hidden_input(v)?.into_iter().map(sigmoid).collect();
        Ok(match mode {
            Sampling::Mean => p,
            Sampling::Sample => bernoulli(&p, rng),
        })
    }

    /// Visible means `c_i + Σ_j h_j w_ij`, optionally plus `σ`-scaled
    /// Gaussian noise.
    pub fn reconstruct(
        &self,
        h: &[f64],
        mode: Sampling,
        rng: &mut dyn RngCore,
    ) -> Result<Vec<f64>> {
        check_len("rbm hidden", h.len(), self.hidden())?;
        let mut v: Vec<f64> = (0..self.visible())
            .map(|i| {
                self.visible_bias[i]
                    + self
                        .weights
                        .row(i)
                        .iter()
                        .zip(h)
                        .map(|(w, x)| w * x)
                        .sum::<f64>()
            })
            .collect();
        if mode == Sampling::Sample {
            add_noise(&mut v, self.sigma, rng);
        }
        Ok(v)
    }

    /// `−Σ v_i h_j w_ij`.
    pub fn energy(&self, v: &[f64], h: &[f64]) -> Result<f64> {
        check_len("rbm visible", v.len(), self.visible())?;
        check_len("rbm hidden", h.len(), self.hidden())?;
        let mut e = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            e -= vi
                * self
                    .weights
                    .row(i)
                    .iter()
                    .zip(h)
                    .map(|(w, x)| w * x)
                    .sum::<f64>();
        }
        Ok(e)
    }

    /// Squared error between `v` and its mean reconstruction from the hidden
    /// probabilities, averaged over units.
    pub fn reconstruction_error(&self, v: &[f64]) -> Result<f64> {
        let mut noop = ChaCha8Rng::seed_from_u64(0);
        let h = self.hidden_units(v, Sampling::Mean, &mut noop)?;
        let r = self.reconstruct(&h, Sampling::Mean, &mut noop)?;
        Ok(v.iter().zip(&r).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / v.len() as f64)
    }

    /// One CD-1 pass over `batch` with batch-averaged statistics. Per sample
    /// the stream supplies hidden uniforms then visible normals. Returns the
    /// mean reconstruction error measured before the update.
    pub fn cd1_epoch(
        &mut self,
        batch: &[Vec<f64>],
        alpha: f64,
        rng: &mut dyn RngCore,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        let (nv, nh) = (self.visible(), self.hidden());
        let mut dw = vec![0.0; nv * nh];
        let mut db = vec![0.0; nh];
        let mut dc = vec![0.0; nv];
        let mut err = 0.0;
        for v in batch {
            err += self.reconstruction_error(v)?;
            let h = self.hidden_units(v, Sampling::Sample, rng)?;
            let v1 = self.reconstruct(&h, Sampling::Sample, rng)?;
            let h1 = self.hidden_units(&v1, Sampling::Mean, rng)?;
            for i in 0..nv {
                for j in 0..nh {
                    dw[i * nh + j] += v[i] * h[j] - v1[i] * h1[j];
                }
                dc[i] += v[i] - v1[i];
            }
            for j in 0..nh {
                db[j] += h[j] - h1[j];
            }
        }
        let n = batch.len() as f64;
        if alpha != 0.0 {
            let s = alpha / n;
            for (w, d) in self.weights.as_mut_slice().iter_mut().zip(&dw) {
                *w += s * d;
            }
            for (b, d) in self.hidden_bias.iter_mut().zip(&db) {
                *b += s * d;
            }
            for (c, d) in self.visible_bias.iter_mut().zip(&dc) {
                *c += s * d;
            }
        }
        Ok(err / n)
    }
}

/// Population standard deviation of every value in `data`; 1 when the data
/// is empty or constant.
pub fn empirical_sigma<'a>(data: impl IntoIterator<Item = &'a [f64]>) -> f64 {
    let all: Vec<f64> = data.into_iter().flatten().copied().collect();
    if all.is_empty() {
        return 1.0;
    }
    let n = all.len() as f64;
    let mu = all.iter().sum::<f64>() / n;
    let sd = (all.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n).sqrt();
    if sd > 0.0 {
        sd
    } else {
        1.0
    }
}

/// Settings for greedy CD-1 pre-training.
#[derive(Debug, Clone, PartialEq)]
pub struct PretrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for PretrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            learning_rate: 0.01,
            seed: 0,
        }
    }
}

/// Trains each layer with CD-1 on the hidden probabilities of the layer
/// below. Returns per-layer error traces.
pub fn pretrain_stack(
    stack: &mut [RbmLayer],
    data: &[Vec<f64>],
    config: &PretrainConfig,
) -> Result<Vec<Vec<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut current: Vec<Vec<f64>> = data.to_vec();
    let mut traces = Vec::with_capacity(stack.len());
    for layer in stack.iter_mut() {
        let mut trace = Vec::with_capacity(config.epochs);
        for _ in 0..config.epochs {
            trace.push(layer.cd1_epoch(&current, config.learning_rate, &mut rng)?);
        }
        traces.push(trace);
        current = current
            .iter()
            .map(|v| layer.hidden_units(v, Sampling::Mean, &mut rng))
            .collect::<Result<_>>()?;
    }
    Ok(traces)
}

/// Convolutional RBM: `Z` kernel groups sharing weights across positions.
/// Hidden group `z` has one unit per valid window.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvRbm {
    /// Kernels and hidden biases, one map per group.
    pub conv: ConvLayer,
    /// One bias per visible feature column.
    pub visible_bias: Vec<f64>,
    pub sigma: f64,
}

impl ConvRbm {
    pub fn new(conv: ConvLayer, sigma: f64) -> Self {
        let d = conv.depth;
        Self {
            conv,
            visible_bias: vec![0.0; d],
            sigma,
        }
    }

    pub fn groups(&self) -> usize {
        self.conv.maps
    }

    /// `(L−k+1) × Z` hidden probabilities or samples.
    pub fn hidden_units(
        &self,
        v: &Matrix,
        mode: Sampling,
        rng: &mut dyn RngCore,
    ) -> Result<Matrix> {
        let mut h = conv1d(v, &self.conv)?.map(sigmoid);
        if mode == Sampling::Sample {
            let s = bernoulli(h.as_slice(), rng);
            h.as_mut_slice().copy_from_slice(&s);
        }
        Ok(h)
    }

    /// `L × d` visible means: each hidden unit spreads its kernel back over
    /// its window.
    pub fn reconstruct(
        &self,
        h: &Matrix,
        len: usize,
        mode: Sampling,
        rng: &mut dyn RngCore,
    ) -> Result<Matrix> {
        let (k, d, z) = (self.conv.width, self.conv.depth, self.conv.maps);
        if h.cols() != z || h.rows() + k != len + 1 {
            return Err(Error::shape(
                "conv rbm hidden",
                format!("{:?} for length {len}", h.shape()),
            ));
        }
        let mut v = Matrix::zeros(len, d);
        for p in 0..len {
            v.row_mut(p).copy_from_slice(&self.visible_bias);
        }
        for g in 0..z {
            let kern = self.conv.kernel(g);
            for i in 0..h.rows() {
                let hv = h.get(i, g);
                if hv == 0.0 {
                    continue;
                }
                for r in 0..k {
                    let row = v.row_mut(i + r);
                    for (x, w) in row.iter_mut().zip(&kern[r * d..(r + 1) * d]) {
                        *x += hv * w;
                    }
                }
            }
        }
        if mode == Sampling::Sample {
            add_noise(v.as_mut_slice(), self.sigma, rng);
        }
        Ok(v)
    }

    /// `−Σ_z Σ_i Σ_{r,s} v[i+r][s] · h_z[i] · w_z[r][s]`.
    pub fn energy(&self, v: &Matrix, h: &Matrix) -> Result<f64> {
        let (k, d, z) = (self.conv.width, self.conv.depth, self.conv.maps);
        if v.cols() != d || h.cols() != z || h.rows() + k != v.rows() + 1 {
            return Err(Error::shape(
                "conv rbm energy",
                format!("v {:?}, h {:?}", v.shape(), h.shape()),
            ));
        }
        let mut bias_free = self.conv.clone();
        bias_free.biases.iter_mut().for_each(|b| *b = 0.0);
        let resp = conv1d(v, &bias_free)?;
        Ok(-resp
            .as_slice()
            .iter()
            .zip(h.as_slice())
            .map(|(a, b)| a * b)
            .sum::<f64>())
    }

    pub fn reconstruction_error(&self, v: &Matrix) -> Result<f64> {
        let mut noop = ChaCha8Rng::seed_from_u64(0);
        let h = self.hidden_units(v, Sampling::Mean, &mut noop)?;
        let r = self.reconstruct(&h, v.rows(), Sampling::Mean, &mut noop)?;
        let n = v.as_slice().len() as f64;
        Ok(v.as_slice()
            .iter()
            .zip(r.as_slice())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            / n)
    }

    /// CD-1 over a batch of grids; statistics averaged over samples and
    /// hidden positions.
    pub fn cd1_epoch(
        &mut self,
        batch: &[Matrix],
        alpha: f64,
        rng: &mut dyn RngCore,
    ) -> Result<f64> {
        if batch.is_empty() {
            return Ok(0.0);
        }
        let (k, d, z) = (self.conv.width, self.conv.depth, self.conv.maps);
        let mut dw = vec![0.0; self.conv.kernels.len()];
        let mut db = vec![0.0; z];
        let mut dc = vec![0.0; d];
        let mut err = 0.0;
        let mut positions = 0.0;
        for v in batch {
            err += self.reconstruction_error(v)?;
            let h = self.hidden_units(v, Sampling::Sample, rng)?;
            let v1 = self.reconstruct(&h, v.rows(), Sampling::Sample, rng)?;
            let h1 = self.hidden_units(&v1, Sampling::Mean, rng)?;
            positions += h.rows() as f64;
            for g in 0..z {
                for i in 0..h.rows() {
                    let (a, b) = (h.get(i, g), h1.get(i, g));
                    db[g] += a - b;
                    for r in 0..k {
                        let (x0, x1) = (v.row(i + r), v1.row(i + r));
                        let base = g * k * d + r * d;
                        for s in 0..d {
                            dw[base + s] += x0[s] * a - x1[s] * b;
                        }
                    }
                }
            }
            for p in 0..v.rows() {
                for s in 0..d {
                    dc[s] += v.get(p, s) - v1.get(p, s);
                }
            }
        }
        if alpha != 0.0 {
            let per_pos = alpha / positions;
            let per_vis = alpha / batch.iter().map(|v| v.rows()).sum::<usize>() as f64;
            for (w, g) in self.conv.kernels.iter_mut().zip(&dw) {
                *w += per_pos * g;
            }
            for (b, g) in self.conv.biases.iter_mut().zip(&db) {
                *b += per_pos * g;
            }
            for (c, g) in self.visible_bias.iter_mut().zip(&dc) {
                *c += per_vis * g;
            }
        }
        Ok(err / batch.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SubjLabel {
    Subjective,
    Objective,
}

impl SubjLabel {
    pub fn index(self) -> usize {
        match self {
            SubjLabel::Subjective => 0,
            SubjLabel::Objective => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SubjLabel::Subjective => "subjective",
            SubjLabel::Objective => "objective",
        }
    }
}

impl fmt::Display for SubjLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubjLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "subjective" | "subj" | "1" => Ok(SubjLabel::Subjective),
            "objective" | "obj" | "0" => Ok(SubjLabel::Objective),
            _ => Err(Error::InvalidArgument(format!(
                "unknown subjectivity label `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSentence {
    pub sentence: Sentence,
    pub label: SubjLabel,
}

/// Reads `label<TAB>tokens` lines. `# doc <id>` starts a new document;
/// positions count from 0 within each document.
pub fn parse_labeled(text: &str) -> Result<Vec<LabeledSentence>> {
    let mut out = Vec::new();
    let mut doc = String::from("doc0");
    let mut pos = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(id) = rest.trim().strip_prefix("doc") {
                doc = id.trim().to_string();
                pos = 0;
            }
            continue;
        }
        let (label, text) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: i + 1,
            message: "expected `label<TAB>sentence`".into(),
        })?;
        let label = label.trim().parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("unknown label `{label}`"),
        })?;
        let sentence = Sentence::from_text(text, doc.clone(), pos);
        if sentence.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty sentence".into(),
            });
        }
        pos += 1;
        out.push(LabeledSentence { sentence, label });
    }
    Ok(out)
}

pub fn format_labeled(data: &[LabeledSentence]) -> String {
    let mut out = String::new();
    let mut doc: Option<&str> = None;
    for d in data {
        if doc != Some(d.sentence.doc_id.as_str()) {
            out.push_str(&format!("# doc {}\n", d.sentence.doc_id));
            doc = Some(&d.sentence.doc_id);
        }
        out.push_str(&format!("{}\t{}\n", d.label, d.sentence.text()));
    }
    out
}

/// Shape and optimisation settings of the subjectivity classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjConfig {
    pub window: usize,
    pub embedding_dim: usize,
    pub maps: usize,
    pub widths: Vec<usize>,
    pub pool: usize,
    /// Uniform init half-width; `None` scales each layer by
    /// `sqrt(6 / (fan_in + fan_out))`.
    pub init_scale: Option<f64>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub pretrain: PretrainConfig,
    /// Window of the motif convolution used to select pre-training data.
    pub motif_width: usize,
    pub lbl: LblConfig,
    pub seed: u64,
}

impl Default for SubjConfig {
    fn default() -> Self {
        Self {
            window: 50,
            embedding_dim: 30,
            maps: 100,
            widths: vec![3, 4, 5],
            pool: 2,
            init_scale: None,
            learning_rate: 0.05,
            epochs: 30,
            pretrain: PretrainConfig::default(),
            motif_width: 3,
            lbl: LblConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubjectivityModel {
    pub window: usize,
    pub widths: Vec<usize>,
    pub embeddings: EmbeddingTable,
    pub network: Network,
}

impl PartialEq for EmbeddingTable {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim()
            && self.unk_policy() == other.unk_policy()
            && self.len() == other.len()
            && self
                .words()
                .all(|w| other.contains(w) && other.lookup(w) == self.lookup(w))
    }
}

/// Rescales every dimension to zero mean and unit variance across the
/// vocabulary; constant dimensions are only centred.
pub fn whiten(table: &EmbeddingTable) -> Result<EmbeddingTable> {
    let d = table.dim();
    let mut words: Vec<&str> = table.words().collect();
    words.sort_unstable();
    let vecs: Vec<Vec<f64>> = words.iter().map(|w| table.lookup(w)).collect();
    let n = vecs.len().max(1) as f64;
    let mut out = EmbeddingTable::new(d, table.unk_policy());
    let mean: Vec<f64> = (0..d)
        .map(|k| vecs.iter().map(|v| v[k]).sum::<f64>() / n)
        .collect();
    let sd: Vec<f64> = (0..d)
        .map(|k| (vecs.iter().map(|v| (v[k] - mean[k]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    for (w, v) in words.iter().zip(&vecs) {
        let z = (0..d)
            .map(|k| (v[k] - mean[k]) / if sd[k] > 0.0 { sd[k] } else { 1.0 })
            .collect();
        out.insert(*w, z)?;
    }
    Ok(out)
}

/// `window × dim` grid: one embedding row per token, truncated or
/// zero-padded.
pub fn sentence_grid(sentence: &Sentence, table: &EmbeddingTable, window: usize) -> Matrix {
    let mut g = Matrix::zeros(window, table.dim());
    for (t, tok) in sentence.tokens.iter().take(window).enumerate() {
        g.row_mut(t).copy_from_slice(&table.lookup(&tok.surface));
    }
    g
}

fn glorot(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn build_network(config: &SubjConfig, rng: &mut ChaCha8Rng) -> Result<Network> {
    let mut layers = Vec::new();
    let mut len = config.window;
    let mut depth = config.embedding_dim;
    for &w in &config.widths {
        let scale = config
            .init_scale
            .unwrap_or_else(|| glorot(w * depth, w * config.maps));
        let conv = ConvLayer::random(w, depth, config.maps, scale, rng);
        len = conv.output_len(len).ok_or_else(|| {
            Error::InvalidArgument(format!("kernel width {w} exceeds remaining length {len}"))
        })?;
        len = len.div_ceil(config.pool);
        depth = config.maps;
        layers.push(Layer::Conv(conv));
        layers.push(Layer::Sigmoid);
        layers.push(Layer::MaxPool {
            size: config.pool,
            stride: config.pool,
        });
    }
    let scale = config.init_scale.unwrap_or_else(|| glorot(len * depth, 2));
    layers.push(Layer::Dense(DenseLayer::random(len * depth, 2, scale, rng)));
    Ok(Network::new(layers))
}

impl SubjectivityModel {
    /// `(p_subjective, p_objective)`.
    pub fn probabilities(&self, sentence: &Sentence) -> Result<(f64, f64)> {
        let grid = sentence_grid(sentence, &self.embeddings, self.window);
        let out = self.network.forward(&grid, Mode::Inference)?;
        let p = softmax(out.output().as_slice());
        Ok((p[0], p[1]))
    }

    /// Most probable label; an exact tie goes to objective.
    pub fn classify(&self, sentence: &Sentence) -> Result<(SubjLabel, (f64, f64))> {
        let p = self.probabilities(sentence)?;
        Ok((label_from(p), p))
    }

    /// Conv layers of the stack in order.
    pub fn conv_layers_mut(&mut self) -> Vec<&mut ConvLayer> {
        self.network
            .layers
            .iter_mut()
            .filter_map(|l| match l {
                Layer::Conv(c) => Some(c),
                _ => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut w = TextWriter::new();
        w.line("subjectivity", ["v1"]);
        w.line("window", [self.window]);
        w.line("widths", &self.widths);
        w.line("embedding", [self.embeddings.dim(), self.embeddings.len()]);
        match self.embeddings.unk_policy() {
            UnkPolicy::Zero => w.line("unk", ["zero".to_string()]),
            UnkPolicy::SeededHash { seed } => {
                w.line("unk", ["seeded-hash".to_string(), seed.to_string()])
            }
        }
        let mut words: Vec<&str> = self.embeddings.words().collect();
        words.sort_unstable();
        for word in words {
            let v = self.embeddings.lookup(word);
            w.line(
                "word",
                std::iter::once(word.to_string()).chain(v.iter().map(|x| format!("{x:?}"))),
            );
        }
        self.network.write_text(&mut w);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = TextReader::new(text);
        let (_, v) = r.fields("subjectivity")?;
        if v != ["v1"] {
            return Err(Error::Format(
                "unsupported subjectivity model version".into(),
            ));
        }
        let window = r.scalar::<usize>("window")?;
        let widths = r.parsed::<usize>("widths")?;
        let dims = r.parsed::<usize>("embedding")?;
        if dims.len() != 2 {
            return Err(Error::Format("`embedding` takes dim and count".into()));
        }
        let (line, unk) = r.fields("unk")?;
        let policy = match unk.as_slice() {
            ["zero"] => UnkPolicy::Zero,
            ["seeded-hash", s] => UnkPolicy::SeededHash {
                seed: s.parse().map_err(|_| Error::Parse {
                    line,
                    message: "bad seed".into(),
                })?,
            },
            _ => {
                return Err(Error::Parse {
                    line,
                    message: "bad unk policy".into(),
                })
            }
        };
        let mut embeddings = EmbeddingTable::new(dims[0], policy);
        for _ in 0..dims[1] {
            let (line, f) = r.fields("word")?;
            let (word, rest) = f.split_first().ok_or(Error::Parse {
                line,
                message: "missing word".into(),
            })?;
            let vals = rest
                .iter()
                .map(|x| {
                    x.parse::<f64>().map_err(|_| Error::Parse {
                        line,
                        message: format!("bad value `{x}`"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            embeddings.insert(*word, vals)?;
        }
        let network = Network::read_text(&mut r)?;
        Ok(Self {
            window,
            widths,
            embeddings,
            network,
        })
    }
}

fn label_from(p: (f64, f64)) -> SubjLabel {
    if p.0 > p.1 {
        SubjLabel::Subjective
    } else {
        SubjLabel::Objective
    }
}

#[derive(Debug, Clone)]
pub struct TrainedSubjectivity {
    pub model: SubjectivityModel,
    /// Size of the motif-filtered pre-training multiset.
    pub pretrain_size: usize,
    /// Reconstruction error per epoch for each pre-trained conv layer.
    pub pretrain_errors: Vec<Vec<f64>>,
    /// Mean cross-entropy per supervised epoch.
    pub epoch_losses: Vec<f64>,
}

/// Pre-trains the conv stack as convolutional RBMs on the motif-filtered
/// multiset (filtered per class, then pooled), then fine-tunes the whole
/// network with softmax cross-entropy on the full corpus. Without
/// `embeddings`, word vectors come from the context-matrix initialiser
/// trained on the corpus. An empty motif set skips pre-training.
pub fn train_subjectivity(
    corpus: &[LabeledSentence],
    motifs: &MotifSet,
    embeddings: Option<EmbeddingTable>,
    config: &SubjConfig,
) -> Result<TrainedSubjectivity> {
    if corpus.is_empty() {
        return Err(Error::Empty("subjectivity corpus"));
    }
    if config.window == 0 || config.pool == 0 || config.widths.is_empty() {
        return Err(Error::InvalidArgument(
            "window, pool and widths must be non-empty".into(),
        ));
    }
    let sentences: Vec<Sentence> = corpus.iter().map(|d| d.sentence.clone()).collect();
    let embeddings = match embeddings {
        Some(t) => t,
        None => {
            let lbl = LblConfig {
                dim: config.embedding_dim,
                seed: config.seed,
                ..config.lbl.clone()
            };
            whiten(&lbl_init(&sentences, &lbl)?.embeddings)?
        }
    };
    let config = SubjConfig {
        embedding_dim: embeddings.dim(),
        ..config.clone()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let network = build_network(&config, &mut rng)?;
    let mut model = SubjectivityModel {
        window: config.window,
        widths: config.widths.clone(),
        embeddings,
        network,
    };

    let mut pretrain: Vec<Sentence> = Vec::new();
    for label in [SubjLabel::Subjective, SubjLabel::Objective] {
        let class: Vec<Sentence> = corpus
            .iter()
            .filter(|d| d.label == label)
            .map(|d| d.sentence.clone())
            .collect();
        let kept = filter_sentences(&class, motifs, config.motif_width);
        pretrain.extend(kept.expand(&class).into_iter().cloned());
    }

    let mut pretrain_errors = Vec::new();
    if !pretrain.is_empty() && config.pretrain.epochs > 0 {
        let mut prng = ChaCha8Rng::seed_from_u64(config.pretrain.seed ^ config.seed);
        let mut inputs: Vec<Matrix> = pretrain
            .iter()
            .map(|s| sentence_grid(s, &model.embeddings, model.window))
            .collect();
        let pool = config.pool;
        for conv in model.conv_layers_mut() {
            let sigma = empirical_sigma(inputs.iter().map(Matrix::as_slice));
            let mut rbm = ConvRbm::new(conv.clone(), sigma);
            let mut trace = Vec::new();
            for _ in 0..config.pretrain.epochs {
                trace.push(rbm.cd1_epoch(&inputs, config.pretrain.learning_rate, &mut prng)?);
            }
            *conv = rbm.conv.clone();
            pretrain_errors.push(trace);
            inputs = inputs
                .iter()
                .map(|x| {
                    rbm.hidden_units(x, Sampling::Mean, &mut prng)
                        .map(|h| max_pool_rows(&h, pool, pool))
                })
                .collect::<Result<_>>()?;
        }
    }

    let grids: Vec<(Matrix, usize)> = corpus
        .iter()
        .map(|d| {
            (
                sentence_grid(&d.sentence, &model.embeddings, model.window),
                d.label.index(),
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..grids.len()).collect();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (x, y) = &grids[i];
            let trace = model.network.forward(x, Mode::Inference)?;
            let (loss, g) = softmax_cross_entropy(trace.output().as_slice(), *y);
            total += loss;
            let (grads, _) = model.network.backward(&trace, &Matrix::row_vector(g));
            sgd_step(&mut model.network, &grads, config.learning_rate);
        }
        epoch_losses.push(total / grids.len() as f64);
    }
    Ok(TrainedSubjectivity {
        model,
        pretrain_size: pretrain.len(),
        pretrain_errors,
        epoch_losses,
    })
}

/// Fraction of `data` the model labels correctly.
pub fn accuracy(model: &SubjectivityModel, data: &[LabeledSentence]) -> Result<f64> {
    if data.is_empty() {
        return Ok(0.0);
    }
    let mut hits = 0;
    for d in data {
        if model.classify(&d.sentence)?.0 == d.label {
            hits += 1;
        }
    }
    Ok(hits as f64 / data.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gbn::{extract_motifs, GaussianNet, GbnNode, NodeFit};
    use proptest::prelude::*;
    use rand::Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn hidden_examples() {
        let l = RbmLayer::zeros(3, 4, 1.0);
        let p = l
            .hidden_units(&[1.0, -2.0, 0.5], Sampling::Mean, &mut rng(0))
            .unwrap();
        assert_eq!(p, vec![0.5; 4]);
        let mut l = RbmLayer::zeros(2, 2, 1.0);
        l.hidden_bias = vec![20.0, 20.0];
        let p = l
            .hidden_units(&[0.3, 0.1], Sampling::Mean, &mut rng(0))
            .unwrap();
        assert!(p.iter().all(|&x| (1.0 - x) < 1e-8));
        let l = RbmLayer::random(5, 6, 1.0, 1.0, &mut rng(1));
        let a = l
            .hidden_units(&[0.1; 5], Sampling::Sample, &mut rng(2))
            .unwrap();
        let b = l
            .hidden_units(&[0.1; 5], Sampling::Sample, &mut rng(2))
            .unwrap();
        assert_eq!(a, b);
        assert!(l
            .hidden_units(&[0.0; 4], Sampling::Mean, &mut rng(0))
            .is_err());
    }

    #[test]
    fn reconstruct_examples() {
        let mut l = RbmLayer::zeros(3, 2, 1e-12);
        l.visible_bias = vec![0.5, -1.0, 2.0];
        assert_eq!(
            l.reconstruct(&[0.0, 0.0], Sampling::Mean, &mut rng(0))
                .unwrap(),
            l.visible_bias
        );
        l.weights.set(1, 0, 1.0);
        let h = [0.7, 0.0];
        let mean = l.reconstruct(&h, Sampling::Mean, &mut rng(0)).unwrap();
        assert_eq!(mean, vec![0.5, -1.0 + 0.7, 2.0]);
        let s = l.reconstruct(&h, Sampling::Sample, &mut rng(3)).unwrap();
        assert!(s.iter().zip(&mean).all(|(a, b)| (a - b).abs() < 1e-6));
        assert!(l.reconstruct(&[0.0], Sampling::Mean, &mut rng(0)).is_err());
    }

    #[test]
    fn energy_examples() {
        let l = RbmLayer::zeros(3, 2, 1.0);
        assert_eq!(l.energy(&[1.0, 2.0, 3.0], &[1.0, 0.0]).unwrap(), 0.0);
        let mut l = RbmLayer::zeros(1, 1, 1.0);
        l.weights.set(0, 0, 2.0);
        assert_eq!(l.energy(&[1.0], &[1.0]).unwrap(), -2.0);
        assert!(l.energy(&[1.0, 1.0], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn energy_is_bilinear(seed in 0u64..1000, a in -3.0f64..3.0) {
            let mut r = rng(seed);
            let l = RbmLayer::random(4, 3, 1.0, 1.0, &mut r);
            let v: Vec<f64> = (0..4).map(|_| r.random_range(-1.0..1.0)).collect();
            let h: Vec<f64> = (0..3).map(|_| r.random_range(0.0..1.0)).collect();
            let va: Vec<f64> = v.iter().map(|x| a * x).collect();
            let e = l.energy(&v, &h).unwrap();
            prop_assert!((l.energy(&va, &h).unwrap() - a * e).abs() < 1e-12);
        }

        #[test]
        fn zero_rate_cd_is_a_no_op(seed in 0u64..1000) {
            let mut r = rng(seed);
            let mut l = RbmLayer::random(4, 3, 1.0, 0.7, &mut r);
            l.hidden_bias = vec![0.3, -0.2, 0.1];
            let before = l.clone();
            let batch: Vec<Vec<f64>> = (0..5).map(|_| (0..4).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
            let err = l.cd1_epoch(&batch, 0.0, &mut r).unwrap();
            prop_assert!(err > 0.0);
            prop_assert_eq!(l, before);
        }
    }

    /// Step-by-step CD-1 on a 2×2 machine, replaying the same draws.
    #[test]
    fn cd1_matches_hand_simulation() {
        let mut l = RbmLayer::zeros(2, 2, 0.5);
        l.weights = Matrix::from_rows(&[vec![0.2, -0.4], vec![0.6, 0.1]]).unwrap();
        l.hidden_bias = vec![0.05, -0.1];
        l.visible_bias = vec![0.3, -0.2];
        let v = [1.0, -0.5];
        let alpha = 0.1;
        let mut learned = l.clone();
        learned
            .cd1_epoch(&[v.to_vec()], alpha, &mut rng(42))
            .unwrap();

        let mut r = rng(42);
        let sig = |x: f64| 1.0 / (1.0 + (-x).exp());
        let w = [[0.2, -0.4], [0.6, 0.1]];
        let p0 = [
            sig(0.05 + 1.0 * 0.2 - 0.5 * 0.6),
            sig(-0.1 + 1.0 * -0.4 - 0.5 * 0.1),
        ];
        let h0: Vec<f64> = p0
            .iter()
            .map(|&p| if r.random::<f64>() < p { 1.0 } else { 0.0 })
            .collect();
        let mut v1 = [0.0; 2];
        for i in 0..2 {
            let z: f64 = r.sample(StandardNormal);
            v1[i] = [0.3, -0.2][i] + h0[0] * w[i][0] + h0[1] * w[i][1] + 0.5 * z;
        }
        let h1 = [
            sig(0.05 + v1[0] * w[0][0] + v1[1] * w[1][0]),
            sig(-0.1 + v1[0] * w[0][1] + v1[1] * w[1][1]),
        ];
        for i in 0..2 {
            for j in 0..2 {
                let want = w[i][j] + alpha * (v[i] * h0[j] - v1[i] * h1[j]);
                assert!((learned.weights.get(i, j) - want).abs() < 1e-12);
            }
            assert!(
                (learned.visible_bias[i] - ([0.3, -0.2][i] + alpha * (v[i] - v1[i]))).abs() < 1e-12
            );
        }
        for j in 0..2 {
            assert!(
                (learned.hidden_bias[j] - ([0.05, -0.1][j] + alpha * (h0[j] - h1[j]))).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn identical_batch_equals_single_sample_when_saturated() {
        let mut l = RbmLayer::random(3, 2, 0.1, 1e-9, &mut rng(5));
        l.hidden_bias = vec![30.0, -30.0];
        let v = vec![0.2, -0.1, 0.4];
        let mut one = l.clone();
        one.cd1_epoch(&[v.clone()], 0.5, &mut rng(1)).unwrap();
        let mut many = l.clone();
        many.cd1_epoch(&[v.clone(), v.clone(), v], 0.5, &mut rng(1))
            .unwrap();
        for (a, b) in one.weights.as_slice().iter().zip(many.weights.as_slice()) {
            assert!((a - b).abs() < 1e-7);
        }
    }

    fn patterns(seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng(seed);
        (0..8)
            .map(|_| {
                (0..16)
                    .map(|_| if r.random::<bool>() { 1.0 } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn stack_pretraining() {
        let data = patterns(1);
        let mut stack = vec![
            RbmLayer::random(16, 16, 0.1, 0.5, &mut rng(2)),
            RbmLayer::random(16, 8, 0.1, 0.5, &mut rng(3)),
        ];
        let before = stack.clone();
        let cfg = PretrainConfig {
            epochs: 0,
            learning_rate: 0.1,
            seed: 1,
        };
        pretrain_stack(&mut stack, &data, &cfg).unwrap();
        assert_eq!(stack, before);

        let mut single = vec![before[0].clone()];
        let cfg = PretrainConfig {
            epochs: 5,
            learning_rate: 0.1,
            seed: 9,
        };
        let t = pretrain_stack(&mut single, &data, &cfg).unwrap();
        let mut manual = before[0].clone();
        let mut r = rng(9);
        let manual_trace: Vec<f64> = (0..5)
            .map(|_| manual.cd1_epoch(&data, 0.1, &mut r).unwrap())
            .collect();
        assert_eq!(single[0], manual);
        assert_eq!(t[0], manual_trace);

        let mut improved = 0;
        for seed in 0..5 {
            let mut s = before.clone();
            let t = pretrain_stack(
                &mut s,
                &data,
                &PretrainConfig {
                    epochs: 30,
                    learning_rate: 0.05,
                    seed,
                },
            )
            .unwrap();
            if t[0][29] <= t[0][0] {
                improved += 1;
            }
        }
        assert!(improved >= 3);
    }

    #[test]
    fn conv_energy_matches_quadruple_loop() {
        let mut r = rng(6);
        let conv = ConvLayer::random(2, 2, 2, 1.0, &mut r);
        let rbm = ConvRbm::new(conv, 1.0);
        let v =
            Matrix::from_vec(4, 2, (0..8).map(|_| r.random_range(-1.0..1.0)).collect()).unwrap();
        let h = Matrix::from_vec(3, 2, (0..6).map(|_| r.random_range(0.0..1.0)).collect()).unwrap();
        let mut want = 0.0;
        for z in 0..2 {
            for i in 0..3 {
                for rr in 0..2 {
                    for s in 0..2 {
                        want -=
                            v.get(i + rr, s) * h.get(i, z) * rbm.conv.kernels[z * 4 + rr * 2 + s];
                    }
                }
            }
        }
        assert!((rbm.energy(&v, &h).unwrap() - want).abs() < 1e-12);
        assert!(rbm.energy(&v, &Matrix::zeros(2, 2)).is_err());
    }

    /// With one window position the conv RBM is a dense RBM over the
    /// flattened grid.
    #[test]
    fn conv_rbm_single_window_equals_dense() {
        let mut r = rng(7);
        let conv = ConvLayer::random(3, 2, 4, 0.5, &mut r);
        let mut crbm = ConvRbm::new(conv.clone(), 0.3);
        crbm.visible_bias = vec![0.1, -0.2];
        let mut dense = RbmLayer::zeros(6, 4, 0.3);
        for z in 0..4 {
            for i in 0..6 {
                dense.weights.set(i, z, conv.kernels[z * 6 + i]);
            }
        }
        dense.hidden_bias = conv.biases.clone();
        dense.visible_bias = vec![0.1, -0.2, 0.1, -0.2, 0.1, -0.2];
        let v = Matrix::from_vec(3, 2, vec![0.5, -0.1, 0.2, 0.9, -0.4, 0.3]).unwrap();
        let hc = crbm.hidden_units(&v, Sampling::Mean, &mut rng(0)).unwrap();
        let hd = dense
            .hidden_units(v.as_slice(), Sampling::Mean, &mut rng(0))
            .unwrap();
        for (a, b) in hc.as_slice().iter().zip(&hd) {
            assert!((a - b).abs() < 1e-12);
        }
        let rc = crbm
            .reconstruct(&hc, 3, Sampling::Mean, &mut rng(0))
            .unwrap();
        let rd = dense.reconstruct(&hd, Sampling::Mean, &mut rng(0)).unwrap();
        for (a, b) in rc.as_slice().iter().zip(&rd) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn conv_cd_zero_rate_and_learning() {
        let mut r = rng(8);
        let mut rbm = ConvRbm::new(ConvLayer::random(2, 3, 4, 0.1, &mut r), 0.5);
        let batch: Vec<Matrix> = (0..4)
            .map(|_| {
                Matrix::from_vec(6, 3, (0..18).map(|_| r.random_range(0.0..1.0)).collect()).unwrap()
            })
            .collect();
        let before = rbm.clone();
        rbm.cd1_epoch(&batch, 0.0, &mut r).unwrap();
        assert_eq!(rbm, before);
        let first = rbm.cd1_epoch(&batch, 0.05, &mut r).unwrap();
        let mut last = first;
        for _ in 0..40 {
            last = rbm.cd1_epoch(&batch, 0.05, &mut r).unwrap();
        }
        assert!(last < first);
    }

    #[test]
    fn labeled_round_trip_and_errors() {
        let text = "# doc a\nsubjective\tI love it\nobjective\tIt is red\n# doc b\nobj\tThe sky\n";
        let data = parse_labeled(text).unwrap();
        assert_eq!(data.len(), 3);
        assert_eq!(
            (data[1].sentence.doc_id.as_str(), data[1].sentence.position),
            ("a", 1)
        );
        assert_eq!(
            (data[2].sentence.doc_id.as_str(), data[2].sentence.position),
            ("b", 0)
        );
        assert_eq!(parse_labeled(&format_labeled(&data)).unwrap(), data);
        assert!(matches!(
            parse_labeled("maybe\tx\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(parse_labeled("no tab here\n").is_err());
    }

    fn toy_subj() -> Vec<LabeledSentence> {
        let subj = [
            "i love this great phone",
            "what a wonderful awful day",
            "great film i love",
            "terrible and wonderful",
        ];
        let obj = [
            "the phone has a screen",
            "the day is monday",
            "the film runs two hours",
            "it has a battery",
        ];
        let mut out = Vec::new();
        for (i, (s, o)) in subj.iter().zip(obj).enumerate() {
            out.push(LabeledSentence {
                sentence: Sentence::from_text(s, "d", 2 * i),
                label: SubjLabel::Subjective,
            });
            out.push(LabeledSentence {
                sentence: Sentence::from_text(o, "d", 2 * i + 1),
                label: SubjLabel::Objective,
            });
        }
        out
    }

    fn small_config(seed: u64) -> SubjConfig {
        SubjConfig {
            window: 8,
            embedding_dim: 6,
            maps: 6,
            widths: vec![2, 2],
            epochs: 50,
            learning_rate: 0.2,
            init_scale: None,
            pretrain: PretrainConfig {
                epochs: 3,
                learning_rate: 0.01,
                seed: 1,
            },
            lbl: LblConfig {
                epochs: 5,
                ..LblConfig::default()
            },
            seed,
            ..SubjConfig::default()
        }
    }

    fn one_motif(words: &[&str]) -> MotifSet {
        let net = GaussianNet {
            vars: words.iter().map(|w| w.to_string()).collect(),
            order: 0,
            nodes: vec![GbnNode {
                word: 0,
                parents: vec![],
                fit: NodeFit {
                    beta: vec![],
                    cond_var: 1.0,
                    loglik: -1.0,
                    mean: 0.0,
                    parent_means: vec![],
                    instants: 10,
                },
                score: -1.0,
            }],
        };
        extract_motifs(&net, f64::NEG_INFINITY)
    }

    #[test]
    fn separable_corpus_is_learned() {
        let data = toy_subj();
        let motifs = one_motif(&["love"]);
        let run = train_subjectivity(&data, &motifs, None, &small_config(3)).unwrap();
        assert!(run.pretrain_size > 0);
        assert_eq!(run.pretrain_errors.len(), 2);
        assert_eq!(
            accuracy(&run.model, &data).unwrap(),
            1.0,
            "{:?}",
            run.epoch_losses
        );

        let empty = MotifSet {
            motifs: vec![],
            ..motifs
        };
        let plain = train_subjectivity(&data, &empty, None, &small_config(3)).unwrap();
        assert_eq!(plain.pretrain_size, 0);
        assert!(plain.pretrain_errors.is_empty());

        let s = Sentence::from_text(
            "a sentence the model never saw before and is longer than the window",
            "x",
            0,
        );
        let (label, (ps, po)) = run.model.classify(&s).unwrap();
        assert!((ps + po - 1.0).abs() < 1e-9);
        assert_eq!(run.model.classify(&s).unwrap(), (label, (ps, po)));
    }

    #[test]
    fn training_is_reproducible_and_serialises() {
        let data = toy_subj();
        let cfg = SubjConfig {
            epochs: 3,
            ..small_config(4)
        };
        let a = train_subjectivity(&data, &one_motif(&["great"]), None, &cfg).unwrap();
        let b = train_subjectivity(&data, &one_motif(&["great"]), None, &cfg).unwrap();
        assert_eq!(a.model.to_text(), b.model.to_text());
        let back = SubjectivityModel::from_text(&a.model.to_text()).unwrap();
        assert_eq!(back, a.model);
        assert!(matches!(
            train_subjectivity(&[], &one_motif(&["x"]), None, &cfg),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn tie_goes_to_objective() {
        assert_eq!(label_from((0.5, 0.5)), SubjLabel::Objective);
        assert_eq!(label_from((0.9, 0.1)), SubjLabel::Subjective);
    }

    #[test]
    fn default_stack_shapes() {
        let net = build_network(&SubjConfig::default(), &mut rng(0)).unwrap();
        let dense = net
            .layers
            .iter()
            .find_map(|l| {
                if let Layer::Dense(d) = l {
                    Some(d)
                } else {
                    None
                }
            })
            .unwrap();
        // 50 -> 48 -> 24 -> 21 -> 11 -> 7 -> 4 positions of 100 maps
        assert_eq!((dense.inputs, dense.outputs), (400, 2));
        assert_eq!(
            net.layers
                .iter()
                .filter(|l| matches!(l, Layer::Conv(_)))
                .count(),
            3
        );
    }

    #[test]
    fn whitening_standardises_dimensions() {
        let mut t = EmbeddingTable::new(2, UnkPolicy::Zero);
        t.insert("a", vec![1.0, 5.0]).unwrap();
        t.insert("b", vec![3.0, 5.0]).unwrap();
        let w = whiten(&t).unwrap();
        assert_eq!(w.lookup("a"), vec![-1.0, 0.0]);
        assert_eq!(w.lookup("b"), vec![1.0, 0.0]);
    }

    #[test]
    fn sentence_grid_pads_and_truncates() {
        let mut t = EmbeddingTable::new(2, UnkPolicy::Zero);
        t.insert("a", vec![1.0, 2.0]).unwrap();
        let g = sentence_grid(&Sentence::from_text("a b a", "d", 0), &t, 5);
        assert_eq!(
            g.as_slice(),
            &[1.0, 2.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 0.0, 0.0]
        );
        let g = sentence_grid(&Sentence::from_text("a a a", "d", 0), &t, 2);
        assert_eq!(g.rows(), 2);
    }
}
