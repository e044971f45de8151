//! Aspect-term sequence tagger.
//!
//! Each token is scored by a small convolutional network over the feature
//! rows of its ±2 window (word embedding plus a 6-slot POS indicator). The
//! token scores `H[t][k]` and a learned transition matrix `A[j][k]` (with an
//! initial-tag vector) define a linear-chain distribution over tag paths,
//! trained by maximising the sentence-level log-likelihood and decoded with
//! Viterbi.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    iob2_decode, iob2_encode, AspectSpan, EmbeddingTable, IobTag, Pos, Sentence, UnkPolicy,
};
use crate::neural::{
    sgd_step, ConvLayer, DenseLayer, Layer, Matrix, Mode, Network, Parameters, Trace,
};
use crate::textfmt::{TextReader, TextWriter};
use crate::{Error, Result};

/// Tag alphabet size: `O`, `B-A`, `I-A`.
pub const NUM_TAGS: usize = 3;

/// Tokens on each side of the centre word in the scorer window.
pub const WINDOW_RADIUS: usize = 2;

pub const WINDOW_SLOTS: usize = 2 * WINDOW_RADIUS + 1;

/// `log Σ exp(x_i)` with max-shift.
pub fn logadd(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("logadd of no terms"));
    }
    Ok(logadd_iter(xs.iter().copied()))
}

fn logadd_iter(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Transition scores between tags plus the score of each initial tag.
#[derive(Debug, Clone, PartialEq)]
pub struct Transitions {
    num_tags: usize,
    /// `start[k]`: score of a path beginning with tag `k`.
    pub start: Vec<f64>,
    /// Row-major `num_tags × num_tags`; `matrix[j * K + k]` scores `j → k`.
    pub matrix: Vec<f64>,
}

impl Transitions {
    pub fn zeros(num_tags: usize) -> Self {
        Self {
            num_tags,
            start: vec![0.0; num_tags],
            matrix: vec![0.0; num_tags * num_tags],
        }
    }

    pub fn new(start: Vec<f64>, matrix: Vec<f64>) -> Result<Self> {
        let k = start.len();
        if matrix.len() != k * k {
            return Err(Error::shape(
                "transitions",
                format!("{} entries for {k} tags", matrix.len()),
            ));
        }
        Ok(Self {
            num_tags: k,
            start,
            matrix,
        })
    }

    pub fn num_tags(&self) -> usize {
        self.num_tags
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.matrix[from * self.num_tags + to]
    }

    /// Copy with `O → I-A` and a leading `I-A` forbidden.
    pub fn constrained(&self) -> Self {
        let mut c = self.clone();
        c.start[IobTag::I.index()] = f64::NEG_INFINITY;
        c.matrix[IobTag::O.index() * self.num_tags + IobTag::I.index()] = f64::NEG_INFINITY;
        c
    }
}

fn check_lattice(scores: &Matrix, trans: &Transitions) -> Result<()> {
    if scores.rows() == 0 {
        return Err(Error::Empty("tag lattice with no tokens"));
    }
    if scores.cols() != trans.num_tags {
        return Err(Error::shape(
            "lattice",
            format!(
                "{} score columns for {} tags",
                scores.cols(),
                trans.num_tags
            ),
        ));
    }
    Ok(())
}

fn check_path(path: &[usize], scores: &Matrix, k: usize) -> Result<()> {
    if path.len() != scores.rows() {
        return Err(Error::shape(
            "tag path",
            format!("{} tags for {} tokens", path.len(), scores.rows()),
        ));
    }
    if let Some(&bad) = path.iter().find(|&&y| y >= k) {
        return Err(Error::InvalidArgument(format!(
            "tag {bad} outside alphabet of {k}"
        )));
    }
    Ok(())
}

/// `start[y_0] + Σ_t H[t][y_t] + Σ_{t≥1} A[y_{t−1}][y_t]`.
pub fn sentence_score(scores: &Matrix, trans: &Transitions, path: &[usize]) -> Result<f64> {
    check_lattice(scores, trans)?;
    check_path(path, scores, trans.num_tags)?;
    let mut s = trans.start[path[0]];
    for (t, &y) in path.iter().enumerate() {
        s += scores.get(t, y);
        if t > 0 {
            s += trans.get(path[t - 1], y);
        }
    }
    Ok(s)
}

/// Forward table: `delta[t][k]` is the logadd of all partial path scores
/// ending in tag `k` at token `t`.
pub fn forward_table(scores: &Matrix, trans: &Transitions) -> Result<Matrix> {
    check_lattice(scores, trans)?;
    let (n, k) = scores.shape();
    let mut delta = Matrix::zeros(n, k);
    for j in 0..k {
        delta.set(0, j, trans.start[j] + scores.get(0, j));
    }
    for t in 1..n {
        for cur in 0..k {
            let prev = delta.row(t - 1);
            let acc = logadd_iter((0..k).map(|j| prev[j] + trans.get(j, cur)));
            delta.set(t, cur, scores.get(t, cur) + acc);
        }
    }
    Ok(delta)
}

fn backward_table(scores: &Matrix, trans: &Transitions) -> Matrix {
    let (n, k) = scores.shape();
    let mut beta = Matrix::zeros(n, k);
    for t in (0..n - 1).rev() {
        for j in 0..k {
            let next = beta.row(t + 1);
            let acc = logadd_iter((0..k).map(|c| trans.get(j, c) + scores.get(t + 1, c) + next[c]));
            beta.set(t, j, acc);
        }
    }
    beta
}

/// Log of the sum of `exp(score)` over every tag path, in `O(T·K²)`.
pub fn log_partition(scores: &Matrix, trans: &Transitions) -> Result<f64> {
    let delta = forward_table(scores, trans)?;
    Ok(logadd_iter(delta.row(delta.rows() - 1).iter().copied()))
}

/// Negative log-likelihood of a gold path and its gradients.
#[derive(Debug, Clone)]
pub struct NllGrad {
    pub loss: f64,
    pub d_scores: Matrix,
    pub d_transitions: Vec<f64>,
    pub d_start: Vec<f64>,
}

/// `log_partition − sentence_score(gold)` with gradients from
/// forward–backward marginals.
pub fn structured_nll(scores: &Matrix, trans: &Transitions, gold: &[usize]) -> Result<NllGrad> {
    let gold_score = sentence_score(scores, trans, gold)?;
    let (n, k) = scores.shape();
    let alpha = forward_table(scores, trans)?;
    let beta = backward_table(scores, trans);
    let log_z = logadd_iter(alpha.row(n - 1).iter().copied());

    let mut d_scores = Matrix::zeros(n, k);
    for t in 0..n {
        for j in 0..k {
            d_scores.set(t, j, (alpha.get(t, j) + beta.get(t, j) - log_z).exp());
        }
    }
    let mut d_start: Vec<f64> = d_scores.row(0).to_vec();
    let mut d_trans = vec![0.0; k * k];
    for t in 1..n {
        for j in 0..k {
            for c in 0..k {
                let lp = alpha.get(t - 1, j) + trans.get(j, c) + scores.get(t, c) + beta.get(t, c)
                    - log_z;
                d_trans[j * k + c] += lp.exp();
            }
        }
    }
    for (t, &y) in gold.iter().enumerate() {
        let v = d_scores.get(t, y) - 1.0;
        d_scores.set(t, y, v);
        if t > 0 {
            d_trans[gold[t - 1] * k + y] -= 1.0;
        }
    }
    d_start[gold[0]] -= 1.0;

    Ok(NllGrad {
        // tiny negative values are rounding noise
        loss: (log_z - gold_score).max(0.0),
        d_scores,
        d_transitions: d_trans,
        d_start,
    })
}

/// Highest-scoring tag path. Ties go to the lowest tag index, both at each
/// backpointer and at the final token.
pub fn viterbi(scores: &Matrix, trans: &Transitions) -> Result<Vec<usize>> {
    check_lattice(scores, trans)?;
    let (n, k) = scores.shape();
    let mut best = vec![0.0; k];
    for j in 0..k {
        best[j] = trans.start[j] + scores.get(0, j);
    }
    let mut back = vec![vec![0usize; k]; n];
    for t in 1..n {
        let mut next = vec![f64::NEG_INFINITY; k];
        for c in 0..k {
            let mut arg = 0;
            let mut val = f64::NEG_INFINITY;
            for j in 0..k {
                let v = best[j] + trans.get(j, c);
                if v > val {
                    val = v;
                    arg = j;
                }
            }
            back[t][c] = arg;
            next[c] = val + scores.get(t, c);
        }
        best = next;
    }
    let mut last = 0;
    for j in 1..k {
        if best[j] > best[last] {
            last = j;
        }
    }
    let mut path = vec![last; n];
    for t in (1..n).rev() {
        path[t - 1] = back[t][path[t]];
    }
    Ok(path)
}

/// Architecture of the token scorer.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggerConfig {
    pub embedding_dim: usize,
    pub conv1_maps: usize,
    pub conv1_width: usize,
    pub conv2_maps: usize,
    pub conv2_width: usize,
    pub pool_size: usize,
    pub pool_stride: usize,
    /// Forbid `O → I-A` and a leading `I-A` outright instead of learning
    /// them away.
    pub hard_constraints: bool,
    pub init_scale: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        Self {
            embedding_dim: 300,
            conv1_maps: 100,
            conv1_width: 2,
            conv2_maps: 50,
            conv2_width: 3,
            pool_size: 2,
            pool_stride: 1,
            hard_constraints: false,
            init_scale: crate::neural::INIT_SCALE,
        }
    }
}

impl TaggerConfig {
    pub fn feature_dim(&self) -> usize {
        self.embedding_dim + Pos::FEATURE_DIM
    }
}

/// Optimisation settings shared by the trainers.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    /// Keep probability of the dropout before the output layer.
    pub dropout_keep: f64,
    pub seed: u64,
    /// Max L2 norm of each output-layer weight vector.
    pub l2_max: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.05,
            epochs: 30,
            dropout_keep: 0.5,
            seed: 0,
            l2_max: Some(3.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate must be non-negative".into(),
            ));
        }
        if !(self.dropout_keep > 0.0 && self.dropout_keep <= 1.0) {
            return Err(Error::InvalidArgument(
                "dropout keep must lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// 306-d feature row of one token: its embedding followed by the POS slots.
pub fn token_features(token: &crate::corpus::Token, table: &EmbeddingTable) -> Vec<f64> {
    let mut row = table.lookup(&token.surface);
    let mut pos = [0.0; Pos::FEATURE_DIM];
    if let Some(i) = token.pos.feature_index() {
        pos[i] = 1.0;
    }
    row.extend_from_slice(&pos);
    row
}

fn sentence_rows(sentence: &Sentence, table: &EmbeddingTable) -> Vec<Vec<f64>> {
    sentence
        .tokens
        .iter()
        .map(|t| token_features(t, table))
        .collect()
}

fn window_grid(rows: &[Vec<f64>], t: usize, width: usize) -> Matrix {
    let mut grid = Matrix::zeros(WINDOW_SLOTS, width);
    for slot in 0..WINDOW_SLOTS {
        let pos = t as isize + slot as isize - WINDOW_RADIUS as isize;
        if pos >= 0 && (pos as usize) < rows.len() {
            grid.row_mut(slot).copy_from_slice(&rows[pos as usize]);
        }
    }
    grid
}

/// Concatenated feature rows of the 5 tokens centred on `t`; positions past
/// either end of the sentence are all-zero padding.
pub fn window_features(sentence: &Sentence, t: usize, table: &EmbeddingTable) -> Vec<f64> {
    let rows = sentence_rows(sentence, table);
    window_grid(&rows, t, table.dim() + Pos::FEATURE_DIM).into_vec()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaggerModel {
    pub embedding_dim: usize,
    pub unk_policy: UnkPolicy,
    pub hard_constraints: bool,
    pub network: Network,
    pub transitions: Transitions,
}

impl Parameters for TaggerModel {
    fn params(&self) -> Vec<&[f64]> {
        let mut p = self.network.params();
        p.push(&self.transitions.matrix);
        p.push(&self.transitions.start);
        p
    }

    fn params_mut(&mut self) -> Vec<&mut [f64]> {
        let mut p = self.network.params_mut();
        p.push(&mut self.transitions.matrix);
        p.push(&mut self.transitions.start);
        p
    }
}

impl TaggerModel {
    /// Freshly initialised model; conv and dense weights uniform in
    /// `±init_scale`, transitions zero.
    pub fn new(
        config: &TaggerConfig,
        dropout_keep: f64,
        unk_policy: UnkPolicy,
        seed: u64,
    ) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let feat = config.feature_dim();
        let s = config.init_scale;
        let conv1 = ConvLayer::random(config.conv1_width, feat, config.conv1_maps, s, &mut rng);
        let conv2 = ConvLayer::random(
            config.conv2_width,
            config.conv1_maps,
            config.conv2_maps,
            s,
            &mut rng,
        );
        let pool = Layer::MaxPool {
            size: config.pool_size,
            stride: config.pool_stride,
        };

        let pooled = |len: usize| {
            crate::neural::max_pool_strided(&vec![0.0; len], config.pool_size, config.pool_stride)
                .len()
        };
        let after1 = conv1
            .output_len(WINDOW_SLOTS)
            .map(pooled)
            .ok_or_else(|| Error::InvalidArgument("first kernel wider than the window".into()))?;
        let after2 = conv2.output_len(after1).map(pooled).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "second kernel wider than {after1} pooled positions"
            ))
        })?;
        let dense = DenseLayer::random(after2 * config.conv2_maps, NUM_TAGS, s, &mut rng);

        let network = Network::new(vec![
            Layer::Conv(conv1),
            Layer::Tanh,
            pool.clone(),
            Layer::Conv(conv2),
            Layer::Tanh,
            pool,
            Layer::Dropout { keep: dropout_keep },
            Layer::Dense(dense),
        ]);
        Ok(Self {
            embedding_dim: config.embedding_dim,
            unk_policy,
            hard_constraints: config.hard_constraints,
            network,
            transitions: Transitions::zeros(NUM_TAGS),
        })
    }

    fn effective_transitions(&self) -> Transitions {
        if self.hard_constraints {
            self.transitions.constrained()
        } else {
            self.transitions.clone()
        }
    }

    fn check_table(&self, table: &EmbeddingTable) -> Result<()> {
        if table.dim() != self.embedding_dim {
            return Err(Error::shape(
                "tagger",
                format!(
                    "embedding table has dim {}, model expects {}",
                    table.dim(),
                    self.embedding_dim
                ),
            ));
        }
        Ok(())
    }

    /// `T × 3` token scores at inference.
    pub fn token_scores(&self, sentence: &Sentence, table: &EmbeddingTable) -> Result<Matrix> {
        self.check_table(table)?;
        let rows = sentence_rows(sentence, table);
        let width = self.embedding_dim + Pos::FEATURE_DIM;
        let mut h = Matrix::zeros(sentence.len(), NUM_TAGS);
        for t in 0..sentence.len() {
            let trace = self
                .network
                .forward(&window_grid(&rows, t, width), Mode::Inference)?;
            h.row_mut(t).copy_from_slice(trace.output().as_slice());
        }
        Ok(h)
    }

    /// Viterbi tags and the aspect spans they encode.
    pub fn tag(
        &self,
        sentence: &Sentence,
        table: &EmbeddingTable,
    ) -> Result<(Vec<IobTag>, BTreeSet<AspectSpan>)> {
        if sentence.is_empty() {
            return Ok((Vec::new(), BTreeSet::new()));
        }
        let h = self.token_scores(sentence, table)?;
        let path = viterbi(&h, &self.effective_transitions())?;
        let tags: Vec<IobTag> = path
            .into_iter()
            .map(|i| IobTag::from_index(i).unwrap())
            .collect();
        let spans = iob2_decode(&tags);
        Ok((tags, spans))
    }

    /// Loss and full-parameter gradient for one sentence. Passing `rng`
    /// enables dropout.
    pub fn loss_and_grads(
        &self,
        sentence: &Sentence,
        gold: &[usize],
        table: &EmbeddingTable,
        rng: Option<&mut dyn rand::RngCore>,
    ) -> Result<(f64, Vec<Vec<f64>>)> {
        self.check_table(table)?;
        let rows = sentence_rows(sentence, table);
        let width = self.embedding_dim + Pos::FEATURE_DIM;
        let mut traces: Vec<Trace> = Vec::with_capacity(sentence.len());
        let mut h = Matrix::zeros(sentence.len(), NUM_TAGS);
        let mut rng = rng;
        for t in 0..sentence.len() {
            let grid = window_grid(&rows, t, width);
            let mode = match rng.as_deref_mut() {
                Some(r) => Mode::Train(r),
                None => Mode::Inference,
            };
            let trace = self.network.forward(&grid, mode)?;
            h.row_mut(t).copy_from_slice(trace.output().as_slice());
            traces.push(trace);
        }
        let trans = self.effective_transitions();
        let nll = structured_nll(&h, &trans, gold)?;
        let mut grads = self.network.zero_grads();
        for (t, trace) in traces.iter().enumerate() {
            let g = Matrix::row_vector(nll.d_scores.row(t).to_vec());
            self.network.backward_into(trace, &g, &mut grads);
        }
        let mut d_trans = nll.d_transitions;
        let mut d_start = nll.d_start;
        // forbidden entries carry no gradient
        for v in d_trans.iter_mut().chain(d_start.iter_mut()) {
            if !v.is_finite() {
                *v = 0.0;
            }
        }
        grads.push(d_trans);
        grads.push(d_start);
        Ok((nll.loss, grads))
    }

    pub fn to_text(&self) -> String {
        let mut w = TextWriter::new();
        w.line("tagger", ["v1"]);
        w.line("tags", IobTag::ALL.iter().map(|t| t.as_str()));
        w.line(
            "features",
            [self.embedding_dim, Pos::FEATURE_DIM, WINDOW_RADIUS],
        );
        match self.unk_policy {
            UnkPolicy::Zero => w.line("unk", ["zero".to_string()]),
            UnkPolicy::SeededHash { seed } => {
                w.line("unk", ["seeded-hash".to_string(), seed.to_string()])
            }
        }
        w.line("constraints", [u8::from(self.hard_constraints)]);
        w.floats("start", &self.transitions.start);
        w.floats("transitions", &self.transitions.matrix);
        self.network.write_text(&mut w);
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = TextReader::new(text);
        let (_, v) = r.fields("tagger")?;
        if v != ["v1"] {
            return Err(Error::Format("unsupported tagger version".into()));
        }
        let (_, tags) = r.fields("tags")?;
        if tags != ["O", "B-A", "I-A"] {
            return Err(Error::Format(format!("unexpected tag alphabet {tags:?}")));
        }
        let feats: Vec<usize> = r.parsed("features")?;
        if feats.len() != 3 || feats[1] != Pos::FEATURE_DIM || feats[2] != WINDOW_RADIUS {
            return Err(Error::Format("unsupported feature layout".into()));
        }
        let (line, unk) = r.fields("unk")?;
        let unk_policy = match unk.as_slice() {
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
        let hard_constraints = r.scalar::<u8>("constraints")? != 0;
        let start = r.floats("start", NUM_TAGS)?;
        let matrix = r.floats("transitions", NUM_TAGS * NUM_TAGS)?;
        let network = Network::read_text(&mut r)?;
        Ok(Self {
            embedding_dim: feats[0],
            unk_policy,
            hard_constraints,
            network,
            transitions: Transitions::new(start, matrix)?,
        })
    }
}

/// Gold tag indices of a sentence; `None` when any token is untagged. With
/// hard constraints the sequence is normalised through a span round trip so
/// orphan `I-A` tags become `B-A`.
pub fn gold_path(sentence: &Sentence, normalise: bool) -> Option<Vec<usize>> {
    let tags = sentence.gold_tags()?;
    let tags = if normalise {
        iob2_encode(&iob2_decode(&tags), tags.len()).ok()?
    } else {
        tags
    };
    Some(tags.into_iter().map(IobTag::index).collect())
}

/// Result of [`train_tagger`]: the model and the mean NLL of every epoch.
#[derive(Debug, Clone)]
pub struct TrainedTagger {
    pub model: TaggerModel,
    pub epoch_losses: Vec<f64>,
}

/// SGD on the structured NLL, one update per sentence. Sentence order is
/// reshuffled each epoch from the seeded stream.
pub fn train_tagger(
    sentences: &[Sentence],
    table: &EmbeddingTable,
    config: &TaggerConfig,
    train: &TrainConfig,
) -> Result<TrainedTagger> {
    train.validate()?;
    let data: Vec<(&Sentence, Vec<usize>)> = sentences
        .iter()
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            gold_path(s, config.hard_constraints)
                .map(|g| (s, g))
                .ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "sentence {i} (`{}`) has untagged tokens",
                        s.text()
                    ))
                })
        })
        .collect::<Result<_>>()?;
    if data.is_empty() {
        return Err(Error::Empty("training corpus"));
    }
    let mut model = TaggerModel::new(config, train.dropout_keep, table.unk_policy(), train.seed)?;
    model.check_table(table)?;
    let mut rng = ChaCha8Rng::seed_from_u64(train.seed ^ 0x5eed_7a66);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut epoch_losses = Vec::with_capacity(train.epochs);
    for _ in 0..train.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for &i in &order {
            let (s, gold) = &data[i];
            let (loss, grads) = model.loss_and_grads(s, gold, table, Some(&mut rng))?;
            total += loss;
            sgd_step(&mut model, &grads, train.learning_rate);
            if let Some(max) = train.l2_max {
                model.network.clip_dense_norms(max);
            }
        }
        epoch_losses.push(total / data.len() as f64);
    }
    Ok(TrainedTagger {
        model,
        epoch_losses,
    })
}

/// Draws a `T × K` score matrix uniformly from `[lo, hi)`.
pub fn random_scores<R: Rng>(rng: &mut R, tokens: usize, tags: usize, lo: f64, hi: f64) -> Matrix {
    let v = (0..tokens * tags)
        .map(|_| rng.random_range(lo..hi))
        .collect();
    Matrix::from_vec(tokens, tags, v).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Token;
    use proptest::prelude::*;
    use rand::Rng;

    /// Every path over `t` tokens and `k` tags, lexicographic.
    fn all_paths(t: usize, k: usize) -> Vec<Vec<usize>> {
        let mut out = vec![vec![]];
        for _ in 0..t {
            out = out
                .into_iter()
                .flat_map(|p| {
                    (0..k).map(move |y| {
                        let mut q = p.clone();
                        q.push(y);
                        q
                    })
                })
                .collect();
        }
        out
    }

    fn direct_score(h: &Matrix, a: &Transitions, p: &[usize]) -> f64 {
        let mut s = a.start[p[0]] + h.get(0, p[0]);
        for t in 1..p.len() {
            s += h.get(t, p[t]) + a.matrix[p[t - 1] * a.num_tags() + p[t]];
        }
        s
    }

    fn random_instance(seed: u64, t: usize, k: usize) -> (Matrix, Transitions) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_scores(&mut rng, t, k, -2.0, 2.0);
        let start = (0..k).map(|_| rng.random_range(-2.0..2.0)).collect();
        let m = (0..k * k).map(|_| rng.random_range(-2.0..2.0)).collect();
        (h, Transitions::new(start, m).unwrap())
    }

    #[test]
    fn logadd_examples() {
        assert!((logadd(&[0.0, 0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(logadd(&[3.5]).unwrap(), 3.5);
        assert!((logadd(&[1000.0, 1000.0]).unwrap() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!(logadd(&[]).is_err());
        assert_eq!(
            logadd(&[f64::NEG_INFINITY, f64::NEG_INFINITY]).unwrap(),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn score_examples() {
        let h = Matrix::from_rows(&[vec![0.7, -1.0, 2.0]]).unwrap();
        let a = Transitions::zeros(3);
        assert_eq!(sentence_score(&h, &a, &[2]).unwrap(), 2.0);
        let z = Matrix::zeros(3, 3);
        for p in all_paths(3, 3) {
            assert_eq!(sentence_score(&z, &a, &p).unwrap(), 0.0);
        }
        assert!(sentence_score(&z, &a, &[0, 3, 1]).is_err());
        assert!(sentence_score(&z, &a, &[0, 1]).is_err());
    }

    #[test]
    fn score_matches_summation_on_all_paths() {
        let (h, a) = random_instance(11, 4, 3);
        let paths = all_paths(4, 3);
        assert_eq!(paths.len(), 81);
        for p in paths {
            let s = sentence_score(&h, &a, &p).unwrap();
            assert!((s - direct_score(&h, &a, &p)).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_examples() {
        let (h, a) = random_instance(12, 1, 3);
        let expect = logadd(&(0..3).map(|k| h.get(0, k) + a.start[k]).collect::<Vec<_>>()).unwrap();
        assert!((log_partition(&h, &a).unwrap() - expect).abs() < 1e-12);
        let z = Matrix::zeros(2, 3);
        assert!((log_partition(&z, &Transitions::zeros(3)).unwrap() - 9f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn partition_matches_enumeration() {
        let (h, a) = random_instance(13, 5, 3);
        let scores: Vec<f64> = all_paths(5, 3)
            .iter()
            .map(|p| direct_score(&h, &a, p))
            .collect();
        assert_eq!(scores.len(), 243);
        let brute = logadd(&scores).unwrap();
        assert!((log_partition(&h, &a).unwrap() - brute).abs() < 1e-9);
    }

    #[test]
    fn nll_examples() {
        let z = Matrix::zeros(2, 3);
        let n = structured_nll(&z, &Transitions::zeros(3), &[0, 1]).unwrap();
        assert!((n.loss - 9f64.ln()).abs() < 1e-12);

        let gold = [1, 2, 0, 1];
        let mut h = Matrix::zeros(4, 3);
        for (t, &y) in gold.iter().enumerate() {
            h.set(t, y, 50.0);
        }
        let n = structured_nll(&h, &Transitions::zeros(3), &gold).unwrap();
        assert!(n.loss < 1e-8);
    }

    #[test]
    fn nll_gradients_match_finite_differences() {
        let (h, a) = random_instance(14, 4, 3);
        let gold = [1, 2, 0, 0];
        let g = structured_nll(&h, &a, &gold).unwrap();
        let f =
            |h: &Matrix, a: &Transitions| log_partition(h, a).unwrap() - direct_score(h, a, &gold);
        let eps = 1e-5;
        for i in 0..12 {
            let mut hp = h.clone();
            let mut hm = h.clone();
            hp.as_mut_slice()[i] += eps;
            hm.as_mut_slice()[i] -= eps;
            let num = (f(&hp, &a) - f(&hm, &a)) / (2.0 * eps);
            assert!((num - g.d_scores.as_slice()[i]).abs() < 1e-6);
        }
        for i in 0..9 {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap.matrix[i] += eps;
            am.matrix[i] -= eps;
            let num = (f(&h, &ap) - f(&h, &am)) / (2.0 * eps);
            assert!((num - g.d_transitions[i]).abs() < 1e-6);
        }
        for i in 0..3 {
            let mut ap = a.clone();
            let mut am = a.clone();
            ap.start[i] += eps;
            am.start[i] -= eps;
            let num = (f(&h, &ap) - f(&h, &am)) / (2.0 * eps);
            assert!((num - g.d_start[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn viterbi_examples() {
        // decoupled lattice
        let (h, _) = random_instance(15, 5, 3);
        let path = viterbi(&h, &Transitions::zeros(3)).unwrap();
        for (t, &y) in path.iter().enumerate() {
            let row = h.row(t);
            assert!(row.iter().all(|&v| v <= row[y]));
        }

        // tags (O, B): OO=2, OB=-7, BO=0, BB=1
        let h = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let a = Transitions::new(vec![0.0, 0.0], vec![0.0, -10.0, 0.0, 0.0]).unwrap();
        assert_eq!(viterbi(&h, &a).unwrap(), vec![0, 0]);
    }

    #[test]
    fn viterbi_ties_go_to_lowest_index() {
        let z = Matrix::zeros(4, 3);
        assert_eq!(viterbi(&z, &Transitions::zeros(3)).unwrap(), vec![0; 4]);
        let h = Matrix::from_rows(&[vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 0.0]]).unwrap();
        assert_eq!(viterbi(&h, &Transitions::zeros(3)).unwrap(), vec![1, 0]);
    }

    #[test]
    fn viterbi_matches_enumeration() {
        let (h, a) = random_instance(16, 6, 3);
        let paths = all_paths(6, 3);
        assert_eq!(paths.len(), 729);
        let best = paths
            .iter()
            .max_by(|p, q| {
                direct_score(&h, &a, p)
                    .partial_cmp(&direct_score(&h, &a, q))
                    .unwrap()
            })
            .unwrap();
        assert_eq!(&viterbi(&h, &a).unwrap(), best);
    }

    #[test]
    fn constrained_decoding_never_emits_orphan_inside() {
        let mut h = Matrix::zeros(3, 3);
        h.set(1, IobTag::I.index(), 5.0);
        h.set(0, IobTag::I.index(), 5.0);
        let a = Transitions::zeros(3).constrained();
        let path = viterbi(&h, &a).unwrap();
        assert_ne!(path[0], IobTag::I.index());
        for w in path.windows(2) {
            assert!(!(w[0] == IobTag::O.index() && w[1] == IobTag::I.index()));
        }
    }

    proptest! {
        #[test]
        fn path_probabilities_sum_to_one(seed in 0u64..500, t in 1usize..5) {
            let (h, a) = random_instance(seed, t, 3);
            let z = log_partition(&h, &a).unwrap();
            let total: f64 = all_paths(t, 3).iter().map(|p| (direct_score(&h, &a, p) - z).exp()).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }

        #[test]
        fn nll_is_non_negative(seed in 0u64..500, t in 1usize..6, g in prop::collection::vec(0usize..3, 6)) {
            let (h, a) = random_instance(seed, t, 3);
            let n = structured_nll(&h, &a, &g[..t]).unwrap();
            prop_assert!(n.loss >= 0.0);
        }

        #[test]
        fn row_shift_leaves_decoding_unchanged(seed in 0u64..500, t in 1usize..6, c in -5.0f64..5.0) {
            let (h, a) = random_instance(seed, t, 3);
            let row = (seed as usize) % t;
            let mut shifted = h.clone();
            for k in 0..3 {
                shifted.set(row, k, h.get(row, k) + c);
            }
            prop_assert_eq!(viterbi(&h, &a).unwrap(), viterbi(&shifted, &a).unwrap());
            let gold = viterbi(&h, &a).unwrap();
            let p0 = structured_nll(&h, &a, &gold).unwrap().loss;
            let p1 = structured_nll(&shifted, &a, &gold).unwrap().loss;
            prop_assert!((p0 - p1).abs() < 1e-9);
        }
    }

    fn small_config() -> TaggerConfig {
        TaggerConfig {
            embedding_dim: 4,
            conv1_maps: 5,
            conv2_maps: 4,
            init_scale: 0.5,
            ..TaggerConfig::default()
        }
    }

    fn toy_sentence(words: &[(&str, Pos, IobTag)]) -> Sentence {
        Sentence::new(
            words
                .iter()
                .map(|(w, p, t)| Token {
                    pos: *p,
                    tag: Some(*t),
                    ..Token::word(*w)
                })
                .collect(),
            "d",
            0,
        )
    }

    #[test]
    fn window_features_layout() {
        let table = EmbeddingTable::new(300, UnkPolicy::SeededHash { seed: 1 });
        let s = toy_sentence(&[("camera", Pos::Noun, IobTag::B)]);
        let f = window_features(&s, 0, &table);
        assert_eq!(f.len(), 1530);
        for slot in [0, 1, 3, 4] {
            assert!(f[slot * 306..(slot + 1) * 306].iter().all(|&v| v == 0.0));
        }
        let pos = &f[2 * 306 + 300..3 * 306];
        assert_eq!(pos, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn default_architecture_shapes() {
        let m = TaggerModel::new(&TaggerConfig::default(), 0.5, UnkPolicy::Zero, 1).unwrap();
        let kinds: Vec<_> = m.network.layers.iter().map(Layer::name).collect();
        assert_eq!(
            kinds,
            ["conv", "tanh", "maxpool", "conv", "tanh", "maxpool", "dropout", "dense"]
        );
        match (
            &m.network.layers[0],
            &m.network.layers[3],
            &m.network.layers[7],
        ) {
            (Layer::Conv(a), Layer::Conv(b), Layer::Dense(d)) => {
                assert_eq!((a.width, a.depth, a.maps), (2, 306, 100));
                assert_eq!((b.width, b.depth, b.maps), (3, 100, 50));
                assert_eq!((d.inputs, d.outputs), (50, 3));
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn zero_weight_scorer_outputs_biases() {
        let table = EmbeddingTable::new(4, UnkPolicy::SeededHash { seed: 1 });
        let mut m = TaggerModel::new(&small_config(), 1.0, table.unk_policy(), 3).unwrap();
        for p in m.network.params_mut() {
            p.iter_mut().for_each(|w| *w = 0.0);
        }
        if let Some(Layer::Dense(d)) = m.network.layers.last_mut() {
            d.biases = vec![0.5, -1.0, 2.0];
        }
        let s = toy_sentence(&[("a", Pos::Noun, IobTag::B), ("b", Pos::Verb, IobTag::O)]);
        let h = m.token_scores(&s, &table).unwrap();
        for t in 0..2 {
            assert_eq!(h.row(t), &[0.5, -1.0, 2.0]);
        }
    }

    #[test]
    fn token_scores_are_local() {
        let table = EmbeddingTable::new(4, UnkPolicy::SeededHash { seed: 2 });
        let m = TaggerModel::new(&small_config(), 1.0, table.unk_policy(), 4).unwrap();
        let words = ["w0", "w1", "w2", "w3", "w4", "w5", "w6", "w7", "w8", "w9"];
        let mk = |ws: &[&str]| {
            toy_sentence(
                &ws.iter()
                    .map(|w| (*w, Pos::Other, IobTag::O))
                    .collect::<Vec<_>>(),
            )
        };
        let s = mk(&words);
        let mut swapped = words;
        swapped.swap(0, 9);
        let h1 = m.token_scores(&s, &table).unwrap();
        let h2 = m.token_scores(&mk(&swapped), &table).unwrap();
        for t in 0..10 {
            let near = t <= 2 || t >= 7;
            if !near {
                assert_eq!(h1.row(t), h2.row(t), "row {t}");
            }
        }
        assert_ne!(h1.row(0), h2.row(0));
        assert_eq!(h1, m.token_scores(&s, &table).unwrap());
    }

    #[test]
    fn full_scorer_grad_check() {
        let table = EmbeddingTable::new(4, UnkPolicy::SeededHash { seed: 5 });
        let mut m = TaggerModel::new(&small_config(), 0.7, table.unk_policy(), 5).unwrap();
        m.transitions = random_instance(5, 1, 3).1;
        let s = toy_sentence(&[
            ("the", Pos::Other, IobTag::O),
            ("battery", Pos::Noun, IobTag::B),
            ("life", Pos::Noun, IobTag::I),
            ("rocks", Pos::Verb, IobTag::O),
        ]);
        let gold = gold_path(&s, false).unwrap();
        let (_, grads) = m.loss_and_grads(&s, &gold, &table, None).unwrap();
        let err = crate::neural::grad_check(&mut m, &grads, |mm| {
            mm.loss_and_grads(&s, &gold, &table, None).unwrap().0
        });
        assert!(err < 1e-4, "relative error {err}");
    }

    #[test]
    fn model_text_round_trip() {
        let m =
            TaggerModel::new(&small_config(), 0.5, UnkPolicy::SeededHash { seed: 9 }, 6).unwrap();
        let back = TaggerModel::from_text(&m.to_text()).unwrap();
        assert_eq!(back, m);
        let z = TaggerModel::new(
            &TaggerConfig {
                hard_constraints: true,
                ..small_config()
            },
            1.0,
            UnkPolicy::Zero,
            6,
        )
        .unwrap();
        assert_eq!(TaggerModel::from_text(&z.to_text()).unwrap(), z);
    }

    #[test]
    fn training_rejects_empty_and_untagged() {
        let table = EmbeddingTable::new(4, UnkPolicy::Zero);
        assert!(matches!(
            train_tagger(&[], &table, &small_config(), &TrainConfig::default()),
            Err(Error::Empty(_))
        ));
        let s = Sentence::from_text("no tags here", "d", 0);
        assert!(train_tagger(&[s], &table, &small_config(), &TrainConfig::default()).is_err());
    }

    #[test]
    fn zero_rate_gives_constant_loss_and_seed_determinism() {
        let table = EmbeddingTable::new(4, UnkPolicy::SeededHash { seed: 3 });
        let data = vec![
            toy_sentence(&[
                ("nice", Pos::Adjective, IobTag::O),
                ("screen", Pos::Noun, IobTag::B),
            ]),
            toy_sentence(&[
                ("the", Pos::Other, IobTag::O),
                ("keyboard", Pos::Noun, IobTag::B),
                ("works", Pos::Verb, IobTag::O),
            ]),
        ];
        let cfg = TrainConfig {
            learning_rate: 0.0,
            epochs: 4,
            dropout_keep: 1.0,
            seed: 1,
            l2_max: None,
        };
        let run = train_tagger(&data, &table, &small_config(), &cfg).unwrap();
        assert!(run.epoch_losses.windows(2).all(|w| w[0] == w[1]));

        let cfg = TrainConfig {
            learning_rate: 0.1,
            epochs: 3,
            seed: 7,
            ..TrainConfig::default()
        };
        let a = train_tagger(&data, &table, &small_config(), &cfg).unwrap();
        let b = train_tagger(&data, &table, &small_config(), &cfg).unwrap();
        assert_eq!(a.model.to_text(), b.model.to_text());
    }

    #[test]
    fn peaked_model_tags() {
        let table = EmbeddingTable::new(4, UnkPolicy::Zero);
        let mut m = TaggerModel::new(&small_config(), 1.0, UnkPolicy::Zero, 1).unwrap();
        for p in m.network.params_mut() {
            p.iter_mut().for_each(|w| *w = 0.0);
        }
        if let Some(Layer::Dense(d)) = m.network.layers.last_mut() {
            d.biases = vec![10.0, 0.0, 0.0];
        }
        let s = toy_sentence(&[
            ("a", Pos::Noun, IobTag::B),
            ("b", Pos::Noun, IobTag::B),
            ("c", Pos::Noun, IobTag::B),
        ]);
        let (tags, spans) = m.tag(&s, &table).unwrap();
        assert_eq!(tags.len(), 3);
        assert!(spans.is_empty());
    }
}
