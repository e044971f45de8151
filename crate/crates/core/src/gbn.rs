//! Dynamic Gaussian Bayesian network over bag-of-words variables.
//!
//! Each node is a word count at the current sentence, regressed linearly on
//! parents drawn from the same sentence (lag 0) or up to `order` sentences
//! back. Structures are scored by Gaussian log-likelihood with a BIC
//! penalty. Well-fitted nodes become motifs, which are convolved over
//! sentences to select a weighted pre-training set.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    build_bow_series, count_occurrences, BowTimeSeries, EmbeddingTable, Lexicon, Sentence, Token,
    UnkPolicy,
};
use crate::neural::Matrix;
use crate::{Error, Result};

/// Ridge added to the parent Gram matrix when it is singular.
pub const RIDGE: f64 = 1e-6;

/// Floor on the conditional variance inside the log-likelihood, so exact
/// fits score finitely.
pub const VARIANCE_FLOOR: f64 = 1e-9;

/// Above this many candidate parent sets per node, search is greedy.
pub const EXHAUSTIVE_LIMIT: usize = 5000;

/// A word variable `lag` sentences before the current one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub word: usize,
    pub lag: usize,
}

impl Var {
    pub fn new(word: usize, lag: usize) -> Self {
        Self { word, lag }
    }
}

/// Linear-Gaussian conditional of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeFit {
    pub beta: Vec<f64>,
    /// Maximum-likelihood residual variance (RSS / n).
    pub cond_var: f64,
    pub loglik: f64,
    pub mean: f64,
    pub parent_means: Vec<f64>,
    /// Number of time instants the fit used.
    pub instants: usize,
}

fn values(series: &BowTimeSeries, v: Var, first: usize) -> Result<Vec<f64>> {
    let row = series.matrix.get(v.word).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "variable {} outside series of {}",
            v.word,
            series.num_vars()
        ))
    })?;
    Ok((first..series.num_instants())
        .map(|t| row[t - v.lag])
        .collect())
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Gaussian log-likelihood of `n` residuals with sum of squares `rss` under
/// variance `var` (floored).
pub fn gaussian_loglik(n: usize, rss: f64, var: f64) -> f64 {
    let v = var.max(VARIANCE_FLOOR);
    let n = n as f64;
    -0.5 * n * (2.0 * std::f64::consts::PI * v).ln() - rss / (2.0 * v)
}

/// Solves `G x = b` for symmetric positive-definite `G` (row-major `k × k`).
fn cholesky_solve(g: &[f64], b: &[f64], k: usize) -> Option<Vec<f64>> {
    let scale = (0..k).map(|i| g[i * k + i].abs()).fold(0.0, f64::max);
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut s = g[i * k + j];
            for p in 0..j {
                s -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if s <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
                    return None;
                }
                l[i * k + i] = s.sqrt();
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    let mut y = vec![0.0; k];
    for i in 0..k {
        let s: f64 = (0..i).map(|p| l[i * k + p] * y[p]).sum();
        y[i] = (b[i] - s) / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|p| l[p * k + i] * x[p]).sum();
        x[i] = (y[i] - s) / l[i * k + i];
    }
    Some(x)
}

/// Fits `node` on `parents` over instants `first..T`. `ridge` is added to
/// the Gram diagonal.
pub fn fit_node_from(
    series: &BowTimeSeries,
    node: Var,
    parents: &[Var],
    first: usize,
    ridge: f64,
) -> Result<NodeFit> {
    let t = series.num_instants();
    let n = t.saturating_sub(first);
    if n < parents.len() + 2 {
        return Err(Error::TooFewInstants {
            needed: parents.len() + 2,
            available: n,
        });
    }
    if let Some(v) = std::iter::once(&node)
        .chain(parents)
        .find(|v| v.lag > first)
    {
        return Err(Error::InvalidArgument(format!(
            "lag {} exceeds first instant {first}",
            v.lag
        )));
    }
    let y = values(series, node, first)?;
    let mu = mean(&y);
    let yc: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let xs: Vec<Vec<f64>> = parents
        .iter()
        .map(|&p| values(series, p, first))
        .collect::<Result<_>>()?;
    let parent_means: Vec<f64> = xs.iter().map(|x| mean(x)).collect();
    let xc: Vec<Vec<f64>> = xs
        .iter()
        .zip(&parent_means)
        .map(|(x, m)| x.iter().map(|v| v - m).collect())
        .collect();

    let k = parents.len();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for a in 0..k {
        for b in 0..=a {
            let s: f64 = xc[a].iter().zip(&xc[b]).map(|(p, q)| p * q).sum();
            gram[a * k + b] = s;
            gram[b * k + a] = s;
        }
        gram[a * k + a] += ridge;
        rhs[a] = xc[a].iter().zip(&yc).map(|(p, q)| p * q).sum();
    }
    let beta = if k == 0 {
        Vec::new()
    } else {
        cholesky_solve(&gram, &rhs, k).ok_or_else(|| Error::Singular {
            node: format!("{} (lag {})", series.vocab[node.word], node.lag),
        })?
    };
    let rss: f64 = (0..n)
        .map(|i| {
            let pred: f64 = (0..k).map(|a| beta[a] * xc[a][i]).sum();
            (yc[i] - pred).powi(2)
        })
        .sum();
    let cond_var = (rss / n as f64).max(0.0);
    Ok(NodeFit {
        beta,
        cond_var,
        loglik: gaussian_loglik(n, rss, cond_var),
        mean: mu,
        parent_means,
        instants: n,
    })
}

/// Least-squares fit of `node` on `parents`, aligned so every lagged value
/// exists.
pub fn fit_node(series: &BowTimeSeries, node: Var, parents: &[Var]) -> Result<NodeFit> {
    let first = std::iter::once(&node)
        .chain(parents)
        .map(|v| v.lag)
        .max()
        .unwrap_or(0);
    fit_node_from(series, node, parents, first, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GbnNode {
    /// Index of the node's word in [`GaussianNet::vars`]; the node itself
    /// is at lag 0.
    pub word: usize,
    pub parents: Vec<Var>,
    pub fit: NodeFit,
    /// Penalised score the search maximised.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianNet {
    pub vars: Vec<String>,
    pub order: usize,
    pub nodes: Vec<GbnNode>,
}

/// Search settings for [`learn_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct StructureConfig {
    pub order: usize,
    pub max_parents: usize,
    /// Minimum score gain per added parent beyond the BIC term.
    pub epsilon: f64,
}

impl Default for StructureConfig {
    fn default() -> Self {
        Self {
            order: 2,
            max_parents: 2,
            epsilon: 0.0,
        }
    }
}

/// Parents a node may take: lag-0 words with smaller index and every word
/// at lags `1..=order`.
pub fn candidate_parents(node: usize, num_vars: usize, order: usize) -> Vec<Var> {
    let mut out: Vec<Var> = (0..node).map(|j| Var::new(j, 0)).collect();
    for lag in 1..=order {
        out.extend((0..num_vars).map(|j| Var::new(j, lag)));
    }
    out.sort();
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Penalised structure score: log-likelihood minus `(½·ln n + ε)` per parent.
pub fn structure_score(fit: &NodeFit, num_parents: usize, epsilon: f64) -> f64 {
    fit.loglik - num_parents as f64 * (0.5 * (fit.instants as f64).ln() + epsilon)
}

fn fit_with_retry(
    series: &BowTimeSeries,
    node: Var,
    parents: &[Var],
    first: usize,
) -> Result<NodeFit> {
    match fit_node_from(series, node, parents, first, 0.0) {
        Err(Error::Singular { .. }) => fit_node_from(series, node, parents, first, RIDGE),
        r => r,
    }
}

fn combinations(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Learns a parent set per candidate word. Small parent spaces are searched
/// exhaustively; otherwise parents are added greedily while the score
/// improves by more than ε. Ties prefer fewer parents, then the
/// lexicographically smaller set.
pub fn learn_structure(
    series: &BowTimeSeries,
    candidates: &[String],
    config: &StructureConfig,
) -> Result<GaussianNet> {
    if candidates.is_empty() {
        return Err(Error::Empty("candidate set"));
    }
    let index: HashMap<&str, usize> = series
        .vocab
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let rows = candidates
        .iter()
        .map(|c| {
            index
                .get(c.as_str())
                .map(|&i| series.matrix[i].clone())
                .ok_or_else(|| {
                    Error::InvalidArgument(format!("candidate `{c}` not in series vocabulary"))
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let sub = BowTimeSeries::from_rows(candidates.to_vec(), rows)?;
    let first = config.order;
    let available = sub.num_instants().saturating_sub(first);
    if available < config.max_parents + 2 {
        return Err(Error::TooFewInstants {
            needed: first + config.max_parents + 2,
            available: sub.num_instants(),
        });
    }

    let n = candidates.len();
    let mut nodes = Vec::with_capacity(n);
    for i in 0..n {
        let node = Var::new(i, 0);
        let pool = candidate_parents(i, n, config.order);
        let max_k = config.max_parents.min(pool.len());
        let space: usize = (0..=max_k).map(|k| binomial(pool.len(), k)).sum();

        let empty = fit_with_retry(&sub, node, &[], first)?;
        let mut best = (
            structure_score(&empty, 0, config.epsilon),
            Vec::new(),
            empty,
        );
        if space <= EXHAUSTIVE_LIMIT {
            for k in 1..=max_k {
                let mut err = None;
                combinations(pool.len(), k, |idx| {
                    if err.is_some() {
                        return;
                    }
                    let parents: Vec<Var> = idx.iter().map(|&j| pool[j]).collect();
                    match fit_with_retry(&sub, node, &parents, first) {
                        Ok(fit) => {
                            let s = structure_score(&fit, k, config.epsilon);
                            if s > best.0 {
                                best = (s, parents, fit);
                            }
                        }
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
            }
        } else {
            while best.1.len() < max_k {
                let mut step: Option<(f64, Vec<Var>, NodeFit)> = None;
                for &p in &pool {
                    if best.1.contains(&p) {
                        continue;
                    }
                    let mut parents = best.1.clone();
                    parents.push(p);
                    parents.sort();
                    let fit = fit_with_retry(&sub, node, &parents, first)?;
                    let s = structure_score(&fit, parents.len(), config.epsilon);
                    if step.as_ref().is_none_or(|b| s > b.0) {
                        step = Some((s, parents, fit));
                    }
                }
                match step {
                    Some(s) if s.0 > best.0 => best = s,
                    _ => break,
                }
            }
        }
        let (score, parents, fit) = best;
        nodes.push(GbnNode {
            word: i,
            parents,
            fit,
            score,
        });
    }
    Ok(GaussianNet {
        vars: candidates.to_vec(),
        order: config.order,
        nodes,
    })
}

impl GaussianNet {
    /// Tab-separated table, one node per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("gbn\t{}\t{}\n", self.order, self.vars.len());
        for (i, w) in self.vars.iter().enumerate() {
            let _ = writeln!(out, "var\t{i}\t{w}");
        }
        for node in &self.nodes {
            let parents = if node.parents.is_empty() {
                "-".to_string()
            } else {
                node.parents
                    .iter()
                    .map(|p| format!("{}@{}", p.word, p.lag))
                    .collect::<Vec<_>>()
                    .join(",")
            };
            let f = &node.fit;
            let _ = writeln!(
                out,
                "node\t{}\t{}\t{}\t{}\t{:?}\t{:?}\t{}\t{:?}\t{:?}\t{}",
                node.word,
                parents,
                join_floats(&f.beta),
                join_floats(&f.parent_means),
                f.cond_var,
                f.mean,
                f.instants,
                f.loglik,
                node.score,
                self.vars[node.word],
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let bad = |line: usize, m: &str| Error::Parse {
            line: line + 1,
            message: m.to_string(),
        };
        let (l0, header) = lines.next().ok_or(Error::Empty("network file"))?;
        let h: Vec<&str> = header.split('\t').collect();
        if h.len() != 3 || h[0] != "gbn" {
            return Err(bad(l0, "expected `gbn<TAB>order<TAB>vars` header"));
        }
        let order: usize = h[1].parse().map_err(|_| bad(l0, "bad order"))?;
        let nvars: usize = h[2].parse().map_err(|_| bad(l0, "bad variable count"))?;
        let mut vars = Vec::with_capacity(nvars);
        let mut nodes = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            match f[0] {
                "var" if f.len() == 3 => vars.push(f[2].to_string()),
                "node" if f.len() == 11 => {
                    let num = |s: &str| s.parse::<f64>().map_err(|_| bad(ln, "bad number"));
                    let floats = |s: &str| -> Result<Vec<f64>> {
                        s.split_whitespace()
                            .map(|v| v.parse::<f64>().map_err(|_| bad(ln, "bad number")))
                            .collect()
                    };
                    let word: usize = f[1].parse().map_err(|_| bad(ln, "bad node index"))?;
                    let parents = if f[2] == "-" {
                        Vec::new()
                    } else {
                        f[2].split(',')
                            .map(|p| {
                                let (w, l) =
                                    p.split_once('@').ok_or_else(|| bad(ln, "bad parent"))?;
                                Ok(Var::new(
                                    w.parse().map_err(|_| bad(ln, "bad parent"))?,
                                    l.parse().map_err(|_| bad(ln, "bad parent"))?,
                                ))
                            })
                            .collect::<Result<Vec<_>>>()?
                    };
                    let fit = NodeFit {
                        beta: floats(f[3])?,
                        parent_means: floats(f[4])?,
                        cond_var: num(f[5])?,
                        mean: num(f[6])?,
                        instants: f[7].parse().map_err(|_| bad(ln, "bad instant count"))?,
                        loglik: num(f[8])?,
                    };
                    if fit.beta.len() != parents.len() || fit.parent_means.len() != parents.len() {
                        return Err(bad(ln, "coefficient count differs from parent count"));
                    }
                    nodes.push(GbnNode {
                        word,
                        parents,
                        fit,
                        score: num(f[9])?,
                    });
                }
                _ => return Err(bad(ln, "unrecognised line")),
            }
        }
        if vars.len() != nvars {
            return Err(Error::Format(format!(
                "header promises {nvars} variables, found {}",
                vars.len()
            )));
        }
        if nodes
            .iter()
            .any(|n| n.word >= nvars || n.parents.iter().any(|p| p.word >= nvars || p.lag > order))
        {
            return Err(Error::Format(
                "node refers to unknown variable or lag".into(),
            ));
        }
        Ok(Self { vars, order, nodes })
    }
}

fn join_floats(v: &[f64]) -> String {
    v.iter()
        .map(|x| format!("{x:?}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// One high-likelihood node turned into a convolution kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Motif {
    pub node: usize,
    /// Log-likelihood per instant.
    pub score: f64,
    /// `(order + 1) × vars` weights: row = lag, column = word. The node's
    /// own cell at lag 0 has weight 1 and each parent cell holds its
    /// regression coefficient.
    pub kernel: Matrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MotifSet {
    pub vars: Vec<String>,
    pub order: usize,
    pub threshold: f64,
    pub motifs: Vec<Motif>,
}

impl MotifSet {
    /// A set with no motifs, which selects no pre-training data.
    pub fn empty() -> Self {
        Self {
            vars: Vec::new(),
            order: 0,
            threshold: f64::INFINITY,
            motifs: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.motifs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motifs.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "motifs\t{}\t{}\t{:?}\n",
            self.order,
            self.vars.len(),
            self.threshold
        );
        for w in &self.vars {
            let _ = writeln!(out, "var\t{w}");
        }
        for m in &self.motifs {
            let _ = writeln!(
                out,
                "motif\t{}\t{:?}\t{}",
                m.node,
                m.score,
                join_floats(m.kernel.as_slice())
            );
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, m: &str| Error::Parse {
            line: line + 1,
            message: m.to_string(),
        };
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (l0, header) = lines.next().ok_or(Error::Empty("motif file"))?;
        let h: Vec<&str> = header.split('\t').collect();
        if h.len() != 4 || h[0] != "motifs" {
            return Err(bad(l0, "expected motif header"));
        }
        let order: usize = h[1].parse().map_err(|_| bad(l0, "bad order"))?;
        let nvars: usize = h[2].parse().map_err(|_| bad(l0, "bad variable count"))?;
        let threshold: f64 = h[3].parse().map_err(|_| bad(l0, "bad threshold"))?;
        let mut vars = Vec::new();
        let mut motifs = Vec::new();
        for (ln, line) in lines {
            let f: Vec<&str> = line.split('\t').collect();
            match (f[0], f.len()) {
                ("var", 2) => vars.push(f[1].to_string()),
                ("motif", 4) => {
                    let w: Vec<f64> = f[3]
                        .split_whitespace()
                        .map(|v| v.parse().map_err(|_| bad(ln, "bad weight")))
                        .collect::<Result<_>>()?;
                    motifs.push(Motif {
                        node: f[1].parse().map_err(|_| bad(ln, "bad node"))?,
                        score: f[2].parse().map_err(|_| bad(ln, "bad score"))?,
                        kernel: Matrix::from_vec(order + 1, nvars, w)
                            .map_err(|_| bad(ln, "kernel size"))?,
                    });
                }
                _ => return Err(bad(ln, "unrecognised line")),
            }
        }
        if vars.len() != nvars {
            return Err(Error::Format(format!(
                "header promises {nvars} variables, found {}",
                vars.len()
            )));
        }
        Ok(Self {
            vars,
            order,
            threshold,
            motifs,
        })
    }
}

/// Keeps nodes whose per-instant log-likelihood is at least `tau`, best
/// first; equal scores keep node order.
pub fn extract_motifs(net: &GaussianNet, tau: f64) -> MotifSet {
    let nv = net.vars.len();
    let mut motifs: Vec<Motif> = net
        .nodes
        .iter()
        .filter_map(|node| {
            let score = node.fit.loglik / node.fit.instants.max(1) as f64;
            if !(score >= tau) {
                return None;
            }
            let mut kernel = Matrix::zeros(net.order + 1, nv);
            kernel.set(0, node.word, 1.0);
            for (p, b) in node.parents.iter().zip(&node.fit.beta) {
                let v = kernel.get(p.lag, p.word) + b;
                kernel.set(p.lag, p.word, v);
            }
            Some(Motif {
                node: node.word,
                score,
                kernel,
            })
        })
        .collect();
    motifs.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.node.cmp(&b.node)));
    MotifSet {
        vars: net.vars.clone(),
        order: net.order,
        threshold: tau,
        motifs,
    }
}

/// Sentences kept for pre-training: `(index into the input, weight)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FilteredSet {
    pub entries: Vec<(usize, usize)>,
}

impl FilteredSet {
    /// Total multiplicity.
    pub fn total(&self) -> usize {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Repeats each kept sentence `weight` times.
    pub fn expand<'a>(&self, sentences: &'a [Sentence]) -> Vec<&'a Sentence> {
        self.entries
            .iter()
            .flat_map(|&(i, w)| std::iter::repeat_n(&sentences[i], w))
            .collect()
    }
}

fn patterns(vars: &[String]) -> Vec<Vec<String>> {
    vars.iter()
        .map(|v| v.split_whitespace().map(str::to_lowercase).collect())
        .collect()
}

fn bow(words: &[String], pats: &[Vec<String>]) -> Vec<f64> {
    pats.iter()
        .map(|p| count_occurrences(words, p) as f64)
        .collect()
}

/// Convolution responses of one motif at every window position of one
/// sentence. Lag-0 counts come from the `width` tokens under the window;
/// lag-ℓ counts are the whole bag of words of the sentence ℓ positions
/// earlier in the same document, or zero if it is not among `sentences`.
pub fn motif_responses(
    sentences: &[Sentence],
    motifs: &MotifSet,
    width: usize,
) -> Vec<Vec<Vec<f64>>> {
    let pats = patterns(&motifs.vars);
    let by_pos: HashMap<(&str, usize), usize> = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.doc_id.as_str(), s.position), i))
        .collect();
    let lowered: Vec<Vec<String>> = sentences
        .iter()
        .map(|s| s.tokens.iter().map(Token::lower).collect())
        .collect();
    let width = width.max(1);

    sentences
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let lagged: Vec<Vec<f64>> = (1..=motifs.order)
                .map(|lag| {
                    s.position
                        .checked_sub(lag)
                        .and_then(|p| by_pos.get(&(s.doc_id.as_str(), p)))
                        .map_or_else(|| vec![0.0; pats.len()], |&j| bow(&lowered[j], &pats))
                })
                .collect();
            let words = &lowered[i];
            let starts = words.len().saturating_sub(width) + 1;
            let windows: Vec<Vec<f64>> = (0..starts)
                .map(|p| bow(&words[p..(p + width).min(words.len())], &pats))
                .collect();
            motifs
                .motifs
                .iter()
                .map(|m| {
                    windows
                        .iter()
                        .map(|x0| {
                            let mut r: f64 =
                                m.kernel.row(0).iter().zip(x0).map(|(a, b)| a * b).sum();
                            for (lag, x) in lagged.iter().enumerate() {
                                r += m
                                    .kernel
                                    .row(lag + 1)
                                    .iter()
                                    .zip(x)
                                    .map(|(a, b)| a * b)
                                    .sum::<f64>();
                            }
                            r
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// Weights each sentence by its number of motif hits. A hit is a window
/// position whose response exceeds the motif's cutoff: the mean plus one
/// standard deviation of its responses over all of `sentences`. Sentences
/// without hits are dropped.
pub fn filter_sentences(sentences: &[Sentence], motifs: &MotifSet, width: usize) -> FilteredSet {
    if motifs.is_empty() || sentences.is_empty() {
        return FilteredSet::default();
    }
    let resp = motif_responses(sentences, motifs, width);
    let cutoffs: Vec<f64> = (0..motifs.len())
        .map(|m| {
            let mut all: Vec<f64> = resp.iter().flat_map(|s| s[m].iter().copied()).collect();
            all.sort_by(f64::total_cmp);
            let n = all.len() as f64;
            let mu = all.iter().sum::<f64>() / n;
            let mut dev: Vec<f64> = all.iter().map(|v| (v - mu).powi(2)).collect();
            dev.sort_by(f64::total_cmp);
            mu + (dev.iter().sum::<f64>() / n).sqrt()
        })
        .collect();
    let entries = resp
        .iter()
        .enumerate()
        .filter_map(|(i, s)| {
            let hits: usize = s
                .iter()
                .zip(&cutoffs)
                .map(|(r, c)| r.iter().filter(|&&v| v > *c).count())
                .sum();
            (hits > 0).then_some((i, hits))
        })
        .collect();
    FilteredSet { entries }
}

/// The `k` lexicon entries occurring most often in `sentences` (phrases
/// matched as contiguous runs), most frequent first; ties alphabetical.
/// Entries that never occur are skipped.
pub fn select_clue_words(sentences: &[Sentence], lexicon: &Lexicon, k: usize) -> Vec<String> {
    let words = lexicon.words();
    let pats = patterns(&words);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in sentences {
        let lw: Vec<String> = s.tokens.iter().map(Token::lower).collect();
        for (w, p) in words.iter().zip(&pats) {
            *counts.entry(w).or_default() += count_occurrences(&lw, p);
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().filter(|e| e.1 > 0).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
    ranked
        .into_iter()
        .take(k)
        .map(|(w, _)| w.to_string())
        .collect()
}

/// Settings for [`mine_motifs`].
#[derive(Debug, Clone, PartialEq)]
pub struct MotifConfig {
    /// How many of the most frequent clue words become network variables.
    pub clue_words: usize,
    pub structure: StructureConfig,
    /// Minimum per-instant log-likelihood of a kept motif.
    pub tau: f64,
}

impl Default for MotifConfig {
    fn default() -> Self {
        Self {
            clue_words: 50,
            structure: StructureConfig::default(),
            tau: f64::NEG_INFINITY,
        }
    }
}

/// Clue-word selection, the bag-of-words series over `sentences` in order,
/// structure search and motif extraction.
pub fn mine_motifs(
    sentences: &[Sentence],
    clues: &Lexicon,
    config: &MotifConfig,
) -> Result<(GaussianNet, MotifSet)> {
    let words = select_clue_words(sentences, clues, config.clue_words);
    if words.is_empty() {
        return Err(Error::Empty("clue words occurring in the corpus"));
    }
    let series = build_bow_series(sentences, &words)?;
    let net = learn_structure(&series, &words, &config.structure)?;
    let motifs = extract_motifs(&net, config.tau);
    Ok((net, motifs))
}

/// Context-matrix language model used to initialise word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LblModel {
    pub dim: usize,
    pub window: usize,
    /// `context[k]` maps the word `k + 1` positions back.
    pub context: Vec<Matrix>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LblConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub init_scale: f64,
    pub seed: u64,
}

impl Default for LblConfig {
    fn default() -> Self {
        Self {
            dim: 30,
            window: 5,
            epochs: 10,
            learning_rate: 0.05,
            init_scale: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LblResult {
    pub embeddings: EmbeddingTable,
    pub model: LblModel,
    /// Mean squared prediction error per epoch.
    pub losses: Vec<f64>,
}

/// Learns word vectors by predicting each word's vector from the preceding
/// `window` words through per-offset context matrices. The target vector
/// is held fixed during each step; context matrices and context vectors
/// descend the squared error.
pub fn lbl_init(sentences: &[Sentence], config: &LblConfig) -> Result<LblResult> {
    if config.dim == 0 || config.window == 0 {
        return Err(Error::InvalidArgument(
            "dimension and window must be at least 1".into(),
        ));
    }
    let d = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut vocab: BTreeMap<String, usize> = BTreeMap::new();
    let ids: Vec<Vec<usize>> = sentences
        .iter()
        .map(|s| {
            s.tokens
                .iter()
                .map(|t| {
                    let n = vocab.len();
                    *vocab.entry(t.lower()).or_insert(n)
                })
                .collect()
        })
        .collect();
    let mut order: Vec<(&String, &usize)> = vocab.iter().collect();
    order.sort_by_key(|e| *e.1);
    let s = config.init_scale;
    let mut vecs: Vec<Vec<f64>> = (0..vocab.len())
        .map(|_| (0..d).map(|_| rng.random_range(-s..=s)).collect())
        .collect();
    let mut context: Vec<Matrix> = (0..config.window)
        .map(|_| {
            let v = (0..d * d)
                .map(|_| rng.random_range(-s..=s) / d as f64)
                .collect();
            Matrix::from_vec(d, d, v).unwrap()
        })
        .collect();

    let lr = config.learning_rate;
    let mut losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let mut total = 0.0;
        let mut count = 0usize;
        for sent in &ids {
            for i in 1..sent.len() {
                let reach = config.window.min(i);
                let mut err = vec![0.0; d];
                for k in 0..reach {
                    let x = &vecs[sent[i - k - 1]];
                    let c = &context[k];
                    for r in 0..d {
                        err[r] += c.row(r).iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
                for r in 0..d {
                    err[r] -= vecs[sent[i]][r];
                }
                total += 0.5 * err.iter().map(|e| e * e).sum::<f64>();
                count += 1;
                for k in 0..reach {
                    let w = sent[i - k - 1];
                    let x = vecs[w].clone();
                    let c = &mut context[k];
                    let mut gx = vec![0.0; d];
                    for r in 0..d {
                        let row = c.row_mut(r);
                        for q in 0..d {
                            gx[q] += row[q] * err[r];
                            row[q] -= lr * err[r] * x[q];
                        }
                    }
                    for q in 0..d {
                        vecs[w][q] -= lr * gx[q];
                    }
                }
            }
        }
        losses.push(if count == 0 {
            0.0
        } else {
            total / count as f64
        });
    }

    let mut embeddings = EmbeddingTable::new(d, UnkPolicy::Zero);
    for (word, &id) in order {
        embeddings.insert(word.clone(), vecs[id].clone())?;
    }
    Ok(LblResult {
        embeddings,
        model: LblModel {
            dim: d,
            window: config.window,
            context,
        },
        losses,
    })
}
