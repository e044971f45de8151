//! `sentask`: train and apply the aspect tagger and the subjectivity
//! classifier, score their output and generate the toy fixtures.

mod settings;

use std::collections::BTreeSet;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sentiment_tasks::cdbn::{
    accuracy, format_labeled, parse_labeled, train_subjectivity, LabeledSentence, PretrainConfig,
    SubjConfig, SubjectivityModel,
};
use sentiment_tasks::corpus::{
    format_corpus, format_embeddings, format_lexicon, format_tagged, iob2_decode, iob2_encode,
    load_embeddings, load_lexicon, parse_corpus, AspectSpan, Document, EmbeddingTable, LexiconKind,
    PosMap, Sentence, UnkPolicy,
};
use sentiment_tasks::eval::{
    classification_report, kfold, prf_table, span_prf_filtered, SpanFilter,
};
use sentiment_tasks::gbn::{mine_motifs, LblConfig, MotifConfig, MotifSet, StructureConfig};
use sentiment_tasks::rules::{self, parse_rule_set, RuleConfig};
use sentiment_tasks::tagger::{train_tagger, TaggerConfig, TaggerModel, TrainConfig};
use sentiment_tasks::toy;

use settings::Settings;

#[derive(Parser)]
#[command(
    name = "sentask",
    version,
    about = "Aspect extraction and subjectivity detection"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// `key = value` file; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the convolutional aspect tagger on an IOB2-tagged parsed corpus
    TrainTagger(TrainTaggerArgs),
    /// Tag a parsed corpus with the tagger, the rules or both
    Tag(TagArgs),
    /// Score predicted aspect spans against gold
    EvalAspect(EvalArgs),
    /// Train the subjectivity classifier (motif mining, pre-training, fine-tuning)
    TrainSubj(TrainSubjArgs),
    /// Label sentences as subjective or objective
    ClassifySubj(ClassifyArgs),
    /// Learn the clue-word Bayesian network and its motifs
    LearnGbn(LearnGbnArgs),
    /// Write the deterministic toy fixtures
    GenToy(GenToyArgs),
}

#[derive(Args)]
struct TrainTaggerArgs {
    #[command(flatten)]
    common: Common,
    /// Parsed corpus with gold tags
    #[arg(long)]
    train: Option<PathBuf>,
    /// `word v1 ... vd` lines; without it every word falls back to the unknown-word policy
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    unk: Option<UnkArg>,
    /// `TAG<TAB>class` lines mapping the corpus POS tags
    #[arg(long)]
    pos_map: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    dropout_keep: Option<f64>,
    /// Max L2 norm of output weight rows; 0 disables clipping
    #[arg(long)]
    max_norm: Option<f64>,
    #[arg(long)]
    conv1_maps: Option<usize>,
    #[arg(long)]
    conv1_width: Option<usize>,
    #[arg(long)]
    conv2_maps: Option<usize>,
    #[arg(long)]
    conv2_width: Option<usize>,
    #[arg(long)]
    pool_size: Option<usize>,
    #[arg(long)]
    pool_stride: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    /// Forbid O -> I-A and a leading I-A during decoding
    #[arg(long)]
    hard_constraints: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnkArg {
    Hash,
    Zero,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Cnn,
    Lp,
    #[value(name = "cnn+lp")]
    CnnLp,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Mode as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args)]
struct TagArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Comma-separated rule ids (1, 2.1, 2.2, 3, 4, 5), `all` or `none`
    #[arg(long)]
    rules: Option<String>,
    /// Sentiment lexicon for the rules (default: bundled starter list)
    #[arg(long)]
    lexicon: Option<PathBuf>,
    #[arg(long)]
    stop_words: Option<PathBuf>,
    /// `from<TAB>to` dependency-label aliases
    #[arg(long)]
    aliases: Option<PathBuf>,
    #[arg(long)]
    pos_map: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long)]
    pred: Option<PathBuf>,
    /// Score only spans of two or more tokens
    #[arg(long)]
    phrases_only: bool,
}

#[derive(Args, Clone, Default)]
struct MotifArgs {
    /// Subjectivity clue lexicon (`word<TAB>pos` lines)
    #[arg(long)]
    clues: Option<PathBuf>,
    #[arg(long)]
    clue_words: Option<usize>,
    /// Markov order of the network
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    max_parents: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Minimum per-instant log-likelihood of a kept motif
    #[arg(long, allow_hyphen_values = true)]
    tau: Option<f64>,
}

#[derive(Args)]
struct TrainSubjArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    motif: MotifArgs,
    /// `label<TAB>sentence` lines
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Fixed word vectors; without them vectors are learned from the corpus
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    embedding_dim: Option<usize>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    maps: Option<usize>,
    /// Comma-separated convolution widths
    #[arg(long)]
    widths: Option<String>,
    #[arg(long)]
    pool: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    #[arg(long)]
    pretrain_learning_rate: Option<f64>,
    #[arg(long)]
    motif_width: Option<usize>,
    #[arg(long)]
    lbl_window: Option<usize>,
    #[arg(long)]
    lbl_epochs: Option<usize>,
    #[arg(long)]
    lbl_learning_rate: Option<f64>,
    /// Skip motif mining and pre-training
    #[arg(long)]
    skip_pretrain: bool,
    /// Report k-fold cross-validated accuracy before training the final model
    #[arg(long)]
    folds: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    model: Option<PathBuf>,
    /// One sentence per line, or `label<TAB>sentence` lines to also get a report
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args)]
struct LearnGbnArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    motif: MotifArgs,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Where to write the motifs (default: `<out>.motifs`)
    #[arg(long)]
    motifs: Option<PathBuf>,
}

#[derive(Args)]
struct GenToyArgs {
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sentask: error: {}", format!("{e:#}").replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::TrainTagger(a) => train_tagger_cmd(a),
        Command::Tag(a) => tag_cmd(a),
        Command::EvalAspect(a) => eval_cmd(a),
        Command::TrainSubj(a) => train_subj_cmd(a),
        Command::ClassifySubj(a) => classify_cmd(a),
        Command::LearnGbn(a) => learn_gbn_cmd(a),
        Command::GenToy(a) => gen_toy_cmd(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes to `out` when given, else to standard output.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_docs(path: &Path, pos_map: &Option<PathBuf>) -> Result<Vec<Document>> {
    let map = match pos_map {
        Some(p) => PosMap::load(p)?,
        None => PosMap::default(),
    };
    parse_corpus(&read(path)?, &map).with_context(|| format!("corpus {}", path.display()))
}

fn sentences(docs: &[Document]) -> Vec<Sentence> {
    docs.iter()
        .flat_map(|d| d.sentences.iter().cloned())
        .collect()
}

fn train_tagger_cmd(a: TrainTaggerArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let train_path = s.require_path("train", a.train)?;
    let embeddings = s.path("embeddings", a.embeddings)?;
    let pos_map = s.path("pos-map", a.pos_map)?;
    let seed = s.get("seed", a.common.seed, 0)?;
    let unk = match s
        .get(
            "unk",
            a.unk.map(|u| {
                if matches!(u, UnkArg::Zero) {
                    "zero"
                } else {
                    "hash"
                }
                .to_string()
            }),
            "hash".into(),
        )?
        .as_str()
    {
        "hash" => UnkPolicy::SeededHash { seed },
        "zero" => UnkPolicy::Zero,
        other => bail!("unknown unk policy `{other}` (hash or zero)"),
    };
    let d = TaggerConfig::default();
    let dim = s.get("dim", a.dim, d.embedding_dim)?;
    let arch = TaggerConfig {
        embedding_dim: dim,
        conv1_maps: s.get("conv1-maps", a.conv1_maps, d.conv1_maps)?,
        conv1_width: s.get("conv1-width", a.conv1_width, d.conv1_width)?,
        conv2_maps: s.get("conv2-maps", a.conv2_maps, d.conv2_maps)?,
        conv2_width: s.get("conv2-width", a.conv2_width, d.conv2_width)?,
        pool_size: s.get("pool-size", a.pool_size, d.pool_size)?,
        pool_stride: s.get("pool-stride", a.pool_stride, d.pool_stride)?,
        hard_constraints: s.flag("hard-constraints", a.hard_constraints)?,
        init_scale: s.get("init-scale", a.init_scale, d.init_scale)?,
    };
    let t = TrainConfig::default();
    let max_norm = s.get("max-norm", a.max_norm, t.l2_max.unwrap_or(0.0))?;
    let train = TrainConfig {
        learning_rate: s.get("learning-rate", a.learning_rate, t.learning_rate)?,
        epochs: s.get("epochs", a.epochs, t.epochs)?,
        dropout_keep: s.get("dropout-keep", a.dropout_keep, t.dropout_keep)?,
        seed,
        l2_max: (max_norm > 0.0).then_some(max_norm),
    };
    let out = s.require_path("out", a.common.out)?;
    s.finish()?;

    let table = match &embeddings {
        Some(p) => load_embeddings(p, dim, unk)?,
        None => EmbeddingTable::new(dim, unk),
    };
    let data = sentences(&load_docs(&train_path, &pos_map)?);
    let run = train_tagger(&data, &table, &arch, &train)?;
    for (i, loss) in run.epoch_losses.iter().enumerate() {
        println!("epoch={} loss={loss:.6}", i + 1);
    }
    write(&out, &run.model.to_text())?;
    println!("model={}", out.display());
    Ok(())
}

fn rule_config(s: &Settings, a: &TagArgs) -> Result<RuleConfig> {
    let mut cfg = RuleConfig::starter();
    if let Some(p) = s.path("lexicon", a.lexicon.clone())? {
        cfg.sentiment_lexicon = load_lexicon(&p, LexiconKind::SentimentConcepts)?;
    }
    if let Some(p) = s.path("stop-words", a.stop_words.clone())? {
        cfg.stop_words = load_lexicon(&p, LexiconKind::StopWords)?;
    }
    if let Some(p) = s.path("aliases", a.aliases.clone())? {
        cfg.load_aliases(&read(&p)?)
            .with_context(|| format!("aliases {}", p.display()))?;
    }
    cfg.enabled = parse_rule_set(&s.get("rules", a.rules.clone(), "all".into())?)?;
    Ok(cfg)
}

fn tag_cmd(a: TagArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let mode = s.get("mode", a.mode, Mode::Cnn)?;
    let input = s.require_path("input", a.input.clone())?;
    let pos_map = s.path("pos-map", a.pos_map.clone())?;
    let model_path = s.path("model", a.model.clone())?;
    let embeddings = s.path("embeddings", a.embeddings.clone())?;
    let rules_cfg = rule_config(&s, &a)?;
    let _ = s.opt::<u64>("seed", a.common.seed)?;
    let out = s.path("out", a.common.out.clone())?;
    s.finish()?;

    let docs = load_docs(&input, &pos_map)?;
    let all = sentences(&docs);
    let scorer = match mode {
        Mode::Lp => None,
        _ => {
            let path = model_path.ok_or_else(|| anyhow!("mode needs --model"))?;
            let model = TaggerModel::from_text(&read(&path)?)
                .with_context(|| format!("model {}", path.display()))?;
            let table = match &embeddings {
                Some(p) => load_embeddings(p, model.embedding_dim, model.unk_policy)?,
                None => EmbeddingTable::new(model.embedding_dim, model.unk_policy),
            };
            Some((model, table))
        }
    };
    if mode != Mode::Cnn {
        if let Some((i, bad)) = all
            .iter()
            .enumerate()
            .find(|(_, s)| !s.is_empty() && !s.has_dependencies())
        {
            bail!("sentence {} (`{}`) has no dependency parse; rule modes need head and deprel columns", i + 1, bad.text());
        }
    }
    let mut tags = Vec::with_capacity(all.len());
    for sentence in &all {
        let cnn = match &scorer {
            Some((m, table)) => m.tag(sentence, table)?.1,
            None => BTreeSet::new(),
        };
        let spans: BTreeSet<AspectSpan> = match mode {
            Mode::Cnn => cnn,
            Mode::Lp => rules::extract(sentence, &rules_cfg),
            Mode::CnnLp => rules::ensemble(
                &cnn,
                &rules::apply_rules(sentence, &rules_cfg),
                sentence,
                &rules_cfg,
            ),
        };
        tags.push(iob2_encode(&spans, sentence.len())?);
    }
    emit(out.as_deref(), &format_tagged(&docs, &tags))
}

fn eval_cmd(a: EvalArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let gold_path = s.require_path("gold", a.gold)?;
    let pred_path = s.require_path("pred", a.pred)?;
    let filter = if s.flag("phrases-only", a.phrases_only)? {
        SpanFilter::PhrasesOnly
    } else {
        SpanFilter::All
    };
    let out = s.path("out", a.common.out)?;
    s.finish()?;

    let gold = sentences(&load_docs(&gold_path, &None)?);
    let pred = sentences(&load_docs(&pred_path, &None)?);
    if gold.len() != pred.len() {
        bail!(
            "gold has {} sentences, prediction {}",
            gold.len(),
            pred.len()
        );
    }
    let mut g = Vec::with_capacity(gold.len());
    let mut p = Vec::with_capacity(pred.len());
    for (i, (gs, ps)) in gold.iter().zip(&pred).enumerate() {
        if gs.len() != ps.len() {
            bail!(
                "sentence {}: gold has {} tokens, prediction {}",
                i + 1,
                gs.len(),
                ps.len()
            );
        }
        let spans = |s: &Sentence, which: &str| {
            s.gold_tags().map(|t| iob2_decode(&t)).ok_or_else(|| {
                anyhow!("sentence {} of the {which} file has untagged tokens", i + 1)
            })
        };
        g.push(spans(gs, "gold")?);
        p.push(spans(ps, "prediction")?);
    }
    let report = span_prf_filtered(&g, &p, filter)?;
    let name = if filter == SpanFilter::PhrasesOnly {
        "phrases"
    } else {
        "aspects"
    };
    let text = format!("{}{}", prf_table(&[(name, report)]), report.to_kv(name));
    print!("{text}");
    if let Some(out) = out {
        write(&out, &text)?;
    }
    Ok(())
}

fn motif_config(s: &Settings, a: &MotifArgs) -> Result<MotifConfig> {
    let d = MotifConfig::default();
    Ok(MotifConfig {
        clue_words: s.get("clue-words", a.clue_words, d.clue_words)?,
        structure: StructureConfig {
            order: s.get("order", a.order, d.structure.order)?,
            max_parents: s.get("max-parents", a.max_parents, d.structure.max_parents)?,
            epsilon: s.get("epsilon", a.epsilon, d.structure.epsilon)?,
        },
        tau: s.get("tau", a.tau, d.tau)?,
    })
}

fn load_clues(s: &Settings, a: &MotifArgs) -> Result<sentiment_tasks::corpus::Lexicon> {
    let path = s
        .path("clues", a.clues.clone())?
        .ok_or_else(|| anyhow!("missing --clues: a subjectivity clue lexicon is required"))?;
    Ok(load_lexicon(&path, LexiconKind::SubjectivityClues)?)
}

fn parse_widths(s: &str) -> Result<Vec<usize>> {
    s.split(',')
        .map(|w| {
            w.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad width `{w}` in `{s}`"))
        })
        .collect()
}

fn train_subj_cmd(a: TrainSubjArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let corpus_path = s.require_path("corpus", a.corpus.clone())?;
    let skip = s.flag("skip-pretrain", a.skip_pretrain)?;
    let clues = if skip {
        None
    } else {
        Some(load_clues(&s, &a.motif)?)
    };
    let motif_cfg = motif_config(&s, &a.motif)?;
    let seed = s.get("seed", a.common.seed, 0)?;
    let d = SubjConfig::default();
    let dim = s.get("embedding-dim", a.embedding_dim, d.embedding_dim)?;
    let embeddings = s.path("embeddings", a.embeddings.clone())?;
    let widths = match s.opt::<String>("widths", a.widths.clone())? {
        Some(w) => parse_widths(&w)?,
        None => d.widths.clone(),
    };
    let init_scale = s.opt("init-scale", a.init_scale)?;
    let config = SubjConfig {
        window: s.get("window", a.window, d.window)?,
        embedding_dim: dim,
        maps: s.get("maps", a.maps, d.maps)?,
        widths,
        pool: s.get("pool", a.pool, d.pool)?,
        init_scale: init_scale.or(d.init_scale),
        learning_rate: s.get("learning-rate", a.learning_rate, d.learning_rate)?,
        epochs: s.get("epochs", a.epochs, d.epochs)?,
        pretrain: PretrainConfig {
            epochs: s.get("pretrain-epochs", a.pretrain_epochs, d.pretrain.epochs)?,
            learning_rate: s.get(
                "pretrain-learning-rate",
                a.pretrain_learning_rate,
                d.pretrain.learning_rate,
            )?,
            seed,
        },
        motif_width: s.get("motif-width", a.motif_width, d.motif_width)?,
        lbl: LblConfig {
            window: s.get("lbl-window", a.lbl_window, d.lbl.window)?,
            epochs: s.get("lbl-epochs", a.lbl_epochs, d.lbl.epochs)?,
            learning_rate: s.get(
                "lbl-learning-rate",
                a.lbl_learning_rate,
                d.lbl.learning_rate,
            )?,
            ..d.lbl.clone()
        },
        seed,
    };
    let folds = s.opt::<usize>("folds", a.folds)?;
    let out = s.require_path("out", a.common.out.clone())?;
    s.finish()?;

    let corpus = parse_labeled(&read(&corpus_path)?)
        .with_context(|| format!("corpus {}", corpus_path.display()))?;
    let table = embeddings
        .as_deref()
        .map(|p| load_embeddings(p, dim, UnkPolicy::SeededHash { seed }))
        .transpose()?;
    let fit = |data: &[LabeledSentence]| -> Result<(
        Option<(String, String)>,
        sentiment_tasks::cdbn::TrainedSubjectivity,
    )> {
        let (artifacts, motifs) = match &clues {
            Some(lex) => {
                let sents: Vec<Sentence> = data.iter().map(|d| d.sentence.clone()).collect();
                let (net, motifs) = mine_motifs(&sents, lex, &motif_cfg)?;
                (Some((net.to_text(), motifs.to_text())), motifs)
            }
            None => (None, MotifSet::empty()),
        };
        Ok((
            artifacts,
            train_subjectivity(data, &motifs, table.clone(), &config)?,
        ))
    };

    if let Some(k) = folds {
        let mut accs = Vec::with_capacity(k);
        for (i, (train, test)) in kfold(&corpus, k, seed)?.into_iter().enumerate() {
            let acc = accuracy(&fit(&train)?.1.model, &test)?;
            println!("fold={} accuracy={acc:.6}", i + 1);
            accs.push(acc);
        }
        println!(
            "cv.folds={k}\ncv.mean_accuracy={:.6}",
            accs.iter().sum::<f64>() / k as f64
        );
    }

    let (artifacts, run) = fit(&corpus)?;
    println!("pretrain.sentences={}", run.pretrain_size);
    for (i, loss) in run.epoch_losses.iter().enumerate() {
        println!("epoch={} loss={loss:.6}", i + 1);
    }
    write(&out, &run.model.to_text())?;
    if let Some((net, motifs)) = artifacts {
        write(&with_suffix(&out, "gbn"), &net)?;
        write(&with_suffix(&out, "motifs"), &motifs)?;
    }
    println!("model={}", out.display());
    Ok(())
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

/// Labeled `label<TAB>sentence` input when every line has a tab, else one
/// plain sentence per line.
fn read_sentences(path: &Path) -> Result<(Vec<Sentence>, Option<Vec<LabeledSentence>>)> {
    let text = read(path)?;
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .collect();
    if !lines.is_empty() && lines.iter().all(|l| l.contains('\t')) {
        let data = parse_labeled(&text).with_context(|| format!("input {}", path.display()))?;
        return Ok((
            data.iter().map(|d| d.sentence.clone()).collect(),
            Some(data),
        ));
    }
    Ok((
        lines
            .iter()
            .enumerate()
            .map(|(i, l)| Sentence::from_text(l, "input", i))
            .collect(),
        None,
    ))
}

fn classify_cmd(a: ClassifyArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let model_path = s.require_path("model", a.model)?;
    let input = s.require_path("input", a.input)?;
    let _ = s.opt::<u64>("seed", a.common.seed)?;
    let out = s.path("out", a.common.out)?;
    s.finish()?;

    let model = SubjectivityModel::from_text(&read(&model_path)?)
        .with_context(|| format!("model {}", model_path.display()))?;
    let (sents, labeled) = read_sentences(&input)?;
    let mut lines = String::new();
    let mut pred = Vec::with_capacity(sents.len());
    for sentence in &sents {
        let (label, (ps, po)) = model.classify(sentence)?;
        lines.push_str(&format!(
            "{}\t{ps:.6}\t{po:.6}\t{}\n",
            label.as_str(),
            sentence.text()
        ));
        pred.push(label);
    }
    emit(out.as_deref(), &lines)?;
    if let Some(data) = labeled {
        let gold: Vec<_> = data.iter().map(|d| d.label).collect();
        let report = classification_report(&gold, &pred)?;
        print!("{}{}", report.to_table(), report.to_kv("subj"));
    }
    Ok(())
}

fn learn_gbn_cmd(a: LearnGbnArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let corpus = s.require_path("corpus", a.corpus)?;
    let clues = load_clues(&s, &a.motif)?;
    let cfg = motif_config(&s, &a.motif)?;
    let _ = s.opt::<u64>("seed", a.common.seed)?;
    let out = s.require_path("out", a.common.out)?;
    let motifs_path = s
        .path("motifs", a.motifs)?
        .unwrap_or_else(|| with_suffix(&out, "motifs"));
    s.finish()?;

    let (sents, _) = read_sentences(&corpus)?;
    let (net, motifs) = mine_motifs(&sents, &clues, &cfg)?;
    write(&out, &net.to_text())?;
    write(&motifs_path, &motifs.to_text())?;
    println!("nodes={} motifs={}", net.nodes.len(), motifs.len());
    println!(
        "network={}\nmotifs={}",
        out.display(),
        motifs_path.display()
    );
    Ok(())
}

fn gen_toy_cmd(a: GenToyArgs) -> Result<()> {
    let s = Settings::load(a.common.config.as_deref())?;
    let dir = s.require_path("out", a.common.out)?;
    let _ = s.opt::<u64>("seed", a.common.seed)?;
    s.finish()?;
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let fx = toy::tagger_fixture();
    let rule_sents: Vec<Sentence> = toy::rule_examples().into_iter().map(|(s, _)| s).collect();
    let (arch, train) = toy::toy_tagger_configs(0);
    let (subj, motif) = toy::toy_subj_configs(0);
    let tagger_conf = format!(
        "dim = {}\nconv1-maps = {}\nconv2-maps = {}\ninit-scale = {}\nepochs = {}\nlearning-rate = {}\ndropout-keep = {}\n",
        arch.embedding_dim, arch.conv1_maps, arch.conv2_maps, arch.init_scale, train.epochs, train.learning_rate, train.dropout_keep
    );
    let widths: Vec<String> = subj.widths.iter().map(usize::to_string).collect();
    let subj_conf = format!(
        "window = {}\nembedding-dim = {}\nmaps = {}\nwidths = {}\nepochs = {}\nlearning-rate = {}\npretrain-epochs = {}\n\
         pretrain-learning-rate = {}\nlbl-epochs = {}\nclue-words = {}\norder = {}\nmax-parents = {}\n",
        subj.window,
        subj.embedding_dim,
        subj.maps,
        widths.join(","),
        subj.epochs,
        subj.learning_rate,
        subj.pretrain.epochs,
        subj.pretrain.learning_rate,
        subj.lbl.epochs,
        motif.clue_words,
        motif.structure.order,
        motif.structure.max_parents,
    );
    let files: Vec<(&str, String)> = vec![
        (
            "tagger_train.tsv",
            format_corpus(&[toy::as_document("train", &fx.train)], None),
        ),
        (
            "tagger_test.tsv",
            format_corpus(&[toy::as_document("test", &fx.test)], None),
        ),
        ("embeddings.txt", format_embeddings(&fx.embeddings)),
        ("tagger.conf", tagger_conf),
        (
            "rules.tsv",
            format_corpus(&[toy::as_document("rules", &rule_sents)], None),
        ),
        (
            "iob2_example.tsv",
            format_corpus(&[toy::as_document("iob2", &[toy::iob2_example()])], None),
        ),
        ("subj.txt", format_labeled(&toy::subjectivity_fixture())),
        ("clues.txt", format_lexicon(&toy::clue_lexicon())),
        ("subj.conf", subj_conf),
        (
            "sentiment_lexicon.txt",
            rules::STARTER_SENTIMENT_LEXICON.to_string(),
        ),
        ("stop_words.txt", rules::STARTER_STOP_WORDS.to_string()),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        write(&path, &text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
