//! Deterministic fixtures that exercise every pipeline without external
//! data: a tagging corpus whose aspect is the sentence's only noun, the
//! rule examples as hand-built parses and a separable subjectivity corpus.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cdbn::{LabeledSentence, PretrainConfig, SubjConfig, SubjLabel};
use crate::corpus::{
    Document, EmbeddingTable, IobTag, Lexicon, LexiconKind, Pos, Sentence, Token, UnkPolicy,
};
use crate::gbn::{LblConfig, MotifConfig, StructureConfig};
use crate::tagger::{TaggerConfig, TrainConfig};

const TRAIN_NOUNS: [&str; 10] = [
    "screen", "battery", "keyboard", "camera", "lens", "speaker", "charger", "display", "touchpad",
    "case",
];
const TEST_NOUNS: [&str; 10] = [
    "fan",
    "port",
    "mouse",
    "cable",
    "hinge",
    "memory",
    "processor",
    "webcam",
    "trackpad",
    "monitor",
];
const ADJECTIVES: [&str; 5] = ["nice", "great", "poor", "terrible", "excellent"];

/// `(surface, pos, head (1-based, 0 = root), deprel, tag)`
type Row<'a> = (&'a str, Pos, usize, &'a str, IobTag);

fn build(rows: &[Row], doc: &str, position: usize) -> Sentence {
    let tokens = rows
        .iter()
        .map(|&(w, pos, head, rel, tag)| Token {
            pos,
            head: head.checked_sub(1),
            deprel: rel.to_string(),
            tag: Some(tag),
            ..Token::word(w)
        })
        .collect();
    Sentence::new(tokens, doc, position)
}

/// One of five sentence frames around `noun`, parsed and tagged.
fn frame(k: usize, noun: &str, adj: &str, doc: &str, position: usize) -> Sentence {
    use IobTag::{B, O};
    use Pos::*;
    let rows: Vec<Row> = match k % 5 {
        0 => vec![
            ("the", Other, 2, "det", O),
            (noun, Noun, 4, "nsubj", B),
            ("is", Verb, 4, "cop", O),
            (adj, Adjective, 0, "root", O),
        ],
        1 => vec![
            ("i", Other, 2, "nsubj", O),
            ("like", Verb, 0, "root", O),
            ("the", Other, 4, "det", O),
            (noun, Noun, 2, "dobj", B),
        ],
        2 => vec![
            ("the", Other, 2, "det", O),
            (noun, Noun, 3, "nsubj", B),
            ("works", Verb, 0, "root", O),
            ("well", Adverb, 3, "advmod", O),
        ],
        3 => vec![
            ("a", Other, 3, "det", O),
            (adj, Adjective, 3, "amod", O),
            (noun, Noun, 0, "root", B),
            ("indeed", Adverb, 3, "advmod", O),
        ],
        _ => vec![
            ("we", Other, 2, "nsubj", O),
            ("returned", Verb, 0, "root", O),
            ("this", Other, 4, "det", O),
            (noun, Noun, 2, "dobj", B),
            ("quickly", Adverb, 2, "advmod", O),
        ],
    };
    build(&rows, doc, position)
}

#[derive(Debug, Clone)]
pub struct TaggerFixture {
    pub train: Vec<Sentence>,
    pub test: Vec<Sentence>,
    pub embeddings: EmbeddingTable,
}

pub const TOY_EMBEDDING_DIM: usize = 10;

/// Ten training and ten test sentences; the test nouns never occur in
/// training, so only the part of speech and context identify the aspect.
pub fn tagger_fixture() -> TaggerFixture {
    let make = |nouns: &[&str], doc: &str, shift: usize| {
        nouns
            .iter()
            .enumerate()
            .map(|(i, n)| {
                frame(
                    i + shift,
                    n,
                    ADJECTIVES[(i + shift) % ADJECTIVES.len()],
                    doc,
                    i,
                )
            })
            .collect::<Vec<_>>()
    };
    let train = make(&TRAIN_NOUNS, "train", 0);
    let test = make(&TEST_NOUNS, "test", 2);
    let mut words: Vec<String> = train
        .iter()
        .chain(&test)
        .flat_map(|s| s.tokens.iter().map(Token::lower))
        .collect();
    words.sort();
    words.dedup();
    TaggerFixture {
        embeddings: random_embeddings(&words, TOY_EMBEDDING_DIM, 0.1, 17),
        train,
        test,
    }
}

/// Scorer and optimiser settings sized for the toy fixture. Weights start
/// at ±0.1: at ±0.01 a network this narrow stays near the all-`O` solution
/// for the whole 30-epoch budget.
pub fn toy_tagger_configs(seed: u64) -> (TaggerConfig, TrainConfig) {
    let arch = TaggerConfig {
        embedding_dim: TOY_EMBEDDING_DIM,
        conv1_maps: 20,
        conv2_maps: 10,
        init_scale: 0.1,
        ..TaggerConfig::default()
    };
    let train = TrainConfig {
        seed,
        ..TrainConfig::default()
    };
    (arch, train)
}

/// Uniform vectors in `±scale` drawn in word order from a seeded stream.
pub fn random_embeddings(words: &[String], dim: usize, scale: f64, seed: u64) -> EmbeddingTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = EmbeddingTable::new(dim, UnkPolicy::SeededHash { seed });
    for w in words {
        let v = (0..dim).map(|_| rng.random_range(-scale..scale)).collect();
        table.insert(w.clone(), v).expect("dimension matches");
    }
    table
}

/// The rule examples with their expected aspects.
pub fn rule_examples() -> Vec<(Sentence, Vec<&'static str>)> {
    use IobTag::{B, I, O};
    use Pos::*;
    let doc = "rules";
    vec![
        (
            build(
                &[
                    ("The", Other, 2, "det", O),
                    ("battery", Noun, 3, "nsubj", B),
                    ("lasts", Verb, 0, "root", O),
                    ("little", Adverb, 3, "advmod", O),
                ],
                doc,
                0,
            ),
            vec!["battery"],
        ),
        (
            build(
                &[
                    ("The", Other, 2, "det", O),
                    ("camera", Noun, 4, "nsubj", B),
                    ("is", Verb, 4, "cop", O),
                    ("nice", Adjective, 0, "root", O),
                ],
                doc,
                1,
            ),
            vec!["camera"],
        ),
        (
            build(
                &[
                    ("I", Other, 2, "nsubj", O),
                    ("like", Verb, 0, "root", O),
                    ("the", Other, 4, "det", O),
                    ("lens", Noun, 2, "dobj", B),
                    ("of", Preposition, 7, "case", O),
                    ("this", Other, 7, "det", O),
                    ("camera", Noun, 4, "nmod", O),
                ],
                doc,
                2,
            ),
            vec!["lens"],
        ),
        (
            build(
                &[
                    ("The", Other, 3, "det", O),
                    ("battery", Noun, 3, "compound", B),
                    ("life", Noun, 5, "nsubj", I),
                    ("is", Verb, 5, "cop", O),
                    ("great", Adjective, 0, "root", O),
                ],
                doc,
                3,
            ),
            vec!["battery life"],
        ),
    ]
}

/// The annotated laptop-review tag sequence: seven aspects, one of them
/// the two-token "operating system".
pub fn iob2_example() -> Sentence {
    const TAGGED: &str = "also/O excellent/O operating/B-A system/I-A ,/O size/B-A and/O weight/B-A for/O optimal/O \
        mobility/B-A excellent/O durability/B-A of/O the/O battery/B-A the/O functions/O provided/O by/O the/O \
        trackpad/B-A is/O unmatched/O by/O any/O other/O brand/O";
    let tokens = TAGGED
        .split_whitespace()
        .map(|wt| {
            let (w, t) = wt.rsplit_once('/').expect("word/tag");
            Token {
                tag: Some(t.parse().expect("IOB2 tag")),
                ..Token::word(w)
            }
        })
        .collect();
    Sentence::new(tokens, "iob2", 0)
}

const SUBJ_FRAMES: [&str; 4] = [
    "i really love this {}",
    "i truly hate the {}",
    "what a wonderful {} indeed",
    "such an awful {} honestly",
];
const OBJ_FRAMES: [&str; 4] = [
    "the {} has two ports",
    "the {} was released in may",
    "this {} weighs one kilogram",
    "the {} ships with a cable",
];
const SUBJ_NOUNS: [&str; 10] = [
    "phone", "film", "song", "book", "laptop", "camera", "hotel", "meal", "show", "game",
];

/// Twenty subjective and twenty objective sentences over shared nouns,
/// alternating within five documents of eight sentences.
pub fn subjectivity_fixture() -> Vec<LabeledSentence> {
    let mut out = Vec::new();
    for i in 0..20 {
        let noun = SUBJ_NOUNS[i % SUBJ_NOUNS.len()];
        for (label, frames) in [
            (SubjLabel::Subjective, &SUBJ_FRAMES),
            (SubjLabel::Objective, &OBJ_FRAMES),
        ] {
            let k = out.len();
            let text = frames[(i + i / 4) % frames.len()].replace("{}", noun);
            out.push(LabeledSentence {
                sentence: Sentence::from_text(&text, format!("d{}", k / 8), k % 8),
                label,
            });
        }
    }
    out
}

pub fn clue_lexicon() -> Lexicon {
    Lexicon::from_words(
        LexiconKind::SubjectivityClues,
        ["love", "hate", "wonderful", "awful", "really", "truly"],
    )
}

/// Network and motif settings sized for the subjectivity fixture.
pub fn toy_subj_configs(seed: u64) -> (SubjConfig, MotifConfig) {
    let net = SubjConfig {
        window: 8,
        embedding_dim: 6,
        maps: 6,
        widths: vec![2, 2],
        epochs: 50,
        learning_rate: 0.2,
        pretrain: PretrainConfig {
            epochs: 3,
            learning_rate: 0.01,
            seed,
        },
        lbl: LblConfig {
            epochs: 5,
            ..LblConfig::default()
        },
        seed,
        ..SubjConfig::default()
    };
    let motifs = MotifConfig {
        clue_words: 6,
        structure: StructureConfig {
            order: 1,
            max_parents: 2,
            epsilon: 0.0,
        },
        tau: f64::NEG_INFINITY,
    };
    (net, motifs)
}

/// Wraps sentences as a single document for the corpus writer.
pub fn as_document(id: &str, sentences: &[Sentence]) -> Document {
    Document {
        id: id.to_string(),
        sentences: sentences.to_vec(),
    }
}
