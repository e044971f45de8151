//! Data model and ingestion: parsed sentences, IOB2 chunk codecs, embedding
//! tables, lexicons and bag-of-words time series.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Coarse part of speech: six open/closed classes plus a catch-all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pos {
    Noun,
    Verb,
    Adjective,
    Adverb,
    Preposition,
    Conjunction,
    Other,
}

impl Pos {
    pub const ALL: [Pos; 7] = [
        Pos::Noun,
        Pos::Verb,
        Pos::Adjective,
        Pos::Adverb,
        Pos::Preposition,
        Pos::Conjunction,
        Pos::Other,
    ];

    /// Number of classes that get a slot in the binary POS feature.
    pub const FEATURE_DIM: usize = 6;

    /// Slot in the 6-dimensional POS feature, `None` for [`Pos::Other`].
    pub fn feature_index(self) -> Option<usize> {
        match self {
            Pos::Other => None,
            p => Some(p as usize),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "noun",
            Pos::Verb => "verb",
            Pos::Adjective => "adjective",
            Pos::Adverb => "adverb",
            Pos::Preposition => "preposition",
            Pos::Conjunction => "conjunction",
            Pos::Other => "other",
        }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        Pos::ALL.into_iter().find(|p| p.as_str() == s).ok_or(())
    }
}

/// Projection from a tagger's tagset onto [`Pos`].
///
/// The default map knows the class names themselves plus the Penn Treebank
/// and Universal POS tags; anything unmapped projects to [`Pos::Other`].
#[derive(Debug, Clone)]
pub struct PosMap {
    map: HashMap<String, Pos>,
}

impl Default for PosMap {
    fn default() -> Self {
        use Pos::*;
        let pairs: &[(&str, Pos)] = &[
            ("NN", Noun),
            ("NNS", Noun),
            ("NNP", Noun),
            ("NNPS", Noun),
            ("NOUN", Noun),
            ("PROPN", Noun),
            ("VB", Verb),
            ("VBD", Verb),
            ("VBG", Verb),
            ("VBN", Verb),
            ("VBP", Verb),
            ("VBZ", Verb),
            ("MD", Verb),
            ("VERB", Verb),
            ("AUX", Verb),
            ("JJ", Adjective),
            ("JJR", Adjective),
            ("JJS", Adjective),
            ("ADJ", Adjective),
            ("RB", Adverb),
            ("RBR", Adverb),
            ("RBS", Adverb),
            ("WRB", Adverb),
            ("ADV", Adverb),
            ("IN", Preposition),
            ("TO", Preposition),
            ("ADP", Preposition),
            ("CC", Conjunction),
            ("CCONJ", Conjunction),
            ("SCONJ", Conjunction),
        ];
        let mut map: HashMap<String, Pos> =
            pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        for p in Pos::ALL {
            map.insert(p.as_str().to_string(), p);
        }
        Self { map }
    }
}

impl PosMap {
    /// Reads `TAG<TAB>class` lines on top of the defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut out = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split('\t');
            let (Some(tag), Some(class)) = (parts.next(), parts.next()) else {
                return Err(Error::Parse {
                    line: i + 1,
                    message: "expected `TAG<TAB>class`".into(),
                });
            };
            let pos = class.trim().parse::<Pos>().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("unknown POS class `{class}`"),
            })?;
            out.map.insert(tag.trim().to_string(), pos);
        }
        Ok(out)
    }

    pub fn project(&self, tag: &str) -> Pos {
        self.map.get(tag).copied().unwrap_or(Pos::Other)
    }
}

/// IOB2 tag over the single chunk type `A` (aspect).
///
/// The discriminant is the tag's index in the tagger alphabet, so `O` wins
/// index-based tie-breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum IobTag {
    O = 0,
    B = 1,
    I = 2,
}

impl IobTag {
    pub const ALL: [IobTag; 3] = [IobTag::O, IobTag::B, IobTag::I];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            IobTag::O => "O",
            IobTag::B => "B-A",
            IobTag::I => "I-A",
        }
    }
}

impl fmt::Display for IobTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IobTag {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "O" => Ok(IobTag::O),
            "B-A" => Ok(IobTag::B),
            "I-A" => Ok(IobTag::I),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub surface: String,
    pub pos: Pos,
    /// Dependency head within the same sentence; `None` for the root or
    /// when the sentence carries no parse.
    pub head: Option<usize>,
    /// Dependency label, `_` when unparsed.
    pub deprel: String,
    pub tag: Option<IobTag>,
}

impl Token {
    /// A bare token with no parse and no tag.
    pub fn word(surface: impl Into<String>) -> Self {
        Self {
            surface: surface.into(),
            pos: Pos::Other,
            head: None,
            deprel: "_".into(),
            tag: None,
        }
    }

    pub fn lower(&self) -> String {
        self.surface.to_lowercase()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    pub doc_id: String,
    /// Index of the sentence within its document (its time instant).
    pub position: usize,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>, doc_id: impl Into<String>, position: usize) -> Self {
        Self {
            tokens,
            doc_id: doc_id.into(),
            position,
        }
    }

    /// Whitespace tokens, with trailing `.,!?;:` split off.
    pub fn from_text(text: &str, doc_id: impl Into<String>, position: usize) -> Self {
        Self::new(
            tokenize(text).into_iter().map(Token::word).collect(),
            doc_id,
            position,
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn has_dependencies(&self) -> bool {
        self.tokens.iter().any(|t| t.deprel != "_")
    }

    pub fn gold_tags(&self) -> Option<Vec<IobTag>> {
        self.tokens.iter().map(|t| t.tag).collect()
    }

    /// Indices of the tokens whose head is `head`.
    pub fn children(&self, head: usize) -> impl Iterator<Item = usize> + '_ {
        self.tokens
            .iter()
            .enumerate()
            .filter(move |(_, t)| t.head == Some(head))
            .map(|(i, _)| i)
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Splits on whitespace and peels trailing punctuation into its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for raw in text.split_whitespace() {
        let trimmed = raw.trim_end_matches(['.', ',', '!', '?', ';', ':']);
        if !trimmed.is_empty() {
            out.push(trimmed.to_string());
        }
        for c in raw[trimmed.len()..].chars() {
            out.push(c.to_string());
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Sentence>,
}

/// Half-open token range `start..end` covering one aspect term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AspectSpan {
    pub start: usize,
    pub end: usize,
}

impl AspectSpan {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }

    pub fn single(i: usize) -> Self {
        Self::new(i, i + 1)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn overlaps(&self, other: &AspectSpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn text(&self, sentence: &Sentence) -> String {
        sentence.tokens[self.start..self.end]
            .iter()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for AspectSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// Chunks of an IOB2 tag sequence. An `I-A` that does not continue a chunk
/// opens a new one.
pub fn iob2_decode(tags: &[IobTag]) -> BTreeSet<AspectSpan> {
    let mut spans = BTreeSet::new();
    let mut open: Option<usize> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            IobTag::O => {
                if let Some(s) = open.take() {
                    spans.insert(AspectSpan::new(s, i));
                }
            }
            IobTag::B => {
                if let Some(s) = open.replace(i) {
                    spans.insert(AspectSpan::new(s, i));
                }
            }
            IobTag::I => {
                open.get_or_insert(i);
            }
        }
    }
    if let Some(s) = open {
        spans.insert(AspectSpan::new(s, tags.len()));
    }
    spans
}

pub fn iob2_encode(spans: &BTreeSet<AspectSpan>, len: usize) -> Result<Vec<IobTag>> {
    let mut tags = vec![IobTag::O; len];
    let mut prev: Option<AspectSpan> = None;
    for span in spans {
        if span.is_empty() || span.end > len {
            return Err(Error::SpanOutOfRange {
                start: span.start,
                end: span.end,
                len,
            });
        }
        if let Some(p) = prev {
            if p.overlaps(span) {
                return Err(Error::SpanOverlap((p.start, p.end), (span.start, span.end)));
            }
        }
        tags[span.start] = IobTag::B;
        for t in &mut tags[span.start + 1..span.end] {
            *t = IobTag::I;
        }
        prev = Some(*span);
    }
    Ok(tags)
}

/// Reads the tab-separated parsed corpus format:
///
/// ```text
/// # doc <id>
/// surface<TAB>pos<TAB>head<TAB>deprel<TAB>tag
/// ```
///
/// `head` is 1-based with `0` for the root and `_` when the sentence has no
/// parse; `tag` is `B-A`, `I-A`, `O` or `_`. Blank lines end sentences. Other
/// `#` lines without a tab are comments.
pub fn load_parsed_corpus(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus(&text, &PosMap::default())
}

pub fn parse_corpus(text: &str, pos_map: &PosMap) -> Result<Vec<Document>> {
    let mut docs: Vec<Document> = Vec::new();
    // (line number, token, raw head) rows of the sentence being read
    let mut rows: Vec<(usize, Token, Option<usize>)> = Vec::new();

    fn flush(
        docs: &mut Vec<Document>,
        rows: &mut Vec<(usize, Token, Option<usize>)>,
    ) -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let n = rows.len();
        let mut tokens = Vec::with_capacity(n);
        for (i, (line, mut tok, head)) in rows.drain(..).enumerate() {
            if let Some(h) = head {
                if h > n {
                    return Err(Error::Parse {
                        line,
                        message: format!("head {h} outside sentence of {n} tokens"),
                    });
                }
                if h == i + 1 {
                    return Err(Error::Parse {
                        line,
                        message: "token is its own head".into(),
                    });
                }
                tok.head = h.checked_sub(1);
            }
            tokens.push(tok);
        }
        if docs.is_empty() {
            docs.push(Document {
                id: "doc0".into(),
                sentences: Vec::new(),
            });
        }
        let doc = docs.last_mut().unwrap();
        let position = doc.sentences.len();
        doc.sentences
            .push(Sentence::new(tokens, doc.id.clone(), position));
        Ok(())
    }

    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(&mut docs, &mut rows)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix('#').filter(|_| !line.contains('\t')) {
            if let Some(id) = rest.trim().strip_prefix("doc") {
                flush(&mut docs, &mut rows)?;
                docs.push(Document {
                    id: id.trim().to_string(),
                    sentences: Vec::new(),
                });
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 5 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 5 tab-separated columns, found {}", cols.len()),
            });
        }
        let head = match cols[2] {
            "_" => None,
            h => Some(h.parse::<usize>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("bad head index `{h}`"),
            })?),
        };
        let tag = match cols[4] {
            "_" => None,
            t => Some(t.parse::<IobTag>().map_err(|_| Error::UnknownTag {
                line: lineno,
                tag: t.to_string(),
            })?),
        };
        let token = Token {
            surface: cols[0].to_string(),
            pos: pos_map.project(cols[1]),
            head: None,
            deprel: cols[3].to_string(),
            tag,
        };
        rows.push((lineno, token, head));
    }
    flush(&mut docs, &mut rows)?;
    Ok(docs)
}

/// Writes documents in the format read by [`load_parsed_corpus`]. `tags`
/// overrides the token tags when given (one sequence per sentence, in
/// document order).
pub fn format_corpus(docs: &[Document], tags: Option<&[Vec<IobTag>]>) -> String {
    write_corpus(docs, tags, false)
}

/// Like [`format_corpus`] with the given tags, preceding each sentence with
/// a `# spans` comment listing its decoded aspects as `start-end:text`.
pub fn format_tagged(docs: &[Document], tags: &[Vec<IobTag>]) -> String {
    write_corpus(docs, Some(tags), true)
}

fn write_corpus(docs: &[Document], tags: Option<&[Vec<IobTag>]>, notes: bool) -> String {
    let mut out = String::new();
    let mut k = 0;
    for doc in docs {
        out.push_str(&format!("# doc {}\n", doc.id));
        for s in &doc.sentences {
            let override_tags = tags.map(|t| &t[k]);
            if let (true, Some(t)) = (notes, override_tags) {
                let spans: Vec<String> = iob2_decode(t)
                    .iter()
                    .map(|sp| format!("{}-{}:{}", sp.start, sp.end, sp.text(s).replace(' ', "_")))
                    .collect();
                out.push_str(&format!(
                    "# spans{}\n",
                    spans.iter().map(|s| format!(" {s}")).collect::<String>()
                ));
            }
            for (i, tok) in s.tokens.iter().enumerate() {
                let head = if tok.deprel == "_" && tok.head.is_none() {
                    "_".to_string()
                } else {
                    tok.head.map_or(0, |h| h + 1).to_string()
                };
                let tag = override_tags
                    .map(|t| t[i].as_str())
                    .or(tok.tag.map(|t| t.as_str()))
                    .unwrap_or("_");
                out.push_str(&format!(
                    "{}\t{}\t{}\t{}\t{}\n",
                    tok.surface, tok.pos, head, tok.deprel, tag
                ));
            }
            out.push('\n');
            k += 1;
        }
    }
    out
}

/// Fallback for words missing from an [`EmbeddingTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnkPolicy {
    Zero,
    /// Uniform values in ±0.01 drawn from a stream seeded by the word and
    /// the seed; the same word always maps to the same vector.
    SeededHash {
        seed: u64,
    },
}

impl UnkPolicy {
    pub const HASH_SCALE: f64 = 0.01;
}

#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    entries: HashMap<String, Vec<f64>>,
    unk_policy: UnkPolicy,
}

impl EmbeddingTable {
    pub fn new(dim: usize, unk_policy: UnkPolicy) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        Self {
            dim,
            entries: HashMap::new(),
            unk_policy,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unk_policy(&self) -> UnkPolicy {
        self.unk_policy
    }

    pub fn set_unk_policy(&mut self, policy: UnkPolicy) {
        self.unk_policy = policy;
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.entries.contains_key(word)
    }

    pub fn insert(&mut self, word: impl Into<String>, vector: Vec<f64>) -> Result<()> {
        let word = word.into();
        if vector.len() != self.dim {
            return Err(Error::EmbeddingDim {
                word,
                expected: self.dim,
                found: vector.len(),
            });
        }
        self.entries.insert(word, vector);
        Ok(())
    }

    pub fn words(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Exact match first, then the lowercased form, then the unknown-word
    /// policy.
    pub fn lookup(&self, word: &str) -> Vec<f64> {
        if let Some(v) = self.entries.get(word) {
            return v.clone();
        }
        if let Some(v) = self.entries.get(&word.to_lowercase()) {
            return v.clone();
        }
        match self.unk_policy {
            UnkPolicy::Zero => vec![0.0; self.dim],
            UnkPolicy::SeededHash { seed } => hashed_vector(word, seed, self.dim),
        }
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

fn hashed_vector(word: &str, seed: u64, dim: usize) -> Vec<f64> {
    let key = fnv1a(word.to_lowercase().as_bytes()) ^ seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    (0..dim)
        .map(|_| rng.random_range(-UnkPolicy::HASH_SCALE..UnkPolicy::HASH_SCALE))
        .collect()
}

/// Writes `word v1 ... vd` lines sorted by word, values in round-trip form.
pub fn format_embeddings(table: &EmbeddingTable) -> String {
    let mut words: Vec<&str> = table.words().collect();
    words.sort_unstable();
    let mut out = String::new();
    for w in words {
        out.push_str(w);
        for v in table.lookup(w) {
            out.push_str(&format!(" {v:?}"));
        }
        out.push('\n');
    }
    out
}

/// Reads `word v1 ... vd` lines.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    dim: usize,
    unk_policy: UnkPolicy,
) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_embeddings(&text, dim, unk_policy)
}

pub fn parse_embeddings(text: &str, dim: usize, unk_policy: UnkPolicy) -> Result<EmbeddingTable> {
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "embedding dimension must be positive".into(),
        ));
    }
    let mut table = EmbeddingTable::new(dim, unk_policy);
    for (i, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        let Some(word) = parts.next() else { continue };
        let vector = parts
            .map(|p| {
                p.parse::<f64>().map_err(|_| Error::Parse {
                    line: i + 1,
                    message: format!("bad value `{p}` for `{word}`"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        table.insert(word, vector)?;
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LexiconKind {
    SubjectivityClues,
    SentimentConcepts,
    StopWords,
}

/// A set of `(word, pos)` entries; a missing POS matches any class. Words
/// are stored lowercased and may be multiword phrases.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    pub kind: LexiconKind,
    entries: BTreeSet<(String, Option<Pos>)>,
}

impl Lexicon {
    pub fn new(kind: LexiconKind) -> Self {
        Self {
            kind,
            entries: BTreeSet::new(),
        }
    }

    pub fn from_words<I, S>(kind: LexiconKind, words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Self::new(kind);
        for w in words {
            lex.insert(w.as_ref(), None);
        }
        lex
    }

    pub fn insert(&mut self, word: &str, pos: Option<Pos>) -> bool {
        self.entries.insert((word.trim().to_lowercase(), pos))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, Option<Pos>)> {
        self.entries.iter().map(|(w, p)| (w.as_str(), *p))
    }

    /// Distinct words in sorted order.
    pub fn words(&self) -> Vec<String> {
        let set: BTreeSet<&str> = self.entries.iter().map(|(w, _)| w.as_str()).collect();
        set.into_iter().map(String::from).collect()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        let w = word.to_lowercase();
        self.entries
            .range((w.clone(), None)..)
            .next()
            .is_some_and(|(x, _)| *x == w)
    }

    pub fn contains(&self, word: &str, pos: Pos) -> bool {
        let w = word.to_lowercase();
        self.entries.contains(&(w.clone(), None)) || self.entries.contains(&(w, Some(pos)))
    }
}

/// Reads `word<TAB>pos` lines; the POS column may be omitted or `*`.
pub fn load_lexicon(path: impl AsRef<Path>, kind: LexiconKind) -> Result<Lexicon> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_lexicon(&text, kind)
}

pub fn parse_lexicon(text: &str, kind: LexiconKind) -> Result<Lexicon> {
    let pos_map = PosMap::default();
    let mut lex = Lexicon::new(kind);
    for line in text.lines() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let word = parts.next().unwrap_or_default();
        let pos = match parts.next().map(str::trim) {
            None | Some("") | Some("*") => None,
            Some(p) => Some(pos_map.project(p)),
        };
        lex.insert(word, pos);
    }
    Ok(lex)
}

/// Writes `word<TAB>pos` lines (`*` for any part of speech) in entry order.
pub fn format_lexicon(lexicon: &Lexicon) -> String {
    lexicon
        .entries()
        .map(|(w, pos)| format!("{w}\t{}\n", pos.map_or("*", Pos::as_str)))
        .collect()
}

/// Word-frequency matrix over time: `matrix[i][t]` counts vocabulary entry
/// `i` in sentence `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BowTimeSeries {
    pub vocab: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
}

impl BowTimeSeries {
    pub fn num_vars(&self) -> usize {
        self.vocab.len()
    }

    pub fn num_instants(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    /// Builds a series directly from per-variable columns.
    pub fn from_rows(vocab: Vec<String>, matrix: Vec<Vec<f64>>) -> Result<Self> {
        if vocab.len() != matrix.len() {
            return Err(Error::shape("bow series", "vocab and row count differ"));
        }
        let t = matrix.first().map_or(0, Vec::len);
        if matrix.iter().any(|r| r.len() != t) {
            return Err(Error::shape("bow series", "ragged rows"));
        }
        Ok(Self { vocab, matrix })
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        self.matrix.iter().map(|row| row[t]).collect()
    }
}

/// Counts occurrences of each vocabulary entry in each sentence. Entries
/// containing spaces are phrases and match contiguous token runs; matching
/// is case-insensitive.
pub fn build_bow_series(sentences: &[Sentence], vocab: &[String]) -> Result<BowTimeSeries> {
    if vocab.is_empty() {
        return Err(Error::Empty("vocabulary"));
    }
    let patterns: Vec<Vec<String>> = vocab
        .iter()
        .map(|v| v.split_whitespace().map(str::to_lowercase).collect())
        .collect();
    let mut matrix = vec![vec![0.0; sentences.len()]; vocab.len()];
    for (t, s) in sentences.iter().enumerate() {
        let words: Vec<String> = s.tokens.iter().map(Token::lower).collect();
        for (i, pat) in patterns.iter().enumerate() {
            matrix[i][t] = count_occurrences(&words, pat) as f64;
        }
    }
    Ok(BowTimeSeries {
        vocab: vocab.to_vec(),
        matrix,
    })
}

pub(crate) fn count_occurrences(words: &[String], pattern: &[String]) -> usize {
    if pattern.is_empty() || pattern.len() > words.len() {
        return 0;
    }
    words
        .windows(pattern.len())
        .filter(|w| w.iter().zip(pattern).all(|(a, b)| a == b))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn tags(s: &str) -> Vec<IobTag> {
        s.split_whitespace().map(|t| t.parse().unwrap()).collect()
    }

    #[test]
    fn two_line_file_maps_fields() {
        let docs = parse_corpus(
            "The\tdet\t2\tdet\tO\ncamera\tnoun\t0\troot\tB-A\n",
            &PosMap::default(),
        )
        .unwrap();
        assert_eq!(docs.len(), 1);
        let s = &docs[0].sentences[0];
        assert_eq!(s.len(), 2);
        assert_eq!(s.tokens[0].head, Some(1));
        assert_eq!(s.tokens[1].head, None);
        assert_eq!(s.tokens[1].pos, Pos::Noun);
        assert_eq!(s.tokens[0].pos, Pos::Other);
        assert_eq!(s.tokens[1].tag, Some(IobTag::B));
    }

    #[test]
    fn empty_file_has_no_documents() {
        assert!(parse_corpus("", &PosMap::default()).unwrap().is_empty());
    }

    #[test]
    fn head_out_of_range_names_line() {
        let text = "a\tnoun\t0\troot\tO\nb\tnoun\t5\tdep\tO\nc\tnoun\t1\tdep\tO\n";
        let err = parse_corpus(text, &PosMap::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn self_head_rejected() {
        let err = parse_corpus("a\tnoun\t1\troot\tO\n", &PosMap::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unknown_tag_rejected() {
        let err = parse_corpus("a\tnoun\t0\troot\tB-X\n", &PosMap::default()).unwrap_err();
        assert!(matches!(err, Error::UnknownTag { line: 1, .. }));
    }

    #[test]
    fn documents_and_positions() {
        let text = "# doc r1\na\tNN\t_\t_\t_\n\nb\tNN\t_\t_\t_\n\n# doc r2\nc\tJJ\t_\t_\t_\n";
        let docs = parse_corpus(text, &PosMap::default()).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].id, "r1");
        assert_eq!(docs[0].sentences[1].position, 1);
        assert_eq!(docs[1].sentences[0].tokens[0].pos, Pos::Adjective);
        assert!(!docs[0].sentences[0].has_dependencies());
    }

    #[test]
    fn corpus_format_round_trips() {
        let text =
            "# doc d\nThe\tother\t2\tdet\tO\ncamera\tnoun\t0\troot\tB-A\n\nx\tverb\t_\t_\t_\n\n";
        let docs = parse_corpus(text, &PosMap::default()).unwrap();
        assert_eq!(format_corpus(&docs, None), text);
    }

    #[test]
    fn decode_example_sequence() {
        let t = tags("O O B-A I-A O B-A O B-A O O B-A O B-A O O B-A O O O O O B-A O O O O O O");
        let spans: Vec<_> = iob2_decode(&t)
            .into_iter()
            .map(|s| (s.start, s.end))
            .collect();
        assert_eq!(
            spans,
            vec![
                (2, 4),
                (5, 6),
                (7, 8),
                (10, 11),
                (12, 13),
                (15, 16),
                (21, 22)
            ]
        );
    }

    #[test]
    fn decode_edge_cases() {
        assert!(iob2_decode(&tags("O O O")).is_empty());
        let orphan: Vec<_> = iob2_decode(&tags("I-A I-A O")).into_iter().collect();
        assert_eq!(orphan, vec![AspectSpan::new(0, 2)]);
        let bb: Vec<_> = iob2_decode(&tags("B-A B-A I-A")).into_iter().collect();
        assert_eq!(bb, vec![AspectSpan::new(0, 1), AspectSpan::new(1, 3)]);
        assert!(iob2_decode(&[]).is_empty());
    }

    #[test]
    fn encode_examples() {
        let s: BTreeSet<_> = [AspectSpan::new(0, 2)].into();
        assert_eq!(iob2_encode(&s, 3).unwrap(), tags("B-A I-A O"));
        assert_eq!(iob2_encode(&BTreeSet::new(), 2).unwrap(), tags("O O"));
        let s: BTreeSet<_> = [AspectSpan::new(2, 4), AspectSpan::new(5, 6)].into();
        assert_eq!(iob2_encode(&s, 6).unwrap(), tags("O O B-A I-A O B-A"));
    }

    #[test]
    fn encode_rejects_bad_spans() {
        let s: BTreeSet<_> = [AspectSpan::new(0, 2), AspectSpan::new(1, 3)].into();
        assert!(matches!(iob2_encode(&s, 4), Err(Error::SpanOverlap(..))));
        let s: BTreeSet<_> = [AspectSpan::new(2, 5)].into();
        assert!(matches!(
            iob2_encode(&s, 4),
            Err(Error::SpanOutOfRange { .. })
        ));
    }

    fn span_sets() -> impl Strategy<Value = (BTreeSet<AspectSpan>, usize)> {
        // Gap/length pairs laid out left to right give non-overlapping spans.
        prop::collection::vec((0usize..3, 1usize..4), 0..6).prop_flat_map(|parts| {
            let mut spans = BTreeSet::new();
            let mut at = 0;
            for (gap, len) in parts {
                at += gap;
                spans.insert(AspectSpan::new(at, at + len));
                at += len;
            }
            (Just(spans), at..at + 3)
        })
    }

    proptest! {
        #[test]
        fn decode_inverts_encode((spans, len) in span_sets()) {
            let tags = iob2_encode(&spans, len).unwrap();
            prop_assert_eq!(iob2_decode(&tags), spans);
        }

        #[test]
        fn decode_is_total(idx in prop::collection::vec(0usize..3, 0..30)) {
            let tags: Vec<_> = idx.iter().map(|&i| IobTag::from_index(i).unwrap()).collect();
            let spans: Vec<_> = iob2_decode(&tags).into_iter().collect();
            for w in spans.windows(2) {
                prop_assert!(w[0].end <= w[1].start);
            }
            for s in &spans {
                prop_assert!(s.start < s.end && s.end <= tags.len());
            }
        }
    }

    #[test]
    fn embeddings_lookup() {
        let t = parse_embeddings("cat 0.1 0.2\n", 2, UnkPolicy::Zero).unwrap();
        assert_eq!(t.lookup("cat"), vec![0.1, 0.2]);
        assert_eq!(t.lookup("dog"), vec![0.0, 0.0]);
    }

    #[test]
    fn embeddings_dimension_mismatch_names_word() {
        let err = parse_embeddings("cat 0.1 0.2\ndog 0.3\n", 2, UnkPolicy::Zero).unwrap_err();
        assert!(err.to_string().contains("dog"));
    }

    #[test]
    fn seeded_hash_is_deterministic_and_small() {
        let a = EmbeddingTable::new(8, UnkPolicy::SeededHash { seed: 7 });
        let b = EmbeddingTable::new(8, UnkPolicy::SeededHash { seed: 7 });
        let c = EmbeddingTable::new(8, UnkPolicy::SeededHash { seed: 8 });
        assert_eq!(a.lookup("zebra"), b.lookup("zebra"));
        assert_ne!(a.lookup("zebra"), c.lookup("zebra"));
        assert_ne!(a.lookup("zebra"), a.lookup("yak"));
        assert!(a.lookup("zebra").iter().all(|x| x.abs() <= 0.01));
    }

    #[test]
    fn lexicon_parsing_and_lookup() {
        let lex = parse_lexicon(
            "good\tadjective\nwell\t*\ngood\tJJ\ntouch screen\tnoun\n",
            LexiconKind::SubjectivityClues,
        )
        .unwrap();
        assert_eq!(lex.len(), 3);
        assert!(lex.contains("Good", Pos::Adjective));
        assert!(!lex.contains("good", Pos::Noun));
        assert!(lex.contains("well", Pos::Verb));
        assert!(lex.contains_word("touch screen"));
        assert!(!lex.contains_word("touch"));
    }

    #[test]
    fn bow_examples() {
        let s = vec![
            Sentence::from_text("good good", "d", 0),
            Sentence::from_text("bad", "d", 1),
            Sentence::from_text("neutral words only", "d", 2),
        ];
        let bow = build_bow_series(&s, &["good".into(), "bad".into()]).unwrap();
        assert_eq!(bow.column(0), vec![2.0, 0.0]);
        assert_eq!(bow.column(1), vec![0.0, 1.0]);
        assert_eq!(bow.column(2), vec![0.0, 0.0]);
        assert!(build_bow_series(&s, &[]).is_err());
    }

    #[test]
    fn bow_counts_phrases() {
        let s = vec![Sentence::from_text(
            "the touch screen and Touch Screen",
            "d",
            0,
        )];
        let bow = build_bow_series(&s, &["touch screen".into(), "screen".into()]).unwrap();
        assert_eq!(bow.column(0), vec![2.0, 2.0]);
    }

    #[test]
    fn bow_matches_recount_on_toy_corpus() {
        let words = ["good", "bad", "nice", "plot", "the", "awful", "film"];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let sentences: Vec<Sentence> = (0..50)
            .map(|t| {
                let n = rng.random_range(1..10);
                let text: Vec<&str> = (0..n)
                    .map(|_| words[rng.random_range(0..words.len())])
                    .collect();
                Sentence::from_text(&text.join(" "), "d", t)
            })
            .collect();
        let vocab: Vec<String> = ["good", "bad", "film", "absent"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let bow = build_bow_series(&sentences, &vocab).unwrap();

        // independent recount via per-sentence hash maps
        for (t, s) in sentences.iter().enumerate() {
            let mut counts: HashMap<&str, f64> = HashMap::new();
            for tok in &s.tokens {
                *counts.entry(tok.surface.as_str()).or_default() += 1.0;
            }
            let mut in_vocab = 0.0;
            for (i, v) in vocab.iter().enumerate() {
                let c = counts.get(v.as_str()).copied().unwrap_or(0.0);
                assert_eq!(bow.matrix[i][t], c);
                in_vocab += c;
            }
            assert_eq!(bow.column(t).iter().sum::<f64>(), in_vocab);
        }
    }

    #[test]
    fn tokenize_splits_trailing_punct() {
        assert_eq!(
            tokenize("Nice camera, really!"),
            vec!["Nice", "camera", ",", "really", "!"]
        );
    }

    #[test]
    fn pos_map_file_extends_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("map.tsv");
        fs::write(&p, "XN\tnoun\n").unwrap();
        let m = PosMap::load(&p).unwrap();
        assert_eq!(m.project("XN"), Pos::Noun);
        assert_eq!(m.project("NN"), Pos::Noun);
        assert_eq!(m.project("??"), Pos::Other);
    }

    #[test]
    fn hash_tokens_and_span_notes() {
        let text = "# doc r\n#great\tother\t2\tamod\tO\nlens\tNN\t0\troot\tB-A\n\n";
        let docs = parse_corpus(text, &PosMap::default()).unwrap();
        let s = &docs[0].sentences[0];
        assert_eq!(s.tokens[0].surface, "#great");
        let tagged = format_tagged(&docs, &[vec![IobTag::B, IobTag::I]]);
        assert!(tagged.contains("# spans 0-2:#great_lens\n"));
        let back = parse_corpus(&tagged, &PosMap::default()).unwrap();
        assert_eq!(
            back[0].sentences[0].gold_tags().unwrap(),
            vec![IobTag::B, IobTag::I]
        );
    }
}
