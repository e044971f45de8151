//! Dependency-pattern aspect extraction and its combination with the
//! tagger's output.
//!
//! Rules 1–3 mark single nouns from the parse, Rule 4 grows marks over
//! noun-noun compounds and Rule 5 strips stop-words. The ensemble reports
//! every term marked by either extractor, then applies Rules 4 and 5 to the
//! union.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use crate::corpus::{parse_lexicon, AspectSpan, Lexicon, LexiconKind, Pos, Sentence};
use crate::{Error, Result};

pub const STARTER_SENTIMENT_LEXICON: &str = include_str!("../data/sentiment_lexicon.txt");
pub const STARTER_STOP_WORDS: &str = include_str!("../data/stop_words.txt");

pub const DEFAULT_AUXILIARIES: [&str; 16] = [
    "is", "was", "were", "am", "are", "be", "been", "would", "should", "could", "can", "may",
    "might", "must", "will", "shall",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    /// Subject of a word carrying a sentiment modifier.
    SentimentSubject,
    /// Subject of a modified verb.
    ModifiedVerbSubject,
    /// Non-sentiment direct object.
    DirectObject,
    /// Complement of a copula.
    Copular,
    /// Noun-noun compound merging.
    Compound,
    /// Stop-word pruning.
    StopWords,
}

impl Rule {
    pub const ALL: [Rule; 6] = [
        Rule::SentimentSubject,
        Rule::ModifiedVerbSubject,
        Rule::DirectObject,
        Rule::Copular,
        Rule::Compound,
        Rule::StopWords,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Rule::SentimentSubject => "1",
            Rule::ModifiedVerbSubject => "2.1",
            Rule::DirectObject => "2.2",
            Rule::Copular => "3",
            Rule::Compound => "4",
            Rule::StopWords => "5",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.id() == s.trim())
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown rule `{s}` (expected 1, 2.1, 2.2, 3, 4 or 5)"
                ))
            })
    }
}

/// Parses a comma-separated rule list such as `1,2.1,3`; `all` and `none`
/// are accepted.
pub fn parse_rule_set(s: &str) -> Result<BTreeSet<Rule>> {
    match s.trim() {
        "all" => Ok(Rule::ALL.into_iter().collect()),
        "none" | "" => Ok(BTreeSet::new()),
        list => list.split(',').map(str::parse).collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RuleConfig {
    pub sentiment_lexicon: Lexicon,
    pub stop_words: Lexicon,
    pub auxiliaries: BTreeSet<String>,
    pub enabled: BTreeSet<Rule>,
    /// Maps input dependency labels onto the inventory the rules read
    /// (`nsubj amod advmod advcl dobj cop compound det`).
    pub deprel_aliases: HashMap<String, String>,
}

impl RuleConfig {
    /// All rules on, the default auxiliary list and label aliases.
    pub fn new(sentiment_lexicon: Lexicon, stop_words: Lexicon) -> Self {
        let deprel_aliases = [("obj", "dobj"), ("nn", "compound"), ("nsubjpass", "nsubj")]
            .into_iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        Self {
            sentiment_lexicon,
            stop_words,
            auxiliaries: DEFAULT_AUXILIARIES.iter().map(|s| s.to_string()).collect(),
            enabled: Rule::ALL.into_iter().collect(),
            deprel_aliases,
        }
    }

    /// Configuration over the bundled starter lexicons.
    pub fn starter() -> Self {
        let lex = parse_lexicon(STARTER_SENTIMENT_LEXICON, LexiconKind::SentimentConcepts)
            .expect("bundled lexicon");
        let stop =
            parse_lexicon(STARTER_STOP_WORDS, LexiconKind::StopWords).expect("bundled stop words");
        Self::new(lex, stop)
    }

    pub fn with_rules(mut self, rules: impl IntoIterator<Item = Rule>) -> Self {
        self.enabled = rules.into_iter().collect();
        self
    }

    pub fn is_enabled(&self, rule: Rule) -> bool {
        self.enabled.contains(&rule)
    }

    /// Reads `from<TAB>to` label aliases, adding to the defaults.
    pub fn load_aliases(&mut self, text: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (a, b) = line.split_once('\t').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: "expected `from<TAB>to`".into(),
            })?;
            self.deprel_aliases
                .insert(a.trim().to_lowercase(), b.trim().to_lowercase());
        }
        Ok(())
    }

    /// Label in the rule inventory: lowercased, subtype after `:` dropped,
    /// aliases applied.
    pub fn relation(&self, deprel: &str) -> String {
        let lower = deprel.to_lowercase();
        if let Some(a) = self.deprel_aliases.get(&lower) {
            return a.clone();
        }
        let base = lower.split(':').next().unwrap_or_default().to_string();
        self.deprel_aliases.get(&base).cloned().unwrap_or(base)
    }
}

struct Graph<'a> {
    sentence: &'a Sentence,
    rel: Vec<String>,
    children: Vec<Vec<usize>>,
}

impl<'a> Graph<'a> {
    fn new(sentence: &'a Sentence, config: &RuleConfig) -> Self {
        let n = sentence.len();
        let mut children = vec![Vec::new(); n];
        for (i, t) in sentence.tokens.iter().enumerate() {
            if let Some(h) = t.head.filter(|&h| h < n) {
                children[h].push(i);
            }
        }
        let rel = sentence
            .tokens
            .iter()
            .map(|t| config.relation(&t.deprel))
            .collect();
        Self {
            sentence,
            rel,
            children,
        }
    }

    fn pos(&self, i: usize) -> Pos {
        self.sentence.tokens[i].pos
    }

    fn head(&self, i: usize) -> Option<usize> {
        self.sentence.tokens[i].head
    }

    fn children_with<'b>(&'b self, i: usize, rels: &'b [&str]) -> impl Iterator<Item = usize> + 'b {
        self.children[i]
            .iter()
            .copied()
            .filter(move |&c| rels.contains(&self.rel[c].as_str()))
    }

    fn nsubj_nouns(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.children_with(t, &["nsubj"])
            .filter(|&c| self.pos(c) == Pos::Noun)
    }
}

/// Rules 1–3 as single-token marks. Unparsed sentences yield nothing.
pub fn apply_rules(sentence: &Sentence, config: &RuleConfig) -> BTreeSet<AspectSpan> {
    let mut marks = BTreeSet::new();
    if !sentence.has_dependencies() {
        return marks;
    }
    let g = Graph::new(sentence, config);
    let tokens = &sentence.tokens;

    if config.is_enabled(Rule::SentimentSubject) {
        for t in 0..tokens.len() {
            let sentiment_mod = g.children_with(t, &["amod", "advmod"]).any(|m| {
                config
                    .sentiment_lexicon
                    .contains(&tokens[m].surface, tokens[m].pos)
            });
            if sentiment_mod {
                marks.extend(g.nsubj_nouns(t).map(AspectSpan::single));
            }
        }
    }

    let has_aux = tokens
        .iter()
        .any(|t| config.auxiliaries.contains(&t.lower()));
    if !has_aux {
        for t in (0..tokens.len()).filter(|&t| g.pos(t) == Pos::Verb) {
            if config.is_enabled(Rule::ModifiedVerbSubject)
                && g.children_with(t, &["amod", "advmod", "advcl"])
                    .next()
                    .is_some()
            {
                marks.extend(g.nsubj_nouns(t).map(AspectSpan::single));
            }
            if config.is_enabled(Rule::DirectObject) {
                for n in g.children_with(t, &["dobj"]) {
                    if g.pos(n) == Pos::Noun
                        && !config
                            .sentiment_lexicon
                            .contains(&tokens[n].surface, tokens[n].pos)
                    {
                        marks.insert(AspectSpan::single(n));
                    }
                }
            }
        }
    }

    if config.is_enabled(Rule::Copular) {
        for h in 0..tokens.len() {
            if g.children_with(h, &["cop"]).next().is_none() {
                continue;
            }
            // copula attached to the noun complement itself
            if g.pos(h) == Pos::Noun {
                marks.insert(AspectSpan::single(h));
            }
            // copula attached to a predicate whose subject is the noun
            marks.extend(g.nsubj_nouns(h).map(AspectSpan::single));
        }
    }
    marks
}

/// Replaces overlapping or nested spans by their cover.
pub fn unify_overlaps(spans: &BTreeSet<AspectSpan>) -> BTreeSet<AspectSpan> {
    let mut out: Vec<AspectSpan> = Vec::new();
    for s in spans.iter().filter(|s| !s.is_empty()) {
        match out.last_mut() {
            Some(last) if last.overlaps(s) => last.end = last.end.max(s.end),
            _ => out.push(*s),
        }
    }
    out.into_iter().collect()
}

/// Rule 4: a span grows over an adjacent noun linked to one of its tokens
/// by a compound edge (either direction), until nothing changes.
pub fn merge_compounds(spans: &BTreeSet<AspectSpan>, sentence: &Sentence) -> BTreeSet<AspectSpan> {
    merge_with(
        spans,
        sentence,
        &RuleConfig::new(
            Lexicon::new(LexiconKind::SentimentConcepts),
            Lexicon::new(LexiconKind::StopWords),
        ),
    )
}

fn merge_with(
    spans: &BTreeSet<AspectSpan>,
    sentence: &Sentence,
    config: &RuleConfig,
) -> BTreeSet<AspectSpan> {
    let mut current = unify_overlaps(spans);
    if !sentence.has_dependencies() {
        return current;
    }
    let g = Graph::new(sentence, config);
    let compound_of = |d: usize| (g.rel[d] == "compound").then(|| g.head(d)).flatten();
    // direct compound edge, or two compound modifiers of one head (flat analysis)
    let linked = |a: usize, b: usize| {
        compound_of(a) == Some(b)
            || compound_of(b) == Some(a)
            || (compound_of(a).is_some() && compound_of(a) == compound_of(b))
    };
    for _ in 0..=sentence.len() {
        let mut next = BTreeSet::new();
        for s in &current {
            let mut s = *s;
            if s.start > 0
                && g.pos(s.start - 1) == Pos::Noun
                && (s.start..s.end).any(|i| linked(i, s.start - 1))
            {
                s.start -= 1;
            }
            if s.end < sentence.len()
                && g.pos(s.end) == Pos::Noun
                && (s.start..s.end).any(|i| linked(i, s.end))
            {
                s.end += 1;
            }
            next.insert(s);
        }
        let next = unify_overlaps(&next);
        if next == current {
            break;
        }
        current = next;
    }
    current
}

/// Rule 5: drops stop-words at span boundaries; spans left empty vanish.
pub fn prune_stopwords(
    spans: &BTreeSet<AspectSpan>,
    sentence: &Sentence,
    stop_words: &Lexicon,
) -> BTreeSet<AspectSpan> {
    let stop = |i: usize| stop_words.contains_word(&sentence.tokens[i].surface);
    spans
        .iter()
        .filter_map(|s| {
            let (mut a, mut b) = (s.start, s.end.min(sentence.len()));
            while a < b && stop(a) {
                a += 1;
            }
            while b > a && stop(b - 1) {
                b -= 1;
            }
            (a < b).then(|| AspectSpan::new(a, b))
        })
        .collect()
}

/// Union of both extractors' marks, overlaps unified, then Rule 4 and
/// Rule 5 when enabled.
pub fn ensemble(
    cnn: &BTreeSet<AspectSpan>,
    lp: &BTreeSet<AspectSpan>,
    sentence: &Sentence,
    config: &RuleConfig,
) -> BTreeSet<AspectSpan> {
    let union: BTreeSet<AspectSpan> = cnn.union(lp).copied().collect();
    let mut spans = unify_overlaps(&union);
    if config.is_enabled(Rule::Compound) {
        spans = merge_with(&spans, sentence, config);
    }
    if config.is_enabled(Rule::StopWords) {
        spans = prune_stopwords(&spans, sentence, &config.stop_words);
    }
    spans
}

/// The rule-only extractor: Rules 1–3 followed by Rules 4 and 5.
pub fn extract(sentence: &Sentence, config: &RuleConfig) -> BTreeSet<AspectSpan> {
    ensemble(
        &BTreeSet::new(),
        &apply_rules(sentence, config),
        sentence,
        config,
    )
}
