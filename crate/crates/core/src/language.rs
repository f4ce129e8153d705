//! Alien language: build sentences from knowledge-base words, invent
//! words by concatenation, and score by in-order word overlap.

use crate::error::{GenerationError, ProtocolError};
use crate::generate::{resample, GenParams, Generator};
use crate::lcs::in_order_ratio;
use crate::protocol::{inline_persist, Baseline, Domain, DomainKind, Kb, Problem, RefId, Step};
use crate::rng::Rng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;

pub const ALPHABET: [char; 8] = ['A', 'B', 'C', 'D', 'W', 'X', 'Y', 'Z'];
pub const MIN_WORD_LEN: usize = 2;
pub const MAX_WORD_LEN: usize = 12;
/// Longest sentence an agent may build.
pub const MAX_SENTENCE_LEN: usize = 8;
pub const VOCABULARY_SIZE: usize = 2000;

/// A word over [`ALPHABET`] of length 2 to 12.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(String);

impl Word {
    pub fn new(text: impl Into<String>) -> Result<Self, String> {
        let text = text.into();
        let n = text.chars().count();
        if !(MIN_WORD_LEN..=MAX_WORD_LEN).contains(&n) {
            return Err(format!("word `{text}` has length {n}, expected 2-12"));
        }
        if let Some(c) = text.chars().find(|c| !ALPHABET.contains(c)) {
            return Err(format!("word `{text}` uses `{c}` outside the alphabet"));
        }
        Ok(Word(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<String> for Word {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        Word::new(s)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Convenience for tests and examples: space-separated words.
pub fn sentence(text: &str) -> Vec<Word> {
    text.split_whitespace()
        .map(|w| Word::new(w).expect("valid word"))
        .collect()
}

inline_persist!(Word, Vec<Word>);

/// Concatenates 2-3 words in argument order.
pub fn concat(parts: &[&Word]) -> Result<Word, ProtocolError> {
    if !(2..=3).contains(&parts.len()) {
        return Err(ProtocolError::InvalidCombination(format!(
            "concat takes 2-3 words, got {}",
            parts.len()
        )));
    }
    let text: String = parts.iter().map(|w| w.as_str()).collect();
    if text.len() > MAX_WORD_LEN {
        return Err(ProtocolError::InvalidCombination(format!(
            "`{text}` is longer than {MAX_WORD_LEN} characters"
        )));
    }
    Ok(Word(text))
}

/// `LCS(current, goal) / max(|current|, |goal|)`; an empty sentence scores 0.
pub fn score_sentence<S: Scalar>(current: &[Word], goal: &[Word]) -> S {
    let (n, d) = in_order_ratio(current, goal);
    S::from_ratio(n, d)
}

/// Exact no-invention optimum: `k / |goal|` where `k` counts goal
/// positions whose word is in the knowledge base.
pub fn uncreative_max_language<S: Scalar>(kb: &[Word], goal: &[Word]) -> S {
    if goal.is_empty() {
        return S::from_ratio(0, 1);
    }
    let k = goal.iter().filter(|w| kb.contains(w)).count();
    S::from_ratio(k as u64, goal.len() as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddWord {
    pub word: RefId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Concat {
    pub parts: Vec<RefId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Language;

impl Domain for Language {
    const KIND: DomainKind = DomainKind::Language;
    const KB_RANGE: (usize, usize) = (3, 9);

    type Setting = ();
    type Element = Word;
    type Goal = Vec<Word>;
    type Submission = Vec<Word>;
    type Action = AddWord;
    type Combination = Concat;

    fn null_submission(_: &()) -> Vec<Word> {
        Vec::new()
    }

    fn apply(
        _: &(),
        _goal: &Vec<Word>,
        current: &mut Vec<Word>,
        kb: Kb<'_, Self>,
        action: &AddWord,
    ) -> Result<(), ProtocolError> {
        let word = kb.get(action.word)?;
        if current.len() >= MAX_SENTENCE_LEN {
            return Err(ProtocolError::InvalidAction(format!(
                "sentence already has {MAX_SENTENCE_LEN} words"
            )));
        }
        current.push(word.clone());
        Ok(())
    }

    fn combine(_: &(), kb: Kb<'_, Self>, c: &Concat) -> Result<Word, ProtocolError> {
        let parts = c
            .parts
            .iter()
            .map(|&r| kb.get(r).map_err(|e| ProtocolError::InvalidCombination(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        concat(&parts)
    }

    fn score(_: &(), current: &Vec<Word>, goal: &Vec<Word>) -> f64 {
        score_sentence(current, goal)
    }

    fn summarize(w: &Word) -> String {
        format!("word {w}")
    }

    fn uncreative_max(problem: &Problem<Self>) -> Baseline {
        Baseline {
            value: uncreative_max_language(&problem.initial_kb, &problem.goal),
            exact: true,
        }
    }

    fn difficulty_key(problem: &Problem<Self>) -> u64 {
        (problem.initial_kb.len() * 10 + problem.goal.len()) as u64
    }
}

/// The shared vocabulary of a language suite.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    pub words: Vec<Word>,
    index: HashSet<Word>,
    /// Indices of words that split into 2-3 other vocabulary words.
    decomposable: Vec<usize>,
}

impl Vocabulary {
    pub fn new(words: Vec<Word>) -> Self {
        let index: HashSet<Word> = words.iter().cloned().collect();
        let mut v = Vocabulary {
            words,
            index,
            decomposable: Vec::new(),
        };
        v.decomposable = (0..v.words.len())
            .filter(|&i| !v.decompositions(&v.words[i]).is_empty())
            .collect();
        v
    }

    pub fn contains(&self, w: &str) -> bool {
        // Words shorter than two letters are never vocabulary.
        Word::new(w).map(|w| self.index.contains(&w)).unwrap_or(false)
    }

    /// All ways to write `word` as 2-3 other vocabulary words, in
    /// split-position order.
    pub fn decompositions(&self, word: &Word) -> Vec<Vec<Word>> {
        let s = word.as_str();
        let n = s.len();
        let mut out = Vec::new();
        for i in MIN_WORD_LEN..=n.saturating_sub(MIN_WORD_LEN) {
            let (a, rest) = s.split_at(i);
            if !self.contains(a) {
                continue;
            }
            if self.contains(rest) {
                out.push(vec![Word(a.into()), Word(rest.into())]);
            }
            for j in MIN_WORD_LEN..=rest.len().saturating_sub(MIN_WORD_LEN) {
                let (b, c) = rest.split_at(j);
                if self.contains(b) && self.contains(c) {
                    out.push(vec![Word(a.into()), Word(b.into()), Word(c.into())]);
                }
            }
        }
        out
    }

    pub fn decomposable(&self) -> &[usize] {
        &self.decomposable
    }
}

fn random_word(rng: &mut Rng, len: usize) -> Word {
    Word((0..len).map(|_| *rng.choose(&ALPHABET)).collect())
}

/// 2000 unique words: 70% random short roots, the rest compounds of 2-3
/// roots so that decomposable words exist. Shuffled.
pub fn build_vocabulary(seed: u64) -> Vocabulary {
    let mut rng = Rng::new(seed);
    let roots_wanted = VOCABULARY_SIZE * 7 / 10;
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(VOCABULARY_SIZE);
    while words.len() < roots_wanted {
        let len = rng.range(2, 6);
        let w = random_word(&mut rng, len);
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    while words.len() < VOCABULARY_SIZE {
        let k = rng.range(2, 3);
        let parts: Vec<&Word> = (0..k).map(|_| &words[rng.below(roots_wanted)]).collect();
        if let Ok(w) = concat(&parts) {
            if seen.insert(w.clone()) {
                words.push(w);
            }
        }
    }
    rng.shuffle(&mut words);
    Vocabulary::new(words)
}

struct Draft {
    goal: Vec<Word>,
    kb: Vec<Word>,
    compounds: Vec<(Word, Vec<Word>)>,
}

fn try_language(vocab: &Vocabulary, rng: &mut Rng) -> Option<Draft> {
    let len = rng.range(2, 5);
    let m = rng.range(1, 2.min(len));
    let dec = vocab.decomposable();
    let mut compounds = Vec::with_capacity(m);
    for i in rng.sample_indices(dec.len(), m) {
        let word = vocab.words[dec[i]].clone();
        let splits = vocab.decompositions(&word);
        let parts = rng.choose(&splits).clone();
        compounds.push((word, parts));
    }
    let compound_words: Vec<&Word> = compounds.iter().map(|c| &c.0).collect();

    let mut others = Vec::new();
    while others.len() < len - m {
        let w = rng.choose(&vocab.words);
        if !compound_words.contains(&w) && !others.contains(w) {
            others.push(w.clone());
        }
    }
    let mut goal: Vec<Word> = compound_words.iter().map(|&w| w.clone()).chain(others.iter().cloned()).collect();
    rng.shuffle(&mut goal);

    let mut kb: Vec<Word> = Vec::new();
    for w in others.iter().chain(compounds.iter().flat_map(|c| c.1.iter())) {
        if !kb.contains(w) {
            kb.push(w.clone());
        }
    }
    if kb.iter().any(|w| compound_words.contains(&w)) || kb.len() > 9 {
        return None;
    }
    while kb.len() < 3 {
        let w = rng.choose(&vocab.words);
        if !goal.contains(w) && !kb.contains(w) {
            kb.push(w.clone());
        }
    }
    rng.shuffle(&mut kb);
    Some(Draft { goal, kb, compounds })
}

fn oracle_script(d: &Draft) -> Vec<Step<Language>> {
    let pos = |w: &Word| RefId::new(d.kb.iter().position(|k| k == w).expect("fragment in kb"));
    let mut script: Vec<Step<Language>> = d
        .compounds
        .iter()
        .map(|(_, parts)| Step::Combine(Concat { parts: parts.iter().map(pos).collect() }))
        .collect();
    for w in &d.goal {
        let r = match d.compounds.iter().position(|c| &c.0 == w) {
            Some(c) => RefId::new(d.kb.len() + c),
            None => pos(w),
        };
        script.push(Step::Apply(AddWord { word: r }));
    }
    script
}

impl Generator for Language {
    type Library = Vocabulary;

    fn build_library(seed: u64, _: &GenParams) -> Result<Vocabulary, GenerationError> {
        Ok(build_vocabulary(seed))
    }

    fn generate_one(vocab: &Vocabulary, _: &GenParams, seed: u64) -> Result<Problem<Self>, GenerationError> {
        if vocab.decomposable().len() < 2 {
            return Err(GenerationError::Input("vocabulary has no decomposable words".into()));
        }
        let mut rng = Rng::new(seed);
        let draft = resample(10_000, "sentence with decomposable words", || try_language(vocab, &mut rng))?;
        let oracle = oracle_script(&draft);
        let mut problem = Problem {
            id: String::new(),
            difficulty_rank: 0,
            gen_seed: seed,
            setting: (),
            initial_kb: draft.kb,
            goal: draft.goal,
            oracle,
            baseline: Baseline { value: 0.0, exact: true },
        };
        problem.baseline = Language::uncreative_max(&problem);
        Ok(problem)
    }
}
