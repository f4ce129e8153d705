//! The uniform problem/session model every domain plugs into.
//!
//! A [`Problem`] carries an initial knowledge base and a hidden goal. An
//! agent works on it through a [`Session`], which only exposes the
//! knowledge-base ledger and five calls: `apply`, `clear`, `score`,
//! `combine` and `kb_listing`. The goal stays private to the session.

use crate::error::{ProtocolError, SuiteError};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::{self, Debug};
use std::path::PathBuf;
use std::str::FromStr;

pub const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Painting,
    Language,
    Photobash,
    Narrative,
    Dessert,
}

impl DomainKind {
    pub const ALL: [DomainKind; 5] = [
        DomainKind::Painting,
        DomainKind::Language,
        DomainKind::Photobash,
        DomainKind::Narrative,
        DomainKind::Dessert,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Painting => "painting",
            DomainKind::Language => "language",
            DomainKind::Photobash => "photobash",
            DomainKind::Narrative => "narrative",
            DomainKind::Dessert => "dessert",
        }
    }

    /// Position in [`DomainKind::ALL`]; also the sub-seed index of the domain.
    pub fn index(self) -> u64 {
        DomainKind::ALL.iter().position(|&d| d == self).unwrap() as u64
    }
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DomainKind::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| format!("unknown domain `{s}`"))
    }
}

/// Opaque handle to a knowledge-base entry. Rendered as `k<n>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefId(u32);

impl RefId {
    pub(crate) fn new(index: usize) -> Self {
        RefId(index as u32)
    }

    pub(crate) fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for RefId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k{}", self.0)
    }
}

impl FromStr for RefId {
    type Err = ProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.strip_prefix('k')
            .filter(|rest| !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()))
            .and_then(|rest| rest.parse().ok())
            .map(RefId)
            .ok_or_else(|| ProtocolError::InvalidReference(s.to_string()))
    }
}

impl Serialize for RefId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RefId {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Initial,
    Invented,
}

/// One ledger entry. Invented entries carry the combination that made them.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeElement<D: Domain> {
    pub ref_id: RefId,
    pub payload: D::Element,
    pub recipe: Option<D::Combination>,
}

impl<D: Domain> KnowledgeElement<D> {
    pub fn provenance(&self) -> Provenance {
        if self.recipe.is_some() {
            Provenance::Invented
        } else {
            Provenance::Initial
        }
    }
}

/// Read-only view of a ledger handed to domain operations.
#[derive(Clone, Copy)]
pub struct Kb<'a, D: Domain>(&'a [KnowledgeElement<D>]);

impl<'a, D: Domain> Kb<'a, D> {
    pub fn new(entries: &'a [KnowledgeElement<D>]) -> Self {
        Kb(entries)
    }

    pub fn get(&self, id: RefId) -> Result<&'a D::Element, ProtocolError> {
        self.0
            .get(id.index())
            .map(|e| &e.payload)
            .ok_or_else(|| ProtocolError::InvalidReference(id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn refs(&self) -> impl Iterator<Item = RefId> + 'a {
        (0..self.0.len()).map(RefId::new)
    }
}

/// A read-only listing row; never includes the goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct KbEntry {
    pub ref_id: RefId,
    pub provenance: Provenance,
    pub summary: String,
}

/// Generator-side storage of payloads: small values inline as JSON,
/// rasters as separate asset files.
pub trait Persist: Sized {
    fn store(&self, key: &str, assets: &mut Assets) -> serde_json::Value;
    fn load(value: &serde_json::Value, assets: &dyn AssetSource) -> Result<Self, SuiteError>;
}

/// Implements [`Persist`] as plain inline serde for the listed types.
macro_rules! inline_persist {
    ($($t:ty),* $(,)?) => {$(
        impl $crate::protocol::Persist for $t {
            fn store(&self, _key: &str, _assets: &mut $crate::protocol::Assets) -> serde_json::Value {
                serde_json::to_value(self).expect("inline payload serializes")
            }

            fn load(
                value: &serde_json::Value,
                _assets: &dyn $crate::protocol::AssetSource,
            ) -> Result<Self, $crate::error::SuiteError> {
                <$t as serde::Deserialize>::deserialize(value)
                    .map_err(|e| $crate::error::SuiteError::Format(e.to_string()))
            }
        }
    )*};
}
pub(crate) use inline_persist;

/// Binary assets produced while storing a problem, keyed by file name.
pub type Assets = BTreeMap<String, Vec<u8>>;

pub trait AssetSource {
    fn read_asset(&self, name: &str) -> Result<Vec<u8>, SuiteError>;
}

impl AssetSource for Assets {
    fn read_asset(&self, name: &str) -> Result<Vec<u8>, SuiteError> {
        self.get(name)
            .cloned()
            .ok_or_else(|| SuiteError::Format(format!("missing asset `{name}`")))
    }
}

/// Assets read from files in a directory.
pub struct AssetDir(pub PathBuf);

impl AssetSource for AssetDir {
    fn read_asset(&self, name: &str) -> Result<Vec<u8>, SuiteError> {
        if name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(SuiteError::Format(format!("asset name `{name}` escapes the suite")));
        }
        let path = self.0.join(name);
        std::fs::read(&path).map_err(|e| SuiteError::io(&path, e))
    }
}

/// The best raw score reachable without `combine`, as cached at generation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    pub value: f64,
    /// `false` when the value is a lower bound from a heuristic search.
    pub exact: bool,
}

/// A domain: its payload types, action semantics and scorer.
pub trait Domain: Sized + Send + Sync + 'static {
    const KIND: DomainKind;
    /// Inclusive bounds on the size of a generated initial knowledge base.
    const KB_RANGE: (usize, usize);

    /// Problem-wide, agent-visible parameters (canvas size, ...).
    type Setting: Clone + Debug + PartialEq + Send + Sync + Serialize + DeserializeOwned;
    type Element: Clone + Debug + PartialEq + Send + Sync + Persist;
    type Goal: Clone + Debug + PartialEq + Send + Sync + Persist;
    type Submission: Clone + Debug + PartialEq + Send;
    type Action: Clone + Debug + PartialEq + Send + Sync + Serialize + DeserializeOwned;
    type Combination: Clone + Debug + PartialEq + Send + Sync + Serialize + DeserializeOwned;

    fn null_submission(setting: &Self::Setting) -> Self::Submission;

    /// Closest-story submit resolves against `goal`. Nothing derived from
    /// it reaches the caller except through `score`.
    fn apply(
        setting: &Self::Setting,
        goal: &Self::Goal,
        submission: &mut Self::Submission,
        kb: Kb<'_, Self>,
        action: &Self::Action,
    ) -> Result<(), ProtocolError>;

    fn combine(
        setting: &Self::Setting,
        kb: Kb<'_, Self>,
        combination: &Self::Combination,
    ) -> Result<Self::Element, ProtocolError>;

    fn score(setting: &Self::Setting, submission: &Self::Submission, goal: &Self::Goal) -> f64;

    fn summarize(element: &Self::Element) -> String;

    /// Best raw score reachable from the initial knowledge base alone.
    fn uncreative_max(problem: &Problem<Self>) -> Baseline;

    /// The key the suite is sorted by; stored as `difficulty_rank`.
    fn difficulty_key(problem: &Problem<Self>) -> u64;

    /// Domain-specific proof that a perfect score needs invention, used
    /// where [`Domain::uncreative_max`] is only a bound.
    fn necessity_witness(problem: &Problem<Self>) -> Result<(), String> {
        let _ = problem;
        Ok(())
    }
}

/// One step of a recorded action script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", bound = "")]
pub enum Step<D: Domain> {
    Combine(D::Combination),
    Apply(D::Action),
    Clear,
}

/// One benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem<D: Domain> {
    pub id: String,
    pub difficulty_rank: u64,
    pub gen_seed: u64,
    pub setting: D::Setting,
    pub initial_kb: Vec<D::Element>,
    /// Engine-only.
    pub goal: D::Goal,
    /// Engine-only: a script reaching raw score 1.0.
    pub oracle: Vec<Step<D>>,
    pub baseline: Baseline,
}

/// A live attempt on one problem.
pub struct Session<'p, D: Domain> {
    problem_id: &'p str,
    setting: &'p D::Setting,
    goal: &'p D::Goal,
    initial_len: usize,
    kb: Vec<KnowledgeElement<D>>,
    submission: D::Submission,
    score_calls: u64,
    apply_calls: u64,
    combine_calls: u64,
    clear_calls: u64,
    budget: u64,
}

pub fn open_session<D: Domain>(problem: &Problem<D>, budget: u64) -> Result<Session<'_, D>, ProtocolError> {
    if budget == 0 {
        return Err(ProtocolError::InvalidBudget);
    }
    let kb = problem
        .initial_kb
        .iter()
        .enumerate()
        .map(|(i, payload)| KnowledgeElement {
            ref_id: RefId::new(i),
            payload: payload.clone(),
            recipe: None,
        })
        .collect();
    Ok(Session {
        problem_id: &problem.id,
        setting: &problem.setting,
        goal: &problem.goal,
        initial_len: problem.initial_kb.len(),
        kb,
        submission: D::null_submission(&problem.setting),
        score_calls: 0,
        apply_calls: 0,
        combine_calls: 0,
        clear_calls: 0,
        budget,
    })
}

impl<'p, D: Domain> Session<'p, D> {
    pub fn problem_id(&self) -> &str {
        self.problem_id
    }

    pub fn setting(&self) -> &D::Setting {
        self.setting
    }

    fn ensure_live(&self) -> Result<(), ProtocolError> {
        if self.score_calls >= self.budget {
            Err(ProtocolError::BudgetExceeded { budget: self.budget })
        } else {
            Ok(())
        }
    }

    pub fn apply(&mut self, action: &D::Action) -> Result<(), ProtocolError> {
        self.ensure_live()?;
        D::apply(
            self.setting,
            self.goal,
            &mut self.submission,
            Kb::new(&self.kb),
            action,
        )?;
        self.apply_calls += 1;
        Ok(())
    }

    pub fn clear(&mut self) {
        self.submission = D::null_submission(self.setting);
        self.clear_calls += 1;
    }

    pub fn score(&mut self) -> Result<f64, ProtocolError> {
        self.ensure_live()?;
        self.score_calls += 1;
        Ok(D::score(self.setting, &self.submission, self.goal))
    }

    pub fn combine(&mut self, combination: D::Combination) -> Result<RefId, ProtocolError> {
        self.ensure_live()?;
        let payload = D::combine(self.setting, Kb::new(&self.kb), &combination)?;
        let ref_id = RefId::new(self.kb.len());
        self.kb.push(KnowledgeElement {
            ref_id,
            payload,
            recipe: Some(combination),
        });
        self.combine_calls += 1;
        Ok(ref_id)
    }

    pub fn kb_listing(&self) -> Vec<KbEntry> {
        self.kb
            .iter()
            .map(|e| KbEntry {
                ref_id: e.ref_id,
                provenance: e.provenance(),
                summary: D::summarize(&e.payload),
            })
            .collect()
    }

    pub fn kb(&self) -> Kb<'_, D> {
        Kb::new(&self.kb)
    }

    pub fn entries(&self) -> &[KnowledgeElement<D>] {
        &self.kb
    }

    pub fn initial_len(&self) -> usize {
        self.initial_len
    }

    pub fn submission(&self) -> &D::Submission {
        &self.submission
    }

    pub fn score_calls(&self) -> u64 {
        self.score_calls
    }

    pub fn apply_calls(&self) -> u64 {
        self.apply_calls
    }

    pub fn combine_calls(&self) -> u64 {
        self.combine_calls
    }

    pub fn clear_calls(&self) -> u64 {
        self.clear_calls
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn remaining(&self) -> u64 {
        self.budget - self.score_calls
    }

    /// Runs a recorded script; stops at the first failing step.
    pub fn replay(&mut self, steps: &[Step<D>]) -> Result<(), ProtocolError> {
        for step in steps {
            match step {
                Step::Combine(c) => {
                    self.combine(c.clone())?;
                }
                Step::Apply(a) => self.apply(a)?,
                Step::Clear => self.clear(),
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ref_ids_parse_and_print() {
        let r: RefId = "k12".parse().unwrap();
        assert_eq!(r.to_string(), "k12");
        for bad in ["nonexistent", "k", "12", "k-1", "kx"] {
            assert!(matches!(
                bad.parse::<RefId>(),
                Err(ProtocolError::InvalidReference(_))
            ));
        }
    }

    #[test]
    fn domain_names_round_trip() {
        for d in DomainKind::ALL {
            assert_eq!(d.name().parse::<DomainKind>().unwrap(), d);
        }
        assert!("poetry".parse::<DomainKind>().is_err());
    }
}
