//! Suites on disk: a manifest plus one JSON file per problem and raster
//! assets beside it, and a runtime wrapper over the five problem types.

use crate::agents::{run_agent, Agent, RunRecord};
use crate::dessert::Dessert;
use crate::error::{GenerationError, ProtocolError, SuiteError};
use crate::generate::{generate_suite, GenParams};
use crate::image::CanvasSize;
use crate::language::Language;
use crate::narrative::Narrative;
use crate::painting::Painting;
use crate::photobash::Photobash;
use crate::protocol::{AssetDir, AssetSource, Assets, Baseline, Domain, DomainKind, Persist, Problem, Step};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub master_seed: u64,
    /// Problems per domain.
    pub count: usize,
    pub canvas: CanvasSize,
    pub domains: Vec<DomainKind>,
    /// Problem ids per domain, easiest first.
    pub problems: BTreeMap<DomainKind, Vec<String>>,
}

/// A problem of any domain.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyProblem {
    Painting(Problem<Painting>),
    Language(Problem<Language>),
    Photobash(Problem<Photobash>),
    Narrative(Problem<Narrative>),
    Dessert(Problem<Dessert>),
}

macro_rules! each {
    ($value:expr, $p:ident => $body:expr) => {
        match $value {
            AnyProblem::Painting($p) => $body,
            AnyProblem::Language($p) => $body,
            AnyProblem::Photobash($p) => $body,
            AnyProblem::Narrative($p) => $body,
            AnyProblem::Dessert($p) => $body,
        }
    };
}

/// One failed verification check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckFailure {
    pub problem: String,
    pub check: &'static str,
    pub detail: String,
}

fn fail(p: &str, check: &'static str, detail: impl Into<String>) -> CheckFailure {
    CheckFailure {
        problem: p.to_string(),
        check,
        detail: detail.into(),
    }
}

/// Solvability, invention necessity and knowledge-base size of one problem.
fn check_problem<D: Domain>(p: &Problem<D>) -> Vec<CheckFailure> {
    let mut out = Vec::new();
    let (lo, hi) = D::KB_RANGE;
    if !(lo..=hi).contains(&p.initial_kb.len()) {
        out.push(fail(
            &p.id,
            "kb-size",
            format!("{} elements, expected {lo}-{hi}", p.initial_kb.len()),
        ));
    }
    match crate::protocol::open_session(p, crate::protocol::DEFAULT_BUDGET)
        .and_then(|mut s| crate::agents::run_oracle(&mut s, &p.oracle))
    {
        Ok(score) if score == 1.0 => {}
        Ok(score) => out.push(fail(&p.id, "solvability", format!("oracle scores {score}"))),
        Err(e) => out.push(fail(&p.id, "solvability", format!("oracle script fails: {e}"))),
    }
    let baseline = D::uncreative_max(p);
    if baseline.value >= 1.0 {
        out.push(fail(&p.id, "invention-necessity", "reachable without combination"));
    }
    if baseline != p.baseline {
        out.push(fail(
            &p.id,
            "invention-necessity",
            format!("cached baseline {} but recomputed {}", p.baseline.value, baseline.value),
        ));
    }
    if let Err(why) = D::necessity_witness(p) {
        out.push(fail(&p.id, "invention-necessity", why));
    }
    if D::difficulty_key(p) != p.difficulty_rank {
        out.push(fail(
            &p.id,
            "difficulty-order",
            format!("rank {} but key {}", p.difficulty_rank, D::difficulty_key(p)),
        ));
    }
    out
}

fn problem_json<D: Domain>(p: &Problem<D>, assets: &mut Assets) -> Value {
    let kb: Vec<Value> = p
        .initial_kb
        .iter()
        .enumerate()
        .map(|(i, e)| e.store(&format!("{}.kb{i}", p.id), assets))
        .collect();
    json!({
        "format_version": FORMAT_VERSION,
        "id": p.id,
        "domain": D::KIND,
        "difficulty_rank": p.difficulty_rank,
        "gen_seed": p.gen_seed,
        "setting": p.setting,
        "initial_kb": kb,
        "engine": {
            "goal": p.goal.store(&format!("{}.goal", p.id), assets),
            "oracle": p.oracle,
            "baseline": p.baseline,
        },
    })
}

#[derive(Deserialize)]
struct StoredProblem {
    format_version: u32,
    id: String,
    domain: DomainKind,
    difficulty_rank: u64,
    gen_seed: u64,
    setting: Value,
    initial_kb: Vec<Value>,
    engine: StoredEngine,
}

#[derive(Deserialize)]
struct StoredEngine {
    goal: Value,
    oracle: Value,
    baseline: Baseline,
}

fn problem_from_json<D: Domain>(stored: StoredProblem, assets: &dyn AssetSource) -> Result<Problem<D>, SuiteError> {
    let bad = |what: &str, e: serde_json::Error| SuiteError::Format(format!("{}: {what}: {e}", stored.id));
    let setting = D::Setting::deserialize(&stored.setting).map_err(|e| bad("setting", e))?;
    let oracle = Vec::<Step<D>>::deserialize(&stored.engine.oracle).map_err(|e| bad("oracle", e))?;
    let initial_kb = stored
        .initial_kb
        .iter()
        .map(|v| D::Element::load(v, assets))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Problem {
        goal: D::Goal::load(&stored.engine.goal, assets)?,
        id: stored.id,
        difficulty_rank: stored.difficulty_rank,
        gen_seed: stored.gen_seed,
        setting,
        initial_kb,
        oracle,
        baseline: stored.engine.baseline,
    })
}

impl AnyProblem {
    pub fn kind(&self) -> DomainKind {
        match self {
            AnyProblem::Painting(_) => DomainKind::Painting,
            AnyProblem::Language(_) => DomainKind::Language,
            AnyProblem::Photobash(_) => DomainKind::Photobash,
            AnyProblem::Narrative(_) => DomainKind::Narrative,
            AnyProblem::Dessert(_) => DomainKind::Dessert,
        }
    }

    pub fn id(&self) -> &str {
        each!(self, p => &p.id)
    }

    pub fn baseline(&self) -> Baseline {
        each!(self, p => p.baseline)
    }

    pub fn difficulty_rank(&self) -> u64 {
        each!(self, p => p.difficulty_rank)
    }

    pub fn kb_len(&self) -> usize {
        each!(self, p => p.initial_kb.len())
    }

    pub fn run(&self, agent: &Agent, budget: u64) -> Result<RunRecord, ProtocolError> {
        each!(self, p => run_agent(p, agent, budget))
    }

    /// Solvability, necessity, size and rank checks for this problem.
    pub fn check(&self) -> Vec<CheckFailure> {
        each!(self, p => check_problem(p))
    }

    /// The problem file's JSON, and the assets it refers to.
    pub fn to_json(&self) -> (Value, Assets) {
        let mut assets = Assets::new();
        let v = each!(self, p => problem_json(p, &mut assets));
        (v, assets)
    }

    pub fn from_json(value: &Value, assets: &dyn AssetSource) -> Result<AnyProblem, SuiteError> {
        let stored = StoredProblem::deserialize(value).map_err(|e| SuiteError::Format(format!("problem file: {e}")))?;
        if stored.format_version != FORMAT_VERSION {
            return Err(SuiteError::Format(format!(
                "{}: format version {}, expected {FORMAT_VERSION}",
                stored.id, stored.format_version
            )));
        }
        Ok(match stored.domain {
            DomainKind::Painting => AnyProblem::Painting(problem_from_json(stored, assets)?),
            DomainKind::Language => AnyProblem::Language(problem_from_json(stored, assets)?),
            DomainKind::Photobash => AnyProblem::Photobash(problem_from_json(stored, assets)?),
            DomainKind::Narrative => AnyProblem::Narrative(problem_from_json(stored, assets)?),
            DomainKind::Dessert => AnyProblem::Dessert(problem_from_json(stored, assets)?),
        })
    }
}

/// `count` problems of one domain, easiest first.
pub fn generate_domain(
    kind: DomainKind,
    master_seed: u64,
    count: usize,
    params: &GenParams,
) -> Result<Vec<AnyProblem>, GenerationError> {
    fn wrap<D: crate::generate::Generator>(
        seed: u64,
        count: usize,
        params: &GenParams,
        f: fn(Problem<D>) -> AnyProblem,
    ) -> Result<Vec<AnyProblem>, GenerationError> {
        Ok(generate_suite::<D>(seed, count, params)?.into_iter().map(f).collect())
    }
    match kind {
        DomainKind::Painting => wrap(master_seed, count, params, AnyProblem::Painting),
        DomainKind::Language => wrap(master_seed, count, params, AnyProblem::Language),
        DomainKind::Photobash => wrap(master_seed, count, params, AnyProblem::Photobash),
        DomainKind::Narrative => wrap(master_seed, count, params, AnyProblem::Narrative),
        DomainKind::Dessert => wrap(master_seed, count, params, AnyProblem::Dessert),
    }
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(v).expect("json value serializes");
    bytes.push(b'\n');
    bytes
}

/// A generated or loaded suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub manifest: Manifest,
    /// Grouped by domain in manifest order, each group easiest first.
    pub problems: Vec<AnyProblem>,
}

impl Suite {
    pub fn generate(domains: &[DomainKind], master_seed: u64, count: usize, canvas: CanvasSize) -> Result<Suite, GenerationError> {
        let params = GenParams { canvas };
        let mut problems = Vec::new();
        let mut ids = BTreeMap::new();
        for &kind in domains {
            let batch = generate_domain(kind, master_seed, count, &params)?;
            ids.insert(kind, batch.iter().map(|p| p.id().to_string()).collect());
            problems.extend(batch);
        }
        Ok(Suite {
            manifest: Manifest {
                format_version: FORMAT_VERSION,
                master_seed,
                count,
                canvas,
                domains: domains.to_vec(),
                problems: ids,
            },
            problems,
        })
    }

    /// Every file of the suite, by path relative to the suite root.
    pub fn render(&self) -> BTreeMap<PathBuf, Vec<u8>> {
        let mut files = BTreeMap::new();
        files.insert(PathBuf::from(MANIFEST), pretty(&self.manifest));
        for p in &self.problems {
            let dir = PathBuf::from(p.kind().name());
            let (v, assets) = p.to_json();
            files.insert(dir.join(format!("{}.json", p.id())), pretty(&v));
            for (name, bytes) in assets {
                files.insert(dir.join(name), bytes);
            }
        }
        files
    }

    pub fn write(&self, dir: &Path) -> Result<(), SuiteError> {
        for (rel, bytes) in self.render() {
            let path = dir.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|e| SuiteError::io(parent, e))?;
            }
            std::fs::write(&path, bytes).map_err(|e| SuiteError::io(&path, e))?;
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Suite, SuiteError> {
        let manifest: Manifest = read_json(&dir.join(MANIFEST))?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(SuiteError::Format(format!(
                "manifest format version {}, expected {FORMAT_VERSION}",
                manifest.format_version
            )));
        }
        let mut problems = Vec::new();
        for kind in &manifest.domains {
            let sub = dir.join(kind.name());
            let assets = AssetDir(sub.clone());
            let ids = manifest
                .problems
                .get(kind)
                .ok_or_else(|| SuiteError::Format(format!("manifest lists no {kind} problems")))?;
            for id in ids {
                let value: Value = read_json(&sub.join(format!("{id}.json")))?;
                let p = AnyProblem::from_json(&value, &assets)?;
                if p.kind() != *kind || p.id() != id {
                    return Err(SuiteError::Format(format!(
                        "{kind}/{id}.json holds {} problem `{}`",
                        p.kind(),
                        p.id()
                    )));
                }
                problems.push(p);
            }
        }
        Ok(Suite { manifest, problems })
    }

    pub fn of_domain(&self, kind: DomainKind) -> impl Iterator<Item = &AnyProblem> {
        self.problems.iter().filter(move |p| p.kind() == kind)
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, SuiteError> {
    let bytes = std::fs::read(path).map_err(|e| SuiteError::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| SuiteError::json(path, e))
}

/// Every file under `dir`, by relative path.
pub fn read_tree(dir: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, SuiteError> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).map_err(|e| SuiteError::io(&d, e))? {
            let path = entry.map_err(|e| SuiteError::io(&d, e))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = std::fs::read(&path).map_err(|e| SuiteError::io(&path, e))?;
                let rel = path.strip_prefix(dir).expect("walk stays under root").to_path_buf();
                out.insert(rel, bytes);
            }
        }
    }
    Ok(out)
}
