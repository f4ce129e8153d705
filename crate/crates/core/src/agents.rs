//! Reference agents. They see a problem only through a [`Session`].

use crate::dessert::{Dessert, Merge, Submit};
use crate::error::ProtocolError;
use crate::image::{unit_coord_for, CanvasSize};
use crate::language::{AddWord, Concat, Language, MAX_SENTENCE_LEN};
use crate::narrative::{amalgam_choice_count, Amalgamate, Narrative, SubmitGraph};
use crate::painting::{Mix, MixMode, Paint, Painting};
use crate::photobash::{Cut, Photobash, Rect, Stamp};
use crate::protocol::{open_session, Domain, Kb, Problem, RefId, Session, Step};
use crate::rng::{sub_seed, Rng};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    pub iterations: usize,
    pub mutation_rate: f64,
    pub parents_selected: usize,
    pub children_per_iteration: usize,
    /// Chance that a mutation invents a new element instead of swapping.
    pub invent_rate: f64,
}

impl GaConfig {
    pub const GA_100: GaConfig = GaConfig {
        population: 100,
        iterations: 100,
        mutation_rate: 0.7,
        parents_selected: 20,
        children_per_iteration: 20,
        invent_rate: 0.1,
    };

    pub const GA_1000: GaConfig = GaConfig {
        population: 1000,
        iterations: 1000,
        ..GaConfig::GA_100
    };

    pub fn validate(&self) -> Result<(), String> {
        if self.population == 0 || self.parents_selected == 0 || self.children_per_iteration == 0 {
            return Err("population, parents and children must be positive".into());
        }
        if self.parents_selected > self.population {
            return Err(format!(
                "{} parents selected from a population of {}",
                self.parents_selected, self.population
            ));
        }
        for (name, p) in [("mutation rate", self.mutation_rate), ("invent rate", self.invent_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("{name} {p} is not a probability"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Agent {
    Null,
    Random,
    Ga(GaConfig),
    Oracle,
    /// Reports the cached no-invention baseline without playing.
    UncreativeMax,
}

impl Agent {
    pub fn name(&self) -> String {
        match self {
            Agent::Null => "null".into(),
            Agent::Random => "random".into(),
            Agent::Ga(c) if *c == GaConfig::GA_100 => "ga100".into(),
            Agent::Ga(c) if *c == GaConfig::GA_1000 => "ga1000".into(),
            Agent::Ga(c) => format!(
                "ga(pop={},iter={},mut={},parents={},children={},invent={})",
                c.population, c.iterations, c.mutation_rate, c.parents_selected, c.children_per_iteration, c.invent_rate
            ),
            Agent::Oracle => "oracle".into(),
            Agent::UncreativeMax => "uncreative-max".into(),
        }
    }

    /// Index mixed into per-problem agent seeds.
    fn seed_tag(&self) -> u64 {
        match self {
            Agent::Null => 1,
            Agent::Random => 2,
            Agent::Ga(_) => 3,
            Agent::Oracle => 4,
            Agent::UncreativeMax => 5,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Agent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "null" => Agent::Null,
            "random" => Agent::Random,
            "ga100" => Agent::Ga(GaConfig::GA_100),
            "ga1000" => Agent::Ga(GaConfig::GA_1000),
            "oracle" => Agent::Oracle,
            "uncreative-max" => Agent::UncreativeMax,
            _ => {
                return Err(format!(
                    "unknown agent `{s}` (expected null, random, ga100, ga1000, oracle or uncreative-max)"
                ))
            }
        })
    }
}

/// What one agent achieved on one problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub raw: f64,
    pub score_calls: u64,
    pub apply_calls: u64,
    pub combine_calls: u64,
}

/// Per-domain search vocabulary for the random and genetic agents.
pub trait Evolve: Domain {
    type Gene: Clone + Send;

    /// One random-agent move (actions only, never combinations).
    fn random_move(setting: &Self::Setting, kb: Kb<'_, Self>, current: &Self::Submission, rng: &mut Rng) -> Vec<Step<Self>>;

    fn random_genome(setting: &Self::Setting, kb: Kb<'_, Self>, rng: &mut Rng) -> Vec<Self::Gene>;

    /// Swaps in a random knowledge-base value or parameter.
    fn mutate(setting: &Self::Setting, kb: Kb<'_, Self>, gene: &mut Self::Gene, rng: &mut Rng);

    /// A combination built around `gene`, if one applies.
    fn invent(setting: &Self::Setting, kb: Kb<'_, Self>, gene: &Self::Gene, rng: &mut Rng) -> Option<Self::Combination>;

    /// Points `gene` at a freshly invented element.
    fn adopt(gene: &mut Self::Gene, invented: RefId);

    fn render(setting: &Self::Setting, genome: &[Self::Gene]) -> Vec<Self::Action>;
}

fn random_ref<D: Domain>(kb: Kb<'_, D>, rng: &mut Rng) -> RefId {
    RefId::new(rng.below(kb.len()))
}

fn pixel_unit(size: CanvasSize, i: usize) -> (f64, f64) {
    let (x, y) = (i as u32 % size.width, i as u32 / size.width);
    (unit_coord_for(x, size.width - 1), unit_coord_for(y, size.height - 1))
}

/// One gene per pixel: a knowledge-base color, or untouched.
impl Evolve for Painting {
    type Gene = Option<RefId>;

    fn random_move(_: &CanvasSize, kb: Kb<'_, Self>, _: &crate::image::Canvas, rng: &mut Rng) -> Vec<Step<Self>> {
        vec![Step::Apply(Paint {
            x: rng.unit(),
            y: rng.unit(),
            color: random_ref(kb, rng),
        })]
    }

    fn random_genome(size: &CanvasSize, kb: Kb<'_, Self>, rng: &mut Rng) -> Vec<Option<RefId>> {
        let density = rng.range_f64(0.0, 0.02);
        (0..size.area())
            .map(|_| rng.chance(density).then(|| random_ref(kb, rng)))
            .collect()
    }

    fn mutate(_: &CanvasSize, kb: Kb<'_, Self>, gene: &mut Option<RefId>, rng: &mut Rng) {
        *gene = if rng.chance(0.2) { None } else { Some(random_ref(kb, rng)) };
    }

    fn invent(_: &CanvasSize, kb: Kb<'_, Self>, gene: &Option<RefId>, rng: &mut Rng) -> Option<Mix> {
        let a = gene.unwrap_or_else(|| random_ref(kb, rng));
        let mode = if rng.chance(0.5) { MixMode::Additive } else { MixMode::Subtractive };
        Some(Mix {
            a,
            b: random_ref(kb, rng),
            mode,
        })
    }

    fn adopt(gene: &mut Option<RefId>, invented: RefId) {
        *gene = Some(invented);
    }

    fn render(size: &CanvasSize, genome: &[Option<RefId>]) -> Vec<Paint> {
        genome
            .iter()
            .enumerate()
            .filter_map(|(i, g)| {
                g.map(|color| {
                    let (x, y) = pixel_unit(*size, i);
                    Paint { x, y, color }
                })
            })
            .collect()
    }
}

/// A sentence of 1-8 word references.
impl Evolve for Language {
    type Gene = RefId;

    fn random_move(_: &(), kb: Kb<'_, Self>, current: &Vec<crate::language::Word>, rng: &mut Rng) -> Vec<Step<Self>> {
        let mut steps = Vec::new();
        if current.len() >= MAX_SENTENCE_LEN {
            steps.push(Step::Clear);
        }
        steps.push(Step::Apply(AddWord {
            word: random_ref(kb, rng),
        }));
        steps
    }

    fn random_genome(_: &(), kb: Kb<'_, Self>, rng: &mut Rng) -> Vec<RefId> {
        let n = rng.range(1, MAX_SENTENCE_LEN);
        (0..n).map(|_| random_ref(kb, rng)).collect()
    }

    fn mutate(_: &(), kb: Kb<'_, Self>, gene: &mut RefId, rng: &mut Rng) {
        *gene = random_ref(kb, rng);
    }

    fn invent(_: &(), kb: Kb<'_, Self>, gene: &RefId, rng: &mut Rng) -> Option<Concat> {
        let mut parts = vec![*gene, random_ref(kb, rng)];
        if rng.chance(0.5) {
            parts.swap(0, 1);
        }
        let total: usize = parts.iter().map(|&r| kb.get(r).map_or(usize::MAX / 4, |w| w.len())).sum();
        (total <= crate::language::MAX_WORD_LEN).then_some(Concat { parts })
    }

    fn adopt(gene: &mut RefId, invented: RefId) {
        *gene = invented;
    }

    fn render(_: &(), genome: &[RefId]) -> Vec<AddWord> {
        genome.iter().map(|&word| AddWord { word }).collect()
    }
}

/// Up to four stamps, each a sprite and a placement.
impl Evolve for Photobash {
    type Gene = Stamp;

    fn random_move(_: &CanvasSize, kb: Kb<'_, Self>, _: &crate::image::Canvas, rng: &mut Rng) -> Vec<Step<Self>> {
        vec![Step::Apply(Stamp {
            x: rng.unit(),
            y: rng.unit(),
            image: random_ref(kb, rng),
        })]
    }

    fn random_genome(_: &CanvasSize, kb: Kb<'_, Self>, rng: &mut Rng) -> Vec<Stamp> {
        let n = rng.range(1, 4);
        (0..n)
            .map(|_| Stamp {
                x: rng.unit(),
                y: rng.unit(),
                image: random_ref(kb, rng),
            })
            .collect()
    }

    fn mutate(_: &CanvasSize, kb: Kb<'_, Self>, gene: &mut Stamp, rng: &mut Rng) {
        match rng.below(3) {
            0 => gene.image = random_ref(kb, rng),
            1 => {
                gene.x = rng.unit();
                gene.y = rng.unit();
            }
            _ => {
                gene.x = (gene.x + rng.range_f64(-0.05, 0.05)).clamp(0.0, 1.0);
                gene.y = (gene.y + rng.range_f64(-0.05, 0.05)).clamp(0.0, 1.0);
            }
        }
    }

    fn invent(size: &CanvasSize, kb: Kb<'_, Self>, gene: &Stamp, rng: &mut Rng) -> Option<Cut> {
        let src = kb.get(gene.image).ok()?;
        if rng.chance(0.5) {
            let (w, h) = (src.width(), src.height());
            let x = rng.below(w as usize) as u32;
            let y = rng.below(h as usize) as u32;
            let rect = Rect {
                x,
                y,
                w: rng.range(1, (w - x) as usize) as u32,
                h: rng.range(1, (h - y) as usize) as u32,
            };
            Some(Cut::Crop { image: gene.image, rect })
        } else {
            let other = random_ref(kb, rng);
            let o = kb.get(other).ok()?;
            let dx = rng.range(0, size.width.saturating_sub(o.width()) as usize) as u32;
            let dy = rng.range(0, size.height.saturating_sub(o.height()) as usize) as u32;
            Some(Cut::Composite {
                parts: vec![(gene.image, 0, 0), (other, dx.min(src.width()), dy.min(src.height()))],
            })
        }
    }

    fn adopt(gene: &mut Stamp, invented: RefId) {
        gene.image = invented;
    }

    fn render(_: &CanvasSize, genome: &[Stamp]) -> Vec<Stamp> {
        genome.to_vec()
    }
}

/// The graph whose closest story is submitted.
impl Evolve for Narrative {
    type Gene = RefId;

    fn random_move(_: &(), kb: Kb<'_, Self>, _: &Option<Vec<String>>, rng: &mut Rng) -> Vec<Step<Self>> {
        vec![Step::Apply(SubmitGraph {
            graph: random_ref(kb, rng),
        })]
    }

    fn random_genome(_: &(), kb: Kb<'_, Self>, rng: &mut Rng) -> Vec<RefId> {
        vec![random_ref(kb, rng)]
    }

    fn mutate(_: &(), kb: Kb<'_, Self>, gene: &mut RefId, rng: &mut Rng) {
        *gene = random_ref(kb, rng);
    }

    fn invent(_: &(), kb: Kb<'_, Self>, gene: &RefId, rng: &mut Rng) -> Option<Amalgamate> {
        let b = random_ref(kb, rng);
        let (ga, gb) = (kb.get(*gene).ok()?, kb.get(b).ok()?);
        let (a, b, ga, gb) = if rng.chance(0.5) { (*gene, b, ga, gb) } else { (b, *gene, gb, ga) };
        let count = amalgam_choice_count(ga, gb);
        (count > 0).then(|| Amalgamate {
            a,
            b,
            choice: rng.next_u64() % count,
        })
    }

    fn adopt(gene: &mut RefId, invented: RefId) {
        *gene = invented;
    }

    fn render(_: &(), genome: &[RefId]) -> Vec<SubmitGraph> {
        genome.iter().map(|&graph| SubmitGraph { graph }).collect()
    }
}

/// The recipe submitted.
impl Evolve for Dessert {
    type Gene = RefId;

    fn random_move(_: &(), kb: Kb<'_, Self>, _: &Option<crate::dessert::Recipe>, rng: &mut Rng) -> Vec<Step<Self>> {
        vec![Step::Apply(Submit {
            recipe: random_ref(kb, rng),
        })]
    }

    fn random_genome(_: &(), kb: Kb<'_, Self>, rng: &mut Rng) -> Vec<RefId> {
        vec![random_ref(kb, rng)]
    }

    fn mutate(_: &(), kb: Kb<'_, Self>, gene: &mut RefId, rng: &mut Rng) {
        *gene = random_ref(kb, rng);
    }

    fn invent(_: &(), kb: Kb<'_, Self>, gene: &RefId, rng: &mut Rng) -> Option<Merge> {
        let mut parents = vec![*gene];
        for _ in 0..rng.range(1, 2) {
            parents.push(random_ref(kb, rng));
        }
        let mut pool: Vec<String> = Vec::new();
        for &p in &parents {
            for i in &kb.get(p).ok()?.ingredients {
                if !pool.contains(i) {
                    pool.push(i.clone());
                }
            }
        }
        let mut selection: Vec<String> = pool.iter().filter(|_| rng.chance(0.7)).cloned().collect();
        if selection.is_empty() {
            selection.push(rng.choose(&pool).clone());
        }
        Some(Merge { parents, selection })
    }

    fn adopt(gene: &mut RefId, invented: RefId) {
        *gene = invented;
    }

    fn render(_: &(), genome: &[RefId]) -> Vec<Submit> {
        genome.iter().map(|&recipe| Submit { recipe }).collect()
    }
}

fn record<D: Domain>(s: &Session<'_, D>, raw: f64) -> RunRecord {
    RunRecord {
        raw,
        score_calls: s.score_calls(),
        apply_calls: s.apply_calls(),
        combine_calls: s.combine_calls(),
    }
}

pub fn run_null<D: Domain>(session: &mut Session<'_, D>) -> Result<f64, ProtocolError> {
    session.score()
}

/// Uniform random moves until the budget runs out; returns the best score.
pub fn run_random<D: Evolve>(session: &mut Session<'_, D>, rng: &mut Rng) -> Result<f64, ProtocolError> {
    let mut best = 0.0f64;
    while session.remaining() > 0 {
        let steps = D::random_move(session.setting(), session.kb(), session.submission(), rng);
        session.replay(&steps)?;
        best = best.max(session.score()?);
    }
    Ok(best)
}

/// Clears, applies the genome's actions, and scores.
fn evaluate<D: Evolve>(session: &mut Session<'_, D>, genome: &[D::Gene]) -> Result<f64, ProtocolError> {
    session.clear();
    for a in D::render(session.setting(), genome) {
        session.apply(&a)?;
    }
    session.score()
}

fn crossover<G: Clone>(a: &[G], b: &[G], rng: &mut Rng) -> Vec<G> {
    let len = if rng.chance(0.5) { a.len() } else { b.len() };
    (0..len)
        .map(|i| match (a.get(i), b.get(i)) {
            (Some(x), Some(y)) => {
                if rng.chance(0.5) {
                    x.clone()
                } else {
                    y.clone()
                }
            }
            (Some(x), None) => x.clone(),
            (None, Some(y)) => y.clone(),
            (None, None) => unreachable!("index below one parent's length"),
        })
        .collect()
}

/// Steady-state elitist GA: each iteration breeds children from the best
/// parents and the population keeps the best of parents and children.
/// Budget exhaustion ends the run early.
pub fn run_ga<D: Evolve>(session: &mut Session<'_, D>, cfg: &GaConfig, rng: &mut Rng) -> Result<f64, ProtocolError> {
    let mut pop: Vec<(f64, Vec<D::Gene>)> = Vec::with_capacity(cfg.population + cfg.children_per_iteration);
    let mut best = 0.0f64;
    let halted = |e: &ProtocolError| matches!(e, ProtocolError::BudgetExceeded { .. });

    for _ in 0..cfg.population {
        let g = D::random_genome(session.setting(), session.kb(), rng);
        match evaluate(session, &g) {
            Ok(s) => {
                best = best.max(s);
                pop.push((s, g));
            }
            Err(e) if halted(&e) => return Ok(best),
            Err(e) => return Err(e),
        }
    }

    for _ in 0..cfg.iterations {
        if best >= 1.0 {
            break;
        }
        pop.sort_by(|a, b| b.0.total_cmp(&a.0));
        let parents = cfg.parents_selected.min(pop.len());
        for _ in 0..cfg.children_per_iteration {
            let p1 = &pop[rng.below(parents)].1;
            let p2 = &pop[rng.below(parents)].1;
            let mut child = crossover(p1, p2, rng);
            if !child.is_empty() && rng.chance(cfg.mutation_rate) {
                let i = rng.below(child.len());
                let invented = if rng.chance(cfg.invent_rate) {
                    D::invent(session.setting(), session.kb(), &child[i], rng)
                } else {
                    None
                };
                match invented {
                    Some(c) => match session.combine(c) {
                        Ok(r) => D::adopt(&mut child[i], r),
                        Err(e) if halted(&e) => return Ok(best),
                        Err(_) => D::mutate(session.setting(), session.kb(), &mut child[i], rng),
                    },
                    None => D::mutate(session.setting(), session.kb(), &mut child[i], rng),
                }
            }
            match evaluate(session, &child) {
                Ok(s) => {
                    best = best.max(s);
                    pop.push((s, child));
                }
                Err(e) if halted(&e) => return Ok(best),
                Err(e) => return Err(e),
            }
        }
        pop.sort_by(|a, b| b.0.total_cmp(&a.0));
        pop.truncate(cfg.population);
    }
    Ok(best)
}

/// Replays the problem's stored script and scores once.
pub fn run_oracle<D: Domain>(session: &mut Session<'_, D>, script: &[Step<D>]) -> Result<f64, ProtocolError> {
    session.replay(script)?;
    session.score()
}

/// Runs `agent` on `problem`. The agent's random stream depends only on the
/// problem's generation seed, so results do not depend on scheduling.
pub fn run_agent<D: Evolve>(problem: &Problem<D>, agent: &Agent, budget: u64) -> Result<RunRecord, ProtocolError> {
    if let Agent::UncreativeMax = agent {
        return Ok(RunRecord {
            raw: problem.baseline.value,
            score_calls: 0,
            apply_calls: 0,
            combine_calls: 0,
        });
    }
    let mut rng = Rng::new(sub_seed(problem.gen_seed, agent.seed_tag()));
    let mut session = open_session(problem, budget)?;
    let raw = match agent {
        Agent::Null => run_null(&mut session)?,
        Agent::Random => run_random(&mut session, &mut rng)?,
        Agent::Ga(cfg) => run_ga(&mut session, cfg, &mut rng)?,
        Agent::Oracle => run_oracle(&mut session, &problem.oracle)?,
        Agent::UncreativeMax => unreachable!(),
    };
    Ok(record(&session, raw))
}
