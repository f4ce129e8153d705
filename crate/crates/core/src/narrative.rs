//! Narrative: plot graphs whose edges are preconditions, stories as
//! source-to-sink walks, amalgamation of two graphs, and an in-order event
//! overlap scorer.

use crate::error::{GenerationError, ProtocolError};
use crate::generate::{resample, GenParams, Generator};
use crate::lcs::{in_order_ratio, LcsRow};
use crate::protocol::{inline_persist, Baseline, Domain, DomainKind, Kb, Problem, RefId, Step};
use crate::rng::Rng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::{BTreeSet, HashSet};
use std::path::Path;

pub const MAX_NODES: usize = 20;
pub const MIN_STORY_LEN: usize = 3;
pub const MAX_STORY_LEN: usize = 20;
/// Above this many stories the closest-story search switches to a beam.
pub const ENUMERATION_LIMIT: u64 = 10_000;
pub const BEAM_WIDTH: usize = 200;
pub const MIN_LIBRARY: usize = 4;

const BUNDLED_GRAPHS: [&str; 10] = [
    include_str!("../data/plot_graphs/fantasy.json"),
    include_str!("../data/plot_graphs/tour_bus.json"),
    include_str!("../data/plot_graphs/robbery.json"),
    include_str!("../data/plot_graphs/pharmacy.json"),
    include_str!("../data/plot_graphs/inheritance.json"),
    include_str!("../data/plot_graphs/horror.json"),
    include_str!("../data/plot_graphs/movie.json"),
    include_str!("../data/plot_graphs/cat_lover.json"),
    include_str!("../data/plot_graphs/cattle_driver.json"),
    include_str!("../data/plot_graphs/stage_coach.json"),
];

/// An ordered list of event texts.
pub type Story = Vec<String>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theme {
    Intro,
    Conflict,
    Resolution,
    Ending,
    Transition,
    Reward,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventNode {
    pub id: u32,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag: Option<Theme>,
}

/// A DAG of events. `(u, v)` in `edges` means `u` must happen before `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct PlotGraph {
    name: String,
    nodes: Vec<EventNode>,
    edges: Vec<(u32, u32)>,
    succ: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    name: String,
    nodes: Vec<EventNode>,
    edges: Vec<(u32, u32)>,
}

impl TryFrom<RawGraph> for PlotGraph {
    type Error = String;

    fn try_from(raw: RawGraph) -> Result<Self, String> {
        PlotGraph::new(raw.name, raw.nodes, raw.edges)
    }
}

impl From<PlotGraph> for RawGraph {
    fn from(g: PlotGraph) -> Self {
        RawGraph {
            name: g.name,
            nodes: g.nodes,
            edges: g.edges,
        }
    }
}

inline_persist!(PlotGraph, Story);

/// Single capital letters in a text must be the placeholders A or B.
fn check_characters(text: &str) -> Result<(), String> {
    for tok in tokens(text) {
        let mut chars = tok.chars();
        if let (Some(c), None) = (chars.next(), chars.next()) {
            if c.is_ascii_uppercase() && c != 'A' && c != 'B' {
                return Err(format!("event `{text}` names character `{c}`; only A and B exist"));
            }
        }
    }
    Ok(())
}

fn tokens(text: &str) -> impl Iterator<Item = &str> {
    text.split(|c: char| !c.is_alphanumeric() && c != '\'')
        .filter(|t| !t.is_empty())
}

/// Lowercased words of an event, without the A/B placeholders.
pub fn content_words(text: &str) -> BTreeSet<String> {
    tokens(text)
        .filter(|t| *t != "A" && *t != "B")
        .map(str::to_lowercase)
        .collect()
}

impl PlotGraph {
    /// Validates and normalizes: node ids must be `0..n` in order, edges are
    /// sorted and deduplicated, and the graph must be acyclic.
    pub fn new(name: impl Into<String>, nodes: Vec<EventNode>, edges: Vec<(u32, u32)>) -> Result<Self, String> {
        let name = name.into();
        if nodes.is_empty() || nodes.len() > MAX_NODES {
            return Err(format!("graph `{name}` has {} nodes, expected 1-{MAX_NODES}", nodes.len()));
        }
        for (i, n) in nodes.iter().enumerate() {
            if n.id as usize != i {
                return Err(format!("graph `{name}`: node {i} has id {}", n.id));
            }
            if n.text.trim().is_empty() {
                return Err(format!("graph `{name}`: node {i} has empty text"));
            }
            check_characters(&n.text)?;
        }
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        let mut succ = vec![Vec::new(); nodes.len()];
        for &(u, v) in &edges {
            if u as usize >= nodes.len() || v as usize >= nodes.len() || u == v {
                return Err(format!("graph `{name}`: bad edge {u}->{v}"));
            }
            succ[u as usize].push(v);
        }
        let g = PlotGraph {
            name,
            nodes,
            edges,
            succ,
        };
        if !g.is_acyclic() {
            return Err(format!("graph `{}` has a cycle", g.name));
        }
        Ok(g)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        serde_json::from_str(text).map_err(|e| e.to_string())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[EventNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn successors(&self, v: u32) -> &[u32] {
        &self.succ[v as usize]
    }

    pub fn text(&self, v: u32) -> &str {
        &self.nodes[v as usize].text
    }

    pub fn sources(&self) -> Vec<u32> {
        let mut has_pred = vec![false; self.nodes.len()];
        for &(_, v) in &self.edges {
            has_pred[v as usize] = true;
        }
        (0..self.nodes.len() as u32).filter(|&v| !has_pred[v as usize]).collect()
    }

    pub fn is_sink(&self, v: u32) -> bool {
        self.succ[v as usize].is_empty()
    }

    fn is_acyclic(&self) -> bool {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for &(_, v) in &self.edges {
            indeg[v as usize] += 1;
        }
        let mut queue: Vec<u32> = (0..n as u32).filter(|&v| indeg[v as usize] == 0).collect();
        let mut seen = 0;
        while let Some(u) = queue.pop() {
            seen += 1;
            for &v in &self.succ[u as usize] {
                indeg[v as usize] -= 1;
                if indeg[v as usize] == 0 {
                    queue.push(v);
                }
            }
        }
        seen == n
    }

    /// Number of source-to-sink paths, saturating.
    pub fn story_count(&self) -> u64 {
        let mut memo: Vec<Option<u64>> = vec![None; self.nodes.len()];
        fn count(g: &PlotGraph, v: u32, memo: &mut Vec<Option<u64>>) -> u64 {
            if let Some(c) = memo[v as usize] {
                return c;
            }
            let c = if g.is_sink(v) {
                1
            } else {
                g.succ[v as usize]
                    .iter()
                    .fold(0u64, |acc, &s| acc.saturating_add(count(g, s, memo)))
            };
            memo[v as usize] = Some(c);
            c
        }
        self.sources()
            .into_iter()
            .fold(0u64, |acc, s| acc.saturating_add(count(self, s, &mut memo)))
    }

    /// Every source-to-sink path, in lexicographic order of node ids.
    pub fn paths(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        fn walk(g: &PlotGraph, v: u32, path: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            path.push(v);
            if g.is_sink(v) {
                out.push(path.clone());
            } else {
                for &s in &g.succ[v as usize] {
                    walk(g, s, path, out);
                }
            }
            path.pop();
        }
        for s in self.sources() {
            walk(self, s, &mut path, &mut out);
        }
        out
    }

    pub fn story_of(&self, path: &[u32]) -> Story {
        path.iter().map(|&v| self.text(v).to_string()).collect()
    }

    /// Whether `story` is the text sequence of some source-to-sink path.
    pub fn contains_story(&self, story: &[String]) -> bool {
        let Some(first) = story.first() else {
            return false;
        };
        let sources = self.sources();
        let mut cur: BTreeSet<u32> = sources.into_iter().filter(|&v| self.text(v) == first).collect();
        for event in &story[1..] {
            cur = cur
                .iter()
                .flat_map(|&v| self.succ[v as usize].iter().copied())
                .filter(|&s| self.text(s) == event)
                .collect();
            if cur.is_empty() {
                return false;
            }
        }
        cur.iter().any(|&v| self.is_sink(v))
    }
}

/// LCS over exact event texts divided by the longer length; no story is 0.
pub fn score_story<S: Scalar>(current: Option<&[String]>, goal: &[String]) -> S {
    let (n, d) = in_order_ratio(current.unwrap_or(&[]), goal);
    S::from_ratio(n, d)
}

/// Result of a closest-story search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StoryMatch {
    pub path: Vec<u32>,
    pub story: Story,
    pub lcs: usize,
    /// `false` when a beam search produced it.
    pub exact: bool,
}

fn cmp_ratio(a: (usize, usize), b: (usize, usize)) -> Ordering {
    (a.0 * b.1).cmp(&(b.0 * a.1))
}

fn better(cand: &(Vec<u32>, usize), best: &Option<(Vec<u32>, usize)>, goal_len: usize) -> bool {
    match best {
        None => true,
        Some((bp, bl)) => {
            let ca = (cand.1, cand.0.len().max(goal_len));
            let cb = (*bl, bp.len().max(goal_len));
            match cmp_ratio(ca, cb) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => cand.0 < *bp,
            }
        }
    }
}

/// The story of `g` scoring highest against `goal`, ties going to the
/// lexicographically smallest node-id sequence.
pub fn closest_story(g: &PlotGraph, goal: &[String]) -> StoryMatch {
    let goal_len = goal.len();
    let exact = g.story_count() <= ENUMERATION_LIMIT;
    let mut best: Option<(Vec<u32>, usize)> = None;
    if exact {
        for path in g.paths() {
            let lcs = in_order_ratio(&g.story_of(&path), goal).0 as usize;
            let cand = (path, lcs);
            if better(&cand, &best, goal_len) {
                best = Some(cand);
            }
        }
    } else {
        let mut live: Vec<(Vec<u32>, LcsRow)> = g
            .sources()
            .into_iter()
            .map(|s| (vec![s], LcsRow::new(goal_len).push(&g.text(s).to_string(), goal)))
            .collect();
        while !live.is_empty() {
            let mut next = Vec::new();
            for (path, row) in live {
                let v = *path.last().expect("non-empty prefix");
                if g.is_sink(v) {
                    let cand = (path, row.value());
                    if better(&cand, &best, goal_len) {
                        best = Some(cand);
                    }
                    continue;
                }
                for &s in g.successors(v) {
                    let mut p = path.clone();
                    p.push(s);
                    next.push((p, row.push(&g.text(s).to_string(), goal)));
                }
            }
            next.sort_by(|a, b| b.1.value().cmp(&a.1.value()).then_with(|| a.0.cmp(&b.0)));
            next.truncate(BEAM_WIDTH);
            live = next;
        }
    }
    let (path, lcs) = best.expect("a graph has at least one story");
    StoryMatch {
        story: g.story_of(&path),
        path,
        lcs,
        exact,
    }
}

/// Node pairs `(a, b)` that amalgamation unifies, ordered by `a`.
///
/// Matching runs in three greedy passes, each taking the first still-free
/// node of `b`: identical text, then equal theme tag, then untagged nodes
/// sharing at least two words other than the placeholders.
pub fn unification_pairs(a: &PlotGraph, b: &PlotGraph) -> Vec<(u32, u32)> {
    let mut used_a = vec![false; a.nodes.len()];
    let mut used_b = vec![false; b.nodes.len()];
    let mut pairs = Vec::new();
    let words_b: Vec<BTreeSet<String>> = b.nodes.iter().map(|n| content_words(&n.text)).collect();
    for pass in 0..3 {
        for (i, na) in a.nodes.iter().enumerate() {
            if used_a[i] {
                continue;
            }
            let words_a = content_words(&na.text);
            let hit = b.nodes.iter().enumerate().find(|(j, nb)| {
                !used_b[*j]
                    && match pass {
                        0 => na.text == nb.text,
                        1 => na.tag.is_some() && na.tag == nb.tag,
                        _ => na.tag.is_none() && nb.tag.is_none() && words_a.intersection(&words_b[*j]).count() >= 2,
                    }
            });
            if let Some((j, _)) = hit {
                used_a[i] = true;
                used_b[j] = true;
                pairs.push((i as u32, j as u32));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Unified graph for one choice vector, without validity checks. Nodes of
/// `a` keep their ids; unpaired nodes of `b` follow in order.
fn build_amalgam(a: &PlotGraph, b: &PlotGraph, pairs: &[(u32, u32)], choice: u64) -> (Vec<EventNode>, Vec<(u32, u32)>) {
    let mut nodes = a.nodes.clone();
    let mut map_b = vec![u32::MAX; b.nodes.len()];
    for (bit, &(ia, ib)) in pairs.iter().enumerate() {
        map_b[ib as usize] = ia;
        if choice >> bit & 1 == 1 {
            nodes[ia as usize].text = b.nodes[ib as usize].text.clone();
            nodes[ia as usize].tag = b.nodes[ib as usize].tag;
        }
    }
    for (j, nb) in b.nodes.iter().enumerate() {
        if map_b[j] == u32::MAX {
            map_b[j] = nodes.len() as u32;
            nodes.push(EventNode {
                id: nodes.len() as u32,
                text: nb.text.clone(),
                tag: nb.tag,
            });
        }
    }
    let mut edges = a.edges.clone();
    edges.extend(b.edges.iter().map(|&(u, v)| (map_b[u as usize], map_b[v as usize])));
    (nodes, edges)
}

/// How many choice vectors `amalgamate(a, b, _)` accepts: `2^pairs` when
/// the unified graph is acyclic and small enough, else 0.
pub fn amalgam_choice_count(a: &PlotGraph, b: &PlotGraph) -> u64 {
    let pairs = unification_pairs(a, b);
    if pairs.len() >= 63 {
        return 0;
    }
    let (nodes, edges) = build_amalgam(a, b, &pairs, 0);
    if nodes.len() > MAX_NODES || PlotGraph::new("", nodes, edges).is_err() {
        return 0;
    }
    1u64 << pairs.len()
}

/// Amalgam of `a` and `b`; bit `i` of `choice` set means the `b` side's
/// text survives in the `i`-th unified pair.
pub fn amalgamate(a: &PlotGraph, b: &PlotGraph, choice: u64) -> Result<PlotGraph, ProtocolError> {
    let count = amalgam_choice_count(a, b);
    if count == 0 {
        return Err(ProtocolError::InvalidCombination(format!(
            "`{}` and `{}` have no valid amalgam",
            a.name, b.name
        )));
    }
    if choice >= count {
        return Err(ProtocolError::InvalidCombination(format!(
            "choice {choice} out of range, {count} amalgams exist"
        )));
    }
    let pairs = unification_pairs(a, b);
    let (nodes, edges) = build_amalgam(a, b, &pairs, choice);
    PlotGraph::new(format!("{} + {} #{choice}", a.name, b.name), nodes, edges)
        .map_err(ProtocolError::InvalidCombination)
}

/// Best score over the knowledge-base graphs, and whether every search was
/// exhaustive.
pub fn uncreative_max_narrative<S: Scalar>(kb: &[PlotGraph], goal: &[String]) -> (S, bool) {
    let mut best = S::from_ratio(0, 1);
    let mut exact = true;
    for g in kb {
        let m = closest_story(g, goal);
        exact &= m.exact;
        let s: S = score_story(Some(&m.story), goal);
        if s > best {
            best = s;
        }
    }
    (best, exact)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubmitGraph {
    pub graph: RefId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Amalgamate {
    pub a: RefId,
    pub b: RefId,
    pub choice: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Narrative;

impl Domain for Narrative {
    const KIND: DomainKind = DomainKind::Narrative;
    const KB_RANGE: (usize, usize) = (2, 4);

    type Setting = ();
    type Element = PlotGraph;
    type Goal = Story;
    type Submission = Option<Story>;
    type Action = SubmitGraph;
    type Combination = Amalgamate;

    fn null_submission(_: &()) -> Option<Story> {
        None
    }

    fn apply(_: &(), goal: &Story, current: &mut Option<Story>, kb: Kb<'_, Self>, a: &SubmitGraph) -> Result<(), ProtocolError> {
        let g = kb.get(a.graph)?;
        *current = Some(closest_story(g, goal).story);
        Ok(())
    }

    fn combine(_: &(), kb: Kb<'_, Self>, c: &Amalgamate) -> Result<PlotGraph, ProtocolError> {
        let get = |r| kb.get(r).map_err(|e| ProtocolError::InvalidCombination(e.to_string()));
        amalgamate(get(c.a)?, get(c.b)?, c.choice)
    }

    fn score(_: &(), current: &Option<Story>, goal: &Story) -> f64 {
        score_story(current.as_deref(), goal)
    }

    fn summarize(g: &PlotGraph) -> String {
        format!(
            "plot graph {} ({} events, {} amalgam choices with itself)",
            g.name,
            g.nodes.len(),
            amalgam_choice_count(g, g)
        )
    }

    fn uncreative_max(problem: &Problem<Self>) -> Baseline {
        let (value, exact) = uncreative_max_narrative(&problem.initial_kb, &problem.goal);
        Baseline { value, exact }
    }

    fn difficulty_key(problem: &Problem<Self>) -> u64 {
        problem.initial_kb.len() as u64
    }

    fn necessity_witness(problem: &Problem<Self>) -> Result<(), String> {
        match problem.initial_kb.iter().find(|g| g.contains_story(&problem.goal)) {
            Some(g) => Err(format!("goal is a story of `{}`", g.name)),
            None => Ok(()),
        }
    }
}

/// The ten bundled graphs.
pub fn bundled_graphs() -> Vec<PlotGraph> {
    BUNDLED_GRAPHS
        .iter()
        .map(|t| PlotGraph::from_json(t).expect("bundled graph is valid"))
        .collect()
}

/// Every `*.json` plot graph in `dir`, sorted by file name.
pub fn load_graph_dir(dir: &Path) -> Result<Vec<PlotGraph>, GenerationError> {
    let read = |e: std::io::Error| GenerationError::Input(format!("{}: {e}", dir.display()));
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .map_err(read)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(read)?;
            PlotGraph::from_json(&text).map_err(|e| GenerationError::Input(format!("{}: {e}", p.display())))
        })
        .collect()
}

struct Draft {
    kb: Vec<PlotGraph>,
    a: usize,
    b: usize,
    choice: u64,
    goal: Story,
}

fn random_walk(g: &PlotGraph, rng: &mut Rng) -> Vec<u32> {
    let sources = g.sources();
    let mut v = *rng.choose(&sources);
    let mut path = vec![v];
    while !g.is_sink(v) {
        v = *rng.choose(g.successors(v));
        path.push(v);
    }
    path
}

fn try_narrative(library: &[PlotGraph], rng: &mut Rng) -> Option<Draft> {
    let k = rng.range(2, 4).min(library.len());
    let kb: Vec<PlotGraph> = rng
        .sample_indices(library.len(), k)
        .into_iter()
        .map(|i| library[i].clone())
        .collect();
    let a = rng.below(k);
    let b = (a + 1 + rng.below(k - 1)) % k;
    let count = amalgam_choice_count(&kb[a], &kb[b]);
    if count == 0 {
        return None;
    }
    let choice = rng.next_u64() % count;
    let amalgam = amalgamate(&kb[a], &kb[b], choice).ok()?;
    if amalgam.story_count() > ENUMERATION_LIMIT {
        return None;
    }
    let goal = amalgam.story_of(&random_walk(&amalgam, rng));
    if !(MIN_STORY_LEN..=MAX_STORY_LEN).contains(&goal.len()) {
        return None;
    }
    let texts = |g: &PlotGraph| -> HashSet<String> { g.nodes.iter().map(|n| n.text.clone()).collect() };
    let (ta, tb) = (texts(&kb[a]), texts(&kb[b]));
    let from_a = goal.iter().any(|e| ta.contains(e) && !tb.contains(e));
    let from_b = goal.iter().any(|e| tb.contains(e) && !ta.contains(e));
    if !from_a || !from_b || kb.iter().any(|g| g.contains_story(&goal)) {
        return None;
    }
    Some(Draft { kb, a, b, choice, goal })
}

impl Generator for Narrative {
    type Library = Vec<PlotGraph>;

    fn build_library(_seed: u64, _: &GenParams) -> Result<Vec<PlotGraph>, GenerationError> {
        Ok(bundled_graphs())
    }

    fn generate_one(library: &Vec<PlotGraph>, _: &GenParams, seed: u64) -> Result<Problem<Self>, GenerationError> {
        if library.len() < MIN_LIBRARY {
            return Err(GenerationError::Input(format!(
                "plot graph library has {} graphs, need at least {MIN_LIBRARY}",
                library.len()
            )));
        }
        let mut rng = Rng::new(seed);
        let d = resample(1_000, "coherent amalgam story", || try_narrative(library, &mut rng))?;
        let oracle = vec![
            Step::Combine(Amalgamate {
                a: RefId::new(d.a),
                b: RefId::new(d.b),
                choice: d.choice,
            }),
            Step::Apply(SubmitGraph {
                graph: RefId::new(d.kb.len()),
            }),
        ];
        let mut problem = Problem {
            id: String::new(),
            difficulty_rank: 0,
            gen_seed: seed,
            setting: (),
            initial_kb: d.kb,
            goal: d.goal,
            oracle,
            baseline: Baseline { value: 0.0, exact: true },
        };
        problem.baseline = Narrative::uncreative_max(&problem);
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcs::lcs_len;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn graph(name: &str) -> PlotGraph {
        bundled_graphs().into_iter().find(|g| g.name == name).unwrap()
    }

    fn story(events: &[&str]) -> Story {
        events.iter().map(|s| s.to_string()).collect()
    }

    fn chain(texts: &[&str]) -> PlotGraph {
        let nodes = texts
            .iter()
            .enumerate()
            .map(|(i, t)| EventNode {
                id: i as u32,
                text: t.to_string(),
                tag: None,
            })
            .collect();
        let edges = (1..texts.len() as u32).map(|i| (i - 1, i)).collect();
        PlotGraph::new("chain", nodes, edges).unwrap()
    }

    #[test]
    fn fantasy_and_tour_bus_amalgam_tells_the_wedding_story() {
        let (f, t) = (graph("fantasy"), graph("tour bus"));
        let wanted = story(&[
            "Monster holds B captive.",
            "A slays monster.",
            "A rescues B.",
            "A departs with B.",
            "A and B get married.",
            "A and B visit a Landmark.",
        ]);
        assert!(!f.contains_story(&wanted) && !t.contains_story(&wanted));
        let n = amalgam_choice_count(&f, &t);
        assert_eq!(n, 32);
        let g = amalgamate(&f, &t, 16).unwrap();
        assert!(g.contains_story(&wanted));
        let m = closest_story(&g, &wanted);
        assert_eq!(score_story::<Ratio<i64>>(Some(&m.story), &wanted), Ratio::from_integer(1));
    }

    #[test]
    fn amalgam_choice_bounds() {
        let (f, t) = (graph("fantasy"), graph("tour bus"));
        assert!(matches!(amalgamate(&f, &t, 32), Err(ProtocolError::InvalidCombination(_))));
    }

    #[test]
    fn self_amalgam_is_story_equivalent() {
        for g in bundled_graphs() {
            let s = amalgamate(&g, &g, 0).unwrap();
            let stories = |x: &PlotGraph| -> BTreeSet<Story> { x.paths().iter().map(|p| x.story_of(p)).collect() };
            assert_eq!(stories(&s), stories(&g), "{}", g.name);
        }
    }

    #[test]
    fn amalgams_keep_every_unpaired_node() {
        let lib = bundled_graphs();
        for a in &lib {
            for b in &lib {
                let n = amalgam_choice_count(a, b);
                if n == 0 {
                    continue;
                }
                let pairs = unification_pairs(a, b);
                for choice in [0, n - 1] {
                    let g = amalgamate(a, b, choice).unwrap();
                    assert!(g.nodes.len() <= MAX_NODES);
                    assert_eq!(g.nodes.len(), a.nodes.len() + b.nodes.len() - pairs.len());
                    let texts: HashSet<&str> = g.nodes.iter().map(|n| n.text.as_str()).collect();
                    for (i, n) in a.nodes.iter().enumerate() {
                        if !pairs.iter().any(|p| p.0 as usize == i) {
                            assert!(texts.contains(n.text.as_str()));
                        }
                    }
                    for (j, n) in b.nodes.iter().enumerate() {
                        if !pairs.iter().any(|p| p.1 as usize == j) {
                            assert!(texts.contains(n.text.as_str()));
                        }
                    }
                    assert_eq!(amalgamate(a, b, choice).unwrap(), g);
                }
            }
        }
    }

    #[test]
    fn most_library_pairs_amalgamate() {
        let lib = bundled_graphs();
        let valid = lib
            .iter()
            .flat_map(|a| lib.iter().map(move |b| (a, b)))
            .filter(|(a, b)| a.name != b.name && amalgam_choice_count(a, b) > 0)
            .count();
        assert!(valid >= 45, "only {valid} of 90 ordered pairs amalgamate");
    }

    #[test]
    fn story_scoring_examples() {
        let goal = story(&["a1", "a2", "a3", "a4", "a5", "a6"]);
        assert_eq!(score_story::<Ratio<i64>>(None, &goal), Ratio::from_integer(0));
        assert_eq!(score_story::<Ratio<i64>>(Some(&goal), &goal), Ratio::from_integer(1));
        let cur = story(&["a1", "x", "a3", "y", "a6", "z"]);
        assert_eq!(score_story::<Ratio<i64>>(Some(&cur), &goal), Ratio::new(1, 2));
    }

    #[test]
    fn single_chain_story_is_chosen_regardless_of_goal() {
        let g = chain(&["A wakes.", "A eats.", "A sleeps."]);
        let m = closest_story(&g, &story(&["nothing", "alike"]));
        assert_eq!(m.path, vec![0, 1, 2]);
        assert!(m.exact);
    }

    #[test]
    fn ties_go_to_the_smaller_node_sequence() {
        let nodes = ["A starts.", "A goes left.", "A goes right.", "A ends."]
            .iter()
            .enumerate()
            .map(|(i, t)| EventNode {
                id: i as u32,
                text: t.to_string(),
                tag: None,
            })
            .collect();
        let g = PlotGraph::new("fork", nodes, vec![(0, 1), (0, 2), (1, 3), (2, 3)]).unwrap();
        let m = closest_story(&g, &story(&["A starts.", "A ends."]));
        assert_eq!(m.path, vec![0, 1, 3]);
        let m = closest_story(&g, &story(&["A starts.", "A goes right.", "A ends."]));
        assert_eq!(m.path, vec![0, 2, 3]);
    }

    #[test]
    fn graph_validation() {
        let node = |i: u32, t: &str| EventNode {
            id: i,
            text: t.into(),
            tag: None,
        };
        assert!(PlotGraph::new("c", vec![node(0, "A x."), node(1, "B y.")], vec![(0, 1), (1, 0)]).is_err());
        assert!(PlotGraph::new("c", vec![node(0, "C x.")], vec![]).is_err());
        assert!(PlotGraph::new("c", vec![node(1, "A x.")], vec![]).is_err());
        assert!(PlotGraph::new("c", vec![node(0, " ")], vec![]).is_err());
        assert!(PlotGraph::new("c", vec![node(0, "A x.")], vec![(0, 0)]).is_err());
        let many: Vec<EventNode> = (0..21).map(|i| node(i, "A x.")).collect();
        assert!(PlotGraph::new("c", many, vec![]).is_err());
    }

    #[test]
    fn bundled_graphs_round_trip_json() {
        for g in bundled_graphs() {
            let text = serde_json::to_string(&g).unwrap();
            assert_eq!(PlotGraph::from_json(&text).unwrap(), g);
            assert!(g.nodes.len() >= 7 && g.sources().len() >= 1);
        }
    }

    #[test]
    fn beam_finds_a_story_in_a_dense_graph() {
        // Every forward edge present: 2^18 stories, beyond enumeration.
        let nodes = (0..20u32)
            .map(|i| EventNode {
                id: i,
                text: format!("A reaches mile {i}."),
                tag: None,
            })
            .collect();
        let edges = (0..20u32).flat_map(|u| (u + 1..20).map(move |v| (u, v))).collect();
        let g = PlotGraph::new("dense", nodes, edges).unwrap();
        assert!(g.story_count() > ENUMERATION_LIMIT);
        let target = vec![0, 3, 4, 9, 12, 13, 17, 19];
        let goal = g.story_of(&target);
        let m = closest_story(&g, &goal);
        assert!(!m.exact);
        assert_eq!(m.path, target);
    }

    fn arb_dag() -> impl Strategy<Value = PlotGraph> {
        (2usize..=9).prop_flat_map(|n| {
            proptest::collection::vec(any::<bool>(), n * (n - 1) / 2).prop_map(move |bits| {
                let nodes = (0..n)
                    .map(|i| EventNode {
                        id: i as u32,
                        text: format!("A does {}.", i % 4),
                        tag: None,
                    })
                    .collect();
                let mut edges = Vec::new();
                let mut k = 0;
                for u in 0..n as u32 {
                    for v in u + 1..n as u32 {
                        if bits[k] {
                            edges.push((u, v));
                        }
                        k += 1;
                    }
                }
                PlotGraph::new("dag", nodes, edges).unwrap()
            })
        })
    }

    fn arb_events(max: usize) -> impl Strategy<Value = Story> {
        proptest::collection::vec((0u8..5).prop_map(|i| format!("A does {i}.")), 0..=max)
    }

    /// Longest common subsequence by trying every subsequence of `a`.
    fn brute_lcs(a: &[String], b: &[String]) -> usize {
        let mut best = 0;
        for mask in 0u32..(1 << a.len()) {
            let sub: Vec<&String> = (0..a.len()).filter(|i| mask >> i & 1 == 1).map(|i| &a[i]).collect();
            let mut it = b.iter();
            if sub.iter().all(|x| it.any(|y| y == *x)) {
                best = best.max(sub.len());
            }
        }
        best
    }

    proptest! {
        #[test]
        fn exact_search_is_optimal(g in arb_dag(), goal in arb_events(8)) {
            let m = closest_story(&g, &goal);
            prop_assert!(m.exact);
            let got: Ratio<i64> = score_story(Some(&m.story), &goal);
            for p in g.paths() {
                let s: Ratio<i64> = score_story(Some(&g.story_of(&p)), &goal);
                prop_assert!(s <= got);
                if s == got {
                    prop_assert!(m.path <= p);
                }
            }
            prop_assert!(g.contains_story(&m.story));
        }

        #[test]
        fn story_score_matches_brute_force(a in arb_events(8), b in arb_events(8)) {
            let got: Ratio<i64> = score_story(Some(&a), &b);
            let want = if a.is_empty() { Ratio::from_integer(0) } else {
                Ratio::new(brute_lcs(&a, &b) as i64, a.len().max(b.len()) as i64)
            };
            prop_assert_eq!(got, want);
            prop_assert_eq!(lcs_len(&a, &b), brute_lcs(&a, &b));
        }
    }
}
