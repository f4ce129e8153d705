//! Dessert recipes: submit one knowledge-base recipe, invent recipes by
//! merging ingredient lists, and score by ingredient-set overlap.

use crate::error::{GenerationError, ProtocolError};
use crate::generate::{resample, GenParams, Generator};
use crate::protocol::{inline_persist, Baseline, Domain, DomainKind, Kb, Problem, RefId, Step};
use crate::rng::Rng;
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

const BUNDLED_CORPUS: &str = include_str!("../data/desserts.json");

pub const MIN_CORPUS: usize = 100;
pub const MAX_KB: usize = 130;

/// Lowercase and trim; the on-disk normal form of an ingredient.
pub fn normalize_ingredient(s: &str) -> String {
    s.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRecipe", into = "RawRecipe")]
pub struct Recipe {
    pub name: String,
    pub ingredients: BTreeSet<String>,
}

#[derive(Serialize, Deserialize)]
struct RawRecipe {
    name: String,
    ingredients: Vec<String>,
}

impl TryFrom<RawRecipe> for Recipe {
    type Error = String;

    fn try_from(raw: RawRecipe) -> Result<Self, String> {
        Recipe::new(&raw.name, raw.ingredients.iter().map(String::as_str))
    }
}

impl From<Recipe> for RawRecipe {
    fn from(r: Recipe) -> Self {
        RawRecipe {
            name: r.name,
            ingredients: r.ingredients.into_iter().collect(),
        }
    }
}

impl Recipe {
    /// Normalizes ingredients; duplicates after normalization are an error.
    pub fn new<'a>(name: &str, ingredients: impl IntoIterator<Item = &'a str>) -> Result<Self, String> {
        let mut set = BTreeSet::new();
        for i in ingredients {
            let n = normalize_ingredient(i);
            if n.is_empty() {
                return Err(format!("recipe `{name}` has an empty ingredient"));
            }
            if !set.insert(n.clone()) {
                return Err(format!("recipe `{name}` lists `{n}` twice"));
            }
        }
        if set.is_empty() {
            return Err(format!("recipe `{name}` has no ingredients"));
        }
        Ok(Recipe {
            name: name.trim().to_string(),
            ingredients: set,
        })
    }
}

inline_persist!(Recipe);

/// Jaccard index of the ingredient sets; no current recipe scores 0.
pub fn score_recipe<S: Scalar>(current: Option<&Recipe>, goal: &Recipe) -> S {
    match current {
        None => S::from_ratio(0, 1),
        Some(c) => {
            let inter = c.ingredients.intersection(&goal.ingredients).count();
            let union = c.ingredients.len() + goal.ingredients.len() - inter;
            S::from_ratio(inter as u64, union as u64)
        }
    }
}

/// A new recipe from 2-5 parents whose ingredients are `selection`; every
/// selected ingredient must come from some parent.
pub fn merge(parents: &[&Recipe], selection: &[String]) -> Result<Recipe, ProtocolError> {
    if !(2..=5).contains(&parents.len()) {
        return Err(ProtocolError::InvalidCombination(format!(
            "merge takes 2-5 recipes, got {}",
            parents.len()
        )));
    }
    let mut chosen = BTreeSet::new();
    for s in selection {
        let n = normalize_ingredient(s);
        if !parents.iter().any(|p| p.ingredients.contains(&n)) {
            return Err(ProtocolError::InvalidCombination(format!(
                "`{n}` is in none of the merged recipes"
            )));
        }
        chosen.insert(n);
    }
    if chosen.is_empty() {
        return Err(ProtocolError::InvalidCombination("empty ingredient selection".into()));
    }
    let names: Vec<&str> = parents.iter().map(|p| p.name.as_str()).collect();
    Ok(Recipe {
        name: format!("merge({})", names.join(", ")),
        ingredients: chosen,
    })
}

/// Exact no-invention optimum: the best single knowledge-base recipe.
pub fn uncreative_max_dessert<S: Scalar>(kb: &[Recipe], goal: &Recipe) -> S {
    let mut best = S::from_ratio(0, 1);
    for r in kb {
        let s: S = score_recipe(Some(r), goal);
        if s > best {
            best = s;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submit {
    pub recipe: RefId,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Merge {
    pub parents: Vec<RefId>,
    pub selection: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dessert;

impl Domain for Dessert {
    const KIND: DomainKind = DomainKind::Dessert;
    const KB_RANGE: (usize, usize) = (3, MAX_KB);

    type Setting = ();
    type Element = Recipe;
    type Goal = Recipe;
    type Submission = Option<Recipe>;
    type Action = Submit;
    type Combination = Merge;

    fn null_submission(_: &()) -> Option<Recipe> {
        None
    }

    fn apply(_: &(), _: &Recipe, current: &mut Option<Recipe>, kb: Kb<'_, Self>, a: &Submit) -> Result<(), ProtocolError> {
        *current = Some(kb.get(a.recipe)?.clone());
        Ok(())
    }

    fn combine(_: &(), kb: Kb<'_, Self>, m: &Merge) -> Result<Recipe, ProtocolError> {
        let parents = m
            .parents
            .iter()
            .map(|&r| kb.get(r).map_err(|e| ProtocolError::InvalidCombination(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        merge(&parents, &m.selection)
    }

    fn score(_: &(), current: &Option<Recipe>, goal: &Recipe) -> f64 {
        score_recipe(current.as_ref(), goal)
    }

    fn summarize(r: &Recipe) -> String {
        let list: Vec<&str> = r.ingredients.iter().map(String::as_str).collect();
        format!("recipe {} ({})", r.name, list.join(", "))
    }

    fn uncreative_max(problem: &Problem<Self>) -> Baseline {
        Baseline {
            value: uncreative_max_dessert(&problem.initial_kb, &problem.goal),
            exact: true,
        }
    }

    fn difficulty_key(problem: &Problem<Self>) -> u64 {
        problem.initial_kb.len() as u64
    }
}

/// A recipe collection to draw problems from.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub recipes: Vec<Recipe>,
}

#[derive(Deserialize)]
struct CorpusFile {
    recipes: Vec<Recipe>,
}

impl Corpus {
    pub fn bundled() -> Corpus {
        Corpus::from_json(BUNDLED_CORPUS).expect("bundled corpus is valid")
    }

    /// Parses `{"recipes": [{"name": .., "ingredients": [..]}, ..]}`.
    /// Recipes must have 2-15 ingredients and distinct names.
    pub fn from_json(text: &str) -> Result<Corpus, GenerationError> {
        let file: CorpusFile =
            serde_json::from_str(text).map_err(|e| GenerationError::Input(format!("corpus: {e}")))?;
        let mut names = BTreeSet::new();
        for r in &file.recipes {
            if !(2..=15).contains(&r.ingredients.len()) {
                return Err(GenerationError::Input(format!(
                    "corpus recipe `{}` has {} ingredients, expected 2-15",
                    r.name,
                    r.ingredients.len()
                )));
            }
            if !names.insert(r.name.clone()) {
                return Err(GenerationError::Input(format!("duplicate recipe `{}`", r.name)));
            }
        }
        Ok(Corpus { recipes: file.recipes })
    }

    pub fn get(&self, name: &str) -> Option<&Recipe> {
        self.recipes.iter().find(|r| r.name == name)
    }
}

struct Draft {
    goal: Recipe,
    cover: Vec<usize>,
    kb: Vec<usize>,
}

/// Randomized greedy cover of the goal's ingredients by other recipes:
/// each step picks uniformly among the three candidates that cover the
/// most still-uncovered ingredients.
fn try_dessert(corpus: &Corpus, rng: &mut Rng) -> Option<Draft> {
    let gi = rng.below(corpus.recipes.len());
    let goal = &corpus.recipes[gi];
    let others: Vec<usize> = (0..corpus.recipes.len())
        .filter(|&i| i != gi && corpus.recipes[i].ingredients != goal.ingredients)
        .collect();
    let useful: Vec<usize> = others
        .iter()
        .copied()
        .filter(|&i| !corpus.recipes[i].ingredients.is_disjoint(&goal.ingredients))
        .collect();

    let mut uncovered: BTreeSet<&String> = goal.ingredients.iter().collect();
    let mut cover: Vec<usize> = Vec::new();
    while !uncovered.is_empty() {
        let mut gains: Vec<(usize, usize)> = useful
            .iter()
            .filter(|i| !cover.contains(i))
            .map(|&i| (corpus.recipes[i].ingredients.iter().filter(|x| uncovered.contains(x)).count(), i))
            .filter(|&(g, _)| g > 0)
            .collect();
        if gains.is_empty() {
            return None;
        }
        gains.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let pick = gains[rng.below(gains.len().min(3))].1;
        for x in &corpus.recipes[pick].ingredients {
            uncovered.remove(x);
        }
        cover.push(pick);
    }
    while cover.len() < 3 {
        let extra = *rng.choose(&useful);
        if !cover.contains(&extra) {
            cover.push(extra);
        }
    }

    // Half the problems stay small; the rest get a long tail of distractors.
    let max_kb = MAX_KB.min(others.len());
    let target = if rng.chance(0.5) {
        cover.len() + rng.range(0, 2)
    } else {
        let span = (max_kb as f64 / cover.len() as f64).ln();
        (cover.len() as f64 * (span * rng.unit()).exp()).round() as usize
    }
    .clamp(cover.len(), max_kb);
    if cover.len() > max_kb {
        return None;
    }
    let mut kb = cover.clone();
    let pool: Vec<usize> = others.iter().copied().filter(|i| !cover.contains(i)).collect();
    for j in rng.sample_indices(pool.len(), target - cover.len()) {
        kb.push(pool[j]);
    }
    rng.shuffle(&mut kb);
    Some(Draft {
        goal: goal.clone(),
        cover,
        kb,
    })
}

/// Chained merges over the cover (at most five parents each), keeping only
/// goal ingredients, then submit.
fn oracle_script(corpus: &Corpus, d: &Draft) -> Vec<Step<Dessert>> {
    let ref_of = |ci: usize| RefId::new(d.kb.iter().position(|&k| k == ci).expect("cover in kb"));
    let mut script = Vec::new();
    let mut acc: Option<(RefId, BTreeSet<String>)> = None;
    let mut next_ref = d.kb.len();
    let mut rest = d.cover.as_slice();
    while !rest.is_empty() {
        let room = if acc.is_some() { 4 } else { 5 };
        let (group, tail) = rest.split_at(rest.len().min(room));
        rest = tail;
        let mut parents = Vec::new();
        let mut pool = BTreeSet::new();
        if let Some((r, ings)) = &acc {
            parents.push(*r);
            pool.extend(ings.iter().cloned());
        }
        for &ci in group {
            parents.push(ref_of(ci));
            pool.extend(corpus.recipes[ci].ingredients.iter().cloned());
        }
        let selection: BTreeSet<String> = pool.intersection(&d.goal.ingredients).cloned().collect();
        script.push(Step::Combine(Merge {
            parents,
            selection: selection.iter().cloned().collect(),
        }));
        acc = Some((RefId::new(next_ref), selection));
        next_ref += 1;
    }
    let (last, _) = acc.expect("cover is non-empty");
    script.push(Step::Apply(Submit { recipe: last }));
    script
}

impl Generator for Dessert {
    type Library = Corpus;

    fn build_library(_seed: u64, _: &GenParams) -> Result<Corpus, GenerationError> {
        Ok(Corpus::bundled())
    }

    fn generate_one(corpus: &Corpus, _: &GenParams, seed: u64) -> Result<Problem<Self>, GenerationError> {
        if corpus.recipes.len() < MIN_CORPUS {
            return Err(GenerationError::Input(format!(
                "corpus has {} recipes, need at least {MIN_CORPUS}",
                corpus.recipes.len()
            )));
        }
        let mut rng = Rng::new(seed);
        let draft = resample(1_000, "ingredient cover", || try_dessert(corpus, &mut rng))?;
        let oracle = oracle_script(corpus, &draft);
        let mut problem = Problem {
            id: String::new(),
            difficulty_rank: 0,
            gen_seed: seed,
            setting: (),
            initial_kb: draft.kb.iter().map(|&i| corpus.recipes[i].clone()).collect(),
            goal: draft.goal,
            oracle,
            baseline: Baseline { value: 0.0, exact: true },
        };
        problem.baseline = Dessert::uncreative_max(&problem);
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn corpus_recipe(name: &str) -> Recipe {
        Corpus::bundled().get(name).cloned().unwrap()
    }

    #[test]
    fn worked_recipes_are_bundled_verbatim() {
        let muffins = corpus_recipe("banana muffins");
        assert_eq!(
            muffins.ingredients,
            ["bananas", "flour", "eggs", "milk", "sugar"].iter().map(|s| s.to_string()).collect()
        );
        let pound = corpus_recipe("pound cake");
        assert_eq!(score_recipe::<Ratio<i64>>(Some(&muffins), &pound), Ratio::new(3, 7));
    }

    #[test]
    fn merge_reproduces_pound_cake() {
        let parents = [
            corpus_recipe("banana muffins"),
            corpus_recipe("vanilla wafer cake"),
            corpus_recipe("treacle tart"),
        ];
        let refs: Vec<&Recipe> = parents.iter().collect();
        let sel: Vec<String> = ["butter", "sugar", "eggs", "flour", "vanilla essence"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let merged = merge(&refs, &sel).unwrap();
        assert_eq!(merged.ingredients, corpus_recipe("pound cake").ingredients);
        assert_eq!(merged.name, "merge(banana muffins, vanilla wafer cake, treacle tart)");
    }

    #[test]
    fn merge_rejections() {
        let r = corpus_recipe("treacle tart");
        let all: Vec<String> = r.ingredients.iter().cloned().collect();
        assert_eq!(merge(&[&r, &r], &all).unwrap().ingredients, r.ingredients);
        assert!(merge(&[&r, &r], &["saffron".to_string()]).is_err());
        assert!(merge(&[&r, &r], &[]).is_err());
        assert!(merge(&[&r], &all).is_err());
        assert!(merge(&[&r, &r, &r, &r, &r, &r], &all).is_err());
        // Selection is normalized before the coverage check.
        assert!(merge(&[&r, &r], &["  Butter ".to_string()]).is_ok());
    }

    #[test]
    fn recipe_normalization_and_duplicates() {
        let r = Recipe::new("x", ["  Flour", "SUGAR "]).unwrap();
        assert!(r.ingredients.contains("flour") && r.ingredients.contains("sugar"));
        assert!(Recipe::new("x", ["flour", "Flour"]).is_err());
        assert!(Recipe::new("x", []).is_err());
    }

    #[test]
    fn corpus_constraints() {
        let c = Corpus::bundled();
        assert!(c.recipes.len() >= MIN_CORPUS);
        assert!(Corpus::from_json(r#"{"recipes":[{"name":"a","ingredients":["x"]}]}"#).is_err());
    }

    fn arb_set() -> impl Strategy<Value = BTreeSet<String>> {
        proptest::collection::btree_set((0u8..16).prop_map(|i| format!("i{i}")), 1..=10)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn jaccard_matches_set_arithmetic(a in arb_set(), b in arb_set()) {
            let ra = Recipe { name: "a".into(), ingredients: a.clone() };
            let rb = Recipe { name: "b".into(), ingredients: b.clone() };
            let inter = a.intersection(&b).count() as i64;
            let union = a.union(&b).count() as i64;
            let got: Ratio<i64> = score_recipe(Some(&ra), &rb);
            prop_assert_eq!(got, Ratio::new(inter, union));
            prop_assert_eq!(got, score_recipe::<Ratio<i64>>(Some(&rb), &ra));
            prop_assert_eq!(got == Ratio::from_integer(1), a == b);
        }
    }
}
