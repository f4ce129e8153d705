use crib_core::agents::Evolve;
use crib_core::image::{CanvasSize, Color};
use crib_core::language::{sentence, AddWord, Concat, Language};
use crib_core::painting::{pixel_for, Mix, MixMode, Paint};
use crib_core::protocol::{open_session, Baseline, Problem, Provenance, Step};
use crib_core::rng::Rng;
use crib_core::{AnyProblem, DomainKind, ProtocolError, RefId, Suite};
use std::fmt::Debug;
use std::sync::OnceLock;

fn suite() -> &'static Suite {
    static SUITE: OnceLock<Suite> = OnceLock::new();
    SUITE.get_or_init(|| Suite::generate(&DomainKind::ALL, 7, 6, CanvasSize::new(32, 32)).unwrap())
}

fn r(s: &str) -> RefId {
    s.parse().unwrap()
}

/// Random walk with occasional inventions, checking the session contract
/// after every step, then a replay of the recorded script.
fn exercise<D: Evolve>(p: &Problem<D>, seed: u64)
where
    D::Submission: PartialEq + Debug,
{
    let mut rng = Rng::new(seed);
    let null = open_session(p, 10).unwrap().score().unwrap();
    let mut s = open_session(p, 1000).unwrap();
    let initial = s.kb_listing();
    assert_eq!(initial.len(), p.initial_kb.len());
    assert!(initial.iter().all(|e| e.provenance == Provenance::Initial));

    let mut script: Vec<Step<D>> = Vec::new();
    let mut last = 0.0;
    for i in 0..40 {
        if i % 5 == 4 {
            let genome = D::random_genome(s.setting(), s.kb(), &mut rng);
            if let Some(gene) = genome.first() {
                if let Some(c) = D::invent(s.setting(), s.kb(), gene, &mut rng) {
                    let before = s.kb_listing().len();
                    match s.combine(c.clone()) {
                        Ok(id) => {
                            assert_eq!(id.to_string(), format!("k{before}"));
                            let listing = s.kb_listing();
                            assert_eq!(listing.last().unwrap().provenance, Provenance::Invented);
                            script.push(Step::Combine(c));
                        }
                        Err(ProtocolError::InvalidCombination(_)) => {
                            assert_eq!(s.kb_listing().len(), before);
                        }
                        Err(e) => panic!("unexpected {e}"),
                    }
                }
            }
        }
        let steps = D::random_move(s.setting(), s.kb(), s.submission(), &mut rng);
        s.replay(&steps).unwrap();
        script.extend(steps);
        last = s.score().unwrap();
        assert!((0.0..=1.0).contains(&last), "score {last}");
        assert_eq!(s.kb_listing().len() - s.initial_len(), s.combine_calls() as usize);
        assert_eq!(&s.kb_listing()[..initial.len()], &initial[..]);
    }

    let mut again = open_session(p, 10).unwrap();
    again.replay(&script).unwrap();
    assert_eq!(again.score().unwrap(), last);
    assert_eq!(again.kb_listing(), s.kb_listing());
    assert_eq!(again.submission(), s.submission());

    let counters = (s.score_calls(), s.apply_calls(), s.combine_calls());
    let clears = s.clear_calls();
    s.clear();
    let once = s.submission().clone();
    s.clear();
    assert_eq!(s.submission(), &once);
    assert_eq!(s.clear_calls(), clears + 2);
    assert_eq!((s.score_calls(), s.apply_calls(), s.combine_calls()), counters);
    assert_eq!(s.score().unwrap(), null);
}

#[test]
fn session_contract_holds_in_every_domain() {
    for (i, p) in suite().problems.iter().enumerate() {
        let seed = 1000 + i as u64;
        match p {
            AnyProblem::Painting(p) => exercise(p, seed),
            AnyProblem::Language(p) => exercise(p, seed),
            AnyProblem::Photobash(p) => exercise(p, seed),
            AnyProblem::Narrative(p) => exercise(p, seed),
            AnyProblem::Dessert(p) => exercise(p, seed),
        }
    }
}

#[test]
fn null_scores() {
    for p in &suite().problems {
        let null = match p {
            AnyProblem::Painting(p) => {
                let white = crib_core::painting::null_score(&p.goal.canvas);
                let got = open_session(p, 1).unwrap().score().unwrap();
                assert_eq!(got, white);
                got
            }
            AnyProblem::Photobash(p) => open_session(p, 1).unwrap().score().unwrap(),
            AnyProblem::Language(p) => open_session(p, 1).unwrap().score().unwrap(),
            AnyProblem::Narrative(p) => open_session(p, 1).unwrap().score().unwrap(),
            AnyProblem::Dessert(p) => open_session(p, 1).unwrap().score().unwrap(),
        };
        match p.kind() {
            DomainKind::Painting | DomainKind::Photobash => assert!(null > 0.0 && null < 1.0),
            _ => assert_eq!(null, 0.0),
        }
    }
}

#[test]
fn budget_counts_score_calls_only() {
    let AnyProblem::Language(p) = suite().of_domain(DomainKind::Language).next().unwrap() else {
        unreachable!()
    };
    assert_eq!(open_session(p, 0).err(), Some(ProtocolError::InvalidBudget));
    let mut s = open_session(p, 3).unwrap();
    for _ in 0..5 {
        s.apply(&AddWord { word: r("k0") }).unwrap();
        s.clear();
    }
    for _ in 0..3 {
        s.score().unwrap();
    }
    assert_eq!(s.remaining(), 0);
    assert_eq!(s.score(), Err(ProtocolError::BudgetExceeded { budget: 3 }));
    assert_eq!(s.score_calls(), 3);
    assert!(matches!(s.apply(&AddWord { word: r("k0") }), Err(ProtocolError::BudgetExceeded { .. })));
}

fn language_problem(kb: &str, goal: &str) -> Problem<Language> {
    Problem {
        id: "language-test".into(),
        difficulty_rank: 0,
        gen_seed: 0,
        setting: (),
        initial_kb: sentence(kb),
        goal: sentence(goal),
        oracle: vec![],
        baseline: Baseline { value: 0.0, exact: true },
    }
}

#[test]
fn language_session_walkthrough() {
    let p = language_problem("BYXBYW XDWB WA ZZ", "WAZZ BYXBYW XDWB");
    let mut s = open_session(&p, 100).unwrap();
    assert_eq!(s.score().unwrap(), 0.0);
    s.apply(&AddWord { word: r("k2") }).unwrap();
    assert_eq!(s.submission(), &sentence("WA"));
    assert_eq!(
        s.apply(&AddWord { word: r("k9") }),
        Err(ProtocolError::InvalidReference("k9".into()))
    );
    assert!("nonexistent".parse::<RefId>().is_err());

    let wazz = s.combine(Concat { parts: vec![r("k2"), r("k3")] }).unwrap();
    assert_eq!(s.kb().get(wazz).unwrap().as_str(), "WAZZ");
    let listing = s.kb_listing();
    assert_eq!(listing.len(), 5);
    assert_eq!(listing[4].provenance, Provenance::Invented);
    assert_eq!(s.kb_listing(), listing);
    assert!(listing.iter().all(|e| !e.summary.contains("BYXBYW XDWB")));

    let four = Concat { parts: vec![r("k2"), r("k3"), r("k2"), r("k3")] };
    assert!(matches!(s.combine(four), Err(ProtocolError::InvalidCombination(_))));
    assert_eq!(s.kb_listing().len(), 5);

    s.clear();
    for id in [wazz, r("k0"), r("k1")] {
        s.apply(&AddWord { word: id }).unwrap();
    }
    assert_eq!(s.score().unwrap(), 1.0);
    s.clear();
    assert_eq!(s.score().unwrap(), 0.0);
}

#[test]
fn painting_paint_and_mix() {
    let AnyProblem::Painting(p) = suite().of_domain(DomainKind::Painting).next().unwrap() else {
        unreachable!()
    };
    let mut p = p.clone();
    p.initial_kb = vec![Color::new(255, 0, 0), Color::new(0, 0, 255)];
    let mut s = open_session(&p, 10).unwrap();
    s.apply(&Paint { x: 0.5, y: 0.5, color: r("k0") }).unwrap();
    let (x, y) = pixel_for(p.setting, 0.5, 0.5).unwrap();
    assert_eq!(s.submission().get(x, y), Color::new(255, 0, 0));
    assert!(matches!(
        s.apply(&Paint { x: 1.5, y: 0.5, color: r("k0") }),
        Err(ProtocolError::InvalidAction(_))
    ));
    let purple = s.combine(Mix { a: r("k0"), b: r("k1"), mode: MixMode::Additive }).unwrap();
    assert_eq!(*s.kb().get(purple).unwrap(), Color::new(255, 0, 255));
    let again = s.combine(Mix { a: r("k0"), b: r("k1"), mode: MixMode::Additive }).unwrap();
    assert_eq!(s.kb().get(again).unwrap(), s.kb().get(purple).unwrap());
    assert!(matches!(
        s.combine(Mix { a: r("k0"), b: r("k7"), mode: MixMode::Additive }),
        Err(ProtocolError::InvalidCombination(_))
    ));
    assert_eq!(s.kb_listing().len(), 4);
}
