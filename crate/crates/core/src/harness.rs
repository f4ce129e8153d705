//! Running agents over suites, normalized scoring, verification and
//! report tables.

use crate::agents::{Agent, RunRecord};
use crate::error::SuiteError;
use crate::protocol::DomainKind;
use crate::scalar::Scalar;
use crate::suite::{read_tree, CheckFailure, Suite};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

pub const RESULTS_VERSION: u32 = 1;

/// `(s_a - s_u) / (n - s_u)`: 0 at the no-invention baseline, 1 when every
/// problem is solved. `None` when `s_u >= n`.
pub fn normalize<S: Scalar>(s_a: S, s_u: S, n: S) -> Option<S> {
    if !(s_u < n) {
        return None;
    }
    Some((s_a - s_u) / (n - s_u))
}

/// Mean of the per-domain normalized scores.
pub fn aggregate<S: Scalar>(domain_scores: &[S]) -> Option<S> {
    if domain_scores.is_empty() {
        return None;
    }
    let sum = domain_scores.iter().fold(S::zero(), |acc, &s| acc + s);
    Some(sum / S::from_usize(domain_scores.len())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemResult {
    pub id: String,
    pub domain: DomainKind,
    pub raw: f64,
    pub baseline: f64,
    pub baseline_exact: bool,
    pub score_calls: u64,
    pub apply_calls: u64,
    /// Knowledge-base growth.
    pub combine_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub domain: DomainKind,
    pub problems: usize,
    pub raw_mean: f64,
    /// Sum of raw agent scores.
    pub s_a: f64,
    /// Sum of no-invention baselines.
    pub s_u: f64,
    pub normalized: f64,
    pub mean_score_calls: f64,
    pub mean_kb_growth: f64,
    /// Whether every baseline in the domain is exact.
    pub baseline_exact: bool,
}

/// Versioned results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Results {
    pub format_version: u32,
    pub agent: String,
    pub budget: u64,
    pub suite_seed: u64,
    pub problems: Vec<ProblemResult>,
    pub domains: Vec<DomainSummary>,
    pub total: f64,
}

impl Results {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Results, SuiteError> {
        let r: Results = serde_json::from_str(text).map_err(|e| SuiteError::Format(format!("results: {e}")))?;
        if r.format_version != RESULTS_VERSION {
            return Err(SuiteError::Format(format!(
                "results format version {}, expected {RESULTS_VERSION}",
                r.format_version
            )));
        }
        Ok(r)
    }

    pub fn domain(&self, kind: DomainKind) -> Option<&DomainSummary> {
        self.domains.iter().find(|d| d.domain == kind)
    }
}

/// Per-domain and total scores from per-problem records, domains in
/// `order`.
pub fn summarize(order: &[DomainKind], problems: &[ProblemResult]) -> Result<(Vec<DomainSummary>, f64), SuiteError> {
    let mut domains = Vec::new();
    for &kind in order {
        let rows: Vec<&ProblemResult> = problems.iter().filter(|p| p.domain == kind).collect();
        if rows.is_empty() {
            continue;
        }
        let n = rows.len() as f64;
        let s_a: f64 = rows.iter().map(|r| r.raw).sum();
        let s_u: f64 = rows.iter().map(|r| r.baseline).sum();
        let normalized = normalize(s_a, s_u, n).ok_or_else(|| {
            SuiteError::Invariant(format!("{kind}: baseline sum {s_u} reaches problem count {n}"))
        })?;
        domains.push(DomainSummary {
            domain: kind,
            problems: rows.len(),
            raw_mean: s_a / n,
            s_a,
            s_u,
            normalized,
            mean_score_calls: rows.iter().map(|r| r.score_calls as f64).sum::<f64>() / n,
            mean_kb_growth: rows.iter().map(|r| r.combine_calls as f64).sum::<f64>() / n,
            baseline_exact: rows.iter().all(|r| r.baseline_exact),
        });
    }
    let total = aggregate(&domains.iter().map(|d| d.normalized).collect::<Vec<_>>())
        .ok_or_else(|| SuiteError::Format("suite has no problems".into()))?;
    Ok((domains, total))
}

/// Runs `agent` on every problem with `parallel` worker threads. Output
/// order and content do not depend on `parallel`.
pub fn run_suite(suite: &Suite, agent: &Agent, budget: u64, parallel: usize) -> Result<Results, SuiteError> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| SuiteError::Format(format!("thread pool: {e}")))?;
    let records: Vec<RunRecord> = pool.install(|| {
        suite
            .problems
            .par_iter()
            .map(|p| p.run(agent, budget).map_err(|e| SuiteError::Format(format!("{}: {e}", p.id()))))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let problems: Vec<ProblemResult> = suite
        .problems
        .iter()
        .zip(records)
        .map(|(p, r)| ProblemResult {
            id: p.id().to_string(),
            domain: p.kind(),
            raw: r.raw,
            baseline: p.baseline().value,
            baseline_exact: p.baseline().exact,
            score_calls: r.score_calls,
            apply_calls: r.apply_calls,
            combine_calls: r.combine_calls,
        })
        .collect();
    let (domains, total) = summarize(&suite.manifest.domains, &problems)?;
    Ok(Results {
        format_version: RESULTS_VERSION,
        agent: agent.name(),
        budget,
        suite_seed: suite.manifest.master_seed,
        problems,
        domains,
        total,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub problems: usize,
    pub failures: Vec<CheckFailure>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every problem of the suite in `dir`, then regenerates the suite
/// from its manifest and compares the files byte for byte.
pub fn verify_suite(dir: &Path, parallel: usize) -> Result<VerifyReport, SuiteError> {
    use rayon::prelude::*;
    let suite = Suite::read(dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallel.max(1))
        .build()
        .map_err(|e| SuiteError::Format(format!("thread pool: {e}")))?;
    let mut failures: Vec<CheckFailure> =
        pool.install(|| suite.problems.par_iter().flat_map_iter(|p| p.check()).collect());

    for &kind in &suite.manifest.domains {
        let ranks: Vec<(&str, u64)> = suite.of_domain(kind).map(|p| (p.id(), p.difficulty_rank())).collect();
        for w in ranks.windows(2) {
            if w[1].1 < w[0].1 {
                failures.push(CheckFailure {
                    problem: w[1].0.to_string(),
                    check: "difficulty-order",
                    detail: format!("rank {} follows rank {}", w[1].1, w[0].1),
                });
            }
        }
    }

    let m = &suite.manifest;
    let fresh = pool.install(|| Suite::generate(&m.domains, m.master_seed, m.count, m.canvas))?;
    let expected = fresh.render();
    let actual = read_tree(dir)?;
    let mut paths: Vec<&std::path::PathBuf> = expected.keys().chain(actual.keys()).collect();
    paths.sort();
    paths.dedup();
    for path in paths {
        let detail = match (expected.get(path), actual.get(path)) {
            (Some(a), Some(b)) if a == b => continue,
            (Some(_), Some(_)) => "differs from regenerated suite",
            (Some(_), None) => "missing",
            (None, Some(_)) => "not produced by the generator",
            (None, None) => unreachable!(),
        };
        failures.push(CheckFailure {
            problem: path.display().to_string(),
            check: "determinism",
            detail: detail.into(),
        });
    }
    Ok(VerifyReport {
        problems: suite.problems.len(),
        failures,
    })
}

/// A grid with the five domains and the total as columns, raw mean,
/// normalized score, score calls and knowledge-base growth as rows.
pub fn report(results: &[Results], markdown: bool) -> String {
    let mut header = vec!["agent".to_string(), "row".to_string()];
    header.extend(DomainKind::ALL.iter().map(|d| d.name().to_string()));
    header.push("total".into());
    let mut rows: Vec<Vec<String>> = Vec::new();
    for r in results {
        let cells = |f: &dyn Fn(&DomainSummary) -> f64, total: Option<f64>| -> Vec<String> {
            let mut v: Vec<String> = DomainKind::ALL
                .iter()
                .map(|&k| r.domain(k).map_or("-".into(), |d| format!("{:.2}", f(d))))
                .collect();
            v.push(total.map_or("-".into(), |t| format!("{t:.2}")));
            v
        };
        let per = r.domains.len().max(1) as f64;
        let raw_total = r.domains.iter().map(|d| d.raw_mean).sum::<f64>() / per;
        let base_total = r.domains.iter().map(|d| d.s_u / d.problems as f64).sum::<f64>() / per;
        let named: [(&str, Vec<String>); 5] = [
            ("raw mean", cells(&|d| d.raw_mean, Some(raw_total))),
            ("uncreative max", cells(&|d| d.s_u / d.problems as f64, Some(base_total))),
            ("normalized", cells(&|d| d.normalized, Some(r.total))),
            ("score calls", cells(&|d| d.mean_score_calls, None)),
            ("kb growth", cells(&|d| d.mean_kb_growth, None)),
        ];
        for (name, mut cells) in named {
            let mut row = vec![r.agent.clone(), name.to_string()];
            row.append(&mut cells);
            rows.push(row);
        }
    }
    let mut out = String::new();
    if markdown {
        let line = |cells: &[String]| format!("| {} |", cells.join(" | "));
        writeln!(out, "{}", line(&header)).unwrap();
        writeln!(out, "|{}", "---|".repeat(header.len())).unwrap();
        for r in &rows {
            writeln!(out, "{}", line(r)).unwrap();
        }
    } else {
        let mut widths: Vec<usize> = header.iter().map(String::len).collect();
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        };
        writeln!(out, "{}", line(&header)).unwrap();
        for r in &rows {
            writeln!(out, "{}", line(r)).unwrap();
        }
    }
    let approx: Vec<&str> = results
        .iter()
        .flat_map(|r| r.domains.iter())
        .filter(|d| !d.baseline_exact)
        .map(|d| d.domain.name())
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if !approx.is_empty() {
        writeln!(out, "\nApproximate (lower-bound) baselines: {}", approx.join(", ")).unwrap();
    }
    out
}

/// Counts of failures by check name.
pub fn failure_counts(report: &VerifyReport) -> BTreeMap<&'static str, usize> {
    let mut m = BTreeMap::new();
    for f in &report.failures {
        *m.entry(f.check).or_insert(0) += 1;
    }
    m
}
