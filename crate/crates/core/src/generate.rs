//! Seeded, order-independent suite generation shared by all domains.

use crate::error::GenerationError;
use crate::image::CanvasSize;
use crate::protocol::{Domain, Problem};
use crate::rng::sub_seed;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sub-seed index reserved for a domain's shared library.
const LIBRARY_INDEX: u64 = u64::MAX;

/// Knobs shared by every generator. Only the visual domains read `canvas`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GenParams {
    pub canvas: CanvasSize,
}

/// A domain that can synthesize problems.
pub trait Generator: Domain {
    /// Per-suite shared material (vocabulary, sprite library, corpus...).
    type Library: Send + Sync;

    fn build_library(seed: u64, params: &GenParams) -> Result<Self::Library, GenerationError>;

    /// One problem from its own seed. The returned problem must already be
    /// solvable by its oracle script and carry its cached baseline; `id`
    /// and `difficulty_rank` are assigned by the suite driver.
    fn generate_one(
        library: &Self::Library,
        params: &GenParams,
        seed: u64,
    ) -> Result<Problem<Self>, GenerationError>;
}

pub fn domain_seed<D: Domain>(master_seed: u64) -> u64 {
    sub_seed(master_seed, D::KIND.index())
}

pub fn library_for<D: Generator>(master_seed: u64, params: &GenParams) -> Result<D::Library, GenerationError> {
    D::build_library(sub_seed(domain_seed::<D>(master_seed), LIBRARY_INDEX), params)
}

/// Generates `count` problems with an explicit library, sorted by
/// difficulty key ascending; ties keep generation order.
pub fn generate_with_library<D: Generator>(
    library: &D::Library,
    master_seed: u64,
    count: usize,
    params: &GenParams,
) -> Result<Vec<Problem<D>>, GenerationError> {
    if count == 0 {
        return Err(GenerationError::Input("count must be at least 1".into()));
    }
    let dseed = domain_seed::<D>(master_seed);
    let mut problems = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut p = D::generate_one(library, params, sub_seed(dseed, i))?;
            p.difficulty_rank = D::difficulty_key(&p);
            Ok(p)
        })
        .collect::<Result<Vec<_>, GenerationError>>()?;
    problems.sort_by_key(|p| p.difficulty_rank);
    for (pos, p) in problems.iter_mut().enumerate() {
        p.id = format!("{}-{:04}", D::KIND, pos);
    }
    Ok(problems)
}

pub fn generate_suite<D: Generator>(
    master_seed: u64,
    count: usize,
    params: &GenParams,
) -> Result<Vec<Problem<D>>, GenerationError> {
    let library = library_for::<D>(master_seed, params)?;
    generate_with_library(&library, master_seed, count, params)
}

/// Retries `attempt` with fresh draws from `rng` until it yields a value.
pub(crate) fn resample<T>(
    attempts: usize,
    what: &str,
    mut attempt: impl FnMut() -> Option<T>,
) -> Result<T, GenerationError> {
    for _ in 0..attempts {
        if let Some(v) = attempt() {
            return Ok(v);
        }
    }
    Err(GenerationError::Exhausted {
        attempts,
        reason: what.to_string(),
    })
}
