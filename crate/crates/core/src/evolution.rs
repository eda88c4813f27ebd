//! Population schemes: six-member generational replacement (A) and
//! three-member elitist replacement (B).

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::genome::{encode_melody, Melody};
use crate::variation::{crossover, mutate};

/// A fitness score in `0..=100`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "u8")]
pub struct Rating(u8);

impl Rating {
    pub const MAX: Rating = Rating(100);

    pub fn new(score: i64) -> Result<Self, EvolutionError> {
        if (0..=100).contains(&score) {
            Ok(Self(score as u8))
        } else {
            Err(EvolutionError::ScoreOutOfRange(score))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }
}

impl TryFrom<i64> for Rating {
    type Error = EvolutionError;

    fn try_from(v: i64) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<Rating> for u8 {
    fn from(r: Rating) -> u8 {
        r.0
    }
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvolutionError {
    #[error("score {0} is outside 0..=100")]
    ScoreOutOfRange(i64),
    #[error("individuals {0:?} have no rating")]
    UnratedIndividual(Vec<usize>),
    #[error("scheme {scheme} needs a population of {expected}, found {actual}")]
    WrongSchemeSize {
        scheme: Scheme,
        expected: usize,
        actual: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Six members; the worst two are dropped and every pair of the remaining
    /// four breeds one child. No parent survives.
    A,
    /// Three members; the best two survive unchanged and breed the third.
    B,
}

impl Scheme {
    pub fn population_size(self) -> usize {
        match self {
            Scheme::A => 6,
            Scheme::B => 3,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::A => "a",
            Scheme::B => "b",
        })
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(Scheme::A),
            "b" => Ok(Scheme::B),
            other => Err(format!("unknown scheme {other:?}, expected a or b")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Also mutate every offspring, not only the initial population.
    #[serde(default)]
    pub mutate_offspring: bool,
    pub seed: u64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, seed: u64) -> Self {
        Self {
            scheme,
            mutate_offspring: false,
            seed,
        }
    }
}

/// RNG for the step that produces generation `index`. Each generation draws
/// from its own ChaCha stream so a reloaded session replays identically.
pub fn generation_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    /// Unique within a session; survivors keep theirs.
    pub id: u64,
    pub melody: Melody,
    pub rating: Option<Rating>,
}

impl Individual {
    pub fn new(id: u64, melody: Melody) -> Self {
        Self {
            id,
            melody,
            rating: None,
        }
    }

    pub fn genome(&self) -> crate::genome::Genome {
        encode_melody(&self.melody)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generation {
    pub index: u64,
    pub individuals: Vec<Individual>,
}

impl Generation {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn unrated(&self) -> Vec<usize> {
        self.individuals
            .iter()
            .enumerate()
            .filter(|(_, ind)| ind.rating.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn is_fully_rated(&self) -> bool {
        self.individuals.iter().all(|i| i.rating.is_some())
    }

    fn next_id(&self) -> u64 {
        self.individuals.iter().map(|i| i.id + 1).max().unwrap_or(0)
    }

    pub fn best(&self) -> Option<&Individual> {
        rank(self)
            .ok()
            .and_then(|order| order.first().map(|&i| &self.individuals[i]))
    }
}

/// `size` independent mutations of the base melody, ids `0..size`.
pub fn init_population<R: Rng + ?Sized>(base: &Melody, size: usize, rng: &mut R) -> Generation {
    let individuals = (0..size as u64)
        .map(|id| Individual::new(id, mutate(base, rng)))
        .collect();
    Generation {
        index: 0,
        individuals,
    }
}

/// Positions sorted best-first; equal ratings go to the lower id.
pub fn rank(generation: &Generation) -> Result<Vec<usize>, EvolutionError> {
    let unrated = generation.unrated();
    if !unrated.is_empty() {
        return Err(EvolutionError::UnratedIndividual(unrated));
    }
    let mut order: Vec<usize> = (0..generation.len()).collect();
    order.sort_by_key(|&i| {
        let ind = &generation.individuals[i];
        (std::cmp::Reverse(ind.rating), ind.id)
    });
    Ok(order)
}

fn check_size(generation: &Generation, scheme: Scheme) -> Result<(), EvolutionError> {
    let expected = scheme.population_size();
    if generation.len() != expected {
        return Err(EvolutionError::WrongSchemeSize {
            scheme,
            expected,
            actual: generation.len(),
        });
    }
    Ok(())
}

fn breed<R: Rng + ?Sized>(
    first: &Melody,
    second: &Melody,
    mutate_offspring: bool,
    rng: &mut R,
) -> Melody {
    let outcome = crossover(first, second, rng);
    let child = if rng.gen_bool(0.5) {
        outcome.product_a
    } else {
        outcome.product_b
    };
    if mutate_offspring {
        mutate(&child, rng)
    } else {
        child
    }
}

pub fn evolve_scheme_a<R: Rng + ?Sized>(
    generation: &Generation,
    mutate_offspring: bool,
    rng: &mut R,
) -> Result<Generation, EvolutionError> {
    let order = rank(generation)?;
    check_size(generation, Scheme::A)?;
    let survivors: Vec<&Melody> = order[..4]
        .iter()
        .map(|&i| &generation.individuals[i].melody)
        .collect();
    let first_id = generation.next_id();
    let mut individuals = Vec::with_capacity(6);
    for i in 0..4 {
        for j in i + 1..4 {
            let child = breed(survivors[i], survivors[j], mutate_offspring, rng);
            individuals.push(Individual::new(first_id + individuals.len() as u64, child));
        }
    }
    Ok(Generation {
        index: generation.index + 1,
        individuals,
    })
}

pub fn evolve_scheme_b<R: Rng + ?Sized>(
    generation: &Generation,
    mutate_offspring: bool,
    rng: &mut R,
) -> Result<Generation, EvolutionError> {
    let order = rank(generation)?;
    check_size(generation, Scheme::B)?;
    let mut best = generation.individuals[order[0]].clone();
    let mut second = generation.individuals[order[1]].clone();
    let child = breed(&best.melody, &second.melody, mutate_offspring, rng);
    let child = Individual::new(generation.next_id(), child);
    best.rating = None;
    second.rating = None;
    Ok(Generation {
        index: generation.index + 1,
        individuals: vec![best, second, child],
    })
}

pub fn evolve<R: Rng + ?Sized>(
    generation: &Generation,
    config: &SchemeConfig,
    rng: &mut R,
) -> Result<Generation, EvolutionError> {
    match config.scheme {
        Scheme::A => evolve_scheme_a(generation, config.mutate_offspring, rng),
        Scheme::B => evolve_scheme_b(generation, config.mutate_offspring, rng),
    }
}
