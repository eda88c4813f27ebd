//! Rating sessions: a thin state machine over the evolution schemes.
//!
//! Only the latest generation is active. Ratings may be written and
//! overwritten there until the user evolves (which needs every individual
//! rated) or completes (allowed at any time). A completed session is frozen.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{
    evolve, generation_rng, init_population, rank, EvolutionError, Generation, Individual, Rating,
    SchemeConfig,
};
use crate::fitness::{FitnessError, FitnessSource};
use crate::genome::Melody;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SessionError {
    #[error("score {0} is outside 0..=100")]
    ScoreOutOfRange(i64),
    #[error("session is complete")]
    SessionComplete,
    #[error("generation {requested} is not the current generation {current}")]
    StaleGeneration { requested: u64, current: u64 },
    #[error("no generation {0}")]
    NoSuchGeneration(u64),
    #[error("no individual {index} in a generation of {size}")]
    BadIndex { index: usize, size: usize },
    #[error("individuals {0:?} are not rated yet")]
    UnratedIndividual(Vec<usize>),
    #[error(transparent)]
    Evolution(EvolutionError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
}

impl From<EvolutionError> for SessionError {
    fn from(e: EvolutionError) -> Self {
        match e {
            EvolutionError::ScoreOutOfRange(s) => SessionError::ScoreOutOfRange(s),
            EvolutionError::UnratedIndividual(v) => SessionError::UnratedIndividual(v),
            other => SessionError::Evolution(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "lowercase")]
pub enum SessionStatus {
    Active,
    /// Frozen; `individual` is the chosen id in the last generation.
    Complete {
        individual: u64,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub id: String,
    pub base: Melody,
    pub config: SchemeConfig,
    pub generations: Vec<Generation>,
    pub status: SessionStatus,
}

impl Session {
    /// Starts a session with generation 0 mutated from `base`.
    pub fn create(id: impl Into<String>, base: Melody, config: SchemeConfig) -> Self {
        let mut rng = generation_rng(config.seed, 0);
        let first = init_population(&base, config.scheme.population_size(), &mut rng);
        Self {
            id: id.into(),
            base,
            config,
            generations: vec![first],
            status: SessionStatus::Active,
        }
    }

    pub fn current(&self) -> &Generation {
        self.generations
            .last()
            .expect("a session always has a generation")
    }

    pub fn generation(&self, index: u64) -> Result<&Generation, SessionError> {
        self.generations
            .get(index as usize)
            .ok_or(SessionError::NoSuchGeneration(index))
    }

    pub fn is_complete(&self) -> bool {
        matches!(self.status, SessionStatus::Complete { .. })
    }

    fn ensure_active(&self) -> Result<(), SessionError> {
        if self.is_complete() {
            Err(SessionError::SessionComplete)
        } else {
            Ok(())
        }
    }

    fn check_index(&self, index: usize) -> Result<(), SessionError> {
        let size = self.current().len();
        if index < size {
            Ok(())
        } else {
            Err(SessionError::BadIndex { index, size })
        }
    }

    /// Stores (or overwrites) a rating in the current generation.
    pub fn rate(
        &mut self,
        generation: u64,
        index: usize,
        score: i64,
    ) -> Result<&Generation, SessionError> {
        self.ensure_active()?;
        let current = self.current().index;
        if generation != current {
            return if generation < current {
                Err(SessionError::StaleGeneration {
                    requested: generation,
                    current,
                })
            } else {
                Err(SessionError::NoSuchGeneration(generation))
            };
        }
        self.check_index(index)?;
        let rating = Rating::new(score)?;
        let gen = self.generations.last_mut().expect("non-empty");
        gen.individuals[index].rating = Some(rating);
        Ok(gen)
    }

    /// Advances to the next generation; every current individual must be
    /// rated.
    pub fn evolve(&mut self) -> Result<&Generation, SessionError> {
        self.ensure_active()?;
        let current = self.current();
        let unrated = current.unrated();
        if !unrated.is_empty() {
            return Err(SessionError::UnratedIndividual(unrated));
        }
        let mut rng = generation_rng(self.config.seed, current.index + 1);
        let next = evolve(current, &self.config, &mut rng)?;
        self.generations.push(next);
        Ok(self.current())
    }

    /// Freezes the session with `index` of the current generation as the
    /// final melody. Unrated individuals are fine.
    pub fn complete(&mut self, index: usize) -> Result<&Individual, SessionError> {
        self.ensure_active()?;
        self.check_index(index)?;
        let id = self.current().individuals[index].id;
        self.status = SessionStatus::Complete { individual: id };
        Ok(&self.current().individuals[index])
    }

    pub fn final_individual(&self) -> Option<&Individual> {
        match self.status {
            SessionStatus::Active => None,
            SessionStatus::Complete { individual } => self
                .current()
                .individuals
                .iter()
                .find(|i| i.id == individual),
        }
    }
}

/// One row of a headless fitness trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub generation: u64,
    pub best: Rating,
    pub mean: f64,
    pub best_so_far: Rating,
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut out = String::from("generation,best,mean,best_so_far\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{:.3},{}",
            r.generation, r.best, r.mean, r.best_so_far
        )
        .unwrap();
    }
    out
}

#[derive(Debug, Clone)]
pub struct HeadlessRun {
    /// Fully rated history, completed on the best of the final generation.
    pub session: Session,
    pub trace: Vec<TraceRow>,
    /// Highest-rated individual seen in any generation (earliest on ties).
    pub best: Individual,
}

/// Evolves `generations` steps, rating every generation with `rater`.
pub fn run_headless(
    id: impl Into<String>,
    base: Melody,
    config: SchemeConfig,
    rater: &FitnessSource,
    generations: u64,
) -> Result<HeadlessRun, SessionError> {
    let mut session = Session::create(id, base, config);
    let mut trace = Vec::with_capacity(generations as usize + 1);
    let mut best: Option<Individual> = None;
    loop {
        let ratings = rater.rate(session.current(), &session.base)?;
        let index = session.current().index;
        for (i, r) in ratings.iter().enumerate() {
            session.rate(index, i, i64::from(r.value()))?;
        }
        let current = session.current();
        let top = &current.individuals[rank(current)?[0]];
        if best.as_ref().is_none_or(|b| top.rating > b.rating) {
            best = Some(top.clone());
        }
        let sum: u32 = ratings.iter().map(|r| u32::from(r.value())).sum();
        trace.push(TraceRow {
            generation: index,
            best: top.rating.expect("rated"),
            mean: f64::from(sum) / ratings.len() as f64,
            best_so_far: best.as_ref().and_then(|b| b.rating).expect("rated"),
        });
        if index >= generations {
            break;
        }
        session.evolve()?;
    }
    let winner = rank(session.current())?[0];
    session.complete(winner)?;
    Ok(HeadlessRun {
        session,
        trace,
        best: best.expect("at least one generation"),
    })
}
