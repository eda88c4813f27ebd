//! Fitness sources.
//!
//! Human ratings arrive through the session API. For headless runs, a
//! deterministic scorer combines a harmonic term (share of sounding ticks
//! that form a consonant interval with the base melody) and a rhythmic term
//! (how smoothly consecutive durations change).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{EvolutionError, Generation, Rating};
use crate::genome::Melody;

/// Interval classes, in semitones mod 12, treated as dissonant.
pub const DISSONANT_INTERVALS: [u8; 5] = [1, 3, 6, 8, 10];

/// Harmonic score when the voices never sound together.
pub const NEUTRAL_HARMONIC_SCORE: f64 = 0.5;

/// Mean jerk (in octaves of duration ratio) at which the rhythmic score
/// reaches zero.
const MAX_MEAN_JERK: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitnessError {
    #[error("weights must be non-negative and sum to 1 (got {0} + {1})")]
    InvalidWeights(f64, f64),
    #[error("line {line}: {message}")]
    Schedule { line: usize, message: String },
    #[error("no scripted ratings for generation {0}")]
    ScheduleExhausted(u64),
    #[error("scripted ratings for generation {generation} have {found} entries, population is {expected}")]
    ScheduleWidth {
        generation: u64,
        expected: usize,
        found: usize,
    },
    #[error("interactive fitness needs a human rater")]
    NeedsHuman,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    harmonic: f64,
    rhythmic: f64,
}

impl ObjectiveWeights {
    pub fn new(harmonic: f64, rhythmic: f64) -> Result<Self, FitnessError> {
        let valid =
            harmonic >= 0.0 && rhythmic >= 0.0 && ((harmonic + rhythmic) - 1.0).abs() < 1e-9;
        if valid {
            Ok(Self { harmonic, rhythmic })
        } else {
            Err(FitnessError::InvalidWeights(harmonic, rhythmic))
        }
    }

    pub fn harmonic(&self) -> f64 {
        self.harmonic
    }

    pub fn rhythmic(&self) -> f64 {
        self.rhythmic
    }
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        Self {
            harmonic: 0.7,
            rhythmic: 0.3,
        }
    }
}

pub fn is_dissonant(a: u8, b: u8) -> bool {
    DISSONANT_INTERVALS.contains(&(a.abs_diff(b) % 12))
}

/// Fraction of ticks where both voices sound and form a consonant interval.
pub fn harmonic_score(counterpoint: &Melody, base: &Melody) -> f64 {
    let (mut sounding, mut consonant) = (0u32, 0u32);
    for (cp, b) in counterpoint
        .tick_pitches()
        .into_iter()
        .zip(base.tick_pitches())
    {
        if let (Some(cp), Some(b)) = (cp, b) {
            sounding += 1;
            if !is_dissonant(cp, b) {
                consonant += 1;
            }
        }
    }
    if sounding == 0 {
        NEUTRAL_HARMONIC_SCORE
    } else {
        f64::from(consonant) / f64::from(sounding)
    }
}

/// `1 - min(1, mean |log2(d[i+1] / d[i])| / 4)` over consecutive durations.
pub fn rhythmic_score(counterpoint: &Melody) -> f64 {
    let ticks: Vec<u32> = counterpoint.events().map(|e| e.ticks()).collect();
    duration_smoothness(&ticks)
}

/// The rhythmic term over a bare duration sequence. Fewer than two
/// durations score 1.
pub fn duration_smoothness(ticks: &[u32]) -> f64 {
    if ticks.len() < 2 {
        return 1.0;
    }
    let total: f64 = ticks
        .windows(2)
        .map(|w| (f64::from(w[1]) / f64::from(w[0])).log2().abs())
        .sum();
    let mean = total / (ticks.len() - 1) as f64;
    1.0 - (mean / MAX_MEAN_JERK).min(1.0)
}

pub fn objective_rating(
    counterpoint: &Melody,
    base: &Melody,
    weights: &ObjectiveWeights,
) -> Rating {
    let blended = weights.harmonic * harmonic_score(counterpoint, base)
        + weights.rhythmic * rhythmic_score(counterpoint);
    let score = (100.0 * blended).round().clamp(0.0, 100.0) as i64;
    Rating::new(score).expect("clamped")
}

/// Ratings read from a plain-text schedule: one line per generation, with
/// one space-separated integer per individual. Blank lines and `#` comments
/// are skipped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ScriptedRatings {
    generations: Vec<Vec<Rating>>,
}

impl ScriptedRatings {
    pub fn new(generations: Vec<Vec<Rating>>) -> Self {
        Self { generations }
    }

    pub fn parse(text: &str) -> Result<Self, FitnessError> {
        let mut generations = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|tok| {
                    let v: i64 = tok.parse().map_err(|_| FitnessError::Schedule {
                        line: n + 1,
                        message: format!("{tok:?} is not an integer"),
                    })?;
                    Rating::new(v).map_err(|e: EvolutionError| FitnessError::Schedule {
                        line: n + 1,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            generations.push(row);
        }
        Ok(Self { generations })
    }

    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }

    pub fn for_generation(&self, index: u64, size: usize) -> Result<Vec<Rating>, FitnessError> {
        let row = self
            .generations
            .get(index as usize)
            .ok_or(FitnessError::ScheduleExhausted(index))?;
        if row.len() != size {
            return Err(FitnessError::ScheduleWidth {
                generation: index,
                expected: size,
                found: row.len(),
            });
        }
        Ok(row.clone())
    }
}

/// Where fitness comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum FitnessSource {
    Interactive,
    Objective(ObjectiveWeights),
    Scripted(ScriptedRatings),
}

impl FitnessSource {
    /// Ratings for every individual of `generation`, in order.
    pub fn rate(
        &self,
        generation: &Generation,
        base: &Melody,
    ) -> Result<Vec<Rating>, FitnessError> {
        match self {
            FitnessSource::Interactive => Err(FitnessError::NeedsHuman),
            FitnessSource::Objective(w) => Ok(generation
                .individuals
                .iter()
                .map(|i| objective_rating(&i.melody, base, w))
                .collect()),
            FitnessSource::Scripted(s) => s.for_generation(generation.index, generation.len()),
        }
    }
}
