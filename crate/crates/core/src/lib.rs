//! Evolves eight-measure counterpoint melodies against a fixed base melody.
//!
//! Individuals are variable-length bitstrings (10 bits per note event) that
//! must decode to eight 4/4 measures. New generations come from one-point
//! crossover with repair; the first generation is a set of musical
//! mutations of the base melody. Fitness is either entered by a person
//! through a [`session::Session`] or computed by the objective scorer in
//! [`fitness`].

pub mod evolution;
pub mod fitness;
pub mod genome;
pub mod melody_io;
pub mod session;
pub mod variation;

pub use evolution::{Generation, Individual, Rating, Scheme, SchemeConfig};
pub use fitness::{FitnessSource, ObjectiveWeights, ScriptedRatings};
pub use genome::{Duration, Genome, Key, Measure, Melody, NoteEvent, Pitch};
pub use session::{run_headless, HeadlessRun, Session, SessionError, SessionStatus};
