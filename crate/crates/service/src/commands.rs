//! Headless commands behind the `counterpoint` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};

use counterpoint_core::melody_io::{
    format_melody_doc, parse_melody_doc, render_midi, render_single, save_session,
};
use counterpoint_core::session::trace_csv;
use counterpoint_core::{
    run_headless, FitnessSource, HeadlessRun, Melody, ObjectiveWeights, Scheme, SchemeConfig,
    ScriptedRatings,
};

/// `objective` or `scripted:<file>`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RaterSpec {
    Objective,
    Scripted(PathBuf),
}

impl FromStr for RaterSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "objective" {
            Ok(RaterSpec::Objective)
        } else if let Some(path) = s.strip_prefix("scripted:").filter(|p| !p.is_empty()) {
            Ok(RaterSpec::Scripted(path.into()))
        } else {
            Err(format!(
                "expected `objective` or `scripted:FILE`, got {s:?}"
            ))
        }
    }
}

impl RaterSpec {
    pub fn load(&self) -> Result<FitnessSource> {
        Ok(match self {
            RaterSpec::Objective => FitnessSource::Objective(ObjectiveWeights::default()),
            RaterSpec::Scripted(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading ratings {}", path.display()))?;
                let schedule = ScriptedRatings::parse(&text)
                    .with_context(|| format!("in {}", path.display()))?;
                FitnessSource::Scripted(schedule)
            }
        })
    }
}

pub fn read_melody(path: &Path) -> Result<Melody> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_melody_doc(&text).with_context(|| format!("in {}", path.display()))
}

pub struct EvolveArgs {
    pub melody: PathBuf,
    pub scheme: Scheme,
    pub seed: u64,
    pub generations: u64,
    pub rater: RaterSpec,
    pub out_dir: PathBuf,
    pub mutate_offspring: bool,
}

/// Runs a headless evolution and writes `trace.csv`, `session.json`,
/// `best.txt` and `best.mid` into the output directory.
pub fn evolve(args: &EvolveArgs) -> Result<HeadlessRun> {
    let base = read_melody(&args.melody)?;
    let rater = args.rater.load()?;
    let mut config = SchemeConfig::new(args.scheme, args.seed);
    config.mutate_offspring = args.mutate_offspring;
    let run = run_headless("headless", base, config, &rater, args.generations)?;

    let out = &args.out_dir;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let write = |name: &str, bytes: &[u8]| {
        let path = out.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    };
    write("trace.csv", trace_csv(&run.trace).as_bytes())?;
    write("session.json", save_session(&run.session).as_bytes())?;
    write("best.txt", format_melody_doc(&run.best.melody).as_bytes())?;
    write(
        "best.mid",
        &render_midi(&run.session.base, &run.best.melody),
    )?;
    Ok(run)
}

/// Renders a melody alone, or with a counterpoint as a second voice.
pub fn render(melody: &Path, counterpoint: Option<&Path>, out: &Path) -> Result<()> {
    let base = read_melody(melody)?;
    let bytes = match counterpoint {
        Some(cp) => {
            let cp = read_melody(cp)?;
            if cp.key() != base.key() {
                bail!(
                    "counterpoint is in {} but the melody is in {}",
                    cp.key(),
                    base.key()
                );
            }
            render_midi(&base, &cp)
        }
        None => render_single(&base),
    };
    fs::write(out, bytes).with_context(|| format!("writing {}", out.display()))
}

/// One-line summary of a valid melody file.
pub fn validate(melody: &Path) -> Result<String> {
    let m = read_melody(melody)?;
    Ok(format!(
        "ok: {}, {} measures, {} events",
        m.key(),
        m.measures().len(),
        m.event_count()
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rater_specs() {
        assert_eq!("objective".parse(), Ok(RaterSpec::Objective));
        assert_eq!(
            "scripted:r.txt".parse(),
            Ok(RaterSpec::Scripted("r.txt".into()))
        );
        assert!("scripted:".parse::<RaterSpec>().is_err());
        assert!("human".parse::<RaterSpec>().is_err());
    }
}
