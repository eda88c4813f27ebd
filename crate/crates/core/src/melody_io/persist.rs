//! JSON session files, one `<session-id>.json` per session.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{Generation, Individual, Rating, SchemeConfig};
use crate::genome::{decode_melody, Genome};
use crate::melody_io::text::{format_melody_doc, parse_melody_doc};
use crate::session::{Session, SessionStatus};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("session file does not match format version {expected}: {detail}")]
    SchemaMismatch { expected: u32, detail: String },
    #[error("invalid session id {0:?}")]
    InvalidId(String),
    #[error("no session {0:?}")]
    NotFound(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn mismatch(detail: impl Into<String>) -> PersistError {
    PersistError::SchemaMismatch {
        expected: FORMAT_VERSION,
        detail: detail.into(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionFile {
    format_version: u32,
    id: String,
    config: SchemeConfig,
    status: SessionStatus,
    base_melody: String,
    generations: Vec<GenerationRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GenerationRecord {
    index: u64,
    individuals: Vec<IndividualRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IndividualRecord {
    id: u64,
    genome: String,
    rating: Option<Rating>,
}

/// Canonical JSON for a session. Identical sessions give identical bytes.
pub fn save_session(session: &Session) -> String {
    let file = SessionFile {
        format_version: FORMAT_VERSION,
        id: session.id.clone(),
        config: session.config,
        status: session.status,
        base_melody: format_melody_doc(&session.base),
        generations: session
            .generations
            .iter()
            .map(|g| GenerationRecord {
                index: g.index,
                individuals: g
                    .individuals
                    .iter()
                    .map(|i| IndividualRecord {
                        id: i.id,
                        genome: i.genome().to_string(),
                        rating: i.rating,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("session serializes");
    text.push('\n');
    text
}

pub fn load_session(text: &str) -> Result<Session, PersistError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| mismatch(format!("unreadable JSON: {e}")))?;
    match value.get("format_version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(FORMAT_VERSION) => {}
        Some(v) => return Err(mismatch(format!("file declares version {v}"))),
        None => return Err(mismatch("missing format_version")),
    }
    let file: SessionFile = serde_json::from_value(value).map_err(|e| mismatch(e.to_string()))?;

    let base =
        parse_melody_doc(&file.base_melody).map_err(|e| mismatch(format!("base melody: {e}")))?;
    let key = base.key();
    let mut generations = Vec::with_capacity(file.generations.len());
    for (pos, g) in file.generations.into_iter().enumerate() {
        if g.index != pos as u64 {
            return Err(mismatch(format!(
                "generation {pos} is labelled {}",
                g.index
            )));
        }
        let individuals = g
            .individuals
            .into_iter()
            .map(|r| {
                let genome: Genome = r
                    .genome
                    .parse()
                    .map_err(|e| mismatch(format!("individual {}: {e}", r.id)))?;
                let melody = decode_melody(&genome, key)
                    .map_err(|e| mismatch(format!("individual {}: {e}", r.id)))?;
                Ok(Individual {
                    id: r.id,
                    melody,
                    rating: r.rating,
                })
            })
            .collect::<Result<Vec<_>, PersistError>>()?;
        if individuals.len() != file.config.scheme.population_size() {
            return Err(mismatch(format!(
                "generation {pos} has {} individuals",
                individuals.len()
            )));
        }
        generations.push(Generation {
            index: g.index,
            individuals,
        });
    }
    if generations.is_empty() {
        return Err(mismatch("no generations"));
    }
    let session = Session {
        id: file.id,
        base,
        config: file.config,
        generations,
        status: file.status,
    };
    if let SessionStatus::Complete { individual } = session.status {
        if session.final_individual().is_none() {
            return Err(mismatch(format!(
                "final individual {individual} is not in the last generation"
            )));
        }
    }
    Ok(session)
}

/// Session ids are used as file names.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 64
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
}

/// A directory of session files. Writes go to a temporary file and are
/// renamed into place, so readers only ever see whole files.
#[derive(Debug, Clone)]
pub struct SessionStore {
    dir: PathBuf,
}

impl SessionStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, PersistError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, id: &str) -> Result<PathBuf, PersistError> {
        if !is_valid_id(id) {
            return Err(PersistError::InvalidId(id.to_string()));
        }
        Ok(self.dir.join(format!("{id}.json")))
    }

    pub fn save(&self, session: &Session) -> Result<(), PersistError> {
        let path = self.path(&session.id)?;
        let tmp = self.dir.join(format!(".{}.json.tmp", session.id));
        fs::write(&tmp, save_session(session))?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }

    pub fn load(&self, id: &str) -> Result<Session, PersistError> {
        let path = self.path(id)?;
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(PersistError::NotFound(id.to_string()))
            }
            Err(e) => return Err(e.into()),
        };
        load_session(&text)
    }

    /// Ids of every stored session, sorted.
    pub fn ids(&self) -> Result<Vec<String>, PersistError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir)? {
            let name = entry?.file_name();
            let Some(name) = name.to_str() else { continue };
            if let Some(id) = name.strip_suffix(".json") {
                if is_valid_id(id) {
                    ids.push(id.to_string());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    /// The next sequential id, `s000001`, `s000002`, ...
    pub fn next_id(&self) -> Result<String, PersistError> {
        let highest = self
            .ids()?
            .iter()
            .filter_map(|id| id.strip_prefix('s')?.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        Ok(format!("s{:06}", highest + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::Scheme;
    use crate::genome::{Duration, Key, Melody, NoteEvent};

    fn session() -> Session {
        let base = Melody::from_event_lists(
            vec![
                vec![
                    NoteEvent::note(60, Duration::HALF),
                    NoteEvent::note(64, Duration::HALF)
                ];
                8
            ],
            Key::default(),
        )
        .unwrap();
        let mut s = Session::create("s000001", base, SchemeConfig::new(Scheme::B, 11));
        s.rate(0, 0, 40).unwrap();
        s
    }

    #[test]
    fn resave_is_byte_identical() {
        let s = session();
        let text = save_session(&s);
        let loaded = load_session(&text).unwrap();
        assert_eq!(loaded, s);
        assert_eq!(save_session(&loaded), text);
    }

    #[test]
    fn truncated_file_is_schema_mismatch() {
        let text = save_session(&session());
        let cut = &text[..text.len() / 2];
        assert!(matches!(
            load_session(cut),
            Err(PersistError::SchemaMismatch { .. })
        ));
    }

    #[test]
    fn version_is_checked() {
        let text =
            save_session(&session()).replace("\"format_version\": 1", "\"format_version\": 2");
        let err = load_session(&text).unwrap_err();
        assert!(err.to_string().contains("version 2"), "{err}");
    }

    #[test]
    fn corrupt_genome_rejected() {
        let text = save_session(&session());
        let mut value: serde_json::Value = serde_json::from_str(&text).unwrap();
        value["generations"][0]["individuals"][0]["genome"] = "0011100000".into();
        let err = load_session(&value.to_string()).unwrap_err();
        assert!(matches!(err, PersistError::SchemaMismatch { .. }));
    }

    #[test]
    fn store_roundtrip_and_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = SessionStore::open(dir.path()).unwrap();
        assert_eq!(store.next_id().unwrap(), "s000001");
        let s = session();
        store.save(&s).unwrap();
        assert_eq!(store.ids().unwrap(), vec!["s000001"]);
        assert_eq!(store.next_id().unwrap(), "s000002");
        assert_eq!(store.load("s000001").unwrap(), s);
        assert!(matches!(store.load("nope"), Err(PersistError::NotFound(_))));
        assert!(matches!(
            store.load("../etc"),
            Err(PersistError::InvalidId(_))
        ));
    }
}
