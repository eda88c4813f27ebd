//! Melody documents, MIDI rendering and session files.

pub mod midi;
pub mod persist;
pub mod text;

pub use midi::{render_midi, render_single};
pub use persist::{load_session, save_session, PersistError, SessionStore};
pub use text::{format_melody_doc, parse_melody_doc, DocError, DocErrorKind};
