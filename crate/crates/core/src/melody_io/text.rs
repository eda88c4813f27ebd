//! Line-oriented melody documents.
//!
//! ```text
//! # comments run to end of line
//! key: Eb major
//! measures: 8        (optional; must be 8 when present)
//! C4 h               pitch name + octave, C4 = 60
//! 62 q               or a bare MIDI number in 48..=83
//! R e                or R for a rest
//! ```
//!
//! Durations: `w h q e s` and dotted `dh dq de ds`.

use std::fmt::Write as _;

use thiserror::Error;

use crate::genome::{
    Duration, Key, Melody, NoteEvent, Pitch, MAX_EVENTS_PER_MEASURE, MAX_PITCH, MEASURES,
    MEASURE_TICKS, MELODY_TICKS, MIN_PITCH,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct DocError {
    pub line: usize,
    pub kind: DocErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DocErrorKind {
    #[error("missing `key: <tonic> major` header before the first event")]
    MissingKey,
    #[error("cannot read key {0:?}; expected `<tonic> major`")]
    BadKey(String),
    #[error("duplicate header {0:?}")]
    DuplicateHeader(String),
    #[error("measure count {0} is not supported; melodies have 8 measures")]
    BadMeasureCount(String),
    #[error("unknown pitch {0:?}")]
    UnknownPitch(String),
    #[error("pitch {0} is outside {MIN_PITCH}..={MAX_PITCH}")]
    PitchOutOfRange(i64),
    #[error("unknown duration {0:?}")]
    UnknownDuration(String),
    #[error("expected `<pitch> <duration>`, got {0:?}")]
    Malformed(String),
    #[error("event crosses the barline closing measure {0}")]
    BarlineStraddle(usize),
    #[error("measure {0} has more than {MAX_EVENTS_PER_MEASURE} events")]
    TooManyEvents(usize),
    #[error("melody is {0} ticks long, expected {MELODY_TICKS}")]
    WrongTotalLength(u32),
}

const DURATION_TOKENS: [(&str, Duration); 9] = [
    ("w", Duration::WHOLE),
    ("h", Duration::HALF),
    ("q", Duration::QUARTER),
    ("e", Duration::EIGHTH),
    ("s", Duration::SIXTEENTH),
    ("dh", Duration::DOTTED_HALF),
    ("dq", Duration::DOTTED_QUARTER),
    ("de", Duration::DOTTED_EIGHTH),
    ("ds", Duration::DOTTED_SIXTEENTH),
];

const NAMES: [&str; 12] = [
    "C", "C#", "D", "D#", "E", "F", "F#", "G", "G#", "A", "A#", "B",
];

pub fn duration_token(d: Duration) -> &'static str {
    DURATION_TOKENS
        .iter()
        .find(|(_, dur)| *dur == d)
        .map(|(tok, _)| *tok)
        .expect("every duration has a token")
}

/// `C4` style name; sharps only.
pub fn pitch_name(midi: u8) -> String {
    format!(
        "{}{}",
        NAMES[usize::from(midi % 12)],
        i32::from(midi / 12) - 1
    )
}

/// Parses a note letter plus optional accidentals (`#`, `b`) into a pitch
/// class, returning the rest of the string.
fn parse_pitch_class(s: &str) -> Option<(i64, &str)> {
    let mut chars = s.chars();
    let base = match chars.next()?.to_ascii_uppercase() {
        'C' => 0,
        'D' => 2,
        'E' => 4,
        'F' => 5,
        'G' => 7,
        'A' => 9,
        'B' => 11,
        _ => return None,
    };
    let mut rest = chars.as_str();
    let mut pc = base;
    loop {
        if let Some(r) = rest.strip_prefix('#') {
            pc += 1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('b') {
            pc -= 1;
            rest = r;
        } else {
            break;
        }
    }
    Some((pc, rest))
}

fn parse_key(value: &str) -> Result<Key, DocErrorKind> {
    let bad = || DocErrorKind::BadKey(value.to_string());
    let mut parts = value.split_whitespace();
    let (tonic, mode) = (parts.next().ok_or_else(bad)?, parts.next().ok_or_else(bad)?);
    if parts.next().is_some() || !mode.eq_ignore_ascii_case("major") {
        return Err(bad());
    }
    match parse_pitch_class(tonic) {
        Some((pc, "")) => Key::major(pc.rem_euclid(12) as u8).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn parse_pitch(tok: &str) -> Result<Pitch, DocErrorKind> {
    if tok.eq_ignore_ascii_case("r") {
        return Ok(Pitch::Rest);
    }
    let midi: i64 = if let Ok(n) = tok.parse::<i64>() {
        n
    } else {
        let (pc, octave) =
            parse_pitch_class(tok).ok_or_else(|| DocErrorKind::UnknownPitch(tok.to_string()))?;
        let octave: i64 = octave
            .parse()
            .map_err(|_| DocErrorKind::UnknownPitch(tok.to_string()))?;
        12 * (octave + 1) + pc
    };
    if (i64::from(MIN_PITCH)..=i64::from(MAX_PITCH)).contains(&midi) {
        Ok(Pitch::Note(midi as u8))
    } else {
        Err(DocErrorKind::PitchOutOfRange(midi))
    }
}

fn parse_duration(tok: &str) -> Result<Duration, DocErrorKind> {
    DURATION_TOKENS
        .iter()
        .find(|(name, _)| name.eq_ignore_ascii_case(tok))
        .map(|(_, d)| *d)
        .ok_or_else(|| DocErrorKind::UnknownDuration(tok.to_string()))
}

pub fn parse_melody_doc(text: &str) -> Result<Melody, DocError> {
    let mut key: Option<Key> = None;
    let mut saw_measures = false;
    let mut measures: Vec<Vec<NoteEvent>> = Vec::new();
    let mut open: Vec<NoteEvent> = Vec::new();
    let mut in_measure = 0u32;
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let err = |kind| DocError { line, kind };
        let content = strip_comment(raw);
        if content.is_empty() {
            continue;
        }
        last_line = line;

        if let Some((name, value)) = content.split_once(':') {
            let name = name.trim().to_ascii_lowercase();
            let value = value.trim();
            match name.as_str() {
                "key" => {
                    if key.is_some() {
                        return Err(err(DocErrorKind::DuplicateHeader(name)));
                    }
                    key = Some(parse_key(value).map_err(err)?);
                }
                "measures" => {
                    if saw_measures {
                        return Err(err(DocErrorKind::DuplicateHeader(name)));
                    }
                    saw_measures = true;
                    if value.parse::<usize>().ok() != Some(MEASURES) {
                        return Err(err(DocErrorKind::BadMeasureCount(value.to_string())));
                    }
                }
                _ => return Err(err(DocErrorKind::Malformed(content.to_string()))),
            }
            continue;
        }

        if key.is_none() {
            return Err(err(DocErrorKind::MissingKey));
        }
        let mut toks = content.split_whitespace();
        let (Some(p), Some(d), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(err(DocErrorKind::Malformed(content.to_string())));
        };
        let event = NoteEvent {
            pitch: parse_pitch(p).map_err(err)?,
            duration: parse_duration(d).map_err(err)?,
        };
        let measure = measures.len() + 1;
        if measures.len() == MEASURES {
            return Err(err(DocErrorKind::WrongTotalLength(
                MELODY_TICKS + event.ticks(),
            )));
        }
        if in_measure + event.ticks() > MEASURE_TICKS {
            return Err(err(DocErrorKind::BarlineStraddle(measure)));
        }
        if open.len() == MAX_EVENTS_PER_MEASURE {
            return Err(err(DocErrorKind::TooManyEvents(measure)));
        }
        in_measure += event.ticks();
        open.push(event);
        if in_measure == MEASURE_TICKS {
            measures.push(std::mem::take(&mut open));
            in_measure = 0;
        }
    }

    let Some(key) = key else {
        return Err(DocError {
            line: last_line.max(1),
            kind: DocErrorKind::MissingKey,
        });
    };
    if measures.len() != MEASURES {
        let ticks = measures.len() as u32 * MEASURE_TICKS + in_measure;
        return Err(DocError {
            line: last_line.max(1),
            kind: DocErrorKind::WrongTotalLength(ticks),
        });
    }
    Ok(Melody::from_event_lists(measures, key).expect("validated while parsing"))
}

/// Drops a `#` comment that begins a token (so `C#4` survives).
fn strip_comment(raw: &str) -> &str {
    let bytes = raw.as_bytes();
    let cut = (0..bytes.len())
        .find(|&i| bytes[i] == b'#' && (i == 0 || bytes[i - 1].is_ascii_whitespace()))
        .unwrap_or(bytes.len());
    raw[..cut].trim()
}

/// Canonical text for a melody; parses back to an equal melody.
pub fn format_melody_doc(melody: &Melody) -> String {
    let mut out = String::new();
    writeln!(out, "key: {}", melody.key()).unwrap();
    writeln!(out, "measures: {MEASURES}").unwrap();
    for (i, measure) in melody.measures().iter().enumerate() {
        writeln!(out, "# measure {}", i + 1).unwrap();
        for e in measure.events() {
            let pitch = match e.pitch {
                Pitch::Rest => "R".to_string(),
                Pitch::Note(p) => pitch_name(p),
            };
            writeln!(out, "{pitch} {}", duration_token(e.duration)).unwrap();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(body: &str) -> String {
        format!("key: C major\n{body}")
    }

    #[test]
    fn eight_whole_notes() {
        let m = parse_melody_doc(&doc(&"C4 w\n".repeat(8))).unwrap();
        assert_eq!(m.measures().len(), 8);
        assert!(m
            .events()
            .all(|e| *e == NoteEvent::note(60, Duration::WHOLE)));
        assert_eq!(m.key(), Key::default());
    }

    #[test]
    fn pitch_range_boundaries() {
        assert_eq!(parse_pitch("B3"), Ok(Pitch::Note(59)));
        assert_eq!(parse_pitch("C3"), Ok(Pitch::Note(48)));
        assert_eq!(parse_pitch("B5"), Ok(Pitch::Note(83)));
        assert_eq!(parse_pitch("G2"), Err(DocErrorKind::PitchOutOfRange(43)));
        assert_eq!(parse_pitch("84"), Err(DocErrorKind::PitchOutOfRange(84)));
        assert_eq!(parse_pitch("Eb4"), Ok(Pitch::Note(63)));
        assert_eq!(parse_pitch("C#4"), Ok(Pitch::Note(61)));
        assert_eq!(parse_pitch("r"), Ok(Pitch::Rest));
        assert!(matches!(
            parse_pitch("H4"),
            Err(DocErrorKind::UnknownPitch(_))
        ));
        assert!(matches!(
            parse_pitch("C"),
            Err(DocErrorKind::UnknownPitch(_))
        ));
    }

    #[test]
    fn key_parsing() {
        assert_eq!(parse_key("Eb major").unwrap().tonic(), 3);
        assert_eq!(parse_key("f# MAJOR").unwrap().tonic(), 6);
        assert_eq!(parse_key("Cb major").unwrap().tonic(), 11);
        assert!(parse_key("A minor").is_err());
        assert!(parse_key("major").is_err());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_melody_doc(&doc("C4 w\nC4 x\n")).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.kind, DocErrorKind::UnknownDuration("x".into()));

        let e = parse_melody_doc(&doc("C4 dh\nD4 h\n")).unwrap_err();
        assert_eq!(
            e,
            DocError {
                line: 3,
                kind: DocErrorKind::BarlineStraddle(1)
            }
        );

        let e = parse_melody_doc(&doc(&"C4 w\n".repeat(7))).unwrap_err();
        assert_eq!(
            e,
            DocError {
                line: 8,
                kind: DocErrorKind::WrongTotalLength(224)
            }
        );

        let e = parse_melody_doc(&doc(&"C4 w\n".repeat(9))).unwrap_err();
        assert_eq!(e.line, 10);
        assert!(matches!(e.kind, DocErrorKind::WrongTotalLength(_)));

        let e = parse_melody_doc("C4 w\n").unwrap_err();
        assert_eq!(
            e,
            DocError {
                line: 1,
                kind: DocErrorKind::MissingKey
            }
        );

        let e = parse_melody_doc(&doc("G2 w\n")).unwrap_err();
        assert_eq!(
            e,
            DocError {
                line: 2,
                kind: DocErrorKind::PitchOutOfRange(43)
            }
        );

        let e = parse_melody_doc(&doc(&"C4 s\n".repeat(16))).unwrap_err();
        assert_eq!(
            e,
            DocError {
                line: 17,
                kind: DocErrorKind::TooManyEvents(1)
            }
        );

        let e = parse_melody_doc("key: C major\nmeasures: 4\n").unwrap_err();
        assert!(matches!(e.kind, DocErrorKind::BadMeasureCount(_)));
    }

    #[test]
    fn comments_and_sharps() {
        let text = "# a comment\nkey: C major # trailing\nC#4 w # sharp then comment\n".to_string()
            + &"R w\n".repeat(7);
        let m = parse_melody_doc(&text).unwrap();
        assert_eq!(
            m.measures()[0].events()[0],
            NoteEvent::note(61, Duration::WHOLE)
        );
    }

    #[test]
    fn format_roundtrip() {
        let text = doc("C4 q\nR e\nF#5 de\nG3 ds\nB3 ds\nA4 q\n")
            + "Eb4 h\nD4 q\n60 ds\n61 s\nR ds\n"
            + &"C4 w\n".repeat(6);
        let m = parse_melody_doc(&text).unwrap();
        let formatted = format_melody_doc(&m);
        assert_eq!(parse_melody_doc(&formatted).unwrap(), m);
        assert_eq!(
            format_melody_doc(&parse_melody_doc(&formatted).unwrap()),
            formatted
        );
    }
}
