//! Bit-level genome encoding.
//!
//! A note event occupies 10 bits: the first 6 select a pitch (or a rest) and
//! the last 4 select a duration. Durations are measured in ticks of a 32nd
//! note, so a 4/4 measure is 32 ticks and an 8-measure melody is 256 ticks.
//! Measures carry no delimiters in the bitstring; a genome is valid only when
//! the running tick sum lands exactly on every barline.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Bits per encoded note event.
pub const EVENT_BITS: usize = 10;
/// Ticks in one 4/4 measure.
pub const MEASURE_TICKS: u32 = 32;
/// Measures in a melody.
pub const MEASURES: usize = 8;
/// Ticks in a full melody.
pub const MELODY_TICKS: u32 = MEASURE_TICKS * MEASURES as u32;
/// Maximum note events in one measure.
pub const MAX_EVENTS_PER_MEASURE: usize = 15;
/// Lowest representable MIDI pitch.
pub const MIN_PITCH: u8 = 48;
/// Highest representable MIDI pitch.
pub const MAX_PITCH: u8 = 83;

/// Probability that a randomly generated event is a rest.
pub const REST_PROBABILITY: f64 = 1.0 / 8.0;

/// First pitch code that maps to a sounding note.
const PITCH_CODE_LOW: u8 = 14;
/// Last pitch code that maps to a sounding note.
const PITCH_CODE_HIGH: u8 = 49;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenomeError {
    #[error("{0} ticks is not a representable note duration")]
    InvalidDuration(u32),
    #[error("MIDI pitch {0} is outside {MIN_PITCH}..={MAX_PITCH}")]
    PitchOutOfRange(u8),
    #[error("pitch class {0} is not in 0..12")]
    InvalidTonic(u8),
    #[error("measure sums to {0} ticks, expected {MEASURE_TICKS}")]
    MeasureLength(u32),
    #[error("measure has {0} events, allowed 1..={MAX_EVENTS_PER_MEASURE}")]
    MeasureEventCount(usize),
    #[error("melody has {0} measures, expected {MEASURES}")]
    MeasureCount(usize),
    #[error("invalid bit character {0:?}")]
    InvalidBit(char),
}

/// A note length in 32nd-note ticks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Duration(u8);

impl Duration {
    pub const SIXTEENTH: Duration = Duration(2);
    pub const DOTTED_SIXTEENTH: Duration = Duration(3);
    pub const EIGHTH: Duration = Duration(4);
    pub const DOTTED_EIGHTH: Duration = Duration(6);
    pub const QUARTER: Duration = Duration(8);
    pub const DOTTED_QUARTER: Duration = Duration(12);
    pub const HALF: Duration = Duration(16);
    pub const DOTTED_HALF: Duration = Duration(24);
    pub const WHOLE: Duration = Duration(32);

    /// Every representable duration, shortest first.
    pub const ALL: [Duration; 9] = [
        Self::SIXTEENTH,
        Self::DOTTED_SIXTEENTH,
        Self::EIGHTH,
        Self::DOTTED_EIGHTH,
        Self::QUARTER,
        Self::DOTTED_QUARTER,
        Self::HALF,
        Self::DOTTED_HALF,
        Self::WHOLE,
    ];

    pub fn from_ticks(ticks: u32) -> Result<Self, GenomeError> {
        Self::ALL
            .iter()
            .copied()
            .find(|d| u32::from(d.0) == ticks)
            .ok_or(GenomeError::InvalidDuration(ticks))
    }

    pub fn ticks(self) -> u32 {
        u32::from(self.0)
    }

    /// Maps a 4-bit duration code to its duration.
    ///
    /// Quarter and half notes own three codes each; whole, eighth and
    /// sixteenth own two; every dotted value owns one.
    pub fn from_code(code: u8) -> Self {
        match code & 0x0f {
            0b0000 | 0b1001 => Self::WHOLE,
            0b0001 | 0b1010 | 0b1111 => Self::HALF,
            0b0010 | 0b1011 | 0b1110 => Self::QUARTER,
            0b0011 | 0b1100 => Self::EIGHTH,
            0b0100 | 0b1101 => Self::SIXTEENTH,
            0b0101 => Self::DOTTED_HALF,
            0b0110 => Self::DOTTED_QUARTER,
            0b0111 => Self::DOTTED_EIGHTH,
            _ => Self::DOTTED_SIXTEENTH,
        }
    }

    /// The lowest-valued code decoding to this duration.
    pub fn canonical_code(self) -> u8 {
        match self.0 {
            32 => 0b0000,
            16 => 0b0001,
            8 => 0b0010,
            4 => 0b0011,
            2 => 0b0100,
            24 => 0b0101,
            12 => 0b0110,
            6 => 0b0111,
            3 => 0b1000,
            _ => unreachable!("Duration invariant"),
        }
    }
}

impl TryFrom<u32> for Duration {
    type Error = GenomeError;

    fn try_from(ticks: u32) -> Result<Self, Self::Error> {
        Self::from_ticks(ticks)
    }
}

impl From<Duration> for u32 {
    fn from(d: Duration) -> u32 {
        d.ticks()
    }
}

/// Either silence or a MIDI note number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pitch {
    Rest,
    Note(u8),
}

impl Pitch {
    pub fn midi(self) -> Option<u8> {
        match self {
            Pitch::Rest => None,
            Pitch::Note(p) => Some(p),
        }
    }

    pub fn is_rest(self) -> bool {
        matches!(self, Pitch::Rest)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NoteEvent {
    pub pitch: Pitch,
    pub duration: Duration,
}

impl NoteEvent {
    pub fn note(midi: u8, duration: Duration) -> Self {
        Self {
            pitch: Pitch::Note(midi),
            duration,
        }
    }

    pub fn rest(duration: Duration) -> Self {
        Self {
            pitch: Pitch::Rest,
            duration,
        }
    }

    pub fn ticks(&self) -> u32 {
        self.duration.ticks()
    }
}

/// A major key. Only the tonic is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Key {
    tonic: u8,
}

const MAJOR_STEPS: [u8; 7] = [0, 2, 4, 5, 7, 9, 11];

// Conventional spellings of major keys (fewest accidentals).
const MAJOR_KEY_NAMES: [&str; 12] = [
    "C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B",
];

impl Key {
    pub fn major(tonic: u8) -> Result<Self, GenomeError> {
        if tonic < 12 {
            Ok(Self { tonic })
        } else {
            Err(GenomeError::InvalidTonic(tonic))
        }
    }

    pub fn tonic(self) -> u8 {
        self.tonic
    }

    pub fn contains(self, midi: u8) -> bool {
        let degree = (midi + 12 - self.tonic) % 12;
        MAJOR_STEPS.contains(&degree)
    }

    /// In-key MIDI pitches within the representable range, ascending.
    pub fn pitches(self) -> Vec<u8> {
        (MIN_PITCH..=MAX_PITCH)
            .filter(|&p| self.contains(p))
            .collect()
    }

    pub fn tonic_name(self) -> &'static str {
        MAJOR_KEY_NAMES[usize::from(self.tonic)]
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} major", self.tonic_name())
    }
}

/// One 32-tick bar of 1..=15 events.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Measure {
    events: Vec<NoteEvent>,
}

impl Measure {
    pub fn new(events: Vec<NoteEvent>) -> Result<Self, GenomeError> {
        if events.is_empty() || events.len() > MAX_EVENTS_PER_MEASURE {
            return Err(GenomeError::MeasureEventCount(events.len()));
        }
        let total = ticks_of(&events);
        if total != MEASURE_TICKS {
            return Err(GenomeError::MeasureLength(total));
        }
        Ok(Self { events })
    }

    pub fn events(&self) -> &[NoteEvent] {
        &self.events
    }

    pub fn into_events(self) -> Vec<NoteEvent> {
        self.events
    }
}

/// Eight valid measures in a single major key.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Melody {
    measures: Vec<Measure>,
    key: Key,
}

impl Melody {
    pub fn new(measures: Vec<Measure>, key: Key) -> Result<Self, GenomeError> {
        if measures.len() != MEASURES {
            return Err(GenomeError::MeasureCount(measures.len()));
        }
        Ok(Self { measures, key })
    }

    /// Builds a melody from per-measure event lists, validating each.
    pub fn from_event_lists(lists: Vec<Vec<NoteEvent>>, key: Key) -> Result<Self, GenomeError> {
        let measures = lists
            .into_iter()
            .map(Measure::new)
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(measures, key)
    }

    pub fn measures(&self) -> &[Measure] {
        &self.measures
    }

    pub fn key(&self) -> Key {
        self.key
    }

    pub fn events(&self) -> impl Iterator<Item = &NoteEvent> + '_ {
        self.measures.iter().flat_map(|m| m.events.iter())
    }

    pub fn event_count(&self) -> usize {
        self.measures.iter().map(|m| m.events.len()).sum()
    }

    /// The sounding pitch at each of the 256 ticks.
    pub fn tick_pitches(&self) -> Vec<Option<u8>> {
        let mut out = Vec::with_capacity(MELODY_TICKS as usize);
        for e in self.events() {
            out.extend(std::iter::repeat_n(e.pitch.midi(), e.ticks() as usize));
        }
        out
    }
}

/// An ordered bit sequence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Genome {
    bits: Vec<bool>,
}

impl Genome {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// Complete 10-bit chunks; a trailing fragment is ignored.
    pub fn events(&self) -> impl Iterator<Item = NoteEvent> + '_ {
        self.bits.chunks_exact(EVENT_BITS).map(decode_event)
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Genome {
    type Err = GenomeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(GenomeError::InvalidBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self::from_bits)
    }
}

fn bits_to_u8(bits: &[bool]) -> u8 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | u8::from(b))
}

fn push_bits(out: &mut Vec<bool>, value: u8, width: usize) {
    for shift in (0..width).rev() {
        out.push((value >> shift) & 1 == 1);
    }
}

/// Decodes one 10-bit note event.
///
/// # Panics
/// If `bits` is not exactly 10 long.
pub fn decode_event(bits: &[bool]) -> NoteEvent {
    assert_eq!(bits.len(), EVENT_BITS, "a note event is 10 bits");
    let pitch_code = bits_to_u8(&bits[..6]);
    let duration = Duration::from_code(bits_to_u8(&bits[6..]));
    let pitch = if (PITCH_CODE_LOW..=PITCH_CODE_HIGH).contains(&pitch_code) {
        Pitch::Note(MIN_PITCH + pitch_code - PITCH_CODE_LOW)
    } else {
        Pitch::Rest
    };
    NoteEvent { pitch, duration }
}

/// Encodes one event using canonical codes (rest = 0, lowest duration code).
pub fn encode_event(event: &NoteEvent) -> Result<[bool; EVENT_BITS], GenomeError> {
    let pitch_code = match event.pitch {
        Pitch::Rest => 0,
        Pitch::Note(p) if (MIN_PITCH..=MAX_PITCH).contains(&p) => p - MIN_PITCH + PITCH_CODE_LOW,
        Pitch::Note(p) => return Err(GenomeError::PitchOutOfRange(p)),
    };
    let mut bits = Vec::with_capacity(EVENT_BITS);
    push_bits(&mut bits, pitch_code, 6);
    push_bits(&mut bits, event.duration.canonical_code(), 4);
    Ok(bits.try_into().expect("10 bits"))
}

/// Why a genome does not decode to a melody. Measures are numbered from 1,
/// events from 0.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValidationFailure {
    #[error("melody ends after {ticks} ticks, expected {MELODY_TICKS}")]
    TotalTooShort { ticks: u32 },
    #[error("event {event} starts after the final barline")]
    TotalTooLong { event: usize },
    #[error("event {event} crosses the barline closing measure {measure}")]
    BoundaryStraddle { measure: usize, event: usize },
    #[error("measure {measure} has more than {MAX_EVENTS_PER_MEASURE} events (event {event})")]
    TooManyEvents { measure: usize, event: usize },
}

/// Splits an event stream into 32-tick measures, reporting the first rule
/// violation.
pub fn segment_events(
    events: impl IntoIterator<Item = NoteEvent>,
) -> Result<Vec<Vec<NoteEvent>>, ValidationFailure> {
    let mut measures: Vec<Vec<NoteEvent>> = Vec::with_capacity(MEASURES);
    let mut open: Vec<NoteEvent> = Vec::new();
    let mut in_measure = 0u32;
    for (index, event) in events.into_iter().enumerate() {
        if measures.len() == MEASURES {
            return Err(ValidationFailure::TotalTooLong { event: index });
        }
        let measure = measures.len() + 1;
        if in_measure + event.ticks() > MEASURE_TICKS {
            return Err(ValidationFailure::BoundaryStraddle {
                measure,
                event: index,
            });
        }
        if open.len() == MAX_EVENTS_PER_MEASURE {
            return Err(ValidationFailure::TooManyEvents {
                measure,
                event: index,
            });
        }
        in_measure += event.ticks();
        open.push(event);
        if in_measure == MEASURE_TICKS {
            measures.push(std::mem::take(&mut open));
            in_measure = 0;
        }
    }
    if measures.len() < MEASURES {
        let ticks = measures.len() as u32 * MEASURE_TICKS + in_measure;
        return Err(ValidationFailure::TotalTooShort { ticks });
    }
    Ok(measures)
}

pub fn decode_melody(genome: &Genome, key: Key) -> Result<Melody, ValidationFailure> {
    let lists = segment_events(genome.events())?;
    Ok(Melody::from_event_lists(lists, key).expect("segmented measures are valid"))
}

pub fn encode_melody(melody: &Melody) -> Genome {
    let mut bits = Vec::with_capacity(melody.event_count() * EVENT_BITS);
    for e in melody.events() {
        bits.extend(encode_event(e).expect("melody events are in range"));
    }
    Genome::from_bits(bits)
}

/// Draws a random in-key pitch (no rest).
pub fn random_pitch_in_key<R: Rng + ?Sized>(key: Key, rng: &mut R) -> u8 {
    *key.pitches()
        .choose(rng)
        .expect("every key has pitches in range")
}

/// Draws an in-key note or (rarely) a rest, with a duration no longer than
/// `max_ticks`.
///
/// # Panics
/// If `max_ticks < 2`; no duration fits.
pub fn random_event_in_key<R: Rng + ?Sized>(key: Key, max_ticks: u32, rng: &mut R) -> NoteEvent {
    let fitting: Vec<Duration> = Duration::ALL
        .iter()
        .copied()
        .filter(|d| d.ticks() <= max_ticks)
        .collect();
    assert!(
        !fitting.is_empty(),
        "max_ticks {max_ticks} admits no duration"
    );
    let duration = *fitting.choose(rng).expect("non-empty");
    random_event_with_duration(key, duration, rng)
}

pub(crate) fn random_event_with_duration<R: Rng + ?Sized>(
    key: Key,
    duration: Duration,
    rng: &mut R,
) -> NoteEvent {
    if rng.gen_bool(REST_PROBABILITY) {
        NoteEvent::rest(duration)
    } else {
        NoteEvent::note(random_pitch_in_key(key, rng), duration)
    }
}

pub fn ticks_of(events: &[NoteEvent]) -> u32 {
    events.iter().map(NoteEvent::ticks).sum()
}

const UNREACHABLE: usize = usize::MAX;

/// Fewest events whose durations sum to exactly `ticks` (`usize::MAX` if
/// impossible, which only happens for 1 tick).
pub(crate) fn min_events_for(ticks: u32) -> usize {
    static TABLE: std::sync::OnceLock<[usize; MEASURE_TICKS as usize + 1]> =
        std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [UNREACHABLE; MEASURE_TICKS as usize + 1];
        t[0] = 0;
        for r in 1..=MEASURE_TICKS as usize {
            for d in Duration::ALL {
                let d = d.ticks() as usize;
                if d <= r && t[r - d] != UNREACHABLE {
                    t[r] = t[r].min(t[r - d] + 1);
                }
            }
        }
        t
    });
    table[ticks as usize]
}

/// Events needed to close a measure with `remaining` ticks open, counting the
/// odd-tick fix-up for a 1-tick gap.
pub(crate) fn events_to_close(remaining: u32) -> usize {
    if remaining == 1 {
        min_events_for(2)
    } else {
        min_events_for(remaining)
    }
}

/// Completes a partial measure with random in-key events.
///
/// A 1-tick gap can only arise from an odd number of dotted sixteenths, so
/// the last of them is shortened to a sixteenth first. Durations are drawn
/// so the measure can always be closed within the 15-event limit; if
/// `partial` already leaves too few slots, trailing events are dropped until
/// it can be.
pub fn fill_measure_remainder<R: Rng + ?Sized>(
    mut partial: Vec<NoteEvent>,
    key: Key,
    rng: &mut R,
) -> Vec<NoteEvent> {
    while ticks_of(&partial) > MEASURE_TICKS
        || partial.len() + events_to_close(MEASURE_TICKS - ticks_of(&partial))
            > MAX_EVENTS_PER_MEASURE
    {
        partial.pop();
    }
    let mut remaining = MEASURE_TICKS - ticks_of(&partial);
    if remaining == 1 {
        let dotted = partial
            .iter()
            .rposition(|e| e.duration == Duration::DOTTED_SIXTEENTH)
            .expect("odd tick sum implies a dotted sixteenth");
        partial[dotted].duration = Duration::SIXTEENTH;
        remaining = 2;
    }
    while remaining > 0 {
        let slots_after = MAX_EVENTS_PER_MEASURE - partial.len() - 1;
        let choices: Vec<Duration> = Duration::ALL
            .iter()
            .copied()
            .filter(|d| {
                d.ticks() <= remaining && min_events_for(remaining - d.ticks()) <= slots_after
            })
            .collect();
        let duration = *choices
            .choose(rng)
            .expect("closable measure has a next duration");
        partial.push(random_event_with_duration(key, duration, rng));
        remaining -= duration.ticks();
    }
    partial
}

/// A full random measure in `key`.
pub fn random_measure<R: Rng + ?Sized>(key: Key, rng: &mut R) -> Measure {
    Measure::new(fill_measure_remainder(Vec::new(), key, rng)).expect("filled measure is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    fn whole_notes(pitch: u8, count: usize) -> Vec<NoteEvent> {
        vec![NoteEvent::note(pitch, Duration::WHOLE); count]
    }

    #[test]
    fn decode_examples() {
        assert_eq!(
            decode_event(&bits("0000110000")),
            NoteEvent::rest(Duration::WHOLE)
        );
        assert_eq!(
            decode_event(&bits("0011100000")),
            NoteEvent::note(48, Duration::WHOLE)
        );
        assert_eq!(
            decode_event(&bits("1100010111")),
            NoteEvent::note(83, Duration::DOTTED_EIGHTH)
        );
    }

    #[test]
    fn rest_code_ranges() {
        for code in 0u8..64 {
            let mut b = Vec::new();
            push_bits(&mut b, code, 6);
            push_bits(&mut b, 0, 4);
            let rest = decode_event(&b).pitch.is_rest();
            assert_eq!(rest, code <= 13 || code >= 50, "code {code}");
        }
    }

    #[test]
    fn encode_examples() {
        let e = encode_event(&NoteEvent::note(48, Duration::WHOLE)).unwrap();
        assert_eq!(e.to_vec(), bits("0011100000"));
        let e = encode_event(&NoteEvent::rest(Duration::QUARTER)).unwrap();
        assert_eq!(e.to_vec(), bits("0000000010"));
    }

    #[test]
    fn encode_rejects_out_of_range() {
        assert_eq!(
            encode_event(&NoteEvent::note(84, Duration::QUARTER)),
            Err(GenomeError::PitchOutOfRange(84))
        );
        assert_eq!(
            Duration::from_ticks(5),
            Err(GenomeError::InvalidDuration(5))
        );
        assert_eq!(
            Duration::from_ticks(1),
            Err(GenomeError::InvalidDuration(1))
        );
    }

    #[test]
    fn canonical_code_is_lowest() {
        for d in Duration::ALL {
            let lowest = (0u8..16).find(|&c| Duration::from_code(c) == d).unwrap();
            assert_eq!(d.canonical_code(), lowest);
        }
    }

    #[test]
    fn decode_whole_note_melody() {
        let mut b = Vec::new();
        for _ in 0..8 {
            b.extend(bits("0011100000"));
        }
        let m = decode_melody(&Genome::from_bits(b), Key::default()).unwrap();
        assert_eq!(m.measures().len(), 8);
        assert!(m.measures().iter().all(|m| m.events().len() == 1));
        assert_eq!(encode_melody(&m).len(), 80);
    }

    #[test]
    fn decode_too_short() {
        let mut events = whole_notes(60, 7);
        events.push(NoteEvent::note(60, Duration::HALF));
        assert_eq!(
            segment_events(events),
            Err(ValidationFailure::TotalTooShort { ticks: 240 })
        );
    }

    #[test]
    fn decode_too_long() {
        let events = whole_notes(60, 9);
        assert_eq!(
            segment_events(events),
            Err(ValidationFailure::TotalTooLong { event: 8 })
        );
    }

    #[test]
    fn decode_straddle() {
        let events = vec![
            NoteEvent::note(60, Duration::DOTTED_HALF),
            NoteEvent::note(62, Duration::HALF),
        ];
        assert_eq!(
            segment_events(events),
            Err(ValidationFailure::BoundaryStraddle {
                measure: 1,
                event: 1
            })
        );
    }

    #[test]
    fn decode_too_many_events() {
        // 16 sixteenths in one measure
        let events = vec![NoteEvent::note(60, Duration::SIXTEENTH); 16];
        assert_eq!(
            segment_events(events),
            Err(ValidationFailure::TooManyEvents {
                measure: 1,
                event: 15
            })
        );
    }

    #[test]
    fn trailing_fragment_ignored() {
        let mut b = Vec::new();
        for _ in 0..8 {
            b.extend(bits("0011100000"));
        }
        b.extend(bits("101"));
        assert!(decode_melody(&Genome::from_bits(b), Key::default()).is_ok());
    }

    #[test]
    fn maximal_melody_is_1200_bits() {
        // 14 sixteenths + one eighth = 32 ticks, 15 events
        let mut measure = vec![NoteEvent::note(60, Duration::SIXTEENTH); 14];
        measure.push(NoteEvent::note(60, Duration::EIGHTH));
        let m = Melody::from_event_lists(vec![measure; 8], Key::default()).unwrap();
        assert_eq!(encode_melody(&m).len(), 1200);
    }

    #[test]
    fn key_membership() {
        let c = Key::default();
        let outside = [49, 51, 54, 56, 58, 61, 63, 66, 68, 70, 73, 75, 78, 80, 82];
        for p in MIN_PITCH..=MAX_PITCH {
            assert_eq!(c.contains(p), !outside.contains(&p), "pitch {p}");
        }
        assert_eq!(c.pitches().len(), 21);
        assert!(Key::major(12).is_err());
    }

    #[test]
    fn random_event_respects_max_ticks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let e = random_event_in_key(Key::default(), 2, &mut rng);
            assert_eq!(e.duration, Duration::SIXTEENTH);
        }
    }

    #[test]
    #[should_panic]
    fn random_event_needs_room() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        random_event_in_key(Key::default(), 1, &mut rng);
    }

    #[test]
    fn random_event_covers_all_durations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = std::collections::HashSet::new();
        let mut rests = 0;
        for _ in 0..10_000 {
            let e = random_event_in_key(Key::major(7).unwrap(), 32, &mut rng);
            seen.insert(e.duration);
            match e.pitch {
                Pitch::Rest => rests += 1,
                Pitch::Note(p) => assert!(Key::major(7).unwrap().contains(p)),
            }
        }
        assert_eq!(seen.len(), 9);
        // 1250 expected
        assert!((1000..1500).contains(&rests), "{rests}");
    }

    #[test]
    fn min_events_table() {
        assert_eq!(min_events_for(0), 0);
        assert_eq!(min_events_for(1), usize::MAX);
        assert_eq!(min_events_for(32), 1);
        assert_eq!(min_events_for(5), 2);
        assert_eq!(min_events_for(31), 3);
    }

    #[test]
    fn fill_remaining_zero_unchanged() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let full = whole_notes(60, 1);
        assert_eq!(
            fill_measure_remainder(full.clone(), Key::default(), &mut rng),
            full
        );
    }

    #[test]
    fn fill_remaining_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let partial = vec![
            NoteEvent::note(60, Duration::DOTTED_HALF),
            NoteEvent::note(62, Duration::DOTTED_SIXTEENTH),
        ];
        for _ in 0..10_000 {
            let out = fill_measure_remainder(partial.clone(), Key::default(), &mut rng);
            assert_eq!(ticks_of(&out), 32);
            assert_eq!(&out[..2], &partial[..]);
            let tail: Vec<u32> = out[2..].iter().map(NoteEvent::ticks).collect();
            assert!(tail == [3, 2] || tail == [2, 3], "{tail:?}");
        }
    }

    #[test]
    fn fill_remaining_one_shortens_dotted_sixteenth() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let partial = vec![
            NoteEvent::note(60, Duration::DOTTED_SIXTEENTH),
            NoteEvent::note(62, Duration::DOTTED_HALF),
            NoteEvent::note(64, Duration::EIGHTH),
        ];
        let out = fill_measure_remainder(partial, Key::default(), &mut rng);
        assert_eq!(out.len(), 4);
        assert_eq!(out[0], NoteEvent::note(60, Duration::SIXTEENTH));
        assert_eq!(out[3].duration, Duration::SIXTEENTH);
        assert_eq!(ticks_of(&out), 32);
    }

    #[test]
    fn fill_respects_event_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        // 14 events, 28 ticks: one slot left for the final 4
        let partial = vec![NoteEvent::note(60, Duration::SIXTEENTH); 14];
        for _ in 0..1000 {
            let out = fill_measure_remainder(partial.clone(), Key::default(), &mut rng);
            assert!(Measure::new(out).is_ok());
        }
        // 15 events, 30 ticks: cannot close without dropping one
        let partial = vec![NoteEvent::note(60, Duration::SIXTEENTH); 15];
        let out = fill_measure_remainder(partial, Key::default(), &mut rng);
        assert!(Measure::new(out).is_ok());
    }

    #[test]
    fn genome_string_roundtrip() {
        let g: Genome = "0011100000101".parse().unwrap();
        assert_eq!(g.to_string(), "0011100000101");
        assert_eq!("01x".parse::<Genome>(), Err(GenomeError::InvalidBit('x')));
    }
}
