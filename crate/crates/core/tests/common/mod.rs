#![allow(dead_code)]

use counterpoint_core::genome::{random_measure, Duration, Key, Melody, NoteEvent};
use rand::Rng;

pub fn random_key<R: Rng>(rng: &mut R) -> Key {
    Key::major(rng.gen_range(0..12)).unwrap()
}

pub fn random_melody<R: Rng>(key: Key, rng: &mut R) -> Melody {
    let measures = (0..8).map(|_| random_measure(key, rng)).collect();
    Melody::new(measures, key).unwrap()
}

/// Brute-force validity check straight from the rules: 8 measures, each of
/// 1..=15 events summing to 32 ticks, with every pitch in 48..=83.
pub fn is_valid(m: &Melody) -> bool {
    m.measures().len() == 8
        && m.measures().iter().all(|measure| {
            let ev = measure.events();
            (1..=15).contains(&ev.len())
                && ev.iter().map(|e| e.ticks()).sum::<u32>() == 32
                && ev
                    .iter()
                    .all(|e| e.pitch.midi().is_none_or(|p| (48..=83).contains(&p)))
        })
}

pub fn whole_notes(pitches: [u8; 8]) -> Melody {
    Melody::from_event_lists(
        pitches
            .iter()
            .map(|&p| vec![NoteEvent::note(p, Duration::WHOLE)])
            .collect(),
        Key::default(),
    )
    .unwrap()
}

pub fn melodies_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../melodies")
}
