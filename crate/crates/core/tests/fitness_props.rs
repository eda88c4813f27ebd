mod common;

use counterpoint_core::fitness::{
    harmonic_score, objective_rating, rhythmic_score, ObjectiveWeights,
};
use counterpoint_core::{Melody, NoteEvent, Pitch};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Moves every note by `shift` semitones, or `None` if any leaves the range.
fn transpose(m: &Melody, shift: i16) -> Option<Melody> {
    let mut lists = Vec::new();
    for measure in m.measures() {
        let mut events = Vec::new();
        for e in measure.events() {
            events.push(match e.pitch {
                Pitch::Note(p) => {
                    let q = i16::from(p) + shift;
                    if !(48..=83).contains(&q) {
                        return None;
                    }
                    NoteEvent::note(q as u8, e.duration)
                }
                Pitch::Rest => *e,
            });
        }
        lists.push(events);
    }
    Some(Melody::from_event_lists(lists, m.key()).unwrap())
}

#[test]
fn ratings_in_range_and_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..10_000 {
        let key = common::random_key(&mut rng);
        let a = common::random_melody(key, &mut rng);
        let b = common::random_melody(key, &mut rng);
        let h: f64 = rng.gen_range(0.0..=1.0);
        let w = ObjectiveWeights::new(h, 1.0 - h).unwrap();
        let r = objective_rating(&a, &b, &w);
        assert!(r.value() <= 100);
        assert_eq!(objective_rating(&a, &b, &w), r);
        let hs = harmonic_score(&a, &b);
        assert!((0.0..=1.0).contains(&hs));
        assert!((0.0..=1.0).contains(&rhythmic_score(&a)));
    }
}

/// Folds the top octave down so that a whole-melody octave shift fits.
fn low(m: &Melody) -> Melody {
    let lists = m
        .measures()
        .iter()
        .map(|measure| {
            measure
                .events()
                .iter()
                .map(|e| match e.pitch {
                    Pitch::Note(p) if p >= 72 => NoteEvent::note(p - 12, e.duration),
                    _ => *e,
                })
                .collect()
        })
        .collect();
    Melody::from_event_lists(lists, m.key()).unwrap()
}

// Intervals are taken as |a - b| mod 12 and the dissonant set is not closed
// under inversion, so only moving both voices together is harmless.
#[test]
fn harmonic_score_ignores_joint_octave_shift() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..2000 {
        let key = common::random_key(&mut rng);
        let a = low(&common::random_melody(key, &mut rng));
        let b = low(&common::random_melody(key, &mut rng));
        let (a2, b2) = (transpose(&a, 12).unwrap(), transpose(&b, 12).unwrap());
        assert_eq!(harmonic_score(&a2, &b2), harmonic_score(&a, &b));
    }
}

#[test]
fn crossing_voices_can_change_the_score() {
    use counterpoint_core::fitness::is_dissonant;
    // a minor third up is dissonant here, a major sixth (its inversion) is not
    assert!(is_dissonant(60, 63));
    assert!(!is_dissonant(63, 72));
}

#[test]
fn rhythmic_score_ignores_time_reversal() {
    let mut rng = ChaCha8Rng::seed_from_u64(52);
    for _ in 0..2000 {
        let m = common::random_melody(common::random_key(&mut rng), &mut rng);
        let reversed: Vec<Vec<NoteEvent>> = m
            .measures()
            .iter()
            .rev()
            .map(|measure| measure.events().iter().rev().copied().collect())
            .collect();
        let r = Melody::from_event_lists(reversed, m.key()).unwrap();
        assert!((rhythmic_score(&m) - rhythmic_score(&r)).abs() < 1e-12);
    }
}
