//! Crossover with repair, and the pairwise musical mutation operators.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::genome::{
    encode_melody, events_to_close, fill_measure_remainder, random_measure, random_pitch_in_key,
    Duration, Genome, Key, Measure, Melody, NoteEvent, Pitch, EVENT_BITS, MAX_EVENTS_PER_MEASURE,
    MAX_PITCH, MEASURES, MEASURE_TICKS, MIN_PITCH,
};

/// Chance of inserting an extra event between a mutated pair.
pub const INSERT_PROBABILITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairOperator {
    Invert,
    Reverse,
    Augment,
    Diminish,
}

impl PairOperator {
    /// Application order when several operators fire on one pair.
    pub const CANONICAL_ORDER: [PairOperator; 4] = [
        PairOperator::Invert,
        PairOperator::Reverse,
        PairOperator::Augment,
        PairOperator::Diminish,
    ];

    fn bit(self) -> u8 {
        match self {
            PairOperator::Invert => 0b0001,
            PairOperator::Reverse => 0b0010,
            PairOperator::Augment => 0b0100,
            PairOperator::Diminish => 0b1000,
        }
    }
}

/// A non-empty subset of the four pair operators.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct OperatorSet(u8);

impl OperatorSet {
    /// Number of distinct non-empty subsets.
    pub const COUNT: usize = 15;

    pub fn from_mask(mask: u8) -> Option<Self> {
        (1..=15).contains(&mask).then_some(Self(mask))
    }

    pub fn of(ops: &[PairOperator]) -> Option<Self> {
        Self::from_mask(ops.iter().fold(0, |m, op| m | op.bit()))
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    /// Uniform over the 15 subsets.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self(rng.gen_range(1..=15))
    }

    pub fn contains(self, op: PairOperator) -> bool {
        self.0 & op.bit() != 0
    }

    /// Members in canonical order.
    pub fn operators(self) -> impl Iterator<Item = PairOperator> {
        PairOperator::CANONICAL_ORDER
            .into_iter()
            .filter(move |op| self.contains(*op))
    }
}

impl fmt::Debug for OperatorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.operators()).finish()
    }
}

/// Shifts by octaves until inside the representable range.
fn fold_into_range(pitch: i32) -> u8 {
    let (lo, hi) = (i32::from(MIN_PITCH), i32::from(MAX_PITCH));
    let mut p = pitch;
    while p < lo {
        p += 12;
    }
    while p > hi {
        p -= 12;
    }
    p as u8
}

pub fn apply_pair_operator(
    op: PairOperator,
    first: NoteEvent,
    second: NoteEvent,
) -> (NoteEvent, NoteEvent) {
    if op == PairOperator::Reverse {
        return (second, first);
    }
    let (Pitch::Note(p1), Pitch::Note(p2)) = (first.pitch, second.pitch) else {
        return (first, second);
    };
    let (p1, p2) = (i32::from(p1), i32::from(p2));
    let moved = match op {
        PairOperator::Invert => 2 * p1 - p2,
        PairOperator::Augment if p2 >= p1 => p2 + 1,
        PairOperator::Augment => p2 - 1,
        PairOperator::Diminish if p2 > p1 => p2 - 1,
        PairOperator::Diminish if p2 < p1 => p2 + 1,
        PairOperator::Diminish => p2,
        PairOperator::Reverse => unreachable!(),
    };
    let second = NoteEvent {
        pitch: Pitch::Note(fold_into_range(moved)),
        ..second
    };
    (first, second)
}

pub fn apply_operator_set(
    set: OperatorSet,
    first: NoteEvent,
    second: NoteEvent,
) -> (NoteEvent, NoteEvent) {
    set.operators()
        .fold((first, second), |(a, b), op| apply_pair_operator(op, a, b))
}

/// Places a random in-key note between two adjacent events, taking its
/// length from one neighbour so the total is unchanged. The neighbour is
/// removed when it cannot be shortened to another valid duration.
pub fn insert_with_compensation<R: Rng + ?Sized>(
    prev: NoteEvent,
    next: NoteEvent,
    key: Key,
    rng: &mut R,
) -> Vec<NoteEvent> {
    let shorten_prev = rng.gen_bool(0.5);
    let neighbour = if shorten_prev { prev } else { next };
    let available = neighbour.ticks();
    let splits: Vec<Duration> = Duration::ALL
        .iter()
        .copied()
        .filter(|d| d.ticks() < available && Duration::from_ticks(available - d.ticks()).is_ok())
        .collect();
    let pitch = Pitch::Note(random_pitch_in_key(key, rng));
    let (inserted, shrunk) = match splits.choose(rng) {
        Some(&d) => {
            let rest = Duration::from_ticks(available - d.ticks()).expect("filtered");
            (
                NoteEvent { pitch, duration: d },
                Some(NoteEvent {
                    duration: rest,
                    ..neighbour
                }),
            )
        }
        None => (
            NoteEvent {
                pitch,
                duration: neighbour.duration,
            },
            None,
        ),
    };
    let mut out = Vec::with_capacity(3);
    if shorten_prev {
        out.extend(shrunk);
        out.push(inserted);
        out.push(next);
    } else {
        out.push(prev);
        out.push(inserted);
        out.extend(shrunk);
    }
    out
}

/// Mutates a melody pair by pair within each measure.
///
/// Pairs are disjoint, `(e0, e1), (e2, e3), ...`; an odd trailing event is
/// kept as is. Every pair gets a uniformly drawn operator subset and, with
/// probability 0.2, an inserted event. Insertions that would push a measure
/// past 15 events are undone, latest first.
pub fn mutate<R: Rng + ?Sized>(melody: &Melody, rng: &mut R) -> Melody {
    let key = melody.key();
    let measures = melody
        .measures()
        .iter()
        .map(|measure| {
            let events = measure.events();
            let mut out = Vec::with_capacity(events.len() + 4);
            let mut pairs = events.chunks_exact(2);
            for pair in pairs.by_ref() {
                let set = OperatorSet::sample(rng);
                let (a, b) = apply_operator_set(set, pair[0], pair[1]);
                if rng.gen_bool(INSERT_PROBABILITY) {
                    out.push(PairSlot::Inserted(
                        (a, b),
                        insert_with_compensation(a, b, key, rng),
                    ));
                } else {
                    out.push(PairSlot::Plain(a, b));
                }
            }
            let trailing = pairs.remainder().first().copied();
            flatten_within_limit(out, trailing)
        })
        .map(|events| Measure::new(events).expect("mutation preserves measure validity"))
        .collect();
    Melody::new(measures, key).expect("mutation preserves measure count")
}

enum PairSlot {
    Plain(NoteEvent, NoteEvent),
    /// Original pair and its expansion.
    Inserted((NoteEvent, NoteEvent), Vec<NoteEvent>),
}

/// Expands pair slots, reverting insertions that would exceed the per-measure
/// event limit. Insertions are dropped from the end backwards.
fn flatten_within_limit(mut slots: Vec<PairSlot>, trailing: Option<NoteEvent>) -> Vec<NoteEvent> {
    let count = |slots: &[PairSlot]| -> usize {
        slots
            .iter()
            .map(|s| match s {
                PairSlot::Plain(..) => 2,
                PairSlot::Inserted(_, v) => v.len(),
            })
            .sum::<usize>()
            + usize::from(trailing.is_some())
    };
    while count(&slots) > MAX_EVENTS_PER_MEASURE {
        let last_growth = slots
            .iter()
            .rposition(|s| matches!(s, PairSlot::Inserted(_, v) if v.len() > 2))
            .expect("only insertions grow a measure");
        let PairSlot::Inserted((a, b), _) = slots[last_growth] else {
            unreachable!()
        };
        slots[last_growth] = PairSlot::Plain(a, b);
    }
    let mut out = Vec::new();
    for slot in slots {
        match slot {
            PairSlot::Plain(a, b) => out.extend([a, b]),
            PairSlot::Inserted(_, v) => out.extend(v),
        }
    }
    out.extend(trailing);
    out
}

/// What [`repair`] had to do to produce a valid melody.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RepairAction {
    /// Events from this index on were discarded.
    Truncated { at_event: usize },
    /// Random events or measures were appended to reach 256 ticks.
    Padded { added_events: usize },
    /// Truncation left the melody short and padding completed it.
    ReverseFallback,
}

/// Forces an arbitrary bitstring into a valid melody.
///
/// Events are kept greedily while they fit inside the current measure, the
/// measure can still be closed within the event limit, and the melody has not
/// reached 256 ticks. Everything from the first misfit on is dropped; a short
/// result is then padded with random in-key events and measures.
pub fn repair<R: Rng + ?Sized>(
    genome: &Genome,
    key: Key,
    rng: &mut R,
) -> (Melody, Vec<RepairAction>) {
    let mut actions = Vec::new();
    let mut closed: Vec<Vec<NoteEvent>> = Vec::with_capacity(MEASURES);
    let mut open: Vec<NoteEvent> = Vec::new();
    let mut in_measure = 0u32;
    for (index, event) in genome.events().enumerate() {
        let fits = closed.len() < MEASURES && {
            let filled = in_measure + event.ticks();
            filled <= MEASURE_TICKS
                && open.len() + 1 + events_to_close(MEASURE_TICKS - filled)
                    <= MAX_EVENTS_PER_MEASURE
        };
        if !fits {
            actions.push(RepairAction::Truncated { at_event: index });
            break;
        }
        in_measure += event.ticks();
        open.push(event);
        if in_measure == MEASURE_TICKS {
            closed.push(std::mem::take(&mut open));
            in_measure = 0;
        }
    }

    if closed.len() < MEASURES {
        let before = closed.iter().map(Vec::len).sum::<usize>() + open.len();
        if !open.is_empty() {
            closed.push(fill_measure_remainder(open, key, rng));
        }
        while closed.len() < MEASURES {
            closed.push(random_measure(key, rng).into_events());
        }
        let after = closed.iter().map(Vec::len).sum::<usize>();
        if !actions.is_empty() {
            actions.push(RepairAction::ReverseFallback);
        }
        actions.push(RepairAction::Padded {
            added_events: after.saturating_sub(before),
        });
    }

    let melody = Melody::from_event_lists(closed, key).expect("repair yields valid measures");
    (melody, actions)
}

#[derive(Debug, Clone)]
pub struct CrossoverOutcome {
    pub product_a: Melody,
    pub product_b: Melody,
    pub cut_bit: usize,
    pub repairs_a: Vec<RepairAction>,
    pub repairs_b: Vec<RepairAction>,
}

/// One-point bit-level crossover at a uniform cut in `1..min(a, b)`.
pub fn crossover<R: Rng + ?Sized>(
    first: &Melody,
    second: &Melody,
    rng: &mut R,
) -> CrossoverOutcome {
    let shorter = encode_melody(first).len().min(encode_melody(second).len());
    debug_assert!(shorter >= 8 * EVENT_BITS);
    let cut = rng.gen_range(1..shorter);
    crossover_at(first, second, cut, rng)
}

/// Crossover at a fixed cut. `product_a` takes the head of `second` and the
/// tail of `first`; `product_b` the reverse.
pub fn crossover_at<R: Rng + ?Sized>(
    first: &Melody,
    second: &Melody,
    cut: usize,
    rng: &mut R,
) -> CrossoverOutcome {
    let g1 = encode_melody(first);
    let g2 = encode_melody(second);
    assert!(
        cut >= 1 && cut < g1.len().min(g2.len()),
        "cut {cut} outside both parents"
    );
    let splice = |head: &Genome, tail: &Genome| {
        let mut bits = head.bits()[..cut].to_vec();
        bits.extend_from_slice(&tail.bits()[cut..]);
        Genome::from_bits(bits)
    };
    let key = first.key();
    let (product_a, repairs_a) = repair(&splice(&g2, &g1), key, rng);
    let (product_b, repairs_b) = repair(&splice(&g1, &g2), key, rng);
    CrossoverOutcome {
        product_a,
        product_b,
        cut_bit: cut,
        repairs_a,
        repairs_b,
    }
}
