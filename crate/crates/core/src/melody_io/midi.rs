//! Standard MIDI file output.
//!
//! Format 1, 480 ticks per quarter: a tempo track (120 BPM, 4/4) followed by
//! one track per voice. One melody tick (a 32nd note) is 60 MIDI ticks.

use crate::genome::{Melody, Pitch, MELODY_TICKS};

pub const TICKS_PER_QUARTER: u16 = 480;
/// MIDI ticks per 32nd-note melody tick.
pub const MIDI_TICKS_PER_TICK: u32 = TICKS_PER_QUARTER as u32 / 8;
/// Microseconds per quarter note at 120 BPM.
pub const TEMPO_USPQ: u32 = 500_000;
pub const VELOCITY: u8 = 80;
/// Length of every voice track in MIDI ticks.
pub const TRACK_SPAN: u32 = MELODY_TICKS * MIDI_TICKS_PER_TICK;

pub const BASE_CHANNEL: u8 = 0;
pub const COUNTERPOINT_CHANNEL: u8 = 1;

fn write_vlq(buf: &mut Vec<u8>, value: u32) {
    debug_assert!(value < 1 << 28);
    let mut started = false;
    for shift in [21u32, 14, 7] {
        let group = (value >> shift) & 0x7f;
        if started || group != 0 {
            buf.push(group as u8 | 0x80);
            started = true;
        }
    }
    buf.push((value & 0x7f) as u8);
}

fn chunk(tag: &[u8; 4], body: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(body.len() + 8);
    out.extend_from_slice(tag);
    out.extend_from_slice(&(body.len() as u32).to_be_bytes());
    out.extend_from_slice(body);
    out
}

fn meta(buf: &mut Vec<u8>, delta: u32, kind: u8, data: &[u8]) {
    write_vlq(buf, delta);
    buf.extend_from_slice(&[0xff, kind]);
    write_vlq(buf, data.len() as u32);
    buf.extend_from_slice(data);
}

fn tempo_track() -> Vec<u8> {
    let mut body = Vec::new();
    meta(&mut body, 0, 0x03, b"Tempo");
    meta(&mut body, 0, 0x51, &TEMPO_USPQ.to_be_bytes()[1..]);
    // 4/4, 24 clocks per click, 8 32nds per quarter
    meta(&mut body, 0, 0x58, &[4, 2, 24, 8]);
    meta(&mut body, TRACK_SPAN, 0x2f, &[]);
    chunk(b"MTrk", &body)
}

fn voice_track(name: &str, melody: &Melody, channel: u8) -> Vec<u8> {
    let mut body = Vec::new();
    meta(&mut body, 0, 0x03, name.as_bytes());
    let mut pending = 0u32;
    for e in melody.events() {
        let span = e.ticks() * MIDI_TICKS_PER_TICK;
        match e.pitch {
            Pitch::Rest => pending += span,
            Pitch::Note(p) => {
                write_vlq(&mut body, pending);
                body.extend_from_slice(&[0x90 | channel, p, VELOCITY]);
                write_vlq(&mut body, span);
                body.extend_from_slice(&[0x80 | channel, p, 0]);
                pending = 0;
            }
        }
    }
    meta(&mut body, pending, 0x2f, &[]);
    chunk(b"MTrk", &body)
}

fn header(tracks: u16) -> Vec<u8> {
    let mut body = Vec::with_capacity(6);
    body.extend_from_slice(&1u16.to_be_bytes());
    body.extend_from_slice(&tracks.to_be_bytes());
    body.extend_from_slice(&TICKS_PER_QUARTER.to_be_bytes());
    chunk(b"MThd", &body)
}

/// Base melody on channel 0, counterpoint on channel 1.
pub fn render_midi(base: &Melody, counterpoint: &Melody) -> Vec<u8> {
    let mut out = header(3);
    out.extend(tempo_track());
    out.extend(voice_track("Base", base, BASE_CHANNEL));
    out.extend(voice_track(
        "Counterpoint",
        counterpoint,
        COUNTERPOINT_CHANNEL,
    ));
    out
}

/// A single voice, for previewing a base melody on its own.
pub fn render_single(melody: &Melody) -> Vec<u8> {
    let mut out = header(2);
    out.extend(tempo_track());
    out.extend(voice_track("Melody", melody, BASE_CHANNEL));
    out
}
