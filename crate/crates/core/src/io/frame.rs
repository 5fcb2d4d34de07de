//! Fixed-layout data chunks sent from the board to the control unit.
//!
//! Layout, little-endian:
//!
//! | offset      | size | field                               |
//! |-------------|------|-------------------------------------|
//! | 0           | 4    | magic `PKCH`                        |
//! | 4           | 4    | sequence, u32                       |
//! | 8           | 2    | config id, u16                      |
//! | 10          | 2    | sample count `c`, u16               |
//! | 12          | 4c   | phase increments, i32, LSB 2π/2³²   |
//! | 12+4c       | 2c   | amplitudes, u16, LSB 1.25 V/2¹⁶     |
//! | 12+6c       | 8    | drift tuning word, u64 (48 bits)    |
//! | 20+6c       | 8    | monitor word, u64                   |
//! | 28+6c       | 4    | CRC-32 over bytes `0..28+6c`        |

use std::f64::consts::PI;

use super::crc::crc32;
use crate::error::{Error, Result};

pub const FRAME_MAGIC: [u8; 4] = *b"PKCH";
/// Bytes outside the sample arrays.
pub const FRAME_OVERHEAD: usize = 32;
/// Phase LSB, rad.
pub const PHASE_LSB: f64 = 2.0 * PI / 4_294_967_296.0;
/// Amplitude full scale, V.
pub const AMPLITUDE_FULL_SCALE: f64 = 1.25;
/// Amplitude LSB, V.
pub const AMPLITUDE_LSB: f64 = AMPLITUDE_FULL_SCALE / 65536.0;
const DRIFT_WORD_MASK: u64 = (1 << 48) - 1;

pub fn frame_len(count: usize) -> usize {
    FRAME_OVERHEAD + 6 * count
}

/// Largest sample count fitting in `bytes`.
pub fn samples_per_frame(bytes: usize) -> usize {
    bytes.saturating_sub(FRAME_OVERHEAD) / 6
}

/// Decoded or to-be-encoded chunk contents in physical units.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChunkFrame {
    pub sequence: u32,
    pub config_id: u16,
    /// Phase increments, rad.
    pub increments: Vec<f64>,
    /// Amplitudes, V.
    pub amplitudes: Vec<f64>,
    pub drift_word: u64,
    pub monitor: u64,
}

pub fn encode_phase(dphi: f64) -> Result<i32> {
    if !(-PI..=PI).contains(&dphi) {
        return Err(Error::Encoding(format!("phase increment {dphi} outside [-π, π]")));
    }
    let code = (dphi / PHASE_LSB).round();
    // +π and −π are the same increment; +π takes the top code
    Ok(code.min(i32::MAX as f64) as i32)
}

pub fn decode_phase(code: i32) -> f64 {
    code as f64 * PHASE_LSB
}

pub fn encode_amplitude(a: f64) -> Result<u16> {
    if !(0.0..=AMPLITUDE_FULL_SCALE).contains(&a) {
        return Err(Error::Encoding(format!(
            "amplitude {a} V outside [0, {AMPLITUDE_FULL_SCALE}]"
        )));
    }
    Ok((a / AMPLITUDE_LSB).round().min(u16::MAX as f64) as u16)
}

pub fn decode_amplitude(code: u16) -> f64 {
    code as f64 * AMPLITUDE_LSB
}

/// Serialize a chunk. Values outside the encodable range are rejected.
pub fn encode_chunk(frame: &ChunkFrame) -> Result<Vec<u8>> {
    let count = frame.increments.len();
    if frame.amplitudes.len() != count {
        return Err(Error::Encoding(format!(
            "{count} increments but {} amplitudes",
            frame.amplitudes.len()
        )));
    }
    if count > u16::MAX as usize {
        return Err(Error::Encoding(format!("{count} samples exceed the u16 count field")));
    }
    if frame.drift_word > DRIFT_WORD_MASK {
        return Err(Error::Encoding(format!("drift word {:#x} exceeds 48 bits", frame.drift_word)));
    }
    let mut out = Vec::with_capacity(frame_len(count));
    out.extend_from_slice(&FRAME_MAGIC);
    out.extend_from_slice(&frame.sequence.to_le_bytes());
    out.extend_from_slice(&frame.config_id.to_le_bytes());
    out.extend_from_slice(&(count as u16).to_le_bytes());
    for &d in &frame.increments {
        out.extend_from_slice(&encode_phase(d)?.to_le_bytes());
    }
    for &a in &frame.amplitudes {
        out.extend_from_slice(&encode_amplitude(a)?.to_le_bytes());
    }
    out.extend_from_slice(&frame.drift_word.to_le_bytes());
    out.extend_from_slice(&frame.monitor.to_le_bytes());
    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_le_bytes());
    Ok(out)
}

fn le_u16(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn le_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().expect("4 bytes"))
}

fn le_u64(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().expect("8 bytes"))
}

/// Length of the frame at the start of `bytes`, read from its count field.
pub fn peek_frame_len(bytes: &[u8]) -> Result<usize> {
    if bytes.len() < 12 {
        return Err(Error::Framing(format!("{} bytes cannot hold a frame header", bytes.len())));
    }
    Ok(frame_len(le_u16(bytes, 10) as usize))
}

/// Parse one frame occupying all of `bytes`. The CRC is checked before any
/// field is interpreted.
pub fn decode_chunk(bytes: &[u8]) -> Result<ChunkFrame> {
    if bytes.len() < FRAME_OVERHEAD {
        return Err(Error::Framing(format!("frame of {} bytes is truncated", bytes.len())));
    }
    let body = bytes.len() - 4;
    if crc32(&bytes[..body]) != le_u32(bytes, body) {
        // the sequence field is unverified here and only used for the report
        return Err(Error::Integrity {
            sequence: le_u32(bytes, 4),
        });
    }
    if bytes[..4] != FRAME_MAGIC {
        return Err(Error::Framing("bad frame magic".into()));
    }
    let count = le_u16(bytes, 10) as usize;
    if bytes.len() != frame_len(count) {
        return Err(Error::Framing(format!(
            "count {count} implies {} bytes, frame has {}",
            frame_len(count),
            bytes.len()
        )));
    }
    let phase_at = 12;
    let amp_at = phase_at + 4 * count;
    let tail = amp_at + 2 * count;
    Ok(ChunkFrame {
        sequence: le_u32(bytes, 4),
        config_id: le_u16(bytes, 8),
        increments: (0..count)
            .map(|k| decode_phase(le_u32(bytes, phase_at + 4 * k) as i32))
            .collect(),
        amplitudes: (0..count).map(|k| decode_amplitude(le_u16(bytes, amp_at + 2 * k))).collect(),
        drift_word: le_u64(bytes, tail),
        monitor: le_u64(bytes, tail + 8),
    })
}

/// Checks that sequence numbers increase and counts the chunks skipped.
#[derive(Debug, Clone, Default)]
pub struct SequenceTracker {
    last: Option<u32>,
    pub missing: u64,
}

impl SequenceTracker {
    /// Record `sequence`; returns how many chunks are missing before it.
    pub fn observe(&mut self, sequence: u32) -> Result<u32> {
        let gap = match self.last {
            None => 0,
            Some(prev) if sequence > prev => sequence - prev - 1,
            Some(prev) => {
                return Err(Error::Framing(format!(
                    "sequence {sequence} does not follow {prev}"
                )))
            }
        };
        self.last = Some(sequence);
        self.missing += gap as u64;
        Ok(gap)
    }
}

/// Decode back-to-back frames, returning each with the gap preceding it.
pub fn decode_stream(mut bytes: &[u8]) -> Result<Vec<(ChunkFrame, u32)>> {
    let mut tracker = SequenceTracker::default();
    let mut out = Vec::new();
    while !bytes.is_empty() {
        let len = peek_frame_len(bytes)?;
        if bytes.len() < len {
            return Err(Error::Framing(format!("final frame truncated: {} of {len} bytes", bytes.len())));
        }
        let frame = decode_chunk(&bytes[..len])?;
        let gap = tracker.observe(frame.sequence)?;
        out.push((frame, gap));
        bytes = &bytes[len..];
    }
    Ok(out)
}
