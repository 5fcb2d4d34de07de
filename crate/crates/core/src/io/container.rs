//! Self-describing acquisition container.
//!
//! ```text
//! "PHAQ" | version u16 | header length u32 | header (JSON) | header CRC u32
//! record*
//! 'E'
//! ```
//!
//! Records:
//!
//! * `'F'` stream u8, length u32, one wire frame (carries its own CRC)
//! * `'T'` length u32, payload, payload CRC u32; the payload is name length
//!   u16, UTF-8 name, value count u32, then little-endian f64 values
//!
//! All integers are little-endian and the CRC is the wire CRC.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::crc::crc32;
use super::frame::{decode_chunk, encode_chunk, ChunkFrame, SequenceTracker};
use crate::dsp::DemodConfig;
use crate::error::{Error, Result};
use crate::link::AlignedAcquisition;
use crate::signal::Scheme;

pub const FILE_MAGIC: [u8; 4] = *b"PHAQ";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionHeader {
    pub format_version: u16,
    pub demod: DemodConfig,
    /// SHA-256 of the generating scenario and run parameters, hex.
    pub scenario_hash: String,
    /// Start of the record on the common timescale, s.
    pub start_time: f64,
    /// Stream names, indexed by the stream id of each frame record.
    pub streams: Vec<String>,
    pub scheme: Option<Scheme>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// A sequence gap observed while reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub stream: u8,
    pub sequence: u32,
    pub missing: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcquisitionFile {
    pub header: AcquisitionHeader,
    pub frames: Vec<(u8, ChunkFrame)>,
    pub truth: Vec<(String, Vec<f64>)>,
    /// Filled when reading.
    pub gaps: Vec<Gap>,
}

fn read_exact<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<u8>> {
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Framing(format!("truncated {what}: {e}")))?;
    Ok(buf)
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    Ok(u32::from_le_bytes(read_exact(r, 4, what)?.try_into().expect("4 bytes")))
}

impl AcquisitionFile {
    pub fn new(header: AcquisitionHeader) -> Self {
        AcquisitionFile {
            header,
            frames: Vec::new(),
            truth: Vec::new(),
            gaps: Vec::new(),
        }
    }

    pub fn write<W: Write>(&self, w: &mut W) -> Result<()> {
        let header = serde_json::to_vec(&self.header).map_err(|e| Error::Encoding(e.to_string()))?;
        w.write_all(&FILE_MAGIC)?;
        w.write_all(&self.header.format_version.to_le_bytes())?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        w.write_all(&crc32(&header).to_le_bytes())?;
        for (stream, frame) in &self.frames {
            let bytes = encode_chunk(frame)?;
            w.write_all(b"F")?;
            w.write_all(&[*stream])?;
            w.write_all(&(bytes.len() as u32).to_le_bytes())?;
            w.write_all(&bytes)?;
        }
        for (name, values) in &self.truth {
            let mut payload = Vec::with_capacity(name.len() + 6 + 8 * values.len());
            payload.extend_from_slice(&(name.len() as u16).to_le_bytes());
            payload.extend_from_slice(name.as_bytes());
            payload.extend_from_slice(&(values.len() as u32).to_le_bytes());
            for v in values {
                payload.extend_from_slice(&v.to_le_bytes());
            }
            w.write_all(b"T")?;
            w.write_all(&(payload.len() as u32).to_le_bytes())?;
            w.write_all(&payload)?;
            w.write_all(&crc32(&payload).to_le_bytes())?;
        }
        w.write_all(b"E")?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut out = Vec::new();
        self.write(&mut out)?;
        Ok(out)
    }

    pub fn read<R: Read>(r: &mut R) -> Result<Self> {
        if read_exact(r, 4, "magic")? != FILE_MAGIC {
            return Err(Error::Framing("not an acquisition file".into()));
        }
        let version = u16::from_le_bytes(read_exact(r, 2, "version")?.try_into().expect("2 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Framing(format!("unsupported format version {version}")));
        }
        let len = read_u32(r, "header length")? as usize;
        let header = read_exact(r, len, "header")?;
        if read_u32(r, "header CRC")? != crc32(&header) {
            return Err(Error::Integrity { sequence: 0 });
        }
        let header: AcquisitionHeader =
            serde_json::from_slice(&header).map_err(|e| Error::Framing(format!("bad header: {e}")))?;
        let mut file = AcquisitionFile::new(header);
        let mut trackers: BTreeMap<u8, SequenceTracker> = BTreeMap::new();
        loop {
            let tag = read_exact(r, 1, "record tag")?[0];
            match tag {
                b'F' => {
                    let stream = read_exact(r, 1, "stream id")?[0];
                    let len = read_u32(r, "frame length")? as usize;
                    let frame = decode_chunk(&read_exact(r, len, "frame")?)?;
                    let missing = trackers.entry(stream).or_default().observe(frame.sequence)?;
                    if missing > 0 {
                        file.gaps.push(Gap {
                            stream,
                            sequence: frame.sequence,
                            missing,
                        });
                    }
                    file.frames.push((stream, frame));
                }
                b'T' => {
                    let len = read_u32(r, "channel length")? as usize;
                    let payload = read_exact(r, len, "channel")?;
                    if read_u32(r, "channel CRC")? != crc32(&payload) {
                        return Err(Error::Integrity { sequence: 0 });
                    }
                    file.truth.push(parse_channel(&payload)?);
                }
                b'E' => break,
                other => return Err(Error::Framing(format!("unknown record tag {other:#04x}"))),
            }
        }
        Ok(file)
    }

    pub fn from_bytes(mut bytes: &[u8]) -> Result<Self> {
        Self::read(&mut bytes)
    }

    pub fn stream_id(&self, name: &str) -> Option<u8> {
        self.header.streams.iter().position(|s| s == name).map(|i| i as u8)
    }

    /// Concatenated samples of one stream as frequency deviation, Hz.
    pub fn stream_frequency(&self, stream: u8) -> Vec<f64> {
        let scale = self.header.demod.f_out / TAU;
        self.frames
            .iter()
            .filter(|(s, _)| *s == stream)
            .flat_map(|(_, f)| f.increments.iter().map(move |d| d * scale))
            .collect()
    }

    pub fn stream_amplitude(&self, stream: u8) -> Vec<f64> {
        self.frames
            .iter()
            .filter(|(s, _)| *s == stream)
            .flat_map(|(_, f)| f.amplitudes.iter().copied())
            .collect()
    }

    /// A stream by name (as frequency) or a stored channel by name.
    pub fn channel(&self, name: &str) -> Option<Vec<f64>> {
        if let Some(id) = self.stream_id(name) {
            return Some(self.stream_frequency(id));
        }
        self.truth.iter().find(|(n, _)| n == name).map(|(_, v)| v.clone())
    }

    pub fn channel_names(&self) -> Vec<String> {
        self.header
            .streams
            .iter()
            .cloned()
            .chain(self.truth.iter().map(|(n, _)| n.clone()))
            .collect()
    }

    /// Package a two-board acquisition: one frame stream per board plus the
    /// drift, truth and time channels.
    pub fn from_acquisition(
        acq: &AlignedAcquisition,
        demod: DemodConfig,
        scenario_hash: String,
        amplitude: f64,
        chunk: usize,
    ) -> Result<Self> {
        let mut file = AcquisitionFile::new(AcquisitionHeader {
            format_version: FORMAT_VERSION,
            demod,
            scenario_hash,
            start_time: acq.common_time.first().copied().unwrap_or(0.0),
            streams: vec!["dnu1".into(), "dnu2".into()],
            scheme: Some(acq.scheme),
            metadata: BTreeMap::from([
                ("sync_residual".to_string(), format!("{:e}", acq.sync.residual)),
                ("sync_shift".to_string(), acq.sync.shift.to_string()),
            ]),
        });
        let chunk = chunk.max(1);
        let to_inc = TAU / acq.rate;
        let config_id = (demod.f_int / 1e3) as u16;
        let words = acq.dds_words.clone().unwrap_or_default();
        for (stream, dnu) in [&acq.dnu1, &acq.dnu2].into_iter().enumerate() {
            for (seq, block) in dnu.chunks(chunk).enumerate() {
                let end = ((seq + 1) * chunk).min(dnu.len());
                file.frames.push((
                    stream as u8,
                    ChunkFrame {
                        sequence: seq as u32,
                        config_id,
                        increments: block.iter().map(|d| d * to_inc).collect(),
                        amplitudes: vec![amplitude; block.len()],
                        drift_word: if stream == 1 { words.get(end - 1).copied().unwrap_or(0) } else { 0 },
                        monitor: 0,
                    },
                ));
            }
        }
        if let Some(d) = &acq.f_drift_record {
            file.truth.push(("f_drift".into(), d.clone()));
        }
        if let Some(t) = &acq.truth {
            for (name, v) in [("eta", &t.eta), ("delta", &t.delta), ("rho1", &t.rho1), ("rho2", &t.rho2)] {
                file.truth.push((name.into(), v.clone()));
            }
        }
        file.truth.push(("common_time".into(), acq.common_time.clone()));
        Ok(file)
    }
}

fn parse_channel(p: &[u8]) -> Result<(String, Vec<f64>)> {
    let bad = || Error::Framing("malformed channel record".into());
    if p.len() < 2 {
        return Err(bad());
    }
    let name_len = u16::from_le_bytes([p[0], p[1]]) as usize;
    let name_end = 2 + name_len;
    if p.len() < name_end + 4 {
        return Err(bad());
    }
    let name = String::from_utf8(p[2..name_end].to_vec()).map_err(|_| bad())?;
    let count = u32::from_le_bytes(p[name_end..name_end + 4].try_into().expect("4 bytes")) as usize;
    let data = &p[name_end + 4..];
    if data.len() != 8 * count {
        return Err(bad());
    }
    let values = data
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((name, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_file() -> AcquisitionFile {
        let mut f = AcquisitionFile::new(AcquisitionHeader {
            format_version: FORMAT_VERSION,
            demod: DemodConfig::nominal(100e3, 1e3).unwrap(),
            scenario_hash: "abc".into(),
            start_time: 0.25,
            streams: vec!["dnu1".into()],
            scheme: Some(Scheme::Heterodyne),
            metadata: BTreeMap::new(),
        });
        for seq in [0u32, 1, 3] {
            f.frames.push((
                0,
                ChunkFrame {
                    sequence: seq,
                    config_id: 1,
                    increments: vec![0.001 * seq as f64; 4],
                    amplitudes: vec![0.5; 4],
                    drift_word: 9,
                    monitor: 0,
                },
            ));
        }
        f.truth.push(("eta".into(), vec![1.5, -2.0, 3.25]));
        f
    }

    #[test]
    fn round_trip_and_gaps() {
        let f = sample_file();
        let bytes = f.to_bytes().unwrap();
        let g = AcquisitionFile::from_bytes(&bytes).unwrap();
        assert_eq!(g.header, f.header);
        assert_eq!(g.truth, f.truth);
        assert_eq!(g.frames.len(), 3);
        assert_eq!(
            g.gaps,
            vec![Gap {
                stream: 0,
                sequence: 3,
                missing: 1
            }]
        );
        assert_eq!(g.channel("eta").unwrap(), vec![1.5, -2.0, 3.25]);
        assert_eq!(g.channel("dnu1").unwrap().len(), 12);
        assert!(g.channel("nope").is_none());
        // stable bytes
        assert_eq!(g.to_bytes().unwrap(), bytes);
    }

    #[test]
    fn corruption_detected() {
        let bytes = sample_file().to_bytes().unwrap();
        for at in [20, bytes.len() / 2, bytes.len() - 10] {
            let mut b = bytes.clone();
            b[at] ^= 0x10;
            assert!(AcquisitionFile::from_bytes(&b).is_err(), "byte {at}");
        }
        assert!(AcquisitionFile::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(AcquisitionFile::from_bytes(b"nope").is_err());
    }
}
