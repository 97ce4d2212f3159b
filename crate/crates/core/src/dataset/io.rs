//! `.utd` dataset files.
//!
//! Layout: 4-byte magic, `u32` LE header length, JSON header, then the payload
//! of length-prefixed records. Each record is a `u32` LE byte count followed by
//! `u16` object-id length, object id (UTF-8), `u8` material, `f64` angle,
//! `f64` force, 72 `f64` uSkin values and 27 `f64` PapillArray values, all
//! little-endian. The header carries a CRC-32 of the payload, which is checked
//! before any record is decoded.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PairedSample;
use crate::sensor::{FrameMeta, Material, SensorKind, SensorSpec, TactileFrame};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"UTD\x01";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub version: u32,
    pub seed: u64,
    pub sample_count: usize,
    pub sensors: Vec<SensorSpec>,
    pub payload_bytes: usize,
    pub payload_crc32: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetFile {
    pub header: DatasetHeader,
    pub samples: Vec<PairedSample>,
}

fn encode_record(s: &PairedSample, out: &mut Vec<u8>) -> Result<()> {
    let m = s.meta();
    let id = m.object_id.as_bytes();
    let id_len = u16::try_from(id.len())
        .map_err(|_| Error::Data(format!("object id '{}' too long", m.object_id)))?;
    let body_len =
        2 + id.len() + 1 + 16 + 8 * (SensorKind::USkin.flat_len() + SensorKind::Papill.flat_len());
    out.extend_from_slice(&(body_len as u32).to_le_bytes());
    out.extend_from_slice(&id_len.to_le_bytes());
    out.extend_from_slice(id);
    out.push(match m.material {
        Material::Rigid => 0,
        Material::Soft => 1,
    });
    out.extend_from_slice(&m.angle_deg.to_le_bytes());
    out.extend_from_slice(&m.force_target_n.to_le_bytes());
    for v in s.uskin.flatten().into_iter().chain(s.papill.flatten()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Format("unexpected end of data".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

fn decode_record(r: &mut Reader<'_>) -> Result<PairedSample> {
    let len = r.u32()? as usize;
    let mut rec = Reader {
        buf: r.take(len)?,
        pos: 0,
    };
    let id_len = rec.u16()? as usize;
    let object_id = String::from_utf8(rec.take(id_len)?.to_vec())
        .map_err(|_| Error::Format("object id is not UTF-8".into()))?;
    let material = match rec.take(1)?[0] {
        0 => Material::Rigid,
        1 => Material::Soft,
        other => return Err(Error::Format(format!("unknown material tag {other}"))),
    };
    let meta = FrameMeta {
        object_id,
        material,
        angle_deg: rec.f64()?,
        force_target_n: rec.f64()?,
    };
    let u = rec.f64s(SensorKind::USkin.flat_len())?;
    let p = rec.f64s(SensorKind::Papill.flat_len())?;
    if rec.pos != len {
        return Err(Error::Format("record has trailing bytes".into()));
    }
    PairedSample::new(
        TactileFrame::unflatten(SensorKind::USkin, &u, meta.clone())?,
        TactileFrame::unflatten(SensorKind::Papill, &p, meta)?,
    )
}

/// Writes `samples` to `path` (via a temporary file and rename). Missing
/// parent directories are created.
pub fn save_dataset(
    samples: &[PairedSample],
    seed: u64,
    path: impl AsRef<Path>,
) -> Result<DatasetHeader> {
    let path = path.as_ref();
    let mut payload = Vec::new();
    for s in samples {
        encode_record(s, &mut payload)?;
    }
    let header = DatasetHeader {
        version: FORMAT_VERSION,
        seed,
        sample_count: samples.len(),
        sensors: SensorKind::ALL.iter().map(|k| k.spec()).collect(),
        payload_bytes: payload.len(),
        payload_crc32: crc32fast::hash(&payload),
    };
    let header_json = serde_json::to_vec(&header)?;

    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("utd.partial");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(MAGIC)?;
        f.write_all(&(header_json.len() as u32).to_le_bytes())?;
        f.write_all(&header_json)?;
        f.write_all(&payload)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(header)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<DatasetFile> {
    let bytes = fs::read(path)?;
    let mut r = Reader {
        buf: &bytes,
        pos: 0,
    };
    if r.take(4)
        .map_err(|_| Error::Format("file too short".into()))?
        != MAGIC
    {
        return Err(Error::Format("not a .utd dataset (bad magic)".into()));
    }
    let header_len = r.u32()? as usize;
    let header: DatasetHeader = serde_json::from_slice(r.take(header_len)?)?;
    if header.version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "dataset version {} (this build reads {FORMAT_VERSION})",
            header.version
        )));
    }
    let expected_sensors: Vec<SensorSpec> = SensorKind::ALL.iter().map(|k| k.spec()).collect();
    if header.sensors != expected_sensors {
        return Err(Error::Format("dataset sensor layouts do not match".into()));
    }
    let payload = &bytes[r.pos..];
    if payload.len() != header.payload_bytes {
        return Err(Error::Format(format!(
            "payload is {} bytes, header says {} (truncated?)",
            payload.len(),
            header.payload_bytes
        )));
    }
    let actual = crc32fast::hash(payload);
    if actual != header.payload_crc32 {
        return Err(Error::Checksum {
            expected: header.payload_crc32,
            actual,
        });
    }
    let mut pr = Reader {
        buf: payload,
        pos: 0,
    };
    let samples = (0..header.sample_count)
        .map(|_| decode_record(&mut pr))
        .collect::<Result<Vec<_>>>()?;
    if pr.pos != payload.len() {
        return Err(Error::Format("payload has trailing bytes".into()));
    }
    Ok(DatasetFile { header, samples })
}
