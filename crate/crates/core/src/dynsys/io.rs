//! FNCDS1 dataset files, their JSON sidecar and CSV export.
//!
//! Binary layout (little-endian):
//!
//! ```text
//! "FNCDS1\0"  u32 N  u32 T  u32 C
//! N × ( u64 seed  u32 class  u32 subclass  T × f64 times  T × f64 values )
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{default_split, Dataset, Split, Trajectory};

pub const MAGIC: &[u8; 7] = b"FNCDS1\0";

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    generator: String,
    args: BTreeMap<String, serde_json::Value>,
    trajectories: Vec<SidecarEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SidecarEntry {
    id: u64,
    split: Split,
    params: BTreeMap<String, f64>,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(ds: &Dataset) -> Result<Vec<u8>> {
    let t = ds.grid_size;
    let mut buf = Vec::with_capacity(19 + ds.len() * (16 + 16 * t));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(ds.len() as u32).to_le_bytes());
    buf.extend_from_slice(&(t as u32).to_le_bytes());
    buf.extend_from_slice(&(ds.num_classes as u32).to_le_bytes());
    for tr in &ds.trajectories {
        if tr.len() != t {
            return Err(Error::Shape(format!("trajectory {} has {} samples, expected {t}", tr.id, tr.len())));
        }
        buf.extend_from_slice(&tr.seed.to_le_bytes());
        buf.extend_from_slice(&tr.class_label.to_le_bytes());
        buf.extend_from_slice(&tr.subclass_label.to_le_bytes());
        for v in tr.times.iter().chain(&tr.values) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(buf)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return Err(Error::Format {
                offset: self.pos as u64,
                msg: format!("truncated: need {n} bytes, {} left", self.buf.len() - self.pos),
            });
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(8 * n)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    }
}

pub fn decode(buf: &[u8]) -> Result<Dataset> {
    let mut r = Reader { buf, pos: 0 };
    if r.take(MAGIC.len())? != MAGIC {
        return Err(Error::Format { offset: 0, msg: "bad magic, not an FNCDS1 file".into() });
    }
    let n = r.u32()? as usize;
    let t = r.u32()? as usize;
    let c = r.u32()? as usize;
    let expected = 19 + n * (16 + 16 * t);
    if buf.len() != expected {
        return Err(Error::Format {
            offset: buf.len().min(expected) as u64,
            msg: format!("payload length {} does not match header (expected {expected})", buf.len()),
        });
    }
    let mut trajectories = Vec::with_capacity(n);
    for id in 0..n {
        let seed = r.u64()?;
        let class_label = r.u32()?;
        let subclass_label = r.u32()?;
        let times = r.f64s(t)?;
        let values = r.f64s(t)?;
        trajectories.push(Trajectory {
            id: id as u64,
            times,
            values,
            class_label,
            subclass_label,
            params: BTreeMap::new(),
            seed,
        });
    }
    Ok(Dataset {
        name: "custom".into(),
        trajectories,
        grid_size: t,
        split: vec![Split::Train; n],
        num_classes: c,
        args: BTreeMap::new(),
    })
}

/// Write the binary file and its `.json` sidecar.
pub fn save(ds: &Dataset, path: &Path) -> Result<()> {
    fs::write(path, encode(ds)?)?;
    let sidecar = Sidecar {
        generator: ds.name.clone(),
        args: ds.args.clone(),
        trajectories: ds
            .trajectories
            .iter()
            .zip(&ds.split)
            .map(|(t, s)| SidecarEntry { id: t.id, split: *s, params: t.params.clone() })
            .collect(),
    };
    let mut f = fs::File::create(sidecar_path(path))?;
    serde_json::to_writer(&mut f, &sidecar)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Load a dataset; without a sidecar, splits follow the default hold-out rule
/// over class-major groups and parameters are empty.
pub fn load(path: &Path) -> Result<Dataset> {
    let mut ds = decode(&fs::read(path)?)?;
    let side = sidecar_path(path);
    if side.exists() {
        let sc: Sidecar = serde_json::from_slice(&fs::read(&side)?)?;
        if sc.trajectories.len() != ds.len() {
            return Err(Error::Format {
                offset: 0,
                msg: format!("sidecar lists {} trajectories, binary has {}", sc.trajectories.len(), ds.len()),
            });
        }
        for (i, e) in sc.trajectories.into_iter().enumerate() {
            ds.trajectories[i].id = e.id;
            ds.trajectories[i].params = e.params;
            ds.split[i] = e.split;
        }
        ds.name = sc.generator;
        ds.args = sc.args;
    } else {
        let mut counter: BTreeMap<(u32, u32), usize> = BTreeMap::new();
        for (i, t) in ds.trajectories.iter().enumerate() {
            let c = counter.entry((t.class_label, t.subclass_label)).or_default();
            ds.split[i] = default_split(*c);
            *c += 1;
        }
    }
    Ok(ds)
}

/// One row per trajectory: `id,class,subclass,v_0..v_{T-1}`.
pub fn write_csv(ds: &Dataset, out: &mut impl Write) -> Result<()> {
    write!(out, "id,class,subclass")?;
    for j in 0..ds.grid_size {
        write!(out, ",v_{j}")?;
    }
    writeln!(out)?;
    for t in &ds.trajectories {
        write!(out, "{},{},{}", t.id, t.class_label, t.subclass_label)?;
        for v in &t.values {
            write!(out, ",{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::gen_ode6;

    #[test]
    fn round_trip_with_sidecar() {
        let ds = gen_ode6(1, 4).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.fncds");
        save(&ds, &p).unwrap();
        let back = load(&p).unwrap();
        assert_eq!(back, ds);
    }

    #[test]
    fn header_layout() {
        let ds = gen_ode6(1, 4).unwrap();
        let bytes = encode(&ds).unwrap();
        assert_eq!(&bytes[..7], MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[7..11].try_into().unwrap()), 18);
        assert_eq!(u32::from_le_bytes(bytes[11..15].try_into().unwrap()), 101);
        assert_eq!(u32::from_le_bytes(bytes[15..19].try_into().unwrap()), 6);
        assert_eq!(bytes.len(), 19 + 18 * (16 + 16 * 101));
    }

    #[test]
    fn truncated_and_bad_magic_are_rejected() {
        let ds = gen_ode6(1, 4).unwrap();
        let bytes = encode(&ds).unwrap();
        assert!(matches!(decode(&bytes[..bytes.len() - 3]), Err(Error::Format { .. })));
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(decode(&bad), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let ds = gen_ode6(1, 4).unwrap();
        let mut out = Vec::new();
        write_csv(&ds, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 19);
        assert!(lines[0].starts_with("id,class,subclass,v_0,"));
        assert_eq!(lines[1].split(',').count(), 3 + 101);
    }
}
