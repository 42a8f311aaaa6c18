//! Binary field snapshots and atomic file output.
//!
//! Snapshot layout, little-endian throughout:
//!
//! | bytes      | content                                   |
//! |------------|-------------------------------------------|
//! | 8          | magic `FNLSNAP\0`                         |
//! | 4          | format version (`u32`)                    |
//! | 4          | `N` (`u32`)                               |
//! | 8 N        | points per axis (`u64`)                   |
//! | 8 N        | box length per axis (`f64`)               |
//! | 8 x 3      | `s`, `sigma`, `t` (`f64`)                 |
//! | 16 prod(n) | `re, im` pairs (`f64`), row-major, `x_N` fastest |

use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use fracnls::{Field64, Grid64, Params64};
use num_complex::Complex;

use crate::error::{HarnessError, Result};

pub const MAGIC: [u8; 8] = *b"FNLSNAP\0";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
    pub s: f64,
    pub sigma: f64,
    pub t: f64,
    pub values: Vec<Complex<f64>>,
}

impl Snapshot {
    pub fn from_field(u: &Field64, params: &Params64, t: f64) -> Self {
        let g = u.grid();
        Snapshot {
            shape: g.shape().to_vec(),
            lengths: g.lengths().to_vec(),
            s: params.s(),
            sigma: params.sigma(),
            t,
            values: u.physical().into_owned(),
        }
    }

    pub fn grid(&self) -> Result<Arc<Grid64>> {
        Grid64::new(&self.shape, &self.lengths).map_err(|e| HarnessError::Snapshot(e.to_string()))
    }

    pub fn to_field(&self) -> Result<Field64> {
        Field64::from_values(&self.grid()?, self.values.clone()).map_err(|e| HarnessError::Snapshot(e.to_string()))
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.shape.len();
        let mut out = Vec::with_capacity(16 + 16 * n + 24 + 16 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        for &k in &self.shape {
            out.extend_from_slice(&(k as u64).to_le_bytes());
        }
        for &l in &self.lengths {
            out.extend_from_slice(&l.to_le_bytes());
        }
        for v in [self.s, self.sigma, self.t] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(HarnessError::Snapshot("bad magic".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(HarnessError::Snapshot(format!("unsupported version {version}")));
        }
        let n = r.u32()? as usize;
        if n == 0 || n > 16 {
            return Err(HarnessError::Snapshot(format!("implausible dimension {n}")));
        }
        let shape: Vec<usize> = (0..n).map(|_| r.u64().map(|v| v as usize)).collect::<Result<_>>()?;
        let lengths: Vec<f64> = (0..n).map(|_| r.f64()).collect::<Result<_>>()?;
        let (s, sigma, t) = (r.f64()?, r.f64()?, r.f64()?);
        let count = shape.iter().try_fold(1usize, |a, &k| a.checked_mul(k));
        let expected = count.and_then(|c| c.checked_mul(16));
        if expected != Some(bytes.len() - r.pos) {
            return Err(HarnessError::Snapshot(format!(
                "payload has {} bytes, header implies {:?}",
                bytes.len() - r.pos,
                expected
            )));
        }
        let values = r.bytes[r.pos..]
            .chunks_exact(16)
            .map(|c| {
                Complex::new(
                    f64::from_le_bytes(c[..8].try_into().expect("8 bytes")),
                    f64::from_le_bytes(c[8..].try_into().expect("8 bytes")),
                )
            })
            .collect();
        Ok(Snapshot { shape, lengths, s, sigma, t, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.encode())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| HarnessError::io(path, e))?;
        Self::decode(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        let end = self.pos + k;
        if end > self.bytes.len() {
            return Err(HarnessError::Snapshot("truncated header".into()));
        }
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

/// Writes through a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp-{}", std::process::id()));
    let mut f = fs::File::create(&tmp).map_err(|e| HarnessError::io(&tmp, e))?;
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Round-trip float formatting used in every CSV.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        v.to_string()
    }
}

/// Renders a CSV table with a header row.
pub fn render_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| HarnessError::Serialize(e.to_string());
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(&row).map_err(err)?;
    }
    w.into_inner().map_err(|e| HarnessError::Serialize(e.to_string()))
}
