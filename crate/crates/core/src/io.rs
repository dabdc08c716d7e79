//! Binary containers for snapshots and bases, trajectory CSV and run
//! manifests.
//!
//! Both containers are little-endian: an 8-byte magic, a `u32` version,
//! a header of `u64` fields and the matrix entries as column-major `f64`.
//!
//! | magic      | header                                   | payload                      |
//! |------------|------------------------------------------|------------------------------|
//! | `SMORSNAP` | rows, cols, nt, count                    | `count` (lambda, mu), matrix |
//! | `SMORBASE` | kind code, rows, cols                    | matrix                       |

use std::fs;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::integrator::{SnapshotMatrix, Trajectory};
use crate::models::Param;
use crate::symplectic::{BasisKind, ReducedBasis};
use crate::{Error, Matrix, Result};

pub const SNAPSHOT_MAGIC: &[u8; 8] = b"SMORSNAP";
pub const BASIS_MAGIC: &[u8; 8] = b"SMORBASE";
pub const FORMAT_VERSION: u32 = 1;

fn put_u32(buf: &mut Vec<u8>, v: u32) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(buf: &mut Vec<u8>, v: f64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_matrix(buf: &mut Vec<u8>, m: &Matrix) {
    buf.reserve(8 * m.len());
    for v in m.as_slice() {
        put_f64(buf, *v);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::Format("container is truncated".into()))?;
        let out = &self.data[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Format("size field overflows".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn header(&mut self, magic: &[u8; 8]) -> Result<()> {
        if self.take(8)? != magic {
            return Err(Error::Format(format!(
                "bad magic, expected {}",
                String::from_utf8_lossy(magic)
            )));
        }
        let version = self.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported container version {version}")));
        }
        Ok(())
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<Matrix> {
        let len = rows
            .checked_mul(cols)
            .and_then(|l| l.checked_mul(8))
            .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
        let bytes = self.take(len)?;
        let values = bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect::<Vec<_>>();
        Ok(Matrix::from_vec(rows, cols, values))
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.data.len() {
            return Err(Error::Format(format!(
                "{} trailing bytes after container",
                self.data.len() - self.pos
            )));
        }
        Ok(())
    }
}

pub fn encode_snapshots(s: &SnapshotMatrix) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(SNAPSHOT_MAGIC);
    put_u32(&mut buf, FORMAT_VERSION);
    put_u64(&mut buf, s.data.nrows() as u64);
    put_u64(&mut buf, s.data.ncols() as u64);
    put_u64(&mut buf, s.nt as u64);
    put_u64(&mut buf, s.params.len() as u64);
    for p in &s.params {
        put_f64(&mut buf, p.lambda);
        put_f64(&mut buf, p.mu);
    }
    put_matrix(&mut buf, &s.data);
    buf
}

pub fn decode_snapshots(bytes: &[u8]) -> Result<SnapshotMatrix> {
    let mut r = Reader { data: bytes, pos: 0 };
    r.header(SNAPSHOT_MAGIC)?;
    let rows = r.usize()?;
    let cols = r.usize()?;
    let nt = r.usize()?;
    let count = r.usize()?;
    if count.checked_mul(nt) != Some(cols) {
        return Err(Error::Format(format!(
            "{cols} columns for {count} parameters x {nt} steps"
        )));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let lambda = r.f64()?;
        let mu = r.f64()?;
        params.push(Param::new(lambda, mu));
    }
    let data = r.matrix(rows, cols)?;
    r.finish()?;
    SnapshotMatrix::new(data, params, nt)
}

pub fn encode_basis(v: &ReducedBasis) -> Vec<u8> {
    let m = v.matrix();
    let mut buf = Vec::new();
    buf.extend_from_slice(BASIS_MAGIC);
    put_u32(&mut buf, FORMAT_VERSION);
    put_u64(&mut buf, v.kind().code() as u64);
    put_u64(&mut buf, m.nrows() as u64);
    put_u64(&mut buf, m.ncols() as u64);
    put_matrix(&mut buf, m);
    buf
}

pub fn decode_basis(bytes: &[u8]) -> Result<ReducedBasis> {
    let mut r = Reader { data: bytes, pos: 0 };
    r.header(BASIS_MAGIC)?;
    let code = r.u64()?;
    let kind = u32::try_from(code)
        .ok()
        .and_then(BasisKind::from_code)
        .ok_or_else(|| Error::Format(format!("unknown basis kind code {code}")))?;
    let rows = r.usize()?;
    let cols = r.usize()?;
    let m = r.matrix(rows, cols)?;
    r.finish()?;
    ReducedBasis::new(m, kind)
}

/// Writes `bytes` to `path` and returns the hex SHA-256 of the contents.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<String> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, bytes)?;
    Ok(sha256_hex(bytes))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    let mut f = fs::File::open(path)?;
    let mut out = Vec::new();
    f.read_to_end(&mut out)?;
    Ok(out)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn write_snapshots(path: &Path, s: &SnapshotMatrix) -> Result<String> {
    write_bytes(path, &encode_snapshots(s))
}

pub fn read_snapshots(path: &Path) -> Result<SnapshotMatrix> {
    decode_snapshots(&read_bytes(path)?)
}

pub fn write_basis(path: &Path, v: &ReducedBasis) -> Result<String> {
    write_bytes(path, &encode_basis(v))
}

pub fn read_basis(path: &Path) -> Result<ReducedBasis> {
    decode_basis(&read_bytes(path)?)
}

/// `t,x0,x1,...` with one row per time step.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    let mut header = vec!["t".to_string()];
    header.extend((0..traj.dim()).map(|i| format!("x{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for (i, t) in traj.times.iter().enumerate() {
        let mut row = vec![format_f64(*t)];
        row.extend(traj.states.column(i).iter().map(|v| format_f64(*v)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error)?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut dim = None;
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::Format(format!("`{s}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        if row.is_empty() || *dim.get_or_insert(row.len() - 1) != row.len() - 1 {
            return Err(Error::Format("ragged trajectory CSV".into()));
        }
        times.push(row[0]);
        values.extend_from_slice(&row[1..]);
    }
    let dim = dim.unwrap_or(0);
    Ok(Trajectory {
        states: Matrix::from_vec(dim, times.len(), values),
        times,
        param: None,
    })
}

/// Shortest representation that round-trips exactly.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:e}")
    }
}

pub(crate) fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}

/// Description of a written artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub file: String,
    pub sha256: String,
    pub rows: usize,
    pub cols: usize,
    pub nt: usize,
    pub seed: u64,
    pub params: Vec<Param>,
}

impl Manifest {
    pub fn for_snapshots(file: &str, sha256: String, s: &SnapshotMatrix, seed: u64) -> Self {
        Self {
            file: file.to_string(),
            sha256,
            rows: s.data.nrows(),
            cols: s.data.ncols(),
            nt: s.nt,
            seed,
            params: s.params.clone(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip() {
        let data = Matrix::from_fn(4, 6, |i, j| (i as f64 - 1.5) * 0.1 + j as f64 * 1e-300);
        let s = SnapshotMatrix::new(data, vec![Param::new(1.0, 2.0), Param::new(3.0, 4.0)], 3).unwrap();
        let bytes = encode_snapshots(&s);
        assert_eq!(&bytes[..8], SNAPSHOT_MAGIC);
        assert_eq!(decode_snapshots(&bytes).unwrap(), s);
    }

    #[test]
    fn truncated_and_trailing_rejected() {
        let s = SnapshotMatrix::new(Matrix::zeros(2, 2), vec![Param::new(1.0, 1.0)], 2).unwrap();
        let bytes = encode_snapshots(&s);
        assert!(matches!(
            decode_snapshots(&bytes[..bytes.len() - 1]),
            Err(Error::Format(_))
        ));
        let mut long = bytes.clone();
        long.push(0);
        assert!(matches!(decode_snapshots(&long), Err(Error::Format(_))));
        assert!(matches!(decode_basis(&bytes), Err(Error::Format(_))));
    }

    #[test]
    fn basis_round_trip() {
        let v = ReducedBasis::new(Matrix::identity(4, 2), BasisKind::OrthonormalSymplectic).unwrap();
        let back = decode_basis(&encode_basis(&v)).unwrap();
        assert_eq!(back.matrix(), v.matrix());
        assert_eq!(back.kind(), v.kind());
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.0, -1.5, 1e-300, std::f64::consts::PI, 6.02214076e23] {
            assert_eq!(format_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn sha_of_empty() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
