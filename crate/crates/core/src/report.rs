//! Binary containers, stats JSON, sparsity SVG and plot CSV.
//!
//! Every binary file starts with the 4-byte magic `LQF1` and a `u32` kind
//! tag, all little-endian:
//!
//! | kind | payload |
//! |------|---------|
//! | 0 matrix | `nrows u64, ncols u64, nnz u64, row_ptr i64[nrows+1], col_idx i64[nnz], values f64[nnz]` |
//! | 1 vector | `len u64, f64[len]` |
//! | 2 permutation | `len u64, i64[len]` (`pi[old] = new`) |

use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub const MAGIC: &[u8; 4] = b"LQF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u32)]
pub enum Kind {
    Matrix = 0,
    Vector = 1,
    Permutation = 2,
}

fn header(kind: Kind) -> Vec<u8> {
    let mut b = MAGIC.to_vec();
    b.extend((kind as u32).to_le_bytes());
    b
}

pub fn encode_matrix(m: &CsrMatrix) -> Vec<u8> {
    let mut b = header(Kind::Matrix);
    for x in [m.nrows, m.ncols, m.nnz()] {
        b.extend((x as u64).to_le_bytes());
    }
    b.extend(m.row_ptr.iter().flat_map(|&p| (p as i64).to_le_bytes()));
    b.extend(m.col_idx.iter().flat_map(|&c| (c as i64).to_le_bytes()));
    b.extend(m.values.iter().flat_map(|v| v.to_le_bytes()));
    b
}

pub fn encode_vector(v: &[f64]) -> Vec<u8> {
    let mut b = header(Kind::Vector);
    b.extend((v.len() as u64).to_le_bytes());
    b.extend(v.iter().flat_map(|x| x.to_le_bytes()));
    b
}

pub fn encode_permutation(pi: &[usize]) -> Vec<u8> {
    let mut b = header(Kind::Permutation);
    b.extend((pi.len() as u64).to_le_bytes());
    b.extend(pi.iter().flat_map(|&p| (p as i64).to_le_bytes()));
    b
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).ok_or(Error::TruncatedPayload)?;
        let s = self.buf.get(self.pos..end).ok_or(Error::TruncatedPayload)?;
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn count(&mut self) -> Result<usize> {
        let n = self.u64()?;
        // a count can never exceed the bytes left
        if n > (self.buf.len() - self.pos) as u64 {
            return Err(Error::TruncatedPayload);
        }
        Ok(n as usize)
    }

    fn index(&mut self) -> Result<usize> {
        let v = i64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::CorruptHeader(format!("negative index {v}")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn finish(self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::CorruptHeader(format!("{} trailing bytes", self.buf.len() - self.pos)));
        }
        Ok(())
    }
}

fn open(buf: &[u8], want: Kind) -> Result<Reader<'_>> {
    let mut r = Reader { buf, pos: 0 };
    let magic = r.take(4).map_err(|_| Error::CorruptHeader("short header".into()))?;
    if magic != MAGIC {
        return Err(Error::CorruptHeader("bad magic".into()));
    }
    let kind = u32::from_le_bytes(r.take(4).map_err(|_| Error::CorruptHeader("short header".into()))?.try_into().unwrap());
    if kind != want as u32 {
        return Err(Error::CorruptHeader(format!("kind {kind}, expected {}", want as u32)));
    }
    Ok(r)
}

pub fn decode_matrix(buf: &[u8]) -> Result<CsrMatrix> {
    let mut r = open(buf, Kind::Matrix)?;
    let nrows = r.count()?;
    let ncols = r.u64()? as usize;
    let nnz = r.count()?;
    let row_ptr = (0..=nrows).map(|_| r.index()).collect::<Result<Vec<_>>>()?;
    let col_idx = (0..nnz).map(|_| r.index()).collect::<Result<Vec<_>>>()?;
    let values = (0..nnz).map(|_| r.f64()).collect::<Result<Vec<_>>>()?;
    r.finish()?;
    let m = CsrMatrix { nrows, ncols, row_ptr, col_idx, values };
    if !m.validate() {
        return Err(Error::CorruptHeader("inconsistent CSR structure".into()));
    }
    Ok(m)
}

pub fn decode_vector(buf: &[u8]) -> Result<Vec<f64>> {
    let mut r = open(buf, Kind::Vector)?;
    let n = r.count()?;
    let v = (0..n).map(|_| r.f64()).collect::<Result<_>>()?;
    r.finish()?;
    Ok(v)
}

pub fn decode_permutation(buf: &[u8]) -> Result<Vec<usize>> {
    let mut r = open(buf, Kind::Permutation)?;
    let n = r.count()?;
    let v = (0..n).map(|_| r.index()).collect::<Result<_>>()?;
    r.finish()?;
    Ok(v)
}

pub fn write_matrix(m: &CsrMatrix, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, encode_matrix(m))?)
}

pub fn read_matrix(path: &Path) -> Result<CsrMatrix> {
    decode_matrix(&std::fs::read(path)?)
}

pub fn write_vector(v: &[f64], path: &Path) -> Result<()> {
    Ok(std::fs::write(path, encode_vector(v))?)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    decode_vector(&std::fs::read(path)?)
}

pub fn write_permutation(pi: &[usize], path: &Path) -> Result<()> {
    Ok(std::fs::write(path, encode_permutation(pi))?)
}

pub fn read_permutation(path: &Path) -> Result<Vec<usize>> {
    decode_permutation(&std::fs::read(path)?)
}

/// Output file stem: `_d` for degenerate runs, `_r` for reordered, `_d_r` for both.
pub fn stem(name: &str, degenerate: bool, reordered: bool) -> String {
    let mut s = name.to_string();
    if degenerate {
        s.push_str("_d");
    }
    if reordered {
        s.push_str("_r");
    }
    s
}

/// Encoder results for one ordering of a case.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EncoderStats {
    pub pauli: Option<PauliEntry>,
    pub fable: Option<FableEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliEntry {
    pub strings: usize,
    pub qubits: usize,
    pub normalized_count: f64,
    pub hermitized: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FableEntry {
    pub rotations: usize,
    pub qubits: usize,
    pub normalized_count: f64,
    pub seconds: f64,
}

/// Everything recorded about a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunStats {
    pub case: String,
    pub dimension: usize,
    pub n: usize,
    pub nnz: usize,
    pub degenerate: bool,
    pub scale: f64,
    pub kappa: Option<f64>,
    pub original: EncoderStats,
    pub reordered: Option<EncoderStats>,
    /// Stage name and wall time in seconds, in execution order.
    pub timings: Vec<(String, f64)>,
    pub files: Vec<String>,
}

fn encoder_json(e: &EncoderStats) -> Value {
    let mut m = Map::new();
    if let Some(p) = &e.pauli {
        m.insert(
            "prep_select".into(),
            json!({
                "pauli_strings": p.strings,
                "qubits": p.qubits,
                "normalized_count": p.normalized_count,
                "hermitized": p.hermitized,
                "seconds": p.seconds,
            }),
        );
    }
    if let Some(f) = &e.fable {
        m.insert(
            "fable".into(),
            json!({
                "rotations": f.rotations,
                "qubits": f.qubits,
                "normalized_count": f.normalized_count,
                "seconds": f.seconds,
            }),
        );
    }
    Value::Object(m)
}

/// Stats document with stable key order. `kappa` and `reordered` appear only
/// when computed.
pub fn emit_stats(s: &RunStats) -> Value {
    let mut m = Map::new();
    m.insert("case".into(), json!(s.case));
    m.insert("dimension".into(), json!(s.dimension));
    m.insert("n".into(), json!(s.n));
    m.insert("nnz".into(), json!(s.nnz));
    m.insert("degenerate".into(), json!(s.degenerate));
    m.insert("scale".into(), json!(s.scale));
    if let Some(k) = s.kappa {
        m.insert("kappa".into(), json!(k));
    }
    m.insert("original".into(), encoder_json(&s.original));
    if let Some(r) = &s.reordered {
        m.insert("reordered".into(), encoder_json(r));
    }
    let t: Map<String, Value> = s.timings.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    m.insert("timings".into(), Value::Object(t));
    m.insert("files".into(), json!(s.files));
    Value::Object(m)
}

/// One filled cell per stored entry on an `nrows x ncols` grid.
pub fn sparsity_svg(m: &CsrMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">",
        w = m.ncols,
        h = m.nrows
    );
    let _ = writeln!(s, "<rect width=\"{}\" height=\"{}\" fill=\"white\"/>", m.ncols, m.nrows);
    for (i, j, _) in m.triplets() {
        let _ = writeln!(s, "<rect x=\"{j}\" y=\"{i}\" width=\"1\" height=\"1\" fill=\"black\"/>");
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_sparsity_svg(m: &CsrMatrix, path: &Path) -> Result<()> {
    Ok(std::fs::write(path, sparsity_svg(m))?)
}

/// `label,x,y` rows with a header line.
pub fn plot_csv(series: &[(String, f64, f64)]) -> String {
    let mut s = String::from("label,x,y\n");
    for (l, x, y) in series {
        let _ = writeln!(s, "{l},{x:?},{y:?}");
    }
    s
}

pub fn emit_plot_csv(series: &[(String, f64, f64)], path: &Path) -> Result<()> {
    Ok(std::fs::write(path, plot_csv(series))?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_layout() {
        let b = encode_matrix(&CsrMatrix::identity(2));
        assert_eq!(b.len(), 4 + 4 + 24 + 24 + 16 + 16);
        assert_eq!(&b[..4], b"LQF1");
        assert_eq!(&b[4..8], &[0, 0, 0, 0]);
        assert_eq!(&b[8..16], &2u64.to_le_bytes());
        assert_eq!(&b[b.len() - 8..], &1.0f64.to_le_bytes());
    }

    #[test]
    fn header_errors() {
        let mut b = encode_matrix(&CsrMatrix::identity(2));
        b[0] = b'X';
        assert!(matches!(decode_matrix(&b), Err(Error::CorruptHeader(_))));
        let v = encode_vector(&[1.0, 2.0]);
        assert!(matches!(decode_matrix(&v), Err(Error::CorruptHeader(_))));
        assert!(matches!(decode_vector(&v[..v.len() - 1]), Err(Error::TruncatedPayload)));
        assert!(matches!(decode_vector(&v[..6]), Err(Error::CorruptHeader(_))));
    }

    #[test]
    fn permutation_round_trip() {
        let b = encode_permutation(&[0, 1, 3, 2]);
        assert_eq!(decode_permutation(&b).unwrap(), vec![0, 1, 3, 2]);
    }

    #[test]
    fn stems() {
        assert_eq!(stem("c", false, false), "c");
        assert_eq!(stem("c", true, false), "c_d");
        assert_eq!(stem("c", false, true), "c_r");
        assert_eq!(stem("c", true, true), "c_d_r");
    }

    #[test]
    fn svg_and_csv() {
        let svg = sparsity_svg(&CsrMatrix::identity(4));
        assert_eq!(svg.matches("fill=\"black\"").count(), 4);
        for i in 0..4 {
            assert!(svg.contains(&format!("x=\"{i}\" y=\"{i}\"")));
        }
        assert_eq!(plot_csv(&[]), "label,x,y\n");
        assert_eq!(plot_csv(&[("a".into(), 1.0, 0.5)]), "label,x,y\na,1.0,0.5\n");
    }

    #[test]
    fn stats_keys() {
        let s = RunStats { case: "c".into(), ..Default::default() };
        let v = emit_stats(&s);
        assert!(v.get("kappa").is_none());
        assert!(v.get("reordered").is_none());
        let s = RunStats { kappa: Some(2.0), reordered: Some(EncoderStats::default()), ..s };
        let v = emit_stats(&s);
        assert_eq!(v["kappa"], json!(2.0));
        assert!(v.get("reordered").is_some());
    }

    proptest! {
        #[test]
        fn byte_identical(vals in prop::collection::vec((0usize..20, 0usize..20, -1e3f64..1e3), 0..80)) {
            let m = CsrMatrix::from_triplets(20, 20, &vals);
            let b = encode_matrix(&m);
            let back = decode_matrix(&b).unwrap();
            prop_assert_eq!(&back, &m);
            prop_assert_eq!(encode_matrix(&back), b);
            let v: Vec<f64> = vals.iter().map(|e| e.2).collect();
            prop_assert_eq!(encode_vector(&decode_vector(&encode_vector(&v)).unwrap()), encode_vector(&v));
        }
    }
}
