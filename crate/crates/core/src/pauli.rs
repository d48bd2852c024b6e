//! Pauli-string decomposition of real matrices (Prepare-Select cost).
//!
//! The top qubit of a `2^n` matrix splits it into quadrants `A00 A01 A10 A11`;
//! its Pauli component is
//! `I: (A00+A11)/2`, `Z: (A00-A11)/2`, `X: (A01+A10)/2`, `Y: i(A01-A10)/2`
//! and each half-size block recurses on the remaining qubits. Blocks are kept
//! sparse and sorted, so a child is a linear merge of two quadrants. A real
//! input stays real up to a global factor `i^k` with `k` the number of `Y`s
//! taken, which is tracked instead of carrying complex entries.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;

/// Blocks with more stored entries than this are split in parallel.
const PAR_THRESHOLD: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn letter(self) -> char {
        ['I', 'X', 'Y', 'Z'][self as usize]
    }
}

/// A Pauli word packed two bits per qubit, most significant qubit first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PauliString {
    code: u64,
    n: u8,
}

impl PauliString {
    pub fn new(letters: &[Pauli]) -> Self {
        assert!(letters.len() <= 32);
        let code = letters.iter().fold(0u64, |c, &p| (c << 2) | p as u64);
        PauliString { code, n: letters.len() as u8 }
    }

    pub fn n_qubits(&self) -> usize {
        self.n as usize
    }

    /// Letter on qubit `q`, counting from the most significant.
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::ALL[((self.code >> (2 * (self.n as usize - 1 - q))) & 3) as usize]
    }

    fn masks(&self) -> (usize, usize, usize) {
        let (mut x, mut z, mut y) = (0, 0, 0);
        for q in 0..self.n_qubits() {
            let bit = 1usize << (self.n_qubits() - 1 - q);
            match self.get(q) {
                Pauli::I => {}
                Pauli::X => x |= bit,
                Pauli::Y => {
                    x |= bit;
                    y |= bit;
                }
                Pauli::Z => z |= bit,
            }
        }
        (x, z, y)
    }

    /// Column of the single non-zero in row `r`, with its value.
    pub fn entry_in_row(&self, r: usize) -> (usize, Complex64) {
        let (x, z, y) = self.masks();
        let sign = if (r & (z | y)).count_ones() % 2 == 1 { -1.0 } else { 1.0 };
        let phase = match y.count_ones() % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        (r ^ x, phase * sign)
    }

    pub fn y_count(&self) -> usize {
        (0..self.n_qubits()).filter(|&q| self.get(q) == Pauli::Y).count()
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        (0..self.n_qubits()).try_for_each(|q| write!(f, "{}", self.get(q).letter()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliDecomposition {
    pub n_qubits: usize,
    /// Sorted by string.
    pub terms: Vec<(PauliString, Complex64)>,
    pub tolerance: f64,
}

impl PauliDecomposition {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Entry `(r, c)` of `Σ c_s P_s`.
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let x = r ^ c;
        self.terms
            .iter()
            .filter(|(s, _)| s.masks().0 == x)
            .map(|(s, coef)| coef * s.entry_in_row(r).1)
            .sum()
    }

    /// Dense `Σ c_s P_s`; meant for small `n`.
    pub fn reconstruct(&self) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n_qubits;
        let mut a = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (s, coef) in &self.terms {
            for (r, row) in a.iter_mut().enumerate() {
                let (c, v) = s.entry_in_row(r);
                row[c] += coef * v;
            }
        }
        a
    }

    /// Text export, one `<string> <coefficient>` line per term. The
    /// coefficient is the real part; imaginary parts appear only for
    /// non-Hermitian input.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (p, c) in &self.terms {
            if c.im == 0.0 {
                s.push_str(&format!("{p} {:?}\n", c.re));
            } else {
                s.push_str(&format!("{p} {:?} {:?}\n", c.re, c.im));
            }
        }
        s
    }
}

pub fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(n));
    }
    Ok(n.trailing_zeros() as usize)
}

/// Symmetric input is returned as is; otherwise the bipartite
/// `[[0, L], [Lᵀ, 0]]` of twice the size.
pub fn hermitize(l: &CsrMatrix) -> Result<(CsrMatrix, bool)> {
    if !l.is_square() {
        return Err(Error::NonSquare(l.nrows, l.ncols));
    }
    log2_exact(l.nrows)?;
    if l.is_symmetric(1e-12) {
        return Ok((l.clone(), false));
    }
    let n = l.nrows;
    let lt = l.transpose();
    let rows = (0..2 * n)
        .map(|i| {
            if i < n {
                l.row(i).map(|(j, v)| (j + n, v)).collect()
            } else {
                lt.row(i - n).collect()
            }
        })
        .collect();
    Ok((CsrMatrix::from_rows(2 * n, rows), true))
}

type Block = Vec<(u32, u32, f64)>;

/// `(a ± b)/2` over two sorted blocks, dropping exact zeros.
fn merge(a: &[(u32, u32, f64)], b: &[(u32, u32, f64)], sign: f64) -> Block {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let ka = a.get(i).map(|e| (e.0, e.1));
        let kb = b.get(j).map(|e| (e.0, e.1));
        let (key, v) = match (ka, kb) {
            (Some(x), Some(y)) if x == y => {
                let v = a[i].2 + sign * b[j].2;
                i += 1;
                j += 1;
                (x, v)
            }
            (Some(x), Some(y)) if x < y => {
                i += 1;
                (x, a[i - 1].2)
            }
            (Some(x), None) => {
                i += 1;
                (x, a[i - 1].2)
            }
            (_, Some(y)) => {
                j += 1;
                (y, sign * b[j - 1].2)
            }
            (None, None) => unreachable!(),
        };
        if v != 0.0 {
            out.push((key.0, key.1, 0.5 * v));
        }
    }
    out
}

fn max_abs(b: &[(u32, u32, f64)]) -> f64 {
    b.iter().fold(0.0, |m, e| m.max(e.2.abs()))
}

/// `i^k`.
fn phase(k: u8) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

fn recurse(block: Block, bits: u32, code: u64, ph: u8, tol: f64, out: &mut Vec<(u64, Complex64)>) {
    if bits == 0 {
        let v = block.first().map_or(0.0, |e| e.2);
        if v.abs() > tol {
            out.push((code, phase(ph) * v));
        }
        return;
    }
    let half = 1u32 << (bits - 1);
    let mask = half - 1;
    let mut q = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    for (r, c, v) in block {
        let k = ((r >= half) as usize) << 1 | (c >= half) as usize;
        q[k].push((r & mask, c & mask, v));
    }
    let children = [
        (Pauli::I, merge(&q[0], &q[3], 1.0), ph),
        (Pauli::X, merge(&q[1], &q[2], 1.0), ph),
        (Pauli::Y, merge(&q[1], &q[2], -1.0), ph + 1),
        (Pauli::Z, merge(&q[0], &q[3], -1.0), ph),
    ];
    let big = children.iter().map(|c| c.1.len()).sum::<usize>() > PAR_THRESHOLD;
    let run = |(p, b, k): (Pauli, Block, u8)| {
        let mut local = Vec::new();
        if max_abs(&b) > tol {
            recurse(b, bits - 1, code << 2 | p as u64, k, tol, &mut local);
        }
        local
    };
    if big {
        let parts: Vec<Vec<(u64, Complex64)>> = children.into_par_iter().map(run).collect();
        out.extend(parts.into_iter().flatten());
    } else {
        for c in children {
            out.extend(run(c));
        }
    }
}

/// Pauli coefficients `trace(P_s A)/2^n` above `tol`, sorted by string.
pub fn decompose(a: &CsrMatrix, tol: f64) -> Result<PauliDecomposition> {
    if !a.is_square() {
        return Err(Error::NonSquare(a.nrows, a.ncols));
    }
    let n = log2_exact(a.nrows)?;
    if n == 0 || n > 31 {
        return Err(Error::NonPowerOfTwo(a.nrows));
    }
    let block: Block = a.triplets().map(|(i, j, v)| (i as u32, j as u32, v)).collect();
    let mut raw = Vec::new();
    if max_abs(&block) > tol {
        recurse(block, n as u32, 0, 0, tol, &mut raw);
    }
    raw.sort_by_key(|e| e.0);
    let terms = raw
        .into_iter()
        .filter_map(|(code, c)| {
            // for real symmetric input odd-Y terms are rounding residue
            let c = Complex64::new(
                if c.re.abs() > tol { c.re } else { 0.0 },
                if c.im.abs() > tol { c.im } else { 0.0 },
            );
            (c.norm() > 0.0).then_some((PauliString { code, n: n as u8 }, c))
        })
        .collect();
    Ok(PauliDecomposition { n_qubits: n, terms, tolerance: tol })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepSelectStats {
    pub num_strings: usize,
    /// The bipartite embedding was needed to make the matrix Hermitian.
    pub hermitized: bool,
    pub system_qubits: usize,
    pub select_qubits: usize,
    pub total_qubits: usize,
    pub normalized_count: f64,
}

/// Qubit accounting for a decomposition of `l_original`.
///
/// The system register always carries the embedding qubit: a symmetric `L`
/// embeds as `X⊗L`, which has exactly as many strings as `L` itself, so the
/// count is the same whichever form is decomposed.
pub fn prep_select_stats(l_original: &CsrMatrix, decomp: &PauliDecomposition) -> Result<PrepSelectStats> {
    let m = decomp.len();
    if m == 0 {
        return Err(Error::EmptyDecomposition);
    }
    let n = log2_exact(l_original.nrows)?;
    let hermitized = decomp.n_qubits == n + 1;
    let system_qubits = n + 1;
    let select_qubits = (usize::BITS - (m - 1).leading_zeros()) as usize;
    Ok(PrepSelectStats {
        num_strings: m,
        hermitized,
        system_qubits,
        select_qubits,
        total_qubits: system_qubits + select_qubits,
        normalized_count: m as f64 / l_original.nnz() as f64,
    })
}

/// `hermitize`, `decompose` and `prep_select_stats` in one call.
pub fn analyze(l: &CsrMatrix, tol: f64) -> Result<(PauliDecomposition, PrepSelectStats)> {
    let (h, _) = hermitize(l)?;
    let d = decompose(&h, tol)?;
    let s = prep_select_stats(l, &d)?;
    Ok((d, s))
}
