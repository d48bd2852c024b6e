//! Shell reordering of lattice indices.
//!
//! Shell `s` holds every node whose largest coordinate is `s`. Shells are
//! numbered outward from the origin. Inside a shell the walk cycles the axes
//! x, y, z starting after the axis of the previous step and tries a +1 then a
//! -1 unit step onto an unvisited node of the same shell. When no such step
//! exists it jumps to the unvisited shell node with the smallest
//! coordinate-major index.

use crate::assembly::LinearSystem;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// `pi[old] = new`. Rows move by `P` (row `old` of `L` becomes row `pi[old]`)
/// and columns by `Q = Pᵀ`, so the reordered operator is `P L Pᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationPair {
    pub pi: Vec<usize>,
}

impl PermutationPair {
    pub fn identity(n: usize) -> Self {
        PermutationPair { pi: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn inverse(&self) -> Vec<usize> {
        let mut inv = vec![0; self.pi.len()];
        for (old, &new) in self.pi.iter().enumerate() {
            inv[new] = old;
        }
        inv
    }

    pub fn is_bijection(&self) -> bool {
        let mut seen = vec![false; self.pi.len()];
        self.pi.iter().all(|&p| p < seen.len() && !std::mem::replace(&mut seen[p], true))
    }

    /// `P v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v.len())?;
        let mut out = vec![0.0; v.len()];
        for (old, &new) in self.pi.iter().enumerate() {
            out[new] = v[old];
        }
        Ok(out)
    }

    /// `Pᵀ v`.
    pub fn apply_inverse(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.check(v.len())?;
        Ok(self.pi.iter().map(|&new| v[new]).collect())
    }

    /// `P A Pᵀ`.
    pub fn apply_matrix(&self, a: &CsrMatrix) -> Result<CsrMatrix> {
        self.check(a.nrows)?;
        self.check(a.ncols)?;
        let inv = self.inverse();
        let rows = inv
            .iter()
            .map(|&old| a.row(old).map(|(j, v)| (self.pi[j], v)).collect())
            .collect();
        Ok(CsrMatrix::from_rows(a.ncols, rows))
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.pi.len() {
            return Err(Error::SizeMismatch { expected: self.pi.len(), found: n });
        }
        Ok(())
    }
}

pub fn shell_order(dims: &[usize]) -> PermutationPair {
    let d = dims.len();
    let n: usize = dims.iter().product();
    let mut strides = vec![1; d];
    for k in 1..d {
        strides[k] = strides[k - 1] * dims[k - 1];
    }
    let lin = |c: &[usize]| c.iter().zip(&strides).map(|(a, b)| a * b).sum::<usize>();
    let coord = |mut i: usize| {
        let mut c = vec![0; d];
        for k in 0..d {
            c[k] = i % dims[k];
            i /= dims[k];
        }
        c
    };
    let shell_of = |c: &[usize]| c.iter().copied().max().unwrap_or(0);

    let mut pi = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    let mut rank = 0;
    let mut cur = vec![0; d];
    let mut axis = 0;
    visited[0] = true;
    pi[0] = 0;
    rank += 1;

    // members of each shell, in coordinate-major order
    let smax = dims.iter().copied().max().unwrap_or(1) - 1;
    let mut shells = vec![Vec::new(); smax + 1];
    for i in 0..n {
        shells[shell_of(&coord(i))].push(i);
    }

    for (s, members) in shells.iter().enumerate().skip(1) {
        let mut left = members.len();
        let mut cursor = 0;
        while left > 0 {
            let mut next = None;
            'axes: for t in 0..d {
                let ax = (axis + t) % d;
                for step in [1isize, -1] {
                    let v = cur[ax] as isize + step;
                    if v < 0 || v as usize >= dims[ax] {
                        continue;
                    }
                    let mut c = cur.clone();
                    c[ax] = v as usize;
                    let j = lin(&c);
                    if shell_of(&c) == s && !visited[j] {
                        next = Some((j, c));
                        axis = (ax + 1) % d;
                        break 'axes;
                    }
                }
            }
            let (j, c) = next.unwrap_or_else(|| {
                while visited[members[cursor]] {
                    cursor += 1;
                }
                let j = members[cursor];
                (j, coord(j))
            });
            visited[j] = true;
            pi[j] = rank;
            rank += 1;
            cur = c;
            left -= 1;
        }
    }
    PermutationPair { pi }
}

/// Reordered system `P L Pᵀ (P φ) = P b`.
pub fn permute_system(sys: &LinearSystem, perm: &PermutationPair) -> Result<LinearSystem> {
    Ok(LinearSystem {
        matrix: perm.apply_matrix(&sys.matrix)?,
        rhs: perm.apply(&sys.rhs)?,
        fixed_node: sys.fixed_node.map(|i| perm.pi[i]),
        ..sys.clone()
    })
}

/// Map a solution of the reordered system back to lattice order.
pub fn recover_solution(perm: &PermutationPair, phi: &[f64]) -> Result<Vec<f64>> {
    perm.apply_inverse(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_orders() {
        assert_eq!(shell_order(&[2]).pi, vec![0, 1]);
        assert_eq!(shell_order(&[5]).pi, (0..5).collect::<Vec<_>>());
        assert_eq!(shell_order(&[2, 2]).pi, vec![0, 1, 3, 2]);
        assert_eq!(shell_order(&[3, 3]).pi, vec![0, 1, 8, 3, 2, 7, 4, 5, 6]);
    }

    #[test]
    fn recover_example() {
        let p = PermutationPair { pi: vec![0, 1, 3, 2] };
        assert_eq!(recover_solution(&p, &[1.0, 2.0, 3.0, 4.0]).unwrap(), vec![1.0, 2.0, 4.0, 3.0]);
        let id = PermutationPair::identity(3);
        assert_eq!(recover_solution(&id, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(matches!(recover_solution(&id, &[1.0]), Err(Error::SizeMismatch { .. })));
    }

    #[test]
    fn channel_order_scatters_band() {
        let p = shell_order(&[4, 8, 8]);
        assert!(p.is_bijection());
        // neighbours along x stay close in the original ordering but not after
        let far = (0..256).filter(|&i| i % 4 != 3 && p.pi[i].abs_diff(p.pi[i + 1]) > 8).count();
        assert!(far > 50, "{far}");
    }

    #[test]
    fn matrix_permutation_moves_entries() {
        let a = CsrMatrix::from_dense(&[
            vec![1.0, 2.0, 0.0],
            vec![0.0, 3.0, 4.0],
            vec![5.0, 0.0, 6.0],
        ]);
        let p = PermutationPair { pi: vec![2, 0, 1] };
        let b = p.apply_matrix(&a).unwrap();
        for (i, j, v) in a.triplets() {
            assert_eq!(b.get(p.pi[i], p.pi[j]), v);
        }
        assert_eq!(b.nnz(), a.nnz());
        assert_eq!(PermutationPair::identity(3).apply_matrix(&a).unwrap(), a);
    }

    fn dims() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..9, 1..=3)
    }

    proptest! {
        #[test]
        fn shell_order_is_bijective_and_shell_monotone(d in dims()) {
            let p = shell_order(&d);
            prop_assert!(p.is_bijection());
            prop_assert_eq!(p.pi[0], 0);
            let inv = p.inverse();
            let shell = |mut i: usize| {
                let mut s = 0;
                for &n in &d { s = s.max(i % n); i /= n; }
                s
            };
            for w in inv.windows(2) {
                prop_assert!(shell(w[0]) <= shell(w[1]));
            }
        }

        #[test]
        fn round_trip(d in dims(), seed in any::<u64>()) {
            let p = shell_order(&d);
            let n = p.len();
            let v: Vec<f64> = (0..n).map(|i| ((i as u64).wrapping_mul(seed | 1) % 1000) as f64).collect();
            prop_assert_eq!(p.apply_inverse(&p.apply(&v).unwrap()).unwrap(), v.clone());
            prop_assert_eq!(p.apply(&p.apply_inverse(&v).unwrap()).unwrap(), v);
        }
    }
}
