//! FABLE rotation-count analysis.
//!
//! Each matrix entry becomes a multiplexed ancilla rotation by
//! `θ = 2 arccos(a_ij)`, flattened row-major. Compiling the multiplexor into
//! uncontrolled rotations along a Gray-code walk needs the angles
//! `θ̂ = 4^-n P_G H θ`, where `H` is the ±1 Walsh-Hadamard transform and
//! `(P_G v)[k] = v[k ^ (k >> 1)]`. Angles that vanish drop their rotation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::log2_exact;
use crate::sparse::CsrMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FableStats {
    pub n: usize,
    pub num_rotations: usize,
    pub normalized_count: f64,
    pub total_qubits: usize,
    pub tolerance: f64,
}

/// Row-major rotation angles of a square `2^n` matrix with entries in `[-1, 1]`.
pub fn matrix_to_angles(a: &CsrMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NonSquare(a.nrows, a.ncols));
    }
    log2_exact(a.nrows)?;
    let dim = a.nrows;
    let mut theta = vec![std::f64::consts::PI; dim * dim];
    for (i, j, v) in a.triplets() {
        if v.abs() > 1.0 + 1e-12 {
            return Err(Error::EntryOutOfRange(v));
        }
        theta[i * dim + j] = 2.0 * v.clamp(-1.0, 1.0).acos();
    }
    Ok(theta)
}

/// Unnormalized in-place Walsh-Hadamard butterfly.
pub fn fwht(v: &mut [f64]) {
    let n = v.len();
    assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        if n / (2 * h) >= 64 {
            v.par_chunks_mut(2 * h).for_each(|c| butterfly(c, h));
        } else {
            for c in v.chunks_mut(2 * h) {
                let (lo, hi) = c.split_at_mut(h);
                lo.par_chunks_mut(4096)
                    .zip(hi.par_chunks_mut(4096))
                    .for_each(|(a, b)| pair(a, b));
            }
        }
        h *= 2;
    }
}

fn butterfly(c: &mut [f64], h: usize) {
    let (lo, hi) = c.split_at_mut(h);
    pair(lo, hi);
}

fn pair(lo: &mut [f64], hi: &mut [f64]) {
    for (a, b) in lo.iter_mut().zip(hi) {
        let (x, y) = (*a, *b);
        *a = x + y;
        *b = x - y;
    }
}

fn check_len(n: usize) -> Result<()> {
    let k = log2_exact(n).map_err(|_| Error::BadLength(n))?;
    if k % 2 != 0 {
        return Err(Error::BadLength(n));
    }
    Ok(())
}

pub fn gray_walsh_transform(theta: &[f64]) -> Result<Vec<f64>> {
    check_len(theta.len())?;
    let mut v = theta.to_vec();
    fwht(&mut v);
    let s = 1.0 / v.len() as f64;
    Ok((0..v.len()).map(|k| v[k ^ (k >> 1)] * s).collect())
}

/// Inverse of [`gray_walsh_transform`]: `θ = H P_Gᵀ θ̂`.
pub fn inverse_gray_walsh_transform(hat: &[f64]) -> Result<Vec<f64>> {
    check_len(hat.len())?;
    let mut v = vec![0.0; hat.len()];
    for (k, &x) in hat.iter().enumerate() {
        v[k ^ (k >> 1)] = x;
    }
    fwht(&mut v);
    Ok(v)
}

pub fn fable_stats(a: &CsrMatrix, tol: f64) -> Result<FableStats> {
    let mut v = matrix_to_angles(a)?;
    let n = log2_exact(a.nrows)?;
    // the count does not depend on the Gray permutation
    fwht(&mut v);
    let s = 1.0 / v.len() as f64;
    let num_rotations = v.par_iter().filter(|x| (*x * s).abs() > tol).count();
    Ok(FableStats {
        n,
        num_rotations,
        normalized_count: num_rotations as f64 / v.len() as f64,
        total_qubits: 2 * n + 1,
        tolerance: tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_examples() {
        assert_eq!(matrix_to_angles(&CsrMatrix::zeros(2, 2)).unwrap(), vec![PI; 4]);
        assert_eq!(matrix_to_angles(&CsrMatrix::identity(2)).unwrap(), vec![0.0, PI, PI, 0.0]);
        let ones = CsrMatrix::from_dense(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(matrix_to_angles(&ones).unwrap(), vec![0.0; 4]);
        let big = CsrMatrix::from_dense(&[vec![1.5, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(matrix_to_angles(&big), Err(Error::EntryOutOfRange(_))));
    }

    #[test]
    fn transform_examples() {
        let t = gray_walsh_transform(&[2.5; 16]).unwrap();
        assert_eq!(t[0], 2.5);
        assert!(t[1..].iter().all(|&x| x == 0.0));
        let t = gray_walsh_transform(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(t.iter().all(|x| (x.abs() - 0.25).abs() < 1e-15));
        assert!(matches!(gray_walsh_transform(&[1.0; 8]), Err(Error::BadLength(8))));
    }

    #[test]
    fn gray_permutation_order() {
        // e_k transforms to the k-th Hadamard column read in Gray order 0, 1, 3, 2
        let t = gray_walsh_transform(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(t, vec![0.25, -0.25, -0.25, 0.25]);
        let t = gray_walsh_transform(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(t, vec![0.25, 0.25, -0.25, -0.25]);
    }

    #[test]
    fn zero_matrix_single_rotation() {
        for d in [2, 4, 16] {
            let s = fable_stats(&CsrMatrix::zeros(d, d), DEFAULT_TOL).unwrap();
            assert_eq!(s.num_rotations, 1);
        }
        let s = fable_stats(&CsrMatrix::identity(8), DEFAULT_TOL).unwrap();
        assert_eq!(s.total_qubits, 7);
        assert!(s.normalized_count <= 1.0);
    }

    #[test]
    fn large_vector_parallel_path_matches_sequential() {
        let n = 1 << 16;
        let v: Vec<f64> = (0..n).map(|i| ((i * 7919) % 1013) as f64).collect();
        let mut fast = v.clone();
        fwht(&mut fast);
        let mut slow = v;
        let mut h = 1;
        while h < n {
            for c in slow.chunks_mut(2 * h) {
                butterfly(c, h);
            }
            h *= 2;
        }
        assert_eq!(fast, slow);
    }

    proptest! {
        #[test]
        fn round_trip(k in 1usize..=8, seed in prop::collection::vec(-10.0f64..10.0, 1..64)) {
            let len = 1usize << (2 * k);
            let v: Vec<f64> = (0..len).map(|i| seed[i % seed.len()] * ((i % 7) as f64 - 3.0)).collect();
            let back = inverse_gray_walsh_transform(&gray_walsh_transform(&v).unwrap()).unwrap();
            for (a, b) in v.iter().zip(back) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn linear(k in 1usize..=5, a in -3.0f64..3.0, b in -3.0f64..3.0,
                  x in prop::collection::vec(-1.0f64..1.0, 1024), y in prop::collection::vec(-1.0f64..1.0, 1024)) {
            let len = 1usize << (2 * k);
            let (x, y) = (&x[..len], &y[..len]);
            let mix: Vec<f64> = x.iter().zip(y).map(|(p, q)| a * p + b * q).collect();
            let (tx, ty, tm) = (gray_walsh_transform(x).unwrap(), gray_walsh_transform(y).unwrap(), gray_walsh_transform(&mix).unwrap());
            for i in 0..len {
                prop_assert!((tm[i] - (a * tx[i] + b * ty[i])).abs() <= 1e-10);
            }
        }

        #[test]
        fn same_matrix_same_count(vals in prop::collection::vec(-1.0f64..1.0, 64)) {
            let dense: Vec<Vec<f64>> = vals.chunks(8).map(|c| c.to_vec()).collect();
            let a = CsrMatrix::from_dense(&dense);
            let s1 = fable_stats(&a, DEFAULT_TOL).unwrap();
            let s2 = fable_stats(&a.clone(), DEFAULT_TOL).unwrap();
            prop_assert_eq!(s1, s2);
            prop_assert!(s1.normalized_count <= 1.0);
        }
    }
}
