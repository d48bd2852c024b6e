//! Geometric clustering of node coordinates and their tensor-product lattice.

use crate::config::{Axis, MeshSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSolution {
    /// Near-wall spacing.
    pub d: f64,
    /// Spacing in the uniform region.
    pub big_d: f64,
    /// Width of one clustered region.
    pub c: f64,
    pub n_u: usize,
}

/// Geometric-series factor `(r^(n-1) - 1)/(r - 1)`, with its `r = 1` limit.
fn series(r: f64, nc: usize) -> f64 {
    if r == 1.0 {
        (nc - 1) as f64
    } else {
        (r.powi(nc as i32 - 1) - 1.0) / (r - 1.0)
    }
}

/// Solve for the spacings of a clustered mesh.
///
/// Substituting `D = r^(nc-1) d` and `C = g d` into `L = (n_u - 1) D + sides C`
/// leaves one linear equation in `d`.
pub fn solve_cluster(length: f64, n_t: usize, n_c: usize, r: f64, sides: usize) -> Result<ClusterSolution> {
    let nc = n_c.max(1);
    let n_u = match sides {
        1 => n_t as i64 - nc as i64 + 1,
        _ => n_t as i64 - 2 * nc as i64 + 2,
    };
    if n_u < 2 {
        return Err(Error::DegenerateGeometry(n_u));
    }
    let g = series(r, nc);
    let top = r.powi(nc as i32 - 1);
    let d = length / ((n_u - 1) as f64 * top + sides as f64 * g);
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::NonPositiveSpacing(d));
    }
    Ok(ClusterSolution {
        d,
        big_d: top * d,
        c: g * d,
        n_u: n_u as usize,
    })
}

/// Node spacings, low end first: ramp, plateau, mirrored ramp (two-sided only).
pub fn spacings(spec: &MeshSpec) -> Result<Vec<f64>> {
    let sol = solve_cluster(spec.length, spec.ntotal, spec.nclust, spec.cratio, spec.sides())?;
    let nc = spec.nclust.max(1);
    let ramp: Vec<f64> = (0..nc - 1).map(|k| sol.d * spec.cratio.powi(k as i32)).collect();
    let mut h = ramp.clone();
    h.extend(std::iter::repeat_n(sol.big_d, sol.n_u - 1));
    if spec.sides() == 2 {
        h.extend(ramp.iter().rev());
    }
    debug_assert_eq!(h.len(), spec.ntotal - 1);
    Ok(h)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    pub coords: Vec<f64>,
    pub spec: MeshSpec,
}

impl Mesh1D {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Spacing between node `i` and `i + 1`.
    pub fn spacing(&self, i: usize) -> f64 {
        self.coords[i + 1] - self.coords[i]
    }
}

/// Cumulative sum of the spacing sequence with the last node placed exactly at `L`.
pub fn generate_mesh(spec: &MeshSpec) -> Result<Mesh1D> {
    let h = spacings(spec)?;
    let mut coords = Vec::with_capacity(spec.ntotal);
    let mut x = 0.0;
    coords.push(x);
    for dh in &h {
        x += dh;
        coords.push(x);
    }
    *coords.last_mut().unwrap() = spec.length;
    Ok(Mesh1D { coords, spec: spec.clone() })
}

/// A Cartesian product of 1-3 meshes, x index fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    pub meshes: Vec<Mesh1D>,
    pub dims: Vec<usize>,
    strides: Vec<usize>,
}

impl Lattice {
    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    /// Total node count.
    pub fn n(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn linear(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Lattice coordinates of a linear index; unused axes are 0.
    pub fn coord(&self, mut idx: usize) -> [usize; 3] {
        let mut c = [0; 3];
        for (k, &n) in self.dims.iter().enumerate() {
            c[k] = idx % n;
            idx /= n;
        }
        c
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }
}

pub fn build_lattice(meshes: Vec<Mesh1D>) -> Result<Lattice> {
    const ORDER: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
    if meshes.is_empty() || meshes.len() > 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: meshes.len() });
    }
    for (m, want) in meshes.iter().zip(ORDER) {
        if m.spec.direction != want {
            return Err(Error::DuplicateDirection(m.spec.direction.to_string()));
        }
    }
    let dims: Vec<usize> = meshes.iter().map(Mesh1D::len).collect();
    let mut strides = vec![1; dims.len()];
    for k in 1..dims.len() {
        strides[k] = strides[k - 1] * dims[k - 1];
    }
    Ok(Lattice { meshes, dims, strides })
}

/// Mesh every direction of a case.
pub fn lattice_for(config: &crate::config::CaseConfig) -> Result<Lattice> {
    build_lattice(config.meshes.iter().map(generate_mesh).collect::<Result<_>>()?)
}
