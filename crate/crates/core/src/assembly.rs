//! Node-centred finite-volume Laplacian assembly.
//!
//! Faces sit at coordinate midpoints, so a boundary node owns a half cell.
//! Rows are built with a positive diagonal and non-positive off-diagonals;
//! boundary rows are then overwritten by [`boundary_row`].

use crate::config::{BoundaryKind, CaseConfig};
use crate::error::{Error, Result};
use crate::mesh::{Lattice, Mesh1D};
pub use crate::sparse::CsrMatrix;

/// How the coupling across a face is weighted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FaceWeighting {
    /// `a_ij = -1/|x_j - x_i|` in every direction.
    #[default]
    Unit,
    /// `a_ij = -A_f/|x_j - x_i|` with `A_f` the product of transverse cell widths.
    Area,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AssemblyOptions {
    pub weighting: FaceWeighting,
    /// Keep transverse couplings on Neumann and Symmetry rows.
    pub shear_retaining: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Factor the assembled matrix and rhs were divided by.
    pub scale: f64,
    pub degenerate: bool,
    /// Linear index of the row pinned to remove a degeneracy.
    pub fixed_node: Option<usize>,
    pub lattice: Lattice,
}

impl LinearSystem {
    pub fn n(&self) -> usize {
        self.rhs.len()
    }

    /// Matrix with the normalization undone.
    pub fn unscaled_matrix(&self) -> CsrMatrix {
        let mut m = self.matrix.clone();
        m.scale(self.scale);
        m
    }
}

/// Control-volume width of node `i`; Repeat ends borrow the wrap spacing.
fn width(m: &Mesh1D, i: usize) -> f64 {
    let n = m.len();
    let repeat = m.spec.is_repeat();
    let lo = if i > 0 {
        m.spacing(i - 1)
    } else if repeat {
        m.spacing(n - 2)
    } else {
        0.0
    };
    let hi = if i + 1 < n {
        m.spacing(i)
    } else if repeat {
        m.spacing(0)
    } else {
        0.0
    };
    0.5 * (lo + hi)
}

/// Neighbours of a node along one axis as (linear index, distance), wrapping
/// across Repeat ends with the opposite end's spacing.
fn neighbours(lat: &Lattice, c: &[usize; 3], axis: usize) -> Vec<(usize, f64)> {
    let m = &lat.meshes[axis];
    let n = m.len();
    let i = c[axis];
    let at = |j: usize| {
        let mut cj = *c;
        cj[axis] = j;
        lat.linear(&cj[..lat.dim()])
    };
    let mut out = Vec::with_capacity(2);
    if i > 0 {
        out.push((at(i - 1), m.spacing(i - 1)));
    } else if m.spec.is_repeat() {
        out.push((at(n - 1), m.spacing(n - 2)));
    }
    if i + 1 < n {
        out.push((at(i + 1), m.spacing(i)));
    } else if m.spec.is_repeat() {
        out.push((at(0), m.spacing(0)));
    }
    out
}

fn volume(lat: &Lattice, c: &[usize; 3]) -> f64 {
    lat.meshes.iter().enumerate().map(|(k, m)| width(m, c[k])).product()
}

fn face_area(lat: &Lattice, c: &[usize; 3], axis: usize, w: FaceWeighting) -> f64 {
    match w {
        FaceWeighting::Unit => 1.0,
        FaceWeighting::Area => lat
            .meshes
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != axis)
            .map(|(k, m)| width(m, c[k]))
            .product(),
    }
}

/// Interior stencil of one node: `(column, value)` pairs tagged with the axis
/// of each off-diagonal, diagonal last (axis `usize::MAX`).
fn stencil(lat: &Lattice, idx: usize, w: FaceWeighting) -> Vec<(usize, f64, usize)> {
    let c = lat.coord(idx);
    let mut row = Vec::with_capacity(2 * lat.dim() + 1);
    let mut diag = 0.0;
    for axis in 0..lat.dim() {
        let a = face_area(lat, &c, axis, w);
        for (j, h) in neighbours(lat, &c, axis) {
            let v = a / h;
            diag += v;
            row.push((j, -v, axis));
        }
    }
    row.push((idx, diag, usize::MAX));
    row
}

type StencilRow = Vec<(usize, f64, usize)>;

/// Interior-style operator row and source term for every node, before any
/// boundary treatment. Off-diagonals are tagged with their axis.
fn raw_rows(lat: &Lattice, cfg: &CaseConfig, w: FaceWeighting) -> (Vec<StencilRow>, Vec<f64>) {
    let n = lat.n();
    let rows: Vec<_> = (0..n).map(|i| stencil(lat, i, w)).collect();
    let dim = lat.dim() as f64;
    let rhs = (0..n)
        .map(|i| {
            let v = volume(lat, &lat.coord(i));
            match w {
                FaceWeighting::Area => -cfg.force * v,
                // consistent with the unit-weighted operator on isotropic cells
                FaceWeighting::Unit => -cfg.force * v.powf(1.0 / dim),
            }
        })
        .collect();
    (rows, rhs)
}

/// The boundary that owns a node, if any: highest-precedence non-Repeat
/// boundary the node sits on, as (kind, axis, side).
pub fn owning_boundary(lat: &Lattice, idx: usize) -> Option<(BoundaryKind, usize, usize)> {
    let c = lat.coord(idx);
    let mut best: Option<(u8, BoundaryKind, usize, usize)> = None;
    for (axis, m) in lat.meshes.iter().enumerate() {
        for side in 0..2 {
            let end = if side == 0 { 0 } else { m.len() - 1 };
            if c[axis] != end {
                continue;
            }
            let kind = m.spec.btype[side];
            if let Some(p) = kind.precedence() {
                if best.is_none_or(|b| p < b.0) {
                    best = Some((p, kind, axis, side));
                }
            }
        }
    }
    best.map(|(_, k, a, s)| (k, a, s))
}

/// Overwrite an assembled row for a boundary node.
///
/// `row` is the assembled stencil with off-diagonals tagged by axis, `axis`
/// the boundary normal, `normal_neighbor`/`dx` the interior neighbour along
/// it. Dirichlet keeps the diagonal and drops every coupling. Neumann couples
/// only to the normal neighbour with `-a_ii`, or keeps the whole stencil in
/// shear-retaining mode; its rhs is `a_n dx value` where `a_n` is the normal
/// coupling, so `value` is the gradient across the boundary cell.
#[allow(clippy::too_many_arguments)]
pub fn boundary_row(
    row: &[(usize, f64, usize)],
    node: usize,
    kind: BoundaryKind,
    value: f64,
    axis: usize,
    normal_neighbor: usize,
    dx: f64,
    shear_retaining: bool,
) -> (Vec<(usize, f64)>, f64) {
    let diag = row.iter().find(|e| e.0 == node && e.2 == usize::MAX).map_or(0.0, |e| e.1);
    match kind {
        BoundaryKind::Dirichlet => (vec![(node, diag)], diag * value),
        BoundaryKind::Neumann | BoundaryKind::Symmetry => {
            let value = if kind == BoundaryKind::Symmetry { 0.0 } else { value };
            if shear_retaining {
                let a_n: f64 = -row
                    .iter()
                    .filter(|e| e.2 == axis && e.0 == normal_neighbor)
                    .map(|e| e.1)
                    .sum::<f64>();
                let entries = row.iter().map(|e| (e.0, e.1)).collect();
                (entries, a_n * dx * value)
            } else {
                (vec![(node, diag), (normal_neighbor, -diag)], diag * dx * value)
            }
        }
        BoundaryKind::Repeat => (row.iter().map(|e| (e.0, e.1)).collect(), 0.0),
    }
}

/// Assemble without normalization or degeneracy fix. The matrix is the raw
/// finite-volume operator and `scale` is 1.
pub fn assemble_unscaled(lat: &Lattice, cfg: &CaseConfig, opts: AssemblyOptions) -> LinearSystem {
    let (rows, mut rhs) = raw_rows(lat, cfg, opts.weighting);
    let mut out = Vec::with_capacity(rows.len());
    for (idx, row) in rows.iter().enumerate() {
        match owning_boundary(lat, idx) {
            None => out.push(row.iter().map(|e| (e.0, e.1)).collect()),
            Some((kind, axis, side)) => {
                let c = lat.coord(idx);
                let m = &lat.meshes[axis];
                let (nb_i, dx) = if side == 0 {
                    (1, m.spacing(0))
                } else {
                    (m.len() - 2, m.spacing(m.len() - 2))
                };
                let mut cn = c;
                cn[axis] = nb_i;
                let nb = lat.linear(&cn[..lat.dim()]);
                let (r, b) = boundary_row(
                    row,
                    idx,
                    kind,
                    m.spec.bvalue[side],
                    axis,
                    nb,
                    dx,
                    opts.shear_retaining,
                );
                out.push(r);
                rhs[idx] = b;
            }
        }
    }
    LinearSystem {
        matrix: CsrMatrix::from_rows(lat.n(), out),
        rhs,
        scale: 1.0,
        degenerate: cfg.is_degenerate(),
        fixed_node: None,
        lattice: lat.clone(),
    }
}

/// Full assembly: stencil, boundary rows, degeneracy fix (unless allowed),
/// normalization.
pub fn assemble(lat: &Lattice, cfg: &CaseConfig, allow_degenerate: bool) -> Result<LinearSystem> {
    assemble_with(lat, cfg, allow_degenerate, AssemblyOptions::default())
}

pub fn assemble_with(
    lat: &Lattice,
    cfg: &CaseConfig,
    allow_degenerate: bool,
    opts: AssemblyOptions,
) -> Result<LinearSystem> {
    let mut sys = assemble_unscaled(lat, cfg, opts);
    if sys.degenerate && !allow_degenerate {
        let fix: Vec<usize> = cfg.meshes.iter().map(|m| m.degfix).collect();
        fix_degeneracy(&mut sys, &fix)?;
    }
    normalize(&mut sys)?;
    Ok(sys)
}

/// Public form of the boundary overwrite on an assembled system.
pub fn apply_boundary_row(
    sys: &mut LinearSystem,
    node: usize,
    kind: BoundaryKind,
    value: f64,
    normal_neighbor: usize,
    shear_retaining: bool,
) -> Result<()> {
    let n = sys.n();
    if node >= n || normal_neighbor >= n {
        return Err(Error::IndexOutOfRange { index: node.max(normal_neighbor), len: n });
    }
    let lat = &sys.lattice;
    let (c, cn) = (lat.coord(node), lat.coord(normal_neighbor));
    let axis = (0..lat.dim()).find(|&k| c[k] != cn[k]);
    let on_boundary = (0..lat.dim()).any(|k| {
        let m = &lat.meshes[k];
        (c[k] == 0 && m.spec.btype[0] == kind) || (c[k] == m.len() - 1 && m.spec.btype[1] == kind)
    });
    let Some(axis) = axis.filter(|_| on_boundary || kind == BoundaryKind::Repeat) else {
        return Err(Error::InternalNode(node));
    };
    let dx = (lat.meshes[axis].coords[c[axis]] - lat.meshes[axis].coords[cn[axis]]).abs();
    let tagged: Vec<(usize, f64, usize)> = sys
        .matrix
        .row(node)
        .map(|(j, v)| {
            let cj = lat.coord(j);
            let ax = if j == node { usize::MAX } else { (0..lat.dim()).find(|&k| cj[k] != c[k]).unwrap() };
            (j, v, ax)
        })
        .collect();
    let (row, b) = boundary_row(&tagged, node, kind, value, axis, normal_neighbor, dx, shear_retaining);
    sys.matrix.set_row(node, row);
    sys.rhs[node] = b / sys.scale;
    Ok(())
}

/// Pin the node at the given per-direction coordinates with a zero Dirichlet row.
pub fn fix_degeneracy(sys: &mut LinearSystem, degfix: &[usize]) -> Result<()> {
    if !sys.degenerate {
        return Err(Error::NotDegenerate);
    }
    if degfix.len() != sys.lattice.dim() {
        return Err(Error::DimensionMismatch { expected: sys.lattice.dim(), found: degfix.len() });
    }
    for (&i, &n) in degfix.iter().zip(&sys.lattice.dims) {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, len: n });
        }
    }
    let idx = sys.lattice.linear(degfix);
    let diag = sys.matrix.get(idx, idx);
    sys.matrix.set_row(idx, vec![(idx, diag)]);
    sys.rhs[idx] = 0.0;
    sys.degenerate = false;
    sys.fixed_node = Some(idx);
    Ok(())
}

/// Divide matrix and rhs by the largest matrix magnitude.
pub fn normalize(sys: &mut LinearSystem) -> Result<()> {
    let s = sys.matrix.max_abs();
    if s == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    if s != 1.0 {
        sys.matrix.scale(1.0 / s);
        for b in &mut sys.rhs {
            *b /= s;
        }
    }
    sys.scale *= s;
    Ok(())
}

/// Kronecker sum with x fastest: `I⊗Lxx + Lyy⊗I` in 2D, and the analogous
/// three-term sum in 3D.
pub fn kronecker_sum(ops: &[&CsrMatrix]) -> Result<CsrMatrix> {
    for m in ops {
        if !m.is_square() {
            return Err(Error::NonSquare(m.nrows, m.ncols));
        }
    }
    let sizes: Vec<usize> = ops.iter().map(|m| m.nrows).collect();
    let total: usize = sizes.iter().product();
    let mut acc = CsrMatrix::zeros(total, total);
    for (k, op) in ops.iter().enumerate() {
        let below: usize = sizes[..k].iter().product();
        let above: usize = sizes[k + 1..].iter().product();
        let term = CsrMatrix::identity(above).kron(op).kron(&CsrMatrix::identity(below));
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Rows of `a` and `b` that differ anywhere by more than 1e-12.
pub fn diff_rows(a: &CsrMatrix, b: &CsrMatrix) -> Result<Vec<usize>> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(a.shape(), b.shape()));
    }
    Ok((0..a.nrows)
        .filter(|&i| {
            a.row(i).any(|(j, v)| (v - b.get(i, j)).abs() > 1e-12)
                || b.row(i).any(|(j, v)| (v - a.get(i, j)).abs() > 1e-12)
        })
        .collect())
}

/// Unscaled 1D operator of one direction, as used in a Kronecker sum.
pub fn direction_operator(mesh: &Mesh1D, opts: AssemblyOptions) -> Result<CsrMatrix> {
    let mut spec = mesh.spec.clone();
    spec.direction = crate::config::Axis::X;
    let lat = crate::mesh::build_lattice(vec![Mesh1D { coords: mesh.coords.clone(), spec: spec.clone() }])?;
    let cfg = CaseConfig { name: "dir".into(), dimension: 1, force: 0.0, meshes: vec![spec] };
    Ok(assemble_unscaled(&lat, &cfg, opts).matrix)
}

/// Compare the direct assembly of a case with the Kronecker sum of its 1D
/// operators, both unscaled and without degeneracy fix.
pub fn kron_compare(lat: &Lattice, cfg: &CaseConfig, opts: AssemblyOptions) -> Result<(CsrMatrix, CsrMatrix, Vec<usize>)> {
    let ops: Vec<CsrMatrix> = lat.meshes.iter().map(|m| direction_operator(m, opts)).collect::<Result<_>>()?;
    let refs: Vec<&CsrMatrix> = ops.iter().collect();
    let k = kronecker_sum(&refs)?;
    let direct = assemble_unscaled(lat, cfg, opts).matrix;
    let rows = diff_rows(&k, &direct)?;
    Ok((k, direct, rows))
}
