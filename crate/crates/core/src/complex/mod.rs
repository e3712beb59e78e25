//! Finite cube complexes: data model, validation and local combinatorics.
//!
//! Cells are numbered in one table: vertices first (`0..vertex_count`), then
//! edges in input order, then the listed cubes of dimension at least two in
//! input order. A cell of dimension `k` stores its `2^k` corners in binary
//! order: corner `b` sits at the point whose `i`-th coordinate is bit `i` of
//! `b`.

mod generators;
mod io;
mod validate;

pub use generators::*;
pub use io::*;
pub use validate::{ValidationConfig, Violation, ViolationKind};

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type CellId = usize;

/// Snap tolerance for coordinates on a cube boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub corners: Vec<usize>,
}

impl Cell {
    pub fn dim(&self) -> usize {
        self.corners.len().trailing_zeros() as usize
    }
}

/// How a face sits inside a larger cell: the parent corner index of the
/// face's corner 0, and for each face axis the parent axis it runs along and
/// whether it runs backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub base: usize,
    pub axes: Vec<(usize, bool)>,
}

impl Frame {
    /// Coordinates in the parent cell of a point given in the face's frame.
    pub fn lift(&self, parent_dim: usize, coords: &[f64]) -> Vec<f64> {
        let mut out: Vec<f64> = (0..parent_dim)
            .map(|j| if self.base >> j & 1 == 1 { 1.0 } else { 0.0 })
            .collect();
        for (i, &(j, flip)) in self.axes.iter().enumerate() {
            out[j] = if flip { 1.0 - coords[i] } else { coords[i] };
        }
        out
    }

    /// Inverse of [`Frame::lift`] for a parent point lying on the face.
    pub fn restrict(&self, parent_coords: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .map(|&(j, flip)| if flip { 1.0 - parent_coords[j] } else { parent_coords[j] })
            .collect()
    }
}

/// Frame of `child` inside `parent` (both corner lists in binary order), or
/// `None` if `child` is not a face of `parent`.
pub fn frame_of(parent: &[usize], child: &[usize]) -> Option<Frame> {
    let pos = |v: usize| parent.iter().position(|&c| c == v);
    let base = pos(child[0])?;
    let k = child.len().trailing_zeros() as usize;
    let mut axes = Vec::with_capacity(k);
    for i in 0..k {
        let diff = pos(child[1 << i])? ^ base;
        if !diff.is_power_of_two() {
            return None;
        }
        let j = diff.trailing_zeros() as usize;
        axes.push((j, base >> j & 1 == 1));
    }
    // every child corner must land where the frame says
    for (b, &c) in child.iter().enumerate() {
        let mut idx = base;
        for (i, &(j, _)) in axes.iter().enumerate() {
            if b >> i & 1 == 1 {
                idx ^= 1 << j;
            }
        }
        if parent.get(idx) != Some(&c) {
            return None;
        }
    }
    Some(Frame { base, axes })
}

/// Corner indices of the face with free axes `free` (bitmask over parent
/// axes) and the other coordinates fixed to the bits of `base`, in the
/// face's binary order.
pub fn face_corner_indices(free: usize, base: usize) -> Vec<usize> {
    let axes: Vec<usize> = (0..usize::BITS as usize).filter(|j| free >> j & 1 == 1).collect();
    let base = base & !free;
    (0..1usize << axes.len())
        .map(|b| {
            let mut idx = base;
            for (i, &j) in axes.iter().enumerate() {
                if b >> i & 1 == 1 {
                    idx |= 1 << j;
                }
            }
            idx
        })
        .collect()
}

/// A point of the complex: a carrier cell and coordinates in `[0,1]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoint {
    pub cell: CellId,
    pub coords: Vec<f64>,
}

impl ComplexPoint {
    pub fn vertex(v: usize) -> Self {
        ComplexPoint { cell: v, coords: Vec::new() }
    }

    pub fn new(cell: CellId, coords: Vec<f64>) -> Self {
        ComplexPoint { cell, coords }
    }
}

/// Local picture at a vertex: the edges at `v` (as axes) and every cube at
/// `v`, recorded as the set of axes it spans.
#[derive(Debug, Clone)]
pub struct Star {
    pub vertex: usize,
    /// Neighbor vertex of each axis.
    pub neighbors: Vec<usize>,
    /// Edge cell of each axis.
    pub axis_cells: Vec<CellId>,
    /// `(axis mask, realizing cell)` for every cube at `v` of dimension >= 1,
    /// sorted by mask.
    pub faces: Vec<(u64, CellId)>,
}

impl Star {
    /// Faces not contained in a larger face.
    pub fn maximal_faces(&self) -> Vec<u64> {
        let masks: Vec<u64> = self.faces.iter().map(|f| f.0).collect();
        masks
            .iter()
            .copied()
            .filter(|&m| !masks.iter().any(|&o| o != m && o & m == m))
            .collect()
    }
}

/// A validated finite cube complex.
#[derive(Debug, Clone)]
pub struct CubeComplex {
    vertex_count: usize,
    cells: Vec<Cell>,
    by_corners: HashMap<Vec<usize>, CellId>,
    /// Cells having the indexed cell as a face (excluding itself).
    supercells: Vec<Vec<CellId>>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl CubeComplex {
    /// Build the cell table without checking any CAT(0) certificate. Fails
    /// only on malformed input (bad ids, non power-of-two corner lists).
    pub(crate) fn assemble(raw: &RawComplex) -> std::result::Result<Self, Vec<Violation>> {
        validate::assemble(raw)
    }

    pub(crate) fn from_parts(
        vertex_count: usize,
        cells: Vec<Cell>,
        edge_count: usize,
    ) -> Self {
        let mut by_corners = HashMap::with_capacity(cells.len());
        for (id, c) in cells.iter().enumerate() {
            let mut key = c.corners.clone();
            key.sort_unstable();
            by_corners.entry(key).or_insert(id);
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        for c in cells.iter().filter(|c| c.dim() == 1) {
            adjacency[c.corners[0]].push(c.corners[1]);
            adjacency[c.corners[1]].push(c.corners[0]);
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        let mut supercells = vec![Vec::new(); cells.len()];
        for (id, c) in cells.iter().enumerate() {
            let k = c.dim();
            if k == 0 {
                continue;
            }
            for free in 0..(1usize << k) {
                let fixed = ((1usize << k) - 1) & !free;
                // iterate all assignments of the fixed coordinates
                let mut base = 0usize;
                loop {
                    if free != (1 << k) - 1 {
                        let mut key: Vec<usize> = face_corner_indices(free, base)
                            .into_iter()
                            .map(|i| c.corners[i])
                            .collect();
                        key.sort_unstable();
                        if let Some(&f) = by_corners.get(&key) {
                            supercells[f].push(id);
                        }
                    }
                    // next subset of `fixed`
                    base = (base.wrapping_sub(fixed)) & fixed;
                    if base == 0 {
                        break;
                    }
                }
            }
        }
        for s in supercells.iter_mut() {
            s.sort_unstable();
            s.dedup();
        }
        CubeComplex { vertex_count, cells, by_corners, supercells, adjacency, edge_count }
    }

    /// Validate with the default configuration.
    pub fn validate(raw: &RawComplex) -> std::result::Result<Self, Vec<Violation>> {
        validate::validate_complex(raw, &ValidationConfig::default())
    }

    pub fn validate_with(
        raw: &RawComplex,
        config: &ValidationConfig,
    ) -> std::result::Result<Self, Vec<Violation>> {
        validate::validate_complex(raw, config)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, id: CellId) -> Result<&Cell> {
        self.cells.get(id).ok_or(Error::InvalidCell(id))
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Largest cube dimension.
    pub fn dimension(&self) -> usize {
        self.cells.iter().map(Cell::dim).max().unwrap_or(0)
    }

    /// Cell with exactly this corner set, in any order.
    pub fn find_cell(&self, corners: &[usize]) -> Option<CellId> {
        let mut key = corners.to_vec();
        key.sort_unstable();
        self.by_corners.get(&key).copied()
    }

    /// Cells strictly containing `id` as a face.
    pub fn supercells(&self, id: CellId) -> &[CellId] {
        &self.supercells[id]
    }

    pub fn is_maximal(&self, id: CellId) -> bool {
        self.supercells[id].is_empty()
    }

    pub fn maximal_cells(&self) -> Vec<CellId> {
        (0..self.cells.len()).filter(|&c| self.is_maximal(c)).collect()
    }

    /// Maximal cells containing `id` (itself if maximal).
    pub fn maximal_cells_containing(&self, id: CellId) -> Vec<CellId> {
        if self.is_maximal(id) {
            return vec![id];
        }
        self.supercells[id].iter().copied().filter(|&c| self.is_maximal(c)).collect()
    }

    /// Frame of cell `child` inside cell `parent`.
    pub fn frame(&self, parent: CellId, child: CellId) -> Option<Frame> {
        frame_of(&self.cells[parent].corners, &self.cells[child].corners)
    }

    /// Coordinates of a point in a cell containing its carrier.
    pub fn lift(&self, p: &ComplexPoint, target: CellId) -> Option<Vec<f64>> {
        if p.cell == target {
            return Some(p.coords.clone());
        }
        let frame = self.frame(target, p.cell)?;
        Some(frame.lift(self.cells[target].dim(), &p.coords))
    }

    /// Ambient position of a vertex inside a cell, if it is a corner.
    pub fn corner_coords(&self, cell: CellId, v: usize) -> Option<Vec<f64>> {
        let c = &self.cells[cell];
        let b = c.corners.iter().position(|&x| x == v)?;
        Some((0..c.dim()).map(|j| (b >> j & 1) as f64).collect())
    }

    /// Minimal-carrier representative of a point.
    pub fn canonicalize(&self, p: &ComplexPoint) -> Result<ComplexPoint> {
        let cell = self.cell(p.cell)?;
        let k = cell.dim();
        if p.coords.len() != k {
            return Err(Error::InvalidPoint(format!(
                "cell {} has dimension {k} but {} coordinates were given",
                p.cell,
                p.coords.len()
            )));
        }
        if let Some(x) = p.coords.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::InvalidPoint(format!("coordinate {x} outside [0,1]")));
        }
        let mut free = 0usize;
        let mut base = 0usize;
        for (j, &x) in p.coords.iter().enumerate() {
            if x <= BOUNDARY_TOL {
            } else if x >= 1.0 - BOUNDARY_TOL {
                base |= 1 << j;
            } else {
                free |= 1 << j;
            }
        }
        if free == (1usize << k) - 1 {
            return Ok(p.clone());
        }
        let corners: Vec<usize> =
            face_corner_indices(free, base).into_iter().map(|i| cell.corners[i]).collect();
        let face = self.find_cell(&corners).ok_or_else(|| {
            Error::InvalidComplex(format!("face {corners:?} of cell {} is not listed", p.cell))
        })?;
        let frame = self
            .frame(p.cell, face)
            .ok_or_else(|| Error::InvalidComplex(format!("cell {face} is not a face of {}", p.cell)))?;
        Ok(ComplexPoint { cell: face, coords: frame.restrict(&p.coords) })
    }

    /// The axes at `v` and the cubes they span.
    pub fn star_faces(&self, v: usize) -> Result<Star> {
        if v >= self.vertex_count {
            return Err(Error::InvalidVertex(v));
        }
        let neighbors = self.adjacency[v].clone();
        if neighbors.len() > 64 {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} has degree {} (at most 64 axes supported)",
                neighbors.len()
            )));
        }
        let axis_cells: Vec<CellId> = neighbors
            .iter()
            .map(|&u| self.find_cell(&[v, u]).expect("adjacency comes from edge cells"))
            .collect();
        let mut faces = Vec::new();
        for &c in &self.supercells[v] {
            let cell = &self.cells[c];
            let b = cell.corners.iter().position(|&x| x == v).expect("v is a corner");
            let mut mask = 0u64;
            for j in 0..cell.dim() {
                let u = cell.corners[b ^ (1 << j)];
                let axis = neighbors.binary_search(&u).expect("cube edges are edges");
                mask |= 1 << axis;
            }
            faces.push((mask, c));
        }
        faces.sort_unstable();
        Ok(Star { vertex: v, neighbors, axis_cells, faces })
    }

    /// All-pairs BFS distances in the 1-skeleton (`usize::MAX` if unreachable).
    pub fn skeleton_distances(&self) -> Vec<Vec<usize>> {
        (0..self.vertex_count).map(|s| bfs(&self.adjacency, s)).collect()
    }

    /// Back to the serializable description.
    pub fn to_raw(&self) -> RawComplex {
        let edges = self
            .cells
            .iter()
            .filter(|c| c.dim() == 1)
            .map(|c| [c.corners[0], c.corners[1]])
            .collect();
        let cubes = self
            .cells
            .iter()
            .filter(|c| c.dim() >= 2)
            .map(|c| c.corners.clone())
            .collect();
        RawComplex { vertices: self.vertex_count, edges, cubes }
    }
}

pub(crate) fn bfs(adjacency: &[Vec<usize>], s: usize) -> Vec<usize> {
    let mut dist = vec![usize::MAX; adjacency.len()];
    let mut queue = std::collections::VecDeque::new();
    dist[s] = 0;
    queue.push_back(s);
    while let Some(u) = queue.pop_front() {
        for &w in &adjacency[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}
