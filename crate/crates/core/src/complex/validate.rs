use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{face_corner_indices, frame_of, Cell, CubeComplex, RawComplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ViolationKind {
    /// Bad vertex ids, loops, corner lists whose length is not a power of two.
    MalformedCell,
    /// A cube edge (corners differing in one bit) is missing from the edge set.
    MissingEdge,
    /// A codimension-one face of a listed cube is not listed.
    NonClosedFaces,
    /// Two cubes at a vertex span the same set of edges.
    DuplicateCube,
    /// A 4-cycle of the 1-skeleton bounds no square.
    UnfilledSquare,
    /// Edges at a vertex pairwise span squares but span no common cube.
    NonFlagLink,
    /// A vertex triple without a unique median.
    NotMedian,
    Disconnected,
    /// Too many vertices for the median scan.
    TooLarge,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ViolationKind::MalformedCell => "malformed-cell",
            ViolationKind::MissingEdge => "missing-edge",
            ViolationKind::NonClosedFaces => "non-closed-faces",
            ViolationKind::DuplicateCube => "duplicate-cube",
            ViolationKind::UnfilledSquare => "unfilled-square",
            ViolationKind::NonFlagLink => "non-flag-link",
            ViolationKind::NotMedian => "not-median",
            ViolationKind::Disconnected => "disconnected",
            ViolationKind::TooLarge => "too-large",
        };
        f.write_str(s)
    }
}

/// One failed invariant together with the cells (or vertices) involved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub kind: ViolationKind,
    pub cells: Vec<usize>,
    pub message: String,
}

impl Violation {
    fn new(kind: ViolationKind, cells: Vec<usize>, message: impl Into<String>) -> Self {
        Violation { kind, cells, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} {:?}", self.kind, self.message, self.cells)
    }
}

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub max_vertices: usize,
    /// Stop the median scan after this many failing triples.
    pub max_median_reports: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig { max_vertices: 512, max_median_reports: 8 }
    }
}

pub(super) fn assemble(raw: &RawComplex) -> Result<CubeComplex, Vec<Violation>> {
    let n = raw.vertices;
    let mut violations = Vec::new();
    let mut cells: Vec<Cell> = (0..n).map(|v| Cell { corners: vec![v] }).collect();
    let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();

    for (i, &[u, v]) in raw.edges.iter().enumerate() {
        if u >= n || v >= n || u == v {
            violations.push(Violation::new(
                ViolationKind::MalformedCell,
                vec![u, v],
                format!("edge #{i} is a loop or uses an unknown vertex"),
            ));
            continue;
        }
        let key = if u < v { vec![u, v] } else { vec![v, u] };
        if seen.contains_key(&key) {
            violations.push(Violation::new(
                ViolationKind::DuplicateCube,
                key,
                format!("edge #{i} is listed twice"),
            ));
            continue;
        }
        seen.insert(key, cells.len());
        cells.push(Cell { corners: vec![u, v] });
    }
    let edge_count = cells.len() - n;

    for (i, corners) in raw.cubes.iter().enumerate() {
        let len = corners.len();
        if len < 2 || !len.is_power_of_two() {
            violations.push(Violation::new(
                ViolationKind::MalformedCell,
                corners.clone(),
                format!("cube #{i} has {len} corners, not a power of two >= 2"),
            ));
            continue;
        }
        let distinct: HashSet<usize> = corners.iter().copied().collect();
        if distinct.len() != len || corners.iter().any(|&v| v >= n) {
            violations.push(Violation::new(
                ViolationKind::MalformedCell,
                corners.clone(),
                format!("cube #{i} repeats a corner or uses an unknown vertex"),
            ));
            continue;
        }
        let mut key = corners.clone();
        key.sort_unstable();
        if len == 2 {
            if !seen.contains_key(&key) {
                violations.push(Violation::new(
                    ViolationKind::MissingEdge,
                    key,
                    format!("1-cube #{i} is not in the edge list"),
                ));
            }
            continue;
        }
        if seen.contains_key(&key) {
            violations.push(Violation::new(
                ViolationKind::DuplicateCube,
                key,
                format!("cube #{i} duplicates an earlier cube"),
            ));
            continue;
        }
        seen.insert(key, cells.len());
        cells.push(Cell { corners: corners.clone() });
    }

    if violations.is_empty() {
        Ok(CubeComplex::from_parts(n, cells, edge_count))
    } else {
        Err(violations)
    }
}

pub(super) fn validate_complex(
    raw: &RawComplex,
    config: &ValidationConfig,
) -> Result<CubeComplex, Vec<Violation>> {
    let x = assemble(raw)?;
    let mut violations = Vec::new();
    let n = x.vertex_count();
    if n == 0 {
        return Err(vec![Violation::new(ViolationKind::Disconnected, vec![], "empty complex")]);
    }
    if n > config.max_vertices {
        return Err(vec![Violation::new(
            ViolationKind::TooLarge,
            vec![n],
            format!("{n} vertices exceeds the validation cap {}", config.max_vertices),
        )]);
    }

    check_cube_faces(&x, &mut violations);
    check_unique_cubes_at_vertices(&x, &mut violations);
    if !violations.is_empty() {
        return Err(violations);
    }

    let dist = x.skeleton_distances();
    let unreachable: Vec<usize> = (0..n).filter(|&v| dist[0][v] == usize::MAX).collect();
    if !unreachable.is_empty() {
        violations.push(Violation::new(
            ViolationKind::Disconnected,
            unreachable,
            "vertices unreachable from vertex 0",
        ));
        return Err(violations);
    }

    check_filled_squares(&x, &mut violations);
    check_flag_links(&x, &mut violations);
    check_median(&x, &dist, config.max_median_reports, &mut violations);

    if violations.is_empty() {
        Ok(x)
    } else {
        Err(violations)
    }
}

fn check_cube_faces(x: &CubeComplex, out: &mut Vec<Violation>) {
    for (id, cell) in x.cells().iter().enumerate() {
        let k = cell.dim();
        if k < 2 {
            continue;
        }
        for b in 0..cell.corners.len() {
            for j in 0..k {
                let c = b ^ (1 << j);
                if b < c && x.find_cell(&[cell.corners[b], cell.corners[c]]).is_none() {
                    out.push(Violation::new(
                        ViolationKind::MissingEdge,
                        vec![id, cell.corners[b], cell.corners[c]],
                        "cube edge missing from the edge set",
                    ));
                }
            }
        }
        if k < 3 {
            continue;
        }
        let full = (1usize << k) - 1;
        for j in 0..k {
            for side in 0..2usize {
                let corners: Vec<usize> = face_corner_indices(full & !(1 << j), side << j)
                    .into_iter()
                    .map(|i| cell.corners[i])
                    .collect();
                match x.find_cell(&corners) {
                    None => out.push(Violation::new(
                        ViolationKind::NonClosedFaces,
                        std::iter::once(id).chain(corners).collect(),
                        "codimension-one face is not listed",
                    )),
                    Some(f) if frame_of(&cell.corners, &x.cells()[f].corners).is_none() => {
                        out.push(Violation::new(
                            ViolationKind::MalformedCell,
                            vec![id, f],
                            "listed face does not sit in the cube as a face",
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
    }
}

fn check_unique_cubes_at_vertices(x: &CubeComplex, out: &mut Vec<Violation>) {
    let mut spans: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for (id, cell) in x.cells().iter().enumerate() {
        let k = cell.dim();
        if k < 2 {
            continue;
        }
        for (b, &v) in cell.corners.iter().enumerate() {
            let mut nbrs: Vec<usize> = (0..k).map(|j| cell.corners[b ^ (1 << j)]).collect();
            nbrs.sort_unstable();
            if let Some(&other) = spans.get(&(v, nbrs.clone())) {
                out.push(Violation::new(
                    ViolationKind::DuplicateCube,
                    vec![other, id, v],
                    format!("two {k}-cubes at vertex {v} span the same edges"),
                ));
            } else {
                spans.insert((v, nbrs), id);
            }
        }
    }
}

fn check_filled_squares(x: &CubeComplex, out: &mut Vec<Violation>) {
    for v in 0..x.vertex_count() {
        let nb = x.neighbors(v);
        // report each cycle once, from its smallest vertex
        for (i, &a) in nb.iter().enumerate().filter(|&(_, &a)| a > v) {
            for &b in &nb[i + 1..] {
                for &w in x.neighbors(a) {
                    if w <= v || x.neighbors(b).binary_search(&w).is_err() {
                        continue;
                    }
                    if x.find_cell(&[v, a, b, w]).is_none() {
                        out.push(Violation::new(
                            ViolationKind::UnfilledSquare,
                            vec![v, a, w, b],
                            "4-cycle bounds no square",
                        ));
                    }
                }
            }
        }
    }
}

fn check_flag_links(x: &CubeComplex, out: &mut Vec<Violation>) {
    for v in 0..x.vertex_count() {
        let Ok(star) = x.star_faces(v) else { continue };
        let faces: HashSet<u64> = star.faces.iter().map(|f| f.0).collect();
        let d = star.neighbors.len();
        let adj: Vec<u64> = (0..d)
            .map(|a| {
                (0..d)
                    .filter(|&b| b != a && faces.contains(&((1u64 << a) | (1u64 << b))))
                    .fold(0u64, |m, b| m | 1 << b)
            })
            .collect();
        // grow cliques one axis at a time; every clique must be a face
        let mut stack: Vec<(u64, u64)> = (0..d).map(|a| (1u64 << a, adj[a] & !((2u64 << a) - 1))).collect();
        while let Some((clique, cand)) = stack.pop() {
            if !faces.contains(&clique) {
                let axes: Vec<usize> = (0..d).filter(|&a| clique >> a & 1 == 1).map(|a| star.neighbors[a]).collect();
                out.push(Violation::new(
                    ViolationKind::NonFlagLink,
                    std::iter::once(v).chain(axes).collect(),
                    format!("edges at vertex {v} pairwise span squares but span no cube"),
                ));
                continue;
            }
            let mut c = cand;
            while c != 0 {
                let b = c.trailing_zeros() as usize;
                c &= c - 1;
                stack.push((clique | 1 << b, cand & adj[b] & !((2u64 << b) - 1)));
            }
        }
    }
}

fn check_median(x: &CubeComplex, dist: &[Vec<usize>], cap: usize, out: &mut Vec<Violation>) {
    let n = x.vertex_count();
    let mut reported = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            let interval: Vec<usize> =
                (0..n).filter(|&m| dist[u][m] + dist[m][v] == dist[u][v]).collect();
            for w in (v + 1)..n {
                let count = interval
                    .iter()
                    .filter(|&&m| {
                        dist[v][m] + dist[m][w] == dist[v][w] && dist[u][m] + dist[m][w] == dist[u][w]
                    })
                    .count();
                if count != 1 {
                    out.push(Violation::new(
                        ViolationKind::NotMedian,
                        vec![u, v, w],
                        format!("vertex triple has {count} medians"),
                    ));
                    reported += 1;
                    if reported >= cap {
                        return;
                    }
                }
            }
        }
    }
}
