//! Built-in CAT(0) cube complexes and the mutations that break them.
//!
//! Random square complexes are grown by gluing a new square along an
//! existing edge or a new edge at a vertex. Both glue along convex
//! subcomplexes, so every step keeps the 1-skeleton median.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{face_corner_indices, CubeComplex, RawComplex};

fn build(raw: RawComplex) -> CubeComplex {
    CubeComplex::assemble(&raw).expect("generator output is well formed")
}

/// The unit `n`-cube with all its faces; vertex ids are corner bit vectors.
pub fn unit_cube_raw(n: usize) -> RawComplex {
    let full = (1usize << n) - 1;
    let mut edges = Vec::new();
    let mut cubes = Vec::new();
    for dim in 1..=n {
        for free in 1..=full {
            if free.count_ones() as usize != dim {
                continue;
            }
            for base in 0..=full {
                if base & free != 0 {
                    continue;
                }
                let corners = face_corner_indices(free, base);
                if dim == 1 {
                    edges.push([corners[0], corners[1]]);
                } else {
                    cubes.push(corners);
                }
            }
        }
    }
    RawComplex { vertices: 1 << n, edges, cubes }
}

pub fn unit_cube(n: usize) -> CubeComplex {
    build(unit_cube_raw(n))
}

/// Star tree: vertex 0 joined to `k` leaves.
pub fn star_tree_raw(k: usize) -> RawComplex {
    RawComplex { vertices: k + 1, edges: (1..=k).map(|i| [0, i]).collect(), cubes: vec![] }
}

pub fn star_tree(k: usize) -> CubeComplex {
    build(star_tree_raw(k))
}

/// Random tree on `n` vertices: vertex `i` attaches to a uniform earlier vertex.
pub fn random_tree_raw(n: usize, seed: u64) -> RawComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = (1..n).map(|i| [rng.gen_range(0..i), i]).collect();
    RawComplex { vertices: n, edges, cubes: vec![] }
}

/// Planar square complex on a set of unit cells `(i, j)` = `[i,i+1] x [j,j+1]`.
/// Vertex ids are assigned in order of first appearance.
pub fn planar_squares_raw(cells: &[(usize, usize)]) -> RawComplex {
    let mut ids: HashMap<(usize, usize), usize> = HashMap::new();
    let id = |p: (usize, usize), ids: &mut HashMap<(usize, usize), usize>| {
        let next = ids.len();
        *ids.entry(p).or_insert(next)
    };
    let mut edges = Vec::new();
    let mut cubes = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &(i, j) in cells {
        let c = [
            id((i, j), &mut ids),
            id((i + 1, j), &mut ids),
            id((i, j + 1), &mut ids),
            id((i + 1, j + 1), &mut ids),
        ];
        for (a, b) in [(0, 1), (0, 2), (1, 3), (2, 3)] {
            let key = (c[a].min(c[b]), c[a].max(c[b]));
            if seen.insert(key) {
                edges.push([c[a], c[b]]);
            }
        }
        cubes.push(c.to_vec());
    }
    RawComplex { vertices: ids.len(), edges, cubes }
}

/// The `a x b` grid of unit squares. Vertex `(i, j)` gets id `i * (b + 1) + j`.
pub fn grid_raw(a: usize, b: usize) -> RawComplex {
    let id = |i: usize, j: usize| i * (b + 1) + j;
    let mut edges = Vec::new();
    let mut cubes = Vec::new();
    for i in 0..=a {
        for j in 0..=b {
            if i < a {
                edges.push([id(i, j), id(i + 1, j)]);
            }
            if j < b {
                edges.push([id(i, j), id(i, j + 1)]);
            }
            if i < a && j < b {
                cubes.push(vec![id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1)]);
            }
        }
    }
    RawComplex { vertices: (a + 1) * (b + 1), edges, cubes }
}

pub fn grid(a: usize, b: usize) -> CubeComplex {
    build(grid_raw(a, b))
}

/// Three unit squares forming an L: `[0,2]x[0,1]` plus `[0,1]x[1,2]`.
pub fn l_shape_raw() -> RawComplex {
    planar_squares_raw(&[(0, 0), (1, 0), (0, 1)])
}

/// `k` squares sharing the spine edge `0 - 1`.
pub fn book_raw(k: usize) -> RawComplex {
    let mut edges = vec![[0, 1]];
    let mut cubes = Vec::new();
    for p in 0..k {
        let (a, b) = (2 + 2 * p, 3 + 2 * p);
        edges.extend([[0, a], [1, b], [a, b]]);
        cubes.push(vec![0, 1, a, b]);
    }
    RawComplex { vertices: 2 + 2 * k, edges, cubes }
}

pub fn book(k: usize) -> CubeComplex {
    build(book_raw(k))
}

/// Random 2-dimensional complex grown from one square by `steps` gluings.
/// A step glues a new square along a uniformly chosen edge with probability
/// 3/4 and a pendant edge at a uniform vertex otherwise.
pub fn random_square_complex_raw(steps: usize, seed: u64) -> RawComplex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut raw = unit_cube_raw(2);
    for _ in 0..steps {
        if rng.gen_bool(0.75) {
            let [u, v] = raw.edges[rng.gen_range(0..raw.edges.len())];
            let (a, b) = (raw.vertices, raw.vertices + 1);
            raw.vertices += 2;
            raw.edges.extend([[u, a], [v, b], [a, b]]);
            raw.cubes.push(vec![u, v, a, b]);
        } else {
            let u = rng.gen_range(0..raw.vertices);
            raw.edges.push([u, raw.vertices]);
            raw.vertices += 1;
        }
    }
    raw
}

pub fn random_square_complex(steps: usize, seed: u64) -> CubeComplex {
    build(random_square_complex_raw(steps, seed))
}

/// Remove one codimension-one face of a top-dimensional cube.
pub fn mutate_drop_face(raw: &RawComplex) -> RawComplex {
    let mut out = raw.clone();
    let Some((_, top)) = raw.cubes.iter().enumerate().max_by_key(|(_, c)| c.len()) else {
        out.edges.pop();
        return out;
    };
    let k = top.len().trailing_zeros() as usize;
    let full = (1usize << k) - 1;
    let mut face: Vec<usize> = face_corner_indices(full & !1, 0).into_iter().map(|i| top[i]).collect();
    face.sort_unstable();
    if face.len() == 2 {
        out.edges.retain(|e| {
            let mut e = e.to_vec();
            e.sort_unstable();
            e != face
        });
    } else {
        out.cubes.retain(|c| {
            let mut c = c.clone();
            c.sort_unstable();
            c != face
        });
    }
    out
}

/// List one square a second time (corner order reversed, same square).
pub fn mutate_duplicate_square(raw: &RawComplex) -> RawComplex {
    let mut out = raw.clone();
    match raw.cubes.iter().find(|c| c.len() == 4) {
        Some(sq) => out.cubes.push(sq.iter().rev().copied().collect()),
        None => {
            if let Some(&e) = raw.edges.first() {
                out.edges.push(e);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::ViolationKind;

    fn accepted(raw: &RawComplex) -> bool {
        CubeComplex::validate(raw).is_ok()
    }

    #[test]
    fn generators_validate() {
        assert!(accepted(&unit_cube_raw(1)));
        assert!(accepted(&unit_cube_raw(2)));
        assert!(accepted(&unit_cube_raw(3)));
        assert!(accepted(&unit_cube_raw(4)));
        assert!(accepted(&star_tree_raw(4)));
        assert!(accepted(&random_tree_raw(20, 3)));
        assert!(accepted(&grid_raw(3, 2)));
        assert!(accepted(&l_shape_raw()));
        assert!(accepted(&book_raw(3)));
        for seed in 0..10 {
            assert!(accepted(&random_square_complex_raw(12, seed)), "seed {seed}");
        }
    }

    #[test]
    fn mutations_rejected() {
        for raw in [unit_cube_raw(2), unit_cube_raw(3), grid_raw(2, 2), book_raw(3), random_square_complex_raw(8, 1)] {
            let dropped = CubeComplex::validate(&mutate_drop_face(&raw)).unwrap_err();
            assert!(dropped
                .iter()
                .any(|v| matches!(v.kind, ViolationKind::MissingEdge | ViolationKind::NonClosedFaces)));
            let dup = CubeComplex::validate(&mutate_duplicate_square(&raw)).unwrap_err();
            assert!(dup.iter().any(|v| v.kind == ViolationKind::DuplicateCube));
        }
    }

    #[test]
    fn cube_dimensions() {
        assert_eq!(unit_cube(3).dimension(), 3);
        assert_eq!(grid(2, 2).dimension(), 2);
        assert_eq!(star_tree(3).dimension(), 1);
    }
}
