//! Random regular graphs and girth.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::rng::rng_for;
use crate::spectral::Graph;

pub const REGULAR_RETRIES: usize = 10_000;

/// Uniform pairing of `n * d` half-edges, redrawn until the result is a
/// simple connected graph.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if n * d % 2 == 1 {
        return Err(Error::InvalidArgument(format!("n*d = {} is odd", n * d)));
    }
    if d == 0 || d >= n {
        return Err(Error::InvalidArgument(format!("degree {d} needs 0 < d < n = {n}")));
    }
    let mut rng = rng_for(seed, "regular-graph", (n * 1000 + d) as u64);
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..REGULAR_RETRIES {
        stubs.shuffle(&mut rng);
        let mut seen = HashSet::with_capacity(n * d / 2);
        let mut edges = Vec::with_capacity(n * d / 2);
        for pair in stubs.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !seen.insert((u, v)) {
                continue 'attempt;
            }
            edges.push((u, v));
        }
        edges.sort_unstable();
        match Graph::new(n, edges) {
            Ok(g) => return Ok(g),
            Err(Error::InvalidGraph(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::RetryBudgetExhausted(REGULAR_RETRIES))
}

/// Length of a shortest cycle, `None` for a forest.
pub fn girth(g: &Graph) -> Option<usize> {
    let n = g.vertex_count();
    let mut best: Option<usize> = None;
    for s in 0..n {
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if best.is_some_and(|b| 2 * dist[u] + 1 >= b) {
                break;
            }
            for &w in g.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    let len = dist[u] + dist[w] + 1;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_regular_graphs() {
        let k4 = random_regular_graph(4, 3, 1).unwrap();
        assert_eq!(k4.edge_count(), 6);
        let g = random_regular_graph(6, 3, 2).unwrap();
        assert_eq!(g.edge_count(), 9);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!(random_regular_graph(5, 3, 0).is_err());
        assert_eq!(random_regular_graph(20, 4, 9).unwrap(), random_regular_graph(20, 4, 9).unwrap());
    }

    #[test]
    fn girth_examples() {
        assert_eq!(girth(&Graph::complete(4).unwrap()), Some(3));
        assert_eq!(girth(&Graph::cycle(5).unwrap()), Some(5));
        assert_eq!(girth(&Graph::path(4).unwrap()), None);
    }
}
