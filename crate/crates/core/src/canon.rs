//! Canonical forms for small (optionally edge-coloured) graphs.
//!
//! Colour refinement to an equitable partition, then individualisation of
//! each vertex of the first non-trivial cell, recursively. Every discrete
//! partition reached yields a relabelled adjacency string; the smallest one is
//! the key. Twin vertices inside a cell are branched on only once.

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Largest vertex count accepted by [`canonical_form`].
pub const MAX_CANON_VERTICES: usize = 32;

/// Isomorphism-invariant byte string: vertex count followed by the upper
/// triangle of the canonically relabelled adjacency (edge colour) matrix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsoKey(Vec<u8>);

impl IsoKey {
    pub fn vertex_count(&self) -> usize {
        self.0[0] as usize
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl fmt::Debug for IsoKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IsoKey({})", self.to_hex())
    }
}

pub fn canonical_form(g: &Graph) -> Result<IsoKey> {
    let edges: Vec<(usize, usize, u8)> = g.edges().iter().map(|&(u, v)| (u, v, 1)).collect();
    canonical_form_colored(g.n(), &edges)
}

/// Canonical form of a graph on `n` vertices whose edges carry non-zero colours.
pub fn canonical_form_colored(n: usize, edges: &[(usize, usize, u8)]) -> Result<IsoKey> {
    if n > MAX_CANON_VERTICES {
        return Err(Error::TooManyVertices {
            n,
            max: MAX_CANON_VERTICES,
        });
    }
    let mut matrix = vec![0u8; n * n];
    for &(u, v, c) in edges {
        debug_assert!(c != 0 && u != v);
        matrix[u * n + v] = c;
        matrix[v * n + u] = c;
    }
    let search = Search { n, matrix: &matrix };
    let mut best: Option<Vec<u8>> = None;
    search.descend(refine(n, &matrix, vec![0; n]), &mut best);
    let mut key = vec![n as u8];
    key.extend(best.unwrap_or_default());
    Ok(IsoKey(key))
}

struct Search<'a> {
    n: usize,
    matrix: &'a [u8],
}

impl Search<'_> {
    fn descend(&self, colors: Vec<usize>, best: &mut Option<Vec<u8>>) {
        let n = self.n;
        let cells = colors.iter().max().map_or(0, |&c| c + 1);
        if cells == n {
            let mut order = vec![0; n];
            for (v, &c) in colors.iter().enumerate() {
                order[c] = v;
            }
            let mut word = Vec::with_capacity(n * (n.saturating_sub(1)) / 2);
            for i in 0..n {
                for j in i + 1..n {
                    word.push(self.matrix[order[i] * n + order[j]]);
                }
            }
            if best.as_ref().is_none_or(|b| word < *b) {
                *best = Some(word);
            }
            return;
        }
        // first colour class with more than one vertex
        let mut size = vec![0usize; cells];
        for &c in &colors {
            size[c] += 1;
        }
        let target = size.iter().position(|&s| s > 1).expect("non-discrete partition");
        let cell: Vec<usize> = (0..n).filter(|&v| colors[v] == target).collect();
        let mut tried: Vec<usize> = Vec::new();
        for &v in &cell {
            if tried.iter().any(|&u| self.twins(u, v)) {
                continue;
            }
            tried.push(v);
            let split: Vec<(usize, usize)> = colors
                .iter()
                .enumerate()
                .map(|(u, &c)| (c, usize::from(c == target && u != v)))
                .collect();
            self.descend(refine(n, self.matrix, rank(&split)), best);
        }
    }

    fn twins(&self, u: usize, v: usize) -> bool {
        let n = self.n;
        (0..n)
            .filter(|&w| w != u && w != v)
            .all(|w| self.matrix[u * n + w] == self.matrix[v * n + w])
    }
}

/// Dense ranks of arbitrary ordered signatures.
fn rank<T: Ord + Clone>(sig: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = sig.to_vec();
    sorted.sort();
    sorted.dedup();
    sig.iter()
        .map(|s| sorted.binary_search(s).expect("present"))
        .collect()
}

/// Iterated colour refinement until the number of classes stops growing.
fn refine(n: usize, matrix: &[u8], mut colors: Vec<usize>) -> Vec<usize> {
    let mut classes = colors.iter().max().map_or(0, |&c| c + 1);
    loop {
        let sig: Vec<(usize, Vec<(u8, usize)>)> = (0..n)
            .map(|v| {
                let mut nb: Vec<(u8, usize)> = (0..n)
                    .filter(|&u| matrix[v * n + u] != 0)
                    .map(|u| (matrix[v * n + u], colors[u]))
                    .collect();
                nb.sort_unstable();
                (colors[v], nb)
            })
            .collect();
        let next = rank(&sig);
        let next_classes = next.iter().max().map_or(0, |&c| c + 1);
        colors = next;
        if next_classes == classes {
            return colors;
        }
        classes = next_classes;
    }
}
