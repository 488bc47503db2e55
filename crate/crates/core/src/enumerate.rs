//! Enumeration of connected vertex sets, spanning trees and forests, and the
//! broken-edge sets that index the interval partition of connected subgraphs.

use std::collections::VecDeque;

use crate::bitset::{EdgeSet, VertexSet};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// A tree inside some graph, given by edge indices of that graph.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    pub edges: EdgeSet,
    pub vertices: VertexSet,
}

/// Vertex-disjoint trees, each with at least one edge.
pub type Forest = Vec<Tree>;

impl Tree {
    /// Validates that `edges` form a tree with at least one edge in `g`.
    pub fn from_edges(g: &Graph, edges: EdgeSet) -> Result<Self> {
        let vertices: VertexSet = edges
            .iter()
            .flat_map(|e| {
                let (u, v) = g.edge(e);
                [u, v]
            })
            .collect();
        if edges.is_empty() || edges.len() + 1 != vertices.len() {
            return Err(Error::NotSpanningTree);
        }
        let mut dsu = Dsu::new(g.n());
        for e in edges.iter() {
            let (u, v) = g.edge(e);
            if !dsu.union(u, v) {
                return Err(Error::NotSpanningTree);
            }
        }
        Ok(Tree { edges, vertices })
    }

    /// Number of edges.
    pub fn size(&self) -> usize {
        self.edges.len()
    }
}

pub(crate) struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    pub(crate) fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Calls `visit` once for every vertex set `S` with `G[S]` connected and
/// `1 <= |S| <= max_size`.
///
/// Each set is grown from its smallest vertex (the pivot), only ever adding
/// vertices larger than the pivot that are exclusive neighbours of the newest
/// vertex, so no set is produced twice. Emission order is deterministic.
pub fn for_each_connected_set(g: &Graph, max_size: usize, mut visit: impl FnMut(&[usize])) {
    if max_size == 0 {
        return;
    }
    // mark[u] > 0 iff u lies in the closed neighbourhood of the current set
    let mut mark = vec![0u32; g.n()];
    let mut current = Vec::with_capacity(max_size);
    for pivot in 0..g.n() {
        current.push(pivot);
        mark[pivot] += 1;
        for &u in g.neighbors(pivot) {
            mark[u] += 1;
        }
        let ext: Vec<usize> = g.neighbors(pivot).iter().copied().filter(|&u| u > pivot).collect();
        extend(g, max_size, pivot, &mut current, ext, &mut mark, &mut visit);
        for &u in g.neighbors(pivot) {
            mark[u] -= 1;
        }
        mark[pivot] -= 1;
        current.pop();
    }
}

fn extend(
    g: &Graph,
    max_size: usize,
    pivot: usize,
    current: &mut Vec<usize>,
    mut ext: Vec<usize>,
    mark: &mut [u32],
    visit: &mut impl FnMut(&[usize]),
) {
    visit(current);
    if current.len() == max_size {
        return;
    }
    while let Some(w) = ext.pop() {
        let mut next = ext.clone();
        next.extend(
            g.neighbors(w)
                .iter()
                .copied()
                .filter(|&u| u > pivot && mark[u] == 0),
        );
        current.push(w);
        mark[w] += 1;
        for &u in g.neighbors(w) {
            mark[u] += 1;
        }
        extend(g, max_size, pivot, current, next, mark, visit);
        for &u in g.neighbors(w) {
            mark[u] -= 1;
        }
        mark[w] -= 1;
        current.pop();
    }
}

/// All connected vertex sets of size at most `max_size`, in emission order.
pub fn enumerate_connected_sets(g: &Graph, max_size: usize) -> Vec<VertexSet> {
    let mut out = Vec::new();
    for_each_connected_set(g, max_size, |s| out.push(s.iter().copied().collect()));
    out
}

/// Every spanning tree of a connected graph, each exactly once.
pub fn enumerate_spanning_trees(h: &Graph) -> Result<Vec<Tree>> {
    if !h.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut out = Vec::new();
    if h.n() <= 1 {
        return Ok(out);
    }
    let all = VertexSet::full(h.n());
    let mut chosen = Vec::with_capacity(h.n() - 1);
    let mut comp: Vec<usize> = (0..h.n()).collect();
    spanning_rec(h, 0, &mut chosen, &mut comp, &mut |edges| {
        out.push(Tree {
            edges: edges.iter().copied().collect(),
            vertices: all.clone(),
        })
    });
    Ok(out)
}

fn spanning_rec(
    h: &Graph,
    next: usize,
    chosen: &mut Vec<usize>,
    comp: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    let need = h.n() - 1 - chosen.len();
    if need == 0 {
        emit(chosen);
        return;
    }
    if h.m() - next < need {
        return;
    }
    let (u, v) = h.edge(next);
    if comp[u] != comp[v] {
        let saved = comp.clone();
        let (from, to) = (comp[v], comp[u]);
        for c in comp.iter_mut() {
            if *c == from {
                *c = to;
            }
        }
        chosen.push(next);
        spanning_rec(h, next + 1, chosen, comp, emit);
        chosen.pop();
        *comp = saved;
    }
    spanning_rec(h, next + 1, chosen, comp, emit);
}

/// Broken edges of a spanning tree `t` of `h`: the non-tree edges that are the
/// largest edge (in `h`'s order) on their fundamental cycle.
pub fn broken_edges(h: &Graph, t: &Tree) -> Result<EdgeSet> {
    if t.vertices.len() != h.n() || t.edges.len() + 1 != h.n() {
        return Err(Error::NotSpanningTree);
    }
    let parent = tree_parents(h, &t.edges)?;
    let mut broken = EdgeSet::new();
    for (rank, &(a, b)) in h.edges().iter().enumerate() {
        if t.edges.contains(rank) {
            continue;
        }
        if path_max_rank(&parent, a, b) < rank {
            broken.insert(rank);
        }
    }
    Ok(broken)
}

/// BFS from vertex 0 over tree edges: `(parent, parent-edge rank, depth)`.
fn tree_parents(h: &Graph, tree: &EdgeSet) -> Result<Vec<(usize, usize, usize)>> {
    let n = h.n();
    let mut adj = vec![Vec::new(); n];
    for e in tree.iter() {
        if e >= h.m() {
            return Err(Error::NotSpanningTree);
        }
        let (u, v) = h.edge(e);
        adj[u].push((v, e));
        adj[v].push((u, e));
    }
    let mut parent = vec![(usize::MAX, usize::MAX, 0); n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &(u, e) in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                reached += 1;
                parent[u] = (v, e, parent[v].2 + 1);
                queue.push_back(u);
            }
        }
    }
    if reached != n {
        return Err(Error::NotSpanningTree);
    }
    Ok(parent)
}

fn path_max_rank(parent: &[(usize, usize, usize)], mut a: usize, mut b: usize) -> usize {
    let mut best = 0;
    while a != b {
        if parent[a].2 < parent[b].2 {
            std::mem::swap(&mut a, &mut b);
        }
        best = best.max(parent[a].1);
        a = parent[a].0;
    }
    best
}

/// All forests with exactly `k` edges, split into their tree components.
///
/// With `spanning` set, only forests whose trees cover every vertex of `h`
/// are returned.
pub fn enumerate_forests(h: &Graph, k: usize, spanning: bool) -> Vec<Forest> {
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(k);
    let mut comp: Vec<usize> = (0..h.n()).collect();
    forest_rec(h, 0, k, &mut chosen, &mut comp, &mut |edges| {
        let trees = split_forest(h, edges);
        if spanning {
            let covered: usize = trees.iter().map(|t| t.vertices.len()).sum();
            if covered != h.n() {
                return;
            }
        }
        out.push(trees);
    });
    out
}

fn forest_rec(
    h: &Graph,
    next: usize,
    k: usize,
    chosen: &mut Vec<usize>,
    comp: &mut Vec<usize>,
    emit: &mut impl FnMut(&[usize]),
) {
    if chosen.len() == k {
        emit(chosen);
        return;
    }
    for e in next..h.m() {
        if h.m() - e < k - chosen.len() {
            break;
        }
        let (u, v) = h.edge(e);
        if comp[u] == comp[v] {
            continue;
        }
        let saved = comp.clone();
        let (from, to) = (comp[v], comp[u]);
        for c in comp.iter_mut() {
            if *c == from {
                *c = to;
            }
        }
        chosen.push(e);
        forest_rec(h, e + 1, k, chosen, comp, emit);
        chosen.pop();
        *comp = saved;
    }
}

fn split_forest(h: &Graph, edges: &[usize]) -> Forest {
    let mut dsu = Dsu::new(h.n());
    for &e in edges {
        let (u, v) = h.edge(e);
        dsu.union(u, v);
    }
    let mut by_root: Vec<(usize, Tree)> = Vec::new();
    for &e in edges {
        let (u, v) = h.edge(e);
        let r = dsu.find(u);
        let idx = match by_root.iter().position(|(root, _)| *root == r) {
            Some(i) => i,
            None => {
                by_root.push((r, Tree { edges: EdgeSet::new(), vertices: VertexSet::new() }));
                by_root.len() - 1
            }
        };
        let tree = &mut by_root[idx].1;
        tree.edges.insert(e);
        tree.vertices.insert(u);
        tree.vertices.insert(v);
    }
    let mut trees: Vec<Tree> = by_root.into_iter().map(|(_, t)| t).collect();
    trees.sort();
    trees
}

/// Visits every forest of `h` with at most `max_edges` edges as an edge
/// bitmask together with its size. Requires `h.m() <= 64`.
pub(crate) fn for_each_forest_mask(h: &Graph, max_edges: usize, mut visit: impl FnMut(u64, usize)) {
    debug_assert!(h.m() <= 64);
    let mut comp: Vec<u8> = (0..h.n() as u8).collect();
    mask_rec(h, 0, 0, 0, max_edges, &mut comp, &mut visit);
}

fn mask_rec(
    h: &Graph,
    next: usize,
    mask: u64,
    size: usize,
    max_edges: usize,
    comp: &mut Vec<u8>,
    visit: &mut impl FnMut(u64, usize),
) {
    visit(mask, size);
    if size == max_edges {
        return;
    }
    for e in next..h.m() {
        let (u, v) = h.edge(e);
        if comp[u] == comp[v] {
            continue;
        }
        let saved = comp.clone();
        let (from, to) = (comp[v], comp[u]);
        for c in comp.iter_mut() {
            if *c == from {
                *c = to;
            }
        }
        mask_rec(h, e + 1, mask | (1 << e), size + 1, max_edges, comp, visit);
        *comp = saved;
    }
}

/// Splits a forest edge mask into per-tree edge masks (ordered by lowest edge).
pub(crate) fn forest_mask_components(h: &Graph, mask: u64) -> Vec<u64> {
    let mut dsu = Dsu::new(h.n());
    let mut rest = mask;
    while rest != 0 {
        let e = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let (u, v) = h.edge(e);
        dsu.union(u, v);
    }
    let mut roots: Vec<(usize, u64)> = Vec::new();
    let mut rest = mask;
    while rest != 0 {
        let e = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let r = dsu.find(h.edge(e).0);
        match roots.iter_mut().find(|(root, _)| *root == r) {
            Some((_, m)) => *m |= 1 << e,
            None => roots.push((r, 1 << e)),
        }
    }
    roots.into_iter().map(|(_, m)| m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_sets(g: &Graph, k: usize) -> Vec<Vec<usize>> {
        let mut v: Vec<Vec<usize>> = enumerate_connected_sets(g, k)
            .into_iter()
            .map(|s| s.iter().collect())
            .collect();
        v.sort();
        v
    }

    fn brute_connected_sets(g: &Graph, k: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        for mask in 1u64..(1 << g.n()) {
            let s: VertexSet = (0..g.n()).filter(|&v| mask >> v & 1 == 1).collect();
            if s.len() <= k && g.induced_subgraph(&s).graph.is_connected() {
                out.push(s.iter().collect());
            }
        }
        out.sort();
        out
    }

    #[test]
    fn connected_sets_of_p3() {
        let got = sorted_sets(&Graph::path(3), 3);
        assert_eq!(got.len(), 6);
        assert!(!got.contains(&vec![0, 2]));
        assert_eq!(got, brute_connected_sets(&Graph::path(3), 3));
    }

    #[test]
    fn connected_sets_of_c4_up_to_two() {
        assert_eq!(sorted_sets(&Graph::cycle(4), 2).len(), 8);
    }

    #[test]
    fn singletons_only() {
        let g = Graph::petersen();
        assert_eq!(sorted_sets(&g, 1), (0..10).map(|v| vec![v]).collect::<Vec<_>>());
    }

    #[test]
    fn complete_graph_has_every_subset() {
        for n in 1..=6 {
            assert_eq!(enumerate_connected_sets(&Graph::complete(n), n).len(), (1 << n) - 1);
        }
    }

    #[test]
    fn connected_sets_match_brute_force() {
        let graphs = [
            Graph::petersen(),
            Graph::cycle(7),
            Graph::new(7, [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 6), (2, 3)]).unwrap(),
        ];
        for g in &graphs {
            for k in 1..=g.n().min(6) {
                assert_eq!(sorted_sets(g, k), brute_connected_sets(g, k));
            }
        }
    }

    #[test]
    fn spanning_tree_counts() {
        assert_eq!(enumerate_spanning_trees(&Graph::complete(3)).unwrap().len(), 3);
        assert_eq!(enumerate_spanning_trees(&Graph::cycle(4)).unwrap().len(), 4);
        assert_eq!(enumerate_spanning_trees(&Graph::complete(4)).unwrap().len(), 16);
        assert_eq!(enumerate_spanning_trees(&Graph::petersen()).unwrap().len(), 2000);
        assert_eq!(
            enumerate_spanning_trees(&Graph::empty(2)),
            Err(Error::Disconnected)
        );
    }

    #[test]
    fn broken_edges_of_triangle() {
        let tri = Graph::parse("3 3\n0 1\n1 2\n0 2").unwrap();
        let t12 = Tree::from_edges(&tri, [0, 1].into_iter().collect()).unwrap();
        assert_eq!(broken_edges(&tri, &t12).unwrap(), [2].into_iter().collect());
        let t13 = Tree::from_edges(&tri, [0, 2].into_iter().collect()).unwrap();
        assert!(broken_edges(&tri, &t13).unwrap().is_empty());
    }

    #[test]
    fn broken_edge_of_c4_lowest_tree() {
        let c4 = Graph::cycle(4);
        let t = Tree::from_edges(&c4, [0, 1, 2].into_iter().collect()).unwrap();
        assert_eq!(broken_edges(&c4, &t).unwrap(), [3].into_iter().collect());
    }

    #[test]
    fn broken_edges_rejects_non_spanning() {
        let c4 = Graph::cycle(4);
        let t = Tree::from_edges(&c4, [0, 1].into_iter().collect()).unwrap();
        assert_eq!(broken_edges(&c4, &t), Err(Error::NotSpanningTree));
        assert!(Tree::from_edges(&Graph::complete(3), [0, 1, 2].into_iter().collect()).is_err());
    }

    #[test]
    fn forests_of_small_graphs() {
        let p3 = Graph::path(3);
        assert_eq!(enumerate_forests(&p3, 1, false).len(), 2);
        let two = enumerate_forests(&p3, 2, false);
        assert_eq!(two.len(), 1);
        assert_eq!(two[0].len(), 1);

        let tri = Graph::complete(3);
        assert_eq!(enumerate_forests(&tri, 2, true).len(), 3);
        // spanning forests of 2K2 with one edge each cover only half
        let two_k2 = Graph::path(2).disjoint_union(&Graph::path(2));
        assert_eq!(enumerate_forests(&two_k2, 1, true).len(), 0);
        assert_eq!(enumerate_forests(&two_k2, 2, true).len(), 1);
    }

    #[test]
    fn forest_masks_match_subset_brute_force() {
        let g = Graph::complete(4);
        let mut count = vec![0usize; 7];
        for_each_forest_mask(&g, 6, |_, k| count[k] += 1);
        let mut brute = vec![0usize; 7];
        for mask in 0u64..(1 << g.m()) {
            let mut dsu = Dsu::new(4);
            let acyclic = (0..g.m())
                .filter(|e| mask >> e & 1 == 1)
                .all(|e| dsu.union(g.edge(e).0, g.edge(e).1));
            if acyclic {
                brute[mask.count_ones() as usize] += 1;
            }
        }
        assert_eq!(count, brute);
        assert_eq!(count[3], 16);
    }
}
