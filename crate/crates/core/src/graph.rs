//! Simple undirected graphs with a fixed total order on the edges.
//!
//! The position of an edge in [`Graph::edges`] is its rank in the global edge
//! order. Induced subgraphs keep the relative order of the parent.

use std::collections::HashMap;

use crate::bitset::VertexSet;
use crate::error::{Error, ParseError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    edge_ids: HashMap<(usize, usize), usize>,
}

/// An induced subgraph together with the maps back into its parent.
#[derive(Clone, Debug)]
pub struct Induced {
    pub graph: Graph,
    /// `vertex_map[i]` is the parent vertex of local vertex `i` (increasing).
    pub vertex_map: Vec<usize>,
    /// `edge_map[j]` is the parent edge index of local edge `j` (increasing).
    pub edge_map: Vec<usize>,
}

fn key(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

impl Graph {
    /// Builds a graph whose edge order is the iteration order of `edges`.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Graph::empty(n);
        for (u, v) in edges {
            if u == v || u >= n || v >= n || g.edge_ids.contains_key(&key(u, v)) {
                return Err(Error::InvalidEdge { u, v, n });
            }
            g.push_edge(u, v);
        }
        g.sort_adjacency();
        Ok(g)
    }

    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            edges: Vec::new(),
            edge_ids: HashMap::new(),
        }
    }

    fn push_edge(&mut self, u: usize, v: usize) {
        let (a, b) = key(u, v);
        self.edge_ids.insert((a, b), self.edges.len());
        self.edges.push((a, b));
        self.adj[a].push(b);
        self.adj[b].push(a);
    }

    fn sort_adjacency(&mut self) {
        for nb in &mut self.adj {
            nb.sort_unstable();
        }
    }

    /// Parses the edge-list format: a header `n m` followed by `m` lines `u v`.
    ///
    /// Blank lines and lines starting with `#` are skipped; CRLF is accepted.
    /// Line numbers in errors are physical line numbers starting at 1.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let (hline, header) = lines.next().ok_or(ParseError::MissingHeader)?;
        let (n, m) = parse_pair(hline, header)?;
        let mut g = Graph::empty(n);
        for (line, body) in lines {
            let (u, v) = parse_pair(line, body)?;
            for w in [u, v] {
                if w >= n {
                    return Err(ParseError::VertexOutOfRange { line, v: w, n });
                }
            }
            if u == v {
                return Err(ParseError::Loop { line, v: u });
            }
            if g.edge_ids.contains_key(&key(u, v)) {
                return Err(ParseError::DuplicateEdge { line, u, v });
            }
            g.push_edge(u, v);
        }
        if g.m() != m {
            return Err(ParseError::EdgeCount {
                expected: m,
                found: g.m(),
            });
        }
        g.sort_adjacency();
        Ok(g)
    }

    /// Writes the graph back in the edge-list format.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{} {}\n", self.n, self.m());
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in rank order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge(&self, rank: usize) -> (usize, usize) {
        self.edges[rank]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_id(&self, u: usize, v: usize) -> Option<usize> {
        self.edge_ids.get(&key(u, v)).copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edge_ids.contains_key(&key(u, v))
    }

    /// Connected components as vertex sets, ordered by smallest vertex.
    pub fn components(&self) -> Vec<VertexSet> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = VertexSet::new();
            let mut stack = vec![s];
            seen[s] = true;
            while let Some(v) = stack.pop() {
                comp.insert(v);
                for &u in &self.adj[v] {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// `G[S]` with vertices relabelled in increasing order and the parent
    /// edge order preserved.
    pub fn induced_subgraph(&self, s: &VertexSet) -> Induced {
        let vertex_map: Vec<usize> = s.iter().collect();
        let mut local = vec![usize::MAX; self.n];
        for (i, &v) in vertex_map.iter().enumerate() {
            local[v] = i;
        }
        let mut graph = Graph::empty(vertex_map.len());
        let mut edge_map = Vec::new();
        for (rank, &(u, v)) in self.edges.iter().enumerate() {
            if s.contains(u) && s.contains(v) {
                graph.push_edge(local[u], local[v]);
                edge_map.push(rank);
            }
        }
        graph.sort_adjacency();
        Induced {
            graph,
            vertex_map,
            edge_map,
        }
    }

    /// The same graph with its edges re-ranked: new rank `i` is old edge `order[i]`.
    pub fn with_edge_order(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.m());
        Graph::new(self.n, order.iter().map(|&r| self.edges[r])).expect("permutation of valid edges")
    }

    /// The graph with vertex `v` renamed to `perm[v]`; edge order is kept.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        Graph::new(self.n, self.edges.iter().map(|&(u, v)| (perm[u], perm[v])))
            .expect("relabelling preserves simplicity")
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Self {
        let shift = self.n;
        Graph::new(
            self.n + other.n,
            self.edges
                .iter()
                .copied()
                .chain(other.edges.iter().map(|&(u, v)| (u + shift, v + shift))),
        )
        .expect("disjoint union of simple graphs")
    }

    pub fn path(n: usize) -> Self {
        Graph::new(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Graph::new(n, (1..n).map(|i| (i - 1, i)).chain([(0, n - 1)])).unwrap()
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)))).unwrap()
    }

    pub fn star(leaves: usize) -> Self {
        Graph::new(leaves + 1, (1..=leaves).map(|v| (0, v))).unwrap()
    }

    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        let inner = (0..5).map(|i| (i + 5, (i + 2) % 5 + 5));
        Graph::new(10, outer.chain(spokes).chain(inner)).unwrap()
    }
}

fn parse_pair(line: usize, body: &str) -> std::result::Result<(usize, usize), ParseError> {
    let mut it = body.split_whitespace();
    let mut next = || -> std::result::Result<usize, ParseError> {
        let tok = it.next().ok_or_else(|| ParseError::Malformed {
            line,
            reason: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| ParseError::Malformed {
            line,
            reason: format!("not a non-negative integer: {tok:?}"),
        })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(ParseError::Malformed {
            line,
            reason: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}
