//! Exact tree weights.
//!
//! For a tree `T` with broken-edge set `E_T` on `k` vertices,
//!
//! ```text
//! ŵ_T = ∫_{[0,1/2+δ]^k} ∏_{uv∈T} 1[x_u+x_v>1] · ∏_{st∈E_T} 1[x_s+x_t≤1] dx
//! w_T = (-1)^{|T|} ŵ_T / (1/2+δ)^k
//! ```
//!
//! Every coordinate is forced into `J = [1/2-δ, 1/2+δ]`. The box is cut by
//! which coordinates lie below 1/2 (the set `S`, which must be "nice"), then
//! by which `S`-neighbour binds each remaining coordinate from below (`s`) and
//! above (`t`). On each cell the free coordinates integrate out to a product
//! of differences and the rest is an order polytope on `S`, integrated by
//! peeling minimal elements.

use std::collections::HashMap;
use std::sync::RwLock;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::bitset::{EdgeSet, VertexSet};
use crate::canon::{canonical_form_colored, IsoKey};
use crate::enumerate::{broken_edges, Tree};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poly::{MultiPoly, VarId};

/// The truncation parameter δ and the interval endpoints derived from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeltaParams {
    pub delta: BigRational,
    pub half: BigRational,
    /// Upper end of the box `I = [0, 1/2+δ]`.
    pub box_hi: BigRational,
    /// `J = [1/2-δ, 1/2+δ]`.
    pub j_lo: BigRational,
    pub j_hi: BigRational,
    /// `J_- = [1/2-δ, 1/2]`.
    pub jm_hi: BigRational,
}

impl DeltaParams {
    pub fn new(delta: BigRational) -> Result<Self> {
        let half = BigRational::new(1.into(), 2.into());
        if delta.is_negative() || delta >= half {
            return Err(Error::InvalidDelta(crate::poly::format_rational(&delta)));
        }
        Ok(DeltaParams {
            box_hi: &half + &delta,
            j_lo: &half - &delta,
            j_hi: &half + &delta,
            jm_hi: half.clone(),
            half,
            delta,
        })
    }

    pub fn from_ratio(numer: i64, denom: i64) -> Result<Self> {
        Self::new(BigRational::new(numer.into(), denom.into()))
    }

    /// `δ / (1/2+δ)`, the per-vertex scale of normalised weights.
    pub fn scale(&self) -> BigRational {
        &self.delta / &self.box_hi
    }
}

/// A tree with its broken edges, relabelled onto vertices `0..k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeShape {
    k: usize,
    /// Local vertex `i` is vertex `vertex_map[i]` of the graph it came from.
    pub vertex_map: Vec<usize>,
    pub tree_edges: Vec<(usize, usize)>,
    pub broken_edges: Vec<(usize, usize)>,
    tree_adj: Vec<u64>,
    broken_adj: Vec<u64>,
}

impl TreeShape {
    /// Shape of a spanning tree `tree` of `h`, where `h` plays the role of
    /// `G[V(T)]` and carries the inherited edge order.
    pub fn new(tree: &Tree, h: &Graph) -> Result<Self> {
        let broken = broken_edges(h, tree)?;
        if h.n() > 64 {
            return Err(Error::TooManyVertices { n: h.n(), max: 64 });
        }
        Ok(Self::from_parts(
            (0..h.n()).collect(),
            tree.edges.iter().map(|e| h.edge(e)).collect(),
            broken.iter().map(|e| h.edge(e)).collect(),
        ))
    }

    /// Shape of a tree of `g`; broken edges are taken in `g[V(T)]` and
    /// `vertex_map` points back into `g`.
    pub fn in_graph(g: &Graph, tree: &Tree) -> Result<Self> {
        let ind = g.induced_subgraph(&tree.vertices);
        let local: EdgeSet = ind
            .edge_map
            .iter()
            .enumerate()
            .filter(|&(_, &pe)| tree.edges.contains(pe))
            .map(|(j, _)| j)
            .collect();
        let local = Tree::from_edges(&ind.graph, local)?;
        let mut shape = Self::new(&local, &ind.graph)?;
        shape.vertex_map = ind.vertex_map;
        Ok(shape)
    }

    pub(crate) fn from_edge_mask(g: &Graph, mask: u64) -> Result<Self> {
        let edges: EdgeSet = (0..64).filter(|e| mask >> e & 1 == 1).collect();
        Self::in_graph(g, &Tree::from_edges(g, edges)?)
    }

    pub fn from_parts(
        vertex_map: Vec<usize>,
        tree_edges: Vec<(usize, usize)>,
        broken_edges: Vec<(usize, usize)>,
    ) -> Self {
        let k = vertex_map.len();
        let mut tree_adj = vec![0u64; k];
        let mut broken_adj = vec![0u64; k];
        for &(u, v) in &tree_edges {
            tree_adj[u] |= 1 << v;
            tree_adj[v] |= 1 << u;
        }
        for &(u, v) in &broken_edges {
            broken_adj[u] |= 1 << v;
            broken_adj[v] |= 1 << u;
        }
        TreeShape {
            k,
            vertex_map,
            tree_edges,
            broken_edges,
            tree_adj,
            broken_adj,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.k
    }

    /// Isomorphism class of the pair (tree, broken edges).
    pub fn iso_key(&self) -> IsoKey {
        let coloured: Vec<(usize, usize, u8)> = self
            .tree_edges
            .iter()
            .map(|&(u, v)| (u, v, 1))
            .chain(self.broken_edges.iter().map(|&(u, v)| (u, v, 2)))
            .collect();
        canonical_form_colored(self.k, &coloured).expect("tree shapes are small")
    }

    fn sign(&self) -> BigRational {
        if self.tree_edges.len() % 2 == 0 {
            BigRational::one()
        } else {
            -BigRational::one()
        }
    }
}

/// Sets `S` independent in `T` whose complement is independent in `E_T`.
pub fn nice_sets(shape: &TreeShape) -> Vec<VertexSet> {
    nice_masks(shape).into_iter().map(VertexSet::from_word).collect()
}

fn nice_masks(shape: &TreeShape) -> Vec<u64> {
    let k = shape.k;
    let all = if k == 64 { u64::MAX } else { (1u64 << k) - 1 };
    let mut out = Vec::new();
    // grow independent sets of T vertex by vertex
    fn rec(shape: &TreeShape, v: usize, set: u64, all: u64, out: &mut Vec<u64>) {
        if v == shape.k {
            let comp = all & !set;
            if (0..shape.k).all(|u| comp >> u & 1 == 0 || shape.broken_adj[u] & comp == 0) {
                out.push(set);
            }
            return;
        }
        rec(shape, v + 1, set, all, out);
        if shape.tree_adj[v] & set == 0 {
            rec(shape, v + 1, set | 1 << v, all, out);
        }
    }
    rec(shape, 0, 0, all, &mut out);
    out.sort_unstable();
    out
}

/// Binding-neighbour maps for the vertices outside a nice set.
///
/// `s[i] = None` stands for the sentinel ⊕ (value 1/2) and `t[i] = None` for
/// ⊖ (value 1/2-δ); both are used only when the vertex has no neighbour of
/// that kind in `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct STMap {
    pub free: Vec<usize>,
    pub s: Vec<Option<usize>>,
    pub t: Vec<Option<usize>>,
}

pub fn st_maps(shape: &TreeShape, nice: &VertexSet) -> Vec<STMap> {
    st_maps_mask(shape, nice.as_word().expect("small tree"))
}

fn bits(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn st_maps_mask(shape: &TreeShape, set: u64) -> Vec<STMap> {
    let free: Vec<usize> = (0..shape.k).filter(|&v| set >> v & 1 == 0).collect();
    let options = |adj: &Vec<u64>, v: usize| -> Vec<Option<usize>> {
        let hits = bits(adj[v] & set);
        if hits.is_empty() {
            vec![None]
        } else {
            hits.into_iter().map(Some).collect()
        }
    };
    let s_opts: Vec<Vec<Option<usize>>> = free.iter().map(|&v| options(&shape.tree_adj, v)).collect();
    let t_opts: Vec<Vec<Option<usize>>> = free.iter().map(|&v| options(&shape.broken_adj, v)).collect();

    let mut out = vec![STMap {
        free: free.clone(),
        s: Vec::new(),
        t: Vec::new(),
    }];
    for i in 0..free.len() {
        let mut next = Vec::with_capacity(out.len() * s_opts[i].len() * t_opts[i].len());
        for base in &out {
            for &s in &s_opts[i] {
                for &t in &t_opts[i] {
                    let mut m = base.clone();
                    m.s.push(s);
                    m.t.push(t);
                    next.push(m);
                }
            }
        }
        out = next;
    }
    out
}

/// The order constraints `x_u < x_v` a cell imposes on the coordinates in `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poset {
    /// Elements of `S`, increasing.
    pub members: Vec<usize>,
    /// Arcs `(u, v)` meaning `x_u < x_v`, as vertex labels, deduplicated.
    pub arcs: Vec<(usize, usize)>,
    /// `below[i]`: bitmask over member indices of strict predecessors of member `i`.
    below: Vec<u64>,
    acyclic: bool,
}

impl Poset {
    pub fn new(members: Vec<usize>, arcs: Vec<(usize, usize)>) -> Self {
        let idx = |v: usize| members.binary_search(&v).expect("arc endpoint in S");
        let len = members.len();
        let mut reach = vec![0u64; len];
        for &(u, v) in &arcs {
            reach[idx(v)] |= 1 << idx(u);
        }
        // transitive closure over predecessor masks
        loop {
            let mut changed = false;
            for i in 0..len {
                let mut acc = reach[i];
                for j in bits(reach[i]) {
                    acc |= reach[j];
                }
                if acc != reach[i] {
                    reach[i] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let acyclic = (0..len).all(|i| reach[i] >> i & 1 == 0);
        Poset {
            members,
            arcs,
            below: reach,
            acyclic,
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.acyclic
    }

    /// Members of `subset` (bitmask over member indices) with no predecessor in it.
    pub fn minimal_in(&self, subset: u64) -> Vec<usize> {
        bits(subset)
            .into_iter()
            .filter(|&i| self.below[i] & subset == 0)
            .collect()
    }
}

/// Digraph on `S` from the three arc rules: `t(v) < s(v)`, `s(v) < w` for the
/// other tree neighbours `w`, and `w < t(v)` for the other broken-edge
/// neighbours. Comparisons with sentinels are implied by the `J_-` bounds and
/// are left out.
pub fn build_poset(shape: &TreeShape, nice: &VertexSet, map: &STMap) -> Poset {
    build_poset_mask(shape, nice.as_word().expect("small tree"), map)
}

fn build_poset_mask(shape: &TreeShape, set: u64, map: &STMap) -> Poset {
    let mut arcs = Vec::new();
    for (i, &v) in map.free.iter().enumerate() {
        if let (Some(s), Some(t)) = (map.s[i], map.t[i]) {
            arcs.push((t, s));
        }
        if let Some(s) = map.s[i] {
            for w in bits(shape.tree_adj[v] & set) {
                if w != s {
                    arcs.push((s, w));
                }
            }
        }
        if let Some(t) = map.t[i] {
            for w in bits(shape.broken_adj[v] & set) {
                if w != t {
                    arcs.push((w, t));
                }
            }
        }
    }
    arcs.sort_unstable();
    arcs.dedup();
    Poset::new(bits(set), arcs)
}

/// `∫ p(x) dx` over `{a < x_u < b for u ∈ S, x_u < x_v for arcs u→v}`.
///
/// `F_∅ = p` and `F_U(m) = Σ_{u ∈ min U} ∫_m^b F_{U-u}(m := x_u) dx_u`, with the
/// moving lower bound `m` carried as [`VarId::Lower`]; the answer is `F_S(a)`.
pub fn poset_integral(poset: &Poset, p: &MultiPoly, a: &BigRational, b: &BigRational) -> Result<BigRational> {
    if !poset.is_acyclic() {
        return Err(Error::CyclicPoset);
    }
    let len = poset.members.len();
    let full = if len == 64 { u64::MAX } else { (1u64 << len) - 1 };
    let upper = MultiPoly::constant(b.clone());
    let lower = MultiPoly::var(VarId::Lower);
    let mut memo: HashMap<u64, MultiPoly> = HashMap::new();
    let top = peel(poset, p, &lower, &upper, full, &mut memo);
    Ok(top
        .substitute_constant(VarId::Lower, a)
        .as_constant()
        .expect("all variables integrated out"))
}

fn peel(
    poset: &Poset,
    p: &MultiPoly,
    lower: &MultiPoly,
    upper: &MultiPoly,
    subset: u64,
    memo: &mut HashMap<u64, MultiPoly>,
) -> MultiPoly {
    if subset == 0 {
        return p.clone();
    }
    if let Some(f) = memo.get(&subset) {
        return f.clone();
    }
    let mut acc = MultiPoly::zero();
    for i in poset.minimal_in(subset) {
        let x = VarId::Vertex(poset.members[i] as u32);
        let inner = peel(poset, p, lower, upper, subset & !(1 << i), memo);
        let moved = inner.substitute(VarId::Lower, &MultiPoly::var(x));
        acc = &acc + &moved.integrate_definite(x, lower, upper);
    }
    memo.insert(subset, acc.clone());
    acc
}

/// `∏_i (x_{s(v_i)} - x_{t(v_i)})` with sentinels replaced by `plus` / `minus`.
pub fn cell_integrand(map: &STMap, plus: &BigRational, minus: &BigRational) -> MultiPoly {
    let side = |end: Option<usize>, sentinel: &BigRational| match end {
        Some(u) => MultiPoly::var(VarId::Vertex(u as u32)),
        None => MultiPoly::constant(sentinel.clone()),
    };
    map.s.iter().zip(&map.t).fold(MultiPoly::one(), |acc, (&s, &t)| {
        &acc * &(&side(s, plus) - &side(t, minus))
    })
}

/// One term of the cell decomposition, reported to trace visitors.
pub struct Cell<'a> {
    pub nice: VertexSet,
    pub map: &'a STMap,
    pub poset: &'a Poset,
    pub integrand: &'a MultiPoly,
    /// `None` when the poset is cyclic (the cell has measure zero).
    pub value: Option<&'a BigRational>,
}

/// Evaluation points of the decomposition: `S` coordinates range over
/// `[lo, hi]` and the sentinels take the values `plus` (⊕) and `minus` (⊖).
#[derive(Clone, Debug)]
pub struct CellBounds {
    pub lo: BigRational,
    pub hi: BigRational,
    pub plus: BigRational,
    pub minus: BigRational,
}

impl CellBounds {
    pub fn for_delta(dp: &DeltaParams) -> Self {
        CellBounds {
            lo: dp.j_lo.clone(),
            hi: dp.jm_hi.clone(),
            plus: dp.half.clone(),
            minus: dp.j_lo.clone(),
        }
    }

    /// After `x = 1/2 - δ + δy` every cell lives in `y ∈ [0, 1]`.
    pub fn unit() -> Self {
        CellBounds {
            lo: BigRational::zero(),
            hi: BigRational::one(),
            plus: BigRational::one(),
            minus: BigRational::zero(),
        }
    }
}

/// Sum of all cell integrals, calling `visit` on each cell.
pub fn decompose(shape: &TreeShape, bounds: &CellBounds, mut visit: impl FnMut(Cell<'_>)) -> BigRational {
    let mut total = BigRational::zero();
    for set in nice_masks(shape) {
        for map in st_maps_mask(shape, set) {
            let poset = build_poset_mask(shape, set, &map);
            let integrand = cell_integrand(&map, &bounds.plus, &bounds.minus);
            let value = poset
                .is_acyclic()
                .then(|| poset_integral(&poset, &integrand, &bounds.lo, &bounds.hi).expect("acyclic"));
            if let Some(v) = &value {
                total += v;
            }
            visit(Cell {
                nice: VertexSet::from_word(set),
                map: &map,
                poset: &poset,
                integrand: &integrand,
                value: value.as_ref(),
            });
        }
    }
    total
}

/// `ŵ_T` for a spanning tree `tree` of `h = G[V(T)]`.
pub fn hat_w(tree: &Tree, h: &Graph, dp: &DeltaParams) -> Result<BigRational> {
    let shape = TreeShape::new(tree, h)?;
    Ok(hat_w_shape(&shape, dp))
}

pub fn hat_w_shape(shape: &TreeShape, dp: &DeltaParams) -> BigRational {
    if dp.delta.is_zero() {
        return BigRational::zero();
    }
    decompose(shape, &CellBounds::for_delta(dp), |_| {})
}

/// The δ-free volume `c_T` with `ŵ_T = δ^k c_T`.
pub fn unit_volume(shape: &TreeShape) -> BigRational {
    decompose(shape, &CellBounds::unit(), |_| {})
}

/// `w_T` from `ŵ_T`.
pub fn normalise(shape: &TreeShape, hat: &BigRational, dp: &DeltaParams) -> BigRational {
    shape.sign() * hat / num_traits::pow(dp.box_hi.clone(), shape.k)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeWeightRecord {
    pub tree_edges: Vec<(usize, usize)>,
    pub broken_edges: Vec<(usize, usize)>,
    pub vertices: Vec<usize>,
    pub hat_w: BigRational,
    pub w: BigRational,
}

pub fn tree_weight(tree: &Tree, h: &Graph, dp: &DeltaParams) -> Result<TreeWeightRecord> {
    Ok(shape_record(&TreeShape::new(tree, h)?, dp))
}

/// Record for a tree of a larger graph `g`, with edges in `g`'s labels.
pub fn tree_weight_in_graph(g: &Graph, tree: &Tree, dp: &DeltaParams) -> Result<TreeWeightRecord> {
    Ok(shape_record(&TreeShape::in_graph(g, tree)?, dp))
}

fn shape_record(shape: &TreeShape, dp: &DeltaParams) -> TreeWeightRecord {
    let hat = hat_w_shape(shape, dp);
    let w = normalise(shape, &hat, dp);
    let lift = |edges: &[(usize, usize)]| -> Vec<(usize, usize)> {
        edges
            .iter()
            .map(|&(u, v)| (shape.vertex_map[u], shape.vertex_map[v]))
            .collect()
    };
    TreeWeightRecord {
        tree_edges: lift(&shape.tree_edges),
        broken_edges: lift(&shape.broken_edges),
        vertices: shape.vertex_map.clone(),
        hat_w: hat,
        w,
    }
}

/// Memo of `c_T` keyed by the isomorphism class of (tree, broken edges).
///
/// Safe to share between threads; concurrent misses may compute the same
/// entry twice, which is harmless because values are exact.
#[derive(Default)]
pub struct WeightCache {
    unit: RwLock<HashMap<IsoKey, BigRational>>,
}

impl WeightCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.unit.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn unit_volume(&self, shape: &TreeShape) -> BigRational {
        let key = shape.iso_key();
        if let Some(v) = self.unit.read().unwrap().get(&key) {
            return v.clone();
        }
        let v = unit_volume(shape);
        self.unit.write().unwrap().entry(key).or_insert(v).clone()
    }

    /// `w_T = (-1)^{|T|} (δ/(1/2+δ))^k c_T`.
    pub fn weight(&self, shape: &TreeShape, dp: &DeltaParams) -> BigRational {
        if dp.delta.is_zero() {
            return BigRational::zero();
        }
        shape.sign() * num_traits::pow(dp.scale(), shape.k) * self.unit_volume(shape)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn shape_of(g: &Graph, tree_edges: &[usize]) -> TreeShape {
        let t = Tree::from_edges(g, tree_edges.iter().copied().collect()).unwrap();
        TreeShape::new(&t, g).unwrap()
    }

    fn sets(v: Vec<VertexSet>) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = v.into_iter().map(|s| s.iter().collect()).collect();
        out.sort();
        out
    }

    #[test]
    fn delta_params_range() {
        assert!(DeltaParams::from_ratio(1, 2).is_err());
        assert!(DeltaParams::from_ratio(-1, 10).is_err());
        let dp = DeltaParams::from_ratio(1, 4).unwrap();
        assert_eq!(dp.box_hi, q(3, 4));
        assert_eq!(dp.j_lo, q(1, 4));
        assert_eq!(dp.jm_hi, q(1, 2));
    }

    #[test]
    fn nice_sets_small_cases() {
        let k2 = shape_of(&Graph::path(2), &[0]);
        assert_eq!(sets(nice_sets(&k2)), vec![vec![], vec![0], vec![1]]);

        let p3 = shape_of(&Graph::path(3), &[0, 1]);
        assert_eq!(
            sets(nice_sets(&p3)),
            vec![vec![], vec![0], vec![0, 2], vec![1], vec![2]]
        );

        let tri = Graph::parse("3 3\n0 1\n1 2\n0 2").unwrap();
        let shape = shape_of(&tri, &[0, 1]);
        assert_eq!(shape.broken_edges, vec![(0, 2)]);
        let brute: Vec<Vec<usize>> = (0u64..8)
            .filter(|&s| {
                let tree_ok = [(0, 1), (1, 2)].iter().all(|&(u, v)| !(s >> u & 1 == 1 && s >> v & 1 == 1));
                let comp_ok = !(s & 1 == 0 && s >> 2 & 1 == 0);
                tree_ok && comp_ok
            })
            .map(|s| (0..3).filter(|&i| s >> i & 1 == 1).collect())
            .collect();
        let mut brute = brute;
        brute.sort();
        assert_eq!(sets(nice_sets(&shape)), brute);
    }

    #[test]
    fn st_map_counts() {
        let k2 = shape_of(&Graph::path(2), &[0]);
        let maps = st_maps(&k2, &[0].into_iter().collect());
        assert_eq!(maps, vec![STMap { free: vec![1], s: vec![Some(0)], t: vec![None] }]);

        let p3 = shape_of(&Graph::path(3), &[0, 1]);
        let maps = st_maps(&p3, &[0, 2].into_iter().collect());
        assert_eq!(maps.len(), 2);
        assert!(maps.iter().all(|m| m.free == vec![1] && m.t == vec![None]));

        let star = shape_of(&Graph::star(3), &[0, 1, 2]);
        assert_eq!(st_maps(&star, &[1, 2, 3].into_iter().collect()).len(), 3);
    }

    #[test]
    fn poset_arcs() {
        let p3 = shape_of(&Graph::path(3), &[0, 1]);
        let nice: VertexSet = [0, 2].into_iter().collect();
        let map = STMap { free: vec![1], s: vec![Some(0)], t: vec![None] };
        let poset = build_poset(&p3, &nice, &map);
        assert_eq!(poset.arcs, vec![(0, 2)]);
        assert!(poset.is_acyclic());

        let single = build_poset(&shape_of(&Graph::path(2), &[0]), &[0].into_iter().collect(), &STMap {
            free: vec![1],
            s: vec![Some(0)],
            t: vec![None],
        });
        assert!(single.arcs.is_empty() && single.is_acyclic());

        let cyc = Poset::new(vec![0, 1], vec![(0, 1), (1, 0)]);
        assert!(!cyc.is_acyclic());
        assert_eq!(
            poset_integral(&cyc, &MultiPoly::one(), &q(0, 1), &q(1, 1)),
            Err(Error::CyclicPoset)
        );
    }

    #[test]
    fn order_polytope_volumes() {
        let (a, b) = (q(0, 1), q(1, 1));
        let one = MultiPoly::one();
        assert_eq!(poset_integral(&Poset::new(vec![0], vec![]), &one, &a, &b).unwrap(), q(1, 1));
        assert_eq!(poset_integral(&Poset::new(vec![0, 1], vec![(0, 1)]), &one, &a, &b).unwrap(), q(1, 2));
        let x0 = MultiPoly::var(VarId::Vertex(0));
        assert_eq!(
            poset_integral(&Poset::new(vec![0, 1, 2], vec![]), &x0, &a, &b).unwrap(),
            q(1, 2)
        );
        assert_eq!(
            poset_integral(&Poset::new(vec![0, 1, 2], vec![(0, 1), (1, 2)]), &one, &a, &b).unwrap(),
            q(1, 6)
        );
        // n! linear extensions of an antichain
        assert_eq!(
            poset_integral(&Poset::new(vec![0, 1, 2, 3], vec![]), &one, &q(1, 4), &q(1, 2)).unwrap(),
            q(1, 256)
        );
    }

    #[test]
    fn hat_w_closed_forms() {
        for (n, d) in [(1, 4), (1, 10), (2, 5), (1, 100)] {
            let dp = DeltaParams::from_ratio(n, d).unwrap();
            let delta = dp.delta.clone();
            let k2 = Graph::path(2);
            let t = Tree::from_edges(&k2, [0].into_iter().collect()).unwrap();
            assert_eq!(hat_w(&t, &k2, &dp).unwrap(), q(2, 1) * &delta * &delta);

            let p3 = Graph::path(3);
            let t = Tree::from_edges(&p3, [0, 1].into_iter().collect()).unwrap();
            assert_eq!(hat_w(&t, &p3, &dp).unwrap(), q(8, 3) * num_traits::pow(delta, 3));
        }
    }

    #[test]
    fn tree_weight_examples() {
        let dp = DeltaParams::from_ratio(1, 4).unwrap();
        let k2 = Graph::path(2);
        let t = Tree::from_edges(&k2, [0].into_iter().collect()).unwrap();
        assert_eq!(tree_weight(&t, &k2, &dp).unwrap().w, q(-2, 9));

        // two tree edges, so the sign is positive
        let p3 = Graph::path(3);
        let t = Tree::from_edges(&p3, [0, 1].into_iter().collect()).unwrap();
        assert_eq!(tree_weight(&t, &p3, &dp).unwrap().w, q(8, 81));

        let zero = DeltaParams::from_ratio(0, 1).unwrap();
        let rec = tree_weight(&t, &p3, &zero).unwrap();
        assert!(rec.w.is_zero() && rec.hat_w.is_zero());
    }

    #[test]
    fn cache_matches_direct_weights() {
        let cache = WeightCache::new();
        let g = Graph::complete(4);
        for dp in [DeltaParams::from_ratio(1, 10).unwrap(), DeltaParams::from_ratio(3, 7).unwrap()] {
            for t in crate::enumerate::enumerate_spanning_trees(&g).unwrap() {
                let shape = TreeShape::new(&t, &g).unwrap();
                let direct = tree_weight(&t, &g, &dp).unwrap().w;
                assert_eq!(cache.weight(&shape, &dp), direct);
                let scaled = num_traits::pow(dp.delta.clone(), 4) * unit_volume(&shape);
                assert_eq!(hat_w_shape(&shape, &dp), scaled);
            }
        }
        // 16 spanning trees of K4 fall into few (T, E_T) classes
        assert!(cache.len() < 16);
    }

    #[test]
    fn shape_from_mask_uses_induced_graph() {
        // path 0-1-2 inside a triangle: the chord 0-2 is ranked last, so broken
        let g = Graph::parse("4 4\n0 1\n1 2\n2 3\n0 2").unwrap();
        let shape = TreeShape::from_edge_mask(&g, 0b11).unwrap();
        assert_eq!(shape.vertex_map, vec![0, 1, 2]);
        assert_eq!(shape.broken_edges, vec![(0, 2)]);
        let t = Tree::from_edges(&g, [0, 1].into_iter().collect()).unwrap();
        let ind = g.induced_subgraph(&t.vertices);
        let local = Tree::from_edges(&ind.graph, [0, 1].into_iter().collect()).unwrap();
        assert_eq!(TreeShape::new(&local, &ind.graph).unwrap().broken_edges, shape.broken_edges);
    }
}
