//! Coefficients of the forest polynomial `p(x) = Σ_F x^{|F|} ∏_T w_T` and of
//! `log p`.
//!
//! The log coefficients of a bounded-degree graph are assembled from small
//! pieces: each `a_k(G)` is a sum over connected induced patterns `H` with at
//! most `2k` vertices of `γ_{H,k} · ind(H, G)`. The pattern coefficients come
//! from a Möbius-style recursion over connected induced subgraphs, starting
//! from `a_k(H)` of the pattern itself computed by direct forest enumeration.

use std::collections::{BTreeMap, HashMap};
use std::sync::RwLock;

use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::canon::{canonical_form, IsoKey};
use crate::enumerate::{enumerate_spanning_trees, for_each_connected_set, for_each_forest_mask, forest_mask_components};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weight::{DeltaParams, TreeShape, WeightCache};

/// Coefficients `e_0 .. e_K` of the forest polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffVector {
    pub e: Vec<BigRational>,
}

impl CoeffVector {
    /// `e_j`, zero past the stored range.
    pub fn get(&self, j: usize) -> BigRational {
        self.e.get(j).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Index of the last stored coefficient.
    pub fn degree_bound(&self) -> usize {
        self.e.len().saturating_sub(1)
    }

    /// `Σ_j e_j`, the value at `x = 1`.
    pub fn sum(&self) -> BigRational {
        self.e.iter().fold(BigRational::zero(), |acc, c| acc + c)
    }
}

/// Coefficients `a_1 .. a_K` of `log p`; `a[0]` holds `a_1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorCoeffs {
    pub a: Vec<BigRational>,
}

impl TaylorCoeffs {
    pub fn zeros(order: usize) -> Self {
        TaylorCoeffs {
            a: vec![BigRational::zero(); order],
        }
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// `a_k` for `k >= 1`.
    pub fn get(&self, k: usize) -> BigRational {
        assert!(k >= 1, "log coefficients start at 1");
        self.a.get(k - 1).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn sum(&self) -> BigRational {
        self.a.iter().fold(BigRational::zero(), |acc, c| acc + c)
    }
}

/// Exact forest sums of `h` by edge count, up to `max_edges`.
///
/// Each tree weight is taken inside `h[V(T)]`; unit volumes are shared
/// through `cache`.
pub(crate) fn forest_sums(h: &Graph, dp: &DeltaParams, max_edges: usize, cache: &WeightCache) -> Result<Vec<BigRational>> {
    if h.m() > 64 {
        return Err(Error::TooManyEdges { m: h.m(), max: 64 });
    }
    let top = max_edges.min(h.n().saturating_sub(h.components().len()));
    let mut e = vec![BigRational::zero(); top + 1];
    e[0] = BigRational::one();
    if dp.delta.is_zero() {
        return Ok(e);
    }
    let mut trees: HashMap<u64, BigRational> = HashMap::new();
    let mut failure = None;
    for_each_forest_mask(h, top, |mask, size| {
        if size == 0 || failure.is_some() {
            return;
        }
        let mut prod = BigRational::one();
        for part in forest_mask_components(h, mask) {
            let w = match trees.get(&part) {
                Some(w) => w.clone(),
                None => match TreeShape::from_edge_mask(h, part) {
                    Ok(shape) => {
                        let w = cache.weight(&shape, dp);
                        trees.insert(part, w.clone());
                        w
                    }
                    Err(err) => {
                        failure = Some(err);
                        return;
                    }
                },
            };
            prod *= w;
        }
        e[size] += prod;
    });
    match failure {
        Some(err) => Err(err),
        None => Ok(e),
    }
}

/// `e_0 .. e_K` of `h` by forest enumeration. The vector stops at
/// `min(K, n - #components)`, past which every coefficient vanishes.
pub fn small_e(h: &Graph, dp: &DeltaParams, order: usize) -> Result<CoeffVector> {
    Ok(CoeffVector {
        e: forest_sums(h, dp, order, &WeightCache::new())?,
    })
}

/// Sum of `w_T` over the spanning trees of a connected graph.
pub fn graph_weight(h: &Graph, dp: &DeltaParams) -> Result<BigRational> {
    let cache = WeightCache::new();
    let mut total = BigRational::zero();
    for t in enumerate_spanning_trees(h)? {
        total += cache.weight(&TreeShape::new(&t, h)?, dp);
    }
    Ok(total)
}

/// Sum over spanning forests of `h` with exactly `k` edges of `∏_T w_T`.
///
/// Zero unless `|V(H)| = k + #components` and no component is a single vertex.
pub fn lambda_coeff(h: &Graph, k: usize, dp: &DeltaParams) -> Result<BigRational> {
    let comps = h.components();
    if h.n() != k + comps.len() || comps.iter().any(|c| c.len() < 2) {
        return Ok(BigRational::zero());
    }
    let e = forest_sums(h, dp, k, &WeightCache::new())?;
    Ok(e.get(k).cloned().unwrap_or_else(BigRational::zero))
}

/// `a_1 .. a_K` from `k e_k = Σ_{j=1}^{k} j a_j e_{k-j}`.
pub fn newton_log(e: &CoeffVector, order: usize) -> Result<TaylorCoeffs> {
    if e.get(0) != BigRational::one() {
        return Err(Error::LeadingCoefficient(crate::poly::format_rational(&e.get(0))));
    }
    let mut a: Vec<BigRational> = Vec::with_capacity(order);
    for k in 1..=order {
        let mut acc = BigRational::from_integer(k.into()) * e.get(k);
        for j in 1..k {
            acc -= BigRational::from_integer(j.into()) * &a[j - 1] * e.get(k - j);
        }
        a.push(acc / BigRational::from_integer(k.into()));
    }
    Ok(TaylorCoeffs { a })
}

/// Inverse of [`newton_log`]: `e_0 .. e_K` of `exp(Σ a_k x^k)`.
pub fn exp_series(a: &TaylorCoeffs, order: usize) -> CoeffVector {
    let mut e = vec![BigRational::one()];
    for k in 1..=order {
        let mut acc = BigRational::zero();
        for j in 1..=k {
            acc += BigRational::from_integer(j.into()) * a.get(j) * &e[k - j];
        }
        e.push(acc / BigRational::from_integer(k.into()));
    }
    CoeffVector { e }
}

/// Connected induced subgraphs of `g` with 2 to `max_size` vertices, grouped
/// by isomorphism class, with a representative and an occurrence count.
#[derive(Clone, Debug)]
pub struct PatternCensus {
    pub classes: BTreeMap<IsoKey, (Graph, u64)>,
}

pub fn pattern_census(g: &Graph, max_size: usize) -> Result<PatternCensus> {
    let mut sets: Vec<Vec<usize>> = Vec::new();
    for_each_connected_set(g, max_size, |s| {
        if s.len() >= 2 {
            sets.push(s.to_vec());
        }
    });
    let keyed: Vec<(IsoKey, Graph)> = sets
        .par_iter()
        .map(|s| {
            let ind = g.induced_subgraph(&s.iter().copied().collect()).graph;
            canonical_form(&ind).map(|k| (k, ind))
        })
        .collect::<Result<_>>()?;
    let mut classes: BTreeMap<IsoKey, (Graph, u64)> = BTreeMap::new();
    for (key, graph) in keyed {
        classes.entry(key).or_insert((graph, 0)).1 += 1;
    }
    Ok(PatternCensus { classes })
}

/// `γ_{H,k}` for `k = 1..order` per connected pattern class.
#[derive(Clone, Debug, Default)]
pub struct GammaTable {
    pub order: usize,
    pub entries: BTreeMap<IsoKey, (Graph, Vec<BigRational>)>,
}

impl GammaTable {
    pub fn gamma(&self, key: &IsoKey, k: usize) -> Option<&BigRational> {
        self.entries.get(key).and_then(|(_, g)| g.get(k - 1))
    }
}

/// Coefficient engine for a fixed δ, caching unit tree volumes and pattern
/// coefficients across graphs.
pub struct CoeffEngine {
    dp: DeltaParams,
    weights: WeightCache,
    gammas: RwLock<HashMap<IsoKey, Vec<BigRational>>>,
}

impl CoeffEngine {
    pub fn new(dp: DeltaParams) -> Self {
        CoeffEngine {
            dp,
            weights: WeightCache::new(),
            gammas: RwLock::new(HashMap::new()),
        }
    }

    pub fn delta(&self) -> &DeltaParams {
        &self.dp
    }

    pub fn weights(&self) -> &WeightCache {
        &self.weights
    }

    pub fn small_e(&self, h: &Graph, order: usize) -> Result<CoeffVector> {
        Ok(CoeffVector {
            e: forest_sums(h, &self.dp, order, &self.weights)?,
        })
    }

    fn cached_gamma(&self, key: &IsoKey, order: usize) -> Option<Vec<BigRational>> {
        self.gammas
            .read()
            .unwrap()
            .get(key)
            .filter(|g| g.len() >= order)
            .map(|g| g[..order].to_vec())
    }

    /// Pattern coefficients up to `order` for a set of connected patterns
    /// closed under taking connected induced subgraphs.
    pub fn gamma_table(&self, patterns: &BTreeMap<IsoKey, Graph>, order: usize) -> Result<GammaTable> {
        let mut layers: BTreeMap<usize, Vec<(&IsoKey, &Graph)>> = BTreeMap::new();
        for (key, g) in patterns {
            if !g.is_connected() || g.n() < 2 {
                return Err(Error::Disconnected);
            }
            layers.entry(g.n()).or_default().push((key, g));
        }
        for layer in layers.values() {
            let fresh: Vec<(IsoKey, Vec<BigRational>)> = layer
                .par_iter()
                .filter(|(key, _)| self.cached_gamma(key, order).is_none())
                .map(|&(key, g)| self.pattern_gamma(g, order, patterns).map(|v| (key.clone(), v)))
                .collect::<Result<_>>()?;
            let mut store = self.gammas.write().unwrap();
            for (key, v) in fresh {
                store.insert(key, v);
            }
        }
        let entries = patterns
            .iter()
            .map(|(key, g)| {
                let v = self.cached_gamma(key, order).expect("computed above");
                (key.clone(), (g.clone(), v))
            })
            .collect();
        Ok(GammaTable { order, entries })
    }

    fn pattern_gamma(&self, h: &Graph, order: usize, patterns: &BTreeMap<IsoKey, Graph>) -> Result<Vec<BigRational>> {
        let mut gamma = newton_log(&self.small_e(h, order)?, order)?.a;
        let mut subs: Vec<Vec<usize>> = Vec::new();
        for_each_connected_set(h, h.n() - 1, |s| {
            if s.len() >= 2 {
                subs.push(s.to_vec());
            }
        });
        for s in subs {
            let sub = h.induced_subgraph(&s.into_iter().collect()).graph;
            let key = canonical_form(&sub)?;
            if !patterns.contains_key(&key) {
                return Err(Error::NotDownwardClosed);
            }
            let part = self.cached_gamma(&key, order).ok_or(Error::NotDownwardClosed)?;
            for (g, p) in gamma.iter_mut().zip(&part) {
                *g -= p;
            }
        }
        Ok(gamma)
    }

    /// `a_k(G) = Σ_{H, |V(H)| ≤ 2k} γ_{H,k} ind(H, G)` for `k = 1..order`.
    pub fn assemble_a(&self, g: &Graph, order: usize) -> Result<TaylorCoeffs> {
        if order == 0 || g.m() == 0 {
            return Ok(TaylorCoeffs::zeros(order));
        }
        let census = pattern_census(g, 2 * order)?;
        let patterns: BTreeMap<IsoKey, Graph> = census
            .classes
            .iter()
            .map(|(k, (h, _))| (k.clone(), h.clone()))
            .collect();
        let table = self.gamma_table(&patterns, order)?;
        let mut a = TaylorCoeffs::zeros(order);
        for (key, (_, count)) in &census.classes {
            let count = BigRational::from_integer((*count).into());
            for k in 1..=order {
                if key.vertex_count() <= 2 * k {
                    a.a[k - 1] += &count * table.gamma(key, k).expect("full order");
                }
            }
        }
        Ok(a)
    }
}

pub fn gamma_table(patterns: &BTreeMap<IsoKey, Graph>, dp: &DeltaParams, order: usize) -> Result<GammaTable> {
    CoeffEngine::new(dp.clone()).gamma_table(patterns, order)
}

pub fn assemble_a(g: &Graph, dp: &DeltaParams, order: usize) -> Result<TaylorCoeffs> {
    CoeffEngine::new(dp.clone()).assemble_a(g, order)
}
