//! Independent checks: Monte Carlo volume, exact forest sums for tiny graphs,
//! the interval partition of connected spanning subgraphs, and root location.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coeffs::{forest_sums, CoeffVector};
use crate::enumerate::{broken_edges, enumerate_spanning_trees, Dsu};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::weight::{DeltaParams, WeightCache};

/// Largest graphs accepted by the exhaustive forest oracles.
pub const EXACT_MAX_VERTICES: usize = 12;
pub const EXACT_MAX_EDGES: usize = 20;

const CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
    pub accepted: u64,
    pub seed: u64,
}

/// Hit-or-miss estimate over the box `[0, 1/2+δ]^n`.
///
/// Samples are drawn in fixed chunks, each from its own ChaCha stream, so the
/// result depends only on `seed` and `samples`, never on the thread count.
pub fn mc_volume(g: &Graph, dp: &DeltaParams, samples: u64, seed: u64) -> McEstimate {
    assert!(samples >= 1, "need at least one sample");
    let n = g.n();
    let side = dp.box_hi.to_f64().expect("finite");
    let box_volume = num_traits::pow(dp.box_hi.clone(), n).to_f64().expect("finite");
    let chunks = samples.div_ceil(CHUNK);
    let accepted: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let count = CHUNK.min(samples - c * CHUNK);
            let mut x = vec![0.0f64; n];
            let mut hits = 0u64;
            for _ in 0..count {
                for xi in x.iter_mut() {
                    *xi = rng.random::<f64>() * side;
                }
                if g.edges().iter().all(|&(u, v)| x[u] + x[v] <= 1.0) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let p = accepted as f64 / samples as f64;
    McEstimate {
        mean: p * box_volume,
        stderr: (p * (1.0 - p) / samples as f64).sqrt() * box_volume,
        samples,
        accepted,
        seed,
    }
}

fn guard(g: &Graph) -> Result<()> {
    if g.n() > EXACT_MAX_VERTICES || g.m() > EXACT_MAX_EDGES {
        return Err(Error::SizeGuard { n: g.n(), m: g.m() });
    }
    Ok(())
}

/// All coefficients of the forest polynomial, by exhaustive enumeration.
pub fn forest_polynomial(g: &Graph, dp: &DeltaParams) -> Result<CoeffVector> {
    forest_polynomial_cached(g, dp, &WeightCache::new())
}

/// As [`forest_polynomial`], reusing tree volumes across calls.
pub fn forest_polynomial_cached(g: &Graph, dp: &DeltaParams, cache: &WeightCache) -> Result<CoeffVector> {
    guard(g)?;
    Ok(CoeffVector {
        e: forest_sums(g, dp, g.n(), cache)?,
    })
}

/// `p(1)`: the sum over every forest of the product of its tree weights.
pub fn exact_p1(g: &Graph, dp: &DeltaParams) -> Result<BigRational> {
    Ok(forest_polynomial(g, dp)?.sum())
}

pub fn exact_volume(g: &Graph, dp: &DeltaParams) -> Result<BigRational> {
    Ok(num_traits::pow(dp.box_hi.clone(), g.n()) * exact_p1(g, dp)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PenroseReport {
    pub spanning_trees: usize,
    /// `2^{|E_T|}` per spanning tree, in enumeration order.
    pub interval_sizes: Vec<u64>,
    pub connected_spanning_subgraphs: u64,
    pub violations: Vec<String>,
}

impl PenroseReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.interval_sizes.iter().sum::<u64>() == self.connected_spanning_subgraphs
    }
}

fn spans_connected(h: &Graph, mask: u64) -> bool {
    let mut dsu = Dsu::new(h.n());
    let mut parts = h.n();
    for e in 0..h.m() {
        if mask >> e & 1 == 1 {
            let (u, v) = h.edge(e);
            if dsu.union(u, v) {
                parts -= 1;
            }
        }
    }
    parts <= 1
}

/// Minimum-rank spanning tree of the spanning subgraph `mask`.
fn min_rank_tree(h: &Graph, mask: u64) -> u64 {
    let mut dsu = Dsu::new(h.n());
    let mut tree = 0u64;
    for e in 0..h.m() {
        if mask >> e & 1 == 1 {
            let (u, v) = h.edge(e);
            if dsu.union(u, v) {
                tree |= 1 << e;
            }
        }
    }
    tree
}

/// Checks that the intervals `[T, T ∪ E_T]` over spanning trees `T` of `h`
/// partition its connected spanning subgraphs, and that each subgraph's
/// interval is the one of its minimum-rank spanning tree.
pub fn penrose_check(h: &Graph) -> Result<PenroseReport> {
    if !h.is_connected() {
        return Err(Error::Disconnected);
    }
    if h.m() > 24 {
        return Err(Error::TooManyEdges { m: h.m(), max: 24 });
    }
    let mask_of = |s: &crate::bitset::EdgeSet| s.iter().fold(0u64, |m, e| m | 1 << e);
    let mut report = PenroseReport::default();
    if h.n() <= 1 {
        // the empty tree is the only spanning tree
        report.spanning_trees = 1;
        report.interval_sizes.push(1);
        report.connected_spanning_subgraphs = 1;
        return Ok(report);
    }
    let mut intervals: Vec<(u64, u64)> = Vec::new();
    for t in enumerate_spanning_trees(h)? {
        let broken = broken_edges(h, &t)?;
        report.interval_sizes.push(1 << broken.len());
        intervals.push((mask_of(&t.edges), mask_of(&broken)));
    }
    report.spanning_trees = intervals.len();
    for mask in 0u64..1 << h.m() {
        let owners: Vec<usize> = intervals
            .iter()
            .enumerate()
            .filter(|(_, &(t, b))| mask & t == t && mask & !(t | b) == 0)
            .map(|(i, _)| i)
            .collect();
        if spans_connected(h, mask) {
            report.connected_spanning_subgraphs += 1;
            match owners.as_slice() {
                [i] => {
                    if intervals[*i].0 != min_rank_tree(h, mask) {
                        report
                            .violations
                            .push(format!("subgraph {mask:#b} is not in the interval of its minimum-rank tree"));
                    }
                }
                _ => report
                    .violations
                    .push(format!("subgraph {mask:#b} lies in {} intervals", owners.len())),
            }
        } else if !owners.is_empty() {
            report.violations.push(format!("disconnected subgraph {mask:#b} covered"));
        }
    }
    Ok(report)
}

/// Roots of `Σ c_k x^k` (coefficients in increasing degree) by Aberth
/// iteration on a rescaled polynomial, polished with Newton steps.
pub fn polynomial_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.last().is_some_and(|x| *x == 0.0) {
        c.pop();
    }
    let deg = c.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead_zeros = c.iter().take_while(|x| **x == 0.0).count();
    let mut roots = vec![Complex64::new(0.0, 0.0); lead_zeros];
    let c = &c[lead_zeros..];
    let deg = deg - lead_zeros;
    if deg == 0 {
        return roots;
    }
    // x = s·y balances the end coefficients
    let s = (c[0].abs() / c[deg].abs()).powf(1.0 / deg as f64);
    let scaled: Vec<f64> = c.iter().enumerate().map(|(k, v)| v * s.powi(k as i32)).collect();
    let eval = |z: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &a in scaled.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        (p, dp)
    };
    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (i as f64 + 0.25) / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let repulse: Complex64 = (0..deg).filter(|&j| j != i).map(|j| (z[i] - z[j]).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulse);
            z[i] -= step;
            moved = moved.max(step.norm() / z[i].norm().max(1e-300));
        }
        if moved < 1e-15 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = eval(*zi);
            if dp.norm() == 0.0 {
                break;
            }
            *zi -= p / dp;
        }
    }
    roots.extend(z.into_iter().map(|y| y * s));
    roots
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootReport {
    pub roots: Vec<Complex64>,
    pub radius: f64,
    pub min_modulus: Option<f64>,
    /// `min |root| / R - 1`.
    pub margin: Option<f64>,
    pub passed: bool,
}

/// Locates every root of the forest polynomial and compares with `radius`.
pub fn root_check(g: &Graph, dp: &DeltaParams, radius: f64) -> Result<RootReport> {
    Ok(check_roots(&forest_polynomial(g, dp)?, radius))
}

pub fn check_roots(poly: &CoeffVector, radius: f64) -> RootReport {
    let coeffs: Vec<f64> = poly
        .e
        .iter()
        .map(|c| if c.is_zero() { 0.0 } else { c.to_f64().expect("finite") })
        .collect();
    let roots = polynomial_roots(&coeffs);
    let min_modulus = roots.iter().map(|r| r.norm()).min_by(f64::total_cmp);
    RootReport {
        passed: min_modulus.is_none_or(|m| m > radius),
        margin: min_modulus.map(|m| m / radius - 1.0),
        min_modulus,
        radius,
        roots,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn dp(n: i64, d: i64) -> DeltaParams {
        DeltaParams::from_ratio(n, d).unwrap()
    }

    #[test]
    fn mc_trivial_cases() {
        let e = mc_volume(&Graph::empty(4), &dp(1, 10), 1000, 7);
        assert_eq!(e.mean, 0.6f64.powi(4));
        assert_eq!(e.stderr, 0.0);
        let z = mc_volume(&Graph::complete(5), &dp(0, 1), 1000, 7);
        assert_eq!(z.mean, 0.5f64.powi(5));
    }

    #[test]
    fn mc_edge_closed_form() {
        let e = mc_volume(&Graph::path(2), &dp(1, 4), 1_000_000, 42);
        assert!((e.mean - 0.4375).abs() <= 4.0 * e.stderr, "{e:?}");
    }

    #[test]
    fn mc_is_reproducible_across_pools() {
        let g = Graph::cycle(6);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_volume(&g, &dp(1, 10), 300_000, 9))
        };
        assert_eq!(run(1), run(4));
        assert_ne!(run(1), mc_volume(&g, &dp(1, 10), 300_000, 10));
    }

    #[test]
    fn exact_examples() {
        let d = dp(1, 4);
        assert_eq!(exact_p1(&Graph::path(2), &d).unwrap(), q(7, 9));
        assert_eq!(exact_volume(&Graph::path(2), &d).unwrap(), q(7, 16));
        assert_eq!(exact_p1(&Graph::empty(3), &d).unwrap(), q(1, 1));
        for d in [dp(1, 10), dp(1, 4), dp(1, 3)] {
            let x = &d.delta;
            let h = &d.box_hi;
            let expect = q(1, 1) - q(4, 1) * x * x / (h * h) + q(8, 3) * x * x * x / (h * h * h);
            assert_eq!(exact_p1(&Graph::path(3), &d).unwrap(), expect);
        }
        assert_eq!(
            exact_volume(&Graph::petersen(), &dp(0, 1)).unwrap(),
            num_traits::pow(q(1, 2), 10)
        );
        assert_eq!(
            exact_p1(&Graph::complete(13), &dp(1, 4)).unwrap_err(),
            Error::SizeGuard { n: 13, m: 78 }
        );
    }

    #[test]
    fn triangle_against_monte_carlo() {
        let d = dp(1, 4);
        let g = Graph::complete(3);
        let exact = exact_volume(&g, &d).unwrap().to_f64().unwrap();
        let mc = mc_volume(&g, &d, 1_000_000, 3);
        assert!((exact - mc.mean).abs() <= 4.0 * mc.stderr, "{exact} vs {mc:?}");
    }

    #[test]
    fn penrose_examples() {
        let tri = penrose_check(&Graph::complete(3)).unwrap();
        assert!(tri.holds());
        let mut sizes = tri.interval_sizes.clone();
        sizes.sort();
        assert_eq!(sizes, vec![1, 1, 2]);
        assert_eq!(tri.connected_spanning_subgraphs, 4);

        assert!(penrose_check(&Graph::empty(1)).unwrap().holds());
        let tree = penrose_check(&Graph::star(4)).unwrap();
        assert_eq!(tree.interval_sizes, vec![1]);
        assert!(tree.holds());

        let k4 = penrose_check(&Graph::complete(4)).unwrap();
        assert!(k4.holds());
        assert_eq!(k4.connected_spanning_subgraphs, 38);
        assert_eq!(k4.interval_sizes.iter().sum::<u64>(), 38);
    }

    #[test]
    fn roots_of_known_polynomials() {
        let r = root_check(&Graph::path(2), &dp(1, 4), 1.0).unwrap();
        assert_eq!(r.roots.len(), 1);
        assert!((r.roots[0] - Complex64::new(4.5, 0.0)).norm() < 1e-12);
        assert!(r.passed);
        let none = root_check(&Graph::empty(3), &dp(1, 4), 1.0).unwrap();
        assert!(none.roots.is_empty() && none.passed);

        // (x-1)(x-2)(x-3)(x^2+1)
        let c = [-6.0, 11.0, -12.0, 12.0, -6.0, 1.0];
        let roots = polynomial_roots(&c);
        assert_eq!(roots.len(), 5);
        let expect = [
            Complex64::new(0.0, -1.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
        ];
        for b in expect {
            assert!(roots.iter().any(|a| (a - b).norm() < 1e-9), "{roots:?}");
        }
    }

    #[test]
    fn cubic_graph_roots_outside_radius() {
        // cube graph Q3
        let g = Graph::new(8, (0..8).flat_map(|v| (0..3).map(move |b| (v, v ^ (1 << b)))).filter(|&(u, v)| u < v))
            .unwrap();
        let d = dp(1, 100);
        let cert = crate::interp::zero_free_radius(3, &d.delta).unwrap();
        let report = root_check(&g, &d, cert.radius_f64()).unwrap();
        assert!(report.passed, "{report:?}");
    }
}
