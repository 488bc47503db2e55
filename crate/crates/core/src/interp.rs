//! Zero-free radius, truncation order and the certified volume estimate.
//!
//! If every root of `p` (degree at most `n - 1`, `p(0) = 1`) has modulus at
//! least `R > 1`, then `|a_k| ≤ (n-1) R^{-k} / k`, so cutting `log p(1)` after
//! `K` terms errs by at most `T = (n-1) Σ_{k>K} R^{-k}/k`. Choosing `K` with
//! `T ≤ ln(1+ε)` gives `(1-ε)ξ ≤ Vol ≤ (1+ε)ξ`.

use std::f64::consts::{E, LN_10};
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::coeffs::{CoeffEngine, TaylorCoeffs};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::poly::format_rational;
use crate::weight::DeltaParams;

const E_DIGITS: &str = "71828182845904523536028747135266249775724709369995";

/// Relative shrink applied to the supremum radius so the witness inequality is strict.
const SAFETY: f64 = 1.0 - 1.0 / 1_048_576.0;

/// Slack reserved in the tail budget for floating-point error in the final exp.
const ROUNDING_SLACK: f64 = 1e-9;

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `e` truncated to `digits` decimals, strictly below `e`.
fn e_truncated(digits: usize) -> BigRational {
    let frac = &E_DIGITS[..digits];
    let numer: BigInt = format!("2{frac}").parse().expect("digits");
    BigRational::new(numer, num_traits::pow(BigInt::from(10), digits))
}

/// Lower bound on `ln x` for rational `x > 1`: a partial sum of
/// `2 Σ z^{2j+1}/(2j+1)` with `z = (x-1)/(x+1)`, all of whose terms are positive.
pub fn ln_lower(x: &BigRational, terms: usize) -> BigRational {
    assert!(*x > BigRational::one(), "ln_lower needs x > 1");
    let z = (x - BigRational::one()) / (x + BigRational::one());
    let z2 = &z * &z;
    let mut term = z;
    let mut sum = BigRational::zero();
    for j in 0..terms {
        sum += &term / BigRational::from_integer((2 * j + 1).into());
        term *= &z2;
    }
    sum * BigRational::from_integer(2.into())
}

/// Upper bound matching [`ln_lower`]: the omitted tail is at most a geometric series.
pub fn ln_upper(x: &BigRational, terms: usize) -> BigRational {
    let z = (x - BigRational::one()) / (x + BigRational::one());
    let z2 = &z * &z;
    let next = num_traits::pow(z, 2 * terms + 1);
    let tail = next / (BigRational::from_integer((2 * terms + 1).into()) * (BigRational::one() - z2));
    ln_lower(x, terms) + tail * BigRational::from_integer(2.into())
}

/// Natural log of a positive rational, accurate for values far outside the f64 range.
pub fn ln_rational(x: &BigRational) -> f64 {
    assert!(x.is_positive(), "ln of a non-positive value");
    ln_bigint(x.numer()) - ln_bigint(x.denom())
}

fn ln_bigint(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite").ln();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().expect("finite").ln() + shift as f64 * std::f64::consts::LN_2
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        if x.is_zero() {
            0.0
        } else {
            let mag = ln_rational(&x.abs()).exp();
            if x.is_negative() {
                -mag
            } else {
                mag
            }
        }
    })
}

/// Proof object for the disk `|x| ≤ R` being free of zeros of `p`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusCertificate {
    pub delta: BigRational,
    pub max_degree: usize,
    /// `a ∈ (1, e)` with `4 δ R ≤ ln(a)(1 - 1/Δ) / (a Δ)`, verified exactly.
    pub witness: BigRational,
    pub radius: BigRational,
    pub valid: bool,
}

impl RadiusCertificate {
    pub fn radius_f64(&self) -> f64 {
        to_f64(&self.radius)
    }

    /// Re-checks the witness inequality with a rational lower bound on `ln a`.
    pub fn verify(&self) -> bool {
        let d = BigRational::from_integer(self.max_degree.into());
        let lhs = q(4, 1) * &self.delta * &self.radius * &self.witness * &d;
        let rhs = ln_lower(&self.witness, 40) * (BigRational::one() - d.recip());
        self.witness > BigRational::one() && lhs <= rhs && self.valid == (self.radius > BigRational::one())
    }
}

/// Largest δ for which the certified radius exceeds 1 at maximum degree `Δ`.
pub fn max_admissible_delta(max_degree: usize) -> f64 {
    let d = max_degree as f64;
    (1.0 - 1.0 / d) / (4.0 * E * d) * SAFETY
}

/// Certificate without the `R > 1` requirement; `valid` records whether it holds.
pub fn radius_certificate(max_degree: usize, delta: &BigRational) -> Result<RadiusCertificate> {
    if max_degree < 2 {
        return Err(Error::DegreeTooSmall(max_degree));
    }
    if !delta.is_positive() || *delta >= q(1, 2) {
        return Err(Error::InvalidDelta(format_rational(delta)));
    }
    let d = BigRational::from_integer(max_degree.into());
    let factor = BigRational::one() - d.recip();
    let df = max_degree as f64;
    let mut rf = (1.0 - 1.0 / df) / (4.0 * E * df * to_f64(delta)) * SAFETY;
    loop {
        let radius = BigRational::from_float(rf).expect("finite radius");
        for digits in (1..=12).rev() {
            let a = e_truncated(digits);
            let lhs = q(4, 1) * delta * &radius * &a * &d;
            if lhs <= ln_lower(&a, 40) * &factor {
                return Ok(RadiusCertificate {
                    delta: delta.clone(),
                    max_degree,
                    valid: radius > BigRational::one(),
                    witness: a,
                    radius,
                });
            }
        }
        rf *= SAFETY;
    }
}

/// Zero-free radius `R = (1-1/Δ)/(4eΔδ)` shrunk by a safety factor; fails
/// unless `R > 1`.
pub fn zero_free_radius(max_degree: usize, delta: &BigRational) -> Result<RadiusCertificate> {
    let cert = radius_certificate(max_degree, delta)?;
    if !cert.valid {
        return Err(Error::DeltaTooLarge {
            delta: format_rational(delta),
            max_degree,
            radius: cert.radius_f64(),
            max_delta: max_admissible_delta(max_degree),
        });
    }
    Ok(cert)
}

/// Upper bound on `Σ_{k>K} R^{-k}/k`: exact partial sum plus a geometric remainder.
fn tail_upper(order: usize, r: &BigRational) -> BigRational {
    const EXTRA: usize = 24;
    let inv = r.recip();
    let mut pow = num_traits::pow(inv.clone(), order + 1);
    let mut sum = BigRational::zero();
    for k in order + 1..=order + EXTRA {
        sum += &pow / BigRational::from_integer(k.into());
        pow *= &inv;
    }
    let last = order + EXTRA + 1;
    sum + pow / (BigRational::from_integer(last.into()) * (BigRational::one() - inv))
}

/// Budget `ln(1+ε)` less rounding slack, as a rational lower bound.
fn tail_budget(eps: &BigRational) -> BigRational {
    ln_lower(&(BigRational::one() + eps), 60) - BigRational::from_float(ROUNDING_SLACK).expect("finite")
}

/// Smallest `K ≥ 1` whose certified tail fits the budget, with that tail.
pub fn truncation_bound(n: usize, eps: &BigRational, radius: &BigRational) -> (usize, BigRational) {
    assert!(*radius > BigRational::one(), "radius must exceed 1");
    if n <= 1 {
        return (1, BigRational::zero());
    }
    // round R down onto a coarse grid to keep the rationals small
    let scale = BigRational::from_integer(BigInt::one() << 32);
    let coarse = (radius * &scale).floor() / &scale;
    let r = if coarse > BigRational::one() { coarse } else { radius.clone() };
    let budget = tail_budget(eps);
    let weight = BigRational::from_integer((n - 1).into());
    let mut order = 1;
    loop {
        let tail = &weight * tail_upper(order, &r);
        if tail <= budget {
            return (order, tail);
        }
        order += 1;
    }
}

pub fn truncation_order(n: usize, eps: &BigRational, radius: &BigRational) -> usize {
    truncation_bound(n, eps, radius).0
}

#[derive(Clone, Debug)]
pub struct VolumeOptions {
    pub eps: BigRational,
    /// Maximum degree the certificate is issued for; must bound the actual degree.
    pub degree_cap: Option<usize>,
}

impl VolumeOptions {
    pub fn new(eps: BigRational) -> Self {
        VolumeOptions { eps, degree_cap: None }
    }
}

/// The certified estimate. Values are reported both as logs and as decimal
/// strings in scientific notation since volumes underflow f64 for large `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationResult {
    pub xi: String,
    pub lower: String,
    pub upper: String,
    pub ln_xi: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
    /// Set when the volume was computed in closed form.
    pub exact: Option<BigRational>,
    pub n: usize,
    pub m: usize,
    pub max_degree: usize,
    pub delta: BigRational,
    pub eps: BigRational,
    pub certificate: Option<RadiusCertificate>,
    pub order: usize,
    pub tail_bound: f64,
    pub a: TaylorCoeffs,
    pub wall_ms: f64,
}

/// `n ln(1/2+δ) + Σ a_k` in f64, with a bound on its rounding error.
pub fn ln_xi_from_coeffs(n: usize, dp: &DeltaParams, a: &TaylorCoeffs) -> (f64, f64) {
    let base = n as f64 * ln_rational(&dp.box_hi);
    let series = to_f64(&a.sum());
    let ln_xi = base + series;
    let err = 1e-13 * (1.0 + base.abs() + series.abs());
    (ln_xi, err)
}

/// Decimal rendering of `exp(ln)` with 15 significant digits.
pub fn format_exp(ln: f64) -> String {
    let log10 = ln / LN_10;
    let mut exp = log10.floor();
    let mut mant = 10f64.powf(log10 - exp);
    if mant >= 9.999_999_999_999_95 {
        mant /= 10.0;
        exp += 1.0;
    }
    format!("{mant:.14}e{}", exp as i64)
}

/// Decimal rendering of a positive rational with `digits` significant digits (truncated).
pub fn format_rational_sci(x: &BigRational, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    let ten = BigRational::from_integer(10.into());
    let mut exp = (ln_rational(&x.abs()) / LN_10).floor() as i64;
    let scaled = |e: i64| -> BigRational {
        let shift = digits as i64 - 1 - e;
        if shift >= 0 {
            x.abs() * num_traits::pow(ten.clone(), shift as usize)
        } else {
            x.abs() / num_traits::pow(ten.clone(), (-shift) as usize)
        }
    };
    let bound = num_traits::pow(BigInt::from(10), digits);
    let mut m = scaled(exp).floor().to_integer();
    if m >= bound {
        exp += 1;
        m = scaled(exp).floor().to_integer();
    } else if m < num_traits::pow(BigInt::from(10), digits - 1) {
        exp -= 1;
        m = scaled(exp).floor().to_integer();
    }
    let s = m.to_string();
    let sign = if x.is_negative() { "-" } else { "" };
    format!("{sign}{}.{}e{exp}", &s[..1], &s[1..])
}

/// Closed form for graphs whose components are single vertices and edges,
/// and for δ = 0 where every weight vanishes.
fn matching_volume(n: usize, m: usize, dp: &DeltaParams) -> BigRational {
    if dp.delta.is_zero() {
        return num_traits::pow(dp.box_hi.clone(), n);
    }
    let two = q(2, 1);
    let edge_block = &dp.box_hi * &dp.box_hi - &two * &dp.delta * &dp.delta;
    num_traits::pow(dp.box_hi.clone(), n - 2 * m) * num_traits::pow(edge_block, m)
}

pub fn approximate_volume(g: &Graph, delta: &BigRational, eps: &BigRational) -> Result<InterpolationResult> {
    let engine = CoeffEngine::new(DeltaParams::new(delta.clone())?);
    approximate_volume_with(&engine, g, &VolumeOptions::new(eps.clone()))
}

/// Certificate, truncation order and tail bound the series path would use;
/// `None` when the volume has a closed form (δ = 0 or maximum degree ≤ 1).
pub fn plan(g: &Graph, dp: &DeltaParams, opts: &VolumeOptions) -> Result<Option<(RadiusCertificate, usize, BigRational)>> {
    let eps = &opts.eps;
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(Error::InvalidEps(format_rational(eps)));
    }
    let max_degree = g.max_degree();
    if let Some(cap) = opts.degree_cap {
        if max_degree > cap {
            return Err(Error::DegreeCap { actual: max_degree, cap });
        }
    }
    if dp.delta.is_zero() || max_degree <= 1 {
        return Ok(None);
    }
    let cert = zero_free_radius(opts.degree_cap.unwrap_or(max_degree), &dp.delta)?;
    let (order, tail) = truncation_bound(g.n(), eps, &cert.radius);
    Ok(Some((cert, order, tail)))
}

pub fn approximate_volume_with(engine: &CoeffEngine, g: &Graph, opts: &VolumeOptions) -> Result<InterpolationResult> {
    let start = Instant::now();
    let dp = engine.delta();
    let (n, m, max_degree) = (g.n(), g.m(), g.max_degree());
    let elapsed = |start: Instant| start.elapsed().as_secs_f64() * 1e3;

    let Some((cert, order, tail)) = plan(g, dp, opts)? else {
        let vol = matching_volume(n, m, dp);
        let ln = ln_rational(&vol);
        let text = format_rational_sci(&vol, 20);
        return Ok(InterpolationResult {
            xi: text.clone(),
            lower: text.clone(),
            upper: text,
            ln_xi: ln,
            ln_lower: ln,
            ln_upper: ln,
            exact: Some(vol),
            n,
            m,
            max_degree,
            delta: dp.delta.clone(),
            eps: opts.eps.clone(),
            certificate: None,
            order: 0,
            tail_bound: 0.0,
            a: TaylorCoeffs::zeros(0),
            wall_ms: elapsed(start),
        });
    };
    let a = engine.assemble_a(g, order)?;
    let (ln_xi, err) = ln_xi_from_coeffs(n, dp, &a);
    let tail_bound = to_f64(&tail).next_up();
    let ln_lower = ln_xi - tail_bound - err;
    let ln_upper = ln_xi + tail_bound + err;
    Ok(InterpolationResult {
        xi: format_exp(ln_xi),
        lower: format_exp(ln_lower),
        upper: format_exp(ln_upper),
        ln_xi,
        ln_lower,
        ln_upper,
        exact: None,
        n,
        m,
        max_degree,
        delta: dp.delta.clone(),
        eps: opts.eps.clone(),
        certificate: Some(cert),
        order,
        tail_bound,
        a,
        wall_ms: elapsed(start),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_bounds_bracket() {
        for (n, d) in [(11, 10), (2, 1), (27, 10), (101, 100)] {
            let x = q(n, d);
            let truth = (n as f64 / d as f64).ln();
            assert!(to_f64(&ln_lower(&x, 30)) <= truth + 1e-15);
            assert!(to_f64(&ln_upper(&x, 30)) >= truth - 1e-15);
            assert!(ln_lower(&x, 30) <= ln_upper(&x, 30));
        }
        assert!(e_truncated(12) < q(2718281828460, 1_000_000_000_000));
        assert!(e_truncated(12) > q(2718281828458, 1_000_000_000_000));
    }

    #[test]
    fn radius_examples() {
        let c = zero_free_radius(3, &q(1, 100)).unwrap();
        assert!((c.radius_f64() - 2.0438).abs() < 1e-3, "{}", c.radius_f64());
        assert!(c.verify());
        let c = zero_free_radius(2, &q(1, 1000)).unwrap();
        assert!((c.radius_f64() - 22.99).abs() < 0.01);
        assert!(c.verify());
        match zero_free_radius(3, &q(1, 10)) {
            Err(Error::DeltaTooLarge { radius, max_delta, .. }) => {
                assert!((radius - 0.2044).abs() < 1e-3);
                assert!((max_delta - 0.02044).abs() < 1e-4);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(zero_free_radius(1, &q(1, 100)), Err(Error::DegreeTooSmall(1)));
    }

    #[test]
    fn truncation_examples() {
        let radius = |x: f64| BigRational::from_float(x).unwrap();
        // minimal orders for the stated postcondition, checked against a float tail
        for (n, eps, r) in [(100usize, q(1, 100), 20.4), (64, q(1, 10), 2.3), (200, q(1, 100), 22.99)] {
            let k = truncation_order(n, &eps, &radius(r));
            let tail = |k: usize| (n - 1) as f64 * (k + 1..2000).map(|j| r.powi(-(j as i32)) / j as f64).sum::<f64>();
            let budget = (1.0 + to_f64(&eps)).ln();
            assert!(tail(k) <= budget);
            assert!(k == 1 || tail(k - 1) > budget);
        }
        assert_eq!(truncation_order(100, &q(1, 100), &radius(20.4)), 2);
        assert_eq!(truncation_order(64, &q(1, 10), &radius(2.3)), 6);
        assert_eq!(truncation_order(10, &q(99, 100), &radius(1e6)), 1);
    }

    #[test]
    fn truncation_is_monotone() {
        let mut last = usize::MAX;
        for r in [1.5, 2.0, 3.0, 5.0, 10.0, 50.0] {
            let k = truncation_order(50, &q(1, 20), &BigRational::from_float(r).unwrap());
            assert!(k <= last);
            last = k;
        }
        let r = BigRational::from_float(2.5).unwrap();
        let ks: Vec<usize> = [5, 50, 500, 5000].iter().map(|&n| truncation_order(n, &q(1, 20), &r)).collect();
        assert!(ks.windows(2).all(|w| w[0] <= w[1]));
        let ks: Vec<usize> = [2, 10, 100, 1000].iter().map(|&d| truncation_order(50, &q(1, d), &r)).collect();
        assert!(ks.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn closed_form_shortcuts() {
        let res = approximate_volume(&Graph::empty(5), &q(1, 10), &q(1, 100)).unwrap();
        assert_eq!(res.exact, Some(num_traits::pow(q(3, 5), 5)));
        let res = approximate_volume(&Graph::petersen(), &q(0, 1), &q(1, 100)).unwrap();
        assert_eq!(res.exact, Some(num_traits::pow(q(1, 2), 10)));
        assert_eq!(res.xi, "9.7656250000000000000e-4");
        let k2 = approximate_volume(&Graph::path(2), &q(1, 4), &q(1, 100)).unwrap();
        assert_eq!(k2.exact, Some(q(7, 16)));
    }

    #[test]
    fn degree_cap_is_enforced() {
        let engine = CoeffEngine::new(DeltaParams::from_ratio(1, 100).unwrap());
        let opts = VolumeOptions { eps: q(1, 100), degree_cap: Some(2) };
        assert_eq!(
            approximate_volume_with(&engine, &Graph::star(3), &opts).unwrap_err(),
            Error::DegreeCap { actual: 3, cap: 2 }
        );
        let opts = VolumeOptions { eps: q(1, 100), degree_cap: Some(4) };
        let res = approximate_volume_with(&engine, &Graph::path(4), &opts).unwrap();
        assert_eq!(res.certificate.unwrap().max_degree, 4);
    }

    #[test]
    fn path_of_three_within_eps() {
        let d = q(1, 100);
        let h = q(1, 2) + &d;
        let exact = num_traits::pow(h.clone(), 3) - q(4, 1) * &d * &d * &h + q(8, 3) * num_traits::pow(d.clone(), 3);
        let res = approximate_volume(&Graph::path(3), &d, &q(1, 100)).unwrap();
        let ln_exact = ln_rational(&exact);
        assert!((res.ln_xi - ln_exact).abs() <= (1.01f64).ln());
        assert!(res.ln_lower <= ln_exact && ln_exact <= res.ln_upper);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_rational_sci(&q(7, 16), 5), "4.3750e-1");
        assert_eq!(format_rational_sci(&q(1000, 1), 3), "1.00e3");
        assert_eq!(format_rational_sci(&q(-1, 3), 4), "-3.333e-1");
        assert_eq!(format_exp(0.0), "1.00000000000000e0");
        assert_eq!(format_exp(1000f64.ln()), "1.00000000000000e3");
    }
}
