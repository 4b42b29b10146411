//! Quadrature and exact-arithmetic checks of the identities used to sum
//! distance weights over decorations.
//!
//! Each check pairs a direct evaluation (quadrature over angles or boundary
//! simplices, or a finite rational sum) with the closed form it should equal.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{i_kl, passage_increment, quad_e};
use crate::error::{invalid, Result};
use crate::real::Real;
use crate::quad::{integrate, integrate_nested, ChainGrid, Options, Point};
use crate::wp_poly::factorial;

/// `cot φ₁ cot φ₂ + cot φ₂ cot φ₃ + cot φ₃ cot φ₁` with `φ₃ = π − φ₁ − φ₂`,
/// evaluated in extended precision since the terms grow like `1/φ²`.
pub fn cotangent_sum(phi1: f64, phi2: f64) -> f64 {
    let a = Real::from_f64(phi1);
    let b = Real::from_f64(phi2);
    let c = Real::pi() - &a - &b;
    let cot = |x: &Real| x.cos() / x.sin();
    let (c1, c2, c3) = (cot(&a), cot(&b), cot(&c));
    (&c1 * &c2 + &c2 * &c3 + &c3 * &c1).to_f64()
}

fn big_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn frac(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// Left side of the passage summation identity, for `p ≥ 1`, `k ≥ 2`.
pub fn hypident_lhs(p: u64, k: u64) -> BigRational {
    let mut s = BigRational::zero();
    for l in 2..=k {
        for m in 0..=2 * p - 2 {
            let a = frac(binomial(big(l + m - 2), big(m)), factorial(k + m - 1));
            let b = frac(binomial(big(l + 2 * p - m - 4), big(2 * p - m - 2)), factorial(k + 2 * p - m - 3));
            let t = a * b;
            if m % 2 == 0 {
                s += t;
            } else {
                s -= t;
            }
        }
    }
    s
}

/// `2 p! / ((2p)! (k−2)! (p+k−2)!)`.
pub fn hypident_rhs(p: u64, k: u64) -> BigRational {
    frac(big(2) * factorial(p), factorial(2 * p) * factorial(k - 2) * factorial(p + k - 2))
}

fn check_pairs(pairs: &[(f64, f64)]) -> Result<()> {
    let mut last = 0.0;
    for &(a, b) in pairs {
        if !(a >= last && b >= a && b <= PI) {
            return invalid("pairs must satisfy 0 <= a1 <= b1 <= a2 <= ... <= pi");
        }
        last = b;
    }
    Ok(())
}

/// `(1/π) ∫_0^π Π_i (sin(α_i − γ)/sin(β_i − γ))^{2u} 1{γ ∉ [α_i, β_i]} dγ`,
/// integrated piecewise between the intervals.
pub fn sine_ratio_average(pairs: &[(f64, f64)], u: f64, opts: Options) -> Result<f64> {
    check_pairs(pairs)?;
    let mut gaps = Vec::new();
    let mut lo = 0.0;
    for (i, &(a, b)) in pairs.iter().enumerate() {
        gaps.push((lo, a, i));
        lo = b;
    }
    gaps.push((lo, PI, pairs.len()));
    let mut total = 0.0;
    for (a, b, right) in gaps {
        // pairs[..right] lie left of the gap, pairs[right..] to its right
        let f = |p: Point| {
            let g = a + p.from_lo;
            let mut log = 0.0;
            for (i, &(al, be)) in pairs.iter().enumerate() {
                let (num, den) = if i < right {
                    let den = if i + 1 == right { p.from_lo } else { g - be };
                    (g - al, den)
                } else {
                    let num = if i == right { p.to_hi } else { al - g };
                    (num, be - g)
                };
                log += (num.sin() / den.sin()).ln();
            }
            (2.0 * u * log).exp()
        };
        total += integrate(f, a, b, opts)?;
    }
    Ok(total / PI)
}

/// `sin(2u[π − Σ(β_i − α_i)]) / sin(2πu)`.
pub fn sine_ratio_average_closed(pairs: &[(f64, f64)], u: f64) -> f64 {
    let rest = PI - pairs.iter().map(|(a, b)| b - a).sum::<f64>();
    if u == 0.0 {
        rest / PI
    } else {
        (2.0 * u * rest).sin() / (2.0 * PI * u).sin()
    }
}

fn sin_on_0_pi(p: Point) -> f64 {
    p.from_lo.min(p.to_hi).sin()
}

/// `∫ dA Π_i (sin α_i / sin β_i)^{2u} (β_i − α_i)^{powers_i}` over
/// `0 < α_1 < β_1 < ⋯ < α_p < β_p < π`, by binomial expansion of each
/// `(β_i − α_i)^n` into separable ordered chains.
pub fn sine_chain(grid: &ChainGrid, u: f64, powers: &[u32]) -> f64 {
    let mut total = 0.0;
    let mut split = vec![0u32; powers.len()];
    loop {
        // split[i] = power carried by β_i
        let mut coeff = 1.0;
        for (&n, &a) in powers.iter().zip(&split) {
            coeff *= binomial(n as u64, a as u64) as f64;
            if (n - a) % 2 == 1 {
                coeff = -coeff;
            }
        }
        let fns: Vec<Box<dyn Fn(Point) -> f64>> = powers
            .iter()
            .zip(&split)
            .flat_map(|(&n, &a)| {
                let alpha: Box<dyn Fn(Point) -> f64> =
                    Box::new(move |p: Point| sin_on_0_pi(p).powf(2.0 * u) * p.x.powi((n - a) as i32));
                let beta: Box<dyn Fn(Point) -> f64> =
                    Box::new(move |p: Point| sin_on_0_pi(p).powf(-2.0 * u) * p.x.powi(a as i32));
                [alpha, beta]
            })
            .collect();
        let refs: Vec<&dyn Fn(Point) -> f64> = fns.iter().map(|f| f.as_ref()).collect();
        total += coeff * grid.chain(&refs);
        let mut i = 0;
        while i < split.len() {
            split[i] += 1;
            if split[i] <= powers[i] {
                break;
            }
            split[i] = 0;
            i += 1;
        }
        if i == split.len() {
            return total;
        }
    }
}

fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        x.sin() / x
    }
}

/// `Z_p[θ]` on the simplex side: `∫_0^π sinc(2uθ₀)/sinc(2πu) θ₀^p/p! (π−θ₀)^{2p−1}/(2p−1)! dθ₀`.
pub fn theta_chain_closed(p: u32, u: f64, opts: Options) -> Result<f64> {
    if p == 0 {
        return Ok(1.0);
    }
    let fp = big_f64(&factorial(p as u64));
    let f2p = big_f64(&factorial(2 * p as u64 - 1));
    let s = sinc(2.0 * PI * u);
    integrate(
        |q| sinc(2.0 * u * q.x) / s * q.x.powi(p as i32) / fp * q.to_hi.powi(2 * p as i32 - 1) / f2p,
        0.0,
        PI,
        opts,
    )
}

/// `Z_p[θ]` by direct quadrature over the ordered angles.
pub fn theta_chain_quadrature(grid: &ChainGrid, p: u32, u: f64) -> f64 {
    sine_chain(grid, u, &vec![1; p as usize])
}

/// `(−1)^k 2^k / (k! (k+1)!)`, so that `F(r, θ) = Σ_k c_k θ^{2k} r^{k+1}`.
fn f_coefficient(k: u32) -> f64 {
    let den = factorial(k as u64) * factorial(k as u64 + 1);
    let v = 2f64.powi(k as i32) / big_f64(&den);
    if k % 2 == 1 {
        -v
    } else {
        v
    }
}

fn compositions(total: u32, parts: usize, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if cur.len() + 1 == parts {
        cur.push(total);
        out.push(cur.clone());
        cur.pop();
        return;
    }
    for x in 0..=total {
        cur.push(x);
        compositions(total - x, parts, out, cur);
        cur.pop();
    }
}

/// `[r^K]` of `−Σ_p ∫ dA Π_i (−4F(r, β_i−α_i)(sin α_i/sin β_i)^{2u})` for
/// `K = 0..=kmax`; only `p ≤ K` contributes at order `K`.
pub fn inner_vertex_quadrature(grid: &ChainGrid, u: f64, kmax: u32) -> Vec<f64> {
    let mut out = vec![0.0];
    for order in 1..=kmax {
        let mut total = 0.0;
        for p in 1..=order as usize {
            let mut comps = Vec::new();
            compositions(order - p as u32, p, &mut comps, &mut Vec::new());
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            for ks in comps {
                let c: f64 = ks.iter().map(|&k| f_coefficient(k)).product();
                let powers: Vec<u32> = ks.iter().map(|&k| 2 * k).collect();
                total -= sign * 4f64.powi(p as i32) * c * sine_chain(grid, u, &powers);
            }
        }
        out.push(total);
    }
    out
}

/// `[r^K]` of `1 − (2πu/sin 2πu) Σ_p u^{2p}/(2p+1)!! ∂_r^{p+1} G(r)` with
/// `G(r) = Σ_k (−1)^k 2^k π^{2k} r^{k+1} / (k!(k+1)!)`.
pub fn inner_vertex_series(u: f64, kmax: u32) -> Vec<f64> {
    let refl = if u == 0.0 { 1.0 } else { 2.0 * PI * u / (2.0 * PI * u).sin() };
    (0..=kmax)
        .map(|order| {
            // term_p = u^{2p}/(2p+1)!! · (−2π²)^{K+p} / (K+p)! / K!
            let k0 = order as i32;
            let mut term = (-2.0 * PI * PI).powi(k0) / (1..=order).map(|x| x as f64).product::<f64>().powi(2);
            let mut sum = term;
            for p in 0..400 {
                term *= u * u / (2 * p + 3) as f64 * (-2.0 * PI * PI) / (order + p + 1) as f64;
                sum += term;
                if term.abs() < 1e-18 * sum.abs() {
                    break;
                }
            }
            let delta = if order == 0 { 1.0 } else { 0.0 };
            delta - refl * sum
        })
        .collect()
}

/// Options for simplex integrals whose integrand has `x^{−2u}` endpoint
/// singularities.
pub fn singular_options() -> Options {
    Options { abs_tol: 1e-12, rel_tol: 1e-12, max_depth: 48, grades: 40 }
}

/// `2^{k−1} ∫∫ e^{2u(d_1 − d_exit)}` over two copies of the simplex
/// `{x_1..x_k > 0, Σx = L/2}`, with the distance change taken from
/// [`passage_increment`]; `exit` is the 1-based ccw position of the exit edge
/// with the entrance at position 1. For `k = 2` the integral is computed as
/// one 2-dimensional iterated integral over `(v_1, w_1)`; for larger `k` the
/// `v` and `w` factors are integrated separately.
pub fn passage_quadrature(k: usize, exit: usize, length: f64, u: f64, opts: Options) -> Result<f64> {
    if k < 2 || exit < 2 || exit > k {
        return invalid(format!("need 2 <= exit <= k, got k = {k}, exit = {exit}"));
    }
    let s = 0.5 * length;
    let e = exit - 1;
    let scale = 2f64.powi(k as i32 - 1);
    if k == 2 {
        let bounds = |_: usize, _: &[Point]| (0.0, s);
        let f = |p: &[Point]| {
            let (v1, w1, w2) = (p[0].from_lo, p[1].from_lo, p[1].to_hi);
            let v2 = p[0].to_hi;
            (-2.0 * u * passage_increment(&[w1, w2], &[v1, v2], 0, e)).exp()
        };
        return Ok(scale * integrate_nested(2, &bounds, &f, opts)?);
    }
    let dim = k - 1;
    let bounds = |_: usize, prefix: &[Point]| (0.0, s - prefix.iter().map(|q| q.from_lo).sum::<f64>());
    let coords = |p: &[Point]| {
        let mut x: Vec<f64> = p.iter().map(|q| q.from_lo).collect();
        x.push(p[dim - 1].to_hi);
        x
    };
    let zeros = vec![0.0; k];
    let fv = |p: &[Point]| {
        let v = coords(p);
        (-2.0 * u * v[..e].iter().sum::<f64>()).exp()
    };
    let fw = |p: &[Point]| {
        let w = coords(p);
        (-2.0 * u * passage_increment(&w, &zeros, 0, e)).exp()
    };
    let iv = integrate_nested(dim, &bounds, &fv, opts)?;
    let iw = integrate_nested(dim, &bounds, &fw, opts)?;
    Ok(scale * iv * iw)
}

/// Maximum relative deviation between [`quad_e`] and [`passage_quadrature`]
/// over `(k, ℓ)` with the exit at ccw position `k + 2 − ℓ`.
pub fn quad_e_deviation(k: usize, length: f64, u: f64, opts: Options) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for l in 2..=k {
        let closed = quad_e(k, l, length, u)?;
        let direct = passage_quadrature(k, k + 2 - l, length, u, opts)?;
        worst = worst.max(((closed - direct) / closed).abs());
    }
    Ok(worst)
}

/// `Σ_ℓ u² I_{k,ℓ}(−u) I_{k,ℓ}(u)` against
/// `4^{1−k} L^{2k−4} Σ_p (uL)^{2p} · 2p!/((2p)!(k−2)!(k+p−2)!)`.
pub fn passage_sum_deviation(k: usize, length: f64, u: f64) -> Result<f64> {
    let mut lhs = 0.0;
    for l in 2..=k {
        lhs += u * u * i_kl(k, l, -u, length)? * i_kl(k, l, u, length)?;
    }
    let mut rhs = 0.0;
    for p in 1..=60u64 {
        let c = hypident_rhs(p, k as u64);
        let cf = c.to_f64().unwrap_or(0.0);
        rhs += (u * length).powi(2 * p as i32) * cf;
    }
    rhs *= 4f64.powi(1 - k as i32) * length.powi(2 * k as i32 - 4);
    Ok(((lhs - rhs) / rhs).abs())
}

/// True iff the identity holds exactly for every `1 ≤ p ≤ pmax`, `2 ≤ k ≤ kmax`.
pub fn hypident_holds(pmax: u64, kmax: u64) -> bool {
    (1..=pmax).all(|p| (2..=kmax).all(|k| hypident_lhs(p, k) == hypident_rhs(p, k)))
}
