//! Gauss–Legendre quadrature with adaptive bisection.
//!
//! Integrands receive the abscissa together with its distances to both ends
//! of the outer interval, so that factors such as `sin α` or `log x` can be
//! evaluated without cancellation next to an endpoint.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; order];
    let mut w = vec![0.0; order];
    let m = order.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..order {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = order as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[order - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[order - 1 - i] = w[i];
    }
    (x, w)
}

const ORDER: usize = 20;

fn rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(ORDER))
}

/// Point passed to integrands: abscissa `x` with `x - a` and `b - x`.
#[derive(Clone, Copy, Debug)]
pub struct Point {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Geometric refinement levels toward each endpoint before adapting.
    pub grades: u32,
}

impl Default for Options {
    fn default() -> Self {
        Options { abs_tol: 1e-9, rel_tol: 1e-12, max_depth: 48, grades: 12 }
    }
}

struct Ctx<'a, F> {
    f: &'a F,
    a: f64,
    b: f64,
    opts: Options,
}

/// Subinterval of length `h` whose nearer end lies `near` from `a` (left
/// anchored) or from `b` (right anchored).
#[derive(Clone, Copy)]
struct Panel {
    right: bool,
    near: f64,
    h: f64,
}

impl Panel {
    fn halves(self) -> (Panel, Panel) {
        let h = 0.5 * self.h;
        if self.right {
            (Panel { right: true, near: self.near + h, h }, Panel { right: true, near: self.near, h })
        } else {
            (Panel { right: false, near: self.near, h }, Panel { right: false, near: self.near + h, h })
        }
    }
}

impl<F: Fn(Point) -> f64> Ctx<'_, F> {
    fn point(&self, p: Panel, xi: f64) -> Point {
        let len = self.b - self.a;
        if p.right {
            let to_hi = p.near + 0.5 * p.h * (1.0 - xi);
            Point { x: self.b - to_hi, from_lo: len - to_hi, to_hi }
        } else {
            let from_lo = p.near + 0.5 * p.h * (1.0 + xi);
            Point { x: self.a + from_lo, from_lo, to_hi: len - from_lo }
        }
    }

    fn panel(&self, p: Panel) -> f64 {
        let (x, w) = rule();
        let s: f64 = x.iter().zip(w).map(|(&xi, wi)| wi * (self.f)(self.point(p, xi))).sum();
        0.5 * p.h * s
    }

    fn adapt(&self, p: Panel, whole: f64, tol: f64, depth: u32) -> Result<f64> {
        let (l, r) = p.halves();
        let left = self.panel(l);
        let right = self.panel(r);
        let both = left + right;
        if !both.is_finite() {
            return Err(Error::Internal(format!("non-finite integrand near {}", self.point(p, 0.0).x)));
        }
        if (both - whole).abs() <= tol || depth >= self.opts.max_depth || p.h < 1e-300 {
            return Ok(both);
        }
        Ok(self.adapt(l, left, 0.5 * tol, depth + 1)? + self.adapt(r, right, 0.5 * tol, depth + 1)?)
    }
}

/// `∫_a^b f`, adaptive, with panels graded geometrically toward both ends.
pub fn integrate<F: Fn(Point) -> f64>(f: F, a: f64, b: f64, opts: Options) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, opts).map(|v| -v);
    }
    let half = 0.5 * (b - a);
    let ctx = Ctx { f: &f, a, b, opts };
    // each half split at half·2^{-k}, k = 1..grades, measured from its end
    let mut panels = Vec::new();
    for right in [false, true] {
        let mut near = 0.0;
        for k in (1..=opts.grades as i32).rev() {
            let edge = half * 0.5f64.powi(k);
            panels.push(Panel { right, near, h: edge - near });
            near = edge;
        }
        panels.push(Panel { right, near, h: half - near });
    }
    let coarse: Vec<f64> = panels.iter().map(|&p| ctx.panel(p)).collect();
    let scale = coarse.iter().map(|v| v.abs()).sum::<f64>();
    let tol = opts.abs_tol.max(opts.rel_tol * scale);
    let share = tol / coarse.len() as f64;
    let mut total = 0.0;
    for (&p, whole) in panels.iter().zip(coarse) {
        total += ctx.adapt(p, whole, share, 0)?;
    }
    Ok(total)
}

/// `∫_a^∞ f` for integrands with a known tail bound: the interval is cut at
/// the first `a + 2^k` where `tail(x)` falls below the tolerance.
pub fn integrate_to_infinity<F, T>(f: F, a: f64, tail: T, opts: Options) -> Result<f64>
where
    F: Fn(Point) -> f64,
    T: Fn(f64) -> f64,
{
    let mut cut = a + 1.0;
    while tail(cut) > 0.1 * opts.abs_tol {
        cut = a + 2.0 * (cut - a);
        if cut > 1e6 {
            return Err(Error::Range("tail bound does not decay".into()));
        }
    }
    integrate(f, a, cut, opts)
}

/// Iterated integral over `a_k(x_1..x_{k-1}) < x_k < b_k(x_1..x_{k-1})`.
/// `bounds(k, prefix)` returns the range of the `k`-th variable.
pub fn integrate_nested<B, F>(dim: usize, bounds: &B, f: &F, opts: Options) -> Result<f64>
where
    B: Fn(usize, &[Point]) -> (f64, f64),
    F: Fn(&[Point]) -> f64,
{
    fn go<B, F>(k: usize, dim: usize, prefix: &mut Vec<Point>, bounds: &B, f: &F, opts: Options) -> Result<f64>
    where
        B: Fn(usize, &[Point]) -> (f64, f64),
        F: Fn(&[Point]) -> f64,
    {
        if k == dim {
            return Ok(f(prefix));
        }
        let (lo, hi) = bounds(k, prefix);
        if hi <= lo {
            return Ok(0.0);
        }
        let err = std::cell::RefCell::new(None);
        let stack = std::cell::RefCell::new(std::mem::take(prefix));
        let v = integrate(
            |p| {
                let mut s = stack.borrow_mut();
                s.push(p);
                let r = go(k + 1, dim, &mut s, bounds, f, opts);
                s.pop();
                match r {
                    Ok(v) => v,
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        0.0
                    }
                }
            },
            lo,
            hi,
            opts,
        );
        *prefix = stack.into_inner();
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        v
    }
    go(0, dim, &mut Vec::with_capacity(dim), bounds, f, opts)
}

/// `P_0(t) … P_{m}(t)`.
fn legendre_values(m: usize, t: f64) -> Vec<f64> {
    let mut p = vec![1.0, t];
    for n in 1..m {
        let next = ((2 * n + 1) as f64 * t * p[n] - n as f64 * p[n - 1]) / (n + 1) as f64;
        p.push(next);
    }
    p.truncate(m + 1);
    p
}

/// Graded Gauss–Legendre grid with per-panel cumulative integration matrices,
/// for ordered integrals `∫_{a<x_1<⋯<x_m<b} Π_k w_k(x_k)`.
pub struct ChainGrid {
    points: Vec<Point>,
    /// `(first node, panel length)`.
    panels: Vec<(usize, f64)>,
    weights: Vec<f64>,
    /// `cum[i][j] = ∫_{-1}^{t_i} ℓ_j` on the reference panel.
    cum: Vec<Vec<f64>>,
}

impl ChainGrid {
    pub fn new(a: f64, b: f64, grades: u32) -> Self {
        let (t, w) = rule();
        let n = t.len();
        let cum = (0..n)
            .map(|i| {
                let pi = legendre_values(n, t[i]);
                (0..n)
                    .map(|j| {
                        let pj = legendre_values(n, t[j]);
                        let mut s = t[i] + 1.0;
                        for k in 1..n {
                            s += pj[k] * (pi[k + 1] - pi[k - 1]);
                        }
                        0.5 * w[j] * s
                    })
                    .collect()
            })
            .collect();
        let ctx = Ctx { f: &|_: Point| 0.0, a, b, opts: Options::default() };
        let half = 0.5 * (b - a);
        let mut raw = Vec::new();
        for right in [false, true] {
            let mut near = 0.0;
            for k in (1..=grades as i32).rev() {
                let edge = half * 0.5f64.powi(k);
                raw.push(Panel { right, near, h: edge - near });
                near = edge;
            }
            raw.push(Panel { right, near, h: half - near });
        }
        // left-to-right order
        let (left, right): (Vec<Panel>, Vec<Panel>) = raw.into_iter().partition(|p| !p.right);
        let ordered: Vec<Panel> = left.into_iter().chain(right.into_iter().rev()).collect();
        let mut points = Vec::new();
        let mut panels = Vec::new();
        for p in ordered {
            panels.push((points.len(), p.h));
            points.extend(t.iter().map(|&xi| ctx.point(p, xi)));
        }
        ChainGrid { points, panels, weights: w.clone(), cum }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Cumulative integrals `y_k(x) = ∫_a^x w_k(t) y_{k-1}(t) dt` at the nodes.
    fn cumulate(&self, phi: &[f64]) -> (Vec<f64>, f64) {
        let n = self.weights.len();
        let mut out = vec![0.0; phi.len()];
        let mut base = 0.0;
        for &(start, h) in &self.panels {
            let seg = &phi[start..start + n];
            for i in 0..n {
                let s: f64 = self.cum[i].iter().zip(seg).map(|(c, f)| c * f).sum();
                out[start + i] = base + 0.5 * h * s;
            }
            base += 0.5 * h * self.weights.iter().zip(seg).map(|(w, f)| w * f).sum::<f64>();
        }
        (out, base)
    }

    /// Ordered integral of the product of the weight functions.
    pub fn chain(&self, weights: &[&dyn Fn(Point) -> f64]) -> f64 {
        let mut y = vec![1.0; self.points.len()];
        let mut total = 1.0;
        for w in weights {
            let phi: Vec<f64> = self.points.iter().zip(&y).map(|(&p, yi)| w(p) * yi).collect();
            let (next, t) = self.cumulate(&phi);
            y = next;
            total = t;
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_and_weights() {
        let (x, w) = gauss_legendre(ORDER);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        // exact for degree 2·ORDER−1
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(38)).sum();
        assert!((s - 2.0 / 39.0).abs() < 1e-14);
    }

    #[test]
    fn endpoint_singularities() {
        let v = integrate(|p| p.from_lo.ln(), 0.0, 1.0, Options::default()).unwrap();
        assert!((v + 1.0).abs() < 1e-10);
        let v = integrate(|p| 1.0 / p.to_hi.sqrt(), 0.0, 1.0, Options::default()).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let v = integrate_to_infinity(|p| (-p.x).exp(), 0.0, |x| (-x).exp(), Options::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn chain_integrals() {
        let g = ChainGrid::new(0.0, std::f64::consts::PI, 60);
        let sin = |p: Point| p.from_lo.min(p.to_hi).sin();
        assert!((g.chain(&[&sin, &sin]) - 2.0).abs() < 1e-13);
        // Dirichlet integral: π Γ(1/2)² / Γ(2) = π²
        let v = g.chain(&[&|p: Point| p.from_lo.powf(-0.5), &|p: Point| p.to_hi.powf(-0.5)]);
        assert!((v - std::f64::consts::PI * std::f64::consts::PI).abs() < 1e-7, "{v}");
        let one = |_: Point| 1.0;
        assert!((g.chain(&[&one, &one, &one]) - std::f64::consts::PI.powi(3) / 6.0).abs() < 1e-12);
    }

    #[test]
    fn nested_simplex() {
        // volume of {0 < x < y < 1} and ∫ x y over it
        let b = |k: usize, p: &[Point]| if k == 0 { (0.0, 1.0) } else { (p[0].x, 1.0) };
        let v = integrate_nested(2, &b, &|_: &[Point]| 1.0, Options::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let v = integrate_nested(2, &b, &|p: &[Point]| p[0].x * p[1].x, Options::default()).unwrap();
        assert!((v - 0.125).abs() < 1e-12);
    }
}
