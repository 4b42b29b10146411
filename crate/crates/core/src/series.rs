//! Truncated power series in a bookkeeping variable `s`, where the weight is
//! scaled as `μ → sμ`, and the generating functions built from them: the
//! string-equation solution `R`, `Z`, `η`, `X̂`, the density `X₁` and the
//! variance pipeline.
//!
//! Exact mode uses [`PiPoly`] coefficients (rationals graded by powers of
//! `π²`) and requires rational atoms. Real mode uses [`Real`].

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{invalid, Error, Result};
use crate::real::Real;
use crate::wp_poly::{factorial, PiPoly};

/// Coefficient ring of a [`TruncatedSeries`].
pub trait Coeff: Clone + fmt::Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(c: &BigRational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse, if it exists in the ring.
    fn inv(&self) -> Option<Self>;
}

/// Rings that contain `π²` and the times of an atomic weight.
pub trait PiCoeff: Coeff {
    fn pi2_pow(a: u32) -> Self;
    fn weight_times(mu: &AtomicWeight, k: usize) -> Result<Self>;
}

impl Coeff for BigRational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(c: &BigRational) -> Self {
        c.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Zero::is_zero(self)).then(|| self.recip())
    }
}

impl Coeff for PiPoly {
    fn zero() -> Self {
        PiPoly::zero()
    }
    fn one() -> Self {
        PiPoly::constant(<BigRational as One>::one())
    }
    fn from_rational(c: &BigRational) -> Self {
        PiPoly::constant(c.clone())
    }
    fn is_zero(&self) -> bool {
        PiPoly::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        PiPoly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        PiPoly::add(self, &other.scale(&-<BigRational as One>::one()))
    }
    fn mul(&self, other: &Self) -> Self {
        PiPoly::mul(self, other)
    }
    fn neg(&self) -> Self {
        self.scale(&-<BigRational as One>::one())
    }
    fn inv(&self) -> Option<Self> {
        let c = self.as_rational()?;
        (!Zero::is_zero(&c)).then(|| PiPoly::constant(c.recip()))
    }
}

impl PiCoeff for PiPoly {
    fn pi2_pow(a: u32) -> Self {
        PiPoly::monomial(<BigRational as One>::one(), a)
    }
    fn weight_times(mu: &AtomicWeight, k: usize) -> Result<Self> {
        mu.times_exact(k)
            .map(PiPoly::constant)
            .ok_or_else(|| Error::InvalidArgument("exact mode needs rational masses and lengths".into()))
    }
}

impl Coeff for Real {
    fn zero() -> Self {
        Real::zero()
    }
    fn one() -> Self {
        Real::one()
    }
    fn from_rational(c: &BigRational) -> Self {
        Real::from_rational(c)
    }
    fn is_zero(&self) -> bool {
        Real::is_zero(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Option<Self> {
        (!Real::is_zero(self)).then(|| self.recip())
    }
}

impl PiCoeff for Real {
    fn pi2_pow(a: u32) -> Self {
        Real::pi().powi(2 * a as usize)
    }
    fn weight_times(mu: &AtomicWeight, k: usize) -> Result<Self> {
        Ok(mu.times_real(k))
    }
}

/// Coefficients `c_0 … c_N` of a power series truncated at order `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> TruncatedSeries<C> {
    /// Pads with zeros or truncates to `order`.
    pub fn new(mut coeffs: Vec<C>, order: usize) -> Self {
        coeffs.resize(order + 1, C::zero());
        TruncatedSeries { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self::new(Vec::new(), order)
    }

    pub fn constant(c: C, order: usize) -> Self {
        Self::new(vec![c], order)
    }

    /// The series `s`.
    pub fn variable(order: usize) -> Self {
        Self::new(vec![C::zero(), C::one()], order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, i: usize) -> C {
        self.coeffs.get(i).cloned().unwrap_or_else(C::zero)
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.coeffs[..=order.min(self.order())].to_vec(), order)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|i| self.coeffs[i].add(&other.coeffs[i])).collect(), n)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self::new((0..=n).map(|i| self.coeffs[i].sub(&other.coeffs[i])).collect(), n)
    }

    pub fn scale(&self, c: &C) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|x| x.mul(c)).collect() }
    }

    pub fn neg(&self) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(C::neg).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![C::zero(); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        TruncatedSeries { coeffs: out }
    }

    /// `self ∘ inner`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return invalid("composition needs an inner series without constant term");
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        let mut acc = Self::zero(n);
        for c in self.coeffs[..=n].iter().rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = acc.coeffs[0].add(c);
        }
        Ok(acc)
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.coeffs[0]
            .inv()
            .ok_or_else(|| Error::InvalidArgument("reciprocal of a series with non-invertible constant term".into()))?;
        let n = self.order();
        let mut out: Vec<C> = Vec::with_capacity(n + 1);
        out.push(inv0.clone());
        for k in 1..=n {
            let mut acc = C::zero();
            for i in 1..=k {
                acc = acc.add(&self.coeffs[i].mul(&out[k - i]));
            }
            out.push(acc.mul(&inv0).neg());
        }
        Ok(TruncatedSeries { coeffs: out })
    }

    /// Compositional inverse `g` with `self ∘ g = s`.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return invalid("reversion needs zero constant term");
        }
        let n = self.order();
        let inv1 = self
            .coeff(1)
            .inv()
            .ok_or_else(|| Error::InvalidArgument("reversion needs an invertible linear coefficient".into()))?;
        let mut g = Self::new(vec![C::zero(), inv1.clone()], n);
        for k in 2..=n {
            let err = self.truncate(k).compose(&g.truncate(k))?.coeffs[k].clone();
            g.coeffs[k] = g.coeffs[k].sub(&err.mul(&inv1));
        }
        Ok(g)
    }

    /// `d/ds`, of order one less.
    pub fn derivative(&self) -> Self {
        let n = self.order().max(1) - 1;
        let coeffs = (1..self.coeffs.len())
            .map(|i| self.coeffs[i].mul(&C::from_rational(&BigRational::from_integer(BigInt::from(i)))))
            .collect();
        Self::new(coeffs, n)
    }

    /// `self^0 … self^m`, each truncated at the order of `self`.
    pub fn powers(&self, m: usize) -> Vec<Self> {
        let n = self.order();
        let mut out = vec![Self::constant(C::one(), n)];
        for _ in 0..m {
            let next = out.last().expect("nonempty").mul(self);
            out.push(next);
        }
        out
    }
}

impl TruncatedSeries<Real> {
    pub fn to_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(Real::to_f64).collect()
    }
}

impl TruncatedSeries<PiPoly> {
    pub fn to_real(&self) -> TruncatedSeries<Real> {
        TruncatedSeries { coeffs: self.coeffs.iter().map(PiPoly::to_real).collect() }
    }
}

/// One atom `x δ_K` of a weight.
#[derive(Clone, Debug)]
pub struct Atom {
    pub mass: Real,
    pub length: Real,
    /// Present when both mass and length are rational.
    pub exact: Option<(BigRational, BigRational)>,
}

/// Finite weight `μ = Σ_j x_j δ_{K_j}` on boundary lengths.
#[derive(Clone, Debug, Default)]
pub struct AtomicWeight {
    atoms: Vec<Atom>,
}

impl AtomicWeight {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rationals(atoms: &[(BigRational, BigRational)]) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for (x, k) in atoms {
            if x.is_negative() || k.is_negative() {
                return invalid("masses and lengths must be nonnegative");
            }
            out.push(Atom { mass: Real::from_rational(x), length: Real::from_rational(k), exact: Some((x.clone(), k.clone())) });
        }
        Ok(AtomicWeight { atoms: out })
    }

    pub fn from_reals(atoms: &[(Real, Real)]) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for (x, k) in atoms {
            if *x < Real::zero() || *k < Real::zero() || !x.is_finite() || !k.is_finite() {
                return invalid("masses and lengths must be finite and nonnegative");
            }
            out.push(Atom { mass: x.clone(), length: k.clone(), exact: None });
        }
        Ok(AtomicWeight { atoms: out })
    }

    /// `"x1:K1,x2:K2"`, each entry an integer, fraction `a/b` or decimal.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::zero());
        }
        let mut atoms = Vec::new();
        for part in s.split(',') {
            let (x, k) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidArgument(format!("atom `{part}` is not of the form mass:length")))?;
            atoms.push((parse_rational(x)?, parse_rational(k)?));
        }
        Self::from_rationals(&atoms)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_exact(&self) -> bool {
        self.atoms.iter().all(|a| a.exact.is_some())
    }

    pub fn total_mass(&self) -> Real {
        self.atoms.iter().fold(Real::zero(), |acc, a| acc + &a.mass)
    }

    /// `t_k[μ] = Σ_j x_j (2/k!) (K_j/2)^{2k}` when all atoms are rational.
    pub fn times_exact(&self, k: usize) -> Option<BigRational> {
        let mut acc = <BigRational as Zero>::zero();
        for a in &self.atoms {
            let (x, l) = a.exact.as_ref()?;
            let half = l / BigRational::from_integer(2.into());
            acc += x * BigRational::new(2.into(), factorial(k as u64)) * num_traits::pow(half, 2 * k);
        }
        Some(acc)
    }

    pub fn times_real(&self, k: usize) -> Real {
        let two_over = Real::from_i64(2) / Real::from_bigint(&factorial(k as u64));
        self.atoms.iter().fold(Real::zero(), |acc, a| {
            let half = &a.length / Real::from_i64(2);
            acc + &a.mass * &two_over * half.powi(2 * k)
        })
    }
}

/// Integer, `a/b` or decimal (with optional exponent) as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("`{s}` is not a rational number"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int, frac) = mant.split_once('.').unwrap_or((mant, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let digits = if digits == "-" || digits == "+" { return Err(bad()) } else { digits };
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// `t_k[μ]`.
pub fn times(mu: &AtomicWeight, k: usize) -> Real {
    mu.times_real(k)
}

/// `2^{d-1}/d!` as a rational.
fn c_d(d: usize) -> BigRational {
    if d == 0 {
        BigRational::new(1.into(), 2.into())
    } else {
        BigRational::new(BigInt::one() << (d - 1), factorial(d as u64))
    }
}

/// Coefficients of `Z(r; sμ] = Σ_d (z⁰_d + s z¹_d) r^d` for `d ≤ dmax`.
fn z_coefficients<C: PiCoeff>(mu: &AtomicWeight, dmax: usize) -> Result<(Vec<C>, Vec<C>)> {
    let mut z0 = Vec::with_capacity(dmax + 1);
    let mut z1 = Vec::with_capacity(dmax + 1);
    for d in 0..=dmax {
        // γ_d = (-1)^d π^{2d-2}/(d-1)!
        let mut a = if d == 1 { C::one() } else { C::zero() };
        if d >= 2 {
            let sign = if d % 2 == 0 { 1 } else { -1 };
            let g = c_d(d) * BigRational::new(sign.into(), factorial(d as u64 - 1));
            a = a.sub(&C::pi2_pow(d as u32 - 1).mul(&C::from_rational(&g)));
        }
        z0.push(a);
        z1.push(C::weight_times(mu, d)?.mul(&C::from_rational(&c_d(d))).neg());
    }
    Ok((z0, z1))
}

/// Solution `R[sμ]` of the string equation together with its powers
/// `R^0 … R^N`; the powers are what every composition with `Z` needs.
pub struct StringSolution<C> {
    pub r: TruncatedSeries<C>,
    pub powers: Vec<TruncatedSeries<C>>,
}

/// Solves `R = Σ_d 2^{d-1}/d! (t_d[sμ] + 1_{d≥2} γ_d) R^d` order by order.
pub fn solve_string_full<C: PiCoeff>(mu: &AtomicWeight, order: usize) -> Result<StringSolution<C>> {
    if order < 1 {
        return invalid("order must be at least 1");
    }
    let n = order;
    let (z0, z1) = z_coefficients::<C>(mu, n)?;
    // pw[d][k] = [s^k] R^d; R^d has valuation d
    let mut pw: Vec<Vec<C>> = (0..=n).map(|_| vec![C::zero(); n + 1]).collect();
    pw[0][0] = C::one();
    for k in 1..=n {
        for d in 2..=k {
            let mut acc = C::zero();
            for i in 1..=(k + 1 - d) {
                acc = acc.add(&pw[1][i].mul(&pw[d - 1][k - i]));
            }
            pw[d][k] = acc;
        }
        // R = -Σ_{d≠1} z_d R^d - s z¹_1 R, with z⁰_1 = 1
        let mut acc = C::zero();
        for d in 2..=k {
            acc = acc.sub(&z0[d].mul(&pw[d][k]));
        }
        for d in 0..k {
            acc = acc.sub(&z1[d].mul(&pw[d][k - 1]));
        }
        pw[1][k] = acc;
    }
    let powers: Vec<TruncatedSeries<C>> = pw.into_iter().map(|c| TruncatedSeries::new(c, n)).collect();
    Ok(StringSolution { r: powers[1].clone(), powers })
}

pub fn solve_string<C: PiCoeff>(mu: &AtomicWeight, order: usize) -> Result<TruncatedSeries<C>> {
    Ok(solve_string_full(mu, order)?.r)
}

fn falling(d: usize, q: usize) -> BigRational {
    BigRational::from_integer(factorial(d as u64) / factorial((d - q) as u64))
}

/// `∂^q Z/∂r^q (r; sμ]` composed with `r`, from the powers of `r`.
fn z_derivative_from_powers<C: PiCoeff>(q: usize, powers: &[TruncatedSeries<C>], mu: &AtomicWeight) -> Result<TruncatedSeries<C>> {
    let n = powers[0].order();
    let m_max = powers.len() - 1;
    let (z0, z1) = z_coefficients::<C>(mu, q + m_max)?;
    let mut out = vec![C::zero(); n + 1];
    for m in 0..=m_max {
        let d = m + q;
        let f = C::from_rational(&falling(d, q));
        let a0 = z0[d].mul(&f);
        let a1 = z1[d].mul(&f);
        for k in 0..=n {
            let p = powers[m].coeff(k);
            if !p.is_zero() {
                out[k] = out[k].add(&a0.mul(&p));
                if k < n {
                    out[k + 1] = out[k + 1].add(&a1.mul(&p));
                }
            }
        }
    }
    Ok(TruncatedSeries::new(out, n))
}

/// `Z(r(s); sμ]` for a series `r` without constant term.
pub fn z_series<C: PiCoeff>(r: &TruncatedSeries<C>, mu: &AtomicWeight) -> Result<TruncatedSeries<C>> {
    if !r.coeff(0).is_zero() {
        return invalid("Z needs a series without constant term");
    }
    let powers = r.powers(r.order());
    z_derivative_from_powers(0, &powers, mu)
}

/// `M_p = ∂^{p+1}Z/∂r^{p+1}(R[sμ]; sμ]`.
pub fn m_series<C: PiCoeff>(p: usize, sol: &StringSolution<C>, mu: &AtomicWeight) -> Result<TruncatedSeries<C>> {
    z_derivative_from_powers(p + 1, &sol.powers, mu)
}

fn check_u(u: f64) -> Result<()> {
    if !(u.abs() < 0.5) {
        return invalid(format!("u = {u} outside (-1/2, 1/2)"));
    }
    Ok(())
}

/// `η(u; sμ] = Σ_p u^{2p}/(2p+1)!! ∂^{p+1}Z/∂r^{p+1}(R[sμ]; sμ]`.
pub fn eta_from_solution(u: f64, sol: &StringSolution<Real>, mu: &AtomicWeight) -> Result<TruncatedSeries<Real>> {
    check_u(u)?;
    let n = sol.r.order();
    let u2 = Real::from_f64(u) * Real::from_f64(u);
    let pi2 = Real::pi().powi(2);
    let eps = Real::from_f64(2f64.powi(-(crate::real::PRECISION as i32) - 16));
    // b0[m], b1[m]: s⁰ and s¹ parts of Σ_p u^{2p}/(2p+1)!! z_{m+p+1} (m+p+1)!/m!
    let mut b0 = Vec::with_capacity(n + 1);
    let mut b1 = Vec::with_capacity(n + 1);
    let times: Vec<Real> = (0..=n + 400).map(|k| mu.times_real(k)).collect();
    for m in 0..=n {
        let mut acc0 = Real::zero();
        let mut acc1 = Real::zero();
        // w = u^{2p}/(2p+1)!! · (m+p+1)!/m!
        let mut w = Real::from_i64(m as i64 + 1);
        let mut p = 0usize;
        loop {
            let d = m + p + 1;
            // c_d γ_d = 2^{d-1}/d! · (-1)^d π^{2d-2}/(d-1)!; c_d t_d
            let cd = Real::from_rational(&c_d(d));
            let mut t0 = if d == 1 { w.clone() } else { Real::zero() };
            if d >= 2 {
                let g = &cd * pi2.powi(d - 1) / Real::from_bigint(&factorial(d as u64 - 1));
                let g = if d % 2 == 0 { g } else { -g };
                t0 = t0 - &w * g;
            }
            let t1 = -(&w * &cd * &times[d.min(times.len() - 1)]);
            acc0 += &t0;
            acc1 += &t1;
            let scale = acc0.abs() + acc1.abs() + Real::one();
            if p > 8 && (t0.abs() + t1.abs()) < &eps * &scale {
                break;
            }
            p += 1;
            if m + p + 1 >= times.len() {
                return Err(Error::Internal("η coefficient series did not converge".into()));
            }
            // w_{p+1} = w_p · u² (m+p+2) / (2p+3)
            w = &w * &u2 * Real::from_i64((m + p + 1) as i64) / Real::from_i64(2 * p as i64 + 1);
        }
        b0.push(acc0);
        b1.push(acc1);
    }
    let mut out = vec![Real::zero(); n + 1];
    for m in 0..=n {
        for k in 0..=n {
            let p = sol.powers[m].coeff(k);
            if p.is_zero() {
                continue;
            }
            out[k] += &(&b0[m] * &p);
            if k < n {
                out[k + 1] += &(&b1[m] * &p);
            }
        }
    }
    Ok(TruncatedSeries::new(out, n))
}

pub fn eta(u: f64, mu: &AtomicWeight, order: usize) -> Result<TruncatedSeries<Real>> {
    let sol = solve_string_full::<Real>(mu, order)?;
    eta_from_solution(u, &sol, mu)
}

/// `sin(2πu)/(2πu)`, equal to 1 at `u = 0`.
pub fn sinc_2pi(u: f64) -> Real {
    if u == 0.0 {
        return Real::one();
    }
    let x = Real::from_i64(2) * Real::pi() * Real::from_f64(u);
    x.sin() / x
}

/// `X̂(u; sμ] = sin(2πu) / (2πu η(u; sμ])`.
pub fn xhat(u: f64, mu: &AtomicWeight, order: usize) -> Result<TruncatedSeries<Real>> {
    let e = eta(u, mu, order)?;
    let pre = sinc_2pi(u);
    if pre.is_zero() {
        return invalid("sin(2πu) vanishes");
    }
    Ok(e.reciprocal()?.scale(&pre))
}

/// Second-order behaviour of `X̂` at `u = 0`: `X̂(0)` and `∂²X̂/∂u²(0)`.
pub struct XhatAtZero {
    pub value: TruncatedSeries<Real>,
    pub second: TruncatedSeries<Real>,
    pub m0: TruncatedSeries<Real>,
    pub m1: TruncatedSeries<Real>,
}

/// `X̂(0) = 1/M₀` and `X̂''(0) = -2M₁/(3M₀²) - (4π²/3) X̂(0)`.
pub fn xhat_at_zero(mu: &AtomicWeight, order: usize) -> Result<XhatAtZero> {
    let sol = solve_string_full::<Real>(mu, order)?;
    let m0 = m_series(0, &sol, mu)?;
    let m1 = m_series(1, &sol, mu)?;
    let value = m0.reciprocal()?;
    let third = Real::one() / Real::from_i64(3);
    let a = m1.mul(&value).mul(&value).scale(&(Real::from_i64(-2) * &third));
    let b = value.scale(&(Real::from_i64(-4) * Real::pi().powi(2) * &third));
    Ok(XhatAtZero { second: a.add(&b), value, m0, m1 })
}

/// `E[D²]` of the order-`k` coefficient: `[s^k]X̂''(0) / (4 [s^k]X̂(0))`.
pub fn second_moment(z: &XhatAtZero, k: usize) -> Real {
    z.second.coeff(k) / (Real::from_i64(4) * z.value.coeff(k))
}

/// `X₁(x; L) = 2 log((cosh x + cosh(L/2)) / (cosh x - 1))`, `+∞` at `x = 0`.
pub fn x1_density(x: f64, l: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    let s = (0.5 * x).sinh();
    // cosh x - 1 = 2 sinh²(x/2)
    let den = 2.0 * s * s;
    2.0 * ((1.0 + (0.5 * l).cosh()) / den).ln_1p()
}

/// Upper bound of `∫_X^∞ X₁(x; L) dx` (uses `log(1+a) ≤ a` and `cosh x - 1 ≥ eˣ/4` for `x ≥ 2`).
pub fn x1_tail_bound(x: f64, l: f64) -> f64 {
    let c = 1.0 + (0.5 * l).cosh();
    8.0 * c * (-x).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BesselKind {
    J0,
    J1,
    Jp(u32),
    I0,
}

/// Arguments beyond this modulus are rejected.
pub const BESSEL_MAX_ARG: f64 = 50.0;

/// Ascending series `Σ_k (±1)^k (x/2)^{2k+p} / (k! (k+p)!)`, stopped once the
/// remaining terms are bounded by a geometric tail below the working precision.
fn bessel_series(p: u32, alternating: bool, x: &Real) -> Result<Real> {
    if x.to_f64().abs() > BESSEL_MAX_ARG || !x.is_finite() {
        return Err(Error::Range(format!("Bessel argument {} outside |x| ≤ {BESSEL_MAX_ARG}", x.to_f64())));
    }
    let h = x / Real::from_i64(2);
    let h2 = &h * &h;
    let mut term = h.powi(p as usize) / Real::from_bigint(&factorial(p as u64));
    let mut acc = Real::zero();
    let mut max = Real::zero();
    let eps = Real::from_f64(2f64.powi(-(crate::real::PRECISION as i32)));
    for k in 0..10_000usize {
        acc += &term;
        if term.abs() > max {
            max = term.abs();
        }
        let ratio = &h2 / Real::from_i64(((k + 1) * (k + 1 + p as usize)) as i64);
        let next = &term * &ratio;
        let next = if alternating { -next } else { next };
        // tail ≤ |next| / (1 - ratio) once ratio < 1/2
        if ratio.to_f64() < 0.5 && next.abs() * Real::from_i64(2) <= &eps * &max {
            return Ok(acc);
        }
        term = next;
    }
    Err(Error::Internal("Bessel series did not terminate".into()))
}

pub fn bessel_real(kind: BesselKind, x: &Real) -> Result<Real> {
    match kind {
        BesselKind::J0 => bessel_series(0, true, x),
        BesselKind::J1 => bessel_series(1, true, x),
        BesselKind::Jp(p) => bessel_series(p, true, x),
        BesselKind::I0 => bessel_series(0, false, x),
    }
}

pub fn bessel(kind: BesselKind, x: f64) -> Result<f64> {
    bessel_real(kind, &Real::from_f64(x)).map(|v| v.to_f64())
}

/// First positive zero of `J₀`: sign-change bracketing, then Newton with `J₀' = -J₁`.
pub fn c0_real() -> Real {
    let mut lo = 0.1;
    let step = 0.1;
    while bessel(BesselKind::J0, lo + step).expect("in range") > 0.0 {
        lo += step;
    }
    let mut x = Real::from_f64(lo + 0.5 * step);
    for _ in 0..200 {
        let j0 = bessel_real(BesselKind::J0, &x).expect("in range");
        let j1 = bessel_real(BesselKind::J1, &x).expect("in range");
        let dx = j0 / j1;
        x += &dx;
        if dx.abs().to_f64() < 1e-100 {
            break;
        }
    }
    x
}

pub fn c0() -> f64 {
    c0_real().to_f64()
}

/// `c_WP = 2π / √(3 c₀)`.
pub fn c_wp() -> f64 {
    (Real::from_i64(2) * Real::pi() / (Real::from_i64(3) * c0_real()).sqrt()).to_f64()
}

#[derive(Clone, Debug, PartialEq)]
pub struct VarianceRow {
    pub n: usize,
    pub variance: f64,
    /// `Var / (c_WP² √(π/8) √n)`; undefined (`NaN`) at `n = 0`.
    pub ratio: f64,
}

/// `Var D(Sₙ) = [xⁿ]X̂''(0) / (4 [xⁿ]X̂(0))` for `μ = x δ₀`, `n ≤ n_max`.
pub fn variance_pipeline(n_max: usize) -> Result<Vec<VarianceRow>> {
    if n_max < 1 {
        return invalid("n_max must be at least 1");
    }
    let mu = AtomicWeight::from_rationals(&[(<BigRational as One>::one(), <BigRational as Zero>::zero())])?;
    let z = xhat_at_zero(&mu, n_max)?;
    let cw = c_wp();
    let norm = cw * cw * (std::f64::consts::PI / 8.0).sqrt();
    Ok((0..=n_max)
        .map(|n| {
            let variance = second_moment(&z, n).to_f64();
            let ratio = if n == 0 { f64::NAN } else { variance / (norm * (n as f64).sqrt()) };
            VarianceRow { n, variance, ratio }
        })
        .collect())
}

/// Volume generating function coefficient `[sⁿ]X̂(0)` for `μ = Σ x_j δ_{K_j}`;
/// equals `1/n! Σ_{tuples} Π x · V₀,₃₊ₙ(0,0,0,K…)`.
pub fn xhat_zero_coefficient(mu: &AtomicWeight, n: usize) -> Result<Real> {
    Ok(xhat(0.0, mu, n.max(1))?.coeff(n))
}
