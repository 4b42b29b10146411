//! Exact polynomials in the graded variables `π²`, `L₁²`, …, `Lₙ²` and the
//! Weil–Petersson volumes built from them.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::exec::Exec;
use crate::real::Real;
use crate::trees::{enumerate_anti, enumerate_delaunay, CuspMask, PlaneTree};

pub fn factorial(k: u64) -> BigInt {
    (1..=k).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn pow2(k: i64) -> BigRational {
    if k >= 0 {
        BigRational::from_integer(BigInt::one() << k as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
    }
}

/// Exponents of `π²` and of each `Lᵢ²`, the latter as a sorted sparse list
/// of `(i, b)` with `i` zero-based and `b > 0`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub pi2: u32,
    pub l2: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn from_dense(pi2: u32, l2: &[u32]) -> Self {
        let l2 = l2.iter().enumerate().filter(|(_, &b)| b > 0).map(|(i, &b)| (i, b)).collect();
        Monomial { pi2, l2 }
    }

    pub fn dense_l2(&self, n: usize) -> Vec<u32> {
        let mut out = vec![0; n];
        for &(i, b) in &self.l2 {
            out[i] = b;
        }
        out
    }

    pub fn degree(&self) -> u32 {
        self.pi2 + self.l2.iter().map(|&(_, b)| b).sum::<u32>()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        let mut l2: BTreeMap<usize, u32> = self.l2.iter().copied().collect();
        for &(i, b) in &other.l2 {
            *l2.entry(i).or_default() += b;
        }
        Monomial { pi2: self.pi2 + other.pi2, l2: l2.into_iter().collect() }
    }
}

/// `Σ c · π^{2a} · Π Lᵢ^{2bᵢ}` with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WPPolynomial {
    n: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl WPPolynomial {
    pub fn zero(n: usize) -> Self {
        WPPolynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        Self::term(n, c, Monomial { pi2: 0, l2: Vec::new() })
    }

    pub fn term(n: usize, c: BigRational, m: Monomial) -> Self {
        let mut p = Self::zero(n);
        p.add_term(m, c);
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigRational {
        self.terms.get(m).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_insert_with(BigRational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.n, other.n, "polynomials over different n");
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c.clone());
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = Self::zero(self.n);
        for (m, x) in &self.terms {
            out.add_term(m.clone(), x * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "polynomials over different n");
        let mut out = Self::zero(self.n);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    /// Some(d) if every monomial has graded degree d; Some(0) for zero.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut degs = self.terms.keys().map(Monomial::degree);
        let first = degs.next().unwrap_or(0);
        degs.all(|d| d == first).then_some(first)
    }

    /// Substitutes `L_label = 0`.
    pub fn set_length_zero(&self, label: usize) -> Self {
        let i = label - 1;
        let mut out = Self::zero(self.n);
        for (m, c) in &self.terms {
            if m.l2.iter().all(|&(j, _)| j != i) {
                out.add_term(m.clone(), c.clone());
            }
        }
        out
    }

    /// Substitutes the masked lengths by zero.
    pub fn apply_mask(&self, mask: &CuspMask) -> Self {
        (1..=self.n).filter(|&l| mask.is_cusp(l)).fold(self.clone(), |p, l| p.set_length_zero(l))
    }

    /// Substitutes rational lengths, leaving a polynomial in `π²`.
    pub fn evaluate_symbolic(&self, lengths: &[BigRational]) -> Result<PiPoly> {
        if lengths.len() != self.n {
            return invalid(format!("expected {} lengths, got {}", self.n, lengths.len()));
        }
        let mut out = PiPoly::zero();
        for (m, c) in &self.terms {
            let mut x = c.clone();
            for &(i, b) in &m.l2 {
                x *= num_traits::pow(lengths[i].clone() * lengths[i].clone(), b as usize);
            }
            out.add_term(m.pi2, x);
        }
        Ok(out)
    }

    /// Substitutes real lengths and numeric `π`.
    pub fn evaluate_numeric(&self, lengths: &[f64]) -> Result<f64> {
        if lengths.len() != self.n {
            return invalid(format!("expected {} lengths, got {}", self.n, lengths.len()));
        }
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut x = rat_to_f64(c) * pi2.powi(m.pi2 as i32);
                for &(i, b) in &m.l2 {
                    x *= (lengths[i] * lengths[i]).powi(b as i32);
                }
                x
            })
            .sum())
    }

    pub fn to_json(&self) -> PolyJson {
        PolyJson {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| TermJson {
                    pi2: m.pi2,
                    l2: m.dense_l2(self.n),
                    num: c.numer().to_string(),
                    den: c.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_json(j: &PolyJson) -> Result<Self> {
        let mut p = Self::zero(j.n);
        for t in &j.terms {
            if t.l2.len() != j.n {
                return invalid("L2 exponent vector has the wrong length");
            }
            let num: BigInt = t.num.parse().map_err(|_| crate::Error::InvalidArgument(format!("bad numerator {}", t.num)))?;
            let den: BigInt = t.den.parse().map_err(|_| crate::Error::InvalidArgument(format!("bad denominator {}", t.den)))?;
            if den.is_zero() {
                return invalid("zero denominator");
            }
            p.add_term(Monomial::from_dense(t.pi2, &t.l2), BigRational::new(num, den));
        }
        Ok(p)
    }
}

impl fmt::Display for WPPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut order: Vec<_> = self.terms.iter().collect();
        order.sort_by(|a, b| b.0.pi2.cmp(&a.0.pi2).then_with(|| a.0.l2.cmp(&b.0.l2)));
        for (k, (m, c)) in order.into_iter().enumerate() {
            let sign = if c.is_negative() { "-" } else if k > 0 { "+" } else { "" };
            if k > 0 {
                write!(f, " {sign} ")?;
            } else {
                write!(f, "{sign}")?;
            }
            write!(f, "{}", c.abs())?;
            if m.pi2 > 0 {
                write!(f, "*pi^{}", 2 * m.pi2)?;
            }
            for &(i, b) in &m.l2 {
                write!(f, "*L{}^{}", i + 1, 2 * b)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermJson {
    pub pi2: u32,
    #[serde(rename = "L2")]
    pub l2: Vec<u32>,
    pub num: String,
    pub den: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyJson {
    pub n: usize,
    pub terms: Vec<TermJson>,
}

pub fn rat_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// Univariate polynomial in `π²` with rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct PiPoly {
    /// `coeffs[a]` multiplies `π^{2a}`; no trailing zeros.
    coeffs: Vec<BigRational>,
}

impl PiPoly {
    pub fn zero() -> Self {
        PiPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = PiPoly { coeffs: vec![c] };
        p.trim();
        p
    }

    /// `c · π^{2a}`.
    pub fn monomial(c: BigRational, a: u32) -> Self {
        let mut p = Self::zero();
        p.add_term(a, c);
        p
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, a: usize) -> BigRational {
        self.coeffs.get(a).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    pub fn add_term(&mut self, a: u32, c: BigRational) {
        let a = a as usize;
        if self.coeffs.len() <= a {
            self.coeffs.resize(a + 1, BigRational::zero());
        }
        self.coeffs[a] += c;
        self.trim();
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, c) in other.coeffs.iter().enumerate() {
            out.add_term(a as u32, c.clone());
        }
        out
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut out = PiPoly { coeffs: self.coeffs.iter().map(|x| x * c).collect() };
        out.trim();
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        let mut out = PiPoly { coeffs };
        out.trim();
        out
    }

    pub fn to_real(&self) -> Real {
        let pi2 = Real::pi().powi(2);
        self.coeffs.iter().rev().fold(Real::zero(), |acc, c| acc * &pi2 + Real::from_rational(c))
    }

    pub fn to_f64(&self) -> f64 {
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * pi2 + rat_to_f64(c))
    }

    /// Constant term if the polynomial has degree 0.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self.coeffs.len() {
            0 => Some(BigRational::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }
}

impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (a, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            first = false;
            write!(f, "{}", c.abs())?;
            if a > 0 {
                write!(f, "*pi^{}", 2 * a)?;
            }
        }
        Ok(())
    }
}

/// Weight of an anti-Delaunay tree in the alternating sum of volumes.
pub fn anti_tree_weight(t: &PlaneTree) -> Result<WPPolynomial> {
    let n = t.n();
    let mut c = BigRational::one();
    let mut m = Monomial { pi2: 0, l2: Vec::new() };
    for v in t.inner_vertices() {
        let d = t.deg(v) as u64;
        if d < 3 {
            return invalid(format!("inner vertex of degree {d}"));
        }
        // 2^{d-2}/(d-1)! · (-1)^{d-1} π^{2d-4}/(d-2)!
        let sign = if (d - 1) % 2 == 0 { 1 } else { -1 };
        c *= pow2(d as i64 - 2) * BigRational::new(BigInt::from(sign), factorial(d - 1) * factorial(d - 2));
        m.pi2 += (d - 2) as u32;
    }
    let mut l2 = vec![0u32; n];
    for b in 0..n {
        let k = t.deg(b) as u64 - 1;
        // 2^{k-1}/k! · (2/k!) (L/2)^{2k} = L^{2k} / (2^k (k!)²)
        c *= BigRational::new(BigInt::one(), (BigInt::one() << k as usize) * factorial(k) * factorial(k));
        l2[b] = k as u32;
    }
    m.l2 = Monomial::from_dense(0, &l2).l2;
    Ok(WPPolynomial::term(n, c, m))
}

/// Volume of the anti-polytope of `t` for the anti-Delaunay edge set `a`.
pub fn anti_polytope_volume(t: &PlaneTree, a: &[usize]) -> Result<WPPolynomial> {
    let c = t.contract_edges(a)?;
    Ok(contracted_volume(&c.tree))
}

fn contracted_volume(tt: &PlaneTree) -> WPPolynomial {
    let n = tt.n();
    let mut c = pow2(n as i64 - 2);
    let mut pi2 = 0;
    for v in tt.inner_vertices() {
        let d = tt.deg(v) as u64;
        c /= BigRational::from_integer(factorial(2 * d - 4));
        pi2 += (d - 2) as u32;
    }
    let mut l2 = vec![0u32; n];
    for b in 0..n {
        let k = tt.deg(b) as u64 - 1;
        // (L/2)^{2k} / (k!)²
        c /= BigRational::from_integer((BigInt::one() << (2 * k) as usize) * factorial(k) * factorial(k));
        l2[b] = k as u32;
    }
    WPPolynomial::term(n, c, Monomial::from_dense(pi2, &l2))
}

/// Volume of the Delaunay polytope by inclusion–exclusion over inner edges.
pub fn delaunay_polytope_volume(t: &PlaneTree) -> WPPolynomial {
    let inner = t.inner_edges();
    let mut out = WPPolynomial::zero(t.n());
    for sub in 0..(1u64 << inner.len()) {
        let a: Vec<usize> = inner.iter().enumerate().filter(|(i, _)| sub >> i & 1 == 1).map(|(_, &e)| e).collect();
        let vol = anti_polytope_volume(t, &a).expect("inner edges are contractible");
        if a.len() % 2 == 0 {
            out.add_assign(&vol);
        } else {
            out.add_assign(&vol.scale(&-BigRational::one()));
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Anti,
    InclusionExclusion,
}

/// `V₀,₁₊ₙ(0, 𝐋)` with the masked lengths set to zero.
pub fn wp_volume(n: usize, mask: &CuspMask, route: Route, exec: Exec) -> Result<WPPolynomial> {
    let parts = match route {
        Route::Anti => {
            let trees = enumerate_anti(n, mask)?;
            exec.map_slice(&trees, anti_tree_weight).into_iter().collect::<Result<Vec<_>>>()?
        }
        Route::InclusionExclusion => {
            let trees = enumerate_delaunay(n, mask)?;
            exec.map_slice(&trees, delaunay_polytope_volume)
        }
    };
    let mut out = WPPolynomial::zero(n);
    for p in &parts {
        out.add_assign(p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v04() -> WPPolynomial {
        let mut p = WPPolynomial::term(3, rat(2, 1), Monomial::from_dense(1, &[0, 0, 0]));
        for i in 0..3 {
            let mut l = [0; 3];
            l[i] = 1;
            p.add_term(Monomial::from_dense(0, &l), rat(1, 2));
        }
        p
    }

    #[test]
    fn small_volumes() {
        let m2 = CuspMask::all_cusps(2).unwrap();
        for route in [Route::Anti, Route::InclusionExclusion] {
            let v = wp_volume(2, &m2, route, Exec::Sequential).unwrap();
            assert_eq!(v, WPPolynomial::constant(2, rat(1, 1)));
            let v = wp_volume(3, &CuspMask::all_positive(3).unwrap(), route, Exec::Sequential).unwrap();
            assert_eq!(v, v04());
        }
        let masked = wp_volume(3, &CuspMask::parse("110").unwrap(), Route::Anti, Exec::Sequential).unwrap();
        assert_eq!(masked, v04().set_length_zero(1).set_length_zero(2));
    }

    #[test]
    fn evaluation() {
        let p = v04();
        let z = p.evaluate_symbolic(&[rat(0, 1), rat(0, 1), rat(0, 1)]).unwrap();
        assert_eq!(z, PiPoly::monomial(rat(2, 1), 1));
        let x = p.evaluate_numeric(&[2.0, 0.0, 0.0]).unwrap();
        assert!((x - (2.0 * std::f64::consts::PI.powi(2) + 2.0)).abs() < 1e-12);
        assert!((x - 21.7392).abs() < 1e-4);
        assert_eq!(WPPolynomial::zero(3).evaluate_numeric(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!(p.evaluate_numeric(&[1.0]).is_err());
    }

    #[test]
    fn weights_of_small_trees() {
        let single = &enumerate_anti(2, &CuspMask::all_cusps(2).unwrap()).unwrap()[0];
        assert_eq!(anti_tree_weight(single).unwrap(), WPPolynomial::constant(2, rat(1, 1)));
        let mask = CuspMask::parse("110").unwrap();
        for t in enumerate_delaunay(3, &mask).unwrap() {
            let w = anti_tree_weight(&t).unwrap();
            let vol = delaunay_polytope_volume(&t);
            assert_eq!(w, vol);
            if t.num_vertices() == 4 {
                assert_eq!(vol, WPPolynomial::term(3, rat(1, 1), Monomial::from_dense(1, &[0, 0, 0])));
            } else {
                assert_eq!(vol, WPPolynomial::term(3, rat(1, 2), Monomial::from_dense(0, &[0, 0, 1])));
            }
        }
    }

    #[test]
    fn caterpillar_volume() {
        let t = &enumerate_delaunay(4, &CuspMask::all_cusps(4).unwrap()).unwrap()[0];
        let e = t.inner_edges();
        let full = anti_polytope_volume(t, &[]).unwrap();
        let contracted = anti_polytope_volume(t, &e).unwrap();
        let pi4 = Monomial::from_dense(2, &[0; 4]);
        assert_eq!(full.coefficient(&pi4), rat(1, 1));
        assert_eq!(contracted.coefficient(&pi4), rat(4, 24));
        assert_eq!(delaunay_polytope_volume(t).coefficient(&pi4), rat(5, 6));
    }

    #[test]
    fn json_round_trip() {
        let p = v04();
        let j = serde_json::to_string(&p.to_json()).unwrap();
        assert!(j.contains("\"L2\""));
        assert_eq!(WPPolynomial::from_json(&serde_json::from_str(&j).unwrap()).unwrap(), p);
    }

    #[test]
    fn display() {
        assert_eq!(v04().to_string(), "2*pi^2 + 1/2*L1^2 + 1/2*L2^2 + 1/2*L3^2");
    }
}
