//! Fixed-precision binary floating point used by the real-mode series.
//!
//! Working precision is [`PRECISION`] bits (about 115 significant digits).

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_rational::BigRational;

pub const PRECISION: usize = 384;
const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constant cache"));
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

#[derive(Clone)]
pub struct Real(BigFloat);

impl Real {
    pub fn zero() -> Self {
        Real(BigFloat::from_word(0, PRECISION))
    }

    pub fn one() -> Self {
        Real(BigFloat::from_word(1, PRECISION))
    }

    pub fn from_f64(x: f64) -> Self {
        Real(BigFloat::from_f64(x, PRECISION))
    }

    pub fn from_i64(x: i64) -> Self {
        Real(BigFloat::from_i64(x, PRECISION))
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        let (sign, digits) = x.to_u64_digits();
        let base = BigFloat::from_f64(18446744073709551616.0, PRECISION);
        let mut acc = BigFloat::from_word(0, PRECISION);
        for &d in digits.iter().rev() {
            acc = acc.mul(&base, PRECISION, RM).add(&BigFloat::from_word(d, PRECISION), PRECISION, RM);
        }
        if sign == num_bigint::Sign::Minus {
            acc = BigFloat::neg(&acc);
        }
        Real(acc)
    }

    pub fn from_rational(x: &BigRational) -> Self {
        Self::from_bigint(x.numer()) / Self::from_bigint(x.denom())
    }

    pub fn pi() -> Self {
        Real(with_consts(|cc| cc.pi(PRECISION, RM)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_finite(&self) -> bool {
        !self.0.is_nan() && !self.0.is_inf()
    }

    pub fn abs(&self) -> Self {
        Real(self.0.abs())
    }

    pub fn powi(&self, k: usize) -> Self {
        Real(self.0.powi(k, PRECISION, RM))
    }

    pub fn sqrt(&self) -> Self {
        Real(self.0.sqrt(PRECISION, RM))
    }

    pub fn exp(&self) -> Self {
        Real(with_consts(|cc| self.0.exp(PRECISION, RM, cc)))
    }

    pub fn ln(&self) -> Self {
        Real(with_consts(|cc| self.0.ln(PRECISION, RM, cc)))
    }

    pub fn sin(&self) -> Self {
        Real(with_consts(|cc| self.0.sin(PRECISION, RM, cc)))
    }

    pub fn cos(&self) -> Self {
        Real(with_consts(|cc| self.0.cos(PRECISION, RM, cc)))
    }

    pub fn cosh(&self) -> Self {
        Real(with_consts(|cc| self.0.cosh(PRECISION, RM, cc)))
    }

    pub fn recip(&self) -> Self {
        Real(self.0.reciprocal(PRECISION, RM))
    }

    /// Nearest `f64` (truncated to the top mantissa word).
    pub fn to_f64(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, e, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let Some(&top) = words.last() else { return 0.0 };
        if top == 0 {
            return 0.0;
        }
        let next = if words.len() > 1 { words[words.len() - 2] } else { 0 };
        let m = top as f64 + next as f64 / 18446744073709551616.0;
        let v = m * 2f64.powi(e - 64);
        if sign == Sign::Neg {
            -v
        } else {
            v
        }
    }

    /// Decimal representation with the full working precision.
    pub fn to_decimal_string(&self) -> String {
        with_consts(|cc| self.0.format(Radix::Dec, RM, cc)).unwrap_or_else(|_| "NaN".into())
    }

    pub fn parse(s: &str) -> Option<Self> {
        let x = with_consts(|cc| BigFloat::parse(s, Radix::Dec, PRECISION, RM, cc));
        (!x.is_nan()).then_some(Real(x))
    }
}

impl From<f64> for Real {
    fn from(x: f64) -> Self {
        Real::from_f64(x)
    }
}

impl From<i64> for Real {
    fn from(x: i64) -> Self {
        Real::from_i64(x)
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $m:ident) => {
        impl $tr<&Real> for &Real {
            type Output = Real;
            fn $f(self, rhs: &Real) -> Real {
                Real(self.0.$m(&rhs.0, PRECISION, RM))
            }
        }
        impl $tr<Real> for Real {
            type Output = Real;
            fn $f(self, rhs: Real) -> Real {
                Real(self.0.$m(&rhs.0, PRECISION, RM))
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $f(self, rhs: &Real) -> Real {
                Real(self.0.$m(&rhs.0, PRECISION, RM))
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $f(self, rhs: Real) -> Real {
                Real(self.0.$m(&rhs.0, PRECISION, RM))
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real(BigFloat::neg(&self.0))
    }
}

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        self.0 = self.0.add(&rhs.0, PRECISION, RM);
    }
}

impl SubAssign<&Real> for Real {
    fn sub_assign(&mut self, rhs: &Real) {
        self.0 = self.0.sub(&rhs.0, PRECISION, RM);
    }
}

impl MulAssign<&Real> for Real {
    fn mul_assign(&mut self, rhs: &Real) {
        self.0 = self.0.mul(&rhs.0, PRECISION, RM);
    }
}

/// `|a - b| / max(|b|, tiny)` as `f64`.
pub fn rel_diff(a: &Real, b: &Real) -> f64 {
    let d = (a - b).abs().to_f64();
    let s = b.abs().to_f64();
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_conversions() {
        let pi = Real::pi();
        assert_eq!(pi.to_f64(), std::f64::consts::PI);
        assert!(pi.sin().abs().to_f64() < 1e-100);
        let third = Real::from_rational(&BigRational::new(1.into(), 3.into()));
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-17);
        let big = BigInt::from(10).pow(40) + BigInt::from(7);
        let r = Real::from_bigint(&-big.clone());
        assert!((r.to_f64() + 1e40).abs() < 1e25);
        assert_eq!((Real::from_i64(3) * Real::from_i64(-4)).to_f64(), -12.0);
        assert_eq!(Real::zero().to_f64(), 0.0);
        let x = Real::parse("2.5").unwrap();
        assert_eq!(x.to_f64(), 2.5);
        assert!(Real::from_f64(0.25).to_f64() == 0.25);
    }

    #[test]
    fn transcendental() {
        let x = Real::from_f64(0.7);
        assert!((x.exp().ln() - &x).abs().to_f64() < 1e-100);
        let c = x.cos();
        let s = x.sin();
        assert!((&c * &c + &s * &s - Real::one()).abs().to_f64() < 1e-100);
        assert!((x.cosh().to_f64() - 0.7f64.cosh()).abs() < 1e-15);
    }
}
