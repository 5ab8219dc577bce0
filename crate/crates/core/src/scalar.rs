//! Dual-mode scalar arithmetic.
//!
//! [`Scalar`] is either exact or binary64. The exact side is the field
//! ℚ(√2): a value is stored as `a + b·√2` with `a`, `b` arbitrary-precision
//! rationals in lowest terms (the `b = 0` case collapses to a plain
//! rational). That extension is exactly what unit-normalized complex frames
//! need: a vector `(x - iJx)/√2` over a rational basis has coordinates in
//! ℚ(√2), so structure constants like `i/√2` stay exactly representable.
//!
//! Mixing an exact value with a float promotes the result to float. Exact
//! values never degrade on their own; the one operation that can force an
//! irrational result, [`Scalar::sqrt_exact`], reports failure instead of
//! promoting and leaves the policy to the caller.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Arithmetic mode of a scalar or of a whole computation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarMode {
    Exact,
    Float,
}

/// What to do when an exact computation hits an operation (typically a square
/// root outside ℚ(√2)) that has no exact representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ArithmeticPolicy {
    /// Silently degrade the affected values to binary64 and continue.
    #[default]
    Auto,
    /// Fail with [`Error::ExactnessLost`](crate::Error::ExactnessLost).
    RequireExact,
}

/// A real scalar: exact element of ℚ(√2), or a binary64 float.
#[derive(Clone, Debug)]
pub enum Scalar {
    /// Exact rational, lowest terms, positive denominator.
    Rational(BigRational),
    /// Exact `a + b·√2` with `b != 0`.
    Sqrt2 { a: BigRational, b: BigRational },
    /// Binary64.
    Float(f64),
}

fn big(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Collapse `a + b·√2` to the plain rational variant when `b = 0`.
fn sqrt2_normalized(a: BigRational, b: BigRational) -> Scalar {
    if b.is_zero() {
        Scalar::Rational(a)
    } else {
        Scalar::Sqrt2 { a, b }
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rational(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Rational(big(n))
    }

    /// Exact `p/q`. Panics if `q = 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Scalar::Rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    /// Exact `1/√2` (= `√2/2`), the frame normalization factor.
    pub fn inv_sqrt2() -> Self {
        Scalar::Sqrt2 {
            a: BigRational::zero(),
            b: BigRational::new(BigInt::from(1), BigInt::from(2)),
        }
    }

    /// Exact `√2`.
    pub fn sqrt2() -> Self {
        Scalar::Sqrt2 {
            a: BigRational::zero(),
            b: BigRational::one(),
        }
    }

    pub fn mode(&self) -> ScalarMode {
        match self {
            Scalar::Float(_) => ScalarMode::Float,
            _ => ScalarMode::Exact,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.mode() == ScalarMode::Exact
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rational(r) => r.is_zero(),
            // Normalization keeps b != 0, and a + b√2 = 0 with b != 0 is
            // impossible over ℚ.
            Scalar::Sqrt2 { .. } => false,
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rational(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::Sqrt2 { a, b } => {
                a.to_f64().unwrap_or(f64::NAN) + b.to_f64().unwrap_or(f64::NAN) * SQRT_2
            }
            Scalar::Float(x) => *x,
        }
    }

    /// Degrade to float mode (identity on floats).
    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_f64())
    }

    /// Sign of the value: -1, 0 or 1. Exact for exact variants.
    pub fn sign(&self) -> i32 {
        match self {
            Scalar::Rational(r) => {
                if r.is_zero() {
                    0
                } else if r.is_positive() {
                    1
                } else {
                    -1
                }
            }
            Scalar::Sqrt2 { a, b } => {
                let sa = if a.is_zero() {
                    0
                } else if a.is_positive() {
                    1
                } else {
                    -1
                };
                let sb = if b.is_positive() { 1 } else { -1 };
                if sa == 0 {
                    return sb;
                }
                if sa == sb {
                    return sa;
                }
                // Signs differ: compare a^2 with 2 b^2.
                let a2 = a * a;
                let b2 = b * b * big(2);
                match a2.cmp(&b2) {
                    Ordering::Greater => sa,
                    Ordering::Less => sb,
                    // a^2 = 2 b^2 would make √2 rational.
                    Ordering::Equal => unreachable!("a + b*sqrt2 = 0 with b != 0"),
                }
            }
            Scalar::Float(x) => {
                if *x > 0.0 {
                    1
                } else if *x < 0.0 {
                    -1
                } else {
                    0
                }
            }
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.sign() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact square root when the value stays inside ℚ(√2) (a rational whose
    /// square-free part is 1 or 2), `None` otherwise. Floats always succeed.
    pub fn sqrt_exact(&self) -> Option<Scalar> {
        match self {
            Scalar::Rational(r) => {
                match r.cmp(&BigRational::zero()) {
                    Ordering::Less => None,
                    Ordering::Equal => Some(Scalar::zero()),
                    Ordering::Greater => {
                        // √(p/q) = √(pq)/q with p, q > 0 coprime.
                        let p = r.numer().clone();
                        let q = r.denom().clone();
                        let target = &p * &q;
                        let s = target.sqrt();
                        if &s * &s == target {
                            return Some(Scalar::Rational(BigRational::new(s, q)));
                        }
                        let two = BigInt::from(2);
                        if (&target % &two).is_zero() {
                            let half = &target / &two;
                            let s = half.sqrt();
                            if &s * &s == half {
                                return Some(sqrt2_normalized(
                                    BigRational::zero(),
                                    BigRational::new(s, q),
                                ));
                            }
                        }
                        None
                    }
                }
            }
            Scalar::Sqrt2 { .. } => None,
            Scalar::Float(x) => Some(Scalar::Float(x.sqrt())),
        }
    }

    /// Square root, degrading to float when no exact form exists.
    pub fn sqrt_lossy(&self) -> Scalar {
        self.sqrt_exact()
            .unwrap_or_else(|| Scalar::Float(self.to_f64().sqrt()))
    }

    /// Multiplicative inverse. Panics on exact zero; instrumentation paths
    /// guard zero divisors through pivoting before dividing.
    pub fn recip(&self) -> Scalar {
        match self {
            Scalar::Rational(r) => {
                assert!(!r.is_zero(), "division by exact zero");
                Scalar::Rational(r.recip())
            }
            Scalar::Sqrt2 { a, b } => {
                // (a + b√2)^{-1} = (a - b√2)/(a^2 - 2 b^2); the denominator is
                // nonzero because √2 is irrational.
                let d = a * a - b * b * big(2);
                sqrt2_normalized(a / &d, -(b / &d))
            }
            Scalar::Float(x) => Scalar::Float(1.0 / x),
        }
    }

    /// Parse an exact scalar: integers `"-3"`, fractions `"5/4"`, and finite
    /// decimals `"1.25"` (read as exact rationals).
    pub fn parse_exact(text: &str) -> Result<Scalar> {
        let s = text.trim();
        let bad = || Error::Parse(format!("not a rational literal: {text:?}"));
        if s.is_empty() {
            return Err(bad());
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {text:?}")));
            }
            return Ok(Scalar::Rational(BigRational::new(p, q)));
        }
        if let Some((whole, frac)) = s.split_once('.') {
            let neg = whole.trim_start().starts_with('-');
            let w: BigInt = if whole == "-" || whole.is_empty() {
                BigInt::zero()
            } else {
                whole.parse().map_err(|_| bad())?
            };
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let digits: BigInt = frac.parse().map_err(|_| bad())?;
            let scale = BigInt::from(10u32).pow(frac.len() as u32);
            let mag = w.magnitude().clone();
            let value = BigRational::new(BigInt::from(mag), BigInt::one())
                + BigRational::new(digits, scale);
            return Ok(Scalar::Rational(if neg { -value } else { value }));
        }
        let n: BigInt = s.parse().map_err(|_| bad())?;
        Ok(Scalar::Rational(BigRational::from_integer(n)))
    }

    /// The rational part pair `(a, b)` for `a + b·√2`; `None` for floats.
    pub fn exact_parts(&self) -> Option<(BigRational, BigRational)> {
        match self {
            Scalar::Rational(r) => Some((r.clone(), BigRational::zero())),
            Scalar::Sqrt2 { a, b } => Some((a.clone(), b.clone())),
            Scalar::Float(_) => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rational(r) => Some(r),
            _ => None,
        }
    }
}

fn binop(
    lhs: &Scalar,
    rhs: &Scalar,
    exact: impl Fn(&BigRational, &BigRational, &BigRational, &BigRational) -> Scalar,
    float: impl Fn(f64, f64) -> f64,
) -> Scalar {
    if let (Some((a1, b1)), Some((a2, b2))) = (lhs.exact_parts(), rhs.exact_parts()) {
        exact(&a1, &b1, &a2, &b2)
    } else {
        Scalar::Float(float(lhs.to_f64(), rhs.to_f64()))
    }
}

impl Add for &Scalar {
    type Output = Scalar;
    fn add(self, rhs: &Scalar) -> Scalar {
        binop(
            self,
            rhs,
            |a1, b1, a2, b2| sqrt2_normalized(a1 + a2, b1 + b2),
            |x, y| x + y,
        )
    }
}

impl Sub for &Scalar {
    type Output = Scalar;
    fn sub(self, rhs: &Scalar) -> Scalar {
        binop(
            self,
            rhs,
            |a1, b1, a2, b2| sqrt2_normalized(a1 - a2, b1 - b2),
            |x, y| x - y,
        )
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        // Cheap exits keep sparse tensor contractions fast.
        if self.is_zero() || rhs.is_zero() {
            if self.mode() == ScalarMode::Float || rhs.mode() == ScalarMode::Float {
                return Scalar::Float(0.0);
            }
            return Scalar::zero();
        }
        binop(
            self,
            rhs,
            |a1, b1, a2, b2| {
                sqrt2_normalized(a1 * a2 + b1 * b2 * big(2), a1 * b2 + b1 * a2)
            },
            |x, y| x * y,
        )
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        if let Scalar::Float(y) = rhs {
            return Scalar::Float(self.to_f64() / y);
        }
        self * &rhs.recip()
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rational(r) => Scalar::Rational(-r),
            Scalar::Sqrt2 { a, b } => Scalar::Sqrt2 { a: -a, b: -b },
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

macro_rules! forward_value_ops {
    ($($trait:ident, $method:ident;)*) => {$(
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                $trait::$method(&self, rhs)
            }
        }
    )*};
}
forward_value_ops! {
    Add, add;
    Sub, sub;
    Mul, mul;
    Div, div;
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self.exact_parts(), other.exact_parts()) {
            (Some((a1, b1)), Some((a2, b2))) => a1 == a2 && b1 == b2,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_exact() && other.is_exact() {
            Some(match (self - other).sign() {
                1 => Ordering::Greater,
                -1 => Ordering::Less,
                _ => Ordering::Equal,
            })
        } else {
            self.to_f64().partial_cmp(&other.to_f64())
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Sqrt2 { a, b } => {
                if a.is_zero() {
                    write!(f, "({})*sqrt2", b)
                } else {
                    write!(f, "({}) + ({})*sqrt2", a, b)
                }
            }
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Complex scalar over [`Scalar`]; both parts always share one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexScalar {
    pub re: Scalar,
    pub im: Scalar,
}

impl ComplexScalar {
    pub fn new(re: Scalar, im: Scalar) -> Self {
        let mut z = ComplexScalar { re, im };
        z.coerce_modes();
        z
    }

    fn coerce_modes(&mut self) {
        if self.re.mode() != self.im.mode() {
            self.re = self.re.to_float();
            self.im = self.im.to_float();
        }
    }

    pub fn zero() -> Self {
        ComplexScalar::new(Scalar::zero(), Scalar::zero())
    }

    pub fn one() -> Self {
        ComplexScalar::new(Scalar::one(), Scalar::zero())
    }

    pub fn i() -> Self {
        ComplexScalar::new(Scalar::zero(), Scalar::one())
    }

    pub fn from_real(re: Scalar) -> Self {
        ComplexScalar::new(re, Scalar::zero())
    }

    pub fn from_f64(re: f64, im: f64) -> Self {
        ComplexScalar::new(Scalar::Float(re), Scalar::Float(im))
    }

    pub fn conj(&self) -> Self {
        ComplexScalar::new(self.re.clone(), -&self.im)
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_exact(&self) -> bool {
        self.re.is_exact() && self.im.is_exact()
    }

    pub fn mode(&self) -> ScalarMode {
        if self.is_exact() {
            ScalarMode::Exact
        } else {
            ScalarMode::Float
        }
    }

    pub fn to_float(&self) -> Self {
        ComplexScalar::new(self.re.to_float(), self.im.to_float())
    }

    /// Squared modulus `re^2 + im^2`, a real scalar.
    pub fn norm_sq(&self) -> Scalar {
        &(&self.re * &self.re) + &(&self.im * &self.im)
    }

    pub fn abs_f64(&self) -> f64 {
        let re = self.re.to_f64();
        let im = self.im.to_f64();
        (re * re + im * im).sqrt()
    }

    pub fn scale(&self, s: &Scalar) -> Self {
        ComplexScalar::new(&self.re * s, &self.im * s)
    }

    pub fn recip(&self) -> Self {
        let n = self.norm_sq();
        ComplexScalar::new(&self.re / &n, &(-&self.im) / &n)
    }
}

impl Add for &ComplexScalar {
    type Output = ComplexScalar;
    fn add(self, rhs: &ComplexScalar) -> ComplexScalar {
        ComplexScalar::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &ComplexScalar {
    type Output = ComplexScalar;
    fn sub(self, rhs: &ComplexScalar) -> ComplexScalar {
        ComplexScalar::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &ComplexScalar {
    type Output = ComplexScalar;
    fn mul(self, rhs: &ComplexScalar) -> ComplexScalar {
        if self.is_zero() || rhs.is_zero() {
            if self.mode() == ScalarMode::Float || rhs.mode() == ScalarMode::Float {
                return ComplexScalar::from_f64(0.0, 0.0);
            }
            return ComplexScalar::zero();
        }
        ComplexScalar::new(
            &(&self.re * &rhs.re) - &(&self.im * &rhs.im),
            &(&self.re * &rhs.im) + &(&self.im * &rhs.re),
        )
    }
}

impl Div for &ComplexScalar {
    type Output = ComplexScalar;
    fn div(self, rhs: &ComplexScalar) -> ComplexScalar {
        self * &rhs.recip()
    }
}

impl Neg for &ComplexScalar {
    type Output = ComplexScalar;
    fn neg(self) -> ComplexScalar {
        ComplexScalar::new(-&self.re, -&self.im)
    }
}

macro_rules! forward_complex_ops {
    ($($trait:ident, $method:ident;)*) => {$(
        impl $trait for ComplexScalar {
            type Output = ComplexScalar;
            fn $method(self, rhs: ComplexScalar) -> ComplexScalar {
                $trait::$method(&self, &rhs)
            }
        }
    )*};
}
forward_complex_ops! {
    Add, add;
    Sub, sub;
    Mul, mul;
    Div, div;
}

impl Neg for ComplexScalar {
    type Output = ComplexScalar;
    fn neg(self) -> ComplexScalar {
        -&self
    }
}

impl fmt::Display for ComplexScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + ({})i", self.re, self.im)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_stay_reduced_with_positive_denominator() {
        let x = Scalar::ratio(4, -6);
        match &x {
            Scalar::Rational(r) => {
                assert_eq!(r.numer().to_string(), "-2");
                assert_eq!(r.denom().to_string(), "3");
            }
            other => panic!("expected rational, got {other:?}"),
        }
        let y = &x + &Scalar::ratio(2, 3);
        assert!(y.is_zero());
    }

    #[test]
    fn sqrt2_field_is_closed() {
        let r = Scalar::inv_sqrt2(); // √2/2
        let two = &(&r * &r) + &(&r * &r); // 1/2 + 1/2
        assert_eq!(two, Scalar::one());
        let s = &Scalar::int(1) + &r;
        let inv = s.recip();
        assert_eq!(&s * &inv, Scalar::one());
        assert!(inv.is_exact());
    }

    #[test]
    fn sqrt2_sign_is_exact() {
        // 3 - 2√2 > 0, 1 - √2 < 0.
        let x = &Scalar::int(3) - &(&Scalar::int(2) * &(&Scalar::inv_sqrt2() * &Scalar::int(2)));
        assert_eq!(x.sign(), 1);
        let y = &Scalar::int(1) - &(&Scalar::inv_sqrt2() * &Scalar::int(2));
        assert_eq!(y.sign(), -1);
    }

    #[test]
    fn mixed_mode_promotes_to_float() {
        let z = &Scalar::ratio(1, 3) + &Scalar::float(0.5);
        assert_eq!(z.mode(), ScalarMode::Float);
        assert!((z.to_f64() - (1.0 / 3.0 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn sqrt_exact_recognizes_squares_and_doubled_squares() {
        assert_eq!(Scalar::ratio(9, 4).sqrt_exact().unwrap(), Scalar::ratio(3, 2));
        assert_eq!(Scalar::int(2).sqrt_exact().unwrap(), &Scalar::int(2) * &Scalar::inv_sqrt2());
        assert_eq!(
            Scalar::ratio(1, 2).sqrt_exact().unwrap(),
            Scalar::inv_sqrt2()
        );
        assert!(Scalar::int(3).sqrt_exact().is_none());
        assert!(Scalar::int(-1).sqrt_exact().is_none());
    }

    #[test]
    fn parse_exact_reads_fractions_and_decimals() {
        assert_eq!(Scalar::parse_exact("-3/4").unwrap(), Scalar::ratio(-3, 4));
        assert_eq!(Scalar::parse_exact("2").unwrap(), Scalar::int(2));
        assert_eq!(Scalar::parse_exact("1.1").unwrap(), Scalar::ratio(11, 10));
        assert_eq!(Scalar::parse_exact("-0.25").unwrap(), Scalar::ratio(-1, 4));
        assert!(Scalar::parse_exact("1/0").is_err());
        assert!(Scalar::parse_exact("x").is_err());
    }

    #[test]
    fn complex_conjugation_is_an_involution_and_norm_nonnegative() {
        let z = ComplexScalar::new(Scalar::ratio(3, 5), Scalar::inv_sqrt2());
        assert_eq!(z.conj().conj(), z);
        assert!(z.norm_sq().sign() >= 0);
        let w = &z * &z.recip();
        assert_eq!(w, ComplexScalar::one());
    }

    #[test]
    fn complex_parts_share_a_mode() {
        let z = ComplexScalar::new(Scalar::int(1), Scalar::float(2.0));
        assert_eq!(z.re.mode(), ScalarMode::Float);
        assert_eq!(z.mode(), ScalarMode::Float);
    }
}
