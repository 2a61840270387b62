//! Real numbers for symbolic dynamics: exact elements of a real quadratic
//! field, or rational enclosures of a value known to finite precision.
//!
//! Sturmian words are defined pointwise by floors, so every floor and every
//! comparison here either returns the exact answer or fails with
//! [`Error::PrecisionExhausted`]. Nothing is rounded to a side.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Working precision for decimal input.
pub const DEFAULT_PRECISION_BITS: u32 = 256;

/// An enclosed value closer than `2^-ENDPOINT_GUARD_BITS` to a decision
/// point (an integer for floors, zero for signs) is rejected.
pub const ENDPOINT_GUARD_BITS: u32 = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum Real {
    /// `a + b·√d`. Rationals carry `b = 0, d = 0`; otherwise `d` is not a
    /// perfect square.
    Exact {
        a: BigRational,
        b: BigRational,
        d: BigInt,
    },
    /// A value known only to lie in `[lo, hi]`, with `lo < hi`.
    Enclosed { lo: BigRational, hi: BigRational },
}

fn ratio(n: impl Into<BigInt>, d: impl Into<BigInt>) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(bits: u32) -> BigInt {
    BigInt::one() << bits as usize
}

fn guard() -> BigRational {
    BigRational::new(BigInt::one(), pow2(ENDPOINT_GUARD_BITS))
}

/// Approximate log2 of a positive rational, good to a bit or two.
fn log2_approx(x: &BigRational) -> i64 {
    x.numer().bits() as i64 - x.denom().bits() as i64
}

/// Splits `n = s^2 * r` by trial division with small primes.
fn square_part(n: &BigInt) -> (BigInt, BigInt) {
    let mut rest = n.clone();
    let mut s = BigInt::one();
    let mut p = BigInt::from(2u32);
    let limit = BigInt::from(100_000u32);
    while &p * &p <= rest && p <= limit {
        let p2 = &p * &p;
        while (&rest % &p2).is_zero() {
            rest /= &p2;
            s *= &p;
        }
        p += 1u32;
    }
    (s, rest)
}

fn exact_sign(a: &BigRational, b: &BigRational, d: &BigInt) -> Ordering {
    let sa = a.cmp(&BigRational::zero());
    let sb = b.cmp(&BigRational::zero());
    if sb == Ordering::Equal || d.is_zero() {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    let a2 = a * a;
    let b2d = b * b * BigRational::from_integer(d.clone());
    match a2.cmp(&b2d) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => Ordering::Equal,
    }
}

fn exact_floor(a: &BigRational, b: &BigRational, d: &BigInt) -> BigInt {
    if b.is_zero() || d.is_zero() {
        return a.floor().to_integer();
    }
    let c = a.denom().lcm(b.denom());
    let big_a = a.numer() * (&c / a.denom());
    let big_b = b.numer() * (&c / b.denom());
    let sq = &big_b * &big_b * d;
    let s = sq.sqrt();
    // floor(B·√d)
    let r = if big_b.is_positive() {
        s
    } else if &s * &s == sq {
        -s
    } else {
        -s - 1
    };
    (big_a + r).div_floor(&c)
}

impl Real {
    pub fn from_integer(n: i64) -> Self {
        Self::rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Self::rational(ratio(num, den)))
    }

    pub fn rational(q: BigRational) -> Self {
        Real::Exact {
            a: q,
            b: BigRational::zero(),
            d: BigInt::zero(),
        }
    }

    /// `a + b·√d` with square factors of `d` pulled into `b`.
    pub fn quadratic(a: BigRational, b: BigRational, d: BigInt) -> Result<Self> {
        if d.is_negative() {
            return Err(Error::Domain("negative radicand".into()));
        }
        if b.is_zero() || d.is_zero() {
            return Ok(Self::rational(a));
        }
        let (s, rest) = square_part(&d);
        let b = b * BigRational::from_integer(s);
        let root = rest.sqrt();
        if &root * &root == rest {
            return Ok(Self::rational(a + b * BigRational::from_integer(root)));
        }
        Ok(Real::Exact { a, b, d: rest })
    }

    /// (√5 − 1)/2.
    pub fn golden() -> Self {
        Real::Exact {
            a: ratio(-1, 2),
            b: ratio(1, 2),
            d: BigInt::from(5),
        }
    }

    /// √2 − 1.
    pub fn silver() -> Self {
        Real::Exact {
            a: ratio(-1, 1),
            b: ratio(1, 1),
            d: BigInt::from(2),
        }
    }

    /// Parses a decimal (`0.618`, `-1.5e-3`) or a ratio (`3/7`).
    ///
    /// Ratios are exact. Decimals are rounded to `bits` fractional bits and
    /// enclosed with a one-ulp radius, i.e. the digits are taken as an
    /// approximation of a value known to working precision.
    pub fn parse(s: &str, bits: u32) -> Result<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad numerator in {s:?}")))?;
            let d: BigInt = d
                .trim()
                .parse()
                .map_err(|_| Error::Domain(format!("bad denominator in {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Domain("zero denominator".into()));
            }
            return Ok(Self::rational(BigRational::new(n, d)));
        }
        let value = parse_decimal(s)?;
        Ok(Self::round_to_bits(&value, bits))
    }

    fn round_to_bits(value: &BigRational, bits: u32) -> Self {
        let scale = BigRational::from_integer(pow2(bits));
        let m = (value * &scale).round().to_integer();
        let lo = BigRational::new(&m - 1, pow2(bits));
        let hi = BigRational::new(&m + 1, pow2(bits));
        Real::Enclosed { lo, hi }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Real::Exact { .. })
    }

    /// Lower and upper rational bounds. Exact irrationals are enclosed at
    /// `bits` fractional bits.
    pub fn enclose(&self, bits: u32) -> (BigRational, BigRational) {
        match self {
            Real::Exact { a, b, d } if b.is_zero() || d.is_zero() => (a.clone(), a.clone()),
            Real::Exact { a, b, d } => {
                let scale = BigRational::from_integer(pow2(bits));
                let f = exact_floor(&(a * &scale), &(b * &scale), d);
                (
                    BigRational::new(f.clone(), pow2(bits)),
                    BigRational::new(f + 1, pow2(bits)),
                )
            }
            Real::Enclosed { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    fn width_bits(&self) -> u32 {
        match self {
            Real::Exact { .. } => 0,
            Real::Enclosed { lo, hi } => {
                let w = hi - lo;
                (-log2_approx(&w)).max(0) as u32
            }
        }
    }

    fn combine_bits(&self, other: &Real) -> u32 {
        (self.width_bits().max(other.width_bits()) + 64).max(2 * DEFAULT_PRECISION_BITS)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Real::Exact { a, b, d } => {
                let a = a.to_f64().unwrap_or(f64::NAN);
                let b = b.to_f64().unwrap_or(f64::NAN);
                let d = d.to_f64().unwrap_or(f64::NAN);
                a + b * d.sqrt()
            }
            Real::Enclosed { lo, hi } => ((lo + hi) / BigRational::from_integer(2.into()))
                .to_f64()
                .unwrap_or(f64::NAN),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Real::Exact { a, b, d } => Real::Exact {
                a: -a,
                b: -b,
                d: d.clone(),
            },
            Real::Enclosed { lo, hi } => Real::Enclosed { lo: -hi, hi: -lo },
        }
    }

    pub fn add(&self, other: &Real) -> Self {
        match (self, other) {
            (
                Real::Exact { a: a1, b: b1, d: d1 },
                Real::Exact { a: a2, b: b2, d: d2 },
            ) => {
                if b2.is_zero() || d2.is_zero() {
                    return Real::Exact { a: a1 + a2, b: b1.clone(), d: d1.clone() };
                }
                if b1.is_zero() || d1.is_zero() {
                    return Real::Exact { a: a1 + a2, b: b2.clone(), d: d2.clone() };
                }
                if d1 == d2 {
                    let b = b1 + b2;
                    if b.is_zero() {
                        return Self::rational(a1 + a2);
                    }
                    return Real::Exact { a: a1 + a2, b, d: d1.clone() };
                }
                let bits = self.combine_bits(other);
                let (l1, h1) = self.enclose(bits);
                let (l2, h2) = other.enclose(bits);
                Real::Enclosed { lo: l1 + l2, hi: h1 + h2 }
            }
            _ => {
                let bits = self.combine_bits(other);
                let (l1, h1) = self.enclose(bits);
                let (l2, h2) = other.enclose(bits);
                Real::Enclosed { lo: l1 + l2, hi: h1 + h2 }
            }
        }
    }

    pub fn sub(&self, other: &Real) -> Self {
        self.add(&other.neg())
    }

    pub fn mul_int(&self, n: &BigInt) -> Self {
        let q = BigRational::from_integer(n.clone());
        match self {
            Real::Exact { a, b, d } => {
                if n.is_zero() {
                    return Self::rational(BigRational::zero());
                }
                Real::Exact {
                    a: a * &q,
                    b: b * &q,
                    d: d.clone(),
                }
            }
            Real::Enclosed { lo, hi } => {
                if n.is_negative() {
                    Real::Enclosed { lo: hi * &q, hi: lo * &q }
                } else if n.is_zero() {
                    Self::rational(BigRational::zero())
                } else {
                    Real::Enclosed { lo: lo * &q, hi: hi * &q }
                }
            }
        }
    }

    pub fn add_int(&self, n: &BigInt) -> Self {
        self.add(&Self::rational(BigRational::from_integer(n.clone())))
    }

    /// Sign, i.e. comparison with zero.
    pub fn signum(&self) -> Result<Ordering> {
        match self {
            Real::Exact { a, b, d } => Ok(exact_sign(a, b, d)),
            Real::Enclosed { lo, hi } => {
                let g = guard();
                if *lo >= g {
                    Ok(Ordering::Greater)
                } else if *hi <= -g {
                    Ok(Ordering::Less)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "value within 2^-{ENDPOINT_GUARD_BITS} of zero"
                    )))
                }
            }
        }
    }

    pub fn cmp_real(&self, other: &Real) -> Result<Ordering> {
        self.sub(other).signum()
    }

    pub fn floor(&self) -> Result<BigInt> {
        match self {
            Real::Exact { a, b, d } => Ok(exact_floor(a, b, d)),
            Real::Enclosed { lo, hi } => {
                let k = lo.floor().to_integer();
                let kq = BigRational::from_integer(k.clone());
                let g = guard();
                let clear_below = lo - &kq >= g;
                let clear_above = (&kq + BigRational::one()) - hi >= g;
                if clear_below && clear_above {
                    Ok(k)
                } else {
                    Err(Error::PrecisionExhausted(format!(
                        "value within 2^-{ENDPOINT_GUARD_BITS} of the integer {}",
                        if clear_below { k + 1 } else { k }
                    )))
                }
            }
        }
    }

    pub fn ceil(&self) -> Result<BigInt> {
        Ok(-self.neg().floor()?)
    }

    /// Fractional part in `[0, 1)`.
    pub fn fract(&self) -> Result<Real> {
        let k = self.floor()?;
        Ok(self.add_int(&-k))
    }

    pub fn recip(&self) -> Result<Real> {
        match self {
            Real::Exact { a, b, d } => {
                let norm = a * a - b * b * BigRational::from_integer(d.clone());
                if norm.is_zero() {
                    return Err(Error::Domain("reciprocal of zero".into()));
                }
                Ok(Real::Exact {
                    a: a / &norm,
                    b: -(b / &norm),
                    d: d.clone(),
                })
            }
            Real::Enclosed { lo, hi } => {
                if lo.is_positive() || hi.is_negative() {
                    Ok(Real::Enclosed {
                        lo: hi.recip(),
                        hi: lo.recip(),
                    })
                } else {
                    Err(Error::PrecisionExhausted(
                        "enclosure straddles zero".into(),
                    ))
                }
            }
        }
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Real::Exact { a, b, d } if b.is_zero() || d.is_zero() => write!(f, "{a}"),
            Real::Exact { a, b, d } => write!(f, "{a} + {b}*sqrt({d})"),
            Real::Enclosed { .. } => write!(f, "~{}", self.to_f64()),
        }
    }
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || Error::Domain(format!("cannot parse {s:?} as a decimal"));
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        num = -num;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn golden_floors_match_float() {
        let g = Real::golden();
        for n in -200i64..200 {
            let x = g.mul_int(&int(n));
            let expect = (n as f64 * 0.618_033_988_749_894_9).floor() as i64;
            assert_eq!(x.floor().unwrap(), int(expect), "n = {n}");
        }
    }

    #[test]
    fn square_factors_are_normalized() {
        // (−2 + √8)/2 = √2 − 1
        let r = Real::quadratic(ratio(-1, 1), ratio(1, 2), int(8)).unwrap();
        assert_eq!(r, Real::silver());
        let q = Real::quadratic(ratio(1, 1), ratio(1, 1), int(9)).unwrap();
        assert_eq!(q, Real::from_integer(4));
    }

    #[test]
    fn recip_of_golden_is_golden_plus_one() {
        let g = Real::golden();
        let r = g.recip().unwrap();
        assert_eq!(r, g.add_int(&int(1)));
    }

    #[test]
    fn decimal_enclosure_contains_value() {
        let r = Real::parse("0.25", 64).unwrap();
        let (lo, hi) = r.enclose(64);
        assert!(lo < ratio(1, 4) && ratio(1, 4) < hi);
        assert_eq!(r.floor().unwrap(), int(0));
        assert!(Real::parse("abc", 64).is_err());
        assert_eq!(Real::parse("3/12", 64).unwrap(), Real::from_ratio(1, 4).unwrap());
        assert!((Real::parse("-1.5e-3", 128).unwrap().to_f64() + 0.0015).abs() < 1e-15);
    }

    #[test]
    fn enclosed_floor_refuses_near_integer() {
        let r = Real::parse("1", 256).unwrap();
        assert!(matches!(r.floor(), Err(Error::PrecisionExhausted(_))));
        let r = Real::parse("1.5", 256).unwrap();
        assert_eq!(r.floor().unwrap(), int(1));
    }

    #[test]
    fn exact_integer_floor_is_exact() {
        // (n + 1)θ at n = −1 is exactly zero.
        let g = Real::golden();
        let z = g.mul_int(&int(-1)).add(&g);
        assert_eq!(z.floor().unwrap(), int(0));
        assert_eq!(z.ceil().unwrap(), int(0));
        assert_eq!(z.signum().unwrap(), Ordering::Equal);
    }

    #[test]
    fn mixed_fields_fall_back_to_enclosure() {
        let s = Real::golden().add(&Real::silver());
        assert!(!s.is_exact());
        assert_eq!(s.floor().unwrap(), int(1));
        assert!((s.to_f64() - (0.618_033_988_749_895 + 0.414_213_562_373_095)).abs() < 1e-14);
    }
}
