//! Double-double reals (about 106 bits of mantissa).
//!
//! Used wherever a phase `n * beta` has to be reduced mod 1 for large `n`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DD {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DD {
    pub const ZERO: DD = DD { hi: 0.0, lo: 0.0 };

    pub fn new(hi: f64, lo: f64) -> DD {
        let (hi, lo) = two_sum(hi, lo);
        DD { hi, lo }
    }

    pub fn from_f64(x: f64) -> DD {
        DD { hi: x, lo: 0.0 }
    }

    /// Exact for |n| < 2^106.
    pub fn from_i128(n: i128) -> DD {
        let hi = n as f64;
        let rest = n - hi as i128;
        DD::new(hi, rest as f64)
    }

    /// Nearest double-double to an exact rational.
    pub fn from_rational(x: &BigRational) -> DD {
        let hi = ratio_to_f64(x);
        if !hi.is_finite() || hi == 0.0 {
            return DD::from_f64(hi);
        }
        let rest = x - BigRational::from_float(hi).expect("finite");
        DD::new(hi, ratio_to_f64(&rest))
    }

    /// `p / q` for integers, rounded to double-double.
    pub fn ratio(p: i128, q: i128) -> DD {
        DD::from_i128(p) / DD::from_i128(q)
    }

    /// Parses a decimal literal such as `-0.000123` or `1e-7` exactly, then rounds.
    pub fn parse(s: &str) -> Option<DD> {
        parse_decimal(s).map(|r| DD::from_rational(&r))
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Exact value of the pair as a rational.
    pub fn to_rational(self) -> BigRational {
        BigRational::from_float(self.hi).unwrap_or_else(BigRational::zero)
            + BigRational::from_float(self.lo).unwrap_or_else(BigRational::zero)
    }

    pub fn mul_f64(self, b: f64) -> DD {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }

    pub fn floor(self) -> DD {
        let hi = self.hi.floor();
        if hi == self.hi {
            let lo = self.lo.floor();
            let (hi, lo) = quick_two_sum(hi, lo);
            DD { hi, lo }
        } else {
            DD { hi, lo: 0.0 }
        }
    }

    /// Fractional part in `[0, 1)`.
    pub fn frac(self) -> DD {
        let f = self - self.floor();
        if f.hi >= 1.0 {
            f - DD::from_f64(1.0)
        } else if f.hi < 0.0 {
            f + DD::from_f64(1.0)
        } else {
            f
        }
    }

    /// Representative of `self mod 1` in `[-1/2, 1/2)`, rounded to f64.
    pub fn centered_frac(self) -> f64 {
        let f = self.frac();
        let x = f.to_f64();
        if x >= 0.5 {
            (f - DD::from_f64(1.0)).to_f64()
        } else {
            x
        }
    }

    pub fn abs(self) -> DD {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> DD {
        if self.hi <= 0.0 {
            return DD::ZERO;
        }
        let s = self.hi.sqrt();
        let (p, e) = two_prod(s, s);
        let r = (self - DD::new(p, e)).to_f64();
        DD::new(s, r / (2.0 * s))
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0 && self.lo == 0.0
    }
}

impl Add for DD {
    type Output = DD;
    fn add(self, b: DD) -> DD {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        DD { hi, lo }
    }
}

impl Sub for DD {
    type Output = DD;
    fn sub(self, b: DD) -> DD {
        self + (-b)
    }
}

impl Neg for DD {
    type Output = DD;
    fn neg(self) -> DD {
        DD { hi: -self.hi, lo: -self.lo }
    }
}

impl Mul for DD {
    type Output = DD;
    fn mul(self, b: DD) -> DD {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        DD { hi, lo }
    }
}

impl std::ops::Div for DD {
    type Output = DD;
    fn div(self, b: DD) -> DD {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        DD::new(q1, q2) + DD::from_f64(q3)
    }
}

impl PartialOrd for DD {
    fn partial_cmp(&self, other: &DD) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            o => o,
        }
    }
}

pub(crate) fn ratio_to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 9.0e15 && d < 9.0e15 {
            return n / d;
        }
    }
    // scale to keep 64 significant bits in the quotient
    let nb = x.numer().abs().bits() as i64;
    let db = x.denom().bits() as i64;
    let shift = 64 - (nb - db);
    let q: BigInt = if shift >= 0 {
        (x.numer() << shift as usize) / x.denom()
    } else {
        x.numer() / (x.denom() << (-shift) as usize)
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// Exact rational value of a decimal literal (optional sign, fraction, exponent).
pub fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = match mant.find('.') {
        Some(i) => (&mant[..i], &mant[i + 1..]),
        None => (mant, ""),
    };
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{}{}0", ip, fp).parse().ok()?;
    let digits = digits / BigInt::from(10);
    let e = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let r = if e >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, e as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-e) as usize))
    };
    Some(if neg { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_of_large_multiple_keeps_precision() {
        let beta = DD::ratio(1, 3);
        let x = beta.mul_f64(3.0e7 + 1.0);
        assert!((x.frac().to_f64() - 1.0 / 3.0).abs() < 1e-20);
    }

    #[test]
    fn sqrt2_squared() {
        let s = DD::from_f64(2.0).sqrt();
        let e = (s * s - DD::from_f64(2.0)).to_f64();
        assert!(e.abs() < 1e-30);
    }

    #[test]
    fn parse_roundtrip() {
        let d = DD::parse("-1.25e-3").unwrap();
        assert_eq!(d.to_f64(), -0.00125);
        assert!(DD::parse("abc").is_none());
        let t = DD::parse("0.1").unwrap();
        assert!((t - DD::ratio(1, 10)).to_f64().abs() < 1e-32);
    }

    #[test]
    fn centered_frac_range() {
        for k in 0..100 {
            let x = DD::ratio(k * 7 - 300, 13).centered_frac();
            assert!((-0.5..0.5).contains(&x));
        }
    }
}
