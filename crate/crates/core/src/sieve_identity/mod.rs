//! Combinatorial sieve identities checked in exact arithmetic.
//!
//! Squarefree divisors of 𝔓(z) are bitmasks over the ascending list of
//! sifting primes below `z`; bit 0 is the smallest prime, so `P⁻(d)` is the
//! lowest set bit. The empty mask is `d = 1` with `P⁻(1) = +∞`.

mod fsi;
mod harman;
mod vino;

pub use fsi::{buchstab_check, fsi_check, simple_sieve_decompose, Truncation};
pub use harman::{harman_decompose, harman_valid_splits};
pub use vino::{firstbase_decompose, rankin_tail, rho, vino_decompose, SiftRange, WeightedSeq};

use crate::arith::PrimeClass;
use crate::error::{ensure, Result};
use num_rational::BigRational;
use serde::Serialize;

pub const MAX_PRIMES: usize = 20;

/// Parameters `z, Z, D, M, M0, T` shared by the identity and kernel checks.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SieveParams {
    pub z: f64,
    pub big_z: f64,
    pub d: f64,
    pub m: f64,
    pub m0: f64,
    pub t: f64,
}

impl SieveParams {
    pub fn validate(&self) -> Result<()> {
        ensure!(self.z >= 2.0, Precondition, "z must be at least 2");
        ensure!(self.big_z >= self.z, Precondition, "Z must be at least z");
        ensure!(self.d >= self.z, Precondition, "D must be at least z");
        ensure!(self.m >= self.m0 && self.m0 >= 1.0, Precondition, "need M >= M0 >= 1");
        ensure!(self.t >= 1.0, Precondition, "T must be at least 1");
        Ok(())
    }
}

/// Squarefree divisors of 𝔓(z) as bitmasks.
#[derive(Clone, Debug)]
pub struct Lattice {
    pub primes: Vec<u64>,
    values: Vec<u128>,
}

impl Lattice {
    pub fn new(z: f64, cls: &PrimeClass) -> Result<Self> {
        let primes = cls.primes_below(z);
        Self::from_primes(primes)
    }

    pub fn from_primes(primes: Vec<u64>) -> Result<Self> {
        ensure!(primes.len() <= MAX_PRIMES, Resource, "{} sifting primes give more than 2^{MAX_PRIMES} divisors", primes.len());
        let mut values = vec![1u128; 1 << primes.len()];
        for mask in 1..values.len() {
            let i = mask.trailing_zeros() as usize;
            let v = values[mask & (mask - 1)].checked_mul(primes[i] as u128);
            ensure!(v.is_some(), Resource, "product of sifting primes overflows 128 bits");
            values[mask] = v.expect("checked");
        }
        Ok(Lattice { primes, values })
    }

    pub fn k(&self) -> usize {
        self.primes.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn value(&self, mask: usize) -> u128 {
        self.values[mask]
    }

    #[inline]
    pub fn mu_neg(mask: usize) -> bool {
        mask.count_ones() % 2 == 1
    }

    /// Index of `P⁻(d)`; `k` for the empty mask.
    #[inline]
    pub fn low(&self, mask: usize) -> usize {
        if mask == 0 {
            self.k()
        } else {
            mask.trailing_zeros() as usize
        }
    }

    /// `P⁻(d)` as a real, `+∞` for `d = 1`.
    pub fn p_minus(&self, mask: usize) -> f64 {
        if mask == 0 {
            f64::INFINITY
        } else {
            self.primes[mask.trailing_zeros() as usize] as f64
        }
    }

    /// `M0 <= d < M0 P⁻(d)`.
    pub fn in_harman_range(&self, mask: usize, m0: f64) -> bool {
        let d = self.value(mask);
        ge(d, m0) && (mask == 0 || lt_product(d, m0, self.p_minus(mask)))
    }
}

/// `l >= x` exactly.
#[inline]
pub(crate) fn ge(l: u128, x: f64) -> bool {
    if x <= 0.0 {
        return true;
    }
    let c = x.ceil();
    if c >= 3.4e38 {
        return false;
    }
    l >= c as u128
}

/// `l < a b` exactly.
pub(crate) fn lt_product(l: u128, a: f64, b: f64) -> bool {
    if b.is_infinite() {
        return true;
    }
    let lf = l as f64;
    let pf = a * b;
    if (lf - pf).abs() > 1e-9 * pf.abs().max(1.0) {
        return lf < pf;
    }
    let lhs = BigRational::from_integer(l.into());
    let rhs = BigRational::from_float(a).expect("finite") * BigRational::from_float(b).expect("finite");
    lhs < rhs
}

/// Deterministic pseudo-random integer map `ψ(d) ∈ [lo, hi]`.
pub fn random_psi(seed: u64, lo: i64, hi: i64) -> impl Fn(u128) -> i128 + Sync + Send + Clone {
    move |d: u128| {
        let mut x = seed ^ (d as u64) ^ ((d >> 64) as u64).rotate_left(17);
        x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
        x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        x ^= x >> 31;
        lo as i128 + (x % (hi - lo + 1) as u64) as i128
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_basics() {
        let l = Lattice::new(30.0, &PrimeClass::Mod4Res3).unwrap();
        assert_eq!(l.primes, vec![3, 7, 11, 19, 23]);
        assert_eq!(l.len(), 32);
        assert_eq!(l.value(0b101), 33);
        assert_eq!(l.p_minus(0b110), 7.0);
        assert!(l.p_minus(0).is_infinite());
        assert!(Lattice::new(200.0, &PrimeClass::NotOneMod12).is_err());
    }

    #[test]
    fn exact_comparisons() {
        assert!(ge(10, 10.0) && !ge(9, 9.5) && ge(10, 9.5) && ge(0, -1.0));
        assert!(lt_product(20, 3.0, 7.0) && !lt_product(21, 3.0, 7.0));
        assert!(lt_product(1 << 60, 2f64.powi(30), 2f64.powi(30) + 1.0));
        assert!(!lt_product(1 << 60, 2f64.powi(30), 2f64.powi(30)));
    }

    #[test]
    fn legendre_dichotomy() {
        let s = crate::arith::FactorSieve::new(10_000).unwrap();
        let l = Lattice::new(40.0, &PrimeClass::Mod4Res3).unwrap();
        for n in 1..=10_000u64 {
            let sum: i32 = (0..l.len()).filter(|&m| n as u128 % l.value(m) == 0).map(|m| if Lattice::mu_neg(m) { -1 } else { 1 }).sum();
            let coprime = s.factorize(n).unwrap().iter().all(|(p, _)| !(l.primes.contains(p)));
            assert_eq!(sum, coprime as i32);
        }
    }

    #[test]
    fn params_validation() {
        let ok = SieveParams { z: 3.0, big_z: 10.0, d: 100.0, m: 5.0, m0: 5.0, t: 1e4 };
        assert!(ok.validate().is_ok());
        assert!(SieveParams { m0: 0.5, m: 0.5, ..ok }.validate().is_err());
        assert!(SieveParams { d: 2.0, ..ok }.validate().is_err());
    }
}
