//! The set 𝔅 of odd integers that are sums of two coprime squares.
//!
//! Membership is decided by a bit table: an integer `n <= L` lies in 𝔅 iff
//! `n ≡ 1 mod 4` and no prime `p ≡ 3 mod 4` with `p <= sqrt(L)` divides it.

use crate::arith::{isqrt, primes_up_to, FactorSieve};
use crate::error::{ensure, Result};
use crate::sum::KahanSum;
use serde::Serialize;
use std::sync::OnceLock;

/// Largest table accepted by [`BMembership::new`].
pub const MEMBERSHIP_MAX: u64 = 2_000_000_000;

/// Bit table of 𝔅 on `[0, limit]` with per-word prefix counts.
#[derive(Clone, Debug)]
pub struct BMembership {
    limit: u64,
    words: Vec<u64>,
    prefix: Vec<u64>,
}

impl BMembership {
    pub fn new(limit: u64) -> Result<Self> {
        ensure!((1..=MEMBERSHIP_MAX).contains(&limit), Config, "membership limit {limit} outside [1, {MEMBERSHIP_MAX}]");
        let nwords = (limit / 64 + 1) as usize;
        let mut words = vec![0u64; nwords];
        let mut n = 1u64;
        while n <= limit {
            words[(n / 64) as usize] |= 1 << (n % 64);
            n += 4;
        }
        for p in primes_up_to(isqrt(limit)) {
            if p % 4 != 3 {
                continue;
            }
            let mut m = 3 * p;
            while m <= limit {
                words[(m / 64) as usize] &= !(1 << (m % 64));
                m += 4 * p;
            }
        }
        let mut prefix = Vec::with_capacity(nwords + 1);
        let mut acc = 0u64;
        for w in &words {
            prefix.push(acc);
            acc += w.count_ones() as u64;
        }
        prefix.push(acc);
        Ok(BMembership { limit, words, prefix })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// `b(n)`; false for `n = 0` or beyond the limit.
    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        n <= self.limit && (self.words[(n / 64) as usize] >> (n % 64)) & 1 == 1
    }

    /// `B(N) = #{n <= N : b(n) = 1}`, clamped to the table.
    pub fn count(&self, n: u64) -> u64 {
        let n = n.min(self.limit);
        let w = (n / 64) as usize;
        let mask = if n % 64 == 63 { u64::MAX } else { (1u64 << (n % 64 + 1)) - 1 };
        self.prefix[w] + (self.words[w] & mask).count_ones() as u64
    }

    /// Members in `[lo, hi)`, ascending.
    pub fn range(&self, lo: u64, hi: u64) -> impl Iterator<Item = u64> + '_ {
        let hi = hi.min(self.limit + 1);
        let (w0, w1) = ((lo / 64) as usize, (hi.max(lo) / 64) as usize);
        (w0..=w1.min(self.words.len() - 1)).flat_map(move |w| {
            let mut bits = self.words[w];
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as u64;
                bits &= bits - 1;
                Some(w as u64 * 64 + t)
            })
        })
        .filter(move |&n| n >= lo && n < hi)
    }

    /// All members up to `n`.
    pub fn members(&self, n: u64) -> Vec<u64> {
        self.range(0, n + 1).collect()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// `b(n)` from the factorisation: odd with no prime factor `≡ 3 mod 4`.
pub fn is_b(n: u64, sieve: &FactorSieve) -> Result<bool> {
    if n % 2 == 0 {
        sieve.spf(n.max(1))?;
        return Ok(false);
    }
    Ok(sieve.factorize(n)?.iter().all(|&(p, _)| p % 4 == 1))
}

pub const BRUTEFORCE_MAX: u64 = 10_000_000;

/// `b(n)` by searching `n = x^2 + y^2` with `gcd(x, y) = 1`.
pub fn is_b_bruteforce(n: u64) -> Result<bool> {
    ensure!(n >= 1 && n <= BRUTEFORCE_MAX, Domain, "brute force needs 1 <= n <= {BRUTEFORCE_MAX}");
    if n % 2 == 0 {
        return Ok(false);
    }
    let mut x = 0u64;
    while 2 * x * x <= n {
        let r = n - x * x;
        let y = isqrt(r);
        if y * y == r && num_integer::gcd(x, y) == 1 {
            return Ok(true);
        }
        x += 1;
    }
    Ok(false)
}

/// `B(N)` from a membership table.
pub fn count_b(n: u64, mem: &BMembership) -> Result<u64> {
    ensure!(n <= mem.limit(), Domain, "N = {n} beyond membership limit {}", mem.limit());
    Ok(mem.count(n))
}

fn class3_log_product(prime_limit: u64) -> Result<(f64, f64)> {
    ensure!(prime_limit >= 10_000, Precondition, "prime_limit must be at least 1e4");
    ensure!(prime_limit <= 100_000_000, Resource, "prime_limit above 1e8");
    let mut s = KahanSum::new();
    for p in primes_up_to(prime_limit) {
        if p % 4 == 3 {
            let x = 1.0 / (p as f64 * p as f64);
            s.add(-0.5 * (-x).ln_1p());
        }
    }
    let l = prime_limit as f64;
    Ok((s.value(), 0.5 * (1.0 / (l - 1.0)) / (1.0 - 1.0 / (l * l))))
}

/// `C = sqrt(2) prod_{p ≡ 3 (4)} (1 - 1/p^2)^{-1/2}` truncated at `p <= prime_limit`,
/// with a rigorous bound on the omitted tail.
pub fn landau_constant(prime_limit: u64) -> Result<(f64, f64)> {
    let (s, tail_log) = class3_log_product(prime_limit)?;
    let value = std::f64::consts::SQRT_2 * s.exp();
    Ok((value, value * tail_log.exp_m1()))
}

/// The constant of `B(N) ~ C N / sqrt(log N)` read off the singularity of
/// `Σ b(n) n^{-s}` at `s = 1`: `(1/(2 sqrt 2)) prod_{p ≡ 3 (4)} (1 - 1/p^2)^{1/2}`.
pub fn landau_constant_sd(prime_limit: u64) -> Result<(f64, f64)> {
    let (s, tail_log) = class3_log_product(prime_limit)?;
    let value = (-s).exp() / (2.0 * std::f64::consts::SQRT_2);
    Ok((value, -value * (-tail_log).exp_m1()))
}

/// `landau_constant(10^6)`, computed once.
pub fn landau_c() -> (f64, f64) {
    static C: OnceLock<(f64, f64)> = OnceLock::new();
    *C.get_or_init(|| landau_constant(1_000_000).expect("valid limit"))
}

/// `landau_constant_sd(10^6)`, computed once.
pub fn landau_c_sd() -> (f64, f64) {
    static C: OnceLock<(f64, f64)> = OnceLock::new();
    *C.get_or_init(|| landau_constant_sd(1_000_000).expect("valid limit"))
}

/// Which value of `C` a prediction uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LandauChoice {
    /// the `sqrt 2 prod (1-p^-2)^{-1/2}` formula
    #[default]
    Stated,
    SelbergDelange,
}

impl LandauChoice {
    /// `(value, tail bound)`.
    pub fn constant(self) -> (f64, f64) {
        match self {
            LandauChoice::Stated => landau_c(),
            LandauChoice::SelbergDelange => landau_c_sd(),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "stated" => Some(LandauChoice::Stated),
            "sd" | "selberg-delange" => Some(LandauChoice::SelbergDelange),
            _ => None,
        }
    }
}
