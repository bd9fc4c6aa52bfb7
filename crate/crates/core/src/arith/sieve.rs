use super::{divisors_of, isqrt, moebius_of, phi_of, phi_plus_of, primes_up_to, tau3_of};
use crate::error::{ensure, Result};

pub const SIEVE_MAX: u64 = 100_000_000;
const SEGMENT: usize = 1 << 18;

/// Smallest-prime-factor table on `[0, limit]`; `spf[1] = 1`, `spf[0] = 0`.
#[derive(Clone, Debug)]
pub struct FactorSieve {
    limit: u64,
    spf: Vec<u32>,
}

impl FactorSieve {
    /// Builds the table segment by segment.
    pub fn new(limit: u64) -> Result<Self> {
        ensure!((2..=SIEVE_MAX).contains(&limit), Config, "sieve limit {limit} outside [2, {SIEVE_MAX}]");
        let n = limit as usize;
        let base = primes_up_to(isqrt(limit));
        let mut spf = vec![0u32; n + 1];
        spf[1] = 1;
        let mut lo = 0usize;
        while lo <= n {
            let hi = (lo + SEGMENT).min(n + 1);
            for &p in &base {
                let p = p as usize;
                if p * p >= hi {
                    break;
                }
                let mut j = (p * p).max(lo.div_ceil(p) * p);
                while j < hi {
                    if spf[j] == 0 {
                        spf[j] = p as u32;
                    }
                    j += p;
                }
            }
            for (i, s) in spf[lo.max(2)..hi].iter_mut().enumerate() {
                if *s == 0 {
                    *s = (lo.max(2) + i) as u32;
                }
            }
            lo = hi;
        }
        Ok(FactorSieve { limit, spf })
    }

    /// Loads the table from `TSL_CACHE_DIR` when present, building and storing it otherwise.
    pub fn cached(limit: u64) -> Result<Self> {
        match super::cache_path(limit) {
            Some(path) => {
                if path.exists() {
                    if let Ok(s) = super::load_cache(&path, limit) {
                        return Ok(s);
                    }
                }
                let s = FactorSieve::new(limit)?;
                super::save_cache(&s, &path)?;
                Ok(s)
            }
            None => FactorSieve::new(limit),
        }
    }

    pub(crate) fn from_parts(limit: u64, spf: Vec<u32>) -> Self {
        FactorSieve { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn raw(&self) -> &[u32] {
        &self.spf
    }

    fn check(&self, n: u64) -> Result<()> {
        ensure!(n >= 1, Domain, "argument must be positive");
        ensure!(n <= self.limit, Domain, "{n} exceeds sieve limit {}", self.limit);
        Ok(())
    }

    pub fn spf(&self, n: u64) -> Result<u64> {
        self.check(n)?;
        Ok(self.spf[n as usize] as u64)
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(n >= 2 && self.spf[n as usize] as u64 == n)
    }

    /// Prime factorisation, ascending primes with exponents.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        self.check(n)?;
        Ok(self.factor_unchecked(n))
    }

    pub(crate) fn factor_unchecked(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::with_capacity(8);
        while n > 1 {
            let p = self.spf[n as usize] as u64;
            n /= p;
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    pub fn moebius(&self, n: u64) -> Result<i8> {
        Ok(moebius_of(&self.factorize(n)?))
    }

    pub fn euler_phi(&self, n: u64) -> Result<u64> {
        Ok(phi_of(&self.factorize(n)?))
    }

    /// Number of distinct prime factors.
    pub fn omega(&self, n: u64) -> Result<u32> {
        Ok(self.factorize(n)?.len() as u32)
    }

    pub fn tau3(&self, n: u64) -> Result<u64> {
        Ok(tau3_of(&self.factorize(n)?))
    }

    pub fn phi_plus(&self, n: u64) -> Result<u64> {
        Ok(phi_plus_of(&self.factorize(n)?))
    }

    pub fn divisors(&self, n: u64) -> Result<Vec<u64>> {
        Ok(divisors_of(&self.factorize(n)?))
    }

    /// Primes up to the limit, ascending.
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.spf.iter().enumerate().skip(2).filter(|(i, &s)| *i as u32 == s).map(|(i, _)| i as u64)
    }
}

impl PartialEq for FactorSieve {
    fn eq(&self, o: &Self) -> bool {
        self.limit == o.limit && self.spf == o.spf
    }
}

impl From<FactorSieve> for Vec<u32> {
    fn from(s: FactorSieve) -> Self {
        s.spf
    }
}
