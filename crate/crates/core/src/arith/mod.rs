//! Multiplicative arithmetic: smallest-prime-factor sieve, arithmetic
//! functions, and the prime classes that parametrise every sifting product.

mod cache;
mod class;
mod sieve;

pub use cache::{cache_path, load_cache, save_cache, CACHE_ENV};
pub use class::{mertens_bound, mertens_class_sum, mertens_scan, prime_class_product, MertensScan, PrimeClass, PRODUCT_Z_MAX};
pub use sieve::{FactorSieve, SIEVE_MAX};

/// Floor square root of a `u64`.
pub fn isqrt(n: u64) -> u64 {
    n.isqrt()
}

/// Floor square root of a `u128`.
pub fn isqrt_u128(n: u128) -> u128 {
    n.isqrt()
}

/// All primes `p <= n`, ascending.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::with_capacity(n / 10 + 16);
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Factorisation of an arbitrary `u64` by trial division.
pub fn factor_trial(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn moebius_of(f: &[(u64, u32)]) -> i8 {
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

pub fn phi_of(f: &[(u64, u32)]) -> u64 {
    f.iter().map(|&(p, e)| (p - 1) * p.pow(e - 1)).product()
}

/// `tau_3(n)`: number of ordered factorisations `n = abc`.
pub fn tau3_of(f: &[(u64, u32)]) -> u64 {
    f.iter().map(|&(_, e)| ((e as u64 + 2) * (e as u64 + 1)) / 2).product()
}

/// `phi_+(n) = n * prod (1 + 1/p)`.
pub fn phi_plus_of(f: &[(u64, u32)]) -> u64 {
    f.iter().map(|&(p, e)| (p + 1) * p.pow(e - 1)).product()
}

/// All divisors of the number with factorisation `f`, ascending.
pub fn divisors_of(f: &[(u64, u32)]) -> Vec<u64> {
    let mut d = vec![1u64];
    for &(p, e) in f {
        let len = d.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                d.push(d[i] * pk);
            }
        }
    }
    d.sort_unstable();
    d
}
