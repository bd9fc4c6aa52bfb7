use super::{ge, lt_product};
use crate::arith::{factor_trial, PrimeClass};
use crate::error::{ensure, Result};

/// The unique `(δ, ℓ)` with `d = δℓ`, `δ | 𝔓(P⁻(ℓ))` and `M0 <= ℓ < M0 P⁻(ℓ)`:
/// `ℓ` is the shortest product of the largest primes of `d` reaching `M0`.
pub fn harman_decompose(d: u64, m0: f64) -> Result<(u64, u64)> {
    ensure!(d >= 1, Domain, "d must be positive");
    ensure!(ge(d as u128, m0), Precondition, "d = {d} < M0 = {m0}");
    let f = factor_trial(d);
    ensure!(f.iter().all(|&(_, e)| e == 1), Precondition, "d = {d} is not squarefree");
    let mut ell = 1u64;
    for &(p, _) in f.iter().rev() {
        if ge(ell as u128, m0) {
            break;
        }
        ell *= p;
    }
    Ok((d / ell, ell))
}

/// Every split `d = δℓ` meeting the three conditions, found by exhausting all
/// `2^ω(d)` subsets of prime factors.
pub fn harman_valid_splits(d: u64, m0: f64, cls: &PrimeClass) -> Result<Vec<(u64, u64)>> {
    ensure!(d >= 1, Domain, "d must be positive");
    let f = factor_trial(d);
    ensure!(f.iter().all(|&(_, e)| e == 1), Precondition, "d = {d} is not squarefree");
    let primes: Vec<u64> = f.iter().map(|&(p, _)| p).collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << primes.len()) {
        let ell: u64 = primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p).product();
        let pmin = primes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &p)| p).min();
        let delta = d / ell;
        let delta_ok = primes
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 0)
            .all(|(_, &p)| cls.contains(p) && pmin.is_none_or(|m| p < m));
        let pm = pmin.map(|p| p as f64).unwrap_or(f64::INFINITY);
        if delta_ok && ge(ell as u128, m0) && lt_product(ell as u128, m0, pm) {
            out.push((delta, ell));
        }
    }
    Ok(out)
}
