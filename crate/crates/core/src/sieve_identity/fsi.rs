use super::{ge, harman_decompose, Lattice};
use crate::arith::{factor_trial, PrimeClass};
use crate::error::{ensure, Result};
use crate::report::{DecompositionReport, Exact};
use std::sync::Arc;

/// A divisor-closed 0/1 function `∇` with `∇(1) = 1`.
#[derive(Clone)]
pub enum Truncation {
    /// `1_{d < M}`
    Below(f64),
    /// `1_{ω(d) <= k}`
    OmegaAtMost(u32),
    /// Arbitrary predicate on `(d, ω(d))`, validated before use.
    Custom(Arc<dyn Fn(u128, u32) -> bool + Send + Sync>),
}

impl std::fmt::Debug for Truncation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Truncation::Below(m) => write!(f, "Below({m})"),
            Truncation::OmegaAtMost(k) => write!(f, "OmegaAtMost({k})"),
            Truncation::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Truncation {
    fn eval(&self, lat: &Lattice, mask: usize) -> bool {
        match self {
            Truncation::Below(m) => !ge(lat.value(mask), *m),
            Truncation::OmegaAtMost(k) => mask.count_ones() <= *k,
            Truncation::Custom(f) => f(lat.value(mask), mask.count_ones()),
        }
    }
}

fn signed<V: Exact>(tab: &[V], mask: usize) -> V {
    if Lattice::mu_neg(mask) {
        -tab[mask].clone()
    } else {
        tab[mask].clone()
    }
}

fn table<V, F: Fn(u128) -> V>(lat: &Lattice, psi: &F) -> Vec<V> {
    (0..lat.len()).map(|m| psi(lat.value(m))).collect()
}

/// `Σ_{δ | 𝔓(P⁻(ℓ))} μ(ℓδ) ψ(ℓδ)` restricted by `keep(ℓδ)`.
fn below_low_sum<V: Exact>(lat: &Lattice, tab: &[V], ell: usize, keep: impl Fn(usize) -> bool) -> V {
    let mut s = V::zero();
    for delta in 0..(1usize << lat.low(ell)) {
        let m = ell | delta;
        if keep(m) {
            s = s + signed(tab, m);
        }
    }
    s
}

/// `Σ_{d | 𝔓(z)} μψ = Σ μψ∇ + Σ_ℓ ∇̄(ℓ) Σ_{δ | 𝔓(P⁻(ℓ))} μ(ℓδ)ψ(ℓδ)`.
pub fn fsi_check<V: Exact, F: Fn(u128) -> V>(psi: F, nabla: &Truncation, z: f64, cls: &PrimeClass) -> Result<DecompositionReport> {
    let lat = Lattice::new(z, cls)?;
    let nab: Vec<bool> = (0..lat.len()).map(|m| nabla.eval(&lat, m)).collect();
    ensure!(nab[0], Precondition, "∇(1) must be 1");
    for m in 1..lat.len() {
        if nab[m] {
            let mut rest = m;
            while rest != 0 {
                let bit = rest & rest.wrapping_neg();
                ensure!(nab[m ^ bit], Precondition, "∇ is not divisor-closed at d = {}", lat.value(m));
                rest ^= bit;
            }
        }
    }
    let tab = table(&lat, &psi);
    let mut lhs = V::zero();
    let mut truncated = V::zero();
    for m in 0..lat.len() {
        lhs = lhs + signed(&tab, m);
        if nab[m] {
            truncated = truncated + signed(&tab, m);
        }
    }
    let mut tail = V::zero();
    for ell in 1..lat.len() {
        let parent = ell & (ell - 1);
        if nab[parent] && !nab[ell] {
            tail = tail + below_low_sum(&lat, &tab, ell, |_| true);
        }
    }
    let rhs = truncated.clone() + tail.clone();
    Ok(DecompositionReport::exact("fsi", lhs, vec![("truncated", truncated), ("boundary", tail)], rhs).metric("divisors", lat.len() as f64))
}

/// `Σ_{δ | 𝔓(P⁻(ℓ))} μ(δ)1_{ℓδ >= M}ψ(ℓδ) = 1_{ℓ >= M}ψ(ℓ) − Σ_{p' < P⁻(ℓ)} Σ_{d | 𝔓(p')} μ(d)1_{ℓdp' >= M}ψ(ℓdp')`.
pub fn buchstab_check<V: Exact, F: Fn(u128) -> V>(psi: F, ell: u64, m: f64, cls: &PrimeClass) -> Result<DecompositionReport> {
    ensure!(ell >= 2, Precondition, "ℓ must be at least 2");
    let pmin = factor_trial(ell)[0].0;
    let lat = Lattice::from_primes(cls.primes_below(pmin as f64))?;
    let ell = ell as u128;
    let vals: Vec<u128> = (0..lat.len()).map(|d| lat.value(d).checked_mul(ell)).collect::<Option<_>>().ok_or_else(|| crate::Error::Resource("ℓδ overflows".into()))?;
    let term = |d: usize, v: u128| {
        let x = psi(v);
        if Lattice::mu_neg(d) {
            -x
        } else {
            x
        }
    };
    let mut lhs = V::zero();
    for (d, &v) in vals.iter().enumerate() {
        if ge(v, m) {
            lhs = lhs + term(d, v);
        }
    }
    let head = if ge(ell, m) { psi(ell) } else { V::zero() };
    let mut tail = V::zero();
    for i in 0..lat.k() {
        for d in 0..(1usize << i) {
            let v = vals[d | (1 << i)];
            if ge(v, m) {
                tail = tail + term(d, v);
            }
        }
    }
    let rhs = head.clone() - tail.clone();
    Ok(DecompositionReport::exact("buchstab", lhs, vec![("head", head), ("tail", tail)], rhs).metric("sifting_primes", lat.k() as f64))
}

/// Three-part split of `Σ_{d | 𝔓(z)} μψ`; also checks the two-term Harman form
/// and that the Harman pairing of every `d >= M` is the one enumerated.
pub fn simple_sieve_decompose<V: Exact, F: Fn(u128) -> V>(psi: F, z: f64, m: f64, m0: f64, cls: &PrimeClass) -> Result<DecompositionReport> {
    ensure!(m >= m0 && m0 >= 1.0, Precondition, "need M >= M0 >= 1");
    let lat = Lattice::new(z, cls)?;
    let tab = table(&lat, &psi);
    let mut lhs = V::zero();
    let mut small = V::zero();
    for d in 0..lat.len() {
        lhs = lhs + signed(&tab, d);
        if !ge(lat.value(d), m) {
            small = small + signed(&tab, d);
        }
    }
    let harman: Vec<usize> = (0..lat.len()).filter(|&l| lat.in_harman_range(l, m0)).collect();
    let mut linear = V::zero();
    let mut bilinear = V::zero();
    let mut annotated = V::zero();
    let mut covered = vec![false; lat.len()];
    let mut pairing_ok = true;
    for &ell in &harman {
        if ge(lat.value(ell), m) {
            linear = linear + signed(&tab, ell);
        }
        for i in 0..lat.low(ell) {
            for d in 0..(1usize << i) {
                let x = ell | d | (1 << i);
                if ge(lat.value(x), m) {
                    let t = tab[x].clone();
                    bilinear = bilinear + if (ell.count_ones() + d.count_ones()) % 2 == 1 { -t } else { t };
                }
            }
        }
        for delta in 0..(1usize << lat.low(ell)) {
            let x = ell | delta;
            if ge(lat.value(x), m) {
                annotated = annotated + signed(&tab, x);
                pairing_ok &= !covered[x];
                covered[x] = true;
                if let Ok(v) = u64::try_from(lat.value(x)) {
                    pairing_ok &= harman_decompose(v, m0).ok() == Some((lat.value(delta) as u64, lat.value(ell) as u64));
                }
            }
        }
    }
    let all_covered = (0..lat.len()).all(|d| covered[d] == ge(lat.value(d), m));
    let rhs = small.clone() + linear.clone() - bilinear.clone();
    let annotated_rhs = small.clone() + annotated.clone();
    let annotated_ok = lhs == annotated_rhs;
    let mut rep = DecompositionReport::exact("simple", lhs, vec![("small", small), ("linear", linear), ("bilinear", bilinear), ("annotated", annotated)], rhs);
    rep.satisfied &= annotated_ok && pairing_ok && all_covered;
    Ok(rep
        .metric("harman_range_size", harman.len() as f64)
        .metric("annotated_exact", annotated_ok as u8 as f64)
        .metric("harman_pairing_ok", (pairing_ok && all_covered) as u8 as f64))
}

#[cfg(test)]
mod tests {
    use super::super::random_psi;
    use super::*;
    use num_traits::Zero;

    #[test]
    fn fsi_examples() {
        let c = PrimeClass::Mod4Res3;
        let r = fsi_check(|_| 1i128, &Truncation::Custom(Arc::new(|_, _| true)), 20.0, &c).unwrap();
        assert!(r.satisfied);
        assert!(r.part("boundary").unwrap().is_exact_zero());
        for seed in 0..50 {
            let psi = random_psi(seed, -10, 10);
            assert!(fsi_check(&psi, &Truncation::Below(40.0), 20.0, &c).unwrap().satisfied);
            assert!(fsi_check(&psi, &Truncation::OmegaAtMost(1), 30.0, &c).unwrap().satisfied);
            assert!(fsi_check(&psi, &Truncation::Below(2.0 + seed as f64 * 37.0), 50.0, &PrimeClass::NotOneMod12).unwrap().satisfied);
        }
    }

    #[test]
    fn fsi_rejects_bad_nabla() {
        let c = PrimeClass::Mod4Res3;
        let bad = Truncation::Custom(Arc::new(|d, _| d != 3));
        assert!(matches!(fsi_check(|_| 1i128, &bad, 20.0, &c), Err(crate::Error::Precondition(_))));
        let zero = Truncation::Below(1.0);
        assert!(fsi_check(|_| 1i128, &zero, 20.0, &c).is_err());
    }

    #[test]
    fn buchstab_examples() {
        let c = PrimeClass::Mod4Res3;
        for seed in 0..30 {
            let psi = random_psi(seed, -10, 10);
            assert!(buchstab_check(&psi, 77, 5.0, &c).unwrap().satisfied);
            assert!(buchstab_check(&psi, 77 * 43, 1.0, &c).unwrap().satisfied);
            let r = buchstab_check(&psi, 3, 2.0, &c).unwrap();
            assert!(r.satisfied && r.part("tail").unwrap().is_exact_zero());
            assert_eq!(r.lhs, r.part("head").unwrap().clone());
        }
        assert!(buchstab_check(|_| 1i128, 1, 1.0, &c).is_err());
    }

    #[test]
    fn simple_examples() {
        let c = PrimeClass::Mod4Res3;
        let r = simple_sieve_decompose(|d| (d % 7) as i128, 30.0, 50.0, 10.0, &c).unwrap();
        assert!(r.satisfied, "{r:?}");
        let edge = simple_sieve_decompose(&random_psi(3, -10, 10), 30.0, 1.0, 1.0, &c).unwrap();
        assert!(edge.satisfied);
        assert!(edge.part("small").unwrap().is_exact_zero());
        for seed in 0..40 {
            let psi = random_psi(seed, -10, 10);
            let m0 = 1.0 + (seed % 7) as f64 * 3.5;
            let m = m0 + (seed % 5) as f64 * 40.0;
            assert!(simple_sieve_decompose(&psi, 60.0, m, m0, &c).unwrap().satisfied);
        }
        assert!(simple_sieve_decompose(|_| 0i128, 30.0, 5.0, 10.0, &c).is_err());
        let z = simple_sieve_decompose(|_| num_bigint::BigInt::zero(), 30.0, 5.0, 2.0, &c).unwrap();
        assert!(z.satisfied);
    }
}
