//! Exponential sums `S(α; N) = Σ_{n <= N} b(n) e(nα)` over 𝔅.
//!
//! `α = a/q + β`. The rational part of each phase is reduced exactly in
//! integers, `nβ` in double-double, so phases stay accurate for large `n`.

use crate::arith::{factor_trial, phi_of};
use crate::dd::DD;
use crate::error::{ensure, Result};
use crate::gaussian::BMembership;
use crate::sum::{chunked_complex, chunked_real, ComplexSum};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::TAU;

/// Largest `R * N` accepted by [`family_sum`].
pub const FAMILY_BUDGET: u64 = 1_000_000_000;
const TABLE_MAX_Q: u64 = 1 << 16;

/// A point on the circle written as `a/q + β`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Alpha {
    pub a: u64,
    pub q: u64,
    #[serde(serialize_with = "ser_dd")]
    pub beta: DD,
}

fn ser_dd<S: serde::Serializer>(d: &DD, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.to_f64())
}

impl Alpha {
    /// `a` is reduced mod `q`; `gcd(a, q)` must be 1.
    pub fn new(a: i64, q: u64, beta: DD) -> Result<Alpha> {
        ensure!(q >= 1, Domain, "q must be positive");
        let a = a.rem_euclid(q as i64) as u64;
        ensure!(num_integer::gcd(a, q) == 1 || q == 1, Domain, "gcd({a}, {q}) != 1");
        Ok(Alpha { a: if q == 1 { 0 } else { a }, q, beta })
    }

    pub fn rational(a: i64, q: u64) -> Result<Alpha> {
        Alpha::new(a, q, DD::ZERO)
    }

    /// A real number with trivial rational part.
    pub fn real(x: DD) -> Alpha {
        Alpha { a: 0, q: 1, beta: x.frac() }
    }

    pub fn to_f64(&self) -> f64 {
        self.a as f64 / self.q as f64 + self.beta.to_f64()
    }

    /// `r α`, reduced to lowest terms.
    pub fn scale(&self, r: u64) -> Alpha {
        let num = ((r as u128 * self.a as u128) % self.q as u128) as u64;
        let g = num_integer::gcd(num, self.q);
        let (a, q) = if num == 0 { (0, 1) } else { (num / g, self.q / g) };
        Alpha { a, q, beta: self.beta.mul_f64(r as f64) }
    }

    /// `-α`.
    pub fn neg(&self) -> Alpha {
        Alpha { a: (self.q - self.a) % self.q, q: self.q, beta: -self.beta }
    }

    /// `nα mod 1` as a representative in `[-1/2, 1/2)`.
    #[inline]
    pub fn phase(&self, n: u64) -> f64 {
        let r = ((n as u128 * self.a as u128) % self.q as u128) as i128;
        let x = if self.beta.is_zero() {
            DD::ratio(r, self.q as i128)
        } else {
            DD::ratio(r, self.q as i128) + self.beta.mul_f64(n as f64)
        };
        x.centered_frac()
    }
}

/// `e(x) = exp(2πix)`.
#[inline]
pub fn e(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpSumResult {
    pub value: Complex64,
    pub terms: u64,
    pub error_bound: f64,
}

impl ExpSumResult {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

fn rational_table(alpha: &Alpha) -> Option<Vec<Complex64>> {
    if alpha.beta.is_zero() && alpha.q <= TABLE_MAX_Q {
        Some((0..alpha.q).map(|r| e(DD::ratio(r as i128, alpha.q as i128).centered_frac())).collect())
    } else {
        None
    }
}

fn filtered_sum<F>(alpha: &Alpha, n: u64, mem: &BMembership, keep: F) -> Result<ExpSumResult>
where
    F: Fn(u64) -> bool + Sync,
{
    ensure!(n <= mem.limit(), Domain, "N = {n} beyond membership limit {}", mem.limit());
    let table = rational_table(alpha);
    let terms = std::sync::atomic::AtomicU64::new(0);
    let value = chunked_complex(1..n + 1, |r| {
        let mut acc = ComplexSum::new();
        let mut count = 0u64;
        for b in mem.range(r.start, r.end) {
            if !keep(b) {
                continue;
            }
            count += 1;
            match &table {
                Some(t) => acc.add(t[((b as u128 * alpha.a as u128) % alpha.q as u128) as usize]),
                None => acc.add(e(alpha.phase(b))),
            }
        }
        terms.fetch_add(count, std::sync::atomic::Ordering::Relaxed);
        acc.value()
    });
    let terms = terms.into_inner();
    Ok(ExpSumResult { value, terms, error_bound: 1e-15 * terms as f64 + 1e-15 })
}

/// `S(α; N)`.
pub fn s_alpha(alpha: &Alpha, n: u64, mem: &BMembership) -> Result<ExpSumResult> {
    filtered_sum(alpha, n, mem, |_| true)
}

/// `S_q(α; N)`: only `n` coprime to `q_sift`.
pub fn s_q(alpha: &Alpha, n: u64, q_sift: u64, mem: &BMembership) -> Result<ExpSumResult> {
    ensure!(q_sift >= 1, Domain, "q_sift must be positive");
    let primes: Vec<u64> = factor_trial(q_sift).into_iter().map(|(p, _)| p).collect();
    filtered_sum(alpha, n, mem, |b| primes.iter().all(|p| b % p != 0))
}

/// `Σ_{r <= R} |S(rα; N)|`.
pub fn family_sum(alpha: &Alpha, r_max: u64, n: u64, mem: &BMembership) -> Result<f64> {
    ensure!(r_max >= 1, Domain, "R must be positive");
    ensure!(r_max.saturating_mul(n) <= FAMILY_BUDGET, Resource, "R*N = {} exceeds {FAMILY_BUDGET}", r_max.saturating_mul(n));
    let mut acc = crate::sum::KahanSum::new();
    for r in 1..=r_max {
        acc.add(s_alpha(&alpha.scale(r), n, mem)?.modulus());
    }
    Ok(acc.value())
}

/// `(1/G) Σ_{j < G} |S(j/G; N)|^ℓ`, the grid approximation of `∫ |S|^ℓ`.
pub fn lp_norm_grid(ell: f64, n: u64, grid: u64, mem: &BMembership) -> Result<f64> {
    ensure!(ell > 0.0, Domain, "ell must be positive");
    ensure!(grid >= 4 * n, Precondition, "grid {grid} < 4N");
    ensure!(n <= mem.limit(), Domain, "N beyond membership limit");
    let members = mem.members(n);
    Ok(grid_power_mean(&members, grid, |_| 1.0, ell))
}

/// `(1/G) Σ_j |Σ_k w_k e(m_k j / G)|^ℓ` for integer frequencies `m_k`.
pub(crate) fn grid_power_mean<W>(freqs: &[u64], grid: u64, weight: W, ell: f64) -> f64
where
    W: Fn(u64) -> f64 + Sync,
{
    let table: Vec<Complex64> = (0..grid).map(|r| e(DD::ratio(r as i128, grid as i128).centered_frac())).collect();
    let weights: Vec<f64> = freqs.iter().map(|&m| weight(m)).collect();
    let total = chunked_real(0..grid, |js| {
        let mut acc = crate::sum::KahanSum::new();
        for j in js {
            let mut s = ComplexSum::new();
            for (&m, &w) in freqs.iter().zip(&weights) {
                let idx = ((m as u128 * j as u128) % grid as u128) as usize;
                s.add(table[idx] * w);
            }
            acc.add(s.value().norm().powf(ell));
        }
        acc.value()
    });
    total / grid as f64
}

/// Measured size of `|S|` against the two minor-arc envelopes, all constants 1.
#[derive(Clone, Debug, Serialize)]
pub struct TrigoReport {
    pub alpha: Alpha,
    pub n: u64,
    pub value_re: f64,
    pub value_im: f64,
    pub modulus: f64,
    /// `|S| sqrt(log N) / N`
    pub normalized: f64,
    /// `1/φ(q) + sqrt(q/N) (log N)^7 + (log N)^{-A}`
    pub envelope_trigo: f64,
    /// `(q^{-1/2} + N^{-1/6} + sqrt(q/N)) (log N)^7`
    pub envelope_large: f64,
    pub radius_exponent: f64,
    pub within_radius: bool,
    pub pass_trigo: bool,
    pub pass_large: bool,
}

/// Compares `S(α; N)` with both envelopes. Requires `|qα - a| <= 1/q`.
pub fn bound_check_trigo(alpha: &Alpha, n: u64, big_a: f64, radius_exponent: Option<f64>, mem: &BMembership) -> Result<TrigoReport> {
    let q = alpha.q as f64;
    let beta = alpha.beta.to_f64().abs();
    ensure!(q * beta <= 1.0 / q, Precondition, "|qα - a| = {} exceeds 1/q", q * beta);
    ensure!(n >= 3, Domain, "N must be at least 3");
    let s = s_alpha(alpha, n, mem)?;
    let nf = n as f64;
    let l = nf.ln();
    let phi = phi_of(&factor_trial(alpha.q)) as f64;
    let normalized = s.modulus() * l.sqrt() / nf;
    let envelope_trigo = 1.0 / phi + (q / nf).sqrt() * l.powi(7) + l.powf(-big_a);
    let envelope_large = (q.powf(-0.5) + nf.powf(-1.0 / 6.0) + (q / nf).sqrt()) * l.powi(7);
    let radius_exponent = radius_exponent.unwrap_or(2.0 * big_a + 14.0);
    let within_radius = beta <= l.powf(radius_exponent) / (q * nf);
    Ok(TrigoReport {
        alpha: *alpha,
        n,
        value_re: s.value.re,
        value_im: s.value.im,
        modulus: s.modulus(),
        normalized,
        envelope_trigo,
        envelope_large,
        radius_exponent,
        within_radius,
        pass_trigo: normalized <= envelope_trigo,
        pass_large: normalized <= envelope_large,
    })
}

/// `RN/sqrt(log N) (q^{-1/2} + sqrt(q/(RN)) + R^{-1/3} N^{-1/6} + R^{1/3} N^{-1/3}) N^ε`.
pub fn family_envelope(r: f64, n: f64, q: f64, eps: f64) -> f64 {
    r * n / n.ln().sqrt()
        * (q.powf(-0.5) + (q / (r * n)).sqrt() + r.powf(-1.0 / 3.0) * n.powf(-1.0 / 6.0) + r.powf(1.0 / 3.0) * n.powf(-1.0 / 3.0))
        * n.powf(eps)
}

/// `N^{5/6} (log N)^{13/2}`.
pub fn sqrt2_envelope(n: f64) -> f64 {
    n.powf(5.0 / 6.0) * n.ln().powf(6.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mem() -> BMembership {
        BMembership::new(200_000).unwrap()
    }

    #[test]
    fn special_points() {
        let m = mem();
        for n in [30u64, 1000, 12345] {
            let b = m.count(n) as f64;
            let s0 = s_alpha(&Alpha::rational(0, 1).unwrap(), n, &m).unwrap();
            assert!((s0.value - Complex64::new(b, 0.0)).norm() < 1e-9);
            let s4 = s_alpha(&Alpha::rational(1, 4).unwrap(), n, &m).unwrap();
            assert!((s4.value - Complex64::new(0.0, b)).norm() < 1e-9 * b);
            let s2 = s_alpha(&Alpha::rational(1, 2).unwrap(), n, &m).unwrap();
            assert!((s2.value + b).norm() < 1e-9 * b);
        }
    }

    #[test]
    fn sifted_by_five() {
        let m = mem();
        let a0 = Alpha::rational(0, 1).unwrap();
        let v = s_q(&a0, 30, 5, &m).unwrap().value.re;
        assert!((v - (m.count(30) as f64 - 2.0)).abs() < 1e-12);
        let w = s_q(&a0, 30, 15, &m).unwrap().value.re;
        assert_eq!(v, w);
    }

    #[test]
    fn naive_crosscheck_small_q() {
        let m = mem();
        let n = 50_000;
        for q in 1..=8u64 {
            for a in 0..q {
                if num_integer::gcd(a, q) != 1 {
                    continue;
                }
                let beta = DD::from_f64(1e-6 * (a as f64 + 0.37));
                let al = Alpha::new(a as i64, q, beta).unwrap();
                let x = al.to_f64();
                let mut naive = Complex64::new(0.0, 0.0);
                for b in m.members(n) {
                    naive += e((b as f64 * x).fract());
                }
                let s = s_alpha(&al, n, &m).unwrap().value;
                assert!((s - naive).norm() <= 1e-6 * m.count(n) as f64);
            }
        }
    }

    #[test]
    fn parseval_exact_on_grid() {
        let m = mem();
        let n = 2000;
        let v = lp_norm_grid(2.0, n, 4 * n, &m).unwrap();
        assert!((v - m.count(n) as f64).abs() < 1e-6 * v);
        assert!(matches!(lp_norm_grid(2.0, n, 4 * n - 1, &m), Err(crate::Error::Precondition(_))));
        let one = lp_norm_grid(2.5, 1, 4, &m).unwrap();
        assert!((one - 1.0).abs() < 1e-12);
    }

    #[test]
    fn family_and_budget() {
        let m = mem();
        let al = Alpha::rational(1, 3).unwrap();
        let f = family_sum(&al, 3, 1000, &m).unwrap();
        let direct: f64 = (1..=3).map(|r| s_alpha(&Alpha::rational(r, 3).unwrap_or(Alpha::rational(0, 1).unwrap()), 1000, &m).unwrap().modulus()).sum();
        assert!((f - direct).abs() < 1e-9);
        assert!(matches!(family_sum(&al, 2_000_000, 1000, &m), Err(crate::Error::Resource(_))));
    }

    #[test]
    fn trigo_report() {
        let m = mem();
        let al = Alpha::rational(1, 7).unwrap();
        let r = bound_check_trigo(&al, 100_000, 1.0, None, &m).unwrap();
        assert!(r.pass_large && r.within_radius);
        let bad = Alpha::new(1, 7, DD::from_f64(0.1)).unwrap();
        assert!(matches!(bound_check_trigo(&bad, 1000, 1.0, None, &m), Err(crate::Error::Precondition(_))));
    }

    #[test]
    fn alpha_validation() {
        assert!(Alpha::rational(2, 4).is_err());
        assert!(Alpha::rational(1, 0).is_err());
        let a = Alpha::rational(-1, 5).unwrap();
        assert_eq!(a.a, 4);
        let s = Alpha::rational(3, 10).unwrap().scale(5);
        assert_eq!((s.a, s.q), (1, 2));
    }

    #[test]
    fn thread_count_independent() {
        let m = mem();
        let al = Alpha::new(3, 11, DD::from_f64(2.0e-7)).unwrap();
        let run = |t| rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| s_alpha(&al, 150_000, &m).unwrap().value);
        let (x, y) = (run(1), run(3));
        assert_eq!(x.re.to_bits(), y.re.to_bits());
        assert_eq!(x.im.to_bits(), y.im.to_bits());
    }
}
