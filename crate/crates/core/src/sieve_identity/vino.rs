use super::{ge, Lattice, SieveParams};
use crate::arith::{FactorSieve, PrimeClass};
use crate::error::{ensure, Result};
use crate::report::{DecompositionReport, Exact, Part};
use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};

/// A finitely supported sequence `u_1, ..., u_N` of rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSeq {
    values: Vec<Rational64>,
}

impl WeightedSeq {
    pub fn new(values: Vec<Rational64>) -> Result<Self> {
        ensure!(!values.is_empty(), Domain, "sequence must have N >= 1");
        Ok(WeightedSeq { values })
    }

    pub fn from_ints(values: &[i64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Rational64::from_integer(v)).collect())
    }

    /// `u_n = 1` on `(lo, hi]`, zero elsewhere.
    pub fn interval(n: usize, lo: usize, hi: usize) -> Result<Self> {
        Self::new((1..=n).map(|k| Rational64::from_integer((k > lo && k <= hi) as i64)).collect())
    }

    /// Independent uniform integers in `[lo, hi]`.
    pub fn random(n: usize, lo: i64, hi: i64, seed: u64) -> Result<Self> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        Self::new((0..n).map(|_| Rational64::from_integer(rng.gen_range(lo..=hi))).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `u_n`, 1-indexed.
    pub fn get(&self, n: usize) -> Rational64 {
        self.values[n - 1]
    }

    /// Common denominator and the integer numerators `u_n * den`, indexed from 1.
    fn scaled(&self) -> (i128, Vec<i128>) {
        let den = self.values.iter().fold(1i128, |l, v| num_integer::lcm(l, *v.denom() as i128));
        let mut out = vec![0i128];
        out.extend(self.values.iter().map(|v| *v.numer() as i128 * (den / *v.denom() as i128)));
        (den, out)
    }

    fn sum_sq(&self) -> f64 {
        self.values.iter().map(|v| v.to_f64().unwrap_or(0.0).powi(2)).sum()
    }

    fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.to_f64().unwrap_or(0.0).abs()).fold(0.0, f64::max)
    }
}

/// The prime window `z <= p < upper` (or `<= upper` when `inclusive`).
#[derive(Clone, Copy, Debug)]
pub struct SiftRange {
    pub z: f64,
    pub upper: f64,
    pub inclusive: bool,
}

impl SiftRange {
    pub fn half_open(z: f64, upper: f64) -> Self {
        SiftRange { z, upper, inclusive: false }
    }

    pub fn contains(&self, p: u64) -> bool {
        let p = p as f64;
        p >= self.z && (p < self.upper || (self.inclusive && p == self.upper))
    }
}

/// Per-`n` data: some sifting prime `< z` divides `n`; number of window primes dividing `n`.
fn classify(n: usize, range: &SiftRange, cls: &PrimeClass, sieve: &FactorSieve) -> (Vec<bool>, Vec<u32>) {
    let mut small = vec![false; n + 1];
    let mut w = vec![0u32; n + 1];
    for k in 1..=n {
        for (p, _) in sieve.factor_unchecked(k as u64) {
            if !cls.contains(p) {
                continue;
            }
            if (p as f64) < range.z {
                small[k] = true;
            } else if range.contains(p) {
                w[k] += 1;
            }
        }
    }
    (small, w)
}

/// `ρ(m) = 1_{(m, 𝔓(z)) = 1} / (1 + #{p' in the window : p' | m})`.
pub fn rho(m: u64, range: &SiftRange, cls: &PrimeClass, sieve: &FactorSieve) -> Result<BigRational> {
    let f = sieve.factorize(m)?;
    if f.iter().any(|&(p, _)| cls.contains(p) && (p as f64) < range.z) {
        return Ok(BigRational::zero());
    }
    let c = f.iter().filter(|&&(p, _)| cls.contains(p) && range.contains(p)).count();
    Ok(BigRational::new(1.into(), (1 + c as i64).into()))
}

fn frac(x: i128, den: i128) -> BigRational {
    BigRational::new(BigInt::from(x), BigInt::from(den))
}

struct Firstbase {
    scale: i128,
    lhs: i128,
    sifted_small: i128,
    first_order: i128,
    discarded: i128,
    pointwise_bound: f64,
}

fn firstbase_terms(u: &WeightedSeq, range: &SiftRange, cls: &PrimeClass, sieve: &FactorSieve) -> Result<Firstbase> {
    let n = u.len();
    ensure!(n as u64 <= sieve.limit(), Domain, "N = {n} beyond sieve limit");
    let (_, uu) = u.scaled();
    let (small, w) = classify(n, range, cls, sieve);
    let kmax = w.iter().copied().max().unwrap_or(0) as i128;
    let wl = (1..=kmax + 1).fold(1i128, num_integer::lcm);
    let window: Vec<usize> = (2..=n).filter(|&p| sieve.raw()[p] as usize == p && cls.contains(p as u64) && range.contains(p as u64)).collect();
    let mut lhs = 0i128;
    let mut sifted_small = 0i128;
    for k in 1..=n {
        if !small[k] {
            sifted_small += uu[k];
            if w[k] == 0 {
                lhs += uu[k];
            }
        }
    }
    let mut first_order = 0i128;
    let mut discarded = 0i128;
    let mut pointwise = 0.0;
    for &p in &window {
        for m in 1..=n / p {
            if !small[m] {
                first_order += uu[p * m] * (wl / (1 + w[m] as i128));
            }
        }
        for l in 1..=n / (p * p) {
            if !small[l] {
                let o = w[p * l] as i128;
                discarded += uu[p * p * l] * (wl / ((1 + o) * o));
            }
            pointwise += 0.5 * u.get(p * p * l).to_f64().unwrap_or(0.0).abs();
        }
    }
    Ok(Firstbase { scale: wl, lhs: lhs * wl, sifted_small: sifted_small * wl, first_order, discarded, pointwise_bound: pointwise })
}

/// Exact three-term split behind the first step of the Vinogradov identity:
/// `Σ_{(n,𝔓(Z))=1} u_n = Σ_{(n,𝔓(z))=1} u_n − Σ_p Σ_m ρ(m) u_{pm} − (square term)`.
pub fn firstbase_decompose(u: &WeightedSeq, range: &SiftRange, cls: &PrimeClass, sieve: &FactorSieve) -> Result<DecompositionReport> {
    ensure!(range.z >= 2.0, Precondition, "z must be at least 2");
    let (den, _) = u.scaled();
    let fb = firstbase_terms(u, range, cls, sieve)?;
    let d = den * fb.scale;
    let rhs = fb.sifted_small - fb.first_order - fb.discarded;
    let mut rep = DecompositionReport::exact(
        "firstbase",
        frac(fb.lhs, d),
        vec![("sifted_small", frac(fb.sifted_small, d)), ("first_order", frac(fb.first_order, d)), ("discarded_square", frac(fb.discarded, d))],
        frac(rhs, d),
    );
    let nf = u.len() as f64;
    let cs = (nf / range.z * u.sum_sq()).sqrt();
    let bounded = if u.max_abs() <= 1.0 { nf / range.z } else { f64::INFINITY };
    let bound = cs.min(bounded);
    let disc = (fb.discarded as f64 / d as f64).abs();
    rep.bound = bound;
    rep.satisfied &= disc <= bound && disc <= fb.pointwise_bound + 1e-12;
    Ok(rep
        .metric("discarded_abs", disc)
        .metric("bound_pointwise", fb.pointwise_bound)
        .metric("bound_cauchy_schwarz", cs)
        .metric("bound_unit", bounded))
}

/// Vinogradov's splitting with `ρ`-weights, its true residual, and the
/// envelopes `E` and `E'` (all constants 1).
pub fn vino_decompose(u: &WeightedSeq, params: &SieveParams, inclusive: bool, cls: &PrimeClass, sieve: &FactorSieve) -> Result<DecompositionReport> {
    let (z, dd) = (params.z, params.d);
    let n = u.len();
    ensure!(z >= 2.0 && dd >= z, Precondition, "need 2 <= z <= D");
    ensure!(params.big_z >= z, Precondition, "need Z >= z");
    ensure!(dd * dd <= n as f64, Precondition, "need D <= sqrt(N)");
    let range = SiftRange { z, upper: params.big_z, inclusive };
    let (den, uu) = u.scaled();
    let fb = firstbase_terms(u, &range, cls, sieve)?;
    let wl = fb.scale;
    let lat = Lattice::new(z, cls)?;
    let mut main_div = 0i128;
    let mut tail = 0i128;
    for mask in 0..lat.len() {
        let dv = lat.value(mask);
        let s: i128 = if dv as usize > n { 0 } else { (1..=n / dv as usize).map(|k| uu[k * dv as usize]).sum() };
        let s = if Lattice::mu_neg(mask) { -s } else { s } * wl;
        if ge(dv, dd.floor() + 1.0) {
            tail += s;
        } else {
            main_div += s;
        }
    }
    let scale = den * wl;
    let residual = fb.lhs - main_div + fb.first_order;
    let split_ok = residual == tail - fb.discarded;
    let nf = n as f64;
    let s2 = u.sum_sq();
    let bounded = u.max_abs() <= 1.0;
    let first = if bounded { nf / z } else { (nf * s2).sqrt() / z.sqrt() };
    let e = first + (nf * s2).sqrt() * (-dd.ln() / z.ln()).exp() * (3.0 * z).ln().powi(31);
    let support_lo = (1..=n).find(|&k| uu[k] != 0).unwrap_or(n + 1);
    let big_u = (n + 1 - support_lo) as f64;
    let ratio = dd.ln() / z.ln();
    let e_prime = big_u / z + nf * (-ratio * (ratio / 2.0).ln()).exp() * z.ln().sqrt();
    let res_abs = (residual as f64 / scale as f64).abs();
    let lhs = frac(fb.lhs, scale);
    let parts = vec![
        Part { name: "divisor_sum".into(), value: frac(main_div, scale).to_value() },
        Part { name: "rho_bilinear".into(), value: frac(fb.first_order, scale).to_value() },
        Part { name: "tail_large_d".into(), value: frac(tail, scale).to_value() },
        Part { name: "discarded_square".into(), value: frac(fb.discarded, scale).to_value() },
    ];
    let mut rep = DecompositionReport {
        check: "vino".into(),
        lhs: lhs.to_value(),
        parts,
        residual: frac(residual, scale).to_value(),
        bound: e,
        satisfied: split_ok && res_abs <= e,
        metrics: Default::default(),
    };
    rep = rep.metric("E", e).metric("residual_abs", res_abs).metric("split_exact", split_ok as u8 as f64);
    if bounded {
        rep = rep.metric("E_prime", e_prime).metric("U", big_u).metric("E_prime_pass", (res_abs <= e_prime) as u8 as f64);
    }
    Ok(rep)
}

/// `Σ_{D < d | 𝔓(z)} μ²(d)/d` exactly, against `sqrt(log z) exp(−(log D/log z) log(log D/(2 log z)))`.
pub fn rankin_tail(dd: f64, z: f64, cls: &PrimeClass) -> Result<DecompositionReport> {
    let lat = Lattice::new(z, cls)?;
    let full = lat.value(lat.len() - 1);
    let big = BigInt::from(full);
    let mut num = BigInt::zero();
    for mask in 0..lat.len() {
        let v = lat.value(mask);
        if !ge(v, dd.floor() + 1.0) {
            continue;
        }
        num += &big / BigInt::from(v);
    }
    let lhs = BigRational::new(num, big);
    let regime = z >= 10.0 && 2.0 * dd.ln() >= z.ln();
    let r = dd.ln() / z.ln();
    let envelope = if regime { z.ln().sqrt() * (-r * (r / 2.0).ln()).exp() } else { f64::INFINITY };
    let lv = lhs.to_f64().unwrap_or(f64::NAN);
    let mut rep = DecompositionReport::exact("rankin", lhs.clone(), vec![], lhs);
    rep.bound = envelope;
    rep.satisfied = lv <= envelope;
    Ok(rep.metric("lhs_approx", lv).metric("envelope", envelope).metric("regime", regime as u8 as f64))
}

impl Exact for Rational64 {
    fn to_value(&self) -> crate::report::Value {
        crate::report::Value::Exact(BigRational::new((*self.numer()).into(), (*self.denom()).into()))
    }
}
