//! Dirichlet characters, Gauss and Ramanujan sums, and `L'(1, χ4)`.

use crate::arith::{divisors_of, factor_trial, moebius_of, phi_of};
use crate::dd::DD;
use crate::error::{ensure, Result};
use crate::expsum::e;
use crate::sum::{ComplexSum, KahanSum};
use num_complex::Complex64;
use serde::Serialize;

pub const MODULUS_MAX: u64 = 10_000;
/// Cap on `q * φ(q)` table entries.
pub const TABLE_CAP: u64 = 1 << 24;
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const NON_UNIT: u32 = u32::MAX;

/// A character mod `q`: `χ(n) = e(phase[n mod q] / order)`, zero off the units.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DirichletCharacter {
    pub modulus: u64,
    pub order: u64,
    pub is_principal: bool,
    /// Exponents on the chosen generators; empty for characters built from values.
    pub label: Vec<u64>,
    phases: Vec<u32>,
}

impl DirichletCharacter {
    /// Exact phase index of `χ(n)`, `None` when `gcd(n, q) > 1`.
    pub fn phase(&self, n: i64) -> Option<u64> {
        let r = n.rem_euclid(self.modulus as i64) as usize;
        match self.phases[r] {
            NON_UNIT => None,
            k => Some(k as u64),
        }
    }

    pub fn value(&self, n: i64) -> Complex64 {
        match self.phase(n) {
            None => Complex64::new(0.0, 0.0),
            Some(k) => e(DD::ratio(k as i128, self.order as i128).centered_frac()),
        }
    }

    pub fn values(&self) -> Vec<Complex64> {
        (0..self.modulus as i64).map(|n| self.value(n)).collect()
    }

    pub fn conj(&self) -> DirichletCharacter {
        let phases = self.phases.iter().map(|&k| if k == NON_UNIT { k } else { ((self.order - k as u64) % self.order) as u32 }).collect();
        DirichletCharacter { modulus: self.modulus, order: self.order, is_principal: self.is_principal, label: Vec::new(), phases }
    }

    /// Smallest `f | q` such that `χ(n) = 1` whenever `n ≡ 1 mod f` and `gcd(n, q) = 1`.
    pub fn conductor(&self) -> u64 {
        let q = self.modulus;
        for f in divisors_of(&factor_trial(q)) {
            let ok = (1..q).step_by(f as usize).all(|n| self.phases[n as usize] == NON_UNIT || self.phases[n as usize] == 0);
            if ok {
                return f;
            }
        }
        q
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor() == self.modulus
    }
}

fn primitive_root_prime(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let fac: Vec<u64> = factor_trial(p - 1).into_iter().map(|(r, _)| r).collect();
    (2..p).find(|&g| fac.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1)).expect("primitive root exists")
}

pub(crate) fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1u64 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = ((r as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    r
}

/// One cyclic factor of `(Z/qZ)^*`: discrete logs of residues mod `m`.
struct Cyclic {
    m: u64,
    order: u64,
    log: Vec<u32>,
}

fn cyclic_factors(q: u64) -> Vec<Cyclic> {
    let mut out = Vec::new();
    for (p, k) in factor_trial(q) {
        let m = p.pow(k);
        if p == 2 {
            if k == 1 {
                continue;
            }
            let half = m / 4;
            let mut sign = vec![NON_UNIT; m as usize];
            let mut five = vec![NON_UNIT; m as usize];
            let mut x = 1u64;
            for j in 0..half.max(1) {
                sign[x as usize] = 0;
                five[x as usize] = j as u32;
                sign[(m - x) as usize] = 1;
                five[(m - x) as usize] = j as u32;
                x = x * 5 % m;
            }
            out.push(Cyclic { m, order: 2, log: sign });
            if k >= 3 {
                out.push(Cyclic { m, order: half, log: five });
            }
        } else {
            let mut g = primitive_root_prime(p);
            if k > 1 && pow_mod(g, p - 1, p * p) == 1 {
                g += p;
            }
            let order = m / p * (p - 1);
            let mut log = vec![NON_UNIT; m as usize];
            let mut x = 1u64;
            for j in 0..order {
                log[x as usize] = j as u32;
                x = x * g % m;
            }
            out.push(Cyclic { m, order, log });
        }
    }
    out
}

/// All `φ(q)` characters mod `q`; the principal one comes first.
pub fn characters_mod(q: u64) -> Result<Vec<DirichletCharacter>> {
    ensure!(q >= 1, Domain, "modulus must be positive");
    ensure!(q <= MODULUS_MAX, Domain, "modulus {q} above {MODULUS_MAX}");
    let phi = phi_of(&factor_trial(q));
    ensure!(q * phi <= TABLE_CAP, Resource, "character table for q = {q} needs {} entries", q * phi);
    let comps = cyclic_factors(q);
    let order = comps.iter().fold(1u64, |l, c| num_integer::lcm(l, c.order));
    let logs: Vec<Option<Vec<u64>>> = (0..q)
        .map(|n| {
            if num_integer::gcd(n, q) != 1 {
                return None;
            }
            Some(comps.iter().map(|c| c.log[(n % c.m) as usize] as u64).collect())
        })
        .collect();
    let mut out = Vec::with_capacity(phi as usize);
    let mut label = vec![0u64; comps.len()];
    loop {
        let phases = logs
            .iter()
            .map(|l| match l {
                None => NON_UNIT,
                Some(v) => (v.iter().zip(&label).zip(&comps).map(|((x, j), c)| x * j * (order / c.order)).sum::<u64>() % order) as u32,
            })
            .collect();
        let is_principal = label.iter().all(|&j| j == 0);
        out.push(DirichletCharacter { modulus: q, order, is_principal, label: label.clone(), phases });
        let mut i = 0;
        loop {
            if i == comps.len() {
                return Ok(out);
            }
            label[i] += 1;
            if label[i] < comps[i].order {
                break;
            }
            label[i] = 0;
            i += 1;
        }
    }
}

/// The non-principal character mod 4 on all integers.
pub fn chi4(n: i64) -> i32 {
    match n.rem_euclid(4) {
        1 => 1,
        3 => -1,
        _ => 0,
    }
}

/// `χ4` induced to modulus `q` (`4 | q`).
pub fn induced_chi4(q: u64) -> Result<DirichletCharacter> {
    ensure!(q % 4 == 0 && q <= MODULUS_MAX, Domain, "induced χ4 needs 4 | q <= {MODULUS_MAX}");
    let phases = (0..q as i64)
        .map(|n| if num_integer::gcd(n as u64, q) != 1 { NON_UNIT } else if chi4(n) == 1 { 0 } else { 1 })
        .collect();
    Ok(DirichletCharacter { modulus: q, order: 2, is_principal: false, label: Vec::new(), phases })
}

/// The principal character mod `q`.
pub fn principal(q: u64) -> Result<DirichletCharacter> {
    ensure!(q >= 1 && q <= MODULUS_MAX, Domain, "modulus outside [1, {MODULUS_MAX}]");
    let phases = (0..q).map(|n| if num_integer::gcd(n, q) == 1 { 0 } else { NON_UNIT }).collect();
    Ok(DirichletCharacter { modulus: q, order: 1, is_principal: true, label: Vec::new(), phases })
}

/// `τ_q(χ) = Σ_{b mod* q} χ(b) e(b/q)`, phases combined exactly before rounding.
pub fn gauss_sum(chi: &DirichletCharacter) -> Complex64 {
    let (q, l) = (chi.modulus as i128, chi.order as i128);
    let mut acc = ComplexSum::new();
    for b in 0..chi.modulus as i64 {
        if let Some(k) = chi.phase(b) {
            let num = (k as i128 * q + b as i128 * l) % (q * l);
            acc.add(e(DD::ratio(num, q * l).centered_frac()));
        }
    }
    acc.value()
}

/// Closed forms as printed for the two characters of interest: `μ(q)` for the
/// principal character and `-2i μ(q/2)` for `χ4` when `4 | q`.
pub fn gauss_closed_form_stated(q: u64, chi4_case: bool) -> Complex64 {
    if chi4_case {
        let mu = moebius_of(&factor_trial(q / 2)) as f64;
        Complex64::new(0.0, -2.0 * mu)
    } else {
        Complex64::new(moebius_of(&factor_trial(q)) as f64, 0.0)
    }
}

/// `τ_q(χ4) = μ(q')χ4(q')τ_4(χ4)` with `q = 4q'`, `q'` odd, and 0 when `8 | q`.
pub fn gauss_chi4_exact(q: u64) -> Complex64 {
    if q % 4 != 0 || q % 8 == 0 {
        return Complex64::new(0.0, 0.0);
    }
    let odd = q / 4;
    let mu = moebius_of(&factor_trial(odd)) as f64;
    Complex64::new(0.0, 2.0 * mu * chi4(odd as i64) as f64)
}

/// `c_q(n) = Σ_{d | (n, q)} d μ(q/d)`.
pub fn ramanujan_sum(q: u64, n: i64) -> Result<i64> {
    ensure!(q >= 1, Domain, "q must be positive");
    let g = num_integer::gcd(n.unsigned_abs(), q);
    let g = if g == 0 { q } else { g };
    Ok(divisors_of(&factor_trial(g)).into_iter().map(|d| d as i64 * moebius_of(&factor_trial(q / d)) as i64).sum())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LPrimeChi4 {
    /// `L'(1, χ4)`
    pub value: f64,
    /// `(L'/L(1, χ4) - γ - log 2) / 2`
    pub combined: f64,
    /// Rigorous bound on `|value - L'(1, χ4)|` from the tail bracket.
    pub error_bound: f64,
    pub terms: u64,
}

fn g(x: f64) -> f64 {
    x.ln() / x
}

fn dg(x: f64) -> f64 {
    (1.0 - x.ln()) / (x * x)
}

/// Pair term `f(k) = log(4k+1)/(4k+1) - log(4k+3)/(4k+3)`; positive for `k >= 1`.
fn pair(k: f64) -> f64 {
    g(4.0 * k + 1.0) - g(4.0 * k + 3.0)
}

/// `L'(1, χ4) = -Σ_k f(k)`: `terms` pairs summed directly, the tail by
/// Euler–Maclaurin and bracketed between `∫_K^∞ f` and `f(K) + ∫_K^∞ f`.
pub fn lprime_chi4(terms: u64) -> Result<LPrimeChi4> {
    ensure!(terms >= 10_000, Precondition, "need at least 1e4 terms");
    let mut s = KahanSum::new();
    for k in 0..terms {
        s.add(pair(k as f64));
    }
    let kk = terms as f64;
    let integral = ((4.0 * kk + 3.0).ln().powi(2) - (4.0 * kk + 1.0).ln().powi(2)) / 8.0;
    let fk = pair(kk);
    let dfk = 4.0 * (dg(4.0 * kk + 1.0) - dg(4.0 * kk + 3.0));
    let tail = integral + fk / 2.0 - dfk / 12.0;
    let value = -(s.value() + tail);
    let l = std::f64::consts::FRAC_PI_4;
    Ok(LPrimeChi4 {
        value,
        combined: 0.5 * (value / l - EULER_GAMMA - std::f64::consts::LN_2),
        error_bound: fk + 1e-15,
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_orthogonality() {
        for q in 1..=200u64 {
            let chars = characters_mod(q).unwrap();
            let phi = phi_of(&factor_trial(q));
            assert_eq!(chars.len() as u64, phi);
            assert!(chars[0].is_principal);
            let vals: Vec<Vec<Complex64>> = chars.iter().map(|c| c.values()).collect();
            for (i, a) in vals.iter().enumerate() {
                for (j, b) in vals.iter().enumerate().skip(i) {
                    let s: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                    let want = if i == j { phi as f64 } else { 0.0 };
                    assert!((s - want).norm() < 1e-9, "q={q} i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn closed_under_conjugation_and_multiplicative() {
        for q in [8u64, 15, 16, 24, 45, 100] {
            let chars = characters_mod(q).unwrap();
            for c in &chars {
                let cc = c.conj();
                assert!(chars.iter().any(|d| d.phases == cc.phases));
                let v = c.values();
                for m in 0..q as usize {
                    for n in 0..q as usize {
                        assert!((v[m * n % q as usize] - v[m] * v[n]).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn gauss_sum_sizes() {
        for q in 1..=300u64 {
            for c in characters_mod(q).unwrap() {
                let t = gauss_sum(&c).norm();
                assert!(t <= (q as f64).sqrt() + 1e-8);
                if c.is_primitive() {
                    assert!((t - (q as f64).sqrt()).abs() < 1e-8, "q={q}");
                }
            }
        }
    }

    #[test]
    fn gauss_closed_forms() {
        for q in 1..=500u64 {
            let t = gauss_sum(&principal(q).unwrap());
            assert!((t - gauss_closed_form_stated(q, false)).norm() < 1e-8);
            if q % 4 == 0 {
                let t = gauss_sum(&induced_chi4(q).unwrap());
                assert!((t - gauss_chi4_exact(q)).norm() < 1e-8, "q={q}");
            }
        }
        assert!((gauss_sum(&induced_chi4(4).unwrap()) - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!(gauss_sum(&induced_chi4(8).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn stated_chi4_form_differs_when_odd_part_is_3_mod_4() {
        let t = gauss_sum(&induced_chi4(12).unwrap());
        assert!((t - Complex64::new(0.0, 2.0)).norm() < 1e-12);
        assert!((t - gauss_closed_form_stated(12, true)).norm() > 1.0);
        let t20 = gauss_sum(&induced_chi4(20).unwrap());
        assert!((t20 - gauss_closed_form_stated(20, true)).norm() < 1e-12);
    }

    #[test]
    fn conductors() {
        let c8 = characters_mod(8).unwrap();
        let mut conds: Vec<u64> = c8.iter().map(|c| c.conductor()).collect();
        conds.sort();
        assert_eq!(conds, vec![1, 4, 8, 8]);
        assert_eq!(induced_chi4(12).unwrap().conductor(), 4);
        assert!(characters_mod(7).unwrap().iter().skip(1).all(|c| c.is_primitive()));
    }

    #[test]
    fn ramanujan() {
        assert_eq!(ramanujan_sum(1, 17).unwrap(), 1);
        assert_eq!(ramanujan_sum(3, 1).unwrap(), -1);
        assert_eq!(ramanujan_sum(4, 2).unwrap(), -2);
        for q in 1..=60u64 {
            let mu = moebius_of(&factor_trial(q)) as i64;
            assert_eq!(ramanujan_sum(q, 0).unwrap() as u64, phi_of(&factor_trial(q)));
            for n in -30..=30i64 {
                let direct: f64 = (0..q).filter(|&b| num_integer::gcd(b, q) == 1).map(|b| (std::f64::consts::TAU * (b as f64) * (n as f64) / q as f64).cos()).sum();
                let c = ramanujan_sum(q, n).unwrap();
                assert!((c as f64 - direct).abs() < 1e-9, "q={q} n={n}");
                if num_integer::gcd(n.unsigned_abs(), q) == 1 {
                    assert_eq!(c, mu);
                }
            }
        }
        for (q1, q2) in [(3u64, 4u64), (5, 9), (7, 8)] {
            for n in 0..40 {
                assert_eq!(ramanujan_sum(q1 * q2, n).unwrap(), ramanujan_sum(q1, n).unwrap() * ramanujan_sum(q2, n).unwrap());
            }
        }
    }

    #[test]
    fn lprime() {
        let r = lprime_chi4(10_000).unwrap();
        assert!((r.value - 0.192901).abs() < 1e-5);
        assert!((r.combined + 0.512376).abs() < 1e-5);
        assert!(r.error_bound < 1e-6);
        // rearranged positive series, summed much further
        let mut s = KahanSum::new();
        s.add(-(3f64).ln() / 3.0);
        let big = 2_000_000u64;
        for k in 1..big {
            let a = 4.0 * k as f64 + 1.0;
            s.add((2.0 * a.ln() - a * (2.0 / a).ln_1p()) / (a * (a + 2.0)));
        }
        let kk = big as f64;
        let tail = ((4.0 * kk + 3.0).ln().powi(2) - (4.0 * kk + 1.0).ln().powi(2)) / 8.0;
        assert!((-(s.value() + tail) - r.value).abs() < 1e-9);
        assert!(lprime_chi4(10).is_err());
    }

    #[test]
    fn domain_and_cap() {
        assert!(matches!(characters_mod(0), Err(crate::Error::Domain(_))));
        assert!(matches!(characters_mod(10_000), Err(crate::Error::Resource(_))));
        assert_eq!(chi4(-1), -1);
        assert_eq!(chi4(6), 0);
    }
}
