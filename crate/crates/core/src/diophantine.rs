//! Quadratic irrationals: the Pell sequence attached to `√2`, continued
//! fractions, and counts of `b ∈ 𝔅` with `‖bα − β‖ <= δ`.

use crate::dd::DD;
use crate::error::{ensure, Result};
use crate::expsum::{family_sum, Alpha};
use crate::gaussian::BMembership;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::HashMap;

pub const PELL_K_MAX: u32 = 80;
pub const CONVERGENT_Q_MAX: u128 = 1_000_000_000_000;
/// Width of the band around `δ` where distances are settled exactly.
const TIE_BAND: f64 = 1e-14;
pub const TRIGO_APPROX_CONSTANT: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PellPair {
    pub k: u32,
    pub n_k: u128,
}

/// `|√2 − x/n| <= 1/(2n²)` decided in integers: `|2√2 n² − 2nx| <= 1`.
pub fn pell_inequality_holds(n: u128, x: u128) -> bool {
    let n = BigInt::from(n);
    let a = BigInt::from(2) * &n * BigInt::from(x);
    let t = BigInt::from(8) * n.pow(4);
    let lo: BigInt = &a - 1;
    let hi: BigInt = &a + 1;
    (lo.is_negative() || &lo * &lo <= t) && t <= &hi * &hi
}

/// `N_1 = 1`, `N_2 = 2`, `N_{k+2} = 2N_{k+1} + N_k`, each checked against
/// the approximation inequality and coprimality with its successor.
pub fn pell_sequence(k_max: u32) -> Result<Vec<PellPair>> {
    ensure!((1..=PELL_K_MAX).contains(&k_max), Resource, "k_max must lie in [1, {PELL_K_MAX}]");
    let mut v: Vec<u128> = vec![1, 2];
    while v.len() < k_max as usize + 1 {
        let l = v.len();
        let next = v[l - 1].checked_mul(2).and_then(|x| x.checked_add(v[l - 2]));
        v.push(next.ok_or_else(|| crate::Error::Resource("Pell term overflows u128".into()))?);
    }
    for k in 0..k_max as usize {
        let (n, m) = (v[k], v[k + 1]);
        ensure!(pell_inequality_holds(n, m - n), Domain, "approximation inequality fails at k = {}", k + 1);
        ensure!(n.gcd(&m) == 1, Domain, "N_{} and N_{} share a factor", k + 1, k + 2);
    }
    Ok(v.into_iter().take(k_max as usize).enumerate().map(|(i, n_k)| PellPair { k: i as u32 + 1, n_k }).collect())
}

/// Some `N_k` in `[y, 3y]`.
pub fn pell_in_interval(y: u128, seq: &[PellPair]) -> Option<PellPair> {
    seq.iter().copied().find(|p| p.n_k >= y && p.n_k <= 3 * y)
}

/// Sign of `u + v√d` for non-square `d`.
fn sign_surd(u: &BigInt, v: &BigInt, d: u64) -> Ordering {
    let zero = BigInt::zero();
    let (su, sv) = (u.cmp(&zero), v.cmp(&zero));
    if sv == Ordering::Equal {
        return su;
    }
    if su == Ordering::Equal || su == sv {
        return sv;
    }
    if u * u > v * v * BigInt::from(d) {
        su
    } else {
        sv
    }
}

/// `(p + q√d)/r` with `d` not a square, normalised to `q > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct QuadraticIrrational {
    pub p: i64,
    pub q: i64,
    pub r: i64,
    pub d: u64,
}

impl QuadraticIrrational {
    pub fn new(p: i64, q: i64, r: i64, d: u64) -> Result<Self> {
        ensure!(q != 0 && r != 0, Domain, "q and r must be non-zero");
        let s = d.isqrt();
        ensure!(s * s != d, Domain, "{d} is a perfect square");
        let (p, q, r) = if q < 0 { (-p, -q, -r) } else { (p, q, r) };
        let g = p.gcd(&q).gcd(&r);
        Ok(QuadraticIrrational { p: p / g, q: q / g, r: r / g, d })
    }

    pub fn sqrt(d: u64) -> Result<Self> {
        Self::new(0, 1, 1, d)
    }

    pub fn golden() -> Self {
        Self::new(1, 1, 2, 5).expect("valid")
    }

    /// `sqrt:D`, `golden` or `quad:p,q,r,d`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "golden" {
            return Ok(Self::golden());
        }
        if let Some(d) = s.strip_prefix("sqrt:") {
            return Self::sqrt(d.trim().parse().map_err(|_| crate::Error::Config(format!("bad radicand in {s}")))?);
        }
        if let Some(rest) = s.strip_prefix("quad:") {
            let v: Vec<i64> = rest.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| crate::Error::Config(format!("bad quad spec {s}")))?;
            ensure!(v.len() == 4 && v[3] > 0, Config, "quad needs p,q,r,d with d > 0");
            return Self::new(v[0], v[1], v[2], v[3] as u64);
        }
        Err(crate::Error::Config(format!("unknown irrational {s}")))
    }

    /// Continued fraction digits, with the index where the period starts and its length.
    pub fn continued_fraction(&self, count: usize) -> (Vec<i128>, usize, usize) {
        let (p, q, r, d) = (self.p as i128, self.q as i128, self.r as i128, self.d as i128);
        let mut big_p = p * r.abs();
        let big_d = q * q * r * r * d;
        let mut big_q = r * r.abs();
        let f = (big_d as u128).isqrt() as i128;
        let mut digits = Vec::new();
        let mut seen: HashMap<(i128, i128), usize> = HashMap::new();
        let mut period = (0, 0);
        while digits.len() < count {
            if period.1 == 0 {
                if let Some(&i) = seen.get(&(big_p, big_q)) {
                    period = (i, digits.len() - i);
                } else {
                    seen.insert((big_p, big_q), digits.len());
                }
            }
            let a = Integer::div_floor(&(big_p + f + i128::from(big_q < 0)), &big_q);
            digits.push(a);
            big_p = a * big_q - big_p;
            big_q = (big_d - big_p * big_p) / big_q;
        }
        if period.1 == 0 {
            // keep stepping until a state repeats
            let (mut pp, mut qq) = (big_p, big_q);
            let mut i = digits.len();
            while period.1 == 0 && i < count + 10_000 {
                if let Some(&j) = seen.get(&(pp, qq)) {
                    period = (j, i - j);
                    break;
                }
                seen.insert((pp, qq), i);
                let a = Integer::div_floor(&(pp + f + i128::from(qq < 0)), &qq);
                pp = a * qq - pp;
                qq = (big_d - pp * pp) / qq;
                i += 1;
            }
        }
        (digits, period.0, period.1)
    }

    /// Sign of `nα − c`.
    pub fn cmp_multiple(&self, n: &BigInt, c: &BigRational) -> Ordering {
        let u = n * BigInt::from(self.p) * c.denom() - BigInt::from(self.r) * c.numer();
        let v = n * BigInt::from(self.q) * c.denom();
        let s = sign_surd(&u, &v, self.d);
        if self.r < 0 {
            s.reverse()
        } else {
            s
        }
    }
}

/// A real number with double-double phases and exact comparisons against rationals.
pub trait RealPoint: Sync {
    fn to_dd(&self) -> DD;
    /// Sign of `nα − c`.
    fn cmp_multiple(&self, n: &BigInt, c: &BigRational) -> Ordering;
}

impl RealPoint for QuadraticIrrational {
    fn to_dd(&self) -> DD {
        (DD::from_i128(self.p as i128) + DD::from_i128(self.q as i128) * DD::from_i128(self.d as i128).sqrt()) / DD::from_i128(self.r as i128)
    }

    fn cmp_multiple(&self, n: &BigInt, c: &BigRational) -> Ordering {
        QuadraticIrrational::cmp_multiple(self, n, c)
    }
}

impl RealPoint for BigRational {
    fn to_dd(&self) -> DD {
        DD::from_rational(self)
    }

    fn cmp_multiple(&self, n: &BigInt, c: &BigRational) -> Ordering {
        (self * BigRational::from_integer(n.clone())).cmp(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Convergent {
    pub a: i128,
    pub q: u128,
}

/// Convergents `a/q` of `α` with `q <= q_max`.
pub fn convergents(alpha: &QuadraticIrrational, q_max: u128) -> Result<Vec<Convergent>> {
    ensure!(q_max >= 1 && q_max <= CONVERGENT_Q_MAX, Precondition, "q_max must lie in [1, {CONVERGENT_Q_MAX}]");
    let (digits, _, _) = alpha.continued_fraction(100);
    let (mut a0, mut a1) = (0i128, 1i128);
    let (mut q0, mut q1) = (1u128, 0u128);
    let mut out = Vec::new();
    for &c in &digits {
        let a2 = c * a1 + a0;
        let q2 = c as u128 * q1 + q0;
        if q2 > q_max {
            break;
        }
        out.push(Convergent { a: a2, q: q2 });
        (a0, a1, q0, q1) = (a1, a2, q1, q2);
    }
    Ok(out)
}

/// `|qα − a| <= bound` decided exactly, for rational `bound > 0`.
pub fn within<A: RealPoint>(alpha: &A, q: u128, a: i128, bound: &BigRational) -> bool {
    let qa = BigRational::from_integer(BigInt::from(a));
    let q = BigInt::from(q);
    alpha.cmp_multiple(&q, &(&qa + bound)) != Ordering::Greater && alpha.cmp_multiple(&q, &(&qa - bound)) != Ordering::Less
}

/// `‖nα − β‖ <= δ`, settled exactly when the double-double distance is within
/// `TIE_BAND` of `δ`.
fn close_to<A: RealPoint>(alpha: &A, alpha_dd: DD, n: u64, beta: &BigRational, beta_dd: DD, delta: &BigRational, delta_f: f64) -> bool {
    let x = alpha_dd.mul_f64(n as f64) - beta_dd;
    let y = x.centered_frac();
    let dist = y.abs();
    if (dist - delta_f).abs() > TIE_BAND {
        return dist <= delta_f;
    }
    let m = (x - DD::from_f64(y)).to_f64().round() as i128;
    let nb = BigInt::from(n);
    (m - 1..=m + 1).any(|m| {
        let centre = beta + BigRational::from_integer(BigInt::from(m));
        alpha.cmp_multiple(&nb, &(&centre + delta)) != Ordering::Greater && alpha.cmp_multiple(&nb, &(&centre - delta)) != Ordering::Less
    })
}

/// `#{b <= N : b ∈ 𝔅, ‖bα − β‖ <= δ}`.
pub fn equidist_count<A: RealPoint>(alpha: &A, beta: &BigRational, delta: &BigRational, n: u64, mem: &BMembership) -> Result<u64> {
    ensure!(n <= mem.limit(), Domain, "N beyond membership limit");
    ensure!(!delta.is_negative(), Domain, "delta must be non-negative");
    let members = mem.members(n);
    if *delta >= BigRational::new(BigInt::one(), BigInt::from(2)) {
        return Ok(members.len() as u64);
    }
    let (a_dd, b_dd) = (alpha.to_dd(), DD::from_rational(beta));
    let d_f = delta.to_f64().unwrap_or(0.0);
    Ok(members
        .par_chunks(4096)
        .map(|c| c.iter().filter(|&&b| close_to(alpha, a_dd, b, beta, b_dd, delta, d_f)).count() as u64)
        .sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct TrigoApproxReport {
    pub n: u64,
    pub r: u64,
    pub delta: f64,
    pub count: u64,
    pub b_n: u64,
    pub main: f64,
    pub deviation: f64,
    pub family: f64,
    /// `δ Σ_{r <= R} |S(rα)| + B(N)/R`
    pub budget: f64,
    pub constant: f64,
    pub satisfied: bool,
}

/// Compares the count with `2δB(N)` and the family-sum error budget.
pub fn trigo_approx_check<A: RealPoint>(alpha: &A, beta: &BigRational, delta: &BigRational, r: u64, n: u64, mem: &BMembership) -> Result<TrigoApproxReport> {
    let count = equidist_count(alpha, beta, delta, n, mem)?;
    let b_n = mem.count(n);
    let d = delta.to_f64().unwrap_or(0.0);
    let main = 2.0 * d * b_n as f64;
    let family = family_sum(&Alpha::real(alpha.to_dd()), r, n, mem)?;
    let budget = d * family + b_n as f64 / r as f64;
    let deviation = (count as f64 - main).abs();
    Ok(TrigoApproxReport {
        n,
        r,
        delta: d,
        count,
        b_n,
        main,
        deviation,
        family,
        budget,
        constant: TRIGO_APPROX_CONSTANT,
        satisfied: deviation <= TRIGO_APPROX_CONSTANT * budget,
    })
}
