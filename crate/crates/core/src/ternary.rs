//! The ternary problem `n + b₁ + b₂ = N` with `n ∈ 𝔅`: exact counts, the
//! local-model main terms and the major/minor arc dissection.

use crate::arith::{factor_trial, phi_of, PrimeClass};
use crate::error::{ensure, Result};
use crate::expsum::e;
use crate::gaussian::{BMembership, LandauChoice};
use crate::sum::{ComplexSum, KahanSum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub const TERNARY_N_MAX: u64 = 2_000_000;
/// Largest `|𝔅₁| · |𝔅₂|` for the pair-sum table.
pub const PAIR_BUDGET: u64 = 5_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Arc {
    pub a: u64,
    pub q: u64,
    pub radius: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ArcDissection {
    pub n: u64,
    pub k: f64,
    pub b_exponent: f64,
    pub big_q: f64,
    pub arcs: Vec<Arc>,
    /// `Σ 2/(qQ)`
    pub measure: f64,
    /// Lebesgue measure of the union on the circle
    pub union_measure: f64,
}

impl ArcDissection {
    /// Whether `x ∈ [0, 1)` lies on a major arc.
    pub fn contains(&self, x: f64) -> bool {
        self.arcs.iter().any(|arc| {
            let d = x - arc.a as f64 / arc.q as f64;
            (d - d.round()).abs() <= arc.radius
        })
    }
}

fn divisors_of_squarefree(primes: &[u64]) -> Vec<u64> {
    let mut out = vec![1u64];
    for &p in primes {
        let cur = out.clone();
        out.extend(cur.into_iter().filter_map(|d| d.checked_mul(p)));
    }
    out.sort_unstable();
    out
}

/// Major arcs `|α − a/q| <= 1/(qQ)`, `q = q₂q_*`, `q₂ ∈ {1,2,4}`, `q_* | P_{4;3}(K)`,
/// `q <= N/Q`, with `Q = N/(log N)^B`.
pub fn dissect(n: u64, k: f64, b_exponent: f64) -> Result<ArcDissection> {
    ensure!(n >= 100, Precondition, "N must be at least 100");
    let ln = (n as f64).ln();
    ensure!(k >= 2.0 && k <= ln.ln() + 5.0, Precondition, "K must lie in [2, log log N + 5]");
    ensure!(b_exponent >= 0.0, Domain, "B must be non-negative");
    let big_q = n as f64 / ln.powf(b_exponent);
    let qmax = n as f64 / big_q;
    let stars = divisors_of_squarefree(&PrimeClass::Mod4Res3.primes_below(k));
    let mut arcs = Vec::new();
    for q2 in [1u64, 2, 4] {
        for &qs in &stars {
            let q = q2 * qs;
            if q as f64 > qmax {
                continue;
            }
            for a in 0..q {
                if num_integer::gcd(a, q) == 1 || q == 1 {
                    arcs.push(Arc { a, q, radius: 1.0 / (q as f64 * big_q) });
                }
            }
        }
    }
    arcs.sort_by_key(|x| (x.q, x.a));
    let measure = arcs.iter().map(|x| 2.0 * x.radius).sum();
    let mut iv: Vec<(f64, f64)> = Vec::new();
    for x in &arcs {
        let c = x.a as f64 / x.q as f64;
        if x.radius >= 0.5 {
            iv.push((0.0, 1.0));
            continue;
        }
        let (lo, hi) = (c - x.radius, c + x.radius);
        if lo < 0.0 {
            iv.push((0.0, hi));
            iv.push((lo + 1.0, 1.0));
        } else if hi > 1.0 {
            iv.push((lo, 1.0));
            iv.push((0.0, hi - 1.0));
        } else {
            iv.push((lo, hi));
        }
    }
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut union_measure = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (lo, hi) in iv {
        cur = match cur {
            Some((a, b)) if lo <= b => Some((a, b.max(hi))),
            Some((a, b)) => {
                union_measure += b - a;
                Some((lo, hi))
            }
            None => Some((lo, hi)),
        };
    }
    if let Some((a, b)) = cur {
        union_measure += b - a;
    }
    Ok(ArcDissection { n, k, b_exponent, big_q, arcs, measure, union_measure })
}

/// Selects a subset of `𝔅 ∩ [1, N]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SubsetSpec {
    Full,
    /// members `b` with `b mod modulus` in `residues`
    Residue { modulus: u64, residues: Vec<u64> },
    /// each member kept independently with probability `density`
    Thinned { density: f64, seed: u64 },
    Explicit(Vec<u64>),
}

/// Bits `0..=len`.
#[derive(Clone, Debug)]
struct Bits {
    words: Vec<u64>,
}

impl Bits {
    fn zeros(len: u64) -> Bits {
        Bits { words: vec![0; (len / 64 + 2) as usize] }
    }

    fn set(&mut self, i: u64) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    /// The 64 bits starting at bit `i`.
    #[inline]
    fn window(&self, i: u64) -> u64 {
        let (w, s) = ((i / 64) as usize, i % 64);
        let lo = self.words.get(w).copied().unwrap_or(0);
        if s == 0 {
            return lo;
        }
        let hi = self.words.get(w + 1).copied().unwrap_or(0);
        (lo >> s) | (hi << (64 - s))
    }
}

impl SubsetSpec {
    /// Members up to `n`; `stream` separates the two thinned draws.
    pub fn select(&self, n: u64, stream: u64, mem: &BMembership) -> Result<Vec<u64>> {
        ensure!(n <= mem.limit(), Domain, "N beyond membership limit");
        let all = || mem.range(1, n + 1);
        Ok(match self {
            SubsetSpec::Full => all().collect(),
            SubsetSpec::Residue { modulus, residues } => {
                ensure!(*modulus >= 1, Domain, "modulus must be positive");
                all().filter(|b| residues.contains(&(b % modulus))).collect()
            }
            SubsetSpec::Thinned { density, seed } => {
                ensure!((0.0..=1.0).contains(density), Domain, "density must lie in [0, 1]");
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(stream);
                all().filter(|_| rng.gen_bool(*density)).collect()
            }
            SubsetSpec::Explicit(v) => {
                for &b in v {
                    ensure!(b >= 1 && b <= n && mem.contains(b), Domain, "{b} is not in 𝔅 ∩ [1, N]");
                }
                let mut v = v.clone();
                v.sort_unstable();
                v.dedup();
                v
            }
        })
    }
}

fn to_bits(v: &[u64], n: u64) -> Bits {
    let mut b = Bits::zeros(n);
    for &x in v {
        b.set(x);
    }
    b
}

fn check_n(n: u64, mem: &BMembership) -> Result<()> {
    ensure!(n % 4 == 3, Precondition, "N = {n} is not 3 mod 4");
    ensure!(n <= TERNARY_N_MAX, Resource, "N above {TERNARY_N_MAX}");
    ensure!(n <= mem.limit(), Domain, "N beyond membership limit");
    Ok(())
}

/// `#{(n, b₁, b₂) : n + b₁ + b₂ = N, n ∈ 𝔅, b_i ∈ 𝔅_i}` via shifted popcounts.
pub fn ternary_count_sets(n: u64, b1: &[u64], b2: &[u64], mem: &BMembership) -> Result<u64> {
    check_n(n, mem)?;
    let set2 = to_bits(b2, n);
    // rev[x] = b(N − x) for x < N
    let mut rev = Bits::zeros(n);
    for m in mem.range(1, n + 1) {
        rev.set(n - m);
    }
    let words = set2.words.len() as u64;
    Ok(b1
        .par_iter()
        .filter(|&&x| x < n)
        .map(|&x| {
            let top = (n - x) / 64 + 1;
            (0..top.min(words)).map(|w| (set2.words[w as usize] & rev.window(x + 64 * w)).count_ones() as u64).sum::<u64>()
        })
        .sum())
}

pub fn ternary_count(n: u64, spec1: &SubsetSpec, spec2: &SubsetSpec, mem: &BMembership) -> Result<u64> {
    check_n(n, mem)?;
    let b1 = spec1.select(n, 1, mem)?;
    let b2 = spec2.select(n, 2, mem)?;
    ternary_count_sets(n, &b1, &b2, mem)
}

/// `P[s] = #{(b₁, b₂) : b₁ + b₂ = s}` for `s <= N`, by a direct double loop.
pub fn pair_sums(n: u64, b1: &[u64], b2: &[u64]) -> Result<Vec<u64>> {
    let work = b1.len() as u64 * b2.len() as u64;
    ensure!(work <= PAIR_BUDGET, Resource, "pair table needs {work} steps, above {PAIR_BUDGET}");
    let mut p = vec![0u64; n as usize + 1];
    for &x in b1 {
        for &y in b2 {
            if x + y > n {
                break;
            }
            p[(x + y) as usize] += 1;
        }
    }
    Ok(p)
}

/// The count from the pair table: `Σ_s P[s] b(N − s)`.
pub fn ternary_count_by_pairs(n: u64, b1: &[u64], b2: &[u64], mem: &BMembership) -> Result<u64> {
    check_n(n, mem)?;
    let p = pair_sums(n, b1, b2)?;
    Ok((0..n).filter(|&s| mem.contains(n - s)).map(|s| p[s as usize]).sum())
}

/// Which main term a report leads with.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantMode {
    /// `C M/φ(M) / sqrt(log N) · #pairs`
    #[default]
    Th2,
    /// `4C M/φ(M) Σ 1/sqrt(log(N − s))`
    Inith2,
}

#[derive(Clone, Debug, Serialize)]
pub struct TernaryReport {
    pub n: u64,
    pub k: f64,
    pub m: u64,
    pub count: u64,
    pub pairs_coprime: u64,
    pub weighted_pairs: f64,
    pub c: f64,
    pub constant: LandauChoice,
    pub main_th2: f64,
    pub main_inith2: f64,
    pub ratio_th2: f64,
    pub ratio_inith2: f64,
    pub mode: ConstantMode,
    pub main_term: f64,
    pub ratio: f64,
    /// value of `C` making the flat form exact
    pub empirical_c_th2: f64,
    /// value of `C` making the weighted form exact
    pub empirical_c_inith2: f64,
    /// relative gap between the two forms under the same constant
    pub form_gap: f64,
}

/// Count and both main terms, `M = P_{4;3}(K)`.
pub fn ternary_main_term(
    n: u64,
    k: f64,
    spec1: &SubsetSpec,
    spec2: &SubsetSpec,
    mode: ConstantMode,
    choice: LandauChoice,
    mem: &BMembership,
) -> Result<TernaryReport> {
    check_n(n, mem)?;
    ensure!(k >= 2.0, Precondition, "K must be at least 2");
    let primes = PrimeClass::Mod4Res3.primes_below(k);
    let m: u64 = primes.iter().try_fold(1u64, |a, &p| a.checked_mul(p)).ok_or_else(|| crate::Error::Resource("P(K) overflows".into()))?;
    let b1 = spec1.select(n, 1, mem)?;
    let b2 = spec2.select(n, 2, mem)?;
    let count = ternary_count_sets(n, &b1, &b2, mem)?;
    let p = pair_sums(n, &b1, &b2)?;
    let mut pairs = 0u64;
    let mut weighted = KahanSum::new();
    for s in 0..=n {
        let c = p[s as usize];
        let r = n - s;
        if c == 0 || num_integer::gcd(r, m) != 1 {
            continue;
        }
        pairs += c;
        if r >= 3 {
            weighted.add(c as f64 / (r as f64).ln().sqrt());
        }
    }
    let ratio_m = m as f64 / phi_of(&factor_trial(m)) as f64;
    let (c, _) = choice.constant();
    let flat = ratio_m * pairs as f64 / (n as f64).ln().sqrt();
    let wsum = ratio_m * weighted.value();
    let main_th2 = c * flat;
    let main_inith2 = 4.0 * c * wsum;
    let (main_term, ratio) = match mode {
        ConstantMode::Th2 => (main_th2, count as f64 / main_th2),
        ConstantMode::Inith2 => (main_inith2, count as f64 / main_inith2),
    };
    Ok(TernaryReport {
        n,
        k,
        m,
        count,
        pairs_coprime: pairs,
        weighted_pairs: weighted.value(),
        c,
        constant: choice,
        main_th2,
        main_inith2,
        ratio_th2: count as f64 / main_th2,
        ratio_inith2: count as f64 / main_inith2,
        mode,
        main_term,
        ratio,
        empirical_c_th2: count as f64 / flat,
        empirical_c_inith2: count as f64 / (4.0 * wsum),
        form_gap: (4.0 * wsum - flat).abs() / flat,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinorArcReport {
    pub n: u64,
    pub grid: u64,
    pub minor_points: u64,
    pub max_minor: f64,
    pub max_all: f64,
    /// `(1/G) Σ_{j/G ∈ 𝔪} |S(j/G)|^ℓ`
    pub integral_minor: f64,
    pub integral_all: f64,
    /// `N/(K sqrt(log N))`
    pub envelope: f64,
    pub margin: f64,
}

/// Grid estimates of `max_𝔪 |S|` and `∫_𝔪 |S|^ℓ`.
pub fn minor_arc_mass(n: u64, k: f64, b_exponent: f64, ell: f64, grid: u64, mem: &BMembership) -> Result<MinorArcReport> {
    ensure!(grid >= 4 * n, Precondition, "grid {grid} < 4N");
    ensure!(ell > 0.0, Domain, "ell must be positive");
    ensure!(n <= mem.limit(), Domain, "N beyond membership limit");
    let arcs = dissect(n, k, b_exponent)?;
    let members = mem.members(n);
    let table: Vec<_> = (0..grid).map(|r| e(crate::dd::DD::ratio(r as i128, grid as i128).centered_frac())).collect();
    let vals: Vec<(f64, bool)> = (0..grid)
        .into_par_iter()
        .map(|j| {
            let mut s = ComplexSum::new();
            for &m in &members {
                s.add(table[((m as u128 * j as u128) % grid as u128) as usize]);
            }
            (s.value().norm(), !arcs.contains(j as f64 / grid as f64))
        })
        .collect();
    let (mut im, mut ia) = (KahanSum::new(), KahanSum::new());
    let (mut max_minor, mut max_all, mut pts) = (0.0f64, 0.0f64, 0u64);
    for &(v, minor) in &vals {
        let p = v.powf(ell);
        ia.add(p);
        max_all = max_all.max(v);
        if minor {
            im.add(p);
            max_minor = max_minor.max(v);
            pts += 1;
        }
    }
    let envelope = n as f64 / (k * (n as f64).ln().sqrt());
    Ok(MinorArcReport {
        n,
        grid,
        minor_points: pts,
        max_minor,
        max_all,
        integral_minor: im.value() / grid as f64,
        integral_all: ia.value() / grid as f64,
        envelope,
        margin: envelope / max_minor.max(f64::MIN_POSITIVE),
    })
}
