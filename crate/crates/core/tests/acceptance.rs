use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;
use tsl_core::arith::{mertens_scan, FactorSieve, PrimeClass};
use tsl_core::bilinear::kernel_decay_slope;
use tsl_core::characters::{gauss_chi4_exact, gauss_closed_form_stated, gauss_sum, induced_chi4, lprime_chi4, principal};
use tsl_core::dd::DD;
use tsl_core::diophantine::{equidist_count, pell_in_interval, pell_sequence, QuadraticIrrational};
use tsl_core::expsum::{lp_norm_grid, s_alpha, sqrt2_envelope, Alpha};
use tsl_core::gaussian::{count_b, is_b, is_b_bruteforce, landau_c, landau_c_sd, BMembership, LandauChoice};
use tsl_core::sieve_identity::{
    buchstab_check, firstbase_decompose, fsi_check, harman_decompose, harman_valid_splits, simple_sieve_decompose, SiftRange, Truncation, WeightedSeq,
};
use tsl_core::ternary::{ternary_count, ternary_main_term, ConstantMode, SubsetSpec};

const C1_N: u64 = 100_000;
const C1_SECS: f64 = 60.0;
const C2_INSTANCES: u64 = 1000;
const C2_Z_MAX: f64 = 30.0;
const C2_N_MAX: usize = 5000;
const C2_SECS: f64 = 300.0;
const C3_D_MAX: u64 = 100_000;
const C3_M0: [f64; 3] = [2.0, 10.0, 100.0];
const C4_Q_MAX: u64 = 500;
const C4_TOL: f64 = 1e-8;
const C5_LPRIME: f64 = 0.192901;
const C5_COMBINED: f64 = -0.512376;
const C5_TOL: f64 = 1e-5;
const C5_Z_MAX: u64 = 1_000_000;
const C6_K_MAX: u32 = 80;
const C6_J_MAX: u32 = 7;
const C7_NS: [u64; 3] = [1_000, 10_000, 100_000];
const C7_TOL: f64 = 1e-9;
const C7_PARSEVAL_TOL: f64 = 0.01;
const C8_RANGE: (f64, f64) = (0.9, 1.3);
const C8_SECS: f64 = 120.0;
const C9_LAMBDA: f64 = 0.2;
const C9_N: u64 = 1_000_000;
const C9_RANGE: (f64, f64) = (0.85, 1.15);
const C9_SECS: f64 = 300.0;
const C10_NS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
const C11_ORACLE_MAX: u64 = 2000;
const C11_N: u64 = 99_999;
const C11_K: f64 = 4.0;
const C11_RANGE: (f64, f64) = (0.4, 2.5);
const C12_TS: [f64; 4] = [1e2, 1e3, 1e4, 1e5];
const C12_RANGE: (f64, f64) = (-1.3, -0.7);

/// Criteria whose statement cannot hold; they are run and reported as FAIL.
const KNOWN_UNATTAINABLE: [(u32, &str); 2] = [
    (4, "the closed form −2iμ(q/2) for χ₄ has the wrong sign when q/4 ≡ 3 mod 4"),
    (8, "the constant C ≈ 1.528 is about 4.7 times the true asymptotic constant of B(N)"),
];

struct Outcome {
    id: u32,
    pass: bool,
}

fn run(id: u32, name: &str, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (pass, detail) = f();
    let secs = t.elapsed().as_secs_f64();
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("C{id:<2} {tag} {name} [{secs:.1}s] {detail}");
    Outcome { id, pass }
}

fn psi_from(u: Vec<i64>) -> impl Fn(u128) -> i128 {
    move |d: u128| {
        let n = u.len() as u128;
        if d == 0 || d > n {
            return 0;
        }
        let mut s = 0i128;
        let mut k = d;
        while k <= n {
            s += u[(k - 1) as usize] as i128;
            k += d;
        }
        s
    }
}

fn c1() -> (bool, String) {
    let t = Instant::now();
    let sieve = FactorSieve::new(C1_N).unwrap();
    let mut bad = 0u64;
    for n in 1..=C1_N {
        if is_b(n, &sieve).unwrap() != is_b_bruteforce(n).unwrap() {
            bad += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    (bad == 0 && secs < C1_SECS, format!("mismatches={bad} n<={C1_N}"))
}

fn c2() -> (bool, String) {
    let t = Instant::now();
    let classes = [PrimeClass::Mod4Res3, PrimeClass::Mod3Res2, PrimeClass::NotOneMod12];
    let sieve = FactorSieve::new(C2_N_MAX as u64).unwrap();
    let mut fails = [0u64; 4];
    for seed in 0..C2_INSTANCES {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cls = &classes[(seed % 3) as usize];
        let n = rng.gen_range(50..=C2_N_MAX);
        let z = rng.gen_range(2.0..=C2_Z_MAX);
        let u: Vec<i64> = (0..n).map(|_| rng.gen_range(-5..=5)).collect();
        let psi = psi_from(u.clone());
        let nabla = match seed % 3 {
            0 => Truncation::Below(rng.gen_range(2.0..200.0)),
            1 => Truncation::OmegaAtMost(rng.gen_range(0..4)),
            _ => {
                let cap = rng.gen_range(2u128..500);
                Truncation::Custom(Arc::new(move |d, w| d < cap || w == 0))
            }
        };
        if !fsi_check(&psi, &nabla, z, cls).map(|r| r.residual.is_exact_zero()).unwrap_or(false) {
            fails[0] += 1;
        }
        let small = [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29];
        let ell = small[rng.gen_range(0..small.len())] * rng.gen_range(1..=(n as u64 / 30).max(1));
        let m = rng.gen_range(1.0..(n as f64));
        if !buchstab_check(&psi, ell, m, cls).map(|r| r.residual.is_exact_zero()).unwrap_or(false) {
            fails[1] += 1;
        }
        let m0 = rng.gen_range(1.0..20.0);
        let mm = m0 + rng.gen_range(0.0..200.0);
        if !simple_sieve_decompose(&psi, z, mm, m0, cls).map(|r| r.residual.is_exact_zero()).unwrap_or(false) {
            fails[2] += 1;
        }
        let w = WeightedSeq::from_ints(&u).unwrap();
        let range = SiftRange::half_open(z, z + rng.gen_range(0.0..60.0));
        if !firstbase_decompose(&w, &range, cls, &sieve).map(|r| r.residual.is_exact_zero()).unwrap_or(false) {
            fails[3] += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let ok = fails.iter().all(|&f| f == 0) && secs < C2_SECS;
    (ok, format!("nonzero residuals fsi={} buchstab={} simple={} firstbase={} over {C2_INSTANCES} each", fails[0], fails[1], fails[2], fails[3]))
}

fn c3() -> (bool, String) {
    let cls = PrimeClass::Mod4Res3;
    let sieve = FactorSieve::new(C3_D_MAX).unwrap();
    let (mut checked, mut bad) = (0u64, 0u64);
    for d in 1..=C3_D_MAX {
        let f = sieve.factorize(d).unwrap();
        if !f.iter().all(|&(p, e)| e == 1 && p % 4 == 3) {
            continue;
        }
        for m0 in C3_M0 {
            if (d as f64) < m0 {
                continue;
            }
            checked += 1;
            let got = harman_decompose(d, m0).unwrap();
            let all = harman_valid_splits(d, m0, &cls).unwrap();
            if all != vec![got] {
                bad += 1;
            }
        }
    }
    (bad == 0 && checked > 0, format!("cases={checked} mismatches={bad}"))
}

fn c4() -> (bool, String) {
    let mut worst0 = 0.0f64;
    for q in 1..=C4_Q_MAX {
        let g = gauss_sum(&principal(q).unwrap());
        worst0 = worst0.max((g - gauss_closed_form_stated(q, false)).norm());
    }
    let (mut worst4, mut bad4, mut first) = (0.0f64, 0u64, None);
    let mut worst_exact = 0.0f64;
    for q in (4..=C4_Q_MAX).step_by(4) {
        let g = gauss_sum(&induced_chi4(q).unwrap());
        let err = (g - gauss_closed_form_stated(q, true)).norm();
        worst4 = worst4.max(err);
        worst_exact = worst_exact.max((g - gauss_chi4_exact(q)).norm());
        if err > C4_TOL {
            bad4 += 1;
            first.get_or_insert(q);
        }
    }
    let ok = worst0 <= C4_TOL && worst4 <= C4_TOL;
    (
        ok,
        format!(
            "chi0 max_err={worst0:.1e}; chi4 stated max_err={worst4:.1e} failing_q={bad4} first={first:?}; chi4 2iμ(q')χ4(q') max_err={worst_exact:.1e}"
        ),
    )
}

fn c5() -> (bool, String) {
    let l = lprime_chi4(1_000_000).unwrap();
    let scan = mertens_scan(C5_Z_MAX, &PrimeClass::Mod4Res3).unwrap();
    let ok = (l.value - C5_LPRIME).abs() <= C5_TOL && (l.combined - C5_COMBINED).abs() <= C5_TOL && scan.violations == 0;
    (
        ok,
        format!(
            "L'(1,χ4)={:.7} combined={:.7} mertens z in [2,{}] violations={} min_margin={:.4} at z={}",
            l.value, l.combined, C5_Z_MAX, scan.violations, scan.min_margin, scan.argmin
        ),
    )
}

fn c6() -> (bool, String) {
    let seq = match pell_sequence(C6_K_MAX) {
        Ok(s) => s,
        Err(e) => return (false, e.to_string()),
    };
    let missing: Vec<u32> = (0..=C6_J_MAX).filter(|&j| pell_in_interval(10u128.pow(j), &seq).is_none()).collect();
    (missing.is_empty(), format!("k<={C6_K_MAX} inequality and coprimality exact; intervals without N_k: {missing:?}"))
}

fn c7(mem: &BMembership) -> (bool, String) {
    let mut worst = 0.0f64;
    for n in C7_NS {
        let b = count_b(n, mem).unwrap() as f64;
        let h = s_alpha(&Alpha::rational(1, 2).unwrap(), n, mem).unwrap().value;
        let q = s_alpha(&Alpha::rational(1, 4).unwrap(), n, mem).unwrap().value;
        worst = worst.max((h.re + b).hypot(h.im) / b).max(q.re.hypot(q.im - b) / b);
    }
    let n = 10_000;
    let p = lp_norm_grid(2.0, n, 4 * n, mem).unwrap();
    let rel = (p / count_b(n, mem).unwrap() as f64 - 1.0).abs();
    (worst <= C7_TOL && rel <= C7_PARSEVAL_TOL, format!("max rel err={worst:.1e}; parseval rel err={rel:.1e}"))
}

fn c8(mem: &BMembership) -> (bool, String) {
    let t = Instant::now();
    let (c, _) = landau_c();
    let (csd, _) = landau_c_sd();
    let ratio = |n: u64, c: f64| count_b(n, mem).unwrap() as f64 * (n as f64).ln().sqrt() / (c * n as f64);
    let (r3, r6) = (ratio(1_000, c), ratio(1_000_000, c));
    let (s3, s6) = (ratio(1_000, csd), ratio(1_000_000, csd));
    let secs = t.elapsed().as_secs_f64();
    let ok = (C8_RANGE.0..=C8_RANGE.1).contains(&r6) && (r6 - 1.0).abs() < (r3 - 1.0).abs() && secs < C8_SECS;
    (ok, format!("C={c:.6}: ratio(1e3)={r3:.4} ratio(1e6)={r6:.4}; with C={csd:.6}: ratio(1e3)={s3:.4} ratio(1e6)={s6:.4}"))
}

fn c9(mem: &BMembership) -> (bool, String) {
    let t = Instant::now();
    let delta_f = (C9_N as f64).powf(-C9_LAMBDA);
    let delta = BigRational::from_float(delta_f).unwrap();
    let zero = BigRational::from_integer(BigInt::from(0));
    let alpha = QuadraticIrrational::sqrt(2).unwrap();
    let count = equidist_count(&alpha, &zero, &delta, C9_N, mem).unwrap();
    let b = count_b(C9_N, mem).unwrap() as f64;
    let ratio = count as f64 / (2.0 * delta.to_f64().unwrap() * b);
    let secs = t.elapsed().as_secs_f64();
    ((C9_RANGE.0..=C9_RANGE.1).contains(&ratio) && secs < C9_SECS, format!("count={count} B(N)={b} ratio={ratio:.4}"))
}

fn c10(mem: &BMembership) -> (bool, String) {
    let alpha = Alpha::real(DD::from_i128(2).sqrt());
    let mut parts = Vec::new();
    let mut ok = true;
    for n in C10_NS {
        let s = s_alpha(&alpha, n, mem).unwrap().modulus();
        let env = sqrt2_envelope(n as f64);
        ok &= s <= env;
        parts.push(format!("N={n}: |S|={s:.1} env={env:.2e}"));
    }
    (ok, parts.join("; "))
}

fn b_plain(n: u64) -> bool {
    if n % 2 == 0 {
        return false;
    }
    let mut m = n;
    let mut p = 3;
    while p * p <= m {
        if m % p == 0 {
            if p % 4 == 3 {
                return false;
            }
            while m % p == 0 {
                m /= p;
            }
        }
        p += 2;
    }
    m == 1 || m % 4 == 1
}

fn c11(mem: &BMembership) -> (bool, String) {
    let table: Vec<bool> = (0..=C11_ORACLE_MAX).map(b_plain).collect();
    let mut bad = 0u64;
    for n in (3..=C11_ORACLE_MAX).step_by(4) {
        let mut want = 0u64;
        for b1 in 1..n {
            if !table[b1 as usize] {
                continue;
            }
            for b2 in 1..n - b1 {
                if table[b2 as usize] && table[(n - b1 - b2) as usize] {
                    want += 1;
                }
            }
        }
        if ternary_count(n, &SubsetSpec::Full, &SubsetSpec::Full, mem).unwrap() != want {
            bad += 1;
        }
    }
    let r = ternary_main_term(C11_N, C11_K, &SubsetSpec::Full, &SubsetSpec::Full, ConstantMode::Th2, LandauChoice::Stated, mem).unwrap();
    let inr = |x: f64| (C11_RANGE.0..=C11_RANGE.1).contains(&x);
    let ok = bad == 0 && (inr(r.ratio_th2) || inr(r.ratio_inith2));
    (
        ok,
        format!(
            "oracle mismatches={bad}; N={} count={} ratio_th2={:.4} ratio_inith2={:.4} empirical C (flat form)={:.4} empirical C (weighted 4C form)={:.4}",
            C11_N, r.count, r.ratio_th2, r.ratio_inith2, r.empirical_c_th2, r.empirical_c_inith2
        ),
    )
}

fn c12() -> (bool, String) {
    let s = kernel_decay_slope(2f64.ln(), 3f64.ln(), &C12_TS).unwrap();
    ((C12_RANGE.0..=C12_RANGE.1).contains(&s), format!("slope={s:.4}"))
}

fn main() -> ExitCode {
    let mem = BMembership::new(1_000_000).unwrap();
    let outcomes = vec![
        run(1, "b-oracle equivalence", c1),
        run(2, "exact identity suite", c2),
        run(3, "Harman uniqueness", c3),
        run(4, "Gauss-sum closed forms", c4),
        run(5, "appendix constants", c5),
        run(6, "Pell and convergents", c6),
        run(7, "exponential-sum structure", || c7(&mem)),
        run(8, "Landau asymptotic", || c8(&mem)),
        run(9, "equidistribution", || c9(&mem)),
        run(10, "sqrt(2) bound floor", || c10(&mem)),
        run(11, "ternary experiment", || c11(&mem)),
        run(12, "kernel decay", c12),
    ];
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass", outcomes.len());
    let mut unexpected = false;
    for o in outcomes.iter().filter(|o| !o.pass) {
        match KNOWN_UNATTAINABLE.iter().find(|(id, _)| *id == o.id) {
            Some((_, why)) => println!("C{} fails as stated: {why}", o.id),
            None => unexpected = true,
        }
    }
    if unexpected {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
