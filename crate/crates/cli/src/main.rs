mod checks;
mod output;

use anyhow::{bail, Context, Result};
use checks::{Check, TrialSettings};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use output::{emit, payload, Format};
use serde_json::{json, Value};
use std::process::ExitCode;
use std::time::Instant;
use tsl_core::arith::{cache_path, FactorSieve, PrimeClass};
use tsl_core::bilinear::{precise_as_check, vfa_kernel};
use tsl_core::characters::{characters_mod, gauss_chi4_exact, gauss_closed_form_stated, gauss_sum, induced_chi4, principal};
use tsl_core::dd::{parse_decimal, DD};
use tsl_core::diophantine::{convergents, trigo_approx_check, QuadraticIrrational};
use tsl_core::expsum::{bound_check_trigo, family_envelope, family_sum, lp_norm_grid, Alpha};
use tsl_core::gaussian::{count_b, BMembership, LandauChoice};
use tsl_core::local_model::major_arc_compare;
use tsl_core::sieve_identity::{SieveParams, WeightedSeq};
use tsl_core::ternary::{ternary_main_term, ConstantMode, SubsetSpec};

#[derive(Parser, Debug)]
#[command(name = "tsl", version, about = "Experiments on integers that are sums of two coprime squares")]
struct Cli {
    /// Output format; `seq` defaults to csv, everything else to json.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Seed for randomised runs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Th2,
    Inith2,
    Both,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Smallest-prime-factor sieve; arithmetic functions of one integer.
    Sieve {
        #[arg(long, default_value_t = 1_000_000)]
        limit: u64,
        #[arg(long)]
        n: Option<u64>,
    },
    /// Membership in the sequence and its counting function.
    Seq {
        #[arg(long = "N")]
        n: u64,
        /// List `n,b(n)` for every `n <= N` instead of the summary.
        #[arg(long)]
        list: bool,
    },
    /// Exponential sum over the sequence at `a/q + beta`.
    Expsum {
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, default_value_t = 1)]
        q: u64,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        beta: String,
        #[arg(long = "N")]
        n: u64,
        /// Family size for `Σ_{r <= R} |S(rα)|`.
        #[arg(long = "R")]
        r: Option<u64>,
        #[arg(long)]
        ell: Option<f64>,
        #[arg(long)]
        grid: Option<u64>,
        #[arg(long = "A", default_value_t = 1.0)]
        big_a: f64,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
    },
    /// Characters mod q with their Gauss sums.
    Chars {
        #[arg(long)]
        q: u64,
    },
    /// Random instances of the exact sieve identities.
    Identities {
        #[arg(long, value_enum)]
        check: Check,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long = "z-max", default_value_t = 30.0)]
        z_max: f64,
        #[arg(long = "N-max", default_value_t = 2000)]
        n_max: usize,
        #[arg(long, default_value = "mod4res3")]
        class: String,
    },
    /// Separation kernel value, or the bilinear decomposition check.
    Kernel {
        #[arg(long, default_value_t = 2f64.ln())]
        u: f64,
        #[arg(long, default_value_t = 3f64.ln())]
        v: f64,
        #[arg(long = "T", default_value_t = 1e4)]
        t: f64,
        #[arg(long = "as-check")]
        as_check: bool,
        #[arg(long = "N", default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 30.0)]
        z: f64,
        #[arg(long = "M", default_value_t = 20.0)]
        m: f64,
        #[arg(long = "M0", default_value_t = 4.0)]
        m0: f64,
        #[arg(long, default_value = "mod4res3")]
        class: String,
    },
    /// Major-arc comparison of the sum with the local model.
    Model {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_hyphen_values = true)]
        a: i64,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        beta: String,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "K", default_value_t = 4.0)]
        k: f64,
        /// `stated` or `sd`.
        #[arg(long, default_value = "stated")]
        constant: String,
    },
    /// Ternary representation count against its main terms.
    Ternary {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "K", default_value_t = 4.0)]
        k: f64,
        #[arg(long, value_enum, default_value_t = ModeArg::Th2)]
        mode: ModeArg,
        /// `full`, `res:MOD:R1,R2`, `thin:DENSITY` or `list:B1,B2,...`
        #[arg(long, default_value = "full")]
        b1: String,
        #[arg(long, default_value = "full")]
        b2: String,
        #[arg(long, default_value = "stated")]
        constant: String,
    },
    /// Distribution of `bα mod 1` near `β0` for a quadratic irrational α.
    Dioph {
        /// `sqrt:D`, `golden` or `quad:p,q,r,d`
        #[arg(long, default_value = "sqrt:2")]
        alpha: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        beta0: String,
        /// `δ = N^(-λ)`
        #[arg(long, default_value_t = 0.2)]
        lambda: f64,
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "R", default_value_t = 100)]
        r: u64,
    },
    /// Exact identities and constant checks in one run.
    VerifyAll {
        #[arg(long)]
        quick: bool,
    },
}

struct Outcome {
    payload: Value,
    pass: bool,
}

fn ok(payload: Value) -> Result<Outcome> {
    Ok(Outcome { payload, pass: true })
}

fn parse_beta(s: &str) -> Result<DD> {
    DD::parse(s).with_context(|| format!("cannot parse beta {s:?}"))
}

fn parse_class(s: &str) -> Result<PrimeClass> {
    Ok(PrimeClass::parse(s)?)
}

fn parse_choice(s: &str) -> Result<LandauChoice> {
    LandauChoice::parse(s).with_context(|| format!("unknown constant {s:?}; use stated or sd"))
}

fn parse_subset(s: &str, seed: u64) -> Result<SubsetSpec> {
    if s == "full" {
        return Ok(SubsetSpec::Full);
    }
    let nums = |t: &str| t.split(',').map(|x| x.trim().parse::<u64>()).collect::<std::result::Result<Vec<_>, _>>();
    if let Some(rest) = s.strip_prefix("res:") {
        let (m, r) = rest.split_once(':').context("res selector needs res:MOD:R1,R2")?;
        return Ok(SubsetSpec::Residue { modulus: m.parse()?, residues: nums(r)? });
    }
    if let Some(d) = s.strip_prefix("thin:") {
        return Ok(SubsetSpec::Thinned { density: d.parse()?, seed });
    }
    if let Some(l) = s.strip_prefix("list:") {
        return Ok(SubsetSpec::Explicit(nums(l)?));
    }
    bail!(tsl_core::Error::Config(format!("unknown selector {s:?}")))
}

fn sieve_cmd(limit: u64, n: Option<u64>) -> Result<Outcome> {
    let s = FactorSieve::cached(limit)?;
    let mut r = json!({
        "limit": limit,
        "prime_count": s.primes().count(),
        "cache": cache_path(limit).map(|p| p.display().to_string()),
    });
    if let Some(n) = n {
        let f = s.factorize(n)?;
        r["n"] = json!({
            "n": n,
            "spf": s.spf(n)?,
            "factorization": f,
            "moebius": s.moebius(n)?,
            "euler_phi": s.euler_phi(n)?,
            "omega": s.omega(n)?,
            "tau3": s.tau3(n)?,
            "phi_plus": s.phi_plus(n)?,
            "is_b": tsl_core::gaussian::is_b(n, &s)?,
        });
    }
    ok(payload("sieve", json!({"limit": limit, "n": n}), r))
}

fn seq_cmd(n: u64, list: bool) -> Result<Outcome> {
    let mem = BMembership::new(n)?;
    let params = json!({"N": n, "list": list});
    if list {
        let rows: Vec<Value> = (1..=n).map(|k| json!({"n": k, "b": mem.contains(k) as u8})).collect();
        return ok(payload("seq", params, json!({"rows": rows})));
    }
    let b = count_b(n, &mem)?;
    let norm = |c: f64| if n >= 3 { b as f64 * (n as f64).ln().sqrt() / (c * n as f64) } else { f64::NAN };
    let r = json!({
        "B": b,
        "landau_ratio_stated": norm(LandauChoice::Stated.constant().0),
        "landau_ratio_sd": norm(LandauChoice::SelbergDelange.constant().0),
    });
    ok(payload("seq", params, r))
}

#[allow(clippy::too_many_arguments)]
fn expsum_cmd(a: i64, q: u64, beta: &str, n: u64, r: Option<u64>, ell: Option<f64>, grid: Option<u64>, big_a: f64, eps: f64) -> Result<Outcome> {
    let alpha = Alpha::new(a, q, parse_beta(beta)?)?;
    let mem = BMembership::new(n)?;
    let rep = bound_check_trigo(&alpha, n, big_a, None, &mem)?;
    let scale = n as f64 / (n as f64).ln().sqrt();
    let mut res = json!({
        "value_re": rep.value_re,
        "value_im": rep.value_im,
        "modulus": rep.modulus,
        "envelope": rep.envelope_trigo * scale,
        "pass": rep.pass_trigo,
        "B": count_b(n, &mem)?,
        "normalized": rep.normalized,
        "envelope_large": rep.envelope_large * scale,
        "pass_large": rep.pass_large,
        "within_radius": rep.within_radius,
    });
    if let Some(r) = r {
        let fam = family_sum(&alpha, r, n, &mem)?;
        let env = family_envelope(r as f64, n as f64, q as f64, eps);
        res["family"] = json!({"R": r, "sum": fam, "envelope": env, "pass": fam <= env});
    }
    if let (Some(ell), Some(grid)) = (ell, grid) {
        res["lp_norm"] = json!({"ell": ell, "grid": grid, "value": lp_norm_grid(ell, n, grid, &mem)?});
    }
    let params = json!({"a": a, "q": q, "beta": beta, "N": n, "R": r, "ell": ell, "grid": grid, "A": big_a, "eps": eps});
    ok(payload("expsum", params, res))
}

fn chars_cmd(q: u64) -> Result<Outcome> {
    let rows: Vec<Value> = characters_mod(q)?
        .iter()
        .map(|c| {
            let g = gauss_sum(c);
            let conductor = c.conductor();
            json!({
                "label": c.label.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "),
                "order": c.order,
                "conductor": conductor,
                "primitive": conductor == q,
                "principal": c.is_principal,
                "gauss_re": g.re,
                "gauss_im": g.im,
                "gauss_abs": g.norm(),
            })
        })
        .collect();
    let principal_delta = (gauss_sum(&principal(q)?) - gauss_closed_form_stated(q, false)).norm();
    let mut forms = json!({"principal_stated_delta": principal_delta});
    if q % 4 == 0 {
        let g = gauss_sum(&induced_chi4(q)?);
        forms["chi4_stated_delta"] = json!((g - gauss_closed_form_stated(q, true)).norm());
        forms["chi4_exact_delta"] = json!((g - gauss_chi4_exact(q)).norm());
    }
    ok(payload("chars", json!({"q": q}), json!({"closed_forms": forms, "rows": rows})))
}

fn identities_cmd(check: Check, trials: u64, seed: u64, z_max: f64, n_max: usize, class: &str) -> Result<Outcome> {
    let settings = TrialSettings { z_max, n_max, cls: parse_class(class)? };
    let sieve = FactorSieve::cached(((n_max as f64).max(z_max * z_max).ceil() as u64).max(100))?;
    let (pass, rows, reports) = checks::run_trials(check, trials, seed, &settings, &sieve)?;
    let params = json!({"check": check.name(), "trials": trials, "seed": seed, "z_max": z_max, "N_max": n_max, "class": class});
    Ok(Outcome { payload: payload("identities", params, json!({"pass": pass, "rows": rows, "reports": reports})), pass })
}

#[allow(clippy::too_many_arguments)]
fn kernel_cmd(u: f64, v: f64, t: f64, as_check: bool, n: usize, z: f64, m: f64, m0: f64, class: &str, seed: u64) -> Result<Outcome> {
    let k = vfa_kernel(u, v, t)?;
    let mut res = json!({"value": k.value, "deviation": k.deviation, "quadrature_error": k.quadrature_error});
    let mut pass = true;
    if as_check {
        let cls = parse_class(class)?;
        let sieve = FactorSieve::cached(n.max(100) as u64)?;
        let theta = WeightedSeq::random(n, -1, 1, seed)?;
        let p = SieveParams { z, big_z: z, d: z, m, m0, t };
        let rep = precise_as_check(&theta, &p, &cls, &sieve)?;
        pass = rep.satisfied;
        res["as_check"] = serde_json::to_value(&rep)?;
    }
    let params = json!({"u": u, "v": v, "T": t, "as_check": as_check, "N": n, "z": z, "M": m, "M0": m0, "class": class, "seed": seed});
    Ok(Outcome { payload: payload("kernel", params, res), pass })
}

fn model_cmd(q: u64, a: i64, beta: &str, n: u64, k: f64, constant: &str) -> Result<Outcome> {
    let mem = BMembership::new(n)?;
    let rep = major_arc_compare(a, q, parse_beta(beta)?, n, k, parse_choice(constant)?, &mem)?;
    let params = json!({"q": q, "a": a, "beta": beta, "N": n, "K": k, "constant": constant});
    ok(payload("model", params, serde_json::to_value(&rep)?))
}

#[allow(clippy::too_many_arguments)]
fn ternary_cmd(n: u64, k: f64, mode: ModeArg, b1: &str, b2: &str, constant: &str, seed: u64) -> Result<Outcome> {
    let mem = BMembership::new(n)?;
    let (s1, s2) = (parse_subset(b1, seed)?, parse_subset(b2, seed)?);
    let m = if mode == ModeArg::Inith2 { ConstantMode::Inith2 } else { ConstantMode::Th2 };
    let rep = ternary_main_term(n, k, &s1, &s2, m, parse_choice(constant)?, &mem)?;
    let mut res = serde_json::to_value(&rep)?;
    res["K"] = json!(rep.k);
    res["M"] = json!(rep.m);
    if mode == ModeArg::Both {
        res["mode"] = json!("both");
    }
    let mode_name = match mode {
        ModeArg::Th2 => "th2",
        ModeArg::Inith2 => "inith2",
        ModeArg::Both => "both",
    };
    let params = json!({"N": n, "K": k, "mode": mode_name, "b1": b1, "b2": b2, "constant": constant, "seed": seed});
    ok(payload("ternary", params, res))
}

fn dioph_cmd(alpha: &str, beta0: &str, lambda: f64, n: u64, r: u64) -> Result<Outcome> {
    let a = QuadraticIrrational::parse(alpha)?;
    let beta = parse_decimal(beta0).with_context(|| format!("cannot parse beta0 {beta0:?}"))?;
    let delta = BigRational::from_float((n as f64).powf(-lambda)).context("delta is not finite")?;
    let mem = BMembership::new(n)?;
    let rep = trigo_approx_check(&a, &beta, &delta, r, n, &mem)?;
    let conv: Vec<Value> = convergents(&a, n.max(1) as u128)?.iter().map(|c| json!([c.a.to_string(), c.q.to_string()])).collect();
    let mut res = serde_json::to_value(&rep)?;
    res["ratio"] = json!(rep.count as f64 / rep.main);
    res["convergents"] = json!(conv);
    let params = json!({"alpha": alpha, "beta0": beta0, "lambda": lambda, "N": n, "R": r, "delta_exact": delta.to_string(), "beta_exact": beta.to_string()});
    ok(payload("dioph", params, res))
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Sieve { limit, n } => sieve_cmd(*limit, *n),
        Cmd::Seq { n, list } => seq_cmd(*n, *list),
        Cmd::Expsum { a, q, beta, n, r, ell, grid, big_a, eps } => expsum_cmd(*a, *q, beta, *n, *r, *ell, *grid, *big_a, *eps),
        Cmd::Chars { q } => chars_cmd(*q),
        Cmd::Identities { check, trials, z_max, n_max, class } => identities_cmd(*check, *trials, cli.seed, *z_max, *n_max, class),
        Cmd::Kernel { u, v, t, as_check, n, z, m, m0, class } => kernel_cmd(*u, *v, *t, *as_check, *n, *z, *m, *m0, class, cli.seed),
        Cmd::Model { q, a, beta, n, k, constant } => model_cmd(*q, *a, beta, *n, *k, constant),
        Cmd::Ternary { n, k, mode, b1, b2, constant } => ternary_cmd(*n, *k, *mode, b1, b2, constant, cli.seed),
        Cmd::Dioph { alpha, beta0, lambda, n, r } => dioph_cmd(alpha, beta0, *lambda, *n, *r),
        Cmd::VerifyAll { quick } => {
            let (pass, res) = checks::verify_all(*quick, cli.seed)?;
            Ok(Outcome { payload: payload("verify-all", json!({"quick": quick, "seed": cli.seed}), res), pass })
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TSL_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| tsl_core::Error::Config(format!("TSL_THREADS={v:?} is not a number")))?;
        if n > 0 {
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
        }
    }
    Ok(())
}

/// 2 for bad input, 1 for anything else.
fn error_code(e: &anyhow::Error) -> u8 {
    use tsl_core::Error as E;
    if let Some(core) = e.downcast_ref::<E>() {
        return match core {
            E::Config(_) | E::Domain(_) | E::Precondition(_) | E::Regime(_) => 2,
            _ => 1,
        };
    }
    if e.downcast_ref::<std::num::ParseIntError>().is_some() || e.downcast_ref::<std::num::ParseFloatError>().is_some() {
        return 2;
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let start = Instant::now();
    let result = configure_threads().and_then(|_| run(&cli));
    match result {
        Ok(out) => {
            let default = if matches!(cli.cmd, Cmd::Seq { .. }) { Format::Csv } else { Format::Json };
            if let Err(e) = emit(&out.payload, cli.format.unwrap_or(default)) {
                eprintln!("tsl: {e}");
                return ExitCode::from(1);
            }
            eprintln!("tsl: finished in {:.3}s", start.elapsed().as_secs_f64());
            if out.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!("tsl: assertion failure");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("tsl: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}
