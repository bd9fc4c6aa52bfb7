use super::primes_up_to;
use crate::error::{ensure, Result};
use crate::sum::KahanSum;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Largest `z` accepted by [`prime_class_product`].
pub const PRODUCT_Z_MAX: f64 = 1.0e6;

/// Set of primes used as a sifting set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PrimeClass {
    /// p ≡ 3 mod 4
    Mod4Res3,
    /// p ≡ 2 mod 3
    Mod3Res2,
    /// p ≢ 1 mod 12
    NotOneMod12,
    /// A finite explicit list of primes.
    Explicit(Vec<u64>),
}

impl PrimeClass {
    /// Whether the prime `p` belongs to the class.
    pub fn contains(&self, p: u64) -> bool {
        match self {
            PrimeClass::Mod4Res3 => p % 4 == 3,
            PrimeClass::Mod3Res2 => p % 3 == 2,
            PrimeClass::NotOneMod12 => p % 12 != 1,
            PrimeClass::Explicit(v) => v.contains(&p),
        }
    }

    /// Relative density among primes as `(numerator, denominator)`; zero for finite lists.
    pub fn kappa(&self) -> (u32, u32) {
        match self {
            PrimeClass::Mod4Res3 | PrimeClass::Mod3Res2 => (1, 2),
            PrimeClass::NotOneMod12 => (3, 4),
            PrimeClass::Explicit(_) => (0, 1),
        }
    }

    /// Members `p < z`, ascending.
    pub fn primes_below(&self, z: f64) -> Vec<u64> {
        if z <= 2.0 {
            return Vec::new();
        }
        if let PrimeClass::Explicit(v) = self {
            let mut v: Vec<u64> = v.iter().copied().filter(|&p| (p as f64) < z).collect();
            v.sort_unstable();
            v.dedup();
            return v;
        }
        let top = z.ceil() as u64;
        primes_up_to(top).into_iter().filter(|&p| (p as f64) < z && self.contains(p)).collect()
    }

    pub fn name(&self) -> String {
        match self {
            PrimeClass::Mod4Res3 => "mod4res3".into(),
            PrimeClass::Mod3Res2 => "mod3res2".into(),
            PrimeClass::NotOneMod12 => "notonemod12".into(),
            PrimeClass::Explicit(v) => format!("explicit{v:?}"),
        }
    }

    /// `mod4res3`, `mod3res2`, `notonemod12` or `explicit:3,7,11`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mod4res3" => Ok(PrimeClass::Mod4Res3),
            "mod3res2" => Ok(PrimeClass::Mod3Res2),
            "notonemod12" => Ok(PrimeClass::NotOneMod12),
            _ => {
                let list = s.strip_prefix("explicit:").ok_or_else(|| crate::Error::Config(format!("unknown prime class {s}")))?;
                let v: Vec<u64> = list.split(',').map(|x| x.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| crate::Error::Config(format!("bad prime list {list}")))?;
                Ok(PrimeClass::Explicit(v))
            }
        }
    }
}

fn product_tree(v: &[u64]) -> BigUint {
    match v.len() {
        0 => BigUint::from(1u32),
        1 => BigUint::from(v[0]),
        n => product_tree(&v[..n / 2]) * product_tree(&v[n / 2..]),
    }
}

/// `prod_{p < z, p in cls} p` as an exact integer.
pub fn prime_class_product(z: f64, cls: &PrimeClass) -> Result<BigUint> {
    ensure!(z.is_finite(), Domain, "z must be finite");
    ensure!(z <= PRODUCT_Z_MAX, Resource, "z = {z} exceeds product budget {PRODUCT_Z_MAX}");
    Ok(product_tree(&cls.primes_below(z)))
}

/// `sum_{p < z, p in cls} log p / (p + 1)`, compensated.
pub fn mertens_class_sum(z: f64, cls: &PrimeClass) -> f64 {
    let mut s = KahanSum::new();
    for p in cls.primes_below(z) {
        s.add((p as f64).ln() / (p as f64 + 1.0));
    }
    s.value()
}

/// `log(z)/2 - log(3)/4`.
pub fn mertens_bound(z: f64) -> f64 {
    0.5 * z.ln() - 0.25 * 3f64.ln()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MertensScan {
    pub z_max: u64,
    pub violations: u64,
    /// smallest `bound − sum` over the scanned `z`
    pub min_margin: f64,
    pub argmin: u64,
}

/// Checks `mertens_class_sum(z) <= mertens_bound(z)` at every integer `z` in `[2, z_max]`.
pub fn mertens_scan(z_max: u64, cls: &PrimeClass) -> Result<MertensScan> {
    ensure!(z_max >= 2, Domain, "z_max must be at least 2");
    ensure!(z_max as f64 <= 1.0e8, Resource, "z_max above 1e8");
    let primes = primes_up_to(z_max);
    let mut s = KahanSum::new();
    let mut next = primes.iter().filter(|&&p| cls.contains(p)).peekable();
    let mut out = MertensScan { z_max, violations: 0, min_margin: f64::INFINITY, argmin: 0 };
    for z in 2..=z_max {
        while let Some(&&p) = next.peek() {
            if p >= z {
                break;
            }
            s.add((p as f64).ln() / (p as f64 + 1.0));
            next.next();
        }
        let margin = mertens_bound(z as f64) - s.value();
        if margin < 0.0 {
            out.violations += 1;
        }
        if margin < out.min_margin {
            out.min_margin = margin;
            out.argmin = z;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let c = PrimeClass::Mod4Res3;
        assert_eq!(prime_class_product(3.0, &c).unwrap(), BigUint::from(1u32));
        assert_eq!(prime_class_product(8.0, &c).unwrap(), BigUint::from(21u32));
        assert_eq!(prime_class_product(7.0, &c).unwrap(), BigUint::from(3u32));
        assert_eq!(prime_class_product(12.0, &PrimeClass::Mod3Res2).unwrap(), BigUint::from(110u32));
        assert_eq!(prime_class_product(8.0, &PrimeClass::NotOneMod12).unwrap(), BigUint::from(210u32));
        assert!(matches!(prime_class_product(2.0e6, &c), Err(crate::Error::Resource(_))));
    }

    #[test]
    fn product_budget_edge() {
        let p = prime_class_product(1.0e6, &PrimeClass::Mod4Res3).unwrap();
        assert!(p.bits() > 400_000);
    }

    #[test]
    fn mertens_values() {
        let c = PrimeClass::Mod4Res3;
        assert!((mertens_class_sum(4.0, &c) - 3f64.ln() / 4.0).abs() < 1e-15);
        assert_eq!(mertens_class_sum(3.0, &c), 0.0);
        let z = 1.0e6;
        assert!(mertens_class_sum(z, &c) <= mertens_bound(z));
        let scan = mertens_scan(10_000, &c).unwrap();
        assert_eq!(scan.violations, 0);
        let z = scan.argmin as f64;
        assert!((mertens_bound(z) - mertens_class_sum(z, &c) - scan.min_margin).abs() < 1e-12);
    }

    #[test]
    fn kappa_and_membership() {
        assert_eq!(PrimeClass::NotOneMod12.kappa(), (3, 4));
        assert!(PrimeClass::NotOneMod12.contains(2));
        assert!(!PrimeClass::NotOneMod12.contains(13));
        assert_eq!(PrimeClass::Explicit(vec![7, 3, 3]).primes_below(10.0), vec![3, 7]);
    }
}
