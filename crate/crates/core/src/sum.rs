//! Compensated accumulation and the fixed-shape chunked reduction.
//!
//! Every long sum in the crate is cut into blocks of `BLOCK` consecutive
//! indices. Blocks may run on any thread but their partial sums are combined
//! in index order, so results do not depend on the worker count.

use num_complex::Complex64;
use rayon::prelude::*;
use std::ops::Range;

pub const BLOCK: u64 = 1 << 14;

/// Neumaier summation for reals.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Neumaier summation for complex numbers.
#[derive(Clone, Copy, Debug, Default)]
pub struct ComplexSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

fn blocks(range: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    if range.start >= range.end {
        return out;
    }
    let mut lo = range.start - range.start % BLOCK;
    while lo < range.end {
        let hi = lo + BLOCK;
        out.push(lo.max(range.start)..hi.min(range.end));
        lo = hi;
    }
    out
}

/// Sums `f(block)` over aligned blocks covering `range`, combined in order.
pub fn chunked_complex<F>(range: Range<u64>, f: F) -> Complex64
where
    F: Fn(Range<u64>) -> Complex64 + Sync,
{
    let parts: Vec<Complex64> = blocks(range).into_par_iter().map(&f).collect();
    let mut acc = ComplexSum::new();
    for p in parts {
        acc.add(p);
    }
    acc.value()
}

/// Real counterpart of [`chunked_complex`].
pub fn chunked_real<F>(range: Range<u64>, f: F) -> f64
where
    F: Fn(Range<u64>) -> f64 + Sync,
{
    let parts: Vec<f64> = blocks(range).into_par_iter().map(&f).collect();
    let mut acc = KahanSum::new();
    for p in parts {
        acc.add(p);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_range() {
        let b = blocks(5..40000);
        assert_eq!(b.first().unwrap().start, 5);
        assert_eq!(b.last().unwrap().end, 40000);
        for w in b.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
        assert!(blocks(7..7).is_empty());
    }

    #[test]
    fn kahan_beats_naive() {
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..1000 {
            k.add(1e-16);
        }
        assert!((k.value() - (1.0 + 1e-13)).abs() < 1e-18);
    }

    #[test]
    fn identical_across_pools() {
        let f = |r: Range<u64>| {
            let mut s = ComplexSum::new();
            for n in r {
                s.add(Complex64::from_polar(1.0, (n as f64).sqrt()));
            }
            s.value()
        };
        let a = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| chunked_complex(0..100_000, f));
        let b = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| chunked_complex(0..100_000, f));
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());
    }
}
