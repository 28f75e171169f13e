//! Neumaier-compensated accumulators and the deterministic chunked reduction
//! used for path sums.

use rayon::prelude::*;

/// Neumaier compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Compensated sum of a slice.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

/// How a long reduction is scheduled.
///
/// `Parallel` splits the index range into fixed chunks, reduces each chunk
/// sequentially, then combines the chunk totals in chunk order, so the result
/// depends on `chunk` but never on thread timing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    #[default]
    Sequential,
    Parallel { chunk: usize },
}

impl Reduction {
    pub const DEFAULT_CHUNK: usize = 4096;

    pub fn parallel() -> Self {
        Reduction::Parallel {
            chunk: Self::DEFAULT_CHUNK,
        }
    }
}

/// Reduces `term(i)` for `i in 0..n` into two compensated components.
pub fn reduce_pairs<F>(n: u64, reduction: Reduction, term: F) -> (f64, f64)
where
    F: Fn(u64) -> (f64, f64) + Sync,
{
    let sequential = |lo: u64, hi: u64| {
        let mut a = CompensatedSum::new();
        let mut b = CompensatedSum::new();
        for i in lo..hi {
            let (x, y) = term(i);
            a.add(x);
            b.add(y);
        }
        (a.value(), b.value())
    };
    match reduction {
        Reduction::Sequential => sequential(0, n),
        Reduction::Parallel { chunk } => {
            let chunk = chunk.max(1) as u64;
            let chunks = n.div_ceil(chunk);
            let partials: Vec<(f64, f64)> = (0..chunks)
                .into_par_iter()
                .map(|c| sequential(c * chunk, ((c + 1) * chunk).min(n)))
                .collect();
            let mut a = CompensatedSum::new();
            let mut b = CompensatedSum::new();
            for (x, y) in partials {
                a.add(x);
                b.add(y);
            }
            (a.value(), b.value())
        }
    }
}
