//! Prime generation with 1-based indexed access.
//!
//! The table grows by doubling its sieve bound; each extension sieves only the
//! new segment `(old_limit, new_limit]` with the primes already known, so
//! values handed out earlier are never touched again.

use std::sync::{OnceLock, RwLock};

const INITIAL_LIMIT: u64 = 1 << 12;

#[derive(Debug)]
struct Sieved {
    limit: u64,
    primes: Vec<u64>,
}

/// All primes up to a bound that grows on demand. Safe to share between threads.
#[derive(Debug)]
pub struct PrimeTable {
    inner: RwLock<Sieved>,
}

impl Default for PrimeTable {
    fn default() -> Self {
        Self::new()
    }
}

impl PrimeTable {
    pub fn new() -> Self {
        Self::with_limit(INITIAL_LIMIT)
    }

    pub fn with_limit(limit: u64) -> Self {
        let limit = limit.max(16);
        Self {
            inner: RwLock::new(Sieved {
                limit,
                primes: simple_sieve(limit),
            }),
        }
    }

    /// Current sieve bound.
    pub fn limit(&self) -> u64 {
        self.inner.read().unwrap().limit
    }

    /// Number of primes currently tabulated.
    pub fn len(&self) -> usize {
        self.inner.read().unwrap().primes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The `j`-th prime, `p_1 = 2`.
    ///
    /// # Panics
    /// If `j == 0`.
    pub fn nth_prime(&self, j: usize) -> u64 {
        assert!(j >= 1, "prime indices start at 1");
        loop {
            {
                let table = self.inner.read().unwrap();
                if let Some(&p) = table.primes.get(j - 1) {
                    return p;
                }
            }
            self.grow();
        }
    }

    /// All primes `<= x`, increasing.
    pub fn primes_up_to(&self, x: u64) -> Vec<u64> {
        self.ensure_limit(x);
        let table = self.inner.read().unwrap();
        let end = table.primes.partition_point(|&p| p <= x);
        table.primes[..end].to_vec()
    }

    /// Index `j` with `p_j == p`, or `None` when `p` is not prime.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.ensure_limit(p);
        let table = self.inner.read().unwrap();
        table.primes.binary_search(&p).ok().map(|i| i + 1)
    }

    /// Index of the least prime `>= x`.
    pub fn least_index_at_least(&self, x: u64) -> usize {
        loop {
            {
                let table = self.inner.read().unwrap();
                let i = table.primes.partition_point(|&p| p < x);
                if i < table.primes.len() {
                    return i + 1;
                }
            }
            self.grow();
        }
    }

    fn ensure_limit(&self, x: u64) {
        while self.limit() < x {
            self.grow();
        }
    }

    fn grow(&self) {
        let mut table = self.inner.write().unwrap();
        let old = table.limit;
        let new = old.saturating_mul(2);
        // sqrt(2L) <= L for L >= 2, so the existing primes cover the segment.
        let segment = sieve_segment(old + 1, new, &table.primes);
        table.primes.extend(segment);
        table.limit = new;
    }
}

fn simple_sieve(limit: u64) -> Vec<u64> {
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = Vec::new();
    for i in 2..=n {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut m = i * i;
        while m <= n {
            composite[m] = true;
            m += i;
        }
    }
    primes
}

/// Primes in `[lo, hi]`, given every prime up to `sqrt(hi)` in `base`.
fn sieve_segment(lo: u64, hi: u64, base: &[u64]) -> Vec<u64> {
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        let start = (p * p).max(lo.div_ceil(p) * p);
        let mut m = start;
        while m <= hi {
            composite[(m - lo) as usize] = true;
            m += p;
        }
    }
    composite
        .iter()
        .enumerate()
        .filter(|(_, &c)| !c)
        .map(|(i, _)| lo + i as u64)
        .filter(|&n| n >= 2)
        .collect()
}

/// Process-wide table shared by every module.
pub fn global() -> &'static PrimeTable {
    static TABLE: OnceLock<PrimeTable> = OnceLock::new();
    TABLE.get_or_init(PrimeTable::new)
}

/// `p_j` from the global table.
pub fn nth_prime(j: usize) -> u64 {
    global().nth_prime(j)
}

/// All primes `<= x` from the global table.
pub fn primes_up_to(x: u64) -> Vec<u64> {
    global().primes_up_to(x)
}
