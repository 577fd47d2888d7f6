//! Brute-force cross-check of a computed closure.
//!
//! Every `n <= N` is factored with a smallest-prime-factor sieve, its value
//! `sigma_{-r}(n)` is located among the interval endpoints, and the hits are
//! tallied per interval. Values are first bracketed in `f64` with a relative
//! margin of [`F64_MARGIN`]; only brackets that straddle an endpoint are
//! escalated to symbolic and certified comparison, and whatever stays
//! undecided is counted as unclassified.

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::closure::ClosureResult;
use crate::endpoints::{sigma_prime_power, Endpoint, EndpointExpr, Evaluator, Power, SigmaFactor};
use crate::error::{Error, Result};
use crate::primes;
use crate::realnum::{
    pow_rational, zeta_enclosure, Decision, Enclosure, ExactReal, Exponent, PrecisionPolicy,
};

/// Relative half-width of the `f64` bracket around each `sigma_{-r}(n)`.
pub const F64_MARGIN: f64 = 1e-12;

/// Default and largest supported enumeration limits.
pub const DEFAULT_LIMIT: u64 = 1_000_000;
pub const MAX_LIMIT: u64 = 100_000_000;

const CHUNK: u64 = 1 << 15;

/// Smallest prime factor of every `n` in `2..=N`, by a linear sieve.
#[derive(Clone, Debug)]
pub struct SpfTable {
    limit: u64,
    spf: Vec<u32>,
}

impl SpfTable {
    pub fn new(limit: u64) -> Self {
        assert!(limit <= u32::MAX as u64, "sieve limit too large");
        let n = limit as usize;
        let mut spf = vec![0u32; n + 1];
        let mut ps: Vec<u32> = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                ps.push(i as u32);
            }
            let si = spf[i];
            for &p in &ps {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Self { limit, spf }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn spf(&self, n: u64) -> u64 {
        assert!((2..=self.limit).contains(&n), "{n} outside sieve range");
        self.spf[n as usize] as u64
    }

    /// `(p, a)` with `p^a || n`, primes increasing.
    pub fn factor(&self, mut n: u64) -> Vec<(u64, u32)> {
        let mut out: Vec<(u64, u32)> = Vec::new();
        while n > 1 {
            let p = self.spf(n);
            let mut a = 0;
            while n.is_multiple_of(p) {
                n /= p;
                a += 1;
            }
            out.push((p, a));
        }
        out
    }
}

/// `sigma_{-r}(n)` from the factorization of `n`; exact for positive integer `r`.
pub fn sigma_value(spf: &SpfTable, n: u64, r: &Exponent, prec: u32) -> ExactReal {
    let mut acc = ExactReal::Rational(Rational::from(1));
    for (p, a) in spf.factor(n) {
        let j = primes::global().index_of(p).expect("sieve factor is prime");
        acc = acc.mul(&sigma_prime_power(j, Power::Finite(a), r, prec), prec);
    }
    acc
}

/// `sum_{d | n} d^{-r}` by trial division, for cross-checking.
pub fn sigma_direct(n: u64, r: &Exponent, prec: u32) -> ExactReal {
    let divisors = (1..=n).filter(|d| n.is_multiple_of(*d));
    match r.as_integer() {
        Some(k) => ExactReal::Rational(
            divisors
                .map(|d| Rational::from((1, Integer::from(d).pow(k))))
                .sum(),
        ),
        None => ExactReal::Approx(divisors.fold(Enclosure::from_integer(0, prec), |acc, d| {
            acc.add(&pow_rational(d, &-r.value().clone(), prec))
        })),
    }
}

/// `sigma_{-r}(n)` as an endpoint expression (a product of finite sigma factors).
pub fn sigma_expr(spf: &SpfTable, n: u64) -> EndpointExpr {
    spf.factor(n)
        .into_iter()
        .fold(EndpointExpr::one(), |e, (p, a)| {
            let j = primes::global().index_of(p).expect("sieve factor is prime");
            e.mul(SigmaFactor::finite(j, a)).expect("distinct primes")
        })
}

fn sigma_f64(spf: &SpfTable, n: u64, r: f64) -> f64 {
    let mut v = 1.0;
    let mut m = n;
    while m > 1 {
        let p = spf.spf(m);
        let mut a = 0;
        while m.is_multiple_of(p) {
            m /= p;
            a += 1;
        }
        let x = (p as f64).powf(-r);
        v *= (1.0 - x.powi(a + 1)) / (1.0 - x);
    }
    v
}

/// An interval endpoint supplied to the oracle: symbolic or a plain rational.
#[derive(Clone, Debug)]
pub enum Bound {
    Expr(Endpoint),
    Value(Rational),
}

impl Bound {
    fn bracket(&self) -> (f64, f64) {
        let enc = match self {
            Self::Expr(e) => e.enc.clone(),
            Self::Value(q) => Enclosure::from_rational(q, 64),
        };
        (enc.lo_f64(), enc.hi_f64())
    }

    fn decide(&self, ev: &Evaluator, value: &Endpoint) -> Result<Decision> {
        match self {
            Self::Expr(e) => ev.decide(value, e),
            Self::Value(q) => ev.decide_rational(value, q),
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Expr(e) => write!(f, "{}", e.expr),
            Self::Value(q) => write!(f, "{q}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleInterval {
    pub lo: Bound,
    pub hi: Bound,
}

pub fn intervals_from_closure(res: &ClosureResult) -> Vec<OracleInterval> {
    res.final_level()
        .intervals
        .iter()
        .map(|iv| OracleInterval {
            lo: Bound::Expr(iv.lo().clone()),
            hi: Bound::Expr(iv.hi().clone()),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub limit: u64,
    pub counts: Vec<u64>,
    pub unclassified: u64,
    /// Values decided to lie outside every interval; empty for a correct closure.
    pub gap_violations: Vec<u64>,
    pub densities: Vec<f64>,
}

impl DensityReport {
    pub fn classified(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Default)]
struct Tally {
    counts: Vec<u64>,
    unclassified: u64,
    violations: Vec<u64>,
}

impl Tally {
    fn merge(mut self, other: Self) -> Self {
        if self.counts.len() < other.counts.len() {
            self.counts.resize(other.counts.len(), 0);
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.unclassified += other.unclassified;
        self.violations.extend(other.violations);
        self
    }
}

/// Position of a value among the sorted endpoints `lo_0, hi_0, lo_1, ...`.
enum Slot {
    Interval(usize),
    Gap,
    Unknown,
}

struct Locator<'a> {
    ev: &'a Evaluator,
    spf: &'a SpfTable,
    bounds: Vec<&'a Bound>,
    brackets: Vec<(f64, f64)>,
    r: f64,
}

impl<'a> Locator<'a> {
    fn new(ev: &'a Evaluator, spf: &'a SpfTable, intervals: &'a [OracleInterval]) -> Self {
        let bounds: Vec<&Bound> = intervals.iter().flat_map(|iv| [&iv.lo, &iv.hi]).collect();
        let brackets = bounds.iter().map(|b| b.bracket()).collect();
        Self {
            ev,
            spf,
            bounds,
            brackets,
            r: ev.r().to_f64(),
        }
    }

    fn slot_of_position(m: usize, len: usize) -> Slot {
        if m % 2 == 1 && m < len {
            Slot::Interval(m / 2)
        } else {
            Slot::Gap
        }
    }

    fn locate(&self, n: u64) -> Result<Slot> {
        let v = if n == 1 {
            1.0
        } else {
            sigma_f64(self.spf, n, self.r)
        };
        let (vl, vh) = (v * (1.0 - F64_MARGIN), v * (1.0 + F64_MARGIN));
        let first = self.brackets.partition_point(|b| b.1 < vl);
        let last = self.brackets.partition_point(|b| b.0 <= vh);
        let len = self.bounds.len();
        if first == last {
            let slot = Self::slot_of_position(first, len);
            if let Slot::Gap = slot {
                return self.confirm_gap(n, first);
            }
            return Ok(slot);
        }
        let value = self.value_endpoint(n)?;
        let mut m = first;
        for i in first..last {
            match self.bounds[i].decide(self.ev, &value)? {
                Decision::Greater => m = i + 1,
                Decision::Equal => return Ok(Slot::Interval(i / 2)),
                Decision::Less => break,
                Decision::Undecided => return Ok(Slot::Unknown),
            }
        }
        Ok(Self::slot_of_position(m, len))
    }

    fn value_endpoint(&self, n: u64) -> Result<Endpoint> {
        let expr = if n == 1 {
            EndpointExpr::one()
        } else {
            sigma_expr(self.spf, n)
        };
        self.ev.endpoint(expr)
    }

    /// Certifies that the value lies strictly between the endpoints around position `m`.
    fn confirm_gap(&self, n: u64, m: usize) -> Result<Slot> {
        let value = self.value_endpoint(n)?;
        let below = match m.checked_sub(1) {
            Some(i) => self.bounds[i].decide(self.ev, &value)?,
            None => Decision::Greater,
        };
        let above = match self.bounds.get(m) {
            Some(b) => b.decide(self.ev, &value)?,
            None => Decision::Less,
        };
        Ok(match (below, above) {
            (Decision::Greater, Decision::Less) => Slot::Gap,
            _ => Slot::Unknown,
        })
    }

    fn tally(&self, range: std::ops::Range<u64>) -> Result<Tally> {
        let mut t = Tally {
            counts: vec![0; self.bounds.len() / 2],
            ..Tally::default()
        };
        for n in range {
            match self.locate(n)? {
                Slot::Interval(k) => t.counts[k] += 1,
                Slot::Gap => t.violations.push(n),
                Slot::Unknown => t.unclassified += 1,
            }
        }
        Ok(t)
    }
}

/// Classifies every `n <= limit` and records counts, densities and gap violations.
pub fn verify(ev: &Evaluator, limit: u64, intervals: &[OracleInterval]) -> Result<DensityReport> {
    if limit == 0 || limit > MAX_LIMIT {
        return Err(Error::Range(format!(
            "limit must lie in 1..={MAX_LIMIT}, got {limit}"
        )));
    }
    if intervals.is_empty() {
        return Err(Error::Domain("no intervals to verify against".into()));
    }
    let spf = SpfTable::new(limit);
    primes::global().primes_up_to(limit);
    let locator = Locator::new(ev, &spf, intervals);
    if locator.brackets.windows(2).any(|w| w[1].1 < w[0].0) {
        return Err(Error::Domain(
            "interval endpoints are not in increasing order".into(),
        ));
    }
    let chunks: Vec<u64> = (0..limit.div_ceil(CHUNK)).collect();
    let tally = chunks
        .into_par_iter()
        .map(|c| locator.tally(1 + c * CHUNK..(1 + (c + 1) * CHUNK).min(limit + 1)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let mut counts = tally.counts;
    counts.resize(intervals.len(), 0);
    let mut gap_violations = tally.violations;
    gap_violations.sort_unstable();
    let densities = counts.iter().map(|&c| c as f64 / limit as f64).collect();
    Ok(DensityReport {
        limit,
        counts,
        unclassified: tally.unclassified,
        gap_violations,
        densities,
    })
}

pub fn empirical_densities(
    ev: &Evaluator,
    limit: u64,
    intervals: &[OracleInterval],
) -> Result<DensityReport> {
    verify(ev, limit, intervals)
}

pub fn gap_violations(
    ev: &Evaluator,
    limit: u64,
    intervals: &[OracleInterval],
) -> Result<Vec<u64>> {
    Ok(verify(ev, limit, intervals)?.gap_violations)
}

/// `2^s/(2^s - 1) * (3^s + 1)/(3^s - 1) - zeta(s)`.
pub fn eta_function(s: &Rational, prec: u32) -> Result<Enclosure> {
    let one = Enclosure::from_integer(1, prec);
    let two = pow_rational(2, s, prec);
    let three = pow_rational(3, s, prec);
    let lhs = two
        .div(&two.sub(&one))
        .mul(&three.add(&one).div(&three.sub(&one)));
    let zeta = zeta_enclosure(&Exponent::from_rational(s.clone()), prec)?;
    Ok(lhs.sub(&zeta))
}

fn eta_sign(s: &Rational, policy: PrecisionPolicy) -> Result<Option<Ordering>> {
    for prec in policy.ladder() {
        let g = eta_function(s, prec)?;
        if !g.contains_zero() {
            return Ok(Some(if g.is_positive() {
                Ordering::Greater
            } else {
                Ordering::Less
            }));
        }
    }
    Ok(None)
}

/// Bracket `[lo, hi]` of the threshold `eta` in `[3/2, 2]` with `hi - lo <= tol`.
pub fn eta_solve(tol: &Rational) -> Result<(Rational, Rational)> {
    if *tol <= 0 {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let policy = PrecisionPolicy {
        base: 64,
        max: 1024,
    };
    let mut lo = Rational::from((3, 2));
    let mut hi = Rational::from(2);
    if eta_sign(&lo, policy)? != Some(Ordering::Less)
        || eta_sign(&hi, policy)? != Some(Ordering::Greater)
    {
        return Err(Error::Range(
            "no certified sign change of g on [3/2, 2]".into(),
        ));
    }
    while Rational::from(&hi - &lo) > *tol {
        let mid = Rational::from(&lo + &hi) / 2;
        match eta_sign(&mid, policy)? {
            Some(Ordering::Less) => lo = mid,
            Some(_) => hi = mid,
            None => {
                return Err(Error::Comparison {
                    lhs: format!("g({mid})"),
                    rhs: "0".into(),
                    prec: policy.max,
                })
            }
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure;

    fn r(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    fn q(s: &str) -> Rational {
        crate::realnum::parse_rational(s).unwrap()
    }

    #[test]
    fn spf_table_is_correct() {
        let t = SpfTable::new(10_000);
        for n in 2..=10_000u64 {
            let p = t.spf(n);
            assert_eq!(n % p, 0);
            assert!((2..p).all(|d| n % d != 0), "spf({n})");
        }
        assert_eq!(t.factor(360), [(2, 3), (3, 2), (5, 1)]);
        assert!(t.factor(1).is_empty());
    }

    #[test]
    fn sigma_values_at_two() {
        let t = SpfTable::new(100);
        let two = r("2");
        assert_eq!(sigma_value(&t, 1, &two, 64).as_rational(), Some(&q("1")));
        assert_eq!(
            sigma_value(&t, 6, &two, 64).as_rational(),
            Some(&q("25/18"))
        );
        assert_eq!(
            sigma_value(&t, 4, &two, 64).as_rational(),
            Some(&q("21/16"))
        );
        assert_eq!(sigma_expr(&t, 6).to_string(), "sigma(2^1)*sigma(3^1)");
    }

    #[test]
    fn multiplicative_matches_divisor_sum() {
        let t = SpfTable::new(5000);
        for s in ["2", "3"] {
            let rr = r(s);
            for n in (1..5000).step_by(37) {
                assert_eq!(
                    sigma_value(&t, n, &rr, 64).as_rational(),
                    sigma_direct(n, &rr, 64).as_rational(),
                    "n = {n}, r = {s}"
                );
            }
        }
        let rr = r("2.5");
        for n in (1..5000).step_by(41) {
            let a = sigma_value(&t, n, &rr, 128).to_enclosure(128);
            let b = sigma_direct(n, &rr, 128).to_enclosure(128);
            assert!(a.overlaps(&b), "n = {n}");
        }
    }

    #[test]
    fn oracle_at_two_small() {
        let res = closure(&r("2"), PrecisionPolicy::default()).unwrap();
        let ivs = intervals_from_closure(&res);
        let rep = verify(&res.evaluator, 10_000, &ivs).unwrap();
        assert!(rep.gap_violations.is_empty());
        assert_eq!(rep.unclassified, 0);
        assert_eq!(rep.classified(), 10_000);
        let one = verify(&res.evaluator, 1, &ivs).unwrap();
        assert_eq!(one.counts, [1, 0, 0]);
    }

    #[test]
    fn sabotaged_interval_is_caught() {
        let res = closure(&r("2"), PrecisionPolicy::default()).unwrap();
        let mut ivs = intervals_from_closure(&res);
        ivs[2].lo = Bound::Value(q("13/10"));
        let bad = gap_violations(&res.evaluator, 1000, &ivs).unwrap();
        assert!(bad.contains(&2), "{bad:?}");
    }

    #[test]
    fn unsorted_bounds_are_rejected() {
        let res = closure(&r("2"), PrecisionPolicy::default()).unwrap();
        let mut ivs = intervals_from_closure(&res);
        ivs.swap(0, 2);
        assert!(matches!(
            verify(&res.evaluator, 10, &ivs),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn single_interval_has_no_gaps() {
        let res = closure(&r("1.8"), PrecisionPolicy::default()).unwrap();
        let rep = verify(&res.evaluator, 20_000, &intervals_from_closure(&res)).unwrap();
        assert!(rep.gap_violations.is_empty());
        assert_eq!(rep.counts[0] + rep.unclassified, 20_000);
    }

    #[test]
    fn eta_sign_change_and_bracket() {
        assert_eq!(
            eta_sign(&q("3/2"), PrecisionPolicy::default()).unwrap(),
            Some(Ordering::Less)
        );
        // 4/3 * 10/8 = 5/3 > zeta(2)
        assert_eq!(
            eta_sign(&q("2"), PrecisionPolicy::default()).unwrap(),
            Some(Ordering::Greater)
        );
        let (lo, hi) = eta_solve(&q("1/10")).unwrap();
        let eta = q("1.8877909");
        assert!(lo <= eta && eta <= hi);
    }
}
