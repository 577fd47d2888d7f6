//! Closure of `sigma_{-r}(N+)` as finitely many disjoint closed intervals.
//!
//! Level `j` describes the closure of `sigma_{-r}` over the integers free of
//! the first `j` primes. The top level `j0` is a single interval `[1, T_j0]`;
//! each step down multiplies every interval by the powers of `p_j`, glues the
//! pieces that meet, and carries the densities along exactly.

use std::cmp::Ordering;
use std::sync::Arc;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::endpoints::{ClosedInterval, Endpoint, EndpointExpr, Evaluator, SigmaFactor};
use crate::error::{Error, Result};
use crate::primes;
use crate::realnum::{self, pow_rational, Decision, Enclosure, Exponent, FromFn, PrecisionPolicy};

/// Below this `j` the Dusart bound is not used; prime ratios are checked directly.
pub const DUSART_INDEX: usize = 463;

/// Largest value of the `j'` search bound that is sieved before giving up.
pub const MAX_PRIME_BOUND: u64 = 100_000_000;

/// Upper limit on the cutoff exponent loop.
pub const CUTOFF_CAP: u32 = 1_000_000;

#[derive(Clone, Debug)]
pub struct LevelState {
    pub level: usize,
    pub intervals: Vec<ClosedInterval>,
    pub densities: Vec<Rational>,
}

impl LevelState {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn density_sum(&self) -> Rational {
        self.densities.iter().sum()
    }
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub r: Exponent,
    pub j_prime: usize,
    pub j0: usize,
    /// Levels `j0, j0 - 1, ..., 0`.
    pub levels: Vec<LevelState>,
    /// `cutoffs[i][k]` is the cutoff exponent of interval `k` when stepping
    /// down from `levels[i]`.
    pub cutoffs: Vec<Vec<u32>>,
    pub precision_used: u32,
    pub evaluator: Arc<Evaluator>,
}

impl ClosureResult {
    pub fn final_level(&self) -> &LevelState {
        self.levels.last().expect("at least one level")
    }

    pub fn level(&self, j: usize) -> Option<&LevelState> {
        self.levels.iter().find(|s| s.level == j)
    }

    /// Cutoff exponent of interval `k` (0-based) at level `j` when stepping to `j - 1`.
    pub fn cutoff(&self, j: usize, k: usize) -> Option<u32> {
        let i = self.levels.iter().position(|s| s.level == j)?;
        self.cutoffs.get(i)?.get(k).copied()
    }

    pub fn ell(&self) -> usize {
        self.final_level().len()
    }
}

/// `prod_{k<=j} (1 - 1/p_k)`.
pub fn euler_density(j: usize) -> Rational {
    (1..=j).fold(Rational::from(1), |acc, k| {
        let p = primes::nth_prime(k);
        acc * Rational::from((p - 1, p))
    })
}

fn check_domain(r: &Exponent) -> Result<()> {
    if *r.value() <= 1 {
        return Err(Error::Domain(format!("r must exceed 1, got {r}")));
    }
    Ok(())
}

/// `exp(sqrt(1/(2(2^{1/r} - 1))))`.
pub fn prime_bound_enclosure(r: &Exponent, prec: u32) -> Enclosure {
    let one = Enclosure::from_integer(1, prec);
    let root = pow_rational(2, &Rational::from(r.value().recip_ref()), prec);
    root.sub(&one)
        .mul_rational(&Rational::from(2))
        .recip()
        .sqrt()
        .exp()
}

/// Prime index up to which consecutive ratios must be checked explicitly.
pub fn prime_bound_index(r: &Exponent) -> Result<usize> {
    check_domain(r)?;
    let e = prime_bound_enclosure(r, 64);
    let hi = e.hi_f64();
    if !hi.is_finite() || hi > MAX_PRIME_BOUND as f64 {
        return Err(Error::Range(format!(
            "prime bound for r = {r} exceeds {MAX_PRIME_BOUND}"
        )));
    }
    let x = hi.ceil() as u64;
    Ok(primes::global().least_index_at_least(x).max(DUSART_INDEX))
}

/// Decides `p_{j+1} <= 2^{1/r} p_j`, i.e. `r ln(p_{j+1}/p_j) <= ln 2`.
fn ratio_holds(r: &Exponent, p: u64, q: u64, policy: PrecisionPolicy) -> Result<bool> {
    let fast = r.to_f64() * ((q as f64).ln() - (p as f64).ln()) - std::f64::consts::LN_2;
    if fast.abs() > 1e-9 {
        return Ok(fast < 0.0);
    }
    let lhs = FromFn(|prec: u32| {
        let ln_ratio = Enclosure::from_integer(q, prec)
            .ln()
            .sub(&Enclosure::from_integer(p, prec).ln());
        Ok(r.enclose(prec).mul(&ln_ratio))
    });
    let rhs = FromFn(|prec: u32| Ok(Enclosure::ln2(prec)));
    match realnum::compare(&lhs, &rhs, policy)?.0 {
        Decision::Less | Decision::Equal => Ok(true),
        Decision::Greater => Ok(false),
        Decision::Undecided => Err(Error::Comparison {
            lhs: format!("{r}*ln({q}/{p})"),
            rhs: "ln(2)".into(),
            prec: policy.max,
        }),
    }
}

/// Least `j'` such that `p_{j+1} <= 2^{1/r} p_j` for every `j` from `j'` up to the bound.
pub fn find_jprime(r: &Exponent, policy: PrecisionPolicy) -> Result<usize> {
    let bound = prime_bound_index(r)?;
    let table = primes::global();
    let last = table.nth_prime(bound + 1);
    let ps = table.primes_up_to(last);
    let mut jprime = 1;
    for j in (1..=bound).rev() {
        if !ratio_holds(r, ps[j - 1], ps[j], policy)? {
            jprime = j + 1;
            break;
        }
    }
    Ok(jprime)
}

/// Largest `j < j'` with `T_j < 1 + p_j^{-r}`, or 0.
pub fn compute_j0(ev: &Evaluator, j_prime: usize) -> Result<usize> {
    for j in (1..j_prime).rev() {
        let tail = ev.endpoint(EndpointExpr::tail(j))?;
        let one_plus = ev.endpoint(EndpointExpr::one().mul(SigmaFactor::finite(j, 1))?)?;
        if ev.compare(&tail, &one_plus)? == Ordering::Less {
            return Ok(j);
        }
    }
    Ok(0)
}

pub fn base_level(ev: &Evaluator, j0: usize) -> Result<LevelState> {
    let lo = ev.endpoint(EndpointExpr::one())?;
    let hi = ev.endpoint(EndpointExpr::tail(j0))?;
    Ok(LevelState {
        level: j0,
        intervals: vec![ev.interval(lo, hi)?],
        densities: vec![euler_density(j0)],
    })
}

/// Least `a` with `sigma(p^{a+1}) lo <= sigma(p^a) hi`.
pub fn cutoff_exponent(ev: &Evaluator, j: usize, interval: &ClosedInterval) -> Result<u32> {
    for a in 0..CUTOFF_CAP {
        let left = ev.scale(interval.lo(), SigmaFactor::finite(j, a + 1))?;
        let right = ev.scale(interval.hi(), SigmaFactor::finite(j, a))?;
        if ev.compare(&left, &right)? != Ordering::Greater {
            return Ok(a);
        }
    }
    Err(Error::Internal(format!(
        "cutoff exponent for p_{j} on {interval} exceeds {CUTOFF_CAP}"
    )))
}

/// `J_0, ..., J_{a0}` for `p_j` and the interval; consecutive pieces are
/// checked to be separated.
pub fn expand_interval(
    ev: &Evaluator,
    j: usize,
    interval: &ClosedInterval,
) -> Result<Vec<ClosedInterval>> {
    let a0 = cutoff_exponent(ev, j, interval)?;
    expand_with_cutoff(ev, j, interval, a0)
}

fn expand_with_cutoff(
    ev: &Evaluator,
    j: usize,
    interval: &ClosedInterval,
    a0: u32,
) -> Result<Vec<ClosedInterval>> {
    let mut pieces = Vec::with_capacity(a0 as usize + 1);
    for a in 0..=a0 {
        let lo = ev.scale(interval.lo(), SigmaFactor::finite(j, a))?;
        let hi = if a == a0 {
            ev.scale(interval.hi(), SigmaFactor::infinite(j))?
        } else {
            ev.scale(interval.hi(), SigmaFactor::finite(j, a))?
        };
        let piece = ev.interval(lo, hi)?;
        if let Some(prev) = pieces.last() {
            let prev: &ClosedInterval = prev;
            if ev.compare(prev.hi(), piece.lo())? != Ordering::Less {
                return Err(Error::Internal(format!(
                    "pieces {prev} and {piece} of p_{j} overlap"
                )));
            }
        }
        pieces.push(piece);
    }
    Ok(pieces)
}

/// Stable merge sort with a fallible comparator.
fn try_sort_by<T, F>(items: Vec<T>, cmp: &mut F) -> Result<Vec<T>>
where
    F: FnMut(&T, &T) -> Result<Ordering>,
{
    if items.len() <= 1 {
        return Ok(items);
    }
    let mut left = items;
    let right = left.split_off(left.len() / 2);
    let left = try_sort_by(left, cmp)?;
    let right = try_sort_by(right, cmp)?;
    let mut out = Vec::with_capacity(left.len() + right.len());
    let mut li = left.into_iter().peekable();
    let mut ri = right.into_iter().peekable();
    while let (Some(a), Some(b)) = (li.peek(), ri.peek()) {
        if cmp(b, a)? == Ordering::Less {
            out.push(ri.next().unwrap());
        } else {
            out.push(li.next().unwrap());
        }
    }
    out.extend(li);
    out.extend(ri);
    Ok(out)
}

/// Connected components of a union of closed intervals, sorted, with the
/// component index of every input interval.
pub fn merge_intervals(
    ev: &Evaluator,
    intervals: Vec<ClosedInterval>,
) -> Result<(Vec<ClosedInterval>, Vec<usize>)> {
    let n = intervals.len();
    let indexed: Vec<(usize, ClosedInterval)> = intervals.into_iter().enumerate().collect();
    let sorted = try_sort_by(indexed, &mut |a, b| ev.compare(a.1.lo(), b.1.lo()))?;

    let mut membership = vec![0; n];
    let mut components: Vec<(Endpoint, Endpoint)> = Vec::new();
    for (idx, iv) in sorted {
        let (lo, hi) = iv.into_parts();
        if let Some(current) = components.last_mut() {
            if ev.compare(&lo, &current.1)? != Ordering::Greater {
                if ev.compare(&hi, &current.1)? == Ordering::Greater {
                    current.1 = hi;
                }
                membership[idx] = components.len() - 1;
                continue;
            }
        }
        membership[idx] = components.len();
        components.push((lo, hi));
    }
    let components = components
        .into_iter()
        .map(|(lo, hi)| ev.interval(lo, hi))
        .collect::<Result<Vec<_>>>()?;
    Ok((components, membership))
}

/// Weight of the piece `J_a` among `J_0..J_{a0}`: `1/p^a` below the cutoff,
/// `p/(p^{a0}(p - 1))` for the last piece.
pub fn piece_weight(p: u64, a: u32, a0: u32) -> Rational {
    let pa = Integer::from(p).pow(a);
    if a < a0 {
        Rational::from((1, pa))
    } else {
        Rational::from((Integer::from(p), pa * Integer::from(p - 1)))
    }
}

/// Level `j - 1` from level `j`, with the cutoff exponent of every interval.
pub fn step_down(ev: &Evaluator, state: &LevelState) -> Result<(LevelState, Vec<u32>)> {
    let j = state.level;
    if j == 0 {
        return Err(Error::Internal("cannot step below level 0".into()));
    }
    let p = primes::nth_prime(j);
    let mut pieces = Vec::new();
    let mut weights = Vec::new();
    let mut cutoffs = Vec::with_capacity(state.len());
    for (interval, d) in state.intervals.iter().zip(&state.densities) {
        let a0 = cutoff_exponent(ev, j, interval)?;
        cutoffs.push(a0);
        for (a, piece) in expand_with_cutoff(ev, j, interval, a0)?
            .into_iter()
            .enumerate()
        {
            pieces.push(piece);
            weights.push(d * piece_weight(p, a as u32, a0));
        }
    }
    let (intervals, membership) = merge_intervals(ev, pieces)?;
    let mut densities = vec![Rational::new(); intervals.len()];
    for (h, w) in membership.into_iter().zip(weights) {
        densities[h] += w;
    }
    Ok((
        LevelState {
            level: j - 1,
            intervals,
            densities,
        },
        cutoffs,
    ))
}

fn check_level(ev: &Evaluator, state: &LevelState) -> Result<()> {
    let fail = |what: String| Err(Error::Internal(format!("level {}: {what}", state.level)));
    if state.intervals.len() != state.densities.len() || state.is_empty() {
        return fail("intervals and densities misaligned".into());
    }
    if state.densities.iter().any(|d| *d <= 0) {
        return fail("non-positive density".into());
    }
    let expected = euler_density(state.level);
    if state.density_sum() != expected {
        return fail(format!(
            "densities sum to {} instead of {expected}",
            state.density_sum()
        ));
    }
    for pair in state.intervals.windows(2) {
        if ev.compare(pair[0].hi(), pair[1].lo())? != Ordering::Less {
            return fail(format!("{} and {} are not separated", pair[0], pair[1]));
        }
    }
    if !state.intervals[0].lo().expr.is_one() {
        return fail("first endpoint is not 1".into());
    }
    Ok(())
}

/// `prod_{k<=j0} sigma(p_k^inf) * T_j0`, the symbolic form of `zeta(r)`.
pub fn full_product(j0: usize) -> Result<EndpointExpr> {
    (1..=j0).try_fold(EndpointExpr::tail(j0), |e, k| {
        e.mul(SigmaFactor::infinite(k))
    })
}

pub fn closure(r: &Exponent, policy: PrecisionPolicy) -> Result<ClosureResult> {
    check_domain(r)?;
    let ev = Arc::new(Evaluator::new(r.clone(), policy));
    let j_prime = find_jprime(r, policy)?;
    let j0 = compute_j0(&ev, j_prime)?;
    let mut levels = vec![base_level(&ev, j0)?];
    let mut cutoffs = Vec::with_capacity(j0);
    check_level(&ev, &levels[0])?;
    while levels.last().unwrap().level > 0 {
        let (next, cut) = step_down(&ev, levels.last().unwrap())?;
        check_level(&ev, &next)?;
        levels.push(next);
        cutoffs.push(cut);
    }

    let last = levels.last().unwrap();
    if last.density_sum() != 1 {
        return Err(Error::Internal("final densities do not sum to 1".into()));
    }
    let top = last.intervals.last().unwrap().hi();
    if top.expr != full_product(j0)? {
        return Err(Error::Internal(format!(
            "last endpoint {} is not zeta({r})",
            top.expr
        )));
    }
    if !top.enc.overlaps(&ev.zeta(policy.base)?) {
        return Err(Error::Internal(
            "last endpoint does not enclose zeta(r)".into(),
        ));
    }
    Ok(ClosureResult {
        r: r.clone(),
        j_prime,
        j0,
        levels,
        cutoffs,
        precision_used: ev.precision_used(),
        evaluator: ev,
    })
}
