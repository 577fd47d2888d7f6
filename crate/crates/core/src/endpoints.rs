//! Symbolic interval endpoints.
//!
//! Every endpoint produced by the closure recursion is a finite product
//! `prod_j sigma_{-r}(p_j^{a_j})` times at most one tail factor
//! `T_j = prod_{k>j} 1/(1 - p_k^{-r})`. Keeping endpoints in this form lets
//! equal endpoints be recognised symbolically, which numeric refinement alone
//! could never do.
//!
//! Rendering grammar (stable): factors `sigma(p^a)` with the prime itself and
//! `a` a decimal exponent or `inf`, the tail `T_j` with its prime index, joined
//! by `*` in increasing prime order with the tail last. The empty product is `1`.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicU32, Ordering as AtomicOrdering};
use std::sync::Mutex;

use rug::ops::Pow;
use rug::{Integer, Rational};

use crate::error::{Error, Result};
use crate::primes;
use crate::realnum::{
    self, pow_rational, zeta_enclosure, Approximable, Decision, Enclosure, ExactReal, Exponent,
    PrecisionPolicy,
};

/// Exponent of a prime-power factor, `0..` or `inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Power {
    Finite(u32),
    Infinite,
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(a) => write!(f, "{a}"),
            Self::Infinite => f.write_str("inf"),
        }
    }
}

/// `sigma_{-r}(p_j^a)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SigmaFactor {
    pub prime_index: usize,
    pub exponent: Power,
}

impl SigmaFactor {
    pub fn new(prime_index: usize, exponent: Power) -> Self {
        assert!(prime_index >= 1, "prime indices start at 1");
        Self {
            prime_index,
            exponent,
        }
    }

    pub fn finite(prime_index: usize, a: u32) -> Self {
        Self::new(prime_index, Power::Finite(a))
    }

    pub fn infinite(prime_index: usize) -> Self {
        Self::new(prime_index, Power::Infinite)
    }
}

/// Canonical product of sigma factors (at most one per prime) and an optional tail.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndpointExpr {
    factors: BTreeMap<usize, Power>,
    tail: Option<usize>,
}

impl EndpointExpr {
    pub fn one() -> Self {
        Self::default()
    }

    /// `T_j`; `T_0 = zeta(r)`.
    pub fn tail(j: usize) -> Self {
        Self {
            factors: BTreeMap::new(),
            tail: Some(j),
        }
    }

    pub fn factors(&self) -> impl Iterator<Item = SigmaFactor> + '_ {
        self.factors
            .iter()
            .map(|(&prime_index, &exponent)| SigmaFactor {
                prime_index,
                exponent,
            })
    }

    pub fn tail_index(&self) -> Option<usize> {
        self.tail
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty() && self.tail.is_none()
    }

    pub fn has_prime(&self, j: usize) -> bool {
        self.factors.contains_key(&j)
    }

    /// Multiplies by a factor at a prime not yet present. Exponent-0 factors
    /// equal 1 and are dropped.
    pub fn mul(&self, f: SigmaFactor) -> Result<Self> {
        if self.factors.contains_key(&f.prime_index) {
            return Err(Error::DuplicatePrime(f.prime_index));
        }
        let mut out = self.clone();
        if f.exponent != Power::Finite(0) {
            out.factors.insert(f.prime_index, f.exponent);
        }
        Ok(out)
    }

    /// Attaches the tail `T_j`. Fails if a tail is already present.
    pub fn with_tail(&self, j: usize) -> Result<Self> {
        if self.tail.is_some() {
            return Err(Error::Internal(format!(
                "{self} already carries a tail factor"
            )));
        }
        let mut out = self.clone();
        out.tail = Some(j);
        Ok(out)
    }
}

impl fmt::Display for EndpointExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for factor in self.factors() {
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(
                f,
                "sigma({}^{})",
                primes::nth_prime(factor.prime_index),
                factor.exponent
            )?;
        }
        if let Some(j) = self.tail {
            if !first {
                f.write_str("*")?;
            }
            write!(f, "T_{j}")?;
        }
        Ok(())
    }
}

impl FromStr for EndpointExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::one());
        }
        let bad = |what: &str| Error::Parse(format!("bad endpoint expression {s:?}: {what}"));
        let mut expr = Self::one();
        for token in s.split('*').map(str::trim) {
            if let Some(j) = token.strip_prefix("T_") {
                let j: usize = j.parse().map_err(|_| bad("tail index"))?;
                expr = expr.with_tail(j).map_err(|_| bad("two tail factors"))?;
            } else if let Some(body) = token
                .strip_prefix("sigma(")
                .and_then(|t| t.strip_suffix(')'))
            {
                let (p, a) = body.split_once('^').ok_or_else(|| bad("missing '^'"))?;
                let p: u64 = p.trim().parse().map_err(|_| bad("prime"))?;
                let j = primes::global()
                    .index_of(p)
                    .ok_or_else(|| bad("base is not prime"))?;
                let a = match a.trim() {
                    "inf" => Power::Infinite,
                    digits => Power::Finite(digits.parse().map_err(|_| bad("exponent"))?),
                };
                if expr.has_prime(j) {
                    return Err(Error::DuplicatePrime(j));
                }
                expr = expr.mul(SigmaFactor::new(j, a))?;
            } else {
                return Err(bad("unknown factor"));
            }
        }
        Ok(expr)
    }
}

pub fn expr_mul(e: &EndpointExpr, f: SigmaFactor) -> Result<EndpointExpr> {
    e.mul(f)
}

pub fn expr_render(e: &EndpointExpr) -> String {
    e.to_string()
}

/// `sigma_{-r}(p_j^a)` in closed form `(1 - p^{-r(a+1)})/(1 - p^{-r})`, or
/// `1/(1 - p^{-r})` for `a = inf`. Exact when `r` is a positive integer.
pub fn sigma_prime_power(j: usize, a: Power, r: &Exponent, prec: u32) -> ExactReal {
    let p = primes::nth_prime(j);
    if a == Power::Finite(0) {
        return ExactReal::Rational(Rational::from(1));
    }
    if let Some(k) = r.as_integer() {
        let pk = Integer::from(p).pow(k);
        let q = match a {
            Power::Finite(a) => {
                // sum_{i=0}^{a} p^{-ki} = (p^{k(a+1)} - 1) / (p^{ka} (p^k - 1))
                let num = pk.clone().pow(a + 1) - 1u32;
                let den = pk.clone().pow(a) * Integer::from(&pk - 1u32);
                Rational::from((num, den))
            }
            Power::Infinite => Rational::from((pk.clone(), Integer::from(&pk - 1u32))),
        };
        return ExactReal::Rational(q);
    }
    let one = Enclosure::from_integer(1, prec);
    let x = pow_rational(p, &Rational::from(-r.value()), prec);
    let denom = one.sub(&x);
    let value = match a {
        Power::Finite(a) => {
            let t = Rational::from(-r.value()) * Rational::from(a + 1);
            let y = pow_rational(p, &t, prec);
            one.sub(&y).div(&denom)
        }
        Power::Infinite => one.div(&denom),
    };
    ExactReal::Approx(value)
}

/// `prod_{k <= j} (1 - p_k^{-r})` exactly, for positive integer `r`.
pub fn tail_coefficient(j: usize, k: u32) -> Rational {
    (1..=j).fold(Rational::from(1), |acc, i| {
        let pk = Integer::from(primes::nth_prime(i)).pow(k);
        acc * Rational::from((Integer::from(&pk - 1u32), pk))
    })
}

/// `T_j = prod_{k>j} 1/(1 - p_k^{-r})`, computed as
/// `prod_{k<=j} (1 - p_k^{-r}) * zeta(r)`.
pub fn tail_product(j: usize, r: &Exponent, prec: u32) -> Result<Enclosure> {
    let zeta = zeta_enclosure(r, prec)?;
    Ok(finite_euler_factor(j, r, prec).mul(&zeta))
}

fn finite_euler_factor(j: usize, r: &Exponent, prec: u32) -> Enclosure {
    if let Some(k) = r.as_integer() {
        return Enclosure::from_rational(&tail_coefficient(j, k), prec + 8);
    }
    let one = Enclosure::from_integer(1, prec);
    (1..=j).fold(Enclosure::from_integer(1, prec), |acc, i| {
        let x = realnum::pow_enclosure(primes::nth_prime(i), r, prec + 8);
        acc.mul(&one.sub(&x))
    })
}

/// Uncached evaluation of an expression.
pub fn expr_eval(e: &EndpointExpr, r: &Exponent, prec: u32) -> Result<Enclosure> {
    let mut acc = Enclosure::from_integer(1, prec);
    for f in e.factors() {
        acc = acc
            .mul(&sigma_prime_power(f.prime_index, f.exponent, r, prec + 8).to_enclosure(prec + 8));
    }
    if let Some(j) = e.tail {
        acc = acc.mul(&tail_product(j, r, prec + 8)?);
    }
    Ok(acc)
}

/// Exact closed form `q * zeta(k)^t` of an endpoint when `r = k` is a positive integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosedForm {
    pub coefficient: Rational,
    pub zeta_power: u32,
    pub r: u32,
}

impl ClosedForm {
    pub fn of(e: &EndpointExpr, r: &Exponent) -> Option<Self> {
        let k = r.as_integer()?;
        let mut q = Rational::from(1);
        for f in e.factors() {
            match sigma_prime_power(f.prime_index, f.exponent, r, 64) {
                ExactReal::Rational(v) => q *= v,
                ExactReal::Approx(_) => return None,
            }
        }
        let zeta_power = match e.tail {
            Some(j) => {
                q *= tail_coefficient(j, k);
                1
            }
            None => 0,
        };
        Some(Self {
            coefficient: q,
            zeta_power,
            r: k,
        })
    }

    pub fn enclose(&self, prec: u32) -> Result<Enclosure> {
        let mut acc = Enclosure::from_rational(&self.coefficient, prec + 8);
        if self.zeta_power > 0 {
            let z = zeta_enclosure(&Exponent::from_rational(Rational::from(self.r)), prec + 8)?;
            for _ in 0..self.zeta_power {
                acc = acc.mul(&z);
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let zeta = match self.zeta_power {
            0 => return write!(f, "{}", self.coefficient),
            1 => format!("zeta({})", self.r),
            t => format!("zeta({})^{t}", self.r),
        };
        if self.coefficient == 1 {
            f.write_str(&zeta)
        } else {
            write!(f, "{}*{zeta}", self.coefficient)
        }
    }
}

impl FromStr for ClosedForm {
    type Err = Error;

    /// Accepts `q`, `zeta(k)`, `q*zeta(k)` and `q*zeta(k)^t`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad closed form {s:?}"));
        let s = s.trim();
        let (coef, zeta) = match s.split_once('*') {
            Some((c, z)) => (Some(c), Some(z)),
            None if s.starts_with("zeta(") => (None, Some(s)),
            None => (Some(s), None),
        };
        let coefficient = match coef {
            Some(c) => realnum::parse_rational(c).map_err(|_| bad())?,
            None => Rational::from(1),
        };
        let (r, zeta_power) = match zeta {
            None => (0, 0),
            Some(z) => {
                let (call, power) = match z.split_once(")^") {
                    Some((c, t)) => (format!("{c})"), t.parse().map_err(|_| bad())?),
                    None => (z.to_owned(), 1),
                };
                let k = call
                    .strip_prefix("zeta(")
                    .and_then(|t| t.strip_suffix(')'))
                    .ok_or_else(bad)?
                    .parse()
                    .map_err(|_| bad())?;
                (k, power)
            }
        };
        Ok(Self {
            coefficient,
            zeta_power,
            r,
        })
    }
}

/// An endpoint expression together with a cached enclosure of its value.
#[derive(Clone, Debug)]
pub struct Endpoint {
    pub expr: EndpointExpr,
    pub enc: Enclosure,
}

/// `[lo, hi]` with `lo < hi` decided at construction.
#[derive(Clone, Debug)]
pub struct ClosedInterval {
    lo: Endpoint,
    hi: Endpoint,
}

impl ClosedInterval {
    pub fn lo(&self) -> &Endpoint {
        &self.lo
    }

    pub fn hi(&self) -> &Endpoint {
        &self.hi
    }

    pub fn into_parts(self) -> (Endpoint, Endpoint) {
        (self.lo, self.hi)
    }

    /// Symbolic identity of both endpoints.
    pub fn same_exprs(&self, other: &Self) -> bool {
        self.lo.expr == other.lo.expr && self.hi.expr == other.hi.expr
    }
}

impl fmt::Display for ClosedInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo.expr, self.hi.expr)
    }
}

type FactorKey = (usize, Power, u32);

/// Evaluation context for one exponent `r`: caches `zeta(r)`, sigma factors
/// and tails per precision, and decides comparisons between endpoints.
#[derive(Debug)]
pub struct Evaluator {
    r: Exponent,
    policy: PrecisionPolicy,
    zeta: Mutex<HashMap<u32, Enclosure>>,
    factors: Mutex<HashMap<FactorKey, Enclosure>>,
    tails: Mutex<HashMap<(usize, u32), Enclosure>>,
    max_prec: AtomicU32,
}

impl Evaluator {
    pub fn new(r: Exponent, policy: PrecisionPolicy) -> Self {
        Self {
            r,
            max_prec: AtomicU32::new(policy.base),
            policy,
            zeta: Mutex::default(),
            factors: Mutex::default(),
            tails: Mutex::default(),
        }
    }

    pub fn r(&self) -> &Exponent {
        &self.r
    }

    pub fn policy(&self) -> PrecisionPolicy {
        self.policy
    }

    /// Highest precision any evaluation has needed so far.
    pub fn precision_used(&self) -> u32 {
        self.max_prec.load(AtomicOrdering::Relaxed)
    }

    fn note_prec(&self, prec: u32) {
        self.max_prec.fetch_max(prec, AtomicOrdering::Relaxed);
    }

    pub fn zeta(&self, prec: u32) -> Result<Enclosure> {
        if let Some(z) = self.zeta.lock().unwrap().get(&prec) {
            return Ok(z.clone());
        }
        let z = zeta_enclosure(&self.r, prec + 8)?;
        self.zeta.lock().unwrap().insert(prec, z.clone());
        Ok(z)
    }

    /// Enclosure of `sigma_{-r}(p_j^a)`.
    pub fn factor(&self, f: SigmaFactor, prec: u32) -> Enclosure {
        let key = (f.prime_index, f.exponent, prec);
        if let Some(v) = self.factors.lock().unwrap().get(&key) {
            return v.clone();
        }
        let v =
            sigma_prime_power(f.prime_index, f.exponent, &self.r, prec + 8).to_enclosure(prec + 8);
        self.factors.lock().unwrap().insert(key, v.clone());
        v
    }

    pub fn tail(&self, j: usize, prec: u32) -> Result<Enclosure> {
        if let Some(v) = self.tails.lock().unwrap().get(&(j, prec)) {
            return Ok(v.clone());
        }
        let v = finite_euler_factor(j, &self.r, prec + 8).mul(&self.zeta(prec)?);
        self.tails.lock().unwrap().insert((j, prec), v.clone());
        Ok(v)
    }

    pub fn eval(&self, e: &EndpointExpr, prec: u32) -> Result<Enclosure> {
        let mut acc = Enclosure::from_integer(1, prec);
        for f in e.factors() {
            acc = acc.mul(&self.factor(f, prec));
        }
        if let Some(j) = e.tail {
            acc = acc.mul(&self.tail(j, prec)?);
        }
        Ok(acc)
    }

    pub fn closed_form(&self, e: &EndpointExpr) -> Option<ClosedForm> {
        ClosedForm::of(e, &self.r)
    }

    /// Endpoint with its enclosure at the base precision.
    pub fn endpoint(&self, expr: EndpointExpr) -> Result<Endpoint> {
        let enc = self.eval(&expr, self.policy.base)?;
        Ok(Endpoint { expr, enc })
    }

    /// `f * e`, reusing the cached enclosure of `e`.
    pub fn scale(&self, e: &Endpoint, f: SigmaFactor) -> Result<Endpoint> {
        let expr = e.expr.mul(f)?;
        let enc = if f.exponent == Power::Finite(0) {
            e.enc.clone()
        } else {
            e.enc.mul(&self.factor(f, self.policy.base))
        };
        Ok(Endpoint { expr, enc })
    }

    /// Non-fatal comparison: symbolic identity, then exact closed forms, then
    /// the cached enclosures, then re-evaluation along the precision ladder.
    pub fn decide(&self, a: &Endpoint, b: &Endpoint) -> Result<Decision> {
        if a.expr == b.expr {
            return Ok(Decision::Equal);
        }
        if let (Some(ca), Some(cb)) = (self.closed_form(&a.expr), self.closed_form(&b.expr)) {
            if ca.zeta_power == cb.zeta_power {
                return Ok(match ca.coefficient.cmp(&cb.coefficient) {
                    Ordering::Less => Decision::Less,
                    Ordering::Equal => Decision::Equal,
                    Ordering::Greater => Decision::Greater,
                });
            }
        }
        match a.enc.certified_cmp(&b.enc) {
            Some(Ordering::Less) => return Ok(Decision::Less),
            Some(Ordering::Greater) => return Ok(Decision::Greater),
            _ => {}
        }
        let escalated = PrecisionPolicy {
            base: self.policy.base.saturating_mul(2),
            max: self.policy.max,
        };
        if escalated.base > escalated.max {
            return Ok(Decision::Undecided);
        }
        let (d, prec) = realnum::compare(
            &Source {
                ev: self,
                expr: &a.expr,
            },
            &Source {
                ev: self,
                expr: &b.expr,
            },
            escalated,
        )?;
        self.note_prec(prec);
        Ok(d)
    }

    /// Total comparison; an undecidable pair is an error carrying both expressions.
    pub fn compare(&self, a: &Endpoint, b: &Endpoint) -> Result<Ordering> {
        match self.decide(a, b)? {
            Decision::Undecided => Err(Error::Comparison {
                lhs: a.expr.to_string(),
                rhs: b.expr.to_string(),
                prec: self.policy.max,
            }),
            d => Ok(d.ordering().unwrap()),
        }
    }

    /// Compares an endpoint with an explicit rational value.
    pub fn decide_rational(&self, a: &Endpoint, q: &Rational) -> Result<Decision> {
        if let Some(ca) = self.closed_form(&a.expr) {
            if ca.zeta_power == 0 {
                return Ok(match ca.coefficient.cmp(q) {
                    Ordering::Less => Decision::Less,
                    Ordering::Equal => Decision::Equal,
                    Ordering::Greater => Decision::Greater,
                });
            }
        }
        let (d, prec) = realnum::compare(
            &Source {
                ev: self,
                expr: &a.expr,
            },
            q,
            self.policy,
        )?;
        self.note_prec(prec);
        Ok(d)
    }

    /// Builds `[lo, hi]`, requiring `lo < hi` to be decided.
    pub fn interval(&self, lo: Endpoint, hi: Endpoint) -> Result<ClosedInterval> {
        match self.compare(&lo, &hi)? {
            Ordering::Less => Ok(ClosedInterval { lo, hi }),
            _ => Err(Error::Internal(format!(
                "degenerate interval [{}, {}]",
                lo.expr, hi.expr
            ))),
        }
    }
}

struct Source<'a> {
    ev: &'a Evaluator,
    expr: &'a EndpointExpr,
}

impl Approximable for Source<'_> {
    fn exact(&self) -> Option<Rational> {
        self.ev
            .closed_form(self.expr)
            .filter(|c| c.zeta_power == 0)
            .map(|c| c.coefficient)
    }

    fn enclose(&self, prec: u32) -> Result<Enclosure> {
        self.ev.eval(self.expr, prec)
    }
}
