use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::ops::{Pow, PowAssignRound};
use rug::{Float, Integer, Rational};

/// A certified real interval `[lo, hi]`.
///
/// Every operation rounds `lo` toward `-inf` and `hi` toward `+inf`, so the
/// result contains the exact result for any choice of inputs from the operand
/// intervals. The working precision of a result is the larger operand precision.
#[derive(Clone, PartialEq)]
pub struct Enclosure {
    lo: Float,
    hi: Float,
}

impl fmt::Debug for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]@{}",
            self.lo.to_string_radix_round(10, Some(20), Round::Down),
            self.hi.to_string_radix_round(10, Some(20), Round::Up),
            self.prec()
        )
    }
}

impl Enclosure {
    /// # Panics
    /// If `lo > hi` or either bound is NaN.
    pub fn new(lo: Float, hi: Float) -> Self {
        assert!(
            lo.partial_cmp(&hi).is_some_and(|o| o != Ordering::Greater),
            "enclosure bounds out of order"
        );
        Self { lo, hi }
    }

    pub fn point(x: Float) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_rational(q: &Rational, prec: u32) -> Self {
        let (lo, _) = Float::with_val_round(prec, q, Round::Down);
        let (hi, _) = Float::with_val_round(prec, q, Round::Up);
        Self { lo, hi }
    }

    pub fn from_integer(n: impl Into<Integer>, prec: u32) -> Self {
        let n: Integer = n.into();
        let (lo, _) = Float::with_val_round(prec, &n, Round::Down);
        let (hi, _) = Float::with_val_round(prec, &n, Round::Up);
        Self { lo, hi }
    }

    pub fn pi(prec: u32) -> Self {
        let (lo, _) = Float::with_val_round(prec, Constant::Pi, Round::Down);
        let (hi, _) = Float::with_val_round(prec, Constant::Pi, Round::Up);
        Self { lo, hi }
    }

    pub fn ln2(prec: u32) -> Self {
        let (lo, _) = Float::with_val_round(prec, Constant::Log2, Round::Down);
        let (hi, _) = Float::with_val_round(prec, Constant::Log2, Round::Up);
        Self { lo, hi }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    fn joint_prec(&self, other: &Self) -> u32 {
        self.prec().max(other.prec())
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> Float {
        Float::with_val_round(self.prec(), &self.hi - &self.lo, Round::Up).0
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    /// `true` when every member is strictly positive.
    pub fn is_positive(&self) -> bool {
        self.lo.is_sign_positive() && !self.lo.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn contains_rational(&self, q: &Rational) -> bool {
        self.lo <= *q && self.hi >= *q
    }

    /// `other` ⊆ `self`.
    pub fn contains(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Certified order: `Some` only when the intervals are disjoint, or both
    /// are the same single point.
    pub fn certified_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if other.hi < self.lo {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() && self.lo == other.lo {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64_round(Round::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64_round(Round::Up)
    }

    pub fn mid_f64(&self) -> f64 {
        let sum = Float::with_val(self.prec() + 1, &self.lo + &self.hi);
        (sum / 2u32).to_f64()
    }

    /// Decimal rendering of the lower bound, rounded down.
    pub fn lo_decimal(&self, digits: usize) -> String {
        self.lo.to_string_radix_round(10, Some(digits), Round::Down)
    }

    /// Decimal rendering of the upper bound, rounded up.
    pub fn hi_decimal(&self, digits: usize) -> String {
        self.hi.to_string_radix_round(10, Some(digits), Round::Up)
    }

    pub fn neg(&self) -> Self {
        Self {
            lo: Float::with_val(self.hi.prec(), -&self.hi),
            hi: Float::with_val(self.lo.prec(), -&self.lo),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let prec = self.joint_prec(other);
        Self {
            lo: Float::with_val_round(prec, &self.lo + &other.lo, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + &other.hi, Round::Up).0,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let prec = self.joint_prec(other);
        Self {
            lo: Float::with_val_round(prec, &self.lo - &other.hi, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi - &other.lo, Round::Up).0,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.joint_prec(other);
        if self.lo >= 0 && other.lo >= 0 {
            return Self {
                lo: Float::with_val_round(prec, &self.lo * &other.lo, Round::Down).0,
                hi: Float::with_val_round(prec, &self.hi * &other.hi, Round::Up).0,
            };
        }
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a * *b, Round::Down).0)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a * *b, Round::Up).0)
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        Self { lo, hi }
    }

    /// # Panics
    /// If `other` contains zero.
    pub fn div(&self, other: &Self) -> Self {
        assert!(
            !other.contains_zero(),
            "division by an enclosure containing 0"
        );
        let prec = self.joint_prec(other);
        let pairs = [
            (&self.lo, &other.lo),
            (&self.lo, &other.hi),
            (&self.hi, &other.lo),
            (&self.hi, &other.hi),
        ];
        let lo = pairs
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a / *b, Round::Down).0)
            .min_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        let hi = pairs
            .iter()
            .map(|(a, b)| Float::with_val_round(prec, *a / *b, Round::Up).0)
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        Self { lo, hi }
    }

    pub fn recip(&self) -> Self {
        Self::from_integer(1, self.prec()).div(self)
    }

    pub fn mul_rational(&self, q: &Rational) -> Self {
        self.mul(&Self::from_rational(q, self.prec()))
    }

    /// # Panics
    /// If the interval reaches below zero.
    pub fn sqrt(&self) -> Self {
        assert!(self.lo >= 0, "sqrt of a possibly negative enclosure");
        let mut lo = self.lo.clone();
        lo.sqrt_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.sqrt_round(Round::Up);
        Self { lo, hi }
    }

    pub fn exp(&self) -> Self {
        let mut lo = self.lo.clone();
        lo.exp_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.exp_round(Round::Up);
        Self { lo, hi }
    }

    /// # Panics
    /// If the interval is not strictly positive.
    pub fn ln(&self) -> Self {
        assert!(self.is_positive(), "ln of a non-positive enclosure");
        let mut lo = self.lo.clone();
        lo.ln_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.ln_round(Round::Up);
        Self { lo, hi }
    }

    /// Integer power of a non-negative enclosure.
    pub fn powi(&self, k: u32) -> Self {
        assert!(self.lo >= 0, "powi of a possibly negative enclosure");
        let mut lo = self.lo.clone();
        lo.pow_assign_round(k, Round::Down);
        let mut hi = self.hi.clone();
        hi.pow_assign_round(k, Round::Up);
        Self { lo, hi }
    }

    /// Smallest enclosure containing both operands.
    pub fn hull(&self, other: &Self) -> Self {
        let lo = if self.lo <= other.lo {
            &self.lo
        } else {
            &other.lo
        };
        let hi = if self.hi >= other.hi {
            &self.hi
        } else {
            &other.hi
        };
        Self {
            lo: lo.clone(),
            hi: hi.clone(),
        }
    }

    /// Widen by `r` on both sides.
    pub fn inflate(&self, r: &Float) -> Self {
        let prec = self.prec();
        Self {
            lo: Float::with_val_round(prec, &self.lo - r, Round::Down).0,
            hi: Float::with_val_round(prec, &self.hi + r, Round::Up).0,
        }
    }

    /// `true` when `width <= 2^-bits * |lo|`.
    pub fn relative_width_within(&self, bits: u32) -> bool {
        let w = self.width();
        let mut bound = self.lo.clone().abs();
        bound >>= bits;
        w <= bound
    }
}

/// `n^t` for integer `n >= 1` and rational `t`, as a certified enclosure with
/// at least `prec` bits of relative accuracy.
pub fn pow_rational(n: u64, t: &Rational, prec: u32) -> Enclosure {
    assert!(n >= 1, "base must be positive");
    if n == 1 || *t == 0 {
        return Enclosure::from_integer(1, prec);
    }
    if *t.denom() == 1 {
        if let Some(k) = t.numer().to_i32() {
            let base = Integer::from(n);
            let q = if k >= 0 {
                Rational::from(base.pow(k as u32))
            } else {
                Rational::from((Integer::from(1), base.pow(k.unsigned_abs())))
            };
            return Enclosure::from_rational(&q, prec);
        }
    }
    // |d(n^t)/dt| / n^t = ln n, so an exponent error of 2^-w|t| costs |t| ln n 2^-w.
    let scale = (t.to_f64().abs() * (n as f64).ln()).max(1.0);
    let guard = 8 + scale.log2().ceil() as u32;
    let w = prec + guard;
    let t_lo = Float::with_val_round(w, t, Round::Down).0;
    let t_hi = Float::with_val_round(w, t, Round::Up).0;
    // n > 1, so n^t is increasing in t.
    let mut lo = Float::with_val(w, n);
    lo.pow_assign_round(&t_lo, Round::Down);
    let mut hi = Float::with_val(w, n);
    hi.pow_assign_round(&t_hi, Round::Up);
    Enclosure::new(lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn rational_conversion_contains_value() {
        let third = q("1/3");
        let e = Enclosure::from_rational(&third, 64);
        assert!(e.contains_rational(&third));
        assert!(!e.is_point());
        let quarter = Enclosure::from_rational(&q("1/4"), 64);
        assert!(quarter.is_point());
    }

    #[test]
    fn arithmetic_is_outward() {
        let a = Enclosure::from_rational(&q("1/3"), 53);
        let b = Enclosure::from_rational(&q("2/7"), 53);
        assert!(a.add(&b).contains_rational(&q("13/21")));
        assert!(a.sub(&b).contains_rational(&q("1/21")));
        assert!(a.mul(&b).contains_rational(&q("2/21")));
        assert!(a.div(&b).contains_rational(&q("7/6")));
        assert!(a.neg().mul(&b).contains_rational(&q("-2/21")));
        assert!(b.sub(&a).div(&a).contains_rational(&q("-1/7")));
    }

    #[test]
    fn certified_cmp_requires_separation() {
        let a = Enclosure::from_rational(&q("1/3"), 64);
        let b = Enclosure::from_rational(&q("1/3"), 64);
        assert_eq!(a.certified_cmp(&b), None);
        let c = Enclosure::from_rational(&q("1/2"), 64);
        assert_eq!(a.certified_cmp(&c), Some(Ordering::Less));
        assert_eq!(c.certified_cmp(&a), Some(Ordering::Greater));
        assert_eq!(c.certified_cmp(&c.clone()), Some(Ordering::Equal));
    }

    #[test]
    fn pow_integer_is_exact() {
        assert!(pow_rational(2, &q("-2"), 64).is_point());
        assert!(pow_rational(2, &q("-2"), 64).contains_rational(&q("1/4")));
        assert!(pow_rational(3, &q("-2"), 64).contains_rational(&q("1/9")));
    }

    #[test]
    fn pow_half_integer_brackets_reference() {
        // 2^-1.5 = 0.35355339059327376220042218105242451964241796884424 (mpmath, 50 digits)
        let e = pow_rational(2, &q("-3/2"), 128);
        let r_lo =
            q("35355339059327376220042218105242451964/100000000000000000000000000000000000000");
        let r_hi =
            q("35355339059327376220042218105242451965/100000000000000000000000000000000000000");
        assert!(e.hi() >= &r_lo && e.lo() <= &r_hi);
        assert!(e.relative_width_within(126));
    }

    #[test]
    fn elementary_functions_contain_truth() {
        let two = Enclosure::from_integer(2, 128);
        assert!(two.ln().contains(&Enclosure::ln2(128)) || two.ln().overlaps(&Enclosure::ln2(128)));
        let four = Enclosure::from_integer(4, 64);
        assert!(four.sqrt().contains_rational(&q("2")));
        let zero = Enclosure::from_integer(0, 64);
        assert!(zero.exp().contains_rational(&q("1")));
    }
}
