use std::cmp::Ordering;

use rug::Rational;

use super::enclosure::Enclosure;
use crate::error::Result;

/// Outcome of a certified comparison.
///
/// `Equal` is only ever produced from exact information (two rationals, or
/// two identical point enclosures); numeric refinement can separate values
/// but never prove them equal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Less,
    Equal,
    Greater,
    Undecided,
}

impl Decision {
    pub fn ordering(self) -> Option<Ordering> {
        match self {
            Self::Less => Some(Ordering::Less),
            Self::Equal => Some(Ordering::Equal),
            Self::Greater => Some(Ordering::Greater),
            Self::Undecided => None,
        }
    }

    fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => Self::Less,
            Ordering::Equal => Self::Equal,
            Ordering::Greater => Self::Greater,
        }
    }

    pub fn reverse(self) -> Self {
        match self {
            Self::Less => Self::Greater,
            Self::Greater => Self::Less,
            d => d,
        }
    }
}

/// Working precisions for certified evaluation: start at `base` bits and
/// double up to `max` bits before giving up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionPolicy {
    pub base: u32,
    pub max: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            base: 128,
            max: 4096,
        }
    }
}

impl PrecisionPolicy {
    /// The precisions tried, in order.
    pub fn ladder(&self) -> impl Iterator<Item = u32> {
        let max = self.max.max(self.base);
        std::iter::successors(Some(self.base.max(2)), move |&p| {
            let next = p.saturating_mul(2);
            (p < max).then_some(next.min(max))
        })
    }
}

/// A quantity that can be re-evaluated at any precision.
pub trait Approximable {
    /// Exact rational value, if one is known.
    fn exact(&self) -> Option<Rational> {
        None
    }

    fn enclose(&self, prec: u32) -> Result<Enclosure>;
}

impl Approximable for Rational {
    fn exact(&self) -> Option<Rational> {
        Some(self.clone())
    }

    fn enclose(&self, prec: u32) -> Result<Enclosure> {
        Ok(Enclosure::from_rational(self, prec))
    }
}

/// Adapts a closure `prec -> Enclosure` into an [`Approximable`].
pub struct FromFn<F>(pub F);

impl<F> Approximable for FromFn<F>
where
    F: Fn(u32) -> Result<Enclosure>,
{
    fn enclose(&self, prec: u32) -> Result<Enclosure> {
        (self.0)(prec)
    }
}

/// Compares two re-evaluable quantities, escalating precision along the
/// policy's ladder. Returns the decision and the last precision used.
pub fn compare<A, B>(a: &A, b: &B, policy: PrecisionPolicy) -> Result<(Decision, u32)>
where
    A: Approximable + ?Sized,
    B: Approximable + ?Sized,
{
    if let (Some(x), Some(y)) = (a.exact(), b.exact()) {
        return Ok((Decision::from_ordering(x.cmp(&y)), 0));
    }
    let mut last = policy.base;
    for prec in policy.ladder() {
        last = prec;
        let ea = a.enclose(prec)?;
        let eb = b.enclose(prec)?;
        if let Some(o) = ea.certified_cmp(&eb) {
            if o != Ordering::Equal {
                return Ok((Decision::from_ordering(o), prec));
            }
        }
    }
    Ok((Decision::Undecided, last))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_doubles_to_max() {
        let p = PrecisionPolicy {
            base: 128,
            max: 1000,
        };
        assert_eq!(p.ladder().collect::<Vec<_>>(), vec![128, 256, 512, 1000]);
        let q = PrecisionPolicy { base: 64, max: 64 };
        assert_eq!(q.ladder().collect::<Vec<_>>(), vec![64]);
    }

    #[test]
    fn exact_rationals_compare_symbolically() {
        let a = Rational::from((1, 4));
        let b = Rational::from((1, 9));
        let (d, _) = compare(&a, &b, PrecisionPolicy::default()).unwrap();
        assert_eq!(d, Decision::Greater);
        let (d, _) = compare(&a, &a.clone(), PrecisionPolicy::default()).unwrap();
        assert_eq!(d, Decision::Equal);
    }

    #[test]
    fn identical_irrationals_stay_undecided() {
        let pi = FromFn(|prec| Ok(Enclosure::pi(prec)));
        let policy = PrecisionPolicy { base: 64, max: 512 };
        let (d, prec) = compare(&pi, &pi, policy).unwrap();
        assert_eq!(d, Decision::Undecided);
        assert_eq!(prec, 512);
    }
}
