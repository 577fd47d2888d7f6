//! Certified arbitrary-precision reals: outward-rounded enclosures over MPFR,
//! exact rationals, `zeta(r)`, and the precision-escalating comparison policy.

mod compare;
mod enclosure;
mod exact;
mod zeta;

pub use compare::{compare, Approximable, Decision, FromFn, PrecisionPolicy};
pub use enclosure::{pow_rational, Enclosure};
pub use exact::{format_decimal, parse_rational, ExactReal, Exponent};
pub use zeta::{bernoulli_over_factorial, even_bernoulli, zeta_enclosure, MAX_TERMS};

use rug::ops::Pow;
use rug::Rational;

/// `p^{-r}`. Exact (a point enclosure up to representation) when `r` is a
/// positive integer.
pub fn pow_enclosure(p: u64, r: &Exponent, prec: u32) -> Enclosure {
    pow_rational(p, &Rational::from(-r.value()), prec)
}

/// `p^{-r}` as an exact rational when `r` is a positive integer.
pub fn neg_power(p: u64, r: &Exponent, prec: u32) -> ExactReal {
    match r.as_integer() {
        Some(k) => ExactReal::Rational(Rational::from((1, rug::Integer::from(p).pow(k)))),
        None => ExactReal::Approx(pow_enclosure(p, r, prec)),
    }
}
