//! Certified evaluation of the Riemann zeta function on `(1, inf)`.
//!
//! Euler–Maclaurin summation of `sum n^-s` starting at `N`:
//!
//! ```text
//! zeta(s) = sum_{n<N} n^-s + N^{1-s}/(s-1) + N^-s/2
//!         + sum_{k=1}^{M} B_{2k}/(2k)! (s)_{2k-1} N^{-s-2k+1} + R_M
//! ```
//!
//! with `|R_M| <= |B_{2M}|/(2M)! (s)_{2M} N^{1-s-2M}/(s+2M-1)`, using
//! `|B~_{2M}(x)| <= |B_{2M}|` for the periodic Bernoulli function. The
//! `(s+2M-1)` cancels, so the bound equals the magnitude of the last term kept.

use std::sync::Mutex;

use rug::{Integer, Rational};

use super::enclosure::{pow_rational, Enclosure};
use super::exact::Exponent;
use crate::error::{Error, Result};

/// Largest `N` tried before giving up.
pub const MAX_TERMS: u64 = 1 << 26;

/// `zeta(r)` with relative width at most `2^-prec`.
pub fn zeta_enclosure(r: &Exponent, prec: u32) -> Result<Enclosure> {
    let s = r.value();
    let one_plus = Rational::from(1) + Rational::from((1, Integer::from(1) << 20));
    if *s <= one_plus {
        return Err(Error::Range(format!(
            "zeta({r}) is outside the supported range r > 1 + 2^-20"
        )));
    }
    let target = prec + 4;
    let m = (target / 7 + 2) as usize;
    let mut n = (4 * m as u64).max(16);
    while n <= MAX_TERMS {
        let z = euler_maclaurin(s, prec, n, m);
        if z.relative_width_within(prec) {
            return Ok(z);
        }
        n *= 2;
    }
    Err(Error::Range(format!(
        "zeta({r}) did not reach {prec} bits within {MAX_TERMS} terms"
    )))
}

fn euler_maclaurin(s: &Rational, prec: u32, n: u64, m: usize) -> Enclosure {
    let w = prec + 24 + 64 - n.leading_zeros() + (usize::BITS - m.leading_zeros());
    let neg_s = Rational::from(-s);
    let s_enc = Enclosure::from_rational(s, w);
    let one = Enclosure::from_integer(1, w);

    let mut sum = Enclosure::from_integer(0, w);
    for k in 1..n {
        sum = sum.add(&pow_rational(k, &neg_s, w));
    }

    let n_enc = Enclosure::from_integer(n, w);
    let n_neg_s = pow_rational(n, &neg_s, w);
    // N^{1-s}/(s-1) + N^{-s}/2
    sum = sum.add(&n_neg_s.mul(&n_enc).div(&s_enc.sub(&one)));
    sum = sum.add(&n_neg_s.mul_rational(&Rational::from((1, 2))));

    let coeffs = bernoulli_over_factorial(m);
    let n_sq = n_enc.mul(&n_enc);
    let mut npow = n_neg_s.div(&n_enc); // N^{-s-2k+1} for k = 1
    let mut poch = s_enc.clone(); // (s)_{2k-1} for k = 1
    let mut last = Enclosure::from_integer(0, w);
    for (k, c) in coeffs.iter().enumerate() {
        let k = k as u32 + 1;
        last = poch.mul(&npow).mul_rational(c);
        sum = sum.add(&last);
        if (k as usize) < m {
            let a = s_enc.add(&Enclosure::from_integer(2 * k - 1, w));
            let b = s_enc.add(&Enclosure::from_integer(2 * k, w));
            poch = poch.mul(&a).mul(&b);
            npow = npow.div(&n_sq);
        }
    }
    let rem = last.hi().clone().abs().max(&last.lo().clone().abs());
    sum.inflate(&rem)
}

/// `B_{2k}/(2k)!` for `k = 1..=m`, exact.
pub fn bernoulli_over_factorial(m: usize) -> Vec<Rational> {
    static CACHE: Mutex<Vec<Rational>> = Mutex::new(Vec::new());
    let mut cache = CACHE.lock().unwrap();
    if cache.len() < m {
        let target = m.max(2 * cache.len());
        let b = even_bernoulli(target);
        let mut fact = Integer::from(1);
        let mut out = Vec::with_capacity(target);
        for (i, b2k) in b.into_iter().enumerate() {
            let two_k = 2 * (i as u32 + 1);
            fact *= two_k - 1;
            fact *= two_k;
            out.push(b2k / Rational::from(fact.clone()));
        }
        *cache = out;
    }
    cache[..m].to_vec()
}

/// `B_2, B_4, ..., B_{2m}` via tangent numbers (integer-only triangle,
/// Brent & Harvey): `B_{2k} = (-1)^{k-1} 2k T_k / (2^{2k} (2^{2k} - 1))`.
pub fn even_bernoulli(m: usize) -> Vec<Rational> {
    if m == 0 {
        return Vec::new();
    }
    let mut t = vec![Integer::new(); m + 1];
    t[1] = Integer::from(1);
    for k in 2..=m {
        t[k] = Integer::from(&t[k - 1] * (k as u32 - 1));
    }
    for k in 2..=m {
        for j in k..=m {
            let next = Integer::from(&t[j - 1] * (j - k) as u32)
                + Integer::from(&t[j] * (j - k + 2) as u32);
            t[j] = next;
        }
    }
    (1..=m)
        .map(|k| {
            let pow = Integer::from(1) << (2 * k as u32);
            let den = &pow * Integer::from(&pow - 1u32);
            let num = Integer::from(&t[k] * (2 * k as u32));
            let b = Rational::from((num, den));
            if k % 2 == 1 {
                b
            } else {
                -b
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Exponent {
        s.parse().unwrap()
    }

    #[test]
    fn small_bernoulli_numbers() {
        let b = even_bernoulli(6);
        let expect = [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730)];
        for (got, (n, d)) in b.iter().zip(expect) {
            assert_eq!(*got, Rational::from((n, d)));
        }
    }

    #[test]
    fn zeta_two_contains_pi_squared_over_six() {
        let z = zeta_enclosure(&r("2"), 128).unwrap();
        let pi = Enclosure::pi(200);
        let truth = pi.mul(&pi).mul_rational(&Rational::from((1, 6)));
        assert!(z.overlaps(&truth));
        assert!(z.relative_width_within(128));
    }

    #[test]
    fn zeta_four_contains_pi_fourth_over_ninety() {
        let z = zeta_enclosure(&r("4"), 256).unwrap();
        let pi = Enclosure::pi(400);
        let truth = pi.powi(4).mul_rational(&Rational::from((1, 90)));
        assert!(z.overlaps(&truth));
    }

    #[test]
    fn zeta_large_argument_is_just_above_one() {
        let z = zeta_enclosure(&r("50"), 128).unwrap();
        let lower = Rational::from(1) + Rational::from((1, Integer::from(1) << 50));
        let upper = Rational::from(1) + Rational::from((1, Integer::from(1) << 49));
        assert!(z.lo() > &Rational::from(1));
        assert!(z.hi() < &upper);
        assert!(z.hi() >= &lower);
    }

    #[test]
    fn zeta_non_integer_matches_reference() {
        // zeta(1.8) = 1.8822296181028220466659462479647890184876735009161 (mpmath)
        let z = zeta_enclosure(&r("1.8"), 128).unwrap();
        let lo: Rational =
            "18822296181028220466659462479647890184/10000000000000000000000000000000000000"
                .parse()
                .unwrap();
        let hi: Rational =
            "18822296181028220466659462479647890185/10000000000000000000000000000000000000"
                .parse()
                .unwrap();
        assert!(z.hi() >= &lo && z.lo() <= &hi);
    }

    #[test]
    fn rejects_arguments_too_close_to_one() {
        assert!(matches!(zeta_enclosure(&r("1"), 64), Err(Error::Range(_))));
        assert!(matches!(
            zeta_enclosure(&r("1.0000001"), 64),
            Err(Error::Range(_))
        ));
        assert!(zeta_enclosure(&r("1.01"), 64).is_ok());
    }

    #[test]
    fn doubling_precision_nests() {
        for s in ["1.5", "2", "2.5", "3.25", "7"] {
            let lo = zeta_enclosure(&r(s), 128).unwrap();
            let hi = zeta_enclosure(&r(s), 256).unwrap();
            assert!(lo.contains(&hi), "zeta({s})");
        }
    }
}
