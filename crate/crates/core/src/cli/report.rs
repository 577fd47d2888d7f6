//! Machine-readable and human-readable closure reports.

use std::fmt::Write as _;

use rug::float::Round;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::closure::ClosureResult;
use crate::endpoints::{Endpoint, EndpointExpr, Evaluator};
use crate::error::{Error, Result};
use crate::oracle::{Bound, OracleInterval};
use crate::realnum::{parse_rational, Enclosure, Exponent, PrecisionPolicy};

/// Decimal digits of the reported value bounds.
pub const VALUE_DIGITS: usize = 40;

/// Precision at which reported values are evaluated; enough for [`VALUE_DIGITS`].
const VALUE_PREC: u32 = 160;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub r: String,
    pub precision_bits: u32,
    pub j_prime: usize,
    pub j0: usize,
    pub ell: usize,
    pub intervals: Vec<IntervalReport>,
    pub zeta: ValueRange,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalReport {
    pub lo: EndpointReport,
    pub hi: EndpointReport,
    pub density: Fraction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointReport {
    pub expr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    pub value_lo: String,
    pub value_hi: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueRange {
    pub value_lo: String,
    pub value_hi: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: String,
    pub den: String,
}

impl Fraction {
    pub fn new(q: &Rational) -> Self {
        Self {
            num: q.numer().to_string(),
            den: q.denom().to_string(),
        }
    }

    pub fn to_rational(&self) -> Result<Rational> {
        parse_rational(&format!("{}/{}", self.num, self.den))
    }
}

impl ValueRange {
    fn new(enc: &Enclosure) -> Self {
        Self {
            value_lo: enc.lo_decimal(VALUE_DIGITS),
            value_hi: enc.hi_decimal(VALUE_DIGITS),
        }
    }

    /// The reported bounds as an enclosure.
    pub fn to_enclosure(&self) -> Result<Enclosure> {
        let parse = |s: &str, round| {
            let parsed =
                Float::parse(s).map_err(|e| Error::Parse(format!("bad decimal {s:?}: {e}")))?;
            Ok::<_, Error>(Float::with_val_round(VALUE_PREC, parsed, round).0)
        };
        let (lo, hi) = (
            parse(&self.value_lo, Round::Down)?,
            parse(&self.value_hi, Round::Up)?,
        );
        if lo > hi {
            return Err(Error::Parse(format!(
                "value_lo {} exceeds value_hi {}",
                self.value_lo, self.value_hi
            )));
        }
        Ok(Enclosure::new(lo, hi))
    }
}

fn endpoint_report(ev: &Evaluator, e: &Endpoint) -> Result<EndpointReport> {
    let enc = ev.eval(&e.expr, VALUE_PREC)?;
    let range = ValueRange::new(&enc);
    Ok(EndpointReport {
        expr: e.expr.to_string(),
        closed_form: ev.closed_form(&e.expr).map(|c| c.to_string()),
        value_lo: range.value_lo,
        value_hi: range.value_hi,
    })
}

impl Report {
    pub fn new(res: &ClosureResult) -> Result<Self> {
        let ev = &res.evaluator;
        let last = res.final_level();
        let intervals = last
            .intervals
            .iter()
            .zip(&last.densities)
            .map(|(iv, d)| {
                Ok(IntervalReport {
                    lo: endpoint_report(ev, iv.lo())?,
                    hi: endpoint_report(ev, iv.hi())?,
                    density: Fraction::new(d),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            r: res.r.text().to_owned(),
            precision_bits: ev.precision_used(),
            j_prime: res.j_prime,
            j0: res.j0,
            ell: last.len(),
            intervals,
            zeta: ValueRange::new(&ev.zeta(VALUE_PREC)?),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("bad report: {e}")))
    }

    pub fn densities(&self) -> Result<Vec<Rational>> {
        self.intervals
            .iter()
            .map(|iv| iv.density.to_rational())
            .collect()
    }

    /// Parses and re-evaluates every endpoint, checking the stored value bounds,
    /// the interval count and that the densities sum to 1.
    pub fn check(&self) -> Result<()> {
        let r: Exponent = self.r.parse()?;
        let ev = Evaluator::new(r, PrecisionPolicy::default());
        if self.ell != self.intervals.len() {
            return Err(Error::Parse(format!(
                "ell = {} but {} intervals listed",
                self.ell,
                self.intervals.len()
            )));
        }
        for iv in &self.intervals {
            for e in [&iv.lo, &iv.hi] {
                let expr: EndpointExpr = e.expr.parse()?;
                let stored = ValueRange {
                    value_lo: e.value_lo.clone(),
                    value_hi: e.value_hi.clone(),
                }
                .to_enclosure()?;
                if !ev.eval(&expr, VALUE_PREC)?.overlaps(&stored) {
                    return Err(Error::Parse(format!("value of {} does not match", e.expr)));
                }
            }
        }
        let total: Rational = self.densities()?.iter().sum();
        if total != 1 {
            return Err(Error::Parse(format!("densities sum to {total}")));
        }
        Ok(())
    }

    /// Interval bounds for the oracle. An endpoint whose `expr` is a plain
    /// rational literal rather than a symbolic product becomes a fixed value.
    pub fn oracle_intervals(&self, ev: &Evaluator) -> Result<Vec<OracleInterval>> {
        let bound = |e: &EndpointReport| -> Result<Bound> {
            match e.expr.parse::<EndpointExpr>() {
                Ok(expr) => Ok(Bound::Expr(ev.endpoint(expr)?)),
                Err(_) => Ok(Bound::Value(parse_rational(&e.expr)?)),
            }
        };
        self.intervals
            .iter()
            .map(|iv| {
                Ok(OracleInterval {
                    lo: bound(&iv.lo)?,
                    hi: bound(&iv.hi)?,
                })
            })
            .collect()
    }
}

/// Structure only: no numeric values or precision, so it is stable under
/// precision changes.
pub fn symbolic(res: &ClosureResult) -> String {
    let mut out = String::new();
    let last = res.final_level();
    writeln!(out, "r = {}", res.r).unwrap();
    writeln!(out, "j' = {}", res.j_prime).unwrap();
    writeln!(out, "j0 = {}", res.j0).unwrap();
    writeln!(out, "ell = {}", last.len()).unwrap();
    for (iv, d) in last.intervals.iter().zip(&last.densities) {
        writeln!(out, "{iv} {d}").unwrap();
    }
    out
}

pub fn text(report: &Report) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "r = {}  (j' = {}, j0 = {}, {} bits)",
        report.r, report.j_prime, report.j0, report.precision_bits
    )
    .unwrap();
    writeln!(
        out,
        "zeta(r) in [{}, {}]",
        report.zeta.value_lo, report.zeta.value_hi
    )
    .unwrap();
    writeln!(out, "{} interval(s):", report.ell).unwrap();
    let show = |e: &EndpointReport| match &e.closed_form {
        Some(c) if *c != e.expr => format!("{} = {}", e.expr, c),
        _ => e.expr.clone(),
    };
    for (k, iv) in report.intervals.iter().enumerate() {
        writeln!(
            out,
            "  I{} = [{}, {}]\n       ~ [{}, {}]  density {}/{}",
            k + 1,
            show(&iv.lo),
            show(&iv.hi),
            short(&iv.lo.value_lo),
            short(&iv.hi.value_hi),
            iv.density.num,
            iv.density.den
        )
        .unwrap();
    }
    out
}

fn short(decimal: &str) -> String {
    Float::parse(decimal)
        .map(|f| format!("{:.12}", Float::with_val(64, f).to_f64()))
        .unwrap_or_else(|_| decimal.to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::closure;

    #[test]
    fn report_round_trip_at_two() {
        let res = closure(&"2".parse().unwrap(), PrecisionPolicy::default()).unwrap();
        let rep = Report::new(&res).unwrap();
        let back = Report::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        back.check().unwrap();
        let forms: Vec<_> = rep
            .intervals
            .iter()
            .flat_map(|iv| {
                [
                    iv.lo.closed_form.clone().unwrap(),
                    iv.hi.closed_form.clone().unwrap(),
                ]
            })
            .collect();
        assert_eq!(
            forms,
            ["1", "2/3*zeta(2)", "10/9", "3/4*zeta(2)", "5/4", "zeta(2)"]
        );
        let z = rep.zeta.to_enclosure().unwrap();
        // pi^2/6
        let lo: Rational = parse_rational("1.6449340668482264364724151666460251892189").unwrap();
        let hi: Rational = parse_rational("1.6449340668482264364724151666460251892190").unwrap();
        assert!(z.lo() <= &hi && z.hi() >= &lo);
    }

    #[test]
    fn tampered_report_fails_check() {
        let res = closure(&"2".parse().unwrap(), PrecisionPolicy::default()).unwrap();
        let mut rep = Report::new(&res).unwrap();
        rep.intervals[0].density.num = "2".into();
        assert!(rep.check().is_err());
        let mut rep = Report::new(&res).unwrap();
        rep.intervals[1].lo.value_lo = "1.05".into();
        rep.intervals[1].lo.value_hi = "1.06".into();
        assert!(rep.check().is_err());
    }

    #[test]
    fn symbolic_report_at_two() {
        let res = closure(&"2".parse().unwrap(), PrecisionPolicy::default()).unwrap();
        assert_eq!(
            symbolic(&res),
            "r = 2\nj' = 5\nj0 = 2\nell = 3\n\
             [1, T_2] 1/3\n\
             [sigma(3^1), sigma(3^inf)*T_2] 1/6\n\
             [sigma(2^1), sigma(2^inf)*sigma(3^inf)*T_2] 1/2\n"
        );
    }
}
