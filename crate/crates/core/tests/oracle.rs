use rug::Rational;

use sigma_closure::closure::closure;
use sigma_closure::oracle::{eta_function, eta_solve, intervals_from_closure, verify};
use sigma_closure::realnum::{parse_rational, PrecisionPolicy};

#[test]
fn empirical_densities_converge_at_two() {
    let res = closure(&"2".parse().unwrap(), PrecisionPolicy::default()).unwrap();
    let ivs = intervals_from_closure(&res);
    let exact = [1.0 / 3.0, 1.0 / 6.0, 0.5];
    let err = |n: u64| {
        let rep = verify(&res.evaluator, n, &ivs).unwrap();
        assert_eq!(rep.unclassified, 0);
        assert!(rep.gap_violations.is_empty());
        rep.densities
            .iter()
            .zip(exact)
            .map(|(d, e)| (d - e).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(10_000), err(1_000_000));
    assert!(fine < coarse, "{fine} !< {coarse}");
    assert!(fine < 1e-5);
}

#[test]
fn non_integer_exponents_have_few_unclassified() {
    for s in ["1.95", "3.5", "4"] {
        let res = closure(&s.parse().unwrap(), PrecisionPolicy::default()).unwrap();
        let rep = verify(&res.evaluator, 200_000, &intervals_from_closure(&res)).unwrap();
        assert!(
            rep.gap_violations.is_empty(),
            "r = {s}: {:?}",
            &rep.gap_violations[..5.min(rep.gap_violations.len())]
        );
        assert_eq!(rep.classified() + rep.unclassified, rep.limit);
        assert!(rep.unclassified * 1000 < rep.limit, "r = {s}");
    }
}

#[test]
fn eta_brackets_nest_and_have_certified_signs() {
    let coarse = eta_solve(&parse_rational("0.1").unwrap()).unwrap();
    let fine = eta_solve(&parse_rational("0.000001").unwrap()).unwrap();
    assert!(coarse.0 <= fine.0 && fine.1 <= coarse.1);
    let eta = parse_rational("1.8877909").unwrap();
    assert!(coarse.0 <= eta && eta <= coarse.1);
    let g_lo = eta_function(&fine.0, 128).unwrap();
    let g_hi = eta_function(&fine.1, 128).unwrap();
    assert!(!g_lo.contains_zero() && !g_lo.is_positive());
    assert!(g_hi.is_positive());
    assert!(eta_solve(&Rational::new()).is_err());
}
