#![allow(clippy::excessive_precision)]

use std::time::Instant;

use muntz_core::c0::{build, verify_c0_inequalities, verify_conditions};
use muntz_core::ExponentSequence;

fn doubling() -> ExponentSequence {
    "geometric:2".parse::<muntz_core::SequenceSpec>().unwrap().build().unwrap()
}

#[test]
fn eight_functions_on_powers_of_two() {
    let start = Instant::now();
    let cert = build(&doubling(), 8, 1e-10).unwrap();
    let ks: Vec<usize> = cert.picks.iter().map(|p| p.k).collect();
    // independent greedy scan (mpmath, 50 digits) with closed-form ratio-2
    // intervals t = -ln((1 -/+ sqrt(1 - L)) / 2) / lambda
    assert_eq!(ks, vec![1, 8, 19, 32, 47, 65, 85, 107]);
    let expected_ta = [
        0.015037831020001937,
        1.0313323156880283e-5,
        1.5985895847932234e-9,
        5.8873903845964636e-14,
        2.6260054680714849e-19,
        2.8647581577159685e-25,
        7.6869142799195631e-32,
    ];
    for (p, ta) in cert.picks[1..].iter().zip(expected_ta) {
        assert!((p.interval.a.t() / ta - 1.0).abs() < 1e-12, "n={} {} vs {}", p.n, p.interval.a.t(), ta);
    }
    let built = start.elapsed();

    let report = verify_conditions(&cert, 100_000).unwrap();
    for c in &report.checks {
        println!("{:>16} n={} margin={:e} holds={}", c.condition, c.n, c.margin, c.holds);
    }
    assert!(report.verified);
    let checked = start.elapsed();

    let ineq = verify_c0_inequalities(&cert, 1000, 42).unwrap();
    println!("{:?}", (ineq.min_norm, ineq.max_norm, ineq.min_peak_value, ineq.max_norm_deviation));
    assert!(ineq.verified, "{:?}", ineq.failures);
    println!("build {:?} conditions {:?} total {:?}", built, checked, start.elapsed());
}
