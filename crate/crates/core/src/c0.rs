//! Greedy construction of an asymptotically isometric copy of `c_0`.
//!
//! From a rapidly increasing sequence the builder picks spike indices
//! `k_1 = 1 < k_2 < ...` and sets `f_n = (1 - 2^{-n}) p_{k_n} / ||p_{k_n}||`.
//! The intervals `I_n = {f_n > 2^{-2n}}` march towards `x = 1`, and every
//! earlier `f_j` is already below `2^{-2n}` on `I_n`. Those conditions give
//! `1/4 sup|t_n| <= ||sum t_n f_n|| <= sup|t_n|`.
//!
//! Conditions checked by [`verify_conditions`], for every `n`:
//!
//! * (i)   `f_n >= 0` on `[0, 1]`
//! * (ii)  `||f_n|| = 1 - 2^{-n}`
//! * (iii) `b_n < a_{n+1}`
//! * (iv)  `f_n(x) > 2^{-2n}` exactly when `x` is in `I_n = (a_n, b_n)`
//! * (v)   `f_n < 2^{-2m}` on `I_m` for every `m > n`

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::exponents::ExponentSequence;
use crate::point::PointT;
use crate::poly::{sup_norm, MuntzPolynomial};
use crate::spikes::SpikeFunction;

pub const C0_SCHEMA: &str = "c0-cert/1";

/// Grid density of the check `build` runs before emitting a certificate.
pub const BUILD_CHECK_GRID: usize = 2000;

/// Tolerance on `||f_n|| = 1 - 2^{-n}` in the inequality report.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Lower and upper constants of the `c_0` estimate.
pub const LOWER_CONSTANT: f64 = 0.25;
pub const UPPER_CONSTANT: f64 = 1.0;

/// Relative gap in `t` required between consecutive intervals.
const SEPARATION_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    /// Left end (smaller `x`, larger `t`).
    pub a: PointT,
    pub b: PointT,
}

impl Interval {
    /// Membership in the open interval `(a, b)`, decided in `t`.
    pub fn contains_t(&self, t: f64) -> bool {
        t < self.a.t() && t > self.b.t()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Pick {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub spike_norm: f64,
    /// `1 - 2^{-n}`.
    pub scale: f64,
    /// `2^{-2n}`; `I_n` is the set where `f_n` exceeds it.
    pub level: f64,
    pub interval: Interval,
    /// Maximiser of the spike, where `f_n = 1 - 2^{-n}`.
    pub peak: PointT,
    pub function: MuntzPolynomial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C0Certificate {
    pub schema: String,
    pub exponents: ExponentSequence,
    pub tol: f64,
    pub picks: Vec<C0Pick>,
    pub evidence: ConditionsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub n: usize,
    pub margin: f64,
    pub holds: bool,
    pub worst: Option<PointT>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionsReport {
    pub verified: bool,
    pub grid_points: usize,
    pub tol: f64,
    pub checks: Vec<ConditionCheck>,
}

impl ConditionsReport {
    pub fn failures(&self) -> impl Iterator<Item = &ConditionCheck> {
        self.checks.iter().filter(|c| !c.holds)
    }

    /// Smallest margin among checks of the given condition label.
    pub fn min_margin(&self, condition: &str) -> Option<f64> {
        self.checks.iter().filter(|c| c.condition == condition).map(|c| c.margin).reduce(f64::min)
    }
}

fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

fn make_pick(seq: &ExponentSequence, n: usize, k: usize) -> Result<C0Pick> {
    let spike = SpikeFunction::consecutive(seq, k)?;
    let profile = spike.profile()?;
    let scale = 1.0 - pow2(-(n as i32));
    let level = pow2(-2 * n as i32);
    let (a, b) = spike.superlevel_interval(level / scale * profile.norm)?;
    let function = spike.to_poly().scaled(scale / profile.norm)?;
    Ok(C0Pick {
        n,
        k,
        alpha: spike.alpha(),
        beta: spike.beta(),
        spike_norm: profile.norm,
        scale,
        level,
        interval: Interval { a, b },
        peak: profile.argmax,
        function,
    })
}

/// Runs the greedy construction for `count` functions and checks the result
/// on a grid of [`BUILD_CHECK_GRID`] points per region.
pub fn build(seq: &ExponentSequence, count: usize, tol: f64) -> Result<C0Certificate> {
    build_with_grid(seq, count, tol, BUILD_CHECK_GRID)
}

pub fn build_with_grid(seq: &ExponentSequence, count: usize, tol: f64, check_grid: usize) -> Result<C0Certificate> {
    if count == 0 {
        return Err(MuntzError::invalid("count must be at least 1"));
    }
    if !(tol > 0.0) {
        return Err(MuntzError::invalid(format!("tolerance must be positive, got {tol}")));
    }
    if !seq.is_rip()? {
        return Err(MuntzError::invalid("sequence lacks the rapid increase property"));
    }
    if seq.origin_offset() != 0 {
        return Err(MuntzError::invalid("all exponents must be positive; drop lambda_0 = 0 first"));
    }

    let insufficient = |achieved: usize| MuntzError::InsufficientSequence { requested: count, achieved };
    let mut picks: Vec<C0Pick> = Vec::with_capacity(count);
    for n in 1..=count {
        let pick = match picks.last() {
            None => make_pick(seq, 1, 1).map_err(|e| match e {
                MuntzError::InsufficientSequence { .. } => insufficient(0),
                other => other,
            })?,
            Some(prev) => {
                let t_prev = prev.interval.b.t();
                let mut k = prev.k + 1;
                loop {
                    if k + 1 >= seq.len() {
                        return Err(insufficient(n - 1));
                    }
                    let cand = make_pick(seq, n, k)?;
                    let separated = t_prev - cand.interval.a.t() > SEPARATION_GUARD * t_prev;
                    if separated && picks.iter().all(|f| f.function.eval(cand.interval.a) < cand.level) {
                        break cand;
                    }
                    k += 1;
                }
            }
        };
        picks.push(pick);
    }

    let mut cert = C0Certificate {
        schema: C0_SCHEMA.to_string(),
        exponents: seq.clone(),
        tol,
        picks,
        evidence: ConditionsReport { verified: false, grid_points: 0, tol, checks: Vec::new() },
    };
    let report = verify_conditions(&cert, check_grid)?;
    if let Some(bad) = report.failures().next() {
        return Err(MuntzError::ConstructionFailure {
            n: bad.n,
            condition: bad.condition.clone(),
            t: bad.worst.map_or(f64::NAN, |p| p.t()),
        });
    }
    cert.evidence = report;
    Ok(cert)
}

fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    // open interval: endpoints excluded
    (1..=n).map(|i| lo + (hi - lo) * i as f64 / (n + 1) as f64).collect()
}

fn closed_geometric(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(lo > 0.0) || !(hi > lo) {
        return Vec::new();
    }
    let n = n.max(2);
    let r = (hi / lo).ln() / (n - 1) as f64;
    let mut v: Vec<f64> = (0..n).map(|i| lo * (r * i as f64).exp()).collect();
    v[n - 1] = hi;
    v
}

struct Samples {
    /// `inside[m]`: points of the claimed `I_{m+1}`.
    inside: Vec<Vec<f64>>,
    /// Points between and around the intervals, endpoints included.
    gaps: Vec<f64>,
}

fn sample_points(cert: &C0Certificate, grid: usize) -> Samples {
    let picks = &cert.picks;
    let inside = picks.iter().map(|p| linear_grid(p.interval.b.t(), p.interval.a.t(), grid)).collect();
    let lambda_min = picks.iter().map(|p| p.alpha).fold(f64::INFINITY, f64::min);
    let t_far = 746.0 / lambda_min;

    let mut gaps = Vec::new();
    // left of I_1 (towards x = 0)
    if let Some(first) = picks.first() {
        gaps.extend(closed_geometric(first.interval.a.t(), t_far.max(first.interval.a.t() * 2.0), grid));
        gaps.push(f64::INFINITY);
    }
    for w in picks.windows(2) {
        gaps.extend(closed_geometric(w[1].interval.a.t(), w[0].interval.b.t(), grid));
    }
    // right of I_N (towards x = 1)
    if let Some(last) = picks.last() {
        let tb = last.interval.b.t();
        gaps.push(0.0);
        gaps.extend(closed_geometric(tb * 1e-12, tb, grid));
    }
    Samples { inside, gaps }
}

fn worst(points: impl Iterator<Item = (f64, f64)>) -> (f64, Option<PointT>) {
    points.fold(
        (f64::INFINITY, None),
        |acc, (t, m)| {
            if m < acc.0 {
                (m, Some(PointT::from_t_unchecked(t)))
            } else {
                acc
            }
        },
    )
}

/// Re-checks conditions (i)-(v) on `grid_points` samples per interval and per
/// gap, plus the two bounds the upper estimate relies on: `sum_n f_n <= 1/3`
/// off the intervals and `sum_{n > n'} f_n <= 2^{-2n'}` on `I_{n'}`.
///
/// Margins are oriented so that `margin >= 0` means the condition holds;
/// (i), (ii), (iv) and the two sums carry `tol` of slack, (iii) and (v) are
/// strict.
pub fn verify_conditions(cert: &C0Certificate, grid_points: usize) -> Result<ConditionsReport> {
    if cert.picks.is_empty() {
        return Err(MuntzError::invalid("certificate has no functions"));
    }
    if grid_points == 0 {
        return Err(MuntzError::invalid("grid must have at least one point"));
    }
    let tol = cert.tol;
    let samples = sample_points(cert, grid_points);
    let picks = &cert.picks;
    let count = picks.len();

    let per_n: Vec<Result<Vec<ConditionCheck>>> = picks
        .par_iter()
        .enumerate()
        .map(|(idx, pick)| {
            let n = pick.n;
            let f = |t: f64| pick.function.eval(PointT::from_t_unchecked(t));
            let mut checks = Vec::new();
            let mut push = |condition: &str, margin: f64, holds: bool, worst: Option<PointT>| {
                checks.push(ConditionCheck { condition: condition.to_string(), n, margin, holds, worst });
            };

            let all = samples.inside.iter().flatten().chain(&samples.gaps).copied();
            let (m, w) = worst(all.map(|t| (t, f(t) + tol)));
            push("i", m, m >= 0.0, w);

            let norm = sup_norm(&pick.function, tol)?;
            let m = tol - (norm.value - pick.scale).abs();
            push("ii", m, m >= 0.0, norm.argmax.first().copied());

            if let Some(next) = picks.get(idx + 1) {
                let m = pick.interval.b.t() - next.interval.a.t();
                push("iii", m, m > 0.0, Some(pick.interval.b));
            }

            let (m, w) = worst(samples.inside[idx].iter().map(|&t| (t, f(t) - pick.level + tol)));
            push("iv-inside", m, m >= 0.0, w);
            let outside = samples
                .gaps
                .iter()
                .chain(samples.inside.iter().enumerate().filter(|(j, _)| *j != idx).flat_map(|(_, v)| v))
                .copied()
                .filter(|&t| !pick.interval.contains_t(t));
            let (m, w) = worst(outside.map(|t| (t, pick.level - f(t) + tol)));
            push("iv-outside", m, m >= 0.0, w);

            if idx + 1 < count {
                let (m, w) = worst(
                    picks[idx + 1..]
                        .iter()
                        .zip(&samples.inside[idx + 1..])
                        .flat_map(|(later, pts)| pts.iter().map(move |&t| (t, later.level)))
                        .map(|(t, bound)| (t, bound - f(t))),
                );
                push("v", m, m > 0.0, w);
            }

            // tail sum on I_n, bounded by the level
            if idx + 1 < count {
                let (m, w) = worst(samples.inside[idx].iter().map(|&t| {
                    let tail: f64 = picks[idx + 1..].iter().map(|p| p.function.eval(PointT::from_t_unchecked(t))).sum();
                    (t, pick.level - tail + tol)
                }));
                push("tail-sum", m, m >= 0.0, w);
            }
            Ok(checks)
        })
        .collect();

    let mut checks = Vec::new();
    for c in per_n {
        checks.extend(c?);
    }

    let in_any = |t: f64| picks.iter().any(|p| p.interval.contains_t(t));
    let (m, w) = worst(samples.gaps.iter().copied().filter(|&t| !in_any(t)).map(|t| {
        let s: f64 = picks.iter().map(|p| p.function.eval(PointT::from_t_unchecked(t))).sum();
        (t, 1.0 / 3.0 - s + tol)
    }));
    checks.push(ConditionCheck { condition: "off-interval-sum".into(), n: 0, margin: m, holds: m >= 0.0, worst: w });

    let verified = checks.iter().all(|c| c.holds);
    Ok(ConditionsReport { verified, grid_points, tol, checks })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityFailure {
    pub label: String,
    pub coefficients: Vec<f64>,
    pub norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub verified: bool,
    pub seed: u64,
    pub trials: usize,
    pub vectors_checked: usize,
    pub min_norm: f64,
    pub max_norm: f64,
    /// Smallest `|sum t_n f_n(x_N)|` at the peak of the largest coefficient.
    pub min_peak_value: f64,
    /// Largest `| ||f_n|| - (1 - 2^{-n}) |`.
    pub max_norm_deviation: f64,
    pub failures: Vec<InequalityFailure>,
}

/// Coefficients of trial `i`: uniform in `[-1, 1]`, rescaled to sup 1.
/// Trial `i` always reads stream `i` of the seeded generator.
pub fn trial_coefficients(seed: u64, trial: usize, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    let mut v: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if top == 0.0 {
        v[0] = 1.0;
    } else {
        v.iter_mut().for_each(|x| *x /= top);
    }
    v
}

/// Checks `1/4 sup|t_n| <= ||sum t_n f_n|| <= sup|t_n|` on the canonical basis,
/// the all-ones and alternating vectors, and `trials` seeded random vectors.
pub fn verify_c0_inequalities(cert: &C0Certificate, trials: usize, seed: u64) -> Result<InequalityReport> {
    let picks = &cert.picks;
    let len = picks.len();
    if len == 0 {
        return Err(MuntzError::invalid("certificate has no functions"));
    }
    let mut vectors: Vec<(String, Vec<f64>)> = (0..len)
        .map(|i| {
            let mut e = vec![0.0; len];
            e[i] = 1.0;
            (format!("e_{}", i + 1), e)
        })
        .collect();
    vectors.push(("ones".into(), vec![1.0; len]));
    vectors.push(("alternating".into(), (0..len).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()));
    vectors.extend((0..trials).map(|i| (format!("trial_{i}"), trial_coefficients(seed, i, len))));

    let tol = cert.tol;
    let results: Vec<Result<(f64, f64)>> = vectors
        .par_iter()
        .map(|(_, coeffs)| {
            let g = MuntzPolynomial::linear_combination(coeffs.iter().copied().zip(picks.iter().map(|p| &p.function)))?;
            let norm = sup_norm(&g, tol)?.value;
            let top =
                coeffs.iter().enumerate().fold(0, |best, (i, c)| if c.abs() > coeffs[best].abs() { i } else { best });
            let peak = g.eval(picks[top].peak).abs();
            Ok((norm, peak))
        })
        .collect();

    let mut min_norm = f64::INFINITY;
    let mut max_norm = f64::NEG_INFINITY;
    let mut min_peak_value = f64::INFINITY;
    let mut failures = Vec::new();
    for ((label, coeffs), r) in vectors.iter().zip(results) {
        let (norm, peak) = r?;
        min_norm = min_norm.min(norm);
        max_norm = max_norm.max(norm);
        min_peak_value = min_peak_value.min(peak);
        let ok = norm >= LOWER_CONSTANT - tol && norm <= UPPER_CONSTANT + tol && peak >= LOWER_CONSTANT - tol;
        if !ok {
            failures.push(InequalityFailure { label: label.clone(), coefficients: coeffs.clone(), norm });
        }
    }

    let mut max_norm_deviation = 0.0f64;
    for p in picks {
        let norm = sup_norm(&p.function, tol)?.value;
        let dev = (norm - (1.0 - pow2(-(p.n as i32)))).abs();
        max_norm_deviation = max_norm_deviation.max(dev);
        if dev > NORM_TOLERANCE {
            let mut e = vec![0.0; len];
            e[p.n - 1] = 1.0;
            failures.push(InequalityFailure { label: format!("norm_f_{}", p.n), coefficients: e, norm });
        }
    }

    Ok(InequalityReport {
        verified: failures.is_empty(),
        seed,
        trials,
        vectors_checked: vectors.len(),
        min_norm,
        max_norm,
        min_peak_value,
        max_norm_deviation,
        failures,
    })
}
