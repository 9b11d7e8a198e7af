//! The max-norm engine.
//!
//! In `t = -ln x` a Muntz polynomial is the exponential sum
//! `sum_i c_i e^{-lambda_i t}`; its derivative has at most `n - 1` positive
//! zeros when `n` terms are non-constant. Interior extrema are located by a
//! sign-change scan of the derivative on a geometric `t`-grid followed by
//! bisection, then compared with the endpoint values at `t = 0` and `t = inf`.

use serde::Serialize;

use super::MuntzPolynomial;
use crate::error::{MuntzError, Result};
use crate::numeric::{bisect, ExpSum};
use crate::point::PointT;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_SCAN_POINTS: usize = 4096;

/// `e^{-746}` underflows to zero in `f64`.
const UNDERFLOW_EXPONENT: f64 = 746.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupNormOptions {
    /// Relative tolerance.
    pub tol: f64,
    pub scan_points: usize,
}

impl Default for SupNormOptions {
    fn default() -> Self {
        SupNormOptions { tol: DEFAULT_TOL, scan_points: DEFAULT_SCAN_POINTS }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupNorm {
    pub value: f64,
    /// Located maximisers of `|p|`, ordered by increasing `x`.
    pub argmax: Vec<PointT>,
    /// Set when rounding error at the maximiser exceeds `tol * value`.
    pub degraded_precision: bool,
}

pub fn sup_norm(p: &MuntzPolynomial, tol: f64) -> Result<SupNorm> {
    sup_norm_with(p, &SupNormOptions { tol, ..SupNormOptions::default() })
}

struct ScanRange {
    lo: f64,
    hi: f64,
    /// Number of non-constant terms.
    active: usize,
}

fn scan_range(sum: &ExpSum, tol: f64) -> Option<ScanRange> {
    let active: Vec<(f64, f64)> =
        sum.lambdas().iter().zip(sum.weights()).filter(|(l, _)| **l > 0.0).map(|(l, w)| (*l, w.abs())).collect();
    if active.is_empty() {
        return None;
    }
    let scale = active.iter().map(|(_, c)| *c).fold(0.0, f64::max);
    let lambda_max = active.iter().map(|(l, _)| *l).fold(0.0, f64::max);
    let hi = active.iter().map(|(l, c)| (c / (tol * scale)).ln().max(1.0) / l).fold(0.0, f64::max);
    let lo = tol.min(std::f64::consts::LN_2 / lambda_max) / 8.0;
    Some(ScanRange { lo: lo.min(hi / 2.0), hi, active: active.len() })
}

fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    let ratio = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// Interior zeros of `deriv` in the grid span, polished to adjacent doubles.
fn sign_change_roots(deriv: &ExpSum, grid: &[f64], bound: usize) -> Result<Vec<f64>> {
    let mut roots = Vec::new();
    let mut last: Option<(f64, bool)> = None;
    let mut changes = 0;
    for &t in grid {
        let Some(s) = deriv.eval(t).sign() else { continue };
        if let Some((t_prev, s_prev)) = last {
            if s != s_prev {
                changes += 1;
                let (lo, hi) = bisect(t_prev, t, |m| deriv.eval(m).sign() == Some(s_prev));
                roots.push(0.5 * (lo + hi));
            }
        }
        last = Some((t, s));
    }
    if changes > bound {
        return Err(MuntzError::NumericalInconsistency { sign_changes: changes, bound });
    }
    Ok(roots)
}

/// Golden-section maximisation of `|p|` over `[a, b]`.
fn golden_max(sum: &ExpSum, mut a: f64, mut b: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let f = |t: f64| sum.eval(t).value.abs();
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a) <= 4.0 * f64::EPSILON * b {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn sup_norm_with(p: &MuntzPolynomial, opts: &SupNormOptions) -> Result<SupNorm> {
    if !(opts.tol > 0.0) {
        return Err(MuntzError::invalid(format!("tolerance must be positive, got {}", opts.tol)));
    }
    let sum = p.exp_sum();
    let Some(range) = scan_range(sum, opts.tol) else {
        // constant (possibly zero) function
        return Ok(SupNorm { value: sum.anchor().abs(), argmax: vec![PointT::ONE], degraded_precision: false });
    };

    let deriv = sum.derivative();
    let mut grid = vec![0.0];
    grid.extend(geometric_grid(range.lo, range.hi, opts.scan_points));

    let mut candidates: Vec<f64> = sign_change_roots(&deriv, &grid, range.active - 1)?;
    candidates.push(0.0);
    candidates.push(f64::INFINITY);

    // guards against a max/min pair hiding inside one grid cell
    let (best_i, _) = grid
        .iter()
        .enumerate()
        .map(|(i, &t)| (i, sum.eval(t).value.abs()))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    if best_i > 0 {
        let a = grid[best_i - 1];
        let b = grid[(best_i + 1).min(grid.len() - 1)];
        candidates.push(golden_max(sum, a, b));
    }

    let scored: Vec<(f64, f64)> = candidates.iter().map(|&t| (t, sum.eval(t).value.abs())).collect();
    let value = scored.iter().map(|(_, v)| *v).fold(0.0, f64::max);

    let mut argmax: Vec<f64> = scored.iter().filter(|(_, v)| *v >= value * (1.0 - opts.tol)).map(|(t, _)| *t).collect();
    argmax.sort_by(|a, b| b.total_cmp(a));
    argmax.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * a.abs().max(b.abs()));

    let err = argmax.iter().map(|&t| sum.eval(t).error).fold(0.0, f64::max);
    Ok(SupNorm {
        value,
        argmax: argmax.into_iter().map(PointT::from_t_unchecked).collect(),
        degraded_precision: err > opts.tol * value,
    })
}

/// All solutions of `p = level` between the two bracket points, ordered by
/// increasing `x`.
///
/// The bracket is split at the critical points of `p`; each piece is monotone
/// and holds at most one crossing, found by bisection.
pub fn level_crossings(p: &MuntzPolynomial, level: f64, bracket: (PointT, PointT)) -> Result<Vec<PointT>> {
    if !level.is_finite() {
        return Err(MuntzError::invalid(format!("level must be finite, got {level}")));
    }
    let sum = p.exp_sum();
    let (t_lo, t_hi) = {
        let (a, b) = (bracket.0.t(), bracket.1.t());
        (a.min(b), a.max(b))
    };
    let Some(range) = scan_range(sum, DEFAULT_TOL) else {
        return Ok(Vec::new());
    };
    let lambda_min = sum.lambdas().iter().copied().filter(|l| *l > 0.0).fold(f64::INFINITY, f64::min);
    let t_far = t_hi.min(UNDERFLOW_EXPONENT / lambda_min);
    if t_far <= t_lo {
        return Ok(Vec::new());
    }

    let grid_lo = if t_lo > 0.0 { t_lo } else { range.lo.min(t_far / 2.0) };
    let mut grid = Vec::new();
    if t_lo == 0.0 {
        grid.push(0.0);
    }
    grid.extend(geometric_grid(grid_lo, t_far, DEFAULT_SCAN_POINTS));

    let deriv = sum.derivative();
    let mut breaks = vec![t_lo];
    breaks.extend(sign_change_roots(&deriv, &grid, range.active - 1)?);
    breaks.push(t_far);

    let g = |t: f64| sum.eval(t).value - level;
    let mut roots: Vec<f64> = Vec::new();
    for w in breaks.windows(2) {
        let (u, v) = (w[0], w[1]);
        let (gu, gv) = (g(u), g(v));
        if gu.is_nan() || gv.is_nan() {
            return Err(MuntzError::Tolerance { lo: u, hi: v });
        }
        if gu == 0.0 {
            roots.push(u);
        }
        if gv == 0.0 {
            roots.push(v);
        }
        if gu != 0.0 && gv != 0.0 && (gu > 0.0) != (gv > 0.0) {
            let up = gu > 0.0;
            let (lo, hi) = bisect(u, v, |m| (g(m) > 0.0) == up);
            roots.push(if g(lo).abs() <= g(hi).abs() { lo } else { hi });
        }
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots.dedup();
    Ok(roots.into_iter().map(PointT::from_t_unchecked).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(terms: &[(f64, f64)]) -> MuntzPolynomial {
        MuntzPolynomial::new(terms.iter().copied()).unwrap()
    }

    fn whole() -> (PointT, PointT) {
        (PointT::ZERO, PointT::ONE)
    }

    #[test]
    fn monomial_peaks_at_one() {
        let s = sup_norm(&poly(&[(1.0, 1.0)]), DEFAULT_TOL).unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(s.argmax, vec![PointT::ONE]);
    }

    #[test]
    fn quartic_spike() {
        let s = sup_norm(&poly(&[(2.0, 1.0), (4.0, -1.0)]), DEFAULT_TOL).unwrap();
        assert!((s.value - 0.25).abs() < 1e-15);
        assert_eq!(s.argmax.len(), 1);
        assert!((s.argmax[0].x() - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn cubic_spike() {
        // max of x - x^3 at x = 3^{-1/2}: 2 / (3 sqrt 3)
        let s = sup_norm(&poly(&[(1.0, 1.0), (3.0, -1.0)]), DEFAULT_TOL).unwrap();
        let expected = 2.0 / (3.0 * 3f64.sqrt());
        assert!((s.value - expected).abs() < 1e-15);
        assert!((s.argmax[0].x() - 1.0 / 3f64.sqrt()).abs() < 1e-8);
        assert!((expected - 0.3849002).abs() < 1e-7);
    }

    #[test]
    fn constant_and_zero() {
        assert_eq!(sup_norm(&poly(&[(0.0, -2.5)]), 1e-10).unwrap().value, 2.5);
        assert_eq!(sup_norm(&MuntzPolynomial::zero(), 1e-10).unwrap().value, 0.0);
    }

    #[test]
    fn maximum_at_zero_end() {
        // 1 - x^3 is largest at x = 0
        let s = sup_norm(&poly(&[(0.0, 1.0), (3.0, -1.0)]), DEFAULT_TOL).unwrap();
        assert_eq!(s.value, 1.0);
        assert!(s.argmax.iter().any(|p| p.is_zero_x()));
    }

    #[test]
    fn negative_lobe_counts() {
        // -(x - x^3) has the same norm as x - x^3
        let s = sup_norm(&poly(&[(1.0, -1.0), (3.0, 1.0)]), DEFAULT_TOL).unwrap();
        assert!((s.value - 2.0 / (3.0 * 3f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_tol() {
        assert!(sup_norm(&poly(&[(1.0, 1.0)]), 0.0).is_err());
    }

    #[test]
    fn huge_exponent_spike() {
        let s = sup_norm(&poly(&[(1e12, 1.0), (2e12, -1.0)]), DEFAULT_TOL).unwrap();
        assert!((s.value - 0.25).abs() < 1e-14);
        let t = s.argmax[0].t();
        assert!((t * 1e12 - std::f64::consts::LN_2).abs() < 1e-7);
    }

    #[test]
    fn crossings_of_quartic_spike() {
        let p = poly(&[(2.0, 1.0), (4.0, -1.0)]);
        let r = level_crossings(&p, 0.125, whole()).unwrap();
        assert_eq!(r.len(), 2);
        let lo = ((1.0 - 0.5f64.sqrt()) / 2.0).sqrt();
        let hi = ((1.0 + 0.5f64.sqrt()) / 2.0).sqrt();
        assert!((r[0].x() - lo).abs() < 1e-12, "{}", r[0]);
        assert!((r[1].x() - hi).abs() < 1e-12, "{}", r[1]);
        assert!((lo - 0.3826834).abs() < 1e-7 && (hi - 0.9238795).abs() < 1e-7);

        assert!(level_crossings(&p, 0.5, whole()).unwrap().is_empty());
    }

    #[test]
    fn crossing_of_identity() {
        let r = level_crossings(&poly(&[(1.0, 1.0)]), 0.5, whole()).unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0].x() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn crossings_respect_bracket() {
        let p = poly(&[(2.0, 1.0), (4.0, -1.0)]);
        let right = (PointT::from_x(0.75).unwrap(), PointT::ONE);
        let r = level_crossings(&p, 0.125, right).unwrap();
        assert_eq!(r.len(), 1);
        assert!(r[0].x() > 0.9);
    }
}
