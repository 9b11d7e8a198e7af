//! Floating-point kernels shared by the polynomial and spike code.

#[derive(Debug, Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    carry: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let s = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - s) + v;
        } else {
            self.carry += (v - s) + self.sum;
        }
        self.sum = s;
    }

    fn total(self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated (Neumaier) summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = Neumaier::default();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Value of `sum_i w_i e^{-lambda_i t}` together with a rounding-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub error: f64,
}

impl Evaluated {
    /// Sign of the value when it clears the error estimate.
    pub fn sign(self) -> Option<bool> {
        if self.value.abs() > self.error {
            Some(self.value > 0.0)
        } else {
            None
        }
    }
}

const ERROR_FACTOR: f64 = 8.0 * f64::EPSILON;

/// An exponential sum `sum_i w_i e^{-lambda_i t}` with its anchor `sum_i w_i`
/// precomputed, so that values near `t = 0` can be formed as
/// `anchor + sum_i w_i expm1(-lambda_i t)` without cancellation.
#[derive(Debug, Clone)]
pub struct ExpSum {
    lambdas: Vec<f64>,
    weights: Vec<f64>,
    anchor: f64,
    constant: f64,
}

impl ExpSum {
    pub fn new(lambdas: Vec<f64>, weights: Vec<f64>) -> Self {
        debug_assert_eq!(lambdas.len(), weights.len());
        let anchor = compensated_sum(weights.iter().copied());
        let constant = compensated_sum(lambdas.iter().zip(&weights).filter(|(l, _)| **l == 0.0).map(|(_, w)| *w));
        ExpSum { lambdas, weights, anchor, constant }
    }

    /// Value at `t = 0`.
    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    /// Value at `t = +inf`.
    pub fn limit(&self) -> f64 {
        self.constant
    }

    pub fn eval(&self, t: f64) -> Evaluated {
        if t == 0.0 {
            let bound: f64 = self.weights.iter().map(|w| w.abs()).sum();
            return Evaluated { value: self.anchor, error: ERROR_FACTOR * bound };
        }
        if t == f64::INFINITY {
            return Evaluated { value: self.constant, error: ERROR_FACTOR * self.constant.abs() };
        }
        let mut direct = Neumaier::default();
        let mut shifted = Neumaier::default();
        let mut direct_bound = 0.0;
        let mut shifted_bound = self.anchor.abs();
        for (&lambda, &w) in self.lambdas.iter().zip(&self.weights) {
            let z = -lambda * t;
            let de = w * z.exp();
            let dm = w * z.exp_m1();
            direct.add(de);
            shifted.add(dm);
            direct_bound += de.abs();
            shifted_bound += dm.abs();
        }
        if shifted_bound < direct_bound {
            let value = self.anchor + shifted.total();
            Evaluated { value, error: ERROR_FACTOR * shifted_bound }
        } else {
            Evaluated { value: direct.total(), error: ERROR_FACTOR * direct_bound }
        }
    }

    /// The `t`-derivative, itself an exponential sum.
    pub fn derivative(&self) -> ExpSum {
        let weights = self.lambdas.iter().zip(&self.weights).map(|(l, w)| -l * w).collect();
        ExpSum::new(self.lambdas.clone(), weights)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Bisects `[lo, hi]` where `left(lo)` holds and `left(hi)` does not, down to
/// adjacent doubles. Returns the final bracket.
pub fn bisect(mut lo: f64, mut hi: f64, mut left: impl FnMut(f64) -> bool) -> (f64, f64) {
    for _ in 0..2200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        if left(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn dd_mul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let (p, e) = two_prod(a.0, b.0);
    let e = e + (a.0 * b.1 + a.1 * b.0);
    let s = p + e;
    (s, e - (s - p))
}

/// `scale * base^k` evaluated in double-double arithmetic and rounded once.
pub fn scaled_power(scale: f64, base: f64, k: u32) -> f64 {
    let mut acc = (1.0, 0.0);
    let mut sq = (base, 0.0);
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            acc = dd_mul(acc, sq);
        }
        sq = dd_mul(sq, sq);
        e >>= 1;
    }
    let r = dd_mul(acc, (scale, 0.0));
    r.0 + r.1
}
