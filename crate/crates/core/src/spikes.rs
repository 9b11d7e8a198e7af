//! Spike functions `p(x) = x^alpha - x^beta`, `0 <= alpha < beta`.
//!
//! For `alpha > 0` a spike vanishes at both ends of `[0, 1]`, rises strictly
//! up to a unique maximiser and falls strictly after it. In `t = -ln x` the
//! maximiser is `ln(beta / alpha) / (beta - alpha)`.

use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::exponents::ExponentSequence;
use crate::functional::DiscreteFunctional;
use crate::numeric::bisect;
use crate::point::PointT;
use crate::poly::MuntzPolynomial;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpikeRepr")]
pub struct SpikeFunction {
    alpha: f64,
    beta: f64,
}

#[derive(Deserialize)]
struct SpikeRepr {
    alpha: f64,
    beta: f64,
}

impl TryFrom<SpikeRepr> for SpikeFunction {
    type Error = MuntzError;

    fn try_from(r: SpikeRepr) -> Result<Self> {
        SpikeFunction::new(r.alpha, r.beta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpikeProfile {
    pub alpha: f64,
    pub beta: f64,
    pub argmax: PointT,
    pub norm: f64,
    /// `(beta - alpha)^{-1/(beta - alpha)}`, a lower bound for `argmax.x`
    /// once `alpha > 3`.
    pub y_lower_bound: f64,
    pub y_bound_applies: bool,
    /// `beta >= 2 alpha`, which forces `norm >= 1/4`.
    pub quarter_bound_applies: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuarterCheck {
    pub holds: bool,
    /// The point where `x^alpha = 1/2`.
    pub witness: PointT,
    pub value: f64,
}

impl SpikeFunction {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() || alpha < 0.0 || beta <= alpha {
            return Err(MuntzError::invalid(format!("spike needs 0 <= alpha < beta, got ({alpha}, {beta})")));
        }
        Ok(SpikeFunction { alpha, beta })
    }

    /// The spike on consecutive exponents `(lambda_k, lambda_{k+1})`.
    pub fn consecutive(seq: &ExponentSequence, k: usize) -> Result<Self> {
        match (seq.get(k), seq.get(k + 1)) {
            (Some(a), Some(b)) => Self::new(a, b),
            _ => Err(MuntzError::InsufficientSequence { requested: k + 2, achieved: seq.len() }),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `e^{-alpha t} (-expm1(-(beta - alpha) t))`, free of cancellation near `t = 0`.
    pub fn eval_t(&self, t: f64) -> f64 {
        if t == f64::INFINITY {
            return if self.alpha == 0.0 { 1.0 } else { 0.0 };
        }
        (-self.alpha * t).exp() * -(-(self.beta - self.alpha) * t).exp_m1()
    }

    pub fn eval(&self, at: PointT) -> f64 {
        self.eval_t(at.t())
    }

    pub fn to_poly(&self) -> MuntzPolynomial {
        MuntzPolynomial::new([(self.alpha, 1.0), (self.beta, -1.0)]).expect("validated exponents")
    }

    /// `t` of the maximiser, `ln(beta/alpha) / (beta - alpha)`.
    fn argmax_t(&self) -> f64 {
        let gap = self.beta - self.alpha;
        (gap / self.alpha).ln_1p() / gap
    }

    pub fn profile(&self) -> Result<SpikeProfile> {
        if self.alpha == 0.0 {
            return Err(MuntzError::EdgeProfile { beta: self.beta });
        }
        let t_max = self.argmax_t();
        let gap = self.beta - self.alpha;
        Ok(SpikeProfile {
            alpha: self.alpha,
            beta: self.beta,
            argmax: PointT::from_t_unchecked(t_max),
            norm: self.eval_t(t_max),
            y_lower_bound: (-gap.ln() / gap).exp(),
            y_bound_applies: self.alpha > 3.0,
            quarter_bound_applies: self.beta >= 2.0 * self.alpha,
        })
    }

    /// `(a, b)` with `p(x) > level` exactly for `x` strictly between them.
    ///
    /// Each endpoint is the last double (in `t`) on the outside of the set,
    /// found by bisection on the side of the maximiser where `p` is monotone.
    pub fn superlevel_interval(&self, level: f64) -> Result<(PointT, PointT)> {
        if !(level > 0.0) || !level.is_finite() {
            return Err(MuntzError::invalid(format!("superlevel needs a positive level, got {level}")));
        }
        let profile = self.profile()?;
        if level >= profile.norm {
            return Err(MuntzError::EmptyInterval { level, norm: profile.norm });
        }
        let t_max = profile.argmax.t();
        let above = |t: f64| self.eval_t(t) > level;
        // p <= e^{-alpha t} <= level beyond this point
        let t_far = (1.0 / level).ln() / self.alpha;
        let (_, a_out) = bisect(t_max, t_far.max(t_max * 2.0), above);
        let (_, b_out) = bisect(t_max, 0.0, above);
        Ok((PointT::from_t_unchecked(a_out), PointT::from_t_unchecked(b_out)))
    }

    /// The argument behind `||p|| >= 1/4` when `beta >= 2 alpha`: at
    /// `x^alpha = 1/2`, `p >= 1/2 - 1/4`.
    pub fn quarter_lower_bound_check(&self) -> Result<QuarterCheck> {
        if !(self.alpha > 0.0 && self.beta >= 2.0 * self.alpha) {
            return Err(MuntzError::NotApplicable(format!(
                "quarter bound needs beta >= 2 alpha > 0, got ({}, {})",
                self.alpha, self.beta
            )));
        }
        let witness = PointT::from_t_unchecked(std::f64::consts::LN_2 / self.alpha);
        let value = self.eval(witness);
        Ok(QuarterCheck { holds: value >= 0.25 - 4.0 * f64::EPSILON, witness, value })
    }
}

/// `|mu(p_k / ||p_k||)|` for `k = 1..=k_max`, `p_k` the spike on
/// `(lambda_k, lambda_{k+1})` of a rapidly increasing sequence.
pub fn weak_null_trace(seq: &ExponentSequence, functional: &DiscreteFunctional, k_max: usize) -> Result<Vec<f64>> {
    if !seq.is_rip()? {
        return Err(MuntzError::invalid("weak-null trace needs a rapidly increasing sequence"));
    }
    (1..=k_max)
        .map(|k| {
            let spike = SpikeFunction::consecutive(seq, k)?;
            let norm = spike.profile()?.norm;
            Ok(functional.apply_with(|p| spike.eval(p) / norm).abs())
        })
        .collect()
}

/// Smallest `K` (1-based, matching the trace) from which every remaining
/// entry is below `threshold`.
pub fn persistent_below(trace: &[f64], threshold: f64) -> Option<usize> {
    let tail = trace.iter().rev().take_while(|v| **v < threshold).count();
    (tail > 0).then(|| trace.len() - tail + 1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct YSequenceCheck {
    pub values: Vec<f64>,
    pub strictly_monotone: bool,
    /// `1 - y_k` shrinks by the end of the prefix.
    pub approaching_one: bool,
}

/// Empirical check of the claim that `y_k` is strictly monotone and tends
/// to one, over consecutive pairs `k = 1..=count`. The answer depends on the
/// gaps `lambda_{k+1} - lambda_k`: `z -> z^{-1/z}` increases only for `z > e`.
pub fn y_sequence_check(seq: &ExponentSequence, count: usize) -> Result<YSequenceCheck> {
    let values = (1..=count)
        .map(|k| Ok(SpikeFunction::consecutive(seq, k)?.profile()?.y_lower_bound))
        .collect::<Result<Vec<_>>>()?;
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let approaching_one = match (values.first(), values.last()) {
        (Some(f), Some(l)) => (1.0 - l).abs() < (1.0 - f).abs(),
        _ => false,
    };
    Ok(YSequenceCheck { values, strictly_monotone: increasing || decreasing, approaching_one })
}
