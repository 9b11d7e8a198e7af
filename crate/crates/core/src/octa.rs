//! Diameter-2 certificates for convex combinations of slices of the unit
//! ball of `M(Lambda)`.
//!
//! Given slices `S(mu_j, eps_j)` with witnesses `g^j` and a spike `p_k`
//! peaking at `x_k`, the perturbations
//!
//! ```text
//! h_k^{j+} = g^j + (1 - g^j(x_k)) p_k / ||p_k||
//! h_k^{j-} = g^j - (1 + g^j(x_k)) p_k / ||p_k||
//! ```
//!
//! equal `+1` and `-1` at `x_k`. Once `k` is large their norms are at most
//! `1 + 2 eps` and, scaled by `1 / (1 + 2 eps)`, they stay inside every slice,
//! so the two convex combinations `u+` and `u-` are at distance at least
//! `2 / (1 + 2 eps)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MuntzError, Result};
use crate::exponents::ExponentSequence;
use crate::functional::DiscreteFunctional;
use crate::point::PointT;
use crate::poly::{sup_norm, MuntzPolynomial};
use crate::spikes::SpikeFunction;

pub const OCTA_SCHEMA: &str = "octa-cert/1";

/// Sample count for the oscillation of a witness over `(a_k, b_k)`.
pub const OSCILLATION_SAMPLES: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSpec {
    pub functional: DiscreteFunctional,
    pub epsilon: f64,
    pub witness: MuntzPolynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SliceValidation {
    /// `mu(g)`.
    pub value: f64,
    pub witness_norm: f64,
}

impl SliceSpec {
    /// Checks `0 < epsilon < 1`, `||g|| <= 1 + tol` and `mu(g) > 1 - epsilon`.
    pub fn validate(&self, tol: f64) -> Result<SliceValidation> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(MuntzError::invalid(format!("slice epsilon must lie in (0, 1), got {}", self.epsilon)));
        }
        let witness_norm = sup_norm(&self.witness, tol)?.value;
        if witness_norm > 1.0 + tol {
            return Err(MuntzError::invalid(format!("witness has norm {witness_norm} > 1")));
        }
        let value = self.functional.apply(&self.witness);
        if !(value > 1.0 - self.epsilon) {
            return Err(MuntzError::invalid(format!(
                "witness value {value} does not exceed 1 - epsilon = {}",
                1.0 - self.epsilon
            )));
        }
        Ok(SliceValidation { value, witness_norm })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbations {
    pub plus: MuntzPolynomial,
    pub minus: MuntzPolynomial,
    /// `x_k`, the maximiser of the spike.
    pub peak: PointT,
    pub spike_norm: f64,
}

/// `h+ = g + (1 - g(x_k)) p/||p||` and `h- = g - (1 + g(x_k)) p/||p||`.
pub fn build_perturbations(g: &MuntzPolynomial, spike: &SpikeFunction) -> Result<Perturbations> {
    let profile = spike.profile()?;
    let gk = g.eval(profile.argmax);
    let p = spike.to_poly();
    let plus = MuntzPolynomial::linear_combination([(1.0, g), ((1.0 - gk) / profile.norm, &p)])?;
    let minus = MuntzPolynomial::linear_combination([(1.0, g), (-(1.0 + gk) / profile.norm, &p)])?;
    Ok(Perturbations { plus, minus, peak: profile.argmax, spike_norm: profile.norm })
}

/// Everything the search learned about one slice at one `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceEvidence {
    pub h_plus: MuntzPolynomial,
    pub h_minus: MuntzPolynomial,
    pub norm_plus: f64,
    pub norm_minus: f64,
    /// `mu(h+) / (1 + 2 eps) - (1 - eps_j)`; positive means the scaled
    /// perturbation lies in the slice.
    pub membership_plus: f64,
    pub membership_minus: f64,
    /// `sup |g(u) - g(v)|` over sampled `u, v` in `(a_k, b_k)`.
    pub oscillation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSearch {
    pub k: usize,
    pub spike: SpikeFunction,
    pub peak: PointT,
    pub spike_norm: f64,
    /// `{p_k / ||p_k|| > eps}`; `None` when `eps >= 1`.
    pub interval: Option<(PointT, PointT)>,
    pub slices: Vec<SliceEvidence>,
}

fn oscillation(g: &MuntzPolynomial, interval: Option<(PointT, PointT)>) -> f64 {
    let Some((a, b)) = interval else { return 0.0 };
    let (hi, lo) = (a.t(), b.t());
    let ratio = (hi / lo).ln() / (OSCILLATION_SAMPLES + 1) as f64;
    let samples = std::iter::once(lo)
        .chain((1..=OSCILLATION_SAMPLES).map(|i| lo * (ratio * i as f64).exp()))
        .chain(std::iter::once(hi))
        .map(|t| g.eval(PointT::from_t_unchecked(t)));
    let (min, max) = samples.fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), v| (mn.min(v), mx.max(v)));
    max - min
}

fn evaluate_k(slices: &[SliceSpec], eps: f64, seq: &ExponentSequence, k: usize, tol: f64) -> Result<KSearch> {
    let spike = SpikeFunction::consecutive(seq, k)?;
    let profile = spike.profile()?;
    let interval = match spike.superlevel_interval(eps * profile.norm) {
        Ok(iv) => Some(iv),
        Err(MuntzError::EmptyInterval { .. }) => None,
        Err(e) => return Err(e),
    };
    let scale = 1.0 / (1.0 + 2.0 * eps);
    let evidence = slices
        .par_iter()
        .map(|s| {
            let h = build_perturbations(&s.witness, &spike)?;
            let target = 1.0 - s.epsilon;
            Ok(SliceEvidence {
                norm_plus: sup_norm(&h.plus, tol)?.value,
                norm_minus: sup_norm(&h.minus, tol)?.value,
                membership_plus: scale * s.functional.apply(&h.plus) - target,
                membership_minus: scale * s.functional.apply(&h.minus) - target,
                oscillation: oscillation(&s.witness, interval),
                h_plus: h.plus,
                h_minus: h.minus,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(KSearch { k, spike, peak: profile.argmax, spike_norm: profile.norm, interval, slices: evidence })
}

impl KSearch {
    fn norm_excess(&self, eps: f64) -> f64 {
        self.slices.iter().map(|s| s.norm_plus.max(s.norm_minus) - (1.0 + 2.0 * eps)).fold(f64::NEG_INFINITY, f64::max)
    }

    fn membership_margin(&self) -> f64 {
        self.slices.iter().map(|s| s.membership_plus.min(s.membership_minus)).fold(f64::INFINITY, f64::min)
    }

    fn qualifies(&self, eps: f64, tol: f64) -> bool {
        self.norm_excess(eps) <= tol
            && self.membership_margin() > 0.0
            && self.slices.iter().all(|s| s.oscillation < eps)
    }
}

fn check_search_inputs(slices: &[SliceSpec], eps: f64, seq: &ExponentSequence, tol: f64) -> Result<()> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(MuntzError::invalid(format!("eps must be positive, got {eps}")));
    }
    if slices.is_empty() {
        return Err(MuntzError::invalid("at least one slice is required"));
    }
    if !seq.is_rip()? {
        return Err(MuntzError::invalid("spike sequence lacks the rapid increase property"));
    }
    for (j, s) in slices.iter().enumerate() {
        s.validate(tol).map_err(|e| MuntzError::invalid(format!("slice {}: {e}", j + 1)))?;
    }
    Ok(())
}

/// Smallest `k <= k_max` at which every slice has `||h_k^{j+-}|| <= 1 + 2 eps`,
/// scaled membership `mu_j(h_k^{j+-}) / (1 + 2 eps) > 1 - eps_j`, and witness
/// oscillation below `eps` on `(a_k, b_k)`.
pub fn find_k(slices: &[SliceSpec], eps: f64, seq: &ExponentSequence, k_max: usize, tol: f64) -> Result<KSearch> {
    check_search_inputs(slices, eps, seq, tol)?;
    let last = k_max.min(seq.len().saturating_sub(2));
    let mut best_norm_excess = f64::INFINITY;
    let mut best_membership_margin = f64::NEG_INFINITY;
    for k in 1..=last {
        let search = evaluate_k(slices, eps, seq, k, tol)?;
        if search.qualifies(eps, tol) {
            return Ok(search);
        }
        best_norm_excess = best_norm_excess.min(search.norm_excess(eps));
        best_membership_margin = best_membership_margin.max(search.membership_margin());
    }
    Err(MuntzError::KNotFound { k_max: last, best_norm_excess, best_membership_margin })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OctaCertificate {
    pub schema: String,
    pub exponents: ExponentSequence,
    pub slices: Vec<SliceSpec>,
    pub weights: Vec<f64>,
    pub eps: f64,
    pub tol: f64,
    pub chosen_k: usize,
    pub spike: SpikeFunction,
    pub peak: PointT,
    pub interval: Option<(PointT, PointT)>,
    /// `1 / (1 + 2 eps)`.
    pub scale: f64,
    pub members: Vec<SliceEvidence>,
    pub u_plus: MuntzPolynomial,
    pub u_minus: MuntzPolynomial,
    pub norm_u_plus: f64,
    pub norm_u_minus: f64,
    /// Largest norm among the scaled perturbations `h_k^{j+-} / (1 + 2 eps)`.
    pub max_scaled_member_norm: f64,
    /// `(u+ - u-)(x_k)`, a lower bound for `||u+ - u-||`.
    pub separation: f64,
    pub separation_norm: f64,
    /// `2 / (1 + 2 eps)`.
    pub separation_target: f64,
    pub verified: bool,
}

/// Tolerance on the certified separation against `2 / (1 + 2 eps)`.
pub const SEPARATION_TOLERANCE: f64 = 1e-9;

pub fn diameter_certificate(
    slices: &[SliceSpec],
    weights: &[f64],
    eps: f64,
    seq: &ExponentSequence,
    k_max: usize,
    tol: f64,
) -> Result<OctaCertificate> {
    if weights.len() != slices.len() {
        return Err(MuntzError::invalid(format!("{} weights for {} slices", weights.len(), slices.len())));
    }
    if weights.iter().any(|w| !(*w > 0.0)) {
        return Err(MuntzError::invalid("weights must be positive"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(MuntzError::invalid(format!("weights sum to {total}, not 1")));
    }

    let search = find_k(slices, eps, seq, k_max, tol)?;
    let scale = 1.0 / (1.0 + 2.0 * eps);
    let u_plus =
        MuntzPolynomial::linear_combination(weights.iter().zip(&search.slices).map(|(w, s)| (scale * w, &s.h_plus)))?;
    let u_minus =
        MuntzPolynomial::linear_combination(weights.iter().zip(&search.slices).map(|(w, s)| (scale * w, &s.h_minus)))?;
    let diff = MuntzPolynomial::linear_combination([(1.0, &u_plus), (-1.0, &u_minus)])?;

    let norm_u_plus = sup_norm(&u_plus, tol)?.value;
    let norm_u_minus = sup_norm(&u_minus, tol)?.value;
    let separation_norm = sup_norm(&diff, tol)?.value;
    let separation = diff.eval(search.peak);
    let separation_target = 2.0 * scale;
    let max_scaled_member_norm =
        search.slices.iter().map(|s| scale * s.norm_plus.max(s.norm_minus)).fold(0.0, f64::max);

    let verified = max_scaled_member_norm <= 1.0 + tol
        && norm_u_plus <= 1.0 + tol
        && norm_u_minus <= 1.0 + tol
        && search.membership_margin() > 0.0
        && separation >= separation_target - SEPARATION_TOLERANCE;

    Ok(OctaCertificate {
        schema: OCTA_SCHEMA.to_string(),
        exponents: seq.clone(),
        slices: slices.to_vec(),
        weights: weights.to_vec(),
        eps,
        tol,
        chosen_k: search.k,
        spike: search.spike,
        peak: search.peak,
        interval: search.interval,
        scale,
        members: search.slices,
        u_plus,
        u_minus,
        norm_u_plus,
        norm_u_minus,
        max_scaled_member_norm,
        separation,
        separation_norm,
        separation_target,
        verified,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum WitnessOutcome {
    Found { witness: MuntzPolynomial, value: f64 },
    NotFound { best: MuntzPolynomial, best_value: f64 },
}

fn normalized(coeffs: &[f64], exps: &[f64], tol: f64) -> Result<Option<MuntzPolynomial>> {
    let p = MuntzPolynomial::new(exps.iter().copied().zip(coeffs.iter().copied()))?;
    let n = sup_norm(&p, tol)?.value;
    if n == 0.0 {
        return Ok(None);
    }
    Ok(Some(p.scaled(1.0 / n)?))
}

/// Looks for `g` with `||g|| <= 1` and `mu(g) > 1 - epsilon`, supported on the
/// first `budget` exponents of `seq`.
///
/// Starts from the best signed monomial or normalised consecutive spike,
/// then runs coordinate ascent on the coefficients, renormalising to norm 1
/// after every step.
pub fn witness_finder(
    functional: &DiscreteFunctional,
    epsilon: f64,
    seq: &ExponentSequence,
    budget: usize,
) -> Result<WitnessOutcome> {
    const TOL: f64 = 1e-10;
    let exps: Vec<f64> = seq.values().iter().take(budget.max(1)).copied().collect();
    let target = 1.0 - epsilon;
    let n = exps.len();

    let mut starts: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; n];
            c[i] = sign;
            starts.push(c.clone());
            if i + 1 < n {
                c[i + 1] = -sign;
                starts.push(c);
            }
        }
    }
    let mut best_coeffs = Vec::new();
    let mut best = MuntzPolynomial::zero();
    let mut best_value = f64::NEG_INFINITY;
    for c in starts {
        if let Some(g) = normalized(&c, &exps, TOL)? {
            let v = functional.apply(&g);
            if v > best_value {
                best_value = v;
                best_coeffs = expand(&g, &exps);
                best = g;
            }
        }
    }
    if best_value > target {
        return Ok(WitnessOutcome::Found { witness: best, value: best_value });
    }

    let mut step = 0.5;
    while step > 1e-4 {
        let mut improved = false;
        for i in 0..n {
            for dir in [step, -step] {
                let mut c = best_coeffs.clone();
                c[i] += dir;
                if let Some(g) = normalized(&c, &exps, TOL)? {
                    let v = functional.apply(&g);
                    if v > best_value {
                        best_value = v;
                        best_coeffs = expand(&g, &exps);
                        best = g;
                        improved = true;
                        if best_value > target {
                            return Ok(WitnessOutcome::Found { witness: best, value: best_value });
                        }
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok(WitnessOutcome::NotFound { best, best_value })
}

/// Coefficients of `g` laid out on `exps`.
fn expand(g: &MuntzPolynomial, exps: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; exps.len()];
    for t in g.terms() {
        let i = exps.iter().position(|e| *e == t.exponent).expect("support within exps");
        c[i] = t.coefficient;
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doubling() -> ExponentSequence {
        ExponentSequence::geometric(2.0, 1.0, 0, 70).unwrap()
    }

    fn mono(e: f64) -> MuntzPolynomial {
        MuntzPolynomial::monomial(e, 1.0).unwrap()
    }

    fn dirac_one_slice() -> SliceSpec {
        SliceSpec { functional: DiscreteFunctional::dirac(1.0).unwrap(), epsilon: 0.2, witness: mono(2.0) }
    }

    #[test]
    fn perturbations_hit_plus_minus_one_at_peak() {
        let spike = SpikeFunction::new(256.0, 512.0).unwrap();
        let g = mono(2.0);
        let h = build_perturbations(&g, &spike).unwrap();
        assert!((h.plus.eval(h.peak) - 1.0).abs() < 1e-12);
        assert!((h.minus.eval(h.peak) + 1.0).abs() < 1e-12);
        assert_eq!(h.plus.eval(PointT::ONE), 1.0);
    }

    #[test]
    fn zero_witness_gives_pure_spikes() {
        let spike = SpikeFunction::new(4.0, 8.0).unwrap();
        let h = build_perturbations(&MuntzPolynomial::zero(), &spike).unwrap();
        assert!((sup_norm(&h.plus, 1e-10).unwrap().value - 1.0).abs() < 1e-12);
        assert!((sup_norm(&h.minus, 1e-10).unwrap().value - 1.0).abs() < 1e-12);
        let diff = MuntzPolynomial::linear_combination([(1.0, &h.plus), (1.0, &h.minus)]).unwrap();
        assert!(diff.is_zero());
    }

    #[test]
    fn single_slice_search() {
        let k = find_k(&[dirac_one_slice()], 0.05, &doubling(), 40, 1e-10).unwrap();
        for s in &k.slices {
            assert!(s.norm_plus <= 1.1 + 1e-10 && s.norm_minus <= 1.1 + 1e-10);
            assert!(s.membership_plus > 0.0 && s.membership_minus > 0.0);
        }
        let loose = find_k(&[dirac_one_slice()], 0.1, &doubling(), 40, 1e-10).unwrap();
        assert!(loose.k <= k.k);
    }

    #[test]
    fn zero_functional_witness_is_rejected() {
        let s = SliceSpec {
            functional: DiscreteFunctional::new(vec![]).unwrap(),
            epsilon: 0.5,
            witness: MuntzPolynomial::zero(),
        };
        assert!(matches!(find_k(&[s], 0.05, &doubling(), 10, 1e-10), Err(MuntzError::InvalidInput(_))));
    }

    #[test]
    fn search_reports_best_margins_when_capped() {
        match find_k(&[dirac_one_slice()], 0.05, &doubling(), 2, 1e-10) {
            Err(MuntzError::KNotFound { k_max, best_norm_excess, .. }) => {
                assert_eq!(k_max, 2);
                assert!(best_norm_excess.is_finite());
            }
            other => panic!("expected KNotFound, got {other:?}"),
        }
    }

    #[test]
    fn single_slice_certificate() {
        let cert = diameter_certificate(&[dirac_one_slice()], &[1.0], 0.05, &doubling(), 40, 1e-10).unwrap();
        assert!(cert.verified);
        assert!(cert.separation >= 2.0 / 1.1 - 1e-9);
        assert!(cert.separation_norm <= 2.0 + 1e-10);
    }

    #[test]
    fn weights_must_sum_to_one() {
        let r = diameter_certificate(&[dirac_one_slice()], &[0.9], 0.05, &doubling(), 40, 1e-10);
        assert!(matches!(r, Err(MuntzError::InvalidInput(_))));
        let r = diameter_certificate(&[dirac_one_slice()], &[1.0, 0.0], 0.05, &doubling(), 40, 1e-10);
        assert!(matches!(r, Err(MuntzError::InvalidInput(_))));
    }

    #[test]
    fn witness_for_dirac_one_is_immediate() {
        match witness_finder(&DiscreteFunctional::dirac(1.0).unwrap(), 0.1, &doubling(), 4).unwrap() {
            WitnessOutcome::Found { value, .. } => assert_eq!(value, 1.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn witness_for_dirac_half() {
        let mu = DiscreteFunctional::dirac(0.5).unwrap();
        match witness_finder(&mu, 0.9, &doubling(), 6).unwrap() {
            WitnessOutcome::Found { witness, value } => {
                assert!(value > 0.1);
                assert!((mu.apply(&witness) - value).abs() < 1e-15);
                assert!(sup_norm(&witness, 1e-10).unwrap().value <= 1.0 + 1e-10);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn small_functional_has_no_witness() {
        let mu = DiscreteFunctional::from_x_weights(&[(0.5, 0.3)]).unwrap();
        match witness_finder(&mu, 0.1, &doubling(), 4).unwrap() {
            WitnessOutcome::NotFound { best_value, .. } => assert!(best_value <= 0.3 + 1e-9),
            other => panic!("{other:?}"),
        }
    }
}
