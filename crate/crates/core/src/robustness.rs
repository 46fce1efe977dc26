//! Price of anarchy under a multiplicative error in the altruistic costs and
//! the altruism level that minimizes it.
//!
//! With error `e` in `[e_lower, e_upper]` the equilibrium depends on the
//! effective level `beta e` only. The worst case over abundant altruism
//! (`alpha` in `[Delta, 1]`) sits at `alpha = 1`, and the worst error is one
//! of the two interval ends: the bypass total `min(1, x_dagger(beta e))` is
//! monotone in `e` and the social delay is convex in it.

use std::fmt;

use rayon::prelude::*;

use crate::analysis::{classify, AnalysisSummary, Classification, ErrorInterval};
use crate::equilibrium::solve_equilibrium;
use crate::error::{domain, Error, Result};
use crate::grid::span;
use crate::model::OnRamp;
use crate::Scalar;

/// One `(e, alpha)` pair attaining the worst-case social delay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCasePoint<T> {
    pub e: T,
    pub alpha: T,
    pub x_hat_b: T,
    pub j_soc: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorstCase<T> {
    pub sup: T,
    pub points: Vec<WorstCasePoint<T>>,
}

/// Supremum of the equilibrium social delay over the error interval and
/// `alpha` in `[Delta, 1]`.
pub fn worst_case_social_delay<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    beta: T,
    interval: &ErrorInterval<T>,
) -> Result<WorstCase<T>> {
    summary.require_in_g()?;
    let alpha = T::one();
    let mut ends = vec![interval.lower()];
    if interval.upper() != interval.lower() {
        ends.push(interval.upper());
    }
    let points = ends
        .into_iter()
        .map(|e| {
            let eq = solve_equilibrium(ramp, summary, alpha, beta, e)?;
            Ok(WorstCasePoint {
                e,
                alpha,
                x_hat_b: eq.x_hat_b,
                j_soc: eq.social_delay,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sup = points
        .iter()
        .fold(T::neg_infinity(), |acc, p| acc.max(p.j_soc));
    let tie = T::lit(1e-12) * (T::one() + sup.abs());
    let points = points
        .into_iter()
        .filter(|p| sup - p.j_soc <= tie)
        .collect();
    Ok(WorstCase { sup, points })
}

fn checked_j_opt<T: Scalar>(summary: &AnalysisSummary<T>) -> Result<T> {
    if summary.j_opt > T::zero() {
        Ok(summary.j_opt)
    } else {
        Err(Error::ZeroOptimum)
    }
}

/// Worst-case social delay relative to the optimum.
pub fn price_of_anarchy<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    beta: T,
    interval: &ErrorInterval<T>,
) -> Result<T> {
    let j_opt = checked_j_opt(summary)?;
    Ok(worst_case_social_delay(ramp, summary, beta, interval)?.sup / j_opt)
}

/// Effective level at which `x_dagger` reaches `alpha`:
/// `(alpha - Phi) / (2 Delta - Phi - alpha)`.
pub fn transition_beta<T: Scalar>(alpha: T, phi: T, delta: T) -> Result<T> {
    let denom = T::lit(2.0) * delta - phi - alpha;
    if !(denom > T::zero()) {
        return Err(Error::OutOfRegime {
            alpha: alpha.as_f64(),
        });
    }
    Ok((alpha - phi) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BetaStarBranch {
    /// `1 / (e_lower Pi)`
    G1Formula,
    /// `1 / sqrt(e_lower e_upper)`
    G2Formula,
}

impl fmt::Display for BetaStarBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BetaStarBranch::G1Formula => "G1Formula",
            BetaStarBranch::G2Formula => "G2Formula",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessSummary<T> {
    pub poa: T,
    pub beta_star: T,
    pub beta_star_branch: BetaStarBranch,
    pub classification: Classification,
    /// `Pi`, the transition level at `alpha = 1`, when it is positive.
    pub transition_beta_at_alpha1: Option<T>,
    pub worst_case_points: Vec<WorstCasePoint<T>>,
}

/// The altruism level minimizing the price of anarchy, in closed form.
pub fn optimal_altruism_level<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    interval: &ErrorInterval<T>,
) -> Result<RobustnessSummary<T>> {
    summary.require_in_g()?;
    let classification = classify(summary, interval);
    let positive_pi = summary.pi.filter(|pi| *pi > T::zero());
    let (beta_star, branch) = match (classification, positive_pi) {
        (Classification::InG1, Some(pi)) => (
            T::one() / (interval.lower() * pi),
            BetaStarBranch::G1Formula,
        ),
        _ => (
            T::one() / (interval.lower() * interval.upper()).sqrt(),
            BetaStarBranch::G2Formula,
        ),
    };
    let worst = worst_case_social_delay(ramp, summary, beta_star, interval)?;
    let j_opt = checked_j_opt(summary)?;
    Ok(RobustnessSummary {
        poa: worst.sup / j_opt,
        beta_star,
        beta_star_branch: branch,
        classification,
        transition_beta_at_alpha1: positive_pi,
        worst_case_points: worst.points,
    })
}

/// Price of anarchy with the supremum taken over an `(e, alpha)` grid on
/// `[e_lower, e_upper] x [Delta, 1]` (both ends included) at `inner_step`.
pub fn grid_price_of_anarchy<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    beta: T,
    interval: &ErrorInterval<T>,
    inner_step: T,
) -> Result<T> {
    summary.require_in_g()?;
    let j_opt = checked_j_opt(summary)?;
    let errors = span(interval.lower(), interval.upper(), inner_step);
    let alphas = span(summary.a2.lower, T::one(), inner_step);
    let mut sup = T::neg_infinity();
    for &e in &errors {
        for &alpha in &alphas {
            sup = sup.max(solve_equilibrium(ramp, summary, alpha, beta, e)?.social_delay);
        }
    }
    Ok(sup / j_opt)
}

/// Upper bound, in price-of-anarchy units, on how far the grid supremum of
/// [`grid_price_of_anarchy`] can fall below the true supremum.
///
/// The social delay has slope at most `2 (k_s + k_b) max(Delta, 1 - Delta)`
/// on `[0, 1]`; the equilibrium bypass total moves by at most one `alpha`
/// step, and by at most `2 (Delta - Phi) beta` per unit of `e`.
pub fn grid_slack<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    beta: T,
    inner_step: T,
) -> T {
    let two = T::lit(2.0);
    let slope = ramp.coeffs.k_s + ramp.coeffs.k_b;
    let lipschitz = two * slope * summary.delta.max(T::one() - summary.delta);
    let dx = inner_step * (T::one() + two * (summary.delta - summary.phi).abs() * beta);
    lipschitz * dx / summary.j_opt
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridOptimum<T> {
    pub beta: T,
    /// Grid price of anarchy at `beta`.
    pub poa: T,
}

/// Minimizes [`grid_price_of_anarchy`] over `beta` on the grid
/// `beta_step, 2 beta_step, ...` up to `2 / e_lower`. Ties go to the
/// smallest `beta`.
pub fn grid_optimal_beta<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    interval: &ErrorInterval<T>,
    beta_step: T,
    inner_step: T,
) -> Result<GridOptimum<T>> {
    if !(beta_step > T::zero()) {
        return Err(domain("beta_step", beta_step, "(0, inf)"));
    }
    if !(inner_step > T::zero()) {
        return Err(domain("inner_step", inner_step, "(0, inf)"));
    }
    summary.require_in_g()?;
    let upper = T::lit(2.0) / interval.lower();
    let count = (upper / beta_step + T::lit(1e-9))
        .floor()
        .to_usize()
        .unwrap_or(0);
    let scored = (1..=count)
        .into_par_iter()
        .map(|i| {
            let beta = T::from_usize(i).unwrap() * beta_step;
            grid_price_of_anarchy(ramp, summary, beta, interval, inner_step)
                .map(|poa| GridOptimum { beta, poa })
        })
        .collect::<Result<Vec<_>>>()?;
    scored
        .into_iter()
        .reduce(|best, cand| if cand.poa < best.poa { cand } else { best })
        .ok_or(Error::Domain {
            what: "beta_step",
            value: beta_step.as_f64(),
            domain: "at most 2 / e_lower",
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{analyze, config_for_targets};
    use crate::model::{CostCoefficients, OnRampConfig};
    use proptest::prelude::*;

    fn calibrated() -> (OnRamp<f64>, AnalysisSummary<f64>) {
        let r = OnRamp::new(OnRampConfig::new(0.37, CostCoefficients::calibrated()).unwrap());
        let s = analyze(&r).unwrap();
        (r, s)
    }

    fn synthetic_g1() -> (OnRamp<f64>, AnalysisSummary<f64>) {
        let phi = 0.6;
        let delta = (1.0 + phi + (1.0 - phi) / 1.5) / 2.0;
        let r = OnRamp::new(config_for_targets(phi, delta, 0.9, 0.0, 0.5).unwrap());
        let s = analyze(&r).unwrap();
        (r, s)
    }

    #[test]
    fn no_uncertainty_optimum() {
        let (r, s) = calibrated();
        let iv = ErrorInterval::exact();
        let w = worst_case_social_delay(&r, &s, 1.0, &iv).unwrap();
        assert!((w.sup - s.j_opt).abs() < 1e-12);
        assert_eq!(w.points.len(), 1);
        assert_eq!(w.points[0].e, 1.0);
        assert!((price_of_anarchy(&r, &s, 1.0, &iv).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_evaluation_matches_grid() {
        let (r, s) = calibrated();
        let iv = ErrorInterval::new(0.5, 2.0).unwrap();
        let w = worst_case_social_delay(&r, &s, 1.0, &iv).unwrap();
        let expected = r
            .social_delay(s.intersection(0.5))
            .max(r.social_delay(s.intersection(2.0)));
        assert!((w.sup - expected).abs() < 1e-12);
        // beta = 1 is the geometric-mean level here: both ends tie
        assert_eq!(w.points.len(), 2);

        let grid = grid_price_of_anarchy(&r, &s, 1.0, &iv, 0.01).unwrap();
        let poa = price_of_anarchy(&r, &s, 1.0, &iv).unwrap();
        assert!(grid <= poa + 1e-12);
        assert!(poa - grid <= grid_slack(&r, &s, 1.0, 0.01));
    }

    #[test]
    fn inert_altruism_worst_case() {
        let (r, s) = calibrated();
        let iv = ErrorInterval::new(0.3, 3.0).unwrap();
        let w = worst_case_social_delay(&r, &s, 0.0, &iv).unwrap();
        assert!((w.sup - s.j_soc_at_phi).abs() < 1e-12);
        let poa = price_of_anarchy(&r, &s, 0.0, &iv).unwrap();
        assert!((poa - s.j_soc_at_phi / s.j_opt).abs() < 1e-12);
        assert!(poa > 1.0);
    }

    #[test]
    fn geometric_mean_level_equalizes_ends() {
        let (r, s) = calibrated();
        let beta = 1.0 / (0.5f64 * 2.0).sqrt();
        let lo = r.social_delay(s.intersection(beta * 0.5));
        let hi = r.social_delay(s.intersection(beta * 2.0));
        assert!((lo - hi).abs() < 1e-9);
    }

    #[test]
    fn transition_levels() {
        let (_, s) = calibrated();
        assert!((transition_beta(s.delta, s.phi, s.delta).unwrap() - 1.0).abs() < 1e-12);
        let t = transition_beta(0.63, s.phi, s.delta).unwrap();
        assert!((t - 2.288_002).abs() < 1e-6);
        assert!((s.intersection(t) - 0.63).abs() < 1e-9);
        assert!(matches!(
            transition_beta(0.9, s.phi, s.delta),
            Err(Error::OutOfRegime { .. })
        ));

        let (_, g1) = synthetic_g1();
        let pi = g1.pi.unwrap();
        assert!((transition_beta(1.0, g1.phi, g1.delta).unwrap() - pi).abs() < 1e-12);
    }

    #[test]
    fn calibrated_optimal_level() {
        let (r, s) = calibrated();
        let iv = ErrorInterval::new(0.5, 2.0).unwrap();
        let rs = optimal_altruism_level(&r, &s, &iv).unwrap();
        assert!((rs.beta_star - 1.0).abs() < 1e-12);
        assert_eq!(rs.beta_star_branch, BetaStarBranch::G2Formula);
        assert_eq!(rs.classification, Classification::InG2);
        assert_eq!(rs.transition_beta_at_alpha1, None);
        let poa = price_of_anarchy(&r, &s, rs.beta_star, &iv).unwrap();
        assert_eq!(rs.poa, poa);

        let exact = optimal_altruism_level(&r, &s, &ErrorInterval::exact()).unwrap();
        assert_eq!(exact.beta_star, 1.0);
        assert!((exact.poa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn calibrated_grid_oracle_agrees() {
        let (r, s) = calibrated();
        let iv = ErrorInterval::new(0.5, 2.0).unwrap();
        let g = grid_optimal_beta(&r, &s, &iv, 1e-3, 1e-2).unwrap();
        assert!((g.beta - 1.0).abs() <= 1e-3, "{}", g.beta);

        let g = grid_optimal_beta(&r, &s, &ErrorInterval::exact(), 1e-3, 1e-2).unwrap();
        assert!((g.beta - 1.0).abs() <= 1e-3);
    }

    #[test]
    fn g1_optimal_level() {
        let (r, s) = synthetic_g1();
        let iv = ErrorInterval::new(1.0, 4.0).unwrap();
        let rs = optimal_altruism_level(&r, &s, &iv).unwrap();
        assert_eq!(rs.beta_star_branch, BetaStarBranch::G1Formula);
        assert!((rs.beta_star - 1.0 / 1.5).abs() < 1e-9);
        assert!((rs.transition_beta_at_alpha1.unwrap() - 1.5).abs() < 1e-9);

        // lower end equalized with the transition point, where x_dagger = 1
        let lo = r.social_delay(s.intersection(rs.beta_star * iv.lower()));
        let at_pi = r.social_delay(s.intersection(1.5));
        assert!((lo - at_pi).abs() < 1e-9);

        let g = grid_optimal_beta(&r, &s, &iv, 1e-3, 1e-2).unwrap();
        let slack = grid_slack(&r, &s, g.beta, 1e-2);
        assert!(rs.poa <= g.poa + slack + 1e-12);
    }

    #[test]
    fn zero_optimum_is_reported() {
        let (r, mut s) = calibrated();
        s.j_opt = 0.0;
        assert_eq!(
            price_of_anarchy(&r, &s, 1.0, &ErrorInterval::exact()),
            Err(Error::ZeroOptimum)
        );
    }

    fn in_g_case() -> impl Strategy<Value = (OnRamp<f64>, AnalysisSummary<f64>, ErrorInterval<f64>)>
    {
        (
            0.05..0.95f64,
            0.5..2.0f64,
            0.0..40.0f64,
            0.5..2.0f64,
            0.0..5.0f64,
            0.5..5.0f64,
            0.5..15.0f64,
            0.2..1.0f64,
            1.0..5.0f64,
        )
            .prop_map(|(n0, c1t, c1m, c2t, c2m, mu, gamma, lo, ratio)| {
                let costs = CostCoefficients {
                    c1t,
                    c1m,
                    c2t,
                    c2m,
                    mu,
                    gamma,
                };
                let r = OnRamp::new(OnRampConfig::new(n0, costs).unwrap());
                let s = analyze(&r).unwrap();
                (r, s, ErrorInterval::new(lo, lo * ratio).unwrap())
            })
            .prop_filter("meaningful set", |(_, s, _)| s.membership.is_in_g())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(50))]

        #[test]
        fn poa_at_least_one((r, s, iv) in in_g_case(), beta in 0.0..4.0f64) {
            prop_assert!(price_of_anarchy(&r, &s, beta, &iv).unwrap() >= 1.0 - 1e-12);
        }

        #[test]
        fn closed_form_level_is_optimal((r, s, iv) in in_g_case()) {
            let rs = optimal_altruism_level(&r, &s, &iv).unwrap();
            prop_assert!(rs.beta_star > 0.0);
            let upper = 2.0 / iv.lower();
            for i in 1..=200 {
                let beta = upper * i as f64 / 200.0;
                let poa = price_of_anarchy(&r, &s, beta, &iv).unwrap();
                prop_assert!(rs.poa <= poa + 1e-12, "beta {beta}: {} > {poa}", rs.poa);
            }
        }

        #[test]
        fn branch_equalization((r, s, iv) in in_g_case()) {
            let rs = optimal_altruism_level(&r, &s, &iv).unwrap();
            let lo = r.social_delay(s.intersection(rs.beta_star * iv.lower()));
            let other = match rs.beta_star_branch {
                BetaStarBranch::G2Formula => r.social_delay(s.intersection(rs.beta_star * iv.upper())),
                BetaStarBranch::G1Formula => r.social_delay(s.intersection(s.pi.unwrap())),
            };
            prop_assert!((lo - other).abs() < 1e-9);
        }

        #[test]
        fn grid_sup_within_slack((r, s, iv) in in_g_case(), beta in 0.0..3.0f64) {
            let grid = grid_price_of_anarchy(&r, &s, beta, &iv, 0.05).unwrap();
            let poa = price_of_anarchy(&r, &s, beta, &iv).unwrap();
            prop_assert!(grid <= poa + 1e-12);
            prop_assert!(poa - grid <= grid_slack(&r, &s, beta, 0.05) + 1e-12);
        }

        #[test]
        fn depends_on_effective_level((r, s, iv) in in_g_case(), beta in 0.05..3.0f64, c in 0.2..5.0f64) {
            let a = price_of_anarchy(&r, &s, beta, &iv).unwrap();
            let b = price_of_anarchy(&r, &s, beta * c, &iv.scaled(1.0 / c).unwrap()).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
