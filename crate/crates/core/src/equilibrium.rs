//! Mixed selfish/altruistic choice equilibria.
//!
//! [`solve_equilibrium`] evaluates the closed-form case map. Two oracles are
//! independent of it: [`brute_force_equilibrium`] enumerates a grid of flow
//! splits and keeps those satisfying the equilibrium conditions, and
//! [`best_response_dynamics`] iterates aggregate best responses to a fixed
//! point.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::analysis::AnalysisSummary;
use crate::error::{domain, Error, Result};
use crate::grid::span;
use crate::model::{DelayProfile, FlowDistribution, OnRamp, PopulationParams};
use crate::Scalar;

/// Which branch of the case map produced an equilibrium.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Deserialize)]
#[serde(try_from = "String")]
pub enum CaseLabel {
    /// No active altruism (`alpha = 0` or `beta e = 0`): the selfish split.
    AllSelfishBaseline,
    /// `alpha <= Phi`: every altruist bypasses, bypass total stays at `Phi`.
    CaseB,
    /// `Phi < alpha < x_dagger`: every altruist bypasses, no selfish vehicle does.
    CaseC,
    /// `x_dagger <= alpha`: altruists are indifferent at `x_dagger`.
    CaseD,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::AllSelfishBaseline => "baseline",
            CaseLabel::CaseB => "case_b",
            CaseLabel::CaseC => "case_c",
            CaseLabel::CaseD => "case_d",
        }
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseLabel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "baseline" => Ok(CaseLabel::AllSelfishBaseline),
            "case_b" => Ok(CaseLabel::CaseB),
            "case_c" => Ok(CaseLabel::CaseC),
            "case_d" => Ok(CaseLabel::CaseD),
            other => Err(format!("unknown case label `{other}`")),
        }
    }
}

impl TryFrom<String> for CaseLabel {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquilibriumResult<T> {
    pub alpha: T,
    pub beta_e: T,
    pub flow: FlowDistribution<T>,
    pub x_hat_b: T,
    pub case_label: CaseLabel,
    pub delays: DelayProfile<T>,
    pub social_delay: T,
}

fn check_error_factor<T: Scalar>(e: T) -> Result<()> {
    if e > T::zero() && e.is_finite() {
        Ok(())
    } else {
        Err(domain("e", e, "(0, inf)"))
    }
}

/// Closed-form choice equilibrium for a configuration in the meaningful set.
///
/// The bypass total is `Phi` when altruism is inert (`beta e = 0`) or scarce
/// (`alpha <= Phi`), and `min(alpha, x_dagger(beta e))` otherwise. At
/// `beta e = 0` altruists are indifferent between the options; the canonical
/// split puts `min(alpha, Phi)` of them on the bypass.
pub fn solve_equilibrium<T: Scalar>(
    ramp: &OnRamp<T>,
    summary: &AnalysisSummary<T>,
    alpha: T,
    beta: T,
    e: T,
) -> Result<EquilibriumResult<T>> {
    summary.require_in_g()?;
    PopulationParams::new(alpha, beta)?;
    check_error_factor(e)?;

    let beta_e = beta * e;
    let phi = summary.phi;
    let zero = T::zero();
    let (case_label, x_hat_b, x_b_selfish, x_b_altruistic) = if beta_e == zero || alpha == zero {
        let alt = alpha.min(phi);
        (CaseLabel::AllSelfishBaseline, phi, phi - alt, alt)
    } else if alpha <= phi {
        (CaseLabel::CaseB, phi, phi - alpha, alpha)
    } else {
        let dagger = summary.intersection(beta_e);
        if alpha < dagger {
            (CaseLabel::CaseC, alpha, zero, alpha)
        } else {
            (CaseLabel::CaseD, dagger, zero, dagger)
        }
    };
    let x_hat_b = x_hat_b.max(zero).min(T::one());
    let flow = FlowDistribution::from_bypass(alpha, x_b_selfish, x_b_altruistic);
    Ok(EquilibriumResult {
        alpha,
        beta_e,
        flow,
        x_hat_b,
        case_label,
        delays: ramp.delays_affine(x_hat_b),
        social_delay: ramp.social_delay(x_hat_b),
    })
}

/// The four complementarity products of the equilibrium conditions.
///
/// Order: selfish steadfast, selfish bypass, altruistic steadfast,
/// altruistic bypass. Each is `mass * (own cost - other cost)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WardropReport<T> {
    pub products: [T; 4],
    pub tol: T,
}

impl<T: Scalar> WardropReport<T> {
    pub fn passes(&self) -> bool {
        self.products.iter().all(|p| *p <= self.tol)
    }

    pub fn max_product(&self) -> T {
        self.products
            .iter()
            .fold(T::neg_infinity(), |acc, p| acc.max(*p))
    }
}

/// Evaluates the equilibrium conditions for `flow` at altruism level `beta`
/// and error factor `e`.
pub fn verify_wardrop<T: Scalar>(
    ramp: &OnRamp<T>,
    flow: &FlowDistribution<T>,
    beta: T,
    e: T,
    tol: T,
) -> WardropReport<T> {
    let (selfish_gap, altruistic_gap) = bypass_gaps(ramp, flow.x_hat_b(), beta * e);
    WardropReport {
        products: [
            -flow.x_s_selfish * selfish_gap,
            flow.x_b_selfish * selfish_gap,
            -flow.x_s_altruistic * altruistic_gap,
            flow.x_b_altruistic * altruistic_gap,
        ],
        tol,
    }
}

/// Bypass-minus-steadfast cost for each class at bypass total `x_hat_b`.
fn bypass_gaps<T: Scalar>(ramp: &OnRamp<T>, x_hat_b: T, beta_e: T) -> (T, T) {
    let j = ramp.delays_affine(x_hat_b);
    let a = ramp.altruistic_costs_effective(x_hat_b, beta_e);
    (j.j1b - j.j1s, a.bypass_cost - a.steadfast_cost)
}

/// Tolerances used by the grid oracle for the selfish and altruistic
/// conditions: each class's cost-gap slope in `x_hat_b` times `grid_step`.
pub fn grid_tolerances<T: Scalar>(ramp: &OnRamp<T>, beta_e: T, grid_step: T) -> (T, T) {
    let slope = ramp.coeffs.k_s + ramp.coeffs.k_b;
    let slack = T::lit(1e-12);
    (
        slope * grid_step + slack,
        (T::one() + beta_e) * slope * grid_step + slack,
    )
}

/// Enumerates flow splits on a grid of `(x1b, x~1b)` and returns every split
/// at which no class has mass on an option whose cost exceeds the
/// alternative by more than the class tolerance from [`grid_tolerances`].
///
/// Grid axes include their upper ends `1 - alpha` and `alpha` exactly, so
/// splits with an empty option are represented without rounding.
pub fn brute_force_equilibrium<T: Scalar>(
    ramp: &OnRamp<T>,
    alpha: T,
    beta: T,
    e: T,
    grid_step: T,
) -> Result<Vec<FlowDistribution<T>>> {
    PopulationParams::new(alpha, beta)?;
    check_error_factor(e)?;
    if !(grid_step > T::zero() && grid_step <= T::lit(0.1)) {
        return Err(domain("grid_step", grid_step, "(0, 0.1]"));
    }
    let beta_e = beta * e;
    let (tol_selfish, tol_altruistic) = grid_tolerances(ramp, beta_e, grid_step);
    let selfish_axis = span(T::zero(), T::one() - alpha, grid_step);
    let altruistic_axis = span(T::zero(), alpha, grid_step);
    let zero = T::zero();

    let found = selfish_axis
        .par_iter()
        .flat_map_iter(|&xb| {
            let altruistic_axis = &altruistic_axis;
            altruistic_axis.iter().filter_map(move |&xa| {
                let flow = FlowDistribution::from_bypass(alpha, xb, xa);
                let (gs, ga) = bypass_gaps(ramp, flow.x_hat_b(), beta_e);
                let ok = !(flow.x_s_selfish > zero && -gs > tol_selfish)
                    && !(flow.x_b_selfish > zero && gs > tol_selfish)
                    && !(flow.x_s_altruistic > zero && -ga > tol_altruistic)
                    && !(flow.x_b_altruistic > zero && ga > tol_altruistic);
                ok.then_some(flow)
            })
        })
        .collect();
    Ok(found)
}

/// Smallest and largest bypass total among `flows`.
pub fn x_hat_b_range<T: Scalar>(flows: &[FlowDistribution<T>]) -> Option<(T, T)> {
    flows
        .iter()
        .map(|f| f.x_hat_b())
        .fold(None, |acc, x| match acc {
            None => Some((x, x)),
            Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
        })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DynamicsStep<T> {
    pub iteration: usize,
    pub flow: FlowDistribution<T>,
    /// Largest complementarity product at this flow.
    pub max_gap: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DynamicsTrace<T> {
    pub steps: Vec<DynamicsStep<T>>,
    /// Whether the last step is a fixed point at the requested tolerance.
    pub converged: bool,
}

impl<T: Scalar> DynamicsTrace<T> {
    pub fn terminal(&self) -> &DynamicsStep<T> {
        self.steps.last().expect("trace holds the initial flow")
    }

    /// Number of update rounds performed.
    pub fn iterations(&self) -> usize {
        self.steps.len() - 1
    }
}

/// Aggregate best-response dynamics started from `initial`.
///
/// Each round, every class shifts mass from its costlier option towards the
/// cheaper one. The shift is `step_size` times the smaller of the mass on the
/// costlier option and the distance to that class's own indifference point;
/// both classes move simultaneously. Stops once every product of mass and
/// unfavourable cost gap is below `tol`.
#[allow(clippy::too_many_arguments)]
pub fn best_response_dynamics<T: Scalar>(
    ramp: &OnRamp<T>,
    alpha: T,
    beta: T,
    e: T,
    initial: FlowDistribution<T>,
    step_size: T,
    max_iters: usize,
    tol: T,
) -> Result<DynamicsTrace<T>> {
    PopulationParams::new(alpha, beta)?;
    check_error_factor(e)?;
    if !(step_size > T::zero() && step_size <= T::one()) {
        return Err(domain("step_size", step_size, "(0, 1]"));
    }
    if !(tol > T::zero()) {
        return Err(domain("tol", tol, "(0, inf)"));
    }
    if !initial.validate(alpha, T::lit(1e-9)).is_feasible() {
        return Err(Error::InvalidPopulation(
            "initial flow is infeasible for alpha".into(),
        ));
    }

    let beta_e = beta * e;
    let slope = ramp.coeffs.k_s + ramp.coeffs.k_b;
    let selfish_slope = slope;
    let altruistic_slope = (T::one() + beta_e) * slope;
    let zero = T::zero();

    let max_gap = |f: &FlowDistribution<T>| verify_wardrop(ramp, f, beta, e, tol).max_product();

    let mut flow = initial;
    let mut steps = vec![DynamicsStep {
        iteration: 0,
        flow,
        max_gap: max_gap(&flow),
    }];
    let mut converged = steps[0].max_gap < tol;

    let shift = |gap: T, slope: T, steadfast: T, bypass: T| -> T {
        // signed amount moved from steadfast to bypass
        let distance = if slope > zero {
            gap.abs() / slope
        } else {
            T::infinity()
        };
        if gap > zero {
            -step_size * bypass.min(distance)
        } else if gap < zero {
            step_size * steadfast.min(distance)
        } else {
            zero
        }
    };

    let mut iteration = 0;
    while !converged && iteration < max_iters {
        iteration += 1;
        let (gs, ga) = bypass_gaps(ramp, flow.x_hat_b(), beta_e);
        let ds = shift(gs, selfish_slope, flow.x_s_selfish, flow.x_b_selfish);
        let da = shift(
            ga,
            altruistic_slope,
            flow.x_s_altruistic,
            flow.x_b_altruistic,
        );
        let selfish_total = T::one() - alpha;
        let xb = (flow.x_b_selfish + ds).max(zero).min(selfish_total);
        let xa = (flow.x_b_altruistic + da).max(zero).min(alpha);
        flow = FlowDistribution::from_bypass(alpha, xb, xa);
        let gap = max_gap(&flow);
        steps.push(DynamicsStep {
            iteration,
            flow,
            max_gap: gap,
        });
        converged = gap < tol;
    }
    Ok(DynamicsTrace { steps, converged })
}
