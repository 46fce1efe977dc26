//! Structural quantities of a configuration: the selfish split `Phi`, the
//! social optimum `Delta`, the altruistic intersection, the regime threshold
//! `Pi`, and membership in the meaningful set `G = {0 < Phi < Delta < 1}`.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{CostCoefficients, OnRamp, OnRampConfig};
use crate::Scalar;

/// Total bypass proportion at the all-selfish interior equilibrium, where
/// `J1s(x) = J1b(x)`.
pub fn selfish_equilibrium_flow<T: Scalar>(ramp: &OnRamp<T>) -> Result<T> {
    let d = &ramp.coeffs;
    let slope = d.k_s + d.k_b;
    if slope <= T::zero() {
        return Err(Error::Degenerate("k_s + k_b = 0"));
    }
    Ok((d.k_s + d.b_s - d.b_b) / slope)
}

/// Unconstrained minimizer `Delta` of the social delay and the optimal
/// delay `J_opt` over `[0, 1]`.
///
/// Expanding the social delay in `x = x_hat_b` gives the leading term
/// `(k_s + k_b) x^2`; setting the derivative
/// `-2 k_s (1 - x) - b_s + 2 k_b x + b_b - n0 k_s + n2 k2` to zero yields
/// `Delta = (2 k_s + b_s - b_b + n0 k_s - n2 k2) / (2 (k_s + k_b))`.
pub fn social_optimum<T: Scalar>(ramp: &OnRamp<T>) -> Result<(T, T)> {
    let d = &ramp.coeffs;
    let curvature = d.k_s + d.k_b;
    if curvature <= T::zero() {
        return Err(Error::Degenerate("social delay is not strictly convex"));
    }
    let two = T::lit(2.0);
    let delta =
        (two * d.k_s + d.b_s - d.b_b + ramp.n0() * d.k_s - ramp.n2() * d.k2) / (two * curvature);
    let j_opt = ramp.social_delay(delta.max(T::zero()).min(T::one()));
    Ok((delta, j_opt))
}

/// Bypass proportion where the two perceived altruistic costs intersect at
/// effective altruism level `beta_e`: a weighted average of `Phi` and
/// `Delta` with weights `(1 - beta_e, 2 beta_e) / (1 + beta_e)`.
pub fn altruistic_intersection<T: Scalar>(phi: T, delta: T, beta_e: T) -> T {
    let one = T::one();
    ((one - beta_e) * phi + T::lit(2.0) * beta_e * delta) / (one + beta_e)
}

/// `Pi = (1 - Phi) / (2 Delta - Phi - 1)`.
pub fn pi_value<T: Scalar>(phi: T, delta: T) -> Result<T> {
    let denom = T::lit(2.0) * delta - phi - T::one();
    if denom == T::zero() {
        return Err(Error::SingularPi);
    }
    Ok((T::one() - phi) / denom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NotInGReason {
    PhiNotPositive,
    PhiNotBelowDelta,
    DeltaNotBelowOne,
}

impl fmt::Display for NotInGReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NotInGReason::PhiNotPositive => "Phi <= 0",
            NotInGReason::PhiNotBelowDelta => "Phi >= Delta",
            NotInGReason::DeltaNotBelowOne => "Delta >= 1",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    InG,
    NotInG(NotInGReason),
}

impl Membership {
    pub fn of<T: Scalar>(phi: T, delta: T) -> Self {
        if !(phi > T::zero()) {
            Membership::NotInG(NotInGReason::PhiNotPositive)
        } else if !(phi < delta) {
            Membership::NotInG(NotInGReason::PhiNotBelowDelta)
        } else if !(delta < T::one()) {
            Membership::NotInG(NotInGReason::DeltaNotBelowOne)
        } else {
            Membership::InG
        }
    }

    pub fn is_in_g(&self) -> bool {
        matches!(self, Membership::InG)
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::InG => f.write_str("InG"),
            Membership::NotInG(r) => write!(f, "NotInG({r})"),
        }
    }
}

/// A real interval with independently open or closed ends.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval<T> {
    pub lower: T,
    pub upper: T,
    pub lower_closed: bool,
    pub upper_closed: bool,
}

impl<T: Scalar> Interval<T> {
    pub fn contains(&self, x: T) -> bool {
        let above = if self.lower_closed {
            x >= self.lower
        } else {
            x > self.lower
        };
        let below = if self.upper_closed {
            x <= self.upper
        } else {
            x < self.upper
        };
        above && below
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}, {}{}",
            if self.lower_closed { '[' } else { '(' },
            self.lower,
            self.upper,
            if self.upper_closed { ']' } else { ')' }
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalysisSummary<T> {
    pub phi: T,
    pub delta: T,
    /// `None` exactly at the singularity `2 Delta - Phi - 1 = 0`.
    pub pi: Option<T>,
    pub j_opt: T,
    pub j_soc_at_phi: T,
    pub membership: Membership,
    /// Altruistic ratios that decrease the social delay: `(Phi, 1]`.
    pub a1: Interval<T>,
    /// Altruistic ratios that can reach the optimum: `[Delta, 1]`.
    pub a2: Interval<T>,
}

impl<T: Scalar> AnalysisSummary<T> {
    pub fn require_in_g(&self) -> Result<()> {
        match self.membership {
            Membership::InG => Ok(()),
            Membership::NotInG(r) => Err(Error::NotInG(r)),
        }
    }

    pub fn intersection(&self, beta_e: T) -> T {
        altruistic_intersection(self.phi, self.delta, beta_e)
    }
}

/// Computes every structural quantity of `ramp`.
pub fn analyze<T: Scalar>(ramp: &OnRamp<T>) -> Result<AnalysisSummary<T>> {
    let phi = selfish_equilibrium_flow(ramp)?;
    let (delta, j_opt) = social_optimum(ramp)?;
    let eps = T::epsilon();
    Ok(AnalysisSummary {
        phi,
        delta,
        pi: pi_value(phi, delta).ok(),
        j_opt,
        j_soc_at_phi: ramp.social_delay(phi),
        membership: Membership::of(phi, delta),
        a1: Interval {
            lower: phi,
            upper: T::one(),
            lower_closed: false,
            upper_closed: true,
        },
        a2: Interval {
            lower: delta.max(eps).min(T::one() - eps),
            upper: T::one(),
            lower_closed: true,
            upper_closed: true,
        },
    })
}

/// Bounds of the multiplicative error in the altruistic costs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorInterval<T> {
    lower: T,
    upper: T,
}

impl<T: Scalar> ErrorInterval<T> {
    pub fn new(lower: T, upper: T) -> Result<Self> {
        if !(lower > T::zero() && lower <= upper && upper.is_finite()) {
            return Err(Error::InvalidInterval {
                lower: lower.as_f64(),
                upper: upper.as_f64(),
            });
        }
        Ok(Self { lower, upper })
    }

    /// No uncertainty: `e = 1`.
    pub fn exact() -> Self {
        Self {
            lower: T::one(),
            upper: T::one(),
        }
    }

    pub fn lower(&self) -> T {
        self.lower
    }

    pub fn upper(&self) -> T {
        self.upper
    }

    /// The interval scaled by `factor > 0`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::new(self.lower * factor, self.upper * factor)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// `0 < Pi < sqrt(e_upper / e_lower)`.
    InG1,
    InG2,
    NotInG(NotInGReason),
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::InG1 => f.write_str("G1"),
            Classification::InG2 => f.write_str("G2"),
            Classification::NotInG(r) => write!(f, "NotInG({r})"),
        }
    }
}

/// Splits the meaningful set by the regime threshold. A singular `Pi`
/// falls in `G2`.
pub fn classify<T: Scalar>(
    summary: &AnalysisSummary<T>,
    interval: &ErrorInterval<T>,
) -> Classification {
    if let Membership::NotInG(r) = summary.membership {
        return Classification::NotInG(r);
    }
    let ratio = (interval.upper / interval.lower).sqrt();
    match summary.pi {
        Some(pi) if pi > T::zero() && pi < ratio => Classification::InG1,
        _ => Classification::InG2,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AltruismEffect {
    /// Altruists strictly decrease the social delay.
    pub decreases: bool,
    /// Altruists reach the optimal social delay.
    pub optimizes: bool,
}

/// Predicts whether `(alpha, beta)` decreases or optimizes the social delay.
pub fn altruism_effect<T: Scalar>(
    alpha: T,
    beta: T,
    summary: &AnalysisSummary<T>,
) -> Result<AltruismEffect> {
    summary.require_in_g()?;
    Ok(AltruismEffect {
        decreases: beta > T::zero() && summary.a1.contains(alpha),
        optimizes: beta == T::one() && summary.a2.contains(alpha),
    })
}

/// Builds a configuration with `c1t = c2t = 1` whose selfish split and
/// social optimum are the given targets.
///
/// `n0`, `c2m` and `k_s` are free; the remaining coefficients `mu`, `c1m`
/// and `gamma` are solved for. Fails when any solved coefficient would be
/// negative.
pub fn config_for_targets<T: Scalar>(
    phi: T,
    delta: T,
    n0: T,
    c2m: T,
    k_s: T,
) -> Result<OnRampConfig<T>> {
    if !(n0 > T::zero() && n0 < T::one()) {
        return Err(Error::InvalidConfig(format!(
            "n0 = {n0} must lie in (0, 1)"
        )));
    }
    let n2 = T::one() - n0;
    let b_b = n2;
    let k2 = T::one() + c2m * n2;
    let spread = T::lit(2.0) * delta - phi;
    if spread <= T::zero() {
        return Err(Error::InvalidConfig("need 2*Delta - Phi > 0".into()));
    }
    // (2 Delta - Phi) S = (1 + n0) k_s - n2 k2  and  Phi S = k_s + b_s - b_b
    let slope_sum = ((T::one() + n0) * k_s - n2 * k2) / spread;
    let mu = (phi * slope_sum - k_s + b_b) / n0;
    let c1m = (k_s - mu) / n0;
    let gamma = slope_sum - k_s - c2m * n2;
    let costs = CostCoefficients {
        c1t: T::one(),
        c1m,
        c2t: T::one(),
        c2m,
        mu,
        gamma,
    };
    OnRampConfig::new(n0, costs)
}
