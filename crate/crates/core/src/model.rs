//! On-ramp configuration, flow distributions and the delay models.
//!
//! Mainline lane-1 vehicles either stay *steadfast* (and merge with the
//! on-ramp traffic on lane 0) or *bypass* to lane 2. Every delay is an affine
//! function of the total bypass proportion `x_hat_b`:
//!
//! ```text
//! J1s(x) = Ks (1 - x) + Bs      J1b(x) = Kb x + Bb
//! J0(x)  = J1s(x)               J2(x)  = K2 x + Bb
//! ```
//!
//! with `Ks = C1t mu + C1m n0`, `Bs = C1t mu n0`, `Kb = C2t gamma + C2m n2`,
//! `Bb = C2t n2` and `K2 = C2t + C2m n2`.

use std::fmt;

use crate::error::{domain, Error, Result};
use crate::Scalar;

/// Normalized neighboring flows on the on-ramp (`n0`) and lane 2 (`n2`).
///
/// Only `n0` is supplied; `n2 = 1 - n0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborFlows<T> {
    n0: T,
    n2: T,
}

impl<T: Scalar> NeighborFlows<T> {
    pub fn new(n0: T) -> Result<Self> {
        if !(n0 >= T::zero() && n0 <= T::one()) {
            return Err(Error::InvalidConfig(format!(
                "n0 = {n0} must lie in [0, 1]"
            )));
        }
        Ok(Self {
            n0,
            n2: T::one() - n0,
        })
    }

    pub fn n0(&self) -> T {
        self.n0
    }

    pub fn n2(&self) -> T {
        self.n2
    }
}

/// Delay-model coefficients. All must be finite and non-negative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CostCoefficients<T> {
    pub c1t: T,
    pub c1m: T,
    pub c2t: T,
    pub c2m: T,
    /// Merge amplification factor.
    pub mu: T,
    /// Lane-change amplification factor.
    pub gamma: T,
}

impl<T: Scalar> CostCoefficients<T> {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("c1t", self.c1t),
            ("c1m", self.c1m),
            ("c2t", self.c2t),
            ("c2m", self.c2m),
            ("mu", self.mu),
            ("gamma", self.gamma),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v >= T::zero()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} = {v} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Coefficients calibrated for a simulated two-lane on-ramp:
    /// `C1t = C2t = 1, C1m = 21.3, C2m = 1, mu = 2.4, gamma = 8.6`.
    pub fn calibrated() -> Self {
        Self {
            c1t: T::one(),
            c1m: T::lit(21.3),
            c2t: T::one(),
            c2m: T::one(),
            mu: T::lit(2.4),
            gamma: T::lit(8.6),
        }
    }

    pub fn zero() -> Self {
        Self {
            c1t: T::zero(),
            c1m: T::zero(),
            c2t: T::zero(),
            c2m: T::zero(),
            mu: T::zero(),
            gamma: T::zero(),
        }
    }
}

/// The full on-ramp configuration `G = (N, C)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnRampConfig<T> {
    flows: NeighborFlows<T>,
    costs: CostCoefficients<T>,
}

impl<T: Scalar> OnRampConfig<T> {
    pub fn new(n0: T, costs: CostCoefficients<T>) -> Result<Self> {
        let flows = NeighborFlows::new(n0)?;
        costs.validate()?;
        Ok(Self { flows, costs })
    }

    pub fn flows(&self) -> &NeighborFlows<T> {
        &self.flows
    }

    pub fn costs(&self) -> &CostCoefficients<T> {
        &self.costs
    }

    pub fn n0(&self) -> T {
        self.flows.n0
    }

    pub fn n2(&self) -> T {
        self.flows.n2
    }

    pub fn derive_coefficients(&self) -> DerivedCoefficients<T> {
        let c = &self.costs;
        let (n0, n2) = (self.flows.n0, self.flows.n2);
        DerivedCoefficients {
            k_s: c.c1t * c.mu + c.c1m * n0,
            b_s: c.c1t * c.mu * n0,
            k_b: c.c2t * c.gamma + c.c2m * n2,
            b_b: c.c2t * n2,
            k2: c.c2t + c.c2m * n2,
        }
    }
}

/// Affine delay constants for one configuration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCoefficients<T> {
    pub k_s: T,
    pub b_s: T,
    pub k_b: T,
    pub b_b: T,
    pub k2: T,
}

/// Travel delays on every lane at one bypass proportion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DelayProfile<T> {
    /// Steadfast lane-1 vehicles.
    pub j1s: T,
    /// Bypassing lane-1 vehicles.
    pub j1b: T,
    /// On-ramp vehicles.
    pub j0: T,
    /// Lane-2 vehicles.
    pub j2: T,
}

/// Costs perceived by altruistic vehicles for the two options.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AltruisticCostPair<T> {
    pub steadfast_cost: T,
    pub bypass_cost: T,
}

/// A configuration together with its derived coefficients.
///
/// This is the value every analysis routine works from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnRamp<T> {
    pub config: OnRampConfig<T>,
    pub coeffs: DerivedCoefficients<T>,
}

impl<T: Scalar> OnRamp<T> {
    pub fn new(config: OnRampConfig<T>) -> Self {
        Self {
            coeffs: config.derive_coefficients(),
            config,
        }
    }

    pub fn n0(&self) -> T {
        self.config.n0()
    }

    pub fn n2(&self) -> T {
        self.config.n2()
    }

    /// Delays at `x_hat_b`, which must be a proportion.
    pub fn delays(&self, x_hat_b: T) -> Result<DelayProfile<T>> {
        check_proportion("x_hat_b", x_hat_b)?;
        Ok(self.delays_affine(x_hat_b))
    }

    /// Delays extended affinely to all of the real line.
    pub fn delays_affine(&self, x_hat_b: T) -> DelayProfile<T> {
        let d = &self.coeffs;
        let j1s = d.k_s * (T::one() - x_hat_b) + d.b_s;
        DelayProfile {
            j1s,
            j1b: d.k_b * x_hat_b + d.b_b,
            j0: j1s,
            j2: d.k2 * x_hat_b + d.b_b,
        }
    }

    /// Flow-weighted total delay over lane 1, the on-ramp and lane 2.
    ///
    /// Defined for any real `x_hat_b`; the result is a convex quadratic.
    pub fn social_delay(&self, x_hat_b: T) -> T {
        let j = self.delays_affine(x_hat_b);
        (T::one() - x_hat_b) * j.j1s + x_hat_b * j.j1b + self.n0() * j.j0 + self.n2() * j.j2
    }

    /// Perceived altruistic costs with altruism level `beta` and
    /// multiplicative error `e`. Only the product `beta * e` matters.
    pub fn altruistic_costs(&self, x_hat_b: T, beta: T, e: T) -> Result<AltruisticCostPair<T>> {
        check_proportion("x_hat_b", x_hat_b)?;
        if !(beta >= T::zero() && beta.is_finite()) {
            return Err(domain("beta", beta, "[0, inf)"));
        }
        if !(e > T::zero() && e.is_finite()) {
            return Err(domain("e", e, "(0, inf)"));
        }
        Ok(self.altruistic_costs_effective(x_hat_b, beta * e))
    }

    /// Perceived altruistic costs at an effective altruism level `beta_e`,
    /// without domain checks.
    pub fn altruistic_costs_effective(&self, x_hat_b: T, beta_e: T) -> AltruisticCostPair<T> {
        let d = &self.coeffs;
        let j = self.delays_affine(x_hat_b);
        AltruisticCostPair {
            steadfast_cost: j.j1s + beta_e * d.k_s * ((T::one() - x_hat_b) + self.n0()),
            bypass_cost: j.j1b + beta_e * (d.k_b * x_hat_b + d.k2 * self.n2()),
        }
    }
}

pub(crate) fn check_proportion<T: Scalar>(what: &'static str, x: T) -> Result<()> {
    if x >= T::zero() && x <= T::one() {
        Ok(())
    } else {
        Err(domain(what, x, "[0, 1]"))
    }
}

/// Altruistic ratio and altruism level.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PopulationParams<T> {
    alpha: T,
    beta: T,
}

impl<T: Scalar> PopulationParams<T> {
    pub fn new(alpha: T, beta: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidPopulation(format!(
                "alpha = {alpha} must lie in [0, 1]"
            )));
        }
        if !(beta >= T::zero() && beta.is_finite()) {
            return Err(Error::InvalidPopulation(format!(
                "beta = {beta} must be finite and non-negative"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }
}

/// Lane-1 flow split `(x1s, x1b, x~1s, x~1b)` by class and option.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowDistribution<T> {
    pub x_s_selfish: T,
    pub x_b_selfish: T,
    pub x_s_altruistic: T,
    pub x_b_altruistic: T,
}

impl<T: Scalar> FlowDistribution<T> {
    pub fn new(x_s_selfish: T, x_b_selfish: T, x_s_altruistic: T, x_b_altruistic: T) -> Self {
        Self {
            x_s_selfish,
            x_b_selfish,
            x_s_altruistic,
            x_b_altruistic,
        }
    }

    /// Builds the split from the two bypass masses; steadfast masses fill
    /// the remainder of each class.
    pub fn from_bypass(alpha: T, x_b_selfish: T, x_b_altruistic: T) -> Self {
        Self {
            x_s_selfish: T::one() - alpha - x_b_selfish,
            x_b_selfish,
            x_s_altruistic: alpha - x_b_altruistic,
            x_b_altruistic,
        }
    }

    pub fn x_hat_s(&self) -> T {
        self.x_s_selfish + self.x_s_altruistic
    }

    pub fn x_hat_b(&self) -> T {
        self.x_b_selfish + self.x_b_altruistic
    }

    pub fn components(&self) -> [(FlowComponent, T); 4] {
        [
            (FlowComponent::SelfishSteadfast, self.x_s_selfish),
            (FlowComponent::SelfishBypass, self.x_b_selfish),
            (FlowComponent::AltruisticSteadfast, self.x_s_altruistic),
            (FlowComponent::AltruisticBypass, self.x_b_altruistic),
        ]
    }

    /// Checks the feasibility constraints for altruistic ratio `alpha`.
    pub fn validate(&self, alpha: T, tol: T) -> FeasibilityReport<T> {
        let mut violations = Vec::new();
        let selfish = self.x_s_selfish + self.x_b_selfish - (T::one() - alpha);
        if selfish.abs() > tol {
            violations.push(Violation {
                constraint: Constraint::SelfishMass,
                residual: selfish,
            });
        }
        let altruistic = self.x_s_altruistic + self.x_b_altruistic - alpha;
        if altruistic.abs() > tol {
            violations.push(Violation {
                constraint: Constraint::AltruisticMass,
                residual: altruistic,
            });
        }
        for (component, v) in self.components() {
            if v < -tol {
                violations.push(Violation {
                    constraint: Constraint::NonNegative(component),
                    residual: v,
                });
            }
        }
        FeasibilityReport { violations }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowComponent {
    SelfishSteadfast,
    SelfishBypass,
    AltruisticSteadfast,
    AltruisticBypass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Constraint {
    /// `x1s + x1b = 1 - alpha`
    SelfishMass,
    /// `x~1s + x~1b = alpha`
    AltruisticMass,
    NonNegative(FlowComponent),
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::SelfishMass => write!(f, "selfish mass x1s + x1b = 1 - alpha"),
            Constraint::AltruisticMass => write!(f, "altruistic mass x~1s + x~1b = alpha"),
            Constraint::NonNegative(c) => write!(f, "non-negativity of {c:?}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation<T> {
    pub constraint: Constraint,
    /// Signed residual: the constraint's left minus right side, or the
    /// offending component value for non-negativity.
    pub residual: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport<T> {
    pub violations: Vec<Violation<T>>,
}

impl<T> FeasibilityReport<T> {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}
