//! The three decision criteria, each evaluated as a rate per unit time over
//! a [`Gamble`]:
//!
//! - expected wealth: `<dW> / dt` in money per month,
//! - expected utility: `<U(W + dW) - U(W)> / dt` in utils per month,
//! - time-average growth: `<ln((W + dW) / W)> / dt` per month, the almost-sure
//!   long-run growth rate when the gamble is repeated multiplicatively.
//!
//! Outcomes with zero probability never contribute, so a zero-probability
//! loss that would bankrupt the party does not make a rate undefined.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamble::{insurer_gamble, owner_gamble, ContractTerms, Gamble, PartyState, Role, VentureSpec};

/// `ln(to / from)` evaluated as `ln_1p((to - from) / from)`.
///
/// Shared by every log-ratio in the crate so that log utility and the
/// time-average growth rate agree to the last bit.
pub(crate) fn log_ratio(from: f64, to: f64) -> f64 {
    ((to - from) / from).ln_1p()
}

/// Utility functions admitted for the expected-utility criterion.
///
/// Only differences `U(w2) - U(w1)` are ever evaluated. The logarithm is only
/// applied to the dimensionless ratio `w2 / w1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UtilityFunction {
    /// `U(W) = scale * W^exponent` with `0 < exponent <= 1` and `scale > 0`.
    PowerMonomial {
        exponent: f64,
        scale: f64,
    },
    Logarithmic,
}

impl UtilityFunction {
    pub fn power(exponent: f64) -> Result<Self> {
        Self::scaled_power(exponent, 1.0)
    }

    pub fn scaled_power(exponent: f64, scale: f64) -> Result<Self> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(Error::invalid(
                "utility_exponent",
                format!("{exponent} is not in (0, 1]"),
            ));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::invalid("utility_scale", format!("{scale} must be > 0")));
        }
        Ok(UtilityFunction::PowerMonomial { exponent, scale })
    }

    pub fn sqrt() -> Self {
        UtilityFunction::PowerMonomial {
            exponent: 0.5,
            scale: 1.0,
        }
    }

    pub fn linear() -> Self {
        UtilityFunction::PowerMonomial {
            exponent: 1.0,
            scale: 1.0,
        }
    }

    fn in_domain(&self, wealth: f64) -> bool {
        match self {
            UtilityFunction::PowerMonomial { .. } => wealth.is_finite() && wealth >= 0.0,
            UtilityFunction::Logarithmic => wealth.is_finite() && wealth > 0.0,
        }
    }
}

/// `U(w_to) - U(w_from)`.
pub fn utility_difference(u: UtilityFunction, w_from: f64, w_to: f64) -> Result<f64> {
    for w in [w_from, w_to] {
        if !u.in_domain(w) {
            return Err(Error::Domain { wealth: w });
        }
    }
    Ok(match u {
        UtilityFunction::PowerMonomial { exponent, scale } => scale * (w_to.powf(exponent) - w_from.powf(exponent)),
        UtilityFunction::Logarithmic => log_ratio(w_from, w_to),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    MoneyPerTime,
    UtilPerTime,
    GrowthPerTime,
}

impl Units {
    pub fn label(&self) -> &'static str {
        match self {
            Units::MoneyPerTime => "money/month",
            Units::UtilPerTime => "utils/month",
            Units::GrowthPerTime => "1/month",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateValue {
    pub value: f64,
    pub units: Units,
}

impl RateValue {
    pub fn new(value: f64, units: Units) -> Self {
        Self { value, units }
    }

    pub fn checked_sub(&self, other: &RateValue) -> Result<RateValue> {
        if self.units != other.units {
            return Err(Error::UnitMismatch {
                left: self.units.label(),
                right: other.units.label(),
            });
        }
        Ok(RateValue::new(self.value - other.value, self.units))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Paradigm {
    ExpectedWealth,
    ExpectedUtility(UtilityFunction),
    TimeAverage,
}

impl Paradigm {
    pub fn units(&self) -> Units {
        match self {
            Paradigm::ExpectedWealth => Units::MoneyPerTime,
            Paradigm::ExpectedUtility(_) => Units::UtilPerTime,
            Paradigm::TimeAverage => Units::GrowthPerTime,
        }
    }

    pub fn short_name(&self) -> &'static str {
        match self {
            Paradigm::ExpectedWealth => "ew",
            Paradigm::ExpectedUtility(_) => "eu",
            Paradigm::TimeAverage => "ta",
        }
    }
}

/// Insured and uninsured rates for one party and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvaluationReport {
    pub paradigm: Paradigm,
    pub party: Role,
    pub rate_insured: RateValue,
    pub rate_uninsured: RateValue,
    pub delta: RateValue,
}

impl EvaluationReport {
    pub fn new(paradigm: Paradigm, party: Role, rate_insured: RateValue, rate_uninsured: RateValue) -> Result<Self> {
        let delta = rate_insured.checked_sub(&rate_uninsured)?;
        Ok(Self {
            paradigm,
            party,
            rate_insured,
            rate_uninsured,
            delta,
        })
    }
}

pub fn expected_wealth_rate(g: &Gamble) -> RateValue {
    RateValue::new(g.expectation() / g.duration(), Units::MoneyPerTime)
}

pub fn expected_utility_rate(g: &Gamble, wealth: f64, u: UtilityFunction) -> Result<RateValue> {
    let mut total = 0.0;
    for o in g.outcomes().iter().filter(|o| o.probability > 0.0) {
        total += o.probability * utility_difference(u, wealth, wealth + o.delta_wealth)?;
    }
    Ok(RateValue::new(total / g.duration(), Units::UtilPerTime))
}

/// Time-average growth rate of `wealth` under multiplicative repetition of `g`.
///
/// Fails with [`Error::Bankruptcy`] when an outcome with positive probability
/// takes wealth to zero or below; the rate is then negative infinity.
pub fn time_growth_rate(g: &Gamble, wealth: f64) -> Result<RateValue> {
    let mut total = 0.0;
    for o in g.outcomes().iter().filter(|o| o.probability > 0.0) {
        let end = wealth + o.delta_wealth;
        if !(end > 0.0) {
            return Err(Error::Bankruptcy {
                wealth,
                delta: o.delta_wealth,
                probability: o.probability,
            });
        }
        total += o.probability * log_ratio(wealth, end);
    }
    Ok(RateValue::new(total / g.duration(), Units::GrowthPerTime))
}

/// Rate of `g` for a party holding `wealth` under `paradigm`.
pub fn rate(paradigm: Paradigm, g: &Gamble, wealth: f64) -> Result<RateValue> {
    match paradigm {
        Paradigm::ExpectedWealth => Ok(expected_wealth_rate(g)),
        Paradigm::ExpectedUtility(u) => expected_utility_rate(g, wealth, u),
        Paradigm::TimeAverage => time_growth_rate(g, wealth),
    }
}

/// The gambles a party faces with and without the contract, in that order.
/// Without a contract the insurer does no business.
pub fn party_gambles(venture: &VentureSpec, contract: &ContractTerms, role: Role) -> (Gamble, Gamble) {
    match role {
        Role::Owner => (owner_gamble(venture, Some(contract)), owner_gamble(venture, None)),
        Role::Insurer => (
            insurer_gamble(contract, venture.loss_probability(), venture.duration())
                .expect("venture already validated"),
            Gamble::idle(venture.duration()).expect("venture duration is positive"),
        ),
    }
}

/// Change in `paradigm`'s rate from signing the contract.
pub fn evaluate(
    paradigm: Paradigm,
    venture: &VentureSpec,
    contract: &ContractTerms,
    party: &PartyState,
) -> Result<EvaluationReport> {
    let (insured, uninsured) = party_gambles(venture, contract, party.role());
    EvaluationReport::new(
        paradigm,
        party.role(),
        rate(paradigm, &insured, party.wealth())?,
        rate(paradigm, &uninsured, party.wealth())?,
    )
}

/// Expected-wealth change; `(pL - F)/dt` for the owner and `(F - pL)/dt` for
/// the insurer. Independent of either party's wealth.
pub fn expected_wealth_delta(venture: &VentureSpec, contract: &ContractTerms, role: Role) -> EvaluationReport {
    let (insured, uninsured) = party_gambles(venture, contract, role);
    EvaluationReport::new(
        Paradigm::ExpectedWealth,
        role,
        expected_wealth_rate(&insured),
        expected_wealth_rate(&uninsured),
    )
    .expect("same units")
}

pub fn expected_utility_delta(
    venture: &VentureSpec,
    contract: &ContractTerms,
    party: &PartyState,
    u: UtilityFunction,
) -> Result<EvaluationReport> {
    evaluate(Paradigm::ExpectedUtility(u), venture, contract, party)
}

pub fn time_growth_delta(
    venture: &VentureSpec,
    contract: &ContractTerms,
    party: &PartyState,
) -> Result<EvaluationReport> {
    evaluate(Paradigm::TimeAverage, venture, contract, party)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamble::Outcome;

    fn shipping() -> (VentureSpec, ContractTerms) {
        let v = VentureSpec::new(4000.0, 30000.0, 0.05, 1.0).unwrap();
        let c = v.contract(1800.0).unwrap();
        (v, c)
    }

    #[test]
    fn expected_wealth_rates() {
        let (v, c) = shipping();
        assert_eq!(expected_wealth_rate(&owner_gamble(&v, None)).value, 2300.0);
        assert_eq!(expected_wealth_rate(&owner_gamble(&v, Some(&c))).value, 2200.0);
        let zero = Gamble::certain(0.0, 1.0).unwrap();
        assert_eq!(expected_wealth_rate(&zero).value, 0.0);
    }

    #[test]
    fn expected_wealth_deltas() {
        let (v, c) = shipping();
        let own = expected_wealth_delta(&v, &c, Role::Owner);
        let ins = expected_wealth_delta(&v, &c, Role::Insurer);
        assert!((own.delta.value + 100.0).abs() < 1e-9);
        assert!((ins.delta.value - 100.0).abs() < 1e-9);
        assert_eq!(ins.rate_uninsured.value, 0.0);

        let fair = v.contract(1700.0).unwrap();
        assert!(expected_wealth_delta(&v, &fair, Role::Owner).delta.value.abs() < 1e-9);
        assert!(expected_wealth_delta(&v, &fair, Role::Insurer).delta.value.abs() < 1e-9);
    }

    #[test]
    fn utility_differences() {
        let d = utility_difference(UtilityFunction::sqrt(), 100000.0, 102200.0).unwrap();
        assert!((d - (102200f64.sqrt() - 100000f64.sqrt())).abs() < 1e-12);
        assert!((d - 3.4596).abs() < 5e-5);
        let l = utility_difference(UtilityFunction::Logarithmic, 100000.0, 104000.0).unwrap();
        assert!((l - 1.04f64.ln()).abs() < 1e-15);
        assert!((l - 0.0392207).abs() < 1e-7);
        for u in [
            UtilityFunction::sqrt(),
            UtilityFunction::Logarithmic,
            UtilityFunction::linear(),
        ] {
            assert_eq!(utility_difference(u, 5e4, 5e4).unwrap(), 0.0);
        }
    }

    #[test]
    fn utility_domain_errors() {
        assert_eq!(
            utility_difference(UtilityFunction::sqrt(), 100.0, -1.0),
            Err(Error::Domain { wealth: -1.0 })
        );
        assert!(utility_difference(UtilityFunction::sqrt(), 100.0, 0.0).is_ok());
        assert!(utility_difference(UtilityFunction::Logarithmic, 100.0, 0.0).is_err());
        assert!(utility_difference(UtilityFunction::Logarithmic, 0.0, 1.0).is_err());
        assert!(UtilityFunction::power(0.0).is_err());
        assert!(UtilityFunction::power(1.2).is_err());
        assert!(UtilityFunction::scaled_power(0.5, 0.0).is_err());
    }

    #[test]
    fn expected_utility_sqrt_example() {
        let (v, c) = shipping();
        let sqrt = UtilityFunction::sqrt();
        let un = expected_utility_rate(&owner_gamble(&v, None), 1e5, sqrt).unwrap();
        assert!((un.value - 3.37).abs() < 0.005);
        let ins = PartyState::insurer(1e6).unwrap();
        let r = expected_utility_delta(&v, &c, &ins, sqrt).unwrap();
        assert!((r.rate_insured.value - 0.043).abs() < 0.0005);
        assert_eq!(r.delta.value, r.rate_insured.value);

        let own = PartyState::owner(1e5).unwrap();
        let r = expected_utility_delta(&v, &c, &own, sqrt).unwrap();
        let brute =
            (102200f64.sqrt() - 1e5f64.sqrt()) - (0.95 * 104000f64.sqrt() + 0.05 * 70000f64.sqrt() - 1e5f64.sqrt());
        assert!((r.delta.value - brute).abs() < 1e-12);
        assert!((r.delta.value - 0.0928).abs() < 0.002);
    }

    #[test]
    fn expected_utility_of_null_gamble_is_zero() {
        let g = Gamble::new(vec![Outcome::new(0.0, 0.4), Outcome::new(0.0, 0.6)], 3.0).unwrap();
        for u in [UtilityFunction::sqrt(), UtilityFunction::Logarithmic] {
            assert_eq!(expected_utility_rate(&g, 10.0, u).unwrap().value, 0.0);
        }
    }

    #[test]
    fn expected_utility_outside_domain() {
        let (v, _) = shipping();
        let r = expected_utility_rate(&owner_gamble(&v, None), 20000.0, UtilityFunction::sqrt());
        assert_eq!(r, Err(Error::Domain { wealth: -10000.0 }));
    }

    #[test]
    fn time_growth_example() {
        let (v, c) = shipping();
        let un = time_growth_rate(&owner_gamble(&v, None), 1e5).unwrap();
        assert!((un.value - 0.019426).abs() < 1e-6);
        assert_eq!(un.units, Units::GrowthPerTime);
        let ins = time_growth_rate(&owner_gamble(&v, Some(&c)), 1e5).unwrap();
        assert!((ins.value - 1.022f64.ln()).abs() < 1e-16);

        let owner = PartyState::owner(1e5).unwrap();
        let d = time_growth_delta(&v, &c, &owner).unwrap();
        assert!((d.delta.value - 0.002335).abs() < 5e-6);
        let insurer = PartyState::insurer(1e6).unwrap();
        let d = time_growth_delta(&v, &c, &insurer).unwrap();
        let direct = 0.95 * 1.0018f64.ln() + 0.05 * 0.9678f64.ln();
        assert!((d.delta.value - direct).abs() < 1e-15);
        assert!((d.delta.value - 0.000072).abs() < 1e-6);
    }

    #[test]
    fn time_growth_bankruptcy() {
        let (v, c) = shipping();
        let poor = PartyState::insurer(20000.0).unwrap();
        assert!(matches!(
            time_growth_delta(&v, &c, &poor),
            Err(Error::Bankruptcy { .. })
        ));
        // zero-probability ruin is harmless
        let safe = VentureSpec::new(4000.0, 30000.0, 0.0, 1.0).unwrap();
        assert!(time_growth_rate(&owner_gamble(&safe, None), 20000.0).is_ok());
    }

    #[test]
    fn fair_fee_hurts_finite_insurer() {
        let (v, _) = shipping();
        let fair = v.contract(1700.0).unwrap();
        for w in [5e4, 1e6, 1e9] {
            let ins = PartyState::insurer(w).unwrap();
            assert!(time_growth_delta(&v, &fair, &ins).unwrap().delta.value < 0.0);
        }
    }

    #[test]
    fn unit_mismatch_is_rejected() {
        let a = RateValue::new(1.0, Units::MoneyPerTime);
        let b = RateValue::new(1.0, Units::GrowthPerTime);
        assert!(matches!(a.checked_sub(&b), Err(Error::UnitMismatch { .. })));
        assert!(EvaluationReport::new(Paradigm::TimeAverage, Role::Owner, a, b).is_err());
    }
}
