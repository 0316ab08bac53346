//! Ventures, contracts, parties and the one-period gambles they face.
//!
//! Money is plain `f64` in currency units and time is in months. Every type
//! validates on construction and is immutable afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on the sum of a gamble's probabilities.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

fn check_probability(field: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(field, format!("{p} is not in [0, 1]")));
    }
    Ok(())
}

fn check_non_negative(field: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::invalid(field, format!("{x} must be finite and >= 0")));
    }
    Ok(())
}

fn check_positive(field: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::invalid(field, format!("{x} must be finite and > 0")));
    }
    Ok(())
}

/// A risky venture: earn `gain` unless, with `loss_probability`, the asset
/// worth `replacement_cost` is lost. Resolves after `duration` months.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VentureSpec {
    gain: f64,
    replacement_cost: f64,
    loss_probability: f64,
    duration: f64,
}

impl VentureSpec {
    pub fn new(gain: f64, replacement_cost: f64, loss_probability: f64, duration: f64) -> Result<Self> {
        check_non_negative("gain", gain)?;
        check_non_negative("replacement_cost", replacement_cost)?;
        check_probability("loss_probability", loss_probability)?;
        check_positive("duration", duration)?;
        Ok(Self {
            gain,
            replacement_cost,
            loss_probability,
            duration,
        })
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn replacement_cost(&self) -> f64 {
        self.replacement_cost
    }

    pub fn loss_probability(&self) -> f64 {
        self.loss_probability
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// The loss a full-cover contract insures: lost gain plus replacement cost.
    pub fn insured_loss(&self) -> f64 {
        self.gain + self.replacement_cost
    }

    /// Full-cover contract on this venture at the given fee.
    pub fn contract(&self, fee: f64) -> Result<ContractTerms> {
        ContractTerms::new(self.insured_loss(), fee)
    }
}

/// Insurance contract: the insurer pays `insured_loss` if the loss occurs,
/// the owner pays `fee` up front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractTerms {
    insured_loss: f64,
    fee: f64,
}

impl ContractTerms {
    pub fn new(insured_loss: f64, fee: f64) -> Result<Self> {
        check_non_negative("insured_loss", insured_loss)?;
        check_non_negative("fee", fee)?;
        Ok(Self { insured_loss, fee })
    }

    pub fn insured_loss(&self) -> f64 {
        self.insured_loss
    }

    pub fn fee(&self) -> f64 {
        self.fee
    }

    pub fn with_fee(&self, fee: f64) -> Result<Self> {
        Self::new(self.insured_loss, fee)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Owner,
    Insurer,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Role::Owner => f.write_str("owner"),
            Role::Insurer => f.write_str("insurer"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartyState {
    wealth: f64,
    role: Role,
}

impl PartyState {
    pub fn new(role: Role, wealth: f64) -> Result<Self> {
        check_positive("wealth", wealth)?;
        Ok(Self { wealth, role })
    }

    pub fn owner(wealth: f64) -> Result<Self> {
        Self::new(Role::Owner, wealth)
    }

    pub fn insurer(wealth: f64) -> Result<Self> {
        Self::new(Role::Insurer, wealth)
    }

    pub fn wealth(&self) -> f64 {
        self.wealth
    }

    pub fn role(&self) -> Role {
        self.role
    }
}

/// One possible change in wealth and its probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Outcome {
    pub delta_wealth: f64,
    pub probability: f64,
}

impl Outcome {
    pub fn new(delta_wealth: f64, probability: f64) -> Self {
        Self {
            delta_wealth,
            probability,
        }
    }
}

/// A finite distribution of wealth changes over one period of `duration`.
///
/// Probabilities must already sum to one; nothing is renormalized.
/// Zero-probability outcomes are kept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gamble {
    outcomes: Vec<Outcome>,
    duration: f64,
}

impl Gamble {
    pub fn new(outcomes: Vec<Outcome>, duration: f64) -> Result<Self> {
        check_positive("duration", duration)?;
        if outcomes.is_empty() {
            return Err(Error::invalid("outcomes", "a gamble needs at least one outcome"));
        }
        for o in &outcomes {
            check_probability("probability", o.probability)?;
            if !o.delta_wealth.is_finite() {
                return Err(Error::invalid(
                    "delta_wealth",
                    format!("{} is not finite", o.delta_wealth),
                ));
            }
        }
        let total: f64 = outcomes.iter().map(|o| o.probability).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::invalid(
                "probability",
                format!("probabilities sum to {total}, not 1"),
            ));
        }
        Ok(Self { outcomes, duration })
    }

    /// The certain outcome `delta_wealth`.
    pub fn certain(delta_wealth: f64, duration: f64) -> Result<Self> {
        Self::new(vec![Outcome::new(delta_wealth, 1.0)], duration)
    }

    /// No business: wealth unchanged with certainty.
    pub fn idle(duration: f64) -> Result<Self> {
        Self::certain(0.0, duration)
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Expected change in wealth over one period.
    pub fn expectation(&self) -> f64 {
        self.outcomes.iter().map(|o| o.probability * o.delta_wealth).sum()
    }

    /// True when at most one distinct wealth change has positive probability.
    pub fn is_degenerate(&self) -> bool {
        let mut live = self.outcomes.iter().filter(|o| o.probability > 0.0);
        match live.next() {
            Some(first) => live.all(|o| o.delta_wealth == first.delta_wealth),
            None => true,
        }
    }
}

/// The owner's gamble: the bare venture, or the certain `G - F` when insured.
pub fn owner_gamble(venture: &VentureSpec, contract: Option<&ContractTerms>) -> Gamble {
    let p = venture.loss_probability;
    let outcomes = match contract {
        None => vec![
            Outcome::new(venture.gain, 1.0 - p),
            Outcome::new(-venture.replacement_cost, p),
        ],
        Some(c) => vec![Outcome::new(venture.gain - c.fee, 1.0)],
    };
    Gamble {
        outcomes,
        duration: venture.duration,
    }
}

/// The insurer's gamble: keep the fee, or pay out `L` less the fee on a loss.
pub fn insurer_gamble(contract: &ContractTerms, loss_probability: f64, duration: f64) -> Result<Gamble> {
    check_probability("loss_probability", loss_probability)?;
    check_positive("duration", duration)?;
    Ok(Gamble {
        outcomes: vec![
            Outcome::new(contract.fee, 1.0 - loss_probability),
            Outcome::new(contract.fee - contract.insured_loss, loss_probability),
        ],
        duration,
    })
}

/// Expected claim cost `p * L`.
pub fn net_premium(contract: &ContractTerms, loss_probability: f64) -> f64 {
    loss_probability * contract.insured_loss
}
