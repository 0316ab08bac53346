//! Break-even fees and win-win fee intervals.
//!
//! Every delta used here is monotone in the fee: decreasing for the owner,
//! increasing for the insurer. Plain bisection is therefore enough and stays
//! well-behaved next to the bankruptcy singularity, where Newton steps would
//! overshoot.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamble::{net_premium, PartyState, Role, VentureSpec};
use crate::paradigms::{evaluate, party_gambles, rate, Paradigm};

/// Relative bracket width at which bisection stops.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;
/// Distance kept from a bankruptcy boundary when building default brackets.
pub const DOMAIN_MARGIN: f64 = 0.01;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection {
    pub root: f64,
    pub iterations: usize,
}

/// Bisection on `[a, b]` (either order). Only the sign of `f` is used, so
/// infinite values are fine; NaN is not.
pub fn bisect<F>(f: F, a: f64, b: f64) -> Result<Bisection>
where
    F: Fn(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let f_lo = f(lo)?;
    if f_lo == 0.0 {
        return Ok(Bisection {
            root: lo,
            iterations: 0,
        });
    }
    let f_hi = f(hi)?;
    if f_hi == 0.0 {
        return Ok(Bisection {
            root: hi,
            iterations: 0,
        });
    }
    if f_lo.is_nan() || f_hi.is_nan() || (f_lo > 0.0) == (f_hi > 0.0) {
        return Err(Error::NoRootInBracket { lower: lo, upper: hi });
    }
    let lo_positive = f_lo > 0.0;
    let mut iterations = 0;
    while hi - lo > RELATIVE_TOLERANCE * lo.abs().max(hi.abs()).max(1.0) && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(Bisection { root: mid, iterations });
        }
        if (f_mid > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Bisection {
        root: 0.5 * (lo + hi),
        iterations,
    })
}

/// Change in `paradigm`'s rate for `party` when signing a full-cover
/// contract on `venture` at `fee`.
pub fn fee_delta(paradigm: Paradigm, venture: &VentureSpec, party: &PartyState, fee: f64) -> Result<f64> {
    let contract = venture.contract(fee)?;
    Ok(evaluate(paradigm, venture, &contract, party)?.delta.value)
}

/// Like [`fee_delta`], but leaving the rate's domain maps to an infinity
/// instead of an error: `-inf` when the insured position is ruinous, `+inf`
/// when only the uninsured one is.
pub fn signed_delta(paradigm: Paradigm, venture: &VentureSpec, party: &PartyState, fee: f64) -> Result<f64> {
    let contract = venture.contract(fee)?;
    let (insured, uninsured) = party_gambles(venture, &contract, party.role());
    let outside = |e: &Error| matches!(e, Error::Bankruptcy { .. } | Error::Domain { .. });
    let with = match rate(paradigm, &insured, party.wealth()) {
        Ok(r) => r,
        Err(e) if outside(&e) => return Ok(f64::NEG_INFINITY),
        Err(e) => return Err(e),
    };
    let without = match rate(paradigm, &uninsured, party.wealth()) {
        Ok(r) => r,
        Err(e) if outside(&e) => return Ok(f64::INFINITY),
        Err(e) => return Err(e),
    };
    Ok(with.checked_sub(&without)?.value)
}

/// Bracket on which `role`'s delta is finite and changes sign in the usual case.
///
/// The owner can pay at most `W + G`; an insurer with `W < L` cannot accept
/// fees at or below `L - W` without risking ruin. Under expected wealth the
/// root is `pL`, which always lies in `[0, L]`.
pub fn default_bracket(paradigm: Paradigm, role: Role, venture: &VentureSpec, wealth: f64) -> (f64, f64) {
    let loss = venture.insured_loss();
    if let Paradigm::ExpectedWealth = paradigm {
        return (0.0, loss);
    }
    match role {
        Role::Owner => (0.0, (wealth + venture.gain() - DOMAIN_MARGIN).max(0.0)),
        Role::Insurer => {
            let lower = if venture.loss_probability() > 0.0 && loss >= wealth {
                loss - wealth + DOMAIN_MARGIN
            } else {
                0.0
            };
            (lower, loss + wealth)
        }
    }
}

/// Fee at which `role`'s delta crosses zero inside `bracket`.
pub fn break_even_fee(
    paradigm: Paradigm,
    role: Role,
    venture: &VentureSpec,
    wealth: f64,
    bracket: (f64, f64),
) -> Result<f64> {
    let party = PartyState::new(role, wealth)?;
    Ok(bisect(|fee| fee_delta(paradigm, venture, &party, fee), bracket.0, bracket.1)?.root)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalKind {
    Empty,
    /// A single fee at which both deltas are exactly zero.
    Degenerate,
    Proper,
}

/// Open interval of fees at which both parties gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeeInterval {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub paradigm: Paradigm,
    pub kind: IntervalKind,
}

impl FeeInterval {
    pub fn empty(paradigm: Paradigm) -> Self {
        Self {
            lower: None,
            upper: None,
            paradigm,
            kind: IntervalKind::Empty,
        }
    }

    pub fn degenerate(paradigm: Paradigm, fee: f64) -> Self {
        Self {
            lower: Some(fee),
            upper: Some(fee),
            paradigm,
            kind: IntervalKind::Degenerate,
        }
    }

    pub fn proper(paradigm: Paradigm, lower: f64, upper: f64) -> Self {
        assert!(lower < upper, "proper interval needs lower < upper");
        Self {
            lower: Some(lower),
            upper: Some(upper),
            paradigm,
            kind: IntervalKind::Proper,
        }
    }

    /// Whether both parties strictly gain at `fee`.
    pub fn contains(&self, fee: f64) -> bool {
        match (self.kind, self.lower, self.upper) {
            (IntervalKind::Proper, Some(lo), Some(hi)) => lo < fee && fee < hi,
            _ => false,
        }
    }
}

/// Supremum of the owner's positive-delta fees (0 when there are none).
fn owner_boundary(paradigm: Paradigm, venture: &VentureSpec, owner: &PartyState) -> Result<f64> {
    let f = |fee| signed_delta(paradigm, venture, owner, fee);
    let ceiling = owner.wealth() + venture.gain();
    let (lo, hi) = default_bracket(paradigm, Role::Owner, venture, owner.wealth());
    if f(lo)? <= 0.0 {
        return Ok(lo);
    }
    if f(hi)? > 0.0 {
        return Ok(ceiling);
    }
    Ok(bisect(f, lo, hi)?.root)
}

/// Infimum of the insurer's positive-delta fees.
fn insurer_boundary(paradigm: Paradigm, venture: &VentureSpec, insurer: &PartyState) -> Result<f64> {
    let f = |fee| signed_delta(paradigm, venture, insurer, fee);
    let (lo, hi) = default_bracket(paradigm, Role::Insurer, venture, insurer.wealth());
    if f(lo)? >= 0.0 {
        return Ok(if lo > 0.0 { lo - DOMAIN_MARGIN } else { lo });
    }
    if f(hi)? <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(bisect(f, lo, hi)?.root)
}

/// Fees at which both the owner's and the insurer's deltas are strictly positive.
///
/// Under expected wealth the deltas are exact negatives of each other, so the
/// best possible outcome is the degenerate point `F = pL` where both vanish.
pub fn win_win_interval(
    paradigm: Paradigm,
    venture: &VentureSpec,
    owner: &PartyState,
    insurer: &PartyState,
) -> FeeInterval {
    if let Paradigm::ExpectedWealth = paradigm {
        let fair = venture
            .contract(0.0)
            .map(|c| net_premium(&c, venture.loss_probability()))
            .unwrap_or(0.0);
        return FeeInterval::degenerate(paradigm, fair);
    }
    let bounds =
        owner_boundary(paradigm, venture, owner).and_then(|up| Ok((insurer_boundary(paradigm, venture, insurer)?, up)));
    let Ok((lower, upper)) = bounds else {
        return FeeInterval::empty(paradigm);
    };
    if lower < upper {
        FeeInterval::proper(paradigm, lower, upper)
    } else if lower == upper {
        let zero_at = |p: &PartyState| matches!(fee_delta(paradigm, venture, p, lower), Ok(d) if d == 0.0);
        if zero_at(owner) && zero_at(insurer) {
            FeeInterval::degenerate(paradigm, lower)
        } else {
            FeeInterval::empty(paradigm)
        }
    } else {
        FeeInterval::empty(paradigm)
    }
}

/// Both parties' deltas at one fee; a non-finite delta marks bankruptcy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub fee: f64,
    pub owner_delta: f64,
    pub insurer_delta: f64,
}

impl SweepPoint {
    pub fn owner_bankrupt(&self) -> bool {
        !self.owner_delta.is_finite()
    }

    pub fn insurer_bankrupt(&self) -> bool {
        !self.insurer_delta.is_finite()
    }
}

/// Evaluates both deltas on every fee of `fee_grid`, in grid order.
pub fn fee_sweep(
    paradigm: Paradigm,
    venture: &VentureSpec,
    owner: &PartyState,
    insurer: &PartyState,
    fee_grid: &[f64],
) -> Result<Vec<SweepPoint>> {
    fee_grid
        .par_iter()
        .map(|&fee| {
            Ok(SweepPoint {
                fee,
                owner_delta: signed_delta(paradigm, venture, owner, fee)?,
                insurer_delta: signed_delta(paradigm, venture, insurer, fee)?,
            })
        })
        .collect()
}
