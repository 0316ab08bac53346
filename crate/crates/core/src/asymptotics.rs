//! Large-wealth behaviour of the insurer's time-average growth delta.
//!
//! For an insurer of wealth `W`,
//!
//! ```text
//! dg * dt = (1 - p) ln(1 + F/W) + p ln(1 + (F - L)/W)
//!         = (F - pL)/W - [(1 - p) F^2 + p (F - L)^2] / (2 W^2) + O(W^-3)
//! ```
//!
//! so `dg * W` approaches the expected-wealth delta `(F - pL)/dt` with a
//! residual of order `1/W`. The rows here are computed with `ln_1p` directly
//! from the contract terms, independently of the gamble evaluators.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gamble::{net_premium, ContractTerms, VentureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitSeriesRow {
    pub wealth: f64,
    /// Insurer's time-average growth delta, per month.
    pub delta_g: f64,
    /// `delta_g * wealth`, money per month.
    pub scaled_delta: f64,
    /// `scaled_delta - (F - pL)/dt`.
    pub residual: f64,
}

/// Expected-wealth delta for the insurer, `(F - pL)/dt`.
pub fn expected_wealth_limit(venture: &VentureSpec, contract: &ContractTerms) -> f64 {
    (contract.fee() - net_premium(contract, venture.loss_probability())) / venture.duration()
}

/// Coefficient `c` of the leading residual term `c / W`:
/// `-[(1 - p) F^2 + p (F - L)^2] / (2 dt)`.
pub fn second_order_coefficient(venture: &VentureSpec, contract: &ContractTerms) -> f64 {
    let p = venture.loss_probability();
    let fee = contract.fee();
    let net = fee - contract.insured_loss();
    -((1.0 - p) * fee * fee + p * net * net) / (2.0 * venture.duration())
}

fn insurer_growth_delta(venture: &VentureSpec, contract: &ContractTerms, wealth: f64) -> Result<f64> {
    let p = venture.loss_probability();
    let fee = contract.fee();
    let net = fee - contract.insured_loss();
    if p > 0.0 && !(wealth + net > 0.0) {
        return Err(Error::Bankruptcy {
            wealth,
            delta: net,
            probability: p,
        });
    }
    let keep = (1.0 - p) * (fee / wealth).ln_1p();
    let pay = if p > 0.0 { p * (net / wealth).ln_1p() } else { 0.0 };
    Ok((keep + pay) / venture.duration())
}

/// Insurer growth deltas on `wealth_grid` with their scaled values and
/// residuals against the expected-wealth limit.
pub fn limit_series(
    venture: &VentureSpec,
    contract: &ContractTerms,
    wealth_grid: &[f64],
) -> Result<Vec<LimitSeriesRow>> {
    let limit = expected_wealth_limit(venture, contract);
    wealth_grid
        .iter()
        .map(|&wealth| {
            if !(wealth.is_finite() && wealth > 0.0) {
                return Err(Error::invalid("wealth", format!("{wealth} must be > 0")));
            }
            let delta_g = insurer_growth_delta(venture, contract, wealth)?;
            let scaled_delta = delta_g * wealth;
            Ok(LimitSeriesRow {
                wealth,
                delta_g,
                scaled_delta,
                residual: scaled_delta - limit,
            })
        })
        .collect()
}

/// `start, start*factor, ...` up to and including `stop` (with a little slack
/// for rounding).
pub fn geometric_grid(start: f64, stop: f64, factor: f64) -> Result<Vec<f64>> {
    if !(start > 0.0 && start.is_finite()) {
        return Err(Error::invalid("start", format!("{start} must be > 0")));
    }
    if !(stop >= start && stop.is_finite()) {
        return Err(Error::invalid("stop", format!("{stop} must be >= start")));
    }
    if !(factor > 1.0 && factor.is_finite()) {
        return Err(Error::invalid("factor", format!("{factor} must be > 1")));
    }
    let steps = ((stop / start).ln() / factor.ln() + 1e-9).floor() as i32;
    Ok((0..=steps).map(|i| start * factor.powi(i)).collect())
}

/// Least-squares slope of `ln|residual|` against `ln(wealth)`.
pub fn residual_order_check(rows: &[LimitSeriesRow]) -> Result<f64> {
    if rows.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 rows, got {}",
            rows.len()
        )));
    }
    let mut points = Vec::with_capacity(rows.len());
    for r in rows {
        if !(r.residual != 0.0 && r.residual.is_finite()) {
            return Err(Error::DegenerateFit(format!(
                "residual {} at wealth {} cannot be logged",
                r.residual, r.wealth
            )));
        }
        points.push((r.wealth.ln(), r.residual.abs().ln()));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("wealth grid has no spread".into()));
    }
    Ok(sxy / sxx)
}

/// Time-average verdict for an insurer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    Finite(f64),
    /// A loss takes wealth to zero or below; the growth rate is `-inf`.
    Bankrupt,
}

/// An insurer that only looks at expected profit accepts any `F > pL`, even
/// when a single loss wipes it out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrapReport {
    pub applies: bool,
    pub expected_wealth_delta: f64,
    pub time_average: GrowthVerdict,
}

/// Checks whether a contract is attractive in expectation (`F > pL`) while
/// the loss would bankrupt the insurer (`L >= W + F`).
pub fn rothschild_stiglitz_trap(
    venture: &VentureSpec,
    contract: &ContractTerms,
    insurer_wealth: f64,
) -> Result<TrapReport> {
    if !(insurer_wealth.is_finite() && insurer_wealth > 0.0) {
        return Err(Error::invalid(
            "insurer_wealth",
            format!("{insurer_wealth} must be > 0"),
        ));
    }
    let expected_wealth_delta = expected_wealth_limit(venture, contract);
    let time_average = match insurer_growth_delta(venture, contract, insurer_wealth) {
        Ok(g) => GrowthVerdict::Finite(g),
        Err(Error::Bankruptcy { .. }) => GrowthVerdict::Bankrupt,
        Err(e) => return Err(e),
    };
    let ruinous = contract.insured_loss() >= insurer_wealth + contract.fee();
    let attractive = contract.fee() > net_premium(contract, venture.loss_probability());
    Ok(TrapReport {
        applies: attractive && ruinous && venture.loss_probability() > 0.0,
        expected_wealth_delta,
        time_average,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shipping() -> (VentureSpec, ContractTerms) {
        let v = VentureSpec::new(4000.0, 30000.0, 0.05, 1.0).unwrap();
        let c = v.contract(1800.0).unwrap();
        (v, c)
    }

    #[test]
    fn grid_construction() {
        let g = geometric_grid(1e6, 1e9, 10.0).unwrap();
        assert_eq!(g, vec![1e6, 1e7, 1e8, 1e9]);
        assert_eq!(geometric_grid(5.0, 5.0, 2.0).unwrap(), vec![5.0]);
        assert!(geometric_grid(0.0, 1.0, 2.0).is_err());
        assert!(geometric_grid(1.0, 0.5, 2.0).is_err());
        assert!(geometric_grid(1.0, 10.0, 1.0).is_err());
    }

    #[test]
    fn bankrupt_grid_point() {
        let (v, c) = shipping();
        assert!(matches!(
            limit_series(&v, &c, &[1e6, 2e4]),
            Err(Error::Bankruptcy { .. })
        ));
    }

    #[test]
    fn residual_identity() {
        let (v, c) = shipping();
        for r in limit_series(&v, &c, &[1e6, 1e7]).unwrap() {
            assert_eq!(r.residual, r.scaled_delta - 100.0);
        }
    }

    #[test]
    fn degenerate_fits() {
        let (v, c) = shipping();
        let rows = limit_series(&v, &c, &[1e6, 1e6]).unwrap();
        assert!(matches!(residual_order_check(&rows), Err(Error::DegenerateFit(_))));
        let rows = limit_series(&v, &c, &[1e6, 1e6, 1e6]).unwrap();
        assert!(matches!(residual_order_check(&rows), Err(Error::DegenerateFit(_))));
        let zero = LimitSeriesRow {
            wealth: 1.0,
            delta_g: 0.0,
            scaled_delta: 0.0,
            residual: 0.0,
        };
        assert!(residual_order_check(&[zero, zero, zero]).is_err());
    }

    #[test]
    fn full_fee_contract_still_first_order() {
        let v = VentureSpec::new(500.0, 1500.0, 0.3, 1.0).unwrap();
        let c = v.contract(2000.0).unwrap();
        let grid = geometric_grid(1e6, 1e9, 10.0).unwrap();
        let rows = limit_series(&v, &c, &grid).unwrap();
        let slope = residual_order_check(&rows).unwrap();
        assert!((slope + 1.0).abs() < 0.05, "{slope}");
    }

    #[test]
    fn trap_detection() {
        let (v, c) = shipping();
        let t = rothschild_stiglitz_trap(&v, &c, 20000.0).unwrap();
        assert!(t.applies);
        assert!((t.expected_wealth_delta - 100.0).abs() < 1e-9);
        assert_eq!(t.time_average, GrowthVerdict::Bankrupt);

        let t = rothschild_stiglitz_trap(&v, &c, 1e6).unwrap();
        assert!(!t.applies);
        assert!(matches!(t.time_average, GrowthVerdict::Finite(g) if g > 0.0));

        let cheap = v.contract(1700.0).unwrap();
        let t = rothschild_stiglitz_trap(&v, &cheap, 20000.0).unwrap();
        assert!(!t.applies);
        assert_eq!(t.time_average, GrowthVerdict::Bankrupt);
    }
}
