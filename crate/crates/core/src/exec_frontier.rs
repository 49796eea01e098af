//! Discrete-time optimal liquidation with linear permanent and temporary
//! impact under arithmetic Brownian motion.
//!
//! Selling `n_k = x_{k-1} - x_k` units in period `k` costs in expectation
//!
//! ```text
//! E = gamma * X^2 / 2 + (eta - gamma * tau / 2) / tau * sum n_k^2
//! V = sigma^2 * tau * sum_{k=1..N} x_k^2
//! ```
//!
//! and the minimizer of `E + lambda * V` is
//! `x_j = X * sinh(kappa * (N - j) * tau) / sinh(kappa * N * tau)` with
//! `2 * (cosh(kappa * tau) - 1) / tau^2 = lambda * sigma^2 / eta_adj`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionModel {
    pub total_units: f64,
    pub periods: usize,
    pub period_length: f64,
    /// Price standard deviation per unit time, USD.
    pub volatility: f64,
    /// Permanent price change per unit sold.
    pub permanent_coeff: f64,
    /// Temporary cost per unit of trading rate.
    pub temporary_coeff: f64,
    pub risk_aversion: f64,
}

impl ExecutionModel {
    /// Desk-scale defaults: ten unit periods, 2% volatility on a 100 USD
    /// asset, and a temporary coefficient twenty times the ill-posedness
    /// bound.
    pub fn desk_default() -> Self {
        ExecutionModel {
            total_units: 1e6,
            periods: 10,
            period_length: 1.0,
            volatility: 0.02 * 100.0,
            permanent_coeff: 2.5e-7,
            temporary_coeff: 2.5e-6,
            risk_aversion: 1e-6,
        }
    }

    pub fn with_risk_aversion(mut self, lambda: f64) -> Self {
        self.risk_aversion = lambda;
        self
    }

    /// `eta - gamma * tau / 2`.
    pub fn adjusted_temporary(&self) -> f64 {
        self.temporary_coeff - 0.5 * self.permanent_coeff * self.period_length
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::out_of_range(name, v))
            }
        };
        let non_negative = |name: &'static str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::out_of_range(name, v))
            }
        };
        positive("total units", self.total_units)?;
        positive("period length", self.period_length)?;
        positive("temporary coefficient", self.temporary_coeff)?;
        non_negative("volatility", self.volatility)?;
        non_negative("permanent coefficient", self.permanent_coeff)?;
        non_negative("risk aversion", self.risk_aversion)?;
        if self.periods == 0 {
            return Err(Error::InvalidParameter("periods must be at least 1".into()));
        }
        if self.adjusted_temporary() <= 0.0 {
            return Err(Error::IllPosed {
                eta: self.temporary_coeff,
                bound: 0.5 * self.permanent_coeff * self.period_length,
            });
        }
        Ok(())
    }

    /// Urgency `kappa`, zero when risk-neutral or volatility-free.
    pub fn kappa(&self) -> f64 {
        let kappa_tilde_sq = self.risk_aversion * self.volatility.powi(2) / self.adjusted_temporary();
        // cosh(k tau) - 1 = 2 sinh^2(k tau / 2), solved without cancellation
        2.0 / self.period_length * (0.5 * self.period_length * kappa_tilde_sq.sqrt()).asinh()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// x_0 ..= x_N.
    pub holdings: Vec<f64>,
    pub expected_cost: f64,
    pub cost_variance: f64,
}

impl Trajectory {
    /// Units sold in each period, n_1 ..= n_N.
    pub fn trades(&self) -> Vec<f64> {
        self.holdings.windows(2).map(|w| w[0] - w[1]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontierPoint {
    pub risk_aversion: f64,
    pub expected_cost: f64,
    pub cost_variance: f64,
}

/// Expected cost and variance of an arbitrary holdings path.
pub fn cost_of(holdings: &[f64], model: &ExecutionModel) -> Result<(f64, f64)> {
    model.validate()?;
    if holdings.len() != model.periods + 1 {
        return Err(Error::InadmissibleTrajectory(format!(
            "expected {} holdings, got {}",
            model.periods + 1,
            holdings.len()
        )));
    }
    if holdings[0] != model.total_units || *holdings.last().unwrap() != 0.0 {
        return Err(Error::InadmissibleTrajectory("must start at total units and end at zero".into()));
    }
    if holdings.iter().any(|x| !x.is_finite()) {
        return Err(Error::InadmissibleTrajectory("non-finite holding".into()));
    }
    let tau = model.period_length;
    let x = model.total_units;
    let impact: f64 = holdings.windows(2).map(|w| (w[0] - w[1]).powi(2)).sum();
    let expected = 0.5 * model.permanent_coeff * x * x + model.adjusted_temporary() / tau * impact;
    let variance = model.volatility.powi(2) * tau * holdings[1..].iter().map(|h| h * h).sum::<f64>();
    Ok((expected, variance))
}

/// The efficient trajectory for the model's risk aversion.
pub fn optimal_trajectory(model: &ExecutionModel) -> Result<Trajectory> {
    model.validate()?;
    let n = model.periods;
    let x = model.total_units;
    let kappa = model.kappa();
    let horizon = n as f64 * model.period_length;

    let mut holdings: Vec<f64> = if kappa == 0.0 {
        (0..=n).map(|j| x * (n - j) as f64 / n as f64).collect()
    } else {
        let denom = (kappa * horizon).sinh();
        (0..=n).map(|j| x * (kappa * (n - j) as f64 * model.period_length).sinh() / denom).collect()
    };
    holdings[0] = x;
    holdings[n] = 0.0;

    let (expected_cost, cost_variance) = cost_of(&holdings, model)?;
    Ok(Trajectory { holdings, expected_cost, cost_variance })
}

/// One point per risk aversion, in input order.
pub fn frontier(model: &ExecutionModel, lambdas: &[f64]) -> Result<Vec<FrontierPoint>> {
    if lambdas.is_empty() {
        return Err(Error::EmptyGrid("risk aversions"));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let t = optimal_trajectory(&model.with_risk_aversion(lambda))?;
            Ok(FrontierPoint { risk_aversion: lambda, expected_cost: t.expected_cost, cost_variance: t.cost_variance })
        })
        .collect()
}
