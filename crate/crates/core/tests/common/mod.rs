//! Independent oracles shared by the property and acceptance suites. None
//! of these call into the code paths they check.

#![allow(dead_code)]

use overhang_core::exec_frontier::ExecutionModel;

/// `E + lambda * V` written out from the model definition.
pub fn objective(holdings: &[f64], m: &ExecutionModel) -> f64 {
    let eta_adj = m.temporary_coeff - m.permanent_coeff * m.period_length / 2.0;
    let mut e = 0.5 * m.permanent_coeff * m.total_units * m.total_units;
    let mut v = 0.0;
    for k in 1..holdings.len() {
        let n = holdings[k - 1] - holdings[k];
        e += eta_adj * n * n / m.period_length;
        v += m.volatility * m.volatility * m.period_length * holdings[k] * holdings[k];
    }
    e + m.risk_aversion * v
}

/// Minimizes the objective over the interior holdings by cyclic coordinate
/// search. Each coordinate is set to the vertex of the parabola through
/// three probes, which is exact for a quadratic, without using its gradient.
pub fn brute_force_minimum(m: &ExecutionModel) -> (Vec<f64>, f64) {
    let n = m.periods;
    let mut x: Vec<f64> = (0..=n).map(|j| m.total_units * (n - j) as f64 / n as f64).collect();
    let h = m.total_units.max(1.0) * 1e-2;
    for _ in 0..200_000 {
        let mut moved = 0.0f64;
        for j in 1..n {
            let x0 = x[j];
            let f = |v: f64, x: &mut Vec<f64>| {
                x[j] = v;
                objective(x, m)
            };
            let fm = f(x0 - h, &mut x);
            let f0 = f(x0, &mut x);
            let fp = f(x0 + h, &mut x);
            let curv = fm - 2.0 * f0 + fp;
            let next = if curv > 0.0 { x0 - h * (fp - fm) / (2.0 * curv) } else { x0 };
            x[j] = next;
            moved = moved.max((next - x0).abs());
        }
        if moved <= 1e-13 * m.total_units {
            break;
        }
    }
    let f = objective(&x, m);
    (x, f)
}

/// Reference dead-man's switch: counts consecutive silent intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefState {
    Live(u32),
    Fired,
    Gone,
}

pub fn chi_square_critical(df: f64, z: f64) -> f64 {
    // Wilson-Hilferty approximation to the chi-square quantile.
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Upper 0.1% point of the standard normal.
pub const Z_999: f64 = 3.090_232;
