//! Convergence series and empirical rate estimation.

use super::MetricsError;
use crate::solvers::RunTrace;

/// The squared relative operator-norm series
/// `r_t = ‖F(z_t)‖² / ‖F(z₀)‖²` for `t = 1..=T+1` (with `z₀ = z₁`, the
/// initial entry is exactly 1).
pub fn opnorm_ratio(trace: &RunTrace) -> Vec<(usize, f64)> {
    let base = trace.initial_norm_f;
    trace
        .norm_f_series()
        .into_iter()
        .enumerate()
        .map(|(k, nf)| {
            let r = if base > 0.0 {
                let q = nf / base;
                q * q
            } else {
                1.0
            };
            (k + 1, r)
        })
        .collect()
}

/// Least-squares slope of `log(value)` against `log(t)` over the points with
/// `t ∈ [window.0, window.1]` and positive value. Needs at least 5 usable
/// points.
pub fn rate_slope(series: &[(f64, f64)], window: (f64, f64)) -> Result<f64, MetricsError> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, v)| *t >= window.0 && *t <= window.1 && *v > 0.0 && *t > 0.0)
        .map(|(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < 5 {
        return Err(MetricsError::DegenerateWindow {
            needed: 5,
            got: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &pts {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx == 0.0 {
        return Err(MetricsError::DegenerateWindow { needed: 5, got: 1 });
    }
    Ok(sxy / sxx)
}

/// Outcome of the two-sided check of the implicit bound
/// `x ≤ a + b√x ⟹ x ≤ 2a + 2b²`.
#[derive(Debug, Clone, Copy)]
pub struct ImplicitBoundCheck {
    pub premise_holds: bool,
    pub conclusion_holds: bool,
}

impl ImplicitBoundCheck {
    /// The implication itself: vacuously true when the premise fails.
    pub fn holds(&self) -> bool {
        !self.premise_holds || self.conclusion_holds
    }
}

/// Evaluates both sides of the implicit bound for `a, b, x ≥ 0`.
pub fn implicit_bound_check(a: f64, b: f64, x: f64) -> ImplicitBoundCheck {
    debug_assert!(a >= 0.0 && b >= 0.0 && x >= 0.0);
    ImplicitBoundCheck {
        premise_holds: x <= a + b * x.sqrt(),
        conclusion_holds: x <= 2.0 * a + 2.0 * b * b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{Point, SolverConfig, SomOption};
    use crate::problems::make_bilinear;
    use crate::solvers::run;

    #[test]
    fn ratio_series_starts_at_one_and_honors_tolerance() {
        let problem = make_bilinear(2, 0);
        let z1 = Point::from_parts(&[1.0, -2.0], &[0.5, 0.25]).unwrap();
        let grad_tol = 1e-7;
        let config = SolverConfig::new(SomOption::OptionII, 0.25, 1.0, 200).with_grad_tol(grad_tol);
        let trace = run(&problem, &config, &z1).unwrap();
        let series = opnorm_ratio(&trace);
        assert_eq!(series[0], (1, 1.0));
        let (_, last) = series.last().unwrap();
        assert!(*last <= grad_tol * grad_tol);
    }

    #[test]
    fn exact_power_laws() {
        let inv_t: Vec<(f64, f64)> = (1..=200).map(|t| (t as f64, 1.0 / t as f64)).collect();
        let slope = rate_slope(&inv_t, (1.0, 200.0)).unwrap();
        assert!((slope + 1.0).abs() < 1e-6);

        let t15: Vec<(f64, f64)> = (1..=200)
            .map(|t| (t as f64, (t as f64).powf(-1.5)))
            .collect();
        let slope = rate_slope(&t15, (10.0, 150.0)).unwrap();
        assert!((slope + 1.5).abs() < 1e-6);
    }

    #[test]
    fn window_must_contain_five_points() {
        let series: Vec<(f64, f64)> = (1..=10).map(|t| (t as f64, 1.0)).collect();
        assert!(rate_slope(&series, (1.0, 4.0)).is_err());
        assert!(rate_slope(&series, (1.0, 5.0)).is_ok());
    }

    #[test]
    fn implicit_bound_cases() {
        let c = implicit_bound_check(1.0, 0.0, 1.0);
        assert!(c.premise_holds && c.conclusion_holds && c.holds());

        // a=0, b=1, x=1: premise 1 ≤ 1, conclusion 1 ≤ 2.
        let c = implicit_bound_check(0.0, 1.0, 1.0);
        assert!(c.premise_holds && c.conclusion_holds);

        // Premise fails: implication vacuous.
        let c = implicit_bound_check(0.0, 0.5, 4.0);
        assert!(!c.premise_holds && c.holds());
    }
}
