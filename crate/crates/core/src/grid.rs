//! Uniform time grids with the two summation rules used by the pathwise and
//! Volterra integrators.

use crate::error::{Error, Result};

/// Which Riemann rule turns grid samples into an integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    /// Left endpoints; the adapted (Ito) choice.
    LeftEndpoint,
    Trapezoid,
}

/// Uniform partition 0 = t_0 < ... < t_n = t_end.
#[derive(Debug, Clone)]
pub struct TimeGrid {
    points: Vec<f64>,
    step: f64,
    rule: QuadratureRule,
}

impl TimeGrid {
    pub fn uniform(n_steps: usize, t_end: f64, rule: QuadratureRule) -> Result<TimeGrid> {
        // NaN t_end must be rejected along with nonpositive values.
        if n_steps == 0 || t_end.is_nan() || t_end <= 0.0 {
            return Err(Error::Precondition(format!(
                "time grid needs n_steps ≥ 1 and t_end > 0, got {n_steps} and {t_end}"
            )));
        }
        let step = t_end / n_steps as f64;
        let mut points: Vec<f64> = (0..=n_steps).map(|i| i as f64 * step).collect();
        points[n_steps] = t_end;
        Ok(TimeGrid { points, step, rule })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn n_steps(&self) -> usize {
        self.points.len() - 1
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn t_end(&self) -> f64 {
        *self.points.last().expect("grid is nonempty")
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn with_rule(&self, rule: QuadratureRule) -> TimeGrid {
        TimeGrid {
            points: self.points.clone(),
            step: self.step,
            rule,
        }
    }

    /// Weights for ∫_0^{t_end}; they sum to t_end up to roundoff.
    pub fn weights(&self) -> Vec<f64> {
        self.weights_upto(self.n_steps())
    }

    /// Weights for ∫_0^{t_j}: the chosen rule on the first j cells, zero
    /// beyond. j = 0 gives all zeros.
    pub fn weights_upto(&self, j: usize) -> Vec<f64> {
        assert!(j < self.points.len(), "subinterval endpoint out of range");
        let n = self.n_steps();
        let mut w = vec![0.0; n + 1];
        if j == 0 {
            return w;
        }
        match self.rule {
            QuadratureRule::LeftEndpoint => {
                for wi in w.iter_mut().take(j) {
                    *wi = self.step;
                }
            }
            QuadratureRule::Trapezoid => {
                w[0] = 0.5 * self.step;
                w[j] = 0.5 * self.step;
                for wi in w.iter_mut().take(j).skip(1) {
                    *wi = self.step;
                }
            }
        }
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 7, 16, 64] {
            for rule in [QuadratureRule::LeftEndpoint, QuadratureRule::Trapezoid] {
                let g = TimeGrid::uniform(n, 0.9, rule).unwrap();
                let total: f64 = g.weights().iter().sum();
                assert_abs_diff_eq!(total, 0.9, epsilon = 1e-12);
                for j in 0..=n {
                    let partial: f64 = g.weights_upto(j).iter().sum();
                    assert_abs_diff_eq!(partial, g.points()[j], epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn rules_place_their_weights() {
        let g = TimeGrid::uniform(4, 1.0, QuadratureRule::LeftEndpoint).unwrap();
        assert_eq!(g.weights(), vec![0.25, 0.25, 0.25, 0.25, 0.0]);
        let g = g.with_rule(QuadratureRule::Trapezoid);
        assert_eq!(g.weights(), vec![0.125, 0.25, 0.25, 0.25, 0.125]);
        assert_eq!(g.weights_upto(2), vec![0.125, 0.25, 0.125, 0.0, 0.0]);
    }

    #[test]
    fn endpoints_are_exact() {
        let g = TimeGrid::uniform(7, 0.7, QuadratureRule::Trapezoid).unwrap();
        assert_eq!(g.points()[0], 0.0);
        assert_eq!(g.t_end(), 0.7);
        assert_eq!(g.n_steps(), 7);
        assert!(TimeGrid::uniform(0, 1.0, QuadratureRule::Trapezoid).is_err());
        assert!(TimeGrid::uniform(4, 0.0, QuadratureRule::Trapezoid).is_err());
    }
}
