use crate::error::{Error, Result};
use crate::ode::StepControl;

/// Integration window `[t1, t2]` (µs) with step control and the uniform
/// sample count used for quadratures over the window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t1: f64,
    pub t2: f64,
    pub step: StepControl,
    pub quadrature_points: usize,
}

pub const DEFAULT_QUADRATURE_POINTS: usize = 6001;

impl TimeGrid {
    pub fn new(t1: f64, t2: f64, step: StepControl) -> Result<Self> {
        let grid = TimeGrid {
            t1,
            t2,
            step,
            quadrature_points: DEFAULT_QUADRATURE_POINTS,
        };
        grid.validate()?;
        Ok(grid)
    }

    /// `[-6 T_c, 6 T_c]` with the default adaptive tolerances.
    pub fn for_coherence_time(coherence_time: f64) -> Result<Self> {
        Self::symmetric(coherence_time, 6.0)
    }

    pub fn symmetric(coherence_time: f64, half_width: f64) -> Result<Self> {
        if !(coherence_time > 0.0) {
            return Err(Error::invalid("coherence_time", "must be positive"));
        }
        Self::new(
            -half_width * coherence_time,
            half_width * coherence_time,
            StepControl::default(),
        )
    }

    pub fn with_step(mut self, step: StepControl) -> Self {
        self.step = step;
        self
    }

    pub fn with_quadrature_points(mut self, points: usize) -> Self {
        self.quadrature_points = points;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t1 < 0.0 && 0.0 < self.t2) {
            return Err(Error::invalid(
                "time grid",
                format!("need t1 < 0 < t2, got [{}, {}]", self.t1, self.t2),
            ));
        }
        if self.quadrature_points < 3 {
            return Err(Error::invalid(
                "quadrature_points",
                "need at least 3 points",
            ));
        }
        Ok(())
    }

    pub fn span(&self) -> f64 {
        self.t2 - self.t1
    }

    pub fn dt(&self) -> f64 {
        self.span() / (self.quadrature_points - 1) as f64
    }

    pub fn sample_times(&self) -> Vec<f64> {
        uniform(self.t1, self.t2, self.quadrature_points)
    }
}

pub(crate) fn uniform(a: f64, b: f64, points: usize) -> Vec<f64> {
    let dt = (b - a) / (points - 1) as f64;
    (0..points)
        .map(|i| {
            if i + 1 == points {
                b
            } else {
                a + i as f64 * dt
            }
        })
        .collect()
}

/// Composite trapezoid on uniformly spaced samples.
pub fn trapezoid(values: &[f64], dt: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => dt * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_six_coherence_times() {
        let g = TimeGrid::for_coherence_time(0.5).unwrap();
        assert_eq!((g.t1, g.t2), (-3.0, 3.0));
        assert_eq!(
            g.step,
            StepControl::Adaptive {
                rel_tol: 1e-8,
                abs_tol: 1e-10
            }
        );
    }

    #[test]
    fn window_must_straddle_zero() {
        assert!(TimeGrid::new(0.5, 1.0, StepControl::default()).is_err());
        assert!(TimeGrid::new(-1.0, -0.5, StepControl::default()).is_err());
    }

    #[test]
    fn trapezoid_exact_for_linear() {
        let xs = uniform(0.0, 2.0, 11);
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((trapezoid(&ys, 0.2) - 8.0).abs() < 1e-12);
    }
}
