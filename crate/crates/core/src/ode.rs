//! Adaptive Dormand–Prince 5(4) integrator for complex-valued systems, with the
//! fourth-order continuous extension used to sample the solution at arbitrary
//! times inside each accepted step.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// A first-order system `y' = f(t, y)` over complex amplitudes.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[C64], dy: &mut [C64]);
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Adaptive { rel_tol: f64, abs_tol: f64 },
    Fixed { dt: f64 },
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl::Adaptive {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
// Error coefficients (5th minus embedded 4th order weights).
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Dormand–Prince integrator. Sampling callbacks receive the interpolated
/// state at every requested time; returning an error aborts the integration.
#[derive(Clone, Debug)]
pub struct Dopri5 {
    pub control: StepControl,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Dopri5 {
    pub fn new(control: StepControl) -> Self {
        Dopri5 {
            control,
            max_step: None,
            max_steps: 2_000_000,
        }
    }

    pub fn with_max_step(mut self, h: f64) -> Self {
        self.max_step = Some(h);
        self
    }

    /// Integrates `y` in place from `t0` to `t1`. `samples` must be ascending
    /// and inside `[t0, t1]`.
    pub fn integrate<S, F>(
        &self,
        sys: &S,
        t0: f64,
        t1: f64,
        y: &mut Vec<C64>,
        samples: &[f64],
        mut on_sample: F,
    ) -> Result<OdeStats>
    where
        S: OdeSystem + ?Sized,
        F: FnMut(f64, &[C64]) -> Result<()>,
    {
        let n = sys.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        if !(t1 > t0) {
            return Err(Error::invalid(
                "t1",
                format!("integration end {t1} must exceed start {t0}"),
            ));
        }
        let span = t1 - t0;
        let h_max = self.max_step.unwrap_or(span / 50.0).min(span);

        let mut ws = Workspace::new(n);
        let mut stats = OdeStats::default();
        let mut sample_idx = 0;
        while sample_idx < samples.len() && samples[sample_idx] <= t0 {
            on_sample(samples[sample_idx], y)?;
            sample_idx += 1;
        }

        let mut t = t0;
        sys.rhs(t, y, &mut ws.k1);
        stats.evaluations += 1;

        let mut h = match self.control {
            StepControl::Fixed { dt } => {
                if !(dt > 0.0) {
                    return Err(Error::invalid("dt", "fixed step must be positive"));
                }
                dt
            }
            StepControl::Adaptive { rel_tol, abs_tol } => {
                initial_step(sys, t, y, rel_tol, abs_tol, h_max, &mut ws, &mut stats)
            }
        };
        let mut fac_old: f64 = 1e-4;
        let mut last_rejected = false;

        while t < t1 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::TooManySteps {
                    max_steps: self.max_steps,
                    t,
                });
            }
            let last = t + h >= t1 || (t1 - (t + h)).abs() <= 1e-12 * span;
            if last {
                h = t1 - t;
            }
            if h < 1e-14 * span.max(t.abs()) {
                return Err(Error::StepSizeUnderflow { t, h });
            }

            self.stages(sys, t, h, y, &mut ws);
            stats.evaluations += 6;

            let err = match self.control {
                StepControl::Fixed { .. } => 0.0,
                StepControl::Adaptive { rel_tol, abs_tol } => ws.error_norm(y, h, rel_tol, abs_tol),
            };

            if err <= 1.0 {
                // Build the continuous extension before overwriting y.
                let t_new = if last { t1 } else { t + h };
                while sample_idx < samples.len() && samples[sample_idx] <= t_new {
                    let theta = ((samples[sample_idx] - t) / h).clamp(0.0, 1.0);
                    ws.dense(y, h, theta);
                    on_sample(samples[sample_idx], &ws.dense_out)?;
                    sample_idx += 1;
                }
                std::mem::swap(y, &mut ws.y_new);
                std::mem::swap(&mut ws.k1, &mut ws.k7);
                t = t_new;
                stats.accepted += 1;

                if let StepControl::Adaptive { .. } = self.control {
                    // Lund-stabilized step-size controller.
                    let err = err.max(1e-10);
                    let mut fac = 0.9 * err.powf(-0.17) * fac_old.powf(0.04);
                    fac = fac.clamp(0.2, 10.0);
                    if last_rejected {
                        fac = fac.min(1.0);
                    }
                    fac_old = err.max(1e-4);
                    h = (h * fac).min(h_max);
                    last_rejected = false;
                }
            } else {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                h *= fac;
                last_rejected = true;
            }
        }
        // Samples exactly at t1 that rounding left behind.
        while sample_idx < samples.len() {
            on_sample(samples[sample_idx], y)?;
            sample_idx += 1;
        }
        Ok(stats)
    }

    fn stages<S: OdeSystem + ?Sized>(
        &self,
        sys: &S,
        t: f64,
        h: f64,
        y: &[C64],
        ws: &mut Workspace,
    ) {
        let Workspace {
            k1,
            k2,
            k3,
            k4,
            k5,
            k6,
            k7,
            y_tmp,
            y_new,
            ..
        } = ws;
        combine(y_tmp, y, h, &[(A21, &*k1)]);
        sys.rhs(t + C2 * h, y_tmp, k2);
        combine(y_tmp, y, h, &[(A31, &*k1), (A32, &*k2)]);
        sys.rhs(t + C3 * h, y_tmp, k3);
        combine(y_tmp, y, h, &[(A41, &*k1), (A42, &*k2), (A43, &*k3)]);
        sys.rhs(t + C4 * h, y_tmp, k4);
        combine(
            y_tmp,
            y,
            h,
            &[(A51, &*k1), (A52, &*k2), (A53, &*k3), (A54, &*k4)],
        );
        sys.rhs(t + C5 * h, y_tmp, k5);
        combine(
            y_tmp,
            y,
            h,
            &[
                (A61, &*k1),
                (A62, &*k2),
                (A63, &*k3),
                (A64, &*k4),
                (A65, &*k5),
            ],
        );
        sys.rhs(t + h, y_tmp, k6);
        combine(
            y_new,
            y,
            h,
            &[
                (A71, &*k1),
                (A73, &*k3),
                (A74, &*k4),
                (A75, &*k5),
                (A76, &*k6),
            ],
        );
        sys.rhs(t + h, y_new, k7);
    }
}

fn combine(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &Vec<C64>)]) {
    out.copy_from_slice(y);
    for &(a, k) in terms {
        let s = a * h;
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += ki * s;
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn initial_step<S: OdeSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[C64],
    rel_tol: f64,
    abs_tol: f64,
    h_max: f64,
    ws: &mut Workspace,
    stats: &mut OdeStats,
) -> f64 {
    let Workspace {
        k1: f0, k2, y_tmp, ..
    } = ws;
    let n = y.len().max(1) as f64;
    let scale = |yi: C64| abs_tol + rel_tol * yi.norm();
    let d0 = (y
        .iter()
        .map(|&yi| (yi.norm() / scale(yi)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let d1 = (y
        .iter()
        .zip(f0.iter())
        .map(|(&yi, fi)| (fi.norm() / scale(yi)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(h_max);
    for (o, (yi, fi)) in y_tmp.iter_mut().zip(y.iter().zip(f0.iter())) {
        *o = yi + fi * h0;
    }
    sys.rhs(t + h0, y_tmp, k2);
    stats.evaluations += 1;
    let d2 = (y
        .iter()
        .zip(f0.iter().zip(k2.iter()))
        .map(|(&yi, (a, b))| ((b - a).norm() / scale(yi)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(h_max)
}

struct Workspace {
    k1: Vec<C64>,
    k2: Vec<C64>,
    k3: Vec<C64>,
    k4: Vec<C64>,
    k5: Vec<C64>,
    k6: Vec<C64>,
    k7: Vec<C64>,
    y_tmp: Vec<C64>,
    y_new: Vec<C64>,
    dense_out: Vec<C64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); n];
        Workspace {
            k1: z(),
            k2: z(),
            k3: z(),
            k4: z(),
            k5: z(),
            k6: z(),
            k7: z(),
            y_tmp: z(),
            y_new: z(),
            dense_out: z(),
        }
    }

    // Stage buffers are indexed in lockstep.
    #[allow(clippy::needless_range_loop)]
    fn error_norm(&self, y: &[C64], h: f64, rel_tol: f64, abs_tol: f64) -> f64 {
        let n = y.len().max(1) as f64;
        let mut acc = 0.0;
        for i in 0..y.len() {
            let e = (self.k1[i] * E1
                + self.k3[i] * E3
                + self.k4[i] * E4
                + self.k5[i] * E5
                + self.k6[i] * E6
                + self.k7[i] * E7)
                * h;
            let sc = abs_tol + rel_tol * y[i].norm().max(self.y_new[i].norm());
            acc += (e.norm() / sc).powi(2);
        }
        (acc / n).sqrt()
    }

    #[allow(clippy::needless_range_loop)]
    fn dense(&mut self, y: &[C64], h: f64, theta: f64) {
        let th1 = 1.0 - theta;
        for i in 0..y.len() {
            let ydiff = self.y_new[i] - y[i];
            let bspl = self.k1[i] * h - ydiff;
            let r4 = ydiff - self.k7[i] * h - bspl;
            let r5 = (self.k1[i] * D1
                + self.k3[i] * D3
                + self.k4[i] * D4
                + self.k5[i] * D5
                + self.k6[i] * D6
                + self.k7[i] * D7)
                * h;
            self.dense_out[i] = y[i] + (ydiff + (bspl + (r4 + r5 * th1) * theta) * th1) * theta;
        }
    }
}
