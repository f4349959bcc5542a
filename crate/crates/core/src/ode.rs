//! Fixed-step classical Runge–Kutta integration with a step-halving check.
//!
//! The step is halved until two successive runs agree at the endpoint to
//! within the integrator tolerance; the finer run is returned. Samples between
//! internal steps are linearly interpolated, which is first-order accurate.

use num_complex::Complex64;

use crate::error::{BlochError, Result};

/// Vector-like state that RK4 can combine.
pub trait OdeState: Clone {
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn max_abs_diff(&self, other: &Self) -> f64;
    /// `(1 − w) self + w other`
    fn lerp(&self, other: &Self, w: f64) -> Self {
        let mut out = self.clone();
        out.axpy(-w, self);
        out.axpy(w, other);
        out
    }
}

impl OdeState for Vec<f64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += a * v;
        }
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl OdeState for Vec<Complex64> {
    fn axpy(&mut self, a: f64, x: &Self) {
        for (s, v) in self.iter_mut().zip(x) {
            *s += v * a;
        }
    }

    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter()
            .zip(other)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorSettings {
    /// Initial step; `None` starts from `(t1 − t0) / 64`.
    pub dt: Option<f64>,
    /// Endpoint change below which a halving is accepted.
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            dt: None,
            tol: 1e-8,
            max_halvings: 16,
        }
    }
}

impl IntegratorSettings {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt: Some(dt),
            ..Self::default()
        }
    }
}

/// Result of an integration: samples at the requested times plus the step
/// that passed the halving check.
#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub times: Vec<f64>,
    pub states: Vec<S>,
    pub end: S,
    pub dt: f64,
    pub steps: usize,
    /// Endpoint change of the final halving.
    pub halving_change: f64,
}

/// Runs RK4 with exactly `steps` equal steps and records `samples`
/// (sorted, inside `[t0, t1]`).
pub fn rk4_fixed<S, F>(
    rhs: &mut F,
    y0: &S,
    t0: f64,
    t1: f64,
    steps: usize,
    samples: &[f64],
) -> (Vec<S>, S)
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    let h = (t1 - t0) / steps as f64;
    let mut out = Vec::with_capacity(samples.len());
    let mut next = 0;
    let mut y = y0.clone();
    while next < samples.len() && samples[next] <= t0 {
        out.push(y.clone());
        next += 1;
    }
    for i in 0..steps {
        let ta = t0 + i as f64 * h;
        let tb = if i + 1 == steps {
            t1
        } else {
            t0 + (i + 1) as f64 * h
        };
        let k1 = rhs(ta, &y);
        let mut tmp = y.clone();
        tmp.axpy(0.5 * h, &k1);
        let k2 = rhs(ta + 0.5 * h, &tmp);
        let mut tmp = y.clone();
        tmp.axpy(0.5 * h, &k2);
        let k3 = rhs(ta + 0.5 * h, &tmp);
        let mut tmp = y.clone();
        tmp.axpy(h, &k3);
        let k4 = rhs(tb, &tmp);
        let mut y_next = y.clone();
        y_next.axpy(h / 6.0, &k1);
        y_next.axpy(h / 3.0, &k2);
        y_next.axpy(h / 3.0, &k3);
        y_next.axpy(h / 6.0, &k4);
        while next < samples.len() && samples[next] <= tb {
            let s = samples[next];
            if s == tb {
                out.push(y_next.clone());
            } else {
                out.push(y.lerp(&y_next, (s - ta) / (tb - ta)));
            }
            next += 1;
        }
        y = y_next;
    }
    while next < samples.len() {
        out.push(y.clone());
        next += 1;
    }
    (out, y)
}

/// RK4 with automatic step halving: the step is halved until the endpoint
/// changes by less than `settings.tol`.
pub fn integrate<S, F>(
    mut rhs: F,
    y0: &S,
    t0: f64,
    t1: f64,
    samples: &[f64],
    settings: &IntegratorSettings,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> S,
{
    if !(t1 > t0) {
        return Err(BlochError::Domain(format!(
            "integration window must satisfy t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let span = t1 - t0;
    let dt0 = settings.dt.unwrap_or(span / 64.0);
    if !(dt0 > 0.0) || !dt0.is_finite() {
        return Err(BlochError::Domain(format!(
            "step must be positive, got {dt0}"
        )));
    }
    let mut steps = (span / dt0).ceil().max(1.0) as usize;
    let (_, mut coarse_end) = rk4_fixed(&mut rhs, y0, t0, t1, steps, &[]);
    let mut change = f64::INFINITY;
    for _ in 0..settings.max_halvings {
        steps *= 2;
        let (fine_samples, fine_end) = rk4_fixed(&mut rhs, y0, t0, t1, steps, samples);
        change = fine_end.max_abs_diff(&coarse_end);
        if change < settings.tol {
            return Ok(Solution {
                times: samples.to_vec(),
                states: fine_samples,
                end: fine_end,
                dt: span / steps as f64,
                steps,
                halving_change: change,
            });
        }
        if !change.is_finite() {
            break;
        }
        coarse_end = fine_end;
    }
    Err(BlochError::StepUnderflow {
        dt: span / steps as f64,
        tol: settings.tol,
        change,
    })
}

/// Like [`integrate`], but restarts at every breakpoint so that right-hand
/// sides with jumps are integrated one smooth piece at a time. `rhs` receives
/// `(t, segment_start, y)`.
pub fn integrate_segments<S, F>(
    mut rhs: F,
    y0: &S,
    t0: f64,
    t1: f64,
    breakpoints: &[f64],
    samples: &[f64],
    settings: &IntegratorSettings,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, f64, &S) -> S,
{
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t0 && b < t1)
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    if cuts.is_empty() {
        return integrate(|t, y: &S| rhs(t, t0, y), y0, t0, t1, samples, settings);
    }
    let mut edges = vec![t0];
    edges.extend(cuts);
    edges.push(t1);

    let mut states = Vec::with_capacity(samples.len());
    let mut y = y0.clone();
    let mut dt = f64::INFINITY;
    let mut steps = 0;
    let mut halving_change: f64 = 0.0;
    let mut next = 0;
    for w in edges.windows(2) {
        let (a, b) = (w[0], w[1]);
        let start = next;
        while next < samples.len() && samples[next] <= b {
            next += 1;
        }
        let piece = integrate(
            |t, s: &S| rhs(t, a, s),
            &y,
            a,
            b,
            &samples[start..next],
            settings,
        )?;
        states.extend(piece.states);
        dt = dt.min(piece.dt);
        steps += piece.steps;
        halving_change = halving_change.max(piece.halving_change);
        y = piece.end;
    }
    Ok(Solution {
        times: samples.to_vec(),
        states,
        end: y,
        dt,
        steps,
        halving_change,
    })
}
