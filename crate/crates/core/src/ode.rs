//! Adaptive embedded Runge–Kutta integration (Dormand–Prince 5(4)).
//!
//! One stepper serves both the low-dimensional mean-field system and the
//! high-dimensional forward equations. Steps are clipped so the solver lands
//! exactly on every requested grid time; grid values therefore carry no
//! interpolation error beyond the step-error control itself.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t} (h = {h})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("exceeded {0} steps")]
    TooManySteps(usize),
    #[error("grid must be ascending and non-empty")]
    BadGrid,
}

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { atol: 1e-10, rtol: 1e-10, h_init: None, h_min: 1e-14, max_steps: 50_000_000 }
    }
}

#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct OdeStats {
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Largest scaled error estimate among accepted steps (≤ 1 by design).
    pub max_error_estimate: f64,
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// stage times (unused: the systems here are autonomous)
#[allow(dead_code)]
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// 5th-order weights are row 6 of A (FSAL); these are the embedded 4th-order ones.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Integrates `y' = f(y)` (autonomous) from `grid[0]`, returning the state at
/// every grid time. `post_step`, when present, may project the accepted state
/// (e.g. back onto the simplex) and returns the correction magnitude applied.
pub fn integrate_on_grid<F>(
    mut f: F,
    y0: &[f64],
    grid: &[f64],
    opts: &OdeOptions,
    mut post_step: Option<&mut dyn FnMut(&mut [f64]) -> f64>,
) -> Result<(Vec<Vec<f64>>, OdeStats), OdeError>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(OdeError::BadGrid);
    }
    let dim = y0.len();
    let mut y = y0.to_vec();
    let mut t = grid[0];
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    out.push(y.clone());
    let mut stats = OdeStats::default();

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; dim]).collect();
    let mut y_stage = vec![0.0; dim];
    let mut y_new = vec![0.0; dim];

    let mut h = match opts.h_init {
        Some(h0) => h0,
        None => initial_step(&mut f, &y),
    };

    for &t_target in &grid[1..] {
        while t < t_target {
            if stats.accepted_steps + stats.rejected_steps > opts.max_steps {
                return Err(OdeError::TooManySteps(opts.max_steps));
            }
            h = h.min(t_target - t);
            if h < opts.h_min {
                // Within roundoff of the target; snap to it.
                if t_target - t < opts.h_min {
                    break;
                }
                return Err(OdeError::StepSizeUnderflow { t, h });
            }

            f(&y, &mut k[0]);
            for stage in 0..6 {
                for i in 0..dim {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(stage + 1) {
                        acc += A[stage][j] * kj[i];
                    }
                    y_stage[i] = y[i] + h * acc;
                }
                let (_, tail) = k.split_at_mut(stage + 1);
                f(&y_stage, &mut tail[0]);
            }
            // 5th-order solution is the last stage state (FSAL layout)
            y_new.copy_from_slice(&y_stage);
            // scaled error norm against the embedded 4th-order solution
            let mut err_sq = 0.0;
            for i in 0..dim {
                let mut y4 = y[i];
                for (j, kj) in k.iter().enumerate() {
                    y4 += h * B4[j] * kj[i];
                }
                let scale = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                let e = (y_new[i] - y4) / scale;
                err_sq += e * e;
            }
            let err = (err_sq / dim as f64).sqrt();

            if err <= 1.0 {
                t += h;
                y.copy_from_slice(&y_new);
                if let Some(cb) = post_step.as_deref_mut() {
                    cb(&mut y);
                }
                stats.accepted_steps += 1;
                stats.max_error_estimate = stats.max_error_estimate.max(err);
            } else {
                stats.rejected_steps += 1;
            }
            let factor = if err == 0.0 { 10.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 10.0) };
            h *= factor;
        }
        t = t_target;
        out.push(y.clone());
    }
    Ok((out, stats))
}

fn initial_step<F>(f: &mut F, y0: &[f64]) -> f64
where
    F: FnMut(&[f64], &mut [f64]),
{
    let mut dy = vec![0.0; y0.len()];
    f(y0, &mut dy);
    let norm_y: f64 = y0.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_dy: f64 = dy.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_dy > 1e-12 {
        (0.01 * (norm_y + 1.0) / norm_dy).min(0.1).max(1e-8)
    } else {
        1e-4
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(t_end: f64, dt: f64) -> Vec<f64> {
        let k = (t_end / dt).round() as usize;
        (0..=k).map(|i| i as f64 * dt).collect()
    }

    #[test]
    fn exponential_decay_to_tight_tolerance() {
        let f = |y: &[f64], dy: &mut [f64]| dy[0] = -y[0];
        let g = grid(3.0, 0.1);
        let (ys, stats) = integrate_on_grid(f, &[1.0], &g, &OdeOptions::default(), None).unwrap();
        for (y, &t) in ys.iter().zip(&g) {
            assert!((y[0] - (-t).exp()).abs() < 1e-9, "t={t}");
        }
        assert!(stats.accepted_steps > 0);
        assert!(stats.max_error_estimate <= 1.0);
    }

    #[test]
    fn logistic_closed_form() {
        // y' = y(1−y), y(0)=1/2 ⇒ y(t) = 1/(1+e^{−t})
        let f = |y: &[f64], dy: &mut [f64]| dy[0] = y[0] * (1.0 - y[0]);
        let g = vec![0.0, 3.0f64.ln()];
        let (ys, _) = integrate_on_grid(f, &[0.5], &g, &OdeOptions::default(), None).unwrap();
        assert!((ys[1][0] - 0.75).abs() < 1e-10);
    }

    #[test]
    fn tolerance_halving_converges() {
        let f = |y: &[f64], dy: &mut [f64]| {
            dy[0] = -2.0 * y[0] + y[1] * y[1];
            dy[1] = y[0] - y[1];
        };
        let g = vec![0.0, 2.0];
        let run = |tol: f64| {
            let opts = OdeOptions { atol: tol, rtol: tol, ..Default::default() };
            integrate_on_grid(f, &[1.0, 0.3], &g, &opts, None).unwrap().0[1].clone()
        };
        let coarse = run(1e-6);
        let fine = run(5e-7);
        let diff: f64 = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).sum();
        assert!(diff < 1e-5);
    }

    #[test]
    fn post_step_hook_is_applied() {
        let f = |y: &[f64], dy: &mut [f64]| dy[0] = y[0];
        let g = vec![0.0, 1.0];
        let mut max_correction = 0.0f64;
        let mut clamp = |y: &mut [f64]| {
            let before = y[0];
            y[0] = y[0].min(2.0);
            let c = (before - y[0]).abs();
            max_correction = max_correction.max(c);
            c
        };
        let (ys, _) =
            integrate_on_grid(f, &[1.0], &g, &OdeOptions::default(), Some(&mut clamp)).unwrap();
        assert!(ys[1][0] <= 2.0);
        assert!(max_correction > 0.0);
    }

    #[test]
    fn rejects_bad_grid() {
        let f = |_: &[f64], dy: &mut [f64]| dy[0] = 0.0;
        assert!(matches!(
            integrate_on_grid(f, &[0.0], &[0.0, 0.0], &OdeOptions::default(), None),
            Err(OdeError::BadGrid)
        ));
    }
}
