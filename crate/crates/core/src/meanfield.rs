//! Mean-field ODE for the population fractions, plus the a-priori error
//! budget that prices how far the stochastic averages may drift from it.
//!
//! The closed system replaces the normalized pair counts `ν_{s'r}` with the
//! products `u_{s'}·u_r`, giving `du/dt = f(u) = Q(u)u` on the simplex. All
//! `|S|` components are integrated even though one is redundant; the unit-sum
//! defect is tracked as a free consistency check.

use crate::dynamics::ModelSpec;
use crate::ode::{integrate_on_grid, OdeError, OdeOptions, OdeStats};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MeanFieldError {
    #[error("u0 has {got} entries but the model has {want} states")]
    DimensionMismatch { got: usize, want: usize },
    #[error("u0 must lie on the simplex within 1e-9 (sum = {sum}, min = {min})")]
    NotOnSimplex { sum: f64, min: f64 },
    #[error("horizon and grid step must be positive, got T={horizon}, dt={dt}")]
    BadTimeGrid { horizon: f64, dt: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// `f_s(u) = Σ_{s'} q0[s][s']u_{s'} + Σ_{s',r} q1[s][s'][r]·u_{s'}·u_r` with
/// the diagonal convention folded in: computed as in-flow minus out-flow, so
/// the components sum to zero up to rounding.
pub fn f_rhs(m: &ModelSpec, u: &[f64], out: &mut [f64]) {
    let k = m.num_states();
    debug_assert_eq!(u.len(), k);
    out.iter_mut().for_each(|v| *v = 0.0);
    for source in 0..k {
        let mass = u[source];
        for target in 0..k {
            if target == source {
                continue;
            }
            let mut rate = m.q0_at(target, source);
            for r in 0..k {
                rate += m.q1_at(target, source, r) * u[r];
            }
            let flow = rate * mass;
            out[target] += flow;
            out[source] -= flow;
        }
    }
}

/// Mean-field solution on a fixed grid.
#[derive(Clone, Debug)]
pub struct OdeSolution {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub stats: OdeStats,
    /// Largest per-step renormalization applied to keep u on the simplex.
    pub max_simplex_correction: f64,
    /// Most negative component seen before clamping (should stay ≥ −1e−12).
    pub min_component_pre_clamp: f64,
}

impl OdeSolution {
    /// CSV with header `t,u_<label>…`, on the same grid contract as the
    /// trajectory CSV so the two join column-wise on `t`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "t")?;
        for l in &self.labels {
            write!(w, ",u_{l}")?;
        }
        writeln!(w)?;
        for (idx, &t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for v in &self.u[idx] {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn solve_hmfa(m: &ModelSpec, u0: &[f64], horizon: f64, dt: f64) -> Result<OdeSolution, MeanFieldError> {
    solve_hmfa_with(m, u0, horizon, dt, &OdeOptions::default())
}

pub fn solve_hmfa_with(
    m: &ModelSpec,
    u0: &[f64],
    horizon: f64,
    dt: f64,
    opts: &OdeOptions,
) -> Result<OdeSolution, MeanFieldError> {
    let k = m.num_states();
    if u0.len() != k {
        return Err(MeanFieldError::DimensionMismatch { got: u0.len(), want: k });
    }
    let sum: f64 = u0.iter().sum();
    let min = u0.iter().copied().fold(f64::INFINITY, f64::min);
    if (sum - 1.0).abs() > 1e-9 || min < -1e-9 {
        return Err(MeanFieldError::NotOnSimplex { sum, min });
    }
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(MeanFieldError::BadTimeGrid { horizon, dt });
    }
    let steps = (horizon / dt + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();

    let mut max_correction = 0.0f64;
    let mut min_pre_clamp = 0.0f64;
    let mut renormalize = |y: &mut [f64]| -> f64 {
        let mut correction = 0.0f64;
        for v in y.iter_mut() {
            if *v < 0.0 {
                min_pre_clamp = min_pre_clamp.min(*v);
                correction = correction.max(-*v);
                *v = 0.0;
            }
        }
        let sum: f64 = y.iter().sum();
        if sum > 0.0 {
            correction = correction.max((sum - 1.0).abs());
            for v in y.iter_mut() {
                *v /= sum;
            }
        }
        max_correction = max_correction.max(correction);
        correction
    };

    let rhs = |u: &[f64], du: &mut [f64]| f_rhs(m, u, du);
    let (u, stats) = integrate_on_grid(rhs, u0, &grid, opts, Some(&mut renormalize))?;

    Ok(OdeSolution {
        labels: m.labels().to_vec(),
        times: grid,
        u,
        stats,
        max_simplex_correction: max_correction,
        min_component_pre_clamp: min_pre_clamp,
    })
}

/// Certified Lipschitz bound for `f` in ℓ¹ distance on the simplex:
/// `L_f = max_{s'} Σ_s |q0[s][s']| + 2·|S|·q_max1` (the diagonal of `q0`
/// counts as its defined negative column sum). Derivation: split `f` into its
/// linear and bilinear parts; the linear part is bounded by the induced ℓ¹
/// matrix norm, and each bilinear difference by
/// `|u_{s'}u_r − v_{s'}v_r| ≤ |u_{s'}−v_{s'}|·v_r + u_{s'}·|u_r−v_r|` summed
/// over the tensor. A sampling oracle in the tests probes the bound on random
/// simplex pairs.
pub fn lipschitz_bound(m: &ModelSpec) -> f64 {
    let k = m.num_states();
    let mut linear = 0.0f64;
    for source in 0..k {
        let mut off_sum = 0.0;
        for target in 0..k {
            if target != source {
                off_sum += m.q0_at(target, source).abs();
            }
        }
        // |diagonal| equals the off-diagonal column sum by the rate convention
        linear = linear.max(2.0 * off_sum);
    }
    linear + 2.0 * k as f64 * m.q_max1()
}

/// A-priori error budget: `(init_gap + fluct + C(T)·disc)·e^{L_f·T}` with
/// `C(T) = q_max1·|S|³·T`.
///
/// The fluctuation term scales like `1/√N` with an unknown constant, so this
/// type never invents one: the caller either supplies an empirical estimate
/// (flagged as such) or the term is zero and the total only covers the
/// deterministic sources.
#[derive(Clone, Debug, Serialize)]
pub struct ErrorBudget {
    pub init_gap: f64,
    pub fluctuation: f64,
    pub fluctuation_is_empirical: bool,
    pub discrepancy: f64,
    pub c_t: f64,
    pub lipschitz: f64,
    pub horizon: f64,
    pub n: usize,
    pub total: f64,
}

pub fn error_budget(
    m: &ModelSpec,
    horizon: f64,
    init_gap: f64,
    disc: f64,
    n: usize,
    fluct_estimate: Option<f64>,
) -> ErrorBudget {
    assert!(horizon >= 0.0 && init_gap >= 0.0 && disc >= 0.0, "budget inputs must be non-negative");
    let k = m.num_states() as f64;
    let c_t = m.q_max1() * k * k * k * horizon;
    let lips = lipschitz_bound(m);
    let fluct = fluct_estimate.unwrap_or(0.0);
    let total = (init_gap + fluct + c_t * disc) * (lips * horizon).exp();
    ErrorBudget {
        init_gap,
        fluctuation: fluct,
        fluctuation_is_empirical: fluct_estimate.is_some(),
        discrepancy: disc,
        c_t,
        lipschitz: lips,
        horizon,
        n,
        total,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    #[test]
    fn f_rhs_degree_process() {
        let m = ModelSpec::degree_process().unwrap();
        let mut out = vec![0.0; 2];
        f_rhs(&m, &[0.7, 0.3], &mut out);
        // rate a→b is ‖u‖₁ = 1, so f_a = −u_a
        assert!((out[0] + 0.7).abs() < 1e-15);
        assert!((out[1] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn f_rhs_sir_form() {
        let (beta, gamma) = (1.7, 0.4);
        let m = ModelSpec::sir(beta, gamma).unwrap();
        let u = [0.6, 0.3, 0.1];
        let mut out = vec![0.0; 3];
        f_rhs(&m, &u, &mut out);
        assert!((out[0] - (-beta * u[1] * u[0])).abs() < 1e-15);
        assert!((out[1] - (beta * u[1] * u[0] - gamma * u[1])).abs() < 1e-15);
        assert!((out[2] - gamma * u[1]).abs() < 1e-15);
    }

    #[test]
    fn f_rhs_conserves_mass() {
        let m = ModelSpec::sis(2.3, 0.9).unwrap();
        let mut rng = rng_from_seed(8);
        for _ in 0..100 {
            let a: f64 = rng.random();
            let u = [a, 1.0 - a];
            let mut out = vec![0.0; 2];
            f_rhs(&m, &u, &mut out);
            assert!((out[0] + out[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn degree_process_exponential() {
        let m = ModelSpec::degree_process().unwrap();
        let sol = solve_hmfa(&m, &[1.0, 0.0], 1.0, 0.25).unwrap();
        assert!((sol.u.last().unwrap()[0] - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn si_logistic() {
        // SI (SIR with γ = 0), u_I(0) = 1/2 ⇒ u_I(t) = 1/(1+e^{−t})
        let m = ModelSpec::si(1.0).unwrap();
        let t_end = 3.0f64.ln();
        let sol = solve_hmfa(&m, &[0.5, 0.5, 0.0], t_end, t_end / 4.0).unwrap();
        assert!((sol.u.last().unwrap()[1] - 0.75).abs() < 1e-8);
    }

    #[test]
    fn sis_zero_infection_stays_zero() {
        let m = ModelSpec::sis(2.0, 1.0).unwrap();
        let sol = solve_hmfa(&m, &[1.0, 0.0], 5.0, 0.5).unwrap();
        for row in &sol.u {
            assert_eq!(row[1], 0.0);
        }
    }

    #[test]
    fn simplex_preserved_along_solutions() {
        let m = ModelSpec::sir(3.0, 0.5).unwrap();
        let sol = solve_hmfa(&m, &[0.7, 0.25, 0.05], 8.0, 0.1).unwrap();
        for row in &sol.u {
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&v| v >= 0.0));
        }
        assert!(sol.min_component_pre_clamp >= -1e-12);
        assert!(sol.max_simplex_correction < 1e-9);
    }

    #[test]
    fn rejects_off_simplex_input() {
        let m = ModelSpec::sis(1.0, 1.0).unwrap();
        assert!(matches!(
            solve_hmfa(&m, &[0.7, 0.7], 1.0, 0.1),
            Err(MeanFieldError::NotOnSimplex { .. })
        ));
        assert!(matches!(
            solve_hmfa(&m, &[0.5], 1.0, 0.1),
            Err(MeanFieldError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn halving_tolerance_barely_moves_solution() {
        let m = ModelSpec::sir(2.0, 1.0).unwrap();
        let run = |tol: f64| {
            let opts = OdeOptions { atol: tol, rtol: tol, ..Default::default() };
            solve_hmfa_with(&m, &[0.8, 0.2, 0.0], 4.0, 0.5, &opts).unwrap().u.last().unwrap().clone()
        };
        let a = run(1e-8);
        let b = run(5e-9);
        let diff: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum();
        assert!(diff < 1e-7);
    }

    #[test]
    fn lipschitz_worked_example() {
        // SIS with β = γ = 1: q0 column I has γ in and −γ out ⇒ abs sum 2;
        // q_max1 = 1, |S| = 2 ⇒ L = 2 + 4 = 6
        let m = ModelSpec::sis(1.0, 1.0).unwrap();
        assert_eq!(lipschitz_bound(&m), 6.0);
        let frozen = ModelSpec::new(vec!["a".into(), "b".into()], vec![0.0; 4], vec![0.0; 8]).unwrap();
        assert_eq!(lipschitz_bound(&frozen), 0.0);
    }

    #[test]
    fn lipschitz_bound_holds_on_sampled_pairs() {
        let models = [
            ModelSpec::sis(2.0, 1.0).unwrap(),
            ModelSpec::sir(1.5, 0.7).unwrap(),
            ModelSpec::degree_process().unwrap(),
            // dense random tensor model with 3 states
            {
                let k = 3;
                let mut rng = rng_from_seed(77);
                let mut q0 = vec![0.0; k * k];
                let mut q1 = vec![0.0; k * k * k];
                for s in 0..k {
                    for sp in 0..k {
                        if s != sp {
                            q0[s * k + sp] = rng.random::<f64>();
                            for r in 0..k {
                                q1[(s * k + sp) * k + r] = rng.random::<f64>();
                            }
                        }
                    }
                }
                ModelSpec::new(vec!["x".into(), "y".into(), "z".into()], q0, q1).unwrap()
            },
        ];
        let mut rng = rng_from_seed(123);
        for m in &models {
            let k = m.num_states();
            let lips = lipschitz_bound(m);
            let mut fu = vec![0.0; k];
            let mut fv = vec![0.0; k];
            let mut worst: f64 = 0.0;
            for _ in 0..100_000 {
                let u = random_simplex_point(&mut rng, k);
                let v = random_simplex_point(&mut rng, k);
                f_rhs(m, &u, &mut fu);
                f_rhs(m, &v, &mut fv);
                let num: f64 = fu.iter().zip(&fv).map(|(a, b)| (a - b).abs()).sum();
                let den: f64 = u.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
                if den > 1e-12 {
                    worst = worst.max(num / den);
                }
            }
            assert!(
                worst <= lips + 1e-9,
                "sampled ratio {worst} exceeds certified bound {lips}"
            );
        }
    }

    fn random_simplex_point(rng: &mut impl Rng, k: usize) -> Vec<f64> {
        // normalized exponentials give a uniform Dirichlet(1,…,1) draw
        let mut v: Vec<f64> = (0..k).map(|_| -rng.random::<f64>().max(1e-12).ln()).collect();
        let sum: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= sum);
        v
    }

    #[test]
    fn budget_zero_cases() {
        let m = ModelSpec::sis(1.0, 1.0).unwrap();
        let b = error_budget(&m, 1.0, 0.0, 0.0, 100, None);
        assert_eq!(b.total, 0.0);
        assert!(!b.fluctuation_is_empirical);
        // constant-rate model: q_max1 = 0 kills the discrepancy term entirely
        let frozen = ModelSpec::new(vec!["a".into(), "b".into()], vec![0.0; 4], vec![0.0; 8]).unwrap();
        let b = error_budget(&frozen, 2.0, 0.1, 0.9, 10, Some(0.2));
        assert_eq!(b.c_t, 0.0);
        assert!((b.total - (0.1 + 0.2) * 1.0).abs() < 1e-15, "L_f = 0 for the frozen model");
    }

    #[test]
    fn budget_worked_example() {
        // SIS β = γ = 1, T = 1, disc = 1/4: C(T) = 1·8·1 = 8, so the
        // discrepancy term is 2 and the total is 2·e^{L_f}
        let m = ModelSpec::sis(1.0, 1.0).unwrap();
        let b = error_budget(&m, 1.0, 0.0, 0.25, 50, None);
        assert_eq!(b.c_t, 8.0);
        assert_eq!(b.lipschitz, 6.0);
        assert!((b.total - 2.0 * 6.0f64.exp()).abs() < 1e-9);
    }
}
