//! Exact forward equations on the product state space `S^N`.
//!
//! Global configurations are indexed in mixed radix with vertex 0 as the
//! least significant digit, and the probability vector is integrated with the
//! same adaptive stepper the mean-field module uses. Feasible only for tiny
//! graphs — the default cap is 4096 global states — but within that range it
//! is the exact oracle every stochastic estimate is checked against.

use super::{ModelSpec, StateAssignment};
use crate::dynamics::simulate::nu_index;
use crate::graph::Graph;
use crate::ode::{integrate_on_grid, OdeError, OdeOptions, OdeStats};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MasterError {
    #[error("product state space has {size} configurations, above the cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },
    #[error("assignment covers {got} vertices but the graph has {want}")]
    AssignmentMismatch { got: usize, want: usize },
    #[error("initial distribution has {got} entries, expected {want}")]
    DistributionLength { got: usize, want: usize },
    #[error("initial distribution must be non-negative and sum to 1 (sum = {0})")]
    NotADistribution(f64),
    #[error("horizon and grid step must be positive, got T={horizon}, dt={dt}")]
    BadTimeGrid { horizon: f64, dt: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Clone, Copy, Debug)]
pub struct MasterOptions {
    pub state_cap: usize,
    pub atol: f64,
    pub rtol: f64,
    /// Keep the full distribution at every grid time (needed for expected
    /// pair/triple counts).
    pub store_distributions: bool,
}

impl Default for MasterOptions {
    fn default() -> Self {
        MasterOptions { state_cap: 4096, atol: 1e-10, rtol: 1e-10, store_distributions: false }
    }
}

/// Exact expected trajectory: `mu[t]` is `E[ξ̄(t)]` and `nu_mean[t]` the
/// expected normalized pair counts (upper triangle including diagonal).
#[derive(Clone, Debug)]
pub struct MasterSolution {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub mu: Vec<Vec<f64>>,
    pub nu_mean: Vec<Vec<f64>>,
    pub distributions: Option<Vec<Vec<f64>>>,
    pub stats: OdeStats,
}

impl MasterSolution {
    pub fn nu_mean_at(&self, t_idx: usize, s: usize, sp: usize) -> f64 {
        self.nu_mean[t_idx][nu_index(self.labels.len(), s, sp)]
    }

    /// Expected ordered pair count `E[Σ a_ij 1{ξ_i=a} 1{ξ_j=b}]` at a grid
    /// time; requires stored distributions.
    pub fn expected_pair(&self, g: &Graph, t_idx: usize, a: usize, b: usize) -> Option<f64> {
        let dist = self.distributions.as_ref()?.get(t_idx)?;
        let k = self.labels.len();
        let mut acc = 0.0;
        for_each_state(k, g.n(), |z, digits| {
            let p = dist[z];
            if p == 0.0 {
                return;
            }
            let mut count = 0u64;
            for i in 0..g.n() {
                if digits[i] as usize != a {
                    continue;
                }
                for &j in g.neighbors(i) {
                    if digits[j as usize] as usize == b {
                        count += 1;
                    }
                }
            }
            acc += p * count as f64;
        });
        Some(acc)
    }

    /// Expected ordered walk count `E[Σ a_ij a_jk 1{ξ_i=a} 1{ξ_j=b} 1{ξ_k=c}]`
    /// (closed walks included); requires stored distributions.
    pub fn expected_triple(&self, g: &Graph, t_idx: usize, a: usize, b: usize, c: usize) -> Option<f64> {
        let dist = self.distributions.as_ref()?.get(t_idx)?;
        let k = self.labels.len();
        let mut acc = 0.0;
        for_each_state(k, g.n(), |z, digits| {
            let p = dist[z];
            if p == 0.0 {
                return;
            }
            let mut count = 0u64;
            for j in 0..g.n() {
                if digits[j] as usize != b {
                    continue;
                }
                let mut in_a = 0u64;
                let mut in_c = 0u64;
                for &w in g.neighbors(j) {
                    let s = digits[w as usize] as usize;
                    if s == a {
                        in_a += 1;
                    }
                    if s == c {
                        in_c += 1;
                    }
                }
                count += in_a * in_c;
            }
            acc += p * count as f64;
        });
        Some(acc)
    }
}

/// Walks every configuration index together with its digit vector, updating
/// the digits odometer-style (amortized O(1) per configuration).
fn for_each_state<F: FnMut(usize, &[u8])>(k: usize, n: usize, mut f: F) {
    let size = k.pow(n as u32);
    let mut digits = vec![0u8; n];
    f(0, &digits);
    for z in 1..size {
        let mut i = 0;
        loop {
            digits[i] += 1;
            if (digits[i] as usize) < k {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        f(z, &digits);
    }
}

pub fn master_equation(
    g: &Graph,
    m: &ModelSpec,
    init: &StateAssignment,
    horizon: f64,
    dt: f64,
) -> Result<MasterSolution, MasterError> {
    master_equation_with(g, m, init, horizon, dt, &MasterOptions::default())
}

pub fn master_equation_with(
    g: &Graph,
    m: &ModelSpec,
    init: &StateAssignment,
    horizon: f64,
    dt: f64,
    opts: &MasterOptions,
) -> Result<MasterSolution, MasterError> {
    if init.n() != g.n() {
        return Err(MasterError::AssignmentMismatch { got: init.n(), want: g.n() });
    }
    let k = m.num_states();
    let size = checked_size(k, g.n(), opts.state_cap)?;
    let mut p0 = vec![0.0; size];
    let mut idx = 0usize;
    for i in (0..g.n()).rev() {
        idx = idx * k + init.state_of(i);
    }
    p0[idx] = 1.0;
    solve(g, m, p0, horizon, dt, opts)
}

/// Forward equations from an arbitrary initial distribution over the product
/// space (mixed-radix indexing, vertex 0 least significant).
pub fn master_equation_from_distribution(
    g: &Graph,
    m: &ModelSpec,
    p0: Vec<f64>,
    horizon: f64,
    dt: f64,
    opts: &MasterOptions,
) -> Result<MasterSolution, MasterError> {
    let size = checked_size(m.num_states(), g.n(), opts.state_cap)?;
    if p0.len() != size {
        return Err(MasterError::DistributionLength { got: p0.len(), want: size });
    }
    let sum: f64 = p0.iter().sum();
    if p0.iter().any(|&v| v < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(MasterError::NotADistribution(sum));
    }
    solve(g, m, p0, horizon, dt, opts)
}

fn checked_size(k: usize, n: usize, cap: usize) -> Result<usize, MasterError> {
    let size = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if size > cap as u128 {
        return Err(MasterError::StateSpaceTooLarge { size, cap });
    }
    Ok(size as usize)
}

fn solve(
    g: &Graph,
    m: &ModelSpec,
    p0: Vec<f64>,
    horizon: f64,
    dt: f64,
    opts: &MasterOptions,
) -> Result<MasterSolution, MasterError> {
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(MasterError::BadTimeGrid { horizon, dt });
    }
    let n = g.n();
    let k = m.num_states();
    let size = p0.len();
    let dbar = g.mean_degree();
    let pow: Vec<usize> = (0..n).map(|i| k.pow(i as u32)).collect();

    // scratch reused across RHS evaluations
    let mut digits = vec![0u8; n];
    let mut cnt = vec![0.0f64; k];

    let rhs = move |p: &[f64], dp: &mut [f64]| {
        dp.iter_mut().for_each(|v| *v = 0.0);
        digits.iter_mut().for_each(|d| *d = 0);
        for z in 0..size {
            if z > 0 {
                let mut i = 0;
                loop {
                    digits[i] += 1;
                    if (digits[i] as usize) < k {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
            }
            let pz = p[z];
            if pz == 0.0 {
                continue;
            }
            for i in 0..n {
                let x = digits[i] as usize;
                cnt.iter_mut().for_each(|c| *c = 0.0);
                for &j in g.neighbors(i) {
                    cnt[digits[j as usize] as usize] += 1.0;
                }
                for s in 0..k {
                    if s == x {
                        continue;
                    }
                    let mut rate = m.q0_at(s, x);
                    for r in 0..k {
                        rate += m.q1_at(s, x, r) * cnt[r];
                    }
                    // cnt holds raw neighbor counts; φ_r = cnt_r / d̄
                    rate = m.q0_at(s, x) + (rate - m.q0_at(s, x)) / dbar;
                    if rate > 0.0 {
                        let flow = rate * pz;
                        dp[z] -= flow;
                        dp[z - x * pow[i] + s * pow[i]] += flow;
                    }
                }
            }
        }
    };

    let steps = (horizon / dt + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let ode_opts = OdeOptions { atol: opts.atol, rtol: opts.rtol, ..Default::default() };
    let (dists, stats) = integrate_on_grid(rhs, &p0, &grid, &ode_opts, None)?;

    let mut mu = Vec::with_capacity(grid.len());
    let mut nu_mean = Vec::with_capacity(grid.len());
    let total_degree = g.total_degree() as f64;
    for dist in &dists {
        let mut mu_row = vec![0.0; k];
        let mut pair_row = vec![0.0; k * k];
        for_each_state(k, n, |z, digits| {
            let p = dist[z];
            if p == 0.0 {
                return;
            }
            for i in 0..n {
                mu_row[digits[i] as usize] += p;
            }
            for i in 0..n {
                let si = digits[i] as usize;
                for &j in g.neighbors(i) {
                    pair_row[si * k + digits[j as usize] as usize] += p;
                }
            }
        });
        for v in mu_row.iter_mut() {
            *v /= n as f64;
        }
        let mut nu_row = Vec::with_capacity(k * (k + 1) / 2);
        for s in 0..k {
            for sp in s..k {
                nu_row.push(pair_row[s * k + sp] / total_degree);
            }
        }
        mu.push(mu_row);
        nu_mean.push(nu_row);
    }

    Ok(MasterSolution {
        labels: m.labels().to_vec(),
        times: grid,
        mu,
        nu_mean,
        distributions: if opts.store_distributions { Some(dists) } else { None },
        stats,
    })
}
