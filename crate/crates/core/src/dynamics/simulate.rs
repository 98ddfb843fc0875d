//! Exact event-driven simulation of the vertex-level Markov chain.
//!
//! Direct-method Gillespie over grouped per-vertex rates: the waiting time is
//! exponential in the total rate, the firing vertex is drawn proportionally to
//! its rate through a Fenwick tree (O(log N)), and the target state from the
//! vertex's own rate row. After a flip only the firing vertex and its
//! neighbors are repriced — O(deg) per event — and the pair-count matrix
//! behind ν is updated by edge deltas rather than recomputed.
//!
//! Observables land on the fixed grid `t_k = k·Δt`: a row records the state
//! that was current when the grid time passed (the chain is piecewise
//! constant between events).

use super::{ModelSpec, StateAssignment};
use crate::graph::Graph;
use crate::rng::rng_from_seed;
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("assignment covers {got} vertices but the graph has {want}")]
    AssignmentMismatch { got: usize, want: usize },
    #[error("assignment has {got} states but the model has {want}")]
    StateCountMismatch { got: usize, want: usize },
    #[error("horizon and grid step must be positive, got T={horizon}, dt={dt}")]
    BadTimeGrid { horizon: f64, dt: f64 },
    #[error("total event rate is not finite (bound {0})")]
    RateOverflow(f64),
}

/// Time-stamped population observables from one run.
///
/// `xbar[t]` is the per-state population fraction; `nu[t]` stores the
/// normalized pair counts `ν_{ss'} = e(V_s, V_{s'})/(N·d̄)` as the upper
/// triangle including the diagonal, row-major over `s ≤ s'`. `events[t]` is
/// the cumulative event count when the grid time was recorded.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub labels: Vec<String>,
    pub times: Vec<f64>,
    pub xbar: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub events: Vec<u64>,
    pub event_count: u64,
    pub seed: u64,
}

/// Index into the packed upper triangle (diagonal included) for `s ≤ sp`.
pub fn nu_index(k: usize, s: usize, sp: usize) -> usize {
    let (s, sp) = if s <= sp { (s, sp) } else { (sp, s) };
    s * k - s * (s + 1) / 2 + sp
}

impl Trajectory {
    pub fn num_states(&self) -> usize {
        self.labels.len()
    }

    /// ν_{s sp} at grid row `t_idx` (symmetric lookup).
    pub fn nu_at(&self, t_idx: usize, s: usize, sp: usize) -> f64 {
        self.nu[t_idx][nu_index(self.labels.len(), s, sp)]
    }

    /// CSV with header `t,xbar_<label>…,nu_<a>_<b>…,events`.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        let k = self.labels.len();
        write!(w, "t")?;
        for l in &self.labels {
            write!(w, ",xbar_{l}")?;
        }
        for s in 0..k {
            for sp in s..k {
                write!(w, ",nu_{}_{}", self.labels[s], self.labels[sp])?;
            }
        }
        writeln!(w, ",events")?;
        for (idx, &t) in self.times.iter().enumerate() {
            write!(w, "{t}")?;
            for v in &self.xbar[idx] {
                write!(w, ",{v}")?;
            }
            for v in &self.nu[idx] {
                write!(w, ",{v}")?;
            }
            writeln!(w, ",{}", self.events[idx])?;
        }
        Ok(())
    }
}

/// Fenwick tree over per-vertex rates: prefix sums for proportional sampling,
/// point updates in O(log n).
struct Fenwick {
    tree: Vec<f64>,
    n: usize,
}

impl Fenwick {
    fn build(values: &[f64]) -> Self {
        let n = values.len();
        let mut tree = vec![0.0; n + 1];
        for (i, &v) in values.iter().enumerate() {
            let mut idx = i + 1;
            while idx <= n {
                tree[idx] += v;
                idx += idx & idx.wrapping_neg();
            }
        }
        Fenwick { tree, n }
    }

    fn add(&mut self, i: usize, delta: f64) {
        let mut idx = i + 1;
        while idx <= self.n {
            self.tree[idx] += delta;
            idx += idx & idx.wrapping_neg();
        }
    }

    fn total(&self) -> f64 {
        self.prefix(self.n)
    }

    fn prefix(&self, count: usize) -> f64 {
        let mut idx = count;
        let mut acc = 0.0;
        while idx > 0 {
            acc += self.tree[idx];
            idx -= idx & idx.wrapping_neg();
        }
        acc
    }

    /// First index whose prefix sum exceeds `target`.
    fn select(&self, mut target: f64) -> usize {
        let mut pos = 0usize;
        let mut step = self.n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next <= self.n && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(self.n - 1)
    }
}

pub fn simulate(
    g: &Graph,
    m: &ModelSpec,
    init: &StateAssignment,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<Trajectory, SimError> {
    run(g, m, init, horizon, dt, seed, false).map(|(t, _)| t)
}

/// Like [`simulate`] but also returns the vertex states at every grid time.
pub fn simulate_with_states(
    g: &Graph,
    m: &ModelSpec,
    init: &StateAssignment,
    horizon: f64,
    dt: f64,
    seed: u64,
) -> Result<(Trajectory, Vec<StateAssignment>), SimError> {
    run(g, m, init, horizon, dt, seed, true).map(|(t, s)| (t, s.unwrap()))
}

fn run(
    g: &Graph,
    m: &ModelSpec,
    init: &StateAssignment,
    horizon: f64,
    dt: f64,
    seed: u64,
    record_states: bool,
) -> Result<(Trajectory, Option<Vec<StateAssignment>>), SimError> {
    let n = g.n();
    let k = m.num_states();
    if init.n() != n {
        return Err(SimError::AssignmentMismatch { got: init.n(), want: n });
    }
    if init.num_states() != k {
        return Err(SimError::StateCountMismatch { got: init.num_states(), want: k });
    }
    if !(horizon > 0.0) || !(dt > 0.0) {
        return Err(SimError::BadTimeGrid { horizon, dt });
    }
    let dbar = g.mean_degree();
    let rate_bound =
        n as f64 * (m.q_max0() * k as f64 + m.q_max1() * k as f64 * g.max_degree() as f64 / dbar);
    if !rate_bound.is_finite() {
        return Err(SimError::RateOverflow(rate_bound));
    }

    let (c0_out, kappa_out) = m.out_rate_coeffs();
    let mut state: Vec<u8> = init.states().to_vec();

    // neighbor state counts, flattened n×k
    let mut counts = vec![0u32; n * k];
    for i in 0..n {
        for &j in g.neighbors(i) {
            counts[i * k + state[j as usize] as usize] += 1;
        }
    }
    let vertex_rate = |x: usize, cnt: &[u32]| -> f64 {
        let mut acc = 0.0;
        for r in 0..k {
            acc += kappa_out[x * k + r] * cnt[r] as f64;
        }
        c0_out[x] + acc / dbar
    };
    let mut rates: Vec<f64> = (0..n).map(|i| vertex_rate(state[i] as usize, &counts[i * k..(i + 1) * k])).collect();
    let mut fen = Fenwick::build(&rates);

    // ordered pair counts P[s][s'] and state sizes
    let mut pairs = vec![0u64; k * k];
    for i in 0..n {
        let si = state[i] as usize;
        for &j in g.neighbors(i) {
            pairs[si * k + state[j as usize] as usize] += 1;
        }
    }
    let mut sizes = vec![0u64; k];
    for &s in &state {
        sizes[s as usize] += 1;
    }

    let steps = (horizon / dt + 1e-9).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let total_degree = g.total_degree() as f64;

    let mut traj = Trajectory {
        labels: m.labels().to_vec(),
        times: grid.clone(),
        xbar: Vec::with_capacity(grid.len()),
        nu: Vec::with_capacity(grid.len()),
        events: Vec::with_capacity(grid.len()),
        event_count: 0,
        seed,
    };
    let mut states_at_grid: Option<Vec<StateAssignment>> = if record_states { Some(Vec::new()) } else { None };

    let record = |traj: &mut Trajectory, states_at_grid: &mut Option<Vec<StateAssignment>>, sizes: &[u64], pairs: &[u64], events: u64, state: &[u8]| {
        traj.xbar.push(sizes.iter().map(|&c| c as f64 / n as f64).collect());
        let mut nu_row = Vec::with_capacity(k * (k + 1) / 2);
        for s in 0..k {
            for sp in s..k {
                nu_row.push(pairs[s * k + sp] as f64 / total_degree);
            }
        }
        traj.nu.push(nu_row);
        traj.events.push(events);
        if let Some(list) = states_at_grid {
            list.push(StateAssignment::new(state.to_vec(), k).unwrap());
        }
    };

    let mut rng = rng_from_seed(seed);
    let mut t = 0.0f64;
    let mut events = 0u64;
    let mut next_grid = 0usize;
    let mut row = vec![0.0f64; k];
    const REBUILD_EVERY: u64 = 1 << 17;

    loop {
        let total = fen.total();
        if !total.is_finite() {
            return Err(SimError::RateOverflow(total));
        }
        let t_next = if total > 0.0 {
            let u: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
            t + (-u.ln()) / total
        } else {
            f64::INFINITY
        };
        while next_grid < grid.len() && grid[next_grid] <= t_next {
            record(&mut traj, &mut states_at_grid, &sizes, &pairs, events, &state);
            next_grid += 1;
        }
        if next_grid >= grid.len() || t_next > horizon {
            break;
        }
        t = t_next;

        // which vertex fires
        let target: f64 = rng.random::<f64>() * total;
        let i = fen.select(target);
        let x = state[i] as usize;
        // which transition: price the row freshly so conditional probabilities
        // are exact even if the tree value has drifted
        let cnt = &counts[i * k..(i + 1) * k];
        row.iter_mut().for_each(|v| *v = 0.0);
        let mut row_total = 0.0;
        for s in 0..k {
            if s == x {
                continue;
            }
            let mut acc = m.q0_at(s, x);
            for r in 0..k {
                acc += m.q1_at(s, x, r) * cnt[r] as f64 / dbar;
            }
            row[s] = acc.max(0.0);
            row_total += row[s];
        }
        if row_total <= 0.0 {
            // stale positive entry in the tree; reprice this vertex and retry
            let fresh = vertex_rate(x, cnt);
            fen.add(i, fresh - rates[i]);
            rates[i] = fresh;
            continue;
        }
        let mut draw = rng.random::<f64>() * row_total;
        let mut s_new = x;
        for s in 0..k {
            if s == x {
                continue;
            }
            if draw < row[s] {
                s_new = s;
                break;
            }
            draw -= row[s];
        }
        if s_new == x {
            s_new = (0..k).rev().find(|&s| s != x && row[s] > 0.0).unwrap();
        }

        // apply the flip x → s_new at vertex i
        for &jw in g.neighbors(i) {
            let j = jw as usize;
            let y = state[j] as usize;
            pairs[x * k + y] -= 1;
            pairs[y * k + x] -= 1;
            pairs[s_new * k + y] += 1;
            pairs[y * k + s_new] += 1;
            counts[j * k + x] -= 1;
            counts[j * k + s_new] += 1;
            let delta = (kappa_out[y * k + s_new] - kappa_out[y * k + x]) / dbar;
            if delta != 0.0 {
                let updated = (rates[j] + delta).max(0.0);
                fen.add(j, updated - rates[j]);
                rates[j] = updated;
            }
        }
        state[i] = s_new as u8;
        sizes[x] -= 1;
        sizes[s_new] += 1;
        let fresh = vertex_rate(s_new, &counts[i * k..(i + 1) * k]);
        fen.add(i, fresh - rates[i]);
        rates[i] = fresh;
        events += 1;

        if events % REBUILD_EVERY == 0 {
            for idx in 0..n {
                rates[idx] = vertex_rate(state[idx] as usize, &counts[idx * k..(idx + 1) * k]);
            }
            fen = Fenwick::build(&rates);
        }
    }

    traj.event_count = events;
    Ok((traj, states_at_grid))
}
