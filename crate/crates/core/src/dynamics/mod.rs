//! Vertex-level Markov dynamics with affine transition rates.
//!
//! A model is a finite state set `S` plus rate tensors: the transition rate
//! into state `s` from state `s'` for a vertex with normalized neighborhood
//! vector `φ` is
//!
//! ```text
//! q_{ss'}(φ) = q0[s][s'] + Σ_r q1[s][s'][r] · φ_r
//! ```
//!
//! **Index convention:** `q_{ss'}` is the rate *from `s'` to `s`* — first
//! index = target, second = source. This matches column-vector calculus
//! downstream but is easy to misread; every constructor and accessor in this
//! module is written against it. Diagonal entries are not free data: they are
//! defined as negative column sums, so the stored tensors keep them zero.
//!
//! `φ_{i,r} = (1/d̄)·#{neighbors of i in state r}`, so `‖φ_i‖₁ = d(i)/d̄`.

mod master;
mod simulate;

pub use master::{master_equation, master_equation_from_distribution, master_equation_with, MasterError, MasterOptions, MasterSolution};
pub use simulate::{simulate, simulate_with_states, SimError, Trajectory};

use crate::graph::Graph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("a model needs at least 2 states, got {0}")]
    TooFewStates(usize),
    #[error("at most 250 states supported, got {0}")]
    TooManyStates(usize),
    #[error("duplicate state label `{0}`")]
    DuplicateLabel(String),
    #[error("rate coefficient q{tensor}[{s}][{sp}]{r} = {value} must be finite and non-negative")]
    BadCoefficient { tensor: u8, s: usize, sp: usize, r: String, value: f64 },
    #[error("diagonal entries are defined as negative column sums and must be stored as zero (q{tensor} at state {s})")]
    NonzeroDiagonal { tensor: u8, s: usize },
    #[error("tensor has wrong shape: expected {expected} entries, got {got}")]
    BadShape { expected: usize, got: usize },
    #[error("unknown state label `{0}`")]
    UnknownState(String),
}

/// Affine rate family over an ordered finite state space.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSpec {
    labels: Vec<String>,
    k: usize,
    /// `q0[s*k + s']`: constant part of the rate s' → s; zero diagonal.
    q0: Vec<f64>,
    /// `q1[(s*k + s')*k + r]`: coefficient of φ_r in the rate s' → s.
    q1: Vec<f64>,
}

/// Flat index of `q1[target][source][r]`.
fn q1_idx(k: usize, target: usize, source: usize, r: usize) -> usize {
    (target * k + source) * k + r
}

/// Flat index of `q0[target][source]`.
fn q0_idx(k: usize, target: usize, source: usize) -> usize {
    target * k + source
}

impl ModelSpec {
    pub fn new(labels: Vec<String>, q0: Vec<f64>, q1: Vec<f64>) -> Result<Self, ModelError> {
        let k = labels.len();
        if k < 2 {
            return Err(ModelError::TooFewStates(k));
        }
        if k > 250 {
            return Err(ModelError::TooManyStates(k));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(ModelError::DuplicateLabel(l.clone()));
            }
        }
        if q0.len() != k * k {
            return Err(ModelError::BadShape { expected: k * k, got: q0.len() });
        }
        if q1.len() != k * k * k {
            return Err(ModelError::BadShape { expected: k * k * k, got: q1.len() });
        }
        for s in 0..k {
            if q0[s * k + s] != 0.0 {
                return Err(ModelError::NonzeroDiagonal { tensor: 0, s });
            }
            for r in 0..k {
                if q1[(s * k + s) * k + r] != 0.0 {
                    return Err(ModelError::NonzeroDiagonal { tensor: 1, s });
                }
            }
        }
        for s in 0..k {
            for sp in 0..k {
                let v = q0[s * k + sp];
                if !v.is_finite() || v < 0.0 {
                    return Err(ModelError::BadCoefficient { tensor: 0, s, sp, r: String::new(), value: v });
                }
                for r in 0..k {
                    let v = q1[(s * k + sp) * k + r];
                    if !v.is_finite() || v < 0.0 {
                        return Err(ModelError::BadCoefficient { tensor: 1, s, sp, r: format!("[{r}]"), value: v });
                    }
                }
            }
        }
        Ok(ModelSpec { labels, k, q0, q1 })
    }

    /// SIS: infected vertices are cured at constant rate γ (I → S), and
    /// susceptible ones get infected at rate β·φ_I (S → I).
    pub fn sis(beta: f64, gamma: f64) -> Result<Self, ModelError> {
        let labels = vec!["S".into(), "I".into()];
        let k = 2;
        let mut q0 = vec![0.0; k * k];
        let mut q1 = vec![0.0; k * k * k];
        q0[q0_idx(k, 0, 1)] = gamma; // q_{SI} = γ: target S, source I
        q1[q1_idx(k, 1, 0, 1)] = beta; // q_{IS} = β·φ_I: target I, source S, r = I
        Self::new(labels, q0, q1)
    }

    /// SIR over {S, I, R}: recovery I → R at rate γ, infection S → I at β·φ_I.
    pub fn sir(beta: f64, gamma: f64) -> Result<Self, ModelError> {
        let labels = vec!["S".into(), "I".into(), "R".into()];
        let k = 3;
        let mut q0 = vec![0.0; k * k];
        let mut q1 = vec![0.0; k * k * k];
        q0[q0_idx(k, 2, 1)] = gamma; // q_{RI} = γ
        q1[q1_idx(k, 1, 0, 1)] = beta; // q_{IS} = β·φ_I
        Self::new(labels, q0, q1)
    }

    /// SI: SIR with γ = 0 (state R exists but is unreachable).
    pub fn si(beta: f64) -> Result<Self, ModelError> {
        Self::sir(beta, 0.0)
    }

    /// Two-state auxiliary model over {a, b} whose only transition a → b has
    /// rate `φ_a + φ_b = ‖φ‖₁ = d(i)/d̄`: each vertex decays independently at
    /// a rate set by its own degree.
    pub fn degree_process() -> Result<Self, ModelError> {
        let labels = vec!["a".into(), "b".into()];
        let k = 2;
        let q0 = vec![0.0; k * k];
        let mut q1 = vec![0.0; k * k * k];
        q1[q1_idx(k, 1, 0, 0)] = 1.0; // q_{ba}: coefficient 1 on φ_a
        q1[q1_idx(k, 1, 0, 1)] = 1.0; // q_{ba}: coefficient 1 on φ_b
        Self::new(labels, q0, q1)
    }

    pub fn num_states(&self) -> usize {
        self.k
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn q0_at(&self, s: usize, sp: usize) -> f64 {
        self.q0[q0_idx(self.k, s, sp)]
    }

    pub fn q1_at(&self, s: usize, sp: usize, r: usize) -> f64 {
        self.q1[q1_idx(self.k, s, sp, r)]
    }

    /// Off-diagonal rate s' → s at neighborhood vector `phi`.
    pub fn rate(&self, s: usize, sp: usize, phi: &[f64]) -> f64 {
        debug_assert_ne!(s, sp);
        let mut acc = self.q0_at(s, sp);
        for r in 0..self.k {
            acc += self.q1_at(s, sp, r) * phi[r];
        }
        acc
    }

    /// Largest constant coefficient.
    pub fn q_max0(&self) -> f64 {
        self.q0.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Largest φ-coefficient.
    pub fn q_max1(&self) -> f64 {
        self.q1.iter().fold(0.0f64, |m, &v| m.max(v))
    }

    /// Total outgoing-rate coefficients per source state: the constant part
    /// `Σ_{s≠x} q0[s][x]` and the φ_r coefficients `Σ_{s≠x} q1[s][x][r]`.
    /// The event engine prices a whole vertex from these in O(|S|).
    pub(crate) fn out_rate_coeffs(&self) -> (Vec<f64>, Vec<f64>) {
        let k = self.k;
        let mut c0 = vec![0.0; k];
        let mut kap = vec![0.0; k * k];
        for x in 0..k {
            for s in 0..k {
                if s == x {
                    continue;
                }
                c0[x] += self.q0_at(s, x);
                for r in 0..k {
                    kap[x * k + r] += self.q1_at(s, x, r);
                }
            }
        }
        (c0, kap)
    }
}

/// JSON form of a model: labels, the dense constant-rate matrix (row = target
/// state, column = source state, zero diagonal) and sparse φ-coefficients.
#[derive(Serialize, Deserialize)]
struct ModelSpecJson {
    states: Vec<String>,
    q0: Vec<Vec<f64>>,
    q1: Vec<Q1Entry>,
}

#[derive(Serialize, Deserialize)]
struct Q1Entry {
    s: usize,
    from: usize,
    r: usize,
    value: f64,
}

impl Serialize for ModelSpec {
    fn serialize<Ser: serde::Serializer>(&self, serializer: Ser) -> Result<Ser::Ok, Ser::Error> {
        let k = self.k;
        let q0 = (0..k).map(|s| (0..k).map(|sp| self.q0_at(s, sp)).collect()).collect();
        let mut q1 = Vec::new();
        for s in 0..k {
            for sp in 0..k {
                for r in 0..k {
                    let v = self.q1_at(s, sp, r);
                    if v != 0.0 {
                        q1.push(Q1Entry { s, from: sp, r, value: v });
                    }
                }
            }
        }
        ModelSpecJson { states: self.labels.clone(), q0, q1 }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ModelSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = ModelSpecJson::deserialize(deserializer)?;
        let k = raw.states.len();
        let mut q0 = vec![0.0; k * k];
        for (s, row) in raw.q0.iter().enumerate() {
            if row.len() != k || s >= k {
                return Err(serde::de::Error::custom("q0 must be a |S|×|S| matrix"));
            }
            for (sp, &v) in row.iter().enumerate() {
                q0[s * k + sp] = v;
            }
        }
        if raw.q0.len() != k {
            return Err(serde::de::Error::custom("q0 must be a |S|×|S| matrix"));
        }
        let mut q1 = vec![0.0; k * k * k];
        for e in &raw.q1 {
            if e.s >= k || e.from >= k || e.r >= k {
                return Err(serde::de::Error::custom("q1 entry index out of range"));
            }
            q1[(e.s * k + e.from) * k + e.r] = e.value;
        }
        ModelSpec::new(raw.states, q0, q1).map_err(serde::de::Error::custom)
    }
}

/// Per-vertex state configuration at one instant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateAssignment {
    states: Vec<u8>,
    num_states: usize,
}

impl StateAssignment {
    pub fn new(states: Vec<u8>, num_states: usize) -> Result<Self, ModelError> {
        if num_states < 2 {
            return Err(ModelError::TooFewStates(num_states));
        }
        if let Some(&bad) = states.iter().find(|&&s| s as usize >= num_states) {
            return Err(ModelError::UnknownState(format!("state index {bad}")));
        }
        Ok(StateAssignment { states, num_states })
    }

    /// Every vertex in the same state.
    pub fn uniform(n: usize, state: usize, num_states: usize) -> Result<Self, ModelError> {
        Self::new(vec![state as u8; n], num_states)
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn state_of(&self, i: usize) -> usize {
        self.states[i] as usize
    }

    pub fn set_state(&mut self, i: usize, s: usize) {
        assert!(s < self.num_states);
        self.states[i] = s as u8;
    }

    pub fn states(&self) -> &[u8] {
        &self.states
    }

    /// Population fractions ξ̄ (a point on the simplex).
    pub fn xbar(&self) -> Vec<f64> {
        let mut counts = vec![0usize; self.num_states];
        for &s in &self.states {
            counts[s as usize] += 1;
        }
        counts.iter().map(|&c| c as f64 / self.states.len() as f64).collect()
    }

    pub fn state_set(&self, s: usize) -> crate::graph::VertexSet {
        let mut set = crate::graph::VertexSet::empty(self.states.len());
        for (i, &x) in self.states.iter().enumerate() {
            if x as usize == s {
                set.insert(i);
            }
        }
        set
    }
}

/// Normalized neighborhood vector of vertex `i`:
/// `φ_{i,r} = (1/d̄)·#{neighbors of i in state r}`.
pub fn phi(g: &Graph, xi: &StateAssignment, i: usize) -> Vec<f64> {
    assert_eq!(g.n(), xi.n(), "assignment does not match graph order");
    let mut out = vec![0.0; xi.num_states()];
    for &j in g.neighbors(i) {
        out[xi.state_of(j as usize)] += 1.0;
    }
    let dbar = g.mean_degree();
    for v in out.iter_mut() {
        *v /= dbar;
    }
    out
}

/// Ordered pair count `Σ_{ij} a_ij 1{ξ_i = a} 1{ξ_j = b}`; edges with both
/// endpoints matching a = b count twice.
pub fn pair_count(g: &Graph, xi: &StateAssignment, a: usize, b: usize) -> u64 {
    assert_eq!(g.n(), xi.n());
    let mut count = 0u64;
    for i in 0..g.n() {
        if xi.state_of(i) != a {
            continue;
        }
        for &j in g.neighbors(i) {
            if xi.state_of(j as usize) == b {
                count += 1;
            }
        }
    }
    count
}

/// Ordered walk count `Σ_{ijk} a_ij a_jk 1{ξ_i = a} 1{ξ_j = b} 1{ξ_k = c}`.
/// The sum is over all index triples, so closed walks (k = i) are included;
/// with a = c each such walk contributes `[a,b]` once.
pub fn triple_count(g: &Graph, xi: &StateAssignment, a: usize, b: usize, c: usize) -> u64 {
    assert_eq!(g.n(), xi.n());
    let mut count = 0u64;
    for j in 0..g.n() {
        if xi.state_of(j) != b {
            continue;
        }
        let mut in_a = 0u64;
        let mut in_c = 0u64;
        for &w in g.neighbors(j) {
            let s = xi.state_of(w as usize);
            if s == a {
                in_a += 1;
            }
            if s == c {
                in_c += 1;
            }
        }
        count += in_a * in_c;
    }
    count
}
