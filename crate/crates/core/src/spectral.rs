//! Normalized adjacency spectrum, the expander mixing bound, and core
//! extraction.
//!
//! The matrix under study is `B = D^{-1/2} A D^{-1/2}` on the (induced)
//! subgraph with isolated vertices dropped — their degree makes `D^{-1/2}`
//! undefined and they carry no volume, so they cannot affect any
//! volume-weighted discrepancy. Small graphs get a dense symmetric
//! eigensolve; larger ones a deflated power iteration against the known top
//! eigenpair `(1, D^{1/2}·1)`.

use crate::discrepancy::{brute_force_del_tilde, del_star, delta_tilde, DiscrepancyError};
use crate::graph::{Graph, VertexSet};
use crate::rng::rng_from_seed;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("the (restricted) graph has no edges")]
    EdgelessRestriction,
    #[error("degree {0} must be at least 2")]
    DegreeTooSmall(usize),
    #[error("power iteration failed to converge within {0} iterations")]
    NoConvergence(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectralMethod {
    DenseFull,
    Iterative,
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralOptions {
    /// Dense solver used up to this many (non-isolated) vertices.
    pub dense_threshold: usize,
    /// Stop when the eigenvalue estimate moves less than this per iteration.
    pub power_tol: f64,
    pub power_max_iter: usize,
    /// Seed for the random start vector of the power iteration.
    pub seed: u64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions { dense_threshold: 2000, power_tol: 1e-8, power_max_iter: 100_000, seed: 0x5EED }
    }
}

/// Spectrum summary of the normalized adjacency matrix.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// λ = max{λ₂, −λ_N}, the second-largest eigenvalue in absolute value.
    pub lambda_second: f64,
    /// 1 − λ.
    pub spectral_gap: f64,
    /// (λ₁, λ₂, λ_N).
    pub eigenvalue_extremes: (f64, f64, f64),
    pub method: SpectralMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restricted_to: Option<Vec<usize>>,
    /// Vertices that were dropped because they are isolated in the
    /// (restricted) graph.
    pub excluded_isolated: Vec<usize>,
}

/// Eigenvalue extremes of `B` on the graph induced by `restrict` (the whole
/// graph when `None`).
pub fn spectral_report(g: &Graph, restrict: Option<&VertexSet>) -> Result<SpectralReport, SpectralError> {
    spectral_report_with(g, restrict, &SpectralOptions::default())
}

pub fn spectral_report_with(
    g: &Graph,
    restrict: Option<&VertexSet>,
    opts: &SpectralOptions,
) -> Result<SpectralReport, SpectralError> {
    // induced vertex list; a vertex is kept only if it has a neighbor inside
    let members: Vec<usize> = match restrict {
        Some(set) => {
            assert_eq!(set.n(), g.n(), "restriction does not match graph order");
            set.indices()
        }
        None => (0..g.n()).collect(),
    };
    let in_set = |v: usize| match restrict {
        Some(set) => set.contains(v),
        None => true,
    };
    let mut kept = Vec::with_capacity(members.len());
    let mut excluded = Vec::new();
    for &v in &members {
        if g.neighbors(v).iter().any(|&w| in_set(w as usize)) {
            kept.push(v);
        } else {
            excluded.push(v);
        }
    }
    if kept.len() < 2 {
        return Err(SpectralError::EdgelessRestriction);
    }
    let pos_of: std::collections::HashMap<usize, u32> =
        kept.iter().enumerate().map(|(p, &v)| (v, p as u32)).collect();
    let m = kept.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); m];
    for (p, &v) in kept.iter().enumerate() {
        for &w in g.neighbors(v) {
            if let Some(&q) = pos_of.get(&(w as usize)) {
                adj[p].push(q);
            }
        }
    }
    let degs: Vec<f64> = adj.iter().map(|nb| nb.len() as f64).collect();

    let (extremes, method) = if m <= opts.dense_threshold {
        (dense_extremes(&adj, &degs), SpectralMethod::DenseFull)
    } else {
        (iterative_extremes(&adj, &degs, opts)?, SpectralMethod::Iterative)
    };
    let (_, l2, ln) = extremes;
    let lambda = l2.max(-ln);
    Ok(SpectralReport {
        lambda_second: lambda,
        spectral_gap: 1.0 - lambda,
        eigenvalue_extremes: extremes,
        method,
        restricted_to: restrict.map(|s| s.indices()),
        excluded_isolated: excluded,
    })
}

fn dense_extremes(adj: &[Vec<u32>], degs: &[f64]) -> (f64, f64, f64) {
    let m = adj.len();
    let mut mat = DMatrix::<f64>::zeros(m, m);
    for (i, nb) in adj.iter().enumerate() {
        for &j in nb {
            mat[(i, j as usize)] = 1.0 / (degs[i] * degs[j as usize]).sqrt();
        }
    }
    let eig = SymmetricEigen::new(mat);
    let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (ev[0], ev[1], ev[m - 1])
}

/// Deflated power iteration. `D^{1/2}·1` is an exact eigenvector of `B` for
/// eigenvalue 1 whenever no kept vertex is isolated, so λ₁ = 1 analytically;
/// the other two extremes come from power iterations on the semi-definite
/// shifts `B + I` (largest remaining → λ₂) and `I − B` (→ λ_N), each
/// projected against the top eigenvector every step.
fn iterative_extremes(
    adj: &[Vec<u32>],
    degs: &[f64],
    opts: &SpectralOptions,
) -> Result<(f64, f64, f64), SpectralError> {
    let m = adj.len();
    let inv_sqrt: Vec<f64> = degs.iter().map(|&d| 1.0 / d.sqrt()).collect();
    let matvec = |x: &[f64], out: &mut [f64]| {
        for (i, nb) in adj.iter().enumerate() {
            let mut acc = 0.0;
            for &j in nb {
                acc += x[j as usize] * inv_sqrt[j as usize];
            }
            out[i] = acc * inv_sqrt[i];
        }
    };
    let mut top: Vec<f64> = degs.iter().map(|&d| d.sqrt()).collect();
    normalize(&mut top);

    let run = |shift_sign: f64| -> Result<f64, SpectralError> {
        // iterate x ← shift_sign·(B x) + x, projected ⊥ top each step
        let mut rng = rng_from_seed(opts.seed);
        let mut x: Vec<f64> = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
        project_out(&mut x, &top);
        normalize(&mut x);
        let mut bx = vec![0.0; m];
        let mut prev = f64::INFINITY;
        for _ in 0..opts.power_max_iter {
            matvec(&x, &mut bx);
            // Rayleigh quotient of B itself at the current iterate
            let lambda: f64 = x.iter().zip(&bx).map(|(a, b)| a * b).sum();
            for i in 0..m {
                x[i] = shift_sign * bx[i] + x[i];
            }
            project_out(&mut x, &top);
            let norm = normalize(&mut x);
            if norm == 0.0 {
                // landed exactly in the deflated nullspace; restart
                x = (0..m).map(|_| rng.random::<f64>() - 0.5).collect();
                project_out(&mut x, &top);
                normalize(&mut x);
                continue;
            }
            if (lambda - prev).abs() < opts.power_tol {
                return Ok(lambda);
            }
            prev = lambda;
        }
        Err(SpectralError::NoConvergence(opts.power_max_iter))
    };

    let l2 = run(1.0)?;
    let ln = run(-1.0)?;
    Ok((1.0, l2, ln))
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    norm
}

fn project_out(x: &mut [f64], unit: &[f64]) {
    let dot: f64 = x.iter().zip(unit).map(|(a, b)| a * b).sum();
    for (v, u) in x.iter_mut().zip(unit) {
        *v -= dot * u;
    }
}

/// `∂ ≤ ∂̃ + 2∂* ≤ λ + 2∂*`: a certified upper bound on the maximal
/// discrepancy that needs no subset sweep.
pub fn discrepancy_spectral_bound(g: &Graph) -> Result<f64, SpectralError> {
    Ok(spectral_report(g, None)?.lambda_second + 2.0 * del_star(g))
}

/// Outcome of checking the mixing bound `∂̃ ≤ λ` (exactly when the graph is
/// small enough to sweep) plus the per-pair form
/// `|δ̃(A,B)| ≤ λ·√(vol(A)·vol(B))/vol([N])` on sampled pairs.
#[derive(Clone, Debug, Serialize)]
pub struct MixingCheck {
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<f64>,
    pub holds: bool,
    pub sampled_pairs: usize,
    pub sampled_pairs_hold: bool,
}

pub fn mixing_bound_check(g: &Graph, cap: usize, seed: u64) -> Result<MixingCheck, SpectralError> {
    const PAIR_SAMPLES: usize = 64;
    const TOL: f64 = 1e-9;
    let lambda = spectral_report(g, None)?.lambda_second;
    let exact = match brute_force_del_tilde(g, cap) {
        Ok((v, _, _)) => Some(v),
        Err(DiscrepancyError::AboveCap { .. }) => None,
        Err(DiscrepancyError::ZeroVolume) => None,
    };
    let vol = g.total_degree() as f64;
    let mut rng = rng_from_seed(seed);
    let n = g.n();
    let mut sampled_ok = true;
    for _ in 0..PAIR_SAMPLES {
        let mut a = VertexSet::empty(n);
        let mut b = VertexSet::empty(n);
        for i in 0..n {
            if rng.random::<bool>() {
                a.insert(i);
            }
            if rng.random::<bool>() {
                b.insert(i);
            }
        }
        let lhs = delta_tilde(g, &a, &b).abs();
        let rhs = lambda * ((g.volume(&a) as f64 / vol) * (g.volume(&b) as f64 / vol)).sqrt();
        if lhs > rhs + TOL {
            sampled_ok = false;
            break;
        }
    }
    let exact_ok = exact.map(|e| e <= lambda + TOL).unwrap_or(true);
    Ok(MixingCheck {
        bound: lambda,
        exact,
        holds: exact_ok && sampled_ok,
        sampled_pairs: PAIR_SAMPLES,
        sampled_pairs_hold: sampled_ok,
    })
}

/// `2√(d−1)/d`: the level that the second eigenvalue of any large enough
/// `d`-regular graph must exceed (up to ε), used to contextualize measured
/// spectral gaps at fixed degree.
pub fn alon_boppana_floor(d: usize) -> Result<f64, SpectralError> {
    if d < 2 {
        return Err(SpectralError::DegreeTooSmall(d));
    }
    Ok(2.0 * ((d as f64) - 1.0).sqrt() / d as f64)
}

#[derive(Clone, Copy, Debug)]
pub struct CoreOptions {
    /// A vertex is evicted while it has at least this many neighbors outside
    /// the core.
    pub external_threshold: usize,
}

impl Default for CoreOptions {
    fn default() -> Self {
        CoreOptions { external_threshold: 100 }
    }
}

/// Result of the core-extraction procedure: seed the core with vertices of
/// degree at least half the target mean degree, then evict (smallest index
/// first) while some member has too many outside neighbors.
#[derive(Clone, Debug, Serialize)]
pub struct CoreResult {
    pub core_set: Vec<usize>,
    pub removed_init: Vec<usize>,
    /// Vertices evicted by the outside-neighbors loop, in eviction order.
    pub removed_iter: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub core_spectral: Option<SpectralReport>,
}

impl CoreResult {
    pub fn core_vertex_set(&self, n: usize) -> VertexSet {
        VertexSet::from_indices(n, self.core_set.iter().copied()).unwrap()
    }
}

pub fn extract_core(g: &Graph, mean_deg_target: f64) -> CoreResult {
    extract_core_with(g, mean_deg_target, &CoreOptions::default(), &SpectralOptions::default())
}

pub fn extract_core_with(
    g: &Graph,
    mean_deg_target: f64,
    opts: &CoreOptions,
    spectral_opts: &SpectralOptions,
) -> CoreResult {
    assert!(mean_deg_target > 0.0, "mean degree target must be positive");
    let n = g.n();
    let mut in_core = vec![false; n];
    let mut removed_init = Vec::new();
    for v in 0..n {
        if g.degree(v) as f64 >= mean_deg_target / 2.0 {
            in_core[v] = true;
        } else {
            removed_init.push(v);
        }
    }
    let mut outside: Vec<usize> = (0..n)
        .map(|v| g.neighbors(v).iter().filter(|&&w| !in_core[w as usize]).count())
        .collect();
    let mut violators: std::collections::BTreeSet<usize> = (0..n)
        .filter(|&v| in_core[v] && outside[v] >= opts.external_threshold)
        .collect();
    let mut removed_iter = Vec::new();
    while let Some(&v) = violators.iter().next() {
        violators.remove(&v);
        if !in_core[v] || outside[v] < opts.external_threshold {
            continue;
        }
        in_core[v] = false;
        removed_iter.push(v);
        for &w in g.neighbors(v) {
            let w = w as usize;
            if in_core[w] {
                outside[w] += 1;
                if outside[w] >= opts.external_threshold {
                    violators.insert(w);
                }
            }
        }
    }
    let core_set: Vec<usize> = (0..n).filter(|&v| in_core[v]).collect();
    let core_spectral = if core_set.is_empty() {
        None
    } else {
        let set = VertexSet::from_indices(n, core_set.iter().copied()).unwrap();
        spectral_report_with(g, Some(&set), spectral_opts).ok()
    };
    CoreResult { core_set, removed_init, removed_iter, core_spectral }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrepancy::DEFAULT_BRUTE_FORCE_CAP;
    use crate::graph::{gen_erdos_renyi, gen_named, gen_random_regular, Graph, NamedKind};

    #[test]
    fn complete_graph_lambda() {
        for n in [4usize, 6, 9] {
            let g = gen_named(NamedKind::Complete, n).unwrap();
            let r = spectral_report(&g, None).unwrap();
            assert!((r.lambda_second - 1.0 / (n as f64 - 1.0)).abs() < 1e-10, "K_{n}");
            assert!((r.eigenvalue_extremes.0 - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn regular_graph_matches_adjacency_spectrum() {
        // C₅: adjacency eigenvalues 2cos(2πk/5); λ = max{λ₂, −λ_N}/d and
        // −λ_N = −2cos(4π/5) = (1+√5)/2
        let g = gen_named(NamedKind::Cycle, 5).unwrap();
        let r = spectral_report(&g, None).unwrap();
        let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
        assert!((r.lambda_second - golden / 2.0).abs() < 1e-10);
    }

    #[test]
    fn bipartite_lambda_is_one() {
        for g in [
            gen_named(NamedKind::PerfectMatching, 8).unwrap(),
            gen_named(NamedKind::CompleteBipartite, 10).unwrap(),
            gen_named(NamedKind::Cycle, 6).unwrap(),
        ] {
            let r = spectral_report(&g, None).unwrap();
            assert!((r.lambda_second - 1.0).abs() < 1e-9);
            assert!((r.eigenvalue_extremes.2 + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_top_is_one_without_isolated_vertices() {
        for seed in 0..5 {
            let g = gen_erdos_renyi(40, 0.2, seed).unwrap();
            let r = spectral_report(&g, None).unwrap();
            assert!((r.eigenvalue_extremes.0 - 1.0).abs() < 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn isolated_vertices_are_dropped_and_recorded() {
        let g = Graph::from_edges(5, &[(0, 1), (1, 2)]).unwrap();
        let r = spectral_report(&g, None).unwrap();
        assert_eq!(r.excluded_isolated, vec![3, 4]);
        let all_iso = Graph::from_edges(4, &[(0, 1)]).unwrap();
        let set = VertexSet::from_indices(4, [2, 3]).unwrap();
        assert!(matches!(spectral_report(&all_iso, Some(&set)), Err(SpectralError::EdgelessRestriction)));
    }

    #[test]
    fn iterative_agrees_with_dense() {
        let g = gen_erdos_renyi(300, 0.05, 12).unwrap();
        let dense = spectral_report(&g, None).unwrap();
        let iter = spectral_report_with(
            &g,
            None,
            &SpectralOptions { dense_threshold: 0, power_tol: 1e-12, ..Default::default() },
        )
        .unwrap();
        assert_eq!(dense.method, SpectralMethod::DenseFull);
        assert_eq!(iter.method, SpectralMethod::Iterative);
        assert!(
            (dense.lambda_second - iter.lambda_second).abs() < 1e-6,
            "dense {} vs iterative {}",
            dense.lambda_second,
            iter.lambda_second
        );
        let d4 = gen_random_regular(120, 4, 5).unwrap();
        let dd = spectral_report(&d4, None).unwrap();
        let di = spectral_report_with(
            &d4,
            None,
            &SpectralOptions { dense_threshold: 0, power_tol: 1e-12, ..Default::default() },
        )
        .unwrap();
        assert!((dd.lambda_second - di.lambda_second).abs() < 1e-6);
        assert!((dd.eigenvalue_extremes.1 - di.eigenvalue_extremes.1).abs() < 1e-6);
        assert!((dd.eigenvalue_extremes.2 - di.eigenvalue_extremes.2).abs() < 1e-6);
    }

    #[test]
    fn mixing_bound_examples() {
        let k6 = gen_named(NamedKind::Complete, 6).unwrap();
        let chk = mixing_bound_check(&k6, DEFAULT_BRUTE_FORCE_CAP, 1).unwrap();
        assert!(chk.holds);
        assert!(chk.exact.unwrap() <= 0.2 + 1e-9);

        let reg = gen_random_regular(16, 4, 3).unwrap();
        let chk = mixing_bound_check(&reg, DEFAULT_BRUTE_FORCE_CAP, 2).unwrap();
        assert!(chk.holds);

        let pm = gen_named(NamedKind::PerfectMatching, 12).unwrap();
        let chk = mixing_bound_check(&pm, DEFAULT_BRUTE_FORCE_CAP, 3).unwrap();
        assert!((chk.bound - 1.0).abs() < 1e-9);
        assert!(chk.holds);
    }

    #[test]
    fn alon_boppana_values() {
        assert_eq!(alon_boppana_floor(2).unwrap(), 1.0);
        assert!((alon_boppana_floor(4).unwrap() - 3.0f64.sqrt() / 2.0).abs() < 1e-15);
        assert!((alon_boppana_floor(10).unwrap() - 0.6).abs() < 1e-15);
        assert!(alon_boppana_floor(1).is_err());
    }

    #[test]
    fn core_complete_graph_keeps_everything() {
        let g = gen_named(NamedKind::Complete, 12).unwrap();
        let r = extract_core(&g, 11.0);
        assert_eq!(r.core_set.len(), 12);
        assert!(r.removed_init.is_empty());
        assert!(r.removed_iter.is_empty());
        assert!(r.core_spectral.is_some());
    }

    #[test]
    fn core_star_keeps_everything_at_its_own_mean_degree() {
        let g = gen_named(NamedKind::Star, 200).unwrap();
        let r = extract_core(&g, g.mean_degree());
        assert_eq!(r.core_set.len(), 200);
    }

    #[test]
    fn core_drops_low_degree_pendants() {
        // K₁₀ plus 5 pendant vertices hanging off vertex 0
        let mut edges = Vec::new();
        for i in 0..10u32 {
            for j in i + 1..10 {
                edges.push((i, j));
            }
        }
        for p in 10..15u32 {
            edges.push((0, p));
        }
        let g = Graph::from_edges(15, &edges).unwrap();
        let target = g.mean_degree(); // ≈ 6.7, so degree-1 pendants fail target/2
        let r = extract_core(&g, target);
        assert_eq!(r.removed_init, vec![10, 11, 12, 13, 14]);
        assert_eq!(r.core_set.len(), 10);
    }

    #[test]
    fn core_eviction_loop_respects_threshold() {
        // hub connected to 6 low-degree satellites; threshold 3 forces the
        // eviction loop to fire once the satellites fall out of the seed set
        let mut edges = vec![(0u32, 1u32), (1, 2)];
        for s in 3..9u32 {
            edges.push((0, s));
        }
        let g = Graph::from_edges(9, &edges).unwrap();
        let r = extract_core_with(
            &g,
            6.0, // need degree ≥ 3 to seed: only the hub (degree 7) qualifies
            &CoreOptions { external_threshold: 3 },
            &SpectralOptions::default(),
        );
        assert_eq!(r.removed_init.len(), 8);
        assert_eq!(r.removed_iter, vec![0], "hub has 7 outside neighbors, must go");
        assert!(r.core_set.is_empty());
        assert!(r.core_spectral.is_none());
        let mut all: Vec<usize> =
            r.core_set.iter().chain(&r.removed_init).chain(&r.removed_iter).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn core_output_satisfies_external_neighbor_property() {
        let g = gen_erdos_renyi(400, 0.02, 9).unwrap();
        let opts = CoreOptions { external_threshold: 4 };
        let r = extract_core_with(&g, (400.0 - 1.0) * 0.02, &opts, &SpectralOptions::default());
        let in_core: std::collections::HashSet<_> = r.core_set.iter().copied().collect();
        for &v in &r.core_set {
            let out = g.neighbors(v).iter().filter(|&&w| !in_core.contains(&(w as usize))).count();
            assert!(out < opts.external_threshold, "vertex {v} has {out} outside neighbors");
        }
    }
}
