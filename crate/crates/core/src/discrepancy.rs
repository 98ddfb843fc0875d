//! Edge-density discrepancies.
//!
//! `delta(A,B)` measures how far the edge count between two vertex sets sits
//! from what a random graph of the same mean degree would put there. The
//! module computes the closed forms exactly and maximizes the rest by an
//! exhaustive subset sweep at desk scale.
//!
//! The sweep exploits that for fixed `A` the map `B ↦ δ(A,B)` is additive
//! with per-vertex contribution `c_j = e(A,{j})/(N·d̄) − |A|/N²`, so the
//! maximizing `B` collects exactly the positive contributions (negative for
//! the minimum). That turns the naive `4^N` pair enumeration into a `2^N`
//! sweep with `O(N)` inner work; the equivalence is checked against the naive
//! enumeration in tests. Vertex-count caps keep the sweeps at desk scale.
//!
//! Volume-weighted variants (`delta_tilde`, subgraph-restricted
//! `delta_tilde_sub`) use whole-graph degrees for every volume, including on
//! the restriction: that is the convention under which the
//! `|∂̃ − ∂̃_H| ≤ 10·vol(Hᶜ)/vol([N])` comparison holds.

use crate::graph::{edge_count, Graph, VertexSet};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default vertex-count cap for the `2^N` sweeps: about a minute of work at
/// `N = 24`, growing twofold per vertex beyond it.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 24;

#[derive(Debug, Error)]
pub enum DiscrepancyError {
    #[error("graph has {n} vertices, above the brute-force cap {cap}")]
    AboveCap { n: usize, cap: usize },
    #[error("restriction has zero volume")]
    ZeroVolume,
}

/// `δ(A,B) = e(A,B)/(N·d̄) − (|A|/N)(|B|/N)`.
pub fn delta(g: &Graph, a: &VertexSet, b: &VertexSet) -> f64 {
    let n = g.n() as f64;
    let total = g.total_degree() as f64;
    edge_count(g, a, b) as f64 / total - (a.len() as f64 / n) * (b.len() as f64 / n)
}

/// `∂* = (1/(2N·d̄)) Σ_i |d(i) − d̄|`, the closed form of
/// `max_A |δ(A,[N])|`. Zero exactly when the graph is regular.
pub fn del_star(g: &Graph) -> f64 {
    let dbar = g.mean_degree();
    let sum: f64 = (0..g.n()).map(|i| (g.degree(i) as f64 - dbar).abs()).sum();
    sum / (2.0 * g.total_degree() as f64)
}

/// Volume-weighted discrepancy
/// `δ̃(A,B) = e(A,B)/vol([N]) − (vol(A)/vol([N]))(vol(B)/vol([N]))`.
pub fn delta_tilde(g: &Graph, a: &VertexSet, b: &VertexSet) -> f64 {
    let vol = g.total_degree() as f64;
    edge_count(g, a, b) as f64 / vol
        - (g.volume(a) as f64 / vol) * (g.volume(b) as f64 / vol)
}

/// Discrepancy restricted to the subgraph induced by `h`:
/// `δ̃_H(A,B) = e(A∩H,B∩H)/vol(H) − (vol(A∩H)/vol(H))(vol(B∩H)/vol(H))`,
/// with all volumes measured by whole-graph degrees.
pub fn delta_tilde_sub(g: &Graph, h: &VertexSet, a: &VertexSet, b: &VertexSet) -> Result<f64, DiscrepancyError> {
    let vol_h = g.volume(h) as f64;
    if vol_h <= 0.0 {
        return Err(DiscrepancyError::ZeroVolume);
    }
    let an = intersect(a, h);
    let bn = intersect(b, h);
    Ok(edge_count(g, &an, &bn) as f64 / vol_h
        - (g.volume(&an) as f64 / vol_h) * (g.volume(&bn) as f64 / vol_h))
}

fn intersect(a: &VertexSet, b: &VertexSet) -> VertexSet {
    let mut out = VertexSet::empty(a.n());
    for i in a.iter() {
        if b.contains(i) {
            out.insert(i);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodTag {
    ExactBruteforce,
    ClosedForm,
    SpectralBound,
}

/// Which maxima the sweep should compute.
#[derive(Clone, Copy, Debug, Default)]
pub struct BruteForceRequest {
    pub del_max: bool,
    pub del_1: bool,
    pub del_2: bool,
    pub del_tilde: bool,
}

impl BruteForceRequest {
    pub fn all() -> Self {
        BruteForceRequest { del_max: true, del_1: true, del_2: true, del_tilde: true }
    }
}

/// Exactly computed discrepancy maxima with their maximizing witness sets.
/// Fields the caller did not request (or that were unavailable) are omitted
/// from the serialized form. Witnesses are sorted vertex index arrays; ties
/// among maximizers resolve to the numerically smallest bitmask pair
/// (vertex 0 = bit 0).
#[derive(Clone, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub n: usize,
    pub del_star: f64,
    pub del_star_method: MethodTag,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_max_method: Option<MethodTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_max_witness_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_max_witness_b: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_1_method: Option<MethodTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_1_witness: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_2_method: Option<MethodTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_2_witness_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_2_witness_b: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_tilde: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_tilde_method: Option<MethodTag>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_tilde_witness_a: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub del_tilde_witness_b: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral_bound_method: Option<MethodTag>,
}

impl DiscrepancyReport {
    fn closed_forms_only(g: &Graph) -> Self {
        DiscrepancyReport {
            n: g.n(),
            del_star: del_star(g),
            del_star_method: MethodTag::ClosedForm,
            del_max: None,
            del_max_method: None,
            del_max_witness_a: None,
            del_max_witness_b: None,
            del_1: None,
            del_1_method: None,
            del_1_witness: None,
            del_2: None,
            del_2_method: None,
            del_2_witness_a: None,
            del_2_witness_b: None,
            del_tilde: None,
            del_tilde_method: None,
            del_tilde_witness_a: None,
            del_tilde_witness_b: None,
            spectral_bound: None,
            spectral_bound_method: None,
        }
    }
}

/// Best value seen so far together with its witness masks; ties resolve to
/// the smallest `(a, b)` mask pair.
#[derive(Clone, Copy)]
struct Best {
    value: f64,
    mask_a: u64,
    mask_b: u64,
}

impl Best {
    fn new() -> Self {
        Best { value: -1.0, mask_a: 0, mask_b: 0 }
    }

    fn offer(&mut self, value: f64, mask_a: u64, mask_b: u64) {
        if value > self.value
            || (value == self.value && (mask_a, mask_b) < (self.mask_a, self.mask_b))
        {
            *self = Best { value, mask_a, mask_b };
        }
    }
}

fn check_cap(n: usize, cap: usize) -> Result<(), DiscrepancyError> {
    if n > cap || n > 63 {
        return Err(DiscrepancyError::AboveCap { n, cap: cap.min(63) });
    }
    Ok(())
}

/// Exhaustively maximizes the requested discrepancies over all subset pairs.
/// Refuses graphs above `cap` vertices.
pub fn brute_force_discrepancies(
    g: &Graph,
    which: BruteForceRequest,
    cap: usize,
) -> Result<DiscrepancyReport, DiscrepancyError> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    let nf = n as f64;
    let total = g.total_degree() as f64;
    let total_u = g.total_degree();
    let degs: Vec<u64> = (0..n).map(|i| g.degree(i) as u64).collect();

    let mut deg_in_a = vec![0u64; n];
    let mut size_a = 0u64;
    let mut vol_a = 0u64;

    let mut best_max = Best::new();
    let mut best_1 = Best::new();
    let mut best_2 = Best::new();
    let mut best_tilde = Best::new();

    let sweep = |mask_a: u64,
                 deg_in_a: &[u64],
                 size_a: u64,
                 vol_a: u64,
                 best_max: &mut Best,
                 best_1: &mut Best,
                 best_2: &mut Best,
                 best_tilde: &mut Best| {
        // δ(A,B) = Σ_{j∈B} c_j with c_j = e(A,{j})/(N d̄) − |A|/N².
        // Signs of c_j are decided in integer arithmetic so the greedy B is
        // exact; nn = N², so c_j > 0 ⇔ e(A,{j})·N² > |A|·N·d̄.
        if which.del_max || which.del_1 || which.del_2 {
            let nn = (n * n) as u64;
            let mut pos = 0.0f64;
            let mut neg = 0.0f64;
            let mut pos_out = 0.0f64;
            let mut neg_out = 0.0f64;
            let mut sum_in = 0.0f64;
            let mut pos_mask = 0u64;
            let mut neg_mask = 0u64;
            let mut pos_out_mask = 0u64;
            let mut neg_out_mask = 0u64;
            for j in 0..n {
                let lhs = deg_in_a[j] * nn;
                let rhs = size_a * total_u;
                let c = deg_in_a[j] as f64 / total - size_a as f64 / (nf * nf);
                let in_a = mask_a >> j & 1 == 1;
                if in_a {
                    sum_in += c;
                }
                if lhs > rhs {
                    pos += c;
                    pos_mask |= 1 << j;
                    if !in_a {
                        pos_out += c;
                        pos_out_mask |= 1 << j;
                    }
                } else if lhs < rhs {
                    neg -= c;
                    neg_mask |= 1 << j;
                    if !in_a {
                        neg_out -= c;
                        neg_out_mask |= 1 << j;
                    }
                }
            }
            if which.del_max {
                best_max.offer(pos, mask_a, pos_mask);
                best_max.offer(neg, mask_a, neg_mask);
            }
            if which.del_1 {
                best_1.offer(sum_in.abs(), mask_a, mask_a);
            }
            if which.del_2 {
                best_2.offer(pos_out, mask_a, pos_out_mask);
                best_2.offer(neg_out, mask_a, neg_out_mask);
            }
        }
        // δ̃(A,B) = Σ_{j∈B} [e(A,{j})/vol − vol(A)·d(j)/vol²];
        // sign of the contribution ⇔ e(A,{j})·vol vs vol(A)·d(j).
        if which.del_tilde {
            let mut pos = 0.0f64;
            let mut neg = 0.0f64;
            let mut pos_mask = 0u64;
            let mut neg_mask = 0u64;
            for j in 0..n {
                let lhs = deg_in_a[j] * total_u;
                let rhs = vol_a * degs[j];
                let c = deg_in_a[j] as f64 / total - vol_a as f64 * degs[j] as f64 / (total * total);
                if lhs > rhs {
                    pos += c;
                    pos_mask |= 1 << j;
                } else if lhs < rhs {
                    neg -= c;
                    neg_mask |= 1 << j;
                }
            }
            best_tilde.offer(pos, mask_a, pos_mask);
            best_tilde.offer(neg, mask_a, neg_mask);
        }
    };

    // Gray-code walk over all A ⊆ [N]: one vertex flips per step, so the
    // neighbor counts update in O(deg).
    sweep(0, &deg_in_a, size_a, vol_a, &mut best_max, &mut best_1, &mut best_2, &mut best_tilde);
    let mut mask_a = 0u64;
    for k in 1u64..1u64 << n {
        let v = k.trailing_zeros() as usize;
        let bit = 1u64 << v;
        mask_a ^= bit;
        if mask_a & bit != 0 {
            size_a += 1;
            vol_a += degs[v];
            for &w in g.neighbors(v) {
                deg_in_a[w as usize] += 1;
            }
        } else {
            size_a -= 1;
            vol_a -= degs[v];
            for &w in g.neighbors(v) {
                deg_in_a[w as usize] -= 1;
            }
        }
        sweep(mask_a, &deg_in_a, size_a, vol_a, &mut best_max, &mut best_1, &mut best_2, &mut best_tilde);
    }

    let mut report = DiscrepancyReport::closed_forms_only(g);
    let witness = |mask: u64| VertexSet::from_mask(n, mask).indices();
    if which.del_max {
        report.del_max = Some(best_max.value);
        report.del_max_method = Some(MethodTag::ExactBruteforce);
        report.del_max_witness_a = Some(witness(best_max.mask_a));
        report.del_max_witness_b = Some(witness(best_max.mask_b));
    }
    if which.del_1 {
        report.del_1 = Some(best_1.value);
        report.del_1_method = Some(MethodTag::ExactBruteforce);
        report.del_1_witness = Some(witness(best_1.mask_a));
    }
    if which.del_2 {
        report.del_2 = Some(best_2.value);
        report.del_2_method = Some(MethodTag::ExactBruteforce);
        report.del_2_witness_a = Some(witness(best_2.mask_a));
        report.del_2_witness_b = Some(witness(best_2.mask_b));
    }
    if which.del_tilde {
        report.del_tilde = Some(best_tilde.value);
        report.del_tilde_method = Some(MethodTag::ExactBruteforce);
        report.del_tilde_witness_a = Some(witness(best_tilde.mask_a));
        report.del_tilde_witness_b = Some(witness(best_tilde.mask_b));
    }
    Ok(report)
}

/// Exact `max_A |δ(A,[N])|` by direct sweep; exists to cross-check the
/// `del_star` closed form.
pub fn brute_force_del_star(g: &Graph, cap: usize) -> Result<f64, DiscrepancyError> {
    check_cap(g.n(), cap)?;
    let n = g.n();
    let nf = n as f64;
    let total = g.total_degree() as f64;
    let mut vol_a = 0i64;
    let mut size_a = 0i64;
    let mut best = 0.0f64;
    let mut _mask = 0u64;
    for k in 1u64..1u64 << n {
        let v = k.trailing_zeros() as usize;
        let bit = 1u64 << v;
        _mask ^= bit;
        if _mask & bit != 0 {
            vol_a += g.degree(v) as i64;
            size_a += 1;
        } else {
            vol_a -= g.degree(v) as i64;
            size_a -= 1;
        }
        let val = (vol_a as f64 / total - size_a as f64 / nf).abs();
        if val > best {
            best = val;
        }
    }
    Ok(best)
}

/// Exact `∂̃ = max |δ̃(A,B)|` with its witness pair.
pub fn brute_force_del_tilde(g: &Graph, cap: usize) -> Result<(f64, VertexSet, VertexSet), DiscrepancyError> {
    let report = brute_force_discrepancies(
        g,
        BruteForceRequest { del_tilde: true, ..Default::default() },
        cap,
    )?;
    let n = g.n();
    Ok((
        report.del_tilde.unwrap(),
        VertexSet::from_indices(n, report.del_tilde_witness_a.unwrap()).unwrap(),
        VertexSet::from_indices(n, report.del_tilde_witness_b.unwrap()).unwrap(),
    ))
}

/// Exact `∂̃_H = max |δ̃_H(A,B)|` over the subgraph induced by `h` (ambient
/// volumes; only `A,B ⊆ H` matter since everything else contributes zero).
pub fn brute_force_del_tilde_sub(
    g: &Graph,
    h: &VertexSet,
    cap: usize,
) -> Result<(f64, VertexSet, VertexSet), DiscrepancyError> {
    check_cap(g.n(), cap)?;
    let vol_h_u = g.volume(h);
    if vol_h_u == 0 {
        return Err(DiscrepancyError::ZeroVolume);
    }
    let vol_h = vol_h_u as f64;
    let members: Vec<usize> = h.indices();
    let k = members.len();
    let pos_of: std::collections::HashMap<usize, usize> =
        members.iter().enumerate().map(|(p, &v)| (v, p)).collect();
    // adjacency within H, in member-position space
    let adj: Vec<Vec<usize>> = members
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter_map(|&w| pos_of.get(&(w as usize)).copied())
                .collect()
        })
        .collect();
    let degs: Vec<u64> = members.iter().map(|&v| g.degree(v) as u64).collect();

    let mut deg_in_a = vec![0u64; k];
    let mut vol_a = 0u64;
    let mut best = Best::new();
    let eval = |mask_a: u64, deg_in_a: &[u64], vol_a: u64, best: &mut Best| {
        let mut pos = 0.0f64;
        let mut neg = 0.0f64;
        let mut pos_mask = 0u64;
        let mut neg_mask = 0u64;
        for j in 0..k {
            let lhs = deg_in_a[j] * vol_h_u;
            let rhs = vol_a * degs[j];
            let c = deg_in_a[j] as f64 / vol_h - vol_a as f64 * degs[j] as f64 / (vol_h * vol_h);
            if lhs > rhs {
                pos += c;
                pos_mask |= 1 << j;
            } else if lhs < rhs {
                neg -= c;
                neg_mask |= 1 << j;
            }
        }
        best.offer(pos, mask_a, pos_mask);
        best.offer(neg, mask_a, neg_mask);
    };
    eval(0, &deg_in_a, vol_a, &mut best);
    let mut mask_a = 0u64;
    for step in 1u64..1u64 << k {
        let p = step.trailing_zeros() as usize;
        let bit = 1u64 << p;
        mask_a ^= bit;
        if mask_a & bit != 0 {
            vol_a += degs[p];
            for &w in &adj[p] {
                deg_in_a[w] += 1;
            }
        } else {
            vol_a -= degs[p];
            for &w in &adj[p] {
                deg_in_a[w] -= 1;
            }
        }
        eval(mask_a, &deg_in_a, vol_a, &mut best);
    }
    let to_set = |mask: u64| {
        VertexSet::from_indices(g.n(), (0..k).filter(|&p| mask >> p & 1 == 1).map(|p| members[p])).unwrap()
    };
    Ok((best.value, to_set(best.mask_a), to_set(best.mask_b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_erdos_renyi, gen_named, Graph, NamedKind, VertexSet};
    use proptest::prelude::*;

    const CAP: usize = DEFAULT_BRUTE_FORCE_CAP;

    fn k2() -> Graph {
        Graph::from_edges(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn delta_full_sets_vanish() {
        let g = gen_erdos_renyi(9, 0.5, 4).unwrap();
        let full = VertexSet::full(9);
        assert!(delta(&g, &full, &full).abs() < 1e-15);
        assert!(delta_tilde(&g, &full, &full).abs() < 1e-15);
    }

    #[test]
    fn delta_matching_class() {
        let g = gen_named(NamedKind::PerfectMatching, 10).unwrap();
        // one bipartition class of the matching: every even vertex
        let a = VertexSet::from_indices(10, (0..10).step_by(2)).unwrap();
        assert!((delta(&g, &a, &a) - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn delta_k2_hand_value() {
        let g = k2();
        let a = VertexSet::from_indices(2, [0]).unwrap();
        let b = VertexSet::from_indices(2, [1]).unwrap();
        assert!((delta(&g, &a, &b) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn del_star_values() {
        assert_eq!(del_star(&k2()), 0.0);
        for kind in [NamedKind::Cycle, NamedKind::Complete, NamedKind::PerfectMatching] {
            let g = gen_named(kind, 6).unwrap();
            assert_eq!(del_star(&g), 0.0, "{kind:?} is regular");
        }
        // star on 4 vertices: d̄ = 1.5, Σ|d−d̄| = 1.5 + 3·0.5 = 3, N·d̄ = 6
        let star = gen_named(NamedKind::Star, 4).unwrap();
        assert!((del_star(&star) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn del_star_attained_by_degree_split() {
        // ∂* = δ(V₊,[N]) = −δ(V₋,[N]) where V₊ = {d(i) ≥ d̄}, V₋ = the rest
        for seed in 0..10 {
            let g = gen_erdos_renyi(14, 0.35, 700 + seed).unwrap();
            let dbar = g.mean_degree();
            let v_plus =
                VertexSet::from_indices(14, (0..14).filter(|&i| g.degree(i) as f64 >= dbar)).unwrap();
            let v_minus = v_plus.complement();
            let full = VertexSet::full(14);
            let ds = del_star(&g);
            assert!((delta(&g, &v_plus, &full) - ds).abs() < 1e-14, "seed {seed}");
            assert!((delta(&g, &v_minus, &full) + ds).abs() < 1e-14, "seed {seed}");
        }
    }

    #[test]
    fn del_star_closed_form_matches_sweep() {
        for (g, label) in [
            (gen_erdos_renyi(12, 0.3, 1).unwrap(), "er12"),
            (gen_erdos_renyi(16, 0.25, 2).unwrap(), "er16"),
            (gen_named(NamedKind::Star, 18).unwrap(), "star18"),
        ] {
            let exact = brute_force_del_star(&g, CAP).unwrap();
            assert!((del_star(&g) - exact).abs() < 1e-12, "{label}: {} vs {exact}", del_star(&g));
        }
    }

    #[test]
    fn brute_force_k2() {
        let r = brute_force_discrepancies(&k2(), BruteForceRequest::all(), CAP).unwrap();
        assert!((r.del_max.unwrap() - 0.25).abs() < 1e-15);
        // tie resolves to the smallest mask pair: A = {0}, B = {0}
        assert_eq!(r.del_max_witness_a.unwrap(), vec![0]);
        assert_eq!(r.del_max_witness_b.unwrap(), vec![0]);
        assert!((r.del_1.unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn brute_force_matching_quarter() {
        for n in [8usize, 12] {
            let g = gen_named(NamedKind::PerfectMatching, n).unwrap();
            let r = brute_force_discrepancies(&g, BruteForceRequest::all(), CAP).unwrap();
            assert!(r.del_max.unwrap() >= 0.25 - 1e-12, "matching on {n}");
        }
    }

    #[test]
    fn refuses_above_cap() {
        let g = gen_erdos_renyi(30, 0.2, 0).unwrap();
        assert!(matches!(
            brute_force_discrepancies(&g, BruteForceRequest::all(), 24),
            Err(DiscrepancyError::AboveCap { n: 30, cap: 24 })
        ));
    }

    #[test]
    fn hierarchy_on_random_graphs() {
        for seed in 0..20 {
            let n = 6 + (seed as usize % 7);
            let g = gen_erdos_renyi(n, 0.4, seed).unwrap();
            let r = brute_force_discrepancies(&g, BruteForceRequest::all(), CAP).unwrap();
            let (dmax, d1, d2) = (r.del_max.unwrap(), r.del_1.unwrap(), r.del_2.unwrap());
            let ds = r.del_star;
            let tol = 1e-12;
            assert!(d1.max(d2) <= dmax + tol, "seed {seed}: max{{∂1,∂2}} ≤ ∂");
            assert!(dmax <= 5.5 * d1 + tol, "seed {seed}: ∂ ≤ 5.5·∂1");
            assert!(ds <= dmax + tol, "seed {seed}: ∂* ≤ ∂");
            assert!(d1 <= d2 + ds + tol, "seed {seed}: ∂1 ≤ ∂2 + ∂*");
            // the volume-weighted maximum stays within 2∂* of the plain one
            assert!((dmax - r.del_tilde.unwrap()).abs() <= 2.0 * ds + tol);
        }
    }

    #[test]
    fn per_pair_volume_gap_bounded_by_del_star() {
        // |δ(A,B) − δ̃(A,B)| ≤ 2∂* on sampled pairs
        let mut rng = crate::rng::rng_from_seed(555);
        for seed in 0..10 {
            let g = gen_erdos_renyi(12, 0.4, 900 + seed).unwrap();
            let ds = del_star(&g);
            for _ in 0..50 {
                let a = VertexSet::from_mask(12, rand::Rng::random_range(&mut rng, 0..1u64 << 12));
                let b = VertexSet::from_mask(12, rand::Rng::random_range(&mut rng, 0..1u64 << 12));
                let gap = (delta(&g, &a, &b) - delta_tilde(&g, &a, &b)).abs();
                assert!(gap <= 2.0 * ds + 1e-12, "seed {seed}: gap {gap} > 2∂* = {}", 2.0 * ds);
            }
        }
    }

    #[test]
    fn delta_tilde_star_hub() {
        let g = gen_named(NamedKind::Star, 4).unwrap();
        let hub = VertexSet::from_indices(4, [0]).unwrap();
        assert!((delta_tilde(&g, &hub, &hub) - (-0.25)).abs() < 1e-15);
    }

    #[test]
    fn delta_tilde_equals_delta_on_regular() {
        let g = gen_named(NamedKind::Cycle, 8).unwrap();
        let mut rng = crate::rng::rng_from_seed(99);
        for _ in 0..50 {
            let a = VertexSet::from_mask(8, rand::Rng::random_range(&mut rng, 0..256));
            let b = VertexSet::from_mask(8, rand::Rng::random_range(&mut rng, 0..256));
            assert!((delta(&g, &a, &b) - delta_tilde(&g, &a, &b)).abs() < 1e-14);
        }
        let r = brute_force_discrepancies(&g, BruteForceRequest::all(), CAP).unwrap();
        assert!((r.del_max.unwrap() - r.del_tilde.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn del_tilde_sub_full_restriction_is_del_tilde() {
        let g = gen_erdos_renyi(10, 0.4, 6).unwrap();
        let full = VertexSet::full(10);
        let (whole, _, _) = brute_force_del_tilde(&g, CAP).unwrap();
        let (restricted, _, _) = brute_force_del_tilde_sub(&g, &full, CAP).unwrap();
        assert!((whole - restricted).abs() < 1e-14);
    }

    #[test]
    fn del_tilde_sub_close_when_h_large() {
        // |∂̃ − ∂̃_H| ≤ 10·vol(Hᶜ)/vol([N]) whenever vol(Hᶜ)/vol ≤ 1/2
        let mut rng = crate::rng::rng_from_seed(31);
        for seed in 0..12 {
            let n = 8 + (seed as usize % 5);
            let g = gen_erdos_renyi(n, 0.45, 100 + seed).unwrap();
            let h = loop {
                let mask: u64 = rand::Rng::random_range(&mut rng, 0..1u64 << n);
                let h = VertexSet::from_mask(n, mask);
                let frac = (g.total_degree() - g.volume(&h)) as f64 / g.total_degree() as f64;
                if g.volume(&h) > 0 && frac <= 0.5 {
                    break h;
                }
            };
            let (whole, _, _) = brute_force_del_tilde(&g, CAP).unwrap();
            let (sub, _, _) = brute_force_del_tilde_sub(&g, &h, CAP).unwrap();
            let frac = (g.total_degree() - g.volume(&h)) as f64 / g.total_degree() as f64;
            assert!((whole - sub).abs() <= 10.0 * frac + 1e-12, "seed {seed}");
        }
    }

    /// Naive 4^N enumeration; the oracle the greedy-B sweep is checked against.
    fn naive_maxima(g: &Graph) -> (f64, f64, f64, f64) {
        let n = g.n();
        let masks = g.adjacency_masks().unwrap();
        let total = g.total_degree() as f64;
        let nf = n as f64;
        let degs: Vec<f64> = (0..n).map(|i| g.degree(i) as f64).collect();
        let e_ab = |a: u64, b: u64| -> f64 {
            (0..n)
                .filter(|&i| a >> i & 1 == 1)
                .map(|i| (masks[i] & b).count_ones() as u64)
                .sum::<u64>() as f64
        };
        let vol = |a: u64| -> f64 { (0..n).filter(|&i| a >> i & 1 == 1).map(|i| degs[i]).sum() };
        let mut dmax = 0.0f64;
        let mut d1 = 0.0f64;
        let mut d2 = 0.0f64;
        let mut dtilde = 0.0f64;
        for a in 0..1u64 << n {
            let ca = (a.count_ones() as f64) / nf;
            let va = vol(a) / total;
            for b in 0..1u64 << n {
                let d = e_ab(a, b) / total - ca * (b.count_ones() as f64 / nf);
                let dt = e_ab(a, b) / total - va * (vol(b) / total);
                dmax = dmax.max(d.abs());
                dtilde = dtilde.max(dt.abs());
                if a == b {
                    d1 = d1.max(d.abs());
                }
                if a & b == 0 {
                    d2 = d2.max(d.abs());
                }
            }
        }
        (dmax, d1, d2, dtilde)
    }

    #[test]
    fn greedy_sweep_matches_naive_enumeration() {
        for (n, p, seed) in [(8usize, 0.4, 3u64), (9, 0.3, 8), (10, 0.5, 21)] {
            let g = gen_erdos_renyi(n, p, seed).unwrap();
            let (dmax, d1, d2, dtilde) = naive_maxima(&g);
            let r = brute_force_discrepancies(&g, BruteForceRequest::all(), CAP).unwrap();
            assert!((r.del_max.unwrap() - dmax).abs() < 1e-12);
            assert!((r.del_1.unwrap() - d1).abs() < 1e-12);
            assert!((r.del_2.unwrap() - d2).abs() < 1e-12);
            assert!((r.del_tilde.unwrap() - dtilde).abs() < 1e-12);
        }
    }

    #[test]
    fn witnesses_attain_reported_values() {
        let g = gen_erdos_renyi(11, 0.35, 17).unwrap();
        let r = brute_force_discrepancies(&g, BruteForceRequest::all(), CAP).unwrap();
        let a = VertexSet::from_indices(11, r.del_max_witness_a.clone().unwrap()).unwrap();
        let b = VertexSet::from_indices(11, r.del_max_witness_b.clone().unwrap()).unwrap();
        assert!((delta(&g, &a, &b).abs() - r.del_max.unwrap()).abs() < 1e-12);
        let a1 = VertexSet::from_indices(11, r.del_1_witness.clone().unwrap()).unwrap();
        assert!((delta(&g, &a1, &a1).abs() - r.del_1.unwrap()).abs() < 1e-12);
        let a2 = VertexSet::from_indices(11, r.del_2_witness_a.clone().unwrap()).unwrap();
        let b2 = VertexSet::from_indices(11, r.del_2_witness_b.clone().unwrap()).unwrap();
        assert!(a2.is_disjoint(&b2));
        assert!((delta(&g, &a2, &b2).abs() - r.del_2.unwrap()).abs() < 1e-12);
        let at = VertexSet::from_indices(11, r.del_tilde_witness_a.clone().unwrap()).unwrap();
        let bt = VertexSet::from_indices(11, r.del_tilde_witness_b.clone().unwrap()).unwrap();
        assert!((delta_tilde(&g, &at, &bt).abs() - r.del_tilde.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn report_serializes_flat_with_absent_fields_omitted() {
        let g = k2();
        let r = brute_force_discrepancies(
            &g,
            BruteForceRequest { del_max: true, ..Default::default() },
            CAP,
        )
        .unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("del_max").is_some());
        assert!(json.get("del_1").is_none());
        assert_eq!(json["del_star_method"], "closed_form");
        assert_eq!(json["del_max_method"], "exact_bruteforce");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn delta_bounded_symmetric_additive(seed in 0u64..10_000) {
            let g = gen_erdos_renyi(9, 0.45, seed).unwrap();
            let mut rng = crate::rng::rng_from_seed(seed ^ 0x5A5A);
            let a = VertexSet::from_mask(9, rand::Rng::random_range(&mut rng, 0..512));
            let b = VertexSet::from_mask(9, rand::Rng::random_range(&mut rng, 0..512));
            let d = delta(&g, &a, &b);
            prop_assert!(d.abs() <= 1.0 + 1e-12);
            prop_assert!((d - delta(&g, &b, &a)).abs() < 1e-14);
            // additive over a disjoint split of B
            let mask_b1: u64 = rand::Rng::random_range(&mut rng, 0..512);
            let b1 = VertexSet::from_mask(9, mask_b1);
            let b2 = VertexSet::from_mask(9, !mask_b1 & 511);
            let full = VertexSet::full(9);
            prop_assert!((delta(&g, &a, &full) - delta(&g, &a, &b1) - delta(&g, &a, &b2)).abs() < 1e-13);
        }
    }
}
