//! Importance sampling of non-terminals in quasi-bipartite networks.
//!
//! In a quasi-bipartite network with independent terminals every terminal
//! pair `(s, t)` has an edge-disjoint family of 2-hop paths, one per common
//! neighbour `v`, carrying `F_{st,v} = min(c_sv, c_vt)`. A vertex is kept with
//! probability `p̃_v = min(1, M · max_st F_{st,v} / F_st)` and, when kept, its
//! incident capacities are divided by `p̃_v`, so every 2-hop flow value is
//! preserved in expectation.
//!
//! The grouped variant samples whole components of `G ∖ T` instead, with
//! `F_{st,i}` the `s`–`t` min-cut inside `G[V_i ∪ {s, t}]`.
//!
//! Draws come from one ChaCha8 stream per unit, seeded by hashing the run
//! seed with the unit's name, so adding a vertex does not change the draws of
//! the others.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::flow::max_flow;
use crate::network::TerminalNetwork;
use crate::rational::{self, Rational};

/// 2-hop flow data for one terminal pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairFlow {
    pub s: String,
    pub t: String,
    #[serde(with = "rational::serde_rational")]
    pub total: Rational,
    /// `(unit, F_{st,unit})` for every unit with a positive contribution.
    pub contributions: Vec<(String, f64)>,
}

/// `F_st` and its per-vertex parts, for every terminal pair.
pub fn two_hop_maxflows(net: &TerminalNetwork) -> Result<Vec<PairFlow>> {
    net.require_quasi_bipartite()?;
    Ok(net
        .terminal_pairs()
        .into_iter()
        .map(|(s, t)| {
            let mut total = Rational::zero();
            let mut contributions = Vec::new();
            for &(v, e) in net.adj(s) {
                if let Some(f) = net.edge_between(v, t) {
                    let x = net.edges()[e].cap.clone().min(net.edges()[f].cap.clone());
                    contributions.push((net.name(v).to_string(), rational::to_f64(&x)));
                    total += x;
                }
            }
            contributions.sort_by(|a, b| a.0.cmp(&b.0));
            PairFlow { s: net.name(s).to_string(), t: net.name(t).to_string(), total, contributions }
        })
        .collect())
}

/// Sampling decision for one vertex or component.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingUnit {
    /// Substream key: the vertex name, or the smallest member name of a
    /// component.
    pub name: String,
    pub members: Vec<String>,
    pub p: f64,
    pub p_tilde: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub m: f64,
    pub seed: u64,
    pub pairs: Vec<PairFlow>,
    pub units: Vec<SamplingUnit>,
    /// Units on no positive 2-hop path; always removed.
    pub dropped: Vec<String>,
}

impl SamplingPlan {
    /// `Σ p_v`, the expected size before capping at 1.
    pub fn total_p(&self) -> f64 {
        self.units.iter().map(|u| u.p).sum()
    }

    /// Expected number of kept units.
    pub fn expected_units(&self) -> f64 {
        self.units.iter().map(|u| u.p_tilde).sum()
    }
}

fn check_m(m: f64) -> Result<()> {
    if m > 0.0 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("oversampling factor must be positive, got {m}")))
    }
}

fn build_plan(m: f64, seed: u64, pairs: Vec<PairFlow>, units: Vec<(String, Vec<String>)>) -> SamplingPlan {
    let mut best: BTreeMap<&str, f64> = BTreeMap::new();
    for pf in &pairs {
        let total = rational::to_f64(&pf.total);
        for (u, x) in &pf.contributions {
            if *x > 0.0 && total > 0.0 {
                let r = best.entry(u.as_str()).or_insert(0.0);
                *r = r.max(x / total);
            }
        }
    }
    let mut out = Vec::new();
    let mut dropped = Vec::new();
    for (name, members) in units {
        match best.get(name.as_str()) {
            Some(&r) => {
                let p = m * r;
                out.push(SamplingUnit { name, members, p, p_tilde: p.min(1.0) });
            }
            None => {
                log::warn!("`{name}` lies on no positive 2-hop path and is dropped");
                dropped.push(name);
            }
        }
    }
    SamplingPlan { m, seed, pairs, units: out, dropped }
}

pub fn sampling_plan(net: &TerminalNetwork, m: f64, seed: u64) -> Result<SamplingPlan> {
    check_m(m)?;
    let pairs = two_hop_maxflows(net)?;
    let units = net.non_terminals().map(|v| (net.name(v).to_string(), vec![net.name(v).to_string()])).collect();
    Ok(build_plan(m, seed, pairs, units))
}

/// The generator for unit `name` under run seed `seed`.
pub fn unit_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(name.as_bytes());
    let digest: [u8; 32] = h.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Whether the unit is kept; units with `p̃ = 1` are kept without a draw.
pub fn draw(seed: u64, unit: &SamplingUnit) -> bool {
    unit.p_tilde >= 1.0 || unit_rng(seed, &unit.name).random::<f64>() < unit.p_tilde
}

/// Applies a plan: kept units have every incident edge (including edges
/// inside the unit) divided by `p̃`; all other non-terminals are removed.
pub fn apply_plan(net: &TerminalNetwork, plan: &SamplingPlan) -> Result<TerminalNetwork> {
    let mut factor: BTreeMap<&str, Rational> = BTreeMap::new();
    for u in &plan.units {
        if draw(plan.seed, u) {
            let f = if u.p_tilde >= 1.0 { Rational::one() } else { rational::from_f64(u.p_tilde)?.recip() };
            for m in &u.members {
                factor.insert(m.as_str(), f.clone());
            }
        }
    }
    let keep = |v: &str, i: usize| net.is_terminal(i) || factor.contains_key(v);
    let vertices: Vec<String> =
        net.names().iter().enumerate().filter(|(i, v)| keep(v, *i)).map(|(_, v)| v.clone()).collect();
    let edges: Vec<(String, String, Rational)> = net
        .edges()
        .iter()
        .filter(|e| keep(net.name(e.u), e.u) && keep(net.name(e.v), e.v))
        .map(|e| {
            let (a, b) = (net.name(e.u), net.name(e.v));
            let f = factor.get(a).or_else(|| factor.get(b)).cloned().unwrap_or_else(Rational::one);
            (a.to_string(), b.to_string(), &e.cap * f)
        })
        .collect();
    TerminalNetwork::build(&vertices, &net.terminal_names(), &edges, true)
}

pub fn sample_sparsifier(net: &TerminalNetwork, m: f64, seed: u64) -> Result<TerminalNetwork> {
    apply_plan(net, &sampling_plan(net, m, seed)?)
}

/// Plan for sampling whole components of `G ∖ T`, each of at most `w`
/// vertices.
pub fn grouped_sampling_plan(net: &TerminalNetwork, w: usize, m: f64, seed: u64) -> Result<SamplingPlan> {
    check_m(m)?;
    if let Some((a, b)) = net.terminal_edge() {
        return Err(Error::TerminalEdge(a, b));
    }
    let comps = net.components_after_terminal_removal();
    if let Some(c) = comps.iter().find(|c| c.len() > w) {
        return Err(Error::InvalidParameter(format!("component of {} vertices exceeds w = {w}", c.len())));
    }
    let terminal_pairs = net.terminal_pairs();
    let per_comp: Vec<Vec<Rational>> = comps
        .par_iter()
        .map(|c| {
            let touching: BTreeSet<usize> = c
                .iter()
                .flat_map(|v| net.adj(net.index_of(v).expect("own vertex")).iter().map(|&(u, _)| u))
                .filter(|&u| net.is_terminal(u))
                .collect();
            terminal_pairs
                .iter()
                .map(|&(s, t)| {
                    if !touching.contains(&s) || !touching.contains(&t) {
                        return Ok(Rational::zero());
                    }
                    let (sn, tn) = (net.name(s).to_string(), net.name(t).to_string());
                    let mut vs = c.clone();
                    vs.push(sn.clone());
                    vs.push(tn.clone());
                    let sub = net.induced(&vs, &[sn.clone(), tn.clone()])?;
                    max_flow(&sub, &sn, &tn)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let pairs = terminal_pairs
        .iter()
        .enumerate()
        .map(|(j, &(s, t))| {
            let mut total = Rational::zero();
            let mut contributions = Vec::new();
            for (c, f) in comps.iter().zip(&per_comp) {
                if !f[j].is_zero() {
                    total += &f[j];
                    contributions.push((c[0].clone(), rational::to_f64(&f[j])));
                }
            }
            PairFlow { s: net.name(s).to_string(), t: net.name(t).to_string(), total, contributions }
        })
        .collect();
    // component member lists are sorted by index; key by the smallest name
    let units = comps
        .into_iter()
        .map(|mut c| {
            c.sort();
            (c[0].clone(), c)
        })
        .collect::<Vec<_>>();
    let pairs = rekey(pairs, &units);
    Ok(build_plan(m, seed, pairs, units))
}

/// Renames contributions from the first-listed member to the unit name.
fn rekey(mut pairs: Vec<PairFlow>, units: &[(String, Vec<String>)]) -> Vec<PairFlow> {
    let mut alias: BTreeMap<&str, &str> = BTreeMap::new();
    for (name, members) in units {
        for m in members {
            alias.insert(m.as_str(), name.as_str());
        }
    }
    for pf in &mut pairs {
        for c in &mut pf.contributions {
            c.0 = alias[c.0.as_str()].to_string();
        }
        pf.contributions.sort_by(|a, b| a.0.cmp(&b.0));
    }
    pairs
}

pub fn grouped_sample_sparsifier(net: &TerminalNetwork, w: usize, m: f64, seed: u64) -> Result<TerminalNetwork> {
    apply_plan(net, &grouped_sampling_plan(net, w, m, seed)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tail {
    Lower,
    Upper,
}

/// Chernoff bound for a sum of independent variables, each deterministic or
/// in `[0, b]`, with the given mean: `exp(-ε²μ/(2b))` below, `exp(-ε²μ/(3b))`
/// above.
pub fn chernoff_bound(eps: f64, mean: f64, b: f64, tail: Tail) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) || mean <= 0.0 || b <= 0.0 {
        return Err(Error::InvalidParameter(format!("need 0<eps<1, mean>0, b>0; got {eps}, {mean}, {b}")));
    }
    let d = match tail {
        Tail::Lower => 2.0,
        Tail::Upper => 3.0,
    };
    Ok((-eps * eps * mean / (d * b)).exp())
}

/// Oversampling factor for a target failure probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanReport {
    pub eps: f64,
    pub k: usize,
    pub fail: f64,
    /// `ε/k²`.
    pub eta: f64,
    /// Size bound on the discretized lower-bound demand set.
    pub demand_set_size: f64,
    /// Union-bound count `|D^LB| · C(k, 2)`.
    pub union_count: f64,
    pub m: f64,
    /// `union_count · exp(-ε²ηM/2)`, equal to `fail` at the returned `M`.
    pub predicted_failure: f64,
    /// `ε⁻³ k⁵ ln(ε⁻¹ ln k)` with the unspecified constant set to 1.
    pub asymptotic_m: f64,
}

pub fn plan_m(eps: f64, k: usize, fail: f64) -> Result<PlanReport> {
    if !(eps > 0.0 && eps < 1.0) || k < 2 || !(fail > 0.0 && fail < 1.0) {
        return Err(Error::InvalidParameter(format!("need 0<eps<1, k>=2, 0<fail<1; got {eps}, {k}, {fail}")));
    }
    let eta = eps / (k * k) as f64;
    let pairs = (k * (k - 1) / 2) as f64;
    let per_coordinate = 2.0 + (1.0 / eta).ln() / (1.0 + eps).ln();
    let demand_set_size = per_coordinate.powf(pairs);
    let union_count = demand_set_size * pairs;
    let m = 2.0 * (union_count / fail).ln() / (eps * eps * eta);
    let predicted_failure = union_count * (-eps * eps * eta * m / 2.0).exp();
    let lk = (k as f64).ln();
    let asymptotic_m = eps.powi(-3) * (k as f64).powi(5) * (lk / eps).ln().max(1.0);
    Ok(PlanReport { eps, k, fail, eta, demand_set_size, union_count, m, predicted_failure, asymptotic_m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::lambda_2hop;
    use crate::generate::{bounded_component, quasi_bipartite, CapRange};
    use crate::network::DemandVector;

    #[test]
    fn pair_flows() {
        let one = TerminalNetwork::from_int_edges(&["s", "t"], &[("s", "v", 2), ("v", "t", 5)]).unwrap();
        assert_eq!(two_hop_maxflows(&one).unwrap()[0].total, rational::int(2));
        let two = TerminalNetwork::from_int_edges(
            &["s", "t"],
            &[("s", "v", 2), ("v", "t", 5), ("s", "u", 3), ("u", "t", 3)],
        )
        .unwrap();
        assert_eq!(two_hop_maxflows(&two).unwrap()[0].total, rational::int(5));
    }

    #[test]
    fn pair_flows_match_two_hop_lp() {
        for seed in 0..20 {
            let net = quasi_bipartite(4, 20, CapRange::default(), seed).unwrap();
            for pf in two_hop_maxflows(&net).unwrap() {
                let lp = lambda_2hop(&net, &DemandVector::unit(&pf.s, &pf.t)).unwrap();
                let f = rational::to_f64(&pf.total);
                assert!((lp.value - f).abs() <= 1e-9 * f.max(1.0), "seed {seed}: {} vs {f}", lp.value);
            }
        }
    }

    #[test]
    fn plan_probabilities() {
        let one = TerminalNetwork::from_int_edges(&["s", "t"], &[("s", "v", 2), ("v", "t", 5)]).unwrap();
        let plan = sampling_plan(&one, 0.4, 1).unwrap();
        assert_eq!(plan.units[0].p_tilde, 0.4);
        let twins = TerminalNetwork::from_int_edges(
            &["s", "t"],
            &[("s", "v", 2), ("v", "t", 2), ("s", "u", 2), ("u", "t", 2)],
        )
        .unwrap();
        let plan = sampling_plan(&twins, 3.0, 1).unwrap();
        assert!(plan.units.iter().all(|u| u.p == 1.5 && u.p_tilde == 1.0));
    }

    #[test]
    fn size_lemma_bound() {
        for seed in 0..10 {
            let net = quasi_bipartite(5, 80, CapRange::default(), seed).unwrap();
            let plan = sampling_plan(&net, 7.0, seed).unwrap();
            assert!(plan.total_p() <= 7.0 * 25.0);
        }
    }

    #[test]
    fn vertices_without_two_hop_paths_are_dropped() {
        let net = TerminalNetwork::from_int_edges(&["s", "t"], &[("s", "v", 2), ("v", "t", 5), ("s", "x", 1)]).unwrap();
        let plan = sampling_plan(&net, 1.0, 0).unwrap();
        assert_eq!(plan.dropped, vec!["x"]);
        let out = apply_plan(&net, &plan).unwrap();
        assert!(!out.contains("x"));
    }

    #[test]
    fn certain_keeps_are_identity() {
        let net = quasi_bipartite(3, 30, CapRange::default(), 4).unwrap();
        let out = sample_sparsifier(&net, 1e6, 9).unwrap();
        assert_eq!(out.edge_list(), net.edge_list());
        assert_eq!(out.names(), net.names());
    }

    #[test]
    fn reproducible() {
        let net = quasi_bipartite(4, 60, CapRange::default(), 2).unwrap();
        let a = sample_sparsifier(&net, 3.0, 11).unwrap();
        let b = sample_sparsifier(&net, 3.0, 11).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = sample_sparsifier(&net, 3.0, 12).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn substreams_are_per_vertex() {
        let unit = |name: &str| SamplingUnit { name: name.into(), members: vec![name.into()], p: 0.5, p_tilde: 0.5 };
        let draws: Vec<bool> = (0..64).map(|i| draw(5, &unit(&format!("v{i}")))).collect();
        assert!(draws.iter().any(|&x| x) && draws.iter().any(|&x| !x));
        assert_eq!(draw(5, &unit("v3")), draws[3]);
    }

    #[test]
    fn grouped_with_w1_matches_vertex_sampling() {
        let net = quasi_bipartite(4, 40, CapRange::default(), 6).unwrap();
        let a = sample_sparsifier(&net, 2.0, 3).unwrap();
        let b = grouped_sample_sparsifier(&net, 1, 2.0, 3).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn grouped_single_component() {
        let net = TerminalNetwork::from_int_edges(
            &["s", "t"],
            &[("s", "a", 2), ("a", "b", 1), ("b", "t", 4), ("a", "t", 1)],
        )
        .unwrap();
        let plan = grouped_sampling_plan(&net, 2, 0.3, 0).unwrap();
        assert_eq!(plan.units.len(), 1);
        assert_eq!(plan.units[0].p_tilde, 0.3);
        assert_eq!(plan.pairs[0].total, rational::int(2));
        assert!(grouped_sampling_plan(&net, 1, 0.3, 0).is_err());
    }

    #[test]
    fn grouped_size_scales_with_w() {
        let (k, w, m) = (4, 3, 2.0);
        let net = bounded_component(k, 40, w, CapRange::default(), 1).unwrap();
        let mut total = 0.0;
        for seed in 0..100 {
            total += (grouped_sample_sparsifier(&net, w, m, seed).unwrap().n() - k) as f64;
        }
        assert!(total / 100.0 <= (k * k) as f64 * m * w as f64);
    }

    #[test]
    fn chernoff_values() {
        let b = chernoff_bound(0.5, 1.0, 1.0, Tail::Lower).unwrap();
        assert!((b - (-0.125f64).exp()).abs() < 1e-15);
        assert!(chernoff_bound(0.99, 1e4, 1.0, Tail::Upper).unwrap() < 1e-100);
        assert!(chernoff_bound(1.0, 1.0, 1.0, Tail::Lower).is_err());
    }

    #[test]
    fn planner_inverts_the_tail_bound() {
        let r = plan_m(0.5, 5, 0.1).unwrap();
        assert!((r.predicted_failure - 0.1).abs() < 1e-9);
        assert!((r.eta - 0.02).abs() < 1e-15);
        assert!(r.m > 11_000.0 && r.m < 12_500.0, "{}", r.m);
    }
}
