//! Merge-based sparsifiers.
//!
//! Merging a set of vertices into one can only enlarge the set of routable
//! demands, so every output here satisfies `λ_{G'}(d) >= λ_G(d)`. The two
//! quasi-bipartite constructions differ in how they decide which non-terminals
//! are interchangeable:
//!
//! - profile buckets solve the dual of the concurrent-flow LP per demand,
//!   discretize each non-terminal's edge lengths, and merge non-terminals whose
//!   discretized lengths agree on every demand;
//! - ratio types round capacities to powers of `1+ε` and merge non-terminals
//!   with the same terminal neighbourhood and the same (capped) sequence of
//!   consecutive capacity ratios.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::One;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::lambda;
use crate::network::{DemandVector, TerminalNetwork, VertexPartition};
use crate::rational::{self, Rational};
use crate::sketch::{budget_from_env, ceil_exp, floor_exp};

/// Default cap on the number of demands a profile-bucket build may solve.
pub const DEFAULT_DEMAND_BUDGET: u64 = 20_000;

/// A sparsifier produced by merging, with the partition that produced it.
#[derive(Debug, Clone)]
pub struct MergeOutput {
    pub net: TerminalNetwork,
    /// Blocks over the vertices of the network that was merged (after any
    /// subdivision of terminal edges).
    pub partition: VertexPartition,
    /// Quality guaranteed by the construction; not verified here.
    pub claimed_quality: f64,
}

/// Contracts each block of `partition`.
pub fn clump(net: &TerminalNetwork, partition: &VertexPartition) -> Result<TerminalNetwork> {
    net.merge_vertices(partition)
}

/// Coarsest common refinement: two vertices share a block iff they share a
/// block in every input partition.
pub fn refine_partitions(parts: &[VertexPartition]) -> Result<VertexPartition> {
    let Some(first) = parts.first() else {
        return Ok(VertexPartition::new(Vec::new()));
    };
    let vertices: BTreeSet<&str> = first.blocks.iter().flatten().map(String::as_str).collect();
    let lookups: Vec<HashMap<&str, usize>> = parts.iter().map(VertexPartition::block_of).collect();
    for (i, l) in lookups.iter().enumerate() {
        if l.len() != vertices.len() || !vertices.iter().all(|v| l.contains_key(v)) {
            return Err(Error::InvalidPartition(format!("partition {i} covers a different vertex set")));
        }
    }
    let mut groups: BTreeMap<Vec<usize>, BTreeSet<String>> = BTreeMap::new();
    for v in vertices {
        let key = lookups.iter().map(|l| l[v]).collect();
        groups.entry(key).or_default().insert(v.to_string());
    }
    Ok(VertexPartition::new(groups.into_values().collect()))
}

/// A discretized edge length: zero or `(1+ε)^j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    Zero,
    Power(i32),
}

impl Level {
    pub fn value(self, eps: f64) -> f64 {
        match self {
            Level::Zero => 0.0,
            Level::Power(j) => (1.0 + eps).powi(j),
        }
    }
}

/// Per-terminal discretized lengths of one non-terminal; `None` where the
/// terminal is not adjacent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LengthProfile {
    pub entries: Vec<Option<Level>>,
}

/// The allowed discrete lengths: zero plus the powers of `1+ε` lying in
/// `[ε·δ_st, δ_st]` for some pair.
#[derive(Debug, Clone)]
struct Grid {
    eps: f64,
    ranges: Vec<(i32, i32)>,
}

impl Grid {
    fn new(eps: f64, distances: impl IntoIterator<Item = f64>) -> Self {
        let ranges = distances
            .into_iter()
            .filter(|&d| d > 0.0 && d.is_finite())
            .map(|d| (ceil_exp(eps, eps * d), floor_exp(eps, d)))
            .filter(|(lo, hi)| lo <= hi)
            .collect();
        Self { eps, ranges }
    }

    /// Largest grid value not above `x` (up to float noise).
    fn round_down(&self, x: f64) -> Level {
        if x <= 0.0 || !x.is_finite() {
            return Level::Zero;
        }
        let j = floor_exp(self.eps, x * (1.0 + 1e-12));
        self.ranges
            .iter()
            .filter(|&&(lo, _)| lo <= j)
            .map(|&(_, hi)| hi.min(j))
            .max()
            .map_or(Level::Zero, Level::Power)
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 0.5 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1/2), got {eps}")))
    }
}

/// Non-terminals grouped by identical capacity rows.
fn twin_classes(net: &TerminalNetwork) -> Vec<Vec<usize>> {
    let mut classes: BTreeMap<Vec<(usize, Rational)>, Vec<usize>> = BTreeMap::new();
    for v in net.non_terminals() {
        let mut row: Vec<(usize, Rational)> =
            net.adj(v).iter().map(|&(u, e)| (u, net.edges()[e].cap.clone())).collect();
        row.sort();
        classes.entry(row).or_default().push(v);
    }
    classes.into_values().collect()
}

/// Length profiles of every non-terminal of a quasi-bipartite network with
/// independent terminals, for one demand.
///
/// The dual lengths of the optimal LP solution are first averaged over
/// non-terminals with identical capacity rows (this keeps the dual feasible
/// and optimal), then rounded down to the grid built from the dual pair
/// distances.
pub fn length_profiles(net: &TerminalNetwork, eps: f64, d: &DemandVector) -> Result<Vec<LengthProfile>> {
    check_eps(eps)?;
    net.require_quasi_bipartite()?;
    let res = lambda(net, d)?;
    let mut len = res.dual.lengths.clone();
    for class in twin_classes(net) {
        if class.len() < 2 {
            continue;
        }
        let mut avg: BTreeMap<usize, f64> = BTreeMap::new();
        for &v in &class {
            for &(u, e) in net.adj(v) {
                *avg.entry(u).or_default() += len[e] / class.len() as f64;
            }
        }
        for &v in &class {
            for &(u, e) in net.adj(v) {
                len[e] = avg[&u];
            }
        }
    }
    let grid = Grid::new(eps, res.dual.distances.iter().map(|x| x.2));
    Ok(net
        .non_terminals()
        .map(|v| {
            let mut entries = vec![None; net.k()];
            for &(u, e) in net.adj(v) {
                entries[u] = Some(grid.round_down(len[e]));
            }
            LengthProfile { entries }
        })
        .collect())
}

fn profile_partition(net: &TerminalNetwork, profiles: &[LengthProfile]) -> VertexPartition {
    let mut blocks: Vec<BTreeSet<String>> =
        net.terminals().iter().map(|&t| BTreeSet::from([net.name(t).to_string()])).collect();
    let mut buckets: BTreeMap<&LengthProfile, BTreeSet<String>> = BTreeMap::new();
    for (i, v) in net.non_terminals().enumerate() {
        buckets.entry(&profiles[i]).or_default().insert(net.name(v).to_string());
    }
    blocks.extend(buckets.into_values());
    VertexPartition::new(blocks)
}

/// Quality guaranteed on the demands the buckets were built from.
pub fn profile_bucket_set_quality(eps: f64) -> f64 {
    (1.0 + eps) / ((1.0 - eps) * (1.0 - eps))
}

/// Quality guaranteed for all demands when the build set is the full
/// discretized demand set.
pub fn profile_bucket_quality(eps: f64) -> f64 {
    (1.0 + 3.0 * eps) * profile_bucket_set_quality(eps)
}

/// Profile-bucket sparsifier of a quasi-bipartite network over `demands`,
/// with the demand budget taken from `FLOWSPARSE_BUDGET` or
/// [`DEFAULT_DEMAND_BUDGET`].
pub fn profile_bucket_sparsifier(net: &TerminalNetwork, eps: f64, demands: &[DemandVector]) -> Result<MergeOutput> {
    profile_bucket_sparsifier_with(net, eps, demands, budget_from_env(DEFAULT_DEMAND_BUDGET))
}

pub fn profile_bucket_sparsifier_with(
    net: &TerminalNetwork,
    eps: f64,
    demands: &[DemandVector],
    budget: u64,
) -> Result<MergeOutput> {
    check_eps(eps)?;
    if demands.is_empty() {
        return Err(Error::InvalidParameter("profile buckets need at least one demand".into()));
    }
    if demands.len() as u64 > budget {
        return Err(Error::BudgetExceeded { what: "profile-bucket demand set", count: demands.len() as f64, budget });
    }
    let sub = net.subdivide_terminal_edges();
    sub.require_quasi_bipartite()?;
    let parts = demands
        .par_iter()
        .map(|d| length_profiles(&sub, eps, d).map(|p| profile_partition(&sub, &p)))
        .collect::<Result<Vec<_>>>()?;
    let partition = refine_partitions(&parts)?;
    Ok(MergeOutput { net: clump(&sub, &partition)?, partition, claimed_quality: profile_bucket_quality(eps) })
}

/// A non-terminal's terminal neighbourhood and capped capacity ratios.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RatioType {
    /// Adjacent terminals sorted by (capacity desc, name asc).
    pub order: Vec<String>,
    /// `ratios[i]` is the exponent of `c(order[i]) / c(order[i+1])` as a power
    /// of `1+ε`, replaced by `cap_exponent` when the ratio reaches `M_type`.
    pub ratios: Vec<u32>,
    pub cap_exponent: u32,
}

impl RatioType {
    /// The set of adjacent terminals.
    pub fn super_type(&self) -> BTreeSet<String> {
        self.order.iter().cloned().collect()
    }

    /// Ratio values, with capped entries reported as `m_type`.
    pub fn values(&self, eps: f64, m_type: f64) -> Vec<f64> {
        self.ratios
            .iter()
            .map(|&r| if r >= self.cap_exponent { m_type } else { (1.0 + eps).powi(r as i32) })
            .collect()
    }
}

/// `k²/ε + 1`.
pub fn m_type(k: usize, eps: &Rational) -> Rational {
    rational::int((k * k) as i64) / eps + Rational::one()
}

fn eps_rational(eps: f64) -> Result<Rational> {
    check_eps(eps)?;
    rational::parse(&format!("{eps}"))
}

/// Every capacity rounded down to an integer power of `1+ε`, exactly.
pub fn round_capacities(net: &TerminalNetwork, eps: f64) -> Result<TerminalNetwork> {
    let base = Rational::one() + eps_rational(eps)?;
    let edges: Vec<(String, String, Rational)> = net
        .edge_list()
        .into_iter()
        .map(|(u, v, c)| {
            let j = rational::floor_log(&base, &c);
            (u, v, rational::powi(&base, j))
        })
        .collect();
    TerminalNetwork::build(net.names(), &net.terminal_names(), &edges, true)
}

/// Ratio type of non-terminal `v` in a network whose capacities are already
/// powers of `1+ε`.
pub fn ratio_type(net: &TerminalNetwork, v: usize, eps: f64) -> Result<RatioType> {
    let e = eps_rational(eps)?;
    let base = Rational::one() + &e;
    let m = m_type(net.k(), &e);
    let mut cap_exponent = rational::floor_log(&base, &m);
    if rational::powi(&base, cap_exponent) < m {
        cap_exponent += 1;
    }
    let mut nbrs: Vec<(i64, &str)> = net
        .adj(v)
        .iter()
        .filter(|&&(u, _)| net.is_terminal(u))
        .map(|&(u, e)| (rational::floor_log(&base, &net.edges()[e].cap), net.name(u)))
        .collect();
    nbrs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(b.1)));
    let ratios = nbrs.windows(2).map(|w| ((w[0].0 - w[1].0) as u32).min(cap_exponent as u32)).collect();
    Ok(RatioType { order: nbrs.iter().map(|x| x.1.to_string()).collect(), ratios, cap_exponent: cap_exponent as u32 })
}

/// Quality guaranteed by [`ratio_type_sparsifier`].
pub fn ratio_type_quality(eps: f64) -> f64 {
    (1.0 + eps) / (1.0 - eps)
}

/// Ratio-type sparsifier of a quasi-bipartite network with independent
/// terminals.
///
/// Capacities are rounded down, non-terminals of equal ratio type are merged,
/// and the result is scaled by `1+ε` so that it dominates the input (the
/// rounding alone loses up to that factor).
pub fn ratio_type_sparsifier(net: &TerminalNetwork, eps: f64) -> Result<MergeOutput> {
    net.require_quasi_bipartite()?;
    let rounded = round_capacities(net, eps)?;
    let mut groups: BTreeMap<RatioType, BTreeSet<String>> = BTreeMap::new();
    for v in rounded.non_terminals() {
        groups.entry(ratio_type(&rounded, v, eps)?).or_default().insert(rounded.name(v).to_string());
    }
    let mut blocks: Vec<BTreeSet<String>> =
        rounded.terminal_names().into_iter().map(|t| BTreeSet::from([t])).collect();
    blocks.extend(groups.into_values());
    let partition = VertexPartition::new(blocks);
    let merged = clump(&rounded, &partition)?;
    let net = merged.scale_capacities(&(Rational::one() + eps_rational(eps)?))?;
    Ok(MergeOutput { net, partition, claimed_quality: ratio_type_quality(eps) })
}

/// Upper bound on the vertex count of a ratio-type output: `2^k·M_type^k + k`.
pub fn ratio_type_size_bound(k: usize, eps: f64) -> f64 {
    2f64.powi(k as i32) * (k as f64 * k as f64 / eps + 1.0).powi(k as i32) + k as f64
}
