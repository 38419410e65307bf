//! Path decompositions, splicing at internal terminals, and composition of
//! sparsifiers glued at terminals.
//!
//! Splicing replaces a flow path that passes through a terminal `s` by its two
//! halves, turning a demand routed on arbitrary paths into a (different)
//! demand routed on terminal-free paths with identical edge loads. The split
//! log records enough to undo this on any routing of the spliced demand.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{CommodityFlow, FlowSolution};
use crate::network::{phi_merge, DemandVector, TerminalNetwork};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowPath {
    pub id: usize,
    pub vertices: Vec<String>,
    #[serde(with = "rational::serde_rational")]
    pub amount: Rational,
}

impl FlowPath {
    pub fn endpoints(&self) -> (&str, &str) {
        (&self.vertices[0], self.vertices.last().expect("nonempty path"))
    }

    /// Positions of terminals strictly inside the path.
    fn internal_terminals(&self, terminals: &BTreeSet<String>) -> Vec<usize> {
        (1..self.vertices.len().saturating_sub(1)).filter(|&i| terminals.contains(&self.vertices[i])).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowDecomposition {
    pub terminals: BTreeSet<String>,
    pub paths: Vec<FlowPath>,
}

fn key(u: &str, v: &str) -> (String, String) {
    if u <= v {
        (u.to_string(), v.to_string())
    } else {
        (v.to_string(), u.to_string())
    }
}

impl FlowDecomposition {
    pub fn new(terminals: impl IntoIterator<Item = String>) -> Self {
        Self { terminals: terminals.into_iter().collect(), paths: Vec::new() }
    }

    /// Appends a path with the next free id.
    pub fn push(&mut self, vertices: Vec<String>, amount: Rational) -> usize {
        let id = self.paths.iter().map(|p| p.id + 1).max().unwrap_or(0);
        self.paths.push(FlowPath { id, vertices, amount });
        id
    }

    /// Induced demand: total amount per unordered endpoint pair.
    pub fn demand(&self) -> BTreeMap<(String, String), Rational> {
        let mut out: BTreeMap<(String, String), Rational> = BTreeMap::new();
        for p in &self.paths {
            let (a, b) = p.endpoints();
            *out.entry(key(a, b)).or_insert_with(Rational::zero) += &p.amount;
        }
        out
    }

    pub fn demand_vector(&self) -> Result<DemandVector> {
        let mut d = DemandVector::new();
        for ((s, t), x) in self.demand() {
            d.set(&s, &t, rational::to_f64(&x))?;
        }
        Ok(d)
    }

    /// Total amount per undirected edge.
    pub fn edge_loads(&self) -> BTreeMap<(String, String), Rational> {
        let mut out: BTreeMap<(String, String), Rational> = BTreeMap::new();
        for p in &self.paths {
            for w in p.vertices.windows(2) {
                *out.entry(key(&w[0], &w[1])).or_insert_with(Rational::zero) += &p.amount;
            }
        }
        out
    }

    /// Number of terminal occurrences strictly inside paths.
    pub fn internal_terminal_count(&self) -> usize {
        self.paths.iter().map(|p| p.internal_terminals(&self.terminals).len()).sum()
    }

    /// Checks simplicity, terminal endpoints and `amount > 0`, and edge loads
    /// against `net` within `tol` (relative).
    pub fn validate(&self, net: &TerminalNetwork, tol: f64) -> Result<()> {
        for p in &self.paths {
            let (a, b) = p.endpoints();
            if p.vertices.len() < 2 || !self.terminals.contains(a) || !self.terminals.contains(b) {
                return Err(Error::InfeasibleFlow(format!("path {} does not join two terminals", p.id)));
            }
            let distinct: BTreeSet<&String> = p.vertices.iter().collect();
            if distinct.len() != p.vertices.len() {
                return Err(Error::InfeasibleFlow(format!("path {} is not simple", p.id)));
            }
            if !p.amount.is_positive() {
                return Err(Error::InfeasibleFlow(format!("path {} has amount {}", p.id, p.amount)));
            }
        }
        for ((u, v), load) in self.edge_loads() {
            let cap = net.cap_between(net.index_of(&u)?, net.index_of(&v)?);
            let (l, c) = (rational::to_f64(&load), rational::to_f64(&cap));
            if c == 0.0 || l > c * (1.0 + tol) {
                return Err(Error::InfeasibleFlow(format!("edge {u}-{v}: load {l} exceeds capacity {c}")));
            }
        }
        Ok(())
    }

    /// The decomposition as an arc flow with `lambda = 1`.
    pub fn to_flow_solution(&self) -> FlowSolution {
        let mut comms: BTreeMap<(String, String), Commodity> = BTreeMap::new();
        for p in &self.paths {
            let (a, b) = p.endpoints();
            let k = key(a, b);
            let c = comms.entry(k.clone()).or_insert_with(|| Commodity::new(&k.0, &k.1));
            let amount = rational::to_f64(&p.amount);
            let mut piece = BTreeMap::new();
            for w in p.vertices.windows(2) {
                add_arc(&mut piece, &w[0], &w[1], amount);
            }
            c.demand += amount;
            c.absorb(&piece, a != k.0);
        }
        FlowSolution { lambda: 1.0, commodities: comms.into_values().map(Commodity::finish).collect() }
    }
}

/// Path decomposition of a routing: per commodity, peel flow cycles and
/// `s`–`t` paths off the arc flow until the remaining value is negligible.
pub fn decompose_flow(net: &TerminalNetwork, sol: &FlowSolution) -> Result<FlowDecomposition> {
    let (cap_excess, cons) = sol.check(net)?;
    if cap_excess > 1e-6 || cons > 1e-6 {
        return Err(Error::InfeasibleFlow(format!("capacity excess {cap_excess:.3e}, conservation error {cons:.3e}")));
    }
    let mut dec = FlowDecomposition::new(net.terminal_names());
    for c in &sol.commodities {
        let want = sol.lambda * c.demand;
        let tol = 1e-12 * want.max(1.0);
        let mut arcs: BTreeMap<String, BTreeMap<String, f64>> = BTreeMap::new();
        for (u, v, f) in &c.arcs {
            if *f > tol {
                *arcs.entry(u.clone()).or_default().entry(v.clone()).or_default() += f;
            } else if *f < -tol {
                *arcs.entry(v.clone()).or_default().entry(u.clone()).or_default() -= f;
            }
        }
        let outflow = |arcs: &BTreeMap<String, BTreeMap<String, f64>>| -> f64 {
            arcs.get(&c.s).map_or(0.0, |m| m.values().sum())
        };
        let mut routed = 0.0;
        while routed < want - 1e-9 * want.max(1.0) && outflow(&arcs) > tol {
            let mut path = vec![c.s.clone()];
            loop {
                let at = path.last().expect("nonempty").clone();
                if at == c.t {
                    let amount = bottleneck(&arcs, &path);
                    subtract(&mut arcs, &path, amount, tol);
                    routed += amount;
                    dec.push(path, rational::from_f64(amount)?);
                    break;
                }
                let next = arcs
                    .get(&at)
                    .and_then(|m| m.iter().max_by(|a, b| a.1.total_cmp(b.1)).map(|(v, _)| v.clone()));
                match next {
                    None => {
                        // float residue: drop the arc that led here
                        if path.len() < 2 {
                            break;
                        }
                        let prev = &path[path.len() - 2];
                        if let Some(m) = arcs.get_mut(prev) {
                            m.remove(&at);
                        }
                        path.truncate(1);
                    }
                    Some(v) => {
                        if let Some(pos) = path.iter().position(|x| *x == v) {
                            let mut cycle = path[pos..].to_vec();
                            cycle.push(v);
                            let amount = bottleneck(&arcs, &cycle);
                            subtract(&mut arcs, &cycle, amount, tol);
                            path.truncate(pos + 1);
                        } else {
                            path.push(v);
                        }
                    }
                }
            }
        }
        if (routed - want).abs() > 1e-6 * want.max(1.0) {
            return Err(Error::InfeasibleFlow(format!("commodity {}-{} decomposes to {routed}, expected {want}", c.s, c.t)));
        }
    }
    Ok(dec)
}

fn bottleneck(arcs: &BTreeMap<String, BTreeMap<String, f64>>, path: &[String]) -> f64 {
    path.windows(2).map(|w| arcs[&w[0]][&w[1]]).fold(f64::INFINITY, f64::min)
}

fn subtract(arcs: &mut BTreeMap<String, BTreeMap<String, f64>>, path: &[String], amount: f64, tol: f64) {
    for w in path.windows(2) {
        let m = arcs.get_mut(&w[0]).expect("arc exists");
        let f = m.get_mut(&w[1]).expect("arc exists");
        *f -= amount;
        if *f <= tol {
            m.remove(&w[1]);
        }
    }
}

/// One split: path `path` (from `from` to `to`) was cut at the internal
/// terminal `at` into paths `left` (`from`–`at`) and `right` (`at`–`to`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitRecord {
    pub path: usize,
    pub from: String,
    pub at: String,
    pub to: String,
    pub left: usize,
    pub right: usize,
    #[serde(with = "rational::serde_rational")]
    pub amount: Rational,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitLog {
    pub splits: Vec<SplitRecord>,
}

/// Splits every path at its internal terminals. Returns terminal-free paths
/// (fresh ids for split pieces) and the log of splits in order.
pub fn splice(dec: &FlowDecomposition) -> (FlowDecomposition, SplitLog) {
    let mut next_id = dec.paths.iter().map(|p| p.id + 1).max().unwrap_or(0);
    let mut log = SplitLog::default();
    let mut out = FlowDecomposition { terminals: dec.terminals.clone(), paths: Vec::new() };
    let mut stack: Vec<FlowPath> = dec.paths.iter().rev().cloned().collect();
    while let Some(p) = stack.pop() {
        match p.internal_terminals(&dec.terminals).first() {
            None => out.paths.push(p),
            Some(&i) => {
                let left = FlowPath { id: next_id, vertices: p.vertices[..=i].to_vec(), amount: p.amount.clone() };
                let right = FlowPath { id: next_id + 1, vertices: p.vertices[i..].to_vec(), amount: p.amount.clone() };
                next_id += 2;
                let (from, to) = p.endpoints();
                log.splits.push(SplitRecord {
                    path: p.id,
                    from: from.to_string(),
                    at: p.vertices[i].clone(),
                    to: to.to_string(),
                    left: left.id,
                    right: right.id,
                    amount: p.amount.clone(),
                });
                out.paths.push(left);
                stack.push(right);
            }
        }
    }
    (out, log)
}

fn add_arc(arcs: &mut BTreeMap<(String, String), f64>, u: &str, v: &str, f: f64) {
    let back = (v.to_string(), u.to_string());
    if let Some(r) = arcs.get_mut(&back) {
        if *r > f {
            *r -= f;
            return;
        }
        let left = f - *r;
        arcs.remove(&back);
        if left > 0.0 {
            arcs.insert((u.to_string(), v.to_string()), left);
        }
        return;
    }
    *arcs.entry((u.to_string(), v.to_string())).or_insert(0.0) += f;
}

/// A commodity under reconstruction, oriented `s → t`.
struct Commodity {
    s: String,
    t: String,
    demand: f64,
    arcs: BTreeMap<(String, String), f64>,
}

impl Commodity {
    fn new(s: &str, t: &str) -> Self {
        Self { s: s.to_string(), t: t.to_string(), demand: 0.0, arcs: BTreeMap::new() }
    }

    fn from_flow(c: &CommodityFlow) -> Self {
        let mut out = Self::new(&c.s, &c.t);
        out.demand = c.demand;
        for (u, v, f) in &c.arcs {
            add_arc(&mut out.arcs, u, v, *f);
        }
        out
    }

    /// Removes the fraction `frac` of this commodity's flow and returns it,
    /// oriented from `from`.
    fn take(&mut self, frac: f64, from: &str) -> BTreeMap<(String, String), f64> {
        let reverse = from != self.s;
        let mut piece = BTreeMap::new();
        for ((u, v), f) in self.arcs.iter_mut() {
            let x = *f * frac;
            *f -= x;
            if reverse {
                piece.insert((v.clone(), u.clone()), x);
            } else {
                piece.insert((u.clone(), v.clone()), x);
            }
        }
        piece
    }

    /// Adds a flow oriented `s → t`, or `t → s` when `reversed`.
    fn absorb(&mut self, piece: &BTreeMap<(String, String), f64>, reversed: bool) {
        for ((u, v), f) in piece {
            if reversed {
                add_arc(&mut self.arcs, v, u, *f);
            } else {
                add_arc(&mut self.arcs, u, v, *f);
            }
        }
    }

    fn finish(self) -> CommodityFlow {
        CommodityFlow {
            s: self.s,
            t: self.t,
            demand: self.demand,
            arcs: self.arcs.into_iter().filter(|(_, f)| *f > 0.0).map(|((u, v), f)| (u, v, f)).collect(),
        }
    }
}

/// Turns a routing of the spliced demand into a routing of the original
/// demand `d`, by reconnecting each split's two halves in reverse split order.
/// The output routes `route.lambda · d`.
pub fn unsplice_route(net_b: &TerminalNetwork, d: &DemandVector, route: &FlowSolution, log: &SplitLog) -> Result<FlowSolution> {
    let mut comms: BTreeMap<(String, String), Commodity> =
        route.commodities.iter().map(|c| (key(&c.s, &c.t), Commodity::from_flow(c))).collect();
    let scale = d.max().max(1.0);
    for rec in log.splits.iter().rev() {
        let phi = rational::to_f64(&rec.amount);
        let mut piece = BTreeMap::new();
        for (a, b) in [(&rec.from, &rec.at), (&rec.at, &rec.to)] {
            let c = comms
                .get_mut(&key(a, b))
                .ok_or_else(|| Error::InconsistentLog(format!("no commodity {a}-{b} to reconnect")))?;
            if phi > c.demand * (1.0 + 1e-9) + 1e-12 * scale {
                return Err(Error::InconsistentLog(format!("split of {phi} exceeds commodity {a}-{b} demand {}", c.demand)));
            }
            let frac = if c.demand > 0.0 { (phi / c.demand).min(1.0) } else { 0.0 };
            let part = c.take(frac, a);
            c.demand -= phi;
            for ((u, v), f) in part {
                add_arc(&mut piece, &u, &v, f);
            }
        }
        let k = key(&rec.from, &rec.to);
        let c = comms.entry(k.clone()).or_insert_with(|| Commodity::new(&k.0, &k.1));
        c.absorb(&piece, rec.from != c.s);
        c.demand += phi;
    }
    let mut commodities = Vec::new();
    for (k, c) in comms {
        let want = d.get(&k.0, &k.1);
        if (c.demand - want).abs() > 1e-6 * scale {
            return Err(Error::InconsistentLog(format!("pair {}-{} ends with demand {} instead of {want}", k.0, k.1, c.demand)));
        }
        if want > 0.0 {
            let mut c = c;
            c.demand = want;
            commodities.push(c.finish());
        }
    }
    for (s, t, x) in d.iter() {
        if x > 0.0 && !commodities.iter().any(|c| key(&c.s, &c.t) == key(s, t)) {
            return Err(Error::InconsistentLog(format!("pair {s}-{t} is missing from the routing")));
        }
    }
    let out = FlowSolution { lambda: route.lambda, commodities };
    let (excess, cons) = out.check(net_b)?;
    if excess > 1e-6 || cons > 1e-6 {
        return Err(Error::InconsistentLog(format!("reconnected routing is off by {excess:.3e} / {cons:.3e}")));
    }
    Ok(out)
}

/// Glues two sparsifiers along `phi`; the claimed quality is the larger of
/// the two.
pub fn compose(
    g1p: &TerminalNetwork,
    g2p: &TerminalNetwork,
    phi: &[(String, String)],
    q1: f64,
    q2: f64,
) -> Result<(TerminalNetwork, f64)> {
    Ok((phi_merge(g1p, g2p, phi)?, q1.max(q2)))
}
