//! The flow oracle: exact max-flow, concurrent flow λ_G(d) with its dual,
//! the 2-hop and terminal-free restrictions, and brute-force sparsest cut.
//!
//! λ is computed by path column generation on the concurrent-flow LP, which
//! is constraint generation on the length LP: Dijkstra under the current
//! edge duals separates violated path constraints. Demands are scaled to unit
//! maximum and capacities to unit maximum internally, so λ(α·d) = λ(d)/α holds
//! up to rounding.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashSet, VecDeque};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Options, Relation, Sense, Simplex};
use crate::network::{DemandVector, TerminalNetwork};
use crate::rational::{to_f64, Rational};

/// Default brute-force limit on |V| for [`sparsest_cut`].
pub const SPARSEST_CUT_MAX_VERTICES: usize = 20;

// ---------------------------------------------------------------- max flow

struct Dinic {
    n: usize,
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<Rational>,
}

impl Dinic {
    fn new(n: usize) -> Self {
        Self { n, head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    fn add_undirected(&mut self, u: usize, v: usize, c: Rational) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c.clone());
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(c);
    }

    fn add_arc(&mut self, u: usize, v: usize, c: Rational) {
        self.head[u].push(self.to.len());
        self.to.push(v);
        self.cap.push(c);
        self.head[v].push(self.to.len());
        self.to.push(u);
        self.cap.push(Rational::zero());
    }

    fn bfs(&self, s: usize) -> Vec<i64> {
        let mut level = vec![-1; self.n];
        level[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &a in &self.head[u] {
                let v = self.to[a];
                if level[v] < 0 && self.cap[a].is_positive() {
                    level[v] = level[u] + 1;
                    q.push_back(v);
                }
            }
        }
        level
    }

    fn dfs(&mut self, u: usize, t: usize, pushed: Rational, level: &[i64], it: &mut [usize]) -> Rational {
        if u == t {
            return pushed;
        }
        while it[u] < self.head[u].len() {
            let a = self.head[u][it[u]];
            let v = self.to[a];
            if level[v] == level[u] + 1 && self.cap[a].is_positive() {
                let amount = if self.cap[a] < pushed { self.cap[a].clone() } else { pushed.clone() };
                let got = self.dfs(v, t, amount, level, it);
                if got.is_positive() {
                    self.cap[a] -= &got;
                    self.cap[a ^ 1] += &got;
                    return got;
                }
            }
            it[u] += 1;
        }
        Rational::zero()
    }

    fn run(&mut self, s: usize, t: usize, infinity: &Rational) -> Rational {
        let mut total = Rational::zero();
        loop {
            let level = self.bfs(s);
            if level[t] < 0 {
                return total;
            }
            let mut it = vec![0; self.n];
            loop {
                let f = self.dfs(s, t, infinity.clone(), &level, &mut it);
                if f.is_zero() {
                    break;
                }
                total += f;
            }
        }
    }
}

/// Exact minimum cut between vertex sets `a` and `b`. Returns the value and
/// the source side of a minimum cut.
pub fn min_cut_sets(net: &TerminalNetwork, a: &[usize], b: &[usize]) -> (Rational, Vec<bool>) {
    let n = net.n();
    let (src, snk) = (n, n + 1);
    let mut d = Dinic::new(n + 2);
    for e in net.edges() {
        d.add_undirected(e.u, e.v, e.cap.clone());
    }
    let big = net.total_capacity() + Rational::from_integer(1.into());
    for &x in a {
        d.add_arc(src, x, big.clone());
    }
    for &x in b {
        d.add_arc(x, snk, big.clone());
    }
    let value = d.run(src, snk, &big);
    let level = d.bfs(src);
    let side = (0..n).map(|v| level[v] >= 0).collect();
    (value, side)
}

/// Exact maximum s–t flow.
pub fn max_flow(net: &TerminalNetwork, s: &str, t: &str) -> Result<Rational> {
    let (si, ti) = (net.terminal_index(s)?, net.terminal_index(t)?);
    if si == ti {
        return Err(Error::InvalidParameter("max_flow needs distinct terminals".into()));
    }
    Ok(min_cut_sets(net, &[si], &[ti]).0)
}

/// Minimum cut separating terminal set `a` from terminal set `b`, where
/// `(a, b)` partitions the terminals into two nonempty parts.
pub fn mincut_partition<S: AsRef<str>>(net: &TerminalNetwork, a: &[S], b: &[S]) -> Result<Rational> {
    let ai: Vec<usize> = a.iter().map(|x| net.terminal_index(x.as_ref())).collect::<Result<_>>()?;
    let bi: Vec<usize> = b.iter().map(|x| net.terminal_index(x.as_ref())).collect::<Result<_>>()?;
    let mut seen = vec![false; net.k()];
    for &x in ai.iter().chain(&bi) {
        if seen[x] {
            return Err(Error::InvalidParameter(format!("terminal `{}` listed twice", net.name(x))));
        }
        seen[x] = true;
    }
    if ai.is_empty() || bi.is_empty() || seen.iter().any(|s| !s) {
        return Err(Error::InvalidParameter("not a bipartition of the terminals into nonempty parts".into()));
    }
    Ok(min_cut_sets(net, &ai, &bi).0)
}

/// All `2^{k-1} - 1` terminal bipartition min-cuts, keyed by the bitmask of
/// the side not containing terminal 0.
pub fn all_bipartition_cuts(net: &TerminalNetwork) -> Vec<(u64, Rational)> {
    let k = net.k();
    let mut out = Vec::new();
    for mask in 1u64..(1u64 << (k - 1)) {
        let b: Vec<usize> = (1..k).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        let a: Vec<usize> = (0..k).filter(|i| !b.contains(i)).collect();
        out.push((mask, min_cut_sets(net, &a, &b).0));
    }
    out
}

// ---------------------------------------------------------- concurrent flow

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommodityFlow {
    pub s: String,
    pub t: String,
    pub demand: f64,
    /// Net flow on directed arcs `(u, v)` (vertex names), routing exactly
    /// `lambda * demand` from `s` to `t`.
    pub arcs: Vec<(String, String, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowSolution {
    pub lambda: f64,
    pub commodities: Vec<CommodityFlow>,
}

impl FlowSolution {
    /// Total flow per undirected edge, keyed by sorted endpoint names.
    pub fn edge_loads(&self) -> BTreeMap<(String, String), f64> {
        let mut out = BTreeMap::new();
        for c in &self.commodities {
            for (u, v, f) in &c.arcs {
                let key = if u <= v { (u.clone(), v.clone()) } else { (v.clone(), u.clone()) };
                *out.entry(key).or_insert(0.0) += f;
            }
        }
        out
    }

    /// Largest relative capacity violation and conservation error. Both are
    /// zero for an exact routing.
    pub fn check(&self, net: &TerminalNetwork) -> Result<(f64, f64)> {
        let mut cap_excess: f64 = 0.0;
        for ((u, v), load) in self.edge_loads() {
            let c = net.edge_between(net.index_of(&u)?, net.index_of(&v)?).map(|e| net.cap_f64(e)).unwrap_or(0.0);
            cap_excess = cap_excess.max((load - c) / c.max(1.0));
        }
        let mut cons: f64 = 0.0;
        for c in &self.commodities {
            let mut bal: BTreeMap<&str, f64> = BTreeMap::new();
            for (u, v, f) in &c.arcs {
                *bal.entry(u).or_default() -= f;
                *bal.entry(v).or_default() += f;
            }
            let want = self.lambda * c.demand;
            for (x, b) in bal {
                let target = if x == c.s {
                    -want
                } else if x == c.t {
                    want
                } else {
                    0.0
                };
                cons = cons.max((b - target).abs() / want.max(1.0));
            }
        }
        Ok((cap_excess.max(0.0), cons))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSolution {
    /// Edge lengths, indexed like `net.edges()`.
    pub lengths: Vec<f64>,
    /// Pair distances `(s, t, δ_st)`.
    pub distances: Vec<(String, String, f64)>,
    /// `Σ c_e ℓ_e`, an upper bound on λ when `Σ d_st δ_st >= 1`.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct LambdaResult {
    pub value: f64,
    pub flow: FlowSolution,
    pub dual: DualSolution,
    pub columns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathRule {
    Any,
    /// No terminal as an internal vertex.
    TerminalFree,
}

#[derive(Clone, Copy, PartialEq)]
struct Label(f64, usize, usize);

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1)).then(o.2.cmp(&self.2))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Shortest paths from `s` under `len`, ties broken by hop count. Returns
/// distances and predecessor edges.
fn dijkstra(net: &TerminalNetwork, s: usize, len: &[f64], rule: PathRule) -> (Vec<f64>, Vec<Option<usize>>) {
    let n = net.n();
    let mut dist = vec![f64::INFINITY; n];
    let mut hops = vec![usize::MAX; n];
    let mut pred = vec![None; n];
    let mut done = vec![false; n];
    dist[s] = 0.0;
    hops[s] = 0;
    let mut heap = BinaryHeap::from([Label(0.0, 0, s)]);
    while let Some(Label(d, h, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        if u != s && rule == PathRule::TerminalFree && net.is_terminal(u) {
            continue;
        }
        for &(v, e) in net.adj(u) {
            let nd = d + len[e];
            let nh = h + 1;
            if nd < dist[v] || (nd == dist[v] && nh < hops[v]) {
                dist[v] = nd;
                hops[v] = nh;
                pred[v] = Some(e);
                heap.push(Label(nd, nh, v));
            }
        }
    }
    (dist, pred)
}

fn trace(net: &TerminalNetwork, pred: &[Option<usize>], s: usize, t: usize) -> Vec<usize> {
    let mut edges = Vec::new();
    let mut x = t;
    while x != s {
        let e = pred[x].expect("reachable");
        edges.push(e);
        x = net.edges()[e].other(x);
    }
    edges.reverse();
    edges
}

/// λ_G(d) with primal flow and canonical dual.
pub fn lambda(net: &TerminalNetwork, d: &DemandVector) -> Result<LambdaResult> {
    lambda_with_rule(net, d, PathRule::Any)
}

pub fn lambda_value(net: &TerminalNetwork, d: &DemandVector) -> Result<f64> {
    Ok(lambda(net, d)?.value)
}

/// Concurrent flow restricted to paths without internal terminals.
pub fn lambda_terminal_free(net: &TerminalNetwork, d: &DemandVector) -> Result<f64> {
    Ok(lambda_with_rule(net, d, PathRule::TerminalFree)?.value)
}

pub fn lambda_with_rule(net: &TerminalNetwork, d: &DemandVector, rule: PathRule) -> Result<LambdaResult> {
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let pairs = d.indexed(net)?;
    let dmax = d.max();
    let cs = net.caps_f64().iter().fold(0.0f64, |a, &b| a.max(b));
    let dn: Vec<f64> = pairs.iter().map(|p| p.2 / dmax).collect();
    let capn: Vec<f64> = net.caps_f64().iter().map(|c| c / cs).collect();
    let m = net.m();

    let mut sources: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    sources.sort_unstable();
    sources.dedup();
    let zero = vec![0.0; m];
    // hop-shortest paths seed the master and detect unroutable pairs
    let mut seeds = Vec::with_capacity(pairs.len());
    {
        let mut cache: BTreeMap<usize, (Vec<f64>, Vec<Option<usize>>)> = BTreeMap::new();
        for &(s, t, _) in &pairs {
            let (dist, pred) = cache.entry(s).or_insert_with(|| dijkstra(net, s, &zero, rule));
            if !dist[t].is_finite() {
                return Ok(zero_lambda(net, d, &pairs));
            }
            seeds.push(trace(net, pred, s, t));
        }
    }

    let p = pairs.len();
    let mut master = LinearProgram::new(Sense::Maximize, 1);
    master.objective[0] = 1.0;
    for (i, &v) in dn.iter().enumerate() {
        master.add_row(vec![(0, v)], Relation::Le, 0.0);
        debug_assert_eq!(i, master.rows.len() - 1);
    }
    let mut sx = Simplex::from_lp(&master, Options::default());
    let mut edge_row: Vec<Option<usize>> = vec![None; m];
    let mut columns: Vec<(usize, Vec<usize>)> = Vec::new();
    let mut known: HashSet<(usize, Vec<usize>)> = HashSet::new();

    let mut add_path = |sx: &mut Simplex,
                        edge_row: &mut Vec<Option<usize>>,
                        columns: &mut Vec<(usize, Vec<usize>)>,
                        pair: usize,
                        path: Vec<usize>|
     -> Result<bool> {
        if !known.insert((pair, path.clone())) {
            return Ok(false);
        }
        let mut coeffs = vec![(pair, -1.0)];
        for &e in &path {
            let r = match edge_row[e] {
                Some(r) => r,
                None => {
                    let r = sx.add_row_le(&[], capn[e])?;
                    edge_row[e] = Some(r);
                    r
                }
            };
            coeffs.push((r, 1.0));
        }
        let j = sx.add_column(0.0, &coeffs);
        debug_assert_eq!(j, columns.len() + 1);
        columns.push((pair, path));
        Ok(true)
    };

    for (i, path) in seeds.into_iter().enumerate() {
        add_path(&mut sx, &mut edge_row, &mut columns, i, path)?;
    }

    let mut len = vec![0.0; m];
    let mut rounds = 0usize;
    loop {
        sx.solve()?;
        rounds += 1;
        let y = sx.duals();
        for e in 0..m {
            len[e] = edge_row[e].map(|r| y[r].max(0.0)).unwrap_or(0.0);
        }
        let mut added = false;
        let mut trees: BTreeMap<usize, (Vec<f64>, Vec<Option<usize>>)> = BTreeMap::new();
        for &s in &sources {
            trees.insert(s, dijkstra(net, s, &len, rule));
        }
        for (i, &(s, t, _)) in pairs.iter().enumerate() {
            let (dist, pred) = &trees[&s];
            let ys = y[i].max(0.0);
            if dist[t] < ys * (1.0 - 1e-10) - 1e-15 {
                let path = trace(net, pred, s, t);
                added |= add_path(&mut sx, &mut edge_row, &mut columns, i, path)?;
            }
        }
        if !added {
            break;
        }
        if rounds > 20_000 {
            return Err(Error::Internal("column generation did not converge".into()));
        }
    }

    let lam_n = sx.objective().max(0.0);
    let x = sx.structural_values();
    let mut per_pair = vec![0.0; p];
    for (j, (pair, _)) in columns.iter().enumerate() {
        per_pair[*pair] += x[j + 1];
    }
    let value = lam_n * cs / dmax;
    let mut arc_maps: Vec<BTreeMap<(usize, usize), f64>> = vec![BTreeMap::new(); p];
    for (j, (pair, path)) in columns.iter().enumerate() {
        let f = x[j + 1];
        if f <= 0.0 || per_pair[*pair] <= 0.0 {
            continue;
        }
        let scale = (lam_n * dn[*pair] / per_pair[*pair]).min(1.0);
        let amount = f * scale * cs;
        let mut at = pairs[*pair].0;
        for &e in path {
            let nx = net.edges()[e].other(at);
            let rev = arc_maps[*pair].get(&(nx, at)).copied().unwrap_or(0.0);
            if rev > 0.0 {
                let cancel = rev.min(amount);
                let left = rev - cancel;
                if left > 0.0 {
                    arc_maps[*pair].insert((nx, at), left);
                } else {
                    arc_maps[*pair].remove(&(nx, at));
                }
                if amount > cancel {
                    *arc_maps[*pair].entry((at, nx)).or_insert(0.0) += amount - cancel;
                }
            } else {
                *arc_maps[*pair].entry((at, nx)).or_insert(0.0) += amount;
            }
            at = nx;
        }
    }
    let commodities = pairs
        .iter()
        .zip(arc_maps)
        .map(|(&(s, t, dem), arcs)| CommodityFlow {
            s: net.name(s).to_string(),
            t: net.name(t).to_string(),
            demand: dem,
            arcs: arcs.into_iter().map(|((u, v), f)| (net.name(u).to_string(), net.name(v).to_string(), f)).collect(),
        })
        .collect();

    // canonical dual: δ = shortest distance under ℓ, normalized so Σ d δ = 1
    let mut trees: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for &s in &sources {
        trees.insert(s, dijkstra(net, s, &len, PathRule::Any).0);
    }
    let delta: Vec<f64> = pairs.iter().map(|&(s, t, _)| trees[&s][t]).collect();
    let sigma: f64 = delta.iter().zip(&dn).map(|(a, b)| a * b).sum();
    let dual = if sigma > 0.0 {
        let f = 1.0 / (sigma * dmax);
        let lengths: Vec<f64> = len.iter().map(|l| l * f).collect();
        let objective = net.caps_f64().iter().zip(&lengths).map(|(c, l)| c * l).sum();
        DualSolution {
            lengths,
            distances: pairs
                .iter()
                .zip(&delta)
                .map(|(&(s, t, _), dl)| (net.name(s).to_string(), net.name(t).to_string(), dl * f))
                .collect(),
            objective,
        }
    } else {
        DualSolution { lengths: vec![0.0; m], distances: Vec::new(), objective: f64::INFINITY }
    };
    if rule == PathRule::Any && (dual.objective - value).abs() > 1e-6 * value.max(1.0) {
        log::warn!("duality gap {} at λ = {}", dual.objective - value, value);
    }
    Ok(LambdaResult { value, flow: FlowSolution { lambda: value, commodities }, dual, columns: columns.len() })
}

fn zero_lambda(net: &TerminalNetwork, d: &DemandVector, pairs: &[(usize, usize, f64)]) -> LambdaResult {
    let _ = d;
    LambdaResult {
        value: 0.0,
        flow: FlowSolution {
            lambda: 0.0,
            commodities: pairs
                .iter()
                .map(|&(s, t, dem)| CommodityFlow {
                    s: net.name(s).to_string(),
                    t: net.name(t).to_string(),
                    demand: dem,
                    arcs: Vec::new(),
                })
                .collect(),
        },
        dual: DualSolution { lengths: vec![0.0; net.m()], distances: Vec::new(), objective: 0.0 },
        columns: 0,
    }
}

/// λ from the compact edge-flow LP: one flow variable per commodity and arc,
/// conservation rows, joint capacity rows. Independent of the column
/// generation path; intended for small networks.
pub fn lambda_edge_flow(net: &TerminalNetwork, d: &DemandVector) -> Result<f64> {
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let pairs = d.indexed(net)?;
    let dmax = d.max();
    let (n, m) = (net.n(), net.m());
    let mut lp = LinearProgram::new(Sense::Maximize, 1 + pairs.len() * 2 * m);
    lp.objective[0] = 1.0;
    let var = |i: usize, e: usize, dir: usize| 1 + i * 2 * m + 2 * e + dir;
    for (i, &(s, t, dem)) in pairs.iter().enumerate() {
        let dn = dem / dmax;
        for v in 0..n {
            let mut row = Vec::new();
            for &(_, e) in net.adj(v) {
                let out_dir = if net.edges()[e].u == v { 0 } else { 1 };
                row.push((var(i, e, out_dir), 1.0));
                row.push((var(i, e, 1 - out_dir), -1.0));
            }
            if v == s {
                row.push((0, -dn));
            } else if v == t {
                row.push((0, dn));
            }
            lp.add_row(row, Relation::Eq, 0.0);
        }
    }
    for e in 0..m {
        let row = (0..pairs.len()).flat_map(|i| [(var(i, e, 0), 1.0), (var(i, e, 1), 1.0)]).collect();
        lp.add_row(row, Relation::Le, net.cap_f64(e));
    }
    Ok(lp.solve()?.objective / dmax)
}

// ----------------------------------------------------------------- 2-hop

#[derive(Debug, Clone)]
pub struct TwoHopSolution {
    pub value: f64,
    /// False when some demanded pair has no common neighbor.
    pub feasible: bool,
    /// `(s, t, v, f^{st}_v)` routing exactly `value * d_st` per pair.
    pub flows: Vec<(String, String, String, f64)>,
}

fn common_middles(net: &TerminalNetwork, s: usize, t: usize) -> Vec<usize> {
    let mut out: Vec<usize> = net
        .adj(s)
        .iter()
        .filter(|&&(v, _)| !net.is_terminal(v) && net.edge_between(v, t).is_some())
        .map(|&(v, _)| v)
        .collect();
    out.sort_unstable();
    out
}

/// The 2-hop concurrent flow LP, solved as written.
pub fn lambda_2hop(net: &TerminalNetwork, d: &DemandVector) -> Result<TwoHopSolution> {
    net.require_quasi_bipartite()?;
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let pairs = d.indexed(net)?;
    let mids: Vec<Vec<usize>> = pairs.iter().map(|&(s, t, _)| common_middles(net, s, t)).collect();
    if mids.iter().any(|m| m.is_empty()) {
        return Ok(TwoHopSolution { value: 0.0, feasible: false, flows: Vec::new() });
    }
    let dmax = d.max();
    let mut lp = LinearProgram::new(Sense::Maximize, 1);
    lp.objective[0] = 1.0;
    let mut vars = Vec::new();
    // edge (v, terminal) -> vars using it
    let mut by_edge: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &(s, t, dem)) in pairs.iter().enumerate() {
        let mut row = vec![(0, dem / dmax)];
        for &v in &mids[i] {
            let j = lp.add_var(0.0);
            vars.push((i, v, j));
            row.push((j, -1.0));
            by_edge.entry(net.edge_between(s, v).unwrap()).or_default().push(j);
            by_edge.entry(net.edge_between(v, t).unwrap()).or_default().push(j);
        }
        lp.add_row(row, Relation::Le, 0.0);
    }
    for (e, js) in by_edge {
        lp.add_row(js.into_iter().map(|j| (j, 1.0)).collect(), Relation::Le, net.cap_f64(e));
    }
    let sol = lp.solve()?;
    let value = sol.objective / dmax;
    let mut total = vec![0.0; pairs.len()];
    for &(i, _, j) in &vars {
        total[i] += sol.x[j];
    }
    let flows = vars
        .iter()
        .filter(|&&(_, _, j)| sol.x[j] > 0.0)
        .map(|&(i, v, j)| {
            let (s, t, dem) = pairs[i];
            let f = sol.x[j] * (value * dem / total[i]).min(1.0);
            (net.name(s).to_string(), net.name(t).to_string(), net.name(v).to_string(), f)
        })
        .collect();
    Ok(TwoHopSolution { value, feasible: true, flows })
}

/// The dual of the 2-hop LP, solved directly as a minimization.
pub fn dual_2hop(net: &TerminalNetwork, d: &DemandVector) -> Result<(f64, DualSolution)> {
    net.require_quasi_bipartite()?;
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let pairs = d.indexed(net)?;
    let m = net.m();
    let mut lp = LinearProgram::new(Sense::Minimize, m + pairs.len());
    for e in 0..m {
        lp.objective[e] = net.cap_f64(e);
    }
    lp.add_row(pairs.iter().enumerate().map(|(i, p)| (m + i, p.2)).collect(), Relation::Ge, 1.0);
    for (i, &(s, t, _)) in pairs.iter().enumerate() {
        let mids = common_middles(net, s, t);
        if mids.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "pair `{}`-`{}` has no common neighbor",
                net.name(s),
                net.name(t)
            )));
        }
        for v in mids {
            let (a, b) = (net.edge_between(s, v).unwrap(), net.edge_between(v, t).unwrap());
            lp.add_row(vec![(m + i, 1.0), (a, -1.0), (b, -1.0)], Relation::Le, 0.0);
        }
    }
    let sol = lp.solve()?;
    let dual = DualSolution {
        lengths: sol.x[..m].to_vec(),
        distances: pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, t, _))| (net.name(s).to_string(), net.name(t).to_string(), sol.x[m + i]))
            .collect(),
        objective: sol.objective,
    };
    Ok((sol.objective, dual))
}

// ---------------------------------------------------------------- cuts

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Cut {
    pub side: Vec<String>,
    pub capacity: f64,
    pub separated_demand: f64,
    pub sparsity: f64,
}

/// Exact sparsest cut by enumerating all vertex subsets.
pub fn sparsest_cut(net: &TerminalNetwork, d: &DemandVector) -> Result<(f64, Cut)> {
    sparsest_cut_bounded(net, d, SPARSEST_CUT_MAX_VERTICES)
}

pub fn sparsest_cut_bounded(net: &TerminalNetwork, d: &DemandVector, max_vertices: usize) -> Result<(f64, Cut)> {
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let n = net.n();
    if n > max_vertices {
        return Err(Error::BudgetExceeded {
            what: "sparsest cut subsets (use the terminal-bipartition mode)",
            count: 2f64.powi(n as i32),
            budget: 1u64 << max_vertices.min(63),
        });
    }
    let pairs = d.indexed(net)?;
    let edges: Vec<(usize, usize, f64)> =
        net.edges().iter().zip(net.caps_f64()).map(|(e, &c)| (e.u, e.v, c)).collect();
    let mut best: Option<(f64, u64, f64, f64)> = None;
    // vertex n-1 stays outside S; S and its complement give the same cut
    for mask in 1u64..(1u64 << (n - 1)) {
        let sep: f64 = pairs.iter().filter(|p| (mask >> p.0 & 1) != (mask >> p.1 & 1)).map(|p| p.2).sum();
        if sep <= 0.0 {
            continue;
        }
        let cap: f64 = edges.iter().filter(|e| (mask >> e.0 & 1) != (mask >> e.1 & 1)).map(|e| e.2).sum();
        let r = cap / sep;
        if best.is_none_or(|b| r < b.0) {
            best = Some((r, mask, cap, sep));
        }
    }
    let (r, mask, cap, sep) = best.ok_or(Error::ZeroDemand)?;
    let side = (0..n).filter(|v| mask >> v & 1 == 1).map(|v| net.name(v).to_string()).collect();
    Ok((r, Cut { side, capacity: cap, separated_demand: sep, sparsity: r }))
}

/// Sparsest cut over terminal bipartitions, each completed by an exact
/// minimum cut. Every vertex cut induces some terminal bipartition and the
/// min-cut is the cheapest cut inducing it, so this equals the brute-force
/// value while enumerating only `2^{k-1}` sets.
pub fn sparsest_cut_terminal(net: &TerminalNetwork, d: &DemandVector) -> Result<(f64, Cut)> {
    if d.is_zero() {
        return Err(Error::ZeroDemand);
    }
    let k = net.k();
    if k > 24 {
        return Err(Error::BudgetExceeded { what: "terminal bipartitions", count: 2f64.powi(k as i32 - 1), budget: 1 << 23 });
    }
    let pairs = d.indexed(net)?;
    let mut best: Option<(f64, Cut)> = None;
    for mask in 1u64..(1u64 << (k - 1)) {
        let inb = |i: usize| i > 0 && mask >> (i - 1) & 1 == 1;
        let sep: f64 = pairs.iter().filter(|p| inb(p.0) != inb(p.1)).map(|p| p.2).sum();
        if sep <= 0.0 {
            continue;
        }
        let a: Vec<usize> = (0..k).filter(|&i| !inb(i)).collect();
        let b: Vec<usize> = (0..k).filter(|&i| inb(i)).collect();
        let (cap, side) = min_cut_sets(net, &a, &b);
        let cap = to_f64(&cap);
        let r = cap / sep;
        if best.as_ref().is_none_or(|b| r < b.0) {
            let side = (0..net.n()).filter(|&v| side[v]).map(|v| net.name(v).to_string()).collect();
            best = Some((r, Cut { side, capacity: cap, separated_demand: sep, sparsity: r }));
        }
    }
    best.ok_or(Error::ZeroDemand)
}
