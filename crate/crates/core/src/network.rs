//! Terminal networks, demand vectors, partitions and the structural surgeries
//! (subdivision, merging, φ-merge) the constructions are built from.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, serde_rational, to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cap: Rational,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// An undirected capacitated network with an ordered terminal list.
///
/// Construction normalizes: parallel edges are summed, zero-capacity edges
/// dropped, and vertices ordered terminals-first (in terminal order) followed
/// by the remaining ids sorted. Two networks built from the same multiset of
/// edges are therefore structurally equal.
#[derive(Debug, Clone)]
pub struct TerminalNetwork {
    names: Vec<String>,
    index: HashMap<String, usize>,
    terminals: Vec<usize>,
    edges: Vec<Edge>,
    capf: Vec<f64>,
    adj: Vec<Vec<(usize, usize)>>,
}

impl PartialEq for TerminalNetwork {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names && self.terminals == other.terminals && self.edges == other.edges
    }
}

impl Eq for TerminalNetwork {}

impl TerminalNetwork {
    /// Builds a connected network.
    pub fn new<V: AsRef<str>, T: AsRef<str>, E: AsRef<str>>(
        vertices: &[V],
        terminals: &[T],
        edges: &[(E, E, Rational)],
    ) -> Result<Self> {
        Self::build(vertices, terminals, edges, false)
    }

    /// Like [`TerminalNetwork::new`] but accepts disconnected networks.
    pub fn new_allow_disconnected<V: AsRef<str>, T: AsRef<str>, E: AsRef<str>>(
        vertices: &[V],
        terminals: &[T],
        edges: &[(E, E, Rational)],
    ) -> Result<Self> {
        Self::build(vertices, terminals, edges, true)
    }

    /// Convenience constructor with integer capacities; vertices are taken
    /// from the terminals and edge endpoints.
    pub fn from_int_edges(terminals: &[&str], edges: &[(&str, &str, i64)]) -> Result<Self> {
        let mut vs: Vec<&str> = terminals.to_vec();
        for (u, v, _) in edges {
            vs.push(u);
            vs.push(v);
        }
        let mut seen = BTreeSet::new();
        vs.retain(|v| seen.insert(*v));
        let es: Vec<(&str, &str, Rational)> = edges.iter().map(|&(u, v, c)| (u, v, rational::int(c))).collect();
        Self::new(&vs, terminals, &es)
    }

    pub fn build<V: AsRef<str>, T: AsRef<str>, E: AsRef<str>>(
        vertices: &[V],
        terminals: &[T],
        edges: &[(E, E, Rational)],
        allow_disconnected: bool,
    ) -> Result<Self> {
        let mut vset = BTreeSet::new();
        for v in vertices {
            if !vset.insert(v.as_ref().to_string()) {
                return Err(Error::InvalidNetwork(format!("duplicate vertex `{}`", v.as_ref())));
            }
        }
        let mut tseen = BTreeSet::new();
        for t in terminals {
            let t = t.as_ref();
            if !vset.contains(t) {
                return Err(Error::UnknownVertex(t.to_string()));
            }
            if !tseen.insert(t.to_string()) {
                return Err(Error::InvalidNetwork(format!("duplicate terminal `{t}`")));
            }
        }
        let mut names: Vec<String> = terminals.iter().map(|t| t.as_ref().to_string()).collect();
        names.extend(vset.iter().filter(|v| !tseen.contains(*v)).cloned());
        let index: HashMap<String, usize> = names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let mut acc: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (u, v, c) in edges {
            let (u, v) = (u.as_ref(), v.as_ref());
            let iu = *index.get(u).ok_or_else(|| Error::UnknownVertex(u.to_string()))?;
            let iv = *index.get(v).ok_or_else(|| Error::UnknownVertex(v.to_string()))?;
            if iu == iv {
                return Err(Error::InvalidNetwork(format!("self-loop at `{u}`")));
            }
            if c.is_negative() {
                return Err(Error::InvalidNetwork(format!("negative capacity on `{u}`-`{v}`")));
            }
            *acc.entry((iu.min(iv), iu.max(iv))).or_insert_with(Rational::zero) += c;
        }
        let edges: Vec<Edge> =
            acc.into_iter().filter(|(_, c)| !c.is_zero()).map(|((u, v), cap)| Edge { u, v, cap }).collect();
        let net = Self::assemble(names, index, (0..tseen.len()).collect(), edges);
        if !allow_disconnected {
            let c = net.component_count();
            if c > 1 {
                return Err(Error::Disconnected { components: c });
            }
        }
        Ok(net)
    }

    fn assemble(names: Vec<String>, index: HashMap<String, usize>, terminals: Vec<usize>, edges: Vec<Edge>) -> Self {
        let mut adj = vec![Vec::new(); names.len()];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((e.v, i));
            adj[e.v].push((e.u, i));
        }
        let capf = edges.iter().map(|e| to_f64(&e.cap)).collect();
        Self { names, index, terminals, edges, capf, adj }
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// Terminal indices; always `0..k` after normalization.
    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn terminal_names(&self) -> Vec<String> {
        self.terminals.iter().map(|&t| self.names[t].clone()).collect()
    }

    pub fn is_terminal(&self, v: usize) -> bool {
        v < self.terminals.len()
    }

    pub fn terminal_index(&self, name: &str) -> Result<usize> {
        let v = self.index_of(name)?;
        if self.is_terminal(v) {
            Ok(v)
        } else {
            Err(Error::NotTerminal(name.to_string()))
        }
    }

    pub fn non_terminals(&self) -> std::ops::Range<usize> {
        self.k()..self.n()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn cap_f64(&self, e: usize) -> f64 {
        self.capf[e]
    }

    pub fn caps_f64(&self) -> &[f64] {
        &self.capf
    }

    /// `(neighbor, edge index)` pairs.
    pub fn adj(&self, v: usize) -> &[(usize, usize)] {
        &self.adj[v]
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adj[u].iter().find(|(w, _)| *w == v).map(|&(_, e)| e)
    }

    pub fn cap_between(&self, u: usize, v: usize) -> Rational {
        self.edge_between(u, v).map(|e| self.edges[e].cap.clone()).unwrap_or_else(Rational::zero)
    }

    pub fn terminal_pairs(&self) -> Vec<(usize, usize)> {
        let k = self.k();
        let mut out = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for a in 0..k {
            for b in a + 1..k {
                out.push((a, b));
            }
        }
        out
    }

    pub fn edge_list(&self) -> Vec<(String, String, Rational)> {
        self.edges.iter().map(|e| (self.names[e.u].clone(), self.names[e.v].clone(), e.cap.clone())).collect()
    }

    pub fn component_count(&self) -> usize {
        self.components(|_| true).len()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }

    /// Connected components of the subgraph induced by vertices passing `keep`.
    pub fn components(&self, keep: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] || !keep(s) {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                i += 1;
                for &(y, _) in &self.adj[x] {
                    if !seen[y] && keep(y) {
                        seen[y] = true;
                        comp.push(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Components of G∖T as vertex-name sets.
    pub fn components_after_terminal_removal(&self) -> Vec<Vec<String>> {
        self.components(|v| !self.is_terminal(v))
            .into_iter()
            .map(|c| c.into_iter().map(|v| self.names[v].clone()).collect())
            .collect()
    }

    pub fn is_quasi_bipartite(&self) -> bool {
        self.edges.iter().all(|e| self.is_terminal(e.u) || self.is_terminal(e.v))
    }

    pub fn terminal_edge(&self) -> Option<(String, String)> {
        self.edges
            .iter()
            .find(|e| self.is_terminal(e.u) && self.is_terminal(e.v))
            .map(|e| (self.names[e.u].clone(), self.names[e.v].clone()))
    }

    /// Errors unless non-terminals are independent and terminals are too.
    pub fn require_quasi_bipartite(&self) -> Result<()> {
        if let Some(e) = self.edges.iter().find(|e| !self.is_terminal(e.u) && !self.is_terminal(e.v)) {
            return Err(Error::NotQuasiBipartite(self.names[e.u].clone(), self.names[e.v].clone()));
        }
        if let Some((a, b)) = self.terminal_edge() {
            return Err(Error::TerminalEdge(a, b));
        }
        Ok(())
    }

    pub fn normalize(&self) -> TerminalNetwork {
        self.clone()
    }

    /// A name not present in the network, built from `base`.
    pub fn fresh_name(&self, base: &str) -> String {
        fresh_against(base, |s| self.contains(s))
    }

    /// Replaces each terminal–terminal edge by a two-edge path through a
    /// fresh non-terminal with the same capacity on both edges.
    pub fn subdivide_terminal_edges(&self) -> TerminalNetwork {
        if self.terminal_edge().is_none() {
            return self.clone();
        }
        let mut vertices = self.names.clone();
        let mut taken: BTreeSet<String> = vertices.iter().cloned().collect();
        let mut edges = Vec::new();
        for e in &self.edges {
            let (u, v) = (&self.names[e.u], &self.names[e.v]);
            if self.is_terminal(e.u) && self.is_terminal(e.v) {
                let x = fresh_against(&format!("{u}~{v}"), |s| taken.contains(s));
                taken.insert(x.clone());
                vertices.push(x.clone());
                edges.push((u.clone(), x.clone(), e.cap.clone()));
                edges.push((x, v.clone(), e.cap.clone()));
            } else {
                edges.push((u.clone(), v.clone(), e.cap.clone()));
            }
        }
        Self::build(&vertices, &self.terminal_names(), &edges, true).expect("subdivision keeps validity")
    }

    /// Contracts every block of `partition` to one vertex.
    pub fn merge_vertices(&self, partition: &VertexPartition) -> Result<TerminalNetwork> {
        partition.validate_for(self)?;
        let mut rep = vec![String::new(); self.n()];
        let mut vertices = Vec::with_capacity(partition.blocks.len());
        for block in &partition.blocks {
            let ids: Vec<usize> = block.iter().map(|b| self.index[b]).collect();
            let name = match ids.iter().find(|&&v| self.is_terminal(v)) {
                Some(&t) => self.names[t].clone(),
                None => block.iter().next().expect("nonempty block").clone(),
            };
            for v in ids {
                rep[v] = name.clone();
            }
            vertices.push(name);
        }
        let edges: Vec<(String, String, Rational)> = self
            .edges
            .iter()
            .filter(|e| rep[e.u] != rep[e.v])
            .map(|e| (rep[e.u].clone(), rep[e.v].clone(), e.cap.clone()))
            .collect();
        Self::build(&vertices, &self.terminal_names(), &edges, true)
    }

    /// Multiplies every capacity by `factor`.
    pub fn scale_capacities(&self, factor: &Rational) -> Result<TerminalNetwork> {
        if factor.is_negative() {
            return Err(Error::InvalidParameter("negative capacity scale".into()));
        }
        let mut out = self.clone();
        for e in &mut out.edges {
            e.cap *= factor;
        }
        out.edges.retain(|e| !e.cap.is_zero());
        let names = out.names.clone();
        let index = out.index.clone();
        let terminals = out.terminals.clone();
        Ok(Self::assemble(names, index, terminals, out.edges))
    }

    /// Same graph with a new terminal list (which may promote or demote
    /// vertices).
    pub fn with_terminals<S: AsRef<str>>(&self, terminals: &[S]) -> Result<TerminalNetwork> {
        Self::build(&self.names, terminals, &self.edge_list(), true)
    }

    /// Subgraph induced by `vertices`, with the terminals listed.
    pub fn induced<S: AsRef<str>>(&self, vertices: &[S], terminals: &[S]) -> Result<TerminalNetwork> {
        let keep: BTreeSet<usize> = vertices.iter().map(|v| self.index_of(v.as_ref())).collect::<Result<_>>()?;
        let edges: Vec<(String, String, Rational)> = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.u) && keep.contains(&e.v))
            .map(|e| (self.names[e.u].clone(), self.names[e.v].clone(), e.cap.clone()))
            .collect();
        let names: Vec<&str> = vertices.iter().map(|v| v.as_ref()).collect();
        let ts: Vec<&str> = terminals.iter().map(|v| v.as_ref()).collect();
        Self::build(&names, &ts, &edges, true)
    }

    /// Renames every vertex not in `keep` to `prefix + name`.
    pub fn rename_except(&self, keep: &BTreeSet<String>, prefix: &str) -> Result<TerminalNetwork> {
        let map = |s: &String| if keep.contains(s) { s.clone() } else { format!("{prefix}{s}") };
        let vertices: Vec<String> = self.names.iter().map(map).collect();
        let terminals: Vec<String> = self.terminal_names().iter().map(map).collect();
        let edges: Vec<(String, String, Rational)> =
            self.edge_list().into_iter().map(|(u, v, c)| (map(&u), map(&v), c)).collect();
        Self::build(&vertices, &terminals, &edges, true)
    }

    /// Capacity of the cut `(S, V∖S)` for `side[v] == true` meaning `v ∈ S`.
    pub fn cut_capacity(&self, side: &[bool]) -> Rational {
        self.edges.iter().filter(|e| side[e.u] != side[e.v]).map(|e| e.cap.clone()).sum()
    }

    pub fn cut_capacity_f64(&self, side: &[bool]) -> f64 {
        self.edges.iter().zip(&self.capf).filter(|(e, _)| side[e.u] != side[e.v]).map(|(_, c)| c).sum()
    }

    pub fn total_capacity(&self) -> Rational {
        self.edges.iter().map(|e| e.cap.clone()).sum()
    }

    pub fn to_json(&self) -> NetworkJson {
        NetworkJson {
            vertices: self.names.clone(),
            terminals: self.terminal_names(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeJson { u: self.names[e.u].clone(), v: self.names[e.v].clone(), cap: e.cap.clone() })
                .collect(),
            meta: None,
        }
    }

    pub fn from_json(json: &NetworkJson, allow_disconnected: bool) -> Result<Self> {
        let edges: Vec<(String, String, Rational)> =
            json.edges.iter().map(|e| (e.u.clone(), e.v.clone(), e.cap.clone())).collect();
        Self::build(&json.vertices, &json.terminals, &edges, allow_disconnected)
    }
}

/// Appends `#1`, `#2`, ... to `base` until `taken` rejects it.
pub fn fresh_against(base: &str, taken: impl Fn(&str) -> bool) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}#{i}")).find(|s| !taken(s)).expect("unbounded search")
}

/// φ-merge: identify terminal `a` of `g1` with terminal `b` of `g2` for each
/// `(a, b)` in `phi`. Identified vertices keep `g1`'s name; the terminal list
/// is `T1` followed by the unmatched terminals of `g2`. All other vertex ids
/// must be disjoint.
pub fn phi_merge(g1: &TerminalNetwork, g2: &TerminalNetwork, phi: &[(String, String)]) -> Result<TerminalNetwork> {
    let mut target: HashMap<&str, &str> = HashMap::new();
    let mut sources = BTreeSet::new();
    for (a, b) in phi {
        g1.terminal_index(a)?;
        g2.terminal_index(b)?;
        if !sources.insert(a.as_str()) {
            return Err(Error::InvalidParameter(format!("`{a}` mapped twice")));
        }
        if target.insert(b.as_str(), a.as_str()).is_some() {
            return Err(Error::InvalidParameter(format!("duplicate φ target `{b}`")));
        }
    }
    let rename = |s: &str| -> String { target.get(s).map(|a| a.to_string()).unwrap_or_else(|| s.to_string()) };
    let mut vertices: Vec<String> = g1.names.clone();
    for v in &g2.names {
        if target.contains_key(v.as_str()) {
            continue;
        }
        if g1.contains(v) {
            return Err(Error::InvalidNetwork(format!("vertex id `{v}` occurs in both networks")));
        }
        vertices.push(v.clone());
    }
    let mut terminals = g1.terminal_names();
    terminals.extend(g2.terminal_names().into_iter().filter(|t| !target.contains_key(t.as_str())));
    let mut edges = g1.edge_list();
    edges.extend(g2.edge_list().into_iter().map(|(u, v, c)| (rename(&u), rename(&v), c)));
    TerminalNetwork::build(&vertices, &terminals, &edges, true)
}

/// φ-merge along the terminals the two networks share by id.
pub fn phi_merge_shared(g1: &TerminalNetwork, g2: &TerminalNetwork) -> Result<TerminalNetwork> {
    let t2: BTreeSet<String> = g2.terminal_names().into_iter().collect();
    let phi: Vec<(String, String)> =
        g1.terminal_names().into_iter().filter(|t| t2.contains(t)).map(|t| (t.clone(), t)).collect();
    phi_merge(g1, g2, &phi)
}

/// Nonnegative demands on unordered terminal pairs, keyed by terminal id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DemandVector {
    entries: BTreeMap<(String, String), f64>,
}

fn pair_key(s: &str, t: &str) -> (String, String) {
    if s <= t {
        (s.to_string(), t.to_string())
    } else {
        (t.to_string(), s.to_string())
    }
}

impl DemandVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Sets `d_{st}`; zero removes the entry.
    pub fn set(&mut self, s: &str, t: &str, d: f64) -> Result<()> {
        if s == t {
            return Err(Error::InvalidParameter(format!("demand on identical endpoints `{s}`")));
        }
        if !(d >= 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("demand {d} on `{s}`-`{t}`")));
        }
        let key = pair_key(s, t);
        if d == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, d);
        }
        Ok(())
    }

    pub fn with(mut self, s: &str, t: &str, d: f64) -> Self {
        self.set(s, t, d).expect("valid demand");
        self
    }

    pub fn unit(s: &str, t: &str) -> Self {
        Self::new().with(s, t, 1.0)
    }

    pub fn get(&self, s: &str, t: &str) -> f64 {
        self.entries.get(&pair_key(s, t)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((s, t), d)| (s.as_str(), t.as_str(), *d))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.entries.values().fold(0.0, |a, &b| a.max(b))
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = Self::new();
        for (s, t, d) in self.iter() {
            out.set(s, t, d * alpha).expect("scaled demand stays valid");
        }
        out
    }

    /// Checks every key names two distinct terminals of `net`.
    pub fn validate(&self, net: &TerminalNetwork) -> Result<()> {
        for (s, t, _) in self.iter() {
            net.terminal_index(s)?;
            net.terminal_index(t)?;
        }
        Ok(())
    }

    /// Entries as terminal-index pairs of `net`.
    pub fn indexed(&self, net: &TerminalNetwork) -> Result<Vec<(usize, usize, f64)>> {
        self.iter().map(|(s, t, d)| Ok((net.terminal_index(s)?, net.terminal_index(t)?, d))).collect()
    }

    pub fn to_json(&self) -> Vec<DemandEntry> {
        self.iter().map(|(s, t, d)| DemandEntry { s: s.to_string(), t: t.to_string(), d }).collect()
    }

    pub fn from_json(entries: &[DemandEntry]) -> Result<Self> {
        let mut out = Self::new();
        for e in entries {
            let prev = out.get(&e.s, &e.t);
            out.set(&e.s, &e.t, prev + e.d)?;
        }
        Ok(out)
    }
}

/// Disjoint vertex blocks covering a network's vertex set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexPartition {
    pub blocks: Vec<BTreeSet<String>>,
}

impl VertexPartition {
    pub fn new(blocks: Vec<BTreeSet<String>>) -> Self {
        let mut blocks: Vec<_> = blocks.into_iter().filter(|b| !b.is_empty()).collect();
        blocks.sort();
        Self { blocks }
    }

    pub fn singletons(net: &TerminalNetwork) -> Self {
        Self::new(net.names().iter().map(|v| BTreeSet::from([v.clone()])).collect())
    }

    pub fn from_lists(blocks: &[&[&str]]) -> Self {
        Self::new(blocks.iter().map(|b| b.iter().map(|s| s.to_string()).collect()).collect())
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn validate_for(&self, net: &TerminalNetwork) -> Result<()> {
        let mut seen = BTreeSet::new();
        for b in &self.blocks {
            let mut term: Option<&str> = None;
            for v in b {
                let i = net.index_of(v)?;
                if !seen.insert(v.as_str()) {
                    return Err(Error::InvalidPartition(format!("`{v}` in two blocks")));
                }
                if net.is_terminal(i) {
                    if let Some(t) = term {
                        return Err(Error::InvalidPartition(format!("block merges terminals `{t}` and `{v}`")));
                    }
                    term = Some(v);
                }
            }
        }
        if seen.len() != net.n() {
            return Err(Error::InvalidPartition(format!("covers {} of {} vertices", seen.len(), net.n())));
        }
        Ok(())
    }

    pub fn block_of(&self) -> HashMap<&str, usize> {
        let mut out = HashMap::new();
        for (i, b) in self.blocks.iter().enumerate() {
            for v in b {
                out.insert(v.as_str(), i);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeJson {
    pub u: String,
    pub v: String,
    #[serde(with = "serde_rational")]
    pub cap: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkJson {
    pub vertices: Vec<String>,
    pub terminals: Vec<String>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DemandEntry {
    pub s: String,
    pub t: String,
    pub d: f64,
}
