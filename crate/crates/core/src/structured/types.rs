use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::TerminalNetwork;
use crate::rational::{serde_rational, Rational};

/// Series-parallel decomposition tree between portals `s` and `t`.
///
/// JSON form: `{"kind":"leaf","s":..,"t":..,"cap":..}`,
/// `{"kind":"series","s":..,"t":..,"mid":..,"left":..,"right":..}` (left
/// spans `s..mid`, right spans `mid..t`) and
/// `{"kind":"parallel","s":..,"t":..,"left":..,"right":..}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SpTree {
    Leaf {
        s: String,
        t: String,
        #[serde(with = "serde_rational")]
        cap: Rational,
    },
    Series {
        s: String,
        t: String,
        mid: String,
        left: Box<SpTree>,
        right: Box<SpTree>,
    },
    Parallel {
        s: String,
        t: String,
        left: Box<SpTree>,
        right: Box<SpTree>,
    },
}

impl SpTree {
    pub fn leaf(s: &str, t: &str, cap: Rational) -> Self {
        SpTree::Leaf { s: s.into(), t: t.into(), cap }
    }

    pub fn series(left: SpTree, right: SpTree) -> Self {
        let (s, mid) = left.portals();
        let (_, t) = right.portals();
        let (s, mid, t) = (s.to_string(), mid.to_string(), t.to_string());
        SpTree::Series { s, t, mid, left: Box::new(left), right: Box::new(right) }
    }

    pub fn parallel(left: SpTree, right: SpTree) -> Self {
        let (s, t) = left.portals();
        let (s, t) = (s.to_string(), t.to_string());
        SpTree::Parallel { s, t, left: Box::new(left), right: Box::new(right) }
    }

    /// The same tree with portals swapped.
    pub fn reversed(self) -> Self {
        match self {
            SpTree::Leaf { s, t, cap } => SpTree::Leaf { s: t, t: s, cap },
            SpTree::Series { s, t, mid, left, right } => {
                SpTree::Series { s: t, t: s, mid, left: Box::new(right.reversed()), right: Box::new(left.reversed()) }
            }
            SpTree::Parallel { s, t, left, right } => {
                SpTree::Parallel { s: t, t: s, left: Box::new(left.reversed()), right: Box::new(right.reversed()) }
            }
        }
    }

    pub fn portals(&self) -> (&str, &str) {
        match self {
            SpTree::Leaf { s, t, .. } | SpTree::Series { s, t, .. } | SpTree::Parallel { s, t, .. } => (s, t),
        }
    }

    pub fn children(&self) -> Option<(&SpTree, &SpTree)> {
        match self {
            SpTree::Leaf { .. } => None,
            SpTree::Series { left, right, .. } | SpTree::Parallel { left, right, .. } => Some((left, right)),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self.children() {
            None => 1,
            Some((l, r)) => l.leaf_count() + r.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self.children() {
            None => 0,
            Some((l, r)) => 1 + l.depth().max(r.depth()),
        }
    }

    /// All vertices of the realized graph, portals included.
    pub fn vertices(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vertices(&mut out);
        out
    }

    fn collect_vertices(&self, out: &mut BTreeSet<String>) {
        let (s, t) = self.portals();
        out.insert(s.to_string());
        out.insert(t.to_string());
        if let Some((l, r)) = self.children() {
            l.collect_vertices(out);
            r.collect_vertices(out);
        }
    }

    /// Vertices strictly inside the subgraph (not its portals).
    pub fn internal_vertices(&self) -> BTreeSet<String> {
        let mut v = self.vertices();
        let (s, t) = self.portals();
        v.remove(s);
        v.remove(t);
        v
    }

    pub fn edges(&self) -> Vec<(String, String, Rational)> {
        let mut out = Vec::new();
        self.collect_edges(&mut out);
        out
    }

    fn collect_edges(&self, out: &mut Vec<(String, String, Rational)>) {
        match self {
            SpTree::Leaf { s, t, cap } => out.push((s.clone(), t.clone(), cap.clone())),
            _ => {
                let (l, r) = self.children().unwrap();
                l.collect_edges(out);
                r.collect_edges(out);
            }
        }
    }

    /// Checks portal consistency and that internal vertices of the two
    /// children of every node are disjoint.
    pub fn validate(&self) -> Result<()> {
        match self {
            SpTree::Leaf { s, t, .. } => {
                if s == t {
                    return Err(Error::NotSeriesParallel(format!("leaf loop at `{s}`")));
                }
            }
            SpTree::Series { s, t, mid, left, right } => {
                if left.portals() != (s.as_str(), mid.as_str()) || right.portals() != (mid.as_str(), t.as_str()) {
                    return Err(Error::NotSeriesParallel(format!("series node `{s}`-`{mid}`-`{t}` has bad children")));
                }
                left.validate()?;
                right.validate()?;
                let (a, b) = (left.vertices(), right.vertices());
                if a.intersection(&b).any(|v| v != mid) || s == t {
                    return Err(Error::NotSeriesParallel(format!("series node at `{mid}` overlaps")));
                }
            }
            SpTree::Parallel { s, t, left, right } => {
                if left.portals() != (s.as_str(), t.as_str()) || right.portals() != (s.as_str(), t.as_str()) {
                    return Err(Error::NotSeriesParallel(format!("parallel node `{s}`-`{t}` has bad children")));
                }
                left.validate()?;
                right.validate()?;
                if left.internal_vertices().intersection(&right.internal_vertices()).next().is_some() {
                    return Err(Error::NotSeriesParallel(format!("parallel node `{s}`-`{t}` overlaps")));
                }
            }
        }
        Ok(())
    }

    /// Checks that the tree realizes `net` (parallel leaves summed).
    pub fn realizes(&self, net: &TerminalNetwork) -> Result<()> {
        self.validate()?;
        let verts = self.vertices();
        let names: BTreeSet<String> = net.names().iter().cloned().collect();
        if verts != names {
            return Err(Error::NotSeriesParallel("tree and network vertex sets differ".into()));
        }
        let mine = TerminalNetwork::new_allow_disconnected(
            &verts.iter().collect::<Vec<_>>(),
            &net.terminal_names(),
            &self.edges(),
        )?;
        if mine != *net {
            return Err(Error::NotSeriesParallel("tree does not realize the network's edges".into()));
        }
        Ok(())
    }
}

/// Tree of bags over vertex names; `edges` index into `bags`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeDecomposition {
    pub bags: Vec<Vec<String>>,
    pub edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    pub fn width(&self) -> usize {
        self.bags.iter().map(|b| b.len()).max().unwrap_or(1).saturating_sub(1)
    }

    pub fn validate(&self, net: &TerminalNetwork) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidDecomposition(m));
        let nb = self.bags.len();
        if nb == 0 {
            return if net.n() == 0 { Ok(()) } else { bad("no bags".into()) };
        }
        if self.edges.len() != nb - 1 {
            return bad(format!("{} bags but {} tree edges", nb, self.edges.len()));
        }
        let mut adj = vec![Vec::new(); nb];
        for &(a, b) in &self.edges {
            if a >= nb || b >= nb || a == b {
                return bad(format!("bad tree edge ({a}, {b})"));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        if connected_subset(&adj, &(0..nb).collect::<Vec<_>>()) != nb {
            return bad("bag tree is disconnected".into());
        }
        let mut holding: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, bag) in self.bags.iter().enumerate() {
            for v in bag {
                net.index_of(v)?;
                holding.entry(v.as_str()).or_default().push(i);
            }
        }
        for v in net.names() {
            let Some(bs) = holding.get(v.as_str()) else {
                return bad(format!("vertex `{v}` in no bag"));
            };
            if connected_subset(&adj, bs) != bs.len() {
                return bad(format!("bags holding `{v}` are not connected"));
            }
        }
        for e in net.edges() {
            let (u, v) = (net.name(e.u), net.name(e.v));
            if !self.bags.iter().any(|b| b.iter().any(|x| x == u) && b.iter().any(|x| x == v)) {
                return bad(format!("edge `{u}`-`{v}` not covered"));
            }
        }
        Ok(())
    }

    /// Restriction to the vertices in `keep`: bags intersected, empty bags
    /// contracted away. The result is a valid decomposition of any subgraph
    /// on `keep`.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> TreeDecomposition {
        let nb = self.bags.len();
        let bags: Vec<Vec<String>> =
            self.bags.iter().map(|b| b.iter().filter(|v| keep.contains(*v)).cloned().collect()).collect();
        // union-find: merge each empty bag into a neighbour
        let mut parent: Vec<usize> = (0..nb).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        // keep nonempty bags as roots when possible
        for &(a, b) in &self.edges {
            if bags[a].is_empty() || bags[b].is_empty() {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    if bags[ra].is_empty() {
                        parent[ra] = rb;
                    } else {
                        parent[rb] = ra;
                    }
                }
            }
        }
        let mut id = BTreeMap::new();
        let mut out_bags = Vec::new();
        for i in 0..nb {
            let r = find(&mut parent, i);
            if !bags[r].is_empty() && !id.contains_key(&r) {
                id.insert(r, out_bags.len());
                out_bags.push(bags[r].clone());
            }
        }
        let mut edges = BTreeSet::new();
        for &(a, b) in &self.edges {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                if let (Some(&x), Some(&y)) = (id.get(&ra), id.get(&rb)) {
                    edges.insert((x.min(y), x.max(y)));
                }
            }
        }
        if out_bags.is_empty() {
            return TreeDecomposition { bags: Vec::new(), edges: Vec::new() };
        }
        // components of empty bags may split the tree; reconnect in order
        let mut td = TreeDecomposition { bags: out_bags, edges: edges.into_iter().collect() };
        td.reconnect();
        td
    }

    fn reconnect(&mut self) {
        let nb = self.bags.len();
        let mut adj = vec![Vec::new(); nb];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut comp = vec![usize::MAX; nb];
        let mut reps = Vec::new();
        for s in 0..nb {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(s);
            comp[s] = c;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for &y in &adj[x] {
                    if comp[y] == usize::MAX {
                        comp[y] = c;
                        stack.push(y);
                    }
                }
            }
        }
        for w in reps.windows(2) {
            self.edges.push((w[0], w[1]));
        }
    }
}

fn connected_subset(adj: &[Vec<usize>], set: &[usize]) -> usize {
    if set.is_empty() {
        return 0;
    }
    let inset: BTreeSet<usize> = set.iter().copied().collect();
    let mut seen = BTreeSet::from([set[0]]);
    let mut stack = vec![set[0]];
    while let Some(x) = stack.pop() {
        for &y in &adj[x] {
            if inset.contains(&y) && seen.insert(y) {
                stack.push(y);
            }
        }
    }
    seen.len()
}
