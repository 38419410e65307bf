use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::network::{phi_merge_shared, TerminalNetwork};
use crate::rational::Rational;

use super::mimick::mimick_small;
use super::types::SpTree;

fn orient(tree: SpTree, from: &str) -> SpTree {
    if tree.portals().0 == from {
        tree
    } else {
        tree.reversed()
    }
}

/// Decomposition tree of `net` as an `s`–`t` series-parallel graph, found
/// by repeated parallel-edge merging and series contraction of degree-2
/// vertices other than the portals.
pub fn sp_recognize_between(net: &TerminalNetwork, s: &str, t: &str) -> Result<SpTree> {
    let (si, ti) = (net.index_of(s)?, net.index_of(t)?);
    if si == ti {
        return Err(Error::InvalidParameter("portals must differ".into()));
    }
    let n = net.n();
    let mut edges: Vec<Option<(usize, usize, SpTree)>> = net
        .edges()
        .iter()
        .map(|e| Some((e.u, e.v, SpTree::leaf(net.name(e.u), net.name(e.v), e.cap.clone()))))
        .collect();
    let mut inc: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, e) in net.edges().iter().enumerate() {
        inc[e.u].insert(i);
        inc[e.v].insert(i);
    }
    let mut queue: Vec<usize> = (0..n).collect();
    while let Some(x) = queue.pop() {
        // parallel edges at x
        let mut by_other: HashMap<usize, usize> = HashMap::new();
        for e in inc[x].clone() {
            let (u, v, _) = edges[e].as_ref().expect("alive");
            let y = if *u == x { *v } else { *u };
            match by_other.get(&y) {
                None => {
                    by_other.insert(y, e);
                }
                Some(&keep) => {
                    let (_, _, b) = edges[e].take().expect("alive");
                    inc[x].remove(&e);
                    inc[y].remove(&e);
                    let (ku, kv, a) = edges[keep].take().expect("alive");
                    let from = net.name(ku);
                    edges[keep] = Some((ku, kv, SpTree::parallel(orient(a, from), orient(b, from))));
                    queue.push(y);
                }
            }
        }
        // series contraction at x
        if x != si && x != ti && inc[x].len() == 2 {
            let ids: Vec<usize> = inc[x].iter().copied().collect();
            let (e1, e2) = (ids[0], ids[1]);
            let (u1, v1, a) = edges[e1].take().expect("alive");
            let (u2, v2, b) = edges[e2].take().expect("alive");
            let a_end = if u1 == x { v1 } else { u1 };
            let b_end = if u2 == x { v2 } else { u2 };
            let tree = SpTree::series(orient(a, net.name(a_end)), orient(b, net.name(x)));
            inc[x].clear();
            inc[a_end].remove(&e1);
            inc[b_end].remove(&e2);
            edges[e1] = Some((a_end, b_end, tree));
            inc[a_end].insert(e1);
            inc[b_end].insert(e1);
            queue.push(a_end);
            queue.push(b_end);
        }
    }
    let alive: Vec<usize> = (0..edges.len()).filter(|&i| edges[i].is_some()).collect();
    if alive.len() == 1 {
        let (u, v, tree) = edges[alive[0]].take().expect("alive");
        if (u == si && v == ti) || (u == ti && v == si) {
            return Ok(orient(tree, s));
        }
    }
    Err(Error::NotSeriesParallel(format!("{} edges remain after reductions between `{s}` and `{t}`", alive.len())))
}

/// Decomposition tree with portals chosen among terminal pairs first, then
/// all vertex pairs.
pub fn sp_recognize(net: &TerminalNetwork) -> Result<SpTree> {
    let n = net.n();
    if net.m() == 0 {
        return Err(Error::NotSeriesParallel("no edges".into()));
    }
    let mut pairs: Vec<(usize, usize)> = net.terminal_pairs();
    for u in 0..n {
        for v in u + 1..n {
            if !(net.is_terminal(u) && net.is_terminal(v)) {
                pairs.push((u, v));
            }
        }
    }
    for (u, v) in pairs {
        if let Ok(tree) = sp_recognize_between(net, net.name(u), net.name(v)) {
            return Ok(tree);
        }
    }
    Err(Error::NotSeriesParallel("no pair of portals reduces the graph to one edge".into()))
}

struct SpBuilder {
    pieces: usize,
}

fn has_all(tree: &SpTree, internal: &BTreeSet<String>) -> bool {
    let inside = tree.internal_vertices();
    internal.iter().all(|v| inside.contains(v))
}

/// Leaves of `tree` outside the subtree at `skip`.
fn edges_outside(tree: &SpTree, skip: &SpTree, out: &mut Vec<(String, String, Rational)>) {
    if std::ptr::eq(tree, skip) {
        return;
    }
    match tree {
        SpTree::Leaf { s, t, cap } => out.push((s.clone(), t.clone(), cap.clone())),
        _ => {
            let (l, r) = tree.children().expect("inner node");
            edges_outside(l, skip, out);
            edges_outside(r, skip, out);
        }
    }
}

impl SpBuilder {
    /// Exact sparsifier of the graph built from `edges` with the given
    /// terminals (at most four), its auxiliary vertex renamed uniquely.
    fn base(&mut self, vertices: &BTreeSet<String>, terms: &[String], edges: &[(String, String, Rational)]) -> Result<TerminalNetwork> {
        let verts: Vec<&String> = vertices.iter().collect();
        let g = TerminalNetwork::build(&verts, terms, edges, true)?;
        let m = mimick_small(&g)?;
        self.pieces += 1;
        m.rename_except(&terms.iter().cloned().collect(), &format!("sp{}:", self.pieces))
    }

    /// Sparsifier of the subgraph of `tree` whose terminals are its portals
    /// plus the internal vertices in `terms`.
    fn run(&mut self, tree: &SpTree, terms: &BTreeSet<String>) -> Result<TerminalNetwork> {
        let (s, t) = (tree.portals().0.to_string(), tree.portals().1.to_string());
        let internal: BTreeSet<String> = tree.internal_vertices().intersection(terms).cloned().collect();
        let mut my_terms = vec![s.clone(), t.clone()];
        my_terms.extend(internal.iter().cloned());
        if internal.len() <= 2 {
            return self.base(&tree.vertices(), &my_terms, &tree.edges());
        }
        // deepest node whose subtree still holds every internal terminal
        let mut node = tree;
        while let Some((l, r)) = node.children() {
            if has_all(l, &internal) {
                node = l;
            } else if has_all(r, &internal) {
                node = r;
            } else {
                break;
            }
        }
        let out = if std::ptr::eq(node, tree) {
            let (l, r) = tree.children().ok_or_else(|| Error::Internal("leaf with internal terminals".into()))?;
            let mut inner = terms.clone();
            if let SpTree::Series { mid, .. } = tree {
                inner.insert(mid.clone());
            }
            let a = self.run(l, &inner)?;
            let b = self.run(r, &inner)?;
            phi_merge_shared(&a, &b)?
        } else {
            let (s2, t2) = (node.portals().0.to_string(), node.portals().1.to_string());
            let mut inner_terms = terms.clone();
            inner_terms.insert(s2.clone());
            inner_terms.insert(t2.clone());
            let inner = self.run(node, &inner_terms)?;
            let mut rest = Vec::new();
            edges_outside(tree, node, &mut rest);
            let node_inside = node.internal_vertices();
            let rest_vertices: BTreeSet<String> =
                tree.vertices().into_iter().filter(|v| !node_inside.contains(v)).collect();
            let mut rest_terms: Vec<String> = Vec::new();
            for v in [&s, &t, &s2, &t2] {
                if !rest_terms.contains(v) {
                    rest_terms.push(v.clone());
                }
            }
            let outer = self.base(&rest_vertices, &rest_terms, &rest)?;
            phi_merge_shared(&outer, &inner)?
        };
        out.with_terminals(&my_terms)
    }
}

/// Exact flow sparsifier of a series-parallel network from its decomposition
/// tree. The root portals are treated as terminals during the recursion and
/// demoted at the end if they were not terminals of `net`.
pub fn sp_sparsifier(net: &TerminalNetwork, tree: &SpTree) -> Result<TerminalNetwork> {
    tree.realizes(net)?;
    let mut terms: BTreeSet<String> = net.terminal_names().into_iter().collect();
    let (s, t) = tree.portals();
    terms.insert(s.to_string());
    terms.insert(t.to_string());
    let out = SpBuilder { pieces: 0 }.run(tree, &terms)?;
    out.with_terminals(&net.terminal_names())
}

/// `(2k − 1)·5 + 2`: the vertex bound for [`sp_sparsifier`] outputs with
/// five vertices per mimicking piece.
pub fn sp_size_bound(k: usize) -> usize {
    (2 * k).saturating_sub(1) * 5 + 2
}
