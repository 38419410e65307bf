//! Seeded instance generators for the graph classes the constructions target.
//!
//! Terminals are named `t0, t1, ...` and non-terminals `v0, v1, ...`.
//! Capacities are integers drawn uniformly from `[cap_lo, cap_hi]`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::network::TerminalNetwork;
use crate::rational::{int, Rational};
use crate::structured::{SpTree, TreeDecomposition};

#[derive(Debug, Clone, Copy)]
pub struct CapRange {
    pub lo: i64,
    pub hi: i64,
}

impl Default for CapRange {
    fn default() -> Self {
        Self { lo: 1, hi: 10 }
    }
}

impl CapRange {
    fn draw(&self, rng: &mut ChaCha8Rng) -> Rational {
        int(rng.random_range(self.lo..=self.hi))
    }

    fn check(&self) -> Result<()> {
        if self.lo < 1 || self.hi < self.lo {
            return Err(Error::InvalidParameter(format!("capacity range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn tname(i: usize) -> String {
    format!("t{i}")
}

fn vname(i: usize) -> String {
    format!("v{i}")
}

fn names(k: usize, n: usize) -> (Vec<String>, Vec<String>) {
    let terms: Vec<String> = (0..k).map(tname).collect();
    let mut all = terms.clone();
    all.extend((0..n - k).map(vname));
    (all, terms)
}

/// Random connected network on `n` vertices with `k` terminals: a random
/// spanning tree plus each remaining pair independently with probability `p`.
pub fn random_connected(n: usize, k: usize, p: f64, caps: CapRange, seed: u64) -> Result<TerminalNetwork> {
    caps.check()?;
    if k < 2 || n < k {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut r = rng(seed);
    let (all, terms) = names(k, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut r);
    let mut present = BTreeSet::new();
    let mut edges = Vec::new();
    for i in 1..n {
        let j = r.random_range(0..i);
        let (a, b) = (order[i], order[j]);
        present.insert((a.min(b), a.max(b)));
        edges.push((all[a].clone(), all[b].clone(), caps.draw(&mut r)));
    }
    for a in 0..n {
        for b in a + 1..n {
            if !present.contains(&(a, b)) && r.random_bool(p) {
                edges.push((all[a].clone(), all[b].clone(), caps.draw(&mut r)));
            }
        }
    }
    TerminalNetwork::new(&all, &terms, &edges)
}

/// Quasi-bipartite network with `n` vertices in total, `k` of them
/// terminals. Each non-terminal joins 2 or 3 distinct terminals; terminals
/// are independent. Non-terminal `i < k-1` links `t_i` and `t_{i+1}` so the
/// result is connected.
pub fn quasi_bipartite(k: usize, n: usize, caps: CapRange, seed: u64) -> Result<TerminalNetwork> {
    caps.check()?;
    if k < 2 || n < 2 * k - 1 {
        return Err(Error::InvalidParameter(format!("need k >= 2 and n >= 2k-1, got k={k}, n={n}")));
    }
    let mut r = rng(seed);
    let (all, terms) = names(k, n);
    let mut edges = Vec::new();
    for i in 0..n - k {
        let v = &all[k + i];
        let mut ts: Vec<usize> = if i + 1 < k {
            vec![i, i + 1]
        } else {
            let deg = if k >= 3 { r.random_range(2..=3) } else { 2 };
            let mut pool: Vec<usize> = (0..k).collect();
            pool.shuffle(&mut r);
            pool.truncate(deg);
            pool
        };
        ts.sort_unstable();
        for t in ts {
            edges.push((terms[t].clone(), v.clone(), caps.draw(&mut r)));
        }
    }
    TerminalNetwork::new(&all, &terms, &edges)
}

/// Network in which every component of G∖T has between 1 and `w` vertices.
/// `components` components are drawn; each is a random tree plus extra
/// internal edges, and each member links to 1 or 2 terminals.
pub fn bounded_component(k: usize, components: usize, w: usize, caps: CapRange, seed: u64) -> Result<TerminalNetwork> {
    caps.check()?;
    if k < 2 || w == 0 || components < k - 1 {
        return Err(Error::InvalidParameter(format!(
            "need k >= 2, w >= 1, components >= k-1; got k={k}, w={w}, components={components}"
        )));
    }
    let mut r = rng(seed);
    let terms: Vec<String> = (0..k).map(tname).collect();
    let mut all = terms.clone();
    let mut edges = Vec::new();
    let mut next = 0usize;
    for c in 0..components {
        let size = r.random_range(1..=w);
        let members: Vec<String> = (0..size).map(|i| vname(next + i)).collect();
        next += size;
        all.extend(members.iter().cloned());
        for i in 1..size {
            let j = r.random_range(0..i);
            edges.push((members[i].clone(), members[j].clone(), caps.draw(&mut r)));
        }
        for i in 0..size {
            for j in i + 1..size {
                if j != i + 1 && r.random_bool(0.2) {
                    edges.push((members[i].clone(), members[j].clone(), caps.draw(&mut r)));
                }
            }
        }
        // component c < k-1 bridges t_c and t_{c+1}
        if c + 1 < k {
            let a = r.random_range(0..size);
            let b = r.random_range(0..size);
            edges.push((terms[c].clone(), members[a].clone(), caps.draw(&mut r)));
            edges.push((terms[c + 1].clone(), members[b].clone(), caps.draw(&mut r)));
        }
        for m in &members {
            let deg = r.random_range(1..=2usize.min(k));
            let mut pool: Vec<usize> = (0..k).collect();
            pool.shuffle(&mut r);
            for &t in &pool[..deg] {
                edges.push((terms[t].clone(), m.clone(), caps.draw(&mut r)));
            }
        }
    }
    TerminalNetwork::new(&all, &terms, &edges)
}

/// Series-parallel network grown from a single `s`–`t` edge to `n` vertices
/// by random series splits and parallel path additions, with `k` terminals
/// chosen at random (the portals are always terminals when `k >= 2`).
pub fn series_parallel(n: usize, k: usize, caps: CapRange, seed: u64) -> Result<(TerminalNetwork, SpTree)> {
    caps.check()?;
    if n < 2 || k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("need 2 <= k <= n, got k={k}, n={n}")));
    }
    let mut r = rng(seed);
    let mut tree = SpTree::leaf("s", "t", caps.draw(&mut r));
    let mut count = 2usize;
    let mut fresh = 0usize;
    while count < n {
        let leaves = tree.leaf_count();
        let target = r.random_range(0..leaves);
        let series = r.random_bool(0.5);
        let mid = vname(fresh);
        fresh += 1;
        let c1 = caps.draw(&mut r);
        let c2 = caps.draw(&mut r);
        tree = expand_leaf(tree, target, &mut |s, t, cap| {
            if series {
                SpTree::series(SpTree::leaf(s, &mid, cap.clone()), SpTree::leaf(&mid, t, c1.clone()))
            } else {
                SpTree::parallel(
                    SpTree::leaf(s, t, cap.clone()),
                    SpTree::series(SpTree::leaf(s, &mid, c1.clone()), SpTree::leaf(&mid, t, c2.clone())),
                )
            }
        });
        count += 1;
    }
    finish_sp(tree, k, &mut r)
}

/// Complete series-parallel tree of the given depth: `2^depth` leaves,
/// alternating series (at the root) and parallel levels.
pub fn series_parallel_depth(depth: usize, k: usize, caps: CapRange, seed: u64) -> Result<(TerminalNetwork, SpTree)> {
    caps.check()?;
    if depth > 16 {
        return Err(Error::InvalidParameter(format!("depth {depth} too large")));
    }
    let mut r = rng(seed);
    let mut fresh = 0usize;
    fn build(
        s: &str,
        t: &str,
        depth: usize,
        series: bool,
        caps: &CapRange,
        r: &mut ChaCha8Rng,
        fresh: &mut usize,
    ) -> SpTree {
        if depth == 0 {
            return SpTree::leaf(s, t, caps.draw(r));
        }
        if series {
            let mid = vname(*fresh);
            *fresh += 1;
            SpTree::series(build(s, &mid, depth - 1, false, caps, r, fresh), build(&mid, t, depth - 1, false, caps, r, fresh))
        } else {
            SpTree::parallel(build(s, t, depth - 1, true, caps, r, fresh), build(s, t, depth - 1, true, caps, r, fresh))
        }
    }
    let tree = build("s", "t", depth, true, &caps, &mut r, &mut fresh);
    let n = tree.vertices().len();
    if k > n {
        return Err(Error::InvalidParameter(format!("k={k} exceeds {n} vertices")));
    }
    finish_sp(tree, k, &mut r)
}

fn finish_sp(tree: SpTree, k: usize, r: &mut ChaCha8Rng) -> Result<(TerminalNetwork, SpTree)> {
    let verts: Vec<String> = tree.vertices().into_iter().collect();
    let mut others: Vec<String> = verts.iter().filter(|v| *v != "s" && *v != "t").cloned().collect();
    others.shuffle(r);
    let mut terms = vec!["s".to_string(), "t".to_string()];
    terms.extend(others.into_iter().take(k - 2));
    let net = TerminalNetwork::new(&verts, &terms, &tree.edges())?;
    Ok((net, tree))
}

fn expand_leaf(tree: SpTree, target: usize, f: &mut dyn FnMut(&str, &str, &Rational) -> SpTree) -> SpTree {
    fn go(tree: SpTree, target: usize, seen: &mut usize, f: &mut dyn FnMut(&str, &str, &Rational) -> SpTree) -> SpTree {
        match tree {
            SpTree::Leaf { s, t, cap } => {
                let here = *seen;
                *seen += 1;
                if here == target {
                    f(&s, &t, &cap)
                } else {
                    SpTree::Leaf { s, t, cap }
                }
            }
            SpTree::Series { s, t, mid, left, right } => {
                let left = Box::new(go(*left, target, seen, f));
                let right = Box::new(go(*right, target, seen, f));
                SpTree::Series { s, t, mid, left, right }
            }
            SpTree::Parallel { s, t, left, right } => {
                let left = Box::new(go(*left, target, seen, f));
                let right = Box::new(go(*right, target, seen, f));
                SpTree::Parallel { s, t, left, right }
            }
        }
    }
    let mut seen = 0;
    go(tree, target, &mut seen, f)
}

/// Partial `w`-tree on `n` vertices with `k` terminals and a width-`w` tree
/// decomposition. Starts from a `(w+1)`-clique; every further vertex picks a
/// bag, joins a random nonempty subset of `w` of its members, and gets a new
/// bag made of those `w` members plus itself. `w = 1` yields random trees.
pub fn treewidth(k: usize, n: usize, w: usize, caps: CapRange, seed: u64) -> Result<(TerminalNetwork, TreeDecomposition)> {
    caps.check()?;
    if w == 0 || n < w + 1 || k < 2 || k > n {
        return Err(Error::InvalidParameter(format!("need w >= 1, n >= w+1, 2 <= k <= n; got w={w}, n={n}, k={k}")));
    }
    let mut r = rng(seed);
    let ids: Vec<usize> = (0..n).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for a in 0..=w {
        for b in a + 1..=w {
            edges.push((a, b));
        }
    }
    let mut bags: Vec<Vec<usize>> = vec![(0..=w).collect()];
    let mut tree_edges = Vec::new();
    for v in w + 1..n {
        let bi = r.random_range(0..bags.len());
        let mut base = bags[bi].clone();
        base.shuffle(&mut r);
        base.truncate(w);
        let mut nbrs: Vec<usize> = base.iter().copied().filter(|_| r.random_bool(0.7)).collect();
        if nbrs.is_empty() {
            nbrs.push(base[r.random_range(0..base.len())]);
        }
        for &u in &nbrs {
            edges.push((u, v));
        }
        let mut bag = base;
        bag.push(v);
        bag.sort_unstable();
        tree_edges.push((bi, bags.len()));
        bags.push(bag);
    }
    // the initial clique may be thinned too, keeping it connected by a path
    let mut kept = Vec::new();
    for (a, b) in edges {
        if b <= w && b != a + 1 && r.random_bool(0.4) {
            continue;
        }
        kept.push((a, b));
    }
    // terminals: favour low-degree vertices (leaves in trees)
    let mut deg = vec![0usize; n];
    for &(a, b) in &kept {
        deg[a] += 1;
        deg[b] += 1;
    }
    let mut order = ids.clone();
    order.shuffle(&mut r);
    order.sort_by_key(|&v| deg[v]);
    let mut is_term = vec![false; n];
    for &v in &order[..k] {
        is_term[v] = true;
    }
    let mut tn = 0;
    let mut nn = 0;
    let label: Vec<String> = (0..n)
        .map(|v| {
            if is_term[v] {
                tn += 1;
                tname(tn - 1)
            } else {
                nn += 1;
                vname(nn - 1)
            }
        })
        .collect();
    let terms: Vec<String> = (0..n).filter(|&v| is_term[v]).map(|v| label[v].clone()).collect();
    let es: Vec<(String, String, Rational)> =
        kept.iter().map(|&(a, b)| (label[a].clone(), label[b].clone(), caps.draw(&mut r))).collect();
    let net = TerminalNetwork::new(&label, &terms, &es)?;
    let td = TreeDecomposition {
        bags: bags.iter().map(|b| b.iter().map(|&v| label[v].clone()).collect()).collect(),
        edges: tree_edges,
    };
    Ok((net, td))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let a = quasi_bipartite(5, 200, CapRange::default(), 1).unwrap();
        let b = quasi_bipartite(5, 200, CapRange::default(), 1).unwrap();
        assert_eq!(a, b);
        assert!(a.require_quasi_bipartite().is_ok());
        assert_eq!(a.n(), 200);
        assert_ne!(a, quasi_bipartite(5, 200, CapRange::default(), 2).unwrap());
    }

    #[test]
    fn sp_generators() {
        let (net, tree) = series_parallel_depth(4, 2, CapRange::default(), 3).unwrap();
        assert_eq!(tree.leaf_count(), 16);
        tree.realizes(&net).unwrap();
        for seed in 0..10 {
            let (net, tree) = series_parallel(30, 5, CapRange::default(), seed).unwrap();
            assert_eq!(net.n(), 30);
            assert_eq!(net.k(), 5);
            tree.realizes(&net).unwrap();
        }
    }

    #[test]
    fn bounded_components_respect_w() {
        for seed in 0..5 {
            let net = bounded_component(4, 10, 3, CapRange::default(), seed).unwrap();
            assert!(net.components_after_terminal_removal().iter().all(|c| c.len() <= 3));
        }
    }

    #[test]
    fn treewidth_decompositions_are_valid() {
        for w in 1..=3 {
            for seed in 0..5 {
                let (net, td) = treewidth(6, 25, w, CapRange::default(), seed).unwrap();
                td.validate(&net).unwrap();
                assert!(td.width() <= w);
            }
        }
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..10 {
            let net = random_connected(10, 3, 0.2, CapRange::default(), seed).unwrap();
            assert!(net.is_connected());
        }
    }
}
