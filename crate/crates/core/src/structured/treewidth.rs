use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{phi_merge_shared, TerminalNetwork};
use crate::rational::Rational;

use super::mimick::mimick_small;
use super::types::TreeDecomposition;

/// A bag `X` of `tdec` such that every component of `G − X` holds at most
/// `⅔·|T ∖ X|` of the given terminals. Among valid bags the one minimizing
/// the largest component's terminal count is returned.
pub fn balanced_terminal_separator(
    net: &TerminalNetwork,
    tdec: &TreeDecomposition,
    terminals: &[String],
) -> Result<Vec<String>> {
    let tset: BTreeSet<usize> = terminals.iter().map(|t| net.index_of(t)).collect::<Result<_>>()?;
    let mut best: Option<(usize, usize, &Vec<String>)> = None;
    for bag in &tdec.bags {
        let x: BTreeSet<usize> = bag.iter().map(|v| net.index_of(v)).collect::<Result<_>>()?;
        let rest = tset.difference(&x).count();
        let worst = net
            .components(|v| !x.contains(&v))
            .iter()
            .map(|c| c.iter().filter(|v| tset.contains(v)).count())
            .max()
            .unwrap_or(0);
        if 3 * worst <= 2 * rest && best.is_none_or(|(w, size, _)| (worst, bag.len()) < (w, size)) {
            best = Some((worst, bag.len(), bag));
        }
    }
    best.map(|(_, _, b)| b.clone())
        .ok_or_else(|| Error::Internal("no bag is a balanced terminal separator".into()))
}

/// Construction applied to the pieces of the treewidth recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LeafBuilder {
    /// The piece itself (quality 1).
    Identity,
    /// The mimicking network when the piece has at most four terminals,
    /// otherwise the piece itself (quality 1 either way).
    Mimick,
}

impl LeafBuilder {
    pub fn build(self, net: &TerminalNetwork) -> Result<(TerminalNetwork, f64)> {
        match self {
            LeafBuilder::Mimick if net.k() <= 4 => Ok((mimick_small(net)?, 1.0)),
            _ => Ok((net.clone(), 1.0)),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TreewidthOutput {
    pub net: TerminalNetwork,
    pub quality: f64,
    /// Number of separator levels on the deepest branch.
    pub depth: usize,
    pub leaves: usize,
    pub width: usize,
}

struct Piece {
    net: TerminalNetwork,
    quality: f64,
    depth: usize,
    leaves: usize,
}

fn recurse(
    net: &TerminalNetwork,
    tdec: &TreeDecomposition,
    threshold: usize,
    leaf: LeafBuilder,
    path: &str,
) -> Result<Piece> {
    let terms = net.terminal_names();
    if terms.len() <= threshold {
        let (out, quality) = leaf.build(net)?;
        let keep: BTreeSet<String> = net.names().iter().cloned().collect();
        let out = out.rename_except(&keep, &format!("leaf{path}:"))?;
        return Ok(Piece { net: out, quality, depth: 0, leaves: 1 });
    }
    let x = balanced_terminal_separator(net, tdec, &terms)?;
    let xi: BTreeSet<usize> = x.iter().map(|v| net.index_of(v)).collect::<Result<_>>()?;
    let comps = net.components(|v| !xi.contains(&v));
    // each component's piece: its vertices plus X, edges touching the component
    let mut jobs: Vec<(TerminalNetwork, TreeDecomposition)> = Vec::new();
    for comp in &comps {
        let inside: BTreeSet<usize> = comp.iter().copied().collect();
        let mut vertices: Vec<String> = comp.iter().map(|&v| net.name(v).to_string()).collect();
        vertices.extend(x.iter().cloned());
        let mut piece_terms: Vec<String> =
            comp.iter().filter(|&&v| net.is_terminal(v)).map(|&v| net.name(v).to_string()).collect();
        piece_terms.extend(x.iter().cloned());
        let edges: Vec<(String, String, Rational)> = net
            .edges()
            .iter()
            .filter(|e| inside.contains(&e.u) || inside.contains(&e.v))
            .map(|e| (net.name(e.u).to_string(), net.name(e.v).to_string(), e.cap.clone()))
            .collect();
        let g = TerminalNetwork::build(&vertices, &piece_terms, &edges, true)?;
        if g.k() >= terms.len() {
            return Err(Error::Internal(format!("separator did not shrink the terminal set ({} terminals)", g.k())));
        }
        let keep: BTreeSet<String> = vertices.into_iter().collect();
        jobs.push((g, tdec.restrict(&keep)));
    }
    let pieces: Vec<Piece> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, (g, td))| recurse(g, td, threshold, leaf, &format!("{path}.{i}")))
        .collect::<Result<_>>()?;
    let x_edges: Vec<(String, String, Rational)> = net
        .edges()
        .iter()
        .filter(|e| xi.contains(&e.u) && xi.contains(&e.v))
        .map(|e| (net.name(e.u).to_string(), net.name(e.v).to_string(), e.cap.clone()))
        .collect();
    let mut acc = TerminalNetwork::build(&x, &x, &x_edges, true)?;
    let mut quality: f64 = 1.0;
    let (mut depth, mut leaves) = (0, 0);
    for p in pieces {
        acc = phi_merge_shared(&acc, &p.net)?;
        quality = quality.max(p.quality);
        depth = depth.max(p.depth);
        leaves += p.leaves;
    }
    Ok(Piece { net: acc.with_terminals(&terms)?, quality, depth: depth + 1, leaves })
}

/// Treewidth recursion: split at a balanced bag, recurse on each component
/// together with the bag, build leaves once a piece has at most `6(w+1)`
/// terminals, and glue the results at the bag vertices.
pub fn treewidth_sparsifier(net: &TerminalNetwork, tdec: &TreeDecomposition, leaf: LeafBuilder) -> Result<TreewidthOutput> {
    tdec.validate(net)?;
    let width = tdec.width();
    let threshold = 6 * (width + 1);
    let p = recurse(net, tdec, threshold, leaf, "")?;
    Ok(TreewidthOutput { net: p.net, quality: p.quality, depth: p.depth, leaves: p.leaves, width })
}

/// Same recursion with an explicit leaf threshold; used to exercise deeper
/// recursions on small inputs.
pub fn treewidth_sparsifier_with_threshold(
    net: &TerminalNetwork,
    tdec: &TreeDecomposition,
    leaf: LeafBuilder,
    threshold: usize,
) -> Result<TreewidthOutput> {
    tdec.validate(net)?;
    let width = tdec.width();
    if threshold < 6 * (width + 1) {
        log::warn!("leaf threshold {threshold} is below 6(w+1) = {}; separators may not shrink", 6 * (width + 1));
    }
    let p = recurse(net, tdec, threshold, leaf, "")?;
    Ok(TreewidthOutput { net: p.net, quality: p.quality, depth: p.depth, leaves: p.leaves, width })
}
