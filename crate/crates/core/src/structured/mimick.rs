use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::all_bipartition_cuts;
use crate::lp::{exact_vertex, LinearProgram, RationalProgram, Relation, Sense};
use crate::network::TerminalNetwork;
use crate::rational::{self, Rational};

/// Candidate edge of a mimicking network: between terminals `i` and `j`, or
/// between terminal `i` and the auxiliary vertex when `j == None`.
type Slot = (usize, Option<usize>);

fn crosses(mask: u64, i: usize) -> bool {
    i > 0 && mask >> (i - 1) & 1 == 1
}

/// One exact-fit attempt. `aux_side[c]` fixes the side of the auxiliary
/// vertex (true = the side of the mask) for cut `c`; `None` means no
/// auxiliary vertex.
fn fit(k: usize, cuts: &[(u64, Rational)], aux_side: Option<u64>) -> Option<Vec<(Slot, Rational)>> {
    let mut slots: Vec<Slot> = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            slots.push((i, Some(j)));
        }
    }
    if aux_side.is_some() {
        slots.extend((0..k).map(|i| (i, None)));
    }
    let scale = cuts.iter().map(|c| rational::to_f64(&c.1)).fold(1.0, f64::max);
    let mut lp = LinearProgram::new(Sense::Minimize, slots.len());
    let mut exact = RationalProgram { num_vars: slots.len(), rows: Vec::new() };
    for (ci, (mask, value)) in cuts.iter().enumerate() {
        // coefficient of slot s in the cut with the auxiliary vertex on `side`
        let coeffs = |side: bool| -> Vec<usize> {
            slots
                .iter()
                .enumerate()
                .filter(|(_, &(i, j))| match j {
                    Some(j) => crosses(*mask, i) != crosses(*mask, j),
                    None => crosses(*mask, i) != side,
                })
                .map(|(s, _)| s)
                .collect()
        };
        let mut rows = vec![(coeffs(true), Relation::Eq)];
        if let Some(sides) = aux_side {
            let side = sides >> ci & 1 == 1;
            rows = vec![(coeffs(side), Relation::Eq), (coeffs(!side), Relation::Ge)];
        }
        for (vars, rel) in rows {
            lp.add_row(vars.iter().map(|&s| (s, 1.0)).collect(), rel, rational::to_f64(value) / scale);
            exact.rows.push((vars.iter().map(|&s| (s, Rational::from_integer(1.into()))).collect(), rel, value.clone()));
        }
    }
    for s in 0..slots.len() {
        lp.objective[s] = 1.0;
    }
    let sol = lp.solve().ok()?;
    let x = exact_vertex(&exact, &sol.basis)?;
    if x.iter().any(|v| v.is_negative()) {
        return None;
    }
    Some(slots.into_iter().zip(x).filter(|(_, c)| !c.is_zero()).collect())
}

/// A network on the terminals plus at most one auxiliary vertex whose
/// terminal bipartition min-cuts equal those of `net` exactly, for `k <= 4`.
///
/// A clique on the terminals is tried first; then every side assignment of
/// the auxiliary vertex across the bipartitions, each as a small LP whose
/// basic solution is re-solved in rationals. Every candidate is certified by
/// recomputing its cuts exactly.
pub fn mimick_small(net: &TerminalNetwork) -> Result<TerminalNetwork> {
    let k = net.k();
    if k > 4 {
        return Err(Error::InvalidParameter(format!("mimicking fit supports k <= 4, got {k}")));
    }
    let terms = net.terminal_names();
    if k <= 1 {
        return TerminalNetwork::build(&terms, &terms, &[] as &[(String, String, Rational)], true);
    }
    let cuts = all_bipartition_cuts(net);
    let aux = net.fresh_name("x");
    let assignments = std::iter::once(None).chain((0..1u64 << cuts.len()).map(Some));
    for a in assignments {
        let Some(edges) = fit(k, &cuts, a) else { continue };
        let mut vertices = terms.clone();
        if edges.iter().any(|((_, j), _)| j.is_none()) {
            vertices.push(aux.clone());
        }
        let edges: Vec<(String, String, Rational)> = edges
            .into_iter()
            .map(|((i, j), c)| (terms[i].clone(), j.map_or(aux.clone(), |j| terms[j].clone()), c))
            .collect();
        let out = TerminalNetwork::build(&vertices, &terms, &edges, true)?;
        if all_bipartition_cuts(&out) == cuts {
            return Ok(out);
        }
    }
    Err(Error::MimickFitFailed(format!("no network on {k} terminals plus one vertex matches the cuts")))
}
