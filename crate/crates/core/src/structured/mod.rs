//! Exact and structure-driven constructions: cut-to-flow translation, the
//! mimicking base case for at most four terminals, series-parallel and
//! bounded-treewidth recursions.

mod mimick;
mod sp;
mod treewidth;
mod types;

pub use mimick::mimick_small;
pub use sp::{sp_recognize, sp_recognize_between, sp_size_bound, sp_sparsifier};
pub use treewidth::{
    balanced_terminal_separator, treewidth_sparsifier, treewidth_sparsifier_with_threshold, LeafBuilder,
    TreewidthOutput,
};
pub use types::{SpTree, TreeDecomposition};

use crate::error::{Error, Result};
use crate::network::TerminalNetwork;
use crate::rational;

/// Flow sparsifier from a cut sparsifier `gp` of quality `beta`, given the
/// flow-cut gaps `gamma_g` of the input and `gamma_gp` of `gp`.
///
/// A contraction-based `gp` already dominates the input, so it is returned
/// as is with quality `β·γ(G)`. Otherwise its capacities are scaled by
/// `γ(G')` and the quality is `β·γ(G)·γ(G')`.
pub fn translate_cut_sparsifier(
    gp: &TerminalNetwork,
    gamma_gp: f64,
    beta: f64,
    gamma_g: f64,
    contraction_based: bool,
) -> Result<(TerminalNetwork, f64)> {
    for (name, v) in [("gamma_gp", gamma_gp), ("beta", beta), ("gamma_g", gamma_g)] {
        if !(v >= 1.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be at least 1, got {v}")));
        }
    }
    if contraction_based {
        return Ok((gp.clone(), beta * gamma_g));
    }
    let scaled = gp.scale_capacities(&rational::from_f64(gamma_gp)?)?;
    Ok((scaled, beta * gamma_g * gamma_gp))
}
