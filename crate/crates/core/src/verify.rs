//! Quality reports comparing a network `G` with a candidate sparsifier `G'`.
//!
//! A report only covers the demands it was given: it is a witness-set check,
//! not a proof that `λ_G(d) <= λ_{G'}(d) <= q·λ_G(d)` holds for every `d`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{all_bipartition_cuts, lambda_value, max_flow};
use crate::generate::rng;
use crate::network::{DemandEntry, DemandVector, TerminalNetwork};
use crate::rational::{self, Rational};
use crate::sketch::{budget_from_env, ceil_exp, floor_exp, level, DEFAULT_BUDGET};

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_TOL: f64 = 1e-6;

/// Largest `k` accepted by [`certify_cuts`].
pub const MAX_CUT_TERMINALS: usize = 16;

const DISCLAIMER: &str =
    "witness-set certification: bounds hold on the listed demands only, not on the whole demand polytope";

/// Which demand vectors to test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DemandSpec {
    /// `L_st·e_st` for every terminal pair, `L_st` the `s`–`t` max-flow.
    Basis,
    /// `n` vectors with iid uniform coordinates in `[0, L_st / P]`, `P` the
    /// number of pairs, so each is routable.
    Random { n: usize, seed: u64 },
    /// Vectors with every coordinate zero or a power of `1+eps` in
    /// `[eta·L_st, L_st]`, at most `max_support` coordinates nonzero.
    Disc { eps: f64, eta: f64, max_support: usize },
}

impl fmt::Display for DemandSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DemandSpec::Basis => write!(f, "basis"),
            DemandSpec::Random { n, seed } => write!(f, "random:{n}:{seed}"),
            DemandSpec::Disc { eps, eta, max_support } => write!(f, "disc:{eps}:{eta}:{max_support}"),
        }
    }
}

impl FromStr for DemandSpec {
    type Err = Error;

    /// `basis`, `random:N:SEED`, or `disc:EPS:ETA[:MAX_SUPPORT]` (default
    /// support 2).
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidParameter(format!("bad demand spec `{s}`"));
        let num = |p: &str| p.trim().parse::<f64>().map_err(|_| bad());
        let int = |p: &str| p.trim().parse::<u64>().map_err(|_| bad());
        match parts.as_slice() {
            ["basis"] => Ok(DemandSpec::Basis),
            ["random", n, seed] => Ok(DemandSpec::Random { n: int(n)? as usize, seed: int(seed)? }),
            ["disc", eps, eta] => Ok(DemandSpec::Disc { eps: num(eps)?, eta: num(eta)?, max_support: 2 }),
            ["disc", eps, eta, m] => Ok(DemandSpec::Disc { eps: num(eps)?, eta: num(eta)?, max_support: int(m)? as usize }),
            _ => Err(bad()),
        }
    }
}

fn pair_maxflows(net: &TerminalNetwork) -> Result<Vec<(String, String, f64)>> {
    net.terminal_pairs()
        .into_iter()
        .map(|(s, t)| {
            let (s, t) = (net.name(s).to_string(), net.name(t).to_string());
            let l = rational::to_f64(&max_flow(net, &s, &t)?);
            Ok((s, t, l))
        })
        .collect()
}

/// Number of nonzero vectors with at most `max_support` nonzero coordinates,
/// coordinate `i` taking `levels[i]` nonzero values.
fn disc_count(levels: &[usize], max_support: usize) -> f64 {
    // dp[j] = number of ways to pick j nonzero coordinates among pairs seen so far
    let mut dp = vec![0.0f64; max_support + 1];
    dp[0] = 1.0;
    for &l in levels {
        for j in (1..=max_support).rev() {
            dp[j] += dp[j - 1] * l as f64;
        }
    }
    dp[1..].iter().sum()
}

/// Deterministic list of test demands; see [`DemandSpec`].
pub fn demand_grid(net: &TerminalNetwork, spec: &DemandSpec) -> Result<Vec<DemandVector>> {
    demand_grid_with(net, spec, budget_from_env(DEFAULT_BUDGET))
}

pub fn demand_grid_with(net: &TerminalNetwork, spec: &DemandSpec, budget: u64) -> Result<Vec<DemandVector>> {
    match *spec {
        DemandSpec::Basis => {
            Ok(pair_maxflows(net)?.into_iter().map(|(s, t, l)| DemandVector::new().with(&s, &t, l)).collect())
        }
        DemandSpec::Random { n, seed } => {
            if n == 0 {
                return Ok(Vec::new());
            }
            let pairs = pair_maxflows(net)?;
            let p = pairs.len().max(1) as f64;
            let mut r = rng(seed);
            Ok((0..n)
                .map(|_| {
                    let mut d = DemandVector::new();
                    for (s, t, l) in &pairs {
                        d = d.with(s, t, r.random::<f64>() * l / p);
                    }
                    d
                })
                .collect())
        }
        DemandSpec::Disc { eps, eta, max_support } => {
            if !(eps > 0.0 && eps.is_finite()) || !(eta > 0.0 && eta <= 1.0) {
                return Err(Error::InvalidParameter(format!("disc grid needs eps > 0 and eta in (0, 1], got {eps}, {eta}")));
            }
            let pairs = pair_maxflows(net)?;
            let values: Vec<Vec<f64>> = pairs
                .iter()
                .map(|(_, _, l)| (ceil_exp(eps, eta * l)..=floor_exp(eps, *l)).map(|j| level(eps, j)).collect())
                .collect();
            let support = max_support.min(pairs.len());
            let count = disc_count(&values.iter().map(Vec::len).collect::<Vec<_>>(), support);
            if count > budget as f64 {
                return Err(Error::BudgetExceeded { what: "disc demand grid", count, budget });
            }
            let mut out = Vec::new();
            let mut chosen: Vec<(usize, f64)> = Vec::new();
            fn walk(
                i: usize,
                support: usize,
                pairs: &[(String, String, f64)],
                values: &[Vec<f64>],
                chosen: &mut Vec<(usize, f64)>,
                out: &mut Vec<DemandVector>,
            ) {
                if i == pairs.len() {
                    if !chosen.is_empty() {
                        let mut d = DemandVector::new();
                        for &(p, v) in chosen.iter() {
                            d = d.with(&pairs[p].0, &pairs[p].1, v);
                        }
                        out.push(d);
                    }
                    return;
                }
                walk(i + 1, support, pairs, values, chosen, out);
                if chosen.len() < support {
                    for &v in &values[i] {
                        chosen.push((i, v));
                        walk(i + 1, support, pairs, values, chosen, out);
                        chosen.pop();
                    }
                }
            }
            walk(0, support, &pairs, &values, &mut chosen, &mut out);
            Ok(out)
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DemandRecord {
    pub demand: Vec<DemandEntry>,
    pub lambda_g: f64,
    pub lambda_gp: f64,
}

impl DemandRecord {
    /// `λ_{G'}(d) / λ_G(d)`.
    pub fn ratio(&self) -> f64 {
        self.lambda_gp / self.lambda_g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QualityReport {
    pub schema_version: u32,
    pub disclaimer: String,
    pub demand_set: String,
    pub tolerance: f64,
    pub claimed_quality: f64,
    /// `max_d λ_G(d) / λ_{G'}(d)`; at most 1 for a sparsifier.
    pub lower: f64,
    /// `max_d λ_{G'}(d) / λ_G(d)`; at most the quality.
    pub upper: f64,
    pub records: Vec<DemandRecord>,
    pub verdict: Verdict,
}

impl QualityReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Quality implied by the tested demands: `lower · upper`, the factor
    /// `G'` would need after rescaling to dominate `G` exactly.
    pub fn measured_quality(&self) -> f64 {
        self.lower.max(1.0) * self.upper.max(1.0)
    }
}

fn same_terminals(g: &TerminalNetwork, gp: &TerminalNetwork) -> Result<()> {
    let a: BTreeSet<String> = g.terminal_names().into_iter().collect();
    let b: BTreeSet<String> = gp.terminal_names().into_iter().collect();
    if a != b {
        let only_g: Vec<&String> = a.difference(&b).collect();
        let only_gp: Vec<&String> = b.difference(&a).collect();
        return Err(Error::InvalidParameter(format!(
            "terminal sets differ: only in G {only_g:?}, only in G' {only_gp:?}"
        )));
    }
    Ok(())
}

/// λ_G over a fixed demand set, computed once and reused across candidates.
pub struct Certifier<'a> {
    g: &'a TerminalNetwork,
    demands: Vec<DemandVector>,
    lambda_g: Vec<f64>,
    descriptor: String,
    pub tolerance: f64,
}

impl<'a> Certifier<'a> {
    pub fn new(g: &'a TerminalNetwork, demands: Vec<DemandVector>, descriptor: impl Into<String>) -> Result<Self> {
        let lambda_g = demands.par_iter().map(|d| lambda_value(g, d)).collect::<Result<_>>()?;
        Ok(Certifier { g, demands, lambda_g, descriptor: descriptor.into(), tolerance: DEFAULT_TOL })
    }

    pub fn from_spec(g: &'a TerminalNetwork, spec: &DemandSpec) -> Result<Self> {
        Self::new(g, demand_grid(g, spec)?, spec.to_string())
    }

    pub fn demands(&self) -> &[DemandVector] {
        &self.demands
    }

    pub fn certify(&self, gp: &TerminalNetwork, claimed_q: f64) -> Result<QualityReport> {
        same_terminals(self.g, gp)?;
        let lambda_gp: Vec<f64> = self.demands.par_iter().map(|d| lambda_value(gp, d)).collect::<Result<_>>()?;
        let records: Vec<DemandRecord> = self
            .demands
            .iter()
            .zip(&self.lambda_g)
            .zip(lambda_gp)
            .map(|((d, &lg), lgp)| DemandRecord { demand: d.to_json(), lambda_g: lg, lambda_gp: lgp })
            .collect();
        let lower = records.iter().map(|r| r.lambda_g / r.lambda_gp).fold(f64::NEG_INFINITY, f64::max);
        let upper = records.iter().map(DemandRecord::ratio).fold(f64::NEG_INFINITY, f64::max);
        let tol = self.tolerance;
        let pass = records.is_empty() || (lower <= 1.0 + tol && upper <= claimed_q * (1.0 + tol));
        Ok(QualityReport {
            schema_version: SCHEMA_VERSION,
            disclaimer: DISCLAIMER.into(),
            demand_set: self.descriptor.clone(),
            tolerance: tol,
            claimed_quality: claimed_q,
            lower,
            upper,
            records,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        })
    }
}

/// One-shot [`Certifier`].
pub fn certify(g: &TerminalNetwork, gp: &TerminalNetwork, demands: &[DemandVector], claimed_q: f64) -> Result<QualityReport> {
    same_terminals(g, gp)?;
    Certifier::new(g, demands.to_vec(), format!("explicit ({} demands)", demands.len()))?.certify(gp, claimed_q)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutRecord {
    /// Terminals on the side without the first terminal of `G`.
    pub side: Vec<String>,
    #[serde(with = "rational::serde_rational")]
    pub cut_g: Rational,
    #[serde(with = "rational::serde_rational")]
    pub cut_gp: Rational,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutReport {
    pub schema_version: u32,
    pub records: Vec<CutRecord>,
    /// Largest `cut_{G'}/cut_G`.
    pub beta: f64,
    /// Smallest `cut_{G'}/cut_G`; below 1 means `G'` is not a cut sparsifier.
    pub min_ratio: f64,
    /// Every ratio is exactly 1.
    pub exact: bool,
}

/// All `2^{k-1} - 1` terminal bipartition min-cuts of both networks, compared
/// in exact arithmetic.
pub fn certify_cuts(g: &TerminalNetwork, gp: &TerminalNetwork) -> Result<CutReport> {
    same_terminals(g, gp)?;
    let k = g.k();
    if k > MAX_CUT_TERMINALS {
        return Err(Error::BudgetExceeded {
            what: "bipartition cut enumeration",
            count: 2f64.powi(k as i32 - 1),
            budget: 1 << (MAX_CUT_TERMINALS - 1),
        });
    }
    if k < 2 {
        return Ok(CutReport { schema_version: SCHEMA_VERSION, records: Vec::new(), beta: 1.0, min_ratio: 1.0, exact: true });
    }
    let names = g.terminal_names();
    let gp = gp.with_terminals(&names)?;
    let (a, b) = (all_bipartition_cuts(g), all_bipartition_cuts(&gp));
    let mut records = Vec::new();
    let (mut beta, mut min_ratio, mut exact) = (f64::NEG_INFINITY, f64::INFINITY, true);
    for ((mask, cg), (_, cgp)) in a.into_iter().zip(b) {
        let ratio = if cg.is_zero() {
            if cgp.is_zero() { Rational::one() } else { rational::int(i64::MAX) }
        } else {
            &cgp / &cg
        };
        exact &= ratio.is_one();
        let r = rational::to_f64(&ratio);
        beta = beta.max(r);
        min_ratio = min_ratio.min(r);
        let side = (1..k).filter(|i| mask >> (i - 1) & 1 == 1).map(|i| names[i].clone()).collect();
        records.push(CutRecord { side, cut_g: cg, cut_gp: cgp });
    }
    Ok(CutReport { schema_version: SCHEMA_VERSION, records, beta, min_ratio, exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{random_connected, CapRange};
    use crate::structured::mimick_small;

    fn net() -> TerminalNetwork {
        random_connected(9, 3, 0.3, CapRange::default(), 4).unwrap()
    }

    #[test]
    fn spec_round_trips_through_text() {
        for s in ["basis", "random:20:7", "disc:0.5:0.1:2"] {
            assert_eq!(s.parse::<DemandSpec>().unwrap().to_string(), s);
        }
        assert!("disc:x:1".parse::<DemandSpec>().is_err());
    }

    #[test]
    fn basis_and_empty_random() {
        let g = net();
        let basis = demand_grid(&g, &DemandSpec::Basis).unwrap();
        assert_eq!(basis.len(), 3);
        for d in &basis {
            assert!((lambda_value(&g, d).unwrap() - 1.0).abs() < 1e-6);
        }
        assert!(demand_grid(&g, &DemandSpec::Random { n: 0, seed: 1 }).unwrap().is_empty());
        let r = demand_grid(&g, &DemandSpec::Random { n: 5, seed: 1 }).unwrap();
        assert_eq!(r, demand_grid(&g, &DemandSpec::Random { n: 5, seed: 1 }).unwrap());
        assert!(r.iter().all(|d| lambda_value(&g, d).unwrap() >= 1.0 - 1e-9));
    }

    #[test]
    fn disc_on_single_edge() {
        let g = TerminalNetwork::from_int_edges(&["s", "t"], &[("s", "t", 10)]).unwrap();
        let grid = demand_grid(&g, &DemandSpec::Disc { eps: 0.5, eta: 0.1, max_support: 2 }).unwrap();
        let got: Vec<f64> = grid.iter().map(|d| d.get("s", "t")).collect();
        let want: Vec<f64> = (0..6).map(|j| 1.5f64.powi(j)).collect();
        assert_eq!(got, want);
    }

    #[test]
    fn disc_count_matches_enumeration() {
        let g = random_connected(8, 4, 0.4, CapRange::default(), 2).unwrap();
        for m in 1..=3 {
            let spec = DemandSpec::Disc { eps: 0.5, eta: 0.2, max_support: m };
            let grid = demand_grid(&g, &spec).unwrap();
            assert!(grid.iter().all(|d| d.len() <= m && !d.is_zero()));
            assert!(matches!(demand_grid_with(&g, &spec, grid.len() as u64 - 1), Err(Error::BudgetExceeded { .. })));
            assert!(demand_grid_with(&g, &spec, grid.len() as u64).is_ok());
        }
    }

    #[test]
    fn identity_and_doubling() {
        let g = net();
        let demands = demand_grid(&g, &DemandSpec::Random { n: 10, seed: 3 }).unwrap();
        let same = certify(&g, &g, &demands, 1.0).unwrap();
        assert_eq!((same.lower, same.upper), (1.0, 1.0));
        assert!(same.passed());
        let doubled = g.scale_capacities(&rational::int(2)).unwrap();
        let rep = certify(&g, &doubled, &demands, 1.5).unwrap();
        assert!(rep.records.iter().all(|r| (r.ratio() - 2.0).abs() < 1e-6));
        assert!(!rep.passed());
        assert!(certify(&g, &doubled, &demands, 2.0).unwrap().passed());
        // swapping exchanges the roles of lower and upper
        let back = certify(&doubled, &g, &demands.iter().map(|d| d.scaled(2.0)).collect::<Vec<_>>(), 1.0).unwrap();
        assert!((back.lower - rep.upper).abs() < 1e-6);
    }

    #[test]
    fn terminal_mismatch_is_an_error() {
        let g = net();
        let other = random_connected(9, 4, 0.3, CapRange::default(), 4).unwrap();
        assert!(certify(&g, &other, &[], 1.0).is_err());
        assert!(certify_cuts(&g, &other).is_err());
    }

    #[test]
    fn cut_reports() {
        let g = random_connected(10, 4, 0.3, CapRange::default(), 8).unwrap();
        let same = certify_cuts(&g, &g).unwrap();
        assert!(same.exact && same.records.len() == 7);
        let m = mimick_small(&g).unwrap();
        assert!(certify_cuts(&g, &m).unwrap().exact);
        let doubled = certify_cuts(&g, &g.scale_capacities(&rational::int(2)).unwrap()).unwrap();
        assert!(!doubled.exact);
        assert_eq!((doubled.beta, doubled.min_ratio), (2.0, 2.0));
    }
}
