//! Graph-free (1+ε)-approximate λ queries from a stored dictionary of
//! feasible discretized demand vectors.
//!
//! Every stored vector has, per terminal pair, either zero or a power of
//! `1+ε'` inside `[ε'/k²·L_ij, L_ij]`, where `L_ij` is the single-commodity
//! max-flow and `ε' = ε/4` is the internal accuracy. A query binary-searches λ
//! over powers of `1+ε'` and decides each probe by zeroing small coordinates,
//! rounding the rest down, and looking the result up.

use std::collections::HashSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{lambda_value, max_flow};
use crate::network::{DemandVector, TerminalNetwork};
use crate::rational::{self, serde_rational, to_f64, Rational};

/// Exponent sentinel for a zero coordinate.
pub const ZERO: i32 = i32::MIN;

pub const DEFAULT_BUDGET: u64 = 1_000_000;

/// The enumeration budget: `FLOWSPARSE_BUDGET` if set and valid, else
/// `default`.
pub fn budget_from_env(default: u64) -> u64 {
    std::env::var("FLOWSPARSE_BUDGET").ok().and_then(|v| v.trim().parse().ok()).unwrap_or(default)
}

#[derive(Debug, Clone)]
pub struct SketchOptions {
    /// Maximum number of discretized candidate vectors.
    pub budget: u64,
    /// λ ≥ 1 − `feasibility_tol` counts as routable.
    pub feasibility_tol: f64,
}

impl Default for SketchOptions {
    fn default() -> Self {
        Self { budget: budget_from_env(DEFAULT_BUDGET), feasibility_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct DemandSketch {
    epsilon: f64,
    internal_epsilon: f64,
    terminals: Vec<String>,
    pairs: Vec<(String, String)>,
    l: Vec<Rational>,
    lf: Vec<f64>,
    min_exp: Vec<i32>,
    max_exp: Vec<i32>,
    dict: HashSet<Vec<i32>>,
    oracle_calls: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StorageReport {
    pub entries: usize,
    /// Stored machine words: one per coordinate of each entry plus the L values.
    pub words: usize,
    pub bytes: usize,
    /// `(1 + (1/ε')·log_{1+ε'}(k²/ε'))^{C(k,2)}`.
    pub bound: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueryAnswer {
    pub value: f64,
    pub probes: usize,
}

/// `(1+ε)^j`.
pub(crate) fn level(eps: f64, j: i32) -> f64 {
    (1.0 + eps).powi(j)
}

/// Largest `j` with `(1+ε)^j <= x`, for `x > 0`.
pub(crate) fn floor_exp(eps: f64, x: f64) -> i32 {
    let mut j = (x.ln() / (1.0 + eps).ln()).floor() as i32;
    while level(eps, j) > x {
        j -= 1;
    }
    while level(eps, j + 1) <= x {
        j += 1;
    }
    j
}

/// Smallest `j` with `(1+ε)^j >= x`, for `x > 0`.
pub(crate) fn ceil_exp(eps: f64, x: f64) -> i32 {
    let j = floor_exp(eps, x);
    if level(eps, j) >= x {
        j
    } else {
        j + 1
    }
}

impl DemandSketch {
    pub fn build(net: &TerminalNetwork, epsilon: f64) -> Result<Self> {
        Self::build_with(net, epsilon, &SketchOptions::default())
    }

    /// Enumerates the discretized candidates with down-monotone pruning and
    /// keeps exactly the routable ones. User `ε` must lie in `(0, 1/2)` so the
    /// internal `ε/4` is below `1/8`.
    pub fn build_with(net: &TerminalNetwork, epsilon: f64, opts: &SketchOptions) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 0.5) {
            return Err(Error::InvalidParameter(format!("sketch epsilon {epsilon} outside (0, 1/2)")));
        }
        let k = net.k();
        if k < 2 {
            return Err(Error::InvalidParameter("sketch needs at least two terminals".into()));
        }
        let eps = epsilon / 4.0;
        let terminals = net.terminal_names();
        let pairs: Vec<(String, String)> = net
            .terminal_pairs()
            .into_iter()
            .map(|(a, b)| (net.name(a).to_string(), net.name(b).to_string()))
            .collect();
        let l: Vec<Rational> = pairs.iter().map(|(s, t)| max_flow(net, s, t)).collect::<Result<_>>()?;
        let lf: Vec<f64> = l.iter().map(to_f64).collect();
        let floor_frac = eps / (k * k) as f64;
        let mut min_exp = Vec::new();
        let mut max_exp = Vec::new();
        for &x in &lf {
            if x <= 0.0 {
                return Err(Error::InvalidNetwork("terminal pair with zero max-flow".into()));
            }
            min_exp.push(ceil_exp(eps, floor_frac * x));
            max_exp.push(floor_exp(eps, x));
        }
        // per-pair level lists, zero first
        let levels: Vec<Vec<i32>> = min_exp
            .iter()
            .zip(&max_exp)
            .map(|(&lo, &hi)| std::iter::once(ZERO).chain(lo..=hi).collect())
            .collect();
        let candidates: f64 = levels.iter().map(|v| v.len() as f64).product();
        if candidates > opts.budget as f64 {
            return Err(Error::BudgetExceeded { what: "sketch candidates", count: candidates, budget: opts.budget });
        }
        let p = pairs.len();
        let feasible = |exps: &[i32]| -> Result<bool> {
            let mut d = DemandVector::new();
            for (i, &e) in exps.iter().enumerate() {
                if e != ZERO {
                    d.set(&pairs[i].0, &pairs[i].1, level(eps, e))?;
                }
            }
            if d.is_zero() {
                return Ok(true);
            }
            Ok(lambda_value(net, &d)? >= 1.0 - opts.feasibility_tol)
        };

        // prefixes over all but the last two coordinates
        let head = p.saturating_sub(2);
        let mut prefixes: Vec<Vec<i32>> = vec![Vec::new()];
        for lv in levels.iter().take(head) {
            prefixes = prefixes.into_iter().flat_map(|pre| lv.iter().map(move |&e| [pre.as_slice(), &[e]].concat())).collect();
        }
        let tail: Vec<&Vec<i32>> = levels[head..].iter().collect();
        let results: Vec<Result<(Vec<Vec<i32>>, u64)>> = prefixes
            .par_iter()
            .map(|pre| {
                let mut calls = 0u64;
                let mut out = Vec::new();
                let mut probe = |v: &[i32]| -> Result<bool> {
                    calls += 1;
                    feasible(v)
                };
                let zeros: Vec<i32> = [pre.as_slice(), &vec![ZERO; tail.len()]].concat();
                if !probe(&zeros)? {
                    return Ok((out, calls));
                }
                match tail.len() {
                    1 => {
                        for &e in tail[0].iter() {
                            let v = [pre.as_slice(), &[e]].concat();
                            if !probe(&v)? {
                                break;
                            }
                            out.push(v);
                        }
                    }
                    _ => {
                        let (a_levels, b_levels) = (tail[0], tail[1]);
                        let mut c = b_levels.len() as isize - 1;
                        for &a in a_levels.iter() {
                            while c >= 0 {
                                let v = [pre.as_slice(), &[a, b_levels[c as usize]]].concat();
                                if probe(&v)? {
                                    break;
                                }
                                c -= 1;
                            }
                            if c < 0 {
                                break;
                            }
                            for &b in &b_levels[..=c as usize] {
                                out.push([pre.as_slice(), &[a, b]].concat());
                            }
                        }
                    }
                }
                out.retain(|v| v.iter().any(|&e| e != ZERO));
                Ok((out, calls))
            })
            .collect();
        let mut dict = HashSet::new();
        let mut oracle_calls = 0;
        for r in results {
            let (vs, calls) = r?;
            oracle_calls += calls;
            dict.extend(vs);
        }
        Ok(Self {
            epsilon,
            internal_epsilon: eps,
            terminals,
            pairs,
            l,
            lf,
            min_exp,
            max_exp,
            dict,
            oracle_calls,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn internal_epsilon(&self) -> f64 {
        self.internal_epsilon
    }

    pub fn k(&self) -> usize {
        self.terminals.len()
    }

    pub fn len(&self) -> usize {
        self.dict.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dict.is_empty()
    }

    pub fn oracle_calls(&self) -> u64 {
        self.oracle_calls
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn l_values(&self) -> &[Rational] {
        &self.l
    }

    pub fn contains(&self, exps: &[i32]) -> bool {
        self.dict.contains(exps)
    }

    /// Stored vectors as exponent tuples, sorted.
    pub fn entries(&self) -> Vec<Vec<i32>> {
        let mut v: Vec<Vec<i32>> = self.dict.iter().cloned().collect();
        v.sort();
        v
    }

    /// The stored vectors as demands, in `entries()` order, skipping the
    /// all-zero vector.
    pub fn demands(&self) -> Vec<DemandVector> {
        self.entries()
            .into_iter()
            .filter(|e| e.iter().any(|&x| x != ZERO))
            .map(|e| {
                let mut d = DemandVector::new();
                for ((s, t), &x) in self.pairs.iter().zip(&e) {
                    if x != ZERO {
                        d.set(s, t, self.level_value(x)).expect("positive level");
                    }
                }
                d
            })
            .collect()
    }

    /// Demand value of exponent `e` (zero for [`ZERO`]).
    pub fn level_value(&self, e: i32) -> f64 {
        if e == ZERO {
            0.0
        } else {
            level(self.internal_epsilon, e)
        }
    }

    pub fn exponent_range(&self, pair: usize) -> (i32, i32) {
        (self.min_exp[pair], self.max_exp[pair])
    }

    pub fn storage(&self) -> StorageReport {
        let p = self.pairs.len();
        let eps = self.internal_epsilon;
        let k = self.k() as f64;
        let per = 1.0 + (1.0 / eps) * ((k * k / eps).ln() / (1.0 + eps).ln());
        StorageReport {
            entries: self.dict.len(),
            words: self.dict.len() * p + p,
            bytes: self.dict.len() * p * std::mem::size_of::<i32>() + p * 16,
            bound: per.powi(p as i32),
        }
    }

    fn decide(&self, d: &[f64], lam: f64) -> bool {
        let eps = self.internal_epsilon;
        let k2 = (self.k() * self.k()) as f64;
        let mut key = Vec::with_capacity(d.len());
        for (i, &di) in d.iter().enumerate() {
            let x = lam * di;
            if x <= 2.0 * eps / k2 * self.lf[i] {
                key.push(ZERO);
            } else {
                let j = floor_exp(eps, x);
                if j > self.max_exp[i] || j < self.min_exp[i] {
                    return false;
                }
                key.push(j);
            }
        }
        key.iter().all(|&e| e == ZERO) || self.dict.contains(&key)
    }

    pub fn query(&self, d: &DemandVector) -> Result<f64> {
        Ok(self.query_counted(d)?.value)
    }

    /// Binary search over powers of `1+ε'` in `[β/k², β]` with
    /// `β = min L_ij/d_ij`.
    pub fn query_counted(&self, d: &DemandVector) -> Result<QueryAnswer> {
        if d.is_zero() {
            return Err(Error::ZeroDemand);
        }
        let mut dv = vec![0.0; self.pairs.len()];
        for (s, t, x) in d.iter() {
            let i = self
                .pairs
                .iter()
                .position(|(a, b)| (a == s && b == t) || (a == t && b == s))
                .ok_or_else(|| Error::NotTerminal(format!("{s}-{t}")))?;
            dv[i] = x;
        }
        let beta = dv
            .iter()
            .zip(&self.lf)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, l)| l / x)
            .fold(f64::INFINITY, f64::min);
        let eps = self.internal_epsilon;
        let k2 = (self.k() * self.k()) as f64;
        let mut lo = ceil_exp(eps, beta / k2);
        let hi = floor_exp(eps, beta);
        let mut probes = 1;
        if !self.decide(&dv, level(eps, lo)) {
            // cannot happen for a sound dictionary; answer the floor
            return Ok(QueryAnswer { value: beta / k2, probes });
        }
        // invariant: lo accepted, hi_x rejected or past the range
        let mut hi_x = hi + 1;
        while hi_x - lo > 1 {
            let mid = lo + (hi_x - lo) / 2;
            probes += 1;
            if self.decide(&dv, level(eps, mid)) {
                lo = mid;
            } else {
                hi_x = mid;
            }
        }
        Ok(QueryAnswer { value: level(eps, lo), probes })
    }

    pub fn to_file(&self) -> SketchFile {
        SketchFile {
            format: "flowsparse-sketch".into(),
            version: 1,
            k: self.k(),
            epsilon: self.epsilon,
            internal_epsilon: self.internal_epsilon,
            terminals: self.terminals.clone(),
            pairs: self.pairs.clone(),
            l: self.l.iter().map(|x| RationalValue(x.clone())).collect(),
            min_exp: self.min_exp.clone(),
            max_exp: self.max_exp.clone(),
            entries: self
                .entries()
                .into_iter()
                .map(|v| v.into_iter().map(|e| if e == ZERO { None } else { Some(e) }).collect())
                .collect(),
        }
    }

    pub fn from_file(f: &SketchFile) -> Result<Self> {
        if f.format != "flowsparse-sketch" || f.version != 1 {
            return Err(Error::InvalidParameter(format!("unsupported sketch format {} v{}", f.format, f.version)));
        }
        let p = f.pairs.len();
        if p != f.k * (f.k - 1) / 2 || f.l.len() != p || f.min_exp.len() != p || f.max_exp.len() != p {
            return Err(Error::InvalidParameter("inconsistent sketch header".into()));
        }
        let l: Vec<Rational> = f.l.iter().map(|x| x.0.clone()).collect();
        let mut dict = HashSet::new();
        for e in &f.entries {
            if e.len() != p {
                return Err(Error::InvalidParameter("sketch entry of wrong length".into()));
            }
            dict.insert(e.iter().map(|x| x.unwrap_or(ZERO)).collect());
        }
        Ok(Self {
            epsilon: f.epsilon,
            internal_epsilon: f.internal_epsilon,
            terminals: f.terminals.clone(),
            pairs: f.pairs.clone(),
            lf: l.iter().map(rational::to_f64).collect(),
            l,
            min_exp: f.min_exp.clone(),
            max_exp: f.max_exp.clone(),
            dict,
            oracle_calls: 0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalValue(#[serde(with = "serde_rational")] pub Rational);

/// On-disk sketch: header plus sorted exponent tuples (`null` = zero).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SketchFile {
    pub format: String,
    pub version: u32,
    pub k: usize,
    pub epsilon: f64,
    pub internal_epsilon: f64,
    pub terminals: Vec<String>,
    pub pairs: Vec<(String, String)>,
    #[serde(rename = "L")]
    pub l: Vec<RationalValue>,
    pub min_exp: Vec<i32>,
    pub max_exp: Vec<i32>,
    pub entries: Vec<Vec<Option<i32>>>,
}
