//! Revised simplex with an explicit dense basis inverse.
//!
//! Two-phase, Dantzig pricing with a switch to Bland's rule after a run of
//! degenerate pivots, Harris two-pass ratio test, and refactorization when the
//! basic solution drifts. [`Simplex`] can grow by columns and rows so callers
//! can do column generation; [`exact_vertex`] re-solves a final basis in
//! rationals.

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Relation,
    pub rhs: f64,
}

/// All variables are nonnegative.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new(sense: Sense, num_vars: usize) -> Self {
        Self { sense, objective: vec![0.0; num_vars], rows: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_var(&mut self, cost: f64) -> usize {
        self.objective.push(cost);
        self.objective.len() - 1
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, rel: Relation, rhs: f64) -> usize {
        self.rows.push(Constraint { coeffs, rel, rhs });
        self.rows.len() - 1
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        self.solve_with(&Options::default())
    }

    pub fn solve_with(&self, opts: &Options) -> Result<LpSolution, LpError> {
        let mut s = Simplex::from_lp(self, opts.clone());
        s.solve()?;
        Ok(s.solution())
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub pivot_tol: f64,
    pub max_iter: usize,
    pub degenerate_switch: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self { feas_tol: 1e-9, opt_tol: 1e-9, pivot_tol: 1e-9, max_iter: 200_000, degenerate_switch: 50 }
    }
}

/// Basic variable identity, in terms of the original program.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisVar {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    /// Row duals for the original orientation: objective = Σ rhs_i·y_i.
    pub duals: Vec<f64>,
    /// `basis[i]` is the variable basic in row `i`.
    pub basis: Vec<BasisVar>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Structural(usize),
    Slack(usize),
    Artificial(usize),
}

#[derive(Debug, Clone)]
pub struct Simplex {
    opts: Options,
    sense: Sense,
    m: usize,
    // columns in normalized row orientation
    cols: Vec<Vec<(usize, f64)>>,
    kinds: Vec<Kind>,
    cost: Vec<f64>,
    structural: Vec<usize>,
    b: Vec<f64>,
    flipped: Vec<bool>,
    rels: Vec<Relation>,
    basis: Vec<usize>,
    in_basis: Vec<Option<usize>>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    feasible: bool,
}

impl Simplex {
    pub fn from_lp(lp: &LinearProgram, opts: Options) -> Self {
        let n = lp.num_vars();
        let mut s = Simplex {
            opts,
            sense: lp.sense,
            m: 0,
            cols: vec![Vec::new(); n],
            kinds: (0..n).map(Kind::Structural).collect(),
            cost: lp
                .objective
                .iter()
                .map(|&c| if lp.sense == Sense::Maximize { c } else { -c })
                .collect(),
            structural: (0..n).collect(),
            b: Vec::new(),
            flipped: Vec::new(),
            rels: Vec::new(),
            basis: Vec::new(),
            in_basis: vec![None; n],
            binv: Vec::new(),
            xb: Vec::new(),
            iterations: 0,
            since_refactor: 0,
            feasible: true,
        };
        for row in &lp.rows {
            let flip = row.rhs < 0.0;
            let sign = if flip { -1.0 } else { 1.0 };
            let i = s.m;
            s.m += 1;
            for &(j, a) in &row.coeffs {
                if a != 0.0 {
                    s.cols[j].push((i, sign * a));
                }
            }
            let rel = match (row.rel, flip) {
                (Relation::Le, true) => Relation::Ge,
                (Relation::Ge, true) => Relation::Le,
                (r, _) => r,
            };
            s.b.push(sign * row.rhs);
            s.flipped.push(flip);
            s.rels.push(row.rel);
            match rel {
                Relation::Le => {
                    let c = s.push_col(Kind::Slack(i), vec![(i, 1.0)], 0.0);
                    s.basis.push(c);
                }
                Relation::Ge => {
                    s.push_col(Kind::Slack(i), vec![(i, -1.0)], 0.0);
                    let c = s.push_col(Kind::Artificial(i), vec![(i, 1.0)], 0.0);
                    s.basis.push(c);
                    s.feasible = false;
                }
                Relation::Eq => {
                    let c = s.push_col(Kind::Artificial(i), vec![(i, 1.0)], 0.0);
                    s.basis.push(c);
                    s.feasible = false;
                }
            }
        }
        for (i, &c) in s.basis.iter().enumerate() {
            s.in_basis[c] = Some(i);
        }
        let m = s.m;
        s.binv = vec![0.0; m * m];
        for i in 0..m {
            s.binv[i * m + i] = 1.0;
        }
        s.xb = s.b.clone();
        s
    }

    fn push_col(&mut self, kind: Kind, col: Vec<(usize, f64)>, cost: f64) -> usize {
        self.cols.push(col);
        self.kinds.push(kind);
        self.cost.push(cost);
        self.in_basis.push(None);
        self.cols.len() - 1
    }

    pub fn num_rows(&self) -> usize {
        self.m
    }

    pub fn num_structural(&self) -> usize {
        self.structural.len()
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Adds a structural variable at zero; the current basis stays feasible.
    pub fn add_column(&mut self, cost: f64, coeffs: &[(usize, f64)]) -> usize {
        let col = coeffs
            .iter()
            .filter(|(_, a)| *a != 0.0)
            .map(|&(i, a)| (i, if self.flipped[i] { -a } else { a }))
            .collect();
        let cost = if self.sense == Sense::Maximize { cost } else { -cost };
        let j = self.structural.len();
        let c = self.push_col(Kind::Structural(j), col, cost);
        self.structural.push(c);
        j
    }

    /// Adds `coeffs·x <= rhs`. The current point must satisfy it; its slack
    /// becomes basic.
    pub fn add_row_le(&mut self, coeffs: &[(usize, f64)], rhs: f64) -> Result<usize, LpError> {
        let x = self.structural_values();
        let act: f64 = coeffs.iter().map(|&(j, a)| a * x[j]).sum();
        let slack = rhs - act;
        if slack < -self.opts.feas_tol * (1.0 + rhs.abs()) {
            return Err(LpError::Numerical(format!("new row violated by {}", -slack)));
        }
        let i = self.m;
        let m = self.m;
        // row coefficients over the current basic columns
        let mut a_b = vec![0.0; m];
        for &(j, a) in coeffs {
            let c = self.structural[j];
            self.cols[c].push((i, a));
            if let Some(r) = self.in_basis[c] {
                a_b[r] += a;
            }
        }
        let mut binv = vec![0.0; (m + 1) * (m + 1)];
        for r in 0..m {
            binv[r * (m + 1)..r * (m + 1) + m].copy_from_slice(&self.binv[r * m..r * m + m]);
        }
        for c in 0..m {
            let mut v = 0.0;
            for r in 0..m {
                if a_b[r] != 0.0 {
                    v -= a_b[r] * self.binv[r * m + c];
                }
            }
            binv[m * (m + 1) + c] = v;
        }
        binv[m * (m + 1) + m] = 1.0;
        self.binv = binv;
        self.m += 1;
        self.b.push(rhs);
        self.flipped.push(false);
        self.rels.push(Relation::Le);
        let c = self.push_col(Kind::Slack(i), vec![(i, 1.0)], 0.0);
        self.basis.push(c);
        self.in_basis[c] = Some(i);
        self.xb.push(slack.max(0.0));
        Ok(i)
    }

    pub fn solve(&mut self) -> Result<(), LpError> {
        if !self.feasible {
            self.phase_one()?;
            self.feasible = true;
        }
        self.run(false)
    }

    fn phase_one(&mut self) -> Result<(), LpError> {
        let saved = self.cost.clone();
        for (c, k) in self.kinds.iter().enumerate() {
            self.cost[c] = if matches!(k, Kind::Artificial(_)) { -1.0 } else { 0.0 };
        }
        let r = self.run(true);
        self.cost = saved;
        r?;
        let infeas: f64 = self
            .basis
            .iter()
            .zip(&self.xb)
            .filter(|(&c, _)| matches!(self.kinds[c], Kind::Artificial(_)))
            .map(|(_, &x)| x)
            .sum();
        let scale = 1.0 + self.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        if infeas > self.opts.feas_tol.max(1e-8) * scale {
            return Err(LpError::Infeasible);
        }
        // pivot zero-level artificials out where possible
        for r in 0..self.m {
            if !matches!(self.kinds[self.basis[r]], Kind::Artificial(_)) {
                continue;
            }
            let m = self.m;
            let mut best: Option<(usize, f64)> = None;
            for c in 0..self.cols.len() {
                if self.in_basis[c].is_some() || matches!(self.kinds[c], Kind::Artificial(_)) {
                    continue;
                }
                let v: f64 = self.cols[c].iter().map(|&(i, a)| self.binv[r * m + i] * a).sum();
                if v.abs() > 1e-7 && best.is_none_or(|(_, bv)| v.abs() > bv) {
                    best = Some((c, v.abs()));
                }
            }
            if let Some((c, _)) = best {
                let w = self.ftran(c);
                self.pivot(r, c, &w, 0.0);
            }
        }
        Ok(())
    }

    fn ftran(&self, c: usize) -> Vec<f64> {
        let m = self.m;
        let mut w = vec![0.0; m];
        for &(i, a) in &self.cols[c] {
            for (r, wr) in w.iter_mut().enumerate() {
                *wr += self.binv[r * m + i] * a;
            }
        }
        w
    }

    fn duals_internal(&self) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = self.cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.binv[r * m..(r + 1) * m];
                for (yi, &v) in y.iter_mut().zip(row) {
                    *yi += cb * v;
                }
            }
        }
        y
    }

    fn reduced_cost(&self, c: usize, y: &[f64]) -> f64 {
        self.cost[c] - self.cols[c].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
    }

    fn run(&mut self, phase_one: bool) -> Result<(), LpError> {
        let mut degenerate = 0usize;
        let mut bland = false;
        let cost_scale = 1.0 + self.cost.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        loop {
            if self.iterations >= self.opts.max_iter {
                return Err(LpError::IterationLimit(self.iterations));
            }
            let y = self.duals_internal();
            let tol = self.opts.opt_tol * cost_scale;
            let mut enter: Option<(usize, f64)> = None;
            for c in 0..self.cols.len() {
                if self.in_basis[c].is_some() {
                    continue;
                }
                if !phase_one && matches!(self.kinds[c], Kind::Artificial(_)) {
                    continue;
                }
                let d = self.reduced_cost(c, &y);
                if d > tol {
                    if bland {
                        enter = Some((c, d));
                        break;
                    }
                    if enter.is_none_or(|(_, bd)| d > bd) {
                        enter = Some((c, d));
                    }
                }
            }
            let Some((q, _)) = enter else {
                return Ok(());
            };
            let w = self.ftran(q);
            let Some(r) = self.ratio_test(&w, bland) else {
                if phase_one {
                    return Err(LpError::Numerical("unbounded phase one".into()));
                }
                return Err(LpError::Unbounded);
            };
            let theta = (self.xb[r] / w[r]).max(0.0);
            if theta <= 1e-12 {
                degenerate += 1;
                if degenerate >= self.opts.degenerate_switch {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
            self.pivot(r, q, &w, theta);
            self.iterations += 1;
            self.since_refactor += 1;
            if self.since_refactor >= 100 || (self.since_refactor.is_multiple_of(20) && self.residual() > 1e-9) {
                self.refactor()?;
            }
        }
    }

    fn ratio_test(&self, w: &[f64], bland: bool) -> Option<usize> {
        let ptol = self.opts.pivot_tol;
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if w[r] > ptol {
                    let t = self.xb[r].max(0.0) / w[r];
                    match best {
                        None => best = Some((r, t)),
                        Some((br, bt)) => {
                            if t < bt - 1e-12 || (t <= bt + 1e-12 && self.basis[r] < self.basis[br]) {
                                best = Some((r, t));
                            }
                        }
                    }
                }
            }
            return best.map(|(r, _)| r);
        }
        let ftol = self.opts.feas_tol;
        let mut bound = f64::INFINITY;
        for r in 0..self.m {
            if w[r] > ptol {
                bound = bound.min((self.xb[r].max(0.0) + ftol) / w[r]);
            }
        }
        if !bound.is_finite() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for r in 0..self.m {
            if w[r] > ptol && self.xb[r].max(0.0) / w[r] <= bound && best.is_none_or(|(_, bw)| w[r] > bw) {
                best = Some((r, w[r]));
            }
        }
        best.map(|(r, _)| r)
    }

    fn pivot(&mut self, r: usize, q: usize, w: &[f64], theta: f64) {
        let m = self.m;
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * w[i];
                if self.xb[i] < 0.0 {
                    self.xb[i] = if self.xb[i] > -1e-7 { 0.0 } else { self.xb[i] };
                }
            }
        }
        self.xb[r] = theta;
        let wr = w[r];
        let (before, rest) = self.binv.split_at_mut(r * m);
        let (prow, after) = rest.split_at_mut(m);
        for v in prow.iter_mut() {
            *v /= wr;
        }
        for (i, row) in before.chunks_mut(m).chain(after.chunks_mut(m)).enumerate() {
            let i = if i < r { i } else { i + 1 };
            let f = w[i];
            if f != 0.0 {
                for (v, &p) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * p;
                }
            }
        }
        let old = self.basis[r];
        self.in_basis[old] = None;
        self.basis[r] = q;
        self.in_basis[q] = Some(r);
    }

    fn residual(&self) -> f64 {
        let mut res = self.b.clone();
        for (r, &c) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[c] {
                res[i] -= a * self.xb[r];
            }
        }
        let scale = 1.0 + self.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
        res.iter().fold(0.0f64, |a, &v| a.max(v.abs())) / scale
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for (r, &c) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[c] {
                a[i * m + r] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for col in 0..m {
            let p = (col..m)
                .max_by(|&x, &y| a[x * m + col].abs().total_cmp(&a[y * m + col].abs()))
                .unwrap();
            if a[p * m + col].abs() < 1e-13 {
                return Err(LpError::Numerical("singular basis".into()));
            }
            if p != col {
                for k in 0..m {
                    a.swap(p * m + k, col * m + k);
                    inv.swap(p * m + k, col * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] /= d;
                inv[col * m + k] /= d;
            }
            for i in 0..m {
                if i != col {
                    let f = a[i * m + col];
                    if f != 0.0 {
                        for k in 0..m {
                            a[i * m + k] -= f * a[col * m + k];
                            inv[i * m + k] -= f * inv[col * m + k];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        for r in 0..m {
            let v: f64 = (0..m).map(|i| self.binv[r * m + i] * self.b[i]).sum();
            self.xb[r] = if v < 0.0 && v > -1e-7 { 0.0 } else { v };
        }
        self.since_refactor = 0;
        Ok(())
    }

    pub fn structural_values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.structural.len()];
        for (r, &c) in self.basis.iter().enumerate() {
            if let Kind::Structural(j) = self.kinds[c] {
                x[j] = self.xb[r].max(0.0);
            }
        }
        x
    }

    /// Duals in the original orientation and sense.
    pub fn duals(&self) -> Vec<f64> {
        let y = self.duals_internal();
        y.iter()
            .enumerate()
            .map(|(i, &v)| {
                let v = if self.flipped[i] { -v } else { v };
                if self.sense == Sense::Maximize {
                    v
                } else {
                    -v
                }
            })
            .collect()
    }

    pub fn objective(&self) -> f64 {
        let v: f64 = self.basis.iter().zip(&self.xb).map(|(&c, &x)| self.cost[c] * x).sum();
        if self.sense == Sense::Maximize {
            v
        } else {
            -v
        }
    }

    pub fn basis(&self) -> Vec<BasisVar> {
        self.basis
            .iter()
            .map(|&c| match self.kinds[c] {
                Kind::Structural(j) => BasisVar::Structural(j),
                Kind::Slack(i) => BasisVar::Slack(i),
                Kind::Artificial(i) => BasisVar::Artificial(i),
            })
            .collect()
    }

    pub fn solution(&self) -> LpSolution {
        LpSolution {
            objective: self.objective(),
            x: self.structural_values(),
            duals: self.duals(),
            basis: self.basis(),
            iterations: self.iterations,
        }
    }
}

/// A program with exact coefficients, for re-solving a float basis.
#[derive(Debug, Clone)]
pub struct RationalProgram {
    pub num_vars: usize,
    pub rows: Vec<(Vec<(usize, Rational)>, Relation, Rational)>,
}

/// Solves the basis system of `basis` exactly. Returns the structural values
/// when the basic solution is nonnegative, has zero artificials and satisfies
/// every row exactly.
pub fn exact_vertex(lp: &RationalProgram, basis: &[BasisVar]) -> Option<Vec<Rational>> {
    let m = lp.rows.len();
    if basis.len() != m {
        return None;
    }
    // dense m x (m+1) augmented system: rows are constraints, unknowns basics
    let mut a = vec![vec![Rational::zero(); m + 1]; m];
    for (i, (coeffs, rel, rhs)) in lp.rows.iter().enumerate() {
        a[i][m] = rhs.clone();
        for (k, bv) in basis.iter().enumerate() {
            match *bv {
                BasisVar::Structural(j) => {
                    for (jj, v) in coeffs {
                        if *jj == j {
                            a[i][k] += v;
                        }
                    }
                }
                BasisVar::Slack(s) if s == i => {
                    a[i][k] = match rel {
                        Relation::Le => Rational::from_integer(1.into()),
                        Relation::Ge => Rational::from_integer((-1).into()),
                        Relation::Eq => return None,
                    };
                }
                BasisVar::Artificial(s) if s == i => {
                    a[i][k] = Rational::from_integer(1.into());
                }
                _ => {}
            }
        }
    }
    for col in 0..m {
        let p = (col..m).find(|&r| !a[r][col].is_zero())?;
        a.swap(p, col);
        let d = a[col][col].clone();
        for v in a[col].iter_mut() {
            *v /= &d;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != col && !row[col].is_zero() {
                let f = row[col].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
    }
    let mut x = vec![Rational::zero(); lp.num_vars];
    for (k, bv) in basis.iter().enumerate() {
        let v = a[k][m].clone();
        if v.is_negative() {
            return None;
        }
        match *bv {
            BasisVar::Structural(j) => x[j] = v,
            BasisVar::Artificial(_) if !v.is_zero() => return None,
            _ => {}
        }
    }
    for (coeffs, rel, rhs) in &lp.rows {
        let act: Rational = coeffs.iter().map(|(j, v)| v * &x[*j]).sum();
        let ok = match rel {
            Relation::Le => &act <= rhs,
            Relation::Ge => &act >= rhs,
            Relation::Eq => &act == rhs,
        };
        if !ok {
            return None;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-7 * (1.0 + b.abs())
    }

    #[test]
    fn textbook_max() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(Sense::Maximize, 2);
        lp.objective = vec![3.0, 5.0];
        lp.add_row(vec![(0, 1.0)], Relation::Le, 4.0);
        lp.add_row(vec![(1, 2.0)], Relation::Le, 12.0);
        lp.add_row(vec![(0, 3.0), (1, 2.0)], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, 36.0));
        assert!(close(s.x[0], 2.0) && close(s.x[1], 6.0));
        let dual_obj: f64 = s.duals.iter().zip([4.0, 12.0, 18.0]).map(|(y, b)| y * b).sum();
        assert!(close(dual_obj, 36.0));
    }

    #[test]
    fn min_with_ge_and_eq() {
        // min x + 2y, x + y >= 3, x - y = 1 -> x=2, y=1, obj 4
        let mut lp = LinearProgram::new(Sense::Minimize, 2);
        lp.objective = vec![1.0, 2.0];
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Ge, 3.0);
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Relation::Eq, 1.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, 4.0));
        let dual_obj = s.duals[0] * 3.0 + s.duals[1] * 1.0;
        assert!(close(dual_obj, 4.0));
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize, 1);
        lp.add_row(vec![(0, 1.0)], Relation::Le, 1.0);
        lp.add_row(vec![(0, 1.0)], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::new(Sense::Maximize, 2);
        lp.objective = vec![1.0, 0.0];
        lp.add_row(vec![(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // max -x, -x <= -2  -> x = 2
        let mut lp = LinearProgram::new(Sense::Maximize, 1);
        lp.objective = vec![-1.0];
        lp.add_row(vec![(0, -1.0)], Relation::Le, -2.0);
        let s = lp.solve().unwrap();
        assert!(close(s.x[0], 2.0));
        assert!(close(s.duals[0] * -2.0, -2.0));
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example cycles under naive Dantzig pricing.
        let mut lp = LinearProgram::new(Sense::Maximize, 4);
        lp.objective = vec![0.75, -150.0, 0.02, -6.0];
        lp.add_row(vec![(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Relation::Le, 0.0);
        lp.add_row(vec![(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Relation::Le, 0.0);
        lp.add_row(vec![(2, 1.0)], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!(close(s.objective, 0.05));
    }

    #[test]
    fn incremental_columns_and_rows() {
        let mut lp = LinearProgram::new(Sense::Maximize, 1);
        lp.objective = vec![1.0];
        lp.add_row(vec![(0, 1.0)], Relation::Le, 5.0);
        let mut s = Simplex::from_lp(&lp, Options::default());
        s.solve().unwrap();
        assert!(close(s.objective(), 5.0));
        s.add_row_le(&[(0, 1.0)], 7.0).unwrap();
        let y = s.add_column(2.0, &[(1, 1.0)]);
        s.solve().unwrap();
        // max x + 2y with x <= 5, x + y <= 7
        assert!(close(s.objective(), 14.0));
        assert!(close(s.structural_values()[y], 7.0));
        let d = s.duals();
        assert!(close(d[0] * 5.0 + d[1] * 7.0, 14.0));
    }

    #[test]
    fn exact_vertex_recovers_rationals() {
        // x + y = 1, x - 2y = 0 -> x = 2/3, y = 1/3
        let mut lp = LinearProgram::new(Sense::Minimize, 2);
        lp.add_row(vec![(0, 1.0), (1, 1.0)], Relation::Eq, 1.0);
        lp.add_row(vec![(0, 1.0), (1, -2.0)], Relation::Eq, 0.0);
        let s = lp.solve().unwrap();
        let rp = RationalProgram {
            num_vars: 2,
            rows: vec![
                (vec![(0, int(1)), (1, int(1))], Relation::Eq, int(1)),
                (vec![(0, int(1)), (1, int(-2))], Relation::Eq, int(0)),
            ],
        };
        let x = exact_vertex(&rp, &s.basis).unwrap();
        assert_eq!(x, vec![crate::rational::ratio(2, 3), crate::rational::ratio(1, 3)]);
    }
}
