//! Minimum entropy, maximum divergence, and their smoothed versions.
//!
//! Smoothing only ever lowers entries (`P̃ ≤ P`). For min-entropy the distance
//! to a subnormalized witness is the half-L1 formula, so a budget of `ε`
//! removes `2ε` of mass. For max-divergence the constraint is the mass
//! condition `Σ P̃ ≥ 1 − ε` directly.

use crate::error::{param, Error, Result};
use crate::hyptest::types::class_masses;
use crate::hyptest::ScanRow;
use crate::numeric::{log2_sum, ser_f64};
use crate::prob::{divergence, Divergence, JointDist, MassFunction, SubDist, DEFAULT_CAP};
use rayon::prelude::*;
use serde::Serialize;

pub const DMAX_HEADER: &str = "n,dmax_eps_over_n,kl_limit";

#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingResult {
    pub value: f64,
    pub witness: SubDist,
    pub removed_mass: f64,
}

/// Serializable view without the witness.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothingSummary {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    pub removed_mass: f64,
    pub witness_pmf: Vec<f64>,
}

impl SmoothingResult {
    pub fn summary(&self) -> SmoothingSummary {
        SmoothingSummary {
            value: self.value,
            removed_mass: self.removed_mass,
            witness_pmf: self.witness.pmf().to_vec(),
        }
    }
}

/// `−log max_x P(x)`.
pub fn h_min(p: &impl MassFunction) -> Result<f64> {
    let m = p.pmf().iter().copied().fold(0.0, f64::max);
    if m == 0.0 {
        return Err(Error::ZeroMass);
    }
    Ok(-m.log2())
}

/// `−log Σ_y max_x P(x,y)`: conditional min-entropy optimized over `Q_Y`.
pub fn h_min_cond(j: &JointDist, x: &[&str], y: &[&str]) -> Result<f64> {
    if x.is_empty() {
        return Err(param("h_min_cond needs at least one x variable"));
    }
    let mut all: Vec<&str> = x.iter().chain(y).copied().collect();
    all.sort_unstable();
    let mut names = j.var_names();
    names.sort_unstable();
    if all != names {
        return Err(param("x and y variables must partition the distribution's variables"));
    }
    if y.is_empty() {
        return h_min(j);
    }
    let g = j.project(&[("x", x.to_vec()), ("y", y.to_vec())])?;
    let (nx, ny) = (g.vars()[0].size(), g.vars()[1].size());
    let pm = g.pmf();
    let s: f64 = (0..ny).map(|b| (0..nx).map(|a| pm[a * ny + b]).fold(0.0, f64::max)).sum();
    Ok(-s.log2())
}

/// Cap `λ` with `Σ max(P − λ, 0) = removed`, by an exact piecewise-linear solve.
pub fn water_level(p: &[f64], removed: f64) -> f64 {
    let mut sorted: Vec<f64> = p.iter().copied().filter(|&x| x > 0.0).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut prefix = 0.0;
    for k in 0..sorted.len() {
        prefix += sorted[k];
        let lambda = (prefix - removed) / (k + 1) as f64;
        let next = sorted.get(k + 1).copied().unwrap_or(0.0);
        if lambda >= next {
            return lambda.min(sorted[k]);
        }
    }
    0.0
}

/// `H_min^ε(P)` by water-filling; requires `0 ≤ ε < 1/2`.
pub fn h_min_smooth(p: &JointDist, eps: f64) -> Result<SmoothingResult> {
    if !(0.0..0.5).contains(&eps) {
        return Err(param(format!("smoothing parameter must lie in [0, 1/2), got {eps}")));
    }
    let pm = p.pmf();
    let lambda = water_level(pm, 2.0 * eps);
    let witness: Vec<f64> = pm.iter().map(|&x| x.min(lambda)).collect();
    let removed = pm.iter().sum::<f64>() - witness.iter().sum::<f64>();
    Ok(SmoothingResult {
        value: -lambda.log2(),
        witness: SubDist::new(p.vars().to_vec(), witness)?,
        removed_mass: removed,
    })
}

/// `max_x log P(x)/Q(x)` with `log(0/0) = 0`.
pub fn d_max(p: &JointDist, q: &JointDist) -> Result<f64> {
    if p.shape().sizes() != q.shape().sizes() {
        return Err(Error::ShapeMismatch("D_max needs a common alphabet".into()));
    }
    Ok(d_max_raw(p.pmf(), q.pmf()))
}

pub(crate) fn d_max_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for (&a, &b) in p.iter().zip(q) {
        let r = match (a > 0.0, b > 0.0) {
            (false, false) => 0.0,
            (false, true) => continue,
            (true, false) => return f64::INFINITY,
            (true, true) => a.log2() - b.log2(),
        };
        m = m.max(r);
    }
    m
}

/// Smallest ratio cap `t` with `Σ min(P, Q t) ≥ target`, or `None` when the
/// mass on `Q = 0` makes the target unreachable.
fn cap_ratio(p: &[f64], q: &[f64], target: f64) -> Option<f64> {
    let mut cells: Vec<(f64, f64, f64)> = p
        .iter()
        .zip(q)
        .filter(|&(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| (a / b, a, b))
        .collect();
    let reachable: f64 = cells.iter().map(|c| c.1).sum();
    if reachable < target {
        return None;
    }
    cells.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut below = 0.0; // P-mass of cells already under the cap
    let mut above: f64 = cells.iter().map(|c| c.2).sum(); // Q-mass of capped cells
    for k in 0..cells.len() {
        let t = (target - below) / above;
        if t <= cells[k].0 {
            return Some(t.max(0.0));
        }
        below += cells[k].1;
        above -= cells[k].2;
    }
    cells.last().map(|c| c.0)
}

/// `D_max^ε(P‖Q)` for `0 < ε < 1`; `+∞` when more than `ε` of `P` sits where `Q = 0`.
pub fn d_max_smooth(p: &JointDist, q: &JointDist, eps: f64) -> Result<SmoothingResult> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("smoothing parameter must lie in (0, 1), got {eps}")));
    }
    if p.shape().sizes() != q.shape().sizes() {
        return Err(Error::ShapeMismatch("D_max needs a common alphabet".into()));
    }
    let (pm, qm) = (p.pmf(), q.pmf());
    let total: f64 = pm.iter().sum();
    let target = total - eps;
    let (value, witness) = match cap_ratio(pm, qm, target) {
        Some(t) => (t.log2(), pm.iter().zip(qm).map(|(&a, &b)| a.min(b * t)).collect::<Vec<_>>()),
        None => (f64::INFINITY, pm.iter().zip(qm).map(|(&a, &b)| if b > 0.0 { a } else { 0.0 }).collect()),
    };
    let removed = total - witness.iter().sum::<f64>();
    Ok(SmoothingResult { value, witness: SubDist::new(p.vars().to_vec(), witness)?, removed_mass: removed })
}

/// `D_max^ε(Pⁿ‖Qⁿ)` via type classes, in the log domain.
pub fn d_max_smooth_iid(p: &JointDist, q: &JointDist, n: u64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(param(format!("smoothing parameter must lie in (0, 1), got {eps}")));
    }
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    if p.shape().sizes() != q.shape().sizes() {
        return Err(Error::ShapeMismatch("D_max needs a common alphabet".into()));
    }
    let mut classes: Vec<_> = class_masses(p.pmf(), q.pmf(), n, DEFAULT_CAP)?
        .into_iter()
        .filter(|c| c.log2_p > f64::NEG_INFINITY)
        .collect();
    let infinite: f64 = classes.iter().filter(|c| c.log2_q == f64::NEG_INFINITY).map(|c| c.log2_p.exp2()).sum();
    if infinite > eps {
        return Ok(f64::INFINITY);
    }
    classes.retain(|c| c.log2_q > f64::NEG_INFINITY);
    classes.sort_by(|a, b| a.log2_ratio().total_cmp(&b.log2_ratio()).then(a.index.cmp(&b.index)));
    let target = 1.0 - eps;
    // suffix[k] = log2 Σ_{i ≥ k} Q-mass of class i
    let mut suffix = vec![f64::NEG_INFINITY; classes.len() + 1];
    for k in (0..classes.len()).rev() {
        suffix[k] = log2_sum([suffix[k + 1], classes[k].log2_q]);
    }
    let mut below = 0.0;
    for (k, c) in classes.iter().enumerate() {
        let need = target - below;
        if need <= 0.0 {
            return Ok(classes[k.saturating_sub(1)].log2_ratio());
        }
        let lambda = need.log2() - suffix[k];
        if lambda <= c.log2_ratio() {
            return Ok(lambda);
        }
        below += c.log2_p.exp2();
    }
    Ok(classes.last().map_or(f64::NEG_INFINITY, |c| c.log2_ratio()))
}

/// `(n, (1/n) D_max^ε(Pⁿ‖Qⁿ))` for each `n`, with the KL limit alongside.
pub fn dmax_convergence_scan(p: &JointDist, q: &JointDist, eps: f64, ns: &[u64]) -> Result<Vec<ScanRow>> {
    let limit = divergence(p, q, Divergence::Kl)?;
    ns.par_iter()
        .map(|&n| Ok(ScanRow { n, value: d_max_smooth_iid(p, q, n, eps)? / n as f64, limit }))
        .collect()
}
