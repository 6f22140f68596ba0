//! Optimal type-II error of binary hypothesis tests and related bounds.

pub mod types;

use crate::error::{param, Error, Result};
use crate::numeric::{log2_sum, ser_f64};
use crate::prob::{divergence, Divergence, JointDist, MassFunction, DEFAULT_CAP};
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

/// Optimal type-II error together with the randomized threshold test attaining it.
///
/// The test accepts the null (`P`) fully on `order[..threshold]` and with
/// probability `gamma` on `order[threshold]`. For IID certificates the entries
/// of `order` index type classes rather than outcomes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaCertificate {
    #[serde(serialize_with = "ser_f64")]
    pub beta: f64,
    #[serde(serialize_with = "ser_f64")]
    pub log2_beta: f64,
    pub epsilon: f64,
    pub order: Vec<usize>,
    pub threshold: usize,
    pub gamma: f64,
    pub type1_mass: f64,
}

impl BetaCertificate {
    /// `−log2 β`.
    pub fn neg_log2(&self) -> f64 {
        -self.log2_beta
    }

    /// Acceptance weights `T(0|x)` over `len` outcomes.
    pub fn test(&self, len: usize) -> Vec<f64> {
        let mut t = vec![0.0; len];
        for &i in &self.order[..self.threshold] {
            t[i] = 1.0;
        }
        if let Some(&i) = self.order.get(self.threshold) {
            t[i] = self.gamma;
        }
        t
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eps) {
        return Err(param(format!("ε must lie in [0,1), got {eps}")));
    }
    Ok(())
}

fn ratio_order(a: (f64, f64), b: (f64, f64)) -> Ordering {
    // (p, q) pairs; descending by p/q with p>0,q=0 first and p=0 last.
    let key = |(p, q): (f64, f64)| {
        if p == 0.0 {
            f64::NEG_INFINITY
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p.log2() - q.log2()
        }
    };
    key(b).total_cmp(&key(a))
}

/// Exact `β_ε(P, Q)` by the Neyman–Pearson construction.
pub fn beta_epsilon(p: &JointDist, q: &JointDist, eps: f64) -> Result<BetaCertificate> {
    if p.shape().sizes() != q.shape().sizes() {
        return Err(Error::ShapeMismatch("β needs P and Q over the same alphabet".into()));
    }
    beta_raw(p.pmf(), q.pmf(), eps)
}

/// [`beta_epsilon`] on flat mass vectors.
pub fn beta_raw(p: &[f64], q: &[f64], eps: f64) -> Result<BetaCertificate> {
    check_eps(eps)?;
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", p.len(), q.len())));
    }
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| ratio_order((p[a], q[a]), (p[b], q[b])).then(a.cmp(&b)));
    let total: f64 = p.iter().sum();
    let target = (1.0 - eps).min(total);
    let mut acc = 0.0;
    let mut beta = 0.0;
    let mut threshold = 0;
    let mut gamma = 0.0;
    for &i in &order {
        if acc >= target || p[i] == 0.0 {
            break;
        }
        if acc + p[i] <= target {
            acc += p[i];
            beta += q[i];
            threshold += 1;
        } else {
            gamma = (target - acc) / p[i];
            beta += gamma * q[i];
            acc = target;
            break;
        }
    }
    Ok(BetaCertificate {
        beta,
        log2_beta: beta.log2(),
        epsilon: eps,
        order,
        threshold,
        gamma,
        type1_mass: acc,
    })
}

/// Exact `β_ε(Pⁿ, Qⁿ)` by type-class aggregation, entirely in the log domain.
/// Multi-variable inputs are treated as one variable over their joint alphabet.
pub fn beta_epsilon_iid(p: &JointDist, q: &JointDist, n: u64, eps: f64) -> Result<BetaCertificate> {
    beta_epsilon_iid_capped(p, q, n, eps, DEFAULT_CAP)
}

pub fn beta_epsilon_iid_capped(p: &JointDist, q: &JointDist, n: u64, eps: f64, cap: usize) -> Result<BetaCertificate> {
    check_eps(eps)?;
    if n == 0 {
        return Err(param("n must be at least 1"));
    }
    if p.shape().sizes() != q.shape().sizes() {
        return Err(Error::ShapeMismatch("β needs P and Q over the same alphabet".into()));
    }
    let mut classes = types::class_masses(p.pmf(), q.pmf(), n, cap)?;
    classes.sort_by(|a, b| b.log2_ratio().total_cmp(&a.log2_ratio()).then(a.index.cmp(&b.index)));
    let pmass: Vec<f64> = classes.iter().map(|c| c.log2_p.exp2()).collect();
    let total: f64 = pmass.iter().sum();
    let target = (1.0 - eps).min(total);
    let mut acc = 0.0;
    let mut terms = Vec::new();
    let mut threshold = 0;
    let mut gamma = 0.0;
    for (c, &pm) in classes.iter().zip(&pmass) {
        if acc >= target || c.log2_p == f64::NEG_INFINITY {
            break;
        }
        if acc + pm <= target {
            acc += pm;
            terms.push(c.log2_q);
            threshold += 1;
        } else {
            gamma = (target - acc) / pm;
            terms.push(gamma.log2() + c.log2_q);
            acc = target;
            break;
        }
    }
    let log2_beta = log2_sum(terms);
    Ok(BetaCertificate {
        beta: log2_beta.exp2(),
        log2_beta,
        epsilon: eps,
        order: classes.iter().map(|c| c.index).collect(),
        threshold,
        gamma,
        type1_mass: acc,
    })
}

/// Outcome of [`np_tail_bound`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    /// Minimizing grid point, absent when the whole grid is infeasible.
    pub gamma: Option<f64>,
    pub infeasible: bool,
}

/// Distinct finite log-ratios on `supp(P)` plus midpoints of consecutive values.
pub fn default_gamma_grid(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = p
        .iter()
        .zip(q)
        .filter(|&(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(a, b)| a.log2() - b.log2())
        .collect();
    r.sort_by(f64::total_cmp);
    r.dedup();
    let mut grid = r.clone();
    grid.extend(r.windows(2).map(|w| 0.5 * (w[0] + w[1])));
    grid.sort_by(f64::total_cmp);
    grid
}

/// `min_γ γ − log(Pr_P[log P/Q ≤ γ] − ε)`; upper bound on `−log β_ε(P,Q)`.
pub fn np_tail_bound(p: &JointDist, q: &JointDist, eps: f64, grid: Option<&[f64]>) -> Result<TailBound> {
    check_eps(eps)?;
    if p.shape().sizes() != q.shape().sizes() {
        return Err(Error::ShapeMismatch("bound needs P and Q over the same alphabet".into()));
    }
    let (pp, qq) = (p.pmf(), q.pmf());
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = default_gamma_grid(pp, qq);
            &owned
        }
    };
    if grid.is_empty() {
        return Err(param("γ-grid must be nonempty"));
    }
    let ratios: Vec<(f64, f64)> = pp
        .iter()
        .zip(qq)
        .filter(|&(&a, _)| a > 0.0)
        .map(|(&a, &b)| (a, if b == 0.0 { f64::INFINITY } else { a.log2() - b.log2() }))
        .collect();
    let mut best = TailBound { value: f64::INFINITY, gamma: None, infeasible: true };
    for &g in grid {
        let tail: f64 = ratios.iter().filter(|&&(_, r)| r <= g).map(|&(a, _)| a).sum();
        let arg = tail - eps;
        if arg <= 0.0 {
            continue;
        }
        let v = g - arg.log2();
        if v < best.value {
            best = TailBound { value: v, gamma: Some(g), infeasible: false };
        }
    }
    Ok(best)
}

/// `D_α(P‖Q) + log(1−ε−ε′)/(1−α) − log ε′`; upper bound on `−log β_ε(P,Q)`.
pub fn renyi_beta_bound(p: &JointDist, q: &JointDist, eps: f64, eps2: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) {
        return Err(param(format!("α must exceed 1, got {alpha}")));
    }
    if !(eps2 > 0.0) || !(eps >= 0.0) || !(eps + eps2 < 1.0) {
        return Err(param(format!("need ε ≥ 0, ε′ > 0 and ε + ε′ < 1, got ε={eps}, ε′={eps2}")));
    }
    let d = divergence(p, q, Divergence::Renyi(alpha))?;
    Ok(d + (1.0 - eps - eps2).log2() / (1.0 - alpha) - eps2.log2())
}

/// One row of an IID convergence scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub n: u64,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64")]
    pub limit: f64,
}

pub fn scan_csv(header: &str, rows: &[ScanRow]) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.n, r.value, r.limit));
    }
    s
}

pub const STEIN_HEADER: &str = "n,neg_log_beta_over_n,kl_limit";

/// `(n, −(1/n) log β_ε(Pⁿ, Qⁿ))` for each `n`, with the KL limit alongside.
pub fn stein_scan(p: &JointDist, q: &JointDist, eps: f64, ns: &[u64]) -> Result<Vec<ScanRow>> {
    let limit = divergence(p, q, Divergence::Kl)?;
    ns.par_iter()
        .map(|&n| {
            let c = beta_epsilon_iid(p, q, n, eps)?;
            Ok(ScanRow { n, value: c.neg_log2() / n as f64, limit })
        })
        .collect()
}
