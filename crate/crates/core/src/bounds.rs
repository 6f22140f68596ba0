//! Converse bounds and necessary conditions assembled from hypothesis-testing,
//! smoothing and structural quantities. All values are in bits.

use crate::error::{param, Error, Result};
use crate::hyptest::beta_epsilon;
use crate::numeric::{ser_f64, ser_f64_map};
use crate::prob::{
    conditional_mutual_information, divergence, entropy, Channel, Divergence, JointDist, MassFunction, Var,
};
use crate::smooth::{d_max, d_max_smooth, h_min_smooth};
use crate::structure::{enum_partitions, mcf, mss, Partition, MSS_TOL};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;

/// Tolerance of the factorization test applied to user-supplied `Q`.
pub const FACTOR_TOL: f64 = 1e-9;

/// A bound value together with everything needed to recompute it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub kind: String,
    #[serde(serialize_with = "ser_f64")]
    pub value: f64,
    #[serde(serialize_with = "ser_f64_map")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(serialize_with = "ser_f64_map")]
    pub intermediates: BTreeMap<String, f64>,
}

impl BoundReport {
    fn new(kind: &str, value: f64) -> Self {
        Self {
            kind: kind.to_string(),
            value,
            params: BTreeMap::new(),
            partition: None,
            intermediates: BTreeMap::new(),
        }
    }

    fn param(mut self, k: &str, v: f64) -> Self {
        self.params.insert(k.to_string(), v);
        self
    }

    fn mid(mut self, k: &str, v: f64) -> Self {
        self.intermediates.insert(k.to_string(), v);
        self
    }

    pub fn intermediate(&self, k: &str) -> Option<f64> {
        self.intermediates.get(k).copied()
    }
}

/// Verdict of a necessary condition: `pass` iff `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub kind: String,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub lhs: f64,
    #[serde(serialize_with = "ser_f64")]
    pub rhs: f64,
    #[serde(serialize_with = "ser_f64")]
    pub slack: f64,
    #[serde(serialize_with = "ser_f64_map")]
    pub params: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    #[serde(serialize_with = "ser_f64_map")]
    pub intermediates: BTreeMap<String, f64>,
}

fn log_inv(x: f64) -> f64 {
    -x.log2()
}

fn nonneg(name: &str, v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(param(format!("{name} must be nonnegative, got {v}")));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(param(format!("{name} must be positive, got {v}")));
    }
    Ok(())
}

/// `(1/(|π|−1)) [−log β + |π| log(1/η)]`.
pub fn cit_formula(neg_log_beta: f64, blocks: usize, eta: f64) -> f64 {
    let k = blocks as f64;
    (neg_log_beta + k * log_inv(eta)) / (k - 1.0)
}

/// Conditional independence testing bound for one partition. `z` names the
/// eavesdropper's variables (empty for none); `q` replaces the default
/// conditional product and must factorize across `pi` given `z`.
pub fn cit_bound(j: &JointDist, pi: &Partition, z: &[&str], eps: f64, eta: f64, q: Option<&JointDist>) -> Result<BoundReport> {
    nonneg("ε", eps)?;
    positive("η", eta)?;
    if eps + eta >= 1.0 {
        return Err(param(format!("need η < 1 − ε, got ε={eps}, η={eta}")));
    }
    let qpi = match q {
        None => j.conditional_product(pi, z)?,
        Some(q) => {
            if q.vars() != j.vars() {
                return Err(Error::ShapeMismatch("Q must share the variables of P".into()));
            }
            let gap = q.factorization_gap(pi, z)?;
            if gap > FACTOR_TOL {
                return Err(Error::NotFactorized(gap));
            }
            q.clone()
        }
    };
    let cert = beta_epsilon(j, &qpi, eps + eta)?;
    let nlb = cert.neg_log2();
    let mut r = BoundReport::new("cit", cit_formula(nlb, pi.len(), eta))
        .param("epsilon", eps)
        .param("eta", eta)
        .mid("beta", cert.beta)
        .mid("neg_log2_beta", nlb)
        .mid("blocks", pi.len() as f64);
    r.partition = Some(pi.clone());
    Ok(r)
}

/// Minimum of [`cit_bound`] over all partitions of the parties (default `Q`);
/// ties go to the earliest partition in enumeration order.
pub fn cit_bound_best(j: &JointDist, z: &[&str], eps: f64, eta: f64) -> Result<BoundReport> {
    let m = j.party_positions(z)?.len();
    let parts = enum_partitions(m, 2)?;
    let reports: Vec<BoundReport> = parts
        .par_iter()
        .map(|pi| cit_bound(j, pi, z, eps, eta, None))
        .collect::<Result<_>>()?;
    let mut best = reports
        .into_iter()
        .reduce(|a, b| if b.value < a.value { b } else { a })
        .expect("at least one partition");
    best.kind = "cit_best".into();
    best.intermediates.insert("partitions".into(), parts.len() as f64);
    Ok(best)
}

/// `min_π D(P‖Π P_{π_i}) / (|π|−1)` with its minimizing partition.
pub fn sk_capacity_formula(j: &JointDist, z: &[&str]) -> Result<(f64, Partition)> {
    if !z.is_empty() {
        return Err(Error::EvePresent);
    }
    let parts = enum_partitions(j.vars().len(), 2)?;
    let vals: Vec<f64> = parts
        .par_iter()
        .map(|pi| {
            let q = j.conditional_product(pi, &[])?;
            Ok(divergence(j, &q, Divergence::Kl)? / (pi.len() as f64 - 1.0))
        })
        .collect::<Result<_>>()?;
    let (i, v) = vals
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &v)| if v < bv { (i, v) } else { (bi, bv) });
    Ok((v, parts[i].clone()))
}

/// Names of the variables of a two-party source with optional eavesdropper.
#[derive(Debug, Clone, Copy)]
pub struct TwoParty<'a> {
    pub x1: &'a str,
    pub x2: &'a str,
    pub z: Option<&'a str>,
}

impl<'a> TwoParty<'a> {
    pub fn new(x1: &'a str, x2: &'a str, z: Option<&'a str>) -> Self {
        Self { x1, x2, z }
    }

    fn names(&self) -> Vec<&'a str> {
        let mut v = vec![self.x1, self.x2];
        v.extend(self.z);
        v
    }
}

fn with_aux(j: &JointDist, names: TwoParty<'_>, u: &Channel) -> Result<(JointDist, Vec<String>)> {
    let base = j.marginal(&names.names())?;
    let joint = base.compose(u)?;
    Ok((joint, u.outputs().iter().map(|v| v.name.clone()).collect()))
}

/// Single-shot SK bound for a given auxiliary channel `U`:
/// `−log β_{ε+2δ+η}(P_{X1X2ZU}, P_{X1|ZU}P_{X2ZU}) + D_max^{η1}(P_{X1X2ZU}‖P_{X1X2Z}P_{U|Z}) + 4 log(1/(η−η1−η2)) + 1`.
/// `η1 = 0` uses the unsmoothed `D_max`.
#[allow(clippy::too_many_arguments)]
pub fn ga_singleshot_bound(
    j: &JointDist,
    names: TwoParty<'_>,
    u: &Channel,
    eps: f64,
    delta: f64,
    eta: f64,
    eta1: f64,
    eta2: f64,
) -> Result<BoundReport> {
    for (n, v) in [("ε", eps), ("δ", delta), ("η1", eta1), ("η2", eta2)] {
        nonneg(n, v)?;
    }
    if !(eta1 + eta2 < eta && eta < 1.0 - eps - 2.0 * delta) {
        return Err(param(format!(
            "need 0 ≤ η1+η2 < η < 1−ε−2δ, got η={eta}, η1={eta1}, η2={eta2}, ε={eps}, δ={delta}"
        )));
    }
    let (joint, unames) = with_aux(j, names, u)?;
    let mut zu: Vec<&str> = names.z.into_iter().collect();
    zu.extend(unames.iter().map(String::as_str));
    let zonly: Vec<&str> = names.z.into_iter().collect();

    let order: Vec<&str> = [names.x1, names.x2].into_iter().chain(zu.iter().copied()).collect();
    let pj = joint.marginal(&order)?;
    let q1 = pj.conditional_product(&Partition::singletons(2), &zu)?;
    let cert = beta_epsilon(&pj, &q1, eps + 2.0 * delta + eta)?;

    // parties here are (X1, X2, U...) given Z; blocks {X1,X2} and {U...}
    let parties = pj.party_positions(&zonly)?;
    let xblock: Vec<usize> = (0..parties.len())
        .filter(|&i| {
            let n = pj.vars()[parties[i]].name.as_str();
            n == names.x1 || n == names.x2
        })
        .collect();
    let ublock: Vec<usize> = (0..parties.len()).filter(|i| !xblock.contains(i)).collect();
    let q2 = pj.conditional_product(&Partition::new(vec![xblock, ublock])?, &zonly)?;
    let dm = if eta1 == 0.0 { d_max(&pj, &q2)? } else { d_max_smooth(&pj, &q2, eta1)?.value };

    let nlb = cert.neg_log2();
    let c = 4.0 * log_inv(eta - eta1 - eta2) + 1.0;
    Ok(BoundReport::new("ga_singleshot", nlb + dm + c)
        .param("epsilon", eps)
        .param("delta", delta)
        .param("eta", eta)
        .param("eta1", eta1)
        .param("eta2", eta2)
        .mid("beta", cert.beta)
        .mid("neg_log2_beta", nlb)
        .mid("d_max", dm)
        .mid("constant", c))
}

/// `I(X1;X2|U) + I(X1X2;U|Z)` for the given auxiliary channel.
pub fn ga_capacity_bound(j: &JointDist, names: TwoParty<'_>, u: &Channel) -> Result<f64> {
    let (joint, unames) = with_aux(j, names, u)?;
    let us: Vec<&str> = unames.iter().map(String::as_str).collect();
    let zs: Vec<&str> = names.z.into_iter().collect();
    let a = conditional_mutual_information(&joint, &[names.x1], &[names.x2], &us)?;
    let b = conditional_mutual_information(&joint, &[names.x1, names.x2], &us, &zs)?;
    Ok(a + b)
}

const V0: &str = "__V0";
const V1: &str = "__V1";
const V1B: &str = "__V1b";

/// `P_{X1 X2 V0}` with `V0 = mcf(X1, X2)`.
pub fn with_mcf(j: &JointDist, x1: &str, x2: &str) -> Result<JointDist> {
    let base = j.marginal(&[x1, x2])?;
    let (l1, _) = mcf(&base, x1, x2)?;
    l1.attach(&base, V0)
}

/// `P_{V1 V1 X2}` with `V1 = mss(X2|X1)` on both copies.
pub fn doubled_mss(j: &JointDist, x1: &str, x2: &str) -> Result<JointDist> {
    let base = j.marginal(&[x1, x2])?;
    let l = mss(&base, x1, x2, MSS_TOL)?;
    let a = l.attach(&base, V1)?;
    let b = l.attach(&a, V1B)?;
    b.marginal(&[V1, V1B, x2])
}

fn beta_v0(j: &JointDist, x1: &str, x2: &str, eta: f64) -> Result<f64> {
    let p = with_mcf(j, x1, x2)?;
    let q = p.conditional_product(&Partition::singletons(2), &[V0])?;
    Ok(beta_epsilon(&p, &q, eta)?.neg_log2())
}

fn beta_v1(j: &JointDist, x1: &str, x2: &str, eta: f64) -> Result<f64> {
    let p = doubled_mss(j, x1, x2)?;
    let q = p.conditional_product(&Partition::singletons(2), &[x2])?;
    Ok(beta_epsilon(&p, &q, eta)?.neg_log2())
}

/// Both single-shot OT bounds (`η = ε+δ1+2δ2+ξ`) and their minimum.
pub fn ot_bounds(j: &JointDist, x1: &str, x2: &str, eps: f64, d1: f64, d2: f64, xi: f64) -> Result<BoundReport> {
    for (n, v) in [("ε", eps), ("δ1", d1), ("δ2", d2)] {
        nonneg(n, v)?;
    }
    positive("ξ", xi)?;
    let eta = eps + d1 + 2.0 * d2 + xi;
    if eta >= 1.0 {
        return Err(param(format!("need η = ε+δ1+2δ2+ξ < 1, got {eta}")));
    }
    let n1 = beta_v0(j, x1, x2, eta)?;
    let n2 = beta_v1(j, x1, x2, eta)?;
    let c = 2.0 * log_inv(xi);
    let (b1, b2) = (n1 + c, n2 + c);
    Ok(BoundReport::new("ot", b1.min(b2))
        .param("epsilon", eps)
        .param("delta1", d1)
        .param("delta2", d2)
        .param("xi", xi)
        .mid("eta", eta)
        .mid("neg_log2_beta_v0", n1)
        .mid("neg_log2_beta_v1", n2)
        .mid("bound1", b1)
        .mid("bound2", b2))
}

/// `min{ I(X1;X2|V0), H(V1|X2) }`.
pub fn ot_capacity_bound(j: &JointDist, x1: &str, x2: &str) -> Result<f64> {
    let p = with_mcf(j, x1, x2)?;
    let a = conditional_mutual_information(&p, &[x1], &[x2], &[V0])?;
    Ok(a.min(bc_capacity_bound(j, x1, x2)?))
}

/// Single-shot BC bound with `η = ε+δ1+δ2+ξ`.
pub fn bc_bound(j: &JointDist, x1: &str, x2: &str, eps: f64, d1: f64, d2: f64, xi: f64) -> Result<BoundReport> {
    for (n, v) in [("ε", eps), ("δ1", d1), ("δ2", d2)] {
        nonneg(n, v)?;
    }
    positive("ξ", xi)?;
    if eps + d1 + d2 >= 1.0 {
        return Err(param("need ε+δ1+δ2 < 1"));
    }
    let eta = eps + d1 + d2 + xi;
    if eta >= 1.0 {
        return Err(param(format!("need η = ε+δ1+δ2+ξ < 1, got {eta}")));
    }
    let n2 = beta_v1(j, x1, x2, eta)?;
    Ok(BoundReport::new("bc", n2 + 2.0 * log_inv(xi))
        .param("epsilon", eps)
        .param("delta1", d1)
        .param("delta2", d2)
        .param("xi", xi)
        .mid("eta", eta)
        .mid("neg_log2_beta_v1", n2))
}

/// `H(V1|X2)` with `V1 = mss(X2|X1)`.
pub fn bc_capacity_bound(j: &JointDist, x1: &str, x2: &str) -> Result<f64> {
    let p = doubled_mss(j, x1, x2)?;
    Ok((entropy(&p, &[V1, x2])? - entropy(&p, &[x2])?).max(0.0))
}

/// Slack parameters of the secure-computation conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComputeSlacks {
    pub eps: f64,
    pub delta: f64,
    pub xi: f64,
    pub zeta: f64,
    pub eta: f64,
}

impl ComputeSlacks {
    /// `μ = ε+δ+2ξ+ζ+η`.
    pub fn mu(&self) -> f64 {
        self.eps + self.delta + 2.0 * self.xi + self.zeta + self.eta
    }

    /// Even split of `μ − ε − δ` into `2ξ = ζ = η`.
    pub fn even(eps: f64, delta: f64, mu: f64) -> Self {
        let s = (mu - eps - delta) / 3.0;
        Self { eps, delta, xi: s / 2.0, zeta: s, eta: s }
    }

    fn validate(&self) -> Result<()> {
        nonneg("ε", self.eps)?;
        nonneg("δ", self.delta)?;
        for (n, v) in [("ξ", self.xi), ("ζ", self.zeta), ("η", self.eta)] {
            positive(n, v)?;
        }
        if self.mu() >= 1.0 {
            return Err(param(format!("need μ = ε+δ+2ξ+ζ+η < 1, got {}", self.mu())));
        }
        if self.xi >= 0.5 {
            return Err(param("ξ must be below 1/2"));
        }
        Ok(())
    }

    fn params(&self) -> BTreeMap<String, f64> {
        [("epsilon", self.eps), ("delta", self.delta), ("xi", self.xi), ("zeta", self.zeta), ("eta", self.eta), ("mu", self.mu())]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v))
            .collect()
    }
}

/// Pushforward of `j` under a function given as one output label per joint outcome.
pub fn function_dist(j: &JointDist, g: &[usize], outputs: usize) -> Result<JointDist> {
    if g.len() != j.len() || g.iter().any(|&v| v >= outputs) {
        return Err(param("function table must give one label in range per joint outcome"));
    }
    let mut pmf = vec![0.0; outputs];
    for (&p, &v) in j.pmf().iter().zip(g) {
        pmf[v] += p;
    }
    JointDist::new(vec![Var::range("G", outputs)?], pmf)
}

/// Necessary condition for secure computability of `g` over the parties of `j`:
/// `H_min^ξ(P_G) ≤ RHS(π)` for every examined partition.
pub fn sc_necessary_check(
    j: &JointDist,
    g: &[usize],
    outputs: usize,
    s: ComputeSlacks,
    partition: Option<&Partition>,
) -> Result<CheckReport> {
    s.validate()?;
    let pg = function_dist(j, g, outputs)?;
    let lhs = h_min_smooth(&pg, s.xi)?.value;
    let parts = match partition {
        Some(p) => vec![p.clone()],
        None => enum_partitions(j.vars().len(), 2)?,
    };
    let mu = s.mu();
    let tail = 2.0 * log_inv(2.0 * s.zeta) + 1.0;
    let rhs: Vec<(f64, f64)> = parts
        .par_iter()
        .map(|pi| {
            let q = j.conditional_product(pi, &[])?;
            let nlb = beta_epsilon(j, &q, mu)?.neg_log2();
            Ok((cit_formula(nlb, pi.len(), s.eta) + tail, nlb))
        })
        .collect::<Result<_>>()?;
    let (i, &(r, nlb)) = rhs
        .iter()
        .enumerate()
        .reduce(|a, b| if b.1 .0 < a.1 .0 { b } else { a })
        .expect("at least one partition");
    let mut intermediates = BTreeMap::new();
    intermediates.insert("h_min_smooth".into(), lhs);
    intermediates.insert("neg_log2_beta".into(), nlb);
    intermediates.insert("blocks".into(), parts[i].len() as f64);
    intermediates.insert("zeta_term".into(), tail);
    Ok(CheckReport {
        kind: "secure_computation".into(),
        pass: lhs <= r,
        lhs,
        rhs: r,
        slack: r - lhs,
        params: s.params(),
        partition: Some(parts[i].clone()),
        intermediates,
    })
}

/// Necessary condition for secure transmission with a `κ`-bit shared key:
/// `H_min^ξ(P_M) ≤ κ + 2log(1/η) + log(1/(1−μ)) + 2log(1/2ζ) + 1`.
pub fn secure_transmission_check(m: &JointDist, kappa: f64, s: ComputeSlacks) -> Result<CheckReport> {
    s.validate()?;
    nonneg("κ", kappa)?;
    let flat = JointDist::from_probs("M", m.pmf().to_vec())?;
    let lhs = h_min_smooth(&flat, s.xi)?.value;
    let mu = s.mu();
    let rhs = kappa + 2.0 * log_inv(s.eta) + log_inv(1.0 - mu) + 2.0 * log_inv(2.0 * s.zeta) + 1.0;
    let mut params = s.params();
    params.insert("kappa".into(), kappa);
    let mut intermediates = BTreeMap::new();
    intermediates.insert("h_min_smooth".into(), lhs);
    Ok(CheckReport {
        kind: "secure_transmission".into(),
        pass: lhs <= rhs,
        lhs,
        rhs,
        slack: rhs - lhs,
        params,
        partition: None,
        intermediates,
    })
}
