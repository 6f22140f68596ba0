//! Secret-key security measurement and the checks built on it.

use super::exec::{product_distance, Execution};
use super::protocol::Protocol;
use crate::bounds::{cit_bound_best, BoundReport, FACTOR_TOL};
use crate::error::{param, Error, Result};
use crate::numeric::ser_f64;
use crate::prob::{JointDist, MassFunction};
use crate::structure::Partition;
use serde::Serialize;
use std::collections::BTreeMap;

/// Slack used when comparing measured quantities against bounds.
pub const CHECK_TOL: f64 = 1e-9;

/// Measured key quality. `epsilon` is the combined criterion
/// `d(P_{K_M F Z}, P_unif^(M) × P_{FZ})`; `eps_rec` and `delta_sec` are the
/// separate agreement and secrecy criteria.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecurityReport {
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
    #[serde(serialize_with = "ser_f64")]
    pub eps_rec: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta_sec: f64,
    #[serde(serialize_with = "ser_f64")]
    pub agree_prob: f64,
    #[serde(serialize_with = "ser_f64")]
    pub key_len_bits: f64,
    pub key_size: usize,
}

impl SecurityReport {
    /// `ε ≤ ε_rec + δ_sec`, `ε_rec ≤ ε` and `δ_sec ≤ ε`.
    pub fn prop1_holds(&self, tol: f64) -> bool {
        self.epsilon <= self.eps_rec + self.delta_sec + tol && self.eps_rec <= self.epsilon + tol && self.delta_sec <= self.epsilon + tol
    }
}

fn key_size(proto: &Protocol) -> Result<usize> {
    let k = proto.outputs[0].alphabet.len();
    if proto.outputs.iter().any(|o| o.alphabet.len() != k) {
        return Err(Error::Interface("all parties must output keys over the same alphabet".into()));
    }
    Ok(k)
}

pub(crate) fn require_parties(proto: &Protocol) -> Result<()> {
    if proto.num_parties() < 2 {
        return Err(Error::InvalidProtocol("key agreement needs at least two parties".into()));
    }
    Ok(())
}

pub(crate) fn diagonal(kshape: &crate::prob::Shape, k: usize) -> Option<usize> {
    let ks = kshape.decode(k);
    ks.iter().all(|&v| v == ks[0]).then_some(ks[0])
}

/// Evaluates the key produced by `proto` on `j`.
pub fn eval_sk_security(j: &JointDist, proto: &Protocol) -> Result<SecurityReport> {
    require_parties(proto)?;
    let ks = key_size(proto)?;
    let exec = Execution::run(j, proto)?;
    Ok(security_of(&exec, ks))
}

pub(crate) fn security_of(exec: &Execution, ks: usize) -> SecurityReport {
    let kshape = exec.layout.out_shape();
    let joint = exec.law(|s| (s.k, (s.f, exec.eve(s))));
    let unif = 1.0 / ks as f64;
    let diag_ref: BTreeMap<usize, f64> = (0..ks).map(|v| (kshape.encode(&vec![v; kshape.sizes().len()]), unif)).collect();
    let epsilon = product_distance(&joint, Some(&diag_ref));
    let agree_prob = exec.prob(|s| diagonal(&kshape, s.k).is_some());
    let k1 = exec.law(|s| (exec.key(s, 0), (s.f, exec.eve(s))));
    let unif_ref: BTreeMap<usize, f64> = (0..ks).map(|v| (v, unif)).collect();
    let delta_sec = product_distance(&k1, Some(&unif_ref));
    SecurityReport {
        epsilon,
        eps_rec: (1.0 - agree_prob).max(0.0),
        delta_sec,
        agree_prob,
        key_len_bits: (ks as f64).log2(),
        key_size: ks,
    }
}

fn eve_names(p: &Protocol) -> Vec<&str> {
    p.eve.iter().map(String::as_str).collect()
}

/// `log |K| ≤ S_{ε,η}` at the achieved ε.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConverseReport {
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub key_len_bits: f64,
    #[serde(serialize_with = "ser_f64")]
    pub slack: f64,
    pub security: SecurityReport,
    pub bound: BoundReport,
}

/// Compares the achieved key length with the best conditional independence
/// testing bound on the per-party view of `j`.
pub fn check_converse(j: &JointDist, proto: &Protocol, eta: f64) -> Result<ConverseReport> {
    let (jv, pv) = proto.party_view(j)?;
    let security = eval_sk_security(&jv, &pv)?;
    if security.epsilon + eta >= 1.0 {
        return Err(param(format!("need η < 1 − ε, got ε={}, η={eta}", security.epsilon)));
    }
    let bound = cit_bound_best(&jv, &eve_names(&pv), security.epsilon, eta)?;
    let slack = bound.value - security.key_len_bits;
    Ok(ConverseReport { pass: slack >= -CHECK_TOL, key_len_bits: security.key_len_bits, slack, security, bound })
}

/// The hypothesis test of the converse proof, evaluated on the key outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma1Report {
    pub partition: Partition,
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub lambda: f64,
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
    #[serde(serialize_with = "ser_f64")]
    pub type1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub type1_bound: f64,
    #[serde(serialize_with = "ser_f64")]
    pub type2: f64,
    #[serde(serialize_with = "ser_f64")]
    pub type2_bound: f64,
}

/// Runs the protocol under `P` and under `Q^π` (the conditional product across
/// `pi` given eve) and evaluates the test
/// `A = {log P_unif^(M)(k)/Q(k|f,z) ≥ (|π|−1) log|K| − |π| log(1/η)}`.
pub fn lemma1_test(j: &JointDist, proto: &Protocol, pi: &Partition, eta: f64) -> Result<Lemma1Report> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(param(format!("η must lie in (0, 1), got {eta}")));
    }
    require_parties(proto)?;
    let ks = key_size(proto)?;
    let (jv, pv) = proto.party_view(j)?;
    let z = eve_names(&pv);
    pi.validate(pv.num_parties())?;
    let q = jv.conditional_product(pi, &z)?;
    let pe = Execution::run(&jv, &pv)?;
    let qe = Execution::run(&q, &pv)?;
    let security = security_of(&pe, ks);
    let kshape = pe.layout.out_shape();

    let blocks = pi.len() as f64;
    let lk = (ks as f64).log2();
    let lambda = (blocks - 1.0) * lk + blocks * eta.log2();
    let qjoint = qe.law(|s| (s.k, s.f, qe.eve(s)));
    let qfz = qe.law(|s| (s.f, qe.eve(s)));
    let in_a = |k: usize, f: usize, z: usize| -> bool {
        let qk = qjoint.get(&(k, f, z)).copied().unwrap_or(0.0);
        if qk == 0.0 {
            return true;
        }
        if diagonal(&kshape, k).is_none() {
            return false;
        }
        let cond = qk / qfz[&(f, z)];
        -lk - cond.log2() >= lambda - CHECK_TOL
    };
    let pjoint = pe.law(|s| (s.k, s.f, pe.eve(s)));
    let type1: f64 = pjoint.iter().filter(|((k, f, z), _)| !in_a(*k, *f, *z)).map(|(_, &p)| p).sum();
    let type2: f64 = qjoint.iter().filter(|((k, f, z), _)| in_a(*k, *f, *z)).map(|(_, &p)| p).sum();
    let type1_bound = security.epsilon + eta;
    let type2_bound = (lk * (1.0 - blocks) - blocks * eta.log2()).exp2();
    let pass = type1 <= type1_bound + CHECK_TOL && type2 <= type2_bound * (1.0 + CHECK_TOL) + CHECK_TOL;
    Ok(Lemma1Report {
        partition: pi.clone(),
        pass,
        lambda,
        epsilon: security.epsilon,
        type1,
        type1_bound,
        type2,
        type2_bound,
    })
}

/// Whether the observations stay conditionally independent across `pi` given
/// each transcript (and eve), for a source that factorizes across `pi`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub pass: bool,
    #[serde(serialize_with = "ser_f64")]
    pub source_gap: f64,
    #[serde(serialize_with = "ser_f64")]
    pub max_gap: f64,
    pub transcripts: usize,
}

pub fn interactive_independence_check(j: &JointDist, proto: &Protocol, pi: &Partition) -> Result<IndependenceReport> {
    let (jv, pv) = proto.party_view(j)?;
    let z = eve_names(&pv);
    let source_gap = jv.factorization_gap(pi, &z)?;
    if source_gap > FACTOR_TOL {
        return Err(Error::NotFactorized(source_gap));
    }
    let exec = Execution::run(&jv, &pv)?;
    let mut by_f: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for s in &exec.states {
        by_f.entry(s.f).or_insert_with(|| vec![0.0; jv.len()])[s.x] += s.p;
    }
    let mut max_gap: f64 = 0.0;
    for w in by_f.values() {
        let cond = JointDist::normalized(jv.vars().to_vec(), w.clone())?;
        max_gap = max_gap.max(cond.factorization_gap(pi, &z)?);
    }
    Ok(IndependenceReport { pass: max_gap <= FACTOR_TOL, source_gap, max_gap, transcripts: by_f.len() })
}
