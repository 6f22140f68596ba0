//! Bit commitment interface, measurement and the reduction to key agreement.

use super::exec::{product_distance, Execution};
use super::ot::{ot_correlation, Reduction, RECEIVER, SENDER};
use super::protocol::{point, OutputSpec, Protocol, ProtocolBuilder};
use super::security::{security_of, SecurityReport, CHECK_TOL};
use crate::error::{Error, Result};
use crate::numeric::ser_f64;
use crate::prob::{Alphabet, JointDist, MassFunction};
use crate::structure::{mss, MSS_TOL};
use serde::Serialize;
use std::collections::BTreeMap;

/// Commit phase of a two-party commitment to `K` uniform on `{0,1}^l` (the
/// committer's randomness), with the reveal test given extensionally:
/// `test[((k'·|X1| + x1')·|X2| + x2)·|F| + f] = Pr[T(k', x1', x2, f) = 0]`.
/// Observation indices refer to the per-party view of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct BcProtocol {
    pub l: u32,
    pub protocol: Protocol,
    pub test: Vec<f64>,
}

impl BcProtocol {
    pub fn new(l: u32, protocol: Protocol, test: Vec<f64>) -> Result<Self> {
        if protocol.num_parties() != 2 {
            return Err(Error::Interface("BC needs exactly two parties".into()));
        }
        let n = 1usize << l;
        let r = &protocol.parties[SENDER].randomness;
        if r.len() != n || r.iter().any(|&p| (p - 1.0 / n as f64).abs() > 1e-12) {
            return Err(Error::Interface(format!("committer randomness must be uniform on {n} values")));
        }
        if protocol.parties[RECEIVER].randomness.len() != 1 {
            return Err(Error::Interface("receiver must not use local randomness".into()));
        }
        if test.iter().any(|&t| !(0.0..=1.0).contains(&t)) {
            return Err(Error::Interface("test acceptance probabilities must lie in [0, 1]".into()));
        }
        Ok(Self { l, protocol, test })
    }

    fn n(&self) -> usize {
        1 << self.l
    }

    fn check_test(&self, x1: usize, x2: usize, f: usize) -> Result<()> {
        let want = self.n() * x1 * x2 * f;
        if self.test.len() != want {
            return Err(Error::Interface(format!("test table has {} entries, expected {want}", self.test.len())));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BcMeasurement {
    #[serde(serialize_with = "ser_f64")]
    pub epsilon: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta1: f64,
    #[serde(serialize_with = "ser_f64")]
    pub delta2: f64,
}

struct Run {
    exec: Execution,
    nx1: usize,
    nx2: usize,
    nf: usize,
}

fn run(j: &JointDist, bc: &BcProtocol) -> Result<(JointDist, Protocol, Run)> {
    let (jv, pv) = bc.protocol.party_view(j)?;
    if !pv.eve.is_empty() {
        return Err(Error::Interface("BC source must not include eavesdropper variables".into()));
    }
    let (nx1, nx2, nf) = (jv.vars()[0].size(), jv.vars()[1].size(), pv.transcript_size());
    bc.check_test(nx1, nx2, nf)?;
    let exec = Execution::run(&jv, &pv)?;
    Ok((jv, pv, Run { exec, nx1, nx2, nf }))
}

pub fn measure_bc(j: &JointDist, bc: &BcProtocol) -> Result<BcMeasurement> {
    let (_, _, r) = run(j, bc)?;
    let e = &r.exec;
    let t0 = |k: usize, x1: usize, x2: usize, f: usize| bc.test[((k * r.nx1 + x1) * r.nx2 + x2) * r.nf + f];
    let accept: f64 = e
        .states
        .iter()
        .map(|s| s.p * t0(e.rand(s, SENDER), e.obs(s, SENDER), e.obs(s, RECEIVER), s.f))
        .sum();
    let hiding = e.law(|s| (e.rand(s, SENDER), (e.obs(s, RECEIVER), s.f)));
    let full = e.law(|s| ((e.rand(s, SENDER), e.obs(s, SENDER), s.f), e.obs(s, RECEIVER)));
    let mut groups: BTreeMap<(usize, usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for (&(ctx, x2), &p) in &full {
        groups.entry(ctx).or_default().push((x2, p));
    }
    let mut delta2 = 0.0;
    for (&(k, _, f), cells) in &groups {
        let mut best: f64 = 0.0;
        for kc in (0..bc.n()).filter(|&kc| kc != k) {
            for x1c in 0..r.nx1 {
                let v: f64 = cells.iter().map(|&(x2, p)| p * t0(kc, x1c, x2, f)).sum();
                best = best.max(v);
            }
        }
        delta2 += best;
    }
    Ok(BcMeasurement { epsilon: (1.0 - accept).max(0.0), delta1: product_distance(&hiding, None), delta2 })
}

/// Key agreement from the commit phase: party 1 keeps `K`; party 2, seeing
/// `(V1, X2)` with `V1 = mss(X2|X1)`, outputs the first maximizer `k̂` of
/// `Σ_{x2} P(x2|v,f) Pr[T(k̂, x̂1, x2, f) = 0]` over `(k̂, x̂1)`. Eve sees `X2`.
pub fn reduce_bc_to_sk(j: &JointDist, bc: &BcProtocol) -> Result<Reduction> {
    let (jv, pv, r) = run(j, bc)?;
    let n = bc.n();
    let lab = mss(&jv, "P1", "P2", MSS_TOL)?;
    let dist = lab.attach(&jv, "V1")?;
    let nv = lab.num_labels;
    let e = Execution::run(&dist, &pv)?;
    let vfx = e.law(|s| {
        let a = e.assignment(s.x);
        (a[2], s.f, a[1])
    });
    let mut p = pv.with_party_obs(RECEIVER, vec!["V1".into(), "P2".into()], nv * r.nx2, |o| o % r.nx2);
    p.eve = vec!["P2".into()];
    let mut sender = Vec::with_capacity(r.nx1 * n * r.nf * n);
    for _ in 0..r.nx1 {
        for k in 0..n {
            for _ in 0..r.nf {
                sender.extend(point(n, k));
            }
        }
    }
    p.outputs[SENDER] = OutputSpec { alphabet: Alphabet::range(n)?, table: sender };
    let mut recv = Vec::with_capacity(nv * r.nx2 * r.nf * n);
    for v in 0..nv {
        let decoded: Vec<usize> = (0..r.nf)
            .map(|f| {
                let w: Vec<f64> = (0..r.nx2).map(|x2| vfx.get(&(v, f, x2)).copied().unwrap_or(0.0)).collect();
                let mut best = (f64::NEG_INFINITY, 0);
                for k in 0..n {
                    for x1 in 0..r.nx1 {
                        let score: f64 =
                            w.iter().enumerate().map(|(x2, &pw)| pw * bc.test[((k * r.nx1 + x1) * r.nx2 + x2) * r.nf + f]).sum();
                        if score > best.0 {
                            best = (score, k);
                        }
                    }
                }
                best.1
            })
            .collect();
        for _ in 0..r.nx2 {
            for &k in &decoded {
                recv.extend(point(n, k));
            }
        }
    }
    p.outputs[RECEIVER] = OutputSpec { alphabet: Alphabet::range(n)?, table: recv };
    Ok(Reduction { dist, protocol: p, fallbacks: 0 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BcReductionReport {
    pub source: BcMeasurement,
    pub key: SecurityReport,
    #[serde(serialize_with = "ser_f64")]
    pub claim_rec: f64,
    #[serde(serialize_with = "ser_f64")]
    pub claim_sec: f64,
    pub pass: bool,
}

/// Checks `ε_rec ≤ ε + δ2` and `δ_sec ≤ δ1` on the reduced protocol.
pub fn check_bc_reduction(j: &JointDist, bc: &BcProtocol) -> Result<BcReductionReport> {
    let source = measure_bc(j, bc)?;
    let red = reduce_bc_to_sk(j, bc)?;
    let key = security_of(&Execution::run(&red.dist, &red.protocol)?, bc.n());
    let claim_rec = source.epsilon + source.delta2;
    let claim_sec = source.delta1;
    let pass = key.eps_rec <= claim_rec + CHECK_TOL && key.delta_sec <= claim_sec + CHECK_TOL;
    Ok(BcReductionReport { source, key, claim_rec, claim_sec, pass })
}

/// Commitment to one bit on the 1-bit OT correlation: send
/// `F = K ⊕ K0′ ⊕ K1′`; accept `(k', k0', k1')` iff it matches `F` and the
/// receiver's `K′_{B′}`. Perfectly hiding; a cheater escapes with probability 1/2.
pub fn otp_bc_protocol() -> Result<(JointDist, BcProtocol)> {
    let j = ot_correlation(1)?;
    let mut b = ProtocolBuilder::new(&j);
    let c = b.party(&["X1"], vec![0.5, 0.5])?;
    let r = b.party(&["X2"], vec![1.0])?;
    b.round();
    b.message_det(c, 2, |x1, k, _| k ^ (x1 / 2) ^ (x1 % 2))?;
    b.output_det(c, 1, |_, _, _| 0)?;
    b.output_det(r, 1, |_, _, _| 0)?;
    let p = b.build()?;
    let mut test = Vec::with_capacity(2 * 4 * 4 * 2);
    for k in 0..2 {
        for x1 in 0..4 {
            let (a0, a1) = (x1 / 2, x1 % 2);
            for x2 in 0..4 {
                let (bb, kb) = (x2 / 2, x2 % 2);
                for f in 0..2 {
                    let ok = (k ^ a0 ^ a1) == f && (if bb == 0 { a0 } else { a1 }) == kb;
                    test.push(if ok { 1.0 } else { 0.0 });
                }
            }
        }
    }
    Ok((j, BcProtocol::new(1, p, test)?))
}

/// Length-zero commitment with an always-accepting test.
pub fn empty_bc_protocol() -> Result<(JointDist, BcProtocol)> {
    let j = ot_correlation(1)?;
    let mut b = ProtocolBuilder::new(&j);
    let c = b.party(&["X1"], vec![1.0])?;
    let r = b.party(&["X2"], vec![1.0])?;
    b.output_det(c, 1, |_, _, _| 0)?;
    b.output_det(r, 1, |_, _, _| 0)?;
    Ok((j, BcProtocol::new(0, b.build()?, vec![1.0; 4 * 4])?))
}
