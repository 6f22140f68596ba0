//! Seeded random protocols exercised against the converse and its lemmas.

use super::protocol::{Protocol, ProtocolBuilder};
use super::security::{check_converse, eval_sk_security, interactive_independence_check, lemma1_test};
use crate::error::Result;
use crate::prob::{JointDist, Var};
use crate::structure::enum_partitions;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FuzzConfig {
    pub count: usize,
    pub seed: u64,
    pub eta: f64,
    /// Additional instances on conditionally independent sources for the
    /// interactive-communication check.
    pub independence_count: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self { count: 500, seed: 0, eta: 0.05, independence_count: 100 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FuzzSummary {
    pub instances: usize,
    pub skipped: usize,
    pub converse_checked: usize,
    pub converse_violations: usize,
    pub lemma1_checked: usize,
    pub lemma1_violations: usize,
    pub prop1_violations: usize,
    pub independence_checked: usize,
    pub independence_violations: usize,
    pub keyed_instances: usize,
    /// Indices of failing instances, for replay with [`random_instance`].
    pub failures: Vec<usize>,
}

impl FuzzSummary {
    pub fn clean(&self) -> bool {
        self.converse_violations == 0
            && self.lemma1_violations == 0
            && self.prop1_violations == 0
            && self.independence_violations == 0
    }
}

fn random_row(rng: &mut ChaCha8Rng, width: usize, det_prob: f64) -> Vec<f64> {
    if rng.gen_bool(det_prob) {
        let mut row = vec![0.0; width];
        row[rng.gen_range(0..width)] = 1.0;
        row
    } else {
        let w: Vec<f64> = (0..width).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    }
}

fn source(rng: &mut ChaCha8Rng, m: usize, eve: bool, independent: bool) -> Result<JointDist> {
    let mut vars: Vec<Var> = (1..=m).map(|i| Var::range(format!("X{i}"), 2)).collect::<Result<_>>()?;
    if eve {
        vars.push(Var::range("Z", 2)?);
    }
    let len = 1usize << vars.len();
    if independent {
        let pz = if eve { rng.gen_range(0.05..0.95) } else { 1.0 };
        let biases: Vec<[f64; 2]> = (0..m).map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]).collect();
        let mut pmf = vec![0.0; len];
        for (idx, slot) in pmf.iter_mut().enumerate() {
            let z = if eve { idx & 1 } else { 0 };
            let xs = if eve { idx >> 1 } else { idx };
            let mut p = if eve { if z == 1 { pz } else { 1.0 - pz } } else { 1.0 };
            for (i, b) in biases.iter().enumerate() {
                let bit = (xs >> (m - 1 - i)) & 1;
                p *= if bit == 1 { b[z] } else { 1.0 - b[z] };
            }
            *slot = p;
        }
        return JointDist::normalized(vars, pmf);
    }
    if rng.gen_bool(0.5) {
        // a shared bit seen through independent binary symmetric noise
        let flips: Vec<f64> = (0..vars.len()).map(|_| rng.gen_range(0.0..0.3)).collect();
        let mut pmf = vec![0.0; len];
        for (idx, slot) in pmf.iter_mut().enumerate() {
            for c in 0..2 {
                let mut p = 0.5;
                for (i, &e) in flips.iter().enumerate() {
                    let bit = (idx >> (vars.len() - 1 - i)) & 1;
                    p *= if bit == c { 1.0 - e } else { e };
                }
                *slot += p;
            }
        }
        return JointDist::normalized(vars, pmf);
    }
    let w: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>().powi(2) }).collect();
    if w.iter().all(|&x| x == 0.0) {
        return JointDist::uniform(vars);
    }
    JointDist::normalized(vars, w)
}

/// Instance `index` of the stream seeded by `seed`; `independent` draws a
/// source whose parties are conditionally independent given eve.
pub fn random_instance(seed: u64, index: usize, independent: bool) -> Result<(JointDist, Protocol)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ u64::from(independent));
    let m = rng.gen_range(2..=3usize);
    let eve = rng.gen_bool(0.3);
    let j = source(&mut rng, m, eve, independent)?;
    let mut b = ProtocolBuilder::new(&j);
    for i in 1..=m {
        let r = if rng.gen_bool(0.4) { random_row(&mut rng, 2, 0.0) } else { vec![1.0] };
        b.party(&[format!("X{i}").as_str()], r)?;
    }
    if eve {
        b.eve(&["Z"]);
    }
    let rounds = rng.gen_range(0..=2);
    for _ in 0..rounds {
        b.round();
        let mut senders: Vec<usize> = (0..m).filter(|_| rng.gen_bool(0.6)).collect();
        if senders.is_empty() {
            senders.push(rng.gen_range(0..m));
        }
        for s in senders {
            let a = rng.gen_range(2..=3);
            let mut rows = Vec::new();
            // draw rows up front so the closure stays pure
            let n_rows = 2 * 2 * 27;
            for _ in 0..n_rows {
                rows.push(random_row(&mut rng, a, 0.7));
            }
            let echo = rng.gen_bool(0.4);
            b.message(s, a, |o, r, t| {
                if echo {
                    super::protocol::point(a, o)
                } else {
                    let code = t.iter().fold(0, |acc, &v| acc * 3 + v);
                    rows[(o * 2 + r) * 27 + code % 27].clone()
                }
            })?;
        }
    }
    let ks = *[1usize, 2, 4].choose(&mut rng).unwrap();
    let structured = rng.gen_bool(0.5);
    for i in 0..m {
        let rows: Vec<Vec<f64>> = (0..2 * 2 * 81).map(|_| random_row(&mut rng, ks, 0.8)).collect();
        b.output(i, ks, |o, r, t| {
            if structured && ks > 1 {
                let code: usize = t.iter().sum();
                super::protocol::point(ks, (o + 2 * (code % 2)) % ks)
            } else {
                let code = t.iter().fold(0, |acc, &v| acc * 3 + v);
                rows[(o * 2 + r) * 81 + code % 81].clone()
            }
        })?;
    }
    Ok((j, b.build()?))
}

/// Runs the harness. Instances whose achieved ε leaves no room for `η`
/// (`η ≥ 1 − ε`) are skipped by the converse and acceptance-region checks only.
pub fn fuzz(cfg: &FuzzConfig) -> Result<FuzzSummary> {
    let mut s = FuzzSummary::default();
    for idx in 0..cfg.count {
        let (j, p) = random_instance(cfg.seed, idx, false)?;
        s.instances += 1;
        let sec = eval_sk_security(&j, &p)?;
        let mut failed = false;
        if !sec.prop1_holds(1e-12) {
            s.prop1_violations += 1;
            failed = true;
        }
        if sec.key_size > 1 {
            s.keyed_instances += 1;
        }
        if sec.epsilon + cfg.eta >= 1.0 {
            s.skipped += 1;
        } else {
            s.converse_checked += 1;
            if !check_converse(&j, &p, cfg.eta)?.pass {
                s.converse_violations += 1;
                failed = true;
            }
            for pi in enum_partitions(p.num_parties(), 2)? {
                s.lemma1_checked += 1;
                if !lemma1_test(&j, &p, &pi, cfg.eta)?.pass {
                    s.lemma1_violations += 1;
                    failed = true;
                }
            }
        }
        if failed {
            s.failures.push(idx);
        }
    }
    for idx in 0..cfg.independence_count {
        let (j, p) = random_instance(cfg.seed, idx, true)?;
        for pi in enum_partitions(p.num_parties(), 2)? {
            s.independence_checked += 1;
            if !interactive_independence_check(&j, &p, &pi)?.pass {
                s.independence_violations += 1;
            }
        }
    }
    Ok(s)
}
