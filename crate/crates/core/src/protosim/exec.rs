//! Exact enumeration of protocol executions.

use super::protocol::{Layout, Protocol};
use crate::error::Result;
use crate::prob::{JointDist, MassFunction};
use std::collections::BTreeMap;

/// One joint outcome. `u` and `k` are mixed-radix over parties (party 1 most
/// significant); `f` is the transcript index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub x: usize,
    pub u: usize,
    pub f: usize,
    pub k: usize,
    pub p: f64,
}

/// Every positive-probability outcome of running a protocol on a source.
#[derive(Debug, Clone)]
pub struct Execution {
    pub layout: Layout,
    pub states: Vec<State>,
    assignments: Vec<Vec<usize>>,
}

impl Execution {
    pub fn run(j: &JointDist, proto: &Protocol) -> Result<Self> {
        let layout = proto.layout(j)?;
        let m = layout.parties();
        let rshape = layout.rand_shape();
        let kshape = layout.out_shape();
        let msgs: Vec<&[f64]> = proto.messages().map(|s| s.table.as_slice()).collect();
        let mut states = Vec::new();
        let assignments: Vec<Vec<usize>> = (0..j.len()).map(|i| layout.shape.decode(i)).collect();
        let mut obs = vec![0usize; m];
        let mut rand = vec![0usize; m];
        for (x, &px) in j.pmf().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            for (i, o) in obs.iter_mut().enumerate() {
                *o = layout.obs(&assignments[x], i);
            }
            for u in 0..rshape.len() {
                let mut pu = px;
                let mut rem = u;
                for i in (0..m).rev() {
                    let r = layout.rand_size[i];
                    rand[i] = rem % r;
                    rem /= r;
                    pu *= proto.parties[i].randomness[rand[i]];
                }
                if pu == 0.0 {
                    continue;
                }
                let mut stack = vec![(0usize, 0usize, pu)];
                while let Some((t, prefix, p)) = stack.pop() {
                    if t == layout.msgs.len() {
                        expand_outputs(proto, &layout, &kshape, &obs, &rand, x, u, prefix, p, &mut states);
                        continue;
                    }
                    let (s, a, psize) = layout.msgs[t];
                    let row = ((obs[s] * layout.rand_size[s] + rand[s]) * psize + prefix) * a;
                    for (v, &w) in msgs[t][row..row + a].iter().enumerate().rev() {
                        if w > 0.0 {
                            stack.push((t + 1, prefix * a + v, p * w));
                        }
                    }
                }
            }
        }
        Ok(Self { layout, states, assignments })
    }

    pub fn assignment(&self, x: usize) -> &[usize] {
        &self.assignments[x]
    }

    pub fn obs(&self, s: &State, party: usize) -> usize {
        self.layout.obs(&self.assignments[s.x], party)
    }

    pub fn eve(&self, s: &State) -> usize {
        self.layout.eve(&self.assignments[s.x])
    }

    pub fn rand(&self, s: &State, party: usize) -> usize {
        self.layout.rand_shape().decode(s.u)[party]
    }

    pub fn key(&self, s: &State, party: usize) -> usize {
        self.layout.out_shape().decode(s.k)[party]
    }

    /// Joint law of an arbitrary statistic of the outcome.
    pub fn law<K: Ord>(&self, key: impl Fn(&State) -> K) -> BTreeMap<K, f64> {
        let mut out = BTreeMap::new();
        for s in &self.states {
            *out.entry(key(s)).or_insert(0.0) += s.p;
        }
        out
    }

    pub fn prob(&self, pred: impl Fn(&State) -> bool) -> f64 {
        self.states.iter().filter(|s| pred(s)).map(|s| s.p).sum()
    }
}

#[allow(clippy::too_many_arguments)]
fn expand_outputs(
    proto: &Protocol,
    layout: &Layout,
    kshape: &crate::prob::Shape,
    obs: &[usize],
    rand: &[usize],
    x: usize,
    u: usize,
    f: usize,
    p: f64,
    states: &mut Vec<State>,
) {
    let rows: Vec<&[f64]> = (0..obs.len())
        .map(|i| {
            let a = layout.out_size[i];
            let r = ((obs[i] * layout.rand_size[i] + rand[i]) * layout.f_size + f) * a;
            &proto.outputs[i].table[r..r + a]
        })
        .collect();
    for k in 0..kshape.len() {
        let ks = kshape.decode(k);
        let mut pk = p;
        for (row, &v) in rows.iter().zip(&ks) {
            pk *= row[v];
            if pk == 0.0 {
                break;
            }
        }
        if pk > 0.0 {
            states.push(State { x, u, f, k, p: pk });
        }
    }
}

/// Total-variation distance between a joint law on `(a, b)` and the product of
/// its marginals, or of a fixed marginal for `a` when `a_law` is given.
pub(crate) fn product_distance<A: Ord + Clone, B: Ord + Clone>(
    joint: &BTreeMap<(A, B), f64>,
    a_law: Option<&BTreeMap<A, f64>>,
) -> f64 {
    let mut pa: BTreeMap<A, f64> = BTreeMap::new();
    let mut pb: BTreeMap<B, f64> = BTreeMap::new();
    for ((a, b), &p) in joint {
        *pa.entry(a.clone()).or_insert(0.0) += p;
        *pb.entry(b.clone()).or_insert(0.0) += p;
    }
    let pa = a_law.cloned().unwrap_or(pa);
    let mut d = 0.0;
    for (a, &qa) in &pa {
        for (b, &qb) in &pb {
            let p = joint.get(&(a.clone(), b.clone())).copied().unwrap_or(0.0);
            d += (p - qa * qb).abs();
        }
    }
    // mass of `a` values outside the reference marginal
    for ((a, _), &p) in joint {
        if !pa.contains_key(a) {
            d += p;
        }
    }
    0.5 * d
}
