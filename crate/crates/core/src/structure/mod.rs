//! Maximum common function, minimum sufficient statistic, and set partitions.

mod partition;

pub use partition::{enum_partitions, Partition, MAX_PARTIES};

use crate::error::{param, Result};
use crate::prob::{Alphabet, JointDist, MassFunction};
use serde::Serialize;

/// Default tolerance for grouping conditional rows in [`mss`].
pub const MSS_TOL: f64 = 1e-9;

/// Per-symbol labels for one variable, contiguous from 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeling {
    pub var: String,
    pub labels: Vec<usize>,
    pub num_labels: usize,
    /// Label given to symbols outside the support, if any occur.
    pub off_support: Option<usize>,
}

impl Labeling {
    pub fn alphabet(&self) -> Alphabet {
        Alphabet::range(self.num_labels).expect("labelings have at least one label")
    }

    /// Appends the labeled variable to `j` under `name`.
    pub fn attach(&self, j: &JointDist, name: &str) -> Result<JointDist> {
        j.with_derived(name, &self.var, &self.labels, self.alphabet())
    }

    /// True when both labelings induce the same partition of symbols.
    pub fn same_classes(&self, other: &Labeling) -> bool {
        if self.labels.len() != other.labels.len() {
            return false;
        }
        let mut fwd = std::collections::HashMap::new();
        let mut bwd = std::collections::HashMap::new();
        self.labels.iter().zip(&other.labels).all(|(&a, &b)| {
            *fwd.entry(a).or_insert(b) == b && *bwd.entry(b).or_insert(a) == a
        })
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        Self((0..n).collect())
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Relabels supported nodes by first appearance of their root; unsupported
/// nodes share one extra label after the supported ones.
fn contiguous(uf: &mut UnionFind, nodes: impl Iterator<Item = usize>, supported: &[bool], order: &mut Vec<usize>) -> (Vec<usize>, Option<usize>) {
    let mut labels = Vec::new();
    let mut off = false;
    for (k, node) in nodes.enumerate() {
        if !supported[k] {
            labels.push(usize::MAX);
            off = true;
            continue;
        }
        let r = uf.find(node);
        let l = match order.iter().position(|&x| x == r) {
            Some(l) => l,
            None => {
                order.push(r);
                order.len() - 1
            }
        };
        labels.push(l);
    }
    (labels, off.then_some(usize::MAX))
}

fn finish(var: &str, mut labels: Vec<usize>, off: Option<usize>, supported_labels: usize) -> Labeling {
    let off_support = off.map(|_| supported_labels);
    for l in &mut labels {
        if *l == usize::MAX {
            *l = supported_labels;
        }
    }
    Labeling {
        var: var.to_string(),
        labels,
        num_labels: supported_labels + usize::from(off_support.is_some()),
        off_support,
    }
}

/// Maximum common function of `v1` and `v2`: connected components of the
/// bipartite support graph. Both labelings use the same component numbering.
pub fn mcf(j: &JointDist, v1: &str, v2: &str) -> Result<(Labeling, Labeling)> {
    if v1 == v2 {
        return Err(param("mcf needs two distinct variables"));
    }
    let pair = j.project(&[("a", vec![v1]), ("b", vec![v2])])?;
    let (n1, n2) = (pair.vars()[0].size(), pair.vars()[1].size());
    let mut uf = UnionFind::new(n1 + n2);
    let mut s1 = vec![false; n1];
    let mut s2 = vec![false; n2];
    for a in 0..n1 {
        for b in 0..n2 {
            if pair.pmf()[a * n2 + b] > 0.0 {
                uf.union(a, n1 + b);
                s1[a] = true;
                s2[b] = true;
            }
        }
    }
    let mut order = Vec::new();
    let (l1, o1) = contiguous(&mut uf, 0..n1, &s1, &mut order);
    let (l2, o2) = contiguous(&mut uf, n1..n1 + n2, &s2, &mut order);
    let k = order.len();
    Ok((finish(v1, l1, o1, k), finish(v2, l2, o2, k)))
}

/// Minimum sufficient statistic of `given` for `target`: symbols of `given`
/// whose conditional rows agree within `tol` (sup norm), closed transitively.
pub fn mss(j: &JointDist, given: &str, target: &str, tol: f64) -> Result<Labeling> {
    if given == target {
        let n = j.var(given)?.size();
        let marg = j.marginal(&[given])?;
        let supported: Vec<bool> = marg.pmf().iter().map(|&p| p > 0.0).collect();
        let mut uf = UnionFind::new(n);
        let mut order = Vec::new();
        let (l, o) = contiguous(&mut uf, 0..n, &supported, &mut order);
        return Ok(finish(given, l, o, order.len()));
    }
    if !(tol >= 0.0) {
        return Err(param("mss tolerance must be nonnegative"));
    }
    let cf = j.conditional_family(&[target], &[given])?;
    let n = cf.len();
    let supported: Vec<bool> = (0..n).map(|i| cf.row(i).is_some()).collect();
    let mut uf = UnionFind::new(n);
    for a in 0..n {
        let Some(ra) = cf.row(a) else { continue };
        for b in a + 1..n {
            let Some(rb) = cf.row(b) else { continue };
            let dist = ra.iter().zip(rb).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if dist <= tol {
                uf.union(a, b);
            }
        }
    }
    let mut order = Vec::new();
    let (l, o) = contiguous(&mut uf, 0..n, &supported, &mut order);
    Ok(finish(given, l, o, order.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prob::Var;

    #[test]
    fn mcf_cases() {
        let vars = vec![Var::range("X1", 4).unwrap(), Var::range("X2", 4).unwrap()];
        let mut pmf = vec![0.0; 16];
        for i in 0..4 {
            pmf[i * 4 + i] = 0.25;
        }
        let copy = JointDist::new(vars.clone(), pmf).unwrap();
        let (a, b) = mcf(&copy, "X1", "X2").unwrap();
        assert_eq!(a.num_labels, 4);
        assert_eq!(a.labels, b.labels);

        let ind = JointDist::uniform(vars).unwrap();
        let (a, _) = mcf(&ind, "X1", "X2").unwrap();
        assert_eq!(a.num_labels, 1);

        // X1 = (A,B), X2 = (A,C)
        let abc = JointDist::uniform(vec![
            Var::range("A", 2).unwrap(),
            Var::range("B", 2).unwrap(),
            Var::range("C", 2).unwrap(),
        ])
        .unwrap();
        let g = abc.project(&[("X1", vec!["A", "B"]), ("X2", vec!["A", "C"])]).unwrap();
        let (a, b) = mcf(&g, "X1", "X2").unwrap();
        assert_eq!(a.num_labels, 2);
        assert_eq!(a.labels, vec![0, 0, 1, 1]);
        assert_eq!(b.labels, vec![0, 0, 1, 1]);
    }

    #[test]
    fn mcf_off_support() {
        let j = JointDist::new(
            vec![Var::range("X1", 3).unwrap(), Var::range("X2", 2).unwrap()],
            vec![0.5, 0.0, 0.0, 0.5, 0.0, 0.0],
        )
        .unwrap();
        let (a, b) = mcf(&j, "X1", "X2").unwrap();
        assert_eq!(a.labels, vec![0, 1, 2]);
        assert_eq!(a.off_support, Some(2));
        assert_eq!(b.labels, vec![0, 1]);
        assert_eq!(b.off_support, None);
    }

    #[test]
    fn mss_cases() {
        let vars = vec![Var::range("X1", 3).unwrap(), Var::range("X2", 2).unwrap()];
        let ind = JointDist::uniform(vars.clone()).unwrap();
        assert_eq!(mss(&ind, "X1", "X2", MSS_TOL).unwrap().num_labels, 1);

        let copy = JointDist::new(
            vec![Var::range("X1", 2).unwrap(), Var::range("X2", 2).unwrap()],
            vec![0.5, 0.0, 0.0, 0.5],
        )
        .unwrap();
        assert_eq!(mss(&copy, "X1", "X2", 0.0).unwrap().labels, vec![0, 1]);

        // X1 = (K0,K1), X2 = (B, K_B)
        let mut pmf = vec![0.0; 4 * 4];
        for k in 0..4usize {
            let (k0, k1) = (k >> 1, k & 1);
            for b in 0..2usize {
                let kb = if b == 0 { k0 } else { k1 };
                pmf[k * 4 + b * 2 + kb] += 0.125;
            }
        }
        let ot = JointDist::new(vec![Var::range("X1", 4).unwrap(), Var::range("X2", 4).unwrap()], pmf).unwrap();
        assert_eq!(mss(&ot, "X1", "X2", 0.0).unwrap().labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn mss_transitive_closure() {
        // rows 0.5, 0.5+t, 0.5+2t: chained within t but endpoints 2t apart
        let t = 1e-3;
        let rows = [0.5, 0.5 + t, 0.5 + 2.0 * t];
        let mut pmf = Vec::new();
        for r in rows {
            pmf.push(r / 3.0);
            pmf.push((1.0 - r) / 3.0);
        }
        let j = JointDist::new(vec![Var::range("X1", 3).unwrap(), Var::range("X2", 2).unwrap()], pmf).unwrap();
        assert_eq!(mss(&j, "X1", "X2", 1.5 * t).unwrap().num_labels, 1);
        assert_eq!(mss(&j, "X1", "X2", 0.5 * t).unwrap().num_labels, 3);
    }
}
