use super::{JointDist, MassFunction};
use crate::error::{param, Error, Result};
use crate::numeric::{log2_sum, xlog2x};
use serde::{Deserialize, Serialize};

fn check_shape(p: &(impl MassFunction + ?Sized), q: &(impl MassFunction + ?Sized)) -> Result<()> {
    let (a, b) = (p.shape(), q.shape());
    if a.sizes() != b.sizes() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", a.sizes(), b.sizes())));
    }
    Ok(())
}

/// Half the L1 distance.
pub fn tv_distance(p: &impl MassFunction, q: &impl MassFunction) -> Result<f64> {
    check_shape(p, q)?;
    Ok(0.5 * p.pmf().iter().zip(q.pmf()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Divergence {
    Kl,
    Renyi(f64),
}

/// Divergence in bits; `+∞` when the support condition fails.
pub fn divergence(p: &JointDist, q: &JointDist, kind: Divergence) -> Result<f64> {
    check_shape(p, q)?;
    divergence_raw(p.pmf(), q.pmf(), kind)
}

pub(crate) fn divergence_raw(p: &[f64], q: &[f64], kind: Divergence) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::ShapeMismatch(format!("{} vs {}", p.len(), q.len())));
    }
    match kind {
        Divergence::Kl => {
            let mut d = 0.0;
            for (&a, &b) in p.iter().zip(q) {
                if a > 0.0 {
                    if b == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    d += a * (a / b).log2();
                }
            }
            Ok(d.max(0.0))
        }
        Divergence::Renyi(alpha) => {
            if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
                return Err(param(format!("Rényi order must be positive and not 1, got {alpha}")));
            }
            let mut terms = Vec::with_capacity(p.len());
            for (&a, &b) in p.iter().zip(q) {
                if a == 0.0 {
                    continue;
                }
                if b == 0.0 {
                    if alpha > 1.0 {
                        return Ok(f64::INFINITY);
                    }
                    continue;
                }
                terms.push(alpha * a.log2() + (1.0 - alpha) * b.log2());
            }
            if terms.is_empty() {
                return Ok(f64::INFINITY);
            }
            Ok(log2_sum(terms) / (alpha - 1.0))
        }
    }
}

/// Shannon entropy of the joint of `s`, in bits.
pub fn entropy(j: &JointDist, s: &[&str]) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    Ok(-j.marginal(s)?.pmf().iter().map(|&p| xlog2x(p)).sum::<f64>())
}

fn union<'a>(sets: &[&[&'a str]]) -> Vec<&'a str> {
    sets.iter().flat_map(|s| s.iter().copied()).collect()
}

fn check_disjoint(sets: &[&[&str]]) -> Result<()> {
    let all = union(sets);
    let mut seen = std::collections::HashSet::new();
    for n in all {
        if !seen.insert(n) {
            return Err(param(format!("variable `{n}` appears in more than one argument set")));
        }
    }
    Ok(())
}

pub fn mutual_information(j: &JointDist, s: &[&str], t: &[&str]) -> Result<f64> {
    conditional_mutual_information(j, s, t, &[])
}

/// `I(S;T|U) = H(SU) + H(TU) − H(STU) − H(U)`, clamped at zero against rounding.
pub fn conditional_mutual_information(j: &JointDist, s: &[&str], t: &[&str], u: &[&str]) -> Result<f64> {
    if s.is_empty() || t.is_empty() {
        return Err(param("mutual information needs nonempty argument sets"));
    }
    if s == t && u.is_empty() {
        return entropy(j, s);
    }
    check_disjoint(&[s, t, u])?;
    let v = entropy(j, &union(&[s, u]))? + entropy(j, &union(&[t, u]))?
        - entropy(j, &union(&[s, t, u]))?
        - entropy(j, u)?;
    Ok(v.max(0.0))
}

/// Information query over named variable sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InfoQuery {
    Entropy(Vec<String>),
    Mutual(Vec<String>, Vec<String>),
    ConditionalMutual(Vec<String>, Vec<String>, Vec<String>),
}

pub fn info_measure(j: &JointDist, query: &InfoQuery) -> Result<f64> {
    fn refs(v: &[String]) -> Vec<&str> {
        v.iter().map(String::as_str).collect()
    }
    match query {
        InfoQuery::Entropy(s) => entropy(j, &refs(s)),
        InfoQuery::Mutual(s, t) => mutual_information(j, &refs(s), &refs(t)),
        InfoQuery::ConditionalMutual(s, t, u) => conditional_mutual_information(j, &refs(s), &refs(t), &refs(u)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::binary_entropy;
    use crate::prob::Var;

    fn ber(p1: f64) -> JointDist {
        JointDist::from_probs("X", vec![1.0 - p1, p1]).unwrap()
    }

    #[test]
    fn tv_examples() {
        let p = ber(0.3);
        assert_eq!(tv_distance(&p, &p).unwrap(), 0.0);
        assert_eq!(tv_distance(&ber(0.0), &ber(1.0)).unwrap(), 1.0);
        assert!((tv_distance(&ber(0.3), &ber(0.5)).unwrap() - 0.2).abs() < 1e-15);
        let q = JointDist::from_probs("X", vec![0.2, 0.3, 0.5]).unwrap();
        assert!(matches!(tv_distance(&p, &q), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn divergence_examples() {
        let p = ber(0.3);
        assert_eq!(divergence(&p, &p, Divergence::Kl).unwrap(), 0.0);
        let d = divergence(&ber(0.3), &ber(0.5), Divergence::Kl).unwrap();
        let closed = 1.0 - binary_entropy(0.3);
        assert!((d - closed).abs() < 1e-14);
        assert!((d - 0.11870).abs() < 1e-5);
        let r = divergence(&ber(0.3), &ber(0.5), Divergence::Renyi(1.0 + 1e-4)).unwrap();
        assert!((r - d).abs() < 1e-3);
        assert_eq!(divergence(&ber(0.3), &ber(0.0), Divergence::Kl).unwrap(), f64::INFINITY);
        assert!(divergence(&p, &p, Divergence::Renyi(1.0)).is_err());
    }

    #[test]
    fn info_examples() {
        let u = JointDist::uniform(vec![Var::range("X", 2).unwrap()]).unwrap();
        assert!((entropy(&u, &["X"]).unwrap() - 1.0).abs() < 1e-15);
        let p = 0.11;
        let dsbs = JointDist::new(
            vec![Var::range("X1", 2).unwrap(), Var::range("X2", 2).unwrap()],
            vec![(1.0 - p) / 2.0, p / 2.0, p / 2.0, (1.0 - p) / 2.0],
        )
        .unwrap();
        let i = mutual_information(&dsbs, &["X1"], &["X2"]).unwrap();
        assert!((i - (1.0 - binary_entropy(p))).abs() < 1e-12);
        assert!((i - 0.50016).abs() < 1e-4);
        let ixx = mutual_information(&dsbs, &["X1"], &["X1"]).unwrap();
        assert!((ixx - 1.0).abs() < 1e-12);
        let q = InfoQuery::ConditionalMutual(vec!["X1".into()], vec!["X2".into()], vec![]);
        assert!((info_measure(&dsbs, &q).unwrap() - i).abs() < 1e-15);
        assert!(entropy(&dsbs, &["W"]).is_err());
    }
}
