//! Type classes of IID sequences over a finite alphabet.

use crate::error::{Error, Result};
use crate::numeric::log2_multinomial;

/// Empirical type with the log-size of its class.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeClass {
    pub counts: Vec<u64>,
    pub log2_size: f64,
}

/// Number of compositions of `n` into `k` nonnegative parts, saturating.
pub fn type_count(k: usize, n: u64) -> u128 {
    // C(n + k - 1, k - 1)
    let mut c: u128 = 1;
    for i in 1..k as u128 {
        c = c.saturating_mul(n as u128 + i) / i;
    }
    c
}

/// All types of length-`n` sequences over `k` symbols, in lexicographic order of counts.
pub fn enumerate_types(k: usize, n: u64, cap: usize) -> Result<Vec<TypeClass>> {
    if k == 0 {
        return Err(Error::EmptyAlphabet);
    }
    let count = type_count(k, n);
    if count > cap as u128 {
        return Err(Error::CapExceeded { size: count, cap });
    }
    let mut out = Vec::with_capacity(count as usize);
    let mut counts = vec![0u64; k];
    fn rec(pos: usize, left: u64, counts: &mut Vec<u64>, out: &mut Vec<TypeClass>) {
        let k = counts.len();
        if pos == k - 1 {
            counts[pos] = left;
            out.push(TypeClass { log2_size: log2_multinomial(counts), counts: counts.clone() });
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, out);
        }
    }
    rec(0, n, &mut counts, &mut out);
    Ok(out)
}

/// log2 of the per-sequence probability of a type under `p`.
pub fn log2_seq_prob(counts: &[u64], p: &[f64]) -> f64 {
    let mut s = 0.0;
    for (&c, &pi) in counts.iter().zip(p) {
        if c == 0 {
            continue;
        }
        if pi == 0.0 {
            return f64::NEG_INFINITY;
        }
        s += c as f64 * pi.log2();
    }
    s
}

/// Class masses under the IID extensions of `p` and `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMass {
    pub index: usize,
    pub log2_p: f64,
    pub log2_q: f64,
}

impl ClassMass {
    /// Per-sequence log-likelihood ratio (equal to the class ratio).
    pub fn log2_ratio(&self) -> f64 {
        if self.log2_p == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else if self.log2_q == f64::NEG_INFINITY {
            f64::INFINITY
        } else {
            self.log2_p - self.log2_q
        }
    }
}

pub fn class_masses(p: &[f64], q: &[f64], n: u64, cap: usize) -> Result<Vec<ClassMass>> {
    let types = enumerate_types(p.len(), n, cap)?;
    Ok(types
        .iter()
        .enumerate()
        .map(|(index, t)| ClassMass {
            index,
            log2_p: t.log2_size + log2_seq_prob(&t.counts, p),
            log2_q: t.log2_size + log2_seq_prob(&t.counts, q),
        })
        .collect())
}
