//! Privacy amplification with Toeplitz hashing.

use crate::error::{param, Result};
use crate::numeric::ser_f64;
use crate::prob::{JointDist, MassFunction};
use crate::smooth::{h_min_cond, h_min_smooth};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Number of seeds tried by [`leftover_hash`].
pub const SEED_TRIALS: u64 = 64;

/// `out_len × in_len` binary Toeplitz matrix, `T[i][j] = t[i − j + in_len − 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toeplitz {
    pub out_len: usize,
    pub in_len: usize,
    pub diag: Vec<u8>,
}

impl Toeplitz {
    pub fn from_seed(out_len: usize, in_len: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = (out_len + in_len).saturating_sub(1);
        Self { out_len, in_len, diag: (0..n).map(|_| rng.gen_range(0..2u8)).collect() }
    }

    pub fn entry(&self, i: usize, j: usize) -> u8 {
        self.diag[i + self.in_len - 1 - j]
    }

    /// Hash of `x`, read MSB-first as an `in_len`-bit vector.
    pub fn apply(&self, x: usize) -> usize {
        let mut out = 0;
        for i in 0..self.out_len {
            let mut bit = 0u8;
            for j in 0..self.in_len {
                bit ^= self.entry(i, j) & ((x >> (self.in_len - 1 - j)) & 1) as u8;
            }
            out = (out << 1) | bit as usize;
        }
        out
    }

    /// GF(2) rank.
    pub fn rank(&self) -> usize {
        let mut rows: Vec<u64> = (0..self.out_len)
            .map(|i| (0..self.in_len).fold(0u64, |acc, j| (acc << 1) | self.entry(i, j) as u64))
            .collect();
        let mut rank = 0;
        for col in (0..self.in_len).rev() {
            let bit = 1u64 << col;
            if let Some(p) = (rank..rows.len()).find(|&r| rows[r] & bit != 0) {
                rows.swap(rank, p);
                for r in 0..rows.len() {
                    if r != rank && rows[r] & bit != 0 {
                        rows[r] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}

/// Bits needed to index `n` symbols.
pub fn bit_len(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as usize
}

fn xy_tables(j: &JointDist, x: &[&str], y: &[&str]) -> Result<(usize, usize, Vec<f64>)> {
    let xs: Vec<usize> = x.iter().map(|n| j.var_index(n)).collect::<Result<_>>()?;
    let ys: Vec<usize> = y.iter().map(|n| j.var_index(n)).collect::<Result<_>>()?;
    if xs.is_empty() {
        return Err(param("X must name at least one variable"));
    }
    let xsize: usize = xs.iter().map(|&p| j.vars()[p].size()).product();
    let ysize: usize = ys.iter().map(|&p| j.vars()[p].size()).product();
    let shape = j.shape();
    let mut tab = vec![0.0; xsize * ysize];
    for (i, &p) in j.pmf().iter().enumerate() {
        let a = shape.decode(i);
        tab[shape.sub_index(&a, &xs) * ysize + shape.sub_index(&a, &ys)] += p;
    }
    Ok((xsize, ysize, tab))
}

/// `d(P_{K Y}, P_unif × P_Y)` for `K = T(X)`.
pub fn hash_distance(j: &JointDist, x: &[&str], y: &[&str], t: &Toeplitz) -> Result<f64> {
    let (xsize, ysize, tab) = xy_tables(j, x, y)?;
    let ksize = 1usize << t.out_len;
    let mut pky = vec![0.0; ksize * ysize];
    let mut py = vec![0.0; ysize];
    for xi in 0..xsize {
        let k = t.apply(xi);
        for yi in 0..ysize {
            let p = tab[xi * ysize + yi];
            pky[k * ysize + yi] += p;
            py[yi] += p;
        }
    }
    let u = 1.0 / ksize as f64;
    Ok(0.5 * pky.iter().enumerate().map(|(i, &p)| (p - u * py[i % ysize]).abs()).sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HashReport {
    #[serde(serialize_with = "ser_f64")]
    pub h_min: f64,
    pub in_len: usize,
    pub out_len: usize,
    pub seed: u64,
    #[serde(serialize_with = "ser_f64")]
    pub distance: f64,
    #[serde(serialize_with = "ser_f64")]
    pub target: f64,
    pub pass: bool,
}

/// Smooth conditional min-entropy. Smoothing (`eps > 0`) is supported only for
/// trivial side information: `y` empty or a single symbol.
pub fn conditional_h_min(j: &JointDist, x: &[&str], y: &[&str], eps: f64) -> Result<f64> {
    let ysize: usize = y.iter().map(|n| j.var(n).map(|v| v.size())).product::<Result<usize>>()?;
    if eps == 0.0 {
        return h_min_cond(j, x, y);
    }
    if ysize != 1 {
        return Err(param("smoothed conditional min-entropy needs trivial side information; use eps = 0"));
    }
    Ok(h_min_smooth(&j.marginal(x)?, eps)?.value)
}

/// Extracts `floor(H_min^ε(X|Y) − 2 log(1/2η))` bits from `X` and reports the
/// best of [`SEED_TRIALS`] Toeplitz seeds against the target `2ε + η`.
pub fn leftover_hash(j: &JointDist, x: &[&str], y: &[&str], eps: f64, eta: f64, base_seed: u64) -> Result<HashReport> {
    if !(eta > 0.0) {
        return Err(param(format!("η must be positive, got {eta}")));
    }
    if !(eps >= 0.0) {
        return Err(param(format!("ε must be nonnegative, got {eps}")));
    }
    let h = conditional_h_min(j, x, y, eps)?;
    let xsize: usize = x.iter().map(|n| j.var(n).map(|v| v.size())).product::<Result<usize>>()?;
    let in_len = bit_len(xsize);
    let raw = (h - 2.0 * (1.0 / (2.0 * eta)).log2()).floor();
    let out_len = if raw > 0.0 { (raw as usize).min(in_len) } else { 0 };
    let mut best = (f64::INFINITY, base_seed);
    for s in 0..SEED_TRIALS {
        let seed = base_seed.wrapping_add(s);
        let d = hash_distance(j, x, y, &Toeplitz::from_seed(out_len, in_len, seed))?;
        if d < best.0 {
            best = (d, seed);
        }
    }
    let target = 2.0 * eps + eta;
    Ok(HashReport { h_min: h, in_len, out_len, seed: best.1, distance: best.0, target, pass: best.0 <= target + 1e-12 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_lengths() {
        assert_eq!(bit_len(1), 0);
        assert_eq!(bit_len(2), 1);
        assert_eq!(bit_len(5), 3);
        assert_eq!(bit_len(16), 4);
    }

    #[test]
    fn full_rank_seed_is_perfect_on_uniform() {
        let j = JointDist::from_probs("X", vec![1.0 / 8.0; 8]).unwrap();
        let mut found = 0;
        for seed in 0..32 {
            let t = Toeplitz::from_seed(3, 3, seed);
            if t.rank() == 3 {
                found += 1;
                assert!(hash_distance(&j, &["X"], &[], &t).unwrap() < 1e-15);
            } else {
                assert!(hash_distance(&j, &["X"], &[], &t).unwrap() > 0.1);
            }
        }
        assert!(found > 0);
    }
}
