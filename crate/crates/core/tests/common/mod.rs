#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skconverse::{JointDist, Var};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pmf with occasional exact zeros.
pub fn random_pmf(rng: &mut ChaCha8Rng, n: usize, zero_prob: f64) -> Vec<f64> {
    loop {
        let w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(zero_prob) { 0.0 } else { rng.gen::<f64>() }).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            return w.into_iter().map(|x| x / s).collect();
        }
    }
}

pub fn dist(pmf: Vec<f64>) -> JointDist {
    let n = pmf.len();
    JointDist::new(vec![Var::range("X", n).unwrap()], pmf).unwrap()
}

/// β_ε by brute force: the optimal randomized test accepts a set `S` and at
/// most one further point fractionally.
pub fn beta_oracle(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let n = p.len();
    let target = 1.0 - eps;
    let mut best = f64::INFINITY;
    for mask in 0u32..1 << n {
        let (ps, qs) = (0..n).filter(|i| mask >> i & 1 == 1).fold((0.0, 0.0), |(a, b), i| (a + p[i], b + q[i]));
        if ps >= target - 1e-15 {
            best = best.min(qs);
            continue;
        }
        for x in (0..n).filter(|i| mask >> i & 1 == 0) {
            if p[x] > 0.0 && ps + p[x] >= target {
                best = best.min(qs + q[x] * (target - ps) / p[x]);
            }
        }
    }
    best
}

/// Smooth min-entropy by bisection on the cap λ: smallest λ with
/// Σ (p − λ)⁺ ≤ 2ε.
pub fn h_min_smooth_oracle(p: &[f64], eps: f64) -> f64 {
    let excess = |l: f64| p.iter().map(|&x| (x - l).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, p.iter().cloned().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= 2.0 * eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    -hi.log2()
}

/// Smooth max-divergence by bisection on the ratio cap t: smallest t with
/// Σ min(p, t·q) ≥ 1 − ε.
pub fn d_max_smooth_oracle(p: &[f64], q: &[f64], eps: f64) -> f64 {
    let kept = |t: f64| p.iter().zip(q).map(|(&a, &b)| a.min(t * b)).sum::<f64>();
    if kept(f64::MAX) < 1.0 - eps {
        return f64::INFINITY;
    }
    let mut hi = p.iter().zip(q).filter(|(_, &b)| b > 0.0).map(|(&a, &b)| a / b).fold(0.0, f64::max);
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kept(mid) >= 1.0 - eps {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi.log2()
}

/// Random row-stochastic matrix, `rows × cols`, flattened.
pub fn random_channel(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Vec<f64> {
    (0..rows).flat_map(|_| random_pmf(rng, cols, 0.3)).collect()
}
