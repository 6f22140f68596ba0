//! Small numeric helpers shared across modules. Everything is base 2.

use serde::Serializer;

/// `x log2 x` with the convention `0 log 0 = 0`.
pub fn xlog2x(x: f64) -> f64 {
    if x > 0.0 {
        x * x.log2()
    } else {
        0.0
    }
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    -xlog2x(p) - xlog2x(1.0 - p)
}

/// `log2(2^a + 2^b)` without overflow or underflow.
pub fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

/// `log2 Σ 2^{x_i}`.
pub fn log2_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let xs: Vec<f64> = xs.into_iter().collect();
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi.is_infinite() {
        return hi;
    }
    let s: f64 = xs.iter().map(|x| (x - hi).exp2()).sum();
    hi + s.log2()
}

/// `log2 n!`.
pub fn log2_factorial(n: u64) -> f64 {
    statrs::function::gamma::ln_gamma(n as f64 + 1.0) / std::f64::consts::LN_2
}

/// `log2` of the multinomial coefficient `n! / Π counts_i!`.
pub fn log2_multinomial(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    log2_factorial(n) - counts.iter().map(|&c| log2_factorial(c)).sum::<f64>()
}

/// Serializes non-finite values as the strings `"inf"`, `"-inf"`, `"nan"`;
/// JSON has no representation for them.
pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_str("nan")
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

pub fn ser_f64_map<S: Serializer>(
    m: &std::collections::BTreeMap<String, f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &Real(*v))?;
    }
    map.end()
}

pub fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ser_f64(x, s),
        None => s.serialize_none(),
    }
}

/// f64 wrapper whose serialization tolerates infinities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl serde::Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ser_f64(&self.0, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_matches_linear() {
        let xs = [-3.0, -1.5, 0.25];
        let lin: f64 = xs.iter().map(|x: &f64| x.exp2()).sum();
        assert!((log2_sum(xs) - lin.log2()).abs() < 1e-14);
        assert!((log2_add(-3.0, 0.25) - (0.125f64 + 0.25f64.exp2()).log2()).abs() < 1e-14);
        assert_eq!(log2_sum([f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn multinomial_small() {
        // 4! / (2! 1! 1!) = 12
        assert!((log2_multinomial(&[2, 1, 1]) - 12f64.log2()).abs() < 1e-12);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
    }
}
