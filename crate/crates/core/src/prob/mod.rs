//! Finite-alphabet joint distributions.
//!
//! A [`JointDist`] is a dense pmf over the product of named finite alphabets,
//! stored in row-major order (the last variable varies fastest). Every
//! operation returns a new value; nothing is mutated after construction.

mod info;
mod io;

pub use info::{
    conditional_mutual_information, divergence, entropy, info_measure, mutual_information,
    tv_distance, Divergence, InfoQuery,
};
pub use io::DistFile;

use crate::error::{Error, Result};
use crate::structure::Partition;
use std::collections::HashSet;

/// Default cap on dense state spaces (number of pmf entries).
pub const DEFAULT_CAP: usize = 10_000_000;

/// Tolerance on the total mass of a normalized pmf.
pub const NORM_TOL: f64 = 1e-9;

/// Ordered list of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(s.as_str()) {
                return Err(Error::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// Symbols `"0"`, `"1"`, ..., `"n-1"`.
    pub fn range(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn symbol(&self, i: usize) -> &str {
        &self.symbols[i]
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        self.symbols.iter().position(|x| x == s)
    }
}

/// A named variable with its alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Var {
    pub name: String,
    pub alphabet: Alphabet,
}

impl Var {
    pub fn new(name: impl Into<String>, alphabet: Alphabet) -> Self {
        Self { name: name.into(), alphabet }
    }

    /// Variable with symbols `"0".."n-1"`.
    pub fn range(name: impl Into<String>, n: usize) -> Result<Self> {
        Ok(Self::new(name, Alphabet::range(n)?))
    }

    pub fn size(&self) -> usize {
        self.alphabet.len()
    }
}

/// Row-major index arithmetic over a product alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shape {
    sizes: Vec<usize>,
    strides: Vec<usize>,
}

impl Shape {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut strides = vec![1; sizes.len()];
        for i in (0..sizes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * sizes[i + 1];
        }
        Self { sizes, strides }
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn encode(&self, assignment: &[usize]) -> usize {
        assignment.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.sizes.len()];
        for (i, s) in self.strides.iter().enumerate() {
            out[i] = index / s;
            index %= s;
        }
        out
    }

    /// Flat index of the sub-assignment picked out by `positions`.
    pub fn sub_index(&self, assignment: &[usize], positions: &[usize]) -> usize {
        positions.iter().fold(0, |acc, &p| acc * self.sizes[p] + assignment[p])
    }
}

pub(crate) fn checked_product(sizes: impl IntoIterator<Item = usize>, cap: usize) -> Result<usize> {
    let mut size: u128 = 1;
    for s in sizes {
        size = size.saturating_mul(s as u128);
    }
    if size > cap as u128 {
        return Err(Error::CapExceeded { size, cap });
    }
    Ok(size as usize)
}

/// Common read access to normalized and subnormalized mass functions.
pub trait MassFunction {
    fn vars(&self) -> &[Var];
    fn pmf(&self) -> &[f64];

    fn total_mass(&self) -> f64 {
        self.pmf().iter().sum()
    }

    fn shape(&self) -> Shape {
        Shape::new(self.vars().iter().map(Var::size).collect())
    }

    fn var_names(&self) -> Vec<&str> {
        self.vars().iter().map(|v| v.name.as_str()).collect()
    }
}

fn validate_vars(vars: &[Var]) -> Result<()> {
    let mut seen = HashSet::new();
    for v in vars {
        if !seen.insert(v.name.as_str()) {
            return Err(Error::DuplicateVariable(v.name.clone()));
        }
    }
    Ok(())
}

fn validate_entries(vars: &[Var], pmf: &[f64]) -> Result<()> {
    validate_vars(vars)?;
    let expected: usize = vars.iter().map(Var::size).product();
    if pmf.len() != expected {
        return Err(Error::PmfLength { expected, got: pmf.len() });
    }
    for (index, &value) in pmf.iter().enumerate() {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeMass { index, value });
        }
    }
    Ok(())
}

/// Normalized pmf over a named product alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    vars: Vec<Var>,
    pmf: Vec<f64>,
}

impl MassFunction for JointDist {
    fn vars(&self) -> &[Var] {
        &self.vars
    }
    fn pmf(&self) -> &[f64] {
        &self.pmf
    }
}

impl JointDist {
    pub fn new(vars: Vec<Var>, pmf: Vec<f64>) -> Result<Self> {
        validate_entries(&vars, &pmf)?;
        let total: f64 = pmf.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(total));
        }
        Ok(Self { vars, pmf })
    }

    /// Divides nonnegative weights by their sum.
    pub fn normalized(vars: Vec<Var>, weights: Vec<f64>) -> Result<Self> {
        validate_entries(&vars, &weights)?;
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Self::new(vars, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(vars: Vec<Var>) -> Result<Self> {
        let n: usize = vars.iter().map(Var::size).product();
        Self::new(vars, vec![1.0 / n as f64; n])
    }

    /// Single variable with symbols `"0".."n-1"`.
    pub fn from_probs(name: &str, probs: Vec<f64>) -> Result<Self> {
        Self::new(vec![Var::range(name, probs.len())?], probs)
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn var(&self, name: &str) -> Result<&Var> {
        Ok(&self.vars[self.var_index(name)?])
    }

    fn indices(&self, names: &[&str]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.var_index(n)).collect()
    }

    pub fn prob(&self, assignment: &[usize]) -> f64 {
        self.pmf[self.shape().encode(assignment)]
    }

    pub fn into_sub(self) -> SubDist {
        SubDist { vars: self.vars, pmf: self.pmf }
    }

    pub fn approx_eq(&self, other: &JointDist, tol: f64) -> bool {
        self.vars == other.vars
            && self.pmf.iter().zip(&other.pmf).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// Sums out every variable not in `keep`; kept variables stay in their original order.
    pub fn marginal(&self, keep: &[&str]) -> Result<JointDist> {
        if keep.is_empty() {
            return Err(Error::Parameter("marginal needs at least one variable".into()));
        }
        let mut pos = self.indices(keep)?;
        pos.sort_unstable();
        pos.dedup();
        let shape = self.shape();
        let vars: Vec<Var> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let out_len: usize = vars.iter().map(Var::size).product();
        let mut pmf = vec![0.0; out_len];
        for (i, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = shape.decode(i);
            pmf[shape.sub_index(&a, &pos)] += p;
        }
        Ok(JointDist { vars, pmf })
    }

    /// Marginal mass of a subset of variables as a flat table (scalar 1 for the empty set).
    pub(crate) fn marginal_table(&self, positions: &[usize]) -> Vec<f64> {
        let shape = self.shape();
        let len: usize = positions.iter().map(|&p| self.vars[p].size()).product();
        let mut out = vec![0.0; len];
        for (i, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = shape.decode(i);
            out[shape.sub_index(&a, positions)] += p;
        }
        out
    }

    /// Conditional pmf rows of `targets` given `given`. Rows for zero-probability
    /// conditioning assignments are omitted.
    pub fn conditional_family(&self, targets: &[&str], given: &[&str]) -> Result<ConditionalFamily> {
        let t = self.indices(targets)?;
        let g = self.indices(given)?;
        if t.is_empty() {
            return Err(Error::Parameter("conditional_family needs target variables".into()));
        }
        if t.iter().any(|x| g.contains(x)) {
            return Err(Error::Parameter("targets and given must be disjoint".into()));
        }
        let shape = self.shape();
        let tsize: usize = t.iter().map(|&p| self.vars[p].size()).product();
        let gsize: usize = g.iter().map(|&p| self.vars[p].size()).product();
        let mut joint = vec![0.0; gsize * tsize];
        for (i, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = shape.decode(i);
            joint[shape.sub_index(&a, &g) * tsize + shape.sub_index(&a, &t)] += p;
        }
        let mut rows = Vec::with_capacity(gsize);
        let mut omitted = Vec::new();
        for gi in 0..gsize {
            let row = &joint[gi * tsize..(gi + 1) * tsize];
            let mass: f64 = row.iter().sum();
            if mass > 0.0 {
                rows.push(Some(row.iter().map(|x| x / mass).collect()));
            } else {
                rows.push(None);
                omitted.push(gi);
            }
        }
        if omitted.len() == gsize {
            return Err(Error::ZeroConditioning);
        }
        Ok(ConditionalFamily {
            targets: t.iter().map(|&p| self.vars[p].clone()).collect(),
            given: g.iter().map(|&p| self.vars[p].clone()).collect(),
            rows,
            omitted,
        })
    }

    /// Positions of the non-conditioning ("party") variables, in order.
    pub fn party_positions(&self, z: &[&str]) -> Result<Vec<usize>> {
        let zpos = self.indices(z)?;
        Ok((0..self.vars.len()).filter(|p| !zpos.contains(p)).collect())
    }

    /// The distribution `Q(x, z) = P(z) Π_i P(x_{π_i} | z)` that renders the
    /// blocks of `pi` conditionally independent given `z` (unconditionally when
    /// `z` is empty). Parties are the non-`z` variables in their stored order.
    pub fn conditional_product(&self, pi: &Partition, z: &[&str]) -> Result<JointDist> {
        let zpos = self.indices(z)?;
        let parties = self.party_positions(z)?;
        pi.validate(parties.len())?;
        let shape = self.shape();
        let ztab = self.marginal_table(&zpos);
        let blocks: Vec<Vec<usize>> = pi
            .blocks()
            .iter()
            .map(|b| {
                let mut v: Vec<usize> = b.iter().map(|&i| parties[i]).collect();
                v.extend(&zpos);
                v.sort_unstable();
                v
            })
            .collect();
        let tabs: Vec<Vec<f64>> = blocks.iter().map(|b| self.marginal_table(b)).collect();
        let k = blocks.len() as i32;
        let mut pmf = vec![0.0; self.pmf.len()];
        for (i, q) in pmf.iter_mut().enumerate() {
            let a = shape.decode(i);
            let pz = ztab[shape.sub_index(&a, &zpos)];
            if pz == 0.0 {
                continue;
            }
            let mut v = 1.0;
            for (b, tab) in blocks.iter().zip(&tabs) {
                v *= tab[shape.sub_index(&a, b)];
                if v == 0.0 {
                    break;
                }
            }
            *q = v / pz.powi(k - 1);
        }
        Ok(JointDist { vars: self.vars.clone(), pmf })
    }

    /// Largest elementwise deviation between `self` and its own conditional product;
    /// zero exactly when `self` lies in the factorizing family for `pi` given `z`.
    pub fn factorization_gap(&self, pi: &Partition, z: &[&str]) -> Result<f64> {
        let q = self.conditional_product(pi, z)?;
        Ok(self.pmf.iter().zip(&q.pmf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// `n`-fold product with variables renamed `name_1, ..., name_n` (copy-major order).
    pub fn iid_extend(&self, n: usize) -> Result<JointDist> {
        self.iid_extend_capped(n, DEFAULT_CAP)
    }

    pub fn iid_extend_capped(&self, n: usize, cap: usize) -> Result<JointDist> {
        if n == 0 {
            return Err(Error::Parameter("iid_extend needs n >= 1".into()));
        }
        checked_product(std::iter::repeat_n(self.pmf.len(), n), cap)?;
        let mut vars = Vec::with_capacity(self.vars.len() * n);
        for t in 1..=n {
            for v in &self.vars {
                vars.push(Var::new(format!("{}_{}", v.name, t), v.alphabet.clone()));
            }
        }
        let mut pmf = vec![1.0];
        for _ in 0..n {
            pmf = pmf
                .iter()
                .flat_map(|&a| self.pmf.iter().map(move |&b| a * b))
                .collect();
        }
        Ok(JointDist { vars, pmf })
    }

    /// Pushforward onto tuple-valued groups of variables. A variable may appear in
    /// several groups (copies agree with probability one). Single-member groups keep
    /// their alphabet; larger groups get comma-joined tuple labels.
    pub fn project(&self, groups: &[(&str, Vec<&str>)]) -> Result<JointDist> {
        let shape = self.shape();
        let mut vars = Vec::with_capacity(groups.len());
        let mut positions = Vec::with_capacity(groups.len());
        for (name, members) in groups {
            if members.is_empty() {
                return Err(Error::Parameter(format!("group `{name}` is empty")));
            }
            let pos = self.indices(members)?;
            let alphabet = if pos.len() == 1 {
                self.vars[pos[0]].alphabet.clone()
            } else {
                let sub = Shape::new(pos.iter().map(|&p| self.vars[p].size()).collect());
                Alphabet::new((0..sub.len()).map(|i| {
                    sub.decode(i)
                        .iter()
                        .zip(&pos)
                        .map(|(&s, &p)| self.vars[p].alphabet.symbol(s).to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                }))?
            };
            vars.push(Var::new(*name, alphabet));
            positions.push(pos);
        }
        validate_vars(&vars)?;
        let out = Shape::new(vars.iter().map(Var::size).collect());
        checked_product(out.sizes().iter().copied(), DEFAULT_CAP)?;
        let mut pmf = vec![0.0; out.len()];
        let mut target = vec![0; groups.len()];
        for (i, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = shape.decode(i);
            for (g, pos) in positions.iter().enumerate() {
                target[g] = shape.sub_index(&a, pos);
            }
            pmf[out.encode(&target)] += p;
        }
        Ok(JointDist { vars, pmf })
    }

    /// Appends a variable that is a deterministic function of `source`.
    pub fn with_derived(&self, name: &str, source: &str, labels: &[usize], alphabet: Alphabet) -> Result<JointDist> {
        let sp = self.var_index(source)?;
        if labels.len() != self.vars[sp].size() || labels.iter().any(|&l| l >= alphabet.len()) {
            return Err(Error::Parameter(format!("labeling for `{source}` is not total on its alphabet")));
        }
        let mut vars = self.vars.clone();
        let k = alphabet.len();
        vars.push(Var::new(name, alphabet));
        validate_vars(&vars)?;
        let shape = self.shape();
        let mut pmf = vec![0.0; self.pmf.len() * k];
        for (i, &p) in self.pmf.iter().enumerate() {
            let a = shape.decode(i);
            pmf[i * k + labels[a[sp]]] = p;
        }
        Ok(JointDist { vars, pmf })
    }

    /// Joint law of `(self, W(·|inputs))`; channel outputs are appended.
    pub fn compose(&self, w: &Channel) -> Result<JointDist> {
        let inpos = w.input_positions(self)?;
        let mut vars = self.vars.clone();
        vars.extend(w.outputs.iter().cloned());
        validate_vars(&vars)?;
        let shape = self.shape();
        let osize = w.output_size();
        let mut pmf = vec![0.0; self.pmf.len() * osize];
        for (i, &p) in self.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = shape.decode(i);
            let row = w.row(shape.sub_index(&a, &inpos));
            for (o, &r) in row.iter().enumerate() {
                pmf[i * osize + o] = p * r;
            }
        }
        Ok(JointDist { vars, pmf })
    }
}

/// Subnormalized nonnegative mass function (total mass at most one).
#[derive(Debug, Clone, PartialEq)]
pub struct SubDist {
    vars: Vec<Var>,
    pmf: Vec<f64>,
}

impl MassFunction for SubDist {
    fn vars(&self) -> &[Var] {
        &self.vars
    }
    fn pmf(&self) -> &[f64] {
        &self.pmf
    }
}

impl SubDist {
    pub fn new(vars: Vec<Var>, pmf: Vec<f64>) -> Result<Self> {
        validate_entries(&vars, &pmf)?;
        let total: f64 = pmf.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::MassExceedsOne(total));
        }
        Ok(Self { vars, pmf })
    }
}

/// Conditional rows of `targets` given `given`; zero-probability rows are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalFamily {
    pub targets: Vec<Var>,
    pub given: Vec<Var>,
    rows: Vec<Option<Vec<f64>>>,
    omitted: Vec<usize>,
}

impl ConditionalFamily {
    pub fn row(&self, given_index: usize) -> Option<&[f64]> {
        self.rows.get(given_index).and_then(|r| r.as_deref())
    }

    /// Conditioning assignments that never occur.
    pub fn omitted(&self) -> &[usize] {
        &self.omitted
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Stochastic map from an assignment of input variables to a distribution over output variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    inputs: Vec<Var>,
    outputs: Vec<Var>,
    rows: Vec<f64>,
}

impl Channel {
    pub fn new(inputs: Vec<Var>, outputs: Vec<Var>, rows: Vec<f64>) -> Result<Self> {
        validate_vars(&inputs)?;
        validate_vars(&outputs)?;
        let isize: usize = inputs.iter().map(Var::size).product();
        let osize: usize = outputs.iter().map(Var::size).product();
        if rows.len() != isize * osize {
            return Err(Error::InvalidChannel(format!(
                "expected {} entries, got {}",
                isize * osize,
                rows.len()
            )));
        }
        for (r, row) in rows.chunks(osize).enumerate() {
            if row.iter().any(|&x| !(x >= 0.0)) {
                return Err(Error::InvalidChannel(format!("row {r} has a negative entry")));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidChannel(format!("row {r} sums to {s}")));
            }
        }
        Ok(Self { inputs, outputs, rows })
    }

    /// Builds rows from a function of the input assignment.
    pub fn from_fn(inputs: Vec<Var>, outputs: Vec<Var>, f: impl Fn(&[usize]) -> Vec<f64>) -> Result<Self> {
        let ishape = Shape::new(inputs.iter().map(Var::size).collect());
        let mut rows = Vec::new();
        for i in 0..ishape.len() {
            rows.extend(f(&ishape.decode(i)));
        }
        Self::new(inputs, outputs, rows)
    }

    /// Deterministic map returning the flat output index.
    pub fn deterministic(inputs: Vec<Var>, outputs: Vec<Var>, f: impl Fn(&[usize]) -> usize) -> Result<Self> {
        let osize: usize = outputs.iter().map(Var::size).product();
        Self::from_fn(inputs, outputs, |a| {
            let mut row = vec![0.0; osize];
            row[f(a)] = 1.0;
            row
        })
    }

    pub fn inputs(&self) -> &[Var] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Var] {
        &self.outputs
    }

    pub fn output_size(&self) -> usize {
        self.outputs.iter().map(Var::size).product()
    }

    pub fn row(&self, input_index: usize) -> &[f64] {
        let o = self.output_size();
        &self.rows[input_index * o..(input_index + 1) * o]
    }

    fn input_positions(&self, j: &JointDist) -> Result<Vec<usize>> {
        self.inputs
            .iter()
            .map(|v| {
                let p = j.var_index(&v.name)?;
                if j.vars[p].alphabet != v.alphabet {
                    return Err(Error::ShapeMismatch(format!("alphabet of `{}` differs", v.name)));
                }
                Ok(p)
            })
            .collect()
    }

    /// `(P ∘ W)(y) = Σ_x P(x) W(y | x)`, over the output variables only.
    pub fn pushforward(&self, j: &JointDist) -> Result<JointDist> {
        let inpos = self.input_positions(j)?;
        let shape = j.shape();
        let osize = self.output_size();
        let mut pmf = vec![0.0; osize];
        for (i, &p) in j.pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let a = shape.decode(i);
            for (o, &r) in self.row(shape.sub_index(&a, &inpos)).iter().enumerate() {
                pmf[o] += p * r;
            }
        }
        JointDist::new(self.outputs.clone(), pmf)
    }
}
