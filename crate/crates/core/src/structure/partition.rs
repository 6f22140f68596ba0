use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Largest party count accepted by [`enum_partitions`].
pub const MAX_PARTIES: usize = 12;

/// Set partition of parties `0..m` (shown 1-based). Blocks are kept sorted
/// internally and ordered by their smallest member.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<usize>>", into = "Vec<Vec<usize>>")]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds from 0-based blocks; rejects empty blocks and repeated members.
    pub fn new(mut blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            b.sort_unstable();
            for &i in b.iter() {
                if !seen.insert(i) {
                    return Err(Error::InvalidPartition(format!("party {} appears twice", i + 1)));
                }
            }
        }
        blocks.sort_by_key(|b| b[0]);
        Ok(Self { blocks })
    }

    /// Builds from 1-based blocks, as written by users.
    pub fn from_one_based(blocks: Vec<Vec<usize>>) -> Result<Self> {
        if blocks.iter().flatten().any(|&i| i == 0) {
            return Err(Error::InvalidPartition("parties are numbered from 1".into()));
        }
        Self::new(blocks.into_iter().map(|b| b.into_iter().map(|i| i - 1).collect()).collect())
    }

    /// Parses `"1,2|3"` style text.
    pub fn parse(text: &str) -> Result<Self> {
        let blocks = text
            .split('|')
            .map(|b| {
                b.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<usize>()
                            .map_err(|_| Error::InvalidPartition(format!("bad party index `{s}`")))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_one_based(blocks)
    }

    pub fn singletons(m: usize) -> Self {
        Self { blocks: (0..m).map(|i| vec![i]).collect() }
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Requires exactly the parties `0..m` and at least two blocks.
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.blocks.len() < 2 {
            return Err(Error::InvalidPartition("need at least two blocks".into()));
        }
        let count: usize = self.blocks.iter().map(Vec::len).sum();
        if count != m || self.blocks.iter().flatten().any(|&i| i >= m) {
            return Err(Error::InvalidPartition(format!("blocks do not cover parties 1..{m}")));
        }
        Ok(())
    }

    pub fn one_based(&self) -> Vec<Vec<usize>> {
        self.blocks.iter().map(|b| b.iter().map(|i| i + 1).collect()).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .blocks
            .iter()
            .map(|b| b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(","))
            .collect();
        write!(f, "{}", parts.join("|"))
    }
}

impl TryFrom<Vec<Vec<usize>>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<Vec<usize>>) -> Result<Self> {
        Self::from_one_based(v)
    }
}

impl From<Partition> for Vec<Vec<usize>> {
    fn from(p: Partition) -> Self {
        p.one_based()
    }
}

/// All set partitions of `m` parties with at least `min_blocks` blocks, in
/// lexicographic order of their restricted-growth strings.
pub fn enum_partitions(m: usize, min_blocks: usize) -> Result<Vec<Partition>> {
    if !(2..=MAX_PARTIES).contains(&m) {
        return Err(Error::Parameter(format!("party count must be in 2..={MAX_PARTIES}, got {m}")));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    // prefix_max[i] = max(rgs[0..=i])
    let mut prefix_max = vec![0usize; m];
    loop {
        let nblocks = prefix_max[m - 1] + 1;
        if nblocks >= min_blocks {
            let mut blocks = vec![Vec::new(); nblocks];
            for (i, &b) in rgs.iter().enumerate() {
                blocks[b].push(i);
            }
            out.push(Partition { blocks });
        }
        let Some(i) = (1..m).rev().find(|&i| rgs[i] <= prefix_max[i - 1]) else {
            return Ok(out);
        };
        rgs[i] += 1;
        prefix_max[i] = prefix_max[i - 1].max(rgs[i]);
        for j in i + 1..m {
            rgs[j] = 0;
            prefix_max[j] = prefix_max[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell(n: usize) -> usize {
        // Bell triangle
        let mut row = vec![1usize];
        for _ in 1..n {
            let mut next = vec![*row.last().unwrap()];
            for x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    #[test]
    fn counts() {
        let p2 = enum_partitions(2, 2).unwrap();
        assert_eq!(p2, vec![Partition::singletons(2)]);
        assert_eq!(enum_partitions(3, 2).unwrap().len(), 4);
        assert_eq!(enum_partitions(4, 2).unwrap().len(), 14);
        for m in 2..=9 {
            assert_eq!(enum_partitions(m, 2).unwrap().len(), bell(m) - 1, "m={m}");
            assert_eq!(enum_partitions(m, 1).unwrap().len(), bell(m));
        }
        assert!(enum_partitions(1, 2).is_err());
        assert!(enum_partitions(13, 2).is_err());
    }

    #[test]
    fn canonical_and_distinct() {
        let ps = enum_partitions(5, 2).unwrap();
        let set: std::collections::HashSet<_> = ps.iter().cloned().collect();
        assert_eq!(set.len(), ps.len());
        for p in &ps {
            p.validate(5).unwrap();
            assert_eq!(&Partition::new(p.blocks().to_vec()).unwrap(), p);
        }
    }

    #[test]
    fn parse_display() {
        let p = Partition::parse("3|1, 2").unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2]]);
        assert_eq!(p.to_string(), "1,2|3");
        assert!(Partition::parse("1,1|2").is_err());
        assert!(Partition::parse("0|1").is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, "[[1,2],[3]]");
        assert_eq!(serde_json::from_str::<Partition>(&json).unwrap(), p);
        assert!(Partition::parse("1|3").unwrap().validate(3).is_err());
    }
}
