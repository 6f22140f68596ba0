//! JSON form of protocols. Map tables are keyed by `"obs|rand|transcript"`:
//! `obs` joins the party's observed symbols with `;`, `rand` is the index of
//! the local randomness value, and `transcript` joins the message symbols sent
//! so far with `;` (empty before the first message). A row is either a
//! probability vector over the map's alphabet or a single symbol.

use super::bc::BcProtocol;
use super::ot::OtProtocol;
use super::protocol::{MessageSpec, OutputSpec, Protocol};
use crate::error::{Error, Result};
use crate::prob::DistFile;
use crate::prob::{Alphabet, JointDist, Shape};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Row {
    Symbol(String),
    Probs(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartyJson {
    pub observes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub randomness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageJson {
    /// 1-based.
    pub sender: usize,
    pub alphabet: Vec<String>,
    pub table: BTreeMap<String, Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputJson {
    pub alphabet: Vec<String>,
    pub table: BTreeMap<String, Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OtJson {
    pub l: u32,
}

/// Test entries keyed `"k|x1|x2|transcript"` with `k` the committed value's
/// index; missing entries reject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BcJson {
    pub l: u32,
    pub test: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<DistFile>,
    pub parties: Vec<PartyJson>,
    #[serde(default)]
    pub eve: Vec<String>,
    #[serde(default)]
    pub rounds: Vec<Vec<MessageJson>>,
    pub outputs: Vec<OutputJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ot: Option<OtJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bc: Option<BcJson>,
}

struct Labels {
    obs: Vec<Vec<String>>,
    // per message, labels of every prefix before it; last entry is the full transcript
    prefixes: Vec<Vec<String>>,
}

fn obs_labels(j: &JointDist, observes: &[String]) -> Result<Vec<String>> {
    let vars = observes.iter().map(|n| j.var(n)).collect::<Result<Vec<_>>>()?;
    let shape = Shape::new(vars.iter().map(|v| v.size()).collect());
    Ok((0..shape.len())
        .map(|i| {
            shape
                .decode(i)
                .iter()
                .zip(&vars)
                .map(|(&s, v)| v.alphabet.symbol(s).to_string())
                .collect::<Vec<_>>()
                .join(";")
        })
        .collect())
}

fn prefix_labels(alphabets: &[&Alphabet]) -> Vec<Vec<String>> {
    let mut out = vec![vec![String::new()]];
    for (t, a) in alphabets.iter().enumerate() {
        let prev = &out[t];
        let next: Vec<String> = prev
            .iter()
            .flat_map(|p| {
                a.symbols().iter().map(move |s| if p.is_empty() && t == 0 { s.clone() } else { format!("{p};{s}") })
            })
            .collect();
        out.push(next);
    }
    out
}

fn labels(j: &JointDist, observes: &[Vec<String>], alphabets: &[&Alphabet]) -> Result<Labels> {
    let obs = observes.iter().map(|o| obs_labels(j, o)).collect::<Result<_>>()?;
    Ok(Labels { obs, prefixes: prefix_labels(alphabets) })
}

fn key(o: &str, r: usize, t: &str) -> String {
    format!("{o}|{r}|{t}")
}

fn read_table(
    what: &str,
    table: &BTreeMap<String, Row>,
    alphabet: &Alphabet,
    obs: &[String],
    rsize: usize,
    prefixes: &[String],
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(obs.len() * rsize * prefixes.len() * alphabet.len());
    let mut used = 0;
    for o in obs {
        for r in 0..rsize {
            for t in prefixes {
                let k = key(o, r, t);
                let row = table.get(&k).ok_or_else(|| Error::Malformed(format!("{what}: missing row `{k}`")))?;
                used += 1;
                match row {
                    Row::Symbol(s) => {
                        let at = alphabet
                            .index_of(s)
                            .ok_or_else(|| Error::Malformed(format!("{what}: unknown symbol `{s}` in row `{k}`")))?;
                        out.extend((0..alphabet.len()).map(|i| if i == at { 1.0 } else { 0.0 }));
                    }
                    Row::Probs(p) => {
                        if p.len() != alphabet.len() {
                            return Err(Error::Malformed(format!("{what}: row `{k}` has {} entries", p.len())));
                        }
                        out.extend_from_slice(p);
                    }
                }
            }
        }
    }
    if used != table.len() {
        return Err(Error::Malformed(format!("{what}: {} rows do not match the domain", table.len() - used)));
    }
    Ok(out)
}

fn write_table(flat: &[f64], alphabet: &Alphabet, obs: &[String], rsize: usize, prefixes: &[String]) -> BTreeMap<String, Row> {
    let a = alphabet.len();
    let mut out = BTreeMap::new();
    let mut rows = flat.chunks(a);
    for o in obs {
        for r in 0..rsize {
            for t in prefixes {
                let row = rows.next().expect("table sized to its domain");
                let det = row.iter().position(|&x| x == 1.0).filter(|_| row.iter().filter(|&&x| x != 0.0).count() == 1);
                let v = match det {
                    Some(i) => Row::Symbol(alphabet.symbol(i).to_string()),
                    None => Row::Probs(row.to_vec()),
                };
                out.insert(key(o, r, t), v);
            }
        }
    }
    out
}

impl ProtocolFile {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Embedded source distribution, if present.
    pub fn source(&self) -> Result<Option<JointDist>> {
        self.source.as_ref().map(|d| d.dist()).transpose()
    }

    pub fn protocol(&self, j: &JointDist) -> Result<Protocol> {
        let observes: Vec<Vec<String>> = self.parties.iter().map(|p| p.observes.clone()).collect();
        let msg_alpha: Vec<Alphabet> = self.rounds.iter().flatten().map(|m| Alphabet::new(m.alphabet.clone())).collect::<Result<_>>()?;
        let lab = labels(j, &observes, &msg_alpha.iter().collect::<Vec<_>>())?;
        let rand: Vec<Vec<f64>> = self.parties.iter().map(|p| p.randomness.clone().unwrap_or_else(|| vec![1.0])).collect();
        let mut rounds = Vec::with_capacity(self.rounds.len());
        let mut t = 0;
        for round in &self.rounds {
            let mut msgs = Vec::with_capacity(round.len());
            for m in round {
                if m.sender == 0 || m.sender > self.parties.len() {
                    return Err(Error::Schedule(format!("message {} has unknown sender {}", t + 1, m.sender)));
                }
                let s = m.sender - 1;
                let alphabet = msg_alpha[t].clone();
                let table = read_table(&format!("message {}", t + 1), &m.table, &alphabet, &lab.obs[s], rand[s].len(), &lab.prefixes[t])?;
                msgs.push(MessageSpec { sender: s, alphabet, table });
                t += 1;
            }
            rounds.push(msgs);
        }
        if self.outputs.len() != self.parties.len() {
            return Err(Error::Malformed(format!("{} outputs for {} parties", self.outputs.len(), self.parties.len())));
        }
        let full = &lab.prefixes[t];
        let outputs = self
            .outputs
            .iter()
            .enumerate()
            .map(|(i, o)| {
                let alphabet = Alphabet::new(o.alphabet.clone())?;
                let table = read_table(&format!("output of party {}", i + 1), &o.table, &alphabet, &lab.obs[i], rand[i].len(), full)?;
                Ok(OutputSpec { alphabet, table })
            })
            .collect::<Result<Vec<_>>>()?;
        let parties = observes
            .into_iter()
            .zip(rand)
            .map(|(observes, randomness)| super::protocol::PartySpec { observes, randomness })
            .collect();
        let p = Protocol { parties, eve: self.eve.clone(), rounds, outputs };
        p.layout(j)?;
        Ok(p)
    }

    pub fn from_protocol(j: &JointDist, p: &Protocol) -> Result<Self> {
        p.layout(j)?;
        let observes: Vec<Vec<String>> = p.parties.iter().map(|q| q.observes.clone()).collect();
        let msg_alpha: Vec<&Alphabet> = p.messages().map(|m| &m.alphabet).collect();
        let lab = labels(j, &observes, &msg_alpha)?;
        let mut t = 0;
        let rounds = p
            .rounds
            .iter()
            .map(|round| {
                round
                    .iter()
                    .map(|m| {
                        let rs = p.parties[m.sender].randomness.len();
                        let table = write_table(&m.table, &m.alphabet, &lab.obs[m.sender], rs, &lab.prefixes[t]);
                        t += 1;
                        MessageJson { sender: m.sender + 1, alphabet: m.alphabet.symbols().to_vec(), table }
                    })
                    .collect()
            })
            .collect();
        let full = &lab.prefixes[t];
        let outputs = p
            .outputs
            .iter()
            .enumerate()
            .map(|(i, o)| OutputJson {
                alphabet: o.alphabet.symbols().to_vec(),
                table: write_table(&o.table, &o.alphabet, &lab.obs[i], p.parties[i].randomness.len(), full),
            })
            .collect();
        let parties = p
            .parties
            .iter()
            .map(|q| PartyJson {
                observes: q.observes.clone(),
                randomness: (q.randomness.len() > 1).then(|| q.randomness.clone()),
            })
            .collect();
        Ok(Self { source: None, parties, eve: p.eve.clone(), rounds, outputs, ot: None, bc: None })
    }

    pub fn with_source(mut self, j: &JointDist) -> Self {
        self.source = Some(DistFile::from_dist(j, None));
        self
    }

    pub fn ot(&self, j: &JointDist) -> Result<OtProtocol> {
        let o = self.ot.as_ref().ok_or_else(|| Error::Interface("protocol has no `ot` section".into()))?;
        OtProtocol::new(o.l, self.protocol(j)?)
    }

    pub fn bc(&self, j: &JointDist) -> Result<BcProtocol> {
        let b = self.bc.as_ref().ok_or_else(|| Error::Interface("protocol has no `bc` section".into()))?;
        let p = self.protocol(j)?;
        let obs: Vec<Vec<String>> = (0..2).map(|i| obs_labels(j, &p.parties[i].observes)).collect::<Result<_>>()?;
        let alphas: Vec<&Alphabet> = p.messages().map(|m| &m.alphabet).collect();
        let full = prefix_labels(&alphas).pop().unwrap_or_default();
        let n = 1usize << b.l;
        let mut test = Vec::with_capacity(n * obs[0].len() * obs[1].len() * full.len());
        let mut used = 0;
        for k in 0..n {
            for x1 in &obs[0] {
                for x2 in &obs[1] {
                    for f in &full {
                        let v = b.test.get(&format!("{k}|{x1}|{x2}|{f}")).copied();
                        used += usize::from(v.is_some());
                        test.push(v.unwrap_or(0.0));
                    }
                }
            }
        }
        if used != b.test.len() {
            return Err(Error::Malformed(format!("bc test: {} entries do not match the domain", b.test.len() - used)));
        }
        BcProtocol::new(b.l, p, test)
    }

    pub fn with_bc(mut self, j: &JointDist, bc: &BcProtocol) -> Result<Self> {
        let p = &bc.protocol;
        let obs: Vec<Vec<String>> = (0..2).map(|i| obs_labels(j, &p.parties[i].observes)).collect::<Result<_>>()?;
        let alphas: Vec<&Alphabet> = p.messages().map(|m| &m.alphabet).collect();
        let full = prefix_labels(&alphas).pop().unwrap_or_default();
        let mut test = BTreeMap::new();
        let mut it = bc.test.iter();
        for k in 0..1usize << bc.l {
            for x1 in &obs[0] {
                for x2 in &obs[1] {
                    for f in &full {
                        let v = *it.next().ok_or_else(|| Error::Interface("bc test table too short".into()))?;
                        if v != 0.0 {
                            test.insert(format!("{k}|{x1}|{x2}|{f}"), v);
                        }
                    }
                }
            }
        }
        self.bc = Some(BcJson { l: bc.l, test });
        Ok(self)
    }
}

/// The protocol, its interface sections, and an embedded source in one file.
pub fn ot_file(j: &JointDist, ot: &OtProtocol) -> Result<ProtocolFile> {
    let mut f = ProtocolFile::from_protocol(j, &ot.protocol)?.with_source(j);
    f.ot = Some(OtJson { l: ot.l });
    Ok(f)
}

pub fn bc_file(j: &JointDist, bc: &BcProtocol) -> Result<ProtocolFile> {
    ProtocolFile::from_protocol(j, &bc.protocol)?.with_source(j).with_bc(j, bc)
}
