//! Extensional description of interactive protocols.

use crate::error::{Error, Result};
use crate::prob::{checked_product, Alphabet, JointDist, MassFunction, Shape, DEFAULT_CAP, NORM_TOL};

/// What one party sees: a tuple of source variables and private randomness.
#[derive(Debug, Clone, PartialEq)]
pub struct PartySpec {
    pub observes: Vec<String>,
    /// Distribution of the local randomness `U_i`; `[1.0]` means none.
    pub randomness: Vec<f64>,
}

/// One message. Rows are indexed by `(obs, rand, transcript prefix)` flattened
/// row-major; each row is a distribution over `alphabet`.
#[derive(Debug, Clone, PartialEq)]
pub struct MessageSpec {
    pub sender: usize,
    pub alphabet: Alphabet,
    pub table: Vec<f64>,
}

/// Output (key) map of one party, indexed by `(obs, rand, full transcript)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub alphabet: Alphabet,
    pub table: Vec<f64>,
}

/// Parties are 0-based internally. Within a round senders speak in increasing
/// order; the transcript index is mixed radix with the last message fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub parties: Vec<PartySpec>,
    pub eve: Vec<String>,
    pub rounds: Vec<Vec<MessageSpec>>,
    pub outputs: Vec<OutputSpec>,
}

/// Index arithmetic of a protocol resolved against a source distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub shape: Shape,
    pub obs_pos: Vec<Vec<usize>>,
    pub obs_size: Vec<usize>,
    pub rand_size: Vec<usize>,
    pub eve_pos: Vec<usize>,
    pub eve_size: usize,
    /// `(sender, alphabet size, prefix size)` in speaking order.
    pub msgs: Vec<(usize, usize, usize)>,
    pub f_size: usize,
    pub out_size: Vec<usize>,
}

impl Layout {
    pub fn parties(&self) -> usize {
        self.obs_size.len()
    }

    pub fn obs(&self, assignment: &[usize], party: usize) -> usize {
        self.shape.sub_index(assignment, &self.obs_pos[party])
    }

    pub fn eve(&self, assignment: &[usize]) -> usize {
        self.shape.sub_index(assignment, &self.eve_pos)
    }

    /// Message values of a full transcript index.
    pub fn decode_transcript(&self, f: usize) -> Vec<usize> {
        let sizes: Vec<usize> = self.msgs.iter().map(|m| m.1).collect();
        Shape::new(sizes).decode(f)
    }

    pub fn rand_shape(&self) -> Shape {
        Shape::new(self.rand_size.clone())
    }

    pub fn out_shape(&self) -> Shape {
        Shape::new(self.out_size.clone())
    }
}

fn check_rows(table: &[f64], width: usize, what: &str) -> Result<()> {
    for (r, row) in table.chunks(width).enumerate() {
        if row.iter().any(|&x| !(x >= 0.0)) {
            return Err(Error::InvalidProtocol(format!("{what}: row {r} has a negative entry")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidProtocol(format!("{what}: row {r} sums to {s}")));
        }
    }
    Ok(())
}

impl Protocol {
    pub fn num_parties(&self) -> usize {
        self.parties.len()
    }

    pub fn messages(&self) -> impl Iterator<Item = &MessageSpec> {
        self.rounds.iter().flatten()
    }

    /// Validates schedule and table shapes against `j` and returns the layout.
    pub fn layout(&self, j: &JointDist) -> Result<Layout> {
        let m = self.parties.len();
        if m == 0 {
            return Err(Error::InvalidProtocol("protocol has no parties".into()));
        }
        if self.outputs.len() != m {
            return Err(Error::InvalidProtocol(format!("{} outputs for {m} parties", self.outputs.len())));
        }
        let mut obs_pos = Vec::with_capacity(m);
        let mut obs_size = Vec::with_capacity(m);
        let mut rand_size = Vec::with_capacity(m);
        for (i, p) in self.parties.iter().enumerate() {
            if p.observes.is_empty() {
                return Err(Error::InvalidProtocol(format!("party {} observes nothing", i + 1)));
            }
            let pos = p.observes.iter().map(|n| j.var_index(n)).collect::<Result<Vec<_>>>()?;
            obs_size.push(pos.iter().map(|&q| j.vars()[q].size()).product());
            obs_pos.push(pos);
            if p.randomness.is_empty() {
                return Err(Error::InvalidProtocol(format!("party {} has empty randomness", i + 1)));
            }
            check_rows(&p.randomness, p.randomness.len(), &format!("randomness of party {}", i + 1))?;
            rand_size.push(p.randomness.len());
        }
        let eve_pos = self.eve.iter().map(|n| j.var_index(n)).collect::<Result<Vec<_>>>()?;
        let eve_size = eve_pos.iter().map(|&q| j.vars()[q].size()).product();

        let mut msgs = Vec::new();
        let mut prefix = 1usize;
        for (r, round) in self.rounds.iter().enumerate() {
            let mut last: Option<usize> = None;
            for msg in round {
                if msg.sender >= m {
                    return Err(Error::Schedule(format!("round {}: unknown sender {}", r + 1, msg.sender + 1)));
                }
                if last.is_some_and(|l| msg.sender <= l) {
                    return Err(Error::Schedule(format!(
                        "round {}: senders must speak in increasing order (party {} after {})",
                        r + 1,
                        msg.sender + 1,
                        last.unwrap() + 1
                    )));
                }
                last = Some(msg.sender);
                let a = msg.alphabet.len();
                let rows = obs_size[msg.sender] * rand_size[msg.sender] * prefix;
                if msg.table.len() != rows * a {
                    return Err(Error::InvalidProtocol(format!(
                        "message {} table has {} entries, expected {}",
                        msgs.len() + 1,
                        msg.table.len(),
                        rows * a
                    )));
                }
                check_rows(&msg.table, a, &format!("message {}", msgs.len() + 1))?;
                msgs.push((msg.sender, a, prefix));
                prefix = checked_product([prefix, a], DEFAULT_CAP)?;
            }
        }
        let f_size = prefix;
        let mut out_size = Vec::with_capacity(m);
        for (i, o) in self.outputs.iter().enumerate() {
            let a = o.alphabet.len();
            let rows = obs_size[i] * rand_size[i] * f_size;
            if o.table.len() != rows * a {
                return Err(Error::InvalidProtocol(format!(
                    "output of party {} has {} entries, expected {}",
                    i + 1,
                    o.table.len(),
                    rows * a
                )));
            }
            check_rows(&o.table, a, &format!("output of party {}", i + 1))?;
            out_size.push(a);
        }
        let support = j.pmf().iter().filter(|&&p| p > 0.0).count();
        checked_product(
            std::iter::once(support)
                .chain(rand_size.iter().copied())
                .chain(std::iter::once(f_size))
                .chain(out_size.iter().copied()),
            DEFAULT_CAP,
        )?;
        Ok(Layout { shape: j.shape(), obs_pos, obs_size, rand_size, eve_pos, eve_size, msgs, f_size, out_size })
    }

    /// Rewrites the protocol on the per-party view of `j`: variables `P1..Pm`
    /// (tuples of each party's observations) followed by `Z` (eve's tuple, if any).
    pub fn party_view(&self, j: &JointDist) -> Result<(JointDist, Protocol)> {
        let names: Vec<String> = (1..=self.parties.len()).map(|i| format!("P{i}")).collect();
        let mut groups: Vec<(&str, Vec<&str>)> = names
            .iter()
            .zip(&self.parties)
            .map(|(n, p)| (n.as_str(), p.observes.iter().map(String::as_str).collect()))
            .collect();
        if !self.eve.is_empty() {
            groups.push(("Z", self.eve.iter().map(String::as_str).collect()));
        }
        let view = j.project(&groups)?;
        let mut p = self.clone();
        for (party, n) in p.parties.iter_mut().zip(&names) {
            party.observes = vec![n.clone()];
        }
        if !p.eve.is_empty() {
            p.eve = vec!["Z".into()];
        }
        Ok((view, p))
    }

    /// Replaces what `party` observes; `map` sends a new observation index to the old one.
    pub fn with_party_obs(&self, party: usize, observes: Vec<String>, new_obs: usize, map: impl Fn(usize) -> usize) -> Protocol {
        let mut p = self.clone();
        let rsize = p.parties[party].randomness.len();
        let mut prefix = 1usize;
        for msg in p.rounds.iter_mut().flatten() {
            let a = msg.alphabet.len();
            if msg.sender == party {
                let old = std::mem::take(&mut msg.table);
                let block = rsize * prefix * a;
                for o in 0..new_obs {
                    let src = map(o) * block;
                    msg.table.extend_from_slice(&old[src..src + block]);
                }
            }
            prefix *= a;
        }
        let out = &mut p.outputs[party];
        let block = rsize * prefix * out.alphabet.len();
        let old = std::mem::take(&mut out.table);
        for o in 0..new_obs {
            let src = map(o) * block;
            out.table.extend_from_slice(&old[src..src + block]);
        }
        p.parties[party].observes = observes;
        p
    }

    /// Total number of transcripts.
    pub fn transcript_size(&self) -> usize {
        self.messages().map(|m| m.alphabet.len()).product()
    }
}

/// Incremental construction with closures over decoded transcripts.
#[derive(Debug, Clone)]
pub struct ProtocolBuilder {
    obs_size: Vec<usize>,
    parties: Vec<PartySpec>,
    eve: Vec<String>,
    rounds: Vec<Vec<MessageSpec>>,
    msg_sizes: Vec<usize>,
    outputs: Vec<Option<OutputSpec>>,
    sizes_of: Vec<(String, usize)>,
}

impl ProtocolBuilder {
    pub fn new(j: &JointDist) -> Self {
        Self {
            obs_size: Vec::new(),
            parties: Vec::new(),
            eve: Vec::new(),
            rounds: Vec::new(),
            msg_sizes: Vec::new(),
            outputs: Vec::new(),
            sizes_of: j.vars().iter().map(|v| (v.name.clone(), v.size())).collect(),
        }
    }

    /// Adds a party; returns its 0-based index.
    pub fn party(&mut self, observes: &[&str], randomness: Vec<f64>) -> Result<usize> {
        let mut size = 1;
        for n in observes {
            let (_, s) = self
                .sizes_of
                .iter()
                .find(|(v, _)| v == n)
                .ok_or_else(|| Error::UnknownVariable(n.to_string()))?;
            size *= s;
        }
        self.obs_size.push(size);
        self.parties.push(PartySpec { observes: observes.iter().map(|s| s.to_string()).collect(), randomness });
        self.outputs.push(None);
        Ok(self.parties.len() - 1)
    }

    pub fn eve(&mut self, vars: &[&str]) {
        self.eve = vars.iter().map(|s| s.to_string()).collect();
    }

    pub fn round(&mut self) {
        self.rounds.push(Vec::new());
    }

    fn prefix_shape(&self) -> Shape {
        Shape::new(self.msg_sizes.clone())
    }

    /// Appends a stochastic message from `sender` to the current round;
    /// `f(obs, rand, transcript_so_far)` returns the row.
    pub fn message(&mut self, sender: usize, alphabet: usize, f: impl Fn(usize, usize, &[usize]) -> Vec<f64>) -> Result<()> {
        if self.rounds.is_empty() {
            self.round();
        }
        let shape = self.prefix_shape();
        let mut table = Vec::new();
        for o in 0..self.obs_size[sender] {
            for r in 0..self.parties[sender].randomness.len() {
                for p in 0..shape.len() {
                    let row = f(o, r, &shape.decode(p));
                    if row.len() != alphabet {
                        return Err(Error::InvalidProtocol("message row has wrong width".into()));
                    }
                    table.extend(row);
                }
            }
        }
        self.rounds.last_mut().unwrap().push(MessageSpec { sender, alphabet: Alphabet::range(alphabet)?, table });
        self.msg_sizes.push(alphabet);
        Ok(())
    }

    pub fn message_det(&mut self, sender: usize, alphabet: usize, f: impl Fn(usize, usize, &[usize]) -> usize) -> Result<()> {
        self.message(sender, alphabet, |o, r, t| point(alphabet, f(o, r, t)))
    }

    /// Sets the output map of `party`; `f(obs, rand, transcript)` returns the row.
    pub fn output(&mut self, party: usize, alphabet: usize, f: impl Fn(usize, usize, &[usize]) -> Vec<f64>) -> Result<()> {
        let shape = self.prefix_shape();
        let mut table = Vec::new();
        for o in 0..self.obs_size[party] {
            for r in 0..self.parties[party].randomness.len() {
                for p in 0..shape.len() {
                    let row = f(o, r, &shape.decode(p));
                    if row.len() != alphabet {
                        return Err(Error::InvalidProtocol("output row has wrong width".into()));
                    }
                    table.extend(row);
                }
            }
        }
        self.outputs[party] = Some(OutputSpec { alphabet: Alphabet::range(alphabet)?, table });
        Ok(())
    }

    pub fn output_det(&mut self, party: usize, alphabet: usize, f: impl Fn(usize, usize, &[usize]) -> usize) -> Result<()> {
        self.output(party, alphabet, |o, r, t| point(alphabet, f(o, r, t)))
    }

    pub fn build(self) -> Result<Protocol> {
        let outputs = self
            .outputs
            .into_iter()
            .enumerate()
            .map(|(i, o)| o.ok_or_else(|| Error::InvalidProtocol(format!("party {} has no output map", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Protocol { parties: self.parties, eve: self.eve, rounds: self.rounds, outputs })
    }
}

/// Point-mass row.
pub fn point(width: usize, at: usize) -> Vec<f64> {
    let mut row = vec![0.0; width];
    row[at] = 1.0;
    row
}
