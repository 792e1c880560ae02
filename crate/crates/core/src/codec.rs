//! Compact binary genome format.
//!
//! Layout (all integers LEB128 varints unless noted):
//!
//! ```text
//! magic "SNKG" | version u8 | key | fitness flag u8 [+ f64 LE]
//! node count   | per node:  id delta, tag u8 (kind | activation << 2 | aggregation << 5),
//!                           non-input nodes only: bias f64 LE, response f64 LE
//! conn count   | per conn:  (innovation delta << 1 | enabled), zigzag in-node delta,
//!                           zigzag out-node delta, weight f64 LE
//! ```
//!
//! Deltas are taken against the previous record, so the regular wiring of
//! an initial genome costs about eleven bytes per connection.

use crate::genome::{ConnectionGene, Genome, GenomeError, Innovation, NodeGene, NodeId, NodeKind};
use crate::network::{Activation, Aggregation};

pub const MAGIC: &[u8; 4] = b"SNKG";
pub const VERSION: u8 = 1;

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn kind_tag(k: NodeKind) -> u8 {
    match k {
        NodeKind::Input => 0,
        NodeKind::Hidden => 1,
        NodeKind::Output => 2,
    }
}

fn activation_tag(a: Activation) -> u8 {
    match a {
        Activation::Identity => 0,
        Activation::Sigmoid => 1,
        Activation::Tanh => 2,
        Activation::Relu => 3,
    }
}

pub fn encode(g: &Genome) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + g.nodes.len() * 18 + g.connections.len() * 12);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    put_varint(&mut out, g.key);
    match g.fitness {
        Some(f) => {
            out.push(1);
            out.extend_from_slice(&f.to_le_bytes());
        }
        None => out.push(0),
    }

    put_varint(&mut out, g.nodes.len() as u64);
    let mut prev = 0u32;
    for n in &g.nodes {
        put_varint(&mut out, u64::from(n.id.0 - prev));
        prev = n.id.0;
        let agg = match n.aggregation {
            Aggregation::Sum => 0u8,
        };
        out.push(kind_tag(n.kind) | activation_tag(n.activation) << 2 | agg << 5);
        if n.kind != NodeKind::Input {
            out.extend_from_slice(&n.bias.to_le_bytes());
            out.extend_from_slice(&n.response.to_le_bytes());
        }
    }

    put_varint(&mut out, g.connections.len() as u64);
    let (mut pi, mut pa, mut pb) = (0u64, 0i64, 0i64);
    for c in &g.connections {
        put_varint(&mut out, (c.innovation.0 - pi) << 1 | u64::from(c.enabled));
        pi = c.innovation.0;
        let (a, b) = (i64::from(c.in_node.0), i64::from(c.out_node.0));
        put_varint(&mut out, zigzag(a - pa));
        put_varint(&mut out, zigzag(b - pb));
        pa = a;
        pb = b;
        out.extend_from_slice(&c.weight.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn err(&self, what: &str) -> GenomeError {
        GenomeError::Decode(format!("{what} at byte {}", self.pos))
    }

    fn byte(&mut self) -> Result<u8, GenomeError> {
        let b = *self.buf.get(self.pos).ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        Ok(b)
    }

    fn varint(&mut self) -> Result<u64, GenomeError> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            v |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(self.err("varint overflow"))
    }

    fn f64(&mut self) -> Result<f64, GenomeError> {
        let end = self.pos + 8;
        let bytes = self.buf.get(self.pos..end).ok_or_else(|| self.err("unexpected end"))?;
        self.pos = end;
        Ok(f64::from_le_bytes(bytes.try_into().expect("8 bytes")))
    }

    fn node_id(&mut self, v: i64) -> Result<NodeId, GenomeError> {
        u32::try_from(v).map(NodeId).map_err(|_| self.err("node id out of range"))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Genome, GenomeError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if bytes.len() < 5 || &bytes[..4] != MAGIC {
        return Err(GenomeError::Decode("missing SNKG magic".into()));
    }
    r.pos = 4;
    let version = r.byte()?;
    if version != VERSION {
        return Err(GenomeError::Decode(format!("unsupported version {version}")));
    }
    let key = r.varint()?;
    let fitness = match r.byte()? {
        0 => None,
        1 => Some(r.f64()?),
        _ => return Err(r.err("bad fitness flag")),
    };

    let n_nodes = r.varint()? as usize;
    if n_nodes > bytes.len() {
        return Err(r.err("node count exceeds payload"));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut prev = 0i64;
    for _ in 0..n_nodes {
        prev += r.varint()? as i64;
        let id = r.node_id(prev)?;
        let tag = r.byte()?;
        let kind = match tag & 0b11 {
            0 => NodeKind::Input,
            1 => NodeKind::Hidden,
            2 => NodeKind::Output,
            _ => return Err(r.err("bad node kind")),
        };
        let activation = match (tag >> 2) & 0b111 {
            0 => Activation::Identity,
            1 => Activation::Sigmoid,
            2 => Activation::Tanh,
            3 => Activation::Relu,
            _ => return Err(r.err("bad activation")),
        };
        if tag >> 5 != 0 {
            return Err(r.err("bad aggregation"));
        }
        let (bias, response) = if kind == NodeKind::Input { (0.0, 1.0) } else { (r.f64()?, r.f64()?) };
        nodes.push(NodeGene {
            id,
            kind,
            bias,
            response,
            activation,
            aggregation: Aggregation::Sum,
        });
    }

    let n_conns = r.varint()? as usize;
    if n_conns > bytes.len() {
        return Err(r.err("connection count exceeds payload"));
    }
    let mut connections = Vec::with_capacity(n_conns);
    let (mut pi, mut pa, mut pb) = (0u64, 0i64, 0i64);
    for _ in 0..n_conns {
        let head = r.varint()?;
        pi += head >> 1;
        pa += unzigzag(r.varint()?);
        pb += unzigzag(r.varint()?);
        let weight = r.f64()?;
        connections.push(ConnectionGene {
            innovation: Innovation(pi),
            in_node: r.node_id(pa)?,
            out_node: r.node_id(pb)?,
            weight,
            enabled: head & 1 == 1,
        });
    }
    if r.pos != bytes.len() {
        return Err(r.err("trailing bytes"));
    }
    let mut g = Genome::from_parts(key, nodes, connections);
    g.fitness = fitness;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::NeatConfig;
    use crate::genome::InnovationRegistry;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn initial_snake_genome_fits_budget() {
        let cfg = NeatConfig::default();
        let mut reg = InnovationRegistry::new(&cfg);
        let g = Genome::new_initial(3, &cfg, &mut reg, &mut ChaCha8Rng::seed_from_u64(0));
        let bytes = encode(&g);
        assert!(bytes.len() < 72 * 1024, "{} bytes", bytes.len());
        assert_eq!(decode(&bytes).unwrap(), g);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"nope").is_err());
        assert!(decode(b"SNKG\x02").is_err());
        let cfg = NeatConfig::xor();
        let mut reg = InnovationRegistry::new(&cfg);
        let g = Genome::new_initial(3, &cfg, &mut reg, &mut ChaCha8Rng::seed_from_u64(0));
        let mut bytes = encode(&g);
        bytes.push(0);
        assert!(decode(&bytes).is_err());
        bytes.truncate(bytes.len() - 3);
        assert!(decode(&bytes).is_err());
    }

    proptest! {
        #[test]
        fn mutated_genomes_round_trip(seed in any::<u64>(), rounds in 0usize..30) {
            let cfg = NeatConfig { num_inputs: 5, num_hidden: 3, ..NeatConfig::default() };
            let mut reg = InnovationRegistry::new(&cfg);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut g = Genome::new_initial(seed, &cfg, &mut reg, &mut rng);
            for _ in 0..rounds {
                g.mutate(&cfg, &mut reg, &mut rng);
            }
            g.fitness = if seed % 2 == 0 { Some(seed as f64 * 0.37) } else { None };
            prop_assert_eq!(decode(&encode(&g)).unwrap(), g);
        }
    }
}
