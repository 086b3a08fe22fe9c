//! Random Boolean networks with synchronous update.
//!
//! Node `i` reads `k` distinct source nodes (a node may read itself) and
//! looks its next value up in a truth table of `2^k` bits. The lookup index
//! is little-endian: input `j` contributes `2^j`. Tables of all nodes are
//! packed into one bit vector with a stride of `2^k` bits per node.

use std::collections::HashMap;
use std::fmt;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Number of proximity sensors on the robot.
pub const SENSOR_COUNT: usize = 24;
/// Two wheel nodes plus one node per sensor.
pub const MIN_NODES: usize = SENSOR_COUNT + 2;
/// Largest in-degree accepted; a table then has 65536 entries.
pub const MAX_K: usize = 16;

const WORD: usize = 64;

/// Bit-packed node values.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NetworkState {
    words: Vec<u64>,
    len: usize,
}

impl NetworkState {
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(WORD)],
            len,
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut state = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            state.set(i, b);
        }
        state
    }

    /// Uniformly random state of `len` nodes.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut state = Self::zeros(len);
        for w in state.words.iter_mut() {
            *w = rng.next_u64();
        }
        state.clear_tail();
        state
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "node {i} out of range for state of length {}", self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "node {i} out of range for state of length {}", self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        let v = self.get(i);
        self.set(i, !v);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn hamming(&self, other: &NetworkState) -> usize {
        assert_eq!(self.len, other.len, "hamming distance between states of different length");
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn to_bits(&self) -> Vec<bool> {
        self.iter().collect()
    }

    /// Bitwise complement of every node.
    pub fn complement(&self) -> Self {
        let mut out = Self {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        out.clear_tail();
        out
    }

    fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl fmt::Debug for NetworkState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.iter().map(|b| if b { '1' } else { '0' }).collect();
        write!(f, "NetworkState({s})")
    }
}

/// Writes `assignments` into a copy of `state`.
///
/// Panics if an index is out of range or appears twice.
pub fn override_inputs(state: &NetworkState, assignments: &[(usize, bool)]) -> NetworkState {
    let mut seen = vec![false; state.len()];
    let mut out = state.clone();
    for &(node, value) in assignments {
        assert!(node < state.len(), "override index {node} out of range");
        assert!(!seen[node], "node {node} overridden twice");
        seen[node] = true;
        out.set(node, value);
    }
    out
}

/// A fixed network topology and set of Boolean functions.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NetworkDoc", into = "NetworkDoc")]
pub struct BooleanNetwork {
    n: usize,
    k: usize,
    bias: f64,
    inputs: Vec<u32>,
    tables: Vec<u64>,
    output_nodes: [usize; 2],
}

impl fmt::Debug for BooleanNetwork {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BooleanNetwork")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("bias", &self.bias)
            .field("output_nodes", &self.output_nodes)
            .finish_non_exhaustive()
    }
}

/// Generates a random network.
///
/// Draw order: the two output nodes, then each node's inputs (node order),
/// then each node's truth table (node order, entry order). Output-node tables
/// use `output_bias`, all others `bias`.
pub fn generate_network<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    bias: f64,
    output_bias: f64,
    rng: &mut R,
) -> Result<BooleanNetwork, ConfigError> {
    if n < MIN_NODES {
        return Err(ConfigError::TooFewNodes { n, min: MIN_NODES });
    }
    if k == 0 || k > MAX_K.min(n) {
        return Err(ConfigError::InDegree { k, max: MAX_K.min(n) });
    }
    check_open_unit("bias", bias)?;
    check_open_unit("output_bias", output_bias)?;
    Ok(generate_unchecked(n, k, bias, output_bias, rng))
}

/// Like [`generate_network`] but without the robot's minimum size: any
/// `n >= 2` with `1 <= k <= n`. Used for free-running networks.
pub fn generate_free_network<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    bias: f64,
    output_bias: f64,
    rng: &mut R,
) -> Result<BooleanNetwork, ConfigError> {
    if n < 2 {
        return Err(ConfigError::TooFewNodes { n, min: 2 });
    }
    if k == 0 || k > MAX_K.min(n) {
        return Err(ConfigError::InDegree { k, max: MAX_K.min(n) });
    }
    check_open_unit("bias", bias)?;
    check_open_unit("output_bias", output_bias)?;
    Ok(generate_unchecked(n, k, bias, output_bias, rng))
}

pub(crate) fn check_open_unit(name: &'static str, value: f64) -> Result<(), ConfigError> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(ConfigError::Probability { name, value })
    }
}

pub(crate) fn generate_unchecked<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    bias: f64,
    output_bias: f64,
    rng: &mut R,
) -> BooleanNetwork {
    let outs = index::sample(rng, n, 2);
    let output_nodes = [outs.index(0), outs.index(1)];

    let mut inputs = Vec::with_capacity(n * k);
    for _ in 0..n {
        inputs.extend(index::sample(rng, n, k).iter().map(|j| j as u32));
    }

    let stride = 1usize << k;
    let mut tables = vec![0u64; (n * stride).div_ceil(WORD)];
    for node in 0..n {
        let p = if output_nodes.contains(&node) { output_bias } else { bias };
        for entry in 0..stride {
            if rng.random::<f64>() < p {
                let bit = node * stride + entry;
                tables[bit / WORD] |= 1 << (bit % WORD);
            }
        }
    }

    BooleanNetwork {
        n,
        k,
        bias,
        inputs,
        tables,
        output_nodes,
    }
}

impl BooleanNetwork {
    /// Assembles a network from explicit inputs and truth tables, checking
    /// every structural invariant.
    pub fn from_parts(
        k: usize,
        bias: f64,
        inputs: Vec<Vec<usize>>,
        tables: Vec<Vec<bool>>,
        output_nodes: [usize; 2],
    ) -> Result<Self, ConfigError> {
        let n = inputs.len();
        let invalid = |msg: String| Err(ConfigError::Invalid(msg));
        if k == 0 || k > MAX_K.min(n.max(1)) {
            return Err(ConfigError::InDegree { k, max: MAX_K.min(n) });
        }
        if tables.len() != n {
            return invalid(format!("{} truth tables for {n} nodes", tables.len()));
        }
        if output_nodes[0] == output_nodes[1] || output_nodes.iter().any(|&o| o >= n) {
            return invalid(format!("output nodes {output_nodes:?} must be distinct and < {n}"));
        }
        let stride = 1usize << k;
        let mut flat_inputs = Vec::with_capacity(n * k);
        for (i, ins) in inputs.iter().enumerate() {
            if ins.len() != k {
                return invalid(format!("node {i} has {} inputs, expected {k}", ins.len()));
            }
            for (a, &src) in ins.iter().enumerate() {
                if src >= n {
                    return invalid(format!("node {i} reads node {src}, out of range"));
                }
                if ins[..a].contains(&src) {
                    return invalid(format!("node {i} reads node {src} twice"));
                }
                flat_inputs.push(src as u32);
            }
        }
        let mut packed = vec![0u64; (n * stride).div_ceil(WORD)];
        for (i, table) in tables.iter().enumerate() {
            if table.len() != stride {
                return invalid(format!("node {i} table has {} entries, expected {stride}", table.len()));
            }
            for (e, &b) in table.iter().enumerate() {
                if b {
                    let bit = i * stride + e;
                    packed[bit / WORD] |= 1 << (bit % WORD);
                }
            }
        }
        Ok(Self {
            n,
            k,
            bias,
            inputs: flat_inputs,
            tables: packed,
            output_nodes,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn output_nodes(&self) -> [usize; 2] {
        self.output_nodes
    }

    pub fn is_output(&self, node: usize) -> bool {
        self.output_nodes.contains(&node)
    }

    pub fn inputs(&self, node: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        self.inputs[node * self.k..(node + 1) * self.k]
            .iter()
            .map(|&j| j as usize)
    }

    pub fn table_len(&self) -> usize {
        1 << self.k
    }

    #[inline]
    pub fn table_bit(&self, node: usize, entry: usize) -> bool {
        debug_assert!(entry < self.table_len());
        let bit = (node << self.k) + entry;
        (self.tables[bit / WORD] >> (bit % WORD)) & 1 == 1
    }

    pub fn table(&self, node: usize) -> Vec<bool> {
        (0..self.table_len()).map(|e| self.table_bit(node, e)).collect()
    }

    /// Truth-table index node `node` would read in `state`.
    #[inline]
    pub fn lookup_index(&self, node: usize, state: &NetworkState) -> usize {
        let base = node * self.k;
        let mut idx = 0usize;
        for j in 0..self.k {
            idx |= (state.get(self.inputs[base + j] as usize) as usize) << j;
        }
        idx
    }

    /// One synchronous update.
    pub fn step(&self, state: &NetworkState) -> NetworkState {
        let mut next = NetworkState::zeros(self.n);
        self.step_into(state, &mut next);
        next
    }

    /// One synchronous update written into `next`; panics on a length mismatch.
    pub fn step_into(&self, state: &NetworkState, next: &mut NetworkState) {
        assert_eq!(state.len(), self.n, "state length does not match network size");
        assert_eq!(next.len(), self.n, "state length does not match network size");
        let words = &state.words;
        for (w, out) in next.words.iter_mut().enumerate() {
            let lo = w * WORD;
            let hi = (lo + WORD).min(self.n);
            let mut acc = 0u64;
            for node in lo..hi {
                let base = node * self.k;
                let mut idx = 0usize;
                for (j, &src) in self.inputs[base..base + self.k].iter().enumerate() {
                    let src = src as usize;
                    idx |= (((words[src / WORD] >> (src % WORD)) & 1) as usize) << j;
                }
                let bit = (node << self.k) + idx;
                acc |= ((self.tables[bit / WORD] >> (bit % WORD)) & 1) << (node - lo);
            }
            *out = acc;
        }
    }

    /// Network with every function replaced by its dual `x -> !f(!x)`.
    ///
    /// The dual of a network generated with bias `b` is distributed like a
    /// network generated with bias `1 - b`, and its trajectory from `!s` is
    /// the complement of the original trajectory from `s`.
    pub fn dual(&self) -> BooleanNetwork {
        let stride = self.table_len();
        let tables = (0..self.n)
            .map(|i| (0..stride).map(|e| !self.table_bit(i, (stride - 1) ^ e)).collect())
            .collect();
        let inputs = (0..self.n).map(|i| self.inputs(i).collect()).collect();
        BooleanNetwork::from_parts(self.k, 1.0 - self.bias, inputs, tables, self.output_nodes)
            .expect("dual of a valid network is valid")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("network serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

/// Where a trajectory settles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attractor {
    /// Steps from the initial state to the first state on the cycle.
    pub transient: usize,
    pub period: usize,
}

/// Follows the trajectory from `init` for at most `max_steps` updates and
/// reports the first revisited state.
pub fn find_attractor(net: &BooleanNetwork, init: &NetworkState, max_steps: usize) -> Option<Attractor> {
    assert!(max_steps >= 1, "max_steps must be at least 1");
    let mut seen: HashMap<NetworkState, usize> = HashMap::new();
    let mut state = init.clone();
    let mut next = NetworkState::zeros(net.n());
    for t in 0..=max_steps {
        if let Some(&first) = seen.get(&state) {
            return Some(Attractor {
                transient: first,
                period: t - first,
            });
        }
        if t == max_steps {
            break;
        }
        seen.insert(state.clone(), t);
        net.step_into(&state, &mut next);
        std::mem::swap(&mut state, &mut next);
    }
    None
}

/// JSON document form of a network.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    n: usize,
    k: usize,
    bias: f64,
    inputs: Vec<Vec<usize>>,
    tables: Vec<String>,
    output_nodes: [usize; 2],
}

impl From<BooleanNetwork> for NetworkDoc {
    fn from(net: BooleanNetwork) -> Self {
        NetworkDoc {
            n: net.n,
            k: net.k,
            bias: net.bias,
            inputs: (0..net.n).map(|i| net.inputs(i).collect()).collect(),
            tables: (0..net.n)
                .map(|i| net.table(i).into_iter().map(|b| if b { '1' } else { '0' }).collect())
                .collect(),
            output_nodes: net.output_nodes,
        }
    }
}

impl TryFrom<NetworkDoc> for BooleanNetwork {
    type Error = ConfigError;

    fn try_from(doc: NetworkDoc) -> Result<Self, Self::Error> {
        if doc.inputs.len() != doc.n {
            return Err(ConfigError::Invalid(format!(
                "n = {} but {} input lists given",
                doc.n,
                doc.inputs.len()
            )));
        }
        let tables = doc
            .tables
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(ConfigError::Invalid(format!("table {i}: unexpected character {other:?}"))),
                    })
                    .collect::<Result<Vec<bool>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        BooleanNetwork::from_parts(doc.k, doc.bias, doc.inputs, tables, doc.output_nodes)
    }
}
