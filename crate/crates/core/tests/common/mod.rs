//! Reference implementations used as oracles. They deliberately share no
//! code paths with the library beyond its public data.

#![allow(dead_code)]

use bnplast::BooleanNetwork;

/// A network re-read from its JSON document: per-node input lists and
/// truth tables as '0'/'1' strings, index 0 leftmost.
pub struct PlainNetwork {
    pub inputs: Vec<Vec<usize>>,
    pub tables: Vec<String>,
}

impl PlainNetwork {
    pub fn from_network(net: &BooleanNetwork) -> Self {
        let doc: serde_json::Value = serde_json::from_str(&net.to_json()).unwrap();
        let inputs = doc["inputs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|l| l.as_array().unwrap().iter().map(|v| v.as_u64().unwrap() as usize).collect())
            .collect();
        let tables = doc["tables"]
            .as_array()
            .unwrap()
            .iter()
            .map(|t| t.as_str().unwrap().to_string())
            .collect();
        Self { inputs, tables }
    }

    pub fn n(&self) -> usize {
        self.inputs.len()
    }

    /// Synchronous update, one node and one table character at a time.
    pub fn step(&self, state: &[bool]) -> Vec<bool> {
        (0..self.n())
            .map(|i| {
                let mut index = 0;
                for (j, &src) in self.inputs[i].iter().enumerate() {
                    if state[src] {
                        index += 1 << j;
                    }
                }
                self.tables[i].as_bytes()[index] == b'1'
            })
            .collect()
    }

    pub fn trajectory(&self, init: &[bool], steps: usize) -> Vec<Vec<bool>> {
        let mut out = vec![init.to_vec()];
        for _ in 0..steps {
            let next = self.step(out.last().unwrap());
            out.push(next);
        }
        out
    }
}

/// Midrank of every value by counting, O(N^2).
fn midranks(pooled: &[f64]) -> Vec<f64> {
    pooled
        .iter()
        .map(|&x| {
            let less = pooled.iter().filter(|&&y| y < x).count() as f64;
            let equal = pooled.iter().filter(|&&y| y == x).count() as f64;
            less + (equal + 1.0) / 2.0
        })
        .collect()
}

/// Exact rank-sum p values by enumerating every way to label `|a|` of the
/// pooled observations as the first sample. Returns (U, p greater, p two-sided).
pub fn rank_sum_by_enumeration(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let na = a.len();
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let total = pooled.len();
    let ranks = midranks(&pooled);
    let u_of = |sum: f64| sum - (na * (na + 1)) as f64 / 2.0;
    let observed = u_of(ranks[..na].iter().sum());
    let mean = (na * (total - na)) as f64 / 2.0;

    let (mut all, mut greater, mut two) = (0u64, 0u64, 0u64);
    for mask in 0u32..(1 << total) {
        if mask.count_ones() as usize != na {
            continue;
        }
        let sum: f64 = (0..total).filter(|&i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
        let u = u_of(sum);
        all += 1;
        if u >= observed - 1e-9 {
            greater += 1;
        }
        if (u - mean).abs() >= (observed - mean).abs() - 1e-9 {
            two += 1;
        }
    }
    (observed, greater as f64 / all as f64, two as f64 / all as f64)
}
