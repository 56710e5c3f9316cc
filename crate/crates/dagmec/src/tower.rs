//! Tower decomposition: iterative sink peeling into layers, the
//! adjacent-layer tower graph, exact per-tower DAG counts, and
//! regeneration points.

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bitmat::BitMatrix;
use crate::dag::Dag;
use crate::error::{Error, Result};

/// Layer-size vector `(h_1, ..., h_T)` with layer 1 the sinks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TowerVector(Vec<usize>);

impl TowerVector {
    /// Validates that every layer size is positive and the vector is nonempty.
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidTowerVector);
        }
        Ok(TowerVector(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    /// Total number of sites `|h|`.
    pub fn n(&self) -> usize {
        self.0.iter().sum()
    }

    /// Height `T`: the number of layers.
    pub fn height(&self) -> usize {
        self.0.len()
    }

    /// Size of layer `i`, 1-indexed.
    pub fn layer(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    /// 1-indexed positions `tau_1 < tau_2 < ...` of the layers of size 1.
    pub fn regeneration_points(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|&(_, &h)| h == 1)
            .map(|(i, _)| i + 1)
            .collect()
    }

    /// `R(h)`: the number of regeneration layers.
    pub fn regeneration_count(&self) -> usize {
        self.0.iter().filter(|&&h| h == 1).count()
    }
}

/// The tower graph: layer assignment plus adjacent-layer edges only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tower {
    n: usize,
    /// 1-based layer index per vertex (0-indexed slot).
    layer_of: Vec<usize>,
    /// Vertices (1-indexed) per layer, ascending; `layers[0]` is layer 1.
    layers: Vec<Vec<usize>>,
    /// Adjacent-layer out-edges: `down.get(v, w)` iff `v -> w` with
    /// `layer(v) = layer(w) + 1`.
    down: BitMatrix,
}

impl Tower {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn height(&self) -> usize {
        self.layers.len()
    }

    /// 1-based layer index of vertex `v` (1-indexed).
    pub fn layer_of(&self, v: usize) -> usize {
        self.layer_of[v - 1]
    }

    /// Vertices of layer `i` (1-indexed layer), ascending 1-indexed labels.
    pub fn layer(&self, i: usize) -> &[usize] {
        &self.layers[i - 1]
    }

    pub fn vector(&self) -> TowerVector {
        TowerVector(self.layers.iter().map(|l| l.len()).collect())
    }

    /// Tower out-degree `c(v)` (1-indexed vertex).
    pub fn out_degree(&self, v: usize) -> usize {
        self.down.row_count_ones(v - 1)
    }

    /// Tower edges `(v, w)` into the layer below, 1-indexed, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut es = Vec::new();
        for v in 0..self.n {
            for w in self.down.iter_row(v) {
                es.push((v + 1, w + 1));
            }
        }
        es.sort_unstable();
        es
    }

    /// Canonical key for grouping DAGs by tower.
    pub fn key(&self) -> (Vec<usize>, Vec<(usize, usize)>) {
        (self.layer_of.clone(), self.edges())
    }
}

/// Peels sinks iteratively and records layers plus adjacent-layer edges.
pub fn tower_decompose(g: &Dag) -> (Tower, TowerVector) {
    let n = g.n();
    let mut remaining_out: Vec<usize> = (1..=n).map(|v| g.out_degree(v)).collect();
    let mut assigned = vec![false; n];
    let mut layer_of = vec![0usize; n];
    let mut layers: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&v| remaining_out[v] == 0).collect();
    while !current.is_empty() {
        let li = layers.len() + 1;
        let mut layer = Vec::with_capacity(current.len());
        for &v in &current {
            assigned[v] = true;
            layer_of[v] = li;
            layer.push(v + 1);
        }
        layer.sort_unstable();
        layers.push(layer);
        let mut next = Vec::new();
        for &v in &current {
            for p in g.iter_in0(v) {
                remaining_out[p] -= 1;
                if remaining_out[p] == 0 && !assigned[p] {
                    next.push(p);
                }
            }
        }
        current = next;
    }
    debug_assert!(assigned.iter().all(|&a| a));

    let mut down = BitMatrix::new(n);
    for v in 0..n {
        for w in g.iter_out0(v) {
            if layer_of[v] == layer_of[w] + 1 {
                down.set(v, w);
            }
        }
    }
    let tower = Tower {
        n,
        layer_of,
        layers,
        down,
    };
    let vector = tower.vector();
    (tower, vector)
}

impl Tower {
    /// `d(v)`: the number of sites reachable from `v` by a directed path in
    /// some DAG of this tower's class — the out-neighbors in the adjacent
    /// layer plus every site two or more layers down (those edges are free).
    pub fn reach_count(&self, v: usize) -> usize {
        self.out_degree(v) + self.sites_two_below(self.layer_of(v))
    }

    /// Sites in layers `1..=i-2`.
    fn sites_two_below(&self, i: usize) -> usize {
        self.layers[..i.saturating_sub(2)]
            .iter()
            .map(|l| l.len())
            .sum()
    }
}

/// Exact number of DAGs with tower `t`: `prod_v 2^(d(v) - c(v))` with
/// `d(v)` as in [`Tower::reach_count`] and `c(v)` the tower out-degree.
///
/// Adjacent-layer pairs are fully determined by the tower (present iff a
/// tower edge), so the free choices are exactly the pairs at layer
/// distance two or more: `d(v) - c(v)` per vertex.
pub fn tower_dag_count(t: &Tower) -> BigUint {
    let mut shift = 0usize;
    for (idx, layer) in t.layers.iter().enumerate() {
        shift += layer.len() * t.sites_two_below(idx + 1);
    }
    BigUint::one() << shift
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::enumerate_dags;
    use std::collections::HashMap;

    #[test]
    fn figure_tower() {
        let g = Dag::from_edges(
            7,
            &[(7, 2), (7, 3), (5, 3), (2, 1), (3, 6), (1, 4), (1, 6), (7, 4)],
        )
        .unwrap();
        let (t, h) = tower_decompose(&g);
        assert_eq!(h.sizes(), &[2, 2, 2, 1]);
        assert_eq!(t.layer(1), &[4, 6]);
        assert_eq!(t.layer(2), &[1, 3]);
        assert_eq!(t.layer(3), &[2, 5]);
        assert_eq!(t.layer(4), &[7]);
        // The skip edge 7 -> 4 crosses three layers and is dropped.
        assert!(!t.edges().contains(&(7, 4)));
    }

    #[test]
    fn chain_and_empty() {
        let chain = Dag::from_edges(4, &[(1, 2), (2, 3), (3, 4)]).unwrap();
        let (_, h) = tower_decompose(&chain);
        assert_eq!(h.sizes(), &[1, 1, 1, 1]);
        assert_eq!(h.height(), 4);

        let empty = Dag::empty(5).unwrap();
        let (_, h) = tower_decompose(&empty);
        assert_eq!(h.sizes(), &[5]);
    }

    #[test]
    fn tower_counts_small() {
        // Two stacked vertices joined by the mandatory edge: exactly 1 DAG.
        let g = Dag::from_edges(2, &[(1, 2)]).unwrap();
        let (t, _) = tower_decompose(&g);
        assert_eq!(tower_dag_count(&t), BigUint::one());

        // Three-layer single chain: the top-to-bottom skip edge is free.
        let g = Dag::from_edges(3, &[(1, 2), (2, 3)]).unwrap();
        let (t, _) = tower_decompose(&g);
        assert_eq!(tower_dag_count(&t), BigUint::from(2u32));
    }

    #[test]
    fn towers_partition_dags_n4() {
        let mut groups: HashMap<(Vec<usize>, Vec<(usize, usize)>), usize> = HashMap::new();
        let mut counts: HashMap<(Vec<usize>, Vec<(usize, usize)>), BigUint> = HashMap::new();
        for g in enumerate_dags(4).unwrap() {
            let (t, _) = tower_decompose(&g);
            let key = t.key();
            *groups.entry(key.clone()).or_insert(0) += 1;
            counts.entry(key).or_insert_with(|| tower_dag_count(&t));
        }
        let mut total = BigUint::default();
        for (key, group_size) in &groups {
            assert_eq!(BigUint::from(*group_size), counts[key], "tower {key:?}");
            total += &counts[key];
        }
        assert_eq!(total, BigUint::from(543u32));
    }

    #[test]
    fn regeneration_points_basics() {
        let h = TowerVector::new(vec![2, 1, 2, 3, 1, 1, 2]).unwrap();
        assert_eq!(h.regeneration_points(), vec![2, 5, 6]);
        assert_eq!(h.regeneration_count(), 3);

        let ones = TowerVector::new(vec![1, 1, 1]).unwrap();
        assert_eq!(ones.regeneration_points(), vec![1, 2, 3]);

        let flat = TowerVector::new(vec![5]).unwrap();
        assert!(flat.regeneration_points().is_empty());
        assert_eq!(flat.regeneration_count(), 0);
    }

    #[test]
    fn vector_serializes_as_plain_array() {
        let h = TowerVector::new(vec![2, 2, 1]).unwrap();
        assert_eq!(serde_json::to_string(&h).unwrap(), "[2,2,1]");
        let back: TowerVector = serde_json::from_str("[2,2,1]").unwrap();
        assert_eq!(back, h);
    }
}
