//! Reachability posets of DAGs and the per-poset DAG count.
//!
//! For a DAG `G`, `v ⪰ w` means there is a directed path from `w` to `v`.
//! Grouping DAGs by this poset partitions them, and each group has exactly
//! `prod_v 2^(dom(v) - cov(v))` members, where `dom(v)` counts the sites
//! below `v` and `cov(v)` the sites covered by `v` (no strictly intermediate
//! element).

use num_bigint::BigUint;
use num_traits::One;

use crate::bitmat::BitMatrix;
use crate::dag::Dag;

/// Strict reachability poset with per-vertex dominance and cover counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ReachPoset {
    n: usize,
    /// `below.get(v, w)` iff `v ⪰ w` strictly, i.e. a directed path `w -> v`.
    below: BitMatrix,
    dom: Vec<usize>,
    cov: Vec<usize>,
}

/// Computes the reachability poset of `g`.
pub fn reachability_poset(g: &Dag) -> ReachPoset {
    let n = g.n();
    let order = g
        .topological_order_internal()
        .expect("Dag invariant: acyclic");
    // below[v] = union over parents p of ({p} ∪ below[p]); process in
    // topological order so parents are finished first.
    let mut below = BitMatrix::new(n);
    for &v in &order {
        let parents: Vec<usize> = g.iter_in0(v).collect();
        for p in parents {
            let row = below.row(p).to_vec();
            below.or_row_from(v, &row);
            below.set(v, p);
        }
    }
    let dom: Vec<usize> = (0..n).map(|v| below.row_count_ones(v)).collect();
    // v covers w iff v ⪰ w and no u has v ⪰ u ⪰ w; i.e. below[v] ∩ above-of-w
    // is empty apart from endpoints. Test: below(v) ∩ below-inverse... done
    // directly: w ∈ below(v) and below(v) ∩ {u : w ∈ below(u)} = ∅.
    let mut cov = vec![0usize; n];
    for v in 0..n {
        'w: for w in below.iter_row(v) {
            for u in below.iter_row(v) {
                if u != w && below.get(u, w) {
                    continue 'w;
                }
            }
            cov[v] += 1;
        }
    }
    ReachPoset { n, below, dom, cov }
}

impl ReachPoset {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `v ⪰ w` strictly (1-indexed).
    pub fn dominates(&self, v: usize, w: usize) -> bool {
        self.below.get(v - 1, w - 1)
    }

    /// Number of sites strictly below `v` (1-indexed).
    pub fn dom(&self, v: usize) -> usize {
        self.dom[v - 1]
    }

    /// Number of sites covered by `v` (1-indexed).
    pub fn cov(&self, v: usize) -> usize {
        self.cov[v - 1]
    }

    /// Sources: minimal elements (nothing below them).
    pub fn sources(&self) -> Vec<usize> {
        (0..self.n).filter(|&v| self.dom[v] == 0).map(|v| v + 1).collect()
    }

    /// Sinks: maximal elements (below nothing).
    pub fn sinks(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&v| (0..self.n).all(|u| !self.below.get(u, v)))
            .map(|v| v + 1)
            .collect()
    }

    /// Canonical key for grouping: the closure bits row by row.
    pub fn key(&self) -> Vec<u64> {
        (0..self.n).flat_map(|v| self.below.row(v).to_vec()).collect()
    }
}

/// Number of DAGs whose reachability poset is `p`: `prod_v 2^(dom(v)-cov(v))`.
pub fn poset_weight(p: &ReachPoset) -> BigUint {
    let shift: usize = (0..p.n).map(|v| p.dom[v] - p.cov[v]).sum();
    BigUint::one() << shift
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::example_dag_7;
    use crate::enumerate::enumerate_dags;
    use std::collections::HashMap;

    #[test]
    fn chain_dom_cov() {
        let g = Dag::from_edges(3, &[(1, 2), (2, 3)]).unwrap();
        let p = reachability_poset(&g);
        assert_eq!((p.dom(1), p.dom(2), p.dom(3)), (0, 1, 2));
        assert_eq!((p.cov(1), p.cov(2), p.cov(3)), (0, 1, 1));
        assert_eq!(poset_weight(&p), BigUint::from(2u32));
        assert_eq!(p.sources(), vec![1]);
        assert_eq!(p.sinks(), vec![3]);
    }

    #[test]
    fn antichain() {
        let g = Dag::empty(3).unwrap();
        let p = reachability_poset(&g);
        for v in 1..=3 {
            assert_eq!(p.dom(v), 0);
            assert_eq!(p.cov(v), 0);
        }
        assert_eq!(poset_weight(&p), BigUint::one());
    }

    #[test]
    fn two_chain_weight_is_one() {
        let g = Dag::from_edges(2, &[(1, 2)]).unwrap();
        assert_eq!(poset_weight(&reachability_poset(&g)), BigUint::one());
    }

    #[test]
    fn transitive_edge_invisible() {
        // 1->2->3 with and without 1->3 share the poset; the non-cover
        // relation 1 ⪰ ... is 3 ⪰ 1 via the path.
        let a = Dag::from_edges(3, &[(1, 2), (2, 3)]).unwrap();
        let b = Dag::from_edges(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(reachability_poset(&a), reachability_poset(&b));
    }

    #[test]
    fn example_poset_relations() {
        // In the 7-vertex tower-figure graph the relation 4 ⪰ 7 holds via
        // 7 -> 2 -> 1 -> 4, so the direct edge 7 -> 4 is a non-cover: 4
        // covers only 1.
        let g = Dag::from_edges(
            7,
            &[(7, 2), (7, 3), (5, 3), (2, 1), (3, 6), (1, 4), (1, 6), (7, 4)],
        )
        .unwrap();
        let p = reachability_poset(&g);
        assert!(p.dominates(4, 7));
        assert!(p.dominates(4, 1));
        assert_eq!(p.dom(4), 3);
        assert_eq!(p.cov(4), 1);
    }

    #[test]
    fn partition_of_dags_by_poset() {
        // Lemma-style partition check at n = 4: group sizes equal weights.
        let mut groups: HashMap<Vec<u64>, (usize, BigUint)> = HashMap::new();
        let mut total = 0usize;
        for g in enumerate_dags(4).unwrap() {
            total += 1;
            let p = reachability_poset(&g);
            let w = poset_weight(&p);
            let e = groups.entry(p.key()).or_insert((0, w.clone()));
            e.0 += 1;
            assert_eq!(e.1, w);
        }
        assert_eq!(total, 543);
        let mut sum = BigUint::default();
        for (count, weight) in groups.values() {
            assert_eq!(BigUint::from(*count), *weight);
            sum += weight;
        }
        assert_eq!(sum, BigUint::from(543u32));
    }

    #[test]
    fn example_dag_poset_consistency() {
        // dom counts reachable-from sets in edge direction.
        let g = example_dag_7();
        let p = reachability_poset(&g);
        // 2 is the unique source in this graph.
        assert_eq!(p.sources(), vec![2]);
    }
}
