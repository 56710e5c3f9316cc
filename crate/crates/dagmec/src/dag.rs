//! Labeled directed acyclic graphs with word-parallel adjacency queries.

use crate::bitmat::BitMatrix;
use crate::error::{Error, Result};

/// Hard upper bound on the vertex count.
pub const MAX_VERTICES: usize = 4096;

/// A labeled DAG on vertices `1..=n`.
///
/// Adjacency is stored twice, as out-neighbor and in-neighbor bit rows, so
/// that collider tests and closure computations run word-parallel. Vertices
/// are 1-indexed in the public API and in all serialized forms; internally
/// rows are 0-indexed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    n: usize,
    out: BitMatrix,
    inn: BitMatrix,
}

/// A v-structure `a -> c <- b` with `a < b` and `a`, `b` nonadjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VStructure {
    pub a: usize,
    pub b: usize,
    pub collider: usize,
}

/// Result of [`Dag::non_collider_edges`]: the edges that belong to no
/// v-structure, plus the set of their endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonColliderEdges {
    /// Directed edges `(u, v)` outside every v-structure, sorted.
    pub edges: Vec<(usize, usize)>,
    /// Sorted endpoints of those edges.
    pub vertices: Vec<usize>,
}

impl Dag {
    /// The edgeless DAG on `n` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph(n));
        }
        if n > MAX_VERTICES {
            return Err(Error::TooManyVertices(n));
        }
        Ok(Dag {
            n,
            out: BitMatrix::new(n),
            inn: BitMatrix::new(n),
        })
    }

    /// Builds a DAG from 1-indexed directed edges `u -> v`.
    ///
    /// Rejects self-loops, pairs present in both orientations, out-of-range
    /// vertices, and directed cycles.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Dag::empty(n)?;
        for &(u, v) in edges {
            if u == 0 || u > n {
                return Err(Error::VertexOutOfRange(u, n));
            }
            if v == 0 || v > n {
                return Err(Error::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if g.out.get(v - 1, u - 1) {
                return Err(Error::TwoCycle(u, v));
            }
            g.out.set(u - 1, v - 1);
            g.inn.set(v - 1, u - 1);
        }
        if g.topological_order_internal().is_none() {
            return Err(Error::Cyclic);
        }
        Ok(g)
    }

    /// Used by the samplers, which construct layer-respecting edges only.
    pub(crate) fn add_edge_unchecked(&mut self, u0: usize, v0: usize) {
        self.out.set(u0, v0);
        self.inn.set(v0, u0);
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.out.count_ones()
    }

    /// Is `u -> v` present (1-indexed)?
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out.get(u - 1, v - 1)
    }

    /// Are `u` and `v` adjacent in either orientation (1-indexed)?
    pub fn adjacent(&self, u: usize, v: usize) -> bool {
        self.out.get(u - 1, v - 1) || self.out.get(v - 1, u - 1)
    }

    /// All directed edges `(u, v)`, 1-indexed, sorted by `(u, v)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut es = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in self.out.iter_row(u) {
                es.push((u + 1, v + 1));
            }
        }
        es
    }

    pub(crate) fn out_row(&self, v0: usize) -> &[u64] {
        self.out.row(v0)
    }

    pub(crate) fn in_row(&self, v0: usize) -> &[u64] {
        self.inn.row(v0)
    }

    pub(crate) fn iter_out0(&self, v0: usize) -> crate::bitmat::RowIter<'_> {
        self.out.iter_row(v0)
    }

    pub(crate) fn iter_in0(&self, v0: usize) -> crate::bitmat::RowIter<'_> {
        self.inn.iter_row(v0)
    }

    /// Children of `v` (1-indexed), ascending.
    pub fn children(&self, v: usize) -> Vec<usize> {
        self.out.iter_row(v - 1).map(|c| c + 1).collect()
    }

    /// Parents of `v` (1-indexed), ascending.
    pub fn parents(&self, v: usize) -> Vec<usize> {
        self.inn.iter_row(v - 1).map(|p| p + 1).collect()
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out.row_count_ones(v - 1)
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.inn.row_count_ones(v - 1)
    }

    /// Kahn's algorithm; `None` if the stored relation has a cycle.
    /// Returned order is 0-indexed and deterministic (smallest vertex first).
    pub(crate) fn topological_order_internal(&self) -> Option<Vec<usize>> {
        let n = self.n;
        let mut indeg: Vec<usize> = (0..n).map(|v| self.inn.row_count_ones(v)).collect();
        // A BinaryHeap would also work; a sorted ready-vector keeps the
        // order deterministic without an extra dependency.
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop() {
            order.push(v);
            for c in self.out.iter_row(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    // Insert keeping descending order so pop() yields min.
                    let pos = ready.partition_point(|&x| x > c);
                    ready.insert(pos, c);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// A topological order of the vertices, 1-indexed.
    pub fn topological_order(&self) -> Vec<usize> {
        self.topological_order_internal()
            .expect("Dag invariant: acyclic")
            .into_iter()
            .map(|v| v + 1)
            .collect()
    }

    /// The skeleton: unordered adjacent pairs `{u, v}` as `(min, max)`, sorted.
    pub fn skeleton(&self) -> Vec<(usize, usize)> {
        let mut es: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        es.sort_unstable();
        es
    }

    /// All v-structures `a -> c <- b` with `a < b` nonadjacent, sorted.
    ///
    /// Scans parent pairs per collider; the nonadjacency test is a pair of
    /// single-bit probes, so the scan is cheap even on dense graphs.
    pub fn v_structures(&self) -> Vec<VStructure> {
        let mut out = Vec::new();
        for c in 0..self.n {
            let parents: Vec<usize> = self.inn.iter_row(c).collect();
            for (i, &a) in parents.iter().enumerate() {
                for &b in &parents[i + 1..] {
                    if !self.out.get(a, b) && !self.out.get(b, a) {
                        out.push(VStructure {
                            a: a + 1,
                            b: b + 1,
                            collider: c + 1,
                        });
                    }
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Is the directed edge `u -> v` (0-indexed) part of some v-structure?
    ///
    /// True iff some other parent `w` of `v` is nonadjacent to `u`, i.e.
    /// `parents(v) \ {u}` is not contained in `neighbors(u) ∪ {u}`.
    #[inline]
    fn is_collider_edge(&self, u0: usize, v0: usize, self_row: &mut [u64]) -> bool {
        // self_row = {u}: P(v) \ ({u} ∪ N_out(u) ∪ N_in(u)) nonempty?
        for w in self_row.iter_mut() {
            *w = 0;
        }
        self_row[u0 / 64] = 1u64 << (u0 % 64);
        let pv = self.inn.row(v0);
        let ou = self.out.row(u0);
        let iu = self.inn.row(u0);
        !pv.iter()
            .zip(self_row.iter())
            .zip(ou.iter().zip(iu.iter()))
            .all(|((&wp, &ws), (&wo, &wi))| wp & !ws & !wo & !wi == 0)
    }

    /// The non-collider edges `C(G)` and their endpoint set `N(G)`.
    pub fn non_collider_edges(&self) -> NonColliderEdges {
        let words = self.out.row(0).len();
        let mut self_row = vec![0u64; words];
        let mut edges = Vec::new();
        let mut endpoint = vec![false; self.n];
        for u in 0..self.n {
            for v in self.out.iter_row(u) {
                if !self.is_collider_edge(u, v, &mut self_row) {
                    edges.push((u + 1, v + 1));
                    endpoint[u] = true;
                    endpoint[v] = true;
                }
            }
        }
        edges.sort_unstable();
        let vertices = (0..self.n).filter(|&v| endpoint[v]).map(|v| v + 1).collect();
        NonColliderEdges { edges, vertices }
    }

    /// Number of non-collider edges, without materializing them.
    pub fn non_collider_edge_count(&self) -> usize {
        let words = self.out.row(0).len();
        let mut self_row = vec![0u64; words];
        let mut count = 0;
        for u in 0..self.n {
            for v in self.out.iter_row(u) {
                if !self.is_collider_edge(u, v, &mut self_row) {
                    count += 1;
                }
            }
        }
        count
    }

    /// Reverse every edge. The result is again a DAG.
    pub fn reversed(&self) -> Dag {
        Dag {
            n: self.n,
            out: self.inn.clone(),
            inn: self.out.clone(),
        }
    }

    /// Compact canonical key: the row-major out-adjacency bits. Only
    /// meaningful for comparing DAGs on the same vertex count.
    pub fn edge_key(&self) -> Vec<u64> {
        (0..self.n).flat_map(|v| self.out.row(v).to_vec()).collect()
    }
}

impl std::fmt::Debug for Dag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Dag(n={}, edges={:?})", self.n, self.edges())
    }
}

/// Does the raw edge relation admit a topological order?
///
/// Unlike [`Dag::from_edges`] this accepts 2-cycles and reports them as
/// cyclic rather than rejecting the input, so it can vet arbitrary digraphs.
pub fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> Result<bool> {
    if n == 0 {
        return Err(Error::EmptyGraph(n));
    }
    if n > MAX_VERTICES {
        return Err(Error::TooManyVertices(n));
    }
    let mut adj = vec![Vec::new(); n];
    let mut indeg = vec![0usize; n];
    for &(u, v) in edges {
        if u == 0 || u > n {
            return Err(Error::VertexOutOfRange(u, n));
        }
        if v == 0 || v > n {
            return Err(Error::VertexOutOfRange(v, n));
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        adj[u - 1].push(v - 1);
        indeg[v - 1] += 1;
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = queue.pop() {
        seen += 1;
        for &c in &adj[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                queue.push(c);
            }
        }
    }
    Ok(seen == n)
}

/// Helper used across tests: the 7-vertex example graph with two
/// v-structures and five non-collider edges.
pub fn example_dag_7() -> Dag {
    Dag::from_edges(
        7,
        &[
            (2, 7),
            (2, 1),
            (7, 4),
            (1, 4),
            (4, 3),
            (3, 5),
            (3, 6),
            (1, 6),
            (7, 3),
        ],
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn acyclicity() {
        assert!(is_acyclic(3, &[]).unwrap());
        assert!(!is_acyclic(2, &[(1, 2), (2, 1)]).unwrap());
        assert!(is_acyclic(
            7,
            &[(2, 7), (2, 1), (7, 4), (1, 4), (4, 3), (3, 5), (3, 6), (1, 6), (7, 3)]
        )
        .unwrap());
        assert!(!is_acyclic(3, &[(1, 2), (2, 3), (3, 1)]).unwrap());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Dag::empty(0), Err(Error::EmptyGraph(0))));
        assert!(matches!(
            Dag::from_edges(2, &[(1, 1)]),
            Err(Error::SelfLoop(1))
        ));
        assert!(matches!(
            Dag::from_edges(2, &[(1, 2), (2, 1)]),
            Err(Error::TwoCycle(2, 1))
        ));
        assert!(matches!(
            Dag::from_edges(3, &[(1, 2), (2, 3), (3, 1)]),
            Err(Error::Cyclic)
        ));
        assert!(matches!(
            Dag::from_edges(2, &[(1, 3)]),
            Err(Error::VertexOutOfRange(3, 2))
        ));
    }

    #[test]
    fn skeleton_basics() {
        assert_eq!(Dag::from_edges(2, &[(1, 2)]).unwrap().skeleton(), vec![(1, 2)]);
        assert_eq!(example_dag_7().skeleton().len(), 9);
        assert!(Dag::empty(4).unwrap().skeleton().is_empty());
    }

    #[test]
    fn skeleton_reversal_invariant() {
        let g = example_dag_7();
        assert_eq!(g.skeleton(), g.reversed().skeleton());
    }

    #[test]
    fn v_structures_basics() {
        let collider = Dag::from_edges(3, &[(1, 3), (2, 3)]).unwrap();
        assert_eq!(
            collider.v_structures(),
            vec![VStructure { a: 1, b: 2, collider: 3 }]
        );

        let shielded = Dag::from_edges(3, &[(1, 3), (2, 3), (1, 2)]).unwrap();
        assert!(shielded.v_structures().is_empty());

        let vs = example_dag_7().v_structures();
        assert_eq!(
            vs,
            vec![
                VStructure { a: 1, b: 3, collider: 6 },
                VStructure { a: 1, b: 7, collider: 4 },
            ]
        );
    }

    #[test]
    fn non_collider_edges_basics() {
        let g = example_dag_7();
        let nc = g.non_collider_edges();
        assert_eq!(nc.edges, vec![(2, 1), (2, 7), (3, 5), (4, 3), (7, 3)]);
        assert_eq!(nc.edges.len(), 5);

        let collider = Dag::from_edges(3, &[(1, 3), (2, 3)]).unwrap();
        assert!(collider.non_collider_edges().edges.is_empty());

        let single = Dag::from_edges(2, &[(1, 2)]).unwrap();
        let nc = single.non_collider_edges();
        assert_eq!(nc.edges, vec![(1, 2)]);
        assert_eq!(nc.vertices, vec![1, 2]);
    }

    #[test]
    fn vstructure_noncollider_consistency() {
        // An edge is non-collider iff it appears in no returned v-structure.
        let g = example_dag_7();
        let vs = g.v_structures();
        let mut vedges = std::collections::BTreeSet::new();
        for v in &vs {
            vedges.insert((v.a, v.collider));
            vedges.insert((v.b, v.collider));
        }
        let nc: std::collections::BTreeSet<_> =
            g.non_collider_edges().edges.into_iter().collect();
        for e in g.edges() {
            assert_eq!(nc.contains(&e), !vedges.contains(&e), "edge {e:?}");
        }
    }

    #[test]
    fn topological_order_is_valid() {
        let g = example_dag_7();
        let ord = g.topological_order();
        let pos: std::collections::HashMap<usize, usize> =
            ord.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        for (u, v) in g.edges() {
            assert!(pos[&u] < pos[&v]);
        }
    }
}
