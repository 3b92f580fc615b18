use thiserror::Error;

/// Structural class of an influence network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NetworkKind {
    /// A rooted tree: node 0 is the root and every other node has exactly one influencer parent.
    Hierarchy,
    /// A directed acyclic graph; influencers are all ancestors.
    Dag,
}

/// Rejections raised while validating an edge list.
///
/// Node ids in the messages are 1-based, matching the file formats.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("a network needs at least one node")]
    Empty,
    #[error("edge ({}, {}) references a node outside 1..={node_count}", .from + 1, .to + 1)]
    NodeOutOfRange {
        from: usize,
        to: usize,
        node_count: usize,
    },
    #[error("edge ({}, {}) breaks topological numbering: the influencer must have the smaller id", .from + 1, .to + 1)]
    NonTopologicalNumbering { from: usize, to: usize },
    #[error("node {} has more than one parent in a hierarchy", .node + 1)]
    MultipleParents { node: usize },
    #[error("directed cycle through node {}", .node + 1)]
    Cycle { node: usize },
    #[error("node {} is not reachable from the root", .node + 1)]
    DisconnectedHierarchy { node: usize },
}

/// A validated influence network with precomputed influencer and influencee sets.
///
/// Nodes are indexed `0..n`. Every edge `(i, j)` satisfies `i < j`, so index order is a
/// topological order and "processing from the highest index down" visits influencees
/// before their influencers.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    kind: NetworkKind,
    edges: Vec<(usize, usize)>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    influencers: Vec<Vec<usize>>,
    influencees: Vec<Vec<usize>>,
}

impl NetworkTopology {
    /// Validates `edges` (0-based `(influencer, influencee)` pairs) over `node_count` nodes.
    pub fn new(
        node_count: usize,
        kind: NetworkKind,
        edges: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        if node_count == 0 {
            return Err(TopologyError::Empty);
        }
        for &(from, to) in edges {
            if from >= node_count || to >= node_count {
                return Err(TopologyError::NodeOutOfRange {
                    from,
                    to,
                    node_count,
                });
            }
        }
        if kind == NetworkKind::Dag {
            if let Some(node) = find_cycle(node_count, edges) {
                return Err(TopologyError::Cycle { node });
            }
        }
        if let Some(&(from, to)) = edges.iter().find(|(from, to)| from >= to) {
            return Err(TopologyError::NonTopologicalNumbering { from, to });
        }

        let mut sorted: Vec<(usize, usize)> = edges.to_vec();
        sorted.sort_unstable();
        let mut parent = vec![None; node_count];
        let mut parents: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for (idx, &(from, to)) in sorted.iter().enumerate() {
            let duplicate = idx > 0 && sorted[idx - 1] == (from, to);
            match kind {
                NetworkKind::Hierarchy => {
                    if parent[to].is_some() {
                        return Err(TopologyError::MultipleParents { node: to });
                    }
                    parent[to] = Some(from);
                }
                NetworkKind::Dag if duplicate => continue,
                NetworkKind::Dag => {}
            }
            parents[to].push(from);
            children[from].push(to);
        }
        if kind == NetworkKind::Hierarchy {
            if let Some(node) = (1..node_count).find(|&v| parent[v].is_none()) {
                return Err(TopologyError::DisconnectedHierarchy { node });
            }
        } else {
            parent = vec![None; node_count];
        }

        // Index order is topological, so each node's ancestor set is complete once its parents are.
        let mut influencers: Vec<Vec<usize>> = Vec::with_capacity(node_count);
        let mut mark = vec![usize::MAX; node_count];
        for (v, ps) in parents.iter().enumerate() {
            let mut set = Vec::new();
            for &p in ps {
                for &a in influencers[p].iter().chain(std::iter::once(&p)) {
                    if mark[a] != v {
                        mark[a] = v;
                        set.push(a);
                    }
                }
            }
            set.sort_unstable();
            influencers.push(set);
        }
        let mut influencees: Vec<Vec<usize>> = vec![Vec::new(); node_count];
        for (v, set) in influencers.iter().enumerate() {
            for &a in set {
                influencees[a].push(v);
            }
        }

        Ok(Self {
            kind,
            edges: sorted_dedup(sorted),
            parent,
            children,
            influencers,
            influencees,
        })
    }

    /// Builds a hierarchy from a parent array; `parents[0]` must be `None`.
    pub fn from_parents(parents: &[Option<usize>]) -> Result<Self, TopologyError> {
        let edges: Vec<(usize, usize)> = parents
            .iter()
            .enumerate()
            .filter_map(|(child, p)| p.map(|p| (p, child)))
            .collect();
        Self::new(parents.len(), NetworkKind::Hierarchy, &edges)
    }

    /// The single-level hierarchy: a root with `n - 1` children.
    pub fn flat(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|j| (0, j)).collect();
        Self::new(n.max(1), NetworkKind::Hierarchy, &edges).expect("star is a valid hierarchy")
    }

    /// A line `0 -> 1 -> ... -> n-1`.
    pub fn chain(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (1..n).map(|j| (j - 1, j)).collect();
        Self::new(n.max(1), NetworkKind::Hierarchy, &edges).expect("chain is a valid hierarchy")
    }

    /// The complete `d`-ary tree of the given depth, numbered breadth first.
    pub fn balanced(d: usize, depth: usize) -> Self {
        assert!(d >= 1, "balanced tree needs degree >= 1");
        let mut n = 1usize;
        let mut level = 1usize;
        for _ in 0..depth {
            level *= d;
            n += level;
        }
        let edges: Vec<(usize, usize)> = (1..n).map(|j| ((j - 1) / d, j)).collect();
        Self::new(n, NetworkKind::Hierarchy, &edges).expect("balanced tree is a valid hierarchy")
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    /// Sorted, de-duplicated edge list.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Parent of `i` in a hierarchy; always `None` for the root and for DAGs.
    pub fn parent(&self, i: usize) -> Option<usize> {
        self.parent[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn child_count(&self, i: usize) -> usize {
        self.children[i].len()
    }

    /// All nodes whose communication effort reaches `i` (ancestors), ascending.
    pub fn influencers(&self, i: usize) -> &[usize] {
        &self.influencers[i]
    }

    /// All nodes reached by `i`'s communication effort (descendants), ascending.
    pub fn influencees(&self, i: usize) -> &[usize] {
        &self.influencees[i]
    }

    pub fn is_influencee(&self, i: usize, j: usize) -> bool {
        self.influencees[i].binary_search(&j).is_ok()
    }

    pub fn is_leaf(&self, i: usize) -> bool {
        self.children[i].is_empty()
    }

    /// Number of influencers of `i`; in a hierarchy this is the depth of `i` below the root.
    pub fn depth(&self, i: usize) -> usize {
        self.influencers[i].len()
    }

    /// `Some((d, depth))` when this is a complete `d`-ary hierarchy of depth at least one.
    pub fn balanced_shape(&self) -> Option<(usize, usize)> {
        if self.kind != NetworkKind::Hierarchy || self.node_count() < 2 {
            return None;
        }
        let d = self.child_count(0);
        let depth = (0..self.node_count())
            .filter(|&i| self.is_leaf(i))
            .map(|i| self.depth(i))
            .next()?;
        let uniform = (0..self.node_count()).all(|i| {
            if self.is_leaf(i) {
                self.depth(i) == depth
            } else {
                self.child_count(i) == d
            }
        });
        uniform.then_some((d, depth))
    }
}

fn sorted_dedup(mut edges: Vec<(usize, usize)>) -> Vec<(usize, usize)> {
    edges.dedup();
    edges
}

/// Returns a node on a directed cycle, if any (Kahn's algorithm leftovers).
fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<usize> {
    let mut indegree = vec![0usize; n];
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        out[a].push(b);
        indegree[b] += 1;
    }
    let mut stack: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    let mut seen = 0;
    while let Some(v) = stack.pop() {
        seen += 1;
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                stack.push(w);
            }
        }
    }
    if seen == n {
        None
    } else {
        (0..n).find(|&v| indegree[v] > 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_node_star() {
        let net = NetworkTopology::new(3, NetworkKind::Hierarchy, &[(0, 1), (0, 2)]).unwrap();
        assert_eq!(net.influencees(0), &[1, 2]);
        assert_eq!(net.child_count(0), 2);
        assert_eq!(net.influencers(2), &[0]);
        assert_eq!(net.balanced_shape(), Some((2, 1)));
    }

    #[test]
    fn single_node() {
        let net = NetworkTopology::new(1, NetworkKind::Hierarchy, &[]).unwrap();
        assert!(net.influencees(0).is_empty());
        assert!(net.is_leaf(0));
        assert_eq!(net.balanced_shape(), None);
    }

    #[test]
    fn rejects_reversed_edge() {
        let err = NetworkTopology::new(2, NetworkKind::Hierarchy, &[(1, 0)]).unwrap_err();
        assert_eq!(
            err,
            TopologyError::NonTopologicalNumbering { from: 1, to: 0 }
        );
        assert_eq!(
            err.to_string(),
            "edge (2, 1) breaks topological numbering: the influencer must have the smaller id"
        );
    }

    #[test]
    fn rejects_self_loop() {
        let err = NetworkTopology::new(2, NetworkKind::Hierarchy, &[(0, 1), (1, 1)]).unwrap_err();
        assert!(matches!(err, TopologyError::NonTopologicalNumbering { .. }));
    }

    #[test]
    fn rejects_two_parents() {
        let err =
            NetworkTopology::new(3, NetworkKind::Hierarchy, &[(0, 1), (0, 2), (1, 2)]).unwrap_err();
        assert_eq!(err, TopologyError::MultipleParents { node: 2 });
    }

    #[test]
    fn rejects_orphan() {
        let err = NetworkTopology::new(3, NetworkKind::Hierarchy, &[(0, 1)]).unwrap_err();
        assert_eq!(err, TopologyError::DisconnectedHierarchy { node: 2 });
    }

    #[test]
    fn rejects_cycle_in_dag() {
        let err = NetworkTopology::new(3, NetworkKind::Dag, &[(0, 1), (1, 2), (2, 1)]).unwrap_err();
        assert!(matches!(err, TopologyError::Cycle { .. }));
    }

    #[test]
    fn rejects_out_of_range() {
        let err = NetworkTopology::new(2, NetworkKind::Dag, &[(0, 2)]).unwrap_err();
        assert!(matches!(err, TopologyError::NodeOutOfRange { .. }));
        assert_eq!(
            NetworkTopology::new(0, NetworkKind::Dag, &[]),
            Err(TopologyError::Empty)
        );
    }

    #[test]
    fn dag_ancestor_sets() {
        // diamond 0 -> {1, 2} -> 3, a side branch 1 -> 4, and one repeated edge
        let net = NetworkTopology::new(
            5,
            NetworkKind::Dag,
            &[(0, 1), (0, 2), (1, 3), (2, 3), (1, 4), (0, 1)],
        )
        .unwrap();
        assert_eq!(net.influencers(3), &[0, 1, 2]);
        assert_eq!(net.influencers(4), &[0, 1]);
        assert_eq!(net.influencees(0), &[1, 2, 3, 4]);
        assert_eq!(net.influencees(2), &[3]);
        assert_eq!(net.child_count(1), 2);
        assert_eq!(net.edges().len(), 5);
        assert_eq!(net.parent(3), None);
    }

    #[test]
    fn balanced_numbering() {
        let net = NetworkTopology::balanced(2, 2);
        assert_eq!(net.node_count(), 7);
        assert_eq!(net.children(0), &[1, 2]);
        assert_eq!(net.children(2), &[5, 6]);
        assert_eq!(net.influencers(6), &[0, 2]);
        assert_eq!(net.balanced_shape(), Some((2, 2)));
        assert_eq!(NetworkTopology::balanced(6, 1), NetworkTopology::flat(7));
        assert_eq!(NetworkTopology::chain(3).balanced_shape(), Some((1, 2)));
    }

    #[test]
    fn unbalanced_is_detected() {
        let net = NetworkTopology::from_parents(&[None, Some(0), Some(0), Some(1)]).unwrap();
        assert_eq!(net.balanced_shape(), None);
        assert_eq!(net.depth(3), 2);
        assert_eq!(net.parent(3), Some(1));
    }
}
