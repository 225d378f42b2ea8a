use std::collections::{BTreeSet, VecDeque};

use petgraph::unionfind::UnionFind;

use crate::{EquivRelation, FiniteSpace, PointSet, SpaceError};

/// A symmetric, irreflexive set of ordered pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graphing {
    space: FiniteSpace,
    edges: BTreeSet<(usize, usize)>,
}

/// Why a graphing fails to be a treeing of a given relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeingViolation {
    /// The pair joins points that are not related.
    EdgeOutsideRelation(usize, usize),
    /// A closed path `v0, v1, ..., v0` inside one class.
    Cycle(Vec<usize>),
    /// Two related points with no path between them.
    Disconnected(usize, usize),
}

impl Graphing {
    pub fn empty(space: FiniteSpace) -> Self {
        Graphing { space, edges: BTreeSet::new() }
    }

    /// Takes ordered pairs; both orientations must be present.
    pub fn from_pairs<I>(space: FiniteSpace, pairs: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut edges = BTreeSet::new();
        for (x, y) in pairs {
            space.check_point(x)?;
            space.check_point(y)?;
            if x == y {
                return Err(SpaceError::Loop(x));
            }
            edges.insert((x, y));
        }
        if let Some(&(x, y)) = edges.iter().find(|(x, y)| !edges.contains(&(*y, *x))) {
            return Err(SpaceError::NotSymmetric(x, y));
        }
        Ok(Graphing { space, edges })
    }

    /// Takes unordered edges and adds both orientations.
    pub fn from_edges<I>(space: FiniteSpace, edges: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let pairs: Vec<_> = edges.into_iter().flat_map(|(x, y)| [(x, y), (y, x)]).collect();
        Self::from_pairs(space, pairs)
    }

    pub fn space(&self) -> FiniteSpace {
        self.space
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.edges.contains(&(x, y))
    }

    /// All ordered pairs.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// One pair `(x, y)` with `x < y` per edge.
    pub fn unordered_edges(&self) -> Vec<(usize, usize)> {
        self.edges.iter().copied().filter(|(x, y)| x < y).collect()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len() / 2
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn union(&self, other: &Graphing) -> Result<Graphing, SpaceError> {
        self.space.check_same(&other.space)?;
        let edges = self.edges.union(&other.edges).copied().collect();
        Ok(Graphing { space: self.space, edges })
    }

    /// The relation generated on the whole space.
    pub fn generated_relation(&self) -> EquivRelation {
        EquivRelation::generated_by(&PointSet::full(self.space), self.pairs()).expect("edges are in range")
    }

    /// Moves the graphing along an injective map into `target`.
    pub fn push_forward(&self, embed: &[usize], target: FiniteSpace) -> Result<Graphing, SpaceError> {
        Graphing::from_pairs(target, self.pairs().map(|(x, y)| (embed[x], embed[y])))
    }

    fn neighbors(&self, x: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.range((x, 0)..(x + 1, 0)).map(|&(_, y)| y)
    }

    fn path(&self, from: usize, to: usize, allowed: &BTreeSet<(usize, usize)>) -> Vec<usize> {
        let mut prev = vec![usize::MAX; self.space.size()];
        prev[from] = from;
        let mut queue = VecDeque::from([from]);
        while let Some(v) = queue.pop_front() {
            if v == to {
                break;
            }
            for w in self.neighbors(v) {
                if prev[w] == usize::MAX && allowed.contains(&(v.min(w), v.max(w))) {
                    prev[w] = v;
                    queue.push_back(w);
                }
            }
        }
        let mut path = vec![to];
        let mut v = to;
        while v != from {
            v = prev[v];
            path.push(v);
        }
        path.reverse();
        path
    }

    /// `None` iff every class of `rel` carries a tree and no edge leaves a class.
    ///
    /// Points outside the domain of `rel` must carry no edges.
    pub fn treeing_violation(&self, rel: &EquivRelation) -> Option<TreeingViolation> {
        if let Some(&(x, y)) = self.edges.iter().find(|(x, y)| !rel.related(*x, *y)) {
            return Some(TreeingViolation::EdgeOutsideRelation(x, y));
        }
        let mut uf = UnionFind::<usize>::new(self.space.size());
        let mut forest = BTreeSet::new();
        for (x, y) in self.unordered_edges() {
            if !uf.union(x, y) {
                let mut cycle = self.path(y, x, &forest);
                cycle.push(y);
                return Some(TreeingViolation::Cycle(cycle));
            }
            forest.insert((x, y));
        }
        for class in rel.classes() {
            let root = uf.find(class[0]);
            if let Some(&y) = class.iter().find(|&&y| uf.find(y) != root) {
                return Some(TreeingViolation::Disconnected(class[0], y));
            }
        }
        None
    }

    pub fn is_treeing_of(&self, rel: &EquivRelation) -> bool {
        self.treeing_violation(rel).is_none()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x4() -> FiniteSpace {
        FiniteSpace::new(4).unwrap()
    }

    #[test]
    fn path_graphing_is_a_treeing() {
        let g = Graphing::from_edges(x4(), [(0, 1), (1, 2)]).unwrap();
        let r = g.generated_relation();
        assert_eq!(r.classes(), vec![vec![0, 1, 2], vec![3]]);
        assert!(g.is_treeing_of(&r));
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn triangle_is_reported_as_cycle() {
        let g = Graphing::from_edges(x4(), [(0, 1), (1, 2), (2, 0)]).unwrap();
        let r = g.generated_relation();
        match g.treeing_violation(&r) {
            Some(TreeingViolation::Cycle(c)) => {
                assert_eq!(c.first(), c.last());
                assert_eq!(c.len(), 4);
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn missing_edge_is_a_disconnection() {
        let g = Graphing::from_edges(x4(), [(0, 1)]).unwrap();
        let r = EquivRelation::from_classes(x4(), [vec![0, 1, 2], vec![3]]).unwrap();
        assert_eq!(g.treeing_violation(&r), Some(TreeingViolation::Disconnected(0, 2)));
    }

    #[test]
    fn asymmetric_and_loop_pairs_are_rejected() {
        assert_eq!(Graphing::from_pairs(x4(), [(0, 1)]).unwrap_err(), SpaceError::NotSymmetric(0, 1));
        assert_eq!(Graphing::from_pairs(x4(), [(2, 2)]).unwrap_err(), SpaceError::Loop(2));
    }
}
