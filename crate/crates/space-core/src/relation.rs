use std::fmt;

use petgraph::unionfind::UnionFind;

use crate::{FiniteSpace, PartialIso, PointSet, SpaceError};

/// How a subset sits inside a relation's domain.
///
/// A fundamental domain is always complete, so it is reported as `Both`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    Both,
    Complete,
    Neither,
}

/// A partition of a sub-domain of a finite space.
///
/// `class_of[x]` is `None` outside the domain and otherwise the least member
/// of the class of `x`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct EquivRelation {
    space: FiniteSpace,
    class_of: Vec<Option<usize>>,
}

impl EquivRelation {
    /// Builds a relation from arbitrary labels, canonicalizing class ids.
    fn from_labels(space: FiniteSpace, labels: &[Option<usize>]) -> Self {
        let mut least = std::collections::HashMap::new();
        for (x, l) in labels.iter().enumerate() {
            if let Some(l) = l {
                least.entry(*l).or_insert(x);
            }
        }
        let class_of = labels.iter().map(|l| l.map(|l| least[&l])).collect();
        EquivRelation { space, class_of }
    }

    /// The diagonal relation on all of `space`.
    pub fn trivial(space: FiniteSpace) -> Self {
        EquivRelation { space, class_of: (0..space.size()).map(Some).collect() }
    }

    /// The diagonal relation on `domain`.
    pub fn trivial_on(domain: &PointSet) -> Self {
        let space = domain.space();
        let class_of = space.points().map(|x| domain.contains(x).then_some(x)).collect();
        EquivRelation { space, class_of }
    }

    /// The relation with a single class covering the whole space.
    pub fn full(space: FiniteSpace) -> Self {
        EquivRelation { space, class_of: vec![Some(0); space.size()] }
    }

    /// The empty relation (empty domain).
    pub fn empty(space: FiniteSpace) -> Self {
        EquivRelation { space, class_of: vec![None; space.size()] }
    }

    /// Builds a relation from its classes; the domain is their union.
    pub fn from_classes<C, I>(space: FiniteSpace, classes: C) -> Result<Self, SpaceError>
    where
        C: IntoIterator<Item = I>,
        I: IntoIterator<Item = usize>,
    {
        let mut labels = vec![None; space.size()];
        for (k, class) in classes.into_iter().enumerate() {
            for x in class {
                space.check_point(x)?;
                if labels[x].is_some() {
                    return Err(SpaceError::RepeatedPoint(x));
                }
                labels[x] = Some(k);
            }
        }
        Ok(Self::from_labels(space, &labels))
    }

    /// The smallest relation on `domain` containing the given pairs.
    pub fn generated_by<I>(domain: &PointSet, pairs: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let space = domain.space();
        let mut uf = UnionFind::<usize>::new(space.size());
        for (x, y) in pairs {
            space.check_point(x)?;
            space.check_point(y)?;
            if !domain.contains(x) || !domain.contains(y) {
                return Err(SpaceError::DomainMismatch(format!("pair ({x}, {y}) leaves the domain")));
            }
            uf.union(x, y);
        }
        let labels: Vec<_> = space.points().map(|x| domain.contains(x).then(|| uf.find(x))).collect();
        Ok(Self::from_labels(space, &labels))
    }

    pub fn space(&self) -> FiniteSpace {
        self.space
    }

    pub fn domain(&self) -> PointSet {
        PointSet::from_mask(self.space, self.class_of.iter().map(Option::is_some).collect())
    }

    pub fn in_domain(&self, x: usize) -> bool {
        matches!(self.class_of.get(x), Some(Some(_)))
    }

    pub fn covers_space(&self) -> bool {
        self.class_of.iter().all(Option::is_some)
    }

    /// Canonical class identifier (least member), if `x` is in the domain.
    pub fn class_id(&self, x: usize) -> Option<usize> {
        self.class_of.get(x).copied().flatten()
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        match (self.class_id(x), self.class_id(y)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }

    /// Members of the class of `x` in increasing order (empty outside the domain).
    pub fn class_members(&self, x: usize) -> Vec<usize> {
        match self.class_id(x) {
            Some(c) => self.space.points().filter(|&y| self.class_of[y] == Some(c)).collect(),
            None => Vec::new(),
        }
    }

    /// All classes, ordered by least member, each in increasing order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        let mut slot = vec![usize::MAX; self.space.size()];
        for (x, c) in self.class_of.iter().enumerate() {
            if let Some(c) = *c {
                if slot[c] == usize::MAX {
                    slot[c] = out.len();
                    out.push(Vec::new());
                }
                out[slot[c]].push(x);
            }
        }
        out
    }

    pub fn num_classes(&self) -> usize {
        self.class_of.iter().enumerate().filter(|(x, c)| **c == Some(*x)).count()
    }

    /// True when every class is a singleton.
    pub fn is_trivial(&self) -> bool {
        self.class_of.iter().enumerate().all(|(x, c)| c.is_none() || *c == Some(x))
    }

    /// Ordered pairs `(x, y)` with `x ~ y`, including the diagonal.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for class in self.classes() {
            for &x in &class {
                for &y in &class {
                    out.push((x, y));
                }
            }
        }
        out.sort_unstable();
        out
    }

    fn check_subset(&self, a: &PointSet) -> Result<(), SpaceError> {
        self.space.check_same(&a.space())?;
        if let Some(x) = a.iter().find(|&x| !self.in_domain(x)) {
            return Err(SpaceError::DomainMismatch(format!("point {x} is outside the domain")));
        }
        Ok(())
    }

    /// Union of all classes meeting `a`.
    pub fn saturate(&self, a: &PointSet) -> Result<PointSet, SpaceError> {
        self.check_subset(a)?;
        let mut hit = vec![false; self.space.size()];
        for x in a.iter() {
            hit[self.class_of[x].unwrap()] = true;
        }
        let mask = self.class_of.iter().map(|c| c.is_some_and(|c| hit[c])).collect();
        Ok(PointSet::from_mask(self.space, mask))
    }

    pub fn classify_domain(&self, a: &PointSet) -> Result<DomainKind, SpaceError> {
        let complete = self.saturate(a)? == self.domain();
        if !complete {
            return Ok(DomainKind::Neither);
        }
        let mut count = vec![0usize; self.space.size()];
        for x in a.iter() {
            count[self.class_of[x].unwrap()] += 1;
        }
        if count.iter().all(|&c| c <= 1) {
            Ok(DomainKind::Both)
        } else {
            Ok(DomainKind::Complete)
        }
    }

    /// Least point of each class.
    pub fn fundamental_domain(&self) -> PointSet {
        let mask = self.class_of.iter().enumerate().map(|(x, c)| *c == Some(x)).collect();
        PointSet::from_mask(self.space, mask)
    }

    /// Smallest relation on the union of domains containing every member.
    pub fn join<'a, I>(rels: I) -> Result<EquivRelation, SpaceError>
    where
        I: IntoIterator<Item = &'a EquivRelation>,
    {
        let mut it = rels.into_iter();
        let first = it.next().ok_or(SpaceError::EmptyJoin)?;
        let space = first.space;
        let mut domain = vec![false; space.size()];
        let mut uf = UnionFind::<usize>::new(space.size());
        for r in std::iter::once(first).chain(it) {
            space.check_same(&r.space)?;
            for (x, c) in r.class_of.iter().enumerate() {
                if let Some(c) = c {
                    domain[x] = true;
                    uf.union(x, *c);
                }
            }
        }
        let labels: Vec<_> = space.points().map(|x| domain[x].then(|| uf.find(x))).collect();
        Ok(Self::from_labels(space, &labels))
    }

    pub fn intersect(&self, other: &EquivRelation) -> Result<EquivRelation, SpaceError> {
        self.space.check_same(&other.space)?;
        let n = self.space.size();
        let labels: Vec<_> = (0..n)
            .map(|x| match (self.class_of[x], other.class_of[x]) {
                (Some(a), Some(b)) => Some(a * n + b),
                _ => None,
            })
            .collect();
        Ok(Self::from_labels(self.space, &labels))
    }

    pub fn restrict(&self, a: &PointSet) -> Result<EquivRelation, SpaceError> {
        self.check_subset(a)?;
        let labels: Vec<_> =
            self.class_of.iter().enumerate().map(|(x, c)| if a.contains(x) { *c } else { None }).collect();
        Ok(Self::from_labels(self.space, &labels))
    }

    /// Pulls `self` (on `B`) back along `phi: A -> B`: `x ~ y` iff `phi(x) ~ phi(y)`.
    pub fn conjugate(&self, phi: &PartialIso) -> Result<EquivRelation, SpaceError> {
        self.space.check_same(&phi.space())?;
        if phi.target() != self.domain() {
            return Err(SpaceError::DomainMismatch("conjugator target differs from the relation's domain".into()));
        }
        let labels: Vec<_> = self.space.points().map(|x| phi.apply(x).and_then(|y| self.class_of[y])).collect();
        Ok(Self::from_labels(self.space, &labels))
    }

    /// Whether the graph of `phi` lies inside `self`.
    pub fn contains_graph_of(&self, phi: &PartialIso) -> Result<bool, SpaceError> {
        self.space.check_same(&phi.space())?;
        self.check_subset(&phi.source())?;
        self.check_subset(&phi.target())?;
        Ok(phi.pairs().iter().all(|&(x, y)| self.related(x, y)))
    }

    /// Whether every class of `self` lies in a class of `other`.
    pub fn is_subrelation(&self, other: &EquivRelation) -> Result<bool, SpaceError> {
        self.space.check_same(&other.space)?;
        Ok(self.class_of.iter().enumerate().all(|(x, c)| match c {
            None => true,
            Some(c) => other.in_domain(x) && other.related(x, *c),
        }))
    }

    /// The same classes plus singletons for every point outside the domain.
    pub fn extend_trivially(&self) -> EquivRelation {
        let class_of = self.class_of.iter().enumerate().map(|(x, c)| Some(c.unwrap_or(x))).collect();
        EquivRelation { space: self.space, class_of }
    }

    /// Image of `self` under the injective map `embed: self.space -> target`.
    pub fn push_forward(&self, embed: &[usize], target: FiniteSpace) -> Result<EquivRelation, SpaceError> {
        let mut labels = vec![None; target.size()];
        for (x, c) in self.class_of.iter().enumerate() {
            if let Some(c) = c {
                let y = embed[x];
                target.check_point(y)?;
                if labels[y].is_some() {
                    return Err(SpaceError::NotInjective(y));
                }
                labels[y] = Some(embed[*c]);
            }
        }
        Ok(Self::from_labels(target, &labels))
    }

    /// Pulls `self` back along `embed: small -> self.space`.
    pub fn pull_back(&self, embed: &[usize], small: FiniteSpace) -> Result<EquivRelation, SpaceError> {
        let mut labels = Vec::with_capacity(small.size());
        for x in small.points() {
            let y = embed[x];
            self.space.check_point(y)?;
            labels.push(self.class_of[y]);
        }
        Ok(Self::from_labels(small, &labels))
    }
}

impl fmt::Debug for EquivRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, class) in self.classes().iter().enumerate() {
            if k > 0 {
                write!(f, "|")?;
            }
            for (j, x) in class.iter().enumerate() {
                if j > 0 && self.space.size() > 10 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
        }
        write!(f, "}}")
    }
}
