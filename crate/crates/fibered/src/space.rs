use std::fmt;

use space_core::{FiniteSpace, PointSet};

use crate::FiberError;

/// A finite set over the base with every fiber nonempty.
///
/// Carrier points are ids `0..len()`, assigned in lexicographic order of
/// `(proj, label)`. The position of a point inside its fiber, plus one, is its
/// fiber number.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiberedSpace {
    base: FiniteSpace,
    proj: Vec<usize>,
    labels: Vec<Vec<usize>>,
    fibers: Vec<Vec<usize>>,
    position: Vec<usize>,
}

impl FiberedSpace {
    pub fn new<I>(base: FiniteSpace, points: I) -> Result<Self, FiberError>
    where
        I: IntoIterator<Item = (usize, Vec<usize>)>,
    {
        let space = Self::sparse(base, points)?;
        if let Some(x) = space.fibers.iter().position(Vec::is_empty) {
            return Err(FiberError::EmptyFiber(x));
        }
        Ok(space)
    }

    /// Like [`FiberedSpace::new`] but fibers may be empty (edge spaces).
    pub fn sparse<I>(base: FiniteSpace, points: I) -> Result<Self, FiberError>
    where
        I: IntoIterator<Item = (usize, Vec<usize>)>,
    {
        let mut points: Vec<_> = points.into_iter().collect();
        points.sort();
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(FiberError::DuplicatePoint(w[0].0, w[0].1.clone()));
        }
        let mut fibers = vec![Vec::new(); base.size()];
        let mut position = Vec::with_capacity(points.len());
        for (t, (x, _)) in points.iter().enumerate() {
            base.check_point(*x)?;
            position.push(fibers[*x].len());
            fibers[*x].push(t);
        }
        let (proj, labels) = points.into_iter().unzip();
        Ok(FiberedSpace { base, proj, labels, fibers, position })
    }

    /// One point per base point, labelled by nothing.
    pub fn identity(base: FiniteSpace) -> Self {
        Self::new(base, base.points().map(|x| (x, Vec::new()))).expect("one point per fiber")
    }

    pub fn base(&self) -> FiniteSpace {
        self.base
    }

    pub fn len(&self) -> usize {
        self.proj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proj.is_empty()
    }

    /// The carrier viewed as a finite space of its own.
    pub fn carrier_space(&self) -> FiniteSpace {
        FiniteSpace::new(self.len()).expect("fibers are nonempty")
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    pub fn proj(&self, t: usize) -> usize {
        self.proj[t]
    }

    pub fn label(&self, t: usize) -> &[usize] {
        &self.labels[t]
    }

    pub fn fiber(&self, x: usize) -> &[usize] {
        &self.fibers[x]
    }

    /// Zero-based index of `t` within its fiber.
    pub fn position(&self, t: usize) -> usize {
        self.position[t]
    }

    /// Least-index fiber numbering, starting at 1 in every fiber.
    pub fn fiber_number(&self, t: usize) -> usize {
        self.position[t] + 1
    }

    pub fn find(&self, x: usize, label: &[usize]) -> Option<usize> {
        let fiber = self.fibers.get(x)?;
        fiber.binary_search_by(|&t| self.labels[t].as_slice().cmp(label)).ok().map(|i| fiber[i])
    }

    pub fn max_fiber_len(&self) -> usize {
        self.fibers.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The sub-space on the marked points, with the map from new ids to old ids.
    pub fn subspace(&self, keep: &[bool]) -> Result<(FiberedSpace, Vec<usize>), FiberError> {
        let kept: Vec<usize> = self.points().filter(|&t| keep[t]).collect();
        let sub = FiberedSpace::new(self.base, kept.iter().map(|&t| (self.proj[t], self.labels[t].clone())))?;
        Ok((sub, kept))
    }
}

impl fmt::Debug for FiberedSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_list();
        for t in self.points() {
            list.entry(&(self.proj[t], &self.labels[t]));
        }
        list.finish()
    }
}

/// A fiberwise choice over a subset of the base.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialSection {
    base: FiniteSpace,
    assign: Vec<Option<usize>>,
}

impl PartialSection {
    pub fn new<I>(space: &FiberedSpace, pairs: I) -> Result<Self, FiberError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let base = space.base();
        let mut assign = vec![None; base.size()];
        for (x, t) in pairs {
            base.check_point(x)?;
            if t >= space.len() || space.proj(t) != x {
                return Err(FiberError::SectionOffFiber(x, t));
            }
            if assign[x].is_some() {
                return Err(space_core::SpaceError::NotFunctional(x).into());
            }
            assign[x] = Some(t);
        }
        Ok(PartialSection { base, assign })
    }

    pub fn base(&self) -> FiniteSpace {
        self.base
    }

    pub fn domain(&self) -> PointSet {
        PointSet::from_points(self.base, self.assign.iter().enumerate().filter(|(_, t)| t.is_some()).map(|(x, _)| x))
            .expect("in range")
    }

    pub fn get(&self, x: usize) -> Option<usize> {
        self.assign.get(x).copied().flatten()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.assign.iter().enumerate().filter_map(|(x, t)| t.map(|t| (x, t))).collect()
    }

    pub fn image(&self) -> Vec<usize> {
        self.assign.iter().flatten().copied().collect()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.iter().all(Option::is_none)
    }

    pub fn restrict(&self, on: &PointSet) -> PartialSection {
        let assign = self.assign.iter().enumerate().map(|(x, t)| t.filter(|_| on.contains(x))).collect();
        PartialSection { base: self.base, assign }
    }
}

impl fmt::Debug for PartialSection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.pairs()).finish()
    }
}

/// A fiber-preserving map between two fibered spaces over the same base.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberedMorphism {
    pub source: FiberedSpace,
    pub target: FiberedSpace,
    pub map: Vec<usize>,
}

impl FiberedMorphism {
    pub fn identity(space: &FiberedSpace) -> Self {
        FiberedMorphism { source: space.clone(), target: space.clone(), map: space.points().collect() }
    }

    pub fn apply(&self, t: usize) -> usize {
        self.map[t]
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        self.map.iter().all(|&u| !std::mem::replace(&mut seen[u], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.target.len()];
        for &u in &self.map {
            seen[u] = true;
        }
        seen.into_iter().all(|s| s)
    }

    pub fn is_bijective(&self) -> bool {
        self.source.len() == self.target.len() && self.is_injective()
    }

    pub fn inverse(&self) -> Option<FiberedMorphism> {
        if !self.is_bijective() {
            return None;
        }
        let mut map = vec![0; self.map.len()];
        for (t, &u) in self.map.iter().enumerate() {
            map[u] = t;
        }
        Some(FiberedMorphism { source: self.target.clone(), target: self.source.clone(), map })
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FiberedMorphism) -> Option<FiberedMorphism> {
        (other.target == self.source).then(|| FiberedMorphism {
            source: other.source.clone(),
            target: self.target.clone(),
            map: other.map.iter().map(|&u| self.map[u]).collect(),
        })
    }
}
