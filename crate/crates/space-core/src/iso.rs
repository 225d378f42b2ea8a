use std::fmt;

use crate::{FiniteSpace, PointSet, SpaceError};

/// A partial bijection of a finite space.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialIso {
    space: FiniteSpace,
    forward: Vec<Option<usize>>,
    backward: Vec<Option<usize>>,
}

impl PartialIso {
    pub fn empty(space: FiniteSpace) -> Self {
        PartialIso { space, forward: vec![None; space.size()], backward: vec![None; space.size()] }
    }

    pub fn identity(on: &PointSet) -> Self {
        let space = on.space();
        let forward: Vec<_> = space.points().map(|x| on.contains(x).then_some(x)).collect();
        PartialIso { space, backward: forward.clone(), forward }
    }

    pub fn from_pairs<I>(space: FiniteSpace, pairs: I) -> Result<Self, SpaceError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut iso = PartialIso::empty(space);
        for (x, y) in pairs {
            space.check_point(x)?;
            space.check_point(y)?;
            if iso.forward[x].is_some() {
                return Err(SpaceError::NotFunctional(x));
            }
            if iso.backward[y].is_some() {
                return Err(SpaceError::NotInjective(y));
            }
            iso.forward[x] = Some(y);
            iso.backward[y] = Some(x);
        }
        Ok(iso)
    }

    pub fn space(&self) -> FiniteSpace {
        self.space
    }

    pub fn apply(&self, x: usize) -> Option<usize> {
        self.forward.get(x).copied().flatten()
    }

    pub fn apply_inverse(&self, y: usize) -> Option<usize> {
        self.backward.get(y).copied().flatten()
    }

    pub fn source(&self) -> PointSet {
        PointSet::from_mask(self.space, self.forward.iter().map(Option::is_some).collect())
    }

    pub fn target(&self) -> PointSet {
        PointSet::from_mask(self.space, self.backward.iter().map(Option::is_some).collect())
    }

    /// Pairs `(x, phi(x))` in increasing order of `x`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.forward.iter().enumerate().filter_map(|(x, y)| y.map(|y| (x, y))).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.iter().all(Option::is_none)
    }

    pub fn len(&self) -> usize {
        self.forward.iter().filter(|y| y.is_some()).count()
    }

    pub fn is_identity(&self) -> bool {
        self.forward.iter().enumerate().all(|(x, y)| y.is_none() || *y == Some(x))
    }

    /// `self ∘ other` on the largest domain where it makes sense.
    pub fn compose(&self, other: &PartialIso) -> Result<PartialIso, SpaceError> {
        self.space.check_same(&other.space)?;
        let pairs = other.pairs().into_iter().filter_map(|(x, y)| self.apply(y).map(|z| (x, z)));
        PartialIso::from_pairs(self.space, pairs)
    }

    pub fn invert(&self) -> PartialIso {
        PartialIso { space: self.space, forward: self.backward.clone(), backward: self.forward.clone() }
    }

    pub fn restrict_source(&self, on: &PointSet) -> PartialIso {
        let pairs = self.pairs().into_iter().filter(|(x, _)| on.contains(*x));
        PartialIso::from_pairs(self.space, pairs).expect("restriction keeps injectivity")
    }
}

impl fmt::Debug for PartialIso {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, (x, y)) in self.pairs().iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}->{y}")?;
        }
        write!(f, ")")
    }
}
