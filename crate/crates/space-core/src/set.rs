use std::fmt;

use crate::SpaceError;

/// The ambient space: points `0..size`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FiniteSpace {
    size: usize,
}

impl FiniteSpace {
    pub fn new(size: usize) -> Result<Self, SpaceError> {
        if size == 0 {
            return Err(SpaceError::EmptySpace);
        }
        Ok(FiniteSpace { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn points(&self) -> std::ops::Range<usize> {
        0..self.size
    }

    pub fn check_point(&self, point: usize) -> Result<(), SpaceError> {
        if point < self.size {
            Ok(())
        } else {
            Err(SpaceError::OutOfRange { point, size: self.size })
        }
    }

    pub fn check_same(&self, other: &FiniteSpace) -> Result<(), SpaceError> {
        if self.size == other.size {
            Ok(())
        } else {
            Err(SpaceError::SpaceMismatch { left: self.size, right: other.size })
        }
    }
}

/// A subset of a [`FiniteSpace`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PointSet {
    space: FiniteSpace,
    mask: Vec<bool>,
}

impl PointSet {
    pub fn empty(space: FiniteSpace) -> Self {
        PointSet { space, mask: vec![false; space.size()] }
    }

    pub fn full(space: FiniteSpace) -> Self {
        PointSet { space, mask: vec![true; space.size()] }
    }

    pub fn from_points<I: IntoIterator<Item = usize>>(space: FiniteSpace, points: I) -> Result<Self, SpaceError> {
        let mut set = PointSet::empty(space);
        for p in points {
            space.check_point(p)?;
            set.mask[p] = true;
        }
        Ok(set)
    }

    pub(crate) fn from_mask(space: FiniteSpace, mask: Vec<bool>) -> Self {
        debug_assert_eq!(mask.len(), space.size());
        PointSet { space, mask }
    }

    pub fn space(&self) -> FiniteSpace {
        self.space
    }

    pub fn contains(&self, point: usize) -> bool {
        self.mask.get(point).copied().unwrap_or(false)
    }

    pub fn insert(&mut self, point: usize) -> Result<(), SpaceError> {
        self.space.check_point(point)?;
        self.mask[point] = true;
        Ok(())
    }

    pub fn remove(&mut self, point: usize) {
        if point < self.mask.len() {
            self.mask[point] = false;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.mask.iter().any(|&m| m)
    }

    pub fn first(&self) -> Option<usize> {
        self.iter().next()
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.iter().all(|p| other.contains(p))
    }

    pub fn union(&self, other: &PointSet) -> PointSet {
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        PointSet::from_mask(self.space, mask)
    }

    pub fn intersection(&self, other: &PointSet) -> PointSet {
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && *b).collect();
        PointSet::from_mask(self.space, mask)
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a && !*b).collect();
        PointSet::from_mask(self.space, mask)
    }

    pub fn complement(&self) -> PointSet {
        PointSet::from_mask(self.space, self.mask.iter().map(|m| !m).collect())
    }

    pub fn is_full(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_size_is_rejected() {
        assert_eq!(FiniteSpace::new(0), Err(SpaceError::EmptySpace));
    }

    #[test]
    fn set_algebra() {
        let x = FiniteSpace::new(5).unwrap();
        let a = PointSet::from_points(x, [0, 1, 2]).unwrap();
        let b = PointSet::from_points(x, [2, 3]).unwrap();
        assert_eq!(a.union(&b).to_vec(), vec![0, 1, 2, 3]);
        assert_eq!(a.intersection(&b).to_vec(), vec![2]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 1]);
        assert_eq!(a.complement().to_vec(), vec![3, 4]);
        assert!(PointSet::from_points(x, [7]).is_err());
    }
}
