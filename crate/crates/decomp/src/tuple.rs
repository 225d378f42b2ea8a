use serde::{Deserialize, Serialize};
use space_core::EquivRelation;

use crate::DecompError;

/// A sequence of points with, for each step, the index of the factor it uses.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ReducedTuple {
    pub points: Vec<usize>,
    /// Zero-based factor index per step; one shorter than `points`.
    pub tags: Vec<usize>,
}

impl ReducedTuple {
    pub fn is_closing(&self) -> bool {
        self.points.len() > 1 && self.points.first() == self.points.last()
    }

    pub fn steps(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.points.windows(2).zip(&self.tags).map(|(w, &i)| (w[0], w[1], i))
    }
}

/// Checks the reduced-tuple conditions: at least two points, consecutive tags
/// differ, every step moves, and with a core no step of a tuple longer than two
/// lies in the core.
pub fn is_reduced(
    t: &ReducedTuple,
    factors: &[EquivRelation],
    core: Option<&EquivRelation>,
) -> Result<bool, DecompError> {
    let n = t.points.len();
    if n < 2 || t.tags.len() != n - 1 {
        return Ok(false);
    }
    for (k, (x, y, i)) in t.steps().enumerate() {
        if !factors.get(i).is_some_and(|r| r.related(x, y)) {
            return Err(DecompError::TagMismatch(k));
        }
    }
    if t.tags.windows(2).any(|w| w[0] == w[1]) {
        return Ok(false);
    }
    if t.steps().any(|(x, y, _)| x == y) {
        return Ok(false);
    }
    if let Some(c) = core {
        if n > 2 && t.steps().any(|(x, y, _)| c.related(x, y)) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Bounded enumeration of reduced tuples: depth-first from every start point,
/// never reusing a factor class or a core class (a point, without core), and
/// stopping at length `max_steps`. Returns the first closing tuple found.
pub fn find_closing_tuple(
    factors: &[EquivRelation],
    core: Option<&EquivRelation>,
    max_steps: usize,
) -> Option<ReducedTuple> {
    let n = factors.first()?.space().size();
    let node = |x: usize| core.and_then(|c| c.class_id(x)).unwrap_or(x);
    struct Search<'a> {
        factors: &'a [EquivRelation],
        node: &'a dyn Fn(usize) -> usize,
        max_steps: usize,
        points: Vec<usize>,
        tags: Vec<usize>,
        seen_nodes: Vec<bool>,
        seen_classes: Vec<(usize, usize)>,
    }
    impl Search<'_> {
        fn run(&mut self) -> bool {
            let x = *self.points.last().unwrap();
            let start = self.points[0];
            for (i, r) in self.factors.iter().enumerate() {
                if self.tags.last() == Some(&i) {
                    continue;
                }
                let Some(class) = r.class_id(x) else { continue };
                if self.seen_classes.contains(&(i, class)) {
                    continue;
                }
                for y in r.class_members(x) {
                    let (nx, ny) = ((self.node)(x), (self.node)(y));
                    if nx == ny {
                        continue;
                    }
                    let closes = y == start && self.points.len() >= 2 && self.tags.first() != Some(&i);
                    if closes {
                        self.points.push(y);
                        self.tags.push(i);
                        return true;
                    }
                    if self.seen_nodes[ny] || self.tags.len() + 1 >= self.max_steps {
                        continue;
                    }
                    self.points.push(y);
                    self.tags.push(i);
                    self.seen_nodes[ny] = true;
                    self.seen_classes.push((i, class));
                    if self.run() {
                        return true;
                    }
                    self.seen_classes.pop();
                    self.seen_nodes[ny] = false;
                    self.points.pop();
                    self.tags.pop();
                }
            }
            false
        }
    }
    for x in 0..n {
        let mut s = Search {
            factors,
            node: &node,
            max_steps,
            points: vec![x],
            tags: Vec::new(),
            seen_nodes: vec![false; n],
            seen_classes: Vec::new(),
        };
        s.seen_nodes[node(x)] = true;
        if s.run() {
            return Some(ReducedTuple { points: s.points, tags: s.tags });
        }
    }
    None
}

/// Among all rotations and both directions of a closed tuple, the least one.
pub(crate) fn canonical_rotation(points: &[usize], tags: &[usize]) -> ReducedTuple {
    let m = tags.len();
    let cyc: Vec<usize> = points[..m].to_vec();
    let mut best: Option<ReducedTuple> = None;
    for start in 0..m {
        for dir in [false, true] {
            let (mut p, mut t) = (Vec::with_capacity(m + 1), Vec::with_capacity(m));
            for k in 0..m {
                if dir {
                    p.push(cyc[(start + m - k) % m]);
                    t.push(tags[(start + m - k - 1) % m]);
                } else {
                    p.push(cyc[(start + k) % m]);
                    t.push(tags[(start + k) % m]);
                }
            }
            p.push(p[0]);
            let cand = ReducedTuple { points: p, tags: t };
            if best.as_ref().is_none_or(|b| (&cand.points, &cand.tags) < (&b.points, &b.tags)) {
                best = Some(cand);
            }
        }
    }
    best.expect("nonempty cycle")
}

#[cfg(test)]
mod tests {
    use space_core::FiniteSpace;

    use super::*;

    fn rel(classes: &[&[usize]]) -> EquivRelation {
        EquivRelation::from_classes(FiniteSpace::new(4).unwrap(), classes.iter().map(|c| c.to_vec())).unwrap()
    }

    fn free() -> Vec<EquivRelation> {
        vec![rel(&[&[0, 1], &[2], &[3]]), rel(&[&[0], &[1, 2], &[3]])]
    }

    fn cycle() -> Vec<EquivRelation> {
        vec![rel(&[&[0, 1], &[2, 3]]), rel(&[&[1, 2], &[0, 3]])]
    }

    #[test]
    fn reduced_examples() {
        let t = ReducedTuple { points: vec![0, 1, 2], tags: vec![0, 1] };
        assert!(is_reduced(&t, &free(), None).unwrap());
        let t = ReducedTuple { points: vec![0, 0], tags: vec![0] };
        assert!(!is_reduced(&t, &free(), None).unwrap());
        let t = ReducedTuple { points: vec![0, 1, 2, 3, 0], tags: vec![0, 1, 0, 1] };
        assert!(is_reduced(&t, &cycle(), None).unwrap() && t.is_closing());
        let t = ReducedTuple { points: vec![0, 2], tags: vec![0] };
        assert_eq!(is_reduced(&t, &free(), None), Err(DecompError::TagMismatch(0)));
        let t = ReducedTuple { points: vec![0, 1, 0], tags: vec![0, 0] };
        assert!(!is_reduced(&t, &free(), None).unwrap());
    }

    #[test]
    fn core_steps_break_reduction() {
        let r1 = rel(&[&[0, 1, 2], &[3]]);
        let r2 = rel(&[&[0, 1], &[2, 3]]);
        let core = rel(&[&[0, 1], &[2], &[3]]);
        let t = ReducedTuple { points: vec![0, 1, 0], tags: vec![0, 1] };
        assert!(is_reduced(&t, &[r1.clone(), r2.clone()], None).unwrap());
        assert!(!is_reduced(&t, &[r1, r2], Some(&core)).unwrap());
    }

    #[test]
    fn oracle_finds_the_cycle_only_when_present() {
        assert_eq!(find_closing_tuple(&free(), None, 8), None);
        let t = find_closing_tuple(&cycle(), None, 8).unwrap();
        assert!(t.is_closing() && is_reduced(&t, &cycle(), None).unwrap());
        assert_eq!(t.points.len(), 5);
        assert_eq!(find_closing_tuple(&cycle(), None, 3), None);
    }

    #[test]
    fn shared_pair_closes_in_two_steps() {
        let r1 = rel(&[&[0, 1], &[2], &[3]]);
        let t = find_closing_tuple(&[r1.clone(), r1.clone()], None, 8).unwrap();
        assert_eq!(t, ReducedTuple { points: vec![0, 1, 0], tags: vec![0, 1] });
        assert_eq!(find_closing_tuple(&[r1.clone(), r1.clone()], Some(&r1), 8), None);
    }

    #[test]
    fn rotation_is_least_and_direction_free() {
        let t = canonical_rotation(&[3, 0, 1, 2, 3], &[1, 0, 1, 0]);
        assert_eq!(t, ReducedTuple { points: vec![0, 1, 2, 3, 0], tags: vec![0, 1, 0, 1] });
    }
}
