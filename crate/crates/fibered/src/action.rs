use space_core::{EquivRelation, PointSet};

use crate::{ActionViolation, FiberError, FiberedMorphism, FiberedSpace, PartialSection};

/// An action of a relation on a fibered space, stored as a transport table.
///
/// Entry `x * n + y` lists, for each point of the fiber over `y` in fiber
/// order, its image over `x`.
#[derive(Clone, PartialEq, Eq)]
pub struct Action {
    relation: EquivRelation,
    proj: Vec<usize>,
    position: Vec<usize>,
    table: Vec<Option<Vec<usize>>>,
}

impl std::fmt::Debug for Action {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Action").field("relation", &self.relation).finish_non_exhaustive()
    }
}

impl Action {
    /// Tabulates `(x, y) · t = f(x, y, t)` for every related pair. Nothing is checked
    /// beyond shapes; see [`validate_action`].
    pub fn from_fn<F>(space: &FiberedSpace, relation: &EquivRelation, f: F) -> Result<Action, FiberError>
    where
        F: Fn(usize, usize, usize) -> usize,
    {
        space.base().check_same(&relation.space())?;
        if !relation.covers_space() {
            return Err(FiberError::PartialRelation);
        }
        let n = space.base().size();
        let mut table = vec![None; n * n];
        for class in relation.classes() {
            for &x in &class {
                for &y in &class {
                    table[x * n + y] = Some(space.fiber(y).iter().map(|&t| f(x, y, t)).collect());
                }
            }
        }
        Ok(Action {
            relation: relation.clone(),
            proj: space.points().map(|t| space.proj(t)).collect(),
            position: space.points().map(|t| space.position(t)).collect(),
            table,
        })
    }

    pub fn relation(&self) -> &EquivRelation {
        &self.relation
    }

    fn n(&self) -> usize {
        self.relation.space().size()
    }

    /// `(x, y) · t`, or `None` when `x, y` are unrelated or `t` is not over `y`.
    pub fn apply(&self, x: usize, y: usize, t: usize) -> Option<usize> {
        if self.proj.get(t) != Some(&y) || x >= self.n() {
            return None;
        }
        self.table[x * self.n() + y].as_ref().map(|row| row[self.position[t]])
    }

    /// Moves `t` to the fiber over `x`.
    pub fn transport(&self, x: usize, t: usize) -> Option<usize> {
        self.apply(x, *self.proj.get(t)?, t)
    }

    /// Overwrites one table entry.
    pub fn set(&mut self, x: usize, y: usize, t: usize, image: usize) {
        let n = self.n();
        if let Some(row) = self.table[x * n + y].as_mut() {
            row[self.position[t]] = image;
        }
    }

    /// The same table restricted to the pairs of a sub-relation on the whole base.
    pub fn restrict_to(&self, sub: &EquivRelation) -> Result<Action, FiberError> {
        if !sub.covers_space() {
            return Err(FiberError::PartialRelation);
        }
        if !sub.is_subrelation(&self.relation)? {
            return Err(FiberError::NotSubrelation);
        }
        let n = self.n();
        let mut table = vec![None; n * n];
        for (x, y) in sub.pairs() {
            table[x * n + y] = self.table[x * n + y].clone();
        }
        Ok(Action { relation: sub.clone(), proj: self.proj.clone(), position: self.position.clone(), table })
    }

    /// The orbit of `t`, sorted.
    pub fn orbit(&self, t: usize) -> Vec<usize> {
        let x = self.proj[t];
        let mut orbit: Vec<usize> =
            self.relation.class_members(x).into_iter().filter_map(|y| self.apply(y, x, t)).collect();
        orbit.sort_unstable();
        orbit
    }

    /// Marks every point whose orbit meets `seeds`.
    pub fn saturate(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<bool> {
        let mut mask = vec![false; self.proj.len()];
        for t in seeds {
            if !mask[t] {
                for u in self.orbit(t) {
                    mask[u] = true;
                }
            }
        }
        mask
    }

    pub fn is_saturating(&self, s: &PartialSection) -> bool {
        self.saturate(s.image()).into_iter().all(|m| m)
    }

    /// The action on a union of orbits, with the map from new ids to old ids.
    pub fn subspace(
        &self,
        space: &FiberedSpace,
        keep: &[bool],
    ) -> Result<(FiberedSpace, Action, Vec<usize>), FiberError> {
        let (sub, old) = space.subspace(keep)?;
        let mut new_id = vec![usize::MAX; space.len()];
        for (i, &t) in old.iter().enumerate() {
            new_id[t] = i;
        }
        let act = Action::from_fn(&sub, &self.relation, |x, y, t| {
            self.apply(x, y, old[t]).map(|u| new_id[u]).unwrap_or(usize::MAX)
        })?;
        if act.table.iter().flatten().flatten().any(|&u| u == usize::MAX) {
            return Err(FiberError::DomainMismatch("kept points are not a union of orbits".into()));
        }
        Ok((sub, act, old))
    }
}

/// Checks shapes, the identity law, bijectivity and the cocycle law exhaustively.
pub fn validate_action(space: &FiberedSpace, act: &Action) -> Result<(), FiberError> {
    let bad = |v| Err(FiberError::InvalidAction(v));
    let same_shape = space.base() == act.relation.space()
        && space.len() == act.proj.len()
        && space.points().all(|t| space.proj(t) == act.proj[t] && space.position(t) == act.position[t]);
    if !same_shape {
        return bad(ActionViolation::Shape);
    }
    let classes = act.relation.classes();
    for class in &classes {
        for &x in class {
            for &y in class {
                let Some(row) = act.table[x * act.n() + y].as_ref() else {
                    return bad(ActionViolation::Missing { x, y });
                };
                let mut hit = vec![false; space.fiber(x).len()];
                for (&t, &u) in space.fiber(y).iter().zip(row) {
                    if u >= space.len() || space.proj(u) != x {
                        return bad(ActionViolation::WrongFiber { x, y, t });
                    }
                    if x == y && u != t {
                        return bad(ActionViolation::Identity { x, t });
                    }
                    hit[space.position(u)] = true;
                }
                if row.len() != hit.len() || !hit.iter().all(|&h| h) {
                    return bad(ActionViolation::NotBijective { x, y });
                }
            }
        }
    }
    for class in &classes {
        for &x in class {
            for &y in class {
                for &z in class {
                    for &t in space.fiber(z) {
                        let step = act.apply(y, z, t).and_then(|u| act.apply(x, y, u));
                        if step != act.apply(x, z, t) {
                            return bad(ActionViolation::Cocycle { x, y, z, t });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// `t ~ u` iff they lie in one orbit; a relation on the carrier.
pub fn orbit_relation(space: &FiberedSpace, act: &Action) -> Result<EquivRelation, FiberError> {
    validate_action(space, act)?;
    let carrier = PointSet::full(space.carrier_space());
    let pairs = space.points().flat_map(|t| act.orbit(t).into_iter().map(move |u| (t, u)));
    Ok(EquivRelation::generated_by(&carrier, pairs)?)
}

/// `x ~ y` iff `(y, x) · s(x) = s(y)`, on the domain of `s`.
pub fn stabilizer(space: &FiberedSpace, act: &Action, s: &PartialSection) -> Result<EquivRelation, FiberError> {
    validate_action(space, act)?;
    Ok(stabilizer_unchecked(act, s))
}

pub(crate) fn stabilizer_unchecked(act: &Action, s: &PartialSection) -> EquivRelation {
    let pairs = s.pairs();
    let fixed = pairs.iter().flat_map(|&(x, t)| {
        pairs.iter().filter(move |&&(y, u)| act.apply(y, x, t) == Some(u)).map(move |&(y, _)| (x, y))
    });
    EquivRelation::generated_by(&s.domain(), fixed.collect::<Vec<_>>()).expect("section domain is in range")
}

/// Checks fiber preservation and equivariance of `f` for the given actions.
pub fn verify_morphism(f: &FiberedMorphism, source_act: &Action, target_act: &Action) -> Result<(), FiberError> {
    if f.map.len() != f.source.len() || f.source.base() != f.target.base() {
        return Err(FiberError::DomainMismatch("morphism shape".into()));
    }
    for t in f.source.points() {
        let x = f.source.proj(t);
        let u = f.map[t];
        if u >= f.target.len() || f.target.proj(u) != x {
            return Err(FiberError::MorphismOffFiber(t));
        }
        for y in source_act.relation.class_members(x) {
            let moved = source_act.apply(y, x, t).map(|v| f.map[v]);
            if moved.is_none() || moved != target_act.apply(y, x, u) {
                return Err(FiberError::NotEquivariant { x: y, t });
            }
        }
    }
    Ok(())
}

/// Pairs `(x, y)` with `x ~ y`, projected to `x`, with the horizontal action and
/// the diagonal section.
pub fn canonical_left(r: &EquivRelation) -> Result<(FiberedSpace, Action, PartialSection), FiberError> {
    if !r.covers_space() {
        return Err(FiberError::PartialRelation);
    }
    let space = FiberedSpace::new(r.space(), r.pairs().into_iter().map(|(x, y)| (x, vec![y])))?;
    let act = Action::from_fn(&space, r, |x, _, t| space.find(x, space.label(t)).expect("related"))?;
    let d = PartialSection::new(&space, r.space().points().map(|x| (x, space.find(x, &[x]).unwrap())))?;
    Ok((space, act, d))
}

fn check_quotient_input(r: &EquivRelation, s: &EquivRelation) -> Result<(), FiberError> {
    if !r.covers_space() {
        return Err(FiberError::PartialRelation);
    }
    if !s.is_subrelation(r)? {
        return Err(FiberError::NotSubrelation);
    }
    if !r.saturate(&s.domain())?.is_full() {
        return Err(FiberError::NotCompleteDomain);
    }
    Ok(())
}

/// For each `x`, the least points of the `S`-classes inside the class of `x`.
fn class_reps(r: &EquivRelation, s: &EquivRelation, x: usize) -> Vec<usize> {
    r.class_members(x).into_iter().filter(|&y| s.class_id(y) == Some(y)).collect()
}

/// `R/S`: points `(x, m)` with `m` the least point of an `S`-class in the class of `x`.
pub fn quotient(r: &EquivRelation, s: &EquivRelation) -> Result<(FiberedSpace, Action, PartialSection), FiberError> {
    check_quotient_input(r, s)?;
    let points = r.space().points().flat_map(|x| class_reps(r, s, x).into_iter().map(move |m| (x, vec![m])));
    let space = FiberedSpace::new(r.space(), points)?;
    let act = Action::from_fn(&space, r, |x, _, t| space.find(x, space.label(t)).expect("related"))?;
    let d =
        PartialSection::new(&space, s.domain().iter().map(|a| (a, space.find(a, &[s.class_id(a).unwrap()]).unwrap())))?;
    Ok((space, act, d))
}

/// `S\R`: points `(m, y)` projected to `y`, acted on in the second coordinate.
pub fn right_quotient(r: &EquivRelation, s: &EquivRelation) -> Result<(FiberedSpace, Action), FiberError> {
    check_quotient_input(r, s)?;
    let points = r.space().points().flat_map(|y| class_reps(r, s, y).into_iter().map(move |m| (y, vec![m])));
    let space = FiberedSpace::new(r.space(), points)?;
    let act = Action::from_fn(&space, r, |y, _, t| space.find(y, space.label(t)).expect("related"))?;
    Ok((space, act))
}

/// The swap `(x, m) -> (m, x)` from `R/S` to `S\R`, checked to be a bijective
/// equivariant morphism.
pub fn right_quotient_symmetry(r: &EquivRelation, s: &EquivRelation) -> Result<FiberedMorphism, FiberError> {
    let (left, left_act, _) = quotient(r, s)?;
    let (right, right_act) = right_quotient(r, s)?;
    let map = left
        .points()
        .map(|t| {
            let (x, m) = (left.proj(t), left.label(t)[0]);
            right.find(x, &[m]).expect("same class representatives")
        })
        .collect();
    let f = FiberedMorphism { source: left, target: right, map };
    verify_morphism(&f, &left_act, &right_act)?;
    if !f.is_bijective() {
        return Err(FiberError::DomainMismatch("swap is not bijective".into()));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use space_core::FiniteSpace;

    use super::*;

    fn x4() -> FiniteSpace {
        FiniteSpace::new(4).unwrap()
    }

    fn rel(classes: &[&[usize]]) -> EquivRelation {
        EquivRelation::from_classes(x4(), classes.iter().map(|c| c.to_vec())).unwrap()
    }

    fn e_free_r() -> EquivRelation {
        rel(&[&[0, 1, 2], &[3]])
    }

    #[test]
    fn canonical_left_fibers_and_orbits() {
        let (f, act, d) = canonical_left(&e_free_r()).unwrap();
        validate_action(&f, &act).unwrap();
        let fiber0: Vec<_> = f.fiber(0).iter().map(|&t| f.label(t)[0]).collect();
        assert_eq!(fiber0, vec![0, 1, 2]);
        let t = f.find(0, &[1]).unwrap();
        let orbit: Vec<_> = act.orbit(t).into_iter().map(|u| (f.proj(u), f.label(u)[0])).collect();
        assert_eq!(orbit, vec![(0, 1), (1, 1), (2, 1)]);
        assert!(stabilizer(&f, &act, &d).unwrap().is_trivial());
        let (g, _, _) = canonical_left(&EquivRelation::full(x4())).unwrap();
        assert!(g.base().points().all(|x| g.fiber(x).len() == 4));
    }

    #[test]
    fn corrupted_entry_is_reported() {
        let (f, mut act, _) = canonical_left(&e_free_r()).unwrap();
        let t = f.find(1, &[2]).unwrap();
        act.set(0, 1, t, f.find(0, &[0]).unwrap());
        assert!(matches!(validate_action(&f, &act), Err(FiberError::InvalidAction(_))));
    }

    #[test]
    fn identity_space_with_trivial_relation() {
        let f = FiberedSpace::identity(x4());
        let act = Action::from_fn(&f, &EquivRelation::trivial(x4()), |_, _, t| t).unwrap();
        validate_action(&f, &act).unwrap();
        assert!(orbit_relation(&f, &act).unwrap().is_trivial());
        let s = PartialSection::new(&f, (0..4).map(|x| (x, x))).unwrap();
        let r = e_free_r();
        let act_r = Action::from_fn(&f, &r, |x, _, _| x).unwrap();
        assert_eq!(stabilizer(&f, &act_r, &s).unwrap(), r);
    }

    #[test]
    fn quotient_by_first_factor() {
        let r = e_free_r();
        let r1 = rel(&[&[0, 1], &[2], &[3]]);
        let (f, act, d) = quotient(&r, &r1).unwrap();
        assert_eq!(f.fiber(0).len(), 2);
        assert_eq!(f.fiber(3).len(), 1);
        assert_eq!(stabilizer(&f, &act, &d).unwrap(), r1);
        assert_eq!(orbit_relation(&f, &act).unwrap().num_classes(), 3);
        let swap = right_quotient_symmetry(&r, &r1).unwrap();
        assert!(swap.is_bijective());
    }

    #[test]
    fn quotient_extremes() {
        let r = e_free_r();
        let (f, _, _) = quotient(&r, &EquivRelation::trivial(x4())).unwrap();
        assert_eq!(f, canonical_left(&r).unwrap().0);
        let (g, act, d) = quotient(&r, &r).unwrap();
        assert!(g.base().points().all(|x| g.fiber(x).len() == 1));
        assert_eq!(stabilizer(&g, &act, &d).unwrap(), r);
    }

    #[test]
    fn quotient_rejects_bad_input() {
        let r1 = rel(&[&[0, 1], &[2], &[3]]);
        assert_eq!(quotient(&r1, &e_free_r()).unwrap_err(), FiberError::NotSubrelation);
        let a = PointSet::from_points(x4(), [0, 1]).unwrap();
        let s = EquivRelation::trivial_on(&a);
        assert_eq!(quotient(&e_free_r(), &s).unwrap_err(), FiberError::NotCompleteDomain);
    }

    #[test]
    fn quotient_on_complete_domain() {
        let r = e_free_r();
        let a = PointSet::from_points(x4(), [0, 2, 3]).unwrap();
        let s = EquivRelation::from_classes(x4(), [vec![0, 2], vec![3]]).unwrap();
        assert_eq!(s.domain(), a);
        let (f, act, d) = quotient(&r, &s).unwrap();
        assert_eq!(d.domain(), a);
        assert_eq!(stabilizer(&f, &act, &d).unwrap(), s);
        assert!(act.is_saturating(&d));
    }
}
