use space_core::{EquivRelation, PointSet};

use crate::action::stabilizer_unchecked;
use crate::{
    canonical_left, validate_action, verify_morphism, Action, FiberError, FiberedMorphism, FiberedSpace, PartialSection,
};

/// Sections whose orbit saturations partition the carrier.
///
/// Each section takes the least-numbered point left in every fiber, then its
/// saturation is removed.
pub fn exhaust_sections(space: &FiberedSpace, act: &Action) -> Result<Vec<PartialSection>, FiberError> {
    validate_action(space, act)?;
    let mut left = vec![true; space.len()];
    let mut sections = Vec::new();
    loop {
        let picks: Vec<(usize, usize)> =
            space.base().points().filter_map(|x| space.fiber(x).iter().find(|&&t| left[t]).map(|&t| (x, t))).collect();
        if picks.is_empty() {
            return Ok(sections);
        }
        let s = PartialSection::new(space, picks)?;
        for (t, hit) in act.saturate(s.image()).into_iter().enumerate() {
            if hit {
                left[t] = false;
            }
        }
        sections.push(s);
    }
}

/// One point per orbit: each exhausting section restricted to the least points
/// of its stabilizer classes.
pub fn rf_fundamental_domain(space: &FiberedSpace, act: &Action) -> Result<Vec<usize>, FiberError> {
    let mut points = Vec::new();
    for s in exhaust_sections(space, act)? {
        let fd = stabilizer_unchecked(act, &s).fundamental_domain();
        points.extend(fd.iter().map(|x| s.get(x).unwrap()));
    }
    points.sort_unstable();
    Ok(points)
}

/// The morphism sending `s1(a)` to `s2(a)`, defined by `t -> (x, y) · s2(y)` where
/// `y` is the least point with `t` in the orbit of `s1(y)`.
pub fn induced_morphism(
    (f1, a1, s1): (&FiberedSpace, &Action, &PartialSection),
    (f2, a2, s2): (&FiberedSpace, &Action, &PartialSection),
) -> Result<FiberedMorphism, FiberError> {
    validate_action(f1, a1)?;
    validate_action(f2, a2)?;
    if a1.relation() != a2.relation() {
        return Err(FiberError::DomainMismatch("actions of different relations".into()));
    }
    let domain = s1.domain();
    if s2.domain() != domain {
        return Err(FiberError::DomainMismatch("sections have different domains".into()));
    }
    if !a1.relation().saturate(&domain)?.is_full() {
        return Err(FiberError::NotCompleteDomain);
    }
    if !a1.is_saturating(s1) {
        return Err(FiberError::NotSaturating);
    }
    let stab2 = stabilizer_unchecked(a2, s2);
    if let Some((x, y)) = stabilizer_unchecked(a1, s1).pairs().into_iter().find(|&(x, y)| !stab2.related(x, y)) {
        return Err(FiberError::StabilizerNotIncluded(x, y));
    }
    let r = a1.relation();
    let map = f1
        .points()
        .map(|t| {
            let x = f1.proj(t);
            let y = r
                .class_members(x)
                .into_iter()
                .find(|&y| s1.get(y).is_some_and(|u| a1.apply(x, y, u) == Some(t)))
                .expect("s1 is saturating");
            a2.apply(x, y, s2.get(y).unwrap()).unwrap()
        })
        .collect();
    let f = FiberedMorphism { source: f1.clone(), target: f2.clone(), map };
    verify_morphism(&f, a1, a2)?;
    Ok(f)
}

/// Whether the image of `s` meets every orbit exactly once.
fn is_fundamental_image(space: &FiberedSpace, act: &Action, s: &PartialSection) -> bool {
    let mut owner = vec![false; space.len()];
    for t in s.image() {
        for u in act.orbit(t) {
            if std::mem::replace(&mut owner[u], true) {
                return false;
            }
        }
    }
    owner.into_iter().all(|o| o)
}

/// The isomorphism onto the canonical left space sending `s` to the diagonal.
pub fn canonical_iso(space: &FiberedSpace, act: &Action, s: &PartialSection) -> Result<FiberedMorphism, FiberError> {
    validate_action(space, act)?;
    if !s.domain().is_full() || !is_fundamental_image(space, act, s) {
        return Err(FiberError::NotFundamentalDomain);
    }
    let (canon, canon_act, d) = canonical_left(act.relation())?;
    let f = induced_morphism((space, act, s), (&canon, &canon_act, &d))?;
    debug_assert!(f.is_bijective());
    Ok(f)
}

/// Greedy search, by least carrier id, for a complete domain of the orbit
/// relation on which the projection is injective.
pub fn is_homogeneous(space: &FiberedSpace, act: &Action) -> Result<bool, FiberError> {
    validate_action(space, act)?;
    let mut covered = vec![false; space.len()];
    let mut used = vec![false; space.base().size()];
    for t in space.points() {
        if covered[t] || used[space.proj(t)] {
            continue;
        }
        used[space.proj(t)] = true;
        for u in act.orbit(t) {
            covered[u] = true;
        }
    }
    Ok(covered.into_iter().all(|c| c))
}

/// A reduction `r: A -> A'` with `s'(r(x)) = (r(x), x) · s(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reduction {
    pub pairs: Vec<(usize, usize)>,
}

impl Reduction {
    pub fn apply(&self, x: usize) -> Option<usize> {
        self.pairs.binary_search_by_key(&x, |p| p.0).ok().map(|i| self.pairs[i].1)
    }
}

/// Builds a reduction between the stabilizers of two saturating sections and
/// checks it with [`verify_reduction`]. `r(x) = x` when that works, otherwise the
/// least candidate.
pub fn stable_conjugacy_witness(
    space: &FiberedSpace,
    act: &Action,
    s: &PartialSection,
    s2: &PartialSection,
) -> Result<Reduction, FiberError> {
    validate_action(space, act)?;
    if !act.is_saturating(s) || !act.is_saturating(s2) {
        return Err(FiberError::NotSaturating);
    }
    let r = act.relation();
    let pairs = s
        .pairs()
        .into_iter()
        .map(|(x, t)| {
            let y = std::iter::once(x)
                .chain(r.class_members(x))
                .find(|&y| s2.get(y).is_some() && act.apply(y, x, t) == s2.get(y))
                .ok_or(FiberError::BadReduction(x))?;
            Ok((x, y))
        })
        .collect::<Result<Vec<_>, FiberError>>()?;
    let red = Reduction { pairs };
    verify_reduction(space, act, s, s2, &red)?;
    Ok(red)
}

/// Re-checks the defining formula pointwise, that `r` preserves and reflects the
/// stabilizers, and that `r(A)` is a complete domain of the second stabilizer.
pub fn verify_reduction(
    space: &FiberedSpace,
    act: &Action,
    s: &PartialSection,
    s2: &PartialSection,
    red: &Reduction,
) -> Result<(), FiberError> {
    validate_action(space, act)?;
    let domain = s.domain();
    if red.pairs.iter().map(|p| p.0).collect::<Vec<_>>() != domain.to_vec() {
        return Err(FiberError::DomainMismatch("reduction is not defined on the section domain".into()));
    }
    let (stab, stab2) = (stabilizer_unchecked(act, s), stabilizer_unchecked(act, s2));
    for &(x, y) in &red.pairs {
        if !act.relation().related(x, y) || s2.get(y).is_none() || act.apply(y, x, s.get(x).unwrap()) != s2.get(y) {
            return Err(FiberError::BadReduction(x));
        }
    }
    for &(x, y) in &red.pairs {
        for &(x2, y2) in &red.pairs {
            if act.relation().related(x, x2) && stab.related(x, x2) != stab2.related(y, y2) {
                return Err(FiberError::BadReduction(x));
            }
        }
    }
    let image = PointSet::from_points(space.base(), red.pairs.iter().map(|p| p.1))?;
    if stab2.saturate(&image)? != s2.domain() {
        return Err(FiberError::BadReduction(red.pairs[0].0));
    }
    Ok(())
}

/// A fibered space containing the input, with a full section extending the input one.
#[derive(Clone, Debug)]
pub struct Extension {
    pub space: FiberedSpace,
    pub action: Action,
    pub section: PartialSection,
    /// Old carrier id to new carrier id.
    pub inclusion: Vec<usize>,
}

/// Adds the points `(x, b)` for `b` outside the section domain, acted on
/// horizontally, and sets `s'(b) = (b, b)`.
pub fn extend_to_canonical(space: &FiberedSpace, act: &Action, s: &PartialSection) -> Result<Extension, FiberError> {
    validate_action(space, act)?;
    if !is_fundamental_image(space, act, s) {
        return Err(FiberError::NotFundamentalDomain);
    }
    let domain = s.domain();
    if domain.is_full() {
        return Ok(Extension {
            space: space.clone(),
            action: act.clone(),
            section: s.clone(),
            inclusion: space.points().collect(),
        });
    }
    let r = act.relation();
    let old = space.points().map(|t| (space.proj(t), [&[0][..], space.label(t)].concat()));
    let added = r.pairs().into_iter().filter(|&(_, b)| !domain.contains(b)).map(|(x, b)| (x, vec![1, b]));
    let big = FiberedSpace::new(space.base(), old.chain(added))?;
    let inclusion: Vec<usize> =
        space.points().map(|t| big.find(space.proj(t), &[&[0][..], space.label(t)].concat()).unwrap()).collect();
    let mut back = vec![None; big.len()];
    for (t, &u) in inclusion.iter().enumerate() {
        back[u] = Some(t);
    }
    let action = Action::from_fn(&big, r, |x, y, t| match back[t] {
        Some(old) => inclusion[act.apply(x, y, old).unwrap()],
        None => big.find(x, big.label(t)).unwrap(),
    })?;
    let section = PartialSection::new(
        &big,
        space.base().points().map(|x| match s.get(x) {
            Some(t) => (x, inclusion[t]),
            None => (x, big.find(x, &[1, x]).unwrap()),
        }),
    )?;
    validate_action(&big, &action)?;
    Ok(Extension { space: big, action, section, inclusion })
}

/// The orbit-saturation of a section, as a fibered space of its own.
pub fn saturation_subspace(
    space: &FiberedSpace,
    act: &Action,
    s: &PartialSection,
) -> Result<(FiberedSpace, Action, PartialSection), FiberError> {
    let keep = act.saturate(s.image());
    let (sub, sub_act, old) = act.subspace(space, &keep)?;
    let mut new_id = vec![usize::MAX; space.len()];
    for (i, &t) in old.iter().enumerate() {
        new_id[t] = i;
    }
    let section = PartialSection::new(&sub, s.pairs().into_iter().map(|(x, t)| (x, new_id[t])))?;
    Ok((sub, sub_act, section))
}

/// Stabilizer helper for callers that already validated the action.
pub fn section_stabilizer(act: &Action, s: &PartialSection) -> EquivRelation {
    stabilizer_unchecked(act, s)
}
