use fibered::{Action, FiberedSpace, PartialSection};
use space_core::{DomainKind, Graphing, PointSet};

use crate::field::{horizontal_action, FieldError, GraphField};
use crate::staged::{grow_forest, Policy, StagedForest, Start};

/// A fundamental domain of the vertex action (always exists for finite fields).
pub fn quasi_free_check(field: &GraphField) -> Result<Vec<usize>, FieldError> {
    let (vact, _) = field.actions()?;
    Ok(fibered::rf_fundamental_domain(field.vertices(), vact)?)
}

/// Sub-forest over `domain` whose vertices meet every vertex orbit exactly once
/// and which is a subtree in every fiber.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subforest {
    pub domain: PointSet,
    pub vertices: Vec<bool>,
    pub edges: Vec<bool>,
    pub forest: StagedForest,
}

impl Subforest {
    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().filter(|&&v| v).count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().filter(|&&e| e).count()
    }
}

pub fn fundamental_subforest(field: &GraphField) -> Result<Subforest, FieldError> {
    let forest = grow_forest(field, Start::LeastVertex, Policy::QuasiFree, None)?;
    let vertices = forest.vertex_mask(field);
    let mut edges = vec![false; field.edges().len()];
    for n in &forest.nodes {
        for e in n.edge.iter().flat_map(|s| s.image()) {
            edges[e] = true;
        }
    }
    Ok(Subforest { domain: forest.domain.clone(), vertices, edges, forest })
}

/// Collapses every translate of the sub-forest to a single vertex.
///
/// The result has vertices `(x, [y])` for `y` in the sub-forest's domain related
/// to `x`, standing for the translate of the sub-forest over `y`, and keeps the
/// edges that join distinct translates. Returns the contracted field and its
/// section `y -> (y, [y])`.
pub fn contract(field: &GraphField, sub: &Subforest) -> Result<(GraphField, PartialSection), FieldError> {
    let (vact, eact) = field.actions()?;
    let rel = vact.relation();
    let base = rel.space();
    if !matches!(rel.classify_domain(&sub.domain)?, DomainKind::Both | DomainKind::Complete) {
        return Err(FieldError::NotCompleteDomain);
    }
    let mut translate: Vec<Option<usize>> = vec![None; field.vertices().len()];
    for u in field.vertices().points().filter(|&u| sub.vertices[u]) {
        let y = field.vertices().proj(u);
        for x in rel.class_members(y) {
            let v = vact.apply(x, y, u).expect("related");
            if translate[v].replace(y).is_some() {
                return Err(FieldError::NotFundamentalDomain);
            }
        }
    }
    let translate: Vec<usize> = translate.into_iter().collect::<Option<_>>().ok_or(FieldError::NotFundamentalDomain)?;

    let vertices = FiberedSpace::new(
        base,
        base.points().flat_map(|x| {
            rel.class_members(x).into_iter().filter(|&y| sub.domain.contains(y)).map(move |y| (x, vec![y]))
        }),
    )?;
    let node = |v: usize| {
        let x = field.vertices().proj(v);
        vertices.find(x, &[translate[v]]).expect("translate present")
    };
    let kept: Vec<usize> =
        field.edges().points().filter(|&e| translate[field.origin(e)] != translate[field.terminus(e)]).collect();
    let mut new_id = vec![usize::MAX; field.edges().len()];
    let edges = FiberedSpace::sparse(base, kept.iter().map(|&e| (field.edges().proj(e), vec![e])))?;
    for t in edges.points() {
        new_id[edges.label(t)[0]] = t;
    }
    let (origin, terminus) = edges
        .points()
        .map(|t| {
            let e = edges.label(t)[0];
            (node(field.origin(e)), node(field.terminus(e)))
        })
        .unzip();
    let contracted = GraphField::new(vertices, edges, origin, terminus)?;
    let new_vact = horizontal_action(contracted.vertices(), rel)?;
    let new_eact = Action::from_fn(contracted.edges(), rel, |x, y, t| {
        let e = contracted.edges().label(t)[0];
        new_id[eact.apply(x, y, e).expect("related")]
    })?;
    let contracted = contracted.with_actions(new_vact, new_eact)?;
    let section = PartialSection::new(
        contracted.vertices(),
        sub.domain.iter().map(|y| (y, contracted.vertices().find(y, &[y]).unwrap())),
    )?;
    Ok((contracted, section))
}

/// Reads a treeing of the acting relation off a tree field whose section `s`
/// has image a fundamental domain for the vertex orbits.
///
/// Points of the domain are joined when `s(x)` is adjacent to `(x, y) · s(y)`;
/// each point off the domain is joined to the least domain point of its class.
pub fn treeing_from_fd_section(field: &GraphField, s: &PartialSection) -> Result<Graphing, FieldError> {
    let (vact, _) = field.actions()?;
    let rel = vact.relation();
    let dom = s.domain();
    if !matches!(rel.classify_domain(&dom)?, DomainKind::Both | DomainKind::Complete) {
        return Err(FieldError::NotCompleteDomain);
    }
    let mut pairs = Vec::new();
    for x in rel.space().points() {
        let class = rel.class_members(x);
        let reps: Vec<usize> = class.iter().copied().filter(|&y| dom.contains(y)).collect();
        let mut hit = vec![false; field.vertices().len()];
        for &y in &reps {
            let v = vact.apply(x, y, s.get(y).unwrap()).expect("related");
            if std::mem::replace(&mut hit[v], true) {
                return Err(FieldError::NotFundamentalDomain);
            }
        }
        if field.vertices().fiber(x).iter().any(|&v| !hit[v]) {
            return Err(FieldError::NotFundamentalDomain);
        }
        match s.get(x) {
            Some(sx) => {
                for &y in reps.iter().filter(|&&y| y != x) {
                    let v = vact.apply(x, y, s.get(y).unwrap()).unwrap();
                    if field.edge_between(sx, v).is_some() {
                        pairs.push((x, y));
                    }
                }
            }
            None => {
                pairs.push((x, reps[0]));
                pairs.push((reps[0], x));
            }
        }
    }
    Ok(Graphing::from_pairs(rel.space(), pairs)?)
}

/// A treeing of the acting relation of a tree field.
pub fn extract_treeing(field: &GraphField) -> Result<Graphing, FieldError> {
    let sub = fundamental_subforest(field)?;
    let (contracted, s) = contract(field, &sub)?;
    treeing_from_fd_section(&contracted, &s)
}

#[cfg(test)]
mod tests {
    use space_core::{EquivRelation, FiniteSpace};

    use super::*;
    use crate::bass_serre::bass_serre_free;
    use crate::field::{from_graphing, is_treefield};

    fn rel(classes: &[&[usize]]) -> EquivRelation {
        EquivRelation::from_classes(FiniteSpace::new(4).unwrap(), classes.iter().map(|c| c.to_vec())).unwrap()
    }

    fn free_example() -> crate::ColoredTreeField {
        let r1 = rel(&[&[0, 1], &[2], &[3]]);
        let r2 = rel(&[&[0], &[1, 2], &[3]]);
        let r = rel(&[&[0, 1, 2], &[3]]);
        bass_serre_free(&r, &r1, &r2).unwrap()
    }

    #[test]
    fn subforest_of_free_example_meets_each_orbit_once() {
        let a = free_example();
        let sub = fundamental_subforest(&a.field).unwrap();
        // one vertex per class of r1 and of r2
        assert_eq!(sub.vertex_count(), 6);
        assert_eq!(sub.domain.to_vec(), vec![0, 3]);
        assert_eq!(sub.edge_count(), 3 + 1);
    }

    #[test]
    fn contraction_gives_one_vertex_per_domain_point() {
        let a = free_example();
        let sub = fundamental_subforest(&a.field).unwrap();
        let (c, s) = contract(&a.field, &sub).unwrap();
        assert!(is_treefield(&c).is_ok());
        assert_eq!(c.vertices().fiber(0).len(), 1);
        assert!(c.edges().is_empty());
        assert_eq!(s.domain().to_vec(), vec![0, 3]);
    }

    #[test]
    fn extraction_under_full_action_is_retraction_star() {
        let a = free_example();
        let t = extract_treeing(&a.field).unwrap();
        let r = rel(&[&[0, 1, 2], &[3]]);
        assert!(t.is_treeing_of(&r));
        assert_eq!(t.unordered_edges(), vec![(0, 1), (0, 2)]);
    }

    #[test]
    fn extraction_under_subrelation_gives_its_edge() {
        let a = free_example();
        let s = rel(&[&[0, 2], &[1], &[3]]);
        let field = a.field.restrict_action(&s).unwrap();
        let t = extract_treeing(&field).unwrap();
        assert_eq!(t.unordered_edges(), vec![(0, 2)]);
        assert!(t.is_treeing_of(&s));
    }

    #[test]
    fn diagonal_of_a_graphing_field_returns_the_graphing() {
        let phi = Graphing::from_edges(FiniteSpace::new(5).unwrap(), [(0, 3), (3, 1), (2, 4)]).unwrap();
        let (_, field, d) = from_graphing(&phi).unwrap();
        assert_eq!(treeing_from_fd_section(&field, &d).unwrap(), phi);
    }

    #[test]
    fn non_fundamental_section_is_rejected() {
        let phi = Graphing::from_edges(FiniteSpace::new(3).unwrap(), [(0, 1)]).unwrap();
        let (_, field, _) = from_graphing(&phi).unwrap();
        // (x, [0]) over 0 and 1 hits the same orbit twice
        let vs = field.vertices();
        let s = PartialSection::new(
            vs,
            [(0, vs.find(0, &[0]).unwrap()), (1, vs.find(1, &[0]).unwrap()), (2, vs.find(2, &[2]).unwrap())],
        )
        .unwrap();
        assert_eq!(treeing_from_fd_section(&field, &s), Err(FieldError::NotFundamentalDomain));
    }

    #[test]
    fn quasi_free_domain_has_one_point_per_orbit() {
        let a = free_example();
        assert_eq!(quasi_free_check(&a.field).unwrap().len(), 6);
    }
}
