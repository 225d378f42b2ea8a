use fibered::{section_stabilizer, PartialSection};
use petgraph::unionfind::UnionFind;
use space_core::{EquivRelation, FiniteSpace, Graphing, PointSet};
use treefield::{bass_serre_amalgam, GraphField, WitnessKind};

use crate::tuple::canonical_rotation;
use crate::{DecompError, ReducedTuple};

/// Outcome of a product check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// The product condition holds; carries the number of factors and whether a
    /// core was involved.
    Accept(ProductCertificate),
    Reject(ReducedTuple),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductCertificate {
    pub factors: usize,
    pub core: bool,
    /// Per class of the ambient relation, the number of incidences in its
    /// (acyclic) incidence forest.
    pub incidences: usize,
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept(_))
    }

    pub fn tuple(&self) -> Option<&ReducedTuple> {
        match self {
            Verdict::Accept(_) => None,
            Verdict::Reject(t) => Some(t),
        }
    }
}

/// Off-diagonal pairs of `sub` all lie in `sup`.
pub(crate) fn pairs_inside(sub: &EquivRelation, sup: &EquivRelation) -> Option<(usize, usize)> {
    sub.pairs().into_iter().find(|&(x, y)| x != y && !sup.related(x, y))
}

/// The relation generated by several relations on a common space, on the whole space.
pub(crate) fn join_all<'a>(space: FiniteSpace, rels: impl IntoIterator<Item = &'a EquivRelation>) -> EquivRelation {
    let pairs: Vec<(usize, usize)> = rels.into_iter().flat_map(|r| r.pairs()).collect();
    EquivRelation::generated_by(&PointSet::full(space), pairs).expect("pairs in range")
}

fn check_inputs(r: &EquivRelation, factors: &[EquivRelation], core: Option<&EquivRelation>) -> Result<(), DecompError> {
    let space = r.space();
    for f in factors.iter().chain(core) {
        space.check_same(&f.space())?;
    }
    if factors.iter().any(|f| pairs_inside(f, r).is_some()) {
        return Err(DecompError::NotSubrelation);
    }
    if let Some(c) = core {
        if factors.iter().any(|f| pairs_inside(c, f).is_some()) {
            return Err(DecompError::NotSubrelation);
        }
    }
    let join = join_all(space, factors);
    if let Some((x, y)) = pairs_inside(r, &join) {
        return Err(DecompError::NotGenerated(x, y));
    }
    Ok(())
}

/// Decides whether `r` is the free product of `factors` (factors may live on
/// parts of the space). Each class carries an incidence graph between its points
/// and the nontrivial factor classes inside it; the product is free iff all these
/// graphs are forests. A cycle is turned into a closing reduced tuple.
pub fn verify_free_product(r: &EquivRelation, factors: &[EquivRelation]) -> Result<Verdict, DecompError> {
    verify_product(r, factors, None)
}

/// As [`verify_free_product`] with a common core: incidence nodes are the core
/// classes instead of points.
pub fn verify_product(
    r: &EquivRelation,
    factors: &[EquivRelation],
    core: Option<&EquivRelation>,
) -> Result<Verdict, DecompError> {
    check_inputs(r, factors, core)?;
    let n = r.space().size();
    let node = |x: usize| core.and_then(|c| c.class_id(x)).unwrap_or(x);
    // nodes 0..n: points (or core class ids); then one node per factor class
    let mut class_nodes: Vec<(usize, usize)> = Vec::new();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, f) in factors.iter().enumerate() {
        for class in f.classes() {
            let mut inner: Vec<usize> = class.iter().map(|&x| node(x)).collect();
            inner.sort_unstable();
            inner.dedup();
            if inner.len() < 2 {
                continue;
            }
            let id = n + class_nodes.len();
            class_nodes.push((i, class[0]));
            edges.extend(inner.into_iter().map(|c| (c, id)));
        }
    }
    let total = n + class_nodes.len();
    let mut uf = UnionFind::<usize>::new(total);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for &(a, b) in &edges {
        if !uf.union(a, b) {
            let path = path_between(&adj, b, a);
            // path runs b (a class node) ... a (a point node); close it through b
            let cyc: Vec<usize> = path;
            let start = cyc.iter().position(|&v| v < n).expect("bipartite cycle has a point node");
            let m = cyc.len();
            let rotated: Vec<usize> = (0..m).map(|k| cyc[(start + k) % m]).collect();
            let points: Vec<usize> = rotated.iter().step_by(2).copied().chain([rotated[0]]).collect();
            let tags: Vec<usize> = rotated.iter().skip(1).step_by(2).map(|&c| class_nodes[c - n].0).collect();
            return Ok(Verdict::Reject(canonical_rotation(&points, &tags)));
        }
        adj[a].push(b);
        adj[b].push(a);
    }
    Ok(Verdict::Accept(ProductCertificate { factors: factors.len(), core: core.is_some(), incidences: edges.len() }))
}

fn path_between(adj: &[Vec<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
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

/// Decides `r = r1 *_core r2` through the tree condition on the amalgam field.
/// Relations living on part of the space are first compressed to that part.
pub fn verify_amalgam(
    r: &EquivRelation,
    r1: &EquivRelation,
    r2: &EquivRelation,
    core: &EquivRelation,
) -> Result<Verdict, DecompError> {
    check_inputs(r, &[r1.clone(), r2.clone()], Some(core))?;
    let dom = r.domain();
    let embed = dom.to_vec();
    if embed.is_empty() {
        return Ok(Verdict::Accept(ProductCertificate { factors: 2, core: true, incidences: 0 }));
    }
    let small = FiniteSpace::new(embed.len())?;
    let pull = |s: &EquivRelation| -> Result<EquivRelation, DecompError> {
        let on = s.restrict(&dom)?;
        let back = on.pull_back(&embed, small)?;
        Ok(back.extend_trivially())
    };
    let (rr, a1, a2, c) = (pull(r)?, pull(r1)?, pull(r2)?, pull(core)?);
    let field = bass_serre_amalgam(&rr, &a1, &a2, &c)?;
    match field.field.tree_witness() {
        None => {
            Ok(Verdict::Accept(ProductCertificate { factors: 2, core: true, incidences: field.field.edges().len() }))
        }
        Some(w) => match w.kind {
            WitnessKind::Cycle(vs) => {
                // consecutive cycle vertices are joined by an edge standing for a
                // core class; the vertex between two edges names the factor
                let f = &field.field;
                let m = vs.len() - 1;
                // parallel edges make a cycle of length two, so edges must not repeat
                let mut used: Vec<usize> = Vec::with_capacity(m);
                for k in 0..m {
                    let e = f
                        .incident(vs[k])
                        .iter()
                        .copied()
                        .filter(|&e| f.other_end(e, vs[k]) == vs[k + 1] && !used.contains(&e))
                        .min();
                    used.push(e.ok_or_else(|| DecompError::Internal("cycle edge missing".into()))?);
                }
                let reps: Vec<usize> = used.iter().map(|&e| embed[f.edges().label(e)[0]]).collect();
                let tags: Vec<usize> = (0..m).map(|k| field.color[vs[(k + 1) % m]] as usize - 1).collect();
                let points: Vec<usize> = reps.iter().copied().chain([reps[0]]).collect();
                Ok(Verdict::Reject(canonical_rotation(&points, &tags)))
            }
            WitnessKind::Disconnected(_, _) => {
                Err(DecompError::Internal("factors cover the relation but a fiber is disconnected".into()))
            }
        },
    }
}

/// Reads the two vertex stabilizers off a field carrying an edge section whose
/// image is a fundamental domain of the edge orbits, with the origin and
/// terminus saturations splitting the vertices in two.
pub fn stabilizer_decomposition(
    field: &GraphField,
    d: &PartialSection,
) -> Result<(EquivRelation, EquivRelation, Verdict), DecompError> {
    let (vact, eact) = field.actions()?;
    let rel = vact.relation();
    let dom = d.domain();
    for x in rel.space().points() {
        let reps: Vec<usize> = rel.class_members(x).into_iter().filter(|&y| dom.contains(y)).collect();
        if reps.is_empty() {
            return Err(DecompError::HypothesisViolation { hypothesis: "edge section domain is complete", witness: x });
        }
        let mut hit = vec![false; field.edges().len()];
        for &y in &reps {
            let e = eact.apply(x, y, d.get(y).unwrap()).expect("related");
            if std::mem::replace(&mut hit[e], true) {
                return Err(DecompError::HypothesisViolation {
                    hypothesis: "edge section meets each edge orbit once",
                    witness: x,
                });
            }
        }
        if let Some(&e) = field.edges_over(x).iter().find(|&&e| !hit[e]) {
            return Err(DecompError::HypothesisViolation {
                hypothesis: "edge section meets each edge orbit once",
                witness: e,
            });
        }
    }
    let o = field.origin_section(d)?;
    let t = field.terminus_section(d)?;
    let so = vact.saturate(o.image());
    let st = vact.saturate(t.image());
    for v in field.vertices().points() {
        if so[v] == st[v] {
            return Err(DecompError::HypothesisViolation {
                hypothesis: "origin and terminus orbits split the vertices",
                witness: v,
            });
        }
    }
    let r1 = section_stabilizer(vact, &o);
    let r2 = section_stabilizer(vact, &t);
    let base = rel.restrict(&dom)?;
    let verdict = verify_free_product(&base, &[r1.clone(), r2.clone()])?;
    Ok((r1, r2, verdict))
}

/// Union of treeings of two free factors.
pub fn union_treeing(
    r1: &EquivRelation,
    gr1: &Graphing,
    r2: &EquivRelation,
    gr2: &Graphing,
) -> Result<Graphing, DecompError> {
    let join = join_all(r1.space(), [r1, r2]);
    if let Verdict::Reject(t) = verify_free_product(&join, &[r1.clone(), r2.clone()])? {
        return Err(DecompError::NotFreeProduct(t));
    }
    for (g, r) in [(gr1, r1), (gr2, r2)] {
        if let Some(v) = g.treeing_violation(&r.extend_trivially()) {
            return Err(DecompError::Internal(format!("input is not a treeing: {v:?}")));
        }
    }
    Ok(gr1.union(gr2)?)
}

#[cfg(test)]
mod tests {
    use space_core::FiniteSpace;
    use treefield::bass_serre_free;

    use super::*;

    fn rel(classes: &[&[usize]]) -> EquivRelation {
        EquivRelation::from_classes(FiniteSpace::new(4).unwrap(), classes.iter().map(|c| c.to_vec())).unwrap()
    }

    fn free() -> (EquivRelation, EquivRelation, EquivRelation) {
        (rel(&[&[0, 1, 2], &[3]]), rel(&[&[0, 1], &[2], &[3]]), rel(&[&[0], &[1, 2], &[3]]))
    }

    #[test]
    fn free_example_is_accepted() {
        let (r, r1, r2) = free();
        assert!(verify_free_product(&r, &[r1, r2]).unwrap().is_accept());
        assert!(verify_free_product(&r, std::slice::from_ref(&r)).unwrap().is_accept());
    }

    #[test]
    fn cycle_example_is_rejected_with_its_tuple() {
        let r = rel(&[&[0, 1, 2, 3]]);
        let r1 = rel(&[&[0, 1], &[2, 3]]);
        let r2 = rel(&[&[1, 2], &[0, 3]]);
        let v = verify_free_product(&r, &[r1.clone(), r2.clone()]).unwrap();
        assert_eq!(v.tuple().unwrap(), &ReducedTuple { points: vec![0, 1, 2, 3, 0], tags: vec![0, 1, 0, 1] });
        let trivial = EquivRelation::trivial(r.space());
        assert_eq!(verify_amalgam(&r, &r1, &r2, &trivial).unwrap(), v);
    }

    #[test]
    fn generation_and_containment_are_checked() {
        let (r, r1, _) = free();
        assert_eq!(verify_free_product(&r, std::slice::from_ref(&r1)), Err(DecompError::NotGenerated(0, 2)));
        let big = rel(&[&[0, 1, 2, 3]]);
        assert_eq!(verify_free_product(&r, &[big]), Err(DecompError::NotSubrelation));
    }

    #[test]
    fn amalgam_examples() {
        let (r, r1, r2) = free();
        let trivial = EquivRelation::trivial(r.space());
        assert!(verify_amalgam(&r, &r1, &r2, &trivial).unwrap().is_accept());
        assert!(verify_amalgam(&r, &r, &r, &r).unwrap().is_accept());
        let full = rel(&[&[0, 1, 2, 3]]);
        let a1 = rel(&[&[0, 1, 2], &[3]]);
        let a2 = rel(&[&[0, 1], &[2, 3]]);
        let core = rel(&[&[0, 1], &[2], &[3]]);
        assert!(verify_amalgam(&full, &a1, &a2, &core).unwrap().is_accept());
        assert!(!verify_free_product(&full, &[a1.clone(), a2.clone()]).unwrap().is_accept());
        assert_eq!(verify_amalgam(&full, &a1, &a2, &trivial).unwrap().tuple().unwrap().points, vec![0, 1, 0]);
    }

    #[test]
    fn stabilizers_of_the_diagonal_recover_the_factors() {
        let (r, r1, r2) = free();
        let a = bass_serre_free(&r, &r1, &r2).unwrap();
        let (s1, s2, v) = stabilizer_decomposition(&a.field, &a.edge_section).unwrap();
        assert_eq!((s1, s2), (r1, r2));
        assert!(v.is_accept());
    }

    #[test]
    fn single_edge_fibers_give_trivial_stabilizers() {
        let t = EquivRelation::trivial(FiniteSpace::new(4).unwrap());
        let a = bass_serre_free(&t, &t, &t).unwrap();
        let (s1, s2, v) = stabilizer_decomposition(&a.field, &a.edge_section).unwrap();
        assert!(s1.is_trivial() && s2.is_trivial() && v.is_accept());
    }

    #[test]
    fn one_sided_orbits_violate_the_bipartition() {
        let (r, r1, r2) = free();
        let a = bass_serre_free(&r, &r1, &r2).unwrap();
        let half = a.edge_section.restrict(&PointSet::from_points(r.space(), [0, 3]).unwrap());
        assert!(matches!(stabilizer_decomposition(&a.field, &half), Err(DecompError::HypothesisViolation { .. })));
    }

    #[test]
    fn union_of_factor_treeings() {
        let (_, r1, r2) = free();
        let s = r1.space();
        let g1 = Graphing::from_edges(s, [(0, 1)]).unwrap();
        let g2 = Graphing::from_edges(s, [(1, 2)]).unwrap();
        let u = union_treeing(&r1, &g1, &r2, &g2).unwrap();
        assert_eq!(u.num_edges(), 2);
        assert_eq!(union_treeing(&r1, &g1, &EquivRelation::trivial(s), &Graphing::empty(s)).unwrap(), g1);
        let c1 = rel(&[&[0, 1], &[2, 3]]);
        let c2 = rel(&[&[1, 2], &[0, 3]]);
        let h1 = Graphing::from_edges(s, [(0, 1), (2, 3)]).unwrap();
        let h2 = Graphing::from_edges(s, [(1, 2), (0, 3)]).unwrap();
        assert!(matches!(union_treeing(&c1, &h1, &c2, &h2), Err(DecompError::NotFreeProduct(_))));
    }
}
