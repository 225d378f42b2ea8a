use fibered::{section_stabilizer, PartialSection};
use space_core::{EquivRelation, Graphing, PartialIso, PointSet};
use treefield::{grow_forest, GraphField, Policy, StagedForest, Start};

use crate::product::{join_all, verify_amalgam, Verdict};
use crate::DecompError;

/// An edge of the graph of relations outside the represented tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtraEdge {
    /// Node whose vertex is the origin of every edge in `section`.
    pub from: usize,
    /// Node whose saturation holds the other endpoints.
    pub to: usize,
    /// Edge section over the source of `phi`.
    pub section: PartialSection,
    /// Carries `x` to the point of `to`'s carrier whose vertex is the translate
    /// of the far endpoint of `section(x)`.
    pub phi: PartialIso,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Desingularization {
    /// Represented tree; node 0 is the root, carried by the whole base.
    pub forest: StagedForest,
    pub extra: Vec<ExtraEdge>,
}

/// One edge of a graph of relations, oriented away from `from`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationEdge {
    pub from: usize,
    pub to: usize,
    pub relation: EquivRelation,
    /// Conjugates `relation` into the relation of `to`.
    pub morphism: PartialIso,
    pub in_tree: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphOfRelations {
    pub vertex_relations: Vec<EquivRelation>,
    pub edges: Vec<RelationEdge>,
}

impl Desingularization {
    pub fn node_count(&self) -> usize {
        self.forest.nodes.len()
    }

    pub fn graph_of_relations(&self, field: &GraphField) -> Result<GraphOfRelations, DecompError> {
        let (vact, eact) = field.actions()?;
        let vertex_relations = self.forest.nodes.iter().map(|n| section_stabilizer(vact, &n.section)).collect();
        let mut edges = Vec::new();
        for (i, n) in self.forest.nodes.iter().enumerate() {
            if let (Some(p), Some(e)) = (n.parent, &n.edge) {
                edges.push(RelationEdge {
                    from: p,
                    to: i,
                    relation: section_stabilizer(eact, e),
                    morphism: PartialIso::identity(&e.domain()),
                    in_tree: true,
                });
            }
        }
        for a in &self.extra {
            edges.push(RelationEdge {
                from: a.from,
                to: a.to,
                relation: section_stabilizer(eact, &a.section),
                morphism: a.phi.clone(),
                in_tree: false,
            });
        }
        Ok(GraphOfRelations { vertex_relations, edges })
    }
}

/// The staged forest of vertex sections, keeping every point.
pub fn representatives_forest(field: &GraphField, start: Start) -> Result<StagedForest, DecompError> {
    Ok(grow_forest(field, start, Policy::Generic, None)?)
}

/// Representatives forest plus extra edges exhausting the edges outside the
/// orbits of tree edges.
pub fn desingularize(field: &GraphField, start: Start) -> Result<Desingularization, DecompError> {
    desingularize_with(field, start, Policy::Generic, None)
}

pub(crate) fn desingularize_with(
    field: &GraphField,
    start: Start,
    policy: Policy<'_>,
    colors: Option<&[u8]>,
) -> Result<Desingularization, DecompError> {
    let strict = matches!(policy, Policy::Conjugated(_));
    let forest = grow_forest(field, start, policy, colors)?;
    let (vact, eact) = field.actions()?;
    let rel = vact.relation();
    let nodes = &forest.nodes;

    let mut owner = vec![usize::MAX; field.vertices().len()];
    for (i, n) in nodes.iter().enumerate() {
        for (v, hit) in vact.saturate(n.section.image()).into_iter().enumerate() {
            if hit {
                owner[v] = i;
            }
        }
    }
    let mut covered = vec![false; field.edges().len()];
    if !covered.is_empty() {
        let tree_edges = nodes.iter().flat_map(|n| n.edge.iter().flat_map(|e| e.image()));
        covered = eact.saturate(tree_edges);
    }

    let mut extra = Vec::new();
    for p in 0..nodes.len() {
        for q in 0..nodes.len() {
            loop {
                // least remaining edge of C_(p,q) over each point
                let mut picks: Vec<(usize, usize, usize)> = Vec::new();
                for (x, sp) in nodes[p].section.pairs() {
                    let found = field.incident(sp).iter().copied().filter(|&e| !covered[e]).filter_map(|e| {
                        let w = field.other_end(e, sp);
                        (owner[w] == q).then_some((x, e, w))
                    });
                    if let Some(best) = found.min_by_key(|&(_, e, _)| e) {
                        picks.push(best);
                    }
                }
                if picks.is_empty() {
                    break;
                }
                if strict {
                    let mut kept: Vec<(usize, usize, usize)> = Vec::new();
                    for &(x, e, w) in &picks {
                        if !kept.iter().any(|&(y, f, _)| rel.related(x, y) && eact.apply(x, y, f) == Some(e)) {
                            kept.push((x, e, w));
                        }
                    }
                    picks = kept;
                }
                let target = &nodes[q].section;
                let mut used = std::collections::BTreeSet::new();
                let mut kept = Vec::new();
                for &(x, e, w) in &picks {
                    let y = rel
                        .class_members(x)
                        .into_iter()
                        .filter(|y| !used.contains(y))
                        .find(|&y| target.get(y).is_some_and(|sq| vact.apply(y, x, w) == Some(sq)));
                    if let Some(y) = y {
                        used.insert(y);
                        kept.push((x, e, y));
                    }
                }
                if kept.is_empty() {
                    return Err(DecompError::Internal("extra edge without a conjugator".into()));
                }
                for (c, f) in covered.iter_mut().zip(eact.saturate(kept.iter().map(|k| k.1))) {
                    *c |= f;
                }
                extra.push(ExtraEdge {
                    from: p,
                    to: q,
                    section: PartialSection::new(field.edges(), kept.iter().map(|&(x, e, _)| (x, e)))?,
                    phi: PartialIso::from_pairs(rel.space(), kept.iter().map(|&(x, _, y)| (x, y)))?,
                });
            }
        }
    }
    if let Some(e) = covered.iter().position(|c| !c) {
        return Err(DecompError::Internal(format!("edge {e} left outside every orbit")));
    }
    Ok(Desingularization { forest, extra })
}

/// Which structural condition failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bullet {
    /// Vertex saturations of the nodes do not partition the vertices.
    VertexPartition,
    /// A node is not attached to its parent over its carrier.
    TreeShape,
    /// An extra edge does not leave its origin node or does not land on its target node.
    Endpoints,
    /// An edge stabilizer is not carried into the adjacent vertex relations.
    Stabilizer,
    /// Edge saturations do not partition the edges.
    EdgePartition,
    /// An extra-edge conjugator fixes a point.
    Diagonal,
    /// An extra-edge conjugator leaves the acting relation.
    Pseudogroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BulletViolation {
    pub bullet: Bullet,
    pub witness: usize,
}

fn fail(bullet: Bullet, witness: usize) -> Result<(), BulletViolation> {
    Err(BulletViolation { bullet, witness })
}

pub fn validate_desingularization(field: &GraphField, d: &Desingularization) -> Result<(), BulletViolation> {
    let (vact, eact) = field.actions().map_err(|_| BulletViolation { bullet: Bullet::TreeShape, witness: 0 })?;
    let rel = vact.relation();
    let nodes = &d.forest.nodes;

    let mut count = vec![0usize; field.vertices().len()];
    for n in nodes {
        for (v, hit) in vact.saturate(n.section.image()).into_iter().enumerate() {
            count[v] += hit as usize;
        }
    }
    if let Some(v) = count.iter().position(|&c| c != 1) {
        return fail(Bullet::VertexPartition, v);
    }
    if nodes.is_empty() || nodes[0].parent.is_some() || !nodes[0].section.domain().is_full() {
        return fail(Bullet::TreeShape, 0);
    }
    for (i, n) in nodes.iter().enumerate().skip(1) {
        let (Some(p), Some(e)) = (n.parent, &n.edge) else { return fail(Bullet::TreeShape, i) };
        if p >= i || e.domain() != n.section.domain() {
            return fail(Bullet::TreeShape, i);
        }
        for (x, v) in n.section.pairs() {
            let Some(u) = nodes[p].section.get(x) else { return fail(Bullet::TreeShape, i) };
            let ex = e.get(x).unwrap();
            let ends = [field.origin(ex), field.terminus(ex)];
            if !(ends.contains(&u) && ends.contains(&v)) {
                return fail(Bullet::TreeShape, i);
            }
        }
    }

    let stab_inside = |small: &EquivRelation, node: usize| {
        let big = section_stabilizer(vact, &nodes[node].section);
        small.pairs().into_iter().all(|(x, y)| big.related(x, y))
    };
    for (i, n) in nodes.iter().enumerate().skip(1) {
        let es = section_stabilizer(eact, n.edge.as_ref().unwrap());
        if !stab_inside(&es, i) || !stab_inside(&es, n.parent.unwrap()) {
            return fail(Bullet::Stabilizer, i);
        }
    }
    for (k, a) in d.extra.iter().enumerate() {
        if a.section.domain() != a.phi.source() || a.from >= nodes.len() || a.to >= nodes.len() {
            return fail(Bullet::Endpoints, k);
        }
        for (x, e) in a.section.pairs() {
            let y = a.phi.apply(x).unwrap();
            if y == x {
                return fail(Bullet::Diagonal, k);
            }
            if !rel.related(x, y) {
                return fail(Bullet::Pseudogroup, k);
            }
            let Some(sp) = nodes[a.from].section.get(x) else { return fail(Bullet::Endpoints, k) };
            let Some(sq) = nodes[a.to].section.get(y) else { return fail(Bullet::Endpoints, k) };
            let ends = [field.origin(e), field.terminus(e)];
            if !ends.contains(&sp) {
                return fail(Bullet::Endpoints, k);
            }
            let w = field.other_end(e, sp);
            if vact.apply(y, x, w) != Some(sq) {
                return fail(Bullet::Endpoints, k);
            }
        }
        let es = section_stabilizer(eact, &a.section);
        let sq = section_stabilizer(vact, &nodes[a.to].section);
        let carried =
            es.pairs().into_iter().all(|(x, x2)| sq.related(a.phi.apply(x).unwrap(), a.phi.apply(x2).unwrap()));
        if !stab_inside(&es, a.from) || !carried {
            return fail(Bullet::Stabilizer, k);
        }
    }

    let mut count = vec![0usize; field.edges().len()];
    let sections = nodes.iter().filter_map(|n| n.edge.as_ref()).chain(d.extra.iter().map(|a| &a.section));
    for s in sections {
        if count.is_empty() {
            break;
        }
        for (e, hit) in eact.saturate(s.image()).into_iter().enumerate() {
            count[e] += hit as usize;
        }
    }
    if let Some(e) = count.iter().position(|&c| c != 1) {
        return fail(Bullet::EdgePartition, e);
    }
    Ok(())
}

/// The amalgam of two node relations over the intersection of the edge
/// relations along the path joining them, all restricted to the common carrier.
pub fn geodesic_amalgam(field: &GraphField, d: &Desingularization, p: usize, q: usize) -> Result<Verdict, DecompError> {
    if p == q {
        return Err(DecompError::EmptyGeodesic);
    }
    let forest = &d.forest;
    let common = forest.nodes[p].section.domain().intersection(&forest.nodes[q].section.domain());
    if common.is_empty() {
        return Err(DecompError::EmptyIntersection);
    }
    let (up, uq) = (forest.ancestry(p), forest.ancestry(q));
    let shared = up.iter().zip(&uq).take_while(|(a, b)| a == b).count();
    let path_nodes = up[shared..].iter().chain(&uq[shared..]);
    let mut core = EquivRelation::full(field.vertices().base()).restrict(&common)?;
    for &n in path_nodes {
        let er = forest.edge_relation(field, n)?.expect("non-root node");
        core = core.intersect(&er.restrict(&common)?)?;
    }
    let rp = forest.vertex_relation(field, p)?.restrict(&common)?;
    let rq = forest.vertex_relation(field, q)?.restrict(&common)?;
    let s = EquivRelation::join([&rp, &rq])?;
    verify_amalgam(&s, &rp, &rq, &core)
}

/// Vertex relations against the relation generated by the extra-edge conjugators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenerationSplit {
    /// Join of the node relations.
    pub vertex_join: EquivRelation,
    /// Generated by the graphs of the extra-edge conjugators.
    pub extra_relation: EquivRelation,
    /// Treeing of `extra_relation` read off the contracted represented tree.
    pub treeing: Graphing,
    pub trivial_intersections: bool,
    pub treeing_ok: bool,
    pub generates: bool,
}

impl GenerationSplit {
    pub fn all_passed(&self) -> bool {
        self.trivial_intersections && self.treeing_ok && self.generates
    }
}

pub fn generation_split(field: &GraphField, d: &Desingularization) -> Result<GenerationSplit, DecompError> {
    let (vact, _) = field.actions()?;
    let rel = vact.relation();
    let space = rel.space();
    let vertex_rels: Vec<EquivRelation> =
        (0..d.forest.nodes.len()).map(|i| d.forest.vertex_relation(field, i)).collect::<Result<_, _>>()?;
    let vertex_join = join_all(space, &vertex_rels);
    let extra_relation = EquivRelation::generated_by(
        &PointSet::full(space),
        d.extra.iter().flat_map(|a| a.phi.pairs()).flat_map(|(x, y)| [(x, y), (y, x)]),
    )?;
    let trivial_intersections =
        vertex_rels.iter().all(|r| r.pairs().into_iter().all(|(x, y)| x == y || !extra_relation.related(x, y)));

    let over: Vec<Vec<usize>> =
        space.points().map(|x| d.forest.over(x).into_iter().map(|(_, v)| v).collect()).collect();
    let mut pairs = Vec::new();
    for x in space.points() {
        for y in extra_relation.class_members(x).into_iter().filter(|&y| y != x) {
            let translate: Vec<usize> = over[y].iter().map(|&u| vact.apply(x, y, u).expect("related")).collect();
            if over[x].iter().any(|&u| translate.iter().any(|&v| field.edge_between(u, v).is_some())) {
                pairs.push((x, y));
            }
        }
    }
    let treeing = Graphing::from_pairs(space, pairs)?;
    let treeing_ok = treeing.is_treeing_of(&extra_relation);
    let join = EquivRelation::join([&vertex_join, &extra_relation])?;
    let generates = join.pairs() == rel.pairs();
    Ok(GenerationSplit { vertex_join, extra_relation, treeing, trivial_intersections, treeing_ok, generates })
}
