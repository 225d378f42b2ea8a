use fibered::{validate_action, Action, FiberError, FiberedSpace, PartialSection};
use petgraph::unionfind::UnionFind;
use space_core::{EquivRelation, Graphing, SpaceError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("malformed field: {0}")]
    Shape(String),
    #[error("edge {0} is a loop")]
    Loop(usize),
    #[error("endpoint maps are not equivariant at edge {edge} moved to {x}")]
    NotEquivariant { edge: usize, x: usize },
    #[error("the field carries no action")]
    MissingAction,
    #[error("fiber over {} is not a tree", .0.base)]
    NotTree(FiberWitness),
    #[error("section image is not a fundamental domain of the vertex orbits")]
    NotFundamentalDomain,
    #[error("section domain is not a complete domain")]
    NotCompleteDomain,
    #[error("the root section cannot be conjugated injectively at {0}")]
    RootNotInjective(usize),
}

/// Why one fiber fails to be a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberWitness {
    pub base: usize,
    pub kind: WitnessKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WitnessKind {
    /// Vertex ids `v0, v1, ..., v0` along a closed path.
    Cycle(Vec<usize>),
    /// Two vertices of the fiber with no path between them.
    Disconnected(usize, usize),
}

/// A field of graphs over the base.
///
/// Each geometric edge is stored once, oriented from `origin` to `terminus`;
/// the opposite edge is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphField {
    vertices: FiberedSpace,
    edges: FiberedSpace,
    origin: Vec<usize>,
    terminus: Vec<usize>,
    incident: Vec<Vec<usize>>,
    vertex_action: Option<Action>,
    edge_action: Option<Action>,
}

impl GraphField {
    pub fn new(
        vertices: FiberedSpace,
        edges: FiberedSpace,
        origin: Vec<usize>,
        terminus: Vec<usize>,
    ) -> Result<Self, FieldError> {
        let base = vertices.base();
        if edges.base() != base || origin.len() != edges.len() || terminus.len() != edges.len() {
            return Err(FieldError::Shape("endpoint maps do not match the edge space".into()));
        }
        let mut incident = vec![Vec::new(); vertices.len()];
        for e in edges.points() {
            let (o, t) = (origin[e], terminus[e]);
            if o >= vertices.len() || t >= vertices.len() {
                return Err(FieldError::Shape(format!("edge {e} has an endpoint out of range")));
            }
            if vertices.proj(o) != edges.proj(e) || vertices.proj(t) != edges.proj(e) {
                return Err(FieldError::Shape(format!("edge {e} leaves its fiber")));
            }
            if o == t {
                return Err(FieldError::Loop(e));
            }
            incident[o].push(e);
            incident[t].push(e);
        }
        Ok(GraphField { vertices, edges, origin, terminus, incident, vertex_action: None, edge_action: None })
    }

    /// Attaches actions and checks that both endpoint maps are equivariant.
    pub fn with_actions(mut self, vertex_action: Action, edge_action: Action) -> Result<Self, FieldError> {
        validate_action(&self.vertices, &vertex_action)?;
        if vertex_action.relation() != edge_action.relation() {
            return Err(FieldError::Shape("vertex and edge actions use different relations".into()));
        }
        if !self.edges.is_empty() {
            validate_action(&self.edges, &edge_action)?;
        }
        let r = vertex_action.relation();
        for e in self.edges.points() {
            let x = self.edges.proj(e);
            for y in r.class_members(x) {
                let moved = edge_action.apply(y, x, e).ok_or(FieldError::NotEquivariant { edge: e, x: y })?;
                let o_ok = vertex_action.apply(y, x, self.origin[e]) == Some(self.origin[moved]);
                let t_ok = vertex_action.apply(y, x, self.terminus[e]) == Some(self.terminus[moved]);
                if !o_ok || !t_ok {
                    return Err(FieldError::NotEquivariant { edge: e, x: y });
                }
            }
        }
        self.vertex_action = Some(vertex_action);
        self.edge_action = Some(edge_action);
        Ok(self)
    }

    /// The same field acted on by a sub-relation (defined on the whole base).
    pub fn restrict_action(&self, sub: &EquivRelation) -> Result<GraphField, FieldError> {
        let (va, ea) = self.actions()?;
        let mut out = self.clone();
        out.vertex_action = Some(va.restrict_to(sub)?);
        out.edge_action = Some(ea.restrict_to(sub)?);
        Ok(out)
    }

    /// The field over `points` only, relabelled `0..points.len()`, acted on by the
    /// restriction of the acting relation. Labels are kept as they are.
    pub fn restrict_base(&self, points: &[usize]) -> Result<RestrictedField, FieldError> {
        let (va, ea) = self.actions()?;
        let rel = va.relation();
        let small = space_core::FiniteSpace::new(points.len())?;
        let sub = rel.pull_back(points, small)?;
        let keep = |space: &FiberedSpace| -> Result<(FiberedSpace, Vec<usize>, Vec<usize>), FieldError> {
            let new = FiberedSpace::sparse(
                small,
                points
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &x)| space.fiber(x).iter().map(move |&t| (i, space.label(t).to_vec()))),
            )?;
            let old: Vec<usize> =
                new.points().map(|t| space.find(points[new.proj(t)], new.label(t)).unwrap()).collect();
            let mut to_new = vec![usize::MAX; space.len()];
            for (t, &o) in old.iter().enumerate() {
                to_new[o] = t;
            }
            Ok((new, old, to_new))
        };
        let (vertices, vold, vnew) = keep(&self.vertices)?;
        let (edges, eold, enew) = keep(&self.edges)?;
        let origin = eold.iter().map(|&e| vnew[self.origin[e]]).collect();
        let terminus = eold.iter().map(|&e| vnew[self.terminus[e]]).collect();
        let field = GraphField::new(vertices, edges, origin, terminus)?;
        let vact =
            Action::from_fn(field.vertices(), &sub, |i, j, t| vnew[va.apply(points[i], points[j], vold[t]).unwrap()])?;
        let eact =
            Action::from_fn(field.edges(), &sub, |i, j, t| enew[ea.apply(points[i], points[j], eold[t]).unwrap()])?;
        let field = field.with_actions(vact, eact)?;
        Ok(RestrictedField { field, vertex_origin: vold, edge_origin: eold, vertex_image: vnew, edge_image: enew })
    }

    pub fn vertices(&self) -> &FiberedSpace {
        &self.vertices
    }

    pub fn edges(&self) -> &FiberedSpace {
        &self.edges
    }

    pub fn origin(&self, e: usize) -> usize {
        self.origin[e]
    }

    pub fn terminus(&self, e: usize) -> usize {
        self.terminus[e]
    }

    /// The endpoint of `e` other than `v`.
    pub fn other_end(&self, e: usize, v: usize) -> usize {
        if self.origin[e] == v {
            self.terminus[e]
        } else {
            self.origin[e]
        }
    }

    pub fn incident(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    /// `(edge, neighbour)` pairs around `v`.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.incident[v].iter().map(move |&e| (e, self.other_end(e, v)))
    }

    pub fn edge_between(&self, u: usize, w: usize) -> Option<usize> {
        self.neighbors(u).find(|&(_, v)| v == w).map(|(e, _)| e)
    }

    pub fn edges_over(&self, x: usize) -> &[usize] {
        self.edges.fiber(x)
    }

    pub fn vertex_action(&self) -> Option<&Action> {
        self.vertex_action.as_ref()
    }

    pub fn edge_action(&self) -> Option<&Action> {
        self.edge_action.as_ref()
    }

    pub fn actions(&self) -> Result<(&Action, &Action), FieldError> {
        match (&self.vertex_action, &self.edge_action) {
            (Some(v), Some(e)) => Ok((v, e)),
            _ => Err(FieldError::MissingAction),
        }
    }

    /// The acting relation.
    pub fn relation(&self) -> Result<&EquivRelation, FieldError> {
        Ok(self.actions()?.0.relation())
    }

    /// Marks the edges in the orbits of `seeds`.
    pub fn saturate_edges(&self, seeds: impl IntoIterator<Item = usize>) -> Result<Vec<bool>, FieldError> {
        let (_, ea) = self.actions()?;
        if self.edges.is_empty() {
            return Ok(Vec::new());
        }
        Ok(ea.saturate(seeds))
    }

    pub fn saturate_vertices(&self, seeds: impl IntoIterator<Item = usize>) -> Result<Vec<bool>, FieldError> {
        Ok(self.actions()?.0.saturate(seeds))
    }

    /// Distances from `v` inside its fiber; `usize::MAX` when unreachable.
    pub fn distances_from(&self, v: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertices.len()];
        dist[v] = 0;
        let mut queue = std::collections::VecDeque::from([v]);
        while let Some(u) = queue.pop_front() {
            for (_, w) in self.neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Checks every fiber for connectivity and acyclicity.
    pub fn tree_witness(&self) -> Option<FiberWitness> {
        let mut uf = UnionFind::<usize>::new(self.vertices.len());
        for x in self.vertices.base().points() {
            let mut forest: Vec<usize> = Vec::new();
            for &e in self.edges_over(x) {
                if !uf.union(self.origin[e], self.terminus[e]) {
                    let cycle = self.path_in(&forest, self.terminus[e], self.origin[e]);
                    let mut closed = vec![self.origin[e]];
                    closed.extend(cycle);
                    return Some(FiberWitness { base: x, kind: WitnessKind::Cycle(closed) });
                }
                forest.push(e);
            }
            let fiber = self.vertices.fiber(x);
            let root = uf.find(fiber[0]);
            if let Some(&v) = fiber.iter().find(|&&v| uf.find(v) != root) {
                return Some(FiberWitness { base: x, kind: WitnessKind::Disconnected(fiber[0], v) });
            }
        }
        None
    }

    /// Path from `from` to `to` using only `allowed` edges.
    fn path_in(&self, allowed: &[usize], from: usize, to: usize) -> Vec<usize> {
        let mut prev = std::collections::HashMap::from([(from, from)]);
        let mut queue = std::collections::VecDeque::from([from]);
        while let Some(u) = queue.pop_front() {
            if u == to {
                break;
            }
            for &e in &self.incident[u] {
                if allowed.contains(&e) {
                    let w = self.other_end(e, u);
                    if let std::collections::hash_map::Entry::Vacant(slot) = prev.entry(w) {
                        slot.insert(u);
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut path = vec![to];
        let mut v = to;
        while v != from {
            v = prev[&v];
            path.push(v);
        }
        path.reverse();
        path
    }

    /// Section helper: the vertex section `x -> origin(s(x))`.
    pub fn origin_section(&self, s: &PartialSection) -> Result<PartialSection, FieldError> {
        Ok(PartialSection::new(&self.vertices, s.pairs().into_iter().map(|(x, e)| (x, self.origin[e])))?)
    }

    pub fn terminus_section(&self, s: &PartialSection) -> Result<PartialSection, FieldError> {
        Ok(PartialSection::new(&self.vertices, s.pairs().into_iter().map(|(x, e)| (x, self.terminus[e])))?)
    }
}

/// A field restricted to part of its base, with the id maps both ways.
#[derive(Clone, Debug)]
pub struct RestrictedField {
    pub field: GraphField,
    /// New vertex id to old vertex id.
    pub vertex_origin: Vec<usize>,
    pub edge_origin: Vec<usize>,
    /// Old vertex id to new vertex id, `usize::MAX` off the kept base.
    pub vertex_image: Vec<usize>,
    pub edge_image: Vec<usize>,
}

/// `Ok` iff every fiber is a tree.
pub fn is_treefield(field: &GraphField) -> Result<(), FiberWitness> {
    match field.tree_witness() {
        None => Ok(()),
        Some(w) => Err(w),
    }
}

/// The canonical field of a graphing: vertices `(x, y)` with `x ~ y`, and over `x`
/// an edge `(y, z)` for each graphing edge `y < z` in the class of `x`.
///
/// Returns the generated relation, the field with its horizontal action, and the
/// diagonal vertex section.
pub fn from_graphing(phi: &Graphing) -> Result<(EquivRelation, GraphField, PartialSection), FieldError> {
    let r = phi.generated_relation();
    let (vertices, vact, diagonal) = fibered::canonical_left(&r)?;
    let base = r.space();
    let edge_points: Vec<(usize, Vec<usize>)> = base
        .points()
        .flat_map(|x| {
            let r = &r;
            phi.unordered_edges().into_iter().filter(move |&(y, _)| r.related(x, y)).map(move |(y, z)| (x, vec![y, z]))
        })
        .collect();
    let edges = FiberedSpace::sparse(base, edge_points)?;
    let (origin, terminus) = edges
        .points()
        .map(|t| {
            let (x, l) = (edges.proj(t), edges.label(t));
            (vertices.find(x, &[l[0]]).unwrap(), vertices.find(x, &[l[1]]).unwrap())
        })
        .unzip();
    let field = GraphField::new(vertices, edges, origin, terminus)?;
    let eact = horizontal_action(field.edges(), &r)?;
    let field = field.with_actions(vact, eact)?;
    Ok((r, field, diagonal))
}

/// The action `(x', x) · (x, label) = (x', label)`.
pub(crate) fn horizontal_action(space: &FiberedSpace, r: &EquivRelation) -> Result<Action, FieldError> {
    Ok(Action::from_fn(space, r, |x, _, t| {
        space.find(x, space.label(t)).expect("label present in every fiber of the class")
    })?)
}

#[cfg(test)]
mod tests {
    use space_core::FiniteSpace;

    use super::*;

    fn x4() -> FiniteSpace {
        FiniteSpace::new(4).unwrap()
    }

    #[test]
    fn path_graphing_gives_tree_fibers() {
        let phi = Graphing::from_edges(x4(), [(0, 1), (1, 2)]).unwrap();
        let (r, field, _) = from_graphing(&phi).unwrap();
        assert_eq!(r.classes(), vec![vec![0, 1, 2], vec![3]]);
        assert_eq!(field.vertices().fiber(0).len(), 3);
        assert_eq!(field.edges_over(0).len(), 2);
        assert!(is_treefield(&field).is_ok());
    }

    #[test]
    fn empty_graphing_gives_singleton_fibers() {
        let (r, field, _) = from_graphing(&Graphing::empty(x4())).unwrap();
        assert!(r.is_trivial());
        assert!(field.edges().is_empty());
        assert!(is_treefield(&field).is_ok());
    }

    #[test]
    fn triangle_fibers_have_cycles() {
        let phi = Graphing::from_edges(x4(), [(0, 1), (1, 2), (2, 0)]).unwrap();
        let (_, field, _) = from_graphing(&phi).unwrap();
        let w = is_treefield(&field).unwrap_err();
        assert_eq!(w.base, 0);
        match w.kind {
            WitnessKind::Cycle(c) => {
                assert_eq!(c.len(), 4);
                assert_eq!(c.first(), c.last());
            }
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn missing_edge_is_a_disconnection() {
        let r = EquivRelation::from_classes(x4(), [vec![0, 1], vec![2], vec![3]]).unwrap();
        let (vertices, _, _) = fibered::canonical_left(&r).unwrap();
        let edges = FiberedSpace::sparse(x4(), []).unwrap();
        let field = GraphField::new(vertices, edges, vec![], vec![]).unwrap();
        let w = is_treefield(&field).unwrap_err();
        assert_eq!(w.base, 0);
        assert!(matches!(w.kind, WitnessKind::Disconnected(_, _)));
    }
}
