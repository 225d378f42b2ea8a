use std::collections::BTreeMap;

use fibered::{section_stabilizer, PartialSection};
use space_core::{EquivRelation, PointSet};

use crate::field::{FieldError, GraphField};

/// How the growth starts.
#[derive(Clone, Debug)]
pub enum Start {
    /// The least vertex of every fiber.
    LeastVertex,
    /// A given vertex section.
    Vertex(PartialSection),
    /// A given edge section: its origins form the root and its termini the second node.
    Edge(PartialSection),
}

/// Which points a new node keeps.
pub enum Policy<'a> {
    /// Every node, the root included, keeps one point per stabilizer class, and
    /// growth stays over the root's domain.
    QuasiFree,
    /// Nodes keep every point.
    Generic,
    /// Nodes first keep one point per class of the stabilizer of the joining edge,
    /// then each point takes a distinct target among `targets(vertex, edge)`:
    /// the preferred one if free, else the least free candidate; points with no
    /// free candidate are dropped.
    Conjugated(&'a dyn Fn(usize, usize) -> (usize, Vec<usize>)),
}

/// One node of the representatives forest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForestNode {
    pub parent: Option<usize>,
    pub stage: usize,
    pub color: u8,
    /// Vertex section; its domain is the node's carrier.
    pub section: PartialSection,
    /// Edge joining the parent's vertex to this node's vertex, fiberwise.
    pub edge: Option<PartialSection>,
    /// `(point, target)` pairs under [`Policy::Conjugated`].
    pub conjugator: Vec<(usize, usize)>,
}

/// Output of the staged construction. Node 0 is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagedForest {
    pub nodes: Vec<ForestNode>,
    /// Points over which growth took place.
    pub domain: PointSet,
}

impl StagedForest {
    /// `(node, vertex)` pairs represented over `x`, in node order.
    pub fn over(&self, x: usize) -> Vec<(usize, usize)> {
        self.nodes.iter().enumerate().filter_map(|(i, n)| n.section.get(x).map(|v| (i, v))).collect()
    }

    /// Mask of all represented vertices.
    pub fn vertex_mask(&self, field: &GraphField) -> Vec<bool> {
        let mut mask = vec![false; field.vertices().len()];
        for n in &self.nodes {
            for v in n.section.image() {
                mask[v] = true;
            }
        }
        mask
    }

    pub fn vertex_relation(&self, field: &GraphField, node: usize) -> Result<EquivRelation, FieldError> {
        Ok(section_stabilizer(field.actions()?.0, &self.nodes[node].section))
    }

    /// Stabilizer of the joining edge; `None` at the root.
    pub fn edge_relation(&self, field: &GraphField, node: usize) -> Result<Option<EquivRelation>, FieldError> {
        let (_, ea) = field.actions()?;
        Ok(self.nodes[node].edge.as_ref().map(|e| section_stabilizer(ea, e)))
    }

    /// Nodes from the root down to `node`.
    pub fn ancestry(&self, node: usize) -> Vec<usize> {
        let mut path = vec![node];
        let mut n = node;
        while let Some(p) = self.nodes[n].parent {
            path.push(p);
            n = p;
        }
        path.reverse();
        path
    }
}

struct Candidate {
    vertex: usize,
    parent: usize,
    edge: usize,
}

/// Grows a forest of partial vertex sections whose saturations partition the
/// vertex space. At each stage every eligible point picks its least vertex that
/// is adjacent to the points already represented over it and lies outside the
/// saturation of everything chosen so far; picks are grouped by parent node and
/// color, and groups become new nodes in `(parent, color)` order.
pub fn grow_forest(
    field: &GraphField,
    start: Start,
    policy: Policy<'_>,
    colors: Option<&[u8]>,
) -> Result<StagedForest, FieldError> {
    if let Some(w) = field.tree_witness() {
        return Err(FieldError::NotTree(w));
    }
    let vact = field.actions()?.0;
    let rel = vact.relation();
    let base = rel.space();
    let color_of = |v: usize| colors.map_or(0, |c| c[v]);
    let vspace = field.vertices();

    let mut nodes: Vec<ForestNode> = Vec::new();
    let (root_pairs, second): (Vec<(usize, usize)>, Option<PartialSection>) = match &start {
        Start::LeastVertex => (base.points().map(|x| (x, vspace.fiber(x)[0])).collect(), None),
        Start::Vertex(s) => (s.pairs(), None),
        Start::Edge(d) => (d.pairs().into_iter().map(|(x, e)| (x, field.origin(e))).collect(), Some(d.clone())),
    };
    let root_pairs = match &policy {
        Policy::QuasiFree => least_per_class(rel, &root_pairs, |x, y, v| vact.apply(x, y, v)),
        _ => root_pairs,
    };
    let mut conjugator = Vec::new();
    if let Policy::Conjugated(targets) = &policy {
        let d = second.as_ref().ok_or_else(|| FieldError::Shape("conjugated growth needs an edge start".into()))?;
        let (kept, conj) = assign_targets(&root_pairs, |x, v| targets(v, d.get(x).unwrap()));
        if let Some(&(x, _)) = root_pairs.iter().find(|p| !kept.contains(p)) {
            return Err(FieldError::RootNotInjective(x));
        }
        conjugator = conj;
    }
    let root_color = root_pairs.first().map_or(0, |&(_, v)| color_of(v));
    nodes.push(ForestNode {
        parent: None,
        stage: 0,
        color: root_color,
        section: PartialSection::new(vspace, root_pairs.iter().copied())?,
        edge: None,
        conjugator,
    });
    let domain = nodes[0].section.domain();
    if domain.is_empty() {
        return Err(FieldError::Shape("empty root section".into()));
    }

    if let Some(d) = &second {
        let edges: Vec<(usize, usize)> = d.pairs().into_iter().filter(|&(x, _)| domain.contains(x)).collect();
        let pairs: Vec<(usize, usize, usize)> = edges.iter().map(|&(x, e)| (x, field.terminus(e), e)).collect();
        let node = make_node(field, &policy, 0, 1, pairs, color_of)?;
        if let Some(node) = node {
            nodes.push(node);
        }
    }

    let mut covered = vact.saturate(nodes.iter().flat_map(|n| n.section.image()));
    let mut stage = 1;
    loop {
        stage += 1;
        let mut picks: BTreeMap<usize, Candidate> = BTreeMap::new();
        for x in domain.iter() {
            let mut best: Option<Candidate> = None;
            for (i, n) in nodes.iter().enumerate() {
                let Some(u) = n.section.get(x) else { continue };
                for (e, w) in field.neighbors(u) {
                    if !covered[w] && best.as_ref().is_none_or(|b| w < b.vertex) {
                        best = Some(Candidate { vertex: w, parent: i, edge: e });
                    }
                }
            }
            if let Some(b) = best {
                picks.insert(x, b);
            }
        }
        if picks.is_empty() {
            break;
        }
        // Keep a pick only if it sits in the same group as the least point of
        // its stabilizer class, so distinct groups cover distinct orbits.
        let group = |c: &Candidate| (c.parent, color_of(c.vertex));
        let mut groups: BTreeMap<(usize, u8), Vec<Triple>> = BTreeMap::new();
        for (&x, c) in &picks {
            let least = picks
                .iter()
                .find(|(&y, d)| rel.related(x, y) && vact.apply(x, y, d.vertex) == Some(c.vertex))
                .map(|(_, d)| d)
                .expect("x is related to itself");
            if group(least) == group(c) {
                groups.entry(group(c)).or_default().push((x, c.vertex, c.edge));
            }
        }
        for ((parent, _), pairs) in groups {
            if let Some(node) = make_node(field, &policy, parent, stage, pairs, color_of)? {
                let fresh = vact.saturate(node.section.image());
                for (c, f) in covered.iter_mut().zip(fresh) {
                    *c |= f;
                }
                nodes.push(node);
            }
        }
    }
    if covered.iter().any(|c| !c) {
        return Err(FieldError::Shape("growth left vertex orbits uncovered".into()));
    }
    Ok(StagedForest { nodes, domain })
}

fn make_node(
    field: &GraphField,
    policy: &Policy<'_>,
    parent: usize,
    stage: usize,
    pairs: Vec<(usize, usize, usize)>,
    color_of: impl Fn(usize) -> u8,
) -> Result<Option<ForestNode>, FieldError> {
    let (vact, eact) = field.actions()?;
    let rel = vact.relation();
    let (pairs, conjugator) = match policy {
        Policy::Generic => (pairs, Vec::new()),
        Policy::QuasiFree => {
            let vp: Vec<(usize, usize)> = pairs.iter().map(|&(x, v, _)| (x, v)).collect();
            let kept = least_per_class(rel, &vp, |x, y, v| vact.apply(x, y, v));
            (pairs.into_iter().filter(|&(x, v, _)| kept.contains(&(x, v))).collect(), Vec::new())
        }
        Policy::Conjugated(targets) => {
            let ep: Vec<(usize, usize)> = pairs.iter().map(|&(x, _, e)| (x, e)).collect();
            let kept_edges = least_per_class(rel, &ep, |x, y, e| eact.apply(x, y, e));
            let pairs: Vec<_> = pairs.into_iter().filter(|&(x, _, e)| kept_edges.contains(&(x, e))).collect();
            let vp: Vec<(usize, usize)> = pairs.iter().map(|&(x, v, _)| (x, v)).collect();
            let edge_at = |x: usize| pairs.iter().find(|p| p.0 == x).unwrap().2;
            let (kept, conj) = assign_targets(&vp, |x, v| targets(v, edge_at(x)));
            (pairs.iter().copied().filter(|&(x, v, _)| kept.contains(&(x, v))).collect(), conj)
        }
    };
    if pairs.is_empty() {
        return Ok(None);
    }
    let color = color_of(pairs[0].1);
    Ok(Some(ForestNode {
        parent: Some(parent),
        stage,
        color,
        section: PartialSection::new(field.vertices(), pairs.iter().map(|&(x, v, _)| (x, v)))?,
        edge: Some(PartialSection::new(field.edges(), pairs.iter().map(|&(x, _, e)| (x, e)))?),
        conjugator,
    }))
}

/// Keeps `(x, t)` unless an earlier kept point `y` has `(x, y) · t_y = t_x`.
fn least_per_class(
    rel: &EquivRelation,
    pairs: &[(usize, usize)],
    act: impl Fn(usize, usize, usize) -> Option<usize>,
) -> Vec<(usize, usize)> {
    let mut kept: Vec<(usize, usize)> = Vec::new();
    for &(x, t) in pairs {
        if !kept.iter().any(|&(y, u)| rel.related(x, y) && act(x, y, u) == Some(t)) {
            kept.push((x, t));
        }
    }
    kept
}

type Pairs = Vec<(usize, usize)>;
type Triple = (usize, usize, usize);

/// Greedy injective choice of targets in point order.
fn assign_targets(pairs: &[(usize, usize)], targets: impl Fn(usize, usize) -> (usize, Vec<usize>)) -> (Pairs, Pairs) {
    let mut used = std::collections::BTreeSet::new();
    let mut kept = Vec::new();
    let mut conj = Vec::new();
    for &(x, v) in pairs {
        let (preferred, candidates) = targets(x, v);
        let pick = if !used.contains(&preferred) {
            Some(preferred)
        } else {
            candidates.into_iter().find(|c| !used.contains(c))
        };
        if let Some(z) = pick {
            used.insert(z);
            kept.push((x, v));
            conj.push((x, z));
        }
    }
    (kept, conj)
}
