use fibered::{FiberedSpace, PartialSection};
use space_core::EquivRelation;

use crate::field::{horizontal_action, FieldError, GraphField};

/// A tree field whose vertices carry one of two colors, with a distinguished
/// edge section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColoredTreeField {
    pub field: GraphField,
    /// Color (1 or 2) of each vertex.
    pub color: Vec<u8>,
    pub edge_section: PartialSection,
}

impl ColoredTreeField {
    /// The vertex `(x, color, rep)`.
    pub fn vertex(&self, x: usize, color: u8, rep: usize) -> Option<usize> {
        self.field.vertices().find(x, &[color as usize, rep])
    }

    /// The field over `points` only, relabelled `0..points.len()`.
    pub fn restrict_base(&self, points: &[usize]) -> Result<ColoredTreeField, FieldError> {
        let r = self.field.restrict_base(points)?;
        let color = r.vertex_origin.iter().map(|&v| self.color[v]).collect();
        let edge_section = PartialSection::new(
            r.field.edges(),
            points.iter().enumerate().filter_map(|(i, &x)| self.edge_section.get(x).map(|e| (i, r.edge_image[e]))),
        )?;
        Ok(ColoredTreeField { field: r.field, color, edge_section })
    }

    /// The class representative a vertex stands for.
    pub fn rep(&self, v: usize) -> usize {
        self.field.vertices().label(v)[1]
    }
}

/// The field of a free product `r = r1 * r2`: over `x`, vertices are the
/// `r1`- and `r2`-classes inside `[x]_r`, edges are the points of `[x]_r`, and
/// the edge `z` joins the `r1`-class of `z` to its `r2`-class.
pub fn bass_serre_free(
    r: &EquivRelation,
    r1: &EquivRelation,
    r2: &EquivRelation,
) -> Result<ColoredTreeField, FieldError> {
    build(r, r1, r2, None)
}

/// Same shape as [`bass_serre_free`] with edges the `core`-classes inside `[x]_r`.
/// With a trivial core both constructions agree.
pub fn bass_serre_amalgam(
    r: &EquivRelation,
    r1: &EquivRelation,
    r2: &EquivRelation,
    core: &EquivRelation,
) -> Result<ColoredTreeField, FieldError> {
    build(r, r1, r2, Some(core))
}

fn build(
    r: &EquivRelation,
    r1: &EquivRelation,
    r2: &EquivRelation,
    core: Option<&EquivRelation>,
) -> Result<ColoredTreeField, FieldError> {
    let base = r.space();
    for s in [r1, r2].into_iter().chain(core) {
        base.check_same(&s.space())?;
    }
    let (q1, _, _) = fibered::quotient(r, r1)?;
    let (q2, _, _) = fibered::quotient(r, r2)?;
    let (edges, _, diagonal) = match core {
        None => fibered::canonical_left(r)?,
        Some(c) => fibered::quotient(r, c)?,
    };
    let labelled =
        |q: &FiberedSpace, c: usize| q.points().map(move |t| (q.proj(t), vec![c, q.label(t)[0]])).collect::<Vec<_>>();
    let vertices = FiberedSpace::new(base, labelled(&q1, 1).into_iter().chain(labelled(&q2, 2)))?;
    let least = |s: &EquivRelation, z: usize| s.class_id(z).expect("relation covers the space");
    let (origin, terminus) = edges
        .points()
        .map(|e| {
            let (x, z) = (edges.proj(e), edges.label(e)[0]);
            let o = vertices.find(x, &[1, least(r1, z)]).expect("class of an edge point");
            let t = vertices.find(x, &[2, least(r2, z)]).expect("class of an edge point");
            (o, t)
        })
        .unzip();
    let color = vertices.points().map(|v| vertices.label(v)[0] as u8).collect();
    let field = GraphField::new(vertices, edges, origin, terminus)?;
    let vact = horizontal_action(field.vertices(), r)?;
    let eact = horizontal_action(field.edges(), r)?;
    let field = field.with_actions(vact, eact)?;
    Ok(ColoredTreeField { field, color, edge_section: diagonal })
}
