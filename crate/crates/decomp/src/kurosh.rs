use space_core::{EquivRelation, FiniteSpace, Graphing, PartialIso, PointSet};
use treefield::{bass_serre_free, Policy, Start};

use crate::desing::{desingularize_with, generation_split};
use crate::product::{join_all, verify_free_product, Verdict};
use crate::DecompError;

/// A piece of a subrelation conjugate into one of the free factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factor {
    /// Which free factor the piece is conjugate into.
    pub index: usize,
    /// From the piece's carrier into the domain of factor `index`.
    pub conjugator: PartialIso,
    /// Lives on the source of `conjugator`.
    pub relation: EquivRelation,
}

impl Factor {
    pub fn domain(&self) -> PointSet {
        self.conjugator.source()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KuroshDecomposition {
    pub factors: Vec<Factor>,
    /// Free part: a treeing of the relation it generates.
    pub treeing: Graphing,
    /// Per free factor, the piece carried by the identity on the whole carrier.
    pub identity_factors: Vec<Option<usize>>,
}

pub type RestrictionDecomposition = KuroshDecomposition;

impl KuroshDecomposition {
    pub fn treeing_relation(&self) -> EquivRelation {
        self.treeing.generated_relation()
    }

    /// Factor relations followed by the relation generated by the treeing.
    pub fn pieces(&self, carrier: &PointSet) -> Result<Vec<EquivRelation>, DecompError> {
        let mut out: Vec<EquivRelation> = self.factors.iter().map(|f| f.relation.clone()).collect();
        out.push(self.treeing_relation().restrict(carrier)?);
        Ok(out)
    }
}

/// Decomposes `s ⊆ r = *_i factors[i]` into conjugates of the factors and a treeing.
pub fn kurosh(
    r: &EquivRelation,
    factors: &[EquivRelation],
    s: &EquivRelation,
) -> Result<KuroshDecomposition, DecompError> {
    if factors.is_empty() {
        return Err(DecompError::HypothesisViolation { hypothesis: "at least one factor", witness: 0 });
    }
    if let Verdict::Reject(t) = verify_free_product(r, factors)? {
        return Err(DecompError::NotFreeProduct(t));
    }
    if !s.is_subrelation(r)? {
        return Err(DecompError::NotSubrelation);
    }
    let space = r.space();
    let r = r.extend_trivially();
    let s = s.extend_trivially();
    let ext: Vec<EquivRelation> = factors.iter().map(|f| f.extend_trivially()).collect();
    let base: Vec<usize> = space.points().collect();
    let (pieces, tree) = decompose(&r, &ext, &base, &s)?;
    let carrier = PointSet::full(space);
    let out = finish(space, pieces, tree, factors.len(), false, |i| ext[i].domain().intersection(&carrier))?;
    audit(&s, &ext, &out, &carrier)?;
    if let Some(i) = out.identity_factors.iter().position(|f| f.is_none()) {
        return Err(DecompError::Internal(format!("no identity piece for factor {i}")));
    }
    Ok(out)
}

/// Decomposes `r` restricted to `y`, where the factors may live on parts of the
/// space as long as their domains cover it. Trivial pieces are kept so that the
/// saturations of the conjugator targets split every factor domain met by `y`.
pub fn restrict_decomposition(
    r: &EquivRelation,
    factors: &[EquivRelation],
    y: &PointSet,
) -> Result<RestrictionDecomposition, DecompError> {
    if factors.is_empty() {
        return Err(DecompError::HypothesisViolation { hypothesis: "at least one factor", witness: 0 });
    }
    let space = r.space();
    for x in r.domain().iter() {
        if !factors.iter().any(|f| f.in_domain(x)) {
            return Err(DecompError::CoverageViolation(x));
        }
    }
    if let Verdict::Reject(t) = verify_free_product(r, factors)? {
        return Err(DecompError::NotFreeProduct(t));
    }
    let r = r.extend_trivially();
    let acting = r.restrict(y)?;
    let base = y.to_vec();
    if base.is_empty() {
        return Ok(KuroshDecomposition {
            factors: Vec::new(),
            treeing: Graphing::empty(space),
            identity_factors: vec![None; factors.len()],
        });
    }
    let ext: Vec<EquivRelation> = factors.iter().map(|f| f.extend_trivially()).collect();
    let small = acting.pull_back(&base, FiniteSpace::new(base.len())?)?;
    let (pieces, tree) = decompose(&r, &ext, &base, &small)?;
    // targets outside a factor's own domain only carry singleton classes
    let pieces = pieces
        .into_iter()
        .filter_map(|f| {
            let dom = factors[f.index].domain();
            let kept: Vec<(usize, usize)> =
                f.conjugator.pairs().into_iter().filter(|&(_, t)| dom.contains(t)).collect();
            let conjugator = PartialIso::from_pairs(space, kept).ok()?;
            let relation = f.relation.restrict(&conjugator.source()).ok()?;
            (!conjugator.is_empty()).then_some(Factor { index: f.index, conjugator, relation })
        })
        .collect::<Vec<_>>();
    let out = finish(space, pieces, tree, factors.len(), true, |i| factors[i].domain().intersection(y))?;
    saturation_audit(&r, factors, &out.factors, y)?;
    audit(&acting, factors, &out, y)?;
    Ok(out)
}

/// Locates the identity pieces and, unless `keep_trivial`, drops trivial pieces
/// not carried by the identity.
fn finish(
    space: FiniteSpace,
    pieces: Vec<Factor>,
    tree: Vec<(usize, usize)>,
    m: usize,
    keep_trivial: bool,
    identity_carrier: impl Fn(usize) -> PointSet,
) -> Result<KuroshDecomposition, DecompError> {
    let is_identity = |f: &Factor| f.conjugator.is_identity() && f.domain() == identity_carrier(f.index);
    let factors: Vec<Factor> =
        pieces.into_iter().filter(|f| keep_trivial || is_identity(f) || !f.relation.is_trivial()).collect();
    let identity_factors = (0..m).map(|i| factors.iter().position(|f| f.index == i && is_identity(f))).collect();
    Ok(KuroshDecomposition { factors, treeing: Graphing::from_pairs(space, tree)?, identity_factors })
}

/// Re-checks the output: conjugation formula per piece, freeness, generation.
fn audit(
    acting: &EquivRelation,
    factors: &[EquivRelation],
    out: &KuroshDecomposition,
    carrier: &PointSet,
) -> Result<(), DecompError> {
    for (k, f) in out.factors.iter().enumerate() {
        let conj = factors[f.index].restrict(&f.conjugator.target())?.conjugate(&f.conjugator)?;
        let expected = conj.intersect(&acting.restrict(&f.domain())?)?;
        if expected != f.relation {
            return Err(DecompError::Internal(format!("piece {k} is not the conjugated intersection")));
        }
    }
    if !out.treeing.is_treeing_of(&out.treeing_relation()) {
        return Err(DecompError::Internal("free part has a cycle".into()));
    }
    match verify_free_product(acting, &out.pieces(carrier)?) {
        Ok(Verdict::Accept(_)) => Ok(()),
        Ok(Verdict::Reject(t)) => Err(DecompError::Internal(format!("pieces are not free: {t:?}"))),
        Err(e) => Err(DecompError::Internal(format!("pieces do not generate: {e}"))),
    }
}

/// Per factor, the saturations of the conjugator targets split the part of its
/// domain reachable from `y`.
fn saturation_audit(
    r: &EquivRelation,
    factors: &[EquivRelation],
    pieces: &[Factor],
    y: &PointSet,
) -> Result<(), DecompError> {
    let reach = r.saturate(y)?;
    for (i, fi) in factors.iter().enumerate() {
        let mut seen = PointSet::empty(r.space());
        for f in pieces.iter().filter(|f| f.index == i) {
            let sat = fi.saturate(&f.conjugator.target())?;
            if !sat.intersection(&seen).is_empty() {
                return Err(DecompError::Internal(format!("saturations overlap for factor {i}")));
            }
            seen = seen.union(&sat);
        }
        if seen != fi.domain().intersection(&reach) {
            return Err(DecompError::Internal(format!("saturations miss part of factor {i}")));
        }
    }
    Ok(())
}

/// Splits off the first factor against the join of the others, then recurses into
/// every piece conjugate into that join through its conjugator.
/// `base` lists the carrier in increasing order; `acting` lives on `0..base.len()`.
fn decompose(
    r: &EquivRelation,
    factors: &[EquivRelation],
    base: &[usize],
    acting: &EquivRelation,
) -> Result<(Vec<Factor>, Pairs), DecompError> {
    let space = r.space();
    let carrier = PointSet::from_points(space, base.iter().copied())?;
    if factors.len() == 1 {
        let relation = acting.push_forward(base, space)?;
        return Ok((vec![Factor { index: 0, conjugator: PartialIso::identity(&carrier), relation }], Vec::new()));
    }
    let rest = join_all(space, &factors[1..]);
    let (raw, mut tree) = two_factor(r, &factors[0], &rest, base, acting)?;
    let mut out = Vec::new();
    for (color, f) in raw {
        if color == 1 || factors.len() == 2 {
            out.push(Factor { index: color as usize - 1, ..f });
            continue;
        }
        let psi = &f.conjugator;
        let b = psi.target().to_vec();
        let moved = f.relation.conjugate(&psi.invert())?;
        let small = moved.pull_back(&b, FiniteSpace::new(b.len())?)?;
        let (inner, inner_tree) = decompose(&rest, &factors[1..], &b, &small)?;
        for g in inner {
            let back = psi.invert().restrict_source(&g.domain()).invert();
            out.push(Factor {
                index: g.index + 1,
                conjugator: g.conjugator.compose(&back)?,
                relation: g.relation.conjugate(&back)?,
            });
        }
        let pull = |p: usize| psi.apply_inverse(p).expect("treeing inside the target");
        tree.extend(inner_tree.into_iter().map(|(p, q)| (pull(p), pull(q))));
    }
    Ok((out, tree))
}

type Pairs = Vec<(usize, usize)>;
type RawPiece = (u8, Factor);

/// Desingularizes the free-product tree of `r = r1 * r2` under `acting`, read on
/// the carrier `base`. Pieces come with their color.
fn two_factor(
    r: &EquivRelation,
    r1: &EquivRelation,
    r2: &EquivRelation,
    base: &[usize],
    acting: &EquivRelation,
) -> Result<(Vec<RawPiece>, Pairs), DecompError> {
    let space = r.space();
    let full = bass_serre_free(r, r1, r2)?;
    let colored = if base.len() == space.size() { full } else { full.restrict_base(base)? };
    let field = colored.field.restrict_action(acting)?;
    let targets = |v: usize, e: usize| {
        let label = field.vertices().label(v);
        let rel = if label[0] == 1 { r1 } else { r2 };
        (field.edges().label(e)[0], rel.class_members(label[1]))
    };
    let d = desingularize_with(
        &field,
        Start::Edge(colored.edge_section.clone()),
        Policy::Conjugated(&targets),
        Some(&colored.color),
    )?;
    let split = generation_split(&field, &d)?;
    if !split.all_passed() {
        return Err(DecompError::Internal("desingularized tree does not split the action".into()));
    }
    let mut raw = Vec::new();
    for (i, node) in d.forest.nodes.iter().enumerate() {
        let relation = d.forest.vertex_relation(&field, i)?.push_forward(base, space)?;
        let conjugator = PartialIso::from_pairs(space, node.conjugator.iter().map(|&(x, z)| (base[x], z)))?;
        raw.push((node.color, Factor { index: node.color as usize - 1, conjugator, relation }));
    }
    let tree = split.treeing.pairs().map(|(p, q)| (base[p], base[q])).collect();
    Ok((raw, tree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(classes: &[&[usize]]) -> EquivRelation {
        EquivRelation::from_classes(FiniteSpace::new(4).unwrap(), classes.iter().map(|c| c.to_vec())).unwrap()
    }

    fn free() -> (EquivRelation, Vec<EquivRelation>) {
        (rel(&[&[0, 1, 2], &[3]]), vec![rel(&[&[0, 1], &[2], &[3]]), rel(&[&[0], &[1, 2], &[3]])])
    }

    #[test]
    fn whole_relation_returns_the_factors() {
        let (r, fs) = free();
        let k = kurosh(&r, &fs, &r).unwrap();
        assert!(k.treeing.is_empty());
        assert_eq!(k.identity_factors, vec![Some(0), Some(1)]);
        assert_eq!(k.factors.len(), 2);
        assert_eq!(k.factors[0].relation, fs[0]);
        assert_eq!(k.factors[1].relation, fs[1]);
    }

    #[test]
    fn cross_pair_is_free() {
        let (r, fs) = free();
        let s = rel(&[&[0, 2], &[1], &[3]]);
        let k = kurosh(&r, &fs, &s).unwrap();
        assert_eq!(k.treeing.unordered_edges(), vec![(0, 2)]);
        assert_eq!(k.factors.len(), 2);
        assert!(k.factors.iter().all(|f| f.relation.is_trivial() && f.conjugator.is_identity()));
    }

    #[test]
    fn trivial_subrelation_has_trivial_pieces() {
        let (r, fs) = free();
        let k = kurosh(&r, &fs, &EquivRelation::trivial(r.space())).unwrap();
        assert!(k.treeing.is_empty());
        assert!(k.factors.iter().all(|f| f.relation.is_trivial()));
    }

    #[test]
    fn three_factors_on_a_path() {
        let space = FiniteSpace::new(4).unwrap();
        let r = EquivRelation::full(space);
        let fs = vec![rel(&[&[0, 1], &[2], &[3]]), rel(&[&[0], &[1, 2], &[3]]), rel(&[&[0], &[1], &[2, 3]])];
        let k = kurosh(&r, &fs, &r).unwrap();
        assert_eq!(k.identity_factors.iter().filter(|f| f.is_some()).count(), 3);
        let s = rel(&[&[0, 3], &[1], &[2]]);
        let k = kurosh(&r, &fs, &s).unwrap();
        assert_eq!(k.treeing.unordered_edges(), vec![(0, 3)]);
    }

    #[test]
    fn rejects_bad_input() {
        let r = rel(&[&[0, 1, 2, 3]]);
        let fs = vec![rel(&[&[0, 1], &[2, 3]]), rel(&[&[1, 2], &[0, 3]])];
        assert!(matches!(kurosh(&r, &fs, &r), Err(DecompError::NotFreeProduct(_))));
        let (r, fs) = free();
        let big = rel(&[&[0, 1, 2, 3]]);
        assert_eq!(kurosh(&r, &fs, &big), Err(DecompError::NotSubrelation));
    }

    #[test]
    fn restriction_to_an_end_point() {
        let (r, fs) = free();
        let y = PointSet::from_points(r.space(), [0, 2]).unwrap();
        let d = restrict_decomposition(&r, &fs, &y).unwrap();
        assert_eq!(d.treeing.unordered_edges(), vec![(0, 2)]);
        let full = PointSet::full(r.space());
        let d = restrict_decomposition(&r, &fs, &full).unwrap();
        assert!(d.treeing.is_empty());
        assert_eq!(d.identity_factors, vec![Some(0), Some(1)]);
        assert_eq!(d.factors.len(), 2);
    }

    #[test]
    fn restriction_sees_conjugates() {
        let (r, fs) = free();
        let y = PointSet::from_points(r.space(), [2, 3]).unwrap();
        let d = restrict_decomposition(&r, &fs, &y).unwrap();
        let conj: Vec<_> = d.factors.iter().filter(|f| !f.conjugator.is_identity()).collect();
        assert!(!conj.is_empty() && conj.iter().all(|f| f.relation.is_trivial()));
        assert!(d.treeing.is_empty());
    }

    #[test]
    fn restriction_needs_cover() {
        let r = rel(&[&[0, 1], &[2], &[3]]);
        let part = EquivRelation::from_classes(r.space(), [vec![0, 1], vec![2]]).unwrap();
        let y = PointSet::full(r.space());
        assert_eq!(restrict_decomposition(&r, &[part], &y), Err(DecompError::CoverageViolation(3)));
    }
}
