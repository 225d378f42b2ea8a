//! Certificate checking that relies only on relation primitives and the bounded
//! tuple search, never on the constructions that produced the certificate.

use space_core::{EquivRelation, FiniteSpace, Graphing, PartialIso, PointSet};
use thiserror::Error;

use crate::certificate::FactorRecord;
use crate::{find_closing_tuple, is_reduced, Certificate, ReducedTuple};

/// The instance a certificate is checked against.
#[derive(Clone, Copy, Debug)]
pub struct CheckContext<'a> {
    pub relation: &'a EquivRelation,
    pub factors: &'a [EquivRelation],
    pub core: Option<&'a EquivRelation>,
    pub sub: Option<&'a EquivRelation>,
    pub subset: Option<&'a PointSet>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CheckError {
    #[error("malformed certificate: {0}")]
    Malformed(String),
    #[error("the instance lacks {0}")]
    MissingContext(&'static str),
    #[error("pieces do not generate the relation at ({0}, {1})")]
    Generation(usize, usize),
    #[error("a piece leaves the relation at ({0}, {1})")]
    Containment(usize, usize),
    #[error("closing tuple {0:?} contradicts freeness")]
    NotFree(ReducedTuple),
    #[error("accepted, but the search finds {0:?}")]
    FalseAccept(ReducedTuple),
    #[error("the rejection tuple is not a closing reduced tuple")]
    BadWitness,
    #[error("piece {0} differs from its conjugated intersection")]
    Formula(usize),
    #[error("identity piece missing or wrong for factor {0}")]
    IdentityMissing(usize),
    #[error("saturations of the targets do not split factor {0}")]
    SaturationPartition(usize),
    #[error("edges are not a treeing")]
    NotTreeing,
}

fn search_bound(space: FiniteSpace) -> usize {
    2 * space.size().max(1)
}

/// Every off-diagonal pair of `r` is in the join of `pieces`, and each piece sits in `r`.
fn generates(r: &EquivRelation, pieces: &[EquivRelation]) -> Result<(), CheckError> {
    for p in pieces {
        if let Some((x, y)) = p.pairs().into_iter().find(|&(x, y)| x != y && !r.related(x, y)) {
            return Err(CheckError::Containment(x, y));
        }
    }
    let all = PointSet::full(r.space());
    let join = EquivRelation::generated_by(&all, pieces.iter().flat_map(|p| p.pairs()))
        .map_err(|e| CheckError::Malformed(e.to_string()))?;
    match r.pairs().into_iter().find(|&(x, y)| x != y && !join.related(x, y)) {
        Some((x, y)) => Err(CheckError::Generation(x, y)),
        None => Ok(()),
    }
}

fn check_verdict(
    accepted: bool,
    tuple: Option<&ReducedTuple>,
    r: &EquivRelation,
    factors: &[EquivRelation],
    core: Option<&EquivRelation>,
) -> Result<(), CheckError> {
    if accepted {
        generates(r, factors)?;
        if let Some(c) = core {
            for f in factors {
                if let Some((x, y)) = c.pairs().into_iter().find(|&(x, y)| x != y && !f.related(x, y)) {
                    return Err(CheckError::Containment(x, y));
                }
            }
        }
        return match find_closing_tuple(factors, core, search_bound(r.space())) {
            Some(t) => Err(CheckError::FalseAccept(t)),
            None => Ok(()),
        };
    }
    let t = tuple.ok_or(CheckError::BadWitness)?;
    match is_reduced(t, factors, core) {
        Ok(true) if t.is_closing() => Ok(()),
        _ => Err(CheckError::BadWitness),
    }
}

struct Piece {
    factor: usize,
    conjugator: PartialIso,
    relation: EquivRelation,
}

fn read_piece(space: FiniteSpace, rec: &FactorRecord, m: usize) -> Result<Piece, CheckError> {
    if rec.factor >= m {
        return Err(CheckError::Malformed(format!("factor index {} out of range", rec.factor)));
    }
    let conjugator = PartialIso::from_pairs(space, rec.conjugator.iter().copied())
        .map_err(|e| CheckError::Malformed(e.to_string()))?;
    let relation = EquivRelation::from_classes(space, rec.classes.iter().cloned())
        .map_err(|e| CheckError::Malformed(e.to_string()))?;
    if relation.domain() != conjugator.source() {
        return Err(CheckError::Malformed("classes do not cover the conjugator source".into()));
    }
    Ok(Piece { factor: rec.factor, conjugator, relation })
}

fn check_pieces(
    ctx: &CheckContext<'_>,
    acting: &EquivRelation,
    records: &[FactorRecord],
    identity: &[Option<usize>],
    edges: &[(usize, usize)],
    identity_carrier: &dyn Fn(usize) -> PointSet,
) -> Result<Vec<Piece>, CheckError> {
    let space = acting.space();
    let pieces: Vec<Piece> =
        records.iter().map(|r| read_piece(space, r, ctx.factors.len())).collect::<Result<_, _>>()?;
    for (k, p) in pieces.iter().enumerate() {
        let fi = &ctx.factors[p.factor];
        let graph_ok = p.conjugator.pairs().into_iter().all(|(x, t)| fi.in_domain(t) && ctx.relation.related(x, t));
        if !graph_ok {
            return Err(CheckError::Formula(k));
        }
        let src = p.conjugator.source().to_vec();
        for &x in &src {
            for &y in &src {
                let want =
                    acting.related(x, y) && fi.related(p.conjugator.apply(x).unwrap(), p.conjugator.apply(y).unwrap());
                if p.relation.related(x, y) != want {
                    return Err(CheckError::Formula(k));
                }
            }
        }
    }
    if identity.len() != ctx.factors.len() {
        return Err(CheckError::Malformed("one identity entry per factor expected".into()));
    }
    for (i, entry) in identity.iter().enumerate() {
        let carrier = identity_carrier(i);
        match entry {
            None if carrier.is_empty() => {}
            Some(k)
                if pieces.get(*k).is_some_and(|p| {
                    p.factor == i && p.conjugator.is_identity() && p.conjugator.source() == carrier
                }) => {}
            _ => return Err(CheckError::IdentityMissing(i)),
        }
    }
    let treeing =
        Graphing::from_edges(space, edges.iter().copied()).map_err(|e| CheckError::Malformed(e.to_string()))?;
    let tree_rel = treeing.generated_relation();
    if !treeing.is_treeing_of(&tree_rel) {
        return Err(CheckError::NotTreeing);
    }
    if let Some(&(x, y)) = edges.iter().find(|&&(x, y)| !acting.related(x, y)) {
        return Err(CheckError::Containment(x, y));
    }
    let mut rels: Vec<EquivRelation> = pieces.iter().map(|p| p.relation.clone()).collect();
    rels.push(tree_rel.restrict(&acting.domain()).map_err(|e| CheckError::Malformed(e.to_string()))?);
    generates(acting, &rels)?;
    if let Some(t) = find_closing_tuple(&rels, None, search_bound(space)) {
        return Err(CheckError::NotFree(t));
    }
    Ok(pieces)
}

/// Checks `cert` against the instance in `ctx`. Reject certificates pass when
/// their witness is a genuine closing reduced tuple.
pub fn check_certificate(cert: &Certificate, ctx: &CheckContext<'_>) -> Result<(), CheckError> {
    let r = ctx.relation;
    match cert {
        Certificate::FreeProduct { accepted, tuple } => check_verdict(*accepted, tuple.as_ref(), r, ctx.factors, None),
        Certificate::Amalgam { accepted, tuple } => {
            let core = ctx.core.ok_or(CheckError::MissingContext("a core relation"))?;
            if ctx.factors.len() != 2 {
                return Err(CheckError::MissingContext("two amalgam factors"));
            }
            check_verdict(*accepted, tuple.as_ref(), r, ctx.factors, Some(core))
        }
        Certificate::Kurosh { factors, identity_factors, treeing } => {
            let s = ctx.sub.ok_or(CheckError::MissingContext("a sub-relation"))?;
            let full = PointSet::full(r.space());
            check_pieces(ctx, s, factors, identity_factors, treeing, &|i| ctx.factors[i].domain().intersection(&full))?;
            Ok(())
        }
        Certificate::Restriction { subset, factors, identity_factors, treeing } => {
            let y = PointSet::from_points(r.space(), subset.iter().copied())
                .map_err(|e| CheckError::Malformed(e.to_string()))?;
            if ctx.subset.is_some_and(|s| *s != y) {
                return Err(CheckError::Malformed("subset differs from the instance".into()));
            }
            let acting = r.extend_trivially().restrict(&y).map_err(|e| CheckError::Malformed(e.to_string()))?;
            let pieces = check_pieces(ctx, &acting, factors, identity_factors, treeing, &|i| {
                ctx.factors[i].domain().intersection(&y)
            })?;
            let reach = r.saturate(&y).map_err(|e| CheckError::Malformed(e.to_string()))?;
            for (i, fi) in ctx.factors.iter().enumerate() {
                let mut seen = PointSet::empty(r.space());
                for p in pieces.iter().filter(|p| p.factor == i) {
                    let sat = fi.saturate(&p.conjugator.target()).map_err(|_| CheckError::SaturationPartition(i))?;
                    if !sat.intersection(&seen).is_empty() {
                        return Err(CheckError::SaturationPartition(i));
                    }
                    seen = seen.union(&sat);
                }
                if seen != fi.domain().intersection(&reach) {
                    return Err(CheckError::SaturationPartition(i));
                }
            }
            Ok(())
        }
        Certificate::Treeing { edges } => {
            let g = Graphing::from_edges(r.space(), edges.iter().copied())
                .map_err(|e| CheckError::Malformed(e.to_string()))?;
            if g.is_treeing_of(r) {
                Ok(())
            } else {
                Err(CheckError::NotTreeing)
            }
        }
    }
}
