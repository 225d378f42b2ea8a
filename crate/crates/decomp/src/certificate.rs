use serde::{Deserialize, Serialize};
use space_core::{Graphing, PointSet};

use crate::{KuroshDecomposition, ReducedTuple, Verdict};

/// One conjugated piece: which factor, the conjugator as `(point, target)`
/// pairs, and the classes of the piece's relation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorRecord {
    pub factor: usize,
    pub conjugator: Vec<(usize, usize)>,
    pub classes: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    FreeProduct {
        accepted: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tuple: Option<ReducedTuple>,
    },
    Amalgam {
        accepted: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tuple: Option<ReducedTuple>,
    },
    Kurosh {
        factors: Vec<FactorRecord>,
        identity_factors: Vec<Option<usize>>,
        treeing: Vec<(usize, usize)>,
    },
    Restriction {
        subset: Vec<usize>,
        factors: Vec<FactorRecord>,
        identity_factors: Vec<Option<usize>>,
        treeing: Vec<(usize, usize)>,
    },
    Treeing {
        edges: Vec<(usize, usize)>,
    },
}

fn records(d: &KuroshDecomposition) -> Vec<FactorRecord> {
    d.factors
        .iter()
        .map(|f| FactorRecord { factor: f.index, conjugator: f.conjugator.pairs(), classes: f.relation.classes() })
        .collect()
}

impl Certificate {
    pub fn free_product(v: &Verdict) -> Self {
        Certificate::FreeProduct { accepted: v.is_accept(), tuple: v.tuple().cloned() }
    }

    pub fn amalgam(v: &Verdict) -> Self {
        Certificate::Amalgam { accepted: v.is_accept(), tuple: v.tuple().cloned() }
    }

    pub fn kurosh(d: &KuroshDecomposition) -> Self {
        Certificate::Kurosh {
            factors: records(d),
            identity_factors: d.identity_factors.clone(),
            treeing: d.treeing.unordered_edges(),
        }
    }

    pub fn restriction(subset: &PointSet, d: &KuroshDecomposition) -> Self {
        Certificate::Restriction {
            subset: subset.to_vec(),
            factors: records(d),
            identity_factors: d.identity_factors.clone(),
            treeing: d.treeing.unordered_edges(),
        }
    }

    pub fn treeing(g: &Graphing) -> Self {
        Certificate::Treeing { edges: g.unordered_edges() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Certificate::FreeProduct { .. } => "free-product",
            Certificate::Amalgam { .. } => "amalgam",
            Certificate::Kurosh { .. } => "kurosh",
            Certificate::Restriction { .. } => "restriction",
            Certificate::Treeing { .. } => "treeing",
        }
    }

    /// Whether the certificate asserts a positive answer.
    pub fn accepted(&self) -> bool {
        match self {
            Certificate::FreeProduct { accepted, .. } | Certificate::Amalgam { accepted, .. } => *accepted,
            _ => true,
        }
    }
}
