use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use space_core::{EquivRelation, FiniteSpace, Graphing, PartialIso, PointSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid instance: {0}")]
    Validation(String),
    #[error("instance has no {0}")]
    Missing(String),
}

fn invalid(msg: impl Into<String>) -> InstanceError {
    InstanceError::Validation(msg.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelationSpec {
    pub domain: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

/// Which named objects play which role.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Structure {
    /// The ambient relation; the join of the factors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub factors: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub core: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sub: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
}

impl Structure {
    pub fn is_empty(&self) -> bool {
        *self == Structure::default()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub size: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub relations: BTreeMap<String, RelationSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub isos: BTreeMap<String, Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub graphings: BTreeMap<String, Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Structure::is_empty")]
    pub structure: Structure,
}

/// Parses, validates and normalizes: domains sorted, classes sorted inside and
/// ordered by least point, pair lists sorted.
pub fn parse_instance(text: &str) -> Result<InstanceFile, InstanceError> {
    let mut inst: InstanceFile =
        serde_json::from_str(text).map_err(|e| InstanceError::Parse { line: e.line(), reason: e.to_string() })?;
    inst.normalize();
    inst.validate()?;
    Ok(inst)
}

/// Canonical text: fixed key order, two-space indentation, trailing newline.
pub fn serialize_instance(inst: &InstanceFile) -> String {
    let mut out = serde_json::to_string_pretty(inst).expect("plain data serializes");
    out.push('\n');
    out
}

/// Hex SHA-256 of the canonical text.
pub fn digest(inst: &InstanceFile) -> String {
    hex::encode(Sha256::digest(serialize_instance(inst).as_bytes()))
}

impl InstanceFile {
    pub fn new(size: usize) -> Self {
        InstanceFile {
            size,
            relations: BTreeMap::new(),
            isos: BTreeMap::new(),
            graphings: BTreeMap::new(),
            structure: Structure::default(),
        }
    }

    pub fn space(&self) -> Result<FiniteSpace, InstanceError> {
        FiniteSpace::new(self.size).map_err(|e| invalid(e.to_string()))
    }

    pub fn insert_relation(&mut self, name: &str, r: &EquivRelation) {
        let spec = RelationSpec { domain: r.domain().to_vec(), classes: r.classes() };
        self.relations.insert(name.to_string(), spec);
    }

    pub fn insert_graphing(&mut self, name: &str, g: &Graphing) {
        self.graphings.insert(name.to_string(), g.unordered_edges());
    }

    fn normalize(&mut self) {
        for spec in self.relations.values_mut() {
            spec.domain.sort_unstable();
            for c in &mut spec.classes {
                c.sort_unstable();
            }
            spec.classes.sort();
        }
        for pairs in self.isos.values_mut().chain(self.graphings.values_mut()) {
            pairs.sort_unstable();
        }
        if let Some(s) = &mut self.structure.subset {
            s.sort_unstable();
        }
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let n = self.size;
        let in_range = |what: &str, x: usize| {
            if x < n {
                Ok(())
            } else {
                Err(invalid(format!("{what}: index {x} out of range for size {n}")))
            }
        };
        for (name, spec) in &self.relations {
            let mut seen = vec![false; n];
            for &x in &spec.domain {
                in_range(name, x)?;
                if std::mem::replace(&mut seen[x], true) {
                    return Err(invalid(format!("{name}: domain repeats point {x}")));
                }
            }
            let mut placed = vec![false; n];
            for c in &spec.classes {
                if c.is_empty() {
                    return Err(invalid(format!("{name}: empty class")));
                }
                for &x in c {
                    in_range(name, x)?;
                    if std::mem::replace(&mut placed[x], true) {
                        return Err(invalid(format!("{name}: partition repeats point {x}")));
                    }
                }
            }
            if seen != placed {
                return Err(invalid(format!("{name}: classes do not partition the domain")));
            }
        }
        for (name, pairs) in &self.isos {
            for &(x, y) in pairs {
                in_range(name, x)?;
                in_range(name, y)?;
            }
            let space = self.space()?;
            PartialIso::from_pairs(space, pairs.iter().copied()).map_err(|e| invalid(format!("{name}: {e}")))?;
        }
        for (name, pairs) in &self.graphings {
            for &(x, y) in pairs {
                in_range(name, x)?;
                in_range(name, y)?;
                if x == y {
                    return Err(invalid(format!("{name}: loop at {x}")));
                }
            }
        }
        let st = &self.structure;
        for name in st.relation.iter().chain(&st.factors).chain(&st.core).chain(&st.sub) {
            if !self.relations.contains_key(name) {
                return Err(invalid(format!("structure names unknown relation {name}")));
            }
        }
        for &x in st.subset.iter().flatten() {
            in_range("subset", x)?;
        }
        Ok(())
    }

    pub fn relation(&self, name: &str) -> Result<EquivRelation, InstanceError> {
        let spec = self.relations.get(name).ok_or_else(|| InstanceError::Missing(format!("relation {name}")))?;
        EquivRelation::from_classes(self.space()?, spec.classes.iter().cloned())
            .map_err(|e| invalid(format!("{name}: {e}")))
    }

    pub fn graphing(&self, name: &str) -> Result<Graphing, InstanceError> {
        let pairs = self.graphings.get(name).ok_or_else(|| InstanceError::Missing(format!("graphing {name}")))?;
        Graphing::from_edges(self.space()?, pairs.iter().copied()).map_err(|e| invalid(format!("{name}: {e}")))
    }

    pub fn iso(&self, name: &str) -> Result<PartialIso, InstanceError> {
        let pairs = self.isos.get(name).ok_or_else(|| InstanceError::Missing(format!("iso {name}")))?;
        PartialIso::from_pairs(self.space()?, pairs.iter().copied()).map_err(|e| invalid(format!("{name}: {e}")))
    }

    pub fn factors(&self) -> Result<Vec<EquivRelation>, InstanceError> {
        if self.structure.factors.is_empty() {
            return Err(InstanceError::Missing("declared factors".into()));
        }
        self.structure.factors.iter().map(|f| self.relation(f)).collect()
    }

    /// The declared ambient relation, else the join of the factors.
    pub fn ambient(&self) -> Result<EquivRelation, InstanceError> {
        match &self.structure.relation {
            Some(name) => self.relation(name),
            None => {
                let fs = self.factors()?;
                EquivRelation::join(fs.iter()).map_err(|e| invalid(e.to_string()))
            }
        }
    }

    pub fn core(&self) -> Result<EquivRelation, InstanceError> {
        let name = self.structure.core.as_ref().ok_or_else(|| InstanceError::Missing("declared core".into()))?;
        self.relation(name)
    }

    /// `name` if given, else the declared sub-relation.
    pub fn sub(&self, name: Option<&str>) -> Result<(String, EquivRelation), InstanceError> {
        let name = name
            .map(str::to_string)
            .or_else(|| self.structure.sub.clone())
            .ok_or_else(|| InstanceError::Missing("sub-relation".into()))?;
        let r = self.relation(&name)?;
        Ok((name, r))
    }

    pub fn subset(&self, given: Option<&[usize]>) -> Result<PointSet, InstanceError> {
        let pts = given
            .map(<[usize]>::to_vec)
            .or_else(|| self.structure.subset.clone())
            .ok_or_else(|| InstanceError::Missing("restriction set".into()))?;
        PointSet::from_points(self.space()?, pts).map_err(|e| invalid(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const E_FREE: &str = r#"{
  "size": 4,
  "relations": {
    "R": { "domain": [0, 1, 2, 3], "classes": [[0, 1, 2], [3]] },
    "R1": { "domain": [0, 1, 2, 3], "classes": [[0, 1], [2], [3]] },
    "R2": { "domain": [0, 1, 2, 3], "classes": [[0], [1, 2], [3]] }
  },
  "structure": { "relation": "R", "factors": ["R1", "R2"] }
}"#;

    #[test]
    fn example_round_trips() {
        let inst = parse_instance(E_FREE).unwrap();
        let text = serialize_instance(&inst);
        assert_eq!(parse_instance(&text).unwrap(), inst);
        assert_eq!(serialize_instance(&parse_instance(&text).unwrap()), text);
        assert_eq!(inst.factors().unwrap().len(), 2);
        assert_eq!(digest(&inst).len(), 64);
    }

    #[test]
    fn repeated_point_is_rejected() {
        let bad = E_FREE.replace("[[0, 1], [2], [3]]", "[[0, 1], [1, 2], [3]]");
        assert!(matches!(parse_instance(&bad), Err(InstanceError::Validation(_))));
    }

    #[test]
    fn out_of_range_is_rejected() {
        let bad = E_FREE.replace("[[0], [1, 2], [3]]", "[[0], [1, 2], [3, 9]]");
        assert!(matches!(parse_instance(&bad), Err(InstanceError::Validation(_))));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let bad = E_FREE.replace("\"size\": 4,", "\"size\": 4");
        assert!(matches!(parse_instance(&bad), Err(InstanceError::Parse { line: 3, .. })));
    }

    #[test]
    fn join_is_the_default_ambient() {
        let mut inst = parse_instance(E_FREE).unwrap();
        inst.structure.relation = None;
        assert_eq!(inst.ambient().unwrap(), inst.relation("R").unwrap());
    }
}
