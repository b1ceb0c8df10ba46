//! JSON documents (schema `lrcforge/1`) for fields, matrices, codes,
//! matrix-product specs and repair profiles, plus serializable views of
//! verification results. Coordinates are 1-based in every document.

use serde::{Deserialize, Serialize};

use crate::code::{DistanceResult, Duality, LinearCode};
use crate::error::{Error, Result};
use crate::families::{FamilyAParams, FamilyBParams, FamilyCParams, LrcParams, QuantumInput, QuantumTriple, Theorem};
use crate::galois::{Field, GaloisField};
use crate::locality::{Construction, LocalityVerdict, OptimalityVerdict, RepairProfile};
use crate::matrix::{Mat, Permutation};
use crate::mpkit::MpSpec;

pub const SCHEMA: &str = "lrcforge/1";

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldDoc {
    pub p: u32,
    pub e: u32,
    /// Coefficients `c_0..c_e` of the monic modulus, lowest degree first.
    /// Omitted means the canonical modulus.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modulus: Option<Vec<u32>>,
}

impl FieldDoc {
    pub fn from_field(f: &Field) -> Self {
        FieldDoc { p: f.characteristic(), e: f.degree(), modulus: Some(f.modulus().to_vec()) }
    }

    /// Rebuilds the field; only the canonical modulus is accepted.
    pub fn to_field(&self) -> Result<Field> {
        let f = GaloisField::new(self.p, self.e)?;
        if let Some(m) = self.modulus.as_ref().filter(|m| m.as_slice() != f.modulus()) {
            return Err(format_err(format!(
                "modulus {:?} is not the canonical one {:?} for GF({}^{})",
                m,
                f.modulus(),
                self.p,
                self.e
            )));
        }
        Ok(f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatDoc {
    pub field: FieldDoc,
    pub rows: usize,
    pub cols: usize,
    /// Row-major canonical integers.
    pub entries: Vec<u32>,
}

impl MatDoc {
    pub fn from_mat(m: &Mat) -> Self {
        MatDoc { field: FieldDoc::from_field(m.field()), rows: m.rows(), cols: m.cols(), entries: m.entries().to_vec() }
    }

    pub fn to_mat(&self) -> Result<Mat> {
        let f = self.field.to_field()?;
        if self.entries.len() != self.rows * self.cols {
            return Err(format_err(format!("{} entries for a {}x{} matrix", self.entries.len(), self.rows, self.cols)));
        }
        if let Some(&bad) = self.entries.iter().find(|&&x| !f.contains(x)) {
            return Err(format_err(format!("entry {bad} is not an element of GF({})", f.order())));
        }
        Mat::new(f, self.rows, self.cols, self.entries.clone())
    }
}

/// Where a document came from, enough to rebuild it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Source {
    FamilyA(FamilyAParams),
    FamilyB(FamilyBParams),
    FamilyC(FamilyCParams),
    Theorem { theorem: Theorem, input: QuantumInput, enforce: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDoc {
    pub field: FieldDoc,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<MatDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity_check: Option<MatDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<LrcParams>,
}

impl CodeDoc {
    pub fn from_code(c: &LinearCode) -> Self {
        CodeDoc {
            field: FieldDoc::from_field(c.field()),
            n: c.len(),
            generator: Some(MatDoc::from_mat(c.generator())),
            parity_check: None,
            construction: None,
            source: None,
            expected: None,
        }
    }

    pub fn to_code(&self) -> Result<LinearCode> {
        let field = self.field.to_field()?;
        let load = |m: &MatDoc, what: &str| -> Result<Mat> {
            let m = m.to_mat()?;
            if m.field() != &field {
                return Err(format_err(format!("{what} is over GF({}), code over GF({})", m.field().order(), field.order())));
            }
            if m.cols() != self.n {
                return Err(format_err(format!("{what} has {} columns, n = {}", m.cols(), self.n)));
            }
            Ok(m)
        };
        let from_g = self.generator.as_ref().map(|g| load(g, "generator")).transpose()?.map(|g| LinearCode::from_generator(&g));
        let from_h = self
            .parity_check
            .as_ref()
            .map(|h| load(h, "parity check"))
            .transpose()?
            .map(|h| LinearCode::from_parity_check(&h));
        match (from_g, from_h) {
            (Some(a), Some(b)) if a != b => Err(format_err("generator and parity check describe different codes")),
            (Some(a), _) | (None, Some(a)) => Ok(a),
            (None, None) => Err(format_err("code needs a generator or a parity check")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MpDoc {
    #[serde(rename = "A")]
    pub a: MatDoc,
    pub constituents: Vec<CodeDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construction: Option<Construction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<Source>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duality: Option<String>,
    /// 1-based image of τ.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<QuantumTriple>,
    /// Hypotheses of the source theorem that do not hold.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub violated: Vec<String>,
}

impl MpDoc {
    pub fn from_spec(spec: &MpSpec) -> Self {
        MpDoc {
            a: MatDoc::from_mat(&spec.a),
            constituents: spec.constituents.iter().map(CodeDoc::from_code).collect(),
            construction: None,
            source: None,
            duality: None,
            tau: None,
            expected: None,
            violated: vec![],
        }
    }

    pub fn to_spec(&self) -> Result<MpSpec> {
        let a = self.a.to_mat()?;
        let cs = self.constituents.iter().map(CodeDoc::to_code).collect::<Result<Vec<_>>>()?;
        MpSpec::new(a, cs)
    }

    pub fn tau(&self) -> Result<Option<Permutation>> {
        self.tau.as_deref().map(Permutation::from_one_based).transpose()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub r: usize,
    pub delta: usize,
    pub groups: Vec<Vec<usize>>,
}

impl ProfileDoc {
    pub fn from_profile(p: &RepairProfile) -> Self {
        ProfileDoc { r: p.r, delta: p.delta, groups: one_based_groups(&p.groups) }
    }

    pub fn to_profile(&self) -> Result<RepairProfile> {
        let groups = self
            .groups
            .iter()
            .map(|g| {
                g.iter()
                    .map(|&i| i.checked_sub(1).ok_or_else(|| format_err("coordinates are 1-based")))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        RepairProfile::new(self.r, self.delta, groups)
    }
}

/// A top-level document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Document {
    Code(CodeDoc),
    Mp(MpDoc),
    Profile(ProfileDoc),
    Matrix(MatDoc),
}

#[derive(Serialize, Deserialize)]
struct Envelope {
    schema: String,
    #[serde(flatten)]
    doc: Document,
}

impl Document {
    pub fn to_json(&self) -> String {
        let env = Envelope { schema: SCHEMA.into(), doc: self.clone() };
        serde_json::to_string(&env).expect("documents always serialize")
    }

    pub fn from_json(s: &str) -> Result<Document> {
        let env: Envelope = serde_json::from_str(s).map_err(|e| format_err(e.to_string()))?;
        if env.schema != SCHEMA {
            return Err(format_err(format!("unsupported schema {:?}, expected {SCHEMA:?}", env.schema)));
        }
        Ok(env.doc)
    }
}

pub fn one_based(xs: &[usize]) -> Vec<usize> {
    xs.iter().map(|&i| i + 1).collect()
}

pub fn one_based_groups(groups: &[Vec<usize>]) -> Vec<Vec<usize>> {
    groups.iter().map(|g| one_based(g)).collect()
}

pub fn parse_duality(s: &str) -> Result<Duality> {
    match s.to_ascii_lowercase().as_str() {
        "euclidean" => Ok(Duality::Euclidean),
        "hermitian" => Ok(Duality::Hermitian),
        other => Err(Error::InvalidParameters(format!("unknown duality {other:?}"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DistanceView {
    /// Exact distance, absent when only bracketed.
    pub d: Option<usize>,
    pub lower: usize,
    pub upper: usize,
    pub method: &'static str,
    pub ops: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dependent_columns: Option<Vec<usize>>,
}

impl From<&DistanceResult> for DistanceView {
    fn from(d: &DistanceResult) -> Self {
        DistanceView {
            d: d.exact_value(),
            lower: d.lower,
            upper: d.upper,
            method: d.method.as_str(),
            ops: d.ops,
            witness: d.witness.clone(),
            dependent_columns: d.dependent_columns.as_deref().map(one_based),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupView {
    pub group: Vec<usize>,
    pub d: Option<usize>,
    pub lower: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LocalityView {
    pub verified: bool,
    pub method: &'static str,
    pub groups: Vec<GroupView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failing_group: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub uncovered: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&LocalityVerdict> for LocalityView {
    fn from(v: &LocalityVerdict) -> Self {
        LocalityView {
            verified: v.verified,
            method: v.method.as_str(),
            groups: v
                .groups
                .iter()
                .map(|g| GroupView { group: one_based(&g.group), d: g.distance.exact_value(), lower: g.distance.lower })
                .collect(),
            failing_group: v.failing_group.map(|i| i + 1),
            uncovered: one_based(&v.uncovered),
            reason: v.reason.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OptimalityView {
    pub optimal: bool,
    pub bound: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&OptimalityVerdict> for OptimalityView {
    fn from(v: &OptimalityVerdict) -> Self {
        OptimalityView { optimal: v.optimal, bound: v.bound, reason: v.reason.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::build_family_c;

    #[test]
    fn code_round_trip() {
        let p = FamilyCParams::new(9, 2, 1, 1, 8);
        let c = build_family_c(&p).unwrap();
        let mut doc = CodeDoc::from_code(&c);
        doc.source = Some(Source::FamilyC(p.clone()));
        doc.construction = Some(p.construction());
        doc.expected = Some(p.expected());
        let json = Document::Code(doc.clone()).to_json();
        assert!(json.starts_with(r#"{"schema":"lrcforge/1","kind":"code""#));
        let Document::Code(back) = Document::from_json(&json).unwrap() else { panic!("wrong kind") };
        assert_eq!(back, doc);
        assert_eq!(back.to_code().unwrap(), c);
    }

    #[test]
    fn parity_check_only_documents_load() {
        let c = build_family_c(&FamilyCParams::new(7, 1, 0, 2, 3)).unwrap();
        let doc = CodeDoc {
            generator: None,
            parity_check: Some(MatDoc::from_mat(c.parity_check())),
            ..CodeDoc::from_code(&c)
        };
        assert_eq!(doc.to_code().unwrap(), c);
    }

    #[test]
    fn rejects_bad_documents() {
        let bad_schema = r#"{"schema":"lrcforge/0","kind":"profile","r":1,"delta":2,"groups":[[1,2]]}"#;
        assert!(matches!(Document::from_json(bad_schema), Err(Error::Format(_))));
        let f = GaloisField::new(7, 1).unwrap();
        let mut m = MatDoc::from_mat(&Mat::identity(&f, 2));
        m.entries[0] = 7;
        assert!(m.to_mat().is_err());
        let mut fd = FieldDoc::from_field(&f);
        fd.modulus = Some(vec![2, 1]);
        assert!(fd.to_field().is_err());
        let zero_based = ProfileDoc { r: 1, delta: 2, groups: vec![vec![0, 1]] };
        assert!(zero_based.to_profile().is_err());
    }

    #[test]
    fn profile_round_trip_is_one_based() {
        let p = RepairProfile::new(2, 2, vec![vec![0, 1, 2], vec![3, 4]]).unwrap();
        let doc = ProfileDoc::from_profile(&p);
        assert_eq!(doc.groups, vec![vec![1, 2, 3], vec![4, 5]]);
        assert_eq!(doc.to_profile().unwrap(), p);
    }
}
