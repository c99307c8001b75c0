//! Scenario specifications built from taxonomy elements.
//!
//! A [`ScenarioSpec`] lists parameterized element instances and stages them:
//! stages run in series and the members of a stage run in parallel. Staging
//! is declarative only. Specs come from four operations: [`compose`] from
//! chosen elements, [`decompose_to_spec`] from an annotated report,
//! [`generate_variants`] along variation axes, and [`sample_for_coverage`]
//! biased toward under-represented leaves. All randomness comes from
//! [`SplitMix64`], so equal inputs give byte-identical [`export_spec`]
//! output.

mod decompose;
mod rng;
mod sample;
mod schema;
mod variants;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::taxonomy::{Taxonomy, TaxonomyRegistry};

pub use decompose::decompose_to_spec;
pub use rng::SplitMix64;
pub use sample::{coverage_weights, sample_for_coverage, sample_primaries};
pub use schema::{param_schema, param_spec, ParamKind, ParamSpec, LIGHT_LEVELS};
pub use variants::{generate_variants, AxisDomain, AxisValue, VariationAxis};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ParamValue {
    Number { value: f64, unit: String },
    Enum { value: String },
    Text { value: String },
}

impl ParamValue {
    pub fn number(value: f64, unit: &str) -> ParamValue {
        ParamValue::Number {
            value,
            unit: unit.into(),
        }
    }

    pub fn token(value: &str) -> ParamValue {
        ParamValue::Enum { value: value.into() }
    }

    pub fn text(value: &str) -> ParamValue {
        ParamValue::Text { value: value.into() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ParamValue::Number { .. } => "number",
            ParamValue::Enum { .. } => "enum",
            ParamValue::Text { .. } => "text",
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Number { value, unit } => write!(f, "{value} {unit}"),
            ParamValue::Enum { value } | ParamValue::Text { value } => f.write_str(value),
        }
    }
}

pub type Params = BTreeMap<String, ParamValue>;

fn unique_params<'de, D: Deserializer<'de>>(d: D) -> Result<Params, D::Error> {
    struct V;
    impl<'de> Visitor<'de> for V {
        type Value = Params;

        fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
            f.write_str("a map of parameter names to values")
        }

        fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Params, A::Error> {
            let mut out = Params::new();
            while let Some((k, v)) = map.next_entry::<String, ParamValue>()? {
                if out.contains_key(&k) {
                    return Err(serde::de::Error::custom(format!("duplicate parameter `{k}`")));
                }
                out.insert(k, v);
            }
            Ok(out)
        }
    }
    d.deserialize_map(V)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementInstance {
    pub leaf_id: String,
    #[serde(default, deserialize_with = "unique_params")]
    pub params: Params,
    #[serde(default)]
    pub role_note: String,
}

impl ElementInstance {
    pub fn new(leaf_id: &str) -> ElementInstance {
        ElementInstance {
            leaf_id: leaf_id.into(),
            params: Params::new(),
            role_note: String::new(),
        }
    }

    pub fn with_param(mut self, name: &str, value: ParamValue) -> ElementInstance {
        self.params.insert(name.into(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub scenario_id: String,
    pub taxonomy_version: u32,
    pub instances: Vec<ElementInstance>,
    /// Instance indices per stage.
    pub stages: Vec<Vec<usize>>,
    pub seed: u64,
    pub provenance: Option<String>,
    pub description: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[serde(tag = "code")]
pub enum GeneratorError {
    #[error("unknown leaf `{leaf_id}` in taxonomy version {version}")]
    UnknownLeaf { leaf_id: String, version: u32 },
    #[error("taxonomy version {version} is not available")]
    UnknownTaxonomyVersion { version: u32 },
    #[error("bad staging: {message}")]
    BadStaging { message: String },
    #[error("a scenario needs at least one element")]
    NoElements,
    #[error("annotation of report `{report_id}` has no tags")]
    EmptyTags { report_id: String },
    #[error("annotation is for report `{annotation}`, not `{report}`")]
    ReportMismatch { report: String, annotation: String },
    #[error("bad parameter `{param}` on instance {instance} ({leaf_id}): {message}")]
    BadParam {
        instance: usize,
        leaf_id: String,
        param: String,
        message: String,
    },
    #[error("bad variation axis {axis}: {message}")]
    BadAxis { axis: usize, message: String },
    #[error("count must be at least 1")]
    InvalidCount,
}

impl GeneratorError {
    pub fn code(&self) -> &'static str {
        match self {
            GeneratorError::UnknownLeaf { .. } => "UnknownLeaf",
            GeneratorError::UnknownTaxonomyVersion { .. } => "UnknownTaxonomyVersion",
            GeneratorError::BadStaging { .. } => "BadStaging",
            GeneratorError::NoElements => "NoElements",
            GeneratorError::EmptyTags { .. } => "EmptyTags",
            GeneratorError::ReportMismatch { .. } => "ReportMismatch",
            GeneratorError::BadParam { .. } => "BadParam",
            GeneratorError::BadAxis { .. } => "BadAxis",
            GeneratorError::InvalidCount => "InvalidCount",
        }
    }
}

pub type Result<T, E = GeneratorError> = std::result::Result<T, E>;

/// How [`compose`] stages its elements.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StagingPlan {
    /// `"parallel"` (one stage with every element) or `"series"` (one
    /// stage per element, in order).
    Named(NamedStaging),
    /// Explicit stages of element indices.
    Stages(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedStaging {
    Parallel,
    Series,
}

impl StagingPlan {
    pub const PARALLEL: StagingPlan = StagingPlan::Named(NamedStaging::Parallel);
    pub const SERIES: StagingPlan = StagingPlan::Named(NamedStaging::Series);

    pub fn resolve(&self, n: usize) -> Vec<Vec<usize>> {
        match self {
            StagingPlan::Named(NamedStaging::Parallel) => vec![(0..n).collect()],
            StagingPlan::Named(NamedStaging::Series) => (0..n).map(|i| vec![i]).collect(),
            StagingPlan::Stages(s) => s.clone(),
        }
    }
}

fn check_staging(stages: &[Vec<usize>], n: usize) -> Result<()> {
    let bad = |message: String| Err(GeneratorError::BadStaging { message });
    let mut seen = BTreeSet::new();
    for (s, stage) in stages.iter().enumerate() {
        if stage.is_empty() {
            return bad(format!("stage {s} is empty"));
        }
        for &i in stage {
            if i >= n {
                return bad(format!("stage {s} names instance {i}, but there are {n} instances"));
            }
            if !seen.insert(i) {
                return bad(format!("instance {i} appears in more than one place"));
            }
        }
    }
    if let Some(missing) = (0..n).find(|i| !seen.contains(i)) {
        return bad(format!("instance {missing} is in no stage"));
    }
    Ok(())
}

fn check_param(instance: usize, leaf_id: &str, name: &str, value: &ParamValue) -> Result<()> {
    let bad = |message: String| {
        Err(GeneratorError::BadParam {
            instance,
            leaf_id: leaf_id.into(),
            param: name.into(),
            message,
        })
    };
    if name.trim().is_empty() {
        return bad("parameter names must not be empty".into());
    }
    if let ParamValue::Number { value, unit } = value {
        if !value.is_finite() {
            return bad(format!("{value} is not a finite number"));
        }
        if unit.trim().is_empty() {
            return bad("numeric parameters need a unit".into());
        }
    }
    match (param_spec(leaf_id, name).map(|s| s.kind), value) {
        (None, _) => Ok(()),
        (Some(ParamKind::Enum(domain)), ParamValue::Enum { value }) => {
            if domain.contains(&value.as_str()) {
                Ok(())
            } else {
                bad(format!("`{value}` is not one of {}", domain.join(", ")))
            }
        }
        (Some(ParamKind::Number { unit, min, max, .. }), ParamValue::Number { value, unit: u }) => {
            if u != unit {
                bad(format!("unit must be `{unit}`, found `{u}`"))
            } else if !(min..=max).contains(value) {
                bad(format!("{value} is outside {min}..={max}"))
            } else {
                Ok(())
            }
        }
        (Some(ParamKind::Enum(_)), v) => bad(format!("expected an enum value, found {}", v.kind())),
        (Some(ParamKind::Number { .. }), v) => bad(format!("expected a number, found {}", v.kind())),
    }
}

/// Check a spec against the taxonomy version it names.
pub fn validate_spec(spec: &ScenarioSpec, taxonomy: &Taxonomy) -> Result<()> {
    if spec.taxonomy_version != taxonomy.version {
        return Err(GeneratorError::UnknownTaxonomyVersion {
            version: spec.taxonomy_version,
        });
    }
    if spec.instances.is_empty() {
        return Err(GeneratorError::NoElements);
    }
    for (i, inst) in spec.instances.iter().enumerate() {
        if taxonomy.leaf(&inst.leaf_id).is_none() {
            return Err(GeneratorError::UnknownLeaf {
                leaf_id: inst.leaf_id.clone(),
                version: taxonomy.version,
            });
        }
        for (name, value) in &inst.params {
            check_param(i, &inst.leaf_id, name, value)?;
        }
    }
    check_staging(&spec.stages, spec.instances.len())
}

pub fn validate_spec_in(spec: &ScenarioSpec, registry: &TaxonomyRegistry) -> Result<()> {
    let t = registry
        .get(spec.taxonomy_version)
        .ok_or(GeneratorError::UnknownTaxonomyVersion {
            version: spec.taxonomy_version,
        })?;
    validate_spec(spec, t)
}

/// `scn-` and 12 hex digits of a SHA-256 over every field but the id.
pub fn content_id(spec: &ScenarioSpec) -> String {
    let content = serde_json::to_string(&(
        spec.taxonomy_version,
        &spec.instances,
        &spec.stages,
        spec.seed,
        &spec.provenance,
        &spec.description,
    ))
    .expect("spec serializes");
    let digest = Sha256::digest(content.as_bytes());
    format!("scn-{}", &hex::encode(digest)[..12])
}

fn describe(taxonomy: &Taxonomy, instances: &[ElementInstance], stages: &[Vec<usize>]) -> String {
    stages
        .iter()
        .map(|stage| {
            stage
                .iter()
                .map(|&i| {
                    let id = &instances[i].leaf_id;
                    taxonomy.leaf(id).map_or(id.as_str(), |l| l.name.as_str())
                })
                .collect::<Vec<_>>()
                .join(" + ")
        })
        .collect::<Vec<_>>()
        .join(", then ")
}

/// Build a validated spec from `elements` staged by `staging`. The seed is 0
/// and the description lists the staged leaf names.
pub fn compose(taxonomy: &Taxonomy, elements: Vec<ElementInstance>, staging: &StagingPlan) -> Result<ScenarioSpec> {
    if elements.is_empty() {
        return Err(GeneratorError::NoElements);
    }
    let stages = staging.resolve(elements.len());
    for e in &elements {
        if taxonomy.leaf(&e.leaf_id).is_none() {
            return Err(GeneratorError::UnknownLeaf {
                leaf_id: e.leaf_id.clone(),
                version: taxonomy.version,
            });
        }
    }
    check_staging(&stages, elements.len())?;
    let mut spec = ScenarioSpec {
        scenario_id: String::new(),
        taxonomy_version: taxonomy.version,
        description: describe(taxonomy, &elements, &stages),
        instances: elements,
        stages,
        seed: 0,
        provenance: None,
    };
    validate_spec(&spec, taxonomy)?;
    spec.scenario_id = content_id(&spec);
    Ok(spec)
}

/// Pretty-printed JSON with a trailing newline.
pub fn export_spec(spec: &ScenarioSpec) -> String {
    let mut out = serde_json::to_string_pretty(spec).expect("spec serializes");
    out.push('\n');
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error(transparent)]
    Validation(#[from] GeneratorError),
}

pub fn import_spec(document: &str, registry: &TaxonomyRegistry) -> Result<ScenarioSpec, ImportError> {
    let spec: ScenarioSpec = serde_json::from_str(document).map_err(|e| ImportError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate_spec_in(&spec, registry)?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::canonical_taxonomy;

    #[test]
    fn compose_parallel_pair() {
        let t = canonical_taxonomy();
        let s = compose(
            &t,
            vec![ElementInstance::new("G"), ElementInstance::new("E")],
            &StagingPlan::PARALLEL,
        )
        .unwrap();
        assert_eq!(s.instances.len(), 2);
        assert_eq!(s.stages, vec![vec![0, 1]]);
        assert_eq!(s.description, "Vulnerable Road Users + Ambient Lighting");
        assert!(s.scenario_id.starts_with("scn-") && s.scenario_id.len() == 16);
    }

    #[test]
    fn wet_surface_without_weather() {
        let t = canonical_taxonomy();
        let wet = ElementInstance::new("L").with_param("state", ParamValue::token("wet"));
        assert!(compose(&t, vec![wet], &StagingPlan::SERIES).is_ok());
    }

    #[test]
    fn staging_errors() {
        let t = canonical_taxonomy();
        let two = || vec![ElementInstance::new("G"), ElementInstance::new("E")];
        for stages in [
            vec![vec![0]],
            vec![vec![0, 1], vec![]],
            vec![vec![0, 1, 1]],
            vec![vec![0, 2], vec![1]],
        ] {
            assert!(matches!(
                compose(&t, two(), &StagingPlan::Stages(stages)),
                Err(GeneratorError::BadStaging { .. })
            ));
        }
        assert!(compose(&t, two(), &StagingPlan::Stages(vec![vec![1], vec![0]])).is_ok());
        assert_eq!(
            compose(&t, vec![], &StagingPlan::PARALLEL),
            Err(GeneratorError::NoElements)
        );
        assert!(matches!(
            compose(&t, vec![ElementInstance::new("Z")], &StagingPlan::PARALLEL),
            Err(GeneratorError::UnknownLeaf { .. })
        ));
    }

    #[test]
    fn param_checks() {
        let t = canonical_taxonomy();
        let bad = [
            ElementInstance::new("L").with_param("state", ParamValue::token("lava")),
            ElementInstance::new("L").with_param("state", ParamValue::number(1.0, "cm")),
            ElementInstance::new("J").with_param("depth", ParamValue::number(5.0, "m")),
            ElementInstance::new("J").with_param("depth", ParamValue::number(f64::NAN, "cm")),
            ElementInstance::new("G").with_param("speed", ParamValue::number(4.0, " ")),
        ];
        for inst in bad {
            assert!(matches!(
                compose(&t, vec![inst], &StagingPlan::PARALLEL),
                Err(GeneratorError::BadParam { .. })
            ));
        }
        let extra = ElementInstance::new("G").with_param("speed", ParamValue::number(4.0, "km/h"));
        assert!(compose(&t, vec![extra], &StagingPlan::PARALLEL).is_ok());
    }

    #[test]
    fn documents() {
        let t = canonical_taxonomy();
        let reg = TaxonomyRegistry::from(t.clone());
        let spec = compose(
            &t,
            vec![ElementInstance::new("J").with_param("depth", ParamValue::number(12.5, "cm"))],
            &StagingPlan::PARALLEL,
        )
        .unwrap();
        let doc = export_spec(&spec);
        assert_eq!(import_spec(&doc, &reg).unwrap(), spec);

        let minimal = r#"{"scenario_id":"x","taxonomy_version":1,"instances":[{"leaf_id":"H","params":{},"role_note":""}],"stages":[[0]],"seed":3,"provenance":null,"description":""}"#;
        assert!(import_spec(minimal, &reg).is_ok());
        let unknown = minimal.replace("\"H\"", "\"Q\"");
        assert!(matches!(
            import_spec(&unknown, &reg),
            Err(ImportError::Validation(GeneratorError::UnknownLeaf { .. }))
        ));
        let dup = minimal.replace(
            "\"params\":{}",
            "\"params\":{\"kind\":{\"type\":\"enum\",\"value\":\"dog\"},\"kind\":{\"type\":\"enum\",\"value\":\"deer\"}}",
        );
        assert!(matches!(import_spec(&dup, &reg), Err(ImportError::Parse { .. })));
        assert!(matches!(import_spec("{", &reg), Err(ImportError::Parse { .. })));
    }
}
