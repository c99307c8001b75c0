use super::{content_id, validate_spec, ElementInstance, GeneratorError, ParamValue, Params, Result, ScenarioSpec};
use crate::annotation::Annotation;
use crate::corpus::{CollisionReport, DayPart};
use crate::tagger::{contains_phrase, tokenize};
use crate::taxonomy::Taxonomy;

/// `(leaf, param, [(phrase, value)])`. The first listed phrase found in
/// the narrative decides the value.
type Cue = (&'static str, &'static str, &'static [(&'static str, &'static str)]);

const CUES: &[Cue] = &[
    (
        "A",
        "component",
        &[
            ("brake", "brakes"),
            ("brakes", "brakes"),
            ("steering", "steering"),
            ("engine", "powertrain"),
            ("transmission", "powertrain"),
            ("suspension", "suspension"),
        ],
    ),
    (
        "B",
        "subsystem",
        &[
            ("hacked", "security"),
            ("failed to detect", "perception"),
            ("misclassified", "perception"),
            ("perception", "perception"),
            ("planner", "planning"),
            ("pullover", "planning"),
        ],
    ),
    (
        "C",
        "item",
        &[
            ("tire", "tires"),
            ("tires", "tires"),
            ("fluid", "fluids"),
            ("wiper", "wipers"),
            ("wipers", "wipers"),
        ],
    ),
    (
        "D",
        "state",
        &[
            ("not holding", "distracted"),
            ("distracted", "distracted"),
            ("inattentive", "distracted"),
            ("drowsy", "drowsy"),
            ("asleep", "drowsy"),
            ("impaired", "impaired"),
            ("intoxicated", "impaired"),
        ],
    ),
    (
        "F",
        "condition",
        &[
            ("rain", "rain"),
            ("raining", "rain"),
            ("fog", "fog"),
            ("snow", "snow"),
            ("hail", "hail"),
            ("wind", "wind"),
        ],
    ),
    (
        "G",
        "kind",
        &[
            ("wheelchair", "wheelchair_user"),
            ("cyclist", "cyclist"),
            ("bicyclist", "cyclist"),
            ("scooter", "scooter_rider"),
            ("motorcyclist", "motorcyclist"),
            ("pedestrian", "pedestrian"),
        ],
    ),
    (
        "G",
        "behavior",
        &[
            ("outside the crosswalk", "jaywalk"),
            ("jaywalking", "jaywalk"),
            ("jaywalk", "jaywalk"),
            ("crosswalk", "crosswalk"),
            ("darted", "dodge"),
            ("sidewalk", "sidewalk"),
        ],
    ),
    (
        "H",
        "kind",
        &[
            ("dog", "dog"),
            ("deer", "deer"),
            ("livestock", "livestock"),
            ("cow", "livestock"),
            ("horse", "livestock"),
            ("bird", "bird"),
        ],
    ),
    (
        "I",
        "feature",
        &[
            ("stop sign", "stop_sign"),
            ("red light", "traffic_light"),
            ("traffic light", "traffic_light"),
            ("traffic signal", "traffic_light"),
            ("gate", "gate"),
            ("bollard", "barrier"),
            ("guardrail", "barrier"),
            ("curb", "curb"),
            ("lane markings", "lane_markings"),
        ],
    ),
    (
        "J",
        "kind",
        &[
            ("pothole", "pothole"),
            ("sinkhole", "sinkhole"),
            ("ditch", "ditch"),
            ("manhole", "manhole"),
        ],
    ),
    (
        "K",
        "kind",
        &[("speed bump", "speed_bump"), ("debris", "debris"), ("rock", "rock")],
    ),
    (
        "L",
        "state",
        &[
            ("icy", "icy"),
            ("ice", "icy"),
            ("snowy", "snowy"),
            ("wet", "wet"),
            ("standing water", "wet"),
        ],
    ),
    (
        "M",
        "kind",
        &[
            ("truck", "truck"),
            ("pickup", "truck"),
            ("bus", "bus"),
            ("minivan", "van"),
            ("van", "van"),
            ("taxi", "taxi"),
            ("motorcycle", "motorcycle"),
            ("sedan", "car"),
            ("suv", "car"),
            ("car", "car"),
            ("trailer", "trailer"),
        ],
    ),
    (
        "M",
        "behavior",
        &[
            ("door", "door_opening"),
            ("parked", "stationary"),
            ("reversed", "reversing"),
            ("cutting", "cutting_in"),
            ("turned left", "turning"),
            ("turned right", "turning"),
            ("turning", "turning"),
        ],
    ),
    (
        "N",
        "kind",
        &[("drone", "drone"), ("bird", "bird"), ("debris", "debris")],
    ),
    (
        "O",
        "kind",
        &[
            ("branch", "branch"),
            ("cable", "cable"),
            ("wire", "cable"),
            ("gate arm", "gate_arm"),
            ("sign", "sign"),
        ],
    ),
];

fn light_level(report: &CollisionReport, tokens: &[String]) -> Option<&'static str> {
    let lit = contains_phrase(tokens, &["street", "lights"]) || contains_phrase(tokens, &["streetlights"]);
    match report.day_part() {
        DayPart::Day => Some("daylight"),
        DayPart::Dawn | DayPart::Dusk => Some("twilight"),
        DayPart::Night if lit => Some("streetlit"),
        DayPart::Night => Some("dark"),
        DayPart::Unknown => None,
    }
}

fn seeded_params(leaf_id: &str, report: &CollisionReport, tokens: &[String]) -> Params {
    let mut params = Params::new();
    if leaf_id == "E" {
        if let Some(level) = light_level(report, tokens) {
            params.insert("level".into(), ParamValue::token(level));
        }
    }
    for (_, name, cues) in CUES.iter().filter(|(leaf, _, _)| *leaf == leaf_id) {
        let hit = cues
            .iter()
            .find(|(phrase, _)| contains_phrase(tokens, &tokenize(phrase)));
        if let Some((_, value)) = hit {
            params.insert(name.to_string(), ParamValue::token(value));
        }
    }
    params
}

/// One instance per tag, in leaf id order, all in a single parallel stage.
/// Parameters are seeded from the report: the day part sets the Ambient
/// Lighting level, the driving mode goes into the Software role note, and
/// narrative cues fill other enum parameters where they occur.
pub fn decompose_to_spec(
    report: &CollisionReport,
    annotation: &Annotation,
    taxonomy: &Taxonomy,
) -> Result<ScenarioSpec> {
    if annotation.report_id != report.report_id {
        return Err(GeneratorError::ReportMismatch {
            report: report.report_id.clone(),
            annotation: annotation.report_id.clone(),
        });
    }
    if annotation.tags.is_empty() {
        return Err(GeneratorError::EmptyTags {
            report_id: report.report_id.clone(),
        });
    }
    if annotation.taxonomy_version != taxonomy.version {
        return Err(GeneratorError::UnknownTaxonomyVersion {
            version: annotation.taxonomy_version,
        });
    }
    let tokens = tokenize(&report.narrative);
    let mut instances = Vec::with_capacity(annotation.tags.len());
    for tag in &annotation.tags {
        if taxonomy.leaf(tag).is_none() {
            return Err(GeneratorError::UnknownLeaf {
                leaf_id: tag.clone(),
                version: taxonomy.version,
            });
        }
        let mut notes = Vec::new();
        if annotation.primary.leaf_id() == Some(tag.as_str()) {
            notes.push("primary element".to_string());
        }
        if tag == "B" {
            notes.push(format!("driving mode: {}", report.driving_mode));
        }
        instances.push(ElementInstance {
            leaf_id: tag.clone(),
            params: seeded_params(tag, report, &tokens),
            role_note: notes.join("; "),
        });
    }
    let mut spec = ScenarioSpec {
        scenario_id: String::new(),
        taxonomy_version: taxonomy.version,
        stages: vec![(0..instances.len()).collect()],
        instances,
        seed: 0,
        provenance: Some(report.report_id.clone()),
        description: format!(
            "Recreation of report {} ({}, {}, {}, {})",
            report.report_id,
            report.manufacturer,
            report.location(),
            report.date,
            report.day_part()
        ),
    };
    validate_spec(&spec, taxonomy)?;
    spec.scenario_id = content_id(&spec);
    Ok(spec)
}
