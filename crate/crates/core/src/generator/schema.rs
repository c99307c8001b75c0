//! Per-leaf parameter vocabularies for element instances of the canonical
//! leaves. Instances may carry further free-form parameters; those are only
//! checked for well-formedness.

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamKind {
    Enum(&'static [&'static str]),
    /// Values on the grid `min + i * step` up to `max`.
    Number {
        unit: &'static str,
        min: f64,
        max: f64,
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
}

const fn e(name: &'static str, values: &'static [&'static str]) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Enum(values),
    }
}

const fn n(name: &'static str, unit: &'static str, min: f64, max: f64, step: f64) -> ParamSpec {
    ParamSpec {
        name,
        kind: ParamKind::Number { unit, min, max, step },
    }
}

/// Ambient light level bands, brightest first.
pub const LIGHT_LEVELS: &[&str] = &["daylight", "overcast", "twilight", "streetlit", "dark"];

/// Parameters declared for `leaf_id`; empty for leaves outside the
/// canonical set.
pub fn param_schema(leaf_id: &str) -> &'static [ParamSpec] {
    const A: &[ParamSpec] = &[e(
        "component",
        &["brakes", "steering", "powertrain", "suspension", "lighting"],
    )];
    const B: &[ParamSpec] = &[e(
        "subsystem",
        &["perception", "prediction", "planning", "control", "security"],
    )];
    const C: &[ParamSpec] = &[e("item", &["tires", "fluids", "wipers", "bulbs"])];
    const D: &[ParamSpec] = &[e("state", &["attentive", "distracted", "drowsy", "impaired"])];
    const E: &[ParamSpec] = &[e("level", LIGHT_LEVELS)];
    const F: &[ParamSpec] = &[e("condition", &["clear", "rain", "fog", "snow", "wind", "hail"])];
    const G: &[ParamSpec] = &[
        e(
            "kind",
            &[
                "pedestrian",
                "cyclist",
                "wheelchair_user",
                "scooter_rider",
                "motorcyclist",
            ],
        ),
        e("behavior", &["jaywalk", "crosswalk", "dodge", "stationary", "sidewalk"]),
    ];
    const H: &[ParamSpec] = &[
        e("kind", &["dog", "deer", "livestock", "bird", "other"]),
        e("behavior", &["crossing", "stationary", "darting"]),
    ];
    const I: &[ParamSpec] = &[e(
        "feature",
        &[
            "traffic_light",
            "stop_sign",
            "lane_markings",
            "curb",
            "barrier",
            "gate",
            "sign",
        ],
    )];
    const J: &[ParamSpec] = &[
        e("kind", &["pothole", "sinkhole", "ditch", "manhole"]),
        n("depth", "cm", 1.0, 200.0, 1.0),
    ];
    const K: &[ParamSpec] = &[
        e("kind", &["speed_bump", "debris", "rock", "raised_edge"]),
        n("height", "cm", 1.0, 100.0, 1.0),
    ];
    const L: &[ParamSpec] = &[
        e("state", &["dry", "wet", "icy", "snowy"]),
        e("material", &["asphalt", "concrete", "dirt"]),
    ];
    const M: &[ParamSpec] = &[
        e("kind", &["car", "truck", "bus", "van", "motorcycle", "trailer", "taxi"]),
        e(
            "behavior",
            &[
                "cruising",
                "turning",
                "braking",
                "cutting_in",
                "reversing",
                "stationary",
                "door_opening",
            ],
        ),
    ];
    const N: &[ParamSpec] = &[
        e("kind", &["debris", "bird", "projectile", "drone"]),
        n("speed", "km/h", 5.0, 200.0, 5.0),
    ];
    const O: &[ParamSpec] = &[
        e("kind", &["branch", "cable", "sign", "gate_arm"]),
        n("clearance", "cm", 50.0, 1000.0, 10.0),
    ];
    match leaf_id {
        "A" => A,
        "B" => B,
        "C" => C,
        "D" => D,
        "E" => E,
        "F" => F,
        "G" => G,
        "H" => H,
        "I" => I,
        "J" => J,
        "K" => K,
        "L" => L,
        "M" => M,
        "N" => N,
        "O" => O,
        _ => &[],
    }
}

pub fn param_spec(leaf_id: &str, name: &str) -> Option<&'static ParamSpec> {
    param_schema(leaf_id).iter().find(|p| p.name == name)
}
