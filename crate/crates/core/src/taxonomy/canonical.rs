use super::{CategoryNode, ElementClass, Taxonomy};

/// Clause appended to the Traffic Agents definition by the first revision
/// of the canonical taxonomy, covering the door-opening cases.
pub const TRAFFIC_AGENTS_EXPANSION: &str = "Also covers parked or inactive traffic agents \
and anything attached to or extending from a traffic agent, such as an opened door, a \
trailer, or a mounted attachment.";

fn category(id: &str, name: &str, parent: Option<&str>, description: &str) -> CategoryNode {
    CategoryNode {
        id: id.into(),
        name: name.into(),
        description: description.into(),
        parent: parent.map(Into::into),
    }
}

fn leaf(id: &str, name: &str, parent: &str, definition: &str, examples: &[&str], mitigations: &[&str]) -> ElementClass {
    ElementClass {
        id: id.into(),
        name: name.into(),
        parent: parent.into(),
        definition: definition.into(),
        example_refs: examples.iter().map(|s| s.to_string()).collect(),
        mitigation_refs: mitigations.iter().map(|s| s.to_string()).collect(),
    }
}

/// The version-1 taxonomy: three top-level categories and fifteen leaves,
/// lettered A through O.
pub fn canonical_taxonomy() -> Taxonomy {
    let categories = vec![
        category(
            "ego",
            "Ego",
            None,
            "The subject vehicle together with its driver; elements here act directly on \
             vehicle control.",
        ),
        category(
            "natural",
            "Natural Environment",
            None,
            "Exogenous elements not meaningfully shaped by the ego vehicle's activity and \
             marked by unpredictability.",
        ),
        category(
            "built",
            "Built Environment",
            None,
            "Exogenous elements constructed or controlled by people, with expected behavior \
             that holds while they function properly.",
        ),
        category(
            "road",
            "Road",
            Some("built"),
            "Everything the vehicle meets on the pavement: the surface itself, what sits on \
             or in it, and other vehicles.",
        ),
        category(
            "aerial",
            "Aerial",
            Some("built"),
            "Objects above the road surface, either moving through the air or hanging \
             in place.",
        ),
    ];

    let leaves = vec![
        leaf(
            "A",
            "Vehicle Mechanics",
            "ego",
            "Failure or degraded operation of the ego vehicle's mechanical and \
             electromechanical systems, including passive and active safety hardware such as \
             restraints, glazing, lighting and sensors.",
            &["Ford Pinto fuel system recall"],
            &[
                "FMVSS 216 roof crush resistance",
                "FMVSS 114 hood latch system",
                "FMVSS 302 interior flammability",
            ],
        ),
        leaf(
            "B",
            "Software Threats",
            "ego",
            "Faults, misbehavior or compromise of the vehicle's software, from perception and \
             planning errors to attacks reaching electronic control units over any interface.",
            &["Remote compromise of connected vehicle ECUs"],
            &["V-model development with functional safety requirements"],
        ),
        leaf(
            "C",
            "Consumables and Maintenance",
            "ego",
            "Hazards from worn, depleted or neglected consumables (fluids, tires, short-life \
             parts) and from skipped or improper maintenance of vehicle components.",
            &["Tire failure after deferred maintenance"],
            &["FMVSS 116 brake fluids", "FMVSS 138 tire pressure monitoring"],
        ),
        leaf(
            "D",
            "Driver",
            "ego",
            "The human occupant responsible for driving or supervising automation, including \
             inattention, misuse of automation and errors during hand-off between driver and \
             system.",
            &["Level 2 automation engaged without driver supervision"],
            &["Driver monitoring during automation hand-off"],
        ),
        leaf(
            "E",
            "Ambient Lighting",
            "natural",
            "The luminosity around the vehicle, dominated by sky light; unfavorable between \
             sunset and sunrise or when weather darkens the scene, limiting human and camera \
             perception.",
            &["Automation crash in low light at dawn"],
            &["FMVSS 108 lamps and reflective devices", "UNECE headlamp regulations"],
        ),
        leaf(
            "F",
            "Weather",
            "natural",
            "Atmospheric conditions such as precipitation, wind, humidity, particulates and \
             temperature that can degrade sensing or vehicle control.",
            &["Perception degradation in rain compared with a dry track"],
            &["Sensor performance evaluation under adverse weather"],
        ),
        leaf(
            "G",
            "Vulnerable Road Users",
            "natural",
            "People outside vehicles at elevated risk from traffic: pedestrians, wheelchair \
             users, and riders of scooters, bicycles and motorcycles, who may appear where \
             vehicles do not expect them.",
            &["Pedestrian struck and dragged by a driverless vehicle"],
            &["Radar and camera pedestrian detection with automatic braking"],
        ),
        leaf(
            "H",
            "Animals",
            "natural",
            "Wild or domestic animals, alone or in groups such as livestock, that lack the \
             traffic awareness of people and may enter the roadway.",
            &["Driverless vehicle striking a dog in an urban street"],
            &[
                "Wildlife crossings and fencing",
                "Thermal and image-based animal detection",
            ],
        ),
        leaf(
            "I",
            "Traffic Infrastructure",
            "built",
            "Elements for traffic management and navigation such as lane lines, curbs, \
             traffic lights and signs; both a source of information and objects to avoid.",
            &["Collision involving a signalized intersection"],
            &["Infrastructure-aware crash statistics"],
        ),
        leaf(
            "J",
            "Intrusions",
            "road",
            "Cavities below the expected road surface from erosion, wear or damage, such as \
             potholes.",
            &["Pothole damage to vehicle wheels"],
            &["Pothole detection and avoidance"],
        ),
        leaf(
            "K",
            "Protrusions",
            "road",
            "Road inconsistencies above the expected surface height: planned ones such as speed \
             bumps, curbs and rumble strips, and unplanned ones such as debris.",
            &["Debris on a travel lane"],
            &["Signage for planned protrusions"],
        ),
        leaf(
            "L",
            "Surface Condition",
            "road",
            "Material (asphalt, concrete, dirt), quality and state (dry, wet, icy, snowy) of \
             the traction surface, which change the required planning and control.",
            &["Wet road surface without active precipitation"],
            &["Pavement surface condition rating"],
        ),
        leaf(
            "M",
            "Traffic Agents",
            "road",
            "Other vehicles sharing the road, whether human-driven or automated, which may be \
             confused by or ignore signs and markings; a traffic agent and its driver are one \
             entity.",
            &["Truck and trailer turning across an automated vehicle's lane"],
            &["Worst-case trajectory prediction of surrounding vehicles"],
        ),
        leaf(
            "N",
            "Flying Objects",
            "aerial",
            "Airborne objects of any origin, size or speed on a trajectory that may require \
             evasive action.",
            &["Aircraft making an emergency landing on a highway"],
            &["Windshield impact resistance"],
        ),
        leaf(
            "O",
            "Suspended Objects",
            "aerial",
            "Still objects above the ground that stay in place unless disturbed, such as \
             parking gates, hanging cables and overpasses, requiring avoidance or clearance \
             checks.",
            &["Truck striking a low bridge"],
            &["Clearance height measurement"],
        ),
    ];

    Taxonomy {
        version: 1,
        categories,
        leaves,
        revisions: Vec::new(),
    }
}
