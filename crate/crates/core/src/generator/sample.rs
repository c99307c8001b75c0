use super::{content_id, ElementInstance, GeneratorError, ParamKind, ParamValue, Result, ScenarioSpec, SplitMix64};
use crate::annotation::CoverageReport;
use crate::generator::param_schema;
use crate::taxonomy::Taxonomy;

/// `(leaf id, primary count, weight)` in tree pre-order, with weight
/// `1 / (count + 1)`. Leaves missing from `coverage` count as 0.
pub fn coverage_weights(coverage: &CoverageReport, taxonomy: &Taxonomy) -> Vec<(String, u64, f64)> {
    taxonomy
        .leaves_preorder()
        .into_iter()
        .map(|l| {
            let c = coverage.primary_count(&l.name);
            (l.id.clone(), c, 1.0 / (c as f64 + 1.0))
        })
        .collect()
}

struct Sampler {
    leaves: Vec<(String, u64, f64)>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(coverage: &CoverageReport, taxonomy: &Taxonomy) -> Sampler {
        let leaves = coverage_weights(coverage, taxonomy);
        let mut total = 0.0;
        let cumulative = leaves
            .iter()
            .map(|(_, _, w)| {
                total += w;
                total
            })
            .collect();
        Sampler { leaves, cumulative }
    }

    /// Index of the first leaf whose cumulative weight exceeds `u * total`.
    fn pick(&self, rng: &mut SplitMix64) -> usize {
        let total = self.cumulative.last().copied().unwrap_or(0.0);
        let x = rng.next_f64() * total;
        self.cumulative
            .iter()
            .position(|&c| c > x)
            .unwrap_or(self.leaves.len() - 1)
    }
}

/// Only the drawn primary leaf ids of [`sample_for_coverage`].
pub fn sample_primaries(coverage: &CoverageReport, taxonomy: &Taxonomy, k: usize, seed: u64) -> Vec<String> {
    let sampler = Sampler::new(coverage, taxonomy);
    if sampler.leaves.is_empty() {
        return Vec::new();
    }
    (0..k as u64)
        .map(|i| {
            sampler.leaves[sampler.pick(&mut SplitMix64::for_task(seed, i))]
                .0
                .clone()
        })
        .collect()
}

/// `k` single-instance specs. Draw `i` uses `SplitMix64::for_task(seed, i)`:
/// its first value picks the leaf with probability proportional to
/// `1 / (primary count + 1)`, and later values fill the leaf's declared
/// parameters in schema order. The spec's seed is that draw's seed.
pub fn sample_for_coverage(
    coverage: &CoverageReport,
    taxonomy: &Taxonomy,
    k: usize,
    seed: u64,
) -> Result<Vec<ScenarioSpec>> {
    if k == 0 {
        return Err(GeneratorError::InvalidCount);
    }
    let sampler = Sampler::new(coverage, taxonomy);
    if sampler.leaves.is_empty() {
        return Err(GeneratorError::NoElements);
    }
    let mut out = Vec::with_capacity(k);
    for i in 0..k as u64 {
        let draw_seed = SplitMix64::task_seed(seed, i);
        let mut rng = SplitMix64::new(draw_seed);
        let (leaf_id, count, _) = &sampler.leaves[sampler.pick(&mut rng)];
        let mut inst = ElementInstance::new(leaf_id);
        inst.role_note = "primary element".into();
        for p in param_schema(leaf_id) {
            let value = match p.kind {
                ParamKind::Enum(values) => ParamValue::token(values[rng.below(values.len() as u64) as usize]),
                ParamKind::Number { unit, min, max, step } => {
                    let steps = ((max - min) / step + 1e-9).floor() as u64 + 1;
                    ParamValue::number(min + rng.below(steps) as f64 * step, unit)
                }
            };
            inst.params.insert(p.name.into(), value);
        }
        let name = taxonomy.leaf(leaf_id).map_or(leaf_id.as_str(), |l| l.name.as_str());
        let mut spec = ScenarioSpec {
            scenario_id: String::new(),
            taxonomy_version: taxonomy.version,
            instances: vec![inst],
            stages: vec![vec![0]],
            seed: draw_seed,
            provenance: None,
            description: format!(
                "Coverage sample {}: {name}, primary in {count} annotated reports",
                i + 1
            ),
        };
        spec.scenario_id = content_id(&spec);
        out.push(spec);
    }
    Ok(out)
}
