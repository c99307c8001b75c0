use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{check_param, GeneratorError, ParamValue, Result, ScenarioSpec, SplitMix64};

/// Largest number of values a range axis may enumerate.
const MAX_DOMAIN: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AxisValue {
    Number(f64),
    Token(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisDomain {
    /// Explicit values. Strings take the kind (enum or text) of the varied
    /// parameter, numbers take its unit.
    Values(Vec<AxisValue>),
    /// `start, start + step, ...` up to and including `end`.
    Range { start: f64, end: f64, step: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationAxis {
    pub instance_index: usize,
    pub param_name: String,
    pub domain: AxisDomain,
}

fn resolve_axis(spec: &ScenarioSpec, a: usize, axis: &VariationAxis) -> Result<Vec<ParamValue>> {
    let bad = |message: String| GeneratorError::BadAxis { axis: a, message };
    let inst = spec.instances.get(axis.instance_index).ok_or_else(|| {
        bad(format!(
            "instance {} does not exist; the spec has {}",
            axis.instance_index,
            spec.instances.len()
        ))
    })?;
    let current = inst.params.get(&axis.param_name).ok_or_else(|| {
        bad(format!(
            "instance {} ({}) has no parameter `{}`",
            axis.instance_index, inst.leaf_id, axis.param_name
        ))
    })?;
    let numbers: Vec<f64> = match &axis.domain {
        AxisDomain::Values(values) => {
            let out = values
                .iter()
                .map(|v| match (v, current) {
                    (AxisValue::Token(s), ParamValue::Enum { .. }) => Ok(ParamValue::token(s)),
                    (AxisValue::Token(s), ParamValue::Text { .. }) => Ok(ParamValue::text(s)),
                    (AxisValue::Number(n), ParamValue::Number { unit, .. }) => Ok(ParamValue::number(*n, unit)),
                    (v, c) => Err(bad(format!("value {v:?} does not fit a {} parameter", c.kind()))),
                })
                .collect::<Result<Vec<_>>>()?;
            return finish(spec, a, axis, out);
        }
        AxisDomain::Range { start, end, step } => {
            if !(start.is_finite() && end.is_finite() && step.is_finite()) || *step <= 0.0 || start > end {
                return Err(bad(format!("range {start}..={end} step {step} is empty or not finite")));
            }
            let n = ((end - start) / step + 1e-9).floor() + 1.0;
            if n > MAX_DOMAIN as f64 {
                return Err(bad(format!("range has more than {MAX_DOMAIN} values")));
            }
            (0..n as usize).map(|i| start + i as f64 * step).collect()
        }
    };
    let ParamValue::Number { unit, .. } = current else {
        return Err(bad(format!(
            "a numeric range cannot vary a {} parameter",
            current.kind()
        )));
    };
    let out = numbers.into_iter().map(|n| ParamValue::number(n, unit)).collect();
    finish(spec, a, axis, out)
}

fn finish(spec: &ScenarioSpec, a: usize, axis: &VariationAxis, values: Vec<ParamValue>) -> Result<Vec<ParamValue>> {
    let bad = |message: String| GeneratorError::BadAxis { axis: a, message };
    if values.is_empty() {
        return Err(bad("domain is empty".into()));
    }
    let leaf = &spec.instances[axis.instance_index].leaf_id;
    for (i, v) in values.iter().enumerate() {
        check_param(axis.instance_index, leaf, &axis.param_name, v).map_err(|e| bad(e.to_string()))?;
        if values[..i].contains(v) {
            return Err(bad(format!("value {v} is listed twice")));
        }
    }
    Ok(values)
}

/// `count` copies of `spec` that differ only in the varied parameters and
/// the scenario id. Axis `j` visits its domain in an order shuffled by
/// `SplitMix64::for_task(seed, j)`, cycling when `count` exceeds the domain,
/// so every value appears once `count` reaches the domain size.
pub fn generate_variants(
    spec: &ScenarioSpec,
    axes: &[VariationAxis],
    count: usize,
    seed: u64,
) -> Result<Vec<ScenarioSpec>> {
    if count == 0 {
        return Err(GeneratorError::InvalidCount);
    }
    let mut targets = BTreeSet::new();
    let mut domains = Vec::with_capacity(axes.len());
    for (a, axis) in axes.iter().enumerate() {
        if !targets.insert((axis.instance_index, axis.param_name.as_str())) {
            return Err(GeneratorError::BadAxis {
                axis: a,
                message: "another axis already varies this parameter".into(),
            });
        }
        let values = resolve_axis(spec, a, axis)?;
        let order = SplitMix64::for_task(seed, a as u64).permutation(values.len());
        domains.push((values, order));
    }
    Ok((0..count)
        .map(|i| {
            let mut v = spec.clone();
            v.scenario_id = format!("{}-s{seed}-v{i}", spec.scenario_id);
            for (axis, (values, order)) in axes.iter().zip(&domains) {
                let value = values[order[i % values.len()]].clone();
                v.instances[axis.instance_index]
                    .params
                    .insert(axis.param_name.clone(), value);
            }
            v
        })
        .collect())
}
