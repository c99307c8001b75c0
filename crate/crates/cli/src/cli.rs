use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use advtax_core::annotation::{Annotation, AnnotationWarning, Difficulty, Primary, ReclassificationPlan};
use advtax_core::generator::{
    compose, export_spec, generate_variants, import_spec, param_spec, AxisDomain, AxisValue, ElementInstance,
    ParamKind, ParamValue, ScenarioSpec, StagingPlan, VariationAxis,
};
use advtax_core::taxonomy::{self, canonical_taxonomy, diff, validate_taxonomy, NewLeaf, Taxonomy, Violation};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{parse_listen, WorkspaceConfig};
use crate::error::{Result, WorkspaceError};
use crate::server;
use crate::workspace::{self, read_taxonomy_file, FixtureSet, Workspace};

#[derive(Debug, Parser)]
#[command(name = "advtax", version, about = "Adversarial element taxonomy workbench")]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Workspace directory; overrides ADVTAX_DATA_DIR and the config file.
    #[arg(long, global = true)]
    pub data_dir: Option<PathBuf>,
    /// TOML config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a workspace, optionally seeded with bundled fixtures.
    Init {
        #[arg(long, value_enum)]
        fixtures: Option<FixtureSet>,
    },
    /// Inspect, validate and revise the taxonomy.
    #[command(subcommand)]
    Taxonomy(TaxonomyCmd),
    /// Ingest collision report CSVs.
    #[command(subcommand)]
    Corpus(CorpusCmd),
    /// Record and import annotations.
    #[command(subcommand)]
    Annotate(AnnotateCmd),
    /// Coverage, difficulty, success and tagger statistics.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Ranked element suggestions for one report's narrative.
    Suggest { report_id: String },
    /// Compose, decompose, vary and sample scenarios.
    #[command(subcommand)]
    Generate(GenerateCmd),
    /// Serve the HTTP API.
    Serve {
        /// host:port; defaults to the configured listen address.
        #[arg(long)]
        listen: Option<String>,
        /// Permit binding a non-loopback address.
        #[arg(long)]
        allow_remote: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum TaxonomyCmd {
    /// Check structure; defaults to the workspace taxonomy.
    Validate { file: Option<PathBuf> },
    /// Print the taxonomy document.
    Show { file: Option<PathBuf> },
    /// Replace a leaf definition.
    Amend {
        leaf_id: String,
        #[arg(long)]
        definition: String,
        #[arg(long)]
        rationale: String,
        #[arg(long)]
        expected_version: Option<u32>,
    },
    /// Add a leaf under a category path such as `built/road`.
    Add {
        parent: String,
        #[command(flatten)]
        leaf: LeafArgs,
        #[arg(long)]
        rationale: String,
        #[arg(long)]
        expected_version: Option<u32>,
    },
    /// Revision entries turning FROM into TO. Each is a version number of
    /// the workspace taxonomy or a taxonomy file; TO defaults to current.
    Diff { from: String, to: Option<String> },
}

#[derive(Debug, Args)]
pub struct LeafArgs {
    #[arg(long)]
    id: String,
    #[arg(long)]
    name: String,
    #[arg(long)]
    definition: String,
    #[arg(long = "example-ref")]
    example_refs: Vec<String>,
    #[arg(long = "mitigation-ref")]
    mitigation_refs: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum CorpusCmd {
    /// Parse a report CSV and make its accepted rows the workspace corpus.
    Ingest {
        csv: PathBuf,
        #[arg(long)]
        dry_run: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnnotateCmd {
    /// Record one annotation for a report.
    Add {
        report_id: String,
        #[arg(long, value_delimiter = ',')]
        tags: Vec<String>,
        /// Leaf id or `Unclassified`.
        #[arg(long)]
        primary: String,
        #[arg(long)]
        difficulty: u8,
        /// Defaults to the gold annotator.
        #[arg(long)]
        annotator: Option<String>,
        #[arg(long, default_value = "")]
        notes: String,
        /// Defaults to the current taxonomy version.
        #[arg(long)]
        taxonomy_version: Option<u32>,
    },
    /// Append annotation log records from an NDJSON file.
    Import { file: PathBuf },
    /// Apply a JSON reclassification plan.
    Reclassify { plan: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum StatsCmd {
    /// Reports per leaf, with unclassified count.
    Coverage {
        /// Taxonomy version to evaluate against, counting only annotations
        /// made under it or earlier.
        #[arg(long)]
        as_of: Option<u32>,
    },
    /// Reports per difficulty (element count).
    Difficulty {
        #[arg(long)]
        as_of: Option<u32>,
    },
    /// Share of reports classified by at least one leaf.
    Success {
        #[arg(long)]
        as_of: Option<u32>,
    },
    /// Tagger recall and precision against the effective annotations.
    Tagger,
}

#[derive(Debug, Subcommand)]
pub enum GenerateCmd {
    /// Build a scenario from leaf ids.
    Compose {
        #[arg(required = true)]
        leaves: Vec<String>,
        /// `parallel`, `series`, or stages such as `0,1;2`.
        #[arg(long, default_value = "parallel", value_parser = parse_staging)]
        staging: StagingPlan,
        /// `INDEX:NAME=VALUE`, typed by the leaf's parameter schema.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(usize, String, String)>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scenario from a report and its effective annotation.
    Decompose {
        report_id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Vary parameters of a scenario document.
    Variants {
        spec: PathBuf,
        /// `INDEX:NAME=v1,v2,...` or `INDEX:NAME=START..END/STEP`.
        #[arg(long = "axis", required = true, value_parser = parse_axis)]
        axes: Vec<VariationAxis>,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Single-element scenarios weighted toward rarely seen primaries.
    Sample {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn parse_staging(s: &str) -> std::result::Result<StagingPlan, String> {
    match s {
        "parallel" => Ok(StagingPlan::PARALLEL),
        "series" => Ok(StagingPlan::SERIES),
        _ => s
            .split(';')
            .map(|stage| {
                stage
                    .split(',')
                    .map(|i| {
                        i.trim()
                            .parse::<usize>()
                            .map_err(|_| format!("`{i}` is not an element index"))
                    })
                    .collect()
            })
            .collect::<std::result::Result<Vec<Vec<usize>>, String>>()
            .map(StagingPlan::Stages),
    }
}

fn split_target(s: &str) -> std::result::Result<(usize, String, String), String> {
    let (index, rest) = s.split_once(':').ok_or("expected INDEX:NAME=VALUE")?;
    let (name, value) = rest.split_once('=').ok_or("expected INDEX:NAME=VALUE")?;
    let index = index
        .trim()
        .parse()
        .map_err(|_| format!("`{index}` is not an element index"))?;
    if name.trim().is_empty() {
        return Err("parameter name is empty".into());
    }
    Ok((index, name.trim().to_string(), value.to_string()))
}

fn parse_param(s: &str) -> std::result::Result<(usize, String, String), String> {
    split_target(s)
}

fn axis_value(s: &str) -> AxisValue {
    match s.trim().parse::<f64>() {
        Ok(x) => AxisValue::Number(x),
        Err(_) => AxisValue::Token(s.trim().to_string()),
    }
}

fn parse_axis(s: &str) -> std::result::Result<VariationAxis, String> {
    let (instance_index, param_name, value) = split_target(s)?;
    let domain = match value.split_once("..") {
        Some((start, rest)) => {
            let (end, step) = rest.split_once('/').ok_or("range needs a step: START..END/STEP")?;
            let num = |x: &str| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number"));
            AxisDomain::Range {
                start: num(start)?,
                end: num(end)?,
                step: num(step)?,
            }
        }
        None => AxisDomain::Values(value.split(',').map(axis_value).collect()),
    };
    Ok(VariationAxis {
        instance_index,
        param_name,
        domain,
    })
}

/// What a command prints. `json` of `None` means `text` is already JSON.
struct Output {
    text: String,
    json: Option<Value>,
    status: i32,
}

impl Output {
    fn new(text: impl Into<String>, json: impl Serialize) -> Self {
        Output {
            text: text.into(),
            json: Some(serde_json::to_value(json).expect("output serializes")),
            status: 0,
        }
    }

    fn document(text: String) -> Self {
        Output {
            text,
            json: None,
            status: 0,
        }
    }
}

/// Parse `args` and run. `env_data_dir` is the value of `ADVTAX_DATA_DIR`.
/// Exit codes: 0 success, 1 domain error, 2 usage error.
pub fn run<I, T>(args: I, env_data_dir: Option<PathBuf>, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let mut text = e.render().to_string();
            if code != 0 && !text.contains("Usage:") {
                text.push_str(&format!(
                    "\n{}\n",
                    <Cli as clap::CommandFactory>::command().render_usage()
                ));
            }
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let format = cli.format;
    match execute(cli, env_data_dir, out) {
        Ok(o) => {
            let text = match (format, o.json) {
                (Format::Json, Some(v)) => serde_json::to_string_pretty(&v).expect("json renders"),
                _ => o.text,
            };
            let _ = out.write_all(text.as_bytes());
            if !text.ends_with('\n') {
                let _ = out.write_all(b"\n");
            }
            o.status
        }
        Err(e) => {
            let _ = match format {
                Format::Json => writeln!(err, "{}", e.body()),
                Format::Text => writeln!(err, "error[{}]: {e}", e.code()),
            };
            1
        }
    }
}

fn execute(cli: Cli, env_data_dir: Option<PathBuf>, out: &mut dyn Write) -> Result<Output> {
    let config = WorkspaceConfig::resolve(cli.config.as_deref(), env_data_dir, cli.data_dir)?;
    let load = || Workspace::load(config.clone());
    match cli.command {
        Command::Init { fixtures } => {
            let files = workspace::init(&config, fixtures)?;
            let text = files
                .iter()
                .map(|p| format!("wrote {}\n", p.display()))
                .collect::<String>();
            Ok(Output::new(text, json!({ "files": files })))
        }
        Command::Taxonomy(cmd) => taxonomy_cmd(cmd, &config),
        Command::Corpus(CorpusCmd::Ingest { csv, dry_run }) => {
            let mut ws = load()?;
            let s = ws.ingest(&csv, dry_run)?;
            let mut text = format!(
                "{} rows: {} accepted, {} excluded\n",
                s.rows,
                s.accepted,
                s.excluded.len()
            );
            for x in &s.excluded {
                text.push_str(&format!("  row {}: {:?} ({})\n", x.row, x.reason, x.detail));
            }
            if let Some(p) = &s.written {
                text.push_str(&format!("wrote {} reports to {}\n", s.accepted, p.display()));
            }
            Ok(Output::new(text, s))
        }
        Command::Annotate(cmd) => annotate_cmd(cmd, load()?),
        Command::Stats(cmd) => stats_cmd(cmd, &load()?),
        Command::Suggest { report_id } => {
            let ws = load()?;
            let view = ws.suggestions(&report_id)?;
            let mut text = format!("{} (lexicon {})\n", view.report_id, view.lexicon_version);
            for s in &view.suggestions {
                let name = ws.taxonomy.leaf(&s.leaf_id).map_or("", |l| l.name.as_str());
                text.push_str(&format!(
                    "  {:<3}{:<32}{:>6}  {}\n",
                    s.leaf_id,
                    name,
                    advtax_core::tagger::Weight(s.score).to_string(),
                    s.matched.join(", ")
                ));
            }
            if view.suggestions.is_empty() {
                text.push_str("  no suggestions\n");
            }
            Ok(Output::new(text, view))
        }
        Command::Generate(cmd) => generate_cmd(cmd, &load()?),
        Command::Serve { listen, allow_remote } => {
            let addr = match listen {
                Some(l) => parse_listen(&l)?,
                None => config.listen_address,
            };
            server::check_bind(addr, allow_remote).map_err(|e| WorkspaceError::BadRequest {
                field: "listen".into(),
                message: e.to_string(),
            })?;
            let ws = load()?;
            let runtime = tokio::runtime::Runtime::new().map_err(|source| WorkspaceError::FileUnwritable {
                path: "tokio runtime".into(),
                source,
            })?;
            runtime
                .block_on(server::serve(ws, addr, |bound| {
                    let _ = writeln!(out, "listening on http://{bound}");
                    let _ = out.flush();
                }))
                .map_err(|source| WorkspaceError::FileUnwritable {
                    path: addr.to_string(),
                    source,
                })?;
            Ok(Output::new("stopped", json!({ "stopped": true })))
        }
    }
}

fn render_tree(t: &Taxonomy) -> String {
    fn category(t: &Taxonomy, id: &str, depth: usize, out: &mut String) {
        let indent = "  ".repeat(depth);
        for l in t.child_leaves(id) {
            out.push_str(&format!("{indent}  {:<3}{}\n", l.id, l.name));
        }
        for c in t.child_categories(id) {
            out.push_str(&format!("{indent}  {} [{}]\n", c.name, c.id));
            category(t, &c.id, depth + 1, out);
        }
    }
    let mut out = format!("Taxonomy version {} ({} leaves)\n", t.version, t.leaves.len());
    for c in t.top_level() {
        out.push_str(&format!("{} [{}]\n", c.name, c.id));
        category(t, &c.id, 0, &mut out);
    }
    out
}

fn violations_output(violations: &[Violation]) -> Output {
    let mut text = format!("FAIL: {} violations\n", violations.len());
    for v in violations {
        text.push_str(&format!("  {} at {}: {}\n", v.code, v.path, v.message));
    }
    let mut o = Output::new(text, json!({ "ok": false, "violations": violations }));
    o.status = 1;
    o
}

/// A version of the workspace taxonomy, or a taxonomy file.
fn taxonomy_ref(s: &str, current: &Taxonomy) -> Result<Taxonomy> {
    match s.parse::<u32>() {
        Ok(v) => Ok(current.at_version(v)?),
        Err(_) => read_taxonomy_file(Path::new(s)),
    }
}

fn current_taxonomy(config: &WorkspaceConfig) -> Result<Taxonomy> {
    if config.taxonomy_file.exists() {
        read_taxonomy_file(&config.taxonomy_file)
    } else {
        Ok(canonical_taxonomy())
    }
}

fn taxonomy_cmd(cmd: TaxonomyCmd, config: &WorkspaceConfig) -> Result<Output> {
    match cmd {
        TaxonomyCmd::Validate { file } => {
            let loaded = match &file {
                Some(path) => read_taxonomy_file(path),
                None => current_taxonomy(config),
            };
            let t = match loaded {
                Ok(t) => t,
                Err(WorkspaceError::TaxonomyFile {
                    source: taxonomy::TaxonomyError::Validation(v),
                    ..
                }) => return Ok(violations_output(&v)),
                Err(e) => return Err(e),
            };
            let violations = validate_taxonomy(&t);
            if !violations.is_empty() {
                return Ok(violations_output(&violations));
            }
            let top = t.top_level().count();
            let sub = t.categories.len() - top;
            Ok(Output::new(
                format!("OK: {} leaves, {} categories", t.leaves.len(), top),
                json!({ "ok": true, "version": t.version, "leaves": t.leaves.len(), "categories": top, "subcategories": sub }),
            ))
        }
        TaxonomyCmd::Show { file } => {
            let t = match &file {
                Some(path) => read_taxonomy_file(path)?,
                None => current_taxonomy(config)?,
            };
            let doc: Value = serde_json::from_str(&taxonomy::serialize(&t)).expect("document is JSON");
            Ok(Output::new(render_tree(&t), doc))
        }
        TaxonomyCmd::Amend {
            leaf_id,
            definition,
            rationale,
            expected_version,
        } => {
            let mut ws = Workspace::load(config.clone())?;
            let t = ws.amend(&leaf_id, &definition, &rationale, expected_version)?;
            Ok(revised(t))
        }
        TaxonomyCmd::Add {
            parent,
            leaf,
            rationale,
            expected_version,
        } => {
            let mut ws = Workspace::load(config.clone())?;
            let new = NewLeaf {
                id: leaf.id,
                name: leaf.name,
                definition: leaf.definition,
                example_refs: leaf.example_refs,
                mitigation_refs: leaf.mitigation_refs,
            };
            let t = ws.add_leaf(&parent, new, &rationale, expected_version)?;
            Ok(revised(t))
        }
        TaxonomyCmd::Diff { from, to } => {
            let current = current_taxonomy(config)?;
            let from = taxonomy_ref(&from, &current)?;
            let to = match to {
                Some(s) => taxonomy_ref(&s, &current)?,
                None => current,
            };
            let entries = diff(&from, &to)?;
            let mut text = format!(
                "version {} -> {}: {} entries\n",
                from.version,
                to.version,
                entries.len()
            );
            for e in &entries {
                text.push_str(&format!("  {} {}: {}\n", e.kind.as_str(), e.target_id, e.rationale));
            }
            Ok(Output::new(text, entries))
        }
    }
}

fn revised(t: &Taxonomy) -> Output {
    let last = t.revisions.last().expect("a revision was just made");
    let doc: Value = serde_json::from_str(&taxonomy::serialize(t)).expect("document is JSON");
    Output::new(
        format!(
            "taxonomy now at version {} ({} {})",
            t.version,
            last.kind.as_str(),
            last.target_id
        ),
        doc,
    )
}

fn warning_text(w: &AnnotationWarning) -> String {
    match w {
        AnnotationWarning::IndecisiveWithPrimary { report_id, primary } => {
            format!("warning: {report_id} is graded Indecisive but has primary {primary}\n")
        }
    }
}

fn annotate_cmd(cmd: AnnotateCmd, mut ws: Workspace) -> Result<Output> {
    match cmd {
        AnnotateCmd::Add {
            report_id,
            tags,
            primary,
            difficulty,
            annotator,
            notes,
            taxonomy_version,
        } => {
            let a = Annotation {
                report_id,
                taxonomy_version: taxonomy_version.unwrap_or(ws.taxonomy.version),
                tags: tags.into_iter().filter(|t| !t.trim().is_empty()).collect(),
                primary: Primary::from(primary.as_str()),
                difficulty,
                annotator: annotator.unwrap_or_else(|| ws.config.gold_annotator.clone()),
                notes,
            };
            let r = ws.record_annotation(a)?;
            let label = Difficulty::from_grade(r.annotation.difficulty).map_or("", Difficulty::label);
            let mut text = format!(
                "recorded {} (primary {}, difficulty {} {})\n",
                r.annotation.report_id, r.annotation.primary, r.annotation.difficulty, label
            );
            r.warnings.iter().for_each(|w| text.push_str(&warning_text(w)));
            Ok(Output::new(text, r))
        }
        AnnotateCmd::Import { file } => {
            let text = std::fs::read_to_string(&file).map_err(|source| WorkspaceError::FileUnreadable {
                path: file.display().to_string(),
                source,
            })?;
            let s = ws.import_log(&text)?;
            Ok(Output::new(
                format!("appended {} records for {} reports", s.records, s.reports),
                s,
            ))
        }
        AnnotateCmd::Reclassify { plan } => {
            let text = std::fs::read_to_string(&plan).map_err(|source| WorkspaceError::FileUnreadable {
                path: plan.display().to_string(),
                source,
            })?;
            let plan: ReclassificationPlan = serde_json::from_str(&text).map_err(|e| WorkspaceError::BadRequest {
                field: "plan".into(),
                message: e.to_string(),
            })?;
            let s = ws.reclassify(&plan)?;
            Ok(Output::new(
                format!(
                    "reclassified {} reports under taxonomy version {}",
                    s.reports, plan.target_version
                ),
                s,
            ))
        }
    }
}

fn stats_cmd(cmd: StatsCmd, ws: &Workspace) -> Result<Output> {
    match cmd {
        StatsCmd::Coverage { as_of } => {
            let c = ws.coverage(as_of)?;
            let mut text = format!(
                "Coverage over {} reports (taxonomy version {})\n",
                c.total, c.taxonomy_version
            );
            for (name, n) in &c.primary_counts {
                let tagged = c.tag_counts.get(name).copied().unwrap_or(0);
                text.push_str(&format!("  {name:<32}{n:>4}   tagged {tagged}\n"));
            }
            text.push_str(&format!("  {:<32}{:>4}\n", taxonomy::UNCLASSIFIED, c.unclassified));
            text.push_str(&format!("Success rate: {}\n", c.success_rate));
            text.push_str(&format!(
                "Single element: {}, multi element: {}\n",
                c.single_element, c.multi_element
            ));
            Ok(Output::new(text, c))
        }
        StatsCmd::Difficulty { as_of } => {
            let c = ws.coverage(as_of)?;
            let rows: Vec<Value> = Difficulty::ALL
                .iter()
                .map(|d| {
                    let n = c.difficulty_histogram.get(&d.grade()).copied().unwrap_or(0);
                    json!({ "grade": d.grade(), "label": d.label(), "count": n })
                })
                .collect();
            let text = rows
                .iter()
                .map(|r| {
                    format!(
                        "{} {:<11}{:>4}\n",
                        r["grade"],
                        r["label"].as_str().unwrap_or(""),
                        r["count"]
                    )
                })
                .collect::<String>();
            Ok(Output::new(text, rows))
        }
        StatsCmd::Success { as_of } => {
            let c = ws.coverage(as_of)?;
            Ok(Output::new(c.success_rate.to_string(), c.success_rate))
        }
        StatsCmd::Tagger => {
            let e = ws.tagger_evaluation();
            let ratio = |r: Option<_>| r.map_or("n/a".to_string(), |r| advtax_core::tagger::Weight(r).to_string());
            let mut text = format!(
                "micro recall {}, micro precision {} over {} reports\n",
                ratio(e.micro_recall),
                ratio(e.micro_precision),
                e.per_report.len()
            );
            for l in &e.per_leaf {
                text.push_str(&format!(
                    "  {:<3} recall {:<8} precision {}\n",
                    l.leaf_id,
                    ratio(l.recall),
                    ratio(l.precision)
                ));
            }
            Ok(Output::new(text, e))
        }
    }
}

fn write_specs(specs: &[ScenarioSpec], out_dir: Option<&Path>) -> Result<Output> {
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|source| WorkspaceError::FileUnwritable {
                path: dir.display().to_string(),
                source,
            })?;
            let mut paths = Vec::new();
            for s in specs {
                let p = dir.join(format!("{}.json", s.scenario_id));
                workspace::write_atomic(&p, &export_spec(s))?;
                paths.push(p);
            }
            let text = paths
                .iter()
                .map(|p| format!("wrote {}\n", p.display()))
                .collect::<String>();
            Ok(Output::new(text, json!({ "files": paths })))
        }
        None => {
            let mut text = serde_json::to_string_pretty(specs).expect("specs serialize");
            text.push('\n');
            Ok(Output::document(text))
        }
    }
}

fn write_spec(spec: &ScenarioSpec, out: Option<&Path>) -> Result<Output> {
    let doc = export_spec(spec);
    match out {
        Some(p) => {
            workspace::write_atomic(p, &doc)?;
            Ok(Output::new(
                format!("wrote {} ({})", p.display(), spec.scenario_id),
                json!({ "file": p, "scenario_id": spec.scenario_id }),
            ))
        }
        None => Ok(Output::document(doc)),
    }
}

fn typed_param(leaf_id: &str, name: &str, value: &str) -> Result<ParamValue> {
    match param_spec(leaf_id, name).map(|p| p.kind) {
        Some(ParamKind::Number { unit, .. }) => {
            let x = value.trim().parse::<f64>().map_err(|_| WorkspaceError::BadRequest {
                field: format!("param {name}"),
                message: format!("`{value}` is not a number"),
            })?;
            Ok(ParamValue::number(x, unit))
        }
        Some(ParamKind::Enum(_)) => Ok(ParamValue::token(value.trim())),
        None => Ok(ParamValue::text(value)),
    }
}

fn generate_cmd(cmd: GenerateCmd, ws: &Workspace) -> Result<Output> {
    match cmd {
        GenerateCmd::Compose {
            leaves,
            staging,
            params,
            out,
        } => {
            let mut elements: Vec<ElementInstance> = leaves.iter().map(|id| ElementInstance::new(id)).collect();
            for (index, name, value) in params {
                let Some(inst) = elements.get_mut(index) else {
                    return Err(WorkspaceError::BadRequest {
                        field: format!("param {index}:{name}"),
                        message: format!("there are only {} elements", leaves.len()),
                    });
                };
                let v = typed_param(&inst.leaf_id, &name, &value)?;
                inst.params.insert(name, v);
            }
            let spec = compose(&ws.taxonomy, elements, &staging)?;
            write_spec(&spec, out.as_deref())
        }
        GenerateCmd::Decompose { report_id, out } => write_spec(&ws.decompose(&report_id)?, out.as_deref()),
        GenerateCmd::Variants {
            spec,
            axes,
            count,
            seed,
            out_dir,
        } => {
            let text = std::fs::read_to_string(&spec).map_err(|source| WorkspaceError::FileUnreadable {
                path: spec.display().to_string(),
                source,
            })?;
            let base = import_spec(&text, ws.store.registry())?;
            let variants = generate_variants(&base, &axes, count, seed)?;
            write_specs(&variants, out_dir.as_deref())
        }
        GenerateCmd::Sample { k, seed, out_dir } => write_specs(&ws.sample(k, seed)?, out_dir.as_deref()),
    }
}
