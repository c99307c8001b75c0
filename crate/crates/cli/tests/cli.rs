mod common;

use std::path::Path;
use std::process::Command;

use advtax_cli::workspace::FixtureSet;
use advtax_core::fixtures;
use common::{cli, workspace};

fn bin(dir: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_advtax"))
        .args(args)
        .env("ADVTAX_DATA_DIR", dir)
        .current_dir(dir)
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(out: &str) -> serde_json::Value {
    serde_json::from_str(out).unwrap_or_else(|e| panic!("{e}: {out}"))
}

#[test]
fn binary_examples() {
    let (dir, _) = workspace(FixtureSet::Evaluation);
    let (code, out, _) = bin(dir.path(), &["taxonomy", "validate"]);
    assert_eq!((code, out.trim()), (0, "OK: 15 leaves, 3 categories"));
    let (code, out, _) = bin(dir.path(), &["stats", "success"]);
    assert_eq!((code, out.trim()), (0, "114/116 (98.3%)"));
    let (code, _, err) = bin(dir.path(), &["corpus", "ingest", "missing.csv"]);
    assert_eq!(code, 1);
    assert!(err.contains("FileUnreadable"), "{err}");
    assert!(err.contains("missing.csv"), "{err}");
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["stats"],
        &["annotate", "add", "X"],
        &["generate", "sample", "--k", "many"],
        &["generate", "compose", "A", "--staging", "0;x"],
        &["generate", "compose", "A", "--param", "behavior"],
        &["--format", "yaml", "stats", "success"],
    ] {
        let (code, out, err) = bin(dir.path(), args);
        assert_eq!(code, 2, "{args:?}");
        assert!(out.is_empty());
        assert!(err.contains("Usage"), "{args:?}: {err}");
    }
    let (code, out, _) = bin(dir.path(), &["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("taxonomy"));
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let mut t = advtax_core::taxonomy::canonical_taxonomy();
    t.leaves[1].id = "A".into();
    let file = dir.path().join("broken.json");
    std::fs::write(&file, advtax_core::taxonomy::serialize(&t)).unwrap();
    let (code, out, _) = cli(dir.path(), &["taxonomy", "validate", file.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("DuplicateLeafId"), "{out}");
    let (code, out, _) = cli(
        dir.path(),
        &["--format", "json", "taxonomy", "validate", file.to_str().unwrap()],
    );
    assert_eq!(code, 1);
    assert_eq!(json(&out)["violations"][0]["code"], "DuplicateLeafId");
    // No taxonomy file at all means the canonical one.
    let (code, out, _) = cli(dir.path(), &["taxonomy", "validate"]);
    assert_eq!((code, out.trim()), (0, "OK: 15 leaves, 3 categories"));
}

#[test]
fn ingest_then_import_builds_gold_workspace() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("evaluation.csv");
    std::fs::write(&raw, fixtures::EVALUATION_CSV).unwrap();
    let gold = dir.path().join("gold.ndjson");
    std::fs::write(&gold, fixtures::GOLD_NDJSON).unwrap();

    assert_eq!(cli(dir.path(), &["init"]).0, 0);
    let (code, out, _) = cli(dir.path(), &["corpus", "ingest", raw.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("117 rows: 116 accepted, 1 excluded"), "{out}");
    assert!(out.contains("InconsistentFields"));

    // A bad record anywhere rejects the whole file.
    let bad = dir.path().join("bad.ndjson");
    let mut text = fixtures::GOLD_NDJSON.to_string();
    text.push_str(
        r#"{"report_id":"CA-2023-001","taxonomy_version":1,"tags":["G"],"primary":"H","difficulty":1,"annotator":"x"}"#,
    );
    std::fs::write(&bad, text).unwrap();
    let (code, _, err) = cli(dir.path(), &["annotate", "import", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("PrimaryNotInTags"), "{err}");
    assert!(!dir.path().join("annotations.ndjson").exists());

    let (code, out, _) = cli(dir.path(), &["annotate", "import", gold.to_str().unwrap()]);
    assert_eq!((code, out.trim()), (0, "appended 116 records for 116 reports"));
    assert_eq!(cli(dir.path(), &["stats", "success"]).1.trim(), "114/116 (98.3%)");
    let (_, out, _) = cli(dir.path(), &["--format", "json", "stats", "difficulty"]);
    let counts: Vec<u64> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["count"].as_u64().unwrap())
        .collect();
    assert_eq!(counts, [95, 18, 1, 2]);
}

#[test]
fn annotate_add_validates() {
    let (dir, _) = workspace(FixtureSet::Appendix);
    let d = dir.path();
    let (code, _, err) = cli(
        d,
        &[
            "annotate",
            "add",
            "CRUISE-2023-10-02",
            "--tags",
            "G",
            "--primary",
            "H",
            "--difficulty",
            "1",
        ],
    );
    assert_eq!(code, 1);
    assert!(err.contains("PrimaryNotInTags"));
    let (code, _, err) = cli(
        d,
        &[
            "annotate",
            "add",
            "NOPE",
            "--tags",
            "G",
            "--primary",
            "G",
            "--difficulty",
            "1",
        ],
    );
    assert_eq!(code, 1);
    assert!(err.contains("UnknownReport"));
    let (code, out, _) = cli(
        d,
        &[
            "annotate",
            "add",
            "TESLA-2019-03-01",
            "--tags",
            "B,D",
            "--primary",
            "unclassified",
            "--difficulty",
            "4",
            "--annotator",
            "bob",
        ],
    );
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("primary Unclassified"));
    let (code, out, _) = cli(
        d,
        &[
            "annotate",
            "add",
            "TESLA-2019-03-01",
            "--tags",
            "B,D",
            "--primary",
            "D",
            "--difficulty",
            "4",
            "--annotator",
            "bob",
        ],
    );
    assert_eq!(code, 0);
    assert!(out.contains("warning"), "{out}");
    let log = std::fs::read_to_string(d.join("annotations.ndjson")).unwrap();
    assert_eq!(log.lines().count(), 4);
}

#[test]
fn revision_workflow_through_cli() {
    let (dir, _) = workspace(FixtureSet::Evaluation);
    let d = dir.path();
    let v2 = fixtures::revised_taxonomy();
    let m = v2.leaf("M").unwrap();
    let (code, out, _) = cli(
        d,
        &[
            "taxonomy",
            "amend",
            "M",
            "--definition",
            &m.definition,
            "--rationale",
            "door cases",
            "--expected-version",
            "2",
        ],
    );
    assert_eq!(code, 1, "{out}");
    let (code, out, _) = cli(
        d,
        &[
            "taxonomy",
            "amend",
            "M",
            "--definition",
            &m.definition,
            "--rationale",
            "door cases",
            "--expected-version",
            "1",
        ],
    );
    assert_eq!(
        (code, out.trim()),
        (0, "taxonomy now at version 2 (amend-definition M)")
    );

    let plan = d.join("plan.json");
    std::fs::write(
        &plan,
        serde_json::to_string(&fixtures::door_reclassification_plan()).unwrap(),
    )
    .unwrap();
    let (code, out, _) = cli(d, &["annotate", "reclassify", plan.to_str().unwrap()]);
    assert_eq!(
        (code, out.trim()),
        (0, "reclassified 2 reports under taxonomy version 2")
    );

    let (_, out, _) = cli(d, &["--format", "json", "stats", "coverage"]);
    let c = json(&out);
    assert_eq!(
        (
            c["primary_counts"]["Traffic Agents"].as_u64(),
            c["unclassified"].as_u64()
        ),
        (Some(74), Some(0))
    );
    assert_eq!(cli(d, &["stats", "success"]).1.trim(), "116/116 (100.0%)");
    let (_, out, _) = cli(d, &["--format", "json", "stats", "coverage", "--as-of", "1"]);
    let c = json(&out);
    assert_eq!(
        (
            c["primary_counts"]["Traffic Agents"].as_u64(),
            c["unclassified"].as_u64()
        ),
        (Some(72), Some(2))
    );
    assert_eq!(
        cli(d, &["stats", "success", "--as-of", "1"]).1.trim(),
        "114/116 (98.3%)"
    );

    let (_, out, _) = cli(d, &["--format", "json", "taxonomy", "diff", "1"]);
    let entries = json(&out);
    assert_eq!(entries.as_array().unwrap().len(), 1);
    assert_eq!(entries[0]["kind"], "amend-definition");
    assert_eq!(entries[0]["rationale"], "door cases");
}

#[test]
fn taxonomy_add_and_show() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (code, out, err) = cli(
        d,
        &[
            "taxonomy",
            "add",
            "built/road",
            "--id",
            "P",
            "--name",
            "Road Debris",
            "--definition",
            "Loose objects on the carriageway.",
            "--rationale",
            "new cases",
        ],
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("version 2 (add-leaf P)"));
    let (_, out, _) = cli(d, &["taxonomy", "show"]);
    assert!(out.contains("P  Road Debris"), "{out}");
    assert_eq!(
        cli(d, &["taxonomy", "validate"]).1.trim(),
        "OK: 16 leaves, 3 categories"
    );
    let (code, _, err) = cli(
        d,
        &[
            "taxonomy",
            "add",
            "built/nowhere",
            "--id",
            "Q",
            "--name",
            "X",
            "--definition",
            "Y",
            "--rationale",
            "Z",
        ],
    );
    assert_eq!(code, 1);
    assert!(err.contains("NotFound"), "{err}");
}

#[test]
fn generation_commands() {
    let (dir, _) = workspace(FixtureSet::Appendix);
    let d = dir.path();
    let spec = d.join("cruise.json");
    let (code, out, _) = cli(
        d,
        &[
            "generate",
            "decompose",
            "CRUISE-2023-10-02",
            "--out",
            spec.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0, "{out}");
    let doc = json(&std::fs::read_to_string(&spec).unwrap());
    let leaves: Vec<&str> = doc["instances"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| i["leaf_id"].as_str().unwrap())
        .collect();
    assert_eq!(leaves, ["B", "E", "G", "I", "M"]);

    let args = [
        "generate",
        "variants",
        spec.to_str().unwrap(),
        "--axis",
        "2:behavior=jaywalk,crosswalk,dodge",
        "--count",
        "3",
        "--seed",
        "7",
    ];
    let (code, out, _) = cli(d, &args);
    assert_eq!(code, 0);
    let behaviors: Vec<String> = json(&out)
        .as_array()
        .unwrap()
        .iter()
        .map(|v| {
            v["instances"][2]["params"]["behavior"]["value"]
                .as_str()
                .unwrap()
                .to_string()
        })
        .collect();
    assert_eq!(behaviors, ["jaywalk", "crosswalk", "dodge"]);
    assert_eq!(cli(d, &args).1, out);
    let (code, _, err) = cli(
        d,
        &[
            "generate",
            "variants",
            spec.to_str().unwrap(),
            "--axis",
            "9:behavior=x",
            "--count",
            "1",
        ],
    );
    assert_eq!(code, 1);
    assert!(err.contains("BadAxis"));

    let (code, out, _) = cli(
        d,
        &[
            "generate",
            "compose",
            "G",
            "K",
            "--staging",
            "series",
            "--param",
            "0:behavior=jaywalk",
            "--param",
            "1:height=12",
        ],
    );
    assert_eq!(code, 0, "{out}");
    let c = json(&out);
    assert_eq!(c["stages"], serde_json::json!([[0], [1]]));
    assert_eq!(c["instances"][1]["params"]["height"]["unit"], "cm");
    let (code, _, err) = cli(d, &["generate", "compose", "G", "--param", "0:behavior=flying"]);
    assert_eq!(code, 1);
    assert!(err.contains("BadParam"), "{err}");
    assert_eq!(cli(d, &["generate", "compose", "Z"]).0, 1);

    let (_, a, _) = cli(d, &["generate", "sample", "--k", "3", "--seed", "7"]);
    let (_, b, _) = cli(d, &["generate", "sample", "--k", "3", "--seed", "7"]);
    assert_eq!(a, b);
    assert_eq!(json(&a).as_array().unwrap().len(), 3);
    let out_dir = d.join("samples");
    let (code, _, _) = cli(
        d,
        &[
            "generate",
            "sample",
            "--k",
            "3",
            "--seed",
            "7",
            "--out-dir",
            out_dir.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_dir(&out_dir).unwrap().count(), 3);
    assert_eq!(cli(d, &["generate", "sample", "--k", "0"]).0, 1);
}

#[test]
fn suggest_and_tagger_stats() {
    let (dir, _) = workspace(FixtureSet::Appendix);
    let (code, out, _) = cli(dir.path(), &["--format", "json", "suggest", "CRUISE-2023-10-02"]);
    assert_eq!(code, 0);
    let ids: Vec<String> = json(&out)["suggestions"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["leaf_id"].as_str().unwrap().to_string())
        .collect();
    for id in ["G", "M", "E"] {
        assert!(ids.contains(&id.to_string()), "{ids:?}");
    }
    let (code, out, _) = cli(dir.path(), &["--format", "json", "stats", "tagger"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["per_report"].as_array().unwrap().len(), 2);
    assert_eq!(cli(dir.path(), &["suggest", "NOPE"]).0, 1);
}

#[test]
fn serve_refuses_remote_bind() {
    let (dir, _) = workspace(FixtureSet::Evaluation);
    let (code, _, err) = cli(dir.path(), &["serve", "--listen", "0.0.0.0:0"]);
    assert_eq!(code, 1);
    assert!(err.contains("--allow-remote"), "{err}");
    assert_eq!(cli(dir.path(), &["serve", "--listen", "nowhere"]).0, 1);
}

#[test]
fn config_file_and_env() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    let cfg = dir.path().join("advtax.toml");
    std::fs::write(
        &cfg,
        format!(
            "data_dir = {:?}\nannotation_log = \"log.ndjson\"\n",
            data.to_str().unwrap()
        ),
    )
    .unwrap();
    let no_env = |args: &[&str]| {
        let out = Command::new(env!("CARGO_BIN_EXE_advtax"))
            .args(args)
            .env_remove("ADVTAX_DATA_DIR")
            .output()
            .unwrap();
        (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap())
    };
    let c = cfg.to_str().unwrap();
    assert_eq!(no_env(&["--config", c, "init", "--fixtures", "evaluation"]).0, 0);
    assert!(data.join("log.ndjson").exists());
    assert_eq!(no_env(&["--config", c, "stats", "success"]).1.trim(), "114/116 (98.3%)");
    // The env var points at an empty directory and wins over the file.
    let (code, out, _) = bin(dir.path(), &["--config", c, "stats", "success"]);
    assert_eq!((code, out.trim()), (0, "0/0 (100.0%)"));
}
