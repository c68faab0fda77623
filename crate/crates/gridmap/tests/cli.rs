use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

const POINTMASS: &str = "tests/fixtures/pointmass";
const D2015: &str = "tests/fixtures/summary_2015.csv";
const D2016: &str = "tests/fixtures/summary_2016.csv";

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn gridmap(args: &[&str]) -> Run {
    gridmap_env(args, None)
}

fn gridmap_env(args: &[&str], config_dir: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gridmap"));
    cmd.current_dir(env!("CARGO_MANIFEST_DIR")).args(args);
    match config_dir {
        Some(dir) => cmd.env("GRIDMAP_CONFIG_DIR", dir),
        None => cmd.env_remove("GRIDMAP_CONFIG_DIR"),
    };
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn with_data<'a>(sub: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut args = vec![sub, "--dataset", D2015, D2016, "--config-dir", POINTMASS];
    args.extend_from_slice(rest);
    args
}

/// Data rows of a CSV report, keyed by the first `key_cols` columns.
fn csv_rows(text: &str, key_cols: usize) -> BTreeMap<String, Vec<String>> {
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            let key = r.iter().take(key_cols).collect::<Vec<_>>().join("|");
            let vals = header
                .iter()
                .zip(r.iter())
                .skip(key_cols)
                .map(|(h, v)| format!("{h}={v}"))
                .collect();
            (key, vals)
        })
        .collect()
}

fn json_rows(text: &str, key_cols: &[&str]) -> BTreeMap<String, Vec<String>> {
    let doc: serde_json::Value = serde_json::from_str(text).unwrap();
    doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| {
            let obj = row.as_object().unwrap();
            let plain = |v: &serde_json::Value| match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            let key = key_cols.iter().map(|k| plain(&obj[*k])).collect::<Vec<_>>().join("|");
            let mut vals: Vec<(String, String)> = obj
                .iter()
                .filter(|(k, _)| !key_cols.contains(&k.as_str()))
                .map(|(k, v)| (k.clone(), plain(v)))
                .collect();
            vals.sort();
            (key, vals.into_iter().map(|(k, v)| format!("{k}={v}")).collect())
        })
        .collect()
}

#[test]
fn unknown_subcommand_is_usage_error() {
    let run = gridmap(&["frobnicate"]);
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("Usage"));
    assert!(run.stdout.is_empty());
}

#[test]
fn missing_dataset_flag_is_usage_error() {
    assert_eq!(gridmap(&["map"]).code, 2);
}

#[test]
fn help_exits_zero() {
    let run = gridmap(&["--help"]);
    assert_eq!(run.code, 0);
    for sub in ["ingest", "categories", "map", "timeline", "sensitivity"] {
        assert!(run.stdout.contains(sub), "{sub}");
    }
}

#[test]
fn point_mass_scope_map_has_exact_cells() {
    // Demand filter keeps the winter storm (1250 MW), the Texas operations
    // event (300 MW) and the suspected attack (Unknown).
    let run = gridmap(&with_data("map", &["--axis", "scope", "--measure", "demand", "--format", "json"]));
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    let dist = &doc["distributions"][0];
    assert_eq!(dist["axis"], "scope");
    assert_eq!(dist["event_count"], 3);
    let expected = [
        ("human.local", "1.000000"),
        ("human.regional", "1.000000"),
        ("human.global", "0.000000"),
        ("nature.local", "0.000000"),
        ("nature.regional", "1.000000"),
        ("nature.global", "0.000000"),
    ];
    let cells = dist["cells"].as_object().unwrap();
    assert_eq!(cells.len(), 6);
    for (key, mass) in expected {
        assert_eq!(cells[key].to_string(), mass, "{key}");
    }
    let links = doc["flow"]["links"].as_array().unwrap();
    assert_eq!(links.len(), 3);
    assert!(links.iter().all(|l| l["value"].as_f64() == Some(1.0)));
}

#[test]
fn empty_result_exits_four() {
    let run = gridmap(&with_data("map", &["--years", "2030-2031"]));
    assert_eq!(run.code, 4);
    assert!(run.stderr.contains("no events"));
    assert!(run.stdout.is_empty());
}

#[test]
fn bad_input_exits_three() {
    let run = gridmap(&["ingest", "--dataset", "tests/fixtures/bad_2016.csv"]);
    assert_eq!(run.code, 3);
    assert!(run.stderr.contains("lots"));
    let run = gridmap(&["ingest", "--dataset", "tests/fixtures/no_such_2016.csv"]);
    assert_eq!(run.code, 3);
}

#[test]
fn bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let profile = dir.path().join("profile.json");
    fs::write(
        &profile,
        fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join(POINTMASS).join("profile.json"))
            .unwrap()
            .replacen("\"nature.regional\": 1", "\"nature.regional\": 0.97", 1),
    )
    .unwrap();
    let run = gridmap(&with_data("map", &["--profile", profile.to_str().unwrap()]));
    assert_eq!(run.code, 2);
    assert!(run.stderr.contains("Severe Weather/Natural Disaster"), "{}", run.stderr);
    assert!(run.stderr.contains("0.97"), "{}", run.stderr);
}

#[test]
fn reversed_years_exit_two() {
    assert_eq!(gridmap(&with_data("map", &["--years", "2016-2015"])).code, 2);
}

#[test]
fn byte_determinism() {
    for sub in ["ingest", "categories", "map", "timeline", "sensitivity"] {
        for format in ["table", "csv", "json"] {
            let args = with_data(sub, &["--format", format]);
            let a = gridmap(&args);
            let b = gridmap(&args);
            assert_eq!(a.code, 0, "{sub} {format}: {}", a.stderr);
            assert_eq!(a.stdout, b.stdout, "{sub} {format}");
        }
    }
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let cases: [(&str, &[&str]); 4] = [
        ("categories", &["category"]),
        ("map", &["axis", "cell"]),
        ("timeline", &["category", "year"]),
        ("sensitivity", &["category", "axis", "cell"]),
    ];
    for (sub, keys) in cases {
        let csv = gridmap(&with_data(sub, &["--format", "csv"]));
        let json = gridmap(&with_data(sub, &["--format", "json"]));
        let from_csv = csv_rows(&csv.stdout, keys.len());
        let from_json = json_rows(&json.stdout, keys);
        assert!(!from_csv.is_empty(), "{sub}");
        let sorted: BTreeMap<_, _> = from_csv
            .into_iter()
            .map(|(k, mut v)| {
                v.sort();
                (k, v)
            })
            .collect();
        assert_eq!(sorted, from_json, "{sub}");
    }
}

#[test]
fn min_count_only_hides_rows() {
    let all = gridmap(&with_data("categories", &["--format", "csv", "--top", "2"]));
    let some = gridmap(&with_data("categories", &["--format", "csv", "--top", "2", "--min-count", "1"]));
    let all_rows = csv_rows(&all.stdout, 1);
    let some_rows = csv_rows(&some.stdout, 1);
    assert_eq!(all_rows.len(), 3);
    assert_eq!(some_rows.len(), 2);
    for (k, v) in &some_rows {
        assert_eq!(all_rows.get(k), Some(v));
    }
    let summary = |t: &str| -> Vec<String> {
        t.lines()
            .filter(|l| l.starts_with("# events") || l.starts_with("# top") || l.starts_with("# categories"))
            .filter(|l| !l.starts_with("# top:"))
            .map(String::from)
            .collect()
    };
    assert_eq!(summary(&all.stdout), summary(&some.stdout));
}

#[test]
fn min_count_shows_counts_strictly_above() {
    let run = gridmap(&with_data("categories", &["--min-count", "1"]));
    assert!(run.stdout.contains("Physical Attack/Vandalism/Sabotage"));
    assert!(run.stdout.contains("System Operations"));
    assert!(!run.stdout.contains("Severe Weather/Natural Disaster  "));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("map.json");
    let run = gridmap(&with_data("map", &["--format", "json", "--out", target.to_str().unwrap()]));
    assert_eq!(run.code, 0);
    assert!(run.stdout.is_empty());
    let direct = gridmap(&with_data("map", &["--format", "json"]));
    assert_eq!(fs::read_to_string(target).unwrap(), direct.stdout);
}

#[test]
fn config_dir_from_environment() {
    let flag = gridmap(&with_data("categories", &["--format", "csv"]));
    let env = gridmap_env(&["categories", "--dataset", D2015, D2016, "--format", "csv"], Some(POINTMASS));
    assert_eq!(flag.stdout, env.stdout);
    let builtin = gridmap(&["categories", "--dataset", D2015, D2016, "--format", "csv"]);
    assert!(builtin.stdout.contains("# taxonomy: builtin:taxonomy.json"));
    assert!(env.stdout.contains("# taxonomy: tests/fixtures/pointmass/taxonomy.json"));
}

#[test]
fn provenance_hashes_track_inputs() {
    let a = gridmap(&with_data("map", &["--format", "json"]));
    let b = gridmap(&["map", "--dataset", D2015, "--config-dir", POINTMASS, "--format", "json"]);
    let doc = |t: &str| serde_json::from_str::<serde_json::Value>(t).unwrap();
    let (a, b) = (doc(&a.stdout), doc(&b.stdout));
    assert_ne!(a["provenance"]["dataset_sha256"], b["provenance"]["dataset_sha256"]);
    assert_eq!(a["provenance"]["profile_sha256"], b["provenance"]["profile_sha256"]);
    assert_eq!(a["provenance"]["tool_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn ingest_json_feeds_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    let path = path.to_str().unwrap();
    assert_eq!(gridmap(&["ingest", "--dataset", D2015, D2016, "--format", "json", "--out", path]).code, 0);
    let from_json = gridmap(&["map", "--dataset", path, "--config-dir", POINTMASS, "--format", "csv"]);
    let from_csv = gridmap(&with_data("map", &["--format", "csv"]));
    assert_eq!(csv_rows(&from_json.stdout, 2), csv_rows(&from_csv.stdout, 2));
}

#[test]
fn sensitivity_finds_operations_discrepancy() {
    let run = gridmap(&with_data("sensitivity", &["--format", "json"]));
    assert_eq!(run.code, 0, "{}", run.stderr);
    let doc: serde_json::Value = serde_json::from_str(&run.stdout).unwrap();
    let top = &doc["sensitivity"]["largest_discrepancy"];
    assert_eq!(top["category"], "System Operations");
    assert_eq!(top["axis"], "direction");
    assert_eq!(top["difference"].to_string(), "1.000000");
    assert_eq!(doc["override_matches"][0]["events"], 1);
}

#[test]
fn lenient_ingest_reports_skips_on_stderr() {
    let run = gridmap(&["ingest", "--dataset", "tests/fixtures/bad_2016.csv", "--lenient", "--format", "csv"]);
    assert_eq!(run.code, 0);
    assert!(run.stderr.contains("skipped row 1"));
    assert!(run.stdout.contains("# rows_rejected: 1"));
}

#[test]
fn golden_categories_report() {
    let run = gridmap(&with_data("categories", &["--format", "csv", "--top", "3"]));
    let golden = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden/categories.csv");
    if std::env::var_os("GRIDMAP_BLESS").is_some() {
        fs::create_dir_all(golden.parent().unwrap()).unwrap();
        fs::write(&golden, &run.stdout).unwrap();
    }
    assert_eq!(run.stdout, fs::read_to_string(golden).unwrap());
}
