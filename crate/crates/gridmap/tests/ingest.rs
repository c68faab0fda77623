use std::fs;
use std::path::{Path, PathBuf};

use gridmap::ingest::{dataset_from_json, dataset_to_json};
use gridmap::{load_dataset, read_dataset, IngestMode, LoadError, LoadOptions, ParseError};
use gridmap_core::{IngestError, SentinelValue};

const HEADER: &str = "Year,Date Event Began,Time Event Began,Date of Restoration,Time of Restoration,Area Affected,NERC Region,Alert Criteria,Event Type,Demand Loss (MW),Number of Customers Affected";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

#[test]
fn two_files_merge_into_one_dataset() {
    let paths = [fixture("summary_2015.csv"), fixture("summary_2016.csv")];
    let ds = load_dataset(&paths, &LoadOptions::default()).unwrap();
    assert_eq!(ds.len(), 5);
    let years: Vec<i32> = ds.provenance().iter().map(|f| f.year).collect();
    assert_eq!(years, vec![2015, 2016]);
    assert!(ds.events().windows(2).all(|w| w[0].event_id < w[1].event_id));
    let first = &ds.events()[0];
    assert_eq!(first.demand_loss, SentinelValue::Positive(1250.0));
    assert_eq!(first.customers_affected, SentinelValue::Unknown);
    assert_eq!(first.area, "Massachusetts, Rhode Island");
}

#[test]
fn no_files_is_an_empty_dataset() {
    let ds = load_dataset::<PathBuf>(&[], &LoadOptions::default()).unwrap();
    assert!(ds.is_empty());
    assert!(ds.provenance().is_empty());
}

#[test]
fn strict_mode_stops_at_bad_row() {
    let err = load_dataset(&[fixture("bad_2016.csv")], &LoadOptions::default()).unwrap_err();
    match err {
        LoadError::Record {
            source: IngestError::UnparsableValue { raw, .. },
            ..
        } => assert_eq!(raw, "lots"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn lenient_mode_skips_and_counts() {
    let options = LoadOptions {
        mode: IngestMode::Lenient,
        ..LoadOptions::default()
    };
    let ds = load_dataset(&[fixture("bad_2016.csv")], &options).unwrap();
    assert_eq!(ds.len(), 1);
    assert_eq!(ds.provenance()[0].rejected, 1);
    assert_eq!(ds.ingest_warnings().len(), 1);
}

#[test]
fn same_file_twice_is_a_duplicate() {
    let path = fixture("summary_2016.csv");
    let err = load_dataset(&[path.clone(), path], &LoadOptions::default()).unwrap_err();
    assert!(matches!(err, LoadError::Dataset(IngestError::DuplicateEventId(_))));
}

#[test]
fn bom_crlf_and_column_order() {
    let dir = tempfile::tempdir().unwrap();
    let cols: Vec<&str> = HEADER.split(',').rev().collect();
    let body = format!(
        "\u{feff}{}\r\n12,unknown,Severe Weather,,RFC,Ohio,12:00,7/1/2012,14:30,6/29/2012,2012\r\n",
        cols.join(",")
    );
    let path = write(dir.path(), "2012.csv", &body);
    let ds = load_dataset(&[path], &LoadOptions::default()).unwrap();
    let e = &ds.events()[0];
    assert_eq!(e.customers_affected, SentinelValue::Positive(12.0));
    assert_eq!(e.demand_loss, SentinelValue::Unknown);
    assert_eq!(e.began.unwrap().to_string(), "2012-06-29T14:30");
}

#[test]
fn year_taken_from_file_name_when_cells_blank() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{HEADER}\n,3/4/2013,,,,Utah,WECC,,Fuel Supply Emergency,0,0\n");
    let path = write(dir.path(), "doe417-2013.csv", &body);
    let ds = load_dataset(&[path], &LoadOptions::default()).unwrap();
    assert_eq!(ds.events()[0].year, 2013);
    assert!(ds.events()[0].event_id.starts_with("2013-00001-"));
}

#[test]
fn unknown_year_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{HEADER}\n,3/4/2013,,,,Utah,WECC,,Fuel Supply Emergency,0,0\n");
    let path = write(dir.path(), "summary.csv", &body);
    let err = load_dataset(&[path], &LoadOptions::default()).unwrap_err();
    assert!(matches!(err, LoadError::UnknownYear { .. }));
}

#[test]
fn malformed_header_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "2014.csv", "Year,When,What\n2014,1/1/2014,x\n");
    let err = load_dataset(&[path], &LoadOptions::default()).unwrap_err();
    assert!(matches!(
        err,
        LoadError::Parse {
            source: ParseError::MalformedHeader { .. },
            ..
        }
    ));
}

#[test]
fn restoration_before_start_is_kept_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let body = format!("{HEADER}\n2014,1/5/2014,10:00,1/4/2014,09:00,Iowa,MRO,,Severe Weather,0,0\n");
    let path = write(dir.path(), "2014.csv", &body);
    let ds = load_dataset(&[path], &LoadOptions::default()).unwrap();
    assert_eq!(ds.len(), 1);
    assert!(ds.ingest_warnings()[0].contains("restoration precedes start"));
}

#[test]
fn canonical_json_round_trips() {
    let paths = [fixture("summary_2015.csv"), fixture("summary_2016.csv")];
    let ds = load_dataset(&paths, &LoadOptions::default()).unwrap();
    let text = dataset_to_json(&ds);
    assert!(text.ends_with("}\n"));
    assert_eq!(dataset_from_json(&text).unwrap(), ds);

    let dir = tempfile::tempdir().unwrap();
    let json_path = write(dir.path(), "d.json", &text);
    let again = read_dataset(&[json_path], &LoadOptions::default()).unwrap();
    assert_eq!(dataset_to_json(&again), text);
}

#[test]
fn json_with_duplicate_ids_is_rejected() {
    let paths = [fixture("summary_2016.csv")];
    let ds = load_dataset(&paths, &LoadOptions::default()).unwrap();
    let mut doc: serde_json::Value = serde_json::from_str(&dataset_to_json(&ds)).unwrap();
    let events = doc["events"].as_array_mut().unwrap();
    let copy = events[0].clone();
    events.push(copy);
    assert!(dataset_from_json(&doc.to_string()).is_err());
}
