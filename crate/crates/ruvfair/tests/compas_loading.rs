use std::collections::HashMap;
use std::path::{Path, PathBuf};

use ruvfair::compas_data::{load_compas, REQUIRED_COLUMNS};
use ruvfair_core::compas::{build_groups, featurize, ChargeDegree, Race};

fn real_data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/compas-scores-two-years.csv")
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/compas_small.csv")
}

const HEADER: &str = "id,age,juv_fel_count,juv_misd_count,juv_other_count,priors_count,\
c_charge_degree,r_charge_degree,race,two_year_recid,is_recid,days_b_screening_arrest,\
decile_score,priors_count,decile_score";

fn write(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("c.csv");
    std::fs::write(&path, format!("{HEADER}\n{body}")).unwrap();
    path
}

#[test]
fn header_only_file_loads_empty() {
    let dir = tempfile::tempdir().unwrap();
    let loaded = load_compas(&write(dir.path(), "")).unwrap();
    assert!(loaded.records.is_empty());
    assert_eq!(loaded.counts.rows, 0);
    assert!(featurize(&loaded.records).is_err());
}

#[test]
fn hand_written_rows_are_filtered_and_parsed() {
    let dir = tempfile::tempdir().unwrap();
    let body = "\
1,30,0,1,0,4,F,(M1),African-American,1,1,-1,7,99,1
2,45,0,0,0,0,M,,Caucasian,0,0,0,2,99,1
3,22,0,0,0,1,F,(F3),Hispanic,1,1,0,5,99,1
4,50,0,0,0,2,M,(MO3),Caucasian,1,1,31,4,99,1
5,50,0,0,0,2,O,,Caucasian,0,0,0,4,99,1
6,28,0,0,0,2,F,,Caucasian,0,-1,,4,99,1
7,33,1,0,0,9,F,(CO3),African-American,1,1,30,10,99,1
8,abc,0,0,0,0,M,,Caucasian,0,0,0,2,99,1
";
    let loaded = load_compas(&write(dir.path(), body)).unwrap();
    let c = &loaded.counts;
    assert_eq!(c.rows, 8);
    assert_eq!(c.dropped_race, 1);
    assert_eq!(c.dropped_screening_window, 2);
    assert_eq!(c.dropped_charge_degree, 1);
    assert_eq!(c.skipped_unparseable, 1);
    assert_eq!(c.kept, 3);
    assert_eq!(loaded.skipped[0].line, 9);

    let r = &loaded.records;
    assert_eq!(r[0].race, Race::AfricanAmerican);
    assert_eq!(r[0].age, 30.0);
    assert_eq!(r[0].juv_misd_count, 1.0);
    // first of the duplicated columns wins
    assert_eq!(r[0].priors_count, 4.0);
    assert_eq!(r[0].compas_decile, 7);
    assert!(r[0].charge_is_felony);
    assert_eq!(r[0].recid_charge_degree, Some(ChargeDegree::Misdemeanor));
    assert!(!r[1].two_year_recid);
    assert_eq!(r[2].recid_charge_degree, None);

    let (p, _) = build_groups(r, &[0, 1, 2]).unwrap();
    // CO3 recidivist is in no group; G2 is empty
    assert_eq!(p.sizes(), vec![1, 1]);
}

#[test]
fn missing_columns_are_reported_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "age,race\n30,Caucasian\n").unwrap();
    let err = load_compas(&path).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(
        msg.contains("decile_score") && msg.contains("priors_count"),
        "{msg}"
    );
}

// Independent reading of the real file: the filters are re-applied by hand
// on raw string fields.
#[test]
fn real_file_filters_match_independent_scan() {
    let loaded = load_compas(&real_data()).unwrap();
    let mut rdr = csv::Reader::from_path(real_data()).unwrap();
    let header = rdr.headers().unwrap().clone();
    let mut col: HashMap<&str, usize> = HashMap::new();
    for (i, h) in header.iter().enumerate() {
        col.entry(h).or_insert(i);
    }
    for name in REQUIRED_COLUMNS {
        assert!(col.contains_key(name));
    }
    let mut kept = 0usize;
    let (mut sum_age, mut sum_priors, mut recid, mut aa, mut felony) = (0.0, 0.0, 0, 0, 0);
    let mut g = [0usize; 3];
    let mut total = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        total += 1;
        let f = |n: &str| rec.get(col[n]).unwrap();
        if !matches!(f("race"), "African-American" | "Caucasian") {
            continue;
        }
        let Ok(days) = f("days_b_screening_arrest").parse::<i64>() else {
            continue;
        };
        if days.abs() > 30 || f("is_recid") == "-1" || f("c_charge_degree") == "O" {
            continue;
        }
        kept += 1;
        sum_age += f("age").parse::<f64>().unwrap();
        sum_priors += f("priors_count").parse::<f64>().unwrap();
        recid += usize::from(f("two_year_recid") == "1");
        aa += usize::from(f("race") == "African-American");
        felony += usize::from(f("c_charge_degree") == "F");
        if f("two_year_recid") == "0" {
            g[0] += 1;
        } else {
            match f("r_charge_degree").trim_matches(|c| c == '(' || c == ')') {
                "CO3" => {}
                d if d.starts_with('F') => g[1] += 1,
                d if d.starts_with('M') => g[2] += 1,
                _ => {}
            }
        }
    }
    assert_eq!(loaded.counts.rows, total);
    assert_eq!(loaded.counts.kept, kept);
    assert_eq!(loaded.counts.skipped_unparseable, 0);
    let c = &loaded.counts;
    assert_eq!(
        c.dropped_race
            + c.dropped_screening_window
            + c.dropped_is_recid
            + c.dropped_charge_degree
            + c.dropped_missing_decile
            + c.kept,
        c.rows
    );

    let feats = featurize(&loaded.records).unwrap();
    let y = feats.y.matrix();
    let col_mean = |j: usize| (0..y.nrows()).map(|i| y[(i, j)]).sum::<f64>() / y.nrows() as f64;
    assert!((col_mean(0) - sum_age / kept as f64).abs() < 1e-9);
    assert!((col_mean(4) - sum_priors / kept as f64).abs() < 1e-9);
    assert!((col_mean(5) - felony as f64 / kept as f64).abs() < 1e-12);
    assert_eq!(feats.labels.iter().filter(|&&l| l).count(), recid);
    let x = feats.x.matrix();
    assert_eq!((0..x.nrows()).filter(|&i| x[(i, 0)] == 1.0).count(), aa);

    let all: Vec<usize> = (0..loaded.records.len()).collect();
    let (p, warnings) = build_groups(&loaded.records, &all).unwrap();
    assert!(warnings.is_empty());
    assert_eq!(p.sizes(), g.to_vec());
}

#[test]
fn fixture_keeps_fifty_rows() {
    let loaded = load_compas(&fixture()).unwrap();
    assert_eq!(loaded.counts.rows, 60);
    assert_eq!(loaded.counts.kept, 50);
    let recid = loaded.records.iter().filter(|r| r.two_year_recid).count();
    assert!(recid > 10 && recid < 40);
}
