use ruvfair::io::{
    default_header, read_groups_json, read_matrix_csv, write_csv_rows, write_matrix_csv,
};
use ruvfair_core::Matrix;

#[test]
fn matrix_csv_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let m = Matrix::from_rows(&[
        [0.1, -1e-300, 123456789.125],
        [f64::MIN_POSITIVE, 2.0 / 3.0, -0.0],
    ])
    .unwrap();
    let header = vec!["a".to_string(), "b".into(), "c".into()];
    write_matrix_csv(&path, &header, &m).unwrap();
    let back = read_matrix_csv(&path).unwrap();
    assert_eq!(back.header, header);
    assert_eq!(back.matrix.shape(), (2, 3));
    for (x, y) in m.as_slice().iter().zip(back.matrix.as_slice()) {
        assert_eq!(x.to_bits(), y.to_bits());
    }
}

#[test]
fn ragged_or_non_numeric_csv_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let ragged = dir.path().join("ragged.csv");
    std::fs::write(&ragged, "a,b\n1,2\n3\n").unwrap();
    assert_eq!(read_matrix_csv(&ragged).unwrap_err().exit_code(), 2);
    let text = dir.path().join("text.csv");
    std::fs::write(&text, "a,b\n1,x\n").unwrap();
    assert_eq!(read_matrix_csv(&text).unwrap_err().exit_code(), 2);
    let missing = dir.path().join("nope.csv");
    assert_eq!(read_matrix_csv(&missing).unwrap_err().exit_code(), 2);
}

#[test]
fn groups_json_reads_lists_of_indices() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    std::fs::write(&path, "[[0, 2], [1, 3, 4]]").unwrap();
    let p = read_groups_json(&path).unwrap();
    assert_eq!(p.sizes(), vec![2, 3]);
    std::fs::write(&path, "{\"groups\": 1}").unwrap();
    assert!(read_groups_json(&path).is_err());
}

#[test]
fn csv_rows_use_shortest_round_trip_formatting() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    write_csv_rows(&path, &["x", "y"], vec![vec![0.1, 1.0], vec![0.5, 1e-7]]).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, "x,y\n0.1,1\n0.5,0.0000001\n");
    assert_eq!(default_header(2), vec!["c0".to_string(), "c1".into()]);
}
