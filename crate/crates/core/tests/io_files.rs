use std::fs;

use hn_core::io::{read_field, solution_csv, write_field, ProblemFile};
use hn_core::solver::{BoxGrid, ScalarField};
use hn_core::Error;

#[test]
fn grid_source_reads_a_dump_next_to_the_problem() {
    let dir = tempfile::tempdir().unwrap();
    let grid = BoxGrid::cube(2, 0.0, 1.0, 9).unwrap();
    let psi = ScalarField::from_fn(&grid, |x| 1.0 + x[0] * x[0] + x[1]).unwrap();
    write_field(&dir.path().join("psi.bin"), &psi).unwrap();
    let text = r#"{
        "n": 2, "k": 1, "beta": 2.0,
        "box": {"lo": [0.0, 0.0], "hi": 1.0, "m": 9},
        "psi": {"kind": "grid", "path": "psi.bin"},
        "phi": {"kind": "constant", "value": 0.5}
    }"#;
    let path = dir.path().join("problem.json");
    fs::write(&path, text).unwrap();
    let spec = ProblemFile::load(&path).unwrap().to_spec(dir.path()).unwrap();
    assert_eq!(spec.psi().values(), psi.values());

    let dump = read_field(&dir.path().join("psi.bin")).unwrap();
    assert_eq!((dump.grid_n, dump.grid_m), (2, 9));

    let wrong = ScalarField::constant(&BoxGrid::cube(2, 0.0, 1.0, 11).unwrap(), 1.0);
    write_field(&dir.path().join("psi.bin"), &wrong).unwrap();
    let err = ProblemFile::load(&path).unwrap().to_spec(dir.path()).unwrap_err();
    assert!(matches!(err, Error::Validation { ref field, .. } if field == "psi"), "{err}");
}

#[test]
fn missing_files_are_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(ProblemFile::load(&dir.path().join("nope.json")), Err(Error::Io(_))));
    assert!(matches!(read_field(&dir.path().join("nope.bin")), Err(Error::Io(_))));
}

#[test]
fn solution_csv_lists_every_node() {
    let grid = BoxGrid::cube(3, -1.0, 1.0, 9).unwrap();
    let u = ScalarField::from_fn(&grid, |x| x[2]).unwrap();
    let csv = solution_csv(&u);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x1,x2,x3,u"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 729);
    assert!(rows.iter().all(|r| r[3] == r[2]));
}
