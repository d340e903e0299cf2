use homophily_core::ModelParams;
use homophily_lab::sweep::{Provenance, Row};
use homophily_lab::{emit, read_csv, run_sweep, Format, Grid, Quantity, SweepResult, SweepSpec, SweptParam};

fn sample() -> SweepResult {
    let spec = SweepSpec {
        base: ModelParams::new(0.35, 0.3, 0.25, 0.05, 0.45, 0.2).unwrap(),
        vaccination: None,
        param: SweptParam::H,
        grid: Grid { count: 17, min: 0.0, max: 1.0 },
        outputs: Quantity::ALL.iter().copied().filter(|q| !matches!(q, Quantity::XAStar | Quantity::XVStar | Quantity::Welfare)).collect(),
        shock: [0.3, 1.0],
        sir_seed: 0.0,
        seed: 0,
    };
    run_sweep(&spec).unwrap()
}

fn with_failures() -> SweepResult {
    SweepResult {
        param: "mu".into(),
        outputs: vec!["rho".into(), "ci".into()],
        rows: vec![
            Row { value: 0.1, values: vec![0.25, 1e-7], residuals: [1e-17, f64::NAN, f64::NAN], flag: String::new() },
            Row { value: 0.2, values: vec![f64::NAN, f64::NAN], residuals: [f64::NAN; 3], flag: "ss_failed|ci_failed".into() },
        ],
        provenance: Provenance { version: "0.1.0".into(), config_sha256: "ab".repeat(32) },
    }
}

fn same_bits(a: &SweepResult, b: &SweepResult) {
    assert_eq!(a.param, b.param);
    assert_eq!(a.outputs, b.outputs);
    assert_eq!(a.provenance, b.provenance);
    assert_eq!(a.rows.len(), b.rows.len());
    let bits = |r: &Row| {
        std::iter::once(r.value)
            .chain(r.values.iter().copied())
            .chain(r.residuals)
            .map(|v| if v.is_nan() { None } else { Some(v.to_bits()) })
            .collect::<Vec<_>>()
    };
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(bits(x), bits(y));
        assert_eq!(x.flag, y.flag);
    }
}

#[test]
fn csv_round_trip_is_bit_exact() {
    for res in [sample(), with_failures()] {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        emit(&res, Format::Csv, &path).unwrap();
        let back = read_csv(std::fs::File::open(&path).unwrap()).unwrap();
        same_bits(&res, &back);
    }
}

#[test]
fn failed_cells_are_empty() {
    let mut buf = Vec::new();
    homophily_lab::write_csv(&with_failures(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let last = text.lines().last().unwrap();
    assert_eq!(last, "0.2,,,,,,ss_failed|ci_failed");
    assert!(text.lines().nth(3).unwrap().starts_with("0.1,0.25,1e-7,1e-17,,,"));
}

#[test]
fn csv_parses_with_a_plain_reader() {
    let mut buf = Vec::new();
    homophily_lab::write_csv(&sample(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(!text.contains('"'));
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let width = rdr.headers().unwrap().len();
    let mut n = 0;
    for rec in rdr.records() {
        let rec = rec.unwrap();
        assert_eq!(rec.len(), width);
        for cell in rec.iter().take(width - 1) {
            assert!(cell.is_empty() || cell.parse::<f64>().is_ok(), "{cell}");
        }
        n += 1;
    }
    assert_eq!(n, 17);
}

#[test]
fn json_mirrors_rows() {
    let res = with_failures();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    emit(&res, Format::Json, &path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, res.columns().iter().collect::<Vec<_>>());
    assert_eq!(rows[0]["ci"].as_f64().unwrap().to_bits(), 1e-7f64.to_bits());
    assert!(rows[1]["rho"].is_null());
    assert_eq!(rows[1]["flag"], "ss_failed|ci_failed");
}

#[test]
fn io_errors_name_the_path() {
    let err = emit(&sample(), Format::Csv, std::path::Path::new("/nonexistent-dir/x.csv")).unwrap_err();
    assert!(format!("{err:#}").contains("/nonexistent-dir/x.csv"));
}
