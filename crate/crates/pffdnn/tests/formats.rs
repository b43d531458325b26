use std::fs;
use std::path::{Path, PathBuf};

use pffdnn::plot::{render_plot, PlotSpec};
use pffdnn::records::{self, ConvergenceRecord, ReconstructionRow, SampleRow, SpectrumRow, TimingRecord};
use pffdnn_core::fitters::Method;
use pffdnn_core::signals::SignalKind;
use proptest::prelude::*;
use tempfile::TempDir;

fn record(method: Method, dw: Option<usize>, n: u64, err: f64) -> ConvergenceRecord {
    ConvergenceRecord {
        method,
        signal: SignalKind::SineOnPolynomial,
        delta_omega: dw,
        seed: 0,
        update_count: n,
        rmse: err,
        relative_rmse: err / 2.0,
        test_rmse: Some(err),
        train_mse: None,
    }
}

fn write(dir: &Path, name: &str, rows: &[ConvergenceRecord]) -> PathBuf {
    let path = dir.join(name);
    records::write_csv(&path, rows).unwrap();
    path
}

fn polylines(svg: &str) -> Vec<usize> {
    svg.split("<polyline").skip(1).map(|p| {
        let pts = p.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        pts.split_whitespace().count()
    }).collect()
}

#[test]
fn one_series_gives_one_polyline() {
    let tmp = TempDir::new().unwrap();
    let rows: Vec<_> = [0, 100, 200].iter().map(|&n| record(Method::PffDnn, Some(11), n, 1.0 / (n + 1) as f64)).collect();
    let svg = render_plot(&[write(tmp.path(), "c.csv", &rows)], &PlotSpec::default()).unwrap();
    assert!(svg.starts_with("<?xml") || svg.starts_with("<svg"));
    assert!(svg.contains("version=\"1.1\""));
    assert_eq!(polylines(&svg), [3]);
    assert_eq!(svg.matches("class=\"legend-entry\"").count(), 1);
}

#[test]
fn two_methods_by_two_widths_give_four_series() {
    let tmp = TempDir::new().unwrap();
    let mut rows = Vec::new();
    for m in [Method::PhaseDnn, Method::PffDnn] {
        for dw in [11, 51] {
            for n in [0, 100] {
                rows.push(record(m, Some(dw), n, 0.5));
            }
        }
    }
    // Split across two files to exercise multi-file input.
    let a = write(tmp.path(), "a.csv", &rows[..4]);
    let b = write(tmp.path(), "b.csv", &rows[4..]);
    let svg = render_plot(&[a.clone(), b.clone()], &PlotSpec::default()).unwrap();
    assert_eq!(polylines(&svg), [2, 2, 2, 2]);
    assert_eq!(svg.matches("class=\"legend-entry\"").count(), 4);
    assert_eq!(svg, render_plot(&[a, b], &PlotSpec::default()).unwrap());
}

#[test]
fn reconstruction_overlay_has_truth_and_fit() {
    let tmp = TempDir::new().unwrap();
    let rows: Vec<_> = (0..5).map(|i| ReconstructionRow { x: i as f64, f_true: i as f64, f_fit: 0.9 * i as f64 }).collect();
    let path = tmp.path().join("r.csv");
    records::write_csv(&path, &rows).unwrap();
    let svg = render_plot(&[path], &PlotSpec::default()).unwrap();
    assert_eq!(polylines(&svg), [5, 5]);
}

#[test]
fn malformed_csv_names_the_row() {
    let tmp = TempDir::new().unwrap();
    let good = write(tmp.path(), "c.csv", &[record(Method::PffDnn, Some(11), 0, 1.0)]);
    let mut text = fs::read_to_string(&good).unwrap();
    text.push_str("pffdnn,sine_on_polynomial,11,0,100,oops,1,1,\n");
    fs::write(&good, text).unwrap();
    let err = render_plot(&[good], &PlotSpec::default()).unwrap_err().to_string();
    assert!(err.contains("row 3"), "{err}");
    assert!(err.contains("oops"), "{err}");
}

#[test]
fn mixed_schemas_and_unknown_headers_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let conv = write(tmp.path(), "c.csv", &[record(Method::PffDnn, Some(11), 0, 1.0)]);
    let samples = tmp.path().join("s.csv");
    records::write_csv(&samples, &[SampleRow { x: 0.0, f: 1.0 }]).unwrap();
    assert!(render_plot(&[conv, samples], &PlotSpec::default()).is_err());
    let odd = tmp.path().join("odd.csv");
    fs::write(&odd, "a,b\n1,2\n").unwrap();
    assert!(render_plot(&[odd], &PlotSpec::default()).is_err());
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), Just(0.0), Just(f64::MIN_POSITIVE), Just(-0.0)]
}

fn arb_record() -> impl Strategy<Value = ConvergenceRecord> {
    (
        prop::sample::select(Method::ALL.to_vec()),
        prop::sample::select(SignalKind::ALL.to_vec()),
        prop::option::of(1usize..200),
        any::<u64>(),
        any::<u64>(),
        (finite(), finite(), prop::option::of(finite()), prop::option::of(finite())),
    )
        .prop_map(|(method, signal, delta_omega, seed, update_count, (rmse, relative_rmse, test_rmse, train_mse))| {
            ConvergenceRecord { method, signal, delta_omega, seed, update_count, rmse, relative_rmse, test_rmse, train_mse }
        })
}

fn round_trip<R: records::CsvRow + PartialEq + std::fmt::Debug>(rows: &[R]) -> Vec<R> {
    let bytes = records::to_csv_bytes(rows);
    records::parse_csv(Path::new("mem.csv"), &bytes).unwrap()
}

proptest! {
    #[test]
    fn convergence_rows_round_trip(rows in prop::collection::vec(arb_record(), 0..20)) {
        let back = round_trip(&rows);
        // Bit-level equality, so -0.0 and 0.0 are told apart.
        let bits = |r: &ConvergenceRecord| (r.rmse.to_bits(), r.relative_rmse.to_bits(), r.test_rmse.map(f64::to_bits), r.train_mse.map(f64::to_bits));
        prop_assert_eq!(&back, &rows);
        prop_assert_eq!(back.iter().map(bits).collect::<Vec<_>>(), rows.iter().map(bits).collect::<Vec<_>>());
    }

    #[test]
    fn numeric_tables_round_trip(vals in prop::collection::vec((finite(), finite(), finite(), any::<u64>(), 0usize..10_000), 1..30)) {
        let recon: Vec<_> = vals.iter().map(|v| ReconstructionRow { x: v.0, f_true: v.1, f_fit: v.2 }).collect();
        prop_assert_eq!(round_trip(&recon), recon);
        let samples: Vec<_> = vals.iter().map(|v| SampleRow { x: v.0, f: v.1 }).collect();
        prop_assert_eq!(round_trip(&samples), samples);
        let spectrum: Vec<_> = vals.iter().map(|v| SpectrumRow { k: v.4, frequency: v.0, magnitude: v.1.abs(), re: v.1, im: v.2 }).collect();
        prop_assert_eq!(round_trip(&spectrum), spectrum);
        let timing: Vec<_> = vals.iter().map(|v| TimingRecord { update_count: v.3, wall_seconds: v.0.abs() }).collect();
        prop_assert_eq!(round_trip(&timing), timing);
    }
}
