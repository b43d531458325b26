use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use pffdnn::records::{self, ConvergenceRecord};
use tempfile::TempDir;

const QUICK: [&str; 8] = ["--samples", "301", "--updates", "40", "--eval-every", "20", "--net-shape", "1,6,1"];

fn pffdnn(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pffdnn"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn fit_succeeds_and_flags_override_the_config_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("exp.cfg");
    fs::write(&cfg, "# quick run\nsignal = enso\nseed = 3\nupdates = 9999\nmethod = phasednn\n").unwrap();
    let out = tmp.path().join("run");
    let mut args = vec!["fit", "--config", cfg.to_str().unwrap(), "--seed", "5"];
    args.extend(QUICK);
    let o = pffdnn(&args, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<ConvergenceRecord> = records::read_csv(&out.join("convergence.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.seed == 5 && r.signal.as_str() == "enso" && r.method.as_str() == "phasednn"));
}

#[test]
fn usage_errors_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    let cases: &[&[&str]] = &[
        &["fit", "--delta-omega", "11,21"],
        &["fit", "--bogus"],
        &["sweep", "--delta-omega", ""],
        &["fit", "--delta-omega", "0"],
        &["fit", "--signal", "nope"],
        &["fit", "--method", "lstm"],
        &["fit", "--updates", "-3"],
        &["fit", "--energy-threshold", "1.5"],
        &["sweep", "--method", ""],
        &["frobnicate"],
    ];
    for args in cases {
        let o = pffdnn(args, &tmp.path().join("never"));
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    assert!(!tmp.path().join("never").exists());
}

#[test]
fn broken_config_file_is_a_usage_error_naming_the_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "signal = f1\nupdates = many\n").unwrap();
    let o = pffdnn(&["fit", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn missing_inputs_are_runtime_errors() {
    let tmp = TempDir::new().unwrap();
    let o = pffdnn(&["fit", "--config", "/no/such/file.cfg"], tmp.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let o = pffdnn(&["plot", "/no/such/file.csv"], &tmp.path().join("p.svg"));
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
}

#[test]
fn sweep_signal_and_plot_round_trip() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("sweep");
    let mut args = vec!["sweep", "--signal", "f2", "--method", "pffdnn,vanilla", "--delta-omega", "11", "--delta-omega", "21", "--jobs", "2"];
    args.extend(QUICK);
    let o = pffdnn(&args, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<ConvergenceRecord> = records::read_csv(&out.join("sweep.csv")).unwrap();
    assert_eq!(rows.len(), 3 * 3);

    let sig = tmp.path().join("sig");
    let o = pffdnn(&["signal", "--signal", "f1", "--samples", "101"], &sig);
    assert!(o.status.success(), "{}", stderr(&o));
    let spectrum = fs::read_to_string(sig.join("spectrum.csv")).unwrap();
    assert_eq!(spectrum.lines().count(), 1 + 51);

    let svg = tmp.path().join("s.svg");
    let csv = out.join("sweep.csv");
    let o = pffdnn(&["plot", csv.to_str().unwrap(), "--metric", "rmse", "--title", "f2"], &svg);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<polyline").count(), 3);
}
