use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qpolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpolar")).args(args).env_remove("QPOLAR_WORKERS").output().unwrap()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn fig2_partition_has_four_information_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpolar(&["construct", "--preset", "fig2", "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let codes = fs::read_to_string(dir.path().join("codes.csv")).unwrap();
    assert_eq!(codes.lines().nth(1).unwrap(), "erasure,0.15,8,0.75,0.75,0.75,0.5,0.5,4,2,2,0");
    let part = fs::read_to_string(dir.path().join("partition_erasure_0.15_N8_R0.75.csv")).unwrap();
    let info: Vec<&str> =
        part.lines().skip(1).filter(|l| l.contains(",information,")).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(info, ["3", "4", "5", "6"]);
}

#[test]
fn minimal_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("n2.toml");
    fs::write(&cfg, "channel = \"erasure\"\nparameters = [0.3]\nblocklengths = [2]\nrates = [0.5]\n").unwrap();
    let o = qpolar(&["construct", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let part = fs::read_to_string(dir.path().join("partition_erasure_0.3_N2_R0.5.csv")).unwrap();
    assert_eq!(part.lines().count(), 3);
}

#[test]
fn manifest_lists_every_file_with_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpolar(&["simulate", "--preset", "smoke", "--trials", "50", "--format", "csv,svg", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest_simulate.json")).unwrap()).unwrap();
    let listed: Vec<&str> = manifest["outputs"].as_array().unwrap().iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert_eq!(listed, ["simulate.csv", "smoke.svg"]);
    assert_eq!(manifest["config"]["trials"], 50);
    for f in manifest["outputs"].as_array().unwrap() {
        assert_eq!(f["sha256"].as_str().unwrap().len(), 64);
    }
}

#[test]
fn single_trial_interval_brackets_everything() {
    let dir = tempfile::tempdir().unwrap();
    let o = qpolar(&["simulate", "--preset", "smoke", "--trials", "1", "--out", &out_arg(dir.path())]);
    assert!(o.status.success());
    let mut r = csv::Reader::from_path(dir.path().join("simulate.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (p, lo, hi) = (col("p_hat"), col("ci_low"), col("ci_high"));
    for rec in r.records() {
        let rec = rec.unwrap();
        let [p, l, h]: [f64; 3] = [p, lo, hi].map(|i| rec[i].parse().unwrap());
        assert!((0.0..=p).contains(&l) && p <= h && h <= 1.0 && h - l >= 0.9, "{rec:?}");
    }
}

#[test]
fn fig4a_echo_carries_per_blocklength_rates() {
    let o = qpolar(&["simulate", "--preset", "fig4a", "--dry-run"]);
    assert!(o.status.success());
    let c: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(c["rates"], serde_json::json!([0.398]));
    assert_eq!(c["rate_overrides"], serde_json::json!([{ "blocklength": 64, "rates": [0.375] }]));
    assert_eq!(c["blocklengths"], serde_json::json!([64, 256, 1024]));
}

#[test]
fn empty_threshold_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.toml");
    fs::write(&cfg, "channel = \"erasure\"\nparameters = []\nblocklengths = [64]\n").unwrap();
    let o = qpolar(&["threshold", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    let t = fs::read_to_string(dir.path().join("threshold.csv")).unwrap();
    assert_eq!(t.lines().count(), 1);
    assert!(t.contains("privacy_parameter") && t.contains("reference_rate"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(qpolar(&["bounds", "--preset", "fig5b", "--out", &out]).status.code(), Some(2));
    assert_eq!(qpolar(&["construct", "--preset", "nope"]).status.code(), Some(2));
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "channel = \"erasure\"\nparameters = [0.1]\nblocklengths = [12]\nrates = [0.5]\n").unwrap();
    let o = qpolar(&["construct", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blocklengths"));
    assert_eq!(qpolar(&["plot", "--preset", "fig3", "--out", &out]).status.code(), Some(3));
}

#[test]
fn plots_follow_the_csvs() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let cfg = dir.path().join("b.toml");
    fs::write(&cfg, "command = \"bounds\"\nchannel = \"erasure\"\nparameters = [0.15]\nblocklengths = [64, 256]\nrates = [0.1, 0.3, 0.5]\n").unwrap();
    assert!(qpolar(&["bounds", "--config", cfg.to_str().unwrap(), "--out", &out]).status.success());
    let o = qpolar(&["plot", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let svg = fs::read_to_string(dir.path().join("bounds.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 4);
    assert!(svg.contains("upper N=64") && svg.contains("lower N=256"));
}

#[test]
fn threshold_plot_has_reference_line() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = qpolar(&["threshold", "--preset", "smoke", "--format", "csv,svg", "--out", &out]);
    assert!(o.status.success());
    let svg = fs::read_to_string(dir.path().join("smoke.svg")).unwrap();
    assert!(svg.contains(">reference<") && svg.contains("stroke=\"black\" stroke-width=\"1.5\""));
}

#[test]
fn profile_only_at_two_to_the_twenty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("big.toml");
    fs::write(&cfg, "channel = \"erasure\"\nparameters = [0.15]\nblocklengths = [1048576]\nprofile_only = true\n").unwrap();
    let o = qpolar(&["construct", "--config", cfg.to_str().unwrap(), "--out", &out_arg(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let body = fs::read_to_string(dir.path().join("profile_erasure_0.15_N1048576_amplitude.csv")).unwrap();
    assert_eq!(body.lines().count(), (1 << 20) + 1);
}
