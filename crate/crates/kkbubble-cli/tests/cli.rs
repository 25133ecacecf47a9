use std::path::PathBuf;
use std::process::{Command, Output};

fn kkbubble(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kkbubble")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn report(text: &str, key: &str) -> String {
    let prefix = format!("# report: {key} = ");
    text.lines().find_map(|l| l.strip_prefix(&prefix)).unwrap_or_else(|| panic!("no report {key}")).to_string()
}

/// Data rows after the column line.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kkbubble-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn wormhole_spectrum_is_ascending_and_positive() {
    let o = kkbubble(&["spectrum", "--spacetime", "wormhole", "--mass", "1", "--count", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# header: kkbubble "));
    assert!(text.contains("# config-sha256: "));
    let lam: Vec<f64> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(lam.len(), 5);
    assert!(lam[0] > 0.0);
    assert!(lam.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn massless_witten_s_wave_points_to_transform() {
    let o = kkbubble(&["spectrum", "--spacetime", "witten", "--mass", "0", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("kind=config"));
    assert!(err.contains("transform"));
    assert!(o.stdout.is_empty());
}

#[test]
fn zero_count_gives_empty_table() {
    let o = kkbubble(&["spectrum", "--count", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("k,lambda,boundary_residual,drift"));
    assert!(rows(&text).is_empty());
}

#[test]
fn witten_spectrum_lies_above_the_floor() {
    let o = kkbubble(&["spectrum", "--spacetime", "witten", "--mass", "0.5", "--n", "-2", "--count", "3"]);
    assert_eq!(o.status.code(), Some(0));
    for r in rows(&stdout(&o)) {
        assert!(r[1].parse::<f64>().unwrap() > 1.0 + 4.0 + 0.25);
    }
}

#[test]
fn null_geodesic_through_bubble_is_straight() {
    let o = kkbubble(&["geodesic", "--preset", "null-through-bubble"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(report(&text, "straight_line_residual").parse::<f64>().unwrap() < 1e-8);
    assert_eq!(report(&text, "crosses_bubble"), "true");
    assert!(report(&text, "conserved_drift").parse::<f64>().unwrap() < 1e-8);
}

#[test]
fn through_origin_period_matches_quadrature() {
    let text = stdout(&kkbubble(&["geodesic", "--preset", "through-origin"]));
    let p: f64 = report(&text, "period_predicted").parse().unwrap();
    let m: f64 = report(&text, "period_measured").parse().unwrap();
    assert!((p - m).abs() < 1e-4 * p);
}

#[test]
fn preset_rejects_custom_coordinates() {
    let o = kkbubble(&["geodesic", "--preset", "null-circle", "--coords", "0,1,2,3,4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn custom_spacelike_data_is_a_config_error() {
    let o = kkbubble(&["geodesic", "--preset", "custom", "--coords", "0,2,1.5,0,0", "--velocity", "0,1,0,0,0"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn wormhole_curvature_report() {
    let o = kkbubble(&["curvature", "--spacetime", "wormhole", "--T", "0.1", "--X", "1,0,0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(report(&text, "scalar").parse::<f64>().unwrap().abs() < 1e-12);
    assert!(report(&text, "nec_witness").parse::<f64>().unwrap() < 0.0);
    assert_eq!(rows(&text).len(), 16 + 16 + 1 + 6);
}

#[test]
fn curvature_outside_the_chart_is_rejected() {
    assert_eq!(kkbubble(&["curvature", "--T", "2", "--X", "1,0,0"]).status.code(), Some(2));
    assert_eq!(kkbubble(&["curvature", "--spacetime", "witten"]).status.code(), Some(2));
}

#[test]
fn desitter_suite_passes() {
    let o = kkbubble(&["verify", "--suite", "desitter"]);
    assert_eq!(o.status.code(), Some(0));
    let r = rows(&stdout(&o));
    assert_eq!(r.len(), 4);
    assert!(r.iter().all(|row| row[0] == "desitter" && row[4] == "PASS"));
}

#[test]
fn unknown_suite_and_bad_values_exit_2() {
    assert_eq!(kkbubble(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
    assert_eq!(kkbubble(&["spectrum", "--set", "spectrum.count=-3"]).status.code(), Some(2));
    assert_eq!(kkbubble(&["spectrum", "--set", "spectrum.bogus=1"]).status.code(), Some(2));
    assert_eq!(kkbubble(&["spectrum", "--spacetime", "minkowski"]).status.code(), Some(2));
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_kkbubble"))
            .args(["scatter", "--seed", "5", "--n", "0,1"])
            .env("KKBUBBLE_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    assert_eq!(a, run("1"));
    assert_eq!(a, run("3"));
    let bad = Command::new(env!("CARGO_BIN_EXE_kkbubble")).arg("scatter").env("KKBUBBLE_THREADS", "zero").output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn effective_config_reruns_identically() {
    let dir = scratch("roundtrip");
    let cfg = dir.join("effective.toml");
    let first = kkbubble(&["evolve", "--l", "1", "--steps", "4", "--dump-config", cfg.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    let second = kkbubble(&["evolve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn nested_config_file_and_flag_precedence() {
    let dir = scratch("nested");
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "[spectrum]\nspacetime = \"wormhole\"\nmass = 2.0\ncount = 2\n").unwrap();
    let a = stdout(&kkbubble(&["spectrum", "--config", cfg.to_str().unwrap()]));
    assert_eq!(rows(&a).len(), 2);
    let b = stdout(&kkbubble(&["spectrum", "--config", cfg.to_str().unwrap(), "--count", "3"]));
    assert_eq!(rows(&b).len(), 3);
    assert_eq!(rows(&a)[0], rows(&b)[0]);
}

#[test]
fn scatter_writes_coefficients_and_reports_isometry() {
    let dir = scratch("scatter");
    let (out, coef) = (dir.join("amps.csv"), dir.join("in.coef"));
    let o = kkbubble(&["scatter", "-o", out.to_str().unwrap(), "--coefficients", coef.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(report(&text, "isometry_defect").parse::<f64>().unwrap() < 1e-12);
    assert!(report(&text, "symplectic_defect").parse::<f64>().unwrap() < 1e-10);
    let coefs = kkbubble::fields::read_coefficients(&std::fs::read_to_string(&coef).unwrap()).unwrap();
    assert_eq!(coefs.entries.len(), rows(&text).len());
}

#[test]
fn evolve_energy_decreases_and_snapshots_are_written() {
    let dir = scratch("evolve");
    let snaps = dir.join("snap.csv");
    let o = kkbubble(&["evolve", "--n", "0,1", "--l", "2", "--m", "-1", "--snapshots", snaps.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(report(&text, "energy_nonincreasing_for_t_ge_0"), "true");
    let e: Vec<f64> = rows(&text).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(e.windows(2).all(|w| w[1] <= w[0]));
    let s = std::fs::read_to_string(&snaps).unwrap();
    assert_eq!(s.lines().filter(|l| l.starts_with("t,")).count(), 1);
    assert!(s.lines().count() > 1000);
}

#[test]
fn unresolved_data_is_a_convergence_failure() {
    let o = kkbubble(&["evolve", "--modes", "4", "--width", "0.2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr).unwrap().contains("kind=convergence"));
}

#[test]
fn transform_table_and_parseval() {
    let o = kkbubble(&["transform", "--nx", "256", "--nlambda", "256", "--stride", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(rows(&text).len(), 64);
    assert!(report(&text, "parseval_defect").parse::<f64>().unwrap() < 1e-2);
}
