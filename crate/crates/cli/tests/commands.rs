use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hilbert(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hilbert")).args(args).current_dir(dir).output().expect("binary runs")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL_COUNTING: &str = "[group]\nbuiltin = \"triangle-2-3-7\"\n\n[orbit_counting]\nt_max = 6.0\nstep = 0.5\nexpected_exponent = 1.0\nexponent_tol = 0.2\n";

#[test]
fn no_arguments_prints_usage() {
    let t = tempfile::tempdir().unwrap();
    let o = hilbert(&[], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn unknown_subcommand_is_an_error() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(hilbert(&["frobnicate"], t.path()).status.code(), Some(2));
}

#[test]
fn dist_on_the_ball_example() {
    let t = tempfile::tempdir().unwrap();
    let cfg = configs().join("ball.toml");
    let o = hilbert(&["dist", "--config", cfg.to_str().unwrap()], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "0.5493061443");
    let o = hilbert(&["dist", "--x", "-0.5,0", "--y", "0.5,0"], t.path());
    assert_eq!(stdout(&o).trim(), format!("{:.10}", 2.0 * 0.5f64.atanh()));
}

#[test]
fn dist_errors() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(hilbert(&["dist", "--x", "0,0"], t.path()).status.code(), Some(2));
    assert_eq!(hilbert(&["dist", "--x", "0,0", "--y", "2,0"], t.path()).status.code(), Some(2));
    assert_eq!(hilbert(&["dist", "--x", "0,0,0", "--y", "0,0"], t.path()).status.code(), Some(2));
}

#[test]
fn unknown_config_key_names_the_key() {
    let t = tempfile::tempdir().unwrap();
    let p = t.path().join("bad.toml");
    fs::write(&p, "[group]\nbuiltin = \"schottky\"\n\n[geodesic_counting]\ndelta_override_typo = 1.0\n").unwrap();
    let o = hilbert(&["experiment", "geodesic-counting", "--config", p.to_str().unwrap(), "--out", "run"], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("delta_override_typo"), "{}", stderr(&o));
    assert!(!t.path().join("run").exists());
}

#[test]
fn experiment_exit_codes_and_force() {
    let t = tempfile::tempdir().unwrap();
    let good = t.path().join("good.toml");
    fs::write(&good, SMALL_COUNTING).unwrap();
    let o = hilbert(&["experiment", "orbit-counting", "--config", "good.toml", "--out", "run"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let manifest = fs::read_to_string(t.path().join("run/manifest.toml")).unwrap();
    let m: toml::Table = toml::from_str(&manifest).unwrap();
    assert_eq!(m["seed"].as_integer(), Some(0));
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let verdicts = m["verdicts"].as_array().unwrap();
    assert!(verdicts.iter().any(|v| v["criterion"].as_str() == Some("orbit-counting-slope")));
    let counts = fs::read_to_string(t.path().join("run/counts.csv")).unwrap();
    assert!(counts.starts_with("t,value,stderr\n"));

    // A second run into the same directory needs --force.
    fs::write(t.path().join("run/marker.txt"), "keep").unwrap();
    let o = hilbert(&["experiment", "orbit-counting", "--config", "good.toml", "--out", "run"], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(fs::read_to_string(t.path().join("run/manifest.toml")).unwrap(), manifest);

    let bad = t.path().join("bad.toml");
    fs::write(&bad, SMALL_COUNTING.replace("expected_exponent = 1.0", "expected_exponent = 2.0")).unwrap();
    let o = hilbert(&["experiment", "orbit-counting", "--config", "bad.toml", "--out", "run", "--force"], t.path());
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stdout(&o).contains("FAIL orbit-counting-slope"));
    let m: toml::Table = toml::from_str(&fs::read_to_string(t.path().join("run/manifest.toml")).unwrap()).unwrap();
    assert_eq!(m["passed"].as_bool(), Some(false));
    assert!(t.path().join("run/marker.txt").exists());
}

#[test]
fn experiment_needs_an_output_directory() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("c.toml"), SMALL_COUNTING).unwrap();
    assert_eq!(hilbert(&["experiment", "orbit-counting", "--config", "c.toml"], t.path()).status.code(), Some(2));
    assert_eq!(hilbert(&["experiment", "no-such-run", "--config", "c.toml", "--out", "r"], t.path()).status.code(), Some(2));
}

#[test]
fn ps_measure_csv() {
    let t = tempfile::tempdir().unwrap();
    fs::write(t.path().join("m.toml"), "[group]\nbuiltin = \"schottky\"\n\n[measure]\nradius = 10.0\n").unwrap();
    let o = hilbert(&["ps-measure", "--config", "m.toml", "--out", "mu.csv"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(t.path().join("mu.csv")).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# exponent: ")));
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    assert_eq!(r.headers().unwrap(), vec!["x0", "x1", "weight", "distance", "displacement"]);
    let mut total = 0.0;
    let mut rows = 0;
    for rec in r.records() {
        let rec = rec.unwrap();
        let x: f64 = rec[0].parse().unwrap();
        let y: f64 = rec[1].parse().unwrap();
        assert!(x * x + y * y < 1.0);
        total += rec[2].parse::<f64>().unwrap();
        rows += 1;
    }
    assert!(rows > 100);
    // Weights are measured from the orbit point itself, so the mass is one.
    assert!((total - 1.0).abs() < 1e-12, "{total}");
    assert_eq!(hilbert(&["ps-measure", "--config", "m.toml", "--out", "mu.csv"], t.path()).status.code(), Some(2));
    assert_eq!(hilbert(&["ps-measure", "--config", "m.toml", "--out", "mu.csv", "--force"], t.path()).status.code(), Some(0));
}

#[test]
fn oracles() {
    let t = tempfile::tempdir().unwrap();
    let o = hilbert(&["oracle"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for name in ["klein", "ball", "census"] {
        assert!(out.contains(&format!("PASS {name}")), "{out}");
    }
    let cfg = configs().join("schottky.toml");
    let o = hilbert(&["oracle", "census", "--config", cfg.to_str().unwrap(), "--length", "7"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = hilbert(&["oracle", "ball", "--builtin", "triangle-2-3-7", "--radius", "3"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(hilbert(&["oracle", "census", "--builtin", "triangle-2-3-7"], t.path()).status.code(), Some(2));
}

#[test]
fn group_summary() {
    let t = tempfile::tempdir().unwrap();
    let o = hilbert(&["group", "--builtin", "schottky", "--radius", "6"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("generator a: Hyperbolic, translation length 2.0000000000"));
    assert_eq!(hilbert(&["group", "--builtin", "nonesuch"], t.path()).status.code(), Some(2));
}

#[test]
fn generator_file_relative_to_config() {
    let t = tempfile::tempdir().unwrap();
    let sub = t.path().join("cfg");
    fs::create_dir(&sub).unwrap();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/schottky.txt");
    fs::copy(data, sub.join("gens.txt")).unwrap();
    fs::write(sub.join("g.toml"), "[group]\ngenerators = \"gens.txt\"\nfree = true\n").unwrap();
    let o = hilbert(&["group", "--config", "cfg/g.toml", "--radius", "5"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    fs::write(sub.join("g.toml"), "[group]\ngenerators = \"missing.txt\"\n").unwrap();
    let o = hilbert(&["group", "--config", "cfg/g.toml"], t.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("group.generators"));
}

#[test]
fn shipped_triangle_config_reports_the_slope() {
    let t = tempfile::tempdir().unwrap();
    let cfg = configs().join("triangle237.toml");
    let o = hilbert(&["experiment", "orbit-counting", "--config", cfg.to_str().unwrap(), "--out", "run"], t.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let m: toml::Table = toml::from_str(&fs::read_to_string(t.path().join("run/manifest.toml")).unwrap()).unwrap();
    let slope = m["verdicts"].as_array().unwrap().iter().find(|v| v["criterion"].as_str() == Some("orbit-counting-slope")).unwrap();
    assert_eq!(slope["passed"].as_bool(), Some(true));
    assert!(slope["observed"].as_float().unwrap() < 0.05);
}
