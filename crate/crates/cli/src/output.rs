//! Run directories, manifests and CSV files.

use crate::config::{serialize_config, RunConfig};
use hilbert_core::experiments::{ExperimentResult, Table};
use hilbert_core::measures::{AtomicMeasure, Normalization};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

/// Decimal text that parses back to the same double.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn config_hash(cfg: &RunConfig) -> String {
    hex::encode(Sha256::digest(serialize_config(cfg).as_bytes()))
}

/// Refuse to reuse a nonempty directory unless forced; with `force`, remove
/// the files a previous run wrote.
pub fn prepare_dir(dir: &Path, force: bool) -> io::Result<()> {
    if dir.exists() {
        let mut entries = fs::read_dir(dir)?.peekable();
        if entries.peek().is_some() {
            if !force {
                return Err(io::Error::new(
                    io::ErrorKind::AlreadyExists,
                    format!("{} is not empty; pass --force to overwrite", dir.display()),
                ));
            }
            for e in entries {
                let p = e?.path();
                let ours = p.extension().is_some_and(|x| x == "csv") || p.file_name().is_some_and(|n| n == "manifest.toml" || n == "config.toml");
                if ours && p.is_file() {
                    fs::remove_file(p)?;
                }
            }
        }
    }
    fs::create_dir_all(dir)
}

pub fn prepare_file(path: &Path, force: bool) -> io::Result<()> {
    if path.exists() && !force {
        return Err(io::Error::new(
            io::ErrorKind::AlreadyExists,
            format!("{} exists; pass --force to overwrite", path.display()),
        ));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

pub fn table_file(name: &str) -> String {
    let stem: String = name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect();
    format!("{stem}.csv")
}

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

pub fn write_table(path: &Path, t: &Table) -> io::Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record([t.param.as_str(), "value", "stderr"]).map_err(csv_err)?;
    for r in &t.rows {
        w.write_record([fmt_f64(r.param), fmt_f64(r.value), fmt_f64(r.stderr)]).map_err(csv_err)?;
    }
    w.flush()
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    group: &'a str,
    config_hash: String,
    seed: u64,
    passed: bool,
    wall_seconds: f64,
    verdicts: Vec<ManifestVerdict<'a>>,
    fits: Vec<ManifestFit<'a>>,
    tables: Vec<ManifestTable<'a>>,
    settings: toml::Table,
    extra: toml::Table,
}

#[derive(Serialize)]
struct ManifestVerdict<'a> {
    criterion: &'a str,
    description: &'a str,
    observed: f64,
    threshold: f64,
    passed: bool,
}

#[derive(Serialize)]
struct ManifestFit<'a> {
    name: &'a str,
    value: f64,
    stderr: f64,
    ci_low: f64,
    ci_high: f64,
}

#[derive(Serialize)]
struct ManifestTable<'a> {
    name: &'a str,
    file: String,
    param: &'a str,
    value: &'a str,
    rows: usize,
}

/// Write `manifest.toml`, `config.toml` and one CSV per table into `dir`.
pub fn write_run(dir: &Path, cfg: &RunConfig, group: &str, res: &ExperimentResult) -> io::Result<PathBuf> {
    fs::write(dir.join("config.toml"), serialize_config(cfg))?;
    let mut tables = Vec::new();
    for t in &res.tables {
        let file = table_file(&t.name);
        write_table(&dir.join(&file), t)?;
        tables.push(ManifestTable { name: &t.name, file, param: &t.param, value: &t.value, rows: t.rows.len() });
    }
    let manifest = Manifest {
        experiment: &res.id,
        group,
        config_hash: config_hash(cfg),
        seed: cfg.seed,
        passed: res.passed(),
        wall_seconds: res.wall_seconds,
        verdicts: res
            .verdicts
            .iter()
            .map(|v| ManifestVerdict {
                criterion: &v.criterion,
                description: &v.description,
                observed: v.observed,
                threshold: v.threshold,
                passed: v.passed,
            })
            .collect(),
        fits: res
            .fits
            .iter()
            .map(|f| ManifestFit { name: &f.name, value: f.value, stderr: f.stderr, ci_low: f.ci.0, ci_high: f.ci.1 })
            .collect(),
        tables,
        settings: res.config.iter().map(|(k, v)| (k.clone(), toml::Value::String(v.clone()))).collect(),
        extra: res.extra.iter().map(|(k, v)| (k.clone(), toml::Value::Float(*v))).collect(),
    };
    let path = dir.join("manifest.toml");
    fs::write(&path, toml::to_string(&manifest).map_err(io::Error::other)?)?;
    Ok(path)
}

/// Atom table with a `#` metadata block.
pub fn write_measure(path: &Path, mu: &AtomicMeasure, group: &str, cfg: &RunConfig) -> io::Result<()> {
    let meta = mu.meta();
    let join = |v: &hilbert_core::projective::Vector| v.iter().map(|c| fmt_f64(*c)).collect::<Vec<_>>().join(" ");
    let mut f = fs::File::create(path)?;
    writeln!(f, "# group: {group}")?;
    writeln!(f, "# config_hash: {}", config_hash(cfg))?;
    writeln!(f, "# basepoint: {}", join(&meta.basepoint))?;
    writeln!(f, "# orbit_point: {}", join(&meta.orbit_point))?;
    writeln!(f, "# exponent: {}", fmt_f64(meta.exponent))?;
    writeln!(f, "# radius: {}", fmt_f64(meta.radius))?;
    let norm = match meta.normalization {
        Normalization::OrbitBasepoint => "orbit-basepoint",
        Normalization::None => "none",
    };
    writeln!(f, "# normalization: {norm}")?;
    writeln!(f, "# normalizer: {}", fmt_f64(meta.normalizer))?;
    writeln!(f, "# atoms: {}", mu.len())?;
    let dim = meta.basepoint.len();
    let mut w = csv::Writer::from_writer(f);
    let mut header: Vec<String> = (0..dim).map(|i| format!("x{i}")).collect();
    header.extend(["weight", "distance", "displacement"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for a in mu.atoms() {
        let mut row: Vec<String> = a.affine.iter().map(|c| fmt_f64(*c)).collect();
        row.extend([fmt_f64(a.weight), fmt_f64(a.distance), fmt_f64(a.displacement)]);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()
}
