//! CSV output, figure presets, and the one-shot bound computation behind the
//! command-line tool.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::bounds::{hsps_security_bounds, key_rate_hsps, SecurityBounds, SourceKind};
use crate::config::{ConfigError, RunManifest};
use crate::observables::{statistics_from_counts, IntensityCounts, ObservedStatistics, RawCounts};
use crate::optimizer::{
    max_secure_distance_from_rates, sweep_distances, Curve, KeyRatePoint, SourceSelection, SweepConfig,
};
use crate::protocol::ObservablesSnapshot;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),

    #[error(transparent)]
    Model(#[from] crate::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },

    #[error("unknown figure {0} (expected 1, 2 or 3)")]
    UnknownFigure(u8),
}

impl RunError {
    /// 1 for anything the user can fix in the inputs, 2 for I/O trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. } | RunError::Config(ConfigError::Io { .. }) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub const CSV_COLUMNS: [&str; 15] = [
    "distance_km",
    "source_kind",
    "mu",
    "mu_prime_opt",
    "Y0",
    "Y_mu",
    "Y_mu_prime",
    "E_mu",
    "E_mu_prime",
    "Y1_lower",
    "delta1",
    "e1_upper",
    "key_rate",
    "ideal_rate",
    "feasible_flag",
];

/// Shortest scientific representation that parses back to the same `f64`.
fn num(x: f64) -> String {
    format!("{x:e}")
}

fn point_record(p: &KeyRatePoint) -> [String; 15] {
    let o = &p.observables;
    let b = &p.bounds;
    [
        num(p.distance_km),
        p.source_kind.to_string(),
        num(p.mu),
        num(p.mu_prime),
        num(o.y0),
        num(o.y_mu),
        num(o.y_mu_prime),
        num(o.e_mu),
        num(o.e_mu_prime),
        num(b.y1_lower),
        num(b.delta1),
        num(b.e1_upper),
        num(p.key_rate),
        p.ideal_rate.map(num).unwrap_or_default(),
        (b.feasible as u8).to_string(),
    ]
}

/// Render points as CSV text: header, then one row per point in the given order.
pub fn points_to_csv(points: &[KeyRatePoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("in-memory write");
    for p in points {
        w.write_record(point_record(p)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV output is ASCII")
}

pub fn emit_csv(points: &[KeyRatePoint], path: &Path) -> Result<(), RunError> {
    fs::write(path, points_to_csv(points)).map_err(io_err(path))
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    distance_km: f64,
    source_kind: String,
    mu: f64,
    mu_prime_opt: f64,
    #[serde(rename = "Y0")]
    y0: f64,
    #[serde(rename = "Y_mu")]
    y_mu: f64,
    #[serde(rename = "Y_mu_prime")]
    y_mu_prime: f64,
    #[serde(rename = "E_mu")]
    e_mu: f64,
    #[serde(rename = "E_mu_prime")]
    e_mu_prime: f64,
    #[serde(rename = "Y1_lower")]
    y1_lower: f64,
    delta1: f64,
    e1_upper: f64,
    key_rate: f64,
    ideal_rate: Option<f64>,
    feasible_flag: u8,
}

/// Parse a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<KeyRatePoint>, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let fmt = |message: String| RunError::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| fmt(e.to_string()))?;
    if header.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(fmt("unexpected header".into()));
    }
    reader
        .deserialize::<CsvRow>()
        .map(|row| {
            let r = row.map_err(|e| fmt(e.to_string()))?;
            Ok(KeyRatePoint {
                distance_km: r.distance_km,
                source_kind: r.source_kind.parse().map_err(fmt)?,
                mu: r.mu,
                mu_prime: r.mu_prime_opt,
                key_rate: r.key_rate,
                ideal_rate: r.ideal_rate,
                bounds: SecurityBounds {
                    y1_lower: r.y1_lower,
                    delta1: r.delta1,
                    e1_upper: r.e1_upper,
                    feasible: r.feasible_flag != 0,
                },
                observables: ObservablesSnapshot {
                    y0: r.y0,
                    y_mu: r.y_mu,
                    y_mu_prime: r.y_mu_prime,
                    e_mu: r.e_mu,
                    e_mu_prime: r.e_mu_prime,
                },
            })
        })
        .collect()
}

/// One plotted curve of a figure.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub curve: Curve,
    pub cfg: SweepConfig,
}

/// Curves of one of the three reproduced figures, built on top of `base`
/// (channel, distance grid, search settings and `f` are taken from it).
pub fn figure_series(fig: u8, base: &SweepConfig) -> Result<Vec<Series>, RunError> {
    let preset = |eta_a: f64, mu: f64, kind: SourceKind| {
        let mut cfg = base.with_mu(mu);
        cfg.protocol.eta_a = eta_a;
        cfg.sources = SourceSelection {
            hsps: kind == SourceKind::Hsps,
            wcs: kind == SourceKind::Wcs,
            ideal: true,
        };
        cfg
    };
    let series = |label: &str, curve: Curve, cfg: SweepConfig| Series {
        label: label.to_string(),
        curve,
        cfg,
    };
    use SourceKind::{Hsps, Wcs};
    Ok(match fig {
        1 => vec![
            series("ideal", Curve::Ideal(Hsps), preset(0.8, 0.01, Hsps)),
            series("mu_0.01", Curve::ThreeIntensity(Hsps), preset(0.8, 0.01, Hsps)),
            series("mu_0.05", Curve::ThreeIntensity(Hsps), preset(0.8, 0.05, Hsps)),
            series("mu_0.10", Curve::ThreeIntensity(Hsps), preset(0.8, 0.10, Hsps)),
        ],
        2 | 3 => {
            let eta_a = if fig == 2 { 0.8 } else { 0.6 };
            vec![
                series("hsps_ideal", Curve::Ideal(Hsps), preset(eta_a, 0.05, Hsps)),
                series("hsps_mu_0.05", Curve::ThreeIntensity(Hsps), preset(eta_a, 0.05, Hsps)),
                series("wcs_ideal", Curve::Ideal(Wcs), preset(eta_a, 0.05, Wcs)),
                series("wcs_mu_0.05", Curve::ThreeIntensity(Wcs), preset(eta_a, 0.05, Wcs)),
            ]
        }
        other => return Err(RunError::UnknownFigure(other)),
    })
}

/// Computed curves of one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub figure: u8,
    pub distances: Vec<f64>,
    pub labels: Vec<String>,
    /// `rates[s][i]` is series `s` at `distances[i]`.
    pub rates: Vec<Vec<f64>>,
    /// Longest secure distance per series.
    pub cutoffs: Vec<Option<f64>>,
    /// Full rows of the three-intensity sweeps.
    pub points: Vec<KeyRatePoint>,
}

pub fn compute_figure(fig: u8, base: &SweepConfig) -> Result<FigureData, RunError> {
    let series = figure_series(fig, base)?;
    let distances = base.distances();
    let mut rates = Vec::with_capacity(series.len());
    let mut cutoffs = Vec::with_capacity(series.len());
    let mut points = Vec::new();
    // ideal curves reuse the sweep of the matching three-intensity preset
    let mut sweeps: Vec<(SweepConfig, Vec<KeyRatePoint>)> = Vec::new();
    for s in &series {
        let cached = sweeps.iter().position(|(c, _)| *c == s.cfg);
        let idx = match cached {
            Some(i) => i,
            None => {
                sweeps.push((s.cfg, sweep_distances(&s.cfg)?));
                sweeps.len() - 1
            }
        };
        let sweep = &sweeps[idx].1;
        let curve_rates: Vec<f64> = match s.curve {
            Curve::ThreeIntensity(_) => {
                points.extend_from_slice(sweep);
                sweep.iter().map(|p| p.key_rate).collect()
            }
            Curve::Ideal(_) => sweep.iter().map(|p| p.ideal_rate.unwrap_or(0.0)).collect(),
        };
        cutoffs.push(max_secure_distance_from_rates(
            &s.cfg,
            s.curve,
            &distances,
            &curve_rates,
        )?);
        rates.push(curve_rates);
    }
    Ok(FigureData {
        figure: fig,
        distances,
        labels: series.into_iter().map(|s| s.label).collect(),
        rates,
        cutoffs,
        points,
    })
}

impl FigureData {
    /// Wide table: distance, then `log10` of each series' key rate.
    pub fn curves_csv(&self) -> String {
        let mut out = String::from("distance_km");
        for l in &self.labels {
            write!(out, ",log10_rate_{l}").unwrap();
        }
        out.push('\n');
        for (i, d) in self.distances.iter().enumerate() {
            out.push_str(&num(*d));
            for r in &self.rates {
                write!(out, ",{}", num(r[i].log10())).unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn cutoffs_csv(&self) -> String {
        let mut out = String::from("series,max_secure_distance_km\n");
        for (l, c) in self.labels.iter().zip(&self.cutoffs) {
            writeln!(out, "{l},{}", c.map(num).unwrap_or_default()).unwrap();
        }
        out
    }

    pub fn cutoff(&self, label: &str) -> Option<f64> {
        let i = self.labels.iter().position(|l| l == label)?;
        self.cutoffs[i]
    }

    pub fn rate(&self, label: &str, distance_km: f64) -> Option<f64> {
        let s = self.labels.iter().position(|l| l == label)?;
        let i = self.distances.iter().position(|&d| d == distance_km)?;
        Some(self.rates[s][i])
    }
}

fn write_artifact(dir: &Path, name: &str, contents: &str, manifest: &mut RunManifest) -> Result<(), RunError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(io_err(&path))?;
    manifest.artifacts.push(name.to_string());
    Ok(())
}

fn finish(dir: &Path, manifest: &RunManifest) -> Result<(), RunError> {
    let path = dir.join("manifest.toml");
    fs::write(&path, manifest.to_toml()).map_err(io_err(&path))
}

/// Write `figure<N>.csv`, `figure<N>_points.csv`, `figure<N>_cutoffs.csv`
/// and `manifest.toml` into `out`.
pub fn run_figure(fig: u8, cfg: &SweepConfig, out: &Path) -> Result<RunManifest, RunError> {
    let data = compute_figure(fig, cfg)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut manifest = RunManifest::new(&format!("figure {fig}"), cfg);
    write_artifact(out, &format!("figure{fig}.csv"), &data.curves_csv(), &mut manifest)?;
    write_artifact(
        out,
        &format!("figure{fig}_points.csv"),
        &points_to_csv(&data.points),
        &mut manifest,
    )?;
    write_artifact(
        out,
        &format!("figure{fig}_cutoffs.csv"),
        &data.cutoffs_csv(),
        &mut manifest,
    )?;
    finish(out, &manifest)?;
    Ok(manifest)
}

/// Write `sweep.csv` and `manifest.toml` into `out`.
pub fn run_sweep(cfg: &SweepConfig, out: &Path) -> Result<RunManifest, RunError> {
    let points = sweep_distances(cfg)?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let mut manifest = RunManifest::new("sweep", cfg);
    write_artifact(out, "sweep.csv", &points_to_csv(&points), &mut manifest)?;
    finish(out, &manifest)?;
    Ok(manifest)
}

/// Tallies recorded in an experiment, one table per intensity class.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFile {
    pub mu: f64,
    pub mu_prime: f64,
    pub vacuum: IntensityCounts,
    pub decoy: IntensityCounts,
    pub signal: IntensityCounts,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsReport {
    pub observed: ObservedStatistics,
    pub bounds: SecurityBounds,
    pub key_rate: f64,
}

impl BoundsReport {
    pub fn to_text(&self) -> String {
        let o = &self.observed;
        let b = &self.bounds;
        let mut out = String::new();
        for (k, v) in [
            ("mu", o.mu),
            ("mu_prime", o.mu_prime),
            ("Y0", o.y0),
            ("Y_mu", o.y_mu),
            ("Y_mu_prime", o.y_mu_prime),
            ("Ytilde_mu", o.ty_mu),
            ("Ytilde_mu_prime", o.ty_mu_prime),
            ("E_mu", o.e_mu),
            ("E_mu_prime", o.e_mu_prime),
            ("Y1_lower", b.y1_lower),
            ("delta1", b.delta1),
            ("e1_upper", b.e1_upper),
            ("key_rate", self.key_rate),
        ] {
            writeln!(out, "{k} = {}", num(v)).unwrap();
        }
        writeln!(out, "feasible = {}", b.feasible).unwrap();
        out
    }
}

/// Bounds and key rate from recorded tallies, using the trigger detector and
/// `f` from `cfg`.
pub fn bounds_from_counts(counts: &CountsFile, cfg: &SweepConfig) -> Result<BoundsReport, RunError> {
    let raw = RawCounts {
        vacuum: counts.vacuum,
        decoy: counts.decoy,
        signal: counts.signal,
    };
    let observed = statistics_from_counts(counts.mu, counts.mu_prime, raw)?;
    let p = &cfg.protocol;
    let bounds = hsps_security_bounds(&observed, p.eta_a, p.d_a, p.e1_from)?;
    Ok(BoundsReport {
        observed,
        bounds,
        key_rate: key_rate_hsps(&observed, &bounds, p.f_ec),
    })
}

pub fn read_counts_file(path: &Path) -> Result<CountsFile, RunError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|e| RunError::Config(ConfigError::Parse(format!("{}: {e}", path.display()))))
}
