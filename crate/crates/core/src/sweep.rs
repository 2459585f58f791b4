//! Parameter sweeps over one configuration axis, the four figure presets
//! and the versioned CSV output.

use std::cmp::Ordering;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use tracing::{info, warn};

use crate::config::{self, format_float, Config, Value};
use crate::error::{Error, Result};
use crate::scenario::{self, EnergyReport, Strategy};

pub const CSV_SCHEMA: u32 = 1;
pub const CFG_PREFIX: &str = "cfg:";

/// One curve of a sweep: a strategy plus the overrides that set it apart.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    pub label: String,
    pub strategy: Strategy,
    pub overrides: Vec<(String, Value)>,
}

impl Variant {
    pub fn plain(strategy: Strategy) -> Self {
        Variant { label: strategy.as_str().into(), strategy, overrides: Vec::new() }
    }

    pub fn with(mut self, path: &str, value: Value) -> Self {
        let shown = match &value {
            Value::Text(s) => s.clone(),
            v => v.to_string(),
        };
        let key = path.rsplit('.').next().unwrap_or(path);
        self.label = format!("{} {key}={shown}", self.label);
        self.overrides.push((path.into(), value));
        self
    }
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: Config,
    pub axis: String,
    pub values: Vec<f64>,
    pub variants: Vec<Variant>,
    pub seeds: Vec<u64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !Config::is_numeric(&self.axis) {
            return Err(Error::validation(format!("sweep axis `{}` is not a numeric field", self.axis)));
        }
        if self.values.is_empty() {
            return Err(Error::validation("sweep needs at least one value"));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("sweep values must be finite"));
        }
        if self.values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::validation("sweep values must be sorted ascending"));
        }
        if self.variants.is_empty() {
            return Err(Error::validation("sweep needs at least one strategy"));
        }
        if self.seeds.is_empty() {
            return Err(Error::validation("sweep needs at least one seed"));
        }
        Ok(())
    }

    pub fn axis_path(&self) -> &str {
        config::canonical_path(&self.axis)
    }

    /// Resolved configuration of one sweep point.
    pub fn point_config(&self, value: f64, variant: &Variant, seed: u64) -> Result<Config> {
        let mut cfg = self.base.clone();
        for (path, v) in &variant.overrides {
            cfg = cfg.with_value(path, v.clone())?;
        }
        cfg = cfg
            .with_value("scenario.strategy", Value::Text(variant.strategy.as_str().into()))?
            .with_value("scenario.seed", Value::Int(seed as i64))?;
        cfg.with_value(self.axis_path(), Value::Float(value))
    }
}

pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    let mut v: Vec<f64> = (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect();
    // pin the endpoints exactly
    v[0] = lo;
    v[n - 1] = hi;
    v
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Parse `logspace:lo:hi:n`, `linspace:lo:hi:n` or a comma-separated list.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let bad = || Error::validation(format!("cannot parse sweep values `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [kind @ ("logspace" | "linspace"), lo, hi, n] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(bad());
            }
            if *kind == "logspace" {
                if !(lo > 0.0 && hi > 0.0) {
                    return Err(Error::validation("logspace bounds must be > 0"));
                }
                Ok(logspace(lo, hi, n))
            } else {
                Ok(linspace(lo, hi, n))
            }
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Onboard versus offloading while hovering, all three bands.
    Fig1,
    /// Hovering versus move-and-return over BS density, mmWave.
    Fig2,
    /// Hovering versus move-and-return over workload size at 20 m/s.
    Fig3,
    /// Parallel onboard and MEC processing over computer mass.
    Fig4,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fig1" => Some(Preset::Fig1),
            "fig2" => Some(Preset::Fig2),
            "fig3" => Some(Preset::Fig3),
            "fig4" => Some(Preset::Fig4),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Fig1 => "fig1",
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }

    pub fn build(&self, base: Config, seeds: Vec<u64>) -> SweepSpec {
        let text = |s: &str| Value::Text(s.into());
        let (axis, values, mut variants) = match self {
            Preset::Fig1 => {
                let mut vs = Vec::new();
                for band in ["sub6", "mmwave", "thz"] {
                    for s in [Strategy::HoverOnboard, Strategy::HoverOffload] {
                        vs.push(Variant::plain(s).with("radio.band", text(band)));
                    }
                }
                ("deployment.lambda_c", logspace(1e-8, 1e-6, 21), vs)
            }
            Preset::Fig2 => (
                "deployment.lambda_c",
                logspace(1e-8, 1e-6, 21),
                vec![
                    Variant::plain(Strategy::HoverOffload),
                    Variant::plain(Strategy::MoveReturnOffload).with("scenario.v", Value::Float(10.0)),
                    Variant::plain(Strategy::MoveReturnOffload).with("scenario.v", Value::Float(20.0)),
                ],
            ),
            Preset::Fig3 => (
                "scenario.q_bits",
                logspace(1e8, 1e12, 25),
                [
                    Strategy::HoverOffload,
                    Strategy::MoveReturnOffload,
                    Strategy::HoverParallel,
                    Strategy::MoveReturnParallel,
                ]
                .into_iter()
                .map(|s| Variant::plain(s).with("scenario.v", Value::Float(20.0)))
                .collect(),
            ),
            Preset::Fig4 => (
                "mass.m_cp",
                linspace(0.1, 2.0, 20),
                vec![
                    Variant::plain(Strategy::MoveReturnOffload),
                    Variant::plain(Strategy::MoveReturnParallel).with("compute.c_cp", Value::Float(500.0)),
                    Variant::plain(Strategy::MoveReturnParallel).with("compute.c_cp", Value::Float(1000.0)),
                    Variant::plain(Strategy::HoverParallel),
                ],
            ),
        };
        for v in variants.iter_mut() {
            if !v.overrides.iter().any(|(p, _)| p == "radio.band") {
                v.overrides.insert(0, ("radio.band".into(), text("mmwave")));
            }
        }
        SweepSpec { base, axis: axis.into(), values, variants, seeds }
    }
}

/// Fixed leading CSV columns with their units.
pub const COLUMNS: &[(&str, &str)] = &[
    ("axis", ""),
    ("axis_value", "axis unit"),
    ("series", ""),
    ("strategy", ""),
    ("band", ""),
    ("seed", ""),
    ("energy_j", "J"),
    ("t_total", "s"),
    ("t_m", "s"),
    ("t_h", "s"),
    ("r0", "m"),
    ("rate_start_bps", "bit/s"),
    ("propulsion_j", "J"),
    ("compute_j", "J"),
    ("communication_j", "J"),
    ("energy_stderr", "J"),
    ("drops", ""),
];

/// Unit of any CSV column, including `cfg:` columns.
pub fn column_unit(name: &str) -> Option<&'static str> {
    if let Some(path) = name.strip_prefix(CFG_PREFIX) {
        return config::field_unit(path);
    }
    COLUMNS.iter().find(|(c, _)| *c == name).map(|(_, u)| *u)
}

pub fn header() -> Vec<String> {
    COLUMNS
        .iter()
        .map(|(c, _)| c.to_string())
        .chain(config::field_paths().map(|p| format!("{CFG_PREFIX}{p}")))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis_value: f64,
    pub variant: usize,
    pub series: String,
    pub seed: u64,
    pub config: Config,
    pub report: EnergyReport,
}

impl ResultRow {
    fn fields(&self, axis: &str) -> Vec<String> {
        let r = &self.report;
        let mut f = vec![
            axis.to_string(),
            format_float(self.axis_value),
            self.series.clone(),
            r.strategy.as_str().to_string(),
            self.config.band().as_str().to_string(),
            self.seed.to_string(),
            format_float(r.energy_j),
            format_float(r.t_total),
            format_float(r.t_m),
            format_float(r.t_h),
            format_float(r.r0),
            format_float(r.rate_start),
            format_float(r.breakdown.propulsion_j),
            format_float(r.breakdown.compute_j),
            format_float(r.breakdown.communication_j),
            format_float(r.energy_stderr),
            r.drops.to_string(),
        ];
        f.extend(self.config.entries().map(|(_, e)| e.value.to_string()));
        f
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPoint {
    pub axis_value: f64,
    pub series: String,
    pub seed: u64,
    pub kind: &'static str,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub axis: String,
    pub base_hash: String,
    pub rows: Vec<ResultRow>,
    pub skipped: Vec<SkippedPoint>,
}

fn canonical_order(a: (f64, usize, u64), b: (f64, usize, u64)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
}

/// Evaluate every (value, variant, seed) point, in parallel on the current
/// rayon pool. Points whose configuration is invalid or whose evaluation
/// fails are reported in `skipped`.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let points: Vec<(f64, usize, u64)> = spec
        .values
        .iter()
        .flat_map(|&x| {
            (0..spec.variants.len()).flat_map(move |vi| spec.seeds.iter().map(move |&s| (x, vi, s)))
        })
        .collect();
    info!(points = points.len(), axis = spec.axis_path(), "running sweep");
    let results: Vec<_> = points
        .par_iter()
        .map(|&(x, vi, seed)| {
            let variant = &spec.variants[vi];
            let outcome = spec
                .point_config(x, variant, seed)
                .and_then(|cfg| Ok((cfg.spec()?, cfg)))
                .and_then(|(s, cfg)| Ok((scenario::evaluate(&s)?, cfg)));
            ((x, vi, seed), outcome)
        })
        .collect();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for ((x, vi, seed), outcome) in results {
        let series = spec.variants[vi].label.clone();
        match outcome {
            Ok((report, config)) => {
                for w in &report.warnings {
                    warn!(axis_value = x, series = series.as_str(), "{w}");
                }
                rows.push(ResultRow { axis_value: x, variant: vi, series, seed, config, report });
            }
            Err(e) => {
                warn!(axis_value = x, series = series.as_str(), seed, "skipped: {e}");
                skipped.push(SkippedPoint {
                    axis_value: x,
                    series,
                    seed,
                    kind: if e.is_validation() { "validation" } else { "runtime" },
                    message: e.to_string(),
                });
            }
        }
    }
    rows.sort_by(|a, b| canonical_order((a.axis_value, a.variant, a.seed), (b.axis_value, b.variant, b.seed)));
    Ok(SweepOutcome {
        axis: spec.axis_path().to_string(),
        base_hash: spec.base.hash(),
        rows,
        skipped,
    })
}

/// As [`run_sweep`] on a dedicated pool of `jobs` workers.
pub fn run_sweep_with_jobs(spec: &SweepSpec, jobs: usize) -> Result<SweepOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Io(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

impl SweepOutcome {
    pub fn header_comment(&self) -> String {
        format!(
            "# uavmec {} csv-schema={CSV_SCHEMA} config-hash={}",
            env!("CARGO_PKG_VERSION"),
            self.base_hash
        )
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        writeln!(buf, "{}", self.header_comment())?;
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(header()).map_err(csv_error)?;
        for row in &self.rows {
            w.write_record(row.fields(&self.axis)).map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn skipped_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["axis_value", "series", "seed", "kind", "message"]).map_err(csv_error)?;
        for s in &self.skipped {
            w.write_record([
                format_float(s.axis_value),
                s.series.clone(),
                s.seed.to_string(),
                s.kind.to_string(),
                s.message.clone(),
            ])
            .map_err(csv_error)?;
        }
        w.into_inner().map_err(|e| Error::Io(e.to_string()))
    }

    /// Write the CSV to `out` and the skipped-point report next to it.
    /// Returns the path of the report.
    pub fn write(&self, out: &Path) -> Result<PathBuf> {
        std::fs::write(out, self.to_csv()?)?;
        let report = skipped_path(out);
        std::fs::write(&report, self.skipped_csv()?)?;
        Ok(report)
    }
}

pub fn skipped_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".skipped.csv");
    out.with_file_name(name)
}

/// Rebuild the configuration of a CSV row from its `cfg:` columns.
pub fn config_from_record(header: &[String], record: &[String]) -> Result<Config> {
    let overrides: Vec<String> = header
        .iter()
        .zip(record)
        .filter_map(|(h, v)| h.strip_prefix(CFG_PREFIX).map(|p| format!("{p}={v}")))
        .collect();
    Config::from_str_with("", &overrides)
}
