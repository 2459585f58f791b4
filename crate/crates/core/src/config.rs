//! Layered configuration: built-in defaults, a TOML file, then `path=value`
//! overrides. Every resolved leaf remembers where its value came from.
//!
//! Units are SI except `radio.carrier_ghz`, `radio.bandwidth_mhz`,
//! `radio.p_tx_dbm` and `compute.f_cp_ghz`.

use std::fmt::{self, Write as _};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::antenna::ArrayConfig;
use crate::channel::{
    Atmosphere, Band, BandKind, ChannelOptions, DistanceInterpretation, NlosHeightTerm, UrbanProfile,
};
use crate::error::{Error, Result};
use crate::link::{dbm_to_watts, Environment, RadioConfig};
use crate::power::{ComputeParams, MassBudget, PropulsionParams};
use crate::scenario::{Deployment, R0Mode, ScenarioSpec, Strategy};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Default,
    File,
    Flag,
}

impl Source {
    pub fn as_str(&self) -> &'static str {
        match self {
            Source::Default => "default",
            Source::File => "file",
            Source::Flag => "flag",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(i64),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => f.write_str(&format_float(*x)),
            Value::Int(i) => write!(f, "{i}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

impl Value {
    fn toml_literal(&self) -> String {
        match self {
            Value::Text(s) => format!("\"{s}\""),
            v => v.to_string(),
        }
    }
}

/// Shortest representation that parses back to the same f64 and always
/// reads as a float (carries a '.' or an exponent).
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0.0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let a = x.abs();
    if (1e-3..1e6).contains(&a) {
        let s = format!("{x}");
        if s.contains('.') { s } else { format!("{s}.0") }
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    Float,
    Int { min: i64 },
    Choice(&'static [&'static str]),
}

struct Field {
    path: &'static str,
    unit: &'static str,
    kind: Kind,
    default: fn(BandKind) -> Value,
}

const STRATEGIES: &[&str] = &["hover-onboard", "hover-offload", "hover-parallel", "mr-offload", "mr-parallel"];
const BANDS: &[&str] = &["sub6", "mmwave", "thz"];
const R0_MODES: &[&str] = &["analytic-mean", "sampled-nearest"];
const DISTANCES: &[&str] = &["3d", "2d"];
const NLOS_HEIGHTS: &[&str] = &["bs", "uav"];

macro_rules! field {
    ($path:literal, $unit:literal, float, $v:expr) => {
        Field { path: $path, unit: $unit, kind: Kind::Float, default: |_| Value::Float($v) }
    };
    ($path:literal, $unit:literal, int >= $min:literal, $v:expr) => {
        Field { path: $path, unit: $unit, kind: Kind::Int { min: $min }, default: |_| Value::Int($v) }
    };
    ($path:literal, $unit:literal, choice $c:expr, $v:literal) => {
        Field { path: $path, unit: $unit, kind: Kind::Choice($c), default: |_| Value::Text($v.into()) }
    };
}

fn default_array_size(band: BandKind) -> Value {
    Value::Int(match band {
        BandKind::Sub6 => 1,
        BandKind::MmWave => 8,
        BandKind::Thz => 16,
    })
}

static FIELDS: &[Field] = &[
    field!("scenario.strategy", "", choice STRATEGIES, "hover-offload"),
    field!("scenario.q_bits", "bit", float, 2e9),
    field!("scenario.v", "m/s", float, 10.0),
    field!("scenario.seed", "", int >= 0, 1),
    field!("geometry.h_u", "m", float, 30.0),
    field!("geometry.h_b", "m", float, 25.0),
    field!("urban.building_height", "m", float, 10.0),
    field!("urban.street_width", "m", float, 15.0),
    field!("atmosphere.temperature_k", "K", float, 300.0),
    field!("atmosphere.pressure_pa", "Pa", float, 101_325.0),
    field!("atmosphere.humidity_percent", "%", float, 50.0),
    field!("radio.band", "", choice BANDS, "mmwave"),
    Field {
        path: "radio.carrier_ghz",
        unit: "GHz",
        kind: Kind::Float,
        default: |b| Value::Float(b.default_carrier_hz() / 1e9),
    },
    Field {
        path: "radio.bandwidth_mhz",
        unit: "MHz",
        kind: Kind::Float,
        default: |b| Value::Float(b.default_bandwidth_hz() / 1e6),
    },
    field!("radio.p_tx_dbm", "dBm", float, 23.0),
    field!("radio.uav_gain_dbi", "dBi", float, 0.0),
    field!("radio.mc_samples", "", int >= 1, 64),
    field!("radio.distance_interpretation", "", choice DISTANCES, "3d"),
    field!("radio.nlos_height", "", choice NLOS_HEIGHTS, "bs"),
    Field { path: "antenna.m", unit: "", kind: Kind::Int { min: 1 }, default: default_array_size },
    Field { path: "antenna.n", unit: "", kind: Kind::Int { min: 1 }, default: default_array_size },
    field!("antenna.spacing_x", "wavelengths", float, 0.5),
    field!("antenna.spacing_y", "wavelengths", float, 0.5),
    field!("antenna.element_gain_dbi", "dBi", float, 8.0),
    field!("antenna.sigma_mismatch_deg", "deg", float, 3.0),
    field!("deployment.lambda_c", "1/m^2", float, 2e-7),
    field!("deployment.p_a", "", float, 1.0),
    field!("deployment.r0_mode", "", choice R0_MODES, "analytic-mean"),
    field!("deployment.r_min", "m", float, 10.0),
    field!("deployment.n_drops", "", int >= 1, 1),
    field!("mass.m_0", "kg", float, 3.0),
    field!("mass.m_cp", "kg", float, 0.5),
    field!("compute.f_cp_ghz", "GHz", float, 4.0),
    field!("compute.eta", "W/(cycle/s)^3", float, 1e-28),
    field!("compute.p_io", "W", float, 0.0),
    field!("compute.c_cp", "cycle/bit", float, 500.0),
    field!("propulsion.c0", "W", float, 1.5),
    field!("propulsion.c1", "W/(rad/s)", float, 2.0e-3),
    field!("propulsion.c2", "W/(rad/s)^2", float, 1.2e-5),
    field!("propulsion.c3", "W/(rad/s)^3", float, 2.0e-7),
    field!("propulsion.c4", "W/(rad/s)^4", float, 1.0e-11),
    field!("propulsion.c_t", "N/(rad/s)^2", float, 2.4e-5),
    field!("propulsion.c_d", "N/(m/s)^2", float, 0.06),
    field!("propulsion.g", "m/s^2", float, 9.81),
    field!("power.p_cm", "W", float, 0.0),
];

const BAND_FIELD: &str = "radio.band";

fn field_index(path: &str) -> Option<usize> {
    FIELDS.iter().position(|f| f.path == path)
}

/// Every configurable leaf path, in canonical order.
pub fn field_paths() -> impl Iterator<Item = &'static str> {
    FIELDS.iter().map(|f| f.path)
}

pub fn field_unit(path: &str) -> Option<&'static str> {
    field_index(path).map(|i| FIELDS[i].unit)
}

/// Short aliases accepted wherever a field path is expected.
pub fn canonical_path(path: &str) -> &str {
    match path {
        "v" => "scenario.v",
        "q_bits" => "scenario.q_bits",
        "lambda_c" => "deployment.lambda_c",
        "m_cp" => "mass.m_cp",
        "c_cp" => "compute.c_cp",
        "seed" => "scenario.seed",
        "strategy" => "scenario.strategy",
        "band" => "radio.band",
        _ => path,
    }
}

#[derive(Debug, Clone)]
struct Raw {
    value: toml::Value,
    line: usize,
}

/// Explicitly set values of one layer, keyed by field index.
#[derive(Debug, Clone, Default)]
struct Layer {
    values: Vec<(usize, Raw)>,
}

impl Layer {
    fn get(&self, idx: usize) -> Option<&Raw> {
        self.values.iter().rev().find(|(i, _)| *i == idx).map(|(_, r)| r)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line where `key` is assigned inside `[section]`, best effort.
fn key_line(text: &str, section: &str, key: &str) -> usize {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if let Some(s) = t.strip_prefix('[').and_then(|s| s.split(']').next()) {
            current = s.trim().to_string();
            continue;
        }
        if current == section {
            if let Some(rest) = t.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return i + 1;
                }
            }
        }
    }
    0
}

fn parse_file_layer(text: &str) -> Result<Layer> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().to_string(),
    })?;
    let mut layer = Layer::default();
    for (section, body) in table {
        let toml::Value::Table(body) = body else {
            return Err(Error::Parse {
                line: key_line(text, "", &section),
                message: format!("top-level key `{section}` must be a [section]"),
            });
        };
        for (key, value) in body {
            let path = format!("{section}.{key}");
            let line = key_line(text, &section, &key);
            let idx = field_index(&path).ok_or_else(|| Error::Parse {
                line,
                message: format!("unknown field `{path}`"),
            })?;
            layer.values.push((idx, Raw { value, line }));
        }
    }
    Ok(layer)
}

/// Parse a `path=value` override. Values that are not valid TOML literals
/// are taken as bare strings.
fn parse_flag(flag: &str) -> Result<(usize, Raw)> {
    let (path, value) = flag
        .split_once('=')
        .ok_or_else(|| Error::validation(format!("override `{flag}` must look like path=value")))?;
    let path = canonical_path(path.trim());
    let idx = field_index(path).ok_or_else(|| Error::validation(format!("unknown field `{path}`")))?;
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    Ok((idx, Raw { value: parsed, line: 0 }))
}

fn convert(field: &Field, raw: &Raw) -> Result<Value> {
    let bad = |what: &str| Error::Parse {
        line: raw.line,
        message: format!("`{}` expects {what}, got {}", field.path, raw.value),
    };
    match field.kind {
        Kind::Float => match raw.value {
            toml::Value::Float(x) => Ok(Value::Float(x)),
            toml::Value::Integer(i) => Ok(Value::Float(i as f64)),
            _ => Err(bad("a number")),
        },
        Kind::Int { min } => match raw.value {
            toml::Value::Integer(i) if i >= min => Ok(Value::Int(i)),
            toml::Value::Integer(_) => Err(Error::validation(format!("`{}` must be >= {min}", field.path))),
            _ => Err(bad("an integer")),
        },
        Kind::Choice(options) => match &raw.value {
            toml::Value::String(s) => {
                let canon = match field.path {
                    "scenario.strategy" => Strategy::parse(s).map(|k| k.as_str().to_string()),
                    BAND_FIELD => BandKind::parse(s).map(|k| k.as_str().to_string()),
                    _ => Some(s.to_ascii_lowercase()),
                };
                match canon {
                    Some(c) if options.contains(&c.as_str()) => Ok(Value::Text(c)),
                    _ => Err(bad(&format!("one of {}", options.join("|")))),
                }
            }
            _ => Err(bad(&format!("one of {}", options.join("|")))),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub value: Value,
    pub source: Source,
}

/// Fully resolved configuration, one entry per field in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    entries: Vec<Entry>,
}

impl Default for Config {
    fn default() -> Self {
        Config::resolve(&Layer::default(), &Layer::default()).expect("defaults are valid")
    }
}

impl Config {
    fn resolve(file: &Layer, flags: &Layer) -> Result<Self> {
        let pick = |idx: usize| -> Result<Option<(Value, Source)>> {
            if let Some(r) = flags.get(idx) {
                return Ok(Some((convert(&FIELDS[idx], r)?, Source::Flag)));
            }
            if let Some(r) = file.get(idx) {
                return Ok(Some((convert(&FIELDS[idx], r)?, Source::File)));
            }
            Ok(None)
        };
        let band_idx = field_index(BAND_FIELD).expect("band field");
        let band = match pick(band_idx)? {
            Some((Value::Text(s), _)) => BandKind::parse(&s).expect("checked by convert"),
            _ => BandKind::MmWave,
        };
        let entries = (0..FIELDS.len())
            .map(|i| {
                Ok(match pick(i)? {
                    Some((value, source)) => Entry { value, source },
                    None => Entry { value: (FIELDS[i].default)(band), source: Source::Default },
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Config { entries })
    }

    /// Resolve `text` (TOML) with `overrides` (`path=value`) on top.
    pub fn from_str_with(text: &str, overrides: &[String]) -> Result<Self> {
        let file = parse_file_layer(text)?;
        let flags = Layer { values: overrides.iter().map(|f| parse_flag(f)).collect::<Result<_>>()? };
        Config::resolve(&file, &flags)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Config::from_str_with(&text, overrides)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&'static str, &Entry)> {
        FIELDS.iter().map(|f| f.path).zip(self.entries.iter())
    }

    pub fn get(&self, path: &str) -> Option<&Value> {
        field_index(canonical_path(path)).map(|i| &self.entries[i].value)
    }

    pub fn source(&self, path: &str) -> Option<Source> {
        field_index(canonical_path(path)).map(|i| self.entries[i].source)
    }

    /// Copy with one field replaced, marked as a flag override. Numeric
    /// fields accept any f64; integer fields require an integral value.
    pub fn with_value(&self, path: &str, value: Value) -> Result<Self> {
        let path = canonical_path(path);
        let idx = field_index(path).ok_or_else(|| Error::validation(format!("unknown field `{path}`")))?;
        let raw = Raw {
            value: match value {
                Value::Float(x) => match FIELDS[idx].kind {
                    Kind::Int { .. } if x.fract() == 0.0 => toml::Value::Integer(x as i64),
                    _ => toml::Value::Float(x),
                },
                Value::Int(i) => toml::Value::Integer(i),
                Value::Text(s) => toml::Value::String(s),
            },
            line: 0,
        };
        let value = convert(&FIELDS[idx], &raw)?;
        let mut out = self.clone();
        out.entries[idx] = Entry { value, source: Source::Flag };
        if path == BAND_FIELD {
            // band-dependent defaults follow the new band
            let band = out.band();
            for (i, e) in out.entries.iter_mut().enumerate() {
                if e.source == Source::Default {
                    e.value = (FIELDS[i].default)(band);
                }
            }
        }
        Ok(out)
    }

    /// Whether `path` names a numeric field that a sweep can vary.
    pub fn is_numeric(path: &str) -> bool {
        field_index(canonical_path(path))
            .is_some_and(|i| matches!(FIELDS[i].kind, Kind::Float | Kind::Int { .. }))
    }

    fn float(&self, path: &str) -> f64 {
        match self.get(path) {
            Some(Value::Float(x)) => *x,
            Some(Value::Int(i)) => *i as f64,
            other => panic!("field {path} is not numeric: {other:?}"),
        }
    }

    fn int(&self, path: &str) -> i64 {
        match self.get(path) {
            Some(Value::Int(i)) => *i,
            other => panic!("field {path} is not an integer: {other:?}"),
        }
    }

    fn text(&self, path: &str) -> &str {
        match self.get(path) {
            Some(Value::Text(s)) => s,
            other => panic!("field {path} is not text: {other:?}"),
        }
    }

    fn u32_field(&self, path: &str) -> Result<u32> {
        u32::try_from(self.int(path)).map_err(|_| Error::validation(format!("`{path}` is too large")))
    }

    pub fn strategy(&self) -> Strategy {
        Strategy::parse(self.text("scenario.strategy")).expect("checked on load")
    }

    pub fn band(&self) -> BandKind {
        BandKind::parse(self.text(BAND_FIELD)).expect("checked on load")
    }

    /// Build and validate the scenario described by this configuration.
    pub fn spec(&self) -> Result<ScenarioSpec> {
        let band = Band {
            kind: self.band(),
            carrier_hz: self.float("radio.carrier_ghz") * 1e9,
            bandwidth_hz: self.float("radio.bandwidth_mhz") * 1e6,
        };
        let array = ArrayConfig {
            m_elems: self.u32_field("antenna.m")?,
            n_elems: self.u32_field("antenna.n")?,
            d_x: self.float("antenna.spacing_x"),
            d_y: self.float("antenna.spacing_y"),
            g_e_max: self.float("antenna.element_gain_dbi"),
            sigma_mismatch: self.float("antenna.sigma_mismatch_deg"),
        };
        let channel = ChannelOptions {
            distance: match self.text("radio.distance_interpretation") {
                "2d" => DistanceInterpretation::TwoD,
                _ => DistanceInterpretation::ThreeD,
            },
            nlos_height: match self.text("radio.nlos_height") {
                "uav" => NlosHeightTerm::Uav,
                _ => NlosHeightTerm::Bs,
            },
        };
        let seed = self.int("scenario.seed") as u64;
        let spec = ScenarioSpec {
            strategy: self.strategy(),
            q_bits: self.float("scenario.q_bits"),
            v: self.float("scenario.v"),
            altitude: self.float("geometry.h_u"),
            bs_height: self.float("geometry.h_b"),
            mass: MassBudget { m_0: self.float("mass.m_0"), m_cp: self.float("mass.m_cp") },
            compute: ComputeParams {
                f_cp: self.float("compute.f_cp_ghz") * 1e9,
                eta: self.float("compute.eta"),
                p_io: self.float("compute.p_io"),
                c_cp: self.float("compute.c_cp"),
            },
            propulsion: PropulsionParams {
                coeffs: [
                    self.float("propulsion.c0"),
                    self.float("propulsion.c1"),
                    self.float("propulsion.c2"),
                    self.float("propulsion.c3"),
                    self.float("propulsion.c4"),
                ],
                c_t: self.float("propulsion.c_t"),
                c_d: self.float("propulsion.c_d"),
                g: self.float("propulsion.g"),
            },
            p_cm: self.float("power.p_cm"),
            radio: RadioConfig {
                p_tx: dbm_to_watts(self.float("radio.p_tx_dbm")),
                band,
                array,
                uav_gain: self.float("radio.uav_gain_dbi"),
                mc_samples: self.u32_field("radio.mc_samples")?,
                rng_seed: seed,
            },
            env: Environment {
                urban: UrbanProfile {
                    building_height: self.float("urban.building_height"),
                    street_width: self.float("urban.street_width"),
                },
                atmosphere: Atmosphere {
                    temperature_k: self.float("atmosphere.temperature_k"),
                    pressure_pa: self.float("atmosphere.pressure_pa"),
                    humidity_percent: self.float("atmosphere.humidity_percent"),
                },
                channel,
            },
            deployment: Deployment {
                lambda_c: self.float("deployment.lambda_c"),
                p_a: self.float("deployment.p_a"),
                r0_mode: R0Mode::parse(self.text("deployment.r0_mode")).expect("checked on load"),
                r_min: self.float("deployment.r_min"),
                n_drops: self.u32_field("deployment.n_drops")?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// TOML dump of every resolved value with its unit and source. Loading
    /// the output yields an equal configuration (sources become `file`).
    pub fn describe(&self) -> String {
        let mut out = String::new();
        let mut section = "";
        for (path, entry) in self.entries() {
            let (sec, key) = path.split_once('.').expect("dotted path");
            if sec != section {
                if !section.is_empty() {
                    out.push('\n');
                }
                let _ = writeln!(out, "[{sec}]");
                section = sec;
            }
            let unit = field_unit(path).unwrap_or("");
            let lit = entry.value.toml_literal();
            if unit.is_empty() {
                let _ = writeln!(out, "{key} = {lit}  # ({})", entry.source.as_str());
            } else {
                let _ = writeln!(out, "{key} = {lit}  # {unit} ({})", entry.source.as_str());
            }
        }
        out
    }

    /// Canonical `path=value` text of every field, independent of sources.
    pub fn canonical_text(&self) -> String {
        self.entries().map(|(p, e)| format!("{p}={}\n", e.value)).collect()
    }

    /// SHA-256 of [`Config::canonical_text`], hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Same values with every source reset, for comparing configurations
    /// irrespective of where values came from.
    pub fn values(&self) -> Vec<&Value> {
        self.entries.iter().map(|e| &e.value).collect()
    }
}
