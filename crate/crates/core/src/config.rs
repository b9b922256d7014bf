//! Flat key-value configuration documents and run manifests.
//!
//! The grammar is one `key = value` pair per line; `#` starts a comment;
//! blank lines are ignored. Unknown and duplicate keys are rejected,
//! missing keys fall back to the defaults. A run manifest uses the same
//! grammar with the resolved values written out, so re-running from a
//! manifest reproduces the run exactly; run metadata rides along in
//! comment lines.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::channel::FadingModel;
use crate::engine::{GatewayMode, H1H2Coupling, InterferenceMode, SimConfig};
use crate::error::{Error, Result};

/// Every key a configuration document may contain.
pub const CONFIG_KEYS: [&str; 16] = [
    "radius_km",
    "gw_intensity",
    "ed_intensity",
    "tx_power_dbm",
    "bandwidth_hz",
    "noise_figure_db",
    "wavelength_km",
    "eta",
    "fading",
    "rician_k",
    "trials",
    "seed",
    "gateway_mode",
    "interference_mode",
    "bins",
    "sf_boundaries",
];

/// Default Rician K-factor (≈6 dB line-of-sight) used when a document
/// selects `fading = rician` without a `rician_k`.
pub const DEFAULT_RICIAN_K: f64 = 4.0;

fn parse_err(key: &str, line: usize, message: impl Into<String>) -> Error {
    Error::ConfigParse {
        key: key.to_string(),
        line,
        message: message.into(),
    }
}

/// A parsed document plus the Rician K it carried (or the default),
/// kept separately so a channel override can still build the Rician
/// model when the document itself selected Rayleigh.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedConfig {
    pub config: SimConfig,
    pub rician_k: f64,
}

/// Parse a configuration document into a validated [`SimConfig`].
pub fn parse_config(text: &str) -> Result<SimConfig> {
    Ok(parse_config_full(text)?.config)
}

/// Parse a configuration document, retaining the Rician K-factor.
pub fn parse_config_full(text: &str) -> Result<ParsedConfig> {
    let mut seen: HashMap<String, (usize, String)> = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            parse_err(line, line_no, "expected `key = value`")
        })?;
        let key = key.trim();
        let value = value.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(parse_err(key, line_no, "unknown key"));
        }
        if seen.insert(key.to_string(), (line_no, value.to_string())).is_some() {
            return Err(parse_err(key, line_no, "duplicate key"));
        }
    }
    build_config(&seen)
}

fn build_config(seen: &HashMap<String, (usize, String)>) -> Result<ParsedConfig> {
    let mut config = SimConfig::default();

    let f64_field = |key: &str, default: f64| -> Result<f64> {
        match seen.get(key) {
            Some((line, value)) => value
                .parse::<f64>()
                .map_err(|_| parse_err(key, *line, format!("malformed number `{value}`"))),
            None => Ok(default),
        }
    };
    let u64_field = |key: &str, default: u64| -> Result<u64> {
        match seen.get(key) {
            Some((line, value)) => value
                .parse::<u64>()
                .map_err(|_| parse_err(key, *line, format!("malformed integer `{value}`"))),
            None => Ok(default),
        }
    };

    config.radius_km = f64_field("radius_km", config.radius_km)?;
    config.gw_intensity = f64_field("gw_intensity", config.gw_intensity)?;
    config.ed_intensity = f64_field("ed_intensity", config.ed_intensity)?;
    config.tx_power_dbm = f64_field("tx_power_dbm", config.tx_power_dbm)?;
    config.bandwidth_hz = f64_field("bandwidth_hz", config.bandwidth_hz)?;
    config.noise_figure_db = f64_field("noise_figure_db", config.noise_figure_db)?;
    config.wavelength_km = f64_field("wavelength_km", config.wavelength_km)?;
    config.eta = f64_field("eta", config.eta)?;
    config.trials = u64_field("trials", config.trials)?;
    config.seed = u64_field("seed", config.seed)?;

    let rician_k = f64_field("rician_k", DEFAULT_RICIAN_K)?;
    config.fading = match seen.get("fading") {
        Some((line, value)) => match value.as_str() {
            "rayleigh" => FadingModel::Rayleigh,
            "rician" => FadingModel::Rician { k_factor: rician_k },
            other => {
                return Err(parse_err(
                    "fading",
                    *line,
                    format!("expected `rayleigh` or `rician`, got `{other}`"),
                ))
            }
        },
        None => FadingModel::Rayleigh,
    };

    config.gateway_mode = match seen.get("gateway_mode") {
        Some((line, value)) => match value.as_str() {
            "nearest" => GatewayMode::NearestOnly,
            "union" => GatewayMode::AnyGatewayUnion,
            other => {
                return Err(parse_err(
                    "gateway_mode",
                    *line,
                    format!("expected `nearest` or `union`, got `{other}`"),
                ))
            }
        },
        None => GatewayMode::NearestOnly,
    };

    config.interference_mode = match seen.get("interference_mode") {
        Some((line, value)) => match value.as_str() {
            "co_sf" => InterferenceMode::CoSfOnly,
            "inter_sf" => InterferenceMode::InterSf,
            other => {
                return Err(parse_err(
                    "interference_mode",
                    *line,
                    format!("expected `co_sf` or `inter_sf`, got `{other}`"),
                ))
            }
        },
        None => InterferenceMode::CoSfOnly,
    };

    if let Some((line, value)) = seen.get("bins") {
        config.distance_bins =
            parse_bins(value).map_err(|msg| parse_err("bins", *line, msg))?;
    }

    if let Some((line, value)) = seen.get("sf_boundaries") {
        let radii = value
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| parse_err("sf_boundaries", *line, "malformed radius list"))?;
        config.sf_boundaries_km = Some(radii);
    }

    config.h1_h2_coupling = H1H2Coupling::SharedDraw;

    if !(rician_k.is_finite() && rician_k >= 0.0) {
        let line = seen.get("rician_k").map(|(l, _)| *l).unwrap_or(0);
        return Err(parse_err(
            "rician_k",
            line,
            format!("must be finite and non-negative, got {rician_k}"),
        ));
    }

    // invariant validation, attributed back to the config key
    if let Some((key, msg)) = config.violations().into_iter().next() {
        let line = seen.get(key).map(|(l, _)| *l).unwrap_or(0);
        return Err(parse_err(key, line, msg));
    }
    Ok(ParsedConfig { config, rician_k })
}

/// Distance bins: either an explicit comma-separated list of km values or
/// a `start:stop:step` range (stop inclusive up to rounding).
pub fn parse_bins(value: &str) -> std::result::Result<Vec<f64>, String> {
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err("range form is `start:stop:step`".to_string());
        }
        let nums = parts
            .iter()
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| format!("malformed range `{value}`"))?;
        let (start, stop, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || stop < start {
            return Err("range needs stop >= start and step > 0".to_string());
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| start + i as f64 * step).collect())
    } else {
        value
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|_| format!("malformed bin list `{value}`"))
    }
}

/// Render a resolved config plus run metadata as a manifest document.
///
/// The document parses back through [`parse_config`] to the identical
/// `SimConfig` (metadata lives in comments), which is what makes a
/// re-run byte-reproducible.
pub fn render_manifest(
    config: &SimConfig,
    tool_version: &str,
    duration_ms: u128,
    bin_trials: &[(f64, u64)],
    zero_gateway_trials: u64,
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# run manifest (parseable as a config document)");
    let _ = writeln!(out, "# tool_version = {tool_version}");
    let _ = writeln!(out, "# duration_ms = {duration_ms}");
    let counts = bin_trials
        .iter()
        .map(|(d, n)| format!("{d}:{n}"))
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(out, "# bin_trials = {counts}");
    let _ = writeln!(out, "# zero_gateway_trials = {zero_gateway_trials}");
    let _ = writeln!(
        out,
        "# throughput_bps = p_success x tx_per_hour(sf) x 200 bit / 3600 s (derived reporting metric)"
    );
    let _ = writeln!(out, "radius_km = {}", config.radius_km);
    let _ = writeln!(out, "gw_intensity = {}", config.gw_intensity);
    let _ = writeln!(out, "ed_intensity = {}", config.ed_intensity);
    let _ = writeln!(out, "tx_power_dbm = {}", config.tx_power_dbm);
    let _ = writeln!(out, "bandwidth_hz = {}", config.bandwidth_hz);
    let _ = writeln!(out, "noise_figure_db = {}", config.noise_figure_db);
    let _ = writeln!(out, "wavelength_km = {}", config.wavelength_km);
    let _ = writeln!(out, "eta = {}", config.eta);
    let _ = writeln!(out, "fading = {}", config.fading.name());
    if let FadingModel::Rician { k_factor } = config.fading {
        let _ = writeln!(out, "rician_k = {k_factor}");
    }
    let _ = writeln!(out, "trials = {}", config.trials);
    let _ = writeln!(out, "seed = {}", config.seed);
    let gateway_mode = match config.gateway_mode {
        GatewayMode::NearestOnly => "nearest",
        GatewayMode::AnyGatewayUnion => "union",
    };
    let _ = writeln!(out, "gateway_mode = {gateway_mode}");
    let interference_mode = match config.interference_mode {
        InterferenceMode::CoSfOnly => "co_sf",
        InterferenceMode::InterSf => "inter_sf",
    };
    let _ = writeln!(out, "interference_mode = {interference_mode}");
    let bins = config
        .distance_bins
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(",");
    let _ = writeln!(out, "bins = {bins}");
    if let Some(radii) = &config.sf_boundaries_km {
        let list = radii
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(out, "sf_boundaries = {list}");
    }
    out
}
