//! LoRa protocol constants and spreading-factor geometry.
//!
//! LoRa trades data rate for sensitivity through the spreading factor
//! (SF 7..12). Each SF has a demodulation SNR threshold, a receiver
//! sensitivity, and an airtime for a fixed 25-byte packet at 125 kHz
//! bandwidth. Devices pick their SF from the distance to the nearest
//! gateway: concentric rings around each gateway map to SF 7 (innermost,
//! fastest) through SF 12 (outermost, most robust).
//!
//! Two derived quantities live here as well:
//!
//! - per-SF ALOHA duty cycles (transmissions per hour × airtime), the
//!   probability that a device is mid-transmission at a random instant;
//! - the ring boundary radii, obtained by solving the link budget for the
//!   distance where the mean received SNR equals the SF threshold.

use crate::channel;
use crate::error::{Error, Result};

pub const SF_MIN: u8 = 7;
pub const SF_MAX: u8 = 12;

/// One row of the LoRa characteristics table (25-byte packet, BW 125 kHz).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfRow {
    pub sf: u8,
    /// Useful bit rate in kb/s.
    pub bitrate_kbps: f64,
    /// Packet air time in milliseconds.
    pub airtime_ms: f64,
    /// Transmissions per hour.
    pub tx_per_hour: f64,
    /// Receiver sensitivity in dBm.
    pub sensitivity_dbm: f64,
    /// Demodulation SNR threshold q_SF in dB.
    pub snr_threshold_db: f64,
}

/// LoRa characteristics for SF 7..12 (25-byte message, BW = 125 kHz).
pub const SF_TABLE: [SfRow; 6] = [
    SfRow { sf: 7, bitrate_kbps: 5.47, airtime_ms: 36.6, tx_per_hour: 98.0, sensitivity_dbm: -123.0, snr_threshold_db: -6.0 },
    SfRow { sf: 8, bitrate_kbps: 3.13, airtime_ms: 64.0, tx_per_hour: 56.0, sensitivity_dbm: -126.0, snr_threshold_db: -9.0 },
    SfRow { sf: 9, bitrate_kbps: 1.76, airtime_ms: 113.0, tx_per_hour: 31.0, sensitivity_dbm: -129.0, snr_threshold_db: -12.0 },
    SfRow { sf: 10, bitrate_kbps: 0.98, airtime_ms: 204.0, tx_per_hour: 17.0, sensitivity_dbm: -132.0, snr_threshold_db: -15.0 },
    SfRow { sf: 11, bitrate_kbps: 0.54, airtime_ms: 372.0, tx_per_hour: 9.0, sensitivity_dbm: -134.5, snr_threshold_db: -17.5 },
    SfRow { sf: 12, bitrate_kbps: 0.29, airtime_ms: 682.0, tx_per_hour: 5.0, sensitivity_dbm: -137.0, snr_threshold_db: -20.0 },
];

/// Payload size the airtime column is quoted for.
pub const PACKET_BYTES: f64 = 25.0;

pub fn sf_row(sf: u8) -> Result<&'static SfRow> {
    if !(SF_MIN..=SF_MAX).contains(&sf) {
        return Err(Error::invalid_arg(format!(
            "spreading factor must be in {SF_MIN}..={SF_MAX}, got {sf}"
        )));
    }
    Ok(&SF_TABLE[(sf - SF_MIN) as usize])
}

/// Demodulation SNR threshold q_SF in dB.
pub fn snr_threshold_db(sf: u8) -> Result<f64> {
    Ok(sf_row(sf)?.snr_threshold_db)
}

/// Probability that a device with the given SF is transmitting at a
/// random instant: tx_per_hour × airtime / 3600 s.
pub fn duty_cycle(sf: u8) -> Result<f64> {
    let row = sf_row(sf)?;
    Ok(row.tx_per_hour * (row.airtime_ms / 1000.0) / 3600.0)
}

/// Pairwise SIR capture thresholds in dB.
///
/// Row = SF of the tagged (wanted) signal, column = SF of the interferer.
/// The diagonal is the co-SF capture threshold (+1 dB); off-diagonal
/// entries are negative because imperfect orthogonality between SFs still
/// rejects most cross-SF power.
#[derive(Debug, Clone, PartialEq)]
pub struct SirMatrix {
    thresholds_db: [[f64; 6]; 6],
}

impl SirMatrix {
    /// The standard inter-SF collision threshold table.
    pub fn standard() -> Self {
        SirMatrix {
            thresholds_db: [
                [1.0, -8.0, -9.0, -9.0, -9.0, -9.0],
                [-11.0, 1.0, -11.0, -12.0, -13.0, -13.0],
                [-15.0, -13.0, 1.0, -13.0, -14.0, -15.0],
                [-19.0, -18.0, -17.0, 1.0, -17.0, -18.0],
                [-22.0, -22.0, -21.0, -20.0, 1.0, -20.0],
                [-25.0, -25.0, -25.0, -24.0, -23.0, 1.0],
            ],
        }
    }

    pub fn threshold_db(&self, sf_tagged: u8, sf_interferer: u8) -> Result<f64> {
        let row = sf_row(sf_tagged)?;
        let col = sf_row(sf_interferer)?;
        Ok(self.thresholds_db[(row.sf - SF_MIN) as usize][(col.sf - SF_MIN) as usize])
    }

    /// Threshold as a linear power ratio.
    pub fn threshold_linear(&self, sf_tagged: u8, sf_interferer: u8) -> Result<f64> {
        Ok(channel::db_to_linear(self.threshold_db(sf_tagged, sf_interferer)?))
    }
}

/// SIR capture threshold as a linear ratio, from the standard table.
pub fn sir_threshold(sf_tagged: u8, sf_interferer: u8) -> Result<f64> {
    SirMatrix::standard().threshold_linear(sf_tagged, sf_interferer)
}

/// Ring boundary radii d0..d6 in km, d0 = 0, strictly increasing.
///
/// Devices in [d_k, d_{k+1}) use SF 7+k; devices at or beyond d6 keep
/// SF 12 (their SNR condition then fails on its own at the link budget).
#[derive(Debug, Clone, PartialEq)]
pub struct SfBoundaries {
    radii_km: [f64; 7],
}

impl SfBoundaries {
    /// Build from explicit outer radii d1..d6 (km).
    pub fn from_radii(outer_km: &[f64]) -> Result<Self> {
        if outer_km.len() != 6 {
            return Err(Error::invalid_arg(format!(
                "expected 6 boundary radii, got {}",
                outer_km.len()
            )));
        }
        let mut radii_km = [0.0; 7];
        let mut prev = 0.0;
        for (i, &d) in outer_km.iter().enumerate() {
            if !d.is_finite() || d <= prev {
                return Err(Error::invalid_arg(format!(
                    "boundary radii must be finite and strictly increasing from 0: d{} = {d}",
                    i + 1
                )));
            }
            radii_km[i + 1] = d;
            prev = d;
        }
        Ok(SfBoundaries { radii_km })
    }

    /// All seven radii, d0 = 0 first.
    pub fn radii_km(&self) -> &[f64; 7] {
        &self.radii_km
    }

    /// Outer radius of the ring for `sf` (d1 for SF 7, ..., d6 for SF 12).
    pub fn outer_km(&self, sf: u8) -> Result<f64> {
        let row = sf_row(sf)?;
        Ok(self.radii_km[(row.sf - SF_MIN) as usize + 1])
    }
}

/// Solve the link budget for the SF ring boundaries.
///
/// Each boundary d_k (k = 1..6) is the distance where the mean received
/// SNR with unit fading equals the threshold of the SF used just inside:
///
/// ```text
/// tx_linear · (λ / 4πd)^η = q_linear · noise_linear
/// d = (λ / 4π) · (tx_linear / (q_linear · noise_linear))^(1/η)
/// ```
pub fn compute_sf_boundaries(
    tx_power_dbm: f64,
    noise_dbm: f64,
    wavelength_km: f64,
    eta: f64,
) -> Result<SfBoundaries> {
    if !tx_power_dbm.is_finite() || !noise_dbm.is_finite() {
        return Err(Error::invalid_arg(
            "tx power and noise must be finite".to_string(),
        ));
    }
    if !(wavelength_km > 0.0) {
        return Err(Error::invalid_arg(format!(
            "wavelength must be positive, got {wavelength_km}"
        )));
    }
    if !(eta >= 2.0) {
        return Err(Error::invalid_arg(format!(
            "path loss exponent must be >= 2, got {eta}"
        )));
    }
    let tx = channel::dbm_to_mw(tx_power_dbm);
    let noise = channel::dbm_to_mw(noise_dbm);
    let mut radii_km = [0.0; 7];
    for row in &SF_TABLE {
        let q = channel::db_to_linear(row.snr_threshold_db);
        let d = wavelength_km / (4.0 * std::f64::consts::PI) * (tx / (q * noise)).powf(1.0 / eta);
        if !d.is_finite() || d <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "no finite ring boundary for SF {}: link budget out of range",
                row.sf
            )));
        }
        radii_km[(row.sf - SF_MIN) as usize + 1] = d;
    }
    for k in 1..7 {
        if radii_km[k] <= radii_km[k - 1] {
            return Err(Error::InvalidConfig(
                "ring boundaries are not strictly increasing".to_string(),
            ));
        }
    }
    Ok(SfBoundaries { radii_km })
}

/// SF assigned to a device at distance `d_km` from its nearest gateway.
///
/// Intervals are half-open, lower-inclusive; everything at or beyond the
/// outermost boundary stays at SF 12.
pub fn sf_for_distance(d_km: f64, boundaries: &SfBoundaries) -> Result<u8> {
    if !(d_km >= 0.0) {
        return Err(Error::invalid_arg(format!(
            "distance must be non-negative, got {d_km}"
        )));
    }
    for k in 0..6 {
        if d_km < boundaries.radii_km[k + 1] {
            return Ok(SF_MIN + k as u8);
        }
    }
    Ok(SF_MAX)
}
