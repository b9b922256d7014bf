//! Monte Carlo evaluation of the uplink SNR condition, SIR condition, and
//! combined success probability.
//!
//! One trial conditions on the tagged end-device sitting at the origin
//! with its nearest gateway at a chosen distance: the serving gateway is
//! placed on a uniform bearing at exactly that range and the rest of the
//! gateway process is sampled on the disk minus the ball of that radius,
//! so the placed gateway stays nearest. Interferers are the active
//! end-devices at that instant; since activity is an independent thinning
//! of the device process, each SF class is sampled directly as a Poisson
//! process at intensity λ_ED · duty(SF), restricted to the region where
//! that SF is assigned. This avoids materializing the thousands of idle
//! devices a naive sample would carry.
//!
//! Success at a gateway requires both conditions:
//!
//! - H1: received SNR meets the SF threshold q_SF;
//! - H2: the signal exceeds each interfering class's aggregate power by
//!   the pairwise SIR threshold (co-SF only, or all classes).
//!
//! Trials derive their random streams from (seed, bin, trial), so sweeps
//! are reproducible under any parallel schedule.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{self, FadingModel, LinkBudget};
use crate::error::{Error, Result};
use crate::geometry::{self, Point, MIN_DISTANCE_KM};
use crate::lora_params::{self, SfBoundaries, SirMatrix, PACKET_BYTES, SF_MAX, SF_MIN};
use crate::rng::{trial_rng, TrialRng};

/// Which gateways may complete an uplink.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GatewayMode {
    /// Only the nearest gateway counts.
    NearestOnly,
    /// Any gateway satisfying both conditions counts (macro diversity).
    AnyGatewayUnion,
}

/// Which spreading factors contribute interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceMode {
    /// Only devices sharing the tagged SF interfere.
    CoSfOnly,
    /// All active devices interfere, judged per class against the
    /// pairwise threshold table.
    InterSf,
}

/// How the tagged link's fading enters the two conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum H1H2Coupling {
    /// One draw feeds both the SNR and the SIR numerator (what a physical
    /// trial does).
    SharedDraw,
    /// The SIR numerator redraws the tagged fading, making the two
    /// conditions strictly independent events.
    Independent,
}

/// Full parameter set for a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub radius_km: f64,
    /// Gateways per km².
    pub gw_intensity: f64,
    /// End-devices per km².
    pub ed_intensity: f64,
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub wavelength_km: f64,
    /// Path loss exponent η ≥ 2.
    pub eta: f64,
    pub fading: FadingModel,
    pub trials: u64,
    pub seed: u64,
    pub gateway_mode: GatewayMode,
    pub interference_mode: InterferenceMode,
    /// Tagged-device distances to evaluate, km, strictly increasing.
    pub distance_bins: Vec<f64>,
    /// Explicit SF ring radii d1..d6; `None` derives them from the link
    /// budget.
    pub sf_boundaries_km: Option<Vec<f64>>,
    pub h1_h2_coupling: H1H2Coupling,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            radius_km: 20.0,
            gw_intensity: 0.005,
            ed_intensity: 5.0,
            tx_power_dbm: 19.0,
            bandwidth_hz: 125_000.0,
            noise_figure_db: 6.0,
            wavelength_km: 34.5e-5,
            eta: 2.75,
            fading: FadingModel::Rayleigh,
            trials: 10_000,
            seed: 42,
            gateway_mode: GatewayMode::NearestOnly,
            interference_mode: InterferenceMode::CoSfOnly,
            distance_bins: default_bins(),
            sf_boundaries_km: None,
            h1_h2_coupling: H1H2Coupling::SharedDraw,
        }
    }
}

/// 0.25 km steps out to 8 km.
pub fn default_bins() -> Vec<f64> {
    (1..=32).map(|i| i as f64 * 0.25).collect()
}

impl SimConfig {
    pub fn link_budget(&self) -> LinkBudget {
        LinkBudget {
            tx_power_dbm: self.tx_power_dbm,
            bandwidth_hz: self.bandwidth_hz,
            noise_figure_db: self.noise_figure_db,
            wavelength_km: self.wavelength_km,
            path_loss_exponent: self.eta,
        }
    }

    /// SF ring boundaries: the explicit override if present, otherwise
    /// derived from the link budget.
    pub fn boundaries(&self) -> Result<SfBoundaries> {
        match &self.sf_boundaries_km {
            Some(radii) => SfBoundaries::from_radii(radii),
            None => lora_params::compute_sf_boundaries(
                self.tx_power_dbm,
                channel::noise_dbm(self.bandwidth_hz, self.noise_figure_db)?,
                self.wavelength_km,
                self.eta,
            ),
        }
    }

    /// All invariant violations, keyed by the config field name.
    pub(crate) fn violations(&self) -> Vec<(&'static str, String)> {
        let mut out = Vec::new();
        if !(self.radius_km > 0.0) || !self.radius_km.is_finite() {
            out.push(("radius_km", format!("must be positive, got {}", self.radius_km)));
        }
        if !(self.gw_intensity >= 0.0) || !self.gw_intensity.is_finite() {
            out.push(("gw_intensity", format!("must be non-negative, got {}", self.gw_intensity)));
        }
        if !(self.ed_intensity >= 0.0) || !self.ed_intensity.is_finite() {
            out.push(("ed_intensity", format!("must be non-negative, got {}", self.ed_intensity)));
        }
        if let Err(e) = self.link_budget().validate() {
            // attribute to the offending field
            let msg = e.to_string();
            let key = if msg.contains("bandwidth") {
                "bandwidth_hz"
            } else if msg.contains("wavelength") {
                "wavelength_km"
            } else if msg.contains("path loss") {
                "eta"
            } else if msg.contains("noise figure") {
                "noise_figure_db"
            } else {
                "tx_power_dbm"
            };
            out.push((key, msg));
        }
        if let Err(e) = self.fading.validate() {
            out.push(("rician_k", e.to_string()));
        }
        if self.trials < 1 {
            out.push(("trials", "must be at least 1".to_string()));
        }
        if self.distance_bins.is_empty() {
            out.push(("bins", "at least one distance bin is required".to_string()));
        }
        let mut prev = -1.0;
        for &d in &self.distance_bins {
            if !d.is_finite() || d < 0.0 || d >= self.radius_km {
                out.push(("bins", format!("bin {d} must lie in [0, radius)")));
                break;
            }
            if d <= prev {
                out.push(("bins", "bins must be strictly increasing".to_string()));
                break;
            }
            prev = d;
        }
        if let Some(radii) = &self.sf_boundaries_km {
            if let Err(e) = SfBoundaries::from_radii(radii) {
                out.push(("sf_boundaries", e.to_string()));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        match self.violations().into_iter().next() {
            Some((key, msg)) => Err(Error::InvalidConfig(format!("{key}: {msg}"))),
            None => Ok(()),
        }
    }
}

/// Outcome of one trial, reported for the nearest gateway (success also
/// reflects the gateway union when that mode is active).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub h1: bool,
    pub h2: bool,
    pub success: bool,
    /// SNR at the nearest gateway.
    pub snr_linear: f64,
    /// Co-SF SIR at the nearest gateway; `None` without an active co-SF
    /// interferer.
    pub sir_linear: Option<f64>,
    /// The realization had no gateways; the trial counts as a failure.
    pub zero_gateway: bool,
}

impl TrialOutcome {
    fn no_gateway() -> TrialOutcome {
        TrialOutcome {
            h1: false,
            h2: false,
            success: false,
            snr_linear: 0.0,
            sir_linear: None,
            zero_gateway: true,
        }
    }
}

/// Raw draws behind one trial, for independent re-evaluation.
#[derive(Debug, Clone, Default)]
pub struct TrialLog {
    pub tagged_distance_km: f64,
    pub tagged_sf: u8,
    /// Index 0 is the serving (nearest) gateway.
    pub gateways: Vec<Point>,
    /// Active interferers with their assigned SFs.
    pub active: Vec<(Point, u8)>,
    /// One entry per evaluated gateway, in gateway order.
    pub draws: Vec<GatewayDraws>,
}

/// Fading draws at a single gateway.
#[derive(Debug, Clone, Default)]
pub struct GatewayDraws {
    pub tagged_gain_h1: f64,
    pub tagged_gain_h2: f64,
    /// Aligned with `TrialLog::active`.
    pub interferer_gains: Vec<f64>,
}

/// Aggregate interference, one slot per SF class (index = SF − 7).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassPower(pub [f64; 6]);

impl ClassPower {
    pub fn for_sf(&self, sf: u8) -> Result<f64> {
        Ok(self.0[(lora_params::sf_row(sf)?.sf - SF_MIN) as usize])
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Instantaneous SNR = ε · |h|² · g(d) / N.
pub fn snr_value(h_squared: f64, d_km: f64, budget: &LinkBudget) -> Result<f64> {
    Ok(budget.tx_power_mw() * h_squared * budget.path_gain(d_km)? / budget.noise_mw())
}

/// SNR condition: the received SNR meets the SF threshold (inclusive).
pub fn eval_h1(snr_linear: f64, sf: u8) -> Result<bool> {
    Ok(snr_linear >= channel::db_to_linear(lora_params::snr_threshold_db(sf)?))
}

/// Thin an explicit device list down to the interferers active at one
/// instant. Each device transmits with probability duty_cycle(its SF);
/// co-SF mode keeps only the tagged class.
pub fn draw_active_interferers<R: Rng + ?Sized>(
    end_devices: &[(Point, u8)],
    tagged_sf: u8,
    mode: InterferenceMode,
    rng: &mut R,
) -> Result<Vec<(Point, u8)>> {
    lora_params::sf_row(tagged_sf)?;
    let mut active = Vec::new();
    for &(p, sf) in end_devices {
        let duty = lora_params::duty_cycle(sf)?;
        if rng.gen::<f64>() < duty {
            if mode == InterferenceMode::CoSfOnly && sf != tagged_sf {
                continue;
            }
            active.push((p, sf));
        }
    }
    Ok(active)
}

/// Per-class interference power at `gw` from pre-drawn fading gains.
pub fn interference_from_gains(
    active: &[(Point, u8)],
    gains: &[f64],
    gw: Point,
    budget: &LinkBudget,
) -> Result<ClassPower> {
    if active.len() != gains.len() {
        return Err(Error::invalid_arg(format!(
            "gain count {} does not match interferer count {}",
            gains.len(),
            active.len()
        )));
    }
    let tx = budget.tx_power_mw();
    let mut classes = ClassPower::default();
    for (&(p, sf), &gain) in active.iter().zip(gains) {
        let d = p.distance_to(&gw).max(MIN_DISTANCE_KM);
        let idx = (lora_params::sf_row(sf)?.sf - SF_MIN) as usize;
        classes.0[idx] += tx * gain * budget.path_gain(d)?;
    }
    Ok(classes)
}

/// Per-class interference power at `gw`: Σₖ ε · |h_kj|² · g(d_kj), where
/// h_kj and d_kj belong to interferer k's own link to gateway j, each with
/// a fresh i.i.d. fading draw.
pub fn interference_power<R: Rng + ?Sized>(
    active: &[(Point, u8)],
    gw: Point,
    fading: FadingModel,
    budget: &LinkBudget,
    rng: &mut R,
) -> Result<ClassPower> {
    let gains: Vec<f64> = active
        .iter()
        .map(|_| channel::sample_power_gain(fading, rng))
        .collect();
    interference_from_gains(active, &gains, gw, budget)
}

/// SIR condition. Co-SF mode: the tagged class's interference is zero or
/// the signal beats it by the capture threshold. Inter-SF mode: the same
/// holds per class against the pairwise threshold table. Comparisons are
/// inclusive; products avoid a division so the boundary case is exact.
pub fn eval_h2(
    signal_power: f64,
    interference: &ClassPower,
    tagged_sf: u8,
    mode: InterferenceMode,
    sir: &SirMatrix,
) -> Result<bool> {
    if !(signal_power >= 0.0) {
        return Err(Error::invalid_arg(format!(
            "signal power must be non-negative, got {signal_power}"
        )));
    }
    match mode {
        InterferenceMode::CoSfOnly => {
            let i_co = interference.for_sf(tagged_sf)?;
            Ok(i_co == 0.0 || signal_power >= sir.threshold_linear(tagged_sf, tagged_sf)? * i_co)
        }
        InterferenceMode::InterSf => {
            for sf in SF_MIN..=SF_MAX {
                let i_s = interference.for_sf(sf)?;
                if i_s > 0.0 && signal_power < sir.threshold_linear(tagged_sf, sf)? * i_s {
                    return Ok(false);
                }
            }
            Ok(true)
        }
    }
}

/// Expected successfully delivered payload rate for one device, in bit/s:
/// p_success × tx_per_hour × packet bits / 3600.
pub fn throughput(sf: u8, p_success: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p_success) {
        return Err(Error::invalid_arg(format!(
            "success probability must be in [0, 1], got {p_success}"
        )));
    }
    let row = lora_params::sf_row(sf)?;
    Ok(p_success * row.tx_per_hour * PACKET_BYTES * 8.0 / 3600.0)
}

/// Estimates for one distance bin.
#[derive(Debug, Clone, PartialEq)]
pub struct BinEstimate {
    pub distance_km: f64,
    /// SF of the tagged device at this distance.
    pub sf: u8,
    pub p_h1: f64,
    pub p_h1_ci: f64,
    pub p_h2: f64,
    pub p_h2_ci: f64,
    pub p_success: f64,
    pub p_success_ci: f64,
    pub trials: u64,
    /// Trials whose realization had no gateway (structurally zero under
    /// the conditioned sweep, reported for completeness).
    pub zero_gw_trials: u64,
    pub throughput_bps: f64,
}

/// Distance-swept probability estimates with Wald 3σ half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveEstimate {
    pub bins: Vec<BinEstimate>,
}

/// 3σ binomial half-width.
pub fn ci_halfwidth(p: f64, trials: u64) -> f64 {
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    h1: u64,
    h2: u64,
    success: u64,
    zero_gw: u64,
}

impl Counts {
    fn add(&mut self, o: &TrialOutcome) {
        self.h1 += o.h1 as u64;
        self.h2 += o.h2 as u64;
        self.success += o.success as u64;
        self.zero_gw += o.zero_gateway as u64;
    }

    fn merge(mut self, other: Counts) -> Counts {
        self.h1 += other.h1;
        self.h2 += other.h2;
        self.success += other.success;
        self.zero_gw += other.zero_gw;
        self
    }
}

/// A validated configuration with its derived tables, ready to run trials.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    budget: LinkBudget,
    boundaries: SfBoundaries,
    sir: SirMatrix,
    /// duty cycle per SF class (index = SF − 7)
    duty: [f64; 6],
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Simulation> {
        config.validate()?;
        let boundaries = config.boundaries()?;
        let budget = config.link_budget();
        let mut duty = [0.0; 6];
        for sf in SF_MIN..=SF_MAX {
            duty[(sf - SF_MIN) as usize] = lora_params::duty_cycle(sf)?;
        }
        Ok(Simulation {
            config,
            budget,
            boundaries,
            sir: SirMatrix::standard(),
            duty,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn boundaries(&self) -> &SfBoundaries {
        &self.boundaries
    }

    /// Run one trial with the tagged device at the origin and its nearest
    /// gateway at `tagged_distance_km`.
    pub fn run_trial(&self, tagged_distance_km: f64, rng: &mut TrialRng) -> Result<TrialOutcome> {
        self.trial_impl(tagged_distance_km, rng, None)
    }

    /// Same as [`run_trial`](Self::run_trial) but records every draw.
    pub fn run_trial_logged(
        &self,
        tagged_distance_km: f64,
        rng: &mut TrialRng,
    ) -> Result<(TrialOutcome, TrialLog)> {
        let mut log = TrialLog::default();
        let outcome = self.trial_impl(tagged_distance_km, rng, Some(&mut log))?;
        Ok((outcome, log))
    }

    fn trial_impl(
        &self,
        tagged_distance_km: f64,
        rng: &mut TrialRng,
        mut log: Option<&mut TrialLog>,
    ) -> Result<TrialOutcome> {
        let cfg = &self.config;
        if !(tagged_distance_km >= 0.0) || tagged_distance_km >= cfg.radius_km {
            return Err(Error::invalid_arg(format!(
                "tagged distance {tagged_distance_km} must lie in [0, radius)"
            )));
        }

        // --- geometry lane ---
        let geom = &mut rng.geometry;
        let bearing = geom.gen::<f64>() * std::f64::consts::TAU;
        let serving = Point::new(
            tagged_distance_km * bearing.cos(),
            tagged_distance_km * bearing.sin(),
        );
        let mut gateways = vec![serving];
        for p in geometry::sample_ppp(cfg.gw_intensity, cfg.radius_km, geom)? {
            // keep the placed gateway nearest to the origin
            if p.norm() > tagged_distance_km {
                gateways.push(p);
            }
        }
        if gateways.is_empty() {
            return Ok(TrialOutcome::no_gateway());
        }
        let tagged_sf = lora_params::sf_for_distance(tagged_distance_km, &self.boundaries)?;

        // Active interferers per class: thinning the device PPP by the
        // per-SF duty cycle leaves a PPP at intensity λ_ED · duty(SF) on
        // the region where that SF is assigned.
        let classes: &[u8] = match cfg.interference_mode {
            InterferenceMode::CoSfOnly => &[0][..],
            InterferenceMode::InterSf => &[0, 1, 2, 3, 4, 5][..],
        };
        let mut active: Vec<(Point, u8)> = Vec::new();
        for &offset in classes {
            let sf = match cfg.interference_mode {
                InterferenceMode::CoSfOnly => tagged_sf,
                InterferenceMode::InterSf => SF_MIN + offset,
            };
            let lambda = cfg.ed_intensity * self.duty[(sf - SF_MIN) as usize];
            for p in geometry::sample_ppp(lambda, cfg.radius_km, geom)? {
                let (_, d_nearest) = geometry::nearest(p, &gateways)?;
                if lora_params::sf_for_distance(d_nearest, &self.boundaries)? == sf {
                    active.push((p, sf));
                }
            }
        }

        if let Some(log) = log.as_deref_mut() {
            log.tagged_distance_km = tagged_distance_km;
            log.tagged_sf = tagged_sf;
            log.gateways = gateways.clone();
            log.active = active.clone();
        }

        // --- fading lane ---
        let fad = &mut rng.fading;
        let eval_count = match cfg.gateway_mode {
            GatewayMode::NearestOnly => 1,
            GatewayMode::AnyGatewayUnion => gateways.len(),
        };
        let mut outcome = TrialOutcome {
            h1: false,
            h2: false,
            success: false,
            snr_linear: 0.0,
            sir_linear: None,
            zero_gateway: false,
        };
        for (j, gw) in gateways.iter().take(eval_count).enumerate() {
            let d0j = if j == 0 {
                tagged_distance_km.max(MIN_DISTANCE_KM)
            } else {
                gw.norm().max(MIN_DISTANCE_KM)
            };
            let gain_h1 = channel::sample_power_gain(cfg.fading, fad);
            let snr = snr_value(gain_h1, d0j, &self.budget)?;
            let h1_j = eval_h1(snr, tagged_sf)?;
            let gain_h2 = match cfg.h1_h2_coupling {
                H1H2Coupling::SharedDraw => gain_h1,
                H1H2Coupling::Independent => channel::sample_power_gain(cfg.fading, fad),
            };
            let signal = self.budget.tx_power_mw() * gain_h2 * self.budget.path_gain(d0j)?;

            let mut interference = ClassPower::default();
            let mut gains = log.is_some().then(|| Vec::with_capacity(active.len()));
            for &(p, sf) in &active {
                let gain = channel::sample_power_gain(cfg.fading, fad);
                let d = p.distance_to(gw).max(MIN_DISTANCE_KM);
                interference.0[(sf - SF_MIN) as usize] +=
                    self.budget.tx_power_mw() * gain * self.budget.path_gain(d)?;
                if let Some(gains) = gains.as_mut() {
                    gains.push(gain);
                }
            }
            let h2_j = eval_h2(
                signal,
                &interference,
                tagged_sf,
                cfg.interference_mode,
                &self.sir,
            )?;

            if j == 0 {
                outcome.h1 = h1_j;
                outcome.h2 = h2_j;
                outcome.snr_linear = snr;
                let i_co = interference.for_sf(tagged_sf)?;
                outcome.sir_linear = (i_co > 0.0).then(|| signal / i_co);
            }
            outcome.success |= h1_j && h2_j;

            if let Some(log) = log.as_deref_mut() {
                log.draws.push(GatewayDraws {
                    tagged_gain_h1: gain_h1,
                    tagged_gain_h2: gain_h2,
                    interferer_gains: gains.unwrap_or_default(),
                });
            }
        }
        Ok(outcome)
    }

    /// Run `config.trials` trials per distance bin and aggregate.
    ///
    /// Deterministic for a fixed (seed, trials, bins) regardless of how
    /// many threads execute: trial streams are counter-derived and the
    /// reduction sums integer counts.
    pub fn run_sweep(&self) -> Result<CurveEstimate> {
        let cfg = &self.config;
        let mut bins = Vec::with_capacity(cfg.distance_bins.len());
        for (bin_index, &d) in cfg.distance_bins.iter().enumerate() {
            let counts = (0..cfg.trials)
                .into_par_iter()
                .try_fold(Counts::default, |mut acc, trial| {
                    let mut rng = trial_rng(cfg.seed, bin_index as u64, trial);
                    acc.add(&self.run_trial(d, &mut rng)?);
                    Ok::<Counts, Error>(acc)
                })
                .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
            let n = cfg.trials;
            let p_h1 = counts.h1 as f64 / n as f64;
            let p_h2 = counts.h2 as f64 / n as f64;
            let p_success = counts.success as f64 / n as f64;
            let sf = lora_params::sf_for_distance(d, &self.boundaries)?;
            bins.push(BinEstimate {
                distance_km: d,
                sf,
                p_h1,
                p_h1_ci: ci_halfwidth(p_h1, n),
                p_h2,
                p_h2_ci: ci_halfwidth(p_h2, n),
                p_success,
                p_success_ci: ci_halfwidth(p_success, n),
                trials: n,
                zero_gw_trials: counts.zero_gw,
                throughput_bps: throughput(sf, p_success)?,
            });
        }
        Ok(CurveEstimate { bins })
    }
}

/// Convenience wrapper: validate `config` and run the full sweep.
pub fn run_sweep(config: &SimConfig) -> Result<CurveEstimate> {
    Simulation::new(config.clone())?.run_sweep()
}
