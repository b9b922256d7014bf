//! Noise floor, Friis path gain, fading samplers, and closed-form
//! connection probabilities.
//!
//! Two narrowband fading models are supported, both normalized to a
//! unit-mean power gain E[|h|²] = 1:
//!
//! - Rayleigh: |h|² ~ Exp(1), for rich-scatter environments without a
//!   line-of-sight path.
//! - Rician(K): |h|² = (ν + X)² + Y² with ν² = K/(K+1) and
//!   X, Y ~ N(0, 1/(2(K+1))), for links dominated by a LoS component.
//!   K = 0 degenerates to Rayleigh.
//!
//! All arithmetic inside operations is linear (mW and power ratios); dB
//! conversions happen only at the interfaces.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};

/// Fast-fading model for every link in a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingModel {
    Rayleigh,
    /// Rician with the given K-factor (linear LoS-to-scatter power ratio).
    Rician { k_factor: f64 },
}

impl FadingModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            FadingModel::Rayleigh => Ok(()),
            FadingModel::Rician { k_factor } => {
                if k_factor.is_finite() && *k_factor >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid_arg(format!(
                        "Rician K-factor must be finite and non-negative, got {k_factor}"
                    )))
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FadingModel::Rayleigh => "rayleigh",
            FadingModel::Rician { .. } => "rician",
        }
    }
}

/// Radio parameters shared by every link in a simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Transmit power ε in dBm (identical for all end-devices).
    pub tx_power_dbm: f64,
    /// Receiver bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Receiver noise figure in dB.
    pub noise_figure_db: f64,
    /// Carrier wavelength λ in km.
    pub wavelength_km: f64,
    /// Path loss exponent η ≥ 2.
    pub path_loss_exponent: f64,
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        if !self.tx_power_dbm.is_finite() {
            return Err(Error::invalid_arg("tx power must be finite".to_string()));
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(Error::invalid_arg(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth_hz
            )));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Error::invalid_arg("noise figure must be finite".to_string()));
        }
        if !(self.wavelength_km > 0.0) {
            return Err(Error::invalid_arg(format!(
                "wavelength must be positive, got {}",
                self.wavelength_km
            )));
        }
        if !(self.path_loss_exponent >= 2.0) {
            return Err(Error::invalid_arg(format!(
                "path loss exponent must be >= 2, got {}",
                self.path_loss_exponent
            )));
        }
        Ok(())
    }

    pub fn tx_power_mw(&self) -> f64 {
        dbm_to_mw(self.tx_power_dbm)
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_dbm(self.bandwidth_hz, self.noise_figure_db).expect("validated bandwidth")
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm())
    }

    /// Friis gain at distance `d_km` under this budget's λ and η.
    pub fn path_gain(&self, d_km: f64) -> Result<f64> {
        path_gain(d_km, self.wavelength_km, self.path_loss_exponent)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// AWGN power at the receiver: −174 dBm/Hz thermal floor plus bandwidth
/// and noise figure.
pub fn noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::invalid_arg(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    Ok(-174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// Friis attenuation (λ / 4πd)^η as a linear power gain.
pub fn path_gain(d_km: f64, wavelength_km: f64, eta: f64) -> Result<f64> {
    if !(d_km >= crate::geometry::MIN_DISTANCE_KM) {
        return Err(Error::invalid_arg(format!(
            "distance must be at least 1 m, got {d_km} km (clamp first)"
        )));
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
    Ok((wavelength_km / (4.0 * std::f64::consts::PI * d_km)).powf(eta))
}

/// Draw one power gain |h|² with unit mean.
pub fn sample_power_gain<R: Rng + ?Sized>(model: FadingModel, rng: &mut R) -> f64 {
    match model {
        FadingModel::Rayleigh => rng.sample::<f64, _>(Exp1),
        FadingModel::Rician { k_factor } => {
            let nu = (k_factor / (k_factor + 1.0)).sqrt();
            let sigma = (0.5 / (k_factor + 1.0)).sqrt();
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            let re = nu + sigma * x;
            let im = sigma * y;
            re * re + im * im
        }
    }
}

/// First-order Marcum Q function Q₁(a, b) = P[X > b²] for
/// X ~ noncentral-χ²(2, a²).
///
/// Series over the Poisson mixture representation,
/// Q₁ = Σₙ pₙ · P[χ²_{2(n+1)} > b²] with pₙ = Poisson(a²/2),
/// truncated when the remaining Poisson mass is below 1e-12 (the
/// remainder is bounded by that mass). Converges for a²/2 up to ~700;
/// larger noncentralities underflow the leading term and are rejected.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || !b.is_finite() || a < 0.0 || b < 0.0 {
        return Err(Error::invalid_arg(format!(
            "marcum_q1 arguments must be finite and non-negative, got ({a}, {b})"
        )));
    }
    let half_a2 = 0.5 * a * a;
    let half_b2 = 0.5 * b * b;
    if half_a2 > 700.0 {
        return Err(Error::invalid_arg(format!(
            "marcum_q1 series underflows for a = {a} (a²/2 > 700)"
        )));
    }
    if b == 0.0 {
        return Ok(1.0);
    }
    // p: Poisson(a²/2) pmf at n; t: Poisson(b²/2) pmf at n;
    // g: P[Poisson(b²/2) <= n] = P[χ²_{2(n+1)} > b²]
    let mut p = (-half_a2).exp();
    let mut t = (-half_b2).exp();
    let mut g = t;
    let mut sum = p * g;
    let mut cum_p = p;
    let mut n = 0u64;
    while 1.0 - cum_p > 1e-12 && n < 100_000 {
        n += 1;
        p *= half_a2 / n as f64;
        t *= half_b2 / n as f64;
        g += t;
        sum += p * g;
        cum_p += p;
    }
    Ok(sum.min(1.0))
}

/// Closed-form probability that the received SNR at distance `d_km`
/// meets the linear threshold `q_linear` under the given fading model.
///
/// With t = q·N / (ε·g(d)), Rayleigh gives exp(−t) and Rician(K) gives
/// Q₁(√(2K), √(2(K+1)t)).
pub fn analytic_conn_prob(
    model: FadingModel,
    d_km: f64,
    q_linear: f64,
    budget: &LinkBudget,
) -> Result<f64> {
    if !(q_linear >= 0.0) || !q_linear.is_finite() {
        return Err(Error::invalid_arg(format!(
            "threshold must be finite and non-negative, got {q_linear}"
        )));
    }
    model.validate()?;
    let t = q_linear * budget.noise_mw() / (budget.tx_power_mw() * budget.path_gain(d_km)?);
    match model {
        FadingModel::Rayleigh => Ok((-t).exp()),
        FadingModel::Rician { k_factor } => marcum_q1(
            (2.0 * k_factor).sqrt(),
            (2.0 * (k_factor + 1.0) * t).sqrt(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn default_budget() -> LinkBudget {
        LinkBudget {
            tx_power_dbm: 19.0,
            bandwidth_hz: 125_000.0,
            noise_figure_db: 6.0,
            wavelength_km: 34.5e-5,
            path_loss_exponent: 2.75,
        }
    }

    #[test]
    fn noise_floor_values() {
        assert_relative_eq!(noise_dbm(125_000.0, 6.0).unwrap(), -117.030900, max_relative = 1e-8);
        assert_relative_eq!(noise_dbm(1.0, 0.0).unwrap(), -174.0, epsilon = 1e-12);
        assert_relative_eq!(noise_dbm(250_000.0, 6.0).unwrap(), -114.020600, max_relative = 1e-8);
        assert!(noise_dbm(0.0, 6.0).is_err());
        assert!(noise_dbm(-10.0, 6.0).is_err());
    }

    #[test]
    fn path_gain_values() {
        let g1 = path_gain(1.0, 34.5e-5, 2.0).unwrap();
        assert_relative_eq!(g1, 7.537346e-10, max_relative = 1e-6);
        assert_relative_eq!(linear_to_db(g1), -91.2278, max_relative = 1e-5);
        // inverse-square: doubling the distance quarters the gain
        let g2 = path_gain(2.0, 34.5e-5, 2.0).unwrap();
        assert_relative_eq!(g2, g1 / 4.0, max_relative = 1e-12);
        assert_relative_eq!(
            path_gain(1.0, 34.5e-5, 2.75).unwrap(),
            2.858745e-13,
            max_relative = 1e-6
        );
        assert!(path_gain(0.0005, 34.5e-5, 2.0).is_err());
        assert!(path_gain(1.0, 0.0, 2.0).is_err());
        assert!(path_gain(1.0, 34.5e-5, 1.0).is_err());
    }

    #[test]
    fn rayleigh_sample_mean_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let mean: f64 = (0..n)
            .map(|_| sample_power_gain(FadingModel::Rayleigh, &mut rng))
            .sum::<f64>()
            / n as f64;
        assert!((mean - 1.0).abs() < 0.003, "mean {mean}");
    }

    #[test]
    fn rician_k0_ccdf_matches_exponential() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 1_000_000;
        let exceed = (0..n)
            .filter(|_| sample_power_gain(FadingModel::Rician { k_factor: 0.0 }, &mut rng) >= 1.0)
            .count();
        let p = exceed as f64 / n as f64;
        assert!((p - (-1.0f64).exp()).abs() < 0.002, "CCDF(1) = {p}");
    }

    #[test]
    fn rician_large_k_is_pure_los() {
        // sd of |h|² is √(2/K): 4.5e-5 at K = 1e9, 1.4e-6 at K = 1e12
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut sum = 0.0;
        for _ in 0..10_000 {
            let g = sample_power_gain(FadingModel::Rician { k_factor: 1e9 }, &mut rng);
            assert!((g - 1.0).abs() < 1e-3, "gain {g}");
            sum += g;
        }
        assert!((sum / 10_000.0 - 1.0).abs() < 1e-5);
        for _ in 0..10_000 {
            let g = sample_power_gain(FadingModel::Rician { k_factor: 1e12 }, &mut rng);
            assert!((g - 1.0).abs() < 1e-4, "gain {g}");
        }
    }

    #[test]
    fn rician_unit_mean_across_k() {
        for (i, k) in [0.5, 1.0, 4.0, 10.0].into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(20 + i as u64);
            let n = 1_000_000;
            let mean: f64 = (0..n)
                .map(|_| sample_power_gain(FadingModel::Rician { k_factor: k }, &mut rng))
                .sum::<f64>()
                / n as f64;
            assert!((mean - 1.0).abs() < 0.01, "K={k} mean {mean}");
        }
    }

    /// Numeric integration of the noncentral-χ²(2, a²) density above b².
    /// Simpson's rule on f(x) = ½ exp(−(x + a²)/2) I₀(a√x).
    fn marcum_by_quadrature(a: f64, b: f64) -> f64 {
        fn bessel_i0(x: f64) -> f64 {
            // power series; converges fast for the small arguments used here
            let mut term = 1.0;
            let mut sum = 1.0;
            let q = x * x / 4.0;
            for k in 1..200 {
                term *= q / ((k * k) as f64);
                sum += term;
                if term < 1e-17 * sum {
                    break;
                }
            }
            sum
        }
        let density = |x: f64| 0.5 * (-(x + a * a) / 2.0).exp() * bessel_i0(a * x.sqrt());
        let lo = b * b;
        let hi = lo + 60.0 + 4.0 * a * a; // tail beyond this is < 1e-13
        let n = 100_000;
        let h = (hi - lo) / n as f64;
        let mut s = density(lo) + density(hi);
        for i in 1..n {
            let x = lo + i as f64 * h;
            s += density(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn marcum_closed_form_cases() {
        // central case: Q1(0, b) = exp(-b²/2)
        assert_relative_eq!(marcum_q1(0.0, 1.0).unwrap(), 0.60653066, max_relative = 1e-8);
        assert_relative_eq!(
            marcum_q1(0.0, 2.5).unwrap(),
            (-2.5f64 * 2.5 / 2.0).exp(),
            max_relative = 1e-10
        );
        assert_eq!(marcum_q1(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(marcum_q1(0.0, 0.0).unwrap(), 1.0);
        assert!(marcum_q1(-1.0, 0.0).is_err());
        assert!(marcum_q1(f64::NAN, 0.0).is_err());
        assert!(marcum_q1(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn marcum_matches_quadrature() {
        // frozen from the quadrature oracle
        assert_relative_eq!(marcum_q1(1.0, 1.0).unwrap(), 0.7328798038, max_relative = 1e-9);
        for &(a, b) in &[(1.0, 1.0), (0.5, 2.0), (2.0, 1.0), (3.0, 3.5), (2.8, 4.4)] {
            let series = marcum_q1(a, b).unwrap();
            let quad = marcum_by_quadrature(a, b);
            assert!(
                (series - quad).abs() < 1e-7,
                "Q1({a},{b}): series {series} vs quadrature {quad}"
            );
        }
    }

    #[test]
    fn conn_prob_chain() {
        let budget = default_budget();
        // zero threshold: certain success
        assert_eq!(
            analytic_conn_prob(FadingModel::Rayleigh, 3.0, 0.0, &budget).unwrap(),
            1.0
        );
        // 8 km at the SF12 threshold: t ≈ 0.2656, p ≈ 0.7667
        let p = analytic_conn_prob(FadingModel::Rayleigh, 8.0, db_to_linear(-20.0), &budget)
            .unwrap();
        assert_relative_eq!(p, 0.7667439, max_relative = 1e-6);
    }

    #[test]
    fn rician_k0_equals_rayleigh_closed_form() {
        let budget = default_budget();
        for d in [0.5, 2.0, 5.0, 9.0, 14.0] {
            for q_db in [-20.0, -12.0, -6.0, 0.0] {
                let q = db_to_linear(q_db);
                let ray = analytic_conn_prob(FadingModel::Rayleigh, d, q, &budget).unwrap();
                let ric =
                    analytic_conn_prob(FadingModel::Rician { k_factor: 0.0 }, d, q, &budget)
                        .unwrap();
                assert!((ray - ric).abs() < 1e-8, "d={d} q={q_db}: {ray} vs {ric}");
            }
        }
    }

    #[test]
    fn rician_dominates_rayleigh_below_mean_snr() {
        // for K > 0 the LoS component protects the link wherever t < 1
        let budget = default_budget();
        for k in [0.5, 1.0, 4.0, 10.0] {
            for d in [1.0, 3.0, 6.0, 10.0] {
                for q_db in [-30.0, -25.0, -20.0] {
                    let q = db_to_linear(q_db);
                    let t = q * budget.noise_mw()
                        / (budget.tx_power_mw() * budget.path_gain(d).unwrap());
                    if t >= 1.0 {
                        continue;
                    }
                    let ray = analytic_conn_prob(FadingModel::Rayleigh, d, q, &budget).unwrap();
                    let ric =
                        analytic_conn_prob(FadingModel::Rician { k_factor: k }, d, q, &budget)
                            .unwrap();
                    assert!(ric >= ray - 1e-12, "K={k} d={d} q={q_db}: {ric} < {ray}");
                }
            }
        }
    }

    #[test]
    fn empirical_ccdf_matches_analytic() {
        // Monte Carlo estimate of P[|h|²·ε·g(d)/N ≥ q] vs the closed form
        let budget = default_budget();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut param_rng = ChaCha8Rng::seed_from_u64(78);
        let draws = 100_000;
        for _ in 0..20 {
            let d = 0.5 + 12.0 * param_rng.gen::<f64>();
            let q_db = -25.0 + 20.0 * param_rng.gen::<f64>();
            let k = 10.0 * param_rng.gen::<f64>();
            let model = if param_rng.gen::<bool>() {
                FadingModel::Rayleigh
            } else {
                FadingModel::Rician { k_factor: k }
            };
            let q = db_to_linear(q_db);
            let threshold =
                q * budget.noise_mw() / (budget.tx_power_mw() * budget.path_gain(d).unwrap());
            let hits = (0..draws)
                .filter(|_| sample_power_gain(model, &mut rng) >= threshold)
                .count();
            let p_mc = hits as f64 / draws as f64;
            let p = analytic_conn_prob(model, d, q, &budget).unwrap();
            let tol = 3.0 * (p * (1.0 - p) / draws as f64).sqrt() + 1e-4;
            assert!(
                (p_mc - p).abs() <= tol,
                "{model:?} d={d:.2} q={q_db:.2}: mc {p_mc} vs analytic {p}"
            );
        }
    }

    proptest! {
        #[test]
        fn marcum_within_unit_interval(a in 0.0f64..20.0, b in 0.0f64..40.0) {
            let v = marcum_q1(a, b).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
        }

        #[test]
        fn conn_prob_decreases_with_distance_and_threshold(
            d1 in 0.1f64..15.0,
            delta in 0.1f64..5.0,
            q_db in -25.0f64..0.0,
        ) {
            let budget = default_budget();
            let q = db_to_linear(q_db);
            for model in [FadingModel::Rayleigh, FadingModel::Rician { k_factor: 4.0 }] {
                let near = analytic_conn_prob(model, d1, q, &budget).unwrap();
                let far = analytic_conn_prob(model, d1 + delta, q, &budget).unwrap();
                prop_assert!(far <= near + 1e-12);
                let stricter = analytic_conn_prob(model, d1, q * 1.5, &budget).unwrap();
                prop_assert!(stricter <= near + 1e-12);
            }
        }
    }
}
