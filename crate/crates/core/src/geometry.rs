//! Poisson point processes on a disk and nearest-neighbor queries.
//!
//! Gateways and end-devices are modeled as independent homogeneous PPPs on
//! a disk centered at the origin: the point count is Poisson(λπR²) and the
//! points are i.i.d. uniform on the disk. Uniformity uses the radial
//! inverse-CDF (r = R√u), so no rejection loop is needed.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{Error, Result};

/// Shortest distance considered between any transmitter and receiver (1 m).
/// The Friis gain diverges as d → 0; clamping bounds the received power
/// without affecting km-scale results.
pub const MIN_DISTANCE_KM: f64 = 0.001;

/// A location on the deployment plane, in km.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Point {
        Point { x, y }
    }

    /// Euclidean distance to `other`, in km (unclamped).
    pub fn distance_to(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        (dx * dx + dy * dy).sqrt()
    }

    /// Distance from the origin.
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }
}

/// Sample a homogeneous PPP with the given intensity (points per km²) on
/// the disk of `radius_km` centered at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(
    intensity: f64,
    radius_km: f64,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if !(intensity >= 0.0) {
        return Err(Error::invalid_arg(format!(
            "intensity must be non-negative, got {intensity}"
        )));
    }
    if !(radius_km > 0.0) {
        return Err(Error::invalid_arg(format!(
            "radius must be positive, got {radius_km}"
        )));
    }
    let mean = intensity * std::f64::consts::PI * radius_km * radius_km;
    if mean == 0.0 {
        return Ok(Vec::new());
    }
    let count = Poisson::new(mean)
        .map_err(|e| Error::invalid_arg(format!("invalid PPP mean {mean}: {e}")))?
        .sample(rng) as usize;
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        points.push(uniform_on_disk(radius_km, rng));
    }
    Ok(points)
}

/// One point uniform on the disk of `radius_km` around the origin.
pub fn uniform_on_disk<R: Rng + ?Sized>(radius_km: f64, rng: &mut R) -> Point {
    let r = radius_km * rng.gen::<f64>().sqrt();
    let theta = rng.gen::<f64>() * std::f64::consts::TAU;
    Point {
        x: r * theta.cos(),
        y: r * theta.sin(),
    }
}

/// Index and clamped distance of the candidate nearest to `origin`.
///
/// Ties break toward the lowest index; distances below 1 m are reported
/// as 1 m. An empty candidate list means the realization has no gateways.
pub fn nearest(origin: Point, candidates: &[Point]) -> Result<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, c) in candidates.iter().enumerate() {
        let d = origin.distance_to(c);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    match best {
        Some((i, d)) => Ok((i, d.max(MIN_DISTANCE_KM))),
        None => Err(Error::NoGateway),
    }
}

/// One sampled network: gateway and end-device point patterns on a disk.
#[derive(Debug, Clone)]
pub struct Deployment {
    pub gateways: Vec<Point>,
    pub end_devices: Vec<Point>,
    pub radius_km: f64,
    pub gw_intensity: f64,
    pub ed_intensity: f64,
}

impl Deployment {
    /// Validate and wrap an explicit deployment.
    pub fn new(
        gateways: Vec<Point>,
        end_devices: Vec<Point>,
        radius_km: f64,
        gw_intensity: f64,
        ed_intensity: f64,
    ) -> Result<Deployment> {
        if !(radius_km > 0.0) {
            return Err(Error::invalid_arg(format!(
                "radius must be positive, got {radius_km}"
            )));
        }
        if !(gw_intensity > 0.0) || !(ed_intensity > 0.0) {
            return Err(Error::invalid_arg(
                "deployment intensities must be strictly positive".to_string(),
            ));
        }
        // allow a hair of slack for points constructed right on the rim
        let limit = radius_km * (1.0 + 1e-12);
        for p in gateways.iter().chain(end_devices.iter()) {
            if !p.x.is_finite() || !p.y.is_finite() || p.norm() > limit {
                return Err(Error::invalid_arg(format!(
                    "point ({}, {}) lies outside the {radius_km} km disk",
                    p.x, p.y
                )));
            }
        }
        Ok(Deployment {
            gateways,
            end_devices,
            radius_km,
            gw_intensity,
            ed_intensity,
        })
    }

    /// Sample both point processes.
    pub fn sample<R: Rng + ?Sized>(
        radius_km: f64,
        gw_intensity: f64,
        ed_intensity: f64,
        rng: &mut R,
    ) -> Result<Deployment> {
        if !(gw_intensity > 0.0) || !(ed_intensity > 0.0) {
            return Err(Error::invalid_arg(
                "deployment intensities must be strictly positive".to_string(),
            ));
        }
        let gateways = sample_ppp(gw_intensity, radius_km, rng)?;
        let end_devices = sample_ppp(ed_intensity, radius_km, rng)?;
        Ok(Deployment {
            gateways,
            end_devices,
            radius_km,
            gw_intensity,
            ed_intensity,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_intensity_gives_empty_pattern() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_ppp(0.0, 20.0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn invalid_arguments_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_ppp(-1.0, 20.0, &mut rng).is_err());
        assert!(sample_ppp(1.0, 0.0, &mut rng).is_err());
        assert!(sample_ppp(1.0, -5.0, &mut rng).is_err());
    }

    #[test]
    fn points_stay_on_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in sample_ppp(5.0, 20.0, &mut rng).unwrap() {
            assert!(p.norm() <= 20.0);
        }
    }

    #[test]
    fn count_mean_tracks_intensity() {
        // mean count ≈ λπR² = 6.2832 for the sparse-gateway setting
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let realizations = 2000;
        let total: usize = (0..realizations)
            .map(|_| sample_ppp(0.005, 20.0, &mut rng).unwrap().len())
            .sum();
        let mean = total as f64 / realizations as f64;
        let expected = 0.005 * std::f64::consts::PI * 400.0;
        // 3σ of the sample mean of a Poisson
        let tol = 3.0 * (expected / realizations as f64).sqrt();
        assert!((mean - expected).abs() < tol, "mean {mean} vs {expected}");
    }

    #[test]
    fn same_seed_same_points() {
        let a = sample_ppp(2.0, 10.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = sample_ppp(2.0, 10.0, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nearest_basic() {
        let (i, d) = nearest(
            Point::ORIGIN,
            &[Point::new(3.0, 4.0), Point::new(1.0, 1.0)],
        )
        .unwrap();
        assert_eq!(i, 1);
        assert_relative_eq!(d, 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn nearest_clamps_to_one_meter() {
        let (i, d) = nearest(Point::ORIGIN, &[Point::ORIGIN]).unwrap();
        assert_eq!(i, 0);
        assert_eq!(d, MIN_DISTANCE_KM);
    }

    #[test]
    fn nearest_empty_is_no_gateway() {
        assert!(matches!(nearest(Point::ORIGIN, &[]), Err(Error::NoGateway)));
    }

    #[test]
    fn nearest_matches_exhaustive_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let candidates = sample_ppp(0.1, 20.0, &mut rng).unwrap();
        assert!(candidates.len() > 3);
        for _ in 0..50 {
            let origin = uniform_on_disk(20.0, &mut rng);
            let (i, d) = nearest(origin, &candidates).unwrap();
            let (bi, bd) = candidates
                .iter()
                .enumerate()
                .map(|(j, c)| (j, origin.distance_to(c)))
                .fold((usize::MAX, f64::INFINITY), |acc, (j, dj)| {
                    if dj < acc.1 {
                        (j, dj)
                    } else {
                        acc
                    }
                });
            assert_eq!(i, bi);
            assert_relative_eq!(d, bd.max(MIN_DISTANCE_KM), epsilon = 1e-12);
        }
    }

    #[test]
    fn deployment_sample_respects_disk() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let dep = Deployment::sample(20.0, 0.005, 0.5, &mut rng).unwrap();
        assert!(dep.gateways.iter().chain(&dep.end_devices).all(|p| p.norm() <= 20.0));
        assert!(dep.end_devices.len() > dep.gateways.len());
        assert!(Deployment::sample(20.0, 0.0, 5.0, &mut rng).is_err());
    }

    #[test]
    fn deployment_rejects_outside_points() {
        let err = Deployment::new(
            vec![Point::new(25.0, 0.0)],
            vec![],
            20.0,
            0.005,
            5.0,
        );
        assert!(err.is_err());
        let ok = Deployment::new(vec![Point::new(1.0, 0.0)], vec![Point::ORIGIN], 20.0, 0.005, 5.0);
        assert!(ok.is_ok());
    }
}
