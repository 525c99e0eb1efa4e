//! 2-D geometry, path-loss channel, power superposition and transmit-power
//! distributions.
//!
//! Alice sits at (-d_AB/2, 0), Bob at (+d_AB/2, 0) and Eve on a circle of
//! radius `r_e` around the origin at angle `theta`. All powers are linear
//! (dimensionless SNR at unit distance); dB is used only at module
//! boundaries via [`to_db`] / [`from_db`].

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Linear power -> dB.
pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// dB -> linear power.
pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Positions and path-loss exponent of the Alice/Bob/Eve triangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Distance between Alice and Bob.
    pub d_ab: f64,
    /// Radius of the circle Eve is excluded from (Eve sits on its perimeter).
    pub r_e: f64,
    /// Eve's angle off the x-axis, radians.
    pub theta: f64,
    /// Path-loss exponent.
    pub alpha: f64,
}

impl GeometryConfig {
    pub fn new(d_ab: f64, r_e: f64, theta: f64, alpha: f64) -> Result<Self> {
        let g = Self { d_ab, r_e, theta, alpha };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d_ab > 0.0) {
            return Err(Error::Config(format!("geometry.d_ab must be > 0, got {}", self.d_ab)));
        }
        if !(self.r_e >= self.d_ab / 2.0) {
            return Err(Error::Config(format!(
                "geometry.r_e must be >= d_ab/2 ({} < {})",
                self.r_e,
                self.d_ab / 2.0
            )));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::Config(format!("geometry.alpha must be > 0, got {}", self.alpha)));
        }
        if !self.theta.is_finite() {
            return Err(Error::Config("geometry.theta must be finite".into()));
        }
        Ok(())
    }

    /// Eve's distances to Alice and Bob, `(d_ae, d_be)`, by the law of
    /// cosines on the fixed node placement.
    pub fn distances(&self) -> (f64, f64) {
        let s = self.r_e * self.r_e + self.d_ab * self.d_ab / 4.0;
        let c = self.r_e * self.d_ab * self.theta.cos();
        ((s + c).sqrt(), (s - c).sqrt())
    }

    pub fn d_ae(&self) -> f64 {
        self.distances().0
    }

    pub fn d_be(&self) -> f64 {
        self.distances().1
    }

    /// d_min / d_max over Eve's two distances.
    pub fn distance_ratio(&self) -> f64 {
        let (a, b) = self.distances();
        a.min(b) / a.max(b)
    }
}

/// Randomized transmit-power law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PowerDistribution {
    /// Uniform in linear power on `[rho_min, rho_max]`.
    UniformLinear { rho_min: f64, rho_max: f64 },
    /// Discrete `(level, probability)` pairs, levels in linear power.
    DiscreteLevels { levels: Vec<(f64, f64)> },
}

impl PowerDistribution {
    pub fn uniform(rho_min: f64, rho_max: f64) -> Result<Self> {
        let d = Self::UniformLinear { rho_min, rho_max };
        d.validate()?;
        Ok(d)
    }

    pub fn levels(levels: Vec<(f64, f64)>) -> Result<Self> {
        let d = Self::DiscreteLevels { levels };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::UniformLinear { rho_min, rho_max } => {
                if !(*rho_min > 0.0 && rho_max >= rho_min) {
                    return Err(Error::Config(format!(
                        "uniform power law requires 0 < rho_min <= rho_max, got [{rho_min}, {rho_max}]"
                    )));
                }
            }
            Self::DiscreteLevels { levels } => {
                if levels.is_empty() {
                    return Err(Error::Config("discrete power law has no levels".into()));
                }
                let mut total = 0.0;
                for (level, p) in levels {
                    if !(*level > 0.0) {
                        return Err(Error::Config(format!("power level must be > 0, got {level}")));
                    }
                    if !(*p >= 0.0) {
                        return Err(Error::Config(format!("level probability must be >= 0, got {p}")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::Config(format!(
                        "level probabilities must sum to 1 within 1e-12, got {total}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The same law with every support point multiplied by `factor`
    /// (must be positive). Used to express power laws relative to a
    /// path-gain ratio.
    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Self::UniformLinear { rho_min, rho_max } => Self::UniformLinear {
                rho_min: rho_min * factor,
                rho_max: rho_max * factor,
            },
            Self::DiscreteLevels { levels } => Self::DiscreteLevels {
                levels: levels.iter().map(|&(l, p)| (l * factor, p)).collect(),
            },
        }
    }

    /// Smallest power in the support.
    pub fn rho_min(&self) -> f64 {
        match self {
            Self::UniformLinear { rho_min, .. } => *rho_min,
            Self::DiscreteLevels { levels } => {
                levels.iter().map(|(l, _)| *l).fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Largest power in the support.
    pub fn rho_max(&self) -> f64 {
        match self {
            Self::UniformLinear { rho_max, .. } => *rho_max,
            Self::DiscreteLevels { levels } => {
                levels.iter().map(|(l, _)| *l).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Draw one transmit power. Deterministic given the rng state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::UniformLinear { rho_min, rho_max } => {
                rho_min + rng.gen::<f64>() * (rho_max - rho_min)
            }
            Self::DiscreteLevels { levels } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (level, p) in levels {
                    acc += p;
                    if u < acc {
                        return *level;
                    }
                }
                levels[levels.len() - 1].0
            }
        }
    }

    /// Law of the received power at distance `d` with exponent `alpha`.
    pub fn received_at(&self, d: f64, alpha: f64) -> ReceivedLaw {
        let g = d.powf(-alpha);
        match self {
            Self::UniformLinear { rho_min, rho_max } => {
                if rho_max == rho_min {
                    ReceivedLaw::Discrete { points: vec![(rho_min * g, 1.0)] }
                } else {
                    ReceivedLaw::Uniform { lo: rho_min * g, hi: rho_max * g }
                }
            }
            Self::DiscreteLevels { levels } => ReceivedLaw::Discrete {
                points: levels.iter().map(|(l, p)| (l * g, *p)).collect(),
            },
        }
    }
}

/// Law of a received power (transmit law pushed through path loss).
#[derive(Debug, Clone, PartialEq)]
pub enum ReceivedLaw {
    Uniform { lo: f64, hi: f64 },
    Discrete { points: Vec<(f64, f64)> },
}

impl ReceivedLaw {
    pub fn min(&self) -> f64 {
        match self {
            Self::Uniform { lo, .. } => *lo,
            Self::Discrete { points } => points.iter().map(|(l, _)| *l).fold(f64::INFINITY, f64::min),
        }
    }

    pub fn max(&self) -> f64 {
        match self {
            Self::Uniform { hi, .. } => *hi,
            Self::Discrete { points } => {
                points.iter().map(|(l, _)| *l).fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Support endpoints in dB.
    pub fn support_db(&self) -> (f64, f64) {
        (to_db(self.min()), to_db(self.max()))
    }

    /// Probability mass inside the closed linear interval `[lo, hi]`.
    pub fn mass_in(&self, lo: f64, hi: f64) -> f64 {
        match self {
            Self::Uniform { lo: a, hi: b } => {
                let width = b - a;
                if width <= 0.0 {
                    return if *a >= lo && *a <= hi { 1.0 } else { 0.0 };
                }
                ((hi.min(*b) - lo.max(*a)).max(0.0)) / width
            }
            Self::Discrete { points } => points
                .iter()
                .filter(|(l, _)| *l >= lo && *l <= hi)
                .map(|(_, p)| *p)
                .sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform { lo, hi } => lo + rng.gen::<f64>() * (hi - lo),
            Self::Discrete { points } => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (level, p) in points {
                    acc += p;
                    if u < acc {
                        return *level;
                    }
                }
                points[points.len() - 1].0
            }
        }
    }
}

/// How concurrent transmissions combine at Eve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SuperpositionMode {
    /// Sum of powers.
    Incoherent,
    /// Amplitude sum with phase `k (d_AE - d_BE)` and the data-sign product.
    Coherent,
}

/// Channel-level knobs shared by the analytic and simulated paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub superposition: SuperpositionMode,
    /// Wave number, radians per length unit. Only used in coherent mode.
    pub wave_number: f64,
    /// When true (the default), Eve observes powers exactly and detects
    /// silence as zero power.
    pub eve_noiseless: bool,
    /// Noise variance at the legitimate receivers (linear power).
    pub legit_noise_variance: f64,
    /// Silence floor in dB, used only when `eve_noiseless` is false.
    pub silence_floor_db: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            superposition: SuperpositionMode::Incoherent,
            wave_number: 0.0,
            eve_noiseless: true,
            legit_noise_variance: 1.0,
            silence_floor_db: -200.0,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.legit_noise_variance > 0.0) {
            return Err(Error::Config(format!(
                "channel.noise_variance must be > 0, got {}",
                self.legit_noise_variance
            )));
        }
        if !(self.wave_number >= 0.0) {
            return Err(Error::Config(format!(
                "channel.wave_number must be >= 0, got {}",
                self.wave_number
            )));
        }
        Ok(())
    }

    /// Phase difference `k (d_AE - d_BE)` seen by Eve in coherent mode.
    pub fn phase_diff(&self, geom: &GeometryConfig) -> f64 {
        let (d_ae, d_be) = geom.distances();
        self.wave_number * (d_ae - d_be)
    }
}

/// Received power `rho / d^alpha`.
pub fn received_power(rho: f64, d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("distance must be > 0, got {d}")));
    }
    if !(rho >= 0.0) {
        return Err(Error::Domain(format!("power must be >= 0, got {rho}")));
    }
    Ok(rho / d.powf(alpha))
}

/// Combined power of two concurrent signals at a receiver.
///
/// `sign_product` is the product of the two data signs (+/-1) and only
/// matters in coherent mode; the result is clamped at zero to absorb
/// floating error in fully destructive cases.
pub fn superpose(
    p_a: f64,
    p_b: f64,
    mode: SuperpositionMode,
    phase_diff: f64,
    sign_product: f64,
) -> f64 {
    match mode {
        SuperpositionMode::Incoherent => p_a + p_b,
        SuperpositionMode::Coherent => {
            let cross = 2.0 * sign_product * (p_a * p_b).sqrt() * phase_diff.cos();
            (p_a + p_b + cross).max(0.0)
        }
    }
}

/// Distance ratio whose path-loss difference equals `gap_db`:
/// `10^(-gap_db / (10 alpha))`.
pub fn distance_ratio_from_power_gap(gap_db: f64, alpha: f64) -> f64 {
    10f64.powf(-gap_db / (10.0 * alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn distances_symmetric_at_right_angle() {
        let g = GeometryConfig::new(2.0, 5.0, std::f64::consts::FRAC_PI_2, 2.0).unwrap();
        let (d_ae, d_be) = g.distances();
        assert!((d_ae - 26f64.sqrt()).abs() < 1e-12);
        assert!((d_be - 26f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn distances_collinear() {
        let g = GeometryConfig::new(2.0, 5.0, 0.0, 2.0).unwrap();
        let (d_ae, d_be) = g.distances();
        assert!((d_ae - 6.0).abs() < 1e-12);
        assert!((d_be - 4.0).abs() < 1e-12);
    }

    #[test]
    fn distances_law_of_cosines_case() {
        // Independently via explicit coordinates.
        let (d_ab, r_e, theta) = (1.0, 3.0, std::f64::consts::FRAC_PI_3);
        let (ex, ey) = (r_e * theta.cos(), r_e * theta.sin());
        let d_ae_ref = ((ex + d_ab / 2.0).powi(2) + ey * ey).sqrt();
        let d_be_ref = ((ex - d_ab / 2.0).powi(2) + ey * ey).sqrt();
        let g = GeometryConfig::new(d_ab, r_e, theta, 2.0).unwrap();
        let (d_ae, d_be) = g.distances();
        assert!((d_ae - d_ae_ref).abs() < 1e-12);
        assert!((d_be - d_be_ref).abs() < 1e-12);
        assert!((d_ae - 3.279).abs() < 5e-4);
        assert!((d_be - 2.784).abs() < 5e-4);
    }

    #[test]
    fn invalid_geometry_rejected() {
        assert!(GeometryConfig::new(-1.0, 5.0, 0.0, 2.0).is_err());
        assert!(GeometryConfig::new(2.0, 0.5, 0.0, 2.0).is_err());
        assert!(GeometryConfig::new(2.0, 5.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn received_power_values() {
        assert_eq!(received_power(4.0, 2.0, 2.0).unwrap(), 1.0);
        assert_eq!(received_power(7.0, 1.0, 2.0).unwrap(), 7.0);
        assert!((received_power(10.0, 3.0, 2.0).unwrap() - 10.0 / 9.0).abs() < 1e-15);
        assert!(received_power(1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn superpose_cases() {
        assert_eq!(superpose(1.0, 0.0, SuperpositionMode::Incoherent, 0.0, 1.0), 1.0);
        assert_eq!(superpose(1.0, 2.0, SuperpositionMode::Incoherent, 0.0, 1.0), 3.0);
        let destructive = superpose(1.0, 1.0, SuperpositionMode::Coherent, std::f64::consts::PI, 1.0);
        assert!(destructive.abs() < 1e-12);
    }

    #[test]
    fn superpose_incoherent_commutes() {
        for &(a, b) in &[(0.1, 2.3), (5.0, 0.0), (7.7, 7.7)] {
            assert_eq!(
                superpose(a, b, SuperpositionMode::Incoherent, 0.0, 1.0),
                superpose(b, a, SuperpositionMode::Incoherent, 0.0, 1.0)
            );
        }
    }

    #[test]
    fn sample_degenerate_support() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let d = PowerDistribution::uniform(3.0, 3.0).unwrap();
        for _ in 0..10 {
            assert_eq!(d.sample(&mut rng), 3.0);
        }
        let d = PowerDistribution::levels(vec![(3.0, 1.0)]).unwrap();
        for _ in 0..10 {
            assert_eq!(d.sample(&mut rng), 3.0);
        }
    }

    #[test]
    fn sample_uniform_moments() {
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let d = PowerDistribution::uniform(1.0, 2.0).unwrap();
        let n = 1_000_000;
        let mean: f64 = (0..n).map(|_| d.sample(&mut rng)).sum::<f64>() / n as f64;
        let band = 3.0 * (1.0 / 12f64.sqrt()) / (n as f64).sqrt();
        assert!((mean - 1.5).abs() < band, "mean {mean} outside band {band}");
    }

    #[test]
    fn distance_ratio_mapping() {
        assert!((distance_ratio_from_power_gap(0.0, 2.0) - 1.0).abs() < 1e-15);
        let r2 = distance_ratio_from_power_gap(2.0, 2.0);
        let r19 = distance_ratio_from_power_gap(19.0, 2.0);
        assert!((r2 - 0.794).abs() < 5e-4);
        assert!((r19 - 0.112).abs() < 5e-4);
    }

    #[test]
    fn bad_levels_rejected() {
        assert!(PowerDistribution::levels(vec![(1.0, 0.5), (2.0, 0.6)]).is_err());
        assert!(PowerDistribution::levels(vec![(0.0, 1.0)]).is_err());
        assert!(PowerDistribution::levels(vec![]).is_err());
    }
}
