//! The max-min game and the distance-ratio sweep.
//!
//! The legitimate pair maximizes the secrecy rate over the scheduling
//! probability and the power-law grid; the adversary minimizes it over
//! her perimeter angle and her classifier configuration. Grids are
//! evaluated exhaustively with analytic profiles; ties break toward the
//! lexicographically smallest grid indices so parallel and serial runs
//! report identical argument points.

use crate::classifier::{EveClassifier, MisclassProfile, TdmDetectionProfile, TdmWindow};
use crate::error::{Error, Result};
use crate::model::{ChannelConfig, GeometryConfig, PowerDistribution};
use crate::montecarlo::Scheme;
use crate::profile::{misclass_profile_opts, tdm_detection_profile_opts, ProfileMethod, QuadOpts};
use crate::rates::{tdm_bounds, twoway_bounds, FecMode};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// A point of the adversary's classifier grid, instantiated per
/// geometry: window bounds are fractions of the relevant received-power
/// support in dB, so the same spec adapts as Eve moves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ClassifierSpec {
    /// Threshold rule that never erases (t1 = −inf, t2 = +inf).
    NoErasure,
    /// Threshold rule with an erasure window spanning the given
    /// fractions of the support dB range.
    Window { lo_frac: f64, hi_frac: f64 },
    /// Attributes every symbol to A|B.
    Blind,
    /// Oracle adversary.
    Perfect,
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        if let ClassifierSpec::Window { lo_frac, hi_frac } = self {
            if !(0.0..=1.0).contains(lo_frac)
                || !(0.0..=1.0).contains(hi_frac)
                || lo_frac > hi_frac
            {
                return Err(Error::Config(format!(
                    "classifier window fractions [{lo_frac}, {hi_frac}] must satisfy 0 <= lo <= hi <= 1"
                )));
            }
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        match self {
            ClassifierSpec::NoErasure => "no_erasure".into(),
            ClassifierSpec::Window { lo_frac, hi_frac } => {
                format!("window[{lo_frac:.2},{hi_frac:.2}]")
            }
            ClassifierSpec::Blind => "blind".into(),
            ClassifierSpec::Perfect => "perfect".into(),
        }
    }

    /// Concrete two-way classifier for this geometry. Window fractions
    /// are relative to the union of the two solo-support dB ranges.
    pub fn instantiate_twoway(
        &self,
        geom: &GeometryConfig,
        dist: &PowerDistribution,
    ) -> Result<EveClassifier> {
        match self {
            ClassifierSpec::Blind => Ok(EveClassifier::Blind),
            ClassifierSpec::Perfect => Ok(EveClassifier::Perfect),
            ClassifierSpec::NoErasure => EveClassifier::threshold_from_geometry(
                geom,
                dist,
                f64::NEG_INFINITY,
                f64::INFINITY,
            ),
            ClassifierSpec::Window { lo_frac, hi_frac } => {
                let (d_ae, d_be) = geom.distances();
                let sa = dist.received_at(d_ae, geom.alpha).support_db();
                let sb = dist.received_at(d_be, geom.alpha).support_db();
                let lo = sa.0.min(sb.0);
                let hi = sa.1.max(sb.1);
                let t1 = lo + lo_frac * (hi - lo);
                let t2 = lo + hi_frac * (hi - lo);
                EveClassifier::threshold_from_geometry(geom, dist, t1, t2)
            }
        }
    }

    /// TDM acceptance window for this geometry. Fractions are relative
    /// to the clean (data-only) received support at Eve in dB. `Blind`
    /// never flags a symbol; `Perfect` has no window (handled by the
    /// caller as an ideal detector).
    pub fn instantiate_tdm_window(
        &self,
        geom: &GeometryConfig,
        data_law: &PowerDistribution,
    ) -> TdmWindow {
        match self {
            ClassifierSpec::NoErasure | ClassifierSpec::Blind | ClassifierSpec::Perfect => {
                TdmWindow::no_erasure()
            }
            ClassifierSpec::Window { lo_frac, hi_frac } => {
                let (lo, hi) = data_law.received_at(geom.d_ae(), geom.alpha).support_db();
                TdmWindow {
                    t1_db: lo + lo_frac * (hi - lo),
                    t2_db: lo + hi_frac * (hi - lo),
                }
            }
        }
    }
}

/// Value lists for every free parameter of the max-min search.
#[derive(Debug, Clone)]
pub struct SearchGrid {
    /// Scheduling probabilities: beta (TDM) or p_t (two-way).
    pub sched: Vec<f64>,
    /// Data power laws (f for two-way, f1 for TDM).
    pub laws: Vec<PowerDistribution>,
    /// Feedback power laws (f2); TDM only.
    pub feedback_laws: Vec<PowerDistribution>,
    /// When true, each feedback law's transmit powers are multiplied by
    /// `(d_BE / d_AE)^alpha` at evaluation time, so the law describes
    /// the jam-to-data power ratio *as received by Eve* rather than an
    /// absolute transmit level. Bob knows the geometry, so he can
    /// always realize this compensation; it makes the TDM max-min value
    /// invariant to Eve's position (only the support shapes matter),
    /// which keeps sweep curves free of grid-snapping artifacts.
    pub feedback_relative: bool,
    /// Eve's perimeter angles, radians in [0, pi].
    pub thetas: Vec<f64>,
    /// Eve's classifier configurations.
    pub classifiers: Vec<ClassifierSpec>,
    /// Analytic-profile resolution.
    pub quad: QuadOpts,
}

impl SearchGrid {
    /// Desk-scale defaults: 21 scheduling points, 5 uniform data laws
    /// with log-spaced upper endpoints, 7 geometry-relative feedback
    /// laws spanning two decades of received jam-to-data scale, 19
    /// angles, the no-erasure rule plus three erasure windows.
    pub fn default_grid() -> Self {
        let laws: Vec<PowerDistribution> = (0..5)
            .map(|k| PowerDistribution::uniform(1.0, 10f64.powf(1.0 + 0.75 * k as f64)).unwrap())
            .collect();
        let feedback_laws: Vec<PowerDistribution> = (0..7)
            .map(|k| {
                let mu = 10f64.powf(-1.0 + k as f64 / 3.0);
                PowerDistribution::uniform(mu, 10.0 * mu).unwrap()
            })
            .collect();
        Self {
            sched: linspace(0.0, 1.0, 21),
            feedback_laws,
            feedback_relative: true,
            laws,
            thetas: linspace(0.0, std::f64::consts::PI, 19),
            classifiers: vec![
                ClassifierSpec::NoErasure,
                ClassifierSpec::Window { lo_frac: 0.0, hi_frac: 1.0 },
                ClassifierSpec::Window { lo_frac: 0.0, hi_frac: 0.75 },
                ClassifierSpec::Window { lo_frac: 0.25, hi_frac: 1.0 },
            ],
            quad: QuadOpts::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [("sched", &self.sched), ("thetas", &self.thetas)] {
            if grid.is_empty() {
                return Err(Error::Config(format!("grid.{name} must be nonempty")));
            }
        }
        if self.laws.is_empty() || self.classifiers.is_empty() {
            return Err(Error::Config("law and classifier grids must be nonempty".into()));
        }
        for s in &self.sched {
            if !(0.0..=1.0).contains(s) {
                return Err(Error::Config(format!("grid.sched value {s} outside [0,1]")));
            }
        }
        for t in &self.thetas {
            if !(0.0..=std::f64::consts::PI).contains(t) {
                return Err(Error::Config(format!("grid.theta value {t} outside [0, pi]")));
            }
        }
        for law in self.laws.iter().chain(&self.feedback_laws) {
            law.validate()?;
        }
        for c in &self.classifiers {
            c.validate()?;
        }
        Ok(())
    }
}

/// Everything about the environment that the max-min game does not get
/// to choose: node geometry (minus Eve's angle), channel model, FEC.
#[derive(Debug, Clone)]
pub struct OptimizeEnv {
    pub d_ab: f64,
    pub r_e: f64,
    pub alpha: f64,
    pub channel: ChannelConfig,
    pub fec: FecMode,
}

impl Default for OptimizeEnv {
    fn default() -> Self {
        Self {
            d_ab: 1.0,
            r_e: 5.0,
            alpha: 2.0,
            channel: ChannelConfig::default(),
            fec: FecMode::default(),
        }
    }
}

impl OptimizeEnv {
    pub fn geometry_at(&self, theta: f64) -> Result<GeometryConfig> {
        GeometryConfig::new(self.d_ab, self.r_e, theta, self.alpha)
    }
}

/// One evaluated adversary grid point.
#[derive(Debug, Clone, Serialize)]
pub struct InnerEntry {
    pub theta: f64,
    pub classifier: String,
    pub r_s: f64,
}

/// Result of the inner (adversary) minimization at fixed legitimate
/// parameters.
#[derive(Debug, Clone, Serialize)]
pub struct InnerMin {
    pub r_s: f64,
    pub theta: f64,
    pub classifier: String,
    pub table: Vec<InnerEntry>,
}

fn inner_min_of(table: Vec<InnerEntry>) -> InnerMin {
    let mut best = 0usize;
    for (i, e) in table.iter().enumerate() {
        if e.r_s < table[best].r_s {
            best = i;
        }
    }
    InnerMin {
        r_s: table[best].r_s,
        theta: table[best].theta,
        classifier: table[best].classifier.clone(),
        table,
    }
}

/// Outcome of a full max-min search.
#[derive(Debug, Clone, Serialize)]
pub struct MaxMinResult {
    pub scheme: Scheme,
    /// Secrecy rate in bits per interval. Includes the 0.5 time-division
    /// factor for TDM.
    pub r_sec: f64,
    pub best_sched: f64,
    pub best_law: PowerDistribution,
    pub best_feedback_law: Option<PowerDistribution>,
    pub worst_theta: f64,
    pub worst_classifier: String,
    /// Adversary grid evaluated at the winning legitimate point (same
    /// scaling as `r_sec`).
    pub inner_table: Vec<InnerEntry>,
}

struct TwoWayCell {
    theta: f64,
    desc: String,
    geom: GeometryConfig,
    profile: MisclassProfile,
}

fn twoway_cells(env: &OptimizeEnv, law: &PowerDistribution, grid: &SearchGrid) -> Result<Vec<TwoWayCell>> {
    let combos: Vec<(f64, ClassifierSpec)> = grid
        .thetas
        .iter()
        .flat_map(|&t| grid.classifiers.iter().map(move |&c| (t, c)))
        .collect();
    combos
        .into_par_iter()
        .map(|(theta, spec)| {
            let geom = env.geometry_at(theta)?;
            let cls = spec.instantiate_twoway(&geom, law)?;
            let profile = misclass_profile_opts(
                &geom,
                law,
                &cls,
                &env.channel,
                ProfileMethod::Analytic,
                &grid.quad,
            )?;
            Ok(TwoWayCell { theta, desc: spec.describe(), geom, profile })
        })
        .collect()
}

/// Exhaustive adversary minimization for the two-way scheme at fixed
/// legitimate parameters.
pub fn worst_case_eve_twoway(
    env: &OptimizeEnv,
    p_t: f64,
    law: &PowerDistribution,
    grid: &SearchGrid,
) -> Result<InnerMin> {
    grid.validate()?;
    let cells = twoway_cells(env, law, grid)?;
    inner_min_twoway(p_t, law, env, &cells)
}

fn inner_min_twoway(
    p_t: f64,
    law: &PowerDistribution,
    env: &OptimizeEnv,
    cells: &[TwoWayCell],
) -> Result<InnerMin> {
    let mut table = Vec::with_capacity(cells.len());
    for cell in cells {
        let b = twoway_bounds(p_t, &cell.profile, &cell.geom, law.rho_min(), env.fec)?;
        table.push(InnerEntry { theta: cell.theta, classifier: cell.desc.clone(), r_s: b.r_s });
    }
    Ok(inner_min_of(table))
}

struct TdmCell {
    theta: f64,
    desc: String,
    geom: GeometryConfig,
    profile: TdmDetectionProfile,
}

fn tdm_cells(
    env: &OptimizeEnv,
    f1: &PowerDistribution,
    f2: &PowerDistribution,
    grid: &SearchGrid,
) -> Result<Vec<TdmCell>> {
    let combos: Vec<(f64, ClassifierSpec)> = grid
        .thetas
        .iter()
        .flat_map(|&t| grid.classifiers.iter().map(move |&c| (t, c)))
        .collect();
    combos
        .into_par_iter()
        .map(|(theta, spec)| {
            let geom = env.geometry_at(theta)?;
            let f2_eff = if grid.feedback_relative {
                let (d_ae, d_be) = geom.distances();
                f2.scaled((d_be / d_ae).powf(geom.alpha))
            } else {
                f2.clone()
            };
            let profile = if matches!(spec, ClassifierSpec::Perfect) {
                // Ideal jamming detector: never misses, never false-alarms.
                TdmDetectionProfile { p_m: 0.0, p_f: 0.0, p_e_given_m: 0.0 }
            } else {
                let window = spec.instantiate_tdm_window(&geom, f1);
                tdm_detection_profile_opts(
                    &geom,
                    f1,
                    &f2_eff,
                    &window,
                    &env.channel,
                    ProfileMethod::Analytic,
                    &grid.quad,
                )?
            };
            Ok(TdmCell { theta, desc: spec.describe(), geom, profile })
        })
        .collect()
}

/// Exhaustive adversary minimization for the TDM scheme at fixed
/// legitimate parameters. Values include the 0.5 time-division factor.
pub fn worst_case_eve_tdm(
    env: &OptimizeEnv,
    beta: f64,
    f1: &PowerDistribution,
    f2: &PowerDistribution,
    grid: &SearchGrid,
) -> Result<InnerMin> {
    grid.validate()?;
    let cells = tdm_cells(env, f1, f2, grid)?;
    inner_min_tdm(beta, f1, env, &cells)
}

fn inner_min_tdm(
    beta: f64,
    f1: &PowerDistribution,
    env: &OptimizeEnv,
    cells: &[TdmCell],
) -> Result<InnerMin> {
    let mut table = Vec::with_capacity(cells.len());
    for cell in cells {
        let b = tdm_bounds(beta, &cell.profile, &cell.geom, f1.rho_min(), env.fec)?;
        table.push(InnerEntry {
            theta: cell.theta,
            classifier: cell.desc.clone(),
            r_s: 0.5 * b.r_s,
        });
    }
    Ok(inner_min_of(table))
}

/// Max-min search for the two-way scheme: `max over (p_t, law)` of the
/// adversary's minimum.
pub fn optimize_twoway(env: &OptimizeEnv, grid: &SearchGrid) -> Result<MaxMinResult> {
    grid.validate()?;
    env.geometry_at(grid.thetas[0])?;

    // Profiles do not depend on the scheduling probability: compute the
    // adversary cells once per law and reuse across the sched grid.
    let per_law: Vec<Vec<TwoWayCell>> = grid
        .laws
        .iter()
        .map(|law| twoway_cells(env, law, grid))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize, usize, InnerMin)> = None;
    for (li, law) in grid.laws.iter().enumerate() {
        for (si, &p_t) in grid.sched.iter().enumerate() {
            let inner = inner_min_twoway(p_t, law, env, &per_law[li])?;
            let better = match &best {
                None => true,
                Some((r, ..)) => inner.r_s > *r,
            };
            if better {
                best = Some((inner.r_s, si, li, inner));
            }
        }
    }
    let (r_sec, si, li, inner) = best.expect("nonempty grids");
    Ok(MaxMinResult {
        scheme: Scheme::TwoWay,
        r_sec,
        best_sched: grid.sched[si],
        best_law: grid.laws[li].clone(),
        best_feedback_law: None,
        worst_theta: inner.theta,
        worst_classifier: inner.classifier,
        inner_table: inner.table,
    })
}

/// Max-min search for the TDM scheme: `0.5 · max over (beta, f1, f2)` of
/// the adversary's minimum.
pub fn optimize_tdm(env: &OptimizeEnv, grid: &SearchGrid) -> Result<MaxMinResult> {
    grid.validate()?;
    if grid.feedback_laws.is_empty() {
        return Err(Error::Config("TDM optimization needs a nonempty feedback-law grid".into()));
    }
    env.geometry_at(grid.thetas[0])?;

    let law_pairs: Vec<(usize, usize)> = (0..grid.laws.len())
        .flat_map(|i| (0..grid.feedback_laws.len()).map(move |j| (i, j)))
        .collect();
    let per_pair: Vec<Vec<TdmCell>> = law_pairs
        .iter()
        .map(|&(i, j)| tdm_cells(env, &grid.laws[i], &grid.feedback_laws[j], grid))
        .collect::<Result<_>>()?;

    let mut best: Option<(f64, usize, usize, InnerMin)> = None;
    for (pi, &(li, _)) in law_pairs.iter().enumerate() {
        for (si, &beta) in grid.sched.iter().enumerate() {
            let inner = inner_min_tdm(beta, &grid.laws[li], env, &per_pair[pi])?;
            let better = match &best {
                None => true,
                Some((r, ..)) => inner.r_s > *r,
            };
            if better {
                best = Some((inner.r_s, si, pi, inner));
            }
        }
    }
    let (r_sec, si, pi, inner) = best.expect("nonempty grids");
    let (li, fi) = law_pairs[pi];
    Ok(MaxMinResult {
        scheme: Scheme::Tdm,
        r_sec,
        best_sched: grid.sched[si],
        best_law: grid.laws[li].clone(),
        best_feedback_law: Some(grid.feedback_laws[fi].clone()),
        worst_theta: inner.theta,
        worst_classifier: inner.classifier,
        inner_table: inner.table,
    })
}

/// Where the data transmitter (Alice) sits relative to Eve in a sweep
/// geometry: at the nearer distance (`d_min`) or the farther one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Placement {
    TxAtMin,
    TxAtMax,
}

/// Build a geometry realizing `d_min/d_max = ratio` with `d_ab` fixed.
///
/// Solves for Eve's angle on the radius-`r_e` circle. When no angle on
/// that circle reaches the requested ratio, Eve is placed on the
/// extended Alice–Bob line instead (same ratio, larger radius); the
/// returned flag is true in that case. The rate bounds depend on the
/// geometry only through the distance ratio under relative (support-
/// fraction) classifier windows, so the two constructions are
/// interchangeable for sweep purposes.
pub fn ratio_geometry(
    ratio: f64,
    d_ab: f64,
    r_e: f64,
    alpha: f64,
    placement: Placement,
) -> Result<(GeometryConfig, bool)> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::Config(format!("ratio = {ratio} outside (0, 1]")));
    }
    let s = r_e * r_e + d_ab * d_ab / 4.0;
    // |c| making (s−|c|)/(s+|c|) = ratio²; c = r_e·d_ab·cosθ.
    let c_mag = s * (1.0 - ratio * ratio) / (1.0 + ratio * ratio);
    let cos_mag = c_mag / (r_e * d_ab);
    let sign = match placement {
        // d_ae² = s + c: the transmitter is nearer when c < 0.
        Placement::TxAtMin => -1.0,
        Placement::TxAtMax => 1.0,
    };
    if cos_mag <= 1.0 {
        let theta = (sign * cos_mag).acos();
        return Ok((GeometryConfig::new(d_ab, r_e, theta, alpha)?, false));
    }
    // Collinear fallback: Eve beyond one endpoint of the Alice-Bob
    // segment, at the radius that realizes the ratio exactly.
    if ratio >= 1.0 {
        return Err(Error::Config("ratio 1 requires theta = pi/2, not collinear".into()));
    }
    let r = (d_ab / 2.0) * (1.0 + ratio) / (1.0 - ratio);
    let theta = match placement {
        Placement::TxAtMin => std::f64::consts::PI,
        Placement::TxAtMax => 0.0,
    };
    Ok((GeometryConfig::new(d_ab, r, theta, alpha)?, true))
}

/// One row of a distance-ratio sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub ratio: f64,
    pub scheme: Scheme,
    pub r_sec: f64,
    /// Winning scheduling probability (beta or p_t).
    pub argmax_param: f64,
    pub argmin_theta: f64,
    pub classifier_desc: String,
    /// True when the geometry used the collinear fallback radius.
    pub fallback_geometry: bool,
    pub error: Option<String>,
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

/// Run the requested schemes' optimizers across a list of distance
/// ratios. Unrealizable or failing points are reported in-row; the
/// sweep always returns one row per (ratio, scheme).
pub fn sweep_ratio(
    schemes: &[Scheme],
    ratios: &[f64],
    env: &OptimizeEnv,
    grid: &SearchGrid,
    placement: Placement,
) -> Vec<SweepPoint> {
    let mut out = Vec::with_capacity(ratios.len() * schemes.len());
    for &ratio in ratios {
        for &scheme in schemes {
            out.push(sweep_point(scheme, ratio, env, grid, placement));
        }
    }
    out
}

fn sweep_point(
    scheme: Scheme,
    ratio: f64,
    env: &OptimizeEnv,
    grid: &SearchGrid,
    placement: Placement,
) -> SweepPoint {
    let mut point = SweepPoint {
        ratio,
        scheme,
        r_sec: f64::NAN,
        argmax_param: f64::NAN,
        argmin_theta: f64::NAN,
        classifier_desc: String::new(),
        fallback_geometry: false,
        error: None,
    };
    let (geom, fallback) = match ratio_geometry(ratio, env.d_ab, env.r_e, env.alpha, placement) {
        Ok(g) => g,
        Err(e) => {
            point.error = Some(e.to_string());
            return point;
        }
    };
    point.fallback_geometry = fallback;
    let env_at = OptimizeEnv { r_e: geom.r_e, ..env.clone() };
    let grid_at = SearchGrid { thetas: vec![geom.theta], ..grid.clone() };
    let result = match scheme {
        Scheme::Tdm => optimize_tdm(&env_at, &grid_at),
        Scheme::TwoWay => optimize_twoway(&env_at, &grid_at),
    };
    match result {
        Ok(r) => {
            point.r_sec = r.r_sec;
            point.argmax_param = r.best_sched;
            point.argmin_theta = r.worst_theta;
            point.classifier_desc = r.worst_classifier;
        }
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_grid() -> SearchGrid {
        SearchGrid {
            quad: QuadOpts { solo_points: 10_001, sum_points: 5_001, ..QuadOpts::default() },
            ..SearchGrid::default_grid()
        }
    }

    #[test]
    fn singleton_grids_return_that_point() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let grid = SearchGrid {
            sched: vec![0.5],
            laws: vec![law.clone()],
            feedback_laws: vec![law.clone()],
            feedback_relative: false,
            thetas: vec![std::f64::consts::FRAC_PI_2],
            classifiers: vec![ClassifierSpec::Blind],
            quad: QuadOpts::default(),
        };
        let inner = worst_case_eve_twoway(&env, 0.5, &law, &grid).unwrap();
        assert_eq!(inner.table.len(), 1);
        assert_eq!(inner.theta, std::f64::consts::FRAC_PI_2);
        let opt = optimize_twoway(&env, &grid).unwrap();
        assert!((opt.r_sec - inner.r_s).abs() < 1e-15);
        assert!((opt.r_sec - 0.17923).abs() < 1e-4);
    }

    #[test]
    fn blind_three_point_grid_prefers_half() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let grid = SearchGrid {
            sched: vec![0.3, 0.5, 0.7],
            laws: vec![law.clone()],
            feedback_laws: vec![law],
            feedback_relative: false,
            thetas: vec![std::f64::consts::FRAC_PI_2],
            classifiers: vec![ClassifierSpec::Blind],
            quad: QuadOpts::default(),
        };
        let opt = optimize_twoway(&env, &grid).unwrap();
        assert_eq!(opt.best_sched, 0.5);
        assert!((opt.r_sec - 0.17923).abs() < 1e-5);
    }

    #[test]
    fn mirror_symmetry_of_inner_table() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let grid = SearchGrid {
            sched: vec![0.5],
            laws: vec![law.clone()],
            feedback_laws: vec![law.clone()],
            feedback_relative: false,
            thetas: vec![
                std::f64::consts::PI / 3.0,
                std::f64::consts::FRAC_PI_2,
                2.0 * std::f64::consts::PI / 3.0,
            ],
            classifiers: vec![ClassifierSpec::NoErasure],
            quad: QuadOpts::default(),
        };
        let inner = worst_case_eve_twoway(&env, 0.5, &law, &grid).unwrap();
        assert!((inner.table[0].r_s - inner.table[2].r_s).abs() < 1e-9);
    }

    #[test]
    fn enlarging_adversary_grid_never_helps_legit() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let base = SearchGrid {
            sched: vec![0.5],
            laws: vec![law.clone()],
            feedback_laws: vec![law.clone()],
            feedback_relative: false,
            thetas: vec![std::f64::consts::FRAC_PI_2],
            classifiers: vec![ClassifierSpec::Window { lo_frac: 0.0, hi_frac: 1.0 }],
            quad: QuadOpts::default(),
        };
        let small = worst_case_eve_twoway(&env, 0.5, &law, &base).unwrap();
        let mut bigger = base.clone();
        bigger.classifiers.push(ClassifierSpec::NoErasure);
        let big = worst_case_eve_twoway(&env, 0.5, &law, &bigger).unwrap();
        assert!(big.r_s <= small.r_s + 1e-12);
        // Min over both ≤ each single-classifier evaluation.
        let mut alt = base.clone();
        alt.classifiers = vec![ClassifierSpec::NoErasure];
        let other = worst_case_eve_twoway(&env, 0.5, &law, &alt).unwrap();
        assert!(big.r_s <= other.r_s + 1e-12);
    }

    #[test]
    fn perfect_adversary_forces_zero() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let grid = SearchGrid {
            sched: linspace(0.0, 1.0, 11),
            laws: vec![law.clone()],
            feedback_laws: vec![law],
            feedback_relative: false,
            thetas: vec![std::f64::consts::FRAC_PI_2],
            classifiers: vec![ClassifierSpec::Perfect],
            quad: QuadOpts::default(),
        };
        assert_eq!(optimize_twoway(&env, &grid).unwrap().r_sec, 0.0);
        assert_eq!(optimize_tdm(&env, &grid).unwrap().r_sec, 0.0);
    }

    #[test]
    fn endpoint_scheds_give_zero() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        for s in [0.0, 1.0] {
            let grid = SearchGrid {
                sched: vec![s],
                laws: vec![law.clone()],
                feedback_laws: vec![law.clone()],
            feedback_relative: false,
                thetas: vec![std::f64::consts::FRAC_PI_2],
                classifiers: vec![ClassifierSpec::NoErasure],
                quad: QuadOpts { solo_points: 10_001, sum_points: 5_001, ..QuadOpts::default() },
            };
            assert_eq!(optimize_twoway(&env, &grid).unwrap().r_sec, 0.0);
            assert_eq!(optimize_tdm(&env, &grid).unwrap().r_sec, 0.0);
        }
    }

    #[test]
    fn ratio_geometry_realizes_requested_ratio() {
        for &ratio in &[0.11, 0.3, 0.79, 0.9, 1.0] {
            for placement in [Placement::TxAtMin, Placement::TxAtMax] {
                let (g, _fallback) = ratio_geometry(ratio, 1.0, 5.0, 2.0, placement).unwrap();
                assert!((g.distance_ratio() - ratio).abs() < 1e-9, "ratio {ratio}");
                let (d_ae, d_be) = g.distances();
                match placement {
                    Placement::TxAtMin => assert!(d_ae <= d_be + 1e-12),
                    Placement::TxAtMax => assert!(d_ae >= d_be - 1e-12),
                }
            }
        }
        // Ratio 1 must land on the perpendicular bisector.
        let (g, fallback) = ratio_geometry(1.0, 1.0, 5.0, 2.0, Placement::TxAtMax).unwrap();
        assert!(!fallback);
        assert!((g.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        // Small ratios are off-circle for the default radius.
        let (_, fallback) = ratio_geometry(0.3, 1.0, 5.0, 2.0, Placement::TxAtMax).unwrap();
        assert!(fallback);
        assert!(ratio_geometry(0.0, 1.0, 5.0, 2.0, Placement::TxAtMax).is_err());
    }

    #[test]
    fn sweep_reports_rows_and_continues_on_error() {
        let env = OptimizeEnv::default();
        let law = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let grid = SearchGrid {
            sched: vec![0.5],
            laws: vec![law.clone()],
            feedback_laws: vec![law],
            feedback_relative: false,
            thetas: vec![0.0],
            classifiers: vec![ClassifierSpec::Blind],
            quad: QuadOpts { solo_points: 10_001, sum_points: 5_001, ..QuadOpts::default() },
        };
        let rows = sweep_ratio(
            &[Scheme::TwoWay],
            &[0.5, 1.0],
            &env,
            &grid,
            Placement::TxAtMax,
        );
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.error.is_none(), "{:?}", row.error);
            assert!(row.r_sec.is_finite());
        }
    }

    #[test]
    fn optimize_is_deterministic() {
        let env = OptimizeEnv::default();
        let mut grid = fast_grid();
        grid.sched = vec![0.3, 0.5];
        grid.laws.truncate(2);
        grid.feedback_laws.truncate(1);
        grid.thetas = vec![0.0, std::f64::consts::FRAC_PI_2];
        let a = optimize_twoway(&env, &grid).unwrap();
        let b = optimize_twoway(&env, &grid).unwrap();
        assert_eq!(a.r_sec, b.r_sec);
        assert_eq!(a.best_sched, b.best_sched);
        assert_eq!(a.worst_theta, b.worst_theta);
        assert_eq!(a.worst_classifier, b.worst_classifier);
    }
}
