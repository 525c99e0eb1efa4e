//! Symbol-level frame simulator: the empirical oracle for the analytic
//! profiles and rate bounds.
//!
//! Determinism contract: one master seed; independent ChaCha substreams
//! per (shard, purpose) so that changing the classifier never perturbs
//! the generated traffic, and so that tallies are identical for any
//! worker count (shards are fixed-size and merged by addition).

use crate::classifier::{
    capture_decode, ClassOutcome, EveClassifier, EventRow, MisclassProfile, TdmDetectionProfile,
    TdmWindow, TrueEvent,
};
use crate::error::{Error, Result};
use crate::model::{superpose, to_db, ChannelConfig, GeometryConfig, PowerDistribution};
use crate::rates::{self, FecMode, RateBreakdownTdm, RateBreakdownTwoWay};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const SHARD_SIZE: u64 = 1 << 16;

/// Which protocol a run simulates or optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Tdm,
    TwoWay,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Tdm => "tdm",
            Scheme::TwoWay => "twoway",
        }
    }
}

/// Scheme-specific part of a simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub enum SchemeConfig {
    Tdm { beta: f64, feedback_law: PowerDistribution, window: TdmWindow },
    TwoWay { p_t: f64, classifier: EveClassifier },
}

/// One full simulation setup.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub frames: u64,
    pub seed: u64,
    pub geometry: GeometryConfig,
    pub channel: ChannelConfig,
    pub data_law: PowerDistribution,
    pub fec: FecMode,
    pub scheme: SchemeConfig,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames < 1 {
            return Err(Error::Config("frames must be >= 1".into()));
        }
        self.geometry.validate()?;
        self.channel.validate()?;
        self.data_law.validate()?;
        match &self.scheme {
            SchemeConfig::Tdm { beta, feedback_law, window } => {
                if !(0.0..=1.0).contains(beta) {
                    return Err(Error::Config(format!("beta = {beta} outside [0,1]")));
                }
                feedback_law.validate()?;
                if window.t1_db > window.t2_db {
                    return Err(Error::Config("tdm window requires t1 <= t2".into()));
                }
            }
            SchemeConfig::TwoWay { p_t, .. } => {
                if !(0.0..=1.0).contains(p_t) {
                    return Err(Error::Config(format!("p_t = {p_t} outside [0,1]")));
                }
            }
        }
        Ok(())
    }
}

// Substream purposes. Scheduling, power and symbol content are separated
// from classifier tie-breaks so that paired runs with different
// classifiers see identical traffic.
const STREAM_SCHED: u64 = 0;
const STREAM_POWER: u64 = 1;
const STREAM_SYMBOLS: u64 = 2;
const STREAM_TIES: u64 = 3;
const STREAM_LEGIT_NOISE: u64 = 4;
const STREAM_EVE_NOISE: u64 = 5;

fn stream_rng(seed: u64, shard: u64, stream: u64) -> ChaCha12Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&shard.to_le_bytes());
    key[16..24].copy_from_slice(&stream.to_le_bytes());
    ChaCha12Rng::from_seed(key)
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // Box-Muller; one sample per call keeps the stream accounting simple.
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Per-event classification tallies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventTally {
    pub occurrences: u64,
    pub to_a: u64,
    pub to_b: u64,
    pub to_other: u64,
}

impl EventTally {
    fn add(&mut self, other: &EventTally) {
        self.occurrences += other.occurrences;
        self.to_a += other.to_a;
        self.to_b += other.to_b;
        self.to_other += other.to_other;
    }

    fn row(&self) -> EventRow {
        if self.occurrences == 0 {
            return EventRow { to_a: 0.0, to_b: 0.0, to_other: 0.0 };
        }
        let n = self.occurrences as f64;
        EventRow {
            to_a: self.to_a as f64 / n,
            to_b: self.to_b as f64 / n,
            to_other: self.to_other as f64 / n,
        }
    }
}

/// Empirical counterpart of [`MisclassProfile`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTwoWay {
    pub frames: u64,
    pub seed: u64,
    pub silence_count: u64,
    pub concurrent: EventTally,
    pub alice_solo: EventTally,
    pub bob_solo: EventTally,
    /// Concurrent symbols attributed to Alice / decode errors among them.
    pub dec_to_a: u64,
    pub err_to_a: u64,
    pub dec_to_b: u64,
    pub err_to_b: u64,
    /// Legitimate-receiver decode attempts and errors (FEC off only).
    pub legit_attempts: u64,
    pub legit_errors: u64,
    /// Estimates whose conditioning count was zero.
    pub flags: Vec<String>,
}

impl EmpiricalTwoWay {
    fn merge(&mut self, o: &EmpiricalTwoWay) {
        self.silence_count += o.silence_count;
        self.concurrent.add(&o.concurrent);
        self.alice_solo.add(&o.alice_solo);
        self.bob_solo.add(&o.bob_solo);
        self.dec_to_a += o.dec_to_a;
        self.err_to_a += o.err_to_a;
        self.dec_to_b += o.dec_to_b;
        self.err_to_b += o.err_to_b;
        self.legit_attempts += o.legit_attempts;
        self.legit_errors += o.legit_errors;
    }

    fn finalize(&mut self) {
        for (name, n) in [
            ("concurrent", self.concurrent.occurrences),
            ("alice_solo", self.alice_solo.occurrences),
            ("bob_solo", self.bob_solo.occurrences),
            ("err_to_a", self.dec_to_a),
            ("err_to_b", self.dec_to_b),
        ] {
            if n == 0 {
                self.flags.push(format!("{name}: zero conditioning count"));
            }
        }
    }

    /// Frequency estimates as a profile. Flagged (zero-count) rows come
    /// out as zeros; their weights in the rate formulas are zero too.
    pub fn to_profile(&self) -> MisclassProfile {
        MisclassProfile {
            concurrent: self.concurrent.row(),
            alice_solo: self.alice_solo.row(),
            bob_solo: self.bob_solo.row(),
            err_concurrent_to_a: if self.dec_to_a > 0 {
                self.err_to_a as f64 / self.dec_to_a as f64
            } else {
                0.0
            },
            err_concurrent_to_b: if self.dec_to_b > 0 {
                self.err_to_b as f64 / self.dec_to_b as f64
            } else {
                0.0
            },
        }
    }
}

/// Empirical counterpart of [`TdmDetectionProfile`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalTdm {
    pub frames: u64,
    pub seed: u64,
    pub clean_count: u64,
    pub jam_count: u64,
    pub false_alarms: u64,
    pub misses: u64,
    pub miss_errors: u64,
    pub legit_attempts: u64,
    pub legit_errors: u64,
    pub flags: Vec<String>,
}

impl EmpiricalTdm {
    fn merge(&mut self, o: &EmpiricalTdm) {
        self.clean_count += o.clean_count;
        self.jam_count += o.jam_count;
        self.false_alarms += o.false_alarms;
        self.misses += o.misses;
        self.miss_errors += o.miss_errors;
        self.legit_attempts += o.legit_attempts;
        self.legit_errors += o.legit_errors;
    }

    fn finalize(&mut self) {
        if self.jam_count == 0 {
            self.flags.push("p_m: zero conditioning count".into());
        }
        if self.clean_count == 0 {
            self.flags.push("p_f: zero conditioning count".into());
        }
        if self.misses == 0 {
            self.flags.push("p_e_given_m: zero conditioning count".into());
        }
    }

    pub fn to_profile(&self) -> TdmDetectionProfile {
        TdmDetectionProfile {
            p_m: if self.jam_count > 0 { self.misses as f64 / self.jam_count as f64 } else { 0.0 },
            p_f: if self.clean_count > 0 {
                self.false_alarms as f64 / self.clean_count as f64
            } else {
                0.0
            },
            // Capture decoding is never worse than a coin flip, so the
            // estimate is projected into [0, 1/2]: sampling noise can
            // push the raw ratio past the boundary when the true value
            // sits at it.
            p_e_given_m: if self.misses > 0 {
                (self.miss_errors as f64 / self.misses as f64).min(0.5)
            } else {
                0.0
            },
        }
    }
}

/// One interval of an optional simulation trace.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub index: u64,
    pub a_active: bool,
    pub b_active: bool,
    pub p_a_rx_db: f64,
    pub p_b_rx_db: f64,
    pub obs_db: f64,
    pub outcome: &'static str,
    pub decode_correct: Option<bool>,
}

fn outcome_name(out: ClassOutcome) -> &'static str {
    match out {
        ClassOutcome::Alice => "A",
        ClassOutcome::Bob => "B",
        ClassOutcome::AliceOrBob => "A|B",
        ClassOutcome::Erase => "erase",
        ClassOutcome::Silence => "silence",
    }
}

struct TwoWayCtx {
    p_t: f64,
    gain_ae: f64,
    gain_be: f64,
    phase: f64,
    legit_noise_sd: f64,
    simulate_legit: bool,
    snr_gain_ab: f64,
}

fn shard_twoway(
    cfg: &SimConfig,
    ctx: &TwoWayCtx,
    cls: &EveClassifier,
    shard: u64,
    mut trace: Option<&mut dyn FnMut(TraceRow)>,
) -> EmpiricalTwoWay {
    let mut sched = stream_rng(cfg.seed, shard, STREAM_SCHED);
    let mut power = stream_rng(cfg.seed, shard, STREAM_POWER);
    let mut symbols = stream_rng(cfg.seed, shard, STREAM_SYMBOLS);
    let mut ties = stream_rng(cfg.seed, shard, STREAM_TIES);
    let mut legit_noise = stream_rng(cfg.seed, shard, STREAM_LEGIT_NOISE);
    let mut eve_noise = stream_rng(cfg.seed, shard, STREAM_EVE_NOISE);

    let start = shard * SHARD_SIZE;
    let end = (start + SHARD_SIZE).min(cfg.frames);
    let mut out = EmpiricalTwoWay { seed: cfg.seed, ..Default::default() };

    for i in start..end {
        let a_active = sched.gen::<f64>() < ctx.p_t;
        let b_active = sched.gen::<f64>() < ctx.p_t;
        let rho_a = cfg.data_law.sample(&mut power);
        let rho_b = cfg.data_law.sample(&mut power);
        let s_a: i8 = if symbols.gen::<bool>() { 1 } else { -1 };
        let s_b: i8 = if symbols.gen::<bool>() { 1 } else { -1 };

        let p_a_rx = if a_active { rho_a * ctx.gain_ae } else { 0.0 };
        let p_b_rx = if b_active { rho_b * ctx.gain_be } else { 0.0 };
        let mut obs = superpose(
            p_a_rx,
            p_b_rx,
            cfg.channel.superposition,
            ctx.phase,
            (s_a * s_b) as f64,
        );
        if !cfg.channel.eve_noiseless {
            let n = normal(&mut eve_noise);
            obs += cfg.channel.legit_noise_variance * n * n;
        }

        let event = match (a_active, b_active) {
            (false, false) => TrueEvent::Silence,
            (true, false) => TrueEvent::AliceSolo,
            (false, true) => TrueEvent::BobSolo,
            (true, true) => TrueEvent::Concurrent,
        };

        let silent = if cfg.channel.eve_noiseless {
            obs == 0.0
        } else {
            obs <= 0.0 || to_db(obs) < cfg.channel.silence_floor_db
        };
        let raw = if silent {
            ClassOutcome::Silence
        } else {
            cls.classify(event, to_db(obs))
        };
        let resolved = match raw {
            ClassOutcome::AliceOrBob => {
                if ties.gen::<bool>() {
                    ClassOutcome::Alice
                } else {
                    ClassOutcome::Bob
                }
            }
            o => o,
        };

        let tally = match event {
            TrueEvent::Silence => {
                out.silence_count += 1;
                None
            }
            TrueEvent::AliceSolo => Some(&mut out.alice_solo),
            TrueEvent::BobSolo => Some(&mut out.bob_solo),
            TrueEvent::Concurrent => Some(&mut out.concurrent),
        };
        if let Some(t) = tally {
            t.occurrences += 1;
            match resolved {
                ClassOutcome::Alice => t.to_a += 1,
                ClassOutcome::Bob => t.to_b += 1,
                _ => t.to_other += 1,
            }
        }

        let mut decode_correct = None;
        if event == TrueEvent::Concurrent
            && matches!(resolved, ClassOutcome::Alice | ClassOutcome::Bob)
        {
            let dec = capture_decode(s_a, s_b, p_a_rx, p_b_rx, &mut ties);
            match resolved {
                ClassOutcome::Alice => {
                    out.dec_to_a += 1;
                    if dec != s_a {
                        out.err_to_a += 1;
                    }
                    decode_correct = Some(dec == s_a);
                }
                ClassOutcome::Bob => {
                    out.dec_to_b += 1;
                    if dec != s_b {
                        out.err_to_b += 1;
                    }
                    decode_correct = Some(dec == s_b);
                }
                _ => unreachable!(),
            }
        }

        // Legitimate decoding happens only when exactly one node is active.
        if matches!(event, TrueEvent::AliceSolo | TrueEvent::BobSolo) {
            out.legit_attempts += 1;
            if ctx.simulate_legit {
                let rho = if a_active { rho_a } else { rho_b };
                let s = if a_active { s_a } else { s_b };
                let amp = (rho * ctx.snr_gain_ab).sqrt() * s as f64
                    + ctx.legit_noise_sd * normal(&mut legit_noise);
                if (amp >= 0.0) != (s > 0) {
                    out.legit_errors += 1;
                }
            }
        }

        if let Some(t) = trace.as_deref_mut() {
            t(TraceRow {
                index: i,
                a_active,
                b_active,
                p_a_rx_db: to_db(p_a_rx),
                p_b_rx_db: to_db(p_b_rx),
                obs_db: to_db(obs),
                outcome: outcome_name(resolved),
                decode_correct,
            });
        }
    }
    out
}

fn twoway_ctx(cfg: &SimConfig, p_t: f64) -> TwoWayCtx {
    let (d_ae, d_be) = cfg.geometry.distances();
    let simulate_legit = match cfg.fec {
        FecMode::Off => true,
        FecMode::Ideal { snr_threshold } => cfg.data_law.rho_min() < snr_threshold,
    };
    TwoWayCtx {
        p_t,
        gain_ae: d_ae.powf(-cfg.geometry.alpha),
        gain_be: d_be.powf(-cfg.geometry.alpha),
        phase: cfg.channel.phase_diff(&cfg.geometry),
        legit_noise_sd: cfg.channel.legit_noise_variance.sqrt(),
        simulate_legit,
        snr_gain_ab: cfg.geometry.d_ab.powf(-cfg.geometry.alpha),
    }
}

/// Run the two-way scheme for `cfg.frames` intervals and evaluate the
/// two-way secrecy bound on the resulting empirical profile.
pub fn simulate_twoway(cfg: &SimConfig) -> Result<(EmpiricalTwoWay, RateBreakdownTwoWay)> {
    simulate_twoway_inner(cfg, None)
}

/// Same as [`simulate_twoway`] but emits one trace row per interval
/// (rows arrive in interval order).
pub fn simulate_twoway_traced(
    cfg: &SimConfig,
    on_row: &mut dyn FnMut(TraceRow),
) -> Result<(EmpiricalTwoWay, RateBreakdownTwoWay)> {
    simulate_twoway_inner(cfg, Some(on_row))
}

fn simulate_twoway_inner(
    cfg: &SimConfig,
    trace: Option<&mut dyn FnMut(TraceRow)>,
) -> Result<(EmpiricalTwoWay, RateBreakdownTwoWay)> {
    cfg.validate()?;
    let SchemeConfig::TwoWay { p_t, classifier } = &cfg.scheme else {
        return Err(Error::Config("simulate_twoway requires a two-way scheme config".into()));
    };
    let ctx = twoway_ctx(cfg, *p_t);
    let shards = cfg.frames.div_ceil(SHARD_SIZE);

    let mut total = EmpiricalTwoWay { frames: cfg.frames, seed: cfg.seed, ..Default::default() };
    if let Some(t) = trace {
        for shard in 0..shards {
            let part = shard_twoway(cfg, &ctx, classifier, shard, Some(t));
            total.merge(&part);
        }
    } else {
        let parts: Vec<EmpiricalTwoWay> = (0..shards)
            .into_par_iter()
            .map(|shard| shard_twoway(cfg, &ctx, classifier, shard, None))
            .collect();
        for part in &parts {
            total.merge(part);
        }
    }
    total.finalize();

    let breakdown = rates::twoway_bounds(
        *p_t,
        &total.to_profile(),
        &cfg.geometry,
        cfg.data_law.rho_min(),
        cfg.fec,
    )?;
    Ok((total, breakdown))
}

struct TdmCtx {
    beta: f64,
    gain_ae: f64,
    gain_be: f64,
    phase: f64,
    w_lo: f64,
    w_hi: f64,
    legit_noise_sd: f64,
    simulate_legit: bool,
    snr_gain_ab: f64,
}

fn shard_tdm(
    cfg: &SimConfig,
    ctx: &TdmCtx,
    feedback_law: &PowerDistribution,
    shard: u64,
    mut trace: Option<&mut dyn FnMut(TraceRow)>,
) -> EmpiricalTdm {
    let mut sched = stream_rng(cfg.seed, shard, STREAM_SCHED);
    let mut power = stream_rng(cfg.seed, shard, STREAM_POWER);
    let mut symbols = stream_rng(cfg.seed, shard, STREAM_SYMBOLS);
    let mut ties = stream_rng(cfg.seed, shard, STREAM_TIES);
    let mut legit_noise = stream_rng(cfg.seed, shard, STREAM_LEGIT_NOISE);
    let mut eve_noise = stream_rng(cfg.seed, shard, STREAM_EVE_NOISE);

    let start = shard * SHARD_SIZE;
    let end = (start + SHARD_SIZE).min(cfg.frames);
    let mut out = EmpiricalTdm { seed: cfg.seed, ..Default::default() };

    for i in start..end {
        let jammed = sched.gen::<f64>() < ctx.beta;
        let rho_d = cfg.data_law.sample(&mut power);
        let rho_f = feedback_law.sample(&mut power);
        let s_d: i8 = if symbols.gen::<bool>() { 1 } else { -1 };
        let s_f: i8 = if symbols.gen::<bool>() { 1 } else { -1 };

        let p_d_rx = rho_d * ctx.gain_ae;
        let p_f_rx = if jammed { rho_f * ctx.gain_be } else { 0.0 };
        let mut obs = superpose(
            p_d_rx,
            p_f_rx,
            cfg.channel.superposition,
            ctx.phase,
            (s_d * s_f) as f64,
        );
        if !cfg.channel.eve_noiseless {
            let n = normal(&mut eve_noise);
            obs += cfg.channel.legit_noise_variance * n * n;
        }

        let inside = obs >= ctx.w_lo && obs <= ctx.w_hi;
        let mut decode_correct = None;
        if jammed {
            out.jam_count += 1;
            if inside {
                out.misses += 1;
                let dec = capture_decode(s_d, s_f, p_d_rx, p_f_rx, &mut ties);
                if dec != s_d {
                    out.miss_errors += 1;
                }
                decode_correct = Some(dec == s_d);
            }
        } else {
            out.clean_count += 1;
            if !inside {
                out.false_alarms += 1;
            } else {
                decode_correct = Some(true);
            }
            // Bob decodes the data symbol whenever he is not jamming.
            out.legit_attempts += 1;
            if ctx.simulate_legit {
                let amp = (rho_d * ctx.snr_gain_ab).sqrt() * s_d as f64
                    + ctx.legit_noise_sd * normal(&mut legit_noise);
                if (amp >= 0.0) != (s_d > 0) {
                    out.legit_errors += 1;
                }
            }
        }

        if let Some(t) = trace.as_deref_mut() {
            t(TraceRow {
                index: i,
                a_active: true,
                b_active: jammed,
                p_a_rx_db: to_db(p_d_rx),
                p_b_rx_db: to_db(p_f_rx),
                obs_db: to_db(obs),
                outcome: if inside { "accept" } else { "flagged" },
                decode_correct,
            });
        }
    }
    out
}

/// Run the TDM feedback scheme and evaluate the TDM secrecy bound on the
/// resulting empirical profile.
pub fn simulate_tdm(cfg: &SimConfig) -> Result<(EmpiricalTdm, RateBreakdownTdm)> {
    simulate_tdm_inner(cfg, None)
}

pub fn simulate_tdm_traced(
    cfg: &SimConfig,
    on_row: &mut dyn FnMut(TraceRow),
) -> Result<(EmpiricalTdm, RateBreakdownTdm)> {
    simulate_tdm_inner(cfg, Some(on_row))
}

fn simulate_tdm_inner(
    cfg: &SimConfig,
    trace: Option<&mut dyn FnMut(TraceRow)>,
) -> Result<(EmpiricalTdm, RateBreakdownTdm)> {
    cfg.validate()?;
    let SchemeConfig::Tdm { beta, feedback_law, window } = &cfg.scheme else {
        return Err(Error::Config("simulate_tdm requires a TDM scheme config".into()));
    };
    let (d_ae, d_be) = cfg.geometry.distances();
    let simulate_legit = match cfg.fec {
        FecMode::Off => true,
        FecMode::Ideal { snr_threshold } => cfg.data_law.rho_min() < snr_threshold,
    };
    let ctx = TdmCtx {
        beta: *beta,
        gain_ae: d_ae.powf(-cfg.geometry.alpha),
        gain_be: d_be.powf(-cfg.geometry.alpha),
        phase: cfg.channel.phase_diff(&cfg.geometry),
        w_lo: if window.t1_db.is_finite() { crate::model::from_db(window.t1_db) } else { 0.0 },
        w_hi: if window.t2_db.is_finite() { crate::model::from_db(window.t2_db) } else { f64::INFINITY },
        legit_noise_sd: cfg.channel.legit_noise_variance.sqrt(),
        simulate_legit,
        snr_gain_ab: cfg.geometry.d_ab.powf(-cfg.geometry.alpha),
    };
    let shards = cfg.frames.div_ceil(SHARD_SIZE);

    let mut total = EmpiricalTdm { frames: cfg.frames, seed: cfg.seed, ..Default::default() };
    if let Some(t) = trace {
        for shard in 0..shards {
            let part = shard_tdm(cfg, &ctx, feedback_law, shard, Some(t));
            total.merge(&part);
        }
    } else {
        let parts: Vec<EmpiricalTdm> = (0..shards)
            .into_par_iter()
            .map(|shard| shard_tdm(cfg, &ctx, feedback_law, shard, None))
            .collect();
        for part in &parts {
            total.merge(part);
        }
    }
    total.finalize();

    let breakdown = rates::tdm_bounds(
        *beta,
        &total.to_profile(),
        &cfg.geometry,
        cfg.data_law.rho_min(),
        cfg.fec,
    )?;
    Ok((total, breakdown))
}

/// One analytic-vs-empirical deviation.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonEntry {
    pub name: String,
    pub analytic: f64,
    pub empirical: f64,
    /// Conditioning count behind the empirical estimate.
    pub n: u64,
    /// Deviation in units of the binomial standard error (plus a small
    /// allowance for the analytic method's own quadrature resolution).
    pub z: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub entries: Vec<ComparisonEntry>,
    pub sigma: f64,
}

/// Quadrature resolution allowance folded into every z-score.
const ANALYTIC_TOL: f64 = 1e-4;

impl ComparisonReport {
    pub fn pass_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 1.0;
        }
        let ok = self.entries.iter().filter(|e| e.z <= self.sigma).count();
        ok as f64 / self.entries.len() as f64
    }

    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.z <= self.sigma)
    }

    pub fn max_z(&self) -> f64 {
        self.entries.iter().map(|e| e.z).fold(0.0, f64::max)
    }
}

fn z_score(analytic: f64, empirical: f64, n: u64, sigma: f64) -> f64 {
    let se = (analytic.clamp(0.0, 1.0) * (1.0 - analytic.clamp(0.0, 1.0)) / n as f64).sqrt();
    (analytic - empirical).abs() / (se + ANALYTIC_TOL / sigma)
}

/// Per-entry z-scores of an analytic misclassification profile against an
/// empirical run. Entries with a zero conditioning count are skipped.
pub fn compare_twoway(
    analytic: &MisclassProfile,
    empirical: &EmpiricalTwoWay,
    sigma: f64,
) -> ComparisonReport {
    let mut entries = Vec::new();
    let rows = [
        ("concurrent", &analytic.concurrent, &empirical.concurrent),
        ("alice_solo", &analytic.alice_solo, &empirical.alice_solo),
        ("bob_solo", &analytic.bob_solo, &empirical.bob_solo),
    ];
    for (name, arow, tally) in rows {
        let n = tally.occurrences;
        if n == 0 {
            continue;
        }
        let erow = tally.row();
        for (col, a, e) in [
            ("to_a", arow.to_a, erow.to_a),
            ("to_b", arow.to_b, erow.to_b),
            ("to_other", arow.to_other, erow.to_other),
        ] {
            entries.push(ComparisonEntry {
                name: format!("{name}.{col}"),
                analytic: a,
                empirical: e,
                n,
                z: z_score(a, e, n, sigma),
            });
        }
    }
    let prof = empirical.to_profile();
    for (name, a, e, n) in [
        (
            "err_concurrent_to_a",
            analytic.err_concurrent_to_a,
            prof.err_concurrent_to_a,
            empirical.dec_to_a,
        ),
        (
            "err_concurrent_to_b",
            analytic.err_concurrent_to_b,
            prof.err_concurrent_to_b,
            empirical.dec_to_b,
        ),
    ] {
        if n == 0 {
            continue;
        }
        entries.push(ComparisonEntry { name: name.into(), analytic: a, empirical: e, n, z: z_score(a, e, n, sigma) });
    }
    ComparisonReport { entries, sigma }
}

/// Per-entry z-scores of an analytic TDM detection profile against an
/// empirical run.
pub fn compare_tdm(
    analytic: &TdmDetectionProfile,
    empirical: &EmpiricalTdm,
    sigma: f64,
) -> ComparisonReport {
    let prof = empirical.to_profile();
    let mut entries = Vec::new();
    for (name, a, e, n) in [
        ("p_m", analytic.p_m, prof.p_m, empirical.jam_count),
        ("p_f", analytic.p_f, prof.p_f, empirical.clean_count),
        ("p_e_given_m", analytic.p_e_given_m, prof.p_e_given_m, empirical.misses),
    ] {
        if n == 0 {
            continue;
        }
        entries.push(ComparisonEntry { name: name.into(), analytic: a, empirical: e, n, z: z_score(a, e, n, sigma) });
    }
    ComparisonReport { entries, sigma }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::{misclass_profile, ProfileMethod};

    fn base_twoway(p_t: f64, frames: u64, seed: u64) -> SimConfig {
        let geometry = GeometryConfig::new(2.0, 5.0, std::f64::consts::FRAC_PI_2, 2.0).unwrap();
        SimConfig {
            frames,
            seed,
            geometry,
            channel: ChannelConfig::default(),
            data_law: PowerDistribution::uniform(1.0, 10.0).unwrap(),
            fec: FecMode::default(),
            scheme: SchemeConfig::TwoWay { p_t, classifier: EveClassifier::Blind },
        }
    }

    #[test]
    fn reproducible_across_worker_counts() {
        let cfg = base_twoway(0.5, 200_000, 42);
        let (e1, b1) = simulate_twoway(&cfg).unwrap();
        let (e2, b2) = simulate_twoway(&cfg).unwrap();
        assert_eq!(e1, e2);
        assert_eq!(b1, b2);
        // Serial traced path must agree with the parallel path.
        let mut rows = 0u64;
        let (e3, _) = simulate_twoway_traced(&cfg, &mut |_r| rows += 1).unwrap();
        assert_eq!(e1, e3);
        assert_eq!(rows, cfg.frames);
    }

    #[test]
    fn counts_account_for_every_interval() {
        let cfg = base_twoway(0.37, 150_000, 7);
        let (e, _) = simulate_twoway(&cfg).unwrap();
        let total = e.silence_count
            + e.concurrent.occurrences
            + e.alice_solo.occurrences
            + e.bob_solo.occurrences;
        assert_eq!(total, cfg.frames);
        for t in [&e.concurrent, &e.alice_solo, &e.bob_solo] {
            assert_eq!(t.occurrences, t.to_a + t.to_b + t.to_other);
        }
        // Half-duplex accounting: decodable intervals = exactly-one-active.
        assert_eq!(e.legit_attempts, e.alice_solo.occurrences + e.bob_solo.occurrences);
        let expected = 2.0 * 0.37 * 0.63 * cfg.frames as f64;
        let sd = (cfg.frames as f64 * 0.5).sqrt() * 3.0;
        assert!((e.legit_attempts as f64 - expected).abs() < sd);
    }

    #[test]
    fn p_t_zero_flags_everything() {
        let cfg = base_twoway(0.0, 10_000, 3);
        let (e, b) = simulate_twoway(&cfg).unwrap();
        assert_eq!(e.silence_count, cfg.frames);
        assert!(!e.flags.is_empty());
        assert_eq!(b.r_s, 0.0);
    }

    #[test]
    fn blind_symmetric_matches_closed_form() {
        let cfg = base_twoway(0.5, 1_000_000, 11);
        let (e, b) = simulate_twoway(&cfg).unwrap();
        let p_a_active = (e.alice_solo.occurrences + e.concurrent.occurrences) as f64
            / cfg.frames as f64;
        assert!((p_a_active - 0.5).abs() < 3.0 * (0.25f64 / 1e6).sqrt());
        assert!((b.d_a - 0.375).abs() < 0.0015);
        assert!((b.r_s - 0.17923).abs() < 0.005);
    }

    #[test]
    fn comparison_catches_corruption() {
        let cfg = base_twoway(0.5, 1_000_000, 13);
        let (e, _) = simulate_twoway(&cfg).unwrap();
        let analytic = misclass_profile(
            &cfg.geometry,
            &cfg.data_law,
            &EveClassifier::Blind,
            &cfg.channel,
            ProfileMethod::Analytic,
        )
        .unwrap();
        let ok = compare_twoway(&analytic, &e, 3.0);
        assert!(ok.pass_fraction() >= 0.99, "max z {}", ok.max_z());

        let mut bad = analytic;
        bad.alice_solo.to_a += 0.1;
        bad.alice_solo.to_b -= 0.1;
        let fail = compare_twoway(&bad, &e, 3.0);
        assert!(!fail.passed());
    }

    #[test]
    fn identical_profiles_compare_clean() {
        let cfg = base_twoway(0.5, 50_000, 17);
        let (e, _) = simulate_twoway(&cfg).unwrap();
        let rep = compare_twoway(&e.to_profile(), &e, 3.0);
        assert!(rep.passed());
        assert!(rep.entries.iter().all(|x| x.z == 0.0));
    }

    fn base_tdm(beta: f64, window: TdmWindow, frames: u64, seed: u64) -> SimConfig {
        let geometry = GeometryConfig::new(2.0, 5.0, std::f64::consts::FRAC_PI_2, 2.0).unwrap();
        SimConfig {
            frames,
            seed,
            geometry,
            channel: ChannelConfig::default(),
            data_law: PowerDistribution::uniform(1.0, 10.0).unwrap(),
            fec: FecMode::default(),
            scheme: SchemeConfig::Tdm {
                beta,
                feedback_law: PowerDistribution::uniform(1.0, 10.0).unwrap(),
                window,
            },
        }
    }

    #[test]
    fn tdm_open_window_extremes() {
        let cfg = base_tdm(0.4, TdmWindow::no_erasure(), 100_000, 23);
        let (e, _) = simulate_tdm(&cfg).unwrap();
        let p = e.to_profile();
        assert_eq!(p.p_m, 1.0);
        assert_eq!(p.p_f, 0.0);
    }

    #[test]
    fn tdm_beta_zero_flagged() {
        let cfg = base_tdm(0.0, TdmWindow::no_erasure(), 10_000, 29);
        let (e, _) = simulate_tdm(&cfg).unwrap();
        assert_eq!(e.jam_count, 0);
        assert!(e.flags.iter().any(|f| f.starts_with("p_m")));
    }

    #[test]
    fn tdm_empirical_matches_analytic() {
        let geometry = GeometryConfig::new(2.0, 5.0, std::f64::consts::FRAC_PI_2, 2.0).unwrap();
        let f = PowerDistribution::uniform(1.0, 10.0).unwrap();
        let (d_ae, _) = geometry.distances();
        let support = f.received_at(d_ae, 2.0).support_db();
        let window = TdmWindow { t1_db: support.0, t2_db: support.1 };
        let cfg = base_tdm(0.3, window, 1_000_000, 31);
        let (e, b) = simulate_tdm(&cfg).unwrap();
        let analytic = crate::profile::tdm_detection_profile(
            &geometry,
            &f,
            &f,
            &window,
            &cfg.channel,
            ProfileMethod::Analytic,
        )
        .unwrap();
        let rep = compare_tdm(&analytic, &e, 3.0);
        assert!(rep.passed(), "max z {}", rep.max_z());
        let ab = rates::tdm_bounds(0.3, &analytic, &geometry, 1.0, FecMode::default()).unwrap();
        assert!((ab.r_s - b.r_s).abs() < 0.01);
    }
}
