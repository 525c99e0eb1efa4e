//! Misclassification and detection profiles.
//!
//! The analytic method integrates the classifier decision over the
//! received-power laws deterministically: solo events by quadrature over
//! the (one-dimensional) law, concurrent events by reduction to the law
//! of the power sum. Capture-decode error terms only need, besides the
//! sum, the conditional probability that the other node was the stronger
//! one, which is available in closed form for every law pair. Coherent
//! superposition has no such reduction and falls back to an internally
//! seeded Monte Carlo estimate for the concurrent row.

use crate::classifier::{
    ClassOutcome, EveClassifier, EventRow, MisclassProfile, TdmDetectionProfile, TdmWindow,
    TrueEvent,
};
use crate::error::{Error, Result};
use crate::model::{
    from_db, superpose, to_db, ChannelConfig, GeometryConfig, PowerDistribution, ReceivedLaw,
    SuperpositionMode,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// How to evaluate a profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProfileMethod {
    /// Deterministic quadrature / closed-form evaluation.
    Analytic,
    /// Empirical estimation with `samples` draws per conditioning event.
    MonteCarlo { samples: u64, seed: u64 },
}

/// Resolution knobs for the analytic method.
#[derive(Debug, Clone, Copy)]
pub struct QuadOpts {
    /// Quadrature points for one-dimensional (solo) integrals.
    pub solo_points: usize,
    /// Quadrature points for power-sum integrals.
    pub sum_points: usize,
    /// Draws for the coherent-mode concurrent fallback.
    pub coherent_samples: u64,
    /// Seed for that fallback (fixed so the analytic method stays
    /// bit-reproducible).
    pub coherent_seed: u64,
}

impl Default for QuadOpts {
    fn default() -> Self {
        Self { solo_points: 100_001, sum_points: 50_001, coherent_samples: 400_000, coherent_seed: 0xC0DE }
    }
}

fn alloc(out: ClassOutcome) -> (f64, f64, f64) {
    match out {
        ClassOutcome::Alice => (1.0, 0.0, 0.0),
        ClassOutcome::Bob => (0.0, 1.0, 0.0),
        ClassOutcome::AliceOrBob => (0.5, 0.5, 0.0),
        ClassOutcome::Erase | ClassOutcome::Silence => (0.0, 0.0, 1.0),
    }
}

/// Integrate an allocation over one received-power law.
fn solo_row(law: &ReceivedLaw, n: usize, mut classify: impl FnMut(f64) -> ClassOutcome) -> EventRow {
    let mut row = (0.0, 0.0, 0.0);
    let mut total = 0.0;
    let mut add = |p: f64, w: f64| {
        let (a, b, o) = alloc(classify(p));
        row.0 += w * a;
        row.1 += w * b;
        row.2 += w * o;
        total += w;
    };
    match law {
        ReceivedLaw::Discrete { points } => {
            for (p, w) in points {
                add(*p, *w);
            }
        }
        ReceivedLaw::Uniform { lo, hi } => {
            let step = (hi - lo) / n as f64;
            for k in 0..n {
                add(lo + (k as f64 + 0.5) * step, 1.0 / n as f64);
            }
        }
    }
    EventRow { to_a: row.0 / total, to_b: row.1 / total, to_other: row.2 / total }
}

/// Visit the law of the sum of two independent received powers.
///
/// The callback receives `(s, mass, p_b_stronger, p_tie)` where
/// `p_b_stronger = P(p_b > p_a | p_a + p_b = s)` and `p_tie` the
/// conditional probability of an exact power tie.
fn for_each_sum(
    law_a: &ReceivedLaw,
    law_b: &ReceivedLaw,
    n: usize,
    f: &mut impl FnMut(f64, f64, f64, f64),
) {
    match (law_a, law_b) {
        (ReceivedLaw::Discrete { points: pa }, ReceivedLaw::Discrete { points: pb }) => {
            for (a, wa) in pa {
                for (b, wb) in pb {
                    let (stronger, tie) = if b > a {
                        (1.0, 0.0)
                    } else if a > b {
                        (0.0, 0.0)
                    } else {
                        (0.0, 1.0)
                    };
                    f(a + b, wa * wb, stronger, tie);
                }
            }
        }
        (ReceivedLaw::Discrete { points: pa }, ReceivedLaw::Uniform { lo, hi }) => {
            let step = (hi - lo) / n as f64;
            for (a, wa) in pa {
                for k in 0..n {
                    let b = lo + (k as f64 + 0.5) * step;
                    let stronger = if b > *a { 1.0 } else { 0.0 };
                    f(a + b, wa / n as f64, stronger, 0.0);
                }
            }
        }
        (ReceivedLaw::Uniform { lo, hi }, ReceivedLaw::Discrete { points: pb }) => {
            let step = (hi - lo) / n as f64;
            for (b, wb) in pb {
                for k in 0..n {
                    let a = lo + (k as f64 + 0.5) * step;
                    let stronger = if *b > a { 1.0 } else { 0.0 };
                    f(a + b, wb / n as f64, stronger, 0.0);
                }
            }
        }
        (ReceivedLaw::Uniform { lo: al, hi: ah }, ReceivedLaw::Uniform { lo: bl, hi: bh }) => {
            // Trapezoidal sum density; conditionally on s, p_a is uniform
            // on the slice [max(al, s-bh), min(ah, s-bl)].
            let (slo, shi) = (al + bl, ah + bh);
            let step = (shi - slo) / n as f64;
            let norm = (ah - al) * (bh - bl);
            let mut total = 0.0;
            let mut items: Vec<(f64, f64, f64)> = Vec::with_capacity(n);
            for k in 0..n {
                let s = slo + (k as f64 + 0.5) * step;
                let lo_a = al.max(s - bh);
                let hi_a = ah.min(s - bl);
                let len = (hi_a - lo_a).max(0.0);
                if len <= 0.0 {
                    continue;
                }
                let mass = len / norm * step;
                let stronger = (((s / 2.0 - lo_a) / len).clamp(0.0, 1.0)).min(1.0);
                total += mass;
                items.push((s, mass, stronger));
            }
            // Normalize the quadrature so the row sums to one exactly.
            for (s, mass, stronger) in items {
                f(s, mass / total, stronger, 0.0);
            }
        }
    }
}

/// Analytic concurrent-event row plus conditional capture-error terms.
fn concurrent_row_incoherent(
    law_a: &ReceivedLaw,
    law_b: &ReceivedLaw,
    n: usize,
    mut classify: impl FnMut(f64) -> ClassOutcome,
) -> (EventRow, f64, f64) {
    let mut row = (0.0, 0.0, 0.0);
    let mut err_a = 0.0;
    let mut err_b = 0.0;
    let mut tot = 0.0;
    for_each_sum(law_a, law_b, n, &mut |s, mass, b_stronger, tie| {
        let out = if s <= 0.0 { ClassOutcome::Silence } else { classify(s) };
        let (a, b, o) = alloc(out);
        tot += mass;
        row.0 += mass * a;
        row.1 += mass * b;
        row.2 += mass * o;
        // Error against the attributed source: wrong symbol is decoded
        // when the other node captured the channel and the independent
        // symbols differ (probability 0.5); an exact tie errs with 0.25.
        err_a += mass * a * (0.5 * b_stronger + 0.25 * tie);
        err_b += mass * b * (0.5 * (1.0 - b_stronger - tie) + 0.25 * tie);
    });
    // Renormalize by the accumulated quadrature mass so a row whose
    // outcomes all coincide comes out exactly 1.
    let row = EventRow { to_a: row.0 / tot, to_b: row.1 / tot, to_other: row.2 / tot };
    let (err_a, err_b) = (err_a / tot, err_b / tot);
    let err_a = if row.to_a > 0.0 { err_a / row.to_a } else { 0.0 };
    let err_b = if row.to_b > 0.0 { err_b / row.to_b } else { 0.0 };
    (row, err_a, err_b)
}

/// Monte Carlo concurrent row (used for coherent superposition and the
/// fully empirical method).
fn concurrent_row_mc(
    law_a: &ReceivedLaw,
    law_b: &ReceivedLaw,
    channel: &ChannelConfig,
    geom: &GeometryConfig,
    cls: &EveClassifier,
    samples: u64,
    seed: u64,
) -> (EventRow, f64, f64) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let phase = channel.phase_diff(geom);
    let mut counts = (0u64, 0u64, 0u64);
    let mut errs = (0u64, 0u64);
    for _ in 0..samples {
        let pa = law_a.sample(&mut rng);
        let pb = law_b.sample(&mut rng);
        let sa: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        let sb: i8 = if rng.gen::<bool>() { 1 } else { -1 };
        let s = superpose(pa, pb, channel.superposition, phase, (sa * sb) as f64);
        let out = if s <= 0.0 {
            ClassOutcome::Silence
        } else {
            cls.classify(TrueEvent::Concurrent, to_db(s))
        };
        let out = match out {
            ClassOutcome::AliceOrBob => {
                if rng.gen::<bool>() {
                    ClassOutcome::Alice
                } else {
                    ClassOutcome::Bob
                }
            }
            o => o,
        };
        match out {
            ClassOutcome::Alice => {
                counts.0 += 1;
                let dec = crate::classifier::capture_decode(sa, sb, pa, pb, &mut rng);
                if dec != sa {
                    errs.0 += 1;
                }
            }
            ClassOutcome::Bob => {
                counts.1 += 1;
                let dec = crate::classifier::capture_decode(sa, sb, pa, pb, &mut rng);
                if dec != sb {
                    errs.1 += 1;
                }
            }
            _ => counts.2 += 1,
        }
    }
    let n = samples as f64;
    let row = EventRow {
        to_a: counts.0 as f64 / n,
        to_b: counts.1 as f64 / n,
        to_other: counts.2 as f64 / n,
    };
    let err_a = if counts.0 > 0 { errs.0 as f64 / counts.0 as f64 } else { 0.0 };
    let err_b = if counts.1 > 0 { errs.1 as f64 / counts.1 as f64 } else { 0.0 };
    (row, err_a, err_b)
}

fn solo_row_mc(
    law: &ReceivedLaw,
    event: TrueEvent,
    cls: &EveClassifier,
    samples: u64,
    seed: u64,
) -> EventRow {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut counts = (0u64, 0u64, 0u64);
    for _ in 0..samples {
        let p = law.sample(&mut rng);
        let out = cls.classify(event, to_db(p));
        match out {
            ClassOutcome::Alice => counts.0 += 1,
            ClassOutcome::Bob => counts.1 += 1,
            ClassOutcome::AliceOrBob => {
                if rng.gen::<bool>() {
                    counts.0 += 1
                } else {
                    counts.1 += 1
                }
            }
            _ => counts.2 += 1,
        }
    }
    let n = samples as f64;
    EventRow { to_a: counts.0 as f64 / n, to_b: counts.1 as f64 / n, to_other: counts.2 as f64 / n }
}

/// Eve's misclassification profile for the two-way scheme.
pub fn misclass_profile(
    geom: &GeometryConfig,
    dist: &PowerDistribution,
    cls: &EveClassifier,
    channel: &ChannelConfig,
    method: ProfileMethod,
) -> Result<MisclassProfile> {
    misclass_profile_opts(geom, dist, cls, channel, method, &QuadOpts::default())
}

pub fn misclass_profile_opts(
    geom: &GeometryConfig,
    dist: &PowerDistribution,
    cls: &EveClassifier,
    channel: &ChannelConfig,
    method: ProfileMethod,
    opts: &QuadOpts,
) -> Result<MisclassProfile> {
    geom.validate()?;
    dist.validate()?;
    channel.validate()?;
    if matches!(cls, EveClassifier::Perfect) {
        return Ok(MisclassProfile::perfect());
    }
    let (d_ae, d_be) = geom.distances();
    let law_a = dist.received_at(d_ae, geom.alpha);
    let law_b = dist.received_at(d_be, geom.alpha);

    let profile = match method {
        ProfileMethod::Analytic => {
            let alice_solo = solo_row(&law_a, opts.solo_points, |p| {
                cls.classify(TrueEvent::AliceSolo, to_db(p))
            });
            let bob_solo = solo_row(&law_b, opts.solo_points, |p| {
                cls.classify(TrueEvent::BobSolo, to_db(p))
            });
            let (concurrent, err_a, err_b) = match channel.superposition {
                SuperpositionMode::Incoherent => {
                    concurrent_row_incoherent(&law_a, &law_b, opts.sum_points, |s| {
                        cls.classify(TrueEvent::Concurrent, to_db(s))
                    })
                }
                SuperpositionMode::Coherent => concurrent_row_mc(
                    &law_a,
                    &law_b,
                    channel,
                    geom,
                    cls,
                    opts.coherent_samples,
                    opts.coherent_seed,
                ),
            };
            MisclassProfile {
                concurrent,
                alice_solo,
                bob_solo,
                err_concurrent_to_a: err_a,
                err_concurrent_to_b: err_b,
            }
        }
        ProfileMethod::MonteCarlo { samples, seed } => {
            let alice_solo = solo_row_mc(&law_a, TrueEvent::AliceSolo, cls, samples, seed ^ 0xA);
            let bob_solo = solo_row_mc(&law_b, TrueEvent::BobSolo, cls, samples, seed ^ 0xB);
            let (concurrent, err_a, err_b) =
                concurrent_row_mc(&law_a, &law_b, channel, geom, cls, samples, seed ^ 0xC);
            MisclassProfile {
                concurrent,
                alice_solo,
                bob_solo,
                err_concurrent_to_a: err_a,
                err_concurrent_to_b: err_b,
            }
        }
    };
    profile.validate()?;
    Ok(profile)
}

/// Eve's detection profile against the TDM feedback scheme.
///
/// `f1` is the data-power law (transmitted by Alice at distance d_AE),
/// `f2` the feedback-power law (Bob, d_BE).
pub fn tdm_detection_profile(
    geom: &GeometryConfig,
    f1: &PowerDistribution,
    f2: &PowerDistribution,
    window: &TdmWindow,
    channel: &ChannelConfig,
    method: ProfileMethod,
) -> Result<TdmDetectionProfile> {
    tdm_detection_profile_opts(geom, f1, f2, window, channel, method, &QuadOpts::default())
}

pub fn tdm_detection_profile_opts(
    geom: &GeometryConfig,
    f1: &PowerDistribution,
    f2: &PowerDistribution,
    window: &TdmWindow,
    channel: &ChannelConfig,
    method: ProfileMethod,
    opts: &QuadOpts,
) -> Result<TdmDetectionProfile> {
    geom.validate()?;
    f1.validate()?;
    f2.validate()?;
    channel.validate()?;
    if window.t1_db > window.t2_db {
        return Err(Error::Config(format!(
            "erasure window requires t1 <= t2, got [{}, {}]",
            window.t1_db, window.t2_db
        )));
    }
    let (d_ae, d_be) = geom.distances();
    let data = f1.received_at(d_ae, geom.alpha);
    let feedback = f2.received_at(d_be, geom.alpha);
    let (w_lo, w_hi) = (
        if window.t1_db.is_finite() { from_db(window.t1_db) } else { 0.0 },
        if window.t2_db.is_finite() { from_db(window.t2_db) } else { f64::INFINITY },
    );

    let profile = match method {
        ProfileMethod::Analytic => {
            let p_f = 1.0 - data.mass_in(w_lo, w_hi);
            let mut p_m = 0.0;
            let mut err = 0.0;
            match channel.superposition {
                SuperpositionMode::Incoherent => {
                    let mut tot = 0.0;
                    for_each_sum(&data, &feedback, opts.sum_points, &mut |s, mass, fb_stronger, tie| {
                        tot += mass;
                        if s >= w_lo && s <= w_hi {
                            p_m += mass;
                            err += mass * (0.5 * fb_stronger + 0.25 * tie);
                        }
                    });
                    // Renormalize by the accumulated quadrature mass so a
                    // window covering the whole support gives exactly 1.
                    p_m /= tot;
                    err /= tot;
                }
                SuperpositionMode::Coherent => {
                    let mut rng = ChaCha12Rng::seed_from_u64(opts.coherent_seed);
                    let phase = channel.phase_diff(geom);
                    let mut miss = 0u64;
                    let mut errors = 0.0f64;
                    for _ in 0..opts.coherent_samples {
                        let pd = data.sample(&mut rng);
                        let pf = feedback.sample(&mut rng);
                        let sign: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
                        let s = superpose(pd, pf, SuperpositionMode::Coherent, phase, sign);
                        if s >= w_lo && s <= w_hi {
                            miss += 1;
                            if pf > pd {
                                errors += 0.5;
                            } else if pf == pd {
                                errors += 0.25;
                            }
                        }
                    }
                    p_m = miss as f64 / opts.coherent_samples as f64;
                    err = errors / opts.coherent_samples as f64;
                }
            }
            let p_e_given_m = if p_m > 0.0 { err / p_m } else { 0.0 };
            TdmDetectionProfile { p_m, p_f, p_e_given_m }
        }
        ProfileMethod::MonteCarlo { samples, seed } => {
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let phase = channel.phase_diff(geom);
            let mut false_alarms = 0u64;
            let mut misses = 0u64;
            let mut errors = 0u64;
            for _ in 0..samples {
                // Clean symbol.
                let p = data.sample(&mut rng);
                if !(p >= w_lo && p <= w_hi) {
                    false_alarms += 1;
                }
                // Jammed symbol with random feedback content.
                let pd = data.sample(&mut rng);
                let pf = feedback.sample(&mut rng);
                let sd: i8 = if rng.gen::<bool>() { 1 } else { -1 };
                let sf: i8 = if rng.gen::<bool>() { 1 } else { -1 };
                let s = superpose(pd, pf, channel.superposition, phase, (sd * sf) as f64);
                if s >= w_lo && s <= w_hi {
                    misses += 1;
                    let dec = crate::classifier::capture_decode(sd, sf, pd, pf, &mut rng);
                    if dec != sd {
                        errors += 1;
                    }
                }
            }
            let n = samples as f64;
            TdmDetectionProfile {
                p_m: misses as f64 / n,
                p_f: false_alarms as f64 / n,
                p_e_given_m: if misses > 0 { errors as f64 / misses as f64 } else { 0.0 },
            }
        }
    };
    profile.validate()?;
    Ok(profile)
}
