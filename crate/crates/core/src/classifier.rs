//! Eve's memoryless per-symbol classifiers.
//!
//! All classifiers see only the received power of the current symbol (in
//! dB); the decision rules themselves never look at the true transmitter
//! activity. The one exception is [`EveClassifier::Perfect`], a modeling
//! device used as a worst-case adversary in tests and optimizer grids.

use crate::error::{Error, Result};
use crate::model::{GeometryConfig, PowerDistribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// True transmitter activity in a symbol interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrueEvent {
    Silence,
    AliceSolo,
    BobSolo,
    Concurrent,
}

/// Classification outcome for one received symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassOutcome {
    Alice,
    Bob,
    /// Alice or Bob with equal probabilities, resolved at decode time.
    AliceOrBob,
    Erase,
    Silence,
}

/// Threshold energy classifier with erasure window `[t1, t2]` and the
/// interval decision rule over the solo received-power supports.
///
/// The rule is oriented for the case where the `b` support sits at or
/// above the `a` support (Bob no farther from Eve than Alice); callers
/// mirror inputs for the opposite orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdClassifier {
    pub t1_db: f64,
    pub t2_db: f64,
    pub a_min: f64,
    pub a_max: f64,
    pub b_min: f64,
    pub b_max: f64,
}

impl ThresholdClassifier {
    pub fn validate(&self) -> Result<()> {
        if !(self.t1_db <= self.t2_db) {
            return Err(Error::Config(format!(
                "erasure window requires t1 <= t2, got [{}, {}]",
                self.t1_db, self.t2_db
            )));
        }
        if !(self.a_min <= self.a_max && self.b_min <= self.b_max) {
            return Err(Error::Config("support endpoints out of order".into()));
        }
        if self.b_min < self.a_min || self.b_max < self.a_max {
            return Err(Error::Config(
                "threshold rule requires the b support to sit at or above the a support".into(),
            ));
        }
        Ok(())
    }
}

/// Apply the threshold decision rule to an observed power in dB.
///
/// Silence is handled by the caller (zero observed power never reaches
/// this rule under the noiseless-Eve default).
pub fn classify_threshold(r_db: f64, c: &ThresholdClassifier) -> ClassOutcome {
    if r_db < c.t1_db || r_db > c.t2_db {
        return ClassOutcome::Erase;
    }
    if r_db > c.a_min && r_db < c.a_max.min(c.b_min) {
        ClassOutcome::Alice
    } else if r_db > c.a_max {
        ClassOutcome::Bob
    } else {
        ClassOutcome::AliceOrBob
    }
}

/// Gaussian observation model for one source at one power level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelModel {
    pub mean_db: f64,
    pub variance: f64,
}

/// Maximum-likelihood classifier over per-level Gaussian observation
/// models, one family per source. Never erases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlClassifier {
    pub a_levels: Vec<LevelModel>,
    pub b_levels: Vec<LevelModel>,
}

impl MlClassifier {
    pub fn new(a_levels: Vec<LevelModel>, b_levels: Vec<LevelModel>) -> Result<Self> {
        let m = Self { a_levels, b_levels };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_levels.is_empty() || self.b_levels.is_empty() {
            return Err(Error::Config("ML classifier needs at least one level per source".into()));
        }
        for l in self.a_levels.iter().chain(self.b_levels.iter()) {
            if !(l.variance > 0.0) {
                return Err(Error::Config(format!("ML level variance must be > 0, got {}", l.variance)));
            }
        }
        Ok(())
    }

    /// Parse a plain-text model table: one row per
    /// `source level_index mean_db variance`, whitespace separated,
    /// `#` comments.
    pub fn from_table_str(text: &str) -> Result<Self> {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 {
                return Err(Error::Config(format!(
                    "ML table line {}: expected 4 fields, got {}",
                    lineno + 1,
                    fields.len()
                )));
            }
            let mean_db: f64 = fields[2]
                .parse()
                .map_err(|_| Error::Config(format!("ML table line {}: bad mean", lineno + 1)))?;
            let variance: f64 = fields[3]
                .parse()
                .map_err(|_| Error::Config(format!("ML table line {}: bad variance", lineno + 1)))?;
            match fields[0] {
                "A" | "a" => a.push(LevelModel { mean_db, variance }),
                "B" | "b" => b.push(LevelModel { mean_db, variance }),
                other => {
                    return Err(Error::Config(format!(
                        "ML table line {}: unknown source '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Self::new(a, b)
    }

    fn max_density(levels: &[LevelModel], y_db: f64) -> f64 {
        levels
            .iter()
            .map(|l| {
                let z = y_db - l.mean_db;
                (-0.5 * z * z / l.variance).exp() / (2.0 * std::f64::consts::PI * l.variance).sqrt()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Maximum-likelihood ratio rule: A if the best Alice density beats the
/// best Bob density, B if it loses, a fair pick on an exact tie.
pub fn classify_ml(y_db: f64, m: &MlClassifier) -> ClassOutcome {
    let fa = MlClassifier::max_density(&m.a_levels, y_db);
    let fb = MlClassifier::max_density(&m.b_levels, y_db);
    if fa > fb {
        ClassOutcome::Alice
    } else if fb > fa {
        ClassOutcome::Bob
    } else {
        ClassOutcome::AliceOrBob
    }
}

/// Capture decoding of a concurrent transmission: the stronger symbol is
/// decoded; an exact power tie is resolved by a fair pick.
pub fn capture_decode<R: Rng + ?Sized>(
    s_a: i8,
    s_b: i8,
    p_a_rx: f64,
    p_b_rx: f64,
    rng: &mut R,
) -> i8 {
    if p_a_rx > p_b_rx {
        s_a
    } else if p_b_rx > p_a_rx {
        s_b
    } else if rng.gen::<bool>() {
        s_a
    } else {
        s_b
    }
}

/// A concrete classifier for a given geometry, ready to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EveClassifier {
    /// Threshold rule; `swapped` mirrors Alice/Bob when Eve is closer to
    /// Alice than to Bob (the rule itself stays canonical).
    Threshold { rule: ThresholdClassifier, swapped: bool },
    Ml(MlClassifier),
    /// Always answers A|B; never erases.
    Blind,
    /// Oracle adversary: solo symbols attributed exactly, concurrent
    /// symbols erased.
    Perfect,
}

impl EveClassifier {
    /// Build a threshold classifier from geometry and the shared power
    /// law, mirroring roles when Eve is closer to Alice.
    pub fn threshold_from_geometry(
        geom: &GeometryConfig,
        dist: &PowerDistribution,
        t1_db: f64,
        t2_db: f64,
    ) -> Result<Self> {
        Self::threshold_from_laws(geom, dist, dist, t1_db, t2_db)
    }

    /// Same, with distinct laws for Alice and Bob.
    pub fn threshold_from_laws(
        geom: &GeometryConfig,
        dist_a: &PowerDistribution,
        dist_b: &PowerDistribution,
        t1_db: f64,
        t2_db: f64,
    ) -> Result<Self> {
        let (d_ae, d_be) = geom.distances();
        let a_support = dist_a.received_at(d_ae, geom.alpha).support_db();
        let b_support = dist_b.received_at(d_be, geom.alpha).support_db();
        // Canonical orientation: b support at or above a support.
        let swapped = d_ae < d_be;
        let (a, b) = if swapped { (b_support, a_support) } else { (a_support, b_support) };
        let rule = ThresholdClassifier {
            t1_db,
            t2_db,
            a_min: a.0,
            a_max: a.1,
            b_min: b.0,
            b_max: b.1,
        };
        rule.validate()?;
        Ok(Self::Threshold { rule, swapped })
    }

    /// Classify one observed symbol. `event` is consulted only by the
    /// `Perfect` oracle; every other variant decides from `r_db` alone.
    pub fn classify(&self, event: TrueEvent, r_db: f64) -> ClassOutcome {
        match self {
            Self::Threshold { rule, swapped } => {
                let out = classify_threshold(r_db, rule);
                if *swapped {
                    match out {
                        ClassOutcome::Alice => ClassOutcome::Bob,
                        ClassOutcome::Bob => ClassOutcome::Alice,
                        other => other,
                    }
                } else {
                    out
                }
            }
            Self::Ml(m) => classify_ml(r_db, m),
            Self::Blind => ClassOutcome::AliceOrBob,
            Self::Perfect => match event {
                TrueEvent::Silence => ClassOutcome::Silence,
                TrueEvent::AliceSolo => ClassOutcome::Alice,
                TrueEvent::BobSolo => ClassOutcome::Bob,
                TrueEvent::Concurrent => ClassOutcome::Erase,
            },
        }
    }
}

/// TDM feedback detector: a symbol is accepted as clean when its power
/// falls inside `[t1, t2]` dB and flagged as jammed otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdmWindow {
    pub t1_db: f64,
    pub t2_db: f64,
}

impl TdmWindow {
    /// Window covering all reals: nothing is ever flagged.
    pub fn no_erasure() -> Self {
        Self { t1_db: f64::NEG_INFINITY, t2_db: f64::INFINITY }
    }

    pub fn contains_db(&self, r_db: f64) -> bool {
        r_db >= self.t1_db && r_db <= self.t2_db
    }
}

/// Eve's event-misclassification probabilities for the two-way scheme.
///
/// Rows are indexed by the true event; each row gives the probability of
/// the symbol being attributed to Alice, to Bob, or neither (erased or
/// otherwise discarded). The `A|B` outcome contributes half to each of
/// the first two columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRow {
    pub to_a: f64,
    pub to_b: f64,
    pub to_other: f64,
}

impl EventRow {
    pub fn sum(&self) -> f64 {
        self.to_a + self.to_b + self.to_other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MisclassProfile {
    /// True event (A, B).
    pub concurrent: EventRow,
    /// True event (A, B^c).
    pub alice_solo: EventRow,
    /// True event (A^c, B).
    pub bob_solo: EventRow,
    /// P(decode error | concurrent symbol attributed to Alice).
    pub err_concurrent_to_a: f64,
    /// P(decode error | concurrent symbol attributed to Bob).
    pub err_concurrent_to_b: f64,
}

impl MisclassProfile {
    /// Identity profile of a perfect adversary.
    pub fn perfect() -> Self {
        Self {
            concurrent: EventRow { to_a: 0.0, to_b: 0.0, to_other: 1.0 },
            alice_solo: EventRow { to_a: 1.0, to_b: 0.0, to_other: 0.0 },
            bob_solo: EventRow { to_a: 0.0, to_b: 1.0, to_other: 0.0 },
            err_concurrent_to_a: 0.0,
            err_concurrent_to_b: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, row) in [
            ("concurrent", &self.concurrent),
            ("alice_solo", &self.alice_solo),
            ("bob_solo", &self.bob_solo),
        ] {
            for v in [row.to_a, row.to_b, row.to_other] {
                if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                    return Err(Error::Contract(format!("profile row {name} entry {v} outside [0,1]")));
                }
            }
            // An all-zero row marks an event that was never observed
            // (empirical profiles); it carries no weight downstream.
            if (row.sum() - 1.0).abs() > 1e-9 && row.sum().abs() > 1e-12 {
                return Err(Error::Contract(format!(
                    "profile row {name} sums to {}, expected 1 (or 0 when unobserved)",
                    row.sum()
                )));
            }
        }
        for (name, v) in [
            ("err_concurrent_to_a", self.err_concurrent_to_a),
            ("err_concurrent_to_b", self.err_concurrent_to_b),
        ] {
            if !(-1e-9..=0.5 + 1e-9).contains(&v) {
                return Err(Error::Contract(format!(
                    "conditional error {name} = {v} outside [0, 0.5]"
                )));
            }
        }
        Ok(())
    }

    /// Swap the roles of Alice and Bob (mirror geometry).
    pub fn transposed(&self) -> Self {
        let flip = |r: &EventRow| EventRow { to_a: r.to_b, to_b: r.to_a, to_other: r.to_other };
        Self {
            concurrent: flip(&self.concurrent),
            alice_solo: flip(&self.bob_solo),
            bob_solo: flip(&self.alice_solo),
            err_concurrent_to_a: self.err_concurrent_to_b,
            err_concurrent_to_b: self.err_concurrent_to_a,
        }
    }
}

/// Eve's detection quality against the TDM feedback scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TdmDetectionProfile {
    /// P(jammed symbol accepted as clean).
    pub p_m: f64,
    /// P(clean symbol flagged as jammed).
    pub p_f: f64,
    /// P(decode error | miss-detection).
    pub p_e_given_m: f64,
}

impl TdmDetectionProfile {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_m", self.p_m), ("p_f", self.p_f)] {
            if !(-1e-9..=1.0 + 1e-9).contains(&v) {
                return Err(Error::Contract(format!("{name} = {v} outside [0,1]")));
            }
        }
        if !(-1e-9..=0.5 + 1e-9).contains(&self.p_e_given_m) {
            return Err(Error::Contract(format!(
                "p_e_given_m = {} outside [0, 0.5]",
                self.p_e_given_m
            )));
        }
        Ok(())
    }
}
