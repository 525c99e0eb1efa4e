//! Flat `key = value` configuration files.
//!
//! Keys use dotted section prefixes (`geometry.d_ab = 1.0`). Unknown
//! keys are hard errors so typos never silently fall back to defaults.
//! Every consumed key, including defaults filled in, is recorded in the
//! echo map that ends up in the output record.

use randsec::optimizer::{ClassifierSpec, Placement, SearchGrid};
use randsec::profile::QuadOpts;
use randsec::{
    ChannelConfig, Error, EveClassifier, FecMode, GeometryConfig, PowerDistribution, Result,
    Scheme, SuperpositionMode, TdmWindow,
};
use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

/// Which scheme(s) a run covers. `Both` is only meaningful for sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeSel {
    Tdm,
    TwoWay,
    Both,
}

impl SchemeSel {
    pub fn schemes(&self) -> Vec<Scheme> {
        match self {
            SchemeSel::Tdm => vec![Scheme::Tdm],
            SchemeSel::TwoWay => vec![Scheme::TwoWay],
            SchemeSel::Both => vec![Scheme::TwoWay, Scheme::Tdm],
        }
    }

    pub fn single(&self) -> Result<Scheme> {
        match self {
            SchemeSel::Tdm => Ok(Scheme::Tdm),
            SchemeSel::TwoWay => Ok(Scheme::TwoWay),
            SchemeSel::Both => Err(Error::Config(
                "scheme = both is only valid for the sweep subcommand".into(),
            )),
        }
    }
}

/// Eve's classifier as configured, before binding to a geometry.
#[derive(Debug, Clone)]
pub enum ClassifierSel {
    /// Relative specification (fractions of the support range).
    Spec(ClassifierSpec),
    /// Absolute erasure thresholds in dB.
    ThresholdDb { t1_db: f64, t2_db: f64 },
    /// ML rule from a level table file.
    MlTable { table: String },
}

impl ClassifierSel {
    /// Concrete two-way classifier for a geometry and power law.
    pub fn instantiate_twoway(
        &self,
        geom: &GeometryConfig,
        dist: &PowerDistribution,
    ) -> Result<EveClassifier> {
        match self {
            ClassifierSel::Spec(spec) => spec.instantiate_twoway(geom, dist),
            ClassifierSel::ThresholdDb { t1_db, t2_db } => {
                EveClassifier::threshold_from_geometry(geom, dist, *t1_db, *t2_db)
            }
            ClassifierSel::MlTable { table } => {
                Ok(EveClassifier::Ml(randsec::classifier::MlClassifier::from_table_str(table)?))
            }
        }
    }

    /// TDM acceptance window for a geometry and data law.
    pub fn instantiate_tdm_window(
        &self,
        geom: &GeometryConfig,
        data_law: &PowerDistribution,
    ) -> Result<TdmWindow> {
        match self {
            ClassifierSel::Spec(ClassifierSpec::Perfect) => Err(Error::Config(
                "classifier = perfect has no TDM detection window; it is only available \
                 in the optimizer's adversary grid for the two-way scheme"
                    .into(),
            )),
            ClassifierSel::Spec(spec) => Ok(spec.instantiate_tdm_window(geom, data_law)),
            ClassifierSel::ThresholdDb { t1_db, t2_db } => {
                Ok(TdmWindow { t1_db: *t1_db, t2_db: *t2_db })
            }
            ClassifierSel::MlTable { .. } => Err(Error::Config(
                "classifier = ml is not applicable to the TDM detection problem".into(),
            )),
        }
    }
}

/// A fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub scheme: SchemeSel,
    /// beta (TDM) or p_t (two-way).
    pub sched_param: f64,
    pub geometry: GeometryConfig,
    pub data_law: PowerDistribution,
    pub feedback_law: PowerDistribution,
    pub channel: ChannelConfig,
    pub fec: FecMode,
    pub classifier: ClassifierSel,
    pub seed: u64,
    pub frames: u64,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub steps: usize,
    pub placement: Placement,
    pub grid: SearchGrid,
    pub trace_path: Option<PathBuf>,
    /// Every resolved key/value pair, defaults included.
    pub echo: BTreeMap<String, String>,
}

/// Raw key/value store with consumption tracking.
struct Raw {
    values: BTreeMap<String, String>,
    consumed: BTreeSet<String>,
    echo: BTreeMap<String, String>,
}

impl Raw {
    fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "config line {}: expected 'key = value', got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if values.insert(key.clone(), value).is_some() {
                return Err(Error::Config(format!("config key {key} set more than once")));
            }
        }
        Ok(Self { values, consumed: BTreeSet::new(), echo: BTreeMap::new() })
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    /// Raw string for `key`, or `default` when absent. Either way the
    /// resolved value lands in the echo map.
    fn take(&mut self, key: &str, default: &str) -> String {
        self.consumed.insert(key.to_string());
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.echo.insert(key.to_string(), v.clone());
        v
    }

    /// Like `take`, but absent keys stay absent (no default recorded).
    fn take_opt(&mut self, key: &str) -> Option<String> {
        self.consumed.insert(key.to_string());
        let v = self.values.get(key).cloned();
        if let Some(v) = &v {
            self.echo.insert(key.to_string(), v.clone());
        }
        v
    }

    fn finish(self) -> Result<BTreeMap<String, String>> {
        let unknown: Vec<&String> =
            self.values.keys().filter(|k| !self.consumed.contains(*k)).collect();
        if !unknown.is_empty() {
            let list = unknown.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(", ");
            return Err(Error::Config(format!("unknown config keys: {list}")));
        }
        Ok(self.echo)
    }
}

fn parse_f64(key: &str, raw: &str) -> Result<f64> {
    match raw {
        "inf" | "+inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        "pi" => return Ok(std::f64::consts::PI),
        "pi/2" => return Ok(std::f64::consts::FRAC_PI_2),
        _ => {}
    }
    raw.parse::<f64>()
        .map_err(|_| Error::Config(format!("config key {key}: expected a number, got {raw:?}")))
}

fn parse_u64(key: &str, raw: &str) -> Result<u64> {
    raw.parse::<u64>()
        .map_err(|_| Error::Config(format!("config key {key}: expected an integer, got {raw:?}")))
}

fn parse_bool(key: &str, raw: &str) -> Result<bool> {
    match raw {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("config key {key}: expected true/false, got {raw:?}"))),
    }
}

fn parse_unit(key: &str, raw: &str) -> Result<f64> {
    let v = parse_f64(key, raw)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("config key {key}: {v} outside [0, 1]")));
    }
    Ok(v)
}

fn parse_list(key: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect::<Result<Vec<f64>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(Error::Config(format!("config key {key}: empty list")))
            } else {
                Ok(v)
            }
        })
}

fn parse_classifier_token(key: &str, token: &str) -> Result<ClassifierSpec> {
    let token = token.trim();
    if token == "no_erasure" {
        return Ok(ClassifierSpec::NoErasure);
    }
    if token == "blind" {
        return Ok(ClassifierSpec::Blind);
    }
    if token == "perfect" {
        return Ok(ClassifierSpec::Perfect);
    }
    if let Some(rest) = token.strip_prefix("window:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() == 2 {
            let spec = ClassifierSpec::Window {
                lo_frac: parse_f64(key, parts[0])?,
                hi_frac: parse_f64(key, parts[1])?,
            };
            spec.validate()?;
            return Ok(spec);
        }
    }
    Err(Error::Config(format!(
        "config key {key}: unknown classifier token {token:?} \
         (expected no_erasure, blind, perfect, or window:LO:HI)"
    )))
}

fn parse_law(raw: &mut Raw, prefix: &str, default_min: f64, default_max: f64) -> Result<PowerDistribution> {
    let levels_key = format!("{prefix}.levels");
    if raw.has(&levels_key) {
        let spec = raw.take(&levels_key, "");
        let mut levels = Vec::new();
        for item in spec.split(',') {
            let Some((level, prob)) = item.split_once(':') else {
                return Err(Error::Config(format!(
                    "config key {levels_key}: expected LEVEL:PROB pairs, got {item:?}"
                )));
            };
            levels.push((
                parse_f64(&levels_key, level.trim())?,
                parse_f64(&levels_key, prob.trim())?,
            ));
        }
        return PowerDistribution::levels(levels);
    }
    let min_key = format!("{prefix}.rho_min");
    let max_key = format!("{prefix}.rho_max");
    let rho_min = parse_f64(&min_key, &raw.take(&min_key, &default_min.to_string()))?;
    let rho_max = parse_f64(&max_key, &raw.take(&max_key, &default_max.to_string()))?;
    PowerDistribution::uniform(rho_min, rho_max)
}

/// Parse and validate a full configuration from file contents.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut raw = Raw::parse(text)?;

    // Scheme selection and the scheduling parameter. `beta` and `p_t`
    // are aliases bound to one scheme each; setting both is a conflict.
    if raw.has("beta") && raw.has("p_t") {
        return Err(Error::Config(
            "config keys beta and p_t conflict: beta selects the TDM scheme, p_t the two-way \
             scheme; set exactly one (or neither, with an explicit scheme key)"
                .into(),
        ));
    }
    let scheme = match raw.take_opt("scheme").as_deref() {
        Some("tdm") => SchemeSel::Tdm,
        Some("twoway") => SchemeSel::TwoWay,
        Some("both") => SchemeSel::Both,
        Some(other) => {
            return Err(Error::Config(format!(
                "config key scheme: expected tdm, twoway or both, got {other:?}"
            )))
        }
        None => {
            if raw.has("beta") {
                SchemeSel::Tdm
            } else {
                SchemeSel::TwoWay
            }
        }
    };
    if raw.has("beta") && scheme == SchemeSel::TwoWay {
        return Err(Error::Config("config key beta belongs to the TDM scheme".into()));
    }
    if raw.has("p_t") && scheme == SchemeSel::Tdm {
        return Err(Error::Config("config key p_t belongs to the two-way scheme".into()));
    }
    let sched_param = match scheme {
        SchemeSel::Tdm => parse_unit("beta", &raw.take("beta", "0.3"))?,
        _ => parse_unit("p_t", &raw.take("p_t", "0.5"))?,
    };

    let geometry = GeometryConfig::new(
        parse_f64("geometry.d_ab", &raw.take("geometry.d_ab", "1.0"))?,
        parse_f64("geometry.r_e", &raw.take("geometry.r_e", "5.0"))?,
        parse_f64("geometry.theta", &raw.take("geometry.theta", "pi/2"))?,
        parse_f64("geometry.alpha", &raw.take("geometry.alpha", "2.0"))?,
    )?;

    let data_law = parse_law(&mut raw, "power", 1.0, 10.0)?;
    let feedback_law = if raw.has("feedback.rho_min")
        || raw.has("feedback.rho_max")
        || raw.has("feedback.levels")
    {
        parse_law(&mut raw, "feedback", 1.0, 10.0)?
    } else {
        data_law.clone()
    };

    let channel = ChannelConfig {
        superposition: match raw.take("channel.superposition", "incoherent").as_str() {
            "incoherent" => SuperpositionMode::Incoherent,
            "coherent" => SuperpositionMode::Coherent,
            other => {
                return Err(Error::Config(format!(
                    "config key channel.superposition: expected incoherent or coherent, got {other:?}"
                )))
            }
        },
        wave_number: parse_f64("channel.wave_number", &raw.take("channel.wave_number", "0.0"))?,
        eve_noiseless: parse_bool(
            "channel.eve_noiseless",
            &raw.take("channel.eve_noiseless", "true"),
        )?,
        legit_noise_variance: parse_f64(
            "channel.noise_variance",
            &raw.take("channel.noise_variance", "1.0"),
        )?,
        silence_floor_db: parse_f64(
            "channel.silence_floor_db",
            &raw.take("channel.silence_floor_db", "-200.0"),
        )?,
    };
    channel.validate()?;

    let fec = match raw.take("fec.mode", "ideal").as_str() {
        "off" => FecMode::Off,
        "ideal" => FecMode::Ideal {
            snr_threshold: parse_f64(
                "fec.snr_threshold",
                &raw.take("fec.snr_threshold", "0.0"),
            )?,
        },
        other => {
            return Err(Error::Config(format!(
                "config key fec.mode: expected ideal or off, got {other:?}"
            )))
        }
    };

    let classifier = match raw.take("classifier", "blind").as_str() {
        "threshold" => ClassifierSel::ThresholdDb {
            t1_db: parse_f64("classifier.t1_db", &raw.take("classifier.t1_db", "-inf"))?,
            t2_db: parse_f64("classifier.t2_db", &raw.take("classifier.t2_db", "inf"))?,
        },
        "window" => {
            let spec = ClassifierSpec::Window {
                lo_frac: parse_unit(
                    "classifier.lo_frac",
                    &raw.take("classifier.lo_frac", "0.0"),
                )?,
                hi_frac: parse_unit(
                    "classifier.hi_frac",
                    &raw.take("classifier.hi_frac", "1.0"),
                )?,
            };
            spec.validate()?;
            ClassifierSel::Spec(spec)
        }
        "ml" => {
            let path = raw.take_opt("classifier.table").ok_or_else(|| {
                Error::Config("classifier = ml requires classifier.table = PATH".into())
            })?;
            let table = std::fs::read_to_string(&path).map_err(|e| {
                Error::Config(format!("classifier.table: cannot read {path}: {e}"))
            })?;
            ClassifierSel::MlTable { table }
        }
        token => ClassifierSel::Spec(parse_classifier_token("classifier", token)?),
    };

    let seed = parse_u64("seed", &raw.take("seed", "1"))?;
    let frames = parse_u64("frames", &raw.take("frames", "1000000"))?;
    if frames == 0 {
        return Err(Error::Config("config key frames: must be >= 1".into()));
    }

    let ratio_min = parse_f64("sweep.ratio_min", &raw.take("sweep.ratio_min", "0.1"))?;
    let ratio_max = parse_f64("sweep.ratio_max", &raw.take("sweep.ratio_max", "1.0"))?;
    let steps = parse_u64("sweep.steps", &raw.take("sweep.steps", "10"))? as usize;
    if steps == 0 {
        return Err(Error::Config("config key sweep.steps: must be >= 1".into()));
    }
    let placement = match raw.take("sweep.placement", "tx_at_min").as_str() {
        "tx_at_min" => Placement::TxAtMin,
        "tx_at_max" => Placement::TxAtMax,
        other => {
            return Err(Error::Config(format!(
                "config key sweep.placement: expected tx_at_min or tx_at_max, got {other:?}"
            )))
        }
    };

    let grid = parse_grid(&mut raw)?;
    let trace_path = raw.take_opt("sim.trace").map(PathBuf::from);

    let echo = raw.finish()?;
    Ok(RunConfig {
        scheme,
        sched_param,
        geometry,
        data_law,
        feedback_law,
        channel,
        fec,
        classifier,
        seed,
        frames,
        ratio_min,
        ratio_max,
        steps,
        placement,
        grid,
        trace_path,
        echo,
    })
}

fn parse_grid(raw: &mut Raw) -> Result<SearchGrid> {
    let default = SearchGrid::default_grid();

    let sched = if raw.has("grid.sched") {
        let vals = parse_list("grid.sched", &raw.take("grid.sched", ""))?;
        for v in &vals {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::Config(format!("config key grid.sched: {v} outside [0, 1]")));
            }
        }
        vals
    } else {
        let n = parse_u64("grid.sched_points", &raw.take("grid.sched_points", "21"))? as usize;
        if n == 0 {
            return Err(Error::Config("config key grid.sched_points: must be >= 1".into()));
        }
        randsec::optimizer::linspace(0.0, 1.0, n)
    };

    let thetas = if raw.has("grid.thetas") {
        parse_list("grid.thetas", &raw.take("grid.thetas", ""))?
    } else {
        let n = parse_u64("grid.theta_points", &raw.take("grid.theta_points", "19"))? as usize;
        if n == 0 {
            return Err(Error::Config("config key grid.theta_points: must be >= 1".into()));
        }
        randsec::optimizer::linspace(0.0, std::f64::consts::PI, n)
    };

    let laws = if raw.has("grid.rho_max_values") {
        let rho_min = parse_f64("grid.rho_min", &raw.take("grid.rho_min", "1.0"))?;
        parse_list("grid.rho_max_values", &raw.take("grid.rho_max_values", ""))?
            .into_iter()
            .map(|hi| PowerDistribution::uniform(rho_min, hi))
            .collect::<Result<Vec<_>>>()?
    } else {
        default.laws.clone()
    };

    // Feedback laws are uniform over one decade, [mu, 10*mu] per scale
    // value. With grid.feedback_relative (the default) the scales are
    // received jam-to-data power ratios at Eve; otherwise they are
    // absolute transmit powers.
    let feedback_laws = if raw.has("grid.feedback_scales") {
        parse_list("grid.feedback_scales", &raw.take("grid.feedback_scales", ""))?
            .into_iter()
            .map(|mu| PowerDistribution::uniform(mu, 10.0 * mu))
            .collect::<Result<Vec<_>>>()?
    } else {
        default.feedback_laws.clone()
    };
    let feedback_relative = parse_bool(
        "grid.feedback_relative",
        &raw.take("grid.feedback_relative", if default.feedback_relative { "true" } else { "false" }),
    )?;

    let classifiers = if raw.has("grid.classifiers") {
        raw.take("grid.classifiers", "")
            .split(',')
            .map(|t| parse_classifier_token("grid.classifiers", t))
            .collect::<Result<Vec<_>>>()?
    } else {
        default.classifiers.clone()
    };

    let quad = QuadOpts {
        solo_points: parse_u64(
            "quad.solo_points",
            &raw.take("quad.solo_points", &default.quad.solo_points.to_string()),
        )? as usize,
        sum_points: parse_u64(
            "quad.sum_points",
            &raw.take("quad.sum_points", &default.quad.sum_points.to_string()),
        )? as usize,
        ..default.quad
    };

    Ok(SearchGrid { sched, feedback_laws, feedback_relative, laws, thetas, classifiers, quad })
}
