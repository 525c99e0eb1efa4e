//! Independent scalar oracles for the closed-form pieces, plus
//! analytic-vs-empirical equivalence on randomized configurations.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use randsec::montecarlo::{compare_tdm, compare_twoway, simulate_tdm, simulate_twoway};
use randsec::profile::{misclass_profile, tdm_detection_profile, ProfileMethod};
use randsec::rates::{tdm_bounds, twoway_bounds};
use randsec::{
    ChannelConfig, EveClassifier, EventRow, FecMode, GeometryConfig, MisclassProfile,
    PowerDistribution, SchemeConfig, SimConfig, TdmDetectionProfile, TdmWindow,
};

/// Independent binary entropy (natural-log based, unlike the library).
fn h2(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let ln2 = std::f64::consts::LN_2;
    -(p * p.ln() + (1.0 - p) * (1.0 - p).ln()) / ln2
}

/// Standard normal CDF by Simpson integration of the density.
fn phi_quadrature(x: f64) -> f64 {
    let lo = -12.0f64;
    let n = 40_000usize; // even
    let h = (x - lo) / n as f64;
    let dens = |t: f64| (-t * t / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = dens(lo) + dens(x);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * dens(lo + k as f64 * h);
    }
    acc * h / 3.0
}

#[test]
fn phi_matches_quadrature_oracle() {
    for x in [-2.5, -1.0, 0.0, 0.5, 1.0, 1.6449, 2.5] {
        let oracle = phi_quadrature(x);
        assert!(
            (randsec::phi(x) - oracle).abs() < 1e-9,
            "phi({x}) = {} vs oracle {oracle}",
            randsec::phi(x)
        );
    }
    assert!((randsec::phi(1.6449) - 0.95).abs() < 1e-4);
}

#[test]
fn tdm_breakdown_matches_scalar_chain() {
    // Hand evaluation of the TDM bound formulas at beta = 0.3 with the
    // fixed detection profile (p_m = 0.5, p_f = 0.1, p_e|m = 0.5).
    let beta = 0.3;
    let r_m = (1.0 - beta) * 1.0; // ideal FEC
    let alpha_e = beta * (1.0 - 0.5) + (1.0 - beta) * 0.1;
    let p_e_e = beta * 0.5 * 0.5 / (1.0 - alpha_e);
    let r_e = (1.0 - alpha_e) * (1.0 - h2(p_e_e));
    let chain = r_m - r_e;
    assert!((chain - 0.2762).abs() < 1e-4, "chain {chain}");

    let geom = GeometryConfig::new(1.0, 5.0, 1.0, 2.0).unwrap();
    let prof = TdmDetectionProfile { p_m: 0.5, p_f: 0.1, p_e_given_m: 0.5 };
    let b = tdm_bounds(beta, &prof, &geom, 1.0, FecMode::default()).unwrap();
    assert!((b.r_s - chain).abs() < 1e-12);
}

#[test]
fn twoway_breakdown_matches_scalar_chain() {
    // Hand evaluation of the two-way bound for the blind classifier at the
    // symmetric geometry with p_t = 0.5.
    let p_t: f64 = 0.5;
    let both = p_t * p_t;
    let solo = p_t * (1.0 - p_t);
    let r_m = solo;
    let d_a = both * 0.5 + solo * 0.5 + solo * 0.5;
    let p_e_ea = both * 0.5 * 0.25 + 0.5 * solo * 0.5;
    let r_ea = d_a * (1.0 - h2(p_e_ea / d_a));
    let chain = r_m - r_ea;
    assert!((d_a - 0.375).abs() < 1e-15);
    assert!((p_e_ea - 0.09375).abs() < 1e-15);
    assert!((chain - 0.17923).abs() < 1e-5, "chain {chain}");

    // Same value through the full profile pipeline.
    let geom = GeometryConfig::new(1.0, 5.0, std::f64::consts::FRAC_PI_2, 2.0).unwrap();
    let dist = PowerDistribution::uniform(1.0, 10.0).unwrap();
    let prof = misclass_profile(
        &geom,
        &dist,
        &EveClassifier::Blind,
        &ChannelConfig::default(),
        ProfileMethod::Analytic,
    )
    .unwrap();
    let b = twoway_bounds(p_t, &prof, &geom, 1.0, FecMode::default()).unwrap();
    assert!((b.r_s - chain).abs() < 1e-3);

    // And directly on the exact blind profile.
    let half = EventRow { to_a: 0.5, to_b: 0.5, to_other: 0.0 };
    let exact = MisclassProfile {
        concurrent: half,
        alice_solo: half,
        bob_solo: half,
        err_concurrent_to_a: 0.25,
        err_concurrent_to_b: 0.25,
    };
    let b = twoway_bounds(p_t, &exact, &geom, 1.0, FecMode::default()).unwrap();
    assert!((b.r_s - chain).abs() < 1e-12);
}

#[test]
fn distance_ratio_mapping_matches_reference_numbers() {
    let r2 = randsec::distance_ratio_from_power_gap(2.0, 2.0);
    let r19 = randsec::distance_ratio_from_power_gap(19.0, 2.0);
    assert!((0.785..=0.795).contains(&r2), "2 dB -> {r2}");
    assert!((0.108..=0.115).contains(&r19), "19 dB -> {r19}");
}

fn random_geometry(rng: &mut ChaCha12Rng) -> GeometryConfig {
    let d_ab = 1.0 + rng.gen::<f64>() * 3.0;
    let r_e = d_ab + rng.gen::<f64>() * 6.0;
    let theta = rng.gen::<f64>() * std::f64::consts::PI;
    GeometryConfig::new(d_ab, r_e, theta, 2.0).unwrap()
}

fn random_law(rng: &mut ChaCha12Rng) -> PowerDistribution {
    let lo = 0.5 + rng.gen::<f64>();
    let hi = lo * (2.0 + rng.gen::<f64>() * 20.0);
    PowerDistribution::uniform(lo, hi).unwrap()
}

#[test]
fn twoway_analytic_profiles_match_million_symbol_runs() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x0721);
    for trial in 0..5 {
        let geometry = random_geometry(&mut rng);
        let data_law = random_law(&mut rng);
        let p_t = 0.2 + rng.gen::<f64>() * 0.6;
        let classifier = if trial % 2 == 0 {
            EveClassifier::Blind
        } else {
            let (d_ae, d_be) = geometry.distances();
            let sa = data_law.received_at(d_ae, geometry.alpha).support_db();
            let sb = data_law.received_at(d_be, geometry.alpha).support_db();
            let lo = sa.0.min(sb.0);
            let hi = sa.1.max(sb.1);
            let t1 = lo + rng.gen::<f64>() * 0.2 * (hi - lo);
            let t2 = hi - rng.gen::<f64>() * 0.2 * (hi - lo);
            EveClassifier::threshold_from_geometry(&geometry, &data_law, t1, t2).unwrap()
        };
        let cfg = SimConfig {
            frames: 1_000_000,
            seed: 0xACE0 + trial as u64,
            geometry,
            channel: ChannelConfig::default(),
            data_law: data_law.clone(),
            fec: FecMode::default(),
            scheme: SchemeConfig::TwoWay { p_t, classifier: classifier.clone() },
        };
        let (emp, emp_rates) = simulate_twoway(&cfg).unwrap();
        let analytic = misclass_profile(
            &cfg.geometry,
            &data_law,
            &classifier,
            &cfg.channel,
            ProfileMethod::Analytic,
        )
        .unwrap();
        let report = compare_twoway(&analytic, &emp, 3.0);
        assert!(
            report.pass_fraction() >= 0.99,
            "trial {trial}: pass fraction {}, max z {}",
            report.pass_fraction(),
            report.max_z()
        );
        let ana_rates =
            twoway_bounds(p_t, &analytic, &cfg.geometry, data_law.rho_min(), cfg.fec).unwrap();
        assert!(
            (ana_rates.r_s - emp_rates.r_s).abs() < 0.01,
            "trial {trial}: analytic {} vs empirical {}",
            ana_rates.r_s,
            emp_rates.r_s
        );
    }
}

#[test]
fn tdm_analytic_profiles_match_million_symbol_runs() {
    let mut rng = ChaCha12Rng::seed_from_u64(0x1337);
    for trial in 0..5 {
        let geometry = random_geometry(&mut rng);
        let data_law = random_law(&mut rng);
        let feedback_law = random_law(&mut rng);
        let beta = 0.15 + rng.gen::<f64>() * 0.6;
        let window = if trial % 2 == 0 {
            TdmWindow::no_erasure()
        } else {
            let (lo, hi) = data_law.received_at(geometry.d_ae(), geometry.alpha).support_db();
            TdmWindow {
                t1_db: lo + rng.gen::<f64>() * 0.2 * (hi - lo),
                t2_db: hi + rng.gen::<f64>() * 0.3 * (hi - lo),
            }
        };
        let cfg = SimConfig {
            frames: 1_000_000,
            seed: 0xBEE0 + trial as u64,
            geometry,
            channel: ChannelConfig::default(),
            data_law: data_law.clone(),
            fec: FecMode::default(),
            scheme: SchemeConfig::Tdm { beta, feedback_law: feedback_law.clone(), window },
        };
        let (emp, emp_rates) = simulate_tdm(&cfg).unwrap();
        let analytic = tdm_detection_profile(
            &cfg.geometry,
            &data_law,
            &feedback_law,
            &window,
            &cfg.channel,
            ProfileMethod::Analytic,
        )
        .unwrap();
        let report = compare_tdm(&analytic, &emp, 3.0);
        assert!(
            report.pass_fraction() >= 0.99,
            "trial {trial}: pass fraction {}, max z {}",
            report.pass_fraction(),
            report.max_z()
        );
        let ana_rates =
            tdm_bounds(beta, &analytic, &cfg.geometry, data_law.rho_min(), cfg.fec).unwrap();
        assert!(
            (ana_rates.r_s - emp_rates.r_s).abs() < 0.01,
            "trial {trial}: analytic {} vs empirical {}",
            ana_rates.r_s,
            emp_rates.r_s
        );
    }
}
