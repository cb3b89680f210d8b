//! Acceptance suite: each test checks one shipped claim end to end and
//! prints a PASS line (run with `--nocapture` to see them).

use hmsfn::channel::sfn_gain;
use hmsfn::cli::{parse_comparison_csv, run, Cli, BUNDLED_QPSK_THRESHOLDS};
use hmsfn::link::{
    effective_esn0, parse_reference_csv, required_cnr_global, required_cnr_local,
    solve_equal_coverage, threshold_table, uncoded_ber_exact, Stream,
};
use hmsfn::sim::{
    run_ber_experiment, run_detection_experiment, run_estimation_experiment, ConfidenceConfig,
    FrameConfig, GainsSpec, HpFeed, Knowledge, Mode, NoiseReference, Scenario,
};
use hmsfn::units::{db_to_linear, linear_to_db};
use hmsfn::Alpha;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tolerance for a value printed with `decimals` decimal places: half an
/// ulp of the printed figure. The reference tables print most cells with
/// one decimal (±0.05) but round a few cells to whole dB (±0.5); the
/// 1/5-rate global cell (−2.927 dB printed as −3) is the one entry where
/// the looser integer tolerance actually matters.
fn matches_printed(computed: f64, printed: f64, decimals: i32) -> bool {
    let tol = 0.5 * 10f64.powi(-decimals) + 1e-9;
    (computed - printed).abs() <= tol
}

fn bundled_reference() -> Vec<(hmsfn::pilots::CodeRate, f64)> {
    parse_reference_csv(BUNDLED_QPSK_THRESHOLDS).unwrap()
}

#[test]
fn a1_threshold_table_alpha2_reproduces_reference_columns() {
    let table = threshold_table(&bundled_reference(), Alpha::new(2.0).unwrap()).unwrap();
    let printed_global: [(f64, i32); 8] = [
        (-3.0, 0),
        (-2.4, 1),
        (-1.8, 1),
        (-1.0, 0),
        (0.0, 0),
        (1.1, 1),
        (2.6, 1),
        (5.2, 1),
    ];
    let printed_local = [6.4, 6.9, 7.5, 8.2, 9.1, 10.1, 11.4, 13.5];
    for (i, row) in table.iter().enumerate() {
        let (pg, dg) = printed_global[i];
        assert!(
            matches_printed(row.global_cn_db, pg, dg),
            "row {} ({}): global {:.4} vs printed {pg}",
            i,
            row.code_rate,
            row.global_cn_db
        );
        let local = row.local_cn_db.unwrap();
        assert!(
            matches_printed(local, printed_local[i], 1),
            "row {} ({}): local {:.4} vs printed {}",
            i,
            row.code_rate,
            local,
            printed_local[i]
        );
        println!(
            "  {}: global {:>7.3} (printed {pg:>5}), local {:>7.3} (printed {:>5})",
            row.code_rate, row.global_cn_db, local, printed_local[i]
        );
    }
    println!("acceptance 1/9 PASS — required-C/N table at alpha 2 matches the reference columns");
}

#[test]
fn a2_theory_vs_published_simulation_within_0_2_db() {
    let table = threshold_table(&bundled_reference(), Alpha::new(2.0).unwrap()).unwrap();
    let published = parse_comparison_csv(include_str!("../data/published_sim_alpha2.csv")).unwrap();
    let mut max_delta: f64 = 0.0;
    for (row, sim) in table.iter().zip(&published) {
        assert_eq!(row.code_rate, sim.code_rate);
        let dg = (row.global_cn_db - sim.sim_global_cn_db).abs();
        assert!(
            dg <= 0.2 + 1e-9,
            "{}: global delta {dg:.3} dB exceeds 0.2",
            row.code_rate
        );
        max_delta = max_delta.max(dg);
        if let Some(sim_local) = sim.sim_local_cn_db {
            let dl = (row.local_cn_db.unwrap() - sim_local).abs();
            assert!(
                dl <= 0.2 + 1e-9,
                "{}: local delta {dl:.3} dB exceeds 0.2",
                row.code_rate
            );
            max_delta = max_delta.max(dl);
        }
    }
    println!(
        "acceptance 2/9 PASS — theory vs published simulation, max delta {max_delta:.3} dB <= 0.2"
    );
}

fn run_cli_json(args: &[&str]) -> serde_json::Value {
    let cli = Cli::try_parse_from(args).unwrap();
    let mut buf = Vec::new();
    run(cli, &mut buf).unwrap();
    serde_json::from_slice(&buf).unwrap()
}

#[test]
fn a3_configuration_tables_and_rates() {
    // alpha = 2 configuration: 5.2 / 6.9 dB required C/N
    let t2 = run_cli_json(&["hmsfn", "table", "--alpha", "2", "--json"]);
    let rows = t2["rows"].as_array().unwrap();
    let r23 = &rows[7];
    let r29 = &rows[1];
    assert_eq!(r23["code_rate"], "2/3");
    assert_eq!(r29["code_rate"], "2/9");
    let global_23 = r23["global_cn_db"].as_f64().unwrap();
    let local_29 = r29["local_cn_db"].as_f64().unwrap();
    assert!((global_23 - 5.2).abs() <= 0.05);
    assert!((local_29 - 6.9).abs() <= 0.05);

    // degradation against the 3.5 dB baseline
    let global_degradation = global_23 - 3.5;
    let local_excess = local_29 - 3.5;
    assert!((global_degradation - 1.7).abs() <= 0.05);
    assert!((local_excess - 3.4).abs() <= 0.05);

    // alpha = 1.6 configuration: 5.85 / 5.8 dB
    let t16 = run_cli_json(&["hmsfn", "table", "--alpha", "1.6", "--json"]);
    let rows = t16["rows"].as_array().unwrap();
    let g = rows[7]["global_cn_db"].as_f64().unwrap();
    let l = rows[1]["local_cn_db"].as_f64().unwrap();
    assert!((g - 5.85).abs() <= 0.05, "alpha 1.6 global {g}");
    assert!((l - 5.8).abs() <= 0.05, "alpha 1.6 local {l}");

    // user data rates: 4.937 / 1.646 Mbit/s within 0.1%
    let hp = run_cli_json(&["hmsfn", "rate", "--code-rate", "2/3", "--json"]);
    let lp = run_cli_json(&["hmsfn", "rate", "--code-rate", "2/9", "--json"]);
    let hp_rate = hp["adjusted_bps"].as_f64().unwrap();
    let lp_rate = lp["adjusted_bps"].as_f64().unwrap();
    assert!(
        (hp_rate - 4.937e6).abs() / 4.937e6 < 1e-3,
        "hp rate {hp_rate}"
    );
    assert!(
        (lp_rate - 1.646e6).abs() / 1.646e6 < 1e-3,
        "lp rate {lp_rate}"
    );

    println!(
        "acceptance 3/9 PASS — config tables: alpha 2 → {global_23:.3}/{local_29:.3} dB \
         (degradation {global_degradation:.2}/{local_excess:.2} dB), alpha 1.6 → {g:.3}/{l:.3} dB, \
         rates {:.4}/{:.4} Mbit/s",
        hp_rate / 1e6,
        lp_rate / 1e6
    );
}

#[test]
fn a4_equal_coverage_solver() {
    let g = db_to_linear(3.5);
    let l = db_to_linear(-3.1);
    let alpha = solve_equal_coverage(g, l).unwrap();
    assert!(
        alpha.value() >= 1.58 && alpha.value() <= 1.64,
        "alpha {} outside [1.58, 1.64]",
        alpha.value()
    );
    let cg = required_cnr_global(g, alpha).unwrap();
    let cl = required_cnr_local(l, alpha).unwrap();
    assert!(
        (cg - cl).abs() / cg < 1e-9,
        "requirements differ: {cg} vs {cl}"
    );
    println!(
        "acceptance 4/9 PASS — equal-coverage alpha {:.4}, common C/N {:.3} dB",
        alpha.value(),
        linear_to_db(cg)
    );
}

#[test]
fn a5_identity_and_inversions_over_random_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    for _ in 0..10_000 {
        let cnr = 10f64.powf(rng.random::<f64>() * 4.0 - 2.0); // 0.01 .. 100
        let alpha = Alpha::new(1.0 + rng.random::<f64>() * 63.0).unwrap();
        let s = effective_esn0(cnr, alpha);
        let identity = s.global + s.local + s.global * s.local;
        assert!(
            (identity - cnr).abs() / cnr < 1e-9,
            "identity violated at cnr={cnr}, alpha={}",
            alpha.value()
        );
        let cg = required_cnr_global(s.global, alpha).unwrap();
        let cl = required_cnr_local(s.local, alpha).unwrap();
        assert!((cg - cnr).abs() / cnr < 1e-9);
        assert!((cl - cnr).abs() / cnr < 1e-9);
    }
    println!(
        "acceptance 5/9 PASS — power-split identity and inversions hold to 1e-9 over 10^4 points"
    );
}

fn mc_scenario(alpha: Alpha, seed: u64) -> Scenario {
    Scenario {
        mode: Mode::TerrestrialOnly,
        alpha,
        cnr_sweep_db: vec![4.0, 8.0, 12.0],
        symbols_per_point: 1_000_000,
        seed,
        gains: GainsSpec::default(),
        averaging_window: 8,
        detection_threshold: 0.05,
        channel_knowledge: Knowledge::Genie,
        hp_feed: HpFeed::Decided,
        local_content: true,
        noise_reference: NoiseReference::Composite,
        trials_per_point: 1,
        frame: FrameConfig::default(),
        confidence: ConfidenceConfig::default(),
    }
}

#[test]
fn a6_monte_carlo_matches_exact_uncoded_ber() {
    for (alpha_v, seed) in [(1.0, 61), (2.0, 62), (4.0, 63)] {
        let alpha = Alpha::new(alpha_v).unwrap();
        let result = run_ber_experiment(&mc_scenario(alpha, seed)).unwrap();
        for p in &result.points {
            let cnr = db_to_linear(p.cnr_db);
            let hp_th = uncoded_ber_exact(cnr, alpha, Stream::Global).unwrap();
            let lp_th = uncoded_ber_exact(cnr, alpha, Stream::Local).unwrap();
            let hp_z = (p.hp_errors as f64 - p.hp_bits as f64 * hp_th)
                / (p.hp_bits as f64 * hp_th * (1.0 - hp_th)).sqrt();
            let lp_z = (p.lp_errors.unwrap() as f64 - p.lp_bits.unwrap() as f64 * lp_th)
                / (p.lp_bits.unwrap() as f64 * lp_th * (1.0 - lp_th)).sqrt();
            assert!(p.hp_bits >= 2_000_000, "need >= 1e6 symbols per point");
            assert!(
                hp_z.abs() < 3.0,
                "alpha {alpha_v}, {} dB: HP z = {hp_z:.2} (mc {:.3e} vs exact {hp_th:.3e})",
                p.cnr_db,
                p.hp_ber()
            );
            assert!(
                lp_z.abs() < 3.0,
                "alpha {alpha_v}, {} dB: LP z = {lp_z:.2} (mc {:.3e} vs exact {lp_th:.3e})",
                p.cnr_db,
                p.lp_ber().unwrap()
            );
            println!(
                "  alpha {alpha_v}, cnr {:>4.1} dB: hp z {hp_z:+.2}, lp z {lp_z:+.2}",
                p.cnr_db
            );
        }
    }
    println!("acceptance 6/9 PASS — Monte Carlo BER within 3σ of the exact uncoded forms");
}

#[test]
fn a7_satellite_helps_global_without_touching_local() {
    // Matched terrestrial gain, matched absolute noise (terrestrial-only
    // reference), matched symbol count. The local demodulator is fed the
    // transmitted HP truth in both arms: the local-stream claim concerns
    // its own decision distance, conditioned on the global content being
    // decoded, and the satellite's HP improvement would otherwise leak
    // into the LP comparison through fewer residual errors.
    let alpha = Alpha::new(2.0).unwrap();
    let mut terr = mc_scenario(alpha, 71);
    terr.cnr_sweep_db = vec![6.0, 9.0];
    terr.hp_feed = HpFeed::Genie;
    terr.noise_reference = NoiseReference::TerrestrialOnly;
    let mut hybrid = terr.clone();
    hybrid.mode = Mode::Hybrid;
    hybrid.seed = 72;
    // equal satellite power in phase quadrature: |1+j|² = 2 realizes the
    // independent-path power sum exactly
    hybrid.gains.sat_power_db = 0.0;
    hybrid.gains.sat_phase_deg = Some(90.0);

    let rt = run_ber_experiment(&terr).unwrap();
    let rh = run_ber_experiment(&hybrid).unwrap();
    let expected_gain_db = linear_to_db(sfn_gain(1.0, 1.0).unwrap());
    assert!((expected_gain_db - 3.0103).abs() < 1e-3);

    for (pt, ph) in rt.points.iter().zip(&rh.points) {
        assert_eq!(pt.cnr_db, ph.cnr_db);
        assert_eq!(pt.hp_bits, ph.hp_bits, "matched symbol counts");

        // local stream: identical performance within overlapping 95% CIs
        let (tl, th) = pt.lp_wilson95().unwrap();
        let (hl, hh) = ph.lp_wilson95().unwrap();
        assert!(
            tl < hh && hl < th,
            "{} dB: LP CIs must overlap: terr [{tl:.5}, {th:.5}] vs hybrid [{hl:.5}, {hh:.5}]",
            pt.cnr_db
        );

        // global stream: the hybrid arm is strictly better (separated CIs)
        let (gtl, _gth) = pt.hp_wilson95();
        let (_ghl, ghh) = ph.hp_wilson95();
        assert!(
            ghh < gtl,
            "{} dB: hybrid HP must beat terrestrial HP ({:.4e} vs {:.4e})",
            pt.cnr_db,
            ph.hp_ber(),
            pt.hp_ber()
        );

        // the improvement matches the SFN-gain scale: the C/N boost that
        // maps the terrestrial-only analytic curve onto the measured hybrid
        // BER sits in a band around 1 + P_sat/P_terr = 3.01 dB
        let cnr = db_to_linear(pt.cnr_db);
        let target = ph.hp_ber();
        let (mut lo, mut hi) = (1.0f64, 16.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let ber = uncoded_ber_exact(cnr * mid, alpha, Stream::Global).unwrap();
            if ber > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let boost_db = linear_to_db(0.5 * (lo + hi));
        assert!(
            (2.0..=5.0).contains(&boost_db),
            "{} dB: effective boost {boost_db:.2} dB outside [2, 5]",
            pt.cnr_db
        );
        println!(
            "  cnr {:>4.1} dB: hp {:.3e} → {:.3e} (boost {boost_db:.2} dB, Eq-gain {expected_gain_db:.2} dB), \
             lp {:.4} vs {:.4}",
            pt.cnr_db,
            pt.hp_ber(),
            ph.hp_ber(),
            pt.lp_ber().unwrap(),
            ph.lp_ber().unwrap()
        );
    }
    println!(
        "acceptance 7/9 PASS — satellite leaves the local stream untouched and boosts the global stream"
    );
}

#[test]
fn a8_estimator_suite() {
    // noiseless estimation is exact
    let mut sc = mc_scenario(Alpha::new(2.0).unwrap(), 81);
    sc.mode = Mode::Hybrid;
    sc.cnr_sweep_db = vec![f64::INFINITY];
    sc.trials_per_point = 4;
    let pts = run_estimation_experiment(&sc, &[0.0]).unwrap();
    assert!(
        pts[0].msq_global <= 1e-24 && pts[0].msq_local <= 1e-24,
        "noiseless estimation must be exact to 1e-12: {pts:?}"
    );

    // error statistics are invariant across satellite power at fixed noise
    sc.cnr_sweep_db = vec![10.0];
    sc.trials_per_point = 40;
    let pts = run_estimation_experiment(&sc, &[0.0, 3.0, 6.0, 10.0]).unwrap();
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let (a, b) = (pts[i], pts[j]);
            assert!(
                a.msq_global_ci95.0 < b.msq_global_ci95.1
                    && b.msq_global_ci95.0 < a.msq_global_ci95.1,
                "global msq CIs must overlap across satellite powers: {a:?} vs {b:?}"
            );
            assert!(
                a.msq_local_ci95.0 < b.msq_local_ci95.1 && b.msq_local_ci95.0 < a.msq_local_ci95.1,
                "local msq CIs must overlap across satellite powers: {a:?} vs {b:?}"
            );
        }
    }
    for p in &pts {
        println!(
            "  sat {:>4.1} dB: msq_g {:.4e}, msq_l {:.4e}",
            p.sat_power_db, p.msq_global, p.msq_local
        );
    }

    // satellite-only: zero local estimate noiselessly, no detections
    let mut sat = mc_scenario(Alpha::INFINITE, 82);
    sat.mode = Mode::SatelliteOnly;
    sat.cnr_sweep_db = vec![f64::INFINITY];
    sat.symbols_per_point = 40_000;
    let r = run_ber_experiment(&sat).unwrap();
    assert_eq!(r.points[0].msq_err_local, 0.0);
    assert_eq!(r.points[0].detection_rate, 0.0);

    // false-alarm rate below 1% at 0 dB C/N with default threshold/window
    let mut fa = mc_scenario(Alpha::INFINITE, 83);
    fa.mode = Mode::SatelliteOnly;
    fa.cnr_sweep_db = vec![0.0];
    fa.trials_per_point = 250;
    let det = run_detection_experiment(&fa).unwrap();
    assert!(
        det[0].false_alarm_rate < 0.01,
        "false-alarm rate {} at 0 dB",
        det[0].false_alarm_rate
    );
    println!(
        "  false-alarm rate at 0 dB: {} over {} trials",
        det[0].false_alarm_rate, det[0].trials
    );
    println!(
        "acceptance 8/9 PASS — estimator exactness, satellite-power invariance, detection floor"
    );
}

#[test]
fn a9_modified_pilot_exactness() {
    use hmsfn::pilots::{modify_continual_pilot, modify_scattered_pair, pilot_power_factor};
    use hmsfn::Complex64;

    // golden vectors: vertical amplitude 1/(alpha+1) with alternating or
    // opposing polarity, frozen to the exact f64 values
    let cases: [(f64, f64); 4] = [
        (1.0, 0.5),
        (1.6, 0.3846153846153846),
        (2.0, 0.3333333333333333),
        (4.0, 0.2),
    ];
    for (alpha_v, vertical) in cases {
        let alpha = Alpha::new(alpha_v).unwrap();
        for p in [1.0, -1.0] {
            assert_eq!(
                modify_continual_pilot(p, 0, alpha),
                Complex64::new(p, p * vertical),
                "continual i=0, alpha {alpha_v}"
            );
            assert_eq!(
                modify_continual_pilot(p, 1, alpha),
                Complex64::new(p, -p * vertical),
                "continual i=1, alpha {alpha_v}"
            );
            let (first, second) = modify_scattered_pair(p, alpha);
            assert_eq!(first, Complex64::new(p, p * vertical));
            assert_eq!(second, Complex64::new(p, -p * vertical));
        }
        let factor = pilot_power_factor(alpha);
        let expected = 1.0 + 1.0 / ((alpha_v + 1.0) * (alpha_v + 1.0));
        assert!((factor - expected).abs() < 1e-12);
        let measured = modify_continual_pilot(1.0, 0, alpha).norm_sqr();
        assert!((measured - factor).abs() < 1e-12);
    }

    // polarity opposition is universal across alpha
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..2_000 {
        let alpha = Alpha::new(1.0 + rng.random::<f64>() * 500.0).unwrap();
        let p = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let (first, second) = modify_scattered_pair(p, alpha);
        assert_eq!(first.im, -second.im);
        assert_eq!(first.re, second.re);
    }
    println!(
        "acceptance 9/9 PASS — modified pilots bit-exact, power factor exact, polarity universal"
    );
}
