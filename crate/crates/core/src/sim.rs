//! Scenario-driven Monte Carlo experiments.
//!
//! A [`Scenario`] describes one reception situation: which transmitters are
//! present, the hierarchy parameter, path gains, the C/N sweep and the
//! receiver knobs. Experiments are bit-exact reproducible: every random
//! draw comes from a ChaCha stream keyed by (seed, sweep point, batch,
//! purpose), batches are independent work units, and results merge by
//! summing counts.
//!
//! Noise is calibrated against the composite received signal power measured
//! over the generated frame (data plus pilots), so the extra power of the
//! modified pilots raises the reference exactly as it would on air. The
//! `terrestrial_only` noise reference instead fixes the noise against the
//! terrestrial composite alone, which keeps the noise power identical when
//! comparing hybrid and terrestrial-only runs.

use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{add_awgn, combine_hybrid, NoiseSpec, PathGains};
use crate::constellation::{qpsk_symbol, Alpha};
use crate::pilots::{Cell, FrameError, FrameLayout, FrameParams, GuardInterval, PilotSpec};
use crate::receiver::{
    aggregate_estimate, demod_global, demod_local, detect_local, estimate_per_carrier,
    ChannelEstimate, ReceiverError, DEFAULT_AVERAGING_WINDOW, DEFAULT_DETECTION_THRESHOLD,
};
use crate::units::db_to_linear;

/// Which transmitters reach the receiver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    SatelliteOnly,
    TerrestrialOnly,
    Hybrid,
}

/// Demodulate with the true channel state or with the pilot estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Knowledge {
    Genie,
    Estimated,
}

/// Feed the local demodulator the receiver's own HP decisions or the
/// transmitted truth (the latter isolates the local stream from HP errors).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HpFeed {
    Decided,
    Genie,
}

/// What the C/N value is measured against when calibrating noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseReference {
    Composite,
    TerrestrialOnly,
}

/// Path-gain specification. Powers are in dB; the satellite phase relative
/// to the terrestrial path is either fixed (degrees) or drawn uniformly per
/// batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSpec {
    #[serde(default)]
    pub sat_power_db: f64,
    #[serde(default)]
    pub terr_power_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sat_phase_deg: Option<f64>,
}

impl Default for GainsSpec {
    fn default() -> Self {
        GainsSpec {
            sat_power_db: 0.0,
            terr_power_db: 0.0,
            sat_phase_deg: None,
        }
    }
}

fn d_bandwidth() -> f64 {
    5e6
}
fn d_fft() -> usize {
    2048
}
fn d_guard() -> String {
    "1/8".into()
}
fn d_data_carriers() -> usize {
    1512
}
fn d_active_carriers() -> usize {
    1705
}
fn d_n_symbols() -> usize {
    32
}

/// OFDM numerology used by the experiment; defaults to the 5 MHz / 2K
/// profile with 32-symbol batches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    #[serde(default = "d_bandwidth")]
    pub bandwidth_hz: f64,
    #[serde(default = "d_fft")]
    pub fft_size: usize,
    #[serde(default = "d_guard")]
    pub guard: String,
    #[serde(default = "d_data_carriers")]
    pub data_carriers: usize,
    #[serde(default = "d_active_carriers")]
    pub total_active_carriers: usize,
    #[serde(default = "d_n_symbols")]
    pub n_symbols_per_batch: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        FrameConfig {
            bandwidth_hz: d_bandwidth(),
            fft_size: d_fft(),
            guard: d_guard(),
            data_carriers: d_data_carriers(),
            total_active_carriers: d_active_carriers(),
            n_symbols_per_batch: d_n_symbols(),
        }
    }
}

impl FrameConfig {
    pub fn to_params(&self) -> Result<FrameParams, FrameError> {
        let params = FrameParams {
            bandwidth_hz: self.bandwidth_hz,
            fft_size: self.fft_size,
            guard: GuardInterval::parse(&self.guard)?,
            data_carriers: self.data_carriers,
            total_active_carriers: self.total_active_carriers,
        };
        params.validate()?;
        Ok(params)
    }
}

fn d_conf_target() -> f64 {
    0.2
}

/// BER confidence control: after `symbols_per_point` is reached, batches
/// continue until the Wilson 95% half-width falls below
/// `target_rel_half_width · BER` or `max_symbols_per_point` is hit.
/// Without a cap no extension happens.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfidenceConfig {
    #[serde(default = "d_conf_target")]
    pub target_rel_half_width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_symbols_per_point: Option<u64>,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        ConfidenceConfig {
            target_rel_half_width: d_conf_target(),
            max_symbols_per_point: None,
        }
    }
}

mod alpha_serde {
    use super::Alpha;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(alpha: &Alpha, s: S) -> Result<S::Ok, S::Error> {
        if alpha.is_qpsk() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(alpha.value())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Alpha, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Alpha::new(v).map_err(D::Error::custom),
            Repr::Text(t) => Alpha::parse(&t).map_err(D::Error::custom),
        }
    }
}

fn d_window() -> usize {
    DEFAULT_AVERAGING_WINDOW
}
fn d_threshold() -> f64 {
    DEFAULT_DETECTION_THRESHOLD
}
fn d_knowledge() -> Knowledge {
    Knowledge::Genie
}
fn d_hp_feed() -> HpFeed {
    HpFeed::Decided
}
fn d_local_content() -> bool {
    true
}
fn d_noise_reference() -> NoiseReference {
    NoiseReference::Composite
}
fn d_trials() -> u32 {
    200
}

/// One reception scenario. Parses from TOML; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    #[serde(with = "alpha_serde")]
    pub alpha: Alpha,
    pub cnr_sweep_db: Vec<f64>,
    pub symbols_per_point: u64,
    pub seed: u64,
    #[serde(default)]
    pub gains: GainsSpec,
    #[serde(default = "d_window")]
    pub averaging_window: usize,
    #[serde(default = "d_threshold")]
    pub detection_threshold: f64,
    #[serde(default = "d_knowledge")]
    pub channel_knowledge: Knowledge,
    #[serde(default = "d_hp_feed")]
    pub hp_feed: HpFeed,
    /// Network-wide local-content pilot grid (reserved scattered partners,
    /// modified pilots from local-content transmitters).
    #[serde(default = "d_local_content")]
    pub local_content: bool,
    #[serde(default = "d_noise_reference")]
    pub noise_reference: NoiseReference,
    /// Trials per point for the detection and estimation experiments.
    #[serde(default = "d_trials")]
    pub trials_per_point: u32,
    #[serde(default)]
    pub frame: FrameConfig,
    #[serde(default)]
    pub confidence: ConfidenceConfig,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Receiver(#[from] ReceiverError),
    #[error("experiment failed: {0}")]
    Experiment(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let sc: Scenario = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Validate the scenario, reporting every offending key at once.
    pub fn validate(&self) -> Result<(), SimError> {
        let mut issues = Vec::new();
        if self.cnr_sweep_db.is_empty() {
            issues.push("cnr_sweep_db: must contain at least one point".to_string());
        }
        if self
            .cnr_sweep_db
            .iter()
            .any(|c| c.is_nan() || *c == f64::NEG_INFINITY)
        {
            issues.push("cnr_sweep_db: values must be finite or +inf (noise off)".to_string());
        }
        if self.symbols_per_point == 0 {
            issues.push("symbols_per_point: must be at least 1".to_string());
        }
        if self.averaging_window == 0 {
            issues.push("averaging_window: must be at least 1".to_string());
        }
        if self.detection_threshold.is_nan() || self.detection_threshold <= 0.0 {
            issues.push("detection_threshold: must be positive".to_string());
        }
        if self.trials_per_point == 0 {
            issues.push("trials_per_point: must be at least 1".to_string());
        }
        if self.confidence.target_rel_half_width.is_nan()
            || self.confidence.target_rel_half_width <= 0.0
        {
            issues.push("confidence.target_rel_half_width: must be positive".to_string());
        }
        if let Some(max) = self.confidence.max_symbols_per_point {
            if max < self.symbols_per_point {
                issues.push(
                    "confidence.max_symbols_per_point: must be >= symbols_per_point".to_string(),
                );
            }
        }
        if self.mode == Mode::SatelliteOnly
            && self.noise_reference == NoiseReference::TerrestrialOnly
        {
            issues.push(
                "noise_reference: terrestrial_only is undefined in satellite_only mode \
                 (no terrestrial signal to reference)"
                    .to_string(),
            );
        }
        if self.mode != Mode::SatelliteOnly && self.alpha.is_finite() && !self.local_content {
            issues.push(
                "local_content: finite alpha transmits local content, which requires the \
                 modified-pilot grid (local_content = true)"
                    .to_string(),
            );
        }
        if let Some(deg) = self.gains.sat_phase_deg {
            if !deg.is_finite() {
                issues.push("gains.sat_phase_deg: must be finite".to_string());
            }
        }
        if let Err(e) = self.frame.to_params() {
            issues.push(format!("frame: {e}"));
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(SimError::Invalid(issues))
        }
    }

    fn layout(&self) -> Result<FrameLayout, SimError> {
        let params = self.frame.to_params()?;
        let spec = PilotSpec::default_grid(self.local_content, mix64(self.seed, 0, STREAM_PILOTS));
        Ok(FrameLayout::build(
            params,
            spec,
            self.frame.n_symbols_per_batch,
        )?)
    }
}

/// SHA-256 of a scenario file, recorded in result metadata.
pub fn scenario_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

const STREAM_PILOTS: u64 = 0;
const STREAM_GAINS: u64 = 1;
const STREAM_BITS: u64 = 2;
const STREAM_NOISE: u64 = 3;

/// splitmix64-style mixer for deriving independent sub-seeds.
fn mix64(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.rotate_left(17) ^ b.rotate_left(43);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn rng_for(seed: u64, point: u64, batch: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&point.to_le_bytes());
    key[16..24].copy_from_slice(&batch.to_le_bytes());
    key[24..32].copy_from_slice(&stream.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn draw_gains(sc: &Scenario, rng: &mut ChaCha8Rng) -> PathGains {
    let sat_amp = 10f64.powf(sc.gains.sat_power_db / 20.0);
    let terr_amp = 10f64.powf(sc.gains.terr_power_db / 20.0);
    // the phase draw happens unconditionally so the stream layout does not
    // depend on the phase mode
    let drawn = rng.random::<f64>() * std::f64::consts::TAU;
    let phase = match sc.gains.sat_phase_deg {
        Some(deg) => deg.to_radians(),
        None => drawn,
    };
    let a_sat = match sc.mode {
        Mode::TerrestrialOnly => Complex64::new(0.0, 0.0),
        _ => Complex64::from_polar(sat_amp, phase),
    };
    let a_terr = match sc.mode {
        Mode::SatelliteOnly => Complex64::new(0.0, 0.0),
        _ => Complex64::new(terr_amp, 0.0),
    };
    PathGains { a_sat, a_terr }
}

/// Counts and error-moment sums from one synthesized batch.
#[derive(Debug, Clone, Copy, Default)]
struct BatchOutput {
    hp_errors: u64,
    hp_bits: u64,
    lp_errors: u64,
    lp_bits: u64,
    lp_present: bool,
    detected: bool,
    // per-carrier squared estimation errors: sums of |Δ|² and |Δ|⁴
    est_count: u64,
    sum_g2: f64,
    sum_g4: f64,
    sum_l2: f64,
    sum_l4: f64,
}

fn dibit_bit_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x ^ y).count_ones() as u64)
        .sum()
}

struct BatchConfig<'a> {
    scenario: &'a Scenario,
    layout: &'a FrameLayout,
    alpha: Alpha,
    point: u64,
    batch: u64,
    cnr_db: f64,
    /// Override: absolute noise power instead of C/N-derived.
    fixed_noise_power: Option<f64>,
}

fn run_batch(cfg: &BatchConfig) -> Result<BatchOutput, SimError> {
    let sc = cfg.scenario;
    let layout = cfg.layout;
    let mut gains_rng = rng_for(sc.seed, cfg.point, cfg.batch, STREAM_GAINS);
    let mut bits_rng = rng_for(sc.seed, cfg.point, cfg.batch, STREAM_BITS);

    let gains = draw_gains(sc, &mut gains_rng);
    let state = combine_hybrid(&gains, cfg.alpha);
    let terr_state = combine_hybrid(
        &PathGains {
            a_sat: Complex64::new(0.0, 0.0),
            a_terr: gains.a_terr,
        },
        cfg.alpha,
    );

    // synthesize the noiseless frame and record the data-cell ground truth
    let cells = layout.cells();
    let mut frame = Vec::with_capacity(cells.len());
    let mut data_indices = Vec::with_capacity(layout.data_cell_count());
    let mut hp_truth = Vec::with_capacity(layout.data_cell_count());
    let mut lp_truth = Vec::with_capacity(layout.data_cell_count());
    let mut composite_power = 0.0;
    let mut terr_power = 0.0;
    for (idx, cell) in cells.iter().enumerate() {
        let (x_g, x_l) = match cell {
            Cell::Pilot(p) => (Complex64::new(p.base, 0.0), p.vertical()),
            Cell::Data => {
                let hp = bits_rng.random_range(0..4u8);
                let lp = bits_rng.random_range(0..4u8);
                data_indices.push(idx);
                hp_truth.push(hp);
                lp_truth.push(lp);
                (qpsk_symbol(hp), qpsk_symbol(lp))
            }
        };
        let rx = state.a_global * x_g + state.a_local * x_l;
        composite_power += rx.norm_sqr();
        terr_power += (terr_state.a_global * x_g + terr_state.a_local * x_l).norm_sqr();
        frame.push(rx);
    }
    composite_power /= cells.len() as f64;
    terr_power /= cells.len() as f64;

    let noise_seed = mix64(sc.seed, cfg.point << 20 | cfg.batch, STREAM_NOISE);
    let noisy = match cfg.fixed_noise_power {
        // reference power N at 0 dB C/N injects exactly noise power N
        Some(n) => add_awgn(
            &frame,
            &NoiseSpec {
                cnr_db: 0.0,
                seed: noise_seed,
            },
            n,
        ),
        None => {
            let reference = match sc.noise_reference {
                NoiseReference::Composite => composite_power,
                NoiseReference::TerrestrialOnly => terr_power,
            };
            add_awgn(
                &frame,
                &NoiseSpec {
                    cnr_db: cfg.cnr_db,
                    seed: noise_seed,
                },
                reference,
            )
        }
    };

    // estimation, detection and error moments
    let per_carrier = estimate_per_carrier(layout, &noisy, sc.averaging_window)?;
    let estimates: Vec<ChannelEstimate> = per_carrier.iter().map(|(_, e)| *e).collect();
    let detected = detect_local(&estimates, sc.detection_threshold);
    let mut out = BatchOutput {
        detected,
        ..BatchOutput::default()
    };
    for e in &estimates {
        let g2 = (e.a_global_hat - state.a_global).norm_sqr();
        let l2 = (e.a_local_hat - state.a_local).norm_sqr();
        out.est_count += 1;
        out.sum_g2 += g2;
        out.sum_g4 += g2 * g2;
        out.sum_l2 += l2;
        out.sum_l4 += l2 * l2;
    }

    // demodulation
    let demod_estimate = match sc.channel_knowledge {
        Knowledge::Genie => ChannelEstimate {
            a_global_hat: state.a_global,
            a_local_hat: state.a_local,
            n_averaged: 0,
        },
        Knowledge::Estimated => aggregate_estimate(&estimates)
            .ok_or_else(|| SimError::Experiment("no channel estimates available".into()))?,
    };
    let data_samples: Vec<Complex64> = data_indices.iter().map(|&i| noisy[i]).collect();
    let hp_hat = demod_global(&data_samples, &demod_estimate)?;
    out.hp_errors = dibit_bit_errors(&hp_hat, &hp_truth);
    out.hp_bits = 2 * hp_truth.len() as u64;

    let local_present = state.a_local.norm_sqr() > 0.0;
    if local_present {
        let hp_feed: &[u8] = match sc.hp_feed {
            HpFeed::Decided => &hp_hat,
            HpFeed::Genie => &hp_truth,
        };
        match demod_local(&data_samples, hp_feed, &demod_estimate) {
            Ok(lp_hat) => {
                out.lp_errors = dibit_bit_errors(&lp_hat, &lp_truth);
                out.lp_bits = 2 * lp_truth.len() as u64;
                out.lp_present = true;
            }
            // the estimate collapsed below the decision floor: the receiver
            // reports the stream absent for this batch
            Err(ReceiverError::LocalSignalAbsent) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(out)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(errors: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = errors as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Accumulated results for one C/N sweep point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub cnr_db: f64,
    pub batches: u32,
    pub hp_errors: u64,
    pub hp_bits: u64,
    pub lp_errors: Option<u64>,
    pub lp_bits: Option<u64>,
    pub detection_rate: f64,
    pub msq_err_global: f64,
    pub msq_err_local: f64,
}

impl PointResult {
    pub fn hp_ber(&self) -> f64 {
        if self.hp_bits == 0 {
            0.0
        } else {
            self.hp_errors as f64 / self.hp_bits as f64
        }
    }

    pub fn lp_ber(&self) -> Option<f64> {
        match (self.lp_errors, self.lp_bits) {
            (Some(e), Some(b)) if b > 0 => Some(e as f64 / b as f64),
            _ => None,
        }
    }

    pub fn hp_wilson95(&self) -> (f64, f64) {
        wilson_interval(self.hp_errors, self.hp_bits, 1.96)
    }

    pub fn lp_wilson95(&self) -> Option<(f64, f64)> {
        Some(wilson_interval(self.lp_errors?, self.lp_bits?, 1.96))
    }
}

/// Full BER experiment output.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub points: Vec<PointResult>,
}

fn interval_is_tight(errors: u64, bits: u64, target_rel: f64) -> bool {
    if errors == 0 || bits == 0 {
        return false;
    }
    let (lo, hi) = wilson_interval(errors, bits, 1.96);
    let ber = errors as f64 / bits as f64;
    (hi - lo) / 2.0 <= target_rel * ber
}

/// Sweep C/N, synthesize frames, estimate, detect, demodulate and count
/// errors. Deterministic for a given scenario.
pub fn run_ber_experiment(sc: &Scenario) -> Result<ExperimentResult, SimError> {
    sc.validate()?;
    let layout = sc.layout()?;
    let data_per_batch = layout.data_cell_count() as u64;
    let mut points = Vec::with_capacity(sc.cnr_sweep_db.len());
    for (pi, &cnr_db) in sc.cnr_sweep_db.iter().enumerate() {
        let mut acc = BatchOutput::default();
        let mut detected_batches = 0u64;
        let mut batches = 0u32;
        let mut symbols = 0u64;
        let mut lp_errors = 0u64;
        let mut lp_bits = 0u64;
        let mut lp_seen = false;
        loop {
            let need_minimum = symbols < sc.symbols_per_point;
            let extend = match sc.confidence.max_symbols_per_point {
                Some(max) if symbols < max => {
                    !interval_is_tight(
                        acc.hp_errors,
                        acc.hp_bits,
                        sc.confidence.target_rel_half_width,
                    ) || (lp_seen
                        && !interval_is_tight(
                            lp_errors,
                            lp_bits,
                            sc.confidence.target_rel_half_width,
                        ))
                }
                _ => false,
            };
            if !need_minimum && !(symbols > 0 && extend) {
                break;
            }
            let out = run_batch(&BatchConfig {
                scenario: sc,
                layout: &layout,
                alpha: sc.alpha,
                point: pi as u64,
                batch: batches as u64,
                cnr_db,
                fixed_noise_power: None,
            })?;
            acc.hp_errors += out.hp_errors;
            acc.hp_bits += out.hp_bits;
            acc.est_count += out.est_count;
            acc.sum_g2 += out.sum_g2;
            acc.sum_l2 += out.sum_l2;
            if out.lp_present {
                lp_seen = true;
                lp_errors += out.lp_errors;
                lp_bits += out.lp_bits;
            }
            if out.detected {
                detected_batches += 1;
            }
            batches += 1;
            symbols += data_per_batch;
        }
        let est_n = acc.est_count.max(1) as f64;
        points.push(PointResult {
            cnr_db,
            batches,
            hp_errors: acc.hp_errors,
            hp_bits: acc.hp_bits,
            lp_errors: lp_seen.then_some(lp_errors),
            lp_bits: lp_seen.then_some(lp_bits),
            detection_rate: detected_batches as f64 / batches.max(1) as f64,
            msq_err_global: acc.sum_g2 / est_n,
            msq_err_local: acc.sum_l2 / est_n,
        });
    }
    Ok(ExperimentResult { points })
}

/// Mean-square estimation errors at one satellite power level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationPoint {
    pub sat_power_db: f64,
    pub n_samples: u64,
    pub msq_global: f64,
    pub msq_global_ci95: (f64, f64),
    pub msq_local: f64,
    pub msq_local_ci95: (f64, f64),
}

fn mean_ci95(sum: f64, sum_sq: f64, n: u64) -> (f64, (f64, f64)) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    let half = 1.96 * (var / nf).sqrt();
    (mean, (mean - half, mean + half))
}

/// Sweep the satellite power at fixed absolute noise power and report the
/// channel-estimation error statistics per level.
///
/// The noise power is pinned to the terrestrial composite power at the
/// first C/N sweep point, so every level sees identical noise.
pub fn run_estimation_experiment(
    sc: &Scenario,
    sat_power_sweep_db: &[f64],
) -> Result<Vec<EstimationPoint>, SimError> {
    sc.validate()?;
    if sc.mode == Mode::SatelliteOnly {
        return Err(SimError::Invalid(vec![
            "mode: the satellite power sweep needs a terrestrial signal to hold fixed".into(),
        ]));
    }
    if sat_power_sweep_db.is_empty() {
        return Err(SimError::Invalid(vec![
            "satellite power sweep is empty".into()
        ]));
    }
    let layout = sc.layout()?;
    let cnr0 = db_to_linear(sc.cnr_sweep_db[0]);
    let scale = sc.alpha.local_scale();
    let terr_power = 10f64.powf(sc.gains.terr_power_db / 10.0) * (1.0 + scale * scale);
    let noise_power = terr_power / cnr0;

    let mut out = Vec::with_capacity(sat_power_sweep_db.len());
    for (pi, &sat_power_db) in sat_power_sweep_db.iter().enumerate() {
        let mut local = sc.clone();
        local.mode = Mode::Hybrid;
        local.gains.sat_power_db = sat_power_db;
        let (mut sum_g2, mut sum_g4, mut sum_l2, mut sum_l4, mut n) = (0.0, 0.0, 0.0, 0.0, 0u64);
        for trial in 0..sc.trials_per_point {
            let out_b = run_batch(&BatchConfig {
                scenario: &local,
                layout: &layout,
                alpha: local.alpha,
                point: 1000 + pi as u64,
                batch: trial as u64,
                cnr_db: sc.cnr_sweep_db[0],
                fixed_noise_power: Some(noise_power),
            })?;
            sum_g2 += out_b.sum_g2;
            sum_g4 += out_b.sum_g4;
            sum_l2 += out_b.sum_l2;
            sum_l4 += out_b.sum_l4;
            n += out_b.est_count;
        }
        let (msq_global, msq_global_ci95) = mean_ci95(sum_g2, sum_g4, n);
        let (msq_local, msq_local_ci95) = mean_ci95(sum_l2, sum_l4, n);
        out.push(EstimationPoint {
            sat_power_db,
            n_samples: n,
            msq_global,
            msq_global_ci95,
            msq_local,
            msq_local_ci95,
        });
    }
    Ok(out)
}

/// Detection rates at one C/N point: the with-local arm (absent when the
/// scenario cannot carry local content) and the no-local twin, which yields
/// the false-alarm rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionPoint {
    pub cnr_db: f64,
    pub trials: u32,
    pub detection_rate: Option<f64>,
    pub false_alarm_rate: f64,
}

/// Measure miss/false-alarm behaviour of the local-content detector.
///
/// Both arms share gains, bits and noise draws, so they differ only in
/// whether the vertical pilot components are transmitted.
pub fn run_detection_experiment(sc: &Scenario) -> Result<Vec<DetectionPoint>, SimError> {
    sc.validate()?;
    let layout = sc.layout()?;
    let with_local_possible = sc.mode != Mode::SatelliteOnly && sc.alpha.is_finite();
    let mut points = Vec::with_capacity(sc.cnr_sweep_db.len());
    for (pi, &cnr_db) in sc.cnr_sweep_db.iter().enumerate() {
        let mut hits = 0u32;
        let mut false_alarms = 0u32;
        for trial in 0..sc.trials_per_point {
            let mut cfg = BatchConfig {
                scenario: sc,
                layout: &layout,
                alpha: sc.alpha,
                point: 2000 + pi as u64,
                batch: trial as u64,
                cnr_db,
                fixed_noise_power: None,
            };
            if with_local_possible && run_batch(&cfg)?.detected {
                hits += 1;
            }
            cfg.alpha = Alpha::INFINITE;
            if run_batch(&cfg)?.detected {
                false_alarms += 1;
            }
        }
        points.push(DetectionPoint {
            cnr_db,
            trials: sc.trials_per_point,
            detection_rate: with_local_possible.then(|| hits as f64 / sc.trials_per_point as f64),
            false_alarm_rate: false_alarms as f64 / sc.trials_per_point as f64,
        });
    }
    Ok(points)
}

/// Write BER results as CSV, one row per sweep point.
pub fn write_ber_csv<W: Write>(result: &ExperimentResult, w: &mut W) -> io::Result<()> {
    writeln!(
        w,
        "cnr_db,hp_errors,hp_bits,hp_ber,lp_errors,lp_bits,lp_ber,detection_rate,\
         msq_err_global,msq_err_local,batches"
    )?;
    for p in &result.points {
        let (lp_e, lp_b, lp_r) = match (p.lp_errors, p.lp_bits, p.lp_ber()) {
            (Some(e), Some(b), Some(r)) => (e.to_string(), b.to_string(), r.to_string()),
            _ => (String::new(), String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            p.cnr_db,
            p.hp_errors,
            p.hp_bits,
            p.hp_ber(),
            lp_e,
            lp_b,
            lp_r,
            p.detection_rate,
            p.msq_err_global,
            p.msq_err_local,
            p.batches
        )?;
    }
    Ok(())
}

/// Write estimation-sweep results as CSV.
pub fn write_estimation_csv<W: Write>(points: &[EstimationPoint], w: &mut W) -> io::Result<()> {
    writeln!(
        w,
        "sat_power_db,n_samples,msq_global,msq_global_lo,msq_global_hi,\
         msq_local,msq_local_lo,msq_local_hi"
    )?;
    for p in points {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            p.sat_power_db,
            p.n_samples,
            p.msq_global,
            p.msq_global_ci95.0,
            p.msq_global_ci95.1,
            p.msq_local,
            p.msq_local_ci95.0,
            p.msq_local_ci95.1
        )?;
    }
    Ok(())
}

/// Write detection-rate results as CSV.
pub fn write_detection_csv<W: Write>(points: &[DetectionPoint], w: &mut W) -> io::Result<()> {
    writeln!(w, "cnr_db,trials,detection_rate,false_alarm_rate")?;
    for p in points {
        let det = p.detection_rate.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{}",
            p.cnr_db, p.trials, det, p.false_alarm_rate
        )?;
    }
    Ok(())
}
