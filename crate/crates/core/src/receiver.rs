//! Pilot-based joint channel estimation, local-content detection and
//! two-stage demodulation.
//!
//! Every pilot appears twice at the same carrier with vertical components
//! of opposite relative polarity, so two received pilots form the
//! non-singular system
//!
//! ```text
//! â_g·s_g1 + â_l·s_l1 = r1
//! â_g·s_g2 + â_l·s_l2 = r2
//! ```
//!
//! whose solution recovers the global and local channel gains jointly.
//! Dividing each row by its horizontal component reduces this to
//! sum/difference form; with noise the right-hand sides are averaged over a
//! window of pilot pairs, so the estimation errors depend on the noise
//! alone — not on how strong the satellite component is — and their
//! variance falls as 1/window.
//!
//! The hierarchy parameter is never signalled or estimated on its own: it
//! is absorbed into `â_local`. Local content is declared present when a
//! robust cross-carrier statistic of `|â_local|` clears a threshold
//! relative to `|â_global|`.

use std::io::{self, Write};

use num_complex::Complex64;
use thiserror::Error;

use crate::constellation::{qpsk_symbol, quadrant_dibit};
use crate::pilots::{Cell, FrameLayout, PilotKind};

/// Gains below `NEAR_ZERO_GAIN` (relative to the other component) are
/// treated as signal-absent instead of producing garbage decisions.
pub const NEAR_ZERO_GAIN: f64 = 1e-9;

/// Default relative detection threshold on `|â_local| / |â_global|`.
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.05;

/// Default number of pilot pairs averaged per carrier estimate.
pub const DEFAULT_AVERAGING_WINDOW: usize = 8;

/// Two received pilots at one carrier in consecutive OFDM symbols, together
/// with their known transmitted components: horizontal (real BPSK) `s_g`,
/// vertical `s_l`. Pair construction guarantees the vertical/horizontal
/// ratios of the two observations oppose: `s_l2/s_g2 = −s_l1/s_g1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotObservation {
    pub carrier: usize,
    pub r1: Complex64,
    pub r2: Complex64,
    pub s_g1: f64,
    pub s_g2: f64,
    pub s_l1: Complex64,
    pub s_l2: Complex64,
}

/// Joint channel estimate for one carrier (or an aggregate of carriers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelEstimate {
    pub a_global_hat: Complex64,
    pub a_local_hat: Complex64,
    /// Number of pilot pairs averaged into this estimate.
    pub n_averaged: usize,
}

impl ChannelEstimate {
    pub fn as_state(&self) -> crate::channel::ChannelState {
        crate::channel::ChannelState {
            a_global: self.a_global_hat,
            a_local: self.a_local_hat,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ReceiverError {
    #[error("pilot horizontal component is zero; division undefined")]
    ZeroPilot,
    #[error("pilot pair is singular; vertical components do not oppose")]
    SingularPair,
    #[error("no pilot observations available")]
    NoObservations,
    #[error("global gain estimate is near zero; signal absent")]
    SignalAbsent,
    #[error("local gain estimate is near zero; local stream absent")]
    LocalSignalAbsent,
    #[error("sample count {samples} does not match layout cell count {cells}")]
    FrameSizeMismatch { samples: usize, cells: usize },
    #[error("HP decision count {hp} does not match sample count {samples}")]
    DecisionCountMismatch { hp: usize, samples: usize },
}

/// Solve the 2x2 pilot system for one observation.
fn solve_pair(obs: &PilotObservation) -> Result<(Complex64, Complex64), ReceiverError> {
    if obs.s_g1 == 0.0 || obs.s_g2 == 0.0 {
        return Err(ReceiverError::ZeroPilot);
    }
    let det = obs.s_l2 * obs.s_g1 - obs.s_l1 * obs.s_g2;
    let scale = obs.s_l2.norm() * obs.s_g1.abs() + obs.s_l1.norm() * obs.s_g2.abs();
    if det.norm() <= 1e-12 * scale {
        return Err(ReceiverError::SingularPair);
    }
    let a_g = (obs.r1 * obs.s_l2 - obs.s_l1 * obs.r2) / det;
    let a_l = (obs.r2 * obs.s_g1 - obs.r1 * obs.s_g2) / det;
    Ok((a_g, a_l))
}

/// Estimate the channel at one carrier from one or more pilot observations,
/// averaging the per-pair solutions over the window.
pub fn estimate_channel(
    observations: &[PilotObservation],
) -> Result<ChannelEstimate, ReceiverError> {
    if observations.is_empty() {
        return Err(ReceiverError::NoObservations);
    }
    let mut sum_g = Complex64::new(0.0, 0.0);
    let mut sum_l = Complex64::new(0.0, 0.0);
    for obs in observations {
        let (a_g, a_l) = solve_pair(obs)?;
        sum_g += a_g;
        sum_l += a_l;
    }
    let n = observations.len() as f64;
    Ok(ChannelEstimate {
        a_global_hat: sum_g / n,
        a_local_hat: sum_l / n,
        n_averaged: observations.len(),
    })
}

/// Collect pilot observations per carrier from a received frame.
///
/// Scattered pilots pair with their reserved partner one symbol later;
/// continual pilots pair consecutive symbols (disjoint pairs). Unpaired
/// pilots — scattered pilots in a baseline-grid frame, or a trailing odd
/// continual symbol — are skipped.
pub fn gather_observations(
    layout: &FrameLayout,
    samples: &[Complex64],
) -> Result<Vec<(usize, Vec<PilotObservation>)>, ReceiverError> {
    if samples.len() != layout.cells().len() {
        return Err(ReceiverError::FrameSizeMismatch {
            samples: samples.len(),
            cells: layout.cells().len(),
        });
    }
    let mut out: Vec<(usize, Vec<PilotObservation>)> = Vec::new();
    for carrier in 0..layout.active_carriers() {
        let cells: Vec<_> = (0..layout.n_symbols)
            .filter_map(|symbol| match layout.cell(carrier, symbol) {
                Cell::Pilot(p) => Some(*p),
                Cell::Data => None,
            })
            .collect();
        if cells.is_empty() {
            continue;
        }
        let mut observations = Vec::new();
        let mut i = 0;
        while i + 1 < cells.len() {
            let (c1, c2) = (cells[i], cells[i + 1]);
            let paired = match (c1.kind, c2.kind) {
                (PilotKind::ScatteredFirst, PilotKind::ScatteredSecond) => {
                    c2.symbol == c1.symbol + 1
                }
                (PilotKind::Continual, PilotKind::Continual) => c2.symbol == c1.symbol + 1,
                _ => false,
            };
            if !paired {
                i += 1;
                continue;
            }
            observations.push(PilotObservation {
                carrier,
                r1: samples[layout.index(carrier, c1.symbol)],
                r2: samples[layout.index(carrier, c2.symbol)],
                s_g1: c1.base,
                s_g2: c2.base,
                s_l1: c1.vertical(),
                s_l2: c2.vertical(),
            });
            i += 2;
        }
        if !observations.is_empty() {
            out.push((carrier, observations));
        }
    }
    Ok(out)
}

/// Per-carrier estimates from a received frame, each averaged over at most
/// `window` pilot pairs.
pub fn estimate_per_carrier(
    layout: &FrameLayout,
    samples: &[Complex64],
    window: usize,
) -> Result<Vec<(usize, ChannelEstimate)>, ReceiverError> {
    let window = window.max(1);
    let gathered = gather_observations(layout, samples)?;
    let mut out = Vec::with_capacity(gathered.len());
    for (carrier, observations) in gathered {
        let take = observations.len().min(window);
        let est = estimate_channel(&observations[..take])?;
        out.push((carrier, est));
    }
    Ok(out)
}

/// Component-wise complex median across estimates: robust to outlier
/// carriers, and zero-mean estimation noise cancels instead of leaving a
/// magnitude floor.
fn complex_median(values: impl Iterator<Item = Complex64> + Clone) -> Option<Complex64> {
    fn median(mut v: Vec<f64>) -> Option<f64> {
        if v.is_empty() {
            return None;
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = v.len();
        Some(if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        })
    }
    let re = median(values.clone().map(|c| c.re).collect())?;
    let im = median(values.map(|c| c.im).collect())?;
    Some(Complex64::new(re, im))
}

/// Detection statistic: magnitudes of the cross-carrier median local and
/// global estimates.
pub fn detection_statistic(estimates: &[ChannelEstimate]) -> Option<(f64, f64)> {
    let local = complex_median(estimates.iter().map(|e| e.a_local_hat))?;
    let global = complex_median(estimates.iter().map(|e| e.a_global_hat))?;
    Some((local.norm(), global.norm()))
}

/// Local-content presence decision: true when the median `|â_local|`
/// exceeds `threshold · |â_global|`. False means no local content is
/// transmitted, or it is too weak to detect.
pub fn detect_local(estimates: &[ChannelEstimate], threshold: f64) -> bool {
    assert!(threshold > 0.0, "threshold must be positive");
    match detection_statistic(estimates) {
        Some((local, global)) => local > threshold * global,
        None => false,
    }
}

/// Mean of per-carrier estimates, for demodulating a frequency-flat channel.
pub fn aggregate_estimate(estimates: &[ChannelEstimate]) -> Option<ChannelEstimate> {
    if estimates.is_empty() {
        return None;
    }
    let n = estimates.len() as f64;
    Some(ChannelEstimate {
        a_global_hat: estimates.iter().map(|e| e.a_global_hat).sum::<Complex64>() / n,
        a_local_hat: estimates.iter().map(|e| e.a_local_hat).sum::<Complex64>() / n,
        n_averaged: estimates.iter().map(|e| e.n_averaged).sum(),
    })
}

/// Global (HP) dibit decisions: quadrant of `sample / â_global`.
pub fn demod_global(
    samples: &[Complex64],
    est: &ChannelEstimate,
) -> Result<Vec<u8>, ReceiverError> {
    let g = est.a_global_hat.norm();
    if g < NEAR_ZERO_GAIN * est.a_local_hat.norm().max(1.0) {
        return Err(ReceiverError::SignalAbsent);
    }
    Ok(samples
        .iter()
        .map(|&s| quadrant_dibit(s / est.a_global_hat))
        .collect())
}

/// Local (LP) dibit decisions from the residual after the decided global
/// component: quadrant of `(sample − â_global·S_g) / â_local`.
pub fn demod_local(
    samples: &[Complex64],
    hp_decisions: &[u8],
    est: &ChannelEstimate,
) -> Result<Vec<u8>, ReceiverError> {
    if samples.len() != hp_decisions.len() {
        return Err(ReceiverError::DecisionCountMismatch {
            hp: hp_decisions.len(),
            samples: samples.len(),
        });
    }
    let l = est.a_local_hat.norm();
    if l < NEAR_ZERO_GAIN * est.a_global_hat.norm().max(1.0) {
        return Err(ReceiverError::LocalSignalAbsent);
    }
    Ok(samples
        .iter()
        .zip(hp_decisions)
        .map(|(&s, &hp)| {
            let residual = s - est.a_global_hat * qpsk_symbol(hp);
            quadrant_dibit(residual / est.a_local_hat)
        })
        .collect())
}

/// Dump per-carrier estimates as CSV
/// (`carrier,a_global_re,a_global_im,a_local_re,a_local_im,n_averaged`).
pub fn write_estimates_csv<W: Write>(
    rows: &[(usize, ChannelEstimate)],
    w: &mut W,
) -> io::Result<()> {
    writeln!(
        w,
        "carrier,a_global_re,a_global_im,a_local_re,a_local_im,n_averaged"
    )?;
    for (carrier, e) in rows {
        writeln!(
            w,
            "{carrier},{},{},{},{},{}",
            e.a_global_hat.re, e.a_global_hat.im, e.a_local_hat.re, e.a_local_hat.im, e.n_averaged
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelState;
    use crate::constellation::Alpha;
    use crate::pilots::{FrameLayout, FrameParams, GuardInterval, PilotSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn scattered_obs(a_g: Complex64, a_l: Complex64, base: f64) -> PilotObservation {
        let s_l1 = Complex64::new(0.0, base);
        let s_l2 = -s_l1;
        PilotObservation {
            carrier: 0,
            r1: a_g * base + a_l * s_l1,
            r2: a_g * base + a_l * s_l2,
            s_g1: base,
            s_g2: base,
            s_l1,
            s_l2,
        }
    }

    fn continual_obs(a_g: Complex64, a_l: Complex64, base1: f64, base2: f64) -> PilotObservation {
        // consecutive symbols i (even) and i+1: vertical j·base then −j·base
        let s_l1 = Complex64::new(0.0, base1);
        let s_l2 = Complex64::new(0.0, -base2);
        PilotObservation {
            carrier: 0,
            r1: a_g * base1 + a_l * s_l1,
            r2: a_g * base2 + a_l * s_l2,
            s_g1: base1,
            s_g2: base2,
            s_l1,
            s_l2,
        }
    }

    #[test]
    fn noiseless_estimate_is_exact() {
        let a_g = Complex64::new(1.0, 0.5);
        let a_l = Complex64::new(0.2, -0.1);
        for obs in [
            scattered_obs(a_g, a_l, 1.0),
            scattered_obs(a_g, a_l, -1.0),
            continual_obs(a_g, a_l, 1.0, -1.0),
            continual_obs(a_g, a_l, -1.0, -1.0),
        ] {
            let est = estimate_channel(&[obs]).unwrap();
            assert!((est.a_global_hat - a_g).norm() < 1e-14);
            assert!((est.a_local_hat - a_l).norm() < 1e-14);
            assert_eq!(est.n_averaged, 1);
        }
    }

    #[test]
    fn satellite_only_gives_exactly_zero_local() {
        // received pilots carry only the horizontal component
        let a_s = Complex64::new(0.73, -0.22);
        for (b1, b2) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)] {
            let mut obs = continual_obs(a_s, Complex64::new(0.0, 0.0), b1, b2);
            obs.r1 = a_s * b1;
            obs.r2 = a_s * b2;
            let est = estimate_channel(&[obs]).unwrap();
            assert_eq!(est.a_local_hat, Complex64::new(0.0, 0.0));
            assert!((est.a_global_hat - a_s).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_pilot_and_singular_pair_are_errors() {
        let mut obs = scattered_obs(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0), 1.0);
        obs.s_g1 = 0.0;
        assert_eq!(estimate_channel(&[obs]), Err(ReceiverError::ZeroPilot));

        let mut obs = scattered_obs(Complex64::new(1.0, 0.0), Complex64::new(0.1, 0.0), 1.0);
        obs.s_l2 = obs.s_l1; // same polarity: rows are linearly dependent
        assert_eq!(estimate_channel(&[obs]), Err(ReceiverError::SingularPair));

        assert_eq!(estimate_channel(&[]), Err(ReceiverError::NoObservations));
    }

    // Estimation errors are pure functions of the injected noise:
    // Δ_g ± ρ·Δ_l = (n/s_g) of the respective observation, ρ = s_l1/s_g1.
    #[test]
    fn error_structure_matches_noise_relations() {
        let a_g = Complex64::new(0.9, 0.3);
        let a_l = Complex64::new(0.25, -0.15);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..64 {
            let base = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let mut obs = scattered_obs(a_g, a_l, base);
            let n1 = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            let n2 = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            obs.r1 += n1;
            obs.r2 += n2;
            let est = estimate_channel(&[obs]).unwrap();
            let d_g = est.a_global_hat - a_g;
            let d_l = est.a_local_hat - a_l;
            let rho = obs.s_l1 / obs.s_g1;
            assert!((d_g + rho * d_l - n1 / obs.s_g1).norm() < 1e-13);
            assert!((d_g - rho * d_l - n2 / obs.s_g2).norm() < 1e-13);
        }
    }

    #[test]
    fn error_variance_shrinks_with_window() {
        let a_g = Complex64::new(1.0, 0.0);
        let a_l = Complex64::new(0.3, 0.1);
        let sigma = 0.3;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut msq_for = |window: usize| {
            let trials = 3000;
            let mut sum = 0.0;
            for _ in 0..trials {
                let obs: Vec<PilotObservation> = (0..window)
                    .map(|_| {
                        let base = if rng.random::<bool>() { 1.0 } else { -1.0 };
                        let mut o = scattered_obs(a_g, a_l, base);
                        o.r1 += Complex64::new(
                            sigma * rng.sample::<f64, _>(StandardNormal),
                            sigma * rng.sample::<f64, _>(StandardNormal),
                        );
                        o.r2 += Complex64::new(
                            sigma * rng.sample::<f64, _>(StandardNormal),
                            sigma * rng.sample::<f64, _>(StandardNormal),
                        );
                        o
                    })
                    .collect();
                let est = estimate_channel(&obs).unwrap();
                sum += (est.a_local_hat - a_l).norm_sqr();
            }
            sum / 3000.0
        };
        let m4 = msq_for(4);
        let m8 = msq_for(8);
        let m16 = msq_for(16);
        assert!(m4 / m8 > 1.7 && m4 / m8 < 2.4, "4→8 ratio {}", m4 / m8);
        assert!(m8 / m16 > 1.7 && m8 / m16 < 2.4, "8→16 ratio {}", m8 / m16);
    }

    fn synth_frame(
        layout: &FrameLayout,
        st: &ChannelState,
        rng: &mut ChaCha8Rng,
    ) -> Vec<Complex64> {
        layout
            .cells()
            .iter()
            .map(|cell| match cell {
                Cell::Pilot(p) => st.a_global * p.base + st.a_local * p.vertical(),
                Cell::Data => {
                    let hp = rng.random_range(0..4u8);
                    let lp = rng.random_range(0..4u8);
                    st.a_global * qpsk_symbol(hp) + st.a_local * qpsk_symbol(lp)
                }
            })
            .collect()
    }

    fn small_layout(local: bool) -> FrameLayout {
        let params = FrameParams {
            bandwidth_hz: 5e6,
            fft_size: 128,
            guard: GuardInterval::Eighth,
            data_carriers: 72,
            total_active_carriers: 96,
        };
        FrameLayout::build(params, PilotSpec::default_grid(local, 5), 16).unwrap()
    }

    #[test]
    fn frame_estimation_noiseless_exact() {
        let layout = small_layout(true);
        let st = ChannelState {
            a_global: Complex64::new(1.0, 0.5),
            a_local: Complex64::new(0.2, -0.1),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let frame = synth_frame(&layout, &st, &mut rng);
        let ests = estimate_per_carrier(&layout, &frame, 8).unwrap();
        assert!(!ests.is_empty());
        for (carrier, est) in &ests {
            assert!(
                (est.a_global_hat - st.a_global).norm() < 1e-13,
                "carrier {carrier}"
            );
            assert!((est.a_local_hat - st.a_local).norm() < 1e-13);
        }
    }

    #[test]
    fn detection_outcomes() {
        let layout = small_layout(true);
        let mut rng = ChaCha8Rng::seed_from_u64(8);

        // satellite only, noiseless: â_local = 0 everywhere → not detected
        let sat = ChannelState {
            a_global: Complex64::new(0.9, -0.1),
            a_local: Complex64::new(0.0, 0.0),
        };
        let frame = synth_frame(&layout, &sat, &mut rng);
        let ests: Vec<ChannelEstimate> = estimate_per_carrier(&layout, &frame, 8)
            .unwrap()
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        assert!(!detect_local(&ests, DEFAULT_DETECTION_THRESHOLD));

        // terrestrial with alpha 2 at high C/N: |â_local| ≈ |a_terr|/3
        let alpha = Alpha::new(2.0).unwrap();
        let terr = ChannelState {
            a_global: Complex64::new(1.0, 0.0),
            a_local: Complex64::new(alpha.local_scale(), 0.0),
        };
        let clean = synth_frame(&layout, &terr, &mut rng);
        let noisy = crate::channel::add_awgn(
            &clean,
            &crate::channel::NoiseSpec {
                cnr_db: 15.0,
                seed: 4,
            },
            crate::channel::mean_power(&clean),
        );
        let ests: Vec<ChannelEstimate> = estimate_per_carrier(&layout, &noisy, 8)
            .unwrap()
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        assert!(detect_local(&ests, DEFAULT_DETECTION_THRESHOLD));
        let (l, g) = detection_statistic(&ests).unwrap();
        assert!((l / g - 1.0 / 3.0).abs() < 0.05);

        // alpha infinite: verticals never transmitted → not detected
        let qpsk = ChannelState {
            a_global: Complex64::new(1.0, 0.0),
            a_local: Complex64::new(0.0, 0.0),
        };
        let frame = synth_frame(&layout, &qpsk, &mut rng);
        let ests: Vec<ChannelEstimate> = estimate_per_carrier(&layout, &frame, 8)
            .unwrap()
            .into_iter()
            .map(|(_, e)| e)
            .collect();
        assert!(!detect_local(&ests, DEFAULT_DETECTION_THRESHOLD));
    }

    #[test]
    fn detection_is_monotone_in_local_power() {
        let layout = small_layout(true);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let stat_for = |local_gain: f64, rng: &mut ChaCha8Rng| {
            let st = ChannelState {
                a_global: Complex64::new(1.0, 0.0),
                a_local: Complex64::new(local_gain, 0.0),
            };
            let clean = synth_frame(&layout, &st, rng);
            let noisy = crate::channel::add_awgn(
                &clean,
                &crate::channel::NoiseSpec {
                    cnr_db: 10.0,
                    seed: 6,
                },
                crate::channel::mean_power(&clean),
            );
            let ests: Vec<ChannelEstimate> = estimate_per_carrier(&layout, &noisy, 8)
                .unwrap()
                .into_iter()
                .map(|(_, e)| e)
                .collect();
            detection_statistic(&ests).unwrap().0
        };
        let mut prev = stat_for(0.05, &mut rng);
        for gain in [0.1, 0.2, 0.4] {
            let s = stat_for(gain, &mut rng);
            assert!(s > prev, "statistic must grow with local power");
            prev = s;
        }
    }

    #[test]
    fn demod_global_noiseless_and_qpsk_equivalence() {
        let est = ChannelEstimate {
            a_global_hat: Complex64::new(0.8, 0.35),
            a_local_hat: Complex64::new(0.0, 0.0),
            n_averaged: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let truth: Vec<u8> = (0..500).map(|_| rng.random_range(0..4u8)).collect();
        let clean: Vec<Complex64> = truth
            .iter()
            .map(|&hp| est.a_global_hat * qpsk_symbol(hp))
            .collect();
        assert_eq!(demod_global(&clean, &est).unwrap(), truth);

        // noisy QPSK: identical to a plain rotate-and-slice demapper
        let noisy = crate::channel::add_awgn(
            &clean,
            &crate::channel::NoiseSpec {
                cnr_db: 3.0,
                seed: 9,
            },
            crate::channel::mean_power(&clean),
        );
        let ours = demod_global(&noisy, &est).unwrap();
        let plain: Vec<u8> = noisy
            .iter()
            .map(|&s| quadrant_dibit(s / est.a_global_hat))
            .collect();
        assert_eq!(ours, plain);
    }

    #[test]
    fn demod_local_behaviour() {
        let est = ChannelEstimate {
            a_global_hat: Complex64::new(1.0, 0.2),
            a_local_hat: Complex64::new(0.25, -0.08),
            n_averaged: 1,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let hp: Vec<u8> = (0..400).map(|_| rng.random_range(0..4u8)).collect();
        let lp: Vec<u8> = (0..400).map(|_| rng.random_range(0..4u8)).collect();
        let clean: Vec<Complex64> = hp
            .iter()
            .zip(&lp)
            .map(|(&h, &l)| est.a_global_hat * qpsk_symbol(h) + est.a_local_hat * qpsk_symbol(l))
            .collect();

        // correct HP decisions: exact LP recovery
        assert_eq!(demod_local(&clean, &hp, &est).unwrap(), lp);

        // forcing wrong HP decisions degrades LP
        let wrong_hp: Vec<u8> = hp.iter().map(|h| h ^ 0b11).collect();
        let lp_bad = demod_local(&clean, &wrong_hp, &est).unwrap();
        let errors = lp_bad.iter().zip(&lp).filter(|(a, b)| a != b).count();
        assert!(
            errors > 100,
            "wrong HP must corrupt LP, got {errors} errors"
        );

        // near-zero local estimate reports the stream absent
        let absent = ChannelEstimate {
            a_local_hat: Complex64::new(1e-12, 0.0),
            ..est
        };
        assert_eq!(
            demod_local(&clean, &hp, &absent),
            Err(ReceiverError::LocalSignalAbsent)
        );

        let zero_global = ChannelEstimate {
            a_global_hat: Complex64::new(0.0, 0.0),
            ..est
        };
        assert_eq!(
            demod_global(&clean, &zero_global),
            Err(ReceiverError::SignalAbsent)
        );
    }

    #[test]
    fn estimates_csv_shape() {
        let rows = vec![(
            3usize,
            ChannelEstimate {
                a_global_hat: Complex64::new(1.0, -0.5),
                a_local_hat: Complex64::new(0.25, 0.0),
                n_averaged: 8,
            },
        )];
        let mut buf = Vec::new();
        write_estimates_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "carrier,a_global_re,a_global_im,a_local_re,a_local_im,n_averaged"
        );
        assert_eq!(lines.next().unwrap(), "3,1,-0.5,0.25,0,8");
    }
}
