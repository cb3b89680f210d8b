//! Static-gain channel synthesis: satellite-only, terrestrial-only and
//! hybrid reception with seeded AWGN.
//!
//! Per subcarrier the received sample is
//!
//! ```text
//! r = a_global·S_g + a_local·S_l + n,
//! a_global = a_sat + a_terr,   a_local = a_terr/(1+alpha),
//! ```
//!
//! where `S_g` and `S_l` are unit-amplitude QPSK symbols carrying the global
//! and local dibits. Gains are constant complex values (no fading); noise is
//! circularly-symmetric complex Gaussian calibrated against the composite
//! received power `P_r`, so `C/N = P_r / N`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::constellation::{qpsk_symbol, Alpha, SymbolBits};
use crate::units::db_to_linear;

/// Complex path gains of the satellite and terrestrial signals at one
/// subcarrier. Either may be zero (signal absent).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGains {
    pub a_sat: Complex64,
    pub a_terr: Complex64,
}

/// Channel response seen by the two constellation components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    /// Gain multiplying the global QPSK component (`a_sat + a_terr`).
    pub a_global: Complex64,
    /// Gain multiplying the local QPSK component (`a_terr/(1+alpha)`);
    /// zero when alpha is infinite or no terrestrial signal exists.
    pub a_local: Complex64,
}

/// Additive noise description: C/N of the composite received signal in dB
/// (`+inf` switches noise off) plus the generator seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub cnr_db: f64,
    pub seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("stream length mismatch: {hp} HP dibits vs {lp} LP dibits")]
    LengthMismatch { hp: usize, lp: usize },
    #[error("terrestrial mean-square gain must be positive, got {0}")]
    NoTerrestrialPower(f64),
}

/// Combine path gains into the per-component channel state.
pub fn combine_hybrid(gains: &PathGains, alpha: Alpha) -> ChannelState {
    ChannelState {
        a_global: gains.a_sat + gains.a_terr,
        a_local: gains.a_terr * alpha.local_scale(),
    }
}

/// Zip independent HP and LP dibit streams into per-subcarrier symbols.
pub fn pair_streams(hp: &[u8], lp: &[u8]) -> Result<Vec<SymbolBits>, ChannelError> {
    if hp.len() != lp.len() {
        return Err(ChannelError::LengthMismatch {
            hp: hp.len(),
            lp: lp.len(),
        });
    }
    Ok(hp
        .iter()
        .zip(lp)
        .map(|(&h, &l)| SymbolBits::new(h, l))
        .collect())
}

/// Noiseless received sequence: `a_global·S_g + a_local·S_l` per symbol.
pub fn transmit(symbols: &[SymbolBits], state: &ChannelState) -> Vec<Complex64> {
    symbols
        .iter()
        .map(|b| state.a_global * qpsk_symbol(b.hp) + state.a_local * qpsk_symbol(b.lp))
        .collect()
}

/// Mean power of a sample block.
pub fn mean_power(samples: &[Complex64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / samples.len() as f64
}

/// Add seeded complex AWGN with total power `signal_power / 10^(cnr/10)`.
///
/// Per-dimension variance is N/2. `cnr_db = +inf` returns the samples
/// unchanged; identical seeds give identical realizations.
pub fn add_awgn(samples: &[Complex64], spec: &NoiseSpec, signal_power: f64) -> Vec<Complex64> {
    if spec.cnr_db.is_infinite() && spec.cnr_db > 0.0 {
        return samples.to_vec();
    }
    let n = signal_power / db_to_linear(spec.cnr_db);
    let sigma = (n / 2.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    samples
        .iter()
        .map(|s| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            s + Complex64::new(re * sigma, im * sigma)
        })
        .collect()
}

/// SFN gain of the global stream: `1 + E|a_sat|²/E|a_terr|²`, always >= 1.
pub fn sfn_gain(mean_sq_sat: f64, mean_sq_terr: f64) -> Result<f64, ChannelError> {
    if mean_sq_terr <= 0.0 {
        return Err(ChannelError::NoTerrestrialPower(mean_sq_terr));
    }
    Ok(1.0 + mean_sq_sat / mean_sq_terr)
}
