//! Non-uniform hierarchical 16-QAM and plain QPSK.
//!
//! The constellation is parametrized by the hierarchy parameter alpha, the
//! ratio a/b of the minimum distance between points in different quadrants
//! to the minimum distance between points inside one quadrant. Per axis the
//! unnormalized levels are `{±alpha, ±(alpha+2)}`, so the quadrant centers
//! sit at `±(1+alpha)` and the within-quadrant offset is `±1`. The mean
//! power over the 16 unnormalized points is `2·((1+alpha)² + 1)`, split as
//! `P_g = 2·(1+alpha)²` carried by the quadrant (high-priority) stream and
//! `P_l = 2` carried by the offset (low-priority) stream.
//!
//! Bit labeling is DVB-style Gray: the two HP bits are the sign bits of I
//! and Q (0 = positive), and the two LP bits are the sign bits of the
//! within-quadrant offset, so a symbol is the superposition of two QPSK
//! components, `center(hp) + offset(lp)`. In a positive-sign quadrant LP
//! bit 0 picks the outer level. Alpha may be any finite real >= 1 or
//! infinite; the infinite case degenerates to QPSK and ignores the LP
//! stream.
//!
//! ```
//! use hmsfn::constellation::{map_hierarchical, Alpha, SymbolBits};
//!
//! let alpha = Alpha::new(2.0).unwrap();
//! let point = map_hierarchical(SymbolBits::new(0, 0), alpha);
//! assert_eq!((point.raw.re, point.raw.im), (4.0, 4.0)); // outer corner
//! ```

use num_complex::Complex64;
use thiserror::Error;

use crate::channel::ChannelState;

/// Hierarchy parameter alpha: finite real >= 1, or infinite for plain QPSK.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Alpha(f64);

#[derive(Debug, Error, PartialEq)]
pub enum AlphaError {
    #[error("alpha must be a finite real >= 1 or infinite, got {0}")]
    Invalid(f64),
}

impl Alpha {
    /// The QPSK degeneration: no local stream.
    pub const INFINITE: Alpha = Alpha(f64::INFINITY);

    pub fn new(value: f64) -> Result<Self, AlphaError> {
        if value.is_nan() || value < 1.0 {
            return Err(AlphaError::Invalid(value));
        }
        Ok(Alpha(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    /// True when the constellation degenerates to QPSK (alpha infinite).
    pub fn is_qpsk(&self) -> bool {
        !self.is_finite()
    }

    /// Amplitude scale `1/(1+alpha)` of the local stream relative to the
    /// global stream; exactly 0 for infinite alpha.
    pub fn local_scale(&self) -> f64 {
        if self.is_qpsk() {
            0.0
        } else {
            1.0 / (1.0 + self.0)
        }
    }

    /// Global-to-local power ratio `(1+alpha)²`; infinite for QPSK.
    pub fn power_ratio(&self) -> f64 {
        if self.is_qpsk() {
            f64::INFINITY
        } else {
            (1.0 + self.0) * (1.0 + self.0)
        }
    }

    /// Parse `"inf"`/`"infinite"` or a decimal value.
    pub fn parse(s: &str) -> Result<Self, AlphaError> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinite") {
            return Ok(Alpha::INFINITE);
        }
        let v: f64 = t.parse().map_err(|_| AlphaError::Invalid(f64::NAN))?;
        Alpha::new(v)
    }
}

impl std::fmt::Display for Alpha {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_qpsk() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

/// One modulated symbol worth of bits: two independent dibits.
///
/// `hp` selects the quadrant (global content), `lp` the within-quadrant
/// offset (local content). Each dibit is in `0..4`; bit 1 is the I-axis bit
/// and bit 0 the Q-axis bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolBits {
    pub hp: u8,
    pub lp: u8,
}

impl SymbolBits {
    pub fn new(hp: u8, lp: u8) -> Self {
        assert!(hp < 4 && lp < 4, "dibits must be in 0..4");
        SymbolBits { hp, lp }
    }
}

/// A constellation point in both unnormalized lattice coordinates and
/// unit-average-power form. Over-the-air samples always use `normalized`;
/// `raw` exists for power accounting and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationPoint {
    pub raw: Complex64,
    pub normalized: Complex64,
}

/// Hard decision out of the demapper. `lp` is absent when the channel
/// carries no local component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HardDecision {
    pub hp: u8,
    pub lp: Option<u8>,
}

#[derive(Debug, Error, PartialEq)]
pub enum DemapError {
    #[error("global channel gain is zero; quadrant decision undefined")]
    ZeroGlobalGain,
}

fn sign_from_bit(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unit-amplitude QPSK point for a dibit: `(±1 ± j)/√2`.
pub fn qpsk_symbol(dibit: u8) -> Complex64 {
    debug_assert!(dibit < 4);
    let re = sign_from_bit((dibit >> 1) & 1) * std::f64::consts::FRAC_1_SQRT_2;
    let im = sign_from_bit(dibit & 1) * std::f64::consts::FRAC_1_SQRT_2;
    Complex64::new(re, im)
}

/// Map an HP dibit onto plain QPSK.
///
/// Raw coordinates are `(±1, ±1)`; all four points have equal magnitude and
/// the normalized form has unit average power.
pub fn map_qpsk(hp: u8) -> ConstellationPoint {
    assert!(hp < 4, "dibit must be in 0..4");
    let raw = Complex64::new(sign_from_bit((hp >> 1) & 1), sign_from_bit(hp & 1));
    ConstellationPoint {
        raw,
        normalized: raw * std::f64::consts::FRAC_1_SQRT_2,
    }
}

/// Map an (HP, LP) dibit pair onto the hierarchical constellation.
///
/// For finite alpha the per-axis unnormalized coordinate is
/// `±(1+alpha) ± 1`: the HP bit signs the quadrant center, the LP bit signs
/// the unit offset. The per-axis levels are therefore `{±alpha, ±(alpha+2)}`.
/// Infinite alpha ignores `lp` and returns the QPSK point.
pub fn map_hierarchical(bits: SymbolBits, alpha: Alpha) -> ConstellationPoint {
    assert!(bits.hp < 4 && bits.lp < 4, "dibits must be in 0..4");
    if alpha.is_qpsk() {
        return map_qpsk(bits.hp);
    }
    let center = 1.0 + alpha.value();
    let re = sign_from_bit((bits.hp >> 1) & 1) * center + sign_from_bit((bits.lp >> 1) & 1);
    let im = sign_from_bit(bits.hp & 1) * center + sign_from_bit(bits.lp & 1);
    let raw = Complex64::new(re, im);
    let norm = (2.0 * (alpha.power_ratio() + 1.0)).sqrt();
    ConstellationPoint {
        raw,
        normalized: raw / norm,
    }
}

/// Unnormalized power split `(P_g, P_l)` of the constellation.
///
/// Finite alpha gives `(2·(1+alpha)², 2)`; their sum is the mean power of
/// the 16 raw points. Infinite alpha has no local stream, so `P_l = 0` and
/// `P_g` is the whole raw QPSK power.
pub fn constellation_power(alpha: Alpha) -> (f64, f64) {
    if alpha.is_qpsk() {
        (2.0, 0.0)
    } else {
        (2.0 * alpha.power_ratio(), 2.0)
    }
}

/// Quadrant decision: the dibit whose QPSK point shares the sample's signs.
pub fn quadrant_dibit(z: Complex64) -> u8 {
    (((z.re < 0.0) as u8) << 1) | (z.im < 0.0) as u8
}

/// Hard two-stage demapping against a known channel.
///
/// The quadrant (HP) is decided first, by minimum distance over the four
/// global centers scaled by `a_global` — equivalently the quadrant of
/// `sample / a_global`. The LP dibit is then decided on the residual
/// `sample − a_global·S_g` against the four local offsets scaled by
/// `a_local`. A zero local gain reports the LP stream absent.
pub fn demap_hierarchical_hard(
    sample: Complex64,
    ch: &ChannelState,
) -> Result<HardDecision, DemapError> {
    if ch.a_global.norm_sqr() == 0.0 {
        return Err(DemapError::ZeroGlobalGain);
    }
    let hp = quadrant_dibit(sample / ch.a_global);
    let lp = if ch.a_local.norm_sqr() == 0.0 {
        None
    } else {
        let residual = sample - ch.a_global * qpsk_symbol(hp);
        Some(quadrant_dibit(residual / ch.a_local))
    };
    Ok(HardDecision { hp, lp })
}
