//! OFDM frame layout, modified pilots and data-rate arithmetic.
//!
//! Pilot cells are BPSK values `±p` (p = 1). A transmitter carrying local
//! content replaces them with modified pilots that gain an imaginary
//! component of amplitude `p/(alpha+1)`:
//!
//! - continual pilots (fixed carriers, every symbol):
//!   `P̃_i = P_i + j·(−1)^i·P_i/(alpha+1)`,
//! - scattered pilots: the cell one symbol after a scattered pilot is also
//!   reserved, and the pair is sent as
//!   `P̃_i = P_i + j·P_i/(alpha+1)`, `P̃_{i+1} = P_i − j·P_i/(alpha+1)`.
//!
//! Either way a pilot appears twice at the same carrier with vertical
//! components of opposite polarity, which is what makes the joint
//! global/local channel estimate solvable. The modification raises pilot
//! power by `1 + 1/(alpha+1)²`, the same factor the data cells gain from
//! the local stream, and each scattered pilot costs one extra data cell.
//!
//! The grid is a simplified DVB-T-style pattern: continual pilots on a fixed
//! carrier comb, scattered pilots striding across carriers with a per-symbol
//! phase rotation. In local-content mode the network reserves the scattered
//! partner cells in every transmitter; transmitters without local content
//! send the plain horizontal component there.

use std::io::{self, Write};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::constellation::Alpha;

/// Guard interval as a fraction of the useful symbol time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuardInterval {
    Quarter,
    Eighth,
    Sixteenth,
    ThirtySecond,
}

impl GuardInterval {
    pub fn fraction(&self) -> f64 {
        match self {
            GuardInterval::Quarter => 0.25,
            GuardInterval::Eighth => 0.125,
            GuardInterval::Sixteenth => 0.0625,
            GuardInterval::ThirtySecond => 0.03125,
        }
    }

    pub fn parse(s: &str) -> Result<Self, FrameError> {
        match s.trim() {
            "1/4" => Ok(GuardInterval::Quarter),
            "1/8" => Ok(GuardInterval::Eighth),
            "1/16" => Ok(GuardInterval::Sixteenth),
            "1/32" => Ok(GuardInterval::ThirtySecond),
            other => Err(FrameError::BadGuardInterval(other.to_string())),
        }
    }
}

impl std::fmt::Display for GuardInterval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            GuardInterval::Quarter => "1/4",
            GuardInterval::Eighth => "1/8",
            GuardInterval::Sixteenth => "1/16",
            GuardInterval::ThirtySecond => "1/32",
        };
        f.write_str(s)
    }
}

/// OFDM numerology of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameParams {
    pub bandwidth_hz: f64,
    pub fft_size: usize,
    pub guard: GuardInterval,
    pub data_carriers: usize,
    pub total_active_carriers: usize,
}

impl FrameParams {
    /// The 5 MHz / 2K configuration: GI 1/8, 1512 data carriers out of
    /// 1705 active.
    pub fn dvb_5mhz_2k() -> Self {
        FrameParams {
            bandwidth_hz: 5e6,
            fft_size: 2048,
            guard: GuardInterval::Eighth,
            data_carriers: 1512,
            total_active_carriers: 1705,
        }
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if self.bandwidth_hz.is_nan() || self.bandwidth_hz <= 0.0 {
            return Err(FrameError::BadParams(
                "bandwidth_hz must be positive".into(),
            ));
        }
        if !(self.data_carriers < self.total_active_carriers
            && self.total_active_carriers < self.fft_size)
        {
            return Err(FrameError::BadParams(
                "need data_carriers < total_active_carriers < fft_size".into(),
            ));
        }
        Ok(())
    }

    /// Baseband sample rate, scaled from the 8 MHz reference rate of
    /// 64/7 MHz: `bandwidth · 8/7`.
    pub fn sample_rate_hz(&self) -> f64 {
        self.bandwidth_hz * 8.0 / 7.0
    }

    /// Useful (FFT) symbol duration in seconds.
    pub fn useful_symbol_s(&self) -> f64 {
        self.fft_size as f64 / self.sample_rate_hz()
    }

    /// Total symbol duration including the guard interval.
    pub fn symbol_duration_s(&self) -> f64 {
        (1.0 + self.guard.fraction()) * self.useful_symbol_s()
    }
}

/// Exact rational code rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeRate {
    num: u32,
    den: u32,
}

impl CodeRate {
    pub fn new(num: u32, den: u32) -> Result<Self, FrameError> {
        if num == 0 || den == 0 || num > den {
            return Err(FrameError::BadCodeRate(format!("{num}/{den}")));
        }
        Ok(CodeRate { num, den })
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact ratio of two code rates (numerator product over denominator
    /// product, no intermediate rounding).
    pub fn ratio_to(&self, other: &CodeRate) -> f64 {
        (self.num as u64 * other.den as u64) as f64 / (self.den as u64 * other.num as u64) as f64
    }

    pub fn parse(s: &str) -> Result<Self, FrameError> {
        let t = s.trim();
        let (n, d) = t
            .split_once('/')
            .ok_or_else(|| FrameError::BadCodeRate(t.to_string()))?;
        let num: u32 = n
            .trim()
            .parse()
            .map_err(|_| FrameError::BadCodeRate(t.to_string()))?;
        let den: u32 = d
            .trim()
            .parse()
            .map_err(|_| FrameError::BadCodeRate(t.to_string()))?;
        CodeRate::new(num, den)
    }
}

impl std::fmt::Display for CodeRate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum FrameError {
    #[error("invalid frame parameters: {0}")]
    BadParams(String),
    #[error("guard interval must be one of 1/4, 1/8, 1/16, 1/32, got {0}")]
    BadGuardInterval(String),
    #[error("invalid code rate {0}")]
    BadCodeRate(String),
    #[error("pilot rules overlap at carrier {carrier}, symbol {symbol}")]
    PilotOverlap { carrier: usize, symbol: usize },
}

/// User data rate in bit/s: QPSK-equivalent 2 bits per data carrier per
/// symbol, scaled by the code rate and a single multiplicative framing
/// efficiency.
pub fn user_data_rate(params: &FrameParams, code_rate: CodeRate, overhead: f64) -> f64 {
    assert!(
        overhead > 0.0 && overhead <= 1.0,
        "overhead must be in (0, 1]"
    );
    let bits_per_symbol = params.data_carriers as f64 * 2.0 * code_rate.value();
    bits_per_symbol * overhead / params.symbol_duration_s()
}

/// Framing efficiency that maps the raw 5.000 Mbit/s of the 5 MHz / 2K,
/// rate-2/3 configuration onto the nominal 4.937 Mbit/s user rate.
pub const DEFAULT_FRAMING_OVERHEAD: f64 = 0.9874;

struct BpskSource {
    rng: ChaCha8Rng,
}

impl BpskSource {
    fn new(seed: u64) -> Self {
        BpskSource {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn next(&mut self) -> f64 {
        if self.rng.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }
}

/// Deterministic, seed-reproducible `±1` BPSK pilot sequence.
pub fn base_pilot_sequence(seed: u64, count: usize) -> Vec<f64> {
    let mut src = BpskSource::new(seed);
    (0..count).map(|_| src.next()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PilotKind {
    Continual,
    ScatteredFirst,
    ScatteredSecond,
}

impl PilotKind {
    pub fn label(&self) -> &'static str {
        match self {
            PilotKind::Continual => "continual",
            PilotKind::ScatteredFirst => "scattered_first",
            PilotKind::ScatteredSecond => "scattered_second",
        }
    }
}

/// One pilot cell. `base` is the BPSK value; `polarity` is the sign of the
/// vertical component so that the two cells of any pilot pair oppose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotCell {
    pub carrier: usize,
    pub symbol: usize,
    pub kind: PilotKind,
    pub base: f64,
    pub polarity: f64,
}

impl PilotCell {
    /// Unit-amplitude vertical component `j·polarity·base`. This is the
    /// known "local" basis the estimator solves against; the transmitted
    /// signal carries it scaled by `a_terr/(1+alpha)`.
    pub fn vertical(&self) -> Complex64 {
        Complex64::new(0.0, self.polarity * self.base)
    }

    /// The modified pilot a local-content transmitter emits at this cell.
    pub fn modified(&self, alpha: Alpha) -> Complex64 {
        Complex64::new(self.base, self.polarity * self.base * alpha.local_scale())
    }
}

/// Modified continual pilot `P_i + j·(−1)^i·P_i/(alpha+1)`.
///
/// Infinite alpha leaves the pilot unmodified (no local content).
pub fn modify_continual_pilot(p: f64, i: usize, alpha: Alpha) -> Complex64 {
    let polarity = if i.is_multiple_of(2) { 1.0 } else { -1.0 };
    Complex64::new(p, polarity * p * alpha.local_scale())
}

/// Modified scattered pilot pair sharing one base value: vertical parts of
/// equal magnitude `|p|/(alpha+1)` and opposite polarity.
pub fn modify_scattered_pair(p: f64, alpha: Alpha) -> (Complex64, Complex64) {
    let v = p * alpha.local_scale();
    (Complex64::new(p, v), Complex64::new(p, -v))
}

/// Power increase of a modified pilot over its base: `1 + 1/(alpha+1)²`.
pub fn pilot_power_factor(alpha: Alpha) -> f64 {
    let s = alpha.local_scale();
    1.0 + s * s
}

/// Pilot grid rule set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PilotSpec {
    /// Continual pilots on carriers `k ≡ continual_offset (mod continual_stride)`.
    pub continual_stride: usize,
    pub continual_offset: usize,
    /// Scattered pilots on carriers `k ≡ scattered_step·(symbol mod scattered_phases)
    /// (mod scattered_stride)`.
    pub scattered_stride: usize,
    pub scattered_step: usize,
    pub scattered_phases: usize,
    /// Network-wide local-content mode: reserve the partner cell after each
    /// scattered pilot and send modified pilots from local-content
    /// transmitters. Off means the plain grid; partner cells stay data.
    pub local_content: bool,
    pub pilot_seed: u64,
}

impl PilotSpec {
    pub fn default_grid(local_content: bool, pilot_seed: u64) -> Self {
        PilotSpec {
            continual_stride: 48,
            continual_offset: 1,
            scattered_stride: 12,
            scattered_step: 3,
            scattered_phases: 4,
            local_content,
            pilot_seed,
        }
    }

    fn is_continual(&self, carrier: usize) -> bool {
        carrier % self.continual_stride == self.continual_offset
    }

    fn is_scattered(&self, carrier: usize, symbol: usize) -> bool {
        let offset =
            (self.scattered_step * (symbol % self.scattered_phases)) % self.scattered_stride;
        carrier % self.scattered_stride == offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Data,
    Pilot(PilotCell),
}

/// Deterministic cell map of an OFDM frame: `(carrier, symbol) → data | pilot`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameLayout {
    pub params: FrameParams,
    pub spec: PilotSpec,
    pub n_symbols: usize,
    cells: Vec<Cell>,
}

impl FrameLayout {
    pub fn build(
        params: FrameParams,
        spec: PilotSpec,
        n_symbols: usize,
    ) -> Result<Self, FrameError> {
        params.validate()?;
        if spec.continual_stride == 0
            || spec.scattered_stride == 0
            || spec.scattered_phases == 0
            || n_symbols == 0
        {
            return Err(FrameError::BadParams(
                "strides, phases and n_symbols must be nonzero".into(),
            ));
        }
        let active = params.total_active_carriers;
        let mut cells = vec![Cell::Data; active * n_symbols];
        let mut src = BpskSource::new(spec.pilot_seed);

        for symbol in 0..n_symbols {
            for carrier in 0..active {
                let idx = symbol * active + carrier;
                let continual = spec.is_continual(carrier);
                let scattered = spec.is_scattered(carrier, symbol);
                if continual && scattered {
                    return Err(FrameError::PilotOverlap { carrier, symbol });
                }
                if continual {
                    if !matches!(cells[idx], Cell::Data) {
                        return Err(FrameError::PilotOverlap { carrier, symbol });
                    }
                    let polarity = if symbol.is_multiple_of(2) { 1.0 } else { -1.0 };
                    cells[idx] = Cell::Pilot(PilotCell {
                        carrier,
                        symbol,
                        kind: PilotKind::Continual,
                        base: src.next(),
                        polarity,
                    });
                } else if scattered {
                    if !matches!(cells[idx], Cell::Data) {
                        return Err(FrameError::PilotOverlap { carrier, symbol });
                    }
                    if spec.local_content {
                        // a scattered pilot needs its partner cell; skip the
                        // trailing position that has no room for the pair
                        if symbol + 1 >= n_symbols {
                            continue;
                        }
                        let partner = idx + active;
                        if !matches!(cells[partner], Cell::Data) {
                            return Err(FrameError::PilotOverlap {
                                carrier,
                                symbol: symbol + 1,
                            });
                        }
                        let base = src.next();
                        cells[idx] = Cell::Pilot(PilotCell {
                            carrier,
                            symbol,
                            kind: PilotKind::ScatteredFirst,
                            base,
                            polarity: 1.0,
                        });
                        cells[partner] = Cell::Pilot(PilotCell {
                            carrier,
                            symbol: symbol + 1,
                            kind: PilotKind::ScatteredSecond,
                            base,
                            polarity: -1.0,
                        });
                    } else {
                        cells[idx] = Cell::Pilot(PilotCell {
                            carrier,
                            symbol,
                            kind: PilotKind::ScatteredFirst,
                            base: src.next(),
                            polarity: 1.0,
                        });
                    }
                }
            }
        }
        Ok(FrameLayout {
            params,
            spec,
            n_symbols,
            cells,
        })
    }

    pub fn active_carriers(&self) -> usize {
        self.params.total_active_carriers
    }

    pub fn index(&self, carrier: usize, symbol: usize) -> usize {
        symbol * self.active_carriers() + carrier
    }

    pub fn cell(&self, carrier: usize, symbol: usize) -> &Cell {
        &self.cells[self.index(carrier, symbol)]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn pilot_cells(&self) -> impl Iterator<Item = &PilotCell> {
        self.cells.iter().filter_map(|c| match c {
            Cell::Pilot(p) => Some(p),
            Cell::Data => None,
        })
    }

    pub fn count_kind(&self, kind: PilotKind) -> usize {
        self.pilot_cells().filter(|p| p.kind == kind).count()
    }

    pub fn data_cell_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, Cell::Data))
            .count()
    }

    /// Data cells sacrificed to the scattered-pilot partners.
    pub fn extra_carriers_consumed(&self) -> usize {
        self.count_kind(PilotKind::ScatteredSecond)
    }

    /// Dump the layout as CSV (`carrier,symbol,kind,re,im`). Pilot rows carry
    /// the value a local-content transmitter would emit at the given alpha;
    /// data rows leave re/im empty.
    pub fn write_csv<W: Write>(&self, alpha: Alpha, w: &mut W) -> io::Result<()> {
        writeln!(w, "carrier,symbol,kind,re,im")?;
        for symbol in 0..self.n_symbols {
            for carrier in 0..self.active_carriers() {
                match self.cell(carrier, symbol) {
                    Cell::Data => writeln!(w, "{carrier},{symbol},data,,")?,
                    Cell::Pilot(p) => {
                        let v = p.modified(alpha);
                        writeln!(w, "{carrier},{symbol},{},{},{}", p.kind.label(), v.re, v.im)?
                    }
                }
            }
        }
        Ok(())
    }
}
