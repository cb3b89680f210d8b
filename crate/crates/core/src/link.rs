//! Effective Es/N0 analysis and its inversions.
//!
//! With received C/N (linear) and hierarchy parameter alpha, writing
//! `W = (1+alpha)²` for the global/local power ratio:
//!
//! ```text
//! G = W·CNR / (1 + CNR + W)      effective Es/N0 of the global stream
//! L = CNR / (1 + W)              effective Es/N0 of the local stream
//! CNR = G + L + G·L              (identity)
//! ```
//!
//! Each stream behaves like QPSK at its effective Es/N0, so coded
//! performance follows from a reference QPSK threshold or BER curve:
//! inverting G gives the required C/N of the global stream,
//! `CNR = G·(W+1)/(W−G)` (feasible only while `G < W`, the local
//! interference floor), and inverting L gives `CNR = L·(1+W)`. The
//! equal-coverage solver picks alpha so both streams need the same C/N:
//! `W = G·(1+L)/L`.
//!
//! All functions take and return linear power ratios; dB belongs to the
//! I/O boundary.
//!
//! ## Example
//!
//! ```
//! use hmsfn::link::{effective_esn0, required_cnr_global};
//! use hmsfn::{db_to_linear, linear_to_db, Alpha};
//!
//! // C/N at which the global stream of an alpha = 2 signal reaches a
//! // 3.5 dB QPSK requirement
//! let alpha = Alpha::new(2.0).unwrap();
//! let cnr = required_cnr_global(db_to_linear(3.5), alpha).unwrap();
//! assert!((linear_to_db(cnr) - 5.2).abs() < 0.01);
//!
//! // the forward split returns the requirement exactly
//! let split = effective_esn0(cnr, alpha);
//! assert!((linear_to_db(split.global) - 3.5).abs() < 1e-9);
//! ```

use statrs::function::erf::erfc;
use thiserror::Error;

use crate::constellation::Alpha;
use crate::pilots::CodeRate;
use crate::units::{db_to_linear, linear_to_db};

/// Effective Es/N0 pair (linear) of the two streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveSnr {
    pub global: f64,
    pub local: f64,
}

/// Which stream of the hierarchical signal an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Global,
    Local,
}

#[derive(Debug, Error, PartialEq)]
pub enum LinkError {
    #[error(
        "required global Es/N0 {g_req} is not reachable at alpha {alpha}: the local stream \
         caps the effective global Es/N0 below (1+alpha)² = {limit}"
    )]
    InfeasibleGlobal { g_req: f64, alpha: f64, limit: f64 },
    #[error("no local stream exists at infinite alpha")]
    NoLocalStream,
    #[error("equal-coverage alpha would be {alpha:.4}, below the minimum of 1")]
    InfeasibleAlpha { alpha: f64 },
    #[error("input must be positive, got {0}")]
    NotPositive(f64),
    #[error("invalid BER curve: {0}")]
    BadCurve(String),
    #[error("invalid threshold reference: {0}")]
    BadReference(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

/// Split a received C/N into the effective Es/N0 of the two streams.
pub fn effective_esn0(cnr: f64, alpha: Alpha) -> EffectiveSnr {
    assert!(cnr > 0.0, "cnr must be positive");
    if alpha.is_qpsk() {
        return EffectiveSnr {
            global: cnr,
            local: 0.0,
        };
    }
    let w = alpha.power_ratio();
    EffectiveSnr {
        global: w * cnr / (1.0 + cnr + w),
        local: cnr / (1.0 + w),
    }
}

/// C/N at which the global stream reaches effective Es/N0 `g_req`.
pub fn required_cnr_global(g_req: f64, alpha: Alpha) -> Result<f64, LinkError> {
    if g_req.is_nan() || g_req <= 0.0 {
        return Err(LinkError::NotPositive(g_req));
    }
    if alpha.is_qpsk() {
        return Ok(g_req);
    }
    let w = alpha.power_ratio();
    if g_req >= w {
        return Err(LinkError::InfeasibleGlobal {
            g_req,
            alpha: alpha.value(),
            limit: w,
        });
    }
    Ok(g_req * (w + 1.0) / (w - g_req))
}

/// C/N at which the local stream reaches effective Es/N0 `l_req`.
pub fn required_cnr_local(l_req: f64, alpha: Alpha) -> Result<f64, LinkError> {
    if l_req.is_nan() || l_req <= 0.0 {
        return Err(LinkError::NotPositive(l_req));
    }
    if alpha.is_qpsk() {
        return Err(LinkError::NoLocalStream);
    }
    Ok(l_req * (1.0 + alpha.power_ratio()))
}

/// One row of the required-C/N table (all dB). `local_cn_db` is absent at
/// infinite alpha.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRow {
    pub code_rate: CodeRate,
    pub qpsk_cn_db: f64,
    pub global_cn_db: f64,
    pub local_cn_db: Option<f64>,
}

fn validate_reference(reference: &[(CodeRate, f64)]) -> Result<(), LinkError> {
    if reference.is_empty() {
        return Err(LinkError::BadReference("no rows".into()));
    }
    for pair in reference.windows(2) {
        if pair[1].0.value() <= pair[0].0.value() {
            return Err(LinkError::BadReference(format!(
                "code rates must strictly increase ({} then {})",
                pair[0].0, pair[1].0
            )));
        }
        if pair[1].1 <= pair[0].1 {
            return Err(LinkError::BadReference(format!(
                "required C/N must strictly increase with code rate ({} dB then {} dB)",
                pair[0].1, pair[1].1
            )));
        }
    }
    Ok(())
}

/// Derive the hierarchical required-C/N columns from reference QPSK
/// thresholds `(code rate, C/N dB)`.
pub fn threshold_table(
    reference: &[(CodeRate, f64)],
    alpha: Alpha,
) -> Result<Vec<ThresholdRow>, LinkError> {
    validate_reference(reference)?;
    reference
        .iter()
        .map(|&(code_rate, qpsk_cn_db)| {
            let req = db_to_linear(qpsk_cn_db);
            let global_cn_db = linear_to_db(required_cnr_global(req, alpha)?);
            let local_cn_db = if alpha.is_qpsk() {
                None
            } else {
                Some(linear_to_db(required_cnr_local(req, alpha)?))
            };
            Ok(ThresholdRow {
                code_rate,
                qpsk_cn_db,
                global_cn_db,
                local_cn_db,
            })
        })
        .collect()
}

/// Parse a reference threshold CSV (`code_rate,qpsk_cn_db`, `#` comments
/// allowed).
pub fn parse_reference_csv(text: &str) -> Result<Vec<(CodeRate, f64)>, LinkError> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != "code_rate,qpsk_cn_db" {
                return Err(LinkError::Parse {
                    line: lineno + 1,
                    column: 1,
                    message: format!("expected header 'code_rate,qpsk_cn_db', got '{line}'"),
                });
            }
            saw_header = true;
            continue;
        }
        let mut fields = line.split(',');
        let rate_field = fields.next().unwrap_or("");
        let code_rate = CodeRate::parse(rate_field).map_err(|e| LinkError::Parse {
            line: lineno + 1,
            column: 1,
            message: e.to_string(),
        })?;
        let cn_field = fields.next().ok_or(LinkError::Parse {
            line: lineno + 1,
            column: 2,
            message: "missing qpsk_cn_db field".into(),
        })?;
        let cn: f64 = cn_field.trim().parse().map_err(|_| LinkError::Parse {
            line: lineno + 1,
            column: 2,
            message: format!("bad number '{cn_field}'"),
        })?;
        rows.push((code_rate, cn));
    }
    validate_reference(&rows)?;
    Ok(rows)
}

/// A BER-vs-Es/N0 curve: strictly increasing x (dB), BER in (0, 1] and
/// non-increasing. Interpolation is piecewise linear in (dB, log10 BER).
#[derive(Debug, Clone, PartialEq)]
pub struct BerCurve {
    points: Vec<(f64, f64)>,
}

impl BerCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, LinkError> {
        if points.len() < 2 {
            return Err(LinkError::BadCurve("need at least two points".into()));
        }
        for (i, &(x, ber)) in points.iter().enumerate() {
            if !x.is_finite() {
                return Err(LinkError::BadCurve(format!("non-finite x at index {i}")));
            }
            if ber.is_nan() || ber <= 0.0 || ber > 1.0 {
                return Err(LinkError::BadCurve(format!(
                    "BER must be in (0, 1], got {ber} at index {i}"
                )));
            }
        }
        for pair in points.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(LinkError::BadCurve("x must strictly increase".into()));
            }
            if pair[1].1 > pair[0].1 {
                return Err(LinkError::BadCurve("BER must be non-increasing".into()));
            }
        }
        Ok(BerCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn min_x(&self) -> f64 {
        self.points[0].0
    }

    pub fn max_x(&self) -> f64 {
        self.points[self.points.len() - 1].0
    }

    /// Interpolate the BER at `x_db`; `None` outside the tabulated range.
    pub fn interpolate_db(&self, x_db: f64) -> Option<f64> {
        if x_db < self.min_x() || x_db > self.max_x() {
            return None;
        }
        let idx = self
            .points
            .partition_point(|&(x, _)| x < x_db)
            .min(self.points.len() - 1);
        let (x1, b1) = self.points[idx];
        if x1 == x_db {
            return Some(b1);
        }
        let (x0, b0) = self.points[idx - 1];
        let t = (x_db - x0) / (x1 - x0);
        let log_ber = b0.log10() + t * (b1.log10() - b0.log10());
        Some(10f64.powf(log_ber))
    }

    /// Parse a curve CSV (`esn0_db,ber`, `#` comments allowed).
    pub fn parse_csv(text: &str) -> Result<Self, LinkError> {
        let mut points = Vec::new();
        let mut saw_header = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if !saw_header {
                if line != "esn0_db,ber" {
                    return Err(LinkError::Parse {
                        line: lineno + 1,
                        column: 1,
                        message: format!("expected header 'esn0_db,ber', got '{line}'"),
                    });
                }
                saw_header = true;
                continue;
            }
            let mut fields = line.split(',');
            let parse = |field: Option<&str>, column: usize| -> Result<f64, LinkError> {
                let f = field.ok_or(LinkError::Parse {
                    line: lineno + 1,
                    column,
                    message: "missing field".into(),
                })?;
                f.trim().parse().map_err(|_| LinkError::Parse {
                    line: lineno + 1,
                    column,
                    message: format!("bad number '{f}'"),
                })
            };
            let x = parse(fields.next(), 1)?;
            let ber = parse(fields.next(), 2)?;
            points.push((x, ber));
        }
        BerCurve::new(points)
    }
}

/// A synthesized BER-vs-C/N curve; sweep points whose effective Es/N0 fell
/// outside the reference range are listed in `omitted_db`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSynthesis {
    pub curve: Vec<(f64, f64)>,
    pub omitted_db: Vec<f64>,
}

/// Map a reference QPSK BER curve onto one stream of the hierarchical
/// signal: for each C/N sweep point, look the reference up at that stream's
/// effective Es/N0.
pub fn ber_curve_hier(
    reference: &BerCurve,
    alpha: Alpha,
    stream: Stream,
    sweep_db: &[f64],
) -> Result<CurveSynthesis, LinkError> {
    if stream == Stream::Local && alpha.is_qpsk() {
        return Err(LinkError::NoLocalStream);
    }
    for pair in sweep_db.windows(2) {
        if pair[1] <= pair[0] {
            return Err(LinkError::BadCurve("sweep must strictly increase".into()));
        }
    }
    let mut curve = Vec::with_capacity(sweep_db.len());
    let mut omitted = Vec::new();
    for &cnr_db in sweep_db {
        let split = effective_esn0(db_to_linear(cnr_db), alpha);
        let esn0 = match stream {
            Stream::Global => split.global,
            Stream::Local => split.local,
        };
        match reference.interpolate_db(linear_to_db(esn0)) {
            Some(ber) => curve.push((cnr_db, ber)),
            None => omitted.push(cnr_db),
        }
    }
    Ok(CurveSynthesis {
        curve,
        omitted_db: omitted,
    })
}

/// Alpha at which the global stream (needing `g_req`) and the local stream
/// (needing `l_req`) require the same C/N: `(1+alpha)² = g·(1+l)/l`.
pub fn solve_equal_coverage(g_req: f64, l_req: f64) -> Result<Alpha, LinkError> {
    if g_req.is_nan() || g_req <= 0.0 {
        return Err(LinkError::NotPositive(g_req));
    }
    if l_req.is_nan() || l_req <= 0.0 {
        return Err(LinkError::NotPositive(l_req));
    }
    let one_plus_alpha_sq = g_req * (1.0 + l_req) / l_req;
    let alpha = one_plus_alpha_sq.sqrt() - 1.0;
    if alpha < 1.0 {
        return Err(LinkError::InfeasibleAlpha { alpha });
    }
    Ok(Alpha::new(alpha).expect("alpha >= 1 by construction"))
}

/// Gaussian tail probability Q(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exact uncoded bit error probability of the two-stage hard demapper in
/// AWGN at composite C/N `cnr` (linear).
///
/// Per axis the global amplitude is `d = 1/√2` and the local offset
/// `e = d/(1+alpha)`; noise per dimension is `σ² = N/2` with
/// `N = (1 + 1/(1+alpha)²)/cnr` so that C/N counts the composite signal
/// power. The global (HP) bit sees the offset as ±e interference:
///
/// ```text
/// BER_hp = (Q((d+e)/σ) + Q((d−e)/σ)) / 2
/// ```
///
/// The local (LP) bit is decided on the residual after the hard HP
/// decision, which folds the HP error paths in:
///
/// ```text
/// BER_lp = Q(e/σ) + (Q((2d+e)/σ) − Q((d+e)/σ) + Q((d−e)/σ) − Q((2d−e)/σ)) / 2
/// ```
///
/// At infinite alpha the global stream reduces to plain QPSK, `Q(√cnr)`.
pub fn uncoded_ber_exact(cnr: f64, alpha: Alpha, stream: Stream) -> Result<f64, LinkError> {
    if cnr.is_nan() || cnr <= 0.0 {
        return Err(LinkError::NotPositive(cnr));
    }
    if stream == Stream::Local && alpha.is_qpsk() {
        return Err(LinkError::NoLocalStream);
    }
    let scale = alpha.local_scale();
    let composite_power = 1.0 + scale * scale;
    let sigma = (composite_power / cnr / 2.0).sqrt();
    let d = std::f64::consts::FRAC_1_SQRT_2;
    let e = d * scale;
    let ber = match stream {
        Stream::Global => 0.5 * (q_function((d + e) / sigma) + q_function((d - e) / sigma)),
        Stream::Local => {
            q_function(e / sigma)
                + 0.5
                    * (q_function((2.0 * d + e) / sigma) - q_function((d + e) / sigma)
                        + q_function((d - e) / sigma)
                        - q_function((2.0 * d - e) / sigma))
        }
    };
    Ok(ber)
}
