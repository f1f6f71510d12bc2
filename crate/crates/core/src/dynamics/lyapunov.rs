//! Lyapunov spectrum of the two-user map.
//!
//! The finite-time exponents are the eigenvalues of `(1/2l) log(J Jᵀ)` with
//! `J = A⁽ˡ⁻¹⁾ ⋯ A⁽⁰⁾`. Forming `J` directly overflows within a few hundred
//! steps, so the tangent frame is propagated one Jacobian at a time and
//! re-orthonormalised with a QR factorisation; the log of each diagonal entry
//! of `R` is the per-direction stretch for that step.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{divergent, ModelParams, SystemState};

pub const MIN_ITERATIONS: usize = 1_000;
pub const DEFAULT_ITERATIONS: usize = 100_000;
pub const HISTORY_INTERVAL: usize = 100;
pub const DEFAULT_ZERO_BAND: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub exponents: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Nats per iteration, sorted descending.
    pub exponents: [f64; 3],
    pub iterations: usize,
    pub history: Vec<HistoryEntry>,
}

impl LyapunovSpectrum {
    pub fn largest(&self) -> f64 {
        self.exponents[0]
    }

    pub fn sum(&self) -> f64 {
        self.exponents.iter().sum()
    }
}

fn sorted_desc(mut e: [f64; 3]) -> [f64; 3] {
    e.sort_by(|a, b| b.total_cmp(a));
    e
}

pub fn lyapunov_spectrum(
    params: &ModelParams,
    s0: &SystemState,
    iterations: usize,
) -> Result<LyapunovSpectrum> {
    if iterations < MIN_ITERATIONS {
        return Err(Error::InvalidArgument(format!(
            "at least {MIN_ITERATIONS} iterations are required, got {iterations}"
        )));
    }
    let map = params.two_user_map()?;
    let mut state = s0.as_array3()?;
    if divergent(&state) {
        return Err(Error::Divergence { stage: s0.l });
    }

    let mut frame = Matrix3::<f64>::identity();
    let mut log_stretch = [0.0f64; 3];
    let mut history = Vec::with_capacity(iterations / HISTORY_INTERVAL + 1);

    for k in 0..iterations {
        let a = map.jacobian(state);
        let tangent = Matrix3::from_fn(|r, c| a[r][c]) * frame;
        let qr = tangent.qr();
        let r = qr.r();
        for (i, acc) in log_stretch.iter_mut().enumerate() {
            *acc += r[(i, i)].abs().ln();
        }
        frame = qr.q();

        state = map.apply(state);
        if divergent(&state) {
            return Err(Error::Divergence {
                stage: s0.l + k as u64 + 1,
            });
        }

        let done = k + 1;
        if done % HISTORY_INTERVAL == 0 || done == iterations {
            let n = done as f64;
            history.push(HistoryEntry {
                iteration: done,
                exponents: sorted_desc(log_stretch.map(|s| s / n)),
            });
        }
    }

    let exponents = history.last().expect("iterations >= 1").exponents;
    Ok(LyapunovSpectrum {
        exponents,
        iterations,
        history,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AttractorKind {
    FixedOrPeriodic,
    Quasiperiodic,
    Chaotic,
}

pub fn classify_attractor(spectrum: &LyapunovSpectrum, zero_band: f64) -> Result<AttractorKind> {
    if !(zero_band > 0.0) {
        return Err(Error::InvalidArgument("zero_band must be positive".into()));
    }
    let top = spectrum.largest();
    Ok(if top > zero_band {
        AttractorKind::Chaotic
    } else if top.abs() <= zero_band {
        AttractorKind::Quasiperiodic
    } else {
        AttractorKind::FixedOrPeriodic
    })
}
