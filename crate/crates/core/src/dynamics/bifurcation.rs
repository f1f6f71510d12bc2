use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::lyapunov::lyapunov_spectrum;
use crate::error::{Error, Result};
use crate::model::{iterate, ModelParams, SystemState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Alpha,
    Xi1,
    Xi2,
}

impl SweepParameter {
    fn apply(self, base: &ModelParams, value: f64) -> ModelParams {
        let mut p = base.clone();
        match self {
            SweepParameter::Alpha => p.alpha = value,
            SweepParameter::Xi1 => p.xi[0] = value,
            SweepParameter::Xi2 => p.xi[1] = value,
        }
        p
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::Alpha => "alpha",
            SweepParameter::Xi1 => "xi1",
            SweepParameter::Xi2 => "xi2",
        })
    }
}

impl FromStr for SweepParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParameter::Alpha),
            "xi1" => Ok(SweepParameter::Xi1),
            "xi2" => Ok(SweepParameter::Xi2),
            other => Err(Error::InvalidArgument(format!("unknown sweep parameter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Sweep {
    /// `points` equally spaced values on `(lo, hi]`; a single point is `hi`.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points as f64;
        (1..=self.points)
            .map(|k| {
                if k == self.points {
                    self.hi
                } else {
                    self.lo + (self.hi - self.lo) * (k as f64 / n)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub transient: usize,
    pub samples: usize,
    pub lyapunov_iterations: usize,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self {
            transient: 1_000,
            samples: 200,
            lyapunov_iterations: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSample {
    pub value: f64,
    /// Post-transient capacity values; empty when the point diverged.
    pub v_samples: Vec<f64>,
    pub largest_exponent: Option<f64>,
    pub divergent_at: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BifurcationScan {
    pub swept_parameter: SweepParameter,
    pub grid: Vec<f64>,
    pub fixed_params: ModelParams,
    pub samples: Vec<GridSample>,
}

fn scan_point(params: &ModelParams, value: f64, s0: &SystemState, settings: &ScanSettings) -> GridSample {
    let diverged = |stage| GridSample {
        value,
        v_samples: Vec::new(),
        largest_exponent: None,
        divergent_at: Some(stage),
    };
    let traj = match iterate(params, s0, settings.transient + settings.samples, settings.transient) {
        Ok(t) => t,
        Err(Error::Divergence { stage }) => return diverged(stage),
        Err(_) => unreachable!("arguments validated by bifurcation_scan"),
    };
    let start = traj.first().expect("samples >= 1");
    match lyapunov_spectrum(params, start, settings.lyapunov_iterations) {
        Ok(spec) => GridSample {
            value,
            v_samples: traj.v_series(),
            largest_exponent: Some(spec.largest()),
            divergent_at: None,
        },
        Err(Error::Divergence { stage }) => diverged(stage),
        Err(_) => unreachable!("arguments validated by bifurcation_scan"),
    }
}

/// Sweeps one parameter and records, per grid value, the capacity samples
/// after the transient and the largest Lyapunov exponent of the orbit from the
/// first post-transient state. Grid points are evaluated in parallel and
/// returned in grid order; divergent points are marked rather than fatal.
pub fn bifurcation_scan(
    base: &ModelParams,
    sweep: Sweep,
    s0: &SystemState,
    settings: ScanSettings,
) -> Result<BifurcationScan> {
    base.two_user_map()?;
    s0.as_array3()?;
    if sweep.points == 0 {
        return Err(Error::InvalidArgument("sweep needs at least one point".into()));
    }
    if !(sweep.lo < sweep.hi) {
        return Err(Error::InvalidArgument("sweep requires lo < hi".into()));
    }
    if settings.samples == 0 {
        return Err(Error::InvalidArgument("samples must be >= 1".into()));
    }
    if settings.lyapunov_iterations < crate::dynamics::lyapunov::MIN_ITERATIONS {
        return Err(Error::InvalidArgument(format!(
            "lyapunov_iterations must be >= {}",
            crate::dynamics::lyapunov::MIN_ITERATIONS
        )));
    }
    let grid = sweep.grid();
    let point_params: Vec<ModelParams> = grid
        .iter()
        .map(|&value| {
            let p = sweep.parameter.apply(base, value);
            p.validate().map(|_| p)
        })
        .collect::<Result<_>>()?;

    let samples = grid
        .par_iter()
        .zip(point_params.par_iter())
        .map(|(&value, params)| scan_point(params, value, s0, &settings))
        .collect();

    Ok(BifurcationScan {
        swept_parameter: sweep.parameter,
        grid,
        fixed_params: base.clone(),
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_half_open_and_increasing() {
        let g = Sweep { parameter: SweepParameter::Alpha, lo: 0.0, hi: 1.0, points: 4 }.grid();
        assert_eq!(g, vec![0.25, 0.5, 0.75, 1.0]);
        let g = Sweep { parameter: SweepParameter::Alpha, lo: 0.01, hi: 1.0, points: 400 }.grid();
        assert_eq!(g.len(), 400);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(g[0] > 0.01);
        assert_eq!(*g.last().unwrap(), 1.0);
    }

    #[test]
    fn sweep_parameter_parse() {
        assert_eq!("xi1".parse::<SweepParameter>().unwrap(), SweepParameter::Xi1);
        assert!("beta".parse::<SweepParameter>().is_err());
        assert_eq!(SweepParameter::Xi2.to_string(), "xi2");
    }

    #[test]
    fn rejects_bad_sweeps() {
        let base = ModelParams::two_user(0.5, 1.28, 1.23).unwrap();
        let s0 = SystemState::new(0.01, vec![0.01, -0.01]);
        let bad = Sweep { parameter: SweepParameter::Alpha, lo: 0.5, hi: 0.5, points: 3 };
        assert!(bifurcation_scan(&base, bad, &s0, ScanSettings::default()).is_err());
        let invalid_alpha = Sweep { parameter: SweepParameter::Alpha, lo: 0.5, hi: 1.5, points: 3 };
        assert!(bifurcation_scan(&base, invalid_alpha, &s0, ScanSettings::default()).is_err());
    }

    #[test]
    fn single_point_matches_direct_evaluation() {
        let base = ModelParams::two_user(0.5, 1.28, 1.23).unwrap();
        let s0 = SystemState::new(0.01, vec![0.01, -0.01]);
        let settings = ScanSettings { transient: 500, samples: 50, lyapunov_iterations: 2_000 };
        let sweep = Sweep { parameter: SweepParameter::Alpha, lo: 0.0, hi: 0.6, points: 1 };
        let scan = bifurcation_scan(&base, sweep, &s0, settings).unwrap();
        assert_eq!(scan.samples.len(), 1);

        let params = ModelParams::two_user(0.6, 1.28, 1.23).unwrap();
        let traj = iterate(&params, &s0, 550, 500).unwrap();
        let spec = lyapunov_spectrum(&params, traj.first().unwrap(), 2_000).unwrap();
        assert_eq!(scan.samples[0].v_samples, traj.v_series());
        assert_eq!(scan.samples[0].largest_exponent, Some(spec.largest()));
    }

    #[test]
    fn divergent_points_are_marked() {
        let base = ModelParams::two_user(0.5, 1.28, 1.23).unwrap();
        let s0 = SystemState::new(0.01, vec![0.01, -0.01]);
        let settings = ScanSettings { transient: 1_000, samples: 10, lyapunov_iterations: 1_000 };
        let sweep = Sweep { parameter: SweepParameter::Alpha, lo: 0.0, hi: 0.1, points: 3 };
        let scan = bifurcation_scan(&base, sweep, &s0, settings).unwrap();
        assert!(scan.samples.iter().all(|s| s.divergent_at.is_some() && s.v_samples.is_empty()));
    }
}
