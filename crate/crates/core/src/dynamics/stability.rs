//! Fixed points and linear stability of the two-user map.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{divergent, ModelParams};

pub type Vec3 = [f64; 3];
/// Row-major 3×3 matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Newton stops once the max-norm residual drops below this.
pub const FIXED_POINT_TOLERANCE: f64 = 1e-12;
pub const FIXED_POINT_MAX_STEPS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub seed: Vec3,
    pub point: Vec3,
    /// Max-norm of `F(X) − X` at `point`.
    pub residual: f64,
    pub converged: bool,
    pub newton_steps: usize,
}

/// Max-norm of `F(X) − X`.
pub fn residual(params: &ModelParams, point: Vec3) -> Result<f64> {
    let map = params.two_user_map()?;
    Ok(max_norm(displacement(&map.apply(point), &point)))
}

fn displacement(image: &Vec3, point: &Vec3) -> Vec3 {
    [image[0] - point[0], image[1] - point[1], image[2] - point[2]]
}

fn max_norm(v: Vec3) -> f64 {
    v.iter().fold(0.0f64, |m, c| if c.is_nan() { f64::NAN } else { m.max(c.abs()) })
}

/// Damped Newton on `F(X) − X = 0` from each seed, with a central-difference
/// Jacobian. Seeds that fail to converge are returned with `converged = false`.
pub fn find_fixed_points(params: &ModelParams, seeds: &[Vec3]) -> Result<Vec<FixedPoint>> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("at least one seed is required".into()));
    }
    let map = params.two_user_map()?;
    let g = |x: &Vec3| displacement(&map.apply(*x), x);

    Ok(seeds
        .iter()
        .map(|&seed| {
            let mut x = seed;
            let mut gx = g(&x);
            let mut res = max_norm(gx);
            let mut steps = 0;
            while !(res < FIXED_POINT_TOLERANCE) && steps < FIXED_POINT_MAX_STEPS && res.is_finite() {
                let Some(dx) = newton_direction(&g, &x, &gx) else { break };
                let mut t = 1.0;
                let mut accepted = false;
                while t > 1e-10 {
                    let trial = [x[0] + t * dx[0], x[1] + t * dx[1], x[2] + t * dx[2]];
                    let gt = g(&trial);
                    let rt = max_norm(gt);
                    if rt < res {
                        x = trial;
                        gx = gt;
                        res = rt;
                        accepted = true;
                        break;
                    }
                    t *= 0.5;
                }
                steps += 1;
                if !accepted || divergent(&x) {
                    break;
                }
            }
            FixedPoint {
                seed,
                point: x,
                residual: res,
                converged: res < FIXED_POINT_TOLERANCE,
                newton_steps: steps,
            }
        })
        .collect())
}

fn newton_direction(g: &impl Fn(&Vec3) -> Vec3, x: &Vec3, gx: &Vec3) -> Option<Vec3> {
    let mut jac = Matrix3::zeros();
    for k in 0..3 {
        let h = 1e-6 * x[k].abs().max(1.0);
        let mut hi = *x;
        let mut lo = *x;
        hi[k] += h;
        lo[k] -= h;
        let (ghi, glo) = (g(&hi), g(&lo));
        for r in 0..3 {
            jac[(r, k)] = (ghi[r] - glo[r]) / (2.0 * h);
        }
    }
    let rhs = -Vector3::new(gx[0], gx[1], gx[2]);
    let dx = jac.lu().solve(&rhs)?;
    dx.iter().all(|c| c.is_finite()).then(|| [dx[0], dx[1], dx[2]])
}

/// Analytic Jacobian of the two-user map at `point`.
pub fn jacobian_at(params: &ModelParams, point: Vec3) -> Result<Mat3> {
    if point.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidArgument("point has non-finite components".into()));
    }
    Ok(params.two_user_map()?.jacobian(point))
}

/// Coefficients of `λ³ + Pλ² + Qλ + R` for the linearisation about the
/// published non-trivial fixed point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffs {
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

pub fn characteristic_coeffs(params: &ModelParams) -> Result<CharCoeffs> {
    let map = params.two_user_map()?;
    let (a, x1, x2) = (map.alpha, map.xi1, map.xi2);
    Ok(CharCoeffs {
        p: -(a - x1 + x2),
        q: 1.5 * a * (x2 - x1),
        r: 2.0 * a * x1 * x2,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouthVerdict {
    Stable,
    Marginal,
    Unstable,
}

/// Relative tolerance for the `PQ = R` boundary.
const ROUTH_BOUNDARY_RTOL: f64 = 1e-12;

/// Routh–Hurwitz conditions for a monic cubic, applied as stated:
/// stable iff `P, Q, R > 0` and `PQ > R`.
pub fn routh_classify(c: CharCoeffs) -> RouthVerdict {
    if !(c.p > 0.0 && c.q > 0.0 && c.r > 0.0) {
        return RouthVerdict::Unstable;
    }
    let pq = c.p * c.q;
    if (pq - c.r).abs() <= ROUTH_BOUNDARY_RTOL * pq.abs().max(c.r.abs()) {
        RouthVerdict::Marginal
    } else if pq > c.r {
        RouthVerdict::Stable
    } else {
        RouthVerdict::Unstable
    }
}

/// The published window `0 < α < ξ₂ − ξ₁ <= 1`. It does not follow from
/// [`routh_classify`] and is kept as a separate predicate.
pub fn published_stability_window(params: &ModelParams) -> Result<bool> {
    let map = params.two_user_map()?;
    let gap = map.xi2 - map.xi1;
    Ok(0.0 < map.alpha && map.alpha < gap && gap <= 1.0)
}

/// α at which `PQ = R`: `[3(ξ₁−ξ₂)² + 4ξ₁ξ₂] / [3(ξ₁−ξ₂)]`.
pub fn hopf_alpha(xi1: f64, xi2: f64) -> Result<f64> {
    let d = xi1 - xi2;
    if d == 0.0 {
        return Err(Error::SingularParameters);
    }
    Ok((3.0 * d * d + 4.0 * xi1 * xi2) / (3.0 * d))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        self.re.hypot(self.im)
    }
}

/// Eigenvalues sorted by decreasing modulus, then decreasing imaginary part.
pub fn eigenvalues(m: &Mat3) -> [Eigenvalue; 3] {
    let mat = Matrix3::from_fn(|r, c| m[r][c]);
    let ev = mat.complex_eigenvalues();
    let mut out = [0, 1, 2].map(|k| Eigenvalue { re: ev[k].re, im: ev[k].im });
    out.sort_by(|a, b| {
        b.modulus()
            .total_cmp(&a.modulus())
            .then(b.im.total_cmp(&a.im))
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModulusVerdict {
    InsideUnitCircle,
    OnUnitCircle,
    OutsideUnitCircle,
}

const UNIT_CIRCLE_TOL: f64 = 1e-9;

pub fn modulus_verdict(eigs: &[Eigenvalue; 3]) -> ModulusVerdict {
    let rho = eigs.iter().map(Eigenvalue::modulus).fold(0.0, f64::max);
    if (rho - 1.0).abs() <= UNIT_CIRCLE_TOL {
        ModulusVerdict::OnUnitCircle
    } else if rho < 1.0 {
        ModulusVerdict::InsideUnitCircle
    } else {
        ModulusVerdict::OutsideUnitCircle
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub fixed_point: Vec3,
    pub residual: f64,
    pub jacobian: Mat3,
    pub char_coeffs: CharCoeffs,
    pub routh_verdict: RouthVerdict,
    pub modulus_verdict: ModulusVerdict,
    pub eigenvalues: [Eigenvalue; 3],
}

/// Full linear-stability summary at `point`. The Routh verdict uses the
/// published coefficients; the modulus verdict uses the actual Jacobian
/// eigenvalues, which is the discrete-time criterion.
pub fn stability_report(params: &ModelParams, point: Vec3) -> Result<StabilityReport> {
    let jacobian = jacobian_at(params, point)?;
    let char_coeffs = characteristic_coeffs(params)?;
    let eigenvalues = eigenvalues(&jacobian);
    Ok(StabilityReport {
        fixed_point: point,
        residual: residual(params, point)?,
        jacobian,
        char_coeffs,
        routh_verdict: routh_classify(char_coeffs),
        modulus_verdict: modulus_verdict(&eigenvalues),
        eigenvalues,
    })
}

/// The non-trivial fixed point as published, `(1, −α/2ξ₁, α/2ξ₂)`.
pub fn claimed_fixed_point(params: &ModelParams) -> Result<Vec3> {
    let map = params.two_user_map()?;
    Ok([1.0, -map.alpha / (2.0 * map.xi1), map.alpha / (2.0 * map.xi2)])
}
