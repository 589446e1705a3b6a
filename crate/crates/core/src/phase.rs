//! Steady-state observables over the `(Omega, theta)` plane.

use faer::{c64, MatRef};
use rayon::prelude::*;

use crate::linalg::{self, CMat};
use crate::liouvillian::{self, EvolutionMethod};
use crate::spin::{Model, ModelParams, SpinOperators};
use crate::{Error, Result};

pub const DEFAULT_DEGENERACY_GAP: f64 = 1e-6;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-8;
const NULL_REL_TOL: f64 = 1e-8;

/// `<S_z> / J`.
pub fn magnetization(rho: MatRef<'_, c64>, ops: &SpinOperators) -> f64 {
    let j = (ops.dim as f64 - 1.0) / 2.0;
    linalg::expectation(rho, ops.sz.as_ref()).re / j
}

/// `(<S_x>, <S_y>, <S_z>)`.
pub fn mean_spin(rho: MatRef<'_, c64>, ops: &SpinOperators) -> [f64; 3] {
    [
        linalg::expectation(rho, ops.sx.as_ref()).re,
        linalg::expectation(rho, ops.sy.as_ref()).re,
        linalg::expectation(rho, ops.sz.as_ref()).re,
    ]
}

/// `N Var(S_x) / |<S>|^2`, or `None` when `|<S>|^2 < 1e-8 J^2`.
pub fn spin_squeezing(rho: MatRef<'_, c64>, ops: &SpinOperators) -> Option<f64> {
    let j = (ops.dim as f64 - 1.0) / 2.0;
    let s = mean_spin(rho, ops);
    let norm2 = s.iter().map(|x| x * x).sum::<f64>();
    if norm2 < 1e-8 * j * j {
        return None;
    }
    let sx2 = linalg::expectation(rho, (&ops.sx * &ops.sx).as_ref()).re;
    Some(2.0 * j * (sx2 - s[0] * s[0]) / norm2)
}

pub fn purity(rho: MatRef<'_, c64>) -> f64 {
    linalg::trace((rho * rho).as_ref()).re
}

/// Critical drive `Omega_c = (Gamma / 2)(cos^2 theta - sin^2 theta)` for the
/// jump operator `sqrt(Gamma / 2J) D_theta`.
pub fn critical_line(theta: f64, gamma: f64) -> f64 {
    0.5 * gamma * (theta.cos().powi(2) - theta.sin().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    /// Unique steady state from the bordered linear solve.
    Unique,
    /// Long-time evolution from the declared initial state.
    Evolved,
    /// Projection of the initial state onto the degenerate null space.
    Asymptotic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observables {
    pub magnetization: f64,
    pub squeezing: Option<f64>,
    pub purity: f64,
    pub mean_spin_norm: f64,
    pub method: SteadyMethod,
    /// On the exact strong-symmetry line.
    pub degenerate_line: bool,
    /// Gap estimate below the degeneracy threshold.
    pub near_degenerate: bool,
    pub gap_estimate: Option<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub omega: f64,
    pub theta: f64,
    pub result: std::result::Result<Observables, String>,
}

#[derive(Debug, Clone)]
pub struct ScanOptions {
    /// Initial state for degenerate and near-degenerate points; `None`
    /// selects `|J, -J>`.
    pub initial: Option<CMat>,
    pub degeneracy_gap: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { initial: None, degeneracy_gap: DEFAULT_DEGENERACY_GAP }
    }
}

pub fn observables(rho: MatRef<'_, c64>, ops: &SpinOperators) -> (f64, Option<f64>, f64, f64) {
    let s = mean_spin(rho, ops);
    (magnetization(rho, ops), spin_squeezing(rho, ops), purity(rho), s.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Steady state and observables at one parameter point.
pub fn compute_point(params: &ModelParams, options: &ScanOptions) -> Result<(CMat, Observables)> {
    let model = Model::new(*params)?;
    let l = liouvillian::build_liouvillian(&model);
    let initial = || -> Result<CMat> {
        let rho0 = options.initial.clone().unwrap_or_else(|| linalg::projector(&model.ops.spin_down()));
        if rho0.nrows() != model.dim() {
            return Err(Error::DimensionMismatch { expected: model.dim(), found: rho0.nrows() });
        }
        liouvillian::validate_density(rho0.as_ref(), 1e-10)?;
        Ok(rho0)
    };
    let gamma = params.gamma;
    let (rho, method, gap_estimate, near_degenerate) = if params.is_symmetry_point() {
        let rho = liouvillian::asymptotic_state(&l, initial()?.as_ref(), NULL_REL_TOL)?;
        (rho, SteadyMethod::Asymptotic, None, true)
    } else {
        let ss = liouvillian::unique_steady_state(&l)?;
        let gap = liouvillian::slowest_rate_estimate(&l, ss.rho.as_ref())?;
        if gap < options.degeneracy_gap * gamma {
            let t = 20.0 * (1.0 / gap).max(params.j / gamma);
            let rho = liouvillian::evolve_density(&l, initial()?.as_ref(), t, EvolutionMethod::Exponential)?;
            (rho, SteadyMethod::Evolved, Some(gap), true)
        } else {
            (ss.rho, SteadyMethod::Unique, Some(gap), false)
        }
    };
    let residual = l.apply(rho.as_ref()).norm_l2();
    if method == SteadyMethod::Unique && residual > STEADY_RESIDUAL_TOL * gamma {
        return Err(Error::NullSpaceNotStates(format!("steady-state residual {residual:e} exceeds tolerance")));
    }
    let (magnetization, squeezing, purity, mean_spin_norm) = observables(rho.as_ref(), &model.ops);
    let obs = Observables {
        magnetization,
        squeezing,
        purity,
        mean_spin_norm,
        method,
        degenerate_line: params.is_symmetry_point(),
        near_degenerate,
        gap_estimate,
        residual,
    };
    Ok((rho, obs))
}

/// Evaluates every `(omega, theta)` pair, omega-major. Failures are recorded
/// per point and do not stop the scan.
pub fn scan(omegas: &[f64], thetas: &[f64], template: &ModelParams, options: &ScanOptions) -> Result<Vec<PhasePoint>> {
    if omegas.is_empty() || thetas.is_empty() {
        return Err(Error::InvalidInput("scan grid is empty".into()));
    }
    let grid: Vec<(f64, f64)> = omegas.iter().flat_map(|&o| thetas.iter().map(move |&t| (o, t))).collect();
    Ok(grid
        .par_iter()
        .map(|&(omega, theta)| {
            let result = ModelParams::new(template.j, omega, template.gamma, theta)
                .and_then(|p| compute_point(&p, options))
                .map(|(_, obs)| obs)
                .map_err(|e| e.to_string());
            PhasePoint { omega, theta, result }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn simple_state_observables() {
        let p = ModelParams::new(3.0, 1.0, 1.0, 0.0).unwrap();
        let m = Model::new(p).unwrap();
        let down = linalg::projector(&m.ops.spin_down());
        assert!((magnetization(down.as_ref(), &m.ops) + 1.0).abs() < 1e-14);
        assert!((spin_squeezing(down.as_ref(), &m.ops).unwrap() - 1.0).abs() < 1e-12);
        assert!((purity(down.as_ref()) - 1.0).abs() < 1e-14);
        let mixed = linalg::scaled(CMat::identity(7, 7).as_ref(), c64::new(1.0 / 7.0, 0.0));
        assert!(magnetization(mixed.as_ref(), &m.ops).abs() < 1e-15);
        assert_eq!(spin_squeezing(mixed.as_ref(), &m.ops), None);
        assert!((purity(mixed.as_ref()) - 1.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn critical_line_values() {
        assert!((critical_line(0.0, 1.0) - 0.5).abs() < 1e-15);
        assert!(critical_line(FRAC_PI_4, 1.0).abs() < 1e-15);
        assert!((critical_line(FRAC_PI_2, 2.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn ferromagnetic_and_thermal_points() {
        let template = ModelParams::new(5.0, 0.0, 1.0, 0.0).unwrap();
        let pts = scan(&[0.05, 3.0], &[0.2], &template, &ScanOptions::default()).unwrap();
        let f = pts[0].result.as_ref().unwrap();
        let t = pts[1].result.as_ref().unwrap();
        assert!(f.magnetization < -0.8, "{}", f.magnetization);
        assert!(t.magnetization.abs() < 0.15, "{}", t.magnetization);
        assert!(t.purity < f.purity);
        assert_eq!(f.method, SteadyMethod::Unique);
        assert!(f.residual < 1e-8);
    }

    #[test]
    fn symmetry_line_is_flagged() {
        let template = ModelParams::new(2.0, 0.0, 1.0, 0.0).unwrap();
        let pts = scan(&[0.5], &[FRAC_PI_4], &template, &ScanOptions::default()).unwrap();
        let o = pts[0].result.as_ref().unwrap();
        assert!(o.degenerate_line);
        assert_eq!(o.method, SteadyMethod::Asymptotic);
        assert!(o.purity >= 1.0 / 5.0 - 1e-12 && o.purity <= 1.0 + 1e-12);
    }

    #[test]
    fn reflection_flips_magnetization() {
        let template = ModelParams::new(3.0, 0.0, 1.0, 0.0).unwrap();
        let th = 0.3;
        let pts = scan(&[0.2], &[th, FRAC_PI_2 - th], &template, &ScanOptions::default()).unwrap();
        let a = pts[0].result.as_ref().unwrap().magnetization;
        let b = pts[1].result.as_ref().unwrap().magnetization;
        assert!((a + b).abs() < 1e-8);
    }

    #[test]
    fn invalid_point_recorded_in_row() {
        let template = ModelParams::new(1.0, 0.0, 1.0, 0.0).unwrap();
        let pts = scan(&[0.5], &[0.1, 2.0], &template, &ScanOptions::default()).unwrap();
        assert!(pts[0].result.is_ok());
        assert!(pts[1].result.is_err());
        assert!(scan(&[], &[0.1], &template, &ScanOptions::default()).is_err());
    }
}
