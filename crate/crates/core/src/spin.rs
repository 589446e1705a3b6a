//! Collective spin operators for the maximal-`J` sector, the squeezed jump
//! operator `D_theta = cos(theta) S_- + sin(theta) S_+`, and the `S_x`
//! eigenbasis.
//!
//! Matrices are stored in the `S_z` basis ordered by descending `m`: index
//! `i` holds `|J, J - i>`.

use std::f64::consts::FRAC_PI_4;

use faer::{c64, Mat, MatRef, Side};

use crate::linalg::{self, CMat, ZERO};
use crate::{Error, Result};

/// Largest supported total angular momentum (superoperator dimension 2601).
pub const MAX_J: f64 = 25.0;

/// Angles closer than this to pi/4 take the symmetry-exact code paths.
pub const SYMMETRY_ANGLE_TOL: f64 = 1e-12;

/// Parameters of one run of the driven-dissipative model.
///
/// `gamma` is the collective jump rate: the jump operator is
/// `L = sqrt(gamma / (2J)) * D_theta`, which on the strong-symmetry line
/// `theta = pi/4` equals `sqrt(gamma / J) * S_x`, so an `S_x` eigenstate `|m>`
/// emits at rate `gamma * m^2 / J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub j: f64,
    pub omega: f64,
    pub gamma: f64,
    pub theta: f64,
}

impl ModelParams {
    pub fn new(j: f64, omega: f64, gamma: f64, theta: f64) -> Result<Self> {
        let p = Self { j, omega, gamma, theta };
        p.validate()?;
        Ok(p)
    }

    /// Parameters for `n` spins (`J = n / 2`).
    pub fn with_spins(n: u32, omega: f64, gamma: f64, theta: f64) -> Result<Self> {
        Self::new(n as f64 / 2.0, omega, gamma, theta)
    }

    pub fn validate(&self) -> Result<()> {
        let two_j = 2.0 * self.j;
        if !two_j.is_finite() || (two_j - two_j.round()).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!("J = {} is not a half-integer", self.j)));
        }
        if self.j < 0.5 {
            return Err(Error::InvalidParams(format!("J = {} must be at least 1/2", self.j)));
        }
        if self.j > MAX_J {
            return Err(Error::InvalidParams(format!("J = {} exceeds the supported maximum {MAX_J}", self.j)));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(Error::InvalidParams(format!("Gamma = {} must be positive", self.gamma)));
        }
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParams(format!("Omega = {} must be non-negative", self.omega)));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&self.theta) {
            return Err(Error::InvalidParams(format!("theta = {} outside [0, pi/2]", self.theta)));
        }
        Ok(())
    }

    pub fn two_j(&self) -> u32 {
        (2.0 * self.j).round() as u32
    }

    /// Number of spins `N = 2J`.
    pub fn spins(&self) -> u32 {
        self.two_j()
    }

    pub fn dim(&self) -> usize {
        self.two_j() as usize + 1
    }

    pub fn is_symmetry_point(&self) -> bool {
        (self.theta - FRAC_PI_4).abs() < SYMMETRY_ANGLE_TOL
    }

    /// Magnetic quantum numbers `-J, ..., J` in ascending order.
    pub fn m_values(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| -self.j + k as f64).collect()
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }
}

#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub dim: usize,
    pub sz: CMat,
    pub sp: CMat,
    pub sm: CMat,
    pub sx: CMat,
    pub sy: CMat,
    pub dtheta: CMat,
    /// Columns are `S_x` eigenvectors, ordered like `sx_eigs`.
    pub sx_basis: CMat,
    /// `-J, ..., J` ascending.
    pub sx_eigs: Vec<f64>,
}

/// Builds `S_z`, `S_+-`, `S_x`, `S_y`, `D_theta` and the `S_x` eigenbasis.
pub fn build_spin_operators(params: &ModelParams) -> Result<SpinOperators> {
    params.validate()?;
    let j = params.j;
    let dim = params.dim();
    let m_of = |i: usize| j - i as f64;

    let sz = Mat::from_fn(dim, dim, |r, c| if r == c { c64::new(m_of(r), 0.0) } else { ZERO });
    // <m+1| S_+ |m> = sqrt(J(J+1) - m(m+1)); |m+1> sits one index above |m>.
    let sp = Mat::from_fn(dim, dim, |r, c| {
        if c == r + 1 {
            let m = m_of(c);
            c64::new((j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt(), 0.0)
        } else {
            ZERO
        }
    });
    let sm = linalg::adjoint(sp.as_ref());
    let sx = Mat::from_fn(dim, dim, |r, c| (sp[(r, c)] + sm[(r, c)]) * 0.5);
    let sy = Mat::from_fn(dim, dim, |r, c| (sp[(r, c)] - sm[(r, c)]) * c64::new(0.0, -0.5));
    let (ct, st) = (params.theta.cos(), params.theta.sin());
    let dtheta = Mat::from_fn(dim, dim, |r, c| sm[(r, c)] * ct + sp[(r, c)] * st);

    let (sx_basis, sx_eigs) = sx_eigenbasis(sx.as_ref())?;

    Ok(SpinOperators { dim, sz, sp, sm, sx, sy, dtheta, sx_basis, sx_eigs })
}

fn sx_eigenbasis(sx: MatRef<'_, c64>) -> Result<(CMat, Vec<f64>)> {
    let evd = sx
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let dim = sx.nrows();
    let eigs: Vec<f64> = (0..dim).map(|k| evd.S()[k].re).collect();
    for w in eigs.windows(2) {
        if (w[1] - w[0]).abs() < 1e-8 {
            return Err(Error::DegenerateSpectrum(w[0], w[1]));
        }
    }
    let mut basis = evd.U().to_owned();
    // Sign convention: the largest-magnitude component of each eigenvector
    // is real and positive.
    for k in 0..dim {
        let mut best = 0;
        for r in 1..dim {
            if basis[(r, k)].norm() > basis[(best, k)].norm() + 1e-12 {
                best = r;
            }
        }
        let pivot = basis[(best, k)];
        let phase = pivot.conj() / pivot.norm();
        for r in 0..dim {
            basis[(r, k)] *= phase;
        }
    }
    Ok((basis, eigs))
}

impl SpinOperators {
    /// The `S_x` eigenvector for eigenvalue index `k` (`m = -J + k`).
    pub fn sx_state(&self, k: usize) -> Vec<c64> {
        (0..self.dim).map(|r| self.sx_basis[(r, k)]).collect()
    }

    /// Populations `|<m|psi>|^2` in the `S_x` eigenbasis (ascending `m`).
    pub fn sx_populations(&self, psi: &[c64]) -> Vec<f64> {
        (0..self.dim)
            .map(|k| {
                let mut amp = ZERO;
                for r in 0..self.dim {
                    amp += self.sx_basis[(r, k)].conj() * psi[r];
                }
                amp.norm_sqr()
            })
            .collect()
    }

    /// Converts amplitudes given in the `S_x` eigenbasis into the storage basis.
    pub fn from_sx_amplitudes(&self, amps: &[c64]) -> Vec<c64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|k| self.sx_basis[(r, k)] * amps[k]).sum())
            .collect()
    }

    /// `U^dag A U` with `U` the `S_x` eigenbasis.
    pub fn to_sx_basis(&self, a: MatRef<'_, c64>) -> CMat {
        self.sx_basis.adjoint() * a * &self.sx_basis
    }

    pub fn casimir(&self) -> CMat {
        &self.sx * &self.sx + &self.sy * &self.sy + &self.sz * &self.sz
    }

    /// `|J, -J>` in the storage basis.
    pub fn spin_down(&self) -> Vec<c64> {
        let mut v = vec![ZERO; self.dim];
        v[self.dim - 1] = linalg::ONE;
        v
    }

    /// `|J, +J>` in the storage basis.
    pub fn spin_up(&self) -> Vec<c64> {
        let mut v = vec![ZERO; self.dim];
        v[0] = linalg::ONE;
        v
    }
}

/// Parameters plus every operator derived from them; built once per run and
/// shared read-only.
#[derive(Debug, Clone)]
pub struct Model {
    pub params: ModelParams,
    pub ops: SpinOperators,
    /// `H = Omega * S_x`
    pub hamiltonian: CMat,
    /// `L = sqrt(Gamma / 2J) * D_theta`
    pub jump: CMat,
}

impl Model {
    pub fn new(params: ModelParams) -> Result<Self> {
        let ops = build_spin_operators(&params)?;
        let hamiltonian = linalg::scaled(ops.sx.as_ref(), c64::new(params.omega, 0.0));
        let jump = linalg::scaled(ops.dtheta.as_ref(), c64::new(jump_amplitude(&params), 0.0));
        Ok(Self { params, ops, hamiltonian, jump })
    }

    pub fn dim(&self) -> usize {
        self.ops.dim
    }

    /// `L^dag L`.
    pub fn jump_rate_operator(&self) -> CMat {
        self.jump.adjoint() * &self.jump
    }
}

/// Prefactor of `D_theta` in the jump operator.
pub fn jump_amplitude(params: &ModelParams) -> f64 {
    (params.gamma / (2.0 * params.j)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetryCheck {
    pub holds: bool,
    /// `||[H, A]||_F`
    pub hamiltonian_commutator: f64,
    /// `||[L, A]||_F`
    pub jump_commutator: f64,
    pub tolerance: f64,
}

/// Tests whether `candidate` commutes with both the Hamiltonian and the jump
/// operator (a strong symmetry of the Liouvillian).
pub fn check_strong_symmetry(model: &Model, candidate: MatRef<'_, c64>) -> Result<SymmetryCheck> {
    let d = model.dim();
    if candidate.nrows() != d || candidate.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: candidate.nrows().max(candidate.ncols()) });
    }
    let h = model.hamiltonian.as_ref();
    let l = model.jump.as_ref();
    let hc = linalg::frobenius(linalg::commutator(h, candidate).as_ref());
    let lc = linalg::frobenius(linalg::commutator(l, candidate).as_ref());
    let tolerance = 1e-10 * linalg::frobenius(candidate) * linalg::frobenius(h).max(linalg::frobenius(l));
    Ok(SymmetryCheck {
        holds: hc <= tolerance && lc <= tolerance,
        hamiltonian_commutator: hc,
        jump_commutator: lc,
        tolerance,
    })
}
