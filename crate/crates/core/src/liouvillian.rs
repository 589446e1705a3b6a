//! Superoperator assembly, spectra, steady states and density-matrix
//! propagation.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

use crate::linalg::{self, CMat, I, ZERO};
use crate::spin::{Model, ModelParams};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuperopKind {
    Liouvillian,
    /// Counting-field tilted generator at tilt `s`.
    Tilted { s: f64 },
}

/// Dense superoperator acting on column-stacked density matrices.
#[derive(Debug, Clone)]
pub struct Superoperator {
    hilbert_dim: usize,
    pub mat: CMat,
    pub kind: SuperopKind,
}

impl Superoperator {
    pub(crate) fn from_parts(hilbert_dim: usize, mat: CMat, kind: SuperopKind) -> Self {
        Self { hilbert_dim, mat, kind }
    }

    /// Size of the vectorized space, `(2J+1)^2`.
    pub fn dim(&self) -> usize {
        self.hilbert_dim * self.hilbert_dim
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    /// `L[rho]` as a matrix.
    pub fn apply(&self, rho: MatRef<'_, c64>) -> CMat {
        let v = &self.mat * linalg::vectorize(rho);
        linalg::unvectorize(v.as_ref(), self.hilbert_dim)
    }

    /// `||1^T mat||`, zero for a trace-preserving generator.
    pub fn trace_defect(&self) -> f64 {
        let d = self.hilbert_dim;
        let mut acc = 0.0;
        for col in 0..self.dim() {
            let s: c64 = (0..d).map(|i| self.mat[(i + d * i, col)]).sum();
            acc += s.norm_sqr();
        }
        acc.sqrt()
    }

    fn require_liouvillian(&self) -> Result<()> {
        match self.kind {
            SuperopKind::Liouvillian => Ok(()),
            SuperopKind::Tilted { .. } => Err(Error::WrongSuperoperatorKind { expected: "Liouvillian" }),
        }
    }
}

/// `-i[H, .] + e^s L . L^dag - {L^dag L, .}/2` in column-stacking form:
/// `-i(1⊗H - H^T⊗1) + e^s conj(L)⊗L - (1⊗K + K^T⊗1)/2` with `K = L^dag L`.
pub(crate) fn lindblad_matrix(h: MatRef<'_, c64>, jump: MatRef<'_, c64>, jump_weight: f64) -> CMat {
    let d = h.nrows();
    let k = jump.adjoint() * jump;
    let w = c64::new(jump_weight, 0.0);
    Mat::from_fn(d * d, d * d, |a, b| {
        let (i, j) = (a % d, a / d);
        let (kk, l) = (b % d, b / d);
        let mut v = jump[(j, l)].conj() * jump[(i, kk)] * w;
        if j == l {
            v += -I * h[(i, kk)] - k[(i, kk)] * 0.5;
        }
        if i == kk {
            v += I * h[(l, j)] - k[(l, j)] * 0.5;
        }
        v
    })
}

/// The Liouvillian of the driven model with jump operator
/// `L = sqrt(Gamma / 2J) * D_theta`.
pub fn build_liouvillian(model: &Model) -> Superoperator {
    Superoperator {
        hilbert_dim: model.dim(),
        mat: lindblad_matrix(model.hamiltonian.as_ref(), model.jump.as_ref(), 1.0),
        kind: SuperopKind::Liouvillian,
    }
}

/// Eigenvalues sorted by descending real part (ties by descending imaginary
/// part).
pub fn sorted_eigenvalues(mat: MatRef<'_, c64>) -> Result<Vec<c64>> {
    let mut ev = mat.eigenvalues().map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    if ev.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
    Ok(ev)
}

#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<c64>,
    /// Eigenvalue with the second-largest real part.
    pub adr: c64,
    /// `-Re(1/adr)`, infinite when the gap is closed.
    pub tau: f64,
    pub null_dim: usize,
    pub null_tol: f64,
}

/// Default null tolerance `1e-8 * Gamma`.
pub fn default_null_tol(params: &ModelParams) -> f64 {
    1e-8 * params.gamma
}

pub fn spectrum(superop: &Superoperator, null_tol: f64) -> Result<SpectrumResult> {
    superop.require_liouvillian()?;
    let eigenvalues = sorted_eigenvalues(superop.mat.as_ref())?;
    let scale = superop.mat.norm_l2();
    if eigenvalues[0].re > 1e-9 * scale {
        return Err(Error::GrowingMode(eigenvalues[0].re));
    }
    let null_dim = eigenvalues.iter().filter(|z| z.norm() < null_tol).count();
    let adr = eigenvalues.get(1).copied().unwrap_or(ZERO);
    let tau = if adr.norm() < null_tol { f64::INFINITY } else { -(adr.re / adr.norm_sqr()) };
    Ok(SpectrumResult { eigenvalues, adr, tau, null_dim, null_tol })
}

struct NullSpaces {
    right: Vec<CMat>,
    left: Vec<CMat>,
}

fn null_spaces(superop: &Superoperator, rel_tol: f64) -> Result<NullSpaces> {
    let svd = superop.mat.svd().map_err(|e| Error::Eigensolver(format!("svd: {e:?}")))?;
    let n = superop.dim();
    let s = svd.S();
    let smax = s[0].re;
    let d = superop.hilbert_dim;
    let mut right = Vec::new();
    let mut left = Vec::new();
    for k in 0..n {
        if s[k].re < rel_tol * smax {
            right.push(linalg::unvectorize(svd.V().col(k).as_mat(), d));
            left.push(linalg::unvectorize(svd.U().col(k).as_mat(), d));
        }
    }
    Ok(NullSpaces { right, left })
}

/// Steady states spanning the Liouvillian null space, returned as Hermitian,
/// unit-trace, positive semidefinite matrices.
///
/// The null space is taken from singular vectors with `sigma < rel_tol *
/// sigma_max`. A degenerate null space is resolved into states with
/// mutually orthogonal supports; at `theta = pi/4` these are the projectors
/// `|m><m|` onto `S_x` eigenstates.
pub fn steady_states(superop: &Superoperator, rel_tol: f64) -> Result<Vec<CMat>> {
    superop.require_liouvillian()?;
    let null = null_spaces(superop, rel_tol)?;
    let states = match null.right.len() {
        0 => return Err(Error::NullSpaceNotStates("empty null space".into())),
        1 => vec![normalize_state(&null.right[0])?],
        _ => resolve_manifold(&null.right)?,
    };
    let scale = superop.mat.norm_l2();
    for rho in &states {
        check_state(rho, 1e-8)?;
        let res = superop.apply(rho.as_ref()).norm_l2();
        if res > 1e-7 * scale {
            return Err(Error::NullSpaceNotStates(format!("candidate state has residual {res:e}")));
        }
    }
    Ok(states)
}

fn normalize_state(x: &CMat) -> Result<CMat> {
    let tr = linalg::trace(x.as_ref());
    if tr.norm() < 1e-10 * x.norm_l2() {
        return Err(Error::NullSpaceNotStates("traceless null vector".into()));
    }
    let rho = linalg::scaled(x.as_ref(), tr.inv());
    Ok(linalg::hermitian_part(rho.as_ref()))
}

fn check_state(rho: &CMat, tol: f64) -> Result<()> {
    let min = linalg::hermitian_eigenvalues(rho.as_ref())?.first().copied().unwrap_or(0.0);
    if min < -tol {
        return Err(Error::NullSpaceNotStates(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// Splits a multi-dimensional null space into states with orthogonal
/// supports, using the eigenbasis of a generic element of the (Hermitian)
/// null space.
fn resolve_manifold(null: &[CMat]) -> Result<Vec<CMat>> {
    let d = null[0].nrows();
    // Real-orthonormal Hermitian basis.
    let mut herm: Vec<CMat> = Vec::new();
    for x in null {
        let re = linalg::hermitian_part(x.as_ref());
        let ix = linalg::scaled(x.as_ref(), c64::new(0.0, 1.0));
        let im = linalg::hermitian_part(ix.as_ref());
        for mut cand in [re, im] {
            for b in &herm {
                let ov = real_inner(b, &cand);
                linalg::add_scaled(&mut cand, b.as_ref(), c64::new(-ov, 0.0));
            }
            let nrm = cand.norm_l2();
            if nrm > 1e-6 {
                herm.push(linalg::scaled(cand.as_ref(), c64::new(1.0 / nrm, 0.0)));
            }
        }
    }
    if herm.len() != null.len() {
        return Err(Error::NullSpaceNotStates(format!(
            "Hermitian basis has dimension {} for a null space of dimension {}",
            herm.len(),
            null.len()
        )));
    }
    let mut generic = CMat::zeros(d, d);
    for (k, h) in herm.iter().enumerate() {
        let w = 1.0 + ((k as f64 + 1.0) * 0.618_033_988_749_895).fract();
        linalg::add_scaled(&mut generic, h.as_ref(), c64::new(w, 0.0));
    }
    let evd = generic
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let u = evd.U();
    let rotated: Vec<CMat> = herm.iter().map(|h| u.adjoint() * h * u).collect();

    // Group eigenvectors into blocks coupled by any basis element.
    let mut block: Vec<usize> = (0..d).collect();
    fn find(block: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while block[r] != r {
            r = block[r];
        }
        block[x] = r;
        r
    }
    for a in 0..d {
        for b in (a + 1)..d {
            if rotated.iter().any(|h| h[(a, b)].norm() > 1e-8) {
                let (ra, rb) = (find(&mut block, a), find(&mut block, b));
                block[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    let roots: Vec<usize> = (0..d).map(|a| find(&mut block, a)).collect();
    let mut seen: Vec<usize> = roots.clone();
    seen.sort_unstable();
    seen.dedup();

    let mut states = Vec::new();
    for root in seen {
        let members: Vec<usize> = (0..d).filter(|&a| roots[a] == root).collect();
        // Largest-norm projection of the basis onto this block.
        let mut best: Option<(f64, CMat)> = None;
        for h in &rotated {
            let proj = Mat::from_fn(d, d, |r, c| {
                if members.contains(&r) && members.contains(&c) {
                    h[(r, c)]
                } else {
                    ZERO
                }
            });
            let nrm = proj.norm_l2();
            if best.as_ref().is_none_or(|(n, _)| nrm > *n) {
                best = Some((nrm, proj));
            }
        }
        if let Some((nrm, proj)) = best {
            if nrm > 1e-6 {
                let back = u * proj * u.adjoint();
                states.push(normalize_state(&back)?);
            }
        }
    }
    if states.len() != null.len() {
        return Err(Error::NullSpaceNotStates(format!(
            "found {} orthogonal-support states for a null space of dimension {}",
            states.len(),
            null.len()
        )));
    }
    Ok(states)
}

fn real_inner(a: &CMat, b: &CMat) -> f64 {
    let mut acc = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            acc += (a[(i, j)].conj() * b[(i, j)]).re;
        }
    }
    acc
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub rho: CMat,
    /// `||L[rho]||_F`
    pub residual: f64,
}

/// Unique steady state from the trace-bordered linear system (one row of
/// `L vec(rho) = 0` replaced by `tr(rho) = 1`). Cheaper than the SVD route
/// and intended for points known to have a one-dimensional null space.
pub fn unique_steady_state(superop: &Superoperator) -> Result<SteadyState> {
    superop.require_liouvillian()?;
    let d = superop.hilbert_dim;
    let n = superop.dim();
    let mut a = superop.mat.clone();
    for c in 0..n {
        a[(0, c)] = if c % (d + 1) == 0 { linalg::ONE } else { ZERO };
    }
    let mut rhs = CMat::zeros(n, 1);
    rhs[(0, 0)] = linalg::ONE;
    let x = a.partial_piv_lu().solve(&rhs);
    if (0..n).any(|k| !x[(k, 0)].re.is_finite() || !x[(k, 0)].im.is_finite()) {
        return Err(Error::NullSpaceNotStates("bordered system is singular".into()));
    }
    let rho = linalg::hermitian_part(linalg::unvectorize(x.as_ref(), d).as_ref());
    let residual = superop.apply(rho.as_ref()).norm_l2();
    Ok(SteadyState { rho, residual })
}

/// Estimate of the smallest nonzero `|lambda|` of the Liouvillian, by inverse
/// iteration on the generator with the steady state deflated away.
///
/// Returns a value near zero when the null space is degenerate.
pub fn slowest_rate_estimate(superop: &Superoperator, rho_ss: MatRef<'_, c64>) -> Result<f64> {
    superop.require_liouvillian()?;
    let d = superop.hilbert_dim;
    let n = superop.dim();
    let shift = linalg::norm_one(superop.mat.as_ref()).max(1.0);
    let v = linalg::vectorize(rho_ss);
    // Moving the steady eigenvalue from 0 to -shift leaves the rest intact.
    let mut m = superop.mat.clone();
    for i in 0..d {
        let col = i + d * i;
        for r in 0..n {
            m[(r, col)] -= v[(r, 0)] * shift;
        }
    }
    let lu = m.partial_piv_lu();
    let mut x = Mat::from_fn(n, 1, |k, _| {
        let t = (k as f64 + 1.0) * 0.754_877_666_246_693;
        c64::new(t.fract() - 0.5, (t * 1.7).fract() - 0.5)
    });
    let nrm = x.norm_l2();
    x = linalg::scaled(x.as_ref(), c64::new(1.0 / nrm, 0.0));
    const ITERS: usize = 60;
    const BURN_IN: usize = 20;
    let mut log_growth = 0.0;
    for it in 0..ITERS {
        let y = lu.solve(&x);
        let g = y.norm_l2();
        if !g.is_finite() || g == 0.0 {
            return Ok(0.0);
        }
        if g > 1e300 {
            return Ok(0.0);
        }
        if it >= BURN_IN {
            log_growth += g.ln();
        }
        x = linalg::scaled(y.as_ref(), c64::new(1.0 / g, 0.0));
    }
    Ok((-log_growth / (ITERS - BURN_IN) as f64).exp())
}

/// Infinite-time limit of `rho0` for a generator whose zero eigenvalue may be
/// degenerate: projection onto the right null space along the conserved
/// quantities (left null space).
pub fn asymptotic_state(superop: &Superoperator, rho0: MatRef<'_, c64>, rel_tol: f64) -> Result<CMat> {
    superop.require_liouvillian()?;
    let null = null_spaces(superop, rel_tol)?;
    let k = null.right.len();
    if k == 0 {
        return Err(Error::NullSpaceNotStates("empty null space".into()));
    }
    // rho_inf = sum_ab R_a (G^-1)_ab <W_b, rho0>, G_ba = <W_b, R_a>.
    let inner = |a: &CMat, b: MatRef<'_, c64>| -> c64 {
        let mut acc = ZERO;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                acc += a[(i, j)].conj() * b[(i, j)];
            }
        }
        acc
    };
    let g = Mat::from_fn(k, k, |b, a| inner(&null.left[b], null.right[a].as_ref()));
    let proj = Mat::from_fn(k, 1, |b, _| inner(&null.left[b], rho0));
    let coeff = g.partial_piv_lu().solve(&proj);
    let d = superop.hilbert_dim;
    let mut rho = CMat::zeros(d, d);
    for a in 0..k {
        linalg::add_scaled(&mut rho, null.right[a].as_ref(), coeff[(a, 0)]);
    }
    Ok(linalg::hermitian_part(rho.as_ref()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvolutionMethod {
    /// `exp(L t)` applied to `vec(rho0)`.
    Exponential,
    /// Fixed-step classical Runge-Kutta, for cross-validation.
    Rk4 { dt: f64 },
}

/// Validates that `rho` is a density matrix within `tol`.
pub fn validate_density(rho: MatRef<'_, c64>, tol: f64) -> Result<()> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::InvalidInput("density matrix must be square".into()));
    }
    let herm = linalg::hermiticity_residual(rho);
    if herm > tol {
        return Err(Error::InvalidInput(format!("density matrix not Hermitian (residual {herm:e})")));
    }
    let tr = linalg::trace(rho);
    if (tr - linalg::ONE).norm() > tol {
        return Err(Error::InvalidInput(format!("density matrix trace {} != 1", tr.re)));
    }
    let min = linalg::hermitian_eigenvalues(linalg::hermitian_part(rho).as_ref())?[0];
    if min < -tol {
        return Err(Error::InvalidInput(format!("density matrix has negative eigenvalue {min:e}")));
    }
    Ok(())
}

pub fn evolve_density(superop: &Superoperator, rho0: MatRef<'_, c64>, t: f64, method: EvolutionMethod) -> Result<CMat> {
    superop.require_liouvillian()?;
    let d = superop.hilbert_dim;
    if rho0.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.nrows() });
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("evolution time {t} must be finite and non-negative")));
    }
    validate_density(rho0, 1e-10)?;
    if t == 0.0 {
        return Ok(rho0.to_owned());
    }
    match method {
        EvolutionMethod::Exponential => Ok(Propagator::new(superop, t)?.apply(rho0)),
        EvolutionMethod::Rk4 { dt } => {
            if !(dt > 0.0) {
                return Err(Error::InvalidInput(format!("RK4 step {dt} must be positive")));
            }
            let steps = (t / dt - 1e-9).ceil().max(1.0) as usize;
            let h = c64::new(t / steps as f64, 0.0);
            let a = &superop.mat;
            let mut v = linalg::vectorize(rho0);
            for _ in 0..steps {
                let k1 = a * &v;
                let k2 = a * (&v + linalg::scaled(k1.as_ref(), h * 0.5));
                let k3 = a * (&v + linalg::scaled(k2.as_ref(), h * 0.5));
                let k4 = a * (&v + linalg::scaled(k3.as_ref(), h));
                let incr = &k1 + linalg::scaled(k2.as_ref(), c64::new(2.0, 0.0)) + linalg::scaled(k3.as_ref(), c64::new(2.0, 0.0)) + &k4;
                v = &v + linalg::scaled(incr.as_ref(), h / 6.0);
            }
            let rho = linalg::unvectorize(v.as_ref(), d);
            let drift = (linalg::trace(rho.as_ref()) - linalg::ONE).norm();
            if drift > 1e-8 {
                return Err(Error::TraceDrift { drift });
            }
            Ok(linalg::hermitian_part(rho.as_ref()))
        }
    }
}

/// Precomputed `exp(L t)` for repeated application.
#[derive(Debug, Clone)]
pub struct Propagator {
    hilbert_dim: usize,
    pub t: f64,
    mat: CMat,
}

impl Propagator {
    pub fn new(superop: &Superoperator, t: f64) -> Result<Self> {
        superop.require_liouvillian()?;
        let scaled = linalg::scaled(superop.mat.as_ref(), c64::new(t, 0.0));
        Ok(Self { hilbert_dim: superop.hilbert_dim, t, mat: linalg::expm(scaled.as_ref()) })
    }

    pub fn apply(&self, rho: MatRef<'_, c64>) -> CMat {
        let v = &self.mat * linalg::vectorize(rho);
        linalg::hermitian_part(linalg::unvectorize(v.as_ref(), self.hilbert_dim).as_ref())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalyticEigenvalue {
    pub q: u32,
    pub k: u32,
    pub branch: Branch,
    pub value: c64,
}

#[derive(Debug, Clone)]
pub struct AnalyticSpectrum {
    pub entries: Vec<AnalyticEigenvalue>,
    pub gamma_theta: f64,
    pub chi_theta: f64,
}

/// Large-drive eigenvalues
/// `±i q Omega - Gamma_theta q^2 / 2J - chi_theta [q + k(1 + k + 2q)] / 4J`
/// for `q = 0..2J`, `k = 0..2J-q` (one entry for `q = 0`).
///
/// With `L = sqrt(Gamma/2J) D_theta`, the collective rate entering the
/// formula is `Gamma/2`: `Gamma_theta = (Gamma/2)(cos + sin)^2` and
/// `chi_theta = (Gamma/2)(cos - sin)^2`.
pub fn analytic_spectrum(params: &ModelParams) -> AnalyticSpectrum {
    let rate = params.gamma / 2.0;
    let (c, s) = (params.theta.cos(), params.theta.sin());
    let gamma_theta = rate * (c + s).powi(2);
    let chi_theta = if params.is_symmetry_point() { 0.0 } else { rate * (c - s).powi(2) };
    let j = params.j;
    let two_j = params.two_j();
    let mut entries = Vec::new();
    for q in 0..=two_j {
        for k in 0..=(two_j - q) {
            let (qf, kf) = (q as f64, k as f64);
            let re = -gamma_theta / (2.0 * j) * qf * qf - chi_theta / (4.0 * j) * (qf + kf * (1.0 + kf + 2.0 * qf));
            entries.push(AnalyticEigenvalue { q, k, branch: Branch::Plus, value: c64::new(re, qf * params.omega) });
            if q > 0 {
                entries.push(AnalyticEigenvalue { q, k, branch: Branch::Minus, value: c64::new(re, -qf * params.omega) });
            }
        }
    }
    AnalyticSpectrum { entries, gamma_theta, chi_theta }
}

#[derive(Debug, Clone, Copy)]
pub struct MatchedPair {
    pub numeric: usize,
    pub analytic: usize,
    pub distance: f64,
}

#[derive(Debug, Clone)]
pub struct MatchReport {
    pub pairs: Vec<MatchedPair>,
    pub max_distance: f64,
}

/// Greedy nearest-neighbour pairing in the complex plane: repeatedly take the
/// closest still-unpaired (numeric, analytic) couple.
pub fn match_analytic(numeric: &[c64], analytic: &AnalyticSpectrum) -> MatchReport {
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(numeric.len() * analytic.entries.len());
    for (i, z) in numeric.iter().enumerate() {
        for (k, e) in analytic.entries.iter().enumerate() {
            cand.push(((z - e.value).norm(), i, k));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut used_n = vec![false; numeric.len()];
    let mut used_a = vec![false; analytic.entries.len()];
    let mut pairs = Vec::new();
    for (dist, i, k) in cand {
        if !used_n[i] && !used_a[k] {
            used_n[i] = true;
            used_a[k] = true;
            pairs.push(MatchedPair { numeric: i, analytic: k, distance: dist });
        }
    }
    pairs.sort_by_key(|p| p.numeric);
    let max_distance = pairs.iter().map(|p| p.distance).fold(0.0, f64::max);
    MatchReport { pairs, max_distance }
}

/// Maximum matched distance between the numerical spectrum and the
/// large-drive formula, for each drive in `omegas`.
pub fn analytic_convergence(params: &ModelParams, omegas: &[f64]) -> Result<Vec<(f64, f64)>> {
    omegas
        .iter()
        .map(|&omega| {
            let p = params.with_omega(omega);
            let model = Model::new(p)?;
            let spec = spectrum(&build_liouvillian(&model), default_null_tol(&p))?;
            Ok((omega, match_analytic(&spec.eigenvalues, &analytic_spectrum(&p)).max_distance))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn model(j: f64, omega: f64, theta: f64) -> Model {
        Model::new(ModelParams::new(j, omega, 1.0, theta).unwrap()).unwrap()
    }

    #[test]
    fn trace_preserving() {
        for (j, om, th) in [(0.5, 0.0, 0.0), (2.0, 1.3, 0.4), (3.5, 0.2, 1.1), (5.0, 2.0, FRAC_PI_4)] {
            let l = build_liouvillian(&model(j, om, th));
            assert!(l.trace_defect() < 1e-10 * l.mat.norm_l2());
        }
    }

    #[test]
    fn superoperator_matches_direct_action() {
        let m = model(1.5, 0.7, 0.35);
        let l = build_liouvillian(&m);
        let d = m.dim();
        let rho = Mat::from_fn(d, d, |i, j| c64::new((i + 2 * j) as f64 * 0.1, i as f64 - j as f64));
        let h = &m.hamiltonian;
        let jmp = &m.jump;
        let k = jmp.adjoint() * jmp;
        let direct = linalg::scaled(linalg::commutator(h.as_ref(), rho.as_ref()).as_ref(), -I) + jmp * &rho * jmp.adjoint()
            - linalg::scaled((&k * &rho + &rho * &k).as_ref(), c64::new(0.5, 0.0));
        assert!((l.apply(rho.as_ref()) - direct).norm_l2() < 1e-12);
    }

    #[test]
    fn two_level_decay_spectrum() {
        // J = 1/2, Omega = 0, theta = 0: amplitude damping at rate Gamma.
        let l = build_liouvillian(&model(0.5, 0.0, 0.0));
        let s = spectrum(&l, 1e-8).unwrap();
        let want = [0.0, -0.5, -0.5, -1.0];
        for (z, w) in s.eigenvalues.iter().zip(want) {
            assert!((z - c64::new(w, 0.0)).norm() < 1e-12, "{z} vs {w}");
        }
        assert_eq!(s.null_dim, 1);
        assert!((s.tau - 2.0).abs() < 1e-10);
    }

    #[test]
    fn symmetry_point_degeneracy() {
        let s = spectrum(&build_liouvillian(&model(2.0, 1.0, FRAC_PI_4)), 1e-8).unwrap();
        assert_eq!(s.null_dim, 5);
        assert!(s.adr.norm() < 1e-8);
        assert!(s.tau.is_infinite());
        let s = spectrum(&build_liouvillian(&model(2.0, 0.5, 0.0)), 1e-8).unwrap();
        assert_eq!(s.null_dim, 1);
        assert!(s.eigenvalues[0].norm() < 1e-9);
    }

    #[test]
    fn rejects_tilted_kind() {
        let mut l = build_liouvillian(&model(1.0, 1.0, 0.2));
        l.kind = SuperopKind::Tilted { s: 0.1 };
        assert!(matches!(spectrum(&l, 1e-8), Err(Error::WrongSuperoperatorKind { .. })));
    }

    #[test]
    fn steady_states_on_symmetry_line_are_sx_projectors() {
        let m = model(1.0, 0.8, FRAC_PI_4);
        let states = steady_states(&build_liouvillian(&m), 1e-8).unwrap();
        assert_eq!(states.len(), 3);
        for k in 0..3 {
            let want = linalg::projector(&m.ops.sx_state(k));
            let best = states.iter().map(|s| (s - &want).norm_l2()).fold(f64::INFINITY, f64::min);
            assert!(best < 1e-8, "no steady state matches |m={}>", k as f64 - 1.0);
        }
    }

    #[test]
    fn dark_state_of_pure_decay() {
        let m = model(2.0, 0.0, 0.0);
        let states = steady_states(&build_liouvillian(&m), 1e-8).unwrap();
        assert_eq!(states.len(), 1);
        let want = linalg::projector(&m.ops.spin_down());
        assert!((&states[0] - want).norm_l2() < 1e-8);
    }

    #[test]
    fn thermal_phase_is_nearly_maximally_mixed() {
        let m = model(5.0, 2.0, 0.0);
        let l = build_liouvillian(&m);
        let states = steady_states(&l, 1e-8).unwrap();
        let d = m.dim();
        let mixed = linalg::scaled(CMat::identity(d, d).as_ref(), c64::new(1.0 / d as f64, 0.0));
        let dist = linalg::trace_distance(states[0].as_ref(), mixed.as_ref()).unwrap();
        assert!(dist < 0.2, "trace distance to identity/d = {dist}");
        let fast = unique_steady_state(&l).unwrap();
        assert!((&fast.rho - &states[0]).norm_l2() < 1e-9);
        assert!(fast.residual < 1e-10);
    }

    #[test]
    fn slowest_rate_estimate_tracks_gap() {
        for (j, om, th) in [(2.0, 0.5, 0.3), (3.0, 2.0, 0.6), (1.5, 0.2, 0.0)] {
            let l = build_liouvillian(&model(j, om, th));
            let spec = spectrum(&l, 1e-8).unwrap();
            let smallest = spec.eigenvalues[1..].iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
            let ss = unique_steady_state(&l).unwrap();
            let est = slowest_rate_estimate(&l, ss.rho.as_ref()).unwrap();
            assert!((est / smallest - 1.0).abs() < 0.05, "estimate {est} vs {smallest}");
        }
    }

    #[test]
    fn asymptotic_state_dephases_in_sx_basis() {
        let m = model(2.0, 0.7, FRAC_PI_4);
        let l = build_liouvillian(&m);
        let psi = m.ops.spin_down();
        let rho0 = linalg::projector(&psi);
        let inf = asymptotic_state(&l, rho0.as_ref(), 1e-8).unwrap();
        let pops = m.ops.sx_populations(&psi);
        let mut want = CMat::zeros(m.dim(), m.dim());
        for (k, p) in pops.iter().enumerate() {
            linalg::add_scaled(&mut want, linalg::projector(&m.ops.sx_state(k)).as_ref(), c64::new(*p, 0.0));
        }
        assert!((inf - want).norm_l2() < 1e-9);
    }

    #[test]
    fn evolution_basics() {
        let m = model(1.5, 0.9, 0.3);
        let l = build_liouvillian(&m);
        let rho0 = linalg::projector(&m.ops.spin_up());
        let same = evolve_density(&l, rho0.as_ref(), 0.0, EvolutionMethod::Exponential).unwrap();
        assert_eq!((&same - &rho0).norm_l2(), 0.0);
        let a = evolve_density(&l, rho0.as_ref(), 2.0, EvolutionMethod::Exponential).unwrap();
        let b = evolve_density(&l, rho0.as_ref(), 2.0, EvolutionMethod::Rk4 { dt: 1e-3 }).unwrap();
        assert!((&a - &b).norm_l2() < 1e-9);
        let half = evolve_density(&l, rho0.as_ref(), 1.2, EvolutionMethod::Exponential).unwrap();
        let c = evolve_density(&l, half.as_ref(), 0.8, EvolutionMethod::Exponential).unwrap();
        assert!((&a - &c).norm_l2() < 1e-9);
        assert!((linalg::trace(a.as_ref()).re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn rk4_rejects_coarse_step() {
        let m = model(3.0, 5.0, 0.3);
        let l = build_liouvillian(&m);
        let rho0 = linalg::projector(&m.ops.spin_up());
        let r = evolve_density(&l, rho0.as_ref(), 5.0, EvolutionMethod::Rk4 { dt: 0.5 });
        assert!(r.is_err());
    }

    #[test]
    fn superradiant_decay_endpoint() {
        let m = model(2.0, 0.0, 0.0);
        let l = build_liouvillian(&m);
        let rho0 = linalg::projector(&m.ops.spin_up());
        let rho = evolve_density(&l, rho0.as_ref(), 200.0, EvolutionMethod::Exponential).unwrap();
        let want = linalg::projector(&m.ops.spin_down());
        assert!((rho - want).norm_l2() < 1e-8);
    }

    #[test]
    fn sx_eigenstates_are_stationary() {
        let m = model(2.0, 1.1, FRAC_PI_4);
        let l = build_liouvillian(&m);
        for k in 0..m.dim() {
            let rho0 = linalg::projector(&m.ops.sx_state(k));
            let rho = evolve_density(&l, rho0.as_ref(), 7.5, EvolutionMethod::Exponential).unwrap();
            assert!((rho - rho0).norm_l2() < 1e-10);
        }
    }

    #[test]
    fn rejects_invalid_initial_state() {
        let m = model(1.0, 0.0, 0.0);
        let l = build_liouvillian(&m);
        let bad = CMat::identity(3, 3);
        assert!(evolve_density(&l, bad.as_ref(), 1.0, EvolutionMethod::Exponential).is_err());
    }

    #[test]
    fn analytic_spectrum_entries() {
        let p = ModelParams::new(2.0, 0.7, 1.0, FRAC_PI_4).unwrap();
        let a = analytic_spectrum(&p);
        assert_eq!(a.entries.len(), 25);
        assert_eq!(a.chi_theta, 0.0);
        assert!((a.gamma_theta - 1.0).abs() < 1e-15);
        assert_eq!(a.entries[0].value, ZERO);
        for e in &a.entries {
            let q = e.q as f64;
            let sign = if e.branch == Branch::Plus { 1.0 } else { -1.0 };
            assert!((e.value - c64::new(-q * q / 4.0, sign * q * 0.7)).norm() < 1e-14);
        }
        let p0 = ModelParams::new(3.0, 2.0, 1.0, 0.0).unwrap();
        let a0 = analytic_spectrum(&p0);
        assert!((a0.gamma_theta - 0.5).abs() < 1e-15 && (a0.chi_theta - 0.5).abs() < 1e-15);
        let e = a0.entries.iter().find(|e| e.q == 1 && e.k == 0 && e.branch == Branch::Plus).unwrap();
        assert!((e.value - c64::new(-0.5 / 6.0 - 0.5 / 12.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn matching_is_a_bijection() {
        let p = ModelParams::new(0.5, 0.3, 1.0, 0.2).unwrap();
        let spec = spectrum(&build_liouvillian(&Model::new(p).unwrap()), 1e-8).unwrap();
        let rep = match_analytic(&spec.eigenvalues, &analytic_spectrum(&p));
        assert_eq!(rep.pairs.len(), 4);
        let mut a: Vec<usize> = rep.pairs.iter().map(|p| p.analytic).collect();
        a.sort_unstable();
        assert_eq!(a, vec![0, 1, 2, 3]);
    }

    #[test]
    fn exact_on_symmetry_line() {
        let p = ModelParams::new(3.0, 1.7, 1.0, FRAC_PI_4).unwrap();
        let spec = spectrum(&build_liouvillian(&Model::new(p).unwrap()), 1e-8).unwrap();
        let rep = match_analytic(&spec.eigenvalues, &analytic_spectrum(&p));
        assert!(rep.max_distance < 1e-8, "max distance {}", rep.max_distance);
    }
}
