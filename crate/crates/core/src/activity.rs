//! Jump-counting statistics: the counting distribution on the symmetry line,
//! empirical histograms, the tilted generator and its leading eigenvalue
//! `lambda(s)`, activities and discrete Legendre transforms.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use crate::freezing::AbsM;
use crate::liouvillian::{self, lindblad_matrix, sorted_eigenvalues, SuperopKind, Superoperator};
use crate::spin::{Model, ModelParams};
use crate::trajectory::TrajectoryRecord;
use crate::{Error, Result};

pub const DEFAULT_PROMINENCE: f64 = 1e-3;
pub const DEGENERACY_GAP: f64 = 1e-6;
const IMAG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub k: usize,
    pub height: f64,
    pub prominence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountingDistribution {
    pub window: f64,
    /// `p_T(K)` for `K = 0..probs.len()`.
    pub probs: Vec<f64>,
    /// Multinomial standard errors, for histograms.
    pub se: Option<Vec<f64>>,
    /// Predicted centers `K_m = T Gamma m^2 / J` per supported `|m|`.
    pub mode_centers: Vec<(AbsM, f64)>,
    /// Peaks at [`DEFAULT_PROMINENCE`].
    pub peaks: Vec<Peak>,
}

impl CountingDistribution {
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Poisson mixture `sum_m c_m Poisson(K; T Gamma m^2 / J)` for a diagonal
/// initial state on the symmetry line. `populations` are over ascending `m`.
pub fn counting_distribution_analytic(populations: &[f64], window: f64, params: &ModelParams) -> Result<CountingDistribution> {
    params.validate()?;
    if !params.is_symmetry_point() {
        return Err(Error::NotSymmetryPoint(params.theta));
    }
    if populations.len() != params.dim() {
        return Err(Error::DimensionMismatch { expected: params.dim(), found: populations.len() });
    }
    if populations.iter().any(|p| !(*p >= 0.0)) {
        return Err(Error::InvalidInput("populations must be non-negative".into()));
    }
    let total: f64 = populations.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("populations sum to {total}")));
    }
    if !(window >= 0.0) || !window.is_finite() {
        return Err(Error::InvalidInput(format!("window T = {window} must be non-negative")));
    }
    let mut centers: Vec<(AbsM, f64, f64)> = Vec::new();
    for (&m, &c) in params.m_values().iter().zip(populations) {
        if c == 0.0 {
            continue;
        }
        let a = AbsM::from_m(m);
        let mu = window * params.gamma * m * m / params.j;
        match centers.iter_mut().find(|(x, _, _)| *x == a) {
            Some(entry) => entry.2 += c,
            None => centers.push((a, mu, c)),
        }
    }
    centers.sort_by_key(|c| c.0);
    let top = centers.iter().map(|c| c.1).fold(0.0, f64::max);
    let k_max = (top + 10.0 * top.sqrt()).ceil() as usize + 10;
    let probs: Vec<f64> = (0..=k_max)
        .map(|k| {
            let kf = k as f64;
            centers
                .iter()
                .map(|&(_, mu, c)| {
                    if mu == 0.0 {
                        if k == 0 {
                            c
                        } else {
                            0.0
                        }
                    } else {
                        (kf * mu.ln() - mu - ln_gamma(kf + 1.0) + c.ln()).exp()
                    }
                })
                .sum()
        })
        .collect();
    let peaks = find_peaks(&probs, DEFAULT_PROMINENCE);
    Ok(CountingDistribution {
        window,
        probs,
        se: None,
        mode_centers: centers.into_iter().map(|(a, mu, _)| (a, mu)).collect(),
        peaks,
    })
}

/// Normalized histogram of total jump counts.
pub fn counting_distribution_mc(records: &[TrajectoryRecord], window: f64) -> Result<CountingDistribution> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no trajectories".into()));
    }
    let k_max = records.iter().map(|r| r.n()).max().unwrap_or(0);
    let mut counts = vec![0usize; k_max + 1];
    for r in records {
        counts[r.n()] += 1;
    }
    let n = records.len() as f64;
    let probs: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let se = probs.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    let peaks = find_peaks(&probs, DEFAULT_PROMINENCE);
    Ok(CountingDistribution { window, probs, se: Some(se), mode_centers: Vec::new(), peaks })
}

/// `(1/2) sum_K |p(K) - q(K)|`, missing entries read as zero.
pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    let n = p.len().max(q.len());
    0.5 * (0..n).map(|k| (p.get(k).unwrap_or(&0.0) - q.get(k).unwrap_or(&0.0)).abs()).sum::<f64>()
}

/// Local maxima whose topographic prominence exceeds `min_prominence`.
/// The sequence is padded with zeros on both sides, so a maximum at `K = 0`
/// counts; a plateau is reported once, at its left end.
pub fn find_peaks(probs: &[f64], min_prominence: f64) -> Vec<Peak> {
    let n = probs.len();
    let at = |i: isize| if i < 0 || i >= n as isize { 0.0 } else { probs[i as usize] };
    let mut peaks = Vec::new();
    let mut i = 0usize;
    while i < n {
        let mut j = i;
        while j + 1 < n && probs[j + 1] == probs[i] {
            j += 1;
        }
        let h = probs[i];
        if h > at(i as isize - 1) && h > at(j as isize + 1) {
            let mut left_min = h;
            let mut l = i as isize - 1;
            loop {
                let v = at(l);
                if v > h {
                    break;
                }
                left_min = left_min.min(v);
                if l < 0 {
                    break;
                }
                l -= 1;
            }
            let mut right_min = h;
            let mut r = j as isize + 1;
            loop {
                let v = at(r);
                if v > h {
                    break;
                }
                right_min = right_min.min(v);
                if r >= n as isize {
                    break;
                }
                r += 1;
            }
            let prominence = h - left_min.max(right_min);
            if prominence > min_prominence {
                peaks.push(Peak { k: i, height: h, prominence });
            }
        }
        i = j + 1;
    }
    peaks
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchedPeak {
    pub peak: Peak,
    pub nearest_mode: Option<(AbsM, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Multimodality {
    pub count: usize,
    pub peaks: Vec<MatchedPeak>,
}

pub fn multimodality(dist: &CountingDistribution, prominence: f64) -> Multimodality {
    let peaks: Vec<MatchedPeak> = find_peaks(&dist.probs, prominence)
        .into_iter()
        .map(|peak| {
            let nearest_mode = dist
                .mode_centers
                .iter()
                .copied()
                .min_by(|a, b| (a.1 - peak.k as f64).abs().total_cmp(&(b.1 - peak.k as f64).abs()));
            MatchedPeak { peak, nearest_mode }
        })
        .collect();
    Multimodality { count: peaks.len(), peaks }
}

/// `W_s = L + (e^s - 1) L . L^dag`.
pub fn tilted_liouvillian(params: &ModelParams, s: f64) -> Result<Superoperator> {
    let model = Model::new(*params)?;
    Ok(tilted_of(&model, s))
}

fn tilted_of(model: &Model, s: f64) -> Superoperator {
    let mat = lindblad_matrix(model.hamiltonian.as_ref(), model.jump.as_ref(), s.exp());
    Superoperator::from_parts(model.dim(), mat, SuperopKind::Tilted { s })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScgfPoint {
    pub s: f64,
    pub lambda: f64,
    /// Real part of the next eigenvalue.
    pub subleading: f64,
    pub near_degenerate: bool,
}

/// Leading eigenvalue of `W_s`, required to be real within `1e-9 Gamma`.
pub fn scgf_point(model: &Model, s: f64) -> Result<ScgfPoint> {
    let w = tilted_of(model, s);
    let ev = sorted_eigenvalues(w.mat.as_ref()).map_err(|e| Error::Eigensolver(format!("at s = {s}: {e}")))?;
    let top = ev[0];
    let gamma = model.params.gamma;
    if top.im.abs() > IMAG_TOL * gamma {
        return Err(Error::NonRealLeadingEigenvalue { s, imag: top.im });
    }
    let subleading = ev.get(1).map_or(f64::NEG_INFINITY, |z| z.re);
    Ok(ScgfPoint { s, lambda: top.re, subleading, near_degenerate: top.re - subleading < DEGENERACY_GAP * gamma })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSided {
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LargeDeviationCurve {
    pub s_grid: Vec<f64>,
    pub points: Vec<ScgfPoint>,
    /// Central differences inside, one-sided at the ends; `None` at `s = 0`
    /// on the symmetry line.
    pub activity: Vec<Option<f64>>,
    /// One-sided derivatives at `s = 0`, when both neighbours exist.
    pub activity_at_zero: Option<OneSided>,
    pub zero_index: usize,
}

impl LargeDeviationCurve {
    pub fn lambda(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.lambda).collect()
    }

    /// Smallest discrete second difference (slope increment times the mean
    /// spacing, which is the plain second difference on uniform grids);
    /// negative values indicate non-convexity.
    pub fn min_convexity_margin(&self) -> f64 {
        let l = self.lambda();
        let s = &self.s_grid;
        (1..s.len().saturating_sub(1))
            .map(|i| {
                let slopes = (l[i + 1] - l[i]) / (s[i + 1] - s[i]) - (l[i] - l[i - 1]) / (s[i] - s[i - 1]);
                slopes * 0.5 * (s[i + 1] - s[i - 1])
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn lambda_at_zero(&self) -> f64 {
        self.points[self.zero_index].lambda
    }
}

/// `lambda(s)` over an ascending grid containing `s = 0`, evaluated in
/// parallel.
pub fn scgf(params: &ModelParams, s_grid: &[f64]) -> Result<LargeDeviationCurve> {
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("empty s grid".into()));
    }
    if s_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("s grid must be strictly ascending".into()));
    }
    let zero_index = s_grid
        .iter()
        .position(|&s| s == 0.0)
        .ok_or_else(|| Error::InvalidInput("s grid must contain 0".into()))?;
    let model = Model::new(*params)?;
    let points = s_grid.par_iter().map(|&s| scgf_point(&model, s)).collect::<Result<Vec<_>>>()?;
    let l: Vec<f64> = points.iter().map(|p| p.lambda).collect();
    let n = s_grid.len();
    let mut activity: Vec<Option<f64>> = (0..n)
        .map(|i| {
            if n < 2 {
                None
            } else if i == 0 {
                Some((l[1] - l[0]) / (s_grid[1] - s_grid[0]))
            } else if i == n - 1 {
                Some((l[i] - l[i - 1]) / (s_grid[i] - s_grid[i - 1]))
            } else {
                Some((l[i + 1] - l[i - 1]) / (s_grid[i + 1] - s_grid[i - 1]))
            }
        })
        .collect();
    let z = zero_index;
    let activity_at_zero = (z > 0 && z + 1 < n).then(|| OneSided {
        left: if z >= 2 {
            one_sided_derivative([s_grid[z], s_grid[z - 1], s_grid[z - 2]], [l[z], l[z - 1], l[z - 2]])
        } else {
            (l[z] - l[z - 1]) / (s_grid[z] - s_grid[z - 1])
        },
        right: if z + 2 < n {
            one_sided_derivative([s_grid[z], s_grid[z + 1], s_grid[z + 2]], [l[z], l[z + 1], l[z + 2]])
        } else {
            (l[z + 1] - l[z]) / (s_grid[z + 1] - s_grid[z])
        },
    });
    if params.is_symmetry_point() {
        activity[z] = None;
    }
    Ok(LargeDeviationCurve { s_grid: s_grid.to_vec(), points, activity, activity_at_zero, zero_index })
}

/// Derivative at `x[0]` of the parabola through three points on one side.
fn one_sided_derivative(x: [f64; 3], f: [f64; 3]) -> f64 {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    f[0] * (2.0 * x0 - x1 - x2) / ((x0 - x1) * (x0 - x2))
        + f[1] * (x0 - x2) / ((x1 - x0) * (x1 - x2))
        + f[2] * (x0 - x1) / ((x2 - x0) * (x2 - x1))
}

/// Mean jump rate `tr(L rho_ss L^dag)` in the unique steady state.
pub fn steady_state_activity(params: &ModelParams) -> Result<f64> {
    let model = Model::new(*params)?;
    let l = liouvillian::build_liouvillian(&model);
    let ss = liouvillian::unique_steady_state(&l)?;
    Ok(crate::linalg::expectation(ss.rho.as_ref(), model.jump_rate_operator().as_ref()).re)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateFunction {
    pub k_grid: Vec<f64>,
    /// `phi(k) = max_s [k s - lambda(s)]` over the sampled grid.
    pub phi: Vec<f64>,
    pub maximizer: Vec<f64>,
    /// Maximizer sits on the first or last grid point.
    pub extrapolated: Vec<bool>,
    /// `[k_lo, k_hi]` runs where `phi` is linear (fixed maximizer), wider
    /// than a tenth of the `k` range.
    pub linear_segments: Vec<(f64, f64, f64)>,
}

impl RateFunction {
    /// `max_k [k s - phi(k)]` over the non-extrapolated `k` points.
    pub fn forward(&self, s_grid: &[f64]) -> Vec<f64> {
        s_grid
            .iter()
            .map(|&s| {
                self.k_grid
                    .iter()
                    .zip(&self.phi)
                    .zip(&self.extrapolated)
                    .filter(|(_, e)| !**e)
                    .map(|((k, phi), _)| k * s - phi)
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }
}

/// Discrete Legendre transform of sampled `(s, lambda)`.
pub fn legendre_samples(s_grid: &[f64], lambda: &[f64], k_grid: &[f64]) -> RateFunction {
    let n = s_grid.len();
    let mut phi = Vec::with_capacity(k_grid.len());
    let mut maximizer = Vec::with_capacity(k_grid.len());
    let mut extrapolated = Vec::with_capacity(k_grid.len());
    let mut arg = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let vals: Vec<f64> = (0..n).map(|i| k * s_grid[i] - lambda[i]).collect();
        let val = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // Ties prefer an interior maximizer.
        let tol = 1e-12 * (1.0 + val.abs());
        let interior = (1..n.saturating_sub(1)).find(|&i| vals[i] >= val - tol);
        let best = interior.unwrap_or_else(|| if vals[0] >= val { 0 } else { n - 1 });
        phi.push(val);
        maximizer.push(s_grid[best]);
        extrapolated.push(n > 1 && interior.is_none());
        arg.push(best);
    }
    let span = match (k_grid.first(), k_grid.last()) {
        (Some(a), Some(b)) => b - a,
        _ => 0.0,
    };
    let mut linear_segments = Vec::new();
    let mut start = 0;
    for i in 1..=k_grid.len() {
        if i == k_grid.len() || arg[i] != arg[start] {
            let width = k_grid[i - 1] - k_grid[start];
            if !extrapolated[start] && span > 0.0 && width > 0.1 * span {
                linear_segments.push((k_grid[start], k_grid[i - 1], maximizer[start]));
            }
            start = i;
        }
    }
    RateFunction { k_grid: k_grid.to_vec(), phi, maximizer, extrapolated, linear_segments }
}

pub fn legendre(curve: &LargeDeviationCurve, k_grid: &[f64]) -> RateFunction {
    legendre_samples(&curve.s_grid, &curve.lambda(), k_grid)
}

/// `n + 1` evenly spaced points from `lo` to `hi`, with values within a
/// thousandth of a step of zero snapped to exactly zero.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(hi >= lo) {
        return Err(Error::InvalidInput(format!("invalid grid {lo}:{hi}:{step}")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| {
            let v = lo + i as f64 * step;
            if v.abs() < 1e-3 * step {
                0.0
            } else {
                v
            }
        })
        .collect())
}
