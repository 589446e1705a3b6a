//! Dissipative freezing: the conditional distribution over `S_x` eigenstates
//! given a jump count, and per-trajectory detection of trapping into a
//! single `S_x^2` eigenspace.

use std::fmt;

use faer::c64;

use crate::spin::ModelParams;
use crate::trajectory::{Series, TrajectoryRecord};
use crate::{Error, Result};

/// Populations below this are treated as numerical noise in decay fits.
pub const POPULATION_NOISE_FLOOR: f64 = 1e-20;
pub const DEFAULT_THRESHOLD: f64 = 0.999;

/// An `S_x^2` eigenspace labelled by `|m|`, stored as `2|m|` so half-integer
/// spins stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AbsM(u32);

impl AbsM {
    pub fn from_m(m: f64) -> Self {
        Self((2.0 * m.abs()).round() as u32)
    }

    pub fn from_twice(twice: u32) -> Self {
        Self(twice)
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    pub fn twice(self) -> u32 {
        self.0
    }
}

impl fmt::Display for AbsM {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The `|m|` ladder `{J mod 1, ..., J}`.
pub fn abs_m_ladder(params: &ModelParams) -> Vec<AbsM> {
    let two_j = params.two_j();
    (0..=two_j).filter(|t| t % 2 == two_j % 2).map(AbsM).collect()
}

/// Sums populations over `m` (ascending `-J..J`) into `|m|` eigenspaces,
/// ordered like [`abs_m_ladder`].
pub fn eigenspace_populations(params: &ModelParams, pops: &[f64]) -> Vec<(AbsM, f64)> {
    let ladder = abs_m_ladder(params);
    let mut out: Vec<(AbsM, f64)> = ladder.iter().map(|&a| (a, 0.0)).collect();
    for (m, p) in params.m_values().into_iter().zip(pops) {
        let a = AbsM::from_m(m);
        let slot = ladder.iter().position(|&x| x == a).expect("m on ladder");
        out[slot].1 += p;
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreezingDistribution {
    pub t: f64,
    pub n: u64,
    /// `nJ / (t Gamma)`
    pub alpha: f64,
    /// `p(m; t, n)` over ascending `m = -J..J`.
    pub probs: Vec<f64>,
    /// Ladder value closest to `sqrt(alpha)`.
    pub m_tilde: AbsM,
    params: ModelParams,
}

impl FreezingDistribution {
    pub fn eigenspace_probs(&self) -> Vec<(AbsM, f64)> {
        eigenspace_populations(&self.params, &self.probs)
    }

    /// Eigenspaces carrying more than `min_prob`.
    pub fn occupied(&self, min_prob: f64) -> Vec<AbsM> {
        self.eigenspace_probs().into_iter().filter(|(_, p)| *p > min_prob).map(|(a, _)| a).collect()
    }

    pub fn dominant(&self) -> AbsM {
        self.eigenspace_probs().into_iter().max_by(|a, b| a.1.total_cmp(&b.1)).map(|(a, _)| a).unwrap_or(AbsM(0))
    }
}

/// `p(m; t, n) ∝ exp(-(t Gamma / J) m^2) |m|^(2n) |c_m(0)|^2`, evaluated in log
/// space and normalized over `m`. `c0` holds amplitudes over ascending `m`.
pub fn freezing_probability(c0: &[c64], t: f64, n: u64, params: &ModelParams) -> Result<FreezingDistribution> {
    params.validate()?;
    let d = params.dim();
    if c0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: c0.len() });
    }
    let total: f64 = c0.iter().map(|a| a.norm_sqr()).sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("initial amplitudes have squared norm {total}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidInput(format!("t = {t} must be positive")));
    }
    let rate = t * params.gamma / params.j;
    let logw: Vec<f64> = params
        .m_values()
        .iter()
        .zip(c0)
        .map(|(&m, a)| {
            let w = a.norm_sqr();
            if w == 0.0 {
                return f64::NEG_INFINITY;
            }
            let jump_term = if n == 0 {
                0.0
            } else if m == 0.0 {
                f64::NEG_INFINITY
            } else {
                2.0 * n as f64 * m.abs().ln()
            };
            -rate * m * m + jump_term + w.ln()
        })
        .collect();
    let top = logw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return Err(Error::ZeroWeight(format!("no m with nonzero amplitude is compatible with n = {n} jumps")));
    }
    let unnorm: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = unnorm.iter().sum();
    let probs = unnorm.iter().map(|w| w / z).collect();
    let alpha = n as f64 * params.j / (t * params.gamma);
    let root = alpha.sqrt();
    let m_tilde = abs_m_ladder(params)
        .into_iter()
        .min_by(|a, b| (a.value() - root).abs().total_cmp(&(b.value() - root).abs()).then(a.cmp(b)))
        .unwrap_or(AbsM(0));
    Ok(FreezingDistribution { t, n, alpha, probs, m_tilde, params: *params })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreezingVerdict {
    /// Eigenspace with the largest population at the final snapshot.
    pub selected: AbsM,
    pub final_population: f64,
    /// Start of the final uninterrupted stretch above threshold.
    pub freeze_time: Option<f64>,
    /// Least-squares rate of `-d/dt ln(largest competing population)`;
    /// `None` when no competitor is above the noise floor.
    pub decay_rate: Option<f64>,
    pub frozen: bool,
}

pub fn detect_freezing(record: &TrajectoryRecord, params: &ModelParams, threshold: f64) -> Result<FreezingVerdict> {
    if !(threshold > 0.5 && threshold < 1.0) {
        return Err(Error::InvalidParams(format!("threshold {threshold} must lie in (0.5, 1)")));
    }
    const NEEDED: usize = 2;
    if record.snapshots.len() < NEEDED {
        return Err(Error::InsufficientSnapshots { needed: NEEDED, found: record.snapshots.len() });
    }
    let spaces: Vec<Vec<(AbsM, f64)>> =
        record.snapshots.iter().map(|s| eigenspace_populations(params, &s.populations)).collect();
    let last = spaces.last().expect("non-empty");
    let (slot, &(selected, final_population)) =
        last.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).expect("non-empty ladder");
    let frozen = final_population > threshold;
    let freeze_time = frozen.then(|| {
        let start = spaces.iter().rposition(|s| s[slot].1 <= threshold).map_or(0, |k| k + 1);
        record.snapshots[start].time
    });

    let competitor: Vec<(f64, f64)> = record
        .snapshots
        .iter()
        .zip(&spaces)
        .map(|(snap, s)| {
            let c = s.iter().enumerate().filter(|(k, _)| *k != slot).map(|(_, (_, p))| *p).fold(0.0, f64::max);
            (snap.time, c)
        })
        .collect();
    // Fit over the second half of the stretch before the competitor first
    // sinks into round-off noise.
    let end = competitor.iter().position(|(_, c)| *c <= POPULATION_NOISE_FLOOR).unwrap_or(competitor.len());
    let window: Vec<(f64, f64)> = competitor[end / 2..end].iter().map(|&(t, c)| (t, c.ln())).collect();
    let decay_rate = fit_slope(&window).map(|s| -s);
    Ok(FreezingVerdict { selected, final_population, freeze_time, decay_rate, frozen })
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenspaceFraction {
    pub space: AbsM,
    pub initial_population: f64,
    pub count: usize,
    pub fraction: f64,
    /// Binomial standard error.
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionStatistics {
    pub verdicts: Vec<FreezingVerdict>,
    pub n_frozen: usize,
    /// Fractions among frozen trajectories.
    pub fractions: Vec<EigenspaceFraction>,
    pub times: Vec<f64>,
    pub sx: Series,
    /// Largest `|<S_x>(t) - <S_x>(0)|` in units of the standard error
    /// (points with zero error are compared exactly).
    pub max_sx_deviation_se: f64,
    pub final_sx_std: f64,
    pub final_sx_mean: f64,
}

/// Frozen fractions per eigenspace and the ensemble-versus-trajectory
/// behaviour of `<S_x>`. `initial_populations` are over ascending `m`.
pub fn selection_statistics(
    records: &[TrajectoryRecord],
    params: &ModelParams,
    initial_populations: &[f64],
    threshold: f64,
) -> Result<SelectionStatistics> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no trajectories".into()));
    }
    let verdicts = records.iter().map(|r| detect_freezing(r, params, threshold)).collect::<Result<Vec<_>>>()?;
    let n_frozen = verdicts.iter().filter(|v| v.frozen).count();
    let init = eigenspace_populations(params, initial_populations);
    let fractions = init
        .iter()
        .map(|&(space, initial_population)| {
            let count = verdicts.iter().filter(|v| v.frozen && v.selected == space).count();
            let n = n_frozen.max(1) as f64;
            let fraction = count as f64 / n;
            EigenspaceFraction { space, initial_population, count, fraction, se: (fraction * (1.0 - fraction) / n).sqrt() }
        })
        .collect();
    let times: Vec<f64> = records[0].snapshots.iter().map(|s| s.time).collect();
    let sx = Series::from_samples(records.iter().map(|r| r.snapshots.iter().map(|s| s.sx).collect()), times.len());
    let max_sx_deviation_se = sx
        .mean
        .iter()
        .zip(&sx.se)
        .map(|(m, se)| {
            let dev = (m - sx.mean[0]).abs();
            if dev <= 1e-9 {
                0.0
            } else if *se == 0.0 {
                f64::INFINITY
            } else {
                dev / se
            }
        })
        .fold(0.0, f64::max);
    let finals: Vec<f64> = records.iter().map(|r| r.snapshots.last().map_or(0.0, |s| s.sx)).collect();
    let n = finals.len() as f64;
    let final_sx_mean = finals.iter().sum::<f64>() / n;
    let final_sx_std = if finals.len() > 1 {
        (finals.iter().map(|x| (x - final_sx_mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Ok(SelectionStatistics { verdicts, n_frozen, fractions, times, sx, max_sx_deviation_se, final_sx_std, final_sx_mean })
}
