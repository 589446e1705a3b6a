//! Quantum-jump unraveling of the master equation.
//!
//! Each step either applies the jump operator (probability
//! `dp = dt <psi|L^dag L|psi>`) or the precomputed no-jump propagator
//! `exp(-i H_eff dt)`, followed by renormalization. Trajectory `i` of an
//! ensemble is seeded with [`child_seed`]`(master, i)`, so results do not
//! depend on scheduling or thread count.

use faer::c64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{self, CMat, DenseOp, SplitVec};
use crate::spin::{Model, ModelParams};
use crate::{Error, Result};

pub const DEFAULT_MAX_JUMP_PROB: f64 = 0.01;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConfig {
    pub params: ModelParams,
    pub t_final: f64,
    pub dt: f64,
    /// Snapshot stride in steps. The final time is always sampled.
    pub sample_every: usize,
    pub seed: u64,
    pub max_jump_prob: f64,
    /// Keep the full state vector in every snapshot.
    pub store_states: bool,
}

impl TrajectoryConfig {
    pub fn new(params: ModelParams, t_final: f64, dt: f64, seed: u64) -> Result<Self> {
        let cfg = Self {
            params,
            t_final,
            dt,
            sample_every: 1,
            seed,
            max_jump_prob: DEFAULT_MAX_JUMP_PROB,
            store_states: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sample_every(mut self, stride: usize) -> Self {
        self.sample_every = stride;
        self
    }

    pub fn with_max_jump_prob(mut self, cap: f64) -> Self {
        self.max_jump_prob = cap;
        self
    }

    pub fn with_states(mut self, store: bool) -> Self {
        self.store_states = store;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::InvalidParams(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_final >= 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParams(format!("t_final = {} must be non-negative", self.t_final)));
        }
        if !(self.max_jump_prob > 0.0 && self.max_jump_prob <= 0.1) {
            return Err(Error::InvalidParams(format!(
                "max_jump_prob = {} must lie in (0, 0.1]",
                self.max_jump_prob
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::InvalidParams("sample_every must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of steps; `dt` is shrunk slightly so the last step lands on
    /// `t_final`.
    pub fn n_steps(&self) -> usize {
        if self.t_final == 0.0 {
            0
        } else {
            (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize
        }
    }

    pub fn effective_dt(&self) -> f64 {
        match self.n_steps() {
            0 => self.dt,
            n => self.t_final / n as f64,
        }
    }

    /// Snapshot times shared by every trajectory of this configuration.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let n = self.n_steps();
        let h = self.effective_dt();
        let mut t: Vec<f64> = (0..=n).step_by(self.sample_every).map(|k| k as f64 * h).collect();
        if n % self.sample_every != 0 {
            t.push(n as f64 * h);
        }
        t
    }
}

/// Largest step keeping `dp <= cap` for every state, from the top eigenvalue
/// of `L^dag L`.
pub fn max_safe_dt(params: &ModelParams, cap: f64) -> Result<f64> {
    let model = Model::new(*params)?;
    let top = *linalg::hermitian_eigenvalues(model.jump_rate_operator().as_ref())?.last().unwrap_or(&0.0);
    Ok(if top > 0.0 { cap / top } else { f64::INFINITY })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    /// `|<m|psi>|^2` over ascending `S_x` eigenvalues `m = -J..J`.
    pub populations: Vec<f64>,
    pub sx: f64,
    pub sy: f64,
    pub sz: f64,
    pub state: Option<Vec<c64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub jump_times: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: Vec<c64>,
}

impl TrajectoryRecord {
    /// Number of jumps.
    pub fn n(&self) -> usize {
        self.jump_times.len()
    }

    /// Number of jumps up to and including time `t`.
    pub fn jumps_until(&self, t: f64) -> usize {
        self.jump_times.partition_point(|&s| s <= t)
    }
}

/// `H_eff = Omega S_x - (i/2) L^dag L`.
pub fn effective_hamiltonian(params: &ModelParams) -> Result<CMat> {
    Ok(effective_hamiltonian_of(&Model::new(*params)?))
}

fn effective_hamiltonian_of(model: &Model) -> CMat {
    let k = model.jump_rate_operator();
    let mut h = model.hamiltonian.clone();
    linalg::add_scaled(&mut h, k.as_ref(), c64::new(0.0, -0.5));
    h
}

/// Immutable per-configuration data shared by every trajectory.
#[derive(Debug, Clone)]
pub struct Engine {
    pub config: TrajectoryConfig,
    pub model: Model,
    dim: usize,
    step: DenseOp,
    jump: DenseOp,
    sx: DenseOp,
    sy: DenseOp,
    sz: DenseOp,
    to_sx: DenseOp,
}

impl Engine {
    pub fn new(config: TrajectoryConfig) -> Result<Self> {
        config.validate()?;
        let model = Model::new(config.params)?;
        let h = effective_hamiltonian_of(&model);
        let gen = linalg::scaled(h.as_ref(), c64::new(0.0, -config.effective_dt()));
        let step = linalg::expm(gen.as_ref());
        Ok(Self {
            config,
            dim: model.dim(),
            step: DenseOp::new(step.as_ref()),
            jump: DenseOp::new(model.jump.as_ref()),
            sx: DenseOp::new(model.ops.sx.as_ref()),
            sy: DenseOp::new(model.ops.sy.as_ref()),
            sz: DenseOp::new(model.ops.sz.as_ref()),
            to_sx: DenseOp::new(model.ops.sx_basis.adjoint().to_owned().as_ref()),
            model,
        })
    }

    fn snapshot(&self, time: f64, psi: &SplitVec, buf: &mut SplitVec) -> Snapshot {
        let mut expect = |op: &DenseOp| {
            op.apply(psi, buf);
            psi.real_dot(buf)
        };
        let sx = expect(&self.sx);
        let sy = expect(&self.sy);
        let sz = expect(&self.sz);
        self.to_sx.apply(psi, buf);
        Snapshot {
            time,
            populations: buf.re.iter().zip(&buf.im).map(|(r, i)| r * r + i * i).collect(),
            sx,
            sy,
            sz,
            state: self.config.store_states.then(|| psi.to_complex()),
        }
    }

    /// One trajectory from `psi0` driven by `ChaCha8Rng` seeded with `seed`.
    pub fn run(&self, psi0: &[c64], seed: u64) -> Result<TrajectoryRecord> {
        let d = self.dim;
        if psi0.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: psi0.len() });
        }
        let norm0 = psi0.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm0 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidInput(format!("initial state has norm {norm0}, expected 1")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.config.n_steps();
        let h = self.config.effective_dt();
        let stride = self.config.sample_every;
        let mut psi = SplitVec::from_complex(psi0);
        let mut lpsi = SplitVec::zeros(d);
        let mut next = SplitVec::zeros(d);
        let mut snapshots = Vec::with_capacity(n / stride + 2);
        let mut jump_times = Vec::new();
        snapshots.push(self.snapshot(0.0, &psi, &mut next));
        for k in 0..n {
            self.jump.apply(&psi, &mut lpsi);
            let dp = h * lpsi.norm_sqr();
            if dp > self.config.max_jump_prob {
                return Err(Error::StepTooCoarse { time: k as f64 * h, prob: dp, cap: self.config.max_jump_prob });
            }
            let u: f64 = rng.random();
            let t_next = (k + 1) as f64 * h;
            if u < dp {
                jump_times.push(t_next);
                std::mem::swap(&mut psi, &mut lpsi);
            } else {
                self.step.apply(&psi, &mut next);
                std::mem::swap(&mut psi, &mut next);
            }
            let nrm = psi.norm_sqr().sqrt();
            if !nrm.is_finite() || nrm == 0.0 {
                return Err(Error::NonFiniteState(t_next));
            }
            psi.scale(1.0 / nrm);
            if (k + 1) % stride == 0 || k + 1 == n {
                snapshots.push(self.snapshot(t_next, &psi, &mut next));
            }
        }
        Ok(TrajectoryRecord { seed, jump_times, snapshots, final_state: psi.to_complex() })
    }
}

/// Single trajectory seeded directly with `config.seed`.
pub fn run_trajectory(config: &TrajectoryConfig, psi0: &[c64]) -> Result<TrajectoryRecord> {
    Engine::new(*config)?.run(psi0, config.seed)
}

/// SplitMix64 finalizer applied to `master + (index + 1) * golden`.
pub fn child_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Pure(Vec<c64>),
    /// Statistical mixture of normalized pure states with probabilities
    /// summing to one. Each trajectory draws its component from a separate
    /// random stream.
    Mixture(Vec<(f64, Vec<c64>)>),
}

impl InitialState {
    pub fn density_matrix(&self) -> CMat {
        match self {
            InitialState::Pure(psi) => linalg::projector(psi),
            InitialState::Mixture(parts) => {
                let d = parts[0].1.len();
                let mut rho = CMat::zeros(d, d);
                for (w, psi) in parts {
                    linalg::add_scaled(&mut rho, linalg::projector(psi).as_ref(), c64::new(*w, 0.0));
                }
                rho
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if let InitialState::Mixture(parts) = self {
            if parts.is_empty() {
                return Err(Error::InvalidInput("empty mixture".into()));
            }
            if parts.iter().any(|(w, _)| !(*w >= 0.0)) {
                return Err(Error::InvalidInput("mixture weights must be non-negative".into()));
            }
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidInput(format!("mixture weights sum to {total}")));
            }
        }
        Ok(())
    }

    fn pick(&self, seed: u64) -> &[c64] {
        match self {
            InitialState::Pure(psi) => psi,
            InitialState::Mixture(parts) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, psi) in parts {
                    acc += w;
                    if u < acc {
                        return psi;
                    }
                }
                &parts.iter().rev().find(|(w, _)| *w > 0.0).unwrap_or(&parts[parts.len() - 1]).1
            }
        }
    }
}

/// Ensemble mean and standard error of the mean at each snapshot time.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub mean: Vec<f64>,
    pub se: Vec<f64>,
}

impl Series {
    /// Index-ordered accumulation; `values[i][t]` is trajectory `i` at time
    /// index `t`.
    pub fn from_samples<I>(samples: I, n_times: usize) -> Self
    where
        I: IntoIterator<Item = Vec<f64>>,
    {
        let mut sum = vec![0.0; n_times];
        let mut sq = vec![0.0; n_times];
        let mut count = 0usize;
        for row in samples {
            for (t, v) in row.into_iter().enumerate() {
                sum[t] += v;
                sq[t] += v * v;
            }
            count += 1;
        }
        let n = count as f64;
        let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
        let se = sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| {
                if count < 2 {
                    0.0
                } else {
                    ((q / n - m * m).max(0.0) * n / (n - 1.0) / n).sqrt()
                }
            })
            .collect();
        Self { mean, se }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub times: Vec<f64>,
    pub sx: Series,
    pub sy: Series,
    pub sz: Series,
    /// One series per `S_x` eigenvalue, ascending `m`.
    pub populations: Vec<Series>,
}

#[derive(Debug, Clone)]
pub struct Ensemble {
    pub config: TrajectoryConfig,
    pub records: Vec<TrajectoryRecord>,
    pub summary: EnsembleSummary,
}

impl Ensemble {
    /// Trajectory-averaged density matrix at snapshot index `idx`; requires
    /// `store_states`.
    pub fn average_density(&self, idx: usize) -> Result<CMat> {
        let d = self.config.params.dim();
        let mut rho = CMat::zeros(d, d);
        for r in &self.records {
            let snap = r.snapshots.get(idx).ok_or(Error::InsufficientSnapshots { needed: idx + 1, found: r.snapshots.len() })?;
            let psi = snap
                .state
                .as_ref()
                .ok_or_else(|| Error::InvalidInput("ensemble was run without stored states".into()))?;
            for j in 0..d {
                for i in 0..d {
                    rho[(i, j)] += psi[i] * psi[j].conj();
                }
            }
        }
        Ok(linalg::scaled(rho.as_ref(), c64::new(1.0 / self.records.len() as f64, 0.0)))
    }

    /// Snapshot index closest to time `t`.
    pub fn snapshot_index(&self, t: f64) -> usize {
        let times = &self.summary.times;
        (0..times.len()).min_by(|&a, &b| (times[a] - t).abs().total_cmp(&(times[b] - t).abs())).unwrap_or(0)
    }
}

pub fn summarize(config: &TrajectoryConfig, records: &[TrajectoryRecord]) -> EnsembleSummary {
    let times = config.snapshot_times();
    let nt = times.len();
    let pick = |f: &dyn Fn(&Snapshot) -> f64| Series::from_samples(records.iter().map(|r| r.snapshots.iter().map(f).collect()), nt);
    let sx = pick(&|s| s.sx);
    let sy = pick(&|s| s.sy);
    let sz = pick(&|s| s.sz);
    let populations = (0..config.params.dim()).map(|k| pick(&|s| s.populations[k])).collect();
    EnsembleSummary { times, sx, sy, sz, populations }
}

/// Runs `n_traj` trajectories in parallel on the current rayon pool.
pub fn run_ensemble(config: &TrajectoryConfig, init: &InitialState, n_traj: usize) -> Result<Ensemble> {
    if n_traj == 0 {
        return Err(Error::InvalidParams("n_traj must be at least 1".into()));
    }
    init.validate()?;
    let engine = Engine::new(*config)?;
    let results: Vec<Result<TrajectoryRecord>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let seed = child_seed(config.seed, i as u64);
            engine.run(init.pick(seed), seed)
        })
        .collect();
    let mut records = Vec::with_capacity(n_traj);
    for (index, r) in results.into_iter().enumerate() {
        records.push(r.map_err(|e| Error::Trajectory { index, source: Box::new(e) })?);
    }
    let summary = summarize(config, &records);
    Ok(Ensemble { config: *config, records, summary })
}
