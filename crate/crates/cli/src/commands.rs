use spinfreeze::activity::{self, CountingDistribution, LargeDeviationCurve};
use spinfreeze::freezing::{self, AbsM};
use spinfreeze::liouvillian::{self, Branch};
use spinfreeze::phase::{self, ScanOptions, SteadyMethod};
use spinfreeze::trajectory::{self, Ensemble, InitialState, TrajectoryConfig};
use spinfreeze::{c64, Error, Model, ModelParams};

use crate::args::*;
use crate::initial;
use crate::output::{num, opt, Table};
use crate::{expr, CliError};

pub fn run(command: &Command, seed: u64) -> Result<Vec<Table>, CliError> {
    match command {
        Command::Spectrum(a) => spectrum(a),
        Command::Trajectory(a) => trajectory(a, seed),
        Command::Counting(a) => counting(a, seed),
        Command::Sensemble(a) => sensemble(a),
        Command::PhaseDiagram(a) => phase_diagram(a),
        Command::FreezingMap(a) => freezing_map(a),
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

fn abs_m(a: AbsM) -> String {
    format!("{}", a.value())
}

fn spectrum(a: &SpectrumArgs) -> Result<Vec<Table>, CliError> {
    let p = a.model.params()?;
    let tol = a.null_tol.unwrap_or_else(|| liouvillian::default_null_tol(&p));
    if !(tol > 0.0) {
        return usage(format!("--null-tol = {tol} must be positive"));
    }
    let model = Model::new(p)?;
    let l = liouvillian::build_liouvillian(&model);
    let spec = liouvillian::spectrum(&l, tol)?;
    let analytic = liouvillian::analytic_spectrum(&p);
    let report = liouvillian::match_analytic(&spec.eigenvalues, &analytic);

    let mut eig = Table::new("eigenvalues", &["index", "re", "im", "analytic_index", "match_distance"]);
    let mut partner = vec![None; spec.eigenvalues.len()];
    for pair in &report.pairs {
        partner[pair.numeric] = Some((pair.analytic, pair.distance));
    }
    for (i, z) in spec.eigenvalues.iter().enumerate() {
        let (k, d) = match partner[i] {
            Some((k, d)) => (k.to_string(), num(d)),
            None => (String::new(), String::new()),
        };
        eig.push(vec![i.to_string(), num(z.re), num(z.im), k, d]);
    }

    let mut ana = Table::new("analytic", &["index", "q", "k", "sign", "re", "im"]);
    for (i, e) in analytic.entries.iter().enumerate() {
        let sign = match e.branch {
            Branch::Plus => "+",
            Branch::Minus => "-",
        };
        ana.push(vec![i.to_string(), e.q.to_string(), e.k.to_string(), sign.into(), num(e.value.re), num(e.value.im)]);
    }

    let mut summary = Table::new(
        "spectrum_summary",
        &[
            "J", "omega", "gamma", "theta", "symmetry_point", "superop_dim", "nullDim", "null_tol", "adr_re", "adr_im",
            "tau", "gamma_theta", "chi_theta", "max_match_distance",
        ],
    );
    summary.push(vec![
        num(p.j),
        num(p.omega),
        num(p.gamma),
        num(p.theta),
        p.is_symmetry_point().to_string(),
        l.dim().to_string(),
        spec.null_dim.to_string(),
        num(spec.null_tol),
        num(spec.adr.re),
        num(spec.adr.im),
        num(spec.tau),
        num(analytic.gamma_theta),
        num(analytic.chi_theta),
        num(report.max_distance),
    ]);
    Ok(vec![eig, ana, summary])
}

/// Ensemble run shared by `trajectory` and `counting`.
fn ensemble(
    p: &ModelParams,
    init: &InitialState,
    t_final: f64,
    dt: Option<f64>,
    cap: f64,
    samples: usize,
    ntraj: usize,
    seed: u64,
) -> Result<Ensemble, CliError> {
    if ntraj == 0 {
        return usage("--ntraj must be at least 1");
    }
    if !(t_final > 0.0) || !t_final.is_finite() {
        return usage(format!("final time {t_final} must be positive"));
    }
    if samples == 0 {
        return usage("--samples must be at least 1");
    }
    let dt = match dt {
        Some(dt) => dt,
        None => 0.9 * trajectory::max_safe_dt(p, cap)?.min(0.01 / p.gamma),
    };
    let cfg = TrajectoryConfig::new(*p, t_final, dt, seed)?.with_max_jump_prob(cap);
    cfg.validate()?;
    let stride = cfg.n_steps().div_ceil(samples).max(1);
    let cfg = cfg.with_sample_every(stride);
    Ok(trajectory::run_ensemble(&cfg, init, ntraj)?)
}

fn trajectory(a: &TrajectoryArgs, seed: u64) -> Result<Vec<Table>, CliError> {
    let p = a.model.params()?;
    let model = Model::new(p)?;
    let spec = initial::parse(&a.initial).map_err(CliError::Usage)?;
    let (init, pops) = initial::resolve(&spec, &model).map_err(CliError::Usage)?;
    if !(a.threshold > 0.0 && a.threshold < 1.0) {
        return usage(format!("--threshold = {} must lie in (0, 1)", a.threshold));
    }
    let t_final = a.t_final.unwrap_or(50.0 * p.j / p.gamma);
    let ens = ensemble(&p, &init, t_final, a.dt, a.max_jump_prob, a.samples, a.ntraj, seed)?;
    let stats = freezing::selection_statistics(&ens.records, &p, &pops, a.threshold)?;

    let ms = p.m_values();
    let mut header: Vec<String> = ["traj", "time", "sx", "sy", "sz"].iter().map(|s| s.to_string()).collect();
    header.extend(ms.iter().map(|m| format!("p({})", num(*m))));
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut series = Table::new("populations", &header);
    for (i, r) in ens.records.iter().enumerate() {
        for s in &r.snapshots {
            let mut row = vec![i.to_string(), num(s.time), num(s.sx), num(s.sy), num(s.sz)];
            row.extend(s.populations.iter().map(|&x| num(x)));
            series.push(row);
        }
    }

    let mut verdicts = Table::new(
        "verdicts",
        &["traj", "seed", "jumps", "selected_abs_m", "final_population", "freeze_time", "decay_rate", "frozen"],
    );
    for (i, (r, v)) in ens.records.iter().zip(&stats.verdicts).enumerate() {
        verdicts.push(vec![
            i.to_string(),
            r.seed.to_string(),
            r.n().to_string(),
            abs_m(v.selected),
            num(v.final_population),
            opt(v.freeze_time),
            opt(v.decay_rate),
            v.frozen.to_string(),
        ]);
    }

    let mut selection = Table::new("selection", &["abs_m", "initial_population", "count", "fraction", "se"]);
    for f in &stats.fractions {
        selection.push(vec![abs_m(f.space), num(f.initial_population), f.count.to_string(), num(f.fraction), num(f.se)]);
    }

    let mut summary = Table::new(
        "selection_summary",
        &["ntraj", "n_frozen", "threshold", "t_final", "dt", "max_sx_deviation_se", "final_sx_mean", "final_sx_std"],
    );
    summary.push(vec![
        a.ntraj.to_string(),
        stats.n_frozen.to_string(),
        num(a.threshold),
        num(t_final),
        num(ens.config.effective_dt()),
        num(stats.max_sx_deviation_se),
        num(stats.final_sx_mean),
        num(stats.final_sx_std),
    ]);

    let s = &ens.summary;
    let mut mean = Table::new("ensemble", &["time", "sx_mean", "sx_se", "sy_mean", "sy_se", "sz_mean", "sz_se"]);
    for i in 0..s.times.len() {
        mean.push(vec![
            num(s.times[i]),
            num(s.sx.mean[i]),
            num(s.sx.se[i]),
            num(s.sy.mean[i]),
            num(s.sy.se[i]),
            num(s.sz.mean[i]),
            num(s.sz.se[i]),
        ]);
    }

    let mut tables = vec![series, verdicts, selection, summary, mean];
    if a.jumps {
        let mut jumps = Table::new("jumps", &["traj", "time"]);
        for (i, r) in ens.records.iter().enumerate() {
            for &t in &r.jump_times {
                jumps.push(vec![i.to_string(), num(t)]);
            }
        }
        tables.push(jumps);
    }
    Ok(tables)
}

fn peak_rows(table: &mut Table, source: &str, dist: &CountingDistribution, prominence: f64) -> usize {
    let modes = activity::multimodality(dist, prominence);
    for mp in &modes.peaks {
        let (m, c) = match mp.nearest_mode {
            Some((m, c)) => (abs_m(m), num(c)),
            None => (String::new(), String::new()),
        };
        table.push(vec![
            source.into(),
            mp.peak.k.to_string(),
            num(mp.peak.height),
            num(mp.peak.prominence),
            m,
            c,
        ]);
    }
    modes.count
}

fn counting(a: &CountingArgs, seed: u64) -> Result<Vec<Table>, CliError> {
    let p = a.model.params()?;
    let model = Model::new(p)?;
    let spec = initial::parse(&a.initial).map_err(CliError::Usage)?;
    let (init, pops) = initial::resolve(&spec, &model).map_err(CliError::Usage)?;
    let analytic_wanted = matches!(a.mode, CountingMode::Analytic | CountingMode::Both);
    let mc_wanted = matches!(a.mode, CountingMode::Mc | CountingMode::Both);
    if analytic_wanted && !p.is_symmetry_point() {
        return usage(format!("analytic counting needs theta = pi/4 (got {}); use --mode mc", p.theta));
    }
    if !(a.window > 0.0) || !(a.mc_window > 0.0) {
        return usage("counting windows must be positive");
    }
    if !(a.prominence > 0.0) {
        return usage("--prominence must be positive");
    }

    let mut peaks = Table::new("peaks", &["source", "K", "height", "prominence", "nearest_abs_m", "mode_center"]);
    let mut summary =
        Table::new("counting_summary", &["source", "window", "mean", "mass", "n_peaks", "tv_vs_analytic"]);
    let mut tables = Vec::new();

    if analytic_wanted {
        let dist = activity::counting_distribution_analytic(&pops, a.window, &p)?;
        let mut t = Table::new("counting_analytic", &["K", "probability"]);
        for (k, &q) in dist.probs.iter().enumerate() {
            t.push(vec![k.to_string(), num(q)]);
        }
        let n_peaks = peak_rows(&mut peaks, "analytic", &dist, a.prominence);
        summary.push(vec!["analytic".into(), num(a.window), num(dist.mean()), num(dist.mass()), n_peaks.to_string(), String::new()]);
        tables.push(t);
    }
    if mc_wanted {
        let ens = ensemble(&p, &init, a.mc_window, a.dt, a.max_jump_prob, 1, a.ntraj, seed)?;
        let hist = activity::counting_distribution_mc(&ens.records, a.mc_window)?;
        let reference = if p.is_symmetry_point() {
            Some(activity::counting_distribution_analytic(&pops, a.mc_window, &p)?)
        } else {
            None
        };
        let mut t = Table::new("counting_mc", &["K", "probability", "se", "analytic"]);
        let len = hist.probs.len().max(reference.as_ref().map_or(0, |r| r.probs.len()));
        for k in 0..len {
            let se = hist.se.as_ref().and_then(|s| s.get(k).copied());
            let exact = reference.as_ref().map(|r| r.probs.get(k).copied().unwrap_or(0.0));
            t.push(vec![k.to_string(), num(hist.probs.get(k).copied().unwrap_or(0.0)), opt(se), opt(exact)]);
        }
        let tv = reference.as_ref().map(|r| activity::total_variation(&hist.probs, &r.probs));
        let n_peaks = peak_rows(&mut peaks, "mc", &hist, a.prominence);
        summary.push(vec!["mc".into(), num(a.mc_window), num(hist.mean()), num(hist.mass()), n_peaks.to_string(), opt(tv)]);
        tables.push(t);
    }
    tables.push(peaks);
    tables.push(summary);
    Ok(tables)
}

fn sensemble(a: &SensembleArgs) -> Result<Vec<Table>, CliError> {
    let thetas = expr::grid(&a.theta_grid).map_err(CliError::Usage)?;
    let params = thetas
        .iter()
        .map(|&t| Ok(ModelParams::new(a.size.j(), a.omega, a.size.gamma, t)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    if !(a.smin <= 0.0 && a.smax >= 0.0) {
        return usage(format!("s grid [{}, {}] must contain 0", a.smin, a.smax));
    }
    let grid = activity::uniform_grid(a.smin, a.smax, a.ds)?;
    if !grid.contains(&0.0) {
        return usage(format!("s grid {}:{}:{} misses s = 0", a.smin, a.smax, a.ds));
    }
    if a.k_points < 2 {
        return usage("--k-points must be at least 2");
    }

    let mut rows = Table::new(
        "scgf",
        &["theta", "s", "lambda", "subleading", "activity", "near_degenerate", "activity_left_0", "activity_right_0", "error"],
    );
    let mut summary = Table::new(
        "scgf_summary",
        &["theta", "lambda_at_zero", "min_convexity_margin", "activity_left_0", "activity_right_0", "activity_jump", "error"],
    );
    let mut rate = Table::new("rate_function", &["theta", "k", "phi", "maximizer", "extrapolated"]);

    for p in &params {
        match activity::scgf(p, &grid) {
            Ok(curve) => {
                curve_rows(&mut rows, &mut summary, p.theta, &curve);
                let top = curve.activity.iter().flatten().copied().fold(0.0, f64::max).max(p.gamma * p.j);
                let step = top / (a.k_points - 1) as f64;
                let ks: Vec<f64> = (0..a.k_points).map(|i| i as f64 * step).collect();
                let rf = activity::legendre(&curve, &ks);
                for i in 0..ks.len() {
                    rate.push(vec![num(p.theta), num(ks[i]), num(rf.phi[i]), num(rf.maximizer[i]), rf.extrapolated[i].to_string()]);
                }
            }
            Err(e) => {
                // Fall back to point-wise evaluation so failures land in the row they belong to.
                let model = Model::new(*p)?;
                for &s in &grid {
                    match activity::scgf_point(&model, s) {
                        Ok(pt) => rows.push(vec![
                            num(p.theta), num(s), num(pt.lambda), num(pt.subleading), String::new(),
                            pt.near_degenerate.to_string(), String::new(), String::new(), String::new(),
                        ]),
                        Err(err) => rows.push(vec![
                            num(p.theta), num(s), String::new(), String::new(), String::new(), String::new(),
                            String::new(), String::new(), err.to_string(),
                        ]),
                    }
                }
                summary.push(vec![num(p.theta), String::new(), String::new(), String::new(), String::new(), String::new(), e.to_string()]);
            }
        }
    }
    Ok(vec![rows, summary, rate])
}

fn curve_rows(rows: &mut Table, summary: &mut Table, theta: f64, curve: &LargeDeviationCurve) {
    let sides = curve.activity_at_zero;
    for (i, pt) in curve.points.iter().enumerate() {
        let (left, right) = match sides {
            Some(o) if i == curve.zero_index => (num(o.left), num(o.right)),
            _ => (String::new(), String::new()),
        };
        rows.push(vec![
            num(theta),
            num(pt.s),
            num(pt.lambda),
            num(pt.subleading),
            opt(curve.activity[i]),
            pt.near_degenerate.to_string(),
            left,
            right,
            String::new(),
        ]);
    }
    summary.push(vec![
        num(theta),
        num(curve.lambda_at_zero()),
        num(curve.min_convexity_margin()),
        opt(sides.map(|o| o.left)),
        opt(sides.map(|o| o.right)),
        opt(sides.map(|o| o.right - o.left)),
        String::new(),
    ]);
}

fn phase_diagram(a: &PhaseDiagramArgs) -> Result<Vec<Table>, CliError> {
    let omegas = expr::grid(&a.omega_grid).map_err(CliError::Usage)?;
    let thetas = expr::grid(&a.theta_grid).map_err(CliError::Usage)?;
    // Validates size and gamma; drive and angle vary per point.
    let template = ModelParams::new(a.size.j(), 0.0, a.size.gamma, 0.0)?;
    if !(a.degeneracy_gap > 0.0) {
        return usage("--degeneracy-gap must be positive");
    }
    let initial = match &a.initial {
        Some(s) => {
            let spec = initial::parse(s).map_err(CliError::Usage)?;
            let (state, _) = initial::resolve(&spec, &Model::new(template)?).map_err(CliError::Usage)?;
            Some(state.density_matrix())
        }
        None => None,
    };
    let opts = ScanOptions { initial, degeneracy_gap: a.degeneracy_gap };
    let points = phase::scan(&omegas, &thetas, &template, &opts)?;

    let mut t = Table::new(
        "phase_diagram",
        &[
            "omega", "theta", "M", "xi2", "xi2_undefined", "purity", "mean_spin_norm", "method", "degenerate_line",
            "near_degenerate", "gap", "residual", "error",
        ],
    );
    for pt in &points {
        match &pt.result {
            Ok(o) => {
                let method = match o.method {
                    SteadyMethod::Unique => "unique",
                    SteadyMethod::Evolved => "evolved",
                    SteadyMethod::Asymptotic => "asymptotic",
                };
                t.push(vec![
                    num(pt.omega),
                    num(pt.theta),
                    num(o.magnetization),
                    opt(o.squeezing),
                    o.squeezing.is_none().to_string(),
                    num(o.purity),
                    num(o.mean_spin_norm),
                    method.into(),
                    o.degenerate_line.to_string(),
                    o.near_degenerate.to_string(),
                    opt(o.gap_estimate),
                    num(o.residual),
                    String::new(),
                ]);
            }
            Err(e) => {
                let mut row = vec![num(pt.omega), num(pt.theta)];
                row.extend(std::iter::repeat_n(String::new(), 10));
                row.push(e.clone());
                t.push(row);
            }
        }
    }

    // The line mirrors under theta -> pi/2 - theta; the sign marks the side.
    let mut line = Table::new("critical_line", &["theta", "omega_c", "omega_c_signed"]);
    for &theta in &thetas {
        let w = phase::critical_line(theta, a.size.gamma);
        line.push(vec![num(theta), num(w.abs()), num(w)]);
    }
    Ok(vec![t, line])
}

fn freezing_map(a: &FreezingMapArgs) -> Result<Vec<Table>, CliError> {
    let p = a.model.params()?;
    let model = Model::new(p)?;
    let spec = initial::parse(&a.initial).map_err(CliError::Usage)?;
    let (_, pops) = initial::resolve(&spec, &model).map_err(CliError::Usage)?;
    // Only |c_m|^2 enters the conditional distribution.
    let c0: Vec<c64> = pops.iter().map(|&q| c64::new(q.sqrt(), 0.0)).collect();
    let t = a.t.unwrap_or(100.0 * p.j / p.gamma);
    let ns = expr::grid(&a.n_grid).map_err(CliError::Usage)?;
    if ns.iter().any(|&n| n < 0.0 || n.fract() != 0.0) {
        return usage(format!("--n-grid '{}' must list non-negative integers", a.n_grid));
    }

    let mut map = Table::new("freezing_map", &["n", "abs_m", "probability"]);
    let mut bands = Table::new("freezing_bands", &["n", "alpha", "m_tilde", "dominant", "occupied", "note"]);
    for &n in &ns {
        let count = n as u64;
        let dist = match freezing::freezing_probability(&c0, t, count, &p) {
            Ok(d) => d,
            // Count unreachable from this initial state, e.g. n > 0 with only m = 0 populated.
            Err(Error::ZeroWeight(msg)) => {
                bands.push(vec![count.to_string(), String::new(), String::new(), String::new(), String::new(), msg]);
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        for (m, q) in dist.eigenspace_probs() {
            map.push(vec![count.to_string(), abs_m(m), num(q)]);
        }
        // Eigenspaces above 1e-6, space separated.
        let occupied: Vec<String> = dist.occupied(1e-6).into_iter().map(abs_m).collect();
        bands.push(vec![count.to_string(), num(dist.alpha), abs_m(dist.m_tilde), abs_m(dist.dominant()), occupied.join(" "), String::new()]);
    }
    Ok(vec![map, bands])
}
