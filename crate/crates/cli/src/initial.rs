//! Initial-state mini-language.
//!
//! - `sx:m1,m2,...` equal-amplitude superposition of `S_x` eigenstates
//! - `sx:m1*w1,m2*w2` amplitude weights, normalized
//! - `sz:m` an `S_z` eigenstate, with `J` and `-J` accepted for the extremes
//! - `uniform-diag` equal-population mixture of all `S_x` eigenstates

use spinfreeze::trajectory::InitialState;
use spinfreeze::{c64, Model};

use crate::expr;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Sx(Vec<(f64, f64)>),
    Sz(SzLabel),
    UniformDiag,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SzLabel {
    Top,
    Bottom,
    M(f64),
}

pub fn parse(spec: &str) -> Result<InitialSpec, String> {
    let spec = spec.trim();
    if spec == "uniform-diag" {
        return Ok(InitialSpec::UniformDiag);
    }
    if let Some(body) = spec.strip_prefix("sx:") {
        let mut terms = Vec::new();
        for item in body.split(',') {
            let (m, w) = match item.split_once('*') {
                Some((m, w)) => (expr::eval(m)?, expr::eval(w)?),
                None => (expr::eval(item)?, 1.0),
            };
            if terms.iter().any(|&(prev, _)| prev == m) {
                return Err(format!("m = {m} listed twice in '{spec}'"));
            }
            terms.push((m, w));
        }
        if terms.iter().all(|&(_, w)| w == 0.0) {
            return Err(format!("all weights vanish in '{spec}'"));
        }
        return Ok(InitialSpec::Sx(terms));
    }
    if let Some(body) = spec.strip_prefix("sz:") {
        let label = match body.trim() {
            "J" | "+J" => SzLabel::Top,
            "-J" => SzLabel::Bottom,
            other => SzLabel::M(expr::eval(other)?),
        };
        return Ok(InitialSpec::Sz(label));
    }
    Err(format!("unknown initial state '{spec}'; expected sx:..., sz:... or uniform-diag"))
}

fn index_of(m: f64, j: f64, what: &str) -> Result<usize, String> {
    let k = m + j;
    if (k - k.round()).abs() > 1e-9 || k.round() < 0.0 || k.round() > 2.0 * j {
        return Err(format!("{what} m = {m} is not in {{-J, ..., J}} for J = {j}"));
    }
    Ok(k.round() as usize)
}

/// Initial state and its `S_x` populations (ascending `m`).
pub fn resolve(spec: &InitialSpec, model: &Model) -> Result<(InitialState, Vec<f64>), String> {
    let ops = &model.ops;
    let j = model.params.j;
    let d = model.params.dim();
    match spec {
        InitialSpec::Sx(terms) => {
            let mut amps = vec![c64::new(0.0, 0.0); d];
            for &(m, w) in terms {
                amps[index_of(m, j, "S_x")?] = c64::new(w, 0.0);
            }
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            amps.iter_mut().for_each(|a| *a /= norm);
            let pops = amps.iter().map(|a| a.norm_sqr()).collect();
            Ok((InitialState::Pure(ops.from_sx_amplitudes(&amps)), pops))
        }
        InitialSpec::Sz(label) => {
            // S_z basis index i holds m = J - i.
            let idx = match *label {
                SzLabel::Top => 0,
                SzLabel::Bottom => d - 1,
                SzLabel::M(m) => d - 1 - index_of(m, j, "S_z")?,
            };
            let mut psi = vec![c64::new(0.0, 0.0); d];
            psi[idx] = c64::new(1.0, 0.0);
            let pops = ops.sx_populations(&psi);
            Ok((InitialState::Pure(psi), pops))
        }
        InitialSpec::UniformDiag => {
            let w = 1.0 / d as f64;
            let parts = (0..d).map(|k| (w, ops.sx_state(k))).collect();
            Ok((InitialState::Mixture(parts), vec![w; d]))
        }
    }
}
