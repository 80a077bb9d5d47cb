//! Truncated resonance expansion of the cut-off propagator and the
//! residual against the time-domain solution.

use num_complex::Complex64;

use crate::background::CoordinateMap;
use crate::error::{Error, Result};
use crate::evolve::{log_slope, Trajectory};
use crate::jost::JostSolver;
use crate::resolvent::{projector_on_grid, trapezoid_weights, CutoffFunction, ProjectorBlocks};

/// One order-1 expansion term e^{-i lambda t} pi^chi.
#[derive(Debug, Clone)]
pub struct ExpansionTerm {
    pub lambda: Complex64,
    pub ell: u32,
    pub blocks: ProjectorBlocks,
}

/// Build the term for one resonance on the given grid. For a resonance
/// with Re lambda > 0 the synthesizer also adds the mirror partner at
/// -conj(lambda) (whose kernels are the conjugates), so only the
/// nonnegative-Re member should be constructed.
pub fn expansion_term(
    solver: &JostSolver,
    lambda: Complex64,
    ell: u32,
    chi: &CutoffFunction,
    grid: &[f64],
    radius: f64,
) -> Result<ExpansionTerm> {
    if lambda.re < -1e-12 {
        return Err(Error::Consistency(
            "construct terms for Re lambda >= 0; the mirror pair is implicit".into(),
        ));
    }
    let blocks = projector_on_grid(solver, lambda, ell, chi, grid, radius)?;
    Ok(ExpansionTerm {
        lambda,
        ell,
        blocks,
    })
}

fn apply_blocks(
    term: &ExpansionTerm,
    wts: &[f64],
    u0: &[Complex64],
    u1: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = term.blocks.grid.len();
    let b = &term.blocks;
    let mut v0 = vec![Complex64::default(); n];
    let mut v1 = vec![Complex64::default(); n];
    for i in 0..n {
        let (mut s0, mut s1) = (Complex64::default(), Complex64::default());
        for j in 0..n {
            let f0 = u0[j] * wts[j];
            let f1 = u1[j] * wts[j];
            s0 += b.b11[(i, j)] * f0 + b.b12[(i, j)] * f1;
            s1 += b.b21[(i, j)] * f0 + b.b22[(i, j)] * f1;
        }
        v0[i] = s0;
        v1[i] = s1;
    }
    (v0, v1)
}

/// Sum_j e^{-i lambda_j t} pi_j (u0, u1), with the mirror partner at
/// -conj(lambda_j) added for every term with Re lambda_j > 0 so that real
/// data stays real. Input is the initial data (supported where chi = 1);
/// output is the real two-component field on the terms' grid.
pub fn expansion_eval(
    terms: &[ExpansionTerm],
    u0: &[f64],
    u1: &[f64],
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = &terms
        .first()
        .ok_or_else(|| Error::Consistency("no expansion terms".into()))?
        .blocks
        .grid;
    let n = grid.len();
    let wts = trapezoid_weights(grid);
    let u0c: Vec<Complex64> = u0.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let u1c: Vec<Complex64> = u1.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut acc0 = vec![Complex64::default(); n];
    let mut acc1 = vec![Complex64::default(); n];
    for term in terms {
        assert_eq!(term.blocks.grid.len(), n, "terms must share a grid");
        let z = (-Complex64::i() * term.lambda * t).exp();
        let (v0, v1) = apply_blocks(term, &wts, &u0c, &u1c);
        let paired = term.lambda.re > 1e-12;
        for i in 0..n {
            let (c0, c1) = (z * v0[i], z * v1[i]);
            if paired {
                // the -conj(lambda) partner contributes the conjugate
                acc0[i] += c0 + c0.conj();
                acc1[i] += c1 + c1.conj();
            } else {
                acc0[i] += c0;
                acc1[i] += c1;
            }
        }
    }
    let real_norm: f64 = acc0.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
    let imag_norm: f64 = acc0.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    if imag_norm > 1e-10 * real_norm.max(1e-300) {
        return Err(Error::Consistency(format!(
            "synthesized field is not real: |Im| = {imag_norm:.3e} vs |Re| = {real_norm:.3e}"
        )));
    }
    Ok((
        acc0.iter().map(|z| z.re).collect(),
        acc1.iter().map(|z| z.re).collect(),
    ))
}

/// Discretized modified-energy norm of a complex two-component field on a
/// uniform grid: ||d1||^2 + int |d0'|^2 + (l(l+1)V + W)|d0|^2 + int_0^1 |d0|^2,
/// all trapezoid. The quadratic form of P is used in its integrated-by-
/// parts shape, valid because the fields here vanish at the sub-grid ends.
pub fn emod_norm(
    map: &CoordinateMap,
    ell: u32,
    grid: &[f64],
    d0: &[f64],
    d1: &[f64],
) -> Result<f64> {
    let n = grid.len();
    let h = grid[1] - grid[0];
    let ll1 = (ell * (ell + 1)) as f64;
    let wts = trapezoid_weights(grid);
    let mut total = 0.0;
    for i in 0..n {
        let dp = if i == 0 {
            (d0[1] - d0[0]) / h
        } else if i == n - 1 {
            (d0[n - 1] - d0[n - 2]) / h
        } else {
            (d0[i + 1] - d0[i - 1]) / (2.0 * h)
        };
        let (v, w) = map.potentials(grid[i])?;
        let mut s = d1[i] * d1[i] + dp * dp + (ll1 * v + w) * d0[i] * d0[i];
        if (0.0..=1.0).contains(&grid[i]) {
            s += d0[i] * d0[i];
        }
        total += wts[i] * s;
    }
    Ok(total.max(0.0).sqrt())
}

#[derive(Debug, Clone)]
pub struct ResidualReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    /// Fitted slope of ln(norm) over the fit window.
    pub slope: f64,
    pub r_squared: f64,
    pub mu_target: f64,
    /// Set when the residual stops decreasing inside the window, so the
    /// slope is not trustworthy (discretization floor reached).
    pub floor_limited: bool,
}

/// ||chi u(t) - expansion(t)||_{E^mod} over the stored snapshots, with an
/// exponential-rate fit on the window starting at the light-travel time
/// X + a. Empty `terms` measures ||chi u(t)|| itself.
pub fn residual_decay(
    map: &CoordinateMap,
    trajectory: &Trajectory,
    terms: &[ExpansionTerm],
    chi: &CutoffFunction,
    mu_target: f64,
) -> Result<ResidualReport> {
    let full = &trajectory.states[0].grid;
    let ell = trajectory.states[0].ell;
    let idx: Vec<usize> = (0..full.len())
        .filter(|&i| full[i].abs() <= chi.a + 1e-9)
        .collect();
    let sub: Vec<f64> = idx.iter().map(|&i| full[i]).collect();
    if let Some(t) = terms.first() {
        if t.blocks.grid.len() != sub.len() {
            return Err(Error::Consistency(
                "expansion terms do not live on the cutoff sub-grid of the trajectory".into(),
            ));
        }
    }
    let chi_s = chi.sample(&sub);
    let x_max = full.last().unwrap();
    let t_fit = x_max + chi.a;
    let init = &trajectory.states[0];
    let u0: Vec<f64> = idx.iter().map(|&i| init.u[i]).collect();
    let u1: Vec<f64> = idx.iter().map(|&i| init.ut[i]).collect();
    let mut times = Vec::new();
    let mut norms = Vec::new();
    for state in &trajectory.states {
        if state.time == 0.0 {
            continue;
        }
        let (e0, e1) = if terms.is_empty() {
            (vec![0.0; sub.len()], vec![0.0; sub.len()])
        } else {
            expansion_eval(terms, &u0, &u1, state.time)?
        };
        let d0: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| chi_s[k] * state.u[i] - e0[k])
            .collect();
        let d1: Vec<f64> = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| chi_s[k] * state.ut[i] - e1[k])
            .collect();
        times.push(state.time);
        norms.push(emod_norm(map, ell, &sub, &d0, &d1)?);
    }
    let fit: Vec<(f64, f64)> = times
        .iter()
        .zip(&norms)
        .filter(|(&t, _)| t >= t_fit)
        .map(|(&t, &v)| (t, v))
        .collect();
    if fit.len() < 4 {
        return Err(Error::Config(format!(
            "fit window [{t_fit}, ..] holds only {} snapshots",
            fit.len()
        )));
    }
    let (slope, _, r_squared) = log_slope(
        &fit.iter().map(|p| p.0).collect::<Vec<_>>(),
        &fit.iter().map(|p| p.1).collect::<Vec<_>>(),
    );
    // floor detection: the minimum is reached well before the window ends
    // and the tail bounces around above it
    let (min_i, min_v) = fit
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, p)| (i, p.1))
        .unwrap();
    let floor_limited = min_i + 2 < fit.len() && fit.last().unwrap().1 > 2.0 * min_v;
    Ok(ResidualReport {
        times,
        norms,
        slope,
        r_squared,
        mu_target,
        floor_limited,
    })
}
