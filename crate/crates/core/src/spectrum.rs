//! Resonance location: argument-principle zero counting of the Wronskian
//! over boxes in the lower half-plane, box subdivision with Newton
//! refinement, the pseudo-pole lattice, and zone classification.

use num_complex::Complex64;
use serde::Serialize;

use crate::background::MetricParams;
use crate::error::{Error, Result};
use crate::jost::JostSolver;

/// Minimum admitted |w|/<lambda> on a counting contour; below this the
/// contour grazes a zero and the box must be shrunk or shifted.
pub const BOUNDARY_FLOOR: f64 = 1e-10;

/// Residual bound (free-normalization units |w|/<lambda>) for refined zeros.
pub const REFINE_TOL: f64 = 1e-9;

/// One point of the asymptotic lattice mu = c (l + 1/2 - i (j + 1/2) / 2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LatticePoint {
    pub ell: u32,
    pub j: u32,
    pub mu: Complex64,
}

/// Closed-form lattice points for one angular momentum, j = 0..=j_max;
/// only the +(l + 1/2) branch is emitted (the -branch is its reflection).
pub fn lattice_pseudo_poles(params: &MetricParams, ell: u32, j_max: u32) -> Vec<LatticePoint> {
    let c = params.lattice_constant();
    (0..=j_max)
        .map(|j| LatticePoint {
            ell,
            j,
            mu: c * Complex64::new(ell as f64 + 0.5, -(j as f64 + 0.5) / 2.0),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Source {
    Searched,
    Lattice,
}

/// A located zero of the Wronskian (or a lattice prediction).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Resonance {
    pub lambda: Complex64,
    pub ell: u32,
    /// Zero order of w; 1 for simple zeros.
    pub order: u32,
    pub source: Source,
    /// |w(lambda)| / max(1, |lambda|) after refinement.
    pub residual: f64,
    /// Set when Newton failed to converge: the enclosing box is reported
    /// instead of a refined point (lambda is then the box center).
    pub enclosure: Option<Region>,
}

/// Axis-aligned closed box in the lambda plane.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Region {
            re_min,
            re_max,
            im_min,
            im_max,
        }
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn contains(&self, z: Complex64, slack: f64) -> bool {
        z.re >= self.re_min - slack
            && z.re <= self.re_max + slack
            && z.im >= self.im_min - slack
            && z.im <= self.im_max + slack
    }
}

/// Winding number of `f` along the box boundary by adaptive phase
/// tracking: every accepted step turns the phase by less than pi/2, and
/// segments are bisected until that holds. Exact integer for a contour
/// that stays away from zeros.
pub fn count_zeros_of<F>(f: &mut F, region: Region) -> Result<i64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let corners = [
        Complex64::new(region.re_min, region.im_min),
        Complex64::new(region.re_max, region.im_min),
        Complex64::new(region.re_max, region.im_max),
        Complex64::new(region.re_min, region.im_max),
    ];
    let mut eval = |z: Complex64| -> Result<Complex64> {
        let w = f(z)?;
        if w.norm() < BOUNDARY_FLOOR * z.norm().max(1.0) {
            return Err(Error::BoundaryGraze(w.norm()));
        }
        Ok(w)
    };
    let mut total = 0.0;
    for k in 0..4 {
        let (a, b) = (corners[k], corners[(k + 1) % 4]);
        let wa = eval(a)?;
        let wb = eval(b)?;
        total += phase_walk(&mut eval, a, wa, b, wb, 0)?;
    }
    let winding = total / (2.0 * std::f64::consts::PI);
    let rounded = winding.round();
    if (winding - rounded).abs() > 0.1 {
        return Err(Error::Consistency(format!(
            "phase tracking did not close: winding = {winding}"
        )));
    }
    Ok(rounded as i64)
}

fn phase_walk<F>(
    eval: &mut F,
    a: Complex64,
    wa: Complex64,
    b: Complex64,
    wb: Complex64,
    depth: u32,
) -> Result<f64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let d = (wb / wa).arg();
    // a minimum depth guards against aliasing: a near-2pi swing across a
    // long segment would otherwise masquerade as a small step
    if depth >= 4 && d.abs() < std::f64::consts::FRAC_PI_2 {
        return Ok(d);
    }
    if depth > 40 {
        return Err(Error::NoConvergence(format!(
            "phase tracking stalled on segment {a} -> {b} (zero on the contour?)"
        )));
    }
    let mid = 0.5 * (a + b);
    let wm = eval(mid)?;
    Ok(phase_walk(eval, a, wa, mid, wm, depth + 1)?
        + phase_walk(eval, mid, wm, b, wb, depth + 1)?)
}

/// Argument-principle count of Wronskian zeros of P_ell inside `region`.
pub fn count_zeros(solver: &JostSolver, ell: u32, region: Region) -> Result<i64> {
    count_zeros_of(&mut |z| solver.wronskian(z, ell).map(|v| v.w), region)
}

/// Newton refinement of a zero of an analytic function, with the
/// derivative taken by trapezoid contour quadrature on a circle around
/// the current iterate (noise-robust near the strip edge).
fn newton_refine<F>(f: &mut F, start: Complex64, radius_cap: f64, im_floor: f64) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let n = 24;
    let mut z = start;
    for _ in 0..40 {
        // circle must stay above the strip floor
        let rho = radius_cap.min(0.8 * (z.im - im_floor)).max(1e-5);
        let mut acc = Complex64::default();
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let dz = rho * Complex64::new(th.cos(), th.sin());
            // (1/2 pi i) oint f/(zeta - z)^2 dzeta, dzeta = i dz dth
            acc += f(z + dz)? / dz;
        }
        let deriv = acc / n as f64;
        let w = f(z)?;
        let step = w / deriv;
        z -= step;
        if z.im < im_floor {
            return Err(Error::NoConvergence(format!(
                "Newton iterate left the strip at {z}"
            )));
        }
        if step.norm() < 1e-11 * z.norm().max(1.0) {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence(format!(
        "Newton did not converge from {start}"
    )))
}

/// Recursive subdivision search for all Wronskian zeros in `region`
/// (clipped to the solver's strip), refined by Newton. Grazed boundaries
/// are nudged outward; boxes with several zeros are split along their
/// longer side.
pub fn find_resonances(solver: &JostSolver, ell: u32, region: Region) -> Result<Vec<Resonance>> {
    let im_floor = -solver.strip_limit + 1e-4;
    let mut root = region;
    root.im_min = root.im_min.max(im_floor);
    let mut f = |z: Complex64| solver.wronskian(z, ell).map(|v| v.w);
    let mut stack = vec![root];
    let mut found: Vec<Resonance> = Vec::new();
    while let Some(mut boxr) = stack.pop() {
        // count with graze retries: nudge the offending contour outward
        let mut count = None;
        for attempt in 0..6 {
            match count_zeros_of(&mut f, boxr) {
                Ok(n) => {
                    count = Some(n);
                    break;
                }
                Err(Error::BoundaryGraze(_)) | Err(Error::NoConvergence(_)) => {
                    let pad = 2e-3 * (1.0 + attempt as f64);
                    boxr.re_min -= pad;
                    boxr.re_max += pad;
                    boxr.im_max += pad;
                    boxr.im_min = (boxr.im_min - pad).max(im_floor);
                }
                Err(e) => return Err(e),
            }
        }
        let n = match count {
            Some(n) => n,
            None => {
                return Err(Error::NoConvergence(format!(
                    "persistent contour graze near {}",
                    boxr.center()
                )))
            }
        };
        if n < 0 {
            return Err(Error::Consistency(format!(
                "negative winding {n} around {} (not analytic?)",
                boxr.center()
            )));
        }
        if n == 0 {
            continue;
        }
        if n >= 2 && boxr.width().max(boxr.height()) > 1e-5 {
            // split the longer side, slightly off-center so a zero is
            // unlikely to sit on the cut
            let (mut left, mut right) = (boxr, boxr);
            if boxr.width() >= boxr.height() {
                let cut = boxr.re_min + boxr.width() * 0.513;
                left.re_max = cut;
                right.re_min = cut;
            } else {
                let cut = boxr.im_min + boxr.height() * 0.513;
                left.im_max = cut;
                right.im_min = cut;
            }
            stack.push(left);
            stack.push(right);
            continue;
        }
        // n == 1, or a tiny multi-zero box handed to Newton as-is
        let cap = 0.35 * boxr.width().min(boxr.height()).max(1e-3);
        match newton_refine(&mut f, boxr.center(), cap, im_floor) {
            Ok(z) => {
                let scale = z.norm().max(1.0);
                let residual = f(z)?.norm() / scale;
                if residual > REFINE_TOL {
                    return Err(Error::Consistency(format!(
                        "refined zero at {z} has residual {residual}"
                    )));
                }
                // order from a tight counting square around the zero
                let rho = 5e-4;
                let tight = Region::new(z.re - rho, z.re + rho, z.im - rho, z.im + rho);
                let order = count_zeros_of(&mut f, tight).unwrap_or(n);
                found.push(Resonance {
                    lambda: z,
                    ell,
                    order: order.max(1) as u32,
                    source: Source::Searched,
                    residual,
                    enclosure: None,
                });
            }
            Err(_) => {
                let c = boxr.center();
                found.push(Resonance {
                    lambda: c,
                    ell,
                    order: n as u32,
                    source: Source::Searched,
                    residual: f(c)?.norm() / c.norm().max(1.0),
                    enclosure: Some(boxr),
                });
            }
        }
    }
    // merge duplicates from overlapping nudged boxes
    let mut merged: Vec<Resonance> = Vec::new();
    for r in found {
        if !merged
            .iter()
            .any(|m| (m.lambda - r.lambda).norm() < 1e-6 * r.lambda.norm().max(1.0))
        {
            merged.push(r);
        }
    }
    merged.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re));
    Ok(merged)
}

/// Frequency zones of the resolvent sweep, by |Re lambda| against the
/// scales R, l/R, R*l; intervals are left-closed, right-open.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Zone {
    I,
    II,
    III,
    IV,
}

pub fn zone_classify(lambda: Complex64, ell: u32, big_r: f64) -> Zone {
    let a = lambda.re.abs();
    if lambda.norm() < big_r || a < big_r {
        return Zone::I;
    }
    let l = ell as f64;
    if a < l / big_r {
        Zone::II
    } else if a < big_r * l {
        Zone::III
    } else {
        Zone::IV
    }
}
