//! Adaptive Dormand-Prince 5(4) integration for small complex systems.
//!
//! Used by the Jost solver, which integrates the reduced equation inward
//! from the truncation abscissa. Steps are clamped so that requested
//! output points are hit exactly; no dense output needed.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State = Vec<Complex64>;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// embedded 4th-order weights
const E1: f64 = 5179.0 / 57600.0;
const E3: f64 = 7571.0 / 16695.0;
const E4: f64 = 393.0 / 640.0;
const E5: f64 = -92097.0 / 339200.0;
const E6: f64 = 187.0 / 2100.0;
const E7: f64 = 1.0 / 40.0;

/// Integrates y' = f(x, y) from `x0` to `x1` (either direction), calling
/// `observe(x, y)` at every accepted step endpoint and at every point of
/// `checkpoints` (which must be ordered in the direction of integration).
pub fn integrate<F, O>(
    f: F,
    x0: f64,
    x1: f64,
    y0: State,
    rel_tol: f64,
    abs_tol: f64,
    checkpoints: &[f64],
    mut observe: O,
) -> Result<State>
where
    F: Fn(f64, &State) -> State,
    O: FnMut(f64, &State),
{
    let dir = if x1 >= x0 { 1.0 } else { -1.0 };
    let mut x = x0;
    let mut y = y0;
    let mut h = dir * 0.1 * (x1 - x0).abs().min(1.0).max(1e-6);
    let mut k1 = f(x, &y);
    let mut next_cp = 0usize;
    while next_cp < checkpoints.len() && dir * (checkpoints[next_cp] - x) <= 0.0 {
        observe(checkpoints[next_cp], &y);
        next_cp += 1;
    }
    let mut steps = 0usize;
    while dir * (x1 - x) > 1e-14 * (1.0 + x.abs()) {
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::NoConvergence(format!(
                "ode step limit exceeded at x = {x}"
            )));
        }
        // clamp to the next checkpoint or the endpoint
        let mut target = x1;
        if next_cp < checkpoints.len() && dir * (checkpoints[next_cp] - target) < 0.0 {
            target = checkpoints[next_cp];
        }
        if dir * (x + h - target) > 0.0 {
            h = target - x;
        }
        if h.abs() < 1e-15 * (1.0 + x.abs()) {
            return Err(Error::NoConvergence(format!(
                "ode step-size underflow at x = {x}"
            )));
        }
        let n = y.len();
        let stage = |coef: &[(f64, &State)]| -> State {
            (0..n)
                .map(|i| y[i] + h * coef.iter().map(|(c, k)| c * k[i]).sum::<Complex64>())
                .collect()
        };
        let k2 = f(x + A21 * h, &stage(&[(A21, &k1)]));
        let k3 = f(x + 0.3 * h, &stage(&[(A31, &k1), (A32, &k2)]));
        let k4 = f(x + 0.8 * h, &stage(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            x + 8.0 / 9.0 * h,
            &stage(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            x + h,
            &stage(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y5: State = (0..n)
            .map(|i| y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]))
            .collect();
        let k7 = f(x + h, &y5);
        let mut err: f64 = 0.0;
        for i in 0..n {
            let y4 = y[i]
                + h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i]
                    + E7 * k7[i]);
            let scale = abs_tol + rel_tol * y5[i].norm().max(y[i].norm());
            err = err.max((y5[i] - y4).norm() / scale);
        }
        if err <= 1.0 {
            x += h;
            y = y5;
            k1 = k7; // FSAL
            while next_cp < checkpoints.len()
                && dir * (checkpoints[next_cp] - x) <= 1e-14 * (1.0 + x.abs())
            {
                observe(checkpoints[next_cp], &y);
                next_cp += 1;
            }
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
    }
    while next_cp < checkpoints.len() {
        observe(checkpoints[next_cp], &y);
        next_cp += 1;
    }
    Ok(y)
}
