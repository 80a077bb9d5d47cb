//! Background geometry of the De Sitter-Schwarzschild exterior.
//!
//! Everything here is an exact function of the two metric parameters
//! (mass `M`, cosmological constant `Lambda`): the horizon radii, the
//! surface-gravity decay rates, the Regge-Wheeler coordinate `x(r)` with
//! its inverse, and the effective potentials `V`, `W` of the radial
//! operator `-d^2/dx^2 + l(l+1) V(x) + W(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series;

/// Metric parameters together with derived horizon data.
///
/// `x = 0` is anchored at the photon sphere `r = 3M`, so the potential
/// maximum sits at the origin of the Regge-Wheeler axis.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MetricParams {
    pub mass: f64,
    pub lambda: f64,
    /// Inner (black hole) horizon radius, smaller positive root of alpha^2.
    pub r_minus: f64,
    /// Outer (cosmological) horizon radius.
    pub r_plus: f64,
    /// Third, negative root of the horizon cubic: -(r_minus + r_plus).
    pub r_neg: f64,
    /// |d(alpha^2)/dr| at r_minus; decay rate of V as x -> -infinity.
    pub kappa_minus: f64,
    /// |d(alpha^2)/dr| at r_plus; decay rate of V as x -> +infinity.
    pub kappa_plus: f64,
}

impl MetricParams {
    /// Validates the admissibility window and solves the horizon cubic.
    pub fn new(mass: f64, lambda: f64) -> Result<Self> {
        let nine_m2_lambda = 9.0 * mass * mass * lambda;
        if !(mass > 0.0) || !(0.0 < nine_m2_lambda && nine_m2_lambda < 1.0) {
            return Err(Error::Inadmissible(nine_m2_lambda));
        }
        let (r_minus, r_plus, r_neg) = horizon_roots(mass, lambda);
        let kappa_minus = d_alpha2_dr(r_minus, mass, lambda).abs();
        let kappa_plus = d_alpha2_dr(r_plus, mass, lambda).abs();
        Ok(MetricParams {
            mass,
            lambda,
            r_minus,
            r_plus,
            r_neg,
            kappa_minus,
            kappa_plus,
        })
    }

    /// alpha^2(r) = 1 - 2M/r - Lambda r^2 / 3.
    pub fn alpha2(&self, r: f64) -> f64 {
        alpha2(r, self.mass, self.lambda)
    }

    /// d(alpha^2)/dr.
    pub fn d_alpha2_dr(&self, r: f64) -> f64 {
        d_alpha2_dr(r, self.mass, self.lambda)
    }

    /// Maximum of V, attained at r = 3M: (1 - 9 Lambda M^2) / (27 M^2).
    pub fn z0(&self) -> f64 {
        (1.0 - 9.0 * self.lambda * self.mass * self.mass) / (27.0 * self.mass * self.mass)
    }

    /// Lattice constant c = sqrt(z0) = (1 - 9 Lambda M^2)^{1/2} / (3^{3/2} M).
    pub fn lattice_constant(&self) -> f64 {
        (1.0 - 9.0 * self.lambda * self.mass * self.mass).sqrt()
            / (3.0f64.powf(1.5) * self.mass)
    }
}

fn alpha2(r: f64, mass: f64, lambda: f64) -> f64 {
    1.0 - 2.0 * mass / r - lambda * r * r / 3.0
}

fn d_alpha2_dr(r: f64, mass: f64, lambda: f64) -> f64 {
    2.0 * mass / (r * r) - 2.0 * lambda * r / 3.0
}

/// The three real roots of r^3 - (3/Lambda) r + 6M/Lambda = 0
/// (equivalently r * alpha^2(r) = 0 cleared of denominators), returned as
/// (r_minus, r_plus, r_neg) and polished by Newton on alpha^2.
fn horizon_roots(mass: f64, lambda: f64) -> (f64, f64, f64) {
    // Trigonometric solution of the depressed cubic; three real roots are
    // guaranteed inside the admissibility window.
    let s = lambda.sqrt();
    let theta = (-3.0 * mass * s).acos();
    let amp = 2.0 / s;
    let root = |k: f64| amp * (theta / 3.0 - 2.0 * std::f64::consts::PI * k / 3.0).cos();
    let mut r_plus = root(0.0);
    let mut r_minus = root(1.0);
    let mut r_neg = root(2.0);
    // Newton polish on r |-> alpha^2(r); the derivative is nonzero at simple roots.
    for r in [&mut r_plus, &mut r_minus, &mut r_neg] {
        for _ in 0..4 {
            let f = alpha2(*r, mass, lambda);
            let fp = d_alpha2_dr(*r, mass, lambda);
            *r -= f / fp;
        }
    }
    (r_minus, r_plus, r_neg)
}

/// Power series of the potential and the horizon distance in the
/// exponential variable xi of one horizon tail.
#[derive(Debug, Clone)]
pub struct HorizonExpansion {
    /// Decay rate: xi = e^{-kappa x} (plus side) or e^{kappa x} (minus side).
    pub kappa: f64,
    /// l(l+1) V + W = sum_{k>=1} u[k] xi^k.
    pub u: Vec<f64>,
    /// |r - r_pm| = sum_{k>=1} delta[k] xi^k.
    pub delta: Vec<f64>,
}

impl HorizonExpansion {
    /// The exponential variable at abscissa x (x > 0 on the plus side,
    /// x < 0 on the minus side).
    pub fn xi(&self, x: f64) -> f64 {
        (-self.kappa * x.abs()).exp()
    }
}

/// Invertible monotone map r <-> x with x(3M) = 0.
///
/// Closed form by partial fractions over the three roots of the horizon
/// cubic: 1/alpha^2 = sum_i a_i / (r - r_i) with a_i = 1 / (d alpha^2/dr)(r_i).
#[derive(Debug, Clone)]
pub struct CoordinateMap {
    pub params: MetricParams,
    /// Relative tolerance for the r(x) inversion.
    pub tolerance: f64,
    roots: [f64; 3],
    coeffs: [f64; 3],
    /// Affine tail constants: x ~ a_pm ln(delta) + c_pm with
    /// delta = |r - r_pm| near each horizon.
    c_plus: f64,
    c_minus: f64,
}

impl CoordinateMap {
    pub fn new(params: MetricParams) -> Self {
        let roots = [params.r_minus, params.r_plus, params.r_neg];
        let mut coeffs = [0.0; 3];
        for (c, &r) in coeffs.iter_mut().zip(roots.iter()) {
            *c = 1.0 / params.d_alpha2_dr(r);
        }
        let anchor = 3.0 * params.mass;
        let tail_const = |s: usize| {
            let mut c = -coeffs[s] * (anchor - roots[s]).abs().ln();
            for i in 0..3 {
                if i != s {
                    c += coeffs[i] * ((roots[s] - roots[i]).abs() / (anchor - roots[i]).abs()).ln();
                }
            }
            c
        };
        let c_minus = tail_const(0);
        let c_plus = tail_const(1);
        CoordinateMap {
            params,
            tolerance: 1e-13,
            roots,
            coeffs,
            c_plus,
            c_minus,
        }
    }

    /// x as a function of the horizon distance delta = |r - r_pm|,
    /// evaluated without forming r - r_pm by subtraction (stable for
    /// delta far below the f64 granularity of r itself).
    fn x_of_tail(&self, plus_side: bool, delta: f64) -> f64 {
        let anchor = 3.0 * self.params.mass;
        let (s, r) = if plus_side {
            (1usize, self.roots[1] - delta)
        } else {
            (0usize, self.roots[0] + delta)
        };
        let mut x = self.coeffs[s] * (delta / (anchor - self.roots[s]).abs()).ln();
        for i in 0..3 {
            if i != s {
                x += self.coeffs[i] * ((r - self.roots[i]).abs() / (anchor - self.roots[i]).abs()).ln();
            }
        }
        x
    }

    /// Exact exponential expansion of the geometry in the horizon tail.
    ///
    /// With xi = e^{-kappa_+ x} (plus side) or xi = e^{kappa_- x} (minus
    /// side), the closed-form x(r) gives xi = delta * B(delta) with
    /// delta = |r - r_pm| and B analytic at 0; series reversion then yields
    /// delta(xi) and hence the potential l(l+1)V + W as a convergent power
    /// series in xi with no constant term.
    pub fn horizon_expansion(&self, plus_side: bool, ell: u32, n: usize) -> HorizonExpansion {
        let p = &self.params;
        let anchor = 3.0 * p.mass;
        let (s, sign, kappa) = if plus_side {
            (1usize, -1.0, p.kappa_plus)
        } else {
            (0usize, 1.0, p.kappa_minus)
        };
        let r0 = self.roots[s];
        let sigma = if plus_side { -kappa } else { kappa };
        // analytic part of x(delta): sum over the other two roots
        let mut a = vec![0.0; n];
        for i in 0..3 {
            if i != s {
                let term = series::log_affine(r0 - self.roots[i], sign, anchor - self.roots[i], n);
                a = series::add(&a, &series::scale(&term, self.coeffs[i]));
            }
        }
        // xi(delta) = delta * c_scale * exp(sigma * (A - A(0)))
        let c_scale = (sigma * (a[0] - self.coeffs[s] * (anchor - r0).abs().ln())).exp();
        a[0] = 0.0;
        let growth = series::exp(&series::scale(&a, sigma));
        let mut xi_of_delta = vec![0.0; n];
        for k in 1..n {
            xi_of_delta[k] = c_scale * growth[k - 1];
        }
        let delta = series::revert(&xi_of_delta);
        // U(delta) = l(l+1) V + W with r = r0 + sign*delta
        let ll1 = (ell as f64) * (ell as f64 + 1.0);
        let inv_r = series::inv_linear(r0, sign, n);
        let inv_r2 = series::mul(&inv_r, &inv_r);
        let inv_r3 = series::mul(&inv_r2, &inv_r);
        let mut rser = vec![0.0; n];
        rser[0] = r0;
        rser[1] = sign;
        let mut v = series::add(&inv_r2, &series::scale(&inv_r3, -2.0 * p.mass));
        v[0] -= p.lambda / 3.0;
        let da2 = series::add(
            &series::scale(&inv_r2, 2.0 * p.mass),
            &series::scale(&rser, -2.0 * p.lambda / 3.0),
        );
        let mut a2 = series::add(
            &series::scale(&inv_r, -2.0 * p.mass),
            &series::scale(&series::mul(&rser, &rser), -p.lambda / 3.0),
        );
        a2[0] += 1.0;
        let w = series::mul(&series::mul(&a2, &da2), &inv_r);
        let mut u_of_delta = series::add(&series::scale(&v, ll1), &w);
        u_of_delta[0] = 0.0; // exactly alpha^2(r0) * (...) = 0
        let mut u = series::compose(&u_of_delta, &delta);
        u[0] = 0.0;
        HorizonExpansion { kappa, u, delta }
    }

    /// x(r) = sum_i a_i ln |(r - r_i) / (3M - r_i)|, strictly increasing on
    /// (r_minus, r_plus), zero at the photon sphere.
    pub fn x_of_r(&self, r: f64) -> Result<f64> {
        let p = &self.params;
        if !(r > p.r_minus && r < p.r_plus) {
            return Err(Error::RadiusDomain {
                r,
                lo: p.r_minus,
                hi: p.r_plus,
            });
        }
        let anchor = 3.0 * p.mass;
        let mut x = 0.0;
        for (&a, &ri) in self.coeffs.iter().zip(self.roots.iter()) {
            x += a * ((r - ri).abs() / (anchor - ri).abs()).ln();
        }
        Ok(x)
    }

    /// Inverse map. Central region by safeguarded Newton on the monotone
    /// x(r); horizon tails by Newton in v = ln|r - r_pm|, which stays
    /// well-conditioned arbitrarily deep into the tails.
    pub fn r_of_x(&self, x: f64) -> Result<f64> {
        if x.abs() > 4.0 {
            return self.r_of_x_tail(x);
        }
        self.r_of_x_central(x)
    }

    fn r_of_x_tail(&self, x: f64) -> Result<f64> {
        let plus_side = x > 0.0;
        let (s, sign) = if plus_side { (1usize, -1.0) } else { (0usize, 1.0) };
        let a = self.coeffs[s];
        let c = if plus_side { self.c_plus } else { self.c_minus };
        // largest horizon distance the tail solver may visit: just short of
        // the photon sphere (handled by the central solver)
        let anchor = 3.0 * self.params.mass;
        let v_max = if plus_side {
            (0.999 * (self.roots[1] - anchor)).ln()
        } else {
            (0.999 * (anchor - self.roots[0])).ln()
        };
        let f = |v: f64| self.x_of_tail(plus_side, v.exp()) - x;
        // x is monotone in v: decreasing toward r_plus, increasing toward r_minus
        let orient = if plus_side { -1.0 } else { 1.0 };
        // bracket [v_far, v_max] with sign change (v_far deep in the tail)
        let mut v_far = ((x - c) / a).min(v_max - 1.0);
        for _ in 0..40 {
            if orient * f(v_far) <= 0.0 {
                break;
            }
            v_far -= 5.0;
        }
        let (mut lo, mut hi) = (v_far, v_max);
        let mut v = ((x - c) / a).clamp(lo, hi);
        for _ in 0..100 {
            let delta = v.exp();
            let fx = f(v);
            if fx.abs() <= self.tolerance * (1.0 + x.abs()) {
                return Ok(self.roots[s] + sign * delta);
            }
            if orient * fx <= 0.0 {
                lo = v;
            } else {
                hi = v;
            }
            let mut dxdv = a;
            let r = self.roots[s] + sign * delta;
            for i in 0..3 {
                if i != s {
                    dxdv += self.coeffs[i] * sign * delta / (r - self.roots[i]);
                }
            }
            let mut next = v - fx / dxdv;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            v = next;
        }
        Err(Error::NoConvergence(format!("tail r(x) inversion at x = {x}")))
    }

    fn r_of_x_central(&self, x: f64) -> Result<f64> {
        let p = &self.params;
        // Bracket strictly inside the exterior; the map blows up
        // logarithmically at the ends so the bracket is safe for any
        // x representable at f64 resolution.
        let eps = 1e-15 * (p.r_plus - p.r_minus);
        let mut lo = p.r_minus + eps;
        let mut hi = p.r_plus - eps;
        let mut r = 3.0 * p.mass;
        for _ in 0..200 {
            let fx = self.x_of_r(r)? - x;
            if fx.abs() <= self.tolerance * (1.0 + x.abs()) {
                return Ok(r);
            }
            // near the horizons dx/dr = 1/alpha^2 blows up and the x
            // residual saturates at f64 granularity in r; a collapsed
            // bracket is then the best attainable answer
            if hi - lo <= 4.0 * f64::EPSILON * r {
                return Ok(0.5 * (lo + hi));
            }
            if fx > 0.0 {
                hi = r;
            } else {
                lo = r;
            }
            let step = fx * p.alpha2(r); // dr = dx * alpha^2
            let mut next = r - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            r = next;
        }
        Err(Error::NoConvergence(format!(
            "r(x) inversion at x = {x}: bracket [{lo}, {hi}]"
        )))
    }

    /// Effective potentials (V, W) at Regge-Wheeler coordinate x.
    pub fn potentials(&self, x: f64) -> Result<(f64, f64)> {
        let r = self.r_of_x(x)?;
        Ok(self.potentials_at_r(r))
    }

    /// (V, W) evaluated directly at radius r.
    pub fn potentials_at_r(&self, r: f64) -> (f64, f64) {
        let a2 = self.params.alpha2(r);
        let v = a2 / (r * r);
        let w = a2 * self.params.d_alpha2_dr(r) / r;
        (v, w)
    }

    /// Exact second derivative of V with respect to x at the potential
    /// maximum x = 0 (r = 3M); negative for admissible parameters.
    pub fn v_second_deriv_at_max(&self) -> f64 {
        self.v_second_deriv(3.0 * self.params.mass)
    }

    /// d^2 V / dx^2 at radius r, using d/dx = alpha^2 d/dr.
    pub fn v_second_deriv(&self, r: f64) -> f64 {
        let p = &self.params;
        let a2 = p.alpha2(r);
        let a2p = p.d_alpha2_dr(r);
        let a2pp = -4.0 * p.mass / (r * r * r) - 2.0 * p.lambda / 3.0;
        // g = dV/dr, gp = d^2V/dr^2 for V = alpha^2 / r^2
        let g = a2p / (r * r) - 2.0 * a2 / (r * r * r);
        let gp = a2pp / (r * r) - 4.0 * a2p / (r * r * r) + 6.0 * a2 / (r * r * r * r);
        a2 * (a2p * g + a2 * gp)
    }
}

/// Effective potential data at the photon-sphere maximum.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PotentialPair {
    /// max V = V(0).
    pub z0: f64,
    /// argmax of V in x; zero by the anchoring convention.
    pub x0: f64,
    /// V''(x0) < 0.
    pub vpp: f64,
}

impl PotentialPair {
    pub fn new(map: &CoordinateMap) -> Self {
        PotentialPair {
            z0: map.params.z0(),
            x0: 0.0,
            vpp: map.v_second_deriv_at_max(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn desk() -> MetricParams {
        MetricParams::new(1.0, 0.04).unwrap()
    }

    /// Independent bisection oracle for the positive roots of alpha^2.
    fn bisect_root(mass: f64, lambda: f64, mut lo: f64, mut hi: f64) -> f64 {
        let f = |r: f64| alpha2(r, mass, lambda);
        assert!(f(lo) * f(hi) < 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn horizon_radii_match_bisection_oracle() {
        let p = desk();
        // the two positive roots bracket 3M
        let r_minus = bisect_root(1.0, 0.04, 2.0 * 1.0, 3.0);
        let r_plus = bisect_root(1.0, 0.04, 3.0, 1.0 / 0.04f64.sqrt() * 3.0f64.sqrt());
        assert_relative_eq!(p.r_minus, r_minus, max_relative = 1e-10);
        assert_relative_eq!(p.r_plus, r_plus, max_relative = 1e-10);
        // frozen values from the oracle
        assert_relative_eq!(p.r_minus, 2.1286, max_relative = 1e-4);
        assert_relative_eq!(p.r_plus, 7.3975, max_relative = 1e-4);
        assert!(p.alpha2(p.r_minus).abs() < 1e-12);
        assert!(p.alpha2(p.r_plus).abs() < 1e-12);
        assert!(p.r_minus < 3.0 && 3.0 < p.r_plus);
    }

    #[test]
    fn near_extremal_roots_collapse_to_photon_sphere() {
        let p = MetricParams::new(1.0, 0.11108).unwrap();
        assert!(p.r_plus - p.r_minus < 0.1);
        assert!((p.r_minus - 3.0).abs() < 0.1 && (p.r_plus - 3.0).abs() < 0.1);
    }

    #[test]
    fn inadmissible_parameters_rejected() {
        assert!(MetricParams::new(1.0, 0.2).is_err());
        assert!(MetricParams::new(1.0, 0.0).is_err());
        assert!(MetricParams::new(-1.0, 0.04).is_err());
    }

    #[test]
    fn alpha2_pointwise_values() {
        let p = desk();
        assert_relative_eq!(p.alpha2(3.0), (1.0 - 9.0 * 0.04) / 3.0, epsilon = 1e-15);
        assert!(p.alpha2(p.r_plus).abs() < 1e-12);
        assert_relative_eq!(p.alpha2(4.0), 1.0 - 0.5 - 0.04 * 16.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn decay_rates_values_and_scaling() {
        let p = desk();
        // kappa from the bisection-oracle horizon radii
        let k = |r: f64| (2.0 / (r * r) - 2.0 * 0.04 * r / 3.0).abs();
        assert_relative_eq!(p.kappa_minus, k(p.r_minus), epsilon = 1e-14);
        assert_relative_eq!(p.kappa_plus, k(p.r_plus), epsilon = 1e-14);
        assert_relative_eq!(p.kappa_minus, 0.38465, max_relative = 1e-4);
        assert_relative_eq!(p.kappa_plus, 0.16072, max_relative = 1e-4);
        // dimensional homogeneity: M -> sM, Lambda -> Lambda/s^2
        let s = 2.5;
        let ps = MetricParams::new(s, 0.04 / (s * s)).unwrap();
        assert_relative_eq!(ps.kappa_minus, p.kappa_minus / s, max_relative = 1e-12);
        assert_relative_eq!(ps.kappa_plus, p.kappa_plus / s, max_relative = 1e-12);
    }

    #[test]
    fn log_potential_slope_matches_kappa_plus() {
        // linear regression of log V on x in [30, 60]
        let map = CoordinateMap::new(desk());
        let n = 61;
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        for i in 0..n {
            let x = 30.0 + 0.5 * i as f64;
            let (v, _) = map.potentials(x).unwrap();
            let y = v.ln();
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        let nf = n as f64;
        let slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
        assert_relative_eq!(slope, -map.params.kappa_plus, max_relative = 0.02);
    }

    /// Adaptive Simpson quadrature of alpha^{-2} as an independent oracle
    /// for the closed-form Regge-Wheeler coordinate.
    fn quad_x_of_r(p: &MetricParams, r: f64) -> f64 {
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, eps: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() < 15.0 * eps {
                left + right + (left + right - whole) / 15.0
            } else {
                simpson(f, a, m, fa, flm, fm, eps / 2.0, depth - 1)
                    + simpson(f, m, b, fm, frm, fb, eps / 2.0, depth - 1)
            }
        }
        let mass = p.mass;
        let lambda = p.lambda;
        let f = move |r: f64| 1.0 / alpha2(r, mass, lambda);
        let a = 3.0 * p.mass;
        simpson(&f, a, r, f(a), f(0.5 * (a + r)), f(r), 1e-12, 40)
    }

    #[test]
    fn closed_form_x_matches_quadrature() {
        let p = desk();
        let map = CoordinateMap::new(p);
        assert_eq!(map.x_of_r(3.0).unwrap(), 0.0);
        let n = 25;
        for i in 0..=n {
            let r = (p.r_minus + 0.01) + (p.r_plus - 0.01 - p.r_minus - 0.01) * i as f64 / n as f64;
            let closed = map.x_of_r(r).unwrap();
            let quad = quad_x_of_r(&p, r);
            let scale = closed.abs().max(1.0);
            assert!(
                (closed - quad).abs() / scale < 1e-9,
                "r = {r}: closed {closed} vs quad {quad}"
            );
        }
    }

    #[test]
    fn inverse_round_trip() {
        let p = desk();
        let map = CoordinateMap::new(p);
        for i in 0..100 {
            let r = p.r_minus + (p.r_plus - p.r_minus) * (i as f64 + 0.5) / 100.0;
            let x = map.x_of_r(r).unwrap();
            let back = map.r_of_x(x).unwrap();
            assert!((back - r).abs() < 1e-10, "r = {r}, back = {back}");
        }
        // far tails: inversion accuracy in x is limited by f64 granularity
        // of r near the horizons (dx/dr = 1/alpha^2)
        for &x in &[-60.0, -40.0, 40.0, 60.0] {
            let r = map.r_of_x(x).unwrap();
            let granularity = 8.0 * f64::EPSILON * r / p.alpha2(r);
            let tol = granularity.max(1e-9 * (1.0 + x.abs()));
            assert!((map.x_of_r(r).unwrap() - x).abs() < tol);
        }
    }

    #[test]
    fn x_derivative_matches_inverse_alpha2() {
        let p = desk();
        let map = CoordinateMap::new(p);
        for i in 1..20 {
            let r = p.r_minus + (p.r_plus - p.r_minus) * i as f64 / 20.0;
            let h = 1e-6;
            let d = (map.x_of_r(r + h).unwrap() - map.x_of_r(r - h).unwrap()) / (2.0 * h);
            assert_relative_eq!(d, 1.0 / p.alpha2(r), max_relative = 1e-6);
        }
    }

    #[test]
    fn potential_values_and_maximum() {
        let p = desk();
        let map = CoordinateMap::new(p);
        let (v0, _) = map.potentials(0.0).unwrap();
        assert_relative_eq!(v0, (1.0 - 9.0 * 0.04) / 27.0, max_relative = 1e-12);
        assert_relative_eq!(v0, 0.0237037, max_relative = 1e-5);
        // grid argmax at x = 0 within grid spacing; V > 0; single sign change of V'
        let n = 2000;
        let dx = 0.05;
        let mut best = (f64::MIN, 0.0);
        let mut prev_v = None;
        let mut sign_changes = 0;
        let mut prev_slope_sign = 0i32;
        for i in 0..=n {
            let x = -dx * n as f64 / 2.0 + dx * i as f64;
            let (v, _) = map.potentials(x).unwrap();
            assert!(v > 0.0);
            if v > best.0 {
                best = (v, x);
            }
            if let Some(pv) = prev_v {
                let s = if v > pv { 1 } else { -1 };
                if prev_slope_sign != 0 && s != prev_slope_sign {
                    sign_changes += 1;
                }
                prev_slope_sign = s;
            }
            prev_v = Some(v);
        }
        assert!(best.1.abs() <= dx);
        assert_eq!(sign_changes, 1);
        // W decays exponentially at both ends; direct evaluation gives
        // W(60) ~ -2.5e-6 and W(-60) ~ 1e-11 for M=1, Lambda=0.04
        let (_, w_p) = map.potentials(60.0).unwrap();
        let (_, w_m) = map.potentials(-60.0).unwrap();
        assert!(w_p.abs() < 1e-5 && w_m.abs() < 1e-10);
        let (_, w_p2) = map.potentials(80.0).unwrap();
        assert!(w_p2.abs() < w_p.abs() * 0.1);
    }

    #[test]
    fn sqrt_v0_equals_lattice_constant() {
        for &(m, l) in &[(1.0, 0.04), (1.0, 0.09), (2.0, 0.01), (0.5, 0.3)] {
            let p = MetricParams::new(m, l).unwrap();
            assert_relative_eq!(p.z0().sqrt(), p.lattice_constant(), max_relative = 1e-12);
        }
    }

    #[test]
    fn horizon_expansion_reproduces_potential_and_radius() {
        let map = CoordinateMap::new(desk());
        for &(plus, ell, x) in &[
            (true, 0u32, 14.0),
            (true, 5, 20.0),
            (true, 40, 30.0),
            (false, 0, -8.0),
            (false, 12, -12.0),
        ] {
            let exp = map.horizon_expansion(plus, ell, 40);
            let xi = exp.xi(x);
            let r = map.r_of_x(x).unwrap();
            let (v, w) = map.potentials_at_r(r);
            let ll1 = (ell as f64) * (ell as f64 + 1.0);
            let u_exact = ll1 * v + w;
            let u_series = crate::series::eval(&exp.u, xi);
            assert_relative_eq!(u_series, u_exact, max_relative = 1e-10);
            let d_exact = if plus {
                map.params.r_plus - r
            } else {
                r - map.params.r_minus
            };
            let d_series = crate::series::eval(&exp.delta, xi);
            assert_relative_eq!(d_series, d_exact, max_relative = 1e-10);
        }
    }

    #[test]
    fn v_second_derivative_matches_finite_difference() {
        let p = desk();
        let map = CoordinateMap::new(p);
        let pair = PotentialPair::new(&map);
        assert!(pair.vpp < 0.0);
        let h = 1e-3;
        let v = |x: f64| map.potentials(x).unwrap().0;
        let fd = (v(h) - 2.0 * v(0.0) + v(-h)) / (h * h);
        assert_relative_eq!(pair.vpp, fd, max_relative = 1e-5);
    }
}
