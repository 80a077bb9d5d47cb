//! Outgoing Jost solutions, the Wronskian, and the zero-resonance constant.
//!
//! The reduced function m_pm(x, lambda) = e^{mp i lambda x} e_pm(x, lambda)
//! satisfies m'' pm 2 i lambda m' = (l(l+1) V + W) m and tends to 1 at
//! pm infinity. In the horizon tails m has a convergent expansion
//! m = 1 + sum_k m_k xi^k in the exponential variable xi of the tail
//! (coefficients by recurrence from the potential series), which supplies
//! boundary data at moderate |x|. That matters for Im lambda < 0: inward
//! integration amplifies boundary noise by e^{2 |Im lambda| x_start}, so
//! starting at the truncation abscissa where the potential is merely small
//! (x ~ 200) would drown the Wronskian; the series start (x ~ 15-25) keeps
//! the amplification harmless.

use num_complex::Complex64;

use crate::background::CoordinateMap;
use crate::error::{Error, Result};
use crate::ode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Plus,
    Minus,
}

/// Sampled reduced Jost function on a grid.
#[derive(Debug, Clone)]
pub struct JostEval {
    pub lambda: Complex64,
    pub ell: u32,
    pub side: Side,
    /// Increasing x samples.
    pub grid: Vec<f64>,
    /// m_pm(x, lambda) = e^{mp i lambda x} e_pm(x, lambda).
    pub m: Vec<Complex64>,
    /// d m_pm / dx.
    pub m_prime: Vec<Complex64>,
    /// Truncation abscissa where m = 1, m' = 0 was imposed.
    pub x_cut: f64,
}

impl JostEval {
    /// The full Jost solution e_pm(x) = e^{pm i lambda x} m(x) at grid index i.
    pub fn e(&self, i: usize) -> Complex64 {
        let phase = self.phase(self.grid[i]);
        phase * self.m[i]
    }

    /// d e_pm / dx at grid index i.
    pub fn e_prime(&self, i: usize) -> Complex64 {
        let il = Complex64::i() * self.lambda;
        let sign = match self.side {
            Side::Plus => 1.0,
            Side::Minus => -1.0,
        };
        self.phase(self.grid[i]) * (self.m_prime[i] + sign * il * self.m[i])
    }

    fn phase(&self, x: f64) -> Complex64 {
        let il = Complex64::i() * self.lambda;
        match self.side {
            Side::Plus => (il * x).exp(),
            Side::Minus => (-il * x).exp(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct WronskianValue {
    pub lambda: Complex64,
    pub ell: u32,
    pub w: Complex64,
    pub matching_point: f64,
}

/// Result of the contour-quadrature computation of gamma.
#[derive(Debug, Clone, Copy)]
pub struct GammaResult {
    pub gamma: f64,
    pub w_prime_zero: Complex64,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct JostSolver {
    pub map: CoordinateMap,
    /// Maximum admitted -Im lambda; 0.98 * min(kappa)/2 by default. The
    /// analyticity boundary is min(kappa)/2, and the first resonance
    /// string sits near 0.96 of it, so the margin must be thinner than
    /// that; series-start evaluations stay tolerance-stable this deep.
    pub strip_limit: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Tail threshold scale for the adaptive truncation abscissa.
    pub cut_threshold: f64,
}

impl JostSolver {
    pub fn new(map: CoordinateMap) -> Self {
        let p = &map.params;
        let strip_limit = 0.98 * p.kappa_minus.min(p.kappa_plus) / 2.0;
        JostSolver {
            map,
            strip_limit,
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            cut_threshold: 1e-12,
        }
    }

    fn check_strip(&self, lambda: Complex64) -> Result<()> {
        if lambda.im <= -self.strip_limit {
            return Err(Error::StripViolation {
                im: lambda.im,
                limit: self.strip_limit,
            });
        }
        Ok(())
    }

    /// Truncation abscissa: smallest multiple of 5 with
    /// (l(l+1) V + |W|)(sign * x_cut) below cut_threshold * max(1, |lambda|^2).
    fn x_cut(&self, side: Side, lambda: Complex64, ell: u32) -> Result<f64> {
        let ll1 = (ell * (ell + 1)) as f64;
        let thresh = self.cut_threshold * lambda.norm_sqr().max(1.0);
        let mut x = 10.0;
        loop {
            let signed = match side {
                Side::Plus => x,
                Side::Minus => -x,
            };
            let (v, w) = self.map.potentials(signed)?;
            if ll1 * v + w.abs() < thresh {
                return Ok(x);
            }
            x += 5.0;
            if x > 2000.0 {
                return Err(Error::NoConvergence(format!(
                    "potential tail never fell below {thresh} (side {side:?})"
                )));
            }
        }
    }

    /// Tail expansion of the reduced function for one side:
    /// m = 1 + sum m_k xi^k with m_k = (sum_j u_j m_{k-j}) / (k kappa (k kappa - 2 i lambda)).
    fn tail_series(&self, side: Side, lambda: Complex64, ell: u32) -> Result<TailSeries> {
        let n = 48;
        let expn = self.map.horizon_expansion(side == Side::Plus, ell, n);
        let kappa = expn.kappa;
        let two_il = 2.0 * Complex64::i() * lambda;
        let mut mk = vec![Complex64::default(); n];
        mk[0] = Complex64::new(1.0, 0.0);
        for k in 1..n {
            let mut conv = Complex64::default();
            for j in 1..=k {
                conv += expn.u[j] * mk[k - j];
            }
            let kk = k as f64 * kappa;
            let denom = kk * (Complex64::new(kk, 0.0) - two_il);
            if denom.norm() < 1e-8 {
                return Err(Error::NoConvergence(format!(
                    "tail recurrence degenerate at k = {k}, lambda = {lambda}"
                )));
            }
            mk[k] = conv / denom;
        }
        // Start abscissa: top-of-series terms below round-off.
        let mut x0 = 10.0;
        loop {
            let xi = (-kappa * x0).exp();
            let mut tail = 0.0;
            for k in n - 5..n {
                tail += (mk[k].norm() + expn.u[k].abs() / (kappa * kappa)) * xi.powi(k as i32);
            }
            if tail < 1e-14 {
                break;
            }
            x0 += 2.0;
            if x0 > 400.0 {
                return Err(Error::NoConvergence(format!(
                    "tail series not convergent by x = {x0} (side {side:?}, l = {ell})"
                )));
            }
        }
        Ok(TailSeries {
            side,
            kappa,
            x0,
            mk,
        })
    }

    /// Reduced Jost solution on `grid` (increasing x samples).
    pub fn jost(&self, side: Side, lambda: Complex64, ell: u32, grid: &[f64]) -> Result<JostEval> {
        self.check_strip(lambda)?;
        let tail = self.tail_series(side, lambda, ell)?;
        let ll1 = (ell * (ell + 1)) as f64;
        let map = self.map.clone();
        let u = move |x: f64| {
            let r = map.r_of_x(x).expect("coordinate inversion inside the exterior");
            let (v, w) = map.potentials_at_r(r);
            ll1 * v + w
        };
        // start just beyond the outermost grid point on the tail side
        let start = match side {
            Side::Plus => tail.x0.max(grid.last().copied().unwrap_or(0.0) + 0.5),
            Side::Minus => (-tail.x0).min(grid.first().copied().unwrap_or(0.0) - 0.5),
        };
        let (m0, mp0) = tail.eval(start);
        self.integrate_reduced(side, lambda, ell, grid, u, start, m0, mp0)
    }

    /// Reduced Jost solution with an arbitrary potential u(x) and the
    /// crude boundary condition m = 1, m' = 0 at the truncation abscissa;
    /// used for the free-potential checks.
    pub fn jost_with<U>(
        &self,
        side: Side,
        lambda: Complex64,
        ell: u32,
        grid: &[f64],
        u: U,
    ) -> Result<JostEval>
    where
        U: Fn(f64) -> f64,
    {
        self.check_strip(lambda)?;
        let x_cut = self.x_cut(side, lambda, ell)?;
        let grid_extreme = grid.iter().fold(0.0f64, |acc, &x| acc.max(x.abs()));
        let start_abs = x_cut.max(grid_extreme + 0.5);
        let start = match side {
            Side::Plus => start_abs,
            Side::Minus => -start_abs,
        };
        let one = Complex64::new(1.0, 0.0);
        self.integrate_reduced(side, lambda, ell, grid, u, start, one, Complex64::default())
    }

    /// Integrates m'' -/+ 2 i lambda m' = u m inward from `start` with the
    /// given boundary data, recording m, m' at every grid point.
    fn integrate_reduced<U>(
        &self,
        side: Side,
        lambda: Complex64,
        ell: u32,
        grid: &[f64],
        u: U,
        start: f64,
        m0: Complex64,
        mp0: Complex64,
    ) -> Result<JostEval>
    where
        U: Fn(f64) -> f64,
    {
        let x_end = match side {
            Side::Plus => grid.first().copied().unwrap_or(0.0).min(0.0),
            Side::Minus => grid.last().copied().unwrap_or(0.0).max(0.0),
        };
        // m'' = u m -/+ 2 i lambda m' (Plus: -, Minus: +)
        let two_il = 2.0 * Complex64::i() * lambda;
        let drift = match side {
            Side::Plus => -two_il,
            Side::Minus => two_il,
        };
        let rhs = move |x: f64, y: &ode::State| -> ode::State {
            let upot = u(x);
            vec![y[1], upot * y[0] + drift * y[1]]
        };
        let y0 = vec![m0, mp0];
        // checkpoints ordered in the direction of integration
        let mut cps: Vec<f64> = grid.to_vec();
        if side == Side::Plus {
            cps.reverse();
        }
        let mut m = vec![Complex64::default(); grid.len()];
        let mut mp = vec![Complex64::default(); grid.len()];
        let mut idx = 0usize;
        ode::integrate(
            rhs,
            start,
            x_end,
            y0,
            self.rel_tol,
            self.abs_tol,
            &cps,
            |_x, y| {
                let i = match side {
                    Side::Plus => grid.len() - 1 - idx,
                    Side::Minus => idx,
                };
                m[i] = y[0];
                mp[i] = y[1];
                idx += 1;
            },
        )?;
        Ok(JostEval {
            lambda,
            ell,
            side,
            grid: grid.to_vec(),
            m,
            m_prime: mp,
            x_cut: start,
        })
    }

    /// Wronskian w = e_-' e_+ - e_+' e_- assembled at x = 0.
    pub fn wronskian(&self, lambda: Complex64, ell: u32) -> Result<WronskianValue> {
        self.wronskian_at(lambda, ell, 0.0)
    }

    /// Wronskian assembled at an arbitrary matching point; the value is
    /// x-independent up to ODE tolerance.
    pub fn wronskian_at(&self, lambda: Complex64, ell: u32, x: f64) -> Result<WronskianValue> {
        let grid = [x];
        let plus = self.jost(Side::Plus, lambda, ell, &grid)?;
        let minus = self.jost(Side::Minus, lambda, ell, &grid)?;
        let w = wronskian_from_reduced(lambda, minus.m[0], minus.m_prime[0], plus.m[0], plus.m_prime[0]);
        Ok(WronskianValue {
            lambda,
            ell,
            w,
            matching_point: x,
        })
    }

    /// w'(0) by Cauchy quadrature of w(lambda)/lambda^2 over a circle,
    /// and gamma = 1 / (i w'(0) r_+ r_-).
    pub fn gamma_constant(&self, radius: f64) -> Result<GammaResult> {
        if radius >= self.strip_limit {
            return Err(Error::ContourDomain {
                center: "0".into(),
                radius,
                reason: format!("circle leaves the Jost strip (limit {})", self.strip_limit),
            });
        }
        let n = 64;
        let mut acc = Complex64::default();
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let lam = radius * Complex64::new(th.cos(), th.sin());
            let w = self.wronskian(lam, 0)?.w;
            // (1/2 pi i) * oint w/lambda^2 dlambda with dlambda = i lam dth
            acc += w / (lam * lam) * lam;
        }
        let w_prime = acc / n as f64;
        let p = &self.map.params;
        let gamma_c = (Complex64::i() * w_prime * p.r_plus * p.r_minus).inv();
        if gamma_c.im.abs() > 1e-8 * gamma_c.norm() {
            return Err(Error::Consistency(format!(
                "gamma has non-negligible imaginary part: {gamma_c}"
            )));
        }
        if gamma_c.re <= 0.0 {
            return Err(Error::Consistency(format!("gamma not positive: {gamma_c}")));
        }
        Ok(GammaResult {
            gamma: gamma_c.re,
            w_prime_zero: w_prime,
            radius,
        })
    }

    /// Second zero-energy solution r~(x) = r(x) * int_0^x r^{-2} dt,
    /// by Gauss-Legendre panels; test fixture for the l = 0 analysis.
    pub fn second_solution(&self, x: f64) -> Result<f64> {
        let r_here = self.map.r_of_x(x)?;
        // 16-point Gauss-Legendre per unit-length panel
        let (nodes, weights) = gauss_legendre_16();
        let panels = (x.abs().ceil() as usize).max(1);
        let mut acc = 0.0;
        for p in 0..panels {
            let a = x * p as f64 / panels as f64;
            let b = x * (p + 1) as f64 / panels as f64;
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (t, w) in nodes.iter().zip(weights.iter()) {
                let r = self.map.r_of_x(mid + half * t)?;
                acc += w * half / (r * r);
            }
        }
        Ok(r_here * acc)
    }
}

/// Tail expansion data of one reduced Jost function.
struct TailSeries {
    side: Side,
    kappa: f64,
    /// Smallest |x| at which the truncated series is at round-off accuracy.
    x0: f64,
    mk: Vec<Complex64>,
}

impl TailSeries {
    /// (m, dm/dx) at abscissa x (valid for |x| >= x0 on the series side).
    fn eval(&self, x: f64) -> (Complex64, Complex64) {
        let xi = (-self.kappa * x.abs()).exp();
        let mut m = Complex64::default();
        let mut dm = Complex64::default();
        for (k, &mk) in self.mk.iter().enumerate().rev() {
            m = m * xi + mk;
            dm = dm * xi + k as f64 * mk;
        }
        // dm now holds sum_k k m_k xi^k; dm/dx = -/+ kappa * that
        let sign = match self.side {
            Side::Plus => -self.kappa,
            Side::Minus => self.kappa,
        };
        (m, sign * dm)
    }
}

/// w from the reduced functions at the matching point x:
/// w = m_-' m_+ - m_+' m_- - 2 i lambda m_+ m_- (phases cancel).
pub fn wronskian_from_reduced(
    lambda: Complex64,
    m_minus: Complex64,
    mp_minus: Complex64,
    m_plus: Complex64,
    mp_plus: Complex64,
) -> Complex64 {
    mp_minus * m_plus - mp_plus * m_minus - 2.0 * Complex64::i() * lambda * m_plus * m_minus
}

pub(crate) fn gauss_legendre_16() -> ([f64; 16], [f64; 16]) {
    // nodes/weights on [-1, 1]
    let nodes = [
        -0.9894009349916499,
        -0.9445750230732326,
        -0.8656312023878318,
        -0.755404408355003,
        -0.6178762444026438,
        -0.45801677765722737,
        -0.2816035507792589,
        -0.09501250983763744,
        0.09501250983763744,
        0.2816035507792589,
        0.45801677765722737,
        0.6178762444026438,
        0.755404408355003,
        0.8656312023878318,
        0.9445750230732326,
        0.9894009349916499,
    ];
    let weights = [
        0.027152459411754094,
        0.062253523938647894,
        0.09515851168249278,
        0.12462897125553387,
        0.14959598881657673,
        0.16915651939500254,
        0.18260341504492358,
        0.1894506104550685,
        0.1894506104550685,
        0.18260341504492358,
        0.16915651939500254,
        0.14959598881657673,
        0.12462897125553387,
        0.09515851168249278,
        0.062253523938647894,
        0.027152459411754094,
    ];
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::MetricParams;
    use approx::assert_relative_eq;

    fn solver() -> JostSolver {
        JostSolver::new(CoordinateMap::new(MetricParams::new(1.0, 0.04).unwrap()))
    }

    #[test]
    fn zero_energy_jost_is_r_over_r_plus() {
        let s = solver();
        let grid: Vec<f64> = (0..=80).map(|i| -20.0 + 0.5 * i as f64).collect();
        let j = s.jost(Side::Plus, Complex64::default(), 0, &grid).unwrap();
        for (i, &x) in grid.iter().enumerate() {
            let expect = s.map.r_of_x(x).unwrap() / s.map.params.r_plus;
            let got = j.m[i].re;
            assert!(j.m[i].im.abs() < 1e-9);
            assert_relative_eq!(got, expect, max_relative = 1e-6);
        }
    }

    #[test]
    fn free_potential_reduced_function_is_one() {
        let s = solver();
        let grid: Vec<f64> = (0..=20).map(|i| -10.0 + i as f64).collect();
        for lam in [
            Complex64::new(1.0, 0.0),
            Complex64::new(3.0, -0.05),
            Complex64::new(0.0, 2.0),
        ] {
            for side in [Side::Plus, Side::Minus] {
                let j = s.jost_with(side, lam, 0, &grid, |_| 0.0).unwrap();
                for (m, mp) in j.m.iter().zip(j.m_prime.iter()) {
                    assert!((m - 1.0).norm() < 1e-10);
                    assert!(mp.norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn high_frequency_flattens_and_is_self_consistent() {
        let s = solver();
        let grid: Vec<f64> = (0..=40).map(|i| -10.0 + 0.5 * i as f64).collect();
        let sup = |lam: Complex64| {
            let j = s.jost(Side::Plus, lam, 0, &grid).unwrap();
            j.m.iter().map(|m| (m - 1.0).norm()).fold(0.0, f64::max)
        };
        let s5 = sup(Complex64::new(5.0, 0.0));
        let s10 = sup(Complex64::new(10.0, 0.0));
        assert!(s10 < s5, "sup|m-1| at 10 = {s10}, at 5 = {s5}");
        // tolerance-halving self-consistency
        let mut tight = solver();
        tight.rel_tol = 1e-12;
        tight.abs_tol = 1e-14;
        let j = s.jost(Side::Plus, Complex64::new(5.0, 0.0), 0, &grid).unwrap();
        let jt = tight.jost(Side::Plus, Complex64::new(5.0, 0.0), 0, &grid).unwrap();
        for (a, b) in j.m.iter().zip(jt.m.iter()) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn free_wronskian_is_minus_two_i_lambda() {
        let s = solver();
        for lam in [Complex64::new(0.7, 0.0), Complex64::new(2.0, -0.03)] {
            let plus = s.jost_with(Side::Plus, lam, 0, &[0.0], |_| 0.0).unwrap();
            let minus = s.jost_with(Side::Minus, lam, 0, &[0.0], |_| 0.0).unwrap();
            let w = wronskian_from_reduced(lam, minus.m[0], minus.m_prime[0], plus.m[0], plus.m_prime[0]);
            assert!((w - (-2.0 * Complex64::i() * lam)).norm() < 1e-9);
        }
    }

    #[test]
    fn zero_is_a_resonance_only_for_ell_zero() {
        let s = solver();
        let w0 = s.wronskian(Complex64::default(), 0).unwrap().w;
        assert!(w0.norm() < 1e-8, "|w(0)| = {}", w0.norm());
        let w1 = s.wronskian(Complex64::default(), 1).unwrap().w;
        assert!(w1.norm() > 1e-3, "|w(0)| at l=1 = {}", w1.norm());
    }

    #[test]
    fn wronskian_independent_of_matching_point() {
        let s = solver();
        let lam = Complex64::new(0.4, -0.02);
        let w0 = s.wronskian_at(lam, 2, 0.0).unwrap().w;
        for x in [-1.0, 1.0] {
            let wx = s.wronskian_at(lam, 2, x).unwrap().w;
            assert!((wx - w0).norm() < 1e-8 * w0.norm());
        }
    }

    #[test]
    fn imaginary_axis_conjugation_symmetry() {
        // i * w(it) is real for t > 0
        let s = solver();
        for t in [0.3, 1.0, 2.5] {
            let w = s.wronskian(Complex64::new(0.0, t), 3).unwrap().w;
            let iw = w; // free normalization -2i*lambda is real on the imaginary axis
            assert!(iw.im.abs() < 1e-8 * iw.norm(), "t = {t}: w(it) = {iw}");
        }
    }

    #[test]
    fn wronskian_grows_with_ell_on_real_axis() {
        let s = solver();
        let lam = Complex64::new(0.5, 0.0);
        let mut prev = 0.0;
        for ell in 0..=5 {
            let w = s.wronskian(lam, ell).unwrap().w.norm();
            assert!(w > prev, "l = {ell}: |w| = {w} <= {prev}");
            prev = w;
        }
    }

    #[test]
    fn strip_violation_rejected() {
        let s = solver();
        let lam = Complex64::new(1.0, -2.0 * s.strip_limit);
        assert!(matches!(
            s.wronskian(lam, 0),
            Err(Error::StripViolation { .. })
        ));
    }

    #[test]
    fn gamma_real_positive_and_radius_independent() {
        let s = solver();
        let g1 = s.gamma_constant(0.01).unwrap();
        let g2 = s.gamma_constant(0.02).unwrap();
        assert!(g1.gamma > 0.0);
        assert_relative_eq!(g1.gamma, g2.gamma, max_relative = 1e-6);
    }

    #[test]
    fn gamma_circle_must_stay_in_strip() {
        let s = solver();
        assert!(s.gamma_constant(10.0 * s.strip_limit).is_err());
    }

    #[test]
    fn second_solution_shape() {
        let s = solver();
        assert_eq!(s.second_solution(0.0).unwrap(), 0.0);
        // r~(x) - x/r_plus stays bounded: drift over [20, 60] below 1% of x
        let r_plus = s.map.params.r_plus;
        let d20 = s.second_solution(20.0).unwrap() - 20.0 / r_plus;
        let d60 = s.second_solution(60.0).unwrap() - 60.0 / r_plus;
        assert!((d60 - d20).abs() < 0.01 * 60.0, "drift {}", (d60 - d20).abs());
    }
}
