//! End-to-end acceptance checks over the whole pipeline. Each criterion
//! reports a pass/fail verdict with the measured numbers, so failures
//! document what was actually observed.

use num_complex::Complex64;

use crate::background::{CoordinateMap, MetricParams};
use crate::config::RunConfig;
use crate::error::Result;
use crate::evolve::{discretize, evolve, log_slope, ringdown_fit, FieldState, Trajectory};
use crate::expand::{expansion_term, residual_decay, ExpansionTerm};
use crate::jost::{JostSolver, Side};
use crate::resolvent::{cutoff_resolvent_norm, trapezoid_weights, uniform_grid, CutoffFunction};
use crate::spectrum::{find_resonances, Region};

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub index: usize,
    pub name: &'static str,
    pub passed: bool,
    pub details: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {} ({}): {} — {}",
            self.index,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.details
        )
    }
}

pub struct Acceptance {
    pub cfg: RunConfig,
    pub solver: JostSolver,
    chi: CutoffFunction,
    ell10_zero: Option<Complex64>,
    ell10_traj: Option<Trajectory>,
}

impl Acceptance {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let map = CoordinateMap::new(MetricParams::new(cfg.m, cfg.lambda)?);
        let chi = CutoffFunction::new(cfg.a);
        Ok(Acceptance {
            solver: JostSolver::new(map),
            cfg,
            chi,
            ell10_zero: None,
            ell10_traj: None,
        })
    }

    pub fn run_all(&mut self) -> Vec<CriterionResult> {
        vec![
            self.criterion_1(),
            self.criterion_2(),
            self.criterion_3(),
            self.criterion_4(),
            self.criterion_5(),
            self.criterion_6(),
            self.criterion_7(),
            self.criterion_8(),
        ]
    }

    fn ell10_zero(&mut self) -> Complex64 {
        if self.ell10_zero.is_none() {
            let found =
                find_resonances(&self.solver, 10, Region::new(1.50, 1.75, -0.0785, -0.004))
                    .expect("ell = 10 string search");
            self.ell10_zero = Some(found[0].lambda);
        }
        self.ell10_zero.unwrap()
    }

    fn ell10_trajectory(&mut self) -> &Trajectory {
        if self.ell10_traj.is_none() {
            let grid = uniform_grid(-self.cfg.x, self.cfg.x, self.cfg.points);
            let disc = discretize(&self.solver.map, 10, &grid).expect("discretize");
            let init = FieldState::gaussian(&grid, 10, 0.0, 1.0, 1);
            let traj = evolve(&disc, &init, 150.0, self.cfg.time_step(), 8.0, 100)
                .expect("ell = 10 evolution");
            self.ell10_traj = Some(traj);
        }
        self.ell10_traj.as_ref().unwrap()
    }

    pub fn criterion_1(&mut self) -> CriterionResult {
        let p = &self.solver.map.params;
        let c = p.lattice_constant();
        let sqrt_v0 = self
            .solver
            .map
            .potentials(0.0)
            .map(|(v, _)| v.sqrt())
            .unwrap_or(f64::NAN);
        let d_lattice = (sqrt_v0 - c).abs() / c;
        let res_minus = p.alpha2(p.r_minus).abs();
        let res_plus = p.alpha2(p.r_plus).abs();
        // closed-form coordinate vs direct quadrature of 1/alpha^2
        let mut d_x = 0.0f64;
        for r in [2.5, 3.5, 5.0, 6.5] {
            let closed = self.solver.map.x_of_r(r).unwrap_or(f64::NAN);
            let quad = quadrature_x(p, r);
            d_x = d_x.max((closed - quad).abs());
        }
        let passed = d_lattice < 1e-12 && res_minus < 1e-10 && res_plus < 1e-10 && d_x < 1e-9;
        CriterionResult {
            index: 1,
            name: "background identities",
            passed,
            details: format!(
                "sqrt(V(0)) vs lattice constant rel {d_lattice:.2e}; horizon residuals \
                 {res_minus:.2e}, {res_plus:.2e}; coordinate closed form vs quadrature {d_x:.2e}"
            ),
        }
    }

    pub fn criterion_2(&mut self) -> CriterionResult {
        let s = &self.solver;
        let w_at = |ell: u32| -> f64 {
            s.wronskian(Complex64::default(), ell)
                .map(|w| w.w.norm())
                .unwrap_or(f64::NAN)
        };
        let w0 = w_at(0);
        let w_min_higher = (1..=6).map(w_at).fold(f64::MAX, f64::min);
        // e_+(x, 0) = r(x)/r_+
        let grid = uniform_grid(-20.0, 20.0, 101);
        let plus = s.jost(Side::Plus, Complex64::default(), 0, &grid).unwrap();
        let r_plus = s.map.params.r_plus;
        let mut d_profile = 0.0f64;
        for (i, &x) in grid.iter().enumerate() {
            let want = s.map.r_of_x(x).unwrap() / r_plus;
            d_profile = d_profile.max((plus.e(i).re - want).abs() / want.abs());
            d_profile = d_profile.max(plus.e(i).im.abs() / want.abs());
        }
        let g1 = s.gamma_constant(0.02).unwrap();
        let g2 = s.gamma_constant(0.035).unwrap();
        let d_gamma = (g1.gamma - g2.gamma).abs() / g1.gamma;
        let passed =
            w0 < 1e-8 && w_min_higher > 1e-3 && d_profile < 1e-6 && g1.gamma > 0.0 && d_gamma < 1e-6;
        CriterionResult {
            index: 2,
            name: "zero-resonance suite",
            passed,
            details: format!(
                "|w(0)| = {w0:.2e} (ell 0), min |w(0)| = {w_min_higher:.2e} (ell 1..6); \
                 e_+(x,0) vs r/r_+ rel {d_profile:.2e}; gamma = {:.6} with radius spread {d_gamma:.2e}",
                g1.gamma
            ),
        }
    }

    pub fn criterion_3(&mut self) -> CriterionResult {
        let c = self.solver.map.params.lattice_constant();
        let im_floor = -self.solver.strip_limit + 1e-4;
        let mut counts = Vec::new();
        let mut dists = Vec::new();
        for ell in [8u32, 12, 16, 20] {
            let mu = c * Complex64::new(ell as f64 + 0.5, -0.25);
            let region = Region::new(mu.re - 0.06, mu.re + 0.06, im_floor, -0.004);
            match find_resonances(&self.solver, ell, region) {
                Ok(found) => {
                    counts.push(found.len());
                    let d = found
                        .iter()
                        .map(|r| (r.lambda - mu).norm())
                        .fold(f64::MAX, f64::min);
                    dists.push(d);
                }
                Err(e) => {
                    return CriterionResult {
                        index: 3,
                        name: "pseudo-pole lattice agreement",
                        passed: false,
                        details: format!("search failed at ell = {ell}: {e}"),
                    }
                }
            }
        }
        let unique = counts.iter().all(|&n| n == 1);
        let close = dists.iter().all(|&d| d < 0.02);
        let decreasing = dists.windows(2).all(|w| w[1] < w[0]);
        CriterionResult {
            index: 3,
            name: "pseudo-pole lattice agreement",
            passed: unique && close && decreasing,
            details: format!(
                "zeros per box {counts:?}; distances to c(l+1/2 - i/4): \
                 {:?} (tolerance 0.02, decreasing: {decreasing})",
                dists.iter().map(|d| format!("{d:.4}")).collect::<Vec<_>>()
            ),
        }
    }

    pub fn criterion_4(&mut self) -> CriterionResult {
        let s = &self.solver;
        let chi = &self.chi;
        // zone II flatness at ell = 40
        let weighted: Vec<f64> = [3.0, 4.0, 5.0, 6.0, 6.5, 7.0, 8.0]
            .iter()
            .map(|&re| {
                let lam = Complex64::new(re, 0.0);
                cutoff_resolvent_norm(s, lam, 40, chi, 201).unwrap() * (1.0 + lam.norm_sqr())
            })
            .collect();
        let (lo, hi) = weighted
            .iter()
            .fold((f64::MAX, f64::MIN), |(l, h), &p| (l.min(p), h.max(p)));
        let flat_spread = hi / lo;
        // simple-pole scaling toward the ell = 10 resonance
        let zj = self.ell10_zero();
        let dir = Complex64::new(0.6, 0.8);
        let products: Vec<f64> = [1e-3, 2.5e-3, 5e-3, 1e-2]
            .iter()
            .map(|&d| {
                cutoff_resolvent_norm(&self.solver, zj + d * dir, 10, &self.chi, 201).unwrap()
                    * d
            })
            .collect();
        let (plo, phi) = products
            .iter()
            .fold((f64::MAX, f64::MIN), |(l, h), &p| (l.min(p), h.max(p)));
        let pole_spread = phi / plo;
        // spectral bound on the imaginary axis
        let mut bound_ok = true;
        let mut bound_detail = String::new();
        for t in [0.5, 1.0, 2.0] {
            let norm =
                cutoff_resolvent_norm(&self.solver, Complex64::new(0.0, t), 1, &self.chi, 201)
                    .unwrap();
            bound_ok &= norm <= 1.0 / (t * t) + 1e-6;
            bound_detail.push_str(&format!("{:.3}/{:.3} ", norm, 1.0 / (t * t)));
        }
        let passed = flat_spread < 10.0 && pole_spread < 10.0 && bound_ok;
        CriterionResult {
            index: 4,
            name: "resolvent zone behavior",
            passed,
            details: format!(
                "zone II weighted-norm spread {flat_spread:.1}x (need < 10); pole-scaling \
                 spread {pole_spread:.2}x; norm vs 1/t^2: {bound_detail}"
            ),
        }
    }

    pub fn criterion_5(&mut self) -> CriterionResult {
        let zj = self.ell10_zero();
        let traj = self.ell10_trajectory();
        let times: Vec<f64> = traj.probe.iter().map(|p| p.0).collect();
        let values: Vec<f64> = traj.probe.iter().map(|p| p.1).collect();
        let fitted = ringdown_fit(&times, &values, (80.0, 150.0), 4)
            .ok()
            .and_then(|modes| modes.into_iter().find(|m| m.lambda.re > 0.5));
        let Some(mode) = fitted else {
            return CriterionResult {
                index: 5,
                name: "ringdown cross-validation",
                passed: false,
                details: "no dominant positive-frequency mode fitted".into(),
            };
        };
        let d_re = (mode.lambda.re - zj.re).abs() / zj.re.abs();
        let d_im = (mode.lambda.im - zj.im).abs() / zj.im.abs();
        // Richardson ratio on a fixed smooth problem
        let map = self.solver.map.clone();
        let probe_of = |n: usize| -> f64 {
            let grid = uniform_grid(-30.0, 30.0, n);
            let h = grid[1] - grid[0];
            let disc = discretize(&map, 2, &grid).unwrap();
            let init = FieldState::gaussian(&grid, 2, 0.0, 1.0, 1);
            evolve(&disc, &init, 12.0, 0.6 * h, 6.0, 0)
                .unwrap()
                .probe
                .last()
                .unwrap()
                .1
        };
        let (c1, c2, c3) = (probe_of(601), probe_of(1201), probe_of(2401));
        let ratio = (c1 - c2) / (c2 - c3);
        let passed = d_re < 0.02 && d_im < 0.10 && (3.5..=4.5).contains(&ratio);
        CriterionResult {
            index: 5,
            name: "ringdown cross-validation",
            passed,
            details: format!(
                "fitted {:.6}{:+.6}i vs searched {:.6}{:+.6}i (rel dRe {d_re:.4}, dIm {d_im:.4}); \
                 Richardson ratio {ratio:.2}",
                mode.lambda.re, mode.lambda.im, zj.re, zj.im
            ),
        }
    }

    pub fn criterion_6(&mut self) -> CriterionResult {
        let map = self.solver.map.clone();
        let grid = uniform_grid(-self.cfg.x, self.cfg.x, self.cfg.points);
        let disc = discretize(&map, 0, &grid).unwrap();
        let init = FieldState::gaussian(&grid, 0, 0.0, 1.0, 1);
        let traj = evolve(&disc, &init, 150.0, self.cfg.time_step(), 8.0, 100).unwrap();
        let idx: Vec<usize> = (0..grid.len())
            .filter(|&i| grid[i].abs() <= self.chi.a + 1e-9)
            .collect();
        let sub: Vec<f64> = idx.iter().map(|&i| grid[i]).collect();
        let term = match expansion_term(&self.solver, Complex64::default(), 0, &self.chi, &sub, 0.01)
        {
            Ok(t) => t,
            Err(e) => {
                return CriterionResult {
                    index: 6,
                    name: "main theorem at ell = 0",
                    passed: false,
                    details: format!("zero-resonance term failed: {e}"),
                }
            }
        };
        // late-time field vs the static profile gamma r chi <r chi, u2>
        let gamma = self.solver.gamma_constant(0.02).unwrap().gamma;
        let wts = trapezoid_weights(&sub);
        let r: Vec<f64> = sub.iter().map(|&x| map.r_of_x(x).unwrap()).collect();
        let chi_s = self.chi.sample(&sub);
        let inner: f64 = idx
            .iter()
            .enumerate()
            .map(|(k, &i)| wts[k] * r[k] * chi_s[k] * init.ut[i])
            .sum();
        let last = traj.states.last().unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (k, &i) in idx.iter().enumerate() {
            let pred = gamma * r[k] * chi_s[k] * inner;
            let have = chi_s[k] * last.u[i];
            num += wts[k] * (have - pred) * (have - pred);
            den += wts[k] * pred * pred;
        }
        let rel_l2 = (num / den).sqrt();
        let rep = residual_decay(&map, &traj, &[term], &self.chi, 0.03).unwrap();
        // rate fit before the boundary-misfit floor cuts in
        let window: Vec<(f64, f64)> = rep
            .times
            .iter()
            .zip(&rep.norms)
            .filter(|(&t, _)| (70.0..=105.0).contains(&t))
            .map(|(&t, &v)| (t, v))
            .collect();
        let (slope, _, _) = log_slope(
            &window.iter().map(|p| p.0).collect::<Vec<_>>(),
            &window.iter().map(|p| p.1).collect::<Vec<_>>(),
        );
        // "late time" qualification: residual down two orders from its peak
        let peak = rep.norms.iter().cloned().fold(f64::MIN, f64::max);
        let decayed = rep.norms.last().unwrap() / peak < 1e-2;
        let passed = rel_l2 < 0.02 && decayed && -slope >= 0.03;
        CriterionResult {
            index: 6,
            name: "main theorem at ell = 0",
            passed,
            details: format!(
                "late-time rel L2 vs gamma r chi <r chi, u2>: {rel_l2:.2e} (tol 0.02); \
                 residual decayed to {:.1e} of peak; fitted rate {:.4} (floor 0.03)",
                rep.norms.last().unwrap() / peak,
                -slope
            ),
        }
    }

    pub fn criterion_7(&mut self) -> CriterionResult {
        let zj = self.ell10_zero();
        let term: Result<ExpansionTerm> = {
            let grid = uniform_grid(-self.cfg.x, self.cfg.x, self.cfg.points);
            let sub: Vec<f64> = grid
                .iter()
                .copied()
                .filter(|x| x.abs() <= self.chi.a + 1e-9)
                .collect();
            expansion_term(&self.solver, zj, 10, &self.chi, &sub, 8e-4)
        };
        let term = match term {
            Ok(t) => t,
            Err(e) => {
                return CriterionResult {
                    index: 7,
                    name: "expansion residual",
                    passed: false,
                    details: format!("string term failed: {e}"),
                }
            }
        };
        let map = self.solver.map.clone();
        let chi = self.chi;
        let traj = self.ell10_trajectory();
        let rep = residual_decay(&map, traj, &[term], &chi, 0.0).unwrap();
        let raw = residual_decay(&map, traj, &[], &chi, 0.0).unwrap();
        let fit_of = |rep: &crate::expand::ResidualReport| {
            let w: Vec<(f64, f64)> = rep
                .times
                .iter()
                .zip(&rep.norms)
                .filter(|(&t, _)| (70.0..=110.0).contains(&t))
                .map(|(&t, &v)| (t, v))
                .collect();
            log_slope(
                &w.iter().map(|p| p.0).collect::<Vec<_>>(),
                &w.iter().map(|p| p.1).collect::<Vec<_>>(),
            )
        };
        let (slope_res, _, r2_res) = fit_of(&rep);
        let (slope_raw, _, _) = fit_of(&raw);
        let ratio_at = |t_want: f64| -> f64 {
            let idx = rep
                .times
                .iter()
                .enumerate()
                .min_by(|a, b| {
                    (a.1 - t_want).abs().partial_cmp(&(b.1 - t_want).abs()).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap_or(0);
            rep.norms[idx] / raw.norms[idx].max(f64::MIN_POSITIVE)
        };
        let passed = slope_res < slope_raw - 1e-3 && r2_res > 0.98;
        CriterionResult {
            index: 7,
            name: "expansion residual",
            passed,
            details: format!(
                "residual rate {:.4} vs raw envelope rate {:.4}; log-residual R^2 = {r2_res:.4}; \
                 residual/raw {:.4} at t=70 growing to {:.4} at t=110 \
                 (linear-in-t leftover, scales like grid-spacing squared)",
                -slope_res,
                -slope_raw,
                ratio_at(70.0),
                ratio_at(110.0)
            ),
        }
    }

    pub fn criterion_8(&mut self) -> CriterionResult {
        // determinism: recompute a representative artifact and compare bytes
        let artifact = |s: &JostSolver| -> String {
            let found =
                find_resonances(s, 8, Region::new(1.25, 1.40, -0.0785, -0.004)).unwrap();
            let mut out = String::from("ell,re,im,order\n");
            for r in &found {
                out.push_str(&format!("8,{},{},{}\n", r.lambda.re, r.lambda.im, r.order));
            }
            out
        };
        let a = artifact(&self.solver);
        let b = artifact(&self.solver);
        let deterministic = a == b;
        // config round-trip identity
        let text = crate::config::serialize_config(&self.cfg);
        let round = crate::config::parse_config(&text)
            .map(|c| c == self.cfg)
            .unwrap_or(false);
        CriterionResult {
            index: 8,
            name: "determinism and round-trip",
            passed: deterministic && round,
            details: format!(
                "repeated search artifact byte-identical: {deterministic}; config \
                 serialize/parse identity: {round}"
            ),
        }
    }
}

/// x(r) by composite 16-point Gauss-Legendre quadrature of 1/alpha^2 from
/// 3M to r (oracle for the closed-form coordinate).
fn quadrature_x(p: &MetricParams, r: f64) -> f64 {
    let (lo, hi) = (3.0 * p.mass, r);
    let n_panels = 2000;
    let (nodes, weights) = crate::jost::gauss_legendre_16();
    let mut total = 0.0;
    for k in 0..n_panels {
        let a = lo + (hi - lo) * k as f64 / n_panels as f64;
        let b = lo + (hi - lo) * (k + 1) as f64 / n_panels as f64;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (x, w) in nodes.iter().zip(weights.iter()) {
            total += w * half / p.alpha2(mid + half * x);
        }
    }
    total
}
