//! Green kernel of (P_l - lambda^2) from the Jost solutions, discretized
//! cut-off resolvent norms, residue projectors, and the resolvent of the
//! first-order system built from the P-resolvent.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jost::{JostSolver, Side};

/// Smooth bump: identically 1 on [-a/2, a/2], smooth monotone decay to 0
/// at |x| = a, zero outside.
#[derive(Debug, Clone, Copy)]
pub struct CutoffFunction {
    pub a: f64,
}

impl CutoffFunction {
    pub fn new(a: f64) -> Self {
        CutoffFunction { a }
    }

    /// Companion wider cutoff: support [-2a, 2a], identically 1 on [-a, a],
    /// so chi_wide * chi = chi.
    pub fn widened(&self) -> Self {
        CutoffFunction { a: 2.0 * self.a }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let s = x.abs();
        if s <= 0.5 * self.a {
            1.0
        } else if s >= self.a {
            0.0
        } else {
            // C^infty transition via f(u) = exp(-1/u)
            let t = (s - 0.5 * self.a) / (0.5 * self.a); // 0 -> 1 across the decay
            let f = |u: f64| if u > 0.0 { (-1.0 / u).exp() } else { 0.0 };
            f(1.0 - t) / (f(1.0 - t) + f(t))
        }
    }

    pub fn sample(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&x| self.eval(x)).collect()
    }
}

/// Uniform grid of n points on [x0, x1], endpoints included.
pub fn uniform_grid(x0: f64, x1: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n)
        .map(|i| x0 + (x1 - x0) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Jost data needed to build or apply the Green kernel at one lambda.
#[derive(Debug, Clone)]
pub struct GreenData {
    pub grid: Vec<f64>,
    pub e_plus: Vec<Complex64>,
    pub e_minus: Vec<Complex64>,
    pub w: Complex64,
    pub lambda: Complex64,
    pub ell: u32,
}

/// Dense kernel matrix R(x_i, y_j) on the grid of the data.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub grid: Vec<f64>,
    pub values: DMatrix<Complex64>,
    pub lambda: Complex64,
    pub ell: u32,
    /// Wronskian at lambda; |w|/<lambda> small means the kernel is built
    /// near a resonance and is badly conditioned.
    pub wronskian: Complex64,
}

pub fn green_data(
    solver: &JostSolver,
    lambda: Complex64,
    ell: u32,
    grid: &[f64],
) -> Result<GreenData> {
    let plus = solver.jost(Side::Plus, lambda, ell, grid)?;
    let minus = solver.jost(Side::Minus, lambda, ell, grid)?;
    // matching index nearest the origin: reduced functions are O(1) there
    let i0 = grid
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap();
    let w = crate::jost::wronskian_from_reduced(
        lambda,
        minus.m[i0],
        minus.m_prime[i0],
        plus.m[i0],
        plus.m_prime[i0],
    );
    if w.norm() < 1e-12 * lambda.norm().max(1.0) {
        return Err(Error::Consistency(format!(
            "lambda = {lambda} is a resonance (|w| = {}); the kernel does not exist",
            w.norm()
        )));
    }
    let e_plus = (0..grid.len()).map(|i| plus.e(i)).collect();
    let e_minus = (0..grid.len()).map(|i| minus.e(i)).collect();
    Ok(GreenData {
        grid: grid.to_vec(),
        e_plus,
        e_minus,
        w,
        lambda,
        ell,
    })
}

impl GreenData {
    /// R(x, y) = e_+(max) e_-(min) / w.
    pub fn kernel(&self) -> KernelMatrix {
        let n = self.grid.len();
        let mut values = DMatrix::from_element(n, n, Complex64::default());
        for i in 0..n {
            for j in 0..n {
                let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
                values[(i, j)] = self.e_plus[hi] * self.e_minus[lo] / self.w;
            }
        }
        KernelMatrix {
            grid: self.grid.clone(),
            values,
            lambda: self.lambda,
            ell: self.ell,
            wronskian: self.w,
        }
    }

    /// (R f)(x_i) by trapezoid prefix sums; O(n) per application.
    pub fn apply(&self, f: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid.len();
        assert_eq!(f.len(), n);
        let h = |i: usize| self.grid[i + 1] - self.grid[i];
        // I_lo[i] = int_{y <= x_i} e_- f, I_hi[i] = int_{y >= x_i} e_+ f
        let mut lo = vec![Complex64::default(); n];
        for i in 1..n {
            lo[i] = lo[i - 1]
                + 0.5 * h(i - 1) * (self.e_minus[i - 1] * f[i - 1] + self.e_minus[i] * f[i]);
        }
        let mut hi = vec![Complex64::default(); n];
        for i in (0..n - 1).rev() {
            hi[i] =
                hi[i + 1] + 0.5 * h(i) * (self.e_plus[i] * f[i] + self.e_plus[i + 1] * f[i + 1]);
        }
        (0..n)
            .map(|i| (self.e_plus[i] * lo[i] + self.e_minus[i] * hi[i]) / self.w)
            .collect()
    }
}

/// Largest singular value by power iteration on M^H M (deterministic
/// start; adequate for norm estimates).
pub fn top_singular_value(m: &DMatrix<Complex64>) -> f64 {
    singular_value_deflated(m, None).0
}

/// (sigma, right singular vector); if `deflate` is given, iterates in its
/// orthogonal complement, yielding the second singular value.
fn singular_value_deflated(
    m: &DMatrix<Complex64>,
    deflate: Option<&nalgebra::DVector<Complex64>>,
) -> (f64, nalgebra::DVector<Complex64>) {
    let n = m.ncols();
    let mut v = nalgebra::DVector::from_fn(n, |i, _| {
        Complex64::new(1.0 + (i as f64 % 7.0) * 0.1, 0.3 - (i as f64 % 3.0) * 0.1)
    });
    let orth = |v: &mut nalgebra::DVector<Complex64>| {
        if let Some(d) = deflate {
            let c = d.dotc(v);
            *v -= d * c;
        }
    };
    orth(&mut v);
    v /= Complex64::new(v.norm(), 0.0);
    let mut sigma = 0.0f64;
    for _ in 0..300 {
        let mut w = m.adjoint() * (m * &v);
        orth(&mut w);
        let s = w.norm().sqrt();
        w /= Complex64::new(w.norm(), 0.0);
        let delta = (s - sigma).abs();
        sigma = s;
        v = w;
        if delta < 1e-12 * sigma.max(1e-300) {
            break;
        }
    }
    (sigma, v)
}

/// Second singular value (for numerical-rank checks).
pub fn second_singular_value(m: &DMatrix<Complex64>) -> f64 {
    let (_, v1) = singular_value_deflated(m, None);
    singular_value_deflated(m, Some(&v1)).0
}

/// Trapezoid quadrature weights of a (possibly nonuniform) grid.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let h = grid[i + 1] - grid[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// L^2-operator norm of chi R(lambda) chi, approximated as the largest
/// singular value of the quadrature-symmetrized matrix
/// sqrt(w_i) chi_i R_ij chi_j sqrt(w_j).
pub fn cutoff_resolvent_norm(
    solver: &JostSolver,
    lambda: Complex64,
    ell: u32,
    chi: &CutoffFunction,
    n: usize,
) -> Result<f64> {
    let grid = uniform_grid(-chi.a, chi.a, n);
    let data = green_data(solver, lambda, ell, &grid)?;
    let kern = data.kernel();
    Ok(weighted_norm_of(&kern.values, &grid, &chi.sample(&grid)))
}

fn weighted_norm_of(values: &DMatrix<Complex64>, grid: &[f64], chi: &[f64]) -> f64 {
    let wts = trapezoid_weights(grid);
    let n = grid.len();
    let mut m = values.clone();
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] *= wts[i].sqrt() * chi[i] * chi[j] * wts[j].sqrt();
        }
    }
    top_singular_value(&m)
}

/// The four blocks of the residue projector
/// pi_j = (-1/2 pi i) oint chi (L - lambda)^{-1} chi dlambda
/// around a simple resonance, by 64-point trapezoid contour quadrature.
///
/// With R = (P - lambda^2)^{-1}, the sandwiched blocks are
/// [lambda chi R chi, i chi R chi; -i chi (1 + lambda^2 R) chi, lambda chi R chi].
#[derive(Debug, Clone)]
pub struct ProjectorBlocks {
    pub grid: Vec<f64>,
    pub b11: DMatrix<Complex64>,
    pub b12: DMatrix<Complex64>,
    pub b21: DMatrix<Complex64>,
    pub b22: DMatrix<Complex64>,
    pub lambda_j: Complex64,
    pub ell: u32,
    pub radius: f64,
}

pub fn projector(
    solver: &JostSolver,
    lambda_j: Complex64,
    ell: u32,
    chi: &CutoffFunction,
    n: usize,
    radius: f64,
) -> Result<ProjectorBlocks> {
    let grid = uniform_grid(-chi.a, chi.a, n);
    projector_on_grid(solver, lambda_j, ell, chi, &grid, radius)
}

/// Same as [`projector`], on a caller-supplied grid (so expansion terms
/// can live on a sub-grid of an evolution grid).
pub fn projector_on_grid(
    solver: &JostSolver,
    lambda_j: Complex64,
    ell: u32,
    chi: &CutoffFunction,
    grid: &[f64],
    radius: f64,
) -> Result<ProjectorBlocks> {
    if lambda_j.im - radius <= -solver.strip_limit {
        return Err(Error::ContourDomain {
            center: format!("{lambda_j}"),
            radius,
            reason: format!("circle leaves the strip (limit {})", solver.strip_limit),
        });
    }
    let n = grid.len();
    let chi_s = chi.sample(grid);
    let zero = DMatrix::from_element(n, n, Complex64::default());
    let (mut b11, mut b12, mut b21, mut b22) =
        (zero.clone(), zero.clone(), zero.clone(), zero);
    let quad_n = 64;
    for k in 0..quad_n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / quad_n as f64;
        let dz = radius * Complex64::new(th.cos(), th.sin());
        let lam = lambda_j + dz;
        let data = green_data(solver, lam, ell, grid)?;
        let r = data.kernel().values;
        // (-1/2 pi i) oint B dlambda, dlambda = i dz dth -> -(1/quad_n) sum B dz
        let cw = -dz / quad_n as f64;
        for i in 0..n {
            for j in 0..n {
                let rij = r[(i, j)] * chi_s[i] * chi_s[j];
                b11[(i, j)] += cw * lam * rij;
                b12[(i, j)] += cw * Complex64::i() * rij;
                b21[(i, j)] += cw * (-Complex64::i()) * lam * lam * rij;
                // identity part of the (2,1) block is analytic: no residue
                b22[(i, j)] += cw * lam * rij;
            }
        }
    }
    Ok(ProjectorBlocks {
        grid: grid.to_vec(),
        b11,
        b12,
        b21,
        b22,
        lambda_j,
        ell,
        radius,
    })
}

/// chi (L - z)^{-1} chi applied to a two-component state (u0, u1):
/// v0 = chi R (z chi u0 + i chi u1),
/// v1 = -i chi^2 u0 + chi (-i z^2 R(chi u0) + z R(chi u1)).
pub fn l_resolvent_apply(
    solver: &JostSolver,
    z: Complex64,
    ell: u32,
    chi: &CutoffFunction,
    grid: &[f64],
    u0: &[Complex64],
    u1: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let data = green_data(solver, z, ell, grid)?;
    let chi_s = chi.sample(grid);
    let cu0: Vec<Complex64> = u0.iter().zip(&chi_s).map(|(u, c)| u * c).collect();
    let cu1: Vec<Complex64> = u1.iter().zip(&chi_s).map(|(u, c)| u * c).collect();
    let g = data.apply(&cu0);
    let h = data.apply(&cu1);
    let mut v0 = vec![Complex64::default(); grid.len()];
    let mut v1 = vec![Complex64::default(); grid.len()];
    for i in 0..grid.len() {
        v0[i] = chi_s[i] * (z * g[i] + Complex64::i() * h[i]);
        v1[i] = -Complex64::i() * chi_s[i] * cu0[i]
            + chi_s[i] * (-Complex64::i() * z * z * g[i] + z * h[i]);
    }
    Ok((v0, v1))
}
