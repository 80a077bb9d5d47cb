//! Truncated real power series in one variable, used for the exact
//! exponential expansions of the geometry near the horizons.
//!
//! A series is a `Vec<f64>` of coefficients `[c0, c1, ...]`; all
//! operations truncate to the length of the first operand.

/// c0 + c1 d + ... times b, truncated to a.len().
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().take(n - i).enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = a.to_vec();
    for (o, &bi) in out.iter_mut().zip(b.iter()) {
        *o += bi;
    }
    out
}

pub fn scale(a: &[f64], s: f64) -> Vec<f64> {
    a.iter().map(|&c| c * s).collect()
}

/// exp of a series with zero constant term, by b' = a' b.
pub fn exp(a: &[f64]) -> Vec<f64> {
    assert!(a[0] == 0.0, "exp needs a zero constant term");
    let n = a.len();
    let mut b = vec![0.0; n];
    b[0] = 1.0;
    for k in 1..n {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * a[j] * b[k - j];
        }
        b[k] = acc / k as f64;
    }
    b
}

/// ln((c + s d)/den) as a series in d; requires c > 0, den > 0, |s| = 1.
pub fn log_affine(c: f64, s: f64, den: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    out[0] = (c / den).ln();
    // ln(1 + s d / c) = sum (-1)^{k+1} (s d / c)^k / k
    let mut p = 1.0;
    for (k, o) in out.iter_mut().enumerate().skip(1) {
        p *= s / c;
        *o = -(-1.0f64).powi(k as i32) * p / k as f64;
    }
    out
}

/// 1/(r0 + s d) as a series in d.
pub fn inv_linear(r0: f64, s: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n];
    let mut p = 1.0 / r0;
    for o in out.iter_mut() {
        *o = p;
        p *= -s / r0;
    }
    out
}

/// a/b with b[0] != 0.
pub fn div(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let mut acc = a[k];
        for j in 1..=k.min(b.len() - 1) {
            acc -= b[j] * out[k - j];
        }
        out[k] = acc / b[0];
    }
    out
}

/// p(q(t)) for q with zero constant term, by Horner on series.
pub fn compose(p: &[f64], q: &[f64]) -> Vec<f64> {
    assert!(q[0] == 0.0, "composition needs q(0) = 0");
    let n = p.len();
    let mut out = vec![0.0; n];
    for &pk in p.iter().rev() {
        out = mul(&out, q);
        out[0] += pk;
    }
    out
}

pub fn derivative(p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for k in 1..p.len() {
        out[k - 1] = k as f64 * p[k];
    }
    out
}

/// Compositional inverse of f with f(0) = 0, f'(0) != 0: returns g with
/// f(g(t)) = t + O(t^n). Newton iteration in series arithmetic.
pub fn revert(f: &[f64]) -> Vec<f64> {
    assert!(f[0] == 0.0 && f[1] != 0.0);
    let n = f.len();
    let fp = derivative(f);
    let mut g = vec![0.0; n];
    g[1] = 1.0 / f[1];
    let mut id = vec![0.0; n];
    if n > 1 {
        id[1] = 1.0;
    }
    let steps = (n as f64).log2().ceil() as usize + 2;
    for _ in 0..steps {
        let fg = compose(f, &g);
        let res: Vec<f64> = fg.iter().zip(id.iter()).map(|(a, b)| a - b).collect();
        let fpg = compose(&fp, &g);
        let corr = div(&res, &fpg);
        for (gi, ci) in g.iter_mut().zip(corr.iter()) {
            *gi -= ci;
        }
    }
    g
}

/// Horner evaluation.
pub fn eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * t + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_matches_scalar() {
        // exp(t - t^2/2) around 0
        let mut a = vec![0.0; 12];
        a[1] = 1.0;
        a[2] = -0.5;
        let e = exp(&a);
        let t = 0.1;
        assert_relative_eq!(eval(&e, t), (t - t * t / 2.0).exp(), max_relative = 1e-12);
    }

    #[test]
    fn log_and_inv_match_scalar() {
        let n = 16;
        let l = log_affine(2.0, -1.0, 5.0, n);
        let i = inv_linear(3.0, 1.0, n);
        let t = 0.05;
        assert_relative_eq!(eval(&l, t), ((2.0 - t) / 5.0).ln(), max_relative = 1e-12);
        assert_relative_eq!(eval(&i, t), 1.0 / (3.0 + t), max_relative = 1e-12);
    }

    #[test]
    fn revert_round_trips() {
        // f = t * exp(t): classic Lambert-type reversion
        let n = 20;
        let mut a = vec![0.0; n];
        a[1] = 1.0;
        let e = exp(&a);
        let mut f = vec![0.0; n];
        f[1..].copy_from_slice(&e[..n - 1]);
        let g = revert(&f);
        let xi = 0.02;
        let d = eval(&g, xi);
        assert_relative_eq!(d * d.exp(), xi, max_relative = 1e-12);
    }

    #[test]
    fn division_inverts_multiplication() {
        let a = vec![1.0, 2.0, -0.3, 0.07, 0.0, 1.5];
        let b = vec![2.0, -1.0, 0.4, 0.0, 0.2, 0.0];
        let q = div(&mul(&a, &b), &b);
        for (x, y) in q.iter().zip(a.iter()) {
            assert_relative_eq!(x, y, epsilon = 1e-12);
        }
    }
}
