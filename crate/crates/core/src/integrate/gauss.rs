//! Fixed Gauss rules.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut out = vec![(0.0, 0.0); n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = ((2 * j - 1) as f64 * z * p2 - (j - 1) as f64 * p3) / j as f64;
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        out[i] = (-z, w);
        out[n - 1 - i] = (z, w);
    }
    out
}

/// Gauss-Laguerre nodes and weights for `int_0^inf f(x) e^{-x} dx`.
pub fn laguerre(n: usize) -> Vec<(f64, f64)> {
    laguerre_generalized(n, 0.0)
}

/// Generalized Gauss-Laguerre rule for `int_0^inf f(x) x^a e^{-x} dx`, `a > -1`.
pub fn laguerre_generalized(n: usize, a: f64) -> Vec<(f64, f64)> {
    assert!(n >= 1 && a > -1.0);
    let nf = n as f64;
    let log_norm = ln_gamma(a + nf) - ln_gamma(nf);
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        z = match i {
            0 => (1.0 + a) * (3.0 + 0.92 * a) / (1.0 + 2.4 * nf + 1.8 * a),
            1 => z + (15.0 + 6.25 * a) / (1.0 + 0.9 * a + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai) + 1.26 * ai * a / (1.0 + 3.5 * ai)) * (z - out[i - 2].0)
                    / (1.0 + 0.3 * a)
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0 + a - z) * p2 - (jf - 1.0 + a) * p3) / jf;
            }
            pp = (nf * p1 - (nf + a) * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs() {
                break;
            }
        }
        out.push((z, -log_norm.exp() / (pp * nf * p2)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn legendre_integrates_polynomials() {
        for n in [1, 2, 5, 16, 33] {
            let rule = legendre(n);
            let total: f64 = rule.iter().map(|r| r.1).sum();
            assert!((total - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg + 1) as f64 } else { 0.0 };
            let got: f64 = rule.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((got - exact).abs() < 1e-12, "n={n}");
            let even = 2 * (n - 1);
            let got: f64 = rule.iter().map(|(x, w)| w * x.powi(even as i32)).sum();
            assert!((got - 2.0 / (even + 1) as f64).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn laguerre_integrates_factorials() {
        for n in [1, 4, 8, 16, 32, 64] {
            let rule = laguerre(n);
            let mut fact = 1.0;
            for k in 0..(2 * n).min(20) {
                if k > 0 {
                    fact *= k as f64;
                }
                let got: f64 = rule.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                assert!((got / fact - 1.0).abs() < 1e-10, "n={n} k={k} got {got}");
            }
            assert!(rule.windows(2).all(|p| p[0].0 < p[1].0));
        }
    }

    #[test]
    fn generalized_laguerre_moments() {
        for a in [0.5, 1.0, 2.0, 3.0] {
            for n in [4, 8, 16, 32, 64] {
                let rule = laguerre_generalized(n, a);
                for k in 0..(2 * n).min(12) {
                    let exact = gamma(a + k as f64 + 1.0);
                    let got: f64 = rule.iter().map(|(x, w)| w * x.powi(k as i32)).sum();
                    assert!((got / exact - 1.0).abs() < 1e-10, "a={a} n={n} k={k}");
                }
            }
        }
    }
}
