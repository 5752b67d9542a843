//! Spherical mean S, spherical max M, volume mean V, radial profiles and Laplacian mass.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geometry::{affine, Pt};
use crate::kernels::{ProfileKind, RadialProfile, RieszKernel};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Statistic {
    S,
    M,
    V,
}

/// Average of `u` over the sphere of radius `r` around `x`.
pub fn spherical_mean(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> Result<f64> {
    u.check_ball(x, r)?;
    Ok(sphere_average(u, x, r, quad))
}

pub(crate) fn sphere_average(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> f64 {
    let rule = quad.sphere(u.dim());
    rule.iter().map(|(y, w)| w * u.eval_masked(&affine(x, r, y))).sum()
}

/// Average of `u` over the ball of radius `r` around `x`.
pub fn volume_mean(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> Result<f64> {
    u.check_ball(x, r)?;
    let rule = quad.ball(u.dim());
    Ok(rule.iter().map(|(y, w)| w * u.eval_masked(&affine(x, r, y))).sum())
}

/// Supremum of `u` over the closed ball of radius `r` around `x`: a dense sample of the sphere
/// and ball, followed by projected pattern search from the best candidates.
pub fn spherical_max(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> Result<f64> {
    u.check_ball(x, r)?;
    Ok(ball_sup(u, x, r, quad))
}

pub(crate) fn ball_sup(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> f64 {
    let n = u.dim();
    let sphere = quad.sphere(n);
    let ball = quad.ball(n);
    let keep = quad.max_candidates.max(1);
    let mut top: Vec<(f64, Pt)> = Vec::with_capacity(keep + 1);
    let mut offer = |v: f64, y: &[f64]| {
        if !(v > f64::NEG_INFINITY) {
            return;
        }
        if top.len() < keep || v > top[top.len() - 1].0 {
            let pos = top.partition_point(|c| c.0 >= v);
            top.insert(pos, (v, y.iter().copied().collect()));
            top.truncate(keep);
        }
    };
    for (y, _) in sphere.iter() {
        offer(u.eval(&affine(x, r, y)), y);
    }
    for (y, _) in ball.iter() {
        offer(u.eval(&affine(x, r, y)), y);
    }
    if top.is_empty() {
        return f64::NEG_INFINITY;
    }
    let spacing = (2.0 / (sphere.len() as f64).powf(1.0 / (n.max(2) - 1) as f64)).min(0.5);
    let mut best = f64::NEG_INFINITY;
    for (v0, y0) in top {
        let v = pattern_search(|y| u.eval(&affine(x, r, y)), y0, v0, spacing);
        if v > best {
            best = v;
        }
    }
    best
}

/// Maximizes `f` over the closed unit ball by coordinate pattern search with radial projection.
fn pattern_search(f: impl Fn(&[f64]) -> f64, mut y: Pt, mut v: f64, mut step: f64) -> f64 {
    let n = y.len();
    let mut evals = 0usize;
    while step > 1e-9 && evals < 4000 {
        let mut improved = false;
        for i in 0..n {
            for s in [1.0, -1.0] {
                let mut z = y.clone();
                z[i] += s * step;
                let l = crate::geometry::norm(&z);
                if l > 1.0 {
                    for c in z.iter_mut() {
                        *c /= l;
                    }
                }
                let fz = f(&z);
                evals += 1;
                if fz > v {
                    v = fz;
                    y = z;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    v
}

pub fn statistic(u: &ScalarField, x: &[f64], r: f64, which: Statistic, quad: &QuadratureSpec) -> Result<f64> {
    match which {
        Statistic::S => spherical_mean(u, x, r, quad),
        Statistic::M => spherical_max(u, x, r, quad),
        Statistic::V => volume_mean(u, x, r, quad),
    }
}

/// Statistic sampled on increasing radii.
pub fn profile(u: &ScalarField, x: &[f64], radii: &[f64], which: Statistic, quad: &QuadratureSpec) -> Result<RadialProfile> {
    let values = radii.iter().map(|&r| statistic(u, x, r, which, quad)).collect::<Result<Vec<_>>>()?;
    let kind = match which {
        Statistic::S => ProfileKind::S,
        Statistic::M => ProfileKind::M,
        Statistic::V => ProfileKind::V,
    };
    RadialProfile::new(radii.to_vec(), values, kind)
}

/// Left derivative of `f` at `r` in the K coordinate, `f'_-(r) / K'(r)`: the quotient over
/// `[r - delta, r]` with `delta = r/8`, Richardson-extrapolated once.
pub fn left_kernel_derivative(f: impl Fn(f64) -> f64, r: f64, kernel: &RieszKernel) -> f64 {
    let delta = r / 8.0;
    let fr = f(r);
    let kr = kernel.eval(r);
    let q = |d: f64| (fr - f(r - d)) / (kr - kernel.eval(r - d));
    2.0 * q(delta / 2.0) - q(delta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplacianMass {
    pub mass: f64,
    /// Set when the estimate is negative beyond tolerance.
    pub non_subharmonic: bool,
}

/// Tolerance below zero tolerated before flagging a mass estimate.
pub const MASS_TOLERANCE: f64 = 1e-6;

/// Laplacian mass in `B_r(x)` normalized so that `K_n(|.|)` carries unit mass.
pub fn laplacian_mass(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> Result<LaplacianMass> {
    u.check_ball(x, r)?;
    let kernel = RieszKernel::new(u.dim() as f64)?;
    let mass = left_kernel_derivative(|t| sphere_average(u, x, t, quad), r, &kernel);
    if !mass.is_finite() {
        return Err(Error::Domain("Laplacian mass is not finite".into()));
    }
    let scale = sphere_average(u, x, r, quad).abs().max(1.0);
    Ok(LaplacianMass { mass, non_subharmonic: mass < -MASS_TOLERANCE * scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{norm, Ball};

    fn radial(n: usize, p: f64) -> ScalarField {
        let k = RieszKernel::new(p).unwrap();
        ScalarField::analytic(n, Ball::centered(n, 3.0), p, move |x| k.eval(norm(x))).with_singular(norm)
    }

    #[test]
    fn radial_kernel_statistics() {
        let q = QuadratureSpec::default();
        let u = radial(3, 3.0);
        for r in [0.1, 0.5, 1.0] {
            assert!((spherical_mean(&u, &[0.0; 3], r, &q).unwrap() + 1.0 / r).abs() < 1e-12);
            assert!((spherical_max(&u, &[0.0; 3], r, &q).unwrap() + 1.0 / r).abs() < 1e-12);
        }
    }

    #[test]
    fn harmonic_and_quadratic_means() {
        let q = QuadratureSpec::default();
        for n in [2usize, 3, 4] {
            let lin = ScalarField::analytic(n, Ball::centered(n, 2.0), 2.0, |x| x[0]);
            assert!(spherical_mean(&lin, &vec![0.0; n], 0.7, &q).unwrap().abs() < 1e-12);
            let sq = ScalarField::analytic(n, Ball::centered(n, 2.0), 2.0, |x| crate::geometry::dot(x, x));
            let r = 0.6;
            let s = spherical_mean(&sq, &vec![0.0; n], r, &q).unwrap();
            let v = volume_mean(&sq, &vec![0.0; n], r, &q).unwrap();
            assert!((s - r * r).abs() < 1e-12);
            let exact = n as f64 * r * r / (n as f64 + 2.0);
            assert!((v - exact).abs() < 0.01 * exact);
            let m = spherical_max(&sq, &vec![0.0; n], r, &q).unwrap();
            assert!((m - r * r).abs() < 1e-9);
        }
    }

    #[test]
    fn max_of_off_center_kernel() {
        let q = QuadratureSpec::default();
        let k = RieszKernel::new(3.0).unwrap();
        let u =
            ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, move |x| k.eval(crate::geometry::dist(x, &[1.0, 0.0, 0.0])));
        // sup over B_{0.5}(0) of -1/|x - e1| is attained at -0.5 e1
        let m = spherical_max(&u, &[0.0; 3], 0.5, &q).unwrap();
        assert!((m + 2.0 / 3.0).abs() < 1e-9, "{m}");
    }

    #[test]
    fn mass_calibration() {
        let q = QuadratureSpec::default();
        for n in [3usize, 4] {
            let u = radial(n, n as f64);
            for r in [0.2, 0.9] {
                let m = laplacian_mass(&u, &vec![0.0; n], r, &q).unwrap();
                assert!((m.mass - 1.0).abs() < 0.02, "n={n} r={r} {m:?}");
            }
        }
        let lin = ScalarField::analytic(3, Ball::centered(3, 2.0), 3.0, |x| x[0]);
        assert!(laplacian_mass(&lin, &[0.0; 3], 0.5, &q).unwrap().mass.abs() < 1e-9);
        let u = radial(4, 3.0);
        let a = laplacian_mass(&u, &[0.0; 4], 0.4, &q).unwrap().mass;
        let b = laplacian_mass(&u, &[0.0; 4], 0.2, &q).unwrap().mass;
        assert!((a / b - 2.0).abs() < 0.1, "{}", a / b);
    }

    #[test]
    fn volume_mean_is_radial_average_of_spheres() {
        let q = QuadratureSpec::default();
        let k = RieszKernel::new(3.0).unwrap();
        let u = ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, move |x| {
            k.eval(crate::geometry::dist(x, &[0.3, 0.0, 0.0])) + x[1] * x[1]
        });
        let x = [0.1, 0.2, 0.0];
        let r = 0.8;
        let v = volume_mean(&u, &x, r, &q).unwrap();
        let (t, w) = crate::quadrature::gauss_legendre(24);
        let s: f64 = t
            .iter()
            .zip(&w)
            .map(|(ti, wi)| {
                let rho = (ti + 1.0) / 2.0;
                0.5 * wi * 3.0 * rho * rho * spherical_mean(&u, &x, r * rho, &q).unwrap()
            })
            .sum();
        assert!((v - s).abs() < 0.01 * s.abs(), "{v} vs {s}");
    }
}
