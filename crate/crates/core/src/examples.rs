//! Ground-truth fields with known singular structure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{distance_to_points, Grid, ScalarField};
use crate::geometry::{dist, norm, Ball, PlaneFrame};
use crate::kernels::RieszKernel;

/// Radius of the default domain ball `B_R(0)` of example fields.
pub const DOMAIN_RADIUS: f64 = 3.0;

fn domain(n: usize) -> Ball {
    Ball::centered(n, DOMAIN_RADIUS)
}

fn check_p(p: f64, n: usize) -> Result<()> {
    if !(p >= 2.0) {
        return Err(Error::UnsupportedCharacteristic(p));
    }
    if p > n as f64 {
        return Err(Error::InvalidInput(format!("K_{p} is not subharmonic in R^{n}: the Laplacian changes sign for p > n")));
    }
    Ok(())
}

/// `u(x) = sum_i w_i K_p(|x - x_i|)`.
pub fn riesz_sum(centers: &[Vec<f64>], weights: &[f64], p: f64, n: usize) -> Result<ScalarField> {
    check_p(p, n)?;
    if centers.len() != weights.len() {
        return Err(Error::Dimension("one weight per center".into()));
    }
    if centers.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension(format!("centers must lie in R^{n}")));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    for (i, a) in centers.iter().enumerate() {
        if centers[..i].iter().any(|b| dist(a, b) == 0.0) {
            return Err(Error::InvalidInput("centers must be distinct".into()));
        }
    }
    if centers.is_empty() {
        return Ok(ScalarField::zero(n, domain(n), p).with_label("riesz_sum(empty)"));
    }
    let kernel = RieszKernel::new(p)?;
    let cs = centers.to_vec();
    let ws = weights.to_vec();
    Ok(ScalarField::analytic(n, domain(n), p, move |x| cs.iter().zip(&ws).map(|(c, w)| w * kernel.eval(dist(x, c))).sum())
        .with_singular(distance_to_points(centers))
        .with_label(format!("riesz_sum(m={}, p={p}, n={n})", centers.len())))
}

/// `theta * K_p(|x - center|)` without the subharmonicity range check on `p`.
pub fn radial_kernel(n: usize, p: f64, theta: f64, center: &[f64]) -> Result<ScalarField> {
    let kernel = RieszKernel::new(p)?;
    if center.len() != n {
        return Err(Error::Dimension(format!("center must lie in R^{n}")));
    }
    let c = center.to_vec();
    Ok(ScalarField::analytic(n, domain(n), p, move |x| theta * kernel.eval(dist(x, &c)))
        .with_singular(distance_to_points(&[center.to_vec()]))
        .with_label(format!("{theta}*K_{p}(|x|) in R^{n}")))
}

/// `K_p(|x|) + K_p(|x - e_1|)` in R^n.
pub fn kernel_pair(n: usize, p: f64) -> Result<ScalarField> {
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    riesz_sum(&[vec![0.0; n], e1], &[1.0, 1.0], p, n)
}

/// `u(x) = K_p(dist(x, V))` with `dim V = n - p`.
pub fn plane_kernel(v: &PlaneFrame, p: f64) -> Result<ScalarField> {
    let n = v.n;
    if p.fract() != 0.0 || v.k() as f64 != n as f64 - p {
        return Err(Error::Dimension(format!("plane of dimension {} in R^{n} needs p = {}", v.k(), n - v.k())));
    }
    check_p(p, n)?;
    let kernel = RieszKernel::new(p)?;
    let plane = v.clone();
    let sing = v.clone();
    Ok(ScalarField::analytic(n, domain(n), p, move |x| kernel.eval(plane.distance(x)))
        .with_singular(move |x| sing.distance(x))
        .with_label(format!("plane_kernel(k={}, p={p}, n={n})", v.k())))
}

/// Term `c * z^alpha` of a complex polynomial in `m` variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMonomial {
    pub re: f64,
    pub im: f64,
    pub exponents: Vec<u32>,
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cpow(z: (f64, f64), k: u32) -> (f64, f64) {
    (0..k).fold((1.0, 0.0), |acc, _| cmul(acc, z))
}

/// `u(z) = log |P(z)|` on R^{2m}, with `z_j = x_{2j-1} + i x_{2j}`.
pub fn log_modulus(poly: &[ComplexMonomial], m: usize) -> Result<ScalarField> {
    if m == 0 || poly.iter().any(|t| t.exponents.len() != m) {
        return Err(Error::Dimension(format!("monomials need {m} exponents")));
    }
    let terms: Vec<ComplexMonomial> = poly.iter().filter(|t| t.re != 0.0 || t.im != 0.0).cloned().collect();
    if terms.is_empty() {
        return Err(Error::InvalidInput("polynomial is identically zero".into()));
    }
    let n = 2 * m;
    Ok(ScalarField::analytic(n, domain(n), 2.0, move |x| {
        let mut acc = (0.0, 0.0);
        for t in &terms {
            let mut v = (t.re, t.im);
            for (j, &e) in t.exponents.iter().enumerate() {
                if e > 0 {
                    v = cmul(v, cpow((x[2 * j], x[2 * j + 1]), e));
                }
            }
            acc.0 += v.0;
            acc.1 += v.1;
        }
        0.5 * (acc.0 * acc.0 + acc.1 * acc.1).ln()
    })
    .with_label(format!("log_modulus(m={m}, terms={})", poly.len())))
}

/// Term `c * x^alpha` of a real polynomial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub exponents: Vec<u32>,
}

/// Laplacian of a polynomial, as a list of monomials with merged exponents.
pub fn polynomial_laplacian(poly: &[Monomial]) -> Vec<Monomial> {
    let mut out: Vec<Monomial> = Vec::new();
    for t in poly {
        for (i, &e) in t.exponents.iter().enumerate() {
            if e >= 2 {
                let mut ex = t.exponents.clone();
                ex[i] -= 2;
                let c = t.coef * (e * (e - 1)) as f64;
                match out.iter_mut().find(|m| m.exponents == ex) {
                    Some(m) => m.coef += c,
                    None => out.push(Monomial { coef: c, exponents: ex }),
                }
            }
        }
    }
    out.retain(|m| m.coef.abs() > 1e-12);
    out
}

fn eval_poly(poly: &[Monomial], x: &[f64]) -> f64 {
    poly.iter().map(|t| t.coef * t.exponents.iter().zip(x).map(|(&e, xi)| xi.powi(e as i32)).product::<f64>()).sum()
}

/// `u = h + w K_p(|x - center|)` with `h` a harmonic polynomial of degree at most 3.
pub fn harmonic_plus_kernel(h: &[Monomial], center: &[f64], weight: f64, p: f64) -> Result<ScalarField> {
    let n = center.len();
    check_p(p, n)?;
    if h.iter().any(|t| t.exponents.len() != n) {
        return Err(Error::Dimension(format!("monomials need {n} exponents")));
    }
    if h.iter().any(|t| t.exponents.iter().sum::<u32>() > 3) {
        return Err(Error::InvalidInput("harmonic part must have degree at most 3".into()));
    }
    if !polynomial_laplacian(h).is_empty() {
        return Err(Error::InvalidInput("polynomial part is not harmonic".into()));
    }
    if !(weight >= 0.0) {
        return Err(Error::InvalidInput("kernel weight must be nonnegative".into()));
    }
    let kernel = RieszKernel::new(p)?;
    let poly = h.to_vec();
    let c = center.to_vec();
    let field = ScalarField::analytic(n, domain(n), p, move |x| {
        let k = if weight == 0.0 { 0.0 } else { weight * kernel.eval(dist(x, &c)) };
        eval_poly(&poly, x) + k
    })
    .with_label(format!("harmonic_plus_kernel(w={weight}, p={p}, n={n})"));
    Ok(if weight > 0.0 { field.with_singular(distance_to_points(&[center.to_vec()])) } else { field })
}

/// Grid-backed copy of `u` sampled on `resolution` points per axis over `ball`.
pub fn grid_sample(u: &ScalarField, resolution: usize, ball: &Ball) -> Result<ScalarField> {
    let grid = Grid::sample(u, resolution, ball)?;
    Ok(ScalarField::from_grid(grid, u.p()).with_label(format!("grid({})", u.label())))
}

/// Two-point homogeneous field `|y|^{2-p} g(y/|y|)` (or `log|y| + g` for p = 2), where `y` is the
/// component of `x` orthogonal to `span(invariant)` and `g` is a smooth nonpositive profile.
/// Subharmonicity needs more than `p` transverse directions.
pub fn invariant_cone_field(n: usize, p: f64, invariant: &PlaneFrame) -> Result<ScalarField> {
    if invariant.n != n {
        return Err(Error::Dimension("invariant plane lives in another dimension".into()));
    }
    if !(p >= 2.0) {
        return Err(Error::UnsupportedCharacteristic(p));
    }
    if ((n - invariant.k()) as f64) <= p {
        return Err(Error::Dimension(format!("{} transverse directions do not exceed p = {p}", n - invariant.k())));
    }
    let comp = invariant.complement();
    let plane = invariant.clone();
    let sing = invariant.clone();
    Ok(ScalarField::analytic(n, domain(n), p, move |x| {
        let y = plane.orth(x);
        let r = norm(&y);
        let c0 = crate::geometry::dot(&y, &comp[0]) / r;
        let c1 = crate::geometry::dot(&y, &comp[1]) / r;
        let g = -1.0 - 0.3 * c0 * c0 + 0.2 * c0 * c1;
        if p == 2.0 {
            r.ln() + g + 0.9
        } else {
            g * r.powf(2.0 - p)
        }
    })
    .with_singular(move |x| sing.distance(x))
    .with_label(format!("cone_field(k={}, p={p}, n={n})", invariant.k())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn riesz_sum_evaluates() {
        let u = riesz_sum(&[vec![0.0; 3]], &[1.0], 3.0, 3).unwrap();
        assert_eq!(u.evaluate(&[1.0, 0.0, 0.0]).unwrap(), -1.0);
        let z = riesz_sum(&[], &[], 3.0, 3).unwrap();
        assert_eq!(z.evaluate(&[0.5, 0.1, 0.0]).unwrap(), 0.0);
        assert!(riesz_sum(&[vec![0.0; 3]], &[1.0], 4.0, 3).is_err());
        assert!(riesz_sum(&[vec![0.0; 3], vec![0.0; 3]], &[1.0, 1.0], 3.0, 3).is_err());
    }

    #[test]
    fn plane_kernel_shapes() {
        let v = PlaneFrame::coordinate(4, &[3]);
        let u = plane_kernel(&v, 3.0).unwrap();
        assert!((u.eval(&[0.5, 0.0, 0.0, 7.0]) + 2.0).abs() < 1e-14);
        assert!(plane_kernel(&v, 2.0).is_err());
        let point = plane_kernel(&PlaneFrame::zero(3), 3.0).unwrap();
        assert!((point.eval(&[0.0, 0.5, 0.0]) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn plane_kernel_is_harmonic_off_plane() {
        let v = PlaneFrame::coordinate(4, &[3]);
        let u = plane_kernel(&v, 3.0).unwrap();
        let x = [0.3, -0.2, 0.4, 0.1];
        let h = 1e-3;
        let mut lap = 0.0;
        for i in 0..4 {
            let mut a = x;
            let mut b = x;
            a[i] += h;
            b[i] -= h;
            lap += (u.eval(&a) - 2.0 * u.eval(&x) + u.eval(&b)) / (h * h);
        }
        assert!(lap.abs() < 1e-4, "{lap}");
    }

    #[test]
    fn log_modulus_product() {
        let p = vec![ComplexMonomial { re: 1.0, im: 0.0, exponents: vec![1, 1] }];
        let u = log_modulus(&p, 2).unwrap();
        let x = [0.5, 0.0, 0.0, 2.0];
        assert!((u.eval(&x) - 0.0).abs() < 1e-14);
        let one = log_modulus(&[ComplexMonomial { re: 1.0, im: 0.0, exponents: vec![0, 0] }], 2).unwrap();
        assert_eq!(one.eval(&x), 0.0);
        assert!(log_modulus(&[ComplexMonomial { re: 0.0, im: 0.0, exponents: vec![1, 0] }], 2).is_err());
    }

    #[test]
    fn harmonic_part_is_checked() {
        let h = vec![Monomial { coef: 1.0, exponents: vec![2, 0, 0] }, Monomial { coef: -1.0, exponents: vec![0, 2, 0] }];
        let u = harmonic_plus_kernel(&h, &[0.0; 3], 1.0, 3.0).unwrap();
        assert!((u.eval(&[1.0, 0.0, 0.0]) - 0.0).abs() < 1e-14);
        let bad = vec![Monomial { coef: 1.0, exponents: vec![2, 0, 0] }];
        assert!(harmonic_plus_kernel(&bad, &[0.0; 3], 1.0, 3.0).is_err());
    }

    #[test]
    fn cone_field_needs_transverse_room() {
        assert!(invariant_cone_field(3, 3.0, &PlaneFrame::coordinate(3, &[0])).is_err());
        assert!(invariant_cone_field(4, 3.0, &PlaneFrame::zero(3)).is_err());
        assert!(invariant_cone_field(4, 2.0, &PlaneFrame::coordinate(4, &[0])).is_ok());
    }

    #[test]
    fn grid_of_constant() {
        let u = ScalarField::constant(3, Ball::centered(3, 3.0), 3.0, 2.5);
        let g = grid_sample(&u, 9, &Ball::centered(3, 1.0)).unwrap();
        if let crate::fields::Backing::Grid(grid) = g.backing() {
            assert!(grid.values.iter().all(|&v| v == 2.5));
        } else {
            panic!("expected grid backing");
        }
    }
}
