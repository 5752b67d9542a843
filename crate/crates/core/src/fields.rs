//! Scalar fields on balls: evaluation, tangential p-flows, restriction to planes, L1 distances.

use std::fmt;
use std::io::{BufRead, Write};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affine, dist, Ball, PlaneFrame, Pt};
use crate::means::spherical_max;
use crate::quadrature::QuadratureSpec;

pub type EvalFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// Sample points closer than this to a declared singular locus are nudged off it.
pub const MASK_RADIUS: f64 = 1e-6;

#[derive(Clone)]
pub enum Backing {
    Analytic(Arc<EvalFn>),
    Grid(Arc<Grid>),
}

/// A real function on a ball in R^n together with its claimed Riesz characteristic.
#[derive(Clone)]
pub struct ScalarField {
    dim: usize,
    domain: Ball,
    p: f64,
    backing: Backing,
    singular: Option<Arc<EvalFn>>,
    label: String,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("dim", &self.dim)
            .field("p", &self.p)
            .field("domain", &self.domain)
            .finish()
    }
}

/// L1 quadrature estimate with the number of samples used.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L1Estimate {
    pub value: f64,
    pub samples: usize,
}

impl ScalarField {
    pub fn analytic(dim: usize, domain: Ball, p: f64, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        assert_eq!(domain.dim(), dim, "domain dimension");
        Self { dim, domain, p, backing: Backing::Analytic(Arc::new(f)), singular: None, label: String::new() }
    }

    pub fn from_grid(grid: Grid, p: f64) -> Self {
        let domain = grid.ball.clone();
        Self { dim: grid.n, domain, p, backing: Backing::Grid(Arc::new(grid)), singular: None, label: "grid".into() }
    }

    pub fn zero(dim: usize, domain: Ball, p: f64) -> Self {
        Self::analytic(dim, domain, p, |_| 0.0).with_label("zero")
    }

    pub fn constant(dim: usize, domain: Ball, p: f64, c: f64) -> Self {
        Self::analytic(dim, domain, p, move |_| c).with_label("constant")
    }

    /// Declares the distance to the singular locus, used for masking.
    pub fn with_singular(mut self, d: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.singular = Some(Arc::new(d));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_domain(mut self, domain: Ball) -> Self {
        assert_eq!(domain.dim(), self.dim, "domain dimension");
        self.domain = domain;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Ball {
        &self.domain
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        self.singular.as_ref().map(|d| d(x))
    }

    /// Raw evaluation without the domain check.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.backing {
            Backing::Analytic(f) => f(x),
            Backing::Grid(g) => g.interpolate(x),
        }
    }

    /// Evaluation for quadrature: points on or near the singular locus are moved off it.
    #[inline]
    pub fn eval_masked(&self, x: &[f64]) -> f64 {
        let near = self.singular.as_ref().is_some_and(|d| d(x) < MASK_RADIUS);
        if !near {
            let v = self.eval(x);
            if v.is_finite() {
                return v;
            }
        }
        self.nudged(x)
    }

    #[cold]
    fn nudged(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        let mut last = f64::NEG_INFINITY;
        for attempt in 0..(2 * n + 1) {
            let mut y: Pt = x.iter().copied().collect();
            let step = 4.0 * MASK_RADIUS * (1 + attempt / n) as f64;
            for (i, yi) in y.iter_mut().enumerate() {
                let s = if (i + attempt) % 2 == 0 { 1.0 } else { -0.5 };
                *yi += step * s * (1.0 + 0.37 * ((i + attempt) % n) as f64);
            }
            if self.singular.as_ref().is_some_and(|d| d(&y) < MASK_RADIUS) {
                continue;
            }
            last = self.eval(&y);
            if last.is_finite() {
                return last;
            }
        }
        last
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("point of length {} in R^{}", x.len(), self.dim)));
        }
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!("point {x:?} outside the domain ball")));
        }
        Ok(self.eval(x))
    }

    /// Checks that the closed ball `B_r(x)` lies in the domain.
    pub fn check_ball(&self, x: &[f64], r: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("point of length {} in R^{}", x.len(), self.dim)));
        }
        if !(r > 0.0) {
            return Err(Error::Domain(format!("radius {r} must be positive")));
        }
        let room = self.domain.inner_radius(x);
        if r > room * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("ball of radius {r} exceeds available radius {room}")));
        }
        Ok(())
    }

    /// Pointwise `a * u`.
    pub fn scaled(&self, a: f64) -> Self {
        let u = self.clone();
        let mut out = Self::analytic(self.dim, self.domain.clone(), self.p, move |x| a * u.eval(x));
        out.singular = self.singular.clone();
        out.label = format!("{a}*({})", self.label);
        out
    }

    /// Pointwise `u + c`.
    pub fn shifted(&self, c: f64) -> Self {
        let u = self.clone();
        let mut out = Self::analytic(self.dim, self.domain.clone(), self.p, move |x| u.eval(x) + c);
        out.singular = self.singular.clone();
        out.label = format!("({})+{c}", self.label);
        out
    }

    /// Pointwise sum on the smaller of the two domains.
    pub fn sum(&self, other: &ScalarField) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Dimension("sum of fields in different dimensions".into()));
        }
        let domain = if self.domain.radius <= other.domain.radius { self.domain.clone() } else { other.domain.clone() };
        let (a, b) = (self.clone(), other.clone());
        let mut out = Self::analytic(self.dim, domain, self.p, move |x| a.eval(x) + b.eval(x));
        let (sa, sb) = (self.singular.clone(), other.singular.clone());
        out.singular = match (sa, sb) {
            (Some(f), Some(g)) => Some(Arc::new(move |x: &[f64]| f(x).min(g(x)))),
            (Some(f), None) | (None, Some(f)) => Some(f),
            (None, None) => None,
        };
        out.label = format!("({})+({})", self.label, other.label);
        Ok(out)
    }

    /// Tangential p-flow `u_{x,r}` on `B_{rho/r}(0)`, `rho` the room around `x`.
    pub fn p_flow(&self, x: &[f64], r: f64, quad: &QuadratureSpec) -> Result<Self> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!("point of length {} in R^{}", x.len(), self.dim)));
        }
        let rho = self.domain.inner_radius(x);
        if !(r > 0.0) || r >= rho {
            return Err(Error::Scale { r, rho });
        }
        let p = self.p;
        let u = self.clone();
        let xc: Pt = x.iter().copied().collect();
        let domain = Ball::centered(self.dim, rho / r);
        let mut out = if p > 2.0 {
            let c = r.powf(p - 2.0);
            Self::analytic(self.dim, domain, p, move |y| c * u.eval(&affine(&xc, r, y)))
        } else if p == 2.0 {
            let m = spherical_max(self, x, r, quad)?;
            Self::analytic(self.dim, domain, p, move |y| u.eval(&affine(&xc, r, y)) - m)
        } else {
            let c = r.powf(2.0 - p);
            let ux = self.eval(x);
            Self::analytic(self.dim, domain, p, move |y| (u.eval(&affine(&xc, r, y)) - ux) / c)
        };
        if let Some(d) = self.singular.clone() {
            let xc: Pt = x.iter().copied().collect();
            out.singular = Some(Arc::new(move |y: &[f64]| d(&affine(&xc, r, y)) / r));
        }
        out.label = format!("flow({}; r={r})", self.label);
        Ok(out)
    }

    /// Restriction `t -> u(x + W t)` on the largest centered ball inside the domain.
    pub fn restrict(&self, w: &PlaneFrame, x: &[f64]) -> Result<Self> {
        if w.n != self.dim || x.len() != self.dim {
            return Err(Error::Dimension("plane and point must live in the field's space".into()));
        }
        let rho = self.domain.inner_radius(x);
        if !(rho > 0.0) {
            return Err(Error::Domain("restriction center outside the domain".into()));
        }
        let k = w.k();
        let u = self.clone();
        let plane = w.clone();
        let xc: Pt = x.iter().copied().collect();
        let mut out = Self::analytic(k, Ball::centered(k, rho), self.p, move |t| u.eval(&plane.embed(&xc, t)));
        if let Some(d) = self.singular.clone() {
            let plane = w.clone();
            let xc: Pt = x.iter().copied().collect();
            out.singular = Some(Arc::new(move |t: &[f64]| d(&plane.embed(&xc, t))));
        }
        out.label = format!("restrict({})", self.label);
        Ok(out)
    }
}

/// Quadrature estimate of `int_ball |u - v|`.
pub fn l1_distance(u: &ScalarField, v: &ScalarField, ball: &Ball, quad: &QuadratureSpec) -> Result<L1Estimate> {
    if !(ball.radius > 0.0) {
        return Err(Error::Domain("empty ball".into()));
    }
    u.check_ball(&ball.center, ball.radius)?;
    v.check_ball(&ball.center, ball.radius)?;
    let rule = quad.ball(u.dim());
    let mut acc = 0.0;
    for (y, w) in rule.iter() {
        let z = affine(&ball.center, ball.radius, y);
        acc += w * (u.eval_masked(&z) - v.eval_masked(&z)).abs();
    }
    Ok(L1Estimate { value: acc * ball.volume(), samples: rule.len() })
}

/// Quadrature estimate of `int_ball |u|`.
pub fn l1_norm(u: &ScalarField, ball: &Ball, quad: &QuadratureSpec) -> Result<L1Estimate> {
    if !(ball.radius > 0.0) {
        return Err(Error::Domain("empty ball".into()));
    }
    u.check_ball(&ball.center, ball.radius)?;
    let rule = quad.ball(u.dim());
    let acc: f64 = rule.iter().map(|(y, w)| w * u.eval_masked(&affine(&ball.center, ball.radius, y)).abs()).sum();
    Ok(L1Estimate { value: acc * ball.volume(), samples: rule.len() })
}

/// Uniform lattice of samples covering the bounding box of a ball.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n: usize,
    pub ball: Ball,
    pub resolution: usize,
    pub h: f64,
    pub values: Vec<f64>,
    pub masked: Vec<bool>,
}

/// Largest number of grid cells allowed per axis.
pub const GRID_AXIS_LIMIT: usize = 128;

impl Grid {
    pub fn origin(&self, axis: usize) -> f64 {
        self.ball.center[axis] - self.ball.radius
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Samples `u` on a `resolution^n` lattice over the bounding box of `ball`.
    pub fn sample(u: &ScalarField, resolution: usize, ball: &Ball) -> Result<Self> {
        let n = u.dim();
        if resolution < 8 {
            return Err(Error::Resolution(format!("grid resolution {resolution} below 8 per axis")));
        }
        if resolution > GRID_AXIS_LIMIT + 1 {
            return Err(Error::MemoryGuard(format!("grid resolution {resolution} exceeds {} per axis", GRID_AXIS_LIMIT + 1)));
        }
        u.check_ball(&ball.center, ball.radius)?;
        let h = 2.0 * ball.radius / (resolution - 1) as f64;
        let total = resolution.pow(n as u32);
        let mut values = vec![0.0; total];
        let mut masked = vec![false; total];
        let mut idx = vec![0usize; n];
        for (lin, slot) in values.iter_mut().enumerate() {
            unflatten(lin, resolution, &mut idx);
            let x: Pt = (0..n).map(|a| ball.center[a] - ball.radius + h * idx[a] as f64).collect();
            let near = u.singular_distance(&x).is_some_and(|d| d < MASK_RADIUS);
            let v = u.eval(&x);
            if near || !v.is_finite() {
                masked[lin] = true;
            } else {
                *slot = v;
            }
        }
        let finite_min = values.iter().zip(&masked).filter(|(_, m)| !**m).map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
        let snapshot = values.clone();
        for lin in 0..total {
            if !masked[lin] {
                continue;
            }
            unflatten(lin, resolution, &mut idx);
            let mut best = f64::INFINITY;
            for off in 0..3usize.pow(n as u32) {
                let mut o = off;
                let mut nb = 0usize;
                let mut ok = true;
                for a in (0..n).rev() {
                    let d = (o % 3) as isize - 1;
                    o /= 3;
                    let c = idx[a] as isize + d;
                    if c < 0 || c >= resolution as isize {
                        ok = false;
                        break;
                    }
                    nb += c as usize * resolution.pow((n - 1 - a) as u32);
                }
                if ok && !masked[nb] {
                    best = best.min(snapshot[nb]);
                }
            }
            values[lin] = if best.is_finite() { best } else { finite_min.min(0.0) };
        }
        Ok(Self { n, ball: ball.clone(), resolution, h, values, masked })
    }

    /// Multilinear interpolation, clipping queries to the lattice hull.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let res = self.resolution;
        let mut base = [0usize; 8];
        let mut frac = [0.0f64; 8];
        for a in 0..n {
            let s = ((x[a] - self.origin(a)) / self.h).clamp(0.0, (res - 1) as f64);
            let i = (s.floor() as usize).min(res - 2);
            base[a] = i;
            frac[a] = s - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut lin = 0usize;
            for a in 0..n {
                let bit = (corner >> (n - 1 - a)) & 1;
                w *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                lin = lin * res + base[a] + bit;
            }
            if w != 0.0 {
                acc += w * self.values[lin];
            }
        }
        acc
    }

    /// Writes the grid as CSV: a header row `n,h,resolution,radius,center_1..center_n`, its values,
    /// then a row `i_1..i_n,value,masked` followed by one sample per line.
    pub fn write_csv(&self, out: &mut impl Write) -> std::io::Result<()> {
        let centers: Vec<String> = (1..=self.n).map(|i| format!("center_{i}")).collect();
        writeln!(out, "n,h,resolution,radius,{}", centers.join(","))?;
        let cvals: Vec<String> = self.ball.center.iter().map(|c| format!("{c:?}")).collect();
        writeln!(out, "{},{:?},{},{:?},{}", self.n, self.h, self.resolution, self.ball.radius, cvals.join(","))?;
        let idx_names: Vec<String> = (1..=self.n).map(|i| format!("i_{i}")).collect();
        writeln!(out, "{},value,masked", idx_names.join(","))?;
        let mut idx = vec![0usize; self.n];
        for (lin, v) in self.values.iter().enumerate() {
            unflatten(lin, self.resolution, &mut idx);
            let is: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
            writeln!(out, "{},{v:?},{}", is.join(","), u8::from(self.masked[lin]))?;
        }
        Ok(())
    }

    pub fn read_csv(input: impl BufRead) -> Result<Self> {
        let mut lines = input.lines();
        let mut next = |what: &str| -> Result<String> {
            lines.next().ok_or_else(|| Error::Parse(format!("missing {what}")))?.map_err(|e| Error::Io(e.to_string()))
        };
        let header = next("header row")?;
        if !header.starts_with("n,h,") {
            return Err(Error::Parse("grid CSV must start with `n,h,`".into()));
        }
        let meta = next("metadata row")?;
        let fields: Vec<&str> = meta.split(',').map(str::trim).collect();
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s:?}: {e}")));
        let n = num(fields.first().copied().unwrap_or(""))? as usize;
        if fields.len() != 4 + n || n == 0 {
            return Err(Error::Parse("metadata row has the wrong number of columns".into()));
        }
        let h = num(fields[1])?;
        let resolution = num(fields[2])? as usize;
        let radius = num(fields[3])?;
        let center = fields[4..].iter().map(|s| num(s)).collect::<Result<Vec<_>>>()?;
        if !(2..=GRID_AXIS_LIMIT + 1).contains(&resolution) {
            return Err(Error::MemoryGuard(format!("resolution {resolution} out of range")));
        }
        let expected_h = 2.0 * radius / (resolution - 1) as f64;
        if (h - expected_h).abs() > 1e-9 * expected_h.max(1.0) {
            return Err(Error::Parse(format!("spacing {h} inconsistent with radius and resolution")));
        }
        let _ = next("sample header")?;
        let total = resolution.pow(n as u32);
        let mut values = vec![f64::NAN; total];
        let mut masked = vec![false; total];
        for line in lines {
            let line = line.map_err(|e| Error::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != n + 2 {
                return Err(Error::Parse(format!("sample row {line:?} has the wrong number of columns")));
            }
            let mut lin = 0usize;
            for c in &cols[..n] {
                let i: usize = c.parse().map_err(|e| Error::Parse(format!("{c:?}: {e}")))?;
                if i >= resolution {
                    return Err(Error::Parse(format!("index {i} out of range")));
                }
                lin = lin * resolution + i;
            }
            values[lin] = num(cols[n])?;
            masked[lin] = cols[n + 1] == "1";
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::Parse("grid CSV is missing samples".into()));
        }
        Ok(Self { n, ball: Ball::new(center, radius), resolution, h, values, masked })
    }
}

fn unflatten(mut lin: usize, res: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut().rev() {
        *slot = lin % res;
        lin /= res;
    }
}

/// Euclidean distance to the nearest of a set of points.
pub fn distance_to_points(points: &[Vec<f64>]) -> impl Fn(&[f64]) -> f64 + Send + Sync + Clone {
    let pts = points.to_vec();
    move |x: &[f64]| pts.iter().map(|c| dist(x, c)).fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::RieszKernel;

    fn kernel3() -> ScalarField {
        let k = RieszKernel::new(3.0).unwrap();
        ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, move |x| k.eval(crate::geometry::norm(x)))
            .with_singular(crate::geometry::norm)
    }

    #[test]
    fn evaluate_kernel_and_domain() {
        let u = kernel3();
        assert_eq!(u.evaluate(&[1.0, 0.0, 0.0]).unwrap(), -1.0);
        assert!(matches!(u.evaluate(&[4.0, 0.0, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn kernel_is_a_flow_fixed_point() {
        let u = kernel3();
        let q = QuadratureSpec::default();
        let f = u.p_flow(&[0.0; 3], 0.37, &q).unwrap();
        for y in [[0.3, 0.1, -0.2], [0.9, 0.0, 0.1]] {
            assert!((f.eval(&y) - u.eval(&y)).abs() < 1e-13);
        }
        assert!(matches!(u.p_flow(&[0.0; 3], 3.0, &q), Err(Error::Scale { .. })));
    }

    #[test]
    fn flow_composition_exact_for_p_above_two() {
        let u = kernel3().sum(&kernel3().scaled(0.5)).unwrap();
        let q = QuadratureSpec::default();
        let x = [0.2, -0.1, 0.3];
        let a = u.p_flow(&x, 0.5, &q).unwrap().p_flow(&[0.0; 3], 0.3, &q).unwrap();
        let b = u.p_flow(&x, 0.15, &q).unwrap();
        for y in [[0.3, 0.1, -0.2], [0.5, 0.5, 0.1]] {
            let (va, vb) = (a.eval(&y), b.eval(&y));
            assert!((va - vb).abs() <= 1e-12 * vb.abs().max(1.0));
        }
    }

    #[test]
    fn log_flow_subtracts_max() {
        let u = ScalarField::analytic(3, Ball::centered(3, 3.0), 2.0, |x| crate::geometry::norm(x).ln());
        let f = u.p_flow(&[0.0; 3], 0.5, &QuadratureSpec::default()).unwrap();
        let y = [0.3, 0.2, 0.1];
        assert!((f.eval(&y) - crate::geometry::norm(&y).ln()).abs() < 1e-9);
    }

    #[test]
    fn restriction_of_line_distance_kernel() {
        let k = RieszKernel::new(3.0).unwrap();
        let e3 = PlaneFrame::coordinate(3, &[2]);
        let line = e3.clone();
        let u = ScalarField::analytic(3, Ball::centered(3, 2.0), 3.0, move |x| k.eval(line.distance(x)));
        let w = PlaneFrame::coordinate(3, &[0, 1]);
        let v = u.restrict(&w, &[0.0; 3]).unwrap();
        assert_eq!(v.dim(), 2);
        assert!((v.eval(&[0.3, 0.4]) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn l1_of_unit_constant_is_ball_volume() {
        let one = ScalarField::constant(3, Ball::centered(3, 2.0), 3.0, 1.0);
        let zero = ScalarField::zero(3, Ball::centered(3, 2.0), 3.0);
        let d = l1_distance(&one, &zero, &Ball::centered(3, 1.0), &QuadratureSpec::default()).unwrap();
        assert!((d.value - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(d.samples > 0);
    }

    #[test]
    fn kernel_scaled_l1_difference() {
        let u = kernel3();
        let v = u.scaled(1.1);
        let q = QuadratureSpec::default();
        let d = l1_distance(&u, &v, &Ball::centered(3, 1.0), &q).unwrap().value;
        // int_{B1} |x|^{-1} = 4 pi int_0^1 r dr = 2 pi
        let exact = 0.1 * 2.0 * std::f64::consts::PI;
        assert!((d - exact).abs() < 0.01 * exact, "{d} vs {exact}");
    }

    #[test]
    fn grid_interpolation_of_square_norm() {
        let u = ScalarField::analytic(2, Ball::centered(2, 1.0), 2.0, |x| x[0] * x[0] + x[1] * x[1]);
        let g = Grid::sample(&u, 65, &Ball::centered(2, 1.0)).unwrap();
        let h = g.h;
        let v = g.interpolate(&[0.26, 0.26]);
        assert!((v - 0.1352).abs() <= 2.0 * h * h);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = Grid::read_csv(std::io::Cursor::new(buf)).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn grid_memory_guard() {
        let u = ScalarField::zero(2, Ball::centered(2, 1.0), 2.0);
        assert!(matches!(Grid::sample(&u, 500, &Ball::centered(2, 1.0)), Err(Error::MemoryGuard(_))));
        assert!(matches!(Grid::sample(&u, 4, &Ball::centered(2, 1.0)), Err(Error::Resolution(_))));
    }
}
