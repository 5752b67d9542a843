//! Riesz kernels and K_p-convexity utilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The Riesz kernel of characteristic `p`, normalized as
/// `-t^(2-p)` for `p > 2`, `log t` for `p = 2` and `t^(2-p)` for `1 <= p < 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszKernel {
    p: f64,
}

impl RieszKernel {
    pub fn new(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::UnsupportedCharacteristic(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Unchecked evaluation; `t <= 0` yields `-inf` for `p >= 2`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let p = self.p;
        if p == 2.0 {
            t.ln()
        } else if p > 2.0 {
            if p == 3.0 {
                -1.0 / t
            } else if p == 4.0 {
                -1.0 / (t * t)
            } else {
                -t.powf(2.0 - p)
            }
        } else {
            t.powf(2.0 - p)
        }
    }

    #[inline]
    pub fn derivative(&self, t: f64) -> f64 {
        let p = self.p;
        if p == 2.0 {
            1.0 / t
        } else {
            (p - 2.0).abs() * t.powf(1.0 - p)
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("kernel argument t = {t} must be positive")));
        }
        Ok(self.eval(t))
    }

    pub fn deriv(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("kernel argument t = {t} must be positive")));
        }
        Ok(self.derivative(t))
    }
}

pub fn riesz_kernel(p: f64, t: f64) -> Result<f64> {
    RieszKernel::new(p)?.value(t)
}

pub fn riesz_kernel_derivative(p: f64, t: f64) -> Result<f64> {
    RieszKernel::new(p)?.deriv(t)
}

/// Which statistic a radial profile samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    S,
    M,
    V,
    ThetaF,
    ThetaG,
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub kind: ProfileKind,
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>, kind: ProfileKind) -> Result<Self> {
        if radii.len() != values.len() {
            return Err(Error::Dimension(format!("{} radii but {} values", radii.len(), values.len())));
        }
        if radii.iter().any(|&r| !(r > 0.0)) {
            return Err(Error::Domain("profile radii must be positive".into()));
        }
        if radii.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Domain("profile radii must be strictly increasing".into()));
        }
        Ok(Self { radii, values, kind })
    }

    /// Samples `f(r)` on the given radii.
    pub fn from_fn(radii: &[f64], kind: ProfileKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = radii.iter().map(|&r| f(r)).collect();
        Self::new(radii.to_vec(), values, kind)
    }

    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Value at `r`, interpolated linearly in the K_p coordinate.
    pub fn interpolate(&self, r: f64, kernel: &RieszKernel) -> Result<f64> {
        let (lo, hi) = match (self.radii.first(), self.radii.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::InsufficientData("empty profile".into())),
        };
        if !(r >= lo && r <= hi) {
            return Err(Error::Range(format!("r = {r} outside [{lo}, {hi}]")));
        }
        let i = self.radii.partition_point(|&t| t < r);
        if self.radii[i] == r {
            return Ok(self.values[i]);
        }
        let (r0, r1) = (self.radii[i - 1], self.radii[i]);
        let (k0, k1, k) = (kernel.eval(r0), kernel.eval(r1), kernel.eval(r));
        let lambda = (k - k0) / (k1 - k0);
        Ok(self.values[i - 1] + lambda * (self.values[i] - self.values[i - 1]))
    }
}

/// Difference quotient `(f(r) - f(s)) / (K_p(r) - K_p(s))`.
pub fn kp_quotient(f: &RadialProfile, r: f64, s: f64, p: f64) -> Result<f64> {
    let kernel = RieszKernel::new(p)?;
    if r == s {
        return Err(Error::InvalidInput("quotient needs r != s".into()));
    }
    let fr = f.interpolate(r, &kernel)?;
    let fs = f.interpolate(s, &kernel)?;
    Ok((fr - fs) / (kernel.eval(r) - kernel.eval(s)))
}

/// Quotients between consecutive samples, in increasing radius order.
pub fn consecutive_quotients(f: &RadialProfile, p: f64) -> Result<Vec<f64>> {
    let kernel = RieszKernel::new(p)?;
    Ok(f.radii
        .windows(2)
        .zip(f.values.windows(2))
        .map(|(r, v)| (v[1] - v[0]) / (kernel.eval(r[1]) - kernel.eval(r[0])))
        .collect())
}

/// Largest decrease between consecutive quotients; zero for a K_p-convex profile.
pub fn kp_convexity_defect(f: &RadialProfile, p: f64) -> Result<f64> {
    if f.len() < 3 {
        return Err(Error::InsufficientData(format!("convexity defect needs at least 3 samples, got {}", f.len())));
    }
    let q = consecutive_quotients(f, p)?;
    Ok(q.windows(2).fold(0.0_f64, |acc, w| acc.max(w[0] - w[1])))
}

/// Radial Laplacian `K'' + (p-1)/t K'` of K_p by central differences with step `h`.
pub fn radial_laplacian_residual(p: f64, t: f64, h: f64) -> Result<f64> {
    let kernel = RieszKernel::new(p)?;
    if !(t - h > 0.0) {
        return Err(Error::Domain(format!("stencil leaves (0, inf) at t = {t}")));
    }
    let (a, b, c) = (kernel.eval(t - h), kernel.eval(t), kernel.eval(t + h));
    let second = (a - 2.0 * b + c) / (h * h);
    let first = (c - a) / (2.0 * h);
    Ok(second + (p - 1.0) / t * first)
}

/// Fourth-order version of [`radial_laplacian_residual`] by one Richardson step.
pub fn radial_laplacian_residual_extrapolated(p: f64, t: f64, h: f64) -> Result<f64> {
    let coarse = radial_laplacian_residual(p, t, h)?;
    let fine = radial_laplacian_residual(p, t, h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        assert_eq!(riesz_kernel(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(riesz_kernel(3.0, 2.0).unwrap(), -0.5);
        assert_eq!(riesz_kernel(1.5, 4.0).unwrap(), 2.0);
        assert!(matches!(riesz_kernel(3.0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(riesz_kernel(0.5, 1.0), Err(Error::UnsupportedCharacteristic(_))));
    }

    #[test]
    fn derivative_matches_difference() {
        for &p in &[1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 6.0] {
            for &t in &[0.3, 1.0, 2.7] {
                let h = 1e-6;
                let fd = (riesz_kernel(p, t + h).unwrap() - riesz_kernel(p, t - h).unwrap()) / (2.0 * h);
                let d = riesz_kernel_derivative(p, t).unwrap();
                assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "p={p} t={t}");
                assert!(d > 0.0);
            }
        }
    }

    #[test]
    fn harmonic_in_p_dimensions() {
        let a = radial_laplacian_residual(4.0, 0.7, 1e-3).unwrap();
        let b = radial_laplacian_residual(4.0, 0.7, 5e-4).unwrap();
        assert!(a.abs() < 1e-4 && (a / b - 4.0).abs() < 0.05, "{a} {b}");
        let c = radial_laplacian_residual_extrapolated(4.0, 0.7, 1e-3).unwrap();
        assert!(c.abs() < 1e-6, "{c}");
    }

    #[test]
    fn quotient_of_kernel_is_one() {
        let radii: Vec<f64> = (1..=6).map(|i| 0.1 * i as f64).collect();
        for &p in &[2.0, 3.0, 4.0] {
            let k = RieszKernel::new(p).unwrap();
            let prof = RadialProfile::from_fn(&radii, ProfileKind::Kernel, |r| k.eval(r)).unwrap();
            let q = kp_quotient(&prof, 0.15, 0.42, p).unwrap();
            assert!((q - 1.0).abs() < 1e-12);
            assert!(kp_convexity_defect(&prof, p).unwrap() < 1e-12);
            let flipped = RadialProfile::from_fn(&radii[..3], ProfileKind::Kernel, |r| -k.eval(r) * k.eval(r)).unwrap();
            assert!(kp_convexity_defect(&flipped, p).unwrap() > 0.0);
        }
    }

    #[test]
    fn constant_quotient_zero_and_range() {
        let prof = RadialProfile::new(vec![0.1, 0.2, 0.3], vec![4.0; 3], ProfileKind::S).unwrap();
        assert_eq!(kp_quotient(&prof, 0.1, 0.3, 3.0).unwrap(), 0.0);
        assert!(matches!(kp_quotient(&prof, 0.05, 0.3, 3.0), Err(Error::Range(_))));
        let short = RadialProfile::new(vec![0.1, 0.2], vec![0.0; 2], ProfileKind::S).unwrap();
        assert!(matches!(kp_convexity_defect(&short, 3.0), Err(Error::InsufficientData(_))));
    }
}
