//! F-energy and G-energy profiles, monotonicity normalization and rigidity probes.

use serde::{Deserialize, Serialize};

use crate::density::lattice_in_ball;
use crate::error::{Error, Result};
use crate::fields::{l1_norm, ScalarField};
use crate::geometry::{derive_seed, random_unit_vector, rng, unit_ball_volume, Ball, PlaneFrame, Pt};
use crate::homogeneity::{homogeneity_defect, HomogeneityOptions};
use crate::kernels::{ProfileKind, RadialProfile, RieszKernel};
use crate::means::{ball_sup, left_kernel_derivative, sphere_average, spherical_max, spherical_mean};
use crate::quadrature::QuadratureSpec;

/// Minimum number of family samples for a G-energy average.
pub const MIN_FAMILY_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `G(p, R^n)` under the Haar measure.
    Full,
    /// Complex lines `span{v, Jv}` of `C^{n/2}`, `J` the standard complex structure.
    ComplexLines,
    /// A fixed list of planes with uniform weights.
    Explicit { planes: Vec<PlaneFrame> },
}

/// Compact family of p-planes with its invariant probability measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrassmannianFamily {
    pub n: usize,
    pub p: usize,
    pub kind: FamilyKind,
    pub samples: usize,
    pub seed: u64,
}

impl GrassmannianFamily {
    pub fn full(n: usize, p: usize, samples: usize, seed: u64) -> Result<Self> {
        if p == 0 || p > n {
            return Err(Error::Dimension(format!("no {p}-planes in R^{n}")));
        }
        Ok(Self { n, p, kind: FamilyKind::Full, samples, seed })
    }

    pub fn complex_lines(n: usize, samples: usize, seed: u64) -> Result<Self> {
        if !n.is_multiple_of(2) || n == 0 {
            return Err(Error::Dimension(format!("complex lines need an even dimension, got {n}")));
        }
        Ok(Self { n, p: 2, kind: FamilyKind::ComplexLines, samples, seed })
    }

    pub fn explicit(planes: Vec<PlaneFrame>) -> Result<Self> {
        let first = planes.first().ok_or_else(|| Error::InsufficientData("empty plane list".into()))?;
        let (n, p) = (first.n, first.k());
        if planes.iter().any(|w| w.n != n || w.k() != p || !w.is_orthonormal(1e-9)) {
            return Err(Error::InvalidInput("explicit planes must be orthonormal frames of one dimension".into()));
        }
        let samples = planes.len();
        Ok(Self { n, p, kind: FamilyKind::Explicit { planes }, samples, seed: 0 })
    }

    /// Seeded sample of the family.
    pub fn sample(&self) -> Vec<PlaneFrame> {
        let mut gen = rng(derive_seed(self.seed, 0x6A55));
        match &self.kind {
            FamilyKind::Full => (0..self.samples).map(|_| PlaneFrame::random(self.n, self.p, &mut gen)).collect(),
            FamilyKind::ComplexLines => (0..self.samples)
                .map(|_| {
                    let v = random_unit_vector(self.n, &mut gen);
                    let jv = complex_structure(&v).to_vec();
                    PlaneFrame { n: self.n, frame: vec![v, jv] }
                })
                .collect(),
            FamilyKind::Explicit { planes } => planes.clone(),
        }
    }

    pub fn with_samples(&self, samples: usize) -> Self {
        Self { samples, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }
}

fn check_radii(radii: &[f64], hi: f64) -> Result<()> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < hi)) {
        return Err(Error::Range(format!("radii must lie in (0, {hi})")));
    }
    Ok(())
}

/// `theta_F(u, x, r) = S(u, x, r)/K_p(r) + M(u, x, r)/K_p(r)`.
pub fn f_energy(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> Result<f64> {
    let kernel = RieszKernel::new(u.p())?;
    let k = kernel.eval(r);
    if u.p() == 2.0 || k == 0.0 {
        return Err(Error::PTwoUnsupported);
    }
    Ok((spherical_mean(u, x, r, quad)? + spherical_max(u, x, r, quad)?) / k)
}

/// F-energy profile on radii in `(0, 1/2)`.
pub fn f_energy_profile(u: &ScalarField, x: &[f64], radii: &[f64], quad: &QuadratureSpec) -> Result<RadialProfile> {
    if u.p() <= 2.0 {
        return Err(Error::PTwoUnsupported);
    }
    check_radii(radii, 0.5)?;
    let values = radii.iter().map(|&r| f_energy(u, x, r, quad)).collect::<Result<Vec<_>>>()?;
    RadialProfile::new(radii.to_vec(), values, ProfileKind::ThetaF)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Normalization {
    /// The constant `N`; the normalized field is `u - N`.
    pub n_const: f64,
    #[serde(skip)]
    pub field: Option<ScalarField>,
    pub centers: usize,
    /// Center attaining `N`.
    pub argmax: Vec<f64>,
}

/// Centers of the lattice `step Z^n` inside the closed unit ball.
pub fn unit_ball_centers(n: usize, step: f64) -> Vec<Vec<f64>> {
    let ball = Ball::centered(n, 1.0);
    lattice_in_ball(&ball, step, 1).iter().map(|k| k.iter().map(|&i| i as f64 * step).collect()).collect()
}

/// Constant `N` making `theta_F(u - N)` nondecreasing on `(0, 1/2)` at the given centers:
/// the largest tangent-line intercept `S(1/2) - Q K_p(1/2)` of the S and M profiles, `Q` the
/// `(1/2, 2/3)` quotient.
pub fn normalize_for_monotonicity(u: &ScalarField, centers: &[Vec<f64>], quad: &QuadratureSpec) -> Result<Normalization> {
    if u.p() <= 2.0 {
        return Err(Error::PTwoUnsupported);
    }
    if centers.is_empty() {
        return Err(Error::InsufficientData("no probe centers".into()));
    }
    let kernel = RieszKernel::new(u.p())?;
    let (a, b) = (0.5, 2.0 / 3.0);
    let (ka, kb) = (kernel.eval(a), kernel.eval(b));
    let mut best = (f64::NEG_INFINITY, centers[0].clone());
    for x in centers {
        u.check_ball(x, b)?;
        for stat in [sphere_average as fn(&ScalarField, &[f64], f64, &QuadratureSpec) -> f64, ball_sup] {
            let (fa, fb) = (stat(u, x, a, quad), stat(u, x, b, quad));
            let q = (fb - fa) / (kb - ka);
            let intercept = fa - q * ka;
            if intercept > best.0 {
                best = (intercept, x.clone());
            }
        }
    }
    let n_const = best.0;
    Ok(Normalization { n_const, field: Some(u.shifted(-n_const)), centers: centers.len(), argmax: best.1 })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DropEntry {
    pub delta: f64,
    pub drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FRigidityReport {
    pub theta_half: f64,
    pub drops: Vec<DropEntry>,
    pub defect_lower: f64,
    pub defect_upper: f64,
}

/// Energy drops `theta_F(1/2) - theta_F(delta)` next to the 0-homogeneity defect at scale 1.
pub fn f_rigidity_probe(
    u: &ScalarField,
    x: &[f64],
    deltas: &[f64],
    quad: &QuadratureSpec,
    hopts: &HomogeneityOptions,
) -> Result<FRigidityReport> {
    check_radii(deltas, 0.5)?;
    let theta_half = f_energy(u, x, 0.5, quad)?;
    let drops = deltas
        .iter()
        .map(|&d| Ok(DropEntry { delta: d, drop: theta_half - f_energy(u, x, d, quad)? }))
        .collect::<Result<Vec<_>>>()?;
    let rep = homogeneity_defect(u, x, 1.0, 0, hopts)?;
    Ok(FRigidityReport { theta_half, drops, defect_lower: rep.lower, defect_upper: rep.upper })
}

/// Per-radius G-energy with its Monte Carlo standard error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GEnergyProfile {
    pub profile: RadialProfile,
    pub std_error: Vec<f64>,
    /// Family average of the restricted S term.
    pub s_term: Vec<f64>,
    /// Family average of the restricted M term.
    pub m_term: Vec<f64>,
    /// Ambient `M'_-/K_p'` term.
    pub ambient: Vec<f64>,
    pub samples: usize,
}

fn check_family(u: &ScalarField, family: &GrassmannianFamily) -> Result<()> {
    if family.n != u.dim() {
        return Err(Error::Dimension(format!("family in R^{} for a field on R^{}", family.n, u.dim())));
    }
    if (family.p as f64 - u.p()).abs() > 0.0 {
        return Err(Error::InvalidInput(format!("family planes have dimension {} but p = {}", family.p, u.p())));
    }
    if family.samples < MIN_FAMILY_SAMPLES {
        return Err(Error::InsufficientData(format!("{} family samples, need at least {MIN_FAMILY_SAMPLES}", family.samples)));
    }
    Ok(())
}

/// `theta_G` on increasing radii. Every radius uses the same plane sample, and the average is a
/// fixed-order sum, so the result is deterministic and exactly linear in `u`.
pub fn g_energy_profile(
    u: &ScalarField,
    x: &[f64],
    radii: &[f64],
    family: &GrassmannianFamily,
    quad: &QuadratureSpec,
) -> Result<GEnergyProfile> {
    check_family(u, family)?;
    check_radii(radii, f64::INFINITY)?;
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    u.check_ball(x, r_max)?;
    let kernel = RieszKernel::new(u.p())?;
    let planes = family.sample();
    let restricted = planes.iter().map(|w| u.restrict(w, x)).collect::<Result<Vec<_>>>()?;
    let origin = vec![0.0; family.p];
    let m = restricted.len() as f64;
    let (mut values, mut errs, mut s_term, mut m_term, mut ambient) = (vec![], vec![], vec![], vec![], vec![]);
    for &r in radii {
        let per_plane: Vec<(f64, f64)> = restricted
            .iter()
            .map(|uw| {
                let s = left_kernel_derivative(|t| sphere_average(uw, &origin, t, quad), r, &kernel);
                let mm = left_kernel_derivative(|t| ball_sup(uw, &origin, t, quad), r, &kernel);
                (s, mm)
            })
            .collect();
        let s_avg = per_plane.iter().map(|a| a.0).sum::<f64>() / m;
        let m_avg = per_plane.iter().map(|a| a.1).sum::<f64>() / m;
        let mean = s_avg + m_avg;
        let var = per_plane.iter().map(|a| (a.0 + a.1 - mean).powi(2)).sum::<f64>() / (m - 1.0);
        let amb = left_kernel_derivative(|t| ball_sup(u, x, t, quad), r, &kernel);
        values.push(mean + amb);
        errs.push((var / m).sqrt());
        s_term.push(s_avg);
        m_term.push(m_avg);
        ambient.push(amb);
    }
    Ok(GEnergyProfile {
        profile: RadialProfile::new(radii.to_vec(), values, ProfileKind::ThetaG)?,
        std_error: errs,
        s_term,
        m_term,
        ambient,
        samples: planes.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GBoundReport {
    pub lambda: f64,
    /// Quadrature value of `||u||_{L1(B_2)}`.
    pub l1_b2: f64,
    /// `max_x theta_G(u, x, 1/2) / lambda` over the probe centers.
    pub energy_ratio: f64,
    /// Family average of `||u|_W||_{L1(A_{1/3,1} cap W)}` over `||u||_{L1(A_{1/3,1})}`.
    pub annulus_ratio: f64,
    pub centers: usize,
}

fn annulus_l1(u: &ScalarField, dim: usize, quad: &QuadratureSpec) -> f64 {
    let (a, b) = (1.0 / 3.0, 1.0);
    let rule = quad.annulus(dim, a, b);
    let vol = unit_ball_volume(dim) * (b.powi(dim as i32) - a.powi(dim as i32));
    vol * rule.iter().map(|(y, w)| w * u.eval_masked(y).abs()).sum::<f64>()
}

/// Energy bound and annulus-restriction ratios. Requires `||u||_{L1(B_2)} <= lambda`
/// up to quadrature tolerance.
pub fn g_energy_bound_check(
    u: &ScalarField,
    lambda: f64,
    family: &GrassmannianFamily,
    centers: &[Vec<f64>],
    quad: &QuadratureSpec,
) -> Result<GBoundReport> {
    check_family(u, family)?;
    let n = u.dim();
    let l1_b2 = l1_norm(u, &Ball::centered(n, 2.0), quad)?.value;
    if !(lambda > 0.0) || l1_b2 > lambda * (1.0 + 1e-6) {
        return Err(Error::InvalidInput(format!("||u||_L1(B_2) = {l1_b2} exceeds lambda = {lambda}")));
    }
    let mut energy_ratio: f64 = 0.0;
    for x in centers {
        let g = g_energy_profile(u, x, &[0.5], family, quad)?;
        energy_ratio = energy_ratio.max(g.profile.values[0] / lambda);
    }
    let ambient = annulus_l1(u, n, quad);
    let origin = vec![0.0; n];
    let planes = family.sample();
    let mut acc = 0.0;
    for w in &planes {
        acc += annulus_l1(&u.restrict(w, &origin)?, family.p, quad);
    }
    let restricted = acc / planes.len() as f64;
    let annulus_ratio = if ambient > 0.0 { restricted / ambient } else { 0.0 };
    Ok(GBoundReport { lambda, l1_b2, energy_ratio, annulus_ratio, centers: centers.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GRigidityReport {
    pub window: (f64, f64),
    pub theta_low: f64,
    pub theta_high: f64,
    pub drop: f64,
    pub defect_lower: f64,
    pub defect_upper: f64,
    /// Largest `||u||_{L1(B_r(x))} / (lambda r^(n-p+2))` over the window radii (p > 2), or
    /// `|M(u, x, 1)|` (p = 2).
    pub growth: f64,
    /// Set when the growth or normalization hypothesis fails beyond tolerance.
    pub hypothesis_violated: bool,
}

/// G-energy drop over `window = (delta_0, R)` next to the 0-homogeneity defect at scale 1.
pub fn g_rigidity_probe(
    u: &ScalarField,
    x: &[f64],
    window: (f64, f64),
    lambda: f64,
    family: &GrassmannianFamily,
    quad: &QuadratureSpec,
    hopts: &HomogeneityOptions,
) -> Result<GRigidityReport> {
    let (lo, hi) = window;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::Range("window must satisfy 0 < delta_0 < R".into()));
    }
    let g = g_energy_profile(u, x, &[lo, hi], family, quad)?;
    let (theta_low, theta_high) = (g.profile.values[0], g.profile.values[1]);
    let n = u.dim();
    let p = u.p();
    let (growth, violated) = if p == 2.0 {
        let m = spherical_max(u, x, 1.0, quad)?;
        (m.abs(), m.abs() > 1e-6 * (1.0 + lambda))
    } else {
        let mut worst: f64 = 0.0;
        for r in [lo, 0.5 * (lo + hi), hi] {
            let l1 = l1_norm(u, &Ball::new(x.to_vec(), r), quad)?.value;
            worst = worst.max(l1 / (lambda * r.powf(n as f64 - p + 2.0)));
        }
        (worst, worst > 1.0 + 1e-6)
    };
    let rep = homogeneity_defect(u, x, 1.0, 0, hopts)?;
    Ok(GRigidityReport {
        window,
        theta_low,
        theta_high,
        drop: theta_high - theta_low,
        defect_lower: rep.lower,
        defect_upper: rep.upper,
        growth,
        hypothesis_violated: violated,
    })
}

/// Largest decrease `max(f(r_i) - f(r_{i+1}), 0)` along a profile.
pub fn monotonicity_violation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[0] - w[1]).max(0.0)).fold(0.0, f64::max)
}

/// Standard complex structure `J` on `R^n = C^{n/2}`.
pub fn complex_structure(v: &[f64]) -> Pt {
    let n = v.len();
    (0..n).map(|i| if i % 2 == 0 { -v[i + 1] } else { v[i - 1] }).collect::<Pt>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{kernel_pair, plane_kernel, radial_kernel};
    use crate::geometry::dot;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn f_energy_examples() {
        let radii = [0.1, 0.2, 0.3, 0.4];
        let u = radial_kernel(3, 3.0, 1.5, &[0.0; 3]).unwrap();
        let prof = f_energy_profile(&u, &[0.0; 3], &radii, &q()).unwrap();
        for v in &prof.values {
            assert!((v - 3.0).abs() < 1e-6, "{v}");
        }
        let c = ScalarField::constant(3, Ball::centered(3, 3.0), 3.0, -1.0);
        let prof = f_energy_profile(&c, &[0.0; 3], &radii, &q()).unwrap();
        for (r, v) in radii.iter().zip(&prof.values) {
            assert!((v - 2.0 * r).abs() < 1e-12);
        }
        let two = ScalarField::constant(3, Ball::centered(3, 3.0), 2.0, -1.0);
        assert!(matches!(f_energy_profile(&two, &[0.0; 3], &radii, &q()), Err(Error::PTwoUnsupported)));
        assert!(f_energy_profile(&u, &[0.0; 3], &[0.6], &q()).is_err());
    }

    #[test]
    fn normalization_examples() {
        let centers = unit_ball_centers(3, 0.5);
        let u = radial_kernel(3, 3.0, 1.0, &[0.0; 3]).unwrap();
        let nrm = normalize_for_monotonicity(&u, &centers[..5], &q()).unwrap();
        assert!(nrm.n_const < 1e-3, "{}", nrm.n_const);
        let five = ScalarField::constant(3, Ball::centered(3, 3.0), 3.0, 5.0);
        let nrm = normalize_for_monotonicity(&five, &centers[..3], &q()).unwrap();
        assert!(nrm.n_const >= 5.0 - 1e-12);
        let v = nrm.field.unwrap();
        let prof = f_energy_profile(&v, &[0.0; 3], &[0.1, 0.2, 0.3, 0.4], &q()).unwrap();
        assert!(monotonicity_violation(&prof.values) == 0.0);
    }

    #[test]
    fn complex_lines_are_complex() {
        let fam = GrassmannianFamily::complex_lines(4, 8, 3).unwrap();
        for w in fam.sample() {
            assert!(w.is_orthonormal(1e-12));
            let j = complex_structure(&w.frame[0]);
            assert!((dot(&j, &w.frame[1]) - 1.0).abs() < 1e-12);
        }
        assert_eq!(fam.sample(), fam.sample());
    }

    #[test]
    fn g_energy_constant_and_scaling() {
        let fam = GrassmannianFamily::full(3, 2, 8, 5).unwrap();
        let c = ScalarField::constant(3, Ball::centered(3, 3.0), 2.0, 4.0);
        let g = g_energy_profile(&c, &[0.0; 3], &[0.2, 0.4], &fam, &q()).unwrap();
        assert!(g.profile.values.iter().all(|v| v.abs() < 1e-9));
        let u = kernel_pair(3, 2.0).unwrap();
        let a = g_energy_profile(&u, &[0.0; 3], &[0.2, 0.4], &fam, &q()).unwrap();
        let b = g_energy_profile(&u.scaled(2.0), &[0.0; 3], &[0.2, 0.4], &fam, &q()).unwrap();
        for (x, y) in a.profile.values.iter().zip(&b.profile.values) {
            assert!((2.0 * x - y).abs() <= 1e-10 * x.abs().max(1.0));
        }
        assert!(matches!(g_energy_profile(&u, &[0.0; 3], &[0.2], &fam.with_samples(4), &q()), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn g_energy_of_kernel_is_flat() {
        let fam = GrassmannianFamily::full(4, 3, 8, 9).unwrap();
        let u = radial_kernel(4, 3.0, 1.0, &[0.0; 4]).unwrap();
        let g = g_energy_profile(&u, &[0.0; 4], &[0.1, 0.2, 0.4], &fam, &q()).unwrap();
        for v in &g.profile.values {
            assert!((v - 3.0).abs() < 1e-3, "{:?}", g.profile.values);
        }
    }

    #[test]
    fn g_rigidity_on_plane_kernel() {
        let fam = GrassmannianFamily::full(4, 3, 8, 2).unwrap();
        let u = plane_kernel(&PlaneFrame::coordinate(4, &[3]), 3.0).unwrap();
        let rep = g_rigidity_probe(&u, &[0.0; 4], (0.05, 0.5), 100.0, &fam, &q(), &HomogeneityOptions::sweep(1)).unwrap();
        assert!(rep.drop.abs() < 1e-3 * rep.theta_high.abs().max(1.0), "{rep:?}");
    }
}
