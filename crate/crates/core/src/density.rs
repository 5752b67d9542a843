//! Densities at points and extraction of high-density sets.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geometry::{dist, Ball};
use crate::kernels::RieszKernel;
use crate::means::{ball_sup, sphere_average, volume_mean};
use crate::quadrature::QuadratureSpec;

/// Relative slack allowed in the monotone-quotient certificate.
pub const CERTIFICATE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub theta_s: f64,
    pub theta_m: f64,
    pub theta_v: f64,
    /// The two smallest ladder radii, whose quotient is reported.
    pub radii_used: (f64, f64),
    /// `|theta_S - (n - p + 2)/n * theta_V|`.
    pub consistency_sv: f64,
    /// `|theta_S - theta_M|`.
    pub consistency_sm: f64,
    /// Quotients of the primary statistic from the smallest pair upward.
    pub quotients: Vec<f64>,
    pub certificate: bool,
    pub warning: Option<String>,
}

/// Descending geometric ladder `r_max, r_max * ratio, ...` of `count` radii.
pub fn geometric_ladder(r_max: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| r_max * ratio.powi(i as i32)).collect()
}

// radii descending; quotients returned from the smallest pair upward
fn quotients(values: &[f64], radii: &[f64], kernel: &RieszKernel) -> Vec<f64> {
    (0..radii.len() - 1)
        .rev()
        .map(|i| (values[i] - values[i + 1]) / (kernel.eval(radii[i]) - kernel.eval(radii[i + 1])))
        .collect()
}

/// Densities from the smallest-scale quotients of the S, M and V profiles.
pub fn density(u: &ScalarField, x: &[f64], p: f64, ladder: &[f64], quad: &QuadratureSpec) -> Result<DensityEstimate> {
    if !(p >= 2.0) {
        return Err(Error::UnsupportedCharacteristic(p));
    }
    if ladder.len() < 4 {
        return Err(Error::InsufficientData(format!("density needs at least 4 radii, got {}", ladder.len())));
    }
    if ladder.windows(2).any(|w| !(w[0] > w[1] && w[1] > 0.0)) {
        return Err(Error::InvalidInput("radius ladder must be positive and strictly descending".into()));
    }
    u.check_ball(x, ladder[0])?;
    let kernel = RieszKernel::new(p)?;
    let n = u.dim() as f64;
    let m_vals: Vec<f64> = ladder.iter().map(|&r| ball_sup(u, x, r, quad)).collect();
    let qm = quotients(&m_vals, ladder, &kernel);
    let (qs, qv) = if p == 2.0 {
        (qm.clone(), qm.clone())
    } else {
        let s_vals: Vec<f64> = ladder.iter().map(|&r| sphere_average(u, x, r, quad)).collect();
        let v_vals = ladder.iter().map(|&r| volume_mean(u, x, r, quad)).collect::<Result<Vec<_>>>()?;
        (quotients(&s_vals, ladder, &kernel), quotients(&v_vals, ladder, &kernel))
    };
    let primary = if p == 2.0 { &qm } else { &qs };
    let q0 = primary[0];
    let certificate = primary.iter().skip(1).all(|&q| q0 <= q + CERTIFICATE_TOL * q.abs().max(1.0));
    let theta_m = qm[0].max(0.0);
    let theta_s = qs[0].max(0.0);
    let theta_v = if p == 2.0 { theta_m } else { qv[0].max(0.0) };
    let ratio = (n - p + 2.0) / n;
    let m = ladder.len();
    Ok(DensityEstimate {
        theta_s,
        theta_m,
        theta_v,
        radii_used: (ladder[m - 1], ladder[m - 2]),
        consistency_sv: (theta_s - ratio * theta_v).abs(),
        consistency_sm: (theta_s - theta_m).abs(),
        quotients: primary.clone(),
        certificate,
        warning: (!certificate)
            .then(|| "quotients increase as the radius decreases: field is not subharmonic or p is wrong".to_string()),
    })
}

/// Quotient of the S-profile (M-profile for p = 2) over `[r, 2r]`, clipped at zero.
pub fn quotient_at(u: &ScalarField, x: &[f64], r: f64, quad: &QuadratureSpec) -> f64 {
    let p = u.p();
    let kernel = RieszKernel::new(p).expect("analysis fields have p >= 2");
    let (a, b) = if p == 2.0 {
        (ball_sup(u, x, 2.0 * r, quad), ball_sup(u, x, r, quad))
    } else {
        (sphere_average(u, x, 2.0 * r, quad), sphere_average(u, x, r, quad))
    };
    ((a - b) / (kernel.eval(2.0 * r) - kernel.eval(r))).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityOptions {
    /// Points pass when `theta >= c (1 - tol)`.
    pub tol: f64,
    /// Coarse levels keep points with `theta >= screen * c`.
    pub screen: f64,
    /// Number of coarse levels above the final lattice; `None` picks one from the search radius.
    pub coarse_levels: Option<usize>,
    pub quad: QuadratureSpec,
}

impl Default for DensityOptions {
    fn default() -> Self {
        Self { tol: 0.05, screen: 0.5, coarse_levels: None, quad: QuadratureSpec::coarse(0x5EED) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub members: Vec<usize>,
    /// Member with the largest density.
    pub peak: Vec<f64>,
    pub peak_theta: f64,
    pub centroid: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighDensitySet {
    pub points: Vec<Vec<f64>>,
    pub thetas: Vec<f64>,
    pub components: Vec<Component>,
    pub count: usize,
    pub grid_step: f64,
    /// Number of quotient evaluations across all levels.
    pub evaluated: usize,
}

pub(crate) type Key = SmallVec<[i64; 8]>;

/// All offsets in `{-1, 0, 1}^n`, scaled by `step`, added to `k`.
pub(crate) fn neighbors(k: &Key, step: i64) -> impl Iterator<Item = Key> + '_ {
    let n = k.len();
    (0..3usize.pow(n as u32)).map(move |off| {
        let mut o = off;
        k.iter()
            .map(|&ki| {
                let d = (o % 3) as i64 - 1;
                o /= 3;
                ki + d * step
            })
            .collect()
    })
}

/// Integer points of `stride * Z^n` whose image under `to_point` lies in `ball`.
pub(crate) fn lattice_in_ball(ball: &Ball, step: f64, stride: i64) -> Vec<Key> {
    let n = ball.dim();
    let span = (ball.radius / (step * stride as f64)).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-span; n];
    loop {
        let k: Key = idx.iter().map(|i| i * stride).collect();
        let r2: f64 = k.iter().map(|&i| (step * i as f64).powi(2)).sum();
        if r2.sqrt() <= ball.radius + 1e-12 {
            out.push(k);
        }
        let mut a = 0;
        while a < n {
            idx[a] += 1;
            if idx[a] <= span {
                break;
            }
            idx[a] = -span;
            a += 1;
        }
        if a == n {
            break;
        }
    }
    out
}

/// Lattice points of density at least `c (1 - tol)`, clustered at radius `2 grid_step`.
///
/// The lattice is refined coarse to fine: a coarse level keeps points whose quotient at scale
/// twice its spacing reaches `screen * c`, and only their neighbors are examined one level down.
pub fn high_density_set(u: &ScalarField, c: f64, search: &Ball, grid_step: f64, opts: &DensityOptions) -> Result<HighDensitySet> {
    if !(c > 0.0) || !(grid_step > 0.0) {
        return Err(Error::InvalidInput("threshold and grid step must be positive".into()));
    }
    if !(u.p() >= 2.0) {
        return Err(Error::UnsupportedCharacteristic(u.p()));
    }
    let n = u.dim();
    if search.dim() != n {
        return Err(Error::Dimension("search ball dimension".into()));
    }
    let levels = opts.coarse_levels.unwrap_or_else(|| {
        let mut l = 0;
        while grid_step * 2f64.powi(l as i32 + 1) <= search.radius / 4.0 {
            l += 1;
        }
        l
    });
    let room = u.domain().radius - dist(&search.center, &u.domain().center) - search.radius;
    let top_scale = 4.0 * grid_step * 2f64.powi(levels as i32);
    if room < top_scale {
        return Err(Error::Domain(format!("search ball leaves {room} room, sweeps need {top_scale}")));
    }
    let point = |k: &Key| -> Vec<f64> { (0..n).map(|a| search.center[a] + grid_step * k[a] as f64).collect() };
    let inside = |k: &Key| dist(&point(k), &search.center) <= search.radius + 1e-12;

    let mut candidates = lattice_in_ball(search, grid_step, 1i64 << levels);
    let mut evaluated = 0usize;
    for level in (1..=levels).rev() {
        let h = grid_step * (1i64 << level) as f64;
        let thr = opts.screen * c;
        let kept: Vec<Key> =
            candidates.par_iter().filter(|k| quotient_at(u, &point(k), 2.0 * h, &opts.quad) >= thr).cloned().collect();
        evaluated += candidates.len();
        let half = 1i64 << (level - 1);
        let mut next: HashSet<Key> = HashSet::new();
        for k in &kept {
            next.extend(neighbors(k, half).filter(|nk| inside(nk)));
        }
        candidates = next.into_iter().collect();
        candidates.sort();
    }
    evaluated += candidates.len();
    let thr = c * (1.0 - opts.tol);
    let scored: Vec<(Key, f64)> = candidates
        .par_iter()
        .map(|k| (k.clone(), quotient_at(u, &point(k), grid_step, &opts.quad)))
        .filter(|(_, t)| *t >= thr)
        .collect();
    let points: Vec<Vec<f64>> = scored.iter().map(|(k, _)| point(k)).collect();
    let thetas: Vec<f64> = scored.iter().map(|(_, t)| *t).collect();
    let components = cluster(&points, &thetas, 2.0 * grid_step);
    Ok(HighDensitySet { count: components.len(), points, thetas, components, grid_step, evaluated })
}

/// Connected components of the graph joining points at distance at most `radius`.
pub fn cluster(points: &[Vec<f64>], weights: &[f64], radius: f64) -> Vec<Component> {
    let m = points.len();
    let n = points.first().map_or(0, |p| p.len());
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let cell = |x: &[f64]| -> Key { x.iter().map(|v| (v / radius).floor() as i64).collect() };
    let mut grid: HashMap<Key, Vec<usize>> = HashMap::new();
    for (i, x) in points.iter().enumerate() {
        grid.entry(cell(x)).or_default().push(i);
    }
    for (i, x) in points.iter().enumerate() {
        let base = cell(x);
        for nb in neighbors(&base, 1) {
            if let Some(list) = grid.get(&nb) {
                for &j in list {
                    if j < i && dist(x, &points[j]) <= radius * (1.0 + 1e-9) {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..m {
        let r = find(&mut parent, i);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    groups
        .into_iter()
        .map(|members| {
            let best = *members.iter().max_by(|&&a, &&b| weights[a].partial_cmp(&weights[b]).unwrap().then(b.cmp(&a))).unwrap();
            let mut centroid = vec![0.0; n];
            for &i in &members {
                for (c, v) in centroid.iter_mut().zip(&points[i]) {
                    *c += v / members.len() as f64;
                }
            }
            Component { peak: points[best].clone(), peak_theta: weights[best], centroid, members }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{kernel_pair, radial_kernel, riesz_sum};

    #[test]
    fn kernel_density_calibration() {
        let q = QuadratureSpec::default();
        let ladder = geometric_ladder(0.4, 0.5, 5);
        for theta in [0.5, 1.0, 2.0] {
            for p in [2.0, 3.0, 4.0] {
                let u = radial_kernel(3, p, theta, &[0.0; 3]).unwrap();
                let d = density(&u, &[0.0; 3], p, &ladder, &q).unwrap();
                assert!((d.theta_s - theta).abs() < 0.02 * theta, "{theta} {p} {d:?}");
                assert!(d.certificate);
                if p > 2.0 {
                    assert!(d.consistency_sv < 0.05 * theta, "{d:?}");
                }
            }
        }
    }

    #[test]
    fn smooth_point_has_zero_density() {
        let q = QuadratureSpec::default();
        let u = ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, |x| crate::geometry::dot(x, x));
        let d = density(&u, &[0.3, 0.0, 0.0], 3.0, &geometric_ladder(0.2, 0.5, 4), &q).unwrap();
        assert!(d.theta_s < 0.02, "{d:?}");
    }

    #[test]
    fn kernel_pair_density_at_center() {
        let q = QuadratureSpec::default();
        let u = kernel_pair(3, 3.0).unwrap();
        let d = density(&u, &[0.0; 3], 3.0, &geometric_ladder(0.2, 0.5, 4), &q).unwrap();
        assert!((d.theta_s - 1.0).abs() < 0.03, "{d:?}");
        assert!(d.consistency_sm < 0.05 && d.consistency_sv < 0.05, "{d:?}");
    }

    #[test]
    fn density_ladder_validation() {
        let q = QuadratureSpec::default();
        let u = kernel_pair(3, 3.0).unwrap();
        assert!(density(&u, &[0.0; 3], 3.0, &[0.4, 0.2, 0.1], &q).is_err());
        assert!(density(&u, &[0.0; 3], 3.0, &[0.1, 0.2, 0.4, 0.8], &q).is_err());
    }

    #[test]
    fn single_kernel_high_density() {
        let u = riesz_sum(&[vec![0.0; 3]], &[2.0], 3.0, 3).unwrap();
        let set = high_density_set(&u, 1.0, &Ball::centered(3, 0.5), 0.05, &DensityOptions::default()).unwrap();
        assert_eq!(set.count, 1);
        assert!(crate::geometry::norm(&set.components[0].peak) <= 0.05 + 1e-12);
        assert!(crate::geometry::norm(&set.components[0].centroid) < 1e-9);
        let h = ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, |x| x[0] * x[1]);
        let empty = high_density_set(&h, 0.1, &Ball::centered(3, 0.5), 0.05, &DensityOptions::default()).unwrap();
        assert_eq!(empty.count, 0);
    }
}
