//! Vitali coverings, tube volumes, the Minkowski bound check and the decomposition covering.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{high_density_set, DensityOptions};
use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geometry::{derive_seed, dist, rng, Ball};
use crate::homogeneity::{dyadic_scales, homogeneity_defect, stratum_membership, HomogeneityOptions, Membership};
use crate::means::laplacian_mass;
use crate::quadrature::QuadratureSpec;

/// Largest number of lattice cells a tube-volume estimate may touch.
pub const TUBE_CELL_LIMIT: usize = 50_000_000;

fn cell_of(x: &[f64], h: f64) -> Vec<i64> {
    x.iter().map(|c| (c / h).floor() as i64).collect()
}

/// Uniform hash grid over points for radius queries.
struct SpatialHash<'a> {
    h: f64,
    cells: HashMap<Vec<i64>, Vec<usize>>,
    points: &'a [Vec<f64>],
}

impl<'a> SpatialHash<'a> {
    fn new(points: &'a [Vec<f64>], h: f64) -> Self {
        Self { h, cells: HashMap::new(), points }
    }

    fn insert(&mut self, i: usize) {
        self.cells.entry(cell_of(&self.points[i], self.h)).or_default().push(i);
    }

    /// Whether some inserted point lies within `radius <= h` of `x` (strictly closer when `strict`).
    fn any_within(&self, x: &[f64], radius: f64, strict: bool) -> bool {
        let c = cell_of(x, self.h);
        let n = c.len();
        let mut offset = vec![-1i64; n];
        loop {
            let key: Vec<i64> = c.iter().zip(&offset).map(|(a, b)| a + b).collect();
            if let Some(ids) = self.cells.get(&key) {
                for &i in ids {
                    let d = dist(&self.points[i], x);
                    if if strict { d < radius } else { d <= radius } {
                        return true;
                    }
                }
            }
            let mut a = 0;
            while a < n {
                offset[a] += 1;
                if offset[a] <= 1 {
                    break;
                }
                offset[a] = -1;
                a += 1;
            }
            if a == n {
                return false;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitaliCover {
    /// Indices of selected points, in selection order.
    pub selected: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
    pub radius: f64,
    pub cover_radius: f64,
}

/// Greedy Vitali selection for equal radii: selected closed `r`-balls are pairwise disjoint and
/// the `5r`-balls around them cover every input point.
pub fn vitali_cover(points: &[Vec<f64>], r: f64) -> Result<VitaliCover> {
    if !(r > 0.0) {
        return Err(Error::InvalidInput("cover radius must be positive".into()));
    }
    let mut hash = SpatialHash::new(points, 2.0 * r);
    let mut selected = Vec::new();
    for (i, x) in points.iter().enumerate() {
        if !hash.any_within(x, 2.0 * r, false) {
            hash.insert(i);
            selected.push(i);
        }
    }
    let centers = selected.iter().map(|&i| points[i].clone()).collect();
    Ok(VitaliCover { selected, centers, radius: r, cover_radius: 5.0 * r })
}

/// Exhaustive check of both Vitali properties: `(pairwise disjoint, 5r-cover)`.
pub fn verify_vitali(points: &[Vec<f64>], cover: &VitaliCover) -> (bool, bool) {
    let c = &cover.centers;
    let disjoint = (0..c.len()).all(|i| (i + 1..c.len()).all(|j| dist(&c[i], &c[j]) > 2.0 * cover.radius));
    let covered = points.iter().all(|x| c.iter().any(|y| dist(x, y) <= cover.cover_radius));
    (disjoint, covered)
}

/// Greedy `r`-net: every point lies within `r` of a selected point (selection in input order).
pub fn greedy_net(points: &[Vec<f64>], r: f64) -> Vec<usize> {
    let mut hash = SpatialHash::new(points, r);
    let mut selected = Vec::new();
    for (i, x) in points.iter().enumerate() {
        if !hash.any_within(x, r, false) {
            hash.insert(i);
            selected.push(i);
        }
    }
    selected
}

fn pack(cell: &[i64]) -> u128 {
    const BITS: u32 = 21;
    const BIAS: i64 = 1 << (BITS - 1);
    cell.iter().fold(0u128, |acc, &c| (acc << BITS) | ((c + BIAS) as u128 & ((1u128 << BITS) - 1)))
}

/// Counting-measure volume of `B_r(points) cap ambient`: lattice cells of side `h` (seeded
/// offset) whose centers lie within `r` of a point and inside the ambient ball.
pub fn tube_volume(points: &[Vec<f64>], r: f64, ambient: &Ball, h: f64, seed: u64) -> Result<f64> {
    if !(r > 0.0 && h > 0.0) {
        return Err(Error::InvalidInput("tube radius and resolution must be positive".into()));
    }
    if h > r / 4.0 {
        return Err(Error::Resolution(format!("cell size {h} exceeds r/4 = {}", r / 4.0)));
    }
    let n = ambient.dim();
    if points.iter().any(|x| x.len() != n) {
        return Err(Error::Dimension("points and ambient ball differ in dimension".into()));
    }
    if n > 6 {
        return Err(Error::Dimension("tube volumes support n <= 6".into()));
    }
    let mut gen = rng(derive_seed(seed, 0x70BE));
    let offset: Vec<f64> = (0..n).map(|_| gen.gen::<f64>() * h).collect();
    let span = (2.0 * r / h).ceil() as usize + 2;
    let per_point = span.pow(n as u32);
    if per_point.saturating_mul(points.len()) > TUBE_CELL_LIMIT {
        return Err(Error::MemoryGuard(format!("{} cells per point for {} points", per_point, points.len())));
    }
    let mut keys: Vec<u128> = Vec::new();
    let mut lo = vec![0i64; n];
    let mut center = vec![0.0; n];
    for x in points {
        for a in 0..n {
            lo[a] = ((x[a] - r - offset[a]) / h).floor() as i64;
        }
        let mut idx = vec![0usize; n];
        'cells: loop {
            let cell: Vec<i64> = (0..n).map(|a| lo[a] + idx[a] as i64).collect();
            for a in 0..n {
                center[a] = offset[a] + (cell[a] as f64 + 0.5) * h;
            }
            if dist(&center, x) <= r && ambient.contains(&center) {
                keys.push(pack(&cell));
            }
            let mut a = 0;
            while a < n {
                idx[a] += 1;
                if idx[a] < span {
                    continue 'cells;
                }
                idx[a] = 0;
                a += 1;
            }
            break;
        }
    }
    keys.sort_unstable();
    keys.dedup();
    Ok(keys.len() as f64 * h.powi(n as i32))
}

/// Least-squares slope of `log y` against `log x` over positive entries.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0).map(|(x, y)| (x.ln(), y.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumReport {
    pub points: Vec<Vec<f64>>,
    pub indeterminate: Vec<Vec<f64>>,
    /// `(r, volume)` pairs.
    pub tube_volumes: Vec<(f64, f64)>,
    /// `(r, tube / (eta^-1 mass r^p))` pairs.
    pub bound_ratios: Vec<(f64, f64)>,
    /// `(r, Vitali ball count)` pairs.
    pub cover_counts: Vec<(f64, usize)>,
    /// `(r, Laplacian mass of B_{1+r})` pairs.
    pub masses: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    /// Set when every ratio is finite and none exceeds twice the ratio at the largest radius.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiOptions {
    pub density: DensityOptions,
    /// Lattice step of the high-density search as a fraction of the smallest radius.
    pub step_fraction: f64,
    /// Tube cells per radius (`h = r / cells_per_radius`, at least 4).
    pub cells_per_radius: f64,
    pub mass_quad: QuadratureSpec,
    pub seed: u64,
}

impl Default for MinkowskiOptions {
    fn default() -> Self {
        Self {
            density: DensityOptions::default(),
            step_fraction: 0.5,
            cells_per_radius: 4.0,
            mass_quad: QuadratureSpec::default(),
            seed: 0x5EED,
        }
    }
}

/// Tube volumes of `E_eta(u) cap B_1` against `C eta^-1 (int_{B_{1+r}} Delta u) r^p`.
pub fn minkowski_bound_check(u: &ScalarField, eta: f64, radii: &[f64], opts: &MinkowskiOptions) -> Result<StratumReport> {
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::Range("radii must lie in (0, 1)".into()));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidInput("eta must be positive".into()));
    }
    let n = u.dim();
    let p = u.p();
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let unit = Ball::centered(n, 1.0);
    let step = radii[0] * opts.step_fraction;
    let set = high_density_set(u, eta, &unit, step, &opts.density)?;
    let origin = vec![0.0; n];
    let mut report = StratumReport {
        points: set.points.clone(),
        indeterminate: vec![],
        tube_volumes: vec![],
        bound_ratios: vec![],
        cover_counts: vec![],
        masses: vec![],
        slope: None,
        bounded: true,
    };
    for &r in &radii {
        let h = r / opts.cells_per_radius.max(4.0);
        let vol = tube_volume(&set.points, r, &unit, h, opts.seed)?;
        let mass = laplacian_mass(u, &origin, 1.0 + r, &opts.mass_quad)?.mass;
        let ratio = if vol == 0.0 { 0.0 } else { vol / (mass / eta * r.powf(p)) };
        report.tube_volumes.push((r, vol));
        report.masses.push((r, mass));
        report.bound_ratios.push((r, ratio));
        report.cover_counts.push((r, vitali_cover(&set.points, r)?.selected.len()));
    }
    let (rs, vs): (Vec<f64>, Vec<f64>) = report.tube_volumes.iter().copied().unzip();
    report.slope = log_log_slope(&rs, &vs);
    let last = report.bound_ratios.last().map(|x| x.1).unwrap_or(0.0);
    report.bounded = report.bound_ratios.iter().all(|(_, q)| q.is_finite() && *q >= 0.0 && *q <= 2.0 * last + 1e-12);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionOptions {
    pub homogeneity: HomogeneityOptions,
    /// Threshold of the H/L classification.
    pub epsilon: f64,
    /// Initial ball.
    pub initial: Ball,
    /// Candidate lattice step as a multiple of the current radius.
    pub candidate_step: f64,
}

impl DecompositionOptions {
    pub fn new(n: usize, epsilon: f64, seed: u64) -> Self {
        Self { homogeneity: HomogeneityOptions::sweep(seed), epsilon, initial: Ball::centered(n, 1.0), candidate_step: 2.0 }
    }
}

/// One active ball of the covering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverBall {
    pub center: Vec<f64>,
    /// H/L labels of the ancestors, coarsest first.
    pub tuple: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTrace {
    pub j: usize,
    pub scale: f64,
    pub count: usize,
    pub tuple_counts: BTreeMap<String, usize>,
    pub balls: Vec<CoverBall>,
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub gamma: f64,
    pub eta: f64,
    pub k: usize,
    pub counts: Vec<usize>,
    pub trace: Vec<ScaleTrace>,
}

impl DecompositionReport {
    /// Log-slope of the counts against `1/gamma^j`, over the scales with nonzero counts.
    pub fn slope(&self) -> Option<f64> {
        let xs: Vec<f64> = self.trace.iter().map(|t| 1.0 / t.scale).collect();
        let ys: Vec<f64> = self.trace.iter().map(|t| t.count as f64).collect();
        log_log_slope(&xs, &ys)
    }
}

/// Inductive covering of the quantitative stratum: at scale `gamma^j` each active ball is
/// labelled H (not certified `epsilon`-close to a 0-homogeneous function, indeterminate
/// included) or L, candidates on a lattice inside the active balls are kept unless excluded from
/// `S^k_{eta}` at the new dyadic scales, and the survivors of each tuple are covered by a greedy
/// net of radius `gamma^j`.
pub fn decomposition_cover(
    u: &ScalarField,
    eta: f64,
    gamma: f64,
    j_max: usize,
    k: usize,
    opts: &DecompositionOptions,
) -> Result<DecompositionReport> {
    if !(gamma > 0.0 && gamma <= 0.25) {
        return Err(Error::Range(format!("gamma = {gamma} must lie in (0, 1/4]")));
    }
    if j_max == 0 || j_max > 8 {
        return Err(Error::Range("j_max must lie in 1..=8".into()));
    }
    let n = u.dim();
    if k >= n {
        return Err(Error::InvalidInput(format!("k = {k} must be below n = {n}")));
    }
    let r0 = opts.initial.radius;
    let mut active = vec![CoverBall { center: opts.initial.center.clone(), tuple: String::new() }];
    let mut trace = Vec::new();
    let mut counts = vec![1usize];
    for j in 1..=j_max {
        let parent_r = r0 * gamma.powi(j as i32 - 1);
        let rho = r0 * gamma.powi(j as i32);
        let labels: Vec<char> = active
            .par_iter()
            .map(|b| match homogeneity_defect(u, &b.center, parent_r, 0, &opts.homogeneity) {
                Ok(rep) if rep.upper <= opts.epsilon => 'L',
                _ => 'H',
            })
            .collect();
        let mut scales: Vec<f64> =
            dyadic_scales(rho).into_iter().filter(|&s| s >= rho * (1.0 - 1e-12) && s < parent_r * (1.0 - 1e-12)).collect();
        if scales.is_empty() {
            scales.push(rho);
        }
        let step = opts.candidate_step * rho;
        let mut by_key: BTreeMap<Vec<i64>, BTreeMap<String, ()>> = BTreeMap::new();
        for (b, label) in active.iter().zip(&labels) {
            let tuple = format!("{}{}", b.tuple, label);
            let reach = (parent_r / step).ceil() as i64;
            let base: Vec<i64> = b.center.iter().map(|c| (c / step).round() as i64).collect();
            let mut idx = vec![-reach; n];
            'lattice: loop {
                let key: Vec<i64> = base.iter().zip(&idx).map(|(a, o)| a + o).collect();
                let x: Vec<f64> = key.iter().map(|&i| i as f64 * step).collect();
                if dist(&x, &b.center) <= parent_r && opts.initial.contains(&x) {
                    by_key.entry(key).or_default().insert(tuple.clone(), ());
                }
                let mut a = 0;
                while a < n {
                    idx[a] += 1;
                    if idx[a] <= reach {
                        continue 'lattice;
                    }
                    idx[a] = -reach;
                    a += 1;
                }
                break;
            }
        }
        let keys: Vec<&Vec<i64>> = by_key.keys().collect();
        let kept: Vec<bool> = keys
            .par_iter()
            .map(|key| {
                let x: Vec<f64> = key.iter().map(|&i| i as f64 * step).collect();
                !matches!(stratum_membership(u, &x, eta, k, &scales, &opts.homogeneity), Ok(Membership::Excluded))
            })
            .collect();
        let mut per_tuple: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
        for ((key, tuples), keep) in by_key.iter().zip(&kept) {
            if *keep {
                let x: Vec<f64> = key.iter().map(|&i| i as f64 * step).collect();
                for t in tuples.keys() {
                    per_tuple.entry(t.clone()).or_default().push(x.clone());
                }
            }
        }
        let mut next = Vec::new();
        let mut tuple_counts = BTreeMap::new();
        for (t, pts) in &per_tuple {
            let net = greedy_net(pts, rho);
            tuple_counts.insert(t.clone(), net.len());
            next.extend(net.into_iter().map(|i| CoverBall { center: pts[i].clone(), tuple: t.clone() }));
        }
        counts.push(next.len());
        trace.push(ScaleTrace { j, scale: rho, count: next.len(), tuple_counts, balls: next.clone(), candidates: keys.len() });
        active = next;
        if active.is_empty() {
            for jj in j + 1..=j_max {
                counts.push(0);
                trace.push(ScaleTrace {
                    j: jj,
                    scale: r0 * gamma.powi(jj as i32),
                    count: 0,
                    tuple_counts: BTreeMap::new(),
                    balls: vec![],
                    candidates: 0,
                });
            }
            break;
        }
    }
    Ok(DecompositionReport { gamma, eta, k, counts, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::unit_ball_volume;
    use proptest::prelude::*;

    #[test]
    fn vitali_examples() {
        let one = vec![vec![0.3, 0.1, 0.0]];
        assert_eq!(vitali_cover(&one, 0.1).unwrap().centers, one);
        let two = vec![vec![0.0, 0.0, 0.0], vec![0.3, 0.0, 0.0]];
        assert_eq!(vitali_cover(&two, 0.1).unwrap().selected, vec![0, 1]);
        let r = 0.1;
        let pts: Vec<Vec<f64>> = crate::density::lattice_in_ball(&Ball::centered(3, 1.0), r / 2.0, 1)
            .iter()
            .map(|k| k.iter().map(|&i| i as f64 * r / 2.0).collect())
            .collect();
        let cover = vitali_cover(&pts, r).unwrap();
        assert_eq!(verify_vitali(&pts, &cover), (true, true));
        let bound = Ball::centered(3, 1.0 + r).volume() / (unit_ball_volume(3) * r.powi(3));
        assert!((cover.selected.len() as f64) <= bound);
    }

    #[test]
    fn tube_volume_examples() {
        let amb = Ball::centered(3, 2.0);
        let r = 0.2;
        let v = tube_volume(&[vec![0.0; 3]], r, &amb, r / 20.0, 1).unwrap();
        let exact = unit_ball_volume(3) * r.powi(3);
        assert!((v / exact - 1.0).abs() < 0.05, "{v} {exact}");
        let seg: Vec<Vec<f64>> = (0..=200).map(|i| vec![-0.5 + i as f64 / 200.0, 0.0, 0.0]).collect();
        let v = tube_volume(&seg, 0.1, &amb, 0.01, 2).unwrap();
        let exact = std::f64::consts::PI * 0.01 + unit_ball_volume(3) * 1e-3;
        assert!((v / exact - 1.0).abs() < 0.05, "{v} {exact}");
        assert!(matches!(tube_volume(&seg, 0.1, &amb, 0.03, 2), Err(Error::Resolution(_))));
    }

    #[test]
    fn tube_volume_of_plane_patch() {
        let amb = Ball::centered(3, 1.0);
        let step = 0.02;
        let pts: Vec<Vec<f64>> = crate::density::lattice_in_ball(&Ball::centered(3, 1.0), step, 1)
            .iter()
            .filter(|k| k[2] == 0)
            .map(|k| k.iter().map(|&i| i as f64 * step).collect())
            .collect();
        let r = 0.1;
        let v = tube_volume(&pts, r, &amb, r / 5.0, 3).unwrap();
        // slab of half-width r inside the unit ball
        let exact = std::f64::consts::PI * (2.0 * r - 2.0 * r.powi(3) / 3.0);
        assert!((v / exact - 1.0).abs() < 0.05, "{v} {exact}");
    }

    #[test]
    fn slope_fit() {
        let xs = [0.1, 0.2, 0.4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powi(3)).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 3.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn vitali_properties(pts in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 3), 1..80), r in 0.01f64..0.5) {
            let cover = vitali_cover(&pts, r).unwrap();
            prop_assert_eq!(verify_vitali(&pts, &cover), (true, true));
        }

        #[test]
        fn tube_subadditive(a in proptest::collection::vec(proptest::collection::vec(-0.5f64..0.5, 2), 1..6),
                            b in proptest::collection::vec(proptest::collection::vec(-0.5f64..0.5, 2), 1..6)) {
            let amb = Ball::centered(2, 2.0);
            let r = 0.1;
            let h = 0.01;
            let va = tube_volume(&a, r, &amb, h, 0).unwrap();
            let vb = tube_volume(&b, r, &amb, h, 0).unwrap();
            let both: Vec<Vec<f64>> = a.iter().chain(&b).cloned().collect();
            let vab = tube_volume(&both, r, &amb, h, 0).unwrap();
            prop_assert!(vab <= va + vb + 1e-12);
            prop_assert!(vab + 1e-12 >= va.max(vb));
        }
    }
}
