//! Acceptance suite producing a deterministic, serializable report.

use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::covering::{
    decomposition_cover, log_log_slope, minkowski_bound_check, tube_volume, verify_vitali, vitali_cover, DecompositionOptions,
    MinkowskiOptions,
};
use crate::density::{density, geometric_ladder, high_density_set, DensityOptions};
use crate::energy::{
    f_energy_profile, g_energy_bound_check, g_energy_profile, monotonicity_violation, normalize_for_monotonicity,
    unit_ball_centers, GrassmannianFamily,
};
use crate::error::Result;
use crate::examples::{
    grid_sample, harmonic_plus_kernel, invariant_cone_field, kernel_pair, log_modulus, plane_kernel, radial_kernel, riesz_sum,
    ComplexMonomial, Monomial,
};
use crate::fields::{l1_norm, ScalarField};
use crate::geometry::{derive_seed, dist, dot, rng, unit_ball_volume, Ball, PlaneFrame};
use crate::homogeneity::{
    cone_splitting_check, homogeneity_defect, stratum_set, ConeSplitStatus, HomogeneityOptions, StratumOptions,
};
use crate::kernels::{kp_convexity_defect, radial_laplacian_residual_extrapolated};
use crate::means::{profile, Statistic};
use crate::quadrature::QuadratureSpec;

pub const REPORT_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 7;

pub const CRITERIA: [&str; 13] = [
    "kernel_harmonicity",
    "density_calibration",
    "monotone_quotients",
    "f_energy_monotonicity",
    "g_energy",
    "counting",
    "minkowski_bound",
    "stratum_scaling",
    "cone_splitting",
    "vitali_combinatorics",
    "decomposition_covering",
    "homogeneity_sandwich",
    "determinism",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    /// Headline measurement compared against `tolerance`.
    pub measured: f64,
    pub tolerance: f64,
    pub detail: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: u32,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

impl CriterionResult {
    fn new(id: u8, passed: bool, measured: f64, tolerance: f64, detail: Value) -> Self {
        Self { id, name: CRITERIA[id as usize - 1].into(), passed, measured, tolerance, detail }
    }

    /// One-line summary.
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<24} measured {:.6e} tolerance {:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance
        )
    }
}

/// Runs one of criteria 1 to 12. Errors become failed results carrying the diagnostic.
pub fn run_criterion(id: u8, seed: u64) -> CriterionResult {
    let out = match id {
        1 => kernel_harmonicity(),
        2 => density_calibration(),
        3 => monotone_quotients(seed),
        4 => f_energy_monotonicity(),
        5 => g_energy(seed),
        6 => counting(seed),
        7 => minkowski(seed),
        8 => stratum_scaling(seed),
        9 => cone_splitting(),
        10 => vitali(seed),
        11 => decomposition(seed),
        12 => sandwich(seed),
        _ => return CriterionResult::new(13, false, f64::NAN, 0.0, json!({ "error": format!("unknown criterion {id}") })),
    };
    out.unwrap_or_else(|e| CriterionResult::new(id, false, f64::NAN, 0.0, json!({ "error": e.to_string() })))
}

/// Runs the selected criteria; criterion 13 re-runs the others on a two-thread pool and compares
/// their serialized results byte for byte. `progress` sees each result with its wall time.
pub fn run_selected(seed: u64, ids: &[u8], mut progress: impl FnMut(&CriterionResult, Duration)) -> VerifyReport {
    let mut criteria = Vec::new();
    let base: Vec<u8> = ids.iter().copied().filter(|&i| (1..=12).contains(&i)).collect();
    for &id in &base {
        let t = Instant::now();
        let res = run_criterion(id, seed);
        progress(&res, t.elapsed());
        criteria.push(res);
    }
    if ids.contains(&13) {
        let t = Instant::now();
        let res = determinism(seed, &base, &criteria);
        progress(&res, t.elapsed());
        criteria.push(res);
    }
    let passed = !criteria.is_empty() && criteria.iter().all(|c| c.passed);
    VerifyReport { version: REPORT_VERSION, seed, criteria, passed }
}

/// Full suite.
pub fn run(seed: u64) -> VerifyReport {
    let all: Vec<u8> = (1..=13).collect();
    run_selected(seed, &all, |_, _| {})
}

fn determinism(seed: u64, ids: &[u8], first: &[CriterionResult]) -> CriterionResult {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(2).build();
    let second: Vec<CriterionResult> = match pool {
        Ok(pool) => pool.install(|| ids.iter().map(|&id| run_criterion(id, seed)).collect()),
        Err(e) => return CriterionResult::new(13, false, f64::NAN, 0.0, json!({ "error": e.to_string() })),
    };
    let a = serde_json::to_string(first).unwrap_or_default();
    let b = serde_json::to_string(&second).unwrap_or_default();
    let differing: Vec<u8> = first
        .iter()
        .zip(&second)
        .filter(|(x, y)| serde_json::to_string(x).ok() != serde_json::to_string(y).ok())
        .map(|(x, _)| x.id)
        .collect();
    let same = a == b;
    CriterionResult::new(
        13,
        same,
        differing.len() as f64,
        0.0,
        json!({ "rerun_threads": 2, "differing": differing, "bytes": a.len() }),
    )
}

fn kernel_harmonicity() -> Result<CriterionResult> {
    let mut worst: f64 = 0.0;
    let radii: Vec<f64> = (0..20).map(|i| 0.25 * 16f64.powf(i as f64 / 19.0)).collect();
    for p in [2.0, 3.0, 4.0] {
        for &t in &radii {
            worst = worst.max(radial_laplacian_residual_extrapolated(p, t, 2e-3 * t)?.abs());
        }
    }
    Ok(CriterionResult::new(1, worst <= 1e-6, worst, 1e-6, json!({ "radii": radii.len(), "p": [2, 3, 4] })))
}

fn density_calibration() -> Result<CriterionResult> {
    let q = QuadratureSpec::default();
    let ladder = geometric_ladder(0.4, 0.5, 5);
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for n in [3usize, 4] {
        for p in [2.0, 3.0, 4.0] {
            if p > n as f64 {
                continue;
            }
            for theta in [0.5, 1.0, 2.0] {
                let u = radial_kernel(n, p, theta, &vec![0.0; n])?;
                let d = density(&u, &vec![0.0; n], p, &ladder, &q)?;
                let rel = (d.theta_s - theta).abs() / theta;
                worst = worst.max(rel);
                rows.push(json!({ "n": n, "p": p, "theta": theta, "estimate": d.theta_s }));
            }
        }
    }
    let smooth_ladder = geometric_ladder(0.2, 0.5, 4);
    let quad3 = ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, |x| dot(x, x));
    let s1 = density(&quad3, &[0.3, 0.0, 0.0], 3.0, &smooth_ladder, &q)?.theta_s;
    let k4 = radial_kernel(4, 3.0, 1.0, &[0.0; 4])?;
    let s2 = density(&k4, &[0.5, 0.0, 0.0, 0.0], 3.0, &smooth_ladder, &q)?.theta_s;
    let smooth = s1.max(s2);
    let passed = worst <= 0.02 && smooth <= 0.02;
    Ok(CriterionResult::new(
        2,
        passed,
        worst,
        0.02,
        json!({ "kernels": rows, "smooth_density": smooth, "smooth_tolerance": 0.02 }),
    ))
}

fn random_point(n: usize, radius: f64, gen: &mut impl Rng) -> Vec<f64> {
    loop {
        let x: Vec<f64> = (0..n).map(|_| gen.gen_range(-radius..radius)).collect();
        if dot(&x, &x) <= radius * radius {
            return x.iter().map(|c| (c * 1e4).round() / 1e4).collect();
        }
    }
}

fn example_fields() -> Result<Vec<ScalarField>> {
    let smooth = ScalarField::analytic(3, Ball::centered(3, 3.0), 3.0, |x| dot(x, x) + x[0]);
    Ok(vec![
        riesz_sum(&[vec![0.0; 3], vec![0.6, 0.0, 0.0], vec![0.0, -0.5, 0.3]], &[1.0, 0.5, 1.5], 3.0, 3)?,
        radial_kernel(3, 3.0, 1.0, &[0.0; 3])?,
        kernel_pair(3, 3.0)?,
        plane_kernel(&PlaneFrame::coordinate(4, &[3]), 3.0)?,
        log_modulus(
            &[
                ComplexMonomial { re: 1.0, im: 0.0, exponents: vec![1, 1] },
                ComplexMonomial { re: -0.25, im: 0.0, exponents: vec![0, 0] },
            ],
            2,
        )?,
        harmonic_plus_kernel(&[Monomial { coef: 1.0, exponents: vec![1, 1, 0] }], &[0.0; 3], 1.0, 3.0)?,
        invariant_cone_field(4, 3.0, &PlaneFrame::zero(4))?,
        invariant_cone_field(4, 2.0, &PlaneFrame::coordinate(4, &[0]))?,
        grid_sample(&smooth, 49, &Ball::centered(3, 1.5))?,
    ])
}

fn monotone_quotients(seed: u64) -> Result<CriterionResult> {
    let q = QuadratureSpec::default();
    let radii: Vec<f64> = (1..=8).map(|i| 0.05 * i as f64).collect();
    let mut gen = rng(derive_seed(seed, 3));
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for u in example_fields()? {
        let n = u.dim();
        let mut centers = vec![vec![0.0; n]];
        while centers.len() < 5 {
            let x = random_point(n, 0.8, &mut gen);
            if u.singular_distance(&x).is_none_or(|d| d >= 0.5) {
                centers.push(x);
            }
        }
        let mut field_worst: f64 = 0.0;
        for x in &centers {
            let prof = profile(&u, x, &radii, Statistic::S, &q)?;
            field_worst = field_worst.max(kp_convexity_defect(&prof, u.p())?);
        }
        worst = worst.max(field_worst);
        rows.push(json!({ "field": u.label(), "defect": field_worst }));
    }
    Ok(CriterionResult::new(
        3,
        worst <= 1e-3,
        worst,
        1e-3,
        json!({ "fields": rows, "centers_per_field": 5, "singular_clearance": 0.5 }),
    ))
}

fn f_energy_monotonicity() -> Result<CriterionResult> {
    let q = QuadratureSpec::default();
    let u = kernel_pair(3, 3.0)?;
    let centers = unit_ball_centers(3, 0.5);
    let nrm = normalize_for_monotonicity(&u, &centers, &q)?;
    let v = nrm.field.clone().expect("normalization carries its field");
    let probes: Vec<Vec<f64>> = vec![
        vec![0.0, 0.0, 0.0],
        vec![0.5, 0.0, 0.0],
        vec![-0.5, 0.0, 0.0],
        vec![0.0, 0.5, 0.0],
        vec![0.0, -0.5, 0.0],
        vec![0.0, 0.0, 0.5],
        vec![0.0, 0.0, -0.5],
        vec![0.5, 0.5, 0.0],
        vec![-0.5, 0.0, 0.5],
    ];
    let radii: Vec<f64> = (1..=9).map(|i| 0.05 * i as f64).collect();
    let mut worst: f64 = 0.0;
    for x in &probes {
        let prof = f_energy_profile(&v, x, &radii, &q)?;
        worst = worst.max(monotonicity_violation(&prof.values));
    }
    Ok(CriterionResult::new(
        4,
        worst <= 2e-3,
        worst,
        2e-3,
        json!({ "normalization": nrm.n_const, "centers": nrm.centers, "probes": probes.len() }),
    ))
}

fn g_energy(seed: u64) -> Result<CriterionResult> {
    let q = QuadratureSpec::default();
    let u = kernel_pair(3, 2.0)?;
    let family = GrassmannianFamily::full(3, 2, 64, derive_seed(seed, 5))?;
    let radii = [0.1, 0.2, 0.3, 0.4, 0.5];
    let mut worst: f64 = 0.0;
    for x in [vec![0.0; 3], vec![0.5, 0.0, 0.0], vec![0.2, 0.3, 0.0]] {
        let g = g_energy_profile(&u, &x, &radii, &family, &q)?;
        for i in 0..radii.len() - 1 {
            let drop = g.profile.values[i] - g.profile.values[i + 1];
            let se = g.std_error[i].max(g.std_error[i + 1]);
            if drop > 0.0 {
                worst = worst.max(if se > 0.0 { drop / (3.0 * se) } else { f64::INFINITY });
            }
        }
    }
    let a = g_energy_profile(&u, &[0.0; 3], &radii, &family, &q)?;
    let b = g_energy_profile(&u.scaled(2.0), &[0.0; 3], &radii, &family, &q)?;
    let scaling =
        a.profile.values.iter().zip(&b.profile.values).map(|(x, y)| (2.0 * x - y).abs() / x.abs().max(1.0)).fold(0.0, f64::max);
    let lambda = 1.01 * l1_norm(&u, &Ball::centered(3, 2.0), &q)?.value;
    let mut ratios = Vec::new();
    for s in 1..=3u64 {
        let rep = g_energy_bound_check(&u, lambda, &family.with_seed(derive_seed(seed, 50 + s)), &[vec![0.0; 3]], &q)?;
        ratios.push(rep.annulus_ratio);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r - mean).abs()).fold(0.0, f64::max) / mean.abs();
    let finite = ratios.iter().all(|r| r.is_finite());
    let passed = worst <= 1.0 && scaling <= 1e-10 && finite && spread <= 0.1;
    Ok(CriterionResult::new(
        5,
        passed,
        worst,
        1.0,
        json!({ "monotonicity_in_mc_units": worst, "scaling_defect": scaling, "scaling_tolerance": 1e-10, "annulus_ratios": ratios, "ratio_spread": spread, "spread_tolerance": 0.1, "samples": 64 }),
    ))
}

fn separated_centers(m: usize, gen: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    while out.len() < m {
        let x: Vec<f64> = random_point(3, 0.6, gen).iter().map(|c| (c * 100.0).round() / 100.0).collect();
        if out.iter().all(|y| dist(&x, y) >= 0.4) {
            out.push(x);
        }
    }
    out
}

fn counting(seed: u64) -> Result<CriterionResult> {
    let mut gen = rng(derive_seed(seed, 6));
    let c = 0.8;
    let mut rows = Vec::new();
    let mut misses = 0usize;
    for m in [1usize, 3, 5] {
        let centers = separated_centers(m, &mut gen);
        let weights: Vec<f64> = (0..m).map(|_| (gen.gen_range(1.0..1.5f64) * 100.0).round() / 100.0).collect();
        let u = riesz_sum(&centers, &weights, 3.0, 3)?;
        let set = high_density_set(&u, c, &Ball::centered(3, 1.0), 0.05, &DensityOptions::default())?;
        misses += set.count.abs_diff(m);
        rows.push(json!({ "m": m, "components": set.count, "centers": centers, "weights": weights }));
    }
    Ok(CriterionResult::new(6, misses == 0, misses as f64, 0.0, json!({ "threshold": c, "cases": rows })))
}

fn minkowski(seed: u64) -> Result<CriterionResult> {
    let u = plane_kernel(&PlaneFrame::coordinate(4, &[0]), 3.0)?;
    let radii: Vec<f64> = (1..=10).map(|i| 0.02 * i as f64).collect();
    let opts = MinkowskiOptions { seed, ..MinkowskiOptions::default() };
    let rep = minkowski_bound_check(&u, 0.9, &radii, &opts)?;
    let slope = rep.slope.unwrap_or(f64::NAN);
    let err = (slope - 3.0).abs();
    let passed = err <= 0.3 && rep.bounded;
    Ok(CriterionResult::new(
        7,
        passed,
        err,
        0.3,
        json!({ "slope": slope, "bounded": rep.bounded, "eta": 0.9, "bound_ratios": rep.bound_ratios, "points": rep.points.len() }),
    ))
}

fn stratum_scaling(seed: u64) -> Result<CriterionResult> {
    let (n, k, eta) = (4usize, 1usize, 0.15);
    let u = plane_kernel(&PlaneFrame::coordinate(n, &[3]), 3.0)?;
    let opts = StratumOptions { homogeneity: HomogeneityOptions::sweep(seed), coarse_levels: 1 };
    let search = Ball::centered(n, 0.3);
    let unit = Ball::centered(n, 1.0);
    let radii = [0.025, 0.05, 0.1];
    let mut vols = Vec::new();
    let mut members = Vec::new();
    for &r in &radii {
        let set = stratum_set(&u, eta, r, k, &search, 2.0 * r, &opts)?;
        vols.push(tube_volume(&set.points, r, &unit, r / 4.0, seed)?);
        members.push(set.points.len());
    }
    let slope = log_log_slope(&radii, &vols).unwrap_or(f64::NAN);
    let bound = (n - k) as f64 - eta - 0.3;
    Ok(CriterionResult::new(
        8,
        slope >= bound,
        slope,
        bound,
        json!({ "radii": radii, "tube_volumes": vols, "members": members, "eta": eta }),
    ))
}

fn cone_splitting() -> Result<CriterionResult> {
    let q = QuadratureSpec { shells: 12, ball_sphere_nodes: 256, ..QuadratureSpec::default() };
    let h = plane_kernel(&PlaneFrame::coordinate(4, &[2, 3]), 2.0)?;
    let a = cone_splitting_check(&h, &[0.0; 4], &PlaneFrame::coordinate(4, &[3]), &[0.0, 0.0, 0.5, 0.0], 1e-3, &q)?;
    let g = invariant_cone_field(4, 2.0, &PlaneFrame::coordinate(4, &[0]))?;
    let b = cone_splitting_check(&g, &[0.0; 4], &PlaneFrame::zero(4), &[0.5, 0.0, 0.0, 0.0], 1e-3, &q)?;
    let kern = radial_kernel(3, 3.0, 1.0, &[0.0; 3])?;
    let c = cone_splitting_check(&kern, &[0.0; 3], &PlaneFrame::zero(3), &[0.5, 0.0, 0.0], 1e-3, &q)?;
    let worst = a.translation_defect.max(b.translation_defect);
    let passed = a.status == ConeSplitStatus::Pass
        && b.status == ConeSplitStatus::Pass
        && c.status == ConeSplitStatus::InvalidInput
        && worst <= 1e-3;
    Ok(CriterionResult::new(
        9,
        passed,
        worst,
        1e-3,
        json!({ "plane_kernel": a.status, "cone_field": b.status, "kernel_counterexample": c.status, "counterexample_reason": c.reason }),
    ))
}

fn vitali(seed: u64) -> Result<CriterionResult> {
    let mut gen = rng(derive_seed(seed, 10));
    let mut failures = 0usize;
    let mut balls = 0usize;
    for _ in 0..100 {
        let n = gen.gen_range(2..=4usize);
        let m = gen.gen_range(1..=200usize);
        let r = gen.gen_range(0.01..0.5);
        let pts: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| gen.gen_range(-1.0..1.0)).collect()).collect();
        let cover = vitali_cover(&pts, r)?;
        balls += cover.selected.len();
        if verify_vitali(&pts, &cover) != (true, true) {
            failures += 1;
        }
    }
    Ok(CriterionResult::new(10, failures == 0, failures as f64, 0.0, json!({ "sets": 100, "selected_balls": balls })))
}

fn decomposition(seed: u64) -> Result<CriterionResult> {
    let (n, k, eta) = (3usize, 0usize, 0.6);
    let u = plane_kernel(&PlaneFrame::zero(n), 3.0)?;
    let opts = DecompositionOptions::new(n, eta, seed);
    let bound = k as f64 + eta + 0.3;
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for gamma in [0.25, 0.125] {
        let rep = decomposition_cover(&u, eta, gamma, 5, k, &opts)?;
        let slope = rep.slope().unwrap_or(0.0);
        worst = worst.max(slope);
        rows.push(json!({ "gamma": gamma, "counts": rep.counts, "slope": slope }));
    }
    Ok(CriterionResult::new(11, worst <= bound, worst, bound, json!({ "eta": eta, "k": k, "runs": rows })))
}

fn sandwich(seed: u64) -> Result<CriterionResult> {
    let mut gen = rng(derive_seed(seed, 12));
    let fields = [
        kernel_pair(3, 3.0)?,
        plane_kernel(&PlaneFrame::coordinate(4, &[3]), 3.0)?,
        riesz_sum(&[vec![0.2, 0.0, 0.0], vec![-0.2, 0.1, 0.0]], &[1.0, 0.5], 3.0, 3)?,
        kernel_pair(3, 2.0)?,
    ];
    let sweep = HomogeneityOptions::sweep(seed);
    let mut violations = 0usize;
    let mut worst_gap: f64 = 0.0;
    for i in 0..200 {
        let u = &fields[i % fields.len()];
        let n = u.dim();
        let x = random_point(n, 0.4, &mut gen);
        let r = (gen.gen_range(0.1..0.5f64) * 1e3).round() / 1e3;
        let k = gen.gen_range(0..=n);
        let rep = homogeneity_defect(u, &x, r, k, &sweep)?;
        let raw = rep.lower_scale.max(rep.lower_translation);
        worst_gap = worst_gap.max(raw - rep.upper);
        if rep.lower > rep.upper || raw > rep.upper * 1.02 + 1e-9 {
            violations += 1;
        }
    }
    let opts = HomogeneityOptions::default();
    let exact = [
        (radial_kernel(3, 3.0, 1.0, &[0.0; 3])?, vec![0.0; 3], 0.5, 0usize),
        (plane_kernel(&PlaneFrame::coordinate(4, &[3]), 3.0)?, vec![0.0, 0.0, 0.0, 0.3], 1.0, 1),
        (invariant_cone_field(4, 2.0, &PlaneFrame::coordinate(4, &[0]))?, vec![0.0; 4], 0.5, 1),
        (invariant_cone_field(4, 3.0, &PlaneFrame::zero(4))?, vec![0.0; 4], 0.5, 0),
        (plane_kernel(&PlaneFrame::coordinate(4, &[2, 3]), 2.0)?, vec![0.0; 4], 0.5, 2),
    ];
    let mut exact_worst: f64 = 0.0;
    for (u, x, r, k) in &exact {
        exact_worst = exact_worst.max(homogeneity_defect(u, x, *r, *k, &opts)?.upper);
    }
    let mut oracle_worst: f64 = 0.0;
    let mut perturbed = Vec::new();
    for (n, p) in [(3usize, 3.0), (4, 4.0)] {
        for eps in [0.5, 1.0, 2.0] {
            let mut e = vec![0u32; n];
            e[0] = 1;
            let u = harmonic_plus_kernel(&[Monomial { coef: eps, exponents: e }], &vec![0.0; n], 1.0, p)?;
            let r = 0.5;
            let rep = homogeneity_defect(&u, &vec![0.0; n], r, 0, &opts)?;
            let c0 = 1.0 / (1.0 + 2f64.powf(n as f64 + 2.0 - p));
            let abs_y1 = 2.0 * unit_ball_volume(n - 1) / (n as f64 + 1.0);
            let oracle = c0 * eps * r.powf(p - 1.0) * (1.0 - 2f64.powf(1.0 - p)) * abs_y1;
            let rel = if rep.lower > 0.0 { (rep.lower - oracle).abs() / oracle } else { f64::INFINITY };
            oracle_worst = oracle_worst.max(rel);
            perturbed.push(json!({ "n": n, "p": p, "eps": eps, "lower": rep.lower, "oracle": oracle }));
        }
    }
    let passed = violations == 0 && exact_worst <= 1e-3 && oracle_worst <= 0.2;
    Ok(CriterionResult::new(
        12,
        passed,
        violations as f64,
        0.0,
        json!({ "queries": 200, "max_certificate_excess": worst_gap, "exact_upper": exact_worst, "exact_tolerance": 1e-3, "oracle_relative_error": oracle_worst, "oracle_tolerance": 0.2, "perturbed": perturbed }),
    ))
}
