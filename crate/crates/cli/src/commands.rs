use serde::Serialize;
use serde_json::{json, Value};
use singstrat::covering::{
    decomposition_cover, log_log_slope, minkowski_bound_check, tube_volume, DecompositionOptions, MinkowskiOptions,
};
use singstrat::density::{density, geometric_ladder, high_density_set, quotient_at, DensityOptions, CERTIFICATE_TOL};
use singstrat::energy::{
    f_energy_profile, g_energy_profile, monotonicity_violation, normalize_for_monotonicity, unit_ball_centers, GrassmannianFamily,
};
use singstrat::fields::ScalarField;
use singstrat::geometry::Ball;
use singstrat::homogeneity::{stratum_set, HomogeneityOptions, StratumOptions};
use singstrat::quadrature::QuadratureSpec;
use singstrat::verify::{self, CRITERIA};

use crate::config::Config;
use crate::CliError;

/// CSV table written next to the JSON report.
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Csv {
    fn new(header: Vec<String>) -> Self {
        Self { header, rows: Vec::new() }
    }

    fn point_header(n: usize, extra: &[&str]) -> Vec<String> {
        (1..=n).map(|i| format!("x{i}")).chain(extra.iter().map(|s| s.to_string())).collect()
    }

    fn push_point(&mut self, x: &[f64], extra: &[f64]) {
        self.rows.push(x.iter().chain(extra).map(|v| v.to_string()).collect());
    }

    pub fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Result payload plus the settings echoed into the report envelope.
pub struct Outcome {
    pub result: Value,
    pub quadrature: Vec<(String, QuadratureSpec)>,
    pub tolerances: Value,
    pub csv: Csv,
    /// Exit status reflecting the result itself; only `verify` can fail here.
    pub passed: bool,
}

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

fn center(cfg: &Config, n: usize) -> Result<Vec<f64>, CliError> {
    let x = cfg.analysis.x.clone().unwrap_or_else(|| vec![0.0; n]);
    if x.len() != n {
        return Err(CliError::Usage(format!("`x` has {} coordinates, field lives in R^{n}", x.len())));
    }
    Ok(x)
}

fn radii(cfg: &Config) -> Vec<f64> {
    let a = &cfg.analysis;
    let mut r = if a.radii.is_empty() { geometric_ladder(a.ladder_max, a.ladder_ratio, a.ladder_count) } else { a.radii.clone() };
    r.sort_by(|x, y| x.partial_cmp(y).unwrap());
    r
}

fn homogeneity_options(cfg: &Config) -> Result<HomogeneityOptions, CliError> {
    let seed = cfg.quadrature.seed();
    let base = match cfg.analysis.budget.as_str() {
        "sweep" => HomogeneityOptions::sweep(seed),
        "full" => {
            let mut o = HomogeneityOptions::default();
            o.budget.seed = seed;
            o.quad = o.quad.with_seed(seed);
            o
        }
        other => return Err(CliError::Usage(format!("unknown budget `{other}`; expected sweep or full"))),
    };
    Ok(HomogeneityOptions { quad: cfg.quadrature.resolve(base.quad.clone())?, ..base })
}

fn density_options(cfg: &Config) -> Result<DensityOptions, CliError> {
    let base = DensityOptions::default();
    Ok(DensityOptions {
        tol: cfg.analysis.threshold_tol,
        screen: cfg.analysis.screen,
        coarse_levels: cfg.analysis.coarse_levels,
        quad: cfg.quadrature.resolve(base.quad)?,
    })
}

/// Lattice of step `h` inside `ball`, in lexicographic order.
fn lattice(ball: &Ball, h: f64) -> Vec<Vec<f64>> {
    let n = ball.dim();
    let m = (ball.radius / h).floor() as i64;
    let mut out = Vec::new();
    let mut idx = vec![-m; n];
    loop {
        let x: Vec<f64> = idx.iter().zip(&ball.center).map(|(&i, &c)| c + i as f64 * h).collect();
        if ball.contains(&x) {
            out.push(x);
        }
        let mut d = n;
        loop {
            if d == 0 {
                return out;
            }
            d -= 1;
            if idx[d] < m {
                idx[d] += 1;
                break;
            }
            idx[d] = -m;
        }
    }
}

pub fn density_cmd(cfg: &Config, u: &ScalarField) -> Result<Outcome, CliError> {
    let n = u.dim();
    let x = center(cfg, n)?;
    let quad = cfg.quadrature.resolve(QuadratureSpec::default())?;
    let mut csv;
    let result = if let Some(h) = cfg.analysis.grid_step {
        let ball = Ball::new(x, cfg.analysis.search_radius);
        csv = Csv::new(Csv::point_header(n, &["theta"]));
        let mut values = Vec::new();
        for y in lattice(&ball, h) {
            let theta = quotient_at(u, &y, h, &quad);
            csv.push_point(&y, &[theta]);
            values.push(json!({ "x": y, "theta": theta }));
        }
        json!({ "mode": "grid", "scale": h, "search": ball, "points": values })
    } else {
        let mut ladder = radii(cfg);
        ladder.reverse();
        let points = if cfg.analysis.points.is_empty() { vec![x] } else { cfg.analysis.points.clone() };
        csv = Csv::new(Csv::point_header(n, &["theta_s", "theta_m", "theta_v"]));
        let mut values = Vec::new();
        for y in points {
            let est = density(u, &y, u.p(), &ladder, &quad)?;
            csv.push_point(&y, &[est.theta_s, est.theta_m, est.theta_v]);
            values.push(json!({ "x": y, "estimate": est }));
        }
        json!({ "mode": "points", "ladder": ladder, "points": values })
    };
    Ok(Outcome {
        result,
        quadrature: vec![("density".into(), quad)],
        tolerances: json!({ "certificate": CERTIFICATE_TOL }),
        csv,
        passed: true,
    })
}

pub fn count_cmd(cfg: &Config, u: &ScalarField) -> Result<Outcome, CliError> {
    let n = u.dim();
    let a = &cfg.analysis;
    let search = Ball::new(center(cfg, n)?, a.search_radius);
    let step = a.grid_step.unwrap_or(0.05);
    let opts = density_options(cfg)?;
    let set = high_density_set(u, a.c, &search, step, &opts)?;
    let mut csv = Csv::new(Csv::point_header(n, &["theta"]));
    for (x, &t) in set.points.iter().zip(&set.thetas) {
        csv.push_point(x, &[t]);
    }
    let components: Vec<Value> = set
        .components
        .iter()
        .map(|c| json!({ "size": c.members.len(), "peak": c.peak, "peak_theta": c.peak_theta, "centroid": c.centroid }))
        .collect();
    Ok(Outcome {
        result: json!({
            "c": a.c,
            "search": search,
            "grid_step": set.grid_step,
            "components": set.count,
            "component_list": components,
            "points": set.points.len(),
            "evaluated": set.evaluated,
        }),
        quadrature: vec![("density".into(), opts.quad.clone())],
        tolerances: json!({ "threshold": opts.tol, "screen": opts.screen }),
        csv,
        passed: true,
    })
}

pub fn strata_cmd(cfg: &Config, u: &ScalarField) -> Result<Outcome, CliError> {
    let n = u.dim();
    let a = &cfg.analysis;
    let search = Ball::new(center(cfg, n)?, a.search_radius);
    let hom = homogeneity_options(cfg)?;
    let opts = StratumOptions { homogeneity: hom.clone(), coarse_levels: a.coarse_levels.unwrap_or(0) };
    let rs = if a.radii.is_empty() { vec![a.r] } else { radii(cfg) };
    let mut csv = Csv::new(Csv::point_header(n, &["r"]));
    let mut rows = Vec::new();
    let mut volumes = Vec::new();
    for &r in &rs {
        let step = a.grid_step.unwrap_or(2.0 * r);
        let set = stratum_set(u, a.eta, r, a.k, &search, step, &opts)?;
        let vol = tube_volume(&set.points, r, &search, r / a.cells_per_radius.max(4.0), cfg.quadrature.seed())?;
        for x in &set.points {
            csv.push_point(x, &[r]);
        }
        volumes.push(vol);
        rows.push(json!({
            "r": r,
            "grid_step": set.grid_step,
            "scales": set.scales,
            "members": set.points.len(),
            "indeterminate": set.indeterminate.len(),
            "excluded": set.excluded,
            "evaluated": set.evaluated,
            "tube_volume": vol,
            "points": set.points,
        }));
    }
    Ok(Outcome {
        result: json!({
            "eta": a.eta,
            "k": a.k,
            "search": search,
            "levels": rows,
            "slope": log_log_slope(&rs, &volumes),
        }),
        quadrature: vec![("homogeneity".into(), hom.quad)],
        tolerances: json!({ "eta": a.eta, "budget": hom.budget }),
        csv,
        passed: true,
    })
}

pub fn energy_cmd(cfg: &Config, u: &ScalarField) -> Result<Outcome, CliError> {
    let n = u.dim();
    let a = &cfg.analysis;
    let p = u.p();
    let x = center(cfg, n)?;
    let rs = radii(cfg);
    let quad = cfg.quadrature.resolve(QuadratureSpec::default())?;
    let seed = cfg.quadrature.seed();
    let mut csv = Csv::new(vec!["profile".into(), "r".into(), "value".into()]);
    let mut result = serde_json::Map::new();
    result.insert("radii".into(), to_value(&rs));
    if p > 2.0 {
        let (field, normalization) = if a.normalize {
            let norm = normalize_for_monotonicity(u, &unit_ball_centers(n, a.normalize_step), &quad)?;
            (norm.field.clone().expect("normalized field"), Some(norm))
        } else {
            (u.clone(), None)
        };
        let prof = f_energy_profile(&field, &x, &rs, &quad)?;
        for (r, v) in prof.radii.iter().zip(&prof.values) {
            csv.rows.push(vec!["theta_f".into(), r.to_string(), v.to_string()]);
        }
        let violation = monotonicity_violation(&prof.values);
        result.insert(
            "theta_f".into(),
            json!({
                "values": prof.values,
                "violation": violation,
                "monotone": violation <= a.monotone_tol,
                "normalization": normalization,
            }),
        );
    }
    if p.fract() == 0.0 && (p as usize) < n {
        let family = match a.family.as_str() {
            "full" => GrassmannianFamily::full(n, p as usize, a.samples, seed)?,
            "complex_lines" => GrassmannianFamily::complex_lines(n, a.samples, seed)?,
            other => return Err(CliError::Usage(format!("unknown family `{other}`; expected full or complex_lines"))),
        };
        let prof = g_energy_profile(u, &x, &rs, &family, &quad)?;
        for (r, v) in prof.profile.radii.iter().zip(&prof.profile.values) {
            csv.rows.push(vec!["theta_g".into(), r.to_string(), v.to_string()]);
        }
        let violation = monotonicity_violation(&prof.profile.values);
        result.insert(
            "theta_g".into(),
            json!({
                "family": family.kind,
                "samples": prof.samples,
                "values": prof.profile.values,
                "std_error": prof.std_error,
                "violation": violation,
                "monotone": violation <= a.monotone_tol,
            }),
        );
    }
    if result.len() == 1 {
        return Err(CliError::Usage(format!("no energy applies to p = {p} in R^{n}")));
    }
    Ok(Outcome {
        result: Value::Object(result),
        quadrature: vec![("energy".into(), quad)],
        tolerances: json!({ "monotonicity": a.monotone_tol }),
        csv,
        passed: true,
    })
}

pub fn minkowski_cmd(cfg: &Config, u: &ScalarField) -> Result<Outcome, CliError> {
    let a = &cfg.analysis;
    let rs = if a.radii.is_empty() { vec![0.025, 0.05, 0.1, 0.2] } else { radii(cfg) };
    let base = MinkowskiOptions::default();
    let opts = MinkowskiOptions {
        density: density_options(cfg)?,
        step_fraction: a.step_fraction,
        cells_per_radius: a.cells_per_radius,
        mass_quad: cfg.quadrature.resolve(base.mass_quad)?,
        seed: cfg.quadrature.seed(),
    };
    let report = minkowski_bound_check(u, a.eta, &rs, &opts)?;
    let mut csv = Csv::new(vec!["r".into(), "tube_volume".into(), "ratio".into()]);
    for ((r, v), (_, q)) in report.tube_volumes.iter().zip(&report.bound_ratios) {
        csv.rows.push(vec![r.to_string(), v.to_string(), q.to_string()]);
    }
    Ok(Outcome {
        result: json!({ "eta": a.eta, "report": report }),
        quadrature: vec![("density".into(), opts.density.quad.clone()), ("mass".into(), opts.mass_quad.clone())],
        tolerances: json!({ "threshold": opts.density.tol, "screen": opts.density.screen }),
        csv,
        passed: true,
    })
}

pub fn cover_cmd(cfg: &Config, u: &ScalarField) -> Result<Outcome, CliError> {
    let n = u.dim();
    let a = &cfg.analysis;
    let opts = DecompositionOptions {
        homogeneity: homogeneity_options(cfg)?,
        epsilon: a.epsilon.unwrap_or(a.eta),
        initial: Ball::new(center(cfg, n)?, a.search_radius),
        candidate_step: a.candidate_step,
    };
    let report = decomposition_cover(u, a.eta, a.gamma, a.j_max, a.k, &opts)?;
    let mut csv = Csv::new(Csv::point_header(n, &["j", "scale"]));
    for t in &report.trace {
        for b in &t.balls {
            csv.push_point(&b.center, &[t.j as f64, t.scale]);
        }
    }
    let slope = report.slope();
    Ok(Outcome {
        result: json!({ "report": report, "slope": slope }),
        quadrature: vec![("homogeneity".into(), opts.homogeneity.quad.clone())],
        tolerances: json!({ "epsilon": opts.epsilon, "budget": opts.homogeneity.budget }),
        csv,
        passed: true,
    })
}

pub fn verify_cmd(cfg: &Config) -> Result<Outcome, CliError> {
    let ids: Vec<u8> =
        if cfg.analysis.criteria.is_empty() { (1..=CRITERIA.len() as u8).collect() } else { cfg.analysis.criteria.clone() };
    if let Some(bad) = ids.iter().find(|&&id| id == 0 || id as usize > CRITERIA.len()) {
        return Err(CliError::Usage(format!("criterion {bad} does not exist; valid ids are 1..={}", CRITERIA.len())));
    }
    let seed = cfg.quadrature.seed.unwrap_or(verify::DEFAULT_SEED);
    let report = verify::run_selected(seed, &ids, |res, _| eprintln!("{}", res.line()));
    let mut csv = Csv::new(vec!["id".into(), "name".into(), "passed".into(), "measured".into(), "tolerance".into()]);
    for c in &report.criteria {
        csv.rows.push(vec![
            c.id.to_string(),
            c.name.clone(),
            c.passed.to_string(),
            c.measured.to_string(),
            c.tolerance.to_string(),
        ]);
    }
    let tolerances: serde_json::Map<String, Value> =
        report.criteria.iter().map(|c| (format!("{}_{}", c.id, c.name), json!(c.tolerance))).collect();
    Ok(Outcome {
        passed: report.passed,
        result: to_value(&report),
        quadrature: Vec::new(),
        tolerances: Value::Object(tolerances),
        csv,
    })
}
