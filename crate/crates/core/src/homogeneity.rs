//! Quantitative homogeneity: defect intervals, invariance-plane search, strata and cone splitting.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{lattice_in_ball, neighbors, Key};
use crate::error::{Error, Result};
use crate::fields::{EvalFn, ScalarField};
use crate::geometry::{derive_seed, dist, dot, gram_schmidt, norm, rng, unit_ball_volume, Ball, PlaneFrame, Pt};
use crate::kernels::RieszKernel;
use crate::means::ball_sup;
use crate::quadrature::{cached_sphere, weighted_median, BallRule, QuadratureSpec};

/// Accepted moves per step size in local refinements.
const MAX_SWEEPS: usize = 8;

/// Effort spent searching for invariance planes and directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    /// Haar-random candidate planes for the kernel model; 0 disables the upper bound.
    pub planes: usize,
    /// Node budget of the direction net used by translation defects.
    pub directions: usize,
    /// Step halvings in local refinements.
    pub halvings: usize,
    pub seed: u64,
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self { planes: 256, directions: 64, halvings: 20, seed: 0x5EED }
    }
}

impl SearchBudget {
    /// Reduced effort for lattice sweeps.
    pub fn sweep(seed: u64) -> Self {
        Self { planes: 4, directions: 8, halvings: 4, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityOptions {
    pub budget: SearchBudget,
    pub quad: QuadratureSpec,
}

impl Default for HomogeneityOptions {
    fn default() -> Self {
        Self {
            budget: SearchBudget::default(),
            quad: QuadratureSpec { shells: 16, ball_sphere_nodes: 256, ..QuadratureSpec::default() },
        }
    }
}

impl HomogeneityOptions {
    pub fn sweep(seed: u64) -> Self {
        Self {
            budget: SearchBudget::sweep(seed),
            quad: QuadratureSpec { shells: 5, ball_sphere_nodes: 48, ..QuadratureSpec::coarse(seed) },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Zero,
    /// `theta * K_p(dist(y, V))`.
    Kernel,
    /// `theta * |y'|^(2-p) g(y'/|y'|)` with `y'` the component orthogonal to `V` and `g` the
    /// scale-averaged flow (for p = 2: `theta log|y'| + g(y'/|y'|) - max g`).
    Homogenized,
}

/// A function fixed by every p-flow at the origin and invariant along `plane`.
#[derive(Clone, Serialize, Deserialize)]
pub struct HomogeneousModel {
    pub p: f64,
    pub k: usize,
    pub plane: PlaneFrame,
    pub theta: f64,
    pub kind: ModelKind,
    #[serde(skip)]
    profile: Option<Arc<EvalFn>>,
}

impl fmt::Debug for HomogeneousModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HomogeneousModel")
            .field("kind", &self.kind)
            .field("p", &self.p)
            .field("k", &self.k)
            .field("theta", &self.theta)
            .field("plane", &self.plane)
            .finish()
    }
}

impl PartialEq for HomogeneousModel {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.p == other.p
            && self.k == other.k
            && self.theta == other.theta
            && self.plane == other.plane
    }
}

impl HomogeneousModel {
    pub fn zero(n: usize, p: f64) -> Self {
        Self {
            p,
            k: n,
            plane: PlaneFrame::coordinate(n, &(0..n).collect::<Vec<_>>()),
            theta: 0.0,
            kind: ModelKind::Zero,
            profile: None,
        }
    }

    pub fn kernel(plane: PlaneFrame, p: f64, theta: f64) -> Self {
        Self { p, k: plane.k(), plane, theta, kind: ModelKind::Kernel, profile: None }
    }

    /// Profile on the unit sphere of the orthogonal complement, for homogenized models.
    pub fn profile(&self, omega: &[f64]) -> Option<f64> {
        self.profile.as_ref().map(|g| g(omega))
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        match self.kind {
            ModelKind::Zero => 0.0,
            ModelKind::Kernel => {
                let d = self.plane.distance(y);
                self.theta * RieszKernel::new(self.p).expect("model p >= 1").eval(d)
            }
            ModelKind::Homogenized => {
                let w = self.plane.orth(y);
                let l = norm(&w);
                let omega: Pt = w.iter().map(|c| c / l).collect();
                let g = self.profile.as_ref().expect("homogenized model carries a profile")(&omega);
                if self.p == 2.0 {
                    self.theta * l.ln() + g
                } else {
                    self.theta * l.powf(2.0 - self.p) * g
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    /// `min(max(lower_scale, lower_translation), upper)`.
    pub lower: f64,
    /// Scale-invariance certificate `c0 * ||f - f_{0,1/2}||`.
    pub lower_scale: f64,
    /// Translation-invariance bound from the direction search.
    pub lower_translation: f64,
    /// Distance to the best model; infinite when the search budget is zero.
    pub upper: f64,
    pub plane: PlaneFrame,
    pub model: Option<HomogeneousModel>,
    pub c0: f64,
    pub samples: usize,
}

/// Triangle constant of the scale certificate.
pub fn scale_constant(n: usize, p: f64) -> f64 {
    if p == 2.0 {
        1.0 / (1.0 + 2f64.powi(n as i32))
    } else {
        1.0 / (1.0 + 2f64.powf(n as f64 + 2.0 - p))
    }
}

/// Flow `f = u_{x,r}` sampled on a ball rule, with staged defect computations.
pub(crate) struct Probe<'a> {
    f: ScalarField,
    n: usize,
    p: f64,
    rule: Arc<BallRule>,
    vol: f64,
    fi: Vec<f64>,
    fh: Vec<f64>,
    trule: Arc<BallRule>,
    tfh: Vec<f64>,
    opts: &'a HomogeneityOptions,
    chain: Vec<(Vec<f64>, f64)>,
    uppers: Vec<Option<(f64, PlaneFrame, HomogeneousModel)>>,
}

struct KernelFit {
    value: f64,
    theta: f64,
    plane: PlaneFrame,
}

/// Maximum of `g` over unit vectors orthogonal to `plane`: best sampled direction refined by
/// projected pattern search.
fn transverse_max(g: &impl Fn(&[f64]) -> f64, plane: &PlaneFrame, omegas: &[Pt], values: &[f64]) -> f64 {
    let Some((best, &v0)) = values.iter().enumerate().filter(|(_, v)| v.is_finite()).max_by(|a, b| a.1.total_cmp(b.1)) else {
        return f64::NEG_INFINITY;
    };
    let project = |w: &[f64]| -> Option<Pt> {
        let o = plane.orth(w);
        let l = norm(&o);
        (l > 1e-12).then(|| o.iter().map(|c| c / l).collect())
    };
    let mut y = omegas[best].clone();
    let mut v = v0;
    let mut step = 0.25;
    let mut evals = 0usize;
    while step > 1e-8 && evals < 4000 {
        let mut improved = false;
        for i in 0..y.len() {
            for sgn in [1.0, -1.0] {
                let mut z = y.clone();
                z[i] += sgn * step;
                if let Some(z) = project(&z) {
                    let gz = g(&z);
                    evals += 1;
                    if gz > v {
                        v = gz;
                        y = z;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    v
}

impl<'a> Probe<'a> {
    pub(crate) fn new(u: &ScalarField, x: &[f64], r: f64, opts: &'a HomogeneityOptions) -> Result<Self> {
        let p = u.p();
        if !(p >= 2.0) {
            return Err(Error::UnsupportedCharacteristic(p));
        }
        let f = u.p_flow(x, r, &opts.quad)?;
        let n = u.dim();
        let rule = opts.quad.ball(n);
        let mut fi = Vec::with_capacity(rule.len());
        let mut fh = Vec::with_capacity(rule.len());
        for (y, _) in rule.iter() {
            fi.push(f.eval_masked(y));
            let half: Pt = y.iter().map(|c| 0.5 * c).collect();
            fh.push(f.eval_masked(&half));
        }
        let tspec = QuadratureSpec {
            shells: (opts.quad.shells / 2).max(4),
            ball_sphere_nodes: (opts.quad.ball_sphere_nodes / 2).max(32),
            ..opts.quad.clone()
        };
        let trule = tspec.ball(n);
        let tfh = trule.iter().map(|(y, _)| f.eval_masked(&y.iter().map(|c| 0.5 * c).collect::<Pt>())).collect();
        Ok(Self {
            f,
            n,
            p,
            vol: unit_ball_volume(n),
            rule,
            fi,
            fh,
            trule,
            tfh,
            opts,
            chain: Vec::new(),
            uppers: vec![None; n + 1],
        })
    }

    fn l1(&self, g: impl Fn(usize, &[f64]) -> f64) -> f64 {
        self.vol * self.rule.iter().enumerate().map(|(i, (y, w))| w * (self.fi[i] - g(i, y)).abs()).sum::<f64>()
    }

    pub(crate) fn scale_lower(&self) -> f64 {
        let c0 = scale_constant(self.n, self.p);
        if self.p == 2.0 {
            let diffs: Vec<f64> = self.fi.iter().zip(&self.fh).map(|(a, b)| a - b).collect();
            let c = weighted_median(&diffs, &self.rule.weights);
            c0 * self.l1(|i, _| self.fh[i] + c)
        } else {
            let s = 2f64.powf(2.0 - self.p);
            c0 * self.l1(|i, _| s * self.fh[i])
        }
    }

    pub(crate) fn zero_upper(&self) -> f64 {
        self.l1(|_, _| 0.0)
    }

    /// `||f - f(. + v)||_{L1(B_{1/2})}` for `|v| = 1/2`.
    fn translation_defect(&self, v: &[f64]) -> f64 {
        let half_vol = self.vol * 0.5f64.powi(self.n as i32);
        let mut acc = 0.0;
        for (i, (y, w)) in self.trule.iter().enumerate() {
            let z: Pt = y.iter().zip(v).map(|(a, b)| 0.5 * a + b).collect();
            acc += w * (self.tfh[i] - self.f.eval_masked(&z)).abs();
        }
        half_vol * acc
    }

    fn tau(&self, d: &[f64]) -> f64 {
        let v: Pt = d.iter().map(|c| 0.5 * c).collect();
        let m: Pt = d.iter().map(|c| -0.5 * c).collect();
        self.translation_defect(&v).max(self.translation_defect(&m))
    }

    /// Minimizes `tau` over unit vectors of the span of `basis` (orthonormal).
    fn min_tau(&self, basis: &[Vec<f64>], salt: u64) -> (Vec<f64>, f64) {
        let m = basis.len();
        let embed = |c: &[f64]| -> Vec<f64> {
            let mut d = vec![0.0; self.n];
            for (ci, b) in c.iter().zip(basis) {
                for (di, bi) in d.iter_mut().zip(b) {
                    *di += ci * bi;
                }
            }
            let l = norm(&d);
            d.into_iter().map(|x| x / l).collect()
        };
        let net: Vec<Vec<f64>> = if m == 1 {
            vec![vec![1.0]]
        } else {
            let rule = cached_sphere(m, self.opts.budget.directions.max(2 * m), derive_seed(self.opts.budget.seed, salt));
            let mut pts: Vec<Vec<f64>> = Vec::new();
            for (c, _) in rule.iter() {
                // tau(d) = tau(-d): keep one representative per antipodal pair
                if pts.iter().all(|q| (dot(q, c) + 1.0).abs() > 1e-9) {
                    pts.push(c.to_vec());
                }
            }
            pts
        };
        let mut scored: Vec<(f64, Vec<f64>)> = net.into_iter().map(|c| (self.tau(&embed(&c)), c)).collect();
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut best = scored[0].clone();
        if m > 1 {
            let starts = if self.opts.budget.directions >= 32 { 2 } else { 1 };
            for start in scored.into_iter().take(starts) {
                let (v, c) = self.refine_direction(start.1, start.0, &embed);
                if v < best.0 {
                    best = (v, c);
                }
            }
        }
        (embed(&best.1), best.0)
    }

    fn refine_direction(&self, mut c: Vec<f64>, mut v: f64, embed: &dyn Fn(&[f64]) -> Vec<f64>) -> (f64, Vec<f64>) {
        let mut step = 0.25;
        for _ in 0..self.opts.budget.halvings.div_ceil(2) {
            for _ in 0..MAX_SWEEPS {
                let mut improved = false;
                for i in 0..c.len() {
                    for s in [1.0, -1.0] {
                        let mut t = c.clone();
                        t[i] += s * step;
                        let l = norm(&t);
                        if l < 1e-12 {
                            continue;
                        }
                        let t: Vec<f64> = t.into_iter().map(|x| x / l).collect();
                        let tv = self.tau(&embed(&t));
                        if tv < v {
                            v = tv;
                            c = t;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            step *= 0.5;
        }
        (v, c)
    }

    /// Extends the chain of least-defect directions `d_1, ..., d_j`, `d_j` minimizing the
    /// translation defect over the orthogonal complement of the previous ones.
    fn extend_chain(&mut self, j: usize) {
        while self.chain.len() < j.min(self.n) {
            let prev: Vec<Vec<f64>> = self.chain.iter().map(|c| c.0.clone()).collect();
            let basis = if prev.is_empty() {
                PlaneFrame::coordinate(self.n, &(0..self.n).collect::<Vec<_>>()).frame
            } else {
                PlaneFrame { n: self.n, frame: prev }.complement()
            };
            let (d, t) = self.min_tau(&basis, self.chain.len() as u64 + 1);
            self.chain.push((d, t));
        }
    }

    /// Translation bound for k-homogeneity: a k-plane meets every (n-k+1)-dimensional subspace,
    /// so half the least defect over such a subspace bounds the distance from below.
    pub(crate) fn translation_lower(&mut self, k: usize) -> f64 {
        if k == 0 {
            return 0.0;
        }
        self.extend_chain(k);
        self.chain.iter().take(k).map(|c| 0.5 * c.1).fold(0.0, f64::max)
    }

    fn data_plane(&mut self, k: usize) -> PlaneFrame {
        self.extend_chain(k);
        PlaneFrame { n: self.n, frame: self.chain.iter().take(k).map(|c| c.0.clone()).collect() }
    }

    fn kernel_fit(&self, plane: &PlaneFrame, g: &mut Vec<f64>, ratios: &mut Vec<f64>, wts: &mut Vec<f64>) -> (f64, f64) {
        let kernel = RieszKernel::new(self.p).expect("p >= 2");
        g.clear();
        ratios.clear();
        wts.clear();
        for (i, (y, w)) in self.rule.iter().enumerate() {
            let gi = kernel.eval(plane.distance(y));
            g.push(gi);
            if gi != 0.0 && gi.is_finite() {
                ratios.push(self.fi[i] / gi);
                wts.push(w * gi.abs());
            }
        }
        let theta = weighted_median(ratios, wts).max(0.0);
        let value = self.l1(|i, _| if g[i].is_finite() { theta * g[i] } else { self.fi[i] });
        (value, theta)
    }

    fn best_kernel(&mut self, k: usize) -> KernelFit {
        let n = self.n;
        let (mut g, mut r, mut w) = (Vec::new(), Vec::new(), Vec::new());
        if k == 0 {
            let plane = PlaneFrame::zero(n);
            let (value, theta) = self.kernel_fit(&plane, &mut g, &mut r, &mut w);
            return KernelFit { value, theta, plane };
        }
        let mut candidates = vec![self.data_plane(k)];
        let mut gen = rng(derive_seed(self.opts.budget.seed, 0xC0DE + k as u64));
        for _ in 0..self.opts.budget.planes {
            candidates.push(PlaneFrame::random(n, k, &mut gen));
        }
        let mut scored: Vec<(f64, f64, PlaneFrame)> = candidates
            .into_iter()
            .map(|pl| {
                let (v, t) = self.kernel_fit(&pl, &mut g, &mut r, &mut w);
                (v, t, pl)
            })
            .collect();
        scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (mut value, mut theta, mut plane) = scored.swap_remove(0);
        let mut step = 0.25;
        for _ in 0..self.opts.budget.halvings {
            for _ in 0..MAX_SWEEPS {
                let comp = plane.complement();
                let mut improved = false;
                'moves: for i in 0..k {
                    for b in comp.iter() {
                        for s in [1.0, -1.0] {
                            let a: f64 = step * s;
                            let mut frame = plane.frame.clone();
                            frame[i] = frame[i].iter().zip(b).map(|(x, y)| a.cos() * x + a.sin() * y).collect();
                            let Some(frame) = gram_schmidt(&frame) else { continue };
                            let cand = PlaneFrame { n, frame };
                            let (v, t) = self.kernel_fit(&cand, &mut g, &mut r, &mut w);
                            if v < value {
                                value = v;
                                theta = t;
                                plane = cand;
                                improved = true;
                                break 'moves;
                            }
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
            step *= 0.5;
        }
        KernelFit { value, theta, plane }
    }

    /// Homogenization of the flow along `plane`.
    fn homogenized(&self, plane: &PlaneFrame) -> Option<(f64, HomogeneousModel)> {
        let k = plane.k();
        if k + 1 > self.n {
            return None;
        }
        let p = self.p;
        let scales = [1.0, 0.5, 0.25];
        let f = self.f.clone();
        let theta_hat = if p == 2.0 {
            let q = QuadratureSpec { max_candidates: 2, ..self.opts.quad.clone() };
            let m1 = ball_sup(&self.f, &vec![0.0; self.n], 1.0, &q);
            let m4 = ball_sup(&self.f, &vec![0.0; self.n], 0.25, &q);
            ((m1 - m4) / 4f64.ln()).max(0.0)
        } else {
            1.0
        };
        let g_raw = move |omega: &[f64]| -> f64 {
            let mut acc = 0.0;
            for s in scales {
                let y: Pt = omega.iter().map(|c| s * c).collect();
                let v = f.eval_masked(&y);
                acc += if p == 2.0 { v - theta_hat * s.ln() } else { s.powf(p - 2.0) * v };
            }
            acc / scales.len() as f64
        };
        let mut omegas: Vec<Pt> = Vec::with_capacity(self.rule.len());
        let mut radii = Vec::with_capacity(self.rule.len());
        for (y, _) in self.rule.iter() {
            let w = plane.orth(y);
            let l = norm(&w);
            radii.push(l);
            omegas.push(w.iter().map(|c| c / l.max(1e-300)).collect());
        }
        let gs: Vec<f64> = omegas.iter().map(|o| g_raw(o)).collect();
        if p == 2.0 {
            let gmax = transverse_max(&g_raw, plane, &omegas, &gs);
            let g_raw = Arc::new(g_raw);
            let value = self.l1(|i, _| theta_hat * radii[i].ln() + gs[i] - gmax);
            let g = g_raw.clone();
            let model = HomogeneousModel {
                p,
                k,
                plane: plane.clone(),
                theta: theta_hat,
                kind: ModelKind::Homogenized,
                profile: Some(Arc::new(move |o: &[f64]| g(o) - gmax)),
            };
            return Some((value, model));
        }
        let h: Vec<f64> = radii.iter().zip(&gs).map(|(l, g)| l.powf(2.0 - p) * g).collect();
        let mut ratios = Vec::new();
        let mut wts = Vec::new();
        for (i, w) in self.rule.weights.iter().enumerate() {
            if h[i] != 0.0 && h[i].is_finite() {
                ratios.push(self.fi[i] / h[i]);
                wts.push(w * h[i].abs());
            }
        }
        if ratios.is_empty() {
            return None;
        }
        let theta = weighted_median(&ratios, &wts).max(0.0);
        let value = self.l1(|i, _| if h[i].is_finite() { theta * h[i] } else { self.fi[i] });
        let model =
            HomogeneousModel { p, k, plane: plane.clone(), theta, kind: ModelKind::Homogenized, profile: Some(Arc::new(g_raw)) };
        Some((value, model))
    }

    fn quick_j(&mut self, j: usize) -> f64 {
        let z = self.zero_upper();
        if j >= self.n {
            return z;
        }
        let plane = if j == 0 { PlaneFrame::zero(self.n) } else { self.data_plane(j) };
        let (mut g, mut r, mut w) = (Vec::new(), Vec::new(), Vec::new());
        z.min(self.kernel_fit(&plane, &mut g, &mut r, &mut w).0)
    }

    /// Best model with a `j`-dimensional invariance plane: zero model, searched kernel model,
    /// homogenizations along the searched and the data-driven planes.
    fn upper_j(&mut self, j: usize) -> (f64, PlaneFrame, HomogeneousModel) {
        if let Some(hit) = &self.uppers[j] {
            return hit.clone();
        }
        let n = self.n;
        let zero = self.zero_upper();
        let mut best = (zero, PlaneFrame::coordinate(n, &(0..j).collect::<Vec<_>>()), HomogeneousModel::zero(n, self.p));
        if j < n {
            let fit = self.best_kernel(j);
            best.1 = fit.plane.clone();
            if fit.value < best.0 {
                best.0 = fit.value;
                best.2 = HomogeneousModel::kernel(fit.plane.clone(), self.p, fit.theta);
            }
            let mut planes = vec![fit.plane.clone()];
            if j > 0 {
                let dp = self.data_plane(j);
                if dp.max_principal_angle(&fit.plane).unwrap_or(1.0) > 1e-9 {
                    planes.push(dp);
                }
            }
            for pl in planes {
                if let Some((v, model)) = self.homogenized(&pl) {
                    if v < best.0 {
                        best.0 = v;
                        best.2 = model;
                    }
                }
            }
        }
        self.uppers[j] = Some(best.clone());
        best
    }

    /// Upper bound for k-homogeneity: a j-homogeneous model with `j >= k` is k-homogeneous, so
    /// the bound is the least of the per-dimension searches, which makes it monotone in `k`.
    /// Returns the value, the searched k-plane and the attaining model.
    pub(crate) fn full_upper(&mut self, k: usize) -> (f64, PlaneFrame, HomogeneousModel) {
        let own = self.upper_j(k);
        let mut best = own.clone();
        for j in k + 1..=self.n {
            let cand = self.upper_j(j);
            if cand.0 < best.0 {
                best.0 = cand.0;
                best.2 = cand.2;
            }
        }
        (best.0, own.1, best.2)
    }

    /// Whether the upper bound for k-homogeneity is below `eta`, evaluated lazily.
    pub(crate) fn upper_below(&mut self, k: usize, eta: f64) -> bool {
        if (k..=self.n).any(|j| self.quick_j(j) < eta) {
            return true;
        }
        (k..=self.n).any(|j| self.upper_j(j).0 < eta)
    }
}

/// Defect interval of k-homogeneity of `u` at `x` on scale `r`.
pub fn homogeneity_defect(u: &ScalarField, x: &[f64], r: f64, k: usize, opts: &HomogeneityOptions) -> Result<HomogeneityReport> {
    let n = u.dim();
    if k > n {
        return Err(Error::InvalidInput(format!("k = {k} exceeds the dimension {n}")));
    }
    let mut probe = Probe::new(u, x, r, opts)?;
    let lower_scale = probe.scale_lower();
    let lower_translation = probe.translation_lower(k);
    let raw = lower_scale.max(lower_translation);
    let (upper, plane, model) = if opts.budget.planes == 0 {
        let plane = if k == 0 { PlaneFrame::zero(n) } else { probe.data_plane(k) };
        (f64::INFINITY, plane, None)
    } else {
        let (v, pl, m) = probe.full_upper(k);
        (v, pl, Some(m))
    };
    Ok(HomogeneityReport {
        lower: raw.min(upper),
        lower_scale,
        lower_translation,
        upper,
        plane,
        model,
        c0: scale_constant(n, u.p()),
        samples: probe.rule.len(),
    })
}

/// Outcome of the stratum test at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Membership {
    /// `lower >= eta` at every probed scale.
    Member,
    /// `upper < eta` at some probed scale.
    Excluded,
    Indeterminate,
}

/// Tests whether `u` stays `eta`-far from `(k+1)`-homogeneous functions at `x` on all `scales`.
/// Bounds are computed lazily; every decision agrees with the full defect interval.
pub fn stratum_membership(
    u: &ScalarField,
    x: &[f64],
    eta: f64,
    k: usize,
    scales: &[f64],
    opts: &HomogeneityOptions,
) -> Result<Membership> {
    let kk = k + 1;
    let mut ascending = scales.to_vec();
    ascending.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut undecided = false;
    for &s in &ascending {
        let mut probe = Probe::new(u, x, s, opts)?;
        if probe.upper_below(kk, eta) {
            return Ok(Membership::Excluded);
        }
        let mut lower = probe.scale_lower();
        if lower < eta {
            lower = lower.max(probe.translation_lower(kk));
        }
        if lower < eta {
            undecided = true;
        }
    }
    Ok(if undecided { Membership::Indeterminate } else { Membership::Member })
}

/// Dyadic ladder `1/2, 1/4, ...` down to `r`, with `r` itself appended when not dyadic.
pub fn dyadic_scales(r: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = 0.5;
    while s >= r * (1.0 - 1e-12) {
        out.push(s);
        s *= 0.5;
    }
    if out.last().is_none_or(|&last| (last - r).abs() > 1e-12 * r) {
        out.push(r);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumOptions {
    pub homogeneity: HomogeneityOptions,
    /// Coarse levels: each doubles both the lattice step and the smallest scale.
    pub coarse_levels: usize,
}

impl Default for StratumOptions {
    fn default() -> Self {
        Self { homogeneity: HomogeneityOptions::sweep(0x5EED), coarse_levels: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StratumSet {
    pub points: Vec<Vec<f64>>,
    pub indeterminate: Vec<Vec<f64>>,
    pub excluded: usize,
    pub scales: Vec<f64>,
    pub grid_step: f64,
    pub evaluated: usize,
}

/// Lattice points of the quantitative stratum `S^k_{eta,r}` inside `search`.
///
/// With coarse levels, the stratum is first computed for `2^l r` on a lattice of step
/// `2^l grid_step`; finer levels only examine lattice neighbors of coarser members. Members
/// at `r` are members at every larger scale, so this loses nothing when coarser members are
/// lattice-dense in their stratum; points never examined are not reported.
pub fn stratum_set(
    u: &ScalarField,
    eta: f64,
    r: f64,
    k: usize,
    search: &Ball,
    grid_step: f64,
    opts: &StratumOptions,
) -> Result<StratumSet> {
    if !(eta > 0.0) || !(r > 0.0 && r < 1.0) || !(grid_step > 0.0) {
        return Err(Error::InvalidInput("need eta > 0, r in (0, 1) and a positive grid step".into()));
    }
    let n = u.dim();
    if search.dim() != n {
        return Err(Error::Dimension("search ball dimension".into()));
    }
    if k >= n {
        return Err(Error::InvalidInput(format!("stratum index k = {k} must be below n = {n}")));
    }
    let levels = opts.coarse_levels;
    let point = |key: &Key| -> Vec<f64> { (0..n).map(|a| search.center[a] + grid_step * key[a] as f64).collect() };
    let inside = |key: &Key| dist(&point(key), &search.center) <= search.radius + 1e-12;
    let mut candidates = lattice_in_ball(search, grid_step, 1i64 << levels);
    let mut evaluated = 0usize;
    let mut level = levels;
    loop {
        let r_level = (r * (1i64 << level) as f64).min(0.5);
        let scales = dyadic_scales(r_level);
        let results: Vec<(Key, Membership)> = candidates
            .par_iter()
            .map(|key| {
                let m =
                    stratum_membership(u, &point(key), eta, k, &scales, &opts.homogeneity).unwrap_or(Membership::Indeterminate);
                (key.clone(), m)
            })
            .collect();
        evaluated += candidates.len();
        if level == 0 {
            let mut out = StratumSet { points: vec![], indeterminate: vec![], excluded: 0, scales, grid_step, evaluated };
            for (key, m) in results {
                match m {
                    Membership::Member => out.points.push(point(&key)),
                    Membership::Indeterminate => out.indeterminate.push(point(&key)),
                    Membership::Excluded => out.excluded += 1,
                }
            }
            return Ok(out);
        }
        let half = 1i64 << (level - 1);
        let mut next: HashSet<Key> = HashSet::new();
        for (key, m) in &results {
            if *m == Membership::Member {
                next.extend(neighbors(key, half).filter(|nk| inside(nk)));
            }
        }
        candidates = next.into_iter().collect();
        candidates.sort();
        level -= 1;
    }
}

/// Verdict of a cone-splitting check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeSplitStatus {
    Pass,
    Fail,
    InvalidInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeSplitReport {
    pub status: ConeSplitStatus,
    /// Relative flow-invariance defects at `x1` and `x2`.
    pub flow_defect_x1: f64,
    pub flow_defect_x2: f64,
    /// Relative translation defect along `V^k` at `x1`.
    pub plane_defect: f64,
    /// Relative translation defect along `span(x2 - x1, V^k)`.
    pub translation_defect: f64,
    pub spanned: Option<PlaneFrame>,
    pub reason: Option<String>,
}

fn relative_l1(a: impl Fn(&[f64]) -> f64, b: impl Fn(&[f64]) -> f64, center: &[f64], radius: f64, quad: &QuadratureSpec) -> f64 {
    let n = center.len();
    let rule = quad.ball(n);
    let (mut diff, mut mass) = (0.0, 0.0);
    for (y, w) in rule.iter() {
        let z: Pt = center.iter().zip(y).map(|(c, yi)| c + radius * yi).collect();
        let (va, vb) = (a(&z), b(&z));
        if va.is_finite() && vb.is_finite() {
            diff += w * (va - vb).abs();
            mass += w * vb.abs();
        }
    }
    if mass > 0.0 {
        diff / mass
    } else {
        diff
    }
}

fn flow_defect(h: &ScalarField, x: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let unit = h.p_flow(x, 1.0, quad)?;
    for s in [0.5, 0.25] {
        let flow = h.p_flow(x, s, quad)?;
        let d = relative_l1(|y| flow.eval_masked(y), |y| unit.eval_masked(y), &vec![0.0; x.len()], 1.0, quad);
        worst = worst.max(d);
    }
    Ok(worst)
}

/// Checks that a field homogeneous at `x1` (along `V^k`) and at `x2` is invariant along
/// `span(x2 - x1, V^k)`, after re-verifying both hypotheses.
pub fn cone_splitting_check(
    h: &ScalarField,
    x1: &[f64],
    vk: &PlaneFrame,
    x2: &[f64],
    tol: f64,
    quad: &QuadratureSpec,
) -> Result<ConeSplitReport> {
    let n = h.dim();
    if x1.len() != n || x2.len() != n || vk.n != n {
        return Err(Error::Dimension("points and plane must live in the field's space".into()));
    }
    let diff: Vec<f64> = x2.iter().zip(x1).map(|(a, b)| a - b).collect();
    let spanned = vk.extend(&diff);
    let mut report = ConeSplitReport {
        status: ConeSplitStatus::InvalidInput,
        flow_defect_x1: f64::NAN,
        flow_defect_x2: f64::NAN,
        plane_defect: f64::NAN,
        translation_defect: f64::NAN,
        spanned: spanned.clone(),
        reason: None,
    };
    let Some(spanned) = spanned else {
        report.reason = Some("x2 lies in x1 + V^k".into());
        return Ok(report);
    };
    let reach = 1.0 + dist(x1, x2).max(1.0);
    for x in [x1, x2] {
        if h.domain().inner_radius(x) <= reach {
            return Err(Error::Domain(format!("test balls around {x:?} need radius {reach} inside the domain")));
        }
    }
    report.flow_defect_x1 = flow_defect(h, x1, quad)?;
    report.flow_defect_x2 = flow_defect(h, x2, quad)?;
    let shift_defect = |dirs: &[Vec<f64>]| -> f64 {
        let mut worst: f64 = 0.0;
        for d in dirs {
            for t in [0.5, -0.5, 1.0] {
                let e = relative_l1(
                    |y| {
                        let z: Pt = y.iter().zip(d).map(|(a, b)| a + t * b).collect();
                        h.eval_masked(&z)
                    },
                    |y| h.eval_masked(y),
                    x1,
                    1.0,
                    quad,
                );
                worst = worst.max(e);
            }
        }
        worst
    };
    report.plane_defect = if vk.k() == 0 { 0.0 } else { shift_defect(&vk.frame) };
    let bad = [
        (report.flow_defect_x1, "not 0-homogeneous at x1"),
        (report.flow_defect_x2, "not 0-homogeneous at x2"),
        (report.plane_defect, "not invariant along V^k at x1"),
    ];
    if let Some((_, why)) = bad.iter().find(|(d, _)| !(*d <= tol)) {
        report.reason = Some((*why).to_string());
        return Ok(report);
    }
    let mut dirs = spanned.frame.clone();
    dirs.push(diff.iter().map(|c| c / norm(&diff)).collect());
    report.translation_defect = shift_defect(&dirs);
    report.status = if report.translation_defect <= tol { ConeSplitStatus::Pass } else { ConeSplitStatus::Fail };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::examples::{invariant_cone_field, kernel_pair, plane_kernel, radial_kernel};

    #[test]
    fn exact_kernel_models() {
        let opts = HomogeneityOptions::default();
        let u = radial_kernel(3, 3.0, 1.0, &[0.0; 3]).unwrap();
        let rep = homogeneity_defect(&u, &[0.0; 3], 0.5, 0, &opts).unwrap();
        assert!(rep.upper < 1e-10 && rep.lower < 1e-10, "{rep:?}");
        let v = PlaneFrame::coordinate(4, &[3]);
        let u = plane_kernel(&v, 3.0).unwrap();
        let rep = homogeneity_defect(&u, &[0.0, 0.0, 0.0, 0.3], 1.0, 1, &opts).unwrap();
        assert!(rep.upper < 1e-3, "{rep:?}");
        assert!(rep.plane.max_principal_angle(&v).unwrap() < 0.05);
    }

    #[test]
    fn zero_field_has_zero_defect() {
        let opts = HomogeneityOptions::sweep(1);
        let u = ScalarField::zero(3, Ball::centered(3, 3.0), 3.0);
        for k in 0..=3 {
            let rep = homogeneity_defect(&u, &[0.1, 0.0, 0.0], 0.5, k, &opts).unwrap();
            assert_eq!((rep.lower, rep.upper), (0.0, 0.0));
        }
    }

    #[test]
    fn kernel_pair_is_not_homogeneous_at_scale() {
        let opts = HomogeneityOptions::default();
        let u = kernel_pair(3, 3.0).unwrap();
        let rep = homogeneity_defect(&u, &[0.0; 3], 0.9, 0, &opts).unwrap();
        assert!(rep.lower > 0.0 && rep.lower <= rep.upper, "{rep:?}");
    }

    #[test]
    fn models_are_homogeneous() {
        let opts = HomogeneityOptions::default();
        let u = kernel_pair(3, 3.0).unwrap();
        let mut probe = Probe::new(&u, &[0.0; 3], 0.6, &opts).unwrap();
        let plane = PlaneFrame::coordinate(3, &[2]);
        let (_, model) = probe.homogenized(&plane).unwrap();
        let _ = probe.full_upper(1);
        for y in [[0.3, 0.2, 0.1], [-0.5, 0.1, 0.4]] {
            let v = model.eval(&y);
            let half: Vec<f64> = y.iter().map(|c| 0.5 * c).collect();
            assert!((2f64.powf(2.0 - 3.0) * model.eval(&half) - v).abs() < 1e-12 * v.abs().max(1.0));
            let shifted = [y[0], y[1], y[2] + 0.7];
            assert!((model.eval(&shifted) - v).abs() < 1e-12 * v.abs().max(1.0));
        }
    }

    #[test]
    fn cone_splitting_examples() {
        let q = QuadratureSpec { shells: 12, ball_sphere_nodes: 256, ..QuadratureSpec::default() };
        let v2 = PlaneFrame::coordinate(4, &[2, 3]);
        let h = plane_kernel(&v2, 2.0).unwrap();
        let v1 = PlaneFrame::coordinate(4, &[3]);
        let rep = cone_splitting_check(&h, &[0.0; 4], &v1, &[0.0, 0.0, 0.5, 0.0], 1e-3, &q).unwrap();
        assert_eq!(rep.status, ConeSplitStatus::Pass, "{rep:?}");
        let k = radial_kernel(3, 3.0, 1.0, &[0.0; 3]).unwrap();
        let rep = cone_splitting_check(&k, &[0.0; 3], &PlaneFrame::zero(3), &[0.5, 0.0, 0.0], 1e-3, &q).unwrap();
        assert_eq!(rep.status, ConeSplitStatus::InvalidInput);
        let g = invariant_cone_field(4, 2.0, &PlaneFrame::coordinate(4, &[0])).unwrap();
        let rep = cone_splitting_check(&g, &[0.0; 4], &PlaneFrame::zero(4), &[0.5, 0.0, 0.0, 0.0], 1e-3, &q).unwrap();
        assert_eq!(rep.status, ConeSplitStatus::Pass, "{rep:?}");
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
        #[test]
        fn sandwich_and_monotone_in_k(
            c in proptest::collection::vec(-0.6f64..0.6, 3),
            w in 0.2f64..2.0,
            x in proptest::collection::vec(-0.3f64..0.3, 3),
            r in 0.2f64..0.6,
        ) {
            let u = crate::examples::riesz_sum(&[c, vec![0.0; 3]], &[w, 1.0], 3.0, 3).unwrap();
            let opts = HomogeneityOptions::sweep(3);
            let mut prev = 0.0;
            for k in 0..=3 {
                let rep = homogeneity_defect(&u, &x, r, k, &opts).unwrap();
                proptest::prop_assert!(rep.lower <= rep.upper, "{rep:?}");
                proptest::prop_assert!(rep.upper >= prev, "k = {k}: {} < {prev}", rep.upper);
                prev = rep.upper;
            }
        }
    }

    #[test]
    fn scales_ladder() {
        assert_eq!(dyadic_scales(0.125), vec![0.5, 0.25, 0.125]);
        assert_eq!(dyadic_scales(0.1), vec![0.5, 0.25, 0.125, 0.1]);
    }
}
