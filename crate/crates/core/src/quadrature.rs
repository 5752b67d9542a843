//! Product Gauss rules on spheres and balls, randomly rotated by a seeded orthogonal map.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::geometry::{derive_seed, random_orthogonal, rng};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for j in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * j + 1) as f64 * z * p1 - j as f64 * p2) / (j + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[m - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[m - 1 - i] = wi;
    }
    (x, w)
}

/// Gauss rule for the weight `(1 - t^2)^a` on [-1, 1] by Golub-Welsch; weights sum to 1.
pub fn gauss_gegenbauer(m: usize, a: f64) -> (Vec<f64>, Vec<f64>) {
    if a == 0.0 {
        let (x, w) = gauss_legendre(m);
        return (x, w.into_iter().map(|v| v / 2.0).collect());
    }
    let mut j = DMatrix::<f64>::zeros(m, m);
    for k in 1..m {
        let kf = k as f64;
        let beta = kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0));
        j[(k, k - 1)] = beta.sqrt();
        j[(k - 1, k)] = beta.sqrt();
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..m).map(|i| (eig.eigenvalues[i], eig.eigenvectors[(0, i)].powi(2))).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    (pairs.iter().map(|p| p.0).collect(), pairs.iter().map(|p| p.1 / total).collect())
}

/// Nodes on the unit sphere S^{dim-1} with weights summing to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn product_count(dim: usize, l: usize) -> usize {
    match dim {
        1 => 2,
        2 => 2 * l,
        _ => l * product_count(dim - 1, l),
    }
}

fn product_rule(dim: usize, l: usize) -> (Vec<f64>, Vec<f64>) {
    match dim {
        1 => (vec![-1.0, 1.0], vec![0.5, 0.5]),
        2 => {
            let m = 2 * l;
            let mut nodes = Vec::with_capacity(2 * m);
            for j in 0..m {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / m as f64;
                nodes.push(phi.cos());
                nodes.push(phi.sin());
            }
            (nodes, vec![1.0 / m as f64; m])
        }
        _ => {
            let (t, wt) = gauss_gegenbauer(l, (dim as f64 - 3.0) / 2.0);
            let (sub, ws) = product_rule(dim - 1, l);
            let sub_n = ws.len();
            let mut nodes = Vec::with_capacity(dim * l * sub_n);
            let mut weights = Vec::with_capacity(l * sub_n);
            for (ti, wti) in t.iter().zip(&wt) {
                let s = (1.0 - ti * ti).max(0.0).sqrt();
                for j in 0..sub_n {
                    nodes.push(*ti);
                    nodes.extend(sub[j * (dim - 1)..(j + 1) * (dim - 1)].iter().map(|z| s * z));
                    weights.push(wti * ws[j]);
                }
            }
            (nodes, weights)
        }
    }
}

impl SphereRule {
    /// Largest product rule with at most `budget` nodes (at least the minimal rule), rotated by a
    /// Haar orthogonal map drawn from `seed`.
    pub fn build(dim: usize, budget: usize, seed: u64) -> Self {
        assert!(dim >= 1, "sphere rule needs dim >= 1");
        let mut l = 2;
        while product_count(dim, l + 1) <= budget {
            l += 1;
        }
        let (raw, weights) = product_rule(dim, l);
        let q = random_orthogonal(dim, &mut rng(derive_seed(seed, dim as u64)));
        let mut nodes = vec![0.0; raw.len()];
        for (src, dst) in raw.chunks(dim).zip(nodes.chunks_mut(dim)) {
            for i in 0..dim {
                dst[i] = (0..dim).map(|j| q[i * dim + j] * src[j]).sum();
            }
        }
        Self { dim, nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks(self.dim).zip(self.weights.iter().copied())
    }
}

/// Nodes in the unit ball (or an annulus) with weights summing to one.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BallRule {
    pub dim: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl BallRule {
    pub fn build(sphere: &SphereRule, shells: usize) -> Self {
        Self::annulus(sphere, shells, 0.0, 1.0)
    }

    /// Rule for the normalized measure on `{a <= |y| <= b}`.
    pub fn annulus(sphere: &SphereRule, shells: usize, a: f64, b: f64) -> Self {
        let dim = sphere.dim;
        let (x, w) = gauss_legendre(shells.max(1));
        let mut radial: Vec<(f64, f64)> = x
            .iter()
            .zip(&w)
            .map(|(xi, wi)| {
                let rho = a + (b - a) * (xi + 1.0) / 2.0;
                (rho, wi * rho.powi(dim as i32 - 1))
            })
            .collect();
        let total: f64 = radial.iter().map(|r| r.1).sum();
        for r in radial.iter_mut() {
            r.1 /= total;
        }
        let mut nodes = Vec::with_capacity(dim * radial.len() * sphere.len());
        let mut weights = Vec::with_capacity(radial.len() * sphere.len());
        for (rho, wr) in radial {
            for (y, wy) in sphere.iter() {
                nodes.extend(y.iter().map(|c| rho * c));
                weights.push(wr * wy);
            }
        }
        Self { dim, nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.nodes.chunks(self.dim).zip(self.weights.iter().copied())
    }
}

/// Quadrature resolution settings shared by every integral in the crate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Node budget for sphere averages.
    pub sphere_nodes: usize,
    /// Radial Gauss-Legendre shells for ball integrals.
    pub shells: usize,
    /// Node budget of the sphere factor inside ball rules.
    pub ball_sphere_nodes: usize,
    /// Number of local maxima refined by the sup statistic.
    pub max_candidates: usize,
    pub seed: u64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { sphere_nodes: 2048, shells: 32, ball_sphere_nodes: 512, max_candidates: 4, seed: 0x5EED }
    }
}

type SphereKey = (usize, usize, u64);
type BallKey = (usize, usize, usize, u64, u64, u64);

fn sphere_cache() -> &'static Mutex<HashMap<SphereKey, Arc<SphereRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<SphereKey, Arc<SphereRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn ball_cache() -> &'static Mutex<HashMap<BallKey, Arc<BallRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<BallKey, Arc<BallRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

pub fn cached_sphere(dim: usize, budget: usize, seed: u64) -> Arc<SphereRule> {
    let key = (dim, budget, seed);
    if let Some(r) = sphere_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(SphereRule::build(dim, budget, seed));
    sphere_cache().lock().unwrap().entry(key).or_insert(rule).clone()
}

pub fn cached_annulus(dim: usize, budget: usize, shells: usize, seed: u64, a: f64, b: f64) -> Arc<BallRule> {
    let key = (dim, budget, shells, seed, a.to_bits(), b.to_bits());
    if let Some(r) = ball_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let sphere = cached_sphere(dim, budget, seed);
    let rule = Arc::new(BallRule::annulus(&sphere, shells, a, b));
    ball_cache().lock().unwrap().entry(key).or_insert(rule).clone()
}

impl QuadratureSpec {
    /// Cheaper settings used inside lattice sweeps.
    pub fn coarse(seed: u64) -> Self {
        Self { sphere_nodes: 512, shells: 10, ball_sphere_nodes: 128, max_candidates: 2, seed }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn sphere(&self, dim: usize) -> Arc<SphereRule> {
        cached_sphere(dim, self.sphere_nodes, self.seed)
    }

    pub fn ball(&self, dim: usize) -> Arc<BallRule> {
        cached_annulus(dim, self.ball_sphere_nodes, self.shells, self.seed, 0.0, 1.0)
    }

    pub fn annulus(&self, dim: usize, a: f64, b: f64) -> Arc<BallRule> {
        cached_annulus(dim, self.ball_sphere_nodes, self.shells, self.seed, a, b)
    }
}

/// Weighted median: smallest value whose cumulative weight reaches half the total.
pub fn weighted_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut idx: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0 && values[i].is_finite()).collect();
    if idx.is_empty() {
        return 0.0;
    }
    idx.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap().then(a.cmp(&b)));
    let total: f64 = idx.iter().map(|&i| weights[i]).sum();
    let mut acc = 0.0;
    for &i in &idx {
        acc += weights[i];
        if acc >= 0.5 * total {
            return values[i];
        }
    }
    values[*idx.last().unwrap()]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn gegenbauer_half_matches_semicircle_moments() {
        let (x, w) = gauss_gegenbauer(6, 0.5);
        let m2: f64 = x.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        assert!((m2 - 0.25).abs() < 1e-13);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.125).abs() < 1e-13);
    }

    #[test]
    fn sphere_moments() {
        for dim in 2..=5 {
            let r = SphereRule::build(dim, 2048, 3);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let m2: f64 = r.iter().map(|(y, w)| w * y[0] * y[0]).sum();
            assert!((m2 - 1.0 / dim as f64).abs() < 1e-12, "dim {dim}");
            let m4: f64 = r.iter().map(|(y, w)| w * y[1].powi(4)).sum();
            let exact = 3.0 / (dim as f64 * (dim as f64 + 2.0));
            assert!((m4 - exact).abs() < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn ball_second_moment() {
        let s = SphereRule::build(3, 512, 1);
        let b = BallRule::build(&s, 16);
        let m: f64 = b.iter().map(|(y, w)| w * crate::geometry::dot(y, y)).sum();
        assert!((m - 3.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn median() {
        assert_eq!(weighted_median(&[3.0, 1.0, 2.0], &[1.0, 1.0, 1.0]), 2.0);
        assert_eq!(weighted_median(&[3.0, 1.0, 2.0], &[5.0, 1.0, 1.0]), 3.0);
    }
}
