//! Points, balls, and k-planes as orthonormal frames.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub type Pt = SmallVec<[f64; 8]>;

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `x + r * y` without heap allocation for n <= 8.
#[inline]
pub fn affine(x: &[f64], r: f64, y: &[f64]) -> Pt {
    x.iter().zip(y).map(|(a, b)| a + r * b).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derives an independent seed for a labelled sub-stream.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn gaussian_vector(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_unit_vector(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let v = gaussian_vector(n, rng);
        let l = norm(&v);
        if l > 1e-8 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

/// Haar-distributed orthogonal matrix, row-major.
pub fn random_orthogonal(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vector(n, rng)).collect();
    let q = gram_schmidt(&rows).expect("gaussian rows are independent with probability one");
    q.into_iter().flatten().collect()
}

/// Orthonormalizes the given vectors in order; fails on (near) dependence.
pub fn gram_schmidt(vs: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        let mut w = v.clone();
        for _ in 0..2 {
            for u in &out {
                let c = dot(&w, u);
                for (wi, ui) in w.iter_mut().zip(u) {
                    *wi -= c * ui;
                }
            }
        }
        let l = norm(&w);
        if l < 1e-10 * norm(v).max(1e-300) || l == 0.0 {
            return None;
        }
        out.push(w.into_iter().map(|x| x / l).collect());
    }
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Vec<f64>, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn centered(n: usize, radius: f64) -> Self {
        Self { center: vec![0.0; n], radius }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        dist(x, &self.center) <= self.radius
    }

    /// Radius of the largest ball around `x` inside this ball.
    pub fn inner_radius(&self, x: &[f64]) -> f64 {
        self.radius - dist(x, &self.center)
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.dim()) * self.radius.powi(self.dim() as i32)
    }
}

/// Volume of the unit ball in R^n.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * 2.0 * std::f64::consts::PI / n as f64,
    }
}

/// A k-dimensional linear subspace of R^n given by an orthonormal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneFrame {
    pub n: usize,
    pub frame: Vec<Vec<f64>>,
}

impl PlaneFrame {
    pub fn new(n: usize, vectors: Vec<Vec<f64>>) -> Result<Self> {
        if vectors.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension(format!("frame vectors must have length {n}")));
        }
        if vectors.len() > n {
            return Err(Error::Dimension(format!("{} vectors in R^{n}", vectors.len())));
        }
        let frame = gram_schmidt(&vectors).ok_or_else(|| Error::InvalidInput("frame vectors are linearly dependent".into()))?;
        Ok(Self { n, frame })
    }

    pub fn zero(n: usize) -> Self {
        Self { n, frame: Vec::new() }
    }

    /// Span of the given coordinate axes (0-based).
    pub fn coordinate(n: usize, axes: &[usize]) -> Self {
        let frame = axes.iter().map(|&a| (0..n).map(|i| if i == a { 1.0 } else { 0.0 }).collect()).collect();
        Self { n, frame }
    }

    pub fn k(&self) -> usize {
        self.frame.len()
    }

    /// Haar-random element of G(k, n).
    pub fn random(n: usize, k: usize, rng: &mut impl Rng) -> Self {
        loop {
            let vs: Vec<Vec<f64>> = (0..k).map(|_| gaussian_vector(n, rng)).collect();
            if let Some(frame) = gram_schmidt(&vs) {
                return Self { n, frame };
            }
        }
    }

    pub fn is_orthonormal(&self, tol: f64) -> bool {
        self.frame.iter().enumerate().all(|(i, a)| {
            self.frame.iter().enumerate().all(|(j, b)| {
                let target = if i == j { 1.0 } else { 0.0 };
                (dot(a, b) - target).abs() <= tol
            })
        })
    }

    /// Component of `y` orthogonal to the plane.
    #[inline]
    pub fn orth(&self, y: &[f64]) -> Pt {
        let mut w: Pt = y.iter().copied().collect();
        for v in &self.frame {
            let c = dot(y, v);
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= c * vi;
            }
        }
        w
    }

    /// Distance from `y` to the plane.
    #[inline]
    pub fn distance(&self, y: &[f64]) -> f64 {
        let s: f64 = self.frame.iter().map(|v| dot(y, v).powi(2)).sum();
        (dot(y, y) - s).max(0.0).sqrt()
    }

    /// Point `x + sum_i t_i e_i` for plane coordinates `t`.
    #[inline]
    pub fn embed(&self, x: &[f64], t: &[f64]) -> Pt {
        let mut out: Pt = x.iter().copied().collect();
        for (v, &ti) in self.frame.iter().zip(t) {
            for (o, vi) in out.iter_mut().zip(v) {
                *o += ti * vi;
            }
        }
        out
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self) -> Vec<Vec<f64>> {
        let mut basis = self.frame.clone();
        let start = basis.len();
        for i in 0..self.n {
            let mut e = vec![0.0; self.n];
            e[i] = 1.0;
            let mut w = e.clone();
            for _ in 0..2 {
                for u in &basis {
                    let c = dot(&w, u);
                    for (wi, ui) in w.iter_mut().zip(u) {
                        *wi -= c * ui;
                    }
                }
            }
            let l = norm(&w);
            if l > 1e-6 {
                basis.push(w.into_iter().map(|x| x / l).collect());
            }
            if basis.len() == self.n {
                break;
            }
        }
        basis.split_off(start)
    }

    /// Plane spanned by this plane and one extra vector.
    pub fn extend(&self, v: &[f64]) -> Option<Self> {
        let mut vs = self.frame.clone();
        vs.push(v.to_vec());
        gram_schmidt(&vs).map(|frame| Self { n: self.n, frame })
    }

    pub fn contains_subspace(&self, other: &PlaneFrame, tol: f64) -> bool {
        other.frame.iter().all(|v| self.distance(v) <= tol)
    }

    /// Principal angles against a plane of the same dimension, ascending.
    pub fn principal_angles(&self, other: &PlaneFrame) -> Result<Vec<f64>> {
        if self.n != other.n || self.k() != other.k() {
            return Err(Error::Dimension("principal angles need planes of equal dimension".into()));
        }
        let k = self.k();
        if k == 0 {
            return Ok(Vec::new());
        }
        let rows: Vec<Pt> = other.frame.iter().map(|v| self.orth(v)).collect();
        let m = DMatrix::from_fn(k, self.n, |i, j| rows[i][j]);
        let sv = m.svd(false, false).singular_values;
        let mut angles: Vec<f64> = sv.iter().map(|s| s.clamp(0.0, 1.0).asin()).collect();
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(angles)
    }

    pub fn max_principal_angle(&self, other: &PlaneFrame) -> Result<f64> {
        Ok(self.principal_angles(other)?.last().copied().unwrap_or(0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_volumes() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
        assert!((unit_ball_volume(4) - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn orthogonal_matrix_is_orthogonal() {
        let mut r = rng(7);
        let q = random_orthogonal(4, &mut r);
        for i in 0..4 {
            for j in 0..4 {
                let d = dot(&q[4 * i..4 * i + 4], &q[4 * j..4 * j + 4]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_distance_and_complement() {
        let v = PlaneFrame::coordinate(3, &[2]);
        assert!((v.distance(&[3.0, 4.0, 7.0]) - 5.0).abs() < 1e-14);
        let c = v.complement();
        assert_eq!(c.len(), 2);
        let w = PlaneFrame::new(3, c).unwrap();
        assert!(w.is_orthonormal(1e-12));
        assert!((w.distance(&[0.0, 0.0, 2.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn principal_angles_of_rotated_line() {
        let a = PlaneFrame::coordinate(3, &[0]);
        let t: f64 = 0.3;
        let b = PlaneFrame::new(3, vec![vec![t.cos(), t.sin(), 0.0]]).unwrap();
        assert!((a.max_principal_angle(&b).unwrap() - t).abs() < 1e-12);
        assert!(a.max_principal_angle(&a).unwrap() < 1e-14);
    }
}
