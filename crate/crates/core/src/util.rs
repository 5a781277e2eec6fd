//! Small scalar helpers shared across modules.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Quintic smoothstep `6t^5 - 15t^4 + 10t^3`, clamped to `[0, 1]`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        t * t * t * (t * (6.0 * t - 15.0) + 10.0)
    }
}

/// First derivative of [`smoothstep`] with respect to `t`.
pub fn smoothstep_d1(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        30.0 * t * t * (t - 1.0) * (t - 1.0)
    }
}

/// Second derivative of [`smoothstep`] with respect to `t`.
pub fn smoothstep_d2(t: f64) -> f64 {
    if t <= 0.0 || t >= 1.0 {
        0.0
    } else {
        60.0 * t * (t - 1.0) * (2.0 * t - 1.0)
    }
}

/// A smooth ramp rising from 0 at `start` to 1 at `end`, with its first two
/// radial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub start: f64,
    pub end: f64,
}

impl Ramp {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    fn width(&self) -> f64 {
        self.end - self.start
    }

    pub fn value(&self, r: f64) -> f64 {
        smoothstep((r - self.start) / self.width())
    }

    pub fn d1(&self, r: f64) -> f64 {
        smoothstep_d1((r - self.start) / self.width()) / self.width()
    }

    pub fn d2(&self, r: f64) -> f64 {
        let w = self.width();
        smoothstep_d2((r - self.start) / w) / (w * w)
    }
}

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * libm::pow(PI, half) / libm::tgamma(half)
}

pub fn norm(x: &[f64]) -> f64 {
    libm::sqrt(x.iter().map(|v| v * v).sum())
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Unit vectors: the `2n` signed coordinate axes followed by seeded Gaussian
/// draws normalized to the Euclidean sphere.
pub fn sphere_directions(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..(2 * n).min(count) {
        let mut e = alloc::vec![0.0; n];
        e[i / 2] = if i % 2 == 0 { 1.0 } else { -1.0 };
        out.push(e);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            out.push(v.into_iter().map(|c| c / len).collect());
        }
    }
    out
}

/// `count` equispaced values covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Composite trapezoid rule over possibly non-uniform abscissae.
pub fn trapezoid(t: &[f64], y: &[f64]) -> f64 {
    t.windows(2).zip(y.windows(2)).map(|(tw, yw)| 0.5 * (tw[1] - tw[0]) * (yw[0] + yw[1])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_derivatives_match_differences() {
        let h = 1e-6;
        for &t in &[0.1, 0.33, 0.5, 0.77, 0.95] {
            let fd1 = (smoothstep(t + h) - smoothstep(t - h)) / (2.0 * h);
            let fd2 = (smoothstep_d1(t + h) - smoothstep_d1(t - h)) / (2.0 * h);
            assert!((fd1 - smoothstep_d1(t)).abs() < 1e-8);
            assert!((fd2 - smoothstep_d2(t)).abs() < 1e-6);
        }
        assert_eq!(smoothstep(-1.0), 0.0);
        assert_eq!(smoothstep(2.0), 1.0);
    }

    #[test]
    fn sphere_areas() {
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(4) - 2.0 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn directions_are_unit_and_deterministic() {
        let a = sphere_directions(3, 40, 7);
        let b = sphere_directions(3, 40, 7);
        assert_eq!(a, b);
        assert!(a.iter().all(|d| (norm(d) - 1.0).abs() < 1e-14));
        assert_eq!(a[0], alloc::vec![1.0, 0.0, 0.0]);
        assert_eq!(a[1], alloc::vec![-1.0, 0.0, 0.0]);
    }

    #[test]
    fn trapezoid_is_exact_for_lines() {
        let t = linspace(0.0, 2.0, 11);
        let y: Vec<f64> = t.iter().map(|v| 3.0 * v + 1.0).collect();
        assert!((trapezoid(&t, &y) - 8.0).abs() < 1e-12);
    }
}
