//! Radial damping coefficients `a(x) = a(|x|)`.

use alloc::format;
use alloc::string::ToString;

use crate::error::{Error, Result};
use crate::metric::{eval_metric, log_det_radial_derivative, Metric};
use crate::util::{norm, Ramp};

/// Inner collar around the obstacle boundary `|x| = r_in`: `a = a0` for
/// `r <= r_in + eps1`, smoothly switched off by `r_in + 2 eps1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Collar {
    pub r_in: f64,
    pub eps1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DampingKind {
    /// `a = 0`.
    None,
    /// `a = a0` everywhere.
    Constant,
    /// Quintic ramp from 0 at `r0 - eps0` to `a0` at `r0`, constant beyond.
    Smoothstep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampingProfile {
    pub kind: DampingKind,
    pub a0: f64,
    pub r0: f64,
    pub eps0: f64,
    pub collar: Option<Collar>,
}

impl DampingProfile {
    pub fn none() -> Self {
        Self { kind: DampingKind::None, a0: 0.0, r0: 0.0, eps0: 0.0, collar: None }
    }

    pub fn constant(a0: f64) -> Self {
        Self { kind: DampingKind::Constant, a0, r0: 0.0, eps0: 0.0, collar: None }
    }

    pub fn smoothstep(a0: f64, r0: f64, eps0: f64) -> Self {
        Self { kind: DampingKind::Smoothstep, a0, r0, eps0, collar: None }
    }

    pub fn with_collar(mut self, r_in: f64, eps1: f64) -> Self {
        self.collar = Some(Collar { r_in, eps1 });
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DampingKind::None => Ok(()),
            DampingKind::Constant if self.a0 > 0.0 => Ok(()),
            DampingKind::Constant => Err(Error::Config(format!("damping.a0 must be > 0, got {}", self.a0))),
            DampingKind::Smoothstep => {
                if !(self.a0 > 0.0) {
                    return Err(Error::Config(format!("damping.a0 must be > 0, got {}", self.a0)));
                }
                if !(self.eps0 > 0.0 && self.eps0 < self.r0) {
                    return Err(Error::Config(format!(
                        "damping.eps0 must lie in (0, r0) = (0, {}), got {}",
                        self.r0, self.eps0
                    )));
                }
                if let Some(c) = self.collar {
                    if !(c.eps1 > 0.0 && 2.0 * c.eps1 < self.eps0) {
                        return Err(Error::Config(format!(
                            "damping.eps1 must satisfy 0 < 2 eps1 < eps0 = {}, got {}",
                            self.eps0, c.eps1
                        )));
                    }
                    if c.r_in + 2.0 * c.eps1 > self.r0 - self.eps0 {
                        return Err(Error::Config(
                            "damping collar overlaps the outer ramp; need r_in + 2 eps1 <= r0 - eps0".to_string(),
                        ));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.kind == DampingKind::None
    }

    /// `(a, a', a'')` at radius `r`.
    pub fn radial(&self, r: f64) -> (f64, f64, f64) {
        match self.kind {
            DampingKind::None => (0.0, 0.0, 0.0),
            DampingKind::Constant => (self.a0, 0.0, 0.0),
            DampingKind::Smoothstep => {
                let outer = Ramp::new(self.r0 - self.eps0, self.r0);
                let mut v = (self.a0 * outer.value(r), self.a0 * outer.d1(r), self.a0 * outer.d2(r));
                if let Some(c) = self.collar {
                    // 1 - ramp, supported away from the outer ramp by validation
                    let inner = Ramp::new(c.r_in + c.eps1, c.r_in + 2.0 * c.eps1);
                    v.0 += self.a0 * (1.0 - inner.value(r));
                    v.1 -= self.a0 * inner.d1(r);
                    v.2 -= self.a0 * inner.d2(r);
                }
                v
            }
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.radial(r).0
    }

    pub fn at(&self, x: &[f64]) -> f64 {
        self.value(norm(x))
    }
}

/// `Delta_g a` at `x` for a radial damping coefficient:
/// `a'' |grad r|_g^2 + a' Delta_g r`.
///
/// When the field has `G x/|x| = x/|x|`, `|grad r|_g = 1` and
/// `Delta_g r = (n-1)/r + (1/2) tr(G^{-1} dG/dr)`; otherwise both come from a
/// finite-difference divergence.
pub fn damping_laplacian<M: Metric + ?Sized>(field: &M, damping: &DampingProfile, x: &[f64]) -> Result<f64> {
    let r = norm(x);
    let (_, a1, a2) = damping.radial(r);
    if a1 == 0.0 && a2 == 0.0 {
        return Ok(0.0);
    }
    let (grad_sq, lap_r) = if field.declares_radial_eigenvector() {
        let n = x.len() as f64;
        (1.0, (n - 1.0) / r + 0.5 * log_det_radial_derivative(field, x)?)
    } else {
        radial_laplacian_fd(field, x)?
    };
    Ok(a2 * grad_sq + a1 * lap_r)
}

fn gradient_of_r<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<(f64, nalgebra::DVector<f64>)> {
    let g = eval_metric(field, x)?;
    let sqrt_det = libm::sqrt(g.determinant());
    let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("metric not invertible".to_string()))?;
    let r = norm(x);
    let unit = nalgebra::DVector::from_iterator(x.len(), x.iter().map(|c| c / r));
    Ok((sqrt_det, g_inv * unit))
}

/// `(|grad r|_g^2, Delta_g r)` from the divergence form
/// `(1/sqrt det G) d_i (sqrt det G g^{ij} d_j r)` with central differences.
pub fn radial_laplacian_fd<M: Metric + ?Sized>(field: &M, x: &[f64]) -> Result<(f64, f64)> {
    let r = norm(x);
    let (sqrt_det, grad) = gradient_of_r(field, x)?;
    let unit: alloc::vec::Vec<f64> = x.iter().map(|c| c / r).collect();
    let grad_sq = grad.iter().zip(&unit).map(|(a, b)| a * b).sum();
    let h = 1e-4 * r;
    let mut div = 0.0;
    for k in 0..x.len() {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        let (sp, gp) = gradient_of_r(field, &xp)?;
        let (sm, gm) = gradient_of_r(field, &xm)?;
        div += (sp * gp[k] - sm * gm[k]) / (2.0 * h);
    }
    Ok((grad_sq, div / sqrt_det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricField, SampledMetric};

    #[test]
    fn smoothstep_profile_shape() {
        let d = DampingProfile::smoothstep(1.0, 5.0, 1.0);
        assert_eq!(d.value(3.9), 0.0);
        assert_eq!(d.value(4.0), 0.0);
        assert!((d.value(4.5) - 0.5).abs() < 1e-15);
        assert_eq!(d.value(5.0), 1.0);
        assert_eq!(d.value(50.0), 1.0);
    }

    #[test]
    fn collar_profile() {
        let d = DampingProfile::smoothstep(2.0, 10.0, 2.0).with_collar(1.0, 0.5);
        d.validate().unwrap();
        assert_eq!(d.value(1.2), 2.0);
        assert_eq!(d.value(1.5), 2.0);
        assert_eq!(d.value(2.0), 0.0);
        assert_eq!(d.value(6.0), 0.0);
        let bad = DampingProfile::smoothstep(2.0, 10.0, 2.0).with_collar(1.0, 1.5);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn flat_laplacian_of_radial_damping() {
        let d = DampingProfile::smoothstep(1.0, 5.0, 1.0);
        let x = [4.3, 0.5, -0.2];
        let r = norm(&x);
        let (_, a1, a2) = d.radial(r);
        let got = damping_laplacian(&MetricField::Flat { n: 3 }, &d, &x).unwrap();
        assert!((got - (a2 + 2.0 * a1 / r)).abs() < 1e-12);
    }

    #[test]
    fn closed_form_and_divergence_form_agree() {
        let d = DampingProfile::smoothstep(1.0, 5.0, 1.0);
        let field = MetricField::Example21 { n: 3, m: 2.0, d1: 1.0 };
        let x = [2.6, 2.9, 0.7];
        let closed = damping_laplacian(&field, &d, &x).unwrap();
        let sampled = SampledMetric::new(3, |y: &[f64]| field.tensor(y));
        let fd = damping_laplacian(&sampled, &d, &x).unwrap();
        assert!((closed - fd).abs() < 1e-5 * (1.0 + closed.abs()), "{closed} vs {fd}");
    }
}
