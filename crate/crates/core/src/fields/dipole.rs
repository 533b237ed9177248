//! Pulsed Hertzian dipole.
//!
//! The dipole moment is `p(t) = q f(t)` at `x₀`, with `q` a unit vector. Its
//! causal potentials in the Lorenz gauge are
//!
//! ```text
//! A = q f'(τ) / (4πr)
//! Φ = (q·r̂) (f(τ)/r² + f'(τ)/r) / (4π)          τ = t − r, r = |x − x₀|
//! ```
//!
//! and `E = −∇Φ − ∂_t A`, `H = ∇×A` give, off the source point,
//!
//! ```text
//! 4π E = (3r̂(r̂·q) − q)(f/r³ + f'/r²) + (r̂(r̂·q) − q) f''/r
//! 4π H = (q × r̂)(f'/r² + f''/r)
//! ```
//!
//! Time derivatives shift every `f^(k)` to `f^(k+1)`; the causal time
//! antiderivative shifts them down, with `∫f` in place of `f`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{AnalyticField, FieldSample, Signature, SourceSupport};
use crate::pauli::PauliNum;
use crate::{CMat3, CVec3, Error, Result, Vec3, C64};

/// Evaluation closer than this to the source point is an error.
pub const MIN_SOURCE_DISTANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct HertzianDipole {
    direction: Vec3,
    signature: Arc<dyn Signature>,
    position: Vec3,
}

pub fn hertzian_dipole(
    direction: Vec3,
    signature: Arc<dyn Signature>,
    position: Vec3,
) -> Result<HertzianDipole> {
    HertzianDipole::new(direction, signature, position)
}

struct Geometry {
    r: f64,
    rhat: Vec3,
}

impl HertzianDipole {
    pub fn new(direction: Vec3, signature: Arc<dyn Signature>, position: Vec3) -> Result<Self> {
        if ((direction.norm() - 1.0).abs()) > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "dipole direction must be a unit vector (|p| = {})",
                direction.norm()
            )));
        }
        Ok(Self {
            direction,
            signature,
            position,
        })
    }

    pub fn position(&self) -> Vec3 {
        self.position
    }

    pub fn direction(&self) -> Vec3 {
        self.direction
    }

    pub fn signature(&self) -> &Arc<dyn Signature> {
        &self.signature
    }

    fn geometry(&self, x: &Vec3) -> Result<Geometry> {
        let u = x - self.position;
        let r = u.norm();
        if r < MIN_SOURCE_DISTANCE {
            return Err(Error::SingularPoint {
                distance: r,
                minimum: MIN_SOURCE_DISTANCE,
            });
        }
        Ok(Geometry { r, rhat: u / r })
    }

    /// `E + iH` for the derivative levels `(g0, g1, g2) = (f, f', f'')`
    /// (or any consistently shifted triple).
    fn field(&self, geo: &Geometry, g0: f64, g1: f64, g2: f64) -> CVec3 {
        let q = &self.direction;
        let (r, rh) = (geo.r, &geo.rhat);
        let rq = rh.dot(q);
        let near = g0 / (r * r * r) + g1 / (r * r);
        let e = ((rh * (3.0 * rq) - q) * near + (rh * rq - q) * (g2 / r)) / (4.0 * PI);
        let h = q.cross(rh) * ((g1 / (r * r) + g2 / r) / (4.0 * PI));
        CVec3::from_fn(|i, _| C64::new(e[i], h[i]))
    }

    /// Lorenz-gauge potentials `(Φ, A)`.
    pub fn potentials(&self, x: &Vec3, t: f64) -> Result<(f64, Vec3)> {
        let geo = self.geometry(x)?;
        let [f0, f1, ..] = self.signature.derivatives(t - geo.r);
        let r = geo.r;
        let phi = geo.rhat.dot(&self.direction) * (f0 / (r * r) + f1 / r) / (4.0 * PI);
        let a = self.direction * (f1 / (4.0 * PI * r));
        Ok((phi, a))
    }
}

impl AnalyticField for HertzianDipole {
    fn sample(&self, x: &Vec3, t: f64) -> Result<FieldSample> {
        let geo = self.geometry(x)?;
        let [big_f, f0, f1, f2, f3] = self.signature.stack(t - geo.r);
        Ok(FieldSample {
            value: self.field(&geo, f0, f1, f2),
            dt: self.field(&geo, f1, f2, f3),
            dt_inv: self.field(&geo, big_f, f0, f1),
        })
    }

    fn jacobian(&self, x: &Vec3, t: f64) -> Result<CMat3> {
        let geo = self.geometry(x)?;
        let [g0, g1, g2, g3] = self.signature.derivatives(t - geo.r);
        let q = &self.direction;
        let (r, rh) = (geo.r, &geo.rhat);
        let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
        let rq = rh.dot(q);
        let four_pi = 4.0 * PI;

        // E = α r̂(r̂·q) − β q, H = γ (q × r̂); primes are total d/dr.
        let near = g0 / r3 + g1 / r2;
        let near_r = -3.0 * g0 / r4 - 3.0 * g1 / r3 - g2 / r2;
        let far = g2 / r;
        let far_r = -g3 / r - g2 / r2;
        let alpha = (3.0 * near + far) / four_pi;
        let alpha_r = (3.0 * near_r + far_r) / four_pi;
        let beta_r = (near_r + far_r) / four_pi;
        let gamma = (g1 / r2 + g2 / r) / four_pi;
        let gamma_r = (-2.0 * g1 / r3 - 2.0 * g2 / r2 - g3 / r) / four_pi;
        let qxr = q.cross(rh);

        let mut jac = CMat3::zeros();
        for j in 0..3 {
            let mut ej = Vec3::zeros();
            ej[j] = 1.0;
            // ∂_j r̂ = (e_j − r̂_j r̂)/r
            let drh = (ej - rh * rh[j]) / r;
            // ∂_j [r̂ (r̂·q)]
            let d_rrq = drh * rq + rh * drh.dot(q);
            let de = rh * (alpha_r * rh[j] * rq) + d_rrq * alpha - q * (beta_r * rh[j]);
            let dh = qxr * (gamma_r * rh[j]) + q.cross(&drh) * gamma;
            for i in 0..3 {
                jac[(i, j)] = C64::new(de[i], dh[i]);
            }
        }
        Ok(jac)
    }

    fn source(&self) -> SourceSupport {
        SourceSupport::Point {
            position: self.position,
            active: (self.signature.onset(), self.signature.support_end()),
        }
    }

    fn onset(&self) -> f64 {
        self.signature.onset()
    }

    fn source_density(&self, x: &Vec3, _t: f64) -> Result<PauliNum> {
        self.geometry(x)?;
        Ok(PauliNum::zero())
    }
}
