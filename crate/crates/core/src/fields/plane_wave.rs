//! Pulsed plane wave `F = (ê + i k̂×ê) f(t − k̂·x)`.
//!
//! Sourceless everywhere, but it does not vanish in the far past at every
//! point, so it cannot serve as the exterior field of a Huygens scene. It is
//! useful for algebra checks and partition cells.

use std::sync::Arc;

use super::{AnalyticField, FieldSample, Signature, SourceSupport};
use crate::{complexify, CMat3, CVec3, Error, Result, Vec3, C64};

#[derive(Debug, Clone)]
pub struct PlaneWave {
    k: Vec3,
    amplitude: CVec3,
    signature: Arc<dyn Signature>,
}

pub fn plane_wave(k: Vec3, e: Vec3, signature: Arc<dyn Signature>) -> Result<PlaneWave> {
    PlaneWave::new(k, e, signature)
}

impl PlaneWave {
    pub fn new(k: Vec3, e: Vec3, signature: Arc<dyn Signature>) -> Result<Self> {
        if (k.norm() - 1.0).abs() > 1e-12 || (e.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(
                "plane wave direction and polarization must be unit vectors".into(),
            ));
        }
        if k.dot(&e).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "polarization must be orthogonal to the propagation direction (k·e = {})",
                k.dot(&e)
            )));
        }
        let amplitude = complexify(&e) + complexify(&k.cross(&e)) * C64::new(0.0, 1.0);
        Ok(Self {
            k,
            amplitude,
            signature,
        })
    }

    pub fn direction(&self) -> Vec3 {
        self.k
    }
}

impl AnalyticField for PlaneWave {
    fn sample(&self, x: &Vec3, t: f64) -> Result<FieldSample> {
        let [big_f, f0, f1, ..] = self.signature.stack(t - self.k.dot(x));
        let a = &self.amplitude;
        Ok(FieldSample {
            value: a * C64::new(f0, 0.0),
            dt: a * C64::new(f1, 0.0),
            dt_inv: a * C64::new(big_f, 0.0),
        })
    }

    fn jacobian(&self, x: &Vec3, t: f64) -> Result<CMat3> {
        let [_, f1, ..] = self.signature.derivatives(t - self.k.dot(x));
        Ok(self.amplitude * complexify(&self.k).transpose() * C64::new(-f1, 0.0))
    }

    fn source(&self) -> SourceSupport {
        SourceSupport::None
    }

    fn onset(&self) -> f64 {
        f64::NEG_INFINITY
    }
}
