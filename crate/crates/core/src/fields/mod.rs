//! Analytic causal electromagnetic fields.
//!
//! Every field is carried as `F = E + iH` together with its time derivative,
//! its causal time antiderivative `∫_{-∞}^t F`, and its spatial Jacobian.
//! These are ground truths: reconstructions are judged against them.

mod dipole;
mod plane_wave;
mod signature;

use std::fmt::Debug;

use crate::pauli::{apply_d, DifferentiablePauliField, FiniteDifferenceField, PauliJet, PauliNum};
use crate::{CMat3, CVec3, Result, Vec3, C64};

pub use dipole::{hertzian_dipole, HertzianDipole, MIN_SOURCE_DISTANCE};
pub use plane_wave::{plane_wave, PlaneWave};
pub use signature::{hann_pulse, HannPulse, Signature, HANN_POWER};

/// Value, time derivative and time antiderivative of a field at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub value: CVec3,
    pub dt: CVec3,
    pub dt_inv: CVec3,
}

impl FieldSample {
    pub fn zero() -> Self {
        Self {
            value: CVec3::zeros(),
            dt: CVec3::zeros(),
            dt_inv: CVec3::zeros(),
        }
    }

    pub fn e(&self) -> Vec3 {
        crate::real_part(&self.value)
    }

    pub fn h(&self) -> Vec3 {
        crate::imag_part(&self.value)
    }
}

impl std::ops::Sub for FieldSample {
    type Output = FieldSample;
    fn sub(self, rhs: FieldSample) -> FieldSample {
        FieldSample {
            value: self.value - rhs.value,
            dt: self.dt - rhs.dt,
            dt_inv: self.dt_inv - rhs.dt_inv,
        }
    }
}

/// Where a field's true sources live.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SourceSupport {
    None,
    /// A point source at `position`, radiating during `active.0 ..= active.1`.
    Point { position: Vec3, active: (f64, f64) },
}

pub trait AnalyticField: Send + Sync + Debug {
    fn sample(&self, x: &Vec3, t: f64) -> Result<FieldSample>;

    /// `jac[(i, j)] = ∂_j F_i`.
    fn jacobian(&self, x: &Vec3, t: f64) -> Result<CMat3>;

    fn source(&self) -> SourceSupport;

    /// The field vanishes everywhere for `t ≤ onset()`.
    fn onset(&self) -> f64;

    /// Charge-current density `Ĵ = ρ − J` at a point where it is a function.
    fn source_density(&self, x: &Vec3, t: f64) -> Result<PauliNum> {
        self.sample(x, t)?;
        Ok(PauliNum::zero())
    }

    fn value(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        Ok(self.sample(x, t)?.value)
    }
}

/// The identically zero field.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroField;

impl AnalyticField for ZeroField {
    fn sample(&self, _: &Vec3, _: f64) -> Result<FieldSample> {
        Ok(FieldSample::zero())
    }

    fn jacobian(&self, _: &Vec3, _: f64) -> Result<CMat3> {
        Ok(CMat3::zeros())
    }

    fn source(&self) -> SourceSupport {
        SourceSupport::None
    }

    fn onset(&self) -> f64 {
        f64::INFINITY
    }
}

/// A field viewed as a pure-vector Pauli field, with derivatives taken from
/// its analytic Jacobian.
pub struct PauliView<'a>(pub &'a dyn AnalyticField);

impl DifferentiablePauliField for PauliView<'_> {
    fn jet(&self, x: &Vec3, t: f64) -> Result<PauliJet> {
        let s = self.0.sample(x, t)?;
        let j = self.0.jacobian(x, t)?;
        Ok(PauliJet {
            value: PauliNum::vector(s.value),
            dt: PauliNum::vector(s.dt),
            grad_scalar: CVec3::zeros(),
            div_vector: j.trace(),
            curl_vector: curl_from_jacobian(&j),
        })
    }
}

pub fn curl_from_jacobian(j: &CMat3) -> CVec3 {
    CVec3::new(
        j[(2, 1)] - j[(1, 2)],
        j[(0, 2)] - j[(2, 0)],
        j[(1, 0)] - j[(0, 1)],
    )
}

/// Oracle: `D F + Ĵ` with every derivative of `F` replaced by a central
/// difference of step `h`. Vanishes to `O(h²)` for a field satisfying
/// Maxwell's equations.
pub fn maxwell_residual(field: &dyn AnalyticField, x: &Vec3, t: f64, h: f64) -> Result<PauliNum> {
    let fd = FiniteDifferenceField::new(|y: &Vec3, s| Ok(PauliNum::vector(field.value(y, s)?)), h);
    Ok(apply_d(&fd, x, t)? + field.source_density(x, t)?)
}

/// Energy density and Poynting flux.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyMomentum {
    pub u: f64,
    pub s: Vec3,
}

/// `U = (E² + H²)/2`, `S = E × H`; the scalar and vector parts of `½ F F*`.
pub fn energy_momentum(f: &CVec3) -> EnergyMomentum {
    let e = crate::real_part(f);
    let h = crate::imag_part(f);
    EnergyMomentum {
        u: 0.5 * (e.norm_squared() + h.norm_squared()),
        s: e.cross(&h),
    }
}

/// `F·F = E² − H² + 2i E·H`.
pub fn lorentz_invariant(f: &CVec3) -> C64 {
    f.dot(f)
}
