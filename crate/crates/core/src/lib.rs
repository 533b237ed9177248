//! Huygens representations of electromagnetic fields.
//!
//! An exterior field with known sources and a freely chosen interior field are
//! glued across a closed surface (static or moving). The jump between them
//! defines an equivalent surface charge-current density whose retarded
//! potentials reconstruct the glued field everywhere off the surface, through
//! either the Stratton-Chu or the Kottler-Franz surface integrals.
//!
//! Units are natural Lorentz-Heaviside units with `c = 1`. Electromagnetic
//! fields are carried as the complex combination `F = E + iH`.
//!
//! Modules:
//! - [`pauli`]: complex Pauli algebra and the spacetime operators `D`, `D̄`.
//! - [`fields`]: analytic causal ground-truth fields (dipole, plane wave).
//! - [`surfaces`]: level-set spheres, surface quadrature, retarded times.
//! - [`huygens`]: surface densities, retarded potentials, reconstructions,
//!   and boundary diagnostics.
//! - [`partition`]: multi-cell partitions and the weak Poynting balance.

pub mod error;
pub mod fields;
pub mod huygens;
pub mod partition;
pub mod pauli;
pub mod quadrature;
pub mod surfaces;

pub use error::{Error, Result};

/// Complex double.
pub type C64 = num_complex::Complex64;
/// Real 3-vector.
pub type Vec3 = nalgebra::Vector3<f64>;
/// Complex 3-vector.
pub type CVec3 = nalgebra::Vector3<C64>;
/// Complex 3×3 matrix, used for spatial Jacobians `jac[(i, j)] = ∂_j F_i`.
pub type CMat3 = nalgebra::Matrix3<C64>;

/// Promotes a real vector to a complex one.
pub fn complexify(v: &Vec3) -> CVec3 {
    v.map(|x| C64::new(x, 0.0))
}

/// Real parts of a complex vector.
pub fn real_part(v: &CVec3) -> Vec3 {
    v.map(|z| z.re)
}

/// Imaginary parts of a complex vector.
pub fn imag_part(v: &CVec3) -> Vec3 {
    v.map(|z| z.im)
}

/// Euclidean norm of a complex vector, `sqrt(Σ|z_i|²)`.
pub fn cnorm(v: &CVec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
