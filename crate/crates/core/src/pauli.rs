//! Complex Pauli algebra.
//!
//! A Pauli number is a complex scalar plus a complex 3-vector. The product
//! fuses the dot and cross products:
//!
//! ```text
//! (a + A)(b + B) = ab + A·B + aB + bA + i A×B
//! ```
//!
//! The 2×2 matrix correspondence is kept only for cross-checking; all
//! arithmetic runs on the (scalar, vector) pair.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Matrix2;

use crate::{CVec3, Result, Vec3, C64};

pub type Matrix2c = Matrix2<C64>;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliNum {
    pub s: C64,
    pub v: CVec3,
}

impl PauliNum {
    pub fn new(s: C64, v: CVec3) -> Self {
        Self { s, v }
    }

    pub fn zero() -> Self {
        Self::new(C64::new(0.0, 0.0), CVec3::zeros())
    }

    pub fn one() -> Self {
        Self::new(C64::new(1.0, 0.0), CVec3::zeros())
    }

    pub fn scalar(s: C64) -> Self {
        Self::new(s, CVec3::zeros())
    }

    pub fn vector(v: CVec3) -> Self {
        Self::new(C64::new(0.0, 0.0), v)
    }

    /// A real vector viewed as a Pauli number.
    pub fn real_vector(v: &Vec3) -> Self {
        Self::vector(crate::complexify(v))
    }

    pub fn scalar_part(&self) -> Self {
        Self::scalar(self.s)
    }

    pub fn vector_part(&self) -> Self {
        Self::vector(self.v)
    }

    /// Complex conjugation of every component (not the Clifford reversion).
    pub fn conj(&self) -> Self {
        Self::new(self.s.conj(), self.v.map(|z| z.conj()))
    }

    pub fn scale(&self, k: C64) -> Self {
        Self::new(self.s * k, self.v * k)
    }

    /// `sqrt(|s|² + Σ|v_i|²)`.
    pub fn norm(&self) -> f64 {
        (self.s.norm_sqr() + self.v.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let s = self.s * rhs.s + self.v.dot(&rhs.v);
        let v = rhs.v * self.s + self.v * rhs.s + self.v.cross(&rhs.v) * I;
        Self::new(s, v)
    }

    /// Matrix image `A₀ 1 + Σ A_k σ_k = [[A₀+A₃, A₁−iA₂], [A₁+iA₂, A₀−A₃]]`.
    ///
    /// With the opposite sign on the `A₂` entries the correspondence would
    /// reverse products, `M(A)M(B) = M(BA)`.
    pub fn to_matrix(&self) -> Matrix2c {
        let [a1, a2, a3] = [self.v[0], self.v[1], self.v[2]];
        Matrix2c::new(self.s + a3, a1 - I * a2, a1 + I * a2, self.s - a3)
    }

    /// Inverse of [`PauliNum::to_matrix`].
    pub fn from_matrix(m: &Matrix2c) -> Self {
        let s = (m[(0, 0)] + m[(1, 1)]) * 0.5;
        let a3 = (m[(0, 0)] - m[(1, 1)]) * 0.5;
        let a1 = (m[(0, 1)] + m[(1, 0)]) * 0.5;
        let a2 = (m[(1, 0)] - m[(0, 1)]) / (I * 2.0);
        Self::new(s, CVec3::new(a1, a2, a3))
    }
}

impl Mul for PauliNum {
    type Output = PauliNum;
    fn mul(self, rhs: PauliNum) -> PauliNum {
        PauliNum::mul(&self, &rhs)
    }
}

impl Add for PauliNum {
    type Output = PauliNum;
    fn add(self, rhs: PauliNum) -> PauliNum {
        PauliNum::new(self.s + rhs.s, self.v + rhs.v)
    }
}

impl AddAssign for PauliNum {
    fn add_assign(&mut self, rhs: PauliNum) {
        self.s += rhs.s;
        self.v += rhs.v;
    }
}

impl Sub for PauliNum {
    type Output = PauliNum;
    fn sub(self, rhs: PauliNum) -> PauliNum {
        PauliNum::new(self.s - rhs.s, self.v - rhs.v)
    }
}

impl Neg for PauliNum {
    type Output = PauliNum;
    fn neg(self) -> PauliNum {
        PauliNum::new(-self.s, -self.v)
    }
}

/// First derivatives of a Pauli field at one spacetime point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliJet {
    pub value: PauliNum,
    /// `∂_t` of the whole Pauli number.
    pub dt: PauliNum,
    /// `∇A₀`.
    pub grad_scalar: CVec3,
    /// `∇·A`.
    pub div_vector: C64,
    /// `∇×A`.
    pub curl_vector: CVec3,
}

/// A Pauli-valued field with caller-supplied first derivatives.
pub trait DifferentiablePauliField {
    fn jet(&self, x: &Vec3, t: f64) -> Result<PauliJet>;
}

/// `D = ∂_t + ∇`: `(Ȧ₀ + ∇·A) + (Ȧ + ∇A₀ + i∇×A)`.
pub fn apply_d<F: DifferentiablePauliField + ?Sized>(f: &F, x: &Vec3, t: f64) -> Result<PauliNum> {
    let j = f.jet(x, t)?;
    Ok(PauliNum::new(
        j.dt.s + j.div_vector,
        j.dt.v + j.grad_scalar + j.curl_vector * I,
    ))
}

/// `D̄ = ∂_t − ∇`: `(Ȧ₀ − ∇·A) + (Ȧ − ∇A₀ − i∇×A)`.
pub fn apply_dbar<F: DifferentiablePauliField + ?Sized>(
    f: &F,
    x: &Vec3,
    t: f64,
) -> Result<PauliNum> {
    let j = f.jet(x, t)?;
    Ok(PauliNum::new(
        j.dt.s - j.div_vector,
        j.dt.v - j.grad_scalar - j.curl_vector * I,
    ))
}

/// Oracle: a Pauli field whose derivatives are second-order central
/// differences of its value with step `h`.
pub struct FiniteDifferenceField<F> {
    value: F,
    h: f64,
}

impl<F> FiniteDifferenceField<F>
where
    F: Fn(&Vec3, f64) -> Result<PauliNum>,
{
    pub fn new(value: F, h: f64) -> Self {
        assert!(h > 0.0, "finite-difference step must be positive");
        Self { value, h }
    }
}

impl<F> DifferentiablePauliField for FiniteDifferenceField<F>
where
    F: Fn(&Vec3, f64) -> Result<PauliNum>,
{
    fn jet(&self, x: &Vec3, t: f64) -> Result<PauliJet> {
        let h = self.h;
        let value = (self.value)(x, t)?;
        let dt = ((self.value)(x, t + h)? - (self.value)(x, t - h)?).scale(C64::new(0.5 / h, 0.0));
        // partials[j] = ∂_j of the whole Pauli number
        let mut partials = [PauliNum::zero(); 3];
        for (j, p) in partials.iter_mut().enumerate() {
            let mut e = Vec3::zeros();
            e[j] = h;
            *p = ((self.value)(&(x + e), t)? - (self.value)(&(x - e), t)?)
                .scale(C64::new(0.5 / h, 0.0));
        }
        let grad_scalar = CVec3::new(partials[0].s, partials[1].s, partials[2].s);
        let div_vector = partials[0].v[0] + partials[1].v[1] + partials[2].v[2];
        let curl_vector = CVec3::new(
            partials[1].v[2] - partials[2].v[1],
            partials[2].v[0] - partials[0].v[2],
            partials[0].v[1] - partials[1].v[0],
        );
        Ok(PauliJet {
            value,
            dt,
            grad_scalar,
            div_vector,
            curl_vector,
        })
    }
}

/// Central-difference estimate of `□f = ∂_t²f − ∇²f`.
pub fn fd_box<F: Fn(&Vec3, f64) -> f64>(f: F, x: &Vec3, t: f64, h: f64) -> f64 {
    let c = f(x, t);
    let h2 = h * h;
    let mut lap = 0.0;
    for j in 0..3 {
        let mut e = Vec3::zeros();
        e[j] = h;
        lap += (f(&(x + e), t) - 2.0 * c + f(&(x - e), t)) / h2;
    }
    let tt = (f(x, t + h) - 2.0 * c + f(x, t - h)) / h2;
    tt - lap
}
