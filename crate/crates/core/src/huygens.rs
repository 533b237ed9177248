//! Equivalent surface sources and surface-integral reconstructions.
//!
//! Gluing an exterior field `F` (sources inside `S`) to an interior field
//! `F'` (sources outside `S`) produces a field whose only source is the
//! surface charge-current density built from the jump `Fʲ = F − F'`:
//!
//! ```text
//! σ = n·Fʲ = σ_e + iσ_m          K = −i n×Fʲ = K_e + iK_m
//! ```
//!
//! plus, on a moving surface, the drag current `−λ̇ Fʲ`. The retarded
//! potentials of these densities give back the glued field through
//!
//! ```text
//! F = −∇Φ − ∂_t A + i∇×A                     (Stratton-Chu)
//! F = ∇×∇×∂_t⁻¹A + i∇×A                      (Kottler-Franz, off S)
//! ```
//!
//! # Retarded sums
//!
//! For a target `(x, t)` every quadrature node is evaluated at its own
//! emission time `t*`, solving `t* + |x − s(t*)| = t`. Collapsing the
//! retarded delta in the emission-time integral divides the node's
//! contribution by `κ = 1 − r̂·ṡ(t*)`, so a density `g` contributes
//! `m g` with `m = w / (4π r κ)`.
//!
//! Derivatives are taken under the sum, never by differencing the sum.
//! With `∂t*/∂t = 1/κ` and `∇t* = −r̂/κ`,
//!
//! ```text
//! ∂_t (m g) = ∂_{t*}(m g) / κ
//! ∇ (m g)   = g ∇m|_{t*} − (r̂/κ) ∂_{t*}(m g)
//! ∇m|_{t*}  = −w (r̂ − ṡ) / (4π (rκ)²)
//! ∂_{t*} m  = ẇ / (4π rκ) − w (|ṡ|² − r̂·ṡ − (x − s)·s̈) / (4π (rκ)²)
//! ```
//!
//! where `∂_{t*} g` is the rate of the density along the node trajectory,
//! `∂_t Fʲ + (ṡ·∇) Fʲ`. On a static surface `κ = 1`, `ṡ = 0`, and these
//! reduce to the familiar `∇(g/r) = −r̂ (g/r² + ġ/r)`.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::fields::{AnalyticField, FieldSample, SourceSupport};
use crate::surfaces::{quad_node, retarded_time, LevelSetSurface, ParamNode, QuadNode, QuadOrder, RetardedNode};
use crate::{complexify, real_part, CVec3, Error, Result, Vec3, C64};

const I: C64 = C64::new(0.0, 1.0);

/// Potentials are only evaluated where `|λ| > EXCLUSION · R`.
pub const EXCLUSION: f64 = 1e-6;
/// A point counts as on the surface when `|λ| ≤ ON_SURFACE · R`.
pub const ON_SURFACE: f64 = 1e-9;

fn cre(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Surface charge-current density at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceDensitySample {
    pub sigma_e: f64,
    pub sigma_m: f64,
    pub k_e: Vec3,
    pub k_m: Vec3,
    /// `−λ̇ Fʲ`; zero on a static surface.
    pub drag: CVec3,
    pub node: QuadNode,
}

impl SurfaceDensitySample {
    /// `σ_e + iσ_m`.
    pub fn charge(&self) -> C64 {
        C64::new(self.sigma_e, self.sigma_m)
    }

    /// `K_e + iK_m + drag`.
    pub fn current(&self) -> CVec3 {
        CVec3::from_fn(|i, _| C64::new(self.k_e[i], self.k_m[i])) + self.drag
    }
}

/// `σ_e = n·Eʲ`, `σ_m = n·Hʲ`, `K_e = n×Hʲ`, `K_m = −n×Eʲ`, `drag = −λ̇ Fʲ`.
pub fn densities_from_jump(node: &QuadNode, jump: &CVec3) -> SurfaceDensitySample {
    let n = &node.normal;
    let e = real_part(jump);
    let h = crate::imag_part(jump);
    SurfaceDensitySample {
        sigma_e: n.dot(&e),
        sigma_m: n.dot(&h),
        k_e: n.cross(&h),
        k_m: -n.cross(&e),
        drag: jump * cre(-node.lambda_dot),
        node: *node,
    }
}

/// Splits the drag current into its tangential and normal parts,
/// `λ̇ n×(n×Fʲ)` and `−λ̇ n(n·Fʲ)`.
pub fn drag_decomposition(sample: &SurfaceDensitySample) -> (CVec3, CVec3) {
    let n = complexify(&sample.node.normal);
    let d = &sample.drag;
    let normal = n * n.dot(d);
    let tangential = -n.cross(&n.cross(d));
    (tangential, normal)
}

/// Densities at a retarded node and their rates along the node trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityJet {
    pub charge: C64,
    pub current: CVec3,
    pub charge_rate: C64,
    pub current_rate: CVec3,
    /// `∫_{-∞}^{t*}` of the current; only for static surfaces.
    pub current_integral: CVec3,
}

/// Anything that can supply surface densities to the retarded sums.
pub trait SurfaceSource: Sync {
    /// All densities vanish for emission times `≤ quiet_before()`.
    fn quiet_before(&self) -> f64;
    fn density(&self, node: &RetardedNode, with_integral: bool) -> Result<DensityJet>;
}

/// Retarded potentials of a surface source at one target point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub phi: C64,
    pub a: CVec3,
    pub dt_a: CVec3,
    pub grad_phi: CVec3,
    pub curl_a: CVec3,
    /// `∂_t⁻¹A`
    pub dt_inv_a: Option<CVec3>,
    /// `∇×∇×∂_t⁻¹A`
    pub curl_curl_dt_inv_a: Option<CVec3>,
}

impl PotentialValue {
    fn zero(with_integral: bool) -> Self {
        let z = with_integral.then(CVec3::zeros);
        Self {
            phi: cre(0.0),
            a: CVec3::zeros(),
            dt_a: CVec3::zeros(),
            grad_phi: CVec3::zeros(),
            curl_a: CVec3::zeros(),
            dt_inv_a: z,
            curl_curl_dt_inv_a: z,
        }
    }

    /// `−∇Φ − ∂_t A + i∇×A`
    pub fn stratton_chu(&self) -> CVec3 {
        -self.grad_phi - self.dt_a + self.curl_a * I
    }

    /// Electric potentials only: `E = −∇Φ_e − ∂_t A_e`, `H = ∇×A_e`.
    pub fn stratton_chu_electric(&self) -> CVec3 {
        let re = |v: &CVec3| complexify(&real_part(v));
        -re(&self.grad_phi) - re(&self.dt_a) + re(&self.curl_a) * I
    }

    /// `∇×∇×∂_t⁻¹A + i∇×A`, when the antiderivative terms were computed.
    pub fn kottler_franz(&self) -> Option<CVec3> {
        self.curl_curl_dt_inv_a.map(|cc| cc + self.curl_a * I)
    }
}

/// Retarded potentials of `source` on `surface` at `(x, t)`.
///
/// `with_integral` additionally assembles the Kottler-Franz terms, which are
/// only available on static surfaces.
pub fn retarded_potentials(
    surface: &dyn LevelSetSurface,
    params: &[ParamNode],
    source: &dyn SurfaceSource,
    x: &Vec3,
    t: f64,
    with_integral: bool,
) -> Result<PotentialValue> {
    check_exclusion(surface, x, t)?;
    if with_integral && !surface.is_static() {
        return Err(Error::Unsupported(
            "Kottler-Franz reconstruction on a moving surface".into(),
        ));
    }
    let quiet = source.quiet_before();
    let mut acc = PotentialValue::zero(with_integral);
    let four_pi = 4.0 * PI;
    for p in params {
        let rn = retarded_time(surface, x, t, p)?;
        if rn.t_ret <= quiet {
            continue;
        }
        let d = source.density(&rn, with_integral)?;
        let node = &rn.node;
        let (r, kappa, rhat) = (rn.r, rn.kappa, &rn.rhat);
        let w = node.weight;
        let sdot = &node.velocity;
        let rk = r * kappa;
        let m = w / (four_pi * rk);
        let grad_m = complexify(&((rhat - sdot) * (-w / (four_pi * rk * rk))));
        let drk = sdot.norm_squared() - rhat.dot(sdot) - (rhat * r).dot(&node.acceleration);
        let dm = node.weight_rate / (four_pi * rk) - w * drk / (four_pi * rk * rk);
        let grad_tret = complexify(&(rhat * (-1.0 / kappa)));

        let charge_rate = d.charge * dm + d.charge_rate * m;
        let current_rate = d.current * cre(dm) + d.current_rate * cre(m);

        acc.phi += d.charge * m;
        acc.a += d.current * cre(m);
        acc.grad_phi += grad_m * d.charge + grad_tret * charge_rate;
        acc.dt_a += current_rate * cre(1.0 / kappa);
        acc.curl_a += grad_m.cross(&d.current) + grad_tret.cross(&current_rate);

        if with_integral {
            let c = cre(w / four_pi);
            let rh = complexify(rhat);
            let g = &d.current_integral;
            let k = &d.current;
            let kd = &d.current_rate;
            let r2 = r * r;
            let term = (rh * (cre(3.0) * rh.dot(g)) - g) * cre(1.0 / (r2 * r))
                + (rh * (cre(3.0) * rh.dot(k)) - k) * cre(1.0 / r2)
                + (rh * rh.dot(kd) - kd) * cre(1.0 / r);
            if let (Some(ia), Some(cc)) = (acc.dt_inv_a.as_mut(), acc.curl_curl_dt_inv_a.as_mut()) {
                *ia += g * (c / r);
                *cc += term * c;
            }
        }
    }
    Ok(acc)
}

fn check_exclusion(surface: &dyn LevelSetSurface, x: &Vec3, t: f64) -> Result<()> {
    let level = surface.level(x, t);
    let limit = EXCLUSION * surface.length_scale();
    if level.abs() <= limit {
        return Err(Error::TooCloseToSurface { level, limit });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    StrattonChu,
    StrattonChuElectricOnly,
    KottlerFranz,
}

/// `(n·Hʲ, λ̇Hʲ + n×Eʲ)`; both vanish exactly when the surface sources are
/// free of magnetic charge and current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryResidual {
    pub scalar: f64,
    pub vector: Vec3,
}

/// An exterior field, an interior field and the surface that glues them.
#[derive(Debug, Clone)]
pub struct HuygensScene {
    exterior: Arc<dyn AnalyticField>,
    interior: Arc<dyn AnalyticField>,
    surface: Arc<dyn LevelSetSurface>,
    order: QuadOrder,
    params: Vec<ParamNode>,
}

/// Samples of the source activity window used for geometry checks.
const GEOMETRY_SAMPLES: usize = 257;

impl HuygensScene {
    pub fn new(
        exterior: Arc<dyn AnalyticField>,
        interior: Arc<dyn AnalyticField>,
        surface: Arc<dyn LevelSetSurface>,
        order: QuadOrder,
    ) -> Result<Self> {
        let params = surface.parameter_nodes(order)?;
        check_source_side(exterior.as_ref(), surface.as_ref(), Side::Inside, "exterior")?;
        check_source_side(interior.as_ref(), surface.as_ref(), Side::Outside, "interior")?;
        Ok(Self {
            exterior,
            interior,
            surface,
            order,
            params,
        })
    }

    /// Same fields and surface at another quadrature order.
    pub fn with_order(&self, order: QuadOrder) -> Result<Self> {
        Ok(Self {
            params: self.surface.parameter_nodes(order)?,
            order,
            ..self.clone()
        })
    }

    pub fn order(&self) -> QuadOrder {
        self.order
    }

    pub fn surface(&self) -> &dyn LevelSetSurface {
        self.surface.as_ref()
    }

    pub fn exterior(&self) -> &dyn AnalyticField {
        self.exterior.as_ref()
    }

    pub fn interior(&self) -> &dyn AnalyticField {
        self.interior.as_ref()
    }

    pub fn parameter_nodes(&self) -> &[ParamNode] {
        &self.params
    }

    /// Quadrature nodes at time `t`.
    pub fn nodes(&self, t: f64) -> Vec<QuadNode> {
        self.params
            .iter()
            .map(|p| quad_node(self.surface.as_ref(), p, t))
            .collect()
    }

    fn check_on_surface(&self, x: &Vec3, t: f64) -> Result<()> {
        let level = self.surface.level(x, t);
        if level.abs() > ON_SURFACE * self.surface.length_scale() {
            return Err(Error::OffSurface { level });
        }
        Ok(())
    }

    fn jump_sample(&self, x: &Vec3, t: f64) -> Result<FieldSample> {
        Ok(self.exterior.sample(x, t)? - self.interior.sample(x, t)?)
    }

    /// `Fʲ = F − F'` at a surface point.
    pub fn jump_field(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        self.check_on_surface(x, t)?;
        Ok(self.jump_sample(x, t)?.value)
    }

    pub fn surface_densities(&self, node: &QuadNode, t: f64) -> Result<SurfaceDensitySample> {
        let jump = self.jump_field(&node.point, t)?;
        Ok(densities_from_jump(node, &jump))
    }

    pub fn boundary_residual(&self, node: &QuadNode, t: f64) -> Result<BoundaryResidual> {
        let jump = self.jump_field(&node.point, t)?;
        let e = real_part(&jump);
        let h = crate::imag_part(&jump);
        let n = &node.normal;
        Ok(BoundaryResidual {
            scalar: n.dot(&h),
            vector: h * node.lambda_dot + n.cross(&e),
        })
    }

    /// `Q = ∮ (σ_e + iσ_m) dS` at time `t`.
    pub fn total_charge(&self, t: f64) -> Result<C64> {
        let mut q = cre(0.0);
        for node in self.nodes(t) {
            q += self.surface_densities(&node, t)?.charge() * node.weight;
        }
        Ok(q)
    }

    pub fn potentials(&self, x: &Vec3, t: f64) -> Result<PotentialValue> {
        retarded_potentials(self.surface.as_ref(), &self.params, self, x, t, false)
    }

    pub fn stratton_chu(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        Ok(self.potentials(x, t)?.stratton_chu())
    }

    pub fn stratton_chu_electric_only(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        Ok(self.potentials(x, t)?.stratton_chu_electric())
    }

    pub fn kottler_franz(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        let p = retarded_potentials(self.surface.as_ref(), &self.params, self, x, t, true)?;
        p.kottler_franz()
            .ok_or_else(|| Error::Unsupported("antiderivative terms unavailable".into()))
    }

    pub fn reconstruct(&self, method: Method, x: &Vec3, t: f64) -> Result<CVec3> {
        match method {
            Method::StrattonChu => self.stratton_chu(x, t),
            Method::StrattonChuElectricOnly => self.stratton_chu_electric_only(x, t),
            Method::KottlerFranz => self.kottler_franz(x, t),
        }
    }

    /// Reconstructs at many targets in parallel; results keep input order.
    pub fn reconstruct_many(&self, method: Method, targets: &[(Vec3, f64)]) -> Vec<Result<CVec3>> {
        targets
            .par_iter()
            .map(|(x, t)| self.reconstruct(method, x, *t))
            .collect()
    }

    /// `χF + χ'F'`: the field the reconstructions must reproduce.
    pub fn glued_reference(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        let level = self.surface.level(x, t);
        let limit = ON_SURFACE * self.surface.length_scale();
        if level > limit {
            self.exterior.value(x, t)
        } else if level < -limit {
            self.interior.value(x, t)
        } else {
            Err(Error::TooCloseToSurface { level, limit })
        }
    }
}

impl SurfaceSource for HuygensScene {
    fn quiet_before(&self) -> f64 {
        self.exterior.onset().min(self.interior.onset())
    }

    fn density(&self, rn: &RetardedNode, with_integral: bool) -> Result<DensityJet> {
        let node = &rn.node;
        let (p, t) = (&node.point, rn.t_ret);
        let jump = self.jump_sample(p, t)?;
        let f = jump.value;
        let sdot = &node.velocity;
        let mut f_rate = jump.dt;
        if sdot.iter().any(|&c| c != 0.0) {
            let jac = self.exterior.jacobian(p, t)? - self.interior.jacobian(p, t)?;
            f_rate += jac * complexify(sdot);
        }
        let n = complexify(&node.normal);
        let ndot = complexify(&node.normal_rate);
        let drag_coeff = -node.lambda_dot;
        let drag_coeff_rate = node.normal_rate.dot(sdot) + node.normal.dot(&node.acceleration);

        let charge = n.dot(&f);
        let charge_rate = ndot.dot(&f) + n.dot(&f_rate);
        let current = n.cross(&f) * (-I) + f * cre(drag_coeff);
        let current_rate = (ndot.cross(&f) + n.cross(&f_rate)) * (-I)
            + f * cre(drag_coeff_rate)
            + f_rate * cre(drag_coeff);
        let current_integral = if with_integral {
            n.cross(&jump.dt_inv) * (-I)
        } else {
            CVec3::zeros()
        };
        Ok(DensityJet {
            charge,
            current,
            charge_rate,
            current_rate,
            current_integral,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Inside,
    Outside,
}

fn check_source_side(
    field: &dyn AnalyticField,
    surface: &dyn LevelSetSurface,
    side: Side,
    label: &str,
) -> Result<()> {
    let SourceSupport::Point { position, active } = field.source() else {
        return Ok(());
    };
    let (a, b) = active;
    let times: Vec<f64> = if surface.is_static() {
        vec![a.max(-1e300)]
    } else if a.is_finite() && b.is_finite() {
        (0..GEOMETRY_SAMPLES)
            .map(|k| a + (b - a) * k as f64 / (GEOMETRY_SAMPLES - 1) as f64)
            .collect()
    } else {
        return Err(Error::SourceGeometry(format!(
            "{label} field has an unbounded source activity window on a moving surface"
        )));
    };
    let margin = EXCLUSION * surface.length_scale();
    for t in times {
        let level = surface.level(&position, t);
        let ok = match side {
            Side::Inside => level < -margin,
            Side::Outside => level > margin,
        };
        if !ok {
            let want = match side {
                Side::Inside => "strictly inside",
                Side::Outside => "strictly outside",
            };
            return Err(Error::SourceGeometry(format!(
                "{label} field source at {position:?} must stay {want} the surface (level {level:e} at t = {t})"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{hann_pulse, hertzian_dipole, ZeroField};
    use crate::pauli::PauliNum;
    use crate::surfaces::{sphere_surface, Trajectory};
    use crate::{cnorm, imag_part};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dipole_at(p: Vec3) -> Arc<dyn AnalyticField> {
        let sig = Arc::new(hann_pulse(0.0, 2.0, 0.0).unwrap());
        Arc::new(hertzian_dipole(Vec3::new(0.0, 0.0, 1.0), sig, p).unwrap())
    }

    fn unit_sphere() -> Arc<dyn LevelSetSurface> {
        Arc::new(sphere_surface(Trajectory::Static(Vec3::zeros()), 1.0).unwrap())
    }

    fn scene(interior: Arc<dyn AnalyticField>) -> HuygensScene {
        HuygensScene::new(
            dipole_at(Vec3::new(0.3, 0.0, 0.0)),
            interior,
            unit_sphere(),
            QuadOrder::new(16, 32),
        )
        .unwrap()
    }

    fn node_with(normal: Vec3, lambda_dot: f64) -> QuadNode {
        QuadNode {
            u: 0.0,
            v: 0.0,
            point: normal,
            normal,
            weight: 1.0,
            lambda_dot,
            velocity: Vec3::zeros(),
            acceleration: Vec3::zeros(),
            normal_rate: Vec3::zeros(),
            weight_rate: 0.0,
        }
    }

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn densities_direct_substitution() {
        let node = node_with(Vec3::new(0.0, 0.0, 1.0), 0.0);
        let f = CVec3::new(c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0));
        let d = densities_from_jump(&node, &f);
        assert_eq!(d.sigma_e, 0.0);
        assert_eq!(d.sigma_m, 0.0);
        assert_eq!(d.k_e, Vec3::new(-1.0, 0.0, 0.0));
        assert_eq!(d.k_m, Vec3::new(0.0, -1.0, 0.0));
        assert_eq!(cnorm(&d.drag), 0.0);

        let d = densities_from_jump(&node, &CVec3::new(c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)));
        assert_eq!(d.sigma_e, 1.0);
        assert_eq!((d.sigma_m, d.k_e, d.k_m), (0.0, Vec3::zeros(), Vec3::zeros()));
    }

    #[test]
    fn densities_match_pauli_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let n = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                .normalize();
            let f = CVec3::from_fn(|_, _| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
            let d = densities_from_jump(&node_with(n, 0.0), &f);
            let nf = PauliNum::real_vector(&n) * PauliNum::vector(f);
            assert!((nf.s - d.charge()).norm() < 1e-13);
            // vector part of n Fʲ is i n×Fʲ = −K
            assert!(cnorm(&(nf.v + d.current())) < 1e-13);
        }
    }

    #[test]
    fn drag_parts() {
        let n = Vec3::new(0.0, 0.6, 0.8);
        let parallel = complexify(&n) * c(2.0, -1.0);
        let d = densities_from_jump(&node_with(n, 0.4), &parallel);
        let (tan, nor) = drag_decomposition(&d);
        assert!(cnorm(&tan) < 1e-15);
        assert!(cnorm(&(nor - d.drag)) < 1e-15);

        let perp = complexify(&Vec3::new(1.0, 0.0, 0.0)) * c(0.0, 3.0);
        let d = densities_from_jump(&node_with(n, 0.4), &perp);
        let (tan, nor) = drag_decomposition(&d);
        assert!(cnorm(&nor) < 1e-15);
        assert!(cnorm(&(tan - d.drag)) < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let n = Vec3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                .normalize();
            let f = CVec3::from_fn(|_, _| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)));
            let ld = rng.gen_range(-0.9..0.9);
            let d = densities_from_jump(&node_with(n, ld), &f);
            let (tan, nor) = drag_decomposition(&d);
            let nc = complexify(&n);
            let oracle_tan = nc.cross(&nc.cross(&f)) * cre(ld);
            let oracle_nor = nc * (nc.dot(&f) * (-ld));
            assert!(cnorm(&(tan + nor - f * cre(-ld))) < 1e-14);
            assert!(cnorm(&(tan - oracle_tan)) < 1e-14);
            assert!(cnorm(&(nor - oracle_nor)) < 1e-14);
            assert!(nc.dot(&tan).norm() < 1e-14);
        }
    }

    #[test]
    fn jump_field_cases() {
        let zero = scene(Arc::new(ZeroField));
        let p = Vec3::new(0.0, 0.6, 0.8);
        let t = 1.5;
        assert_eq!(zero.jump_field(&p, t).unwrap(), zero.exterior().value(&p, t).unwrap());
        assert_eq!(zero.jump_field(&p, -1.0).unwrap(), CVec3::zeros());
        assert!(matches!(zero.jump_field(&(p * 1.1), t), Err(Error::OffSurface { .. })));

        let same = HuygensScene::new(
            dipole_at(Vec3::new(0.3, 0.0, 0.0)),
            dipole_at(Vec3::new(0.3, 0.0, 0.0)),
            unit_sphere(),
            QuadOrder::new(8, 16),
        );
        // interior field with its source inside S is rejected
        assert!(matches!(same, Err(Error::SourceGeometry(_))));
    }

    #[test]
    fn rejects_sources_on_wrong_side() {
        let r = HuygensScene::new(
            dipole_at(Vec3::new(1.5, 0.0, 0.0)),
            Arc::new(ZeroField),
            unit_sphere(),
            QuadOrder::new(8, 16),
        );
        assert!(matches!(r, Err(Error::SourceGeometry(_))));
    }

    /// Prescribed density `σ ≡ 1`, `K ≡ 0`, constant in time.
    struct UniformCharge;

    impl SurfaceSource for UniformCharge {
        fn quiet_before(&self) -> f64 {
            f64::NEG_INFINITY
        }
        fn density(&self, _: &RetardedNode, _: bool) -> Result<DensityJet> {
            Ok(DensityJet {
                charge: cre(1.0),
                current: CVec3::zeros(),
                charge_rate: cre(0.0),
                current_rate: CVec3::zeros(),
                current_integral: CVec3::zeros(),
            })
        }
    }

    #[test]
    fn uniform_shell_potential() {
        let s = sphere_surface(Trajectory::Static(Vec3::zeros()), 1.0).unwrap();
        let params = s.parameter_nodes(QuadOrder::new(32, 64)).unwrap();
        for &x in &[Vec3::new(0.0, 0.0, 2.0), Vec3::new(1.2, -2.0, 0.5), Vec3::new(3.0, 1.0, 0.0)] {
            let p = retarded_potentials(&s, &params, &UniformCharge, &x, 0.0, false).unwrap();
            assert!((p.phi.re - 1.0 / x.norm()).abs() < 1e-10);
            // Coulomb field of the enclosed unit charge: −∇Φ = x̂ 4π/(4π|x|²)
            let e = -real_part(&p.grad_phi);
            assert!((e - x / x.norm().powi(3)).norm() < 1e-10);
        }
        for &x in &[Vec3::new(0.0, 0.0, 0.5), Vec3::new(0.1, -0.2, 0.3)] {
            let p = retarded_potentials(&s, &params, &UniformCharge, &x, 0.0, false).unwrap();
            assert!((p.phi.re - 1.0).abs() < 1e-8, "{}", p.phi.re);
            assert!(cnorm(&p.grad_phi) < 1e-8);
        }
    }

    #[test]
    fn zero_jump_gives_zero_everything() {
        let sig = Arc::new(hann_pulse(0.0, 2.0, 0.0).unwrap());
        let far = Arc::new(hertzian_dipole(Vec3::new(1.0, 0.0, 0.0), sig, Vec3::new(5.0, 0.0, 0.0)).unwrap());
        let s = HuygensScene::new(Arc::new(ZeroField), Arc::new(ZeroField), unit_sphere(), QuadOrder::new(8, 16))
            .unwrap();
        let x = Vec3::new(2.0, 0.0, 0.0);
        assert_eq!(s.stratton_chu(&x, 3.0).unwrap(), CVec3::zeros());
        assert_eq!(s.kottler_franz(&x, 3.0).unwrap(), CVec3::zeros());
        assert_eq!(s.stratton_chu_electric_only(&x, 3.0).unwrap(), CVec3::zeros());
        assert_eq!(s.total_charge(1.0).unwrap(), cre(0.0));

        // F' = F where both are the same sourceless-near-S field
        let same = HuygensScene::new(far.clone(), far, unit_sphere(), QuadOrder::new(8, 16));
        // exterior source must be inside: rejected
        assert!(same.is_err());
    }

    #[test]
    fn causal_before_first_arrival() {
        let s = scene(Arc::new(ZeroField));
        for &x in &[Vec3::new(2.0, 0.5, 0.0), Vec3::new(0.1, 0.1, 0.0)] {
            let t = (x - Vec3::new(0.3, 0.0, 0.0)).norm() - 1e-6;
            assert_eq!(s.stratton_chu(&x, t).unwrap(), CVec3::zeros());
            assert_eq!(s.kottler_franz(&x, t).unwrap(), CVec3::zeros());
            let p = s.potentials(&x, t).unwrap();
            assert_eq!(p.phi, cre(0.0));
        }
        assert_eq!(s.total_charge(0.69).unwrap(), cre(0.0));
    }

    #[test]
    fn electric_only_difference_is_magnetic_terms() {
        let s = scene(Arc::new(ZeroField));
        let x = Vec3::new(1.6, 0.4, -0.2);
        let t = 2.8;
        let p = s.potentials(&x, t).unwrap();
        let full = p.stratton_chu();
        let elec = p.stratton_chu_electric();
        let im = |v: &CVec3| complexify(&imag_part(v));
        // E: −∇×A_m ; H: −∇Φ_m − ∂_t A_m
        let magnetic = -im(&p.curl_a) + (-im(&p.grad_phi) - im(&p.dt_a)) * I;
        assert!(cnorm(&(full - elec - magnetic)) < 1e-14 * cnorm(&full).max(1.0));
    }

    #[test]
    fn boundary_residual_cases() {
        let s = scene(Arc::new(ZeroField));
        let t = 1.8;
        for node in s.nodes(t).iter().step_by(37) {
            let f = s.exterior().value(&node.point, t).unwrap();
            let br = s.boundary_residual(node, t).unwrap();
            assert_eq!(br.vector, node.normal.cross(&real_part(&f)));
            assert_eq!(br.scalar, node.normal.dot(&imag_part(&f)));
        }
    }

    #[test]
    fn exclusion_zone_and_glued_reference() {
        let s = scene(Arc::new(ZeroField));
        let on = Vec3::new(0.0, 0.0, 1.0);
        assert!(matches!(s.stratton_chu(&on, 2.0), Err(Error::TooCloseToSurface { .. })));
        assert!(s.glued_reference(&on, 2.0).is_err());
        let out = Vec3::new(0.0, 0.0, 2.0);
        assert_eq!(s.glued_reference(&out, 2.5).unwrap(), s.exterior().value(&out, 2.5).unwrap());
        assert_eq!(s.glued_reference(&Vec3::new(0.0, 0.0, 0.5), 2.5).unwrap(), CVec3::zeros());
    }

    #[test]
    fn moving_kottler_franz_is_unsupported() {
        let surf = Arc::new(
            sphere_surface(
                Trajectory::Uniform {
                    origin: Vec3::zeros(),
                    velocity: Vec3::new(0.1, 0.0, 0.0),
                },
                1.0,
            )
            .unwrap(),
        );
        let s = HuygensScene::new(dipole_at(Vec3::new(0.3, 0.0, 0.0)), Arc::new(ZeroField), surf, QuadOrder::new(8, 16))
            .unwrap();
        assert!(matches!(s.kottler_franz(&Vec3::new(3.0, 0.0, 0.0), 4.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn batch_matches_single_evaluation() {
        let s = scene(Arc::new(ZeroField));
        let targets: Vec<(Vec3, f64)> = (0..8)
            .map(|k| (Vec3::new(1.5 + 0.2 * k as f64, 0.3, 0.1), 2.0 + 0.3 * k as f64))
            .collect();
        let many = s.reconstruct_many(Method::StrattonChu, &targets);
        for ((x, t), r) in targets.iter().zip(many) {
            assert_eq!(r.unwrap(), s.stratton_chu(x, *t).unwrap());
        }
    }
}
