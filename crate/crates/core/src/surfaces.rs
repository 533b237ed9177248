//! Closed surfaces described by a level set `λ(x, t)`.
//!
//! `λ > 0` outside, `λ < 0` inside, `λ = 0` on the surface and `|∇λ| = 1`
//! there, so `n = ∇λ` is the outward unit normal. Each surface also carries a
//! parametric chart `s(u, v, t)` used to place quadrature nodes; for moving
//! surfaces every node keeps its chart parameters and is followed in time.

use std::f64::consts::PI;
use std::fmt::Debug;

use crate::quadrature::GaussLegendre;
use crate::{Error, Result, Vec3};

/// Centre trajectory of a rigid surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Trajectory {
    Static(Vec3),
    /// `c(t) = origin + velocity · t`
    Uniform { origin: Vec3, velocity: Vec3 },
    /// `c(t) = center + radius (cos ωt, sin ωt, 0)`
    Circular {
        center: Vec3,
        radius: f64,
        angular_rate: f64,
    },
}

impl Trajectory {
    pub fn position(&self, t: f64) -> Vec3 {
        match *self {
            Trajectory::Static(c) => c,
            Trajectory::Uniform { origin, velocity } => origin + velocity * t,
            Trajectory::Circular {
                center,
                radius,
                angular_rate,
            } => {
                let (s, c) = (angular_rate * t).sin_cos();
                center + Vec3::new(radius * c, radius * s, 0.0)
            }
        }
    }

    pub fn velocity(&self, t: f64) -> Vec3 {
        match *self {
            Trajectory::Static(_) => Vec3::zeros(),
            Trajectory::Uniform { velocity, .. } => velocity,
            Trajectory::Circular {
                radius,
                angular_rate,
                ..
            } => {
                let (s, c) = (angular_rate * t).sin_cos();
                Vec3::new(-radius * angular_rate * s, radius * angular_rate * c, 0.0)
            }
        }
    }

    pub fn acceleration(&self, t: f64) -> Vec3 {
        match *self {
            Trajectory::Static(_) | Trajectory::Uniform { .. } => Vec3::zeros(),
            Trajectory::Circular {
                radius,
                angular_rate,
                ..
            } => {
                let (s, c) = (angular_rate * t).sin_cos();
                let w2 = angular_rate * angular_rate;
                Vec3::new(-radius * w2 * c, -radius * w2 * s, 0.0)
            }
        }
    }

    /// Supremum of `|ċ(t)|` over all time.
    pub fn max_speed(&self) -> f64 {
        match *self {
            Trajectory::Static(_) => 0.0,
            Trajectory::Uniform { velocity, .. } => velocity.norm(),
            Trajectory::Circular {
                radius,
                angular_rate,
                ..
            } => (radius * angular_rate).abs(),
        }
    }
}

/// Chart data at fixed parameters `(u, v)` and time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub point: Vec3,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub normal: Vec3,
    pub normal_rate: Vec3,
    /// Area per unit parameter area, `dS = J du dv`.
    pub area_density: f64,
    pub area_rate: f64,
}

/// Quadrature point in parameter space; `weight` multiplies `J du dv`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamNode {
    pub u: f64,
    pub v: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadOrder {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl QuadOrder {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        Self { n_theta, n_phi }
    }
}

/// A surface quadrature node at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadNode {
    pub u: f64,
    pub v: f64,
    pub point: Vec3,
    pub normal: Vec3,
    /// Area measure `dS` carried by the node.
    pub weight: f64,
    pub lambda_dot: f64,
    pub velocity: Vec3,
    pub acceleration: Vec3,
    pub normal_rate: Vec3,
    pub weight_rate: f64,
}

pub trait LevelSetSurface: Send + Sync + Debug {
    fn level(&self, x: &Vec3, t: f64) -> f64;
    fn gradient(&self, x: &Vec3, t: f64) -> Vec3;
    /// `∂_t λ` at fixed `x`.
    fn level_rate(&self, x: &Vec3, t: f64) -> f64;
    fn chart(&self, u: f64, v: f64, t: f64) -> ChartPoint;
    fn parameter_nodes(&self, order: QuadOrder) -> Result<Vec<ParamNode>>;
    /// Supremum of the chart speed over parameters and time; must be `< 1`.
    fn max_speed(&self) -> f64;
    /// True when the chart does not depend on time at all.
    fn is_static(&self) -> bool;
    /// Characteristic size, used to scale tolerances.
    fn length_scale(&self) -> f64;
}

/// Sphere of fixed radius whose centre follows a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    center: Trajectory,
    radius: f64,
}

pub fn sphere_surface(center: Trajectory, radius: f64) -> Result<Sphere> {
    Sphere::new(center, radius)
}

impl Sphere {
    pub fn new(center: Trajectory, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("sphere radius must be positive, got {radius}")));
        }
        let speed = center.max_speed();
        if !(speed < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "centre trajectory must be subluminal (max speed {speed})"
            )));
        }
        Ok(Self { center, radius })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.center
    }

    pub fn center(&self, t: f64) -> Vec3 {
        self.center.position(t)
    }
}

fn sphere_normal(u: f64, v: f64) -> Vec3 {
    let s = (1.0 - u * u).max(0.0).sqrt();
    let (sv, cv) = v.sin_cos();
    Vec3::new(s * cv, s * sv, u)
}

impl LevelSetSurface for Sphere {
    fn level(&self, x: &Vec3, t: f64) -> f64 {
        (x - self.center.position(t)).norm() - self.radius
    }

    fn gradient(&self, x: &Vec3, t: f64) -> Vec3 {
        let d = x - self.center.position(t);
        let n = d.norm();
        if n == 0.0 {
            Vec3::zeros()
        } else {
            d / n
        }
    }

    fn level_rate(&self, x: &Vec3, t: f64) -> f64 {
        -self.gradient(x, t).dot(&self.center.velocity(t))
    }

    /// `u = cos θ`, `v = φ`, with `J = R²`.
    fn chart(&self, u: f64, v: f64, t: f64) -> ChartPoint {
        let normal = sphere_normal(u, v);
        ChartPoint {
            point: self.center.position(t) + normal * self.radius,
            velocity: self.center.velocity(t),
            acceleration: self.center.acceleration(t),
            normal,
            normal_rate: Vec3::zeros(),
            area_density: self.radius * self.radius,
            area_rate: 0.0,
        }
    }

    /// Gauss-Legendre in `cos θ` times the trapezoid rule in `φ`.
    fn parameter_nodes(&self, order: QuadOrder) -> Result<Vec<ParamNode>> {
        if order.n_theta < 2 || order.n_phi < 4 {
            return Err(Error::DegenerateQuadrature(format!(
                "sphere quadrature needs n_theta >= 2 and n_phi >= 4, got ({}, {})",
                order.n_theta, order.n_phi
            )));
        }
        let gl = GaussLegendre::new(order.n_theta)?;
        let dphi = 2.0 * PI / order.n_phi as f64;
        let mut nodes = Vec::with_capacity(order.n_theta * order.n_phi);
        for (&u, &w) in gl.nodes.iter().zip(&gl.weights) {
            for k in 0..order.n_phi {
                nodes.push(ParamNode {
                    u,
                    v: (k as f64 + 0.5) * dphi,
                    weight: w * dphi,
                });
            }
        }
        Ok(nodes)
    }

    fn max_speed(&self) -> f64 {
        self.center.max_speed()
    }

    fn is_static(&self) -> bool {
        matches!(self.center, Trajectory::Static(_))
    }

    fn length_scale(&self) -> f64 {
        self.radius
    }
}

/// Evaluates one parameter node at time `t`.
pub fn quad_node(surface: &dyn LevelSetSurface, param: &ParamNode, t: f64) -> QuadNode {
    node_from_chart(surface, param, &surface.chart(param.u, param.v, t), t)
}

fn node_from_chart(
    surface: &dyn LevelSetSurface,
    param: &ParamNode,
    cp: &ChartPoint,
    t: f64,
) -> QuadNode {
    let lambda_dot = if surface.is_static() {
        0.0
    } else {
        surface.level_rate(&cp.point, t)
    };
    QuadNode {
        u: param.u,
        v: param.v,
        point: cp.point,
        normal: cp.normal,
        weight: param.weight * cp.area_density,
        lambda_dot,
        velocity: cp.velocity,
        acceleration: cp.acceleration,
        normal_rate: cp.normal_rate,
        weight_rate: param.weight * cp.area_rate,
    }
}

pub fn quad_nodes(surface: &dyn LevelSetSurface, t: f64, order: QuadOrder) -> Result<Vec<QuadNode>> {
    Ok(surface
        .parameter_nodes(order)?
        .iter()
        .map(|p| quad_node(surface, p, t))
        .collect())
}

/// A node evaluated at the retarded time seen from a target `(x, t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RetardedNode {
    pub node: QuadNode,
    pub t_ret: f64,
    /// `|x − s(t_ret)|`
    pub r: f64,
    /// `(x − s(t_ret)) / r`
    pub rhat: Vec3,
    /// `1 − r̂·ṡ(t_ret)`
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootMethod {
    Newton,
    Bisection,
}

pub const RETARDED_TOLERANCE: f64 = 1e-13;
const NEWTON_MAX_ITERATIONS: usize = 50;
const MIN_RETARDED_DISTANCE: f64 = 1e-12;

fn retarded_residual(surface: &dyn LevelSetSurface, x: &Vec3, t: f64, u: f64, v: f64, tau: f64) -> f64 {
    tau + (x - surface.chart(u, v, tau).point).norm() - t
}

/// Solves `τ + |x − s(u, v, τ)| = t` for the emission time `τ`.
pub fn solve_retarded_time(
    surface: &dyn LevelSetSurface,
    x: &Vec3,
    t: f64,
    u: f64,
    v: f64,
    method: RootMethod,
) -> Result<f64> {
    if surface.is_static() {
        return Ok(t - (x - surface.chart(u, v, t).point).norm());
    }
    if method == RootMethod::Newton {
        let mut tau = t - (x - surface.chart(u, v, t).point).norm();
        for _ in 0..NEWTON_MAX_ITERATIONS {
            let cp = surface.chart(u, v, tau);
            let y = x - cp.point;
            let r = y.norm();
            let h = tau + r - t;
            if h.abs() <= RETARDED_TOLERANCE {
                return Ok(tau);
            }
            if r < MIN_RETARDED_DISTANCE {
                break;
            }
            let kappa = 1.0 - y.dot(&cp.velocity) / r;
            tau -= h / kappa;
        }
    }
    bisect_retarded_time(surface, x, t, u, v)
}

fn bisect_retarded_time(surface: &dyn LevelSetSurface, x: &Vec3, t: f64, u: f64, v: f64) -> Result<f64> {
    let h = |tau: f64| retarded_residual(surface, x, t, u, v, tau);
    // h is strictly increasing (slope κ ≥ 1 − v_max > 0) and h(t) ≥ 0.
    let mut hi = t;
    let first = h(hi);
    if first == 0.0 {
        return Ok(hi);
    }
    let vmax = surface.max_speed();
    let mut span = first / (1.0 - vmax).max(1e-3) + 1e-6;
    let mut lo = t - span;
    let mut tries = 0;
    while h(lo) > 0.0 {
        span *= 2.0;
        lo = t - span;
        tries += 1;
        if tries > 64 {
            return Err(Error::RetardedTimeNonConvergence { residual: h(lo) });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm.abs() <= 0.25 * RETARDED_TOLERANCE {
            return Ok(mid);
        }
        if hm > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (hl, hh) = (h(lo), h(hi));
    let best = if hl.abs() < hh.abs() { lo } else { hi };
    let residual = hl.abs().min(hh.abs());
    if residual <= 10.0 * RETARDED_TOLERANCE {
        Ok(best)
    } else {
        Err(Error::RetardedTimeNonConvergence { residual })
    }
}

/// Retarded node for the target `(x, t)`. Static surfaces use `t − r` and
/// `κ = 1` directly.
pub fn retarded_time(
    surface: &dyn LevelSetSurface,
    x: &Vec3,
    t: f64,
    param: &ParamNode,
) -> Result<RetardedNode> {
    let t_ret = solve_retarded_time(surface, x, t, param.u, param.v, RootMethod::Newton)?;
    let cp = surface.chart(param.u, param.v, t_ret);
    let y = x - cp.point;
    let r = y.norm();
    if r < MIN_RETARDED_DISTANCE {
        return Err(Error::TooCloseToSurface {
            level: r,
            limit: MIN_RETARDED_DISTANCE,
        });
    }
    let rhat = y / r;
    let kappa = 1.0 - rhat.dot(&cp.velocity);
    Ok(RetardedNode {
        node: node_from_chart(surface, param, &cp, t_ret),
        t_ret,
        r,
        rhat,
        kappa,
    })
}
