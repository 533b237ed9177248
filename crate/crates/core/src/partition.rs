//! Spacetime partitions into nested spherical cells.
//!
//! Interfaces `λ₀, λ₁, …` are nested spheres; cell `0` is inside `λ₀`, cell
//! `k` lies between `λ_{k−1}` and `λ_k`, and the last cell is unbounded. Each
//! cell carries its own sourceless field and the combined field is
//! `Σ χ_k F_k`. Its only sources sit on the interfaces and depend only on
//! the jumps `F_{k+1} − F_k`.
//!
//! The energy balance of the combined field holds in the weak sense
//!
//! ```text
//! −∬ (U φ̇ + S·∇φ) d³x dt = Σ_k ∫dt ∮_{λ_k} φ (λ̇ Uʲ + n·Sʲ) dS
//! ```
//!
//! for any test function `φ` whose support avoids the true field sources.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;

use crate::fields::{energy_momentum, lorentz_invariant, AnalyticField, SourceSupport};
use crate::huygens::{densities_from_jump, SurfaceDensitySample, ON_SURFACE};
use crate::quadrature::GaussLegendre;
use crate::surfaces::{quad_node, LevelSetSurface, QuadNode, QuadOrder, Sphere};
use crate::{CVec3, Error, Result, Vec3, C64};

#[derive(Debug, Clone)]
pub struct CellPartition {
    interfaces: Vec<Sphere>,
    fields: Vec<Arc<dyn AnalyticField>>,
}

impl CellPartition {
    /// `fields[k]` belongs to cell `k`; there must be one more field than
    /// interfaces. Nesting is checked at `t = 0`.
    pub fn new(interfaces: Vec<Sphere>, fields: Vec<Arc<dyn AnalyticField>>) -> Result<Self> {
        if fields.len() != interfaces.len() + 1 {
            return Err(Error::InvalidParameter(format!(
                "{} interfaces need {} cell fields, got {}",
                interfaces.len(),
                interfaces.len() + 1,
                fields.len()
            )));
        }
        let p = Self { interfaces, fields };
        p.check_nesting(0.0)?;
        Ok(p)
    }

    pub fn check_nesting(&self, t: f64) -> Result<()> {
        for (k, pair) in self.interfaces.windows(2).enumerate() {
            let gap = pair[1].radius() - pair[0].radius() - (pair[1].center(t) - pair[0].center(t)).norm();
            if !(gap > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "interface {k} is not strictly inside interface {} at t = {t}",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.fields.len()
    }

    pub fn interfaces(&self) -> &[Sphere] {
        &self.interfaces
    }

    pub fn field(&self, cell: usize) -> Result<&dyn AnalyticField> {
        self.fields
            .get(cell)
            .map(|f| f.as_ref())
            .ok_or(Error::IndexOutOfRange {
                index: cell,
                len: self.fields.len(),
            })
    }

    fn interface(&self, k: usize) -> Result<&Sphere> {
        self.interfaces.get(k).ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.interfaces.len(),
        })
    }

    /// Index of the cell containing `(x, t)`: the number of interfaces with
    /// `λ > 0`.
    pub fn cell_index(&self, x: &Vec3, t: f64) -> Result<usize> {
        let mut outside = 0;
        for (k, s) in self.interfaces.iter().enumerate() {
            let level = s.level(x, t);
            if level.abs() <= ON_SURFACE * s.radius() {
                return Err(Error::OnInterface { interface: k, level });
            }
            if level > 0.0 {
                outside += 1;
            }
        }
        Ok(outside)
    }

    /// `χ_k(x, t)` by sign tests.
    pub fn characteristic(&self, cell: usize, x: &Vec3, t: f64) -> Result<f64> {
        if cell >= self.n_cells() {
            return Err(Error::IndexOutOfRange {
                index: cell,
                len: self.n_cells(),
            });
        }
        let mut inside = true;
        for (k, s) in self.interfaces.iter().enumerate() {
            let level = s.level(x, t);
            if level.abs() <= ON_SURFACE * s.radius() {
                return Err(Error::OnInterface { interface: k, level });
            }
            // cell k: outside interfaces < k, inside interfaces ≥ k
            inside &= if k < cell { level > 0.0 } else { level < 0.0 };
        }
        Ok(if inside { 1.0 } else { 0.0 })
    }

    pub fn combined_field(&self, x: &Vec3, t: f64) -> Result<CVec3> {
        self.fields[self.cell_index(x, t)?].value(x, t)
    }

    fn check_on_interface(&self, k: usize, x: &Vec3, t: f64) -> Result<&Sphere> {
        let s = self.interface(k)?;
        let level = s.level(x, t);
        if level.abs() > ON_SURFACE * s.radius() {
            return Err(Error::OffSurface { level });
        }
        Ok(s)
    }

    /// `F_cell − F_other` across interface `k`, where `cell` is one of the
    /// two adjoining cells `k` and `k + 1`.
    pub fn cell_jump(&self, k: usize, cell: usize, x: &Vec3, t: f64) -> Result<CVec3> {
        self.check_on_interface(k, x, t)?;
        let other = match cell {
            c if c == k => k + 1,
            c if c == k + 1 => k,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "cell {cell} does not adjoin interface {k}"
                )))
            }
        };
        Ok(self.fields[cell].value(x, t)? - self.fields[other].value(x, t)?)
    }

    /// Jump `F_{k+1} − F_k` across interface `k` (outer minus inner).
    pub fn interface_jump(&self, k: usize, node: &QuadNode, t: f64) -> Result<CVec3> {
        self.cell_jump(k, k + 1, &node.point, t)
    }

    pub fn interface_nodes(&self, k: usize, t: f64, order: QuadOrder) -> Result<Vec<QuadNode>> {
        let s = self.interface(k)?;
        Ok(s.parameter_nodes(order)?.iter().map(|p| quad_node(s, p, t)).collect())
    }

    pub fn partition_source_sample(&self, k: usize, node: &QuadNode, t: f64) -> Result<SurfaceDensitySample> {
        let jump = self.interface_jump(k, node, t)?;
        Ok(densities_from_jump(node, &jump))
    }

    /// `(F·F, Σ χ_k F_k·F_k)` at an off-interface point.
    pub fn quadratic_partition_check(&self, x: &Vec3, t: f64) -> Result<(C64, C64)> {
        let lhs = lorentz_invariant(&self.combined_field(x, t)?);
        let mut rhs = C64::new(0.0, 0.0);
        for k in 0..self.n_cells() {
            let chi = self.characteristic(k, x, t)?;
            if chi != 0.0 {
                rhs += lorentz_invariant(&self.fields[k].value(x, t)?) * chi;
            }
        }
        Ok((lhs, rhs))
    }
}

/// Support box of a test function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox {
    pub lo: Vec3,
    pub hi: Vec3,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl SupportBox {
    pub fn contains(&self, x: &Vec3, t: f64) -> bool {
        (0..3).all(|i| x[i] > self.lo[i] && x[i] < self.hi[i]) && t > self.t_lo && t < self.t_hi
    }

    /// Parameter interval `[a, b]` of `o + r d` inside the box, if any.
    fn ray_interval(&self, o: &Vec3, d: &Vec3) -> Option<(f64, f64)> {
        let (mut a, mut b) = (0.0_f64, f64::INFINITY);
        for i in 0..3 {
            if d[i].abs() < 1e-300 {
                if o[i] <= self.lo[i] || o[i] >= self.hi[i] {
                    return None;
                }
                continue;
            }
            let r1 = (self.lo[i] - o[i]) / d[i];
            let r2 = (self.hi[i] - o[i]) / d[i];
            a = a.max(r1.min(r2));
            b = b.min(r1.max(r2));
        }
        (b > a).then_some((a, b))
    }
}

pub trait TestFunction4D: Send + Sync {
    fn value(&self, x: &Vec3, t: f64) -> f64;
    fn dt(&self, x: &Vec3, t: f64) -> f64;
    fn grad(&self, x: &Vec3, t: f64) -> Vec3;
    /// `φ` vanishes outside this box.
    fn support(&self) -> SupportBox;
}

/// `φ = Π (1 − s_i²)³` over the four scaled coordinates, zero outside
/// `|s_i| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyBump {
    pub center: Vec3,
    pub half_width: Vec3,
    pub t_center: f64,
    pub t_half_width: f64,
}

impl PolyBump {
    pub fn new(center: Vec3, half_width: Vec3, t_center: f64, t_half_width: f64) -> Result<Self> {
        if !(half_width.iter().all(|&h| h > 0.0) && t_half_width > 0.0) {
            return Err(Error::InvalidParameter("bump half-widths must be positive".into()));
        }
        Ok(Self {
            center,
            half_width,
            t_center,
            t_half_width,
        })
    }

    /// Scaled coordinates, or `None` outside the support.
    fn scaled(&self, x: &Vec3, t: f64) -> Option<[f64; 4]> {
        let s = [
            (x[0] - self.center[0]) / self.half_width[0],
            (x[1] - self.center[1]) / self.half_width[1],
            (x[2] - self.center[2]) / self.half_width[2],
            (t - self.t_center) / self.t_half_width,
        ];
        s.iter().all(|v| v.abs() < 1.0).then_some(s)
    }

    fn factors(s: &[f64; 4]) -> ([f64; 4], [f64; 4]) {
        let mut b = [0.0; 4];
        let mut db = [0.0; 4];
        for i in 0..4 {
            let q = 1.0 - s[i] * s[i];
            b[i] = q * q * q;
            db[i] = -6.0 * s[i] * q * q;
        }
        (b, db)
    }

    fn partial(&self, x: &Vec3, t: f64, axis: usize) -> f64 {
        let Some(s) = self.scaled(x, t) else { return 0.0 };
        let (b, db) = Self::factors(&s);
        let scale = if axis == 3 { self.t_half_width } else { self.half_width[axis] };
        (0..4).map(|i| if i == axis { db[i] } else { b[i] }).product::<f64>() / scale
    }
}

impl TestFunction4D for PolyBump {
    fn value(&self, x: &Vec3, t: f64) -> f64 {
        self.scaled(x, t).map_or(0.0, |s| Self::factors(&s).0.iter().product())
    }

    fn dt(&self, x: &Vec3, t: f64) -> f64 {
        self.partial(x, t, 3)
    }

    fn grad(&self, x: &Vec3, t: f64) -> Vec3 {
        Vec3::new(self.partial(x, t, 0), self.partial(x, t, 1), self.partial(x, t, 2))
    }

    fn support(&self) -> SupportBox {
        SupportBox {
            lo: self.center - self.half_width,
            hi: self.center + self.half_width,
            t_lo: self.t_center - self.t_half_width,
            t_hi: self.t_center + self.t_half_width,
        }
    }
}

/// Node counts for the weak energy balance.
///
/// Volume integrals use `n_t` Gauss nodes in time, `n_theta × n_phi`
/// directions about the innermost interface centre, and `n_r` Gauss nodes on
/// each radial piece between interface crossings and box faces. Interface
/// integrals use the sphere rule at `(n_theta, n_phi)` and the same time
/// nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PoyntingQuadrature {
    pub n_t: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_r: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoyntingBalance {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub floor: f64,
    /// `∫dt ∮ φ(λ̇Uʲ + n·Sʲ)` per interface.
    pub interface_terms: Vec<f64>,
    /// Oriented boundary terms per cell, built from each cell's own field.
    pub cell_terms: Vec<f64>,
}

/// Relative floor below which the balance is considered exact.
pub const POYNTING_FLOOR: f64 = 1e-8;

pub fn weak_poynting_balance(
    p: &CellPartition,
    phi: &dyn TestFunction4D,
    q: PoyntingQuadrature,
) -> Result<PoyntingBalance> {
    if q.n_t == 0 || q.n_r == 0 || q.n_theta < 2 || q.n_phi < 4 {
        return Err(Error::DegenerateQuadrature(format!("{q:?}")));
    }
    let sb = phi.support();
    check_sources(p, &sb)?;
    let gt = GaussLegendre::new(q.n_t)?;
    let gu = GaussLegendre::new(q.n_theta)?;
    let gr = GaussLegendre::new(q.n_r)?;
    let times: Vec<(f64, f64)> = gt.on_interval(sb.t_lo, sb.t_hi).collect();
    for &(t, _) in &times {
        p.check_nesting(t)?;
    }
    let order = QuadOrder::new(q.n_theta, q.n_phi);

    let per_time: Vec<Result<TimeSlice>> = times
        .par_iter()
        .map(|&(t, _)| time_slice(p, phi, &sb, t, &gu, q.n_phi, &gr, order))
        .collect();

    let mut lhs = 0.0;
    let mut scale = 0.0;
    let mut interface_terms = vec![0.0; p.interfaces.len()];
    let mut cell_terms = vec![0.0; p.n_cells()];
    for (&(_, wt), slice) in times.iter().zip(per_time) {
        let slice = slice?;
        lhs += wt * slice.volume;
        scale += wt * slice.volume_abs;
        for (acc, v) in interface_terms.iter_mut().zip(&slice.interfaces) {
            *acc += wt * v;
        }
        for (acc, v) in cell_terms.iter_mut().zip(&slice.cells) {
            *acc += wt * v;
        }
    }
    let rhs: f64 = interface_terms.iter().sum();
    let floor = POYNTING_FLOOR * scale;
    let residual = (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(floor).max(f64::MIN_POSITIVE);
    Ok(PoyntingBalance {
        lhs,
        rhs,
        residual,
        floor,
        interface_terms,
        cell_terms,
    })
}

fn check_sources(p: &CellPartition, sb: &SupportBox) -> Result<()> {
    for (k, f) in p.fields.iter().enumerate() {
        if let SourceSupport::Point { position, active } = f.source() {
            let inside = (0..3).all(|i| position[i] >= sb.lo[i] && position[i] <= sb.hi[i]);
            let overlaps = active.0 <= sb.t_hi && active.1 >= sb.t_lo;
            if inside && overlaps {
                return Err(Error::SourceGeometry(format!(
                    "test function support contains the source of cell {k} at {position:?}"
                )));
            }
        }
    }
    Ok(())
}

struct TimeSlice {
    volume: f64,
    volume_abs: f64,
    interfaces: Vec<f64>,
    cells: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn time_slice(
    p: &CellPartition,
    phi: &dyn TestFunction4D,
    sb: &SupportBox,
    t: f64,
    gu: &GaussLegendre,
    n_phi: usize,
    gr: &GaussLegendre,
    order: QuadOrder,
) -> Result<TimeSlice> {
    let origin = match p.interfaces.first() {
        Some(s) => s.center(t),
        None => (sb.lo + sb.hi) * 0.5,
    };
    let dphi = 2.0 * PI / n_phi as f64;
    let mut volume = 0.0;
    let mut volume_abs = 0.0;
    for k in 0..n_phi {
        let (sv, cv) = ((k as f64 + 0.5) * dphi).sin_cos();
        for (u, wu) in gu.on_interval(-1.0, 1.0) {
            let st = (1.0 - u * u).sqrt();
            let d = Vec3::new(st * cv, st * sv, u);
            let Some((a, b)) = sb.ray_interval(&origin, &d) else { continue };
            let (v, va) = ray_integral(p, phi, &origin, &d, a, b, t, gr)?;
            volume += wu * dphi * v;
            volume_abs += wu * dphi * va;
        }
    }

    let mut interfaces = vec![0.0; p.interfaces.len()];
    let mut cells = vec![0.0; p.n_cells()];
    for (k, s) in p.interfaces.iter().enumerate() {
        for param in s.parameter_nodes(order)? {
            let node = quad_node(s, &param, t);
            let w = phi.value(&node.point, t);
            if w == 0.0 {
                continue;
            }
            let flux = |f: &CVec3| {
                let em = energy_momentum(f);
                node.lambda_dot * em.u + node.normal.dot(&em.s)
            };
            let inner = p.fields[k].value(&node.point, t)?;
            let outer = p.fields[k + 1].value(&node.point, t)?;
            interfaces[k] += node.weight * w * (flux(&outer) - flux(&inner));
            // interface k is the outer boundary of cell k and the inner
            // boundary of cell k + 1
            cells[k] -= node.weight * w * flux(&inner);
            cells[k + 1] += node.weight * w * flux(&outer);
        }
    }
    Ok(TimeSlice {
        volume,
        volume_abs,
        interfaces,
        cells,
    })
}

/// `−∫ r² (U φ̇ + S·∇φ) dr` along `origin + r d` for `r ∈ [a, b]`, split at
/// interface crossings, and the matching integral of absolute values.
#[allow(clippy::too_many_arguments)]
fn ray_integral(
    p: &CellPartition,
    phi: &dyn TestFunction4D,
    origin: &Vec3,
    d: &Vec3,
    a: f64,
    b: f64,
    t: f64,
    gr: &GaussLegendre,
) -> Result<(f64, f64)> {
    // the origin lies inside every interface, so each is crossed once
    let mut crossings = Vec::with_capacity(p.interfaces.len());
    for s in &p.interfaces {
        let oc = origin - s.center(t);
        let bq = oc.dot(d);
        let disc = bq * bq - (oc.norm_squared() - s.radius() * s.radius());
        crossings.push(-bq + disc.max(0.0).sqrt());
    }
    if crossings.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("interfaces are not nested along a ray".into()));
    }
    let mut breaks = vec![a];
    let mut cells = vec![];
    let mut cell = crossings.iter().filter(|&&r| r <= a).count();
    for &r in &crossings {
        if r > a && r < b {
            breaks.push(r);
            cells.push(cell);
            cell += 1;
        }
    }
    breaks.push(b);
    cells.push(cell);

    let mut total = 0.0;
    let mut total_abs = 0.0;
    for (seg, &c) in cells.iter().enumerate() {
        let field = p.fields[c].as_ref();
        for (r, w) in gr.on_interval(breaks[seg], breaks[seg + 1]) {
            let x = origin + d * r;
            let em = energy_momentum(&field.value(&x, t)?);
            let a1 = em.u * phi.dt(&x, t);
            let a2 = em.s.dot(&phi.grad(&x, t));
            total -= w * r * r * (a1 + a2);
            total_abs += w * r * r * (a1.abs() + a2.abs());
        }
    }
    Ok((total, total_abs))
}
