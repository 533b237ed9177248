//! Scenario files: JSON, one scenario per file, unknown keys rejected.

use std::sync::Arc;

use emhuygens::fields::{hann_pulse, hertzian_dipole, AnalyticField, ZeroField};
use emhuygens::huygens::{HuygensScene, Method, EXCLUSION};
use emhuygens::partition::{CellPartition, PolyBump, PoyntingQuadrature};
use emhuygens::surfaces::{sphere_surface, LevelSetSurface, QuadOrder, Sphere, Trajectory};
use emhuygens::Vec3;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub exterior: ExteriorSpec,
    #[serde(default)]
    pub interior: InteriorSpec,
    pub surface: SurfaceSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub method: MethodSpec,
    #[serde(default)]
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge: Option<ChargeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    pub t0: f64,
    pub width: f64,
    #[serde(default)]
    pub carrier: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DipoleSpec {
    /// Unit dipole direction.
    pub direction: [f64; 3],
    pub position: [f64; 3],
    pub pulse: PulseSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExteriorSpec {
    Zero,
    Dipole(DipoleSpec),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteriorSpec {
    #[default]
    Zero,
    DipoleOutside(DipoleSpec),
    SameAsExterior,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySpec {
    Static {
        #[serde(default)]
        center: [f64; 3],
    },
    Uniform {
        origin: [f64; 3],
        velocity: [f64; 3],
    },
    Circular {
        center: [f64; 3],
        radius: f64,
        angular_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub radius: f64,
    pub trajectory: TrajectorySpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { n_theta: 32, n_phi: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub plane: Plane,
    /// Coordinate along the plane normal.
    #[serde(default)]
    pub offset: f64,
    pub u_range: [f64; 2],
    pub v_range: [f64; 2],
    pub resolution: [usize; 2],
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MethodSpec {
    #[default]
    Sc,
    Kf,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Diagnostics {
    /// Adds the electric-potential-only Stratton-Chu columns.
    #[serde(default)]
    pub electric_only: bool,
    /// Appends surface boundary-residual maxima as trailer lines.
    #[serde(default)]
    pub boundary_residual: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: [f64; 3],
    pub half_width: [f64; 3],
    pub t_center: f64,
    pub t_half_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoyntingQuadratureSpec {
    pub n_t: usize,
    pub n_theta: usize,
    pub n_phi: usize,
    pub n_r: usize,
}

impl Default for PoyntingQuadratureSpec {
    fn default() -> Self {
        Self {
            n_t: 24,
            n_theta: 64,
            n_phi: 128,
            n_r: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    /// Use the exterior field alone, with no interface.
    #[serde(default)]
    pub single_cell: bool,
    pub bump: BumpSpec,
    #[serde(default)]
    pub quadrature: PoyntingQuadratureSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeSpec {
    pub t_start: f64,
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

fn default_samples() -> usize {
    50
}

fn default_fd_step() -> f64 {
    1e-3
}

fn v3(a: &[f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

fn config(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| config(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Single-line canonical form, echoed into output headers.
    pub fn canonical(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let surface = self.sphere()?;
        if self.quadrature.n_theta < 2 || self.quadrature.n_phi < 4 {
            return Err(config("quadrature: need n_theta >= 2 and n_phi >= 4"));
        }
        if let (ExteriorSpec::Dipole(_), InteriorSpec::SameAsExterior) = (&self.exterior, &self.interior) {
            return Err(config(
                "interior.kind: same_as_exterior needs an exterior field without sources inside the surface",
            ));
        }
        if !surface.is_static() && self.method != MethodSpec::Sc {
            return Err(config("method: Kottler-Franz is only available for static surfaces"));
        }
        // builds and checks source geometry
        self.scene()?;
        if let Some(g) = &self.grid {
            self.validate_grid(g, &surface)?;
        }
        if let Some(c) = &self.charge {
            if !(c.t_end > c.t_start) || c.samples == 0 || !(c.fd_step > 0.0) {
                return Err(config("charge: need t_end > t_start, samples >= 1, fd_step > 0"));
            }
        }
        if let Some(p) = &self.partition {
            self.bump(p)?;
        }
        Ok(())
    }

    fn validate_grid(&self, g: &GridSpec, surface: &Sphere) -> Result<(), CliError> {
        if g.resolution[0] == 0 || g.resolution[1] == 0 {
            return Err(config("grid.resolution: both counts must be >= 1"));
        }
        if g.times.is_empty() {
            return Err(config("grid.times: at least one time is required"));
        }
        let limit = EXCLUSION * surface.radius();
        for (x, t) in grid_targets(g) {
            let level = surface.level(&x, t);
            if level.abs() <= limit {
                return Err(config(format!(
                    "grid: point ({}, {}, {}) at t = {t} lies within {limit:e} of the surface",
                    x[0], x[1], x[2]
                )));
            }
        }
        Ok(())
    }

    pub fn trajectory(&self) -> Trajectory {
        match &self.surface.trajectory {
            TrajectorySpec::Static { center } => Trajectory::Static(v3(center)),
            TrajectorySpec::Uniform { origin, velocity } => Trajectory::Uniform {
                origin: v3(origin),
                velocity: v3(velocity),
            },
            TrajectorySpec::Circular {
                center,
                radius,
                angular_rate,
            } => Trajectory::Circular {
                center: v3(center),
                radius: *radius,
                angular_rate: *angular_rate,
            },
        }
    }

    pub fn sphere(&self) -> Result<Sphere, CliError> {
        sphere_surface(self.trajectory(), self.surface.radius).map_err(|e| config(format!("surface: {e}")))
    }

    pub fn order(&self) -> QuadOrder {
        QuadOrder::new(self.quadrature.n_theta, self.quadrature.n_phi)
    }

    fn dipole(spec: &DipoleSpec, label: &str) -> Result<Arc<dyn AnalyticField>, CliError> {
        let p = &spec.pulse;
        let sig = hann_pulse(p.t0, p.width, p.carrier).map_err(|e| config(format!("{label}.pulse: {e}")))?;
        let d = hertzian_dipole(v3(&spec.direction), Arc::new(sig), v3(&spec.position))
            .map_err(|e| config(format!("{label}: {e}")))?;
        Ok(Arc::new(d))
    }

    pub fn exterior_field(&self) -> Result<Arc<dyn AnalyticField>, CliError> {
        match &self.exterior {
            ExteriorSpec::Zero => Ok(Arc::new(ZeroField)),
            ExteriorSpec::Dipole(d) => Self::dipole(d, "exterior"),
        }
    }

    pub fn interior_field(&self) -> Result<Arc<dyn AnalyticField>, CliError> {
        match &self.interior {
            InteriorSpec::Zero => Ok(Arc::new(ZeroField)),
            InteriorSpec::DipoleOutside(d) => Self::dipole(d, "interior"),
            InteriorSpec::SameAsExterior => self.exterior_field(),
        }
    }

    pub fn scene(&self) -> Result<HuygensScene, CliError> {
        HuygensScene::new(
            self.exterior_field()?,
            self.interior_field()?,
            Arc::new(self.sphere()?),
            self.order(),
        )
        .map_err(|e| config(format!("scene: {e}")))
    }

    pub fn methods(&self) -> Vec<(&'static str, Method)> {
        let mut m = match self.method {
            MethodSpec::Sc => vec![("sc", Method::StrattonChu)],
            MethodSpec::Kf => vec![("kf", Method::KottlerFranz)],
            MethodSpec::Both => vec![("sc", Method::StrattonChu), ("kf", Method::KottlerFranz)],
        };
        if self.diagnostics.electric_only {
            m.push(("sce", Method::StrattonChuElectricOnly));
        }
        m
    }

    pub fn partition(&self) -> Result<CellPartition, CliError> {
        let spec = self
            .partition
            .as_ref()
            .ok_or_else(|| config("partition: section required for the poynting command"))?;
        let p = if spec.single_cell {
            CellPartition::new(vec![], vec![self.exterior_field()?])
        } else {
            CellPartition::new(vec![self.sphere()?], vec![self.interior_field()?, self.exterior_field()?])
        };
        p.map_err(|e| config(format!("partition: {e}")))
    }

    pub fn bump(&self, spec: &PartitionSpec) -> Result<PolyBump, CliError> {
        let b = &spec.bump;
        PolyBump::new(v3(&b.center), v3(&b.half_width), b.t_center, b.t_half_width)
            .map_err(|e| config(format!("partition.bump: {e}")))
    }

    pub fn poynting_quadrature(spec: &PartitionSpec) -> PoyntingQuadrature {
        let q = spec.quadrature;
        PoyntingQuadrature {
            n_t: q.n_t,
            n_theta: q.n_theta,
            n_phi: q.n_phi,
            n_r: q.n_r,
        }
    }
}

/// Grid points in row order: time, then `v`, then `u`.
pub fn grid_targets(g: &GridSpec) -> Vec<(Vec3, f64)> {
    let axis = |range: &[f64; 2], n: usize, k: usize| {
        if n == 1 {
            0.5 * (range[0] + range[1])
        } else {
            range[0] + (range[1] - range[0]) * k as f64 / (n - 1) as f64
        }
    };
    let mut out = Vec::with_capacity(g.times.len() * g.resolution[0] * g.resolution[1]);
    for &t in &g.times {
        for j in 0..g.resolution[1] {
            for i in 0..g.resolution[0] {
                let u = axis(&g.u_range, g.resolution[0], i);
                let v = axis(&g.v_range, g.resolution[1], j);
                let x = match g.plane {
                    Plane::Xy => Vec3::new(u, v, g.offset),
                    Plane::Xz => Vec3::new(u, g.offset, v),
                    Plane::Yz => Vec3::new(g.offset, u, v),
                };
                out.push((x, t));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "exterior": {"kind": "dipole", "direction": [0, 0, 1], "position": [0.3, 0, 0],
                     "pulse": {"t0": 0, "width": 2}},
        "surface": {"radius": 1, "trajectory": {"kind": "static"}},
        "grid": {"plane": "xz", "u_range": [-3, 3], "v_range": [-3, 3], "resolution": [4, 4],
                 "times": [3.0]}
    }"#;

    #[test]
    fn parses_with_defaults() {
        let s = Scenario::parse(BASE).unwrap();
        assert_eq!(s.interior, InteriorSpec::Zero);
        assert_eq!(s.quadrature, QuadratureSpec::default());
        assert_eq!(s.method, MethodSpec::Sc);
        assert_eq!(Scenario::parse(&s.canonical()).unwrap(), s);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let typo = BASE.replace("\"plane\"", "\"plain\"");
        let e = Scenario::parse(&typo).unwrap_err().to_string();
        assert!(e.contains("plain") && e.contains("line"), "{e}");
        let nested = BASE.replace("\"width\": 2", "\"width\": 2, \"widht\": 3");
        assert!(Scenario::parse(&nested).is_err());
    }

    #[test]
    fn rejects_bad_physics() {
        let fast = BASE.replace(
            r#"{"kind": "static"}"#,
            r#"{"kind": "uniform", "origin": [0,0,0], "velocity": [1.2, 0, 0]}"#,
        );
        assert!(Scenario::parse(&fast).unwrap_err().to_string().contains("subluminal"));
        let outside = BASE.replace("[0.3, 0, 0]", "[1.3, 0, 0]");
        assert!(Scenario::parse(&outside).is_err());
        let on_surface = BASE.replace("\"resolution\": [4, 4]", "\"resolution\": [3, 3]").replace(
            "\"u_range\": [-3, 3], \"v_range\": [-3, 3]",
            "\"u_range\": [-1, 1], \"v_range\": [-1, 1]",
        );
        assert!(Scenario::parse(&on_surface).unwrap_err().to_string().contains("within"));
        let kf_moving = fast.replace("1.2", "0.2").replace("\"surface\"", "\"method\": \"kf\", \"surface\"");
        assert!(Scenario::parse(&kf_moving).unwrap_err().to_string().contains("static"));
    }

    #[test]
    fn grid_order_and_planes() {
        let g = GridSpec {
            plane: Plane::Yz,
            offset: 0.5,
            u_range: [0.0, 1.0],
            v_range: [2.0, 3.0],
            resolution: [2, 3],
            times: vec![1.0, 2.0],
        };
        let pts = grid_targets(&g);
        assert_eq!(pts.len(), 12);
        assert_eq!(pts[0], (Vec3::new(0.5, 0.0, 2.0), 1.0));
        assert_eq!(pts[1], (Vec3::new(0.5, 1.0, 2.0), 1.0));
        assert_eq!(pts[2], (Vec3::new(0.5, 0.0, 2.5), 1.0));
        assert_eq!(pts[6].1, 2.0);
    }
}
