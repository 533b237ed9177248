//! Causal scalar waveforms.

use std::f64::consts::PI;
use std::fmt::Debug;

use crate::quadrature::GaussLegendre;
use crate::{Error, Result};

/// A scalar waveform `f(t)` that vanishes identically for `t ≤ onset()`.
pub trait Signature: Send + Sync + Debug {
    fn onset(&self) -> f64;

    /// `f ≡ 0` for `t ≥ support_end()`; `f64::INFINITY` if unbounded.
    fn support_end(&self) -> f64;

    /// `[f, f', f'', f''']` at `t`.
    fn derivatives(&self, t: f64) -> [f64; 4];

    /// `∫_{onset}^t f`.
    fn antiderivative(&self, t: f64) -> f64;

    /// `[∫f, f, f', f'', f''']`: every level a field evaluator may need.
    fn stack(&self, t: f64) -> [f64; 5] {
        let [f0, f1, f2, f3] = self.derivatives(t);
        [self.antiderivative(t), f0, f1, f2, f3]
    }
}

const PANELS: usize = 32;
const PANEL_NODES: usize = 16;
/// The window is the Hann window raised to this power, so the waveform is
/// `C^(2·HANN_POWER − 1)` at the support endpoints.
pub const HANN_POWER: u32 = 4;

/// Carrier-modulated Hann-type pulse supported on `[t0, t0 + width]`:
///
/// ```text
/// f(t) = sin^(2·HANN_POWER)(π (t − t0) / width) · cos(carrier · (t − t0 − width/2))
/// ```
#[derive(Debug, Clone)]
pub struct HannPulse {
    t0: f64,
    width: f64,
    carrier: f64,
    /// cumulative[k] = ∫ f over the first k panels
    cumulative: Vec<f64>,
    rule: GaussLegendre,
}

pub fn hann_pulse(t0: f64, width: f64, carrier: f64) -> Result<HannPulse> {
    HannPulse::new(t0, width, carrier)
}

impl HannPulse {
    pub fn new(t0: f64, width: f64, carrier: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "pulse width must be positive and finite, got {width}"
            )));
        }
        if !(t0.is_finite() && carrier.is_finite()) {
            return Err(Error::InvalidParameter("pulse start and carrier must be finite".into()));
        }
        let rule = GaussLegendre::new(PANEL_NODES)?;
        let mut pulse = Self {
            t0,
            width,
            carrier,
            cumulative: Vec::with_capacity(PANELS + 1),
            rule,
        };
        let h = width / PANELS as f64;
        let mut acc = 0.0;
        pulse.cumulative.push(0.0);
        for k in 0..PANELS {
            let a = t0 + k as f64 * h;
            acc += pulse.rule.integrate(a, a + h, |t| pulse.raw(t)[0]);
            pulse.cumulative.push(acc);
        }
        Ok(pulse)
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn carrier(&self) -> f64 {
        self.carrier
    }

    /// Derivatives on the open support, ignoring the cut-off.
    fn raw(&self, t: f64) -> [f64; 4] {
        let a = PI / self.width;
        let (s, c) = (a * (t - self.t0)).sin_cos();
        let sine = [s, a * c, -a * a * s, -a * a * a * c];
        let mut window = jet_mul(&sine, &sine);
        let base = window;
        for _ in 1..HANN_POWER {
            window = jet_mul(&window, &base);
        }
        let w = self.carrier;
        let (cs, cc) = (w * (t - self.t0 - 0.5 * self.width)).sin_cos();
        let carrier = [cc, -w * cs, -w * w * cc, w * w * w * cs];
        jet_mul(&window, &carrier)
    }
}

/// Leibniz product of two third-order jets.
fn jet_mul(f: &[f64; 4], g: &[f64; 4]) -> [f64; 4] {
    [
        f[0] * g[0],
        f[1] * g[0] + f[0] * g[1],
        f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
        f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
    ]
}

impl Signature for HannPulse {
    fn onset(&self) -> f64 {
        self.t0
    }

    fn support_end(&self) -> f64 {
        self.t0 + self.width
    }

    fn derivatives(&self, t: f64) -> [f64; 4] {
        if t <= self.t0 || t >= self.t0 + self.width {
            [0.0; 4]
        } else {
            self.raw(t)
        }
    }

    fn antiderivative(&self, t: f64) -> f64 {
        if t <= self.t0 {
            return 0.0;
        }
        if t >= self.t0 + self.width {
            return self.cumulative[PANELS];
        }
        let h = self.width / PANELS as f64;
        let k = (((t - self.t0) / h) as usize).min(PANELS - 1);
        let a = self.t0 + k as f64 * h;
        self.cumulative[k] + self.rule.integrate(a, t, |s| self.raw(s)[0])
    }
}
