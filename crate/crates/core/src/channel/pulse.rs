//! Raised-cosine pulse shaping.

use std::f64::consts::PI;

use crate::beampattern::kernels::sinc;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseShape {
    rolloff: f64,
    t_s: f64,
}

impl PulseShape {
    pub fn new(rolloff: f64, t_s: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rolloff) {
            return domain(format!("roll-off {rolloff} outside [0, 1]"));
        }
        if !(t_s > 0.0) {
            return domain("sampling period must be positive");
        }
        Ok(Self { rolloff, t_s })
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn t_s(&self) -> f64 {
        self.t_s
    }

    pub fn eval(&self, tau: f64) -> f64 {
        raised_cosine(tau, self)
    }

    /// Samples p(d·T_s − τ) for d = 0..n.
    pub fn samples(&self, n: usize, tau: f64) -> Vec<f64> {
        (0..n).map(|d| self.eval(d as f64 * self.t_s - tau)).collect()
    }
}

/// Raised-cosine impulse response with p(0) = 1:
/// p(τ) = sinc(τ/T_s) · cos(πβτ/T_s) / (1 − (2βτ/T_s)²), sinc(x) = sin(πx)/(πx).
///
/// With u = 2β|τ|/T_s the second factor equals (π/2)·sinc((1 − u)/2)/(1 + u),
/// which has no removable singularity at u = 1, so the limit value
/// (π/4)·sinc(1/(2β)) comes out of the same expression.
pub fn raised_cosine(tau: f64, shape: &PulseShape) -> f64 {
    let x = tau / shape.t_s;
    let u = 2.0 * shape.rolloff * x.abs();
    sinc(PI * x) * (PI / 2.0) * sinc(PI * (1.0 - u) / 2.0) / (1.0 + u)
}
