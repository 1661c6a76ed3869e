//! Directions, spatial frequencies and surface geometry.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{domain, HolorisError, Result};

/// A propagation direction in physical angles.
///
/// `theta_azi` is measured in the surface plane, `theta_ele` from the surface
/// normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalAngle {
    theta_azi: f64,
    theta_ele: f64,
}

impl PhysicalAngle {
    pub fn new(theta_azi: f64, theta_ele: f64) -> Result<Self> {
        if !(0.0..2.0 * PI).contains(&theta_azi) {
            return domain(format!("azimuth {theta_azi} outside [0, 2π)"));
        }
        if !(0.0..=FRAC_PI_2).contains(&theta_ele) {
            return domain(format!("elevation {theta_ele} outside [0, π/2]"));
        }
        Ok(Self { theta_azi, theta_ele })
    }

    pub fn theta_azi(&self) -> f64 {
        self.theta_azi
    }

    pub fn theta_ele(&self) -> f64 {
        self.theta_ele
    }
}

/// Spatial-frequency pair ψ = [ψ^azi, ψ^ele] in rad/m.
///
/// Also used for differences of spatial frequencies (Δx, Δy, k_opt, ...),
/// which is why arithmetic is provided.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AngularPair {
    pub azi: f64,
    pub ele: f64,
}

impl AngularPair {
    pub const ZERO: AngularPair = AngularPair { azi: 0.0, ele: 0.0 };

    pub const fn new(azi: f64, ele: f64) -> Self {
        Self { azi, ele }
    }

    /// Builds ψ from normalized components (λ/2π)ψ.
    pub fn from_normalized(lambda: f64, azi: f64, ele: f64) -> Self {
        let k = 2.0 * PI / lambda;
        Self { azi: k * azi, ele: k * ele }
    }

    /// Normalized components (λ/2π)ψ.
    pub fn normalized(&self, lambda: f64) -> (f64, f64) {
        let s = lambda / (2.0 * PI);
        (self.azi * s, self.ele * s)
    }
}

impl Add for AngularPair {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.azi + o.azi, self.ele + o.ele)
    }
}

impl Sub for AngularPair {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.azi - o.azi, self.ele - o.ele)
    }
}

impl Neg for AngularPair {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.azi, -self.ele)
    }
}

impl Mul<f64> for AngularPair {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.azi * s, self.ele * s)
    }
}

/// ψ^azi = (2π/λ)cosθ^azi sinθ^ele, ψ^ele = (2π/λ)sinθ^azi sinθ^ele.
pub fn physical_to_spatial(theta: PhysicalAngle, lambda: f64) -> AngularPair {
    let k = 2.0 * PI / lambda;
    let s = theta.theta_ele.sin();
    AngularPair::new(k * theta.theta_azi.cos() * s, k * theta.theta_azi.sin() * s)
}

/// e^{j(x ψ^azi + y ψ^ele)}: phase of a plane wave with spatial frequency ψ
/// at surface point (x, y).
pub fn steering_phase(x: f64, y: f64, psi: AngularPair) -> Complex64 {
    Complex64::from_polar(1.0, x * psi.azi + y * psi.ele)
}

/// Discrete planar array or continuous metasurface.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SurfaceKind {
    Dpa,
    Cms,
}

/// Aperture of a surface. For a DPA the element grid satisfies N·d = A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceGeometry {
    ax: f64,
    ay: f64,
    lambda: f64,
    kind: SurfaceKind,
    d: f64,
    nx: usize,
    ny: usize,
}

impl SurfaceGeometry {
    /// DPA with `nx × ny` elements at spacing `d`.
    pub fn dpa(nx: usize, ny: usize, d: f64, lambda: f64) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return domain("element counts must be positive");
        }
        check_wavelength(lambda)?;
        if !(d > 0.0 && d <= lambda / 2.0 * (1.0 + 1e-12)) {
            return domain(format!("spacing {d} outside (0, λ/2]"));
        }
        Ok(Self {
            ax: nx as f64 * d,
            ay: ny as f64 * d,
            lambda,
            kind: SurfaceKind::Dpa,
            d,
            nx,
            ny,
        })
    }

    /// DPA covering an `ax × ay` aperture at spacing `d`; A/d must be an
    /// integer to relative precision 1e-12.
    pub fn dpa_from_aperture(ax: f64, ay: f64, d: f64, lambda: f64) -> Result<Self> {
        if !(ax > 0.0 && ay > 0.0 && d > 0.0) {
            return domain("aperture and spacing must be positive");
        }
        let count = |a: f64| -> Result<usize> {
            let n = (a / d).round();
            if n < 1.0 || ((n * d - a) / a).abs() > 1e-12 {
                return Err(HolorisError::Config(format!(
                    "aperture {a} is not an integer multiple of spacing {d}"
                )));
            }
            Ok(n as usize)
        };
        let (nx, ny) = (count(ax)?, count(ay)?);
        let mut g = Self::dpa(nx, ny, d, lambda)?;
        g.ax = ax;
        g.ay = ay;
        Ok(g)
    }

    /// Continuous metasurface with an `ax × ay` aperture.
    pub fn cms(ax: f64, ay: f64, lambda: f64) -> Result<Self> {
        if !(ax > 0.0 && ay > 0.0) {
            return domain("aperture must be positive");
        }
        check_wavelength(lambda)?;
        Ok(Self { ax, ay, lambda, kind: SurfaceKind::Cms, d: 0.0, nx: 0, ny: 0 })
    }

    /// Half-wavelength array with `nx × ny` elements, the geometry of the BS
    /// and UE arrays.
    pub fn half_wavelength_upa(nx: usize, ny: usize, lambda: f64) -> Result<Self> {
        Self::dpa(nx, ny, lambda / 2.0, lambda)
    }

    pub fn ax(&self) -> f64 {
        self.ax
    }
    pub fn ay(&self) -> f64 {
        self.ay
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn kind(&self) -> SurfaceKind {
        self.kind
    }
    /// Element spacing (0 for a CMS).
    pub fn spacing(&self) -> f64 {
        self.d
    }
    /// Element counts (0 for a CMS).
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn elements(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_dpa(&self) -> bool {
        self.kind == SurfaceKind::Dpa
    }

    pub(crate) fn require_dpa(&self) -> Result<()> {
        if self.is_dpa() {
            Ok(())
        } else {
            domain("operation needs a discrete planar array")
        }
    }
}

fn check_wavelength(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        domain(format!("wavelength {lambda} must be positive"))
    }
}
