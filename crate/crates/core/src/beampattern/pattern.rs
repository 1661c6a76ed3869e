//! Beam patterns as objects, so the channel model can evaluate any surface
//! design (DPA map, closed-form NBS, CMS SBF, ...) through one interface.

use num_complex::Complex64;

use super::cms::{cms_nbs_pattern, cms_sbf_pattern_factors, MIN_QUAD_POINTS};
use super::dpa::{beam_pattern_dpa, nbs_pattern, sbf_separable, SeparableMap};
use super::geometry::{AngularPair, SurfaceGeometry, SurfaceKind};
use super::map::ReflectionMap;
use crate::error::{check_shape, Result};

/// Complex response g(ψ_out, ψ_in) of a configured surface.
pub trait BeamPattern: Send + Sync {
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64;
}

impl<F> BeamPattern for F
where
    F: Fn(AngularPair, AngularPair) -> Complex64 + Send + Sync,
{
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64 {
        self(psi_out, psi_in)
    }
}

/// Element sum over an arbitrary DPA map.
#[derive(Debug, Clone)]
pub struct MapBeam {
    geom: SurfaceGeometry,
    map: ReflectionMap,
}

impl MapBeam {
    pub fn new(geom: SurfaceGeometry, map: ReflectionMap) -> Result<Self> {
        geom.require_dpa()?;
        check_shape("map rows vs N_x", geom.nx(), map.nx())?;
        check_shape("map columns vs N_y", geom.ny(), map.ny())?;
        Ok(Self { geom, map })
    }

    pub fn map(&self) -> &ReflectionMap {
        &self.map
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geom
    }
}

impl BeamPattern for MapBeam {
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64 {
        beam_pattern_dpa(&self.map, &self.geom, psi_out, psi_in).expect("shapes checked at construction")
    }
}

/// Element sum over a separable DPA map, evaluated as two 1-D sums.
#[derive(Debug, Clone)]
pub struct SeparableBeam {
    geom: SurfaceGeometry,
    map: SeparableMap,
}

impl SeparableBeam {
    pub fn new(geom: SurfaceGeometry, map: SeparableMap) -> Result<Self> {
        geom.require_dpa()?;
        check_shape("map rows vs N_x", geom.nx(), map.x.len())?;
        check_shape("map columns vs N_y", geom.ny(), map.y.len())?;
        Ok(Self { geom, map })
    }

    pub fn factors(&self, psi_out: AngularPair, psi_in: AngularPair) -> (Complex64, Complex64) {
        self.map.pattern_factors(&self.geom, psi_out, psi_in)
    }
}

impl BeamPattern for SeparableBeam {
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64 {
        let (a, b) = self.factors(psi_out, psi_in);
        a * b
    }
}

/// NBS beam with steering offset k = ψ_opt − ψ_in fixed at design time.
///
/// For a DPA the response is the element sum of the unit-modulus NBS map
/// (peak N_xN_y); for a CMS it is the sinc closed form (peak 1). Use
/// [`NbsBeam::reference`] to normalize.
#[derive(Debug, Clone, Copy)]
pub struct NbsBeam {
    geom: SurfaceGeometry,
    offset: AngularPair,
}

impl NbsBeam {
    pub fn new(geom: SurfaceGeometry, psi_opt: AngularPair, psi_in: AngularPair) -> Self {
        Self { geom, offset: psi_opt - psi_in }
    }

    /// Peak magnitude of the response.
    pub fn reference(&self) -> f64 {
        match self.geom.kind() {
            SurfaceKind::Dpa => self.geom.elements() as f64,
            SurfaceKind::Cms => 1.0,
        }
    }
}

impl BeamPattern for NbsBeam {
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64 {
        let psi_opt = psi_in + self.offset;
        match self.geom.kind() {
            SurfaceKind::Dpa => nbs_pattern(&self.geom, psi_out, psi_in, psi_opt),
            SurfaceKind::Cms => cms_nbs_pattern(self.geom.ax(), self.geom.ay(), psi_out, psi_in, psi_opt),
        }
        .expect("geometry validated at construction")
    }
}

/// SBF beam over a band, normalized so that a unit-modulus NBS map on the
/// same surface would peak at 1 (DPA: element sum / N_xN_y; CMS: quadrature).
#[derive(Debug, Clone)]
pub enum SbfBeam {
    Dpa { geom: SurfaceGeometry, map: SeparableMap },
    Cms { geom: SurfaceGeometry, psi_min: AngularPair, psi_max: AngularPair, psi_in: AngularPair, quad: usize },
}

impl SbfBeam {
    pub fn new(
        geom: SurfaceGeometry,
        psi_min: AngularPair,
        psi_max: AngularPair,
        psi_in: AngularPair,
    ) -> Result<Self> {
        match geom.kind() {
            SurfaceKind::Dpa => Ok(Self::Dpa { geom, map: sbf_separable(&geom, psi_min, psi_max, psi_in)? }),
            SurfaceKind::Cms => {
                let quad = MIN_QUAD_POINTS;
                // Validate once so `factors` cannot fail later.
                cms_sbf_pattern_factors(geom.ax(), geom.ay(), psi_in, psi_in, psi_min, psi_max, quad)?;
                Ok(Self::Cms { geom, psi_min, psi_max, psi_in, quad })
            }
        }
    }

    /// Azimuth and elevation factors of the normalized response.
    pub fn factors(&self, psi_out: AngularPair, psi_in: AngularPair) -> (Complex64, Complex64) {
        match self {
            Self::Dpa { geom, map } => {
                let (a, b) = map.pattern_factors(geom, psi_out, psi_in);
                (a / geom.nx() as f64, b / geom.ny() as f64)
            }
            Self::Cms { geom, psi_min, psi_max, psi_in: design_in, quad } => {
                // The closed form assumes the design incidence; shift the band
                // when the actual incidence differs.
                let shift = psi_in - *design_in;
                cms_sbf_pattern_factors(
                    geom.ax(),
                    geom.ay(),
                    psi_out,
                    psi_in,
                    *psi_min + shift,
                    *psi_max + shift,
                    *quad,
                )
                .expect("validated at construction")
            }
        }
    }
}

impl BeamPattern for SbfBeam {
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64 {
        let (a, b) = self.factors(psi_out, psi_in);
        a * b
    }
}

/// A pattern multiplied by a constant.
#[derive(Debug, Clone)]
pub struct Scaled<P> {
    pub inner: P,
    pub factor: Complex64,
}

impl<P> Scaled<P> {
    pub fn new(inner: P, factor: f64) -> Self {
        Self { inner, factor: Complex64::new(factor, 0.0) }
    }
}

impl<P: BeamPattern> BeamPattern for Scaled<P> {
    fn response(&self, psi_out: AngularPair, psi_in: AngularPair) -> Complex64 {
        self.factor * self.inner.response(psi_out, psi_in)
    }
}

/// NBS beam scaled to peak 1 on either surface kind.
pub fn normalized_nbs(geom: SurfaceGeometry, psi_opt: AngularPair, psi_in: AngularPair) -> Scaled<NbsBeam> {
    let beam = NbsBeam::new(geom, psi_opt, psi_in);
    let r = beam.reference();
    Scaled::new(beam, 1.0 / r)
}
