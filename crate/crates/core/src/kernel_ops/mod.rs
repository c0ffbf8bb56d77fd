//! Pointwise evaluation of stable operators and their Pucci envelopes.
//!
//! An operator of the class under study acts on a field `u` at `x` as the
//! absolutely convergent integral of the symmetric second difference
//! `(u(x+y) + u(x-y))/2 - u(x)` against the kernel `a(y/|y|) / |y|^{n+2s}`.
//! The principal value never has to be formed: the second difference cancels
//! the odd part of the singularity, so a plain absolutely convergent
//! quadrature suffices for fields that are C² near `x`.
//!
//! Evaluation factorizes in polar coordinates: a 1-D radial integral per
//! direction (see [`radial_profile_integral`]) and an angular sum over a
//! sphere rule. The extremal operators M± are realized by the per-direction
//! envelope formula: the angular density enters linearly, so the sup/inf over
//! the ellipticity class is attained by switching between the bounds on the
//! positive and negative parts of the radial profile.

mod eval;
mod field;
mod measure;
mod scheme;

pub use eval::{
    evaluate_operator, evaluate_operator_strict, evaluate_pucci, evaluate_pucci_pair,
    radial_profile_integral, radial_profiles, second_difference, PucciSign,
};
pub use field::{FarField, ScalarField, Smoothness};
pub use measure::{validate_spectral_measure, MeasureKind, SpectralMeasure};
pub use scheme::QuadratureScheme;

use crate::{Error, Result};

/// A translation-invariant stable operator: fractional order `s`, angular
/// density `measure`, ambient dimension `dim`.
#[derive(Clone)]
pub struct StableOperator {
    pub dim: usize,
    pub s: f64,
    pub measure: SpectralMeasure,
}

impl StableOperator {
    pub fn new(dim: usize, s: f64, measure: SpectralMeasure) -> Result<Self> {
        if !(0.0 < s && s < 1.0) {
            return Err(Error::invalid("s", format!("must lie strictly in (0,1), got {s}")));
        }
        if !(1..=3).contains(&dim) {
            return Err(Error::invalid("dim", format!("supported dimensions are 1..=3, got {dim}")));
        }
        if measure.dim != dim {
            return Err(Error::invalid(
                "measure",
                format!("measure dimension {} does not match operator dimension {}", measure.dim, dim),
            ));
        }
        Ok(StableOperator { dim, s, measure })
    }

    /// The fractional Laplacian normalization `a ≡ 1`.
    pub fn fractional_laplacian(dim: usize, s: f64) -> Result<Self> {
        Self::new(dim, s, SpectralMeasure::constant(dim, 1.0))
    }
}
