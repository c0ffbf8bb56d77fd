use crate::{vec, Error, Point, Result};
use std::sync::Arc;

/// Representation of the angular density.
#[derive(Clone)]
pub enum MeasureKind {
    Constant(f64),
    /// Values at equispaced angles on S¹ (n = 2), evaluated by periodic
    /// linear interpolation. For n = 1 the table holds the two values at ±1.
    Tabulated(Arc<Vec<f64>>),
    Analytic(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

/// The angular density of the kernel together with its ellipticity bounds.
/// Stored even-symmetrized: only the even part of the density contributes to
/// the operator because the second difference is symmetric under y -> -y.
#[derive(Clone)]
pub struct SpectralMeasure {
    pub dim: usize,
    pub kind: MeasureKind,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

impl SpectralMeasure {
    pub fn constant(dim: usize, value: f64) -> Self {
        SpectralMeasure {
            dim,
            kind: MeasureKind::Constant(value),
            lambda_min: value,
            lambda_max: value,
        }
    }

    /// Raw (possibly asymmetric) evaluation of the stored density.
    fn eval_raw(&self, theta: Point) -> f64 {
        match &self.kind {
            MeasureKind::Constant(c) => *c,
            MeasureKind::Analytic(f) => f(theta),
            MeasureKind::Tabulated(values) => match self.dim {
                1 => {
                    if theta[0] >= 0.0 {
                        values[0]
                    } else {
                        values[values.len() - 1]
                    }
                }
                2 => {
                    let m = values.len();
                    let phi = theta[1].atan2(theta[0]).rem_euclid(2.0 * std::f64::consts::PI);
                    let t = phi / (2.0 * std::f64::consts::PI) * m as f64;
                    let j = t.floor() as usize % m;
                    let frac = t - t.floor();
                    values[j] * (1.0 - frac) + values[(j + 1) % m] * frac
                }
                _ => {
                    // n = 3 tables index a polar x azimuthal grid; nearest-cell
                    // lookup with an even grid is enough for test measures.
                    let rows = (values.len() as f64).sqrt() as usize;
                    let cols = values.len() / rows;
                    let c = theta[2].clamp(-1.0, 1.0);
                    let phi = theta[1].atan2(theta[0]).rem_euclid(2.0 * std::f64::consts::PI);
                    let i = (((c + 1.0) / 2.0) * rows as f64).min(rows as f64 - 1.0) as usize;
                    let j = (phi / (2.0 * std::f64::consts::PI) * cols as f64).min(cols as f64 - 1.0)
                        as usize;
                    values[i * cols + j]
                }
            },
        }
    }

    /// Even-symmetrized density: `(a(theta) + a(-theta)) / 2`.
    #[inline]
    pub fn eval(&self, theta: Point) -> f64 {
        match &self.kind {
            MeasureKind::Constant(c) => *c,
            _ => 0.5 * (self.eval_raw(theta) + self.eval_raw(vec::neg(theta))),
        }
    }

    /// Tabulated density on S¹ from explicit values (angle j * 2pi / m).
    pub fn tabulated_circle(values: Vec<f64>, lambda_min: f64, lambda_max: f64) -> Result<Self> {
        validate_spectral_measure(
            SpectralMeasure {
                dim: 2,
                kind: MeasureKind::Tabulated(Arc::new(values)),
                lambda_min,
                lambda_max,
            },
            lambda_min,
            lambda_max,
        )
    }

    pub fn analytic(
        dim: usize,
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        lambda_min: f64,
        lambda_max: f64,
    ) -> Result<Self> {
        validate_spectral_measure(
            SpectralMeasure {
                dim,
                kind: MeasureKind::Analytic(Arc::new(f)),
                lambda_min,
                lambda_max,
            },
            lambda_min,
            lambda_max,
        )
    }
}

/// Validates ellipticity bounds of the symmetrized density on a dense check
/// set and returns the measure. The offending direction is reported on
/// failure.
pub fn validate_spectral_measure(
    measure: SpectralMeasure,
    lambda_min: f64,
    lambda_max: f64,
) -> Result<SpectralMeasure> {
    if !(lambda_min > 0.0) {
        return Err(Error::invalid("lambda", format!("must be positive, got {lambda_min}")));
    }
    if lambda_max < lambda_min {
        return Err(Error::invalid(
            "Lambda",
            format!("must satisfy Lambda >= lambda, got {lambda_max} < {lambda_min}"),
        ));
    }
    let rule = crate::quad::SphereRule::new(measure.dim, 256);
    let mut check = rule.nodes;
    if let MeasureKind::Tabulated(values) = &measure.kind {
        if measure.dim == 2 {
            let m = values.len();
            for j in 0..m {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                check.push([phi.cos(), phi.sin(), 0.0]);
            }
        }
    }
    for theta in check {
        let v = measure.eval(theta);
        if !v.is_finite() || v < lambda_min - 1e-12 || v > lambda_max + 1e-12 {
            return Err(Error::MeasureBound {
                theta,
                value: v,
                lambda_min,
                lambda_max,
            });
        }
    }
    Ok(SpectralMeasure {
        lambda_min,
        lambda_max,
        ..measure
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_measure_valid() {
        let m = SpectralMeasure::constant(2, 1.0);
        let m = validate_spectral_measure(m, 1.0, 1.0).unwrap();
        assert!((m.eval([0.6, 0.8, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_part_cancels() {
        // a(theta) = 1 + 0.5 sign(theta_1) symmetrizes to 1.
        let m = SpectralMeasure::analytic(
            2,
            |t| 1.0 + 0.5 * t[0].signum(),
            0.5,
            1.5,
        )
        .unwrap();
        for phi in [0.1, 1.0, 2.5, 4.0] {
            let theta = [f64::cos(phi), f64::sin(phi), 0.0];
            assert!((m.eval(theta) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bound_violation_reports_theta() {
        let m = SpectralMeasure {
            dim: 2,
            kind: MeasureKind::Constant(2.0),
            lambda_min: 1.0,
            lambda_max: 1.0,
        };
        match validate_spectral_measure(m, 1.0, 1.0) {
            Err(Error::MeasureBound { value, .. }) => assert!((value - 2.0).abs() < 1e-15),
            Err(other) => panic!("unexpected error {other}"),
            Ok(_) => panic!("bound violation not detected"),
        }
    }

    #[test]
    fn tabulated_circle_interpolates() {
        let vals: Vec<f64> = (0..16)
            .map(|j| {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / 16.0;
                1.0 + 0.5 * (2.0 * phi).cos()
            })
            .collect();
        let m = SpectralMeasure::tabulated_circle(vals, 0.5, 1.5).unwrap();
        // Even in theta by construction: check symmetrization is a no-op here.
        let theta = [0.3f64.cos(), 0.3f64.sin(), 0.0];
        let v = m.eval(theta);
        assert!(v > 0.5 && v < 1.5);
        let v2 = m.eval(crate::vec::neg(theta));
        assert!((v - v2).abs() < 1e-14);
    }
}
