use crate::{vec, Point};
use std::sync::Arc;

/// Smoothness of the field at the evaluation point. `C2` lets the near-field
/// use a Taylor-driven estimate inside the inner radius; `CsOnly` forces
/// dyadic subdivision toward the singularity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    C2,
    CsOnly,
}

/// Declared behavior of the field at infinity. The tail of the singular
/// integral is never truncated silently: compact support yields an exact
/// closed-form tail, a growth envelope yields a certified tail bound folded
/// into the error estimate, and `Analytic` fields are integrated outward
/// until the dyadic annulus contributions decay below tolerance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FarField {
    /// `u` vanishes outside the ball of this radius about the origin.
    CompactSupport { radius: f64 },
    /// `|u(x)| <= coef * (1 + |x|)^exponent`; requires `exponent < 2s`.
    Growth { coef: f64, exponent: f64 },
    /// No declared envelope; annulus contributions must decay empirically.
    Analytic,
}

/// A real-valued field of position with the metadata the singular-integral
/// quadrature needs. Evaluators must be total functions (return a finite
/// value everywhere); domain-supported fields return 0 outside their support.
#[derive(Clone)]
pub struct ScalarField {
    pub dim: usize,
    pub smoothness: Smoothness,
    pub far_field: FarField,
    eval: Arc<dyn Fn(Point) -> f64 + Send + Sync>,
    /// Optional level function whose zero set carries the field's kinks
    /// (support boundaries, domain boundaries). The radial quadrature aligns
    /// panel edges with the ray crossings of this surface, which keeps the
    /// Gauss–Kronrod error estimates trustworthy: a kink strictly inside a
    /// panel but closer to the edge than the outermost node is invisible to
    /// the rule.
    kink_surface: Option<Arc<dyn Fn(Point) -> f64 + Send + Sync>>,
}

impl ScalarField {
    pub fn new(
        dim: usize,
        smoothness: Smoothness,
        far_field: FarField,
        eval: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        ScalarField {
            dim,
            smoothness,
            far_field,
            eval: Arc::new(eval),
            kink_surface: None,
        }
    }

    pub fn with_kink_surface(
        mut self,
        surface: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.kink_surface = Some(Arc::new(surface));
        self
    }

    #[inline]
    pub fn eval(&self, p: Point) -> f64 {
        (self.eval)(p)
    }

    #[inline]
    pub fn kink_level(&self, p: Point) -> Option<f64> {
        self.kink_surface.as_ref().map(|f| f(p))
    }

    pub fn has_kink_surface(&self) -> bool {
        self.kink_surface.is_some()
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        // A constant has zero second difference; tails cancel exactly, so the
        // analytic far field terminates immediately.
        ScalarField::new(dim, Smoothness::C2, FarField::Analytic, move |_| c)
    }

    pub fn affine(dim: usize, gradient: Point, offset: f64) -> Self {
        ScalarField::new(dim, Smoothness::C2, FarField::Analytic, move |p| {
            offset + vec::dot(gradient, p)
        })
    }

    /// The half-space power `(x_n)_+^p` with the last active coordinate as
    /// the normal direction. The workhorse of every boundary-rate test.
    pub fn halfspace_power(dim: usize, p: f64) -> Self {
        let n = dim - 1;
        ScalarField::new(
            dim,
            Smoothness::C2,
            FarField::Growth {
                coef: 1.0,
                exponent: p,
            },
            move |x| {
                let t = x[n];
                if t > 0.0 {
                    t.powf(p)
                } else {
                    0.0
                }
            },
        )
        .with_kink_surface(move |x| x[n])
    }

    /// Pointwise sum `alpha * self + beta * other` preserving the weaker
    /// smoothness hint and the wider far field.
    pub fn linear_combination(&self, alpha: f64, other: &ScalarField, beta: f64) -> ScalarField {
        assert_eq!(self.dim, other.dim);
        let smoothness = if self.smoothness == Smoothness::C2 && other.smoothness == Smoothness::C2
        {
            Smoothness::C2
        } else {
            Smoothness::CsOnly
        };
        let far_field = match (self.far_field, other.far_field) {
            (
                FarField::CompactSupport { radius: r1 },
                FarField::CompactSupport { radius: r2 },
            ) => FarField::CompactSupport { radius: r1.max(r2) },
            (
                FarField::Growth {
                    coef: k1,
                    exponent: p1,
                },
                FarField::Growth {
                    coef: k2,
                    exponent: p2,
                },
            ) => FarField::Growth {
                coef: alpha.abs() * k1 + beta.abs() * k2,
                exponent: p1.max(p2),
            },
            (FarField::CompactSupport { radius }, FarField::Growth { coef, exponent }) => {
                FarField::Growth {
                    coef: beta.abs() * coef + alpha.abs() * 1.0_f64.max(radius),
                    exponent,
                }
            }
            (FarField::Growth { coef, exponent }, FarField::CompactSupport { radius }) => {
                FarField::Growth {
                    coef: alpha.abs() * coef + beta.abs() * 1.0_f64.max(radius),
                    exponent,
                }
            }
            _ => FarField::Analytic,
        };
        let f = self.eval.clone();
        let g = other.eval.clone();
        // The union of the two kink sets is the zero set of the product.
        let kink_surface = match (self.kink_surface.clone(), other.kink_surface.clone()) {
            (Some(a), Some(b)) => {
                Some(Arc::new(move |p: Point| a(p) * b(p)) as Arc<dyn Fn(Point) -> f64 + Send + Sync>)
            }
            (Some(a), None) => Some(a),
            (None, Some(b)) => Some(b),
            (None, None) => None,
        };
        ScalarField {
            dim: self.dim,
            smoothness,
            far_field,
            eval: Arc::new(move |p| alpha * f(p) + beta * g(p)),
            kink_surface,
        }
    }

    /// The pointwise negation `-u`. Negation commutes bitwise with the whole
    /// quadrature pipeline, which the Pucci duality tests rely on.
    pub fn negate(&self) -> ScalarField {
        let f = self.eval.clone();
        ScalarField {
            dim: self.dim,
            smoothness: self.smoothness,
            far_field: self.far_field,
            eval: Arc::new(move |p| -f(p)),
            kink_surface: self.kink_surface.clone(),
        }
    }

    /// The translate `x -> u(x + shift)`. The far-field radius grows by the
    /// shift length so tail handling stays valid.
    pub fn translate(&self, shift: Point) -> ScalarField {
        let f = self.eval.clone();
        let far_field = match self.far_field {
            FarField::CompactSupport { radius } => FarField::CompactSupport {
                radius: radius + vec::norm(shift),
            },
            FarField::Growth { coef, exponent } => FarField::Growth {
                coef: coef * (1.0 + vec::norm(shift)).powf(exponent.max(0.0)),
                exponent,
            },
            FarField::Analytic => FarField::Analytic,
        };
        let kink_surface = self.kink_surface.clone().map(|k| {
            Arc::new(move |p: Point| k(vec::add(p, shift))) as Arc<dyn Fn(Point) -> f64 + Send + Sync>
        });
        ScalarField {
            dim: self.dim,
            smoothness: self.smoothness,
            far_field,
            eval: Arc::new(move |p| f(vec::add(p, shift))),
            kink_surface,
        }
    }

    /// The dilate `x -> u(r x)`.
    pub fn dilate(&self, r: f64) -> ScalarField {
        assert!(r > 0.0);
        let f = self.eval.clone();
        let far_field = match self.far_field {
            FarField::CompactSupport { radius } => FarField::CompactSupport { radius: radius / r },
            FarField::Growth { coef, exponent } => FarField::Growth {
                coef: coef * r.powf(exponent).max(1.0),
                exponent,
            },
            FarField::Analytic => FarField::Analytic,
        };
        let kink_surface = self.kink_surface.clone().map(|k| {
            Arc::new(move |p: Point| k(vec::scale(p, r))) as Arc<dyn Fn(Point) -> f64 + Send + Sync>
        });
        ScalarField {
            dim: self.dim,
            smoothness: self.smoothness,
            far_field,
            eval: Arc::new(move |p| f(vec::scale(p, r))),
            kink_surface,
        }
    }
}
