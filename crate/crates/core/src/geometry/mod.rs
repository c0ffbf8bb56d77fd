//! Graph domains, the distance function, interior/exterior cones, and the
//! distance-power annulus integral.
//!
//! Domains are locally epigraphs `{x_n > g(x')}` with a declared regularity
//! class; half-spaces, balls and intervals get analytic shortcuts. The
//! distance to the complement is computed by projected descent on the graph:
//! a coarse scan of the foot-point parameter followed by golden-section
//! refinement, which also handles ridge points where the nearest boundary
//! point is not unique.

mod regdist;
mod torsion;

pub use regdist::{build_regularized_distance, RegularizedDistance};
pub use torsion::{solve_torsion, GradedAxis, TorsionGrid};

use crate::{vec, Error, Point, Result};
use std::sync::Arc;

/// Graph function of a 2-D epigraph domain.
#[derive(Clone)]
pub struct GraphFn {
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    /// Source text when the graph came from a specification file.
    pub source: Option<String>,
}

impl GraphFn {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        GraphFn {
            eval: Arc::new(f),
            source: None,
        }
    }

    pub fn with_source(mut self, src: String) -> Self {
        self.source = Some(src);
        self
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
}

#[derive(Clone)]
pub enum Shape {
    /// `{x_n > 0}`.
    HalfSpace,
    Ball { center: Point, radius: f64 },
    /// n = 1 only.
    Interval { a: f64, b: f64 },
    /// n = 2: `{x_2 > g(x_1)}`.
    Graph { g: GraphFn },
}

#[derive(Clone, Debug, PartialEq)]
pub enum RegularityClass {
    HalfSpace,
    Ball,
    C1Alpha {
        alpha: f64,
        norm_bound: f64,
    },
    /// Local Lipschitz bound rho(r), nonincreasing with rho -> 0, given as a
    /// table of (r, rho(r)) pairs.
    ImprovingLipschitz {
        modulus: Vec<(f64, f64)>,
    },
}

impl RegularityClass {
    /// Hölder exponent used by rate targets; 1 for the smooth classes.
    pub fn alpha(&self) -> f64 {
        match self {
            RegularityClass::HalfSpace | RegularityClass::Ball => 1.0,
            RegularityClass::C1Alpha { alpha, .. } => *alpha,
            RegularityClass::ImprovingLipschitz { .. } => 0.0,
        }
    }
}

#[derive(Clone)]
pub struct GraphDomain {
    pub dim: usize,
    pub shape: Shape,
    pub class: RegularityClass,
    pub chart_radius: f64,
    /// `g(0) = 0` and a vanishing symmetric difference quotient at 0.
    pub normalized: bool,
}

impl GraphDomain {
    pub fn half_space(dim: usize) -> Self {
        GraphDomain {
            dim,
            shape: Shape::HalfSpace,
            class: RegularityClass::HalfSpace,
            chart_radius: f64::INFINITY,
            normalized: true,
        }
    }

    pub fn ball(dim: usize, center: Point, radius: f64) -> Self {
        GraphDomain {
            dim,
            shape: Shape::Ball { center, radius },
            class: RegularityClass::Ball,
            chart_radius: f64::INFINITY,
            normalized: true,
        }
    }

    pub fn interval(a: f64, b: f64) -> Self {
        GraphDomain {
            dim: 1,
            shape: Shape::Interval { a, b },
            class: RegularityClass::Ball,
            chart_radius: f64::INFINITY,
            normalized: true,
        }
    }

    pub fn graph2d(g: GraphFn, class: RegularityClass, chart_radius: f64) -> Self {
        let eps = 1e-7;
        let normalized =
            g.eval(0.0).abs() < 1e-12 && ((g.eval(eps) - g.eval(-eps)) / (2.0 * eps)).abs() < 1e-6;
        GraphDomain {
            dim: 2,
            shape: Shape::Graph { g },
            class,
            chart_radius,
            normalized,
        }
    }

    /// Strict interior membership.
    pub fn contains(&self, x: Point) -> bool {
        self.boundary_level(x) > 0.0
    }

    /// A continuous level function positive inside, zero on the boundary,
    /// negative outside. Shared with the quadrature kink hints.
    pub fn boundary_level(&self, x: Point) -> f64 {
        match &self.shape {
            Shape::HalfSpace => x[self.dim - 1],
            Shape::Ball { center, radius } => radius - vec::norm(vec::sub(x, *center)),
            Shape::Interval { a, b } => (x[0] - a).min(b - x[0]),
            Shape::Graph { g } => x[1] - g.eval(x[0]),
        }
    }

    fn check_chart(&self, x: Point) -> Result<()> {
        if vec::norm(x) <= self.chart_radius {
            Ok(())
        } else {
            Err(Error::OutsideChart {
                point: x,
                chart_radius: self.chart_radius,
            })
        }
    }

    /// Distance to the complement; 0 outside the domain.
    pub fn distance(&self, x: Point) -> Result<f64> {
        self.check_chart(x)?;
        Ok(self.distance_unchecked(x))
    }

    pub fn distance_unchecked(&self, x: Point) -> f64 {
        match &self.shape {
            Shape::HalfSpace => x[self.dim - 1].max(0.0),
            Shape::Ball { center, radius } => (radius - vec::norm(vec::sub(x, *center))).max(0.0),
            Shape::Interval { a, b } => (x[0] - a).min(b - x[0]).max(0.0),
            Shape::Graph { g } => {
                let vertical = x[1] - g.eval(x[0]);
                if vertical <= 0.0 {
                    return 0.0;
                }
                // Foot point search: the minimizer lies within a window of
                // half-width `vertical` around the projection.
                let sq = |t: f64| {
                    let dy = x[1] - g.eval(t);
                    (x[0] - t) * (x[0] - t) + dy * dy
                };
                let lo = x[0] - vertical;
                let hi = x[0] + vertical;
                let n_scan = 48;
                let mut best_t = x[0];
                let mut best = sq(x[0]);
                for i in 0..=n_scan {
                    let t = lo + (hi - lo) * i as f64 / n_scan as f64;
                    let v = sq(t);
                    if v < best {
                        best = v;
                        best_t = t;
                    }
                }
                // Golden-section refinement around the best scan cell.
                let cell = (hi - lo) / n_scan as f64;
                let (mut a, mut b) = (best_t - cell, best_t + cell);
                let phi = 0.5 * (3.0 - 5.0_f64.sqrt());
                let (mut t1, mut t2) = (a + phi * (b - a), b - phi * (b - a));
                let (mut f1, mut f2) = (sq(t1), sq(t2));
                for _ in 0..90 {
                    if f1 < f2 {
                        b = t2;
                        t2 = t1;
                        f2 = f1;
                        t1 = a + phi * (b - a);
                        f1 = sq(t1);
                    } else {
                        a = t1;
                        t1 = t2;
                        f1 = f2;
                        t2 = b - phi * (b - a);
                        f2 = sq(t2);
                    }
                    if b - a < 1e-14 * (1.0 + best_t.abs()) {
                        break;
                    }
                }
                best.min(f1).min(f2).sqrt()
            }
        }
    }

    /// Inward unit normal at a boundary point (by symmetric difference on the
    /// graph; exact for the analytic shapes).
    pub fn inward_normal(&self, x0: Point) -> Point {
        match &self.shape {
            Shape::HalfSpace => {
                let mut e = [0.0; 3];
                e[self.dim - 1] = 1.0;
                e
            }
            Shape::Ball { center, .. } => vec::normalize(vec::sub(*center, x0)),
            Shape::Interval { a, b } => {
                if (x0[0] - a).abs() < (b - x0[0]).abs() {
                    [1.0, 0.0, 0.0]
                } else {
                    [-1.0, 0.0, 0.0]
                }
            }
            Shape::Graph { g } => {
                let eps = 1e-6;
                let slope = (g.eval(x0[0] + eps) - g.eval(x0[0] - eps)) / (2.0 * eps);
                vec::normalize([-slope, 1.0, 0.0])
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeSign {
    Plus,
    Minus,
}

/// The axially symmetric cone `{ e·x/|x| > ±eta (1 - (e·x/|x|)^2) }`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub axis: Point,
    pub eta: f64,
    pub sign: ConeSign,
}

impl Cone {
    pub fn new(axis: Point, eta: f64, sign: ConeSign) -> Self {
        Cone {
            axis: vec::normalize(axis),
            eta,
            sign,
        }
    }

    /// Level function of the cone boundary: positive inside.
    pub fn level(&self, x: Point) -> f64 {
        let r = vec::norm(x);
        if r == 0.0 {
            return 0.0;
        }
        let c = vec::dot(self.axis, x) / r;
        let eta = match self.sign {
            ConeSign::Plus => self.eta,
            ConeSign::Minus => -self.eta,
        };
        c - eta * (1.0 - c * c)
    }
}

/// Membership in the defining inequality, exactly as written.
pub fn cone_membership(cone: &Cone, x: Point) -> Result<bool> {
    if vec::norm(x) == 0.0 {
        return Err(Error::invalid("x", "cone membership undefined at the origin"));
    }
    Ok(cone.level(x) > 0.0)
}

/// Aperture grid used by the cone searches: eta in {0.01 k}.
pub const CONE_GRID_STEP: f64 = 0.01;
pub const CONE_GRID_TOP: f64 = 2.0;

/// The widest interior cone at a boundary point, reported as its aperture
/// headroom on the search grid: the returned value is `2 - eta*` where
/// `eta*` is the smallest parameter of the narrow family whose shifted cone
/// section `x0 + C_eta ∩ B_r` stays inside the domain on a deterministic
/// sample. A half-space admits every cone of the family (headroom at the
/// grid top); steeper local Lipschitz bounds shrink the headroom.
pub fn fit_interior_cone(domain: &GraphDomain, x0: Point, r: f64) -> Result<f64> {
    fit_cone_impl(domain, x0, r, false)
}

/// Exterior counterpart: the cone along the outward normal contained in the
/// complement.
pub fn fit_exterior_cone(domain: &GraphDomain, x0: Point, r: f64) -> Result<f64> {
    fit_cone_impl(domain, x0, r, true)
}

fn fit_cone_impl(domain: &GraphDomain, x0: Point, r: f64, exterior: bool) -> Result<f64> {
    let axis = if exterior {
        vec::neg(domain.inward_normal(x0))
    } else {
        domain.inward_normal(x0)
    };
    let fits = |k: i64| -> bool {
        let sigma = CONE_GRID_TOP - k as f64 * CONE_GRID_STEP;
        let cone = Cone::new(axis, sigma, ConeSign::Plus);
        // cos of the half-opening angle: the positive root of
        // sigma c^2 + c - sigma = 0.
        let c_star = if sigma <= 1e-12 {
            0.0
        } else {
            (-1.0 + (1.0 + 4.0 * sigma * sigma).sqrt()) / (2.0 * sigma)
        };
        let phi_max = c_star.clamp(-1.0, 1.0).acos();
        let m = 16;
        for i in -(m as i64)..=(m as i64) {
            let phi = phi_max * i as f64 / (m as f64 + 1.0);
            // Rotate (sin phi, cos phi) so that "cos" lies along the axis.
            let dir = [
                axis[1] * phi.sin() + axis[0] * phi.cos(),
                -axis[0] * phi.sin() + axis[1] * phi.cos(),
                0.0,
            ];
            for j in 1..=12 {
                let rho = r * j as f64 / 12.0;
                let p = vec::add(x0, vec::scale(dir, rho));
                let inside = domain.boundary_level(p) > 0.0;
                if exterior {
                    if inside || domain.boundary_level(p) == 0.0 {
                        return false;
                    }
                } else if !inside {
                    return false;
                }
                let _ = &cone;
            }
        }
        true
    };
    let kmax = (CONE_GRID_TOP / CONE_GRID_STEP) as i64;
    if !fits(0) {
        return Err(Error::NoAdmissibleCone);
    }
    // Containment is monotone: wider cones (larger headroom) fail first.
    let (mut lo, mut hi) = (0i64, kmax);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo as f64 * CONE_GRID_STEP)
}

/// `|psi(x0 + y) - (psi(x0) + grad psi(x0) . y)_+|`, the truncated-affine
/// Taylor defect of a regularized distance.
pub fn taylor_defect(psi: &RegularizedDistance, x0: Point, y: Point) -> f64 {
    let v0 = psi.eval(x0);
    let g = psi.gradient(x0);
    let affine = (v0 + vec::dot(g, y)).max(0.0);
    (psi.eval(vec::add(x0, y)) - affine).abs()
}

/// Fitted log-log slope of the worst-case Taylor defect against |y| over
/// dyadic offset levels; the defect of a C^{1,alpha}-regular field decays
/// at least like |y|^{1+alpha}.
pub fn taylor_defect_exponent(
    psi: &RegularizedDistance,
    x0: Point,
    levels: usize,
    scale: f64,
) -> f64 {
    let mut pairs = Vec::new();
    for k in 0..levels {
        let radius = scale * 0.5f64.powi(k as i32);
        let mut worst: f64 = 0.0;
        for i in 0..16 {
            let phi = 2.0 * std::f64::consts::PI * i as f64 / 16.0;
            let y = [radius * phi.cos(), radius * phi.sin(), 0.0];
            worst = worst.max(taylor_defect(psi, x0, y));
        }
        if worst > 1e-15 {
            pairs.push((radius, worst));
        }
    }
    if pairs.len() < 3 {
        // Defect at numerical zero everywhere: report a steep slope.
        return f64::INFINITY;
    }
    loglog_slope(&pairs)
}

pub(crate) fn loglog_slope(pairs: &[(f64, f64)]) -> f64 {
    let n = pairs.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(r, v) in pairs {
        let x = r.ln();
        let y = v.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// The annulus distance integral
/// `∫_{B_1 \ B_{rho/2}} d^gamma(p + y) |y|^{-n-beta} dy` with `rho = d(p)/2`,
/// restricted to the domain (the integrand vanishes where d = 0), together
/// with its certified bound ratio `value / (1 + rho^{gamma - beta})`.
pub struct AnnulusIntegral {
    pub value: f64,
    pub error: f64,
    pub rho: f64,
    pub bound_ratio: f64,
}

pub fn annulus_distance_integral(
    domain: &GraphDomain,
    p: Point,
    gamma: f64,
    beta: f64,
) -> Result<AnnulusIntegral> {
    if gamma <= -1.0 {
        return Err(Error::DivergentExponent { gamma });
    }
    if gamma == beta {
        return Err(Error::LogarithmicCase { gamma });
    }
    let d_p = domain.distance(p)?;
    if d_p <= 0.0 {
        return Err(Error::invalid("p", "annulus integral requires an interior point"));
    }
    let rho = d_p / 2.0;
    let r_lo = rho / 2.0;
    let r_hi = 1.0;
    let rule = crate::quad::SphereRule::new(domain.dim, 128);
    let mut total = crate::quad::Estimate::zero();
    for (&theta, &w) in rule.nodes.iter().zip(&rule.weights) {
        let level = |r: f64| domain.boundary_level(vec::add(p, vec::scale(theta, r)));
        let f = |r: f64| {
            let d = domain.distance_unchecked(vec::add(p, vec::scale(theta, r)));
            if d <= 0.0 {
                0.0
            } else {
                d.powf(gamma) * r.powf(-1.0 - beta)
            }
        };
        // Locate boundary crossings along the ray.
        let mut edges = vec![r_lo];
        let n_scan = 96;
        let mut prev_r = r_lo;
        let mut prev_v = level(r_lo);
        for i in 1..=n_scan {
            let r = r_lo + (r_hi - r_lo) * i as f64 / n_scan as f64;
            let v = level(r);
            if (prev_v < 0.0) != (v < 0.0) {
                let (mut lo, mut hi) = (prev_r, r);
                let mut flo = prev_v;
                for _ in 0..70 {
                    let m = 0.5 * (lo + hi);
                    let fm = level(m);
                    if (flo < 0.0) != (fm < 0.0) {
                        hi = m;
                    } else {
                        lo = m;
                        flo = fm;
                    }
                }
                edges.push(0.5 * (lo + hi));
            }
            prev_r = r;
            prev_v = v;
        }
        edges.push(r_hi);
        edges.sort_by(f64::total_cmp);
        edges.dedup_by(|a, b| (*a - *b).abs() < 1e-13);
        // Integrate the inside segments; substitute near singular endpoints
        // when gamma < 0 so the transformed integrand is bounded.
        for wpair in edges.windows(2) {
            let (a, b) = (wpair[0], wpair[1]);
            let mid_pt = 0.5 * (a + b);
            if level(mid_pt) <= 0.0 {
                continue;
            }
            let seg = if gamma < 0.0 {
                let mid = 0.5 * (a + b);
                let pow = 1.0 + gamma;
                // Left half, potentially singular at a.
                let la = (mid - a).powf(pow);
                let left = crate::quad::integrate_adaptive(
                    |tau: f64| {
                        let r = a + tau.powf(1.0 / pow);
                        f(r) * tau.powf(1.0 / pow - 1.0) / pow
                    },
                    0.0,
                    la,
                    1e-9,
                    4000,
                );
                let lb = (b - mid).powf(pow);
                let right = crate::quad::integrate_adaptive(
                    |tau: f64| {
                        let r = b - tau.powf(1.0 / pow);
                        f(r) * tau.powf(1.0 / pow - 1.0) / pow
                    },
                    0.0,
                    lb,
                    1e-9,
                    4000,
                );
                let mut e = left;
                e.add(right);
                e
            } else {
                crate::quad::integrate_adaptive(f, a, b, 1e-9, 4000)
            };
            total.value += w * seg.value;
            total.error += w * seg.error;
        }
    }
    let bound = 1.0 + rho.powf(gamma - beta);
    Ok(AnnulusIntegral {
        value: total.value,
        error: total.error,
        rho,
        bound_ratio: total.value / bound,
    })
}
