//! Numerical laboratory for nonlocal elliptic operators of order 2s.
//!
//! The crate evaluates integro-differential operators with homogeneous
//! kernels `a(y/|y|)/|y|^{n+2s}` and their extremal (Pucci) envelopes by
//! singular-integral quadrature, constructs and certifies boundary barriers
//! on graph domains, solves the linear Dirichlet problem by monotone
//! collocation, and measures boundary regularity (Hölder seminorms, distance
//! powers, boundary Harnack ratios) on the computed solutions.
//!
//! Module map:
//! - [`quad`]: adaptive 1-D quadrature and sphere rules shared by everything,
//! - [`kernel_ops`]: operator and Pucci-envelope evaluation at a point,
//! - [`geometry`]: graph domains, distance, regularized distance, cones,
//! - [`barriers`]: explicit barrier fields and rate certificates,
//! - [`solver`]: collocation Dirichlet solver with a discrete comparison
//!   principle,
//! - [`analyzer`]: regularity measurements on solution fields,
//! - [`expr`], [`specfile`], [`report`]: the text formats used by the CLI.

pub mod analyzer;
pub mod barriers;
pub mod error;
pub mod expr;
pub mod geometry;
pub mod kernel_ops;
pub mod quad;
pub mod report;
pub mod solver;
pub mod specfile;

pub use error::Error;
pub type Result<T> = std::result::Result<T, Error>;

/// Points are padded to three coordinates; the ambient dimension travels with
/// the operator or domain object that interprets them.
pub type Point = [f64; 3];

/// Vector helpers over padded points.
pub mod vec {
    use crate::Point;

    pub fn add(a: Point, b: Point) -> Point {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn sub(a: Point, b: Point) -> Point {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn scale(a: Point, t: f64) -> Point {
        [a[0] * t, a[1] * t, a[2] * t]
    }

    pub fn neg(a: Point) -> Point {
        [-a[0], -a[1], -a[2]]
    }

    pub fn dot(a: Point, b: Point) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn norm(a: Point) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn normalize(a: Point) -> Point {
        let n = norm(a);
        scale(a, 1.0 / n)
    }

    pub fn pt1(x: f64) -> Point {
        [x, 0.0, 0.0]
    }

    pub fn pt2(x: f64, y: f64) -> Point {
        [x, y, 0.0]
    }
}
