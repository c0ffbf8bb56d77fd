//! Shared test oracles, kept independent of the production quadrature path.
//!
//! The production code integrates with adaptive Gauss–Kronrod panels over
//! dyadic annuli; everything here uses tanh-sinh (double-exponential)
//! quadrature with endpoint-stable abscissae instead, so agreement between
//! the two is meaningful evidence.
#![allow(dead_code)]

/// Tanh-sinh quadrature on [a, b]. Abscissae are generated as exact distances
/// from the nearer endpoint, so integrable endpoint singularities are handled
/// at full precision.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mut best = 0.0f64;
    let mut prev = f64::INFINITY;
    for level in 1..=14u32 {
        let h = 3.0 / (1 << level) as f64;
        let mut sum = 0.0;
        let nmax = (1 << level) * 5;
        for k in -(nmax as i64)..=(nmax as i64) {
            let t = k as f64 * h;
            let u = std::f64::consts::FRAC_PI_2 * t.sinh();
            let eu = (-2.0 * u.abs()).exp();
            let delta = half * (2.0 * eu / (1.0 + eu)); // half*(1 - tanh|u|)
            let x = if t >= 0.0 { b - delta } else { a + delta };
            if x <= a || x >= b {
                continue;
            }
            let sech = 2.0 * (-u.abs()).exp() / (1.0 + eu);
            let w = std::f64::consts::FRAC_PI_2 * t.cosh() * sech * sech;
            let v = f(x);
            if v.is_finite() {
                sum += v * w;
            }
        }
        best = sum * h * half;
        if (best - prev).abs() < 1e-14 * (1.0 + best.abs()) {
            break;
        }
        prev = best;
    }
    best
}

/// The even part of `((1+r)^p + (1-r)_+^p)/2 - 1`, evaluated by the binomial
/// series for small `r` to avoid catastrophic cancellation under the kernel.
pub fn second_diff_power(p: f64, r: f64) -> f64 {
    if r <= 0.25 {
        let mut term = 1.0f64;
        let mut sum = 0.0f64;
        for k in 1..=40usize {
            term *= (p - (k as f64 - 1.0)) / k as f64 * r;
            if k % 2 == 0 {
                sum += term;
                if term.abs() < 1e-18 * (1.0 + sum.abs()) {
                    break;
                }
            }
        }
        sum
    } else {
        let plus = (1.0 + r).powf(p);
        let minus = if r < 1.0 { (1.0 - r).powf(p) } else { 0.0 };
        0.5 * (plus + minus) - 1.0
    }
}

/// The one-dimensional radial moment
/// `I(p, s) = ∫_0^∞ [((1+r)^p + (1-r)_+^p)/2 - 1] r^{-1-2s} dr`,
/// which drives every half-space power identity: the radial profile of
/// `(x_n)_+^p` along a ray with normal component `c` is
/// `t^{p-2s} |c|^{2s} I(p, s)` at height `t`. Vanishes at p = s.
pub fn halfline_power_moment(p: f64, s: f64) -> f64 {
    assert!(p > 0.0 && p < 2.0 * s, "need 0 < p < 2s for convergence");
    let i1 = tanh_sinh(|r| second_diff_power(p, r) * r.powf(-1.0 - 2.0 * s), 0.0, 1.0);
    let i2 = tanh_sinh(|r| second_diff_power(p, r) * r.powf(-1.0 - 2.0 * s), 1.0, 2.0);
    let i3 = tanh_sinh(
        |t| second_diff_power(p, 1.0 / t) * t.powf(2.0 * s - 1.0),
        0.0,
        0.5,
    );
    i1 + i2 + i3
}

/// Angular moment `∫_{S^{n-1}} |theta_n|^{2s} dtheta` for n = 1, 2.
pub fn angular_normal_moment(dim: usize, s: f64) -> f64 {
    match dim {
        1 => 2.0,
        2 => {
            4.0 * tanh_sinh(
                |phi: f64| phi.sin().powf(2.0 * s),
                0.0,
                std::f64::consts::FRAC_PI_2,
            )
        }
        _ => panic!("oracle supports n = 1, 2"),
    }
}

/// Oracle for `L (x_n)_+^p` at height `t` with density `a ≡ 1`:
/// `t^{p-2s} * I(p,s) * ∫ |theta_n|^{2s}`.
pub fn halfspace_power_value(dim: usize, p: f64, s: f64, t: f64) -> f64 {
    t.powf(p - 2.0 * s) * halfline_power_moment(p, s) * angular_normal_moment(dim, s)
}

/// Least-squares slope of log v against log r.
pub fn loglog_slope(pairs: &[(f64, f64)]) -> f64 {
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
