//! One-dimensional adaptive quadrature and sphere rules.
//!
//! The singular-integral evaluations in [`crate::kernel_ops`] reduce to
//! absolutely convergent 1-D integrals along rays plus an angular sum over
//! the unit sphere. This module provides the shared machinery: a 15-point
//! Gauss–Kronrod rule with greedy bisection, Gauss–Legendre node generation,
//! and the sphere discretizations for n = 1, 2, 3.

/// A value together with an absolute error estimate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub fn new(value: f64, error: f64) -> Self {
        Estimate { value, error }
    }

    pub fn zero() -> Self {
        Estimate {
            value: 0.0,
            error: 0.0,
        }
    }

    pub fn meets(&self, tol: f64) -> bool {
        self.error <= tol
    }

    pub fn add(&mut self, other: Estimate) {
        self.value += other.value;
        self.error += other.error;
    }
}

// 15-point Kronrod abscissae on [-1, 1] (odd entries are the embedded
// 7-point Gauss nodes) and the two weight sets.
const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// One Gauss–Kronrod 15 panel. Returns the Kronrod value and the
/// Gauss/Kronrod discrepancy-based error estimate.
pub fn gk15<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Estimate {
    let half = 0.5 * (b - a);
    let center = 0.5 * (a + b);
    let f_center = f(center);
    let mut kronrod = f_center * WGK15[7];
    let mut gauss = f_center * WG7[3];
    let mut res_abs = kronrod.abs();
    for j in 0..3 {
        let x = half * XGK15[2 * j + 1];
        let f1 = f(center - x);
        let f2 = f(center + x);
        let fsum = f1 + f2;
        gauss += WG7[j] * fsum;
        kronrod += WGK15[2 * j + 1] * fsum;
        res_abs += WGK15[2 * j + 1] * (f1.abs() + f2.abs());
    }
    for j in 0..4 {
        let x = half * XGK15[2 * j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        kronrod += WGK15[2 * j] * (f1 + f2);
        res_abs += WGK15[2 * j] * (f1.abs() + f2.abs());
    }
    let raw_err = ((kronrod - gauss) * half).abs();
    // GSL-style rescaling makes the estimate conservative without being wild.
    let scaled = if raw_err > 0.0 {
        let resasc = res_abs * half.abs();
        if resasc > 0.0 {
            let r = (200.0 * raw_err / resasc).powf(1.5);
            if r < 1.0 {
                resasc * r
            } else {
                raw_err.max(resasc.min(raw_err * 50.0))
            }
        } else {
            raw_err
        }
    } else {
        0.0
    };
    Estimate::new(kronrod * half, scaled.max(raw_err))
}

/// Adaptive integration of `f` over `[a, b]`: greedy bisection of the panel
/// with the largest error until `tol` is met or `max_evals` function
/// evaluations have been spent. The returned error estimate is honest either
/// way; callers decide whether a shortfall is fatal.
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: usize,
) -> Estimate {
    if a >= b {
        return Estimate::zero();
    }
    let mut panels: Vec<(f64, f64, Estimate)> = Vec::with_capacity(64);
    panels.push((a, b, gk15(&mut f, a, b)));
    let mut evals = 15usize;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.2.error).sum();
        if total_err <= tol || evals >= max_evals {
            break;
        }
        // Greedy: split the worst panel.
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.2.error))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let (pa, pb, _) = panels[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            break; // interval exhausted at machine precision
        }
        let left = gk15(&mut f, pa, mid);
        let right = gk15(&mut f, mid, pb);
        evals += 30;
        panels[worst] = (pa, mid, left);
        panels.push((mid, pb, right));
    }
    let mut out = Estimate::zero();
    // Deterministic accumulation order: sort panels by left endpoint.
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    for p in &panels {
        out.add(p.2);
    }
    out
}

/// Adaptive integration over a union of seed intervals sharing one error
/// budget. Panels are refined greedily across all seeds, so effort
/// concentrates on the annuli that actually carry the singular behavior.
pub fn integrate_adaptive_multi<F: FnMut(f64) -> f64>(
    mut f: F,
    seeds: &[(f64, f64)],
    tol: f64,
    max_evals: usize,
) -> Estimate {
    let mut panels: Vec<(f64, f64, Estimate)> = Vec::with_capacity(seeds.len() * 4);
    let mut evals = 0usize;
    for &(a, b) in seeds {
        if b > a {
            panels.push((a, b, gk15(&mut f, a, b)));
            evals += 15;
        }
    }
    if panels.is_empty() {
        return Estimate::zero();
    }
    loop {
        let total_err: f64 = panels.iter().map(|p| p.2.error).sum();
        if total_err <= tol || evals >= max_evals {
            break;
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.2.error))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        let (pa, pb, _) = panels[worst];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            break;
        }
        let left = gk15(&mut f, pa, mid);
        let right = gk15(&mut f, mid, pb);
        evals += 30;
        panels[worst] = (pa, mid, left);
        panels.push((mid, pb, right));
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out = Estimate::zero();
    for p in &panels {
        out.add(p.2);
    }
    out
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// Legendre recurrence. Deterministic to the last bit for a given `n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n(x) and derivative by recurrence.
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Quadrature nodes on the unit sphere `S^{n-1}`, n = 1, 2, 3.
///
/// - n = 1: the two points ±1, weight 1 each (counting measure);
/// - n = 2: trapezoid rule on the circle, spectrally accurate for smooth
///   periodic integrands; node counts are kept even so the half-rule nests;
/// - n = 3: product of Gauss–Legendre in the polar cosine and trapezoid in
///   azimuth.
#[derive(Clone, Debug)]
pub struct SphereRule {
    pub dim: usize,
    pub nodes: Vec<crate::Point>,
    pub weights: Vec<f64>,
    /// Indices forming the coarser nested rule, used for the angular error
    /// estimate.
    pub half_rule: Vec<usize>,
}

impl SphereRule {
    pub fn new(dim: usize, requested: usize) -> Self {
        match dim {
            1 => SphereRule {
                dim,
                nodes: vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
                weights: vec![1.0, 1.0],
                half_rule: vec![0, 1],
            },
            2 => {
                let m = requested.max(8).next_multiple_of(4);
                let w = 2.0 * std::f64::consts::PI / m as f64;
                let mut nodes = Vec::with_capacity(m);
                let mut half_rule = Vec::with_capacity(m / 2);
                for j in 0..m {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
                    nodes.push([phi.cos(), phi.sin(), 0.0]);
                    if j % 2 == 0 {
                        half_rule.push(j);
                    }
                }
                SphereRule {
                    dim,
                    nodes,
                    weights: vec![w; m],
                    half_rule,
                }
            }
            3 => {
                // requested ~ total node count; split as P polar x 2P azimuth.
                let p = ((requested.max(32) as f64) / 2.0).sqrt().ceil() as usize;
                let p = p.max(4).next_multiple_of(2);
                let a = 2 * p;
                let (cn, cw) = gauss_legendre(p);
                let wphi = 2.0 * std::f64::consts::PI / a as f64;
                let mut nodes = Vec::with_capacity(p * a);
                let mut weights = Vec::with_capacity(p * a);
                let mut half_rule = Vec::new();
                for (i, (&c, &wc)) in cn.iter().zip(cw.iter()).enumerate() {
                    let sin_t = (1.0 - c * c).max(0.0).sqrt();
                    for j in 0..a {
                        let phi = 2.0 * std::f64::consts::PI * j as f64 / a as f64;
                        nodes.push([sin_t * phi.cos(), sin_t * phi.sin(), c]);
                        weights.push(wc * wphi);
                        if i % 2 == 0 && j % 2 == 0 {
                            half_rule.push(nodes.len() - 1);
                        }
                    }
                }
                SphereRule {
                    dim,
                    nodes,
                    weights,
                    half_rule,
                }
            }
            _ => panic!("sphere rule supports dim 1..=3, got {dim}"),
        }
    }

    /// Total measure represented by the rule (2 for n=1, 2π for n=2, 4π for n=3).
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk15_polynomial_exact() {
        // Degree-7 polynomial is integrated exactly by the embedded Gauss rule.
        let est = gk15(|x| 3.0 * x * x - 2.0 * x + 1.0, 0.0, 2.0);
        assert!((est.value - (8.0 - 4.0 + 2.0)).abs() < 1e-13);
    }

    #[test]
    fn adaptive_handles_kink() {
        // |x - 0.3|^0.5 over [0, 1]; exact: (0.3^1.5 + 0.7^1.5) / 1.5.
        let exact = (0.3f64.powf(1.5) + 0.7f64.powf(1.5)) / 1.5;
        let est = integrate_adaptive(|x: f64| (x - 0.3).abs().sqrt(), 0.0, 1.0, 1e-10, 20000);
        assert!((est.value - exact).abs() < 1e-9, "err {}", est.value - exact);
        assert!((est.value - exact).abs() <= est.error.max(1e-12));
    }

    #[test]
    fn adaptive_error_estimate_honest_on_smooth() {
        let est = integrate_adaptive(|x: f64| (x * 1.7).sin() * (-x).exp(), 0.0, 5.0, 1e-9, 20000);
        let exact = {
            // ∫ sin(kx) e^{-x} = [e^{-x}(-sin kx - k cos kx)]/(1+k²)
            let k = 1.7f64;
            let f = |x: f64| -(-x).exp() * ((k * x).sin() + k * (k * x).cos()) / (1.0 + k * k);
            f(5.0) - f(0.0)
        };
        assert!((est.value - exact).abs() <= est.error.max(1e-12));
    }

    #[test]
    fn gauss_legendre_integrates_high_degree() {
        let (x, w) = gauss_legendre(8);
        // Exact for degree <= 15: test x^10 over [-1,1] = 2/11.
        let s: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-13);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn sphere_rule_measures() {
        assert!((SphereRule::new(1, 2).total_weight() - 2.0).abs() < 1e-14);
        let s2 = SphereRule::new(2, 64);
        assert!((s2.total_weight() - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        let s3 = SphereRule::new(3, 128);
        assert!((s3.total_weight() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        // Trapezoid rule on the circle integrates cos^2 exactly: pi.
        let v: f64 = s2
            .nodes
            .iter()
            .zip(&s2.weights)
            .map(|(n, w)| w * n[0] * n[0])
            .sum();
        assert!((v - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn sphere_half_rule_is_nested() {
        let s2 = SphereRule::new(2, 32);
        for &i in &s2.half_rule {
            assert!(i < s2.nodes.len());
        }
        assert_eq!(s2.half_rule.len(), s2.nodes.len() / 2);
    }
}
