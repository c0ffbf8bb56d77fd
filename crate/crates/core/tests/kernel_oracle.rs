//! Cross-validation of the operator evaluation pipeline against the
//! independent tanh-sinh oracle, plus the structural invariants of the
//! evaluator (envelope property, scaling, linearity, honest errors).

mod common;

use fracbound_core::kernel_ops::{
    evaluate_operator, evaluate_pucci_pair, radial_profile_integral, FarField, QuadratureScheme,
    ScalarField, Smoothness, SpectralMeasure, StableOperator,
};
use fracbound_core::quad::Estimate;
use fracbound_core::vec::{pt1, pt2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn boundary_scheme(d: f64, tol: f64) -> QuadratureScheme {
    QuadratureScheme {
        inner_radius: d / 16.0,
        tol,
        ..Default::default()
    }
}

#[test]
fn halfline_moment_vanishes_at_exponent_s() {
    // The oracle itself must reproduce the identity L((x)_+^s) = 0 on the
    // half-line; this is the anchor for everything else.
    for s in [0.3, 0.5, 0.7] {
        let m = common::halfline_power_moment(s, s);
        assert!(m.abs() < 1e-10, "I({s},{s}) = {m}");
    }
}

#[test]
fn halfline_moment_sign_matches_exponent_side() {
    for s in [0.3, 0.5, 0.7] {
        let above = common::halfline_power_moment(s + 0.1, s);
        let below = common::halfline_power_moment(s - 0.1, s);
        assert!(above > 0.0, "I(s+0.1, {s}) = {above}");
        assert!(below < 0.0, "I(s-0.1, {s}) = {below}");
    }
}

#[test]
fn radial_profile_matches_oracle_on_halfspace_power() {
    // Production radial integration along an oblique ray against the oracle
    // scaling law t^{p-2s} |c|^{2s} I(p,s).
    let s = 0.5;
    let p = 0.62;
    let u = ScalarField::halfspace_power(2, p);
    let t = 0.37;
    let x = pt2(0.1, t);
    for c in [1.0f64, 0.6, -0.83] {
        let theta = pt2((1.0 - c * c).max(0.0).sqrt(), c);
        let q = boundary_scheme(t, 1e-8);
        let est = radial_profile_integral(&u, x, theta, s, &q).unwrap();
        let oracle = t.powf(p - 2.0 * s) * c.abs().powf(2.0 * s) * common::halfline_power_moment(p, s);
        assert!(
            (est.value - oracle).abs() <= est.error + 1e-6,
            "c={c}: got {} oracle {} err {}",
            est.value,
            oracle,
            est.error
        );
    }
}

#[test]
fn operator_annihilates_halfspace_s_power() {
    // L((x_n)_+^s) = 0 in the half space, for the isotropic density and a
    // non-constant tabulated one, in n = 1 and n = 2.
    for (dim, s) in [(1usize, 0.4f64), (1, 0.7), (2, 0.3), (2, 0.5), (2, 0.7)] {
        let u = ScalarField::halfspace_power(dim, s);
        let measures: Vec<SpectralMeasure> = if dim == 1 {
            vec![SpectralMeasure::constant(1, 1.0)]
        } else {
            let vals: Vec<f64> = (0..64)
                .map(|j| {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / 64.0;
                    1.0 + 0.5 * (2.0 * phi).cos()
                })
                .collect();
            vec![
                SpectralMeasure::constant(2, 1.0),
                SpectralMeasure::tabulated_circle(vals, 0.5, 1.5).unwrap(),
            ]
        };
        for m in measures {
            let op = StableOperator::new(dim, s, m).unwrap();
            for t in [0.5, 0.125] {
                let x = if dim == 1 { pt1(t) } else { pt2(-0.2, t) };
                let q = boundary_scheme(t, 1e-7 * t.powf(-s));
                let est = evaluate_operator(&op, &u, x, &q).unwrap();
                assert!(
                    est.value.abs() <= 1e-5 * t.powf(-s),
                    "dim={dim} s={s} t={t}: L = {} (err {})",
                    est.value,
                    est.error
                );
            }
        }
    }
}

#[test]
fn operator_matches_oracle_above_exponent_s() {
    // Positive homogeneous value for p = s + eps, n = 1 and 2, a = 1.
    for (dim, s, eps) in [(1usize, 0.5f64, 0.1f64), (2, 0.5, 0.1), (2, 0.3, 0.1)] {
        let p = s + eps;
        let u = ScalarField::halfspace_power(dim, p);
        let op = StableOperator::fractional_laplacian(dim, s).unwrap();
        let t = 0.25;
        let x = if dim == 1 { pt1(t) } else { pt2(0.3, t) };
        let q = boundary_scheme(t, 1e-8);
        let est = evaluate_operator(&op, &u, x, &q).unwrap();
        let oracle = common::halfspace_power_value(dim, p, s, t);
        assert!(oracle > 0.0);
        assert!(
            (est.value - oracle).abs() <= est.error + 5e-6,
            "dim={dim}: got {} oracle {} err {}",
            est.value,
            oracle,
            est.error
        );
    }
}

#[test]
fn operator_scaling_homogeneity() {
    // evaluate(L, u(r .), x) = r^{2s} evaluate(L, u, r x).
    let s = 0.6;
    let op = StableOperator::fractional_laplacian(2, s).unwrap();
    let u = ScalarField::new(
        2,
        Smoothness::C2,
        FarField::CompactSupport { radius: 3.0 },
        |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 < 9.0 {
                (9.0 - r2).powi(2) / 81.0
            } else {
                0.0
            }
        },
    );
    let r = 2.0;
    let x = pt2(0.3, 0.4);
    let q = QuadratureScheme {
        tol: 1e-8,
        ..Default::default()
    };
    let dilated = u.dilate(r);
    let lhs = evaluate_operator(&op, &dilated, x, &q).unwrap();
    let rhs = evaluate_operator(&op, &u, fracbound_core::vec::scale(x, r), &q).unwrap();
    let expect = r.powf(2.0 * s) * rhs.value;
    assert!(
        (lhs.value - expect).abs() <= lhs.error + r.powf(2.0 * s) * rhs.error + 1e-7,
        "lhs {} expect {}",
        lhs.value,
        expect
    );
}

#[test]
fn operator_linear_in_measure() {
    let s = 0.5;
    let u = ScalarField::new(
        2,
        Smoothness::C2,
        FarField::CompactSupport { radius: 2.0 },
        |p| (-(p[0] * p[0] + 2.0 * p[1] * p[1])).exp() - 0.3 * p[0].sin(),
    );
    // Field is not compactly supported as written; fix by windowing.
    let u = ScalarField::new(2, Smoothness::C2, FarField::CompactSupport { radius: 2.0 }, {
        let f = move |p: [f64; 3]| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 < 4.0 {
                ((-(r2)).exp() + 0.2 * p[0]) * (1.0 - r2 / 4.0).powi(3)
            } else {
                0.0
            }
        };
        move |p| {
            let _ = &u;
            f(p)
        }
    });
    let a1: Vec<f64> = (0..32)
        .map(|j| 1.0 + 0.4 * f64::cos(2.0 * std::f64::consts::PI * j as f64 / 16.0))
        .collect();
    let a2: Vec<f64> = (0..32)
        .map(|j| 1.2 - 0.3 * f64::cos(4.0 * std::f64::consts::PI * j as f64 / 32.0))
        .collect();
    let mean: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| 0.5 * (x + y)).collect();
    let m1 = SpectralMeasure::tabulated_circle(a1, 0.6, 1.4).unwrap();
    let m2 = SpectralMeasure::tabulated_circle(a2, 0.9, 1.5).unwrap();
    let mm = SpectralMeasure::tabulated_circle(mean, 0.6, 1.5).unwrap();
    let x = pt2(0.2, -0.3);
    let q = QuadratureScheme::default();
    let v1 = evaluate_operator(&StableOperator::new(2, s, m1).unwrap(), &u, x, &q).unwrap();
    let v2 = evaluate_operator(&StableOperator::new(2, s, m2).unwrap(), &u, x, &q).unwrap();
    let vm = evaluate_operator(&StableOperator::new(2, s, mm).unwrap(), &u, x, &q).unwrap();
    assert!(
        (vm.value - 0.5 * (v1.value + v2.value)).abs() <= vm.error + 0.5 * (v1.error + v2.error) + 1e-9
    );
}

fn random_bump_field(rng: &mut ChaCha8Rng) -> ScalarField {
    let k = rng.gen_range(1..=3);
    let mut bumps = Vec::new();
    for _ in 0..k {
        let cx: f64 = rng.gen_range(-0.6..0.6);
        let cy: f64 = rng.gen_range(-0.6..0.6);
        let w: f64 = rng.gen_range(0.3..1.0);
        let amp: f64 = rng.gen_range(-1.5..1.5);
        bumps.push((cx, cy, w, amp));
    }
    ScalarField::new(
        2,
        Smoothness::C2,
        FarField::CompactSupport { radius: 4.0 },
        move |p| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 >= 16.0 {
                return 0.0;
            }
            let window = (1.0 - r2 / 16.0).powi(3);
            let mut v = 0.0;
            for &(cx, cy, w, amp) in &bumps {
                let d2 = (p[0] - cx).powi(2) + (p[1] - cy).powi(2);
                v += amp * (-d2 / (w * w)).exp();
            }
            v * window
        },
    )
}

fn random_measure(rng: &mut ChaCha8Rng) -> SpectralMeasure {
    let m = 32;
    let vals: Vec<f64> = (0..m).map(|_| rng.gen_range(0.5..1.5)).collect();
    SpectralMeasure::tabulated_circle(vals, 0.5, 1.5).unwrap()
}

#[test]
fn pucci_envelope_dominates_every_member() {
    // M- <= L <= M+ within combined error bars, on random tabulated
    // measures and random smooth fields.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let s = 0.5;
    let q = QuadratureScheme::default();
    for trial in 0..25 {
        let u = random_bump_field(&mut rng);
        let m = random_measure(&mut rng);
        let x = pt2(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4));
        let op = StableOperator::new(2, s, m).unwrap();
        let l = evaluate_operator(&op, &u, x, &q).unwrap();
        let (plus, minus) = evaluate_pucci_pair(&u, x, 2, s, 0.5, 1.5, &q).unwrap();
        let tol_lo = l.error + minus.error;
        let tol_hi = l.error + plus.error;
        assert!(
            minus.value - tol_lo <= l.value && l.value <= plus.value + tol_hi,
            "trial {trial}: {} <= {} <= {} violated",
            minus.value,
            l.value,
            plus.value
        );
    }
}

#[test]
fn error_estimates_honest_under_refinement() {
    // Halving all scales must move the result by less than the previously
    // reported error, on a battery of smooth fields.
    let s = 0.55;
    let op = StableOperator::fractional_laplacian(2, s).unwrap();
    let q = QuadratureScheme::default();
    let fields: Vec<ScalarField> = vec![
        ScalarField::new(
            2,
            Smoothness::C2,
            FarField::CompactSupport { radius: 3.0 },
            |p| {
                let r2 = p[0] * p[0] + p[1] * p[1];
                if r2 < 9.0 {
                    (1.0 - r2 / 9.0).powi(4) * (1.0 + p[0])
                } else {
                    0.0
                }
            },
        ),
        ScalarField::new(
            2,
            Smoothness::C2,
            FarField::Growth {
                coef: 2.0,
                exponent: 0.8,
            },
            |p| (1.0 + p[0] * p[0] + 0.5 * p[1] * p[1]).powf(0.4) - 1.0,
        ),
        ScalarField::halfspace_power(2, 0.8),
    ];
    for (i, u) in fields.iter().enumerate() {
        let x = pt2(0.12, 0.55);
        let coarse = evaluate_operator(&op, u, x, &q).unwrap();
        let fine = evaluate_operator(&op, u, x, &q.refined()).unwrap();
        assert!(
            (fine.value - coarse.value).abs() <= coarse.error.max(1e-12),
            "field {i}: moved {} > reported {}",
            (fine.value - coarse.value).abs(),
            coarse.error
        );
    }
}

#[test]
fn strict_evaluation_flags_budget_shortfall() {
    let s = 0.5;
    let op = StableOperator::fractional_laplacian(2, s).unwrap();
    let u = ScalarField::halfspace_power(2, 0.6);
    // Absurdly tight tolerance with a tiny budget must be refused, not
    // silently returned.
    let q = QuadratureScheme {
        tol: 1e-14,
        nodes_radial: 30,
        ..Default::default()
    };
    let res = fracbound_core::kernel_ops::evaluate_operator_strict(&op, &u, pt2(0.0, 0.4), &q);
    assert!(res.is_err());
}

#[test]
fn estimate_api_consistency() {
    let e = Estimate::new(1.0, 0.25);
    assert!(e.meets(0.3));
    assert!(!e.meets(0.2));
}


