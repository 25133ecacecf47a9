use kkbubble::charts::Spacetime;
use kkbubble::spectral::{
    hardy_defect, kernel, solve_discrete, witten_u_potential, ContinuousTransform, RadialOperatorSpec,
};
use kkbubble::Complex64 as C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// RK4 for u'' = f(x, u, u') returning u(b).
fn rk4_shoot<F: Fn(f64, f64, f64) -> f64>(f: F, a: f64, u0: f64, du0: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let (mut x, mut u, mut v) = (a, u0, du0);
    for _ in 0..steps {
        let k1 = (v, f(x, u, v));
        let k2 = (v + 0.5 * h * k1.1, f(x + 0.5 * h, u + 0.5 * h * k1.0, v + 0.5 * h * k1.1));
        let k3 = (v + 0.5 * h * k2.1, f(x + 0.5 * h, u + 0.5 * h * k2.0, v + 0.5 * h * k2.1));
        let k4 = (v + h * k3.1, f(x + h, u + h * k3.0, v + h * k3.1));
        u += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        v += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        x += h;
        if u.abs() > 1e30 {
            break;
        }
    }
    u
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Ground state of -v'' + M² cosh²x v by even shooting to X, Richardson-extrapolated in the step.
fn wormhole_ground_oracle(m: f64, lo: f64, hi: f64) -> f64 {
    let at = |steps: usize| {
        bisect(|lam| rk4_shoot(|x, u, _| (m * m * x.cosh().powi(2) - lam) * u, 0.0, 1.0, 0.0, 6.0, steps), lo, hi)
    };
    let (a, b) = (at(4000), at(8000));
    b + (b - a) / 15.0
}

/// Lowest n = 0 Witten eigenvalue by shooting the u equation from a regular start.
fn witten_s_wave_oracle(m: f64, lo: f64, hi: f64) -> f64 {
    let x0 = 1e-4;
    bisect(
        |lam| {
            let c = (m * m - lam) / 4.0;
            let f = |x: f64, u: f64, du: f64| -2.0 / (2.0 * x).tanh() * du + (witten_u_potential(m, 0, x) - lam) * u;
            rk4_shoot(f, x0, 1.0 + c * x0 * x0, 2.0 * c * x0, 4.0, 20_000)
        },
        lo,
        hi,
    )
}

#[test]
fn witten_massive_s_wave_bounds_and_refinement() {
    let m = 1.0;
    let a = solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, 0, 16384), 6).unwrap();
    let b = solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, 0, 32768), 6).unwrap();
    for (la, lb) in a.eigenvalues.iter().zip(&b.eigenvalues) {
        assert!(*la > 2.0 && *lb > 2.0);
        assert!((la - lb).abs() < 1e-4, "{la} {lb}");
    }
    assert!(a.gram_defect() < 1e-8);
    let oracle = witten_s_wave_oracle(m, 2.0, a.eigenvalues[0] + 0.5 * (a.eigenvalues[1] - a.eigenvalues[0]));
    assert!((b.eigenvalues[0] - oracle).abs() < 1e-4, "{} vs {oracle}", b.eigenvalues[0]);
}

#[test]
fn witten_kk_modes_bounds_and_refinement() {
    for &(m, n) in &[(0.0, 1), (0.0, 2), (0.5, 1), (2.0, 3)] {
        let floor = 1.0 + (n * n) as f64 + m * m;
        let a = solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, n, 32768), 4).unwrap();
        let b = solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, n, 65536), 4).unwrap();
        for (la, lb) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            assert!(*la > floor && *lb > floor, "({m},{n}): {la} vs floor {floor}");
            assert!((la - lb).abs() < 1e-4, "({m},{n}): {la} {lb}");
        }
        assert!(b.gram_defect() < 1e-8);
        assert!(a.tail_mass.iter().all(|t| *t < 1e-10));
    }
}

#[test]
fn second_order_convergence() {
    for &(m, n) in &[(1.0, 0), (0.0, 1)] {
        let solve = |pts| solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, n, pts), 3).unwrap().eigenvalues;
        let (a, b, c) = (solve(1024), solve(2048), solve(4096));
        for k in 0..3 {
            let slope = ((a[k] - b[k]) / (b[k] - c[k])).abs().log2();
            assert!((slope - 2.0).abs() < 0.25, "({m},{n}) k={k}: slope {slope}");
        }
    }
}

#[test]
fn wormhole_ground_state_against_shooting() {
    for &m in &[0.5, 1.0, 2.0] {
        let spec = RadialOperatorSpec::new(Spacetime::Wormhole, m, 0, 8192);
        let s = solve_discrete(&spec, 4).unwrap();
        assert!(s.eigenvalues.iter().all(|l| *l > 0.0));
        let oracle = wormhole_ground_oracle(m, 0.0, 0.5 * (s.eigenvalues[0] + s.eigenvalues[1]));
        assert!((s.eigenvalues[0] - oracle).abs() < 1e-4, "M={m}: {} vs {oracle}", s.eigenvalues[0]);
        assert!(s.gram_defect() < 1e-8);
        // even ground state
        let v = &s.eigenvectors[0];
        let n = v.len();
        assert!((v[0] - v[n - 1]).abs() < 1e-10);
    }
}

#[test]
fn truncation_is_reported() {
    let spec = RadialOperatorSpec::new(Spacetime::Wormhole, 0.05, 0, 2048).with_grid(3.0, 2048);
    assert!(matches!(solve_discrete(&spec, 2), Err(kkbubble::Error::Truncation { .. })));
}

#[test]
fn kernel_solves_the_radial_equation() {
    // -w'' - 2 coth(2x) w' = λ w, checked by fourth-order differences
    for &lambda in &[5.0f64, 1.5, 30.0] {
        let nu = (lambda - 1.0).sqrt();
        let h = 1e-3;
        for i in 1..40 {
            let x = 0.1 * i as f64;
            let f = |d: f64| kernel(nu, x + d * h);
            let (fm2, fm1, f0, fp1, fp2) = (f(-2.0), f(-1.0), f(0.0), f(1.0), f(2.0));
            let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
            let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
            let res = -d2 - 2.0 / (2.0 * x).tanh() * d1 - lambda * f0;
            let scale = lambda * f0.abs().max(d1.abs() / nu.max(1.0)).max(1e-3);
            assert!(res.abs() < 1e-6 * scale, "λ={lambda} x={x}: {res}");
        }
    }
}

fn bump(center: f64, width: f64, amp: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let s = (x - center) / width;
        if s.abs() >= 1.0 {
            0.0
        } else {
            amp * (-1.0 / (1.0 - s * s)).exp()
        }
    }
}

#[test]
fn transform_parseval_on_bumps() {
    let tr = ContinuousTransform::new(6.0, 4096, 200.0, 2048, 0.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..4 {
        let c = rng.gen_range(0.0..2.0);
        let w = rng.gen_range(1.5..2.5);
        let f = bump(c, w, rng.gen_range(0.5..2.0));
        let u: Vec<C64> = tr.x.iter().map(|&x| C64::new(f(x), 0.0)).collect();
        let uhat = tr.forward(&u).unwrap();
        let (a, b) = (tr.norm2_x(&u), tr.norm2_lambda(&uhat));
        assert!((a - b).abs() < 1e-3 * a, "parseval {a} {b}");
    }
}

/// Smooth even profiles whose transforms are negligible beyond λ = 200.
fn band_limited(a: f64, s: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| (1.0 + a * x * x) * (-(x / s).powi(2)).exp()
}

#[test]
fn transform_round_trip_on_band_limited_data() {
    let tr = ContinuousTransform::new(6.0, 2048, 200.0, 1024, 0.0).unwrap();
    for &(a, s) in &[(0.0, 1.0), (0.5, 0.9), (-0.3, 1.2)] {
        let f = band_limited(a, s);
        let u: Vec<C64> = tr.x.iter().map(|&x| C64::new(f(x), 0.0)).collect();
        let back = tr.inverse(&tr.forward(&u).unwrap()).unwrap();
        let norm = tr.norm2_x(&u);
        let err: f64 = back.iter().zip(&u).zip(&tr.measure).map(|((p, q), m)| (p - q).norm_sqr() * m).sum();
        assert!((err / norm).sqrt() < 1e-3, "round trip {}", (err / norm).sqrt());
    }
}

#[test]
fn transform_point_values_stable_under_lambda_refinement() {
    let f = band_limited(0.5, 0.9);
    let a = ContinuousTransform::new(6.0, 2048, 200.0, 1024, 0.0).unwrap();
    let b = ContinuousTransform::new(6.0, 2048, 400.0, 1448, 0.0).unwrap();
    let ua: Vec<C64> = a.x.iter().map(|&x| C64::new(f(x), 0.0)).collect();
    let pa = a.inverse(&a.forward(&ua).unwrap()).unwrap();
    let pb = b.inverse(&b.forward(&ua).unwrap()).unwrap();
    let worst = pa.iter().zip(&pb).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    assert!(worst < 1e-4, "{worst}");
}

#[test]
fn transform_of_zero_is_zero() {
    let tr = ContinuousTransform::new(3.0, 64, 50.0, 32, 0.1).unwrap();
    let z = vec![C64::new(0.0, 0.0); 64];
    assert!(tr.forward(&z).unwrap().iter().all(|v| v.norm() == 0.0));
    assert!(tr.inverse(&vec![C64::new(0.0, 0.0); 32]).unwrap().iter().all(|v| v.norm() == 0.0));
    assert!(tr.lambda.iter().all(|l| *l >= 1.1));
}

#[test]
fn transform_rejects_undecayed_data() {
    let tr = ContinuousTransform::new(3.0, 64, 50.0, 32, 0.1).unwrap();
    let u = vec![C64::new(1.0, 0.0); 64];
    assert!(matches!(tr.forward(&u), Err(kkbubble::Error::Truncation { .. })));
}

fn random_profile(rng: &mut ChaCha8Rng, n: i32) -> (impl Fn(f64) -> (f64, f64), (f64, f64)) {
    let a = if n == 0 { rng.gen_range(0.0..1.0) } else { rng.gen_range(0.05..1.0) };
    let b = a + rng.gen_range(0.5..4.0);
    let amps: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let touch_origin = n == 0 && rng.gen_bool(0.5);
    let a = if touch_origin { 0.0 } else { a };
    let prof = move |x: f64| {
        // smooth cutoff times a random polynomial; even extension through the origin when a = 0
        let (c, w) = if touch_origin { (0.0, b) } else { (0.5 * (a + b), 0.5 * (b - a)) };
        let s = (x - c) / w;
        if s.abs() >= 1.0 {
            return (0.0, 0.0);
        }
        let g = (-1.0 / (1.0 - s * s)).exp();
        let dg = g * (-2.0 * s / (1.0 - s * s).powi(2)) / w;
        let p: f64 = amps.iter().enumerate().map(|(k, a)| a * s.powi(2 * k as i32)).sum::<f64>() + 1.5;
        let dp: f64 = amps.iter().enumerate().skip(1).map(|(k, a)| a * 2.0 * k as f64 * s.powi(2 * k as i32 - 1)).sum::<f64>() / w;
        (g * p, dg * p + g * dp)
    };
    (prof, (a, b))
}

#[test]
fn hardy_inequalities_on_random_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [0, 1, 2, -3] {
        for _ in 0..20 {
            let (f, sup) = random_profile(&mut rng, n);
            let d = hardy_defect(&f, n, sup, 4000);
            assert!(d.lhs > 0.0);
            assert!(d.defect() >= 0.0, "n={n}: {d:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]
    #[test]
    fn witten_floor_holds(m in 0.0f64..2.0, n in 0i32..3) {
        prop_assume!(m > 0.05 || n != 0);
        let s = solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, n, 1024), 3).unwrap();
        for l in &s.eigenvalues {
            prop_assert!(*l > 1.0 + (n * n) as f64 + m * m);
        }
    }
}
