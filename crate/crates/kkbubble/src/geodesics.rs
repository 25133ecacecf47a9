//! Causal geodesics of the Witten spacetime (and of the wormhole slice).
//!
//! Integration runs in the Schwarzschild chart away from the bubble and in
//! the Cartesian chart near it: the switch happens at ρ < 1.05 and back at
//! ρ > 1.10.

use crate::charts::{christoffel, convert, jacobian, metric, Chart, ChartPoint, Spacetime};
use crate::error::{domain, Error, Result};
use crate::ode::{self, Control, DenseStep, Options};
use crate::specfun::lambert_w22_minus2;

pub const SWITCH_TO_CARTESIAN: f64 = 1.05;
pub const SWITCH_TO_SCHWARZSCHILD: f64 = 1.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeodesicState {
    pub point: ChartPoint,
    /// Coordinate velocity in the chart of `point` (full chart indices).
    pub velocity: [f64; 5],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedSet {
    pub e: f64,
    pub k_phi: f64,
    pub k_psi: f64,
    pub kp_t: f64,
    pub kpp_t: f64,
}

impl ConservedSet {
    pub fn as_array(&self) -> [f64; 5] {
        [self.e, self.k_phi, self.k_psi, self.kp_t, self.kpp_t]
    }

    /// R* = √((K'_t² + K''_t² - K_φ²)/E), the bound on ρ for timelike equatorial motion.
    pub fn r_star(&self) -> Result<f64> {
        if !(self.e > 0.0) {
            return domain(format!("R* needs a timelike geodesic (E > 0), got E = {}", self.e));
        }
        let num = self.kp_t.powi(2) + self.kpp_t.powi(2) - self.k_phi.powi(2);
        if !(num > 0.0) {
            return domain("K'_t^2 + K''_t^2 - K_phi^2 must be positive");
        }
        Ok((num / self.e).sqrt())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub samples: Vec<(f64, GeodesicState)>,
    pub tolerance: f64,
    /// Affine parameters where y crosses zero in the Cartesian chart, with the sign of ẏ.
    pub y_crossings: Vec<(f64, f64)>,
    /// Largest ρ reached, refined at turning points with the continuous extension.
    pub rho_max: f64,
    pub chart_switches: usize,
}

impl Trajectory {
    pub fn last(&self) -> &GeodesicState {
        &self.samples.last().expect("non-empty trajectory").1
    }

    /// Periods between successive y-crossings with the same velocity sign.
    pub fn crossing_periods(&self) -> Vec<f64> {
        let c = &self.y_crossings;
        (2..c.len()).filter(|&i| c[i].1 == c[i - 2].1).map(|i| c[i].0 - c[i - 2].0).collect()
    }

    /// The period once two consecutive crossing periods agree to 1e-6 relative.
    pub fn period(&self) -> Option<f64> {
        let p = self.crossing_periods();
        p.windows(2).find(|w| (w[0] - w[1]).abs() <= 1e-6 * w[1].abs()).map(|w| 0.5 * (w[0] + w[1]))
    }
}

/// ρ at a point of the Schwarzschild or Cartesian chart.
pub fn rho_of(p: &ChartPoint, st: Spacetime) -> Result<f64> {
    match p.chart {
        Chart::Schwarzschild => Ok(p.coords[1]),
        Chart::Cartesian => {
            let s = p.coords[1].powi(2) + p.coords[2].powi(2);
            Ok(1.0 + 0.5 * lambert_w22_minus2(s)?)
        }
        _ => Ok(crate::charts::to_xchart(p, st)?[1].cosh()),
    }
}

/// g(ẋ, ẋ).
pub fn norm(s: &GeodesicState, st: Spacetime) -> Result<f64> {
    let g = metric(&s.point, st)?;
    let mut e = 0.0;
    for a in 0..g.dim {
        for b in 0..g.dim {
            e += g.g[a][b] * s.velocity[g.axes[a]] * s.velocity[g.axes[b]];
        }
    }
    Ok(e)
}

/// ẍ^a = -Γ^a_{bc} ẋ^b ẋ^c, returned in full chart indices.
pub fn geodesic_rhs(s: &GeodesicState, st: Spacetime) -> Result<[f64; 5]> {
    if s.point.chart == Chart::Schwarzschild && s.point.coords[1] <= 1.0 {
        return Err(Error::ChartSwitch(format!(
            "schwarzschild chart reached rho = {}; continue in the cartesian chart",
            s.point.coords[1]
        )));
    }
    let c = christoffel(&s.point, st)?;
    let v = s.velocity;
    let mut acc = [0.0; 5];
    for a in 0..c.dim {
        let mut sum = 0.0;
        for b in 0..c.dim {
            for d in 0..c.dim {
                sum += c.gamma[a][b][d] * v[c.axes[b]] * v[c.axes[d]];
            }
        }
        acc[c.axes[a]] = -sum;
    }
    Ok(acc)
}

/// ẍ + Γẋẋ for a prescribed curve; zero on a geodesic.
pub fn geodesic_residual(s: &GeodesicState, accel: [f64; 5], st: Spacetime) -> Result<[f64; 5]> {
    let a = geodesic_rhs(s, st)?;
    let mut r = [0.0; 5];
    for i in 0..5 {
        r[i] = accel[i] - a[i];
    }
    Ok(r)
}

/// Re-expresses a state in another chart (velocity pushed forward by the Jacobian).
pub fn convert_state(s: &GeodesicState, target: Chart, st: Spacetime) -> Result<GeodesicState> {
    let q = convert(&s.point, target, st)?;
    let j = jacobian(&s.point, target, st)?;
    let src_axes = match st {
        Spacetime::Witten => [0, 1, 2, 3, 4],
        Spacetime::Wormhole => {
            let a = s.point.chart.wormhole_axes();
            [a[0], a[1], a[2], a[3], 0]
        }
    };
    let mut v = [0.0; 5];
    for a in 0..j.dim {
        v[j.axes[a]] = (0..j.dim).map(|b| j.g[a][b] * s.velocity[src_axes[b]]).sum();
    }
    Ok(GeodesicState { point: q, velocity: v })
}

/// Motion constants E, K_φ, K_ψ, K'_t, K''_t.
///
/// K'_t and K''_t are the boost charges of the dS3 factor; on the equator
/// θ = π/2 they reduce to ρ²cos φ ṫ + ρ² sinh t cosh t sin φ φ̇ and
/// ρ² sin φ ṫ - ρ² sinh t cosh t cos φ φ̇.
pub fn conserved(s: &GeodesicState, st: Spacetime) -> Result<ConservedSet> {
    let e = norm(s, st)?;
    let p = &s.point;
    let v = &s.velocity;
    let (t, th, ph, tdot, thdot, phdot, rho, k_psi) = match p.chart {
        Chart::Schwarzschild => {
            let rho = p.coords[1];
            let kpsi = if st == Spacetime::Witten { (1.0 - 1.0 / (rho * rho)) * v[4] } else { 0.0 };
            (p.coords[0], p.coords[2], p.coords[3], v[0], v[2], v[3], rho, kpsi)
        }
        Chart::Cartesian => {
            let rho = rho_of(p, st)?;
            let h = (1.0 + 1.0 / rho).powi(2) * (-2.0 * rho).exp();
            let (y, z) = (p.coords[1], p.coords[2]);
            let kpsi = h * (y * v[2] - z * v[1]);
            (p.coords[0], p.coords[3], p.coords[4], v[0], v[3], v[4], rho, kpsi)
        }
        _ => {
            let target = if rho_of(p, st)? > 1.0 { Chart::Schwarzschild } else { Chart::Cartesian };
            return conserved(&convert_state(s, target, st)?, st);
        }
    };
    let r2 = rho * rho;
    let (sh, ch) = (t.sinh(), t.cosh());
    let (sth, cth) = (th.sin(), th.cos());
    let (sph, cph) = (ph.sin(), ph.cos());
    let k_phi = r2 * ch * ch * sth * sth * phdot;
    let kp_t = r2 * (sth * cph * tdot - sh * ch * (cth * cph * thdot - sth * sph * phdot));
    let kpp_t = r2 * (sth * sph * tdot - sh * ch * (cth * sph * thdot + sth * cph * phdot));
    Ok(ConservedSet { e, k_phi, k_psi, kp_t, kpp_t })
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

/// λ* = (1/√E) ∫_1^{R*} dϱ / √((1 - 1/ϱ²)(R*²/ϱ² - 1)), the affine time from the
/// bubble to the turning point.
///
/// The substitution ϱ = 1 + (R* - 1) sin²θ removes both endpoint singularities.
pub fn lambda_star(e: f64, r_star: f64) -> Result<f64> {
    if !(e > 0.0) {
        return domain(format!("orbit period needs E > 0, got {e}"));
    }
    if !(r_star >= 1.0) {
        return domain(format!("R* must be at least 1, got {r_star}"));
    }
    let f = |th: f64| {
        let r = 1.0 + (r_star - 1.0) * th.sin().powi(2);
        2.0 * r * r / ((r + 1.0) * (r_star + r)).sqrt()
    };
    Ok(adaptive_simpson(&f, 0.0, 0.5 * std::f64::consts::PI, 1e-14) / e.sqrt())
}

/// 4λ* for timelike through-origin motion (K_ψ = 0).
pub fn orbit_period(e: f64, cs: &ConservedSet) -> Result<f64> {
    if !(e > 0.0) {
        return domain(format!("orbit period needs a timelike geodesic, got E = {e}"));
    }
    let scale = cs.kp_t.abs().max(cs.kpp_t.abs()).max(1.0);
    if cs.k_psi.abs() > 1e-9 * scale {
        return domain(format!("orbit period needs K_psi = 0, got {}", cs.k_psi));
    }
    let r = ConservedSet { e, ..*cs }.r_star()?;
    Ok(4.0 * lambda_star(e, r)?)
}

fn pack(s: &GeodesicState) -> [f64; 10] {
    let mut y = [0.0; 10];
    y[..5].copy_from_slice(&s.point.coords);
    y[5..].copy_from_slice(&s.velocity);
    y
}

fn unpack(chart: Chart, y: &[f64; 10]) -> GeodesicState {
    let mut c = [0.0; 5];
    let mut v = [0.0; 5];
    c.copy_from_slice(&y[..5]);
    v.copy_from_slice(&y[5..]);
    GeodesicState { point: ChartPoint::new(chart, c), velocity: v }
}

fn bisect_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < 1e-15 * (1.0 + m.abs()) {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn starting_chart(s: &GeodesicState, st: Spacetime) -> Result<GeodesicState> {
    let rho = rho_of(&s.point, st)?;
    let target = if rho < SWITCH_TO_SCHWARZSCHILD { Chart::Cartesian } else { Chart::Schwarzschild };
    if s.point.chart == target || (s.point.chart == Chart::Schwarzschild && rho >= SWITCH_TO_CARTESIAN) {
        Ok(*s)
    } else {
        convert_state(s, target, st)
    }
}

/// Integrates a causal geodesic over `lambda_span` with local tolerance `tol`,
/// switching between the Schwarzschild and Cartesian charts near the bubble.
pub fn integrate(s0: &GeodesicState, lambda_span: (f64, f64), tol: f64, st: Spacetime) -> Result<Trajectory> {
    let e0 = norm(s0, st)?;
    if e0 < -1e-10 * (1.0 + s0.velocity.iter().map(|v| v * v).sum::<f64>()) {
        return domain(format!("initial velocity is spacelike: g(v, v) = {e0}"));
    }
    let (l0, l1) = lambda_span;
    let mut state = starting_chart(s0, st)?;
    let mut lam = l0;
    let mut samples = vec![(lam, state)];
    let mut crossings = Vec::new();
    let mut rho_max = rho_of(&state.point, st)?;
    let mut switches = 0;
    let mut opts = Options::with_tol(tol);
    let dir = if l1 >= l0 { 1.0 } else { -1.0 };

    while (l1 - lam) * dir > 0.0 {
        let chart = state.point.chart;
        let mut pending_switch = None;
        let mut last_h = None;
        let mut step_err: Option<Error> = None;
        let rhs = |_: f64, y: &[f64; 10]| -> [f64; 10] {
            let s = unpack(chart, y);
            match geodesic_rhs(&s, st) {
                Ok(a) => {
                    let mut d = [0.0; 10];
                    d[..5].copy_from_slice(&s.velocity);
                    d[5..].copy_from_slice(&a);
                    d
                }
                Err(_) => [f64::NAN; 10],
            }
        };
        let on_step = |step: &DenseStep<10>| -> Control {
            let y1 = step.end();
            let s1 = unpack(chart, &y1);
            let t1 = step.t1();
            last_h = Some(step.h.abs());
            let rho1 = match rho_of(&s1.point, st) {
                Ok(r) => r,
                Err(e) => {
                    step_err = Some(e);
                    return Control::Stop;
                }
            };
            // turning points of ρ inside the step
            let y0 = step.start();
            match chart {
                Chart::Schwarzschild => {
                    if y0[6] * y1[6] < 0.0 {
                        let lt = bisect_root(|l| step.eval(l)[6], step.t0, t1);
                        rho_max = rho_max.max(step.eval(lt)[1]);
                    }
                }
                Chart::Cartesian => {
                    if y0[1] * y1[1] < 0.0 {
                        let lc = bisect_root(|l| step.eval(l)[1], step.t0, t1);
                        let ydot = step.eval(lc)[6];
                        crossings.push((lc, ydot.signum()));
                    }
                }
                _ => {}
            }
            rho_max = rho_max.max(rho1);
            samples.push((t1, s1));
            if chart == Chart::Schwarzschild && rho1 < SWITCH_TO_CARTESIAN {
                pending_switch = Some(Chart::Cartesian);
                return Control::Stop;
            }
            if chart == Chart::Cartesian && rho1 > SWITCH_TO_SCHWARZSCHILD {
                pending_switch = Some(Chart::Schwarzschild);
                return Control::Stop;
            }
            Control::Continue
        };
        let out = ode::integrate(rhs, lam, pack(&state), l1, &opts, on_step).map_err(|e| match e {
            Error::StepFailure { t, reason } => Error::StepFailure {
                t,
                reason: format!("{reason}; last good state {:?}", samples.last().map(|s| s.1)),
            },
            other => other,
        })?;
        if let Some(e) = step_err {
            return Err(e);
        }
        lam = out.t;
        state = unpack(chart, &out.y);
        opts.h0 = last_h;
        if let Some(target) = pending_switch {
            state = convert_state(&state, target, st)?;
            switches += 1;
            if let Some(last) = samples.last_mut() {
                last.1 = state;
            }
        } else if !out.stopped {
            break;
        }
    }
    Ok(Trajectory { samples, tolerance: tol, y_crossings: crossings, rho_max, chart_switches: switches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn static_bubble_observer() {
        let s = GeodesicState {
            point: ChartPoint::new(Chart::Schwarzschild, [0.0, 2.0, PI / 2.0, 0.0, 0.0]),
            velocity: [0.5, 0.0, 0.0, 0.0, 0.0],
        };
        let c = conserved(&s, Spacetime::Witten).unwrap();
        assert_eq!(c.k_phi, 0.0);
        assert_eq!(c.k_psi, 0.0);
        assert!(c.e > 0.0);
    }

    #[test]
    fn boost_charges_at_t0() {
        let (rho, ph, td): (f64, f64, f64) = (1.7, 0.8, 1.3);
        let s = GeodesicState {
            point: ChartPoint::new(Chart::Schwarzschild, [0.0, rho, PI / 2.0, ph, 0.0]),
            velocity: [td, 0.1, 0.0, 0.4, 0.2],
        };
        let c = conserved(&s, Spacetime::Witten).unwrap();
        assert!((c.kp_t - rho * rho * ph.cos() * td).abs() < 1e-14);
        assert!((c.kpp_t - rho * rho * ph.sin() * td).abs() < 1e-14);
    }

    #[test]
    fn lambda_star_limits_and_monotonicity() {
        // grazing orbits spend π/(2√E) between the bubble and the turning point
        let e = 2.0;
        assert!((lambda_star(e, 1.0).unwrap() - PI / (2.0 * e.sqrt())).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 0..50 {
            let r = 1.0 + 0.1 * i as f64;
            let l = lambda_star(e, r).unwrap();
            assert!(l > prev);
            prev = l;
        }
        assert!(lambda_star(0.0, 2.0).is_err());
    }

    #[test]
    fn lambda_star_against_direct_quadrature() {
        // midpoint rule in the original variable after removing the endpoint singularities
        // with ϱ = 1 + (R*-1)(1 - cos u)/2
        let (e, r): (f64, f64) = (1.5, 2.4);
        let n = 200_000;
        let mut sum = 0.0;
        for i in 0..n {
            let u = PI * (i as f64 + 0.5) / n as f64;
            let rho = 1.0 + 0.5 * (r - 1.0) * (1.0 - u.cos());
            let drho = 0.5 * (r - 1.0) * u.sin();
            let f = 1.0 / ((1.0 - 1.0 / (rho * rho)) * (r * r / (rho * rho) - 1.0)).sqrt();
            sum += f * drho * PI / n as f64;
        }
        let want = sum / e.sqrt();
        assert!((lambda_star(e, r).unwrap() - want).abs() < 1e-8 * want);
    }

    #[test]
    fn schwarzschild_rhs_refuses_the_bubble() {
        let s = GeodesicState {
            point: ChartPoint::new(Chart::Schwarzschild, [0.0, 1.0, 1.0, 0.0, 0.0]),
            velocity: [1.0, 0.0, 0.0, 0.0, 0.0],
        };
        assert!(matches!(geodesic_rhs(&s, Spacetime::Witten), Err(Error::ChartSwitch(_))));
    }
}
