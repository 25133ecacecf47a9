//! One Kaluza-Klein mode on dS3: w'' + (μ² + l(l+1)/cosh²t) w = 0, μ = √(λ-1).
//!
//! Solutions are w(t) = A⁺ 𝖯_l^{iμ}(tanh t) + A⁻ 𝖯_l^{iμ}(-tanh t). Asymptotically
//! w ≈ w_in^+ e^{iμt} + w_in^- e^{-iμt} as t → -∞ and likewise with the out
//! amplitudes as t → +∞. The potential is reflectionless for integer l.

use crate::error::{domain, Result};
use crate::ode::{integrate_dense, DenseTrace, Options};
use crate::specfun::{ferrers_p_tanh, gamma_complex, rgamma_complex};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub lambda: f64,
    pub l: u32,
    pub a_plus: C64,
    pub a_minus: C64,
}

impl ModeSolution {
    pub fn new(lambda: f64, l: u32, a_plus: C64, a_minus: C64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(ModeSolution { lambda, l, a_plus, a_minus })
    }

    pub fn mu(&self) -> f64 {
        (self.lambda - 1.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCauchyData {
    pub w0: C64,
    pub w0p: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticAmplitudes {
    pub in_plus: C64,
    pub in_minus: C64,
    pub out_plus: C64,
    pub out_minus: C64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda > 1.0) || !lambda.is_finite() {
        return domain(format!("mode dynamics needs lambda > 1, got {lambda}"));
    }
    Ok(())
}

fn sign_l(l: u32) -> f64 {
    if l % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// (w, w') at time t.
pub fn mode_value(sol: &ModeSolution, t: f64) -> (C64, C64) {
    let mu = sol.mu();
    let (pp, dpp) = ferrers_p_tanh(sol.l, mu, t);
    let (pm, dpm) = ferrers_p_tanh(sol.l, mu, -t);
    (sol.a_plus * pp + sol.a_minus * pm, sol.a_plus * dpp - sol.a_minus * dpm)
}

/// 𝖯_l^{iμ}(0) and its t-derivative at 0.
pub fn ferrers_at_zero(l: u32, mu: f64) -> (C64, C64) {
    let i = C64::new(0.0, 1.0);
    let lf = l as f64;
    let two_pow = (i * mu * 2f64.ln()).exp();
    let sp = PI.sqrt();
    let p0 = two_pow
        * sp
        * rgamma_complex(C64::new(0.5 * lf + 1.0, -0.5 * mu))
        * rgamma_complex(C64::new(0.5 - 0.5 * lf, -0.5 * mu));
    let dp0 = -2.0
        * two_pow
        * sp
        * rgamma_complex(C64::new(0.5 * lf + 0.5, -0.5 * mu))
        * rgamma_complex(C64::new(-0.5 * lf, -0.5 * mu));
    (p0, dp0)
}

/// A± from (w(0), w'(0)): A± = ½ (w0/𝖯(0) ± w0'/𝖯'(0)).
pub fn coeffs_from_cauchy(lambda: f64, l: u32, data: ModeCauchyData) -> Result<(C64, C64)> {
    check_lambda(lambda)?;
    let (p0, dp0) = ferrers_at_zero(l, (lambda - 1.0).sqrt());
    let a = data.w0 / p0;
    let b = data.w0p / dp0;
    let (ap, am) = (0.5 * (a + b), 0.5 * (a - b));
    if !(ap.re.is_finite() && ap.im.is_finite() && am.re.is_finite() && am.im.is_finite()) {
        return domain(format!("non-finite coefficients for lambda = {lambda}, l = {l}"));
    }
    Ok((ap, am))
}

pub fn solution_from_cauchy(lambda: f64, l: u32, data: ModeCauchyData) -> Result<ModeSolution> {
    let (ap, am) = coeffs_from_cauchy(lambda, l, data)?;
    ModeSolution::new(lambda, l, ap, am)
}

/// A± from prescribed in amplitudes (inverse of the in half of [`asymptotic_amplitudes`]).
pub fn solution_from_in(lambda: f64, l: u32, in_plus: C64, in_minus: C64) -> Result<ModeSolution> {
    check_lambda(lambda)?;
    let mu = (lambda - 1.0).sqrt();
    let lf = l as f64;
    let g = |re: f64, im: f64| gamma_complex(C64::new(re, im));
    let a_minus = in_minus * g(1.0, -mu)?;
    let a_plus = in_plus * g(lf + 1.0, -mu)? * g(1.0, mu)? / (sign_l(l) * g(lf + 1.0, mu)?);
    ModeSolution::new(lambda, l, a_plus, a_minus)
}

pub fn asymptotic_amplitudes(sol: &ModeSolution) -> Result<AsymptoticAmplitudes> {
    let mu = sol.mu();
    let lf = sol.l as f64;
    let r1m = rgamma_complex(C64::new(1.0, -mu));
    let r1p = rgamma_complex(C64::new(1.0, mu));
    let ratio = sign_l(sol.l) * gamma_complex(C64::new(lf + 1.0, mu))? * rgamma_complex(C64::new(lf + 1.0, -mu));
    Ok(AsymptoticAmplitudes {
        in_plus: ratio * sol.a_plus * r1p,
        in_minus: sol.a_minus * r1m,
        out_plus: sol.a_plus * r1m,
        out_minus: ratio * sol.a_minus * r1p,
    })
}

/// Scattering phase factor for the ± frequency:
/// (-1)^l Γ(1 ± iμ) Γ(l+1 ∓ iμ) / (Γ(1 ∓ iμ) Γ(l+1 ± iμ)).
pub fn scatter_phase(l: u32, lambda: f64, sign: f64) -> Result<C64> {
    check_lambda(lambda)?;
    let mu = sign * (lambda - 1.0).sqrt();
    let lf = l as f64;
    let g = |re: f64, im: f64| gamma_complex(C64::new(re, im));
    Ok(sign_l(l) * g(1.0, mu)? * g(lf + 1.0, -mu)? / (g(1.0, -mu)? * g(lf + 1.0, mu)?))
}

/// (w_out^+, w_out^-) from (w_in^+, w_in^-).
pub fn scatter_mode(l: u32, lambda: f64, in_plus: C64, in_minus: C64) -> Result<(C64, C64)> {
    Ok((scatter_phase(l, lambda, 1.0)? * in_plus, scatter_phase(l, lambda, -1.0)? * in_minus))
}

/// E(w; t) = ½|w'|² + ½(λ - 1 + l(l+1)/cosh²t)|w|².
pub fn mode_energy(sol: &ModeSolution, t: f64) -> f64 {
    let (w, wp) = mode_value(sol, t);
    energy_of(sol.lambda, sol.l, t, w, wp)
}

pub fn energy_of(lambda: f64, l: u32, t: f64, w: C64, wp: C64) -> f64 {
    let lf = l as f64;
    0.5 * wp.norm_sqr() + 0.5 * (lambda - 1.0 + lf * (lf + 1.0) / t.cosh().powi(2)) * w.norm_sqr()
}

/// lim_{|t|→∞} E = (μ/π) sinh(πμ) (|A⁺|² + |A⁻|²).
pub fn limit_energy(sol: &ModeSolution) -> f64 {
    let mu = sol.mu();
    mu / PI * (PI * mu).sinh() * (sol.a_plus.norm_sqr() + sol.a_minus.norm_sqr())
}

/// μ(|w_in^+|² + |w_in^-|²) divided by the two-sided bracket of the energy estimate;
/// bounded above and below uniformly in λ and l.
pub fn estimate_ratio(sol: &ModeSolution) -> Result<f64> {
    let mu = sol.mu();
    let amp = asymptotic_amplitudes(sol)?;
    let (w0, w0p) = mode_value(sol, 0.0);
    let th = (0.5 * PI * mu).tanh();
    let (f0, f1) = if sol.l % 2 == 0 { (th, 1.0 / th) } else { (1.0 / th, th) };
    let k = sol.l as f64 + 1.0 + mu;
    let bracket = f0 * k * w0.norm_sqr() + f1 / k * w0p.norm_sqr();
    Ok(mu * (amp.in_plus.norm_sqr() + amp.in_minus.norm_sqr()) / bracket)
}

/// Bounds |w| ≤ 4e^{πμ/2}(|A⁺|+|A⁻|) and |w'| ≤ 8e^{πμ/2}(l+1+μ)(|A⁺|+|A⁻|).
pub fn amplitude_bounds(sol: &ModeSolution) -> (f64, f64) {
    let mu = sol.mu();
    let s = (0.5 * PI * mu).exp() * (sol.a_plus.norm() + sol.a_minus.norm());
    (4.0 * s, 8.0 * s * (sol.l as f64 + 1.0 + mu))
}

/// Integrates w'' + (mu2 + strength/cosh²t) w = 0 from (t0, w, w') to t1.
/// State layout: [Re w, Im w, Re w', Im w'].
pub fn integrate_poschl_teller(
    mu2: f64,
    strength: f64,
    t0: f64,
    w: C64,
    wp: C64,
    t1: f64,
    tol: f64,
) -> Result<DenseTrace<4>> {
    let f = |t: f64, y: &[f64; 4]| {
        let k = mu2 + strength / t.cosh().powi(2);
        [y[2], y[3], -k * y[0], -k * y[1]]
    };
    integrate_dense(f, t0, [w.re, w.im, wp.re, wp.im], t1, &Options::with_tol(tol))
}

/// Numerical solution on both sides of t = 0.
#[derive(Debug, Clone)]
pub struct ModeTrace {
    pub backward: DenseTrace<4>,
    pub forward: DenseTrace<4>,
}

impl ModeTrace {
    pub fn eval(&self, t: f64) -> Option<(C64, C64)> {
        let y = if t >= 0.0 { self.forward.eval(t)? } else { self.backward.eval(t)? };
        Some((C64::new(y[0], y[1]), C64::new(y[2], y[3])))
    }
}

/// Independent numerical solution from Cauchy data at t = 0 over `t_span`.
pub fn ode_oracle(lambda: f64, l: u32, data: ModeCauchyData, t_span: (f64, f64), tol: f64) -> Result<ModeTrace> {
    let lf = l as f64;
    let (a, b) = t_span;
    if !(a <= 0.0 && b >= 0.0) {
        return domain("oracle span must contain t = 0");
    }
    let run = |end: f64| integrate_poschl_teller(lambda - 1.0, lf * (lf + 1.0), 0.0, data.w0, data.w0p, end, tol);
    Ok(ModeTrace { backward: run(a)?, forward: run(b)? })
}

/// Least-squares fit w(t) ≈ c⁺ e^{iμt} + c⁻ e^{-iμt} on `samples` points of [a, b].
pub fn fit_sinusoid<F: Fn(f64) -> Option<C64>>(w: F, mu: f64, window: (f64, f64), samples: usize) -> Result<(C64, C64)> {
    let (a, b) = window;
    let n = samples.max(4);
    // normal equations of the 2-column complex system
    let (mut g11, mut g12, mut g22) = (0.0, C64::new(0.0, 0.0), 0.0);
    let (mut r1, mut r2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for k in 0..n {
        let t = a + (b - a) * k as f64 / (n - 1) as f64;
        let Some(v) = w(t) else {
            return domain(format!("no solution value at t = {t}"));
        };
        let e1 = C64::new(0.0, mu * t).exp();
        let e2 = e1.conj();
        g11 += 1.0;
        g22 += 1.0;
        g12 += e1.conj() * e2;
        r1 += e1.conj() * v;
        r2 += e2.conj() * v;
    }
    let det = g11 * g22 - g12.norm_sqr();
    let cp = (g22 * r1 - g12 * r2) / det;
    let cm = (g11 * r2 - g12.conj() * r1) / det;
    Ok((cp, cm))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zero_solution() {
        let s = ModeSolution::new(3.0, 2, c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!(mode_value(&s, 1.3), (c(0.0, 0.0), c(0.0, 0.0)));
        assert_eq!(mode_energy(&s, 0.4), 0.0);
        let (ap, am) = coeffs_from_cauchy(3.0, 2, ModeCauchyData { w0: c(0.0, 0.0), w0p: c(0.0, 0.0) }).unwrap();
        assert_eq!(ap.norm() + am.norm(), 0.0);
    }

    #[test]
    fn even_data_gives_symmetric_coefficients() {
        let (ap, am) = coeffs_from_cauchy(4.0, 3, ModeCauchyData { w0: c(1.0, 0.0), w0p: c(0.0, 0.0) }).unwrap();
        assert!((ap - am).norm() < 1e-15 * ap.norm());
    }

    #[test]
    fn values_at_zero_match_the_recurrence() {
        for l in 0..6 {
            for &mu in &[0.3, 1.0, 4.5] {
                let (p, dp) = ferrers_p_tanh(l, mu, 0.0);
                let (p0, dp0) = ferrers_at_zero(l, mu);
                assert!((p - p0).norm() < 1e-12 * p.norm().max(1e-3), "l={l} mu={mu}");
                assert!((dp - dp0).norm() < 1e-12 * dp.norm().max(1e-3), "l={l} mu={mu}");
            }
        }
    }

    #[test]
    fn identity_scattering_at_l0() {
        for &lam in &[1.5, 4.0, 30.0] {
            let (a, b) = scatter_mode(0, lam, c(0.3, 0.1), c(-1.0, 2.0)).unwrap();
            assert!((a - c(0.3, 0.1)).norm() < 1e-14);
            assert!((b - c(-1.0, 2.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn phase_via_recurrence() {
        // l = 1, μ = 1: Γ(2 ± i) = (1 ± i) Γ(1 ± i), so the + phase is -(1 - i)/(1 + i)
        let p = scatter_phase(1, 2.0, 1.0).unwrap();
        let want = -c(1.0, -1.0) / c(1.0, 1.0);
        assert!((p - want).norm() < 1e-12);
    }

    #[test]
    fn lambda_must_exceed_one() {
        assert!(ModeSolution::new(1.0, 0, c(1.0, 0.0), c(0.0, 0.0)).is_err());
        assert!(scatter_mode(2, 0.5, c(1.0, 0.0), c(0.0, 0.0)).is_err());
    }
}
