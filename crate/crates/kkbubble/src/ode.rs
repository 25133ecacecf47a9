//! Dormand-Prince 5(4) integrator with continuous output.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Tolerance {
    pub fn both(tol: f64) -> Self {
        Tolerance { rtol: tol, atol: tol }
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.r[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = [0.0; N];
        for i in 0..N {
            y[i] = self.r[0][i] + self.r[1][i];
        }
        y
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i]
                + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }

    pub fn contains(&self, t: f64) -> bool {
        let (a, b) = if self.h > 0.0 { (self.t0, self.t1()) } else { (self.t1(), self.t0) };
        t >= a && t <= b
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub tol: Tolerance,
    pub h0: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Options {
    pub fn with_tol(tol: f64) -> Self {
        Options { tol: Tolerance::both(tol), h0: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Outcome<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub rejected: usize,
    pub stopped: bool,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for &(c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrates y' = f(t, y) from t0 to t1 (either direction).
///
/// `on_step` sees every accepted step and can stop the integration early.
pub fn integrate<const N: usize, F, S>(
    mut f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &Options,
    mut on_step: S,
) -> Result<Outcome<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&DenseStep<N>) -> Control,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    let mut t = t0;
    let mut y = y0;
    if span == 0.0 {
        return Ok(Outcome { t, y, steps: 0, rejected: 0, stopped: false });
    }
    let tol = opts.tol;
    let mut k1 = f(t, &y);
    let mut h = match opts.h0 {
        Some(h) => h.abs().min(span),
        None => initial_step(&mut f, t, &y, &k1, dir, &tol).min(span),
    };
    let h_max = opts.h_max.min(span);
    let mut steps = 0;
    let mut rejected = 0;
    let mut last_err: f64 = 1e-4;

    loop {
        if steps + rejected >= opts.max_steps {
            return Err(Error::StepFailure { t, reason: "maximum step count exceeded".into() });
        }
        let remaining = (t1 - t) * dir;
        if remaining <= 0.0 {
            break;
        }
        h = h.min(h_max);
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        let hs = h * dir;
        if h < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::StepFailure { t, reason: "step size underflow".into() });
        }

        let k2 = f(t + C2 * hs, &axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hs, &axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * hs,
            &axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hs,
            &axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + hs, &y_new);

        let mut acc = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            acc += (e / sc) * (e / sc);
        }
        let err = (acc / N as f64).sqrt();

        if !err.is_finite() || err > 1.0 {
            rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).max(0.2) } else { 0.2 };
            h *= fac;
            continue;
        }

        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let dy = y_new[i] - y[i];
            let bspl = hs * k1[i] - dy;
            r[0][i] = y[i];
            r[1][i] = dy;
            r[2][i] = bspl;
            r[3][i] = dy - hs * k7[i] - bspl;
            r[4][i] = hs
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        let dense = DenseStep { t0: t, h: hs, r };
        steps += 1;
        t = if last { t1 } else { t + hs };
        y = y_new;
        k1 = k7;

        if on_step(&dense) == Control::Stop {
            return Ok(Outcome { t, y, steps, rejected, stopped: true });
        }
        if last {
            break;
        }
        // PI step control
        let e = err.max(1e-10);
        let fac = 0.9 * e.powf(-0.7 / 5.0) * last_err.powf(0.4 / 5.0);
        last_err = e;
        h *= fac.clamp(0.2, 10.0);
    }
    Ok(Outcome { t, y, steps, rejected, stopped: false })
}

fn initial_step<const N: usize, F>(
    f: &mut F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    dir: f64,
    tol: &Tolerance,
) -> f64
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (k1[i] / sc).powi(2);
    }
    d0 = (d0 / N as f64).sqrt();
    d1 = (d1 / N as f64).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = axpy(y, h0 * dir, &[(1.0, k1)]);
    let k2 = f(t + h0 * dir, &y1);
    let mut d2 = 0.0;
    for i in 0..N {
        let sc = tol.atol + tol.rtol * y[i].abs();
        d2 += ((k2[i] - k1[i]) / sc).powi(2);
    }
    d2 = (d2 / N as f64).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// All accepted steps of an integration; evaluates the solution anywhere in range.
#[derive(Debug, Clone)]
pub struct DenseTrace<const N: usize> {
    pub steps: Vec<DenseStep<N>>,
}

impl<const N: usize> DenseTrace<N> {
    pub fn eval(&self, t: f64) -> Option<[f64; N]> {
        if self.steps.is_empty() {
            return None;
        }
        let forward = self.steps[0].h > 0.0;
        let idx = self.steps.partition_point(|s| {
            if forward {
                s.t1() < t
            } else {
                s.t1() > t
            }
        });
        let s = self.steps.get(idx)?;
        if s.contains(t) {
            Some(s.eval(t))
        } else {
            None
        }
    }

    pub fn t_range(&self) -> (f64, f64) {
        let a = self.steps.first().map(|s| s.t0).unwrap_or(0.0);
        let b = self.steps.last().map(|s| s.t1()).unwrap_or(0.0);
        (a, b)
    }
}

/// Integrates and keeps the continuous extension of every step.
pub fn integrate_dense<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &Options,
) -> Result<DenseTrace<N>>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
{
    let mut steps = Vec::new();
    integrate(f, t0, y0, t1, opts, |s| {
        steps.push(*s);
        Control::Continue
    })?;
    Ok(DenseTrace { steps })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_is_accurate() {
        let opts = Options::with_tol(1e-12);
        let out = integrate(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [1.0, 0.0], 10.0, &opts, |_| Control::Continue)
            .unwrap();
        assert!((out.y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((out.y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn backward_integration() {
        let opts = Options::with_tol(1e-11);
        let out = integrate(|_, y: &[f64; 1]| [y[0]], 0.0, [1.0], -3.0, &opts, |_| Control::Continue).unwrap();
        assert!((out.y[0] - (-3f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn dense_output_interpolates() {
        let opts = Options::with_tol(1e-10);
        let tr = integrate_dense(|_, y: &[f64; 2]| [y[1], -y[0]], 0.0, [0.0, 1.0], 6.0, &opts).unwrap();
        for i in 0..=60 {
            let t = 0.1 * i as f64;
            let y = tr.eval(t).unwrap();
            assert!((y[0] - t.sin()).abs() < 1e-8, "t={t}");
        }
        assert!(tr.eval(6.5).is_none());
    }

    #[test]
    fn stop_request_is_honoured() {
        let opts = Options::with_tol(1e-8);
        let mut n = 0;
        let out = integrate(|_, y: &[f64; 1]| [-y[0]], 0.0, [1.0], 100.0, &opts, |_| {
            n += 1;
            if n == 3 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert!(out.stopped);
        assert_eq!(out.steps, 3);
    }
}
