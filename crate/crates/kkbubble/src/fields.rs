//! Kaluza-Klein towers of the Klein-Gordon field.
//!
//! Witten: u(t, x, ψ, ω) = Σ w(t)/cosh t · φ_{n,k}(x) e^{inψ} Y_{l,m}(ω), where each w is a
//! [`desitter`](crate::desitter) mode with parameter λ_{n,k}.
//! Wormhole: u = Σ w(t)/(cosh t cosh x) · φ_k(x) Y_{l,m}(ω), with φ_k eigenfunctions of
//! L_M = -d²/dx² + M² cosh²x and mode parameter λ_k + 1.
//!
//! Angular factors are taken orthonormal and the dynamics is diagonal in (n, l, m), so
//! snapshots keep one radial profile per (n, l, m) block instead of sampling the sphere.
//! The profile is v = cosh t · u (Witten) or v = cosh t cosh x · u (wormhole).

use crate::charts::Spacetime;
use crate::desitter::{
    asymptotic_amplitudes, coeffs_from_cauchy, mode_value, scatter_phase, solution_from_in, ModeCauchyData,
    ModeSolution,
};
use crate::error::{domain, Error, Result};
use crate::spectral::{assemble, solve_discrete, ContinuousTransform, DiscreteSpectrum, RadialOperatorSpec, Tridiagonal};
use crate::specfun::{ferrers_p_real_order, rgamma_complex};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Infrared cutoff of the massless coefficient spaces.
pub const DEFAULT_DELTA: f64 = 0.1;
/// Time at which asymptotic comparisons are made.
pub const HORIZON: f64 = 25.0;
pub const DEFAULT_L_MAX: u32 = 16;
pub const DEFAULT_N_MAX: i32 = 4;
pub const DEFAULT_MODES_PER_N: usize = 8;
/// Largest projection residual accepted by [`analyze`].
pub const ANALYSIS_LIMIT: f64 = 1e-6;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Desitter mode parameter attached to a spatial eigenvalue.
pub fn mode_lambda(spacetime: Spacetime, lambda: f64) -> f64 {
    match spacetime {
        Spacetime::Witten => lambda,
        Spacetime::Wormhole => lambda + 1.0,
    }
}

/// Discrete radial spectra for a set of KK numbers, sharing one grid.
#[derive(Debug, Clone)]
pub struct Tower {
    pub spacetime: Spacetime,
    pub mass: f64,
    pub spectra: Vec<DiscreteSpectrum>,
    ops: Vec<Tridiagonal>,
}

impl Tower {
    /// Solves `count` modes for each n in `ns` with the default truncation and `points` nodes.
    pub fn new(spacetime: Spacetime, mass: f64, ns: &[i32], count: usize, points: usize) -> Result<Self> {
        let x_max = RadialOperatorSpec::new(spacetime, mass, 0, points).grid.x_max;
        Self::with_grid(spacetime, mass, ns, count, x_max, points)
    }

    pub fn with_grid(spacetime: Spacetime, mass: f64, ns: &[i32], count: usize, x_max: f64, points: usize) -> Result<Self> {
        if spacetime == Spacetime::Wormhole && ns.iter().any(|&n| n != 0) {
            return domain("the wormhole has no Kaluza-Klein circle; use n = 0");
        }
        if spacetime == Spacetime::Wormhole && !(mass > 0.0) {
            return domain("the massless wormhole is handled by the Fourier representation");
        }
        let mut spectra = Vec::with_capacity(ns.len());
        for &n in ns {
            if spectra.iter().any(|s: &DiscreteSpectrum| s.spec.n == n) {
                return Err(Error::Invalid(format!("KK number {n} listed twice")));
            }
            let spec = RadialOperatorSpec::new(spacetime, mass, n, points).with_grid(x_max, points);
            spectra.push(solve_discrete(&spec, count)?);
        }
        Self::from_spectra(spacetime, mass, spectra)
    }

    pub fn from_spectra(spacetime: Spacetime, mass: f64, spectra: Vec<DiscreteSpectrum>) -> Result<Self> {
        let mut ops = Vec::with_capacity(spectra.len());
        for s in &spectra {
            if s.spec.spacetime != spacetime || s.spec.mass != mass || s.spec.grid != spectra[0].spec.grid {
                return Err(Error::Invalid("tower spectra must share spacetime, mass and grid".into()));
            }
            ops.push(assemble(&s.spec)?.0);
        }
        Ok(Tower { spacetime, mass, spectra, ops })
    }

    fn index(&self, n: i32) -> Result<usize> {
        self.spectra
            .iter()
            .position(|s| s.spec.n == n)
            .ok_or_else(|| Error::Invalid(format!("no spectrum for KK number {n}")))
    }

    pub fn spectrum(&self, n: i32) -> Result<&DiscreteSpectrum> {
        Ok(&self.spectra[self.index(n)?])
    }

    pub fn x(&self) -> &[f64] {
        self.spectra.first().map(|s| s.x.as_slice()).unwrap_or(&[])
    }

    pub fn weights(&self) -> &[f64] {
        self.spectra.first().map(|s| s.weights.as_slice()).unwrap_or(&[])
    }

    /// Spatial factor between the profile and cosh t · u: 1 (Witten) or cosh x (wormhole).
    fn spatial_factor(&self) -> Vec<f64> {
        match self.spacetime {
            Spacetime::Witten => vec![1.0; self.x().len()],
            Spacetime::Wormhole => self.x().iter().map(|x| x.cosh()).collect(),
        }
    }

    /// Σ weights · conj(a) (L a) for the discrete radial operator of KK number n.
    fn quadratic_form(&self, n: i32, a: &[C64]) -> Result<f64> {
        let op = &self.ops[self.index(n)?];
        let sw: Vec<f64> = self.weights().iter().map(|w| w.sqrt()).collect();
        let mut total = 0.0;
        for part in [0, 1] {
            let z: Vec<f64> = a.iter().zip(&sw).map(|(a, s)| s * if part == 0 { a.re } else { a.im }).collect();
            total += z.iter().zip(op.apply(&z)).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(total)
    }

    /// L a on the nodes (same variable as a).
    fn apply_operator(&self, n: i32, a: &[C64]) -> Result<Vec<C64>> {
        let op = &self.ops[self.index(n)?];
        let sw: Vec<f64> = self.weights().iter().map(|w| w.sqrt()).collect();
        let re: Vec<f64> = a.iter().zip(&sw).map(|(a, s)| s * a.re).collect();
        let im: Vec<f64> = a.iter().zip(&sw).map(|(a, s)| s * a.im).collect();
        let (lr, li) = (op.apply(&re), op.apply(&im));
        Ok(lr.iter().zip(&li).zip(&sw).map(|((r, i), s)| C64::new(r / s, i / s)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeKey {
    pub n: i32,
    pub k: usize,
    pub l: u32,
    pub m: i32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeEntry {
    pub key: ModeKey,
    /// Spatial eigenvalue λ_{n,k} (Witten) or λ_k (wormhole).
    pub lambda: f64,
    pub a_plus: C64,
    pub a_minus: C64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoefficients {
    pub spacetime: Spacetime,
    pub mass: f64,
    pub entries: Vec<ModeEntry>,
}

impl ModeCoefficients {
    pub fn empty(spacetime: Spacetime, mass: f64) -> Self {
        ModeCoefficients { spacetime, mass, entries: Vec::new() }
    }

    pub fn solution(&self, e: &ModeEntry) -> Result<ModeSolution> {
        ModeSolution::new(mode_lambda(self.spacetime, e.lambda), e.key.l, e.a_plus, e.a_minus)
    }

    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if e.key.m.unsigned_abs() > e.key.l {
                return Err(Error::Invalid(format!("|m| > l in entry {:?}", e.key)));
            }
            if self.spacetime == Spacetime::Wormhole && e.key.n != 0 {
                return Err(Error::Invalid(format!("wormhole entry with n = {}", e.key.n)));
            }
            if !(mode_lambda(self.spacetime, e.lambda) > 1.0) {
                return Err(Error::Invalid(format!("entry {:?} has lambda {} outside the mode range", e.key, e.lambda)));
            }
        }
        Ok(())
    }

    /// Mode-entry counterpart of the tower built from the attached spectra.
    pub fn single(tower: &Tower, key: ModeKey, a_plus: C64, a_minus: C64) -> Result<Self> {
        let lambda = *tower
            .spectrum(key.n)?
            .eigenvalues
            .get(key.k)
            .ok_or_else(|| Error::Invalid(format!("mode index {} not computed", key.k)))?;
        Ok(ModeCoefficients {
            spacetime: tower.spacetime,
            mass: tower.mass,
            entries: vec![ModeEntry { key, lambda, a_plus, a_minus }],
        })
    }
}

/// Cauchy data u(0), ∂_t u(0) for one (n, l, m) block on the tower nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBlock {
    pub n: i32,
    pub l: u32,
    pub m: i32,
    pub f: Vec<C64>,
    pub g: Vec<C64>,
}

/// Field values for one (n, l, m) block.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotBlock {
    pub n: i32,
    pub l: u32,
    pub m: i32,
    pub value: Vec<C64>,
    pub rate: Vec<C64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnapshotKind {
    Field,
    Profile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub t: f64,
    pub spacetime: Spacetime,
    pub kind: SnapshotKind,
    pub x: Vec<f64>,
    pub blocks: Vec<SnapshotBlock>,
}

impl FieldSnapshot {
    /// Same snapshot in the profile variable.
    pub fn to_profile(&self) -> FieldSnapshot {
        if self.kind == SnapshotKind::Profile {
            return self.clone();
        }
        let (c, s) = (self.t.cosh(), self.t.sinh());
        let fx: Vec<f64> = match self.spacetime {
            Spacetime::Witten => vec![1.0; self.x.len()],
            Spacetime::Wormhole => self.x.iter().map(|x| x.cosh()).collect(),
        };
        let blocks = self
            .blocks
            .iter()
            .map(|b| SnapshotBlock {
                value: b.value.iter().zip(&fx).map(|(u, f)| u * c * f).collect(),
                rate: b.value.iter().zip(&b.rate).zip(&fx).map(|((u, ut), f)| (u * s + ut * c) * f).collect(),
                ..b.clone()
            })
            .collect();
        FieldSnapshot { kind: SnapshotKind::Profile, blocks, ..self.clone() }
    }

    /// CSV rows `t,x,n,l,m,Re,Im` of the stored values.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x,n,l,m,Re,Im\n");
        for b in &self.blocks {
            for (x, v) in self.x.iter().zip(&b.value) {
                let _ = writeln!(out, "{},{},{},{},{},{:e},{:e}", self.t, x, b.n, b.l, b.m, v.re, v.im);
            }
        }
        out
    }
}

fn norm2(w: &[f64], a: &[C64]) -> f64 {
    a.iter().zip(w).map(|(a, w)| a.norm_sqr() * w).sum()
}

/// Projects Cauchy data onto the tower. Entries with negligible weight are dropped.
pub fn analyze(tower: &Tower, data: &[DataBlock]) -> Result<ModeCoefficients> {
    let fx = tower.spatial_factor();
    let w = tower.weights();
    let mut entries = Vec::new();
    for b in data {
        if b.m.unsigned_abs() > b.l {
            return Err(Error::Invalid(format!("|m| > l in block (n={}, l={}, m={})", b.n, b.l, b.m)));
        }
        let spec = tower.spectrum(b.n)?;
        if b.f.len() != w.len() || b.g.len() != w.len() {
            return Err(Error::Invalid("data block does not match the tower grid".into()));
        }
        let p: Vec<C64> = b.f.iter().zip(&fx).map(|(f, s)| f * s).collect();
        let q: Vec<C64> = b.g.iter().zip(&fx).map(|(g, s)| g * s).collect();
        let (np, nq) = (norm2(w, &p), norm2(w, &q));
        if np == 0.0 && nq == 0.0 {
            continue;
        }
        let (mut rp, mut rq) = (p.clone(), q.clone());
        let mut raw = Vec::with_capacity(spec.eigenvectors.len());
        for (k, phi) in spec.eigenvectors.iter().enumerate() {
            let proj = |a: &[C64]| -> C64 { a.iter().zip(phi).zip(w).map(|((a, f), w)| a * f * w).sum() };
            let (a, c) = (proj(&p), proj(&q));
            for i in 0..phi.len() {
                rp[i] -= a * phi[i];
                rq[i] -= c * phi[i];
            }
            raw.push((k, a, c));
        }
        let rel = norm2(w, &rp) / np.max(f64::MIN_POSITIVE) + norm2(w, &rq) / nq.max(f64::MIN_POSITIVE);
        let rel = if np == 0.0 { norm2(w, &rq) / nq } else if nq == 0.0 { norm2(w, &rp) / np } else { rel };
        if rel > ANALYSIS_LIMIT {
            return Err(Error::Truncation {
                tail: rel,
                limit: ANALYSIS_LIMIT,
                hint: format!("data in block (n={}, l={}, m={}) is not resolved by {} modes", b.n, b.l, b.m, raw.len()),
            });
        }
        let floor = 1e-13 * (np.sqrt() + nq.sqrt());
        for (k, a, c) in raw {
            if a.norm() + c.norm() <= floor {
                continue;
            }
            let lambda = spec.eigenvalues[k];
            let (ap, am) = coeffs_from_cauchy(mode_lambda(tower.spacetime, lambda), b.l, ModeCauchyData { w0: a, w0p: c })?;
            entries.push(ModeEntry { key: ModeKey { n: b.n, k, l: b.l, m: b.m }, lambda, a_plus: ap, a_minus: am });
        }
    }
    Ok(ModeCoefficients { spacetime: tower.spacetime, mass: tower.mass, entries })
}

/// Evaluates the tower at time t; the snapshot holds u and ∂_t u.
pub fn synthesize(tower: &Tower, coefs: &ModeCoefficients, t: f64) -> Result<FieldSnapshot> {
    if coefs.spacetime != tower.spacetime {
        return Err(Error::Invalid("coefficients and tower disagree on the spacetime".into()));
    }
    let fx = tower.spatial_factor();
    let n_x = tower.x().len();
    let (ch, th) = (t.cosh(), t.tanh());
    let mut blocks: BTreeMap<(i32, u32, i32), (Vec<C64>, Vec<C64>)> = BTreeMap::new();
    for e in &coefs.entries {
        let phi = tower
            .spectrum(e.key.n)?
            .eigenvectors
            .get(e.key.k)
            .ok_or_else(|| Error::Invalid(format!("mode index {} not computed", e.key.k)))?;
        let (w, wp) = mode_value(&coefs.solution(e)?, t);
        let (a, at) = (w / ch, (wp - th * w) / ch);
        let slot = blocks.entry((e.key.n, e.key.l, e.key.m)).or_insert_with(|| (vec![ZERO; n_x], vec![ZERO; n_x]));
        for i in 0..n_x {
            let s = phi[i] / fx[i];
            slot.0[i] += a * s;
            slot.1[i] += at * s;
        }
    }
    let blocks = blocks
        .into_iter()
        .map(|((n, l, m), (value, rate))| SnapshotBlock { n, l, m, value, rate })
        .collect();
    Ok(FieldSnapshot { t, spacetime: tower.spacetime, kind: SnapshotKind::Field, x: tower.x().to_vec(), blocks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnergyKind {
    /// E(u, t) of the field (Witten only).
    Field,
    /// E(v, t) of the profile.
    Profile,
    /// E_∞(v, t): the profile energy without the sphere term.
    Asymptotic,
}

/// Quadrature of the energy densities with the discrete radial form.
pub fn energy(tower: &Tower, snap: &FieldSnapshot, kind: EnergyKind) -> Result<f64> {
    let w = tower.weights();
    let c2 = snap.t.cosh().powi(2);
    let mut total = 0.0;
    match kind {
        EnergyKind::Field => {
            if tower.spacetime != Spacetime::Witten {
                return domain("the field energy is defined on the Witten side; use the profile energy");
            }
            let u = if snap.kind == SnapshotKind::Field {
                snap.clone()
            } else {
                return Err(Error::Invalid("field energy needs a field snapshot".into()));
            };
            for b in &u.blocks {
                let ll = (b.l * (b.l + 1)) as f64;
                total += norm2(w, &b.rate) + ll / c2 * norm2(w, &b.value) + tower.quadratic_form(b.n, &b.value)?;
            }
        }
        EnergyKind::Profile | EnergyKind::Asymptotic => {
            let v = snap.to_profile();
            let shift = if tower.spacetime == Spacetime::Witten { 1.0 } else { 0.0 };
            for b in &v.blocks {
                let ll = if kind == EnergyKind::Profile { (b.l * (b.l + 1)) as f64 } else { 0.0 };
                let n2 = norm2(w, &b.value);
                total += norm2(w, &b.rate) + (ll / c2 - shift) * n2 + tower.quadratic_form(b.n, &b.value)?;
            }
        }
    }
    Ok(total)
}

/// Right-hand side of dE/dt = -2 tanh t ∫ [2|∂_t u|² + |∇_{S²} u|²/cosh²t] dμ.
pub fn energy_rate(tower: &Tower, snap: &FieldSnapshot) -> Result<f64> {
    if tower.spacetime != Spacetime::Witten || snap.kind != SnapshotKind::Field {
        return domain("the energy identity is stated for Witten field snapshots");
    }
    let w = tower.weights();
    let c2 = snap.t.cosh().powi(2);
    let mut s = 0.0;
    for b in &snap.blocks {
        let ll = (b.l * (b.l + 1)) as f64;
        s += 2.0 * norm2(w, &b.rate) + ll / c2 * norm2(w, &b.value);
    }
    Ok(-2.0 * snap.t.tanh() * s)
}

/// Relative residual of the profile equation v_tt + A v + l(l+1)/cosh²t v = 0 at time t,
/// with second differences of step h in t. A = L - 1 (Witten) or L_M (wormhole).
pub fn pde_residual(tower: &Tower, coefs: &ModeCoefficients, t: f64, h: f64) -> Result<f64> {
    let snaps: Vec<FieldSnapshot> =
        [t - h, t, t + h].iter().map(|&s| synthesize(tower, coefs, s).map(|f| f.to_profile())).collect::<Result<_>>()?;
    let w = tower.weights();
    let shift = if tower.spacetime == Spacetime::Witten { 1.0 } else { 0.0 };
    let c2 = t.cosh().powi(2);
    let mut res = 0.0;
    for (i, b) in snaps[1].blocks.iter().enumerate() {
        let (bm, bp) = (&snaps[0].blocks[i], &snaps[2].blocks[i]);
        let av = tower.apply_operator(b.n, &b.value)?;
        let ll = (b.l * (b.l + 1)) as f64;
        let r: Vec<C64> = (0..b.value.len())
            .map(|j| {
                let vtt = (bp.value[j] - 2.0 * b.value[j] + bm.value[j]) / (h * h);
                vtt + av[j] + (ll / c2 - shift) * b.value[j]
            })
            .collect();
        res += norm2(w, &r);
    }
    let scale = energy(tower, &snaps[1], EnergyKind::Profile)?;
    Ok(if scale > 0.0 { (res / scale).sqrt() } else { res.sqrt() })
}

/// In and out amplitudes of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudeEntry {
    pub key: ModeKey,
    /// Desitter mode parameter (> 1).
    pub lambda: f64,
    pub in_plus: C64,
    pub in_minus: C64,
    pub out_plus: C64,
    pub out_minus: C64,
}

pub fn wave_operators(coefs: &ModeCoefficients) -> Result<Vec<AmplitudeEntry>> {
    coefs
        .entries
        .iter()
        .map(|e| {
            let sol = coefs.solution(e)?;
            let a = asymptotic_amplitudes(&sol)?;
            Ok(AmplitudeEntry {
                key: e.key,
                lambda: sol.lambda,
                in_plus: a.in_plus,
                in_minus: a.in_minus,
                out_plus: a.out_plus,
                out_minus: a.out_minus,
            })
        })
        .collect()
}

/// Inverse wave operator: coefficients of the field with the given in amplitudes.
pub fn coefficients_from_in(spacetime: Spacetime, mass: f64, amps: &[AmplitudeEntry]) -> Result<ModeCoefficients> {
    let entries = amps
        .iter()
        .map(|a| {
            let s = solution_from_in(a.lambda, a.key.l, a.in_plus, a.in_minus)?;
            let lambda = match spacetime {
                Spacetime::Witten => a.lambda,
                Spacetime::Wormhole => a.lambda - 1.0,
            };
            Ok(ModeEntry { key: a.key, lambda, a_plus: s.a_plus, a_minus: s.a_minus })
        })
        .collect::<Result<_>>()?;
    Ok(ModeCoefficients { spacetime, mass, entries })
}

/// E_∞(v - v_out, t) / E_∞(v_out, t) summed over the modes.
pub fn asymptotic_defect(coefs: &ModeCoefficients, t: f64) -> Result<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for e in &coefs.entries {
        let sol = coefs.solution(e)?;
        let a = asymptotic_amplitudes(&sol)?;
        let mu = sol.mu();
        let (ep, em) = (C64::new(0.0, mu * t).exp(), C64::new(0.0, -mu * t).exp());
        let (a_plus, a_minus) = if t >= 0.0 { (a.out_plus, a.out_minus) } else { (a.in_plus, a.in_minus) };
        let free = a_plus * ep + a_minus * em;
        let free_p = I * mu * (a_plus * ep - a_minus * em);
        let (w, wp) = mode_value(&sol, t);
        num += (wp - free_p).norm_sqr() + mu * mu * (w - free).norm_sqr();
        den += free_p.norm_sqr() + mu * mu * free.norm_sqr();
    }
    Ok(if den > 0.0 { num / den } else { 0.0 })
}

/// Asymptotic Cauchy data (v, v') of the free comparison dynamics at t = 0, one per mode
/// or per continuous sample. `weight` is the spectral quadrature weight (1 for discrete modes).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticEntry {
    pub key: ModeKey,
    pub lambda: f64,
    pub weight: f64,
    pub v: C64,
    pub vp: C64,
}

impl AsymptoticEntry {
    /// Frequency |λ - 1|^{1/2} of the free dynamics.
    pub fn omega(&self) -> f64 {
        (self.lambda - 1.0).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AsymptoticState {
    pub entries: Vec<AsymptoticEntry>,
}

fn state_from(amps: &[AmplitudeEntry], out: bool) -> AsymptoticState {
    let entries = amps
        .iter()
        .map(|a| {
            let (p, m) = if out { (a.out_plus, a.out_minus) } else { (a.in_plus, a.in_minus) };
            let om = (a.lambda - 1.0).sqrt();
            AsymptoticEntry { key: a.key, lambda: a.lambda, weight: 1.0, v: p + m, vp: I * om * (p - m) }
        })
        .collect();
    AsymptoticState { entries }
}

pub fn in_state(amps: &[AmplitudeEntry]) -> AsymptoticState {
    state_from(amps, false)
}

pub fn out_state(amps: &[AmplitudeEntry]) -> AsymptoticState {
    state_from(amps, true)
}

impl AsymptoticState {
    /// E_∞ of the free profile: Σ weight (|v'|² + ω²|v|²).
    pub fn energy(&self) -> f64 {
        self.entries.iter().map(|e| e.weight * (e.vp.norm_sqr() + (e.lambda - 1.0) * e.v.norm_sqr())).sum()
    }

    /// Σ weight (ω|v|² + ω⁻¹|v'|²): the half-Sobolev pair norm.
    pub fn weighted_norm2(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| {
                let om = e.omega();
                e.weight * (om * e.v.norm_sqr() + e.vp.norm_sqr() / om)
            })
            .sum()
    }

    /// ‖v‖² with weights ω^{±1} (`sign` = ±1).
    pub fn sobolev_norm2(&self, sign: f64) -> f64 {
        self.entries.iter().map(|e| e.weight * e.omega().powf(sign) * e.v.norm_sqr()).sum()
    }
}

/// σ((v1, v1'), (v2, v2')) = Σ weight (v1 v2' - v1' v2).
pub fn symplectic(a: &AsymptoticState, b: &AsymptoticState) -> Result<C64> {
    if a.entries.len() != b.entries.len() {
        return Err(Error::Invalid("symplectic form needs matching mode sets".into()));
    }
    let mut s = ZERO;
    for (x, y) in a.entries.iter().zip(&b.entries) {
        if x.key != y.key {
            return Err(Error::Invalid(format!("mode sets differ at {:?} / {:?}", x.key, y.key)));
        }
        s += x.weight * (x.v * y.vp - x.vp * y.v);
    }
    Ok(s)
}

/// Positive and negative frequency amplitudes: v = pos + neg, v' = iω(pos - neg).
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySplit {
    pub modes: Vec<(ModeKey, f64, f64)>,
    pub pos: Vec<C64>,
    pub neg: Vec<C64>,
}

pub fn frequency_split(state: &AsymptoticState) -> FrequencySplit {
    let mut split = FrequencySplit { modes: Vec::new(), pos: Vec::new(), neg: Vec::new() };
    for e in &state.entries {
        let d = e.vp / (I * e.omega());
        split.modes.push((e.key, e.lambda, e.weight));
        split.pos.push(0.5 * (e.v + d));
        split.neg.push(0.5 * (e.v - d));
    }
    split
}

impl FrequencySplit {
    pub fn merge(&self) -> AsymptoticState {
        let entries = self
            .modes
            .iter()
            .zip(self.pos.iter().zip(&self.neg))
            .map(|(&(key, lambda, weight), (p, n))| AsymptoticEntry {
                key,
                lambda,
                weight,
                v: p + n,
                vp: I * (lambda - 1.0).sqrt() * (p - n),
            })
            .collect();
        AsymptoticState { entries }
    }

    /// Free propagator: multiplication by e^{±iωt} on the two parts.
    pub fn propagate(&self, t: f64) -> FrequencySplit {
        let mut out = self.clone();
        for (j, &(_, lambda, _)) in self.modes.iter().enumerate() {
            let e = C64::new(0.0, (lambda - 1.0).sqrt() * t).exp();
            out.pos[j] *= e;
            out.neg[j] *= e.conj();
        }
        out
    }

    /// Scattering acts part by part, so each subspace is mapped into itself.
    pub fn scatter(&self) -> Result<FrequencySplit> {
        let mut out = self.clone();
        for (j, &(key, lambda, _)) in self.modes.iter().enumerate() {
            out.pos[j] *= scatter_phase(key.l, lambda, 1.0)?;
            out.neg[j] *= scatter_phase(key.l, lambda, -1.0)?;
        }
        Ok(out)
    }
}

/// Scattering operator on asymptotic data.
pub fn scattering(in_state: &AsymptoticState) -> Result<AsymptoticState> {
    Ok(frequency_split(in_state).scatter()?.merge())
}

/// Massless coefficients sampled on a spectral grid: λ for the Witten zero mode,
/// the Fourier variable ξ for the wormhole.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousCoefficients {
    pub spacetime: Spacetime,
    pub grid: Vec<f64>,
    pub weights: Vec<f64>,
    pub entries: Vec<ContinuousEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousEntry {
    pub l: u32,
    pub m: i32,
    pub a_plus: Vec<C64>,
    pub a_minus: Vec<C64>,
}

impl ContinuousCoefficients {
    /// Desitter mode parameter of grid sample j.
    pub fn mode_lambda(&self, j: usize) -> f64 {
        match self.spacetime {
            Spacetime::Witten => self.grid[j],
            Spacetime::Wormhole => 1.0 + self.grid[j] * self.grid[j],
        }
    }

    /// Asymptotic in and out states, one entry per sample with its quadrature weight.
    pub fn asymptotic_states(&self) -> Result<(AsymptoticState, AsymptoticState)> {
        let mut amps = Vec::new();
        let mut weights = Vec::new();
        for e in &self.entries {
            for j in 0..self.grid.len() {
                let lambda = self.mode_lambda(j);
                let a = asymptotic_amplitudes(&ModeSolution::new(lambda, e.l, e.a_plus[j], e.a_minus[j])?)?;
                amps.push(AmplitudeEntry {
                    key: ModeKey { n: 0, k: j, l: e.l, m: e.m },
                    lambda,
                    in_plus: a.in_plus,
                    in_minus: a.in_minus,
                    out_plus: a.out_plus,
                    out_minus: a.out_minus,
                });
                weights.push(self.weights[j]);
            }
        }
        let weigh = |mut s: AsymptoticState| {
            s.entries.iter_mut().zip(&weights).for_each(|(e, w)| e.weight = *w);
            s
        };
        Ok((weigh(in_state(&amps)), weigh(out_state(&amps))))
    }

    /// Rows `l,m,lambda,ReA+,ImA+,ReA-,ImA-` (the third column is ξ on the wormhole).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# spacetime={}", self.spacetime.name());
        let _ = writeln!(out, "# variable={}", if self.spacetime == Spacetime::Witten { "lambda" } else { "xi" });
        out.push_str("l,m,lambda,ReA+,ImA+,ReA-,ImA-\n");
        for e in &self.entries {
            for (j, g) in self.grid.iter().enumerate() {
                let (p, m) = (e.a_plus[j], e.a_minus[j]);
                let _ = writeln!(out, "{},{},{:e},{:e},{:e},{:e},{:e}", e.l, e.m, g, p.re, p.im, m.re, m.im);
            }
        }
        out
    }
}

/// Massless Witten zero-mode (n = 0) analysis of profile data v(0) = f, ∂_t v(0) = g on the
/// transform grid, for one (l, m).
pub fn analyze_continuous(tr: &ContinuousTransform, l: u32, m: i32, f: &[C64], g: &[C64]) -> Result<ContinuousCoefficients> {
    let (fh, gh) = (tr.forward(f)?, tr.forward(g)?);
    let mut e = ContinuousEntry { l, m, a_plus: Vec::new(), a_minus: Vec::new() };
    for (j, &lambda) in tr.lambda.iter().enumerate() {
        let (p, q) = coeffs_from_cauchy(lambda, l, ModeCauchyData { w0: fh[j], w0p: gh[j] })?;
        e.a_plus.push(p);
        e.a_minus.push(q);
    }
    Ok(ContinuousCoefficients { spacetime: Spacetime::Witten, grid: tr.lambda.clone(), weights: tr.dlambda.clone(), entries: vec![e] })
}

/// Profile v(t) and ∂_t v(t) of one continuous entry on the transform x grid.
pub fn synthesize_continuous(tr: &ContinuousTransform, cc: &ContinuousCoefficients, entry: usize, t: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    if cc.spacetime != Spacetime::Witten || cc.grid.len() != tr.lambda.len() {
        return Err(Error::Invalid("coefficients were not sampled on this transform".into()));
    }
    let e = cc.entries.get(entry).ok_or_else(|| Error::Invalid(format!("no entry {entry}")))?;
    let (mut w, mut wp) = (Vec::with_capacity(cc.grid.len()), Vec::with_capacity(cc.grid.len()));
    for j in 0..cc.grid.len() {
        let (a, b) = mode_value(&ModeSolution::new(cc.grid[j], e.l, e.a_plus[j], e.a_minus[j])?, t);
        w.push(a);
        wp.push(b);
    }
    Ok((tr.inverse(&w)?, tr.inverse(&wp)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionReport {
    pub sup_initial: f64,
    pub sup_final: f64,
    pub ratio: f64,
}

/// sup over x ≤ x_cut of |v| at 0 and at t for the massless zero mode with v(0) = v0,
/// ∂_t v(0) = 0 in the l = 0 sector.
pub fn dispersion_check(tr: &ContinuousTransform, v0: &[f64], t: f64, x_cut: f64) -> Result<DispersionReport> {
    let f: Vec<C64> = v0.iter().map(|&v| C64::new(v, 0.0)).collect();
    let cc = analyze_continuous(tr, 0, 0, &f, &vec![ZERO; f.len()])?;
    let sup = |v: &[C64]| tr.x.iter().zip(v).filter(|(x, _)| **x <= x_cut).fold(0.0f64, |m, (_, v)| m.max(v.norm()));
    let s0 = sup(&synthesize_continuous(tr, &cc, 0, 0.0)?.0);
    let s1 = sup(&synthesize_continuous(tr, &cc, 0, t)?.0);
    Ok(DispersionReport { sup_initial: s0, sup_final: s1, ratio: s1 / s0 })
}

/// Massless wormhole in-state on a uniform ξ grid: v_in(t, x) = (1/2π) ∫ e^{ixξ}
/// (w⁺(ξ) e^{i|ξ|t} + w⁻(ξ) e^{-i|ξ|t}) dξ in one (l, m) sector.
#[derive(Debug, Clone, PartialEq)]
pub struct MasslessInState {
    pub l: u32,
    pub xi: Vec<f64>,
    pub dxi: f64,
    pub in_plus: Vec<C64>,
    pub in_minus: Vec<C64>,
}

impl MasslessInState {
    /// Free profile at t = 0 equal to exp(-(x - x0)²/2σ²) e^{i k0 x} moving with speed `direction` = ±1.
    pub fn gaussian(l: u32, x0: f64, sigma: f64, k0: f64, direction: f64, xi_max: f64, samples: usize) -> Self {
        let dxi = 2.0 * xi_max / samples as f64;
        let xi: Vec<f64> = (0..samples).map(|j| -xi_max + (j as f64 + 0.5) * dxi).collect();
        let (mut in_plus, mut in_minus) = (Vec::new(), Vec::new());
        for &x in &xi {
            let d = k0 - x;
            let hat = sigma * (2.0 * PI).sqrt() * (-0.5 * sigma * sigma * d * d).exp() * C64::new(0.0, d * x0).exp();
            // a profile f(x - εt) carries e^{-iεξt}: the + amplitude when εξ < 0
            if direction * x < 0.0 {
                in_plus.push(hat);
                in_minus.push(ZERO);
            } else {
                in_plus.push(ZERO);
                in_minus.push(hat);
            }
        }
        MasslessInState { l, xi, dxi, in_plus, in_minus }
    }

    /// +1 for a right-moving state, -1 for a left-moving one; rejects mixed data.
    pub fn direction(&self) -> Result<f64> {
        let (mut right, mut left, mut total) = (0.0, 0.0, 0.0);
        for j in 0..self.xi.len() {
            let (p, m) = (self.in_plus[j].norm_sqr(), self.in_minus[j].norm_sqr());
            total += p + m;
            if self.xi[j] > 0.0 {
                right += m;
                left += p;
            } else {
                right += p;
                left += m;
            }
        }
        if total == 0.0 {
            return Err(Error::Invalid("empty in-state".into()));
        }
        if left <= 1e-24 * total {
            Ok(1.0)
        } else if right <= 1e-24 * total {
            Ok(-1.0)
        } else {
            Err(Error::Invalid(format!(
                "in-state is not one-sided: right/left mass {:.3e}/{:.3e}",
                right / total,
                left / total
            )))
        }
    }

    /// Profile v(t, x) from the exact mode solutions.
    pub fn profile(&self, t: f64, x: &[f64]) -> Result<Vec<C64>> {
        let mut w = Vec::with_capacity(self.xi.len());
        for j in 0..self.xi.len() {
            let (p, m) = (self.in_plus[j], self.in_minus[j]);
            if p == ZERO && m == ZERO {
                w.push(ZERO);
                continue;
            }
            let sol = solution_from_in(1.0 + self.xi[j] * self.xi[j], self.l, p, m)?;
            w.push(mode_value(&sol, t).0);
        }
        let scale = self.dxi / (2.0 * PI);
        Ok(x
            .iter()
            .map(|&x| self.xi.iter().zip(&w).map(|(xi, w)| w * C64::new(0.0, xi * x).exp()).sum::<C64>() * scale)
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Traversal {
    /// The field leaves the entering sheet.
    Traversed,
    /// Mass remains on the entering sheet above the leakage threshold.
    Leaking,
    /// Discrete spectrum: the field stays in a bounded region and keeps returning.
    Confined,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraversabilityReport {
    pub verdict: Traversal,
    /// Fraction of the L² norm left on the entering sheet at the final time.
    pub leakage: f64,
    /// Smallest such fraction over the late half of the run (massive control only).
    pub min_leakage: f64,
    pub direction: f64,
}

/// Leakage threshold for the traversal verdict.
pub const LEAKAGE_LIMIT: f64 = 1e-4;

/// Massless check: L² fraction of v(t_end) on the sheet the state enters from.
pub fn traversability_check(state: &MasslessInState, t_end: f64, x: &[f64]) -> Result<TraversabilityReport> {
    if state.l < 1 {
        return domain("the traversal check is posed in the l >= 1 sectors");
    }
    let dir = state.direction()?;
    let v = state.profile(t_end, x)?;
    let (mut entering, mut total) = (0.0, 0.0);
    for (xi, vi) in x.iter().zip(&v) {
        total += vi.norm_sqr();
        if dir * xi < 0.0 {
            entering += vi.norm_sqr();
        }
    }
    let leakage = entering / total;
    let verdict = if leakage < LEAKAGE_LIMIT { Traversal::Traversed } else { Traversal::Leaking };
    Ok(TraversabilityReport { verdict, leakage, min_leakage: leakage, direction: dir })
}

/// Massive control: a packet at x0 moving with speed `direction` is given as Cauchy data at
/// t = 0, expanded on the L_M tower, and followed up to t_end.
pub fn massive_control(tower: &Tower, l: u32, x0: f64, sigma: f64, k0: f64, direction: f64, t_end: f64) -> Result<TraversabilityReport> {
    if tower.spacetime != Spacetime::Wormhole {
        return domain("the massive control runs on the wormhole tower");
    }
    let x = tower.x();
    // profile data; the field is v / cosh x at t = 0
    let f: Vec<C64> = x
        .iter()
        .map(|&x| (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp() * C64::new(0.0, k0 * x).exp() / x.cosh())
        .collect();
    let g: Vec<C64> = x
        .iter()
        .zip(&f)
        .map(|(&x, &u)| -direction * u * C64::new(-(x - x0) / (sigma * sigma), k0))
        .collect();
    let coefs = analyze(tower, &[DataBlock { n: 0, l, m: 0, f, g }])?;
    let w = tower.weights();
    let leakage_at = |t: f64| -> Result<f64> {
        let v = synthesize(tower, &coefs, t)?.to_profile();
        let b = &v.blocks[0];
        let total = norm2(w, &b.value);
        let entering: f64 =
            x.iter().zip(&b.value).zip(w).filter(|((x, _), _)| direction * **x < 0.0).map(|((_, v), w)| v.norm_sqr() * w).sum();
        Ok(entering / total)
    };
    let steps = 40;
    let mut min_late = f64::INFINITY;
    for s in 0..=steps {
        let t = 0.5 * t_end + 0.5 * t_end * s as f64 / steps as f64;
        min_late = min_late.min(leakage_at(t)?);
    }
    let leakage = leakage_at(t_end)?;
    let verdict = if min_late < LEAKAGE_LIMIT { Traversal::Leaking } else { Traversal::Confined };
    Ok(TraversabilityReport { verdict, leakage, min_leakage: min_late, direction })
}

/// 1/S(ζ) for the l-th amplitude S(ζ) = (-1)^l Γ(1+iζ)Γ(l+1-iζ) / (Γ(1-iζ)Γ(l+1+iζ)),
/// written with reciprocal Gamma functions so that it is entire in the upper half plane.
pub fn reciprocal_amplitude(l: u32, zeta: C64) -> C64 {
    let lf = l as f64;
    let s = if l % 2 == 0 { 1.0 } else { -1.0 };
    let iz = I * zeta;
    s * rgamma_complex(1.0 + iz) * rgamma_complex(lf + 1.0 - iz) / (rgamma_complex(1.0 - iz) * rgamma_complex(lf + 1.0 + iz))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resonance {
    pub zeta: C64,
    /// Winding number of 1/S on the contour.
    pub order: i32,
    /// Residue of S at the pole.
    pub residue: C64,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceReport {
    pub l: u32,
    pub poles: Vec<Resonance>,
    /// (centre, radius, winding) for every contour examined.
    pub contours: Vec<(C64, f64, i32)>,
}

fn winding(l: u32, c: C64, r: f64, samples: usize) -> Option<i32> {
    let vals: Vec<C64> = (0..samples)
        .map(|j| reciprocal_amplitude(l, c + r * C64::new(0.0, 2.0 * PI * j as f64 / samples as f64).exp()))
        .collect();
    let big = vals.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if !big.is_finite() || vals.iter().any(|v| !(v.norm() > 1e-10 * big)) {
        return None;
    }
    let mut turn = 0.0;
    for j in 0..samples {
        turn += (vals[(j + 1) % samples] / vals[j]).arg();
    }
    Some((turn / (2.0 * PI)).round() as i32)
}

/// Poles of the continued amplitude inside circles of radius `radius` about `centers`.
pub fn resonance_scan(l: u32, centers: &[C64], radius: f64) -> Result<ResonanceReport> {
    if l < 1 {
        return domain("resonances occur for l >= 1");
    }
    let mut report = ResonanceReport { l, poles: Vec::new(), contours: Vec::new() };
    for &c in centers {
        let mut r = radius;
        let mut count = None;
        for _ in 0..8 {
            count = winding(l, c, r, 512);
            if count.is_some() {
                break;
            }
            // contour passes through a zero or pole
            r *= 0.7;
        }
        let Some(count) = count else {
            return Err(Error::Convergence(format!("no clean contour around {c}")));
        };
        report.contours.push((c, r, count));
        if count == 0 {
            continue;
        }
        let f = |z: C64| reciprocal_amplitude(l, z);
        let d = |z: C64| {
            let h = 1e-6;
            (f(z + h) - f(z - h)) / (2.0 * h)
        };
        let mut z = c;
        for _ in 0..50 {
            let step = f(z) / d(z);
            z -= step;
            if step.norm() < 1e-15 * z.norm().max(1.0) {
                break;
            }
        }
        if (z - c).norm() > r {
            return Err(Error::Convergence(format!("Newton left the contour around {c}")));
        }
        report.poles.push(Resonance { zeta: z, order: count, residue: 1.0 / d(z), radius: r });
    }
    Ok(report)
}

/// Centres (n + 1) i for n < count.
pub fn default_centers(count: usize) -> Vec<C64> {
    (0..count).map(|n| C64::new(0.0, n as f64 + 1.0)).collect()
}

/// Log-linear fit of |𝖯_l^{-(n+1)}(tanh t)| against log cosh t on `window`;
/// returns the decay exponent.
pub fn resonance_decay_exponent(l: u32, n: u32, window: (f64, f64)) -> Result<f64> {
    if n >= l {
        return domain(format!("no resonance profile for n = {n} >= l = {l}"));
    }
    let samples = 64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for j in 0..samples {
        let t = window.0 + (window.1 - window.0) * j as f64 / (samples - 1) as f64;
        let p = ferrers_p_real_order(l, -(n as f64 + 1.0), t).0.abs();
        let (x, y) = (t.cosh().ln(), p.ln());
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    let k = samples as f64;
    Ok(-(k * sxy - sx * sy) / (k * sxx - sx * sx))
}

/// Text form: header lines, then `n,k,l,m,lambda,ReA+,ImA+,ReA-,ImA-` rows.
pub fn write_coefficients(c: &ModeCoefficients) -> String {
    let mut out = String::new();
    let l_max = c.entries.iter().map(|e| e.key.l).max().unwrap_or(0);
    let n_max = c.entries.iter().map(|e| e.key.n.abs()).max().unwrap_or(0);
    let modes = c.entries.iter().map(|e| e.key.k + 1).max().unwrap_or(0);
    let _ = writeln!(out, "# spacetime={}", c.spacetime.name());
    let _ = writeln!(out, "# mass={:e}", c.mass);
    let _ = writeln!(out, "# delta={:e}", DEFAULT_DELTA);
    let _ = writeln!(out, "# l_max={l_max}");
    let _ = writeln!(out, "# n_max={n_max}");
    let _ = writeln!(out, "# modes={modes}");
    out.push_str("n,k,l,m,lambda,ReA+,ImA+,ReA-,ImA-\n");
    for e in &c.entries {
        let k = e.key;
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e}",
            k.n, k.k, k.l, k.m, e.lambda, e.a_plus.re, e.a_plus.im, e.a_minus.re, e.a_minus.im
        );
    }
    out
}

pub fn read_coefficients(text: &str) -> Result<ModeCoefficients> {
    let bad = |line: usize, what: &str| Error::Invalid(format!("line {}: {what}", line + 1));
    let (mut spacetime, mut mass) = (None, None);
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with("n,") {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            if let Some((k, v)) = h.trim().split_once('=') {
                match k.trim() {
                    "spacetime" => spacetime = Some(Spacetime::parse(v.trim()).ok_or_else(|| bad(i, "unknown spacetime"))?),
                    "mass" => mass = Some(v.trim().parse::<f64>().map_err(|_| bad(i, "bad mass"))?),
                    _ => {}
                }
            }
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(bad(i, "expected 9 fields"));
        }
        let num = |j: usize| f[j].trim().parse::<f64>().map_err(|_| bad(i, "bad number"));
        let key = ModeKey {
            n: f[0].trim().parse().map_err(|_| bad(i, "bad n"))?,
            k: f[1].trim().parse().map_err(|_| bad(i, "bad k"))?,
            l: f[2].trim().parse().map_err(|_| bad(i, "bad l"))?,
            m: f[3].trim().parse().map_err(|_| bad(i, "bad m"))?,
        };
        entries.push(ModeEntry {
            key,
            lambda: num(4)?,
            a_plus: C64::new(num(5)?, num(6)?),
            a_minus: C64::new(num(7)?, num(8)?),
        });
    }
    let c = ModeCoefficients {
        spacetime: spacetime.ok_or_else(|| Error::Invalid("missing spacetime header".into()))?,
        mass: mass.ok_or_else(|| Error::Invalid("missing mass header".into()))?,
        entries,
    };
    c.validate()?;
    Ok(c)
}
