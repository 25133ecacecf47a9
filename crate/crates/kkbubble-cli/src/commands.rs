//! Command implementations. `prepare` reads and validates every parameter before any work starts.

use crate::config::{CliError, CliResult, Config};
use kkbubble::charts::{convert, nec_contraction, nec_witness, wormhole_curvature, Chart, ChartPoint, Spacetime};
use kkbubble::desitter::{
    fit_sinusoid, integrate_poschl_teller, mode_value, ode_oracle, scatter_mode, solution_from_cauchy, ModeCauchyData,
};
use kkbubble::fields::{
    analyze, default_centers, energy, energy_rate, in_state, out_state, resonance_scan, scattering, symplectic,
    synthesize, traversability_check, wave_operators, write_coefficients, DataBlock, EnergyKind, MasslessInState,
    ModeCoefficients, ModeKey, Tower, HORIZON,
};
use kkbubble::geodesics::{conserved, geodesic_residual, integrate, norm, orbit_period, rho_of, GeodesicState};
use kkbubble::spectral::{hardy_defect, solve_discrete, ContinuousTransform, RadialOperatorSpec};
use kkbubble::specfun::{lambert_w22_minus2, lambert_w22_series};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{E, PI};

pub struct Output {
    pub columns: String,
    pub rows: Vec<String>,
    pub notes: Vec<(String, String)>,
    pub extra_files: Vec<(String, String)>,
    pub passed: bool,
}

impl Output {
    fn new(columns: &str) -> Self {
        Output { columns: columns.into(), rows: Vec::new(), notes: Vec::new(), extra_files: Vec::new(), passed: true }
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    pub fn render(&self, command: &str, cfg: &Config) -> String {
        let mut s = format!("# header: kkbubble {}\n", env!("CARGO_PKG_VERSION"));
        s += &format!("# command: {command}\n# config-sha256: {}\n", cfg.hash());
        for line in cfg.effective().lines() {
            s += &format!("# config: {line}\n");
        }
        for (k, v) in &self.notes {
            s += &format!("# report: {k} = {v}\n");
        }
        s += &self.columns;
        s.push('\n');
        for r in &self.rows {
            s += r;
            s.push('\n');
        }
        s
    }
}

pub trait Job {
    fn run(&mut self) -> CliResult<Output>;
}

pub fn prepare(section: &str, cfg: &mut Config) -> CliResult<Box<dyn Job>> {
    Ok(match section {
        "spectrum" => Box::new(SpectrumJob::read(cfg)?),
        "transform" => Box::new(TransformJob::read(cfg)?),
        "evolve" => Box::new(EvolveJob::read(cfg)?),
        "scatter" => Box::new(ScatterJob::read(cfg)?),
        "geodesic" => Box::new(GeodesicJob::read(cfg)?),
        "curvature" => Box::new(CurvatureJob::read(cfg)?),
        "verify" => Box::new(VerifyJob::read(cfg)?),
        other => return Err(CliError::Config(format!("unknown command {other}"))),
    })
}

fn spacetime(cfg: &mut Config, key: &str, default: &str) -> CliResult<Spacetime> {
    let s = cfg.string(key, default)?;
    Spacetime::parse(&s).ok_or_else(|| CliError::Config(format!("{key}: expected witten or wormhole, got {s}")))
}

fn positive(key: &str, x: f64) -> CliResult<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key}: must be positive, got {x}")))
    }
}

fn nonneg(key: &str, x: f64) -> CliResult<f64> {
    if x >= 0.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("{key}: must be nonnegative, got {x}")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> CliResult<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(CliError::Config(format!("{key}: must be at least {min}, got {v}")))
    }
}

fn circle_momenta(cfg: &mut Config, key: &str, st: Spacetime) -> CliResult<Vec<i32>> {
    let ns: Vec<i32> = cfg.int_list(key, &[0])?.into_iter().map(|n| n as i32).collect();
    if ns.is_empty() {
        return Err(CliError::Config(format!("{key}: at least one circle momentum is needed")));
    }
    if st == Spacetime::Wormhole && ns != [0] {
        return Err(CliError::Config(format!("{key}: the wormhole has no circle direction; use n = [0]")));
    }
    Ok(ns)
}

fn fmt_c(z: C64) -> String {
    format!("{:e},{:e}", z.re, z.im)
}

// ---------------------------------------------------------------- spectrum

struct SpectrumJob {
    st: Spacetime,
    mass: f64,
    n: i32,
    count: usize,
    points: usize,
}

impl SpectrumJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        let st = spacetime(cfg, "spectrum.spacetime", "wormhole")?;
        let mass = nonneg("spectrum.mass", cfg.f64("spectrum.mass", 1.0)?)?;
        let n = cfg.i64("spectrum.n", 0)? as i32;
        let count = cfg.usize("spectrum.count", 5)?;
        let points = at_least("spectrum.points", cfg.usize("spectrum.points", 4096)?, 16)?;
        if mass == 0.0 && (st == Spacetime::Wormhole || n == 0) {
            return Err(CliError::Config(format!(
                "spectrum.mass: the massless {} operator{} has a purely continuous spectrum; use `transform`",
                st.name(),
                if st == Spacetime::Witten { " with n = 0" } else { "" }
            )));
        }
        if st == Spacetime::Wormhole && n != 0 {
            return Err(CliError::Config("spectrum.n: the wormhole has no circle direction; use n = 0".into()));
        }
        Ok(SpectrumJob { st, mass, n, count, points })
    }
}

impl Job for SpectrumJob {
    fn run(&mut self) -> CliResult<Output> {
        let mut out = Output::new("k,lambda,boundary_residual,drift");
        if self.count == 0 {
            out.note("eigenvalues", 0);
            return Ok(out);
        }
        let fine = solve_discrete(&RadialOperatorSpec::new(self.st, self.mass, self.n, self.points), self.count)?;
        let coarse = solve_discrete(&RadialOperatorSpec::new(self.st, self.mass, self.n, self.points / 2), self.count)?;
        let mut max_drift: f64 = 0.0;
        for k in 0..fine.eigenvalues.len() {
            let drift = (fine.eigenvalues[k] - coarse.eigenvalues[k]).abs();
            max_drift = max_drift.max(drift);
            out.rows.push(format!("{k},{:.12e},{:e},{:e}", fine.eigenvalues[k], fine.tail_mass[k], drift));
        }
        out.note("eigenvalues", fine.eigenvalues.len());
        out.note("max_drift_vs_half_grid", format!("{max_drift:e}"));
        out.note("gram_defect", format!("{:e}", fine.gram_defect()));
        Ok(out)
    }
}

// ---------------------------------------------------------------- transform

struct TransformJob {
    x_max: f64,
    nx: usize,
    lambda_max: f64,
    nlambda: usize,
    delta: f64,
    stride: usize,
}

impl TransformJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        Ok(TransformJob {
            x_max: positive("transform.x_max", cfg.f64("transform.x_max", 6.0)?)?,
            nx: at_least("transform.nx", cfg.usize("transform.nx", 512)?, 8)?,
            lambda_max: positive("transform.lambda_max", cfg.f64("transform.lambda_max", 100.0)?)?,
            nlambda: at_least("transform.nlambda", cfg.usize("transform.nlambda", 512)?, 8)?,
            delta: nonneg("transform.delta", cfg.f64("transform.delta", 0.0)?)?,
            stride: at_least("transform.stride", cfg.usize("transform.stride", 16)?, 1)?,
        })
    }
}

impl Job for TransformJob {
    fn run(&mut self) -> CliResult<Output> {
        let tr = ContinuousTransform::new(self.x_max, self.nx, self.lambda_max, self.nlambda, self.delta)?;
        let mut out = Output::new("lambda,x,kernel");
        let nx = tr.x.len();
        for j in (0..tr.lambda.len()).step_by(self.stride) {
            for i in (0..nx).step_by(self.stride) {
                out.rows.push(format!("{:e},{:e},{:e}", tr.lambda[j], tr.x[i], tr.table[j * nx + i]));
            }
        }
        let q = 0.25 * self.x_max;
        let u: Vec<C64> = tr.x.iter().map(|&x| C64::new(bump((x - q) / q), 0.0)).collect();
        let a = tr.norm2_x(&u);
        let b = tr.norm2_lambda(&tr.forward(&u)?);
        out.note("parseval_defect", format!("{:e}", (a - b).abs() / a));
        Ok(out)
    }
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - s * s)).exp()
    }
}

// ---------------------------------------------------------------- evolve

struct EvolveJob {
    st: Spacetime,
    mass: f64,
    ns: Vec<i32>,
    modes: usize,
    points: usize,
    l: u32,
    m: i32,
    width: f64,
    center: f64,
    times: Vec<f64>,
    snapshots: Option<String>,
}

impl EvolveJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        let st = spacetime(cfg, "evolve.spacetime", "witten")?;
        let mass = nonneg("evolve.mass", cfg.f64("evolve.mass", 1.0)?)?;
        let ns = circle_momenta(cfg, "evolve.n", st)?;
        let modes = at_least("evolve.modes", cfg.usize("evolve.modes", 64)?, 1)?;
        let points = at_least("evolve.points", cfg.usize("evolve.points", 2048)?, 16)?;
        let l = cfg.usize("evolve.l", 0)? as u32;
        let m = cfg.i64("evolve.m", 0)? as i32;
        if m.unsigned_abs() > l {
            return Err(CliError::Config(format!("evolve.m: |m| must not exceed l = {l}")));
        }
        let width = positive("evolve.width", cfg.f64("evolve.width", 1.0)?)?;
        let center = cfg.f64("evolve.center", 0.0)?;
        if st == Spacetime::Witten && center != 0.0 {
            return Err(CliError::Config("evolve.center: Witten data are centred at the bubble; use 0".into()));
        }
        let t0 = cfg.f64("evolve.t0", 0.0)?;
        let t1 = cfg.f64("evolve.t1", 5.0)?;
        let steps = at_least("evolve.steps", cfg.usize("evolve.steps", 20)?, 1)?;
        if !(t1 > t0) {
            return Err(CliError::Config("evolve.t1: must exceed evolve.t0".into()));
        }
        let times = (0..=steps).map(|i| t0 + (t1 - t0) * i as f64 / steps as f64).collect();
        let snapshots = cfg.opt_string("evolve.snapshots")?;
        Ok(EvolveJob { st, mass, ns, modes, points, l, m, width, center, times, snapshots })
    }
}

impl Job for EvolveJob {
    fn run(&mut self) -> CliResult<Output> {
        let tower = Tower::new(self.st, self.mass, &self.ns, self.modes, self.points)?;
        let blocks: Vec<DataBlock> = self
            .ns
            .iter()
            .map(|&n| {
                let f = tower
                    .x()
                    .iter()
                    .map(|&x| {
                        let s = (x - self.center) / self.width;
                        // regular at the bubble: sinh^|n| x behaviour
                        let reg = if self.st == Spacetime::Witten { x.sinh().powi(n.abs()) } else { 1.0 };
                        C64::new(reg * (-s * s).exp(), 0.0)
                    })
                    .collect();
                DataBlock { n, l: self.l, m: self.m, f, g: vec![C64::new(0.0, 0.0); tower.x().len()] }
            })
            .collect();
        let coefs = analyze(&tower, &blocks)?;
        let witten = self.st == Spacetime::Witten;
        let mut out = Output::new(if witten { "t,energy,rate" } else { "t,energy" });
        let mut snaps = String::new();
        let mut monotone = true;
        let mut prev: Option<(f64, f64)> = None;
        for &t in &self.times {
            let snap = synthesize(&tower, &coefs, t)?;
            if witten {
                let e = energy(&tower, &snap, EnergyKind::Field)?;
                let rate = energy_rate(&tower, &snap)?;
                if let Some((tp, ep)) = prev {
                    if tp >= 0.0 && e > ep * (1.0 + 1e-12) {
                        monotone = false;
                    }
                }
                prev = Some((t, e));
                out.rows.push(format!("{t},{e:e},{rate:e}"));
            } else {
                let e = energy(&tower, &snap, EnergyKind::Profile)?;
                out.rows.push(format!("{t},{e:e}"));
            }
            if self.snapshots.is_some() {
                let csv = snap.to_csv();
                let body = if snaps.is_empty() { &csv[..] } else { csv.split_once('\n').map_or("", |p| p.1) };
                snaps += body;
            }
        }
        out.note("modes", coefs.entries.len());
        if witten {
            out.note("energy_nonincreasing_for_t_ge_0", monotone);
        }
        if let Some(p) = &self.snapshots {
            out.extra_files.push((p.clone(), snaps));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- scatter

struct ScatterJob {
    st: Spacetime,
    mass: f64,
    ns: Vec<i32>,
    modes: usize,
    l_max: u32,
    seed: u64,
    coefficients: Option<String>,
}

impl ScatterJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        let st = spacetime(cfg, "scatter.spacetime", "witten")?;
        let mass = nonneg("scatter.mass", cfg.f64("scatter.mass", 1.0)?)?;
        let ns = circle_momenta(cfg, "scatter.n", st)?;
        let modes = at_least("scatter.modes", cfg.usize("scatter.modes", 4)?, 1)?;
        let l_max = cfg.usize("scatter.l_max", 3)? as u32;
        let seed = cfg.usize("scatter.seed", 1)? as u64;
        let coefficients = cfg.opt_string("scatter.coefficients")?;
        if mass == 0.0 && (st == Spacetime::Wormhole || ns.contains(&0)) {
            return Err(CliError::Config(
                "scatter.mass: massless sectors have a continuous spectrum and are not part of a discrete tower".into(),
            ));
        }
        Ok(ScatterJob { st, mass, ns, modes, l_max, seed, coefficients })
    }
}

fn random_coefficients(tower: &Tower, ns: &[i32], modes: usize, l_max: u32, rng: &mut ChaCha8Rng) -> CliResult<ModeCoefficients> {
    let mut c = ModeCoefficients::empty(tower.spacetime, tower.mass);
    let mut rc = || C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    for &n in ns {
        for k in 0..modes {
            for l in 0..=l_max {
                for m in -(l as i32)..=(l as i32) {
                    let (p, q) = (rc(), rc());
                    c.entries.extend(ModeCoefficients::single(tower, ModeKey { n, k, l, m }, p, q)?.entries);
                }
            }
        }
    }
    Ok(c)
}

impl Job for ScatterJob {
    fn run(&mut self) -> CliResult<Output> {
        let tower = Tower::new(self.st, self.mass, &self.ns, self.modes, 1024)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let a = random_coefficients(&tower, &self.ns, self.modes, self.l_max, &mut rng)?;
        let b = random_coefficients(&tower, &self.ns, self.modes, self.l_max, &mut rng)?;
        let (amps_a, amps_b) = (wave_operators(&a)?, wave_operators(&b)?);
        let mut out = Output::new(
            "n,k,l,m,lambda,in_plus_re,in_plus_im,in_minus_re,in_minus_im,out_plus_re,out_plus_im,out_minus_re,out_minus_im",
        );
        let mut unitarity: f64 = 0.0;
        for e in &amps_a {
            let scale = e.in_plus.norm().max(e.in_minus.norm()).max(1.0);
            unitarity = unitarity
                .max((e.out_plus.norm() - e.in_plus.norm()).abs() / scale)
                .max((e.out_minus.norm() - e.in_minus.norm()).abs() / scale);
            out.rows.push(format!(
                "{},{},{},{},{:.12e},{},{},{},{}",
                e.key.n,
                e.key.k,
                e.key.l,
                e.key.m,
                e.lambda,
                fmt_c(e.in_plus),
                fmt_c(e.in_minus),
                fmt_c(e.out_plus),
                fmt_c(e.out_minus)
            ));
        }
        let (sa, sb) = (in_state(&amps_a), in_state(&amps_b));
        let (oa, ob) = (scattering(&sa)?, scattering(&sb)?);
        let isometry = (oa.weighted_norm2() - sa.weighted_norm2()).abs() / sa.weighted_norm2();
        let s0 = symplectic(&sa, &sb)?;
        let sym = (symplectic(&oa, &ob)? - s0).norm() / (1.0 + s0.norm());
        let direct = out_state(&amps_a);
        let consistency = oa.entries.iter().zip(&direct.entries).map(|(x, y)| (x.v - y.v).norm()).fold(0.0, f64::max);
        out.note("modes", amps_a.len());
        out.note("unitarity_defect", format!("{unitarity:e}"));
        out.note("isometry_defect", format!("{isometry:e}"));
        out.note("symplectic_defect", format!("{sym:e}"));
        out.note("scattered_in_vs_out_state", format!("{consistency:e}"));
        out.passed = unitarity < 1e-12 && isometry < 1e-12 && sym < 1e-10;
        if let Some(p) = &self.coefficients {
            out.extra_files.push((p.clone(), write_coefficients(&a)));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- geodesic

#[derive(Clone, Copy, PartialEq)]
enum Preset {
    NullThroughBubble,
    ThroughOrigin,
    NullCircle,
    Custom,
}

struct GeodesicJob {
    preset: Preset,
    st: Spacetime,
    s0: GeodesicState,
    span: (f64, f64),
    tol: f64,
}

fn five(key: &str, v: Vec<f64>) -> CliResult<[f64; 5]> {
    v.try_into().map_err(|v: Vec<f64>| CliError::Config(format!("{key}: expected 5 components, got {}", v.len())))
}

impl GeodesicJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        let name = cfg.string("geodesic.preset", "null-through-bubble")?;
        let preset = match name.as_str() {
            "null-through-bubble" => Preset::NullThroughBubble,
            "through-origin" => Preset::ThroughOrigin,
            "null-circle" => Preset::NullCircle,
            "custom" => Preset::Custom,
            _ => {
                return Err(CliError::Config(format!(
                    "geodesic.preset: expected null-through-bubble, through-origin, null-circle or custom, got {name}"
                )))
            }
        };
        let tol = positive("geodesic.tol", cfg.f64("geodesic.tol", 1e-12)?)?;
        let (st, s0, default_span) = if preset == Preset::Custom {
            let st = spacetime(cfg, "geodesic.spacetime", "witten")?;
            let chart_name = cfg.string("geodesic.chart", "schwarzschild")?;
            let chart = Chart::parse(&chart_name)
                .ok_or_else(|| CliError::Config(format!("geodesic.chart: unknown chart {chart_name}")))?;
            let coords = five("geodesic.coords", cfg.f64_list("geodesic.coords", &[0.0, 2.0, PI / 2.0, 0.0, 0.0])?)?;
            let velocity = five("geodesic.velocity", cfg.f64_list("geodesic.velocity", &[1.0, 0.0, 0.0, 0.0, 0.0])?)?;
            let s0 = GeodesicState { point: ChartPoint::new(chart, coords), velocity };
            (st, s0, [0.0, 20.0])
        } else {
            for key in ["geodesic.spacetime", "geodesic.chart", "geodesic.coords", "geodesic.velocity"] {
                if cfg.has(key) {
                    return Err(CliError::Config(format!("{key}: only used with preset = custom")));
                }
            }
            let st = Spacetime::Witten;
            match preset {
                Preset::NullThroughBubble => {
                    let s0 = GeodesicState {
                        point: ChartPoint::new(Chart::Cartesian, [0.0, 0.0, 0.0, PI / 2.0, 0.5]),
                        velocity: [1.0, E / 2.0, 0.0, 0.0, 0.0],
                    };
                    (st, s0, [-6.0, 6.0])
                }
                Preset::ThroughOrigin => {
                    let (tdot, e) = (1.5f64, 1.0f64);
                    let ydot = ((tdot * tdot - e) / (4.0 * (-2.0f64).exp())).sqrt();
                    let s0 = GeodesicState {
                        point: ChartPoint::new(Chart::Cartesian, [0.0, 0.0, 0.0, PI / 2.0, 0.0]),
                        velocity: [tdot, ydot, 0.0, 0.0, 0.0],
                    };
                    let p = orbit_period(e, &conserved(&s0, st)?)?;
                    (st, s0, [0.0, 3.2 * p])
                }
                _ => {
                    let s0 = GeodesicState {
                        point: ChartPoint::new(Chart::Schwarzschild, [0.0, 2f64.sqrt(), PI / 2.0, 0.3, 0.0]),
                        velocity: [1.0, 0.0, 0.0, 0.0, 2.0],
                    };
                    (st, s0, [0.0, 20.0])
                }
            }
        };
        let span = cfg.f64_list("geodesic.span", &default_span)?;
        if span.len() != 2 || span[0] == span[1] {
            return Err(CliError::Config("geodesic.span: expected two distinct affine parameters".into()));
        }
        let mut job = GeodesicJob { preset, st, s0, span: (span[0], span[1]), tol };
        if span[0] != 0.0 {
            // the preset data sit at affine parameter 0; integrate there first
            job.s0 = integrate(&job.s0, (0.0, span[0]), tol, st)?.last().to_owned();
        }
        Ok(job)
    }
}

impl Job for GeodesicJob {
    fn run(&mut self) -> CliResult<Output> {
        let st = self.st;
        let c0 = conserved(&self.s0, st)?.as_array();
        let n0 = norm(&self.s0, st)?;
        let tr = integrate(&self.s0, self.span, self.tol, st)?;
        let mut out = Output::new("lambda,chart,x0,x1,x2,x3,x4,v0,v1,v2,v3,v4");
        let (mut drift, mut ndrift, mut straight, mut circle): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
        for (lam, s) in &tr.samples {
            let c = conserved(s, st)?.as_array();
            for k in 0..5 {
                drift = drift.max((c[k] - c0[k]).abs() / c0[k].abs().max(1.0));
            }
            ndrift = ndrift.max((norm(s, st)? - n0).abs());
            match self.preset {
                Preset::NullThroughBubble => {
                    // closed form: the line y = (e/2) λ, z = 0 with t = λ near the bubble's core
                    let c = convert(&s.point, Chart::Cartesian, st)?.coords;
                    straight = straight.max(c[2].abs() / c[1].abs().max(1.0));
                }
                Preset::NullCircle => circle = circle.max((rho_of(&s.point, st)? - 2f64.sqrt()).abs()),
                _ => {}
            }
            let p = &s.point.coords;
            let v = &s.velocity;
            out.rows.push(format!(
                "{lam:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                s.point.chart.name(),
                p[0],
                p[1],
                p[2],
                p[3],
                p[4],
                v[0],
                v[1],
                v[2],
                v[3],
                v[4]
            ));
        }
        out.note("samples", tr.samples.len());
        out.note("chart_switches", tr.chart_switches);
        out.note("conserved_drift", format!("{drift:e}"));
        out.note("norm_drift", format!("{ndrift:e}"));
        out.note("rho_max", format!("{:.12}", tr.rho_max));
        match self.preset {
            Preset::NullThroughBubble => {
                let y_end = convert(&tr.last().point, Chart::Cartesian, st)?.coords[1];
                let y_start = convert(&tr.samples[0].1.point, Chart::Cartesian, st)?.coords[1];
                out.note("straight_line_residual", format!("{straight:e}"));
                out.note("crosses_bubble", y_start < 0.0 && y_end > 0.0);
                out.passed = straight < 1e-8;
            }
            Preset::ThroughOrigin => {
                let cs = conserved(&self.s0, st)?;
                let r_star = cs.r_star()?;
                let predicted = orbit_period(cs.e, &cs)?;
                out.note("period_predicted", format!("{predicted:.10}"));
                match tr.period() {
                    Some(p) => out.note("period_measured", format!("{p:.10}")),
                    None => out.note("period_measured", "none"),
                }
                out.note("r_star", format!("{r_star:.12}"));
            }
            Preset::NullCircle => out.note("rho_deviation", format!("{circle:e}")),
            Preset::Custom => {}
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------- curvature

struct CurvatureJob {
    t: f64,
    x: [f64; 3],
}

impl CurvatureJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        let st = spacetime(cfg, "curvature.spacetime", "wormhole")?;
        if st == Spacetime::Witten {
            return Err(CliError::Config(
                "curvature.spacetime: the Witten metric is Ricci flat; curvature tables are computed for the wormhole".into(),
            ));
        }
        let t = cfg.f64("curvature.T", 0.1)?;
        let x: [f64; 3] = cfg
            .f64_list("curvature.X", &[1.0, 0.0, 0.0])?
            .try_into()
            .map_err(|_| CliError::Config("curvature.X: expected 3 components".into()))?;
        if x.iter().map(|v| v * v).sum::<f64>() <= t * t {
            return Err(CliError::Config("curvature.X: the wormhole chart needs |X|^2 > T^2".into()));
        }
        Ok(CurvatureJob { t, x })
    }
}

impl Job for CurvatureJob {
    fn run(&mut self) -> CliResult<Output> {
        let d = wormhole_curvature(self.t, self.x)?;
        let mut out = Output::new("quantity,a,b,value");
        for (name, m) in [("ricci", &d.ricci), ("stress", &d.stress)] {
            for a in 0..4 {
                for b in 0..4 {
                    out.rows.push(format!("{name},{a},{b},{:e}", m[a][b]));
                }
            }
        }
        out.rows.push(format!("scalar,,,{:e}", d.scalar));
        let (mut least, mut agree): (f64, f64) = (f64::INFINITY, 0.0);
        for j in 1..=3 {
            for sign in [1.0, -1.0] {
                let w = nec_witness(self.t, self.x, j, sign)?;
                agree = agree.max((w - nec_contraction(&d, j, sign)).abs());
                least = least.min(w);
                out.rows.push(format!("nec,{j},{sign},{w:e}"));
            }
        }
        out.note("scalar", format!("{:e}", d.scalar));
        out.note("nec_witness", format!("{least:e}"));
        out.note("nec_violated", least < 0.0);
        out.note("closed_vs_contracted", format!("{agree:e}"));
        Ok(out)
    }
}

// ---------------------------------------------------------------- verify

const SUITES: [&str; 6] = ["desitter", "specfun", "spectral", "geodesics", "curvature", "fields"];

struct VerifyJob {
    suites: Vec<&'static str>,
    seed: u64,
}

impl VerifyJob {
    fn read(cfg: &mut Config) -> CliResult<Self> {
        let s = cfg.string("verify.suite", "all")?;
        let suites = if s == "all" {
            SUITES.to_vec()
        } else {
            vec![*SUITES
                .iter()
                .find(|&&x| x == s)
                .ok_or_else(|| CliError::Config(format!("verify.suite: expected one of {} or all, got {s}", SUITES.join(", "))))?]
        };
        let seed = cfg.usize("verify.seed", 7)? as u64;
        Ok(VerifyJob { suites, seed })
    }
}

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
    pass: bool,
}

fn below(name: &'static str, value: f64, limit: f64) -> Check {
    Check { name, value, limit, pass: value < limit }
}

fn rc(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn suite_desitter(rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let mut unit: f64 = 0.0;
    for _ in 0..1000 {
        let (l, lam) = (rng.gen_range(0..=12u32), rng.gen_range(1.0001..60.0));
        let (ip, im) = (rc(rng), rc(rng));
        let (op, om) = scatter_mode(l, lam, ip, im)?;
        unit = unit.max((op.norm() - ip.norm()).abs()).max((om.norm() - im.norm()).abs());
    }
    let mut mix: f64 = 0.0;
    for _ in 0..10 {
        let (l, lam) = (rng.gen_range(0..=8u32), rng.gen_range(1.05..30.0f64));
        let mu = (lam - 1.0).sqrt();
        let e = C64::new(0.0, -30.0 * mu).exp();
        let tr = integrate_poschl_teller(lam - 1.0, (l * (l + 1)) as f64, -30.0, e, C64::new(0.0, mu) * e, 30.0, 1e-10)?;
        let (cp, cm) = fit_sinusoid(|t| tr.eval(t).map(|y| C64::new(y[0], y[1])), mu, (25.0, 30.0), 400)?;
        mix = mix.max(cm.norm() / cp.norm());
    }
    let mut cauchy: f64 = 0.0;
    for _ in 0..100 {
        let (l, lam) = (rng.gen_range(0..=12u32), rng.gen_range(1.01..60.0));
        let data = ModeCauchyData { w0: rc(rng), w0p: rc(rng) };
        let sol = solution_from_cauchy(lam, l, data)?;
        let (w, wp) = mode_value(&sol, 0.0);
        cauchy = cauchy.max((w - data.w0).norm() / data.w0.norm()).max((wp - data.w0p).norm() / data.w0p.norm());
    }
    let mut closed: f64 = 0.0;
    for _ in 0..5 {
        let (l, lam) = (rng.gen_range(0..=8u32), rng.gen_range(1.05..30.0));
        let data = ModeCauchyData { w0: rc(rng), w0p: rc(rng) };
        let sol = solution_from_cauchy(lam, l, data)?;
        let tr = ode_oracle(lam, l, data, (-20.0, 20.0), 1e-10)?;
        for k in 0..=400 {
            let t = -20.0 + 0.1 * k as f64;
            let wo = tr.eval(t).ok_or_else(|| CliError::Convergence("oracle range".into()))?.0;
            closed = closed.max((mode_value(&sol, t).0 - wo).norm());
        }
    }
    Ok(vec![
        below("unitarity", unit, 1e-12),
        below("reflectionless", mix, 1e-5),
        below("cauchy_map", cauchy, 1e-10),
        below("closed_form_vs_ode", closed, 1e-6),
    ])
}

fn suite_specfun() -> CliResult<Vec<Check>> {
    let (mut res, mut series): (f64, f64) = (0.0, 0.0);
    for k in 0..=600 {
        let s = 10f64.powf(-12.0 + 18.0 * k as f64 / 600.0);
        let u = lambert_w22_minus2(s)?;
        res = res.max((u / (u + 4.0) * (u + 2.0).exp() - s).abs() / s);
    }
    for k in 0..=100 {
        let s = 0.001 * k as f64;
        let w = 2.0 + lambert_w22_minus2(s)?;
        series = series.max((lambert_w22_series(s, 3) - w).abs() / w);
    }
    Ok(vec![below("lambert_residual", res, 1e-12), below("lambert_series", series, 1e-4)])
}

fn suite_spectral(rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let mut floor_gap = f64::INFINITY;
    let mut gram: f64 = 0.0;
    for &(m, n) in &[(1.0, 0), (0.0, 1), (0.5, -2)] {
        let s = solve_discrete(&RadialOperatorSpec::new(Spacetime::Witten, m, n, 4096), 4)?;
        let floor = 1.0 + (n * n) as f64 + m * m;
        floor_gap = floor_gap.min(s.eigenvalues.iter().map(|l| l - floor).fold(f64::INFINITY, f64::min));
        gram = gram.max(s.gram_defect());
    }
    let tr = ContinuousTransform::new(6.0, 2048, 200.0, 1024, 0.0)?;
    let mut parseval: f64 = 0.0;
    for _ in 0..3 {
        let (c, w) = (rng.gen_range(0.0..2.0), rng.gen_range(1.5..2.5));
        let u: Vec<C64> = tr.x.iter().map(|&x| C64::new(bump((x - c) / w), 0.0)).collect();
        let a = tr.norm2_x(&u);
        parseval = parseval.max((a - tr.norm2_lambda(&tr.forward(&u)?)).abs() / a);
    }
    let mut hardy = f64::INFINITY;
    for n in [0, 1, 2] {
        let (a, b) = (rng.gen_range(0.1..1.0), rng.gen_range(1.5..4.0));
        let (c, w) = (0.5 * (a + b), 0.5 * (b - a));
        let f = |x: f64| {
            let s = (x - c) / w;
            let g = bump(s);
            let dg = if g == 0.0 { 0.0 } else { g * (-2.0 * s / (1.0 - s * s).powi(2)) / w };
            (g, dg)
        };
        hardy = hardy.min(hardy_defect(f, n, (a, b), 2000).defect());
    }
    Ok(vec![
        Check { name: "witten_floor_gap", value: floor_gap, limit: 0.0, pass: floor_gap > 0.0 },
        below("gram_defect", gram, 1e-8),
        below("parseval", parseval, 1e-3),
        Check { name: "hardy_defect", value: hardy, limit: 0.0, pass: hardy >= 0.0 },
    ])
}

fn suite_geodesics() -> CliResult<Vec<Check>> {
    let st = Spacetime::Witten;
    let max_abs = |r: [f64; 5]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut res: f64 = 0.0;
    for i in 0..=20 {
        let l = -5.0 + 0.5 * i as f64;
        let q = 1.0 + l * l;
        let s = GeodesicState {
            point: ChartPoint::new(Chart::Schwarzschild, [l.asinh(), 2.0, PI / 2.0, l.atan(), 0.7]),
            velocity: [1.0 / q.sqrt(), 0.0, 0.0, 1.0 / q, 0.0],
        };
        res = res.max(max_abs(geodesic_residual(&s, [-l / q.powf(1.5), 0.0, 0.0, -2.0 * l / (q * q), 0.0], st)?));
        let b = GeodesicState { point: ChartPoint::new(Chart::Cartesian, [l, 0.0, 0.0, 0.9, 2.1]), velocity: [1.0, 0.0, 0.0, 0.0, 0.0] };
        res = res.max(max_abs(geodesic_residual(&b, [0.0; 5], st)?));
        let c = GeodesicState {
            point: ChartPoint::new(Chart::Schwarzschild, [l, 2f64.sqrt(), PI / 2.0, 0.3, 2.0 * l]),
            velocity: [1.0, 0.0, 0.0, 0.0, 2.0],
        };
        res = res.max(max_abs(geodesic_residual(&c, [0.0; 5], st)?));
    }
    let s0 = GeodesicState {
        point: ChartPoint::new(Chart::Schwarzschild, [-2.0, 1.8, PI / 2.0, 0.4, 0.0]),
        velocity: [0.6, -0.3, 0.0, 0.05, 0.4],
    };
    let c0 = conserved(&s0, st)?.as_array();
    let mut drift: f64 = 0.0;
    for (_, s) in &integrate(&s0, (0.0, 20.0), 1e-12, st)?.samples {
        let c = conserved(s, st)?.as_array();
        for k in 0..5 {
            drift = drift.max((c[k] - c0[k]).abs() / c0[k].abs().max(1.0));
        }
    }
    let ydot = ((1.5f64 * 1.5 - 1.0) / (4.0 * (-2.0f64).exp())).sqrt();
    let o = GeodesicState { point: ChartPoint::new(Chart::Cartesian, [0.0, 0.0, 0.0, PI / 2.0, 0.0]), velocity: [1.5, ydot, 0.0, 0.0, 0.0] };
    let cs = conserved(&o, st)?;
    let p = orbit_period(cs.e, &cs)?;
    let tr = integrate(&o, (0.0, 3.2 * p), 1e-12, st)?;
    let period = tr.period().map_or(f64::INFINITY, |m| (m - p).abs() / p);
    Ok(vec![
        below("explicit_residual", res, 1e-10),
        below("conserved_drift", drift, 1e-8),
        below("period_vs_quadrature", period, 1e-4),
        below("rho_max_excess", tr.rho_max - cs.r_star()?, 1e-6),
    ])
}

fn suite_curvature(rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let (mut scalar, mut agree, mut nec): (f64, f64, f64) = (0.0, 0.0, f64::NEG_INFINITY);
    let mut count = 0;
    while count < 100 {
        let x = [rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0)];
        let t: f64 = rng.gen_range(-3.0..3.0);
        if x.iter().map(|v| v * v).sum::<f64>() - t * t < 1e-3 {
            continue;
        }
        count += 1;
        let d = wormhole_curvature(t, x)?;
        let scale = d.ricci.iter().flatten().map(|v| v.abs()).fold(1.0, f64::max);
        scalar = scalar.max(d.scalar.abs() / scale);
        let j = (0..3).max_by(|&a, &b| x[a].abs().total_cmp(&x[b].abs())).unwrap_or(0) + 1;
        let sign = if (t - x[j - 1]).abs() > (t + x[j - 1]).abs() { 1.0 } else { -1.0 };
        let w = nec_witness(t, x, j, sign)?;
        agree = agree.max((w - nec_contraction(&d, j, sign)).abs() / w.abs().max(1.0));
        nec = nec.max(w);
    }
    Ok(vec![
        below("scalar_curvature", scalar, 1e-12),
        below("nec_closed_vs_contracted", agree, 1e-10),
        Check { name: "nec_witness_max", value: nec, limit: 0.0, pass: nec < 0.0 },
    ])
}

fn suite_fields(rng: &mut ChaCha8Rng) -> CliResult<Vec<Check>> {
    let tower = Tower::new(Spacetime::Witten, 1.0, &[0, 1], 4, 1024)?;
    let a = random_coefficients(&tower, &[0, 1], 4, 3, rng)?;
    let b = random_coefficients(&tower, &[0, 1], 4, 3, rng)?;
    let (sa, sb) = (in_state(&wave_operators(&a)?), in_state(&wave_operators(&b)?));
    let (oa, ob) = (scattering(&sa)?, scattering(&sb)?);
    let iso = (oa.weighted_norm2() - sa.weighted_norm2()).abs() / sa.weighted_norm2();
    let s0 = symplectic(&sa, &sb)?;
    let sym = (symplectic(&oa, &ob)? - s0).norm() / (1.0 + s0.norm());
    let r = resonance_scan(2, &default_centers(4), 0.4)?;
    let loc = if r.poles.len() == 2 {
        r.poles.iter().zip([1.0, 2.0]).map(|(p, k)| (p.zeta - C64::new(0.0, k)).norm()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    let x: Vec<f64> = (0..2400).map(|i| -60.0 + 0.05 * i as f64).collect();
    let state = MasslessInState::gaussian(2, -10.0, 1.0, 5.0, 1.0, 12.0, 1200);
    let leak = traversability_check(&state, HORIZON, &x)?.leakage;
    Ok(vec![
        below("isometry", iso, 1e-12),
        below("symplectic", sym, 1e-10),
        below("resonances_l2", loc, 1e-8),
        below("massless_leakage", leak, 1e-4),
    ])
}

impl Job for VerifyJob {
    fn run(&mut self) -> CliResult<Output> {
        let mut out = Output::new("suite,check,value,limit,status");
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut failed = 0;
        for &suite in &self.suites {
            let checks = match suite {
                "desitter" => suite_desitter(&mut rng)?,
                "specfun" => suite_specfun()?,
                "spectral" => suite_spectral(&mut rng)?,
                "geodesics" => suite_geodesics()?,
                "curvature" => suite_curvature(&mut rng)?,
                _ => suite_fields(&mut rng)?,
            };
            for c in checks {
                failed += usize::from(!c.pass);
                let status = if c.pass { "PASS" } else { "FAIL" };
                out.rows.push(format!("{suite},{},{:e},{:e},{status}", c.name, c.value, c.limit));
            }
        }
        out.note("failed", failed);
        out.passed = failed == 0;
        Ok(out)
    }
}
