//! Coordinate charts of the Witten bubble spacetime and of the Lorentzian
//! Hawking wormhole, metrics, Christoffel symbols and wormhole curvature.
//!
//! Witten charts are five dimensional:
//!
//! | chart         | coordinates       |
//! |---------------|-------------------|
//! | Schwarzschild | (t, ρ, θ, φ, ψ)   |
//! | Polar         | (t, r, θ, φ, ψ)   |
//! | Cartesian     | (t, y, z, θ, φ)   |
//! | XChart        | (t, x, θ, φ, ψ)   |
//! | Rindler       | (τ, ξ, θ, φ, ψ)   |
//! | Conformal     | (T, Σ, θ, φ, ψ)   |
//!
//! The wormhole is the z = 0 slice: ψ ∈ {0, π} labels the two sheets, the
//! XChart coordinate x is signed (x > 0 on the ψ = 0 sheet) and so is the
//! Cartesian y. Wormhole metrics drop ψ (or z) and are 4×4.

use crate::error::{domain, Error, Result};
use crate::specfun::lambert_w22_minus2;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Chart {
    Schwarzschild,
    Polar,
    Cartesian,
    XChart,
    Rindler,
    Conformal,
}

impl Chart {
    pub const ALL: [Chart; 6] =
        [Chart::Schwarzschild, Chart::Polar, Chart::Cartesian, Chart::XChart, Chart::Rindler, Chart::Conformal];

    pub fn name(self) -> &'static str {
        match self {
            Chart::Schwarzschild => "schwarzschild",
            Chart::Polar => "polar",
            Chart::Cartesian => "cartesian",
            Chart::XChart => "xchart",
            Chart::Rindler => "rindler",
            Chart::Conformal => "conformal",
        }
    }

    pub fn parse(s: &str) -> Option<Chart> {
        Chart::ALL.into_iter().find(|c| c.name() == s)
    }

    /// Chart coordinate indices carried by a wormhole point, in metric order.
    pub fn wormhole_axes(self) -> [usize; 4] {
        match self {
            Chart::Cartesian => [0, 1, 3, 4],
            _ => [0, 1, 2, 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spacetime {
    Witten,
    Wormhole,
}

impl Spacetime {
    pub fn dim(self) -> usize {
        match self {
            Spacetime::Witten => 5,
            Spacetime::Wormhole => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Spacetime::Witten => "witten",
            Spacetime::Wormhole => "wormhole",
        }
    }

    pub fn parse(s: &str) -> Option<Spacetime> {
        match s {
            "witten" => Some(Spacetime::Witten),
            "wormhole" => Some(Spacetime::Wormhole),
            _ => None,
        }
    }

    fn axes(self, chart: Chart) -> [usize; 5] {
        match self {
            Spacetime::Witten => [0, 1, 2, 3, 4],
            Spacetime::Wormhole => {
                let a = chart.wormhole_axes();
                [a[0], a[1], a[2], a[3], usize::MAX]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartPoint {
    pub chart: Chart,
    pub coords: [f64; 5],
}

impl ChartPoint {
    pub fn new(chart: Chart, coords: [f64; 5]) -> Self {
        ChartPoint { chart, coords }
    }
}

pub type Mat5 = [[f64; 5]; 5];

/// Metric components on the active axes; `axes[a]` is the chart coordinate index of row a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub dim: usize,
    pub axes: [usize; 5],
    pub g: Mat5,
}

impl MetricValue {
    pub fn inverse(&self) -> Result<Mat5> {
        invert(&self.g, self.dim)
    }
}

/// Γ^a_{bc} = gamma[a][b][c] on the active axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChristoffelTable {
    pub dim: usize,
    pub axes: [usize; 5],
    pub gamma: [[[f64; 5]; 5]; 5],
}

impl ChristoffelTable {
    pub fn max_abs_diff(&self, other: &ChristoffelTable) -> f64 {
        let mut m: f64 = 0.0;
        for a in 0..self.dim {
            for b in 0..self.dim {
                for c in 0..self.dim {
                    m = m.max((self.gamma[a][b][c] - other.gamma[a][b][c]).abs());
                }
            }
        }
        m
    }
}

pub(crate) fn invert(m: &Mat5, n: usize) -> Result<Mat5> {
    let mut a = *m;
    let mut inv = [[0.0; 5]; 5];
    for i in 0..n {
        inv[i][i] = 1.0;
    }
    let scale = (0..n).map(|i| (0..n).map(|j| m[i][j].abs()).fold(0.0, f64::max)).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        if !(a[piv][col].abs() > 1e-14 * scale) {
            return Err(Error::Domain("singular metric".into()));
        }
        a.swap(piv, col);
        inv.swap(piv, col);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Ok(inv)
}

// ---------------------------------------------------------------------------
// conversions through the x chart

fn sheet_sign(psi: f64) -> Result<f64> {
    let c = psi.cos();
    if (c - 1.0).abs() < 1e-12 {
        Ok(1.0)
    } else if (c + 1.0).abs() < 1e-12 {
        Ok(-1.0)
    } else {
        domain(format!("wormhole sheet label psi must be 0 or pi, got {psi}"))
    }
}

fn check_angles(p: &ChartPoint) -> Result<()> {
    let th = match p.chart {
        Chart::Cartesian => p.coords[3],
        _ => p.coords[2],
    };
    if !(0.0..=PI).contains(&th) {
        return domain(format!("theta must lie in [0, pi], got {th}"));
    }
    if p.coords.iter().any(|v| !v.is_finite()) {
        return domain("non-finite coordinate");
    }
    Ok(())
}

/// (ρ - 1)/(ρ + 1) e^{2ρ} for ρ = cosh x, accurate near x = 0.
fn cartesian_radius2(x: f64) -> Result<f64> {
    let rho = x.cosh();
    let rm1 = 2.0 * (0.5 * x).sinh().powi(2);
    let ln_s = rm1.ln() - (rho + 1.0).ln() + 2.0 * rho;
    if ln_s > 700.0 {
        return domain(format!("cartesian chart overflows at rho = {rho:.1} (needs rho < 350)"));
    }
    Ok(if rm1 == 0.0 { 0.0 } else { ln_s.exp() })
}

/// s(x) = sinh x · e^ρ/(1+ρ), odd in x.
fn cartesian_s(x: f64) -> Result<f64> {
    Ok(x.signum() * cartesian_radius2(x)?.sqrt())
}

fn cartesian_ds(x: f64) -> f64 {
    let rho = x.cosh();
    rho * rho * rho.exp() / (rho + 1.0)
}

/// Canonical x-chart coordinates (t, x, θ, φ, ψ); x is signed for the wormhole.
pub fn to_xchart(p: &ChartPoint, st: Spacetime) -> Result<[f64; 5]> {
    check_angles(p)?;
    let c = p.coords;
    let worm = st == Spacetime::Wormhole;
    let signed = |ax: f64, psi: f64| -> Result<(f64, f64)> {
        if worm {
            let s = sheet_sign(psi)?;
            Ok((s * ax, if s > 0.0 { 0.0 } else { PI }))
        } else {
            Ok((ax, psi))
        }
    };
    match p.chart {
        Chart::XChart => {
            if !worm && c[1] < 0.0 {
                return domain(format!("xchart requires x >= 0, got {}", c[1]));
            }
            let psi = if worm { if c[1] >= 0.0 { 0.0 } else { PI } } else { c[4] };
            Ok([c[0], c[1], c[2], c[3], psi])
        }
        Chart::Schwarzschild => {
            if !(c[1] > 1.0) {
                return domain(format!("schwarzschild chart requires rho > 1, got {}", c[1]));
            }
            let (x, psi) = signed(c[1].acosh(), c[4])?;
            Ok([c[0], x, c[2], c[3], psi])
        }
        Chart::Polar => {
            if c[1] < 0.0 {
                return domain(format!("polar chart requires r >= 0, got {}", c[1]));
            }
            let (x, psi) = signed(c[1].asinh(), c[4])?;
            Ok([c[0], x, c[2], c[3], psi])
        }
        Chart::Cartesian => {
            let (y, z) = (c[1], c[2]);
            if worm && z != 0.0 {
                return domain(format!("wormhole cartesian points require z = 0, got {z}"));
            }
            let u = lambert_w22_minus2(y * y + z * z)?;
            let r = (u * (1.0 + 0.25 * u)).sqrt();
            let x = r.asinh();
            if worm {
                let s = if y < 0.0 { -1.0 } else { 1.0 };
                Ok([c[0], s * x, c[3], c[4], if s > 0.0 { 0.0 } else { PI }])
            } else {
                let mut psi = z.atan2(y);
                if psi < 0.0 {
                    psi += 2.0 * PI;
                }
                Ok([c[0], x, c[3], c[4], psi])
            }
        }
        Chart::Rindler => {
            let (tau, xi) = (c[0], c[1]);
            if !(xi > (tau * tau + 1.0).sqrt()) {
                return domain(format!("rindler chart requires xi > sqrt(tau^2 + 1), got tau={tau}, xi={xi}"));
            }
            let rho = ((xi - tau) * (xi + tau)).sqrt();
            let t = (tau / xi).atanh();
            let (x, psi) = signed(rho.acosh(), c[4])?;
            Ok([t, x, c[2], c[3], psi])
        }
        Chart::Conformal => {
            let (tt, ss) = (c[0], c[1]);
            let s2 = (ss - tt) * (ss + tt);
            if !(ss > tt.abs()) {
                return domain(format!("conformal chart requires Sigma > |T|, got T={tt}, Sigma={ss}"));
            }
            if !worm && s2 < 0.25 {
                return domain(format!("conformal chart requires Sigma^2 - T^2 >= 1/4, got {s2}"));
            }
            let x = 0.5 * (4.0 * s2).ln();
            let t = (tt / ss).atanh();
            let psi = if worm { if x >= 0.0 { 0.0 } else { PI } } else { c[4] };
            Ok([t, x.max(if worm { f64::NEG_INFINITY } else { 0.0 }), c[2], c[3], psi])
        }
    }
}

/// Maps canonical x-chart coordinates into `target`.
pub fn from_xchart(xc: [f64; 5], target: Chart, st: Spacetime) -> Result<ChartPoint> {
    let [t, x, th, ph, psi] = xc;
    let worm = st == Spacetime::Wormhole;
    if !worm && x < 0.0 {
        return domain(format!("xchart requires x >= 0, got {x}"));
    }
    let ax = x.abs();
    let label = if worm { if x < 0.0 { PI } else { 0.0 } } else { psi };
    let coords = match target {
        Chart::XChart => [t, x, th, ph, label],
        Chart::Schwarzschild => {
            let rho = x.cosh();
            if !(rho > 1.0) {
                return domain("schwarzschild chart requires rho > 1 (point on the bubble, use cartesian)");
            }
            [t, rho, th, ph, label]
        }
        Chart::Polar => [t, ax.sinh(), th, ph, label],
        Chart::Cartesian => {
            let s = cartesian_s(ax)?;
            if worm {
                [t, x.signum() * s, 0.0, th, ph]
            } else {
                [t, s * psi.cos(), s * psi.sin(), th, ph]
            }
        }
        Chart::Rindler => {
            let rho = x.cosh();
            if !(rho > 1.0) {
                return domain("rindler chart requires rho > 1");
            }
            [rho * t.sinh(), rho * t.cosh(), th, ph, label]
        }
        Chart::Conformal => {
            let e = 0.5 * x.exp();
            [e * t.sinh(), e * t.cosh(), th, ph, label]
        }
    };
    Ok(ChartPoint { chart: target, coords })
}

/// Re-expresses `p` in the `target` chart.
pub fn convert(p: &ChartPoint, target: Chart, st: Spacetime) -> Result<ChartPoint> {
    let xc = to_xchart(p, st)?;
    from_xchart(xc, target, st)
}

/// ∂(chart coords)/∂(x-chart coords) at the x-chart point `xc`, 5×5 in full chart indices.
pub fn jacobian_from_xchart(xc: [f64; 5], chart: Chart, st: Spacetime) -> Result<Mat5> {
    let [t, x, _th, _ph, psi] = xc;
    let mut j = [[0.0; 5]; 5];
    let worm = st == Spacetime::Wormhole;
    let rho = x.cosh();
    match chart {
        Chart::XChart => {
            for i in 0..5 {
                j[i][i] = 1.0;
            }
        }
        Chart::Schwarzschild | Chart::Polar => {
            for i in 0..5 {
                j[i][i] = 1.0;
            }
            j[1][1] = if chart == Chart::Schwarzschild {
                x.sinh()
            } else if worm {
                x.signum() * rho
            } else {
                rho
            };
        }
        Chart::Rindler => {
            j[0][0] = rho * t.cosh();
            j[0][1] = x.sinh() * t.sinh();
            j[1][0] = rho * t.sinh();
            j[1][1] = x.sinh() * t.cosh();
            j[2][2] = 1.0;
            j[3][3] = 1.0;
            j[4][4] = 1.0;
        }
        Chart::Conformal => {
            let e = 0.5 * x.exp();
            let (tt, ss) = (e * t.sinh(), e * t.cosh());
            j[0][0] = ss;
            j[0][1] = tt;
            j[1][0] = tt;
            j[1][1] = ss;
            j[2][2] = 1.0;
            j[3][3] = 1.0;
            j[4][4] = 1.0;
        }
        Chart::Cartesian => {
            let ds = cartesian_ds(x);
            j[0][0] = 1.0;
            j[3][2] = 1.0;
            j[4][3] = 1.0;
            if worm {
                j[1][1] = ds;
            } else {
                let s = cartesian_s(x)?;
                j[1][1] = ds * psi.cos();
                j[1][4] = -s * psi.sin();
                j[2][1] = ds * psi.sin();
                j[2][4] = s * psi.cos();
            }
        }
    }
    Ok(j)
}

/// ∂(target coords)/∂(source coords) at `p`, restricted to the spacetime's active axes.
pub fn jacobian(p: &ChartPoint, target: Chart, st: Spacetime) -> Result<MetricValue> {
    let xc = to_xchart(p, st)?;
    let ja = jacobian_from_xchart(xc, p.chart, st)?;
    let jb = jacobian_from_xchart(xc, target, st)?;
    let axes_a = st.axes(p.chart);
    let axes_b = st.axes(target);
    let axes_x = st.axes(Chart::XChart);
    let n = st.dim();
    let sub = |m: &Mat5, rows: &[usize; 5], cols: &[usize; 5]| {
        let mut s = [[0.0; 5]; 5];
        for i in 0..n {
            for k in 0..n {
                s[i][k] = m[rows[i]][cols[k]];
            }
        }
        s
    };
    let ja = sub(&ja, &axes_a, &axes_x);
    let jb = sub(&jb, &axes_b, &axes_x);
    let ja_inv = invert(&ja, n)?;
    let mut out = [[0.0; 5]; 5];
    for i in 0..n {
        for k in 0..n {
            out[i][k] = (0..n).map(|m| jb[i][m] * ja_inv[m][k]).sum();
        }
    }
    Ok(MetricValue { dim: n, axes: axes_b, g: out })
}

// ---------------------------------------------------------------------------
// metrics

/// Diagonal metric with first derivatives: (g_aa, ∂_b g_aa) in full chart indices.
struct DiagMetric {
    g: [f64; 5],
    dg: [[f64; 5]; 5],
}

fn diag_metric(p: &ChartPoint, st: Spacetime) -> Result<Option<DiagMetric>> {
    let c = p.coords;
    let mut g = [0.0; 5];
    let mut dg = [[0.0; 5]; 5];
    let worm = st == Spacetime::Wormhole;
    match p.chart {
        Chart::Schwarzschild => {
            let (t, rho, th) = (c[0], c[1], c[2]);
            if !(rho > 1.0) {
                return domain("schwarzschild chart is singular at rho = 1; use the cartesian chart");
            }
            let ch2 = t.cosh().powi(2);
            let s2 = th.sin().powi(2);
            let r2 = rho * rho;
            g[0] = r2;
            g[1] = -r2 / (r2 - 1.0);
            g[2] = -r2 * ch2;
            g[3] = g[2] * s2;
            g[4] = -(1.0 - 1.0 / r2);
            dg[0][1] = 2.0 * rho;
            dg[1][1] = 2.0 * rho / (r2 - 1.0).powi(2);
            dg[2][1] = -2.0 * rho * ch2;
            dg[2][0] = -r2 * (2.0 * t).sinh();
            dg[3][1] = dg[2][1] * s2;
            dg[3][0] = dg[2][0] * s2;
            dg[3][2] = -r2 * ch2 * (2.0 * th).sin();
            dg[4][1] = -2.0 / (r2 * rho);
        }
        Chart::Polar => {
            let (t, r, th) = (c[0], c[1], c[2]);
            if r < 0.0 {
                return domain("polar chart requires r >= 0");
            }
            let ch2 = t.cosh().powi(2);
            let s2 = th.sin().powi(2);
            let q = r * r + 1.0;
            g[0] = q;
            g[1] = -1.0;
            g[2] = -q * ch2;
            g[3] = g[2] * s2;
            g[4] = -r * r / q;
            dg[0][1] = 2.0 * r;
            dg[2][1] = -2.0 * r * ch2;
            dg[2][0] = -q * (2.0 * t).sinh();
            dg[3][1] = dg[2][1] * s2;
            dg[3][0] = dg[2][0] * s2;
            dg[3][2] = -q * ch2 * (2.0 * th).sin();
            dg[4][1] = -2.0 * r / (q * q);
        }
        Chart::XChart => {
            let (t, x, th) = (c[0], c[1], c[2]);
            if !worm && x < 0.0 {
                return domain("xchart requires x >= 0");
            }
            let k = x.cosh().powi(2);
            let dk = (2.0 * x).sinh();
            let ch2 = t.cosh().powi(2);
            let s2 = th.sin().powi(2);
            g[0] = k;
            g[1] = -k;
            g[2] = -k * ch2;
            g[3] = g[2] * s2;
            g[4] = -x.tanh().powi(2);
            dg[0][1] = dk;
            dg[1][1] = -dk;
            dg[2][1] = -dk * ch2;
            dg[2][0] = -k * (2.0 * t).sinh();
            dg[3][1] = dg[2][1] * s2;
            dg[3][0] = dg[2][0] * s2;
            dg[3][2] = -k * ch2 * (2.0 * th).sin();
            dg[4][1] = -2.0 * x.tanh() / x.cosh().powi(2);
        }
        Chart::Cartesian => {
            let (t, y, z, th) = (c[0], c[1], c[2], c[3]);
            if worm && z != 0.0 {
                return domain("wormhole cartesian points require z = 0");
            }
            let u = lambert_w22_minus2(y * y + z * z)?;
            let rho = 1.0 + 0.5 * u;
            let inv = 1.0 + 1.0 / rho;
            let e2 = (-2.0 * rho).exp();
            let h = inv * inv * e2;
            let dh = -2.0 * inv * e2 * (1.0 + 1.0 / rho + 1.0 / (rho * rho));
            let drho = [0.0, y * h, z * h];
            let ch2 = t.cosh().powi(2);
            let s2 = th.sin().powi(2);
            let r2 = rho * rho;
            g[0] = r2;
            g[1] = -h;
            g[2] = -h;
            g[3] = -r2 * ch2;
            g[4] = g[3] * s2;
            for b in 1..3 {
                dg[0][b] = 2.0 * rho * drho[b];
                dg[1][b] = -dh * drho[b];
                dg[2][b] = -dh * drho[b];
                dg[3][b] = -2.0 * rho * ch2 * drho[b];
                dg[4][b] = dg[3][b] * s2;
            }
            dg[3][0] = -r2 * (2.0 * t).sinh();
            dg[4][0] = dg[3][0] * s2;
            dg[4][3] = -r2 * ch2 * (2.0 * th).sin();
        }
        Chart::Conformal => {
            let (tt, ss, th) = (c[0], c[1], c[2]);
            let s2 = (ss - tt) * (ss + tt);
            if !(s2 > 0.0) || (!worm && s2 < 0.25) {
                return domain("conformal chart point outside its domain");
            }
            let om = 1.0 + 0.25 / s2;
            let om2 = om * om;
            let dom2_ds2 = -2.0 * om * 0.25 / (s2 * s2);
            let ds2 = [-2.0 * tt, 2.0 * ss];
            let sn2 = th.sin().powi(2);
            let th_x = (4.0 * s2 - 1.0) / (4.0 * s2 + 1.0);
            let dth_ds2 = 8.0 / (4.0 * s2 + 1.0).powi(2);
            g[0] = om2;
            g[1] = -om2;
            g[2] = -om2 * ss * ss;
            g[3] = g[2] * sn2;
            g[4] = -th_x * th_x;
            for b in 0..2 {
                let d = dom2_ds2 * ds2[b];
                dg[0][b] = d;
                dg[1][b] = -d;
                dg[2][b] = -d * ss * ss;
                dg[4][b] = -2.0 * th_x * dth_ds2 * ds2[b];
            }
            dg[2][1] -= 2.0 * om2 * ss;
            dg[3][0] = dg[2][0] * sn2;
            dg[3][1] = dg[2][1] * sn2;
            dg[3][2] = -om2 * ss * ss * (2.0 * th).sin();
        }
        Chart::Rindler => return Ok(None),
    }
    Ok(Some(DiagMetric { g, dg }))
}

fn rindler_metric(p: &ChartPoint) -> Result<Mat5> {
    let (tau, xi, th) = (p.coords[0], p.coords[1], p.coords[2]);
    let r2 = (xi - tau) * (xi + tau);
    if !(r2 > 1.0) || xi <= 0.0 {
        return domain("rindler chart requires xi > sqrt(tau^2 + 1)");
    }
    let d = r2 * (r2 - 1.0);
    let mut g = [[0.0; 5]; 5];
    g[0][0] = 1.0 - tau * tau / d;
    g[1][1] = -1.0 - xi * xi / d;
    g[0][1] = xi * tau / d;
    g[1][0] = g[0][1];
    g[2][2] = -xi * xi;
    g[3][3] = -xi * xi * th.sin().powi(2);
    g[4][4] = -(1.0 - 1.0 / r2);
    Ok(g)
}

/// Metric components of `st` at `p` in the chart's coordinate basis.
pub fn metric(p: &ChartPoint, st: Spacetime) -> Result<MetricValue> {
    check_angles(p)?;
    let full = match diag_metric(p, st)? {
        Some(d) => {
            let mut g = [[0.0; 5]; 5];
            for i in 0..5 {
                g[i][i] = d.g[i];
            }
            g
        }
        None => rindler_metric(p)?,
    };
    let axes = st.axes(p.chart);
    let n = st.dim();
    let mut g = [[0.0; 5]; 5];
    for i in 0..n {
        for k in 0..n {
            g[i][k] = full[axes[i]][axes[k]];
        }
    }
    Ok(MetricValue { dim: n, axes, g })
}

/// Christoffel symbols. Diagonal charts use closed forms; the Rindler chart
/// falls back to [`christoffel_richardson`].
pub fn christoffel(p: &ChartPoint, st: Spacetime) -> Result<ChristoffelTable> {
    check_angles(p)?;
    let d = match diag_metric(p, st)? {
        Some(d) => d,
        None => return christoffel_richardson(p, st, 1e-4),
    };
    let axes = st.axes(p.chart);
    let n = st.dim();
    let mut gamma = [[[0.0; 5]; 5]; 5];
    for a in 0..n {
        let ia = axes[a];
        for b in 0..n {
            let ib = axes[b];
            if a == b {
                let v = 0.5 * d.dg[ia][ia] / d.g[ia];
                gamma[a][a][a] = v;
            } else {
                // Γ^a_{ab} = ∂_b g_aa / 2g_aa, Γ^a_{bb} = -∂_a g_bb / 2g_aa
                let v = 0.5 * d.dg[ia][ib] / d.g[ia];
                gamma[a][a][b] = v;
                gamma[a][b][a] = v;
                gamma[a][b][b] = -0.5 * d.dg[ib][ia] / d.g[ia];
            }
        }
    }
    Ok(ChristoffelTable { dim: n, axes, gamma })
}

fn offset(p: &ChartPoint, axis: usize, h: f64) -> ChartPoint {
    let mut q = *p;
    q.coords[axis] += h;
    q
}

/// Central-difference Christoffel symbols with steps h·(1 + |coordinate|).
pub fn christoffel_numeric(p: &ChartPoint, st: Spacetime, h: f64) -> Result<ChristoffelTable> {
    let m0 = metric(p, st)?;
    let n = m0.dim;
    let axes = m0.axes;
    let ginv = m0.inverse()?;
    // dg[k][i][j] = ∂_k g_ij
    let mut dg = [[[0.0; 5]; 5]; 5];
    for k in 0..n {
        let hk = h * (1.0 + p.coords[axes[k]].abs());
        let gp = metric(&offset(p, axes[k], hk), st)?;
        let gm = metric(&offset(p, axes[k], -hk), st)?;
        for i in 0..n {
            for j in 0..n {
                dg[k][i][j] = (gp.g[i][j] - gm.g[i][j]) / (2.0 * hk);
            }
        }
    }
    Ok(ChristoffelTable { dim: n, axes, gamma: christoffel_from_derivatives(&ginv, &dg, n) })
}

pub(crate) fn christoffel_from_derivatives(ginv: &Mat5, dg: &[[[f64; 5]; 5]; 5], n: usize) -> [[[f64; 5]; 5]; 5] {
    let mut gamma = [[[0.0; 5]; 5]; 5];
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut s = 0.0;
                for d in 0..n {
                    s += ginv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                }
                gamma[a][b][c] = 0.5 * s;
                gamma[a][c][b] = 0.5 * s;
            }
        }
    }
    gamma
}

/// Richardson combination of [`christoffel_numeric`] at h and h/2 (fourth order).
pub fn christoffel_richardson(p: &ChartPoint, st: Spacetime, h: f64) -> Result<ChristoffelTable> {
    let a = christoffel_numeric(p, st, h)?;
    let b = christoffel_numeric(p, st, 0.5 * h)?;
    let mut out = b;
    for i in 0..a.dim {
        for j in 0..a.dim {
            for k in 0..a.dim {
                out.gamma[i][j][k] = (4.0 * b.gamma[i][j][k] - a.gamma[i][j][k]) / 3.0;
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// wormhole curvature in conformally flat coordinates (T, X1, X2, X3)

/// ḡ = Ω²(dT² - |dX|²) with Ω = 1 + 1/(4(|X|² - T²)).
pub fn wormhole_conformal_metric(t: f64, x: [f64; 3]) -> Result<[[f64; 4]; 4]> {
    let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - t * t;
    if !(s > 0.0) {
        return domain(format!("wormhole conformal chart requires |X|^2 > T^2, got |X|^2 - T^2 = {s}"));
    }
    let om = 1.0 + 0.25 / s;
    let o2 = om * om;
    let mut g = [[0.0; 4]; 4];
    g[0][0] = o2;
    for j in 1..4 {
        g[j][j] = -o2;
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicciData {
    pub ricci: [[f64; 4]; 4],
    pub scalar: f64,
    pub stress: [[f64; 4]; 4],
}

/// Ricci tensor, scalar curvature and stress tensor T̄ = ½R̄ḡ - R̄ of the wormhole.
///
/// Sign convention: R̄_{bd} = ∂_d Γ^a_{ba} - ∂_a Γ^a_{bd} + Γ^a_{de}Γ^e_{ba} - Γ^a_{ae}Γ^e_{bd}.
pub fn wormhole_curvature(t: f64, x: [f64; 3]) -> Result<RicciData> {
    let g = wormhole_conformal_metric(t, x)?;
    let x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let s = x2 - t * t;
    let d = (s + 0.25).powi(2) * s;
    let mut ric = [[0.0; 4]; 4];
    ric[0][0] = (x2 + 3.0 * t * t) / d;
    for j in 1..4 {
        let xj = x[j - 1];
        ric[0][j] = -4.0 * t * xj / d;
        ric[j][0] = ric[0][j];
        ric[j][j] = (4.0 * xj * xj - x2 + t * t) / d;
        for k in (j + 1)..4 {
            ric[j][k] = 4.0 * xj * x[k - 1] / d;
            ric[k][j] = ric[j][k];
        }
    }
    let mut scalar = 0.0;
    for a in 0..4 {
        scalar += ric[a][a] / g[a][a];
    }
    let mut stress = [[0.0; 4]; 4];
    for a in 0..4 {
        for b in 0..4 {
            stress[a][b] = 0.5 * scalar * g[a][b] - ric[a][b];
        }
    }
    Ok(RicciData { ricci: ric, scalar, stress })
}

/// Closed form of T̄(V, V) for the null vector V = ∂_T + sign·∂_{X_j}, j ∈ {1, 2, 3}.
pub fn nec_witness(t: f64, x: [f64; 3], j: usize, sign: f64) -> Result<f64> {
    if !(1..=3).contains(&j) {
        return Err(Error::Invalid(format!("direction index must be 1, 2 or 3, got {j}")));
    }
    let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2] - t * t;
    if !(s > 0.0) {
        return domain("NEC witness requires |X|^2 > T^2");
    }
    let d = (s + 0.25).powi(2) * s;
    Ok(-4.0 * (t - sign * x[j - 1]).powi(2) / d)
}

/// T̄(V, V) contracted from the stress tensor of [`wormhole_curvature`].
pub fn nec_contraction(data: &RicciData, j: usize, sign: f64) -> f64 {
    let mut v = [0.0; 4];
    v[0] = 1.0;
    v[j] = sign;
    let mut s = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            s += data.stress[a][b] * v[a] * v[b];
        }
    }
    s
}
