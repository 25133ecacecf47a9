//! Radial spectral problems.
//!
//! Witten sector: L_{M,n} u = -u'' - 2 coth(2x) u' + (n² cosh⁴x / sinh²x + M² cosh²x) u
//! on x > 0 with the measure ½ sinh 2x dx (that is r dr with r = sinh x).
//! Wormhole sector: L_M v = -v'' + M² cosh²x v on the whole line.
//! The massless n = 0 Witten operator has purely continuous spectrum [1, ∞)
//! and is diagonalized by [`ContinuousTransform`].

use crate::charts::Spacetime;
use crate::error::{domain, Error, Result};
use crate::specfun::olver_q_coth;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Fraction of eigenvector mass allowed in the outer tenth of the domain.
pub const TAIL_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid {
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOperatorSpec {
    pub spacetime: Spacetime,
    pub mass: f64,
    pub n: i32,
    pub grid: RadialGrid,
}

impl RadialOperatorSpec {
    /// Default truncation: x_max = 12 on the Witten side, 20/√(1+M) for the wormhole.
    pub fn new(spacetime: Spacetime, mass: f64, n: i32, points: usize) -> Self {
        let x_max = match spacetime {
            Spacetime::Witten => 12.0,
            Spacetime::Wormhole => 20.0 / (1.0 + mass).sqrt(),
        };
        RadialOperatorSpec { spacetime, mass, n, grid: RadialGrid { x_max, n: points } }
    }

    pub fn with_grid(mut self, x_max: f64, points: usize) -> Self {
        self.grid = RadialGrid { x_max, n: points };
        self
    }

    /// Nodes and quadrature weights. Witten nodes are cell centres (i + ½)h with the exact
    /// cell measure; wormhole nodes are the interior points of a uniform grid on [-x_max, x_max].
    pub fn nodes(&self) -> (Vec<f64>, Vec<f64>) {
        let RadialGrid { x_max, n } = self.grid;
        match self.spacetime {
            Spacetime::Witten => {
                let h = x_max / n as f64;
                let x = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
                let m = (0..n).map(|i| cell_measure(i as f64 * h, (i + 1) as f64 * h)).collect();
                (x, m)
            }
            Spacetime::Wormhole => {
                let h = 2.0 * x_max / (n + 1) as f64;
                ((1..=n).map(|i| -x_max + i as f64 * h).collect(), vec![h; n])
            }
        }
    }
}

/// ∫_a^b ½ sinh 2x dx, written to avoid cancellation on short cells.
pub fn cell_measure(a: f64, b: f64) -> f64 {
    // ¼(cosh 2b - cosh 2a) = ½ sinh(a+b) sinh(b-a)
    0.5 * (a + b).sinh() * (b - a).sinh()
}

#[derive(Debug, Clone)]
pub struct DiscreteSpectrum {
    pub spec: RadialOperatorSpec,
    pub x: Vec<f64>,
    pub weights: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Nodal values, orthonormal in Σ weights·u·v. Witten vectors are in the u variable.
    pub eigenvectors: Vec<Vec<f64>>,
    pub tail_mass: Vec<f64>,
}

impl DiscreteSpectrum {
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).zip(&self.weights).map(|((x, y), w)| x * y * w).sum()
    }

    pub fn gram_defect(&self) -> f64 {
        let k = self.eigenvectors.len();
        let mut worst: f64 = 0.0;
        for i in 0..k {
            for j in 0..=i {
                let g = self.inner(&self.eigenvectors[i], &self.eigenvectors[j]);
                worst = worst.max((g - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }
}

/// Witten potential in the u variable: n² cosh⁴x / sinh²x + M² cosh²x.
pub fn witten_u_potential(mass: f64, n: i32, x: f64) -> f64 {
    let (s, c) = (x.sinh(), x.cosh());
    let nn = (n as f64).powi(2);
    let kk = if nn == 0.0 { 0.0 } else { nn * c.powi(4) / (s * s) };
    kk + mass * mass * c * c
}

/// 1/(4x²) - 1/sinh²(2x), with a series near the origin.
pub fn hardy_potential(x: f64) -> f64 {
    let x = x.abs();
    if x < 2e-3 {
        let x2 = x * x;
        1.0 / 3.0 - 4.0 / 15.0 * x2 + 32.0 / 189.0 * x2 * x2
    } else {
        0.25 / (x * x) - 1.0 / (2.0 * x).sinh().powi(2)
    }
}

/// Potential of the Schrödinger form (v = √(½ sinh 2x) u on the Witten side).
pub fn schrodinger_potential(spec: &RadialOperatorSpec, x: f64) -> Result<f64> {
    let m2 = spec.mass * spec.mass;
    match spec.spacetime {
        Spacetime::Wormhole => Ok(m2 * x.cosh().powi(2)),
        Spacetime::Witten => {
            if !(x > 0.0) {
                return domain(format!("the Witten radial potential is defined for x > 0, got {x}"));
            }
            let v = witten_u_potential(spec.mass, spec.n, x) - 1.0 / (2.0 * x).sinh().powi(2) + 1.0;
            if spec.n != 0 {
                debug_assert!(v >= 0.75 / (x * x) * (1.0 - 1e-12));
            }
            Ok(v)
        }
    }
}

/// v = √(½ sinh 2x) u.
pub fn liouville_map(x: &[f64], u: &[f64]) -> Result<Vec<f64>> {
    if x.len() != u.len() {
        return Err(Error::Invalid(format!("grid has {} nodes, function has {}", x.len(), u.len())));
    }
    Ok(x.iter().zip(u).map(|(&x, &u)| (0.5 * (2.0 * x).sinh()).sqrt() * u).collect())
}

pub fn liouville_inverse(x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    if x.len() != v.len() {
        return Err(Error::Invalid(format!("grid has {} nodes, function has {}", x.len(), v.len())));
    }
    Ok(x.iter().zip(v).map(|(&x, &v)| v / (0.5 * (2.0 * x).sinh()).sqrt()).collect())
}

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e` (len n-1).
#[derive(Debug, Clone)]
pub struct Tridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.d.len() {
            let off = if i == 0 { 0.0 } else { self.e[i - 1] * self.e[i - 1] / q };
            q = self.d[i] - sigma - off;
            if q == 0.0 {
                q = -f64::EPSILON * (self.d[i].abs() + sigma.abs() + 1.0);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn lower_bound(&self) -> f64 {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                let l = if i > 0 { self.e[i - 1].abs() } else { 0.0 };
                let r = if i + 1 < n { self.e[i].abs() } else { 0.0 };
                self.d[i] - l - r
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// k-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let mut lo = self.lower_bound();
        let mut hi = lo + lo.abs().max(1.0);
        while self.count_below(hi) <= k {
            hi = lo + 2.0 * (hi - lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        (0..n)
            .map(|i| {
                let mut y = self.d[i] * x[i];
                if i > 0 {
                    y += self.e[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.e[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Solves (T - sigma) y = b by Gaussian elimination with partial pivoting.
    fn solve_shifted(&self, sigma: f64, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        // rows stored as (a0, a1, a2) = coefficients of x_i, x_{i+1}, x_{i+2}
        let mut rows: Vec<[f64; 3]> = (0..n)
            .map(|i| [self.d[i] - sigma, if i + 1 < n { self.e[i] } else { 0.0 }, 0.0])
            .collect();
        let mut sub: Vec<f64> = (0..n).map(|i| if i > 0 { self.e[i - 1] } else { 0.0 }).collect();
        let mut rhs = b.to_vec();
        let tiny = f64::EPSILON * self.d.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n.saturating_sub(1) {
            // row i+1 has sub[i+1] in column i, then d, e
            let mut next = [sub[i + 1], self.d[i + 1] - sigma, if i + 2 < n { self.e[i + 1] } else { 0.0 }];
            if next[0].abs() > rows[i][0].abs() {
                let cur = rows[i];
                rows[i] = next;
                next = cur;
                rhs.swap(i, i + 1);
            }
            if rows[i][0] == 0.0 {
                rows[i][0] = tiny;
            }
            let f = next[0] / rows[i][0];
            rows[i + 1] = [next[1] - f * rows[i][1], next[2] - f * rows[i][2], 0.0];
            rhs[i + 1] -= f * rhs[i];
            sub[i + 1] = 0.0;
        }
        if rows[n - 1][0] == 0.0 {
            rows[n - 1][0] = tiny;
        }
        let mut y = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = rhs[i];
            if i + 1 < n {
                s -= rows[i][1] * y[i + 1];
            }
            if i + 2 < n {
                s -= rows[i][2] * y[i + 2];
            }
            y[i] = s / rows[i][0];
        }
        y
    }

    /// Lowest `count` eigenpairs; vectors orthonormal in the Euclidean product.
    pub fn lowest(&self, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.d.len();
        let values: Vec<f64> = (0..count).into_par_iter().map(|k| self.eigenvalue(k)).collect();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
        for (k, &lam) in values.iter().enumerate() {
            let shift = lam + 1e-10 * lam.abs().max(1.0) * if k % 2 == 0 { 1.0 } else { -1.0 };
            let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i * 7919 + k * 104729) % 97) as f64).collect();
            for _ in 0..4 {
                y = self.solve_shifted(shift, &y);
                for prev in &vectors {
                    let dot: f64 = y.iter().zip(prev).map(|(a, b)| a * b).sum();
                    for (a, b) in y.iter_mut().zip(prev) {
                        *a -= dot * b;
                    }
                }
                let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
                y.iter_mut().for_each(|a| *a /= norm);
            }
            vectors.push(y);
        }
        (values, vectors)
    }
}

/// Symmetric matrix of the discretized operator in the variable √weight · u.
pub fn assemble(spec: &RadialOperatorSpec) -> Result<(Tridiagonal, Vec<f64>, Vec<f64>)> {
    let RadialGrid { x_max, n } = spec.grid;
    if n < 8 || !(x_max > 0.0) {
        return domain(format!("grid needs at least 8 points and x_max > 0, got N={n}, x_max={x_max}"));
    }
    if !(spec.mass >= 0.0) {
        return domain(format!("mass must be nonnegative, got {}", spec.mass));
    }
    let (x, m) = spec.nodes();
    let (mut d, mut e) = (vec![0.0; n], vec![0.0; n - 1]);
    match spec.spacetime {
        Spacetime::Witten => {
            let h = x_max / n as f64;
            let s = |face: f64| 0.5 * (2.0 * face).sinh();
            for i in 0..n {
                let left = s(i as f64 * h);
                let right = s((i + 1) as f64 * h);
                // Dirichlet at x_max through a mirrored ghost node
                let right_coef = if i + 1 == n { 2.0 * right } else { right };
                d[i] = (left + right_coef) / (h * m[i]) + witten_u_potential(spec.mass, spec.n, x[i]);
                if i + 1 < n {
                    e[i] = -right / (h * (m[i] * m[i + 1]).sqrt());
                }
            }
        }
        Spacetime::Wormhole => {
            let h = m[0];
            let m2 = spec.mass * spec.mass;
            for i in 0..n {
                d[i] = 2.0 / (h * h) + m2 * x[i].cosh().powi(2);
                if i + 1 < n {
                    e[i] = -1.0 / (h * h);
                }
            }
        }
    }
    Ok((Tridiagonal { d, e }, x, m))
}

/// Lowest `count` eigenpairs of the radial operator.
pub fn solve_discrete(spec: &RadialOperatorSpec, count: usize) -> Result<DiscreteSpectrum> {
    if spec.spacetime == Spacetime::Witten && spec.mass == 0.0 && spec.n == 0 {
        return domain(
            "the massless n = 0 Witten operator has purely continuous spectrum; use the continuous transform",
        );
    }
    if count > spec.grid.n / 4 {
        return domain(format!("count {} exceeds N/4 = {}", count, spec.grid.n / 4));
    }
    let (t, x, m) = assemble(spec)?;
    let (values, raw) = t.lowest(count);
    for w in values.windows(2) {
        if !(w[1] - w[0] > 1e-10) {
            return Err(Error::Convergence(format!("eigenvalues {} and {} are not separated", w[0], w[1])));
        }
    }
    let x_cut = 0.9 * spec.grid.x_max;
    let mut vectors = Vec::with_capacity(count);
    let mut tails = Vec::with_capacity(count);
    for z in raw {
        let mut u: Vec<f64> = z.iter().zip(&m).map(|(z, m)| z / m.sqrt()).collect();
        let lead = u.iter().copied().find(|v| v.abs() > 1e-8).unwrap_or(1.0);
        if lead < 0.0 {
            u.iter_mut().for_each(|v| *v = -*v);
        }
        let tail: f64 = x.iter().zip(&u).zip(&m).filter(|((x, _), _)| x.abs() > x_cut).map(|((_, u), m)| u * u * m).sum();
        if tail > TAIL_LIMIT {
            return Err(Error::Truncation {
                tail,
                limit: TAIL_LIMIT,
                hint: format!("eigenvector mass near x_max = {}; increase x_max", spec.grid.x_max),
            });
        }
        tails.push(tail);
        vectors.push(u);
    }
    Ok(DiscreteSpectrum { spec: *spec, x, weights: m, eigenvalues: values, eigenvectors: vectors, tail_mass: tails })
}

/// Spectral kernel of the massless n = 0 Witten operator, λ = 1 + ν²:
/// w(λ; x) = √(tanh(πν/2)/(2π)) 𝑸^{iν/2}_{-1/2}(coth 2x) / √(½ sinh 2x).
pub fn kernel(nu: f64, x: f64) -> f64 {
    let alpha = ((0.5 * PI * nu).tanh() / (2.0 * PI)).sqrt();
    alpha * olver_q_coth(nu, x) / (0.5 * (2.0 * x).sinh()).sqrt()
}

/// Tabulated transform pair of the massless n = 0 Witten operator.
#[derive(Debug, Clone)]
pub struct ContinuousTransform {
    pub nu: Vec<f64>,
    pub lambda: Vec<f64>,
    /// Quadrature weights in λ (2ν Δν).
    pub dlambda: Vec<f64>,
    pub x: Vec<f64>,
    /// Cell measures ∫ ½ sinh 2x dx.
    pub measure: Vec<f64>,
    /// w(λ_j; x_i) at index j * x.len() + i.
    pub table: Vec<f64>,
}

impl ContinuousTransform {
    /// Midpoint grid in ν on [√δ, √(λ_max - 1)] (dense near the λ = 1 edge) and a
    /// cell-centred x grid on (0, x_max].
    pub fn new(x_max: f64, n_x: usize, lambda_max: f64, n_lambda: usize, delta: f64) -> Result<Self> {
        if !(lambda_max > 1.0 + delta) || delta < 0.0 || n_x == 0 || n_lambda == 0 || !(x_max > 0.0) {
            return domain("transform needs 0 <= delta < lambda_max - 1, x_max > 0 and nonempty grids");
        }
        let (nu0, nu1) = (delta.sqrt(), (lambda_max - 1.0).sqrt());
        let dnu = (nu1 - nu0) / n_lambda as f64;
        let nu: Vec<f64> = (0..n_lambda).map(|j| nu0 + (j as f64 + 0.5) * dnu).collect();
        let lambda = nu.iter().map(|v| 1.0 + v * v).collect();
        let dlambda = nu.iter().map(|v| 2.0 * v * dnu).collect();
        let h = x_max / n_x as f64;
        let x: Vec<f64> = (0..n_x).map(|i| (i as f64 + 0.5) * h).collect();
        let measure = (0..n_x).map(|i| cell_measure(i as f64 * h, (i + 1) as f64 * h)).collect();
        let mut table = vec![0.0; n_lambda * n_x];
        table.par_chunks_mut(n_x).zip(nu.par_iter()).for_each(|(row, &v)| {
            for (w, &xi) in row.iter_mut().zip(&x) {
                *w = kernel(v, xi);
            }
        });
        Ok(ContinuousTransform { nu, lambda, dlambda, x, measure, table })
    }

    fn row(&self, j: usize) -> &[f64] {
        let n = self.x.len();
        &self.table[j * n..(j + 1) * n]
    }

    pub fn norm2_x(&self, u: &[C64]) -> f64 {
        u.iter().zip(&self.measure).map(|(u, m)| u.norm_sqr() * m).sum()
    }

    pub fn norm2_lambda(&self, uhat: &[C64]) -> f64 {
        uhat.iter().zip(&self.dlambda).map(|(u, d)| u.norm_sqr() * d).sum()
    }

    /// û(λ) = ∫ u w(λ; ·) r dr; refuses data with mass near x_max.
    pub fn forward(&self, u: &[C64]) -> Result<Vec<C64>> {
        if u.len() != self.x.len() {
            return Err(Error::Invalid(format!("grid has {} nodes, function has {}", self.x.len(), u.len())));
        }
        let total = self.norm2_x(u);
        let x_cut = 0.9 * self.x.last().copied().unwrap_or(0.0);
        let tail: f64 =
            self.x.iter().zip(u).zip(&self.measure).filter(|((x, _), _)| **x > x_cut).map(|((_, u), m)| u.norm_sqr() * m).sum();
        if total > 0.0 && tail > 1e-8 * total {
            return Err(Error::Truncation {
                tail: tail / total,
                limit: 1e-8,
                hint: "data does not decay before x_max; enlarge the grid".into(),
            });
        }
        let uw: Vec<C64> = u.iter().zip(&self.measure).map(|(u, m)| u * m).collect();
        Ok((0..self.nu.len())
            .into_par_iter()
            .map(|j| self.row(j).iter().zip(&uw).map(|(w, u)| u * w).sum())
            .collect())
    }

    /// u(x) = ∫ û(λ) w(λ; x) dλ on the tabulated x grid.
    pub fn inverse(&self, uhat: &[C64]) -> Result<Vec<C64>> {
        if uhat.len() != self.nu.len() {
            return Err(Error::Invalid(format!("lambda grid has {} nodes, data has {}", self.nu.len(), uhat.len())));
        }
        let n = self.x.len();
        let mut u = vec![C64::new(0.0, 0.0); n];
        for (j, (c, d)) in uhat.iter().zip(&self.dlambda).enumerate() {
            let c = c * d;
            for (ui, w) in u.iter_mut().zip(self.row(j)) {
                *ui += c * w;
            }
        }
        Ok(u)
    }

    pub fn forward_real(&self, u: &[f64]) -> Result<Vec<f64>> {
        let c: Vec<C64> = u.iter().map(|&v| C64::new(v, 0.0)).collect();
        Ok(self.forward(&c)?.into_iter().map(|z| z.re).collect())
    }
}

/// Both sides of the radial Hardy-type inequalities for u(x) e^{inψ} with u supported in `support`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyDefect {
    pub lhs: f64,
    pub rhs: f64,
}

impl HardyDefect {
    pub fn defect(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// n = 0: ∫ (1 + 1/(4x²) - 1/sinh²2x) u² dμ ≤ ∫ u_x² dμ.
/// n ≠ 0: ∫ cosh²x u² dμ ≤ ∫ (u_x² + n² cosh⁴x/sinh²x u²) dμ.
/// Here dμ = ½ sinh 2x dx; `f` returns (u, u_x). Composite Simpson with `panels` panels.
pub fn hardy_defect<F: Fn(f64) -> (f64, f64)>(f: F, n: i32, support: (f64, f64), panels: usize) -> HardyDefect {
    let (a, b) = (support.0.max(0.0), support.1);
    let panels = panels.max(2) & !1;
    let h = (b - a) / panels as f64;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for i in 0..=panels {
        let x = a + i as f64 * h;
        let wt = if i == 0 || i == panels { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
        let mu = 0.5 * (2.0 * x).sinh();
        let (u, ux) = f(x);
        if n == 0 {
            lhs += wt * (1.0 + hardy_potential(x)) * u * u * mu;
            rhs += wt * ux * ux * mu;
        } else {
            lhs += wt * x.cosh().powi(2) * u * u * mu;
            let ang = if u == 0.0 { 0.0 } else { (n as f64).powi(2) * x.cosh().powi(4) / x.sinh().powi(2) * u * u };
            rhs += wt * (ux * ux + ang) * mu;
        }
    }
    HardyDefect { lhs: lhs * h / 3.0, rhs: rhs * h / 3.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_examples() {
        let spec = RadialOperatorSpec::new(Spacetime::Witten, 0.0, 1, 64);
        let x: f64 = 1.0;
        let want = x.cosh().powi(4) / x.sinh().powi(2) - 1.0 / (2.0 * x).sinh().powi(2) + 1.0;
        assert!((schrodinger_potential(&spec, 1.0).unwrap() - want).abs() < 1e-14);
        assert!(schrodinger_potential(&spec, 0.0).is_err());
        let worm = RadialOperatorSpec::new(Spacetime::Wormhole, 1.0, 0, 64);
        assert_eq!(schrodinger_potential(&worm, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn potential_dominates_inverse_square() {
        let spec = RadialOperatorSpec::new(Spacetime::Witten, 0.0, 1, 64);
        for i in 1..=10_000 {
            let x = 10.0 * i as f64 / 10_000.0;
            assert!(schrodinger_potential(&spec, x).unwrap() - 0.75 / (x * x) >= 0.0);
        }
    }

    #[test]
    fn hardy_potential_series_matches() {
        for &x in &[1e-3f64, 1.9e-3, 2.1e-3, 5e-3] {
            let direct = 0.25 / (x * x) - 1.0 / (2.0 * x).sinh().powi(2);
            assert!((hardy_potential(x) - direct).abs() < 1e-7, "{x}");
        }
    }

    #[test]
    fn cell_measure_matches_cosh_difference() {
        for &(a, b) in &[(0.0, 0.1), (1.0, 1.5), (3.0, 3.001)] {
            let want = 0.25 * ((2.0f64 * b).cosh() - (2.0f64 * a).cosh());
            assert!((cell_measure(a, b) - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn sturm_count_on_known_matrix() {
        // -1, 2, -1 stencil: eigenvalues 2 - 2cos(kπ/(n+1))
        let n = 50;
        let t = Tridiagonal { d: vec![2.0; n], e: vec![-1.0; n - 1] };
        for k in 0..5 {
            let want = 2.0 - 2.0 * (PI * (k + 1) as f64 / (n + 1) as f64).cos();
            assert!((t.eigenvalue(k) - want).abs() < 1e-13);
        }
        let (vals, vecs) = t.lowest(3);
        for (l, v) in vals.iter().zip(&vecs) {
            let tv = t.apply(v);
            let r: f64 = tv.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
            assert!(r < 1e-10);
        }
    }

    #[test]
    fn liouville_round_trip() {
        let x: Vec<f64> = (1..100).map(|i| 0.05 * i as f64).collect();
        let u: Vec<f64> = x.iter().map(|x| (-x * x).exp()).collect();
        let v = liouville_map(&x, &u).unwrap();
        let back = liouville_inverse(&x, &v).unwrap();
        for (a, b) in u.iter().zip(&back) {
            assert!((a - b).abs() <= 1e-14 * a.abs().max(1e-300));
        }
        assert!(liouville_map(&x[..3], &u).is_err());
        assert!(liouville_map(&x, &vec![0.0; x.len()]).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn massless_s_wave_is_rejected() {
        let spec = RadialOperatorSpec::new(Spacetime::Witten, 0.0, 0, 256);
        assert!(solve_discrete(&spec, 2).is_err());
    }
}
