//! Radial grids, quadrature and finite differences.
//!
//! Quadrature is the product trapezoid rule: a nodal field is replaced by its
//! piecewise-linear interpolant, which is then integrated exactly against the
//! radial measure `|S^{d-1}| r^{d-1} dr` (or `r^{d-3} dr` for the
//! inverse-square weight). Constants are therefore integrated exactly, and the
//! gradient energy of the interpolant has a closed cell-by-cell form.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Surface area of the unit sphere in `R^d`, `2 pi^{d/2} / Gamma(d/2)`.
pub fn sphere_surface(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// `Gamma(d/2)` for positive integer `d`.
fn gamma_half(d: u32) -> f64 {
    if d.is_multiple_of(2) {
        (1..d / 2).map(|k| k as f64).product()
    } else {
        // Gamma(1/2) = sqrt(pi), Gamma(x + 1) = x Gamma(x)
        let mut g = PI.sqrt();
        let mut x = 0.5;
        while x < d as f64 / 2.0 - 0.25 {
            g *= x;
            x += 1.0;
        }
        g
    }
}

/// Geometry of a stretched radial grid, as stored in configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub n: usize,
    pub stretch: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { r_min: 1e-7, r_max: 120.0, n: 8192, stretch: 1e8 }
    }
}

/// A radial grid on `[r_min, r_max]` with quadrature weights.
#[derive(Debug, Clone)]
pub struct RadialGrid {
    d: u32,
    r: Vec<f64>,
    log_r: Vec<f64>,
    /// Weights for `integrate(_, 0)`.
    w: Vec<f64>,
    /// Weights for `integrate(_, -2)`.
    w_inv_sq: Vec<f64>,
    /// Exact volume of each shell `[r_i, r_{i+1}]`.
    shell: Vec<f64>,
}

/// `h * sum_k C(p,k) a^{p-k} h^k * coef(k)`, the building block of all
/// polynomial cell moments. Every term is positive so there is no cancellation.
fn cell_moment(a: f64, h: f64, p: u32, coef: impl Fn(u32) -> f64) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for k in 0..=p {
        sum += binom * a.powi((p - k) as i32) * h.powi(k as i32) * coef(k);
        binom = binom * (p - k) as f64 / (k + 1) as f64;
    }
    h * sum
}

/// Nodal weights of the product trapezoid rule against `r^p dr`.
fn hat_weights(r: &[f64], p: u32) -> Vec<f64> {
    let n = r.len();
    let mut w = vec![0.0; n];
    for i in 0..n - 1 {
        let a = r[i];
        let h = r[i + 1] - a;
        // hat of node i restricted to the cell is (a + h - r) / h
        w[i] += cell_moment(a, h, p, |k| 1.0 / ((k + 1) as f64 * (k + 2) as f64));
        // hat of node i+1 restricted to the cell is (r - a) / h
        w[i + 1] += cell_moment(a, h, p, |k| 1.0 / (k + 2) as f64);
    }
    w
}

/// Node spacings `h_i = h0 * min(q^i, stretch)` with `h0 = (q - 1) r_min`,
/// i.e. logarithmic near `r_min` and uniform once the cap is reached.
fn stretched_spacings(r_min: f64, length: f64, cells: usize, stretch: f64) -> Vec<f64> {
    if stretch == 1.0 {
        return vec![length / cells as f64; cells];
    }
    let profile = |q: f64| -> (f64, Vec<f64>) {
        let mut g = 1.0;
        let mut out = Vec::with_capacity(cells);
        for _ in 0..cells {
            out.push(g);
            g = (g * q).min(stretch);
        }
        let total: f64 = out.iter().sum();
        ((q - 1.0) * r_min * total, out)
    };
    let mut lo = 1.0;
    let mut hi = 2.0;
    while profile(hi).0 < length {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if profile(mid).0 < length {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let (_, shape) = profile(0.5 * (lo + hi));
    let total: f64 = shape.iter().sum();
    shape.into_iter().map(|g| g * length / total).collect()
}

impl RadialGrid {
    /// Builds a grid with `n` nodes on `[r_min, r_max]`.
    ///
    /// `stretch` is the ratio of the largest to the smallest node spacing;
    /// `1` gives a uniform grid, larger values cluster nodes geometrically
    /// toward `r_min` (spacing proportional to `r`) before switching to a
    /// uniform outer region.
    pub fn new(d: u32, r_min: f64, r_max: f64, n: usize, stretch: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::Parameter("dimension must be positive".into()));
        }
        if !(r_min > 0.0 && r_max > r_min && r_max.is_finite()) {
            return Err(Error::Parameter(format!("grid bounds must satisfy 0 < r_min < r_max (got {r_min}, {r_max})")));
        }
        if n < 16 {
            return Err(Error::Parameter(format!("grid needs n >= 16 nodes (got {n})")));
        }
        if !(stretch >= 1.0 && stretch.is_finite()) {
            return Err(Error::Parameter(format!("stretch must be >= 1 (got {stretch})")));
        }
        let spacings = stretched_spacings(r_min, r_max - r_min, n - 1, stretch);
        let mut r = Vec::with_capacity(n);
        let mut acc = r_min;
        r.push(acc);
        for h in &spacings {
            acc += h;
            r.push(acc);
        }
        r[n - 1] = r_max;
        if r.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::Parameter("grid spacing underflows; reduce stretch or n".into()));
        }
        Ok(Self::from_nodes(d, r))
    }

    pub fn from_spec(d: u32, spec: &GridSpec) -> Result<Self> {
        Self::new(d, spec.r_min, spec.r_max, spec.n, spec.stretch)
    }

    /// Grid on explicit, strictly increasing nodes.
    pub fn from_nodes(d: u32, r: Vec<f64>) -> Self {
        let surface = sphere_surface(d);
        let w = hat_weights(&r, d - 1).into_iter().map(|x| x * surface).collect();
        let w_inv_sq = if d >= 3 {
            hat_weights(&r, d - 3)
        } else {
            // r^{d-3} is not polynomial; fall back to nodal scaling
            let w0 = hat_weights(&r, d - 1);
            w0.iter().zip(&r).map(|(w, r)| w / (r * r)).collect()
        }
        .into_iter()
        .map(|x| x * surface)
        .collect();
        let shell =
            r.windows(2).map(|p| surface * cell_moment(p[0], p[1] - p[0], d - 1, |k| 1.0 / (k + 1) as f64)).collect();
        let log_r = r.iter().map(|x| x.ln()).collect();
        RadialGrid { d, r, log_r, w, w_inv_sq, shell }
    }

    pub fn d(&self) -> u32 {
        self.d
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn r_min(&self) -> f64 {
        self.r[0]
    }
    pub fn r_max(&self) -> f64 {
        self.r[self.r.len() - 1]
    }
    pub fn weights(&self) -> &[f64] {
        &self.w
    }
    pub fn weights_inv_sq(&self) -> &[f64] {
        &self.w_inv_sq
    }
    pub fn shell_volumes(&self) -> &[f64] {
        &self.shell
    }

    /// Volume of the annulus `r_min <= |x| <= r_max`.
    pub fn annulus_volume(&self) -> f64 {
        let d = self.d as f64;
        sphere_surface(self.d) / d * (self.r_max().powf(d) - self.r_min().powf(d))
    }

    fn weights_for(&self, power: i32) -> &[f64] {
        match power {
            0 => &self.w,
            -2 => &self.w_inv_sq,
            _ => panic!("integrate supports power 0 or -2, got {power}"),
        }
    }

    /// `sum_i w_i f_i`, approximating `int f(|x|) |x|^power dx`.
    ///
    /// # Panics
    /// If `power` is not `0` or `-2`.
    pub fn integrate(&self, f: &[f64], power: i32) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights_for(power).iter().zip(f).map(|(w, f)| w * f).sum()
    }

    /// Like [`integrate`](Self::integrate), mapping each sample first.
    pub fn integrate_by<T>(&self, f: &[T], power: i32, map: impl Fn(&T) -> f64) -> f64 {
        self.weights_for(power).iter().zip(f).map(|(w, f)| w * map(f)).sum()
    }

    /// `int |grad v|^2 dx` for the piecewise-linear interpolant of `v`.
    pub fn gradient_energy(&self, v: &[f64]) -> f64 {
        self.shell
            .iter()
            .zip(self.r.windows(2))
            .zip(v.windows(2))
            .map(|((s, r), v)| {
                let g = (v[1] - v[0]) / (r[1] - r[0]);
                s * g * g
            })
            .sum()
    }

    /// Gradient energy with a caller-supplied squared difference `|u_{i+1} - u_i|^2`.
    pub fn gradient_energy_by<T>(&self, u: &[T], diff_sq: impl Fn(&T, &T) -> f64) -> f64 {
        self.shell
            .iter()
            .zip(self.r.windows(2))
            .zip(u.windows(2))
            .map(|((s, r), u)| {
                let h = r[1] - r[0];
                s * diff_sq(&u[0], &u[1]) / (h * h)
            })
            .sum()
    }

    /// Stiffness coupling of each shell, `shell_i / h_i^2`.
    pub fn stiffness(&self) -> Vec<f64> {
        self.shell.iter().zip(self.r.windows(2)).map(|(s, r)| s / ((r[1] - r[0]) * (r[1] - r[0]))).collect()
    }

    /// Second-order finite-difference derivative on the nonuniform nodes:
    /// centered three-point stencil inside, one-sided three-point stencils at
    /// the ends. Exact on quadratics.
    pub fn differentiate(&self, f: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        if n < 3 || f.len() != n {
            return Err(Error::Parameter("differentiation needs at least 3 nodes matching the grid".into()));
        }
        let r = &self.r;
        let mut out = vec![0.0; n];
        for i in 1..n - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            out[i] =
                -hp / (hm * (hm + hp)) * f[i - 1] + (hp - hm) / (hm * hp) * f[i] + hm / (hp * (hm + hp)) * f[i + 1];
        }
        out[0] = one_sided(r[0], r[1], r[2], f[0], f[1], f[2]);
        out[n - 1] = one_sided(r[n - 1], r[n - 2], r[n - 3], f[n - 1], f[n - 2], f[n - 3]);
        Ok(out)
    }

    /// Cubic Lagrange interpolation in `ln r` on the four nearest nodes.
    /// `x` must lie in `[r_min, r_max]`.
    pub fn interpolate(&self, f: &[f64], x: f64) -> f64 {
        let n = self.len();
        let s = x.ln();
        let j = match self.r.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(j) => return f[j],
            Err(j) => j,
        };
        // x in (r[j-1], r[j]); stencil j-2 .. j+1 clamped to the grid
        let start = (j.max(2) - 2).min(n - 4);
        let ls = &self.log_r[start..start + 4];
        let fs = &f[start..start + 4];
        let mut acc = 0.0;
        for k in 0..4 {
            let mut basis = 1.0;
            for m in 0..4 {
                if m != k {
                    basis *= (s - ls[m]) / (ls[k] - ls[m]);
                }
            }
            acc += basis * fs[k];
        }
        acc
    }
}

/// Derivative at `x0` from samples at `x0, x1, x2` (quadratic fit).
fn one_sided(x0: f64, x1: f64, x2: f64, f0: f64, f1: f64, f2: f64) -> f64 {
    let a = x1 - x0;
    let b = x2 - x0;
    // Lagrange basis derivatives at x0
    let c0 = -(a + b) / (a * b);
    let c1 = b / (a * (b - a));
    let c2 = -a / (b * (b - a));
    c0 * f0 + c1 * f1 + c2 * f2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_surfaces() {
        assert!((sphere_surface(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_surface(4) - 2.0 * PI * PI).abs() < 1e-13);
        assert!((sphere_surface(5) - 8.0 * PI * PI / 3.0).abs() < 1e-12);
        assert!((sphere_surface(2) - 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn annulus_volume_is_exact() {
        for &(d, stretch) in &[(3, 1.0), (3, 1e4), (4, 50.0), (5, 1e6)] {
            let g = RadialGrid::new(d, 1e-3, 1.0, 200, stretch).unwrap();
            let ones = vec![1.0; g.len()];
            let vol = g.integrate(&ones, 0);
            assert!(((vol - g.annulus_volume()) / g.annulus_volume()).abs() < 1e-12);
        }
        let g = RadialGrid::new(3, 1e-3, 1.0, 64, 1.0).unwrap();
        let vol = g.integrate(&vec![1.0; 64], 0);
        let exact = 4.0 * PI / 3.0 * (1.0 - 1e-9);
        assert!(((vol - exact) / exact).abs() < 1e-8);
    }

    #[test]
    fn gaussian_moments() {
        let g = RadialGrid::new(3, 1e-6, 12.0, 20000, 100.0).unwrap();
        let f: Vec<f64> = g.r().iter().map(|r| (-r * r).exp()).collect();
        let m0 = g.integrate(&f, 0);
        assert!(((m0 - PI.powf(1.5)) / PI.powf(1.5)).abs() < 1e-6, "{m0}");
        let m2 = g.integrate(&f, -2);
        // the excluded ball contributes 4 pi r_min
        let exact = 2.0 * PI.powf(1.5) - 4.0 * PI * 1e-6;
        assert!(((m2 - exact) / exact).abs() < 1e-6, "{m2}");
        assert_eq!(g.integrate(&vec![0.0; g.len()], 0), 0.0);
    }

    #[test]
    fn rejects_degenerate_grids() {
        assert!(RadialGrid::new(3, 1e-3, 1.0, 2, 1.0).is_err());
        assert!(RadialGrid::new(3, 0.0, 1.0, 32, 1.0).is_err());
        assert!(RadialGrid::new(3, 1.0, 1.0, 32, 1.0).is_err());
        assert!(RadialGrid::new(3, 1e-3, 1.0, 32, 0.5).is_err());
    }

    #[test]
    fn stretch_ratio_is_honoured() {
        let g = RadialGrid::new(3, 1e-4, 30.0, 4096, 1e5).unwrap();
        let h: Vec<f64> = g.r().windows(2).map(|p| p[1] - p[0]).collect();
        let hmin = h.iter().cloned().fold(f64::INFINITY, f64::min);
        let hmax = h.iter().cloned().fold(0.0, f64::max);
        assert!((hmax / hmin / 1e5 - 1.0).abs() < 1e-6);
        // logarithmic near the origin: h_0 ~ (q - 1) r_min
        assert!((h[1] / h[0] - 1.0 - h[0] / 1e-4).abs() < 1e-9);
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn differentiation_exact_on_quadratics() {
        let g = RadialGrid::new(3, 1e-2, 2.0, 40, 20.0).unwrap();
        let lin: Vec<f64> = g.r().to_vec();
        let d = g.differentiate(&lin).unwrap();
        assert!(d.iter().all(|x| (x - 1.0).abs() < 1e-9));
        let quad: Vec<f64> = g.r().iter().map(|r| r * r).collect();
        let d = g.differentiate(&quad).unwrap();
        for (x, r) in d.iter().zip(g.r()) {
            assert!((x - 2.0 * r).abs() < 1e-8);
        }
    }

    #[test]
    fn differentiation_second_order() {
        let err = |n: usize| {
            let g = RadialGrid::new(3, 1e-3, 6.0, n, 1.0).unwrap();
            let f: Vec<f64> = g.r().iter().map(|r| (-r * r).exp()).collect();
            let d = g.differentiate(&f).unwrap();
            d.iter().zip(g.r()).map(|(x, r)| (x + 2.0 * r * (-r * r).exp()).abs()).fold(0.0, f64::max)
        };
        let e1 = err(200);
        let e2 = err(399);
        let e3 = err(797);
        let r1 = e1 / e2;
        let r2 = e2 / e3;
        assert!((r1 - 4.0).abs() < 0.4 && (r2 - 4.0).abs() < 0.4, "{r1} {r2}");
    }

    #[test]
    fn interpolation_is_fourth_order_in_log_r() {
        let g = RadialGrid::new(3, 1e-4, 10.0, 2000, 1e4).unwrap();
        let f: Vec<f64> = g.r().iter().map(|r| (-r * r / 2.0).exp()).collect();
        for &x in &[1e-4, 3.3e-3, 0.5, 1.234, 4.2, 9.99] {
            let v = g.interpolate(&f, x);
            assert!((v - (-x * x / 2.0f64).exp()).abs() < 1e-8, "{x}: {v}");
        }
    }

    #[test]
    fn too_short_field_rejected() {
        let g = RadialGrid::new(3, 1e-3, 1.0, 16, 1.0).unwrap();
        assert!(g.differentiate(&[1.0, 2.0]).is_err());
    }
}
