//! Initial-data toolkit: mollification, rough-path generators, fractional
//! Sobolev seminorms, and the commutator decay measurement.
//!
//! Functions are carried on uniform grids as [`SampledFunction`]s with
//! two-component values. Generators are deterministic given a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::State;
use crate::regression::{fit_loglog, LogLogFit};
use crate::system::FluxSystem;

/// `int_{-1}^{1} exp(-1/(1-x^2)) dx`, pinned so the kernel normalization is
/// reproducible.
pub const BUMP_MASS: f64 = 0.443993816168079437823048921171;

/// Resolution contract: the carrier grid must resolve the mollification
/// width by at least this factor.
pub const RESOLUTION_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Grid {
    pub fn uniform(a: f64, b: f64, n: usize) -> Grid {
        assert!(n >= 2 && b > a);
        Grid {
            x0: a,
            dx: (b - a) / (n - 1) as f64,
            n,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + self.dx * i as f64
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }
}

/// Uniformly sampled two-component function.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledFunction {
    pub grid: Grid,
    pub values: Vec<State>,
}

impl SampledFunction {
    pub fn new(grid: Grid, values: Vec<State>) -> Self {
        assert_eq!(grid.n, values.len());
        SampledFunction { grid, values }
    }

    pub fn from_scalar(grid: Grid, scalar: Vec<f64>) -> Self {
        let values = scalar.into_iter().map(|s| State::new(s, 0.0)).collect();
        SampledFunction::new(grid, values)
    }

    pub fn map(&self, f: impl Fn(State) -> State) -> SampledFunction {
        SampledFunction {
            grid: self.grid,
            values: self.values.iter().map(|&u| f(u)).collect(),
        }
    }

    /// Largest pointwise distance from the given state.
    pub fn sup_distance(&self, from: State) -> f64 {
        self.values
            .iter()
            .map(|&u| (u - from).norm())
            .fold(0.0, f64::max)
    }

    /// Discrete L^p norm of the pointwise distance to another function on
    /// the shared grid, restricted to `interval`.
    pub fn lp_distance(&self, other: &SampledFunction, p: f64, interval: (f64, f64)) -> f64 {
        assert_eq!(self.grid, other.grid);
        let mut acc = 0.0;
        for i in 0..self.grid.n {
            let x = self.grid.x(i);
            if x < interval.0 || x > interval.1 {
                continue;
            }
            acc += (self.values[i] - other.values[i]).norm().powf(p) * self.grid.dx;
        }
        acc.powf(1.0 / p)
    }

    /// Nearest-sample evaluation.
    pub fn eval(&self, x: f64) -> State {
        let i = ((x - self.grid.x0) / self.grid.dx).round() as i64;
        self.values[i.clamp(0, self.grid.n as i64 - 1) as usize]
    }
}

/// Samples of the scaled bump kernel `gamma_delta` on the grid offsets,
/// renormalized so the trapezoid mass is exactly one.
pub fn mollifier_kernel(delta: f64, dx: f64) -> Result<Vec<f64>> {
    if delta <= 0.0 || dx <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "kernel needs positive width and spacing, got delta = {delta}, dx = {dx}"
        )));
    }
    let half = (delta / dx).floor() as i64;
    let mut w: Vec<f64> = (-half..=half)
        .map(|k| {
            let x = k as f64 * dx / delta;
            if x.abs() >= 1.0 {
                0.0
            } else {
                (-1.0 / (1.0 - x * x)).exp() / (BUMP_MASS * delta)
            }
        })
        .collect();
    let mass: f64 = w.iter().sum::<f64>() * dx;
    for v in &mut w {
        *v /= mass;
    }
    Ok(w)
}

/// Convolution with the bump kernel at width `delta` (trapezoid quadrature,
/// constant extension at the domain ends).
pub fn mollify(u: &SampledFunction, delta: f64) -> Result<SampledFunction> {
    if u.grid.dx > delta / RESOLUTION_FACTOR + 1e-15 {
        return Err(Error::ResolutionTooCoarse {
            dx: u.grid.dx,
            delta,
        });
    }
    let w = mollifier_kernel(delta, u.grid.dx)?;
    let half = (w.len() / 2) as i64;
    let n = u.grid.n as i64;
    let mut out = Vec::with_capacity(u.grid.n);
    for i in 0..n {
        let mut acc = State::ZERO;
        for (j, &wk) in w.iter().enumerate() {
            let k = j as i64 - half;
            let idx = (i - k).clamp(0, n - 1) as usize;
            acc += u.values[idx] * wk;
        }
        out.push(acc * u.grid.dx);
    }
    Ok(SampledFunction::new(u.grid, out))
}

/// Discrete total variation maximized over window translates of length `l`.
pub fn tv_exact(u: &SampledFunction, l: f64) -> f64 {
    let n = u.grid.n;
    if n < 2 {
        return 0.0;
    }
    let jumps: Vec<(f64, f64)> = (0..n - 1)
        .map(|i| (u.grid.x(i), (u.values[i + 1] - u.values[i]).norm()))
        .collect();
    let mut best = 0.0f64;
    let mut j = 0;
    let mut acc = 0.0;
    for i in 0..jumps.len() {
        if j < i {
            j = i;
            acc = 0.0;
        }
        while j < jumps.len() && jumps[j].0 < jumps[i].0 + l {
            acc += jumps[j].1;
            j += 1;
        }
        best = best.max(acc);
        acc -= jumps[i].1;
    }
    best
}

/// Gagliardo seminorm `|u|_{W^{s,p}}` by double-sum quadrature over the
/// domain, with offsets below `2 dx` excluded. Returns the seminorm and the
/// truncation band that was skipped.
pub fn sobolev_seminorm(u: &SampledFunction, s: f64, p: f64) -> (f64, f64) {
    let n = u.grid.n;
    let dx = u.grid.dx;
    let mut acc = 0.0;
    for k in 2..n {
        let h = k as f64 * dx;
        let weight = dx * dx / h.powf(1.0 + s * p);
        let mut row = 0.0;
        for i in k..n {
            row += (u.values[i] - u.values[i - k]).norm().powf(p);
        }
        acc += row * weight;
    }
    // Factor two for negative offsets.
    ((2.0 * acc).powf(1.0 / p), 2.0 * dx)
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

fn sub_seed(seed: u64, stream: u64) -> u64 {
    seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// One fractional Gaussian noise sample path by circulant embedding;
/// `m` increments at unit spacing.
fn fgn_circulant(hurst: f64, rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    let cov = |k: f64| -> f64 {
        0.5 * ((k - 1.0).abs().powf(2.0 * hurst) - 2.0 * k.abs().powf(2.0 * hurst)
            + (k + 1.0).abs().powf(2.0 * hurst))
    };
    let big_n = 2 * m;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(big_n);
    for j in 0..=m {
        row.push(Complex::new(cov(j as f64), 0.0));
    }
    for j in (1..m).rev() {
        row.push(Complex::new(cov(j as f64), 0.0));
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(big_n);
    fft.process(&mut row);
    // Eigenvalues of the circulant; clamp the tiny negatives that appear
    // for Hurst indices near one.
    let lambda: Vec<f64> = row.iter().map(|c| c.re.max(0.0)).collect();

    let normal = |rng: &mut ChaCha8Rng| -> f64 {
        // Box-Muller on the deterministic stream.
        let u1: f64 = rng.gen::<f64>().max(1e-300);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    };

    let nf = big_n as f64;
    let mut w = vec![Complex::new(0.0, 0.0); big_n];
    w[0] = Complex::new((lambda[0] / nf).sqrt() * normal(rng), 0.0);
    w[m] = Complex::new((lambda[m] / nf).sqrt() * normal(rng), 0.0);
    for k in 1..m {
        let a = normal(rng);
        let b = normal(rng);
        let scale = (lambda[k] / (2.0 * nf)).sqrt();
        w[k] = Complex::new(scale * a, scale * b);
        w[big_n - k] = Complex::new(scale * a, -scale * b);
    }
    let fft2 = planner.plan_fft_forward(big_n);
    fft2.process(&mut w);
    w.iter().take(m).map(|c| c.re).collect()
}

/// Fractional Brownian motion path: two independent components, exact
/// covariance by circulant embedding, byte-reproducible for a fixed seed.
pub fn fbm_path(hurst: f64, seed: u64, grid: Grid) -> SampledFunction {
    assert!(hurst > 0.0 && hurst < 1.0);
    let m = grid.n - 1;
    let scale = grid.dx.powf(hurst);
    let mut values = vec![State::ZERO; grid.n];
    for comp in 0..2 {
        let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(seed, comp as u64 + 1));
        let fgn = fgn_circulant(hurst, &mut rng, m);
        let mut acc = 0.0;
        for i in 1..grid.n {
            acc += scale * fgn[i - 1];
            if comp == 0 {
                values[i].u1 = acc;
            } else {
                values[i].u2 = acc;
            }
        }
    }
    SampledFunction::new(grid, values)
}

/// Lacunary cosine series with exponent `alpha`: a fixture with Holder
/// regularity exactly `alpha` at every point.
pub fn weierstrass(alpha: f64, seed: Option<u64>, grid: Grid) -> SampledFunction {
    assert!(alpha > 0.0 && alpha < 1.0);
    let levels = ((1.0 / grid.dx).log2().ceil() as usize + 2).min(48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0x5EED));
    let phases: Vec<(f64, f64)> = (0..=levels)
        .map(|_| {
            (
                rng.gen::<f64>() * std::f64::consts::TAU,
                rng.gen::<f64>() * std::f64::consts::TAU,
            )
        })
        .collect();
    let mut values = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        let mut v = State::ZERO;
        for (k, (p1, p2)) in phases.iter().enumerate() {
            let freq = (2.0f64).powi(k as i32);
            let amp = freq.powf(-alpha);
            v.u1 += amp * (freq * std::f64::consts::PI * x + p1).cos();
            v.u2 += amp * (freq * std::f64::consts::PI * x + p2).cos();
        }
        values.push(v);
    }
    SampledFunction::new(grid, values)
}

/// Piecewise-constant path with `n_jumps` uniformly placed jumps.
pub fn random_step(seed: u64, n_jumps: usize, grid: Grid) -> SampledFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut positions: Vec<f64> = (0..n_jumps)
        .map(|_| grid.x0 + rng.gen::<f64>() * (grid.x_end() - grid.x0))
        .collect();
    positions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let levels: Vec<State> = (0..=n_jumps)
        .map(|_| State::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
        .collect();
    let mut values = Vec::with_capacity(grid.n);
    for i in 0..grid.n {
        let x = grid.x(i);
        let k = positions.partition_point(|&p| p <= x);
        values.push(levels[k]);
    }
    SampledFunction::new(grid, values)
}

/// Affine rescaling into the ball `B_radius(center)`: centers each
/// component's midrange and scales the largest pointwise norm to `radius`.
pub fn clamp_into_ball(u: &SampledFunction, center: State, radius: f64) -> SampledFunction {
    let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut lo2, mut hi2) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &u.values {
        lo1 = lo1.min(v.u1);
        hi1 = hi1.max(v.u1);
        lo2 = lo2.min(v.u2);
        hi2 = hi2.max(v.u2);
    }
    let mid = State::new(0.5 * (lo1 + hi1), 0.5 * (lo2 + hi2));
    let max_norm = u
        .values
        .iter()
        .map(|&v| (v - mid).norm())
        .fold(0.0, f64::max);
    let scale = if max_norm > 0.0 { radius / max_norm } else { 0.0 };
    u.map(|v| center + (v - mid) * scale)
}

// ---------------------------------------------------------------------------
// Commutator decay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// `(delta, ||dx u_delta||_{L3} * ||f(u_delta) - f(u)_delta||_{L3/2})`.
    pub per_delta: Vec<(f64, f64)>,
    pub fit: Option<LogLogFit>,
    /// All values at the numerical floor; the slope test is skipped.
    pub floor: bool,
}

fn lp_norm(values: &[f64], dx: f64, p: f64) -> f64 {
    (values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * dx).powf(1.0 / p)
}

/// Commutator decay of `f(u)_delta - f(u_delta)` weighted by the gradient of
/// the mollified profile, measured over a delta sweep on the trimmed
/// interior of the domain.
pub fn besov_commutator_decay(
    sys: &dyn FluxSystem,
    u: &SampledFunction,
    deltas: &[f64],
) -> Result<CommutatorReport> {
    let fu = u.map(|v| sys.flux(v));
    let margin = deltas.iter().cloned().fold(0.0f64, f64::max) + 2.0 * u.grid.dx;
    let lo = u.grid.x0 + margin;
    let hi = u.grid.x_end() - margin;
    if hi <= lo {
        return Err(Error::InvalidArgument(
            "domain too small for the requested mollification widths".to_string(),
        ));
    }
    let mut per_delta = Vec::with_capacity(deltas.len());
    for &delta in deltas {
        let u_d = mollify(u, delta)?;
        let fu_d = mollify(&fu, delta)?;
        let f_of_ud = u_d.map(|v| sys.flux(v));
        let mut grads = Vec::new();
        let mut comms = Vec::new();
        for i in 1..u.grid.n - 1 {
            let x = u.grid.x(i);
            if x < lo || x > hi {
                continue;
            }
            let g = (u_d.values[i + 1] - u_d.values[i - 1]) / (2.0 * u.grid.dx);
            grads.push(g.norm());
            comms.push((f_of_ud.values[i] - fu_d.values[i]).norm());
        }
        let value = lp_norm(&grads, u.grid.dx, 3.0) * lp_norm(&comms, u.grid.dx, 1.5);
        per_delta.push((delta, value));
    }
    let floor = per_delta.iter().all(|&(_, v)| v < 1e-13);
    let fit = if floor {
        None
    } else {
        fit_loglog(
            &per_delta.iter().map(|p| p.0).collect::<Vec<_>>(),
            &per_delta.iter().map(|p| p.1).collect::<Vec<_>>(),
        )
    };
    Ok(CommutatorReport {
        per_delta,
        fit,
        floor,
    })
}

/// Dyadic oscillation fit of the Holder exponent: the log-log slope of the
/// largest window oscillation against the window width.
pub fn holder_exponent(u: &SampledFunction) -> Option<f64> {
    let mut widths = Vec::new();
    let mut oscs = Vec::new();
    let mut window = 4;
    while window < u.grid.n / 4 {
        let mut max_osc = 0.0f64;
        for start in (0..u.grid.n - window).step_by(window / 2) {
            let slice = &u.values[start..start + window];
            let (mut lo1, mut hi1) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in slice {
                lo1 = lo1.min(v.u1);
                hi1 = hi1.max(v.u1);
            }
            max_osc = max_osc.max(hi1 - lo1);
        }
        widths.push(window as f64 * u.grid.dx);
        oscs.push(max_osc);
        window *= 2;
    }
    fit_loglog(&widths, &oscs).map(|f| f.slope)
}
