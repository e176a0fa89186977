//! Energy, stability-bound and collocation-residual checks on solutions.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::field::WaveField;
use crate::galerkin::{basis, GalerkinSolution, ModalState};
use crate::io::write_csv_rows;
use crate::model::{CableConfig, InitialData};
use crate::quadrature::{mean, pairwise_sum, trapezoid_uniform};

/// `E(t)`, `E₀(t)` and the relative drift of `E`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub times: Vec<f64>,
    /// `∫(u_t² + a²u_x²) + Σ_k c·a²σ_k u(x_k)²`, `c` the Dirac factor.
    #[serde(rename = "E")]
    pub e: Vec<f64>,
    /// `∫u²`.
    #[serde(rename = "E0")]
    pub e0: Vec<f64>,
    /// `max_t |E(t) − E(0)| / E(0)`; zero when `E` vanishes identically.
    pub drift: f64,
}

impl EnergyReport {
    fn from_series(times: Vec<f64>, e: Vec<f64>, e0: Vec<f64>) -> Self {
        let e_first = e[0];
        let dev = e.iter().fold(0.0_f64, |m, v| m.max((v - e_first).abs()));
        let drift = if dev == 0.0 {
            0.0
        } else if e_first == 0.0 {
            f64::INFINITY
        } else {
            dev / e_first
        };
        Self { times, e, e0, drift }
    }

    /// Writes `t,E,E0` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let rows = (0..self.times.len()).map(|j| vec![self.times[j], self.e[j], self.e0[j]]);
        write_csv_rows(w, &["t", "E", "E0"], rows)
    }
}

/// Energy of `field` under the spring constants of `cfg`.
///
/// Fields carrying sine coefficients are evaluated exactly in the basis;
/// the spring term uses `c·a²σ_k` with `c` the Dirac factor of the cable's
/// convention, so the reported energy is the one its dynamics conserve.
/// Other fields use the trapezoid rule with one-sided slopes at the ends and
/// on each side of the node nearest every support.
pub fn energy(field: &WaveField, cfg: &CableConfig) -> EnergyReport {
    let times = field.grid().times();
    match field.modal() {
        Some(modal) => {
            let length = field.length();
            let a2 = cfg.wave_speed_sq();
            let c = cfg.convention().factor(cfg.length());
            let m = modal.coefficients.ncols();
            let k2: Vec<f64> = (1..=m).map(|j| (j as f64 * PI / length).powi(2)).collect();
            let springs: Vec<(f64, Vec<f64>)> = cfg
                .supports()
                .iter()
                .map(|s| (c * a2 * s.sigma(), (1..=m).map(|j| basis(j, s.position(), length)).collect()))
                .collect();
            let mut e = Vec::with_capacity(times.len());
            let mut e0 = Vec::with_capacity(times.len());
            let mut buf = vec![0.0; m];
            for n in 0..times.len() {
                let d = modal.coefficients.row(n);
                let v = modal.rates.row(n);
                for j in 0..m {
                    buf[j] = v[j] * v[j] + a2 * k2[j] * d[j] * d[j];
                }
                let mut total = pairwise_sum(&buf);
                for (weight, w) in &springs {
                    for j in 0..m {
                        buf[j] = d[j] * w[j];
                    }
                    let u = pairwise_sum(&buf);
                    total += weight * u * u;
                }
                for j in 0..m {
                    buf[j] = d[j] * d[j];
                }
                e.push(total);
                e0.push(pairwise_sum(&buf));
            }
            EnergyReport::from_series(times, e, e0)
        }
        None => grid_energy(field, cfg, times),
    }
}

/// Node index nearest each support, and the segment boundaries they induce.
fn segment_bounds(cfg: &CableConfig, nx: usize, dx: f64) -> (Vec<usize>, Vec<(usize, usize)>) {
    let nodes: Vec<usize> = cfg
        .supports()
        .iter()
        .map(|s| ((s.position() / dx).round() as usize).clamp(1, nx - 2))
        .collect();
    let mut cuts = vec![0];
    cuts.extend(nodes.iter().copied());
    cuts.push(nx - 1);
    cuts.dedup();
    let segs = cuts.windows(2).map(|w| (w[0], w[1])).collect();
    (nodes, segs)
}

/// `u_x` at node `i` of segment `[p, q]`, one-sided at the segment ends.
fn seg_slope(u: &[f64], i: usize, (p, q): (usize, usize), dx: f64) -> f64 {
    if q - p < 2 {
        return (u[q] - u[p]) / dx;
    }
    if i == p {
        (-3.0 * u[p] + 4.0 * u[p + 1] - u[p + 2]) / (2.0 * dx)
    } else if i == q {
        (3.0 * u[q] - 4.0 * u[q - 1] + u[q - 2]) / (2.0 * dx)
    } else {
        (u[i + 1] - u[i - 1]) / (2.0 * dx)
    }
}

/// Fourth-order `u_x` where the five-point stencil fits in the segment.
///
/// Energy quadrature uses it so smooth fields are limited by `O(dx⁴)`, not `O(dx²)`.
fn seg_slope_fine(u: &[f64], i: usize, (p, q): (usize, usize), dx: f64) -> f64 {
    if i >= p + 2 && i + 2 <= q {
        (u[i - 2] - 8.0 * u[i - 1] + 8.0 * u[i + 1] - u[i + 2]) / (12.0 * dx)
    } else {
        seg_slope(u, i, (p, q), dx)
    }
}

/// `u_xx` at node `i` of segment `[p, q]`, one-sided at the segment ends.
fn seg_curvature(u: &[f64], i: usize, (p, q): (usize, usize), dx: f64) -> f64 {
    let h2 = dx * dx;
    if q - p < 2 {
        return 0.0;
    }
    if q - p < 3 {
        return (u[p + 2] - 2.0 * u[p + 1] + u[p]) / h2;
    }
    if i == p {
        (2.0 * u[p] - 5.0 * u[p + 1] + 4.0 * u[p + 2] - u[p + 3]) / h2
    } else if i == q {
        (2.0 * u[q] - 5.0 * u[q - 1] + 4.0 * u[q - 2] - u[q - 3]) / h2
    } else {
        (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2
    }
}

fn grid_energy(field: &WaveField, cfg: &CableConfig, times: Vec<f64>) -> EnergyReport {
    let grid = field.grid();
    let nx = grid.nx();
    let length = field.length();
    let dx = grid.dx(length);
    let a2 = cfg.wave_speed_sq();
    let c = cfg.convention().factor(cfg.length());
    let (nodes, segs) = segment_bounds(cfg, nx, dx);
    let mut e = Vec::with_capacity(times.len());
    let mut e0 = Vec::with_capacity(times.len());
    let mut sq = vec![0.0; nx];
    for j in 0..grid.nt() {
        let u = field.u_row(j);
        let ut = field.ut_row(j);
        for (s, v) in sq.iter_mut().zip(ut) {
            *s = v * v;
        }
        let kinetic = trapezoid_uniform(&sq, dx);
        let mut gradient = 0.0;
        for &(p, q) in &segs {
            let slopes: Vec<f64> = (p..=q).map(|i| seg_slope_fine(u, i, (p, q), dx).powi(2)).collect();
            gradient += trapezoid_uniform(&slopes, dx);
        }
        let spring: f64 = cfg
            .supports()
            .iter()
            .zip(&nodes)
            .map(|(s, &i)| c * a2 * s.sigma() * u[i] * u[i])
            .sum();
        for (s, v) in sq.iter_mut().zip(u) {
            *s = v * v;
        }
        e.push(kinetic + a2 * gradient + spring);
        e0.push(trapezoid_uniform(&sq, dx));
    }
    EnergyReport::from_series(times, e, e0)
}

/// Pointwise check of `E₀(t) ≤ eᵗE₀(0) + (eᵗ − 1)E(0)` for a field difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub times: Vec<f64>,
    /// `E₀(t)` of the difference.
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    /// `rhs − lhs` per instant.
    pub slack: Vec<f64>,
    pub max_slack: f64,
    pub min_slack: f64,
    pub tol: f64,
    pub holds: bool,
}

/// Relative tolerance applied to the right side of the bound.
pub const BOUND_TOL: f64 = 1e-6;

pub fn stability_bound_check(
    field1: &WaveField,
    field2: &WaveField,
    cfg: &CableConfig,
) -> Result<BoundReport> {
    let w = field1.difference(field2)?;
    let rep = energy(&w, cfg);
    let (e_0, e0_0) = (rep.e[0], rep.e0[0]);
    let rhs: Vec<f64> = rep.times.iter().map(|&t| t.exp() * e0_0 + t.exp_m1() * e_0).collect();
    let slack: Vec<f64> = rhs.iter().zip(&rep.e0).map(|(r, l)| r - l).collect();
    let holds = rep.e0.iter().zip(&rhs).all(|(l, r)| *l <= r * (1.0 + BOUND_TOL));
    Ok(BoundReport {
        max_slack: slack.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        min_slack: slack.iter().cloned().fold(f64::INFINITY, f64::min),
        times: rep.times,
        lhs: rep.e0,
        rhs,
        slack,
        tol: BOUND_TOL,
        holds,
    })
}

/// Quantities a candidate solution may be asked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    U,
    Ut,
    Ux,
    Utt,
    Uxx,
}

const ALL_QUANTITIES: [Quantity; 5] =
    [Quantity::U, Quantity::Ut, Quantity::Ux, Quantity::Utt, Quantity::Uxx];

/// Which one-sided limit to take at a support.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    /// Away from supports; either limit.
    Interior,
}

/// A solution that can be evaluated pointwise.
pub trait Candidate {
    fn provides(&self, q: Quantity) -> bool;
    /// `q` at `(x, t)`; `side` selects the one-sided limit at a support.
    fn eval(&self, q: Quantity, x: f64, t: f64, side: Side) -> f64;
}

/// `A·sin(kπx/L)·cos(ωt) + B·sin(kπx/L)·sin(ωt)` with `ω = kπa/L`, the exact
/// standing wave of a string without supports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCandidate {
    pub mode: u32,
    pub cos_amplitude: f64,
    pub sin_amplitude: f64,
    pub length: f64,
    pub wave_speed: f64,
}

impl Candidate for ModeCandidate {
    fn provides(&self, _: Quantity) -> bool {
        true
    }

    fn eval(&self, q: Quantity, x: f64, t: f64, _: Side) -> f64 {
        let k = self.mode as f64 * PI / self.length;
        let w = k * self.wave_speed;
        let (sx, cx) = (k * x).sin_cos();
        let (st, ct) = (w * t).sin_cos();
        let time = self.cos_amplitude * ct + self.sin_amplitude * st;
        let time_t = w * (-self.cos_amplitude * st + self.sin_amplitude * ct);
        match q {
            Quantity::U => sx * time,
            Quantity::Ut => sx * time_t,
            Quantity::Ux => k * cx * time,
            Quantity::Utt => -w * w * sx * time,
            Quantity::Uxx => -k * k * sx * time,
        }
    }
}

/// A Galerkin solution with analytic derivatives of its truncated series.
///
/// At a support the one-sided slope is a second-order one-sided difference
/// with step `2L/m`, the shortest length the truncated basis resolves.
pub struct ModalCandidate<'a> {
    sol: &'a GalerkinSolution<'a>,
    supports: Vec<f64>,
    cache: RefCell<Option<(f64, ModalState)>>,
}

impl<'a> ModalCandidate<'a> {
    pub fn new(sol: &'a GalerkinSolution<'a>) -> Self {
        let supports = sol.system().supports().iter().map(|s| s.0).collect();
        Self { sol, supports, cache: RefCell::new(None) }
    }

    fn with_state<R>(&self, t: f64, f: impl FnOnce(&ModalState) -> R) -> R {
        let mut cache = self.cache.borrow_mut();
        if cache.as_ref().is_none_or(|(tc, _)| *tc != t) {
            *cache = Some((t, self.sol.state(t)));
        }
        f(&cache.as_ref().expect("cache filled").1)
    }

    fn sum(&self, coeffs: &nalgebra::DVector<f64>, x: f64, order: u32) -> f64 {
        let length = self.sol.system().length();
        let norm = (2.0 / length).sqrt();
        let terms: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| {
                let k = (j + 1) as f64 * PI / length;
                let (s, co) = (k * x).sin_cos();
                c * norm
                    * match order {
                        0 => s,
                        1 => k * co,
                        _ => -k * k * s,
                    }
            })
            .collect();
        pairwise_sum(&terms)
    }
}

impl Candidate for ModalCandidate<'_> {
    fn provides(&self, _: Quantity) -> bool {
        true
    }

    fn eval(&self, q: Quantity, x: f64, t: f64, side: Side) -> f64 {
        self.with_state(t, |st| match q {
            Quantity::U => self.sum(&st.d, x, 0),
            Quantity::Ut => self.sum(&st.d_t, x, 0),
            Quantity::Utt => self.sum(&st.d_tt, x, 0),
            Quantity::Uxx => self.sum(&st.d, x, 2),
            Quantity::Ux => {
                let at_support = self.supports.contains(&x);
                let delta = 2.0 * self.sol.system().length() / self.sol.system().m() as f64;
                match side {
                    Side::Left if at_support => {
                        let u = |y: f64| self.sum(&st.d, y, 0);
                        (3.0 * u(x) - 4.0 * u(x - delta) + u(x - 2.0 * delta)) / (2.0 * delta)
                    }
                    Side::Right if at_support => {
                        let u = |y: f64| self.sum(&st.d, y, 0);
                        (-3.0 * u(x) + 4.0 * u(x + delta) - u(x + 2.0 * delta)) / (2.0 * delta)
                    }
                    _ => self.sum(&st.d, x, 1),
                }
            }
        })
    }
}

/// A sampled field with finite-difference derivatives whose stencils stay
/// inside one segment between supports.
pub struct GridCandidate<'a> {
    field: &'a WaveField,
    segs: Vec<(usize, usize)>,
}

impl<'a> GridCandidate<'a> {
    pub fn new(field: &'a WaveField, cfg: &CableConfig) -> Self {
        let grid = field.grid();
        let (_, segs) = segment_bounds(cfg, grid.nx(), grid.dx(field.length()));
        Self { field, segs }
    }

    fn segment_of(&self, i: usize, side: Side) -> (usize, usize) {
        let hits: Vec<&(usize, usize)> =
            self.segs.iter().filter(|(p, q)| *p <= i && i <= *q).collect();
        match (hits.as_slice(), side) {
            ([first, ..], Side::Left) if hits.len() > 1 => **first,
            ([.., last], Side::Right) if hits.len() > 1 => **last,
            ([only, ..], _) => **only,
            ([], _) => self.segs[0],
        }
    }

    /// Spatial quantity at node `i` of time row `j`.
    fn node_value(&self, q: Quantity, j: usize, i: usize, seg: (usize, usize)) -> f64 {
        let grid = self.field.grid();
        let dx = grid.dx(self.field.length());
        let dt = grid.dt();
        let nt = grid.nt();
        match q {
            Quantity::U => self.field.u_row(j)[i],
            Quantity::Ut => self.field.ut_row(j)[i],
            Quantity::Ux => seg_slope(self.field.u_row(j), i, seg, dx),
            Quantity::Uxx => seg_curvature(self.field.u_row(j), i, seg, dx),
            Quantity::Utt => {
                let v = |r: usize| self.field.ut_row(r)[i];
                if j == 0 {
                    (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * dt)
                } else if j == nt - 1 {
                    (3.0 * v(j) - 4.0 * v(j - 1) + v(j - 2)) / (2.0 * dt)
                } else {
                    (v(j + 1) - v(j - 1)) / (2.0 * dt)
                }
            }
        }
    }
}

impl Candidate for GridCandidate<'_> {
    fn provides(&self, _: Quantity) -> bool {
        self.field.grid().nt() >= 3
    }

    fn eval(&self, q: Quantity, x: f64, t: f64, side: Side) -> f64 {
        let grid = self.field.grid();
        let length = self.field.length();
        let nx = grid.nx();
        let sx = (x / grid.dx(length)).clamp(0.0, (nx - 1) as f64);
        let st = (t / grid.dt()).clamp(0.0, (grid.nt() - 1) as f64);
        let nearest = sx.round();
        let (i0, wx) = if (sx - nearest).abs() < 1e-9 {
            (nearest as usize, 0.0)
        } else {
            let i = (sx.floor() as usize).min(nx - 2);
            (i, sx - i as f64)
        };
        let j0 = (st.floor() as usize).min(grid.nt() - 2);
        let wt = st - j0 as f64;
        let seg = if wx == 0.0 {
            self.segment_of(i0, side)
        } else {
            self.segment_of(i0, Side::Right)
        };
        let at = |j: usize| {
            let a = self.node_value(q, j, i0, seg);
            if wx == 0.0 {
                a
            } else {
                a * (1.0 - wx) + self.node_value(q, j, i0 + 1, seg) * wx
            }
        };
        if wt == 0.0 {
            at(j0)
        } else {
            at(j0) * (1.0 - wt) + at(j0 + 1) * wt
        }
    }
}

type PointFn = Box<dyn Fn(f64, f64) -> f64>;

/// A candidate assembled from closures; absent quantities are unsupported.
#[derive(Default)]
pub struct FnCandidate {
    u: Option<PointFn>,
    ut: Option<PointFn>,
    ux: Option<PointFn>,
    utt: Option<PointFn>,
    uxx: Option<PointFn>,
}

impl FnCandidate {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, q: Quantity, f: impl Fn(f64, f64) -> f64 + 'static) -> Self {
        let slot = match q {
            Quantity::U => &mut self.u,
            Quantity::Ut => &mut self.ut,
            Quantity::Ux => &mut self.ux,
            Quantity::Utt => &mut self.utt,
            Quantity::Uxx => &mut self.uxx,
        };
        *slot = Some(Box::new(f));
        self
    }

    fn slot(&self, q: Quantity) -> Option<&PointFn> {
        match q {
            Quantity::U => self.u.as_ref(),
            Quantity::Ut => self.ut.as_ref(),
            Quantity::Ux => self.ux.as_ref(),
            Quantity::Utt => self.utt.as_ref(),
            Quantity::Uxx => self.uxx.as_ref(),
        }
    }
}

impl Candidate for FnCandidate {
    fn provides(&self, q: Quantity) -> bool {
        self.slot(q).is_some()
    }

    fn eval(&self, q: Quantity, x: f64, t: f64, _: Side) -> f64 {
        self.slot(q).map_or(f64::NAN, |f| f(x, t))
    }
}

/// Weights of the four loss terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    #[serde(rename = "lambda_pde")]
    pub pde: f64,
    #[serde(rename = "lambda_ic")]
    pub ic: f64,
    #[serde(rename = "lambda_bc")]
    pub bc: f64,
    #[serde(rename = "lambda_cc")]
    pub cc: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { pde: 1.0, ic: 1.0, bc: 1.0, cc: 1.0 }
    }
}

/// Collocation counts; `pde` and `ic` hold one entry per segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollocationCounts {
    pub pde: Vec<usize>,
    pub ic: Vec<usize>,
    pub bc: usize,
    pub cc_continuity: usize,
    pub cc_jump: usize,
}

impl CollocationCounts {
    /// 800 interior and 800 initial points split by segment length, 100
    /// boundary instants, 200 continuity and 600 jump instants per support.
    ///
    /// A support at a quarter span gives the 200/600 split.
    pub fn for_config(cfg: &CableConfig) -> Self {
        let mut cuts = vec![0.0];
        cuts.extend(cfg.supports().iter().map(|s| s.position()));
        cuts.push(cfg.length());
        let split: Vec<usize> = cuts
            .windows(2)
            .map(|w| ((800.0 * (w[1] - w[0]) / cfg.length()).round() as usize).max(1))
            .collect();
        Self { pde: split.clone(), ic: split, bc: 100, cc_continuity: 200, cc_jump: 600 }
    }
}

/// Weighted mean-squared residuals of a candidate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossReport {
    pub mse_pde: f64,
    pub mse_ic: f64,
    pub mse_bc: f64,
    pub mse_cc: f64,
    pub weights: LossWeights,
    pub total: f64,
}

/// `frac((i + 1/2)·g)` with `g` the golden-ratio conjugate: a low-discrepancy
/// time coordinate paired with uniformly spaced positions.
fn lattice_time(i: usize, horizon: f64) -> f64 {
    const G: f64 = 0.618_033_988_749_894_8;
    ((i as f64 + 0.5) * G).fract() * horizon
}

/// Mean-squared residuals of the wave equation, initial data, fixed ends
/// and support conditions at collocation points on `[0, L] × [0, horizon]`.
///
/// Positions are uniformly spaced inside each segment, boundary and support
/// instants uniformly spaced in time, and interior instants follow a
/// golden-ratio lattice.
pub fn collocation_loss(
    candidate: &dyn Candidate,
    cfg: &CableConfig,
    init: &InitialData,
    horizon: f64,
    weights: LossWeights,
    counts: &CollocationCounts,
) -> Result<LossReport> {
    if let Some(q) = ALL_QUANTITIES.iter().find(|q| !candidate.provides(**q)) {
        return Err(Error::Capability(format!("candidate cannot evaluate {q:?}")));
    }
    if !(horizon > 0.0) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    let n_segments = cfg.supports().len() + 1;
    if counts.pde.len() != n_segments || counts.ic.len() != n_segments {
        return domain(format!("collocation counts must list {n_segments} segments"));
    }
    if [&weights.pde, &weights.ic, &weights.bc, &weights.cc].iter().any(|w| !(**w >= 0.0)) {
        return domain("loss weights must be nonnegative");
    }
    let a2 = cfg.wave_speed_sq();
    let mut cuts = vec![0.0];
    cuts.extend(cfg.supports().iter().map(|s| s.position()));
    cuts.push(cfg.length());
    let uniform = |i: usize, n: usize, lo: f64, hi: f64| lo + (i as f64 + 0.5) / n as f64 * (hi - lo);
    let ev = |q, x, t| candidate.eval(q, x, t, Side::Interior);

    let mut mse_pde = 0.0;
    let mut mse_ic = 0.0;
    for (s, w) in cuts.windows(2).enumerate() {
        let pde: Vec<f64> = (0..counts.pde[s])
            .map(|i| {
                let x = uniform(i, counts.pde[s], w[0], w[1]);
                let t = lattice_time(i, horizon);
                (ev(Quantity::Utt, x, t) - a2 * ev(Quantity::Uxx, x, t)).powi(2)
            })
            .collect();
        mse_pde += mean(&pde);
        let ic: Vec<f64> = (0..counts.ic[s])
            .map(|i| {
                let x = uniform(i, counts.ic[s], w[0], w[1]);
                (ev(Quantity::U, x, 0.0) - init.phi.value(x)).powi(2)
                    + (ev(Quantity::Ut, x, 0.0) - init.psi.value(x)).powi(2)
            })
            .collect();
        mse_ic += mean(&ic);
    }

    let length = cfg.length();
    let ends = |x: f64| -> Vec<f64> {
        (0..counts.bc).map(|i| ev(Quantity::U, x, uniform(i, counts.bc, 0.0, horizon)).powi(2)).collect()
    };
    let mse_bc = mean(&ends(0.0)) + mean(&ends(length));

    let mut mse_cc = 0.0;
    for s in cfg.supports() {
        let x = s.position();
        let cont: Vec<f64> = (0..counts.cc_continuity)
            .map(|i| {
                let t = uniform(i, counts.cc_continuity, 0.0, horizon);
                (candidate.eval(Quantity::U, x, t, Side::Left) - candidate.eval(Quantity::U, x, t, Side::Right))
                    .powi(2)
            })
            .collect();
        let jump: Vec<f64> = (0..counts.cc_jump)
            .map(|i| {
                let t = uniform(i, counts.cc_jump, 0.0, horizon);
                let left = candidate.eval(Quantity::Ux, x, t, Side::Left);
                let right = candidate.eval(Quantity::Ux, x, t, Side::Right);
                let u = candidate.eval(Quantity::U, x, t, Side::Left);
                (-left + right - s.sigma() * u).powi(2)
            })
            .collect();
        mse_cc += mean(&cont) + mean(&jump);
    }

    let total = weights.pde * mse_pde + weights.ic * mse_ic + weights.bc * mse_bc + weights.cc * mse_cc;
    Ok(LossReport { mse_pde, mse_ic, mse_bc, mse_cc, weights, total })
}
