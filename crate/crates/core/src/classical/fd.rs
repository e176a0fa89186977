//! Explicit central-difference solver with lumped springs at support nodes.
//!
//! Interior nodes follow `u_tt = a²Δ²u/dx²`; a support node adds
//! `−(a²σ_k/dx)·u_i`, whose continuum limit is continuity plus the jump
//! `−u_x(x_k−) + u_x(x_k+) = σ_k u(x_k)`.

use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::field::{MethodTag, WaveField};
use crate::io::fmt_f64;
use crate::model::{CableConfig, InitialData, SamplingGrid};

/// Instants at which the interface trace is recorded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceSampling {
    /// The output grid's instants.
    #[default]
    OutputTimes,
    /// Every internal time step.
    EveryStep,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdOptions {
    /// Target Courant number `a·dt/dx`; the internal step divides the output step.
    pub cfl: f64,
    /// Internal steps per output step, overriding `cfl`.
    pub substeps: Option<usize>,
    pub trace: TraceSampling,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { cfl: 0.9, substeps: None, trace: TraceSampling::OutputTimes }
    }
}

/// Support displacement `h(t)` and slope jump per support.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterfaceTrace {
    pub times: Vec<f64>,
    /// Node positions the supports were snapped to.
    pub positions: Vec<f64>,
    pub snap_distance: Vec<f64>,
    pub sigma: Vec<f64>,
    /// `u_at_support[k][j] = u(x_k, t_j)`.
    pub u_at_support: Vec<Vec<f64>>,
    /// `−u_x(x_k−) + u_x(x_k+)` from one-sided second-order differences.
    pub slope_jump: Vec<Vec<f64>>,
}

impl InterfaceTrace {
    /// `slope_jump − σ_k·u` for support `k`.
    pub fn jump_residual(&self, k: usize) -> Vec<f64> {
        self.slope_jump[k]
            .iter()
            .zip(&self.u_at_support[k])
            .map(|(j, u)| j - self.sigma[k] * u)
            .collect()
    }

    /// `max |slope_jump − σu|` over instants `t > t_min`.
    pub fn max_jump_residual(&self, k: usize, t_min: f64) -> f64 {
        self.jump_residual(k)
            .iter()
            .zip(&self.times)
            .filter(|(_, &t)| t > t_min)
            .fold(0.0, |m, (r, _)| m.max(r.abs()))
    }

    /// Uniform spacing of the trace instants.
    pub fn dt(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    /// Writes `t, u_at_support_k, slope_jump_k` columns.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut header = vec!["t".to_string()];
        for k in 0..self.positions.len() {
            header.push(format!("u_at_support_{}", k + 1));
            header.push(format!("slope_jump_{}", k + 1));
        }
        writeln!(w, "{}", header.join(","))?;
        for (j, &t) in self.times.iter().enumerate() {
            let mut row = vec![fmt_f64(t)];
            for k in 0..self.positions.len() {
                row.push(fmt_f64(self.u_at_support[k][j]));
                row.push(fmt_f64(self.slope_jump[k][j]));
            }
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// [`solve_fd_coupled_with`] at the default Courant number 0.9.
pub fn solve_fd_coupled(
    cfg: &CableConfig,
    init: &InitialData,
    grid: &SamplingGrid,
) -> Result<(WaveField, InterfaceTrace)> {
    solve_fd_coupled_with(cfg, init, grid, &FdOptions::default())
}

struct SupportNode {
    index: usize,
    position: f64,
    snap: f64,
    sigma: f64,
}

fn snap_supports(cfg: &CableConfig, grid: &SamplingGrid) -> Result<Vec<SupportNode>> {
    let length = cfg.length();
    let dx = grid.dx(length);
    let nx = grid.nx();
    let mut nodes: Vec<SupportNode> = Vec::new();
    for s in cfg.supports() {
        let index = (s.position() / dx).round() as usize;
        let position = grid.x(index.min(nx - 1), length);
        let snap = (s.position() - position).abs();
        if snap > 0.5 * dx * (1.0 + 1e-12) {
            return Err(Error::Internal(format!(
                "support at {} snapped by {snap}, more than dx/2 = {}",
                s.position(),
                0.5 * dx
            )));
        }
        if index < 2 || index + 2 >= nx {
            return domain(format!(
                "support at {} needs two grid nodes on each side; refine the grid",
                s.position()
            ));
        }
        if nodes.last().is_some_and(|p| index <= p.index + 1) {
            return domain(format!(
                "supports near {} share or touch a grid node; refine the grid",
                s.position()
            ));
        }
        nodes.push(SupportNode { index, position, snap, sigma: s.sigma() });
    }
    Ok(nodes)
}

fn slope_jump(u: &[f64], i: usize, dx: f64) -> f64 {
    let left = (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * dx);
    let right = (-3.0 * u[i] + 4.0 * u[i + 1] - u[i + 2]) / (2.0 * dx);
    right - left
}

/// Leapfrog in time on `grid`'s nodes with a Taylor first step
/// `u¹ = φ + dt·ψ + (dt²/2)·a²φ″`.
///
/// The internal step is the output step divided into `substeps` pieces.
pub fn solve_fd_coupled_with(
    cfg: &CableConfig,
    init: &InitialData,
    grid: &SamplingGrid,
    opts: &FdOptions,
) -> Result<(WaveField, InterfaceTrace)> {
    let length = cfg.length();
    let nx = grid.nx();
    let dx = grid.dx(length);
    let a2 = cfg.wave_speed_sq();
    let a = cfg.wave_speed();
    let supports = snap_supports(cfg, grid)?;

    if !(opts.cfl > 0.0 && opts.cfl <= 1.0) {
        return Err(Error::Stability(format!("Courant number {} is outside (0, 1]", opts.cfl)));
    }
    let dt_out = grid.dt();
    let substeps = match opts.substeps {
        Some(0) => return domain("substeps must be at least 1"),
        Some(s) => s,
        None => (dt_out * a / (opts.cfl * dx)).ceil().max(1.0) as usize,
    };
    let dt = dt_out / substeps as f64;
    let courant = a * dt / dx;
    if courant > 1.0 {
        return Err(Error::Stability(format!("Courant number a·dt/dx = {courant} exceeds 1")));
    }
    let sigma_max = supports.iter().fold(0.0_f64, |m, s| m.max(s.sigma));
    let spectral_radius = 4.0 * a2 / (dx * dx) + a2 * sigma_max / dx;
    if dt * spectral_radius.sqrt() >= 2.0 {
        return Err(Error::Stability(format!(
            "step dt = {dt} violates dt < 2/sqrt(4a²/dx² + a²σ_max/dx) = {}",
            2.0 / spectral_radius.sqrt()
        )));
    }

    let mut penalty = vec![0.0; nx];
    for s in &supports {
        penalty[s.index] = a2 * s.sigma / dx;
    }
    let xs = grid.nodes(length);
    let h = dx / 16.0;
    let pin = |mut v: Vec<f64>| {
        v[0] = 0.0;
        v[nx - 1] = 0.0;
        v
    };
    let u0 = pin(xs.iter().map(|&x| init.phi.value(x)).collect());
    let v0 = pin(xs.iter().map(|&x| init.psi.value(x)).collect());
    let u1 = pin(
        xs.iter()
            .enumerate()
            .map(|(i, &x)| u0[i] + dt * v0[i] + 0.5 * dt * dt * a2 * init.phi.curvature(x, h))
            .collect(),
    );

    let c = a2 * dt * dt / (dx * dx);
    let step = |prev: &[f64], cur: &[f64], next: &mut [f64]| {
        for i in 1..nx - 1 {
            next[i] = 2.0 * cur[i] - prev[i] + c * (cur[i + 1] - 2.0 * cur[i] + cur[i - 1])
                - dt * dt * penalty[i] * cur[i];
        }
        next[0] = 0.0;
        next[nx - 1] = 0.0;
    };

    let nt = grid.nt();
    let total_steps = (nt - 1) * substeps;
    let mut u_out = Vec::with_capacity(nt * nx);
    let mut ut_out = Vec::with_capacity(nt * nx);
    u_out.extend_from_slice(&u0);
    ut_out.extend_from_slice(&v0);

    let every = opts.trace == TraceSampling::EveryStep;
    let mut times = Vec::new();
    let mut h_trace: Vec<Vec<f64>> = vec![Vec::new(); supports.len()];
    let mut jump_trace: Vec<Vec<f64>> = vec![Vec::new(); supports.len()];
    let mut record = |n: usize, u: &[f64]| {
        times.push(if n == total_steps { grid.horizon() } else { n as f64 * dt });
        for (k, s) in supports.iter().enumerate() {
            h_trace[k].push(u[s.index]);
            jump_trace[k].push(slope_jump(u, s.index, dx));
        }
    };
    record(0, &u0);

    let mut prev = u0;
    let mut cur = u1;
    let mut next = vec![0.0; nx];
    for n in 1..=total_steps {
        step(&prev, &cur, &mut next);
        if n % substeps == 0 {
            u_out.extend_from_slice(&cur);
            ut_out.extend(next.iter().zip(&prev).map(|(a, b)| (a - b) / (2.0 * dt)));
        }
        if every || n % substeps == 0 {
            record(n, &cur);
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }

    let field = WaveField::new(*grid, length, u_out, ut_out, MethodTag::FdCoupled)?;
    let trace = InterfaceTrace {
        times,
        positions: supports.iter().map(|s| s.position).collect(),
        snap_distance: supports.iter().map(|s| s.snap).collect(),
        sigma: supports.iter().map(|s| s.sigma).collect(),
        u_at_support: h_trace,
        slope_jump: jump_trace,
    };
    Ok((field, trace))
}
