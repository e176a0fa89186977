//! Space-time samples of a solution and their on-disk forms.
//!
//! Binary layout (`.cwv`), all little-endian: the magic bytes `CWV1`, then
//! `nx: u64`, `nt: u64`, `method: u64`, `length: f64`, `horizon: f64`,
//! followed by `nt·nx` values of `u` and `nt·nx` values of `u_t`, row `j`
//! (time) major, node `i` minor.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::io::fmt_f64;
use crate::model::SamplingGrid;

const BOUNDARY_TOL: f64 = 1e-12;
const MAGIC: &[u8; 4] = b"CWV1";

/// Which solver produced a field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MethodTag {
    GalerkinExact,
    GalerkinLeapfrog,
    FdCoupled,
    SeriesClassical,
}

impl MethodTag {
    fn code(self) -> u64 {
        match self {
            MethodTag::GalerkinExact => 0,
            MethodTag::GalerkinLeapfrog => 1,
            MethodTag::FdCoupled => 2,
            MethodTag::SeriesClassical => 3,
        }
    }

    fn from_code(code: u64) -> Result<Self> {
        Ok(match code {
            0 => MethodTag::GalerkinExact,
            1 => MethodTag::GalerkinLeapfrog,
            2 => MethodTag::FdCoupled,
            3 => MethodTag::SeriesClassical,
            _ => return domain(format!("unknown method code {code} in field file")),
        })
    }
}

/// Sine-basis coefficients `d_j(t_n)` and rates `d_j′(t_n)`, one row per instant.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalTrajectory {
    pub coefficients: DMatrix<f64>,
    pub rates: DMatrix<f64>,
}

/// Time series at one off-grid position.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeTrace {
    pub x: f64,
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
}

/// `u` and `u_t` sampled on a [`SamplingGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    grid: SamplingGrid,
    length: f64,
    u: Vec<f64>,
    ut: Vec<f64>,
    method: MethodTag,
    modal: Option<ModalTrajectory>,
    probes: Vec<ProbeTrace>,
}

impl WaveField {
    /// Wraps row-major `nt×nx` arrays; the end columns must vanish to `1e-12`.
    pub fn new(
        grid: SamplingGrid,
        length: f64,
        u: Vec<f64>,
        ut: Vec<f64>,
        method: MethodTag,
    ) -> Result<Self> {
        let n = grid.nx() * grid.nt();
        if u.len() != n || ut.len() != n {
            return domain(format!(
                "field arrays hold {} and {} values, grid needs {n}",
                u.len(),
                ut.len()
            ));
        }
        let nx = grid.nx();
        for (j, row) in u.chunks(nx).enumerate() {
            if row[0].abs() > BOUNDARY_TOL || row[nx - 1].abs() > BOUNDARY_TOL {
                return Err(Error::Internal(format!(
                    "fixed-end condition violated at time index {j}: u = {}, {}",
                    row[0],
                    row[nx - 1]
                )));
            }
        }
        Ok(Self { grid, length, u, ut, method, modal: None, probes: Vec::new() })
    }

    pub fn with_modal(mut self, modal: ModalTrajectory) -> Self {
        self.modal = Some(modal);
        self
    }

    pub fn with_probes(mut self, probes: Vec<ProbeTrace>) -> Self {
        self.probes = probes;
        self
    }

    pub fn grid(&self) -> &SamplingGrid {
        &self.grid
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn method(&self) -> MethodTag {
        self.method
    }

    pub fn modal(&self) -> Option<&ModalTrajectory> {
        self.modal.as_ref()
    }

    pub fn probes(&self) -> &[ProbeTrace] {
        &self.probes
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn ut(&self) -> &[f64] {
        &self.ut
    }

    /// `u(·, t_j)` across all nodes.
    pub fn u_row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.u[j * nx..(j + 1) * nx]
    }

    pub fn ut_row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.ut[j * nx..(j + 1) * nx]
    }

    pub fn max_abs(&self) -> f64 {
        self.u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `field − other` on identical grids; modal data carries over when both have it.
    pub fn difference(&self, other: &WaveField) -> Result<WaveField> {
        if self.grid != other.grid || self.length != other.length {
            return domain("fields live on different grids");
        }
        let u = self.u.iter().zip(&other.u).map(|(a, b)| a - b).collect();
        let ut = self.ut.iter().zip(&other.ut).map(|(a, b)| a - b).collect();
        let modal = match (&self.modal, &other.modal) {
            (Some(a), Some(b)) if a.coefficients.shape() == b.coefficients.shape() => {
                Some(ModalTrajectory {
                    coefficients: &a.coefficients - &b.coefficients,
                    rates: &a.rates - &b.rates,
                })
            }
            _ => None,
        };
        Ok(WaveField {
            grid: self.grid,
            length: self.length,
            u,
            ut,
            method: self.method,
            modal,
            probes: Vec::new(),
        })
    }

    /// Writes `t,x,u,u_t` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,u,u_t")?;
        let nx = self.grid.nx();
        for j in 0..self.grid.nt() {
            let t = fmt_f64(self.grid.t(j));
            for i in 0..nx {
                let k = j * nx + i;
                writeln!(
                    w,
                    "{t},{},{},{}",
                    fmt_f64(self.grid.x(i, self.length)),
                    fmt_f64(self.u[k]),
                    fmt_f64(self.ut[k])
                )?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Writes the compact binary block described in the module docs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.grid.nx() as u64).to_le_bytes())?;
        w.write_all(&(self.grid.nt() as u64).to_le_bytes())?;
        w.write_all(&self.method.code().to_le_bytes())?;
        w.write_all(&self.length.to_le_bytes())?;
        w.write_all(&self.grid.horizon().to_le_bytes())?;
        for v in self.u.iter().chain(&self.ut) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<WaveField> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return domain("not a CWV1 field file");
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let nx = u64::from_le_bytes(next(&mut r)?) as usize;
        let nt = u64::from_le_bytes(next(&mut r)?) as usize;
        let method = MethodTag::from_code(u64::from_le_bytes(next(&mut r)?))?;
        let length = f64::from_le_bytes(next(&mut r)?);
        let horizon = f64::from_le_bytes(next(&mut r)?);
        let grid = SamplingGrid::new(nx, nt, horizon)?;
        let n = nx * nt;
        let mut values = Vec::with_capacity(2 * n);
        for _ in 0..2 * n {
            values.push(f64::from_le_bytes(next(&mut r)?));
        }
        let ut = values.split_off(n);
        WaveField::new(grid, length, values, ut, method)
    }
}

/// Bilinear interpolation of `(u, u_t)`; exact at nodes.
pub fn evaluate_solution(field: &WaveField, x: f64, t: f64) -> Result<(f64, f64)> {
    let grid = field.grid();
    let length = field.length();
    if !(0.0..=length).contains(&x) || !(0.0..=grid.horizon()).contains(&t) {
        return domain(format!("({x}, {t}) lies outside [0, {length}] × [0, {}]", grid.horizon()));
    }
    let (i0, wx) = cell(x / grid.dx(length), grid.nx());
    let (j0, wt) = cell(t / grid.dt(), grid.nt());
    let nx = grid.nx();
    let blend = |a: &[f64]| {
        let at = |j: usize, i: usize| a[j * nx + i];
        let lower = at(j0, i0) * (1.0 - wx) + at(j0, i0 + 1) * wx;
        let upper = at(j0 + 1, i0) * (1.0 - wx) + at(j0 + 1, i0 + 1) * wx;
        if wt == 0.0 {
            lower
        } else {
            lower * (1.0 - wt) + upper * wt
        }
    };
    let exact = |a: &[f64]| {
        if wx == 0.0 && wt == 0.0 {
            Some(a[j0 * nx + i0])
        } else {
            None
        }
    };
    let u = exact(field.u()).unwrap_or_else(|| blend(field.u()));
    let ut = exact(field.ut()).unwrap_or_else(|| blend(field.ut()));
    Ok((u, ut))
}

/// Cell index and local weight for fractional position `s` among `n` nodes.
fn cell(s: f64, n: usize) -> (usize, f64) {
    let nearest = s.round();
    if (s - nearest).abs() <= 1e-12 * s.abs().max(1.0) {
        let i = (nearest as usize).min(n - 1);
        return if i == n - 1 { (n - 2, 1.0) } else { (i, 0.0) };
    }
    let i = (s.floor() as usize).min(n - 2);
    (i, s - i as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_field() -> WaveField {
        let grid = SamplingGrid::new(5, 3, 2.0).unwrap();
        let length = 4.0;
        let mut u = Vec::new();
        let mut ut = Vec::new();
        for j in 0..3 {
            for i in 0..5 {
                let x = i as f64;
                let bump = x * (4.0 - x);
                u.push(bump * (1.0 + j as f64));
                ut.push(bump);
            }
        }
        WaveField::new(grid, length, u, ut, MethodTag::FdCoupled).unwrap()
    }

    #[test]
    fn node_queries_are_exact() {
        let f = linear_field();
        let (u, ut) = evaluate_solution(&f, 1.0, 1.0).unwrap();
        assert_eq!(u, 6.0);
        assert_eq!(ut, 3.0);
        let (u, _) = evaluate_solution(&f, 4.0, 2.0).unwrap();
        assert_eq!(u, 0.0);
    }

    #[test]
    fn midpoint_is_mean() {
        let f = linear_field();
        let (u, _) = evaluate_solution(&f, 1.0, 0.5).unwrap();
        assert_eq!(u, 0.5 * (3.0 + 6.0));
        let (u, _) = evaluate_solution(&f, 1.5, 0.0).unwrap();
        assert_eq!(u, 0.5 * (3.0 + 4.0));
    }

    #[test]
    fn out_of_bounds_is_domain_error() {
        let f = linear_field();
        assert!(matches!(evaluate_solution(&f, -0.1, 0.0), Err(Error::Domain(_))));
        assert!(matches!(evaluate_solution(&f, 1.0, 2.5), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_violation_rejected() {
        let grid = SamplingGrid::new(3, 2, 1.0).unwrap();
        let u = vec![0.0, 1.0, 1e-9, 0.0, 0.0, 0.0];
        let r = WaveField::new(grid, 1.0, u, vec![0.0; 6], MethodTag::FdCoupled);
        assert!(matches!(r, Err(Error::Internal(_))));
    }

    #[test]
    fn binary_round_trip() {
        let f = linear_field();
        let mut buf = Vec::new();
        f.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"CWV1");
        let g = WaveField::read_binary(buf.as_slice()).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let f = linear_field();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 15);
        assert!(text.starts_with("t,x,u,u_t\n"));
    }
}
