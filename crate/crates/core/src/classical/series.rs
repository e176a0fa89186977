//! Separated-variables series for one support, driven by a sampled `h(t)`.
//!
//! On each segment the lifted unknown `v = u − lift·h` satisfies the wave
//! equation with forcing `−lift·h″` and zero end values, so
//! `u = Σ_k [A_k cos ω_k t + B_k sin ω_k t + C_k ∫₀ᵗ h″(τ) sin ω_k(t − τ) dτ] sin(kπy/D) + lift·h(t)`
//! with `ω_k = kπa/D`. The left segment uses `y = x`, `D = l`, `lift = y/l`;
//! the right uses `y = x − l`, `D = L − l`, `lift = 1 − y/D`.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::io::fmt_f64;
use crate::model::{CableConfig, InitialData};
use crate::quadrature::{pairwise_sum, simpson};

/// One side of the support.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Segment {
    /// `(0, l)`.
    Left,
    /// `(l, L)`.
    Right,
}

#[derive(Debug, Clone, Copy)]
struct Geometry {
    length: f64,
    l: f64,
    a: f64,
    sigma: f64,
}

impl Geometry {
    fn from_config(cfg: &CableConfig) -> Result<Self> {
        let s = cfg.single_support().ok_or_else(|| {
            Error::Capability("the series solution covers exactly one support".into())
        })?;
        Ok(Self { length: cfg.length(), l: s.position(), a: cfg.wave_speed(), sigma: s.sigma() })
    }

    fn span(&self, seg: Segment) -> f64 {
        match seg {
            Segment::Left => self.l,
            Segment::Right => self.length - self.l,
        }
    }

    fn offset(&self, seg: Segment) -> f64 {
        match seg {
            Segment::Left => 0.0,
            Segment::Right => self.l,
        }
    }

    fn lift(&self, seg: Segment, y: f64) -> f64 {
        let d = self.span(seg);
        match seg {
            Segment::Left => y / d,
            Segment::Right => 1.0 - y / d,
        }
    }

    /// `∂/∂x sin(kπy/D)` at `x = l`, seen from `seg`.
    fn mode_slope_at_support(&self, seg: Segment, k: usize) -> f64 {
        let d = self.span(seg);
        let kk = k as f64 * PI / d;
        match seg {
            Segment::Left => {
                if k.is_multiple_of(2) {
                    kk
                } else {
                    -kk
                }
            }
            Segment::Right => kk,
        }
    }

    /// Closed form of `(2/(kπa))∫₀^D (−lift) sin(kπy/D) dy`.
    fn duhamel_weight(&self, seg: Segment, k: usize) -> f64 {
        let d = self.span(seg);
        let kp = k as f64 * PI;
        let base = -2.0 * d / (kp * kp * self.a);
        match seg {
            Segment::Left if k.is_multiple_of(2) => -base,
            _ => base,
        }
    }
}

fn panels_for(n_terms: usize) -> usize {
    (32 * n_terms).max(512)
}

fn coefficients(
    geo: &Geometry,
    init: &InitialData,
    h0: f64,
    hp0: f64,
    seg: Segment,
    n_terms: usize,
) -> (Vec<f64>, Vec<f64>) {
    let d = geo.span(seg);
    let off = geo.offset(seg);
    let panels = panels_for(n_terms);
    let a_k = (1..=n_terms)
        .map(|k| {
            let kk = k as f64 * PI / d;
            let f = |y: f64| (init.phi.value(off + y) - geo.lift(seg, y) * h0) * (kk * y).sin();
            2.0 / d * simpson(f, 0.0, d, panels)
        })
        .collect();
    let b_k = (1..=n_terms)
        .map(|k| {
            if init.psi.is_zero() && hp0 == 0.0 {
                return 0.0;
            }
            let kk = k as f64 * PI / d;
            let f = |y: f64| (init.psi.value(off + y) - geo.lift(seg, y) * hp0) * (kk * y).sin();
            2.0 / (k as f64 * PI * geo.a) * simpson(f, 0.0, d, panels)
        })
        .collect();
    (a_k, b_k)
}

/// `A_k = (2/D)∫(φ − lift·h(0)) sin(kπy/D)` and
/// `B_k = (2/(kπa))∫(ψ − lift·h′(0)) sin(kπy/D)` for `k = 1..=n_terms`.
///
/// Composite Simpson with 32 panels per retained mode (64 per wavelength).
pub fn fourier_coefficients(
    cfg: &CableConfig,
    init: &InitialData,
    h0: f64,
    hp0: f64,
    segment: Segment,
    n_terms: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if n_terms == 0 {
        return domain("n_terms must be at least 1");
    }
    let geo = Geometry::from_config(cfg)?;
    Ok(coefficients(&geo, init, h0, hp0, segment, n_terms))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct SegmentSeries {
    a_k: Vec<f64>,
    b_k: Vec<f64>,
    c_k: Vec<f64>,
    omega: Vec<f64>,
}

/// Truncated two-segment series with its driving support displacement.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    geo: Geometry,
    n_terms: usize,
    left: SegmentSeries,
    right: SegmentSeries,
    h_dt: f64,
    h: Vec<f64>,
    hp0: f64,
}

impl SeriesExpansion {
    /// Builds the series from `h` sampled at `t_j = j·h_dt`, `j ≥ 0`.
    ///
    /// `h` is interpolated linearly between samples; `h′(0)` comes from a
    /// one-sided second-order stencil.
    pub fn new(
        cfg: &CableConfig,
        init: &InitialData,
        h_samples: &[f64],
        h_dt: f64,
        n_terms: usize,
    ) -> Result<Self> {
        let geo = Geometry::from_config(cfg)?;
        if n_terms == 0 {
            return domain("n_terms must be at least 1");
        }
        if h_samples.len() < 5 {
            return domain(format!("need at least 5 h samples, got {}", h_samples.len()));
        }
        if !(h_dt > 0.0) {
            return domain(format!("h sample spacing must be positive, got {h_dt}"));
        }
        let h = h_samples;
        let hp0 = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * h_dt);

        let build = |seg: Segment| {
            let (a_k, b_k) = coefficients(&geo, init, h[0], hp0, seg, n_terms);
            let d = geo.span(seg);
            SegmentSeries {
                a_k,
                b_k,
                c_k: (1..=n_terms).map(|k| geo.duhamel_weight(seg, k)).collect(),
                omega: (1..=n_terms).map(|k| k as f64 * PI * geo.a / d).collect(),
            }
        };
        Ok(Self {
            left: build(Segment::Left),
            right: build(Segment::Right),
            geo,
            n_terms,
            h_dt,
            h: h.to_vec(),
            hp0,
        })
    }

    pub fn l(&self) -> f64 {
        self.geo.l
    }

    pub fn n_terms(&self) -> usize {
        self.n_terms
    }

    pub fn coefficients(&self, seg: Segment) -> (&[f64], &[f64]) {
        let s = self.series(seg);
        (&s.a_k, &s.b_k)
    }

    /// `h′(0)` estimated from the samples.
    pub fn h_prime_0(&self) -> f64 {
        self.hp0
    }

    /// Last instant covered by the `h` samples.
    pub fn coverage(&self) -> f64 {
        (self.h.len() - 1) as f64 * self.h_dt
    }

    fn series(&self, seg: Segment) -> &SegmentSeries {
        match seg {
            Segment::Left => &self.left,
            Segment::Right => &self.right,
        }
    }

    fn check_time(&self, t: f64) -> Result<()> {
        let end = self.coverage();
        if !(0.0..=end * (1.0 + 1e-12)).contains(&t) {
            return domain(format!("t = {t} lies outside the h coverage [0, {end}]"));
        }
        Ok(())
    }

    /// Linear interpolation of samples `s` at time `t`.
    fn sample(&self, s: &[f64], t: f64) -> f64 {
        let p = (t / self.h_dt).min((s.len() - 1) as f64);
        let j = (p.floor() as usize).min(s.len() - 2);
        let w = p - j as f64;
        s[j] * (1.0 - w) + s[j + 1] * w
    }

    pub fn h_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        Ok(self.sample(&self.h, t))
    }

    /// Time factors `T_k(t)` of every retained mode on `seg`.
    fn time_factors(&self, seg: Segment, t: f64) -> Vec<f64> {
        let s = self.series(seg);
        let duhamel = self.duhamel(seg, t);
        (0..self.n_terms)
            .map(|k| {
                let (sn, cs) = (s.omega[k] * t).sin_cos();
                s.a_k[k] * cs + s.b_k[k] * sn + s.c_k[k] * duhamel[k]
            })
            .collect()
    }

    /// `∫₀ᵗ h″(τ) sin(ω_k(t − τ)) dτ` for the piecewise-linear interpolant of
    /// the samples, integrated exactly.
    ///
    /// One integration by parts gives
    /// `−h′(0) sin ωt + Σ_j s_j [sin ω(t − t_j) − sin ω(t − min(t_{j+1}, t))]`
    /// with `s_j` the slope on panel `j`; no kernel is sampled, so modes with
    /// `ω·dt` of order one stay accurate.
    fn duhamel(&self, seg: Segment, t: f64) -> Vec<f64> {
        let s = self.series(seg);
        let last = self.h.len() - 1;
        let full = (((t / self.h_dt) * (1.0 + 1e-14)).floor() as usize).min(last);
        let panels = if full < last && t > full as f64 * self.h_dt { full + 1 } else { full };
        let slopes: Vec<f64> =
            (0..panels).map(|j| (self.h[j + 1] - self.h[j]) / self.h_dt).collect();
        let mut terms = vec![0.0; panels];
        s.omega
            .iter()
            .map(|&w| {
                for (j, term) in terms.iter_mut().enumerate() {
                    let start = (w * (t - j as f64 * self.h_dt)).sin();
                    let end = (w * (t - ((j + 1) as f64 * self.h_dt).min(t))).sin();
                    *term = slopes[j] * (start - end);
                }
                pairwise_sum(&terms) - self.hp0 * (w * t).sin()
            })
            .collect()
    }

    /// `u(x, t)` for every `x` in `xs` at one instant.
    pub fn evaluate_at_time(&self, t: f64, xs: &[f64]) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let length = self.geo.length;
        if let Some(x) = xs.iter().find(|x| !(0.0..=length).contains(*x)) {
            return domain(format!("x = {x} lies outside [0, {length}]"));
        }
        let h_t = self.sample(&self.h, t);
        let left = self.time_factors(Segment::Left, t);
        let right = self.time_factors(Segment::Right, t);
        let mut terms = vec![0.0; self.n_terms];
        Ok(xs
            .iter()
            .map(|&x| {
                if x == 0.0 || x == length {
                    return 0.0;
                }
                if x == self.geo.l {
                    return h_t;
                }
                let (seg, factors) =
                    if x < self.geo.l { (Segment::Left, &left) } else { (Segment::Right, &right) };
                let y = x - self.geo.offset(seg);
                let kk = PI / self.geo.span(seg);
                for (k, term) in terms.iter_mut().enumerate() {
                    *term = factors[k] * ((k + 1) as f64 * kk * y).sin();
                }
                pairwise_sum(&terms) + self.geo.lift(seg, y) * h_t
            })
            .collect())
    }

    /// One branch of the series at `x = l`, for continuity checks.
    pub fn branch_at_support(&self, seg: Segment, t: f64) -> Result<f64> {
        self.check_time(t)?;
        let factors = self.time_factors(seg, t);
        let d = self.geo.span(seg);
        let y = match seg {
            Segment::Left => d,
            Segment::Right => 0.0,
        };
        let kk = PI / d;
        let terms: Vec<f64> =
            factors.iter().enumerate().map(|(k, f)| f * ((k + 1) as f64 * kk * y).sin()).collect();
        Ok(pairwise_sum(&terms) + self.geo.lift(seg, y) * self.sample(&self.h, t))
    }

    /// Writes `k, A_left, B_left, A_right, B_right` rows.
    pub fn write_coefficients_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,A_left,B_left,A_right,B_right")?;
        for k in 0..self.n_terms {
            writeln!(
                w,
                "{},{},{},{},{}",
                k + 1,
                fmt_f64(self.left.a_k[k]),
                fmt_f64(self.left.b_k[k]),
                fmt_f64(self.right.a_k[k]),
                fmt_f64(self.right.b_k[k])
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// `u(x, t)` from the two-branch series; `x = l` returns `h(t)`.
pub fn evaluate_series_solution(exp: &SeriesExpansion, x: f64, t: f64) -> Result<f64> {
    Ok(exp.evaluate_at_time(t, &[x])?[0])
}

/// `−u_x(l−, t) + u_x(l+, t) − σh(t)` with every series truncated at `n_terms`.
pub fn h_consistency_residual(exp: &SeriesExpansion, t: f64) -> Result<f64> {
    exp.check_time(t)?;
    let geo = &exp.geo;
    let h_t = exp.sample(&exp.h, t);
    let slope = |seg: Segment| {
        let terms: Vec<f64> = exp
            .time_factors(seg, t)
            .iter()
            .enumerate()
            .map(|(k, f)| f * geo.mode_slope_at_support(seg, k + 1))
            .collect();
        pairwise_sum(&terms)
    };
    let left = slope(Segment::Left) + h_t / geo.l;
    let right = slope(Segment::Right) - h_t / geo.span(Segment::Right);
    Ok(-left + right - geo.sigma * h_t)
}

/// Left side of the `t = 0` compatibility relation:
/// `−Σ A^L_k (−1)^k kπ/l + Σ A^R_k kπ/(L − l) − h(0)/l − h(0)/(L − l)`.
pub fn initial_compatibility_residual(
    cfg: &CableConfig,
    init: &InitialData,
    h0: f64,
    n_terms: usize,
) -> Result<f64> {
    if n_terms == 0 {
        return domain("n_terms must be at least 1");
    }
    let geo = Geometry::from_config(cfg)?;
    let series = |seg: Segment| {
        let (a_k, _) = coefficients(&geo, init, h0, 0.0, seg, n_terms);
        let terms: Vec<f64> =
            a_k.iter().enumerate().map(|(k, a)| a * geo.mode_slope_at_support(seg, k + 1)).collect();
        pairwise_sum(&terms)
    };
    Ok(-series(Segment::Left) + series(Segment::Right) - h0 / geo.l - h0 / geo.span(Segment::Right))
}

/// Residual of the compatibility relation across truncation orders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilitySweep {
    pub n_terms: Vec<usize>,
    pub residual: Vec<f64>,
    /// `|r(n_{i+1}) − r(n_i)|`.
    pub cauchy_difference: Vec<f64>,
}

pub fn compatibility_sweep(
    cfg: &CableConfig,
    init: &InitialData,
    h0: f64,
    n_terms: &[usize],
) -> Result<CompatibilitySweep> {
    let residual = n_terms
        .iter()
        .map(|&n| initial_compatibility_residual(cfg, init, h0, n))
        .collect::<Result<Vec<f64>>>()?;
    let cauchy_difference = residual.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    Ok(CompatibilitySweep { n_terms: n_terms.to_vec(), residual, cauchy_difference })
}

/// Value conditions on the shifted data of each segment (reported, never enforced).
///
/// With `h(0) = φ(l)` and `h′(0) = ψ(l)`, the shifted data
/// `φ_i = φ − lift·h(0)`, `ψ_i = ψ − lift·h′(0)` should vanish at both segment
/// ends, and `φ_i″ = φ″` should vanish there too.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompatibilityFlags {
    pub left_phi_ends: bool,
    pub left_phi_curvature_ends: bool,
    pub left_psi_ends: bool,
    pub right_phi_ends: bool,
    pub right_phi_curvature_ends: bool,
    pub right_psi_ends: bool,
    pub all_satisfied: bool,
}

pub fn compatibility_flags(cfg: &CableConfig, init: &InitialData, dx: f64) -> Result<CompatibilityFlags> {
    let geo = Geometry::from_config(cfg)?;
    let tol = 1e-10;
    let h = dx / 16.0;
    let h0 = init.phi.value(geo.l);
    let hp0 = init.psi.value(geo.l);
    let vanish = |vals: [f64; 2]| vals.iter().all(|v| v.abs() <= tol);
    let ends = |seg: Segment| [geo.offset(seg), geo.offset(seg) + geo.span(seg)];
    let check = |seg: Segment| {
        let [x0, x1] = ends(seg);
        let shifted_phi = |x: f64| init.phi.value(x) - geo.lift(seg, x - x0) * h0;
        let shifted_psi = |x: f64| init.psi.value(x) - geo.lift(seg, x - x0) * hp0;
        (
            vanish([shifted_phi(x0), shifted_phi(x1)]),
            vanish([init.phi.curvature(x0, h), init.phi.curvature(x1, h)]),
            vanish([shifted_psi(x0), shifted_psi(x1)]),
        )
    };
    let (lp, lc, ls) = check(Segment::Left);
    let (rp, rc, rs) = check(Segment::Right);
    Ok(CompatibilityFlags {
        left_phi_ends: lp,
        left_phi_curvature_ends: lc,
        left_psi_ends: ls,
        right_phi_ends: rp,
        right_phi_curvature_ends: rc,
        right_psi_ends: rs,
        all_satisfied: lp && lc && ls && rp && rc && rs,
    })
}
