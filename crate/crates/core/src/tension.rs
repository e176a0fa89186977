//! Natural frequencies and tension identification.
//!
//! For a single support at `l` the mode ansatz `A·sin(kx)` on `(0, l)`,
//! `B·sin(k(L − x))` on `(l, L)` with continuity and the slope jump `σu(l)`
//! gives the characteristic function `D(k) = k·sin(kL) + σ·sin(kl)·sin(k(L − l))`.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::galerkin::{assemble_bilinear_form, modal_frequencies};
use crate::model::{CableConfig, DiracConvention};

/// How a spectrum was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpectrumMethod {
    EigenGalerkin,
    CharacteristicRoot,
    DftPeak,
}

/// Positive, nondecreasing frequencies in Hz.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySpectrum {
    frequencies_hz: Vec<f64>,
    method: SpectrumMethod,
    resolution_hz: f64,
}

impl FrequencySpectrum {
    pub fn new(frequencies_hz: Vec<f64>, method: SpectrumMethod, resolution_hz: f64) -> Result<Self> {
        if frequencies_hz.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
            return domain("frequencies must be positive and finite");
        }
        if frequencies_hz.windows(2).any(|w| w[1] < w[0]) {
            return domain("frequencies must be nondecreasing");
        }
        if !(resolution_hz > 0.0) {
            return domain(format!("resolution must be positive, got {resolution_hz}"));
        }
        Ok(Self { frequencies_hz, method, resolution_hz })
    }

    /// A measured spectrum; the values are sorted before validation.
    pub fn measured(mut frequencies_hz: Vec<f64>) -> Result<Self> {
        frequencies_hz.sort_by(f64::total_cmp);
        Self::new(frequencies_hz, SpectrumMethod::DftPeak, f64::MIN_POSITIVE)
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    pub fn method(&self) -> SpectrumMethod {
        self.method
    }

    pub fn resolution_hz(&self) -> f64 {
        self.resolution_hz
    }

    pub fn len(&self) -> usize {
        self.frequencies_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies_hz.is_empty()
    }
}

fn single_support_params(cfg: &CableConfig) -> Result<(f64, f64, f64)> {
    let length = cfg.length();
    match cfg.supports() {
        [] => Ok((length, length / 2.0, 0.0)),
        [s] => Ok((length, s.position(), s.sigma())),
        _ => Err(Error::Capability(
            "the characteristic equation covers one support; use the Galerkin eigen-solve".into(),
        )),
    }
}

fn d_of_k(k: f64, length: f64, l: f64, sigma: f64) -> f64 {
    k * (k * length).sin() + sigma * (k * l).sin() * (k * (length - l)).sin()
}

/// `D(k) = k·sin(kL) + σ·sin(kl)·sin(k(L − l))`; no support means `σ = 0`.
pub fn characteristic_value(k: f64, cfg: &CableConfig) -> Result<f64> {
    if !(k > 0.0) {
        return domain(format!("wavenumber must be positive, got {k}"));
    }
    let (length, l, sigma) = single_support_params(cfg)?;
    Ok(d_of_k(k, length, l, sigma))
}

/// Outcome of a characteristic-root scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootScan {
    pub spectrum: FrequencySpectrum,
    /// Requested roots not found below `k_max`.
    pub shortfall: usize,
    /// Sign changes of `D` between consecutive scan points.
    pub grid_sign_changes: usize,
    /// Root pairs found inside one scan cell by the curvature check.
    pub paired_roots: usize,
}

/// Scans `D` on a grid of step `π/(8L)` up to `k_max`, bisects each bracket
/// to `|Δk| ≤ 1e-12·k`, and resolves root pairs hidden inside one cell.
pub fn characteristic_roots(cfg: &CableConfig, count: usize, k_max: f64) -> Result<RootScan> {
    let (length, l, sigma) = single_support_params(cfg)?;
    let step = PI / (8.0 * length);
    if !(k_max > step) {
        return domain(format!("k_max = {k_max} is below the scan step {step}"));
    }
    let d = |k: f64| d_of_k(k, length, l, sigma);
    let n = ((k_max / step) - 0.5).floor() as usize + 1;
    let ks: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * step).collect();
    let ds: Vec<f64> = ks.iter().map(|&k| d(k)).collect();

    let mut roots = Vec::new();
    let mut grid_sign_changes = 0;
    let mut paired_roots = 0;
    for i in 0..n.saturating_sub(1) {
        if ds[i] == 0.0 {
            roots.push(ks[i]);
            grid_sign_changes += 1;
            continue;
        }
        if ds[i] * ds[i + 1] < 0.0 {
            roots.push(bisect(&d, ks[i], ks[i + 1]));
            grid_sign_changes += 1;
        }
    }
    for i in 1..n.saturating_sub(1) {
        let (dm, d0, dp) = (ds[i - 1], ds[i], ds[i + 1]);
        let same_sign = dm * d0 > 0.0 && d0 * dp > 0.0;
        if !(same_sign && d0.abs() < dm.abs() && d0.abs() <= dp.abs()) {
            continue;
        }
        let s = d0.signum();
        let (k_star, v_star) = golden_min(|k| s * d(k), ks[i - 1], ks[i + 1], 100);
        if v_star < 0.0 {
            roots.push(bisect(&d, ks[i - 1], k_star));
            roots.push(bisect(&d, k_star, ks[i + 1]));
            paired_roots += 1;
        } else if v_star <= 1e-9 * dm.abs().max(dp.abs()) {
            roots.push(k_star);
            roots.push(k_star);
            paired_roots += 1;
        }
    }
    roots.sort_by(f64::total_cmp);
    let shortfall = count.saturating_sub(roots.len());
    roots.truncate(count);
    let a = cfg.wave_speed();
    let freqs = roots.iter().map(|k| a * k / (2.0 * PI)).collect();
    let spectrum =
        FrequencySpectrum::new(freqs, SpectrumMethod::CharacteristicRoot, a * 1e-12 * k_max / (2.0 * PI))?;
    Ok(RootScan { spectrum, shortfall, grid_sign_changes, paired_roots })
}

/// Lowest `count` characteristic frequencies, scanning just far enough.
///
/// Interlacing bounds the n-th root by `(n + 1)π/L`.
pub fn characteristic_frequencies(cfg: &CableConfig, count: usize) -> Result<FrequencySpectrum> {
    let k_max = (count as f64 + 1.5) * PI / cfg.length();
    let scan = characteristic_roots(cfg, count, k_max)?;
    if scan.shortfall > 0 {
        return Err(Error::Nonconvergence(format!(
            "found {} of {count} characteristic roots below k = {k_max}",
            count - scan.shortfall
        )));
    }
    Ok(scan.spectrum)
}

fn bisect(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo <= 1e-12 * lo {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    0.5 * (lo + hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimum of `f` on `[a, b]`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Peaks below this fraction of the largest are ignored.
const PEAK_FLOOR: f64 = 1e-6;

/// Frequencies of the `count` largest well-separated spectral peaks of `trace`.
///
/// The mean is removed, a periodic Hann window applied, and each peak refined
/// by a parabola through the log-magnitudes of its bin and both neighbours.
/// Fewer peaks than requested are returned when the spectrum has fewer.
pub fn extract_peaks(trace: &[f64], dt: f64, count: usize) -> Result<FrequencySpectrum> {
    let n = trace.len();
    if n < 256 {
        return domain(format!("peak extraction needs at least 256 samples, got {n}"));
    }
    if !(dt > 0.0) {
        return domain(format!("sample spacing must be positive, got {dt}"));
    }
    let mean = crate::quadrature::mean(trace);
    let mut buf: Vec<Complex<f64>> = trace
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let w = 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos();
            Complex::new((v - mean) * w, 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    let mag: Vec<f64> = buf[..=half].iter().map(|c| c.norm()).collect();
    let top = mag[1..half].iter().cloned().fold(0.0, f64::max);

    let mut peaks: Vec<usize> = (2..half - 1)
        .filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1] && mag[k] > PEAK_FLOOR * top)
        .collect();
    peaks.sort_by(|&a, &b| mag[b].total_cmp(&mag[a]).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = Vec::new();
    for k in peaks {
        if chosen.len() == count {
            break;
        }
        if chosen.iter().all(|&c| c.abs_diff(k) >= 2) {
            chosen.push(k);
        }
    }
    let bin = 1.0 / (n as f64 * dt);
    let mut freqs: Vec<f64> = chosen
        .iter()
        .map(|&k| {
            let (a, b, c) = (mag[k - 1].ln(), mag[k].ln(), mag[k + 1].ln());
            let denom = a - 2.0 * b + c;
            let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            (k as f64 + delta) * bin
        })
        .collect();
    freqs.sort_by(f64::total_cmp);
    FrequencySpectrum::new(freqs, SpectrumMethod::DftPeak, bin)
}

/// What is known about the cable apart from its tension.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownCable {
    pub length: f64,
    pub density: f64,
    /// `(x_k, K_k)` pairs; stiffness in N/m, independent of tension.
    pub supports: Vec<(f64, f64)>,
    pub convention: DiracConvention,
}

impl KnownCable {
    pub fn from_config(cfg: &CableConfig) -> Self {
        Self {
            length: cfg.length(),
            density: cfg.density(),
            supports: cfg.supports().iter().map(|s| (s.position(), s.stiffness())).collect(),
            convention: cfg.convention(),
        }
    }

    pub fn config(&self, tension: f64) -> Result<CableConfig> {
        CableConfig::new(self.length, tension, self.density, &self.supports, self.convention)
    }

    /// Model frequencies of the listed 1-based modes at tension `tension`.
    pub fn frequencies(&self, tension: f64, modes: &[usize], galerkin_m: usize) -> Result<Vec<f64>> {
        let cfg = self.config(tension)?;
        let top = modes.iter().copied().max().unwrap_or(1);
        let spectrum = if cfg.supports().len() <= 1 {
            characteristic_frequencies(&cfg, top)?
        } else {
            modal_frequencies(&assemble_bilinear_form(&cfg, galerkin_m.max(top))?, top)?
        };
        Ok(modes.iter().map(|&i| spectrum.frequencies_hz()[i - 1]).collect())
    }
}

/// Search settings for [`invert_tension`].
#[derive(Debug, Clone, PartialEq)]
pub struct InversionOptions {
    pub bracket: (f64, f64),
    /// Galerkin order used when the cable has more than one support.
    pub galerkin_m: usize,
    /// Golden-section stops when the bracket is this small relative to its centre.
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl InversionOptions {
    pub fn with_bracket(lo: f64, hi: f64) -> Self {
        Self { bracket: (lo, hi), galerkin_m: 128, rel_tol: 1e-11, max_iter: 300 }
    }

    /// Bracket around the bare-string estimate `T₀ = ρ(2L f_i / n_i)²`.
    ///
    /// Supports only raise frequencies, so the truth lies below `T₀`.
    pub fn taut_string(measured: &FrequencySpectrum, modes: &[usize], known: &KnownCable) -> Self {
        let estimates: Vec<f64> = measured
            .frequencies_hz()
            .iter()
            .zip(modes)
            .map(|(f, &n)| known.density * (2.0 * known.length * f / n as f64).powi(2))
            .collect();
        let t0 = estimates.iter().cloned().fold(f64::MIN_POSITIVE, f64::max);
        Self::with_bracket(t0 / 16.0, 2.0 * t0)
    }
}

/// Least-squares tension fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TensionEstimate {
    pub tension_hat: f64,
    /// Root-mean-square frequency misfit in Hz.
    pub residual: f64,
    pub iterations: usize,
}

const SCAN_POINTS: usize = 33;

/// Minimizes `Σ(f_meas,i − f_model,i(T))²` over the bracket.
///
/// A coarse scan locates the basin, golden-section narrows it, and a final
/// parabolic step is kept only if it lowers the objective.
pub fn invert_tension(
    measured: &FrequencySpectrum,
    known: &KnownCable,
    mode_indices: &[usize],
    opts: &InversionOptions,
) -> Result<TensionEstimate> {
    let meas = measured.frequencies_hz();
    if meas.is_empty() {
        return domain("at least one measured frequency is required");
    }
    if mode_indices.len() != meas.len() || mode_indices.contains(&0) {
        return domain("mode indices must be 1-based and match the measured frequencies one to one");
    }
    let (lo, hi) = opts.bracket;
    if !(lo > 0.0 && hi > lo) {
        return domain(format!("tension bracket [{lo}, {hi}] must satisfy 0 < lo < hi"));
    }
    let objective = |t: f64| -> Result<f64> {
        let model = known.frequencies(t, mode_indices, opts.galerkin_m)?;
        let terms: Vec<f64> = meas.iter().zip(&model).map(|(a, b)| (a - b) * (a - b)).collect();
        Ok(crate::quadrature::pairwise_sum(&terms))
    };

    let ratio = (hi / lo).powf(1.0 / (SCAN_POINTS - 1) as f64);
    let ts: Vec<f64> = (0..SCAN_POINTS).map(|i| lo * ratio.powi(i as i32)).collect();
    let js = ts.iter().map(|&t| objective(t)).collect::<Result<Vec<f64>>>()?;
    let (best, jbest) = js
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &j)| (i, j))
        .expect("scan is nonempty");
    let jmax = js.iter().cloned().fold(0.0, f64::max);
    if jmax - jbest <= 1e-14 * jmax.max(f64::MIN_POSITIVE) {
        return Err(Error::Nonconvergence(format!(
            "objective is flat over [{lo}, {hi}] (min {jbest:e}, max {jmax:e})"
        )));
    }
    if best == 0 || best == SCAN_POINTS - 1 {
        return Err(Error::Nonconvergence(format!(
            "objective minimum lies at the bracket edge T = {} (J = {jbest:e}); widen the bracket",
            ts[best]
        )));
    }

    let (mut a, mut b) = (ts[best - 1], ts[best + 1]);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (objective(c)?, objective(d)?);
    let mut iterations = 0;
    while (b - a) > opts.rel_tol * 0.5 * (a + b) {
        if iterations == opts.max_iter {
            return Err(Error::Nonconvergence(format!(
                "golden-section search stopped after {iterations} iterations with bracket [{a}, {b}]"
            )));
        }
        iterations += 1;
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = objective(d)?;
        }
    }
    let (mut t_hat, mut j_hat) = if fc < fd { (c, fc) } else { (d, fd) };

    let (fa, fb) = (objective(a)?, objective(b)?);
    let (x0, x1, x2) = (a, t_hat, b);
    let (f0, f1, f2) = (fa, j_hat, fb);
    let denom = (x1 - x0) * (f1 - f2) - (x1 - x2) * (f1 - f0);
    if denom != 0.0 {
        let num = (x1 - x0).powi(2) * (f1 - f2) - (x1 - x2).powi(2) * (f1 - f0);
        let vertex = x1 - 0.5 * num / denom;
        if vertex > a && vertex < b {
            let jv = objective(vertex)?;
            if jv < j_hat {
                t_hat = vertex;
                j_hat = jv;
            }
        }
    }
    Ok(TensionEstimate {
        tension_hat: t_hat,
        residual: (j_hat / meas.len() as f64).sqrt(),
        iterations: iterations + 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(sigma: f64, l: f64) -> CableConfig {
        CableConfig::from_wave_speed(70.0, 67.344, 1.0, &[(l, sigma)], Default::default()).unwrap()
    }

    #[test]
    fn unsupported_zeros() {
        let c = cfg(0.0, 17.5);
        for m in 1..6 {
            let k = m as f64 * PI / 70.0;
            assert!(characteristic_value(k, &c).unwrap().abs() < 1e-13);
        }
    }

    #[test]
    fn midspan_antisymmetric_zero() {
        let c = cfg(3.0, 35.0);
        assert!(characteristic_value(2.0 * PI / 70.0, &c).unwrap().abs() < 1e-13);
    }

    #[test]
    fn multi_support_is_capability_error() {
        let c = CableConfig::from_wave_speed(70.0, 1.0, 1.0, &[(10.0, 1.0), (20.0, 1.0)], Default::default())
            .unwrap();
        assert!(matches!(characteristic_value(1.0, &c), Err(Error::Capability(_))));
        assert!(matches!(characteristic_value(-1.0, &cfg(1.0, 17.5)), Err(Error::Domain(_))));
    }

    #[test]
    fn unsupported_roots_in_hz() {
        let scan = characteristic_roots(&cfg(0.0, 17.5), 10, 11.5 * PI / 70.0).unwrap();
        assert_eq!(scan.shortfall, 0);
        for (k, f) in scan.spectrum.frequencies_hz().iter().enumerate() {
            let want = (k + 1) as f64 * 67.344 / 140.0;
            assert!((f - want).abs() <= 1e-10 * want, "{f} vs {want}");
        }
    }

    #[test]
    fn shortfall_reported() {
        let scan = characteristic_roots(&cfg(1.0, 17.5), 10, 3.2 * PI / 70.0).unwrap();
        // roots below 3.2*pi/L: 0.6298 Hz and 1.2574 Hz only
        assert_eq!(scan.shortfall, 8);
        assert_eq!(scan.spectrum.len(), 2);
    }

    #[test]
    fn spectrum_validation() {
        assert!(FrequencySpectrum::new(vec![1.0, 0.5], SpectrumMethod::DftPeak, 0.1).is_err());
        assert!(FrequencySpectrum::new(vec![0.0], SpectrumMethod::DftPeak, 0.1).is_err());
        assert!(FrequencySpectrum::new(vec![1.0], SpectrumMethod::DftPeak, 0.0).is_err());
    }

    #[test]
    fn on_bin_tone_is_exact() {
        let n = 1024;
        let dt = 0.01;
        let f0 = 37.0 / (n as f64 * dt);
        let trace: Vec<f64> = (0..n).map(|i| (2.0 * PI * f0 * i as f64 * dt).cos()).collect();
        let s = extract_peaks(&trace, dt, 1).unwrap();
        assert!((s.frequencies_hz()[0] - f0).abs() <= 1e-12 * f0);
    }

    #[test]
    fn off_bin_tones_within_tenth_bin() {
        let n = 2048;
        let dt = 0.02;
        let bin = 1.0 / (n as f64 * dt);
        for frac in [0.1, 0.25, 0.37, 0.5, 0.77] {
            let f0 = (40.0 + frac) * bin;
            let trace: Vec<f64> = (0..n).map(|i| (2.0 * PI * f0 * i as f64 * dt + 0.3).cos()).collect();
            let s = extract_peaks(&trace, dt, 1).unwrap();
            assert!((s.frequencies_hz()[0] - f0).abs() <= 0.1 * bin, "offset {frac}");
        }
    }

    #[test]
    fn short_trace_rejected() {
        assert!(extract_peaks(&[0.0; 100], 0.1, 1).is_err());
    }

    #[test]
    fn flat_objective_is_nonconvergence() {
        let known = KnownCable { length: 70.0, density: 1.0, supports: vec![], convention: Default::default() };
        let measured = FrequencySpectrum::measured(vec![0.48]).unwrap();
        let opts = InversionOptions::with_bracket(1.0, 2.0);
        assert!(matches!(invert_tension(&measured, &known, &[1], &opts), Err(Error::Nonconvergence(_))));
    }
}
