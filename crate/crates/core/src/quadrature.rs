//! Composite quadrature with pairwise accumulation, so reductions do not
//! depend on evaluation order.

const PAIRWISE_BLOCK: usize = 32;

/// Pairwise (cascade) summation.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= PAIRWISE_BLOCK {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Arithmetic mean of `values`; zero for an empty slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        pairwise_sum(values) / values.len() as f64
    }
}

/// Composite Simpson rule on `[a, b]`; `panels` is rounded up to an even count.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let terms: Vec<f64> = (0..=n)
        .map(|i| {
            let x = if i == n { b } else { a + i as f64 * h };
            let w = if i == 0 || i == n {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * f(x)
        })
        .collect();
    pairwise_sum(&terms) * h / 3.0
}

/// Trapezoid rule for samples on a uniform grid of spacing `h`.
pub fn trapezoid_uniform(samples: &[f64], h: f64) -> f64 {
    match samples.len() {
        0 | 1 => 0.0,
        n => (pairwise_sum(&samples[1..n - 1]) + 0.5 * (samples[0] + samples[n - 1])) * h,
    }
}
