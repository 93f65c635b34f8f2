//! Small fixed-rule quadratures used by the oracle checks.

/// Composite Simpson rule on `[a, b]` with `intervals` subintervals (rounded
/// up to an even count).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Trapezoid rule for a periodic integrand sampled at `n` equispaced points
/// over one period of length `period` (the endpoint is not repeated).
pub fn periodic_trapezoid(samples: &[f64], period: f64) -> f64 {
    let dx = period / samples.len() as f64;
    samples.iter().sum::<f64>() * dx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 6);
        // antiderivative x^4/4 - x^2 + x on [-1, 2]
        let exact = (4.0 - 4.0 + 2.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_integrates_trig_polynomials_exactly() {
        let n = 32;
        let l = 1.5;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let x = -l + 2.0 * l * i as f64 / n as f64;
                2.0 + (std::f64::consts::PI * x / l).cos()
            })
            .collect();
        assert!((periodic_trapezoid(&samples, 2.0 * l) - 4.0 * l).abs() < 1e-13);
    }
}
