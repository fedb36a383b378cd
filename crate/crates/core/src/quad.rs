//! Uniform-grid helpers.

/// Trapezoid rule over samples spaced `step` apart.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            step * (interior + 0.5 * (values[0] + values[n - 1]))
        }
    }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| lo + step * i as f64).collect()
        }
    }
}

/// `n` phases covering `[0, 2π)` with step `2π/n`.
pub fn phase_axis(n: usize) -> Vec<f64> {
    let step = std::f64::consts::TAU / n as f64;
    (0..n).map(|i| step * i as f64).collect()
}

/// Returns the common spacing if `axis` is strictly increasing and uniform.
pub fn uniform_step(axis: &[f64]) -> Option<f64> {
    if axis.len() < 2 {
        return None;
    }
    let step = (axis[axis.len() - 1] - axis[0]) / (axis.len() - 1) as f64;
    if !(step > 0.0) {
        return None;
    }
    let uniform = axis.windows(2).all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.max(1.0));
    uniform.then_some(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trapezoid_gaussian() {
        let xs = linspace(-10.0, 10.0, 2001);
        let ys: Vec<f64> = xs.iter().map(|x| (-x * x).exp()).collect();
        let got = trapezoid(&ys, xs[1] - xs[0]);
        assert!((got - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn uniform_detection() {
        assert!(uniform_step(&linspace(-8.0, 8.0, 321)).is_some());
        assert!(uniform_step(&[0.0, 1.0, 3.0]).is_none());
        assert!(uniform_step(&[1.0, 0.0]).is_none());
        assert!(uniform_step(&[1.0]).is_none());
    }
}
