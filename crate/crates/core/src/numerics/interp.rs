//! Interpolation and differentiation of node data along a parameter axis.

use std::f64::consts::PI;

use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Weights of the five-point Lagrange interpolant on a uniform grid.
///
/// `x` is measured in units of the node spacing from the first of the
/// five stencil nodes. Returns (value weights, derivative weights per unit x).
fn lagrange5(x: f64) -> ([f64; 5], [f64; 5]) {
    let mut w = [0.0; 5];
    let mut dw = [0.0; 5];
    for j in 0..5 {
        let xj = j as f64;
        let mut denom = 1.0;
        for m in 0..5 {
            if m != j {
                denom *= xj - m as f64;
            }
        }
        let mut num = 1.0;
        for m in 0..5 {
            if m != j {
                num *= x - m as f64;
            }
        }
        let mut dnum = 0.0;
        for skip in 0..5 {
            if skip == j {
                continue;
            }
            let mut prod = 1.0;
            for m in 0..5 {
                if m != j && m != skip {
                    prod *= x - m as f64;
                }
            }
            dnum += prod;
        }
        w[j] = num / denom;
        dw[j] = dnum / denom;
    }
    (w, dw)
}

/// Local five-point stencil on `count` uniform nodes `start + i h`.
///
/// Returns the first stencil node index and the weights for the value and
/// the derivative at `t`. The window is centred where possible and shifted
/// to one side near the ends, giving the standard fourth-order central and
/// one-sided difference formulas at the nodes.
pub fn uniform_stencil(start: f64, h: f64, count: usize, t: f64) -> (usize, [f64; 5], [f64; 5]) {
    debug_assert!(count >= 5);
    let s = (t - start) / h;
    let nearest = s.round().clamp(0.0, (count - 1) as f64) as usize;
    let first = nearest.saturating_sub(2).min(count - 5);
    let (w, dw) = lagrange5(s - first as f64);
    let mut dw_t = [0.0; 5];
    for j in 0..5 {
        dw_t[j] = dw[j] / h;
    }
    (first, w, dw_t)
}

/// Trigonometric interpolant of periodic node data on `[0, 2 pi)`.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    // modes m = -n/2 .. n/2-1, natural order
    modes: Vec<Complex64>,
}

impl TrigInterpolant {
    /// Node data at `t_j = 2 pi j / n` (n even).
    pub fn new(values: &[Complex64]) -> Self {
        let n = values.len();
        let half = (n / 2) as i64;
        let modes = (-half..half)
            .map(|m| {
                values
                    .iter()
                    .enumerate()
                    .map(|(j, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (m * j as i64) as f64 / n as f64))
                    .sum::<Complex64>()
                    / n as f64
            })
            .collect();
        Self { modes }
    }

    fn half(&self) -> i64 {
        (self.modes.len() / 2) as i64
    }

    pub fn value(&self, t: f64) -> Complex64 {
        let half = self.half();
        let mut acc = ZERO;
        for (i, c) in self.modes.iter().enumerate() {
            let m = i as i64 - half;
            // the Nyquist mode is split symmetrically so real data stays real
            if m == -half {
                acc += c * (m as f64 * t).cos();
            } else {
                acc += c * Complex64::from_polar(1.0, m as f64 * t);
            }
        }
        acc
    }

    /// Derivative with the Nyquist mode dropped.
    pub fn derivative(&self, t: f64) -> Complex64 {
        let half = self.half();
        let mut acc = ZERO;
        for (i, c) in self.modes.iter().enumerate() {
            let m = i as i64 - half;
            if m == -half {
                continue;
            }
            acc += c * Complex64::new(0.0, m as f64) * Complex64::from_polar(1.0, m as f64 * t);
        }
        acc
    }
}

/// Natural cubic spline through complex values at uniform `s_j = j / (n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    values: Vec<Complex64>,
    second: Vec<Complex64>,
}

impl CubicSpline {
    pub fn new(values: Vec<Complex64>) -> Self {
        let n = values.len();
        let mut second = vec![ZERO; n];
        if n > 2 {
            let h = 1.0 / (n - 1) as f64;
            // Thomas algorithm for the interior second derivatives
            let m = n - 2;
            let mut diag = vec![4.0; m];
            let mut rhs: Vec<Complex64> = (1..n - 1)
                .map(|j| (values[j + 1] - 2.0 * values[j] + values[j - 1]) * (6.0 / (h * h)))
                .collect();
            for i in 1..m {
                let factor = 1.0 / diag[i - 1];
                diag[i] -= factor;
                let prev = rhs[i - 1];
                rhs[i] -= prev * factor;
            }
            let mut sol = vec![ZERO; m];
            sol[m - 1] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                sol[i] = (rhs[i] - sol[i + 1]) / diag[i];
            }
            second[1..n - 1].copy_from_slice(&sol);
        }
        Self { values, second }
    }

    pub fn knots(&self) -> &[Complex64] {
        &self.values
    }

    fn locate(&self, s: f64) -> (usize, f64, f64) {
        let n = self.values.len();
        let h = 1.0 / (n - 1) as f64;
        let j = ((s / h).floor().max(0.0) as usize).min(n - 2);
        (j, s - j as f64 * h, h)
    }

    /// Value and derivative at `s` (linear extrapolation outside [0, 1]).
    pub fn eval(&self, s: f64) -> (Complex64, Complex64) {
        let (j, x, h) = self.locate(s);
        let (y0, y1) = (self.values[j], self.values[j + 1]);
        let (m0, m1) = (self.second[j], self.second[j + 1]);
        let a = h - x;
        let value = m0 * (a * a * a / (6.0 * h))
            + m1 * (x * x * x / (6.0 * h))
            + (y0 / h - m0 * (h / 6.0)) * a
            + (y1 / h - m1 * (h / 6.0)) * x;
        let deriv = m0 * (-a * a / (2.0 * h)) + m1 * (x * x / (2.0 * h)) - (y0 / h - m0 * (h / 6.0))
            + (y1 / h - m1 * (h / 6.0));
        (value, deriv)
    }
}

/// Sixth-order central difference weights for offsets +-1, +-2, +-3.
pub const CENTRAL6: [(f64, f64); 3] = [(1.0, 3.0 / 4.0), (2.0, -3.0 / 20.0), (3.0, 1.0 / 60.0)];

/// Sixth-order central derivative of a vector-valued function at `t`.
pub fn central_derivative(f: impl Fn(f64) -> Vec<Complex64>, t: f64, h: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::new();
    for (k, w) in CENTRAL6 {
        let plus = f(t + k * h);
        let minus = f(t - k * h);
        if out.len() < plus.len().max(minus.len()) {
            out.resize(plus.len().max(minus.len()), ZERO);
        }
        for (i, v) in plus.iter().enumerate() {
            out[i] += v * (w / h);
        }
        for (i, v) in minus.iter().enumerate() {
            out[i] -= v * (w / h);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_reproduces_quartics() {
        let f = |t: f64| 1.0 - 2.0 * t + 0.5 * t.powi(3) + 0.1 * t.powi(4);
        let df = |t: f64| -2.0 + 1.5 * t * t + 0.4 * t.powi(3);
        let (start, h, count) = (0.0, 0.1, 11);
        let nodes: Vec<f64> = (0..count).map(|i| f(start + h * i as f64)).collect();
        for &t in &[0.0, 0.03, 0.37, 0.55, 0.99, 1.0] {
            let (first, w, dw) = uniform_stencil(start, h, count, t);
            let v: f64 = (0..5).map(|j| w[j] * nodes[first + j]).sum();
            let d: f64 = (0..5).map(|j| dw[j] * nodes[first + j]).sum();
            assert!((v - f(t)).abs() < 1e-12, "t={t}");
            assert!((d - df(t)).abs() < 1e-10, "t={t}");
        }
    }

    #[test]
    fn central_stencil_at_nodes_is_standard() {
        // interior node: weights (1, -8, 0, 8, -1) / 12h
        let (first, _, dw) = uniform_stencil(0.0, 1.0, 10, 5.0);
        assert_eq!(first, 3);
        let expect = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for j in 0..5 {
            assert!((dw[j] - expect[j]).abs() < 1e-14);
        }
    }

    #[test]
    fn trig_interpolant_is_exact_for_bandlimited() {
        let n = 16;
        let f = |t: f64| Complex64::from_polar(2.0, 3.0 * t) + Complex64::new(0.5, 0.0);
        let vals: Vec<_> = (0..n).map(|j| f(2.0 * PI * j as f64 / n as f64)).collect();
        let ip = TrigInterpolant::new(&vals);
        for &t in &[0.1, 1.3, 4.0] {
            assert!((ip.value(t) - f(t)).norm() < 1e-13);
            let d = Complex64::new(0.0, 3.0) * Complex64::from_polar(2.0, 3.0 * t);
            assert!((ip.derivative(t) - d).norm() < 1e-12);
        }
    }

    #[test]
    fn spline_through_two_points_is_linear() {
        let sp = CubicSpline::new(vec![Complex64::new(0.0, 0.0), Complex64::new(3.0, 1.0)]);
        let (v, d) = sp.eval(0.25);
        assert!((v - Complex64::new(0.75, 0.25)).norm() < 1e-15);
        assert!((d - Complex64::new(3.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn spline_interpolates_knots() {
        let knots: Vec<_> = (0..6).map(|j| Complex64::new((j as f64).sin(), j as f64 * 0.3)).collect();
        let sp = CubicSpline::new(knots.clone());
        for (j, k) in knots.iter().enumerate() {
            let (v, _) = sp.eval(j as f64 / 5.0);
            assert!((v - k).norm() < 1e-13);
        }
    }

    #[test]
    fn central_derivative_of_polynomial() {
        let d = central_derivative(|t| vec![Complex64::new(t.powi(5), t * t)], 0.7, 1e-2);
        assert!((d[0] - Complex64::new(5.0 * 0.7f64.powi(4), 1.4)).norm() < 1e-12);
    }
}
