//! Trapezoid realizations of the `int_X^infty` kernels. Everything past the
//! last node is treated as zero.

/// `out_i = int_{X_i}^{X_{n-1}} f`, accumulated right to left.
pub fn tail_integral(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        out[i] = out[i + 1] + 0.5 * h * (f[i] + f[i + 1]);
    }
    out
}

/// `out_i = int_{X_i}^infty exp(-int_{X_i}^V rate) g(V) dV`.
///
/// The weight factorizes over cells, so one right-to-left pass suffices:
/// `J_i = d_i J_{i+1} + h/2 (g_i + d_i g_{i+1})` with
/// `d_i = exp(-h/2 (rate_i + rate_{i+1}))`.
pub fn weighted_tail_integral(rate: &[f64], g: &[f64], h: f64) -> Vec<f64> {
    let n = g.len();
    let mut out = vec![0.0; n];
    for i in (0..n.saturating_sub(1)).rev() {
        let d = (-0.5 * h * (rate[i] + rate[i + 1])).exp();
        out[i] = d * out[i + 1] + 0.5 * h * (g[i] + d * g[i + 1]);
    }
    out
}

/// Samples of `f(X + s)` for `s >= 0` by linear interpolation, zero past the grid.
pub fn shift(f: &[f64], s: f64, h: f64) -> Vec<f64> {
    let n = f.len();
    let steps = s / h;
    let m = steps.floor() as usize;
    let w = steps - m as f64;
    let at = |j: usize| f.get(j).copied().unwrap_or(0.0);
    (0..n)
        .map(|i| (1.0 - w) * at(i + m) + w * at(i + m + 1))
        .collect()
}

/// Integral of the piecewise-linear interpolant of `f` from `a` to `b`, both
/// expressed in grid units (`a = (X_a + L) / h`).
pub fn interpolant_integral(f: &[f64], a: f64, b: f64, h: f64) -> f64 {
    if b < a {
        return -interpolant_integral(f, b, a, h);
    }
    let n = f.len();
    let value = |s: f64| {
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        f[i] * (1.0 - w) + f[i + 1] * w
    };
    // cumulative from 0 to s of the interpolant
    let primitive = |s: f64| {
        let i = (s.floor() as usize).min(n - 2);
        let whole: f64 = (0..i).map(|j| 0.5 * (f[j] + f[j + 1])).sum();
        let part = 0.5 * (f[i] + value(s)) * (s - i as f64);
        whole + part
    };
    h * (primitive(b) - primitive(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, lo: f64, hi: f64) -> (Vec<f64>, f64) {
        let h = (hi - lo) / (n - 1) as f64;
        ((0..n).map(|i| lo + i as f64 * h).collect(), h)
    }

    #[test]
    fn tail_integral_of_exponential_is_second_order() {
        let err = |n: usize| {
            let (x, h) = grid(n, 0.0, 30.0);
            let f: Vec<f64> = x.iter().map(|x| (-x).exp()).collect();
            let t = tail_integral(&f, h);
            x.iter()
                .zip(&t)
                .map(|(x, v)| (v - ((-x).exp() - (-30f64).exp())).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(1001) / err(2001)).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }

    #[test]
    fn weighted_integral_matches_closed_form() {
        // rate 1, g = e^{-V}: int_X^inf e^{-(V-X)} e^{-V} dV = e^{-X}/2
        let (x, h) = grid(4001, 0.0, 40.0);
        let rate = vec![1.0; x.len()];
        let g: Vec<f64> = x.iter().map(|x| (-x).exp()).collect();
        let j = weighted_tail_integral(&rate, &g, h);
        for (xi, ji) in x.iter().zip(&j).take(3000) {
            assert!((ji - 0.5 * (-xi).exp()).abs() < 1e-4 * (-xi).exp());
        }
        let zero_rate = vec![0.0; x.len()];
        let plain = tail_integral(&g, h);
        let weighted = weighted_tail_integral(&zero_rate, &g, h);
        assert!(plain
            .iter()
            .zip(&weighted)
            .all(|(a, b)| (a - b).abs() < 1e-15));
    }

    #[test]
    fn shift_interpolates_and_pads() {
        let f: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let s = shift(&f, 2.5, 1.0);
        assert!((s[0] - 2.5).abs() < 1e-15);
        assert_eq!(s[9], 0.0);
        assert_eq!(shift(&f, 0.0, 1.0), f);
    }

    #[test]
    fn interpolant_integral_is_exact_on_lines() {
        let f: Vec<f64> = (0..8).map(|i| 2.0 * i as f64 + 1.0).collect();
        // integrand 2s + 1 over [0.5, 4.25] with h = 1
        let exact = (4.25f64.powi(2) + 4.25) - (0.25 + 0.5);
        assert!((interpolant_integral(&f, 0.5, 4.25, 1.0) - exact).abs() < 1e-13);
        assert!((interpolant_integral(&f, 4.25, 0.5, 1.0) + exact).abs() < 1e-13);
        assert_eq!(interpolant_integral(&f, 3.0, 3.0, 1.0), 0.0);
    }
}
