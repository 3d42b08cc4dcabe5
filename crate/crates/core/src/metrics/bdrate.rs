//! Bjøntegaard-delta rate.
//!
//! Each curve is turned into ln(rate) as a function of quality with a
//! shape-preserving piecewise-cubic Hermite interpolant (Fritsch–Carlson
//! slopes, the same limiter as SciPy's `PchipInterpolator`). The interpolants
//! are integrated exactly over the shared quality interval and the mean
//! log-rate gap is mapped back to a percentage.

use super::curve::RdCurve;
use super::MetricsError;

/// Monotone piecewise-cubic Hermite interpolant.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

fn edge_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() || m0 == 0.0 {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl Pchip {
    /// `x` must be strictly increasing with at least two knots.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n >= 2 && y.len() == n);
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for k in 1..n - 1 {
                if m[k - 1] == 0.0 || m[k] == 0.0 || m[k - 1].signum() != m[k].signum() {
                    d[k] = 0.0;
                } else {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = edge_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        Self { x, y, d }
    }

    fn segment(&self, t: f64) -> usize {
        let k = self.x.partition_point(|&xi| xi <= t);
        k.clamp(1, self.x.len() - 1) - 1
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (s2, s3) = (s * s, s * s * s);
        self.y[k] * (2.0 * s3 - 3.0 * s2 + 1.0)
            + h * self.d[k] * (s3 - 2.0 * s2 + s)
            + self.y[k + 1] * (-2.0 * s3 + 3.0 * s2)
            + h * self.d[k + 1] * (s3 - s2)
    }

    /// ∫ from the start of segment `k` to `x[k] + s·h`, s ∈ [0, 1].
    fn partial(&self, k: usize, s: f64) -> f64 {
        let h = self.x[k + 1] - self.x[k];
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        let a00 = s4 / 2.0 - s3 + s;
        let a10 = s4 / 4.0 - 2.0 * s3 / 3.0 + s2 / 2.0;
        let a01 = -s4 / 2.0 + s3;
        let a11 = s4 / 4.0 - s3 / 3.0;
        h * (self.y[k] * a00 + h * self.d[k] * a10 + self.y[k + 1] * a01 + h * self.d[k + 1] * a11)
    }

    fn antiderivative(&self, t: f64) -> f64 {
        let k = self.segment(t);
        let whole: f64 = (0..k).map(|j| self.partial(j, 1.0)).sum();
        let h = self.x[k + 1] - self.x[k];
        whole + self.partial(k, (t - self.x[k]) / h)
    }

    /// Exact integral over [a, b] (both inside the knot range).
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        self.antiderivative(b) - self.antiderivative(a)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

/// ln(rate) as a function of quality; points with equal quality (possible
/// after inversion repair) are merged by averaging their log-rates.
fn log_rate_interpolant(curve: &RdCurve) -> Pchip {
    let mut pairs: Vec<(f64, f64)> = curve.points().iter().map(|p| (p.quality, p.rate.ln())).collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut x: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut y: Vec<f64> = Vec::with_capacity(pairs.len());
    let mut i = 0;
    while i < pairs.len() {
        let q = pairs[i].0;
        let mut j = i;
        let mut sum = 0.0;
        while j < pairs.len() && pairs[j].0 == q {
            sum += pairs[j].1;
            j += 1;
        }
        x.push(q);
        y.push(sum / (j - i) as f64);
        i = j;
    }
    Pchip::new(x, y)
}

/// Average rate difference of `test` relative to `reference` at equal
/// quality, in percent. Negative means the test configuration is cheaper.
pub fn bd_rate(test: &RdCurve, reference: &RdCurve) -> Result<f64, MetricsError> {
    if test.metric != reference.metric {
        return Err(MetricsError::MetricMismatch(test.metric, reference.metric));
    }
    for c in [test, reference] {
        if c.points().len() < 4 {
            return Err(MetricsError::TooFewPoints(c.points().len()));
        }
    }
    let it = log_rate_interpolant(test);
    let ir = log_rate_interpolant(reference);
    if it.x.len() < 2 || ir.x.len() < 2 {
        return Err(MetricsError::NoOverlap);
    }
    let (t0, t1) = it.domain();
    let (r0, r1) = ir.domain();
    let lo = t0.max(r0);
    let hi = t1.min(r1);
    if !(hi > lo) {
        return Err(MetricsError::NoOverlap);
    }
    let mean_gap = (it.integrate(lo, hi) - ir.integrate(lo, hi)) / (hi - lo);
    Ok(100.0 * mean_gap.exp_m1())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::curve::{build_rd_curve, QualityMetric};

    fn curve(points: &[(f64, f64)]) -> RdCurve {
        build_rd_curve(points, QualityMetric::Psnr).unwrap()
    }

    #[test]
    fn identical_is_exactly_zero() {
        let c = curve(&[
            (100.0, 30.0),
            (230.0, 33.0),
            (500.0, 36.5),
            (1100.0, 39.0),
            (2600.0, 41.0),
        ]);
        assert_eq!(bd_rate(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn doubled_rates_is_plus_hundred() {
        let c = curve(&[(100.0, 30.0), (230.0, 33.0), (500.0, 36.5), (1100.0, 39.0)]);
        let r = bd_rate(&c.scale_rates(2.0), &c).unwrap();
        assert!((r - 100.0).abs() < 1e-9, "{r}");
    }

    #[test]
    fn no_overlap_and_metric_mismatch() {
        let a = curve(&[(100.0, 30.0), (200.0, 31.0), (300.0, 32.0), (400.0, 33.0)]);
        let b = curve(&[(100.0, 40.0), (200.0, 41.0), (300.0, 42.0), (400.0, 43.0)]);
        assert!(matches!(bd_rate(&a, &b), Err(MetricsError::NoOverlap)));
        let m = build_rd_curve(&[(1.0, 0.1), (2.0, 0.2), (3.0, 0.3), (4.0, 0.4)], QualityMetric::MsSsim).unwrap();
        assert!(matches!(bd_rate(&a, &m), Err(MetricsError::MetricMismatch(..))));
    }

    #[test]
    fn pchip_reproduces_linear_and_stays_monotone() {
        let p = Pchip::new(vec![0.0, 1.0, 3.0, 4.0], vec![1.0, 3.0, 7.0, 9.0]);
        for i in 0..=40 {
            let t = i as f64 * 0.1;
            assert!((p.eval(t) - (1.0 + 2.0 * t)).abs() < 1e-12);
        }
        assert!((p.integrate(0.5, 3.5) - (3.0 + (3.5f64.powi(2) - 0.25))).abs() < 1e-12);

        let q = Pchip::new(vec![0.0, 1.0, 2.0, 3.0, 4.0], vec![0.0, 0.1, 2.0, 2.05, 5.0]);
        let mut prev = q.eval(0.0);
        for i in 1..=400 {
            let v = q.eval(i as f64 * 0.01);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }

    #[test]
    fn exact_integral_matches_dense_trapezoid_of_interpolant() {
        let q = Pchip::new(vec![30.0, 32.5, 35.0, 38.5, 41.0], vec![4.6, 5.5, 6.1, 7.3, 8.4]);
        let (a, b) = (31.2, 40.1);
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut trap = 0.5 * (q.eval(a) + q.eval(b));
        for i in 1..n {
            trap += q.eval(a + i as f64 * h);
        }
        trap *= h;
        assert!((q.integrate(a, b) - trap).abs() < 1e-8);
    }
}
