use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sweep::ArgmaxEntry;
use super::{PreprocError, POLICY_SCHEMA_VERSION};

/// Exponents (i, j) of u^i·v^j in coefficient order: by total degree, then
/// by descending power of u.
pub const POLICY_TERMS: [(u32, u32); 21] = {
    let mut t = [(0, 0); 21];
    let mut k = 0;
    let mut d = 0;
    while d <= 5 {
        let mut i = d;
        loop {
            t[k] = (i, d - i);
            k += 1;
            if i == 0 {
                break;
            }
            i -= 1;
        }
        d += 1;
    }
    t
};

/// Degree-5 bivariate polynomial s*(σ, ln rate) on inputs mapped to [−1, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrengthPolicy {
    pub schema_version: u32,
    /// One per entry of [`POLICY_TERMS`].
    pub coefficients: Vec<f64>,
    pub sigma_range: (f64, f64),
    pub ln_rate_range: (f64, f64),
    pub s_max: f64,
    /// RMS residual over the fitted table.
    pub residual_rmse: f64,
}

fn normalize(v: f64, (lo, hi): (f64, f64)) -> f64 {
    2.0 * (v - lo) / (hi - lo) - 1.0
}

fn monomials(u: f64, v: f64) -> [f64; 21] {
    POLICY_TERMS.map(|(i, j)| u.powi(i as i32) * v.powi(j as i32))
}

fn span(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl StrengthPolicy {
    pub fn validate(&self) -> Result<(), PreprocError> {
        let bad = |m: &str| Err(PreprocError::Policy(m.to_string()));
        if self.coefficients.len() != POLICY_TERMS.len() {
            return bad("policy needs 21 coefficients");
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return bad("coefficients must be finite");
        }
        let (a, b) = self.sigma_range;
        let (c, d) = self.ln_rate_range;
        if !(b > a && d > c && a.is_finite() && b.is_finite() && c.is_finite() && d.is_finite()) {
            return bad("normalization ranges need positive width");
        }
        if !(self.s_max >= 0.0 && self.s_max.is_finite()) {
            return bad("s_max must be finite and non-negative");
        }
        Ok(())
    }

    /// Raw polynomial value at already-clamped inputs.
    fn eval(&self, sigma: f64, ln_rate: f64) -> f64 {
        let m = monomials(
            normalize(sigma, self.sigma_range),
            normalize(ln_rate, self.ln_rate_range),
        );
        m.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("policy serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, PreprocError> {
        let p: Self = serde_json::from_str(s).map_err(|e| PreprocError::Parse {
            context: "policy json".into(),
            message: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }
}

/// Least-squares fit of the argmax table in normalized (σ, ln rate).
pub fn fit_policy(table: &[ArgmaxEntry], s_max: f64) -> Result<StrengthPolicy, PreprocError> {
    let needed = POLICY_TERMS.len();
    if table.len() < needed {
        return Err(PreprocError::TooFewEntries {
            needed,
            got: table.len(),
        });
    }
    if table
        .iter()
        .any(|e| !(e.sigma.is_finite() && e.bitrate > 0.0 && e.bitrate.is_finite() && e.strength.is_finite()))
    {
        return Err(PreprocError::Policy(
            "table entries need finite σ, strength and a positive bitrate".into(),
        ));
    }
    let sigma_range = span(table.iter().map(|e| e.sigma));
    let ln_rate_range = span(table.iter().map(|e| e.bitrate.ln()));
    if !(sigma_range.1 > sigma_range.0) || !(ln_rate_range.1 > ln_rate_range.0) {
        return Err(PreprocError::RankDeficient { rank: 1, needed });
    }
    let n = table.len();
    let mut a = DMatrix::<f64>::zeros(n, needed);
    let b = DVector::from_iterator(n, table.iter().map(|e| e.strength));
    for (r, e) in table.iter().enumerate() {
        let m = monomials(
            normalize(e.sigma, sigma_range),
            normalize(e.bitrate.ln(), ln_rate_range),
        );
        for (c, v) in m.iter().enumerate() {
            a[(r, c)] = *v;
        }
    }
    let svd = a.clone().svd(true, true);
    let top = svd.singular_values.max();
    let tol = top * 1e-10;
    let rank = svd.singular_values.iter().filter(|s| **s > tol).count();
    if rank < needed {
        return Err(PreprocError::RankDeficient { rank, needed });
    }
    let x = svd
        .solve(&b, tol)
        .map_err(|e| PreprocError::Policy(format!("least squares: {e}")))?;
    let resid = &a * &x - &b;
    let residual_rmse = (resid.norm_squared() / n as f64).sqrt();
    let policy = StrengthPolicy {
        schema_version: POLICY_SCHEMA_VERSION,
        coefficients: x.iter().copied().collect(),
        sigma_range,
        ln_rate_range,
        s_max,
        residual_rmse,
    };
    policy.validate()?;
    Ok(policy)
}

/// Strength for a measured noise level and target rate. Inputs outside the
/// fitted ranges are moved to the nearest edge; the result is clamped to
/// [0, s_max].
pub fn optimal_strength(policy: &StrengthPolicy, sigma: f64, rate_kbps: f64) -> f64 {
    let s = sigma.clamp(policy.sigma_range.0, policy.sigma_range.1);
    let lr = rate_kbps.ln().clamp(policy.ln_rate_range.0, policy.ln_rate_range.1);
    policy.eval(s, lr).clamp(0.0, policy.s_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SIGMAS: [f64; 6] = [2.0, 4.0, 6.5, 10.0, 16.0, 25.0];
    const RATES: [f64; 6] = [256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0];

    fn table_from(f: impl Fn(f64, f64) -> f64) -> Vec<ArgmaxEntry> {
        let mut t = Vec::new();
        for s in SIGMAS {
            for r in RATES {
                t.push(ArgmaxEntry {
                    psnr_level: 0.0,
                    sigma: s,
                    bitrate: r,
                    strength: f(s, r),
                    final_psnr: 0.0,
                });
            }
        }
        t
    }

    fn planted(c: &[f64]) -> impl Fn(f64, f64) -> f64 + '_ {
        move |s, r| {
            let u = normalize(s, (2.0, 25.0));
            let v = normalize(r.ln(), (256f64.ln(), 8192f64.ln()));
            monomials(u, v).iter().zip(c).map(|(a, b)| a * b).sum()
        }
    }

    #[test]
    fn term_order() {
        assert_eq!(POLICY_TERMS[0], (0, 0));
        assert_eq!(POLICY_TERMS[1], (1, 0));
        assert_eq!(POLICY_TERMS[2], (0, 1));
        assert_eq!(POLICY_TERMS[20], (0, 5));
        let mut seen = POLICY_TERMS.to_vec();
        seen.sort();
        seen.dedup();
        assert_eq!(seen.len(), 21);
        assert!(POLICY_TERMS.iter().all(|(i, j)| i + j <= 5));
    }

    #[test]
    fn planted_polynomial_is_recovered() {
        let c: Vec<f64> = (0..21)
            .map(|k| {
                if k == 0 {
                    20.0
                } else {
                    ((k * 37 % 11) as f64 - 5.0) / 10.0
                }
            })
            .collect();
        let p = fit_policy(&table_from(planted(&c)), 60.0).unwrap();
        assert!(p.residual_rmse <= 1e-8);
        for (a, b) in p.coefficients.iter().zip(&c) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        let f = planted(&c);
        assert!((optimal_strength(&p, 6.5, 1024.0) - f(6.5, 1024.0)).abs() < 1e-6);
        // Beyond the fitted σ range the edge value is used.
        assert_eq!(optimal_strength(&p, 80.0, 1024.0), optimal_strength(&p, 25.0, 1024.0));
        assert_eq!(optimal_strength(&p, 6.5, 1e6), optimal_strength(&p, 6.5, 8192.0));
    }

    #[test]
    fn constant_table() {
        let p = fit_policy(&table_from(|_, _| 4.0), 60.0).unwrap();
        assert!((p.coefficients[0] - 4.0).abs() < 1e-9);
        assert!(p.coefficients[1..].iter().all(|c| c.abs() < 1e-9));
    }

    #[test]
    fn preconditions() {
        let t = table_from(|_, _| 1.0);
        assert!(matches!(
            fit_policy(&t[..20], 10.0),
            Err(PreprocError::TooFewEntries { needed: 21, got: 20 })
        ));
        // 36 entries but only two distinct rates: cannot carry degree 5 in v.
        let two: Vec<_> = t.iter().filter(|e| e.bitrate < 600.0).cloned().collect();
        let sparse = [two.clone(), two].concat();
        assert!(matches!(
            fit_policy(&sparse, 10.0),
            Err(PreprocError::RankDeficient { .. })
        ));
        let zero = StrengthPolicy {
            schema_version: 1,
            coefficients: vec![0.0; 21],
            sigma_range: (1.0, 2.0),
            ln_rate_range: (1.0, 2.0),
            s_max: 10.0,
            residual_rmse: 0.0,
        };
        assert_eq!(optimal_strength(&zero, 1.5, 5.0), 0.0);
        assert_eq!(StrengthPolicy::from_json(&zero.to_json()).unwrap(), zero);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn any_quintic_round_trips(c in proptest::collection::vec(-10.0f64..10.0, 21)) {
            let f = planted(&c);
            let p = fit_policy(&table_from(&f), 1e9).unwrap();
            prop_assert!(p.residual_rmse <= 1e-6);
        }
    }
}
