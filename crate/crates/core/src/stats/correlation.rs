use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{check_finite, StatsError, TestKind, TestResult};

/// Two-sided p-value for a Pearson correlation `r` on `n` pairs (t test, n − 2 df).
pub fn pearson_p_value(r: f64, n: usize) -> f64 {
    if n < 3 {
        return 1.0;
    }
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).min(1.0)
}

/// Pearson correlation. The statistic is t; the effect size is r.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<TestResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    let n = x.len();
    if n < 3 {
        return Err(StatsError::TooFew { needed: 3, got: n });
    }
    check_finite(x)?;
    check_finite(y)?;
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let df = (n - 2) as f64;
    let t = if r.abs() >= 1.0 {
        f64::INFINITY.copysign(r)
    } else {
        r * (df / (1.0 - r * r)).sqrt()
    };
    Ok(TestResult {
        test: TestKind::Pearson,
        statistic: t,
        p_value: pearson_p_value(r, n),
        effect_size: Some(r),
        group_labels: Vec::new(),
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_series() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let r = pearson(&x, &x).unwrap();
        assert_eq!(r.effect_size, Some(1.0));
        assert_eq!(r.p_value, 0.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap().effect_size, Some(-1.0));
    }

    #[test]
    fn hand_value() {
        // x = 1..5, y = [2,1,4,3,5]: sxy = 8, sxx = syy = 10
        let r = pearson(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r.effect_size.unwrap() - 0.8).abs() < 1e-12);
        let t = 0.8 * (3.0f64 / 0.36).sqrt();
        assert!((r.statistic - t).abs() < 1e-12);
        // two-sided p for t ≈ 2.3094 on 3 df
        assert!((r.p_value - 0.104_088_3).abs() < 1e-6);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(pearson(&[1.0, 2.0], &[1.0]), Err(StatsError::LengthMismatch(2, 1)));
        assert_eq!(
            pearson(&[1.0, 2.0], &[1.0, 2.0]),
            Err(StatsError::TooFew { needed: 3, got: 2 })
        );
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ZeroVariance)
        );
    }

    #[test]
    fn weak_correlation_large_sample() {
        let p = pearson_p_value(0.1, 1502);
        assert!(p > 0.0 && p < 1e-3);
        assert_eq!(pearson_p_value(0.0, 100), 1.0);
    }

    proptest! {
        #[test]
        fn symmetric_and_bounded(
            pairs in proptest::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40)
        ) {
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            if let (Ok(a), Ok(b)) = (pearson(&x, &y), pearson(&y, &x)) {
                let (ra, rb) = (a.effect_size.unwrap(), b.effect_size.unwrap());
                prop_assert!((ra - rb).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&ra));
                prop_assert!((0.0..=1.0).contains(&a.p_value));
            }
        }
    }
}
