//! Shapiro-Wilk W test, Royston's AS R94 algorithm (valid for 3 ≤ n ≤ 5000).

use statrs::distribution::{ContinuousCDF, Normal};

use super::{check_finite, StatsError, TestKind, TestResult};

const SMALL: f64 = 1e-19;

const G: [f64; 2] = [-2.273, 0.459];
const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056];
const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
const C3: [f64; 4] = [0.544, -0.39978, 0.025054, -6.714e-4];
const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn sign(v: isize) -> f64 {
    match v.cmp(&0) {
        std::cmp::Ordering::Less => -1.0,
        std::cmp::Ordering::Equal => 0.0,
        std::cmp::Ordering::Greater => 1.0,
    }
}

/// Half of the antisymmetric coefficient vector, `a[1..=n/2]` (index 0 unused).
fn coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    let mut a = vec![0.0; half + 1];
    if n == 3 {
        a[1] = 0.5f64.sqrt();
        return a;
    }
    let std_normal = Normal::standard();
    let an = n as f64;
    let an25 = an + 0.25;
    let mut summ2 = 0.0;
    for (i, ai) in a.iter_mut().enumerate().skip(1) {
        *ai = std_normal.inverse_cdf((i as f64 - 0.375) / an25);
        summ2 += *ai * *ai;
    }
    summ2 *= 2.0;
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - a[1] / ssumm2;

    let (first_scaled, fac) = if n > 5 {
        let a2 = -a[2] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * a[1] * a[1] - 2.0 * a[2] * a[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2)).sqrt();
        a[2] = a2;
        (3, fac)
    } else {
        let fac = ((summ2 - 2.0 * a[1] * a[1]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (2, fac)
    };
    a[1] = a1;
    for ai in a.iter_mut().skip(first_scaled) {
        *ai /= -fac;
    }
    a
}

pub fn shapiro_wilk(values: &[f64]) -> Result<TestResult, StatsError> {
    let n = values.len();
    if !(3..=5000).contains(&n) {
        return Err(StatsError::SampleSize(n));
    }
    check_finite(values)?;
    let mut x = values.to_vec();
    x.sort_by(f64::total_cmp);
    let range = x[n - 1] - x[0];
    if range < SMALL {
        return Err(StatsError::ZeroRange);
    }
    let a = coefficients(n);

    // mean of the (signed) coefficients and of the range-scaled data
    let mut sx = x[0] / range;
    let mut sa = -a[1];
    let (mut i, mut j) = (1usize, n - 1);
    while i < n {
        sx += x[i] / range;
        i += 1;
        if i != j {
            sa += sign(i as isize - j as isize) * a[i.min(j)];
        }
        j -= 1;
    }
    let nf = n as f64;
    sa /= nf;
    sx /= nf;

    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let j = n - 1 - i;
        let asa = if i != j {
            sign(i as isize - j as isize) * a[1 + i.min(j)] - sa
        } else {
            -sa
        };
        let xsx = x[i] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    // 1 − W, formed to avoid cancellation when W is close to 1
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = 1.0 - w1;

    let p_value = if n == 3 {
        use std::f64::consts::{FRAC_PI_3, PI};
        (6.0 / PI * (w.sqrt().asin() - FRAC_PI_3)).max(0.0)
    } else {
        let mut y = w1.ln();
        let ln_n = nf.ln();
        let (m, s) = if n <= 11 {
            let gamma = poly(&G, nf);
            if y >= gamma {
                return Ok(result(w, 1e-99, n));
            }
            y = -(gamma - y).ln();
            (poly(&C3, nf), poly(&C4, nf).exp())
        } else {
            (poly(&C5, ln_n), poly(&C6, ln_n).exp())
        };
        Normal::new(m, s).expect("positive scale").sf(y)
    };
    Ok(result(w, p_value.clamp(0.0, 1.0), n))
}

fn result(w: f64, p_value: f64, n: usize) -> TestResult {
    TestResult {
        test: TestKind::ShapiroWilk,
        statistic: w,
        p_value,
        effect_size: None,
        group_labels: Vec::new(),
        n,
    }
}
