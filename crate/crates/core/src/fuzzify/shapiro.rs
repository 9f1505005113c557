// Shapiro-Wilk W test with Royston's AS R94 coefficients and p-value
// approximation, valid for 3 <= n <= 5000.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{FuzzifyError, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const MAX_SAMPLE: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityResult {
    pub w_statistic: f64,
    pub p_value: f64,
    pub is_gaussian: bool,
}

impl NormalityResult {
    /// Decision for a test that was not run (treated as non-Gaussian).
    pub fn not_tested() -> Self {
        Self { w_statistic: f64::NAN, p_value: 0.0, is_gaussian: false }
    }

    pub fn gaussian(w_statistic: f64, p_value: f64) -> Self {
        Self { w_statistic, p_value, is_gaussian: true }
    }
}

pub fn shapiro_wilk(x: &[f64]) -> Result<NormalityResult> {
    shapiro_wilk_alpha(x, DEFAULT_ALPHA)
}

pub fn shapiro_wilk_alpha(x: &[f64], alpha: f64) -> Result<NormalityResult> {
    let n = x.len();
    if n < 3 {
        return Err(FuzzifyError::SampleTooSmall(n));
    }
    if n > MAX_SAMPLE {
        return Err(FuzzifyError::SampleTooLarge(n));
    }
    let mut sorted = x.to_vec();
    sorted.sort_by(f64::total_cmp);
    let range = sorted[n - 1] - sorted[0];
    if !(range > 0.0) || !range.is_finite() {
        return Err(FuzzifyError::ZeroVariance);
    }
    let (w, p) = swilk(&sorted, range);
    Ok(NormalityResult { w_statistic: w, p_value: p, is_gaussian: p > alpha })
}

fn poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Coefficients `a[1..=n/2]` (index 0 unused), positive and decreasing.
fn coefficients(n: usize) -> Vec<f64> {
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];

    let nn2 = n / 2;
    let mut a = vec![0.0; nn2 + 1];
    if n == 3 {
        a[1] = std::f64::consts::FRAC_1_SQRT_2;
        return a;
    }
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let an = n as f64;
    let an25 = an + 0.25;
    let mut summ2 = 0.0;
    let mut m = vec![0.0; nn2 + 1];
    for i in 1..=nn2 {
        m[i] = std_normal.inverse_cdf((i as f64 - 0.375) / an25);
        summ2 += m[i] * m[i];
    }
    summ2 *= 2.0;
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / an.sqrt();
    let a1 = poly(&C1, rsn) - m[1] / ssumm2;

    let (first, fac) = if n > 5 {
        let a2 = -m[2] / ssumm2 + poly(&C2, rsn);
        let fac = ((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        a[2] = a2;
        (3, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (2, fac)
    };
    a[1] = a1;
    for i in first..=nn2 {
        a[i] = -m[i] / fac;
    }
    a
}

/// W and its upper-tail p-value for sorted data with positive range.
fn swilk(x: &[f64], range: f64) -> (f64, f64) {
    let n = x.len();
    let a = coefficients(n);
    // Signed coefficient for order statistic i (0-based): negative on the
    // lower half, positive on the upper half, zero at an odd middle.
    let coef = |i: usize| -> f64 {
        let j = n - 1 - i;
        match i.cmp(&j) {
            std::cmp::Ordering::Less => -a[i + 1],
            std::cmp::Ordering::Greater => a[j + 1],
            std::cmp::Ordering::Equal => 0.0,
        }
    };

    let xs: Vec<f64> = x.iter().map(|v| v / range).collect();
    let an = n as f64;
    let sa = (0..n).map(coef).sum::<f64>() / an;
    let sx = xs.iter().sum::<f64>() / an;
    let (mut ssa, mut ssx, mut sax) = (0.0, 0.0, 0.0);
    for (i, xi) in xs.iter().enumerate() {
        let asa = coef(i) - sa;
        let xsx = xi - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    let ssassx = (ssa * ssx).sqrt();
    let w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    let w = (1.0 - w1).clamp(0.0, 1.0);

    if n == 3 {
        const PI6: f64 = 1.909_859_317_102_744; // 6 / pi
        const STQR: f64 = std::f64::consts::FRAC_PI_3; // asin(sqrt(3/4))
        let p = (PI6 * (w.sqrt().asin() - STQR)).max(0.0);
        return (w, p.min(1.0));
    }

    const G: [f64; 2] = [-2.273, 0.459];
    const C3: [f64; 4] = [0.5440, -0.39978, 0.025054, -6.714e-4];
    const C4: [f64; 4] = [1.3822, -0.77857, 0.062767, -0.0020322];
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];

    let mut y = w1.ln();
    let xx = an.ln();
    let (mean, sd) = if n <= 11 {
        let gamma = poly(&G, an);
        if y >= gamma {
            return (w, 1e-99);
        }
        y = -(gamma - y).ln();
        (poly(&C3, an), poly(&C4, an).exp())
    } else {
        (poly(&C5, xx), poly(&C6, xx).exp())
    };
    let dist = Normal::new(mean, sd).expect("positive sd");
    (w, dist.sf(y))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_heights() {
        let x = [148.0, 154.0, 158.0, 160.0, 161.0, 162.0, 166.0, 170.0, 182.0, 195.0, 236.0];
        let r = shapiro_wilk(&x).unwrap();
        // Reference (scipy swilk): W = 0.788815, p = 0.006704
        assert!((r.w_statistic - 0.788_814_7).abs() < 1e-4, "{r:?}");
        assert!((r.p_value - 0.006_703_8).abs() < 5e-4, "{r:?}");
        assert!(!r.is_gaussian);
    }

    #[test]
    fn guards() {
        assert!(matches!(shapiro_wilk(&[1.0, 2.0]), Err(FuzzifyError::SampleTooSmall(2))));
        assert!(matches!(shapiro_wilk(&[5.0; 4]), Err(FuzzifyError::ZeroVariance)));
        let big: Vec<f64> = (0..5001).map(f64::from).collect();
        assert!(matches!(shapiro_wilk(&big), Err(FuzzifyError::SampleTooLarge(5001))));
    }

    #[test]
    fn three_points() {
        let r = shapiro_wilk(&[1.0, 2.0, 3.0]).unwrap();
        assert!((r.w_statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn permutation_invariant() {
        let x: Vec<f64> = (0..40).map(|i| ((i * 13) % 17) as f64 + (i as f64).sqrt()).collect();
        let mut y = x.clone();
        y.reverse();
        y.swap(3, 29);
        let (a, b) = (shapiro_wilk(&x).unwrap(), shapiro_wilk(&y).unwrap());
        assert_eq!(a.w_statistic, b.w_statistic);
        assert!(a.w_statistic > 0.0 && a.w_statistic <= 1.0);
    }
}
