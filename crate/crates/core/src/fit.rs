//! Small least-squares fits used for decay rates and scaling exponents.

/// Least-squares slope and intercept of `y = a + b x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Slope of `ln y` against `ln x`.
pub fn power_law_exponent(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_fit(&lx, &ly).map(|(_, b)| b)
}

/// Decay fit of a positive profile `y(delta)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct DecayFit {
    /// `lambda` in `ln y ~ a + p ln delta - lambda delta`.
    pub rate: f64,
    /// Fitted polynomial power `p`.
    pub power: f64,
    /// `lambda` in the plain fit `ln y ~ a - lambda delta`.
    pub log_linear_rate: f64,
}

/// Fits `ln y = a + p ln delta - lambda delta`. A pure exponential gives
/// `p = 0`; a polynomial prefactor `delta^s` is absorbed into `p` so that
/// `lambda` is the exponential rate. Needs at least three samples with
/// `delta > 0` and `y > 0`.
pub fn fit_decay(delta: &[f64], y: &[f64]) -> Option<DecayFit> {
    let pts: Vec<(f64, f64)> = delta
        .iter()
        .zip(y)
        .filter(|(d, v)| **d > 0.0 && **v > 0.0 && v.is_finite())
        .map(|(d, v)| (*d, v.ln()))
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ls: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let (_, slope) = linear_fit(&xs, &ls)?;
    // normal equations for columns (1, ln d, d)
    let cols = |d: f64| [1.0, d.ln(), d];
    let mut a = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (d, l) in &pts {
        let c = cols(*d);
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] += c[i] * c[j];
            }
            rhs[i] += c[i] * l;
        }
    }
    let sol = solve3(a, rhs)?;
    Some(DecayFit {
        rate: -sol[2],
        power: sol[1],
        log_linear_rate: -slope,
    })
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for c in 0..3 {
        let p = (c..3).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..3 {
            let f = a[r][c] / a[c][c];
            for k in c..3 {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// `count` points evenly spaced on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// `count` points geometrically spaced on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    linspace(lo.ln(), hi.ln(), count).into_iter().map(f64::exp).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_pure_exponential() {
        let d = linspace(2.0, 6.0, 21);
        let y: Vec<f64> = d.iter().map(|x| 3.0 * (-1.7 * x).exp()).collect();
        let f = fit_decay(&d, &y).unwrap();
        assert!((f.rate - 1.7).abs() < 1e-9);
        assert!(f.power.abs() < 1e-9);
        assert!((f.log_linear_rate - 1.7).abs() < 1e-12);
    }

    #[test]
    fn polynomial_prefactor_is_absorbed() {
        let d = linspace(2.0, 6.0, 21);
        let y: Vec<f64> = d.iter().map(|x| x * x * (-1.0 * x).exp()).collect();
        let f = fit_decay(&d, &y).unwrap();
        assert!((f.rate - 1.0).abs() < 1e-9);
        assert!((f.power - 2.0).abs() < 1e-9);
        assert!(f.log_linear_rate < 0.6);
    }

    #[test]
    fn power_law() {
        let x = logspace(10.0, 1e4, 9);
        let y: Vec<f64> = x.iter().map(|t| 5.0 * t.powf(-0.5)).collect();
        assert!((power_law_exponent(&x, &y).unwrap() + 0.5).abs() < 1e-12);
    }
}
