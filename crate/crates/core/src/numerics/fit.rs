//! Ordinary least squares and scaling-window selection.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r2: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 {
        (1.0 - sse / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let slope_stderr = if n > 2 {
        (sse / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Some(LineFit {
        slope,
        intercept,
        slope_stderr,
        r2,
    })
}

/// Fit over the trailing half of the points (at least `min_len`), i.e. the
/// finest scales when points are ordered coarse to fine. Returns
/// `(start, end_exclusive, fit)`.
pub fn fine_window(xs: &[f64], ys: &[f64], min_len: usize) -> Option<(usize, usize, LineFit)> {
    let n = xs.len();
    if n < min_len || min_len < 2 {
        return None;
    }
    let len = (n / 2).max(min_len);
    let fit = linear_fit(&xs[n - len..], &ys[n - len..])?;
    Some((n - len, n, fit))
}
