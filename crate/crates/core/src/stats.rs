//! Small statistics helpers shared by the estimators.

/// Pairwise (cascade) summation; deterministic for a given input order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        xs.iter().sum()
    } else {
        let (a, b) = xs.split_at(xs.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// `ln Σ exp(t_i)`; `-inf` for an empty input.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let shifted: Vec<f64> = terms.iter().map(|t| (t - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        pairwise_sum(xs) / xs.len() as f64
    }
}

/// Unbiased sample variance; 0 for fewer than two samples.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 || xs.iter().all(|&x| x == xs[0]) {
        return 0.0;
    }
    let m = mean(xs);
    let sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
    pairwise_sum(&sq) / (xs.len() - 1) as f64
}

/// Mean and naive standard error of independent samples.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    (mean(xs), (variance(xs) / xs.len().max(1) as f64).sqrt())
}

/// Standard error of the mean of a correlated series by repeated pairwise
/// blocking. The series is halved until fewer than `min_blocks` blocks remain;
/// the largest error seen over the levels is the plateau estimate. Returns
/// `(stderr, tau_int)` where `tau_int ≈ ½ (σ_blocked / σ_naive)²`.
pub fn blocking_stderr(series: &[f64]) -> (f64, f64) {
    const MIN_BLOCKS: usize = 16;
    let n = series.len();
    if n < 2 {
        return (0.0, 0.5);
    }
    let naive = (variance(series) / n as f64).sqrt();
    let mut best = naive;
    let mut level: Vec<f64> = series.to_vec();
    while level.len() / 2 >= MIN_BLOCKS {
        level = level.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
        let se = (variance(&level) / level.len() as f64).sqrt();
        best = best.max(se);
    }
    let tau = if naive > 0.0 {
        0.5 * (best / naive).powi(2)
    } else {
        0.5
    };
    (best, tau)
}

/// Delete-one jackknife of `f` over the units `0..n`. `f` receives the mask
/// of included units. Returns `(full estimate, jackknife stderr)`.
pub fn jackknife<F: Fn(&[bool]) -> f64>(n: usize, f: F) -> (f64, f64) {
    let all = vec![true; n];
    let full = f(&all);
    if n < 2 {
        return (full, 0.0);
    }
    let mut mask = all;
    let mut loo = Vec::with_capacity(n);
    for i in 0..n {
        mask[i] = false;
        loo.push(f(&mask));
        mask[i] = true;
    }
    let m = mean(&loo);
    let sq: Vec<f64> = loo.iter().map(|x| (x - m) * (x - m)).collect();
    let var = (n - 1) as f64 / n as f64 * pairwise_sum(&sq);
    (full, var.sqrt())
}
