//! Order-fixed reductions for ensemble statistics.

/// Pairwise (cascade) summation.
pub(crate) fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 16 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

pub(crate) fn mean(v: &[f64]) -> f64 {
    pairwise_sum(v) / v.len() as f64
}

/// Unbiased sample covariance of the columns of `samples` (one row per draw).
pub(crate) fn sample_covariance(columns: &[Vec<f64>]) -> Vec<f64> {
    let dim = columns.len();
    let n = columns.first().map_or(0, Vec::len);
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| {
            let mu = mean(col);
            col.iter().map(|x| x - mu).collect()
        })
        .collect();
    let mut out = vec![0.0; dim * dim];
    let mut prod = vec![0.0; n];
    for i in 0..dim {
        for j in i..dim {
            for ((p, a), b) in prod.iter_mut().zip(&centered[i]).zip(&centered[j]) {
                *p = a * b;
            }
            let v = pairwise_sum(&prod) / (n as f64 - 1.0);
            out[i * dim + j] = v;
            out[j * dim + i] = v;
        }
    }
    out
}

/// Sample skewness and excess kurtosis (population central moments).
pub(crate) fn shape_moments(v: &[f64]) -> (f64, f64) {
    let mu = mean(v);
    let powers = |k: i32| mean(&v.iter().map(|x| (x - mu).powi(k)).collect::<Vec<_>>());
    let m2 = powers(2);
    if m2 == 0.0 {
        return (0.0, 0.0);
    }
    (powers(3) / m2.powf(1.5), powers(4) / (m2 * m2) - 3.0)
}
