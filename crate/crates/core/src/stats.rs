//! Small statistics helpers shared by feature extraction and reporting.

use crate::scalar::Scalar;

/// Arithmetic mean; zero for an empty slice.
pub fn mean<R: Scalar>(values: &[R]) -> R {
    if values.is_empty() {
        return R::zero();
    }
    values.iter().copied().sum::<R>() / R::from_usize_(values.len())
}

/// Population standard deviation (divides by N), computed with Welford's
/// recurrence. Zero for slices of length < 2.
pub fn pop_std<R: Scalar>(values: &[R]) -> R {
    if values.len() < 2 {
        return R::zero();
    }
    let mut mean = R::zero();
    let mut m2 = R::zero();
    for (i, &x) in values.iter().enumerate() {
        let n = R::from_usize_(i + 1);
        let delta = x - mean;
        mean = mean + delta / n;
        m2 = m2 + delta * (x - mean);
    }
    (m2 / R::from_usize_(values.len())).sqrt()
}

/// Empirical CDF as `(value, F(value))` steps at each distinct value,
/// sorted ascending. `F(max) = 1` and `F(min) >= 1/n`.
pub fn empirical_cdf<R: Scalar>(values: &[R]) -> Vec<(R, R)> {
    if values.is_empty() {
        return Vec::new();
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("non-NaN values"));
    let n = R::from_usize_(sorted.len());
    let mut points = Vec::new();
    let mut below = 0usize;
    let mut i = 0usize;
    while i < sorted.len() {
        let v = sorted[i];
        let mut j = i;
        while j < sorted.len() && sorted[j] == v {
            j += 1;
        }
        below = j;
        points.push((v, R::from_usize_(below) / n));
        i = j;
    }
    debug_assert_eq!(below, sorted.len());
    points
}
