//! Order-independent floating point reductions.
//!
//! Every aggregate in the engine (label means, axis bias and intensity) goes
//! through these helpers. Values are sorted before a compensated summation so
//! the result depends only on the multiset of inputs: shuffled corpora and
//! parallel runs produce bit-identical reports.

/// Neumaier-compensated sum of `values` taken in ascending order.
pub fn stable_sum(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    neumaier(&sorted)
}

fn neumaier(values: &[f64]) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for &v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            compensation += (sum - t) + v;
        } else {
            compensation += (v - t) + sum;
        }
        sum = t;
    }
    sum + compensation
}

/// Arithmetic mean. Returns `None` for an empty slice.
///
/// The result is clamped to `[min, max]` of the inputs and is exactly the
/// common value when all inputs are equal (rounding of `N * c / N` could
/// otherwise drift by one ulp).
pub fn mean(values: &[f64]) -> Option<f64> {
    let (lo, hi) = bounds(values)?;
    if lo == hi {
        return Some(lo);
    }
    let m = stable_sum(values) / values.len() as f64;
    Some(m.clamp(lo, hi))
}

fn bounds(values: &[f64]) -> Option<(f64, f64)> {
    let first = *values.first()?;
    Some(
        values
            .iter()
            .fold((first, first), |(lo, hi), &v| (lo.min(v), hi.max(v))),
    )
}

/// Sum of squared deviations from `center`.
fn squared_deviations(values: &[f64], center: f64) -> f64 {
    let squares: Vec<f64> = values.iter().map(|v| (v - center) * (v - center)).collect();
    stable_sum(&squares)
}

/// Population variance (denominator N). Zero for a single value.
pub fn population_variance(values: &[f64]) -> Option<f64> {
    let m = mean(values)?;
    Some(squared_deviations(values, m) / values.len() as f64)
}

/// Standard error of the mean: sample standard deviation (denominator N - 1)
/// divided by sqrt(N). Defined as exactly 0 when N = 1.
pub fn standard_error(values: &[f64]) -> Option<f64> {
    let n = values.len();
    let m = mean(values)?;
    if n == 1 {
        return Some(0.0);
    }
    let sample_var = squared_deviations(values, m) / (n - 1) as f64;
    Some(sample_var.sqrt() / (n as f64).sqrt())
}
