use super::ClassicalError;

/// Repeats the last observation across the horizon.
pub fn naive_forecast(context: &[f64], horizon: usize) -> Result<Vec<f64>, ClassicalError> {
    let last = *context.last().ok_or(ClassicalError::EmptyContext)?;
    Ok(vec![last; horizon])
}

/// Repeats the value observed one season earlier: `ŷ[h] = y[n − s + (h mod s)]`.
pub fn seasonal_naive_forecast(
    context: &[f64],
    season: usize,
    horizon: usize,
) -> Result<Vec<f64>, ClassicalError> {
    if context.is_empty() {
        return Err(ClassicalError::EmptyContext);
    }
    let n = context.len();
    if season == 0 || n < season {
        return Err(ClassicalError::ContextTooShort {
            needed: season.max(1),
            got: n,
        });
    }
    Ok((0..horizon).map(|h| context[n - season + h % season]).collect())
}
