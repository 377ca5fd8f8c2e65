use crate::error::{Error, Result};

/// Parses `start:step:stop` into the inclusive grid `start + k * step`. The
/// stop value is included when the grid lands within `step * 1e-9` of it.
/// A single number is a one-point grid.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Range(spec.to_string());
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    if nums.iter().any(|v| !v.is_finite()) {
        return Err(bad());
    }
    let (a, step, b) = match nums.as_slice() {
        [a] => return Ok(vec![*a]),
        [a, step, b] => (*a, *step, *b),
        _ => return Err(bad()),
    };
    if !(step > 0.0) || a > b {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    if count > 10_000_000 {
        return Err(bad());
    }
    // multiply instead of accumulating so every point is a single rounding
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

/// Parses a comma-separated list of numbers.
pub fn parse_list(spec: &str) -> Result<Vec<f64>> {
    let out: Vec<f64> = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::config(format!("malformed number list {spec:?}")))?;
    if out.is_empty() {
        return Err(Error::config("empty number list"));
    }
    Ok(out)
}

/// A `start:step:stop` range or a comma-separated list.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    if spec.contains(',') {
        parse_list(spec)
    } else {
        parse_range(spec)
    }
}
