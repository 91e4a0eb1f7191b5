//! Argument value parsers.

use std::fs;

/// `k/n` with `k <= n` and `n > 0`.
pub fn fraction(s: &str) -> Result<(u64, u64), String> {
    let (k, n) = s.split_once('/').ok_or_else(|| format!("`{s}` is not of the form k/n"))?;
    let k: u64 = k.trim().parse().map_err(|_| format!("`{k}` is not a count"))?;
    let n: u64 = n.trim().parse().map_err(|_| format!("`{n}` is not a count"))?;
    if n == 0 || k > n {
        return Err(format!("`{s}` needs 0 <= k <= n and n > 0"));
    }
    Ok((k, n))
}

/// A proportion given as `k/n` or a decimal in `[0, 1]`.
pub fn proportion(s: &str) -> Result<f64, String> {
    if s.contains('/') {
        let (k, n) = fraction(s)?;
        return Ok(k as f64 / n as f64);
    }
    let p: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a proportion"))?;
    if !(0.0..=1.0).contains(&p) {
        return Err(format!("proportion {p} outside [0, 1]"));
    }
    Ok(p)
}

/// Comma- or whitespace-separated numbers, or `@path` to read them from a file.
pub fn numbers(s: &str) -> Result<Vec<f64>, String> {
    let text = match s.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
        None => s.to_string(),
    };
    let values: Vec<f64> = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")))
        .collect::<Result<_, _>>()?;
    if values.is_empty() {
        return Err("no numbers given".into());
    }
    Ok(values)
}

/// `x:y` pair.
pub fn pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("`{s}` is not of the form x:y"))?;
    let a = a.trim().parse().map_err(|_| format!("`{a}` is not a number"))?;
    let b = b.trim().parse().map_err(|_| format!("`{b}` is not a number"))?;
    Ok((a, b))
}

/// Comma-separated `x:y` pairs.
pub fn pairs(s: &str) -> Result<Vec<(f64, f64)>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(pair).collect()
}

/// Comma-separated `k/n` fractions.
pub fn fractions(s: &str) -> Result<Vec<(u64, u64)>, String> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(fraction).collect()
}

/// `NAME=savings:quality`.
pub fn named_point(s: &str) -> Result<(String, (f64, f64)), String> {
    let (name, rest) = s.split_once('=').ok_or_else(|| format!("`{s}` is not of the form NAME=x:y"))?;
    Ok((name.to_string(), pair(rest)?))
}
