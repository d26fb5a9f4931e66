//! Numeric literals and range designators.
//!
//! The default bucket scheme splits every decade in two, `[10^d, 5*10^d)`
//! and `[5*10^d, 10^(d+1))`, labelled by their lowest and highest value at
//! one digit of resolution below the bucket: `1-4`, `5-9`, `10-49`, `50-99`,
//! ..., and `0.1-0.49`, `0.5-0.99`, `0.01-0.049`, ... for sub-unit values.
//! Zero is its own bucket `0-0`; negative values reuse the bucket of their
//! magnitude with a `neg` prefix.

use super::{TextifyError, TokenizationConfig};

/// Renders a finite real as its shortest round-trip decimal text, without
/// exponent notation (`12`, `78.5`, `0.0001`).
pub fn canonical_literal(x: f64) -> String {
    if x == 0.0 {
        // no "-0"
        return "0".to_string();
    }
    format!("{x}")
}

/// Returns `[designator, literal]` for a finite number.
pub fn encode_number(x: f64, config: &TokenizationConfig) -> Result<Vec<String>, TextifyError> {
    if !x.is_finite() {
        return Err(TextifyError::NonFinite(x));
    }
    let literal = canonical_literal(x);
    Ok(vec![designator_for_literal(&literal, config), literal])
}

/// Designator for a decimal literal as produced by [`canonical_literal`] or
/// by integer formatting.
pub(crate) fn designator_for_literal(literal: &str, config: &TokenizationConfig) -> String {
    let (negative, magnitude) = match literal.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, literal),
    };
    let bucket = match &config.range_boundaries {
        None => decade_bucket(magnitude),
        Some(bounds) => custom_bucket(magnitude.parse::<f64>().unwrap_or(0.0), bounds),
    };
    if negative && bucket != "0-0" {
        format!("neg{bucket}")
    } else {
        bucket
    }
}

fn decade_bucket(magnitude: &str) -> String {
    let (int_part, frac_part) = match magnitude.split_once('.') {
        Some((i, f)) => (i, f),
        None => (magnitude, ""),
    };
    let int_part = int_part.trim_start_matches('0');
    if let Some(lead) = int_part.chars().next() {
        let d = int_part.len() - 1;
        return if lead < '5' {
            format!("1{}-4{}", "0".repeat(d), "9".repeat(d))
        } else {
            format!("5{}-{}", "0".repeat(d), "9".repeat(d + 1))
        };
    }
    match frac_part.char_indices().find(|&(_, c)| c != '0') {
        None => "0-0".to_string(),
        Some((p, lead)) => {
            let zeros = "0".repeat(p);
            if lead < '5' {
                format!("0.{zeros}1-0.{zeros}49")
            } else {
                format!("0.{zeros}5-0.{zeros}99")
            }
        }
    }
}

fn custom_bucket(magnitude: f64, bounds: &[f64]) -> String {
    if magnitude == 0.0 {
        return "0-0".to_string();
    }
    let pos = bounds.partition_point(|&b| b <= magnitude);
    if pos == 0 {
        format!("0-{}", canonical_literal(bounds[0]))
    } else if pos == bounds.len() {
        format!("{}-inf", canonical_literal(bounds[pos - 1]))
    } else {
        format!(
            "{}-{}",
            canonical_literal(bounds[pos - 1]),
            canonical_literal(bounds[pos])
        )
    }
}

/// Half-open magnitude interval `[lo, hi)` covered by a designator, and
/// whether it is the negative variant. `0-0` maps to `[0, 0]`, reported as
/// `(0, 0)`.
pub fn designator_interval(
    designator: &str,
    config: &TokenizationConfig,
) -> Option<(bool, f64, f64)> {
    let (negative, body) = match designator.strip_prefix("neg") {
        Some(rest) => (true, rest),
        None => (false, designator),
    };
    let (lo_text, hi_text) = body.split_once('-')?;
    let lo: f64 = lo_text.parse().ok()?;
    if body == "0-0" {
        return Some((negative, 0.0, 0.0));
    }
    if config.range_boundaries.is_some() {
        let hi = if hi_text == "inf" {
            f64::INFINITY
        } else {
            hi_text.parse().ok()?
        };
        return Some((negative, lo, hi));
    }
    let hi: f64 = hi_text.parse().ok()?;
    let decimals = hi_text.split_once('.').map_or(0, |(_, f)| f.len());
    let unit = 10f64.powi(-(decimals as i32));
    Some((negative, lo, hi + unit))
}
