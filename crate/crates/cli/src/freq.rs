//! Parsing of frequencies and number lists given on the command line.

use std::f64::consts::PI;

use crate::error::{CliError, CliResult};

/// Accepts `0.2pi`, `0.2*pi`, `pi`, `pi/4` or plain radians such as `0.628`.
pub fn parse_frequency(s: &str) -> CliResult<f64> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || CliError::Argument(format!("cannot parse frequency '{s}'"));
    let value = if let Some(rest) = t.strip_prefix("pi") {
        match rest.strip_prefix('/') {
            Some(d) if !d.is_empty() => PI / d.parse::<f64>().map_err(|_| bad())?,
            None if rest.is_empty() => PI,
            _ => return Err(bad()),
        }
    } else if let Some(head) = t.strip_suffix("pi") {
        let head = head.strip_suffix('*').unwrap_or(head);
        head.parse::<f64>().map_err(|_| bad())? * PI
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Comma-separated positive integers; an empty string is an empty list.
pub fn parse_counts(s: &str) -> CliResult<Vec<usize>> {
    let t = s.trim().trim_start_matches('(').trim_end_matches(')');
    if t.trim().is_empty() {
        return Ok(Vec::new());
    }
    t.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Argument(format!("'{p}' is not a non-negative integer")))
        })
        .collect()
}

/// A tone `freq[:amplitude]`, amplitude defaulting to one.
pub fn parse_tone(s: &str) -> CliResult<(f64, f64)> {
    match s.split_once(':') {
        Some((f, a)) => {
            let amp = a
                .trim()
                .parse::<f64>()
                .map_err(|_| CliError::Argument(format!("bad tone amplitude in '{s}'")))?;
            Ok((parse_frequency(f)?, amp))
        }
        None => Ok((parse_frequency(s)?, 1.0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_forms() {
        assert_eq!(parse_frequency("0.2pi").unwrap(), 0.2 * PI);
        assert_eq!(parse_frequency("0.25*pi").unwrap(), 0.25 * PI);
        assert_eq!(parse_frequency("pi").unwrap(), PI);
        assert_eq!(parse_frequency("pi/4").unwrap(), PI / 4.0);
        assert_eq!(parse_frequency("1.5").unwrap(), 1.5);
        assert_eq!(parse_frequency(" 0.3 PI ").unwrap(), 0.3 * PI);
        assert!(parse_frequency("abc").is_err());
        assert!(parse_frequency("pi/").is_err());
        assert!(parse_frequency("inf").is_err());
    }

    #[test]
    fn count_lists() {
        assert_eq!(parse_counts("2,1,3,2").unwrap(), vec![2, 1, 3, 2]);
        assert_eq!(parse_counts("(5, 5,1)").unwrap(), vec![5, 5, 1]);
        assert_eq!(parse_counts("").unwrap(), Vec::<usize>::new());
        assert!(parse_counts("1,-2").is_err());
    }

    #[test]
    fn tones() {
        assert_eq!(parse_tone("0.5pi:0.25").unwrap(), (0.5 * PI, 0.25));
        assert_eq!(parse_tone("1.0").unwrap(), (1.0, 1.0));
        assert!(parse_tone("1.0:x").is_err());
    }
}
