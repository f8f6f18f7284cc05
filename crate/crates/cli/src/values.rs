//! Value lists on the command line: `a..b:step` ranges and comma lists.

use anyhow::{bail, Context, Result};

/// Parses `a..b:step` (a included, b excluded, step 1 when omitted), a
/// comma-separated list, or a mix such as `10..30:10,inf`.
pub fn parse_values(spec: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        match part.split_once("..") {
            Some((start, rest)) => {
                let (end, step) = rest.split_once(':').unwrap_or((rest, "1"));
                let (a, b, step) = (number(start)?, number(end)?, number(step)?);
                if !(step > 0.0 && step.is_finite()) {
                    bail!("range {part:?} needs a positive step");
                }
                if !(a.is_finite() && b.is_finite()) {
                    bail!("range {part:?} needs finite bounds");
                }
                // Indexing avoids drift from repeated addition.
                let count = ((b - a) / step - 1e-9).ceil().max(0.0) as usize;
                out.extend((0..count).map(|i| a + i as f64 * step));
            }
            None => out.push(number(part)?),
        }
    }
    if out.is_empty() {
        bail!("no values in {spec:?}");
    }
    Ok(out)
}

fn number(text: &str) -> Result<f64> {
    match text.trim() {
        "inf" | "∞" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t.parse().with_context(|| format!("{t:?} is not a number")),
    }
}

/// Renders a value the way it was most likely typed.
pub fn format_value(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// A non-negative whole number, or `None` for infinity.
pub fn whole(v: f64, what: &str) -> Result<Option<u64>> {
    if v == f64::INFINITY {
        return Ok(None);
    }
    if !(v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64) {
        bail!("{what} must be a non-negative integer, got {}", format_value(v));
    }
    Ok(Some(v as u64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_excludes_the_end() {
        assert_eq!(parse_values("10..60:10").unwrap(), vec![10.0, 20.0, 30.0, 40.0, 50.0]);
        assert_eq!(parse_values("1..4").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_values("5..5:1").unwrap_err().to_string(), "no values in \"5..5:1\"");
    }

    #[test]
    fn fractional_steps_land_on_the_grid() {
        let v = parse_values("0..1:0.1").unwrap();
        assert_eq!(v.len(), 10);
        assert!((v[9] - 0.9).abs() < 1e-12);
    }

    #[test]
    fn lists_and_infinity() {
        assert_eq!(parse_values("8, 16,inf").unwrap(), vec![8.0, 16.0, f64::INFINITY]);
        assert_eq!(parse_values("10..30:10,inf").unwrap(), vec![10.0, 20.0, f64::INFINITY]);
    }

    #[test]
    fn bad_input() {
        assert!(parse_values("a..3").is_err());
        assert!(parse_values("1..3:0").is_err());
        assert!(parse_values("1..3:-1").is_err());
        assert!(parse_values("").is_err());
        assert!(whole(2.5, "T_SD").is_err());
        assert!(whole(-1.0, "T_SD").is_err());
        assert_eq!(whole(f64::INFINITY, "T_SD").unwrap(), None);
    }

    #[test]
    fn formatting() {
        assert_eq!(format_value(10.0), "10");
        assert_eq!(format_value(2.5), "2.5");
        assert_eq!(format_value(f64::INFINITY), "inf");
    }
}
