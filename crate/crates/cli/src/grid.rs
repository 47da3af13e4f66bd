use std::f64::consts::PI;

use crate::CliError;

/// Parses one angle or number: `0.25`, `pi`, `-pi/4`, `3pi/8`, `2*pi/3`.
pub fn parse_value(token: &str) -> Result<f64, CliError> {
    let t = token.trim().to_ascii_lowercase().replace(['*', ' '], "");
    let bad = || CliError::InvalidArgs(format!("cannot parse number {token:?}"));
    if t.is_empty() {
        return Err(bad());
    }
    let Some(pos) = t.find("pi") else {
        return t
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(bad);
    };
    let coeff = match &t[..pos] {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let rest = &t[pos + 2..];
    let denom = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    Ok(coeff * PI / denom)
}

/// Comma-separated list of values, or `start:stop:count` for an inclusive
/// linear grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (parse_value(start)?, parse_value(stop)?);
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| CliError::InvalidArgs(format!("bad grid count in {spec:?}")))?;
            linspace(a, b, n)
        }
        [_] => spec.split(',').map(parse_value).collect::<Result<_, _>>()?,
        _ => return Err(CliError::InvalidArgs(format!("bad grid {spec:?}"))),
    };
    if grid.is_empty() {
        return Err(CliError::InvalidArgs(format!("empty grid {spec:?}")));
    }
    Ok(grid)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// `0, pi/8, ..., pi`
pub fn default_theta_grid() -> Vec<f64> {
    (0..=8).map(|k| k as f64 * PI / 8.0).collect()
}

/// `0, pi/4, pi/2, 3pi/4`
pub fn default_phi_grid() -> Vec<f64> {
    (0..4).map(|k| k as f64 * PI / 4.0).collect()
}

/// `0, 0.05, ..., 1`
pub fn default_p_grid() -> Vec<f64> {
    (0..=20).map(|k| k as f64 / 20.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(parse_value("0.5").unwrap(), 0.5);
        assert_eq!(parse_value("pi").unwrap(), PI);
        assert_eq!(parse_value("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_value("3pi/8").unwrap(), 3.0 * PI / 8.0);
        assert_eq!(parse_value("2*pi/3").unwrap(), 2.0 * PI / 3.0);
        for bad in ["", "x", "pi/0", "pi/", "nan", "inf"] {
            assert!(parse_value(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0,pi/2").unwrap(), vec![0.0, PI / 2.0]);
        assert_eq!(
            parse_grid("0:1:5").unwrap(),
            vec![0.0, 0.25, 0.5, 0.75, 1.0]
        );
        assert_eq!(parse_grid("0:pi:9").unwrap(), default_theta_grid());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:2").is_err());
        assert_eq!(default_phi_grid().len(), 4);
        assert_eq!(default_p_grid().last(), Some(&1.0));
    }
}
