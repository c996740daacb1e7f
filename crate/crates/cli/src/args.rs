//! Text forms of weights, time-step rules, boundaries and number lists.
//! The same grammar is used on the command line and in config files.

use bofem::{Boundary, CflMode, WeightFunction};

fn number(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{what}: '{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{what}: '{s}' is not finite"))
    }
}

/// `unit`, `linear:a,b` (φ = a + b x) or `cutoff:R`.
pub fn parse_weight(s: &str) -> Result<WeightFunction, String> {
    let s = s.trim();
    if s == "unit" {
        return Ok(WeightFunction::Unit);
    }
    if let Some(rest) = s.strip_prefix("linear:") {
        let parts: Vec<&str> = rest.split(',').collect();
        if parts.len() != 2 {
            return Err(format!("weight '{s}': expected linear:a,b"));
        }
        return Ok(WeightFunction::Linear {
            intercept: number(parts[0], "weight")?,
            slope: number(parts[1], "weight")?,
        });
    }
    if let Some(rest) = s.strip_prefix("cutoff:") {
        let radius = number(rest, "weight")?;
        if radius <= 0.0 {
            return Err(format!("weight '{s}': cut-off radius must be positive"));
        }
        return Ok(WeightFunction::SmoothCutoff { radius });
    }
    Err(format!("unknown weight '{s}' (expected unit, linear:a,b or cutoff:R)"))
}

pub fn format_weight(w: &WeightFunction) -> String {
    match *w {
        WeightFunction::Unit => "unit".into(),
        WeightFunction::Linear { intercept, slope } => format!("linear:{intercept},{slope}"),
        WeightFunction::SmoothCutoff { radius } => format!("cutoff:{radius}"),
    }
}

/// `periodic`, `full-line` or `theory:λ`.
pub fn parse_dt_mode(s: &str) -> Result<CflMode, String> {
    match s.trim() {
        "periodic" => Ok(CflMode::Periodic),
        "full-line" => Ok(CflMode::FullLine),
        other => match other.strip_prefix("theory:") {
            Some(l) => {
                let lambda = number(l, "dt mode")?;
                if lambda <= 0.0 {
                    return Err(format!("dt mode '{other}': lambda must be positive"));
                }
                Ok(CflMode::Theory { lambda })
            }
            None => Err(format!("unknown dt mode '{other}' (expected periodic, full-line or theory:LAMBDA)")),
        },
    }
}

pub fn format_dt_mode(m: &CflMode) -> String {
    match *m {
        CflMode::Periodic => "periodic".into(),
        CflMode::FullLine => "full-line".into(),
        CflMode::Theory { lambda } => format!("theory:{lambda}"),
    }
}

pub fn parse_boundary(s: &str) -> Result<Boundary, String> {
    match s.trim() {
        "periodic" => Ok(Boundary::Periodic),
        "free" => Ok(Boundary::Free),
        other => Err(format!("unknown boundary '{other}' (expected periodic or free)")),
    }
}

pub fn format_boundary(b: Boundary) -> String {
    match b {
        Boundary::Periodic => "periodic".into(),
        Boundary::Free => "free".into(),
    }
}

pub fn parse_times(s: &str) -> Result<Vec<f64>, String> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(|p| number(p, "time list")).collect()
}

pub fn parse_sizes(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|_| format!("element list: '{p}' is not a positive integer")))
        .collect()
}

pub fn parse_domain(s: &str) -> Result<[f64; 2], String> {
    let v = parse_times(s)?;
    match v.as_slice() {
        [a, b] if a < b => Ok([*a, *b]),
        _ => Err(format!("domain '{s}': expected LEFT,RIGHT with LEFT < RIGHT")),
    }
}
