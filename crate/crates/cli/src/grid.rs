//! `--grid` specifications for the model command.
//!
//! Comma-separated axes, each `name=value` or `name=start:end:count[:log]`,
//! with names `T` (K), `J` (W/m²) and `f` (Hz). `J` defaults to 0 and `f` to
//! the configured Brillouin frequency; `T` is required.

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub temperatures: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Ordinary frequencies [Hz]; `None` means the configured mode.
    pub frequencies: Option<Vec<f64>>,
}

fn err(msg: impl Into<String>) -> CliError {
    CliError::Grid(msg.into())
}

fn parse_axis(name: &str, body: &str, allow_zero: bool) -> Result<Vec<f64>, CliError> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|e| err(format!("{name}: `{s}`: {e}")));
    let parts: Vec<&str> = body.split(':').collect();
    let values = match parts.as_slice() {
        [v] => vec![num(v)?],
        [a, b, n] | [a, b, n, _] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|e| err(format!("{name}: count `{n}`: {e}")))?;
            let log = match parts.get(3).map(|s| s.trim()) {
                None | Some("lin") => false,
                Some("log") => true,
                Some(other) => return Err(err(format!("{name}: unknown spacing `{other}`"))),
            };
            if n == 0 {
                return Err(err(format!("{name}: empty axis")));
            }
            if log && !(a > 0.0 && b > 0.0) {
                return Err(err(format!("{name}: log spacing needs positive bounds")));
            }
            (0..n)
                .map(|i| {
                    let f = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                    if log {
                        a * (b / a).powf(f)
                    } else {
                        a + (b - a) * f
                    }
                })
                .collect()
        }
        _ => return Err(err(format!("{name}: expected value or start:end:count[:log]"))),
    };
    for &v in &values {
        let ok = v.is_finite() && if allow_zero { v >= 0.0 } else { v > 0.0 };
        if !ok {
            let bound = if allow_zero { "non-negative" } else { "strictly positive" };
            return Err(err(format!("{name}: values must be finite and {bound}, got {v}")));
        }
    }
    Ok(values)
}

impl GridSpec {
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let (mut t, mut j, mut f) = (None, None, None);
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, body) = item.split_once('=').ok_or_else(|| err(format!("`{item}`: expected name=spec")))?;
            let slot = match name.trim() {
                "T" => &mut t,
                "J" => &mut j,
                "f" => &mut f,
                other => return Err(err(format!("unknown axis `{other}` (use T, J, f)"))),
            };
            if slot.is_some() {
                return Err(err(format!("axis `{name}` given twice")));
            }
            *slot = Some(parse_axis(name.trim(), body, name.trim() == "J")?);
        }
        let temperatures = t.ok_or_else(|| err("the T axis is required"))?;
        Ok(Self { temperatures, intensities: j.unwrap_or_else(|| vec![0.0]), frequencies: f })
    }
}
