//! Parsing of `--sweep` and `--counts` values.

use std::fmt;

/// Variables a sweep may range over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    R,
    T,
    M(usize),
    N,
}

impl Var {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s.trim() {
            "r" => Ok(Var::R),
            "t" => Ok(Var::T),
            "n" => Ok(Var::N),
            "m1" => Ok(Var::M(0)),
            "m2" => Ok(Var::M(1)),
            "m3" => Ok(Var::M(2)),
            "m4" => Ok(Var::M(3)),
            other => Err(format!("unknown sweep variable `{other}` (expected r, t, m1..m4 or n)")),
        }
    }

    pub fn is_integer(self) -> bool {
        matches!(self, Var::M(_) | Var::N)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::R => write!(f, "r"),
            Var::T => write!(f, "t"),
            Var::N => write!(f, "n"),
            Var::M(k) => write!(f, "m{}", k + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: Var,
    pub values: Vec<f64>,
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// `a:b:step`, `a:b` (unit step), `a..b` (unit step, integers) or a
/// comma-separated list.
pub fn parse_range(var: Var, text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let values = if let Some((a, b)) = text.split_once("..") {
        range(number(a)?, number(b)?, 1.0)?
    } else if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [a, b] => range(number(a)?, number(b)?, 1.0)?,
            [a, b, step] => range(number(a)?, number(b)?, number(step)?)?,
            _ => return Err(format!("bad range `{text}`; expected a:b:step")),
        }
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() {
        return Err(format!("empty range `{text}`"));
    }
    if var.is_integer() && values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
        return Err(format!("{var} takes non-negative integers, got `{text}`"));
    }
    Ok(values)
}

fn range(a: f64, b: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0) {
        return Err(format!("step must be positive, got {step}"));
    }
    if b < a {
        return Err(format!("range end {b} is below its start {a}"));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    // snap to the step's decimal grid so 0.1·3 prints as 0.3
    Ok((0..=n).map(|k| round12(a + k as f64 * step)).collect())
}

fn round12(x: f64) -> f64 {
    let scaled = (x * 1e12).round() / 1e12;
    if (scaled - x).abs() <= 1e-12 * x.abs().max(1.0) {
        scaled
    } else {
        x
    }
}

/// `VAR=range`.
pub fn parse_sweep(text: &str) -> Result<Sweep, String> {
    let (var, range) = text
        .split_once('=')
        .ok_or_else(|| format!("expected VAR=a:b:step, got `{text}`"))?;
    let var = Var::parse(var)?;
    Ok(Sweep {
        values: parse_range(var, range)?,
        var,
    })
}

/// Photon counts from `m1=..,m2=..`. At most one entry may be a range; it
/// is returned as a sweep.
pub fn parse_counts(text: &str) -> Result<([u32; 4], Option<Sweep>), String> {
    let mut counts = [0u32; 4];
    let mut sweep = None;
    // split on commas that start a new `mK=` entry so lists stay intact
    let mut entries: Vec<String> = Vec::new();
    for piece in text.split(',') {
        if piece.contains('=') || entries.is_empty() {
            entries.push(piece.to_string());
        } else if let Some(last) = entries.last_mut() {
            last.push(',');
            last.push_str(piece);
        }
    }
    for entry in entries {
        let (name, value) = entry
            .split_once('=')
            .ok_or_else(|| format!("expected mK=value in `{entry}`"))?;
        let Var::M(k) = Var::parse(name)? else {
            return Err(format!("`{name}` is not a photon count (m1..m4)"));
        };
        let value = value.trim();
        if value.contains("..") || value.contains(':') || value.contains(',') {
            if sweep.is_some() {
                return Err("only one count may be a range".into());
            }
            sweep = Some(Sweep {
                var: Var::M(k),
                values: parse_range(Var::M(k), value)?,
            });
        } else {
            counts[k] = value
                .parse()
                .map_err(|_| format!("m{} must be a non-negative integer, got `{value}`", k + 1))?;
        }
    }
    Ok((counts, sweep))
}

/// `M1,M2` table row.
pub fn parse_row(text: &str) -> Result<(u32, u32), String> {
    let (a, b) = text
        .split_once(',')
        .ok_or_else(|| format!("expected M1,M2, got `{text}`"))?;
    let p = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| format!("`{s}` is not a non-negative integer"))
    };
    Ok((p(a)?, p(b)?))
}

/// Shortest decimal form, with floating noise beyond 12 places removed.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    let s = format!("{:.12}", round12(x));
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Fixed-precision value column; NaN becomes `nan`.
pub fn fmt_value(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        let s = format!("{x:.12}");
        match s.strip_prefix('-') {
            Some(rest) if rest.bytes().all(|b| b == b'0' || b == b'.') => rest.into(),
            _ => s,
        }
    }
}
