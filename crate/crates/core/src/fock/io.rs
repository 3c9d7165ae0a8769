//! Line-oriented text format for Fock states.
//!
//! ```text
//! # ggmlab fock state
//! n_modes 2
//! cutoffs 3 1
//! tail 0.0000000000000000e0
//! 0 0 7.0710678118654746e-1 0.0000000000000000e0
//! 3 1 0.0000000000000000e0 7.0710678118654746e-1
//! ```
//!
//! One amplitude per line (`n1 … nN re im`). Floats are written with 17
//! significant digits, which round-trips every `f64` exactly.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::FockState;
use crate::error::{Error, Result};

const MAGIC: &str = "# ggmlab fock state";

pub fn write_state<W: Write>(state: &FockState, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    writeln!(out, "n_modes {}", state.n_modes())?;
    let cutoffs: Vec<String> = state.cutoffs().iter().map(u32::to_string).collect();
    writeln!(out, "cutoffs {}", cutoffs.join(" "))?;
    writeln!(out, "tail {:.16e}", state.tail_bound())?;
    for (occ, a) in state.iter() {
        for n in occ {
            write!(out, "{n} ")?;
        }
        writeln!(out, "{:.16e} {:.16e}", a.re, a.im)?;
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn header_value<'a>(line: Option<(usize, &'a str)>, name: &str) -> Result<(usize, &'a str)> {
    let (no, text) = line.ok_or_else(|| parse_err(0, format!("missing `{name}` header")))?;
    text.strip_prefix(name)
        .map(|rest| (no, rest.trim()))
        .ok_or_else(|| parse_err(no, format!("expected `{name}`")))
}

pub fn read_state<R: BufRead>(input: R) -> Result<FockState> {
    let lines: Vec<String> = input
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| parse_err(0, e.to_string()))?;
    let mut it = lines
        .iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    match it.next() {
        Some((_, l)) if l == MAGIC => {}
        Some((no, _)) => return Err(parse_err(no, "missing magic header")),
        None => return Err(parse_err(0, "empty input")),
    }
    let (no, v) = header_value(it.next(), "n_modes")?;
    let n_modes: usize = v.parse().map_err(|_| parse_err(no, "bad n_modes"))?;
    let (no, v) = header_value(it.next(), "cutoffs")?;
    let cutoffs: Vec<u32> = v
        .split_whitespace()
        .map(str::parse)
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(no, "bad cutoffs"))?;
    if cutoffs.len() != n_modes {
        return Err(parse_err(no, "cutoff count does not match n_modes"));
    }
    let (no, v) = header_value(it.next(), "tail")?;
    let tail: f64 = v.parse().map_err(|_| parse_err(no, "bad tail"))?;

    let mut amps = Vec::new();
    for (no, line) in it {
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != n_modes + 2 {
            return Err(parse_err(no, format!("expected {} fields", n_modes + 2)));
        }
        let occ: Vec<u32> = fields[..n_modes]
            .iter()
            .map(|f| f.parse())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| parse_err(no, "bad occupation"))?;
        let re: f64 = fields[n_modes].parse().map_err(|_| parse_err(no, "bad real part"))?;
        let im: f64 = fields[n_modes + 1].parse().map_err(|_| parse_err(no, "bad imaginary part"))?;
        amps.push((occ, Complex64::new(re, im)));
    }
    FockState::from_amplitudes(n_modes, amps, Some(cutoffs), tail)
}
