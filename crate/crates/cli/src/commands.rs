use std::fmt;
use std::io::Write;

use ggmlab_core::canonical::ggm_fock;
use ggmlab_core::fock::{
    build_added_crystal, build_added_fmsv, build_crystal_fock, build_fmsv_fock, build_subtracted_crystal,
    build_subtracted_fmsv, read_state, write_state, FockState, PhotonOpSpec, Truncation,
};
use ggmlab_core::gaussian::{crystal_cm, detect_kinks, fmsv_cm, ggm_gaussian, refine_kink, tritter_cm, CrystalParams};
use ggmlab_core::nongauss::{fmsv_report, TABLE_ROWS};
use ggmlab_core::{Error, GgmResult};
use rayon::prelude::*;

use crate::spec::{fmt_num, fmt_value, parse_counts, parse_row, parse_sweep, Sweep, Var};
use crate::{
    CompareArgs, CompareOp, DumpArgs, Engine, Family, FreezeArgs, GgmArgs, Ladder, Op, Pairing, StateArgs,
    TableArgs, TruncArgs,
};

/// Freezing holds when the GGM spread is below this.
pub const FREEZE_TOL: f64 = 1e-9;
// constrained sweeps above this total get a memory warning
const LARGE_TOTAL: u32 = 12;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(m) => CliError::Usage(m),
            other => CliError::Compute(other),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn truncation(t: &TruncArgs) -> CliResult<Truncation> {
    if !(t.eps_tail > 0.0 && t.eps_tail < 1.0) {
        return usage(format!("--eps-tail must lie in (0, 1), got {}", t.eps_tail));
    }
    Ok(Truncation {
        eps_tail: t.eps_tail,
        max_principal: t.max_principal,
        fixed_principal: None,
    })
}

fn ladder_spec(kind: Ladder, counts: &[u32]) -> PhotonOpSpec {
    match kind {
        Ladder::Add => PhotonOpSpec::add(counts),
        Ladder::Subtract => PhotonOpSpec::subtract(counts),
    }
}

fn fmsv_state(r: f64, kind: Ladder, counts: [u32; 4], trunc: &Truncation) -> CliResult<FockState> {
    Ok(match kind {
        Ladder::Add => build_added_fmsv(r, counts, trunc)?,
        Ladder::Subtract => build_subtracted_fmsv(r, counts, trunc)?,
    })
}

/// One grid point of a `ggm` run.
#[derive(Debug, Clone)]
struct Point {
    label: String,
    r: f64,
    crystal: CrystalParams,
    counts: [u32; 4],
}

impl StateArgs {
    fn crystal(&self) -> CrystalParams {
        CrystalParams::new(self.gamma1, self.gamma2, self.t).with_phases(self.phi2, self.phi3)
    }

    fn n_modes(&self) -> usize {
        match self.family {
            Some(Family::Tritter) | Some(Family::Crystal) => 3,
            _ => 4,
        }
    }

    fn fock_state(&self, p: &Point, trunc: &Truncation) -> CliResult<FockState> {
        let c3 = [p.counts[0], p.counts[1], p.counts[2]];
        Ok(match (self.family, self.op) {
            (Some(Family::Fmsv), Op::None) => build_fmsv_fock(p.r, trunc)?,
            (Some(Family::Fmsv), Op::Add) => build_added_fmsv(p.r, p.counts, trunc)?,
            (Some(Family::Fmsv), Op::Subtract) => build_subtracted_fmsv(p.r, p.counts, trunc)?,
            (Some(Family::Crystal), Op::None) => build_crystal_fock(&p.crystal, trunc)?,
            (Some(Family::Crystal), Op::Add) => build_added_crystal(&p.crystal, c3, trunc)?,
            (Some(Family::Crystal), Op::Subtract) => build_subtracted_crystal(&p.crystal, c3, trunc)?,
            (Some(Family::Tritter), _) => return usage("the tritter family has no Fock-space builder; use --engine gaussian"),
            (None, _) => return usage("--family is required"),
        })
    }

    fn gaussian(&self, p: &Point) -> CliResult<GgmResult> {
        let cm = match self.family {
            Some(Family::Tritter) => tritter_cm(p.r)?,
            Some(Family::Fmsv) => fmsv_cm(p.r)?,
            Some(Family::Crystal) => crystal_cm(&p.crystal)?,
            None => return usage("--family is required"),
        };
        Ok(ggm_gaussian(&cm)?)
    }
}

/// Validated points of a `ggm` run and the swept variable, if any.
fn ggm_points(a: &GgmArgs) -> CliResult<(Vec<Point>, Option<Var>)> {
    let s = &a.state;
    let family = s.family.ok_or_else(|| CliError::Usage("--family is required (or --state-file)".into()))?;
    let (counts, count_sweep) = match &s.counts {
        Some(text) => parse_counts(text).map_err(CliError::Usage)?,
        None => ([0; 4], None),
    };
    let sweep = match (&a.sweep, count_sweep) {
        (Some(_), Some(_)) => return usage("give either --sweep or a count range, not both"),
        (Some(text), None) => Some(parse_sweep(text).map_err(CliError::Usage)?),
        (None, cs) => cs,
    };
    let n_modes = s.n_modes();
    if s.op == Op::None && (counts.iter().any(|&c| c > 0) || matches!(sweep, Some(Sweep { var: Var::M(_), .. }))) {
        return usage("photon counts need --op add or --op subtract");
    }
    if counts[n_modes..].iter().any(|&c| c > 0) {
        return usage(format!("the {family:?} family has {n_modes} modes"));
    }
    if let Some(sw) = &sweep {
        let ok = match sw.var {
            Var::R => family != Family::Crystal,
            Var::T => family == Family::Crystal,
            Var::M(k) => k < n_modes,
            Var::N => false,
        };
        if !ok {
            return usage(format!("cannot sweep {} for the {family:?} family", sw.var));
        }
    }
    let base = Point {
        label: match family {
            Family::Crystal => format!("t={}", fmt_num(s.t)),
            _ => format!("r={}", fmt_num(s.r)),
        },
        r: s.r,
        crystal: s.crystal(),
        counts,
    };
    let Some(sw) = sweep else {
        return Ok((vec![base], None));
    };
    let points = sw
        .values
        .iter()
        .map(|&v| {
            let mut p = base.clone();
            p.label = fmt_num(v);
            match sw.var {
                Var::R => p.r = v,
                Var::T => p.crystal = p.crystal.at(v),
                Var::M(k) => p.counts[k] = v as u32,
                Var::N => unreachable!("rejected above"),
            }
            p
        })
        .collect();
    Ok((points, Some(sw.var)))
}

struct Row {
    gaussian: Option<GgmResult>,
    fock: Option<(GgmResult, f64)>,
}

pub fn ggm(a: &GgmArgs, out: &mut dyn Write) -> CliResult<u8> {
    let trunc = truncation(&a.state.trunc)?;
    if let Some(path) = &a.state_file {
        if a.engine.is_some_and(|e| e != Engine::Fock) {
            return usage("a state file can only be evaluated with --engine fock");
        }
        let file = std::fs::File::open(path)
            .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
        let state = read_state(std::io::BufReader::new(file))?;
        let g = ggm_fock(&state)?;
        writeln!(out, "param,ggm,argmax_partition,engine,tail_bound")?;
        writeln!(
            out,
            "state,{},{},fock,{:.3e}",
            fmt_value(g.value),
            g.argmax_partition,
            state.tail_bound()
        )?;
        return Ok(0);
    }

    let (points, var) = ggm_points(a)?;
    let s = &a.state;
    let engine = a.engine.unwrap_or(if s.op == Op::None { Engine::Gaussian } else { Engine::Fock });
    if engine != Engine::Fock && s.op != Op::None {
        return usage("the gaussian engine only handles Gaussian states; use --engine fock with --op");
    }
    if engine != Engine::Gaussian && s.family == Some(Family::Tritter) {
        return usage("the tritter family has no Fock-space builder; use --engine gaussian");
    }

    let rows = points
        .par_iter()
        .map(|p| -> CliResult<Row> {
            let gaussian = match engine {
                Engine::Fock => None,
                _ => Some(s.gaussian(p)?),
            };
            let fock = match engine {
                Engine::Gaussian => None,
                _ => {
                    let state = s.fock_state(p, &trunc)?;
                    Some((ggm_fock(&state)?, state.tail_bound()))
                }
            };
            Ok(Row { gaussian, fock })
        })
        .collect::<CliResult<Vec<_>>>()?;

    if engine == Engine::Both {
        writeln!(out, "param,ggm_gaussian,ggm_fock,argmax_partition,engine,tail_bound")?;
    } else {
        writeln!(out, "param,ggm,argmax_partition,engine,tail_bound")?;
    }
    let mut max_diff = 0.0f64;
    for (p, row) in points.iter().zip(&rows) {
        match (&row.gaussian, &row.fock) {
            (Some(g), None) => writeln!(out, "{},{},{},gaussian,{:.3e}", p.label, fmt_value(g.value), g.argmax_partition, 0.0)?,
            (None, Some((f, tail))) => {
                writeln!(out, "{},{},{},fock,{tail:.3e}", p.label, fmt_value(f.value), f.argmax_partition)?
            }
            (Some(g), Some((f, tail))) => {
                max_diff = max_diff.max((g.value - f.value).abs());
                writeln!(
                    out,
                    "{},{},{},{},both,{tail:.3e}",
                    p.label,
                    fmt_value(g.value),
                    fmt_value(f.value),
                    g.argmax_partition
                )?
            }
            (None, None) => unreachable!("every engine computes something"),
        }
    }
    if engine == Engine::Both {
        writeln!(out, "# max_abs_diff={max_diff:.3e}")?;
    }
    if s.family == Some(Family::Crystal) && var == Some(Var::T) && points.len() > 1 && engine != Engine::Fock {
        annotate_kinks(s, &points, &rows, out)?;
    }
    Ok(0)
}

fn annotate_kinks(s: &StateArgs, points: &[Point], rows: &[Row], out: &mut dyn Write) -> CliResult<()> {
    let series: Vec<(f64, GgmResult)> = points
        .iter()
        .zip(rows)
        .filter_map(|(p, r)| r.gaussian.clone().map(|g| (p.crystal.t, g)))
        .collect();
    if series.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        log::warn!("kink annotations need increasing t values; skipped");
        return Ok(());
    }
    let base = s.crystal();
    for k in detect_kinks(&series)? {
        let eval = |t: f64| ggm_gaussian(&crystal_cm(&base.at(t))?);
        match refine_kink(&k, 1e-10, eval) {
            Ok(r) => writeln!(
                out,
                "# kink t in [{},{}]: {} -> {} crossing at t={:.10} gap={:.1e}",
                fmt_num(k.t_lo),
                fmt_num(k.t_hi),
                k.before,
                k.after,
                r.t,
                r.gap
            )?,
            Err(e) => writeln!(
                out,
                "# kink t in [{},{}]: {} -> {} (not refined: {e})",
                fmt_num(k.t_lo),
                fmt_num(k.t_hi),
                k.before,
                k.after
            )?,
        }
    }
    Ok(())
}

pub fn nongauss_table(a: &TableArgs, out: &mut dyn Write) -> CliResult<u8> {
    let trunc = truncation(&a.trunc)?;
    let rows: Vec<(u32, u32)> = if a.rows.is_empty() {
        TABLE_ROWS.to_vec()
    } else {
        a.rows.iter().map(|r| parse_row(r)).collect::<Result<_, _>>().map_err(CliError::Usage)?
    };
    let reports = rows
        .par_iter()
        .map(|&(m1, m2)| -> CliResult<_> {
            let counts = [m1, m2, 0, 0];
            let add = fmsv_report(a.r, &PhotonOpSpec::add(&counts), &trunc)?;
            let sub = fmsv_report(a.r, &PhotonOpSpec::subtract(&counts), &trunc)?;
            Ok((add, sub))
        })
        .collect::<CliResult<Vec<_>>>()?;
    writeln!(out, "m1,m2,delta_add,f_add,delta_sub,f_sub")?;
    for (&(m1, m2), (add, sub)) in rows.iter().zip(&reports) {
        if add.f_g.is_nan() || sub.f_g.is_nan() {
            log::warn!("row ({m1},{m2}): baseline GGM vanishes at r = {}, f reported as nan", a.r);
        }
        writeln!(
            out,
            "{m1},{m2},{},{},{},{}",
            fmt_value(add.delta_ng),
            fmt_value(add.f_g),
            fmt_value(sub.delta_ng),
            fmt_value(sub.f_g)
        )?;
    }
    Ok(0)
}

pub fn freeze_check(a: &FreezeArgs, out: &mut dyn Write) -> CliResult<u8> {
    let trunc = truncation(&a.trunc)?;
    if a.total > LARGE_TOTAL {
        log::warn!("M = {} builds large truncated states; memory use grows quickly", a.total);
    }
    let values = (0..=a.total)
        .into_par_iter()
        .map(|m1| -> CliResult<f64> {
            let state = fmsv_state(a.r, a.op, [m1, a.m2, a.total - m1, 0], &trunc)?;
            Ok(ggm_fock(&state)?.value)
        })
        .collect::<CliResult<Vec<_>>>()?;
    writeln!(out, "m1,m3,ggm")?;
    for (m1, v) in (0..=a.total).zip(&values) {
        writeln!(out, "{m1},{},{}", a.total - m1, fmt_value(*v))?;
    }
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let spread = hi - lo;
    let frozen = spread < FREEZE_TOL;
    writeln!(out, "# spread={spread:.3e} frozen={frozen}")?;
    Ok(if frozen { 0 } else { 1 })
}

fn placed(pairing: Pairing, m1: u32, n: u32) -> [u32; 4] {
    match pairing {
        Pairing::Adjacent => [m1, n, 0, 0],
        Pairing::Alternate => [m1, 0, n, 0],
    }
}

fn ggm_of(r: f64, kind: Ladder, counts: [u32; 4], trunc: &Truncation) -> CliResult<f64> {
    let spec = ladder_spec(kind, &counts);
    let state = if spec.is_identity() {
        build_fmsv_fock(r, trunc)?
    } else {
        fmsv_state(r, kind, counts, trunc)?
    };
    Ok(ggm_fock(&state)?.value)
}

pub fn compare_modes(a: &CompareArgs, out: &mut dyn Write) -> CliResult<u8> {
    let trunc = truncation(&a.trunc)?;
    let cells: Vec<(u32, u32)> = if let Some(m) = a.three_mode {
        if a.op == CompareOp::DiffAltAdj {
            return usage("diff-alt-adj compares two-mode pairings; it does not apply to --three-mode");
        }
        (0..=m).flat_map(|m1| (0..=m - m1).map(move |m2| (m1, m2))).collect()
    } else if let Some(m) = a.constrained {
        (0..=m).map(|m1| (m1, m - m1)).collect()
    } else {
        (0..=a.max).flat_map(|m1| (0..=a.max).map(move |n| (m1, n))).collect()
    };
    if let Some(m) = a.three_mode.or(a.constrained) {
        if m > LARGE_TOTAL {
            log::warn!("M = {m} builds large truncated states; memory use grows quickly");
        }
    }
    let three = a.three_mode;
    let values = cells
        .par_iter()
        .map(|&(m1, n)| -> CliResult<f64> {
            let counts = match three {
                Some(m) => [m1, n, m - m1 - n, 0],
                None => placed(a.pairing, m1, n),
            };
            match a.op {
                CompareOp::Add => ggm_of(a.r, Ladder::Add, counts, &trunc),
                CompareOp::Subtract => ggm_of(a.r, Ladder::Subtract, counts, &trunc),
                CompareOp::DiffSubAdd => {
                    Ok(ggm_of(a.r, Ladder::Subtract, counts, &trunc)? - ggm_of(a.r, Ladder::Add, counts, &trunc)?)
                }
                CompareOp::DiffAltAdj => Ok(ggm_of(a.r, a.ladder, placed(Pairing::Alternate, m1, n), &trunc)?
                    - ggm_of(a.r, a.ladder, placed(Pairing::Adjacent, m1, n), &trunc)?),
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    writeln!(out, "m1,m2_or_n,value")?;
    for (&(m1, n), v) in cells.iter().zip(&values) {
        writeln!(out, "{m1},{n},{}", fmt_value(*v))?;
    }
    Ok(0)
}

pub fn dump_state(a: &DumpArgs, out: &mut dyn Write) -> CliResult<u8> {
    let s = &a.state;
    let trunc = truncation(&s.trunc)?;
    let (counts, sweep) = match &s.counts {
        Some(text) => parse_counts(text).map_err(CliError::Usage)?,
        None => ([0; 4], None),
    };
    if sweep.is_some() {
        return usage("dump-state takes fixed photon counts");
    }
    if s.op == Op::None && counts.iter().any(|&c| c > 0) {
        return usage("photon counts need --op add or --op subtract");
    }
    let point = Point {
        label: String::new(),
        r: s.r,
        crystal: s.crystal(),
        counts,
    };
    let state = s.fock_state(&point, &trunc)?;
    match &a.out {
        Some(path) => {
            let file = std::fs::File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            let mut w = std::io::BufWriter::new(file);
            write_state(&state, &mut w)?;
            w.flush()?;
        }
        None => write_state(&state, out)?,
    }
    Ok(0)
}
