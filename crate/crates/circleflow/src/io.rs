//! Text formats for measures, grid densities, and trajectory artifacts.
//!
//! Numbers are written with 17 significant digits so every `f64` round-trips
//! bit-exactly; loaders reject malformed headers, count mismatches and
//! non-finite entries with the offending line in the message.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use circleflow_core::dper2_quantile;
use circleflow_core::jko::FlowTrajectory;
use circleflow_core::measure::{CellMeasure, GridDensity};

/// 17-significant-digit scientific notation; lossless for `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub const MEASURE_HEADER: &str = "circleflow-measure v1";
pub const GRID_HEADER: &str = "circleflow-grid v1";

/// Serialize a measure: header line, then one `<left> <spacing>` pair per cell.
pub fn measure_to_string(m: &CellMeasure) -> String {
    let mut out = String::with_capacity(40 * (m.len() + 1));
    let _ = writeln!(out, "{MEASURE_HEADER} N={}", m.len());
    for (l, w) in m.lefts().iter().zip(m.widths()) {
        let _ = writeln!(out, "{} {}", fmt17(*l), fmt17(*w));
    }
    out
}

pub fn measure_from_str(text: &str) -> Result<CellMeasure> {
    let mut lines = text.lines();
    let header = lines.next().context("measure file is empty")?;
    let n = parse_header(header, MEASURE_HEADER, "N")
        .with_context(|| format!("measure header line 1: {header:?}"))?;
    let mut lefts = Vec::with_capacity(n);
    let mut widths = Vec::with_capacity(n);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            bail!("measure file line {lineno}: expected two numeric fields");
        };
        let l: f64 = a.parse().with_context(|| format!("measure file line {lineno}: bad left endpoint"))?;
        let w: f64 = b.parse().with_context(|| format!("measure file line {lineno}: bad spacing"))?;
        if !l.is_finite() || !w.is_finite() {
            bail!("measure file line {lineno}: non-finite entry");
        }
        lefts.push(l);
        widths.push(w);
    }
    if lefts.len() != n {
        bail!("measure file: header declares N={n} cells but {} rows follow", lefts.len());
    }
    CellMeasure::with_boundaries(lefts, widths).map_err(|e| anyhow::anyhow!("measure file: {e}"))
}

pub fn write_measure(path: &Path, m: &CellMeasure) -> Result<()> {
    fs::write(path, measure_to_string(m)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_measure(path: &Path) -> Result<CellMeasure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    measure_from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Serialize a grid density: header line, then one value per node.
pub fn grid_to_string(g: &GridDensity) -> String {
    let mut out = String::with_capacity(24 * (g.len() + 1));
    let _ = writeln!(out, "{GRID_HEADER} M={}", g.len());
    for v in g.values() {
        let _ = writeln!(out, "{}", fmt17(*v));
    }
    out
}

pub fn grid_from_str(text: &str) -> Result<GridDensity> {
    let mut lines = text.lines();
    let header = lines.next().context("grid file is empty")?;
    let m = parse_header(header, GRID_HEADER, "M")
        .with_context(|| format!("grid header line 1: {header:?}"))?;
    let mut values = Vec::with_capacity(m);
    for (idx, line) in lines.enumerate() {
        let lineno = idx + 2;
        if line.trim().is_empty() {
            continue;
        }
        let v: f64 =
            line.trim().parse().with_context(|| format!("grid file line {lineno}: bad value"))?;
        if !v.is_finite() {
            bail!("grid file line {lineno}: non-finite entry");
        }
        values.push(v);
    }
    if values.len() != m {
        bail!("grid file: header declares M={m} values but {} rows follow", values.len());
    }
    GridDensity::new(values).map_err(|e| anyhow::anyhow!("grid file: {e}"))
}

pub fn write_grid(path: &Path, g: &GridDensity) -> Result<()> {
    fs::write(path, grid_to_string(g)).with_context(|| format!("writing {}", path.display()))
}

pub fn read_grid(path: &Path) -> Result<GridDensity> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    grid_from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_header(line: &str, expected: &str, key: &str) -> Result<usize> {
    let rest = line
        .strip_prefix(expected)
        .with_context(|| format!("expected header starting with {expected:?}"))?;
    let rest = rest.trim();
    let value = rest
        .strip_prefix(&format!("{key}="))
        .with_context(|| format!("expected `{key}=<count>` after the format tag"))?;
    value.parse::<usize>().with_context(|| format!("bad {key} count {value:?}"))
}

/// Render the per-step series of a trajectory as CSV.
///
/// Columns: `t, entropy, interaction, total_energy, dist_to_minimizer,
/// step_cost, inner_iterations`.
pub fn series_csv(traj: &FlowTrajectory) -> String {
    let n = traj.snapshots()[0].len();
    let uniform = CellMeasure::uniform(n).expect("trajectory cell count is at least 2");
    let mut out =
        String::from("t,entropy,interaction,total_energy,dist_to_minimizer,step_cost,inner_iterations\n");
    for k in 0..traj.len() {
        let e = &traj.energies()[k];
        let dist = dper2_quantile(&traj.snapshots()[k], &uniform).sqrt();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            fmt17(traj.times()[k]),
            fmt17(e.entropy),
            fmt17(e.interaction),
            fmt17(e.total),
            fmt17(dist),
            fmt17(traj.step_costs()[k]),
            traj.inner_iterations()[k],
        );
    }
    out
}

/// Write the standard trajectory artifact set into `dir`: numbered snapshots
/// plus `series.csv`.
pub fn write_trajectory(dir: &Path, traj: &FlowTrajectory, snapshot_every: usize) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("series.csv"), series_csv(traj))?;
    let every = snapshot_every.max(1);
    for k in (0..traj.len()).step_by(every) {
        write_measure(&dir.join(format!("snap_{k:06}.msr")), &traj.snapshots()[k])?;
    }
    Ok(())
}
