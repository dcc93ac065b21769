//! Long-form grid CSV.
//!
//! ```text
//! # skyloss-grid v1
//! l_km,d_km,theta_deg,f_thz,tau
//! 0,0.01,0,0.12,0.99999...
//! ```
//!
//! One row per cell. The writer emits rows with `l` outermost and `f`
//! innermost, every number with 17 significant digits, LF line endings.
//! [`read_grid`] requires that canonical order; [`ingest_external`] accepts
//! rows in any order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::ops::RangeInclusive;
use std::path::Path;

use ndarray::Array4;

use super::axes::{infer_step, ScenarioSpec, SubBand, DEFAULT_STEP_THZ};
use super::grid::{GridAxes, TransmittanceGrid};
use crate::error::{Error, Result};
use crate::fmt::g17;

pub const GRID_MAGIC: &str = "# skyloss-grid v1";
pub const GRID_HEADER: &str = "l_km,d_km,theta_deg,f_thz,tau";

const MAX_LISTED_MISSING: usize = 20;

/// Optional inclusive ranges restricting which rows are read.
///
/// Rows outside any given range are skipped before the grid is assembled,
/// which is how tests and quick runs carve sub-grids out of large files.
#[derive(Debug, Clone, Default)]
pub struct GridFilter {
    pub l_km: Option<RangeInclusive<f64>>,
    pub d_km: Option<RangeInclusive<f64>>,
    pub theta_deg: Option<RangeInclusive<f64>>,
    pub f_thz: Option<RangeInclusive<f64>>,
}

impl GridFilter {
    fn accepts(&self, row: &Row) -> bool {
        let inside = |r: &Option<RangeInclusive<f64>>, v: f64| r.as_ref().is_none_or(|r| r.contains(&v));
        inside(&self.l_km, row.coord[0])
            && inside(&self.d_km, row.coord[1])
            && inside(&self.theta_deg, row.coord[2])
            && inside(&self.f_thz, row.coord[3])
    }
}

#[derive(Debug, Clone, Copy)]
struct Row {
    line: usize,
    coord: [f64; 4],
    tau: f64,
}

fn fmt_coord(c: &[f64; 4]) -> String {
    format!("(l={} km, d={} km, theta={} deg, f={} THz)", c[0], c[1], c[2], c[3])
}

pub fn write_grid(grid: &TransmittanceGrid, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_grid_to(grid, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_grid_to<W: Write>(grid: &TransmittanceGrid, w: &mut W) -> std::io::Result<()> {
    writeln!(w, "{GRID_MAGIC}")?;
    writeln!(w, "{GRID_HEADER}")?;
    let axes = grid.axes();
    let fs: Vec<String> = axes.frequencies().iter().map(|&f| g17(f)).collect();
    let ts: Vec<String> = axes.thetas().iter().map(|&t| g17(t)).collect();
    let mut line = String::with_capacity(128);
    for (li, &l) in axes.altitudes().iter().enumerate() {
        let l = g17(l);
        for (di, &d) in axes.distances().iter().enumerate() {
            let d = g17(d);
            for (ti, t) in ts.iter().enumerate() {
                for (fi, f) in fs.iter().enumerate() {
                    line.clear();
                    line.push_str(&l);
                    line.push(',');
                    line.push_str(&d);
                    line.push(',');
                    line.push_str(t);
                    line.push(',');
                    line.push_str(f);
                    line.push(',');
                    line.push_str(&g17(grid.values()[[li, di, ti, fi]]));
                    line.push('\n');
                    w.write_all(line.as_bytes())?;
                }
            }
        }
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Reads a grid file written in canonical row order.
pub fn read_grid(path: impl AsRef<Path>) -> Result<TransmittanceGrid> {
    read_grid_from(open(path.as_ref())?, &GridFilter::default())
}

pub fn read_grid_filtered(path: impl AsRef<Path>, filter: &GridFilter) -> Result<TransmittanceGrid> {
    read_grid_from(open(path.as_ref())?, filter)
}

pub fn read_grid_from<R: Read>(reader: R, filter: &GridFilter) -> Result<TransmittanceGrid> {
    let rows = parse_rows(BufReader::new(reader), filter)?;
    let axes = build_axes(&rows)?;
    let n = axes.n_samples();
    for (i, row) in rows.iter().enumerate() {
        if i >= n {
            return Err(Error::Parse {
                line: row.line,
                reason: format!("unexpected extra row {}", fmt_coord(&row.coord)),
            });
        }
        let (l, d, t, f) = axes.coords(i);
        let expected = [l, d, t, f];
        if row.coord != expected {
            return Err(Error::Parse {
                line: row.line,
                reason: format!(
                    "expected {} in canonical order, found {} (missing or out-of-order row)",
                    fmt_coord(&expected),
                    fmt_coord(&row.coord)
                ),
            });
        }
    }
    if rows.len() < n {
        return Err(Error::MissingCells {
            count: n - rows.len(),
            listed: format!("file ends after {} of {} rows", rows.len(), n),
        });
    }
    let values = Array4::from_shape_vec(axes.shape(), rows.iter().map(|r| r.tau).collect())
        .expect("row count equals axis product");
    TransmittanceGrid::new(axes, values)
}

/// Reads a grid whose rows may appear in any order, e.g. an export from an
/// external radiative-transfer tool.
pub fn ingest_external(path: impl AsRef<Path>) -> Result<TransmittanceGrid> {
    ingest_external_from(open(path.as_ref())?, &GridFilter::default())
}

pub fn ingest_external_from<R: Read>(reader: R, filter: &GridFilter) -> Result<TransmittanceGrid> {
    let rows = parse_rows(BufReader::new(reader), filter)?;
    if rows.is_empty() {
        return Err(Error::invalid("grid file", "no data rows"));
    }

    // An axis value seen in far fewer rows than its siblings is a stray
    // coordinate rather than a grid line with a few missing cells.
    for axis in 0..4 {
        let mut counts: HashMap<u64, usize> = HashMap::new();
        for r in &rows {
            *counts.entry(r.coord[axis].to_bits()).or_default() += 1;
        }
        let max = counts.values().copied().max().unwrap_or(0);
        if let Some(r) = rows.iter().find(|r| counts[&r.coord[axis].to_bits()] * 2 < max) {
            return Err(Error::NonGrid {
                line: r.line,
                coord: fmt_coord(&r.coord),
            });
        }
    }

    let axes = build_axes(&rows)?;
    let [_, nd, nt, nf] = axes.shape();
    let index = |axis: &[f64], v: f64| {
        axis.binary_search_by(|a| a.total_cmp(&v))
            .expect("value is on its axis")
    };
    let mut slots: Vec<Option<(usize, f64)>> = vec![None; axes.n_samples()];
    for r in &rows {
        let flat = ((index(axes.altitudes(), r.coord[0]) * nd + index(axes.distances(), r.coord[1])) * nt
            + index(axes.thetas(), r.coord[2]))
            * nf
            + index(axes.frequencies(), r.coord[3]);
        if let Some((first, _)) = slots[flat] {
            return Err(Error::DuplicateCell {
                line: r.line,
                first,
                coord: fmt_coord(&r.coord),
            });
        }
        slots[flat] = Some((r.line, r.tau));
    }
    let missing: Vec<usize> = (0..slots.len()).filter(|&i| slots[i].is_none()).collect();
    if !missing.is_empty() {
        let listed = missing
            .iter()
            .take(MAX_LISTED_MISSING)
            .map(|&i| {
                let (l, d, t, f) = axes.coords(i);
                fmt_coord(&[l, d, t, f])
            })
            .collect::<Vec<_>>()
            .join("; ");
        return Err(Error::MissingCells {
            count: missing.len(),
            listed,
        });
    }
    let values = Array4::from_shape_vec(axes.shape(), slots.into_iter().map(|s| s.expect("filled").1).collect())
        .expect("slot count equals axis product");
    TransmittanceGrid::new(axes, values)
}

fn parse_rows<R: BufRead>(reader: R, filter: &GridFilter) -> Result<Vec<Row>> {
    let mut rows = Vec::new();
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next_line = |expect: &str| -> Result<()> {
        match lines.next() {
            Some((_, Ok(text))) if text.trim_end_matches('\r') == expect => Ok(()),
            Some((n, Ok(text))) => Err(Error::Parse {
                line: n,
                reason: format!("expected `{expect}`, found `{text}`"),
            }),
            Some((n, Err(e))) => Err(Error::Parse {
                line: n,
                reason: e.to_string(),
            }),
            None => Err(Error::Parse {
                line: 1,
                reason: format!("missing `{expect}` line"),
            }),
        }
    };
    next_line(GRID_MAGIC)?;
    next_line(GRID_HEADER)?;
    for (line, text) in lines {
        let text = text.map_err(|e| Error::Parse {
            line,
            reason: e.to_string(),
        })?;
        let text = text.trim_end_matches('\r');
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 5 fields, found {}", fields.len()),
            });
        }
        let mut nums = [0.0; 5];
        for (k, (slot, field)) in nums.iter_mut().zip(&fields).enumerate() {
            *slot = field.trim().parse::<f64>().map_err(|_| Error::Parse {
                line,
                reason: format!("field {} `{}` is not a number", k + 1, field),
            })?;
            if !slot.is_finite() {
                return Err(Error::Parse {
                    line,
                    reason: format!("field {} is not finite", k + 1),
                });
            }
        }
        let row = Row {
            line,
            coord: [nums[0], nums[1], nums[2], nums[3]],
            tau: nums[4],
        };
        if !(row.tau > 0.0 && row.tau <= 1.0) {
            return Err(Error::Parse {
                line,
                reason: format!("tau = {} is outside (0, 1]", row.tau),
            });
        }
        if filter.accepts(&row) {
            rows.push(row);
        }
    }
    Ok(rows)
}

fn unique_sorted(rows: &[Row], axis: usize) -> Vec<f64> {
    let mut v: Vec<f64> = rows.iter().map(|r| r.coord[axis]).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn build_axes(rows: &[Row]) -> Result<GridAxes> {
    if rows.is_empty() {
        return Err(Error::invalid("grid file", "no data rows"));
    }
    let altitudes = unique_sorted(rows, 0);
    let distances = unique_sorted(rows, 1);
    let thetas = unique_sorted(rows, 2);
    let frequencies = unique_sorted(rows, 3);

    if frequencies.len() > 2 {
        let step = (frequencies[frequencies.len() - 1] - frequencies[0]) / (frequencies.len() - 1) as f64;
        if let Some(w) = frequencies
            .windows(2)
            .find(|w| ((w[1] - w[0]) - step).abs() > 1e-6 * step)
        {
            let line = rows.iter().find(|r| r.coord[3] == w[1]).map_or(0, |r| r.line);
            return Err(Error::Parse {
                line,
                reason: format!(
                    "inconsistent frequency spacing: {} -> {} THz, expected step {step} THz",
                    w[0], w[1]
                ),
            });
        }
    }

    let scenario = ScenarioSpec::recognize(altitudes, distances, thetas)?;
    let band = match SubBand::recognize(&frequencies) {
        Some(b) => b,
        None => {
            let f_lo = frequencies[0];
            let (f_hi, step) = if frequencies.len() > 1 {
                let f_hi = frequencies[frequencies.len() - 1];
                (f_hi, infer_step(&frequencies))
            } else {
                (f_lo + DEFAULT_STEP_THZ, DEFAULT_STEP_THZ)
            };
            SubBand::new("custom", f_lo, f_hi, step)?
        }
    };
    GridAxes::with_frequencies(scenario, band, frequencies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const FIXTURE: &str = "# skyloss-grid v1
l_km,d_km,theta_deg,f_thz,tau
0,0.5,45,0.2,0.9
0,0.5,45,0.25,0.8
1,0.5,45,0.2,0.95
1,0.5,45,0.25,0.85
";

    fn read_str(s: &str) -> Result<TransmittanceGrid> {
        read_grid_from(s.as_bytes(), &GridFilter::default())
    }

    fn ingest_str(s: &str) -> Result<TransmittanceGrid> {
        ingest_external_from(s.as_bytes(), &GridFilter::default())
    }

    fn to_string(g: &TransmittanceGrid) -> String {
        let mut buf = Vec::new();
        write_grid_to(g, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn handwritten_fixture() {
        let g = read_str(FIXTURE).unwrap();
        assert_eq!(g.axes().shape(), [2, 1, 1, 2]);
        assert_eq!(g.axes().altitudes(), &[0.0, 1.0]);
        assert_eq!(g.axes().distances(), &[0.5]);
        assert_eq!(g.axes().thetas(), &[45.0]);
        assert_eq!(g.axes().frequencies(), &[0.2, 0.25]);
        let v = g.values();
        assert_eq!(
            [v[[0, 0, 0, 0]], v[[0, 0, 0, 1]], v[[1, 0, 0, 0]], v[[1, 0, 0, 1]]],
            [0.9, 0.8, 0.95, 0.85]
        );
        assert_eq!(g.scenario().name(), "custom");
    }

    #[test]
    fn writer_output_is_canonical() {
        let g = read_str(FIXTURE).unwrap();
        let text = to_string(&g);
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(GRID_MAGIC));
        assert_eq!(lines.next(), Some(GRID_HEADER));
        assert_eq!(lines.next(), Some("0,0.5,45,0.20000000000000001,0.90000000000000002"));
        assert!(text.ends_with('\n') && !text.contains("\r") && !text.contains(" \n"));
        assert_eq!(read_str(&text).unwrap(), g);
    }

    #[test]
    fn out_of_range_tau_names_line() {
        let mut text = String::from(FIXTURE);
        text.push_str("2,0.5,45,0.2,1.5\n2,0.5,45,0.25,0.5\n");
        match read_str(&text) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 7);
                assert!(reason.contains("1.5"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header() {
        let text = FIXTURE.replace("l_km,d_km", "l,d");
        assert!(matches!(read_str(&text), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_str("hello\n"), Err(Error::Parse { line: 1, .. })));
        let text = FIXTURE.replace("0,0.5,45,0.25,0.8", "0,0.5,45,0.25");
        assert!(matches!(read_str(&text), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn missing_and_reordered_rows() {
        let dropped: String = FIXTURE
            .lines()
            .filter(|l| !l.starts_with("1,0.5,45,0.25"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(read_str(&dropped), Err(Error::MissingCells { .. })));
        let swapped = FIXTURE.replace(
            "0,0.5,45,0.2,0.9\n0,0.5,45,0.25,0.8",
            "0,0.5,45,0.25,0.8\n0,0.5,45,0.2,0.9",
        );
        assert!(matches!(read_str(&swapped), Err(Error::Parse { line: 3, .. })));
        let dropped_mid: String = FIXTURE
            .lines()
            .filter(|l| !l.starts_with("0,0.5,45,0.25"))
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(read_str(&dropped_mid), Err(Error::Parse { line: 4, .. })));
    }

    #[test]
    fn inconsistent_frequency_spacing() {
        let text = "# skyloss-grid v1\nl_km,d_km,theta_deg,f_thz,tau\n0,1,0,0.2,0.5\n0,1,0,0.21,0.5\n0,1,0,0.25,0.5\n";
        match read_str(text) {
            Err(Error::Parse { line, reason }) => {
                assert_eq!(line, 4);
                assert!(reason.contains("spacing"));
            }
            other => panic!("{other:?}"),
        }
    }

    fn sample_grid() -> TransmittanceGrid {
        let s = ScenarioSpec::new("t", vec![0.0, 0.5, 1.0], vec![0.25, 0.5], vec![0.0, 45.0, 90.0]).unwrap();
        let b = SubBand::new("b", 0.2, 0.3, 0.025).unwrap();
        TransmittanceGrid::from_fn(GridAxes::new(s, b), |l, d, t, f| {
            Ok((-(0.3 + f) * d * (1.0 + t / 90.0) * (-l / 2.0f64).exp()).exp())
        })
        .unwrap()
    }

    #[test]
    fn ingest_is_order_independent() {
        let g = sample_grid();
        let text = to_string(&g);
        let mut lines: Vec<&str> = text.lines().collect();
        let body = &mut lines[2..];
        body.reverse();
        body.swap(3, 17);
        let shuffled = lines.join("\n") + "\n";
        assert_eq!(ingest_str(&shuffled).unwrap(), read_str(&text).unwrap());
    }

    #[test]
    fn ingest_reports_missing_duplicate_and_non_grid() {
        let text = to_string(&sample_grid());
        let lines: Vec<&str> = text.lines().collect();

        let mut missing = lines.clone();
        missing.remove(10);
        match ingest_str(&(missing.join("\n") + "\n")) {
            Err(Error::MissingCells { count, listed }) => {
                assert_eq!(count, 1);
                assert!(listed.contains("theta="));
            }
            other => panic!("{other:?}"),
        }

        let mut dup = lines.clone();
        dup.push(lines[5]);
        assert!(matches!(
            ingest_str(&(dup.join("\n") + "\n")),
            Err(Error::DuplicateCell { line, first: 6, .. }) if line == lines.len() + 1
        ));

        let mut stray = lines.clone();
        stray.push("0.75,0.25,0,0.2,0.5");
        assert!(matches!(
            ingest_str(&(stray.join("\n") + "\n")),
            Err(Error::NonGrid { .. })
        ));
    }

    #[test]
    fn missing_list_is_capped() {
        let text = to_string(&sample_grid());
        let kept: Vec<&str> = text
            .lines()
            .enumerate()
            .filter(|(i, _)| *i < 2 || i % 3 != 0)
            .map(|(_, l)| l)
            .collect();
        match ingest_str(&(kept.join("\n") + "\n")) {
            Err(Error::MissingCells { count, listed }) => {
                assert!(count > MAX_LISTED_MISSING);
                assert_eq!(listed.split("; ").count(), MAX_LISTED_MISSING);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn filter_selects_subgrid() {
        let g = sample_grid();
        let text = to_string(&g);
        let filter = GridFilter {
            l_km: Some(0.5..=1.0),
            theta_deg: Some(45.0..=45.0),
            ..Default::default()
        };
        let sub = read_grid_from(text.as_bytes(), &filter).unwrap();
        assert_eq!(sub.axes().shape(), [2, 2, 1, 5]);
        assert_eq!(sub.values()[[1, 1, 0, 4]], g.values()[[2, 1, 1, 4]]);
    }

    #[test]
    fn recognizes_builtin_band() {
        let text = "# skyloss-grid v1\nl_km,d_km,theta_deg,f_thz,tau\n0,1,0,0.327,0.5\n0,1,0,0.3273,0.5\n";
        let g = read_str(text).unwrap();
        assert_eq!(g.band().name(), "Y0");
        assert_eq!(g.band().f_hi(), 0.368);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_is_bit_exact(vals in proptest::collection::vec(1e-300..=1.0f64, 8)) {
            let s = ScenarioSpec::new("t", vec![0.0, 0.37], vec![0.1], vec![0.0, 33.3]).unwrap();
            let b = SubBand::new("b", 0.3, 0.9, 0.1 / 3.0).unwrap();
            let axes = GridAxes::with_frequencies(s, b, vec![0.3, 0.1 + 0.2 + 0.1 / 3.0]).unwrap();
            let g = TransmittanceGrid::new(axes, Array4::from_shape_vec([2, 1, 2, 2], vals).unwrap()).unwrap();
            let back = read_str(&to_string(&g)).unwrap();
            prop_assert_eq!(back.values(), g.values());
            prop_assert_eq!(back.axes().frequencies(), g.axes().frequencies());
        }
    }
}
