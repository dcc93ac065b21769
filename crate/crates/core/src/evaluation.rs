//! RMSE/NRMSE metrics over path-loss tensors, axis slices, per-band
//! summaries, the free-space baseline, and the report CSV files.

use std::io::Write;
use std::path::Path;

use ndarray::Array4;
use rayon::prelude::*;

use crate::datagrid::{fspl_db, path_loss_grid, GridAxes, PathLossGrid, TransmittanceGrid, FREQ_EPS};
use crate::error::{Error, Result};
use crate::fmt::g17;
use crate::model::PathLossModel;
use crate::regression::{fit_adaptive, fit_agnostic, FitOptions};

/// RMSE in dB and NRMSE (RMSE over the mean true path loss) of `n` cells.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub rmse: f64,
    pub nrmse: f64,
    pub n: usize,
}

/// Running sums from which [`Metrics`] are formed; merging is exact up to
/// summation order, which is fixed.
#[derive(Debug, Clone, Copy, Default)]
struct Accum {
    sq: f64,
    truth: f64,
    n: usize,
}

impl Accum {
    fn push(&mut self, truth: f64, pred: f64) {
        let e = pred - truth;
        self.sq += e * e;
        self.truth += truth;
        self.n += 1;
    }

    fn merge(&mut self, o: Accum) {
        self.sq += o.sq;
        self.truth += o.truth;
        self.n += o.n;
    }

    fn metrics(&self) -> Metrics {
        let n = self.n as f64;
        let rmse = (self.sq / n).sqrt();
        Metrics {
            rmse,
            nrmse: rmse / (self.truth / n),
            n: self.n,
        }
    }
}

/// Metrics between two equally long value lists.
pub fn rmse_nrmse_values(truth: &[f64], pred: &[f64]) -> Result<Metrics> {
    if truth.len() != pred.len() || truth.is_empty() {
        return Err(Error::AxisMismatch(format!(
            "{} truth values vs {} predictions",
            truth.len(),
            pred.len()
        )));
    }
    let mut acc = Accum::default();
    for (&t, &p) in truth.iter().zip(pred) {
        acc.push(t, p);
    }
    Ok(acc.metrics())
}

/// Metrics between two path-loss grids over identical axes.
pub fn rmse_nrmse(truth: &PathLossGrid, pred: &PathLossGrid) -> Result<Metrics> {
    truth.axes().check_same(pred.axes())?;
    let t: Vec<f64> = truth.values().iter().copied().collect();
    let p: Vec<f64> = pred.values().iter().copied().collect();
    rmse_nrmse_values(&t, &p)
}

/// A scenario axis along which slice metrics are taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceAxis {
    Altitude,
    Distance,
    Theta,
}

impl SliceAxis {
    pub const ALL: [SliceAxis; 3] = [SliceAxis::Altitude, SliceAxis::Distance, SliceAxis::Theta];

    /// Column and file-name label: `l`, `d` or `theta`.
    pub fn label(&self) -> &'static str {
        match self {
            SliceAxis::Altitude => "l",
            SliceAxis::Distance => "d",
            SliceAxis::Theta => "theta",
        }
    }

    fn index(&self) -> usize {
        match self {
            SliceAxis::Altitude => 0,
            SliceAxis::Distance => 1,
            SliceAxis::Theta => 2,
        }
    }

    fn values<'a>(&self, axes: &'a GridAxes) -> &'a [f64] {
        match self {
            SliceAxis::Altitude => axes.altitudes(),
            SliceAxis::Distance => axes.distances(),
            SliceAxis::Theta => axes.thetas(),
        }
    }
}

impl std::str::FromStr for SliceAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l" => Ok(SliceAxis::Altitude),
            "d" => Ok(SliceAxis::Distance),
            "theta" => Ok(SliceAxis::Theta),
            _ => Err(Error::Lookup {
                kind: "slice axis",
                name: s.into(),
                valid: "l, d, theta".into(),
            }),
        }
    }
}

fn slice_accums(truth: &Array4<f64>, pred: &Array4<f64>, axis: SliceAxis) -> Vec<Accum> {
    let k = axis.index();
    let mut acc = vec![Accum::default(); truth.shape()[k]];
    for ((idx, &t), &p) in truth.indexed_iter().zip(pred.iter()) {
        let i = [idx.0, idx.1, idx.2][k];
        acc[i].push(t, p);
    }
    acc
}

/// Per-value metrics along one axis, each normalized by its own slice mean.
pub fn slice_nrmse(truth: &PathLossGrid, pred: &PathLossGrid, axis: SliceAxis) -> Result<Vec<(f64, Metrics)>> {
    truth.axes().check_same(pred.axes())?;
    let acc = slice_accums(truth.values(), pred.values(), axis);
    Ok(axis
        .values(truth.axes())
        .iter()
        .zip(acc)
        .map(|(&v, a)| (v, a.metrics()))
        .collect())
}

/// Path loss with `τ ≡ 1` on the grid's axes.
pub fn fspl_prediction(axes: &GridAxes) -> PathLossGrid {
    let [nl, nd, nt, nf] = axes.shape();
    let values = Array4::from_shape_fn((nl, nd, nt, nf), |(_, di, _, fi)| {
        fspl_db(axes.distances()[di] * 1000.0, axes.frequencies()[fi])
    });
    PathLossGrid::new(axes.clone(), values).expect("FSPL is finite and positive")
}

/// Metrics of the free-space-only prediction against the true path loss.
pub fn fspl_baseline(truth_tau: &TransmittanceGrid) -> Metrics {
    let truth = path_loss_grid(truth_tau);
    rmse_nrmse(&truth, &fspl_prediction(truth_tau.axes())).expect("same axes")
}

/// A prediction method compared in the reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Agnostic,
    Adaptive,
    Fspl,
}

impl Method {
    pub fn label(&self) -> &'static str {
        match self {
            Method::Agnostic => "agnostic",
            Method::Adaptive => "adaptive",
            Method::Fspl => "fspl",
        }
    }
}

/// One band's truth grid and the fitted models to score on it.
#[derive(Debug, Clone, Copy)]
pub struct BandInput<'a> {
    pub truth: &'a TransmittanceGrid,
    pub agnostic: Option<&'a PathLossModel>,
    pub adaptive: Option<&'a PathLossModel>,
}

/// Metrics of each present method.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodMetrics {
    pub agnostic: Option<Metrics>,
    pub adaptive: Option<Metrics>,
    pub fspl: Metrics,
}

impl MethodMetrics {
    pub fn get(&self, m: Method) -> Option<Metrics> {
        match m {
            Method::Agnostic => self.agnostic,
            Method::Adaptive => self.adaptive,
            Method::Fspl => Some(self.fspl),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandEntry {
    pub band: String,
    pub mean_truth_db: f64,
    /// Mean absorption loss `−10·log₁₀ τ` over the band's cells.
    pub mean_absorption_db: f64,
    pub metrics: MethodMetrics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceRow {
    pub value: f64,
    pub metrics: MethodMetrics,
}

/// Pooled and per-band evaluation of up to two models and the FSPL baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<Method>,
    pub global: MethodMetrics,
    pub per_band: Vec<BandEntry>,
    /// Slices pooled over all bands, one list per axis in [`SliceAxis::ALL`] order.
    pub slices: Vec<(SliceAxis, Vec<SliceRow>)>,
    pub grids: Vec<String>,
}

impl EvalReport {
    pub fn baseline_fspl_nrmse(&self) -> f64 {
        self.global.fspl.nrmse
    }

    pub fn band(&self, name: &str) -> Option<&BandEntry> {
        self.per_band.iter().find(|b| b.band == name)
    }
}

fn check_model(model: &PathLossModel, grid: &TransmittanceGrid) -> Result<()> {
    let (mb, gb) = (model.band(), grid.band());
    let f = grid.axes().frequencies();
    let inside = f.iter().all(|&x| mb.contains(x));
    let same_span = (mb.f_lo() - gb.f_lo()).abs() <= FREQ_EPS && (mb.f_hi() - gb.f_hi()).abs() <= FREQ_EPS;
    if !(inside && same_span) {
        return Err(Error::BandMismatch(format!(
            "{} model fitted on band {} [{}, {}] THz cannot score grid band {} [{}, {}] THz",
            model.kind(),
            mb.name(),
            mb.f_lo(),
            mb.f_hi(),
            gb.name(),
            gb.f_lo(),
            gb.f_hi()
        )));
    }
    Ok(())
}

struct Scored {
    truth: PathLossGrid,
    preds: Vec<(Method, PathLossGrid)>,
}

fn score_band(input: &BandInput<'_>, methods: &[Method]) -> Result<Scored> {
    let truth = path_loss_grid(input.truth);
    let mut preds = Vec::with_capacity(methods.len());
    for &m in methods {
        let grid = match m {
            Method::Agnostic | Method::Adaptive => {
                let model = if m == Method::Agnostic {
                    input.agnostic
                } else {
                    input.adaptive
                }
                .expect("method presence checked");
                if model.kind() != m.label() {
                    return Err(Error::invalid(
                        "evaluation input",
                        format!("expected a {} model, got {}", m.label(), model.kind()),
                    ));
                }
                check_model(model, input.truth)?;
                model.predict_grid(input.truth.axes())?.0
            }
            Method::Fspl => fspl_prediction(input.truth.axes()),
        };
        preds.push((m, grid));
    }
    Ok(Scored { truth, preds })
}

fn methods_for(inputs: &[BandInput<'_>]) -> Result<Vec<Method>> {
    let mut methods = Vec::new();
    for (m, has) in [
        (
            Method::Agnostic,
            inputs.iter().map(|i| i.agnostic.is_some()).collect::<Vec<_>>(),
        ),
        (Method::Adaptive, inputs.iter().map(|i| i.adaptive.is_some()).collect()),
    ] {
        if has.iter().all(|&h| h) {
            methods.push(m);
        } else if has.iter().any(|&h| h) {
            return Err(Error::BandMismatch(format!(
                "a {} model must be given for every band or none",
                m.label()
            )));
        }
    }
    methods.push(Method::Fspl);
    Ok(methods)
}

fn method_metrics(methods: &[Method], acc: &[Accum]) -> MethodMetrics {
    let mut out = MethodMetrics {
        agnostic: None,
        adaptive: None,
        fspl: Metrics {
            rmse: 0.0,
            nrmse: 0.0,
            n: 0,
        },
    };
    for (m, a) in methods.iter().zip(acc) {
        let v = a.metrics();
        match m {
            Method::Agnostic => out.agnostic = Some(v),
            Method::Adaptive => out.adaptive = Some(v),
            Method::Fspl => out.fspl = v,
        }
    }
    out
}

/// Scores every band, pooling global and slice metrics across bands.
pub fn per_band_report(inputs: &[BandInput<'_>]) -> Result<EvalReport> {
    if inputs.is_empty() {
        return Err(Error::invalid("evaluation input", "no grids"));
    }
    let methods = methods_for(inputs)?;
    let scored: Vec<Result<Scored>> = inputs.par_iter().map(|i| score_band(i, &methods)).collect();
    let scored = scored.into_iter().collect::<Result<Vec<_>>>()?;

    let mut global = vec![Accum::default(); methods.len()];
    let mut per_band = Vec::with_capacity(scored.len());
    // Slice accumulators keyed by axis value, kept in ascending value order.
    let mut slices: Vec<Vec<(f64, Vec<Accum>)>> = vec![Vec::new(); 3];
    for (input, s) in inputs.iter().zip(&scored) {
        let mut band_acc = vec![Accum::default(); methods.len()];
        for (k, (_, pred)) in s.preds.iter().enumerate() {
            for (&t, &p) in s.truth.values().iter().zip(pred.values()) {
                band_acc[k].push(t, p);
            }
            for (ai, axis) in SliceAxis::ALL.iter().enumerate() {
                let acc = slice_accums(s.truth.values(), pred.values(), *axis);
                for (&v, a) in axis.values(s.truth.axes()).iter().zip(acc) {
                    let rows = &mut slices[ai];
                    let pos = match rows.binary_search_by(|r| r.0.total_cmp(&v)) {
                        Ok(p) => p,
                        Err(p) => {
                            rows.insert(p, (v, vec![Accum::default(); methods.len()]));
                            p
                        }
                    };
                    rows[pos].1[k].merge(a);
                }
            }
        }
        for (g, b) in global.iter_mut().zip(&band_acc) {
            g.merge(*b);
        }
        let n = input.truth.n_samples() as f64;
        per_band.push(BandEntry {
            band: input.truth.band().name().to_string(),
            mean_truth_db: s.truth.values().sum() / n,
            mean_absorption_db: input
                .truth
                .values()
                .iter()
                .map(|&t| crate::datagrid::absorption_db(t))
                .sum::<f64>()
                / n,
            metrics: method_metrics(&methods, &band_acc),
        });
    }
    let slices = SliceAxis::ALL
        .iter()
        .zip(slices)
        .map(|(&axis, rows)| {
            let rows = rows
                .into_iter()
                .map(|(value, acc)| SliceRow {
                    value,
                    metrics: method_metrics(&methods, &acc),
                })
                .collect();
            (axis, rows)
        })
        .collect();
    Ok(EvalReport {
        global: method_metrics(&methods, &global),
        methods,
        per_band,
        slices,
        grids: inputs
            .iter()
            .map(|i| format!("{}x{}", i.truth.scenario().name(), i.truth.band().name()))
            .collect(),
    })
}

/// Splits a grid by zenith-angle index: even indices for training, odd for
/// evaluation.
pub fn holdout_split(grid: &TransmittanceGrid) -> Result<(TransmittanceGrid, TransmittanceGrid)> {
    let [nl, nd, nt, nf] = grid.axes().shape();
    if nt < 3 {
        return Err(Error::invalid(
            "holdout",
            format!("needs at least 3 zenith angles, got {nt}"),
        ));
    }
    let all = |n: usize| (0..n).collect::<Vec<_>>();
    let even: Vec<usize> = (0..nt).step_by(2).collect();
    let odd: Vec<usize> = (1..nt).step_by(2).collect();
    Ok((
        grid.select(&all(nl), &all(nd), &even, &all(nf))?,
        grid.select(&all(nl), &all(nd), &odd, &all(nf))?,
    ))
}

/// Models fitted for a holdout run.
#[derive(Debug, Clone)]
pub struct HoldoutModels {
    pub test: TransmittanceGrid,
    pub agnostic: Option<PathLossModel>,
    pub adaptive: Option<PathLossModel>,
}

/// Fits the requested methods on the even-θ half and returns the odd-θ half
/// for scoring.
pub fn holdout_fit(
    grid: &TransmittanceGrid,
    agnostic_degrees: Option<(usize, usize)>,
    adaptive_degree: Option<usize>,
    opts: &FitOptions,
) -> Result<HoldoutModels> {
    let (train, test) = holdout_split(grid)?;
    let agnostic = agnostic_degrees
        .map(|(ph, pv)| fit_agnostic(&train, ph, pv, opts).map(|f| f.model.into()))
        .transpose()?;
    let adaptive = adaptive_degree
        .map(|p| fit_adaptive(&train, p, opts).map(|f| f.model.into()))
        .transpose()?;
    Ok(HoldoutModels {
        test,
        agnostic,
        adaptive,
    })
}

/// Finds `value` on an axis, suggesting the nearest valid value otherwise.
pub fn axis_index(axis_name: &'static str, axis: &[f64], value: f64) -> Result<usize> {
    if let Some(i) = axis.iter().position(|&a| (a - value).abs() <= FREQ_EPS) {
        return Ok(i);
    }
    let nearest = axis
        .iter()
        .copied()
        .min_by(|a, b| (a - value).abs().total_cmp(&(b - value).abs()))
        .unwrap_or(f64::NAN);
    Err(Error::range(
        axis_name,
        value,
        format!("grid axis values (nearest valid: {axis_name}={})", g17(nearest)),
    ))
}

fn csv_err(path: &Path) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(path, e)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = std::fs::File::create(path).map_err(csv_err(path))?;
    f.write_all(text.as_bytes()).map_err(csv_err(path))
}

fn header(first: &str, prefix: &str, methods: &[Method]) -> String {
    let mut h = first.to_string();
    for m in methods {
        h.push_str(&format!(",{prefix}_{}", m.label()));
    }
    h.push('\n');
    h
}

fn row(label: &str, methods: &[Method], mm: &MethodMetrics) -> String {
    let mut r = label.to_string();
    for &m in methods {
        r.push(',');
        r.push_str(&g17(mm.get(m).expect("present method").nrmse));
    }
    r.push('\n');
    r
}

/// `nrmse_vs_<axis>.csv` text.
pub fn nrmse_vs_axis_csv(report: &EvalReport, axis: SliceAxis) -> String {
    let mut out = header(axis.label(), "nrmse", &report.methods);
    let rows = &report.slices.iter().find(|s| s.0 == axis).expect("all axes present").1;
    for r in rows {
        out.push_str(&row(&g17(r.value), &report.methods, &r.metrics));
    }
    out
}

/// `subband_nrmse.csv` text.
pub fn subband_nrmse_csv(report: &EvalReport) -> String {
    let mut out = header("band", "nrmse", &report.methods);
    for b in &report.per_band {
        out.push_str(&row(&b.band, &report.methods, &b.metrics));
    }
    out
}

/// Writes the slice and sub-band CSVs into `dir`, returning the file names.
pub fn write_report(report: &EvalReport, dir: impl AsRef<Path>) -> Result<Vec<String>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(csv_err(dir))?;
    let mut written = Vec::new();
    for axis in SliceAxis::ALL {
        let name = format!("nrmse_vs_{}.csv", axis.label());
        write_text(&dir.join(&name), &nrmse_vs_axis_csv(report, axis))?;
        written.push(name);
    }
    write_text(&dir.join("subband_nrmse.csv"), &subband_nrmse_csv(report))?;
    written.push("subband_nrmse.csv".into());
    Ok(written)
}

/// Fixed `(l, d, θ)` curve of path loss against frequency, in km and degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSlice {
    pub l: f64,
    pub d: f64,
    pub theta: f64,
}

impl std::str::FromStr for CurveSlice {
    type Err = Error;

    /// Parses `l=8,d=3,theta=9`.
    fn from_str(s: &str) -> Result<Self> {
        let (mut l, mut d, mut theta) = (None, None, None);
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid("slice", format!("expected key=value, got `{part}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::invalid("slice", format!("`{v}` is not a number")))?;
            match k.trim() {
                "l" => l = Some(v),
                "d" => d = Some(v),
                "theta" => theta = Some(v),
                other => {
                    return Err(Error::invalid(
                        "slice",
                        format!("unknown key `{other}`; expected l, d, theta"),
                    ))
                }
            }
        }
        match (l, d, theta) {
            (Some(l), Some(d), Some(theta)) => Ok(Self { l, d, theta }),
            _ => Err(Error::invalid("slice", "need all of l=, d=, theta=")),
        }
    }
}

/// `pathloss_vs_f.csv` text: truth and each present model along frequency,
/// concatenated over bands.
pub fn pathloss_vs_f_csv(inputs: &[BandInput<'_>], slice: CurveSlice) -> Result<String> {
    let methods: Vec<Method> = methods_for(inputs)?
        .into_iter()
        .filter(|m| *m != Method::Fspl)
        .collect();
    let mut out = String::from("f_thz,pl_truth_db");
    for m in &methods {
        out.push_str(&format!(",pl_{}_db", m.label()));
    }
    out.push('\n');
    for input in inputs {
        let axes = input.truth.axes();
        let li = axis_index("l", axes.altitudes(), slice.l)?;
        let di = axis_index("d", axes.distances(), slice.d)?;
        let ti = axis_index("theta", axes.thetas(), slice.theta)?;
        let (l, d, t) = (axes.altitudes()[li], axes.distances()[di], axes.thetas()[ti]);
        for &m in &methods {
            let model = if m == Method::Agnostic {
                input.agnostic
            } else {
                input.adaptive
            }
            .expect("present");
            check_model(model, input.truth)?;
        }
        for (fi, &f) in axes.frequencies().iter().enumerate() {
            let fspl = fspl_db(d * 1000.0, f);
            let truth = fspl + crate::datagrid::absorption_db(input.truth.values()[[li, di, ti, fi]]);
            out.push_str(&format!("{},{}", g17(f), g17(truth)));
            for &m in &methods {
                let model = if m == Method::Agnostic {
                    input.agnostic
                } else {
                    input.adaptive
                }
                .expect("present");
                let tau = model.predict_tau(l, d, t, f)?.tau;
                out.push_str(&format!(",{}", g17(fspl + crate::datagrid::absorption_db(tau))));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagrid::{ScenarioSpec, SubBand};
    use proptest::prelude::*;

    fn axes(l: Vec<f64>, d: Vec<f64>) -> GridAxes {
        let s = ScenarioSpec::new("t", l, d, vec![0.0]).unwrap();
        GridAxes::new(s, SubBand::new("b", 0.3, 0.3003, 0.001).unwrap())
    }

    fn grid(ax: &GridAxes, v: &[f64]) -> PathLossGrid {
        PathLossGrid::new(ax.clone(), Array4::from_shape_vec(ax.shape(), v.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn two_cell_hand_check() {
        let ax = axes(vec![0.0, 1.0], vec![1.0]);
        let m = rmse_nrmse(&grid(&ax, &[100.0, 200.0]), &grid(&ax, &[110.0, 190.0])).unwrap();
        assert!((m.rmse - 10.0).abs() < 1e-12);
        assert!((m.nrmse - 0.066_666_666_666_666_67).abs() < 1e-9);
        let same = rmse_nrmse(&grid(&ax, &[100.0, 200.0]), &grid(&ax, &[100.0, 200.0])).unwrap();
        assert_eq!((same.rmse, same.nrmse), (0.0, 0.0));
    }

    #[test]
    fn slice_hand_check() {
        // l × d = 2 × 2; only the l = 1 slice is wrong.
        let ax = axes(vec![0.0, 1.0], vec![1.0, 2.0]);
        let truth = grid(&ax, &[100.0, 200.0, 300.0, 500.0]);
        let pred = grid(&ax, &[100.0, 200.0, 306.0, 492.0]);
        let by_l = slice_nrmse(&truth, &pred, SliceAxis::Altitude).unwrap();
        assert_eq!(by_l[0].1.nrmse, 0.0);
        assert!((by_l[1].1.rmse - 50f64.sqrt()).abs() < 1e-12);
        assert!((by_l[1].1.nrmse - 50f64.sqrt() / 400.0).abs() < 1e-15);
        let by_d = slice_nrmse(&truth, &pred, SliceAxis::Distance).unwrap();
        assert!((by_d[0].1.rmse - 18f64.sqrt()).abs() < 1e-12);
        assert!((by_d[1].1.nrmse - 32f64.sqrt() / 350.0).abs() < 1e-15);
    }

    #[test]
    fn constant_offset_and_half_tau_baseline() {
        let ax = axes(vec![0.0, 1.0], vec![1.0, 2.0]);
        let truth = grid(&ax, &[100.0, 200.0, 300.0, 500.0]);
        let pred = grid(&ax, &[97.5, 197.5, 297.5, 497.5]);
        assert!((rmse_nrmse(&truth, &pred).unwrap().rmse - 2.5).abs() < 1e-12);

        let tau = TransmittanceGrid::from_fn(ax.clone(), |_, _, _, _| Ok(0.5)).unwrap();
        assert!((fspl_baseline(&tau).rmse - 3.010_299_956_639_812).abs() < 1e-12);
        let one = TransmittanceGrid::from_fn(ax, |_, _, _, _| Ok(1.0)).unwrap();
        assert_eq!(fspl_baseline(&one).nrmse, 0.0);
    }

    #[test]
    fn fspl_only_report_has_baseline_columns() {
        let ax = axes(vec![0.0, 1.0], vec![1.0, 2.0]);
        let tau = TransmittanceGrid::from_fn(ax, |_, d, _, _| Ok((-d).exp())).unwrap();
        let r = per_band_report(&[BandInput {
            truth: &tau,
            agnostic: None,
            adaptive: None,
        }])
        .unwrap();
        assert_eq!(r.methods, vec![Method::Fspl]);
        let csv = subband_nrmse_csv(&r);
        assert!(csv.starts_with("band,nrmse_fspl\n"));
        assert!(nrmse_vs_axis_csv(&r, SliceAxis::Theta).starts_with("theta,nrmse_fspl\n"));
    }

    #[test]
    fn axis_lookup_suggests_nearest() {
        let err = axis_index("l", &[1.0, 2.0, 8.0], 7.5).unwrap_err();
        assert!(err.to_string().contains("nearest valid: l=8"), "{err}");
        assert_eq!(axis_index("l", &[1.0, 2.0, 8.0], 8.0).unwrap(), 2);
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn curve_slice_parse() {
        let s: CurveSlice = "l=8,d=3,theta=9".parse().unwrap();
        assert_eq!(
            s,
            CurveSlice {
                l: 8.0,
                d: 3.0,
                theta: 9.0
            }
        );
        assert!("l=8,d=3".parse::<CurveSlice>().is_err());
        assert!("l=8,x=3,theta=1".parse::<CurveSlice>().is_err());
    }

    proptest! {
        #[test]
        fn order_invariant_and_triangle(v in proptest::collection::vec((50.0..300.0f64, -5.0..5.0f64, -5.0..5.0f64), 1..40), seed in any::<u64>()) {
            let truth: Vec<f64> = v.iter().map(|x| x.0).collect();
            let b: Vec<f64> = v.iter().map(|x| x.0 + x.1).collect();
            let c: Vec<f64> = v.iter().map(|x| x.0 + x.1 + x.2).collect();
            let m = rmse_nrmse_values(&truth, &c).unwrap();

            let mut idx: Vec<usize> = (0..v.len()).collect();
            let mut s = seed;
            for i in (1..idx.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                idx.swap(i, (s >> 33) as usize % (i + 1));
            }
            let t2: Vec<f64> = idx.iter().map(|&i| truth[i]).collect();
            let c2: Vec<f64> = idx.iter().map(|&i| c[i]).collect();
            let m2 = rmse_nrmse_values(&t2, &c2).unwrap();
            prop_assert!((m.nrmse - m2.nrmse).abs() <= 1e-12 * m.nrmse.max(1e-300));

            let ab = rmse_nrmse_values(&truth, &b).unwrap().rmse;
            let bc = rmse_nrmse_values(&b, &c).unwrap().rmse;
            prop_assert!(m.rmse <= ab + bc + 1e-12);
        }

        #[test]
        fn slices_recombine(v in proptest::collection::vec((50.0..300.0f64, -5.0..5.0f64), 12)) {
            let ax = {
                let s = ScenarioSpec::new("t", vec![0.0, 1.0, 2.0], vec![1.0, 2.0], vec![0.0, 90.0]).unwrap();
                GridAxes::new(s, SubBand::new("b", 0.3, 0.3003, 0.001).unwrap())
            };
            let truth = grid(&ax, &v.iter().map(|x| x.0).collect::<Vec<_>>());
            let pred = grid(&ax, &v.iter().map(|x| x.0 + x.1).collect::<Vec<_>>());
            let global = rmse_nrmse(&truth, &pred).unwrap();
            for axis in SliceAxis::ALL {
                let s = slice_nrmse(&truth, &pred, axis).unwrap();
                let recombined: f64 = s.iter().map(|(_, m)| m.n as f64 / 12.0 * m.rmse * m.rmse).sum();
                prop_assert!((recombined - global.rmse * global.rmse).abs() <= 1e-9 * global.rmse.powi(2).max(1e-12));
            }
        }
    }
}
