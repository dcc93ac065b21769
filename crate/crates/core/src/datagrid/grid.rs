use ndarray::{Array4, Axis};

use super::axes::{ScenarioSpec, SubBand};
use crate::error::{Error, Result};

/// Speed of light used in the free-space term, m/s.
///
/// This is the rounded 3·10⁸ value; the exact SI value shifts every FSPL
/// figure by +0.0058 dB.
pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Free-space path loss in dB for a separation in meters and a frequency in THz.
pub fn fspl_db(d_m: f64, f_thz: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * f_thz * 1e12 * d_m / SPEED_OF_LIGHT).log10()
}

/// Absorption loss in dB for a transmittance.
pub fn absorption_db(tau: f64) -> f64 {
    -10.0 * tau.log10()
}

/// Axes of a 4-D `[l][d][θ][f]` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridAxes {
    scenario: ScenarioSpec,
    band: SubBand,
    frequencies: Vec<f64>,
}

impl GridAxes {
    /// Axes sampled at every frequency of the band.
    pub fn new(scenario: ScenarioSpec, band: SubBand) -> Self {
        let frequencies = band.frequencies();
        Self {
            scenario,
            band,
            frequencies,
        }
    }

    /// Axes with an explicit frequency axis, which must be strictly increasing
    /// and lie inside the band.
    pub fn with_frequencies(scenario: ScenarioSpec, band: SubBand, frequencies: Vec<f64>) -> Result<Self> {
        if frequencies.is_empty() {
            return Err(Error::invalid("frequency axis", "axis is empty"));
        }
        if frequencies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("frequency axis", "not strictly increasing"));
        }
        for &f in &frequencies {
            band.check_contains(f)?;
        }
        Ok(Self {
            scenario,
            band,
            frequencies,
        })
    }

    pub fn scenario(&self) -> &ScenarioSpec {
        &self.scenario
    }

    pub fn band(&self) -> &SubBand {
        &self.band
    }

    pub fn altitudes(&self) -> &[f64] {
        self.scenario.altitudes()
    }

    pub fn distances(&self) -> &[f64] {
        self.scenario.distances()
    }

    pub fn thetas(&self) -> &[f64] {
        self.scenario.thetas()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn shape(&self) -> [usize; 4] {
        [
            self.altitudes().len(),
            self.distances().len(),
            self.thetas().len(),
            self.frequencies.len(),
        ]
    }

    /// Total cell count `N_s = N_l·N_d·N_θ·N_f`.
    pub fn n_samples(&self) -> usize {
        self.shape().iter().product()
    }

    /// Coordinates `(l, d, θ, f)` of a flat index in canonical order.
    pub fn coords(&self, flat: usize) -> (f64, f64, f64, f64) {
        let [_, nd, nt, nf] = self.shape();
        let fi = flat % nf;
        let ti = (flat / nf) % nt;
        let di = (flat / (nf * nt)) % nd;
        let li = flat / (nf * nt * nd);
        (
            self.altitudes()[li],
            self.distances()[di],
            self.thetas()[ti],
            self.frequencies[fi],
        )
    }

    /// Restricts the axes to the given index lists.
    pub fn select(&self, l: &[usize], d: &[usize], theta: &[usize], f: &[usize]) -> Result<Self> {
        let pick = |axis: &[f64], idx: &[usize]| -> Result<Vec<f64>> {
            idx.iter()
                .map(|&i| {
                    axis.get(i)
                        .copied()
                        .ok_or_else(|| Error::invalid("sub-grid selection", format!("index {i} out of bounds")))
                })
                .collect()
        };
        let scenario = self.scenario.with_axes(
            pick(self.altitudes(), l)?,
            pick(self.distances(), d)?,
            pick(self.thetas(), theta)?,
        )?;
        Self::with_frequencies(scenario, self.band.clone(), pick(&self.frequencies, f)?)
    }

    pub(crate) fn check_same(&self, other: &GridAxes) -> Result<()> {
        let same = |a: &[f64], b: &[f64]| a == b;
        if !same(self.altitudes(), other.altitudes())
            || !same(self.distances(), other.distances())
            || !same(self.thetas(), other.thetas())
            || !same(self.frequencies(), other.frequencies())
        {
            return Err(Error::AxisMismatch(format!(
                "grids have shapes {:?} and {:?} or differing axis values",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }
}

fn select_values(values: &Array4<f64>, l: &[usize], d: &[usize], theta: &[usize], f: &[usize]) -> Array4<f64> {
    values
        .select(Axis(0), l)
        .select(Axis(1), d)
        .select(Axis(2), theta)
        .select(Axis(3), f)
}

/// The 4-D transmittance tensor `τ(l, d, θ, f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmittanceGrid {
    axes: GridAxes,
    values: Array4<f64>,
}

impl TransmittanceGrid {
    pub fn new(axes: GridAxes, values: Array4<f64>) -> Result<Self> {
        if values.shape() != axes.shape() {
            return Err(Error::AxisMismatch(format!(
                "values have shape {:?}, axes expect {:?}",
                values.shape(),
                axes.shape()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::range("tau", *v, format!("(0, 1] (cell {:?})", axes.coords(i))));
        }
        Ok(Self { axes, values })
    }

    /// Builds a grid by evaluating `cell(l, d, θ, f)` at every coordinate.
    ///
    /// Cells are evaluated in parallel on the current rayon pool; each value
    /// lands at its own index, so the result does not depend on the pool size.
    pub fn from_fn<F>(axes: GridAxes, cell: F) -> Result<Self>
    where
        F: Fn(f64, f64, f64, f64) -> Result<f64> + Sync,
    {
        use rayon::prelude::*;
        let values: Vec<f64> = (0..axes.n_samples())
            .into_par_iter()
            .map(|i| {
                let (l, d, t, f) = axes.coords(i);
                cell(l, d, t, f)
            })
            .collect::<Result<_>>()?;
        let values = Array4::from_shape_vec(axes.shape(), values).expect("shape matches sample count");
        Self::new(axes, values)
    }

    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn values(&self) -> &Array4<f64> {
        &self.values
    }

    pub fn scenario(&self) -> &ScenarioSpec {
        self.axes.scenario()
    }

    pub fn band(&self) -> &SubBand {
        self.axes.band()
    }

    pub fn n_samples(&self) -> usize {
        self.axes.n_samples()
    }

    pub fn select(&self, l: &[usize], d: &[usize], theta: &[usize], f: &[usize]) -> Result<Self> {
        let axes = self.axes.select(l, d, theta, f)?;
        Self::new(axes, select_values(&self.values, l, d, theta, f))
    }
}

/// The 4-D total path-loss tensor in dB.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossGrid {
    axes: GridAxes,
    values: Array4<f64>,
}

impl PathLossGrid {
    pub fn new(axes: GridAxes, values: Array4<f64>) -> Result<Self> {
        if values.shape() != axes.shape() {
            return Err(Error::AxisMismatch(format!(
                "values have shape {:?}, axes expect {:?}",
                values.shape(),
                axes.shape()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::range("path loss", *v, "finite and > 0 dB"));
        }
        Ok(Self { axes, values })
    }

    pub fn axes(&self) -> &GridAxes {
        &self.axes
    }

    pub fn values(&self) -> &Array4<f64> {
        &self.values
    }

    pub fn select(&self, l: &[usize], d: &[usize], theta: &[usize], f: &[usize]) -> Result<Self> {
        let axes = self.axes.select(l, d, theta, f)?;
        Self::new(axes, select_values(&self.values, l, d, theta, f))
    }
}

/// Total path loss `FSPL(d, f) − 10·log₁₀ τ` for every grid cell.
pub fn path_loss_grid(tau: &TransmittanceGrid) -> PathLossGrid {
    let axes = tau.axes().clone();
    let mut values = tau.values().clone();
    for ((_, di, _, fi), v) in values.indexed_iter_mut() {
        let d_m = axes.distances()[di] * 1000.0;
        *v = fspl_db(d_m, axes.frequencies()[fi]) + absorption_db(*v);
    }
    PathLossGrid::new(axes, values).expect("FSPL of a valid grid is finite and positive")
}
