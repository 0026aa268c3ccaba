use std::collections::HashSet;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::experiment::table::ExperimentTable;
use crate::fluctuations::{
    psi_pb, trig_fluct_pb, variance_coherent, variance_lower_bound, VARIANCE_UPPER_BOUND,
};
use crate::nfm::{
    c12_squared_sg, cos2_vacuum_port, cos4_small_alpha, cos4_vacuum_port_with, Cos4Options,
    COS4_SMALL_ALPHA_DENOMINATOR, COS4_SMALL_ALPHA_LIMIT, LARGE_PORT2_THRESHOLD,
};
use crate::phase::{CoherentSpec, TruncationPolicy};
use crate::relative::{fluct_pbpd, fluct_sgpd};

/// Largest mean photon number accepted by [`emit_figure`].
pub const MAX_FIGURE_N_BAR: f64 = 200.0;
/// Largest abscissa grid accepted by [`emit_figure`].
pub const MAX_FIGURE_GRID: usize = 100_000;

pub const DEFAULT_FIG1_N_BAR: f64 = 4.0;
pub const DEFAULT_FIG1_GRID: usize = 720;
pub const DEFAULT_PORT2_N_BAR: f64 = 50.0;
pub const DEFAULT_N_BAR_GRID: usize = 101;

/// δξ values drawn in the n̄ scans of fig2 and fig3.
pub const DEFAULT_DELTA_XI_SET: [f64; 4] = [0.0, PI / 4.0, PI / 2.0, PI];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig1,
    Fig2,
    Fig3,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl FigureId {
    pub const ALL: [FigureId; 7] = [
        FigureId::Fig1,
        FigureId::Fig2,
        FigureId::Fig3,
        FigureId::Fig5,
        FigureId::Fig6,
        FigureId::Fig7,
        FigureId::Fig8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig1 => "fig1",
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
            FigureId::Fig8 => "fig8",
        }
    }

    fn default_n_bar_max(self) -> f64 {
        match self {
            FigureId::Fig7 => 20.0,
            _ => 10.0,
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnsupportedFigure(s.to_string()))
    }
}

/// Knobs for [`emit_figure`]. Unset fields take per-figure defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FigureParams {
    /// n̄ of the single coherent state in fig1.
    pub mean_photons: Option<f64>,
    /// n̄₂ of input port 2 in fig5 and fig6.
    pub port2_mean: Option<f64>,
    /// Upper end of the n̄ abscissa (fig2, fig3, fig5–fig8).
    pub n_bar_max: Option<f64>,
    /// Number of abscissa points.
    pub grid: Option<usize>,
    /// δξ values for fig2 and fig3.
    pub delta_xi: Option<Vec<f64>>,
    pub policy: TruncationPolicy,
    pub cos4: Cos4Options,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// An emitted figure: the abscissa is the first column.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub figure_id: FigureId,
    pub columns: Vec<Column>,
    pub metadata: Map<String, Value>,
    pub overlays: Vec<ExperimentTable>,
}

impl FigureTable {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
    }

    pub fn abscissa(&self) -> &Column {
        &self.columns[0]
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }
}

struct Builder {
    figure_id: FigureId,
    columns: Vec<Column>,
    metadata: Map<String, Value>,
}

impl Builder {
    fn new(figure_id: FigureId, abscissa: &str, grid: Vec<f64>) -> Self {
        Self {
            figure_id,
            columns: vec![Column {
                name: abscissa.into(),
                values: grid,
            }],
            metadata: Map::new(),
        }
    }

    fn column(&mut self, name: impl Into<String>, values: Vec<f64>) -> &mut Self {
        let name = name.into();
        debug_assert_eq!(values.len(), self.columns[0].values.len());
        debug_assert!(self.columns.iter().all(|c| c.name != name));
        self.columns.push(Column { name, values });
        self
    }

    fn meta(&mut self, key: &str, value: Value) -> &mut Self {
        self.metadata.insert(key.into(), value);
        self
    }

    fn finish(self, overlays: Vec<ExperimentTable>) -> FigureTable {
        FigureTable {
            figure_id: self.figure_id,
            columns: self.columns,
            metadata: self.metadata,
            overlays,
        }
    }
}

/// Evaluate `f` on every grid point in parallel, keeping grid order.
fn scan<F>(grid: &[f64], f: F) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    grid.par_iter().map(|&x| f(x)).collect()
}

fn linspace(hi: f64, points: usize) -> Vec<f64> {
    let step = hi / (points - 1) as f64;
    (0..points).map(|i| i as f64 * step).collect()
}

fn dxi_label(prefix: &str, dxi: f64) -> String {
    format!("{prefix}_dxi_{dxi:.6}")
}

fn check_overlays(figure: FigureId, overlays: &[ExperimentTable]) -> Result<()> {
    for o in overlays {
        let reason = match figure {
            FigureId::Fig3 if o.is_gbl() && o.is_adjusted() => {
                Some("fig3 compares two independent measurements; use unadjusted GBL data")
            }
            FigureId::Fig3 if o.is_gbl() => None,
            FigureId::Fig3 => Some("fig3 only takes GBL data"),
            FigureId::Fig6 if o.is_gbl() && !o.is_adjusted() => {
                Some("fig6 needs GBL data after the gbl-adjust step")
            }
            FigureId::Fig6 if o.is_gbl() || o.is_nfm() => None,
            FigureId::Fig6 => Some("fig6 only takes GBL or NFM data"),
            FigureId::Fig5 | FigureId::Fig7 if o.is_nfm() => None,
            FigureId::Fig5 | FigureId::Fig7 => Some("only NFM data is drawn on this figure"),
            FigureId::Fig1 | FigureId::Fig2 | FigureId::Fig8 => {
                Some("this figure has no experimental overlay")
            }
        };
        if let Some(reason) = reason {
            return Err(Error::OverlayMismatch {
                label: o.label.clone(),
                figure: figure.as_str(),
                reason,
            });
        }
    }
    Ok(())
}

fn check_range(name: &str, value: f64, lo: f64, hi: f64) -> Result<()> {
    if !(value.is_finite() && (lo..=hi).contains(&value)) {
        return Err(Error::InvalidInput(format!(
            "{name} = {value} outside the supported range [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Compute the curves of one figure and attach validated overlays.
pub fn emit_figure(
    figure_id: FigureId,
    params: &FigureParams,
    overlays: Vec<ExperimentTable>,
) -> Result<FigureTable> {
    check_overlays(figure_id, &overlays)?;
    params.policy.validate()?;

    let default_grid = match figure_id {
        FigureId::Fig1 => DEFAULT_FIG1_GRID,
        _ => DEFAULT_N_BAR_GRID,
    };
    let points = params.grid.unwrap_or(default_grid);
    if !(2..=MAX_FIGURE_GRID).contains(&points) {
        return Err(Error::InvalidInput(format!(
            "grid = {points} outside the supported range [2, {MAX_FIGURE_GRID}]"
        )));
    }
    let n_bar_max = params.n_bar_max.unwrap_or(figure_id.default_n_bar_max());
    check_range("n_bar_max", n_bar_max, f64::MIN_POSITIVE, MAX_FIGURE_N_BAR)?;
    let policy = &params.policy;

    let mut b = match figure_id {
        FigureId::Fig1 => {
            let n_bar = params.mean_photons.unwrap_or(DEFAULT_FIG1_N_BAR);
            check_range("n_bar", n_bar, 0.0, MAX_FIGURE_N_BAR)?;
            let step = TAU / points as f64;
            let grid: Vec<f64> = (0..points).map(|i| i as f64 * step).collect();
            let reports: Vec<_> = grid
                .par_iter()
                .map(|&dxi| variance_coherent(&CoherentSpec::with_delta_xi(n_bar, dxi)?, policy))
                .collect::<Result<_>>()?;
            let mut b = Builder::new(figure_id, "delta_xi", grid);
            b.column("mean", reports.iter().map(|r| r.mean).collect())
                .column("variance", reports.iter().map(|r| r.variance).collect())
                .meta("n_bar", json!(n_bar));
            b
        }
        FigureId::Fig2 | FigureId::Fig3 => {
            let dxis = params
                .delta_xi
                .clone()
                .unwrap_or_else(|| DEFAULT_DELTA_XI_SET.to_vec());
            if dxis.is_empty() || dxis.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput(
                    "delta-xi set must be finite and nonempty".into(),
                ));
            }
            let grid = linspace(n_bar_max, points);
            let (prefix, factor) = match figure_id {
                FigureId::Fig2 => ("variance", 1.0),
                _ => ("variance2", 2.0),
            };
            let names: Vec<String> = dxis.iter().map(|&d| dxi_label(prefix, d)).collect();
            if names.iter().collect::<HashSet<_>>().len() != names.len() {
                return Err(Error::InvalidInput(
                    "delta-xi values must be distinct".into(),
                ));
            }
            let mut b = Builder::new(figure_id, "n_bar", grid.clone());
            for (&dxi, name) in dxis.iter().zip(names) {
                let values = scan(&grid, |n| {
                    let spec = CoherentSpec::with_delta_xi(n, dxi)?;
                    Ok(factor * variance_coherent(&spec, policy)?.variance)
                })?;
                b.column(name, values);
            }
            if figure_id == FigureId::Fig2 {
                b.column(
                    "lower_bound",
                    grid.iter().map(|&n| variance_lower_bound(n)).collect(),
                )
                .column("upper_bound", vec![VARIANCE_UPPER_BOUND; grid.len()])
                .column("trig_fluct_pb", scan(&grid, |n| trig_fluct_pb(n, policy))?);
            } else {
                b.column("sgpd", scan(&grid, |n| fluct_sgpd(n, policy))?)
                    .column("pbpd", scan(&grid, |n| fluct_pbpd(n, policy))?);
            }
            b.meta("delta_xi", json!(dxis));
            b
        }
        FigureId::Fig5 | FigureId::Fig6 => {
            let n2 = params.port2_mean.unwrap_or(DEFAULT_PORT2_N_BAR);
            check_range("port-2 n_bar", n2, 0.0, MAX_FIGURE_N_BAR)?;
            let grid = linspace(n_bar_max, points);
            let psi1 = scan(&grid, |n| Ok(psi_pb(n, policy)?.value))?;
            let psi2 = psi_pb(n2, policy)?.value;
            let mut b = Builder::new(figure_id, "n_bar", grid);
            if figure_id == FigureId::Fig5 {
                let product = psi1.iter().map(|p| p * psi2).collect();
                b.column("psi_pb", psi1).column("psi_pb_product", product);
            } else {
                let replaced = psi1.iter().map(|p| 1.0 - p * p).collect();
                let full = psi1.iter().map(|p| 1.0 - (p * psi2).powi(2)).collect();
                b.column("pb_relative", replaced)
                    .column("pb_relative_product", full);
            }
            b.meta("port2_n_bar", json!(n2))
                .meta("psi_pb_port2", json!(psi2));
            if n2 < LARGE_PORT2_THRESHOLD {
                b.meta(
                    "warning",
                    json!(format!(
                        "port-2 mean {n2} is below {LARGE_PORT2_THRESHOLD}; the replaced-phase columns are not justified"
                    )),
                );
            }
            b
        }
        FigureId::Fig7 | FigureId::Fig8 => {
            let grid = linspace(n_bar_max, points);
            let results: Vec<_> = grid
                .par_iter()
                .map(|&a| cos4_vacuum_port_with(a, policy, &params.cos4))
                .collect::<Result<_>>()?;
            let exact = results.iter().map(|r| r.exact.value).collect();
            let mut b = Builder::new(figure_id, "n_bar", grid.clone());
            if figure_id == FigureId::Fig7 {
                b.column("cos2", scan(&grid, cos2_vacuum_port)?)
                    .column("cos4", exact)
                    .column("c12_sq", scan(&grid, c12_squared_sg)?);
            } else {
                b.column("cos4", exact)
                    .column(
                        "cos4_analytic",
                        results.iter().map(|r| r.approx_analytic).collect(),
                    )
                    .column(
                        "cos4_small_alpha",
                        grid.iter()
                            .map(|&a| cos4_small_alpha(a, COS4_SMALL_ALPHA_DENOMINATOR))
                            .collect(),
                    )
                    .meta("small_alpha_limit", json!(COS4_SMALL_ALPHA_LIMIT))
                    .meta(
                        "small_alpha_denominator",
                        json!(COS4_SMALL_ALPHA_DENOMINATOR),
                    );
            }
            let max_gap = results
                .iter()
                .fold(0.0f64, |m, r| m.max(r.analytic_gap().abs()));
            b.meta("cos4_series_base", json!(params.cos4.base))
                .meta("cos4_max_analytic_gap", json!(max_gap));
            let warnings: Vec<&String> = results
                .iter()
                .filter_map(|r| r.consistency_warning.as_ref())
                .collect();
            if !warnings.is_empty() {
                b.meta("warning", json!(warnings));
            }
            b
        }
    };
    if figure_id != FigureId::Fig1 {
        b.meta("n_bar_max", json!(n_bar_max));
    }
    b.meta("grid", json!(points))
        .meta("tail_mass_tol", json!(policy.tail_mass_tol));
    Ok(b.finish(overlays))
}
