use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pbphase::FigureId;

#[derive(Parser, Debug)]
#[command(name = "pbphase", version)]
#[command(about = "Pegg-Barnett and Susskind-Glogower phase statistics of coherent states")]
pub struct Cli {
    /// Tail tolerance for truncating photon-number sums
    #[arg(long, global = true, env = "PBPHASE_TOL", default_value_t = 1e-14, allow_negative_numbers = true, value_parser = tolerance)]
    pub tol: f64,

    /// Write the result here instead of stdout
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Phase distribution P(φ) on a uniform grid over [0, 2π)
    Dist {
        #[command(flatten)]
        state: CoherentArgs,
        /// Number of φ samples
        #[arg(long, default_value_t = 360, value_parser = grid)]
        grid: usize,
    },
    /// First and second moments of φ̂ − φ₀
    Moments {
        #[command(flatten)]
        state: CoherentArgs,
        #[arg(long, value_enum, default_value_t = Method::Fourier)]
        method: Method,
    },
    /// Δφ² with its bounds
    Variance {
        #[command(flatten)]
        state: CoherentArgs,
    },
    /// Lower and upper bounds on Δφ² and (Δφ)²_PB for a mean photon number
    Bounds {
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        nbar: f64,
    },
    /// (Δcos φ̂)² + (Δsin φ̂)² in the PB picture
    FluctPb {
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        nbar: f64,
    },
    /// (ΔĈ)² + (ΔŜ)² in the SG picture; with --p0, for a diagonal mixture
    FluctSg {
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative, required_unless_present = "p0")]
        nbar: Option<f64>,
        /// Vacuum probability of a diagonal mixed state
        #[arg(long, allow_negative_numbers = true, value_parser = probability, conflicts_with = "nbar")]
        p0: Option<f64>,
    },
    /// Relative-phase fluctuation of two beams, SG picture
    Sgpd {
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        nbar: f64,
    },
    /// Relative-phase fluctuation of two beams, PB picture
    Pbpd {
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        nbar: f64,
    },
    /// Post-selection normalization N
    NfmNorm {
        #[command(flatten)]
        ports: PortArgs,
    },
    /// ⟨cos(φ̂₂−φ̂₁)⟩ / cos(ξ₂−ξ₁) with a strong port-2 beam
    NfmCos {
        /// Mean photon number in port 1
        #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
        nbar: f64,
        /// Mean photon number in port 2
        #[arg(long = "a2-sq", allow_negative_numbers = true, value_parser = non_negative, default_value_t = 50.0)]
        a2_sq: f64,
    },
    /// ⟨cos²(φ̂₂−φ̂₁)⟩ with a vacuum port 1
    NfmCos2 {
        #[arg(long = "a2-sq", allow_negative_numbers = true, value_parser = non_negative)]
        a2_sq: f64,
    },
    /// ⟨cos⁴(φ̂₂−φ̂₁)⟩ with a vacuum port 1: exact series and approximations
    NfmCos4 {
        #[arg(long = "a2-sq", allow_negative_numbers = true, value_parser = non_negative)]
        a2_sq: f64,
        /// Reading of the series base
        #[arg(long, value_enum, default_value_t = Base::QuarterAmplitude)]
        series_base: Base,
    },
    /// Emit the data behind a figure
    Figure(FigureArgs),
    /// Run the invariant suite
    Check,
}

#[derive(Args, Debug)]
pub struct CoherentArgs {
    /// Mean photon number n̄ = |α|²
    #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
    pub nbar: f64,
    /// δξ = ξ − φ₀
    #[arg(long = "delta-xi", allow_negative_numbers = true, value_parser = finite)]
    pub delta_xi: f64,
}

#[derive(Args, Debug)]
pub struct PortArgs {
    /// |α₁|²
    #[arg(long = "a1-sq", visible_alias = "a1", allow_negative_numbers = true, value_parser = non_negative)]
    pub a1_sq: f64,
    /// |α₂|²
    #[arg(long = "a2-sq", allow_negative_numbers = true, value_parser = non_negative)]
    pub a2_sq: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    pub xi1: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true, value_parser = finite)]
    pub xi2: f64,
}

#[derive(Args, Debug)]
pub struct FigureArgs {
    #[arg(value_parser = figure_id)]
    pub id: FigureId,
    /// n̄ of the coherent state (fig1, default 4)
    #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
    pub nbar: Option<f64>,
    /// n̄₂ of input port 2 (fig5, fig6; default 50)
    #[arg(long = "a2-sq", allow_negative_numbers = true, value_parser = non_negative)]
    pub a2_sq: Option<f64>,
    /// Upper end of the n̄ axis
    #[arg(long, allow_negative_numbers = true, value_parser = non_negative)]
    pub nbar_max: Option<f64>,
    /// Number of abscissa points
    #[arg(long, value_parser = grid)]
    pub grid: Option<usize>,
    /// Comma-separated δξ values (fig2, fig3)
    #[arg(long = "delta-xi", value_delimiter = ',', allow_negative_numbers = true, value_parser = finite)]
    pub delta_xi: Option<Vec<f64>>,
    /// Experimental data to attach; repeatable
    #[arg(long)]
    pub overlay: Vec<PathBuf>,
    /// Halve GBL overlay values and divide their errors by √2
    #[arg(long)]
    pub gbl_adjust: bool,
    #[arg(long, value_enum, default_value_t = Base::QuarterAmplitude)]
    pub series_base: Base,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Fourier,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Base {
    QuarterAmplitude,
    QuarterIntensity,
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn non_negative(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("must be >= 0, got {v}"))
    }
}

fn probability(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("must lie in [0, 1], got {v}"))
    }
}

fn tolerance(s: &str) -> Result<f64, String> {
    let v = finite(s)?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("must lie in (0, 1), got {v}"))
    }
}

fn grid(s: &str) -> Result<usize, String> {
    let v: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a positive integer"))?;
    if (2..=pbphase::experiment::MAX_FIGURE_GRID).contains(&v) {
        Ok(v)
    } else {
        Err(format!(
            "must lie in [2, {}], got {v}",
            pbphase::experiment::MAX_FIGURE_GRID
        ))
    }
}

fn figure_id(s: &str) -> Result<FigureId, String> {
    s.parse().map_err(|e: pbphase::Error| e.to_string())
}
