mod args;
mod render;

use std::f64::consts::TAU;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use pbphase::check::{run_invariants, Status};
use pbphase::experiment::{gbl_adjust, load_experiment, Column};
use pbphase::fluctuations::{
    judge_lower_bound, psi_pb, trig_fluct_pb, trig_fluct_pb_bounds, trig_fluct_sg,
    trig_fluct_sg_mixture, variance_coherent, variance_lower_bound, VARIANCE_UPPER_BOUND,
};
use pbphase::nfm::{
    cos2_vacuum_port, cos4_vacuum_port_with, mean_cos_ratio, normalization_n, Cos4Options,
    NfmInputs, SeriesBase,
};
use pbphase::relative::{fluct_pbpd, fluct_sgpd};
use pbphase::{
    build_distribution, emit_figure, CoherentSpec, FigureParams, MomentMethod, TruncationPolicy,
};
use serde_json::{json, Map};

use args::{Base, Cli, Command, FigureArgs, Method};
use render::{Output, Report};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let policy = TruncationPolicy::with_tolerance(cli.tol);
    let output = compute(&cli.command, &policy)?;

    let mut sink: Box<dyn Write> = match &cli.out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    render::write(&output, cli.format, &mut sink)?;
    sink.flush()?;

    if let Output::Invariants(list) = &output {
        let failed: Vec<_> = list.iter().filter(|o| o.status == Status::Fail).collect();
        for o in list.iter().filter(|o| o.status == Status::KnownDeviation) {
            eprintln!(
                "known deviation: {} (margin {:e}): {}",
                o.name, o.margin, o.detail
            );
        }
        for o in &failed {
            eprintln!(
                "invariant violated: {} (margin {:e}): {}",
                o.name, o.margin, o.detail
            );
        }
        if !failed.is_empty() {
            return Ok(ExitCode::from(1));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn series_base(b: Base) -> SeriesBase {
    match b {
        Base::QuarterAmplitude => SeriesBase::QuarterAmplitude,
        Base::QuarterIntensity => SeriesBase::QuarterIntensity,
    }
}

fn compute(command: &Command, policy: &TruncationPolicy) -> Result<Output> {
    let out = match command {
        Command::Dist { state, grid } => {
            let spec = CoherentSpec::with_delta_xi(state.nbar, state.delta_xi)?;
            let dist = build_distribution(&spec.state(), 0.0, policy)?;
            let phi: Vec<f64> = (0..*grid).map(|i| TAU * i as f64 / *grid as f64).collect();
            let density = phi.iter().map(|&p| dist.eval_density(p)).collect();
            let mut metadata = Map::new();
            metadata.insert("n_bar".into(), json!(state.nbar));
            metadata.insert("delta_xi".into(), json!(state.delta_xi));
            metadata.insert("n_max".into(), json!(dist.n_max()));
            metadata.insert("tail_mass".into(), json!(dist.tail_mass()));
            Output::Columns {
                columns: vec![
                    Column {
                        name: "phi".into(),
                        values: phi,
                    },
                    Column {
                        name: "density".into(),
                        values: density,
                    },
                ],
                metadata,
            }
        }
        Command::Moments { state, method } => {
            let spec = CoherentSpec::with_delta_xi(state.nbar, state.delta_xi)?;
            let dist = build_distribution(&spec.state(), 0.0, policy)?;
            let method = match method {
                Method::Fourier => MomentMethod::Fourier,
                Method::Quadrature => MomentMethod::Quadrature,
            };
            let m1 = dist.moment(1, method)?;
            let m2 = dist.moment(2, method)?;
            Output::Report(
                Report::default()
                    .num("mean", m1.value)
                    .num("mean_tail_bound", m1.tail_bound)
                    .num("second_moment", m2.value)
                    .num("second_moment_tail_bound", m2.tail_bound)
                    .num("variance", (m2.value - m1.value * m1.value).max(0.0))
                    .int("terms_used", m2.terms_used),
            )
        }
        Command::Variance { state } => {
            let spec = CoherentSpec::with_delta_xi(state.nbar, state.delta_xi)?;
            let r = variance_coherent(&spec, policy)?;
            Output::Report(
                Report::default()
                    .num("variance", r.variance)
                    .num("mean", r.mean)
                    .num("lower_bound", r.lower_bound)
                    .num("judge_bound", r.judge_bound)
                    .num("upper_bound", r.upper_bound)
                    .flag("satisfies_bounds", r.satisfies_bounds),
            )
        }
        Command::Bounds { nbar } => {
            let (pb_lo, pb_hi) = trig_fluct_pb_bounds(*nbar);
            Output::Report(
                Report::default()
                    .num("lower_bound", variance_lower_bound(*nbar))
                    .num("judge_bound", judge_lower_bound(*nbar))
                    .num("upper_bound", VARIANCE_UPPER_BOUND)
                    .num("trig_fluct_pb_lower", pb_lo)
                    .num("trig_fluct_pb_upper", pb_hi),
            )
        }
        Command::FluctPb { nbar } => {
            let psi = psi_pb(*nbar, policy)?;
            Output::Report(
                Report::default()
                    .num("trig_fluct_pb", trig_fluct_pb(*nbar, policy)?)
                    .num("psi_pb", psi.value)
                    .num("psi_pb_tail_bound", psi.tail_bound)
                    .int("terms_used", psi.terms_used),
            )
        }
        Command::FluctSg { nbar, p0 } => {
            let report = match (nbar, p0) {
                (_, Some(p0)) => Report::default()
                    .num("trig_fluct_sg", trig_fluct_sg_mixture(*p0)?)
                    .text("state", "diagonal mixture"),
                (Some(n), None) => Report::default()
                    .num("trig_fluct_sg", trig_fluct_sg(*n, policy)?)
                    .text("state", "coherent"),
                (None, None) => unreachable!("clap requires --nbar or --p0"),
            };
            Output::Report(report)
        }
        Command::Sgpd { nbar } => {
            Output::Report(Report::default().num("sgpd", fluct_sgpd(*nbar, policy)?))
        }
        Command::Pbpd { nbar } => {
            Output::Report(Report::default().num("pbpd", fluct_pbpd(*nbar, policy)?))
        }
        Command::NfmNorm { ports } => {
            let inputs = NfmInputs::new(ports.a1_sq, ports.a2_sq, ports.xi1, ports.xi2)?;
            Output::Report(Report::default().num("normalization", normalization_n(&inputs)))
        }
        Command::NfmCos { nbar, a2_sq } => {
            let r = mean_cos_ratio(*nbar, *a2_sq, policy)?;
            Output::Report(
                Report::default()
                    .num("cos_ratio", r.value)
                    .text("approximation", r.approximation)
                    .maybe_text("warning", r.regime_warning),
            )
        }
        Command::NfmCos2 { a2_sq } => {
            Output::Report(Report::default().num("cos2", cos2_vacuum_port(*a2_sq)?))
        }
        Command::NfmCos4 {
            a2_sq,
            series_base: base,
        } => {
            let options = Cos4Options {
                base: series_base(*base),
                ..Cos4Options::default()
            };
            let r = cos4_vacuum_port_with(*a2_sq, policy, &options)?;
            let mut report = Report::default()
                .num("cos4", r.exact.value)
                .num("cos4_tail_bound", r.exact.tail_bound)
                .num("cos4_analytic", r.approx_analytic)
                .num("analytic_gap", r.analytic_gap());
            if let Some(small) = r.approx_small_alpha {
                report = report.num("cos4_small_alpha", small);
            }
            Output::Report(
                report
                    .num("normalization", r.normalization)
                    .int("terms_used", r.exact.terms_used)
                    .maybe_text("warning", r.consistency_warning),
            )
        }
        Command::Figure(args) => Output::Figure(figure(args, policy)?),
        Command::Check => Output::Invariants(run_invariants(policy)),
    };
    Ok(out)
}

fn figure(args: &FigureArgs, policy: &TruncationPolicy) -> Result<pbphase::FigureTable> {
    let mut overlays = Vec::new();
    for path in &args.overlay {
        let mut table = load_experiment(path, None)?;
        if args.gbl_adjust && table.is_gbl() {
            table = gbl_adjust(table)?;
        }
        overlays.push(table);
    }
    let params = FigureParams {
        mean_photons: args.nbar,
        port2_mean: args.a2_sq,
        n_bar_max: args.nbar_max,
        grid: args.grid,
        delta_xi: args.delta_xi.clone(),
        policy: *policy,
        cos4: Cos4Options {
            base: series_base(args.series_base),
            ..Cos4Options::default()
        },
    };
    Ok(emit_figure(args.id, &params, overlays)?)
}
