use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ptreadout::dynamics::{crosscheck_s21, integrate, max_step, DriveSpec, DynamicsError};
use ptreadout::experiment::{
    format_float, load_config, preset, preset_catalog, run_scenario, sweep_table, trajectory_csv, write_trace_csv,
    write_trajectory_csv, ExperimentError, GridSpec, ScenarioConfig, ScenarioKind,
};
use ptreadout::spectrum::{find_ep, spectrum, spectrum_sweep, SpectrumError};
use ptreadout::transmission::{s21, TransmissionError, TRACE_CSV_HEADER};
use ptreadout::{CouplingAxis, QubitBranch, SystemParams};

#[derive(Parser)]
#[command(
    name = "ptreadout",
    version,
    about = "Dispersive qubit readout with PT-symmetric cavity chains"
)]
struct Cli {
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ParamArgs {
    /// Start from a built-in scenario's parameters.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    /// Start from a scenario file's parameters.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one parameter, e.g. `--set j1=0.99` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or scenario file and write its outputs.
    Run {
        /// Preset name or path to a TOML scenario file.
        target: String,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Sweep grid (sweeps) or probe grid (traces, cross-checks).
        #[arg(long, allow_hyphen_values = true, value_name = "START:STOP:COUNT")]
        grid: Option<GridSpec>,
        #[arg(long, value_delimiter = ',')]
        branches: Option<Vec<QubitBranch>>,
        /// Print the summary to stdout instead of the written paths.
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Locate the exceptional point along the coupling.
    EpFind {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Complex eigenvalues at one point, or along J1 with --grid.
    Spectrum {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "absent,ground,excited")]
        branches: Vec<QubitBranch>,
        #[arg(long, allow_hyphen_values = true, value_name = "START:STOP:COUNT")]
        grid: Option<GridSpec>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Transmission traces over a probe grid.
    Transmit {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "ground,excited")]
        branches: Vec<QubitBranch>,
        #[arg(
            long,
            allow_hyphen_values = true,
            value_name = "START:STOP:COUNT",
            default_value = "-3:3:4001"
        )]
        grid: GridSpec,
        /// Write trace_<branch>.csv files here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Integrate the driven mean-field equations from the vacuum.
    Dynamics {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value = "absent")]
        branch: QubitBranch,
        /// Probe detuning.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        omega: f64,
        #[arg(long, default_value_t = 50.0)]
        t_end: f64,
        /// Time step (default: the largest stable step).
        #[arg(long)]
        dt: Option<f64>,
        /// Compare the steady-state S21 with the closed form instead.
        #[arg(long)]
        crosscheck: bool,
        /// Write trajectory.csv here instead of printing.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// List the built-in scenarios.
    ListPresets {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

fn wrap_spectrum(source: SpectrumError) -> ExperimentError {
    ExperimentError::Spectrum {
        scenario: "command line".into(),
        source,
    }
}

fn wrap_transmission(source: TransmissionError) -> ExperimentError {
    ExperimentError::Transmission {
        scenario: "command line".into(),
        source,
    }
}

fn wrap_dynamics(source: DynamicsError) -> ExperimentError {
    ExperimentError::Dynamics {
        scenario: "command line".into(),
        source,
    }
}

fn read_config(path: &Path) -> Result<ScenarioConfig, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    load_config(&text)
}

fn resolve_params(args: &ParamArgs) -> Result<SystemParams, ExperimentError> {
    let mut p = match (&args.preset, &args.config) {
        (Some(name), _) => preset(name)?.config.params,
        (None, Some(path)) => read_config(path)?.params,
        (None, None) => SystemParams::default(),
    };
    for item in &args.overrides {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| ExperimentError::invalid("--set", format!("{item:?} is not KEY=VALUE")))?;
        let (key, value) = (key.trim(), value.trim());
        let bad = || ExperimentError::invalid(key, format!("cannot use value {value:?}"));
        match key {
            "n_cavities" => p.n_cavities = value.parse().map_err(|_| bad())?,
            "lossy_auxiliaries" => p.lossy_auxiliaries = value.parse().map_err(|_| bad())?,
            _ => {
                let v: f64 = value.parse().map_err(|_| bad())?;
                if !p.set(key, v) {
                    return Err(ExperimentError::invalid(key, "is not a system parameter"));
                }
            }
        }
    }
    p.validate()?;
    Ok(p)
}

macro_rules! outln {
    ($buf:expr, $($arg:tt)*) => {{
        let _ = writeln!($buf, $($arg)*);
    }};
}

fn print_json(buf: &mut String, value: &serde_json::Value) {
    outln!(buf, "{}", serde_json::to_string_pretty(value).expect("plain data"));
}

fn run(cli: Cli) -> Result<String, ExperimentError> {
    let mut buf = String::new();
    match cli.command {
        Command::Run {
            target,
            out_dir,
            grid,
            branches,
            format,
        } => {
            let path = Path::new(&target);
            let mut cfg = if path.is_file() {
                read_config(path)?
            } else {
                preset(&target)?.config
            };
            if let Some(b) = branches {
                cfg.branches = b;
            }
            if let Some(g) = grid {
                match (&mut cfg.sweep, cfg.kind) {
                    (Some(s), ScenarioKind::Sweep) => {
                        s.start = g.start;
                        s.stop = g.stop;
                        s.count = g.count;
                    }
                    _ => cfg.probe = g,
                }
            }
            let dir = out_dir
                .or_else(|| cfg.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
            let summary = run_scenario(&cfg, &dir)?;
            match format {
                Format::Json => print_json(&mut buf, &summary.summary),
                Format::Csv => {
                    for f in &summary.files {
                        outln!(buf, "{}", dir.join(f).display());
                    }
                }
            }
        }
        Command::EpFind { params, format } => {
            let p = resolve_params(&params)?;
            let ep = find_ep(&p).map_err(wrap_spectrum)?;
            match format {
                Format::Json => print_json(&mut buf, &json!(ep)),
                Format::Csv => {
                    outln!(buf, "coupling,order,re_value,im_value,gap,method,pt_symmetric");
                    outln!(
                        buf,
                        "{},{},{},{},{},{},{}",
                        format_float(ep.coupling),
                        ep.order,
                        format_float(ep.value.re),
                        format_float(ep.value.im),
                        format_float(ep.gap),
                        json!(ep.method).as_str().unwrap_or_default(),
                        ep.pt_symmetric
                    );
                }
            }
        }
        Command::Spectrum {
            params,
            branches,
            grid,
            format,
        } => {
            let p = resolve_params(&params)?;
            if let Some(g) = grid {
                let axis = CouplingAxis::for_template(&p);
                let values = g.values();
                let sweeps = branches
                    .iter()
                    .map(|&b| spectrum_sweep(&p, axis, &values, b))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(wrap_spectrum)?;
                let name = if axis == CouplingAxis::J1TiedJ2 { "j1_j2" } else { "j1" };
                buf.push_str(&sweep_table(name, &sweeps, None));
                return Ok(buf);
            }
            let mut rows = Vec::new();
            for b in branches {
                let s = spectrum(&p, b).map_err(wrap_spectrum)?;
                for (l, z) in s.labels.iter().zip(&s.eigenvalues) {
                    rows.push((b, *l, *z));
                }
            }
            match format {
                Format::Json => print_json(
                    &mut buf,
                    &json!(rows
                        .iter()
                        .map(|(b, l, z)| json!({ "branch": b, "label": l, "re": z.re, "im": z.im }))
                        .collect::<Vec<_>>()),
                ),
                Format::Csv => {
                    outln!(buf, "branch,label,re,im");
                    for (b, l, z) in rows {
                        outln!(buf, "{b},{l},{},{}", format_float(z.re), format_float(z.im));
                    }
                }
            }
        }
        Command::Transmit {
            params,
            branches,
            grid,
            out_dir,
            format,
        } => {
            let p = resolve_params(&params)?;
            let values = grid.values();
            let traces = branches
                .iter()
                .map(|&b| s21(&p, b, &values))
                .collect::<Result<Vec<_>, _>>()
                .map_err(wrap_transmission)?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir).map_err(|source| ExperimentError::Io {
                    path: dir.clone(),
                    source,
                })?;
                for t in &traces {
                    let path = dir.join(format!("trace_{}.csv", t.branch));
                    write_trace_csv(&path, t)?;
                    outln!(buf, "{}", path.display());
                }
                return Ok(buf);
            }
            match format {
                Format::Json => print_json(
                    &mut buf,
                    &json!(traces
                        .iter()
                        .map(|t| json!({
                            "branch": t.branch,
                            "omega": t.omega_grid,
                            "power": t.power,
                            "near_singular": t.near_singular,
                        }))
                        .collect::<Vec<_>>()),
                ),
                Format::Csv => {
                    outln!(buf, "{TRACE_CSV_HEADER}");
                    for t in &traces {
                        for k in 0..t.len() {
                            outln!(
                                buf,
                                "{},{},{},{},{},{}",
                                format_float(t.omega_grid[k]),
                                format_float(t.s21[k].re),
                                format_float(t.s21[k].im),
                                format_float(t.power[k]),
                                t.branch,
                                t.near_singular[k]
                            );
                        }
                    }
                }
            }
        }
        Command::Dynamics {
            params,
            branch,
            omega,
            t_end,
            dt,
            crosscheck,
            out_dir,
            format,
        } => {
            let p = resolve_params(&params)?;
            if crosscheck {
                let r = crosscheck_s21(&p, branch, omega).map_err(wrap_dynamics)?;
                match format {
                    Format::Json => print_json(&mut buf, &json!(r)),
                    Format::Csv => {
                        outln!(buf, "omega,re_s21_time,im_s21_time,re_s21_freq,im_s21_freq,abs_error");
                        outln!(
                            buf,
                            "{},{},{},{},{},{}",
                            format_float(r.omega),
                            format_float(r.s21_time_domain.re),
                            format_float(r.s21_time_domain.im),
                            format_float(r.s21_frequency_domain.re),
                            format_float(r.s21_frequency_domain.im),
                            format_float(r.abs_error)
                        );
                    }
                }
                return Ok(buf);
            }
            let dt = match dt {
                Some(dt) => dt,
                None => max_step(&p, branch, omega).map_err(wrap_dynamics)?,
            };
            let result = integrate(&p, branch, &DriveSpec::unit(omega), t_end, dt).map_err(wrap_dynamics)?;
            if !result.converged {
                log::warn!("no steady state by t = {t_end} (residual {:.3e})", result.residual);
            }
            let Some(dir) = out_dir else {
                match format {
                    Format::Json => print_json(
                        &mut buf,
                        &json!({
                            "converged": result.converged,
                            "steady_state": result.steady_state,
                            "residual": result.residual,
                        }),
                    ),
                    Format::Csv => buf.push_str(&trajectory_csv(&result)),
                }
                return Ok(buf);
            };
            let path = dir.join("trajectory.csv");
            std::fs::create_dir_all(&dir).map_err(|source| ExperimentError::Io {
                path: dir.clone(),
                source,
            })?;
            write_trajectory_csv(&path, &result)?;
            match format {
                Format::Json => print_json(
                    &mut buf,
                    &json!({
                        "trajectory": path,
                        "converged": result.converged,
                        "steady_state": result.steady_state,
                        "residual": result.residual,
                    }),
                ),
                Format::Csv => outln!(buf, "{}", path.display()),
            }
        }
        Command::ListPresets { format } => {
            let catalog = preset_catalog();
            match format {
                Format::Json => print_json(
                    &mut buf,
                    &json!(catalog
                        .iter()
                        .map(|p| json!({ "name": p.name, "kind": p.config.kind, "description": p.description }))
                        .collect::<Vec<_>>()),
                ),
                Format::Csv => {
                    outln!(buf, "name,kind,description");
                    for p in catalog {
                        outln!(buf, "{},{},{}", p.name, p.config.kind, p.description.replace(',', ";"));
                    }
                }
            }
        }
    }
    Ok(buf)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(cli) {
        Ok(text) => {
            // a closed pipe (e.g. `| head`) is not an error
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
