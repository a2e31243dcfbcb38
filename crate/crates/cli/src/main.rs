//! `morinode`: command-line driver for the periodic-operator analyses.

mod io;

use std::fs::{self, OpenOptions};
use std::io::Write as _;
use std::path::PathBuf;
use std::sync::Mutex;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use morinode::globalgeo::{self, Direction, GammaCurve};
use morinode::*;
use serde_json::{json, Value};

use io::*;

#[derive(Parser, Debug)]
#[command(name = "morinode", version, about = "Fibres, Morin singularities and solution counts for u' + f(t,u) = v")]
struct Cli {
    /// Root of the result tree `<out>/<command>/<config-hash>.json`.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Print the JSON result without writing it under `--out`.
    #[arg(long, global = true)]
    no_save: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Problem {
    /// Nonlinearity file `{"terms": [{"power", "a0", "cos", "sin"}], "builtin"}`.
    #[arg(long)]
    problem: PathBuf,
}

#[derive(Args, Debug)]
struct Sampling {
    /// Grid size used to sample Fourier inputs.
    #[arg(long, default_value_t = 2048)]
    grid: usize,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sigma_1..Sigma_5 and Sigma_a, Sigma_b, Sigma_c at a function.
    Sigma {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        ansatz: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Morin order with the transversality test.
    ClassifyPoint {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        ansatz: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, default_value_t = 8)]
        harmonics: usize,
    },
    /// Global classification of the operator with its evidence.
    ClassifyOperator {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
    },
    /// Periodic solutions on the fibre over the mean-free part of `--rhs`.
    Fibre {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        rhs: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["initial", "trace"])]
        average: Option<f64>,
        #[arg(long, allow_negative_numbers = true, conflicts_with = "trace")]
        initial: Option<f64>,
        /// Trace `Phi` at COUNT averages in [LO, HI].
        #[arg(long, num_args = 3, allow_negative_numbers = true, value_names = ["LO", "HI", "COUNT"])]
        trace: Option<Vec<f64>>,
        #[arg(long, default_value_t = FibreOptions::default().substeps)]
        substeps: usize,
    },
    /// rho_v(x0) and rho_v'(x0) for each `--x0`.
    ReturnMap {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        rhs: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, required = true, num_args = 1.., allow_negative_numbers = true)]
        x0: Vec<f64>,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    /// Periodic-solution census through the return map, plus a CSV curve.
    CountSolutions {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        rhs: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"], default_values_t = [-0.4, 0.4])]
        range: Vec<f64>,
        #[arg(long, default_value_t = 2e-4)]
        step: f64,
        #[arg(long, default_value_t = 801)]
        scan_n: usize,
        /// Skip the rerun at half the step.
        #[arg(long)]
        no_halving: bool,
        /// CSV destination; defaults to the JSON path with a `.csv` extension.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Gauss-Newton search for prescribed Sigma values.
    FindSingularity {
        /// Fixed nonlinearity; use `--family` for free parameters.
        #[arg(long, conflicts_with = "family", required_unless_present = "family")]
        problem: Option<PathBuf>,
        /// Family file `{"base": <nonlinearity>, "params": [{"name", "power", "scale", "value", "free"}]}`.
        #[arg(long)]
        family: Option<PathBuf>,
        #[arg(long)]
        ansatz: PathBuf,
        #[arg(long, required = true, num_args = 1..=4, allow_negative_numbers = true)]
        target: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1.0)]
        damping: f64,
        #[arg(long, default_value_t = 2048)]
        grid: usize,
    },
    /// Does the convex hull of (f', ..., f^(k)) over [LO, HI] contain the origin?
    Hull {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 401)]
        samples: usize,
    },
    /// Degree of the operator from the signs of f at infinity.
    Degree {
        #[command(flatten)]
        problem: Problem,
    },
    /// Finite-range wildness diagnostic.
    Tameness {
        #[command(flatten)]
        problem: Problem,
        #[arg(long, default_value_t = 50.0)]
        s_max: f64,
        #[arg(long, default_value_t = 32)]
        probes: usize,
    },
    /// Time change to or from the simplified operator.
    Reparam {
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        ansatz: PathBuf,
        #[command(flatten)]
        sampling: Sampling,
        /// Treat the input as a simplified-operator function and map it back.
        #[arg(long)]
        from_simplified: bool,
    },
    /// Classification or solution counts over a parameter grid (resumable).
    Sweep {
        #[arg(long)]
        family: PathBuf,
        /// `name=v1,v2,...`; repeat for more axes.
        #[arg(long = "axis", required = true)]
        axes: Vec<String>,
        #[arg(long, value_enum, default_value_t = Analysis::Classify)]
        analysis: Analysis,
        #[arg(long, required_if_eq("analysis", "count"))]
        rhs: Option<PathBuf>,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["LO", "HI"])]
        range: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2e-4)]
        step: f64,
        #[arg(long, default_value_t = 801)]
        scan_n: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Analysis {
    Classify,
    Count,
}

fn name_of(c: &Command) -> &'static str {
    match c {
        Command::Sigma { .. } => "sigma",
        Command::ClassifyPoint { .. } => "classify-point",
        Command::ClassifyOperator { .. } => "classify-operator",
        Command::Fibre { .. } => "fibre",
        Command::ReturnMap { .. } => "return-map",
        Command::CountSolutions { .. } => "count-solutions",
        Command::FindSingularity { .. } => "find-singularity",
        Command::Hull { .. } => "hull",
        Command::Degree { .. } => "degree",
        Command::Tameness { .. } => "tameness",
        Command::Reparam { .. } => "reparam",
        Command::Sweep { .. } => "sweep",
    }
}

fn pair(v: &Option<Vec<f64>>) -> Option<(f64, f64)> {
    v.as_ref().map(|r| (r[0], r[1]))
}

fn positive(name: &str, x: f64) -> CliResult<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive, got {x}")))
    }
}

fn parse_axis(s: &str) -> CliResult<ParamAxis> {
    let (name, values) = s.split_once('=').ok_or_else(|| usage(format!("axis {s:?} is not name=v1,v2,...")))?;
    let values = values
        .split(',')
        .filter(|v| !v.is_empty())
        .map(|v| v.trim().parse::<f64>().map_err(|e| usage(format!("axis {name}: {v:?}: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ParamAxis {
        name: name.trim().to_string(),
        values,
    })
}

struct Output {
    doc: Value,
}

fn run(cli: &Cli) -> CliResult<Output> {
    let command = name_of(&cli.command);
    let done = |config: Value, result: Value| -> CliResult<Output> {
        Ok(Output {
            doc: envelope(command, &config, result)?,
        })
    };
    match &cli.command {
        Command::Sigma { problem, ansatz, sampling } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (u, ur) = load_function(ansatz, grid(sampling.grid)?)?;
            let report = sigma_vec(&f, &u);
            let order = classify_point(&f, &u, &ClassifyOptions::default()).ok().and_then(|r| r.order);
            let config = json!({"problem": fr, "ansatz": ur, "grid": sampling.grid});
            done(
                config,
                json!({"sigma": report.sigma, "sigma_abc": report.sigma_abc, "tol_zero": report.tol_zero, "order": order}),
            )
        }
        Command::ClassifyPoint {
            problem,
            ansatz,
            sampling,
            harmonics,
        } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (u, ur) = load_function(ansatz, grid(sampling.grid)?)?;
            let opts = ClassifyOptions {
                harmonics: *harmonics,
                ..ClassifyOptions::default()
            };
            let report = classify_point(&f, &u, &opts)?;
            done(json!({"problem": fr, "ansatz": ur, "grid": sampling.grid, "options": opts}), json!(report))
        }
        Command::ClassifyOperator { problem, range } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let report = globalgeo::classify_operator(&f, pair(range))?;
            done(json!({"problem": fr, "range": range}), json!(report))
        }
        Command::Fibre {
            problem,
            rhs,
            sampling,
            average,
            initial,
            trace,
            substeps,
        } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (v, vr) = load_function(rhs, grid(sampling.grid)?)?;
            let vt = v.mean_free();
            let opts = FibreOptions {
                substeps: *substeps,
                ..FibreOptions::default()
            };
            let config = json!({"problem": fr, "rhs": vr, "grid": sampling.grid, "average": average,
                "initial": initial, "trace": trace, "options": opts});
            let result = match (average, initial, trace) {
                (_, _, Some(t)) => {
                    if t[2] < 2.0 || t[2].fract() != 0.0 {
                        return Err(usage("--trace COUNT must be an integer of at least 2"));
                    }
                    json!({"trace": fibre_trace(&f, &vt, t[0], t[1], t[2] as usize, &opts)?})
                }
                (Some(a), _, _) => json!({"point": solve_periodic(&f, &vt, Constraint::Average(*a), &opts)?}),
                (_, Some(c), _) => json!({"point": solve_periodic(&f, &vt, Constraint::InitialValue(*c), &opts)?}),
                _ => return Err(usage("fibre needs one of --average, --initial or --trace")),
            };
            done(config, result)
        }
        Command::ReturnMap {
            problem,
            rhs,
            sampling,
            x0,
            step,
        } => {
            positive("step", *step)?;
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (v, vr) = load_function(rhs, grid(sampling.grid)?)?;
            let points = x0
                .iter()
                .map(|&x| {
                    let e = return_map(&f, &v, x, *step)?;
                    Ok(json!({"x0": x, "outcome": e.outcome, "derivative": e.derivative}))
                })
                .collect::<CliResult<Vec<_>>>()?;
            done(json!({"problem": fr, "rhs": vr, "grid": sampling.grid, "x0": x0, "step": step}), json!({"points": points}))
        }
        Command::CountSolutions {
            problem,
            rhs,
            sampling,
            range,
            step,
            scan_n,
            no_halving,
            csv,
        } => {
            positive("step", *step)?;
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (v, vr) = load_function(rhs, grid(sampling.grid)?)?;
            let opts = CensusOptions {
                verify_halving: !no_halving,
                ..CensusOptions::default()
            };
            let census = count_solutions(&f, &v, range[0], range[1], *scan_n, *step, &opts)?;
            let config = json!({"problem": fr, "rhs": vr, "grid": sampling.grid, "range": range,
                "step": step, "scan_n": scan_n, "options": opts});
            let body = csv_curve(command, census.curve());
            let csv_path = csv.clone().unwrap_or_else(|| result_path(&cli.out, command, &config, "csv"));
            if csv.is_some() || !cli.no_save {
                write_file(&csv_path, &body)?;
            }
            let result = json!({
                "count": census.count,
                "signed_count": census.signed_count,
                "roots": census.roots,
                "unresolved": census.unresolved,
                "degenerate": census.degenerate,
                "halving": census.halving,
                "stable_under_halving": census.stable_under_halving(),
                "scan": census.scan,
                "csv": csv_path,
            });
            Ok(Output {
                doc: envelope(command, &config, result)?,
            })
        }
        Command::FindSingularity {
            problem,
            family,
            ansatz,
            target,
            max_iter,
            tol,
            damping,
            grid: n,
        } => {
            let (fam, famr) = match (problem, family) {
                (_, Some(p)) => load::<Family>(p)?,
                (Some(p), None) => {
                    let (f, r) = load::<Nonlinearity>(p)?;
                    (Family::fixed(f), r)
                }
                (None, None) => return Err(usage("find-singularity needs --problem or --family")),
            };
            let (start, ar) = load::<FourierAnsatz>(ansatz)?;
            positive("tol", *tol)?;
            positive("damping", *damping)?;
            let problem = SearchProblem {
                family: fam,
                ansatz: start,
                mask: None,
                target: target.clone(),
                options: SearchOptions {
                    max_iter: *max_iter,
                    tol: *tol,
                    damping: *damping,
                    grid_size: *n,
                    ..SearchOptions::default()
                },
            };
            let report = gauss_newton(&problem)?;
            done(json!({"family": famr, "ansatz": ar, "target": target, "options": problem.options}), json!(report))
        }
        Command::Hull {
            problem,
            k,
            range,
            samples,
        } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (lo, hi) = match pair(range) {
                Some(r) => r,
                None => globalgeo::default_range(&f.poly_coeffs().ok_or_else(|| usage("hull needs --range unless f is an autonomous polynomial"))?),
            };
            let curve = GammaCurve::sample(&f, *k, lo, hi, *samples)?;
            let verdict = globalgeo::hull_origin_test(&curve)?;
            let residual = verdict.certificate_residual(&curve);
            done(
                json!({"problem": fr, "k": k, "range": [lo, hi], "samples": samples}),
                json!({"verdict": verdict, "certificate_residual": residual}),
            )
        }
        Command::Degree { problem } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            done(json!({"problem": fr}), json!({"degree": globalgeo::degree(&f)?}))
        }
        Command::Tameness { problem, s_max, probes } => {
            positive("s-max", *s_max)?;
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let report = globalgeo::tameness(&f, *s_max, *probes)?;
            done(json!({"problem": fr, "s_max": s_max, "probes": probes}), json!(report))
        }
        Command::Reparam {
            problem,
            ansatz,
            sampling,
            from_simplified,
        } => {
            let (f, fr) = load::<Nonlinearity>(&problem.problem)?;
            let (u, ur) = load_function(ansatz, grid(sampling.grid)?)?;
            let dir = if *from_simplified {
                Direction::FromSimplified(u)
            } else {
                Direction::ToSimplified(u)
            };
            let r = globalgeo::reparam(&f, &dir)?;
            done(
                json!({"problem": fr, "ansatz": ur, "grid": sampling.grid, "from_simplified": from_simplified}),
                json!(r),
            )
        }
        Command::Sweep {
            family,
            axes,
            analysis,
            rhs,
            sampling,
            range,
            step,
            scan_n,
        } => {
            let (fam, famr) = load::<Family>(family)?;
            let axes = axes.iter().map(|a| parse_axis(a)).collect::<CliResult<Vec<_>>>()?;
            let (cell, rhs_raw) = match analysis {
                Analysis::Classify => (CellAnalysis::Classify { x_range: pair(range) }, Value::Null),
                Analysis::Count => {
                    positive("step", *step)?;
                    let path = rhs.as_ref().ok_or_else(|| usage("--analysis count needs --rhs"))?;
                    let (v, vr) = load_function(path, grid(sampling.grid)?)?;
                    let (lo, hi) = pair(range).unwrap_or((-0.4, 0.4));
                    let options = CensusOptions {
                        verify_halving: false,
                        ..CensusOptions::default()
                    };
                    (
                        CellAnalysis::Count {
                            rhs: v,
                            x_lo: lo,
                            x_hi: hi,
                            scan_n: *scan_n,
                            step: *step,
                            options,
                        },
                        vr,
                    )
                }
            };
            let config = json!({"family": famr, "axes": axes, "analysis": format!("{analysis:?}").to_lowercase(),
                "rhs": rhs_raw, "grid": sampling.grid, "range": range, "step": step, "scan_n": scan_n});
            let table = run_sweep(cli, &fam, &axes, &cell, &config)?;
            done(config, json!(table))
        }
    }
}

/// Sweep with resumption from a finished table or a partial cell log.
fn run_sweep(cli: &Cli, family: &Family, axes: &[ParamAxis], analysis: &CellAnalysis, config: &Value) -> CliResult<SweepTable> {
    let final_path = result_path(&cli.out, "sweep", config, "json");
    let log_path = result_path(&cli.out, "sweep", config, "partial.jsonl");
    let mut done: Vec<SweepCell> = Vec::new();
    if !cli.no_save {
        if final_path.exists() {
            let (doc, _) = load::<Value>(&final_path)?;
            if validate(&doc, "sweep") {
                if let Some(cells) = doc.get("cells") {
                    done = parse_value(&final_path, cells)?;
                }
            }
        }
        if let Ok(text) = fs::read_to_string(&log_path) {
            // a torn last line from an interrupted run is skipped
            done.extend(text.lines().filter_map(|l| serde_json::from_str::<SweepCell>(l).ok()));
        }
    }
    let log = if cli.no_save {
        None
    } else {
        if let Some(dir) = log_path.parent() {
            fs::create_dir_all(dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&log_path)
            .map_err(|e| usage(format!("cannot open {}: {e}", log_path.display())))?;
        Some(Mutex::new(file))
    };
    let on_cell = |cell: &SweepCell| {
        if let Some(log) = &log {
            let line = serde_json::to_string(cell).expect("cell serializes");
            let mut file = log.lock().expect("log lock");
            let _ = writeln!(file, "{line}");
        }
    };
    let table = sweep(family, axes, analysis, &done, &on_cell)?;
    drop(log);
    if !cli.no_save {
        let _ = fs::remove_file(&log_path);
    }
    Ok(table)
}

fn configure_threads() -> CliResult<()> {
    if let Ok(raw) = std::env::var("MORINODE_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| usage(format!("MORINODE_THREADS must be a positive integer, got {raw:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    Ok(())
}

fn emit(cli: &Cli, out: &Output) -> CliResult<()> {
    let command = name_of(&cli.command);
    let text = serde_json::to_string_pretty(&out.doc).map_err(|e| usage(e.to_string()))? + "\n";
    if !cli.no_save {
        let path = result_path(&cli.out, command, &out.doc["config"], "json");
        write_file(&path, &text)?;
        eprintln!("wrote {}", path.display());
    }
    print!("{text}");
    Ok(())
}

fn main() {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand | ErrorKind::MissingSubcommand | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => 64,
                _ => 2,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(2);
        }
    };
    let result = configure_threads().and_then(|_| run(&cli)).and_then(|out| emit(&cli, &out));
    if let Err(e) = result {
        eprintln!("error: {}", e.to_string().replace('\n', " "));
        std::process::exit(e.exit_code());
    }
}
