//! Command-line front end: simulations, verification suites, one-shot
//! decompositions, weight construction, and kernel multiplier sweeps.
//!
//! Exit codes: 0 success / all checks pass, 1 check or run failure,
//! 2 configuration error.

use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use muskat_lab::config;
use muskat_lab::diagnostics::{
    difference_kernel_multiplier, export_plot_data, write_atomic, DiffOrder, KernelSpec,
};
use muskat_lab::evolution::run;
use muskat_lab::muskat::decompose;
use muskat_lab::verify::{run_suite, SuiteId, VerifyConfig, ALL_SUITES};
use muskat_lab::weights::{build_weight_from_spectrum, validate_admissible, default_radii, Weight};
use muskat_lab::Error;

#[derive(Parser)]
#[command(name = "muskatlab", about = "Spectral laboratory for the Muskat interface equation")]
struct Cli {
    /// Config file; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's output.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (env MUSKATLAB_THREADS when absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Random seed for verification families.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Quadrature resolution: ref (as configured) or fine (node counts doubled).
    #[arg(long, global = true, default_value = "ref")]
    resolution: String,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate the configured Cauchy problem and export diagnostics.
    Simulate,
    /// Run one verification suite (or `all`).
    Verify { suite: String },
    /// One-shot quasilinear decomposition of the configured initial data.
    Decompose,
    /// Weight utilities.
    Weights {
        #[command(subcommand)]
        cmd: WeightsCmd,
    },
    /// Kernel multiplier utilities.
    Kernels {
        #[command(subcommand)]
        cmd: KernelsCmd,
    },
}

#[derive(Subcommand)]
enum WeightsCmd {
    /// Build a tail-adapted weight from a two-column `radius omega` spectrum file.
    Build { spectrum_file: PathBuf },
}

#[derive(Subcommand)]
enum KernelsCmd {
    /// Sweep a difference-kernel multiplier over a log-spaced frequency range.
    /// Spec: comma list like `order=first,b=0.5,kappa_pow=0,weight=unit`.
    Sweep { kernel_spec: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli
        .threads
        .or_else(|| std::env::var("MUSKATLAB_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match dispatch(&cli) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::from(0)
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn load_config(cli: &Cli) -> Result<config::RunConfig, Error> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut cfg = config::parse(&text)?;
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
        cfg.sim.checkpoint_path = Some(out.join("state.ck"));
    }
    if cli.resolution == "fine" {
        cfg.sim.quad = cfg.sim.quad.refined();
    } else if cli.resolution != "ref" {
        return Err(Error::config(format!(
            "--resolution '{}' is not ref | fine",
            cli.resolution
        )));
    }
    std::fs::create_dir_all(&cfg.out_dir)?;
    // freeze the effective config next to the outputs
    write_atomic(&cfg.out_dir.join("config.frozen"), &cfg.to_text())?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<bool, Error> {
    match &cli.cmd {
        Cmd::Simulate => {
            let cfg = load_config(cli)?;
            let (state, csv) = run(&cfg.sim)?;
            write_atomic(&cfg.out_dir.join("diagnostics.csv"), &csv)?;
            export_plot_data(&state.history, &cfg.out_dir)?;
            let aborted = csv.contains("# abort");
            println!(
                "simulate: t={:.4} steps={} records={}{}",
                state.t,
                state.step,
                state.history.len(),
                if aborted { " (aborted)" } else { "" }
            );
            Ok(!aborted)
        }
        Cmd::Verify { suite } => {
            let cfg = load_config(cli)?;
            let suites: Vec<SuiteId> = if suite == "all" {
                ALL_SUITES.to_vec()
            } else {
                vec![suite.parse()?]
            };
            let vcfg = VerifyConfig {
                grid: cfg.sim.grid,
                quad: cfg.sim.quad,
                seed: cli.seed,
                family: 10,
            };
            let mut all = true;
            for id in suites {
                let rep = run_suite(id, &vcfg)?;
                print!("{}", rep.to_table());
                write_atomic(
                    &cfg.out_dir.join(format!("verify_{}.json", id.name())),
                    &rep.to_json(),
                )?;
                all &= rep.pass();
            }
            Ok(all)
        }
        Cmd::Decompose => {
            let cfg = load_config(cli)?;
            let f = cfg.sim.initial.build(cfg.sim.grid)?;
            let d = decompose(&f, &f, &cfg.sim.quad)?;
            let mut report = format!(
                "residual = {:.6e}\n|L(f)f| = {:.6e}\n|P(f)f| = {:.6e}\n\
                 |V(f)| = ({:.6e}, {:.6e})\n|R(f,f)| = {:.6e}\n",
                d.residual,
                d.total.l2_norm(),
                d.p_part.l2_norm(),
                d.drift.0.l2_norm(),
                d.drift.1.l2_norm(),
                d.remainder.l2_norm()
            );
            report.push_str("files: total.dat p_part.dat drift_x.dat drift_y.dat remainder.dat\n");
            write_atomic(&cfg.out_dir.join("decompose.txt"), &report)?;
            for (name, field) in [
                ("total", &d.total),
                ("p_part", &d.p_part),
                ("drift_x", &d.drift.0),
                ("drift_y", &d.drift.1),
                ("remainder", &d.remainder),
            ] {
                write_field(&cfg.out_dir.join(format!("{name}.dat")), field)?;
            }
            print!("{report}");
            Ok(true)
        }
        Cmd::Weights { cmd: WeightsCmd::Build { spectrum_file } } => {
            let cfg = load_config(cli)?;
            let text = std::fs::read_to_string(spectrum_file)?;
            let mut omega = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap().trim();
                if line.is_empty() {
                    continue;
                }
                let mut it = line.split_whitespace();
                let bad = || {
                    Error::config(format!(
                        "{}:{}: expected 'radius omega'",
                        spectrum_file.display(),
                        lineno + 1
                    ))
                };
                let r: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let m: f64 = it.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                omega.push((r, m));
            }
            let w = build_weight_from_spectrum(&omega)?;
            let rep = validate_admissible(&w, &default_radii());
            write_atomic(&cfg.out_dir.join("weight.txt"), &w.to_spec_text())?;
            println!("{}", w.to_spec_text());
            println!("admissible: {}", if rep.pass() { "pass" } else { "FAIL" });
            Ok(rep.pass())
        }
        Cmd::Kernels { cmd: KernelsCmd::Sweep { kernel_spec } } => {
            let cfg = load_config(cli)?;
            let spec = parse_kernel_spec(kernel_spec)?;
            let rhos: Vec<f64> = (0..61)
                .map(|i| 0.05 * (10.0f64 / 0.05).powf(i as f64 / 60.0))
                .collect();
            let xi: Vec<(f64, f64)> = rhos.iter().map(|&r| (r, 0.0)).collect();
            let m = difference_kernel_multiplier(&spec, &xi)?;
            let mut text = String::from("# |xi|  m(xi)\n");
            for (r, v) in rhos.iter().zip(m.iter()) {
                text.push_str(&format!("{r:.8e} {v:.8e}\n"));
            }
            write_atomic(&cfg.out_dir.join("kernel_sweep.dat"), &text)?;
            println!("kernel sweep written: {} samples", rhos.len());
            Ok(true)
        }
    }
}

fn write_field(path: &Path, f: &muskat_lab::field::RealField) -> Result<(), Error> {
    let g = f.grid;
    let mut text = String::with_capacity(24 * g.len());
    for i in 0..g.n {
        for j in 0..g.n {
            text.push_str(&format!("{} {} {:.10e}\n", g.x(i), g.x(j), f.data[i * g.n + j]));
        }
        text.push('\n');
    }
    write_atomic(path, &text)
}

fn parse_kernel_spec(s: &str) -> Result<KernelSpec, Error> {
    let mut order = DiffOrder::First;
    let mut b = 0.5;
    let mut kappa_pow = 0u32;
    let mut weight = Weight::unit();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::config(format!("kernel spec entry '{part}': expected k=v")))?;
        match k.trim() {
            "order" => {
                order = match v.trim() {
                    "first" => DiffOrder::First,
                    "second" => DiffOrder::Second,
                    "taylor" => DiffOrder::TaylorRemoved,
                    o => {
                        return Err(Error::config(format!(
                            "kernel order '{o}' is not first | second | taylor"
                        )))
                    }
                }
            }
            "b" => {
                b = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("kernel spec: bad b '{v}'")))?
            }
            "kappa_pow" => {
                kappa_pow = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::config(format!("kernel spec: bad kappa_pow '{v}'")))?
            }
            "weight" => {
                weight = match v.trim() {
                    "unit" => Weight::unit(),
                    w if w.starts_with("log_pow:") => {
                        let a = w["log_pow:".len()..]
                            .parse()
                            .map_err(|_| Error::config("kernel spec: bad log_pow exponent"))?;
                        Weight::log_pow(a)?
                    }
                    o => {
                        return Err(Error::config(format!(
                            "kernel weight '{o}' is not unit | log_pow:<a>"
                        )))
                    }
                }
            }
            other => return Err(Error::config(format!("kernel spec: unknown key '{other}'"))),
        }
    }
    let spec = KernelSpec { order, b, kappa_pow, weight };
    spec.validate()?;
    Ok(spec)
}
