use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracsrc::error::ErrorKind;
use fracsrc::harness::config::load_configs;
use fracsrc::harness::experiment::setup;
use fracsrc::harness::output::{emit_outputs, write_results};
use fracsrc::harness::{registry, run_sweep, verify, ExperimentConfig};
use fracsrc::{Error, Result};

#[derive(Parser)]
#[command(name = "fracsrc", version, about = "Source reconstruction for time-fractional diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment file (one object or an array).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Registered experiment or sweep id (see `fracsrc list`).
    #[arg(long, global = true)]
    experiment: Option<String>,

    /// Overrides the noise / start-vector seed of every selected experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// List registered experiments and sweeps.
    List,
    /// Solve the forward problem for the ground truth and write slice norms.
    Forward,
    /// Write clean and noisy observation data.
    Noise,
    /// Run a single reconstruction and write its record, profile and plot script.
    Reconstruct,
    /// Run every selected experiment and collect `results.csv`.
    Sweep,
    /// Run the invariant and oracle self-checks.
    Verify,
}

const EXIT_NOT_CONVERGED: u8 = 3;

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Validation | ErrorKind::Io => 1,
        ErrorKind::Numerical => 2,
        ErrorKind::NotConverged => EXIT_NOT_CONVERGED,
    }
}

fn selected(cli: &Cli) -> Result<Vec<ExperimentConfig>> {
    let mut configs = match (&cli.config, &cli.experiment) {
        (Some(path), None) => load_configs(path)?,
        (None, Some(id)) => registry::resolve(id)?,
        (Some(_), Some(_)) => {
            return Err(Error::Invalid {
                field: "experiment",
                reason: "give either --config or --experiment, not both".into(),
            })
        }
        (None, None) => {
            return Err(Error::Invalid {
                field: "experiment",
                reason: "one of --config or --experiment is required".into(),
            })
        }
    };
    if let Some(seed) = cli.seed {
        for c in &mut configs {
            c.seed = seed;
        }
    }
    Ok(configs)
}

fn single(cli: &Cli) -> Result<ExperimentConfig> {
    let mut configs = selected(cli)?;
    if configs.len() != 1 {
        return Err(Error::Invalid {
            field: "experiment",
            reason: format!("this command takes one experiment, got {}", configs.len()),
        });
    }
    Ok(configs.remove(0))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, text: String) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_list() -> Result<u8> {
    for e in registry::entries() {
        let c = &e.config;
        println!(
            "{:<22} dim={} alpha={} delta={} omega={} ref_err={:.2}% ref_K={}",
            c.id,
            c.dim,
            c.alpha,
            c.delta,
            c.omega.label(),
            100.0 * e.reference.err,
            e.reference.k
        );
    }
    for (id, members) in registry::sweeps() {
        println!("{id:<22} sweep: {}", members.join(" "));
    }
    Ok(0)
}

fn cmd_forward(cli: &Cli) -> Result<u8> {
    let cfg = single(cli)?;
    let s = setup(&cfg)?;
    let u = s.problem.forward(&s.f_true)?;
    ensure_dir(&cli.out)?;
    let grid = s.problem.stepper().grid();
    let mut text = String::from("m,t,l2,h1_semi\n");
    for (m, slice) in u.slices().iter().enumerate() {
        let (l2, h1) = s.space.norms(slice);
        text.push_str(&format!("{m},{},{l2},{h1}\n", grid.t(m)));
    }
    let path = cli.out.join(format!("{}.forward.csv", cfg.id));
    write_text(&path, text)?;
    let (l2, _) = s.space.norms(&u.0[grid.steps()]);
    println!("{}: ||u(T)|| = {l2:.6e}, wrote {}", cfg.id, path.display());
    Ok(0)
}

fn cmd_noise(cli: &Cli) -> Result<u8> {
    let cfg = single(cli)?;
    let s = setup(&cfg)?;
    let clean = s.clean_data()?;
    let obs = fracsrc::harness::noise::gen_noise(&clean, s.mask.clone(), cfg.delta, cfg.seed)?;
    ensure_dir(&cli.out)?;
    let grid = s.problem.stepper().grid();
    let mut text = String::from("m,t,node,clean,observed\n");
    for (m, (c, o)) in clean.slices().iter().zip(obs.slices()).enumerate() {
        for (i, (a, b)) in c.coeffs().iter().zip(o).enumerate() {
            text.push_str(&format!("{m},{},{i},{a},{b}\n", grid.t(m)));
        }
    }
    let path = cli.out.join(format!("{}.observation.csv", cfg.id));
    write_text(&path, text)?;
    println!("{}: delta = {}, seed = {}, wrote {}", cfg.id, cfg.delta, cfg.seed, path.display());
    Ok(0)
}

fn report(r: &fracsrc::harness::RunRecord) {
    println!(
        "{:<22} err = {:6.2}%  K = {:3}  L = {:.4} (estimate {:.4}{})  {:.2}s{}",
        r.id,
        100.0 * r.err,
        r.k,
        r.l,
        r.norm_estimate,
        match (r.l_nominal, r.nominal_sufficient) {
            (Some(n), Some(ok)) => format!(", nominal {n} {}", if ok { "sufficient" } else { "too small" }),
            _ => String::new(),
        },
        r.seconds,
        if r.converged { "" } else { "  [max_iters reached]" }
    );
}

fn cmd_reconstruct(cli: &Cli) -> Result<u8> {
    let cfg = single(cli)?;
    let run = fracsrc::harness::run_experiment(&cfg)?;
    let files = emit_outputs(&cli.out, &run)?;
    report(&run.record);
    println!("wrote {} and {}", files.record.display(), files.profile.display());
    Ok(if run.record.converged { 0 } else { EXIT_NOT_CONVERGED })
}

fn cmd_sweep(cli: &Cli) -> Result<u8> {
    let configs = selected(cli)?;
    let runs = run_sweep(&configs);
    ensure_dir(&cli.out)?;
    let mut records = Vec::new();
    let mut code = 0;
    for (cfg, run) in configs.iter().zip(runs) {
        match run {
            Ok(run) => {
                emit_outputs(&cli.out, &run)?;
                report(&run.record);
                if !run.record.converged {
                    code = code.max(EXIT_NOT_CONVERGED);
                }
                records.push(run.record);
            }
            Err(e) => {
                eprintln!("{}: {e}", cfg.id);
                code = code.max(exit_code(&e));
            }
        }
    }
    let path = cli.out.join("results.csv");
    write_results(&path, &records)?;
    println!("wrote {}", path.display());
    Ok(code)
}

fn cmd_verify() -> Result<u8> {
    let checks = verify::run_suite()?;
    let mut failed = 0;
    for c in &checks {
        println!("{} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    Ok(if failed == 0 { 0 } else { 2 })
}

fn run(cli: &Cli) -> Result<u8> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Invalid {
                field: "threads",
                reason: "must be at least 1".into(),
            });
        }
        // only fails if a global pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::List => cmd_list(),
        Command::Forward => cmd_forward(cli),
        Command::Noise => cmd_noise(cli),
        Command::Reconstruct => cmd_reconstruct(cli),
        Command::Sweep => cmd_sweep(cli),
        Command::Verify => cmd_verify(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
