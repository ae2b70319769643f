use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hfce::channel::sample_scene;
use hfce::harness::{
    calibrate, complexity_eval, load_config, nmse, run_scheme, run_sweep, to_db, write_results, ComplexityParams,
    ComplexityScheme, ConfigFile, Scheme, SceneFile,
};
use hfce::observation::{observe, sigma_for_snr, PilotConfig};
use hfce::Result;

/// Hybrid-field channel estimation simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a scene and write it as JSON.
    Generate {
        /// TOML config; reference parameters when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Run one scheme on one noisy observation of a stored scene.
    Estimate {
        #[arg(long)]
        scene: PathBuf,
        /// TOML config for the dictionary, estimator and pilot.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "eps-omp-ssigw")]
        scheme: Scheme,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a Monte-Carlo sweep and write CSV plus plot data.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output path.
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Overrides the config's trial count.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Evaluate an operation-count formula.
    Complexity(ComplexityArgs),
}

#[derive(Args)]
struct ComplexityArgs {
    /// One of hf-omp-gamma, hf-omp-no-gamma, hf-sd-omp, hf-sgp-gamma,
    /// hf-sgp-no-gamma, eps-omp-ssigw.
    #[arg(long)]
    scheme: ComplexityScheme,
    #[arg(long = "N")]
    n: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long = "L_F")]
    l_f: Option<f64>,
    #[arg(long = "L_N")]
    l_n: Option<f64>,
    #[arg(long = "Q_F")]
    q_f: Option<f64>,
    #[arg(long = "Q_N")]
    q_n: Option<f64>,
    #[arg(long = "Q")]
    q: Option<f64>,
    #[arg(long = "O")]
    o: Option<f64>,
    #[arg(long = "N_gamma")]
    n_gamma: Option<f64>,
    #[arg(long = "N_iter")]
    n_iter: Option<f64>,
    #[arg(long = "B")]
    b: Option<f64>,
    #[arg(long = "i")]
    i: Option<f64>,
}

fn config_or_default(path: Option<&Path>) -> Result<ConfigFile> {
    path.map_or_else(|| Ok(ConfigFile::default()), load_config)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, seed, output } => {
            let system = config_or_default(config.as_deref())?.system_config()?;
            let scene = sample_scene(&system, seed)?;
            SceneFile::from(&scene).save(&output)?;
            println!("wrote {} ({} paths, N = {})", output.display(), scene.paths.len(), system.n_antennas);
        }
        Command::Estimate {
            scene,
            config,
            scheme,
            snr_db,
            seed,
        } => {
            let scene = SceneFile::load(&scene)?.into_scene()?;
            let mut spec = config_or_default(config.as_deref())?.sweep_spec()?;
            spec.system = scene.config;
            spec.seed = seed;
            let calibration = calibrate(&spec, scheme == Scheme::Mmse)?;
            let sigma2 = sigma_for_snr(snr_db, spec.pilot_length, calibration.avg_power)?;
            let obs = observe(&scene.channel, PilotConfig::new(spec.pilot_length, sigma2)?, seed)?;
            let dict = spec.dictionary.build(&spec.system)?;
            let mut params = spec.estimator_params;
            params.epsilon = spec.epsilon_for(sigma2);
            let (h_hat, iterations) =
                run_scheme(scheme, &obs, &dict, &params, &spec.system, calibration.covariance.as_ref())?;
            let err = nmse(&h_hat, &scene.channel)?;
            println!("scheme      {scheme}");
            println!("snr_db      {snr_db}");
            println!("nmse        {err:e}");
            println!("nmse_db     {:.3}", to_db(err));
            println!("iterations  {iterations}");
        }
        Command::Sweep { config, output, trials } => {
            let mut spec = load_config(&config)?.sweep_spec()?;
            if let Some(t) = trials {
                spec.n_trials = t;
            }
            let output = output
                .or_else(|| spec.output_path.clone())
                .unwrap_or_else(|| PathBuf::from("sweep.csv"));
            let result = run_sweep(&spec)?;
            if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| hfce::Error::Io {
                    path: parent.to_path_buf(),
                    source: e,
                })?;
            }
            write_results(&result, &output)?;
            for row in &result.rows {
                println!(
                    "{:<14} {:>6} dB  nmse {:>8.2} dB  iters {:>5.2}  failures {}",
                    row.scheme,
                    row.snr_db,
                    to_db(row.mean_nmse),
                    row.mean_iterations,
                    row.failures
                );
            }
            println!("wrote {}", output.display());
        }
        Command::Complexity(a) => {
            let params = ComplexityParams {
                n: a.n,
                l: a.l,
                l_f: a.l_f,
                l_n: a.l_n,
                q_f: a.q_f,
                q_n: a.q_n,
                q: a.q,
                o: a.o,
                n_gamma: a.n_gamma,
                n_iter: a.n_iter,
                b: a.b,
                i: a.i,
            };
            println!("{}", complexity_eval(a.scheme, &params)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
