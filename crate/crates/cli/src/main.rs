//! Command-line pipeline: simulate, degrade, solve, quantify uncertainty —
//! stage by stage or end to end.
//!
//! Stage commands share one working directory and conventional file names
//! (`truth.blc`, `observations.blc`, `mask.blc`, `x_map.blc`, `config.txt`,
//! `meta.txt`), so a pipeline can be replayed or resumed piecewise. All
//! parameters come from a flat `key = value` config file plus `--set`
//! overrides; `run` does the whole thing in one shot.
//!
//! Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 i/o error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use ballkit::error::Error as BkError;
use ballkit::experiment::{
    fit_scaling_exponent, run_experiment, transform_round_trip_secs, ExperimentConfig,
};
use ballkit::io;
use ballkit::ops::{make_kernel, naive_inverse, Mask, SensingOp};
use ballkit::sim::{add_noise, inject_feature, simulate_ground_truth, snr_db, FeatureSpec};
use ballkit::solver::{solve_map, DataWeights, Objective, SolveOpts};
use ballkit::uq::{hypothesis_test, local_credible_intervals, Region};
use ballkit::wavelets::Tiling;
use ballkit::{BallPlan, BallSamples};

#[derive(Parser)]
#[command(
    name = "ballkit",
    about = "Sparse variational inversion and uncertainty quantification on the solid 3D ball",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// Flat key = value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline overrides, repeatable: --set key=value.
    #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Working/output directory (also via BALLKIT_OUTPUT_DIR).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn build(&self) -> Result<ExperimentConfig, BkError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                BkError::InvalidArg(format!("--set wants key=value, got {kv:?}"))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw the ground-truth field (and optional injected feature).
    Simulate(ConfigArgs),
    /// Push the truth through the sensing operator and add noise.
    Degrade {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Ground-truth samples file (default: <out>/truth.blc).
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Reconstruct: naive direct inversion plus the MAP estimate.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Observations file (default: <out>/observations.blc).
        #[arg(long)]
        obs: Option<PathBuf>,
        /// Mask file (default: <out>/mask.blc).
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Noise level; default comes from <out>/meta.txt.
        #[arg(long)]
        sigma: Option<f64>,
    },
    /// Uncertainty quantification on a solved directory.
    Uq {
        #[command(subcommand)]
        what: UqCommand,
    },
    /// Full pipeline: simulate, degrade, solve, UQ, artifacts.
    Run(ConfigArgs),
    /// Transform scaling benchmark (round-trip time vs bandlimit).
    Bench {
        /// Bandlimits to time.
        #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
        sizes: Vec<usize>,
        /// Measurements per size (median reported).
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Optional CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum UqCommand {
    /// Hypothesis test of local structure in a region.
    Test {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Region: "p0:p1,t0:t1,f0:f1" block or "@file" with voxel indices.
        #[arg(long)]
        region: String,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Local credible intervals over a block partition.
    Lci {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Block sizes "bp,bt,bf" (default from config or 4,4,8).
        #[arg(long)]
        blocks: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &BkError) -> u8 {
    match e {
        BkError::Io(_) | BkError::Format(_) => 3,
        BkError::Numerical(_) | BkError::NotConverged { .. } => 2,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<(), BkError> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&args.build()?),
        Command::Degrade { cfg, truth } => cmd_degrade(&cfg.build()?, truth.as_deref()),
        Command::Solve {
            cfg,
            obs,
            mask,
            sigma,
        } => cmd_solve(&cfg.build()?, obs.as_deref(), mask.as_deref(), sigma),
        Command::Uq { what } => match what {
            UqCommand::Test { cfg, region, alpha } => cmd_uq_test(&cfg.build()?, &region, alpha),
            UqCommand::Lci {
                cfg,
                blocks,
                alpha,
                tol,
            } => cmd_uq_lci(&cfg.build()?, blocks.as_deref(), alpha, tol),
        },
        Command::Run(args) => cmd_run(&args.build()?),
        Command::Bench { sizes, reps, csv } => cmd_bench(&sizes, reps, csv.as_deref()),
    }
}

fn outdir(cfg: &ExperimentConfig) -> Result<PathBuf, BkError> {
    let dir = cfg.effective_output_dir();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn cmd_simulate(cfg: &ExperimentConfig) -> Result<(), BkError> {
    let dir = outdir(cfg)?;
    let plan = BallPlan::build(cfg.profile()?)?;
    let mut truth = simulate_ground_truth(&plan, cfg.seed)?;
    if cfg.inject_feature {
        let center = cfg.feature_center.unwrap_or((
            cfg.p / 3,
            plan.sphere().n_theta() / 2,
            plan.sphere().n_phi() / 3,
        ));
        inject_feature(
            &mut truth,
            &FeatureSpec {
                center,
                radius_vox: cfg.feature_radius,
                amplitude: cfg.feature_amplitude,
            },
        )?;
    }
    io::write_samples(&dir.join("truth.blc"), &truth)?;
    std::fs::write(dir.join("config.txt"), cfg.to_config_text())?;
    println!("wrote {}", dir.join("truth.blc").display());
    Ok(())
}

fn cmd_degrade(cfg: &ExperimentConfig, truth: Option<&Path>) -> Result<(), BkError> {
    let dir = outdir(cfg)?;
    let truth_path = truth
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join("truth.blc"));
    let truth = io::read_samples(&truth_path)?;
    let profile = truth.plan.profile();
    let kernel = make_kernel(
        profile,
        cfg.kernel_sigma_ell(),
        cfg.kernel_sigma_p(),
        cfg.skew,
    )?;
    let mask = Mask::generate(truth.plan.n_samples(), cfg.mask_fraction, cfg.seed)?;
    let sensing = SensingOp::new(&truth.plan, kernel, mask)?;
    let clean = sensing.forward(&truth)?;
    let (y, sigma) = add_noise(&clean.values, &sensing.mask, cfg.snr_db_in, cfg.seed)?;
    let realized = snr_db(&clean.values, &y, Some(&sensing.mask));
    io::write_samples(
        &dir.join("observations.blc"),
        &BallSamples {
            plan: Arc::clone(&truth.plan),
            values: y,
            reality: true,
        },
    )?;
    io::write_mask(&dir.join("mask.blc"), &sensing.mask, profile)?;
    std::fs::write(
        dir.join("meta.txt"),
        format!("sigma = {sigma:.17e}\nrealized_input_snr_db = {realized:.12}\n"),
    )?;
    std::fs::write(dir.join("config.txt"), cfg.to_config_text())?;
    println!(
        "wrote {} (sigma = {sigma:.6e}, realized input SNR = {realized:.3} dB)",
        dir.join("observations.blc").display()
    );
    Ok(())
}

fn read_meta_sigma(dir: &Path) -> Result<f64, BkError> {
    let text = std::fs::read_to_string(dir.join("meta.txt"))?;
    for line in text.lines() {
        if let Some((k, v)) = line.split_once('=') {
            if k.trim() == "sigma" {
                return v.trim().parse().map_err(|_| {
                    BkError::InvalidArg("meta.txt holds an unreadable sigma".into())
                });
            }
        }
    }
    Err(BkError::InvalidArg(format!(
        "no sigma in {}; pass --sigma",
        dir.join("meta.txt").display()
    )))
}

/// Rebuild the objective a solved directory used.
fn build_objective(
    cfg: &ExperimentConfig,
    dir: &Path,
    obs: Option<&Path>,
    mask: Option<&Path>,
    sigma: Option<f64>,
) -> Result<(Objective, BallSamples), BkError> {
    let obs_path = obs
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join("observations.blc"));
    let mask_path = mask
        .map(Path::to_path_buf)
        .unwrap_or_else(|| dir.join("mask.blc"));
    let y = io::read_samples(&obs_path)?;
    let (mask, mask_profile) = io::read_mask(&mask_path)?;
    if mask_profile != y.plan.profile() {
        return Err(BkError::ProfileMismatch(format!(
            "mask was written for {:?}, observations for {:?}",
            mask_profile,
            y.plan.profile()
        )));
    }
    let sigma = match sigma {
        Some(s) => s,
        None => read_meta_sigma(dir)?,
    };
    let profile = y.plan.profile();
    let kernel = make_kernel(
        profile,
        cfg.kernel_sigma_ell(),
        cfg.kernel_sigma_p(),
        cfg.skew,
    )?;
    let sensing = SensingOp::new(&y.plan, kernel, mask)?;
    let tiling = Tiling::build(
        profile.l,
        profile.p,
        cfg.n_dir,
        cfg.lam_ang,
        cfg.lam_rad,
        cfg.j0_ang,
        cfg.j0_rad,
    )?;
    let mut obj = Objective::new(
        sensing,
        y.values.clone(),
        sigma,
        cfg.lambda.unwrap_or(0.0),
        tiling,
    )?;
    obj.include_scaling_in_prior = cfg.include_scaling_in_prior;
    obj.data_weights = if cfg.uniform_data_weights {
        DataWeights::Uniform
    } else {
        DataWeights::Voxel
    };
    Ok((obj, y))
}

fn cmd_solve(
    cfg: &ExperimentConfig,
    obs: Option<&Path>,
    mask: Option<&Path>,
    sigma: Option<f64>,
) -> Result<(), BkError> {
    let dir = outdir(cfg)?;
    let (mut obj, y) = build_objective(cfg, &dir, obs, mask, sigma)?;
    let x_dir = naive_inverse(&y, &obj.sensing)?;
    io::write_samples(&dir.join("x_dir.blc"), &x_dir)?;

    let opts = SolveOpts {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        monotone: cfg.monotone,
        accelerated: cfg.accelerated,
    };
    let x0 = obj.default_x0()?;
    let auto = cfg.auto_lambda && cfg.lambda.is_none();
    let report = solve_map(&mut obj, &x0, &opts, cfg.outer_rounds, auto)?;
    io::write_samples(&dir.join("x_map.blc"), &report.x_map)?;
    io::write_trace_csv(
        &dir.join("trace.csv"),
        &report.objective_trace,
        report.step_size,
        report.lambda_final,
    )?;
    let h_map = obj.value(&report.x_map)?;
    std::fs::write(
        dir.join("solve.txt"),
        format!(
            "h_map = {h_map:.17e}\nlambda_final = {:.17e}\niterations = {}\nconverged = {}\n",
            report.lambda_final, report.iterations, report.converged
        ),
    )?;
    println!(
        "solved in {} iterations (converged = {}, lambda = {:.4e}); wrote {}",
        report.iterations,
        report.converged,
        report.lambda_final,
        dir.join("x_map.blc").display()
    );
    Ok(())
}

fn parse_region(spec: &str, plan: &Arc<BallPlan>) -> Result<Region, BkError> {
    if let Some(path) = spec.strip_prefix('@') {
        let text = std::fs::read_to_string(path)?;
        let mut indices = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            indices.push(line.parse::<usize>().map_err(|_| {
                BkError::InvalidArg(format!("bad voxel index {line:?} in {path}"))
            })?);
        }
        let region = Region::new(indices, format!("indices from {path}"))?;
        region.validate(plan.n_samples())?;
        return Ok(region);
    }
    let parts: Vec<&str> = spec.split(',').collect();
    if parts.len() != 3 {
        return Err(BkError::InvalidArg(
            "region wants 'p0:p1,t0:t1,f0:f1' or '@file'".into(),
        ));
    }
    let mut ranges = [(0usize, 0usize); 3];
    for (i, part) in parts.iter().enumerate() {
        let (a, b) = part.split_once(':').ok_or_else(|| {
            BkError::InvalidArg(format!("range {part:?} is not 'lo:hi'"))
        })?;
        ranges[i] = (
            a.trim()
                .parse()
                .map_err(|_| BkError::InvalidArg(format!("bad bound {a:?}")))?,
            b.trim()
                .parse()
                .map_err(|_| BkError::InvalidArg(format!("bad bound {b:?}")))?,
        );
    }
    Region::block(
        plan,
        ranges[0],
        ranges[1],
        ranges[2],
        format!("block {spec}"),
    )
}

fn cmd_uq_test(cfg: &ExperimentConfig, region: &str, alpha: Option<f64>) -> Result<(), BkError> {
    let dir = outdir(cfg)?;
    let (obj, _) = build_objective(cfg, &dir, None, None, None)?;
    let x_map = io::read_samples(&dir.join("x_map.blc"))?;
    let region = parse_region(region, obj.plan())?;
    let alpha = alpha.unwrap_or(cfg.alpha);
    let report = hypothesis_test(&x_map, &region, &obj, alpha)?;
    let text = format!(
        "region: {}\nalpha: {alpha}\noutcome: {}\nh_surrogate: {:.17e}\nepsilon_prime: {:.17e}\nmargin: {:.17e}\n",
        report.region_label, report.outcome, report.h_surrogate, report.epsilon_prime, report.margin
    );
    std::fs::write(dir.join("uq_test.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn cmd_uq_lci(
    cfg: &ExperimentConfig,
    blocks: Option<&str>,
    alpha: Option<f64>,
    tol: Option<f64>,
) -> Result<(), BkError> {
    let dir = outdir(cfg)?;
    let (obj, _) = build_objective(cfg, &dir, None, None, None)?;
    let x_map = io::read_samples(&dir.join("x_map.blc"))?;
    let blocks = match blocks {
        Some(spec) => {
            let parts: Vec<&str> = spec.split(',').collect();
            if parts.len() != 3 {
                return Err(BkError::InvalidArg("--blocks wants 'bp,bt,bf'".into()));
            }
            (
                parts[0].trim().parse().map_err(|_| {
                    BkError::InvalidArg(format!("bad block size {:?}", parts[0]))
                })?,
                parts[1].trim().parse().map_err(|_| {
                    BkError::InvalidArg(format!("bad block size {:?}", parts[1]))
                })?,
                parts[2].trim().parse().map_err(|_| {
                    BkError::InvalidArg(format!("bad block size {:?}", parts[2]))
                })?,
            )
        }
        None => cfg.lci_blocks.unwrap_or((4, 4, 8)),
    };
    let partition = Region::partition(obj.plan(), blocks)?;
    let alpha = alpha.unwrap_or(cfg.alpha);
    let tol = tol.unwrap_or(cfg.lci_tol);
    let reports = local_credible_intervals(&x_map, &partition, &obj, alpha, tol)?;
    io::write_lci_csv(&dir.join("lci.csv"), &reports)?;
    println!(
        "wrote {} ({} regions at alpha = {alpha})",
        dir.join("lci.csv").display(),
        reports.len()
    );
    Ok(())
}

fn cmd_run(cfg: &ExperimentConfig) -> Result<(), BkError> {
    let report = run_experiment(cfg)?;
    print!("{}", report.render_text());
    if cfg.write_artifacts {
        println!("artifacts: {}", cfg.effective_output_dir().display());
    }
    Ok(())
}

fn cmd_bench(sizes: &[usize], reps: usize, csv: Option<&Path>) -> Result<(), BkError> {
    if sizes.len() < 2 {
        return Err(BkError::InvalidArg("bench wants at least two sizes".into()));
    }
    let mut times = Vec::with_capacity(sizes.len());
    println!("bandlimit,median_round_trip_secs");
    for &l in sizes {
        let t = transform_round_trip_secs(l, reps)?;
        println!("{l},{t:.6e}");
        times.push(t);
    }
    let exponent = fit_scaling_exponent(sizes, &times);
    println!("fitted time ~ L^{exponent:.3}");
    if let Some(path) = csv {
        let mut text = String::from("bandlimit,median_round_trip_secs\n");
        for (&l, &t) in sizes.iter().zip(&times) {
            text.push_str(&format!("{l},{t:.17e}\n"));
        }
        text.push_str(&format!("# fitted exponent,{exponent:.6}\n"));
        std::fs::write(path, text)?;
    }
    Ok(())
}
