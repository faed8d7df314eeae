//! End-to-end experiment pipeline: simulate a ground truth, degrade it
//! through the sensing operator, reconstruct by direct inversion and by MAP
//! estimation, then quantify uncertainty. Every stage is driven by an
//! [`ExperimentConfig`] and all randomness derives from its seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use crate::ball::{BallBandProfile, BallPlan, BallSamples};
use crate::error::{Error, Result};
use crate::io;
use crate::ops::{make_kernel, naive_inverse, Mask, SensingOp};
use crate::sim::{add_noise, inject_feature, simulate_ground_truth, snr_db, FeatureSpec};
use crate::solver::{solve_map, DataWeights, Objective, SolveOpts, SolveReport};
use crate::uq::{
    hpd_threshold, hypothesis_test, local_credible_intervals, HypothesisReport, IntervalReport,
    Region, TestOutcome,
};
use crate::wavelets::Tiling;

/// Environment variable overriding the output directory.
pub const OUTPUT_DIR_ENV: &str = "BALLKIT_OUTPUT_DIR";

/// Every knob of the pipeline. Field names double as the keys of the flat
/// `key = value` config-file format.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub l: usize,
    pub p: usize,
    pub tau: f64,
    pub seed: u64,
    pub mask_fraction: f64,
    /// None = noiseless observations.
    pub snr_db_in: Option<f64>,
    pub alpha: f64,
    /// Fixed regularization parameter; None defers to the hierarchical rule.
    pub lambda: Option<f64>,
    pub auto_lambda: bool,
    pub outer_rounds: usize,
    pub max_iter: usize,
    pub tol: f64,
    pub monotone: bool,
    pub accelerated: bool,
    pub sigma_ell: Option<f64>,
    pub sigma_p: Option<f64>,
    pub skew: f64,
    pub n_dir: usize,
    pub lam_ang: f64,
    pub lam_rad: f64,
    pub j0_ang: usize,
    pub j0_rad: usize,
    pub include_scaling_in_prior: bool,
    pub uniform_data_weights: bool,
    pub inject_feature: bool,
    pub feature_amplitude: f64,
    pub feature_radius: f64,
    /// None = a default mid-grid placement.
    pub feature_center: Option<(usize, usize, usize)>,
    pub lci_blocks: Option<(usize, usize, usize)>,
    pub lci_tol: f64,
    pub slice_nodes: Vec<usize>,
    pub output_dir: PathBuf,
    pub write_artifacts: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            l: 16,
            p: 16,
            tau: 1.0,
            seed: 1,
            mask_fraction: 0.5,
            snr_db_in: Some(30.0),
            alpha: 0.01,
            lambda: None,
            auto_lambda: true,
            outer_rounds: 3,
            max_iter: 500,
            tol: 2e-6,
            monotone: true,
            accelerated: true,
            sigma_ell: None,
            sigma_p: None,
            skew: 0.5,
            n_dir: 1,
            lam_ang: 2.0,
            lam_rad: 2.0,
            j0_ang: 0,
            j0_rad: 0,
            include_scaling_in_prior: true,
            uniform_data_weights: true,
            inject_feature: true,
            feature_amplitude: 2.5,
            feature_radius: 1.8,
            feature_center: None,
            lci_blocks: None,
            lci_tol: 1e-4,
            slice_nodes: vec![2, 5, 9],
            output_dir: PathBuf::from("out"),
            write_artifacts: true,
        }
    }
}

impl ExperimentConfig {
    pub fn profile(&self) -> Result<BallBandProfile> {
        BallBandProfile::new(self.l, self.p, 0, self.tau)
    }

    pub fn kernel_sigma_ell(&self) -> f64 {
        self.sigma_ell.unwrap_or(self.l as f64 / 4.0)
    }

    pub fn kernel_sigma_p(&self) -> f64 {
        self.sigma_p.unwrap_or(self.p as f64 / 4.0)
    }

    /// Effective output directory: the environment override wins.
    pub fn effective_output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => self.output_dir.clone(),
        }
    }

    /// Parse a flat `key = value` config file ('#' starts a comment). Keys
    /// mirror the struct fields; unknown keys are rejected.
    pub fn from_file(path: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let text = std::fs::read_to_string(path)?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArg(format!(
                    "config line {} is not 'key = value': {raw:?}",
                    lineno + 1
                ))
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    /// Apply one key=value assignment (shared by the config file and CLI
    /// overrides).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value.parse().map_err(|_| {
                Error::InvalidArg(format!("bad value {value:?} for config key {key:?}"))
            })
        }
        match key {
            "l" => self.l = parse(key, value)?,
            "p" => self.p = parse(key, value)?,
            "tau" => self.tau = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mask_fraction" => self.mask_fraction = parse(key, value)?,
            "snr_db" => {
                self.snr_db_in = if value.eq_ignore_ascii_case("inf")
                    || value.eq_ignore_ascii_case("none")
                {
                    None
                } else {
                    Some(parse(key, value)?)
                }
            }
            "alpha" => self.alpha = parse(key, value)?,
            "lambda" => {
                self.lambda = Some(parse(key, value)?);
                self.auto_lambda = false;
            }
            "auto_lambda" => self.auto_lambda = parse(key, value)?,
            "outer_rounds" => self.outer_rounds = parse(key, value)?,
            "max_iter" => self.max_iter = parse(key, value)?,
            "tol" => self.tol = parse(key, value)?,
            "monotone" => self.monotone = parse(key, value)?,
            "accelerated" => self.accelerated = parse(key, value)?,
            "sigma_ell" => self.sigma_ell = Some(parse(key, value)?),
            "sigma_p" => self.sigma_p = Some(parse(key, value)?),
            "skew" => self.skew = parse(key, value)?,
            "n_dir" => self.n_dir = parse(key, value)?,
            "lam_ang" => self.lam_ang = parse(key, value)?,
            "lam_rad" => self.lam_rad = parse(key, value)?,
            "j0_ang" => self.j0_ang = parse(key, value)?,
            "j0_rad" => self.j0_rad = parse(key, value)?,
            "include_scaling_in_prior" => self.include_scaling_in_prior = parse(key, value)?,
            "uniform_data_weights" => self.uniform_data_weights = parse(key, value)?,
            "inject_feature" => self.inject_feature = parse(key, value)?,
            "feature_amplitude" => self.feature_amplitude = parse(key, value)?,
            "feature_radius" => self.feature_radius = parse(key, value)?,
            "feature_center" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::InvalidArg(
                        "feature_center wants 'p,theta,phi' indices".into(),
                    ));
                }
                self.feature_center = Some((
                    parse(key, parts[0].trim())?,
                    parse(key, parts[1].trim())?,
                    parse(key, parts[2].trim())?,
                ));
            }
            "lci_blocks" => {
                let parts: Vec<&str> = value.split(',').collect();
                if parts.len() != 3 {
                    return Err(Error::InvalidArg("lci_blocks wants 'bp,bt,bf' sizes".into()));
                }
                self.lci_blocks = Some((
                    parse(key, parts[0].trim())?,
                    parse(key, parts[1].trim())?,
                    parse(key, parts[2].trim())?,
                ));
            }
            "lci_tol" => self.lci_tol = parse(key, value)?,
            "slice_nodes" => {
                self.slice_nodes = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse::<usize>(key, s.trim()))
                    .collect::<Result<_>>()?;
            }
            "output_dir" => self.output_dir = PathBuf::from(value),
            "write_artifacts" => self.write_artifacts = parse(key, value)?,
            other => {
                return Err(Error::InvalidArg(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    /// Serialize back to the config-file format (round-trip stable).
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "l = {}", self.l);
        let _ = writeln!(s, "p = {}", self.p);
        let _ = writeln!(s, "tau = {}", self.tau);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "mask_fraction = {}", self.mask_fraction);
        match self.snr_db_in {
            Some(v) => {
                let _ = writeln!(s, "snr_db = {v}");
            }
            None => {
                let _ = writeln!(s, "snr_db = inf");
            }
        }
        let _ = writeln!(s, "alpha = {}", self.alpha);
        if let Some(l) = self.lambda {
            let _ = writeln!(s, "lambda = {l}");
        }
        let _ = writeln!(s, "auto_lambda = {}", self.auto_lambda);
        let _ = writeln!(s, "outer_rounds = {}", self.outer_rounds);
        let _ = writeln!(s, "max_iter = {}", self.max_iter);
        let _ = writeln!(s, "tol = {}", self.tol);
        let _ = writeln!(s, "monotone = {}", self.monotone);
        let _ = writeln!(s, "accelerated = {}", self.accelerated);
        let _ = writeln!(s, "sigma_ell = {}", self.kernel_sigma_ell());
        let _ = writeln!(s, "sigma_p = {}", self.kernel_sigma_p());
        let _ = writeln!(s, "skew = {}", self.skew);
        let _ = writeln!(s, "n_dir = {}", self.n_dir);
        let _ = writeln!(s, "lam_ang = {}", self.lam_ang);
        let _ = writeln!(s, "lam_rad = {}", self.lam_rad);
        let _ = writeln!(s, "j0_ang = {}", self.j0_ang);
        let _ = writeln!(s, "j0_rad = {}", self.j0_rad);
        let _ = writeln!(s, "include_scaling_in_prior = {}", self.include_scaling_in_prior);
        let _ = writeln!(s, "uniform_data_weights = {}", self.uniform_data_weights);
        let _ = writeln!(s, "inject_feature = {}", self.inject_feature);
        let _ = writeln!(s, "feature_amplitude = {}", self.feature_amplitude);
        let _ = writeln!(s, "feature_radius = {}", self.feature_radius);
        if let Some((a, b, c)) = self.feature_center {
            let _ = writeln!(s, "feature_center = {a},{b},{c}");
        }
        if let Some((a, b, c)) = self.lci_blocks {
            let _ = writeln!(s, "lci_blocks = {a},{b},{c}");
        }
        let _ = writeln!(s, "lci_tol = {}", self.lci_tol);
        let _ = writeln!(
            s,
            "slice_nodes = {}",
            self.slice_nodes
                .iter()
                .map(|n| n.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let _ = writeln!(s, "output_dir = {}", self.output_dir.display());
        let _ = writeln!(s, "write_artifacts = {}", self.write_artifacts);
        s
    }

    fn default_feature_center(&self, plan: &BallPlan) -> (usize, usize, usize) {
        (
            self.p / 3,
            plan.sphere().n_theta() / 2,
            plan.sphere().n_phi() / 3,
        )
    }
}

/// Matched-size negative-control region: the feature ball translated to the
/// outer radial shells, where the exponentially decaying field is genuinely
/// smooth. Falls back to a φ rotation when the radial grid is too short to
/// separate the two balls.
pub fn control_region(cfg: &ExperimentConfig, plan: &Arc<BallPlan>) -> Result<Region> {
    let feat = cfg
        .feature_center
        .unwrap_or_else(|| cfg.default_feature_center(plan));
    let radius = crate::sim::feature_region_radius(cfg.feature_radius);
    let span = radius.ceil() as usize;
    let p_hi = plan.profile().p.saturating_sub(span + 1);
    let p_ctrl = (feat.0 + plan.profile().p / 2).min(p_hi);
    let center = if p_ctrl > feat.0 + 2 * span {
        (p_ctrl, feat.1, feat.2)
    } else {
        (
            feat.0,
            feat.1,
            (feat.2 + plan.sphere().n_phi() / 2) % plan.sphere().n_phi(),
        )
    };
    crate::sim::ball_region(plan, center, radius, "smooth background control")
}

/// Everything the pipeline produced, plus where it wrote the artifacts.
#[derive(Debug)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub sigma: f64,
    pub realized_input_snr_db: f64,
    pub snr_dir_db: f64,
    pub snr_map_db: f64,
    pub h_map: f64,
    pub epsilon_prime: f64,
    pub lambda_final: f64,
    pub iterations: usize,
    pub converged: bool,
    pub tests: Vec<HypothesisReport>,
    pub lci: Vec<IntervalReport>,
    pub wall_secs: f64,
    pub x_true: BallSamples,
    pub x_dir: BallSamples,
    pub solve: SolveReport,
}

impl ExperimentReport {
    /// Structured key: value rendering (stable ordering, deterministic
    /// values for a fixed config).
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "l: {}", self.config.l);
        let _ = writeln!(s, "p: {}", self.config.p);
        let _ = writeln!(s, "seed: {}", self.config.seed);
        let _ = writeln!(s, "mask_fraction: {}", self.config.mask_fraction);
        let _ = writeln!(s, "sigma: {:.17e}", self.sigma);
        let _ = writeln!(s, "realized_input_snr_db: {:.12}", self.realized_input_snr_db);
        let _ = writeln!(s, "snr_dir_db: {:.12}", self.snr_dir_db);
        let _ = writeln!(s, "snr_map_db: {:.12}", self.snr_map_db);
        let _ = writeln!(s, "h_map: {:.17e}", self.h_map);
        let _ = writeln!(s, "epsilon_prime: {:.17e}", self.epsilon_prime);
        let _ = writeln!(s, "lambda_final: {:.17e}", self.lambda_final);
        let _ = writeln!(s, "iterations: {}", self.iterations);
        let _ = writeln!(s, "converged: {}", self.converged);
        for t in &self.tests {
            let _ = writeln!(
                s,
                "test[{}]: {} (h_sur = {:.17e}, margin = {:.17e})",
                t.region_label, t.outcome, t.h_surrogate, t.margin
            );
        }
        let _ = writeln!(s, "lci_regions: {}", self.lci.len());
        let _ = writeln!(s, "wall_secs: {:.3}", self.wall_secs);
        s
    }
}

/// Run the full pipeline for one configuration.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let profile = cfg.profile()?;
    let plan = BallPlan::build(profile)?;

    // ground truth (plus optional localized feature)
    let mut x_true = simulate_ground_truth(&plan, cfg.seed)?;
    let mut feature_region = None;
    if cfg.inject_feature {
        let center = cfg
            .feature_center
            .unwrap_or_else(|| cfg.default_feature_center(&plan));
        let spec = FeatureSpec {
            center,
            radius_vox: cfg.feature_radius,
            amplitude: cfg.feature_amplitude,
        };
        feature_region = Some(inject_feature(&mut x_true, &spec)?);
    }

    // degradation
    let kernel = make_kernel(profile, cfg.kernel_sigma_ell(), cfg.kernel_sigma_p(), cfg.skew)?;
    let mask = Mask::generate(plan.n_samples(), cfg.mask_fraction, cfg.seed)?;
    let sensing = SensingOp::new(&plan, kernel, mask)?;
    let clean = sensing.forward(&x_true)?;
    let (y, sigma) = add_noise(&clean.values, &sensing.mask, cfg.snr_db_in, cfg.seed)?;
    let realized_input_snr_db = snr_db(&clean.values, &y, Some(&sensing.mask));

    // baseline
    let y_field = BallSamples {
        plan: Arc::clone(&plan),
        values: y.clone(),
        reality: true,
    };
    let x_dir = naive_inverse(&y_field, &sensing)?;

    // MAP
    let tiling = Tiling::build(
        cfg.l,
        cfg.p,
        cfg.n_dir,
        cfg.lam_ang,
        cfg.lam_rad,
        cfg.j0_ang,
        cfg.j0_rad,
    )?;
    let mut obj = Objective::new(sensing, y, sigma, cfg.lambda.unwrap_or(0.0), tiling)?;
    obj.include_scaling_in_prior = cfg.include_scaling_in_prior;
    obj.data_weights = if cfg.uniform_data_weights {
        DataWeights::Uniform
    } else {
        DataWeights::Voxel
    };
    let opts = SolveOpts {
        max_iter: cfg.max_iter,
        tol: cfg.tol,
        monotone: cfg.monotone,
        accelerated: cfg.accelerated,
    };
    let x0 = obj.default_x0()?;
    let auto = cfg.auto_lambda && cfg.lambda.is_none();
    let solve = solve_map(&mut obj, &x0, &opts, cfg.outer_rounds, auto)?;

    // metrics and UQ
    let snr_dir_db = snr_db(&x_true.values, &x_dir.values, None);
    let snr_map_db = snr_db(&x_true.values, &solve.x_map.values, None);
    let h_map = obj.value(&solve.x_map)?;
    let thr = hpd_threshold(h_map, plan.n_samples(), cfg.alpha)?;

    let mut tests = Vec::new();
    let mut surrogate_to_write = None;
    if let Some(region) = &feature_region {
        let report = hypothesis_test(&solve.x_map, region, &obj, cfg.alpha)?;
        surrogate_to_write = Some(crate::uq::build_surrogate(&solve.x_map, region, &obj.tiling)?);
        tests.push(report);
        let control_region = control_region(cfg, &plan)?;
        tests.push(hypothesis_test(&solve.x_map, &control_region, &obj, cfg.alpha)?);
    }

    let mut lci = Vec::new();
    if let Some(blocks) = cfg.lci_blocks {
        let partition = Region::partition(&plan, blocks)?;
        lci = local_credible_intervals(&solve.x_map, &partition, &obj, cfg.alpha, cfg.lci_tol)?;
    }

    let wall_secs = start.elapsed().as_secs_f64();
    let report = ExperimentReport {
        config: cfg.clone(),
        sigma,
        realized_input_snr_db,
        snr_dir_db,
        snr_map_db,
        h_map,
        epsilon_prime: thr.epsilon_prime,
        lambda_final: solve.lambda_final,
        iterations: solve.iterations,
        converged: solve.converged,
        tests,
        lci,
        wall_secs,
        x_true,
        x_dir,
        solve,
    };

    if cfg.write_artifacts {
        let dir = cfg.effective_output_dir();
        std::fs::create_dir_all(&dir)?;
        io::write_samples(&dir.join("truth.blc"), &report.x_true)?;
        io::write_samples(
            &dir.join("observations.blc"),
            &BallSamples {
                plan: Arc::clone(&plan),
                values: obj.y.clone(),
                reality: true,
            },
        )?;
        io::write_mask(&dir.join("mask.blc"), &obj.sensing.mask, profile)?;
        io::write_samples(&dir.join("x_dir.blc"), &report.x_dir)?;
        io::write_samples(&dir.join("x_map.blc"), &report.solve.x_map)?;
        if let Some(sur) = &surrogate_to_write {
            io::write_samples(&dir.join("x_surrogate.blc"), sur)?;
        }
        io::write_trace_csv(
            &dir.join("trace.csv"),
            &report.solve.objective_trace,
            report.solve.step_size,
            report.solve.lambda_final,
        )?;
        for &node in &cfg.slice_nodes {
            if node < profile.p {
                io::write_slice_csv(
                    &dir.join(format!("slice_p{node:02}.csv")),
                    &report.solve.x_map,
                    node,
                )?;
            }
        }
        if !report.lci.is_empty() {
            io::write_lci_csv(&dir.join("lci.csv"), &report.lci)?;
        }
        std::fs::write(dir.join("report.txt"), report.render_text())?;
        std::fs::write(dir.join("config.txt"), cfg.to_config_text())?;
    }

    Ok(report)
}

/// Convenience wrapper claiming the feature test result.
pub fn feature_outcome(report: &ExperimentReport) -> Option<TestOutcome> {
    report
        .tests
        .iter()
        .find(|t| t.region_label == "injected feature")
        .map(|t| t.outcome)
}

/// Median wall time of one full ball transform round trip (analysis +
/// synthesis) at L = P = `l`, over `reps` measurements. Plans are built
/// outside the timed section, and each measurement repeats the round trip
/// until at least ~50 ms elapse so small sizes are not timer-noise.
pub fn transform_round_trip_secs(l: usize, reps: usize) -> Result<f64> {
    let plan = BallPlan::build(BallBandProfile::new(l, l, 0, 1.0)?)?;
    let x = simulate_ground_truth(&plan, 1)?;
    let mut medians = Vec::with_capacity(reps);
    for _ in 0..reps.max(1) {
        let mut elapsed = 0.0;
        let mut count = 0usize;
        let t0 = Instant::now();
        while elapsed < 0.05 {
            let c = plan.forward(&x)?;
            let back = plan.inverse(&c)?;
            std::hint::black_box(&back.values[0]);
            count += 1;
            elapsed = t0.elapsed().as_secs_f64();
        }
        medians.push(elapsed / count as f64);
    }
    medians.sort_by(f64::total_cmp);
    Ok(medians[medians.len() / 2])
}

/// Least-squares slope of log(time) against log(L).
pub fn fit_scaling_exponent(sizes: &[usize], times: &[f64]) -> f64 {
    let n = sizes.len() as f64;
    let xs: Vec<f64> = sizes.iter().map(|&l| (l as f64).ln()).collect();
    let ys: Vec<f64> = times.iter().map(|&t| t.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}
