//! Subcommand dispatch for the `reglab` binary.
//!
//! Configuration comes from an optional TOML document (`--config path`)
//! plus overriding flags; the schema is validated before any computation
//! and unknown keys are rejected. Exit codes: 0 success/PASS, 2 verdict
//! FAIL or numerical non-convergence, 1 usage or config error. stdout
//! carries nothing but the paths of written reports; diagnostics go to
//! stderr.

use crate::error::{Error, Result};
use crate::experiments::{
    chain_suite, norm_suite, run_chain_suite, run_good_lambda, run_norm_ratio,
    run_pointwise_riesz, run_weak_type, CoeffKind, DataKind, InstanceSpec, ObstacleKind,
};
use crate::field::{field_to_text, ScalarField};
use crate::geometry::{build_grid, make_domain, mask_to_text, DomainKind, Vec2};
use crate::norms::{
    estimate_fund_constant, lorentz_norm, luxemburg_norm, LorentzParams, YoungFamily,
    YoungFunction,
};
use crate::operators::{frac_maximal, riesz_potential, MaximalMode, RadiusFamily};
use crate::report::fmt_num;
use crate::solver::{assemble, solve_double_obstacle, SolverConfig};
use crate::weights::{dyadic_ball_family, partial_bmo_seminorm, power_weight};
use std::path::PathBuf;

const SUBCOMMANDS: &str =
    "solve, op-max, op-riesz, norm, weight-fit, bmo, exp-goodlambda, exp-normratio, exp-pointwise, exp-chain, selftest";

/// Declarative run configuration mirroring the instance, weight, norm
/// and experiment knobs.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub grid: usize,
    pub p: f64,
    pub coeff: CoeffKind,
    pub obstacles: ObstacleKind,
    pub data: DataKind,
    pub instance_id: String,
    pub gamma: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t: f64,
    pub q: f64,
    pub s: Option<f64>, // None = weak (s = infinity)
    pub phi: Option<YoungFamily>,
    pub epsilons: Vec<f64>,
    pub sigma_powers: Vec<f64>,
    pub lambda_knots: usize,
    pub sample_points: usize,
    pub subsets_per_ball: usize,
    pub seed: u64,
    pub refine: bool,
    pub tol: f64,
    pub max_iter: usize,
    pub mu_final: f64,
    pub out: Option<PathBuf>,
    pub jobs: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: 32,
            p: 2.0,
            coeff: CoeffKind::Const,
            obstacles: ObstacleKind::Inactive,
            data: DataKind::SourceOne,
            instance_id: "run".into(),
            gamma: 0.0,
            alpha: 0.0,
            beta: 1.0,
            t: 1.0,
            q: 2.0,
            s: Some(2.0),
            phi: None,
            epsilons: vec![0.1, 0.05, 0.02],
            sigma_powers: vec![1.0, 2.0, 4.0],
            lambda_knots: 64,
            sample_points: 64,
            subsets_per_ball: 32,
            seed: 1,
            refine: true,
            tol: 1e-8,
            max_iter: 20_000,
            mu_final: 1e-8,
            out: None,
            jobs: 1,
        }
    }
}

fn bad_key(key: &str, why: &str) -> Error {
    Error::Config(format!("key `{key}`: {why}"))
}

fn as_f64(key: &str, v: &toml::Value) -> Result<f64> {
    v.as_float()
        .or_else(|| v.as_integer().map(|i| i as f64))
        .ok_or_else(|| bad_key(key, "expected a number"))
}

fn as_usize(key: &str, v: &toml::Value) -> Result<usize> {
    v.as_integer()
        .filter(|&i| i >= 0)
        .map(|i| i as usize)
        .ok_or_else(|| bad_key(key, "expected a non-negative integer"))
}

fn as_str<'v>(key: &str, v: &'v toml::Value) -> Result<&'v str> {
    v.as_str().ok_or_else(|| bad_key(key, "expected a string"))
}

fn as_f64_list(key: &str, v: &toml::Value) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| bad_key(key, "expected an array"))?;
    arr.iter().map(|x| as_f64(key, x)).collect()
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table =
            text.parse().map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
        let mut cfg = RunConfig::default();
        let mut phi_family: Option<&str> = None;
        let mut phi_p = 2.0;
        for (key, value) in table.iter() {
            match key.as_str() {
                "grid" => cfg.grid = as_usize(key, value)?,
                "p" => cfg.p = as_f64(key, value)?,
                "coeff" => {
                    cfg.coeff = match as_str(key, value)? {
                        "const" => CoeffKind::Const,
                        "steps_x1" => CoeffKind::StepsX1,
                        "sin_x2" => CoeffKind::SinX2,
                        "mixed" => CoeffKind::Mixed,
                        other => return Err(bad_key(key, &format!("unknown coefficient `{other}`"))),
                    }
                }
                "obstacles" => {
                    cfg.obstacles = match as_str(key, value)? {
                        "inactive" => ObstacleKind::Inactive,
                        "pinched" => ObstacleKind::Pinched,
                        "lower_bump" => ObstacleKind::LowerBump,
                        "upper_cap" => ObstacleKind::UpperCap,
                        other => return Err(bad_key(key, &format!("unknown obstacles `{other}`"))),
                    }
                }
                "data" => {
                    cfg.data = match as_str(key, value)? {
                        "zero" => DataKind::Zero,
                        "source_one" => DataKind::SourceOne,
                        "swirl" => DataKind::Swirl,
                        "mixed" => DataKind::Mixed(0),
                        other => return Err(bad_key(key, &format!("unknown data `{other}`"))),
                    }
                }
                "data_seed" => {
                    let seed = as_usize(key, value)? as u64;
                    cfg.data = DataKind::Mixed(seed);
                }
                "instance_id" => cfg.instance_id = as_str(key, value)?.to_string(),
                "gamma" => cfg.gamma = as_f64(key, value)?,
                "alpha" => cfg.alpha = as_f64(key, value)?,
                "beta" => cfg.beta = as_f64(key, value)?,
                "t" => cfg.t = as_f64(key, value)?,
                "q" => cfg.q = as_f64(key, value)?,
                "s" => {
                    cfg.s = match value.as_str() {
                        Some("inf") => None,
                        Some(other) => {
                            return Err(bad_key(
                                key,
                                &format!("expected a number or \"inf\", got `{other}`"),
                            ))
                        }
                        None => Some(as_f64(key, value)?),
                    }
                }
                "phi" => phi_family = Some(as_str(key, value)?).filter(|s| *s != "none"),
                "phi_p" => phi_p = as_f64(key, value)?,
                "epsilons" => cfg.epsilons = as_f64_list(key, value)?,
                "sigma_powers" => cfg.sigma_powers = as_f64_list(key, value)?,
                "lambda_knots" => cfg.lambda_knots = as_usize(key, value)?,
                "sample_points" => cfg.sample_points = as_usize(key, value)?,
                "subsets_per_ball" => cfg.subsets_per_ball = as_usize(key, value)?,
                "seed" => cfg.seed = as_usize(key, value)? as u64,
                "refine" => {
                    cfg.refine = value.as_bool().ok_or_else(|| bad_key(key, "expected a bool"))?
                }
                "tol" => cfg.tol = as_f64(key, value)?,
                "max_iter" => cfg.max_iter = as_usize(key, value)?,
                "mu_final" => cfg.mu_final = as_f64(key, value)?,
                "out" => cfg.out = Some(PathBuf::from(as_str(key, value)?)),
                "jobs" => cfg.jobs = as_usize(key, value)?.max(1),
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        cfg.phi = match phi_family {
            Some("power") => Some(YoungFamily::Power(phi_p)),
            Some("power_log") => Some(YoungFamily::PowerLog(phi_p)),
            Some(other) => return Err(bad_key("phi", &format!("unknown phi `{other}`"))),
            None => None,
        };
        Ok(cfg)
    }

    fn instance(&self) -> InstanceSpec {
        InstanceSpec::new(
            self.instance_id.clone(),
            self.p,
            self.coeff,
            self.obstacles,
            self.data,
        )
    }

    fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol: self.tol,
            max_iter: self.max_iter,
            mu_final: self.mu_final,
            ..Default::default()
        }
    }

    fn lorentz(&self) -> Result<LorentzParams> {
        match self.s {
            Some(s) => LorentzParams::new(self.q, s),
            None => LorentzParams::new_weak(self.q),
        }
    }

    fn grids(&self) -> Vec<usize> {
        if self.refine {
            vec![self.grid, self.grid * 2]
        } else {
            vec![self.grid]
        }
    }

    fn out_dir(&self) -> PathBuf {
        self.out
            .clone()
            .or_else(|| std::env::var_os("REGLAB_OUT").map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("runs"))
    }
}

/// Parses argv (without the binary name), runs the subcommand, returns
/// the process exit code.
pub fn dispatch(args: &[String]) -> i32 {
    match run(args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("reglab: error: {e}");
            1
        }
    }
}

fn parse_args(args: &[String]) -> Result<RunConfig> {
    let mut cfg: Option<RunConfig> = None;
    let mut overrides: Vec<(String, String)> = Vec::new();
    let mut it = args.iter();
    while let Some(flag) = it.next() {
        let key = flag
            .strip_prefix("--")
            .ok_or_else(|| Error::Config(format!("unexpected argument `{flag}`")))?;
        let value = it
            .next()
            .ok_or_else(|| Error::Config(format!("flag `--{key}` needs a value")))?;
        if key == "config" {
            let text = std::fs::read_to_string(value)
                .map_err(|e| Error::Config(format!("cannot read config `{value}`: {e}")))?;
            cfg = Some(RunConfig::from_toml(&text)?);
        } else {
            overrides.push((key.to_string(), value.clone()));
        }
    }
    let mut cfg = cfg.unwrap_or_default();
    for (key, value) in overrides {
        match key.as_str() {
            "grid" => cfg.grid = value.parse().map_err(|_| bad_key("grid", "expected an integer"))?,
            "p" => cfg.p = value.parse().map_err(|_| bad_key("p", "expected a number"))?,
            "alpha" => cfg.alpha = value.parse().map_err(|_| bad_key("alpha", "expected a number"))?,
            "gamma" => cfg.gamma = value.parse().map_err(|_| bad_key("gamma", "expected a number"))?,
            "seed" => cfg.seed = value.parse().map_err(|_| bad_key("seed", "expected an integer"))?,
            "jobs" => {
                cfg.jobs = value
                    .parse::<usize>()
                    .map_err(|_| bad_key("jobs", "expected an integer"))?
                    .max(1)
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            other => return Err(Error::Config(format!("unknown flag `--{other}`"))),
        }
    }
    Ok(cfg)
}

fn run(args: &[String]) -> Result<i32> {
    let Some(sub) = args.first() else {
        return Err(Error::Config(format!(
            "usage: reglab <subcommand> [flags]; subcommands: {SUBCOMMANDS}"
        )));
    };
    let cfg = parse_args(&args[1..])?;
    let out = cfg.out_dir();
    match sub.as_str() {
        "solve" => cmd_solve(&cfg, &out),
        "op-max" => cmd_op_max(&cfg, &out),
        "op-riesz" => cmd_op_riesz(&cfg, &out),
        "norm" => cmd_norm(&cfg, &out),
        "weight-fit" => cmd_weight_fit(&cfg, &out),
        "bmo" => cmd_bmo(&cfg, &out),
        "exp-goodlambda" => {
            let report = run_good_lambda(
                &cfg.instance(),
                cfg.gamma,
                cfg.alpha,
                &cfg.grids(),
                cfg.seed,
                &cfg.solver(),
            )?;
            emit(report, &out)
        }
        "exp-normratio" => {
            let phi = match cfg.phi {
                Some(fam) => Some(YoungFunction::new(fam)?),
                None => None,
            };
            let report = run_norm_ratio(
                &norm_suite(),
                cfg.gamma,
                cfg.alpha,
                cfg.lorentz()?,
                phi.as_ref(),
                &cfg.grids(),
                cfg.seed,
                &cfg.solver(),
                cfg.jobs,
            )?;
            emit(report, &out)
        }
        "exp-pointwise" => {
            let report = run_pointwise_riesz(
                &cfg.instance(),
                cfg.gamma,
                cfg.alpha,
                cfg.beta,
                cfg.t,
                cfg.sample_points,
                &cfg.grids(),
                cfg.seed,
                &cfg.solver(),
            )?;
            emit(report, &out)
        }
        "exp-chain" => {
            let report = run_chain_suite(&chain_suite(), &cfg.grids(), &cfg.solver(), cfg.jobs)?;
            emit(report, &out)
        }
        "selftest" => cmd_selftest(&cfg),
        other => Err(Error::Config(format!(
            "unknown subcommand `{other}`; subcommands: {SUBCOMMANDS}"
        ))),
    }
}

fn emit(report: crate::report::ExperimentReport, out: &PathBuf) -> Result<i32> {
    let verdict = report.verdict;
    let path = report.write_to(out)?;
    println!("{}", path.display());
    eprintln!("reglab: {} -> {}", report.name, verdict.as_str());
    Ok(if verdict.passed() { 0 } else { 2 })
}

fn cmd_solve(cfg: &RunConfig, out: &PathBuf) -> Result<i32> {
    let spec = cfg.instance().realize(cfg.grid)?;
    let problem = assemble(spec)?;
    let solution = solve_double_obstacle(&problem, &cfg.solver())?;
    std::fs::create_dir_all(out)?;
    let field_path = out.join(format!("{}_u.field", cfg.instance_id));
    std::fs::write(&field_path, field_to_text(&solution.u))?;
    let mask_path = out.join(format!("{}_domain.mask", cfg.instance_id));
    std::fs::write(&mask_path, mask_to_text(problem.domain()))?;
    let meta_path = out.join(format!("{}_solve.csv", cfg.instance_id));
    let mut meta = String::from("key,value\n");
    meta.push_str(&format!("iterations,{}\n", solution.iterations));
    meta.push_str(&format!("kkt_residual,{}\n", fmt_num(solution.kkt_residual)));
    meta.push_str(&format!("converged,{}\n", solution.converged));
    if let Some(last) = solution.energy_trace.last() {
        meta.push_str(&format!("final_energy,{}\n", fmt_num(*last)));
    }
    meta.push_str(&format!("active_lower,{}\n", solution.active_lower.len()));
    meta.push_str(&format!("active_upper,{}\n", solution.active_upper.len()));
    std::fs::write(&meta_path, meta)?;
    println!("{}", field_path.display());
    println!("{}", mask_path.display());
    println!("{}", meta_path.display());
    if solution.converged {
        Ok(0)
    } else {
        eprintln!(
            "reglab: solver hit max_iter; last residual {:e}",
            solution.kkt_residual
        );
        Ok(2)
    }
}

fn solve_and_fields(cfg: &RunConfig) -> Result<(crate::solver::DiscreteProblem, ScalarField, ScalarField)> {
    let spec = cfg.instance().realize(cfg.grid)?;
    let problem = assemble(spec)?;
    let solution = solve_double_obstacle(&problem, &cfg.solver())?;
    let grad_p = solution
        .grad_u
        .magnitude()
        .map(|v| v.powf(cfg.p))
        .masked(problem.domain());
    let datum_p = problem.spec().composite().map(|v| v.powf(cfg.p));
    Ok((problem, grad_p, datum_p))
}

fn cmd_op_max(cfg: &RunConfig, out: &PathBuf) -> Result<i32> {
    let (problem, grad_p, datum_p) = solve_and_fields(cfg)?;
    let radii = RadiusFamily::dyadic(problem.grid());
    let m_grad = frac_maximal(&grad_p, cfg.alpha, &radii, MaximalMode::Fast)?;
    let m_datum = frac_maximal(&datum_p, cfg.alpha, &radii, MaximalMode::Fast)?;
    std::fs::create_dir_all(out)?;
    let a = out.join(format!("{}_mgrad.field", cfg.instance_id));
    let b = out.join(format!("{}_mdatum.field", cfg.instance_id));
    std::fs::write(&a, field_to_text(&m_grad))?;
    std::fs::write(&b, field_to_text(&m_datum))?;
    println!("{}", a.display());
    println!("{}", b.display());
    Ok(0)
}

fn cmd_op_riesz(cfg: &RunConfig, out: &PathBuf) -> Result<i32> {
    let (_, grad_p, datum_p) = solve_and_fields(cfg)?;
    let r_grad = riesz_potential(&grad_p, cfg.beta)?;
    let r_datum = riesz_potential(&datum_p, cfg.beta)?;
    std::fs::create_dir_all(out)?;
    let a = out.join(format!("{}_riesz_grad.field", cfg.instance_id));
    let b = out.join(format!("{}_riesz_datum.field", cfg.instance_id));
    std::fs::write(&a, field_to_text(&r_grad))?;
    std::fs::write(&b, field_to_text(&r_datum))?;
    println!("{}", a.display());
    println!("{}", b.display());
    Ok(0)
}

fn cmd_norm(cfg: &RunConfig, out: &PathBuf) -> Result<i32> {
    let spec = cfg.instance().realize(cfg.grid)?;
    let problem = assemble(spec)?;
    let solution = solve_double_obstacle(&problem, &cfg.solver())?;
    let grid = *problem.grid();
    let weight = power_weight(grid, Vec2::new(0.5, 0.5), cfg.gamma)?;
    let params = cfg.lorentz()?;
    let radii = RadiusFamily::dyadic(&grid);
    let grad_p = solution
        .grad_u
        .magnitude()
        .map(|v| v.powf(cfg.p))
        .masked(problem.domain());
    let m_grad = frac_maximal(&grad_p, cfg.alpha, &radii, MaximalMode::Fast)?;
    let knots = cfg.lambda_knots.max(64);
    let mut csv = String::from("key,value\n");
    csv.push_str(&format!(
        "lorentz_m_grad,{}\n",
        fmt_num(lorentz_norm(&m_grad, &weight, params, knots)?)
    ));
    csv.push_str(&format!(
        "lorentz_grad,{}\n",
        fmt_num(lorentz_norm(
            &solution.grad_u.magnitude().masked(problem.domain()),
            &weight,
            params,
            knots
        )?)
    ));
    csv.push_str(&format!(
        "lorentz_datum,{}\n",
        fmt_num(lorentz_norm(problem.spec().composite(), &weight, params, knots)?)
    ));
    if let Some(fam) = cfg.phi {
        let phi = YoungFunction::new(fam)?;
        csv.push_str(&format!(
            "luxemburg_m_grad,{}\n",
            fmt_num(luxemburg_norm(&m_grad, &weight, &phi, params)?)
        ));
    }
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{}_norms.csv", cfg.instance_id));
    std::fs::write(&path, csv)?;
    println!("{}", path.display());
    Ok(0)
}

fn cmd_weight_fit(cfg: &RunConfig, out: &PathBuf) -> Result<i32> {
    let grid = build_grid(cfg.grid, 1.0)?;
    let domain = make_domain(grid, DomainKind::Square, 0.0, 1.0, 0)?;
    let center = Vec2::new(0.5, 0.5);
    let mut weight = power_weight(grid, center, cfg.gamma)?;
    let balls = dyadic_ball_family(&grid, &[center]);
    let (c0, nu) = weight.estimate_a_inf(&domain, &balls, cfg.subsets_per_ball, cfg.seed)?;
    let ap = weight.estimate_a_p(&domain, cfg.p.max(1.5), &balls)?;
    let mut csv = String::from("key,value\n");
    csv.push_str(&format!("gamma,{}\n", fmt_num(cfg.gamma)));
    csv.push_str(&format!("c0,{}\n", fmt_num(c0)));
    csv.push_str(&format!("nu,{}\n", fmt_num(nu)));
    csv.push_str(&format!("ap,{}\n", fmt_num(ap)));
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("weightfit_g{}.csv", fmt_num(cfg.gamma)));
    std::fs::write(&path, csv)?;
    let field_path = out.join(format!("weight_g{}.field", fmt_num(cfg.gamma)));
    std::fs::write(&field_path, field_to_text(&weight.as_field()))?;
    println!("{}", path.display());
    println!("{}", field_path.display());
    Ok(0)
}

fn cmd_bmo(cfg: &RunConfig, out: &PathBuf) -> Result<i32> {
    let spec = cfg.instance().realize(cfg.grid)?;
    let grid = *spec.grid();
    let seminorm = partial_bmo_seminorm(spec.coeff(), grid.extent() / 4.0, 8)?;
    let mut csv = String::from("key,value\n");
    csv.push_str(&format!("bmo_seminorm,{}\n", fmt_num(seminorm)));
    std::fs::create_dir_all(out)?;
    let path = out.join(format!("{}_bmo.csv", cfg.instance_id));
    std::fs::write(&path, csv)?;
    println!("{}", path.display());
    Ok(0)
}

fn cmd_selftest(cfg: &RunConfig) -> Result<i32> {
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        eprintln!("selftest {name}: {}", if ok { "ok" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // geometry basics
    let grid = build_grid(32, 1.0)?;
    check("grid spacing", grid.spacing() == 0.03125);
    let domain = make_domain(grid, DomainKind::Square, 0.0, 1.0, 0)?;
    check(
        "square flatness",
        crate::geometry::measure_flatness(&domain, 1.0)? <= 2.0 * grid.spacing(),
    );
    check("coarse grid rejected", build_grid(3, 1.0).is_err());

    // weights
    let w = crate::weights::Weight::constant(grid, 1.0)?;
    let all = crate::geometry::cells_in_ball(
        &domain,
        &crate::geometry::Ball::new(Vec2::new(0.5, 0.5), 10.0),
        false,
    );
    check("unit measure", (w.measure(&all) - 1.0).abs() <= grid.spacing());
    let balls = dyadic_ball_family(&grid, &[Vec2::new(0.5, 0.5)]);
    check("constant A_p", (w.estimate_a_p(&domain, 2.0, &balls)? - 1.0).abs() < 0.01);

    // operators
    let c = ScalarField::constant(grid, 2.0);
    let radii = RadiusFamily::dyadic(&grid);
    let m = frac_maximal(&c, 0.0, &radii, MaximalMode::Fast)?;
    check("maximal of constant", (m.get(grid.index(16, 16)) - 2.0).abs() < 1e-12);
    let zero = ScalarField::zeros(grid);
    check("riesz of zero", riesz_potential(&zero, 1.0)?.abs_max() == 0.0);

    // norms
    let one = ScalarField::constant(grid, 1.0);
    let params = LorentzParams::new(2.0, 2.0)?;
    check(
        "constant Lorentz norm",
        (lorentz_norm(&one, &w, params, 64)? - 1.0).abs() < 1e-6,
    );
    check(
        "Luxemburg of zero",
        luxemburg_norm(&zero, &w, &YoungFunction::new(YoungFamily::Power(2.0))?, params)? == 0.0,
    );
    check(
        "fundamental constant p=2",
        estimate_fund_constant(2.0, 0.3, 10_000, 1)? <= 1.0 + 1e-12,
    );

    // solver trivial cases
    let inst = InstanceSpec::new("selftest", 2.0, CoeffKind::Const, ObstacleKind::Inactive, DataKind::Zero);
    let problem = assemble(inst.realize(16)?)?;
    let sol = solve_double_obstacle(&problem, &cfg.solver())?;
    check("zero data solve", sol.iterations == 0 && sol.kkt_residual == 0.0);
    let pinched = InstanceSpec::new(
        "selftest-p",
        2.0,
        CoeffKind::Const,
        ObstacleKind::Pinched,
        DataKind::SourceOne,
    );
    let problem = assemble(pinched.realize(16)?)?;
    let sol = solve_double_obstacle(&problem, &cfg.solver())?;
    check("pinched solve", sol.kkt_residual == 0.0);

    // weak-type smoke
    let report = run_weak_type(&[1], 0.0, 1.0, &[16])?;
    check("weak type", report.verdict.passed());

    if failures == 0 {
        eprintln!("selftest: all checks passed");
        Ok(0)
    } else {
        eprintln!("selftest: {failures} check(s) failed");
        Ok(2)
    }
}
