//! Command-line front end.
//!
//! Exit codes: 0 when every requested stage passes, 1 on a verification
//! failure, 2 on unreadable or malformed input, 3 on internal errors.

use crate::altering::{verify_altering, AlteringError, AlteringFn};
use crate::cone::{normality_probe, ConeSpec};
use crate::engine::{
    brute_force_fixed_points, check_contraction, effective_weight, picard_run, validate_params,
    Certificate, EngineError, PicardOptions, ReichParams,
};
use crate::problem::{parse_phi, Instance, ProblemFile};
use crate::space::{min_weight, normalize_weight, verify_axioms, Space};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::PathBuf;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "reich",
    version,
    about = "Verify and solve Reich-type contractions on cone rectangular metric spaces"
)]
pub struct Cli {
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every sampled check.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the distance table axioms at the declared weight.
    VerifySpace { file: PathBuf },
    /// Check the altering-function axioms for the file's phi.
    VerifyPhi {
        file: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        overrides: ParamOverrides,
    },
    /// Check the parameter hypotheses and the contractive condition.
    Check {
        file: PathBuf,
        #[command(flatten)]
        overrides: ParamOverrides,
    },
    /// Run certified Picard iteration.
    Solve {
        file: PathBuf,
        #[arg(long)]
        start: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        #[command(flatten)]
        overrides: ParamOverrides,
    },
    /// Smallest weight satisfying the rectangular inequality.
    MinWeight { file: PathBuf },
    /// Empirical normality constant of the file's cone.
    NormalityProbe {
        file: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 100)]
        max_degree: usize,
    },
    /// Enumerate fixed points of the map.
    Oracle { file: PathBuf },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ParamOverrides {
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// `identity`, `scale:<a>` or `power:<t>`.
    #[arg(long)]
    pub phi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stage {
    pub name: String,
    pub pass: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl Stage {
    fn new(name: &str, pass: bool, summary: impl Into<String>) -> Self {
        Stage {
            name: name.to_string(),
            pass,
            summary: summary.into(),
            details: Vec::new(),
        }
    }

    fn detail(mut self, line: impl Into<String>) -> Self {
        self.details.push(line.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub command: String,
    pub input: String,
    pub stages: Vec<Stage>,
    pub certificate: Option<Certificate<String>>,
    pub exit_code: i32,
}

impl RunReport {
    pub fn render_text(&self) -> String {
        let mut out = format!("command: {}\ninput: {}\n", self.command, self.input);
        for s in &self.stages {
            let verdict = if s.pass { "pass" } else { "FAIL" };
            if s.summary.is_empty() {
                out.push_str(&format!("{}: {verdict}\n", s.name));
            } else {
                out.push_str(&format!("{}: {verdict} ({})\n", s.name, s.summary));
            }
            for d in &s.details {
                out.push_str(&format!("  {d}\n"));
            }
        }
        if let Some(cert) = &self.certificate {
            out.push_str(&cert.to_report(|p| p.clone()));
        }
        out.push_str(&format!("exit_code: {}\n", self.exit_code));
        out
    }

    pub fn render_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Failure that stops a command before it can produce stages.
struct Abort {
    code: i32,
    stage: &'static str,
    message: String,
}

impl Abort {
    fn input(message: impl ToString) -> Self {
        Abort {
            code: EXIT_INPUT,
            stage: "input",
            message: message.to_string(),
        }
    }

    fn internal(message: impl ToString) -> Self {
        Abort {
            code: EXIT_INTERNAL,
            stage: "internal",
            message: message.to_string(),
        }
    }
}

pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::VerifySpace { .. } => "verify-space",
        Command::VerifyPhi { .. } => "verify-phi",
        Command::Check { .. } => "check",
        Command::Solve { .. } => "solve",
        Command::MinWeight { .. } => "min-weight",
        Command::NormalityProbe { .. } => "normality-probe",
        Command::Oracle { .. } => "oracle",
    }
}

fn file_of(command: &Command) -> &PathBuf {
    match command {
        Command::VerifySpace { file }
        | Command::VerifyPhi { file, .. }
        | Command::Check { file, .. }
        | Command::Solve { file, .. }
        | Command::MinWeight { file }
        | Command::NormalityProbe { file, .. }
        | Command::Oracle { file } => file,
    }
}

/// Runs one command and returns its report; never panics on bad input.
pub fn run(cli: &Cli) -> RunReport {
    let file = file_of(&cli.command);
    let mut report = RunReport {
        command: command_name(&cli.command).to_string(),
        input: file.display().to_string(),
        stages: Vec::new(),
        certificate: None,
        exit_code: EXIT_PASS,
    };
    match execute(cli, file, &mut report) {
        Ok(()) => {
            report.exit_code = if report.stages.iter().all(|s| s.pass) {
                EXIT_PASS
            } else {
                EXIT_FAIL
            };
        }
        Err(abort) => {
            report
                .stages
                .push(Stage::new(abort.stage, false, abort.message));
            report.exit_code = abort.code;
        }
    }
    report
}

fn load(file: &PathBuf) -> Result<(ProblemFile, Instance), Abort> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Abort::input(format!("cannot read {}: {e}", file.display())))?;
    let problem = ProblemFile::parse(&text).map_err(Abort::input)?;
    let instance = problem.instantiate().map_err(Abort::input)?;
    Ok((problem, instance))
}

fn params_with(problem: &ProblemFile, o: &ParamOverrides) -> Result<ReichParams, Abort> {
    let base = problem.params;
    let given = base.is_some()
        || o.mu.is_some()
        || o.alpha.is_some()
        || o.beta.is_some()
        || o.gamma.is_some()
        || o.phi.is_some();
    if !given {
        return Err(Abort::input("no [params] section and no parameter flags"));
    }
    let mut p = base.unwrap_or(ReichParams::new(0.0, 0.0, 0.0, 0.0, AlteringFn::Identity));
    if let Some(v) = o.mu {
        p.mu = v;
    }
    if let Some(v) = o.alpha {
        p.alpha = v;
    }
    if let Some(v) = o.beta {
        p.beta = v;
    }
    if let Some(v) = o.gamma {
        p.gamma = v;
    }
    if let Some(phi) = &o.phi {
        p.phi = parse_phi(phi).map_err(Abort::input)?;
    }
    Ok(p)
}

fn execute(cli: &Cli, file: &PathBuf, report: &mut RunReport) -> Result<(), Abort> {
    let (problem, instance) = load(file)?;
    let stages = &mut report.stages;
    match &cli.command {
        Command::VerifySpace { .. } => match &instance {
            Instance::Finite { space, .. } => {
                let r = verify_axioms(space).map_err(Abort::internal)?;
                let simple = [
                    ("nonnegativity", &r.nonnegativity),
                    ("identity", &r.identity),
                    ("symmetry", &r.symmetry),
                ];
                for (name, v) in simple {
                    let mut stage = Stage::new(name, v.pass, "");
                    if let Some(w) = &v.witness {
                        stage = stage.detail(format!("witness {w}"));
                    }
                    stages.push(stage);
                }
                let rect = &r.rectangular;
                let summary = if rect.pass {
                    format!("{} quadruples", rect.checked)
                } else {
                    format!(
                        "{} of {} quadruples, s = {}",
                        r.rect_violations.len(),
                        rect.checked,
                        r.weight
                    )
                };
                let mut stage = Stage::new("rectangular", rect.pass, summary);
                if let Some(w) = &rect.witness {
                    stage = stage.detail(format!("witness {w}"));
                }
                stages.push(stage);
            }
            Instance::Interval { space, .. } => {
                let (lo, hi) = space.bounds();
                stages.push(Stage::new(
                    "metric",
                    true,
                    format!("interval [{lo}, {hi}], |x - y|, s = 1"),
                ));
            }
        },

        Command::VerifyPhi {
            samples, overrides, ..
        } => {
            let params = params_with(&problem, overrides)?;
            match verify_altering(&params.phi, &problem.cone, *samples, cli.seed) {
                Ok(r) => {
                    for v in &r.verdicts {
                        let mut stage =
                            Stage::new(v.axiom.label(), v.pass, format!("{} checks", v.checked));
                        if let Some(w) = &v.witness {
                            stage = stage.detail(format!("witness {w}"));
                        }
                        stages.push(stage);
                    }
                }
                Err(e @ AlteringError::PowerNeedsScalarCone(_)) => {
                    stages.push(Stage::new("phi", false, e.to_string()));
                }
                Err(e) => return Err(Abort::internal(e)),
            }
        }

        Command::Check { overrides, .. } => {
            let params = params_with(&problem, overrides)?;
            match &instance {
                Instance::Finite { space, map } => {
                    let map = map
                        .as_ref()
                        .ok_or_else(|| Abort::input("no [map] section"))?;
                    check_stages(space, &map.as_fn(), &params, cli.seed, stages)?;
                }
                Instance::Interval { space, map } => {
                    let (a, b) = map.ok_or_else(|| Abort::input("no [map] section"))?;
                    check_stages(space, &move |x: &f64| a * x + b, &params, cli.seed, stages)?;
                }
            }
        }

        Command::Solve {
            start,
            tol,
            max_iter,
            overrides,
            ..
        } => {
            let params = params_with(&problem, overrides)?;
            let opts = PicardOptions {
                tolerance: *tol,
                max_iter: *max_iter,
                seed: cli.seed,
            };
            if !(tol.is_finite() && *tol > 0.0) {
                return Err(Abort::input(format!("tolerance {tol} must be positive")));
            }
            let cert = match &instance {
                Instance::Finite { space, map } => {
                    let map = map
                        .as_ref()
                        .ok_or_else(|| Abort::input("no [map] section"))?;
                    let start = space
                        .index_of(start)
                        .ok_or_else(|| Abort::input(format!("unknown start point `{start}`")))?;
                    solve_stage(
                        space,
                        &map.as_fn(),
                        &params,
                        &start,
                        &opts,
                        |p| space.label(p),
                        stages,
                    )?
                }
                Instance::Interval { space, map } => {
                    let (a, b) = map.ok_or_else(|| Abort::input("no [map] section"))?;
                    let start: f64 = start
                        .parse()
                        .map_err(|_| Abort::input(format!("start `{start}` is not a real")))?;
                    let tol = *tol;
                    let shown = move |x: &f64| round_to_tolerance(*x, tol);
                    solve_stage(
                        space,
                        &move |x: &f64| a * x + b,
                        &params,
                        &start,
                        &opts,
                        shown,
                        stages,
                    )?
                }
            };
            report.certificate = cert;
        }

        Command::MinWeight { .. } => {
            let Instance::Finite { space, .. } = &instance else {
                stages.push(Stage::new("min-weight", true, "1 (interval metric)"));
                return Ok(());
            };
            match min_weight(space) {
                Ok(Some(s)) => {
                    let n = normalize_weight(s).map_err(Abort::internal)?;
                    stages.push(
                        Stage::new("min-weight", true, format!("{s}"))
                            .detail(format!("integer weight {n}")),
                    );
                }
                Ok(None) => stages.push(Stage::new(
                    "min-weight",
                    false,
                    "no weight satisfies the rectangular inequality",
                )),
                Err(e) => stages.push(Stage::new("min-weight", false, e.to_string())),
            }
        }

        Command::NormalityProbe {
            trials, max_degree, ..
        } => {
            let r = normality_probe(&problem.cone, *trials, *max_degree, cli.seed)
                .map_err(Abort::input)?;
            let stage = Stage::new(
                "normality-probe",
                true,
                format!(
                    "best ratio {} over {} pairs",
                    r.best_ratio, r.pairs_examined
                ),
            )
            .detail(format!("witness x = {}", r.witness.0))
            .detail(format!("witness y = {}", r.witness.1));
            let stage = match problem.cone {
                ConeSpec::PolyC1 { .. } => {
                    stage.detail("ratio grows without bound along t^n/n <= 1/n: not normal")
                }
                ConeSpec::Orthant { .. } => stage.detail("consistent with normality constant 1"),
            };
            stages.push(stage);
        }

        Command::Oracle { .. } => {
            let Instance::Finite { space, map } = &instance else {
                return Err(Abort::input("oracle needs a finite space"));
            };
            let map = map
                .as_ref()
                .ok_or_else(|| Abort::input("no [map] section"))?;
            let fixed = brute_force_fixed_points(space, &map.as_fn());
            let labels: Vec<String> = fixed.iter().map(|p| space.label(p)).collect();
            stages.push(Stage::new(
                "fixed-points",
                fixed.len() == 1,
                format!("{{{}}}", labels.join(",")),
            ));
        }
    }
    Ok(())
}

fn check_stages<S, F>(
    space: &S,
    map: &F,
    params: &ReichParams,
    seed: u64,
    stages: &mut Vec<Stage>,
) -> Result<(), Abort>
where
    S: Space,
    F: Fn(&S::Point) -> S::Point + Sync,
{
    let s = effective_weight(space).map_err(Abort::input)?;
    stages.push(match validate_params(params, s) {
        Ok(()) => Stage::new("params", true, format!("s = {s}")),
        Err(v) => Stage::new("params", false, format!("{v} (s = {s})")),
    });
    match check_contraction(space, map, params, seed) {
        Ok(r) => {
            let summary = if r.pass {
                format!("{} pairs", r.pairs_checked)
            } else {
                format!("{} of {} pairs", r.violations.len(), r.pairs_checked)
            };
            let mut stage = Stage::new("contraction", r.pass, summary);
            if let Some(v) = r.violations.first() {
                stage = stage.detail(format!(
                    "witness (x,y) = ({},{}): {} > {}",
                    space.label(&v.x),
                    space.label(&v.y),
                    v.lhs,
                    v.rhs
                ));
            }
            stages.push(stage);
        }
        Err(e @ (EngineError::MapLeavesSpace { .. } | EngineError::Altering(_))) => {
            stages.push(Stage::new("contraction", false, e.to_string()));
        }
        Err(e) => return Err(Abort::internal(e)),
    }
    Ok(())
}

fn solve_stage<S, F>(
    space: &S,
    map: &F,
    params: &ReichParams,
    start: &S::Point,
    opts: &PicardOptions,
    shown: impl Fn(&S::Point) -> String,
    stages: &mut Vec<Stage>,
) -> Result<Option<Certificate<String>>, Abort>
where
    S: Space,
    F: Fn(&S::Point) -> S::Point + Sync,
{
    match picard_run(space, map, params, start, opts) {
        Ok(cert) => {
            let agreed = cert.oracle_agreed.unwrap_or(true);
            stages.push(Stage::new(
                "solve",
                true,
                format!(
                    "fixed point {} after {} iterations",
                    shown(&cert.fixed_point),
                    cert.iterations_used
                ),
            ));
            if let Some(oracle) = &cert.oracle {
                let labels: Vec<String> = oracle.iter().map(|p| space.label(p)).collect();
                stages.push(Stage::new(
                    "oracle",
                    agreed,
                    format!("{{{}}}", labels.join(",")),
                ));
            }
            Ok(Some(Certificate {
                delta: cert.delta,
                d0: cert.d0,
                mu: cert.mu,
                weight: cert.weight,
                tolerance: cert.tolerance,
                stop_index: cert.stop_index,
                trace: cert.trace.iter().map(|p| space.label(p)).collect(),
                fixed_point: space.label(&cert.fixed_point),
                iterations_used: cert.iterations_used,
                residual: cert.residual,
                oracle: cert
                    .oracle
                    .map(|o| o.iter().map(|p| space.label(p)).collect()),
                oracle_agreed: cert.oracle_agreed,
            }))
        }
        Err(
            e @ (EngineError::InvalidParams(_)
            | EngineError::SpaceAxioms(_)
            | EngineError::ContractionFails { .. }
            | EngineError::MaxIterations { .. }
            | EngineError::MapLeavesSpace { .. }
            | EngineError::NoStoppingIndex(_)
            | EngineError::Altering(_)),
        ) => {
            stages.push(Stage::new("solve", false, e.to_string()));
            Ok(None)
        }
        Err(e) => Err(Abort::internal(e)),
    }
}

/// Decimal rendering of `x` with only the digits the tolerance certifies.
pub fn round_to_tolerance(x: f64, tol: f64) -> String {
    let digits = (-tol.log10()).ceil().clamp(0.0, 15.0) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
