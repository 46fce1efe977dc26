use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use onramp_core::analysis::{altruism_effect, AnalysisSummary};
use onramp_core::config::{load_config, ConfigError};
use onramp_core::equilibrium::{
    best_response_dynamics, brute_force_equilibrium, verify_wardrop, x_hat_b_range,
};
use onramp_core::model::PopulationParams;
use onramp_core::oracle::{bisect_selfish_split, grid_minimize_social_delay};
use onramp_core::robustness::{grid_optimal_beta, grid_slack, BetaStarBranch};
use onramp_core::sweep::{
    format_significant, sweep_alpha, sweep_beta_e, write_alpha_csv, write_beta_e_csv,
};
use onramp_core::{
    analyze, optimal_altruism_level, price_of_anarchy, solve_equilibrium, Error, ErrorInterval64,
    FlowDistribution64, OnRamp64, RobustnessSummary64,
};

const EXIT_INPUT: u8 = 1;
const EXIT_NOT_IN_G: u8 = 2;
const EXIT_VERIFY: u8 = 3;

/// Lane-choice equilibria of selfish and altruistic traffic at a highway on-ramp.
#[derive(Parser)]
#[command(name = "onramp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Io {
    /// JSON file with keys n0, c1t, c1m, c2t, c2m, mu, gamma.
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IntervalArgs {
    #[arg(long, default_value_t = 0.5)]
    e_lower: f64,
    #[arg(long, default_value_t = 2.0)]
    e_upper: f64,
}

impl IntervalArgs {
    fn interval(&self) -> Result<ErrorInterval64, Failure> {
        ErrorInterval64::new(self.e_lower, self.e_upper).map_err(Failure::from)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Derived coefficients, Phi, Delta, Pi and membership in the meaningful set.
    Analyze {
        #[command(flatten)]
        io: Io,
    },
    /// Closed-form equilibrium at one (alpha, beta, e).
    Equilibrium {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// Multiplicative measurement error e.
        #[arg(long = "error", default_value_t = 1.0)]
        error: f64,
    },
    /// CSV of social delay against alpha for each beta (e = 1).
    SweepAlpha {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_delimiter = ',', default_values_t = [0.2, 0.5, 1.0])]
        beta: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// CSV of social delay against beta*e for each alpha.
    SweepBetaE {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_delimiter = ',', default_values_t = [0.63, 0.8])]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 4.0)]
        beta_e_max: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Price of anarchy at a given beta over an error interval.
    Poa {
        #[command(flatten)]
        io: Io,
        #[arg(long)]
        beta: f64,
        #[command(flatten)]
        interval: IntervalArgs,
    },
    /// The altruism level minimizing the price of anarchy.
    OptimalBeta {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        interval: IntervalArgs,
        /// Also minimize over a beta grid and report the gap.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1e-3)]
        beta_step: f64,
        /// Grid step over e and alpha inside the price of anarchy.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Checks every closed form against its numerical oracle.
    Verify {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        interval: IntervalArgs,
        /// Grid step of the brute-force equilibrium search.
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
}

enum Failure {
    Input(anyhow::Error),
    NotInG(String),
    Verification(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotInG(_) | Error::Degenerate(_) => Failure::NotInG(e.to_string()),
            other => Failure::Input(other.into()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Invalid(inner) => Failure::Input(inner.into()),
            other => Failure::Input(other.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::NotInG(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_NOT_IN_G)
        }
        Err(Failure::Verification(n)) => {
            eprintln!("error: {n} verification check(s) failed");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}

fn g(x: f64) -> String {
    format_significant(x, 12)
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            Failure::Input(anyhow::anyhow!("cannot create {}: {e}", p.display()))
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(io: &Io) -> Result<(OnRamp64, AnalysisSummary<f64>), Failure> {
    let ramp = OnRamp64::new(load_config(&io.config)?);
    let summary = analyze(&ramp)?;
    Ok((ramp, summary))
}

fn load_in_g(io: &Io) -> Result<(OnRamp64, AnalysisSummary<f64>), Failure> {
    let (ramp, summary) = load(io)?;
    if let Err(e) = summary.require_in_g() {
        eprintln!("phi: {}\ndelta: {}", g(summary.phi), g(summary.delta));
        return Err(e.into());
    }
    Ok((ramp, summary))
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Analyze { io } => cmd_analyze(&io),
        Command::Equilibrium {
            io,
            alpha,
            beta,
            error,
        } => cmd_equilibrium(&io, alpha, beta, error),
        Command::SweepAlpha { io, beta, step } => {
            let (ramp, summary) = load_in_g(&io)?;
            let rows = sweep_alpha(&ramp, &summary, &beta, step)?;
            let mut out = open_out(io.out.as_deref())?;
            write_alpha_csv(&rows, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::SweepBetaE {
            io,
            alpha,
            beta_e_max,
            step,
        } => {
            for &a in &alpha {
                PopulationParams::new(a, 0.0)?;
            }
            let (ramp, summary) = load_in_g(&io)?;
            let rows = sweep_beta_e(&ramp, &summary, &alpha, beta_e_max, step)?;
            let mut out = open_out(io.out.as_deref())?;
            write_beta_e_csv(&rows, &mut out)?;
            out.flush()?;
            Ok(())
        }
        Command::Poa { io, beta, interval } => cmd_poa(&io, beta, &interval),
        Command::OptimalBeta {
            io,
            interval,
            verify,
            beta_step,
            step,
        } => cmd_optimal_beta(&io, &interval, verify, beta_step, step),
        Command::Verify { io, interval, step } => cmd_verify(&io, &interval, step),
    }
}

fn cmd_analyze(io: &Io) -> Result<(), Failure> {
    let (ramp, s) = load(io)?;
    let c = ramp.coeffs;
    let mut out = open_out(io.out.as_deref())?;
    writeln!(out, "n0: {}\nn2: {}", g(ramp.n0()), g(ramp.n2()))?;
    writeln!(
        out,
        "k_s: {}\nb_s: {}\nk_b: {}\nb_b: {}\nk2: {}",
        g(c.k_s),
        g(c.b_s),
        g(c.k_b),
        g(c.b_b),
        g(c.k2)
    )?;
    writeln!(out, "phi: {}\ndelta: {}", g(s.phi), g(s.delta))?;
    match s.pi {
        Some(pi) => writeln!(out, "pi: {}", g(pi))?,
        None => writeln!(out, "pi: singular")?,
    }
    writeln!(
        out,
        "j_opt: {}\nj_soc_at_phi: {}",
        g(s.j_opt),
        g(s.j_soc_at_phi)
    )?;
    writeln!(out, "membership: {}", s.membership)?;
    if s.membership.is_in_g() {
        writeln!(out, "a1: {}\na2: {}", s.a1, s.a2)?;
    }
    out.flush()?;
    s.require_in_g().map_err(Failure::from)
}

fn cmd_equilibrium(io: &Io, alpha: f64, beta: f64, e: f64) -> Result<(), Failure> {
    PopulationParams::new(alpha, beta)?;
    if !(e > 0.0 && e.is_finite()) {
        return Err(Failure::Input(anyhow::anyhow!(
            "--error must be positive and finite, got {e}"
        )));
    }
    let (ramp, s) = load_in_g(io)?;
    let eq = solve_equilibrium(&ramp, &s, alpha, beta, e)?;
    let wardrop = verify_wardrop(&ramp, &eq.flow, beta, e, 1e-9);
    let f = eq.flow;
    let d = eq.delays;
    let mut out = open_out(io.out.as_deref())?;
    writeln!(
        out,
        "alpha: {}\nbeta: {}\ne: {}\nbeta_e: {}",
        g(alpha),
        g(beta),
        g(e),
        g(eq.beta_e)
    )?;
    writeln!(out, "case: {}\nx_hat_b: {}", eq.case_label, g(eq.x_hat_b))?;
    writeln!(
        out,
        "x_s_selfish: {}\nx_b_selfish: {}\nx_s_altruistic: {}\nx_b_altruistic: {}",
        g(f.x_s_selfish),
        g(f.x_b_selfish),
        g(f.x_s_altruistic),
        g(f.x_b_altruistic)
    )?;
    writeln!(
        out,
        "j1s: {}\nj1b: {}\nj0: {}\nj2: {}",
        g(d.j1s),
        g(d.j1b),
        g(d.j0),
        g(d.j2)
    )?;
    writeln!(out, "j_soc: {}\nj_opt: {}", g(eq.social_delay), g(s.j_opt))?;
    let p = wardrop.products;
    writeln!(
        out,
        "wardrop_products: {} {} {} {}\nwardrop: {}",
        g(p[0]),
        g(p[1]),
        g(p[2]),
        g(p[3]),
        if wardrop.passes() { "pass" } else { "fail" }
    )?;
    out.flush()?;
    Ok(())
}

fn write_robustness(out: &mut dyn Write, r: &RobustnessSummary64) -> io::Result<()> {
    writeln!(out, "classification: {}", r.classification)?;
    writeln!(out, "beta_star: {}", g(r.beta_star))?;
    writeln!(out, "branch: {}", r.beta_star_branch)?;
    match r.transition_beta_at_alpha1 {
        Some(pi) => writeln!(out, "transition_beta_at_alpha1: {}", g(pi))?,
        None => writeln!(out, "transition_beta_at_alpha1: none")?,
    }
    writeln!(out, "poa_at_beta_star: {}", g(r.poa))?;
    for p in &r.worst_case_points {
        writeln!(
            out,
            "worst_case: e={} alpha={} x_hat_b={} j_soc={}",
            g(p.e),
            g(p.alpha),
            g(p.x_hat_b),
            g(p.j_soc)
        )?;
    }
    Ok(())
}

fn cmd_poa(io: &Io, beta: f64, interval: &IntervalArgs) -> Result<(), Failure> {
    PopulationParams::new(1.0, beta)?;
    let interval = interval.interval()?;
    let (ramp, s) = load_in_g(io)?;
    let poa = price_of_anarchy(&ramp, &s, beta, &interval)?;
    let best = optimal_altruism_level(&ramp, &s, &interval)?;
    let mut out = open_out(io.out.as_deref())?;
    writeln!(
        out,
        "beta: {}\ne_lower: {}\ne_upper: {}",
        g(beta),
        g(interval.lower()),
        g(interval.upper())
    )?;
    writeln!(out, "poa: {}", g(poa))?;
    write_robustness(&mut out, &best)?;
    out.flush()?;
    Ok(())
}

fn cmd_optimal_beta(
    io: &Io,
    interval: &IntervalArgs,
    verify: bool,
    beta_step: f64,
    step: f64,
) -> Result<(), Failure> {
    let interval = interval.interval()?;
    let (ramp, s) = load_in_g(io)?;
    let best = optimal_altruism_level(&ramp, &s, &interval)?;
    let mut out = open_out(io.out.as_deref())?;
    writeln!(
        out,
        "e_lower: {}\ne_upper: {}",
        g(interval.lower()),
        g(interval.upper())
    )?;
    write_robustness(&mut out, &best)?;
    if verify {
        let grid = grid_optimal_beta(&ramp, &s, &interval, beta_step, step)?;
        let slack = grid_slack(&ramp, &s, best.beta_star, step);
        writeln!(
            out,
            "grid_beta: {}\ngrid_poa: {}",
            g(grid.beta),
            g(grid.poa)
        )?;
        writeln!(out, "beta_gap: {}", g((best.beta_star - grid.beta).abs()))?;
        writeln!(
            out,
            "poa_excess: {}\ngrid_slack: {}",
            g(best.poa - grid.poa),
            g(slack)
        )?;
    }
    out.flush()?;
    Ok(())
}

struct Report {
    out: Box<dyn Write>,
    failures: usize,
}

impl Report {
    fn check(&mut self, name: &str, ok: bool, detail: String) -> io::Result<()> {
        if !ok {
            self.failures += 1;
        }
        writeln!(
            self.out,
            "{name}: {} ({detail})",
            if ok { "PASS" } else { "FAIL" }
        )
    }
}

const VERIFY_ALPHAS: [f64; 5] = [0.2, 0.5, 0.7, 0.9, 1.0];
const VERIFY_BETAS: [f64; 4] = [0.0, 0.5, 1.0, 2.0];

fn cmd_verify(io: &Io, interval: &IntervalArgs, step: f64) -> Result<(), Failure> {
    let interval = interval.interval()?;
    let (ramp, s) = load_in_g(io)?;
    let mut r = Report {
        out: open_out(io.out.as_deref())?,
        failures: 0,
    };

    let bisected = bisect_selfish_split(&ramp, 1e-13);
    let phi_gap = bisected.map_or(f64::INFINITY, |b| (b - s.phi).abs());
    r.check(
        "phi_bisection",
        phi_gap <= 1e-6,
        format!("gap {}", g(phi_gap)),
    )?;

    let (grid_delta, _) = grid_minimize_social_delay(&ramp, 0.0, 1.0, 1e-6);
    let delta_gap = (grid_delta - s.delta).abs();
    r.check(
        "delta_grid",
        delta_gap <= 1e-6,
        format!("gap {}", g(delta_gap)),
    )?;

    let mut effect_bad = 0usize;
    let mut wardrop_worst = 0.0f64;
    for i in 0..=20 {
        let alpha = i as f64 * 0.05;
        for beta in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let eq = solve_equilibrium(&ramp, &s, alpha, beta, 1.0)?;
            let flags = altruism_effect(alpha, beta, &s)?;
            let decreased = eq.social_delay < s.j_soc_at_phi - 1e-9;
            let optimal = (eq.social_delay - s.j_opt).abs() <= 1e-9;
            if decreased != flags.decreases || optimal != flags.optimizes {
                effect_bad += 1;
            }
            let w = verify_wardrop(&ramp, &eq.flow, beta, 1.0, 1e-9);
            wardrop_worst = wardrop_worst.max(w.max_product());
        }
    }
    r.check(
        "effect_grid",
        effect_bad == 0,
        format!("{effect_bad} mismatches"),
    )?;
    r.check(
        "wardrop_residuals",
        wardrop_worst <= 1e-9,
        format!("max product {}", g(wardrop_worst)),
    )?;

    let mut brute_worst = 0.0f64;
    let mut dyn_worst = 0.0f64;
    for alpha in VERIFY_ALPHAS {
        for beta in VERIFY_BETAS {
            let expected = solve_equilibrium(&ramp, &s, alpha, beta, 1.0)?.x_hat_b;
            let found = brute_force_equilibrium(&ramp, alpha, beta, 1.0, step)?;
            brute_worst = brute_worst.max(match x_hat_b_range(&found) {
                Some((lo, hi)) => (expected - lo).abs().max((hi - expected).abs()),
                None => f64::INFINITY,
            });
            let starts = [
                FlowDistribution64::from_bypass(alpha, 0.0, 0.0),
                FlowDistribution64::from_bypass(alpha, 1.0 - alpha, alpha),
                FlowDistribution64::from_bypass(alpha, (1.0 - alpha) * 0.5, alpha * 0.5),
            ];
            for start in starts {
                let trace =
                    best_response_dynamics(&ramp, alpha, beta, 1.0, start, 0.5, 20_000, 1e-12)?;
                dyn_worst = dyn_worst.max((trace.terminal().flow.x_hat_b() - expected).abs());
            }
        }
    }
    r.check(
        "brute_force",
        brute_worst <= 2e-3,
        format!("max x_hat_b gap {}", g(brute_worst)),
    )?;
    r.check(
        "dynamics",
        dyn_worst <= 1e-4,
        format!("max x_hat_b gap {}", g(dyn_worst)),
    )?;

    let best = optimal_altruism_level(&ramp, &s, &interval)?;
    let grid = grid_optimal_beta(&ramp, &s, &interval, 1e-3, 0.01)?;
    let slack = grid_slack(&ramp, &s, best.beta_star, 0.01);
    let excess = best.poa - grid.poa;
    let beta_gap = (best.beta_star - grid.beta).abs();
    // the G1 optimum is a plateau, so only the achieved value is compared there
    let ok =
        excess <= slack && (best.beta_star_branch == BetaStarBranch::G1Formula || beta_gap <= 1e-3);
    r.check(
        "beta_star",
        ok,
        format!(
            "beta_gap {}, poa_excess {}, slack {}",
            g(beta_gap),
            g(excess),
            g(slack)
        ),
    )?;

    r.out.flush()?;
    if r.failures == 0 {
        Ok(())
    } else {
        Err(Failure::Verification(r.failures))
    }
}
