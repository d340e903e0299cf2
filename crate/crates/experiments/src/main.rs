use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use homophily_lab::config::{Config, SweepSection, VaccinationSection, VariantName, VaxModel, CONFIG_DIR_ENV};
use homophily_lab::report;
use homophily_lab::{emit, run_sweep, write_csv, write_json, Format, Quantity, SweepSpec, SweptParam};

/// Two-group homophily epidemic experiments.
#[derive(Parser)]
#[command(name = "homophily", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config; relative paths also resolve against $HOMOPHILY_CONFIG_DIR.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long = "x-a")]
    x_a: Option<f64>,
    #[arg(long = "x-v")]
    x_v: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Cost density of vaccination.
    #[arg(long)]
    k: Option<f64>,
    /// Anti-vaxxer cost bias.
    #[arg(long)]
    d: Option<f64>,
    /// Weight of cumulative infection in welfare.
    #[arg(long)]
    b: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Steady state, threshold and stability.
    SteadyState(Common),
    /// One-parameter sweep written as CSV or JSON.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        param: Option<SweptParam>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        min: Option<f64>,
        #[arg(long)]
        max: Option<f64>,
        /// Comma-separated output columns.
        #[arg(long, value_delimiter = ',')]
        outputs: Option<Vec<Quantity>>,
        /// Endogenous vaccination model for the sweep.
        #[arg(long, value_enum)]
        model: Option<VaxModel>,
    },
    /// Cumulative infection, convergence rate and homophily derivatives.
    Ci(Common),
    /// Rational vaccination equilibria.
    VaxRational(Common),
    /// Peer-effect vaccination equilibria.
    VaxPeer(Common),
    /// Mixed vaccination equilibrium.
    VaxMixed {
        #[command(flatten)]
        common: Common,
        /// Vaxxers respond to `rho_v / (1 - x_v)` instead of `rho_v`.
        #[arg(long)]
        theta: bool,
    },
    /// Welfare at the configured vaccination rates.
    Welfare(Common),
    /// Planner optimum against the decentralized outcome.
    Optimal {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// SIR final size and its homophily derivative.
    Sir {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        seed: Option<f64>,
    },
    /// Agent-level simulation against the mean-field steady state.
    CrossCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        agents: Option<usize>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(common: &Common) -> Result<Config> {
    let path = match &common.config {
        Some(p) => Some(p.clone()),
        None => std::env::var_os(CONFIG_DIR_ENV)
            .map(|d| Path::new(&d).join("homophily.toml"))
            .filter(|p| p.exists()),
    };
    let mut cfg = match path {
        Some(p) => Config::load(&p)?,
        None => Config::default(),
    };
    let m = &mut cfg.model;
    for (slot, flag) in [
        (&mut m.q, common.q),
        (&mut m.h, common.h),
        (&mut m.mu, common.mu),
        (&mut m.x_a, common.x_a),
        (&mut m.x_v, common.x_v),
        (&mut m.r, common.r),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if common.k.is_some() || common.d.is_some() || common.b.is_some() {
        let v = cfg.vaccination.get_or_insert_with(VaccinationSection::default);
        for (slot, flag) in [(&mut v.k, common.k), (&mut v.d, common.d), (&mut v.b, common.b)] {
            if flag.is_some() {
                *slot = flag;
            }
        }
    }
    Ok(cfg)
}

fn output(common: &Common) -> Result<Box<dyn Write>> {
    Ok(match &common.out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print(common: &Common, value: serde_json::Value) -> Result<()> {
    let mut out = output(common)?;
    report::write_report(&value, common.format, &mut out)?;
    out.flush()?;
    Ok(())
}

fn with_model(cfg: &Config, model: VaxModel) -> Result<homophily_lab::config::VaccinationSpec> {
    let mut v = cfg.require_vaccination()?;
    v.model = model;
    Ok(v)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::SteadyState(c) => {
            let cfg = load(&c)?;
            print(&c, report::steady_state(&cfg.model_params()?)?)
        }
        Command::Ci(c) => {
            let cfg = load(&c)?;
            print(&c, report::cumulative_infection(&cfg.model_params()?, cfg.shock())?)
        }
        Command::VaxRational(c) => {
            let cfg = load(&c)?;
            print(&c, report::vax_rational(&cfg.model_params()?, &with_model(&cfg, VaxModel::Rational)?)?)
        }
        Command::VaxPeer(c) => {
            let cfg = load(&c)?;
            print(&c, report::vax_peer(&cfg.model_params()?, &with_model(&cfg, VaxModel::Peer)?)?)
        }
        Command::VaxMixed { common: c, theta } => {
            let mut cfg = load(&c)?;
            if theta {
                if let Some(v) = cfg.vaccination.as_mut() {
                    v.variant = VariantName::Theta;
                }
            }
            print(&c, report::vax_mixed(&cfg.model_params()?, &with_model(&cfg, VaxModel::Mixed)?)?)
        }
        Command::Welfare(c) => {
            let cfg = load(&c)?;
            let vs = cfg.require_vaccination()?;
            print(&c, report::welfare_report(&cfg.model_params()?, &vs, cfg.shock())?)
        }
        Command::Optimal { common: c, grid } => {
            let cfg = load(&c)?;
            let vs = cfg.require_vaccination()?;
            let Some(mu) = cfg.model.mu else {
                bail!("missing model parameter `mu`");
            };
            print(&c, report::optimal(vs.params.k, mu, grid))
        }
        Command::Sir { common: c, seed } => {
            let cfg = load(&c)?;
            print(&c, report::sir(&cfg.model_params()?, seed.unwrap_or(cfg.sir_seed()))?)
        }
        Command::CrossCheck { common: c, agents, horizon, replicates, seed } => {
            let mut cfg = load(&c)?;
            let cc = cfg.cross_check.get_or_insert_with(Default::default);
            cc.agents = agents.or(cc.agents);
            cc.horizon = horizon.or(cc.horizon);
            cc.replicates = replicates.or(cc.replicates);
            cc.seed = seed.or(cc.seed);
            let spec = cfg.cross_check()?;
            print(&c, report::cross_check(&cfg.model_params()?, &spec)?)
        }
        Command::Sweep { common: c, param, count, min, max, outputs, model } => {
            let mut cfg = load(&c)?;
            let s = cfg.sweep.get_or_insert_with(|| SweepSection {
                param: SweptParam::H,
                count: 101,
                min: 0.0,
                max: 1.0,
                outputs: vec![Quantity::Rho, Quantity::Ci],
                seed: 0,
            });
            if let Some(v) = param {
                s.param = v;
            }
            s.count = count.unwrap_or(s.count);
            s.min = min.unwrap_or(s.min);
            s.max = max.unwrap_or(s.max);
            if let Some(o) = outputs {
                s.outputs = o;
            }
            if let Some(m) = model {
                cfg.vaccination.get_or_insert_with(VaccinationSection::default).model = m;
            }
            let (param, grid, outputs, seed) = cfg.grid()?;
            let spec = SweepSpec {
                base: cfg.model_params()?,
                vaccination: cfg.vaccination()?,
                param,
                grid,
                outputs,
                shock: cfg.shock(),
                sir_seed: cfg.sir_seed(),
                seed,
            };
            let result = run_sweep(&spec)?;
            match &c.out {
                Some(path) => emit(&result, c.format, path),
                None => {
                    let out = io::stdout().lock();
                    match c.format {
                        Format::Csv => write_csv(&result, out),
                        Format::Json => write_json(&result, out),
                    }
                }
            }
        }
    }
}
