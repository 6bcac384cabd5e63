use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use athn::costing::{sweep_alpha, sweep_delta, sweep_to_csv, sweep_to_text};
use athn::gantt::{emit_gantt, emit_route_map};
use athn::ingest::{ingest_instance, CodeMap, IngestSettings, DEFAULT_MIN_SEPARATION};
use athn::instance::{InstanceFile, ScheduleFile};
use athn::model::{Fraction, HubAssignment, LocationId, Minutes, SubproblemKind};
use athn::pipeline::{run_pipeline, schedule_file, PipelineError, PipelineOptions, DEFAULT_EXACT_THRESHOLD};
use athn::selection::{select_all, Mode};
use athn::synth::{generate_instance, SyntheticSpec};
use athn::Config;

#[derive(Parser)]
#[command(name = "athn", version, about = "Plan autonomous transfer hub operations")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for generation and the heuristic.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Solver time cap per subproblem, in seconds.
    #[arg(long, global = true, default_value_t = 60.0)]
    time_limit: f64,
    /// Heuristic iteration budget per subproblem.
    #[arg(long, global = true)]
    iterations: Option<u64>,
    /// Override the autonomous cost reduction (0 to 1).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Override the schedule flexibility, in minutes.
    #[arg(long, global = true)]
    delta: Option<Minutes>,
    /// Override the number of autonomous trucks.
    #[arg(long, global = true)]
    trucks: Option<usize>,
    /// Largest subproblem handed to the exact solver.
    #[arg(long, global = true, default_value_t = DEFAULT_EXACT_THRESHOLD)]
    exact_threshold: usize,
    /// Solve hub subproblems one at a time.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded synthetic instance.
    Generate {
        #[arg(long, default_value_t = 17)]
        hubs: usize,
        #[arg(long, default_value_t = 494)]
        orders: usize,
        #[arg(long, default_value_t = 200)]
        customers: usize,
        /// Regular trucks per hub (default: one per order endpoint served).
        #[arg(long)]
        hub_trucks: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an instance from stop records, a travel matrix and access counts.
    Ingest {
        #[arg(long)]
        stops: PathBuf,
        /// CSV with columns from,to,miles,minutes.
        #[arg(long)]
        matrix: PathBuf,
        /// CSV with columns location,count.
        #[arg(long)]
        access: PathBuf,
        #[arg(long, default_value_t = 17)]
        hubs: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_SEPARATION)]
        min_separation: i64,
        /// JSON status/event code map.
        #[arg(long)]
        code_map: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        hub_trucks: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide Direct or ATHN for every order.
    Select {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Schedule all subproblems and write the schedule document.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Print the cost table of a schedule document.
    Report {
        #[arg(long)]
        schedule: PathBuf,
        #[arg(long)]
        csv: bool,
    },
    /// Draw a subproblem schedule as SVG.
    Gantt {
        #[arg(long)]
        schedule: PathBuf,
        /// Hub location id; the autonomous network when absent.
        #[arg(long)]
        hub: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Also write a route map next to the chart (needs the instance).
        #[arg(long, requires = "instance")]
        route_map: Option<PathBuf>,
        #[arg(long)]
        instance: Option<PathBuf>,
    },
    /// Rerun the pipeline for several values of alpha.
    SweepAlpha {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.30, 0.35, 0.40])]
        alphas: Vec<f64>,
        #[arg(long)]
        csv: bool,
    },
    /// Rerun the pipeline for several flexibility values.
    SweepDelta {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [30, 60, 90, 120])]
        deltas: Vec<Minutes>,
        #[arg(long)]
        csv: bool,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn fraction(value: f64) -> Result<Fraction> {
    Fraction::from_f64(value).with_context(|| format!("alpha {value} is not between 0 and 1"))
}

impl Global {
    fn options(&self) -> Result<PipelineOptions> {
        if !(self.time_limit.is_finite() && self.time_limit > 0.0) {
            bail!("time limit must be a positive number of seconds");
        }
        let mut opts = PipelineOptions {
            exact_threshold: self.exact_threshold,
            time_limit: Duration::from_secs_f64(self.time_limit),
            seed: self.seed,
            parallel: !self.sequential,
            ..PipelineOptions::default()
        };
        if let Some(n) = self.iterations {
            opts.iterations = n;
        }
        Ok(opts)
    }

    fn apply(&self, config: &mut Config) -> Result<()> {
        if let Some(a) = self.alpha {
            config.alpha = fraction(a)?;
        }
        if let Some(d) = self.delta {
            config.flexibility = d;
        }
        Ok(())
    }

    fn load(&self, path: &Path) -> Result<InstanceFile> {
        let mut inst = InstanceFile::from_json(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
        self.apply(&mut inst.config)?;
        if let Some(t) = self.trucks {
            inst.fleet.autonomous_count = t;
        }
        inst.validate().context("instance after overrides")?;
        Ok(inst)
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match cli.command {
        Command::Generate {
            hubs,
            orders,
            customers,
            hub_trucks,
            out,
        } => {
            let mut spec = SyntheticSpec {
                hub_count: hubs,
                order_count: orders,
                customer_count: customers,
                hub_trucks,
                seed: g.seed,
                ..SyntheticSpec::default()
            };
            if let Some(t) = g.trucks {
                spec.autonomous_trucks = t;
            }
            let mut inst = generate_instance(&spec)?;
            g.apply(&mut inst.config)?;
            inst.validate()?;
            write(&out, &inst.to_json())?;
        }
        Command::Ingest {
            stops,
            matrix,
            access,
            hubs,
            min_separation,
            code_map,
            hub_trucks,
            out,
        } => {
            let codes = match code_map {
                Some(p) => serde_json::from_str(&read(&p)?).with_context(|| format!("parsing {}", p.display()))?,
                None => CodeMap::default(),
            };
            let mut config = Config::default();
            g.apply(&mut config)?;
            let settings = IngestSettings {
                codes,
                hub_count: hubs,
                min_separation,
                config,
                autonomous_trucks: g.trucks.unwrap_or(athn::Fleet::DEFAULT_AUTONOMOUS),
                hub_trucks,
            };
            let (inst, summary) = ingest_instance(&read(&stops)?, &read(&matrix)?, &read(&access)?, &settings)?;
            for w in &summary.warnings {
                log::warn!("{w}");
            }
            if summary.hubs_placed < hubs {
                log::warn!("placed {} of {hubs} hubs at {min_separation} mi separation", summary.hubs_placed);
            }
            if summary.outside_horizon > 0 {
                log::warn!("dropped {} orders picked up after the horizon", summary.outside_horizon);
            }
            eprintln!(
                "{} orders, {} challenging, {} kept, {} hubs",
                summary.orders,
                summary.challenging,
                inst.orders.len(),
                summary.hubs_placed
            );
            write(&out, &inst.to_json())?;
        }
        Command::Select { instance, csv } => {
            let inst = g.load(&instance)?;
            let hubs = if inst.orders.is_empty() {
                HubAssignment::default()
            } else {
                HubAssignment::nearest(&inst.network)?
            };
            let sel = select_all(&inst.orders, &inst.network, &hubs, &inst.config)?;
            let mode = |m: Mode| match m {
                Mode::Direct => "direct",
                Mode::Athn => "athn",
            };
            if csv {
                let mut w = csv::Writer::from_writer(std::io::stdout());
                w.write_record(["order_id", "mode", "direct_cost", "athn_cost", "same_hub"])?;
                for d in &sel.decisions {
                    w.write_record([
                        d.order_id.to_string(),
                        mode(d.mode).to_string(),
                        d.direct_cost.to_string(),
                        d.athn_cost.to_string(),
                        d.same_hub.to_string(),
                    ])?;
                }
                w.flush()?;
            } else {
                println!("{:>10}  {:>6}  {:>14}  {:>14}", "order", "mode", "direct_cost", "athn_cost");
                for d in &sel.decisions {
                    println!(
                        "{:>10}  {:>6}  {:>14}  {:>14}{}",
                        d.order_id,
                        mode(d.mode),
                        d.direct_cost,
                        d.athn_cost,
                        if d.same_hub { "  same hub" } else { "" }
                    );
                }
                let s = &sel.summary;
                println!(
                    "athn orders: {}, direct orders: {}, athn cost: {}, direct cost: {} (milli-dollars)",
                    s.athn_orders, s.direct_orders, s.athn_cost, s.direct_cost
                );
            }
        }
        Command::Solve { instance, out, csv } => {
            let inst = g.load(&instance)?;
            let report = run_pipeline(&inst, &g.options()?)?;
            for (s, used) in &report.schedules {
                log::info!("{}: {:?} via {:?}, empty miles {}", s.kind, s.status, used, s.empty_miles);
            }
            let file = schedule_file(&report, &inst, g.seed);
            write(&out, &file.to_json())?;
            if csv {
                print!("{}", file.cost_table.to_csv());
            } else {
                print!("{}", file.cost_table.to_text());
                println!(
                    "autonomous empty share: {:.1}%, scheduled first/last-mile empty miles: {}",
                    report.autonomous_empty_share(),
                    report.cost_inputs.first_last_scheduled_empty
                );
            }
        }
        Command::Report { schedule, csv } => {
            let file = ScheduleFile::from_json(&read(&schedule)?).with_context(|| format!("parsing {}", schedule.display()))?;
            if csv {
                print!("{}", file.cost_table.to_csv());
            } else {
                print!("{}", file.cost_table.to_text());
            }
        }
        Command::Gantt {
            schedule,
            hub,
            out,
            route_map,
            instance,
        } => {
            let file = ScheduleFile::from_json(&read(&schedule)?).with_context(|| format!("parsing {}", schedule.display()))?;
            let kind = hub.map_or(SubproblemKind::AutonomousNet, |h| SubproblemKind::HubLocal(LocationId(h)));
            write(&out, &emit_gantt(&file, kind)?)?;
            if let (Some(map), Some(inst)) = (route_map, instance) {
                let inst = InstanceFile::from_json(&read(&inst)?).with_context(|| format!("parsing {}", inst.display()))?;
                write(&map, &emit_route_map(&file, &inst.network, kind)?)?;
            }
        }
        Command::SweepAlpha { instance, alphas, csv } => {
            let inst = g.load(&instance)?;
            let alphas = alphas.into_iter().map(fraction).collect::<Result<Vec<_>>>()?;
            let rows = sweep_alpha(&inst, &alphas, &g.options()?)?;
            print!("{}", if csv { sweep_to_csv(&rows, "alpha") } else { sweep_to_text(&rows, "alpha") });
        }
        Command::SweepDelta { instance, deltas, csv } => {
            let inst = g.load(&instance)?;
            if let Some(d) = deltas.iter().find(|&&d| d < 0) {
                bail!("flexibility {d} is negative");
            }
            let rows = sweep_delta(&inst, &deltas, &g.options()?)?;
            print!("{}", if csv { sweep_to_csv(&rows, "delta") } else { sweep_to_text(&rows, "delta") });
            if rows.iter().any(|r| r.non_monotone) {
                log::warn!("savings dropped as flexibility grew; rows marked * came from the heuristic");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<PipelineError>() {
                Some(PipelineError::Infeasible { .. } | PipelineError::NoTrucks(_)) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
