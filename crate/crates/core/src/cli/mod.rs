//! Command-line surface. [`run`] parses arguments, performs the computation
//! and returns the rendered output with an exit code, so the binary only
//! prints.
//!
//! Exit codes: 0 success, 1 input error, 2 numerical failure (including a
//! failed audit, an optimality gap above tolerance, or a partial result).

pub mod files;
pub mod render;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::audit::{run_suite, AuditReport, Suite};
use crate::channels::Channel;
use crate::divergences::{
    channel_ht_rel_entropy, channel_max_rel_entropy_log, channel_rel_entropy_log, smoothed_channel_max_rel_entropy_log,
    AscentOptions, DivergenceReport, HtBudget,
};
use crate::error::Error;
use crate::qcore::ThermalContext;
use crate::sdp::diamond_norm_of_channels;
use crate::thermo::{
    asymptotic_rate_estimate_seeded, channel_thermo_report_with, one_shot, work_capacity, OneShotMode, OneShotResult,
};

use files::{load_bath, load_channel};
use render::{Cell, Document, Format, Row, Section, Units};

pub use files::{BathSpecFile, ChannelSpecFile};

pub const DEFAULT_SEED: u64 = 0x5eed;

/// Largest optimality gap, in nats, accepted without a failure exit.
pub const GAP_LIMIT: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "athermal", version, about = "Thermodynamic quantities of quantum channels")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Display unit for information quantities; energies are unaffected.
    #[arg(long, global = true, value_enum, default_value = "nats")]
    units: Units,
    #[arg(long, global = true, env = "ATHERMAL_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ChannelAndBath {
    /// ChannelSpecFile (JSON).
    channel: PathBuf,
    /// BathSpecFile (JSON).
    bath: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Distill,
    Cost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Rel,
    Max,
    Ht,
    SmoothedMax,
    Diamond,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Free energies, extractable work and the channel analogues of energy and entropy.
    Report(ChannelAndBath),
    /// Work needed or gained converting one channel into another.
    WorkCapacity { from: PathBuf, to: PathBuf, bath: PathBuf },
    /// One-shot athermality distillation or cost in golden units.
    OneShot {
        #[command(flatten)]
        files: ChannelAndBath,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        copies: usize,
        #[arg(long, value_enum, default_value = "distill")]
        mode: Mode,
    },
    /// Seeded property audit.
    Audit {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        /// Sample count; each suite has its own default.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Divergences of the channel from the absolutely thermal channel.
    Divergence {
        #[command(flatten)]
        files: ChannelAndBath,
        #[arg(long, value_enum, value_delimiter = ',', default_values = ["rel", "max"])]
        kind: Vec<Kind>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn error(e: &Error) -> Self {
        Outcome {
            code: if e.is_input_error() { 1 } else { 2 },
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        }
    }
}

/// A rendered document plus the reasons, if any, for a failure exit.
struct Finished {
    doc: Document,
    failures: Vec<String>,
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Report(f) => report(f, cli.seed),
        Command::WorkCapacity { from, to, bath } => capacity(from, to, bath),
        Command::OneShot {
            files,
            epsilon,
            copies,
            mode,
        } => one_shot_cmd(files, *epsilon, *copies, *mode, cli.seed),
        Command::Audit { suite, samples } => audit(*suite, cli.seed, *samples),
        Command::Divergence { files, kind, epsilon } => divergence(files, kind, *epsilon, cli.seed),
    };
    match result {
        Err(e) => Outcome::error(&e),
        Ok(Finished { doc, failures }) => Outcome {
            code: if failures.is_empty() { 0 } else { 2 },
            stdout: doc.render(cli.format, cli.units),
            stderr: failures.iter().map(|f| format!("error: {f}\n")).collect(),
        },
    }
}

fn load(f: &ChannelAndBath) -> crate::Result<(Channel, ThermalContext)> {
    Ok((load_channel(&f.channel)?, load_bath(&f.bath)?))
}

fn bath_section(ctx: &ThermalContext) -> Section {
    Section::fields(
        "bath",
        vec![
            Row::new("beta", Cell::Real(ctx.beta())),
            Row::new("dim", Cell::Count(ctx.dim() as u64)),
            Row::certified(
                "equilibrium_free_energy",
                Cell::Energy(ctx.equilibrium_free_energy()),
                "exact",
            ),
        ],
    )
}

fn channel_section(name: &str, n: &Channel) -> Section {
    Section::fields(
        name,
        vec![
            Row::new("dim_in", Cell::Count(n.dim_in() as u64)),
            Row::new("dim_out", Cell::Count(n.dim_out() as u64)),
            Row::new("kraus_operators", Cell::Count(n.kraus().len() as u64)),
        ],
    )
}

fn report(f: &ChannelAndBath, seed: u64) -> crate::Result<Finished> {
    let (n, ctx) = load(f)?;
    let opts = AscentOptions {
        seed,
        ..AscentOptions::default()
    };
    let r = channel_thermo_report_with(&n, &ctx, &opts)?;
    let p = r.provenance;
    let mut doc = Document::new("report");
    doc.push(channel_section("channel", &n));
    doc.push(bath_section(&ctx));
    doc.push(Section::fields(
        "free_energy",
        vec![
            Row::certified(
                "thermal_free_energy",
                Cell::Energy(r.thermal_free_energy),
                p.thermal_free_energy.as_str(),
            ),
            Row::certified("free_energy", Cell::Energy(r.free_energy), p.free_energy.as_str()),
            Row::certified(
                "extractable_work",
                Cell::Energy(r.extractable_work),
                p.free_energy.as_str(),
            ),
            Row::certified(
                "athermality",
                Cell::Nats(r.free_energy * r.beta),
                p.free_energy.as_str(),
            ),
        ],
    ));
    doc.push(Section::fields(
        "table1",
        vec![
            Row::certified("energy", Cell::Energy(r.energy), p.energy.as_str()),
            Row::certified("entropy", Cell::Nats(r.entropy), p.entropy.as_str()),
            Row::certified("helmholtz_gap", Cell::Energy(r.helmholtz_gap), p.helmholtz_gap.as_str()),
        ],
    ));
    let mut diag = vec![
        Row::new("identity_residual", Cell::Energy(r.identity_residual)),
        Row::new("optimality_gap", Cell::Nats(r.optimality_gap)),
    ];
    diag.extend(
        r.gaps
            .iter()
            .map(|(name, g)| Row::new(format!("{name}_gap"), Cell::Nats(*g))),
    );
    doc.push(Section::fields("diagnostics", diag));
    doc.warnings = r.warnings.clone();
    let failures = r
        .gaps
        .iter()
        .filter(|(_, g)| !(*g <= GAP_LIMIT))
        .map(|(name, g)| format!("{name}: optimality gap {g:.3e} exceeds {GAP_LIMIT:e}"))
        .collect();
    Ok(Finished { doc, failures })
}

fn capacity(from: &Path, to: &Path, bath: &Path) -> crate::Result<Finished> {
    let n = load_channel(from)?;
    let m = load_channel(to)?;
    let ctx = load_bath(bath)?;
    let w = work_capacity(&n, &m, &ctx)?;
    let mut doc = Document::new("work-capacity");
    doc.push(channel_section("from", &n));
    doc.push(channel_section("to", &m));
    doc.push(bath_section(&ctx));
    doc.push(Section::fields(
        "work_capacity",
        vec![
            Row::certified("delta_w", Cell::Energy(w.delta_w), "heuristic"),
            Row::certified(
                "divergence_difference",
                Cell::Energy(w.divergence_difference),
                "heuristic",
            ),
            Row::new("residual", Cell::Energy(w.residual)),
        ],
    ));
    Ok(Finished {
        doc,
        failures: Vec::new(),
    })
}

fn one_shot_rows(r: &OneShotResult) -> Vec<Row> {
    let mut rows = vec![
        Row::new("mode", Cell::Text(r.mode.as_str().into())),
        Row::new("epsilon", Cell::Real(r.eps)),
        Row::new("copies", Cell::Count(r.copies as u64)),
        Row::certified("raw_divergence", Cell::Nats(r.raw_divergence), r.certificate.as_str()),
        Row::new("half_divergence", Cell::Nats(r.half_divergence)),
        Row::new("golden_units", Cell::Count(r.units)),
    ];
    if let Some(x) = r.distill_nats {
        rows.push(Row::new("distill_nats", Cell::Nats(x)));
    }
    if let Some(x) = r.cost_nats {
        rows.push(Row::new("cost_nats", Cell::Nats(x)));
    }
    rows.push(Row::new("rate_per_copy", Cell::Nats(r.rate_per_copy)));
    rows.push(Row::new("partial", Cell::Flag(r.partial)));
    rows
}

fn one_shot_cmd(f: &ChannelAndBath, eps: f64, copies: usize, mode: Mode, seed: u64) -> crate::Result<Finished> {
    let (n, ctx) = load(f)?;
    let mode = match mode {
        Mode::Distill => OneShotMode::Distill,
        Mode::Cost => OneShotMode::Cost,
    };
    let mut doc = Document::new("one-shot");
    doc.push(channel_section("channel", &n));
    doc.push(bath_section(&ctx));
    let mut failures = Vec::new();
    if copies <= 1 {
        let budget = HtBudget {
            seed,
            ..HtBudget::default()
        };
        let r = one_shot(&n, &ctx, eps, copies.max(1), mode, &budget)?;
        doc.push(Section::fields("one_shot", one_shot_rows(&r)));
        doc.partial = r.partial;
        doc.warnings.extend(r.warning.clone());
    } else {
        let est = asymptotic_rate_estimate_seeded(&n, &ctx, eps, copies, seed)?;
        let last = est
            .points
            .last()
            .ok_or_else(|| Error::numerical("no copies fit the budget"))?;
        let head = match mode {
            OneShotMode::Distill => &last.distill,
            OneShotMode::Cost => &last.cost,
        };
        doc.push(Section::fields("one_shot", one_shot_rows(head)));
        let trend = est
            .points
            .iter()
            .map(|p| {
                vec![
                    Row::new("copies", Cell::Count(p.copies as u64)),
                    Row::new("ht_rate", Cell::Nats(p.ht_rate())),
                    Row::new("smoothed_max_rate", Cell::Nats(p.smoothed_max_rate())),
                    Row::new("distill_units", Cell::Count(p.distill.units)),
                    Row::new("cost_units", Cell::Count(p.cost.units)),
                    Row::new("partial", Cell::Flag(p.distill.partial || p.cost.partial)),
                ]
            })
            .collect();
        doc.push(Section::records("trend", trend));
        doc.push(Section::fields(
            "asymptotic_target",
            vec![Row::certified("athermality", Cell::Nats(est.target), "lower_bound")],
        ));
        doc.partial = est.partial || est.points.len() < copies;
        doc.warnings = est.warnings.clone();
    }
    if doc.partial {
        failures.push("budget exceeded: partial result".into());
    }
    Ok(Finished { doc, failures })
}

fn audit(suite: Suite, seed: u64, samples: Option<usize>) -> crate::Result<Finished> {
    let report: AuditReport = run_suite(suite, seed, samples)?;
    let mut doc = Document::new("audit");
    doc.push(Section::fields(
        "audit",
        vec![
            Row::new("suite", Cell::Text(suite.as_str().into())),
            Row::new("seed", Cell::Count(seed)),
            Row::new("samples", Cell::Count(report.samples as u64)),
            Row::new("passed", Cell::Flag(report.passed())),
        ],
    ));
    let checks = report
        .checks
        .iter()
        .map(|c| {
            vec![
                Row::new("name", Cell::Text(c.name.clone())),
                Row::new("passed", Cell::Flag(c.passed)),
                Row::new("flagged", Cell::Flag(c.flagged)),
                Row::new("residual", Cell::Real(c.residual)),
                Row::new("tolerance", Cell::Real(c.tolerance)),
                Row::new("samples", Cell::Count(c.samples as u64)),
                Row::new("detail", Cell::Text(c.detail.clone())),
            ]
        })
        .collect();
    doc.push(Section::records("checks", checks));
    let failures = report
        .failures()
        .map(|c| format!("{}: residual {:.3e} above {:.0e}", c.name, c.residual, c.tolerance))
        .collect();
    Ok(Finished { doc, failures })
}

fn divergence_rows(name: &str, r: &DivergenceReport) -> Vec<Row> {
    vec![
        Row::new("kind", Cell::Text(name.into())),
        Row::certified("value", Cell::Nats(r.value), r.certificate.as_str()),
        Row::new("residual", Cell::Real(r.residual)),
        Row::new("iterations", Cell::Count(r.iterations as u64)),
    ]
}

fn divergence(f: &ChannelAndBath, kinds: &[Kind], eps: Option<f64>, seed: u64) -> crate::Result<Finished> {
    let (n, ctx) = load(f)?;
    let log_gamma = ctx.log_gamma();
    let need_eps = |what: &str| eps.ok_or_else(|| Error::input(format!("--epsilon is required for {what}")));
    let mut doc = Document::new("divergence");
    doc.push(channel_section("channel", &n));
    doc.push(bath_section(&ctx));
    let mut records = Vec::new();
    for kind in kinds {
        let (name, r) = match kind {
            Kind::Rel => {
                let opts = AscentOptions {
                    seed,
                    ..AscentOptions::default()
                };
                ("rel", channel_rel_entropy_log(&n, &log_gamma, &opts)?)
            }
            Kind::Max => ("max", channel_max_rel_entropy_log(&n, &log_gamma)?),
            Kind::Ht => {
                let budget = HtBudget {
                    seed,
                    ..HtBudget::default()
                };
                ("ht", channel_ht_rel_entropy(&n, &log_gamma, need_eps("ht")?, &budget)?)
            }
            Kind::SmoothedMax => (
                "smoothed_max",
                smoothed_channel_max_rel_entropy_log(&n, &log_gamma, need_eps("smoothed-max")?)?,
            ),
            Kind::Diamond => {
                let t = Channel::absolutely_thermal(&ctx, n.dim_in());
                let d = diamond_norm_of_channels(&n, &t)?;
                records.push(vec![
                    Row::new("kind", Cell::Text("diamond_distance".into())),
                    Row::certified("value", Cell::Real(d), "exact"),
                    Row::new("residual", Cell::Real(0.0)),
                    Row::new("iterations", Cell::Count(0)),
                ]);
                records.push(vec![
                    Row::new("kind", Cell::Text("diamond_distance_halved".into())),
                    Row::certified("value", Cell::Real(d / 2.0), "exact"),
                    Row::new("residual", Cell::Real(0.0)),
                    Row::new("iterations", Cell::Count(0)),
                ]);
                continue;
            }
        };
        if let Some(w) = &r.warning {
            doc.warnings.push(format!("{name}: {w}"));
        }
        records.push(divergence_rows(name, &r));
    }
    doc.push(Section::records("divergences", records));
    Ok(Finished {
        doc,
        failures: Vec::new(),
    })
}
