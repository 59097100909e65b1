//! Command-line surface and the runner behind each subcommand.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use graphing_core::completion::{
    approach_sequence, build_tower, closure_neighbors, support_classify, LimitTower, SupportClass, TowerConfig,
};
use graphing_core::metric::{c3_check, separation_profile, C3Options, DisplacementMode, MetricResult};
use graphing_core::stats::{
    bs_histogram, edge_measure, greedy_ball_coloring, local_equivalence_tv, power_ball_identity, recurrence_profile,
    self_dense_probe, unimodularity_gap, EstimateReport,
};
use graphing_core::{ball, compact_distance, Graphing, RootedBall, DEFAULT_R_MAX};
use serde_json::Value;

use crate::error::{LabError, Result};
use crate::exec::Threaded;
use crate::report::{num, Format, Report};
use crate::spec::{load_spec, parse_point, parse_set, read_points, LoadedSpec};

#[derive(Debug, Parser)]
#[command(name = "graphing-lab", version, about = "Batch runs on graphings and their compactification metric")]
pub struct Cli {
    /// JSON spec of the graphing.
    #[arg(long, global = true)]
    pub spec: Option<PathBuf>,
    /// Seed for every stochastic command.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Largest radius examined by the metric.
    #[arg(long, global = true, default_value_t = DEFAULT_R_MAX)]
    pub rmax: u32,
    /// Sample count.
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Exit with status 4 when a reported distance is only a bracket.
    #[arg(long, global = true)]
    pub require_resolved: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compactification distance between two points.
    Metric {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// Node table of the ball B(x, r).
    Ball {
        #[arg(long)]
        x: String,
        #[arg(long)]
        r: u32,
    },
    /// Both sides of int_A deg_B = int_B deg_A, and the edge measure.
    CheckUnimodular {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
    /// Near pairs at d <= eps / (1 + r eps) have r-isomorphisms moving points by at most eps.
    CheckC3 {
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        r: u32,
        /// Measure displacement in the compactification metric instead of the base metric.
        #[arg(long)]
        strict: bool,
    },
    /// Both sides of int_U |W n B(x,r)| = int_W |U n B(y,r)|.
    CheckPowerBall {
        #[arg(long)]
        u: String,
        #[arg(long)]
        w: String,
        #[arg(long)]
        r: u32,
    },
    /// Histogram of r-ball classes.
    BsStats {
        #[arg(long)]
        r: u32,
    },
    /// Total variation between the r-ball class histograms of two graphings.
    CompareLocal {
        /// Spec of the second graphing.
        #[arg(long)]
        other: PathBuf,
        #[arg(long)]
        r: u32,
    },
    /// Smallest sampled distance between points at graph distance t' <= t.
    Separation {
        #[arg(long)]
        t: u32,
    },
    /// Points of A in B(x, r) for r = 1..=radius.
    Recurrence {
        #[arg(long)]
        a: String,
        #[arg(long)]
        x: String,
        #[arg(long)]
        radius: u32,
    },
    /// First z in the component of x with d(x, z) < eps.
    SelfDense {
        #[arg(long)]
        x: String,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 200)]
        explore: u32,
    },
    /// Build a limit tower from a sequence and dump its levels.
    CompactifyTrace {
        #[command(flatten)]
        tower: TowerArgs,
    },
    /// Classify a point or tower against the support of the measure.
    Support {
        /// A point of the graphing; otherwise the tower options are used.
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        tower: TowerArgs,
    },
    /// Check the spec: generators, exception lists, degree bound.
    Validate,
}

/// A sequence of points: a file, or the record approaches of an orbit to a target.
#[derive(Debug, Clone, Args)]
pub struct TowerArgs {
    /// File with one point per line.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Orbit start.
    #[arg(long)]
    pub start: Option<String>,
    /// Point approached by the orbit.
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub generator: usize,
    /// Walk the inverse of the generator.
    #[arg(long)]
    pub backward: bool,
    /// Orbit steps to scan.
    #[arg(long, default_value_t = 100_000)]
    pub steps: usize,
    /// Orbit steps taken before the scan starts.
    #[arg(long, default_value_t = 0)]
    pub skip: usize,
    #[arg(long, default_value_t = 10)]
    pub depth: u32,
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn seed(cli: &Cli) -> Result<u64> {
    cli.seed.ok_or_else(|| LabError::Usage("this command is stochastic and needs --seed".into()))
}

fn samples(cli: &Cli, default: usize) -> Result<usize> {
    match cli.n.unwrap_or(default) {
        0 => Err(LabError::Usage("--n must be at least 1".into())),
        n => Ok(n),
    }
}

fn spec(cli: &Cli) -> Result<LoadedSpec> {
    let path = cli.spec.as_deref().ok_or_else(|| LabError::Usage("--spec is required".into()))?;
    load_spec(path)
}

fn metric_cells(d: &MetricResult) -> Vec<Value> {
    vec![num(d.value_lower), num(d.value_upper), d.resolved.into(), d.witness_radius.into(), d.radius_reached.into()]
}

fn estimate_row(name: &str, e: &EstimateReport) -> Vec<Value> {
    vec![
        name.into(),
        num(e.estimate),
        num(e.stderr),
        num(e.lhs),
        num(e.lhs_stderr),
        num(e.rhs),
        num(e.rhs_stderr),
        e.samples.into(),
        e.exact.into(),
        e.passed.into(),
    ]
}

const ESTIMATE_COLUMNS: &[&str] =
    &["quantity", "estimate", "stderr", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "samples", "exact", "passed"];

fn ball_rows(report: &mut Report, level: u32, b: &RootedBall) {
    for i in 0..b.len() {
        let adjacency: Vec<String> = b.adjacency[i].iter().map(usize::to_string).collect();
        report.row(vec![
            level.into(),
            i.into(),
            b.nodes[i].part.into(),
            num(b.nodes[i].coord),
            b.dist[i].into(),
            adjacency.join(" ").into(),
        ]);
    }
}

const NODE_COLUMNS: &[&str] = &["level", "index", "part", "coord", "dist", "adjacency"];

fn tower(g: &Graphing, args: &TowerArgs) -> Result<LimitTower> {
    let points = match (&args.points, &args.start, &args.target) {
        (Some(path), None, None) => read_points(path)?,
        (None, Some(start), Some(target)) => {
            let gen = g
                .generators()
                .get(args.generator)
                .ok_or_else(|| LabError::Usage(format!("no generator {}", args.generator)))?;
            let mut x = parse_point(start)?;
            for _ in 0..args.skip {
                let next = if args.backward { gen.apply_inverse(g.space(), &x) } else { gen.apply(g.space(), &x) };
                x = next.ok_or_else(|| LabError::Usage("orbit leaves the domain of the generator".into()))?;
            }
            approach_sequence(g, x, args.generator, !args.backward, parse_point(target)?, args.steps)?
        }
        _ => return Err(LabError::Usage("give either --points, or --start and --target for an orbit approach".into())),
    };
    Ok(build_tower(g, points, args.depth, TowerConfig::default())?)
}

/// Runs one command and returns its report with the provenance header filled in.
pub fn run(cli: &Cli) -> Result<Report> {
    let exec = Threaded::from_env();
    let mut report = match &cli.command {
        Command::Validate => {
            let s = spec(cli)?;
            let v = s.graphing.validate();
            let mut r = Report::new(&["kind", "detail"]);
            r.summary("valid", v.is_valid()).summary("max_generated_degree", v.max_generated_degree);
            for violation in &v.violations {
                r.row(vec![format!("{:?}", violation.kind).into(), violation.detail.clone().into()]);
            }
            with_spec(r, &s)
        }
        Command::Metric { x, y } => {
            let s = spec(cli)?;
            let (x, y) = (parse_point(x)?, parse_point(y)?);
            let d = compact_distance(&s.graphing, x, y, cli.rmax)?;
            let mut r = Report::new(&["value_lower", "value_upper", "resolved", "witness_radius", "radius_reached"]);
            r.row(metric_cells(&d));
            r.unresolved = !d.resolved;
            with_spec(r, &s)
        }
        Command::Ball { x, r: radius } => {
            let s = spec(cli)?;
            let b = ball(&s.graphing, parse_point(x)?, *radius)?;
            let colours = greedy_ball_coloring(&b);
            let mut r = Report::new(NODE_COLUMNS);
            r.summary("nodes", b.len())
                .summary("edges", b.edge_count())
                .summary("colours", colours.iter().max().map_or(0, |c| c + 1));
            ball_rows(&mut r, *radius, &b);
            with_spec(r, &s)
        }
        Command::CheckUnimodular { a, b } => {
            let s = spec(cli)?;
            let (sa, sb) = (parse_set(a)?, parse_set(b)?);
            let (seed, n) = (seed(cli)?, samples(cli, 1_000_000)?);
            let gap = unimodularity_gap(&s.graphing, &sa, &sb, n, seed, &exec)?;
            let eta = edge_measure(&s.graphing, &sa, &sb, n, seed, &exec)?;
            let mut r = Report::new(ESTIMATE_COLUMNS);
            r.summary("passed", gap.passed);
            r.row(estimate_row("gap", &gap)).row(estimate_row("edge_measure", &eta));
            with_sampling(with_spec(r, &s), seed, n)
        }
        Command::CheckPowerBall { u, w, r: radius } => {
            let s = spec(cli)?;
            let (su, sw) = (parse_set(u)?, parse_set(w)?);
            let (seed, n) = (seed(cli)?, samples(cli, 100_000)?);
            let e = power_ball_identity(&s.graphing, &su, &sw, *radius, n, seed, &exec)?;
            let mut r = Report::new(ESTIMATE_COLUMNS);
            r.summary("passed", e.passed);
            r.row(estimate_row("gap", &e));
            with_sampling(with_spec(r, &s), seed, n)
        }
        Command::CheckC3 { eps, r: radius, strict } => {
            let s = spec(cli)?;
            let (seed, n) = (seed(cli)?, samples(cli, 100)?);
            let mode = if *strict { DisplacementMode::Strict } else { DisplacementMode::Base };
            let options = C3Options { r_max: cli.rmax, mode, ..C3Options::default() };
            let c3 = c3_check(&s.graphing, *eps, *radius, n, seed, options, &exec)?;
            let mut r = Report::new(&["x_part", "x", "y_part", "y", "distance_upper", "displacement"]);
            r.summary("eps", num(c3.eps))
                .summary("r", c3.radius)
                .summary("delta", num(c3.delta))
                .summary("pairs", c3.pairs)
                .summary("passed", c3.passed)
                .summary("starved", c3.starved)
                .summary("all_passed", c3.all_passed());
            for f in &c3.failures {
                r.row(vec![
                    f.x.part.into(),
                    num(f.x.coord),
                    f.y.part.into(),
                    num(f.y.coord),
                    num(f.distance_upper),
                    f.displacement.map_or(Value::Null, num),
                ]);
            }
            with_sampling(with_spec(r, &s), seed, n)
        }
        Command::BsStats { r: radius } => {
            let s = spec(cli)?;
            let (seed, n) = (seed(cli)?, samples(cli, 10_000)?);
            let stats = bs_histogram(&s.graphing, *radius, n, seed, &exec)?;
            let mut r = Report::new(&["class", "frequency", "key"]);
            r.summary("classes", stats.histogram.len()).summary("exact", stats.exact);
            for (i, (key, freq)) in stats.histogram.iter().enumerate() {
                r.row(vec![i.into(), num(*freq), crate::spec::sha256_hex(key).into()]);
            }
            with_sampling(with_spec(r, &s), seed, n)
        }
        Command::CompareLocal { other, r: radius } => {
            let s = spec(cli)?;
            let t = load_spec(other)?;
            let (seed, n) = (seed(cli)?, samples(cli, 100_000)?);
            let a = bs_histogram(&s.graphing, *radius, n, seed, &exec)?;
            let b = bs_histogram(&t.graphing, *radius, n, seed.wrapping_add(1), &exec)?;
            let tv = local_equivalence_tv(&a, &b)?;
            let mut r = Report::new(&["total_variation", "classes_first", "classes_second"]);
            r.provenance("other_spec_sha256", t.sha256.clone());
            r.row(vec![num(tv), a.histogram.len().into(), b.histogram.len().into()]);
            with_sampling(with_spec(r, &s), seed, n)
        }
        Command::Separation { t } => {
            let s = spec(cli)?;
            let (seed, n) = (seed(cli)?, samples(cli, 1000)?);
            let profile = separation_profile(&s.graphing, *t, n, seed, cli.rmax, &exec)?;
            let mut r = Report::new(&["t", "min_distance_lower"]);
            for (tp, v) in profile {
                r.row(vec![tp.into(), v.map_or(Value::Null, num)]);
            }
            with_sampling(with_spec(r, &s), seed, n)
        }
        Command::Recurrence { a, x, radius } => {
            let s = spec(cli)?;
            let profile = recurrence_profile(&s.graphing, &parse_set(a)?, parse_point(x)?, *radius)?;
            let mut r = Report::new(&["radius", "hits"]);
            for (rad, hits) in profile {
                r.row(vec![rad.into(), hits.into()]);
            }
            with_spec(r, &s)
        }
        Command::SelfDense { x, eps, explore } => {
            let s = spec(cli)?;
            let found = self_dense_probe(&s.graphing, parse_point(x)?, *eps, *explore, cli.rmax)?;
            let mut r = Report::new(&["part", "coord", "graph_distance", "distance"]);
            r.summary("found", found.is_some());
            if let Some(w) = found {
                r.row(vec![
                    w.point.part.into(),
                    num(w.point.coord),
                    w.graph_distance.into(),
                    num(w.distance.value_upper),
                ]);
            }
            with_spec(r, &s)
        }
        Command::CompactifyTrace { tower: args } => {
            let s = spec(cli)?;
            let t = tower(&s.graphing, args)?;
            let mut r = Report::new(NODE_COLUMNS);
            r.summary("depth", t.depth)
                .summary("residual", num(t.residual))
                .summary("steps", t.steps)
                .summary("scanned", t.scanned)
                .summary("root_part", t.root_point().part)
                .summary("root_coord", num(t.root_point().coord));
            if t.depth >= 2 {
                let nbrs = closure_neighbors(&t)?;
                let coords: Vec<String> =
                    nbrs.iter().map(|n| format!("{}:{}", n.root_point().part, n.root_point().coord)).collect();
                r.summary("closure_neighbors", nbrs.len()).summary("neighbor_roots", coords.join(" "));
            }
            for (level, b) in t.levels() {
                ball_rows(&mut r, level, &b);
            }
            with_spec(r, &s)
        }
        Command::Support { x, rho, tower: args } => {
            let s = spec(cli)?;
            let (seed, n) = (seed(cli)?, samples(cli, 10_000)?);
            let class = match x {
                Some(x) => support_classify(&s.graphing, &parse_point(x)?, *rho, n, seed, cli.rmax, &exec)?,
                None => {
                    let t = tower(&s.graphing, args)?;
                    support_classify(&s.graphing, &t, *rho, n, seed, cli.rmax, &exec)?
                }
            };
            let mut r = Report::new(&["class", "estimate", "stderr", "lower", "upper", "radius"]);
            let row = match class {
                SupportClass::InSupport { estimate, stderr } => {
                    vec!["in_support".into(), num(estimate), num(stderr), Value::Null, Value::Null, Value::Null]
                }
                SupportClass::OffSupport { radius, upper } => {
                    vec!["off_support".into(), Value::Null, Value::Null, num(0.0), num(upper), num(radius)]
                }
                SupportClass::Undetermined { lower, upper } => {
                    vec!["undetermined".into(), Value::Null, Value::Null, num(lower), num(upper), Value::Null]
                }
            };
            r.row(row);
            with_sampling(with_spec(r, &s), seed, n)
        }
    };
    let mut header = Report::default();
    header
        .provenance("tool", format!("graphing-lab {VERSION}"))
        .provenance("command", command_name(&cli.command))
        .provenance("rmax", cli.rmax);
    header.provenance.append(&mut report.provenance);
    report.provenance = header.provenance;
    Ok(report)
}

fn with_spec(mut r: Report, s: &LoadedSpec) -> Report {
    r.provenance("spec_sha256", s.sha256.clone());
    r
}

fn with_sampling(mut r: Report, seed: u64, n: usize) -> Report {
    r.provenance("seed", seed).provenance("n", n);
    r
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Metric { .. } => "metric",
        Command::Ball { .. } => "ball",
        Command::CheckUnimodular { .. } => "check-unimodular",
        Command::CheckC3 { .. } => "check-c3",
        Command::CheckPowerBall { .. } => "check-power-ball",
        Command::BsStats { .. } => "bs-stats",
        Command::CompareLocal { .. } => "compare-local",
        Command::Separation { .. } => "separation",
        Command::Recurrence { .. } => "recurrence",
        Command::SelfDense { .. } => "self-dense",
        Command::CompactifyTrace { .. } => "compactify-trace",
        Command::Support { .. } => "support",
        Command::Validate => "validate",
    }
}
