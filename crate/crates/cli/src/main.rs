mod config;
mod eval;
mod failure;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use realpath::distance::{DistanceName, DistanceSpec, StepConvention};
use realpath::lattice::{enumerate_paths, run_lattice_experiment, LatticeSpec, LatticeWeight};
use realpath::minkowski::{classify, d1, d2, D2Variant, MinkowskiPath};
use realpath::screen::detection_ratios;
use realpath::toy::{m1_closed_form, m2_closed_form, m2_premises, M2Case, Premises, ToyModel};

use config::{parse_axis, resolve, Model, RunConfig, MAX_GRID_CELLS};
use eval::{screen_result, summaries, toy_distribution, Settings};
use failure::{Failure, Outcome};
use output::{distribution_table, emit, ratio_table, Cell, Format, Table};

#[derive(Parser)]
#[command(name = "realpath", version, about = "Path probabilities for toy, screen, lattice and Minkowski path models")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// JSON run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Accepted for forward compatibility; every evaluation is deterministic.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Use log(1/2) instead of log 2 for the step distance at |i-j| = D.
    #[arg(long, global = true)]
    literal_log_half: bool,
    /// Replace negative proper-time distance integrands by 0.
    #[arg(long, global = true)]
    clamp_nonnegative: bool,
    /// Factor f in the reading "x << y" as f*x <= y.
    #[arg(long, global = true, default_value_t = 10.0, value_name = "F")]
    much_less_factor: f64,
    /// Also enforce the single-block size premises.
    #[arg(long, global = true)]
    strict_premises: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one model and write its path distribution.
    Run,
    /// Evaluate a parameter grid and write long-format summaries.
    Sweep {
        /// Grid axis NAME=v1,v2,... or NAME=a..b; replaces a config axis of the same name.
        #[arg(long = "param", value_name = "NAME=VALUES")]
        params: Vec<String>,
    },
    /// Compare direct evaluation of M1 or M2 with the closed forms.
    Compare {
        /// M2 regime: i (close) or ii (distant).
        #[arg(long)]
        case: Option<String>,
    },
    /// Print the causal class of a Minkowski path; exit 0, 1 or 2.
    Classify {
        path: PathBuf,
        /// Second path; also prints the distances between the two.
        #[arg(long, value_name = "FILE")]
        against: Option<PathBuf>,
    },
    /// Detection ratios of a screen model.
    Ratios,
    /// Run an enumerated 1+1D lattice experiment.
    Lattice(LatticeArgs),
}

#[derive(Args)]
struct LatticeArgs {
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    extent: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    start: i64,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    end: i64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1)]
    hop: i64,
    /// Geometric distance name, e.g. max_sep, l2, velocity_l1.
    #[arg(long, default_value = "max_sep")]
    distance: String,
    #[arg(long)]
    scale: Option<f64>,
    /// uniform, curvature_cutoff or two_arm.
    #[arg(long, default_value = "uniform")]
    weight: String,
    #[arg(long, default_value_t = 1)]
    max_change: i64,
    #[arg(long, default_value_t = 1)]
    offset: i64,
    /// Site sequence file; defaults to the output name with `.paths` added.
    #[arg(long, value_name = "FILE")]
    paths: Option<PathBuf>,
}

impl Global {
    fn settings(&self) -> Settings {
        let convention = if self.literal_log_half { StepConvention::LiteralLogHalf } else { StepConvention::Corrected };
        Settings { convention, premises: Premises { factor: self.much_less_factor, strict: self.strict_premises } }
    }

    fn load(&self) -> Outcome<RunConfig> {
        RunConfig::from_value(self.load_value()?)
    }

    fn load_value(&self) -> Outcome<Value> {
        let path = self.config.as_ref().ok_or_else(|| Failure::usage("--config FILE is required"))?;
        let text = std::fs::read_to_string(path).map_err(|e| Failure::from(e).context(path))?;
        Ok(serde_json::from_str(&text)?)
    }

    fn write(&self, table: &Table) -> Outcome<()> {
        emit(self.output.as_deref(), &table.render(self.format))
    }
}

fn top_line(n: usize, c: f64, top: &[usize]) -> String {
    let top: Vec<String> = top.iter().map(usize::to_string).collect();
    format!("N={n} C={} top5=[{}]", output::num(c), top.join(","))
}

fn run(g: &Global) -> Outcome<u8> {
    let cfg = g.load()?;
    let s = g.settings();
    let dist = match &cfg.model {
        Model::Toy(toy) => toy_distribution(toy, &cfg.distance.expect("toy distance"), &s)?,
        Model::Lattice(spec) => run_lattice_experiment(spec, &cfg.distance.expect("lattice distance"), &cfg.weight)?,
        Model::Screen(spec) => {
            let r = screen_result(spec, &s)?;
            g.write(&ratio_table(&detection_ratios(&r)))?;
            let probs: Vec<String> = r.probs.iter().map(|p| output::num(*p)).collect();
            eprintln!("paths={} probs=[{}]", r.paths, probs.join(","));
            return Ok(0);
        }
    };
    g.write(&distribution_table(&dist))?;
    eprintln!("{}", top_line(dist.len(), dist.norm_constant, &dist.top_indices(5)));
    Ok(0)
}

fn sweep(g: &Global, params: &[String]) -> Outcome<u8> {
    let cfg = g.load()?;
    let s = g.settings();
    let mut axes = cfg.sweep.clone();
    for p in params {
        let axis = parse_axis(p)?;
        match axes.iter_mut().find(|a| a.name == axis.name) {
            Some(a) => *a = axis,
            None => axes.push(axis),
        }
    }
    let paths = axes.iter().map(|a| resolve(&cfg.raw, &a.name)).collect::<Outcome<Vec<_>>>()?;
    let cells = axes.iter().fold(1u64, |acc, a| acc.saturating_mul(a.values.len() as u64));
    if cells > MAX_GRID_CELLS {
        return Err(Failure::data(format!("grid has {cells} cells, above the limit of {MAX_GRID_CELLS}")));
    }
    // Row-major over the axes, the last one varying fastest.
    let points: Vec<Vec<usize>> = (0..cells as usize)
        .map(|mut c| {
            let mut idx = vec![0; axes.len()];
            for (k, a) in axes.iter().enumerate().rev() {
                idx[k] = c % a.values.len();
                c /= a.values.len();
            }
            idx
        })
        .collect();
    let results: Vec<Outcome<eval::Summaries>> = points
        .par_iter()
        .map(|idx| {
            let values: Vec<_> = idx.iter().enumerate().map(|(k, &i)| (paths[k].clone(), axes[k].values[i].clone())).collect();
            Ok(summaries(&cfg.with_values(&values)?, &s)?)
        })
        .collect();
    let mut header = vec!["cell"];
    header.extend(axes.iter().map(|a| a.name.as_str()));
    header.extend(["summary", "value"]);
    let mut t = Table::new(&header);
    for (c, (idx, r)) in points.iter().zip(results).enumerate() {
        for (name, value) in r? {
            let mut row = vec![Cell::Int(c as i64)];
            row.extend(idx.iter().enumerate().map(|(k, &i)| Cell::Raw(axes[k].values[i].clone())));
            row.push(Cell::Text(name.into()));
            row.push(Cell::Float(value));
            t.rows.push(row);
        }
    }
    g.write(&t)?;
    eprintln!("cells={cells}");
    Ok(0)
}

fn compare(g: &Global, case: Option<&str>) -> Outcome<u8> {
    let cfg = g.load()?;
    let s = g.settings();
    let Model::Toy(toy) = &cfg.model else {
        return Err(Failure::data("compare needs an M1 or M2 model"));
    };
    let d = cfg.distance.expect("toy distance");
    if d.name != DistanceName::Step || d.scale() != 1.0 {
        return Err(Failure::data("compare needs the unscaled step distance"));
    }
    let window = d.window.expect("validated window");
    let case = match case {
        Some(c) => Some(c.parse::<M2Case>()?),
        None => cfg.case,
    };
    if let ToyModel::M2(spec) = toy {
        let case = case.ok_or_else(|| Failure::usage("compare on M2 needs a case (i or ii)"))?;
        m2_premises(spec, window, case, &s.premises)?;
    }
    let dist = toy_distribution(toy, &d, &s)?;
    let c = dist.norm_constant;
    let mut t = Table::new(&["index", "direct", "closed_form", "abs_err", "status"]);
    let (mut covered, mut boundary, mut uncovered) = (0usize, 0usize, 0usize);
    let (mut max_abs, mut max_rel): (f64, f64) = (0.0, 0.0);
    let mut agree = true;
    for i in 1..=dist.len() {
        let cf = match toy {
            ToyModel::M1(spec) => m1_closed_form(i, spec, window, &s.premises)?,
            ToyModel::M2(spec) => m2_closed_form(i, spec, window, case.expect("checked above"), &s.premises)?,
            ToyModel::M3(_) => return Err(Failure::data("compare needs an M1 or M2 model")),
        };
        let direct = dist.probs[i - 1];
        let mut row = vec![Cell::Int(i as i64), Cell::Float(direct)];
        match cf.value() {
            Some(v) => {
                let err = (direct - c * v).abs();
                row.push(Cell::Float(c * v));
                row.push(Cell::Float(err));
                if cf.status() == "covered" {
                    covered += 1;
                    max_abs = max_abs.max(err);
                    if v > 0.0 {
                        max_rel = max_rel.max((dist.unnormalized[i - 1] - v).abs() / v);
                    }
                    if let ToyModel::M2(spec) = toy {
                        agree &= realpath::toy::m2_agrees(dist.unnormalized[i - 1], v, spec, window);
                    }
                } else {
                    boundary += 1;
                }
            }
            None => {
                uncovered += 1;
                row.push(Cell::Text(String::new()));
                row.push(Cell::Text(String::new()));
            }
        }
        row.push(Cell::Text(cf.status().into()));
        t.rows.push(row);
    }
    t.meta.push(("max_abs_err".into(), max_abs));
    let mut line = format!("covered={covered} boundary={boundary} uncovered={uncovered} max_abs_err={}", output::num(max_abs));
    if let ToyModel::M2(spec) = toy {
        t.meta.push(("max_rel_err".into(), max_rel));
        line += &format!(
            " max_rel_err={} tolerance={} agree={agree}",
            output::num(max_rel),
            output::num(realpath::toy::m2_tolerance(spec))
        );
    }
    g.write(&t)?;
    eprintln!("{line}");
    Ok(0)
}

fn read_path(path: &Path) -> Outcome<MinkowskiPath> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::from(e).context(path))?;
    MinkowskiPath::from_json(&text).map_err(|e| Failure::from(e).context(path))
}

fn classify_cmd(g: &Global, path: &Path, against: Option<&Path>) -> Outcome<u8> {
    let p = read_path(path)?;
    let label = classify(&p);
    let Some(q) = against else {
        emit(g.output.as_deref(), &format!("{}\n", label.as_str()))?;
        return Ok(label.exit_code() as u8);
    };
    let q = read_path(q)?;
    let mut t = Table::new(&["quantity", "value"]);
    t.rows.push(vec![Cell::Text("label".into()), Cell::Text(label.as_str().into())]);
    t.rows.push(vec![Cell::Text("against".into()), Cell::Text(classify(&q).as_str().into())]);
    let value = |r: realpath::Result<f64>| r.map_or(Cell::Text("undefined".into()), Cell::Float);
    t.rows.push(vec![Cell::Text("d1".into()), value(d1(&p, &q))]);
    for (name, v) in [("d2", D2Variant::Plain), ("d2_prime", D2Variant::Prime), ("d2_symmetrized", D2Variant::Symmetrized)] {
        t.rows.push(vec![Cell::Text(name.into()), value(d2(&p, &q, v, g.clamp_nonnegative))]);
    }
    g.write(&t)?;
    Ok(label.exit_code() as u8)
}

fn ratios(g: &Global) -> Outcome<u8> {
    let mut value = g.load_value()?;
    if let Value::Object(obj) = &mut value {
        obj.entry("model").or_insert_with(|| Value::String("screen".into()));
    }
    let cfg = RunConfig::from_value(value)?;
    let Model::Screen(spec) = &cfg.model else {
        return Err(Failure::data("ratios needs a screen model"));
    };
    let r = screen_result(spec, &g.settings())?;
    g.write(&ratio_table(&detection_ratios(&r)))?;
    Ok(0)
}

fn from_name<T: serde::de::DeserializeOwned>(what: &str, name: &str) -> Outcome<T> {
    serde_json::from_value(Value::String(name.into())).map_err(|_| Failure::usage(format!("unknown {what} {name:?}")))
}

fn lattice(g: &Global, a: &LatticeArgs) -> Outcome<u8> {
    let spec = LatticeSpec { steps: a.steps, extent: a.extent, start: a.start, end: a.end, mass: a.mass, hop: a.hop };
    let name: DistanceName = from_name("distance", &a.distance)?;
    if name.is_index() {
        return Err(Failure::data(format!("{} is an index distance", a.distance)));
    }
    let d = DistanceSpec { scale: a.scale, ..DistanceSpec::new(name) };
    let weight = match a.weight.as_str() {
        "uniform" => LatticeWeight::Uniform,
        "curvature_cutoff" => LatticeWeight::CurvatureCutoff { max_change: a.max_change },
        "two_arm" => LatticeWeight::TwoArm { offset: a.offset },
        other => return Err(Failure::usage(format!("unknown weight {other:?}"))),
    };
    let dist = run_lattice_experiment(&spec, &d, &weight)?;
    let lat = enumerate_paths(&spec)?;
    let header: Vec<String> = std::iter::once("index".to_string()).chain((0..=spec.steps).map(|t| format!("x{t}"))).collect();
    let mut sites = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>());
    for (i, s) in lat.sites.iter().enumerate() {
        sites.rows.push(std::iter::once(Cell::Int(i as i64 + 1)).chain(s.iter().map(|&x| Cell::Int(x))).collect());
    }
    let paths_file = match (&a.paths, &g.output) {
        (Some(p), _) => p.clone(),
        (None, Some(out)) => {
            let mut name = out.file_stem().unwrap_or_default().to_os_string();
            name.push(".paths.");
            name.push(out.extension().unwrap_or(if g.format == Format::Json { "json" } else { "csv" }.as_ref()));
            out.with_file_name(name)
        }
        (None, None) => PathBuf::from(if g.format == Format::Json { "lattice.paths.json" } else { "lattice.paths.csv" }),
    };
    g.write(&distribution_table(&dist))?;
    emit(Some(&paths_file), &sites.render(g.format))?;
    eprintln!("{} paths={}", top_line(dist.len(), dist.norm_constant, &dist.top_indices(5)), paths_file.display());
    Ok(0)
}

fn configure_threads() -> Outcome<()> {
    let Ok(v) = std::env::var("REALPATH_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Failure::usage(format!("REALPATH_THREADS={v:?} must be a positive integer"))
    })?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::usage(e.to_string()))
}

fn dispatch(cli: &Cli) -> Outcome<u8> {
    configure_threads()?;
    let g = &cli.global;
    if let Some(seed) = g.seed {
        log::debug!("seed {seed} ignored: evaluation is deterministic");
    }
    match &cli.command {
        Command::Run => run(g),
        Command::Sweep { params } => sweep(g, params),
        Command::Compare { case } => compare(g, case.as_deref()),
        Command::Classify { path, against } => classify_cmd(g, path, against.as_deref()),
        Command::Ratios => ratios(g),
        Command::Lattice(a) => lattice(g, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { failure::USAGE } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
