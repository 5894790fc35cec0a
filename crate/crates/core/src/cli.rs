//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when an experiment records a bound
//! violation, 2 on bad input or I/O failure.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::analysis::{bound_from_ingredients, condition_report, y_range, BoundAlgorithm, BoundIngredients};
use crate::error::{Error, Result};
use crate::harness::{
    emit_records_csv, emit_summary_csv, emit_svg_scatter, generate, ingest_csv, run_experiment_with, summarize,
    DataSpec, ExperimentOptions, Generator, ScatterOptions, STANDARD_PLOTS,
};
use crate::kernels::{evaluate, Algorithm, EvalResult, InputVector};
use crate::oracle::lse_softmax_reference;
use crate::precision::{ArithmeticContext, FloatFormat};

/// Environment variable capping the experiment worker count.
pub const THREADS_ENV: &str = "LSE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "lse",
    version,
    about = "Log-sum-exp and softmax under simulated low precision"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one algorithm on each input vector.
    Eval {
        #[arg(long, default_value = "shifted", value_parser = parse_algorithm)]
        alg: Algorithm,
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        gen: GenOptions,
        /// One JSON object per vector.
        #[arg(long)]
        json: bool,
    },
    /// Condition numbers and bound factors of each input vector.
    Analyze {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        gen: GenOptions,
        #[arg(long)]
        json: bool,
    },
    /// Run every algorithm on a data set and compare errors with bounds.
    Experiment {
        #[command(flatten)]
        format: FormatArgs,
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        gen: GenOptions,
        /// Output prefix: writes PREFIX.csv and PREFIX_summary.csv.
        #[arg(long, default_value = "lse_run")]
        out: PathBuf,
        /// Directory for the standard set of SVG scatter plots.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Logarithmic plot axes.
        #[arg(long)]
        log_axes: bool,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Parameters of the named formats.
    Formats {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct FormatArgs {
    /// fp16, bfloat16, fp32, fp64 or custom:t=..,emin=..,emax=..,subnormals=0|1
    #[arg(long, default_value = "fp64", value_parser = parse_format)]
    pub format: FloatFormat,
    /// Enable subnormal results (bfloat16 has none by default).
    #[arg(long)]
    pub subnormals: bool,
}

impl FormatArgs {
    fn resolve(&self) -> FloatFormat {
        if self.subnormals {
            self.format.with_subnormals(true)
        } else {
            self.format
        }
    }
}

/// Exactly one of `--x`, `--csv` and `--gen`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct InputArgs {
    /// Inline comma-separated vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, num_args = 1)]
    pub x: Option<Vec<f64>>,
    /// CSV file with one vector per line.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Generator: uniform:lo,hi | near-singular:eps | wide-spread:delta | constant:c
    #[arg(long = "gen", value_parser = parse_generator, allow_hyphen_values = true)]
    pub generator: Option<Generator>,
}

#[derive(Debug, Args)]
pub struct GenOptions {
    /// Vector length for --gen.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    /// Number of vectors for --gen.
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl InputArgs {
    pub fn load(&self, o: &GenOptions) -> Result<Vec<InputVector>> {
        if let Some(x) = &self.x {
            return Ok(vec![InputVector::new(x.clone())?]);
        }
        if let Some(path) = &self.csv {
            return ingest_csv(path);
        }
        let generator = self
            .generator
            .ok_or_else(|| Error::InvalidDataSpec("no input source given".into()))?;
        generate(&DataSpec::new(generator, o.n, o.count, o.seed), None)
    }
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_format(s: &str) -> std::result::Result<FloatFormat, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_generator(s: &str) -> std::result::Result<Generator, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `v` to `digits` significant figures, in fixed notation when the decimal
/// exponent lies in `fixed` and scientific otherwise.
fn sig(v: f64, digits: usize, fixed: std::ops::RangeInclusive<i32>, trim: bool) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if trim && s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if fixed.contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip(&format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", strip(mantissa))
    }
}

/// Nine significant digits, enough to show any fp32 value exactly.
pub fn fmt9(v: f64) -> String {
    sig(v, 9, -5..=8, true)
}

/// Three significant figures, trailing zeros kept.
pub fn fmt3(v: f64) -> String {
    sig(v, 3, -1..=2, false)
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| fmt9(x)).collect();
    format!("[{}]", items.join(", "))
}

/// JSON number, or a string for values JSON cannot represent.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        json!(fmt9(v))
    }
}

fn nums(v: &[f64]) -> Value {
    Value::Array(v.iter().map(|&x| num(x)).collect())
}

fn eval_json(r: &EvalResult, fmt: &FloatFormat, x: &InputVector) -> Value {
    json!({
        "algorithm": r.algorithm.as_str(),
        "format": fmt.to_string(),
        "x": nums(x),
        "y": num(r.y),
        "g": nums(&r.g),
        "flags": r.flags.names().collect::<Vec<_>>(),
    })
}

fn cmd_eval(alg: Algorithm, fmt: FloatFormat, data: &[InputVector], json: bool, out: &mut dyn Write) -> Result<()> {
    let ctx = ArithmeticContext::simulated(fmt);
    for (i, x) in data.iter().enumerate() {
        let x = x.rounded_to(&fmt)?;
        let r = evaluate(alg, &x, &ctx);
        if json {
            writeln!(out, "{}", eval_json(&r, &fmt, &x))?;
            continue;
        }
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "algorithm: {alg}")?;
        writeln!(out, "format: {fmt}")?;
        writeln!(out, "y: {}", fmt9(r.y))?;
        writeln!(out, "g: {}", fmt_vec(&r.g))?;
        let flags = if r.flags.is_empty() {
            "none".to_string()
        } else {
            r.flags.to_string()
        };
        writeln!(out, "flags: {flags}")?;
    }
    Ok(())
}

fn cmd_analyze(data: &[InputVector], json: bool, out: &mut dyn Write) -> Result<()> {
    for (i, x) in data.iter().enumerate() {
        let y = lse_softmax_reference(x).y_ref;
        let cond = condition_report(x);
        let (lo, hi) = y_range(x);
        let ing = BoundIngredients::new(x, y);
        let bounds: Vec<(BoundAlgorithm, f64)> = BoundAlgorithm::ALL
            .iter()
            .map(|&b| (b, bound_from_ingredients(b, ing).leading_factor))
            .collect();
        if json {
            let mut b = Map::new();
            for (alg, f) in &bounds {
                b.insert(alg.as_str().to_string(), num(*f));
            }
            let obj = json!({
                "n": x.len(),
                "y": num(y),
                "cond_lse": num(cond.cond_f),
                "cond_softmax_exact": num(cond.cond_g_exact),
                "cond_softmax_upper": num(cond.cond_g_upper),
                "y_range": [num(lo), num(hi)],
                "bounds": b,
            });
            writeln!(out, "{obj}")?;
            continue;
        }
        if i > 0 {
            writeln!(out)?;
        }
        writeln!(out, "n: {}", x.len())?;
        writeln!(out, "y: {}", fmt9(y))?;
        writeln!(out, "cond_lse: {}", fmt9(cond.cond_f))?;
        writeln!(out, "cond_softmax_exact: {}", fmt9(cond.cond_g_exact))?;
        writeln!(out, "cond_softmax_upper: {}", fmt9(cond.cond_g_upper))?;
        writeln!(out, "y_range: ({}, {})", fmt9(lo), fmt9(hi))?;
        for (alg, f) in &bounds {
            writeln!(out, "bound {}: {}", alg.as_str(), fmt9(*f))?;
        }
    }
    Ok(())
}

/// Worker count from [`THREADS_ENV`]; `None` when unset.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::InvalidDataSpec(format!(
                "{THREADS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
    }
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

struct ExperimentRun<'a> {
    fmt: FloatFormat,
    data: Vec<InputVector>,
    out_prefix: &'a Path,
    svg: Option<&'a Path>,
    log_axes: bool,
    json: bool,
}

fn cmd_experiment(run: ExperimentRun<'_>, out: &mut dyn Write) -> Result<i32> {
    let opts = ExperimentOptions {
        threads: threads_from_env()?,
    };
    let records = run_experiment_with(&run.data, &run.fmt, opts)?;
    let summary = summarize(&records);
    let records_path = with_suffix(run.out_prefix, ".csv");
    let summary_path = with_suffix(run.out_prefix, "_summary.csv");
    emit_records_csv(&records, &records_path)?;
    emit_summary_csv(&summary, &summary_path)?;
    if let Some(dir) = run.svg {
        fs::create_dir_all(dir)?;
        for (name, xf, yf, reference_line) in STANDARD_PLOTS {
            let opts = ScatterOptions {
                title: Some(format!("{name} ({})", run.fmt)),
                log_axes: run.log_axes,
                reference_line,
            };
            emit_svg_scatter(&records, xf, yf, dir.join(format!("{name}.svg")), &opts)?;
        }
    }
    if run.json {
        let text = serde_json::to_string(&summary).map_err(|e| Error::Io(e.into()))?;
        writeln!(out, "{text}")?;
    } else {
        writeln!(out, "format: {}", run.fmt)?;
        writeln!(out, "records: {}", records_path.display())?;
        writeln!(out, "summary: {}", summary_path.display())?;
        writeln!(out, "{summary}")?;
    }
    Ok(if summary.total_violations() > 0 { 1 } else { 0 })
}

const FORMAT_COLUMNS: [&str; 12] = [
    "format",
    "t",
    "emin",
    "emax",
    "subnormals",
    "u",
    "rmin_s",
    "rmin",
    "rmax",
    "log_rmin_s",
    "log_rmin",
    "log_rmax",
];

fn cmd_formats(json: bool, out: &mut dyn Write) -> Result<()> {
    for (i, f) in FloatFormat::named().into_iter().enumerate() {
        // rmin_s is the smallest subnormal of the encoding even when the
        // arithmetic flushes subnormals
        let values = [
            f.unit_roundoff(),
            f.encoding_min_subnormal(),
            f.r_min(),
            f.r_max(),
            f.encoding_min_subnormal().ln(),
            f.r_min().ln(),
            f.r_max().ln(),
        ];
        if json {
            let mut obj = Map::new();
            obj.insert("format".into(), json!(f.to_string()));
            obj.insert("t".into(), json!(f.precision_bits));
            obj.insert("emin".into(), json!(f.emin));
            obj.insert("emax".into(), json!(f.emax));
            obj.insert("subnormals".into(), json!(f.subnormals));
            for (name, v) in FORMAT_COLUMNS[5..].iter().zip(values) {
                obj.insert((*name).into(), num(v));
            }
            writeln!(out, "{}", Value::Object(obj))?;
        } else {
            if i == 0 {
                writeln!(out, "{}", FORMAT_COLUMNS.join(" "))?;
            }
            let mut row = vec![
                f.to_string(),
                f.precision_bits.to_string(),
                f.emin.to_string(),
                f.emax.to_string(),
                if f.subnormals { "on" } else { "off" }.to_string(),
            ];
            row.extend(values.iter().map(|&v| fmt3(v)));
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

/// Execute a parsed command line, returning the process exit status.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Eval {
            alg,
            format,
            input,
            gen,
            json,
        } => {
            cmd_eval(alg, format.resolve(), &input.load(&gen)?, json, out)?;
        }
        Command::Analyze { input, gen, json } => cmd_analyze(&input.load(&gen)?, json, out)?,
        Command::Experiment {
            format,
            input,
            gen,
            out: prefix,
            svg,
            log_axes,
            json,
        } => {
            let run = ExperimentRun {
                fmt: format.resolve(),
                data: input.load(&gen)?,
                out_prefix: &prefix,
                svg: svg.as_deref(),
                log_axes,
                json,
            };
            return cmd_experiment(run, out);
        }
        Command::Formats { json } => cmd_formats(json, out)?,
    }
    Ok(0)
}
