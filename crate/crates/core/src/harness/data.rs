use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};
use crate::kernels::InputVector;
use crate::precision::FloatFormat;

/// Synthetic input families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Generator {
    /// Entries drawn independently from U(lo, hi).
    Uniform { lo: f64, hi: f64 },
    /// Entries `-log n + U(-eps, eps)`, where log-sum-exp is close to zero.
    NearSingular { eps: f64 },
    /// Maximum drawn from U(0, delta/3), spread `max - min` within 5% of delta.
    WideSpread { delta: f64 },
    /// Every entry equal to `c`.
    Constant { c: f64 },
}

impl Generator {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidDataSpec(msg));
        match *self {
            Generator::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return bad(format!("uniform bounds must satisfy lo < hi, got ({lo}, {hi})"));
                }
            }
            Generator::NearSingular { eps } => {
                if !(eps.is_finite() && eps >= 0.0) {
                    return bad(format!("near-singular eps must be finite and >= 0, got {eps}"));
                }
            }
            Generator::WideSpread { delta } => {
                if !(delta.is_finite() && delta > 0.0) {
                    return bad(format!("wide-spread delta must be finite and > 0, got {delta}"));
                }
            }
            Generator::Constant { c } => {
                if !c.is_finite() {
                    return bad(format!("constant must be finite, got {c}"));
                }
            }
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        // symmetric draw in [-1, 1)
        let sym = |rng: &mut R| 2.0 * rng.random::<f64>() - 1.0;
        match *self {
            Generator::Uniform { lo, hi } => (0..n).map(|_| rng.random_range(lo..hi)).collect(),
            Generator::NearSingular { eps } => {
                let centre = -(n as f64).ln();
                (0..n).map(|_| centre + eps * sym(rng)).collect()
            }
            Generator::WideSpread { delta } => {
                let top = rng.random_range(0.0..delta / 3.0);
                if n == 1 {
                    return vec![top];
                }
                let span = delta * (1.0 + 0.05 * sym(rng));
                let hi = rng.random_range(0..n);
                let lo = (hi + rng.random_range(1..n)) % n;
                (0..n)
                    .map(|i| {
                        let depth = if i == hi {
                            0.0
                        } else if i == lo {
                            1.0
                        } else {
                            rng.random::<f64>()
                        };
                        top - span * depth
                    })
                    .collect()
            }
            Generator::Constant { c } => vec![c; n],
        }
    }
}

/// Parses `uniform:lo,hi`, `near-singular:eps`, `wide-spread:delta` and
/// `constant:c`.
impl FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidDataSpec(format!("cannot parse generator {s:?}"));
        let (kind, args) = s.trim().split_once(':').ok_or_else(bad)?;
        let args: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let g = match (kind.trim(), args.as_slice()) {
            ("uniform", &[lo, hi]) => Generator::Uniform { lo, hi },
            ("near-singular", &[eps]) => Generator::NearSingular { eps },
            ("wide-spread", &[delta]) => Generator::WideSpread { delta },
            ("constant", &[c]) => Generator::Constant { c },
            _ => return Err(bad()),
        };
        g.validate()?;
        Ok(g)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Generator::Uniform { lo, hi } => write!(f, "uniform:{lo},{hi}"),
            Generator::NearSingular { eps } => write!(f, "near-singular:{eps}"),
            Generator::WideSpread { delta } => write!(f, "wide-spread:{delta}"),
            Generator::Constant { c } => write!(f, "constant:{c}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataSpec {
    pub generator: Generator,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
}

impl DataSpec {
    pub fn new(generator: Generator, n: usize, count: usize, seed: u64) -> Self {
        Self {
            generator,
            n,
            count,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidDataSpec("n must be at least 1".into()));
        }
        if self.count == 0 {
            return Err(Error::InvalidDataSpec("count must be at least 1".into()));
        }
        self.generator.validate()
    }
}

/// Where experiment inputs come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Generator(DataSpec),
    Csv(PathBuf),
}

impl DataSource {
    pub fn load(&self, fmt: Option<&FloatFormat>) -> Result<Vec<InputVector>> {
        match self {
            DataSource::Generator(spec) => generate(spec, fmt),
            DataSource::Csv(path) => {
                let data = ingest_csv(path)?;
                match fmt {
                    Some(f) => data.iter().map(|x| x.rounded_to(f)).collect(),
                    None => Ok(data),
                }
            }
        }
    }
}

/// Generate `spec.count` vectors. Trial `i` draws from ChaCha20 stream `i`
/// of the seed, so any subset of trials can be regenerated independently.
pub fn generate(spec: &DataSpec, fmt: Option<&FloatFormat>) -> Result<Vec<InputVector>> {
    spec.validate()?;
    (0..spec.count)
        .map(|trial| {
            let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
            rng.set_stream(trial as u64);
            let x = InputVector::new(spec.generator.sample(spec.n, &mut rng))?;
            match fmt {
                Some(f) => x.rounded_to(f),
                None => Ok(x),
            }
        })
        .collect()
}

pub fn ingest_csv(path: impl AsRef<Path>) -> Result<Vec<InputVector>> {
    let path = path.as_ref();
    let file = File::open(path)?;
    ingest_csv_reader(file).map_err(|e| match e {
        Error::Parse { line, field, token, .. } => Error::Parse {
            path: Some(path.to_path_buf()),
            line,
            field,
            token,
        },
        other => other,
    })
}

/// One vector per line of comma-separated decimals; blank lines are skipped
/// and lines may differ in length.
pub fn ingest_csv_reader<R: Read>(reader: R) -> Result<Vec<InputVector>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(i, token)| {
                token.parse::<f64>().map_err(|_| Error::Parse {
                    path: None,
                    line,
                    field: i + 1,
                    token: token.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(InputVector::new(values).map_err(|_| Error::Parse {
            path: None,
            line,
            field: 1,
            token: record.iter().collect::<Vec<_>>().join(","),
        })?);
    }
    Ok(out)
}

/// Inverse of [`ingest_csv`]; values are written in shortest round-trip form.
pub fn write_vectors_csv(data: &[InputVector], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for x in data {
        let line: Vec<String> = x.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}
