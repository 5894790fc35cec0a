use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::experiment::{Measurement, TrialRecord};
use super::summary::Summary;
use crate::error::{Error, Result};
use crate::kernels::{Algorithm, Flags};

/// Column order of the records CSV.
pub const RECORD_HEADER: [&str; 22] = [
    "trial_id",
    "n",
    "xmax",
    "xmin",
    "y_ref",
    "err_lse_basic",
    "bnd_lse_basic",
    "err_lse_shift",
    "bnd_lse_shift",
    "err_sm_basic",
    "bnd_sm_basic",
    "err_sm_shift",
    "bnd_sm_shift",
    "err_sm_alt",
    "bnd_sm_alt",
    "err_sm_altshift",
    "bnd_sm_altshift",
    "sum_dev_basic",
    "sum_dev_shift",
    "sum_dev_alt",
    "sum_dev_altshift",
    "flags",
];

impl TrialRecord {
    /// Numeric value of a records-CSV column.
    pub fn field(&self, name: &str) -> Result<f64> {
        Ok(match name {
            "trial_id" => self.trial_id as f64,
            "n" => self.n as f64,
            "xmax" => self.x_max,
            "xmin" => self.x_min,
            "y_ref" => self.y_ref,
            "err_lse_basic" => self.lse_basic.err,
            "bnd_lse_basic" => self.lse_basic.bnd,
            "err_lse_shift" => self.lse_shift.err,
            "bnd_lse_shift" => self.lse_shift.bnd,
            "err_sm_basic" => self.sm_basic.err,
            "bnd_sm_basic" => self.sm_basic.bnd,
            "err_sm_shift" => self.sm_shift.err,
            "bnd_sm_shift" => self.sm_shift.bnd,
            "err_sm_alt" => self.sm_alt.err,
            "bnd_sm_alt" => self.sm_alt.bnd,
            "err_sm_altshift" => self.sm_altshift.err,
            "bnd_sm_altshift" => self.sm_altshift.bnd,
            "sum_dev_basic" => self.sum_dev[0],
            "sum_dev_shift" => self.sum_dev[1],
            "sum_dev_alt" => self.sum_dev[2],
            "sum_dev_altshift" => self.sum_dev[3],
            other => return Err(Error::UnknownField(other.to_string())),
        })
    }

    fn flags_cell(&self) -> String {
        Algorithm::ALL
            .iter()
            .zip(&self.flags)
            .filter(|(_, f)| !f.is_empty())
            .map(|(a, f)| format!("{a}={f}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    fn to_row(&self) -> Vec<String> {
        let mut row: Vec<String> = RECORD_HEADER[..RECORD_HEADER.len() - 1]
            .iter()
            .map(|name| match *name {
                "trial_id" => self.trial_id.to_string(),
                "n" => self.n.to_string(),
                // shortest representation that parses back to the same bits
                other => self.field(other).expect("header names are fields").to_string(),
            })
            .collect();
        row.push(self.flags_cell());
        row
    }

    fn from_row(row: &csv::StringRecord) -> Result<Self> {
        if row.len() != RECORD_HEADER.len() {
            return Err(Error::MalformedRecords(format!(
                "expected {} columns, found {}",
                RECORD_HEADER.len(),
                row.len()
            )));
        }
        let num = |i: usize| -> Result<f64> {
            row[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::MalformedRecords(format!("column {} holds {:?}", RECORD_HEADER[i], &row[i])))
        };
        let int = |i: usize| -> Result<usize> {
            row[i]
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::MalformedRecords(format!("column {} holds {:?}", RECORD_HEADER[i], &row[i])))
        };
        let m = |i: usize| -> Result<Measurement> {
            Ok(Measurement {
                err: num(i)?,
                bnd: num(i + 1)?,
            })
        };
        let mut flags = [Flags::NONE; 4];
        for entry in row[21].split(';').filter(|e| !e.trim().is_empty()) {
            let (alg, names) = entry
                .split_once('=')
                .ok_or_else(|| Error::MalformedRecords(format!("bad flags entry {entry:?}")))?;
            let alg: Algorithm = alg.parse()?;
            let idx = Algorithm::ALL.iter().position(|a| *a == alg).expect("listed");
            flags[idx] = names.parse()?;
        }
        Ok(TrialRecord {
            trial_id: int(0)?,
            n: int(1)?,
            x_max: num(2)?,
            x_min: num(3)?,
            y_ref: num(4)?,
            lse_basic: m(5)?,
            lse_shift: m(7)?,
            sm_basic: m(9)?,
            sm_shift: m(11)?,
            sm_alt: m(13)?,
            sm_altshift: m(15)?,
            sum_dev: [num(17)?, num(18)?, num(19)?, num(20)?],
            flags,
        })
    }
}

pub fn write_records<W: Write>(records: &[TrialRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(RECORD_HEADER)?;
    for r in records {
        w.write_record(r.to_row())?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_records_csv(records: &[TrialRecord], path: impl AsRef<Path>) -> Result<()> {
    write_records(records, File::create(path)?)
}

pub fn read_records<R: Read>(reader: R) -> Result<Vec<TrialRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.iter().ne(RECORD_HEADER.iter().copied()) {
        return Err(Error::MalformedRecords("unexpected header".into()));
    }
    rdr.records().map(|row| TrialRecord::from_row(&row?)).collect()
}

pub fn read_records_csv(path: impl AsRef<Path>) -> Result<Vec<TrialRecord>> {
    read_records(File::open(path)?)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| v.to_string())
}

/// Long-format summary table: `section,name,statistic,value`.
pub fn write_summary<W: Write>(summary: &Summary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["section", "name", "statistic", "value"])?;
    w.write_record(["run", "all", "trials", &summary.trials.to_string()])?;
    w.write_record(["run", "all", "violations", &summary.total_violations().to_string()])?;
    w.write_record([
        "run",
        "all",
        "identical_lse_fraction",
        &opt(summary.identical_lse_fraction),
    ])?;
    for a in &summary.algorithms {
        let name = a.algorithm.as_str();
        for (stat, value) in [
            ("evaluated", a.evaluated.to_string()),
            ("max", opt(a.max)),
            ("mean", opt(a.mean)),
            ("median", opt(a.median)),
            ("violations", a.violations.to_string()),
            ("overflows", a.overflows.to_string()),
        ] {
            w.write_record(["error", name, stat, &value])?;
        }
    }
    for r in &summary.ratios {
        let name = format!("{}/{}", r.numerator, r.denominator);
        for (stat, value) in [
            ("count", r.count.to_string()),
            ("mean", opt(r.mean)),
            ("std_error", opt(r.std_error)),
            ("geometric_mean", opt(r.geometric_mean)),
            ("min", opt(r.min)),
            ("max", opt(r.max)),
        ] {
            w.write_record(["ratio", &name, stat, &value])?;
        }
    }
    for s in &summary.sum_deviation {
        let name = s.algorithm.as_str();
        for (stat, value) in [
            ("evaluated", s.evaluated.to_string()),
            ("median", opt(s.median)),
            ("max", opt(s.max)),
        ] {
            w.write_record(["sum_deviation", name, stat, &value])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn emit_summary_csv(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    write_summary(summary, File::create(path)?)
}
