use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::GenerationStats;
use crate::pulse::{Gene, PulseSchedule};

pub const LOG_HEADER: &str = "gen,nevals,avg,std,min,max,diversity,p_mut,p_cross";
pub const PLOT_HEADER: &str = "gen,avg,avg_minus_std,avg_plus_std,max";

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn format_generation_log(stats: &[GenerationStats]) -> String {
    let mut out = String::from(LOG_HEADER);
    out.push('\n');
    for s in stats {
        out.push_str(&format!(
            "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            s.gen, s.nevals, s.avg, s.std, s.min, s.max, s.diversity, s.p_mut, s.p_cross
        ));
    }
    out
}

pub fn write_generation_log(stats: &[GenerationStats], path: &Path) -> Result<()> {
    if stats.is_empty() {
        return Err(Error::arg("generation log is empty"));
    }
    write_text(path, &format_generation_log(stats))
}

/// Parses a generation log; `origin` only labels errors.
pub fn parse_generation_log(text: &str, origin: &Path) -> Result<Vec<GenerationStats>> {
    let err = |line: u64, msg: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        msg,
    };
    let header = text.lines().next().unwrap_or("");
    if header != LOG_HEADER {
        return Err(err(1, format!("expected header {LOG_HEADER:?}")));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 9 {
            return Err(err(line, format!("expected 9 fields, found {}", record.len())));
        }
        let int = |k: usize| {
            record[k]
                .parse::<usize>()
                .map_err(|_| err(line, format!("bad integer {:?}", &record[k])))
        };
        let real = |k: usize| {
            record[k]
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| err(line, format!("bad number {:?}", &record[k])))
        };
        rows.push(GenerationStats {
            gen: int(0)?,
            nevals: int(1)?,
            avg: real(2)?,
            std: real(3)?,
            min: real(4)?,
            max: real(5)?,
            diversity: real(6)?,
            p_mut: real(7)?,
            p_cross: real(8)?,
        });
    }
    Ok(rows)
}

/// `gen,avg,avg_minus_std,avg_plus_std,max` rows from a generation log.
pub fn plot_data(stats: &[GenerationStats]) -> String {
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for s in stats {
        let spread = s.std.abs();
        out.push_str(&format!(
            "{},{:.6},{:.6},{:.6},{:.6}\n",
            s.gen,
            s.avg,
            s.avg - spread,
            s.avg + spread,
            s.max
        ));
    }
    out
}

/// Reads the generation log at `log_path` and writes its plot data.
pub fn emit_plot_data(log_path: &Path, out_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(log_path).map_err(|e| Error::io(log_path, e))?;
    let stats = parse_generation_log(&text, log_path)?;
    write_text(out_path, &plot_data(&stats))
}

/// One row per slice: its start time and every control amplitude.
pub fn waveform_csv(schedule: &PulseSchedule, labels: &[&str]) -> Result<String> {
    if labels.len() != schedule.n_controls() {
        return Err(Error::arg(format!(
            "{} labels for {} controls",
            labels.len(),
            schedule.n_controls()
        )));
    }
    let mut out = String::from("time");
    for l in labels {
        out.push(',');
        out.push_str(l);
    }
    out.push('\n');
    let mut t = 0.0;
    for s in schedule.slices() {
        out.push_str(&format!("{t}"));
        for u in &s.amplitudes {
            out.push_str(&format!(",{u}"));
        }
        out.push('\n');
        t += s.duration;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenomeRecord {
    pub genes: Vec<Gene>,
    pub fitness: f64,
    pub seed: u64,
}

impl GenomeRecord {
    pub fn from_json(text: &str) -> Result<Self> {
        let record: Self = serde_json::from_str(text)?;
        if !record.fitness.is_finite() {
            return Err(Error::arg("fitness must be finite"));
        }
        Ok(record)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
