use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pulse parameters of one gate: total duration and number of
/// piecewise-constant slices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Gene {
    pub evo_time: f64,
    pub num_tslots: u32,
}

impl Gene {
    pub fn new(evo_time: f64, num_tslots: u32) -> Self {
        Self {
            evo_time,
            num_tslots,
        }
    }

    pub fn slice_duration(&self) -> f64 {
        self.evo_time / self.num_tslots as f64
    }
}

/// One constant-amplitude interval.
#[derive(Clone, Debug, PartialEq)]
pub struct Slice {
    pub gate_index: usize,
    pub duration: f64,
    pub amplitudes: Vec<f64>,
}

/// Piecewise-constant control amplitudes for a whole circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseSchedule {
    n_controls: usize,
    slices: Vec<Slice>,
}

impl PulseSchedule {
    pub fn new(n_controls: usize) -> Self {
        Self {
            n_controls,
            slices: Vec::new(),
        }
    }

    pub fn n_controls(&self) -> usize {
        self.n_controls
    }

    pub fn slices(&self) -> &[Slice] {
        &self.slices
    }

    pub fn is_empty(&self) -> bool {
        self.slices.is_empty()
    }

    pub fn len(&self) -> usize {
        self.slices.len()
    }

    pub fn total_time(&self) -> f64 {
        self.slices.iter().map(|s| s.duration).sum()
    }

    pub fn push(&mut self, slice: Slice) -> Result<()> {
        if slice.amplitudes.len() != self.n_controls {
            return Err(Error::arg(format!(
                "slice has {} amplitudes, schedule has {} controls",
                slice.amplitudes.len(),
                self.n_controls
            )));
        }
        if !(slice.duration > 0.0) || !slice.duration.is_finite() {
            return Err(Error::arg("slice duration must be positive and finite"));
        }
        if slice.amplitudes.iter().any(|u| !u.is_finite()) {
            return Err(Error::arg("slice amplitudes must be finite"));
        }
        self.slices.push(slice);
        Ok(())
    }

    /// Appends `other`; slices keep their own gate indices.
    pub fn append(&mut self, other: &PulseSchedule) -> Result<()> {
        if other.n_controls != self.n_controls {
            return Err(Error::arg("cannot concatenate schedules with different control sets"));
        }
        self.slices.extend(other.slices.iter().cloned());
        Ok(())
    }

    pub fn max_amplitude(&self) -> f64 {
        self.slices
            .iter()
            .flat_map(|s| s.amplitudes.iter())
            .fold(0.0, |m, u| m.max(u.abs()))
    }

    /// CSV with header `gate_index,slice_index,duration,u_0,...,u_{m-1}`;
    /// `slice_index` counts within each gate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gate_index,slice_index,duration");
        for j in 0..self.n_controls {
            out.push_str(&format!(",u_{j}"));
        }
        out.push('\n');
        let mut slice_index = 0usize;
        let mut prev_gate = None;
        for s in &self.slices {
            if prev_gate != Some(s.gate_index) {
                slice_index = 0;
                prev_gate = Some(s.gate_index);
            }
            out.push_str(&format!("{},{},{}", s.gate_index, slice_index, s.duration));
            for u in &s.amplitudes {
                out.push_str(&format!(",{u}"));
            }
            out.push('\n');
            slice_index += 1;
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_csv().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    /// Parses the format written by [`PulseSchedule::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let origin = Path::new("<schedule>");
        let parse_err = |line: u64, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .clone();
        if headers.len() < 3
            || &headers[0] != "gate_index"
            || &headers[1] != "slice_index"
            || &headers[2] != "duration"
        {
            return Err(parse_err(1, "unexpected schedule header".into()));
        }
        let n_controls = headers.len() - 3;
        for (j, h) in headers.iter().skip(3).enumerate() {
            if h != format!("u_{j}") {
                return Err(parse_err(1, format!("expected column u_{j}, found {h}")));
            }
        }
        let mut schedule = PulseSchedule::new(n_controls);
        for record in reader.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let gate_index: usize = record[0]
                .parse()
                .map_err(|_| parse_err(line, format!("bad gate_index {:?}", &record[0])))?;
            record[1]
                .parse::<usize>()
                .map_err(|_| parse_err(line, format!("bad slice_index {:?}", &record[1])))?;
            let duration: f64 = record[2]
                .parse()
                .map_err(|_| parse_err(line, format!("bad duration {:?}", &record[2])))?;
            let amplitudes = record
                .iter()
                .skip(3)
                .map(|f| f.parse::<f64>().map_err(|_| parse_err(line, format!("bad amplitude {f:?}"))))
                .collect::<Result<Vec<_>>>()?;
            schedule
                .push(Slice {
                    gate_index,
                    duration,
                    amplitudes,
                })
                .map_err(|e| parse_err(line, e.to_string()))?;
        }
        Ok(schedule)
    }
}
