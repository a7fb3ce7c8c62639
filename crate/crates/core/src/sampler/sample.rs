use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ModeOccupation;

/// Particle/adversary model that generated a sample or distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Model {
    #[serde(rename = "ind")]
    Indistinguishable,
    #[serde(rename = "dis")]
    Distinguishable,
    #[serde(rename = "mf")]
    MeanField,
    #[serde(rename = "unif")]
    Uniform,
}

impl Model {
    pub fn tag(&self) -> &'static str {
        match self {
            Model::Indistinguishable => "ind",
            Model::Distinguishable => "dis",
            Model::MeanField => "mf",
            Model::Uniform => "unif",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ind" | "indistinguishable" => Ok(Model::Indistinguishable),
            "dis" | "distinguishable" => Ok(Model::Distinguishable),
            "mf" | "mean-field" | "meanfield" => Ok(Model::MeanField),
            "unif" | "uniform" => Ok(Model::Uniform),
            other => Err(Error::Parse(format!("unknown model '{other}'"))),
        }
    }
}

/// Ordered multiset of observed collision-free output states.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSample {
    n: usize,
    m: usize,
    input: ModeOccupation,
    model: Model,
    seed: Option<u64>,
    label: Option<String>,
    events: Vec<ModeOccupation>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    #[serde(rename = "N")]
    n: usize,
    m: usize,
    input: Vec<usize>,
    model: Model,
    seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Line {
    modes: Vec<usize>,
}

impl EventSample {
    pub fn new(
        input: ModeOccupation,
        model: Model,
        seed: Option<u64>,
        events: Vec<ModeOccupation>,
    ) -> Result<Self> {
        let n = input.n_photons();
        let m = input.n_modes();
        if !input.is_collision_free() {
            return Err(Error::UnsupportedState(format!("collision input {input}")));
        }
        for e in &events {
            if e.n_modes() != m || e.n_photons() != n {
                return Err(Error::InvalidDimension(format!(
                    "event {e} does not match (N, m) = ({n}, {m})"
                )));
            }
            if !e.is_collision_free() {
                return Err(Error::UnsupportedState(format!("collision event {e}")));
            }
        }
        Ok(Self {
            n,
            m,
            input,
            model,
            seed,
            label: None,
            events,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn input(&self) -> &ModeOccupation {
        &self.input
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn events(&self) -> &[ModeOccupation] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Same provenance, different events (used by reshuffling).
    pub(crate) fn with_events(&self, events: Vec<ModeOccupation>, seed: Option<u64>) -> Self {
        Self {
            events,
            seed,
            ..self.clone()
        }
    }

    /// JSON-lines encoding: one header line, then one `{"modes": [...]}`
    /// line per event, modes 1-based and ascending.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let header = Header {
            n: self.n,
            m: self.m,
            input: self.input.modes_one_based(),
            model: self.model,
            seed: self.seed,
            label: self.label.clone(),
        };
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n")?;
        for e in &self.events {
            serde_json::to_writer(
                &mut w,
                &Line {
                    modes: e.modes_one_based(),
                },
            )?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("in-memory write");
        String::from_utf8(buf).expect("utf8 json")
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header_line = loop {
            match lines.next() {
                Some(l) => {
                    let l = l?;
                    if !l.trim().is_empty() {
                        break l;
                    }
                }
                None => return Err(Error::Parse("empty sample file".into())),
            }
        };
        let header: Header = serde_json::from_str(&header_line)?;
        let to_zero = |v: &[usize]| -> Result<Vec<usize>> {
            v.iter()
                .map(|&i| {
                    i.checked_sub(1)
                        .ok_or_else(|| Error::Parse("mode indices are 1-based".into()))
                })
                .collect()
        };
        let input = ModeOccupation::from_modes(&to_zero(&header.input)?, header.m)?;
        if input.n_photons() != header.n {
            return Err(Error::Parse(format!(
                "header input has {} photons but N = {}",
                input.n_photons(),
                header.n
            )));
        }
        let mut events = Vec::new();
        for l in lines {
            let l = l?;
            if l.trim().is_empty() {
                continue;
            }
            let line: Line = serde_json::from_str(&l)?;
            events.push(ModeOccupation::from_modes(
                &to_zero(&line.modes)?,
                header.m,
            )?);
        }
        let mut s = Self::new(input, header.model, header.seed, events)?;
        s.label = header.label;
        Ok(s)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        Self::read_jsonl(std::io::BufReader::new(f))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_jsonl(&mut w)?;
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(modes: &[usize]) -> ModeOccupation {
        ModeOccupation::from_modes(modes, 6).unwrap()
    }

    #[test]
    fn jsonl_round_trip() {
        let s = EventSample::new(
            st(&[0, 1]),
            Model::Distinguishable,
            Some(4),
            vec![st(&[2, 5]), st(&[0, 3])],
        )
        .unwrap()
        .with_label("input-a");
        let text = s.to_jsonl();
        assert!(text.starts_with("{\"N\":2,\"m\":6,\"input\":[1,2],\"model\":\"dis\",\"seed\":4"));
        assert!(text.contains("{\"modes\":[3,6]}"));
        let back = EventSample::read_jsonl(text.as_bytes()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn rejects_inconsistent_events() {
        let bad = ModeOccupation::from_modes(&[1, 1], 6).unwrap();
        assert!(EventSample::new(st(&[0, 1]), Model::Indistinguishable, None, vec![bad]).is_err());
        assert!(
            EventSample::new(st(&[0, 1]), Model::Indistinguishable, None, vec![st(&[0])]).is_err()
        );
    }

    #[test]
    fn model_parsing() {
        assert_eq!("mf".parse::<Model>().unwrap(), Model::MeanField);
        assert_eq!("Uniform".parse::<Model>().unwrap(), Model::Uniform);
        assert!("quantum".parse::<Model>().is_err());
    }
}
