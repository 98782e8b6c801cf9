//! Binary spike activity over discrete time, kept in two synchronized
//! representations: a dense unit-major grid and a `(step, unit)` event list
//! sorted by time then unit. The event list feeds the event-driven engine,
//! the dense grid feeds the step-wise one.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpikeEvent {
    pub step: u32,
    pub unit: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeRaster {
    num_units: usize,
    num_steps: usize,
    dense: Vec<bool>, // unit-major: [unit * num_steps + step]
    events: Vec<SpikeEvent>,
}

impl SpikeRaster {
    pub fn empty(num_units: usize, num_steps: usize) -> Self {
        SpikeRaster {
            num_units,
            num_steps,
            dense: vec![false; num_units * num_steps],
            events: Vec::new(),
        }
    }

    pub fn from_events(num_units: usize, num_steps: usize, mut events: Vec<SpikeEvent>) -> Result<Self> {
        events.sort_unstable();
        let mut dense = vec![false; num_units * num_steps];
        for pair in events.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::Data(format!(
                    "duplicate spike event at step {} unit {}",
                    pair[0].step, pair[0].unit
                )));
            }
        }
        for ev in &events {
            if (ev.step as usize) >= num_steps || (ev.unit as usize) >= num_units {
                return Err(Error::Data(format!(
                    "spike event ({}, {}) outside raster {}x{}",
                    ev.step, ev.unit, num_units, num_steps
                )));
            }
            dense[ev.unit as usize * num_steps + ev.step as usize] = true;
        }
        Ok(SpikeRaster {
            num_units,
            num_steps,
            dense,
            events,
        })
    }

    /// `dense` is unit-major: index `unit * num_steps + step`.
    pub fn from_dense(num_units: usize, num_steps: usize, dense: Vec<bool>) -> Result<Self> {
        if dense.len() != num_units * num_steps {
            return Err(Error::Dimension(format!(
                "dense raster length {} != {}x{}",
                dense.len(),
                num_units,
                num_steps
            )));
        }
        let mut events = Vec::new();
        for step in 0..num_steps {
            for unit in 0..num_units {
                if dense[unit * num_steps + step] {
                    events.push(SpikeEvent {
                        step: step as u32,
                        unit: unit as u32,
                    });
                }
            }
        }
        Ok(SpikeRaster {
            num_units,
            num_steps,
            dense,
            events,
        })
    }

    pub fn num_units(&self) -> usize {
        self.num_units
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn is_active(&self, unit: usize, step: usize) -> bool {
        self.dense[unit * self.num_steps + step]
    }

    pub fn events(&self) -> &[SpikeEvent] {
        &self.events
    }

    pub fn spike_count(&self) -> usize {
        self.events.len()
    }

    /// Writes the 0/1 input column for step `t` into `buf`.
    pub fn fill_step(&self, t: usize, buf: &mut [f64]) {
        debug_assert_eq!(buf.len(), self.num_units);
        for (unit, b) in buf.iter_mut().enumerate() {
            *b = if self.dense[unit * self.num_steps + t] {
                1.0
            } else {
                0.0
            };
        }
    }

    /// Units spiking at step `t`, ascending.
    pub fn units_at(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        let lo = self
            .events
            .partition_point(|e| (e.step as usize) < t);
        self.events[lo..]
            .iter()
            .take_while(move |e| e.step as usize == t)
            .map(|e| e.unit as usize)
    }

    /// Spike count per unit, the quantity the classifier reads out.
    pub fn counts_per_unit(&self) -> Vec<f64> {
        let mut counts = vec![0.0; self.num_units];
        for ev in &self.events {
            counts[ev.unit as usize] += 1.0;
        }
        counts
    }

    /// Text format: `SPIKERASTER v1` / `units N` / `steps T` / one `t u` line
    /// per event, sorted by time then unit.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "SPIKERASTER v1")?;
        writeln!(w, "units {}", self.num_units)?;
        writeln!(w, "steps {}", self.num_steps)?;
        for ev in &self.events {
            writeln!(w, "{} {}", ev.step, ev.unit)?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let mut expect = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(line))) => Ok((n + 1, line)),
                Some((n, Err(e))) => Err(Error::Parse {
                    line: n + 1,
                    message: e.to_string(),
                }),
                None => Err(Error::Parse {
                    line: 0,
                    message: format!("missing {what}"),
                }),
            }
        };
        let (n, magic) = expect("header")?;
        if magic.trim() != "SPIKERASTER v1" {
            return Err(Error::Parse {
                line: n,
                message: format!("bad raster header {magic:?}"),
            });
        }
        let parse_field = |line: usize, text: &str, key: &str| -> Result<usize> {
            let rest = text.trim().strip_prefix(key).ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `{key} <n>`, got {text:?}"),
            })?;
            rest.trim().parse().map_err(|e| Error::Parse {
                line,
                message: format!("bad {key}: {e}"),
            })
        };
        let (n, units_line) = expect("units")?;
        let num_units = parse_field(n, &units_line, "units")?;
        let (n, steps_line) = expect("steps")?;
        let num_steps = parse_field(n, &steps_line, "steps")?;
        let mut events = Vec::new();
        for (n, line) in lines {
            let line = line.map_err(|e| Error::Parse {
                line: n + 1,
                message: e.to_string(),
            })?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let mut it = t.split_whitespace();
            let step: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: n + 1,
                    message: format!("bad event line {t:?}"),
                })?;
            let unit: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: n + 1,
                    message: format!("bad event line {t:?}"),
                })?;
            events.push(SpikeEvent { step, unit });
        }
        SpikeRaster::from_events(num_units, num_steps, events)
    }
}
