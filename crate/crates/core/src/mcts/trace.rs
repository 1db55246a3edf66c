use std::io::{self, Write};

use serde::Serialize;

/// One line of a search trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Iteration {
        iteration: u64,
        depth: u32,
        support: String,
        step_length: f64,
        passed: bool,
        distance: f64,
    },
    MasterBranch {
        iteration: u64,
        depth: u32,
        end_x: f64,
        dis_max: f64,
    },
    Decision {
        decision: u64,
        root_x: f64,
        n_samp: usize,
        support: String,
        step_length: f64,
        score: f64,
        goal: bool,
        l_max: f64,
        wall_time_s: f64,
    },
}

pub trait TraceSink {
    fn record(&mut self, event: TraceEvent);
}

/// Discards everything.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn record(&mut self, _: TraceEvent) {}
}

/// Keeps events in memory.
#[derive(Debug, Default, Clone)]
pub struct VecTrace(pub Vec<TraceEvent>);

impl TraceSink for VecTrace {
    fn record(&mut self, event: TraceEvent) {
        self.0.push(event);
    }
}

/// Writes one JSON object per line. The first write error is kept and
/// later events are dropped.
pub struct JsonLinesTrace<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> JsonLinesTrace<W> {
    pub fn new(out: W) -> Self {
        Self { out, error: None }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TraceSink for JsonLinesTrace<W> {
    fn record(&mut self, event: TraceEvent) {
        if self.error.is_some() {
            return;
        }
        let res = serde_json::to_writer(&mut self.out, &event)
            .map_err(io::Error::from)
            .and_then(|_| self.out.write_all(b"\n"));
        if let Err(e) = res {
            self.error = Some(e);
        }
    }
}
