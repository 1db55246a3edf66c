use serde::Serialize;

use crate::model::{SolutionSequence, LEG_COUNT};

/// What a leg does during one transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LegPhase {
    Support,
    Swing,
    /// Carried without a foothold.
    Fault,
}

impl LegPhase {
    pub fn name(self) -> &'static str {
        match self {
            LegPhase::Support => "support",
            LegPhase::Swing => "swing",
            LegPhase::Fault => "fault",
        }
    }
}

/// One transition of a gait diagram.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaitRow {
    /// 1-based transition index.
    pub step: usize,
    pub cog_x: f64,
    pub cog_y: f64,
    /// Support legs as a 6-character mask, leg 1 first.
    pub support_mask: String,
    pub fault_mask: String,
    pub step_length: f64,
    pub legs: [LegPhase; LEG_COUNT],
}

impl GaitRow {
    pub fn fault_legs(&self) -> usize {
        self.legs.iter().filter(|&&p| p == LegPhase::Fault).count()
    }
}

fn mask(f: impl Fn(usize) -> bool) -> String {
    (0..LEG_COUNT)
        .map(|l| if f(l) { '1' } else { '0' })
        .collect()
}

pub fn gait_rows(seq: &SolutionSequence) -> Vec<GaitRow> {
    seq.states
        .iter()
        .enumerate()
        .skip(1)
        .map(|(step, s)| {
            let support = s.support.unwrap_or_default();
            let legs = std::array::from_fn(|l| {
                if support.contains(l) {
                    LegPhase::Support
                } else if s.fault.contains(l) {
                    LegPhase::Fault
                } else {
                    LegPhase::Swing
                }
            });
            GaitRow {
                step,
                cog_x: s.cog.x,
                cog_y: s.cog.y,
                support_mask: mask(|l| support.contains(l)),
                fault_mask: mask(|l| s.fault.contains(l)),
                step_length: s.step_from_parent,
                legs,
            }
        })
        .collect()
}

/// Gait diagram as CSV: one row per transition, one column per leg.
pub fn gait_csv(seq: &SolutionSequence) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "step",
        "cog_x",
        "cog_y",
        "support_mask",
        "fault_mask",
        "step_length",
    ]
    .map(String::from)
    .to_vec();
    header.extend((1..=LEG_COUNT).map(|l| format!("leg{l}")));
    w.write_record(&header).expect("in-memory write");
    for r in gait_rows(seq) {
        let mut rec = vec![
            r.step.to_string(),
            format!("{:.6}", r.cog_x),
            format!("{:.6}", r.cog_y),
            r.support_mask.clone(),
            r.fault_mask.clone(),
            format!("{:.6}", r.step_length),
        ];
        rec.extend(r.legs.iter().map(|p| p.name().to_string()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
