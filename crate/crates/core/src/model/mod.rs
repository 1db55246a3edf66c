//! Robot geometry, hexapod state, the support-state table and the kinematic
//! quantities (kinematic margin, maximum advance, maximum step length).

mod kinematics;
mod robot;
mod state;
mod validate;

use std::fmt;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometryError;

pub use kinematics::{
    kinematic_margin, leg_margins, max_advance, max_advance_for, max_step_length,
    max_step_length_from, stance_margin, support_margin, support_polygon,
};
pub(crate) use robot::round_um;
pub use robot::{LinkMasses, RobotModel};
pub use state::{HexapodState, SolutionSequence, StepMetrics};
pub use validate::{validate_sequence, ValidationReport, Violation, ViolationKind};

pub const LEG_COUNT: usize = 6;
const ALL_LEGS: u8 = 0b11_1111;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid robot model: {0}")]
    InvalidModel(String),
    #[error("infeasible support state {support}: {reason}")]
    InfeasibleSupport {
        support: SupportState,
        reason: String,
    },
    #[error("leg {} has no foothold", .0 + 1)]
    FloatingLeg(usize),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

macro_rules! leg_mask {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
        pub struct $name(u8);

        impl $name {
            pub const NONE: $name = $name(0);
            pub const ALL: $name = $name(ALL_LEGS);

            pub fn from_bits(bits: u8) -> Option<Self> {
                (bits <= ALL_LEGS).then_some(Self(bits))
            }

            pub fn from_legs(legs: &[usize]) -> Self {
                Self(legs.iter().fold(0u8, |m, &l| {
                    assert!(l < LEG_COUNT, "leg index {l} out of range");
                    m | (1 << l)
                }))
            }

            pub fn bits(self) -> u8 {
                self.0
            }

            pub fn contains(self, leg: usize) -> bool {
                self.0 & (1 << leg) != 0
            }

            pub fn count(self) -> u32 {
                self.0.count_ones()
            }

            pub fn is_empty(self) -> bool {
                self.0 == 0
            }

            pub fn legs(self) -> impl Iterator<Item = usize> {
                (0..LEG_COUNT).filter(move |&l| self.0 & (1 << l) != 0)
            }

            pub fn complement(self) -> Self {
                Self(!self.0 & ALL_LEGS)
            }

            pub fn intersects(self, other: u8) -> bool {
                self.0 & other != 0
            }

            pub fn to_array(self) -> [bool; LEG_COUNT] {
                std::array::from_fn(|l| self.contains(l))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self)
            }
        }

        /// 1-based leg list, e.g. `{1,3,5}`.
        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let legs: Vec<String> = self.legs().map(|l| (l + 1).to_string()).collect();
                write!(f, "{{{}}}", legs.join(","))
            }
        }

        impl Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                self.to_array().serialize(s)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let arr = <[bool; LEG_COUNT]>::deserialize(d)?;
                Ok(Self(
                    arr.iter()
                        .enumerate()
                        .fold(0u8, |m, (l, &b)| if b { m | (1 << l) } else { m }),
                ))
            }
        }
    };
}

leg_mask!(
    /// Which legs support the body during one transition (`true` = supporting).
    SupportState
);

leg_mask!(
    /// Which legs are faulted (no foothold, carried in the air).
    FaultState
);

impl SupportState {
    /// Statically admissible: at least three supporting legs.
    pub fn is_admissible(self) -> bool {
        self.count() >= 3
    }

    pub fn swing(self) -> impl Iterator<Item = usize> {
        self.complement().legs()
    }

    /// Position of this state in [`support_state_table`].
    pub fn table_index(self) -> Option<usize> {
        support_state_table().iter().position(|&s| s == self)
    }
}

static SUPPORT_TABLE: LazyLock<Vec<SupportState>> = LazyLock::new(|| {
    // Rows are read with leg 1 as the most significant digit and listed in
    // ascending order, so row 1 is legs {4,5,6} and row 42 is all six.
    (0u8..64)
        .filter(|row| row.count_ones() >= 3)
        .map(|row| {
            SupportState((0..LEG_COUNT).fold(0u8, |m, leg| {
                if row & (1 << (LEG_COUNT - 1 - leg)) != 0 {
                    m | (1 << leg)
                } else {
                    m
                }
            }))
        })
        .collect()
});

/// The 42 support states with at least three supporting legs, in table order.
pub fn support_state_table() -> &'static [SupportState] {
    &SUPPORT_TABLE
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn table_has_42_entries() {
        assert_eq!(support_state_table().len(), 42);
    }

    #[test]
    fn table_matches_brute_force_enumeration() {
        let brute: BTreeSet<u8> = (0u8..64).filter(|m| m.count_ones() >= 3).collect();
        let table: BTreeSet<u8> = support_state_table().iter().map(|s| s.bits()).collect();
        assert_eq!(brute, table);
    }

    #[test]
    fn table_order_follows_rows() {
        let t = support_state_table();
        assert_eq!(t[0], SupportState::from_legs(&[3, 4, 5]));
        assert_eq!(t[1], SupportState::from_legs(&[2, 4, 5]));
        assert_eq!(t[41], SupportState::ALL);
        assert_eq!(SupportState::ALL.table_index(), Some(41));
    }

    #[test]
    fn mask_serde_is_bool_array() {
        let s = SupportState::from_legs(&[0, 2, 4]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[true,false,true,false,true,false]");
        let back: SupportState = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(s.to_string(), "{1,3,5}");
    }
}
