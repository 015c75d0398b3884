//! The classical controller. Corrections never touch the quantum state; they
//! are folded into the [`LogicalFrame`]. The only physical action the
//! controller takes is resetting the ancilla.

use serde::{Deserialize, Serialize};

use crate::code::{decode_syndrome, Correction, LogicalFrame};
use crate::measurement::{classify_outcome, AncillaState, AssignmentConvention};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameUpdate {
    pub z_correction: Correction,
    /// Set when the round contained an odd number of `+1` outcomes: the
    /// measurement sequence then imprints a logical bit flip.
    pub logical_flip: bool,
    /// The last reported ancilla state was `1` and the ancilla must be flipped back.
    pub ancilla_reset: bool,
}

impl FrameUpdate {
    /// Same update with the `Z` correction dropped (detection without feedback).
    pub fn without_correction(self) -> Self {
        Self { z_correction: Correction::None, ..self }
    }
}

/// Decodes one round of reports. The parity rule is per round; frames from
/// consecutive rounds compose through [`apply_update`].
pub fn process_round(reported: [AncillaState; 2], conv: AssignmentConvention) -> FrameUpdate {
    let syndrome = classify_outcome(reported, conv);
    FrameUpdate {
        z_correction: decode_syndrome(syndrome),
        logical_flip: syndrome.plus_count() % 2 == 1,
        ancilla_reset: reported[1].bit(),
    }
}

pub fn apply_update(frame: LogicalFrame, upd: FrameUpdate) -> LogicalFrame {
    let mut delta = LogicalFrame { logical_flip: upd.logical_flip, ..LogicalFrame::default() };
    if let Correction::Qubit(k) = upd.z_correction {
        delta.z_frame[k] = true;
    }
    frame.compose(delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use AncillaState::{One, Zero};

    #[test]
    fn process_round_examples() {
        let conv = AssignmentConvention::OPTIMAL;
        let u = process_round([One, One], conv);
        assert_eq!(u, FrameUpdate { z_correction: Correction::None, logical_flip: false, ancilla_reset: true });
        let u = process_round([Zero, One], conv);
        assert_eq!(u.z_correction, Correction::Qubit(0));
        assert!(u.logical_flip);
        let u = process_round([Zero, Zero], conv);
        assert_eq!(u, FrameUpdate { z_correction: Correction::Qubit(1), logical_flip: false, ancilla_reset: false });
    }

    fn all_updates() -> Vec<FrameUpdate> {
        let mut out = Vec::new();
        for z in [Correction::None, Correction::Qubit(0), Correction::Qubit(1), Correction::Qubit(2)] {
            for flip in [false, true] {
                out.push(FrameUpdate { z_correction: z, logical_flip: flip, ancilla_reset: false });
            }
        }
        out
    }

    #[test]
    fn updates_are_involutions_and_commute() {
        let start = LogicalFrame { z_frame: [true, false, true], logical_flip: true };
        for a in all_updates() {
            assert_eq!(apply_update(apply_update(start, a), a), start);
            for b in all_updates() {
                let ab = apply_update(apply_update(start, a), b);
                let ba = apply_update(apply_update(start, b), a);
                assert_eq!(ab, ba);
            }
        }
        let f = apply_update(
            LogicalFrame::default(),
            FrameUpdate { z_correction: Correction::Qubit(0), logical_flip: true, ancilla_reset: false },
        );
        assert_eq!(f, LogicalFrame { z_frame: [true, false, false], logical_flip: true });
    }
}
