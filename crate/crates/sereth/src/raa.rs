//! Runtime argument augmentation: rewrites the arguments of read-only view
//! calls with the pending-pool state before evaluation. State-changing
//! functions are never augmented, since their signed inputs could not be
//! modified without invalidating the transaction.

use thiserror::Error;

use crate::chain::{ContractState, Transaction};
use crate::hms;
use crate::primitives::{Fpv, Hash256, Word};

/// The contract's callable surface. Only `Mark` and `Get` are pure views.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ContractFunction {
    Mark,
    Get,
    Set,
    Buy,
}

impl ContractFunction {
    pub fn is_view(self) -> bool {
        matches!(self, ContractFunction::Mark | ContractFunction::Get)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RaaError {
    #[error("refused to augment arguments of state-changing function {0:?}")]
    RefusedAugmentation(ContractFunction),
}

/// Replaces a view call's FPV argument with the serialized pool's
/// head-of-line state. Slot types are preserved: the result is a well-formed
/// FPV with the same 32-byte slot layout.
pub fn augment_view_call(
    function: ContractFunction,
    args: &Fpv,
    pool: &[Transaction],
    committed: &ContractState,
) -> Result<Fpv, RaaError> {
    if !function.is_view() {
        return Err(RaaError::RefusedAugmentation(function));
    }
    let raa = hms::hash_mark_set(args, pool, committed);
    Ok(Fpv::new(raa.flag, raa.mark, raa.value))
}

/// `mark(raa)`: returns slot 1.
pub fn view_mark(augmented: &Fpv) -> Hash256 {
    augmented.previous_mark
}

/// `get(raa)`: returns slot 2.
pub fn view_get(augmented: &Fpv) -> Word {
    augmented.value
}
