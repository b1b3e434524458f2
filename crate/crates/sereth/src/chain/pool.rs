use std::collections::{HashMap, HashSet};

use thiserror::Error;

use super::{Transaction, TxnId};
use crate::primitives::Word;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubmitError {
    #[error("nonce {got} out of order for sender (expected {expected})")]
    NonceOutOfOrder { expected: u64, got: u64 },
}

/// The shared pool of pending, unmined transactions. Ingestion order is the
/// order in which `submit` was called; per-sender nonces must arrive gapless.
#[derive(Clone, Debug, Default)]
pub struct TxPool {
    pending: Vec<Transaction>,
    next_nonce: HashMap<Word, u64>,
}

impl TxPool {
    pub fn new() -> Self {
        TxPool::default()
    }

    /// Appends a transaction, enforcing the per-sender nonce sequence. The
    /// expected nonce covers both pending and already-mined transactions.
    pub fn submit(&mut self, txn: Transaction) -> Result<(), SubmitError> {
        let expected = *self.next_nonce.get(&txn.sender()).unwrap_or(&0);
        if txn.nonce() != expected {
            return Err(SubmitError::NonceOutOfOrder {
                expected,
                got: txn.nonce(),
            });
        }
        self.next_nonce.insert(txn.sender(), expected + 1);
        self.pending.push(txn);
        Ok(())
    }

    /// Immutable view of the pending transactions in ingestion order.
    pub fn snapshot(&self) -> &[Transaction] {
        &self.pending
    }

    pub fn len(&self) -> usize {
        self.pending.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pending.is_empty()
    }

    /// Evicts the given transactions (called after block inclusion).
    pub fn remove(&mut self, ids: &HashSet<TxnId>) {
        self.pending.retain(|t| !ids.contains(&t.id));
    }
}
