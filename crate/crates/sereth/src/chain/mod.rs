//! Blockchain substrate: transactions, contract execution, blocks, the
//! pending pool and miner policies.

mod miner;
mod pool;

pub use miner::{mine_block, MinerPolicy};
pub use pool::{SubmitError, TxPool};

use crate::primitives::{compute_mark, genesis_mark, Fpv, Hash256, Word};

/// Identity of a transaction: (sender, nonce) is unique in the pool.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct TxnId {
    pub sender: Word,
    pub nonce: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TxKind {
    Set,
    Buy,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TxStatus {
    Succeeded,
    Failed,
}

/// A pending or mined transaction. The FPV payload travels as raw bytes in
/// `input`, exactly as it would in a real transaction's input field.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transaction {
    pub id: TxnId,
    pub kind: TxKind,
    pub input: Vec<u8>,
    /// Tick at which the transaction entered the pool.
    pub submit_tick: u64,
}

impl Transaction {
    pub fn new(sender: Word, nonce: u64, kind: TxKind, fpv: Fpv, submit_tick: u64) -> Self {
        Transaction {
            id: TxnId { sender, nonce },
            kind,
            input: fpv.encode().to_vec(),
            submit_tick,
        }
    }

    pub fn sender(&self) -> Word {
        self.id.sender
    }

    pub fn nonce(&self) -> u64 {
        self.id.nonce
    }

    pub fn fpv(&self) -> Result<Fpv, crate::primitives::CodecError> {
        Fpv::decode(&self.input)
    }
}

/// The single shared storage variable P (address, mark, value) plus the
/// contract's success counters.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ContractState {
    /// p[0]: address of the last successful writer.
    pub owner_address: Word,
    /// p[1]: the current mark.
    pub mark: Hash256,
    /// p[2]: the current value.
    pub value: Word,
    pub n_set: u64,
    pub n_buy: u64,
}

impl ContractState {
    /// State at deployment: mark is keccak256 of the zero word.
    pub fn genesis(initial_value: Word) -> Self {
        ContractState {
            owner_address: [0u8; 32],
            mark: genesis_mark(),
            value: initial_value,
            n_set: 0,
            n_buy: 0,
        }
    }
}

/// `set`: if the FPV's previous mark matches the stored mark, advance the
/// mark chain and store the new value.
pub fn execute_set(state: &ContractState, fpv: &Fpv, sender: Word) -> (ContractState, TxStatus) {
    if fpv.previous_mark == state.mark {
        let mut next = *state;
        next.n_set += 1;
        next.owner_address = sender;
        next.mark = compute_mark(&fpv.previous_mark, &fpv.value);
        next.value = fpv.value;
        (next, TxStatus::Succeeded)
    } else {
        (*state, TxStatus::Failed)
    }
}

/// `buy`: succeeds only when both mark and price match the stored state;
/// mark and value are left untouched.
pub fn execute_buy(state: &ContractState, fpv: &Fpv, sender: Word) -> (ContractState, TxStatus) {
    if fpv.previous_mark == state.mark && fpv.value == state.value {
        let mut next = *state;
        next.n_buy += 1;
        next.owner_address = sender;
        (next, TxStatus::Succeeded)
    } else {
        (*state, TxStatus::Failed)
    }
}

/// Executes one transaction. A payload that does not decode as an FPV fails
/// without touching state.
pub fn execute_transaction(state: &ContractState, txn: &Transaction) -> (ContractState, TxStatus) {
    match txn.fpv() {
        Ok(fpv) => match txn.kind {
            TxKind::Set => execute_set(state, &fpv, txn.sender()),
            TxKind::Buy => execute_buy(state, &fpv, txn.sender()),
        },
        Err(_) => (*state, TxStatus::Failed),
    }
}

/// A mined block. Failed transactions stay in the block but change no state.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Block {
    pub height: u64,
    pub txns: Vec<Transaction>,
    pub pre_state: ContractState,
    pub post_state: ContractState,
    pub statuses: Vec<TxStatus>,
    /// Tick at which the block was mined. Clients see its post state only
    /// after the publication latency has elapsed.
    pub mined_tick: u64,
}

/// Replays the block's transactions from its pre state and checks that the
/// recorded post state and per-transaction statuses are reproduced exactly.
pub fn validate_block(block: &Block) -> bool {
    if block.txns.len() != block.statuses.len() {
        return false;
    }
    let mut state = block.pre_state;
    for (txn, expected) in block.txns.iter().zip(&block.statuses) {
        let (next, status) = execute_transaction(&state, txn);
        if status != *expected {
            return false;
        }
        state = next;
    }
    state == block.post_state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primitives::{word_from_u64, SUCCESS_FLAG};

    fn addr(n: u64) -> Word {
        word_from_u64(n)
    }

    #[test]
    fn set_advances_mark_chain() {
        let s0 = ContractState::genesis(word_from_u64(5));
        let fpv = Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(7));
        let (s1, st) = execute_set(&s0, &fpv, addr(1));
        assert_eq!(st, TxStatus::Succeeded);
        assert_eq!(s1.mark, compute_mark(&s0.mark, &word_from_u64(7)));
        assert_eq!(s1.value, word_from_u64(7));
        assert_eq!(s1.owner_address, addr(1));
        assert_eq!(s1.n_set, 1);
    }

    #[test]
    fn set_with_stale_mark_fails() {
        let s0 = ContractState::genesis(word_from_u64(5));
        let fpv = Fpv::new(SUCCESS_FLAG, crate::primitives::keccak256(b"x"), word_from_u64(7));
        let (s1, st) = execute_set(&s0, &fpv, addr(1));
        assert_eq!(st, TxStatus::Failed);
        assert_eq!(s1, s0);
    }

    // Two sets carrying the same previous mark in one block: the first wins,
    // the second sees an advanced mark and is rolled back.
    #[test]
    fn duplicate_previous_mark_only_first_set_succeeds() {
        let s0 = ContractState::genesis(word_from_u64(5));
        let fpv_a = Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(7));
        let fpv_b = Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(9));
        let (s1, st_a) = execute_set(&s0, &fpv_a, addr(1));
        let (s2, st_b) = execute_set(&s1, &fpv_b, addr(1));
        assert_eq!(st_a, TxStatus::Succeeded);
        assert_eq!(st_b, TxStatus::Failed);
        assert_eq!(s2, s1);
    }

    #[test]
    fn buy_requires_mark_and_value() {
        let s0 = ContractState::genesis(word_from_u64(5));
        let ok = Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(5));
        let (s1, st) = execute_buy(&s0, &ok, addr(2));
        assert_eq!(st, TxStatus::Succeeded);
        assert_eq!(s1.mark, s0.mark);
        assert_eq!(s1.value, s0.value);
        assert_eq!(s1.n_buy, 1);
        assert_eq!(s1.owner_address, addr(2));

        let wrong_price = Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(6));
        let (s2, st) = execute_buy(&s0, &wrong_price, addr(2));
        assert_eq!(st, TxStatus::Failed);
        assert_eq!(s2, s0);
    }

    // set(5), set(7), set(5): a buy pinned to the first 5-interval fails in
    // the third even though the price matches, because the marks differ.
    #[test]
    fn buy_pinned_to_earlier_interval_fails_despite_equal_price() {
        let s0 = ContractState::genesis(word_from_u64(1));
        let five = word_from_u64(5);
        let seven = word_from_u64(7);
        let (s1, _) = execute_set(&s0, &Fpv::new(SUCCESS_FLAG, s0.mark, five), addr(1));
        let buy = Fpv::new(SUCCESS_FLAG, s1.mark, five);
        let (s2, _) = execute_set(&s1, &Fpv::new(SUCCESS_FLAG, s1.mark, seven), addr(1));
        let (s3, _) = execute_set(&s2, &Fpv::new(SUCCESS_FLAG, s2.mark, five), addr(1));
        assert_ne!(s3.mark, s1.mark);
        assert_eq!(s3.value, five);
        let (_, st) = execute_buy(&s3, &buy, addr(2));
        assert_eq!(st, TxStatus::Failed);
        // the same buy executed in the first interval would have succeeded
        let (_, st1) = execute_buy(&s1, &buy, addr(2));
        assert_eq!(st1, TxStatus::Succeeded);
    }

    #[test]
    fn validate_block_detects_tampering() {
        let s0 = ContractState::genesis(word_from_u64(5));
        let t1 = Transaction::new(
            addr(1),
            0,
            TxKind::Set,
            Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(7)),
            0,
        );
        let t2 = Transaction::new(
            addr(2),
            0,
            TxKind::Buy,
            Fpv::new(SUCCESS_FLAG, s0.mark, word_from_u64(5)),
            1,
        );
        let mut state = s0;
        let mut statuses = Vec::new();
        for t in [&t1, &t2] {
            let (next, st) = execute_transaction(&state, t);
            state = next;
            statuses.push(st);
        }
        let block = Block {
            height: 1,
            txns: vec![t1, t2],
            pre_state: s0,
            post_state: state,
            statuses,
            mined_tick: 15,
        };
        assert!(validate_block(&block));

        let mut tampered = block.clone();
        tampered.post_state.value = word_from_u64(99);
        assert!(!validate_block(&tampered));

        let mut flipped = block.clone();
        flipped.statuses[1] = TxStatus::Succeeded;
        assert!(!validate_block(&flipped));
    }
}
