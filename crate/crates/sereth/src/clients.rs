//! Transaction-generating actors: an owner who sets prices and buyers that
//! read either the committed state or the pending-pool view.

use crate::chain::{ContractState, Transaction, TxKind};
use crate::hms::RaaResult;
use crate::primitives::{Word, HEAD_FLAG, SUCCESS_FLAG};
use crate::primitives::Fpv;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Strategy {
    BaselineBuyer,
    HmsBuyer,
    OwnerSetter,
}

/// What a set transaction chains from: the committed state directly, or the
/// pool view returned by the RAA layer.
#[derive(Clone, Copy, Debug)]
pub enum SetBasis<'a> {
    Committed(&'a ContractState),
    View(&'a RaaResult),
}

#[derive(Clone, Debug)]
pub struct Client {
    pub address: Word,
    pub strategy: Strategy,
    next_nonce: u64,
}

impl Client {
    pub fn new(address: Word, strategy: Strategy) -> Self {
        Client {
            address,
            strategy,
            next_nonce: 0,
        }
    }

    /// For actors sharing an address with another client: continue that
    /// address's nonce sequence instead of starting at 0.
    pub fn starting_at(address: Word, strategy: Strategy, next_nonce: u64) -> Self {
        Client {
            address,
            strategy,
            next_nonce,
        }
    }

    pub fn next_nonce(&self) -> u64 {
        self.next_nonce
    }

    fn take_nonce(&mut self) -> u64 {
        let n = self.next_nonce;
        self.next_nonce += 1;
        n
    }

    /// A buy pinned to the committed (mark, value) pair.
    pub fn make_buy_baseline(&mut self, committed: &ContractState, tick: u64) -> Transaction {
        assert_eq!(self.strategy, Strategy::BaselineBuyer);
        let nonce = self.take_nonce();
        Transaction::new(
            self.address,
            nonce,
            TxKind::Buy,
            Fpv::new(SUCCESS_FLAG, committed.mark, committed.value),
            tick,
        )
    }

    /// A buy pinned to the read-uncommitted view at submission time.
    pub fn make_buy_hms(&mut self, raa_view: &RaaResult, tick: u64) -> Transaction {
        assert_eq!(self.strategy, Strategy::HmsBuyer);
        let nonce = self.take_nonce();
        Transaction::new(
            self.address,
            nonce,
            TxKind::Buy,
            Fpv::new(SUCCESS_FLAG, raa_view.mark, raa_view.value),
            tick,
        )
    }

    /// A set chaining the given basis. The first set of a block interval is
    /// flagged as a head candidate; a set chaining a pending tail is flagged
    /// as its successor.
    pub fn make_set(&mut self, basis: SetBasis<'_>, new_value: Word, tick: u64) -> Transaction {
        assert_eq!(self.strategy, Strategy::OwnerSetter);
        let (flag, previous_mark) = match basis {
            SetBasis::Committed(state) => (HEAD_FLAG, state.mark),
            SetBasis::View(raa) => {
                let flag = if raa.flag == HEAD_FLAG {
                    HEAD_FLAG
                } else {
                    SUCCESS_FLAG
                };
                (flag, raa.mark)
            }
        };
        let nonce = self.take_nonce();
        Transaction::new(
            self.address,
            nonce,
            TxKind::Set,
            Fpv::new(flag, previous_mark, new_value),
            tick,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{execute_set, execute_transaction, TxStatus};
    use crate::primitives::word_from_u64;

    #[test]
    fn baseline_buy_copies_committed_view_and_increments_nonce() {
        let committed = ContractState::genesis(word_from_u64(5));
        let mut buyer = Client::new(word_from_u64(2), Strategy::BaselineBuyer);
        let t0 = buyer.make_buy_baseline(&committed, 0);
        let t1 = buyer.make_buy_baseline(&committed, 1);
        assert_eq!(t0.nonce(), 0);
        assert_eq!(t1.nonce(), 1);
        let fpv = t0.fpv().unwrap();
        assert_eq!(fpv.previous_mark, committed.mark);
        assert_eq!(fpv.value, committed.value);
    }

    #[test]
    fn hms_buy_on_empty_pool_equals_baseline_buy() {
        let committed = ContractState::genesis(word_from_u64(5));
        let raa = crate::hms::hash_mark_set(
            &Fpv::new([0u8; 32], crate::primitives::Hash256::ZERO, [0u8; 32]),
            &[],
            &committed,
        );
        let mut hms_buyer = Client::new(word_from_u64(2), Strategy::HmsBuyer);
        let mut base_buyer = Client::new(word_from_u64(2), Strategy::BaselineBuyer);
        let a = hms_buyer.make_buy_hms(&raa, 0);
        let b = base_buyer.make_buy_baseline(&committed, 0);
        assert_eq!(a.fpv().unwrap(), b.fpv().unwrap());
    }

    #[test]
    fn first_set_of_interval_is_head_candidate() {
        let committed = ContractState::genesis(word_from_u64(5));
        let mut owner = Client::new(word_from_u64(1), Strategy::OwnerSetter);
        let raa = crate::hms::hash_mark_set(
            &Fpv::new([0u8; 32], crate::primitives::Hash256::ZERO, [0u8; 32]),
            &[],
            &committed,
        );
        let t = owner.make_set(SetBasis::View(&raa), word_from_u64(7), 0);
        assert_eq!(t.fpv().unwrap().flag, HEAD_FLAG);
        assert_eq!(t.fpv().unwrap().previous_mark, committed.mark);
    }

    #[test]
    fn set_chaining_pending_tail_is_marked_successor() {
        let raa = RaaResult {
            flag: SUCCESS_FLAG,
            mark: crate::primitives::keccak256(b"tail"),
            value: word_from_u64(7),
        };
        let mut owner = Client::new(word_from_u64(1), Strategy::OwnerSetter);
        let t = owner.make_set(SetBasis::View(&raa), word_from_u64(9), 0);
        let fpv = t.fpv().unwrap();
        assert_eq!(fpv.flag, SUCCESS_FLAG);
        assert_eq!(fpv.previous_mark, raa.mark);
    }

    // Baseline owner chains every set from the committed mark, so a second
    // intra-block set sees an advanced mark and fails.
    #[test]
    fn second_committed_basis_set_fails_intra_block() {
        let committed = ContractState::genesis(word_from_u64(5));
        let mut owner = Client::new(word_from_u64(1), Strategy::OwnerSetter);
        let t0 = owner.make_set(SetBasis::Committed(&committed), word_from_u64(7), 0);
        let t1 = owner.make_set(SetBasis::Committed(&committed), word_from_u64(9), 1);
        let (s1, st0) = execute_set(&committed, &t0.fpv().unwrap(), t0.sender());
        let (s2, st1) = execute_transaction(&s1, &t1);
        assert_eq!(st0, TxStatus::Succeeded);
        assert_eq!(st1, TxStatus::Failed);
        assert_eq!(s2, s1);
    }
}
