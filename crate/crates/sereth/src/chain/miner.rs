use std::collections::{HashMap, HashSet};

use rand::Rng;

use super::{execute_transaction, Block, ContractState, Transaction, TxKind, TxPool};
use crate::hms;
use crate::primitives::Word;

/// How the miner selects and orders block transactions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MinerPolicy {
    /// Arrival-ordered with a seeded per-transaction jitter, modelling an
    /// ordinary miner's arbitrary interleaving of equal-fee senders.
    /// Per-sender nonce order is always preserved.
    Baseline { jitter_max: u64 },
    /// Orders the pending sets by their series position and places each buy
    /// immediately after the set whose mark it references.
    Semantic,
}

/// Assembles, executes and commits one block, removing the included
/// transactions from the pool.
pub fn mine_block<R: Rng>(
    pool: &mut TxPool,
    policy: MinerPolicy,
    pre_state: &ContractState,
    capacity: usize,
    height: u64,
    tick: u64,
    rng: &mut R,
) -> Block {
    assert!(capacity >= 1, "block capacity must be at least 1");
    let snapshot: Vec<Transaction> = pool.snapshot().to_vec();
    let mut order = match policy {
        MinerPolicy::Baseline { jitter_max } => baseline_order(&snapshot, jitter_max, rng),
        MinerPolicy::Semantic => semantic_order(&snapshot, pre_state),
    };
    repair_nonce_order(&snapshot, &mut order);
    order.truncate(capacity);

    let mut state = *pre_state;
    let mut txns = Vec::with_capacity(order.len());
    let mut statuses = Vec::with_capacity(order.len());
    for idx in order {
        let txn = snapshot[idx].clone();
        let (next, status) = execute_transaction(&state, &txn);
        state = next;
        statuses.push(status);
        txns.push(txn);
    }

    let included: HashSet<_> = txns.iter().map(|t| t.id).collect();
    pool.remove(&included);

    Block {
        height,
        txns,
        pre_state: *pre_state,
        post_state: state,
        statuses,
        mined_tick: tick,
    }
}

fn baseline_order<R: Rng>(snapshot: &[Transaction], jitter_max: u64, rng: &mut R) -> Vec<usize> {
    let mut keyed: Vec<(u64, usize)> = snapshot
        .iter()
        .enumerate()
        .map(|(i, t)| (t.submit_tick + rng.gen_range(0..=jitter_max), i))
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, i)| i).collect()
}

/// Series-position ordering: buys pinned to the committed mark first, then
/// each series set followed by the buys referencing its mark, then whatever
/// is left (which will fail on execution) in ingestion order.
fn semantic_order(snapshot: &[Transaction], pre_state: &ContractState) -> Vec<usize> {
    let nodes = hms::process(snapshot);
    let series = hms::build_series(&nodes).expect("pool marks cannot form a cycle");

    let mut order = Vec::with_capacity(snapshot.len());
    let mut used = vec![false; snapshot.len()];

    let push_buys_referencing = |mark, order: &mut Vec<usize>, used: &mut Vec<bool>| {
        for (i, t) in snapshot.iter().enumerate() {
            if used[i] || t.kind != TxKind::Buy {
                continue;
            }
            if t.fpv().map(|f| f.previous_mark == mark).unwrap_or(false) {
                used[i] = true;
                order.push(i);
            }
        }
    };

    push_buys_referencing(pre_state.mark, &mut order, &mut used);
    if let Some(series) = series {
        for node in series.nodes() {
            used[node.pool_index] = true;
            order.push(node.pool_index);
            push_buys_referencing(node.mark, &mut order, &mut used);
        }
    }
    for i in 0..snapshot.len() {
        if !used[i] {
            order.push(i);
        }
    }
    order
}

/// Keeps each position's sender but reassigns that sender's transactions in
/// nonce order, so per-sender nonce monotonicity holds in any prefix.
fn repair_nonce_order(snapshot: &[Transaction], order: &mut [usize]) {
    let mut queues: HashMap<Word, Vec<usize>> = HashMap::new();
    for &i in order.iter() {
        queues.entry(snapshot[i].sender()).or_default().push(i);
    }
    for queue in queues.values_mut() {
        queue.sort_by_key(|&i| snapshot[i].nonce());
        queue.reverse(); // pop from the back
    }
    for slot in order.iter_mut() {
        let queue = queues
            .get_mut(&snapshot[*slot].sender())
            .expect("sender was enqueued");
        *slot = queue.pop().expect("one entry per occurrence");
    }
}
