//! Pending-pool serialization: filters the pool for chained set
//! transactions, builds the successor DAG, extracts the deepest series
//! rooted at a head candidate, and answers read-uncommitted view queries.

use thiserror::Error;

use crate::chain::{ContractState, Transaction, TxKind, TxnId};
use crate::primitives::{Fpv, Hash256, Word, HEAD_FLAG, SUCCESS_FLAG};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HmsError {
    /// The recursion depth guard tripped: the successor graph contains a
    /// cycle, which valid mark-chained pools cannot produce.
    #[error("cycle detected in transaction successor graph")]
    CycleDetected,
}

/// A filtered pool transaction with its computed mark and DAG links.
/// Links are indices into the node list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxnNode {
    pub txn_id: TxnId,
    pub fpv: Fpv,
    pub mark: Hash256,
    pub prev: Option<usize>,
    pub next: Vec<usize>,
    /// Position in the pool's ingestion order.
    pub pool_index: usize,
}

impl TxnNode {
    pub fn sender(&self) -> Word {
        self.txn_id.sender
    }

    pub fn nonce(&self) -> u64 {
        self.txn_id.nonce
    }
}

/// True iff the transaction carries a decodable FPV flagged as a head
/// candidate or as a successor to the pending tail.
pub fn success(txn: &Transaction) -> bool {
    match txn.fpv() {
        Ok(fpv) => fpv.flag == SUCCESS_FLAG || fpv.flag == HEAD_FLAG,
        Err(_) => false,
    }
}

/// Filters a pool snapshot down to the chained set transactions, computing
/// each node's mark. Malformed payloads are treated as non-HMS traffic and
/// dropped. Output preserves ingestion order.
pub fn process(pool: &[Transaction]) -> Vec<TxnNode> {
    let mut nodes = Vec::new();
    for (i, txn) in pool.iter().enumerate() {
        if txn.kind != TxKind::Set || !success(txn) {
            continue;
        }
        let fpv = match txn.fpv() {
            Ok(fpv) => fpv,
            Err(_) => continue,
        };
        nodes.push(TxnNode {
            txn_id: txn.id,
            mark: fpv.mark(),
            fpv,
            prev: None,
            next: Vec::new(),
            pool_index: i,
        });
    }
    nodes
}

/// The deepest hash-chained path of pending sets rooted at a head candidate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    nodes: Vec<TxnNode>,
}

impl Series {
    pub fn nodes(&self) -> &[TxnNode] {
        &self.nodes
    }

    pub fn head(&self) -> &TxnNode {
        &self.nodes[0]
    }

    pub fn tail(&self) -> &TxnNode {
        self.nodes.last().expect("series is non-empty")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Recursively finds a maximum-length root-to-leaf path starting at `head`.
/// Equal depths resolve to the path with the lexicographically smallest tail
/// mark, so repeated calls always agree. The recursion depth guard turns a
/// corrupt cyclic graph into an error instead of nontermination.
pub fn deepest_branch(
    nodes: &[TxnNode],
    head: usize,
) -> Result<(usize, Vec<usize>), HmsError> {
    let mut path = vec![head];
    let mut best: Option<Vec<usize>> = None;
    descend(nodes, head, &mut path, &mut best)?;
    let best = best.expect("at least the head itself is a path");
    Ok((best.len(), best))
}

fn descend(
    nodes: &[TxnNode],
    at: usize,
    path: &mut Vec<usize>,
    best: &mut Option<Vec<usize>>,
) -> Result<(), HmsError> {
    if path.len() > nodes.len() {
        return Err(HmsError::CycleDetected);
    }
    if nodes[at].next.is_empty() {
        let replace = match best {
            None => true,
            Some(b) => {
                path.len() > b.len()
                    || (path.len() == b.len()
                        && nodes[*path.last().unwrap()].mark < nodes[*b.last().unwrap()].mark)
            }
        };
        if replace {
            *best = Some(path.clone());
        }
        return Ok(());
    }
    for &succ in &nodes[at].next {
        path.push(succ);
        descend(nodes, succ, path, best)?;
        path.pop();
    }
    Ok(())
}

/// Links the nodes into a successor DAG (a → b where a.mark equals b's
/// previous mark) and returns the deepest series found from any head
/// candidate, or `None` when no head candidate exists.
pub fn build_series(nodes: &[TxnNode]) -> Result<Option<Series>, HmsError> {
    let mut linked = nodes.to_vec();
    for a in 0..linked.len() {
        for b in 0..linked.len() {
            if a != b && linked[a].mark == linked[b].fpv.previous_mark {
                if linked[b].prev.is_none() {
                    linked[b].prev = Some(a);
                }
                linked[a].next.push(b);
            }
        }
    }

    let mut best: Option<(usize, Vec<usize>)> = None;
    for head in 0..linked.len() {
        if linked[head].fpv.flag != HEAD_FLAG {
            continue;
        }
        let (depth, path) = deepest_branch(&linked, head)?;
        let replace = match &best {
            None => true,
            Some((d, p)) => {
                depth > *d
                    || (depth == *d
                        && linked[*path.last().unwrap()].mark < linked[*p.last().unwrap()].mark)
            }
        };
        if replace {
            best = Some((depth, path));
        }
    }

    Ok(best.map(|(_, path)| Series {
        nodes: path.into_iter().map(|i| linked[i].clone()).collect(),
    }))
}

/// The augmented view returned to a read-only call: the flag, mark and value
/// describing either the pending series tail or the committed state.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct RaaResult {
    pub flag: Word,
    pub mark: Hash256,
    pub value: Word,
}

/// Serializes the pool and returns the read-uncommitted head-of-line state.
/// With no pending series the committed state is returned under `HEAD_FLAG`,
/// telling the caller its next write is a head candidate.
pub fn hash_mark_set(_input: &Fpv, pool: &[Transaction], committed: &ContractState) -> RaaResult {
    let nodes = process(pool);
    let series = build_series(&nodes).expect("marks computed by process cannot form a cycle");
    match series {
        Some(series) => RaaResult {
            flag: SUCCESS_FLAG,
            mark: series.tail().mark,
            value: series.tail().fpv.value,
        },
        None => RaaResult {
            flag: HEAD_FLAG,
            mark: committed.mark,
            value: committed.value,
        },
    }
}
