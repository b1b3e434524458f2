//! Throughput accounting: raw throughput, state throughput and the
//! transaction efficiency ratio between them.

use thiserror::Error;

use crate::chain::{Block, Transaction, TxStatus};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("run duration must be positive")]
    ZeroDuration,
}

/// Aggregate counters for one run. `eta` is `None` when no transactions
/// matched (undefined, distinct from zero).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunStats {
    pub raw_count: u64,
    pub success_count: u64,
    pub duration_ticks: u64,
    pub eta: Option<f64>,
    pub t_raw: f64,
    pub t_state: f64,
}

/// Counts (included, succeeded) over all block transactions matching the
/// filter.
pub fn counts<F>(blocks: &[Block], filter: F) -> (u64, u64)
where
    F: Fn(&Transaction) -> bool,
{
    let mut included = 0;
    let mut succeeded = 0;
    for block in blocks {
        for (txn, status) in block.txns.iter().zip(&block.statuses) {
            if filter(txn) {
                included += 1;
                if *status == TxStatus::Succeeded {
                    succeeded += 1;
                }
            }
        }
    }
    (included, succeeded)
}

/// Transaction efficiency over the filtered transactions of a run.
pub fn efficiency<F>(blocks: &[Block], filter: F) -> Option<f64>
where
    F: Fn(&Transaction) -> bool,
{
    let (included, succeeded) = counts(blocks, filter);
    if included == 0 {
        None
    } else {
        Some(succeeded as f64 / included as f64)
    }
}

/// Per-block efficiency for diagnostics.
pub fn per_block_efficiency<F>(blocks: &[Block], filter: F) -> Vec<Option<f64>>
where
    F: Fn(&Transaction) -> bool,
{
    blocks
        .iter()
        .map(|b| efficiency(std::slice::from_ref(b), &filter))
        .collect()
}

/// Successful transactions per tick.
pub fn state_throughput(success_count: u64, duration_ticks: u64) -> Result<f64, MetricsError> {
    if duration_ticks == 0 {
        return Err(MetricsError::ZeroDuration);
    }
    Ok(success_count as f64 / duration_ticks as f64)
}

impl RunStats {
    /// Aggregates a run's blocks. All transaction kinds count here; use
    /// `efficiency` with a filter for the buy-only ratio.
    pub fn from_blocks(blocks: &[Block], duration_ticks: u64) -> Result<RunStats, MetricsError> {
        if duration_ticks == 0 {
            return Err(MetricsError::ZeroDuration);
        }
        let (raw_count, success_count) = counts(blocks, |_| true);
        let eta = if raw_count == 0 {
            None
        } else {
            Some(success_count as f64 / raw_count as f64)
        };
        Ok(RunStats {
            raw_count,
            success_count,
            duration_ticks,
            eta,
            t_raw: raw_count as f64 / duration_ticks as f64,
            t_state: state_throughput(success_count, duration_ticks)?,
        })
    }

    /// Checks t_state == t_raw × eta in exact rational arithmetic:
    /// success/dur against (raw/dur)·(success/raw), cross-multiplied.
    pub fn eq1_identity_holds(&self) -> bool {
        if self.raw_count == 0 {
            return true;
        }
        let s = self.success_count as u128;
        let r = self.raw_count as u128;
        let d = self.duration_ticks as u128;
        // t_state = s/d ; t_raw·eta = (r·s)/(d·r)
        s * (d * r) == (r * s) * d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{ContractState, TxKind};
    use crate::primitives::{word_from_u64, Fpv, Hash256, SUCCESS_FLAG};

    fn block_with(buys: &[(bool, u64)]) -> Block {
        // synthetic block: statuses set directly, not replayed
        let pre = ContractState::genesis(word_from_u64(5));
        let txns: Vec<_> = buys
            .iter()
            .enumerate()
            .map(|(i, _)| {
                Transaction::new(
                    word_from_u64(i as u64),
                    0,
                    TxKind::Buy,
                    Fpv::new(SUCCESS_FLAG, Hash256::ZERO, word_from_u64(0)),
                    i as u64,
                )
            })
            .collect();
        let statuses = buys
            .iter()
            .map(|(ok, _)| {
                if *ok {
                    TxStatus::Succeeded
                } else {
                    TxStatus::Failed
                }
            })
            .collect();
        Block {
            height: 1,
            txns,
            pre_state: pre,
            post_state: pre,
            statuses,
            mined_tick: 15,
        }
    }

    #[test]
    fn one_of_hundred() {
        let mut entries = vec![(false, 0u64); 100];
        entries[0].0 = true;
        let blocks = vec![block_with(&entries)];
        assert_eq!(efficiency(&blocks, |_| true), Some(0.01));
    }

    #[test]
    fn all_succeed_is_one() {
        let blocks = vec![block_with(&[(true, 0), (true, 0), (true, 0)])];
        assert_eq!(efficiency(&blocks, |_| true), Some(1.0));
    }

    #[test]
    fn no_included_transactions_is_undefined() {
        let blocks = vec![block_with(&[])];
        assert_eq!(efficiency(&blocks, |_| true), None);
        assert_ne!(efficiency(&blocks, |_| true), Some(0.0));
    }

    #[test]
    fn state_throughput_arithmetic() {
        assert_eq!(state_throughput(80, 400), Ok(0.2));
        assert_eq!(state_throughput(80, 800), Ok(0.1));
        assert_eq!(state_throughput(1, 0), Err(MetricsError::ZeroDuration));
    }

    #[test]
    fn eta_one_means_equal_throughputs() {
        let blocks = vec![block_with(&[(true, 0), (true, 0)])];
        let stats = RunStats::from_blocks(&blocks, 10).unwrap();
        assert_eq!(stats.eta, Some(1.0));
        assert_eq!(stats.t_raw, stats.t_state);
    }

    #[test]
    fn eq1_identity_exact() {
        let blocks = vec![block_with(&[(true, 0), (false, 0), (false, 0)])];
        let stats = RunStats::from_blocks(&blocks, 7).unwrap();
        assert!(stats.eq1_identity_holds());
    }
}
