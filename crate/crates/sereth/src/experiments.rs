//! Scenario runner: drives owner and buyer clients against a mined chain,
//! sweeps buy:set ratios across seeds, and emits CSV/plot data.
//!
//! The simulated network has two latencies that make the scenarios differ:
//! mined blocks become visible to clients only after a publication delay,
//! and buyer transactions take a small random time to reach the pool after
//! the buyer sampled its view. The miner itself always sees the live tip.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::chain::{
    mine_block, validate_block, Block, ContractState, MinerPolicy, Transaction, TxKind, TxPool,
};
use crate::clients::{Client, SetBasis, Strategy};
use crate::hms;
use crate::metrics::{counts, efficiency, RunStats};
use crate::primitives::{word_from_u64, Fpv, Hash256, Word, REJECTED};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub enum Scenario {
    GethUnmodified,
    SerethClient,
    SemanticMining,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::GethUnmodified,
        Scenario::SerethClient,
        Scenario::SemanticMining,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Scenario::GethUnmodified => "geth_unmodified",
            Scenario::SerethClient => "sereth_client",
            Scenario::SemanticMining => "semantic_mining",
        }
    }

    fn buyer_strategy(self) -> Strategy {
        match self {
            Scenario::GethUnmodified => Strategy::BaselineBuyer,
            Scenario::SerethClient | Scenario::SemanticMining => Strategy::HmsBuyer,
        }
    }

    fn miner_policy(self, jitter_max: u64) -> MinerPolicy {
        match self {
            Scenario::GethUnmodified | Scenario::SerethClient => {
                MinerPolicy::Baseline { jitter_max }
            }
            Scenario::SemanticMining => MinerPolicy::Semantic,
        }
    }

    fn owner_uses_view(self) -> bool {
        self != Scenario::GethUnmodified
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        match s {
            "geth_unmodified" => Ok(Scenario::GethUnmodified),
            "sereth_client" => Ok(Scenario::SerethClient),
            "semantic_mining" => Ok(Scenario::SemanticMining),
            _ => Err(ConfigError::UnknownScenario(s.to_string())),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("unknown scenario {0:?}")]
    UnknownScenario(String),
    #[error("{0} must be at least 1")]
    ZeroCount(&'static str),
    #[error("n_sets ({n_sets}) must not exceed n_buys ({n_buys})")]
    MoreSetsThanBuys { n_buys: u64, n_sets: u64 },
    #[error("single-sender mode requires n_buys == n_sets == 1")]
    SingleSenderShape,
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("invalid value {value:?} for {key}")]
    BadValue { key: String, value: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_buys: u64,
    pub n_sets: u64,
    pub submit_interval_ticks: u64,
    pub block_interval_ticks: u64,
    pub seed: u64,
    pub n_buyers: u64,
    pub block_capacity: usize,
    /// Ticks between a block being mined and clients seeing it.
    pub publication_latency_ticks: u64,
    /// Max ticks between a buyer sampling its view and the transaction
    /// reaching the pool (uniform per transaction).
    pub buyer_latency_max_ticks: u64,
    /// Jitter of the baseline miner's arrival ordering.
    pub baseline_jitter_max: u64,
    /// Owner and buyer share one address (sequential-history runs).
    pub single_sender: bool,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario, n_sets: u64, seed: u64) -> Self {
        ScenarioConfig {
            scenario,
            n_buys: 100,
            n_sets,
            submit_interval_ticks: 1,
            block_interval_ticks: 15,
            seed,
            n_buyers: 10,
            block_capacity: 512,
            publication_latency_ticks: 10,
            buyer_latency_max_ticks: 6,
            baseline_jitter_max: 2,
            single_sender: false,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_buys == 0 {
            return Err(ConfigError::ZeroCount("n_buys"));
        }
        if self.n_sets == 0 {
            return Err(ConfigError::ZeroCount("n_sets"));
        }
        if self.submit_interval_ticks == 0 {
            return Err(ConfigError::ZeroCount("submit_interval_ticks"));
        }
        if self.block_interval_ticks == 0 {
            return Err(ConfigError::ZeroCount("block_interval_ticks"));
        }
        if self.n_buyers == 0 {
            return Err(ConfigError::ZeroCount("n_buyers"));
        }
        if self.block_capacity == 0 {
            return Err(ConfigError::ZeroCount("block_capacity"));
        }
        if self.n_sets > self.n_buys {
            return Err(ConfigError::MoreSetsThanBuys {
                n_buys: self.n_buys,
                n_sets: self.n_sets,
            });
        }
        if self.single_sender && (self.n_buys != 1 || self.n_sets != 1) {
            return Err(ConfigError::SingleSenderShape);
        }
        Ok(())
    }
}

/// Everything one run produces: the full block trace plus its metrics.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: ScenarioConfig,
    pub blocks: Vec<Block>,
    pub stats: RunStats,
    pub buys_included: u64,
    pub buys_succeeded: u64,
    pub sets_included: u64,
    pub sets_succeeded: u64,
    pub eta_buy: Option<f64>,
    pub duration_ticks: u64,
}

const OWNER_ADDRESS: Word = word_from_u64(1);
const INITIAL_VALUE: u64 = 1000;

fn raa_args() -> Fpv {
    Fpv::new(REJECTED, Hash256::ZERO, [0u8; 32])
}

/// Committed state as a client sees it: the newest block old enough to have
/// been published, or genesis.
fn published_state(
    blocks: &[Block],
    tick: u64,
    latency: u64,
    genesis: &ContractState,
) -> (ContractState, usize) {
    let n_published = blocks
        .iter()
        .take_while(|b| b.mined_tick + latency <= tick)
        .count();
    let state = if n_published == 0 {
        *genesis
    } else {
        blocks[n_published - 1].post_state
    };
    (state, n_published)
}

/// Pending transactions as a client sees them: everything that has reached
/// the network and is not in a published block.
fn visible_pool(submitted: &[Transaction], blocks: &[Block], n_published: usize) -> Vec<Transaction> {
    let published_ids: HashSet<_> = blocks[..n_published]
        .iter()
        .flat_map(|b| b.txns.iter().map(|t| t.id))
        .collect();
    submitted
        .iter()
        .filter(|t| !published_ids.contains(&t.id))
        .cloned()
        .collect()
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutcome, ConfigError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut owner = Client::new(OWNER_ADDRESS, Strategy::OwnerSetter);
    let mut buyers: Vec<Client> = if cfg.single_sender {
        // the single set is created first, taking nonce 0
        vec![Client::starting_at(
            OWNER_ADDRESS,
            cfg.scenario.buyer_strategy(),
            1,
        )]
    } else {
        (0..cfg.n_buyers)
            .map(|i| Client::new(word_from_u64(100 + i), cfg.scenario.buyer_strategy()))
            .collect()
    };

    let genesis = ContractState::genesis(word_from_u64(INITIAL_VALUE));
    let mut pool = TxPool::new();
    let mut blocks: Vec<Block> = Vec::new();
    // arrival-ordered log backing the clients' pool view
    let mut submitted: Vec<Transaction> = Vec::new();
    let mut scheduled: BTreeMap<u64, Vec<Transaction>> = BTreeMap::new();
    let mut last_arrival: HashMap<Word, u64> = HashMap::new();

    let set_ticks: Vec<u64> = (0..cfg.n_sets)
        .map(|k| k * cfg.n_buys * cfg.submit_interval_ticks / cfg.n_sets)
        .collect();
    let buy_ticks: Vec<u64> = (0..cfg.n_buys)
        .map(|j| j * cfg.submit_interval_ticks)
        .collect();
    let mut set_idx = 0usize;
    let mut buy_idx = 0usize;
    let mut next_value = INITIAL_VALUE + 1;

    let policy = cfg.scenario.miner_policy(cfg.baseline_jitter_max);
    let mut tick = 0u64;
    loop {
        if tick > 0 && tick % cfg.block_interval_ticks == 0 && !pool.is_empty() {
            let tip = blocks.last().map(|b| b.post_state).unwrap_or(genesis);
            let block = mine_block(
                &mut pool,
                policy,
                &tip,
                cfg.block_capacity,
                blocks.len() as u64 + 1,
                tick,
                &mut rng,
            );
            blocks.push(block);
        }

        if let Some(batch) = scheduled.remove(&tick) {
            for txn in batch {
                pool.submit(txn.clone()).expect("arrivals follow nonce order");
                submitted.push(txn);
            }
        }

        // the owner submits with no latency and always sees the live tip
        while set_idx < set_ticks.len() && set_ticks[set_idx] == tick {
            let tip = blocks.last().map(|b| b.post_state).unwrap_or(genesis);
            let value = word_from_u64(next_value);
            let txn = if cfg.scenario.owner_uses_view() {
                let raa = hms::hash_mark_set(&raa_args(), pool.snapshot(), &tip);
                owner.make_set(SetBasis::View(&raa), value, tick)
            } else {
                owner.make_set(SetBasis::Committed(&tip), value, tick)
            };
            pool.submit(txn.clone()).expect("owner nonces are sequential");
            submitted.push(txn);
            set_idx += 1;
            next_value += 1;
        }

        while buy_idx < buy_ticks.len() && buy_ticks[buy_idx] == tick {
            let buyer = &mut buyers[buy_idx % cfg.n_buyers as usize];
            let (committed, n_published) =
                published_state(&blocks, tick, cfg.publication_latency_ticks, &genesis);
            let delay = rng.gen_range(0..=cfg.buyer_latency_max_ticks);
            let arrival = (tick + delay).max(*last_arrival.get(&buyer.address).unwrap_or(&0));
            let txn = match buyer.strategy {
                Strategy::BaselineBuyer => buyer.make_buy_baseline(&committed, arrival),
                Strategy::HmsBuyer => {
                    let visible = visible_pool(&submitted, &blocks, n_published);
                    let raa = hms::hash_mark_set(&raa_args(), &visible, &committed);
                    buyer.make_buy_hms(&raa, arrival)
                }
                Strategy::OwnerSetter => unreachable!("buyers never set"),
            };
            last_arrival.insert(txn.sender(), arrival);
            if arrival == tick {
                pool.submit(txn.clone()).expect("buyer nonces are sequential");
                submitted.push(txn);
            } else {
                scheduled.entry(arrival).or_default().push(txn);
            }
            buy_idx += 1;
        }

        if set_idx == set_ticks.len()
            && buy_idx == buy_ticks.len()
            && scheduled.is_empty()
            && pool.is_empty()
        {
            break;
        }
        tick += 1;
    }

    let duration_ticks = blocks.last().map(|b| b.mined_tick).unwrap_or(tick).max(1);
    let stats = RunStats::from_blocks(&blocks, duration_ticks).expect("duration is positive");
    let (buys_included, buys_succeeded) = counts(&blocks, |t| t.kind == TxKind::Buy);
    let (sets_included, sets_succeeded) = counts(&blocks, |t| t.kind == TxKind::Set);
    let eta_buy = efficiency(&blocks, |t| t.kind == TxKind::Buy);
    debug_assert!(blocks.iter().all(validate_block));

    Ok(RunOutcome {
        config: *cfg,
        blocks,
        stats,
        buys_included,
        buys_succeeded,
        sets_included,
        sets_succeeded,
        eta_buy,
        duration_ticks,
    })
}

pub const CSV_HEADER: &str = "scenario,ratio,seed,n_buys,n_sets,buys_included,buys_succeeded,\
sets_included,sets_succeeded,eta_buy,t_raw,t_state,n_blocks,duration_ticks";

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub ratio: u64,
    pub seed: u64,
    pub n_buys: u64,
    pub n_sets: u64,
    pub buys_included: u64,
    pub buys_succeeded: u64,
    pub sets_included: u64,
    pub sets_succeeded: u64,
    pub eta_buy: Option<f64>,
    pub t_raw: f64,
    pub t_state: f64,
    pub n_blocks: u64,
    pub duration_ticks: u64,
}

fn fmt_eta(eta: Option<f64>) -> String {
    match eta {
        Some(v) => format!("{v:.6}"),
        None => "nan".to_string(),
    }
}

impl SweepRow {
    pub fn from_outcome(out: &RunOutcome, ratio: u64) -> SweepRow {
        SweepRow {
            scenario: out.config.scenario,
            ratio,
            seed: out.config.seed,
            n_buys: out.config.n_buys,
            n_sets: out.config.n_sets,
            buys_included: out.buys_included,
            buys_succeeded: out.buys_succeeded,
            sets_included: out.sets_included,
            sets_succeeded: out.sets_succeeded,
            eta_buy: out.eta_buy,
            t_raw: out.stats.t_raw,
            t_state: out.stats.t_state,
            n_blocks: out.blocks.len() as u64,
            duration_ticks: out.duration_ticks,
        }
    }

    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{},{}",
            self.scenario,
            self.ratio,
            self.seed,
            self.n_buys,
            self.n_sets,
            self.buys_included,
            self.buys_succeeded,
            self.sets_included,
            self.sets_succeeded,
            fmt_eta(self.eta_buy),
            self.t_raw,
            self.t_state,
            self.n_blocks,
            self.duration_ticks,
        )
    }
}

/// One run for a given ratio: n_sets = n_buys / ratio.
pub fn run_cell(base: &ScenarioConfig, ratio: u64) -> Result<SweepRow, ConfigError> {
    if ratio == 0 {
        return Err(ConfigError::ZeroCount("ratio"));
    }
    let mut cfg = *base;
    cfg.n_sets = (cfg.n_buys / ratio).max(1);
    let out = run_scenario(&cfg)?;
    Ok(SweepRow::from_outcome(&out, ratio))
}

/// One row per (scenario, ratio, seed), in that nesting order.
pub fn sweep(
    base: &ScenarioConfig,
    scenarios: &[Scenario],
    ratios: &[u64],
    seeds: &[u64],
) -> Result<Vec<SweepRow>, ConfigError> {
    let mut rows = Vec::with_capacity(scenarios.len() * ratios.len() * seeds.len());
    for &scenario in scenarios {
        for &ratio in ratios {
            for &seed in seeds {
                let mut cfg = *base;
                cfg.scenario = scenario;
                cfg.seed = seed;
                rows.push(run_cell(&cfg, ratio)?);
            }
        }
    }
    Ok(rows)
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

pub const PLOT_HEADER: &str = "scenario,ratio,mean_eta,min_eta,max_eta";

/// Per-scenario (ratio, mean, min, max) series over the buy-only eta,
/// sorted by (scenario, ratio). Rows with undefined eta are skipped.
pub fn emit_plot_data(rows: &[SweepRow]) -> String {
    let mut groups: BTreeMap<(Scenario, u64), Vec<f64>> = BTreeMap::new();
    for row in rows {
        if let Some(eta) = row.eta_buy {
            groups.entry((row.scenario, row.ratio)).or_default().push(eta);
        }
    }
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for ((scenario, ratio), etas) in groups {
        let mean = etas.iter().sum::<f64>() / etas.len() as f64;
        let min = etas.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = etas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        out.push_str(&format!(
            "{scenario},{ratio},{mean:.6},{min:.6},{max:.6}\n"
        ));
    }
    out
}

/// Parses a flat key=value config file. Blank lines and `#` comments are
/// ignored. Returned pairs are applied in file order; CLI flags override.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::BadValue {
            key: line.to_string(),
            value: String::new(),
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl ScenarioConfig {
    /// Applies one config-file entry. Keys mirror the CLI flag names.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = |key: &str, value: &str| ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "scenario" => self.scenario = value.parse()?,
            "buys" => self.n_buys = value.parse().map_err(|_| bad(key, value))?,
            "sets" => self.n_sets = value.parse().map_err(|_| bad(key, value))?,
            "seed" => self.seed = value.parse().map_err(|_| bad(key, value))?,
            "submit-interval" => {
                self.submit_interval_ticks = value.parse().map_err(|_| bad(key, value))?
            }
            "block-interval" => {
                self.block_interval_ticks = value.parse().map_err(|_| bad(key, value))?
            }
            "buyers" => self.n_buyers = value.parse().map_err(|_| bad(key, value))?,
            "block-capacity" => {
                self.block_capacity = value.parse().map_err(|_| bad(key, value))?
            }
            "publication-latency" => {
                self.publication_latency_ticks = value.parse().map_err(|_| bad(key, value))?
            }
            "buyer-latency-max" => {
                self.buyer_latency_max_ticks = value.parse().map_err(|_| bad(key, value))?
            }
            "jitter-max" => {
                self.baseline_jitter_max = value.parse().map_err(|_| bad(key, value))?
            }
            "single-sender" => {
                self.single_sender = value.parse().map_err(|_| bad(key, value))?
            }
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }
}
