//! Monte Carlo generation of auctions under the stochastic order-book model.
//!
//! Every auction owns an independent ChaCha8 stream keyed by
//! `(seed, auction index)`, so results do not depend on how the work is split
//! across threads.

pub mod counts;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use counts::{round_away_from_zero, sample_counts, CountsDraw, CountsModel};

use crate::analytic::MarketOrderMode;
use crate::auction::{clear, clearing_interval, OrderBookSnapshot};
use crate::error::{Error, Result};
use crate::placement::PlacementModel;

/// `n` i.i.d. draws by inverse CDF.
pub fn sample_placement<R: Rng + ?Sized>(
    model: &PlacementModel,
    n: usize,
    rng: &mut R,
) -> Vec<f64> {
    (0..n).map(|_| model.quantile(rng.gen::<f64>())).collect()
}

/// How the counts and imbalance of each auction are drawn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "support", rename_all = "snake_case")]
pub enum CountsSpec {
    /// Uniform on `{min_count..max_count}²`.
    Uniform {
        min_count: u32,
        max_count: u32,
        c: f64,
    },
    /// Uniform on pairs where `c (N_A - N_B)` is a nonzero integer.
    Lattice { max_count: u32, c: f64 },
    /// Explicit `[N_A, N_B, weight]` triples.
    Explicit {
        max_count: u32,
        c: f64,
        weights: Vec<(u32, u32, f64)>,
    },
    /// Every auction uses the same counts and imbalance.
    Fixed {
        sell_count: u32,
        buy_count: u32,
        imbalance: i64,
    },
}

impl CountsSpec {
    pub fn build(&self) -> Result<CountsSource> {
        Ok(match self {
            Self::Uniform {
                min_count,
                max_count,
                c,
            } => CountsSource::Model(CountsModel::uniform(*min_count, *max_count, *c)?),
            Self::Lattice { max_count, c } => {
                CountsSource::Model(CountsModel::lattice(*max_count, *c)?)
            }
            Self::Explicit {
                max_count,
                c,
                weights,
            } => CountsSource::Model(CountsModel::from_weights(
                *max_count,
                *c,
                weights.iter().map(|&(a, b, w)| ((a, b), w)).collect(),
            )?),
            Self::Fixed {
                sell_count,
                buy_count,
                imbalance,
            } => {
                if *sell_count == 0 || *buy_count == 0 {
                    return Err(Error::domain("fixed counts must be positive"));
                }
                CountsSource::Fixed(CountsDraw {
                    sell_count: *sell_count,
                    buy_count: *buy_count,
                    imbalance: *imbalance,
                })
            }
        })
    }
}

#[derive(Debug, Clone)]
pub enum CountsSource {
    Model(CountsModel),
    Fixed(CountsDraw),
}

impl CountsSource {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CountsDraw> {
        match self {
            Self::Model(m) => m.sample(rng),
            Self::Fixed(d) => Ok(*d),
        }
    }
}

/// The price recorded for each auction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutputRule {
    #[default]
    LowerClearingPrice,
    /// The exchange rule: admissible price closest to `reference`.
    ClosingPrice {
        #[serde(default)]
        reference: f64,
        #[serde(default)]
        tick_size: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_auctions: usize,
    pub seed: u64,
    pub mode: MarketOrderMode,
    #[serde(default)]
    pub output: OutputRule,
    pub sell_placement: PlacementModel,
    pub buy_placement: PlacementModel,
    pub counts: CountsSpec,
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.sell_placement.validate()?;
        self.buy_placement.validate()?;
        if let OutputRule::ClosingPrice {
            reference,
            tick_size,
        } = self.output
        {
            if !reference.is_finite() {
                return Err(Error::Config("reference must be finite".into()));
            }
            if let Some(t) = tick_size {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(Error::Config(format!("tick_size {t} must be positive")));
                }
            }
        }
        self.counts.build().map(|_| ())
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn with_mode(&self, mode: MarketOrderMode) -> Self {
        Self {
            mode,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetadata {
    pub config_hash: String,
    pub seed: u64,
    pub mode: MarketOrderMode,
    pub n_auctions: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSample {
    pub values: Vec<f64>,
    pub metadata: SampleMetadata,
}

impl ReturnSample {
    pub fn failures(&self) -> usize {
        self.metadata.failures
    }

    pub fn failure_rate(&self) -> f64 {
        if self.metadata.n_auctions == 0 {
            0.0
        } else {
            self.metadata.failures as f64 / self.metadata.n_auctions as f64
        }
    }
}

/// Everything drawn and computed for one auction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuctionRecord {
    pub index: u64,
    pub counts: CountsDraw,
    /// `None` when the auction failed.
    pub price: Option<f64>,
}

/// The RNG of auction `index`.
pub fn auction_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws the book of auction `index`. Both modes see the same limit orders;
/// the imbalance becomes market volume `M_B = Δ_+`, `M_A = Δ_-`.
pub fn draw_book(
    config: &SimulationConfig,
    counts: &CountsSource,
    index: u64,
) -> Result<(CountsDraw, OrderBookSnapshot)> {
    let mut rng = auction_rng(config.seed, index);
    let draw = counts.sample(&mut rng)?;
    let sells = sample_placement(&config.sell_placement, draw.sell_count as usize, &mut rng);
    let buys = sample_placement(&config.buy_placement, draw.buy_count as usize, &mut rng);
    let mut book = OrderBookSnapshot::from_prices(&sells, &buys)?;
    if config.mode == MarketOrderMode::With {
        let d = draw.imbalance;
        book = book.with_market_orders((-d).max(0) as u64, d.max(0) as u64);
    }
    if let OutputRule::ClosingPrice {
        reference,
        tick_size,
    } = config.output
    {
        book = book.with_reference(reference)?.with_tick_size(tick_size)?;
    }
    Ok((draw, book))
}

fn run_one(config: &SimulationConfig, counts: &CountsSource, index: u64) -> Result<AuctionRecord> {
    let (draw, book) = draw_book(config, counts, index)?;
    let cleared = match config.output {
        OutputRule::LowerClearingPrice => clearing_interval(&book).map(|i| i.lower),
        OutputRule::ClosingPrice { .. } => clear(&book).map(|o| o.closing_price),
    };
    let price = match cleared {
        Ok(p) => Some(p),
        Err(Error::FailedAuction(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(AuctionRecord {
        index,
        counts: draw,
        price,
    })
}

/// Per-auction records in index order.
pub fn simulate_records(config: &SimulationConfig) -> Result<Vec<AuctionRecord>> {
    config.validate()?;
    let counts = config.counts.build()?;
    (0..config.n_auctions as u64)
        .into_par_iter()
        .map(|i| run_one(config, &counts, i))
        .collect()
}

pub fn simulate_auctions(config: &SimulationConfig) -> Result<ReturnSample> {
    let records = simulate_records(config)?;
    let values: Vec<f64> = records.iter().filter_map(|r| r.price).collect();
    let failures = records.len() - values.len();
    if failures > 0 {
        log::warn!("{failures} of {} auctions failed", records.len());
    }
    Ok(ReturnSample {
        values,
        metadata: SampleMetadata {
            config_hash: config.hash(),
            seed: config.seed,
            mode: config.mode,
            n_auctions: config.n_auctions,
            failures,
        },
    })
}

/// `foo.csv` → `foo.meta.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("meta.json")
}

/// Single-column CSV plus a JSON metadata sidecar. Returns the sidecar path.
pub fn write_sample(sample: &ReturnSample, csv_path: &Path) -> Result<PathBuf> {
    let mut out = String::with_capacity(sample.values.len() * 20 + 8);
    out.push_str("return\n");
    for v in &sample.values {
        out.push_str(&format!("{v}\n"));
    }
    fs::write(csv_path, out).map_err(|e| Error::io(csv_path, e))?;
    let meta = sidecar_path(csv_path);
    let mut file = fs::File::create(&meta).map_err(|e| Error::io(&meta, e))?;
    serde_json::to_writer_pretty(&mut file, &sample.metadata)?;
    writeln!(file).map_err(|e| Error::io(&meta, e))?;
    Ok(meta)
}

/// Reads the first column of a CSV with a header row as `f64`s.
pub fn read_sample_column(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut values = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let field = record.get(0).unwrap_or("").trim();
        let v: f64 = field.parse().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            message: format!("row {}: {field:?} is not a number", line + 2),
        })?;
        values.push(v);
    }
    Ok(values)
}
