//! From order-level auction data to per-stock and group reports.

pub mod aggregate;
pub mod records;
pub mod report;
pub mod synthetic;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use aggregate::{
    aggregate_all, aggregate_auction, reference_price, to_ticks, vwap_reference, AuctionAggregate,
    ReferenceRule, ReferenceSource,
};
pub use records::{
    read_metadata, read_orders, read_trades, Decimal, OrderType, RawOrderRecord, StockMetadata,
    TradeRecord,
};
pub use report::{
    build_reports, GroupSummaryRow, PlotSeries, ReportOptions, Reports, StockReportRow,
};

use crate::error::{Error, Result};

pub const STOCK_REPORT: &str = "stock_report.csv";
pub const GROUP_SUMMARY: &str = "group_summary.csv";
pub const AUCTIONS: &str = "auctions.csv";
pub const PLOT_DIR: &str = "plots";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Used for stocks whose metadata has no tick size.
    pub default_tick_size: Option<String>,
    pub reference: ReferenceRule,
    pub report: ReportOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            default_tick_size: Some("0.01".into()),
            reference: ReferenceRule::default(),
            report: ReportOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSummary {
    pub auctions: usize,
    pub flagged_auctions: usize,
    pub stocks: usize,
    pub files: Vec<PathBuf>,
}

/// Reads the three inputs, aggregates every auction and builds the reports.
pub fn run(
    orders: &Path,
    trades: &Path,
    metadata: &Path,
    options: &PipelineOptions,
) -> Result<(Vec<AuctionAggregate>, Reports)> {
    let orders = read_orders(orders)?;
    let trades = read_trades(trades)?;
    let metadata = read_metadata(metadata)?;
    if orders.is_empty() {
        return Err(Error::InsufficientData(
            "the orders file has no rows".into(),
        ));
    }
    let default_tick = options
        .default_tick_size
        .as_deref()
        .map(|t| {
            t.parse::<Decimal>()
                .ok()
                .filter(Decimal::is_positive)
                .ok_or_else(|| Error::Config(format!("bad default tick size {t:?}")))
        })
        .transpose()?;
    let tick_for = |stock: &str| -> Result<Decimal> {
        metadata
            .iter()
            .find(|m| m.stock == stock)
            .and_then(|m| m.tick_size)
            .or(default_tick)
            .ok_or_else(|| Error::Config(format!("no tick size for {stock}")))
    };
    let aggregates = aggregate_all(&orders, &trades, tick_for, options.reference)?;
    let reports = build_reports(&aggregates, &metadata, &options.report);
    Ok((aggregates, reports))
}

fn write_csv(
    path: &Path,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

const AUCTION_HEADER: [&str; 17] = [
    "stock",
    "date",
    "reference_price",
    "reference_source",
    "tick_size",
    "N_A",
    "N_B",
    "M_A",
    "M_B",
    "delta",
    "closing_price",
    "closing_return",
    "alternative_closing_price",
    "alternative_return",
    "executed_volume",
    "remaining_imbalance",
    "flag",
];

fn auction_record(a: &AuctionAggregate) -> Vec<String> {
    use report::fmt_opt;
    let source = match a.reference_source {
        ReferenceSource::Vwap => "vwap",
        ReferenceSource::LastTrade => "last_trade",
        ReferenceSource::Missing => "missing",
    };
    vec![
        a.stock.clone(),
        a.date.to_string(),
        fmt_opt(a.reference_price),
        source.into(),
        format!("{}", a.tick_size),
        a.sell_volume.to_string(),
        a.buy_volume.to_string(),
        a.market_sell_volume.to_string(),
        a.market_buy_volume.to_string(),
        a.imbalance.to_string(),
        fmt_opt(a.closing_price),
        fmt_opt(a.closing_return),
        fmt_opt(a.alternative_closing_price),
        fmt_opt(a.alternative_return),
        a.executed_volume.map(|v| v.to_string()).unwrap_or_default(),
        a.remaining_imbalance
            .map(|v| v.to_string())
            .unwrap_or_default(),
        a.flag.clone().unwrap_or_default(),
    ]
}

/// Writes the report CSVs and one plot-data CSV per series into `out_dir`.
pub fn write_reports(
    aggregates: &[AuctionAggregate],
    reports: &Reports,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let plot_dir = out_dir.join(PLOT_DIR);
    fs::create_dir_all(&plot_dir).map_err(|e| Error::io(&plot_dir, e))?;
    let mut files = Vec::new();

    let path = out_dir.join(STOCK_REPORT);
    write_csv(
        &path,
        &StockReportRow::HEADER,
        reports.rows.iter().map(StockReportRow::record),
    )?;
    files.push(path);
    let path = out_dir.join(GROUP_SUMMARY);
    write_csv(
        &path,
        &GroupSummaryRow::HEADER,
        reports.groups.iter().map(GroupSummaryRow::record),
    )?;
    files.push(path);
    let path = out_dir.join(AUCTIONS);
    write_csv(
        &path,
        &AUCTION_HEADER,
        aggregates.iter().map(auction_record),
    )?;
    files.push(path);

    for series in &reports.plots {
        let path = plot_dir.join(format!("{}.csv", series.name));
        let rows = series
            .points
            .iter()
            .map(|&(x, y)| vec![format!("{x:.6}"), format!("{y:.6}")]);
        write_csv(&path, &["log10_x", "log10_ccdf"], rows)?;
        files.push(path);
    }
    Ok(files)
}

/// [`run`] followed by [`write_reports`].
pub fn run_to_dir(
    orders: &Path,
    trades: &Path,
    metadata: &Path,
    out_dir: &Path,
    options: &PipelineOptions,
) -> Result<PipelineSummary> {
    let (aggregates, reports) = run(orders, trades, metadata, options)?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let files = write_reports(&aggregates, &reports, out_dir)?;
    Ok(PipelineSummary {
        auctions: aggregates.len(),
        flagged_auctions: aggregates.iter().filter(|a| a.flag.is_some()).count(),
        stocks: reports.rows.len(),
        files,
    })
}
