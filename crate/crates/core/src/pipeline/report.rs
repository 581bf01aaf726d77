//! Per-stock tail and imbalance estimates, their predicted return exponents,
//! and group summaries comparing predictions with realized return tails.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::aggregate::AuctionAggregate;
use super::records::StockMetadata;
use crate::analytic::ExponentPrediction;
use crate::error::Result;
use crate::estimation::{
    estimate_c, loglog_fit, standardize_and_merge, EmpiricalTail, FitWindow, TailSide,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Tail quantiles of the bounding side that delimit placement fits.
    pub placement_start: f64,
    pub placement_stop: f64,
    /// Return fits start at this many standard deviations.
    pub return_sigma: f64,
    /// Subtract each stock's mean return before standardizing.
    pub demean: bool,
    pub binned: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            placement_start: 0.05,
            placement_stop: 0.001,
            return_sigma: 2.0,
            demean: false,
            binned: false,
        }
    }
}

/// One stock: placement tail exponents, `c`, and predicted return exponents.
/// Field order follows the published per-stock tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StockReportRow {
    pub stock: String,
    pub exchange: String,
    pub mcap_eur_bn: Option<f64>,
    pub a_a_left: Option<f64>,
    pub a_b_left: Option<f64>,
    pub a_a_right: Option<f64>,
    pub a_b_right: Option<f64>,
    pub c: Option<f64>,
    pub pred_left_no_mo: Option<f64>,
    pub pred_left_mo: Option<f64>,
    pub pred_right_no_mo: Option<f64>,
    pub pred_right_mo: Option<f64>,
    pub auctions: usize,
    pub flagged_auctions: usize,
    /// Semicolon-separated reasons for missing fields.
    pub reason: Option<String>,
}

impl StockReportRow {
    pub const HEADER: [&'static str; 15] = [
        "stock",
        "exchange",
        "mcap_eur_bn",
        "a_A_left",
        "a_B_left",
        "a_A_right",
        "a_B_right",
        "c",
        "pred_left_no_mo",
        "pred_left_mo",
        "pred_right_no_mo",
        "pred_right_mo",
        "auctions",
        "flagged_auctions",
        "reason",
    ];

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![self.stock.clone(), self.exchange.clone()];
        r.extend(
            [
                self.mcap_eur_bn,
                self.a_a_left,
                self.a_b_left,
                self.a_a_right,
                self.a_b_right,
                self.c,
                self.pred_left_no_mo,
                self.pred_left_mo,
                self.pred_right_no_mo,
                self.pred_right_mo,
            ]
            .map(fmt_opt),
        );
        r.push(self.auctions.to_string());
        r.push(self.flagged_auctions.to_string());
        r.push(self.reason.clone().unwrap_or_default());
        r
    }
}

/// Averaged predictions against realized exponents for one group of stocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummaryRow {
    pub group: String,
    pub stocks: usize,
    pub left_mo_predicted: Option<f64>,
    pub left_mo_realized: Option<f64>,
    pub left_no_mo_predicted: Option<f64>,
    pub left_no_mo_realized: Option<f64>,
    pub right_mo_predicted: Option<f64>,
    pub right_mo_realized: Option<f64>,
    pub right_no_mo_predicted: Option<f64>,
    pub right_no_mo_realized: Option<f64>,
    pub reason: Option<String>,
}

impl GroupSummaryRow {
    pub const HEADER: [&'static str; 11] = [
        "group",
        "stocks",
        "left_mo_predicted",
        "left_mo_realized",
        "left_no_mo_predicted",
        "left_no_mo_realized",
        "right_mo_predicted",
        "right_mo_realized",
        "right_no_mo_predicted",
        "right_no_mo_realized",
        "reason",
    ];

    pub fn record(&self) -> Vec<String> {
        let mut r = vec![self.group.clone(), self.stocks.to_string()];
        r.extend(
            [
                self.left_mo_predicted,
                self.left_mo_realized,
                self.left_no_mo_predicted,
                self.left_no_mo_realized,
                self.right_mo_predicted,
                self.right_mo_realized,
                self.right_no_mo_predicted,
                self.right_no_mo_realized,
            ]
            .map(fmt_opt),
        );
        r.push(self.reason.clone().unwrap_or_default());
        r
    }
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// `(log10 x, log10 CCDF)` points behind one log-log plot.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reports {
    pub rows: Vec<StockReportRow>,
    pub groups: Vec<GroupSummaryRow>,
    pub plots: Vec<PlotSeries>,
}

struct Reasons(Vec<String>);

impl Reasons {
    fn keep<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.0.push(format!("{what}: {e}"));
                None
            }
        }
    }

    fn joined(self) -> Option<String> {
        (!self.0.is_empty()).then(|| self.0.join("; "))
    }
}

fn placement_fits(
    sells: &[f64],
    buys: &[f64],
    side: TailSide,
    opts: &ReportOptions,
    reasons: &mut Reasons,
) -> (Option<f64>, Option<f64>) {
    let label = match side {
        TailSide::Right => "right",
        TailSide::Left => "left",
    };
    let sell_tail = reasons.keep(
        &format!("sell {label} tail"),
        EmpiricalTail::new(sells, side),
    );
    let buy_tail = reasons.keep(&format!("buy {label} tail"), EmpiricalTail::new(buys, side));
    let (Some(sell_tail), Some(buy_tail)) = (sell_tail, buy_tail) else {
        return (None, None);
    };
    // The lighter side bounds the window: buys on the right, sells on the left.
    let bounding = match side {
        TailSide::Right => &buy_tail,
        TailSide::Left => &sell_tail,
    };
    let window = reasons.keep(
        &format!("{label} window"),
        FitWindow::bounded_by(bounding, opts.placement_start, opts.placement_stop),
    );
    let Some(window) = window else {
        return (None, None);
    };
    let a_a = reasons.keep(
        &format!("a_A {label}"),
        loglog_fit(&sell_tail, window, opts.binned).map(|f| f.exponent),
    );
    let a_b = reasons.keep(
        &format!("a_B {label}"),
        loglog_fit(&buy_tail, window, opts.binned).map(|f| f.exponent),
    );
    (a_a, a_b)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn stock_row(
    stock: &str,
    auctions: &[&AuctionAggregate],
    meta: Option<&StockMetadata>,
    opts: &ReportOptions,
    plots: &mut Vec<PlotSeries>,
) -> StockReportRow {
    let mut reasons = Reasons(Vec::new());
    let sells: Vec<f64> = auctions
        .iter()
        .flat_map(|a| a.sell_offsets.iter().map(|&t| t as f64))
        .collect();
    let buys: Vec<f64> = auctions
        .iter()
        .flat_map(|a| a.buy_offsets.iter().map(|&t| t as f64))
        .collect();

    for (side_name, values) in [("sell", &sells), ("buy", &buys)] {
        for side in [TailSide::Right, TailSide::Left] {
            if let Ok(tail) = EmpiricalTail::new(values, side) {
                plots.push(PlotSeries {
                    name: format!(
                        "placement_{}_{side_name}_{}",
                        sanitize(stock),
                        side_label(side)
                    ),
                    points: tail.loglog_points(),
                });
            }
        }
    }

    let (a_a_right, a_b_right) = placement_fits(&sells, &buys, TailSide::Right, opts, &mut reasons);
    let (a_a_left, a_b_left) = placement_fits(&sells, &buys, TailSide::Left, opts, &mut reasons);

    let points: Vec<(f64, f64)> = auctions
        .iter()
        .map(|a| (a.limit_imbalance() as f64, a.imbalance as f64))
        .collect();
    let c = reasons.keep("c", estimate_c(&points).map(|r| r.c));

    let right = match (a_a_right, a_b_right, c) {
        (Some(a), Some(b), Some(c)) => Some(ExponentPrediction::from_formula(a, b, c)),
        _ => None,
    };
    let left = match (a_a_left, a_b_left, c) {
        (Some(a), Some(b), Some(c)) => Some(ExponentPrediction::left_tail(a, b, c)),
        _ => None,
    };
    if meta.is_none() {
        reasons.0.push("no metadata".into());
    }

    StockReportRow {
        stock: stock.to_string(),
        exchange: meta.map(|m| m.exchange.clone()).unwrap_or_default(),
        mcap_eur_bn: meta.map(|m| m.mcap_eur_bn),
        a_a_left,
        a_b_left,
        a_a_right,
        a_b_right,
        c,
        pred_left_no_mo: left.map(|p| p.no_mo),
        pred_left_mo: left.map(|p| p.with_mo),
        pred_right_no_mo: right.map(|p| p.no_mo),
        pred_right_mo: right.map(|p| p.with_mo),
        auctions: auctions.len(),
        flagged_auctions: auctions.iter().filter(|a| a.flag.is_some()).count(),
        reason: reasons.joined(),
    }
}

fn side_label(side: TailSide) -> &'static str {
    match side {
        TailSide::Right => "right",
        TailSide::Left => "left",
    }
}

fn average(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn group_row(
    name: &str,
    rows: &[&StockReportRow],
    by_stock: &BTreeMap<&str, Vec<&AuctionAggregate>>,
    opts: &ReportOptions,
    plots: &mut Vec<PlotSeries>,
) -> GroupSummaryRow {
    let mut reasons = Reasons(Vec::new());
    let mut realized = BTreeMap::new();
    for (mode, pick) in [
        (
            "mo",
            (|a: &AuctionAggregate| a.closing_return) as fn(&AuctionAggregate) -> Option<f64>,
        ),
        ("no_mo", |a: &AuctionAggregate| a.alternative_return),
    ] {
        // Stocks with too few returns, or constant ones, cannot be standardized.
        let groups: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| {
                by_stock[r.stock.as_str()]
                    .iter()
                    .filter_map(|a| pick(a))
                    .collect::<Vec<_>>()
            })
            .filter(|g| standardize_and_merge(std::slice::from_ref(g), opts.demean).is_ok())
            .collect();
        let merged = reasons.keep(
            &format!("{mode} returns"),
            standardize_and_merge(&groups, opts.demean),
        );
        let Some(merged) = merged.filter(|m| !m.is_empty()) else {
            continue;
        };
        for side in [TailSide::Right, TailSide::Left] {
            let label = side_label(side);
            let Some(tail) = reasons.keep(
                &format!("{mode} {label} returns"),
                EmpiricalTail::new(&merged, side),
            ) else {
                continue;
            };
            plots.push(PlotSeries {
                name: format!("returns_{name}_{mode}_{label}"),
                points: tail.loglog_points(),
            });
            let window = FitWindow::Sigma {
                threshold: opts.return_sigma,
            };
            let fit = reasons.keep(
                &format!("{mode} {label} fit"),
                loglog_fit(&tail, window, opts.binned).map(|f| f.exponent),
            );
            realized.insert((mode, label), fit);
        }
    }
    let get = |mode, label| realized.get(&(mode, label)).copied().flatten();
    GroupSummaryRow {
        group: name.to_string(),
        stocks: rows.len(),
        left_mo_predicted: average(rows.iter().map(|r| r.pred_left_mo)),
        left_mo_realized: get("mo", "left"),
        left_no_mo_predicted: average(rows.iter().map(|r| r.pred_left_no_mo)),
        left_no_mo_realized: get("no_mo", "left"),
        right_mo_predicted: average(rows.iter().map(|r| r.pred_right_mo)),
        right_mo_realized: get("mo", "right"),
        right_no_mo_predicted: average(rows.iter().map(|r| r.pred_right_no_mo)),
        right_no_mo_realized: get("no_mo", "right"),
        reason: reasons.joined(),
    }
}

/// Per-stock rows in stock order, then the `all`, `small_caps` and
/// `large_caps` summaries. The small caps are the `floor(n/2)` stocks with
/// the lowest market cap among those with metadata; empty groups are
/// omitted.
pub fn build_reports(
    aggregates: &[AuctionAggregate],
    metadata: &[StockMetadata],
    opts: &ReportOptions,
) -> Reports {
    let mut by_stock: BTreeMap<&str, Vec<&AuctionAggregate>> = BTreeMap::new();
    for a in aggregates {
        by_stock.entry(a.stock.as_str()).or_default().push(a);
    }
    for v in by_stock.values_mut() {
        v.sort_by_key(|a| a.date);
    }
    let meta: BTreeMap<&str, &StockMetadata> =
        metadata.iter().map(|m| (m.stock.as_str(), m)).collect();

    let mut plots = Vec::new();
    let rows: Vec<StockReportRow> = by_stock
        .iter()
        .map(|(stock, auctions)| {
            stock_row(stock, auctions, meta.get(stock).copied(), opts, &mut plots)
        })
        .collect();

    let mut ranked: Vec<&StockReportRow> =
        rows.iter().filter(|r| r.mcap_eur_bn.is_some()).collect();
    ranked.sort_by(|a, b| {
        a.mcap_eur_bn
            .unwrap()
            .total_cmp(&b.mcap_eur_bn.unwrap())
            .then_with(|| a.stock.cmp(&b.stock))
    });
    let half = ranked.len() / 2;
    let all: Vec<&StockReportRow> = rows.iter().collect();
    let mut groups = Vec::new();
    for (name, members) in [
        ("all", &all[..]),
        ("small_caps", &ranked[..half]),
        ("large_caps", &ranked[half..]),
    ] {
        if !members.is_empty() {
            groups.push(group_row(name, members, &by_stock, opts, &mut plots));
        }
    }
    Reports {
        rows,
        groups,
        plots,
    }
}
