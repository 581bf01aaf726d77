mod common;

use std::fs;
use std::path::{Path, PathBuf};

use auction_tails::pipeline::synthetic::{write_fixture, SyntheticFixture};
use auction_tails::pipeline::*;
use auction_tails::Error;
use proptest::prelude::*;

fn hand_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/hand")
}

fn run_hand() -> (Vec<AuctionAggregate>, Reports) {
    let d = hand_dir();
    run(
        &d.join("orders.csv"),
        &d.join("trades.csv"),
        &d.join("metadata.csv"),
        &PipelineOptions::default(),
    )
    .unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

#[test]
fn hand_cleared_auction() {
    let (aggs, _) = run_hand();
    assert_eq!(aggs.len(), 4);
    let a = &aggs[0];
    assert_eq!(a.date.to_string(), "2020-03-02");
    assert_eq!(a.reference_source, ReferenceSource::Vwap);
    // (10.00 * 100 + 10.10 * 100) / 200; the 15:00 trade is outside the window
    assert!(close(a.reference_price.unwrap(), 10.05));
    assert_eq!((a.sell_volume, a.buy_volume), (400, 450));
    assert_eq!(
        (a.market_sell_volume, a.market_buy_volume, a.imbalance),
        (30, 100, 70)
    );
    assert!(close(a.closing_price.unwrap(), 10.10));
    assert!(close(a.closing_return.unwrap(), (10.10f64 / 10.05).ln()));
    assert!(close(a.alternative_closing_price.unwrap(), 10.05));
    assert!(close(a.alternative_return.unwrap(), 0.0));
    assert_eq!(a.executed_volume, Some(250));
    assert_eq!(a.remaining_imbalance, Some(-80));
    assert_eq!(a.sell_offsets, vec![-1, 1, 4]);
    assert_eq!(a.buy_offsets, vec![3, 0, -3]);
    assert_eq!(a.flag, None);
    // buy pressure clears above the price without market orders
    assert!(a.closing_price > a.alternative_closing_price);
}

#[test]
fn hand_fixture_flags() {
    let (aggs, reports) = run_hand();
    let no_trades = &aggs[1];
    assert_eq!(no_trades.reference_source, ReferenceSource::Missing);
    assert_eq!(no_trades.flag.as_deref(), Some("no_reference"));
    assert_eq!(no_trades.closing_price, None);

    // M_B = N_A leaves no upper clearing price
    let failed = &aggs[2];
    assert_eq!(failed.flag.as_deref(), Some("failed_auction"));
    assert_eq!(failed.closing_price, None);
    assert!(close(failed.alternative_closing_price.unwrap(), 10.05));

    let row = &reports.rows[0];
    assert_eq!((row.auctions, row.flagged_auctions), (4, 2));
    assert!(row.reason.is_some());
    assert_eq!(row.c, None);
}

#[test]
fn balanced_market_orders_leave_the_price_alone() {
    let (aggs, _) = run_hand();
    let a = &aggs[3];
    assert_eq!(a.market_sell_volume, a.market_buy_volume);
    assert_eq!(a.closing_price, a.alternative_closing_price);
    assert!(close(a.closing_price.unwrap(), 10.10));
    assert_eq!(a.executed_volume, Some(80));
}

#[test]
fn empty_orders_are_insufficient_data() {
    let dir = tempfile::tempdir().unwrap();
    let orders = dir.path().join("orders.csv");
    fs::write(&orders, "stock,date,time,type,side,price,size\n").unwrap();
    let h = hand_dir();
    let err = run(
        &orders,
        &h.join("trades.csv"),
        &h.join("metadata.csv"),
        &PipelineOptions::default(),
    )
    .unwrap_err();
    assert!(matches!(err, Error::InsufficientData(_)));
}

fn small_fixture(stocks: usize) -> SyntheticFixture {
    let mut fx = SyntheticFixture {
        days: 150,
        ..SyntheticFixture::default()
    };
    fx.stocks.truncate(stocks);
    fx
}

fn run_fixture(fx: &SyntheticFixture, root: &Path) -> PipelineSummary {
    let input = root.join("input");
    write_fixture(fx, &input).unwrap();
    run_to_dir(
        &input.join("orders.csv"),
        &input.join("trades.csv"),
        &input.join("metadata.csv"),
        &root.join("output"),
        &PipelineOptions::default(),
    )
    .unwrap()
}

#[test]
fn reports_are_byte_identical_across_runs_and_threads() {
    let fx = small_fixture(3);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_fixture(&fx, a.path());
    rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run_fixture(&fx, b.path()));
    let ma = common::golden::manifest(a.path());
    assert!(ma.contains("output/stock_report.csv"));
    assert!(ma.contains("output/plots/"));
    assert_eq!(ma, common::golden::manifest(b.path()));
}

#[test]
fn volumes_reconcile() {
    let fx = small_fixture(2);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input");
    write_fixture(&fx, &input).unwrap();
    let (aggs, _) = run(
        &input.join("orders.csv"),
        &input.join("trades.csv"),
        &input.join("metadata.csv"),
        &PipelineOptions::default(),
    )
    .unwrap();
    let orders = read_orders(&input.join("orders.csv")).unwrap();
    for a in &aggs {
        let day: Vec<_> = orders
            .iter()
            .filter(|o| o.stock == a.stock && o.date == a.date)
            .collect();
        let total = |t: OrderType, s| {
            day.iter()
                .filter(|o| o.order_type == t && o.side == s)
                .map(|o| o.size)
                .sum::<u64>()
        };
        use auction_tails::auction::Side::{Buy, Sell};
        assert_eq!(a.sell_volume, total(OrderType::Limit, Sell));
        assert_eq!(a.buy_volume, total(OrderType::Limit, Buy));
        assert_eq!(a.market_sell_volume, total(OrderType::Market, Sell));
        assert_eq!(a.market_buy_volume, total(OrderType::Market, Buy));
        assert_eq!(
            a.sell_offsets.len() + a.buy_offsets.len(),
            day.iter()
                .filter(|o| o.order_type == OrderType::Limit)
                .count()
        );
        if let (Some(v), Some(r)) = (a.executed_volume, a.remaining_imbalance) {
            let sell_side = v + (-r).max(0) as u64;
            let buy_side = v + r.max(0) as u64;
            assert!(sell_side <= a.sell_volume + a.market_sell_volume);
            assert!(buy_side <= a.buy_volume + a.market_buy_volume);
            assert!(v == sell_side || v == buy_side);
        }
        if a.market_sell_volume == a.market_buy_volume && a.closing_price.is_some() {
            assert_eq!(a.closing_price, a.alternative_closing_price);
        }
    }
}

#[test]
fn one_stock_groups_repeat_the_row() {
    let fx = small_fixture(1);
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("input");
    write_fixture(&fx, &input).unwrap();
    let (_, reports) = run(
        &input.join("orders.csv"),
        &input.join("trades.csv"),
        &input.join("metadata.csv"),
        &PipelineOptions::default(),
    )
    .unwrap();
    let row = &reports.rows[0];
    assert!(row.pred_right_mo.is_some() && row.pred_left_mo.is_some());
    let names: Vec<&str> = reports.groups.iter().map(|g| g.group.as_str()).collect();
    assert_eq!(names, ["all", "large_caps"]);
    for g in &reports.groups {
        assert_eq!(g.stocks, 1);
        assert_eq!(g.left_mo_predicted, row.pred_left_mo);
        assert_eq!(g.left_no_mo_predicted, row.pred_left_no_mo);
        assert_eq!(g.right_mo_predicted, row.pred_right_mo);
        assert_eq!(g.right_no_mo_predicted, row.pred_right_no_mo);
    }
}

#[test]
fn golden_reports_and_planted_parameters() {
    let dir = tempfile::tempdir().unwrap();
    common::golden::run_default(dir.path()).unwrap();
    common::golden::check(dir.path()).unwrap();

    let (a, c) = common::golden::planted_deviation(dir.path()).unwrap();
    assert!(a <= 0.15, "exponent off by {a}");
    assert!(c <= 0.02, "c off by {c}");
}

proptest! {
    #[test]
    fn ticks_round_trip(ticks in 1i64..1_000_000, tick_idx in 0usize..4, reference in 0.5f64..5000.0) {
        let tick = [0.0001, 0.005, 0.01, 0.5][tick_idx];
        let price = ticks as f64 * tick;
        let offset = to_ticks(price, reference, tick);
        let back = reference + offset as f64 * tick;
        prop_assert!((back - price).abs() <= tick / 2.0 * (1.0 + 1e-9));
    }
}
