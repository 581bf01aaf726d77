mod common;

use auction_tails::auction::{
    alternative_closing_price, clear, clearing_interval, OrderBookSnapshot, Side,
};
use common::SmallBook;
use proptest::prelude::*;

fn small_book() -> impl Strategy<Value = SmallBook> {
    (
        prop::collection::vec((any::<bool>(), -5i32..=5, 1u64..=3), 0..=20),
        0u64..=4,
        0u64..=4,
    )
        .prop_map(|(orders, market_sell, market_buy)| SmallBook {
            orders: orders
                .into_iter()
                .map(|(sell, p, q)| (if sell { Side::Sell } else { Side::Buy }, p, q))
                .collect(),
            market_sell,
            market_buy,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn volume_is_maximized_on_the_interval(book in small_book()) {
        common::check_volume_maximization(&book).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn side_swap_mirrors_the_interval(book in small_book()) {
        common::check_side_swap(&book).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn matched_market_orders_are_neutral(book in small_book()) {
        common::check_matched_pair(&book).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn splitting_orders_changes_nothing(book in small_book()) {
        common::check_split(&book).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn lower_never_exceeds_upper(book in small_book()) {
        if let Ok(iv) = clearing_interval(&book.snapshot()) {
            prop_assert!(iv.lower <= iv.upper);
        }
    }

    #[test]
    fn closing_price_lies_in_the_interval(book in small_book(), reference in -8.0f64..8.0) {
        let snap = book.snapshot().with_reference(reference).unwrap().with_tick_size(Some(1.0)).unwrap();
        if let Ok(out) = clear(&snap) {
            prop_assert!(out.interval.lower <= out.closing_price && out.closing_price <= out.interval.upper);
            prop_assert_eq!(out.closing_price.fract(), 0.0);
        }
    }

    #[test]
    fn buy_pressure_never_lowers_the_price(book in small_book()) {
        // with M_B > M_A the auction clears at or above the no-market-order price
        let snap = book.snapshot().with_tick_size(Some(1.0)).unwrap();
        if let (Ok(with), Ok(without)) = (clear(&snap), alternative_closing_price(&snap)) {
            if book.market_buy > book.market_sell {
                prop_assert!(with.closing_price >= without);
            }
            if book.market_buy == book.market_sell {
                prop_assert_eq!(with.closing_price, without);
            }
        }
    }
}

#[test]
fn hand_checked_books() {
    let book = |s: &[f64], b: &[f64]| OrderBookSnapshot::from_prices(s, b).unwrap();
    let iv = clearing_interval(&book(&[-1.0], &[1.0])).unwrap();
    assert_eq!((iv.lower, iv.upper), (-1.0, 1.0));

    let b = book(&[1.0, 2.0, 3.0], &[0.0]).with_market_orders(0, 2);
    let iv = clearing_interval(&b).unwrap();
    assert_eq!((iv.lower, iv.upper), (2.0, 3.0));

    let b = book(&[0.0, 2.0], &[0.0, 1.0])
        .with_market_orders(0, 1)
        .with_tick_size(Some(1.0))
        .unwrap();
    assert_eq!(clear(&b).unwrap().closing_price, 1.0);
    assert_eq!(alternative_closing_price(&b).unwrap(), 0.0);
}
