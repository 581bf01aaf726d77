//! Brute-force oracles shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use auction_tails::auction::{
    build_curves, clear, clearing_interval, LimitOrder, OrderBookSnapshot, Side,
};
use rand::Rng;

/// A small book on the integer grid: `(side, price, size)` plus market volumes.
#[derive(Debug, Clone)]
pub struct SmallBook {
    pub orders: Vec<(Side, i32, u64)>,
    pub market_sell: u64,
    pub market_buy: u64,
}

impl SmallBook {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let n = rng.gen_range(0..=20);
        let orders = (0..n)
            .map(|_| {
                let side = if rng.gen_bool(0.5) {
                    Side::Sell
                } else {
                    Side::Buy
                };
                (side, rng.gen_range(-5..=5), rng.gen_range(1..=3))
            })
            .collect();
        Self {
            orders,
            market_sell: rng.gen_range(0..=4),
            market_buy: rng.gen_range(0..=4),
        }
    }

    pub fn snapshot(&self) -> OrderBookSnapshot {
        let pick = |side: Side| {
            self.orders
                .iter()
                .filter(|o| o.0 == side)
                .map(|&(s, p, q)| LimitOrder::new(s, p as f64, q).unwrap())
                .collect::<Vec<_>>()
        };
        OrderBookSnapshot::new(pick(Side::Sell), pick(Side::Buy))
            .unwrap()
            .with_market_orders(self.market_sell, self.market_buy)
    }

    /// Sells at `p` become buys at `-p` and vice versa.
    pub fn swapped(&self) -> Self {
        Self {
            orders: self
                .orders
                .iter()
                .map(|&(s, p, q)| {
                    let s = match s {
                        Side::Sell => Side::Buy,
                        Side::Buy => Side::Sell,
                    };
                    (s, -p, q)
                })
                .collect(),
            market_sell: self.market_buy,
            market_buy: self.market_sell,
        }
    }

    /// Every order of size `q` becomes `q` unit orders.
    pub fn split(&self) -> Self {
        Self {
            orders: self
                .orders
                .iter()
                .flat_map(|&(s, p, q)| std::iter::repeat_n((s, p, 1), q as usize))
                .collect(),
            ..self.clone()
        }
    }

    fn volume_of(&self, side: Side) -> u64 {
        self.orders
            .iter()
            .filter(|o| o.0 == side)
            .map(|o| o.2)
            .sum()
    }

    pub fn supply(&self, x: i32) -> u64 {
        self.orders
            .iter()
            .filter(|o| o.0 == Side::Sell && o.1 <= x)
            .map(|o| o.2)
            .sum()
    }

    pub fn demand(&self, x: i32) -> u64 {
        self.orders
            .iter()
            .filter(|o| o.0 == Side::Buy && o.1 > x)
            .map(|o| o.2)
            .sum()
    }

    pub fn volume(&self, x: i32) -> u64 {
        (self.supply(x) + self.market_sell).min(self.demand(x) + self.market_buy)
    }

    pub fn breakpoints(&self) -> Vec<i32> {
        let mut p: Vec<i32> = self.orders.iter().map(|o| o.1).collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// Interval by scanning `g` at every order price; `None` if the auction fails.
    pub fn brute_interval(&self) -> Option<(i32, i32)> {
        let delta = self.market_buy as i64 - self.market_sell as i64;
        let (n_a, n_b) = (
            self.volume_of(Side::Sell) as i64,
            self.volume_of(Side::Buy) as i64,
        );
        if delta <= -n_b || delta >= n_a {
            return None;
        }
        let g = |x: i32| self.supply(x) as i64 - self.demand(x) as i64 - delta;
        let bp = self.breakpoints();
        let lower = *bp.iter().find(|&&x| g(x) >= 0)?;
        let upper = *bp.iter().find(|&&x| g(x) > 0)?;
        Some((lower, upper))
    }
}

fn interval(book: &SmallBook) -> Option<(f64, f64)> {
    clearing_interval(&book.snapshot())
        .ok()
        .map(|i| (i.lower, i.upper))
}

/// The engine's interval equals the scan, and every grid price in
/// `[X_lower, X_upper)` executes at least the volume of any breakpoint.
pub fn check_volume_maximization(book: &SmallBook) -> Result<(), String> {
    let got = interval(book);
    let want = book.brute_interval();
    if got != want.map(|(l, u)| (l as f64, u as f64)) {
        return Err(format!(
            "interval {got:?} != brute force {want:?} for {book:?}"
        ));
    }
    let Some((lower, upper)) = want else {
        return Ok(());
    };
    let best = book
        .breakpoints()
        .into_iter()
        .map(|q| book.volume(q))
        .max()
        .unwrap_or(0);
    for p in lower..upper {
        if book.volume(p) < best {
            return Err(format!(
                "volume {} at {p} < {best} for {book:?}",
                book.volume(p)
            ));
        }
    }
    if let Ok(out) = clear(&book.snapshot()) {
        let p = out.closing_price as i32;
        if out.executed_volume != book.volume(p) {
            return Err(format!(
                "executed volume {} != {} at {p}",
                out.executed_volume,
                book.volume(p)
            ));
        }
    }
    Ok(())
}

pub fn check_side_swap(book: &SmallBook) -> Result<(), String> {
    let a = interval(book);
    let b = interval(&book.swapped());
    let mirrored = a.map(|(l, u)| (-u, -l));
    if mirrored == b {
        Ok(())
    } else {
        Err(format!("swap of {a:?} gave {b:?} for {book:?}"))
    }
}

pub fn check_matched_pair(book: &SmallBook) -> Result<(), String> {
    let mut more = book.clone();
    more.market_sell += 1;
    more.market_buy += 1;
    let (a, b) = (interval(book), interval(&more));
    if a == b {
        Ok(())
    } else {
        Err(format!("matched pair moved {a:?} to {b:?} for {book:?}"))
    }
}

pub fn check_split(book: &SmallBook) -> Result<(), String> {
    let split = book.split();
    let (s1, d1) = build_curves(&book.snapshot());
    let (s2, d2) = build_curves(&split.snapshot());
    for x in -6..=6 {
        let x = x as f64 + 0.5;
        if s1.eval(x) != s2.eval(x) || d1.eval(x) != d2.eval(x) {
            return Err(format!("curves differ at {x} for {book:?}"));
        }
    }
    let (a, b) = (clear(&book.snapshot()).ok(), clear(&split.snapshot()).ok());
    if a == b {
        Ok(())
    } else {
        Err(format!("split changed {a:?} to {b:?}"))
    }
}

/// `P(Bin(n_b, 1 - p_b) >= Bin(n_a, p_a) - delta + 1)` by enumerating all
/// `2^(n_a + n_b)` placements of the orders relative to `M`.
pub fn enumerate_survival(p_a: f64, p_b: f64, n_a: u32, n_b: u32, delta: i64) -> f64 {
    let n = n_a + n_b;
    let mut total = 0.0;
    for mask in 0u32..(1 << n) {
        let mut prob = 1.0;
        let (mut k, mut l) = (0i64, 0i64);
        for i in 0..n {
            let hit = mask >> i & 1 == 1;
            if i < n_a {
                // sell at or below M
                prob *= if hit { p_a } else { 1.0 - p_a };
                k += hit as i64;
            } else {
                // buy strictly above M
                prob *= if hit { 1.0 - p_b } else { p_b };
                l += hit as i64;
            }
        }
        if l > k - delta {
            total += prob;
        }
    }
    total
}

pub mod golden {
    use std::fs;
    use std::path::{Path, PathBuf};

    use auction_tails::pipeline::synthetic::{write_fixture, SyntheticFixture};
    use auction_tails::pipeline::{run_to_dir, PipelineOptions, GROUP_SUMMARY, STOCK_REPORT};
    use sha2::{Digest, Sha256};

    pub const UPDATE_VAR: &str = "UPDATE_GOLDEN";
    pub const MANIFEST: &str = "manifest.sha256";

    pub fn golden_dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/golden")
    }

    pub fn sha256_hex(path: &Path) -> String {
        Sha256::digest(fs::read(path).unwrap())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    fn files_under(root: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        let mut stack = vec![root.to_path_buf()];
        while let Some(dir) = stack.pop() {
            for entry in fs::read_dir(&dir).unwrap() {
                let path = entry.unwrap().path();
                if path.is_dir() {
                    stack.push(path);
                } else {
                    out.push(path);
                }
            }
        }
        out.sort();
        out
    }

    /// `<sha256>  <relative path>` for every input and output file.
    pub fn manifest(root: &Path) -> String {
        files_under(root)
            .iter()
            .map(|p| {
                let rel = p
                    .strip_prefix(root)
                    .unwrap()
                    .to_string_lossy()
                    .replace('\\', "/");
                format!("{}  {rel}\n", sha256_hex(p))
            })
            .collect()
    }

    /// Generates the default synthetic fixture into `root/input` and runs the
    /// pipeline into `root/output`.
    pub fn run_default(root: &Path) -> auction_tails::Result<()> {
        let input = root.join("input");
        write_fixture(&SyntheticFixture::default(), &input)?;
        run_to_dir(
            &input.join("orders.csv"),
            &input.join("trades.csv"),
            &input.join("metadata.csv"),
            &root.join("output"),
            &PipelineOptions::default(),
        )?;
        Ok(())
    }

    /// Compares a finished run with the shipped golden files, or rewrites
    /// them when `UPDATE_GOLDEN` is set.
    pub fn check(root: &Path) -> Result<(), String> {
        let golden = golden_dir();
        let produced = [
            (
                STOCK_REPORT,
                fs::read_to_string(root.join("output").join(STOCK_REPORT)).unwrap(),
            ),
            (
                GROUP_SUMMARY,
                fs::read_to_string(root.join("output").join(GROUP_SUMMARY)).unwrap(),
            ),
            (MANIFEST, manifest(root)),
        ];
        if std::env::var_os(UPDATE_VAR).is_some() {
            fs::create_dir_all(&golden).unwrap();
            for (name, text) in &produced {
                fs::write(golden.join(name), text).unwrap();
            }
            return Ok(());
        }
        for (name, text) in &produced {
            let want = fs::read_to_string(golden.join(name)).map_err(|e| format!("{name}: {e}"))?;
            if &want != text {
                let line = want
                    .lines()
                    .zip(text.lines())
                    .find(|(a, b)| a != b)
                    .map(|(a, b)| format!("expected {a:?}, got {b:?}"))
                    .unwrap_or_else(|| "line counts differ".into());
                return Err(format!("{name} differs from the golden copy: {line}"));
            }
        }
        Ok(())
    }

    /// Largest absolute deviations `(exponent, c)` of the recovered per-stock
    /// parameters in `root/output` from the planted ones.
    pub fn planted_deviation(root: &Path) -> Result<(f64, f64), String> {
        let path = root.join("output").join(STOCK_REPORT);
        let mut reader = csv::Reader::from_path(&path).map_err(|e| e.to_string())?;
        let headers = reader.headers().map_err(|e| e.to_string())?.clone();
        let rows: Vec<csv::StringRecord> = reader
            .records()
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let stocks = SyntheticFixture::default().stocks;
        if rows.len() != stocks.len() {
            return Err(format!(
                "{} report rows for {} stocks",
                rows.len(),
                stocks.len()
            ));
        }
        let (mut worst_a, mut worst_c) = (0.0f64, 0.0f64);
        for (stock, r) in stocks.iter().zip(&rows) {
            let col = |name: &str| -> Result<f64, String> {
                let i = headers
                    .iter()
                    .position(|h| h == name)
                    .ok_or(format!("no column {name}"))?;
                r[i].parse()
                    .map_err(|_| format!("{} {name}: {:?} is not a number", stock.id, &r[i]))
            };
            if r[0] != *stock.id {
                return Err(format!("row {} is not {}", &r[0], stock.id));
            }
            for (name, planted) in [
                ("a_A_left", stock.a_sell_left),
                ("a_B_left", stock.a_buy_left),
                ("a_A_right", stock.a_sell_right),
                ("a_B_right", stock.a_buy_right),
            ] {
                worst_a = worst_a.max((col(name)? - planted).abs());
            }
            worst_c = worst_c.max((col("c")? - stock.c).abs());
        }
        Ok((worst_a, worst_c))
    }
}
