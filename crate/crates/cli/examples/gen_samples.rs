//! Regenerates the bundled synthetic samples under `data/`.
//!
//! ```text
//! cargo run -p movepat-cli --example gen_samples -- data
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use chrono::{Days, NaiveDate};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const DAYS: usize = 120;
const CATEGORIES: [&str; 6] = ["Pet", "Beverages", "Dairy", "Cleaning", "Produce", "Bakery"];

/// Multiplicative price shape for one of the archetypes.
fn shape(archetype: usize, t: usize, phase: usize) -> f64 {
    let t = t + phase;
    match archetype % 8 {
        0 => 1.0,
        1 => {
            if t >= 60 {
                1.15
            } else {
                1.0
            }
        }
        2 => {
            if t >= 45 {
                0.85
            } else {
                1.0
            }
        }
        3 => {
            if t % 30 < 7 {
                0.8
            } else {
                1.0
            }
        }
        4 => 1.0 + 0.05 * (t / 20) as f64,
        5 => {
            if (t / 7).is_multiple_of(2) {
                1.0
            } else {
                1.1
            }
        }
        6 => {
            if (40..80).contains(&t) {
                1.2
            } else {
                1.0
            }
        }
        _ => 1.0 - 0.04 * (t / 25) as f64,
    }
}

fn price_sample(rng: &mut ChaCha8Rng) -> String {
    let start = NaiveDate::from_ymd_opt(2022, 1, 1).unwrap();
    let mut out = String::from("series_id,date,value,category\n");
    for p in 0..64 {
        let id = format!("P{p:03}");
        let category = CATEGORIES[p % CATEGORIES.len()];
        let archetype = rng.random_range(0..8);
        let phase = rng.random_range(0..10);
        let base = (rng.random_range(1.0..40.0_f64) * 100.0).round() / 100.0;
        // four series are mostly absent and must be dropped as sparse
        let missing_rate = if p % 16 == 15 { 0.9 } else { 0.05 };
        for t in 0..DAYS {
            if rng.random_bool(missing_rate) {
                continue;
            }
            let jitter = if rng.random_bool(0.05) {
                rng.random_range(-0.03..0.03)
            } else {
                0.0
            };
            let v = (base * (shape(archetype, t, phase) + jitter) * 100.0).round() / 100.0;
            let date = start + Days::new(t as u64);
            writeln!(out, "{id},{date},{v},{category}").unwrap();
        }
    }
    out.push_str("P999,2022-13-01,1.0,Pet\n");
    out.push_str("P998,2022-01-05,n/a,Pet\n");
    out
}

fn sales_sample(rng: &mut ChaCha8Rng) -> String {
    let start = NaiveDate::from_ymd_opt(2017, 1, 1).unwrap();
    let mut out = String::from("series_id,date,value,category,store\n");
    for item in 0..20 {
        let id = format!("I{item:03}");
        let category = CATEGORIES[item % CATEGORIES.len()];
        let archetype = rng.random_range(0..8);
        let level = rng.random_range(5.0..60.0_f64);
        for store in 1..=3 {
            let phase = rng.random_range(0..5);
            let store_level = level * (0.6 + 0.2 * store as f64);
            for t in 0..DAYS {
                if rng.random_bool(0.04) {
                    continue;
                }
                let weekly = if t % 7 >= 5 { 1.3 } else { 1.0 };
                let noise = rng.random_range(0.85..1.15);
                let v = (store_level * shape(archetype, t, phase) * weekly * noise).round();
                let date = start + Days::new(t as u64);
                writeln!(out, "{id},{date},{v},{category},{store}").unwrap();
            }
        }
    }
    out
}

fn main() {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "data".into()));
    fs::create_dir_all(&dir).expect("create output directory");
    let mut rng = ChaCha8Rng::seed_from_u64(20240517);
    fs::write(dir.join("price_sample.csv"), price_sample(&mut rng)).expect("write price sample");
    fs::write(dir.join("sales_sample.csv"), sales_sample(&mut rng)).expect("write sales sample");
}
