//! Minute-bar pipeline: write synthetic OHLCV files (plus a deliberately
//! malformed one), load and clean them, build a price series and analyze it.
//!
//! cargo run --release --example market_pipeline

use chrono::NaiveDate;
use qpc::market::{
    bars_from_closes, build_series, load_ohlc_csv, write_ohlc_csv, OhlcSchema, PriceField,
    SeriesTransform,
};
use qpc::spectral::{detect_hotspots, segmented_bispectrum, HotspotConfig, SegmentConfig};
use qpc::synthetic::{gen_triad, Coupling, TriadSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("qpc_market_example");
    std::fs::create_dir_all(&dir)?;
    let open = NaiveDate::from_ymd_opt(2024, 1, 1)
        .and_then(|d| d.and_hms_opt(9, 15, 0))
        .ok_or("date")?;

    for coupling in [Coupling::PhaseSum, Coupling::Independent] {
        let mut spec = TriadSpec::new(0.22, 0.375, coupling, 64 * 4096, 1);
        spec.phase_block = Some(4096);
        let closes: Vec<f64> = gen_triad(&spec)?
            .values()
            .iter()
            .map(|v| 100.0 + v)
            .collect();
        let path = dir.join(format!("{coupling:?}.csv").to_lowercase());
        write_ohlc_csv(&path, &bars_from_closes(&closes, open, 375, 0.05, "SYN"))?;

        let (ticks, cleaning) = load_ohlc_csv(&path, &OhlcSchema::default())?;
        let series = build_series(&ticks, PriceField::Close, SeriesTransform::Demean)?;
        let grid = segmented_bispectrum(
            &series,
            &SegmentConfig::with_segment_count(series.len(), 64)?,
        )?;
        let report = detect_hotspots(&grid, &HotspotConfig::default());
        println!(
            "{}: {} bars in {} sessions -> {}",
            path.display(),
            cleaning.n_records_out,
            cleaning.sessions_detected,
            report.verdict
        );
    }

    let messy = dir.join("messy.csv");
    std::fs::write(
        &messy,
        "datetime,open,high,low,close,volume\n\
         2024-01-02 09:15,100,101,99,100.5,10\n\
         2024-01-02 09:15,100,101,99,100.6,10\n\
         2024-01-02 09:16,100.5,100,101,100.8,12\n\
         2024-01-02 09:20,100.8,101,100.5,100.9,8\n\
         garbage,1,2,3,4,5\n\
         2024-01-03 09:15,101,102,100,101.5,7\n",
    )?;
    let (_, cleaning) = load_ohlc_csv(&messy, &OhlcSchema::default())?;
    println!("\n{}: {cleaning:#?}", messy.display());
    Ok(())
}
