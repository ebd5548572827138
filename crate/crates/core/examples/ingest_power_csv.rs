//! Parse daily point exports, drop fill-value rows and merge districts.
//!
//! ```text
//! cargo run --example ingest_power_csv                 # built-in sample
//! cargo run --example ingest_power_csv -- a.csv b.csv  # your own exports
//! ```

use std::path::PathBuf;

use drought_regimes::ingest::{load_dataset, write_dataset, CleanOptions, ParseOptions};

const SAMPLE: &str = "\
-BEGIN HEADER-
Daily point export
Location: Latitude  24.37   Longitude 88.60
The value for missing source data: -999
-END HEADER-
LAT,LON,YEAR,DOY,ALLSKY_SFC_SW_DWN,T2M,T2MDEW,TS,QV2M,RH2M,PS,WS2M,GWETTOP,GWETROOT,GWETPROF,PRECTOTCORR
24.37,88.6,2020,1,14.1,18.9,11.8,19.2,8.9,67.5,101.5,1.3,0.64,0.70,0.68,0.0
24.37,88.6,2020,2,13.8,19.4,12.3,19.6,9.1,66.1,101.4,1.2,0.66,0.71,0.69,0.1
24.37,88.6,2020,3,-999,19.1,12.0,19.3,9.0,65.8,101.5,1.1,0.65,0.70,0.68,0.0
24.37,88.6,2020,4,14.5,20.2,12.6,20.1,9.3,64.0,101.3,1.4,0.63,0.69,0.67,0.0
";

fn main() -> drought_regimes::Result<()> {
    let args: Vec<PathBuf> = std::env::args().skip(1).map(PathBuf::from).collect();
    let tmp = tempfile::tempdir().map_err(|e| drought_regimes::Error::io("tempdir", e))?;
    let inputs = if args.is_empty() {
        let p = tmp.path().join("rajshahi.csv");
        std::fs::write(&p, SAMPLE).map_err(|e| drought_regimes::Error::io(&p, e))?;
        vec![p]
    } else {
        args
    };

    let (dataset, report) = load_dataset(&inputs, &ParseOptions::default(), &CleanOptions::default())?;
    println!(
        "{} rows in, {} kept, {} dropped for missing values, {} invalid",
        report.rows_in, report.rows_out, report.dropped_missing, report.dropped_invalid
    );
    println!("districts: {:?}", dataset.labels());
    let mut out = Vec::new();
    write_dataset(&dataset, &mut out)?;
    print!("{}", String::from_utf8_lossy(&out));
    Ok(())
}
