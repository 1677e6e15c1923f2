//! Writes the sample inputs under `fixtures/`.
//!
//! ```text
//! cargo run -p helmsim-core --example make_fixtures -- fixtures
//! ```

use std::path::PathBuf;

use helmsim_core::config::to_json_string;
use helmsim_core::environment::write_weather;
use helmsim_core::harness::{synthetic_voyage, SyntheticOptions};
use helmsim_core::voyage::write_voyage;
use helmsim_core::Vessel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures".into()));
    std::fs::create_dir_all(&dir)?;
    let vessel = Vessel::synthetic();
    std::fs::write(dir.join("vessel.json"), to_json_string(vessel.config()))?;

    let opts = SyntheticOptions {
        duration_s: 600,
        ..SyntheticOptions::default()
    };
    let clean = synthetic_voyage(&vessel, &opts)?;
    write_voyage(&clean.records, dir.join("voyage_clean.csv"))?;
    write_weather(&clean.weather, dir.join("weather.csv"))?;
    let biased = synthetic_voyage(
        &vessel,
        &SyntheticOptions {
            heading_bias: 10f64.to_radians(),
            ..opts
        },
    )?;
    write_voyage(&biased.records, dir.join("voyage_biased.csv"))?;

    std::fs::write(
        dir.join("controls.csv"),
        "t_s,rudder_deg,rpm\n0,0,106\n20,20,106\n60,-20,106\n100,0,100\n",
    )?;
    Ok(())
}
