//! Runs a config-file scenario through the library, as the binary does.

use std::path::PathBuf;

use nmep::scenario::{run, Action, Format, RunOptions, ScenarioConfig};

fn main() -> Result<(), nmep::error::Error> {
    let cfg = ScenarioConfig::from_toml(
        r#"
        [model]
        lambda = 1.0
        gamma = 0.5
        density = "bandgap"
        q = 0.5

        [action]
        from = 0.05
        to = 0.6
        points = 56
        "#,
    )?;
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("nmep-scenario"));
    let summary = run(&cfg, Action::Sweep, &RunOptions { out_dir: out, formats: vec![Format::Csv, Format::Svg] })?;
    for l in summary.lines {
        println!("{l}");
    }
    for f in summary.files {
        println!("wrote {}", f.display());
    }
    Ok(())
}
