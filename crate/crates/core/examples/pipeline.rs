//! The whole pipeline on the fixture configuration, written to a temporary
//! directory.

use std::path::PathBuf;

use crisis_pulse::pipeline::{run_pipeline, PipelineConfig, MANIFEST};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let conf = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/pipeline/pipeline.conf")
    });
    let mut cfg = PipelineConfig::load(conf)?;
    cfg.out = std::env::temp_dir().join("crisis-pulse-example");
    let report = run_pipeline(&cfg)?;
    print!("{}", report.render());
    println!("\nartifacts in {}", cfg.out.display());
    print!("{}", std::fs::read_to_string(cfg.out.join(MANIFEST))?);
    Ok(())
}
