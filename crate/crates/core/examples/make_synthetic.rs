//! Writes a seeded control-chart train/test pair in UCR format.
//!
//! `cargo run --example make_synthetic -- <out_dir> [per_class] [len] [seed] [name]`

use std::path::PathBuf;

use tsdiv::synthetic::{control_charts, to_ucr_text};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let dir = PathBuf::from(args.first().map(String::as_str).unwrap_or("."));
    let per_class: usize = args.get(1).map_or(Ok(10), |s| s.parse())?;
    let len: usize = args.get(2).map_or(Ok(60), |s| s.parse())?;
    let seed: u64 = args.get(3).map_or(Ok(0), |s| s.parse())?;
    let name = args.get(4).map_or("Control", String::as_str);
    std::fs::create_dir_all(&dir)?;
    let train = control_charts(per_class, len, seed)?;
    let test = control_charts(per_class, len, seed.wrapping_add(1))?;
    std::fs::write(dir.join(format!("{name}_TRAIN.csv")), to_ucr_text(&train))?;
    std::fs::write(dir.join(format!("{name}_TEST.csv")), to_ucr_text(&test))?;
    println!("wrote {} + {} series to {}", train.len(), test.len(), dir.display());
    Ok(())
}
