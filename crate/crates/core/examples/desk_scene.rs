//! Writes the demo desk scene: `cargo run --example desk_scene -- <dir>`.

use std::path::PathBuf;

fn main() -> graspgen_core::Result<()> {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| "desk".into());
    let path = graspgen_core::demo::write_desk_scene(&dir)?;
    println!("{}", path.display());
    Ok(())
}
