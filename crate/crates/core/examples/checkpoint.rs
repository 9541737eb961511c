//! Save a run midway, reload it and continue; the result is bitwise equal to
//! the uninterrupted run.
//!
//! ```text
//! cargo run --release --example checkpoint
//! ```

use inls::experiments::{load_checkpoint_for, save_checkpoint};
use inls::integrator::Flow;
use inls::{make_grid, make_params, sample_initial, InitialSpec};

fn main() -> inls::Result<()> {
    let grid = make_grid(30.0, 2048)?;
    let params = make_params(4.0, 0.5)?;
    let flow = Flow::new(&grid, params);
    let u0 = sample_initial(&InitialSpec::sine_packet(1.0, 0.5, 3.0, 2.0), &grid)?;

    let straight = flow.advance(&u0, 1e-3, 2000)?;

    let dir = std::env::temp_dir().join("inls-checkpoint-example");
    std::fs::create_dir_all(&dir).map_err(|e| inls::Error::Io { path: dir.clone(), source: e })?;
    let path = dir.join("half.inls");
    let half = flow.advance(&u0, 1e-3, 1000)?;
    save_checkpoint(&half, &params, &path)?;
    let resumed = flow.advance(&load_checkpoint_for(&path, &grid)?, 1e-3, 1000)?;

    println!("checkpoint {} at t = {}", path.display(), half.t());
    println!("resumed == straight: {}", resumed.values() == straight.values());
    Ok(())
}
