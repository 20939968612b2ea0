//! Generates a seeded piecewise-constant series and prints its structure.
//!
//! cargo run --example synth_data [seed]

use tvadmm::synth::{generate, SynthConfig};

fn main() -> tvadmm::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let cfg = SynthConfig {
        n_samples: 120,
        segments: 4,
        seed,
        ..SynthConfig::default()
    };
    let synth = generate(&cfg)?;
    println!("segment starts: {:?}", synth.change_points);
    let mut bounds = synth.change_points.clone();
    bounds.insert(0, 0);
    for &b in &bounds {
        println!("level from {b:3}: {:.3}", synth.truth.block(b)[0]);
    }
    let first: Vec<String> = synth
        .data
        .samples()
        .blocks()
        .take(8)
        .map(|b| format!("{:.3}", b[0]))
        .collect();
    println!("first samples: {}", first.join(", "));
    Ok(())
}
