//! Hexagonal macro layout with wrap-around, the Manhattan microcell overlay,
//! and one user drop.
//!
//! `cargo run --example layout -- [seed]`

use multilayer_power::geometry::{
    build_hex_layout, build_manhattan_overlay, drop_users, Point, WrapAround, DEFAULT_MAX_ATTEMPTS,
};
use multilayer_power::propagation::PropagationParams;

fn main() -> multilayer_power::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(1, |s| s.parse().expect("seed"));
    let layout = build_hex_layout(19, 1.0)?;
    let wrap = WrapAround::for_layout(&layout);
    println!(
        "{} cells, {} sectors, site spacing {:.4} km",
        layout.cell_count,
        layout.sector_count(),
        layout.site_spacing_km()
    );

    // a point just outside the right edge is close to the far side
    let a = Point::new(4.4, 0.0);
    let b = Point::new(-4.4, 0.0);
    println!(
        "({}, {}) to ({}, {}): straight {:.3} km, wrapped {:.3} km",
        a.x,
        a.y,
        b.x,
        b.y,
        a.distance(b),
        wrap.wrapped_distance(a, b)
    );

    let overlay = build_manhattan_overlay(&layout, 200.0, 30.0)?;
    println!(
        "{} microcells, per cell {:?}",
        overlay.total(),
        overlay.per_cell_counts
    );

    let params = PropagationParams::default();
    let drop = drop_users(&layout, &wrap, &params, seed, DEFAULT_MAX_ATTEMPTS)?;
    let attempts: usize = drop.attempts.iter().sum();
    println!(
        "drop seed {seed}: {attempts} candidates for {} users",
        drop.user_positions.len()
    );
    for (i, p) in drop.user_positions.iter().take(6).enumerate() {
        println!(
            "user {i}: ({:+.3}, {:+.3}) km, sector {} (boresight {} deg)",
            p.x,
            p.y,
            drop.serving_sector[i],
            layout.sector_boresight_deg(drop.serving_sector[i])
        );
    }
    Ok(())
}
