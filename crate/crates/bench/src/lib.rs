//! Fixtures shared by the benchmarks.

use perc_core::TorusSpec;

/// Tori of increasing volume at dimension seven.
pub fn d7(side: u32) -> TorusSpec {
    TorusSpec::nearest_neighbor(7, side).expect("valid spec")
}

/// Densities close to the internal critical point of `d7(side)` for `side` in 3..=5.
pub fn d7_critical(side: u32) -> f64 {
    match side {
        3 => 0.017,
        4 => 0.045,
        _ => 0.058,
    }
}
