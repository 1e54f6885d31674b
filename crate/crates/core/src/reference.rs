//! Reference environments used by examples, tests and the CLI defaults.

use crate::env::{LinearDuct, SoundSpeedProfile};

/// Surface sound speed of the central Arctic ice-covered profile, m/s.
pub const CENTRAL_ICE_C0: f64 = 1434.0;
/// Sound speed at the bottom of the duct, m/s.
pub const CENTRAL_ICE_C400: f64 = 1459.0;
/// Depth of the surface duct, m.
pub const DUCT_DEPTH: f64 = 400.0;
/// Fractional gradient (1459 − 1434)/(1434 · 400), rounded.
pub const DUCT_GRADIENT: f64 = 4.359e-5;

/// The linear duct c(z) = 1434 (1 + 4.359e-5 z), valid to 400 m.
pub fn reference_duct() -> LinearDuct<f64> {
    LinearDuct::new(CENTRAL_ICE_C0, DUCT_GRADIENT, DUCT_DEPTH).expect("valid constants")
}

/// Linear duct continued to `depth` m by the same law.
pub fn linear_duct_profile(depth: f64) -> SoundSpeedProfile<f64> {
    let d = reference_duct();
    SoundSpeedProfile::new("linear duct", vec![(0.0, d.c0), (depth, d.speed_at(depth))]).expect("valid profile")
}

/// Central-ice profile: near-linear duct to 400 m and a slower deep gradient.
pub fn central_ice_profile() -> SoundSpeedProfile<f64> {
    SoundSpeedProfile::new(
        "central ice",
        vec![(0.0, CENTRAL_ICE_C0), (400.0, CENTRAL_ICE_C400), (1660.0, 1473.0)],
    )
    .expect("valid profile")
}

/// Two-channel profile of Canada-Basin type: a warm layer near 60 m over a
/// second minimum near 150 m, merging with the linear duct from 250 m down.
///
/// Below 250 m it equals [`reference_duct`] continued linearly, so comparisons
/// against the linear duct isolate the near-surface structure.
pub fn dual_channel_profile() -> SoundSpeedProfile<f64> {
    let d = reference_duct();
    let mut pts = vec![
        (0.0, 1437.0),
        (30.0, 1441.0),
        (60.0, 1444.0),
        (100.0, 1440.0),
        (150.0, 1436.0),
        (200.0, 1437.0),
    ];
    pts.extend([250.0, 2000.0].map(|z| (z, d.speed_at(z))));
    SoundSpeedProfile::new("dual channel", pts).expect("valid profile")
}
