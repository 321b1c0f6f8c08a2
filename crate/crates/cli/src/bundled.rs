//! Scenarios shipped inside the binary.

pub const BUNDLED: &[(&str, &str)] = &[
    ("flat_plane", include_str!("../scenarios/flat_plane.scn")),
    ("flat_torus", include_str!("../scenarios/flat_torus.scn")),
    (
        "sphere_example",
        include_str!("../scenarios/sphere_example.scn"),
    ),
    (
        "stereographic_sphere",
        include_str!("../scenarios/stereographic_sphere.scn"),
    ),
    (
        "hyperbolic_disk",
        include_str!("../scenarios/hyperbolic_disk.scn"),
    ),
    (
        "three_sphere",
        include_str!("../scenarios/three_sphere.scn"),
    ),
    (
        "nonflat_moebius",
        include_str!("../scenarios/nonflat_moebius.scn"),
    ),
    (
        "sphere_violation",
        include_str!("../scenarios/sphere_violation.scn"),
    ),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// First `description = "..."` line of a bundled scenario.
pub fn description(text: &str) -> &str {
    text.lines()
        .find_map(|l| {
            l.strip_prefix("description = \"")
                .and_then(|r| r.strip_suffix('"'))
        })
        .unwrap_or("")
}
