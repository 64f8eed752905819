//! ISO 3166-1 alpha-2 country table and the shipped holdout presets.
//!
//! Samples carry alpha-2 codes; human-readable names are resolved through
//! this table for reports. Each entry also carries a rough bounding box and
//! terrain prior used by the synthetic generator.

use std::collections::BTreeSet;

/// One country entry: code, display name, lat/lon bounding box (degrees),
/// and a coarse terrain prior (mean elevation m, mean slope deg).
#[derive(Debug, Clone, Copy)]
pub struct CountryInfo {
    pub code: &'static str,
    pub name: &'static str,
    pub lat_range: (f64, f64),
    pub lon_range: (f64, f64),
    pub elevation_m: f64,
    pub slope_deg: f64,
}

/// Countries known to the harness. Boxes are coarse interior boxes, not
/// legal borders; they only need to place synthetic samples plausibly.
pub const COUNTRIES: &[CountryInfo] = &[
    CountryInfo { code: "AR", name: "Argentina", lat_range: (-38.0, -30.0), lon_range: (-65.0, -58.0), elevation_m: 300.0, slope_deg: 1.5 },
    CountryInfo { code: "AT", name: "Austria", lat_range: (46.8, 48.6), lon_range: (13.0, 16.5), elevation_m: 600.0, slope_deg: 6.0 },
    CountryInfo { code: "BE", name: "Belgium", lat_range: (49.6, 51.3), lon_range: (2.8, 5.8), elevation_m: 120.0, slope_deg: 1.5 },
    CountryInfo { code: "BR", name: "Brazil", lat_range: (-25.0, -12.0), lon_range: (-55.0, -45.0), elevation_m: 500.0, slope_deg: 2.5 },
    CountryInfo { code: "DE", name: "Germany", lat_range: (48.0, 54.0), lon_range: (7.0, 13.5), elevation_m: 250.0, slope_deg: 2.0 },
    CountryInfo { code: "ES", name: "Spain", lat_range: (37.0, 43.0), lon_range: (-8.0, 2.0), elevation_m: 650.0, slope_deg: 3.5 },
    CountryInfo { code: "ET", name: "Ethiopia", lat_range: (6.0, 13.0), lon_range: (36.0, 42.0), elevation_m: 1800.0, slope_deg: 5.0 },
    CountryInfo { code: "FR", name: "France", lat_range: (44.0, 49.5), lon_range: (-1.0, 6.0), elevation_m: 250.0, slope_deg: 2.0 },
    CountryInfo { code: "GR", name: "Greece", lat_range: (37.5, 41.0), lon_range: (21.0, 26.0), elevation_m: 500.0, slope_deg: 5.0 },
    CountryInfo { code: "ID", name: "Indonesia", lat_range: (-8.0, 0.0), lon_range: (105.0, 115.0), elevation_m: 350.0, slope_deg: 4.0 },
    CountryInfo { code: "IT", name: "Italy", lat_range: (40.5, 45.5), lon_range: (8.0, 15.0), elevation_m: 400.0, slope_deg: 4.0 },
    CountryInfo { code: "LV", name: "Latvia", lat_range: (56.0, 57.8), lon_range: (21.5, 27.5), elevation_m: 90.0, slope_deg: 0.8 },
    CountryInfo { code: "MA", name: "Morocco", lat_range: (30.5, 35.0), lon_range: (-9.0, -4.0), elevation_m: 700.0, slope_deg: 4.0 },
    CountryInfo { code: "MG", name: "Madagascar", lat_range: (-22.0, -16.0), lon_range: (44.5, 48.5), elevation_m: 900.0, slope_deg: 4.5 },
    CountryInfo { code: "MZ", name: "Mozambique", lat_range: (-24.0, -14.0), lon_range: (32.5, 38.5), elevation_m: 300.0, slope_deg: 2.0 },
    CountryInfo { code: "NG", name: "Nigeria", lat_range: (7.0, 12.5), lon_range: (4.0, 11.0), elevation_m: 350.0, slope_deg: 1.8 },
    CountryInfo { code: "TZ", name: "Tanzania", lat_range: (-9.0, -3.0), lon_range: (31.5, 38.0), elevation_m: 1100.0, slope_deg: 3.0 },
    CountryInfo { code: "US", name: "United States", lat_range: (36.0, 46.0), lon_range: (-100.0, -84.0), elevation_m: 300.0, slope_deg: 1.2 },
];

/// Looks up a country by alpha-2 code.
pub fn lookup(code: &str) -> Option<&'static CountryInfo> {
    COUNTRIES.iter().find(|c| c.code == code)
}

/// Display name for a code, falling back to the code itself.
pub fn display_name(code: &str) -> &str {
    lookup(code).map(|c| c.name).unwrap_or(code)
}

/// Shipped holdout preset for the binary cropland task:
/// Spain, Nigeria, Latvia, Tanzania, Ethiopia, Argentina.
pub fn cropland_holdout_preset() -> BTreeSet<String> {
    ["ES", "NG", "LV", "TZ", "ET", "AR"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

/// Shipped holdout preset for the crop type task: Spain, Latvia, Austria,
/// Brazil, Tanzania, Ethiopia, Madagascar, Mozambique, Morocco, Indonesia.
pub fn croptype_holdout_preset() -> BTreeSet<String> {
    ["ES", "LV", "AT", "BR", "TZ", "ET", "MG", "MZ", "MA", "ID"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}
