//! Scenario-driven front end: a JSON scenario declares a space, a subset
//! `W` and a list of analyses; running it yields a JSON report and a plain
//! text rendering of the same data.

pub mod run;
pub mod scenario;

pub use run::{run_scenario, run_text, Report, RunOptions, Status};
pub use scenario::{parse, Scenario, ScenarioError};

/// Fixture names with one-line descriptions.
pub fn list_fixtures() -> Vec<(&'static str, &'static str)> {
    coarsesep::fixtures::FIXTURES.to_vec()
}

const SPLIT: &str = "  split      {r, a, collar} used to resolve deep-<i> components (default 1, 1, 1)\n";
const FAMILY: &str = "  family     schedule family {radii: [S...], i, j, collar}; each S gives the schedule\n             (S, i, S - j, j) at the scenario window\n";

/// Parameter documentation for one analysis kind.
pub fn describe(analysis: &str) -> Result<String, String> {
    let body = match analysis {
        "ends" => format!(
            "Counts collar-reaching components outside inner balls and compares them\n\
             with the degree-1 two-scale cohomology rank.\n{FAMILY}\
             default family: S0 = max(1, R/4), radii S0, S0+1, S0+2, i = j = 1, collar 1\n"
        ),
        "separate" => "Deep components of X minus N_A(W) at scale r over several windows.\n\
             \x20 r          Rips scale (default 1)\n\
             \x20 a          thickening A of W (default 1)\n\
             \x20 collar     collar width (default 1)\n\
             \x20 windows    window radii (default R-4, R-2, R)\n"
            .to_string(),
        "essential" => format!(
            "Whether the W-class at infinity dies inside C union W.\n\
             \x20 component  fixture component name or deep-<i>\n\
             \x20 n          dimension (default 1)\n{FAMILY}\
             default family: radii 4, 5, 6, i = 1, j = 2, collar 2\n{SPLIT}"
        ),
        "almost-essential" => format!(
            "Smallest B in the grid with W inside N_B(C minus N_A(W)) off the collar.\n\
             \x20 component  fixture component name or deep-<i>\n\
             \x20 a          thickening A (default 0)\n\
             \x20 collar     collar width (default 2)\n\
             \x20 grid       candidate B values (default 0..=(R - collar)/2)\n{SPLIT}"
        ),
        "mv" => "Mayer-Vietoris for N_A(W) union C and N_A(W) union (X minus C): short\n\
             exactness, connecting map on the degree-1 classes of N_A(W), exactness\n\
             at every spot and localized supports.\n\
             \x20 component  fixture component name or deep-<i>, resolved at (r, a, collar)\n\
             \x20 r          Rips scale (default 2)\n\
             \x20 a          thickening A (default 1)\n\
             \x20 collar     collar width (default 1)\n\
             \x20 degree     top degree n (default 2)\n"
            .to_string(),
        "mobility" => format!(
            "Coarse manifold detector and stabilizer comparison for a class.\n\
             \x20 n          degree of the class (default 1)\n\
             \x20 r          Rips scale (default 1)\n\
             \x20 collar     collar width (default 1)\n\
             \x20 d          list of D values (required)\n\
             \x20 class      {{kind: at-infinity}} (default), {{kind: prefix, word}} for free\n\
             \x20            groups, or {{kind: half-space, axis, at}} for Z^n\n{FAMILY}\
             default family: one schedule S = max(r, (R - collar)/2 - 1), i = j = r\n\
             \x20 stabilizer compare Stab with Mob at the largest D (default true)\n"
        ),
        "acyclicity" => "Uniform acyclicity functions lambda and mu at sampled centers.\n\
             \x20 k_max        largest degree (default 1)\n\
             \x20 centers      words or coordinates (default the origin)\n\
             \x20 inner_scales (default [1])\n\
             \x20 radii        (default [1, 2, 3])\n\
             \x20 lambda_slack, mu_slack  search bounds (default 4, 4)\n"
            .to_string(),
        "pd-signature" => format!(
            "Checks the cohomology proxies in degrees 1..n read 0, ..., 0, 1.\n\
             \x20 component  optional; the region is the component with W\n\
             \x20 n          dimension (required)\n{FAMILY}\
             default family: radii 4, 5, 6, i = 1, j = 2, collar 2\n{SPLIT}"
        ),
        "almost-invariant" => "Stabilizer trace and the almost-invariant set extracted from a\n\
             component of the complement of a subgroup.\n\
             \x20 component  deep-<i>\n\
             \x20 r, a, collar  split parameters (default 1, 1, 1)\n"
            .to_string(),
        other => {
            return Err(format!(
                "unknown analysis '{other}' (known: {})",
                scenario::ANALYSES.join(", ")
            ))
        }
    };
    Ok(format!("{analysis}\n{body}"))
}
