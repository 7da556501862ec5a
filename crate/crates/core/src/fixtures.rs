//! Lattice fixtures: induced subgraphs of Z² and Z³ clipped to an L∞ box,
//! with a distinguished subset W and named component masks.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::metric::{lattice_subgraph, FiniteMetricSpace, Label, SubsetMask};

pub const FIXTURES: &[(&str, &str)] = &[
    (
        "fig1_halfplane_flap",
        "lower half-plane with the quadrant x >= 0 attached above the x-axis; W = x-axis",
    ),
    (
        "fig2_plane_fin",
        "half-space z <= 0 with the fin 1 <= z <= max(|x|,|y|) attached; W = plane z = 0",
    ),
    ("line_in_plane", "Z^2 with W = x-axis"),
    ("plane_in_space", "Z^3 with W = plane z = 0"),
    (
        "pocket_in_plane",
        "Z^2 with W = x-axis and a U-shaped wall enclosing a 3x3 pocket above it",
    ),
];

/// A lattice fixture clipped to a window.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub space: Arc<FiniteMetricSpace>,
    pub w: SubsetMask,
    pub components: BTreeMap<String, SubsetMask>,
}

impl Fixture {
    pub fn component(&self, name: &str) -> Result<&SubsetMask> {
        self.components
            .get(name)
            .ok_or_else(|| Error::InvalidParameter(format!("fixture {} has no component {name}", self.name)))
    }
}

fn box_points(dim: usize, r: i32) -> Vec<Vec<i32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

fn in_pocket_wall(p: &[i32]) -> bool {
    let (x, y) = (p[0], p[1]);
    ((x == 0 || x == 4) && (1..=4).contains(&y)) || (y == 4 && (0..=4).contains(&x))
}

type Pred = fn(&[i32]) -> bool;
type Layout = (Vec<Vec<i32>>, Pred, Vec<(&'static str, Pred)>);

/// Builds a named fixture at the given window radius.
pub fn grid_fixture(name: &str, window: u32) -> Result<Fixture> {
    let r = window as i32;
    let (points, w_pred, comps): Layout = match name {
        "fig1_halfplane_flap" => (
            box_points(2, r)
                .into_iter()
                .filter(|p| p[1] <= 0 || p[0] >= 0)
                .collect(),
            |p| p[1] == 0,
            vec![("bottom", |p| p[1] < 0), ("top", |p| p[0] >= 0 && p[1] > 0)],
        ),
        "fig2_plane_fin" => (
            box_points(3, r)
                .into_iter()
                .filter(|p| p[2] <= 0 || p[2] <= p[0].abs().max(p[1].abs()))
                .collect(),
            |p| p[2] == 0,
            vec![("bottom", |p| p[2] < 0), ("top", |p| p[2] > 0)],
        ),
        "line_in_plane" => (
            box_points(2, r),
            |p| p[1] == 0,
            vec![("upper", |p| p[1] > 0), ("lower", |p| p[1] < 0)],
        ),
        "plane_in_space" => (
            box_points(3, r),
            |p| p[2] == 0,
            vec![("upper", |p| p[2] > 0), ("lower", |p| p[2] < 0)],
        ),
        "pocket_in_plane" => {
            if r < 6 {
                return Err(Error::WindowTooSmall(
                    "pocket_in_plane needs window radius at least 6".into(),
                ));
            }
            (
                box_points(2, r).into_iter().filter(|p| !in_pocket_wall(p)).collect(),
                |p| p[1] == 0,
                vec![
                    ("pocket", |p| (1..=3).contains(&p[0]) && (1..=3).contains(&p[1])),
                    ("upper", |p| {
                        p[1] > 0 && !((1..=3).contains(&p[0]) && (1..=3).contains(&p[1]))
                    }),
                    ("lower", |p| p[1] < 0),
                ],
            )
        }
        other => return Err(Error::UnknownFixture(other.to_string())),
    };
    let space = lattice_subgraph(points, window)?;
    let coords = |i: u32| match space.label(i) {
        Some(Label::Lattice(c)) => c.clone(),
        _ => unreachable!("lattice fixtures label every point"),
    };
    let n = space.len();
    let w = SubsetMask::from_predicate(n, |i| w_pred(&coords(i)));
    let components = comps
        .into_iter()
        .map(|(k, f)| (k.to_string(), SubsetMask::from_predicate(n, |i| f(&coords(i)))))
        .collect();
    Ok(Fixture {
        name: name.to_string(),
        space: Arc::new(space),
        w,
        components,
    })
}

/// Interval `[lo, hi]` of Z with the path metric.
pub fn line_window(lo: i32, hi: i32) -> Result<FiniteMetricSpace> {
    let r = lo.unsigned_abs().max(hi.unsigned_abs());
    lattice_subgraph((lo..=hi).map(|x| vec![x]).collect(), r)
}
