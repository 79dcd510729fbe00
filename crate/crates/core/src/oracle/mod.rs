//! Exact expectations over finite-support laws and martingale trees, and
//! the inequality checks built on them.

mod checks;
mod concentration;
mod dist;
pub mod suites;
mod tree;

pub use checks::{
    check_centring, check_main_inequality, check_spread, increment_ratio, increment_ratio_gap,
    near_extremal_probe, near_extremal_probe_gap, probe_schedule,
};
pub use concentration::{
    check_concentration, check_sum_norm, ConcentrationReport, Moment, PointDist, MAX_COORDS,
    MAX_SUPPORT,
};
pub use dist::{
    convolve_independent, expect_f, two_point, DiscreteDist, CONVOLUTION_CAP, MERGE_TOL,
};
pub use tree::{check_tree_inequality, Branch, MartingaleTree, Node};
