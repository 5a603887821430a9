use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest parameter dimension the exhaustive oracle accepts.
pub const MAX_NET_DIM: usize = 3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetReport {
    pub p: usize,
    pub w: f64,
    pub j: f64,
    pub eps: f64,
    /// `eps / (8 J)`.
    pub covering_radius: f64,
    /// Side of the cube of diameter `W`, i.e. `W / sqrt(p)`.
    pub side: f64,
    pub points_per_axis: usize,
    pub net_size: usize,
    /// `(1 + 60 W J / eps)^p`.
    pub size_bound: f64,
    pub oracle_step: f64,
    pub oracle_points: usize,
    pub oracle_max_distance: f64,
    pub is_net: bool,
}

fn grid(points: usize, p: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = points.pow(p as u32);
    (0..total).map(move |mut idx| {
        (0..p)
            .map(|_| {
                let i = idx % points;
                idx /= points;
                i
            })
            .collect()
    })
}

/// Builds a cell-centred grid net of radius `eps / (8J)` on the cube
/// `[0, W/sqrt(p)]^p` (diameter `W`) and checks the covering property at
/// every point of an `oracle_step` grid by brute-force nearest-neighbour
/// search.
pub fn net_construct_and_verify(p: usize, w: f64, j: f64, eps: f64, oracle_step: f64) -> Result<NetReport> {
    if p > MAX_NET_DIM {
        return Err(LabError::Refusal(format!(
            "exhaustive net oracle supports p <= {MAX_NET_DIM}, got {p}"
        )));
    }
    if !(w > 0.0 && j > 0.0 && eps > 0.0 && oracle_step > 0.0) {
        return Err(LabError::Domain(
            "net construction needs positive W, J, eps and oracle step".into(),
        ));
    }
    let radius = eps / (8.0 * j);
    let side = if p == 0 { 0.0 } else { w / (p as f64).sqrt() };
    // cells of side h have half-diagonal h sqrt(p) / 2
    let max_cell = if p == 0 {
        f64::INFINITY
    } else {
        2.0 * radius / (p as f64).sqrt()
    };
    let per_axis = ((side / max_cell).ceil() as usize).max(1);
    let h = side / per_axis as f64;
    let coord = |i: usize| (i as f64 + 0.5) * h;
    let net: Vec<Vec<f64>> = grid(per_axis, p)
        .map(|ix| ix.into_iter().map(coord).collect())
        .collect();

    let oracle_axis: Vec<f64> = {
        let steps = (side / oracle_step).floor() as usize;
        let mut v: Vec<f64> = (0..=steps).map(|i| i as f64 * oracle_step).collect();
        if side - v[v.len() - 1] > 1e-12 {
            v.push(side);
        }
        v
    };
    let oracle: Vec<Vec<f64>> = grid(oracle_axis.len(), p)
        .map(|ix| ix.into_iter().map(|i| oracle_axis[i]).collect())
        .collect();
    let oracle_max_distance = oracle
        .par_iter()
        .map(|x| {
            net.iter()
                .map(|c| c.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
                .fold(f64::INFINITY, f64::min)
                .sqrt()
        })
        .reduce(|| 0.0, f64::max);
    let size_bound = (1.0 + 60.0 * w * j / eps).powi(p as i32);
    Ok(NetReport {
        p,
        w,
        j,
        eps,
        covering_radius: radius,
        side,
        points_per_axis: per_axis,
        net_size: net.len(),
        size_bound,
        oracle_step,
        oracle_points: oracle.len(),
        oracle_max_distance,
        is_net: oracle_max_distance <= radius + 1e-12 && (net.len() as f64) <= size_bound,
    })
}
