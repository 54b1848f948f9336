use ndarray::Array2;
use trajgen_core::{Scenario, Vec2};
use trajgen_nn::Matrix;

use crate::error::{ModelError, Result};

/// Ground-truth positions (rows laid out as `x0, y0, x1, y1, ...`) and validity.
#[derive(Clone, Debug, PartialEq)]
pub struct Target {
    pub positions: Matrix,
    pub valid: Vec<Vec<bool>>,
}

impl Target {
    pub fn from_scenario(s: &Scenario) -> Self {
        let n = s.trajectories.len();
        let t = s.trajectories.first().map_or(0, |t| t.len());
        let mut positions = Array2::zeros((n, 2 * t));
        for (r, tr) in s.trajectories.iter().enumerate() {
            for (k, p) in tr.positions.iter().enumerate() {
                positions[[r, 2 * k]] = p.x;
                positions[[r, 2 * k + 1]] = p.y;
            }
        }
        Self { positions, valid: s.trajectories.iter().map(|t| t.valid.clone()).collect() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub traj_term: f64,
    pub rela_term: f64,
    pub total: f64,
}

/// Final position of every vehicle minus the ego's final position.
pub fn relative_displacements(final_positions: &[Vec2]) -> Vec<Vec2> {
    let ego = final_positions.first().copied().unwrap_or(Vec2::ZERO);
    final_positions.iter().map(|p| *p - ego).collect()
}

/// Mean squared displacement per valid step plus the squared error of the
/// final displacement from the ego, both averaged over vehicles. Returns the
/// gradient with respect to `pred`.
pub fn scenario_loss(pred: &Matrix, target: &Target) -> Result<(LossBreakdown, Matrix)> {
    if pred.shape() != target.positions.shape() || target.valid.len() != pred.nrows() {
        return Err(ModelError::Config(format!(
            "prediction shape {:?} does not match target shape {:?}",
            pred.shape(),
            target.positions.shape()
        )));
    }
    let n = pred.nrows();
    let steps = pred.ncols() / 2;
    if n == 0 || steps == 0 {
        return Err(ModelError::Config("empty prediction".into()));
    }
    let inv_n = 1.0 / n as f64;
    let mut grad = Array2::zeros(pred.raw_dim());
    let mut traj = 0.0;
    for r in 0..n {
        let valid: Vec<usize> = (0..steps).filter(|&t| target.valid[r].get(t).copied().unwrap_or(false)).collect();
        if valid.is_empty() {
            continue;
        }
        let w = 1.0 / valid.len() as f64;
        for &t in &valid {
            for c in [2 * t, 2 * t + 1] {
                let e = pred[[r, c]] - target.positions[[r, c]];
                traj += w * e * e;
                grad[[r, c]] += inv_n * w * 2.0 * e;
            }
        }
    }
    let last = steps - 1;
    let ego_ok = target.valid[0].get(last).copied().unwrap_or(false);
    let mut rela = 0.0;
    for r in 1..n {
        if !(ego_ok && target.valid[r].get(last).copied().unwrap_or(false)) {
            continue;
        }
        for c in [2 * last, 2 * last + 1] {
            let e = (pred[[r, c]] - pred[[0, c]]) - (target.positions[[r, c]] - target.positions[[0, c]]);
            rela += e * e;
            grad[[r, c]] += inv_n * 2.0 * e;
            grad[[0, c]] -= inv_n * 2.0 * e;
        }
    }
    let (traj_term, rela_term) = (traj * inv_n, rela * inv_n);
    Ok((LossBreakdown { traj_term, rela_term, total: traj_term + rela_term }, grad))
}
