use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trajgen_core::Vec2;
use trajgen_model::{relative_displacements, scenario_loss, Target};

/// Direct transcription of the loss over per-vehicle point lists.
fn oracle_loss(pred: &[Vec<Vec2>], gt: &[Vec<Vec2>], valid: &[Vec<bool>]) -> f64 {
    let n = pred.len() as f64;
    let mut traj = 0.0;
    for i in 0..pred.len() {
        let steps: Vec<usize> = (0..pred[i].len()).filter(|&t| valid[i][t]).collect();
        if steps.is_empty() {
            continue;
        }
        let sq: f64 = steps.iter().map(|&t| (pred[i][t] - gt[i][t]).norm().powi(2)).sum();
        traj += sq / steps.len() as f64;
    }
    let last = pred[0].len() - 1;
    let mut rela = 0.0;
    for i in 1..pred.len() {
        if valid[0][last] && valid[i][last] {
            let d_hat = pred[i][last] - pred[0][last];
            let d = gt[i][last] - gt[0][last];
            rela += (d_hat - d).norm().powi(2);
        }
    }
    (traj + rela) / n
}

fn to_matrix(rows: &[Vec<Vec2>]) -> Array2<f64> {
    let t = rows[0].len();
    Array2::from_shape_fn((rows.len(), 2 * t), |(i, c)| if c % 2 == 0 { rows[i][c / 2].x } else { rows[i][c / 2].y })
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, t: usize) -> Vec<Vec<Vec2>> {
    (0..n)
        .map(|_| (0..t).map(|_| Vec2::new(rng.gen_range(-30.0..30.0), rng.gen_range(-30.0..30.0))).collect())
        .collect()
}

#[test]
fn exact_match_is_zero_and_offsets_are_not() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let gt = random_rows(&mut rng, 3, 50);
    let target = Target { positions: to_matrix(&gt), valid: vec![vec![true; 50]; 3] };
    assert_eq!(scenario_loss(&to_matrix(&gt), &target).unwrap().0.total, 0.0);
    let mut moved = to_matrix(&gt);
    moved[[2, 17]] += 1e-3;
    assert!(scenario_loss(&moved, &target).unwrap().0.total > 0.0);
}

#[test]
fn constant_offsets_give_squared_norm_per_vehicle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let gt = random_rows(&mut rng, 4, 50);
    let target = Target { positions: to_matrix(&gt), valid: vec![vec![true; 50]; 4] };
    for (offset, expected) in [(Vec2::new(1.0, 0.0), 1.0), (Vec2::new(3.0, 4.0), 25.0)] {
        let shifted: Vec<Vec<Vec2>> = gt.iter().map(|r| r.iter().map(|&p| p + offset).collect()).collect();
        let (loss, _) = scenario_loss(&to_matrix(&shifted), &target).unwrap();
        assert!((loss.traj_term - expected).abs() < 1e-12, "{offset:?}: {loss:?}");
        assert!(loss.rela_term.abs() < 1e-12);
    }
}

#[test]
fn matches_oracle_with_masks() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let n = rng.gen_range(1..6);
        let t = rng.gen_range(2..20);
        let gt = random_rows(&mut rng, n, t);
        let pred = random_rows(&mut rng, n, t);
        let valid: Vec<Vec<bool>> = (0..n).map(|_| (0..t).map(|_| rng.gen_bool(0.8)).collect()).collect();
        let target = Target { positions: to_matrix(&gt), valid: valid.clone() };
        let (loss, _) = scenario_loss(&to_matrix(&pred), &target).unwrap();
        let expected = oracle_loss(&pred, &gt, &valid);
        assert!((loss.total - expected).abs() <= 1e-10 * expected.max(1.0), "{} vs {expected}", loss.total);
        assert!((loss.traj_term + loss.rela_term - loss.total).abs() < 1e-9);
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (n, t) = (4, 12);
    let gt = random_rows(&mut rng, n, t);
    let mut valid = vec![vec![true; t]; n];
    valid[2][5] = false;
    valid[3][t - 1] = false;
    let target = Target { positions: to_matrix(&gt), valid };
    let pred = to_matrix(&random_rows(&mut rng, n, t));
    let (_, grad) = scenario_loss(&pred, &target).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for idx in 0..pred.len() {
        let (r, c) = (idx / pred.ncols(), idx % pred.ncols());
        let mut plus = pred.clone();
        plus[[r, c]] += h;
        let mut minus = pred.clone();
        minus[[r, c]] -= h;
        let numeric = (scenario_loss(&plus, &target).unwrap().0.total
            - scenario_loss(&minus, &target).unwrap().0.total)
            / (2.0 * h);
        let a = grad[[r, c]];
        worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6));
    }
    assert!(worst < 1e-5, "worst relative error {worst:e}");
}

#[test]
fn displacements_are_differences_from_the_ego() {
    assert_eq!(relative_displacements(&[Vec2::new(4.0, 1.0)]), vec![Vec2::new(0.0, 0.0)]);
    let finals = [Vec2::new(0.0, 0.0), Vec2::new(10.0, 0.0), Vec2::new(-3.0, 7.5)];
    let d = relative_displacements(&finals);
    for (i, p) in finals.iter().enumerate() {
        assert_eq!(d[i], *p - finals[0]);
    }
    let moved: Vec<Vec2> = finals.iter().map(|&p| p + Vec2::new(5.0, -2.0)).collect();
    assert_eq!(relative_displacements(&moved), d);
}

#[test]
fn shape_mismatch_is_an_error() {
    let target = Target { positions: Array2::zeros((2, 10)), valid: vec![vec![true; 5]; 2] };
    assert!(scenario_loss(&Array2::zeros((3, 10)), &target).is_err());
}
