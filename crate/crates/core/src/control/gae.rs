use super::rollout::Trajectory;

/// Generalized advantage estimates and value targets. Episode boundaries
/// (`dones`) cut both the bootstrap and the recursion.
pub fn gae_advantages(traj: &Trajectory, gamma: f64, lambda: f64) -> (Vec<f64>, Vec<f64>) {
    let n = traj.len();
    let mut adv = vec![0.0; n];
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let not_done = if traj.dones[t] { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n { traj.values[t + 1] } else { traj.last_value };
        let delta = traj.rewards[t] + gamma * next_value * not_done - traj.values[t];
        next_adv = delta + gamma * lambda * not_done * next_adv;
        adv[t] = next_adv;
    }
    let returns = adv.iter().zip(&traj.values).map(|(a, v)| a + v).collect();
    (adv, returns)
}

/// Shifts and scales to mean 0, std 1 (population std). A constant input
/// maps to zeros.
pub fn normalize_advantages(adv: &mut [f64]) {
    if adv.is_empty() {
        return;
    }
    let n = adv.len() as f64;
    let mean = adv.iter().sum::<f64>() / n;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
    let std = var.sqrt();
    for a in adv.iter_mut() {
        *a = if std > 1e-12 { (*a - mean) / std } else { 0.0 };
    }
}
