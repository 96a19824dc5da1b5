use super::{DiscountedGame, FiniteHorizonGame, NonstationaryJointPolicy, StationaryJointPolicy};

/// Exact per-step state distributions `d[h][s] = Pr[s_h = s]` under a
/// policy, by forward propagation from the initial distribution.
pub fn state_visitation_finite(
    game: &FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
) -> Vec<Vec<f64>> {
    let mut dist = game.mu.clone();
    let mut out = Vec::with_capacity(game.horizon);
    for h in 0..game.horizon {
        out.push(dist.clone());
        if h + 1 == game.horizon {
            break;
        }
        let mut next = vec![0.0; game.num_states];
        for s in 0..game.num_states {
            if dist[s] == 0.0 {
                continue;
            }
            for &(a, w) in &policy.cells[h][s].entries {
                let mass = dist[s] * w;
                for (s2, p) in game.transitions[h][s][a].iter().enumerate() {
                    next[s2] += mass * p;
                }
            }
        }
        dist = next;
    }
    out
}

/// Exact discounted occupancy `d[s0][s'] = (1 - gamma) * sum_h gamma^(h-1)
/// Pr[s_h = s' | s_1 = s0]`, truncated once the residual discounted mass
/// drops below 1e-12. Each row is a probability vector.
pub fn state_visitation_discounted(
    game: &DiscountedGame,
    policy: &StationaryJointPolicy,
) -> Vec<Vec<f64>> {
    let n = game.num_states;
    let na = game.num_joint_actions();
    // induced state-to-state kernel
    let mut kernel = vec![vec![0.0; n]; n];
    for s in 0..n {
        for a in 0..na {
            let w = policy.dist[s][a];
            if w == 0.0 {
                continue;
            }
            for (s2, p) in game.transitions[s][a].iter().enumerate() {
                kernel[s][s2] += w * p;
            }
        }
    }
    let mut out = vec![vec![0.0; n]; n];
    for s0 in 0..n {
        let mut cur = vec![0.0; n];
        cur[s0] = 1.0;
        let mut weight = 1.0 - game.gamma;
        loop {
            for (s2, c) in cur.iter().enumerate() {
                out[s0][s2] += weight * c;
            }
            weight *= game.gamma;
            // residual discounted mass still unassigned: weight / (1 - gamma)
            if weight / (1.0 - game.gamma) < 1e-12 {
                break;
            }
            let mut next = vec![0.0; n];
            for (s, c) in cur.iter().enumerate() {
                if *c == 0.0 {
                    continue;
                }
                for (s2, p) in kernel[s].iter().enumerate() {
                    next[s2] += c * p;
                }
            }
            cur = next;
        }
    }
    out
}
