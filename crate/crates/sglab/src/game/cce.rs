use super::{FiniteHorizonGame, JointIndexer, NonstationaryJointPolicy, PolicyCell};
use crate::lp::{solve, Lp};
use crate::{Error, Result};

/// Coarse-correlated-equilibrium baseline by backward induction.
///
/// Working from the last step, each `(h, s)` stage game has payoffs
/// `Q_i(a) = r_{i,h}(s, a) + E_{s'} V_{i,h+1}(s')`; a joint distribution
/// over profiles is found whose deviation gain for every `(player, fixed
/// action)` pair is at most `tol` (in fact the linear program maximizes the
/// worst slack, so the gain is typically <= 0 up to solver precision). The
/// result's overall deviation benefit at the initial distribution is at
/// most `H * tol`.
pub fn backward_induction_cce(
    game: &FiniteHorizonGame,
    tol: f64,
) -> Result<NonstationaryJointPolicy> {
    if tol <= 0.0 {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let ix = game.indexer();
    let na = ix.num_profiles();
    let m = game.num_players;
    let mut cells: Vec<Vec<PolicyCell>> = vec![Vec::with_capacity(game.num_states); game.horizon];
    let mut next = vec![vec![0.0; game.num_states]; m];
    for h in (0..game.horizon).rev() {
        let mut values = vec![vec![0.0; game.num_states]; m];
        for s in 0..game.num_states {
            let q: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..na)
                        .map(|a| {
                            game.rewards[i][h][s][a]
                                + game.transitions[h][s][a]
                                    .iter()
                                    .zip(&next[i])
                                    .map(|(p, v)| p * v)
                                    .sum::<f64>()
                        })
                        .collect()
                })
                .collect();
            let x = stage_cce(&ix, &q, tol)?;
            for i in 0..m {
                values[i][s] = x.iter().zip(&q[i]).map(|(w, qa)| w * qa).sum();
            }
            cells[h].push(PolicyCell {
                entries: x
                    .iter()
                    .enumerate()
                    .filter(|(_, w)| **w > 1e-12)
                    .map(|(a, w)| (a, *w))
                    .collect(),
            });
            // renormalize after dropping numerical dust
            let total: f64 = cells[h][s].entries.iter().map(|(_, w)| w).sum();
            for (_, w) in cells[h][s].entries.iter_mut() {
                *w /= total;
            }
        }
        next = values;
    }
    Ok(NonstationaryJointPolicy {
        horizon: game.horizon,
        num_states: game.num_states,
        action_counts: game.action_counts.clone(),
        cells,
    })
}

/// One-shot CCE of a stage game with payoffs `q[i][a]`: maximize the
/// minimum constraint slack `t` subject to
/// `sum_a x(a) [q_i(a_i', a_-i) - q_i(a)] + t <= 0` for all `(i, a_i')`,
/// `x` a distribution. An exact CCE always exists, so the optimum has
/// `t >= 0`; `tol` only gates acceptance of the solved point.
fn stage_cce(ix: &JointIndexer, q: &[Vec<f64>], tol: f64) -> Result<Vec<f64>> {
    let na = ix.num_profiles();
    let m = ix.num_players();
    // variables: x(0..na), t+ and t-
    let mut a_ub: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for dev in 0..ix.counts()[i] {
            let mut row = vec![0.0; na + 2];
            for a in 0..na {
                let swapped = ix.replace_action(a, i, dev);
                row[a] = q[i][swapped] - q[i][a];
            }
            row[na] = 1.0;
            row[na + 1] = -1.0;
            a_ub.push(row);
        }
    }
    let mut objective = vec![0.0; na + 2];
    objective[na] = 1.0;
    objective[na + 1] = -1.0;
    let mut a_eq_row = vec![1.0; na];
    a_eq_row.extend_from_slice(&[0.0, 0.0]);
    let sol = solve(&Lp {
        objective: &objective,
        a_ub: &a_ub,
        b_ub: &vec![0.0; a_ub.len()],
        a_eq: &[a_eq_row],
        b_eq: &[1.0],
    })?;
    // an exact equilibrium exists, so the optimal worst slack is nonnegative
    if sol.objective < -tol {
        return Err(Error::Lp(format!(
            "max-slack solution came back at {:.3e}; expected >= 0",
            sol.objective
        )));
    }
    let x: Vec<f64> = sol.x[..na].iter().map(|w| w.max(0.0)).collect();
    // verify the deviation constraints at the requested tolerance
    for row in &a_ub {
        let gain: f64 = row[..na].iter().zip(&x).map(|(c, w)| c * w).sum();
        if gain > tol {
            return Err(Error::Lp(format!(
                "stage equilibrium missed tolerance: deviation gain {gain:.3e} > {tol:.3e}"
            )));
        }
    }
    Ok(x)
}
