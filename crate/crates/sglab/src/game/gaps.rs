use super::value::{
    best_response_discounted, best_response_finite, exact_value_discounted, exact_value_finite,
    q_values_discounted,
};
use super::{
    DiscountedGame, FiniteHorizonGame, NonstationaryJointPolicy, ProductPolicy, StationaryPolicy,
};
use crate::{Error, Result};

/// Which equilibrium gap to measure.
///
/// `CceAtMu` and `Perfect` compare against best responses (at the initial
/// distribution, or at the worst state). The stage-game modes measure the
/// per-state deviation gaps induced by continuation Q-values and require a
/// product policy on a discounted game; `NeSg`/`WsneSg` average the
/// per-state gap under the initial distribution while the `P`-prefixed
/// variants take the worst state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapMode {
    CceAtMu,
    Perfect,
    NeSg,
    PneSg,
    WsneSg,
    PwsneSg,
}

impl GapMode {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "cce_at_mu" | "cce" => GapMode::CceAtMu,
            "perfect" => GapMode::Perfect,
            "ne_sg" => GapMode::NeSg,
            "pne_sg" => GapMode::PneSg,
            "wsne_sg" => GapMode::WsneSg,
            "pwsne_sg" => GapMode::PwsneSg,
            other => {
                return Err(Error::InvalidParameter(format!("unknown gap mode `{other}`")))
            }
        })
    }

    pub fn is_stage_mode(self) -> bool {
        matches!(self, GapMode::NeSg | GapMode::PneSg | GapMode::WsneSg | GapMode::PwsneSg)
    }
}

/// Per-player equilibrium gaps of a nonstationary policy on a
/// finite-horizon game. Deviation benefits are clamped at zero: a player
/// who is already above its best response has no incentive to move.
pub fn equilibrium_gaps_finite(
    game: &FiniteHorizonGame,
    policy: &NonstationaryJointPolicy,
    mode: GapMode,
) -> Result<Vec<f64>> {
    if mode.is_stage_mode() {
        return Err(Error::InvalidParameter(
            "stage-game gap modes apply to product policies on discounted games".into(),
        ));
    }
    let values = exact_value_finite(game, policy)?;
    let mut gaps = Vec::with_capacity(game.num_players);
    for i in 0..game.num_players {
        let (_, brv) = best_response_finite(game, policy, i)?;
        let gap = match mode {
            GapMode::CceAtMu => {
                let dev: f64 = brv[0].iter().zip(&game.mu).map(|(v, m)| v * m).sum();
                dev - values.at_mu(game, i)
            }
            GapMode::Perfect => {
                let mut worst = f64::NEG_INFINITY;
                for h in 0..game.horizon {
                    for s in 0..game.num_states {
                        worst = worst.max(brv[h][s] - values.values[i][h][s]);
                    }
                }
                worst
            }
            _ => unreachable!(),
        };
        gaps.push(gap.max(0.0));
    }
    Ok(gaps)
}

/// Per-player equilibrium gaps of a stationary policy on a discounted
/// game. Stage-game modes reject non-product policies.
pub fn equilibrium_gaps_discounted(
    game: &DiscountedGame,
    policy: &StationaryPolicy,
    mode: GapMode,
) -> Result<Vec<f64>> {
    if mode.is_stage_mode() {
        let product = policy.as_product().ok_or_else(|| {
            Error::NonProductPolicy("stage-game gap modes need a product policy".into())
        })?;
        let per_state = match mode {
            GapMode::NeSg | GapMode::PneSg => stage_deviation_gaps(game, product)?,
            _ => stage_support_gaps(game, product)?,
        };
        let aggregate_max = matches!(mode, GapMode::PneSg | GapMode::PwsneSg);
        return Ok(per_state
            .iter()
            .map(|row| {
                if aggregate_max {
                    row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                } else {
                    row.iter().zip(&game.mu).map(|(g, m)| g * m).sum()
                }
            })
            .map(|g: f64| g.max(0.0))
            .collect());
    }
    let joint = policy.to_joint(&game.indexer());
    let values = exact_value_discounted(game, &joint)?;
    let mut gaps = Vec::with_capacity(game.num_players);
    for i in 0..game.num_players {
        let (_, brv) = best_response_discounted(game, &joint, i)?;
        let gap = match mode {
            GapMode::CceAtMu => {
                let dev: f64 = brv.iter().zip(&game.mu).map(|(v, m)| v * m).sum();
                dev - values.at_mu(game, i)
            }
            GapMode::Perfect => brv
                .iter()
                .zip(&values.values[i])
                .map(|(d, v)| d - v)
                .fold(f64::NEG_INFINITY, f64::max),
            _ => unreachable!(),
        };
        gaps.push(gap.max(0.0));
    }
    Ok(gaps)
}

/// Mean continuation value of deviating to each own action:
/// `Q_i(s, a_i) = E_{a_-i ~ pi_-i(s)} Q_i(s, (a_i, a_-i))`.
fn own_action_q(
    game: &DiscountedGame,
    product: &ProductPolicy,
) -> Result<Vec<Vec<Vec<f64>>>> {
    let ix = game.indexer();
    let joint = product.to_joint(&ix);
    let q = q_values_discounted(game, &joint)?;
    let mut out = vec![Vec::new(); game.num_players];
    for i in 0..game.num_players {
        let n_own = game.action_counts[i];
        let rest = ix.without_player(i);
        let n_rest = rest.num_profiles();
        out[i] = (0..game.num_states)
            .map(|s| {
                let marg = joint.marginal_excluding(&ix, i, s);
                (0..n_own)
                    .map(|a_own| {
                        (0..n_rest)
                            .map(|a_rest| marg[a_rest] * q[i][s][ix.combine(i, a_own, a_rest)])
                            .sum()
                    })
                    .collect()
            })
            .collect();
    }
    Ok(out)
}

/// Stage deviation gaps `rho[i][s] = max_{a_i} Q_i(s, a_i) - V_i(s)` for a
/// product policy.
pub fn stage_deviation_gaps(
    game: &DiscountedGame,
    product: &ProductPolicy,
) -> Result<Vec<Vec<f64>>> {
    let ix = game.indexer();
    let joint = product.to_joint(&ix);
    let values = exact_value_discounted(game, &joint)?;
    let q = own_action_q(game, product)?;
    Ok((0..game.num_players)
        .map(|i| {
            (0..game.num_states)
                .map(|s| {
                    let best = q[i][s].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    best - values.values[i][s]
                })
                .collect()
        })
        .collect())
}

/// Well-supported stage gaps
/// `eps[i][s] = max_{a'} Q_i(s, a') - min_{a in supp pi_i(s)} Q_i(s, a)`.
pub fn stage_support_gaps(
    game: &DiscountedGame,
    product: &ProductPolicy,
) -> Result<Vec<Vec<f64>>> {
    let q = own_action_q(game, product)?;
    Ok((0..game.num_players)
        .map(|i| {
            (0..game.num_states)
                .map(|s| {
                    let best = q[i][s].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let worst_supported = q[i][s]
                        .iter()
                        .zip(&product.per_player[i][s])
                        .filter(|(_, w)| **w > 0.0)
                        .map(|(qv, _)| *qv)
                        .fold(f64::INFINITY, f64::min);
                    best - worst_supported
                })
                .collect()
        })
        .collect())
}

/// Drops every action whose deviation value trails the best by more than
/// `k * rho[i][s]` and renormalizes what is left. `k` must exceed 1; the
/// per-state L1 change per player is at most `2 / (k - 1)`.
pub fn truncate_support(
    game: &DiscountedGame,
    product: &ProductPolicy,
    k: f64,
) -> Result<ProductPolicy> {
    if k <= 1.0 {
        return Err(Error::InvalidParameter(format!("truncation needs k > 1, got {k}")));
    }
    let q = own_action_q(game, product)?;
    let rho = stage_deviation_gaps(game, product)?;
    let mut out = product.clone();
    for i in 0..game.num_players {
        for s in 0..game.num_states {
            let best = q[i][s].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let threshold = best - k * rho[i][s].max(0.0);
            let mut kept_mass = 0.0;
            for (a, w) in product.per_player[i][s].iter().enumerate() {
                if q[i][s][a] >= threshold {
                    kept_mass += w;
                } else {
                    out.per_player[i][s][a] = 0.0;
                }
            }
            debug_assert!(kept_mass > 0.0, "threshold removed all supported actions");
            for w in out.per_player[i][s].iter_mut() {
                *w /= kept_mass;
            }
        }
    }
    Ok(out)
}
