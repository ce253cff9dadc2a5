use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::witness::Pos;
use super::{CheckReport, CheckStatus};
use crate::formula::Formula;
use crate::kripke::{KripkeModel, WorldId};
use crate::surgery::{pair_id, unpair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolovayError {
    #[error("model is not shaped like M': {0}")]
    NotMPrime(String),
    #[error("climb at stage {stage} names unknown world {world}")]
    UnknownWorld { stage: u64, world: WorldId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "case", content = "stage", rename_all = "snake_case")]
pub enum Trigger {
    None,
    /// The proof of `f_T(A)` came first (or together with the σ witness).
    Case1(u64),
    Case2(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolovayRun {
    /// `h(0), …, h(horizon)`.
    pub trajectory: Vec<WorldId>,
    pub limit: WorldId,
    pub trigger: Trigger,
    /// `h` moved within the last `|W'|` stages, so `limit` may not be final.
    pub unstable: bool,
}

fn check_shape(m: &KripkeModel) -> Result<(), SolovayError> {
    let fail = |s: String| Err(SolovayError::NotMPrime(s));
    let violations = m.validate_frame();
    if !violations.is_empty() {
        return fail(format!("invalid frame: {violations:?}"));
    }
    if m.root() != 0 {
        return fail(format!("root is {}, expected 0", m.root()));
    }
    for i in 0..2 {
        if !m.worlds().contains(&pair_id(i, 0)) {
            return fail(format!("missing <{i},0>"));
        }
    }
    for &w in m.worlds() {
        let Some((i, j)) = unpair(w) else { continue };
        if j >= 1 && !m.relates(pair_id(i, 0), w) {
            return fail(format!("<{i},0> is not below <{i},{j}>"));
        }
        if j >= 1 && m.relates(pair_id(1 - i, 0), w) {
            return fail(format!("<{},0> is below <{i},{j}>", 1 - i));
        }
    }
    Ok(())
}

/// Value of `h(x+1)` when `h(x) = current` and `x` proves `!λ(target)`.
pub fn climb_step(m: &KripkeModel, current: WorldId, target: WorldId) -> WorldId {
    if m.relates(current, target) {
        target
    } else {
        current
    }
}

/// Runs `h` for `horizon` stages.
///
/// `h` stays at 0 until the first stage `x` reaching the σ witness or the
/// proof of `f_T(A)`, then jumps to `<0,0>` if `x` is that proof and to
/// `<1,0>` otherwise. Afterwards a proof of `!λ(a)` at stage `x` moves `h`
/// to `a` when `h(x) ⊏' a`.
pub fn solovay_run(
    model: &KripkeModel,
    sigma_pos: Pos,
    fa_proof_pos: Pos,
    neg_lambda_proofs: &BTreeMap<u64, WorldId>,
    horizon: u64,
) -> Result<SolovayRun, SolovayError> {
    check_shape(model)?;
    if let Some((&stage, &world)) = neg_lambda_proofs.iter().find(|(_, w)| !model.worlds().contains(w)) {
        return Err(SolovayError::UnknownWorld { stage, world });
    }
    let mut trajectory = vec![0];
    let mut trigger = Trigger::None;
    let mut last_change: Option<u64> = None;
    for x in 0..horizon {
        let h = *trajectory.last().expect("h(0) is set");
        let next = if trigger == Trigger::None {
            if fa_proof_pos == Some(x) {
                trigger = Trigger::Case1(x);
                pair_id(0, 0)
            } else if sigma_pos == Some(x) {
                trigger = Trigger::Case2(x);
                pair_id(1, 0)
            } else {
                0
            }
        } else {
            match neg_lambda_proofs.get(&x) {
                Some(&a) => climb_step(model, h, a),
                None => h,
            }
        };
        if next != h {
            last_change = Some(x);
        }
        trajectory.push(next);
    }
    let n = model.len() as u64;
    let unstable = last_change.is_some_and(|x| x + 1 + n > horizon);
    Ok(SolovayRun {
        limit: *trajectory.last().expect("nonempty"),
        trajectory,
        trigger,
        unstable,
    })
}

/// Truth of `f` at `w` when `λ(w)` holds: variables read the valuation at
/// `w`, and `[]C` holds iff `C` holds after every climb `h` could still make.
fn shadow(model: &KripkeModel, w: WorldId, f: &Formula) -> bool {
    match f {
        Formula::Var(v) => model.holds_var(w, v),
        Formula::Top => true,
        Formula::Bot => false,
        Formula::Neg(g) => !shadow(model, w, g),
        Formula::Binary(c, l, r) => c.apply(shadow(model, w, l), shadow(model, w, r)),
        Formula::Box(g) => model
            .worlds()
            .iter()
            .filter(|&&a| a != w && climb_step(model, w, a) == a)
            .all(|&a| shadow(model, a, g)),
    }
}

fn branch(w: WorldId) -> Option<u32> {
    unpair(w).map(|(i, _)| i)
}

/// Checks a run against the branch lemmas and the embedding lemma.
pub fn solovay_check(run: &SolovayRun, model: &KripkeModel, a: &Formula) -> CheckReport {
    let mut r = CheckReport::default();

    let start = match run.trigger {
        Trigger::None => run.trajectory.len(),
        Trigger::Case1(x) | Trigger::Case2(x) => x as usize + 1,
    };
    let before_ok = run.trajectory[..start].iter().all(|&w| w == 0);
    let after_ok = run.trajectory[start.min(run.trajectory.len())..]
        .windows(2)
        .all(|p| p[0] == p[1] || model.relates(p[0], p[1]));
    let status = if before_ok && after_ok {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    r.push("monotone", status, format!("trajectory {:?}", run.trajectory));

    for (name, case, want) in [("branch_case1", 1u8, 0u32), ("branch_case2", 2, 1)] {
        let fired = matches!(
            (run.trigger, case),
            (Trigger::Case1(_), 1) | (Trigger::Case2(_), 2)
        );
        let (status, detail) = if run.trigger == Trigger::None {
            if run.limit == 0 {
                (CheckStatus::Vacuous, "no trigger; h stays at 0".to_string())
            } else {
                (CheckStatus::Fail, format!("no trigger but limit {}", run.limit))
            }
        } else if run.unstable {
            (CheckStatus::Inconclusive, "limit not stable".to_string())
        } else {
            let in_branch = branch(run.limit) == Some(want);
            let status = if in_branch == fired {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            };
            (status, format!("limit {} with trigger {:?}", run.limit, run.trigger))
        };
        r.push(name, status, detail);
    }

    let w = run.limit;
    let (status, detail) = if run.unstable {
        (CheckStatus::Inconclusive, "limit not stable".to_string())
    } else if unpair(w).map_or(true, |(_, j)| j == 0) {
        (CheckStatus::Vacuous, format!("limit {w} has second coordinate 0"))
    } else {
        let boxed = Formula::boxed(a.clone());
        let bad: Vec<String> = boxed
            .subformulas()
            .into_iter()
            .filter(|b| model.forces(w, b).expect("limit is a world") != shadow(model, w, b))
            .map(|b| b.to_string())
            .collect();
        if bad.is_empty() {
            (CheckStatus::Pass, format!("limit {w}"))
        } else {
            (CheckStatus::Fail, format!("limit {w} disagrees on {}", bad.join(", ")))
        }
    };
    r.push("embedding", status, detail);
    r
}
