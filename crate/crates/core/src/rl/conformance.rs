//! Behavioural checks every [`Environment`] must pass, native or bridged.

use super::env::Environment;

/// Runs the contract against `env` and returns every violation found.
/// `max_steps` bounds each probe episode; an episode still running then is
/// a violation.
pub fn check_environment(env: &mut dyn Environment, seed: u64, max_steps: usize) -> Vec<String> {
    let mut problems = Vec::new();
    let (obs_dim, n_actions) = (env.obs_dim(), env.n_actions());
    if obs_dim == 0 || n_actions == 0 {
        problems.push(format!(
            "degenerate spec: obs_dim {obs_dim}, n_actions {n_actions}"
        ));
        return problems;
    }
    let check_obs = |obs: &[f64], what: &str, problems: &mut Vec<String>| {
        if obs.len() != obs_dim {
            problems.push(format!(
                "{what}: observation has {} values, expected {obs_dim}",
                obs.len()
            ));
        }
        if obs.iter().any(|v| !v.is_finite()) {
            problems.push(format!("{what}: non-finite observation"));
        }
    };

    let first = match env.reset(seed) {
        Ok(obs) => obs,
        Err(e) => {
            problems.push(format!("reset failed: {e}"));
            return problems;
        }
    };
    check_obs(&first, "reset", &mut problems);
    match env.reset(seed) {
        Ok(again) if again != first => problems.push("reset with the same seed differs".into()),
        Err(e) => problems.push(format!("second reset failed: {e}")),
        _ => {}
    }
    if env.step(n_actions).is_ok() {
        problems.push(format!("action {n_actions} was accepted"));
    }

    for action_offset in 0..n_actions.min(2) {
        if let Err(e) = env.reset(seed) {
            problems.push(format!("reset failed: {e}"));
            return problems;
        }
        let mut finished = false;
        for t in 0..max_steps {
            match env.step((t + action_offset) % n_actions) {
                Ok(step) => {
                    check_obs(&step.observation, "step", &mut problems);
                    if !step.reward.is_finite() {
                        problems.push("non-finite reward".into());
                    }
                    if step.done() {
                        finished = true;
                        break;
                    }
                }
                Err(e) => {
                    problems.push(format!("step {t} failed: {e}"));
                    return problems;
                }
            }
        }
        if !finished {
            problems.push(format!("episode still running after {max_steps} steps"));
        } else if env.step(0).is_ok() {
            problems.push("step after the episode ended was accepted".into());
        }
    }
    problems
}
