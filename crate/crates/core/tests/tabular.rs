use hdpg_core::envs::{Environment, GridMdp, GridSpec};
use nalgebra::{DMatrix, DVector};

/// Exact Q of the summed reward by solving `(I - gamma P_pi) v = r_pi` and
/// then `Q = r + gamma P v`.
fn q_summed_by_linear_solve(mdp: &GridMdp, policy: &[Vec<f64>], gamma: f64) -> Vec<Vec<f64>> {
    let g = mdp.grid();
    let n = g.n_states;
    let total = |s: usize, a: usize| g.rewards[s][a].iter().sum::<f64>();
    let mut lhs = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..n {
        if g.terminal[s] {
            continue;
        }
        for a in 0..g.n_actions {
            let p = policy[s][a];
            rhs[s] += p * total(s, a);
            for sp in 0..n {
                if !g.terminal[sp] {
                    lhs[(s, sp)] -= gamma * p * g.transitions[s][a][sp];
                }
            }
        }
    }
    let v = lhs.lu().solve(&rhs).expect("non-singular policy evaluation system");
    (0..n)
        .map(|s| {
            (0..g.n_actions)
                .map(|a| {
                    if g.terminal[s] {
                        return 0.0;
                    }
                    let next: f64 = (0..n)
                        .filter(|&sp| !g.terminal[sp])
                        .map(|sp| g.transitions[s][a][sp] * v[sp])
                        .sum();
                    total(s, a) + gamma * next
                })
                .collect()
        })
        .collect()
}

fn uniform_policy(mdp: &GridMdp) -> Vec<Vec<f64>> {
    let g = mdp.grid();
    vec![vec![1.0 / g.n_actions as f64; g.n_actions]; g.n_states]
}

#[test]
fn per_head_values_sum_to_summed_reward_values() {
    let mdp = GridMdp::gridworld();
    assert!(mdp.grid().n_states <= 10);
    assert_eq!(mdp.grid().k(), 3);
    for (gamma, policy) in [
        (0.9, uniform_policy(&mdp)),
        (0.99, {
            // Mostly "right then down".
            let mut p = uniform_policy(&mdp);
            for (s, row) in p.iter_mut().enumerate() {
                let best = if s % 3 < 2 { 3 } else { 1 };
                for (a, v) in row.iter_mut().enumerate() {
                    *v = if a == best { 0.8 } else { 0.05 };
                }
            }
            p
        }),
    ] {
        let heads = mdp.evaluate_policy(&policy, gamma, 1e-13, 100_000).unwrap();
        let exact = q_summed_by_linear_solve(&mdp, &policy, gamma);
        let sum = heads.total();
        let mut worst: f64 = 0.0;
        for (row_a, row_b) in sum.iter().zip(&exact) {
            for (a, b) in row_a.iter().zip(row_b) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= 1e-8, "sup norm {worst}");
    }
}

#[test]
fn two_state_chain_by_hand() {
    // A -> B -> A deterministically; reward [1, 0] in A only. gamma = 0.5:
    // Q_A = 1 + 0.5 Q_B, Q_B = 0.5 Q_A  =>  Q_A = 4/3, Q_B = 2/3.
    let spec = GridSpec {
        n_states: 2,
        n_actions: 1,
        transitions: vec![vec![vec![0.0, 1.0]], vec![vec![1.0, 0.0]]],
        rewards: vec![vec![vec![1.0, 0.0]], vec![vec![0.0, 0.0]]],
        terminal: vec![false, false],
        start: 0,
        component_names: vec!["a".into(), "b".into()],
        max_steps: 10,
    };
    let mdp = GridMdp::new(spec).unwrap();
    let q = mdp.evaluate_policy(&[vec![1.0], vec![1.0]], 0.5, 1e-14, 10_000).unwrap();
    assert!((q.q[0][0][0] - 4.0 / 3.0).abs() < 1e-12);
    assert!((q.q[0][1][0] - 2.0 / 3.0).abs() < 1e-12);
    assert_eq!(q.q[1][0][0], 0.0);
    assert_eq!(q.q[1][1][0], 0.0);
    let exact = q_summed_by_linear_solve(&mdp, &[vec![1.0], vec![1.0]], 0.5);
    assert!((exact[0][0] - 4.0 / 3.0).abs() < 1e-12);
}

#[test]
fn zero_rewards_give_zero_values() {
    let mut spec = GridMdp::gridworld().grid().clone();
    for row in spec.rewards.iter_mut().flatten() {
        row.iter_mut().for_each(|r| *r = 0.0);
    }
    let mdp = GridMdp::new(spec).unwrap();
    let q = mdp.evaluate_policy(&uniform_policy(&mdp), 0.9, 1e-12, 1000).unwrap();
    assert!(q.q.iter().flatten().flatten().all(|&v| v == 0.0));
}

#[test]
fn tables_agree_with_monte_carlo() {
    let mut mdp = GridMdp::gridworld();
    let gamma = 0.9;
    let policy = uniform_policy(&mdp);
    let exact = mdp.evaluate_policy(&policy, gamma, 1e-12, 100_000).unwrap();
    let (s0, a0) = (0usize, 3usize);
    let episodes = 20_000;
    let n_actions = mdp.grid().n_actions;
    let mut returns = Vec::with_capacity(episodes);
    let mut pick = 0u64;
    for ep in 0..episodes {
        mdp.reset(ep as u64);
        assert_eq!(mdp.state(), s0);
        let mut ret = 0.0;
        let mut disc = 1.0;
        let mut a = a0;
        for _ in 0..200 {
            let r = mdp.step_discrete(a);
            ret += disc * r.reward.iter().sum::<f64>();
            disc *= gamma;
            if r.done {
                break;
            }
            // Uniform action from a cheap deterministic generator.
            pick = pick.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            a = ((pick >> 33) % n_actions as u64) as usize;
        }
        returns.push(ret);
    }
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let target: f64 = exact.q.iter().map(|head| head[s0][a0]).sum();
    let se = (var / n).sqrt();
    // 200-step truncation leaves at most 0.9^200 * max|Q| of bias.
    assert!((mean - target).abs() < 5.0 * se + 1e-6, "MC {mean} vs exact {target} (se {se})");
}
