#![allow(dead_code)]

use std::path::{Path, PathBuf};

use hdpg_core::envs::Environment;
use hdpg_harness::config::EnvKind;
use hdpg_harness::train::{build_env, checkpoint_manifest, new_agent};
use hdpg_harness::RunConfig;

pub fn line_config() -> RunConfig {
    RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/line.conf"))
        .expect("configs/line.conf parses")
}

pub fn small_walker_config() -> RunConfig {
    let mut cfg = RunConfig::default();
    cfg.env = EnvKind::Walker;
    cfg.agent.actor_hidden = vec![8];
    cfg.agent.critic_branch = 8;
    cfg.agent.critic_trunk = 8;
    cfg.agent.batch = 16;
    cfg.agent.replay_capacity = 10_000;
    cfg
}

/// Knee bend used by the stance fixture; a straight knee sits on the edge
/// of the action box where tanh cannot reach.
pub const KNEE_BEND: f64 = 0.02;

/// Checkpoint whose actor ignores its input and always outputs the split
/// stance joint targets: all weights zero, output bias `atanh` of the
/// stance in unit action coordinates.
pub fn stance_checkpoint(dir: &Path) -> PathBuf {
    let cfg = small_walker_config();
    let env = build_env(&cfg).unwrap();
    let agent = new_agent(&cfg, env.as_ref()).unwrap();
    let mut targets = cfg.walker.stance_targets();
    targets[1] = KNEE_BEND;
    targets[3] = KNEE_BEND;
    let unit = env.spec().unscale_action(&targets);
    let mut ckpt = agent.to_checkpoint(checkpoint_manifest(&cfg, 0));
    for net in [&mut ckpt.actor, &mut ckpt.target_actor] {
        let n = net.len();
        for (i, layer) in net.iter_mut().enumerate() {
            layer.weights.iter_mut().for_each(|w| *w = 0.0);
            layer.bias.iter_mut().for_each(|b| *b = 0.0);
            if i + 1 == n {
                for (b, u) in layer.bias.iter_mut().zip(&unit) {
                    *b = u.atanh();
                }
            }
        }
    }
    let path = dir.join("stance.bin");
    std::fs::write(&path, ckpt.encode()).unwrap();
    path
}

pub fn hdpg_bin() -> &'static str {
    env!("CARGO_BIN_EXE_hdpg")
}

pub fn run_cli(args: &[&str]) -> std::process::Output {
    std::process::Command::new(hdpg_bin())
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("hdpg binary runs")
}

/// Writes `cfg` back out in the sectioned config format.
pub fn write_config(cfg: &RunConfig, path: &Path) {
    let mut text = String::new();
    let mut current = "";
    let entries = cfg.entries();
    for (k, v) in &entries {
        let (sec, key) = k.split_once('.').unwrap();
        if sec != current {
            text.push_str(&format!("[{sec}]\n"));
            current = sec;
        }
        text.push_str(&format!("{key} = {v}\n"));
    }
    std::fs::write(path, text).unwrap();
}
