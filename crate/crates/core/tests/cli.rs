use std::path::Path;
use std::process::{Command, Output};

use adrlab::eval::RunReport;

fn adrlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adrlab"))
        .args(args)
        .env_remove("ADRLAB_SEED")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, extra: serde_json::Value) -> String {
    let mut cfg = serde_json::json!({
        "env": "point_pusher",
        "max_timesteps": 600,
        "eval_every": 300,
        "eval_resets": 1,
        "agent": {
            "hidden": [8, 8], "actor_lr": 1e-3, "critic_lr": 1e-3, "gamma": 0.99, "tau": 0.005,
            "batch_size": 16, "warmup_steps": 100, "noise_std": 0.1, "replay_capacity": 10000,
            "init": { "scheme": "uniform_fan_in" }
        },
        "svpg": {
            "particles": 2, "alpha": 10.0, "lr": 3e-4, "gamma": 0.99, "horizon": 50, "max_step": 0.05,
            "hidden": [8, 8], "log_std_init": -0.6931471805599453, "log_std_min": -2.995732273553991,
            "log_std_max": 0.0, "output_gain": 0.01, "step_rule": "adam"
        }
    });
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn missing_config_is_a_usage_error() {
    let o = adrlab(&["train", "--config", "/definitely/not/here.json"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("Usage"));
    let o = adrlab(&["train"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_config_field_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({ "learning_rate": 1.0 }));
    let o = adrlab(&["train", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("learning_rate"), "{}", stderr(&o));
}

#[test]
fn bootstrap_without_checkpoints_names_both_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({}));
    let o = adrlab(&["bootstrap", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("ensemble_checkpoint") && err.contains("discriminator_checkpoint"), "{err}");
}

#[test]
fn train_writes_report_and_refuses_to_clobber() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({}));
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();
    let o = adrlab(&["train", "--config", &cfg, "--mode", "udr", "--seed", "3", "--out", out_s]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["learning_curve.csv", "generalization.csv", "proposals.csv", "sampling_hist.csv", "run.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(out.join("checkpoints/agent").is_dir());
    let r = RunReport::read(&out).unwrap();
    assert_eq!((r.meta.mode.as_str(), r.meta.seed), ("udr", 3));
    assert!(String::from_utf8_lossy(&o.stdout).contains("udr point_pusher seed 3"));

    let o = adrlab(&["train", "--config", &cfg, "--mode", "udr", "--out", out_s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--overwrite"));
    let o = adrlab(&["train", "--config", &cfg, "--mode", "udr", "--out", out_s, "--overwrite"]);
    assert!(o.status.success(), "{}", stderr(&o));

    // A udr report has no proposals to histogram.
    let o = adrlab(&["hist", out_s]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn seed_comes_from_environment_unless_flag_given() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({ "max_timesteps": 200 }));
    let run = |extra: &[&str], name: &str| {
        let out = dir.path().join(name);
        let mut args = vec!["train", "--config", cfg.as_str(), "--mode", "baseline", "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        let o = Command::new(env!("CARGO_BIN_EXE_adrlab"))
            .args(&args)
            .env("ADRLAB_SEED", "41")
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        RunReport::read(&out).unwrap().meta.seed
    };
    assert_eq!(run(&[], "env"), 41);
    assert_eq!(run(&["--seed", "5"], "flag"), 5);
}

#[test]
fn adr_run_feeds_hist_bootstrap_eval_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), serde_json::json!({}));
    let adr = dir.path().join("adr");
    let o = adrlab(&["train", "--config", &cfg, "--mode", "adr", "--out", adr.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));

    let o = adrlab(&["hist", adr.to_str().unwrap(), "--bins", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("bucket_start,dim,bin,count"), "{text}");
    let total: u64 = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse::<u64>().unwrap()).sum();
    let r = RunReport::read(&adr).unwrap();
    assert_eq!(total, 2 * r.proposals.len() as u64);

    let ck = adr.join("checkpoints");
    let boot = dir.path().join("boot");
    let o = adrlab(&[
        "bootstrap",
        "--config",
        &cfg,
        "--ensemble",
        ck.join("ensemble").to_str().unwrap(),
        "--discriminator",
        ck.join("discriminator.json").to_str().unwrap(),
        "--out",
        boot.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(RunReport::read(&boot).unwrap().meta.mode, "bootstrap");

    let ev = dir.path().join("eval");
    let o = adrlab(&[
        "eval",
        "--agent",
        ck.join("agent").to_str().unwrap(),
        "--env",
        "point_pusher",
        "--resets",
        "2",
        "--out",
        ev.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let gen = std::fs::read_to_string(ev.join("generalization.csv")).unwrap();
    assert_eq!(gen.lines().count(), 26);

    let o = adrlab(&["eval", "--agent", ck.join("agent").to_str().unwrap(), "--env", "droplander"]);
    assert_eq!(o.status.code(), Some(1), "wrong env dims must fail: {}", stderr(&o));

    // Comparing a run with itself: zero deltas.
    let o = adrlab(&["compare", adr.to_str().unwrap(), adr.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let table = String::from_utf8(o.stdout).unwrap();
    let row = table.lines().find(|l| l.starts_with("adr")).unwrap_or_else(|| panic!("{table}"));
    let deltas: Vec<f64> = row.split_whitespace().rev().take(2).map(|x| x.parse().unwrap()).collect();
    assert!(deltas.iter().all(|d| *d == 0.0), "{table}");
}

#[test]
fn unknown_env_for_eval_is_a_usage_error() {
    let o = adrlab(&["eval", "--agent", "/tmp", "--env", "moonbase"]);
    assert_eq!(o.status.code(), Some(2));
}
