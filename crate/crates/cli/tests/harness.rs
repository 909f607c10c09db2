use std::collections::HashSet;
use std::path::PathBuf;
use std::process::Command;

use lindecomp::protocols::{ProtocolTag, SamplerStyle};
use lindecomp_cli::{
    bench, list_protocols, parse_param, render_catalog, run_experiment, trial_seed, BenchConfig,
    ConfigFile, ExperimentConfig, Overrides,
};

fn config(tag: ProtocolTag, trials: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        trials,
        seed,
        ..ExperimentConfig::new(tag)
    }
}

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lindecomp"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lindecomp-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn stickel_batch_recovers_every_key() {
    let report = run_experiment(&config(ProtocolTag::Stickel, 50, 1)).unwrap();
    assert_eq!(report.trials, 50);
    assert_eq!(report.records.len(), 50);
    assert_eq!(report.success_rate, 1.0);
    for r in &report.records {
        assert!(r.success, "trial {}: {:?}", r.trial, r.error);
        assert_eq!(r.recovered_key, r.honest_key);
        assert!(r.basis_dim > 0 && r.field_ops > 0 && r.generation_ops > 0);
        assert!(r.wall_ms.is_none());
    }
}

#[test]
fn romanczuk_both_recoveries_agree() {
    let report = run_experiment(&config(ProtocolTag::Romanczuk, 20, 3)).unwrap();
    assert!(report.all_succeeded());
    for r in &report.records {
        assert!(r.cross_check_key.is_some());
        assert_eq!(r.cross_check_key, r.recovered_key);
    }
}

#[test]
fn success_rate_counts_exact_matches() {
    let report = run_experiment(&config(ProtocolTag::WangCao, 7, 5)).unwrap();
    let matches = report
        .records
        .iter()
        .filter(|r| r.recovered_key.is_some() && r.recovered_key == r.honest_key)
        .count();
    assert_eq!(report.successes, matches);
    assert_eq!(report.success_rate, matches as f64 / 7.0);
}

#[test]
fn reports_are_byte_identical_across_processes() {
    let a = scratch("a.json");
    let b = scratch("b.json");
    for path in [&a, &b] {
        let out = exe()
            .args(["run", "--protocol", "ko_lee", "--trials", "1", "--seed", "42", "--out"])
            .arg(path)
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    let (a, b) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn parallel_and_sequential_runs_agree() {
    let par = run_experiment(&config(ProtocolTag::ShpilrainUshakov, 6, 9)).unwrap();
    let mut seq_cfg = config(ProtocolTag::ShpilrainUshakov, 6, 9);
    seq_cfg.trace = true;
    let seq = run_experiment(&seq_cfg).unwrap();
    assert_eq!(par.records, seq.records);
}

#[test]
fn trial_seeds_are_stable_and_distinct() {
    let seeds: Vec<u64> = (0..1000).map(|i| trial_seed(7, i)).collect();
    assert_eq!(seeds, (0..1000).map(|i| trial_seed(7, i)).collect::<Vec<_>>());
    assert_eq!(seeds.iter().collect::<HashSet<_>>().len(), seeds.len());
    assert_ne!(trial_seed(7, 0), trial_seed(8, 0));
}

#[test]
fn catalog_lists_all_schemes_in_fixed_order() {
    let text = render_catalog(&list_protocols());
    for tag in ProtocolTag::ALL {
        assert!(text.contains(tag.as_str()), "{tag} missing");
    }
    assert!(text.contains("hkks"));
    assert_eq!(text, render_catalog(&list_protocols()));
    let tags: Vec<ProtocolTag> = list_protocols().iter().map(|e| e.tag).collect();
    assert_eq!(tags, ProtocolTag::ALL.to_vec());

    let out = exe().arg("list").output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), text);
}

#[test]
fn command_line_beats_file_beats_defaults() {
    let file: ConfigFile = serde_json::from_str(
        r#"{"protocol": "ko_lee", "trials": 3, "seed": 11,
            "params": {"n": 2, "style": "center_scalars", "p": 7}}"#,
    )
    .unwrap();
    let cfg = ExperimentConfig::resolve(
        Some(file),
        Overrides {
            seed: Some(12),
            params: vec![parse_param("p=11").unwrap()],
            ..Overrides::default()
        },
    )
    .unwrap();
    assert_eq!(cfg.protocol, ProtocolTag::KoLee);
    assert_eq!((cfg.trials, cfg.seed), (3, 12));
    assert_eq!((cfg.params.p, cfg.params.n), (11, 2));
    assert_eq!(cfg.params.style, SamplerStyle::CenterScalars);
    // untouched keys keep the scheme default
    assert_eq!(cfg.params.word_length, 8);
}

#[test]
fn bad_configs_are_rejected() {
    assert!(parse_param("n").is_err());
    assert!(parse_param("=4").is_err());
    let resolve = |protocol, params: &[&str], large| {
        ExperimentConfig::resolve(
            None,
            Overrides {
                protocol,
                params: params.iter().map(|s| parse_param(s).unwrap()).collect(),
                large,
                ..Overrides::default()
            },
        )
    };
    assert!(resolve(None, &[], false).is_err());
    assert!(resolve(Some(ProtocolTag::Stickel), &["bogus=1"], false).is_err());
    assert!(resolve(Some(ProtocolTag::Stickel), &["n=0"], false).is_err());
    assert!(resolve(Some(ProtocolTag::Stickel), &[], true).is_err());
    assert!(resolve(Some(ProtocolTag::Hkks), &[], true).is_ok());
    assert!(serde_json::from_str::<ConfigFile>(r#"{"protcol": "hkks"}"#).is_err());
    let mut zero = ExperimentConfig::new(ProtocolTag::Stickel);
    zero.trials = 0;
    assert!(run_experiment(&zero).is_err());

    let out = exe()
        .args(["run", "--protocol", "stickel", "--param", "exponent_bound=0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_drives_a_run() {
    let path = scratch("cfg.json");
    std::fs::write(&path, r#"{"protocol": "alvarez", "trials": 2, "seed": 4}"#).unwrap();
    let out = exe().arg("run").arg("--config").arg(&path).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["protocol"], "alvarez");
    assert_eq!(report["trials"], 2);
    assert_eq!(report["success_rate"], 1.0);
    assert!(report["environment"]["crate_version"].is_string());
}

#[test]
fn private_view_only_on_request() {
    let mut cfg = config(ProtocolTag::Hurley, 1, 2);
    cfg.emit_transcripts = true;
    let public = run_experiment(&cfg).unwrap();
    let t = public.records[0].transcript.as_ref().unwrap();
    assert!(t.get("public").is_some());
    assert!(t.get("private").is_none());
    cfg.emit_private = true;
    let private = run_experiment(&cfg).unwrap();
    assert!(private.records[0].transcript.as_ref().unwrap().get("private").is_some());
}

#[test]
fn bench_reaches_full_rank() {
    let rows = bench(&BenchConfig {
        dims: vec![10, 20],
        generators: 2,
        p: 7,
        seed: 1,
    })
    .unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r.rank, r.dim);
        assert!((r.ops_per_cube - r.ops as f64 / (r.dim as f64).powi(3)).abs() < 1e-12);
    }
    assert!(bench(&BenchConfig { dims: vec![4], generators: 1, p: 6, seed: 0 }).is_err());
}
