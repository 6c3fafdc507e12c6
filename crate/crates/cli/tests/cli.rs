use std::path::Path;
use std::process::{Command, Output};

fn normflate(dir: &Path, config: Option<&str>, args: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_normflate"));
    cmd.args(args).arg("--out").arg(dir.join("out"));
    if let Some(text) = config {
        let path = dir.join("config.toml");
        std::fs::write(&path, text).unwrap();
        cmd.arg("--config").arg(path);
    }
    cmd.output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

/// A fast table run: short grids and few trials.
const SMALL_TABLES: &str = r#"
[tables]
per_decade = 4
[tables.ezt]
n_list = [8, 16, 32]
[tables.drift]
n_list = [8, 16]
[tables.moments]
trials = 4
n_list = [8, 16]
per_decade = 4
"#;

#[test]
fn missing_seed_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = normflate(dir.path(), None, &["identities"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn unknown_key_and_bad_values_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&normflate(dir.path(), Some("[inflate]\ntrails = 3\n"), &["inflate", "--seed", "1"])), 2);
    assert_eq!(code(&normflate(dir.path(), Some("[inflate]\nn_list = []\n"), &["inflate", "--seed", "1"])), 2);
    assert_eq!(code(&normflate(dir.path(), Some("[besov]\nn_list = []\n"), &["besov", "--seed", "1"])), 2);
    assert_eq!(code(&normflate(dir.path(), Some("[inflate]\npreset = \"product\"\n"), &["inflate", "--seed", "1"])), 2);
    assert_eq!(code(&normflate(dir.path(), None, &["frobnicate"])), 2);
    assert_eq!(code(&normflate(dir.path(), None, &["--help"])), 0);
}

#[test]
fn seed_may_come_from_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = normflate(dir.path(), Some("seed = 5\n[sample]\ncutoff = 8\n"), &["sample"]);
    assert_eq!(code(&out), 0);
    for f in ["x.gfsf", "y.gfsf", "u0.gfsf", "summary.json"] {
        assert!(dir.path().join("out").join(f).exists(), "{f}");
    }
}

#[test]
fn sample_then_solve_from_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[sample]\ncutoff = 8\n[solve]\nt_end = 0.01\nsteps = 20\n";
    assert_eq!(code(&normflate(dir.path(), Some(cfg), &["sample", "--seed", "2"])), 0);
    let input = dir.path().join("out").join("u0.gfsf");
    let cfg = format!("{cfg}input = {:?}\nsnapshot_times = [0.0, 0.01]\n", input.to_str().unwrap());
    let out = normflate(dir.path(), Some(&cfg), &["solve", "--seed", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let traj = std::fs::read_to_string(dir.path().join("out").join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 22);
    assert!(dir.path().join("out").join("u_001.gfsf").exists());
    let jsonl = std::fs::read_to_string(dir.path().join("out").join("trajectory.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 2);
}

#[test]
fn identities_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[identities]\nfields = 5\nz_samples = 3\n";
    let out = normflate(dir.path(), Some(cfg), &["identities", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn small_tables_pass_and_growing_profile_trips_the_upper_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = normflate(dir.path(), Some(SMALL_TABLES), &["tables", "--seed", "4"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PASS ezt_upper_spread"), "{stdout}");

    let broken = format!("{SMALL_TABLES}[tables.ezt.profile]\nkind = \"power\"\ngamma = 1.0\n");
    let out = normflate(dir.path(), Some(&broken), &["tables", "--seed", "4"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(code(&out), 1, "{stdout}");
    assert!(stdout.contains("FAIL ezt_upper_spread"), "{stdout}");
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = "[besov]\nn_list = [8, 16, 32]\nn_max = 64\ntrials = 6\n";
    let read = |threads: &str| {
        let d = dir.path().join(threads);
        std::fs::create_dir_all(&d).unwrap();
        normflate(&d, Some(cfg), &["besov", "--seed", "6", "--threads", threads]);
        std::fs::read(d.join("out").join("besov.csv")).unwrap()
    };
    assert_eq!(read("1"), read("3"));
}
