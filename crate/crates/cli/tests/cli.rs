use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mor_cli::format;
use mor_core::mor::{key_from_conjugator, PrivateKey, SecretConjugator};
use mor_core::{sl_generators, GroupSpec, Matrix, Prime};
use tempfile::TempDir;

fn mor(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mor"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn ok(args: &[&str], dir: &Path) -> String {
    let out = mor(args, dir);
    assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
    stdout(&out)
}

fn keygen(dir: &Path, group: &[&str], seed: &str) {
    let mut args = vec!["keygen"];
    args.extend_from_slice(group);
    args.extend_from_slice(&["--seed", seed, "--out", "keys"]);
    ok(&args, dir);
}

fn word_matrix(spec: &GroupSpec, word: &str) -> Matrix {
    spec.eval_word(&word.parse().unwrap()).unwrap()
}

fn sl27() -> GroupSpec {
    sl_generators(2, Prime::new(7).unwrap()).unwrap()
}

#[test]
fn encrypt_decrypt_round_trip() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    keygen(dir, &["--family", "sl", "--d", "2", "--p", "7"], "11");
    ok(
        &["encrypt", "--key", "keys/public.json", "--message", "1 -2 1", "--seed", "3", "--out", "ct.json"],
        dir,
    );
    let printed = ok(
        &["decrypt", "--key", "keys/private.json", "--in", "ct.json", "--out", "m.json"],
        dir,
    );
    let expected = word_matrix(&sl27(), "1 -2 1");
    assert_eq!(printed, expected.to_string());
    let stored = format::decode_message(&fs::read_to_string(dir.join("m.json")).unwrap(), &sl27()).unwrap();
    assert_eq!(stored, expected);

    // a message given as a file behaves the same
    fs::write(dir.join("msg.json"), format::encode_message(&sl27(), &expected, None)).unwrap();
    ok(&["encrypt", "--key", "keys/public.json", "--in", "msg.json", "--out", "ct2.json"], dir);
    assert_eq!(ok(&["decrypt", "--key", "keys/private.json", "--in", "ct2.json"], dir), printed);
}

#[test]
fn key_files_are_deterministic_and_carry_headers() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let group = ["keygen", "--family", "sp", "--d", "4", "--p", "5", "--seed", "42"];
    ok(&[&group[..], &["--out", "a"]].concat(), dir);
    ok(&[&group[..], &["--out", "b"]].concat(), dir);
    ok(&["keygen", "--family", "sp", "--d", "4", "--p", "5", "--seed", "43", "--out", "c"], dir);
    for file in ["public.json", "private.json"] {
        let a = fs::read(dir.join("a").join(file)).unwrap();
        assert_eq!(a, fs::read(dir.join("b").join(file)).unwrap(), "{file}");
        assert_ne!(a, fs::read(dir.join("c").join(file)).unwrap(), "{file}");
        let value: serde_json::Value = serde_json::from_slice(&a).unwrap();
        assert_eq!(value["format_version"], 1);
        assert_eq!(value["family"], "sp");
        assert_eq!(value["d"], 4);
        assert_eq!(value["p"], 5);
        assert_eq!(value["seed"], 42);
    }
    let private = fs::read_to_string(dir.join("a/private.json")).unwrap();
    assert!(private.contains(format::ORACLE_NOTE));
}

#[test]
fn invalid_parameters_exit_2() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    for args in [
        &["keygen", "--family", "sl", "--d", "2", "--p", "4"][..],
        &["keygen", "--family", "sp", "--d", "3", "--p", "7"],
        &["keygen", "--family", "sl", "--d", "1", "--p", "7"],
        &["keygen", "--t-cap", "1"],
        &["keygen", "--family", "custom"],
        &["bench", "--grid", "sl:2:9"],
        &["attack", "--key", "missing.json", "--in", "missing.json"],
        &["keygen", "--no-such-flag"],
    ] {
        let out = mor(args, dir);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
    }
}

#[test]
fn messages_outside_the_group_are_rejected() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    keygen(dir, &[], "1");
    let p = Prime::new(7).unwrap();
    let det2 = Matrix::from_rows(p, &[[2, 0], [0, 1]]).unwrap();
    fs::write(dir.join("bad.json"), format::encode_message(&sl27(), &det2, None)).unwrap();
    let out = mor(&["encrypt", "--key", "keys/public.json", "--in", "bad.json"], dir);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("message rejected"), "{}", stderr(&out));

    let out = mor(&["encrypt", "--key", "keys/public.json", "--message", "1 3"], dir);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
}

#[test]
fn seeds_change_the_ephemeral_exponent() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    keygen(dir, &["--p", "101"], "5");
    let phi_r = |seed: &str| {
        let name = format!("ct{seed}.json");
        ok(&["encrypt", "--key", "keys/public.json", "--message", "1 2", "--seed", seed, "--out", &name], dir);
        let value: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join(name)).unwrap()).unwrap();
        value["phi_r"].clone()
    };
    assert_eq!(phi_r("1"), phi_r("1"));
    // φ can have small order, so compare several seeds rather than two
    let distinct: std::collections::HashSet<String> = (1..=6).map(|s| phi_r(&s.to_string()).to_string()).collect();
    assert!(distinct.len() > 1);
}

#[test]
fn attack_runs_without_the_private_key() {
    for (group, word) in [
        (&["--family", "sl", "--d", "2", "--p", "7"][..], "2 1 -2 1 1"),
        (&["--family", "sp", "--d", "4", "--p", "5"], "1 4 -7 10 3"),
    ] {
        let tmp = TempDir::new().unwrap();
        let dir = tmp.path();
        keygen(dir, group, "9");
        ok(&["encrypt", "--key", "keys/public.json", "--message", word, "--out", "ct.json"], dir);
        let expected = ok(&["decrypt", "--key", "keys/private.json", "--in", "ct.json"], dir);
        fs::remove_file(dir.join("keys/private.json")).unwrap();

        let report = ok(
            &["attack", "--key", "keys/public.json", "--in", "ct.json", "--out", "recovered.json"],
            dir,
        );
        assert!(report.contains(&expected), "{report}");
        for field in ["k = ", "dim V = ", "l_i = ", "timings:", "self-consistent: yes"] {
            assert!(report.contains(field), "{field} missing from {report}");
        }
        assert!(!dir.join("keys/private.json").exists());
    }
}

#[test]
fn attack_reports_an_insufficient_bound() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    keygen(dir, &["--p", "101"], "4");
    ok(&["encrypt", "--key", "keys/public.json", "--message", "1 2 1", "--out", "ct.json"], dir);
    let out = mor(&["attack", "--key", "keys/public.json", "--in", "ct.json", "--bound", "1"], dir);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("increase the bound"), "{}", stderr(&out));
    let out = mor(&["attack", "--key", "keys/public.json", "--in", "ct.json", "--bound", "0"], dir);
    assert_eq!(code(&out), 2);
}

#[test]
fn malformed_files_exit_3() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    keygen(dir, &[], "2");
    ok(&["encrypt", "--key", "keys/public.json", "--message", "1", "--out", "ct.json"], dir);
    let ct = fs::read_to_string(dir.join("ct.json")).unwrap();
    fs::write(dir.join("short.json"), &ct[..ct.len() / 2]).unwrap();
    let out = mor(&["decrypt", "--key", "keys/private.json", "--in", "short.json"], dir);
    assert_eq!(code(&out), 3, "{}", stderr(&out));

    // a private key handed over as a ciphertext
    let out = mor(&["decrypt", "--key", "keys/private.json", "--in", "keys/private.json"], dir);
    assert_eq!(code(&out), 3);

    // a ciphertext for another group
    let other = dir.join("other");
    fs::create_dir(&other).unwrap();
    keygen(&other, &["--p", "5"], "2");
    let out = mor(&["decrypt", "--key", "other/keys/private.json", "--in", "ct.json"], dir);
    assert_eq!(code(&out), 3);
    let out = mor(&["attack", "--key", "other/keys/public.json", "--in", "ct.json"], dir);
    assert_eq!(code(&out), 3);
}

#[test]
fn exponent_one_keys_decrypt() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let spec = sl27();
    let a = word_matrix(&spec, "1 2 2");
    let secret = SecretConjugator { a_inv: a.inv().unwrap(), a };
    let pk = key_from_conjugator(&spec, &secret, 1).unwrap();
    fs::write(dir.join("public.json"), format::encode_public(&pk, None)).unwrap();
    fs::write(
        dir.join("private.json"),
        format::encode_private(&spec, &PrivateKey { t: 1 }, Some(&secret), None),
    )
    .unwrap();
    ok(&["encrypt", "--key", "public.json", "--message", "2 2 -1", "--out", "ct.json"], dir);
    let printed = ok(&["decrypt", "--key", "private.json", "--in", "ct.json"], dir);
    assert_eq!(printed, word_matrix(&spec, "2 2 -1").to_string());
}

#[test]
fn custom_groups_come_from_a_generator_file() {
    let tmp = TempDir::new().unwrap();
    let dir = tmp.path();
    let p = Prime::new(7).unwrap();
    let borel = GroupSpec::custom(
        p,
        vec![
            Matrix::from_rows(p, &[[1, 1], [0, 1]]).unwrap(),
            Matrix::from_rows(p, &[[2, 0], [0, 1]]).unwrap(),
        ],
    )
    .unwrap();
    fs::write(dir.join("group.json"), format::encode_group(&borel, None)).unwrap();
    keygen(dir, &["--family", "custom", "--d", "2", "--p", "7", "--group", "group.json"], "6");
    ok(&["encrypt", "--key", "keys/public.json", "--message", "1 2 -1", "--out", "ct.json"], dir);
    let report = ok(&["attack", "--key", "keys/public.json", "--in", "ct.json"], dir);
    assert!(report.contains(&word_matrix(&borel, "1 2 -1").to_string()), "{report}");
    assert!(report.contains("dim V = 3"), "{report}");

    let out = mor(&["keygen", "--family", "custom", "--d", "3", "--p", "7", "--group", "group.json"], dir);
    assert_eq!(code(&out), 2);
}

#[test]
fn bench_emits_one_row_per_cell() {
    let tmp = TempDir::new().unwrap();
    let csv = ok(&["bench", "--grid", "sl:2:7", "--seed", "3"], tmp.path());
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], "family,d,p,seed,dim_v,max_l,keygen_ms,encrypt_ms,attack_ms,success,error");
    assert_eq!(lines[1].split(',').count(), 11);
    assert!(lines[1].starts_with("sl,2,7,3,4,"), "{}", lines[1]);
    assert!(lines[1].ends_with(",true,"), "{}", lines[1]);
}

#[test]
fn default_bench_grid_succeeds() {
    let tmp = TempDir::new().unwrap();
    ok(&["bench", "--seed", "1", "--out", "grid.csv"], tmp.path());
    let csv = fs::read_to_string(tmp.path().join("grid.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for (i, row) in rows.iter().enumerate() {
        assert!(row.ends_with(",true,"), "{row}");
        assert_eq!(row.split(',').nth(3), Some((1 ^ i).to_string().as_str()));
    }
}

#[test]
fn selftest_passes_and_detects_an_injected_fault() {
    let tmp = TempDir::new().unwrap();
    let report = ok(&["selftest"], tmp.path());
    assert!(report.contains("0 failed"), "{report}");
    let out = mor(&["selftest", "--inject-fault"], tmp.path());
    assert_ne!(code(&out), 0);
    assert!(stdout(&out).contains("mor round trip ... FAILED"), "{}", stdout(&out));
}
