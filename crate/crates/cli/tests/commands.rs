use std::path::{Path, PathBuf};
use std::process::Command;

use msrcode::NodeIndex;
use msrcode_cli::commands;
use msrcode_cli::manifest::Manifest;
use msrcode_cli::shard::{shard_file_name, ShardHeader, HEADER_LEN};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn msr(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_msr"))
        .args(args)
        .output()
        .unwrap();
    let text =
        String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn random_file(path: &Path, len: usize, seed: u64) -> Vec<u8> {
    let mut data = vec![0u8; len];
    ChaCha8Rng::seed_from_u64(seed).fill_bytes(&mut data);
    std::fs::write(path, &data).unwrap();
    data
}

/// init + encode at (q, t, m), returning the manifest and shard paths.
fn setup(
    dir: &Path,
    q: usize,
    t: usize,
    m: u32,
    data_len: usize,
) -> (Manifest, Vec<(NodeIndex, PathBuf)>, Vec<u8>) {
    let init = commands::init(q, t, Some(m), dir).unwrap();
    let input = dir.join("input.bin");
    let data = random_file(&input, data_len, 42);
    let enc = commands::encode(&input, &init.path, dir).unwrap();
    let p = enc.manifest.params().unwrap();
    let shards = p
        .nodes()
        .map(|nd| (nd, dir.join(shard_file_name(nd))))
        .collect();
    (enc.manifest, shards, data)
}

#[test]
fn init_examples() {
    let dir = tempfile::tempdir().unwrap();
    let r = commands::init(2, 2, None, dir.path()).unwrap();
    assert!(r.manifest.m <= 5);
    let r = commands::init(2, 3, None, dir.path()).unwrap();
    assert!(r.manifest.m <= 7);
    assert!(commands::init(1, 3, None, dir.path()).is_err());
    let (code, _) = msr(&["init", "--q", "1", "--t", "3", "--out-dir", s(dir.path())]);
    assert_eq!(code, 1);
}

#[test]
fn init_escalates_past_exhausted_fields() {
    let dir = tempfile::tempdir().unwrap();
    let r = commands::init(3, 2, None, dir.path()).unwrap();
    assert_eq!(r.tried, vec![3, 4]);
    assert_eq!((r.manifest.m, r.manifest.c0), (4, 2));
    let err = commands::init(3, 2, Some(3), dir.path()).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("361"), "{err}");
}

#[test]
fn init_is_idempotent() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    commands::init(2, 3, Some(7), a.path()).unwrap();
    commands::init(2, 3, Some(7), b.path()).unwrap();
    assert_eq!(
        std::fs::read(a.path().join("params.txt")).unwrap(),
        std::fs::read(b.path().join("params.txt")).unwrap()
    );
}

#[test]
fn empty_file_gives_zero_stripes() {
    let dir = tempfile::tempdir().unwrap();
    let (m, shards, _) = setup(dir.path(), 2, 2, 5, 0);
    assert_eq!(m.stripe_count, Some(0));
    for (nd, path) in &shards {
        let bytes = std::fs::read(path).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        let h = ShardHeader::from_bytes(&bytes).unwrap();
        assert_eq!(h.node(), *nd);
        m.check_header(&h).unwrap();
    }
    let out = dir.path().join("out.bin");
    let paths: Vec<PathBuf> = shards.iter().take(2).map(|(_, p)| p.clone()).collect();
    commands::decode(&dir.path().join("manifest.txt"), &paths, &out).unwrap();
    assert!(std::fs::read(&out).unwrap().is_empty());
}

#[test]
fn exactly_one_stripe_at_m16() {
    // at m = 16 a stripe is B symbols of 2 bytes each
    let dir = tempfile::tempdir().unwrap();
    let (m, _, _) = setup(dir.path(), 2, 2, 16, 8 * 2);
    assert_eq!(m.stripe_count, Some(1));
    let dir = tempfile::tempdir().unwrap();
    let (m, _, _) = setup(dir.path(), 2, 2, 16, 8 * 2 + 1);
    assert_eq!(m.stripe_count, Some(2));
}

#[test]
fn encode_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ma, sa, _) = setup(a.path(), 3, 2, 4, 5000);
    let (mb, sb, _) = setup(b.path(), 3, 2, 4, 5000);
    assert_eq!(ma, mb);
    for ((_, pa), (_, pb)) in sa.iter().zip(&sb) {
        assert_eq!(std::fs::read(pa).unwrap(), std::fs::read(pb).unwrap());
    }
}

#[test]
fn every_pair_decodes_at_q2_t2() {
    let dir = tempfile::tempdir().unwrap();
    let (_, shards, data) = setup(dir.path(), 2, 2, 5, 3333);
    let manifest = dir.path().join("manifest.txt");
    let out = dir.path().join("out.bin");
    for i in 0..shards.len() {
        for j in i + 1..shards.len() {
            let r = commands::decode(&manifest, &[shards[j].1.clone(), shards[i].1.clone()], &out)
                .unwrap();
            assert_eq!(std::fs::read(&out).unwrap(), data, "{i} {j}");
            assert_eq!(r.systematic, j < 2);
        }
    }
}

#[test]
fn zero_file_repairs() {
    let dir = tempfile::tempdir().unwrap();
    let init = commands::init(2, 3, Some(7), dir.path()).unwrap();
    let input = dir.path().join("zeros.bin");
    std::fs::write(&input, vec![0u8; 1000]).unwrap();
    let enc = commands::encode(&input, &init.path, dir.path()).unwrap();
    let p = enc.manifest.params().unwrap();
    for failed in p.nodes() {
        let helpers: Vec<PathBuf> = p
            .nodes()
            .filter(|&h| h != failed)
            .map(|h| dir.path().join(shard_file_name(h)))
            .collect();
        let out = dir.path().join("rebuilt.msr");
        let r = commands::repair(&enc.manifest_path, failed, &helpers, &out).unwrap();
        assert_eq!(
            std::fs::read(&out).unwrap(),
            std::fs::read(dir.path().join(shard_file_name(failed))).unwrap()
        );
        let stripes = enc.manifest.stripe_count.unwrap() as u64;
        for h in &r.helpers {
            assert_eq!(
                h.bytes_read,
                HEADER_LEN as u64 + stripes * 2 * p.beta as u64
            );
        }
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let (_, shards, data) = setup(d, 2, 2, 5, 777);
    let manifest = d.join("manifest.txt");
    let out = d.join("out.bin");
    let sh = |i: usize| s(&shards[i].1).to_string();

    assert_eq!(msr(&["--help"]).0, 0);
    assert_eq!(msr(&["frobnicate"]).0, 1);
    assert_eq!(msr(&["stats", "--q", "3", "--t", "3"]).0, 0);
    assert_eq!(msr(&["stats", "--q", "1", "--t", "3"]).0, 1);
    assert_eq!(
        msr(&["repair", "--manifest", s(&manifest), "--node", "1", &sh(0)]).0,
        1
    );

    let (code, _) = msr(&[
        "decode",
        "--manifest",
        s(&manifest),
        "-o",
        s(&out),
        &sh(2),
        &sh(3),
    ]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read(&out).unwrap(), data);
    // wrong count, duplicate
    assert_eq!(
        msr(&["decode", "--manifest", s(&manifest), "-o", s(&out), &sh(2)]).0,
        1
    );
    assert_eq!(
        msr(&[
            "decode",
            "--manifest",
            s(&manifest),
            "-o",
            s(&out),
            &sh(2),
            &sh(2)
        ])
        .0,
        1
    );
    // missing file
    assert_eq!(
        msr(&[
            "decode",
            "--manifest",
            s(&manifest),
            "-o",
            s(&out),
            &sh(2),
            "/nonexistent/shard"
        ])
        .0,
        3
    );
    assert_eq!(
        msr(&["verify", "--manifest", "/nonexistent/manifest.txt"]).0,
        3
    );

    // corrupted payload byte: checksum failure
    let bad = d.join("bad.msr");
    let mut bytes = std::fs::read(&shards[3].1).unwrap();
    *bytes.last_mut().unwrap() ^= 1;
    std::fs::write(&bad, &bytes).unwrap();
    let (code, text) = msr(&[
        "decode",
        "--manifest",
        s(&manifest),
        "-o",
        s(&out),
        &sh(2),
        s(&bad),
    ]);
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("checksum"));

    // header from another stripe set
    let mut bytes = std::fs::read(&shards[3].1).unwrap();
    bytes[14] ^= 1;
    std::fs::write(&bad, &bytes).unwrap();
    assert_eq!(
        msr(&[
            "decode",
            "--manifest",
            s(&manifest),
            "-o",
            s(&out),
            &sh(2),
            s(&bad)
        ])
        .0,
        2
    );

    // repair with d - 1 helpers
    let (code, text) = msr(&[
        "repair",
        "--manifest",
        s(&manifest),
        "--node",
        "1,0",
        &sh(1),
        &sh(2),
    ]);
    assert_eq!(code, 1, "{text}");
    // helper list containing the failed node
    assert_eq!(
        msr(&[
            "repair",
            "--manifest",
            s(&manifest),
            "--node",
            "1,0",
            &sh(0),
            &sh(1),
            &sh(2)
        ])
        .0,
        1
    );
    let rebuilt = d.join("rebuilt.msr");
    let (code, text) = msr(&[
        "repair",
        "--manifest",
        s(&manifest),
        "--node",
        "1,0",
        "-o",
        s(&rebuilt),
        &sh(1),
        &sh(2),
        &sh(3),
    ]);
    assert_eq!(code, 0, "{text}");
    assert!(text.contains("naive"));
    assert_eq!(
        std::fs::read(&rebuilt).unwrap(),
        std::fs::read(&shards[0].1).unwrap()
    );
}

#[test]
fn verify_fresh_tampered_and_vacuous() {
    let dir = tempfile::tempdir().unwrap();
    let r = commands::init(2, 3, Some(7), dir.path()).unwrap();
    let params = s(&r.path).to_string();
    assert_eq!(
        msr(&["verify", "--manifest", &params, "--trials", "5"]).0,
        0
    );
    assert_eq!(
        msr(&["verify", "--manifest", &params, "--trials", "0"]).0,
        0
    );

    let mut tampered = r.manifest.clone();
    let p = tampered.params().unwrap();
    // a coefficient rejected by the rank oracle
    let bad = p
        .field
        .nonzero_elements()
        .find(|&c| {
            !msrcode::parity::build_system(&p, c)
                .unwrap()
                .is_mds()
                .unwrap()
        })
        .expect("some coefficient fails at m=7");
    tampered.c0 = bad.value();
    let path = dir.path().join("tampered.txt");
    tampered.save(&path).unwrap();
    let (code, text) = msr(&["verify", "--manifest", s(&path)]);
    assert_eq!(code, 2, "{text}");
    assert!(text.contains("FAIL"));
    assert!(!commands::verify(&path, 0, 1).unwrap().passed());
}

#[test]
fn stats_rows() {
    let (code, text) = msr(&["stats", "--q", "3", "--t", "3"]);
    assert_eq!(code, 0);
    for line in [
        "alpha        27",
        "beta         9",
        "B            162",
        "d*beta       72",
        "(k/(t-1))^t  27.0000",
    ] {
        assert!(text.contains(line), "{line}\n{text}");
    }
}
