use std::path::Path;
use std::process::{Command, Output};

use ann_core::io::{read_ivecs, write_fvecs, write_sparse_csr};
use ann_core::SparseVector;

fn ann(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ann"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Points on a line, so the nearest ids of a query are easy to state.
fn line_fixture(dir: &Path) -> (std::path::PathBuf, std::path::PathBuf) {
    let base: Vec<f32> = (0..200).flat_map(|i| [i as f32, 0.0, 0.0, 1.0]).collect();
    let queries: Vec<f32> = [10.2f32, 150.9]
        .iter()
        .flat_map(|&x| [x, 0.0, 0.0, 1.0])
        .collect();
    let (b, q) = (dir.join("base.fvecs"), dir.join("query.fvecs"));
    write_fvecs(&b, 4, &base).unwrap();
    write_fvecs(&q, 4, &queries).unwrap();
    (b, q)
}

#[test]
fn build_search_ground_truth_and_bench() {
    let dir = tempfile::tempdir().unwrap();
    let (base, queries) = line_fixture(dir.path());
    let index = dir.path().join("line.idx");
    let out = ann(&[
        "build",
        "--data",
        s(&base),
        "--metric",
        "l2",
        "--m",
        "8",
        "--efc",
        "32",
        "--output",
        s(&index),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = ann(&[
        "search",
        "--index",
        s(&index),
        "--queries",
        s(&queries),
        "--k",
        "3",
        "--ef",
        "20",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let ids: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap())
        .collect();
    assert_eq!(text.lines().next(), Some("query,rank,id,score"));
    assert_eq!(ids, ["10", "11", "9", "151", "150", "152"]);

    let gt = dir.path().join("gt.ivecs");
    let out = ann(&[
        "ground-truth",
        "--data",
        s(&base),
        "--queries",
        s(&queries),
        "--k",
        "3",
        "--measure",
        "l2",
        "--output",
        s(&gt),
    ]);
    assert!(out.status.success());
    assert_eq!(
        read_ivecs(&gt).unwrap().data,
        vec![10, 11, 9, 151, 150, 152]
    );

    let csv = dir.path().join("bench.csv");
    let out = ann(&[
        "bench",
        "--index",
        s(&index),
        "--queries",
        s(&queries),
        "--ground-truth",
        s(&gt),
        "--k",
        "3",
        "--ef-list",
        "3,10,40",
        "--csv",
        s(&csv),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ef,k,recall,qps,mean_latency_us");
    assert_eq!(lines.len(), 4);
    assert!(lines[3].starts_with("40,3,1.000000,"));
}

#[test]
fn pq_and_sparse_builds() {
    let dir = tempfile::tempdir().unwrap();
    let (base, queries) = line_fixture(dir.path());
    let index = dir.path().join("pq.idx");
    let out = ann(&[
        "build",
        "--data",
        s(&base),
        "--metric",
        "l2",
        "--quantizer",
        "pq",
        "--pq-m",
        "2",
        "--pq-ks",
        "16",
        "--train-iters",
        "5",
        "--output",
        s(&index),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = ann(&[
        "search",
        "--index",
        s(&index),
        "--queries",
        s(&queries),
        "--k",
        "1",
        "--ef",
        "10",
    ]);
    assert!(out.status.success());

    let rows: Vec<SparseVector> = (0..50u32)
        .map(|i| SparseVector::from_pairs(vec![(i % 7, 1.0 + i as f32), (7 + i % 3, 0.5)]).unwrap())
        .collect();
    let csr = dir.path().join("base.csr");
    write_sparse_csr(&csr, 10, &rows).unwrap();
    let sidx = dir.path().join("sparse.idx");
    let out = ann(&[
        "build",
        "--data",
        s(&csr),
        "--metric",
        "ip",
        "--output",
        s(&sidx),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = ann(&[
        "search",
        "--index",
        s(&sidx),
        "--queries",
        s(&csr),
        "--k",
        "2",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap().lines().count(),
        1 + 50 * 2
    );

    // sparse vectors have no squared-L2 index
    let out = ann(&[
        "build",
        "--data",
        s(&csr),
        "--metric",
        "l2",
        "--output",
        s(&sidx),
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (base, queries) = line_fixture(dir.path());

    assert_eq!(ann(&["--help"]).status.code(), Some(0));
    assert_eq!(ann(&["build", "--data", s(&base)]).status.code(), Some(3));
    assert_eq!(ann(&["frobnicate"]).status.code(), Some(3));
    let idx = dir.path().join("x.idx");
    let out = ann(&[
        "build",
        "--data",
        s(&base),
        "--metric",
        "cosine",
        "--output",
        s(&idx),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let garbage = dir.path().join("garbage.fvecs");
    std::fs::write(&garbage, [7u8, 0, 0, 0, 1, 2]).unwrap();
    let out = ann(&[
        "build",
        "--data",
        s(&garbage),
        "--metric",
        "l2",
        "--output",
        s(&idx),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at byte 4"));

    let out = ann(&["search", "--index", s(&base), "--queries", s(&queries)]);
    assert_eq!(out.status.code(), Some(2), "an fvecs file is not an index");

    ann(&[
        "build",
        "--data",
        s(&base),
        "--metric",
        "l2",
        "--output",
        s(&idx),
    ]);
    let out = ann(&[
        "search",
        "--index",
        s(&idx),
        "--queries",
        s(&queries),
        "--k",
        "5",
        "--ef",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(3));
}
