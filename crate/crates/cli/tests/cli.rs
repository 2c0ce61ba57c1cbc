use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rpsel(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpsel"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn rpsel")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn three_points(dir: &Path) {
    fs::write(dir.join("pool.emb"), "3 2\n0 0\n3 4\n6 8\n").unwrap();
    fs::write(dir.join("pool.txt"), "left end\nmiddle\nright end\n").unwrap();
    fs::write(
        dir.join("pool.conll"),
        "left\tB-loc\nend\tO\n\nmiddle\tO\n\nright\tB-loc\nend\tO\n",
    )
    .unwrap();
}

fn data_rows(tsv: &str) -> Vec<Vec<String>> {
    tsv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect()
}

#[test]
fn rank_ratio_penalty_three_points() {
    let tmp = tempfile::tempdir().unwrap();
    three_points(tmp.path());
    ok(&rpsel(
        &[
            "rank",
            "--strategy",
            "ratio-penalty",
            "--corpus",
            "pool.txt",
            "--format",
            "plain-lines",
            "--embeddings",
            "pool.emb",
            "--output",
            "rps.tsv",
        ],
        tmp.path(),
    ));
    let tsv = fs::read_to_string(tmp.path().join("rps.tsv")).unwrap();
    let header = tsv.lines().next().unwrap();
    assert!(header.starts_with("# strategy=ratio-penalty seed=none beta=0.15"));
    assert!(header.ends_with("n=3"), "{header}");
    let rows = data_rows(&tsv);
    let order: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert_eq!(order, ["1", "0", "2"]);
    assert_eq!(rows[0][0], "1");
}

#[test]
fn rank_random_is_seeded_and_length_needs_no_embeddings() {
    let tmp = tempfile::tempdir().unwrap();
    three_points(tmp.path());
    for out in ["a.tsv", "b.tsv"] {
        ok(&rpsel(
            &[
                "rank",
                "--strategy",
                "random",
                "--seed",
                "11",
                "--corpus",
                "pool.conll",
                "--output",
                out,
            ],
            tmp.path(),
        ));
    }
    let a = fs::read(tmp.path().join("a.tsv")).unwrap();
    assert_eq!(a, fs::read(tmp.path().join("b.tsv")).unwrap());
    assert!(String::from_utf8(a).unwrap().contains("seed=11"));

    ok(&rpsel(
        &[
            "rank",
            "--strategy",
            "length",
            "--corpus",
            "pool.conll",
            "--output",
            "len.tsv",
        ],
        tmp.path(),
    ));
    let rows = data_rows(&fs::read_to_string(tmp.path().join("len.tsv")).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2][1], "1");
}

#[test]
fn rank_errors_exit_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    three_points(tmp.path());
    // Embedding strategy without embeddings.
    let out = rpsel(
        &[
            "rank",
            "--strategy",
            "coverage",
            "--corpus",
            "pool.conll",
            "--output",
            "x.tsv",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    // Random without a seed.
    let out = rpsel(
        &[
            "rank",
            "--strategy",
            "random",
            "--corpus",
            "pool.conll",
            "--output",
            "x.tsv",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    // Row count mismatch.
    fs::write(tmp.path().join("short.emb"), "2 2\n0 0\n1 1\n").unwrap();
    let out = rpsel(
        &[
            "rank",
            "--strategy",
            "ratio-penalty",
            "--corpus",
            "pool.conll",
            "--embeddings",
            "short.emb",
            "--output",
            "x.tsv",
        ],
        tmp.path(),
    );
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert!(!tmp.path().join("x.tsv").exists());
}

#[test]
fn select_batch_alc_and_alr() {
    let tmp = tempfile::tempdir().unwrap();
    let lines = [
        r#"{"index":0,"token_probs":[0.9,0.95]}"#,
        r#"{"index":1,"token_probs":[0.2]}"#,
        r#"{"index":2,"token_probs":[0.6,0.5]}"#,
        r#"{"index":3,"token_probs":[0.1,0.3]}"#,
    ];
    fs::write(tmp.path().join("u.jsonl"), lines.join("\n") + "\n").unwrap();
    fs::write(tmp.path().join("ex.txt"), "3\n").unwrap();
    ok(&rpsel(
        &[
            "select-batch",
            "--strategy",
            "alc",
            "--uncertainty",
            "u.jsonl",
            "--exclude",
            "ex.txt",
            "--batch",
            "2",
            "--output",
            "alc.txt",
        ],
        tmp.path(),
    ));
    assert_eq!(
        fs::read_to_string(tmp.path().join("alc.txt")).unwrap(),
        "1\n2\n"
    );

    ok(&rpsel(
        &[
            "select-batch",
            "--strategy",
            "alr",
            "--uncertainty",
            "u.jsonl",
            "--batch",
            "4",
            "--seed",
            "3",
            "--output",
            "alr.txt",
        ],
        tmp.path(),
    ));
    let mut picked: Vec<usize> = fs::read_to_string(tmp.path().join("alr.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    picked.sort();
    assert_eq!(picked, [0, 1, 2, 3]);

    let no_seed = rpsel(
        &[
            "select-batch",
            "--strategy",
            "alr",
            "--uncertainty",
            "u.jsonl",
            "--batch",
            "1",
            "--output",
            "x.txt",
        ],
        tmp.path(),
    );
    assert!(!no_seed.status.success());
    let too_many = rpsel(
        &[
            "select-batch",
            "--strategy",
            "alc",
            "--uncertainty",
            "u.jsonl",
            "--exclude",
            "ex.txt",
            "--batch",
            "4",
            "--output",
            "x.txt",
        ],
        tmp.path(),
    );
    assert!(!too_many.status.success());
}

#[test]
fn stats_reports_beta_and_neighbors() {
    let tmp = tempfile::tempdir().unwrap();
    three_points(tmp.path());
    let stdout = ok(&rpsel(
        &[
            "stats",
            "--embeddings",
            "pool.emb",
            "--corpus",
            "pool.txt",
            "--format",
            "plain-lines",
            "--neighbors",
            "0",
            "-m",
            "2",
        ],
        tmp.path(),
    ));
    let beta: f64 = stdout
        .lines()
        .find_map(|l| l.strip_prefix("beta\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!((beta - 0.15).abs() < 1e-12);
    assert!(stdout.contains("n\t3\n"));
    assert!(stdout.contains("1\t1\t"), "{stdout}");
    assert!(stdout.contains("\tmiddle"), "{stdout}");
    assert!(stdout.trim_end().ends_with("right end"), "{stdout}");
}

#[test]
fn run_then_verify() {
    let tmp = tempfile::tempdir().unwrap();
    three_points(tmp.path());
    fs::write(
        tmp.path().join("run.toml"),
        r#"
corpus = "pool.conll"
embeddings = "pool.emb"
k_grid = [1, 2]
output_dir = "ignored"

[[strategies]]
name = "ratio-penalty"

[[strategies]]
name = "linear-penalty"
alpha = 0.5
"#,
    )
    .unwrap();
    let stdout = ok(&rpsel(
        &["run", "--config", "run.toml", "--output-dir", "out"],
        tmp.path(),
    ));
    assert!(stdout.contains("wrote 7 files"), "{stdout}");
    assert!(!tmp.path().join("ignored").exists());
    let k1 = fs::read_to_string(tmp.path().join("out/subsets/ratio-penalty/k1.conll")).unwrap();
    assert_eq!(k1, "middle\tO\n");
    assert!(tmp
        .path()
        .join("out/rankings/linear-penalty-alpha0.5.tsv")
        .is_file());

    let stdout = ok(&rpsel(&["verify", "--dir", "out"], tmp.path()));
    assert!(stdout.contains("6 files verified"), "{stdout}");

    fs::write(tmp.path().join("out/rankings/ratio-penalty.tsv"), "").unwrap();
    let out = rpsel(&["verify", "--dir", "out"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio-penalty.tsv"));
}

#[test]
fn run_rejects_bad_config() {
    let tmp = tempfile::tempdir().unwrap();
    three_points(tmp.path());
    fs::write(
        tmp.path().join("bad.toml"),
        "corpus = \"pool.conll\"\nembeddings = \"pool.emb\"\nk_grid = [5]\noutput_dir = \"o\"\n\n[[strategies]]\nname = \"coverage\"\n",
    )
    .unwrap();
    let out = rpsel(&["run", "--config", "bad.toml"], tmp.path());
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("validate config"));

    fs::write(tmp.path().join("typo.toml"), "corpse = \"pool.conll\"\n").unwrap();
    let out = rpsel(&["run", "--config", "typo.toml"], tmp.path());
    assert!(!out.status.success());
}
