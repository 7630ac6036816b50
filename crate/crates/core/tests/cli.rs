//! Exit-code contract and CSV artifacts of the command-line binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_edgeworth"))
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

const BINARY_CFG: &str = "n_sellers = 2\nhorizon = 3\nreserve_price = 40.0\ndiscount = 0.9\n\
                          [demand]\nkind = \"bernoulli\"\nq = 0.5\n";
const POISSON_CFG: &str = "n_sellers = 2\nhorizon = 1\nreserve_price = 40.0\ndiscount = 0.9\n\
                           [demand]\nkind = \"poisson\"\nmean = 0.5\n";

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn values_writes_table_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", BINARY_CFG);
    let out = dir.path().join("values.csv");
    let o = run(&[
        "values",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# n_sellers=2"));
    assert!(text.contains("\n2,3,17.1,26.1\n"));
    assert!(text.contains("\n1,2,29,\n")); // empty reservation column for n=1
    assert!(!text.contains('\r'));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("V(2, 3) = 17.1"));
    assert!(stdout.contains("P*(2, 3) = 26.1"));
}

#[test]
fn equilibrium_pure_rows_and_cdf_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "b.toml", BINARY_CFG);
    let out = dir.path().join("eq.csv");
    assert!(run(&[
        "equilibrium",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("seller,price"));
    assert!(text.contains("1,26.1"));
    assert!(text.contains("2,26.1"));

    let cfg = write_cfg(dir.path(), "p.toml", POISSON_CFG);
    let out = dir.path().join("cdf.csv");
    assert!(run(&[
        "equilibrium",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "512",
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    // comment + header + 512 grid rows
    assert_eq!(text.lines().count(), 514);
    assert!(text.lines().nth(1).unwrap() == "p,cdf");
}

#[test]
fn exit_code_contract() {
    let dir = tempfile::tempdir().unwrap();

    // 1: unreadable/malformed config
    assert_eq!(
        run(&["values", "--config", "/no/such/file.toml"])
            .status
            .code(),
        Some(1)
    );
    let bad = write_cfg(dir.path(), "bad.toml", "n_sellers = \"two\"\n");
    assert_eq!(
        run(&["values", "--config", bad.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    // 1: trials = 0
    let cfg = write_cfg(dir.path(), "c.toml", BINARY_CFG);
    assert_eq!(
        run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--trials",
            "0"
        ])
        .status
        .code(),
        Some(1)
    );

    // 2: unwritable output path
    assert_eq!(
        run(&[
            "values",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            "/no/such/dir/x.csv"
        ])
        .status
        .code(),
        Some(2)
    );

    // 3: mixed-equilibrium precondition fails when P(demand >= 2) = 0
    let degenerate = write_cfg(
        dir.path(),
        "d.toml",
        "n_sellers = 2\nhorizon = 2\nreserve_price = 40.0\ndiscount = 0.9\n\
         [demand]\nkind = \"explicit\"\nprobs = [0.5, 0.5]\n",
    );
    let o = run(&["equilibrium", "--config", degenerate.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8(o.stderr)
        .unwrap()
        .contains("P(demand >= 2)"));

    // 3: no infinite-horizon comparator at discount = 1
    let undiscounted = write_cfg(
        dir.path(),
        "u.toml",
        &BINARY_CFG.replace("discount = 0.9", "discount = 1.0"),
    );
    assert_eq!(
        run(&["converge", "--config", undiscounted.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );

    // 4: certification failure for the planted profile; 0 for the real one
    let out = dir.path().join("v.csv");
    assert_eq!(
        run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--profile",
            "all-pbar",
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(4)
    );
    assert_eq!(
        run(&[
            "verify",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
}

#[test]
fn converge_binary_reaches_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", BINARY_CFG);
    let out = dir.path().join("conv.csv");
    assert!(run(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--tmax",
        "1000",
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let last = text.lines().last().unwrap();
    let fields: Vec<&str> = last.split(',').collect();
    assert_eq!(fields[0], "1000");
    let limit: f64 = fields[2].parse().unwrap();
    let gap: f64 = fields[3].parse().unwrap();
    assert!((limit - 32.7272727272).abs() < 1e-8);
    assert!(gap < 1e-6);
}

#[test]
fn converge_general_tracks_value_and_cdf() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "p.toml", POISSON_CFG);
    let out = dir.path().join("conv.csv");
    assert!(run(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--tmax",
        "50",
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("T,value,limit,gap,cdf_"));
    let mut prev = f64::INFINITY;
    for line in text.lines().skip(2) {
        let gap: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!(gap <= prev + 1e-12);
        prev = gap;
    }
}

#[test]
fn simulate_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_cfg(dir.path(), "c.toml", BINARY_CFG);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (out, seed) in [(&a, "5"), (&b, "5"), (&c, "6")] {
        assert!(run(&[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--trials",
            "2000",
            "--seed",
            seed,
            "--out",
            out.to_str().unwrap()
        ])
        .status
        .success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}
