use std::process::{Command, Output};

fn iwasawa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iwasawa"))
        .args(args)
        .env_remove("IWASAWA_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn predict_prints_tables() {
    let o = iwasawa(&["predict"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("regular_proportion;m=2;0.6065"));
    assert!(text.contains("5;3;2;0.9584;0.0399;0.0016;0.0001"));
}

#[test]
fn single_lambda() {
    let o = iwasawa(&["lambda", "--char", "1", "--twist", "32", "--prime", "37"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().nth(1).unwrap(), "1;37;32;1;1;no;9;1;both");

    let o = iwasawa(&["lambda", "--char", "4.1", "--twist", "1", "--prime", "5", "--method", "series"]);
    let row = stdout(&o);
    let fields: Vec<&str> = row.lines().nth(1).unwrap().split(';').collect();
    assert_eq!(fields[5], "yes");
}

#[test]
fn scan_is_reproducible_and_rows_match_single_shot() {
    let args = ["scan-order", "--prime", "5", "--order", "3", "--cond-max", "80", "--twists", "0,2"];
    let a = iwasawa(&args);
    let b = iwasawa(&[&args[..], &["--jobs", "1"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    // every cubic character of conductor 7 and 9 reproduced one at a time
    let mut ones = 0;
    for label in ["7.2", "7.4", "9.2", "9.4"] {
        for twist in ["0", "2"] {
            let o = iwasawa(&["lambda", "--char", label, "--twist", twist, "--prime", "5"]);
            let line = stdout(&o);
            let lambda: u32 = line.lines().nth(1).unwrap().split(';').nth(4).unwrap().parse().unwrap();
            ones += (lambda == 1) as u32;
        }
    }
    let small = iwasawa(&["scan-order", "--prime", "5", "--order", "3", "--cond-max", "10", "--twists", "0,2"]);
    let text = stdout(&small);
    let count_ones: f64 = text
        .lines()
        .filter(|l| l.starts_with("0;") || l.starts_with("2;"))
        .map(|l| {
            let f: Vec<&str> = l.split(';').collect();
            f[1].parse::<f64>().unwrap() * f[3].parse::<f64>().unwrap()
        })
        .sum();
    assert_eq!(count_ones.round() as u32, ones);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scan.conf");
    std::fs::write(&cfg, "prime = 7\norder = 2\ncond_max = 40\n").unwrap();
    let out = dir.path().join("table.csv");
    let o = iwasawa(&["scan-order", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# p=7 order=2 f=1 cond=1..40\n"));

    let o = iwasawa(&["scan-order", "--config", cfg.to_str().unwrap(), "--prime", "3"]);
    assert!(stdout(&o).starts_with("# p=3 order=2"));

    std::fs::write(&cfg, "colour = blue\n").unwrap();
    let o = iwasawa(&["scan-order", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    assert_eq!(iwasawa(&["scan-order", "--prime", "9", "--order", "2"]).status.code(), Some(1));
    assert_eq!(iwasawa(&["lambda", "--char", "7.2", "--prime", "3"]).status.code(), Some(1));
    // a series depth too small to carry any digits excludes every row
    let o = iwasawa(&["scan-order", "--prime", "5", "--order", "2", "--cond-max", "10", "--series-depth", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("row(s) excluded"));
}

#[test]
fn regularity_and_fields() {
    let o = iwasawa(&["regular-scan", "--order", "1", "--prime", "7,37", "--report"]);
    assert_eq!(stdout(&o), "label;p;f;verdict;witnesses\n1;7;1;regular;\n1;37;1;irregular;32:1\n");

    let o = iwasawa(&["regular-scan", "--order", "2", "--cond-max", "30", "--primes-count", "5"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("pred.;0.6065;-;-;-"));

    let o = iwasawa(&["field-scan", "--order", "1", "--prime", "37", "--detail"]);
    assert_eq!(stdout(&o), "field;p;lambda_tot\nQ;37;1\n");
}

#[test]
fn rmt_sim_csv() {
    let args = ["rmt-sim", "--n", "4", "--q", "3", "--samples", "3000", "--seed", "11"];
    let a = iwasawa(&args);
    assert!(a.status.success());
    let text = stdout(&a);
    assert!(text.starts_with("r;count;empirical;exact;rho\n"));
    assert_eq!(text.lines().count(), 6);
    assert_eq!(a.stdout, iwasawa(&args).stdout);
}

#[test]
fn appendix_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("lambda5.csv");
    let o = iwasawa(&["appendix", "--prime", "5", "--cond-max", "40", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    for line in text.lines() {
        let f: Vec<&str> = line.split(';').collect();
        assert_eq!(f.len(), 7);
        let lambda: u32 = f[0].trim_start_matches(">=").parse().unwrap();
        assert!(lambda > (f[6] == "yes") as u32);
    }
}

#[test]
fn verify_subcommand() {
    let o = iwasawa(&["verify"]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
}
