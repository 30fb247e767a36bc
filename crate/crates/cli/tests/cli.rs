use std::process::{Command, Output};

use colorkr::link::{golden_trefoil, homology, HomologyReport, LinkSpec};

fn colorkr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colorkr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

/// Cell text of a rendered table, found by right-aligning against the header.
fn table_cell(table: &str, h: i64, q: i64) -> String {
    let rows: Vec<Vec<char>> = table.lines().map(|l| l.chars().collect()).collect();
    let header: String = rows[0].iter().collect();
    let end_of = |line: &[char], token: &str| -> Option<usize> {
        let words: Vec<(usize, String)> = split_words(line);
        words.into_iter().find(|(_, w)| w == token).map(|(end, _)| end)
    };
    let column_end = end_of(&rows[0], &h.to_string()).unwrap_or_else(|| panic!("no column {h} in {header}"));
    let row = rows[1..]
        .iter()
        .find(|r| split_words(r).first().map(|(_, w)| w.as_str()) == Some(q.to_string().as_str()))
        .unwrap_or_else(|| panic!("no row {q}"));
    split_words(row)
        .into_iter()
        .skip(1)
        .find(|(end, _)| *end == column_end)
        .map(|(_, w)| w)
        .unwrap_or_default()
}

/// Whitespace-separated words with the char index one past their end.
fn split_words(line: &[char]) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut word = String::new();
    for (i, c) in line.iter().enumerate() {
        if c.is_whitespace() {
            if !word.is_empty() {
                out.push((i, std::mem::take(&mut word)));
            }
        } else {
            word.push(*c);
        }
    }
    if !word.is_empty() {
        out.push((line.len(), word));
    }
    out
}

#[test]
fn trefoil_table_layout() {
    let out = colorkr(&["trefoil", "--n", "4", "--a", "2", "--format", "table"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(table_cell(&text, -5, 24), "Z⊕Z₂");
    assert_eq!(table_cell(&text, -6, 30), "Z");
    assert_eq!(table_cell(&text, -2, 16), "Z₄");
    assert_eq!(table_cell(&text, -1, 16), "");
    assert_eq!(table_cell(&text, -1, 30), "");
    let first: Vec<&str> = text.lines().next().unwrap().split_whitespace().collect();
    assert_eq!(first, ["q\\h", "-6", "-5", "-4", "-3", "-2", "-1", "0"]);
    // q descends from 30 to 4 in steps of two, then the Euler line.
    let qs: Vec<i64> = text
        .lines()
        .skip(1)
        .filter_map(|l| l.split_whitespace().next()?.parse().ok())
        .collect();
    assert_eq!(qs, (2..=15).rev().map(|i| 2 * i).collect::<Vec<i64>>());
    assert!(text.lines().last().unwrap().starts_with("euler: "));
}

#[test]
fn every_table_cell_matches_the_library() {
    for (n, a) in [(4, 2), (5, 2), (6, 2)] {
        let text = stdout(&colorkr(&["trefoil", "--n", &n.to_string(), "--a", &a.to_string()]));
        let want = golden_trefoil(n, a).unwrap();
        for ((h, q), g) in want.cells() {
            assert_eq!(table_cell(&text, h, q), g.display_grouped(), "({n},{a}) at ({h},{q})");
        }
    }
}

#[test]
fn unknot_json() {
    let out = colorkr(&["unknot", "--n", "2", "--a", "1", "--format", "json"]);
    assert!(out.status.success());
    let report: HomologyReport = serde_json::from_str(&stdout(&out)).unwrap();
    let cells: Vec<(i64, i64, usize, bool)> = report
        .groups
        .iter()
        .map(|c| (c.h, c.q, c.rank, c.torsion.is_empty()))
        .collect();
    assert_eq!(cells, [(0, -1, 1, true), (0, 1, 1, true)]);
}

#[test]
fn json_round_trips_to_the_same_groups() {
    let cases: [(&[&str], LinkSpec); 5] = [
        (&["trefoil", "--n", "6", "--a", "3"], LinkSpec::trefoil(6, 3).unwrap()),
        (
            &["trefoil", "--n", "5", "--a", "2", "--framing", "blackboard"],
            LinkSpec::trefoil(5, 2)
                .unwrap()
                .with_framing("blackboard".parse().unwrap()),
        ),
        (
            &["trefoil", "--n", "3", "--a", "1", "--reduced"],
            LinkSpec::trefoil(3, 1).unwrap().with_reduced(true),
        ),
        (
            &["hopf", "--n", "5", "--a", "2", "--b", "3"],
            LinkSpec::hopf(5, 2, 3).unwrap(),
        ),
        (&["unknot", "--n", "6", "--a", "3"], LinkSpec::unknot(6, 3).unwrap()),
    ];
    for (args, spec) in cases {
        let mut args = args.to_vec();
        args.extend(["--format", "json"]);
        let out = colorkr(&args);
        assert!(out.status.success(), "{args:?}");
        let report: HomologyReport = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(report.groups(), homology(&spec).unwrap(), "{args:?}");
        assert_eq!(report, HomologyReport::new(&spec, &homology(&spec).unwrap()));
    }
}

#[test]
fn framing_changes_only_the_grading() {
    let parse = |framing: &str| -> HomologyReport {
        serde_json::from_str(&stdout(&colorkr(&[
            "trefoil",
            "--n",
            "5",
            "--a",
            "2",
            "--framing",
            framing,
            "--format",
            "json",
        ])))
        .unwrap()
    };
    let (seifert, blackboard) = (parse("seifert").groups(), parse("blackboard").groups());
    let shift = colorkr::link::trefoil_framing_shift(5, 2, "seifert".parse().unwrap());
    assert_eq!((shift.dh, shift.dq), (-6, 24));
    assert_eq!(blackboard.shift(shift.dh, shift.dq), seifert);
}

#[test]
fn csv_columns() {
    let text = stdout(&colorkr(&["trefoil", "--n", "6", "--a", "3", "--format", "csv"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("h,q,rank,torsion"));
    let want = homology(&LinkSpec::trefoil(6, 3).unwrap()).unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), want.cells().count());
    assert!(rows.contains(&"-5,43,1,2 6 6"));
}

#[test]
fn divisor_chain_flag() {
    let grouped = stdout(&colorkr(&["trefoil", "--n", "6", "--a", "3"]));
    let chain = stdout(&colorkr(&["trefoil", "--n", "6", "--a", "3", "--divisor-chain"]));
    assert_eq!(table_cell(&grouped, -5, 43), "Z⊕Z₂⊕(Z₆)²");
    assert_eq!(table_cell(&chain, -5, 43), "Z⊕Z₂⊕Z₆⊕Z₆");
}

#[test]
fn thread_count_does_not_change_output() {
    for args in [
        &["trefoil", "--n", "6", "--a", "3", "--format", "json"][..],
        &["hopf", "--n", "6", "--a", "3", "--b", "2"][..],
        &["repspace", "--n", "5", "--a", "2", "--format", "json"][..],
    ] {
        let default = colorkr(args);
        let mut single = args.to_vec();
        single.extend(["--threads", "1"]);
        let single = colorkr(&single);
        assert!(default.status.success());
        assert_eq!(default.stdout, single.stdout, "{args:?}");
        assert_eq!(colorkr(args).stdout, default.stdout, "{args:?} repeated");
    }
}

#[test]
fn invalid_flags_exit_two() {
    for args in [
        &["trefoil", "--n", "4"][..],
        &["trefoil", "--n", "4", "--a", "5"][..],
        &["trefoil", "--n", "4", "--a", "2", "--format", "xml"][..],
        &["trefoil", "--n", "4", "--a", "2", "--framing", "twisted"][..],
        &["trefoil", "--n", "4", "--a", "2", "--truncation", "-2"][..],
        &["hopf", "--n", "3", "--a", "1", "--b", "4"][..],
        &["repspace", "--n", "3", "--a", "1", "--tol", "-1"][..],
        &["selftest", "--truncation", "-1"][..],
        &["knot", "--n", "3"][..],
    ] {
        assert_eq!(colorkr(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn truncated_series() {
    let out = colorkr(&[
        "trefoil",
        "--n",
        "2",
        "--a",
        "1",
        "--truncation",
        "6",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    // Summand l=0 has one free generator in each even degree: the ranks are all 1.
    let l0: Vec<&str> = text.lines().filter(|l| l.starts_with("0,")).collect();
    assert_eq!(l0.len(), 4);
    assert!(l0.iter().all(|l| l.ends_with(",1")));
    let zero = stdout(&colorkr(&["trefoil", "--n", "4", "--a", "2", "--truncation", "0"]));
    assert!(zero.lines().all(|l| l.ends_with("q^0") || !l.contains('+')), "{zero}");
}

#[test]
fn repspace_report() {
    let out = colorkr(&["repspace", "--n", "4", "--a", "2", "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["components"].as_array().unwrap().len(), 3);
    assert_eq!(v["components"][2]["name"], "U(4)/U(2)×U(2)");
    assert!(v["max_residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["total_space"]["rep_rank"], v["total_space"]["link_rank"]);
    let hopf = colorkr(&["repspace", "--n", "3", "--a", "1", "--b", "2", "--format", "csv"]);
    assert!(hopf.status.success());
    assert_eq!(stdout(&hopf).lines().count(), 1 + 2);
}

#[test]
fn verify_tables_reports_first_mismatch() {
    // The bundled (6,3) table is kept verbatim, and two of its cells differ from the computation.
    let out = colorkr(&["verify-tables"]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    for ok in ["(N,a)=(4,2): ok", "(N,a)=(5,2): ok", "(N,a)=(6,2): ok"] {
        assert!(text.contains(ok), "{text}");
    }
    assert!(
        text.contains("(N,a)=(6,3): first mismatch at (h,q)=(-5,35): computed Z⁵, table Z⁴"),
        "{text}"
    );
}

#[test]
fn selftest_passes() {
    let out = colorkr(&["selftest"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert_eq!(stdout(&out).lines().count(), 5);
}
