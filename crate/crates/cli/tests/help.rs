//! Help output is pinned to files under `tests/snapshots`. Set
//! `STEPCAST_UPDATE_SNAPSHOTS=1` to rewrite them after an intentional change.

use std::path::PathBuf;

use stepcast_cli::{help_text, SUBCOMMANDS};

fn snapshot_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/snapshots").join(format!("{name}.txt"))
}

fn check_snapshot(name: &str, actual: &str) {
    let path = snapshot_path(name);
    if std::env::var_os("STEPCAST_UPDATE_SNAPSHOTS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("{}: {e}; rerun with STEPCAST_UPDATE_SNAPSHOTS=1", path.display()));
    assert_eq!(actual, expected, "help for `{name}` changed; rerun with STEPCAST_UPDATE_SNAPSHOTS=1");
}

#[test]
fn top_level_help_matches_snapshot() {
    let text = help_text(None).unwrap();
    for name in SUBCOMMANDS {
        assert!(text.contains(name), "{name} missing from top-level help");
    }
    check_snapshot("stepcast", &text);
}

#[test]
fn subcommand_help_matches_snapshots() {
    for name in SUBCOMMANDS {
        check_snapshot(name, &help_text(Some(name)).unwrap());
    }
}

#[test]
fn every_flag_is_documented() {
    for name in SUBCOMMANDS {
        let text = help_text(Some(name)).unwrap();
        for line in text.lines().map(str::trim_start).filter(|l| l.starts_with("--")) {
            // A documented flag is followed by its description on the same line
            // or on the next, indented one.
            let flag = line.split_whitespace().next().unwrap();
            let has_inline = line.split("  ").filter(|s| !s.trim().is_empty()).count() > 1;
            let next = text.lines().skip_while(|l| l.trim_start() != line).nth(1).unwrap_or("");
            let has_next = next.starts_with("          ") && !next.trim_start().starts_with('-');
            assert!(has_inline || has_next, "`{name} {flag}` has no description");
        }
    }
    assert!(help_text(Some("no-such-command")).is_none());
}
