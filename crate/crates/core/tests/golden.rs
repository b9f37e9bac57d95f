//! Byte comparison of the fixture job against stored output.
//!
//! Set `TACTMAP_BLESS=1` to rewrite the files under `testdata/golden/`
//! after an intended rendering change.

mod common;

use std::path::PathBuf;

use common::{block_2x2, fixture_store};
use tactmap_core::pipeline::zip::read_zip;
use tactmap_core::{ArchiveManifest, Pipeline};

const DPI: u32 = 100;

fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("testdata").join("golden")
}

#[test]
fn fixture_job_matches_golden_files() {
    let out = Pipeline::new(fixture_store()).run(&block_2x2(), DPI, true).unwrap();
    let dir = golden_dir();
    let manifest_json = serde_json::to_string_pretty(&out.manifest).unwrap() + "\n";

    if std::env::var_os("TACTMAP_BLESS").is_some() {
        std::fs::create_dir_all(&dir).unwrap();
        for (name, data) in &out.files {
            std::fs::write(dir.join(name), data).unwrap();
        }
        std::fs::write(dir.join("manifest.json"), &manifest_json).unwrap();
        return;
    }

    for (name, data) in &out.files {
        let path = dir.join(name);
        let want = std::fs::read(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert!(want == *data, "{name} differs from {}", path.display());
    }
    let want: ArchiveManifest =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(out.manifest, want);
    // The archive holds exactly the golden files.
    let entries = read_zip(&out.archive).unwrap();
    assert_eq!(ArchiveManifest::from_files(&entries), want);
}

/// The fixture's lettering, tallied by hand: seven wide streets and one
/// square. "Hladká" takes the plain prefix, so "Hlavní" substitutes its
/// next letter; the square drops "náměstí".
#[test]
fn fixture_abbreviation_list() {
    let out = Pipeline::new(fixture_store()).run(&block_2x2(), DPI, false).unwrap();
    let txt = &out.files.iter().find(|(n, _)| n == "abbreviations.txt").unwrap().1;
    assert_eq!(
        std::str::from_utf8(txt).unwrap(),
        "STREETS\ndlo\tDlouhá\nhla\tHladká\nhlv\tHlavní\nkrá\tKrátká\nmos\tMostní\nčec\tČechova\nžit\tŽitná\nSQUARES\nsvob\tnáměstí Svobody\n"
    );
    assert_eq!(
        out.manifest.names(),
        ["sheet_C0R0.png", "sheet_C0R1.png", "sheet_C1R0.png", "sheet_C1R1.png", "abbreviations.txt"]
    );
}
