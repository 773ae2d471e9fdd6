//! The sample inputs in `data/` are renderings of the library fixtures. Run
//! with `GEMLOGIC_UPDATE_DATA=1` to regenerate them after a fixture change.

use std::fs;
use std::path::PathBuf;

use gemlogic::{fixtures, render_native};

fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn expected() -> Vec<(&'static str, String)> {
    let mut without_r2 = fixtures::toy5();
    without_r2.reactions.remove("r2");
    vec![
        ("toy5.json", render_native(&fixtures::toy5())),
        ("toy5.xml", fixtures::TOY5_SBML.to_string()),
        ("toy5_with_bounds.json", render_native(&fixtures::toy5_with_bounds())),
        ("toy5_without_r2.json", render_native(&without_r2)),
        ("chain3.json", render_native(&fixtures::chain3())),
        ("chain3.xml", fixtures::CHAIN3_SBML.to_string()),
        ("r0889.json", render_native(&fixtures::r0889())),
        ("r0889.xml", fixtures::R0889_SBML.to_string()),
        ("medium_A.txt", "# TOY-5 minimal medium\nA_e\n".to_string()),
        ("observations.tsv", "# medium\tknockouts\tobserved\nA_e\t-\tGROWTH\nA_e\tg3,g4\tNO_GROWTH\n".to_string()),
        (
            "observed_essentiality.tsv",
            "# gene\tobserved\ngT\tESSENTIAL\ng1\tNON_ESSENTIAL\ng2\tNON_ESSENTIAL\ng3\tNON_ESSENTIAL\ng4\tESSENTIAL\n"
                .to_string(),
        ),
    ]
}

#[test]
fn sample_data_matches_fixtures() {
    let dir = data_dir();
    let update = std::env::var_os("GEMLOGIC_UPDATE_DATA").is_some();
    for (name, contents) in expected() {
        let path = dir.join(name);
        if update {
            fs::create_dir_all(&dir).unwrap();
            fs::write(&path, &contents).unwrap();
        }
        let on_disk = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, contents, "{name} is stale; rerun with GEMLOGIC_UPDATE_DATA=1");
    }
}
