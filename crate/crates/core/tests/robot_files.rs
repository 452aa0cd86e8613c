use std::path::PathBuf;

use grr_core::io::{load_robot_spec, robot_hash};
use grr_core::robots;

fn robots_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../robots")
}

#[test]
fn shipped_robot_files_match_builtins() {
    for name in ["planar5", "planar5-fixed", "planar5-pedestal", "planar3", "spatial7"] {
        let path = robots_dir().join(format!("{}.toml", name.replace('-', "_")));
        let file = load_robot_spec(&path).unwrap();
        let builtin = robots::builtin(name).unwrap();
        assert_eq!(file.name, builtin.name);
        assert_eq!(robot_hash(&file), robot_hash(&builtin), "{name}");
        assert_eq!(file.seed_cycle, builtin.seed_cycle, "{name}");
        assert_eq!(file.grid.is_some(), builtin.grid.is_some(), "{name}");
    }
}
