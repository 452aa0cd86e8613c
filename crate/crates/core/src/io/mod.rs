//! File formats: hand-written robot specs (TOML) and machine-written
//! roadmap files.

mod roadmap_file;
mod robot_spec;

pub use roadmap_file::{load_roadmap, read_roadmap, save_roadmap, write_roadmap, LoadedRoadmap, FORMAT_VERSION};
pub use robot_spec::{load_robot_spec, parse_robot_spec, robot_hash, robot_spec_to_toml};
