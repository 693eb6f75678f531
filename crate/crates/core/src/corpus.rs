//! Systems shipped with the crate, used by tests and the CLI.

use crate::delange::SystemFile;

const SOURCES: &[(&str, &str)] = &[
    ("a_function", include_str!("../corpus/a_function.json")),
    ("beta_function", include_str!("../corpus/beta_function.json")),
    ("t_minus_1", include_str!("../corpus/t_minus_1.json")),
    ("t2_table", include_str!("../corpus/t2_table.json")),
    ("t_t3", include_str!("../corpus/t_t3.json")),
    ("t_t2", include_str!("../corpus/t_t2.json")),
    ("tm1_tm1sq", include_str!("../corpus/tm1_tm1sq.json")),
    ("t_2t_plus_1", include_str!("../corpus/t_2t_plus_1.json")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

/// Raw JSON of a shipped system.
pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn get(name: &str) -> Option<SystemFile> {
    source(name).map(|s| SystemFile::from_json(s).expect("shipped corpus parses"))
}

pub fn all() -> Vec<(&'static str, SystemFile)> {
    names().map(|n| (n, get(n).unwrap())).collect()
}
