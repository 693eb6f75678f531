//! Replayable record of one invocation.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::Path;

use serde::{Deserialize, Serialize};

const SWITCHES: &[&str] = &["dry-run", "force-slow", "full-table"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub positional: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    /// Remaining flags by long name; switches map to `"true"`.
    #[serde(default)]
    pub parameters: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn capture(argv: &[OsString]) -> Result<Manifest, equid::Error> {
        let args: Vec<String> = argv
            .iter()
            .skip(1)
            .map(|a| a.to_string_lossy().into_owned())
            .collect();
        let mut command = None;
        let mut m = Manifest {
            command: String::new(),
            positional: Vec::new(),
            system: None,
            parameters: BTreeMap::new(),
            seed: None,
            outputs: Vec::new(),
        };
        let mut it = args.into_iter();
        while let Some(tok) = it.next() {
            let Some(flag) = tok.strip_prefix("--") else {
                if command.is_none() {
                    command = Some(tok);
                } else {
                    m.positional.push(tok);
                }
                continue;
            };
            let (key, value) = match flag.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None if SWITCHES.contains(&flag) => (flag.to_string(), "true".to_string()),
                None => (
                    flag.to_string(),
                    it.next()
                        .ok_or_else(|| equid::Error::Precondition(format!("--{flag} needs a value")))?,
                ),
            };
            match key.as_str() {
                "manifest-out" => {}
                "system" => m.system = Some(value),
                "out" => m.outputs.push(value),
                "seed" => {
                    m.seed = Some(
                        value
                            .parse()
                            .map_err(|_| equid::Error::Precondition(format!("bad seed {value:?}")))?,
                    )
                }
                _ => {
                    m.parameters.insert(key, value);
                }
            }
        }
        m.command = command.ok_or_else(|| equid::Error::Precondition("no subcommand".into()))?;
        Ok(m)
    }

    pub fn to_argv(&self) -> Vec<OsString> {
        let mut argv: Vec<String> = vec!["equid".into(), self.command.clone()];
        argv.extend(self.positional.iter().cloned());
        if let Some(s) = &self.system {
            argv.extend(["--system".into(), s.clone()]);
        }
        for (k, v) in &self.parameters {
            if SWITCHES.contains(&k.as_str()) {
                if v == "true" {
                    argv.push(format!("--{k}"));
                }
            } else {
                argv.push(format!("--{k}={v}"));
            }
        }
        if let Some(seed) = self.seed {
            argv.extend(["--seed".into(), seed.to_string()]);
        }
        for out in &self.outputs {
            argv.extend(["--out".into(), out.clone()]);
        }
        argv.into_iter().map(OsString::from).collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), equid::Error> {
        crate::output::write_json(path, self)
            .map_err(|e| equid::Error::Precondition(format!("writing manifest: {e}")))
    }

    pub fn read(path: &Path) -> Result<Manifest, equid::Error> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| equid::Error::Precondition(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| equid::Error::Precondition(format!("{}: {e}", path.display())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn argv(s: &str) -> Vec<OsString> {
        s.split_whitespace().map(OsString::from).collect()
    }

    #[test]
    fn capture_and_round_trip() {
        let a = argv("equid count --system s.json --q 7 --x 1e7 --restrict=pk:5 --out c.csv --dry-run --manifest-out m.json");
        let m = Manifest::capture(&a).unwrap();
        assert_eq!(m.command, "count");
        assert_eq!(m.system.as_deref(), Some("s.json"));
        assert_eq!(m.parameters["q"], "7");
        assert_eq!(m.parameters["restrict"], "pk:5");
        assert_eq!(m.parameters["dry-run"], "true");
        assert_eq!(m.outputs, vec!["c.csv"]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<Manifest>(&json).unwrap(), m);
        let again = Manifest::capture(&m.to_argv()).unwrap();
        assert_eq!(again, m);
    }

    #[test]
    fn positional_and_seed() {
        let m = Manifest::capture(&argv("equid experiment cex4.1 --q 41 --seed 9")).unwrap();
        assert_eq!(m.positional, vec!["cex4.1"]);
        assert_eq!(m.seed, Some(9));
        assert!(Manifest::capture(&argv("equid --q")).is_err());
    }
}
