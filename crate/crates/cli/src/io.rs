use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use flowsparse::network::NetworkJson;
use flowsparse::{rational, Rational, TerminalNetwork};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Dimacs,
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// `g.json` -> `g.<tag>.json`.
pub fn sidecar(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{tag}.json"))
}

pub fn read_network(path: &Path, format: Format, terminals: Option<&Path>) -> Result<TerminalNetwork> {
    match format {
        Format::Json => {
            if terminals.is_some() {
                bail!("--terminals only applies to --format dimacs");
            }
            let json: NetworkJson = read_json(path)?;
            Ok(TerminalNetwork::from_json(&json, false)?)
        }
        Format::Dimacs => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let side = match terminals {
                Some(p) => Some(fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?),
                None => None,
            };
            parse_dimacs(&text, side.as_deref())
        }
    }
}

/// DIMACS max-flow instance read as an undirected network: arcs `u v` and
/// `v u` add up. Terminals come from the sidecar (whitespace-separated
/// vertex ids, `#` comments), or else from the `n ID s|t` lines.
pub fn parse_dimacs(text: &str, terminals: Option<&str>) -> Result<TerminalNetwork> {
    let mut n: Option<usize> = None;
    let mut declared: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String, Rational)> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let at = || format!("line {}", no + 1);
        match fields.first().copied() {
            None | Some("c") => {}
            Some("p") => {
                if fields.len() != 4 {
                    bail!("{}: expected `p max N M`", at());
                }
                n = Some(fields[2].parse().with_context(at)?);
            }
            Some("n") => {
                if fields.len() != 3 {
                    bail!("{}: expected `n ID s|t`", at());
                }
                declared.push(fields[1].to_string());
            }
            Some("a") => {
                if fields.len() != 4 {
                    bail!("{}: expected `a U V CAP`", at());
                }
                let cap = rational::parse(fields[3]).with_context(at)?;
                edges.push((fields[1].to_string(), fields[2].to_string(), cap));
            }
            Some(other) => bail!("{}: unknown record `{other}`", at()),
        }
    }
    let n = n.context("missing `p` line")?;
    let vertices: Vec<String> = (1..=n).map(|i| i.to_string()).collect();
    for (u, v, _) in &edges {
        for x in [u, v] {
            let ok = x.parse::<usize>().is_ok_and(|i| (1..=n).contains(&i));
            if !ok {
                bail!("arc endpoint `{x}` outside 1..={n}");
            }
        }
    }
    let terms: Vec<String> = match terminals {
        Some(side) => side
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace)
            .map(str::to_string)
            .collect(),
        None => declared,
    };
    if terms.len() < 2 {
        bail!("need at least two terminals, got {}", terms.len());
    }
    Ok(TerminalNetwork::new(&vertices, &terms, &edges)?)
}

pub fn network_json(net: &TerminalNetwork, meta: serde_json::Value) -> NetworkJson {
    let mut json = net.to_json();
    json.meta = Some(meta);
    json
}

#[derive(Debug, Serialize)]
pub struct InputHash {
    pub path: String,
    pub sha256: String,
}

/// Record of one run, written next to its outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: u64,
    pub jobs: Option<usize>,
    pub inputs: Vec<InputHash>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub elapsed_ms: u128,
}

impl RunManifest {
    pub fn new(command: &str, parameters: serde_json::Value, seed: u64, jobs: Option<usize>) -> Self {
        RunManifest {
            command: command.into(),
            parameters,
            seed,
            jobs,
            inputs: Vec::new(),
            outputs: Vec::new(),
            tool_version: TOOL_VERSION.into(),
            elapsed_ms: 0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<String> {
        let sha256 = sha256_file(path)?;
        self.inputs.push(InputHash { path: path.display().to_string(), sha256: sha256.clone() });
        Ok(sha256)
    }

    /// Writes `<first output>.manifest.json`; a run without outputs writes
    /// nothing.
    pub fn finish(mut self, elapsed: Duration) -> Result<()> {
        let Some(first) = self.outputs.first() else { return Ok(()) };
        let path = sidecar(Path::new(first), "manifest");
        self.elapsed_ms = elapsed.as_millis();
        write_json(&path, &self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "c tiny\np max 4 5\nn 1 s\nn 4 t\na 1 2 3\na 2 1 1\na 2 4 2\na 1 3 5\na 3 4 1\n";

    #[test]
    fn dimacs_arcs_become_undirected_edges() {
        let net = parse_dimacs(SAMPLE, None).unwrap();
        assert_eq!(net.terminal_names(), vec!["1", "4"]);
        assert_eq!(net.m(), 4);
        let (a, b) = (net.index_of("1").unwrap(), net.index_of("2").unwrap());
        assert_eq!(net.cap_between(a, b), rational::int(4));
    }

    #[test]
    fn dimacs_sidecar_overrides_terminals() {
        let net = parse_dimacs(SAMPLE, Some("# terminals\n1 3\n4")).unwrap();
        assert_eq!(net.terminal_names(), vec!["1", "3", "4"]);
    }

    #[test]
    fn dimacs_errors() {
        assert!(parse_dimacs("a 1 2 3\n", None).is_err());
        assert!(parse_dimacs("p max 2 1\nn 1 s\nn 2 t\na 1 5 1\n", None).is_err());
        assert!(parse_dimacs("p max 2 1\nn 1 s\na 1 2 1\n", None).is_err());
        assert!(parse_dimacs("p max 2 1\nx\n", None).is_err());
    }

    #[test]
    fn sidecar_names() {
        assert_eq!(sidecar(Path::new("out/g.json"), "manifest"), PathBuf::from("out/g.manifest.json"));
        assert_eq!(sidecar(Path::new("h"), "tdec"), PathBuf::from("h.tdec.json"));
    }
}
