use std::fs;
use std::path::{Path, PathBuf};

use orabe::codec::{Artifact, Envelope};
use orabe::group::BackendId;
use orabe::{Bls12, MockGroup, PairingGroup};

use crate::error::CliError;
use crate::BackendArg;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn read_envelope(path: &Path) -> Result<Envelope, CliError> {
    Envelope::from_json(&read_text(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn load<A: Artifact>(path: &Path) -> Result<A, CliError> {
    A::from_envelope(&read_envelope(path)?)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn backend_of(path: &Path) -> Result<BackendId, CliError> {
    let id = read_envelope(path)?
        .backend_id()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if id == Bls12::BACKEND || id == MockGroup::BACKEND {
        Ok(id)
    } else {
        Err(CliError::input(format!("{}: unsupported backend {}", path.display(), id.name())))
    }
}

pub fn backend_from_arg(arg: BackendArg) -> BackendId {
    match arg {
        BackendArg::Bls12 => Bls12::BACKEND,
        BackendArg::Mock => MockGroup::BACKEND,
    }
}

/// `explicit` if given, otherwise `default_name` inside `out_dir`.
pub fn output_path(out_dir: &Path, explicit: Option<PathBuf>, default_name: &str) -> PathBuf {
    explicit.unwrap_or_else(|| out_dir.join(default_name))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::input(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

pub fn save<A: Artifact>(path: &Path, artifact: &A) -> Result<(), CliError> {
    let mut json = artifact.to_envelope().to_json();
    json.push('\n');
    write_bytes(path, json.as_bytes())
}

/// Attribute names from a universe file.
pub fn parse_universe(text: &str) -> Vec<String> {
    let mut names: Vec<String> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split(|c: char| c.is_whitespace() || c == ','))
        .filter(|w| !w.is_empty())
        .map(str::to_string)
        .collect();
    names.sort();
    names.dedup();
    names
}

/// `A..B` stepped by `step`, or a comma separated list.
pub fn parse_sizes(spec: &str, step: usize) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::input(format!("bad size list {spec:?}"));
    let sizes: Vec<usize> = if let Some((a, b)) = spec.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim_start_matches('=').trim().parse().map_err(|_| bad())?;
        if step == 0 || a > b {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if sizes.is_empty() || sizes.contains(&0) {
        return Err(bad());
    }
    Ok(sizes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn universe_parsing() {
        let u = parse_universe("# roles\ndoctor, nurse\n  admin # staff\nnurse\n");
        assert_eq!(u, vec!["admin", "doctor", "nurse"]);
    }

    #[test]
    fn size_lists() {
        assert_eq!(parse_sizes("10..100", 10).unwrap(), (1..=10).map(|i| i * 10).collect::<Vec<_>>());
        assert_eq!(parse_sizes("10..=30", 10).unwrap(), vec![10, 20, 30]);
        assert_eq!(parse_sizes("3,5", 10).unwrap(), vec![3, 5]);
        assert!(parse_sizes("5..1", 1).is_err());
        assert!(parse_sizes("0,4", 1).is_err());
        assert!(parse_sizes("x", 1).is_err());
    }
}
