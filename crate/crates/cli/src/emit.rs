use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use crate::commands::Artifact;
use crate::config::RunConfig;

/// Renders the artifact with the run configuration embedded: as a `config`
/// key (or `params.run` for martingale reports) in JSON, as `#` comment lines
/// ahead of the header in CSV.
pub fn render(artifact: &Artifact, cfg: &RunConfig) -> Result<String> {
    Ok(match artifact {
        Artifact::Json(v) => {
            let mut s = serde_json::to_string_pretty(v)?;
            s.push('\n');
            s
        }
        Artifact::Csv(body) => {
            let mut s = format!("# sle-lcft {}\n", cfg.command);
            if let serde_json::Value::Object(map) = cfg.to_json() {
                for (k, v) in map {
                    s.push_str(&format!("# {k} = {v}\n"));
                }
            }
            s.push_str(body);
            s
        }
    })
}

pub fn write(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}
