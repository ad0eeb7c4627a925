//! Per-invocation context: config, worker pool, output files and manifest.

use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;

use nlrd_core::ensemble::Pool;
use nlrd_core::manifest::RunManifest;
use nlrd_core::{Error, ModelSpec};
use serde::Serialize;

use crate::args::Cli;

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or config; exit 64.
    Usage(String),
    Core(Error),
    /// The run completed but a check it performs did not hold; exit 1.
    Check(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 64,
            Failure::Core(Error::InvalidParameter(_) | Error::OffGrid { .. } | Error::Config(_) | Error::RegimeMismatch(_)) => 64,
            Failure::Core(Error::Divergence { .. }) => 2,
            Failure::Core(_) | Failure::Check(_) => 1,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::from(e))
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub struct Run {
    pub spec: ModelSpec,
    pub seed: u64,
    pub pool: Pool,
    out_dir: PathBuf,
    manifest: RunManifest,
    hash: String,
}

impl Run {
    pub fn new<P: Serialize>(cli: &Cli, params: &P) -> Outcome<Self> {
        let spec = match &cli.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", p.display())))?;
                ModelSpec::from_toml(&text)?
            }
            None => ModelSpec::default_additive(),
        };
        let params = serde_json::to_value(params).expect("arguments serialize");
        let manifest = RunManifest::new(cli.command.name(), &spec.hash(), vec![cli.seed], params);
        let hash = manifest.hash();
        fs::create_dir_all(&cli.out_dir)?;
        Ok(Self {
            spec,
            seed: cli.seed,
            pool: Pool::new(cli.workers),
            out_dir: cli.out_dir.clone(),
            manifest,
            hash,
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    /// Opens `name` inside the output directory and records it.
    pub fn create(&mut self, name: &str) -> Outcome<BufWriter<fs::File>> {
        if name.contains(std::path::MAIN_SEPARATOR) || name.contains('/') {
            return Err(Failure::Usage(format!("output name `{name}` must be a bare file name")));
        }
        self.manifest.outputs.push(name.to_string());
        Ok(BufWriter::new(fs::File::create(self.out_dir.join(name))?))
    }

    /// Writes `<subcommand>.manifest.json`.
    pub fn finish(self) -> Outcome<()> {
        let name = format!("{}.manifest.json", self.manifest.subcommand);
        fs::write(self.out_dir.join(name), self.manifest.to_json() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Failure::Usage("x".into()).exit_code(), 64);
        assert_eq!(Failure::Core(Error::Config("x".into())).exit_code(), 64);
        assert_eq!(Failure::Core(Error::OffGrid { t: 0.1, dt_grid: 0.25 }).exit_code(), 64);
        assert_eq!(Failure::Core(Error::Divergence { t: 1.0, norm: 1e300 }).exit_code(), 2);
        assert_eq!(
            Failure::Core(Error::NonCauchy {
                displacements: vec![1.0],
                tol: 0.1
            })
            .exit_code(),
            1
        );
        assert_eq!(Failure::Check("x".into()).exit_code(), 1);
    }
}
