use std::cell::RefCell;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use cachecast::curve::{CurveTable, Provenance, TrialCount};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// Output directory bound to one run's provenance.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    pub config_hash: String,
    pub seed: u64,
    generated_at: String,
    written: RefCell<Vec<PathBuf>>,
}

impl Output {
    /// Creates `dir` and echoes the effective configuration into it.
    pub fn create(dir: &Path, config: &RunConfig) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let secs = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let out = Self {
            dir: dir.to_path_buf(),
            config_hash: config.hash(),
            seed: config.seed(),
            generated_at: format!("unix:{secs}"),
            written: RefCell::new(Vec::new()),
        };
        out.write_text("effective_config.json", &(config.to_json() + "\n"))?;
        Ok(out)
    }

    pub fn provenance(&self, trials: TrialCount) -> Provenance {
        let mut p = Provenance::new(self.config_hash.clone(), self.seed, trials);
        p.generated_at = Some(self.generated_at.clone());
        p
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn written(&self) -> Vec<PathBuf> {
        self.written.borrow().clone()
    }

    pub fn write_bytes(&self, name: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.written.borrow_mut().push(path.clone());
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_table(&self, name: &str, table: &CurveTable) -> CliResult<PathBuf> {
        self.write_text(name, &table.to_csv())
    }

    /// Writes `{"provenance": …, "result": …}`.
    pub fn write_json<T: Serialize>(&self, name: &str, provenance: &Provenance, result: &T) -> CliResult<PathBuf> {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            provenance: &'a Provenance,
            result: &'a T,
        }
        let text = serde_json::to_string_pretty(&Doc { provenance, result })
            .map_err(|e| CliError::Config(format!("cannot serialize {name}: {e}")))?;
        self.write_text(name, &(text + "\n"))
    }
}
