//! CSV time series and JSON summaries. Every summary embeds the full
//! resolved config so the run can be reproduced from the report alone.

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::experiments::Table;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub fn write_tables(out_dir: &Path, tables: &[Table]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir)?;
    let mut paths = Vec::new();
    for table in tables {
        let path = out_dir.join(format!("{}.csv", table.name));
        let mut writer = csv::Writer::from_path(&path)?;
        writer.write_record(&table.headers)?;
        for row in &table.rows {
            writer.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
        }
        writer.flush()?;
        paths.push(path);
    }
    Ok(paths)
}

pub fn write_summary<R: Serialize>(
    out_dir: &Path,
    name: &str,
    cfg: &ExperimentConfig,
    report: &R,
    pass: bool,
) -> Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(format!("{name}_summary.json"));
    let doc = serde_json::json!({
        "experiment": name,
        "pass": pass,
        "config": cfg,
        "results": report,
    });
    std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    Ok(path)
}
