use std::path::Path;

use anyhow::{bail, Context, Result};
use dyadic_core::space::{generate_space, load_distance_matrix, GeneratorSpec, MetricSpace};

use crate::config::InputFormat;

/// Numeric rows of a text file; `#` starts a comment, separators are whitespace or commas.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().with_context(|| format!("line {}: bad number {t:?}", no + 1)))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub fn space_from_text(text: &str, format: InputFormat) -> Result<MetricSpace> {
    let rows = parse_rows(text)?;
    match format {
        InputFormat::Matrix => Ok(load_distance_matrix(&rows)?),
        InputFormat::Points => {
            let dim = rows.first().map(Vec::len).unwrap_or(0);
            if let Some((i, _)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
                bail!("row {} has {} coordinates, expected {dim}", i + 1, rows[i].len());
            }
            Ok(MetricSpace::from_points(dim, rows.concat())?)
        }
    }
}

pub fn load_file(path: &Path, format: InputFormat) -> Result<(MetricSpace, String)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok((space_from_text(&text, format)?, text))
}

pub fn generated(descriptor: &str) -> Result<MetricSpace> {
    let spec: GeneratorSpec = descriptor.parse()?;
    Ok(generate_space(spec)?)
}
