use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::{Error, Result};

/// `# key: value` lines written ahead of the header row.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Metadata(pub Vec<(String, String)>);

impl Metadata {
    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.0.push((key.to_owned(), value.to_string()));
    }

    /// First value recorded under `key`.
    pub fn get(&self, key: &str) -> Option<&str> {
        self.0.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_all<'a>(&'a self, key: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.0.iter().filter(move |(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn to_csv_string<T: Serialize>(meta: &Metadata, rows: &[T]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in &meta.0 {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&body).expect("csv output is utf-8"));
    Ok(out)
}

pub fn from_csv_str<T: DeserializeOwned>(text: &str) -> Result<(Metadata, Vec<T>)> {
    let mut meta = Metadata::default();
    for (i, line) in text.lines().enumerate() {
        let Some(rest) = line.strip_prefix('#') else { break };
        let (k, v) = rest
            .trim_start()
            .split_once(": ")
            .ok_or_else(|| Error::Parse { line: i + 1, msg: "metadata line needs 'key: value'".into() })?;
        meta.push(k, v);
    }
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok((meta, rows))
}

pub fn write_csv<T: Serialize>(path: &Path, meta: &Metadata, rows: &[T]) -> Result<()> {
    std::fs::write(path, to_csv_string(meta, rows)?)?;
    Ok(())
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(Metadata, Vec<T>)> {
    from_csv_str(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Debug, PartialEq, Serialize, Deserialize)]
    struct Row {
        d: usize,
        p: f64,
        fit: Option<f64>,
    }

    #[test]
    fn layout_and_round_trip() {
        let mut meta = Metadata::default();
        meta.push("seed", 42);
        meta.push("config", "p = 0.05");
        meta.push("config", "n = 4");
        let rows = vec![Row { d: 3, p: 0.1 + 0.2, fit: None }, Row { d: 4, p: 1e-7, fit: Some(-2.5) }];
        let text = to_csv_string(&meta, &rows).unwrap();
        assert!(text.starts_with("# seed: 42\n# config: p = 0.05\n# config: n = 4\nd,p,fit\n3,"));
        let (m2, r2): (Metadata, Vec<Row>) = from_csv_str(&text).unwrap();
        assert_eq!(m2, meta);
        assert_eq!(r2, rows);
        assert_eq!(m2.get_all("config").count(), 2);
        assert_eq!(m2.get("seed"), Some("42"));
    }

    #[test]
    fn bad_metadata_line() {
        assert!(from_csv_str::<Row>("# nonsense\nd,p,fit\n").is_err());
    }
}
