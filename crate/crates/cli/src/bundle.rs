use serde::Serialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub map_digest: String,
    pub config_digest: String,
    pub version: String,
    pub seed: u64,
    pub analysis: String,
}

/// Report files assembled in memory and written in name order, so reruns
/// produce identical bytes regardless of how the work was scheduled.
#[derive(Debug)]
pub struct Bundle {
    pub provenance: Provenance,
    pub files: BTreeMap<String, Vec<u8>>,
}

impl Bundle {
    pub fn new(provenance: Provenance) -> Self {
        let mut b = Self { provenance, files: BTreeMap::new() };
        let mut p = serde_json::to_vec_pretty(&b.provenance).expect("provenance serializes");
        p.push(b'\n');
        b.files.insert("provenance.json".into(), p);
        b
    }

    /// `{"provenance": ..., key: value}`.
    pub fn json(&mut self, name: &str, key: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let mut doc = serde_json::Map::new();
        doc.insert("provenance".into(), serde_json::to_value(&self.provenance)?);
        doc.insert(key.into(), serde_json::to_value(value)?);
        let mut bytes = serde_json::to_vec_pretty(&doc)?;
        bytes.push(b'\n');
        self.files.insert(name.into(), bytes);
        Ok(())
    }

    /// CSV preceded by `#` comment lines carrying the provenance.
    pub fn csv<R: Serialize>(&mut self, name: &str, rows: &[R]) -> anyhow::Result<()> {
        let p = &self.provenance;
        let mut out = format!(
            "# map_digest={}\n# config_digest={}\n# version={}\n# seed={}\n",
            p.map_digest, p.config_digest, p.version, p.seed
        )
        .into_bytes();
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r)?;
        }
        out.extend(w.into_inner()?);
        self.files.insert(name.into(), out);
        Ok(())
    }

    pub fn write(&self, dir: &Path) -> anyhow::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }
}

/// Parse a bundle CSV, skipping the provenance comments.
pub fn read_csv(text: &str) -> anyhow::Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    Ok(r.records().collect::<Result<_, _>>()?)
}
