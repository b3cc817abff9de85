use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

/// Round-trip formatting for binary64: 17 significant digits.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_float(x: Option<f64>) -> String {
    x.map(float).unwrap_or_default()
}

/// 15 significant digits in positional notation, trailing zeros dropped.
pub fn short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&e) {
        return format!("{x:.14e}");
    }
    let s = format!("{x:.*}", (14 - e).max(0) as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct OutDir {
    root: PathBuf,
    written: Vec<String>,
}

impl OutDir {
    pub fn create(root: PathBuf) -> Result<Self, String> {
        fs::create_dir_all(&root)
            .map_err(|e| format!("cannot create output directory {}: {e}", root.display()))?;
        let probe = root.join(".wentzell-write-check");
        fs::write(&probe, b"")
            .map_err(|e| format!("output directory {} is not writable: {e}", root.display()))?;
        let _ = fs::remove_file(probe);
        Ok(Self { root, written: Vec::new() })
    }

    pub fn path(&self) -> &Path {
        &self.root
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), String> {
        let path = self.root.join(name);
        let err = |e: csv::Error| format!("writing {}: {e}", path.display());
        let mut w = csv::Writer::from_path(&path).map_err(err)?;
        w.write_record(header).map_err(err)?;
        for r in rows {
            w.write_record(r).map_err(err)?;
        }
        w.flush().map_err(|e| format!("writing {}: {e}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), String> {
        let path = self.root.join(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| e.to_string())?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| format!("writing {}: {e}", path.display()))?;
        self.written.push(name.to_string());
        Ok(())
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trips() {
        for x in [0.1, 1.0 / 3.0, 30.667151353303815, -1e-300, 6.02e23] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn short_form() {
        assert_eq!(short(0.7651976865579666), "0.765197686557967");
        assert_eq!(short(1.0), "1");
        assert_eq!(short(-12.5), "-12.5");
        assert_eq!(short(1e-9), "1.00000000000000e-9");
    }
}
