//! Atomic file output: every artifact is written to a temp file in the
//! destination directory and renamed into place.

use anyhow::Context;
use std::fs;
use std::path::PathBuf;

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(path: &str) -> anyhow::Result<Self> {
        let root = PathBuf::from(path);
        fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
        Ok(Self { root })
    }

    /// Write-temp-then-rename.
    pub fn write(&self, name: &str, contents: &str) -> anyhow::Result<PathBuf> {
        let target = self.root.join(name);
        let tmp = self.root.join(format!(".{name}.tmp"));
        fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(&tmp, &target)
            .with_context(|| format!("renaming into {}", target.display()))?;
        Ok(target)
    }
}

/// Format a float so CSV output is bit-faithful (shortest roundtrip form).
pub fn fmt_f64(v: f64) -> String {
    let mut s = format!("{v}");
    if !s.contains('.') && !s.contains('e') && !s.contains("inf") && !s.contains("NaN") {
        s.push_str(".0");
    }
    s
}

/// Series CSV `t,target..,prediction..,abs_error..` (single-dimension series
/// produce exactly the header `t,target,prediction,abs_error`).
pub fn series_csv(target: &[Vec<f64>], prediction: &[Vec<f64>]) -> String {
    let dims = target.first().map(|r| r.len()).unwrap_or(1);
    let col = |base: &str, d: usize| {
        if dims == 1 {
            base.to_string()
        } else {
            format!("{base}_{d}")
        }
    };
    let mut header = vec!["t".to_string()];
    for d in 0..dims {
        header.push(col("target", d));
    }
    for d in 0..dims {
        header.push(col("prediction", d));
    }
    for d in 0..dims {
        header.push(col("abs_error", d));
    }
    let mut out = header.join(",");
    out.push('\n');
    for (t, (tg, pr)) in target.iter().zip(prediction.iter()).enumerate() {
        let mut row = vec![t.to_string()];
        for v in tg {
            row.push(fmt_f64(*v));
        }
        for v in pr {
            row.push(fmt_f64(*v));
        }
        for (a, b) in tg.iter().zip(pr.iter()) {
            row.push(fmt_f64((a - b).abs()));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Loss-history CSV `epoch,loss`.
pub fn loss_csv(history: &[f64]) -> String {
    let mut out = String::from("epoch,loss\n");
    for (e, l) in history.iter().enumerate() {
        out.push_str(&format!("{e},{}\n", fmt_f64(*l)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn series_csv_single_dim_header() {
        let csv = series_csv(&[vec![0.5]], &[vec![0.25]]);
        assert!(csv.starts_with("t,target,prediction,abs_error\n"));
        assert!(csv.contains("0,0.5,0.25,0.25"));
    }

    #[test]
    fn series_csv_multi_dim_header() {
        let csv = series_csv(&[vec![0.5, 1.0]], &[vec![0.25, 1.0]]);
        assert!(csv.starts_with("t,target_0,target_1,prediction_0,prediction_1,abs_error_0,abs_error_1\n"));
    }

    #[test]
    fn fmt_is_roundtrip_exact() {
        for v in [0.1, 1.0 / 3.0, 1e-17, -123.456789012345678, 0.0] {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), v.to_bits(), "{s}");
        }
    }
}
