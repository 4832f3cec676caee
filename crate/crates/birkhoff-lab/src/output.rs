//! Shared formatting and file-writing helpers for the CLI surface.
//!
//! Everything here exists to make outputs byte-stable: fixed significant
//! digits, LF line endings, and atomic replace-on-write so a crashed run
//! never leaves a half-written table behind.

use std::io;
use std::path::Path;

/// 17 significant digits — enough to round-trip any f64 exactly.  Infinite
/// inputs (the log-magnitude of an exact zero is -inf) print as `-inf`/`inf`.
pub(crate) fn fmt_f64_17(x: f64) -> String {
    format!("{x:.16e}")
}

/// 12 significant digits, positional notation while the decimal exponent
/// stays in -4..=11, scientific outside.  Used for report files where a
/// stable, human-diffable rendering matters more than bit round-tripping.
pub(crate) fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    debug_assert!(x.is_finite(), "fmt_sig12 given non-finite {x}");
    let exp = x.abs().log10().floor() as i32;
    if (-4..=11).contains(&exp) {
        format!("{:.*}", (11 - exp).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

/// Writes via a same-directory temporary file and rename, so readers see
/// either the old content or the new, never a prefix.
pub(crate) fn atomic_write(path: &Path, content: &str) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp_name = format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id());
    let tmp = match dir {
        Some(d) => d.join(&tmp_name),
        None => Path::new(&tmp_name).to_path_buf(),
    };
    std::fs::write(&tmp, content)?;
    match std::fs::rename(&tmp, path) {
        Ok(()) => Ok(()),
        Err(e) => {
            let _ = std::fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// Minimal self-contained SVG histogram: one `<rect>` per bin plus axis
/// labels for the range and peak count.  Pure text, no external assets.
pub(crate) fn histogram_svg(values: &[f64], bins: usize, title: &str) -> String {
    let bins = bins.max(1);
    let (width, height, margin) = (640.0f64, 360.0f64, 40.0f64);
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-family=\"monospace\" \
         font-size=\"14\">{}</text>\n",
        width / 2.0,
        xml_escape(title)
    ));
    if finite.is_empty() {
        svg.push_str("  <text x=\"20\" y=\"60\" font-family=\"monospace\">no data</text>\n</svg>\n");
        return svg;
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for &v in &finite {
        let idx = (((v - lo) / span) * bins as f64) as usize;
        counts[idx.min(bins - 1)] += 1;
    }
    let peak = *counts.iter().max().unwrap() as f64;
    let plot_w = width - 2.0 * margin;
    let plot_h = height - 2.0 * margin;
    let bar_w = plot_w / bins as f64;
    for (i, &c) in counts.iter().enumerate() {
        let h = if peak > 0.0 { plot_h * c as f64 / peak } else { 0.0 };
        svg.push_str(&format!(
            "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"#4a7ebb\" stroke=\"#ffffff\" stroke-width=\"0.5\"/>\n",
            margin + i as f64 * bar_w,
            margin + plot_h - h,
            bar_w,
            h
        ));
    }
    svg.push_str(&format!(
        "  <text x=\"{margin}\" y=\"{:.2}\" font-family=\"monospace\" font-size=\"11\">{}</text>\n",
        height - margin / 2.0,
        fmt_sig_short(lo)
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"monospace\" \
         font-size=\"11\">{}</text>\n",
        width - margin,
        height - margin / 2.0,
        fmt_sig_short(hi)
    ));
    svg.push_str(&format!(
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"monospace\" \
         font-size=\"11\">peak {}</text>\n",
        width - margin,
        margin - 8.0,
        peak as u64
    ));
    svg.push_str("</svg>\n");
    svg
}

fn fmt_sig_short(x: f64) -> String {
    format!("{x:.4}")
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
