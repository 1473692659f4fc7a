//! Report serialization. JSON is emitted by hand with a fixed field order
//! and a fixed float format so that identical runs produce byte-identical
//! files on every platform.

use matdist_core::field::FieldReport;
use matdist_core::foliation::LeafLabeling;
use matdist_core::homogeneity::HomogeneityReport;

use crate::config::RunConfig;

/// Fixed-width scientific notation, 17 significant digits.
fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // JSON has no literal for these; stringify defensively
        format!("\"{v}\"")
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out
}

fn float_array(vals: impl Iterator<Item = f64>) -> String {
    let parts: Vec<String> = vals.map(fmt_f64).collect();
    format!("[{}]", parts.join(", "))
}

fn int_array(vals: impl Iterator<Item = usize>) -> String {
    let parts: Vec<String> = vals.map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn bool_array(vals: impl Iterator<Item = bool>) -> String {
    let parts: Vec<String> = vals.map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn string_array(vals: &[String]) -> String {
    let parts: Vec<String> = vals.iter().map(|v| format!("\"{}\"", escape(v))).collect();
    format!("[{}]", parts.join(", "))
}

pub fn render_report(
    cfg: &RunConfig,
    field: &FieldReport,
    labeling: Option<&LeafLabeling>,
    homogeneity: Option<&HomogeneityReport>,
    warnings: &[String],
) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!("  \"law\": \"{}\",\n", escape(&cfg.law_label)));
    out.push_str(&format!("  \"n\": {},\n", cfg.n));
    out.push_str(&format!(
        "  \"grid\": {{\"lo\": {}, \"hi\": {}, \"counts\": {}}},\n",
        float_array(cfg.lo.iter().copied()),
        float_array(cfg.hi.iter().copied()),
        int_array(cfg.counts.iter().copied())
    ));
    out.push_str(&format!(
        "  \"classification\": \"{}\",\n",
        field.classification.as_str()
    ));
    out.push_str(&format!(
        "  \"dims\": {{\"nh\": {}, \"h\": {}}},\n",
        int_array(field.dims_nh.iter().copied()),
        int_array(field.dims_h.iter().copied())
    ));
    out.push_str(&format!(
        "  \"second_grade_equal\": {},\n",
        bool_array(field.second_grade_equal.iter().copied())
    ));
    match labeling {
        Some(l) => out.push_str(&format!(
            "  \"leaves\": {{\"count\": {}, \"dims\": {}}},\n",
            l.leaf_count,
            int_array(l.leaf_dims.iter().copied())
        )),
        None => out.push_str("  \"leaves\": {\"count\": 0, \"dims\": []},\n"),
    }
    match homogeneity {
        Some(h) => out.push_str(&format!(
            "  \"homogeneity\": {{\"verdict\": \"{}\", \"residual\": {}, \"per_k\": {}}},\n",
            h.verdict.as_str(),
            fmt_f64(h.residual),
            float_array(h.per_k.iter().copied())
        )),
        None => out.push_str(
            "  \"homogeneity\": {\"verdict\": \"skipped\", \"residual\": 0.0, \"per_k\": []},\n",
        ),
    }
    out.push_str(&format!("  \"warnings\": {}\n", string_array(warnings)));
    out.push_str("}\n");
    out
}

pub fn render_grid_csv(field: &FieldReport, labeling: Option<&LeafLabeling>) -> String {
    let n = field.grid.dim();
    let mut out = String::new();
    for i in 0..n {
        out.push_str(&format!("x{},", i + 1));
    }
    out.push_str("dim_nh,dim_h,leaf\n");
    for p in 0..field.grid.len() {
        let x = field.grid.point(p);
        for v in x.iter() {
            out.push_str(&format!("{},", fmt_f64(*v)));
        }
        let leaf = labeling
            .and_then(|l| l.label[p])
            .map(|l| l as i64)
            .unwrap_or(-1);
        out.push_str(&format!(
            "{},{},{}\n",
            field.dims_nh[p], field.dims_h[p], leaf
        ));
    }
    out
}

pub fn render_leaf_curve(labeling: &LeafLabeling, leaf: usize) -> String {
    let mut out = String::new();
    for pt in &labeling.curves[leaf] {
        let parts: Vec<String> = pt.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&parts.join(" "));
        out.push('\n');
    }
    out
}
