use quasiknow::io::JsonScalar;
use quasiknow::sok::{ClassicalSok, QuantumSok};
use serde_json::Value;

/// How a scalar prints in tables: exact values as in files, floats as JSON.
pub fn show<S: JsonScalar>(x: &S) -> String {
    match x.to_json() {
        Value::String(s) => s,
        v => v.to_string(),
    }
}

/// Columns padded to their widest cell.
pub fn render(headers: &[String], rows: &[Vec<String>]) -> String {
    let n = headers.len().max(rows.iter().map(Vec::len).max().unwrap_or(0));
    let mut width = vec![0; n];
    for r in std::iter::once(headers).chain(rows.iter().map(Vec::as_slice)) {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let line = |r: &[String]| {
        r.iter()
            .enumerate()
            .map(|(i, c)| format!("{c:<w$}", w = width[i]))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut out = String::new();
    if !headers.is_empty() {
        out.push_str(&line(headers));
        out.push('\n');
    }
    for r in rows {
        out.push_str(&line(r));
        out.push('\n');
    }
    out
}

pub fn pairs(rows: &[(&str, String)]) -> String {
    let rows: Vec<Vec<String>> = rows.iter().map(|(k, v)| vec![format!("{k}:"), v.clone()]).collect();
    render(&[], &rows)
}

pub fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

/// The raw matrix, one row per environment state.
pub fn classical<S: JsonScalar>(s: &ClassicalSok<S>) -> String {
    let cols = s.matrix_columns();
    let mut headers = vec!["env".to_string()];
    headers.extend((0..cols.len()).map(|m| format!("m{m}")));
    let rows: Vec<Vec<String>> = s
        .env()
        .labels()
        .into_iter()
        .enumerate()
        .map(|(e, l)| std::iter::once(l).chain(cols.iter().map(|c| show(&c[e]))).collect())
        .collect();
    render(&headers, &rows)
}

pub fn quantum(s: &QuantumSok) -> String {
    let g = s.gram();
    let labels = s.env().labels();
    let mut headers = vec!["env".to_string()];
    headers.extend(labels.iter().cloned());
    let rows: Vec<Vec<String>> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            std::iter::once(l.clone())
                .chain((0..g.ncols()).map(|j| {
                    let z = g[(i, j)];
                    if z.im.abs() < 1e-15 {
                        format!("{:.6}", z.re)
                    } else {
                        format!("{:.6}{:+.6}i", z.re, z.im)
                    }
                }))
                .collect()
        })
        .collect();
    render(&headers, &rows)
}
