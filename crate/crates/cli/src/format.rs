/// Probability rounded to `digits` decimals with trailing zeros removed;
/// tiny nonzero values switch to scientific notation.
pub fn prob(p: f64, digits: usize) -> String {
    let cut = 0.5 * 10f64.powi(-(digits as i32));
    if p != 0.0 && p.abs() < cut {
        return format!("{p:.3e}");
    }
    let text = format!("{p:.digits$}");
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        text
    }
}

/// Prints `value` as pretty JSON to stdout or to a file.
pub fn emit_json<T: serde::Serialize>(value: &T, output: Option<&std::path::Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(path) => std::fs::write(path, text + "\n")?,
        None => println!("{text}"),
    }
    Ok(())
}
