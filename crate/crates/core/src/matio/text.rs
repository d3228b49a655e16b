/// Parses a text signal: either headerless single-column amplitudes or two
/// columns `time,amplitude`. A non-numeric first row is taken as a header.
///
/// Errors carry the 1-based line number and a reason.
pub fn read_text_signal(bytes: &[u8]) -> Result<Vec<f64>, (usize, String)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(bytes);

    let mut samples = Vec::new();
    let mut width = None;
    for (i, record) in reader.records().enumerate() {
        let line = i + 1;
        let record = record.map_err(|e| (line, e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => return Err((line, format!("not a number: {e}"))),
        };
        if !(1..=2).contains(&values.len()) {
            return Err((
                line,
                format!("expected 1 or 2 columns, found {}", values.len()),
            ));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err((
                    line,
                    format!("expected {w} columns, found {}", values.len()),
                ))
            }
            _ => {}
        }
        samples.push(*values.last().expect("non-empty row"));
    }
    Ok(samples)
}
