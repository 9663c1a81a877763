//! Checks applied to every provider output before the engine uses it.
//! Each returns a human-readable reason; callers wrap it in the error that
//! fits the source (fixture line or remote response).

pub const MIN_DIMENSION: usize = 2;

pub fn probabilities(row: &[f64], n_labels: usize) -> Result<(), String> {
    if row.len() != n_labels {
        return Err(format!("expected {n_labels} probabilities, found {}", row.len()));
    }
    if let Some(p) = row.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(format!("probability {p} outside [0, 1]"));
    }
    Ok(())
}

/// `expected` is the dimension already established for the session, if any.
pub fn embedding(vector: &[f64], expected: Option<usize>) -> Result<(), String> {
    if vector.len() < MIN_DIMENSION {
        return Err(format!(
            "embedding dimension {} is below {MIN_DIMENSION}",
            vector.len()
        ));
    }
    if let Some(d) = expected {
        if vector.len() != d {
            return Err(format!("expected dimension {d}, found {}", vector.len()));
        }
    }
    if vector.iter().any(|x| !x.is_finite()) {
        return Err("embedding contains NaN or infinite entries".into());
    }
    if vector.iter().all(|&x| x == 0.0) {
        return Err("embedding has zero norm".into());
    }
    Ok(())
}

pub fn embeddings(vectors: &[Vec<f64>], expected: Option<usize>) -> Result<(), String> {
    let dim = expected.or_else(|| vectors.first().map(Vec::len));
    vectors
        .iter()
        .enumerate()
        .try_for_each(|(i, v)| embedding(v, dim).map_err(|e| format!("output {i}: {e}")))
}

pub fn parse(penman: &str) -> Result<(), String> {
    crate::amr::parse_penman(penman)
        .map(|_| ())
        .map_err(|e| e.to_string())
}

pub fn alignment(expected: usize, found: usize) -> Result<(), String> {
    if expected == found {
        Ok(())
    } else {
        Err(format!("expected {expected} outputs, received {found}"))
    }
}
