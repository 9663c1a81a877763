//! AMR corpus files: blank-line separated blocks, each with `# ::` metadata
//! lines (notably `# ::id <id>`) followed by one PENMAN expression.

use super::AmrError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrBlock {
    pub id: Option<String>,
    /// PENMAN text with comment lines removed.
    pub penman: String,
    /// 1-based line where the block starts.
    pub line: usize,
    /// 1-based line of the first PENMAN line.
    pub penman_line: usize,
}

fn metadata_id(comment: &str) -> Option<String> {
    let rest = comment.trim_start_matches('#').trim_start();
    let value = rest.strip_prefix("::id")?;
    if !value.starts_with(char::is_whitespace) {
        return None;
    }
    let value = value.trim_start();
    let value = match value.find(" ::") {
        Some(end) => &value[..end],
        None => value,
    };
    let value = value.trim();
    (!value.is_empty()).then(|| value.to_string())
}

/// Splits an AMR file into blocks. Blocks without any PENMAN lines (pure
/// comment headers) are skipped.
pub fn parse_amr_file(text: &str) -> Result<Vec<AmrBlock>, AmrError> {
    let mut blocks = Vec::new();
    let mut current: Option<AmrBlock> = None;

    let flush = |block: Option<AmrBlock>, blocks: &mut Vec<AmrBlock>| {
        if let Some(b) = block {
            if !b.penman.trim().is_empty() {
                blocks.push(b);
            }
        }
    };

    for (idx, raw_line) in text.lines().enumerate() {
        let line = raw_line.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush(current.take(), &mut blocks);
            continue;
        }
        let block = current.get_or_insert_with(|| AmrBlock {
            id: None,
            penman: String::new(),
            line: idx + 1,
            penman_line: 0,
        });
        if line.trim_start().starts_with('#') {
            if let Some(id) = metadata_id(line.trim_start()) {
                if block.id.is_some() {
                    return Err(AmrError::File {
                        line: idx + 1,
                        reason: "block has two ::id lines".into(),
                    });
                }
                block.id = Some(id);
            }
        } else {
            if block.penman.is_empty() {
                block.penman_line = idx + 1;
            } else {
                block.penman.push('\n');
            }
            block.penman.push_str(line);
        }
    }
    flush(current.take(), &mut blocks);
    Ok(blocks)
}
