use alloc::string::String;

/// Lowercases and collapses every whitespace run to a single space, trimming
/// both ends. Used for event-type and alert-criteria matching.
pub(crate) fn fold(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    for word in raw.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}
