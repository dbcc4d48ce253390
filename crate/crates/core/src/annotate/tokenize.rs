use super::Token;

const DETACHABLE: &[char] = &['.', '?', '!', ',', ';', ':'];

pub fn is_punctuation(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_punctuation())
}

/// Splits on whitespace and detaches a trailing run of sentence punctuation
/// into its own token. Apostrophes and hyphens inside words are kept.
pub fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for piece in text.split_whitespace() {
        if is_punctuation(piece) {
            out.push(Token::new(piece));
            continue;
        }
        let head = piece.trim_end_matches(DETACHABLE);
        out.push(Token::new(head));
        if head.len() < piece.len() {
            out.push(Token::new(&piece[head.len()..]));
        }
    }
    out
}
