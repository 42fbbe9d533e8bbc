//! Small English helpers: plural folding, number words, articles.

const NUMBER_WORDS: [&str; 21] = [
    "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten", "eleven",
    "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen", "eighteen", "nineteen",
    "twenty",
];

/// English words for 0 through 20, decimal digits beyond.
pub fn number_to_word(n: u64) -> String {
    match NUMBER_WORDS.get(n as usize) {
        Some(w) if n <= 20 => (*w).to_string(),
        _ => n.to_string(),
    }
}

pub fn word_to_number(word: &str) -> Option<u64> {
    NUMBER_WORDS.iter().position(|w| *w == word).map(|i| i as u64)
}

/// Words whose trailing `s` is not a plural marker.
const INVARIANT_S: &[&str] = &["glass", "grass", "bus", "lens", "gas", "canvas", "mattress", "dress", "chess", "series", "species"];

fn singular_word(word: &str) -> String {
    if INVARIANT_S.contains(&word) || word.len() <= 3 {
        return word.to_string();
    }
    if let Some(stem) = word.strip_suffix("ies") {
        return format!("{stem}y");
    }
    if let Some(stem) = word.strip_suffix("ves") {
        return format!("{stem}f");
    }
    for suffix in ["sses", "xes", "ches", "shes", "zes"] {
        if word.ends_with(suffix) {
            return word[..word.len() - 2].to_string();
        }
    }
    if word.ends_with("ss") || word.ends_with("us") || word.ends_with("is") {
        return word.to_string();
    }
    word.strip_suffix('s').unwrap_or(word).to_string()
}

/// Singular form of a label; only the head (last) word is inflected.
pub fn singularize(label: &str) -> String {
    match label.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", singular_word(last)),
        None => singular_word(label),
    }
}

fn plural_word(word: &str) -> String {
    if word.ends_with('y') && !word.ends_with("ay") && !word.ends_with("ey") && !word.ends_with("oy") {
        format!("{}ies", &word[..word.len() - 1])
    } else if word == "shelf" || word == "leaf" {
        format!("{}ves", &word[..word.len() - 1])
    } else if ["s", "x", "ch", "sh", "z"].iter().any(|s| word.ends_with(s)) {
        format!("{word}es")
    } else {
        format!("{word}s")
    }
}

pub fn pluralize(label: &str) -> String {
    match label.rsplit_once(' ') {
        Some((head, last)) => format!("{head} {}", plural_word(last)),
        None => plural_word(label),
    }
}

/// `"a"` or `"an"` by the first letter.
pub fn indefinite_article(word: &str) -> &'static str {
    match word.chars().next() {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_words() {
        assert_eq!(number_to_word(2), "two");
        assert_eq!(number_to_word(0), "zero");
        assert_eq!(number_to_word(20), "twenty");
        assert_eq!(number_to_word(21), "21");
        assert_eq!(word_to_number("seven"), Some(7));
        assert_eq!(word_to_number("many"), None);
    }

    #[test]
    fn plural_round_trip() {
        for w in [
            "pillow", "chair", "box", "shelf", "bench", "dish", "library", "file cabinet", "glass",
            "trash can", "key", "couch", "house", "case",
        ] {
            assert_eq!(singularize(&pluralize(w)), w, "{w}");
            assert_eq!(singularize(w), w, "{w}");
        }
        assert_eq!(pluralize("shelf"), "shelves");
        assert_eq!(singularize("pillows"), "pillow");
    }

    #[test]
    fn articles() {
        assert_eq!(indefinite_article("existence"), "an");
        assert_eq!(indefinite_article("counting"), "a");
    }
}
