//! Fall-scenario prompt catalogs and their demographic / placement variants.
//!
//! Demographic tags replace the leading subject noun phrase ("A person",
//! "An elderly person", ...) with the tag's phrase. When the prompt has no
//! recognised subject, or already uses the tag's phrase, a short clause naming
//! the subject is appended instead so every variant differs from its base.
//! Placement tags append a sentence naming where the sensor is worn. These
//! templates are a toolkit convention.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::IngestError;

/// Bundled list of 50 human-designed fall scenarios.
pub const BUNDLED_FALL_PROMPTS: &str = include_str!("../../data/fall_prompts.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantTag {
    Neutral,
    Man,
    Woman,
    Young,
    Elderly,
    LeftWrist,
    RightWrist,
    Waist,
}

impl VariantTag {
    pub const ALL: [VariantTag; 8] = [
        VariantTag::Neutral,
        VariantTag::Man,
        VariantTag::Woman,
        VariantTag::Young,
        VariantTag::Elderly,
        VariantTag::LeftWrist,
        VariantTag::RightWrist,
        VariantTag::Waist,
    ];

    /// Seven tags used by the CLI when none are given (`waist` is opt-in).
    pub const DEFAULT_SET: [VariantTag; 7] = [
        VariantTag::Neutral,
        VariantTag::Man,
        VariantTag::Woman,
        VariantTag::Young,
        VariantTag::Elderly,
        VariantTag::LeftWrist,
        VariantTag::RightWrist,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VariantTag::Neutral => "neutral",
            VariantTag::Man => "man",
            VariantTag::Woman => "woman",
            VariantTag::Young => "young",
            VariantTag::Elderly => "elderly",
            VariantTag::LeftWrist => "left_wrist",
            VariantTag::RightWrist => "right_wrist",
            VariantTag::Waist => "waist",
        }
    }

    /// Subject noun phrase substituted for demographic tags.
    pub fn noun_phrase(self) -> Option<&'static str> {
        match self {
            VariantTag::Man => Some("A man"),
            VariantTag::Woman => Some("A woman"),
            VariantTag::Young => Some("A young person"),
            VariantTag::Elderly => Some("An elderly person"),
            _ => None,
        }
    }

    fn subject_clause(self) -> Option<&'static str> {
        match self {
            VariantTag::Man => Some("The person is a man."),
            VariantTag::Woman => Some("The person is a woman."),
            VariantTag::Young => Some("The person is young."),
            VariantTag::Elderly => Some("The person is elderly."),
            _ => None,
        }
    }

    pub fn placement_clause(self) -> Option<&'static str> {
        match self {
            VariantTag::LeftWrist => Some("The sensor is worn on the left wrist."),
            VariantTag::RightWrist => Some("The sensor is worn on the right wrist."),
            VariantTag::Waist => Some("The sensor is worn at the waist."),
            _ => None,
        }
    }
}

impl fmt::Display for VariantTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VariantTag {
    type Err = IngestError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        VariantTag::ALL
            .into_iter()
            .find(|t| t.as_str() == key)
            .ok_or_else(|| IngestError::UnknownTag(s.to_string()))
    }
}

/// Parses a comma-separated tag list such as `"neutral,man,woman"`.
pub fn parse_tags(list: &str) -> Result<Vec<VariantTag>, IngestError> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(str::parse).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptCatalog {
    base: Vec<String>,
}

impl PromptCatalog {
    pub fn new(base: Vec<String>) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        for p in &base {
            if p.trim().is_empty() {
                return Err(IngestError::Prompt("empty prompt".into()));
            }
            if !seen.insert(p.as_str()) {
                return Err(IngestError::Prompt(format!("duplicate base prompt `{p}`")));
            }
        }
        Ok(Self { base })
    }

    /// One prompt per non-empty line.
    pub fn parse(text: &str) -> Result<Self, IngestError> {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
    }

    pub fn bundled() -> Self {
        Self::parse(BUNDLED_FALL_PROMPTS).expect("bundled prompt list is valid")
    }

    pub fn base_prompts(&self) -> &[String] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.base.len()
    }

    pub fn is_empty(&self) -> bool {
        self.base.is_empty()
    }
}

const SUBJECT_PHRASES: [&str; 6] = ["An elderly person", "A young person", "A person", "A child", "A man", "A woman"];

fn swap_pronouns_to_female(text: &str) -> String {
    text.split(' ')
        .map(|word| {
            let core_end = word.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(word.len());
            let (core, tail) = word.split_at(core_end);
            match core {
                "his" => format!("her{tail}"),
                "he" => format!("she{tail}"),
                "himself" => format!("herself{tail}"),
                _ => word.to_string(),
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Rewrites one prompt for one tag.
pub fn rewrite_prompt(prompt: &str, tag: VariantTag) -> String {
    if let Some(clause) = tag.placement_clause() {
        return format!("{prompt} {clause}");
    }
    let (Some(phrase), Some(clause)) = (tag.noun_phrase(), tag.subject_clause()) else {
        return prompt.to_string();
    };
    let subject = SUBJECT_PHRASES
        .iter()
        .find(|s| prompt.starts_with(*s) && prompt[s.len()..].starts_with([' ', ',', '.']));
    let rewritten = match subject {
        Some(s) if *s != phrase => format!("{phrase}{}", &prompt[s.len()..]),
        _ => format!("{prompt} {clause}"),
    };
    if tag == VariantTag::Woman {
        swap_pronouns_to_female(&rewritten)
    } else {
        rewritten
    }
}

/// Every base prompt crossed with every tag, base-major.
pub fn generate_prompt_variants(catalog: &PromptCatalog, tags: &[VariantTag]) -> Result<Vec<String>, IngestError> {
    let mut unique_tags = HashSet::new();
    if let Some(dup) = tags.iter().find(|t| !unique_tags.insert(**t)) {
        return Err(IngestError::Prompt(format!("tag `{dup}` selected twice")));
    }
    let mut out = Vec::with_capacity(catalog.len() * tags.len());
    let mut seen = HashSet::with_capacity(out.capacity());
    for base in catalog.base_prompts() {
        for &tag in tags {
            let p = rewrite_prompt(base, tag);
            if !seen.insert(p.clone()) {
                return Err(IngestError::Prompt(format!("variant `{p}` produced twice")));
            }
            out.push(p);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_has_fifty() {
        assert_eq!(PromptCatalog::bundled().len(), 50);
    }

    #[test]
    fn neutral_is_identity() {
        let cat = PromptCatalog::bundled();
        assert_eq!(generate_prompt_variants(&cat, &[VariantTag::Neutral]).unwrap(), cat.base_prompts());
    }

    #[test]
    fn gender_variants_contain_noun_phrase() {
        let cat = PromptCatalog::new(vec![
            "A person walks, slips suddenly, and falls on his back on the floor.".into(),
            "An elderly person is falling down.".into(),
            "Someone trips on a rug.".into(),
        ])
        .unwrap();
        let out = generate_prompt_variants(&cat, &[VariantTag::Man, VariantTag::Woman]).unwrap();
        assert_eq!(out.len(), 6);
        for (i, p) in out.iter().enumerate() {
            let needle = if i % 2 == 0 { "man" } else { "woman" };
            assert!(p.to_lowercase().contains(needle), "{p}");
        }
        assert_eq!(out[1], "A woman walks, slips suddenly, and falls on her back on the floor.");
        assert_eq!(out[4], "Someone trips on a rug. The person is a man.");
    }

    #[test]
    fn elderly_on_elderly_prompt_still_differs() {
        let p = "An elderly person is falling down.";
        let v = rewrite_prompt(p, VariantTag::Elderly);
        assert_ne!(v, p);
        assert!(v.contains("elderly"));
    }

    #[test]
    fn placement_clause_appended() {
        let v = rewrite_prompt("A person falls.", VariantTag::Waist);
        assert_eq!(v, "A person falls. The sensor is worn at the waist.");
    }

    #[test]
    fn unknown_tag_and_duplicates() {
        assert!(matches!("teen".parse::<VariantTag>(), Err(IngestError::UnknownTag(_))));
        assert!(parse_tags("neutral, man,bogus").is_err());
        assert_eq!(parse_tags("neutral,left-wrist").unwrap(), vec![VariantTag::Neutral, VariantTag::LeftWrist]);
        let cat = PromptCatalog::bundled();
        assert!(generate_prompt_variants(&cat, &[VariantTag::Man, VariantTag::Man]).is_err());
        assert!(PromptCatalog::new(vec!["a".into(), "a".into()]).is_err());
    }

    #[test]
    fn pronoun_swap_keeps_punctuation() {
        assert_eq!(swap_pronouns_to_female("then he falls on his head."), "then she falls on her head.");
        assert_eq!(swap_pronouns_to_female("the hedge, his."), "the hedge, her.");
    }
}
