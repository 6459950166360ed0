//! Relation vocabulary and Wikidata property codes.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

/// The 96 relation labels accepted as gold and prediction targets.
pub const VOCABULARY: [&str; 96] = [
    "author", "award_received", "basin_country", "capital", "capital_of",
    "cast_member", "chairperson", "child", "composer", "conflict",
    "contains_admin", "continent", "country", "country_of_citizenship",
    "country_of_origin", "creator", "date_of_birth", "date_of_death",
    "developer", "diplomatic_relation", "director", "dissolved",
    "educated_at", "employer", "end_time", "ethnic_group", "father",
    "followed_by", "follows", "founded_by", "genre", "has_part",
    "head_of_government", "head_of_state", "headquarters_location",
    "inception", "influenced_by", "instance_of", "jurisdiction",
    "languages_spoken", "league", "legislative_body", "located_in_admin",
    "located_near_water", "located_on_terrain", "location",
    "location_of_formation", "lyrics_by", "manufacturer", "member_of",
    "member_of_political_party", "member_of_sports_team",
    "military_branch", "mother", "mouth_of_watercourse",
    "narrative_location", "notable_work", "official_language",
    "operator", "original_language", "original_network",
    "owned_by", "parent_organization", "parent_taxon",
    "part_of", "participant", "participant_in", "performer",
    "place_of_birth", "place_of_death", "platform", "point_in_time",
    "position_held", "producer", "product", "production_company",
    "publication_date", "publisher", "record_label", "religion",
    "replaced_by", "replaces", "residence", "screenwriter",
    "separated_from", "series", "shares_border_with", "sibling",
    "spouse", "start_time", "subclass_of", "subsidiary",
    "territory_claimed_by", "twinned_city", "unemployment_rate",
    "work_location",
];

/// Wikidata property code for each vocabulary label.
pub const PROPERTY_CODES: [(&str, &str); 96] = [
    ("P6", "head_of_government"), ("P17", "country"), ("P19", "place_of_birth"),
    ("P20", "place_of_death"), ("P22", "father"), ("P25", "mother"),
    ("P26", "spouse"), ("P27", "country_of_citizenship"), ("P30", "continent"),
    ("P31", "instance_of"), ("P35", "head_of_state"), ("P36", "capital"),
    ("P37", "official_language"), ("P39", "position_held"), ("P40", "child"),
    ("P47", "shares_border_with"), ("P50", "author"), ("P54", "member_of_sports_team"),
    ("P57", "director"), ("P58", "screenwriter"), ("P69", "educated_at"),
    ("P86", "composer"), ("P102", "member_of_political_party"), ("P108", "employer"),
    ("P112", "founded_by"), ("P118", "league"), ("P123", "publisher"),
    ("P127", "owned_by"), ("P131", "located_in_admin"), ("P136", "genre"),
    ("P137", "operator"), ("P140", "religion"), ("P150", "contains_admin"),
    ("P155", "follows"), ("P156", "followed_by"), ("P159", "headquarters_location"),
    ("P161", "cast_member"), ("P162", "producer"), ("P166", "award_received"),
    ("P170", "creator"), ("P171", "parent_taxon"), ("P172", "ethnic_group"),
    ("P175", "performer"), ("P176", "manufacturer"), ("P178", "developer"),
    ("P179", "series"), ("P190", "twinned_city"), ("P194", "legislative_body"),
    ("P205", "basin_country"), ("P206", "located_near_water"), ("P241", "military_branch"),
    ("P264", "record_label"), ("P272", "production_company"), ("P276", "location"),
    ("P279", "subclass_of"), ("P355", "subsidiary"), ("P361", "part_of"),
    ("P364", "original_language"), ("P400", "platform"), ("P403", "mouth_of_watercourse"),
    ("P449", "original_network"), ("P463", "member_of"), ("P488", "chairperson"),
    ("P495", "country_of_origin"), ("P527", "has_part"), ("P530", "diplomatic_relation"),
    ("P551", "residence"), ("P569", "date_of_birth"), ("P570", "date_of_death"),
    ("P571", "inception"), ("P576", "dissolved"), ("P577", "publication_date"),
    ("P580", "start_time"), ("P582", "end_time"), ("P585", "point_in_time"),
    ("P607", "conflict"), ("P676", "lyrics_by"), ("P706", "located_on_terrain"),
    ("P710", "participant"), ("P737", "influenced_by"), ("P740", "location_of_formation"),
    ("P749", "parent_organization"), ("P800", "notable_work"), ("P807", "separated_from"),
    ("P840", "narrative_location"), ("P937", "work_location"), ("P1001", "jurisdiction"),
    ("P1056", "product"), ("P1198", "unemployment_rate"), ("P1336", "territory_claimed_by"),
    ("P1344", "participant_in"), ("P1365", "replaces"), ("P1366", "replaced_by"),
    ("P1376", "capital_of"), ("P1412", "languages_spoken"), ("P3373", "sibling"),
];

/// Trim, lowercase, and join words with underscores.
pub fn normalize_label(raw: &str) -> String {
    let lowered = raw.trim().to_lowercase();
    let words: Vec<&str> = lowered
        .split(|c: char| c.is_whitespace() || c == '_' || c == '-')
        .filter(|w| !w.is_empty())
        .collect();
    words.join("_")
}

/// `P` or `p` followed by digits.
pub fn is_property_code(raw: &str) -> bool {
    let t = raw.trim();
    t.len() > 1 && (t.starts_with('P') || t.starts_with('p')) && t[1..].bytes().all(|b| b.is_ascii_digit())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolution {
    Canonical(String),
    /// Carries the normalized form that failed to resolve.
    Unresolved(String),
}

impl Resolution {
    pub fn canonical(&self) -> Option<&str> {
        match self {
            Resolution::Canonical(l) => Some(l),
            Resolution::Unresolved(_) => None,
        }
    }
}

/// Vocabulary plus the code table used to resolve raw model labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationLabels {
    vocabulary: BTreeSet<String>,
    codes: BTreeMap<String, String>,
}

impl Default for RelationLabels {
    fn default() -> Self {
        Self {
            vocabulary: VOCABULARY.iter().map(|s| String::from(*s)).collect(),
            codes: PROPERTY_CODES
                .iter()
                .map(|(c, l)| (String::from(*c), String::from(*l)))
                .collect(),
        }
    }
}

impl RelationLabels {
    pub fn new(
        vocabulary: impl IntoIterator<Item = String>,
        codes: impl IntoIterator<Item = (String, String)>,
    ) -> Self {
        Self {
            vocabulary: vocabulary.into_iter().map(|l| normalize_label(&l)).collect(),
            codes: codes
                .into_iter()
                .map(|(c, l)| (c.trim().to_uppercase(), normalize_label(&l)))
                .collect(),
        }
    }

    pub fn with_codes(mut self, codes: impl IntoIterator<Item = (String, String)>) -> Self {
        self.codes = codes
            .into_iter()
            .map(|(c, l)| (c.trim().to_uppercase(), normalize_label(&l)))
            .collect();
        self
    }

    pub fn contains(&self, label: &str) -> bool {
        self.vocabulary.contains(label)
    }

    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.vocabulary.iter().map(String::as_str)
    }

    pub fn codes(&self) -> impl Iterator<Item = (&str, &str)> {
        self.codes.iter().map(|(c, l)| (c.as_str(), l.as_str()))
    }

    /// Label behind a property code, if the code is known.
    pub fn code_label(&self, raw: &str) -> Option<&str> {
        if !is_property_code(raw) {
            return None;
        }
        self.codes.get(&raw.trim().to_uppercase()).map(String::as_str)
    }

    /// Map a raw label to the vocabulary: codes via the table, anything
    /// else by its normalized form.
    pub fn resolve(&self, raw: &str) -> Resolution {
        if let Some(label) = self.code_label(raw) {
            return Resolution::Canonical(String::from(label));
        }
        let norm = normalize_label(raw);
        if self.vocabulary.contains(&norm) {
            Resolution::Canonical(norm)
        } else {
            Resolution::Unresolved(norm)
        }
    }
}
