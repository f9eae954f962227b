//! Country-name resolution: event records carry English country names,
//! GADM keys on ISO3. A built-in alias table covers the common names;
//! deployments extend it through the pipeline config.

use std::collections::HashMap;

use crate::textnorm;

/// (normalized name, ISO3). Parenthetical qualifiers are stripped by the
/// normalizer, so "Iran (Islamic Republic of)" keys as "iran".
const BUILTIN: &[(&str, &str)] = &[
    ("afghanistan", "AFG"),
    ("albania", "ALB"),
    ("algeria", "DZA"),
    ("angola", "AGO"),
    ("argentina", "ARG"),
    ("armenia", "ARM"),
    ("australia", "AUS"),
    ("austria", "AUT"),
    ("azerbaijan", "AZE"),
    ("bangladesh", "BGD"),
    ("belgium", "BEL"),
    ("benin", "BEN"),
    ("bolivia", "BOL"),
    ("bosnia and herzegovina", "BIH"),
    ("brazil", "BRA"),
    ("bulgaria", "BGR"),
    ("burkina faso", "BFA"),
    ("burundi", "BDI"),
    ("cambodia", "KHM"),
    ("cameroon", "CMR"),
    ("canada", "CAN"),
    ("chad", "TCD"),
    ("chile", "CHL"),
    ("china", "CHN"),
    ("colombia", "COL"),
    ("congo", "COG"),
    ("democratic republic of the congo", "COD"),
    ("costa rica", "CRI"),
    ("cote d'ivoire", "CIV"),
    ("ivory coast", "CIV"),
    ("croatia", "HRV"),
    ("cuba", "CUB"),
    ("czechia", "CZE"),
    ("czech republic", "CZE"),
    ("denmark", "DNK"),
    ("dominican republic", "DOM"),
    ("ecuador", "ECU"),
    ("egypt", "EGY"),
    ("el salvador", "SLV"),
    ("ethiopia", "ETH"),
    ("fiji", "FJI"),
    ("finland", "FIN"),
    ("france", "FRA"),
    ("germany", "DEU"),
    ("ghana", "GHA"),
    ("greece", "GRC"),
    ("guatemala", "GTM"),
    ("guinea", "GIN"),
    ("haiti", "HTI"),
    ("honduras", "HND"),
    ("hungary", "HUN"),
    ("india", "IND"),
    ("indonesia", "IDN"),
    ("iran", "IRN"),
    ("iraq", "IRQ"),
    ("ireland", "IRL"),
    ("israel", "ISR"),
    ("italy", "ITA"),
    ("japan", "JPN"),
    ("jordan", "JOR"),
    ("kazakhstan", "KAZ"),
    ("kenya", "KEN"),
    ("democratic people's republic of korea", "PRK"),
    ("north korea", "PRK"),
    ("republic of korea", "KOR"),
    ("south korea", "KOR"),
    ("lao people's democratic republic", "LAO"),
    ("laos", "LAO"),
    ("lebanon", "LBN"),
    ("liberia", "LBR"),
    ("libya", "LBY"),
    ("madagascar", "MDG"),
    ("malawi", "MWI"),
    ("malaysia", "MYS"),
    ("mali", "MLI"),
    ("mauritania", "MRT"),
    ("mexico", "MEX"),
    ("mongolia", "MNG"),
    ("morocco", "MAR"),
    ("mozambique", "MOZ"),
    ("myanmar", "MMR"),
    ("nepal", "NPL"),
    ("netherlands", "NLD"),
    ("new zealand", "NZL"),
    ("nicaragua", "NIC"),
    ("niger", "NER"),
    ("nigeria", "NGA"),
    ("norway", "NOR"),
    ("pakistan", "PAK"),
    ("panama", "PAN"),
    ("papua new guinea", "PNG"),
    ("paraguay", "PRY"),
    ("peru", "PER"),
    ("philippines", "PHL"),
    ("poland", "POL"),
    ("portugal", "PRT"),
    ("romania", "ROU"),
    ("russian federation", "RUS"),
    ("russia", "RUS"),
    ("rwanda", "RWA"),
    ("saudi arabia", "SAU"),
    ("senegal", "SEN"),
    ("serbia", "SRB"),
    ("sierra leone", "SLE"),
    ("somalia", "SOM"),
    ("south africa", "ZAF"),
    ("south sudan", "SSD"),
    ("spain", "ESP"),
    ("sri lanka", "LKA"),
    ("sudan", "SDN"),
    ("sweden", "SWE"),
    ("switzerland", "CHE"),
    ("syrian arab republic", "SYR"),
    ("syria", "SYR"),
    ("taiwan", "TWN"),
    ("tajikistan", "TJK"),
    ("united republic of tanzania", "TZA"),
    ("tanzania", "TZA"),
    ("thailand", "THA"),
    ("turkiye", "TUR"),
    ("turkey", "TUR"),
    ("uganda", "UGA"),
    ("ukraine", "UKR"),
    ("united arab emirates", "ARE"),
    ("united kingdom of great britain and northern ireland", "GBR"),
    ("united kingdom", "GBR"),
    ("united states of america", "USA"),
    ("united states", "USA"),
    ("uruguay", "URY"),
    ("uzbekistan", "UZB"),
    ("bolivarian republic of venezuela", "VEN"),
    ("venezuela", "VEN"),
    ("viet nam", "VNM"),
    ("vietnam", "VNM"),
    ("yemen", "YEM"),
    ("zambia", "ZMB"),
    ("zimbabwe", "ZWE"),
];

/// Resolves country names to ISO3 codes; extendable at runtime.
#[derive(Debug, Clone)]
pub struct CountryAliases {
    map: HashMap<String, String>,
}

impl Default for CountryAliases {
    fn default() -> Self {
        CountryAliases::builtin()
    }
}

impl CountryAliases {
    pub fn builtin() -> CountryAliases {
        let map = BUILTIN
            .iter()
            .map(|(name, iso)| (name.to_string(), iso.to_string()))
            .collect();
        CountryAliases { map }
    }

    /// Register an extra alias; later entries win over built-ins.
    pub fn extend(&mut self, name: &str, iso3: &str) {
        if let Ok(n) = textnorm::normalize_name(name, false) {
            self.map.insert(n.text, iso3.to_uppercase());
        }
    }

    /// ISO3 for a raw country name. Bare ISO3 codes pass through.
    pub fn resolve(&self, raw: &str) -> Option<String> {
        let normalized = textnorm::normalize_name(raw, false).ok()?.text;
        if let Some(iso) = self.map.get(&normalized) {
            return Some(iso.clone());
        }
        let trimmed = raw.trim();
        if trimmed.len() == 3 && trimmed.chars().all(|c| c.is_ascii_alphabetic()) {
            return Some(trimmed.to_uppercase());
        }
        None
    }

    /// Whether two country strings refer to the same country: both sides
    /// are alias-normalized; when neither resolves, normalized names are
    /// compared directly.
    pub fn same_country(&self, a: &str, b: &str) -> bool {
        match (self.resolve(a), self.resolve(b)) {
            (Some(x), Some(y)) => x == y,
            _ => {
                let na = textnorm::normalize_name(a, false).map(|n| n.text);
                let nb = textnorm::normalize_name(b, false).map(|n| n.text);
                matches!((na, nb), (Ok(x), Ok(y)) if x == y)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_plain_and_decorated_names() {
        let aliases = CountryAliases::builtin();
        assert_eq!(aliases.resolve("Pakistan").as_deref(), Some("PAK"));
        assert_eq!(
            aliases.resolve("Iran (Islamic Republic of)").as_deref(),
            Some("IRN")
        );
        assert_eq!(aliases.resolve("Netherlands (the)").as_deref(), Some("NLD"));
        assert_eq!(aliases.resolve("VIET NAM").as_deref(), Some("VNM"));
    }

    #[test]
    fn bare_iso3_passes_through() {
        let aliases = CountryAliases::builtin();
        assert_eq!(aliases.resolve("PAK").as_deref(), Some("PAK"));
        assert_eq!(aliases.resolve("xyz").as_deref(), Some("XYZ"));
    }

    #[test]
    fn congo_variants_stay_distinct() {
        let aliases = CountryAliases::builtin();
        assert_eq!(aliases.resolve("Congo (the)").as_deref(), Some("COG"));
        assert_eq!(
            aliases
                .resolve("Democratic Republic of the Congo (the)")
                .as_deref(),
            Some("COD")
        );
    }

    #[test]
    fn runtime_extension_wins() {
        let mut aliases = CountryAliases::builtin();
        aliases.extend("Testland", "TST");
        assert_eq!(aliases.resolve("testland").as_deref(), Some("TST"));
    }

    #[test]
    fn same_country_after_aliasing() {
        let aliases = CountryAliases::builtin();
        assert!(aliases.same_country("Pakistan", "PAK"));
        assert!(aliases.same_country("Turkey", "Turkiye"));
        assert!(!aliases.same_country("Pakistan", "India"));
        // unresolvable names compare by normalized text
        assert!(aliases.same_country("Fantasialand", "fantasialand"));
    }

    #[test]
    fn unknown_long_name_is_none() {
        let aliases = CountryAliases::builtin();
        assert_eq!(aliases.resolve("Kingdom of Nowhere"), None);
    }
}
