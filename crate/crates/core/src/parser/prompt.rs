//! The versioned parsing prompt: a one-shot example plus the instruction
//! set, with slots for the target location string and its country.

use serde::{Deserialize, Serialize};

use super::ParseError;

pub const LOCATION_SLOT: &str = "{{LOCATION}}";
pub const COUNTRY_SLOT: &str = "{{COUNTRY}}";

const DEFAULT_EXAMPLE_INPUT: &str =
    "Mirpur Khas, Umerkot and Sanghar districts (Sindh province)";

const DEFAULT_EXAMPLE_OUTPUT: &str = r#"{"Admin1": ["Sindh"], "Admin2": [{"name": "Mirpur Khas", "parent": "Sindh"}, {"name": "Umerkot", "parent": "Sindh"}, {"name": "Sanghar", "parent": "Sindh"}], "Admin3": []}"#;

const DEFAULT_SYSTEM_TEXT: &str = r#"You are a geographer. Convert the location description of a disaster event into structured JSON.

Rules:
- Identify each unique place mentioned in the description.
- Fix minor typographical and formatting errors in place names.
- Determine the administrative granularity of every place: Admin1 (first subnational level, e.g. province or state), Admin2 (e.g. district or county), Admin3 (e.g. municipality or village).
- Parenthetical expressions are higher-level administrative units: attach the places they follow to them as children.
- Record each lower-level place together with its parent administrative unit.
- Remove generic descriptors such as "province", "district", "area" or "village" when they are not part of the official name.
- Use the country only to disambiguate places; do not output the country itself.
- Answer with a single JSON object containing exactly the keys "Admin1", "Admin2" and "Admin3". Each key maps to a list; list items are either a plain name or an object {"name": ..., "parent": ...}. Use empty lists for levels with no places.

Example input (country: Pakistan):
{{EXAMPLE_INPUT}}

Example output:
{{EXAMPLE_OUTPUT}}

Country: {{COUNTRY}}
Location description: {{LOCATION}}
"#;

/// Prompt asset with slots for the target record. The version participates
/// in the parse cache key, so editing the wording invalidates stale
/// parses.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub system_text: String,
    pub example_input: String,
    pub example_output: String,
    pub country_slot: String,
    pub location_slot: String,
    pub version: String,
}

impl Default for PromptTemplate {
    fn default() -> Self {
        PromptTemplate {
            system_text: DEFAULT_SYSTEM_TEXT.to_string(),
            example_input: DEFAULT_EXAMPLE_INPUT.to_string(),
            example_output: DEFAULT_EXAMPLE_OUTPUT.to_string(),
            country_slot: COUNTRY_SLOT.to_string(),
            location_slot: LOCATION_SLOT.to_string(),
            version: "v1".to_string(),
        }
    }
}

impl PromptTemplate {
    /// Load a template from a TOML file with the same field names.
    pub fn from_file(path: &std::path::Path) -> Result<PromptTemplate, std::io::Error> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))
    }
}

/// Render the template for one record. The result embeds the one-shot
/// example, the instruction set, and both the location and the country
/// verbatim.
pub fn build_prompt(
    template: &PromptTemplate,
    location: &str,
    country: &str,
) -> Result<String, ParseError> {
    if location.trim().is_empty() {
        return Err(ParseError::EmptyLocation);
    }
    Ok(template
        .system_text
        .replace("{{EXAMPLE_INPUT}}", &template.example_input)
        .replace("{{EXAMPLE_OUTPUT}}", &template.example_output)
        .replace(&template.location_slot, location)
        .replace(&template.country_slot, country))
}
