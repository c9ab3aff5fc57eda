//! Text formats: the polynomial expression grammar and the JSON document.

mod document;
mod parse;

pub use document::{
    raw_bundle, raw_chart, raw_connection, raw_morphism, raw_section, raw_supermanifold, RawBundle, RawChart,
    RawConnection, RawDocument, RawEntry, RawField, RawGrid, RawMap, RawMorphism, RawPath, RawSection,
    RawSupermanifold, SpecDocument,
};
pub use parse::{parse_poly, ParseError};

/// Fixed 12-significant-digit rendering used by the numeric commands.
pub fn format_decimal(x: f64) -> String {
    format!("{x:.11e}")
}
