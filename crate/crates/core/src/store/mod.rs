//! Document persistence and interchange.
//!
//! Models are stored as canonical JSON (`.dreams.json`): keys sorted, arrays
//! in insertion order, two-space indentation and a trailing newline, so
//! identical documents always produce identical bytes. DOT and SVG exports
//! are one-way.

mod dot;
mod files;
mod json;
mod svg;

pub use dot::export_dot;
pub use files::{is_temp_file, write_atomic, FILE_EXTENSION};
pub use json::{canonical, deserialize, parse_unchecked, serialize, to_value};
pub use svg::{render_svg, RenderOptions};
