//! Finite structures, neighborhood types, order construction and
//! two-pebble games.

mod canon;
pub mod corpus;
pub mod fms;
pub mod formula;
pub mod frequency;
pub mod game;
pub mod neighborhood;
pub mod order;
pub mod pipeline;
pub mod structure;

pub use fms::{parse_structure, serialize_structure, FmsError};
pub use formula::{Formula, Fragment, FragmentTag};
pub use structure::{Element, OrderedStructure, Signature, Structure, StructureError};
