//! The bundled example discussion, before and after restructuring.

use crate::codec::parse_thread;
use crate::thread::Thread;

pub const TABLE1_JSON: &str = include_str!("../../../fixtures/table1.json");
pub const TABLE2_JSON: &str = include_str!("../../../fixtures/table2.json");

/// 20 posts, five topics, two annotated duplicates.
pub fn original() -> Thread {
    parse_thread(TABLE1_JSON).expect("bundled fixture is valid")
}

/// The hand-restructured 18-post version with one sub-thread per topic.
pub fn restructured() -> Thread {
    parse_thread(TABLE2_JSON).expect("bundled fixture is valid")
}
