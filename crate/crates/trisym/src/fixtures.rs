//! Small maps used by tests, examples and the CLI.

pub const K4: &str = include_str!("../fixtures/k4.rs1");
pub const BIPYR5: &str = include_str!("../fixtures/bipyr5.rs1");
pub const OCT6: &str = include_str!("../fixtures/oct6.rs1");
pub const NESTED_HEXAGON: &str = include_str!("../fixtures/nested_hexagon.rs1");
pub const THREE_LEVELS: &str = include_str!("../fixtures/three_levels.rs1");
pub const EDGE_POLE: &str = include_str!("../fixtures/edge_pole.rs1");
pub const FACE_POLE: &str = include_str!("../fixtures/face_pole.rs1");
pub const FACE_POLE_NET: &str = include_str!("../fixtures/face_pole_net.rs1");
