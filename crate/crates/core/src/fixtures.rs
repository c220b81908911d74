//! The four-sequence running example, with letters mapped a=1 .. g=7.

use crate::model::{Item, SequenceDatabase};

pub const A: u32 = 1;
pub const B: u32 = 2;
pub const C: u32 = 3;
pub const D: u32 = 4;
pub const E: u32 = 5;
pub const F: u32 = 6;
pub const G: u32 = 7;

pub fn item(id: u32) -> Item {
    Item::new(i64::from(id)).expect("positive id")
}

/// s1 = <(g),(a,d)>, s2 = <(g),(a,b,c,d),(b),(f)>,
/// s3 = <(g),(a,b,c,d),(a,b),(e)>, s4 = <(a),(b,c,d,e),(e),(f)>.
pub fn table1() -> SequenceDatabase {
    SequenceDatabase::from_raw(&[
        vec![vec![7], vec![1, 4]],
        vec![vec![7], vec![1, 2, 3, 4], vec![2], vec![6]],
        vec![vec![7], vec![1, 2, 3, 4], vec![1, 2], vec![5]],
        vec![vec![1], vec![2, 3, 4, 5], vec![5], vec![6]],
    ])
    .expect("valid fixture")
}
