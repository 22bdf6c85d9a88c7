#![allow(dead_code)]

pub mod garver;
pub mod simple_paths;
