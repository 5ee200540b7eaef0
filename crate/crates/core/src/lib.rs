//! Source-to-source migration of neural network definitions between a
//! channel-last and a channel-first deep learning framework, in either
//! sequential or subclassing style, through a framework-neutral pivot model.

pub mod codegen;
pub mod frontend;
pub mod migrate;
pub mod pivot;
pub mod shape;
