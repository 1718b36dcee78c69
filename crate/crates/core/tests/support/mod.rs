pub mod grid;
pub mod oracle;
