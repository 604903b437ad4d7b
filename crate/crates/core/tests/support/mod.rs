pub mod three_level;
