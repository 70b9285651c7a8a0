pub mod airy;
