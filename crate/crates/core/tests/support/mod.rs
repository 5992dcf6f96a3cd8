#![allow(dead_code)]

pub mod gbt_oracle;
pub mod instances;
