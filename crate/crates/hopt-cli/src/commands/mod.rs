pub mod compare;
pub mod gen_data;
pub mod hopt_cmd;
pub mod report;
pub mod sweep;
