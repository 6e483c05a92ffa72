pub mod spec_lang;
pub mod value;
pub mod dataset_io;
pub mod eval_core;
pub mod railway_model;
pub mod codec;
pub mod validator;
