pub mod cancel;
pub mod env;
pub mod evolution;
pub mod error;
pub mod io;
pub mod numerics;
pub mod order;
pub mod sok;
pub mod tasks;
