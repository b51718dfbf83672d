//! Command-line front end for `mattolab`: JSON formats, the verification
//! suite, reports and run manifests.

pub mod app;
pub mod io;
pub mod manifest;
pub mod report;
pub mod verify;
