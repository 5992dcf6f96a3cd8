//! Progress lines on stderr, switched off globally by `set_enabled(false)`
//! or by setting `ATTNAE_QUIET`.

use std::sync::atomic::{AtomicBool, Ordering};

static ENABLED: AtomicBool = AtomicBool::new(true);

pub fn set_enabled(on: bool) {
    ENABLED.store(on, Ordering::Relaxed);
}

pub fn enabled() -> bool {
    ENABLED.load(Ordering::Relaxed) && std::env::var_os("ATTNAE_QUIET").is_none()
}

pub fn note(msg: &str) {
    if enabled() {
        eprintln!("{msg}");
    }
}
