use std::sync::Mutex;

use ulid::Generator;

static GENERATOR: Mutex<Option<Generator>> = Mutex::new(None);

/// Returns a fresh ULID-based identifier with a short type prefix
/// (`m_` model, `n_` node, `l_` link, `e_` evidence).
///
/// Identifiers from one process are strictly increasing, so lexicographic
/// order matches creation order.
pub fn fresh(prefix: &str) -> String {
    let mut guard = GENERATOR.lock().unwrap_or_else(|e| e.into_inner());
    let generator = guard.get_or_insert_with(Generator::new);
    let ulid = match generator.generate() {
        Ok(ulid) => ulid,
        // random part overflowed within one millisecond
        Err(_) => {
            *generator = Generator::new();
            std::thread::sleep(std::time::Duration::from_millis(1));
            generator.generate().expect("fresh generator after clock tick")
        }
    };
    format!("{prefix}_{ulid}")
}
