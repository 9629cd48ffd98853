use std::sync::Arc;

use parking_lot::RwLock;

use crate::engine::Engine;
use crate::error::Result;
use crate::model::PrincipalId;

/// An engine shared between threads. Mutations take the write lock, so
/// they apply one at a time in arrival order; reads run concurrently over
/// committed state. A read that is denied is recorded in the audit log
/// before the error is returned.
#[derive(Clone)]
pub struct SharedEngine {
    inner: Arc<RwLock<Engine>>,
}

impl SharedEngine {
    pub fn new(engine: Engine) -> Self {
        Self {
            inner: Arc::new(RwLock::new(engine)),
        }
    }

    /// Runs a read operation on behalf of `actor`.
    pub fn read<T>(&self, actor: &PrincipalId, f: impl FnOnce(&Engine) -> Result<T>) -> Result<T> {
        let result = f(&self.inner.read());
        if let Err(err) = &result {
            if err.is_denial() {
                self.inner.write().record_denial(actor, err)?;
            }
        }
        result
    }

    pub fn write<T>(&self, f: impl FnOnce(&mut Engine) -> Result<T>) -> Result<T> {
        f(&mut self.inner.write())
    }

    /// Unaudited access, for authentication and integrity checks.
    pub fn inspect<T>(&self, f: impl FnOnce(&Engine) -> T) -> T {
        f(&self.inner.read())
    }
}

impl std::fmt::Debug for SharedEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_tuple("SharedEngine").field(&*self.inner.read()).finish()
    }
}
